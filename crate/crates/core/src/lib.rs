pub mod agent;
pub mod citygen;
pub mod commands;
pub mod config;
pub mod error;
pub mod geometry;
pub mod mdp;
pub mod neural;
pub mod radio;
pub mod radiomap;
pub mod rngs;
pub mod scalar;
pub mod snarm;

pub use error::{Error, Result};
pub use geometry::{Bounds, Vec3};
pub use scalar::Scalar;

/// Double-precision dueling network used for training.
pub type DuelingNet = neural::DuelingNet<f64>;
pub type Mlp = neural::Mlp<f64>;
pub type AdamState = neural::AdamState<f64>;
