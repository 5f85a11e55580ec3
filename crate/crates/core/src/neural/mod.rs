//! Small fully connected neural engine with exact backpropagation.

mod adam;
mod checkpoint;
mod dueling;
mod layer;
mod mlp;
mod pretrain;

pub use adam::AdamState;
pub use checkpoint::{load_mlp, save_mlp, Manifest};
pub use dueling::{aggregate, aggregate_backward, argmax, dueling_specs, DuelingNet};
pub use layer::{Activation, Dense, LayerSpec};
pub use mlp::{ForwardCache, Gradients, Mlp};
pub use pretrain::{distance_targets, pretrain_distance_init, PretrainConfig, PretrainReport};

/// Snapshot of the online network used as a frozen target.
pub fn sync_target<T: crate::scalar::Scalar>(online: &DuelingNet<T>) -> DuelingNet<T> {
    online.clone()
}
