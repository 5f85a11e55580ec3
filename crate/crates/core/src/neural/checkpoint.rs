//! Parameter checkpoints: a JSON manifest next to a flat little-endian
//! `f64` array holding every parameter in layer order, weights then biases.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::layer::LayerSpec;
use super::mlp::Mlp;
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: String,
    pub layers: Vec<LayerSpec>,
    pub seed: u64,
    pub step: u64,
    pub n_params: usize,
    pub weight_layout: String,
    pub params_file: String,
}

fn paths(base: &Path) -> (PathBuf, PathBuf) {
    (base.with_extension("json"), base.with_extension("bin"))
}

/// Writes `<base>.json` and `<base>.bin`.
pub fn save_mlp<T: Scalar>(base: &Path, kind: &str, net: &Mlp<T>, seed: u64, step: u64) -> Result<()> {
    let (json, bin) = paths(base);
    let manifest = Manifest {
        kind: kind.to_string(),
        layers: net.specs(),
        seed,
        step,
        n_params: net.num_params(),
        weight_layout: "input-major".into(),
        params_file: bin.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&json, text)?;
    let bytes: Vec<u8> = net.params_flat().into_iter().flat_map(|v| v.as_f64().to_le_bytes()).collect();
    std::fs::write(&bin, bytes)?;
    Ok(())
}

pub fn load_mlp<T: Scalar>(base: &Path) -> Result<(Manifest, Mlp<T>)> {
    let (json, bin) = paths(base);
    for p in [&json, &bin] {
        if !p.exists() {
            return Err(Error::MissingInput(p.clone()));
        }
    }
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(&json)?)
        .map_err(|e| Error::Malformed { path: json.clone(), msg: e.to_string() })?;
    let bytes = std::fs::read(&bin)?;
    if bytes.len() != 8 * manifest.n_params {
        return Err(Error::Malformed {
            path: bin,
            msg: format!("expected {} bytes, found {}", 8 * manifest.n_params, bytes.len()),
        });
    }
    let flat: Vec<T> = bytes
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
        .collect();
    let mut rng = crate::rngs::indexed(0, 0);
    let mut net = Mlp::new(&manifest.layers, &mut rng)?;
    net.set_params_flat(&flat)?;
    Ok((manifest, net))
}
