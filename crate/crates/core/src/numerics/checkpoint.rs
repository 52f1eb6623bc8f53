//! Versioned JSON checkpoints for networks.
//!
//! Values are widened to `f64` on write; both `f32` and `f64` parameters
//! therefore round-trip bit-exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::mlp::{Activation, Dense, Mlp};
use crate::scalar::Scalar;

pub const FORMAT: &str = "emote-networks";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct LayerRecord {
    /// `[inputs, outputs]`
    shape: [usize; 2],
    activation: Activation,
    /// Input-major weight values.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct NetworkRecord {
    layers: Vec<LayerRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    networks: BTreeMap<String, NetworkRecord>,
}

/// A named set of networks, e.g. `{"online": ..., "target": ...}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint<S> {
    pub networks: BTreeMap<String, Mlp<S>>,
}

impl<S: Scalar> Default for Checkpoint<S> {
    fn default() -> Self {
        Self {
            networks: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> Checkpoint<S> {
    pub fn with(mut self, name: &str, net: &Mlp<S>) -> Self {
        self.networks.insert(name.to_string(), net.clone());
        self
    }

    pub fn get(&self, name: &str) -> Result<&Mlp<S>> {
        self.networks
            .get(name)
            .ok_or_else(|| Error::Checkpoint(format!("checkpoint has no network named {name:?}")))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CheckpointFile {
            format: FORMAT.into(),
            version: VERSION,
            networks: self.networks.iter().map(|(k, net)| (k.clone(), record(net))).collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CheckpointFile = serde_json::from_str(text)?;
        if file.format != FORMAT {
            return Err(Error::Checkpoint(format!("unknown format {:?}", file.format)));
        }
        if file.version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {}",
                file.version
            )));
        }
        let mut networks = BTreeMap::new();
        for (name, rec) in file.networks {
            networks.insert(name, restore(rec)?);
        }
        Ok(Self { networks })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn record<S: Scalar>(net: &Mlp<S>) -> NetworkRecord {
    NetworkRecord {
        layers: net
            .layers()
            .iter()
            .map(|l| LayerRecord {
                shape: [l.inputs, l.outputs],
                activation: l.activation,
                weights: l.weights.iter().map(|v| v.as_f64()).collect(),
                bias: l.bias.iter().map(|v| v.as_f64()).collect(),
            })
            .collect(),
    }
}

fn restore<S: Scalar>(rec: NetworkRecord) -> Result<Mlp<S>> {
    let layers = rec
        .layers
        .into_iter()
        .map(|l| Dense {
            inputs: l.shape[0],
            outputs: l.shape[1],
            weights: l.weights.into_iter().map(S::of).collect(),
            bias: l.bias.into_iter().map(S::of).collect(),
            activation: l.activation,
        })
        .collect();
    Mlp::from_layers(layers)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn f32_networks_round_trip_bit_exact(seed in any::<u64>(), hidden in 1usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = Mlp::<f32>::new(&[7, hidden, 3], Activation::Relu, Activation::Sigmoid, &mut rng);
            let ck = Checkpoint::default().with("q", &net);
            let back = Checkpoint::<f32>::from_json(&ck.to_json().unwrap()).unwrap();
            let restored = back.get("q").unwrap();
            for (a, b) in net.layers().iter().zip(restored.layers()) {
                let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
                prop_assert_eq!(bits(&a.weights), bits(&b.weights));
                prop_assert_eq!(bits(&a.bias), bits(&b.bias));
            }
        }
    }

    #[test]
    fn f64_round_trip_through_file() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = Mlp::<f64>::new(&[4, 6, 2], Activation::Relu, Activation::Identity, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/net.json");
        Checkpoint::default().with("net", &net).save(&path).unwrap();
        let back = Checkpoint::<f64>::load(&path).unwrap();
        assert_eq!(back.get("net").unwrap(), &net);
    }

    #[test]
    fn rejects_wrong_version_and_missing_names() {
        let text = r#"{"format":"emote-networks","version":99,"networks":{}}"#;
        assert!(matches!(Checkpoint::<f32>::from_json(text), Err(Error::Checkpoint(_))));
        let empty = Checkpoint::<f32>::default();
        assert!(empty.get("q").is_err());
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        let text = r#"{"format":"emote-networks","version":1,"networks":{"q":{"layers":[
            {"shape":[2,2],"activation":"relu","weights":[1.0],"bias":[0.0,0.0]}]}}}"#;
        assert!(Checkpoint::<f64>::from_json(text).is_err());
    }
}
