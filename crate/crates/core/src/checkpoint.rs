//! Versioned JSON container for trained models.
//!
//! A recurrent checkpoint stores the representation scheme, the model
//! config and the flat parameter vector in the order documented in
//! [`crate::rnn`]. A forest checkpoint stores the tree nodes as a JSON tree.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::extract_features;
use crate::forest::{forest_predict, RandomForest};
use crate::rnn::{predict, BiLstmModel, ModelConfig};
use crate::seqdata::{to_representation, MouseSequence, RepresentationScheme};

pub const FORMAT: &str = "cursor-abandon-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SavedModel {
    Bilstm {
        scheme: RepresentationScheme,
        config: ModelConfig,
        params: Vec<f64>,
    },
    Rf {
        forest: RandomForest,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    /// Name of the experiment cell that produced the model.
    pub cell: String,
    pub model: SavedModel,
}

/// A checkpoint ready to score sequences.
#[derive(Debug, Clone)]
pub enum Predictor {
    Bilstm {
        scheme: RepresentationScheme,
        model: BiLstmModel,
    },
    Rf(RandomForest),
}

impl Predictor {
    /// Probability of good abandonment.
    pub fn predict(&self, seq: &MouseSequence) -> Result<f64> {
        match self {
            Predictor::Bilstm { scheme, model } => predict(model, &to_representation(seq, scheme)?),
            Predictor::Rf(forest) => Ok(forest_predict(forest, &extract_features(seq))),
        }
    }
}

impl Checkpoint {
    pub fn bilstm(cell: String, scheme: RepresentationScheme, model: &BiLstmModel) -> Self {
        Checkpoint {
            format: FORMAT.into(),
            version: VERSION,
            cell,
            model: SavedModel::Bilstm {
                scheme,
                config: model.config.clone(),
                params: model.params.clone(),
            },
        }
    }

    pub fn rf(cell: String, forest: RandomForest) -> Self {
        Checkpoint {
            format: FORMAT.into(),
            version: VERSION,
            cell,
            model: SavedModel::Rf { forest },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.format != FORMAT {
            return Err(Error::Checkpoint(format!(
                "not a checkpoint (format {:?})",
                ck.format
            )));
        }
        if ck.version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {VERSION})",
                ck.version
            )));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Rebuilds the model, checking the parameter count and input width.
    pub fn into_predictor(self) -> Result<Predictor> {
        match self.model {
            SavedModel::Bilstm {
                scheme,
                config,
                params,
            } => {
                if scheme.channels().is_empty() || scheme.dim() != config.input_dim {
                    return Err(Error::Checkpoint(format!(
                        "scheme width {} does not match model input {}",
                        scheme.dim(),
                        config.input_dim
                    )));
                }
                if scheme.max_len != config.max_len {
                    return Err(Error::Checkpoint(
                        "scheme and model disagree on max_len".into(),
                    ));
                }
                let model = BiLstmModel::from_parts(config, params)
                    .map_err(|e| Error::Checkpoint(e.to_string()))?;
                Ok(Predictor::Bilstm { scheme, model })
            }
            SavedModel::Rf { forest } => {
                if forest.trees.is_empty() {
                    return Err(Error::Checkpoint("forest has no trees".into()));
                }
                Ok(Predictor::Rf(forest))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rnn::init_model;
    use crate::seeds::rng_for;
    use crate::seqdata::tests::seq_from_moves;
    use crate::seqdata::Coords;

    #[test]
    fn bilstm_round_trip_predicts_identically() {
        let scheme = RepresentationScheme::coords_time(Coords::Standardized, true);
        let cfg = ModelConfig {
            units: 3,
            input_dim: scheme.dim(),
            ..ModelConfig::new(scheme.dim())
        };
        let model = init_model(&cfg, &mut rng_for(4, &[])).unwrap();
        let ck = Checkpoint::bilstm("demo".into(), scheme.clone(), &model);
        let back = Checkpoint::from_json(&ck.to_json()).unwrap();
        assert_eq!(back, ck);
        let seq = seq_from_moves(
            "s",
            &[
                (10.0, 20.0, 0.0),
                (400.0, 300.0, 200.0),
                (950.0, 300.0, 900.0),
            ],
        );
        let a = ck.into_predictor().unwrap().predict(&seq).unwrap();
        let b = back.into_predictor().unwrap().predict(&seq).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_wrong_version_and_truncated_params() {
        let scheme = RepresentationScheme::coords_time(Coords::Raw, false);
        let cfg = ModelConfig {
            units: 2,
            num_layers: 1,
            ..ModelConfig::new(scheme.dim())
        };
        let model = init_model(&cfg, &mut rng_for(1, &[])).unwrap();
        let mut ck = Checkpoint::bilstm("x".into(), scheme, &model);
        ck.version = 99;
        assert!(matches!(
            Checkpoint::from_json(&ck.to_json()),
            Err(Error::Checkpoint(_))
        ));
        ck.version = VERSION;
        if let SavedModel::Bilstm { params, .. } = &mut ck.model {
            params.pop();
        }
        assert!(ck.into_predictor().is_err());
    }
}
