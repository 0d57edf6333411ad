use serde::Deserialize;

use crate::error::{Error, Result};
use crate::nn::{Activation, LayerSpec, LossKind, Optimizer, TrainConfig, DEFAULT_MASK_VALUE};

fn linear() -> String {
    "linear".into()
}

fn default_kernel() -> usize {
    3
}

fn default_mask() -> f64 {
    DEFAULT_MASK_VALUE
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum LayerEntry {
    Dense {
        units: usize,
        #[serde(default = "linear")]
        activation: String,
    },
    Conv2d {
        filters: usize,
        #[serde(default = "default_kernel")]
        kernel: usize,
        #[serde(default = "linear")]
        activation: String,
    },
    Maxpool2d,
    Dropout {
        rate: f64,
    },
    Lstm {
        units: usize,
        #[serde(default)]
        return_sequences: bool,
        #[serde(default = "default_mask")]
        mask_value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TrainEntry {
    epochs: Option<usize>,
    batch_size: Option<usize>,
    learning_rate: Option<f64>,
    optimizer: Option<String>,
    dropout: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArchFile {
    loss: Option<String>,
    #[serde(rename = "layer")]
    layers: Vec<LayerEntry>,
    #[serde(default)]
    train: TrainEntry,
}

/// Layer list, optional loss override and training settings read from a TOML
/// architecture file.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchConfig {
    pub loss: Option<LossKind>,
    pub layers: Vec<LayerSpec>,
    pub train: TrainConfig,
}

fn activation(name: &str) -> Result<Activation> {
    Activation::parse(name).ok_or_else(|| Error::Config(format!("unknown activation {name:?}")))
}

impl ArchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ArchFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if file.layers.is_empty() {
            return Err(Error::Config("architecture lists no layers".into()));
        }
        let layers = file
            .layers
            .iter()
            .map(|l| {
                Ok(match l {
                    LayerEntry::Dense { units, activation: a } => LayerSpec::Dense {
                        units: *units,
                        activation: activation(a)?,
                    },
                    LayerEntry::Conv2d {
                        filters,
                        kernel,
                        activation: a,
                    } => LayerSpec::Conv2d {
                        filters: *filters,
                        kernel: *kernel,
                        activation: activation(a)?,
                    },
                    LayerEntry::Maxpool2d => LayerSpec::MaxPool2d,
                    LayerEntry::Dropout { rate } => LayerSpec::Dropout { rate: *rate },
                    LayerEntry::Lstm {
                        units,
                        return_sequences,
                        mask_value,
                    } => LayerSpec::Lstm {
                        units: *units,
                        return_sequences: *return_sequences,
                        mask_value: *mask_value,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let loss = file
            .loss
            .as_deref()
            .map(|l| LossKind::parse(l).ok_or_else(|| Error::Config(format!("unknown loss {l:?}"))))
            .transpose()?;
        let defaults = TrainConfig::default();
        let t = file.train;
        let optimizer = match t.optimizer.as_deref() {
            None => defaults.optimizer,
            Some(name) => Optimizer::parse(name).ok_or_else(|| Error::Config(format!("unknown optimizer {name:?}")))?,
        };
        let train = TrainConfig {
            epochs: t.epochs.unwrap_or(defaults.epochs),
            batch_size: t.batch_size.unwrap_or(defaults.batch_size),
            learning_rate: t.learning_rate.unwrap_or(defaults.learning_rate),
            optimizer,
            dropout: t.dropout,
            ..defaults
        };
        train.validate()?;
        Ok(Self { loss, layers, train })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_layer_list() {
        let cfg = ArchConfig::from_toml(
            r#"
loss = "cce"
[[layer]]
kind = "conv2d"
filters = 8
activation = "relu"
[[layer]]
kind = "maxpool2d"
[[layer]]
kind = "dropout"
rate = 0.25
[[layer]]
kind = "dense"
units = 10
[train]
epochs = 3
optimizer = "sgd"
"#,
        )
        .unwrap();
        assert_eq!(cfg.loss, Some(LossKind::Cce));
        assert_eq!(cfg.layers.len(), 4);
        assert_eq!(
            cfg.layers[0],
            LayerSpec::Conv2d { filters: 8, kernel: 3, activation: Activation::Relu }
        );
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.train.optimizer, Optimizer::Sgd);
        assert_eq!(cfg.train.batch_size, 32);
    }

    #[test]
    fn rejects_unknown_names() {
        assert!(ArchConfig::from_toml("[[layer]]\nkind = \"dense\"\nunits = 2\nactivation = \"swish\"").is_err());
        assert!(ArchConfig::from_toml("[[layer]]\nkind = \"attention\"").is_err());
        assert!(ArchConfig::from_toml("loss = \"hinge\"\n[[layer]]\nkind = \"dense\"\nunits = 1").is_err());
        assert!(ArchConfig::from_toml("[[layer]]\nkind = \"dense\"\nunits = 1\n[train]\nepochs = 0").is_err());
    }
}
