use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_text, write_file};
use crate::rng::hash_str;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Labelled signal images, one class per sample file.
    FaultImageClass,
    /// Healthy/faulty scaleogram tensors.
    ScaleogramHealth,
    /// Windows of run-to-failure sensor histories regressed onto RUL.
    RulRegression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "validation" | "val" => Some(Split::Validation),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    /// 80/20 train/test with 15% of the training share held out for validation.
    fn default() -> Self {
        Self {
            train: 0.68,
            validation: 0.12,
            test: 0.20,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions {parts:?} must lie in [0, 1] and sum to 1"
            )));
        }
        Ok(())
    }

    /// Split of the item named `key`: a pure function of `(seed, key)`.
    pub fn assign(&self, seed: u64, key: &str) -> Split {
        let u = (hash_str(seed, key) >> 11) as f64 / (1u64 << 53) as f64;
        if u < self.train {
            Split::Train
        } else if u < self.train + self.validation {
            Split::Validation
        } else {
            Split::Test
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleEntry {
    /// Relative to the manifest's directory.
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulSettings {
    pub window: usize,
    pub knee: u32,
    #[serde(default = "default_mask")]
    pub mask_value: f64,
}

fn default_mask() -> f64 {
    crate::nn::DEFAULT_MASK_VALUE
}

impl Default for RulSettings {
    fn default() -> Self {
        Self {
            window: 30,
            knee: 125,
            mask_value: default_mask(),
        }
    }
}

/// Dataset description. Image and scaleogram tasks list tensor files whose
/// rows (`[N, ...]`) all carry the entry's label; the RUL task lists
/// C-MAPSS-style text files. Membership of each row or unit in a split is
/// decided by hashing `"<path>#<row or unit id>"` with the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub task: TaskKind,
    pub seed: u64,
    #[serde(default)]
    pub classes: Vec<String>,
    #[serde(default)]
    pub split: SplitFractions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rul: Option<RulSettings>,
    #[serde(rename = "sample", default)]
    pub samples: Vec<SampleEntry>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        if self.samples.is_empty() {
            return Err(Error::Config("manifest lists no samples".into()));
        }
        match self.task {
            TaskKind::FaultImageClass | TaskKind::ScaleogramHealth => {
                if self.classes.len() < 2 {
                    return Err(Error::Config("classification needs at least two classes".into()));
                }
                for s in &self.samples {
                    match s.label {
                        Some(label) if label < self.classes.len() => {}
                        Some(label) => {
                            return Err(Error::LabelOutOfRange {
                                label,
                                classes: self.classes.len(),
                            })
                        }
                        None => return Err(Error::Config(format!("sample {} has no label", s.path))),
                    }
                }
            }
            TaskKind::RulRegression => {
                let rul = self.rul.unwrap_or_default();
                if rul.window == 0 || rul.knee == 0 {
                    return Err(Error::Config("RUL window and knee must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn rul_settings(&self) -> RulSettings {
        self.rul.unwrap_or_default()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let m: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_toml()?.as_bytes())
    }

    /// Loads and validates a manifest, checking that every listed file exists.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let m = Self::from_toml(&read_text(path)?)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for s in &m.samples {
            let p = base.join(&s.path);
            if !p.is_file() {
                return Err(Error::io(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "listed sample file is missing"),
                ));
            }
        }
        Ok((m, base))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> DatasetManifest {
        DatasetManifest {
            task: TaskKind::FaultImageClass,
            seed: 3,
            classes: vec!["a".into(), "b".into()],
            split: SplitFractions::default(),
            rul: None,
            samples: vec![
                SampleEntry { path: "a.ptk".into(), label: Some(0) },
                SampleEntry { path: "b.ptk".into(), label: Some(1) },
            ],
        }
    }

    #[test]
    fn toml_round_trip() {
        let m = manifest();
        assert_eq!(DatasetManifest::from_toml(&m.to_toml().unwrap()).unwrap(), m);
    }

    #[test]
    fn fractions_must_sum_to_one() {
        let mut m = manifest();
        m.split.test = 0.3;
        assert!(matches!(DatasetManifest::from_toml(&m.to_toml().unwrap()), Err(Error::Config(_))));
    }

    #[test]
    fn labels_are_checked() {
        let mut m = manifest();
        m.samples[1].label = Some(2);
        assert!(matches!(m.validate(), Err(Error::LabelOutOfRange { label: 2, classes: 2 })));
    }

    #[test]
    fn assignment_is_stable_and_proportional() {
        let f = SplitFractions::default();
        let keys: Vec<String> = (0..5000).map(|i| format!("x.ptk#{i}")).collect();
        let a: Vec<Split> = keys.iter().map(|k| f.assign(9, k)).collect();
        let b: Vec<Split> = keys.iter().map(|k| f.assign(9, k)).collect();
        assert_eq!(a, b);
        let test = a.iter().filter(|s| **s == Split::Test).count() as f64 / 5000.0;
        let val = a.iter().filter(|s| **s == Split::Validation).count() as f64 / 5000.0;
        assert!((test - 0.2).abs() < 0.03 && (val - 0.12).abs() < 0.03);
    }

    #[test]
    fn missing_files_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.toml");
        manifest().save(&path).unwrap();
        assert!(matches!(DatasetManifest::load(&path), Err(Error::Io { .. })));
    }
}
