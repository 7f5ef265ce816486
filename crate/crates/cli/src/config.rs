//! Run configuration: parsing, overrides, validation and content hashing.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use dimreg::graph::SplitRatios;
use dimreg::linkpred::EvalConfig;
use dimreg::pipeline::{Experiment, Method, Variant};
use dimreg::trainer::{Repulsion, TrainConfig};
use dimreg::WalkConfig;

/// Epoch limit for variant `II0` unless `allow_long_ii0` is set.
pub const II0_EPOCH_LIMIT: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Edge-list file.
    pub dataset: PathBuf,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub walks: WalkConfig,
    #[serde(default)]
    pub split: SplitRatios,
    #[serde(default)]
    pub eval: EvalConfig,
    /// Lets `II0` train for more than two epochs.
    #[serde(default)]
    pub allow_long_ii0: bool,
}

fn default_method() -> Method {
    Method::Line
}

fn default_variant() -> Variant {
    Variant::II
}

impl RunConfig {
    pub fn new(dataset: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            dataset: dataset.into(),
            method: default_method(),
            variant: default_variant(),
            seed: 0,
            train: TrainConfig::default(),
            walks: WalkConfig::default(),
            split: SplitRatios::default(),
            eval: EvalConfig::default(),
            allow_long_ii0: false,
        }
    }

    /// Reads `path`, applies `KEY=VALUE` overrides, then validates and
    /// resolves.
    pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(value).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.resolve()
    }

    /// Checks every section and materialises the variant's repulsion mode
    /// and epoch cap.
    pub fn resolve(mut self) -> Result<RunConfig> {
        if self.variant == Variant::II0 && self.train.epochs > II0_EPOCH_LIMIT && !self.allow_long_ii0 {
            bail!(
                "variant II0 is limited to {II0_EPOCH_LIMIT} epochs (got {}); set allow_long_ii0 to override",
                self.train.epochs
            );
        }
        self.train.repulsion = self.variant.repulsion();
        if self.allow_long_ii0 {
            self.train.none_epoch_cap = None;
        } else if self.train.repulsion == Repulsion::None {
            self.train.none_epoch_cap = Some(II0_EPOCH_LIMIT);
        }
        self.train.validate()?;
        self.split.validate()?;
        self.eval.classifier.validate()?;
        if self.method == Method::Node2vec {
            self.walks.validate()?;
        }
        Ok(self)
    }

    pub fn experiment(&self) -> Experiment {
        Experiment {
            method: self.method,
            variant: self.variant,
            train: self.train.clone(),
            walks: self.walks,
            split: self.split,
            eval: self.eval.clone(),
        }
    }

    /// Copy of `self` with the experiment settings of `exp`.
    pub fn with_experiment(&self, exp: &Experiment) -> Result<RunConfig> {
        RunConfig {
            method: exp.method,
            variant: exp.variant,
            train: exp.train.clone(),
            walks: exp.walks,
            split: exp.split,
            eval: exp.eval.clone(),
            ..self.clone()
        }
        .resolve()
    }

    /// First 16 hex digits of the SHA-256 of the compact JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        let digest = Sha256::digest(&bytes);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn dataset_name(&self) -> String {
        self.dataset
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Sets a dotted key such as `train.eta=0.1`. The value is read as JSON and
/// falls back to a plain string.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<()> {
    let Some((key, raw)) = spec.split_once('=') else {
        bail!("override {spec:?} is not KEY=VALUE");
    };
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override key {key:?} has an empty segment");
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .with_context(|| format!("override {key:?}: {part:?} is not inside an object"))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .with_context(|| format!("override {key:?} does not point into an object"))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
