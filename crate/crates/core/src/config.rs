//! Experiment configuration, read from TOML. Every key has a default, so an
//! empty file describes the standard protocol: 10 splits, authenticity mode,
//! `alex_micro`, and the default training hyperparameters.
//!
//! ```toml
//! seed = 7
//! mode = "identity"
//!
//! [data]
//! num_subjects = 20
//!
//! [model]
//! family = "vgg_micro"
//!
//! [training]
//! max_epochs = 50
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{Modality, SyntheticParams};
use crate::error::{Error, Result};
use crate::models::{Family, ModelConfig};
use crate::nn::{weights, Hyperparams};
use crate::protocol::{ExperimentSettings, Mode, Ratios};

/// Environment variable that replaces the configured seed.
pub const SEED_ENV: &str = "THERMOPAD_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed: synthetic data, split assignment, initialization and
    /// shuffling all derive from it.
    pub seed: u64,
    pub mode: Mode,
    pub n_splits: usize,
    /// Authenticity mode: subsample real pairs to match the fake count of
    /// each hand.
    pub balance: bool,
    pub data: DataConfig,
    pub split: Ratios,
    pub model: ModelSection,
    pub training: TrainingConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            mode: Mode::Authenticity,
            n_splits: 10,
            balance: false,
            data: DataConfig::default(),
            split: Ratios::default(),
            model: ModelSection::default(),
            training: TrainingConfig::default(),
        }
    }
}

/// Synthetic dataset shape; the generator seed is the top-level `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub num_subjects: usize,
    pub sessions: usize,
    pub images_per_class_per_modality: usize,
    pub fake_images_per_class: usize,
    pub image_size: (usize, usize),
    pub both_hands: bool,
}

impl Default for DataConfig {
    fn default() -> Self {
        let p = SyntheticParams::default();
        DataConfig {
            num_subjects: p.num_subjects,
            sessions: p.sessions,
            images_per_class_per_modality: p.images_per_class_per_modality,
            fake_images_per_class: p.fake_images_per_class,
            image_size: p.image_size,
            both_hands: p.both_hands,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub family: Family,
    pub channel_scale: f64,
    pub input_size: (usize, usize),
    /// Weight files for the feature layers, resolved against the config
    /// file's directory.
    pub pretrained_rgb: Option<PathBuf>,
    pub pretrained_th: Option<PathBuf>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            family: Family::AlexMicro,
            channel_scale: ModelConfig::DEFAULT_CHANNEL_SCALE,
            input_size: (64, 64),
            pretrained_rgb: None,
            pretrained_th: None,
        }
    }
}

/// Training hyperparameters; the shuffle stream of each model is derived
/// from the top-level seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub freeze_features: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let hp = Hyperparams::default();
        TrainingConfig {
            learning_rate: hp.learning_rate,
            momentum: hp.momentum,
            batch_size: hp.batch_size,
            patience: hp.patience,
            max_epochs: hp.max_epochs,
            freeze_features: hp.freeze_features,
        }
    }
}

impl TrainingConfig {
    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            batch_size: self.batch_size,
            patience: self.patience,
            max_epochs: self.max_epochs,
            rng_seed: 0,
            freeze_features: self.freeze_features,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::ConfigFile(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads `path` and applies the seed override from the environment.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::ConfigFile(msg) => Error::ConfigFile(format!("{}: {msg}", path.display())),
            e => e,
        })?;
        cfg.apply_seed_override(std::env::var(SEED_ENV).ok().as_deref())?;
        Ok(cfg)
    }

    pub fn apply_seed_override(&mut self, value: Option<&str>) -> Result<()> {
        if let Some(v) = value {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::ConfigFile(format!("{SEED_ENV}=`{v}` is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let check = |r: Result<()>| r.map_err(|e| Error::ConfigFile(e.to_string()));
        if self.n_splits == 0 {
            return Err(Error::ConfigFile("n_splits must be positive".into()));
        }
        if !(self.model.channel_scale > 0.0 && self.model.channel_scale.is_finite()) {
            return Err(Error::ConfigFile("model.channel_scale must be positive".into()));
        }
        if self.model.input_size.0 == 0 || self.model.input_size.1 == 0 {
            return Err(Error::ConfigFile("model.input_size must be positive".into()));
        }
        check(self.synthetic_params().validate())?;
        check(self.training.hyperparams().validate())?;
        let r = self.split;
        if [r.train, r.val, r.test].iter().any(|v| !(*v > 0.0)) || (r.train + r.val + r.test - 1.0).abs() > 1e-9 {
            return Err(Error::ConfigFile("split ratios must be positive and sum to 1".into()));
        }
        Ok(())
    }

    pub fn synthetic_params(&self) -> SyntheticParams {
        let d = &self.data;
        SyntheticParams {
            num_subjects: d.num_subjects,
            sessions: d.sessions,
            images_per_class_per_modality: d.images_per_class_per_modality,
            fake_images_per_class: d.fake_images_per_class,
            image_size: d.image_size,
            both_hands: d.both_hands,
            rng_seed: self.seed,
        }
    }

    /// Protocol settings; pretrained weight paths are resolved against
    /// `base_dir` and read here.
    pub fn settings(&self, base_dir: &Path) -> Result<ExperimentSettings> {
        let mut pretrained = BTreeMap::new();
        for (m, path) in [
            (Modality::Rgb, &self.model.pretrained_rgb),
            (Modality::Th, &self.model.pretrained_th),
        ] {
            if let Some(p) = path {
                pretrained.insert(m, weights::read(&base_dir.join(p))?);
            }
        }
        Ok(ExperimentSettings {
            mode: self.mode,
            family: self.model.family,
            channel_scale: self.model.channel_scale,
            input_size: self.model.input_size,
            n_splits: self.n_splits,
            ratios: self.split,
            seed: self.seed,
            balance: self.balance,
            hp: self.training.hyperparams(),
            pretrained,
        })
    }

    /// Name of the experiment directory: no timestamps, so reruns land in
    /// the same place.
    pub fn experiment_name(&self) -> String {
        format!("{}_{}_seed{}", self.mode.name(), self.model.family, self.seed)
    }
}
