use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::net::SgdConfig;
use crate::objectives::LossWeights;
use crate::ot::{KernelDomain, SolverConfig};
use crate::scenario::ScenarioConfig;

/// What the target batch is transported against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Class prototypes carrying the class masses.
    #[default]
    Ppot,
    /// The raw source batch, one atom per sample.
    SamplePot,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Ppot => "ppot",
            Variant::SamplePot => "sample-pot",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ppot" => Ok(Variant::Ppot),
            "sample-pot" => Ok(Variant::SamplePot),
            other => Err(Error::InvalidConfig(format!("unknown variant {other:?}"))),
        }
    }
}

/// Thresholds and EMA rates of the mass estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub tau1: f64,
    pub tau2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { tau1: 0.9, tau2: 1.0, lambda1: 0.001, lambda2: 0.001 }
    }
}

/// Schedule, network size and batch construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: usize,
    /// Leading epochs trained on plain source cross-entropy only, standing in
    /// for a pre-trained initialisation. Counted within `epochs`.
    pub warmup_epochs: usize,
    pub iters_per_epoch: usize,
    pub batch_size: usize,
    pub hidden_dim: usize,
    pub feature_dim: usize,
    pub keep_fraction: f64,
    pub ema_lambda: f64,
    /// Divide the cost by its maximum before the entropic solve, making
    /// `epsilon` relative to the current feature scale.
    pub normalize_cost: bool,
    /// Build prototypes and transport costs from length-normalised features.
    pub normalize_features: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            warmup_epochs: 0,
            iters_per_epoch: 50,
            batch_size: 24,
            hidden_dim: 32,
            feature_dim: 16,
            keep_fraction: 0.25,
            ema_lambda: 0.1,
            normalize_cost: true,
            normalize_features: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Targets whose top softmax probability is below `xi` are rejected.
    pub xi: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self { xi: 0.75 }
    }
}

/// Every knob of a training run, loaded from TOML with unknown keys rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub variant: Variant,
    pub scenario: ScenarioConfig,
    pub solver: SolverConfig,
    pub loss: LossWeights,
    pub estimates: EstimatorConfig,
    pub training: TrainingConfig,
    pub optimizer: SgdConfig,
    pub evaluation: EvaluationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            variant: Variant::Ppot,
            scenario: ScenarioConfig::default(),
            solver: SolverConfig {
                epsilon: 0.05,
                max_iterations: 5_000,
                marginal_tolerance: 1e-7,
                domain: KernelDomain::Auto,
            },
            loss: LossWeights::default(),
            estimates: EstimatorConfig::default(),
            training: TrainingConfig::default(),
            optimizer: SgdConfig::default(),
            evaluation: EvaluationConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Sets the training seed and the scenario seed together.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.scenario.seed = seed;
        self
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.solver.validate()?;
        self.loss.validate()?;
        self.optimizer.validate()?;
        let e = &self.estimates;
        if !(e.tau1 > 0.0 && e.tau1 <= 1.0) || !(e.tau2 > 0.0) {
            return Err(Error::InvalidConfig("tau1 must lie in (0, 1] and tau2 be positive".into()));
        }
        if !(0.0..1.0).contains(&e.lambda1) || !(0.0..1.0).contains(&e.lambda2) {
            return Err(Error::InvalidConfig("lambda1 and lambda2 must lie in [0, 1)".into()));
        }
        let t = &self.training;
        if t.epochs == 0 || t.iters_per_epoch == 0 || t.hidden_dim == 0 || t.feature_dim == 0 {
            return Err(Error::InvalidConfig("epochs, iters_per_epoch and layer sizes must be positive".into()));
        }
        if t.warmup_epochs >= t.epochs {
            return Err(Error::InvalidConfig("warmup_epochs must be smaller than epochs".into()));
        }
        let classes = self.scenario.source_classes();
        if t.batch_size == 0 || t.batch_size % classes != 0 {
            return Err(Error::InvalidConfig(format!(
                "batch_size {} must be a positive multiple of the {classes} source classes",
                t.batch_size
            )));
        }
        let target_total = (self.scenario.n_common + self.scenario.n_target_private) * self.scenario.samples_per_class;
        if t.batch_size > target_total {
            return Err(Error::InvalidConfig(format!("batch_size exceeds the {target_total} target samples")));
        }
        if !(t.keep_fraction > 0.0 && t.keep_fraction <= 1.0) {
            return Err(Error::InvalidConfig("keep_fraction must lie in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&t.ema_lambda) {
            return Err(Error::InvalidConfig("ema_lambda must lie in [0, 1]".into()));
        }
        if !(self.evaluation.xi > 0.0 && self.evaluation.xi < 1.0) {
            return Err(Error::InvalidConfig("xi must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Overrides one scalar by name, as used by sweeps.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || value.parse::<f64>().map_err(|_| Error::InvalidConfig(format!("{key}: not a number: {value:?}")));
        let int = || value.parse::<usize>().map_err(|_| Error::InvalidConfig(format!("{key}: not an integer: {value:?}")));
        match key {
            "eta1" => self.loss.eta1 = num()?,
            "eta2" => self.loss.eta2 = num()?,
            "eta3" => self.loss.eta3 = num()?,
            "tau1" => self.estimates.tau1 = num()?,
            "tau2" => self.estimates.tau2 = num()?,
            "lambda1" => self.estimates.lambda1 = num()?,
            "lambda2" => self.estimates.lambda2 = num()?,
            "xi" => self.evaluation.xi = num()?,
            "lambda" | "ema_lambda" => self.training.ema_lambda = num()?,
            "hidden_dim" => self.training.hidden_dim = int()?,
            "feature_dim" => self.training.feature_dim = int()?,
            "normalize_features" => {
                self.training.normalize_features =
                    value.parse().map_err(|_| Error::InvalidConfig(format!("{key}: not a boolean: {value:?}")))?
            }
            "warmup_epochs" => self.training.warmup_epochs = int()?,
            "keep_fraction" => self.training.keep_fraction = num()?,
            "batch_size" => self.training.batch_size = int()?,
            "epochs" => self.training.epochs = int()?,
            "iters_per_epoch" => self.training.iters_per_epoch = int()?,
            "base_lr" => self.optimizer.base_lr = num()?,
            "epsilon" => self.solver.epsilon = num()?,
            "variant" => self.variant = value.parse()?,
            "seed" => *self = self.clone().with_seed(int()? as u64),
            "class_separation" => self.scenario.class_separation = num()?,
            "domain_shift" => self.scenario.domain_shift = num()?,
            "noise_sigma" => self.scenario.noise_sigma = num()?,
            "samples_per_class" => self.scenario.samples_per_class = int()?,
            other => return Err(Error::InvalidConfig(format!("unknown sweep parameter {other:?}"))),
        }
        Ok(())
    }
}
