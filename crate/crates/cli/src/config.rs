//! Experiment configuration: one TOML file, unknown keys rejected.
//!
//! ```toml
//! seed = 42
//!
//! [model]
//! kind = "linear"      # or "piecewise" with nodes = [[u, b], ...]
//! c = 2.0
//! sigma2 = 2.0
//!
//! [laplace]
//! n = [10, 100, 1000, 10000]
//! points = [[0.3, -0.2], [0.0, 0.0]]
//! ```
//!
//! Every block except `model` is optional and falls back to the defaults
//! below. With no file at all the logistic demo model is used.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rankdiff_core::DriftModel;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub laplace: LaplaceConfig,
    #[serde(default)]
    pub sample: SampleConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub wasserstein: WassersteinConfig,
}

fn default_seed() -> u64 {
    20_240_601
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Piecewise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub c: Option<f64>,
    pub nodes: Option<Vec<[f64; 2]>>,
    pub sigma2: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { kind: ModelKind::Linear, c: Some(2.0), nodes: None, sigma2: 2.0 }
    }
}

impl ModelConfig {
    /// Builds the drift model. Validation failures are left in the model's
    /// report for the caller to inspect.
    pub fn build(&self) -> CliResult<DriftModel> {
        let model = match self.kind {
            ModelKind::Linear => {
                if self.nodes.is_some() {
                    return Err(CliError::Config("model.nodes is only allowed with kind = \"piecewise\"".into()));
                }
                let c = self.c.ok_or_else(|| CliError::Config("model.c is required for kind = \"linear\"".into()))?;
                DriftModel::linear_with_sigma2(c, self.sigma2)
            }
            ModelKind::Piecewise => {
                if self.c.is_some() {
                    return Err(CliError::Config("model.c is only allowed with kind = \"linear\"".into()));
                }
                let nodes = self
                    .nodes
                    .as_ref()
                    .ok_or_else(|| CliError::Config("model.nodes is required for kind = \"piecewise\"".into()))?;
                let pairs: Vec<(f64, f64)> = nodes.iter().map(|&[u, b]| (u, b)).collect();
                DriftModel::piecewise_linear_with_sigma2(&pairs, self.sigma2)
            }
        };
        model.map_err(|e| CliError::Config(format!("model: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaplaceConfig {
    /// Particle numbers, strictly increasing.
    pub n: Vec<usize>,
    /// `(s, t)` grid.
    pub points: Vec<[f64; 2]>,
}

impl Default for LaplaceConfig {
    fn default() -> Self {
        LaplaceConfig { n: vec![10, 100, 1000, 10_000], points: vec![[0.3, -0.2], [0.0, 0.0]] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleLaw {
    Finite,
    Nonlinear,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub n: usize,
    pub count: usize,
    pub law: SampleLaw,
    /// `t` at which the sampled `E[exp(t z_1)]` is checked against the
    /// closed form before anything is written.
    pub gate_t: f64,
    /// Write the draws themselves (the gate always runs).
    pub write_draws: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { n: 2, count: 1_000_000, law: SampleLaw::Finite, gate_t: 0.5, write_draws: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    pub h: f64,
    pub horizon: f64,
    /// Defaults to 10% of the horizon.
    pub burn_in: Option<f64>,
    /// Defaults to keeping at most 10⁵ states.
    pub thinning: Option<usize>,
    /// Grid for the comparison with the closed-form marginal transform.
    pub t: Vec<f64>,
    pub batches: usize,
    /// Exit 4 when the effective sample size falls below this.
    pub min_ess: f64,
    pub write_states: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            n: 2,
            h: 1e-3,
            horizon: 2000.0,
            burn_in: None,
            thinning: None,
            t: vec![-0.5, -0.25, 0.25, 0.5],
            batches: 50,
            min_ess: 100.0,
            write_states: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WassersteinConfig {
    pub n: Vec<usize>,
    pub q: Vec<f64>,
    /// Draws per marginal for the one-dimensional distances.
    pub count: usize,
    pub bootstrap: usize,
    /// Points per sample for the two-dimensional assignment distance; 0
    /// skips it.
    pub pair_count: usize,
    /// Also compare two independent samples of the limit law.
    pub smoke: bool,
}

impl Default for WassersteinConfig {
    fn default() -> Self {
        WassersteinConfig { n: vec![2, 10, 100, 1000], q: vec![1.0, 2.0], count: 100_000, bootstrap: 200, pair_count: 0, smoke: true }
    }
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: default_seed(),
            model: ModelConfig::default(),
            laplace: LaplaceConfig::default(),
            sample: SampleConfig::default(),
            simulate: SimulateConfig::default(),
            wasserstein: WassersteinConfig::default(),
        }
    }
}

fn strictly_increasing(name: &str, ns: &[usize], min: usize) -> CliResult<()> {
    if ns.is_empty() {
        return Err(CliError::Config(format!("{name} must not be empty")));
    }
    if ns[0] < min {
        return Err(CliError::Config(format!("{name} entries must be at least {min}")));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

impl Config {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| CliError::Config(format!("parse error: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Structural checks that need no model evaluation.
    pub fn check(&self) -> CliResult<()> {
        strictly_increasing("laplace.n", &self.laplace.n, 2)?;
        strictly_increasing("wasserstein.n", &self.wasserstein.n, 2)?;
        if self.laplace.points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(CliError::Config("laplace.points must be finite".into()));
        }
        if self.sample.count == 0 {
            return Err(CliError::Config("sample.count must be at least 1".into()));
        }
        if self.sample.n < 2 || self.simulate.n < 2 {
            return Err(CliError::Config("particle numbers must be at least 2".into()));
        }
        if self.simulate.batches < 2 {
            return Err(CliError::Config("simulate.batches must be at least 2".into()));
        }
        if self.wasserstein.q.is_empty() || self.wasserstein.q.iter().any(|&q| !(q >= 1.0 && q.is_finite())) {
            return Err(CliError::Config("wasserstein.q entries must be finite and >= 1".into()));
        }
        if self.wasserstein.count == 0 {
            return Err(CliError::Config("wasserstein.count must be at least 1".into()));
        }
        Ok(())
    }

    /// Short SHA-256 of the canonical serialisation, including the
    /// effective seed.
    pub fn hash(&self) -> String {
        short_hash(&toml::to_string(self).expect("config serialises"))
    }

    pub fn model_hash(&self) -> String {
        short_hash(&toml::to_string(&self.model).expect("model serialises"))
    }
}

fn short_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
