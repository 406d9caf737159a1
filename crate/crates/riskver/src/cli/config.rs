//! Experiment configuration file schema.
//!
//! A single JSON document drives every command. Unknown keys are rejected so
//! typos fail loudly instead of silently running a different experiment.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemCfg,
    #[serde(default)]
    pub perturbation: Option<PerturbationCfg>,
    pub controllers: Vec<ControllerCfg>,
    pub spec: SpecCfg,
    pub trials: usize,
    pub master_seed: u64,
    pub horizon: usize,
    /// Overrides the model's default step size.
    #[serde(default)]
    pub dt: Option<f64>,
    pub risk: Vec<RiskCfg>,
    #[serde(default)]
    pub gap: Option<GapCfg>,
    /// Risk levels for `sweep-beta`.
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    /// Sample files for `wasserstein`; without this section the command
    /// compares the command distributions of the nominal and perturbed
    /// systems.
    #[serde(default)]
    pub wasserstein: Option<WassersteinCfg>,
    /// Fixed-width histogram bin count for `paired-gamma` (default 40).
    #[serde(default)]
    pub histogram_bins: Option<usize>,
    /// Per-coordinate weights for the trace-difference norm used by
    /// `paired-gamma` and the stochastic gap method (default: unweighted
    /// Euclidean).
    #[serde(default)]
    pub state_weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemCfg {
    F110 {
        /// Minimum allowed wall distance in the built-in `safe` predicate.
        #[serde(default)]
        wall_margin: f64,
        /// Constant forward speed override.
        #[serde(default)]
        speed: Option<f64>,
    },
    Uuv {
        #[serde(default = "default_d_low")]
        d_low: f64,
        #[serde(default = "default_d_high")]
        d_high: f64,
    },
    Custom {
        path: PathBuf,
    },
}

fn default_d_low() -> f64 {
    10.0
}

fn default_d_high() -> f64 {
    50.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationCfg {
    DroppedRays {
        count: usize,
    },
    StructuredLidar {
        bias: f64,
        noise_scale: f64,
        drop_count: usize,
    },
    ObservationOffset {
        offset: f64,
    },
    ProcessNoiseScale {
        scale: f64,
    },
    LagError {
        factor: f64,
        noise_sigma: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerCfg {
    pub name: String,
    /// Path to a network weights file.
    #[serde(default)]
    pub weights: Option<PathBuf>,
    /// Scripted controller id (`f110_safe`, `uuv_moderate`, `zero`, ...).
    #[serde(default)]
    pub scripted: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecCfg {
    /// Formula text; resolved against the predicate table.
    #[serde(default)]
    pub formula: Option<String>,
    /// Pointwise constraint as an alternative to a formula.
    #[serde(default)]
    pub constraint: Option<ConstraintCfg>,
    /// Predicate table file merged over the system's built-in predicates.
    #[serde(default)]
    pub predicates: Option<PathBuf>,
    /// Evaluation step for formulas.
    #[serde(default)]
    pub t: usize,
    /// `open` (default) or `closed` inner interval for Until.
    #[serde(default)]
    pub until_inner: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintCfg {
    pub predicate: String,
    #[serde(default)]
    pub horizon: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskCfg {
    pub metric: MetricCfg,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    /// Required for the CVaR upper bound; never inferred from samples.
    #[serde(default)]
    pub support_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricCfg {
    Var,
    Cvar,
    Mean,
    WorstCase,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum GapCfg {
    Lipschitz {
        l_f1: f64,
        l_f2: f64,
        l_f3: f64,
        l_u: f64,
        l_g1: f64,
        l_g2: f64,
        v_star: f64,
        w_star: f64,
    },
    Iiss {
        gain: GainCfg,
        diameter: f64,
    },
    Stochastic {},
}

/// Sample files compared by the `wasserstein` command.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WassersteinCfg {
    #[serde(default)]
    pub a: Option<PathBuf>,
    #[serde(default)]
    pub b: Option<PathBuf>,
}

/// Exactly one of the fields picks the gain form.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainCfg {
    #[serde(default)]
    pub linear: Option<f64>,
    /// Closed-loop matrix; the gain is the geometric-series bound when the
    /// induced 2-norm is below one.
    #[serde(default)]
    pub a_cl: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub tabulated: Option<Vec<(f64, f64)>>,
}

impl ExperimentConfig {
    pub fn from_json_str(json: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(json).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json_str(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        let err = |msg: String| Err(CliError::Config(msg));
        if self.controllers.is_empty() {
            return err("controllers: at least one controller is required".into());
        }
        let mut names: Vec<&str> = self.controllers.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.controllers.len() {
            return err("controllers: names must be unique".into());
        }
        for c in &self.controllers {
            match (&c.weights, &c.scripted) {
                (Some(_), Some(_)) => {
                    return err(format!(
                        "controllers.{}: give either weights or scripted, not both",
                        c.name
                    ))
                }
                (None, None) => {
                    return err(format!("controllers.{}: needs weights or scripted", c.name))
                }
                _ => {}
            }
        }
        if self.trials == 0 {
            return err("trials: must be at least 1".into());
        }
        if self.horizon == 0 {
            return err("horizon: must be at least 1".into());
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return err(format!("dt: must be positive, got {dt}"));
            }
        }
        match (&self.spec.formula, &self.spec.constraint) {
            (Some(_), Some(_)) => {
                return err("spec: give either formula or constraint, not both".into())
            }
            (None, None) => return err("spec: needs a formula or a constraint".into()),
            _ => {}
        }
        if let Some(u) = &self.spec.until_inner {
            if u != "open" && u != "closed" {
                return err(format!(
                    "spec.until_inner: expected open or closed, got {u}"
                ));
            }
        }
        if self.risk.is_empty() {
            return err("risk: at least one risk entry is required".into());
        }
        for (i, r) in self.risk.iter().enumerate() {
            match r.metric {
                MetricCfg::Var | MetricCfg::Cvar => {
                    let beta = match r.beta {
                        Some(b) if b > 0.0 && b < 1.0 => b,
                        Some(b) => {
                            return err(format!("risk[{i}].beta: must be in (0,1), got {b}"))
                        }
                        None => return err(format!("risk[{i}].beta: required for var/cvar")),
                    };
                    let _ = beta;
                    match r.delta {
                        Some(d) if d > 0.0 && d < 1.0 => {}
                        Some(d) => {
                            return err(format!("risk[{i}].delta: must be in (0,1), got {d}"))
                        }
                        None => return err(format!("risk[{i}].delta: required for var/cvar")),
                    }
                    if r.metric == MetricCfg::Cvar && r.support_bound.is_none() {
                        return err(format!(
                            "risk[{i}].support_bound: required for the cvar upper bound"
                        ));
                    }
                }
                MetricCfg::Mean | MetricCfg::WorstCase => {}
            }
        }
        if let Some(GapCfg::Iiss { gain, .. }) = &self.gap {
            let picks = gain.linear.is_some() as u8
                + gain.a_cl.is_some() as u8
                + gain.tabulated.is_some() as u8;
            if picks != 1 {
                return err("gap.gain: exactly one of linear, a_cl, tabulated".into());
            }
        }
        if let Some(betas) = &self.betas {
            if betas.is_empty() {
                return err("betas: must not be empty when present".into());
            }
            for b in betas {
                if !(*b > 0.0 && *b < 1.0) {
                    return err(format!("betas: every level must be in (0,1), got {b}"));
                }
            }
        }
        if let Some(bins) = self.histogram_bins {
            if bins == 0 {
                return err("histogram_bins: must be at least 1".into());
            }
        }
        if let Some(weights) = &self.state_weights {
            if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) {
                return err("state_weights: must be a nonempty list of nonnegative numbers".into());
            }
        }
        Ok(())
    }
}
