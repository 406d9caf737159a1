//! Case-study systems, controllers, and the seeded Monte Carlo engine.
//!
//! A [`SystemModel`] describes closed-loop dynamics behind a narrow
//! interface: draw an initial state, observe, step. All randomness comes from
//! per-trial [`rng::Stream`]s handed in by the engine, so models stay
//! immutable and trials embarrassingly parallel.

mod bicycle;
mod engine;
mod linear;
mod nn;
pub mod rng;
mod uuv;

pub use bicycle::{
    bicycle_step, default_hallway, lidar_scan, BicycleParams, BicycleState, F110Model, HallwayMap,
    LidarConfig, Segment, SpeedMode,
};
pub use engine::{
    monte_carlo, paired_gamma, paired_gamma_weighted, rollout, run_paired, run_trial, Rollout,
    SpecEval, TrialConfig,
};
pub use linear::LinearModel;
pub use nn::{Activation, Layer, NnWeights};
pub use rng::{mix_seed, Channel, Stream, TrialStreams};
pub use uuv::{sonar_observe, uuv_step, UuvModel, UuvParams, UuvState};

use thiserror::Error;

use crate::stl::StlError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid network weights: {0}")]
    BadWeights(String),
    #[error("{what}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("scan origin ({x:.3}, {y:.3}) lies outside the map")]
    OutsideMap { x: f64, y: f64 },
    #[error("state became non-finite in trial {trial_index} at step {step}")]
    NumericBlowup { trial_index: u64, step: usize },
    #[error("model `{model}` does not support perturbation {perturbation}")]
    UnsupportedPerturbation {
        model: &'static str,
        perturbation: String,
    },
    #[error("invalid model: {0}")]
    BadModel(String),
    #[error("trial {trial_index} failed: {reason}")]
    TrialFailed { trial_index: u64, reason: String },
    #[error(transparent)]
    Stl(#[from] StlError),
}

/// How a perturbed variant differs from its nominal model.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    None,
    /// A fixed set of rays, redrawn per trial, reads max range.
    DroppedRays {
        count: usize,
    },
    /// Stand-in for a learned observation model: per-ray bias, range-dependent
    /// noise inflation, and dropped rays.
    StructuredLidar {
        bias: f64,
        noise_scale: f64,
        drop_count: usize,
    },
    /// Constant additive offset on every observation component.
    ObservationOffset {
        offset: f64,
    },
    /// Scales the process-noise draws.
    ProcessNoiseScale {
        scale: f64,
    },
    /// Slows the command-tracking lags by `factor` and adds Gaussian process
    /// noise, standing in for unmodeled plant dynamics.
    LagError {
        factor: f64,
        noise_sigma: f64,
    },
}

impl Perturbation {
    pub fn describe(&self) -> String {
        match self {
            Perturbation::None => "none".into(),
            Perturbation::DroppedRays { count } => format!("dropped_rays({count})"),
            Perturbation::StructuredLidar {
                bias,
                noise_scale,
                drop_count,
            } => {
                format!("structured_lidar(bias={bias},noise_scale={noise_scale},drop={drop_count})")
            }
            Perturbation::ObservationOffset { offset } => format!("observation_offset({offset})"),
            Perturbation::ProcessNoiseScale { scale } => format!("process_noise_scale({scale})"),
            Perturbation::LagError {
                factor,
                noise_sigma,
            } => {
                format!("lag_error(factor={factor},sigma={noise_sigma})")
            }
        }
    }
}

/// Data fixed at the start of a trial (currently: which rays drop).
#[derive(Debug, Clone, Default)]
pub struct TrialData {
    pub dropped_rays: Vec<usize>,
}

/// Immutable description of a closed-loop system. `step` and `observe` are
/// deterministic given the streams, which the engine derives per trial.
pub trait SystemModel: Send + Sync {
    fn state_dim(&self) -> usize;
    fn obs_dim(&self) -> usize;
    fn dt(&self) -> f64;

    /// Draws the initial state from the model's initial distribution.
    fn init_state(&self, rng: &mut Stream) -> Vec<f64>;

    /// Draws per-trial perturbation data. Reads only the perturb stream so
    /// the shared channels stay aligned between paired models.
    fn trial_setup(&self, rng: &mut Stream) -> TrialData {
        let _ = rng;
        TrialData::default()
    }

    fn observe(
        &self,
        state: &[f64],
        td: &TrialData,
        rng: &mut Stream,
    ) -> Result<Vec<f64>, SimError>;

    fn step(&self, state: &[f64], control: &[f64], rng: &mut Stream) -> Result<Vec<f64>, SimError>;

    /// Terminal-violation check; the engine freezes the trajectory at the
    /// first crashed state.
    fn crashed(&self, state: &[f64]) -> bool {
        let _ = state;
        false
    }
}

/// A controller mapping observations to command vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    /// Weight-file network inference.
    Network(NnWeights),
    /// Scripted baselines.
    Scripted(Scripted),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scripted {
    /// Holds every command at zero.
    Zero { dim: usize },
    /// Scalar linear feedback on the first observation component.
    Gain { k: f64 },
    /// Bicycle wall-balancing steerer. The proportional term acts on the
    /// left/right clearance imbalance, offset by `bias` toward the right
    /// wall; clearance per side is the minimum over the outer five rays,
    /// clamped to `clip`, so a dropped ray (which reads high) never masks
    /// the nearest wall. The damping term reads the angle of the nearer
    /// side's closest ray, which approximates the heading relative to that
    /// wall. Commands live on the same [-15, 15] scale network controllers
    /// use; ray angles assume the default symmetric fan.
    F110Steer {
        gain: f64,
        bias: f64,
        clip: f64,
        damp: f64,
    },
    /// UUV band keeper: heading command steers the measured pipeline
    /// distance toward `target` (tracking from the positive-y side).
    UuvBand { target: f64, gain: f64 },
}

impl Controller {
    pub fn zero(dim: usize) -> Self {
        Controller::Scripted(Scripted::Zero { dim })
    }

    /// Scripted controllers addressable from config files. The three
    /// per-case-study variants have strictly ordered safety margins.
    pub fn scripted_by_id(id: &str) -> Option<Self> {
        let s = match id {
            "zero" => Scripted::Zero { dim: 1 },
            "f110_safe" => Scripted::F110Steer {
                gain: 14.0,
                bias: 0.0,
                clip: 2.5,
                damp: 22.0,
            },
            "f110_moderate" => Scripted::F110Steer {
                gain: 11.0,
                bias: 0.5,
                clip: 2.5,
                damp: 12.0,
            },
            "f110_aggressive" => Scripted::F110Steer {
                gain: 9.0,
                bias: 0.7,
                clip: 2.5,
                damp: 10.0,
            },
            "uuv_safe" => Scripted::UuvBand {
                target: 30.0,
                gain: 0.08,
            },
            "uuv_moderate" => Scripted::UuvBand {
                target: 18.0,
                gain: 0.06,
            },
            "uuv_aggressive" => Scripted::UuvBand {
                target: 12.5,
                gain: 0.035,
            },
            _ => return None,
        };
        Some(Controller::Scripted(s))
    }

    pub fn command(&self, obs: &[f64]) -> Result<Vec<f64>, SimError> {
        match self {
            Controller::Network(net) => net.forward(obs),
            Controller::Scripted(s) => Ok(match s {
                Scripted::Zero { dim } => vec![0.0; *dim],
                Scripted::Gain { k } => {
                    if obs.is_empty() {
                        return Err(SimError::DimensionMismatch {
                            what: "gain controller observation",
                            expected: 1,
                            got: 0,
                        });
                    }
                    vec![k * obs[0]]
                }
                Scripted::F110Steer {
                    gain,
                    bias,
                    clip,
                    damp,
                } => {
                    let n = obs.len();
                    if n < 6 {
                        return Err(SimError::DimensionMismatch {
                            what: "lidar observation",
                            expected: 6,
                            got: n,
                        });
                    }
                    let side = 5.min(n / 3);
                    let ray_angle =
                        |i: usize| (i as f64 / (n as f64 - 1.0) - 0.5) * std::f64::consts::PI;
                    let min_of = |group: &mut dyn Iterator<Item = usize>| {
                        let mut best = (f64::INFINITY, 0usize);
                        for i in group {
                            if obs[i] < best.0 {
                                best = (obs[i], i);
                            }
                        }
                        (best.0.min(*clip), best.1)
                    };
                    let (right, ri) = min_of(&mut (0..side));
                    let (left, li) = min_of(&mut ((n - side)..n));
                    // Angle of the nearer side's closest ray, relative to the
                    // perpendicular: approximately the heading error against
                    // that wall, so it damps the weave a pure proportional
                    // balancer develops.
                    let heading_err = if right <= left {
                        ray_angle(ri) + std::f64::consts::FRAC_PI_2
                    } else {
                        ray_angle(li) - std::f64::consts::FRAC_PI_2
                    };
                    let cmd = gain * (left - right - bias) + damp * heading_err;
                    vec![cmd.clamp(-15.0, 15.0)]
                }
                Scripted::UuvBand { target, gain } => {
                    if obs.len() != 2 {
                        return Err(SimError::DimensionMismatch {
                            what: "sonar observation",
                            expected: 2,
                            got: obs.len(),
                        });
                    }
                    let dist = obs[1];
                    vec![(-gain * (dist - target)).clamp(-0.6, 0.6)]
                }
            }),
        }
    }
}
