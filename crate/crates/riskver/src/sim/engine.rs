//! Seeded rollouts, paired rollouts, and Monte Carlo sampling.

use rayon::prelude::*;

use crate::risk::SampleSet;
use crate::stl::{self, ConstraintSpec, EvalOptions, Formula, Trace};

use super::rng::TrialStreams;
use super::{Controller, SimError, SystemModel};

/// Trial-engine parameters shared by all trials of an experiment cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub master_seed: u64,
    /// Number of control steps; the trace has `horizon + 1` states.
    pub horizon: usize,
}

/// A finished rollout: the state trace and the commands the controller
/// issued at each step.
#[derive(Debug, Clone)]
pub struct Rollout {
    pub trace: Trace,
    pub commands: Vec<Vec<f64>>,
}

/// Specification evaluated per trial; the Monte Carlo cost is `-robustness`.
#[derive(Debug, Clone)]
pub enum SpecEval {
    Formula {
        formula: Formula,
        t: usize,
        options: EvalOptions,
    },
    Constraint(ConstraintSpec),
}

impl SpecEval {
    pub fn formula(formula: Formula) -> Self {
        SpecEval::Formula {
            formula,
            t: 0,
            options: EvalOptions::default(),
        }
    }

    /// Robustness of one trace under the specification.
    pub fn robustness(&self, trace: &Trace) -> Result<f64, stl::StlError> {
        match self {
            SpecEval::Formula {
                formula,
                t,
                options,
            } => stl::robustness_with(formula, trace, *t, options),
            SpecEval::Constraint(c) => c.trace_robustness(trace),
        }
    }

    /// Robustness cost `Z = -rho`.
    pub fn cost(&self, trace: &Trace) -> Result<f64, stl::StlError> {
        Ok(-self.robustness(trace)?)
    }
}

/// Runs one closed-loop trial. The result is a pure function of
/// `(master_seed, trial_index)`: every stochastic input draws from a stream
/// keyed by that pair. A crash freezes the remaining states at the crash
/// state, so constraint robustness still reflects the violation.
pub fn rollout(
    model: &dyn SystemModel,
    controller: &Controller,
    cfg: &TrialConfig,
    trial_index: u64,
) -> Result<Rollout, SimError> {
    let mut streams = TrialStreams::derive(cfg.master_seed, trial_index);
    let trial_data = model.trial_setup(&mut streams.perturb);

    let mut state = model.init_state(&mut streams.init);
    ensure_finite(&state, trial_index, 0)?;
    let mut states = Vec::with_capacity(cfg.horizon + 1);
    let mut commands = Vec::with_capacity(cfg.horizon);
    states.push(state.clone());

    let mut frozen = model.crashed(&state);
    for step in 0..cfg.horizon {
        if frozen {
            states.push(state.clone());
            continue;
        }
        let obs = model.observe(&state, &trial_data, &mut streams.measurement)?;
        let command = controller.command(&obs)?;
        let next = model.step(&state, &command, &mut streams.process)?;
        ensure_finite(&next, trial_index, step + 1)?;
        commands.push(command);
        frozen = model.crashed(&next);
        state = next;
        states.push(state.clone());
    }

    let trace = Trace::new(model.dt(), states).map_err(SimError::Stl)?;
    Ok(Rollout { trace, commands })
}

fn ensure_finite(state: &[f64], trial_index: u64, step: usize) -> Result<(), SimError> {
    if state.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NumericBlowup { trial_index, step });
    }
    Ok(())
}

/// One trial, trace only.
pub fn run_trial(
    model: &dyn SystemModel,
    controller: &Controller,
    cfg: &TrialConfig,
    trial_index: u64,
) -> Result<Trace, SimError> {
    Ok(rollout(model, controller, cfg, trial_index)?.trace)
}

/// Runs the nominal and perturbed models under common random numbers: both
/// rollouts derive their streams from the same `(master_seed, trial_index)`,
/// so they see identical initial states and identical noise draws; only the
/// perturbed model's extra terms differ.
pub fn run_paired(
    nominal: &dyn SystemModel,
    perturbed: &dyn SystemModel,
    controller: &Controller,
    cfg: &TrialConfig,
    trial_index: u64,
) -> Result<(Trace, Trace), SimError> {
    if nominal.state_dim() != perturbed.state_dim() {
        return Err(SimError::DimensionMismatch {
            what: "paired model state",
            expected: nominal.state_dim(),
            got: perturbed.state_dim(),
        });
    }
    let a = rollout(nominal, controller, cfg, trial_index)?.trace;
    let b = rollout(perturbed, controller, cfg, trial_index)?.trace;
    Ok((a, b))
}

/// Monte Carlo robustness-cost sampling: `n_trials` independent seeded
/// trials, cost `Z_i = -rho(X_i)`. Trials run in parallel on the current
/// rayon pool; results are collected in trial order, so the sample set is
/// identical however many workers run.
pub fn monte_carlo(
    model: &dyn SystemModel,
    controller: &Controller,
    spec: &SpecEval,
    n_trials: usize,
    cfg: &TrialConfig,
) -> Result<SampleSet, SimError> {
    let costs: Result<Vec<f64>, SimError> = (0..n_trials as u64)
        .into_par_iter()
        .map(|trial_index| {
            let trace = run_trial(model, controller, cfg, trial_index)?;
            spec.cost(&trace).map_err(|e| SimError::TrialFailed {
                trial_index,
                reason: e.to_string(),
            })
        })
        .collect();
    SampleSet::new(costs?).map_err(|e| SimError::BadModel(e.to_string()))
}

/// Trace-difference samples from `n_trials` paired rollouts:
/// `Gamma_i = sup_t ||x_bar_i(t) - x_i(t)||`.
pub fn paired_gamma(
    nominal: &dyn SystemModel,
    perturbed: &dyn SystemModel,
    controller: &Controller,
    n_trials: usize,
    cfg: &TrialConfig,
) -> Result<SampleSet, SimError> {
    paired_gamma_weighted(nominal, perturbed, controller, n_trials, cfg, None)
}

/// As [`paired_gamma`], measuring state differences in a per-coordinate
/// weighted Euclidean norm.
pub fn paired_gamma_weighted(
    nominal: &dyn SystemModel,
    perturbed: &dyn SystemModel,
    controller: &Controller,
    n_trials: usize,
    cfg: &TrialConfig,
    weights: Option<&[f64]>,
) -> Result<SampleSet, SimError> {
    let sups: Result<Vec<f64>, SimError> = (0..n_trials as u64)
        .into_par_iter()
        .map(|trial_index| {
            let (a, b) = run_paired(nominal, perturbed, controller, cfg, trial_index)?;
            a.weighted_sup_distance(&b, weights)
                .map_err(|e| SimError::TrialFailed {
                    trial_index,
                    reason: e.to_string(),
                })
        })
        .collect();
    SampleSet::new(sups?).map_err(|e| SimError::BadModel(e.to_string()))
}
