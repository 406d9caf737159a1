//! Turns a parsed config into runnable models, controllers, and specs.

use std::path::Path;

use crate::risk::RiskMetric;
use crate::sim::{
    Controller, F110Model, LinearModel, NnWeights, Perturbation, SpecEval, SystemModel,
    TrialConfig, UuvModel,
};
use crate::stl::{
    parse_formula, ConstraintSpec, EvalOptions, FunctionRegistry, PredicateTable, UntilInner,
};

use super::config::{
    ConstraintCfg, ControllerCfg, ExperimentConfig, GainCfg, GapCfg, MetricCfg, PerturbationCfg,
    SpecCfg, SystemCfg,
};
use super::CliError;

/// One resolved risk query from the config's `risk` list.
#[derive(Debug, Clone, Copy)]
pub struct RiskEntry {
    pub metric: RiskMetric,
    pub beta: f64,
    pub delta: f64,
    pub support_bound: Option<f64>,
}

/// Everything a command needs, resolved and validated.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub nominal: Box<dyn SystemModel>,
    pub perturbed: Option<Box<dyn SystemModel>>,
    pub controllers: Vec<(String, Controller)>,
    pub spec: SpecEval,
    pub risk_entries: Vec<RiskEntry>,
    /// Formula length after normal-form checking, when the checked
    /// specification is a bounded formula (used by schedule-type gap bounds).
    pub formula_len: Option<usize>,
    /// Largest declared predicate Lipschitz constant; scales trajectory-error
    /// bounds into robustness-error bounds.
    pub pred_lipschitz: f64,
    /// Human-readable note naming the semantics flags in effect.
    pub semantics_note: String,
}

impl Experiment {
    pub fn build(config: ExperimentConfig, config_dir: &Path) -> Result<Self, CliError> {
        let nominal = build_model(&config.system, Perturbation::None, &config, config_dir)?;
        let perturbed = match &config.perturbation {
            Some(p) => Some(build_model(
                &config.system,
                to_perturbation(p),
                &config,
                config_dir,
            )?),
            None => None,
        };

        let (registry, mut table) = builtin_predicates(&config.system, nominal.as_ref());
        if let Some(path) = &config.spec.predicates {
            let full = config_dir.join(path);
            let text = std::fs::read_to_string(&full).map_err(|e| CliError::Io {
                path: full.display().to_string(),
                source: e,
            })?;
            let file_table = PredicateTable::from_json_str(&text, &registry)?;
            for name in file_table.names() {
                table.insert(file_table.get(name).expect("name from table").clone());
            }
        }

        let options = eval_options(&config.spec);
        let (spec, formula_len, pred_lipschitz) =
            build_spec(&config.spec, &table, options, config.horizon)?;

        let mut controllers = Vec::new();
        for c in &config.controllers {
            controllers.push((c.name.clone(), build_controller(c, config_dir)?));
        }

        let risk_entries = config
            .risk
            .iter()
            .map(|r| RiskEntry {
                metric: match r.metric {
                    MetricCfg::Var => RiskMetric::VaR,
                    MetricCfg::Cvar => RiskMetric::CVaR,
                    MetricCfg::Mean => RiskMetric::Mean,
                    MetricCfg::WorstCase => RiskMetric::WorstCase,
                },
                beta: r.beta.unwrap_or(0.5),
                delta: r.delta.unwrap_or(0.05),
                support_bound: r.support_bound,
            })
            .collect();

        let semantics_note = format!(
            "until_inner={}; unbounded operators clipped to the {}-step horizon; \
             verdicts for unbounded formulas are horizon-relative",
            match options.until_inner {
                UntilInner::Open => "open",
                UntilInner::Closed => "closed",
            },
            config.horizon,
        );

        Ok(Self {
            config,
            nominal,
            perturbed,
            controllers,
            spec,
            risk_entries,
            formula_len,
            pred_lipschitz,
            semantics_note,
        })
    }

    pub fn trial_config(&self, master_seed: u64) -> TrialConfig {
        TrialConfig {
            master_seed,
            horizon: self.config.horizon,
        }
    }

    /// Model variants to report on: always nominal, plus the perturbed model
    /// when configured.
    pub fn variants(&self) -> Vec<(&'static str, &dyn SystemModel)> {
        let mut v: Vec<(&'static str, &dyn SystemModel)> = vec![("nominal", self.nominal.as_ref())];
        if let Some(p) = &self.perturbed {
            v.push(("perturbed", p.as_ref()));
        }
        v
    }
}

fn to_perturbation(p: &PerturbationCfg) -> Perturbation {
    match p {
        PerturbationCfg::DroppedRays { count } => Perturbation::DroppedRays { count: *count },
        PerturbationCfg::StructuredLidar {
            bias,
            noise_scale,
            drop_count,
        } => Perturbation::StructuredLidar {
            bias: *bias,
            noise_scale: *noise_scale,
            drop_count: *drop_count,
        },
        PerturbationCfg::ObservationOffset { offset } => {
            Perturbation::ObservationOffset { offset: *offset }
        }
        PerturbationCfg::ProcessNoiseScale { scale } => {
            Perturbation::ProcessNoiseScale { scale: *scale }
        }
        PerturbationCfg::LagError {
            factor,
            noise_sigma,
        } => Perturbation::LagError {
            factor: *factor,
            noise_sigma: *noise_sigma,
        },
    }
}

fn build_model(
    system: &SystemCfg,
    perturbation: Perturbation,
    config: &ExperimentConfig,
    config_dir: &Path,
) -> Result<Box<dyn SystemModel>, CliError> {
    match system {
        SystemCfg::F110 { speed, .. } => {
            let mut m = F110Model::new(perturbation).map_err(CliError::Sim)?;
            if let Some(s) = speed {
                m.speed = *s;
            }
            if let Some(dt) = config.dt {
                m.dt = dt;
            }
            Ok(Box::new(m))
        }
        SystemCfg::Uuv { .. } => {
            let mut m = UuvModel::new(perturbation).map_err(CliError::Sim)?;
            if let Some(dt) = config.dt {
                m.dt = dt;
            }
            Ok(Box::new(m))
        }
        SystemCfg::Custom { path } => {
            let full = config_dir.join(path);
            let text = std::fs::read_to_string(&full).map_err(|e| CliError::Io {
                path: full.display().to_string(),
                source: e,
            })?;
            let mut m = LinearModel::from_json_str(&text, perturbation).map_err(CliError::Sim)?;
            if let Some(dt) = config.dt {
                m.dt = dt;
            }
            Ok(Box::new(m))
        }
    }
}

/// Built-in predicate tables per case study. The `f110` system exposes
/// `safe` (signed wall distance minus the configured margin); `uuv` exposes
/// `far_enough` and `close_enough` over the planar pipeline distance.
fn builtin_predicates(
    system: &SystemCfg,
    _nominal: &dyn SystemModel,
) -> (FunctionRegistry, PredicateTable) {
    use crate::stl::PredicateAtom;
    let mut registry = FunctionRegistry::new();
    let mut table = PredicateTable::new();
    match system {
        SystemCfg::F110 { wall_margin, .. } => {
            let map = crate::sim::default_hallway();
            let margin = *wall_margin;
            registry.register("wall_margin", Some(1.0), move |s: &[f64]| {
                map.wall_distance(s[0], s[1]) - margin
            });
            let (f, lip) = registry.get("wall_margin").expect("just registered");
            table.insert(
                PredicateAtom::functional("safe", "wall_margin", f, lip)
                    .expect("functional atom is valid"),
            );
        }
        SystemCfg::Uuv { d_low, d_high } => {
            let (dl, dh) = (*d_low, *d_high);
            registry.register("pipe_dist_above_low", Some(1.0), move |s: &[f64]| {
                s[1].abs() - dl
            });
            registry.register("pipe_dist_below_high", Some(1.0), move |s: &[f64]| {
                dh - s[1].abs()
            });
            let (f1, l1) = registry.get("pipe_dist_above_low").expect("registered");
            let (f2, l2) = registry.get("pipe_dist_below_high").expect("registered");
            table.insert(
                PredicateAtom::functional("far_enough", "pipe_dist_above_low", f1, l1)
                    .expect("functional atom is valid"),
            );
            table.insert(
                PredicateAtom::functional("close_enough", "pipe_dist_below_high", f2, l2)
                    .expect("functional atom is valid"),
            );
        }
        SystemCfg::Custom { .. } => {}
    }
    (registry, table)
}

fn eval_options(spec: &SpecCfg) -> EvalOptions {
    match spec.until_inner.as_deref() {
        Some("closed") => EvalOptions::closed_until(),
        _ => EvalOptions::default(),
    }
}

fn build_spec(
    spec: &SpecCfg,
    table: &PredicateTable,
    options: EvalOptions,
    horizon: usize,
) -> Result<(SpecEval, Option<usize>, f64), CliError> {
    if let Some(text) = &spec.formula {
        let formula = parse_formula(text, table)?;
        let pred_lipschitz = formula.max_predicate_lipschitz()?;
        // Verify a positive normal form exists now, so gap certificates can
        // rely on it later.
        let pnf = formula.to_pnf()?;
        let formula_len = if formula.is_bounded() {
            let len = formula.length()?;
            if spec.t + len > horizon {
                return Err(CliError::Config(format!(
                    "spec: formula needs step t + L = {} but the horizon is {horizon}",
                    spec.t + len
                )));
            }
            Some(len)
        } else {
            None
        };
        let _ = pnf;
        Ok((
            SpecEval::Formula {
                formula,
                t: spec.t,
                options,
            },
            formula_len,
            pred_lipschitz,
        ))
    } else {
        let ConstraintCfg {
            predicate,
            horizon: range,
        } = spec
            .constraint
            .as_ref()
            .expect("validated: constraint present");
        let atom = table
            .get(predicate)
            .ok_or_else(|| {
                CliError::Config(format!("spec.constraint: unknown predicate `{predicate}`"))
            })?
            .clone();
        if let Some((lo, hi)) = range {
            if lo > hi || *hi > horizon {
                return Err(CliError::Config(format!(
                    "spec.constraint.horizon: [{lo},{hi}] does not fit in 0..={horizon}"
                )));
            }
        }
        let lip = atom.lipschitz().ok_or_else(|| {
            CliError::Config(format!(
                "spec.constraint: predicate `{predicate}` needs a declared Lipschitz constant"
            ))
        })?;
        let c = ConstraintSpec {
            atom,
            horizon: *range,
        };
        Ok((SpecEval::Constraint(c), None, lip))
    }
}

fn build_controller(c: &ControllerCfg, config_dir: &Path) -> Result<Controller, CliError> {
    if let Some(id) = &c.scripted {
        return Controller::scripted_by_id(id).ok_or_else(|| {
            CliError::Config(format!(
                "controllers.{}: unknown scripted id `{id}`",
                c.name
            ))
        });
    }
    let path = c.weights.as_ref().expect("validated: weights present");
    let full = config_dir.join(path);
    let text = std::fs::read_to_string(&full).map_err(|e| CliError::Io {
        path: full.display().to_string(),
        source: e,
    })?;
    Ok(Controller::Network(
        NnWeights::from_json_str(&text).map_err(CliError::Sim)?,
    ))
}

/// Resolves a configured gap method into a bound builder the commands share.
pub fn build_gap_bound(
    gap: &GapCfg,
    horizon: usize,
) -> Result<Option<crate::gap::GapBound>, CliError> {
    use crate::gap::{
        iiss_delta, linear_iiss_gain, lipschitz_delta, DisturbanceBounds, IissGain,
        LipschitzConstants,
    };
    match gap {
        GapCfg::Lipschitz {
            l_f1,
            l_f2,
            l_f3,
            l_u,
            l_g1,
            l_g2,
            v_star,
            w_star,
        } => {
            let lip = LipschitzConstants::new(*l_f1, *l_f2, *l_f3, *l_u, *l_g1, *l_g2)
                .map_err(CliError::Gap)?;
            let dist = DisturbanceBounds::new(*v_star, *w_star).map_err(CliError::Gap)?;
            Ok(Some(lipschitz_delta(&lip, &dist, horizon)))
        }
        GapCfg::Iiss { gain, diameter } => {
            let g = match gain {
                GainCfg {
                    linear: Some(k), ..
                } => IissGain::linear(*k).map_err(CliError::Gap)?,
                GainCfg { a_cl: Some(a), .. } => linear_iiss_gain(a).map_err(CliError::Gap)?,
                GainCfg {
                    tabulated: Some(pts),
                    ..
                } => IissGain::tabulated(pts.clone()).map_err(CliError::Gap)?,
                _ => unreachable!("validated: exactly one gain form"),
            };
            Ok(Some(iiss_delta(&g, *diameter).map_err(CliError::Gap)?))
        }
        // The stochastic bound is built per controller from paired rollouts.
        GapCfg::Stochastic {} => Ok(None),
    }
}

pub fn gap_method_name(gap: &GapCfg) -> &'static str {
    match gap {
        GapCfg::Lipschitz { .. } => "lipschitz",
        GapCfg::Iiss { .. } => "iiss",
        GapCfg::Stochastic {} => "stochastic",
    }
}
