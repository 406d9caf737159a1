//! The batch commands: verify, sweep-beta, gap, paired-gamma, wasserstein.
//!
//! Every command reads one config, runs seeded Monte Carlo, and writes CSV
//! (plus a small text report where a soundness verdict or semantics note is
//! useful). Output bytes are a pure function of (config, seed): floats are
//! formatted to six significant digits, rows follow config order, and all
//! randomness flows through the per-trial stream derivation.

use std::path::Path;

use crate::fmt::format_sig6;
use crate::gap::{self, Comparison, GapBound};
use crate::risk::{
    cvar_upper_bound, empirical_cvar, empirical_var, mean_risk, worst_case_risk, RiskError,
    RiskMetric, RiskQuery, SampleSet,
};
use crate::sim::{self, mix_seed, Controller, SpecEval, SystemModel};

use super::config::GapCfg;
use super::experiment::{build_gap_bound, gap_method_name, Experiment, RiskEntry};
use super::CliError;

/// Seed-salt layout: one cell per (controller, variant). Variant 0 is
/// nominal, 1 perturbed; paired rollouts reuse the nominal cell so common
/// random numbers hold.
fn cell_seed(master: u64, controller_idx: usize, variant_idx: usize) -> u64 {
    mix_seed(master, (controller_idx as u64) * 1000 + variant_idx as u64)
}

fn write_file(out_dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    let path = out_dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn fmt_level(v: f64) -> String {
    format_sig6(v)
}

struct Csv {
    buf: String,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        Self { buf }
    }

    fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }
}

/// Point estimate and (optional) upper bound for one risk entry. The
/// `bound_cell` carries `insufficient_samples` when the sample count cannot
/// support the requested (beta, delta).
struct EntryResult {
    point: f64,
    bound_cell: String,
    marginal: usize,
}

fn evaluate_entry(samples: &SampleSet, entry: &RiskEntry) -> Result<EntryResult, CliError> {
    let marginal = samples.values().iter().filter(|z| **z == 0.0).count();
    let (point, bound_cell) = match entry.metric {
        RiskMetric::VaR => {
            let point = empirical_var(samples, entry.beta).map_err(CliError::Risk)?;
            let q = RiskQuery::new(entry.beta, entry.delta).map_err(CliError::Risk)?;
            match crate::risk::var_upper_bound(samples, &q) {
                Ok(est) => (point, format_sig6(est.upper_bound.expect("bound present"))),
                Err(RiskError::InsufficientSamples { .. }) => {
                    (point, "insufficient_samples".to_string())
                }
                Err(e) => return Err(CliError::Risk(e)),
            }
        }
        RiskMetric::CVaR => {
            let point = empirical_cvar(samples, entry.beta).map_err(CliError::Risk)?;
            let b = entry
                .support_bound
                .expect("validated: cvar carries a support bound");
            let bounded = samples.clone().bind_support(b).map_err(CliError::Risk)?;
            let q = RiskQuery::new(entry.beta, entry.delta).map_err(CliError::Risk)?;
            let est = cvar_upper_bound(&bounded, &q).map_err(CliError::Risk)?;
            (point, format_sig6(est.upper_bound.expect("bound present")))
        }
        RiskMetric::Mean => (mean_risk(samples), String::new()),
        RiskMetric::WorstCase => (worst_case_risk(samples), String::new()),
    };
    Ok(EntryResult {
        point,
        bound_cell,
        marginal,
    })
}

fn beta_cell(entry: &RiskEntry) -> String {
    match entry.metric {
        RiskMetric::VaR | RiskMetric::CVaR => fmt_level(entry.beta),
        _ => String::new(),
    }
}

fn delta_cell(entry: &RiskEntry) -> String {
    match entry.metric {
        RiskMetric::VaR | RiskMetric::CVaR => fmt_level(entry.delta),
        _ => String::new(),
    }
}

/// `verify`: per (controller x variant x risk entry), a Monte Carlo point
/// estimate and high-confidence upper bound. Writes `verify.csv` and
/// `verify_report.txt`.
pub fn cmd_verify(exp: &Experiment, out_dir: &Path) -> Result<(), CliError> {
    let mut csv = Csv::new(&[
        "controller",
        "variant",
        "metric",
        "beta",
        "delta",
        "point",
        "upper_bound",
        "n",
    ]);
    let mut report = String::new();
    report.push_str(&format!("semantics: {}\n", exp.semantics_note));
    for (ci, (name, ctrl)) in exp.controllers.iter().enumerate() {
        for (vi, (vname, model)) in exp.variants().into_iter().enumerate() {
            let cfg = exp.trial_config(cell_seed(exp.config.master_seed, ci, vi));
            let samples = sim::monte_carlo(model, ctrl, &exp.spec, exp.config.trials, &cfg)
                .map_err(CliError::Sim)?;
            for entry in &exp.risk_entries {
                let r = evaluate_entry(&samples, entry)?;
                csv.row(&[
                    name.clone(),
                    vname.to_string(),
                    entry.metric.as_str().to_string(),
                    beta_cell(entry),
                    delta_cell(entry),
                    format_sig6(r.point),
                    r.bound_cell,
                    samples.len().to_string(),
                ]);
                if r.marginal > 0 {
                    report.push_str(&format!(
                        "marginal: {name}/{vname}: {} of {} traces sit exactly on the boundary (rho = 0)\n",
                        r.marginal,
                        samples.len()
                    ));
                }
            }
        }
    }
    write_file(out_dir, "verify.csv", &csv.buf)?;
    write_file(out_dir, "verify_report.txt", &report)
}

/// `sweep-beta`: one Monte Carlo per (controller, variant), re-queried at
/// each configured beta. Writes `sweep_beta.csv`.
pub fn cmd_sweep_beta(exp: &Experiment, out_dir: &Path) -> Result<(), CliError> {
    let betas = exp
        .config
        .betas
        .as_ref()
        .ok_or_else(|| CliError::Config("betas: required for sweep-beta".into()))?;
    let mut csv = Csv::new(&["controller", "variant", "beta", "var", "cvar"]);
    for (ci, (name, ctrl)) in exp.controllers.iter().enumerate() {
        for (vi, (vname, model)) in exp.variants().into_iter().enumerate() {
            let cfg = exp.trial_config(cell_seed(exp.config.master_seed, ci, vi));
            let samples = sim::monte_carlo(model, ctrl, &exp.spec, exp.config.trials, &cfg)
                .map_err(CliError::Sim)?;
            for beta in betas {
                let var = empirical_var(&samples, *beta).map_err(CliError::Risk)?;
                let cvar = empirical_cvar(&samples, *beta).map_err(CliError::Risk)?;
                csv.row(&[
                    name.clone(),
                    vname.to_string(),
                    fmt_level(*beta),
                    format_sig6(var),
                    format_sig6(cvar),
                ]);
            }
        }
    }
    write_file(out_dir, "sweep_beta.csv", &csv.buf)
}

/// Schedule index a gap bound is read at: bounded formulas use `t + L`, and
/// everything else (constraints, horizon-clipped unbounded formulas) uses the
/// final trace step.
fn schedule_index(exp: &Experiment) -> usize {
    match (&exp.spec, exp.formula_len) {
        (SpecEval::Formula { t, .. }, Some(len)) => t + len,
        _ => exp.config.horizon,
    }
}

/// `gap`: nominal risks plus the configured trajectory-error method give
/// certified perturbed-risk bounds; when the perturbed model is simulable the
/// empirical perturbed risk and a soundness verdict come along. Writes
/// `gap.csv` (columns: controller, nominal_risk, method, delta_or_rgamma,
/// perturbed_bound, perturbed_empirical — one row per controller and risk
/// entry in config order), `gap_compare.csv`, and `gap_report.txt`.
pub fn cmd_gap(exp: &Experiment, out_dir: &Path) -> Result<(), CliError> {
    let gap_cfg = exp
        .config
        .gap
        .as_ref()
        .ok_or_else(|| CliError::Config("gap: section required for the gap command".into()))?;
    let method = gap_method_name(gap_cfg);
    let static_bound = build_gap_bound(gap_cfg, schedule_index(exp))?;
    if matches!(gap_cfg, GapCfg::Stochastic {}) && exp.perturbed.is_none() {
        return Err(CliError::Config(
            "gap: the stochastic method needs a perturbation section".into(),
        ));
    }
    let lip_scale = exp.pred_lipschitz;

    let mut csv = Csv::new(&[
        "controller",
        "nominal_risk",
        "method",
        "delta_or_rgamma",
        "perturbed_bound",
        "perturbed_empirical",
    ]);
    let mut report = String::new();
    report.push_str(&format!("semantics: {}\n", exp.semantics_note));
    report.push_str(&format!(
        "method: {method}; schedule index: {}; predicate Lipschitz scale: {}\n",
        schedule_index(exp),
        format_sig6(lip_scale)
    ));

    // Per controller: nominal samples, gamma samples (stochastic), perturbed
    // samples (when simulable). Point risks per entry feed the comparisons.
    let mut point_risks: Vec<Vec<f64>> = Vec::new();
    let mut compare_deltas: Vec<Vec<f64>> = Vec::new();

    for (ci, (name, ctrl)) in exp.controllers.iter().enumerate() {
        let nominal_cfg = exp.trial_config(cell_seed(exp.config.master_seed, ci, 0));
        let nominal = sim::monte_carlo(
            exp.nominal.as_ref(),
            ctrl,
            &exp.spec,
            exp.config.trials,
            &nominal_cfg,
        )
        .map_err(CliError::Sim)?;

        let gamma = match gap_cfg {
            GapCfg::Stochastic {} => {
                let perturbed = exp.perturbed.as_ref().expect("checked above").as_ref();
                Some(
                    sim::paired_gamma_weighted(
                        exp.nominal.as_ref(),
                        perturbed,
                        ctrl,
                        exp.config.trials,
                        &nominal_cfg,
                        exp.config.state_weights.as_deref(),
                    )
                    .map_err(CliError::Sim)?,
                )
            }
            _ => None,
        };

        // The perturbed empirical run reuses the nominal cell's trial seeds:
        // common random numbers make the bound-vs-empirical verdict compare
        // like with like (and a do-nothing perturbation reproduces the
        // nominal risk exactly).
        let perturbed_samples = match &exp.perturbed {
            Some(p) => Some(
                sim::monte_carlo(p.as_ref(), ctrl, &exp.spec, exp.config.trials, &nominal_cfg)
                    .map_err(CliError::Sim)?,
            ),
            None => None,
        };

        let mut entry_points = Vec::new();
        let mut entry_deltas = Vec::new();
        for entry in &exp.risk_entries {
            let nominal_point = evaluate_entry(&nominal, entry)?.point;
            let q = RiskQuery::new(entry.beta, entry.delta).map_err(CliError::Risk)?;
            let bound = match (&static_bound, &gamma) {
                (Some(b), _) => b.clone(),
                (None, Some(g)) => GapBound::Stochastic { gamma: g.clone() },
                (None, None) => unreachable!("stochastic requires gamma"),
            };
            let increment = gap::gap_increment(&bound, schedule_index(exp), entry.metric, &q)
                .map_err(CliError::Gap)?;
            let scaled = lip_scale * increment;
            let perturbed_bound = nominal_point + scaled;
            let empirical_cell = match &perturbed_samples {
                Some(s) => {
                    let e = evaluate_entry(s, entry)?.point;
                    let verdict = if perturbed_bound >= e {
                        "holds"
                    } else {
                        "violated"
                    };
                    report.push_str(&format!(
                        "soundness: {name}/{}@{}: bound {} vs empirical {} -> {verdict}\n",
                        entry.metric.as_str(),
                        fmt_level(entry.beta),
                        format_sig6(perturbed_bound),
                        format_sig6(e),
                    ));
                    format_sig6(e)
                }
                None => String::new(),
            };
            if let Some(g) = &gamma {
                // Record the plug-in risk of gamma next to the certified one.
                let plug = match entry.metric {
                    RiskMetric::VaR => empirical_var(g, entry.beta).map_err(CliError::Risk)?,
                    RiskMetric::CVaR => empirical_cvar(g, entry.beta).map_err(CliError::Risk)?,
                    RiskMetric::Mean => mean_risk(g),
                    RiskMetric::WorstCase => worst_case_risk(g),
                };
                report.push_str(&format!(
                    "gamma: {name}/{}@{}: upper {} plug_in {} sup {}\n",
                    entry.metric.as_str(),
                    fmt_level(entry.beta),
                    format_sig6(increment),
                    format_sig6(plug),
                    format_sig6(worst_case_risk(g)),
                ));
            }
            csv.row(&[
                name.clone(),
                format_sig6(nominal_point),
                method.to_string(),
                format_sig6(scaled),
                format_sig6(perturbed_bound),
                empirical_cell,
            ]);
            entry_points.push(nominal_point);
            // Controller comparisons use a constant-delta reading of the
            // bound: the schedule value, the constant, or sup(Gamma).
            let delta_for_compare = match &bound {
                GapBound::Stochastic { gamma } => worst_case_risk(gamma),
                b => gap::gap_increment(b, schedule_index(exp), entry.metric, &q)
                    .map_err(CliError::Gap)?,
            };
            entry_deltas.push(lip_scale * delta_for_compare);
        }
        point_risks.push(entry_points);
        compare_deltas.push(entry_deltas);
    }

    // Pairwise one-directional comparisons per risk entry.
    let mut cmp_csv = Csv::new(&[
        "controller_a",
        "controller_b",
        "metric",
        "beta",
        "risk_a",
        "risk_b",
        "delta",
        "verdict",
    ]);
    for (ei, entry) in exp.risk_entries.iter().enumerate() {
        for a in 0..exp.controllers.len() {
            for b in (a + 1)..exp.controllers.len() {
                let (ra, rb) = (point_risks[a][ei], point_risks[b][ei]);
                let delta = compare_deltas[a][ei].max(compare_deltas[b][ei]);
                let verdict = match gap::compare_controllers(ra, rb, delta)
                    .map_err(CliError::Gap)?
                {
                    Comparison::Certified(gap::CertifiedOrder::FirstNoWorse) => "first_no_worse",
                    Comparison::Certified(gap::CertifiedOrder::SecondNoWorse) => "second_no_worse",
                    Comparison::Inconclusive => "inconclusive",
                };
                cmp_csv.row(&[
                    exp.controllers[a].0.clone(),
                    exp.controllers[b].0.clone(),
                    entry.metric.as_str().to_string(),
                    beta_cell(entry),
                    format_sig6(ra),
                    format_sig6(rb),
                    format_sig6(delta),
                    verdict.to_string(),
                ]);
            }
        }
    }

    write_file(out_dir, "gap.csv", &csv.buf)?;
    write_file(out_dir, "gap_compare.csv", &cmp_csv.buf)?;
    write_file(out_dir, "gap_report.txt", &report)
}

/// `paired-gamma`: trace-difference distribution from common-random-number
/// pairs. Writes `gamma_hist.csv` (fixed-width bins over [0, max]) and
/// `gamma_risk.csv` (sup plus the configured risk entries on Gamma).
pub fn cmd_paired_gamma(exp: &Experiment, out_dir: &Path) -> Result<(), CliError> {
    let perturbed = exp
        .perturbed
        .as_ref()
        .ok_or_else(|| CliError::Config("perturbation: required for paired-gamma".into()))?;
    let bins = exp.config.histogram_bins.unwrap_or(40);

    let mut hist_csv = Csv::new(&["controller", "bin_lo", "bin_hi", "count"]);
    let mut risk_csv = Csv::new(&["controller", "stat", "beta", "value"]);

    for (ci, (name, ctrl)) in exp.controllers.iter().enumerate() {
        let cfg = exp.trial_config(cell_seed(exp.config.master_seed, ci, 0));
        let gamma = sim::paired_gamma_weighted(
            exp.nominal.as_ref(),
            perturbed.as_ref(),
            ctrl,
            exp.config.trials,
            &cfg,
            exp.config.state_weights.as_deref(),
        )
        .map_err(CliError::Sim)?;

        let sup = worst_case_risk(&gamma);
        for (lo, hi, count) in histogram(gamma.sorted(), bins, sup) {
            hist_csv.row(&[
                name.clone(),
                format_sig6(lo),
                format_sig6(hi),
                count.to_string(),
            ]);
        }

        risk_csv.row(&[name.clone(), "sup".into(), String::new(), format_sig6(sup)]);
        for entry in &exp.risk_entries {
            match entry.metric {
                RiskMetric::VaR | RiskMetric::CVaR => {}
                _ => continue,
            }
            let plug = match entry.metric {
                RiskMetric::VaR => empirical_var(&gamma, entry.beta).map_err(CliError::Risk)?,
                _ => empirical_cvar(&gamma, entry.beta).map_err(CliError::Risk)?,
            };
            risk_csv.row(&[
                name.clone(),
                entry.metric.as_str().to_string(),
                fmt_level(entry.beta),
                format_sig6(plug),
            ]);
            let q = RiskQuery::new(entry.beta, entry.delta).map_err(CliError::Risk)?;
            let upper = match gap::risk_of_gamma(&gamma, entry.metric, &q) {
                Ok(u) => format_sig6(u),
                Err(gap::GapError::Risk(RiskError::InsufficientSamples { .. })) => {
                    "insufficient_samples".to_string()
                }
                Err(e) => return Err(CliError::Gap(e)),
            };
            risk_csv.row(&[
                name.clone(),
                format!("{}_upper", entry.metric.as_str()),
                fmt_level(entry.beta),
                upper,
            ]);
        }
    }

    write_file(out_dir, "gamma_hist.csv", &hist_csv.buf)?;
    write_file(out_dir, "gamma_risk.csv", &risk_csv.buf)
}

/// Fixed-width bins over `[0, max]`; a degenerate distribution collapses to
/// one bin. Bin edges ride along so plots are reproducible elsewhere.
fn histogram(sorted: &[f64], bins: usize, max: f64) -> Vec<(f64, f64, usize)> {
    if max <= 0.0 {
        return vec![(0.0, 0.0, sorted.len())];
    }
    let width = max / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in sorted {
        let mut idx = (v / width) as usize;
        if idx >= bins {
            idx = bins - 1; // v == max lands in the last bin
        }
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (i as f64 * width, (i + 1) as f64 * width, c))
        .collect()
}

/// First Wasserstein distance between two empirical distributions: the exact
/// integral of the absolute quantile-function difference. Equal sizes reduce
/// to the mean absolute difference of the sorted samples.
pub fn wasserstein_1d(a: &SampleSet, b: &SampleSet) -> f64 {
    let xs = a.sorted();
    let ys = b.sorted();
    let (n, m) = (xs.len(), ys.len());
    // Quantile functions are constant between breakpoints i/n and j/m; walk
    // the merged breakpoints in units of 1/(n*m) so the integral is exact.
    let total_units = (n as u64) * (m as u64);
    let mut prev = 0u64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut acc = 0.0;
    while prev < total_units {
        let next_a = (i as u64 + 1) * m as u64;
        let next_b = (j as u64 + 1) * n as u64;
        let next = next_a.min(next_b);
        acc += ((next - prev) as f64 / total_units as f64) * (xs[i] - ys[j]).abs();
        if next == next_a {
            i += 1;
        }
        if next == next_b {
            j += 1;
        }
        prev = next;
    }
    acc
}

/// `wasserstein`: with a `wasserstein: {a, b}` config section, compares two
/// sample files; otherwise compares the control-command distributions of the
/// nominal and perturbed systems per controller. Writes `wasserstein.csv`.
pub fn cmd_wasserstein(
    exp: &Experiment,
    config_dir: &Path,
    out_dir: &Path,
) -> Result<(), CliError> {
    let mut csv = Csv::new(&["a", "b", "w1", "n_a", "n_b"]);
    if let Some(w) = &exp.config.wasserstein {
        let (pa, pb) = match (&w.a, &w.b) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(CliError::Config(
                    "wasserstein: both a and b sample files are required".into(),
                ))
            }
        };
        let load = |p: &std::path::PathBuf| -> Result<SampleSet, CliError> {
            let full = config_dir.join(p);
            let text = std::fs::read_to_string(&full).map_err(|e| CliError::Io {
                path: full.display().to_string(),
                source: e,
            })?;
            SampleSet::from_csv_str(&text).map_err(CliError::Risk)
        };
        let sa = load(pa)?;
        let sb = load(pb)?;
        csv.row(&[
            pa.display().to_string(),
            pb.display().to_string(),
            format_sig6(wasserstein_1d(&sa, &sb)),
            sa.len().to_string(),
            sb.len().to_string(),
        ]);
        return write_file(out_dir, "wasserstein.csv", &csv.buf);
    }

    let perturbed = exp.perturbed.as_ref().ok_or_else(|| {
        CliError::Config(
            "wasserstein: needs a perturbation section (or a wasserstein file pair)".into(),
        )
    })?;
    for (ci, (name, ctrl)) in exp.controllers.iter().enumerate() {
        let cfg = exp.trial_config(cell_seed(exp.config.master_seed, ci, 0));
        let a = command_samples(exp.nominal.as_ref(), ctrl, exp.config.trials, &cfg)?;
        let b = command_samples(perturbed.as_ref(), ctrl, exp.config.trials, &cfg)?;
        csv.row(&[
            format!("{name}/nominal"),
            format!("{name}/perturbed"),
            format_sig6(wasserstein_1d(&a, &b)),
            a.len().to_string(),
            b.len().to_string(),
        ]);
    }
    write_file(out_dir, "wasserstein.csv", &csv.buf)
}

/// All first-component commands a controller issues across `n` trials.
fn command_samples(
    model: &dyn SystemModel,
    ctrl: &Controller,
    n: usize,
    cfg: &sim::TrialConfig,
) -> Result<SampleSet, CliError> {
    use rayon::prelude::*;
    let per_trial: Result<Vec<Vec<f64>>, _> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            sim::rollout(model, ctrl, cfg, i)
                .map(|r| r.commands.iter().map(|c| c[0]).collect::<Vec<f64>>())
        })
        .collect();
    let values: Vec<f64> = per_trial
        .map_err(CliError::Sim)?
        .into_iter()
        .flatten()
        .collect();
    SampleSet::new(values).map_err(CliError::Risk)
}
