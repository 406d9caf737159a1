//! Risk verification gap: bounds on how much the robustness risk can grow
//! when a nominal system is replaced by a perturbed one.
//!
//! Three routes produce a trajectory-error bound:
//! - a Lipschitz recursion over the closed loop ([`lipschitz_delta`]),
//! - a class-K-infinity gain for incrementally input-to-state stable systems
//!   ([`iiss_delta`], [`linear_iiss_gain`]),
//! - an empirical trace-difference distribution from paired
//!   common-random-number rollouts ([`gamma_samples`]).
//!
//! A [`GapBound`] then turns a nominal risk into a certificate for the
//! perturbed system via [`gap_bound_constraint`] / [`gap_bound_stl`], and
//! [`compare_controllers`] orders two controllers on the perturbed system
//! from their nominal risks alone.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::risk::{cvar_upper_bound, var_upper_bound, RiskError, RiskMetric, RiskQuery, SampleSet};
use crate::stl::Trace;

#[derive(Debug, Error)]
pub enum GapError {
    #[error("Lipschitz constants must be nonnegative, got {0}")]
    NegativeConstant(f64),
    #[error("disturbance bounds must be nonnegative, got {0}")]
    NegativeDisturbance(f64),
    #[error("gain is not class K-infinity: {0}")]
    GainNotKInfinity(String),
    #[error(
        "closed-loop matrix is not contractive in the induced 2-norm (||A|| = {norm:.6}); \
         the geometric-series argument needs ||A|| < 1, spectral radius alone is not enough"
    )]
    NormNotContractive { norm: f64 },
    #[error("paired traces disagree in shape at pair {index}: {reason}")]
    PairMismatch { index: usize, reason: String },
    #[error("horizon {requested} exceeds the schedule horizon {available}")]
    HorizonExceeded { requested: usize, available: usize },
    #[error("a stochastic gap bound needs a risk metric and query; use gap_bound_constraint")]
    StochasticBoundNeedsQuery,
    #[error(transparent)]
    Risk(#[from] RiskError),
}

/// Lipschitz constants of the closed loop: `l_f1..l_f3` for the three
/// arguments of the dynamics, `l_u` for the controller, `l_g1`, `l_g2` for
/// the output map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzConstants {
    pub l_f1: f64,
    pub l_f2: f64,
    pub l_f3: f64,
    pub l_u: f64,
    pub l_g1: f64,
    pub l_g2: f64,
}

impl LipschitzConstants {
    pub fn new(
        l_f1: f64,
        l_f2: f64,
        l_f3: f64,
        l_u: f64,
        l_g1: f64,
        l_g2: f64,
    ) -> Result<Self, GapError> {
        for v in [l_f1, l_f2, l_f3, l_u, l_g1, l_g2] {
            if !(v >= 0.0) {
                return Err(GapError::NegativeConstant(v));
            }
        }
        Ok(Self {
            l_f1,
            l_f2,
            l_f3,
            l_u,
            l_g1,
            l_g2,
        })
    }
}

/// Diameter-style disturbance bounds: `v_star = 2 max ||v||` over the process
/// noise support, `w_star = 2 max ||w||` over the measurement noise support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceBounds {
    pub v_star: f64,
    pub w_star: f64,
}

impl DisturbanceBounds {
    pub fn new(v_star: f64, w_star: f64) -> Result<Self, GapError> {
        for v in [v_star, w_star] {
            if !(v >= 0.0) {
                return Err(GapError::NegativeDisturbance(v));
            }
        }
        Ok(Self { v_star, w_star })
    }
}

/// Where a constant trajectory-error bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaSource {
    Iiss,
    Assumed,
}

/// A bound on the trajectory error between nominal and perturbed rollouts.
#[derive(Debug, Clone, PartialEq)]
pub enum GapBound {
    /// Worst-case schedule `Delta(t)` for `t = 0..=T`, nondecreasing with
    /// `Delta(0) = 0`.
    LipschitzSchedule { delta: Vec<f64> },
    /// Time-independent bound.
    Constant { delta: f64, source: DeltaSource },
    /// Per-realization bound `Gamma` observed as samples from paired
    /// common-random-number rollouts.
    Stochastic { gamma: SampleSet },
}

impl GapBound {
    pub fn assumed(delta: f64) -> Self {
        GapBound::Constant {
            delta,
            source: DeltaSource::Assumed,
        }
    }

    /// Largest step index a Lipschitz schedule covers.
    pub fn horizon(&self) -> Option<usize> {
        match self {
            GapBound::LipschitzSchedule { delta } => Some(delta.len() - 1),
            _ => None,
        }
    }
}

/// Class K-infinity gain for incrementally input-to-state stable systems.
#[derive(Debug, Clone, PartialEq)]
pub enum IissGain {
    /// `gamma(s) = k * s`.
    Linear { k: f64 },
    /// Piecewise-linear interpolation through `(s, gamma(s))` points with
    /// `gamma(0) = 0`, strictly increasing; extrapolates with the last slope.
    Tabulated { points: Vec<(f64, f64)> },
}

impl IissGain {
    pub fn linear(k: f64) -> Result<Self, GapError> {
        if !(k >= 0.0) {
            return Err(GapError::GainNotKInfinity(format!("negative slope {k}")));
        }
        Ok(IissGain::Linear { k })
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self, GapError> {
        if points.is_empty() {
            return Err(GapError::GainNotKInfinity("empty table".into()));
        }
        if points[0] != (0.0, 0.0) {
            return Err(GapError::GainNotKInfinity(format!(
                "table must start at (0, 0), got {:?}",
                points[0]
            )));
        }
        for w in points.windows(2) {
            let ((s0, g0), (s1, g1)) = (w[0], w[1]);
            if !(s1 > s0 && g1 > g0) {
                return Err(GapError::GainNotKInfinity(format!(
                    "table must be strictly increasing, got ({s0},{g0}) then ({s1},{g1})"
                )));
            }
        }
        Ok(IissGain::Tabulated { points })
    }

    /// Evaluates the gain at `s >= 0`.
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            IissGain::Linear { k } => k * s,
            IissGain::Tabulated { points } => {
                if s <= 0.0 {
                    return 0.0;
                }
                for w in points.windows(2) {
                    let ((s0, g0), (s1, g1)) = (w[0], w[1]);
                    if s <= s1 {
                        return g0 + (g1 - g0) * (s - s0) / (s1 - s0);
                    }
                }
                // Beyond the last point: continue with the final slope so the
                // gain stays unbounded, as K-infinity requires.
                let n = points.len();
                if n == 1 {
                    return s; // table is just (0,0); fall back to identity
                }
                let (s0, g0) = points[n - 2];
                let (s1, g1) = points[n - 1];
                g1 + (g1 - g0) * (s - s1) / (s1 - s0)
            }
        }
    }
}

/// Worst-case trajectory-error schedule from Lipschitz constants:
/// `Delta(0) = 0` and
/// `Delta(t+1) = l_f1 Delta(t) + l_f2 l_u (l_g1 Delta(t) + l_g2 w*) + l_f3 v*`.
pub fn lipschitz_delta(
    lip: &LipschitzConstants,
    dist: &DisturbanceBounds,
    horizon: usize,
) -> GapBound {
    let mut delta = Vec::with_capacity(horizon + 1);
    let mut d = 0.0;
    delta.push(d);
    for _ in 0..horizon {
        d = lip.l_f1 * d
            + lip.l_f2 * lip.l_u * (lip.l_g1 * d + lip.l_g2 * dist.w_star)
            + lip.l_f3 * dist.v_star;
        delta.push(d);
    }
    GapBound::LipschitzSchedule { delta }
}

/// Time-independent trajectory-error bound `Delta = gamma(diameter)` for an
/// incrementally input-to-state stable closed loop, where `diameter` is the
/// diameter of the joint disturbance support.
pub fn iiss_delta(gain: &IissGain, d_diameter: f64) -> Result<GapBound, GapError> {
    if !(d_diameter >= 0.0) {
        return Err(GapError::NegativeDisturbance(d_diameter));
    }
    Ok(GapBound::Constant {
        delta: gain.eval(d_diameter),
        source: DeltaSource::Iiss,
    })
}

/// iISS gain of a stable linear closed loop `x(t+1) = A_cl x(t) + d(t)`:
/// `gamma(s) = s / (1 - ||A_cl||)` with the induced 2-norm. Requires
/// `||A_cl|| < 1`; a spectral radius below one does not suffice for the
/// geometric-series bound and is rejected.
pub fn linear_iiss_gain(a_cl: &[Vec<f64>]) -> Result<IissGain, GapError> {
    let norm = induced_two_norm(a_cl)?;
    if norm >= 1.0 {
        return Err(GapError::NormNotContractive { norm });
    }
    IissGain::linear(1.0 / (1.0 - norm))
}

/// Largest singular value of a square matrix.
pub fn induced_two_norm(a: &[Vec<f64>]) -> Result<f64, GapError> {
    let n = a.len();
    if n == 0 || a.iter().any(|row| row.len() != n) {
        return Err(GapError::GainNotKInfinity(
            "matrix must be square and nonempty".into(),
        ));
    }
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let svd = m.svd(false, false);
    Ok(svd.singular_values.max())
}

/// Trace-difference samples `Gamma_i = sup_t ||x_bar_i(t) - x_i(t)||` from
/// paired rollouts generated under common random numbers.
pub fn gamma_samples(pairs: &[(Trace, Trace)]) -> Result<SampleSet, GapError> {
    gamma_samples_weighted(pairs, None)
}

/// As [`gamma_samples`], measuring the state difference in a per-coordinate
/// weighted Euclidean norm.
pub fn gamma_samples_weighted(
    pairs: &[(Trace, Trace)],
    weights: Option<&[f64]>,
) -> Result<SampleSet, GapError> {
    if pairs.is_empty() {
        return Err(GapError::Risk(RiskError::Empty));
    }
    let mut samples = Vec::with_capacity(pairs.len());
    for (index, (nominal, perturbed)) in pairs.iter().enumerate() {
        let sup = nominal
            .weighted_sup_distance(perturbed, weights)
            .map_err(|e| GapError::PairMismatch {
                index,
                reason: e.to_string(),
            })?;
        samples.push(sup);
    }
    Ok(SampleSet::new(samples)?)
}

/// Upper-bounds the perturbed-system risk for a constraint specification
/// whose evaluation horizon ends at step `horizon`:
/// - constant bound: `nominal + Delta`,
/// - Lipschitz schedule: `nominal + Delta(T)`,
/// - stochastic bound: `nominal + R(Gamma)`, where `R(Gamma)` is the
///   high-confidence upper bound matching `metric` so the certificate keeps
///   its confidence level (CVaR uses the sample sup as the support bound when
///   none is declared).
pub fn gap_bound_constraint(
    nominal_risk: f64,
    bound: &GapBound,
    horizon: usize,
    metric: RiskMetric,
    query: &RiskQuery,
) -> Result<f64, GapError> {
    Ok(nominal_risk + gap_increment(bound, horizon, metric, query)?)
}

/// The additive increment a gap bound contributes at evaluation step
/// `horizon` (see [`gap_bound_constraint`]).
pub fn gap_increment(
    bound: &GapBound,
    horizon: usize,
    metric: RiskMetric,
    query: &RiskQuery,
) -> Result<f64, GapError> {
    match bound {
        GapBound::Constant { delta, .. } => Ok(*delta),
        GapBound::LipschitzSchedule { delta } => {
            if horizon >= delta.len() {
                return Err(GapError::HorizonExceeded {
                    requested: horizon,
                    available: delta.len() - 1,
                });
            }
            Ok(delta[horizon])
        }
        GapBound::Stochastic { gamma } => Ok(risk_of_gamma(gamma, metric, query)?),
    }
}

/// High-confidence risk of the trace-difference variable.
pub fn risk_of_gamma(
    gamma: &SampleSet,
    metric: RiskMetric,
    query: &RiskQuery,
) -> Result<f64, GapError> {
    match metric {
        RiskMetric::VaR => Ok(var_upper_bound(gamma, query)?
            .upper_bound
            .expect("var_upper_bound always fills the bound")),
        RiskMetric::CVaR => {
            let bounded = if gamma.support_bound().is_some() {
                gamma.clone()
            } else {
                let sup = *gamma.sorted().last().expect("nonempty");
                gamma.clone().bind_support(sup)?
            };
            Ok(cvar_upper_bound(&bounded, query)?
                .upper_bound
                .expect("cvar_upper_bound always fills the bound"))
        }
        RiskMetric::Mean => Ok(crate::risk::mean_risk(gamma)),
        RiskMetric::WorstCase => Ok(crate::risk::worst_case_risk(gamma)),
    }
}

/// Upper-bounds the perturbed-system risk of a bounded STL formula in
/// positive normal form, evaluated at step `t` with formula length
/// `formula_len`: schedule bounds contribute `Delta(t + L)`, constant bounds
/// `Delta` independent of `t` and `L`. Stochastic bounds are not defined for
/// this entry point; route them through [`gap_bound_constraint`].
pub fn gap_bound_stl(
    nominal_risk_at_t: f64,
    bound: &GapBound,
    t: usize,
    formula_len: usize,
) -> Result<f64, GapError> {
    match bound {
        GapBound::Constant { delta, .. } => Ok(nominal_risk_at_t + delta),
        GapBound::LipschitzSchedule { delta } => {
            let idx = t + formula_len;
            if idx >= delta.len() {
                return Err(GapError::HorizonExceeded {
                    requested: idx,
                    available: delta.len() - 1,
                });
            }
            Ok(nominal_risk_at_t + delta[idx])
        }
        GapBound::Stochastic { .. } => Err(GapError::StochasticBoundNeedsQuery),
    }
}

/// Outcome of a controller comparison on the perturbed system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// The named side has provably no larger risk on the perturbed system.
    Certified(CertifiedOrder),
    /// The margin is too small to certify either direction; nothing is
    /// refuted.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertifiedOrder {
    FirstNoWorse,
    SecondNoWorse,
}

/// Compares two controllers by their nominal risks: if
/// `risk_1 <= risk_2 - 2 Delta`, the first controller is certified no worse
/// on the perturbed system (and symmetrically). Anything else is
/// inconclusive.
pub fn compare_controllers(risk_1: f64, risk_2: f64, delta: f64) -> Result<Comparison, GapError> {
    if !(delta >= 0.0) {
        return Err(GapError::NegativeDisturbance(delta));
    }
    if risk_1 <= risk_2 - 2.0 * delta {
        Ok(Comparison::Certified(CertifiedOrder::FirstNoWorse))
    } else if risk_2 <= risk_1 - 2.0 * delta {
        Ok(Comparison::Certified(CertifiedOrder::SecondNoWorse))
    } else {
        Ok(Comparison::Inconclusive)
    }
}
