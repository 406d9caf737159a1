//! Time-indexed state traces and pointwise constraint specifications.

use super::atom::PredicateAtom;
use super::StlError;

/// A discrete-time signal: states at steps `0..=T`, all of equal dimension,
/// recorded every `dt` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    dt: f64,
    states: Vec<Vec<f64>>,
}

impl Trace {
    pub fn new(dt: f64, states: Vec<Vec<f64>>) -> Result<Self, StlError> {
        if !(dt > 0.0) {
            return Err(StlError::InvalidTrace(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let Some(first) = states.first() else {
            return Err(StlError::InvalidTrace(
                "trace must have at least one state".into(),
            ));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(StlError::InvalidTrace(
                "states must be nonempty vectors".into(),
            ));
        }
        if states.iter().any(|s| s.len() != dim) {
            return Err(StlError::InvalidTrace(
                "states must all have the same dimension".into(),
            ));
        }
        Ok(Self { dt, states })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    /// Number of steps, i.e. `T + 1` states.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one state
    }

    /// Index of the final step `T`.
    pub fn last_step(&self) -> usize {
        self.states.len() - 1
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.states[t]
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    /// Largest pointwise Euclidean distance to another trace of the same
    /// shape.
    pub fn sup_distance(&self, other: &Trace) -> Result<f64, StlError> {
        self.weighted_sup_distance(other, None)
    }

    /// As [`Trace::sup_distance`], with optional nonnegative per-coordinate
    /// weights `w_i` in `sqrt(sum w_i (a_i - b_i)^2)`.
    pub fn weighted_sup_distance(
        &self,
        other: &Trace,
        weights: Option<&[f64]>,
    ) -> Result<f64, StlError> {
        if self.len() != other.len() || self.dim() != other.dim() {
            return Err(StlError::InvalidTrace(format!(
                "trace shapes differ: {}x{} vs {}x{}",
                self.len(),
                self.dim(),
                other.len(),
                other.dim()
            )));
        }
        if let Some(w) = weights {
            if w.len() != self.dim() {
                return Err(StlError::InvalidTrace(format!(
                    "{} state weights for dimension {}",
                    w.len(),
                    self.dim()
                )));
            }
            if w.iter().any(|v| !(*v >= 0.0)) {
                return Err(StlError::InvalidTrace(
                    "state weights must be nonnegative".into(),
                ));
            }
        }
        let mut sup = 0.0f64;
        for (a, b) in self.states.iter().zip(&other.states) {
            let d = a
                .iter()
                .zip(b)
                .enumerate()
                .map(|(i, (x, y))| {
                    let w = weights.map_or(1.0, |w| w[i]);
                    w * (x - y) * (x - y)
                })
                .sum::<f64>()
                .sqrt();
            sup = sup.max(d);
        }
        Ok(sup)
    }

    /// Serializes as CSV with header `t,s0,s1,...`, one row per step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 0..self.dim() {
            out.push_str(&format!(",s{i}"));
        }
        out.push('\n');
        for (t, s) in self.states.iter().enumerate() {
            out.push_str(&t.to_string());
            for v in s {
                out.push(',');
                // Full round-trip precision for trace files.
                out.push_str(&format!("{v:?}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, dt: f64) -> Result<Self, StlError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| StlError::InvalidTrace("empty trace file".into()))?;
        if !header.starts_with("t,") {
            return Err(StlError::InvalidTrace(
                "trace header must start with `t,`".into(),
            ));
        }
        let mut states = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let _t = fields.next();
            let state: Result<Vec<f64>, _> = fields.map(|f| f.trim().parse::<f64>()).collect();
            let state =
                state.map_err(|e| StlError::InvalidTrace(format!("line {}: {e}", lineno + 2)))?;
            states.push(state);
        }
        Trace::new(dt, states)
    }
}

/// A constraint `c(x(t), t) >= 0` evaluated pointwise over a step range.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    pub atom: PredicateAtom,
    /// Inclusive step range the infimum runs over; `None` means the whole
    /// trace.
    pub horizon: Option<(usize, usize)>,
}

impl ConstraintSpec {
    pub fn new(atom: PredicateAtom) -> Self {
        Self {
            atom,
            horizon: None,
        }
    }

    pub fn with_horizon(atom: PredicateAtom, lo: usize, hi: usize) -> Self {
        Self {
            atom,
            horizon: Some((lo, hi)),
        }
    }

    /// Signed distance of a single state to the constraint boundary.
    pub fn signed_distance(&self, state: &[f64]) -> Result<f64, StlError> {
        self.atom.signed_distance(state)
    }

    /// Robustness of a trace: the minimum signed distance over the horizon.
    /// Nonnegative iff the constraint holds at every step of the horizon.
    pub fn trace_robustness(&self, x: &Trace) -> Result<f64, StlError> {
        let (lo, hi) = match self.horizon {
            Some((lo, hi)) => (lo, hi),
            None => (0, x.last_step()),
        };
        if lo > hi || hi > x.last_step() {
            return Err(StlError::EmptyHorizon {
                lo,
                hi,
                last: x.last_step(),
            });
        }
        let mut min = f64::INFINITY;
        for t in lo..=hi {
            min = min.min(self.atom.signed_distance(x.state(t))?);
        }
        Ok(min)
    }
}
