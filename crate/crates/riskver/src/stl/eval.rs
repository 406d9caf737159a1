//! Boolean and quantitative formula semantics over traces.
//!
//! Both semantics share the same recursion. `Until` takes the supremum over
//! witness times `t''` in `t (+) I` of the minimum between the right operand
//! at `t''` and the infimum of the left operand strictly between `t` and
//! `t''` (the open inner interval, matching the printed definition; the
//! commonly used closed variant is available through [`EvalOptions`]). The
//! infimum over an empty range is +inf (Boolean: true), the supremum -inf
//! (false). Unbounded intervals are clipped to the trace horizon, so verdicts
//! for unbounded formulas are relative to the recorded horizon.

use super::formula::{Formula, Interval};
use super::trace::Trace;
use super::StlError;

/// Choice of the inner interval in the Until recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UntilInner {
    /// `t' in (t, t'')`, the form the semantics are printed in.
    #[default]
    Open,
    /// `t' in [t, t'']`, the variant most monitoring tools use.
    Closed,
}

/// Semantics flags shared by modifiers of the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub until_inner: UntilInner,
}

impl EvalOptions {
    pub fn closed_until() -> Self {
        Self {
            until_inner: UntilInner::Closed,
        }
    }
}

/// Boolean satisfaction of `f` by `x` at step `t` under default options.
pub fn boolean_sat(f: &Formula, x: &Trace, t: usize) -> Result<bool, StlError> {
    boolean_sat_with(f, x, t, &EvalOptions::default())
}

pub fn boolean_sat_with(
    f: &Formula,
    x: &Trace,
    t: usize,
    opts: &EvalOptions,
) -> Result<bool, StlError> {
    check_window(f, x, t)?;
    sat_rec(f, x, t, opts)
}

/// Quantitative robustness of `f` over `x` at step `t` under default options.
/// Positive values imply Boolean satisfaction, negative ones violation; zero
/// is marginal and decided by set closures.
pub fn robustness(f: &Formula, x: &Trace, t: usize) -> Result<f64, StlError> {
    robustness_with(f, x, t, &EvalOptions::default())
}

pub fn robustness_with(
    f: &Formula,
    x: &Trace,
    t: usize,
    opts: &EvalOptions,
) -> Result<f64, StlError> {
    check_window(f, x, t)?;
    rob_rec(f, x, t, opts)
}

/// Bounded formulas need the trace to reach step `t + L`.
fn check_window(f: &Formula, x: &Trace, t: usize) -> Result<(), StlError> {
    if t > x.last_step() {
        return Err(StlError::TraceTooShort {
            needed: t,
            have: x.last_step(),
        });
    }
    if f.is_bounded() {
        let needed = t + f.length()?;
        if needed > x.last_step() {
            return Err(StlError::TraceTooShort {
                needed,
                have: x.last_step(),
            });
        }
    }
    Ok(())
}

/// Witness window `t (+) I` clipped to the trace horizon. May be empty.
fn window(i: &Interval, t: usize, last: usize) -> Option<(usize, usize)> {
    let lo = t + i.lo();
    if lo > last {
        return None;
    }
    let hi = match i.hi() {
        Some(h) => (t + h).min(last),
        None => last,
    };
    Some((lo, hi))
}

fn inner_range(opts: &EvalOptions, t: usize, witness: usize) -> (usize, usize) {
    // Half-open encode: (lo, hi) inclusive; empty when lo > hi.
    match opts.until_inner {
        UntilInner::Open => (t + 1, witness.saturating_sub(1)),
        UntilInner::Closed => (t, witness),
    }
}

fn sat_rec(f: &Formula, x: &Trace, t: usize, opts: &EvalOptions) -> Result<bool, StlError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Pred(a) => a.member(x.state(t))?,
        Formula::Not(g) => !sat_rec(g, x, t, opts)?,
        Formula::And(a, b) => sat_rec(a, x, t, opts)? && sat_rec(b, x, t, opts)?,
        Formula::Or(a, b) => sat_rec(a, x, t, opts)? || sat_rec(b, x, t, opts)?,
        Formula::Eventually(i, g) => match window(i, t, x.last_step()) {
            None => false,
            Some((lo, hi)) => {
                let mut any = false;
                for w in lo..=hi {
                    if sat_rec(g, x, w, opts)? {
                        any = true;
                        break;
                    }
                }
                any
            }
        },
        Formula::Globally(i, g) => match window(i, t, x.last_step()) {
            None => true,
            Some((lo, hi)) => {
                let mut all = true;
                for w in lo..=hi {
                    if !sat_rec(g, x, w, opts)? {
                        all = false;
                        break;
                    }
                }
                all
            }
        },
        Formula::Until(i, a, b) => match window(i, t, x.last_step()) {
            None => false,
            Some((lo, hi)) => {
                let mut holds = false;
                'witness: for w in lo..=hi {
                    if !sat_rec(b, x, w, opts)? {
                        continue;
                    }
                    let (ilo, ihi) = inner_range(opts, t, w);
                    if ilo <= ihi {
                        for u in ilo..=ihi {
                            if !sat_rec(a, x, u, opts)? {
                                continue 'witness;
                            }
                        }
                    }
                    holds = true;
                    break;
                }
                holds
            }
        },
    })
}

fn rob_rec(f: &Formula, x: &Trace, t: usize, opts: &EvalOptions) -> Result<f64, StlError> {
    Ok(match f {
        Formula::True => f64::INFINITY,
        Formula::False => f64::NEG_INFINITY,
        Formula::Pred(a) => a.signed_distance(x.state(t))?,
        Formula::Not(g) => -rob_rec(g, x, t, opts)?,
        Formula::And(a, b) => rob_rec(a, x, t, opts)?.min(rob_rec(b, x, t, opts)?),
        Formula::Or(a, b) => rob_rec(a, x, t, opts)?.max(rob_rec(b, x, t, opts)?),
        Formula::Eventually(i, g) => match window(i, t, x.last_step()) {
            None => f64::NEG_INFINITY,
            Some((lo, hi)) => {
                let mut sup = f64::NEG_INFINITY;
                for w in lo..=hi {
                    sup = sup.max(rob_rec(g, x, w, opts)?);
                }
                sup
            }
        },
        Formula::Globally(i, g) => match window(i, t, x.last_step()) {
            None => f64::INFINITY,
            Some((lo, hi)) => {
                let mut inf = f64::INFINITY;
                for w in lo..=hi {
                    inf = inf.min(rob_rec(g, x, w, opts)?);
                }
                inf
            }
        },
        Formula::Until(i, a, b) => match window(i, t, x.last_step()) {
            None => f64::NEG_INFINITY,
            Some((lo, hi)) => {
                let mut sup = f64::NEG_INFINITY;
                for w in lo..=hi {
                    let mut v = rob_rec(b, x, w, opts)?;
                    let (ilo, ihi) = inner_range(opts, t, w);
                    if ilo <= ihi {
                        for u in ilo..=ihi {
                            v = v.min(rob_rec(a, x, u, opts)?);
                        }
                    }
                    sup = sup.max(v);
                }
                sup
            }
        },
    })
}
