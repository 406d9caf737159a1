//! Shared helpers for the integration and acceptance suites: a random
//! formula/trace corpus and a reference robustness evaluator written
//! independently of the library's evaluator.

// Each integration-test target compiles this module separately and uses a
// different subset of it.
#![allow(dead_code)]

use rand::prelude::*;
use riskver::stl::{Formula, Interval, NormKind, PredicateAtom, Trace};

pub const STATE_DIM: usize = 2;

/// Random geometric atom over 2-d states.
pub fn random_atom(rng: &mut StdRng) -> PredicateAtom {
    let name = format!("p{}", rng.gen_range(0..1000));
    let atom = match rng.gen_range(0..4) {
        0 => {
            let a: Vec<f64> = (0..STATE_DIM)
                .map(|_| rng.gen_range(-1.0..1.0f64))
                .map(|v| if v == 0.0 { 0.5 } else { v })
                .collect();
            PredicateAtom::halfspace(name, a, rng.gen_range(-1.5..1.5)).unwrap()
        }
        1 => {
            let lo: Vec<f64> = (0..STATE_DIM).map(|_| rng.gen_range(-2.0..0.5)).collect();
            let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.2..2.5)).collect();
            PredicateAtom::axis_box(name, lo, hi).unwrap()
        }
        2 => {
            let c: Vec<f64> = (0..STATE_DIM).map(|_| rng.gen_range(-1.5..1.5)).collect();
            PredicateAtom::norm_ball(name, c, rng.gen_range(0.2..1.8), NormKind::L2).unwrap()
        }
        _ => {
            let c: Vec<f64> = (0..STATE_DIM).map(|_| rng.gen_range(-1.5..1.5)).collect();
            PredicateAtom::norm_ball(name, c, rng.gen_range(0.2..1.8), NormKind::Linf).unwrap()
        }
    };
    if rng.gen_bool(0.25) {
        atom.complement()
    } else {
        atom
    }
}

fn random_interval(rng: &mut StdRng) -> Interval {
    let lo = rng.gen_range(0..=1usize);
    Interval::bounded(lo, lo + rng.gen_range(0..=2usize)).unwrap()
}

/// Random formula of at most `depth` operator levels. Until intervals are
/// always bounded (their negation is otherwise not normalizable); F and G may
/// be unbounded with small probability when `allow_unbounded` is set.
pub fn random_formula(rng: &mut StdRng, depth: usize, allow_unbounded: bool) -> Formula {
    if depth == 0 {
        return if rng.gen_bool(0.08) {
            Formula::True
        } else {
            Formula::pred(random_atom(rng))
        };
    }
    let fg_interval = |rng: &mut StdRng| {
        if allow_unbounded && rng.gen_bool(0.15) {
            Interval::unbounded(rng.gen_range(0..=1))
        } else {
            random_interval(rng)
        }
    };
    match rng.gen_range(0..6) {
        0 => Formula::not(random_formula(rng, depth - 1, allow_unbounded)),
        1 => Formula::and(
            random_formula(rng, depth - 1, allow_unbounded),
            random_formula(rng, depth - 1, allow_unbounded),
        ),
        2 => Formula::or(
            random_formula(rng, depth - 1, allow_unbounded),
            random_formula(rng, depth - 1, allow_unbounded),
        ),
        3 => Formula::until(
            random_interval(rng),
            random_formula(rng, depth - 1, allow_unbounded),
            random_formula(rng, depth - 1, allow_unbounded),
        ),
        4 => Formula::eventually(
            fg_interval(rng),
            random_formula(rng, depth - 1, allow_unbounded),
        ),
        _ => Formula::globally(
            fg_interval(rng),
            random_formula(rng, depth - 1, allow_unbounded),
        ),
    }
}

/// Random trace of `steps` states over `[-2, 2]^2`.
pub fn random_trace(rng: &mut StdRng, steps: usize) -> Trace {
    let states = (0..steps)
        .map(|_| (0..STATE_DIM).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    Trace::new(1.0, states).unwrap()
}

/// A random (formula, trace, t) instance with enough trace to evaluate.
pub fn random_instance(rng: &mut StdRng, depth: usize) -> (Formula, Trace, usize) {
    loop {
        let f = random_formula(rng, depth, true);
        let trace = random_trace(rng, 10);
        let needed = if f.is_bounded() {
            f.length().expect("bounded")
        } else {
            0
        };
        if needed > trace.last_step() {
            continue;
        }
        let t = rng.gen_range(0..=(trace.last_step() - needed));
        return (f, trace, t);
    }
}

// ---------------------------------------------------------------------------
// Reference evaluator: an independently written direct recursion over the
// printed semantics. Set distances are recomputed from scratch (projection
// forms rather than the library's case analysis), and the sup/inf structure
// materializes candidate lists instead of folding in place.
// ---------------------------------------------------------------------------

pub fn ref_atom_distance(atom: &PredicateAtom, state: &[f64]) -> f64 {
    use riskver::stl::Shape;
    let base = match &atom.shape {
        Shape::Halfspace { a, b } => {
            let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let dot: f64 = a.iter().zip(state).map(|(x, y)| x * y).sum();
            (dot - b) / norm
        }
        Shape::AxisBox { lo, hi } => ref_box_distance(state, lo, hi),
        Shape::NormBall {
            center,
            radius,
            norm,
        } => match norm {
            NormKind::L2 => {
                let d: f64 = state
                    .iter()
                    .zip(center)
                    .map(|(x, c)| (x - c).powi(2))
                    .sum::<f64>()
                    .sqrt();
                radius - d
            }
            NormKind::Linf => {
                let lo: Vec<f64> = center.iter().map(|c| c - radius).collect();
                let hi: Vec<f64> = center.iter().map(|c| c + radius).collect();
                ref_box_distance(state, &lo, &hi)
            }
        },
        Shape::Functional { func, .. } => func(state),
    };
    if atom.negated {
        -base
    } else {
        base
    }
}

/// Distance to a box via projection onto it; inside, the margin is the
/// smallest slack over all faces.
fn ref_box_distance(x: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let projected: Vec<f64> = x
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(v, (l, h))| v.max(*l).min(*h))
        .collect();
    let outside: f64 = x
        .iter()
        .zip(&projected)
        .map(|(v, p)| (v - p).powi(2))
        .sum::<f64>()
        .sqrt();
    if outside > 0.0 {
        return -outside;
    }
    let mut slack = f64::INFINITY;
    for i in 0..x.len() {
        slack = slack.min(x[i] - lo[i]);
        slack = slack.min(hi[i] - x[i]);
    }
    slack
}

/// Reference robustness: direct recursion over the printed semantics with
/// the open inner Until interval, clipping unbounded windows to the trace.
pub fn ref_robustness(f: &Formula, x: &Trace, t: usize) -> f64 {
    match f {
        Formula::True => f64::INFINITY,
        Formula::False => f64::NEG_INFINITY,
        Formula::Pred(a) => ref_atom_distance(a, x.state(t)),
        Formula::Not(g) => -ref_robustness(g, x, t),
        Formula::And(a, b) => {
            let (ra, rb) = (ref_robustness(a, x, t), ref_robustness(b, x, t));
            if ra < rb {
                ra
            } else {
                rb
            }
        }
        Formula::Or(a, b) => {
            let (ra, rb) = (ref_robustness(a, x, t), ref_robustness(b, x, t));
            if ra > rb {
                ra
            } else {
                rb
            }
        }
        Formula::Eventually(i, g) => {
            let candidates: Vec<f64> = ref_window(i, t, x.last_step())
                .into_iter()
                .map(|w| ref_robustness(g, x, w))
                .collect();
            candidates.into_iter().fold(f64::NEG_INFINITY, f64::max)
        }
        Formula::Globally(i, g) => {
            let candidates: Vec<f64> = ref_window(i, t, x.last_step())
                .into_iter()
                .map(|w| ref_robustness(g, x, w))
                .collect();
            candidates.into_iter().fold(f64::INFINITY, f64::min)
        }
        Formula::Until(i, a, b) => {
            let mut best = f64::NEG_INFINITY;
            for w in ref_window(i, t, x.last_step()) {
                let mut v = ref_robustness(b, x, w);
                // inf of the left operand over the open interval (t, w)
                let mut guard = f64::INFINITY;
                for u in (t + 1)..w {
                    guard = guard.min(ref_robustness(a, x, u));
                }
                if guard < v {
                    v = guard;
                }
                if v > best {
                    best = v;
                }
            }
            best
        }
    }
}

fn ref_window(i: &Interval, t: usize, last: usize) -> Vec<usize> {
    let lo = t + i.lo();
    let hi = match i.hi() {
        Some(h) => (t + h).min(last),
        None => last,
    };
    if lo > last {
        return Vec::new();
    }
    (lo..=hi).collect()
}

/// Reference Boolean satisfaction by the same independent recursion.
pub fn ref_sat(f: &Formula, x: &Trace, t: usize) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Pred(a) => ref_member(a, x.state(t)),
        Formula::Not(g) => !ref_sat(g, x, t),
        Formula::And(a, b) => ref_sat(a, x, t) && ref_sat(b, x, t),
        Formula::Or(a, b) => ref_sat(a, x, t) || ref_sat(b, x, t),
        Formula::Eventually(i, g) => ref_window(i, t, x.last_step())
            .into_iter()
            .any(|w| ref_sat(g, x, w)),
        Formula::Globally(i, g) => ref_window(i, t, x.last_step())
            .into_iter()
            .all(|w| ref_sat(g, x, w)),
        Formula::Until(i, a, b) => ref_window(i, t, x.last_step())
            .into_iter()
            .any(|w| ref_sat(b, x, w) && ((t + 1)..w).all(|u| ref_sat(a, x, u))),
    }
}

fn ref_member(atom: &PredicateAtom, state: &[f64]) -> bool {
    use riskver::stl::Shape;
    let inside = match &atom.shape {
        Shape::Halfspace { a, b } => {
            let dot: f64 = a.iter().zip(state).map(|(x, y)| x * y).sum();
            dot >= *b
        }
        Shape::AxisBox { lo, hi } => {
            (0..state.len()).all(|i| lo[i] <= state[i] && state[i] <= hi[i])
        }
        Shape::NormBall {
            center,
            radius,
            norm,
        } => match norm {
            NormKind::L2 => {
                state
                    .iter()
                    .zip(center)
                    .map(|(x, c)| (x - c).powi(2))
                    .sum::<f64>()
                    .sqrt()
                    <= *radius
            }
            NormKind::Linf => {
                state
                    .iter()
                    .zip(center)
                    .map(|(x, c)| (x - c).abs())
                    .fold(0.0f64, f64::max)
                    <= *radius
            }
        },
        Shape::Functional { func, .. } => func(state) >= 0.0,
    };
    if atom.negated {
        !inside
    } else {
        inside
    }
}
