//! Formula syntax tree, normal form, and formula length.

use std::fmt;

use super::atom::PredicateAtom;
use super::StlError;

/// Discrete-time interval attached to a temporal operator, in steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    lo: usize,
    hi: Option<usize>,
}

impl Interval {
    pub fn bounded(lo: usize, hi: usize) -> Result<Self, StlError> {
        if lo > hi {
            return Err(StlError::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi: Some(hi) })
    }

    pub fn unbounded(lo: usize) -> Self {
        Self { lo, hi: None }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    /// Upper endpoint in steps; `None` means unbounded.
    pub fn hi(&self) -> Option<usize> {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_some()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) => write!(f, "[{},{}]", self.lo, hi),
            None => write!(f, "[{},inf]", self.lo),
        }
    }
}

/// STL formula over named predicates with discrete-time intervals.
///
/// `False` is the dual of `True`; it is not part of the file grammar but is
/// needed so that every formula has a positive normal form.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Pred(PredicateAtom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Globally(Interval, Box<Formula>),
}

impl Formula {
    pub fn pred(atom: PredicateAtom) -> Self {
        Formula::Pred(atom)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn until(i: Interval, a: Formula, b: Formula) -> Self {
        Formula::Until(i, Box::new(a), Box::new(b))
    }

    pub fn eventually(i: Interval, f: Formula) -> Self {
        Formula::Eventually(i, Box::new(f))
    }

    pub fn globally(i: Interval, f: Formula) -> Self {
        Formula::Globally(i, Box::new(f))
    }

    /// A formula is bounded iff every temporal interval in it is bounded.
    pub fn is_bounded(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Pred(_) => true,
            Formula::Not(f) => f.is_bounded(),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_bounded() && b.is_bounded(),
            Formula::Until(i, a, b) => i.is_bounded() && a.is_bounded() && b.is_bounded(),
            Formula::Eventually(i, f) | Formula::Globally(i, f) => i.is_bounded() && f.is_bounded(),
        }
    }

    /// Formula length: the number of extra trace steps beyond `t` needed to
    /// decide the formula at time `t`. Only defined for bounded formulas.
    pub fn length(&self) -> Result<usize, StlError> {
        match self {
            Formula::True | Formula::False | Formula::Pred(_) => Ok(0),
            Formula::Not(f) => f.length(),
            Formula::And(a, b) | Formula::Or(a, b) => Ok(a.length()?.max(b.length()?)),
            Formula::Until(i, a, b) => {
                let hi = i.hi().ok_or(StlError::UnboundedFormula)?;
                Ok(hi + a.length()?.max(b.length()?))
            }
            // F_I p = T U_I p and G_I p = !F_I !p, so both inherit the Until
            // length max(I) + L^p.
            Formula::Eventually(i, f) | Formula::Globally(i, f) => {
                let hi = i.hi().ok_or(StlError::UnboundedFormula)?;
                Ok(hi + f.length()?)
            }
        }
    }

    /// Rewrites the formula into positive normal form: negations survive only
    /// absorbed into [`PredicateAtom::negated`]. Both the Boolean and the
    /// quantitative semantics are preserved exactly.
    ///
    /// A negated unbounded Until has no dual in this syntax, and the file
    /// grammar cannot produce one; constructing one programmatically and
    /// negating it is reported as an error.
    pub fn to_pnf(&self) -> Result<Formula, StlError> {
        match self {
            Formula::True => Ok(Formula::True),
            Formula::False => Ok(Formula::False),
            Formula::Pred(a) => Ok(Formula::Pred(a.clone())),
            Formula::Not(f) => f.negate_pnf(),
            Formula::And(a, b) => Ok(Formula::and(a.to_pnf()?, b.to_pnf()?)),
            Formula::Or(a, b) => Ok(Formula::or(a.to_pnf()?, b.to_pnf()?)),
            Formula::Until(i, a, b) => Ok(Formula::until(*i, a.to_pnf()?, b.to_pnf()?)),
            Formula::Eventually(i, f) => Ok(Formula::eventually(*i, f.to_pnf()?)),
            Formula::Globally(i, f) => Ok(Formula::globally(*i, f.to_pnf()?)),
        }
    }

    /// Positive normal form of the negation of `self`.
    fn negate_pnf(&self) -> Result<Formula, StlError> {
        match self {
            Formula::True => Ok(Formula::False),
            Formula::False => Ok(Formula::True),
            Formula::Pred(a) => Ok(Formula::Pred(a.clone().complement())),
            Formula::Not(f) => f.to_pnf(),
            Formula::And(a, b) => Ok(Formula::or(a.negate_pnf()?, b.negate_pnf()?)),
            Formula::Or(a, b) => Ok(Formula::and(a.negate_pnf()?, b.negate_pnf()?)),
            Formula::Eventually(i, f) => Ok(Formula::globally(*i, f.negate_pnf()?)),
            Formula::Globally(i, f) => Ok(Formula::eventually(*i, f.negate_pnf()?)),
            Formula::Until(i, a, b) => {
                let hi = i.hi().ok_or(StlError::UnboundedUntilNegation)?;
                let not_a = a.negate_pnf()?;
                let not_b = b.negate_pnf()?;
                // not (a U_[lo,hi] b) at t holds iff for every witness offset
                // k in [lo,hi], either b fails at t+k or a already failed
                // strictly between t and t+k. A singleton G picks out the
                // offset t+k with the right behavior at a clipped horizon: a
                // witness the sup never ranged over must drop out of the
                // conjunction as true. The min/max trees match the Until dual
                // exactly, so the quantitative semantics are preserved too.
                let mut conjuncts = (i.lo()..=hi).map(|k| {
                    let miss = Formula::globally(
                        Interval::bounded(k, k).expect("singleton interval"),
                        not_b.clone(),
                    );
                    if k >= 2 {
                        let broke = Formula::eventually(
                            Interval::bounded(1, k - 1).expect("k >= 2"),
                            not_a.clone(),
                        );
                        Formula::or(miss, broke)
                    } else {
                        miss
                    }
                });
                let first = conjuncts.next().expect("interval is nonempty");
                Ok(conjuncts.fold(first, Formula::and))
            }
        }
    }

    /// Largest declared Lipschitz constant among the formula's predicates
    /// (geometric atoms count as one). Needed to scale a trajectory-error
    /// bound into a robustness-error bound. Errors if a functional atom has
    /// no declared constant.
    pub fn max_predicate_lipschitz(&self) -> Result<f64, StlError> {
        match self {
            Formula::True | Formula::False => Ok(1.0),
            Formula::Pred(a) => a.lipschitz().ok_or_else(|| StlError::InvalidPredicate {
                name: a.name.clone(),
                reason: "functional atom needs a declared Lipschitz constant for gap bounds".into(),
            }),
            Formula::Not(f) => f.max_predicate_lipschitz(),
            Formula::And(a, b) | Formula::Or(a, b) => Ok(a
                .max_predicate_lipschitz()?
                .max(b.max_predicate_lipschitz()?)),
            Formula::Until(_, a, b) => Ok(a
                .max_predicate_lipschitz()?
                .max(b.max_predicate_lipschitz()?)),
            Formula::Eventually(_, f) | Formula::Globally(_, f) => f.max_predicate_lipschitz(),
        }
    }

    /// Precedence level for printing: `|` 0, `&` 1, `U` 2, prefix ops 3,
    /// atoms 4.
    fn level(&self) -> u8 {
        match self {
            Formula::Or(..) => 0,
            Formula::And(..) => 1,
            Formula::Until(..) => 2,
            Formula::Not(_) | Formula::Eventually(..) | Formula::Globally(..) | Formula::False => 3,
            Formula::True | Formula::Pred(_) => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        let needs_parens = self.level() < min_level;
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            Formula::True => write!(f, "T")?,
            Formula::False => write!(f, "!T")?,
            Formula::Pred(a) => {
                if a.negated {
                    write!(f, "!{}", a.name)?;
                } else {
                    write!(f, "{}", a.name)?;
                }
            }
            Formula::Not(x) => {
                write!(f, "!")?;
                x.fmt_at(f, 3)?;
            }
            Formula::And(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, " & ")?;
                b.fmt_at(f, 2)?;
            }
            Formula::Or(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " | ")?;
                b.fmt_at(f, 1)?;
            }
            Formula::Until(i, a, b) => {
                a.fmt_at(f, 3)?;
                write!(f, " U{} ", i)?;
                // Right-associative: a further Until may appear unparenthesized.
                b.fmt_at(f, 2)?;
            }
            Formula::Eventually(i, x) => {
                if i.is_bounded() {
                    write!(f, "F{}", i)?;
                } else if i.lo() == 0 {
                    write!(f, "F")?;
                } else {
                    write!(f, "F{}", i)?;
                }
                write!(f, " ")?;
                x.fmt_at(f, 3)?;
            }
            Formula::Globally(i, x) => {
                if i.is_bounded() || i.lo() > 0 {
                    write!(f, "G{}", i)?;
                } else {
                    write!(f, "G")?;
                }
                write!(f, " ")?;
                x.fmt_at(f, 3)?;
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// A negated predicate atom prints as `!name`; `Pred` with the `negated` flag
/// set and `Not(Pred)` are therefore printed identically. The parser resolves
/// `!name` to `Not(Pred(name))`, so round-tripping is up to that encoding.
#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::atom::PredicateAtom;

    fn p(name: &str) -> Formula {
        Formula::pred(PredicateAtom::halfspace(name, vec![1.0], 0.0).unwrap())
    }

    #[test]
    fn lengths_follow_the_recursion() {
        let a = p("A");
        let b = p("B");
        // G[0,3] A
        let g = Formula::globally(Interval::bounded(0, 3).unwrap(), a.clone());
        assert_eq!(g.length().unwrap(), 3);
        // bare predicate
        assert_eq!(a.length().unwrap(), 0);
        // F[1,2](A & F[0,1] B) -> 2 + max(0, 1) = 3
        let inner = Formula::and(
            a.clone(),
            Formula::eventually(Interval::bounded(0, 1).unwrap(), b.clone()),
        );
        let f = Formula::eventually(Interval::bounded(1, 2).unwrap(), inner);
        assert_eq!(f.length().unwrap(), 3);
        // Conjunction length dominates both sides.
        let both = Formula::and(g.clone(), f.clone());
        assert!(both.length().unwrap() >= g.length().unwrap().max(f.length().unwrap()));
    }

    #[test]
    fn unbounded_formula_has_no_length() {
        let g = Formula::globally(Interval::unbounded(0), p("A"));
        assert!(matches!(g.length(), Err(StlError::UnboundedFormula)));
        assert!(!g.is_bounded());
    }

    #[test]
    fn pnf_absorbs_negations() {
        fn no_nots(f: &Formula) -> bool {
            match f {
                Formula::Not(_) => false,
                Formula::True | Formula::False | Formula::Pred(_) => true,
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                    no_nots(a) && no_nots(b)
                }
                Formula::Eventually(_, x) | Formula::Globally(_, x) => no_nots(x),
            }
        }

        let i = Interval::bounded(0, 3).unwrap();
        let cases = vec![
            Formula::not(Formula::and(p("A"), p("B"))),
            Formula::not(Formula::globally(i, p("A"))),
            Formula::not(Formula::until(i, p("A"), p("B"))),
            Formula::not(Formula::not(Formula::not(p("A")))),
            Formula::not(Formula::True),
            Formula::not(Formula::or(
                Formula::eventually(i, Formula::not(p("A"))),
                Formula::until(i, Formula::not(p("B")), p("A")),
            )),
        ];
        for f in cases {
            let pnf = f.to_pnf().unwrap();
            assert!(no_nots(&pnf), "{f} -> {pnf} still has a negation");
        }
    }

    #[test]
    fn demorgan_and_duality() {
        let f = Formula::not(Formula::and(p("A"), p("B")));
        match f.to_pnf().unwrap() {
            Formula::Or(a, b) => {
                assert!(matches!(*a, Formula::Pred(ref q) if q.negated));
                assert!(matches!(*b, Formula::Pred(ref q) if q.negated));
            }
            other => panic!("expected disjunction, got {other}"),
        }
        let g = Formula::not(Formula::globally(Interval::bounded(0, 3).unwrap(), p("A")));
        match g.to_pnf().unwrap() {
            Formula::Eventually(i, x) => {
                assert_eq!(i, Interval::bounded(0, 3).unwrap());
                assert!(matches!(*x, Formula::Pred(ref q) if q.negated));
            }
            other => panic!("expected eventually, got {other}"),
        }
    }

    #[test]
    fn negated_unbounded_until_is_rejected() {
        let f = Formula::not(Formula::until(Interval::unbounded(0), p("A"), p("B")));
        assert!(matches!(f.to_pnf(), Err(StlError::UnboundedUntilNegation)));
    }

    #[test]
    fn printing_uses_grammar_precedence() {
        let i = Interval::bounded(0, 3).unwrap();
        let f = Formula::and(
            Formula::globally(i, Formula::not(Formula::and(p("C"), p("D")))),
            Formula::eventually(
                Interval::bounded(1, 2).unwrap(),
                Formula::and(
                    p("A"),
                    Formula::eventually(Interval::bounded(0, 1).unwrap(), p("B")),
                ),
            ),
        );
        assert_eq!(f.to_string(), "G[0,3] !(C & D) & F[1,2] (A & F[0,1] B)");
    }
}
