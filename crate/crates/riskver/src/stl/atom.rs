//! Predicate atoms and their exact signed distances.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use super::StlError;

/// Scalar predicate function `h`: the atom is true where `h(x) >= 0`.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Norm used to define a ball-shaped predicate region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Linf,
}

/// Geometry (or function) backing a predicate.
#[derive(Clone)]
pub enum Shape {
    /// `a . x - b >= 0`.
    Halfspace { a: Vec<f64>, b: f64 },
    /// `lo <= x <= hi` componentwise.
    AxisBox { lo: Vec<f64>, hi: Vec<f64> },
    /// `||x - center|| <= radius` in the given norm.
    NormBall {
        center: Vec<f64>,
        radius: f64,
        norm: NormKind,
    },
    /// True where `h(x) >= 0`. Robustness is `h(x)` itself, which is only a
    /// lower bound on the set distance unless `h` happens to be one. The
    /// declared Lipschitz constant of `h` is needed when such an atom feeds a
    /// gap certificate.
    Functional {
        handle: String,
        func: ScalarFn,
        lipschitz: Option<f64>,
    },
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Halfspace { a, b } => f
                .debug_struct("Halfspace")
                .field("a", a)
                .field("b", b)
                .finish(),
            Shape::AxisBox { lo, hi } => f
                .debug_struct("AxisBox")
                .field("lo", lo)
                .field("hi", hi)
                .finish(),
            Shape::NormBall {
                center,
                radius,
                norm,
            } => f
                .debug_struct("NormBall")
                .field("center", center)
                .field("radius", radius)
                .field("norm", norm)
                .finish(),
            Shape::Functional {
                handle, lipschitz, ..
            } => f
                .debug_struct("Functional")
                .field("handle", handle)
                .field("lipschitz", lipschitz)
                .finish(),
        }
    }
}

impl PartialEq for Shape {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Shape::Halfspace { a, b }, Shape::Halfspace { a: a2, b: b2 }) => a == a2 && b == b2,
            (Shape::AxisBox { lo, hi }, Shape::AxisBox { lo: l2, hi: h2 }) => lo == l2 && hi == h2,
            (
                Shape::NormBall {
                    center,
                    radius,
                    norm,
                },
                Shape::NormBall {
                    center: c2,
                    radius: r2,
                    norm: n2,
                },
            ) => center == c2 && radius == r2 && norm == n2,
            // Functional atoms compare by registered handle.
            (Shape::Functional { handle, .. }, Shape::Functional { handle: h2, .. }) => {
                handle == h2
            }
            _ => false,
        }
    }
}

/// A named atomic predicate, possibly complemented.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateAtom {
    pub name: String,
    pub shape: Shape,
    /// When set, the atom denotes the complement region.
    pub negated: bool,
}

impl PredicateAtom {
    pub fn new(name: impl Into<String>, shape: Shape) -> Result<Self, StlError> {
        let name = name.into();
        match &shape {
            Shape::Halfspace { a, .. } => {
                if norm2(a) <= 0.0 {
                    return Err(StlError::InvalidPredicate {
                        name,
                        reason: "halfspace normal must be nonzero".into(),
                    });
                }
            }
            Shape::AxisBox { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(StlError::InvalidPredicate {
                        name,
                        reason: "box corners must have equal dimension".into(),
                    });
                }
                if lo.iter().zip(hi).any(|(l, h)| l > h) {
                    return Err(StlError::InvalidPredicate {
                        name,
                        reason: "box requires lo <= hi componentwise".into(),
                    });
                }
            }
            Shape::NormBall { radius, .. } => {
                if *radius < 0.0 {
                    return Err(StlError::InvalidPredicate {
                        name,
                        reason: "ball radius must be nonnegative".into(),
                    });
                }
            }
            Shape::Functional { .. } => {}
        }
        Ok(Self {
            name,
            shape,
            negated: false,
        })
    }

    pub fn halfspace(name: impl Into<String>, a: Vec<f64>, b: f64) -> Result<Self, StlError> {
        Self::new(name, Shape::Halfspace { a, b })
    }

    pub fn axis_box(name: impl Into<String>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, StlError> {
        Self::new(name, Shape::AxisBox { lo, hi })
    }

    pub fn norm_ball(
        name: impl Into<String>,
        center: Vec<f64>,
        radius: f64,
        norm: NormKind,
    ) -> Result<Self, StlError> {
        Self::new(
            name,
            Shape::NormBall {
                center,
                radius,
                norm,
            },
        )
    }

    pub fn functional(
        name: impl Into<String>,
        handle: impl Into<String>,
        func: ScalarFn,
        lipschitz: Option<f64>,
    ) -> Result<Self, StlError> {
        Self::new(
            name,
            Shape::Functional {
                handle: handle.into(),
                func,
                lipschitz,
            },
        )
    }

    /// Returns the atom denoting the complement region.
    pub fn complement(mut self) -> Self {
        self.negated = !self.negated;
        self
    }

    /// State dimension the atom constrains, if fixed by its geometry.
    pub fn dimension(&self) -> Option<usize> {
        match &self.shape {
            Shape::Halfspace { a, .. } => Some(a.len()),
            Shape::AxisBox { lo, .. } => Some(lo.len()),
            Shape::NormBall { center, .. } => Some(center.len()),
            Shape::Functional { .. } => None,
        }
    }

    /// Lipschitz constant of the atom's robustness in the Euclidean state
    /// norm. Exactly one for geometric shapes; functional atoms report their
    /// declared constant.
    pub fn lipschitz(&self) -> Option<f64> {
        match &self.shape {
            Shape::Functional { lipschitz, .. } => *lipschitz,
            _ => Some(1.0),
        }
    }

    fn check_dim(&self, state: &[f64]) -> Result<(), StlError> {
        if let Some(d) = self.dimension() {
            if d != state.len() {
                return Err(StlError::DimensionMismatch {
                    name: self.name.clone(),
                    expected: d,
                    got: state.len(),
                });
            }
        }
        Ok(())
    }

    /// Signed distance from `state` to the boundary of the atom's region:
    /// positive inside, negative outside, measured in the Euclidean state
    /// norm. Functional atoms return `h(state)` directly.
    pub fn signed_distance(&self, state: &[f64]) -> Result<f64, StlError> {
        self.check_dim(state)?;
        let d = match &self.shape {
            Shape::Halfspace { a, b } => (dot(a, state) - b) / norm2(a),
            Shape::AxisBox { lo, hi } => box_signed_distance(state, lo, hi),
            Shape::NormBall {
                center,
                radius,
                norm,
            } => match norm {
                NormKind::L2 => {
                    let dist: f64 = state
                        .iter()
                        .zip(center)
                        .map(|(x, c)| (x - c) * (x - c))
                        .sum::<f64>()
                        .sqrt();
                    radius - dist
                }
                NormKind::Linf => {
                    // An inf-norm ball is an axis box; use the exact Euclidean
                    // distance to that box.
                    let lo: Vec<f64> = center.iter().map(|c| c - radius).collect();
                    let hi: Vec<f64> = center.iter().map(|c| c + radius).collect();
                    box_signed_distance(state, &lo, &hi)
                }
            },
            Shape::Functional { func, .. } => func(state),
        };
        Ok(if self.negated { -d } else { d })
    }

    /// Exact set membership, used by the Boolean semantics. The base region
    /// is closed (`h >= 0`); its complement is open.
    pub fn member(&self, state: &[f64]) -> Result<bool, StlError> {
        self.check_dim(state)?;
        let inside = match &self.shape {
            Shape::Halfspace { a, b } => dot(a, state) >= *b,
            Shape::AxisBox { lo, hi } => state
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (l, h))| *l <= *x && *x <= *h),
            Shape::NormBall {
                center,
                radius,
                norm,
            } => {
                let dist = match norm {
                    NormKind::L2 => state
                        .iter()
                        .zip(center)
                        .map(|(x, c)| (x - c) * (x - c))
                        .sum::<f64>()
                        .sqrt(),
                    NormKind::Linf => state
                        .iter()
                        .zip(center)
                        .map(|(x, c)| (x - c).abs())
                        .fold(0.0, f64::max),
                };
                dist <= *radius
            }
            Shape::Functional { func, .. } => func(state) >= 0.0,
        };
        Ok(if self.negated { !inside } else { inside })
    }
}

/// Euclidean signed distance to the axis box `[lo, hi]`.
fn box_signed_distance(x: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let mut inside = true;
    let mut sq_out = 0.0; // squared distance when outside
    let mut min_in = f64::INFINITY; // margin to the nearest face when inside
    for i in 0..x.len() {
        let below = lo[i] - x[i];
        let above = x[i] - hi[i];
        let out = below.max(above);
        if out > 0.0 {
            inside = false;
            sq_out += out * out;
        } else {
            min_in = min_in.min(-out);
        }
    }
    if inside {
        min_in
    } else {
        -sq_out.sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Named scalar functions that a predicate table file may reference through
/// `{"shape": "functional", "handle": ...}`.
#[derive(Default, Clone)]
pub struct FunctionRegistry {
    funcs: BTreeMap<String, (ScalarFn, Option<f64>)>,
}

impl FunctionRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(
        &mut self,
        handle: impl Into<String>,
        lipschitz: Option<f64>,
        func: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) {
        self.funcs
            .insert(handle.into(), (Arc::new(func), lipschitz));
    }

    pub fn get(&self, handle: &str) -> Option<(ScalarFn, Option<f64>)> {
        self.funcs.get(handle).cloned()
    }
}

/// Mapping from predicate names to atoms, as loaded from a predicate table
/// file (see `schemas/predicate_table.schema.json`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredicateTable {
    map: BTreeMap<String, PredicateAtom>,
}

#[derive(Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
enum RawShape {
    Halfspace {
        a: Vec<f64>,
        b: f64,
        #[serde(default)]
        negated: bool,
    },
    AxisBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default)]
        negated: bool,
    },
    NormBall {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "default_norm")]
        norm: String,
        #[serde(default)]
        negated: bool,
    },
    Functional {
        handle: String,
        #[serde(default)]
        lipschitz: Option<f64>,
        #[serde(default)]
        negated: bool,
    },
}

fn default_norm() -> String {
    "l2".to_string()
}

impl PredicateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, atom: PredicateAtom) {
        self.map.insert(atom.name.clone(), atom);
    }

    pub fn get(&self, name: &str) -> Option<&PredicateAtom> {
        self.map.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    /// Parses a predicate table from its JSON file format. Functional atoms
    /// resolve their `handle` against `registry`.
    pub fn from_json_str(json: &str, registry: &FunctionRegistry) -> Result<Self, StlError> {
        let raw: BTreeMap<String, RawShape> =
            serde_json::from_str(json).map_err(|e| StlError::InvalidPredicate {
                name: "<table>".into(),
                reason: e.to_string(),
            })?;
        let mut table = Self::new();
        for (name, shape) in raw {
            let (atom, negated) = match shape {
                RawShape::Halfspace { a, b, negated } => {
                    (PredicateAtom::halfspace(name, a, b)?, negated)
                }
                RawShape::AxisBox { lo, hi, negated } => {
                    (PredicateAtom::axis_box(name, lo, hi)?, negated)
                }
                RawShape::NormBall {
                    center,
                    radius,
                    norm,
                    negated,
                } => {
                    let kind = match norm.as_str() {
                        "l2" => NormKind::L2,
                        "linf" => NormKind::Linf,
                        other => {
                            return Err(StlError::InvalidPredicate {
                                name,
                                reason: format!("unknown norm `{other}` (expected l2 or linf)"),
                            })
                        }
                    };
                    (
                        PredicateAtom::norm_ball(name, center, radius, kind)?,
                        negated,
                    )
                }
                RawShape::Functional {
                    handle,
                    lipschitz,
                    negated,
                } => {
                    let (func, registered_lip) =
                        registry
                            .get(&handle)
                            .ok_or_else(|| StlError::InvalidPredicate {
                                name: name.clone(),
                                reason: format!("functional handle `{handle}` is not registered"),
                            })?;
                    let lip = lipschitz.or(registered_lip);
                    (PredicateAtom::functional(name, handle, func, lip)?, negated)
                }
            };
            table.insert(if negated { atom.complement() } else { atom });
        }
        Ok(table)
    }
}
