//! Linear state-space model, loadable from a custom model file. Used both as
//! a generic "custom" system and as the test bed for the gap certificates.

use rand::Rng;
use serde::Deserialize;

use super::rng::Stream;
use super::{Perturbation, SimError, SystemModel, TrialData};

/// `x(t+1) = A x(t) + B u(t) + v(t)` with `v(t)` uniform over a box and the
/// state observed directly. Matches the `{"kind": "linear", ...}` model file.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub a: Vec<Vec<f64>>,
    /// Optional control matrix; omitted means the input is ignored.
    pub b: Option<Vec<Vec<f64>>>,
    pub noise_lo: Vec<f64>,
    pub noise_hi: Vec<f64>,
    pub init_lo: Vec<f64>,
    pub init_hi: Vec<f64>,
    pub dt: f64,
    pub perturbation: Perturbation,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearModelFile {
    kind: String,
    a: Vec<Vec<f64>>,
    #[serde(default)]
    b: Option<Vec<Vec<f64>>>,
    noise_lo: Vec<f64>,
    noise_hi: Vec<f64>,
    init_lo: Vec<f64>,
    init_hi: Vec<f64>,
    #[serde(default = "default_dt")]
    dt: f64,
}

fn default_dt() -> f64 {
    1.0
}

impl LinearModel {
    pub fn new(
        a: Vec<Vec<f64>>,
        b: Option<Vec<Vec<f64>>>,
        noise_lo: Vec<f64>,
        noise_hi: Vec<f64>,
        init_lo: Vec<f64>,
        init_hi: Vec<f64>,
        dt: f64,
        perturbation: Perturbation,
    ) -> Result<Self, SimError> {
        let n = a.len();
        if n == 0 || a.iter().any(|row| row.len() != n) {
            return Err(SimError::BadModel("A must be square and nonempty".into()));
        }
        if let Some(b) = &b {
            if b.len() != n {
                return Err(SimError::BadModel("B must have one row per state".into()));
            }
        }
        for (name, v) in [
            ("noise_lo", &noise_lo),
            ("noise_hi", &noise_hi),
            ("init_lo", &init_lo),
            ("init_hi", &init_hi),
        ] {
            if v.len() != n {
                return Err(SimError::BadModel(format!(
                    "{name} must have dimension {n}"
                )));
            }
        }
        if noise_lo.iter().zip(&noise_hi).any(|(l, h)| l > h)
            || init_lo.iter().zip(&init_hi).any(|(l, h)| l > h)
        {
            return Err(SimError::BadModel(
                "box bounds must satisfy lo <= hi".into(),
            ));
        }
        match &perturbation {
            Perturbation::None
            | Perturbation::ObservationOffset { .. }
            | Perturbation::ProcessNoiseScale { .. } => {}
            other => {
                return Err(SimError::UnsupportedPerturbation {
                    model: "linear",
                    perturbation: other.describe(),
                })
            }
        }
        Ok(Self {
            a,
            b,
            noise_lo,
            noise_hi,
            init_lo,
            init_hi,
            dt,
            perturbation,
        })
    }

    pub fn from_json_str(json: &str, perturbation: Perturbation) -> Result<Self, SimError> {
        let raw: LinearModelFile =
            serde_json::from_str(json).map_err(|e| SimError::BadModel(e.to_string()))?;
        if raw.kind != "linear" {
            return Err(SimError::BadModel(format!(
                "unsupported model kind `{}` (expected linear)",
                raw.kind
            )));
        }
        Self::new(
            raw.a,
            raw.b,
            raw.noise_lo,
            raw.noise_hi,
            raw.init_lo,
            raw.init_hi,
            raw.dt,
            perturbation,
        )
    }

    /// Contracting 2-d test system `x(t+1) = 0.5 x(t) + v(t)` with uniform
    /// noise `|v_i| <= halfwidth`.
    pub fn half_identity(halfwidth: f64, perturbation: Perturbation) -> Self {
        Self::new(
            vec![vec![0.5, 0.0], vec![0.0, 0.5]],
            None,
            vec![-halfwidth; 2],
            vec![halfwidth; 2],
            vec![-1.0; 2],
            vec![1.0; 2],
            1.0,
            perturbation,
        )
        .expect("half-identity model is valid")
    }
}

impl SystemModel for LinearModel {
    fn state_dim(&self) -> usize {
        self.a.len()
    }

    fn obs_dim(&self) -> usize {
        self.a.len()
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn init_state(&self, rng: &mut Stream) -> Vec<f64> {
        self.init_lo
            .iter()
            .zip(&self.init_hi)
            .map(|(lo, hi)| {
                if lo == hi {
                    *lo
                } else {
                    rng.gen_range(*lo..=*hi)
                }
            })
            .collect()
    }

    fn observe(
        &self,
        state: &[f64],
        _td: &TrialData,
        _rng: &mut Stream,
    ) -> Result<Vec<f64>, SimError> {
        let mut obs = state.to_vec();
        if let Perturbation::ObservationOffset { offset } = self.perturbation {
            for o in &mut obs {
                *o += offset;
            }
        }
        Ok(obs)
    }

    fn step(&self, state: &[f64], control: &[f64], rng: &mut Stream) -> Result<Vec<f64>, SimError> {
        let n = self.state_dim();
        let scale = match self.perturbation {
            Perturbation::ProcessNoiseScale { scale } => scale,
            _ => 1.0,
        };
        let mut next = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.a[i][j] * state[j];
            }
            if let Some(b) = &self.b {
                for (k, u) in control.iter().enumerate() {
                    if let Some(w) = b[i].get(k) {
                        acc += w * u;
                    }
                }
            }
            let (lo, hi) = (self.noise_lo[i], self.noise_hi[i]);
            // The draw is shared with a paired nominal rollout; the
            // perturbation only rescales it.
            let v = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
            next[i] = acc + scale * v;
        }
        Ok(next)
    }
}
