//! Underwater vehicle tracking a seafloor pipeline with side-scan sonar.
//!
//! The command-tracking dynamics (heading, speed, depth) are first-order lags
//! discretized exactly, standing in for an identified model of the real
//! plant; planar position follows from kinematics. The pipeline is the line
//! `y = 0` and the sonar reports the planar distance to it plus the heading,
//! both with additive Gaussian noise.

use rand_distr::{Distribution, Normal};

use super::rng::Stream;
use super::{Perturbation, SimError, SystemModel, TrialData};
use rand::Rng;

/// State layout `[x, y, theta, v, depth]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UuvState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub depth: f64,
}

impl UuvState {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.x, self.y, self.theta, self.v, self.depth]
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self {
            x: s[0],
            y: s[1],
            theta: s[2],
            v: s[3],
            depth: s[4],
        }
    }
}

/// Time constants of the command-tracking lags, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UuvParams {
    pub tau_theta: f64,
    pub tau_v: f64,
    pub tau_depth: f64,
}

impl Default for UuvParams {
    fn default() -> Self {
        Self {
            tau_theta: 1.5,
            tau_v: 2.0,
            tau_depth: 3.0,
        }
    }
}

/// One step of the lag + kinematics model. Position advances with the
/// current speed and heading; the lags then move heading, speed, and depth
/// toward their commands along the exact discrete exponential.
pub fn uuv_step(s: &UuvState, commands: (f64, f64, f64), dt: f64, p: &UuvParams) -> UuvState {
    let (heading_cmd, speed_cmd, depth_cmd) = commands;
    let lag = |value: f64, cmd: f64, tau: f64| cmd + (value - cmd) * (-dt / tau).exp();
    UuvState {
        x: s.x + s.v * s.theta.cos() * dt,
        y: s.y + s.v * s.theta.sin() * dt,
        theta: lag(s.theta, heading_cmd, p.tau_theta),
        v: lag(s.v, speed_cmd, p.tau_v),
        depth: lag(s.depth, depth_cmd, p.tau_depth),
    }
}

/// Sonar observation `[theta, d]` where `d = |y|` is the planar distance to
/// the pipeline, both with additive Gaussian noise.
pub fn sonar_observe(s: &UuvState, sigma_theta: f64, sigma_d: f64, rng: &mut Stream) -> Vec<f64> {
    let draw = |sigma: f64, rng: &mut Stream| {
        if sigma > 0.0 {
            Normal::new(0.0, sigma)
                .expect("sigma is nonnegative")
                .sample(rng)
        } else {
            0.0
        }
    };
    let theta = s.theta + draw(sigma_theta, rng);
    let d = s.y.abs() + draw(sigma_d, rng);
    vec![theta, d]
}

/// The pipeline-tracking case study. Controllers output a heading command;
/// speed and depth commands are held constant.
#[derive(Debug, Clone)]
pub struct UuvModel {
    pub params: UuvParams,
    pub dt: f64,
    pub sigma_theta: f64,
    pub sigma_d: f64,
    pub speed_cmd: f64,
    pub depth_cmd: f64,
    pub init_y: (f64, f64),
    pub init_theta: (f64, f64),
    pub perturbation: Perturbation,
}

impl UuvModel {
    pub fn new(perturbation: Perturbation) -> Result<Self, SimError> {
        match &perturbation {
            Perturbation::None
            | Perturbation::ObservationOffset { .. }
            | Perturbation::LagError { .. } => {}
            other => {
                return Err(SimError::UnsupportedPerturbation {
                    model: "uuv",
                    perturbation: other.describe(),
                })
            }
        }
        Ok(Self {
            params: UuvParams::default(),
            dt: 0.5,
            sigma_theta: 0.01,
            sigma_d: 0.25,
            speed_cmd: 2.0,
            depth_cmd: 10.0,
            init_y: (22.0, 38.0),
            init_theta: (-0.1, 0.1),
            perturbation,
        })
    }

    pub fn nominal() -> Self {
        Self::new(Perturbation::None).expect("none is always supported")
    }

    fn effective_params(&self) -> UuvParams {
        match self.perturbation {
            Perturbation::LagError { factor, .. } => UuvParams {
                tau_theta: self.params.tau_theta * factor,
                tau_v: self.params.tau_v * factor,
                tau_depth: self.params.tau_depth * factor,
            },
            _ => self.params,
        }
    }
}

impl SystemModel for UuvModel {
    fn state_dim(&self) -> usize {
        5
    }

    fn obs_dim(&self) -> usize {
        2
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn init_state(&self, rng: &mut Stream) -> Vec<f64> {
        let y = rng.gen_range(self.init_y.0..=self.init_y.1);
        let theta = rng.gen_range(self.init_theta.0..=self.init_theta.1);
        UuvState {
            x: 0.0,
            y,
            theta,
            v: self.speed_cmd,
            depth: self.depth_cmd,
        }
        .to_vec()
    }

    fn observe(
        &self,
        state: &[f64],
        _td: &TrialData,
        rng: &mut Stream,
    ) -> Result<Vec<f64>, SimError> {
        let s = UuvState::from_slice(state);
        let mut obs = sonar_observe(&s, self.sigma_theta, self.sigma_d, rng);
        if let Perturbation::ObservationOffset { offset } = self.perturbation {
            for o in &mut obs {
                *o += offset;
            }
        }
        Ok(obs)
    }

    fn step(&self, state: &[f64], control: &[f64], rng: &mut Stream) -> Result<Vec<f64>, SimError> {
        if control.is_empty() {
            return Err(SimError::DimensionMismatch {
                what: "heading command",
                expected: 1,
                got: 0,
            });
        }
        let s = UuvState::from_slice(state);
        let cmds = (control[0], self.speed_cmd, self.depth_cmd);
        let mut next = uuv_step(&s, cmds, self.dt, &self.effective_params());
        if let Perturbation::LagError { noise_sigma, .. } = self.perturbation {
            if noise_sigma > 0.0 {
                let normal = Normal::new(0.0, noise_sigma).expect("sigma nonnegative");
                next.theta += normal.sample(rng);
                next.v += normal.sample(rng);
                next.depth += normal.sample(rng);
            }
        }
        Ok(next.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{stream, Channel};

    #[test]
    fn equilibrium_advances_position_only() {
        let s = UuvState {
            x: 0.0,
            y: 30.0,
            theta: 0.0,
            v: 2.0,
            depth: 10.0,
        };
        let p = UuvParams::default();
        let next = uuv_step(&s, (0.0, 2.0, 10.0), 0.5, &p);
        assert_eq!(next.theta, 0.0);
        assert_eq!(next.v, 2.0);
        assert_eq!(next.depth, 10.0);
        assert!((next.x - 1.0).abs() < 1e-15);
        assert_eq!(next.y, 30.0);
    }

    #[test]
    fn step_response_matches_discrete_exponential() {
        let p = UuvParams::default();
        let dt = 0.5;
        let mut s = UuvState {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
            v: 0.0,
            depth: 0.0,
        };
        let cmd = (0.4, 2.0, 10.0);
        for k in 1..=60 {
            s = uuv_step(&s, cmd, dt, &p);
            let t = k as f64 * dt;
            let expect_theta = 0.4 * (1.0 - (-t / p.tau_theta).exp());
            let expect_v = 2.0 * (1.0 - (-t / p.tau_v).exp());
            let expect_d = 10.0 * (1.0 - (-t / p.tau_depth).exp());
            assert!((s.theta - expect_theta).abs() < 1e-9, "theta at step {k}");
            assert!((s.v - expect_v).abs() < 1e-9, "v at step {k}");
            assert!((s.depth - expect_d).abs() < 1e-9, "depth at step {k}");
        }
    }

    #[test]
    fn zero_speed_freezes_position() {
        let s = UuvState {
            x: 3.0,
            y: 4.0,
            theta: 0.7,
            v: 0.0,
            depth: 5.0,
        };
        let next = uuv_step(&s, (0.7, 0.0, 5.0), 0.5, &UuvParams::default());
        assert_eq!(next.x, 3.0);
        assert_eq!(next.y, 4.0);
    }

    #[test]
    fn noise_free_sonar_reads_distance() {
        let mut rng = stream(0, 0, Channel::Measurement);
        let on_pipe = UuvState {
            x: 0.0,
            y: 0.0,
            theta: 0.1,
            v: 2.0,
            depth: 10.0,
        };
        assert_eq!(sonar_observe(&on_pipe, 0.0, 0.0, &mut rng), vec![0.1, 0.0]);
        let off = UuvState { y: 30.0, ..on_pipe };
        assert_eq!(sonar_observe(&off, 0.0, 0.0, &mut rng), vec![0.1, 30.0]);
    }

    #[test]
    fn sonar_noise_statistics() {
        let mut rng = stream(2024, 0, Channel::Measurement);
        let s = UuvState {
            x: 0.0,
            y: 30.0,
            theta: 0.0,
            v: 2.0,
            depth: 10.0,
        };
        let sigma = 0.5;
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let obs = sonar_observe(&s, 0.0, sigma, &mut rng);
            let e = obs[1] - 30.0;
            sum += e;
            sum_sq += e * e;
        }
        let mean = sum / n as f64;
        let sd = (sum_sq / n as f64 - mean * mean).sqrt();
        let se_mean = sigma / (n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se_mean, "mean {mean} vs se {se_mean}");
        // Standard error of the sample sd is roughly sigma / sqrt(2n).
        let se_sd = sigma / (2.0 * n as f64).sqrt();
        assert!((sd - sigma).abs() < 3.0 * se_sd, "sd {sd}");
    }
}
