//! Kinematic bicycle in an L-shaped hallway with a simulated range scanner.

use rand::Rng;

use super::rng::Stream;
use super::{Perturbation, SimError, SystemModel, TrialData};

/// Car state: planar position, forward speed, heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicycleState {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub theta: f64,
}

impl BicycleState {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.x, self.y, self.v, self.theta]
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self {
            x: s[0],
            y: s[1],
            v: s[2],
            theta: s[3],
        }
    }
}

/// Keeps an angle in (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut w = a % two_pi;
    if w <= -std::f64::consts::PI {
        w += two_pi;
    } else if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedMode {
    /// Speed never changes.
    Constant,
    /// First-order tracking of a commanded speed with time constant `tau`.
    Commanded { target: f64, tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicycleParams {
    pub wheelbase: f64,
    /// Steering angle clamp in radians.
    pub max_steer: f64,
    pub speed: SpeedMode,
}

impl Default for BicycleParams {
    fn default() -> Self {
        Self {
            wheelbase: 0.32,
            max_steer: std::f64::consts::FRAC_PI_6,
            speed: SpeedMode::Constant,
        }
    }
}

/// Forward-Euler kinematic bicycle step. `steering` is the front-wheel angle
/// in radians, clamped to the configured maximum.
pub fn bicycle_step(s: &BicycleState, steering: f64, dt: f64, p: &BicycleParams) -> BicycleState {
    let delta = steering.clamp(-p.max_steer, p.max_steer);
    let x = s.x + s.v * s.theta.cos() * dt;
    let y = s.y + s.v * s.theta.sin() * dt;
    let theta = wrap_angle(s.theta + s.v / p.wheelbase * delta.tan() * dt);
    let v = match p.speed {
        SpeedMode::Constant => s.v,
        SpeedMode::Commanded { target, tau } => target + (s.v - target) * (-dt / tau).exp(),
    };
    BicycleState { x, y, v, theta }
}

/// A wall segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

/// Hallway walls: a closed polygon whose edges are the wall segments. The
/// interior is the drivable region.
#[derive(Debug, Clone, PartialEq)]
pub struct HallwayMap {
    vertices: Vec<(f64, f64)>,
    segments: Vec<Segment>,
}

impl HallwayMap {
    /// Builds a map from polygon vertices listed in order; the closing edge
    /// back to the first vertex is implicit.
    pub fn from_polygon(vertices: Vec<(f64, f64)>) -> Result<Self, SimError> {
        if vertices.len() < 3 {
            return Err(SimError::BadModel(
                "map polygon needs at least three vertices".into(),
            ));
        }
        let mut segments = Vec::with_capacity(vertices.len());
        for i in 0..vertices.len() {
            let (x1, y1) = vertices[i];
            let (x2, y2) = vertices[(i + 1) % vertices.len()];
            segments.push(Segment { x1, y1, x2, y2 });
        }
        Ok(Self { vertices, segments })
    }

    /// Parses the map file format: one `x1,y1,x2,y2` wall segment per line
    /// (`#` comments allowed). Segments must chain into a closed loop.
    pub fn from_csv(text: &str) -> Result<Self, SimError> {
        let mut vertices = Vec::new();
        let mut expected_next: Option<(f64, f64)> = None;
        let mut first: Option<(f64, f64)> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums: Result<Vec<f64>, _> =
                line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            let nums =
                nums.map_err(|e| SimError::BadModel(format!("map line {}: {e}", lineno + 1)))?;
            if nums.len() != 4 {
                return Err(SimError::BadModel(format!(
                    "map line {}: expected x1,y1,x2,y2",
                    lineno + 1
                )));
            }
            let a = (nums[0], nums[1]);
            let b = (nums[2], nums[3]);
            if let Some(exp) = expected_next {
                if (exp.0 - a.0).abs() > 1e-9 || (exp.1 - a.1).abs() > 1e-9 {
                    return Err(SimError::BadModel(format!(
                        "map line {}: segment does not chain from previous endpoint",
                        lineno + 1
                    )));
                }
            } else {
                first = Some(a);
            }
            vertices.push(a);
            expected_next = Some(b);
        }
        match (first, expected_next) {
            (Some(f), Some(last)) if (f.0 - last.0).abs() < 1e-9 && (f.1 - last.1).abs() < 1e-9 => {
                Self::from_polygon(vertices)
            }
            _ => Err(SimError::BadModel(
                "map segments must close into a loop".into(),
            )),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for s in &self.segments {
            out.push_str(&format!("{:?},{:?},{:?},{:?}\n", s.x1, s.y1, s.x2, s.y2));
        }
        out
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        // Even-odd rule with a horizontal ray toward +x.
        let mut inside = false;
        let n = self.vertices.len();
        let mut j = n - 1;
        for i in 0..n {
            let (xi, yi) = self.vertices[i];
            let (xj, yj) = self.vertices[j];
            if (yi > y) != (yj > y) {
                let x_cross = (xj - xi) * (y - yi) / (yj - yi) + xi;
                if x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Signed distance to the walls: positive inside the hallway, negative
    /// outside, zero on a wall.
    pub fn wall_distance(&self, x: f64, y: f64) -> f64 {
        let mut min = f64::INFINITY;
        for s in &self.segments {
            min = min.min(point_segment_distance(x, y, s));
        }
        if self.contains(x, y) {
            min
        } else {
            -min
        }
    }
}

fn point_segment_distance(x: f64, y: f64, s: &Segment) -> f64 {
    let (dx, dy) = (s.x2 - s.x1, s.y2 - s.y1);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq > 0.0 {
        (((x - s.x1) * dx + (y - s.y1) * dy) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (px, py) = (s.x1 + t * dx, s.y1 + t * dy);
    ((x - px).powi(2) + (y - py).powi(2)).sqrt()
}

/// The default desk-scale course: a 10 m straight corridor of width 1.5 m,
/// one 90-degree right turn, and a 10 m exit leg.
pub fn default_hallway() -> HallwayMap {
    HallwayMap::from_polygon(vec![
        (0.0, 0.0),
        (8.5, 0.0),
        (8.5, -10.0),
        (10.0, -10.0),
        (10.0, 1.5),
        (0.0, 1.5),
    ])
    .expect("default hallway is a valid polygon")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LidarConfig {
    pub rays: usize,
    /// Full field of view in radians, symmetric about the heading.
    pub fov: f64,
    pub max_range: f64,
    /// Halfwidth of the uniform per-ray range noise.
    pub noise_halfwidth: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            rays: 21,
            fov: std::f64::consts::PI,
            max_range: 10.0,
            noise_halfwidth: 0.05,
        }
    }
}

/// Casts `cfg.rays` rays from the pose against the walls. Each ray returns
/// the nearest intersection distance clipped to `max_range`, plus uniform
/// noise; rays listed in `dropped` read exactly `max_range` (their noise
/// draw is still consumed so paired rollouts stay aligned).
pub fn lidar_scan(
    x: f64,
    y: f64,
    theta: f64,
    map: &HallwayMap,
    cfg: &LidarConfig,
    dropped: &[usize],
    rng: &mut Stream,
) -> Result<Vec<f64>, SimError> {
    scan_internal(x, y, theta, map, cfg, dropped, &Perturbation::None, rng)
}

pub(super) fn scan_internal(
    x: f64,
    y: f64,
    theta: f64,
    map: &HallwayMap,
    cfg: &LidarConfig,
    dropped: &[usize],
    perturbation: &Perturbation,
    rng: &mut Stream,
) -> Result<Vec<f64>, SimError> {
    if cfg.rays == 0 || !(cfg.max_range > 0.0) {
        return Err(SimError::BadModel(format!(
            "scanner needs at least one ray and a positive max range, got {} rays / {}",
            cfg.rays, cfg.max_range
        )));
    }
    if !map.contains(x, y) {
        return Err(SimError::OutsideMap { x, y });
    }
    let mut out = Vec::with_capacity(cfg.rays);
    for i in 0..cfg.rays {
        let frac = if cfg.rays > 1 {
            i as f64 / (cfg.rays - 1) as f64 - 0.5
        } else {
            0.0
        };
        let angle = theta + frac * cfg.fov;
        let r = raycast(x, y, angle, map).min(cfg.max_range);
        // The noise draw happens unconditionally: dropped or perturbed scans
        // must consume the measurement stream exactly like the nominal one.
        let u = if cfg.noise_halfwidth > 0.0 {
            rng.gen_range(-cfg.noise_halfwidth..=cfg.noise_halfwidth)
        } else {
            0.0
        };
        let reading = if dropped.contains(&i) {
            cfg.max_range
        } else {
            match perturbation {
                Perturbation::StructuredLidar {
                    bias, noise_scale, ..
                } => r + bias + u * noise_scale * (1.0 + r / cfg.max_range),
                Perturbation::ObservationOffset { offset } => r + u + offset,
                _ => r + u,
            }
        };
        out.push(reading);
    }
    Ok(out)
}

/// Distance along the ray from (x, y) in direction `angle` to the nearest
/// wall, or infinity when nothing is hit.
fn raycast(x: f64, y: f64, angle: f64, map: &HallwayMap) -> f64 {
    let (dx, dy) = (angle.cos(), angle.sin());
    let mut best = f64::INFINITY;
    for s in map.segments() {
        let (ex, ey) = (s.x2 - s.x1, s.y2 - s.y1);
        let denom = dx * ey - dy * ex;
        if denom.abs() < 1e-12 {
            continue; // parallel
        }
        let (rx, ry) = (s.x1 - x, s.y1 - y);
        let t = (rx * ey - ry * ex) / denom;
        let u = (rx * dy - ry * dx) / denom;
        if t >= 0.0 && (0.0..=1.0).contains(&u) {
            best = best.min(t);
        }
    }
    best
}

/// The hallway case study: kinematic bicycle, range scanner, steering
/// commands on a [-15, 15] scale. State layout `[x, y, v, theta]`.
#[derive(Debug, Clone)]
pub struct F110Model {
    pub map: HallwayMap,
    pub lidar: LidarConfig,
    pub params: BicycleParams,
    pub dt: f64,
    pub speed: f64,
    /// Initial-state box: `x`, `y`, `theta` ranges.
    pub init_x: (f64, f64),
    pub init_y: (f64, f64),
    pub init_theta: (f64, f64),
    pub perturbation: Perturbation,
}

impl F110Model {
    pub fn new(perturbation: Perturbation) -> Result<Self, SimError> {
        match &perturbation {
            Perturbation::None
            | Perturbation::DroppedRays { .. }
            | Perturbation::StructuredLidar { .. }
            | Perturbation::ObservationOffset { .. } => {}
            other => {
                return Err(SimError::UnsupportedPerturbation {
                    model: "f110",
                    perturbation: other.describe(),
                })
            }
        }
        Ok(Self {
            map: default_hallway(),
            lidar: LidarConfig::default(),
            params: BicycleParams::default(),
            dt: 0.1,
            speed: 1.0,
            init_x: (0.4, 0.8),
            init_y: (0.55, 0.95),
            init_theta: (-0.05, 0.05),
            perturbation,
        })
    }

    pub fn nominal() -> Self {
        Self::new(Perturbation::None).expect("none is always supported")
    }

    fn drop_count(&self) -> usize {
        match self.perturbation {
            Perturbation::DroppedRays { count } => count,
            Perturbation::StructuredLidar { drop_count, .. } => drop_count,
            _ => 0,
        }
    }

    /// Steering command (controller scale, [-15, 15]) to wheel angle.
    fn steer_angle(&self, command: f64) -> f64 {
        (command.clamp(-15.0, 15.0) / 15.0) * self.params.max_steer
    }
}

impl SystemModel for F110Model {
    fn state_dim(&self) -> usize {
        4
    }

    fn obs_dim(&self) -> usize {
        self.lidar.rays
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn init_state(&self, rng: &mut Stream) -> Vec<f64> {
        let x = rng.gen_range(self.init_x.0..=self.init_x.1);
        let y = rng.gen_range(self.init_y.0..=self.init_y.1);
        let theta = rng.gen_range(self.init_theta.0..=self.init_theta.1);
        vec![x, y, self.speed, theta]
    }

    fn trial_setup(&self, rng: &mut Stream) -> TrialData {
        let k = self.drop_count().min(self.lidar.rays);
        let dropped = rand::seq::index::sample(rng, self.lidar.rays, k).into_vec();
        TrialData {
            dropped_rays: dropped,
        }
    }

    fn observe(
        &self,
        state: &[f64],
        td: &TrialData,
        rng: &mut Stream,
    ) -> Result<Vec<f64>, SimError> {
        let s = BicycleState::from_slice(state);
        scan_internal(
            s.x,
            s.y,
            s.theta,
            &self.map,
            &self.lidar,
            &td.dropped_rays,
            &self.perturbation,
            rng,
        )
    }

    fn step(
        &self,
        state: &[f64],
        control: &[f64],
        _rng: &mut Stream,
    ) -> Result<Vec<f64>, SimError> {
        if control.is_empty() {
            return Err(SimError::DimensionMismatch {
                what: "steering command",
                expected: 1,
                got: 0,
            });
        }
        let s = BicycleState::from_slice(state);
        let next = bicycle_step(&s, self.steer_angle(control[0]), self.dt, &self.params);
        Ok(next.to_vec())
    }

    fn crashed(&self, state: &[f64]) -> bool {
        self.map.wall_distance(state[0], state[1]) <= 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{stream, Channel};

    #[test]
    fn straight_line_advance() {
        let s = BicycleState {
            x: 0.0,
            y: 0.0,
            v: 1.0,
            theta: 0.0,
        };
        let p = BicycleParams::default();
        let next = bicycle_step(&s, 0.0, 0.1, &p);
        assert!((next.x - 0.1).abs() < 1e-15);
        assert_eq!(next.y, 0.0);
        assert_eq!(next.theta, 0.0);
        assert_eq!(next.v, 1.0);
    }

    #[test]
    fn steering_is_mirror_symmetric() {
        let s = BicycleState {
            x: 0.0,
            y: 0.0,
            v: 1.0,
            theta: 0.0,
        };
        let p = BicycleParams::default();
        let mut left = s;
        let mut right = s;
        for _ in 0..50 {
            left = bicycle_step(&left, 0.2, 0.1, &p);
            right = bicycle_step(&right, -0.2, 0.1, &p);
        }
        assert!((left.x - right.x).abs() < 1e-12);
        assert!((left.y + right.y).abs() < 1e-12);
        assert!((left.theta + right.theta).abs() < 1e-12);
    }

    #[test]
    fn full_lock_turning_radius() {
        let p = BicycleParams::default();
        let dt = 0.01;
        let mut s = BicycleState {
            x: 0.0,
            y: 0.0,
            v: 1.0,
            theta: 0.0,
        };
        let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..4000 {
            s = bicycle_step(&s, p.max_steer, dt, &p);
            min_x = min_x.min(s.x);
            max_x = max_x.max(s.x);
        }
        let radius = (max_x - min_x) / 2.0;
        let expect = p.wheelbase / p.max_steer.tan();
        assert!(
            (radius - expect).abs() / expect < 0.01,
            "radius {radius} vs analytic {expect}"
        );
    }

    #[test]
    fn commanded_speed_converges() {
        let p = BicycleParams {
            speed: SpeedMode::Commanded {
                target: 2.0,
                tau: 1.0,
            },
            ..BicycleParams::default()
        };
        let mut s = BicycleState {
            x: 0.0,
            y: 0.0,
            v: 0.0,
            theta: 0.0,
        };
        for _ in 0..100 {
            s = bicycle_step(&s, 0.0, 0.1, &p);
        }
        assert!((s.v - 2.0).abs() < 1e-4);
    }

    #[test]
    fn hallway_contains_and_distance() {
        let map = default_hallway();
        assert!(map.contains(1.0, 0.75));
        assert!(map.contains(9.0, -5.0));
        assert!(!map.contains(5.0, -1.0));
        assert!(!map.contains(-1.0, 0.75));
        assert!((map.wall_distance(1.0, 0.75) - 0.75).abs() < 1e-12);
        assert!((map.wall_distance(5.0, 0.1) - 0.1).abs() < 1e-12);
        assert!(map.wall_distance(5.0, -0.2) < 0.0);
    }

    #[test]
    fn perpendicular_ray_reads_half_width() {
        let map = default_hallway();
        let cfg = LidarConfig {
            noise_halfwidth: 0.0,
            ..LidarConfig::default()
        };
        let mut rng = stream(0, 0, Channel::Measurement);
        // Heading +x in the middle of the corridor: the extreme rays point
        // straight at the side walls 0.75 m away.
        let scan = lidar_scan(2.0, 0.75, 0.0, &map, &cfg, &[], &mut rng).unwrap();
        assert!((scan[0] - 0.75).abs() < 1e-9, "right ray {}", scan[0]);
        assert!((scan[20] - 0.75).abs() < 1e-9, "left ray {}", scan[20]);
    }

    #[test]
    fn open_corridor_clips_to_max_range() {
        let map = default_hallway();
        let cfg = LidarConfig {
            noise_halfwidth: 0.0,
            max_range: 5.0,
            ..LidarConfig::default()
        };
        let mut rng = stream(0, 0, Channel::Measurement);
        let scan = lidar_scan(1.0, 0.75, 0.0, &map, &cfg, &[], &mut rng).unwrap();
        // The forward ray sees the far wall 9 m away, beyond max range.
        assert_eq!(scan[10], 5.0);
    }

    #[test]
    fn dropped_rays_read_max_range() {
        let map = default_hallway();
        let cfg = LidarConfig {
            noise_halfwidth: 0.0,
            ..LidarConfig::default()
        };
        let mut rng = stream(0, 0, Channel::Measurement);
        let scan = lidar_scan(2.0, 0.75, 0.0, &map, &cfg, &[0, 7], &mut rng).unwrap();
        assert_eq!(scan[0], cfg.max_range);
        assert_eq!(scan[7], cfg.max_range);
        assert!((scan[20] - 0.75).abs() < 1e-9);
    }

    #[test]
    fn scan_from_outside_fails() {
        let map = default_hallway();
        let cfg = LidarConfig::default();
        let mut rng = stream(0, 0, Channel::Measurement);
        assert!(matches!(
            lidar_scan(5.0, -3.0, 0.0, &map, &cfg, &[], &mut rng),
            Err(SimError::OutsideMap { .. })
        ));
    }

    #[test]
    fn raycast_matches_independent_oracle() {
        use rand::prelude::*;
        let map = default_hallway();
        let mut rng = rand::rngs::StdRng::seed_from_u64(99);
        let mut tested = 0;
        while tested < 10_000 {
            let x = rng.gen_range(0.0..10.0);
            let y = rng.gen_range(-10.0..1.5);
            if !map.contains(x, y) {
                continue;
            }
            let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let fast = raycast(x, y, angle, &map);
            let slow = oracle_raycast(x, y, angle, &map);
            assert!(
                (fast - slow).abs() < 1e-9,
                "raycast mismatch at ({x},{y},{angle}): {fast} vs {slow}"
            );
            tested += 1;
        }
    }

    /// Cramer's-rule reimplementation used as the test oracle.
    fn oracle_raycast(x: f64, y: f64, angle: f64, map: &HallwayMap) -> f64 {
        let (dx, dy) = (angle.cos(), angle.sin());
        let mut best = f64::INFINITY;
        for s in map.segments() {
            // Solve x + t*dx = x1 + u*(x2-x1); y + t*dy = y1 + u*(y2-y1).
            let a11 = dx;
            let a12 = s.x1 - s.x2;
            let a21 = dy;
            let a22 = s.y1 - s.y2;
            let b1 = s.x1 - x;
            let b2 = s.y1 - y;
            let det = a11 * a22 - a12 * a21;
            if det.abs() < 1e-12 {
                continue;
            }
            let t = (b1 * a22 - a12 * b2) / det;
            let u = (a11 * b2 - b1 * a21) / det;
            if t >= 0.0 && (0.0..=1.0).contains(&u) {
                best = best.min(t);
            }
        }
        best
    }

    #[test]
    fn map_csv_round_trip() {
        let map = default_hallway();
        let text = map.to_csv();
        let back = HallwayMap::from_csv(&text).unwrap();
        assert_eq!(map, back);
        assert!(HallwayMap::from_csv("0,0,1,0\n5,5,6,6\n").is_err());
    }
}
