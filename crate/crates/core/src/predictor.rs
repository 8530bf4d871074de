//! Behavior-triggered obstacle estimation.
//!
//! Watches short sliding windows of each visible agent's trajectory. A sudden
//! maneuver (average and maximum per-step turning angle both over threshold)
//! is read as obstacle avoidance, and the module emits noisy Gaussian
//! estimates of the avoided region: one ahead of the agent along its pre-turn
//! heading, and two at the instantaneous center of rotation and its mirror
//! image across the motion line.

use crate::model::{
    rotate_cov, AgentId, AgentObservation, Cov2, GaussianObstacle, ModelError, ObstacleKind,
    PipelineConfig,
};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_4;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("window for agent {0:?} has fewer than 2 samples")]
    InsufficientData(AgentId),
    #[error("observation at t = {t} does not advance agent {agent:?} past t = {last}")]
    NonMonotonicTime { agent: AgentId, t: f64, last: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Sliding window over one agent's recent observations, at most
/// `window_duration` seconds long.
#[derive(Debug, Clone)]
pub struct TrajectoryWindow {
    agent_id: AgentId,
    window_duration: f64,
    samples: VecDeque<AgentObservation>,
}

impl TrajectoryWindow {
    pub fn new(agent_id: AgentId, window_duration: f64) -> Self {
        Self {
            agent_id,
            window_duration,
            samples: VecDeque::new(),
        }
    }

    pub fn agent_id(&self) -> AgentId {
        self.agent_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = &AgentObservation> {
        self.samples.iter()
    }

    pub fn last(&self) -> Option<&AgentObservation> {
        self.samples.back()
    }

    /// Append a sample and evict anything older than the window span.
    /// Time must strictly increase per agent.
    pub fn push(&mut self, obs: AgentObservation) -> Result<(), PredictError> {
        if let Some(last) = self.samples.back() {
            if obs.t <= last.t {
                return Err(PredictError::NonMonotonicTime {
                    agent: self.agent_id,
                    t: obs.t,
                    last: last.t,
                });
            }
        }
        self.samples.push_back(obs);
        while let (Some(front), Some(back)) = (self.samples.front(), self.samples.back()) {
            if back.t - front.t > self.window_duration {
                self.samples.pop_front();
            } else {
                break;
            }
        }
        Ok(())
    }
}

/// Rotation sense of the summed signed turning over a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TurnSign {
    Clockwise,
    CounterClockwise,
}

impl TurnSign {
    pub fn signum(self) -> f64 {
        match self {
            TurnSign::Clockwise => -1.0,
            TurnSign::CounterClockwise => 1.0,
        }
    }
}

/// Turning statistics of one window.
#[derive(Debug, Clone, Copy)]
pub struct TurnStats {
    /// Mean of absolute per-step turning angles, radians.
    pub avg_turning_angle: f64,
    /// Largest absolute per-step turning angle, radians.
    pub max_turning_angle: f64,
    pub turn_sign: TurnSign,
    /// Signed sum of per-step turns: the maneuver's full heading change
    /// across the window, radians. Invariant under the sampling rate.
    pub total_turn: f64,
    /// Mean speed magnitude over the window, m/s.
    pub avg_speed: f64,
    /// Heading of the newest sample, radians.
    pub heading_now: f64,
    /// Heading of the oldest sample (pre-turn heading), radians.
    pub heading_prev: f64,
    /// Velocity-difference gradient between the last two samples;
    /// `f64::INFINITY` marks a vertical gradient.
    pub gradient: f64,
}

impl TurnStats {
    /// Average per-step turning angle carrying the rotation sense. This is
    /// the per-sample rotation, the right quantity for the instantaneous
    /// center of rotation (displacement per step over angle per step).
    pub fn signed_avg_turn(&self) -> f64 {
        self.turn_sign.signum() * self.avg_turning_angle
    }
}

fn heading_of(v: crate::model::Vec2, epsilon: f64) -> f64 {
    v.y.atan2(v.x + epsilon)
}

/// Per-step turning statistics over a window. Needs at least two samples.
pub fn turn_stats(
    window: &TrajectoryWindow,
    cfg: &PipelineConfig,
) -> Result<TurnStats, PredictError> {
    let samples: Vec<&AgentObservation> = window.samples().collect();
    if samples.len() < 2 {
        return Err(PredictError::InsufficientData(window.agent_id()));
    }

    let headings: Vec<f64> = samples
        .iter()
        .map(|s| heading_of(s.velocity, cfg.epsilon))
        .collect();

    let mut sum_abs = 0.0;
    let mut max_abs = 0.0f64;
    let mut sum_signed = 0.0;
    for pair in headings.windows(2) {
        let step = crate::model::wrap(pair[1] - pair[0]);
        sum_abs += step.abs();
        max_abs = max_abs.max(step.abs());
        sum_signed += step;
    }
    let steps = (headings.len() - 1) as f64;

    let avg_speed =
        samples.iter().map(|s| s.velocity.norm()).sum::<f64>() / samples.len() as f64;

    let last = samples[samples.len() - 1];
    let prev = samples[samples.len() - 2];
    let dvx = last.velocity.x - prev.velocity.x;
    let dvy = last.velocity.y - prev.velocity.y;
    let gradient = if dvx == 0.0 { f64::INFINITY } else { dvy / dvx };

    Ok(TurnStats {
        avg_turning_angle: sum_abs / steps,
        max_turning_angle: max_abs,
        turn_sign: if sum_signed >= 0.0 {
            TurnSign::CounterClockwise
        } else {
            TurnSign::Clockwise
        },
        total_turn: sum_signed,
        avg_speed,
        heading_now: *headings.last().unwrap(),
        heading_prev: headings[0],
        gradient,
    })
}

/// Both thresholds must be met (inclusive) for the predictor to fire.
pub fn is_triggered(stats: &TurnStats, cfg: &PipelineConfig) -> bool {
    stats.avg_turning_angle >= cfg.avg_turn_trigger
        && stats.max_turning_angle >= cfg.max_turn_trigger
}

/// Which patch geometry to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchKind {
    Front,
    Side,
}

/// Speed-dependent spread of the unrotated patch:
/// `1.5 * avg_speed` below 0.2 m/s, saturating at 0.3 above.
pub fn patch_threshold(avg_speed: f64) -> f64 {
    if avg_speed < 0.2 {
        1.5 * avg_speed
    } else {
        0.3
    }
}

/// The unrotated patch covariance, elongated along the y = x axis.
pub fn base_patch_cov(avg_speed: f64) -> Cov2 {
    let t = patch_threshold(avg_speed);
    Cov2::new(t, t / 2.0, t / 2.0, t).expect("patch covariance is PSD by construction")
}

/// Orientation applied to the base patch. The pi/4 offset undoes the
/// y = x elongation; front patches additionally oppose the maneuver's full
/// heading change.
pub fn patch_rotation(stats: &TurnStats, kind: PatchKind) -> f64 {
    // atan of the infinity sentinel is the vertical-gradient limit, pi/2.
    let slope = stats.gradient.atan();
    match kind {
        PatchKind::Front => slope + FRAC_PI_4 - stats.total_turn,
        PatchKind::Side => slope - FRAC_PI_4,
    }
}

/// Rotated covariance for a patch of the given kind.
pub fn build_patch_cov(stats: &TurnStats, kind: PatchKind, _cfg: &PipelineConfig) -> Cov2 {
    let base = base_patch_cov(stats.avg_speed);
    rotate_cov(base, patch_rotation(stats, kind))
        .expect("rotation of a PSD patch stays PSD")
}

/// Estimate the avoided region ahead of the agent.
///
/// The estimate sits `|clearance / (tan(turn) + eps)|` along the pre-turn
/// heading from the trigger position, clamped to sensor range, and predicts
/// occupancy after the time the agent would need to reach it at its average
/// speed. The turn is the window's full heading change: a human deflecting
/// by `turn` clears an obstacle `clearance / tan(turn)` ahead, and unlike a
/// per-step average the full change does not dilute with the sampling rate.
/// Returns `None` when the window average speed is zero, since the
/// occupancy time would be undefined.
pub fn predict_front(
    window: &TrajectoryWindow,
    stats: &TurnStats,
    cfg: &PipelineConfig,
) -> Option<GaussianObstacle> {
    if stats.avg_speed <= 0.0 {
        return None;
    }
    let last = window.last()?;
    let theta = stats.total_turn;
    let rel = (cfg.obstacle_clearance / (theta.tan() + cfg.epsilon))
        .abs()
        .min(cfg.max_ray);
    let dir = crate::model::Vec2::from_angle(stats.heading_prev);
    let mean = last.position + dir * rel;
    let cov = build_patch_cov(stats, PatchKind::Front, cfg);
    let now = last.t;
    GaussianObstacle::new(
        mean,
        cov,
        now + rel / stats.avg_speed,
        ObstacleKind::Front,
        Some(window.agent_id()),
        now,
    )
    .ok()
}

/// Estimate side regions at the instantaneous center of zero velocity and
/// its mirror image across the motion line.
///
/// The center sits `d / (|turn| + eps)` perpendicular to the current
/// velocity, where `d` is the last step's displacement. Candidates whose
/// radius exceeds sensor range are dropped (a near-straight trajectory puts
/// the center unfalsifiably far away).
pub fn predict_sides(
    window: &TrajectoryWindow,
    stats: &TurnStats,
    cfg: &PipelineConfig,
) -> Vec<GaussianObstacle> {
    let samples: Vec<&AgentObservation> = window.samples().collect();
    if samples.len() < 2 {
        return Vec::new();
    }
    let last = samples[samples.len() - 1];
    let prev = samples[samples.len() - 2];

    let d_step = (last.position - prev.position).norm();
    let radius = d_step / (stats.signed_avg_turn().abs() + cfg.epsilon);
    if radius > cfg.max_ray {
        return Vec::new();
    }

    let v = last.velocity;
    let beta = (-v.x).atan2(v.y + cfg.epsilon);
    let offset = crate::model::Vec2::from_angle(beta) * radius;
    let cov = build_patch_cov(stats, PatchKind::Side, cfg);
    let now = last.t;

    [last.position + offset, last.position - offset]
        .into_iter()
        .map(|center| {
            let kind = if v.cross(center - last.position) > 0.0 {
                ObstacleKind::SideLeft
            } else {
                ObstacleKind::SideRight
            };
            GaussianObstacle::new(center, cov, now, kind, Some(window.agent_id()), now)
                .expect("side estimate timestamps are immediate by construction")
        })
        .collect()
}

/// Full per-window prediction: empty unless the window is triggered,
/// otherwise the front estimate (when defined) followed by side estimates.
pub fn predict(
    window: &TrajectoryWindow,
    cfg: &PipelineConfig,
) -> Result<Vec<GaussianObstacle>, PredictError> {
    let stats = turn_stats(window, cfg)?;
    if !is_triggered(&stats, cfg) {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(3);
    if let Some(front) = predict_front(window, &stats, cfg) {
        out.push(front);
    }
    out.extend(predict_sides(window, &stats, cfg));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Vec2;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn obs(id: u64, t: f64, pos: (f64, f64), vel: (f64, f64)) -> AgentObservation {
        AgentObservation {
            agent_id: AgentId(id),
            t,
            position: Vec2 { x: pos.0, y: pos.1 },
            velocity: Vec2 { x: vel.0, y: vel.1 },
        }
    }

    /// Window of `n` samples turning `step` radians per sample at `speed`.
    fn turning_window(n: usize, step: f64, speed: f64) -> TrajectoryWindow {
        let mut w = TrajectoryWindow::new(AgentId(1), 1.0);
        let dt = 0.1;
        let mut pos = Vec2 { x: 0.0, y: 0.0 };
        for k in 0..n {
            let heading = step * k as f64;
            let vel = Vec2::from_angle(heading) * speed;
            w.push(obs(1, k as f64 * dt, (pos.x, pos.y), (vel.x, vel.y)))
                .unwrap();
            pos = pos + vel * dt;
        }
        w
    }

    #[test]
    fn stats_constant_velocity() {
        let w = turning_window(5, 0.0, 1.0);
        let s = turn_stats(&w, &PipelineConfig::default()).unwrap();
        assert_eq!(s.avg_turning_angle, 0.0);
        assert_eq!(s.max_turning_angle, 0.0);
        assert!((s.avg_speed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stats_uniform_rotation() {
        let w = turning_window(5, 0.1, 1.0);
        let s = turn_stats(&w, &PipelineConfig::default()).unwrap();
        assert!((s.avg_turning_angle - 0.1).abs() < 1e-6);
        assert!((s.max_turning_angle - 0.1).abs() < 1e-6);
        assert_eq!(s.turn_sign, TurnSign::CounterClockwise);
    }

    #[test]
    fn stats_vertical_gradient_sentinel() {
        let mut w = TrajectoryWindow::new(AgentId(1), 1.0);
        w.push(obs(1, 0.0, (0.0, 0.0), (0.5, 0.2))).unwrap();
        w.push(obs(1, 0.1, (0.05, 0.02), (0.5, 0.2))).unwrap();
        let s = turn_stats(&w, &PipelineConfig::default()).unwrap();
        assert_eq!(s.gradient, f64::INFINITY);
        assert!((s.gradient.atan() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn stats_requires_two_samples() {
        let mut w = TrajectoryWindow::new(AgentId(7), 1.0);
        w.push(obs(7, 0.0, (0.0, 0.0), (1.0, 0.0))).unwrap();
        assert!(matches!(
            turn_stats(&w, &PipelineConfig::default()),
            Err(PredictError::InsufficientData(AgentId(7)))
        ));
    }

    #[test]
    fn window_rejects_non_monotonic_time() {
        let mut w = TrajectoryWindow::new(AgentId(1), 1.0);
        w.push(obs(1, 0.5, (0.0, 0.0), (1.0, 0.0))).unwrap();
        assert!(w.push(obs(1, 0.5, (0.1, 0.0), (1.0, 0.0))).is_err());
        assert!(w.push(obs(1, 0.4, (0.1, 0.0), (1.0, 0.0))).is_err());
    }

    #[test]
    fn window_evicts_to_duration() {
        let mut w = TrajectoryWindow::new(AgentId(1), 1.0);
        for k in 0..25 {
            w.push(obs(1, 0.1 * k as f64, (0.0, 0.0), (1.0, 0.0)))
                .unwrap();
        }
        let span = w.last().unwrap().t - w.samples().next().unwrap().t;
        assert!(span <= 1.0 + 1e-12);
        // 0.1 s sampling: ten steps fit in the window, eleven samples at
        // most (one fewer when accumulated float error tips the span).
        assert!(w.len() == 10 || w.len() == 11);
    }

    #[test]
    fn trigger_boundaries() {
        let cfg = PipelineConfig::default();
        let mk = |avg: f64, max: f64| TurnStats {
            avg_turning_angle: avg,
            max_turning_angle: max,
            turn_sign: TurnSign::CounterClockwise,
            total_turn: avg,
            avg_speed: 1.0,
            heading_now: 0.0,
            heading_prev: 0.0,
            gradient: 0.0,
        };
        assert!(!is_triggered(&mk(0.0, 0.0), &cfg));
        assert!(is_triggered(
            &mk(cfg.avg_turn_trigger, cfg.max_turn_trigger),
            &cfg
        ));
        // Both conditions are required.
        assert!(!is_triggered(
            &mk(cfg.avg_turn_trigger * 2.0, cfg.max_turn_trigger * 0.5),
            &cfg
        ));
    }

    #[test]
    fn patch_threshold_branches() {
        assert!((patch_threshold(0.1) - 0.15).abs() < 1e-12);
        assert!((patch_threshold(0.5) - 0.3).abs() < 1e-12);
        // Continuous where the branches meet.
        assert!((patch_threshold(0.2) - 0.3).abs() < 1e-12);
        assert!((patch_threshold(0.2 - 1e-9) - 0.3).abs() < 1e-8);
    }

    #[test]
    fn base_patch_cov_from_slow_agent() {
        let c = base_patch_cov(0.1);
        assert!((c.c_xx - 0.15).abs() < 1e-12);
        assert!((c.c_xy - 0.075).abs() < 1e-12);
        assert!((c.c_yy - 0.15).abs() < 1e-12);
    }

    #[test]
    fn front_patch_rotation_cancels() {
        // Flat gradient and a pi/4 counter-clockwise turn cancel exactly.
        let stats = TurnStats {
            avg_turning_angle: PI / 4.0,
            max_turning_angle: PI / 4.0,
            turn_sign: TurnSign::CounterClockwise,
            total_turn: PI / 4.0,
            avg_speed: 1.0,
            heading_now: 0.0,
            heading_prev: 0.0,
            gradient: 0.0,
        };
        assert!(patch_rotation(&stats, PatchKind::Front).abs() < 1e-12);
        let cfg = PipelineConfig::default();
        let c = build_patch_cov(&stats, PatchKind::Front, &cfg);
        let base = base_patch_cov(1.0);
        assert!((c.c_xx - base.c_xx).abs() < 1e-12);
        assert!((c.c_xy - base.c_xy).abs() < 1e-12);
    }

    /// A window that reliably trips both triggers: sharp turn halfway.
    fn triggered_window(speed: f64) -> TrajectoryWindow {
        let mut w = TrajectoryWindow::new(AgentId(3), 1.0);
        let dt = 0.1;
        let mut pos = Vec2 { x: 0.0, y: 0.0 };
        for k in 0..8 {
            let heading = if k < 4 { 0.0 } else { 0.45 * (k - 3) as f64 };
            let vel = Vec2::from_angle(heading) * speed;
            w.push(obs(3, k as f64 * dt, (pos.x, pos.y), (vel.x, vel.y)))
                .unwrap();
            pos = pos + vel * dt;
        }
        w
    }

    #[test]
    fn front_estimate_geometry() {
        let cfg = PipelineConfig::default();
        let w = triggered_window(1.0);
        let stats = turn_stats(&w, &cfg).unwrap();
        assert!(is_triggered(&stats, &cfg));
        let front = predict_front(&w, &stats, &cfg).unwrap();

        let last = w.last().unwrap();
        let rel = (front.mean - last.position).norm();
        // Mean lies on the pre-turn heading ray from the trigger position.
        let dir = Vec2::from_angle(stats.heading_prev);
        let along = (front.mean - last.position).dot(dir);
        assert!((along - rel).abs() < 1e-9);
        // Occupancy time is reach time at average speed.
        assert!((front.t_occ - (last.t + rel / stats.avg_speed)).abs() < 1e-9);
        assert_eq!(front.kind, ObstacleKind::Front);
        assert_eq!(front.source_agent, Some(AgentId(3)));
    }

    #[test]
    fn front_distance_formula() {
        let cfg = PipelineConfig::default();
        // tan(pi/4) = 1 makes relative position equal the clearance.
        let stats = TurnStats {
            avg_turning_angle: PI / 4.0,
            max_turning_angle: PI / 2.0,
            turn_sign: TurnSign::CounterClockwise,
            total_turn: PI / 4.0,
            avg_speed: 1.0,
            heading_now: PI / 4.0,
            heading_prev: 0.0,
            gradient: 0.0,
        };
        let mut w = TrajectoryWindow::new(AgentId(1), 1.0);
        w.push(obs(1, 0.0, (0.0, 0.0), (1.0, 0.0))).unwrap();
        w.push(obs(1, 0.1, (0.1, 0.0), (1.0, 1.0))).unwrap();
        let front = predict_front(&w, &stats, &cfg).unwrap();
        let rel = (front.mean - w.last().unwrap().position).norm();
        assert!((rel - cfg.obstacle_clearance).abs() < 1e-3);
    }

    #[test]
    fn front_clamps_at_sensor_range_for_small_turns() {
        let cfg = PipelineConfig::default();
        let theta = 1e-4f64;
        // Oracle: the unclamped distance diverges as the turn angle shrinks.
        let unclamped = (cfg.obstacle_clearance / (theta.tan() + cfg.epsilon)).abs();
        assert!(unclamped > cfg.max_ray);

        let stats = TurnStats {
            avg_turning_angle: theta,
            max_turning_angle: theta,
            turn_sign: TurnSign::CounterClockwise,
            total_turn: theta,
            avg_speed: 1.0,
            heading_now: 0.0,
            heading_prev: 0.0,
            gradient: 0.0,
        };
        let mut w = TrajectoryWindow::new(AgentId(1), 1.0);
        w.push(obs(1, 0.0, (0.0, 0.0), (1.0, 0.0))).unwrap();
        w.push(obs(1, 0.1, (0.1, 0.0), (1.0, 0.0))).unwrap();
        let front = predict_front(&w, &stats, &cfg).unwrap();
        let rel = (front.mean - w.last().unwrap().position).norm();
        assert!((rel - cfg.max_ray).abs() < 1e-9);
    }

    #[test]
    fn front_requires_motion() {
        let cfg = PipelineConfig::default();
        let stats = TurnStats {
            avg_turning_angle: 1.0,
            max_turning_angle: 1.0,
            turn_sign: TurnSign::Clockwise,
            total_turn: -1.0,
            avg_speed: 0.0,
            heading_now: 0.0,
            heading_prev: 0.0,
            gradient: 0.0,
        };
        let mut w = TrajectoryWindow::new(AgentId(1), 1.0);
        w.push(obs(1, 0.0, (0.0, 0.0), (0.0, 0.0))).unwrap();
        w.push(obs(1, 0.1, (0.0, 0.0), (0.0, 0.0))).unwrap();
        assert!(predict_front(&w, &stats, &cfg).is_none());
    }

    #[test]
    fn side_radius_formula() {
        let cfg = PipelineConfig::default();
        let stats = TurnStats {
            avg_turning_angle: 0.2,
            max_turning_angle: 0.5,
            turn_sign: TurnSign::CounterClockwise,
            total_turn: 0.5,
            avg_speed: 1.0,
            heading_now: 0.0,
            heading_prev: 0.0,
            gradient: 0.0,
        };
        let mut w = TrajectoryWindow::new(AgentId(1), 1.0);
        w.push(obs(1, 0.0, (0.0, 0.0), (1.0, 0.0))).unwrap();
        w.push(obs(1, 0.1, (0.1, 0.0), (1.0, 0.0))).unwrap();
        let sides = predict_sides(&w, &stats, &cfg);
        assert_eq!(sides.len(), 2);
        let r = (sides[0].mean - w.last().unwrap().position).norm();
        assert!((r - 0.5).abs() < 1e-3);
        assert!(sides.iter().all(|s| s.t_occ == s.created_at));
    }

    #[test]
    fn side_centers_perpendicular_to_motion() {
        let cfg = PipelineConfig::default();
        let stats = TurnStats {
            avg_turning_angle: 0.2,
            max_turning_angle: 0.5,
            turn_sign: TurnSign::CounterClockwise,
            total_turn: 0.5,
            avg_speed: 1.0,
            heading_now: 0.0,
            heading_prev: 0.0,
            gradient: 0.0,
        };
        let mut w = TrajectoryWindow::new(AgentId(1), 1.0);
        w.push(obs(1, 0.0, (0.0, 0.0), (1.0, 0.0))).unwrap();
        w.push(obs(1, 0.1, (0.1, 0.0), (1.0, 0.0))).unwrap();
        let sides = predict_sides(&w, &stats, &cfg);
        let pos = w.last().unwrap().position;
        for s in &sides {
            let offset = s.mean - pos;
            // Perpendicular to the (1, 0) velocity.
            assert!(offset.x.abs() < 1e-3);
        }
        let kinds: Vec<_> = sides.iter().map(|s| s.kind).collect();
        assert!(kinds.contains(&ObstacleKind::SideLeft));
        assert!(kinds.contains(&ObstacleKind::SideRight));
    }

    #[test]
    fn sides_dropped_when_center_out_of_range() {
        let cfg = PipelineConfig::default();
        let theta = 1e-5;
        // Oracle: radius for a near-straight window exceeds sensor range.
        let d_step = 0.1;
        assert!(d_step / (theta + cfg.epsilon) > cfg.max_ray);

        let stats = TurnStats {
            avg_turning_angle: theta,
            max_turning_angle: theta,
            turn_sign: TurnSign::CounterClockwise,
            total_turn: theta,
            avg_speed: 1.0,
            heading_now: 0.0,
            heading_prev: 0.0,
            gradient: 0.0,
        };
        let mut w = TrajectoryWindow::new(AgentId(1), 1.0);
        w.push(obs(1, 0.0, (0.0, 0.0), (1.0, 0.0))).unwrap();
        w.push(obs(1, 0.1, (0.1, 0.0), (1.0, 0.0))).unwrap();
        assert!(predict_sides(&w, &stats, &cfg).is_empty());
    }

    #[test]
    fn no_output_when_not_triggered() {
        let cfg = PipelineConfig::default();
        let w = turning_window(8, 0.0, 1.0);
        assert!(predict(&w, &cfg).unwrap().is_empty());
    }

    #[test]
    fn triggered_window_emits_front_and_sides() {
        let cfg = PipelineConfig::default();
        let w = triggered_window(1.0);
        let out = predict(&w, &cfg).unwrap();
        assert!(!out.is_empty());
        assert!(out.iter().any(|o| o.kind == ObstacleKind::Front));
    }

    proptest! {
        /// Side estimates mirror each other through the agent position.
        #[test]
        fn side_means_mirror_through_agent(
            speed in 0.1f64..2.0,
            turn in 0.05f64..0.6,
            heading in -PI..PI,
        ) {
            let cfg = PipelineConfig::default();
            let mut w = TrajectoryWindow::new(AgentId(1), 1.0);
            let v0 = Vec2::from_angle(heading) * speed;
            let v1 = Vec2::from_angle(heading + turn) * speed;
            let p0 = Vec2 { x: 1.0, y: -2.0 };
            let p1 = p0 + v0 * 0.1;
            w.push(obs(1, 0.0, (p0.x, p0.y), (v0.x, v0.y))).unwrap();
            w.push(obs(1, 0.1, (p1.x, p1.y), (v1.x, v1.y))).unwrap();
            let stats = turn_stats(&w, &cfg).unwrap();
            let sides = predict_sides(&w, &stats, &cfg);
            if sides.len() == 2 {
                let mid = (sides[0].mean + sides[1].mean) * 0.5;
                prop_assert!((mid - p1).norm() < 1e-9);
            }
        }

        /// Every emitted estimate carries a valid covariance and timestamps.
        #[test]
        fn emitted_estimates_are_well_formed(
            speed in 0.0f64..2.5,
            step in -0.8f64..0.8,
        ) {
            let cfg = PipelineConfig::default();
            let w = turning_window(8, step, speed);
            let out = predict(&w, &cfg).unwrap();
            for o in &out {
                let (min_eig, _) = o.cov.eigenvalues();
                prop_assert!(min_eig >= crate::model::PSD_TOL);
                match o.kind {
                    ObstacleKind::Front => prop_assert!(o.t_occ >= o.created_at),
                    ObstacleKind::SideLeft | ObstacleKind::SideRight => {
                        prop_assert!(o.t_occ == o.created_at)
                    }
                    ObstacleKind::Fused => prop_assert!(false, "predictor never emits fused"),
                }
            }
        }
    }
}
