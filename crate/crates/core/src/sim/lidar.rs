//! Analytic 2D LiDAR raycasting and line-of-sight visibility.

use super::{Scenario, SimConfig};
use crate::clearing::LidarScan;
use crate::model::{AgentObservation, Vec2};
use serde::{Deserialize, Serialize};

/// Smallest positive ray parameter at which the ray `origin + t * dir`
/// (unit `dir`) enters the circle, if any. A ray starting inside a circle
/// hits its far boundary.
fn ray_circle(origin: Vec2, dir: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let oc = center - origin;
    let b = dir.dot(oc);
    let disc = b * b - (oc.norm_squared() - radius * radius);
    if disc < 0.0 {
        return None;
    }
    let sqrt_disc = disc.sqrt();
    let near = b - sqrt_disc;
    if near > 0.0 {
        return Some(near);
    }
    let far = b + sqrt_disc;
    (far > 0.0).then_some(far)
}

/// Shortest distance from the segment `a..b` to `point`.
fn segment_distance(a: Vec2, b: Vec2, point: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= 1e-18 {
        return point.distance(a);
    }
    let t = ((point - a).dot(ab) / len2).clamp(0.0, 1.0);
    point.distance(a + ab * t)
}

/// One full revolution from the robot pose: rays uniformly spaced over
/// 360 degrees, each range the nearest intersection with any obstacle or
/// agent footprint, `max_ray` on a miss.
pub fn raycast(scenario: &Scenario, cfg: &SimConfig, stamp: f64) -> LidarScan {
    let origin = scenario.robot_position;
    let n = cfg.n_rays;
    let mut ranges = Vec::with_capacity(n);
    for i in 0..n {
        let angle = scenario.robot_heading + std::f64::consts::TAU * i as f64 / n as f64;
        let dir = Vec2::from_angle(angle);
        let mut range = cfg.max_ray;
        let mut consider = |center: Vec2, radius: f64| {
            if let Some(t) = ray_circle(origin, dir, center, radius) {
                if t < range {
                    range = t;
                }
            }
        };
        for o in &scenario.obstacles {
            consider(o.center, o.radius);
        }
        for a in &scenario.agents {
            consider(a.position, cfg.agent_radius);
        }
        ranges.push(range.max(1e-6));
    }
    LidarScan::uniform(origin, scenario.robot_heading, ranges, stamp)
}

/// True when the straight line robot -> target center is unobstructed and
/// the target lies within sensor range. The target itself never blocks.
fn line_of_sight(
    scenario: &Scenario,
    cfg: &SimConfig,
    target: Vec2,
    skip_agent: Option<usize>,
    skip_obstacle: Option<usize>,
) -> bool {
    let robot = scenario.robot_position;
    if robot.distance(target) > cfg.max_ray {
        return false;
    }
    for (i, o) in scenario.obstacles.iter().enumerate() {
        if Some(i) == skip_obstacle {
            continue;
        }
        if segment_distance(robot, target, o.center) < o.radius {
            return false;
        }
    }
    for (i, a) in scenario.agents.iter().enumerate() {
        if Some(i) == skip_agent {
            continue;
        }
        if segment_distance(robot, target, a.position) < cfg.agent_radius {
            return false;
        }
    }
    true
}

/// Exact observations of every agent the robot can currently see.
pub fn visible_agents(scenario: &Scenario, cfg: &SimConfig, t: f64) -> Vec<AgentObservation> {
    scenario
        .agents
        .iter()
        .enumerate()
        .filter(|(i, a)| line_of_sight(scenario, cfg, a.position, Some(*i), None))
        .map(|(_, a)| AgentObservation {
            agent_id: a.id,
            t,
            position: a.position,
            velocity: a.velocity,
        })
        .collect()
}

/// Which entities the robot can currently see, index-aligned with the
/// scenario's agent and obstacle lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisibilitySnapshot {
    pub agents: Vec<bool>,
    pub obstacles: Vec<bool>,
}

pub fn visibility_snapshot(scenario: &Scenario, cfg: &SimConfig) -> VisibilitySnapshot {
    VisibilitySnapshot {
        agents: (0..scenario.agents.len())
            .map(|i| line_of_sight(scenario, cfg, scenario.agents[i].position, Some(i), None))
            .collect(),
        obstacles: (0..scenario.obstacles.len())
            .map(|i| line_of_sight(scenario, cfg, scenario.obstacles[i].center, None, Some(i)))
            .collect(),
    }
}
