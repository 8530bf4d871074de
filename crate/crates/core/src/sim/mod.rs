//! Deterministic reaction-based crowd simulator.
//!
//! A fixed robot with a 360 degree LiDAR sits in a rectangular arena with
//! circular static obstacles and goal-seeking agents. Agents steer toward
//! their goals and swerve when something enters their lookahead cone,
//! producing the sudden maneuvers the predictor listens for. Everything is
//! a pure function of `(seed, config)`.

mod agent;
mod episode;
mod lidar;

pub use agent::step_agent;
pub use episode::{
    run_episode, AgentTruth, EpisodeHeader, EpisodeLog, LogError, ObstacleTruth, TickRecord,
    TruthSnapshot, EPISODE_SCHEMA,
};
pub use lidar::{raycast, visibility_snapshot, visible_agents};

use crate::model::{AgentId, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("could not place {entity} after {attempts} attempts; scenario too dense")]
    TooDense {
        entity: &'static str,
        attempts: usize,
    },
    #[error("invalid simulator configuration: {0}")]
    InvalidConfig(String),
    #[error("horizon must be finite and non-negative, got {0}")]
    BadHorizon(f64),
}

/// Simulator tunables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Step length, seconds.
    pub dt: f64,
    /// LiDAR rays per revolution.
    pub n_rays: usize,
    /// Maximum sensor range, meters.
    pub max_ray: f64,
    /// Distance at which agents react to something ahead, meters.
    pub lookahead: f64,
    /// Half-angle of the reaction cone, radians.
    pub cone_half_angle: f64,
    /// Turn rate while evading, rad/s.
    pub evade_turn_rate: f64,
    /// Turn rate while homing on the goal, rad/s. Kept below the evade rate
    /// so routine goal corrections stay under the predictor's max-turn
    /// trigger and only genuine evasions fire it.
    pub goal_turn_rate: f64,
    /// Agent footprint radius, meters.
    pub agent_radius: f64,
    /// Static obstacle footprint radius, meters (0.4 m footprint).
    pub obstacle_radius: f64,
    /// Robot footprint radius, meters.
    pub robot_radius: f64,
    /// Goal reached when within this distance, meters.
    pub goal_tolerance: f64,
    /// Preferred speed of ordinary walkers, sampled uniformly, m/s.
    pub speed_range: (f64, f64),
    /// Fraction of agents that are slow shufflers (near-static crowd
    /// members, the main source of far-future occupancy estimates).
    pub slow_agent_fraction: f64,
    /// Preferred speed range of the slow shufflers, m/s.
    pub slow_speed_range: (f64, f64),
    /// Agent count is sampled uniformly from this inclusive range.
    pub agents_range: (usize, usize),
    /// Static obstacle count, sampled likewise.
    pub obstacles_range: (usize, usize),
    /// Arena half-extent: the arena is a square of side `2 * arena_half`.
    pub arena_half: f64,
    /// Robot pose `(x, y, heading)`; the robot never moves.
    pub robot_pose: (f64, f64, f64),
    /// Whether agents pick a fresh goal after reaching one.
    pub regoal: bool,
    /// Dwell time at a reached goal before re-goaling, seconds.
    pub dwell_range: (f64, f64),
    /// Extra spacing required between entities at placement time, meters.
    pub spawn_margin: f64,
    /// Rejection-sampling budget per entity.
    pub max_place_attempts: usize,
    /// Static obstacles are placed in this distance ring around the robot,
    /// keeping the sensed neighborhood structured with occluders; `(0, 0)`
    /// disables the bias and scatters them over the whole arena.
    pub obstacle_ring: (f64, f64),
    /// Fraction of obstacles placed radially behind an earlier one, in its
    /// sensor shadow. Occluded structure is the scenario the pipeline is
    /// about, and it almost never arises from independent placement.
    pub shadow_pair_fraction: f64,
    /// How far behind its occluder a shadowed obstacle sits, meters.
    pub shadow_depth: (f64, f64),
    /// Fraction of goals drawn from the robot's neighborhood instead of the
    /// whole arena, so traffic crosses the sensed region.
    pub near_goal_fraction: f64,
    /// Distance ring around the robot for near goals.
    pub goal_ring: (f64, f64),
    /// Fraction of goals dropped into an obstacle's sensor shadow, sending
    /// agents to pause where the robot cannot see them.
    pub shadow_goal_fraction: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            n_rays: 360,
            max_ray: 3.0,
            lookahead: 0.65,
            cone_half_angle: 0.6,
            evade_turn_rate: 6.0,
            goal_turn_rate: 1.5,
            agent_radius: 0.2,
            obstacle_radius: 0.2,
            robot_radius: 0.2,
            goal_tolerance: 0.15,
            speed_range: (0.5, 1.2),
            slow_agent_fraction: 0.45,
            slow_speed_range: (0.05, 0.12),
            agents_range: (4, 8),
            obstacles_range: (3, 6),
            arena_half: 4.0,
            robot_pose: (0.0, 0.0, 0.0),
            regoal: true,
            dwell_range: (1.5, 4.0),
            spawn_margin: 0.1,
            max_place_attempts: 200,
            obstacle_ring: (0.7, 3.2),
            shadow_goal_fraction: 0.35,
            shadow_pair_fraction: 0.6,
            shadow_depth: (0.45, 0.6),
            near_goal_fraction: 0.75,
            goal_ring: (0.6, 2.2),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: &str| Err(SimError::InvalidConfig(msg.to_string()));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return fail("dt must be > 0");
        }
        if !(self.max_ray.is_finite() && self.max_ray > 0.0) {
            return fail("max_ray must be > 0");
        }
        if self.n_rays < 4 {
            return fail("n_rays must be >= 4");
        }
        if self.speed_range.0 > self.speed_range.1 || self.speed_range.0 < 0.0 {
            return fail("speed_range must be ordered and non-negative");
        }
        if self.slow_speed_range.0 > self.slow_speed_range.1 || self.slow_speed_range.0 < 0.0 {
            return fail("slow_speed_range must be ordered and non-negative");
        }
        if !(0.0..=1.0).contains(&self.slow_agent_fraction) {
            return fail("slow_agent_fraction must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.shadow_pair_fraction) {
            return fail("shadow_pair_fraction must be in [0, 1]");
        }
        if self.agents_range.0 > self.agents_range.1 {
            return fail("agents_range must be ordered");
        }
        if self.obstacles_range.0 > self.obstacles_range.1 {
            return fail("obstacles_range must be ordered");
        }
        if !(self.arena_half.is_finite() && self.arena_half > 0.5) {
            return fail("arena_half must exceed 0.5");
        }
        if self.dwell_range.0 > self.dwell_range.1 || self.dwell_range.0 < 0.0 {
            return fail("dwell_range must be ordered and non-negative");
        }
        Ok(())
    }

    pub fn robot_position(&self) -> Vec2 {
        Vec2 {
            x: self.robot_pose.0,
            y: self.robot_pose.1,
        }
    }
}

/// A circular static obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticObstacle {
    pub center: Vec2,
    pub radius: f64,
}

/// A simulated human.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub position: Vec2,
    pub velocity: Vec2,
    pub goal: Vec2,
    pub preferred_speed: f64,
    /// While dwelling at a reached goal, the time until a new goal may be
    /// assigned; unused otherwise.
    pub dwell_until: f64,
}

impl Agent {
    pub fn at_goal(&self, cfg: &SimConfig) -> bool {
        self.position.distance(self.goal) <= cfg.goal_tolerance
    }
}

/// The simulated world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    /// Square arena half-extent, meters.
    pub arena_half: f64,
    pub robot_position: Vec2,
    pub robot_heading: f64,
    pub obstacles: Vec<StaticObstacle>,
    pub agents: Vec<Agent>,
}

fn sample_point(rng: &mut ChaCha8Rng, half: f64, margin: f64) -> Vec2 {
    let lo = -half + margin;
    let hi = half - margin;
    Vec2 {
        x: rng.gen_range(lo..=hi),
        y: rng.gen_range(lo..=hi),
    }
}

/// Uniform point in a distance ring around `center`, clamped to the arena.
fn sample_ring(
    rng: &mut ChaCha8Rng,
    center: Vec2,
    ring: (f64, f64),
    half: f64,
    margin: f64,
) -> Vec2 {
    let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    // Area-uniform radius within the annulus.
    let r2 = rng.gen_range((ring.0 * ring.0)..=(ring.1 * ring.1));
    let p = center + Vec2::from_angle(angle) * r2.sqrt();
    let limit = half - margin;
    Vec2 {
        x: p.x.clamp(-limit, limit),
        y: p.y.clamp(-limit, limit),
    }
}

/// Deterministically generate a scenario from a seed: uniform
/// rejection-sampled non-overlapping placements for obstacles and agents
/// around the fixed robot.
pub fn generate_scenario(seed: u64, cfg: &SimConfig) -> Result<Scenario, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_obstacles = rng.gen_range(cfg.obstacles_range.0..=cfg.obstacles_range.1);
    let n_agents = rng.gen_range(cfg.agents_range.0..=cfg.agents_range.1);

    let robot = cfg.robot_position();
    let mut placed: Vec<(Vec2, f64)> = vec![(robot, cfg.robot_radius)];

    let place = |rng: &mut ChaCha8Rng,
                 placed: &mut Vec<(Vec2, f64)>,
                 radius: f64,
                 in_ring: bool,
                 entity: &'static str|
     -> Result<Vec2, SimError> {
        for _ in 0..cfg.max_place_attempts {
            let p = if in_ring {
                sample_ring(rng, robot, cfg.obstacle_ring, cfg.arena_half, radius)
            } else {
                sample_point(rng, cfg.arena_half, radius)
            };
            let clear = placed
                .iter()
                .all(|(q, r)| p.distance(*q) >= radius + r + cfg.spawn_margin);
            if clear {
                placed.push((p, radius));
                return Ok(p);
            }
        }
        Err(SimError::TooDense {
            entity,
            attempts: cfg.max_place_attempts,
        })
    };

    let bias_obstacles = cfg.obstacle_ring.1 > cfg.obstacle_ring.0;
    let mut obstacles: Vec<StaticObstacle> = Vec::with_capacity(n_obstacles);
    for k in 0..n_obstacles {
        let shadowed = k > 0 && rng.gen_range(0.0..1.0) < cfg.shadow_pair_fraction;
        let center = if shadowed {
            place_in_shadow(&mut rng, cfg, robot, &obstacles, &mut placed)
        } else {
            None
        };
        let center = match center {
            Some(c) => c,
            None => place(
                &mut rng,
                &mut placed,
                cfg.obstacle_radius,
                bias_obstacles,
                "obstacle",
            )?,
        };
        obstacles.push(StaticObstacle {
            center,
            radius: cfg.obstacle_radius,
        });
    }

    let mut agents = Vec::with_capacity(n_agents);
    for k in 0..n_agents {
        let position = place(&mut rng, &mut placed, cfg.agent_radius, false, "agent")?;
        let goal = sample_goal(&mut rng, cfg, &obstacles);
        let slow: bool = rng.gen_range(0.0..1.0) < cfg.slow_agent_fraction;
        let range = if slow { cfg.slow_speed_range } else { cfg.speed_range };
        let preferred_speed = rng.gen_range(range.0..=range.1);
        let to_goal = goal - position;
        let velocity = if to_goal.norm() > 1e-9 {
            to_goal * (preferred_speed / to_goal.norm())
        } else {
            Vec2::ZERO
        };
        agents.push(Agent {
            id: AgentId(k as u64),
            position,
            velocity,
            goal,
            preferred_speed,
            dwell_until: 0.0,
        });
    }

    Ok(Scenario {
        seed,
        arena_half: cfg.arena_half,
        robot_position: robot,
        robot_heading: cfg.robot_pose.2,
        obstacles,
        agents,
    })
}

/// Drop an obstacle into the sensor shadow of one already placed: along
/// the robot-to-occluder ray, a little deeper, with angular jitter.
fn place_in_shadow(
    rng: &mut ChaCha8Rng,
    cfg: &SimConfig,
    robot: Vec2,
    obstacles: &[StaticObstacle],
    placed: &mut Vec<(Vec2, f64)>,
) -> Option<Vec2> {
    for _ in 0..cfg.max_place_attempts {
        let host = obstacles[rng.gen_range(0..obstacles.len())];
        let to_host = host.center - robot;
        let bearing = to_host.angle() + rng.gen_range(-0.15..=0.15);
        let depth = rng.gen_range(cfg.shadow_depth.0..=cfg.shadow_depth.1);
        let p = robot + Vec2::from_angle(bearing) * (to_host.norm() + depth);
        let limit = cfg.arena_half - cfg.obstacle_radius;
        if p.x.abs() > limit || p.y.abs() > limit {
            continue;
        }
        let clear = placed
            .iter()
            .all(|(q, r)| p.distance(*q) >= cfg.obstacle_radius + r + cfg.spawn_margin);
        if clear {
            placed.push((p, cfg.obstacle_radius));
            return Some(p);
        }
    }
    None
}

/// Goals may be anywhere that is not inside an obstacle footprint (goals
/// are destinations, not bodies). Configured fractions are drawn from the
/// robot's neighborhood (so traffic keeps crossing the sensed region) or
/// from obstacle shadows (so some agents pause out of the robot's sight).
pub(crate) fn sample_goal(
    rng: &mut ChaCha8Rng,
    cfg: &SimConfig,
    obstacles: &[StaticObstacle],
) -> Vec2 {
    let pick: f64 = rng.gen_range(0.0..1.0);
    if pick < cfg.shadow_goal_fraction && !obstacles.is_empty() {
        let host = obstacles[rng.gen_range(0..obstacles.len())];
        let to_host = host.center - cfg.robot_position();
        if to_host.norm() > 0.1 {
            let bearing = to_host.angle() + rng.gen_range(-0.1..=0.1);
            let depth = rng.gen_range(0.55..=0.85);
            let p = cfg.robot_position() + Vec2::from_angle(bearing) * (to_host.norm() + depth);
            let limit = cfg.arena_half - cfg.agent_radius;
            let p = Vec2 { x: p.x.clamp(-limit, limit), y: p.y.clamp(-limit, limit) };
            let clear = obstacles
                .iter()
                .all(|o| p.distance(o.center) >= o.radius + cfg.agent_radius);
            if clear {
                return p;
            }
        }
    }
    let near: bool = pick >= cfg.shadow_goal_fraction
        && pick < cfg.shadow_goal_fraction + (1.0 - cfg.shadow_goal_fraction) * cfg.near_goal_fraction;
    for _ in 0..cfg.max_place_attempts {
        let p = if near {
            sample_ring(
                rng,
                cfg.robot_position(),
                cfg.goal_ring,
                cfg.arena_half,
                cfg.agent_radius,
            )
        } else {
            sample_point(rng, cfg.arena_half, cfg.agent_radius)
        };
        let clear = obstacles
            .iter()
            .all(|o| p.distance(o.center) >= o.radius + cfg.agent_radius)
            && p.distance(cfg.robot_position()) >= cfg.robot_radius + cfg.agent_radius;
        if clear {
            return p;
        }
    }
    // Arenas are sparse enough that this is unreachable in practice; fall
    // back to the center rather than failing an episode mid-run.
    Vec2::ZERO
}
