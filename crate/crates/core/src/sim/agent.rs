//! Reactive agent stepping: goal attraction plus cone-based evasion.

use super::{Agent, Scenario, SimConfig};
use crate::model::{wrap, Vec2};

/// Nearest intruder in the agent's lookahead cone, if any: static obstacles,
/// other agents, and the robot all count.
fn nearest_threat(
    agent: &Agent,
    heading: f64,
    scenario: &Scenario,
    cfg: &SimConfig,
) -> Option<Vec2> {
    let mut best: Option<(f64, Vec2)> = None;
    let mut consider = |center: Vec2| {
        let delta = center - agent.position;
        let d = delta.norm();
        if d > cfg.lookahead || d < 1e-9 {
            return;
        }
        if wrap(delta.angle() - heading).abs() > cfg.cone_half_angle {
            return;
        }
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, center));
        }
    };

    for o in &scenario.obstacles {
        consider(o.center);
    }
    for other in &scenario.agents {
        if other.id != agent.id {
            consider(other.position);
        }
    }
    consider(scenario.robot_position);
    best.map(|(_, center)| center)
}

/// Advance one agent by one step.
///
/// The agent turns toward its goal at the homing rate, or away from the
/// nearest threat in its lookahead cone at the (sharper) evade rate, then
/// integrates position at its preferred speed. Agents at their goal stand
/// still. Positions are resolved against static obstacle and robot
/// footprints so bodies never interpenetrate, and clamped to the arena.
pub fn step_agent(agent: &Agent, scenario: &Scenario, cfg: &SimConfig) -> Agent {
    let mut next = *agent;

    if agent.at_goal(cfg) {
        next.velocity = Vec2::ZERO;
        return next;
    }

    let to_goal = agent.goal - agent.position;
    let desired_heading = to_goal.angle();
    let heading = if agent.velocity.norm() > 1e-9 {
        agent.velocity.angle()
    } else {
        desired_heading
    };

    let new_heading = match nearest_threat(agent, heading, scenario, cfg) {
        Some(threat) => {
            let bearing = (threat - agent.position).angle();
            let offset = wrap(bearing - heading);
            // Turn away from the threat; dead-ahead ties break counter-clockwise.
            let away = if offset > 0.0 { -1.0 } else { 1.0 };
            heading + away * cfg.evade_turn_rate * cfg.dt
        }
        None => {
            let err = wrap(desired_heading - heading);
            let max_step = cfg.goal_turn_rate * cfg.dt;
            heading + err.clamp(-max_step, max_step)
        }
    };

    next.velocity = Vec2::from_angle(new_heading) * agent.preferred_speed;
    next.position = agent.position + next.velocity * cfg.dt;

    let limit = scenario.arena_half - cfg.agent_radius;
    next.position.x = next.position.x.clamp(-limit, limit);
    next.position.y = next.position.y.clamp(-limit, limit);

    // Hard bodies last: push out of static obstacle and robot footprints.
    // Non-penetration outranks the arena clamp, which is a soft wall.
    // Closely spaced obstacles can hand the agent back and forth, so the
    // resolution iterates to a clean position.
    let mut bodies: Vec<(Vec2, f64)> = scenario
        .obstacles
        .iter()
        .map(|o| (o.center, o.radius))
        .collect();
    bodies.push((scenario.robot_position, cfg.robot_radius));
    // Overshooting each push by a hair makes the wedge case (agent pinched
    // between two circles) converge instead of creeping.
    const SLACK: f64 = 1e-6;
    for _ in 0..16 {
        let mut moved = false;
        for &(center, radius) in &bodies {
            let min_sep = radius + cfg.agent_radius;
            let delta = next.position - center;
            let d = delta.norm();
            if d < min_sep {
                let out = if d > 1e-9 {
                    delta * ((min_sep + SLACK) / d)
                } else {
                    Vec2 {
                        x: min_sep + SLACK,
                        y: 0.0,
                    }
                };
                next.position = center + out;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    next
}
