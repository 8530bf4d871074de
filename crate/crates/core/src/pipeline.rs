//! Per-tick orchestration: predict, clear, fuse, publish.

use crate::clearing::{build_sector_profile, clear_obstacles, survives_clearing, ClearError, LidarScan};
use crate::fusion::{fuse_frame, FusionError, FusionTrack};
use crate::model::{AgentObservation, GaussianObstacle, PipelineConfig};
use crate::occlusion_map::{CostedObstacle, OcclusionMap};
use crate::predictor::{predict, PredictError, TrajectoryWindow};
use std::collections::BTreeMap;
use thiserror::Error;

/// Below this speed an observation is treated as stationary and carries no
/// usable heading.
const STATIONARY_SPEED: f64 = 0.03;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Clear(#[from] ClearError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

/// Full prediction stack with per-agent windows, fused tracks, and the
/// published map. Feed it one scan plus the tick's observations; it returns
/// the published obstacles.
#[derive(Debug)]
pub struct OcclusionPipeline {
    cfg: PipelineConfig,
    windows: BTreeMap<u64, TrajectoryWindow>,
    tracks: Vec<FusionTrack>,
    map: OcclusionMap,
    next_track: u64,
}

impl OcclusionPipeline {
    pub fn new(cfg: PipelineConfig) -> Self {
        Self {
            cfg,
            windows: BTreeMap::new(),
            tracks: Vec::new(),
            map: OcclusionMap::new(),
            next_track: 0,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn track_count(&self) -> usize {
        self.tracks.len()
    }

    /// Raw (pre-clearing) estimates for the observations of one tick.
    /// Windows are updated as a side effect.
    ///
    /// Stationary samples reset their agent's window instead of entering it:
    /// a tracker reporting zero velocity yields a meaningless heading, and
    /// the jump to or from it would read as a sharp phantom turn.
    fn predict_tick(
        &mut self,
        observations: &[AgentObservation],
        _now: f64,
    ) -> Result<Vec<GaussianObstacle>, PipelineError> {
        let mut raw = Vec::new();
        for obs in observations {
            if obs.velocity.norm() < STATIONARY_SPEED {
                self.windows.remove(&obs.agent_id.0);
                continue;
            }
            let window = self
                .windows
                .entry(obs.agent_id.0)
                .or_insert_with(|| TrajectoryWindow::new(obs.agent_id, self.cfg.window_duration));
            window.push(*obs)?;
            if window.len() >= 2 {
                raw.extend(predict(window, &self.cfg)?);
            }
        }
        Ok(raw)
    }

    /// One full tick: predict from the observations, clear against the scan,
    /// fuse into tracks, publish costed obstacles, prune stale regions.
    pub fn tick(
        &mut self,
        scan: &LidarScan,
        observations: &[AgentObservation],
        now: f64,
    ) -> Result<Vec<CostedObstacle>, PipelineError> {
        let raw = self.predict_tick(observations, now)?;

        let profile = build_sector_profile(scan, &self.cfg)?;
        let cleared = clear_obstacles(&raw, &profile, scan.robot_position);

        self.tracks = fuse_frame(
            &self.tracks,
            &cleared,
            now,
            &mut self.next_track,
            &self.cfg,
        )?;
        // Clearing is continuous: a tracked region the scan can now see to
        // be empty is as contradicted as a fresh estimate there would be.
        // Regions in occluded space are untouchable and persist.
        self.tracks
            .retain(|t| survives_clearing(t.position(), &profile, scan.robot_position));

        let published = self.map.publish(&self.tracks, now, &self.cfg);
        self.map.prune(now, &self.cfg);
        // Tracks live exactly as long as their published region.
        let live: std::collections::BTreeSet<_> = self.map.live_ids().collect();
        self.tracks.retain(|t| live.contains(&t.id));

        Ok(published)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentId, Vec2};

    /// An agent that runs straight, then swerves hard; a close obstacle in
    /// scan keeps its sector threshold low enough to retain predictions
    /// behind it.
    #[test]
    fn swerving_agent_produces_published_regions() {
        let cfg = PipelineConfig::default();
        let mut pipeline = OcclusionPipeline::new(cfg.clone());
        let robot = Vec2::ZERO;

        // Scan: something solid at 1.0 m in the +x sectors, open elsewhere.
        let mut ranges = vec![cfg.max_ray; 360];
        for r in ranges.iter_mut().take(40) {
            *r = 1.0;
        }
        for r in ranges.iter_mut().skip(320) {
            *r = 1.0;
        }

        let mut published_any = false;
        for k in 0..20 {
            let now = k as f64 * 0.1;
            let scan = LidarScan::uniform(robot, 0.0, ranges.clone(), now);
            // The agent walks +x near the robot then swerves at k = 10.
            let heading = if k < 10 { 0.0 } else { 0.5 * (k - 9) as f64 };
            let vel = Vec2::from_angle(heading);
            let pos = Vec2 {
                x: 0.2 + 0.1 * k as f64,
                y: -0.5,
            };
            let obs = AgentObservation {
                agent_id: AgentId(0),
                t: now,
                position: pos,
                velocity: vel,
            };
            let published = pipeline.tick(&scan, &[obs], now).unwrap();
            if !published.is_empty() {
                published_any = true;
                for p in &published {
                    assert!(p.cost >= cfg.cost_floor && p.cost <= cfg.cost_ceiling);
                    let d = p.obstacle.mean.distance(robot);
                    assert!(d < cfg.max_ray, "published region outside sensor range");
                }
            }
        }
        assert!(published_any, "expected at least one published region");
    }

    #[test]
    fn quiet_world_publishes_nothing() {
        let cfg = PipelineConfig::default();
        let mut pipeline = OcclusionPipeline::new(cfg.clone());
        for k in 0..30 {
            let now = k as f64 * 0.1;
            let scan = LidarScan::uniform(Vec2::ZERO, 0.0, vec![cfg.max_ray; 360], now);
            let obs = AgentObservation {
                agent_id: AgentId(0),
                t: now,
                position: Vec2 {
                    x: -1.0 + 0.1 * k as f64,
                    y: 1.0,
                },
                velocity: Vec2 { x: 1.0, y: 0.0 },
            };
            let published = pipeline.tick(&scan, &[obs], now).unwrap();
            assert!(published.is_empty());
        }
    }
}
