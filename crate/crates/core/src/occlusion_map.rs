//! Published obstacle map: cost values, time decay, and pruning.
//!
//! Costs live in `[cost_floor, cost_ceiling]` and are inversely related to
//! the time until predicted occupancy: `1 / (1 + remaining)` while occupancy
//! is pending (saturating toward the ceiling as it nears), then a linear
//! decay toward the floor once the predicted time has passed. Regions whose
//! evidence has gone stale, or that have idled at the floor, are pruned so
//! phantom obstacles cannot freeze a planner.

use crate::fusion::{FusionTrack, TrackId};
use crate::model::{GaussianObstacle, ObstacleKind, PipelineConfig};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A fused region with its planner-facing cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostedObstacle {
    pub track: TrackId,
    pub obstacle: GaussianObstacle,
    /// Threat value in `[cost_floor, cost_ceiling]`.
    pub cost: f64,
    /// Absolute time after which the region is dropped.
    pub expires_at: f64,
}

/// Cost of a region whose occupancy is predicted at `t_occ`, seen at `now`.
pub fn cost_of(t_occ: f64, now: f64, cfg: &PipelineConfig) -> f64 {
    let remaining = t_occ - now;
    if remaining > 0.0 {
        (1.0 / (1.0 + remaining)).clamp(cfg.cost_floor, cfg.cost_ceiling)
    } else {
        (cfg.cost_ceiling - cfg.decay_rate * (now - t_occ)).max(cfg.cost_floor)
    }
}

#[derive(Debug, Clone)]
struct MapEntry {
    costed: CostedObstacle,
    /// When the cost first sat at the floor, if it currently does.
    floor_since: Option<f64>,
}

/// The live set of published regions, keyed by track.
#[derive(Debug, Default)]
pub struct OcclusionMap {
    entries: BTreeMap<TrackId, MapEntry>,
}

impl OcclusionMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: TrackId) -> bool {
        self.entries.contains_key(&id)
    }

    /// Refresh the map from the current tracks and return the published
    /// snapshot, ordered by track id. Tracks whose evidence or occupancy
    /// window has fully lapsed are excluded.
    pub fn publish(
        &mut self,
        tracks: &[FusionTrack],
        now: f64,
        cfg: &PipelineConfig,
    ) -> Vec<CostedObstacle> {
        let mut live: BTreeMap<TrackId, MapEntry> = BTreeMap::new();
        for track in tracks {
            let t_occ = track.occupancy_time();
            let expires_at = t_occ.max(track.last_update) + cfg.retention;
            if now > expires_at {
                continue;
            }
            let cost = cost_of(t_occ, now, cfg);
            let obstacle = GaussianObstacle {
                mean: track.position(),
                cov: track.shape_cov(),
                t_occ,
                kind: ObstacleKind::Fused,
                source_agent: None,
                created_at: track.created_at,
            };
            let at_floor = cost <= cfg.cost_floor + 1e-12;
            let floor_since = match (at_floor, self.entries.get(&track.id)) {
                (false, _) => None,
                (true, Some(prev)) => Some(prev.floor_since.unwrap_or(now)),
                (true, None) => Some(now),
            };
            live.insert(
                track.id,
                MapEntry {
                    costed: CostedObstacle {
                        track: track.id,
                        obstacle,
                        cost,
                        expires_at,
                    },
                    floor_since,
                },
            );
        }
        self.entries = live;
        self.entries.values().map(|e| e.costed).collect()
    }

    /// Drop entries past their expiry and entries that have idled at the
    /// cost floor for longer than the retention horizon.
    pub fn prune(&mut self, now: f64, cfg: &PipelineConfig) {
        self.entries.retain(|_, entry| {
            if now > entry.costed.expires_at {
                return false;
            }
            match entry.floor_since {
                Some(since) => now - since <= cfg.retention,
                None => true,
            }
        });
    }

    pub fn live_ids(&self) -> impl Iterator<Item = TrackId> + '_ {
        self.entries.keys().copied()
    }

    pub fn snapshot(&self) -> Vec<CostedObstacle> {
        self.entries.values().map(|e| e.costed).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::init_track;
    use crate::model::{Cov2, Vec2};
    use proptest::prelude::*;

    fn cfg() -> PipelineConfig {
        PipelineConfig::default()
    }

    fn track_with_occupancy(id: u64, t_occ: f64, now: f64) -> FusionTrack {
        let obs = GaussianObstacle::new(
            Vec2 { x: 1.0, y: 0.5 },
            Cov2::new(0.3, 0.15, 0.15, 0.3).unwrap(),
            t_occ,
            ObstacleKind::Front,
            None,
            now.min(t_occ),
        )
        .unwrap();
        init_track(&obs, now, TrackId(id), &cfg())
    }

    #[test]
    fn cost_at_occupancy_time_is_ceiling() {
        let c = cfg();
        assert_eq!(cost_of(10.0, 10.0, &c), 1.0);
    }

    #[test]
    fn cost_long_after_occupancy_is_floor() {
        let c = cfg();
        assert_eq!(cost_of(0.0, 100.0, &c), 0.1);
    }

    #[test]
    fn cost_far_before_occupancy_clamps_to_floor() {
        let c = cfg();
        // Nine seconds out: 1/10, at the floor.
        assert_eq!(cost_of(9.0, 0.0, &c), 0.1);
    }

    #[test]
    fn publish_empty_tracks() {
        let mut map = OcclusionMap::new();
        assert!(map.publish(&[], 0.0, &cfg()).is_empty());
    }

    #[test]
    fn publish_immediate_occupancy_at_full_cost() {
        let mut map = OcclusionMap::new();
        let track = track_with_occupancy(0, 5.0, 5.0);
        let out = map.publish(&[track], 5.0, &cfg());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].cost, 1.0);
    }

    #[test]
    fn publish_excludes_expired_tracks() {
        let c = cfg();
        let mut map = OcclusionMap::new();
        let track = track_with_occupancy(0, 0.0, 0.0);
        // Expiry is last evidence plus retention; far in the past now.
        let out = map.publish(&[track], c.retention + 10.0, &c);
        assert!(out.is_empty());
    }

    #[test]
    fn prune_is_idempotent_and_monotone() {
        let c = cfg();
        let mut map = OcclusionMap::new();
        let t0 = track_with_occupancy(0, 0.0, 0.0);
        let t1 = track_with_occupancy(1, 6.0, 0.0);
        map.publish(&[t0, t1], 0.0, &c);
        assert_eq!(map.len(), 2);

        map.prune(4.0, &c);
        assert_eq!(map.len(), 2);

        // Past the first track's expiry (0 + retention).
        map.prune(c.retention + 0.5, &c);
        assert_eq!(map.len(), 1);
        let after_once: Vec<_> = map.live_ids().collect();
        map.prune(c.retention + 0.5, &c);
        let after_twice: Vec<_> = map.live_ids().collect();
        assert_eq!(after_once, after_twice);
    }

    #[test]
    fn entries_idling_at_floor_are_pruned() {
        let c = cfg();
        let mut map = OcclusionMap::new();
        // Occupancy 20 s out: cost pinned at the floor from the start.
        let track = track_with_occupancy(0, 20.0, 0.0);
        let published = map.publish(&[track], 0.0, &c);
        assert_eq!(published[0].cost, c.cost_floor);

        map.prune(c.retention - 0.5, &c);
        assert_eq!(map.len(), 1, "still within the retention horizon");
        map.prune(c.retention + 1.0, &c);
        assert!(map.is_empty(), "floor-bound entry must be dropped");
    }

    proptest! {
        /// Lower remaining time never lowers the cost; post-occupancy age
        /// never raises it.
        #[test]
        fn cost_monotonicity(t1 in -30.0f64..30.0, t2 in -30.0f64..30.0) {
            let c = cfg();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            // Larger remaining => smaller or equal cost.
            let cost_lo = cost_of(lo, 0.0, &c);
            let cost_hi = cost_of(hi, 0.0, &c);
            if lo >= 0.0 {
                prop_assert!(cost_lo >= cost_hi - 1e-12);
            }
            // Post-occupancy: older => smaller or equal cost.
            if hi <= 0.0 {
                prop_assert!(cost_lo <= cost_hi + 1e-12);
            }
            prop_assert!((c.cost_floor..=c.cost_ceiling).contains(&cost_lo));
            prop_assert!((c.cost_floor..=c.cost_ceiling).contains(&cost_hi));
        }
    }
}
