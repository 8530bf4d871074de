//! LiDAR-sector clearing of obstacle estimates.
//!
//! The 360 degree scan is split into angular sectors. Each sector's ray value
//! is the mean range of its rays; its clearing threshold is the mean of the
//! sector and its two circular neighbors. An estimate survives only if it
//! lies at or beyond the threshold of its sector and strictly inside sensor
//! range, so visibly free space is scrubbed while occluded space is kept.

use crate::model::{GaussianObstacle, PipelineConfig, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClearError {
    #[error("scan has {angles} angles but {ranges} ranges")]
    LengthMismatch { angles: usize, ranges: usize },
    #[error("scan is empty")]
    EmptyScan,
    #[error("ray {index} has range {range}, outside (0, {max_ray}]")]
    RangeOutOfBounds {
        index: usize,
        range: f64,
        max_ray: f64,
    },
    #[error("non-finite value in scan at ray {0}")]
    NonFinite(usize),
}

/// One 360 degree range scan in the world frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarScan {
    pub robot_position: Vec2,
    pub robot_heading: f64,
    /// World-frame bearing of each ray, radians.
    pub angles: Vec<f64>,
    /// Measured range per ray; `max_ray` where nothing was hit.
    pub ranges: Vec<f64>,
    /// Acquisition time, seconds.
    pub stamp: f64,
}

impl LidarScan {
    /// Scan with rays uniformly spaced over the full circle starting at the
    /// robot heading. This is the layout the simulator and the log format
    /// share.
    pub fn uniform(robot_position: Vec2, robot_heading: f64, ranges: Vec<f64>, stamp: f64) -> Self {
        let n = ranges.len();
        let angles = (0..n)
            .map(|i| crate::model::wrap(robot_heading + TAU * i as f64 / n as f64))
            .collect();
        Self {
            robot_position,
            robot_heading,
            angles,
            ranges,
            stamp,
        }
    }

    pub fn validate(&self, max_ray: f64) -> Result<(), ClearError> {
        if self.angles.len() != self.ranges.len() {
            return Err(ClearError::LengthMismatch {
                angles: self.angles.len(),
                ranges: self.ranges.len(),
            });
        }
        if self.ranges.is_empty() {
            return Err(ClearError::EmptyScan);
        }
        for (i, (&a, &r)) in self.angles.iter().zip(&self.ranges).enumerate() {
            if !a.is_finite() || !r.is_finite() {
                return Err(ClearError::NonFinite(i));
            }
            if r <= 0.0 || r > max_ray {
                return Err(ClearError::RangeOutOfBounds {
                    index: i,
                    range: r,
                    max_ray,
                });
            }
        }
        Ok(())
    }
}

/// Per-sector ray averages and neighbor-averaged clearing thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorProfile {
    n_sectors: usize,
    max_ray: f64,
    /// Mean range of the rays falling in each sector.
    pub ray_value: Vec<f64>,
    /// Clearing range per sector: mean of the sector and both neighbors.
    pub threshold: Vec<f64>,
    /// Sectors that contained no rays; they inherit `max_ray` and carry no
    /// clearing evidence of their own.
    pub empty: Vec<bool>,
}

impl SectorProfile {
    pub fn n_sectors(&self) -> usize {
        self.n_sectors
    }

    pub fn max_ray(&self) -> f64 {
        self.max_ray
    }

    /// Sector index of a world-frame bearing. Bins are half-open `[lo, hi)`,
    /// so a boundary angle belongs to the higher sector.
    pub fn sector_of(&self, angle: f64) -> usize {
        let a = angle.rem_euclid(TAU);
        let idx = (a / (TAU / self.n_sectors as f64)) as usize;
        idx.min(self.n_sectors - 1)
    }
}

/// Build the sector profile for one scan.
pub fn build_sector_profile(
    scan: &LidarScan,
    cfg: &PipelineConfig,
) -> Result<SectorProfile, ClearError> {
    scan.validate(cfg.max_ray)?;
    let n = cfg.n_sectors;
    let width = TAU / n as f64;

    let mut sum = vec![0.0f64; n];
    let mut count = vec![0usize; n];
    for (&angle, &range) in scan.angles.iter().zip(&scan.ranges) {
        let idx = ((angle.rem_euclid(TAU) / width) as usize).min(n - 1);
        sum[idx] += range;
        count[idx] += 1;
    }

    let mut ray_value = Vec::with_capacity(n);
    let mut empty = Vec::with_capacity(n);
    for i in 0..n {
        if count[i] == 0 {
            // No rays means no evidence; an empty sector must not clear.
            ray_value.push(cfg.max_ray);
            empty.push(true);
        } else {
            ray_value.push(sum[i] / count[i] as f64);
            empty.push(false);
        }
    }

    let threshold = (0..n)
        .map(|i| {
            let left = ray_value[(i + n - 1) % n];
            let right = ray_value[(i + 1) % n];
            (left + ray_value[i] + right) / 3.0
        })
        .collect();

    Ok(SectorProfile {
        n_sectors: n,
        max_ray: cfg.max_ray,
        ray_value,
        threshold,
        empty,
    })
}

/// The retention rule of one point against one profile: at or beyond its
/// sector's clearing threshold, strictly inside sensor range.
pub fn survives_clearing(point: Vec2, profile: &SectorProfile, robot_position: Vec2) -> bool {
    let delta = point - robot_position;
    let d = delta.norm();
    let sector = profile.sector_of(delta.angle());
    d >= profile.threshold[sector] && d < profile.max_ray()
}

/// Delete estimates contradicted by the scan. An estimate is retained only
/// if its distance from the robot is at least its sector's threshold and
/// strictly less than the maximum sensor range.
pub fn clear_obstacles(
    obstacles: &[GaussianObstacle],
    profile: &SectorProfile,
    robot_position: Vec2,
) -> Vec<GaussianObstacle> {
    obstacles
        .iter()
        .filter(|obstacle| survives_clearing(obstacle.mean, profile, robot_position))
        .copied()
        .collect()
}
