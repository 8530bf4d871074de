//! Kalman-filter fusion of obstacle estimates across agents.
//!
//! Each fused region is a 7-state track `[dt, c_xx, c_xy, c_yx, c_yy, x, y]`:
//! remaining time to occupancy, the four covariance terms describing the
//! region's shape, and its position. The transition is the identity (a hidden
//! obstacle cannot be propagated), so prediction only inflates uncertainty;
//! the inflation and every measurement noise are scaled by how far the
//! relevant timestamp lies from the present, `scale = c1 - exp(-c2 * dt^2)`.
//! Measurements are the cleared estimates, observed through an identity
//! model and associated to tracks by KD-tree radius search.

use crate::model::{Cov2, GaussianObstacle, PipelineConfig, Vec2};
use crate::spatial::SpatialIndex;
use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type StateVector = SVector<f64, 7>;
pub type StateMatrix = SMatrix<f64, 7, 7>;

/// Index of each quantity within the state vector.
pub mod state {
    pub const DT: usize = 0;
    pub const C_XX: usize = 1;
    pub const C_XY: usize = 2;
    pub const C_YX: usize = 3;
    pub const C_YY: usize = 4;
    pub const X: usize = 5;
    pub const Y: usize = 6;
}

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("time regression: now = {now} precedes track update at {last_update}")]
    TimeRegression { now: f64, last_update: f64 },
    #[error("innovation covariance is not invertible")]
    SingularInnovation,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TrackId(pub u64);

/// One fused obstacle hypothesis.
#[derive(Debug, Clone)]
pub struct FusionTrack {
    pub id: TrackId,
    /// `[dt, c_xx, c_xy, c_yx, c_yy, x, y]`; `dt` is the remaining time to
    /// occupancy, relative to `t_ref`.
    pub state: StateVector,
    pub cov: StateMatrix,
    /// The instant the state (in particular `dt`) is referenced to;
    /// advanced by every predict step.
    pub t_ref: f64,
    /// When the track last absorbed a measurement. Drives expiry.
    pub last_update: f64,
    pub created_at: f64,
}

impl FusionTrack {
    pub fn position(&self) -> Vec2 {
        Vec2 {
            x: self.state[state::X],
            y: self.state[state::Y],
        }
    }

    /// Absolute occupancy time: `dt` re-anchored to the track's reference.
    pub fn occupancy_time(&self) -> f64 {
        self.t_ref + self.state[state::DT]
    }

    /// The tracked region's 2x2 shape covariance, symmetrized and floored so
    /// it always passes the PSD contract even after many linear updates.
    pub fn shape_cov(&self) -> Cov2 {
        let off = 0.5 * (self.state[state::C_XY] + self.state[state::C_YX]);
        let mut c_xx = self.state[state::C_XX];
        let mut c_yy = self.state[state::C_YY];
        let mut off = off;
        // Floor the eigenvalues at zero by shifting the diagonal if needed.
        let half_trace = 0.5 * (c_xx + c_yy);
        let half_gap = 0.5 * (c_xx - c_yy);
        let min_eig = half_trace - (half_gap * half_gap + off * off).sqrt();
        if min_eig < 0.0 {
            if c_xx + c_yy <= 0.0 {
                c_xx = 0.0;
                c_yy = 0.0;
                off = 0.0;
            } else {
                c_xx -= min_eig;
                c_yy -= min_eig;
            }
        }
        Cov2::new(c_xx, off, off, c_yy).expect("floored shape covariance is PSD")
    }

    /// Shift the remaining-time component so it reads relative to `now`.
    /// Must be followed by a predict step at the same instant, which is what
    /// advances `t_ref`; the frame driver does both in order.
    pub fn re_referenced(&self, now: f64) -> Result<FusionTrack, FusionError> {
        if now < self.t_ref {
            return Err(FusionError::TimeRegression {
                now,
                last_update: self.t_ref,
            });
        }
        let mut out = self.clone();
        out.state[state::DT] -= now - self.t_ref;
        Ok(out)
    }
}

/// Timestamp-driven noise scale `c1 - exp(-c2 * (t_occ - now)^2)`.
///
/// Minimal (`c1 - 1`) when occupancy is imminent, rising toward `c1` the
/// further the occupancy time lies from the present in either direction.
pub fn covariance_scale(t_occ: f64, now: f64, cfg: &PipelineConfig) -> f64 {
    let dt = t_occ - now;
    cfg.c1 - (-cfg.c2 * dt * dt).exp()
}

fn diag(values: &[f64; 7]) -> StateMatrix {
    StateMatrix::from_diagonal(&StateVector::from_column_slice(values))
}

/// Measurement vector of a cleared estimate, with its occupancy time
/// expressed relative to `now`.
pub fn measurement_vector(obs: &GaussianObstacle, now: f64) -> StateVector {
    StateVector::from_column_slice(&[
        obs.t_occ - now,
        obs.cov.c_xx,
        obs.cov.c_xy,
        obs.cov.c_yx,
        obs.cov.c_yy,
        obs.mean.x,
        obs.mean.y,
    ])
}

/// Start a track from the first cleared estimate of a region.
pub fn init_track(obs: &GaussianObstacle, now: f64, id: TrackId, cfg: &PipelineConfig) -> FusionTrack {
    FusionTrack {
        id,
        state: measurement_vector(obs, now),
        cov: diag(&cfg.p0_diag),
        t_ref: now,
        last_update: now,
        created_at: now,
    }
}

fn symmetrize(m: &mut StateMatrix) {
    *m = (*m + m.transpose()) * 0.5;
}

/// Predict step: identity transition, so the mean is left untouched and
/// only uncertainty is added. The base process noise is a per-second rate,
/// scaled by elapsed time and by the track's own timestamp scale.
pub fn predict_step(
    track: &FusionTrack,
    now: f64,
    cfg: &PipelineConfig,
) -> Result<FusionTrack, FusionError> {
    if now < track.t_ref {
        return Err(FusionError::TimeRegression {
            now,
            last_update: track.t_ref,
        });
    }
    let elapsed = now - track.t_ref;
    let scale = covariance_scale(now + track.state[state::DT], now, cfg);
    let mut out = track.clone();
    out.cov += diag(&cfg.q_base_diag) * (scale * elapsed);
    symmetrize(&mut out.cov);
    out.t_ref = now;
    debug_assert!(min_eigenvalue(&out.cov) >= crate::model::PSD_TOL);
    Ok(out)
}

/// All cleared estimates within the association radius of `position`,
/// ascending by distance.
pub fn gather_measurements(
    index: &SpatialIndex,
    position: Vec2,
    cfg: &PipelineConfig,
) -> Vec<GaussianObstacle> {
    index
        .within_radius(position, cfg.assoc_radius)
        .into_iter()
        .map(|(item, _)| *index.get(item))
        .collect()
}

/// Correct step: sequential identity-model updates, one per gathered
/// estimate, each with measurement noise scaled by that estimate's own
/// timestamp. An empty measurement list is a no-op, not an error.
pub fn correct_step(
    track: &FusionTrack,
    measurements: &[GaussianObstacle],
    now: f64,
    cfg: &PipelineConfig,
) -> Result<FusionTrack, FusionError> {
    let mut out = track.clone();
    if measurements.is_empty() {
        return Ok(out);
    }
    let identity = StateMatrix::identity();
    for m in measurements {
        let z = measurement_vector(m, now);
        let r = diag(&cfg.r_base_diag) * covariance_scale(m.t_occ, now, cfg);
        let innovation_cov = out.cov + r;
        let inv = innovation_cov
            .cholesky()
            .map(|ch| ch.inverse())
            .or_else(|| innovation_cov.try_inverse())
            .ok_or(FusionError::SingularInnovation)?;
        let gain = out.cov * inv;
        out.state += gain * (z - out.state);
        // Joseph form keeps the posterior covariance PSD.
        let residual = identity - gain;
        out.cov = residual * out.cov * residual.transpose() + gain * r * gain.transpose();
        symmetrize(&mut out.cov);
        // The two cross terms describe one physical quantity.
        let off = 0.5 * (out.state[state::C_XY] + out.state[state::C_YX]);
        out.state[state::C_XY] = off;
        out.state[state::C_YX] = off;
    }
    out.last_update = now;
    debug_assert!(min_eigenvalue(&out.cov) >= crate::model::PSD_TOL);
    Ok(out)
}

pub(crate) fn min_eigenvalue(m: &StateMatrix) -> f64 {
    m.symmetric_eigenvalues().min()
}

/// One fusion frame.
///
/// Every track is re-referenced to `now`, predicted, and corrected with the
/// cleared estimates gathered around its position. Each estimate may correct
/// at most one track (the nearest; ties go to the lower track id); estimates
/// claimed by no track spawn new ones.
pub fn fuse_frame(
    tracks: &[FusionTrack],
    cleared: &[GaussianObstacle],
    now: f64,
    next_id: &mut u64,
    cfg: &PipelineConfig,
) -> Result<Vec<FusionTrack>, FusionError> {
    let index = SpatialIndex::build(cleared);

    let mut predicted = Vec::with_capacity(tracks.len());
    for track in tracks {
        let track = track.re_referenced(now)?;
        predicted.push(predict_step(&track, now, cfg)?);
    }

    // Nearest-track claim per estimate.
    let mut claims: Vec<Option<(f64, TrackId, usize)>> = vec![None; cleared.len()];
    for (slot, track) in predicted.iter().enumerate() {
        for (item, dist) in index.within_radius(track.position(), cfg.assoc_radius) {
            let better = match claims[item] {
                None => true,
                Some((d, id, _)) => dist < d || (dist == d && track.id < id),
            };
            if better {
                claims[item] = Some((dist, track.id, slot));
            }
        }
    }

    let mut assigned: Vec<Vec<(f64, usize)>> = vec![Vec::new(); predicted.len()];
    for (item, claim) in claims.iter().enumerate() {
        if let Some((dist, _, slot)) = claim {
            assigned[*slot].push((*dist, item));
        }
    }

    let mut out = Vec::with_capacity(predicted.len() + cleared.len());
    for (slot, track) in predicted.into_iter().enumerate() {
        let mut picks = std::mem::take(&mut assigned[slot]);
        if picks.is_empty() {
            out.push(track);
            continue;
        }
        picks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let measurements: Vec<GaussianObstacle> =
            picks.iter().map(|&(_, item)| *index.get(item)).collect();
        out.push(correct_step(&track, &measurements, now, cfg)?);
    }

    for (item, claim) in claims.iter().enumerate() {
        if claim.is_none() {
            let id = TrackId(*next_id);
            *next_id += 1;
            out.push(init_track(&cleared[item], now, id, cfg));
        }
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObstacleKind;

    fn cfg() -> PipelineConfig {
        PipelineConfig::default()
    }

    fn estimate(x: f64, y: f64, t_occ: f64) -> GaussianObstacle {
        GaussianObstacle::new(
            Vec2 { x, y },
            Cov2::new(0.3, 0.15, 0.15, 0.3).unwrap(),
            t_occ,
            ObstacleKind::Fused,
            None,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn scale_at_zero_offset() {
        let c = cfg();
        assert_eq!(covariance_scale(5.0, 5.0, &c), c.c1 - 1.0);
        assert!((covariance_scale(5.0, 5.0, &c) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn scale_asymptote_and_known_value() {
        let c = cfg();
        assert!((covariance_scale(10.0, 0.0, &c) - c.c1).abs() < 1e-6);
        assert!((covariance_scale(-10.0, 0.0, &c) - c.c1).abs() < 1e-6);
        // Independently computed: 1.1 - exp(-0.3) at a one-second offset.
        assert!((covariance_scale(1.0, 0.0, &c) - 0.3591817793182821).abs() < 1e-12);
    }

    #[test]
    fn scale_is_even_and_monotone_in_offset() {
        let c = cfg();
        let mut prev = covariance_scale(0.0, 0.0, &c);
        for k in 1..200 {
            let dt = k as f64 * 0.05;
            let up = covariance_scale(dt, 0.0, &c);
            let down = covariance_scale(-dt, 0.0, &c);
            assert!((up - down).abs() < 1e-15);
            assert!(up > prev);
            prev = up;
        }
    }

    #[test]
    fn init_track_maps_fields() {
        let c = cfg();
        let obs = GaussianObstacle::new(
            Vec2 { x: 1.0, y: 2.0 },
            Cov2::new(0.3, 0.15, 0.15, 0.3).unwrap(),
            12.0,
            ObstacleKind::Front,
            None,
            10.0,
        )
        .unwrap();
        let track = init_track(&obs, 10.0, TrackId(0), &c);
        let expect = [2.0, 0.3, 0.15, 0.15, 0.3, 1.0, 2.0];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(track.state[i], *e);
        }
        for i in 0..7 {
            assert_eq!(track.cov[(i, i)], c.p0_diag[i]);
        }
        assert_eq!(track.occupancy_time(), 12.0);

        let immediate = init_track(&estimate(0.0, 0.0, 10.0), 10.0, TrackId(1), &c);
        assert_eq!(immediate.state[state::DT], 0.0);
    }

    #[test]
    fn predict_with_zero_noise_is_identity() {
        let mut c = cfg();
        c.q_base_diag = [0.0; 7];
        let track = init_track(&estimate(1.0, 1.0, 0.0), 0.0, TrackId(0), &c);
        let after = predict_step(&track, 1.0, &c).unwrap();
        assert_eq!(after.state, track.state);
        assert_eq!(after.cov, track.cov);
    }

    #[test]
    fn predict_never_moves_the_mean() {
        let c = cfg();
        let track = init_track(&estimate(1.0, -2.0, 4.0), 0.0, TrackId(0), &c);
        let after = predict_step(&track, 2.5, &c).unwrap();
        assert_eq!(after.state, track.state);
        assert!(after.cov[(5, 5)] > track.cov[(5, 5)]);
    }

    #[test]
    fn longer_timestamp_offset_inflates_more() {
        let c = cfg();
        // Same elapsed time; occupancy offsets 0 s vs 3 s.
        let near = init_track(&estimate(0.0, 0.0, 0.0), 0.0, TrackId(0), &c);
        let far = init_track(&estimate(0.0, 0.0, 3.0), 0.0, TrackId(1), &c);
        // The scale oracle: 0.1 at zero offset, about 1.033 at three seconds.
        let s0 = covariance_scale(0.0, 0.0, &c);
        let s3 = covariance_scale(3.0, 0.0, &c);
        assert!((s0 - 0.1).abs() < 1e-12);
        assert!((s3 - 1.0327944872602502).abs() < 1e-12);

        let near = predict_step(&near, 1.0, &c).unwrap();
        let far = predict_step(&far, 1.0, &c).unwrap();
        for i in 0..7 {
            let near_gain = near.cov[(i, i)] - c.p0_diag[i];
            let far_gain = far.cov[(i, i)] - c.p0_diag[i];
            if c.q_base_diag[i] > 0.0 {
                assert!(far_gain > near_gain);
                assert!((near_gain - s0 * c.q_base_diag[i]).abs() < 1e-12);
                assert!((far_gain - s3 * c.q_base_diag[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn consecutive_predicts_sum_their_inflation() {
        let c = cfg();
        let track = init_track(&estimate(0.0, 0.0, 0.0), 0.0, TrackId(0), &c);
        let two_steps = predict_step(&predict_step(&track, 1.0, &c).unwrap(), 1.0, &c).unwrap();
        let one_step = predict_step(&track, 1.0, &c).unwrap();
        // Second call at the same instant adds nothing; noise is additive.
        assert_eq!(two_steps.cov, one_step.cov);
        assert_eq!(two_steps.state, one_step.state);
    }

    #[test]
    fn predict_rejects_time_regression() {
        let c = cfg();
        let track = init_track(&estimate(0.0, 0.0, 0.0), 5.0, TrackId(0), &c);
        assert!(matches!(
            predict_step(&track, 4.0, &c),
            Err(FusionError::TimeRegression { .. })
        ));
    }

    #[test]
    fn re_reference_preserves_occupancy_time() {
        let c = cfg();
        let track = init_track(&estimate(0.0, 0.0, 4.0), 0.0, TrackId(0), &c);
        let t_abs = track.occupancy_time();
        let shifted = track.re_referenced(2.0).unwrap();
        let predicted = predict_step(&shifted, 2.0, &c).unwrap();
        assert!((predicted.occupancy_time() - t_abs).abs() < 1e-12);
    }

    #[test]
    fn gather_is_radius_limited_and_sorted() {
        let c = cfg();
        let estimates = vec![
            estimate(0.99, 0.0, 0.0),
            estimate(0.5, 0.0, 0.0),
            estimate(1.01, 0.0, 0.0),
        ];
        let index = SpatialIndex::build(&estimates);
        let got = gather_measurements(&index, Vec2::ZERO, &c);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].mean.x, 0.5);
        assert_eq!(got[1].mean.x, 0.99);

        let empty = SpatialIndex::build(&[]);
        assert!(gather_measurements(&empty, Vec2::ZERO, &c).is_empty());
    }

    #[test]
    fn equal_covariance_coincident_measurement_halves_p() {
        let mut c = cfg();
        // Make R equal P by construction: scale at dt = 0 is c1 - 1.
        let track = init_track(&estimate(1.0, 2.0, 0.0), 0.0, TrackId(0), &c);
        let scale0 = covariance_scale(0.0, 0.0, &c);
        for i in 0..7 {
            c.r_base_diag[i] = c.p0_diag[i] / scale0;
        }
        // Measurement identical to the prior mean.
        let m = GaussianObstacle::new(
            Vec2 { x: 1.0, y: 2.0 },
            Cov2::new(0.3, 0.15, 0.15, 0.3).unwrap(),
            0.0,
            ObstacleKind::Fused,
            None,
            0.0,
        )
        .unwrap();
        let after = correct_step(&track, &[m], 0.0, &c).unwrap();
        for i in 0..7 {
            assert!((after.state[i] - track.state[i]).abs() < 1e-9);
            assert!((after.cov[(i, i)] - 0.5 * track.cov[(i, i)]).abs() < 1e-9);
        }
    }

    #[test]
    fn huge_measurement_noise_leaves_prior() {
        let mut c = cfg();
        c.r_base_diag = [1e9; 7];
        let track = init_track(&estimate(1.0, 2.0, 0.0), 0.0, TrackId(0), &c);
        let m = estimate(3.0, -1.0, 0.0);
        let after = correct_step(&track, &[m], 0.0, &c).unwrap();
        for i in 0..7 {
            assert!((after.state[i] - track.state[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn empty_measurements_are_a_no_op() {
        let c = cfg();
        let track = init_track(&estimate(1.0, 2.0, 0.0), 0.0, TrackId(0), &c);
        let after = correct_step(&track, &[], 0.0, &c).unwrap();
        assert_eq!(after.state, track.state);
        assert_eq!(after.cov, track.cov);
    }

    #[test]
    fn trace_never_increases_under_correction() {
        let c = cfg();
        let mut track = init_track(&estimate(0.0, 0.0, 1.0), 0.0, TrackId(0), &c);
        let mut trace = track.cov.trace();
        for k in 0..10 {
            let m = estimate(0.1 * k as f64, -0.05 * k as f64, 0.5);
            track = correct_step(&track, &[m], 0.0, &c).unwrap();
            let t = track.cov.trace();
            assert!(t <= trace + 1e-12);
            assert!(min_eigenvalue(&track.cov) >= crate::model::PSD_TOL);
            trace = t;
        }
    }

    /// Oracle: a second, plainly-written Kalman update (simple form, not
    /// Joseph) applied twice, for cross-checking the two-estimate fusion.
    fn oracle_two_updates(
        track: &FusionTrack,
        ms: &[GaussianObstacle],
        now: f64,
        c: &PipelineConfig,
    ) -> (StateVector, StateMatrix) {
        let mut x = track.state;
        let mut p = track.cov;
        for m in ms {
            let z = measurement_vector(m, now);
            let r = diag(&c.r_base_diag) * covariance_scale(m.t_occ, now, c);
            let s = p + r;
            let k = p * s.try_inverse().unwrap();
            x += k * (z - x);
            p = (StateMatrix::identity() - k) * p;
            p = (p + p.transpose()) * 0.5;
            let off = 0.5 * (x[state::C_XY] + x[state::C_YX]);
            x[state::C_XY] = off;
            x[state::C_YX] = off;
        }
        (x, p)
    }

    #[test]
    fn two_agent_fusion_tightens_position_block() {
        let c = cfg();
        let track = init_track(&estimate(1.0, 1.0, 1.0), 0.0, TrackId(0), &c);
        let m1 = estimate(1.05, 0.95, 0.8);
        let m2 = estimate(0.95, 1.05, 1.2);

        let both = correct_step(&track, &[m1, m2], 0.0, &c).unwrap();
        let only1 = correct_step(&track, &[m1], 0.0, &c).unwrap();
        let only2 = correct_step(&track, &[m2], 0.0, &c).unwrap();

        let pos_trace = |t: &FusionTrack| t.cov[(5, 5)] + t.cov[(6, 6)];
        assert!(pos_trace(&both) < pos_trace(&only1));
        assert!(pos_trace(&both) < pos_trace(&only2));

        // Against the independently written two-step algebra.
        let (ox, op) = oracle_two_updates(&track, &[m1, m2], 0.0, &c);
        for i in 0..7 {
            assert!((both.state[i] - ox[i]).abs() < 1e-9);
            for j in 0..7 {
                assert!((both.cov[(i, j)] - op[(i, j)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn frame_spawns_tracks_for_unclaimed_estimates() {
        let c = cfg();
        let mut next = 0;
        let cleared = vec![estimate(0.0, 0.0, 0.0), estimate(3.0, 3.0, 1.0)];
        let tracks = fuse_frame(&[], &cleared, 0.0, &mut next, &c).unwrap();
        assert_eq!(tracks.len(), 2);
        assert_eq!(next, 2);
    }

    #[test]
    fn frame_predict_only_without_nearby_estimates() {
        let c = cfg();
        let mut next = 0;
        let tracks = fuse_frame(&[], &[estimate(0.0, 0.0, 0.0)], 0.0, &mut next, &c).unwrap();
        let far = vec![estimate(5.0, 5.0, 0.0)];
        let after = fuse_frame(&tracks, &far, 1.0, &mut next, &c).unwrap();
        // Old track grew, mean fixed; far estimate spawned a new track.
        assert_eq!(after.len(), 2);
        let old = after.iter().find(|t| t.id == tracks[0].id).unwrap();
        assert_eq!(old.position(), tracks[0].position());
        assert!(old.cov[(5, 5)] > tracks[0].cov[(5, 5)]);
    }

    #[test]
    fn frame_applies_each_estimate_once() {
        let c = cfg();
        let mut next = 0;
        let tracks = fuse_frame(&[], &[estimate(0.0, 0.0, 0.0)], 0.0, &mut next, &c).unwrap();
        let near = vec![estimate(0.2, 0.0, 0.0)];
        let after = fuse_frame(&tracks, &near, 0.5, &mut next, &c).unwrap();
        // Exactly one track: corrected, not double-spawned.
        assert_eq!(after.len(), 1);
        assert_eq!(after[0].id, tracks[0].id);
        assert!(after[0].position().x > 0.0);
        assert_eq!(next, 1);
    }

    #[test]
    fn nearest_track_wins_a_contested_estimate() {
        let c = cfg();
        let mut next = 0;
        let seeds = vec![estimate(0.0, 0.0, 0.0), estimate(0.6, 0.0, 0.0)];
        let tracks = fuse_frame(&[], &seeds, 0.0, &mut next, &c).unwrap();
        // One new estimate between the two tracks, nearer the second.
        let contested = vec![estimate(0.45, 0.0, 0.0)];
        let after = fuse_frame(&tracks, &contested, 1.0, &mut next, &c).unwrap();
        assert_eq!(after.len(), 2);
        let t0 = after.iter().find(|t| t.id == TrackId(0)).unwrap();
        let t1 = after.iter().find(|t| t.id == TrackId(1)).unwrap();
        // Loser kept its mean; winner moved toward the estimate.
        assert_eq!(t0.position().x, 0.0);
        assert!(t1.position().x < 0.6);
    }
}
