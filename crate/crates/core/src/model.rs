//! Shared geometric and probabilistic primitives used by every pipeline stage.
//!
//! Everything here is an immutable value type; the operations are pure
//! functions, so they are safe to call from any number of worker threads.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Tolerance for the `c_xy == c_yx` symmetry check on 2x2 covariances.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Eigenvalues of a covariance matrix may dip this far below zero before the
/// matrix is rejected; absorbs floating-point error from repeated rotations.
pub const PSD_TOL: f64 = -1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("covariance asymmetric: c_xy = {c_xy}, c_yx = {c_yx}")]
    Asymmetric { c_xy: f64, c_yx: f64 },
    #[error("covariance not positive semi-definite (eigenvalues {min_eig}, {max_eig})")]
    NotPositiveSemiDefinite { min_eig: f64, max_eig: f64 },
    #[error("obstacle timestamp {t_occ} inconsistent with kind {kind:?} created at {created_at}")]
    BadTimestamp {
        t_occ: f64,
        created_at: f64,
        kind: ObstacleKind,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// 2D point or vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    /// Validating constructor; NaN/Inf components are rejected.
    pub fn new(x: f64, y: f64) -> Result<Self, ModelError> {
        if !x.is_finite() || !y.is_finite() {
            return Err(ModelError::NonFinite("Vec2"));
        }
        Ok(Self { x, y })
    }

    /// Unit vector pointing along `angle` radians.
    pub fn from_angle(angle: f64) -> Self {
        Self {
            x: angle.cos(),
            y: angle.sin(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn distance(&self, other: Vec2) -> f64 {
        (*self - other).norm()
    }

    pub fn dot(&self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` lies to
    /// the left of `self`.
    pub fn cross(&self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2 {
            x: self.x + rhs.x,
            y: self.y + rhs.y,
        }
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2 {
            x: self.x - rhs.x,
            y: self.y - rhs.y,
        }
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2 {
            x: self.x * rhs,
            y: self.y * rhs,
        }
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2 {
            x: -self.x,
            y: -self.y,
        }
    }
}

/// Symmetric positive semi-definite 2x2 covariance, row-major, in m^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cov2 {
    pub c_xx: f64,
    pub c_xy: f64,
    pub c_yx: f64,
    pub c_yy: f64,
}

impl Cov2 {
    /// Validating constructor: entries finite, symmetric within
    /// [`SYMMETRY_TOL`], eigenvalues >= [`PSD_TOL`].
    pub fn new(c_xx: f64, c_xy: f64, c_yx: f64, c_yy: f64) -> Result<Self, ModelError> {
        if ![c_xx, c_xy, c_yx, c_yy].iter().all(|v| v.is_finite()) {
            return Err(ModelError::NonFinite("Cov2"));
        }
        if (c_xy - c_yx).abs() > SYMMETRY_TOL {
            return Err(ModelError::Asymmetric { c_xy, c_yx });
        }
        let cov = Self {
            c_xx,
            c_xy,
            c_yx,
            c_yy,
        };
        let (min_eig, max_eig) = cov.eigenvalues();
        if min_eig < PSD_TOL {
            return Err(ModelError::NotPositiveSemiDefinite { min_eig, max_eig });
        }
        Ok(cov)
    }

    pub fn diagonal(c_xx: f64, c_yy: f64) -> Result<Self, ModelError> {
        Self::new(c_xx, 0.0, 0.0, c_yy)
    }

    /// Eigenvalues `(min, max)` of the symmetrized matrix, in closed form.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let off = 0.5 * (self.c_xy + self.c_yx);
        let half_trace = 0.5 * (self.c_xx + self.c_yy);
        let half_gap = 0.5 * (self.c_xx - self.c_yy);
        let radius = (half_gap * half_gap + off * off).sqrt();
        (half_trace - radius, half_trace + radius)
    }

    pub fn trace(&self) -> f64 {
        self.c_xx + self.c_yy
    }

    pub fn determinant(&self) -> f64 {
        self.c_xx * self.c_yy - self.c_xy * self.c_yx
    }
}

/// Opaque identifier for a simulated or tracked human agent.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct AgentId(pub u64);

/// One timestamped pose/velocity sample of a visible agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentObservation {
    pub agent_id: AgentId,
    /// Simulation clock, seconds. Strictly increasing per agent within a stream.
    pub t: f64,
    pub position: Vec2,
    /// m/s.
    pub velocity: Vec2,
}

/// Which part of the model produced an obstacle estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObstacleKind {
    Front,
    SideLeft,
    SideRight,
    Fused,
}

/// A predicted potential-obstacle region: a 2D Gaussian plus the time at
/// which the region is expected to be occupied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianObstacle {
    pub mean: Vec2,
    pub cov: Cov2,
    /// Absolute occupancy time, seconds.
    pub t_occ: f64,
    pub kind: ObstacleKind,
    pub source_agent: Option<AgentId>,
    /// Emission time, seconds.
    pub created_at: f64,
}

impl GaussianObstacle {
    /// Front estimates may only lie in the future; side estimates are
    /// immediate (`t_occ == created_at`).
    pub fn new(
        mean: Vec2,
        cov: Cov2,
        t_occ: f64,
        kind: ObstacleKind,
        source_agent: Option<AgentId>,
        created_at: f64,
    ) -> Result<Self, ModelError> {
        if !mean.is_finite() || !t_occ.is_finite() || !created_at.is_finite() {
            return Err(ModelError::NonFinite("GaussianObstacle"));
        }
        let ok = match kind {
            ObstacleKind::Front => t_occ >= created_at,
            ObstacleKind::SideLeft | ObstacleKind::SideRight => t_occ == created_at,
            ObstacleKind::Fused => true,
        };
        if !ok {
            return Err(ModelError::BadTimestamp {
                t_occ,
                created_at,
                kind,
            });
        }
        Ok(Self {
            mean,
            cov,
            t_occ,
            kind,
            source_agent,
            created_at,
        })
    }
}

/// Tunables shared by the prediction, clearing, fusion, and costing stages.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Division guard added to denominators, unitless.
    pub epsilon: f64,
    /// Minimal social distance a human keeps from an avoided obstacle, meters.
    pub obstacle_clearance: f64,
    /// Length of the sliding trajectory window, seconds.
    pub window_duration: f64,
    /// Average per-step turning angle that arms the predictor, radians.
    pub avg_turn_trigger: f64,
    /// Maximum per-step turning angle that arms the predictor, radians.
    pub max_turn_trigger: f64,
    /// Maximum sensor range, meters.
    pub max_ray: f64,
    /// Angular sectors the 360 degree scan is split into for clearing.
    pub n_sectors: usize,
    /// Radius of the nearest-neighbor gather around a track, meters.
    pub assoc_radius: f64,
    /// Offset constant of the timestamp scale `c1 - exp(-c2 * dt^2)`.
    pub c1: f64,
    /// Decay rate of the timestamp scale.
    pub c2: f64,
    /// Published costs saturate at this lower bound.
    pub cost_floor: f64,
    /// Published costs saturate at this upper bound.
    pub cost_ceiling: f64,
    /// Post-occupancy cost decay, cost units per second.
    pub decay_rate: f64,
    /// How long a region is kept after its last supporting evidence, seconds.
    pub retention: f64,
    /// Base process noise (diagonal) per second for the 7-state filter.
    pub q_base_diag: [f64; 7],
    /// Base measurement noise (diagonal) for the 7-state filter.
    pub r_base_diag: [f64; 7],
    /// Initial track covariance (diagonal).
    pub p0_diag: [f64; 7],
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            obstacle_clearance: 0.5,
            window_duration: 1.0,
            avg_turn_trigger: 0.15,
            max_turn_trigger: 0.40,
            max_ray: 3.0,
            n_sectors: 36,
            assoc_radius: 1.0,
            c1: 1.1,
            c2: 0.3,
            cost_floor: 0.1,
            cost_ceiling: 1.0,
            decay_rate: 0.09,
            retention: 5.0,
            q_base_diag: [0.05, 0.01, 0.01, 0.01, 0.01, 0.04, 0.04],
            r_base_diag: [0.1, 0.02, 0.02, 0.02, 0.02, 0.03, 0.03],
            p0_diag: [0.5, 0.1, 0.1, 0.1, 0.1, 0.25, 0.25],
        }
    }
}

/// Finite and strictly positive; rejects NaN unlike a plain comparison.
fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |msg: &str| Err(ModelError::InvalidConfig(msg.to_string()));
        if !positive(self.epsilon) {
            return fail("epsilon must be > 0");
        }
        if !positive(self.cost_floor)
            || self.cost_floor >= self.cost_ceiling
            || self.cost_ceiling > 1.0
            || self.cost_ceiling.is_nan()
        {
            return fail("cost bounds must satisfy 0 < floor < ceiling <= 1");
        }
        if self.n_sectors < 3 {
            return fail("n_sectors must be >= 3");
        }
        if !positive(self.max_ray) {
            return fail("max_ray must be > 0");
        }
        if !positive(self.window_duration) {
            return fail("window_duration must be > 0");
        }
        if self.avg_turn_trigger < 0.0 || self.max_turn_trigger < 0.0 {
            return fail("turn triggers must be >= 0");
        }
        if !positive(self.assoc_radius) {
            return fail("assoc_radius must be > 0");
        }
        if self.decay_rate < 0.0 || self.retention < 0.0 {
            return fail("decay_rate and retention must be >= 0");
        }
        if !positive(self.obstacle_clearance) {
            return fail("obstacle_clearance must be > 0");
        }
        for d in self
            .q_base_diag
            .iter()
            .chain(&self.r_base_diag)
            .chain(&self.p0_diag)
        {
            if !d.is_finite() || *d < 0.0 {
                return fail("noise diagonals must be finite and >= 0");
            }
        }
        Ok(())
    }
}

/// Normalize an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> Result<f64, ModelError> {
    if !theta.is_finite() {
        return Err(ModelError::NonFinite("wrap_angle"));
    }
    Ok(wrap(theta))
}

/// Infallible wrap for values already known to be finite.
pub(crate) fn wrap(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Rotate a covariance by `theta`: `R(theta) * C * R(theta)^T`, expanded in
/// closed form so symmetry of the result is structural.
pub fn rotate_cov(cov: Cov2, theta: f64) -> Result<Cov2, ModelError> {
    if !theta.is_finite() {
        return Err(ModelError::NonFinite("rotate_cov angle"));
    }
    // Re-validate in case the value was constructed by hand.
    let cov = Cov2::new(cov.c_xx, cov.c_xy, cov.c_yx, cov.c_yy)?;
    let (a, d) = (cov.c_xx, cov.c_yy);
    let b = 0.5 * (cov.c_xy + cov.c_yx);
    let (s, c) = theta.sin_cos();
    let m00 = c * c * a - 2.0 * c * s * b + s * s * d;
    let m11 = s * s * a + 2.0 * c * s * b + c * c * d;
    let off = c * s * (a - d) + (c * c - s * s) * b;
    Cov2::new(m00, off, off, m11)
}
