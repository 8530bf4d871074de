//! Occlusion-aware obstacle prediction from pedestrian avoidance behavior.
//!
//! Visible people double as sensors: when an agent suddenly swerves, the
//! maneuver betrays something in its way, often outside the robot's own
//! field of view. This crate turns those maneuvers into Gaussian obstacle
//! estimates with occupancy timestamps, scrubs the estimates against LiDAR
//! sector evidence, fuses them across agents with a 7-state Kalman filter,
//! and publishes time-decaying cost values for a planner.
//!
//! The crate also ships a deterministic reaction-based crowd simulator and
//! an evaluation harness that scores published predictions against ground
//! truth over seeded trials.

pub mod clearing;
pub mod config;
pub mod eval;
pub mod fusion;
pub mod model;
pub mod occlusion_map;
pub mod pipeline;
pub mod predictor;
pub mod sim;
pub mod spatial;

pub use config::RunConfig;
pub use model::{AgentId, AgentObservation, Cov2, GaussianObstacle, ObstacleKind, PipelineConfig, Vec2};
pub use occlusion_map::CostedObstacle;
pub use pipeline::OcclusionPipeline;
