//! Scoring of published predictions against ground truth.
//!
//! Each published region is scored at every tick it is published: its error
//! is the distance to the nearest ground-truth entity, and it is categorized
//! as Agent, Obstacle, Unseen (nearest entity occluded or out of the field
//! of view — the occlusion-success case), or Incorrect when the error
//! exceeds the footprint threshold. Reports bin the categories by distance
//! from the robot and pair every prediction's cost with its error.

use crate::config::RunConfig;
use crate::model::Vec2;
use crate::occlusion_map::CostedObstacle;
use crate::pipeline::{OcclusionPipeline, PipelineError};
use crate::sim::{generate_scenario, run_episode, EpisodeLog, SimError, TruthSnapshot};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A prediction is incorrect when its error exceeds the 0.4 m footprint.
pub const INCORRECT_THRESHOLD: f64 = 0.40;

/// Distance bins of the report: six half-open 0.5 m ranges up to 3 m.
pub const N_BINS: usize = 6;
pub const BIN_WIDTH: f64 = 0.5;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    Agent,
    Obstacle,
    Incorrect,
    Unseen,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Agent,
        Category::Obstacle,
        Category::Incorrect,
        Category::Unseen,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Category::Agent => "agent",
            Category::Obstacle => "obstacle",
            Category::Incorrect => "incorrect",
            Category::Unseen => "unseen",
        }
    }
}

/// One scored prediction at one tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredPrediction {
    pub prediction: CostedObstacle,
    /// Distance to the nearest ground-truth entity, meters.
    pub error: f64,
    pub category: Category,
    /// Distance from the robot to the prediction, meters.
    pub robot_distance: f64,
    pub tick: u64,
}

/// Nearest entity to a point: distance plus whether it was visible.
/// `boundary` measures to footprint edges instead of centers.
fn nearest_entity(point: Vec2, truth: &TruthSnapshot, boundary: bool) -> Option<(f64, bool)> {
    let mut best: Option<(f64, bool)> = None;
    for a in &truth.agents {
        let mut d = point.distance(a.position);
        if boundary {
            d = (d - 0.2).max(0.0);
        }
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, a.visible));
        }
    }
    for o in &truth.obstacles {
        let mut d = point.distance(o.center);
        if boundary {
            d = (d - o.radius).max(0.0);
        }
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, o.visible));
        }
    }
    best
}

/// Distance from a prediction to the closest entity; infinite in an empty
/// world (such a prediction is necessarily incorrect).
pub fn prediction_error(point: Vec2, truth: &TruthSnapshot) -> f64 {
    nearest_entity(point, truth, false).map_or(f64::INFINITY, |(d, _)| d)
}

/// Category of a scored prediction.
///
/// Incorrect when the error exceeds the threshold; otherwise the nearest
/// entity decides: a visible agent or visible obstacle claims the
/// prediction, anything the robot cannot currently see makes it Unseen.
pub fn classify(point: Vec2, truth: &TruthSnapshot, boundary: bool) -> (f64, Category) {
    let Some((error, visible)) = nearest_entity(point, truth, boundary) else {
        return (f64::INFINITY, Category::Incorrect);
    };
    if error > INCORRECT_THRESHOLD {
        return (error, Category::Incorrect);
    }
    if !visible {
        return (error, Category::Unseen);
    }
    // Re-resolve which kind of entity is nearest for the visible split.
    let nearest_is_agent = truth
        .agents
        .iter()
        .map(|a| {
            let d = point.distance(a.position);
            if boundary {
                (d - 0.2).max(0.0)
            } else {
                d
            }
        })
        .fold(f64::INFINITY, f64::min)
        <= truth
            .obstacles
            .iter()
            .map(|o| {
                let d = point.distance(o.center);
                if boundary {
                    (d - o.radius).max(0.0)
                } else {
                    d
                }
            })
            .fold(f64::INFINITY, f64::min);
    if nearest_is_agent {
        (error, Category::Agent)
    } else {
        (error, Category::Obstacle)
    }
}

/// Score every published prediction of one tick against its truth snapshot.
pub fn score_published(
    published: &[CostedObstacle],
    truth: &TruthSnapshot,
    robot: Vec2,
    tick: u64,
    boundary: bool,
) -> Vec<ScoredPrediction> {
    published
        .iter()
        .map(|p| {
            let (error, category) = classify(p.obstacle.mean, truth, boundary);
            ScoredPrediction {
                prediction: *p,
                error,
                category,
                robot_distance: p.obstacle.mean.distance(robot),
                tick,
            }
        })
        .collect()
}

/// Per-bin category percentages, the tabular report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceBinReport {
    /// `[lo, hi)` per row, meters; the last row is closed at 3.0.
    pub ranges: Vec<(f64, f64)>,
    /// Percentages per row: agent, obstacle, incorrect, unseen.
    /// `None` when the row holds no samples.
    pub rows: Vec<Option<[f64; 4]>>,
    pub counts: Vec<usize>,
}

fn bin_of(robot_distance: f64) -> Option<usize> {
    if !(0.0..=N_BINS as f64 * BIN_WIDTH).contains(&robot_distance) {
        return None;
    }
    Some(((robot_distance / BIN_WIDTH) as usize).min(N_BINS - 1))
}

pub fn bin_report(scored: &[ScoredPrediction]) -> DistanceBinReport {
    let mut counts = vec![[0usize; 4]; N_BINS];
    for s in scored {
        let Some(bin) = bin_of(s.robot_distance) else {
            continue;
        };
        let slot = Category::ALL
            .iter()
            .position(|c| *c == s.category)
            .expect("category is one of the four");
        counts[bin][slot] += 1;
    }
    let ranges = (0..N_BINS)
        .map(|i| (i as f64 * BIN_WIDTH, (i + 1) as f64 * BIN_WIDTH))
        .collect();
    let mut rows = Vec::with_capacity(N_BINS);
    let mut totals = Vec::with_capacity(N_BINS);
    for bin in counts {
        let total: usize = bin.iter().sum();
        totals.push(total);
        if total == 0 {
            rows.push(None);
        } else {
            let mut row = [0.0; 4];
            for (slot, n) in bin.iter().enumerate() {
                row[slot] = 100.0 * *n as f64 / total as f64;
            }
            rows.push(Some(row));
        }
    }
    DistanceBinReport {
        ranges,
        rows,
        counts: totals,
    }
}

impl DistanceBinReport {
    /// Percentage of one category in one row, zero for empty rows.
    pub fn percentage(&self, bin: usize, category: Category) -> f64 {
        let slot = Category::ALL.iter().position(|c| *c == category).unwrap();
        self.rows[bin].map_or(0.0, |row| row[slot])
    }

    /// CSV with one row per distance range. Empty rows leave the
    /// percentage cells blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("range,agent_pct,obstacle_pct,incorrect_pct,unseen_pct,n\n");
        for (i, range) in self.ranges.iter().enumerate() {
            let cells = match self.rows[i] {
                Some(row) => row
                    .iter()
                    .map(|v| format!("{v:.2}"))
                    .collect::<Vec<_>>()
                    .join(","),
                None => ",,,".to_string(),
            };
            out.push_str(&format!(
                "{:.1}-{:.1},{},{}\n",
                range.0, range.1, cells, self.counts[i]
            ));
        }
        out
    }
}

/// One scatter record per scored prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub cost: f64,
    pub error: f64,
    pub category: Category,
    pub robot_distance: f64,
}

/// Mean error of one category within one cost decile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecileMean {
    /// Decile bounds `[lo, hi)` over the cost axis; the last is closed.
    pub cost_lo: f64,
    pub cost_hi: f64,
    pub category: Category,
    pub mean_error: f64,
    pub n: usize,
}

/// Scatter records plus per-cost-decile mean error per category.
pub fn scatter_data(scored: &[ScoredPrediction]) -> (Vec<ScatterPoint>, Vec<DecileMean>) {
    let points: Vec<ScatterPoint> = scored
        .iter()
        .map(|s| ScatterPoint {
            cost: s.prediction.cost,
            error: s.error,
            category: s.category,
            robot_distance: s.robot_distance,
        })
        .collect();

    let mut sums = vec![[(0.0f64, 0usize); 4]; 10];
    for p in &points {
        let decile = ((p.cost * 10.0) as usize).min(9);
        let slot = Category::ALL.iter().position(|c| *c == p.category).unwrap();
        sums[decile][slot].0 += p.error;
        sums[decile][slot].1 += 1;
    }
    let mut deciles = Vec::new();
    for (d, row) in sums.iter().enumerate() {
        for (slot, (sum, n)) in row.iter().enumerate() {
            if *n > 0 {
                deciles.push(DecileMean {
                    cost_lo: d as f64 / 10.0,
                    cost_hi: (d + 1) as f64 / 10.0,
                    category: Category::ALL[slot],
                    mean_error: sum / *n as f64,
                    n: *n,
                });
            }
        }
    }
    (points, deciles)
}

pub fn scatter_csv(points: &[ScatterPoint]) -> String {
    let mut out = String::from("cost,error,category,robot_distance\n");
    for p in points {
        out.push_str(&format!(
            "{:.6},{:.6},{},{:.6}\n",
            p.cost,
            p.error,
            p.category.label(),
            p.robot_distance
        ));
    }
    out
}

/// Published obstacles of one tick, for streaming and replay comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickOutput {
    pub tick: u64,
    pub time: f64,
    pub published: Vec<CostedObstacle>,
}

/// Drive the pipeline over a recorded episode.
pub fn pipeline_outputs(
    log: &EpisodeLog,
    cfg: &RunConfig,
) -> Result<Vec<TickOutput>, EvalError> {
    let mut pipeline = OcclusionPipeline::new(cfg.pipeline.clone());
    let mut outputs = Vec::with_capacity(log.ticks.len());
    for record in &log.ticks {
        let scan = record.scan.to_scan();
        let published = pipeline.tick(&scan, &record.observations, record.time)?;
        outputs.push(TickOutput {
            tick: record.tick,
            time: record.time,
            published,
        });
    }
    Ok(outputs)
}

/// Score a recorded episode end to end. Scoring is a pure function of the
/// log and config, so replaying a serialized log reproduces live results.
pub fn score_episode(log: &EpisodeLog, cfg: &RunConfig) -> Result<Vec<ScoredPrediction>, EvalError> {
    let outputs = pipeline_outputs(log, cfg)?;
    let robot = log.header.scenario.robot_position;
    let mut scored = Vec::new();
    for (record, output) in log.ticks.iter().zip(&outputs) {
        scored.extend(score_published(
            &output.published,
            &record.truth,
            robot,
            record.tick,
            cfg.eval.boundary_error,
        ));
    }
    Ok(scored)
}

/// Headline numbers of an aggregate run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub n_seeds: usize,
    pub seeds_failed: Vec<u64>,
    pub total_predictions: usize,
    pub category_counts: Vec<(String, usize)>,
    /// Mean error of Unseen-category predictions, meters.
    pub mean_unseen_error: Option<f64>,
    /// Incorrect percentage per distance bin (zero for empty bins).
    pub incorrect_pct_by_bin: Vec<f64>,
    /// Unseen percentage per distance bin (zero for empty bins).
    pub unseen_pct_by_bin: Vec<f64>,
    /// Fraction of Unseen predictions published at cost >= 0.9 / <= 0.15.
    pub unseen_high_cost_frac: Option<f64>,
    pub unseen_low_cost_frac: Option<f64>,
}

/// Everything `run_trials` produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialAggregate {
    pub scored: Vec<ScoredPrediction>,
    pub bins: DistanceBinReport,
    pub scatter: Vec<ScatterPoint>,
    pub deciles: Vec<DecileMean>,
    pub summary: TrialSummary,
}

fn summarize(
    scored: &[ScoredPrediction],
    bins: &DistanceBinReport,
    n_seeds: usize,
    seeds_failed: Vec<u64>,
) -> TrialSummary {
    let unseen: Vec<&ScoredPrediction> = scored
        .iter()
        .filter(|s| s.category == Category::Unseen)
        .collect();
    let mean_unseen_error = if unseen.is_empty() {
        None
    } else {
        Some(unseen.iter().map(|s| s.error).sum::<f64>() / unseen.len() as f64)
    };
    let frac = |pred: &dyn Fn(f64) -> bool| {
        if unseen.is_empty() {
            None
        } else {
            Some(
                unseen
                    .iter()
                    .filter(|s| pred(s.prediction.cost))
                    .count() as f64
                    / unseen.len() as f64,
            )
        }
    };
    let mut category_counts = Vec::new();
    for c in Category::ALL {
        category_counts.push((
            c.label().to_string(),
            scored.iter().filter(|s| s.category == c).count(),
        ));
    }
    TrialSummary {
        n_seeds,
        seeds_failed,
        total_predictions: scored.len(),
        category_counts,
        mean_unseen_error,
        incorrect_pct_by_bin: (0..N_BINS)
            .map(|b| bins.percentage(b, Category::Incorrect))
            .collect(),
        unseen_pct_by_bin: (0..N_BINS)
            .map(|b| bins.percentage(b, Category::Unseen))
            .collect(),
        unseen_high_cost_frac: frac(&|c| c >= 0.9),
        unseen_low_cost_frac: frac(&|c| c <= 0.15),
    }
}

/// Run `n_seeds` seeded trials through the full pipeline and aggregate.
///
/// Seeds run in parallel; aggregation is a sequential reduction in seed
/// order, so the result is deterministic. Scenario-generation failures are
/// recorded per seed without aborting the batch.
pub fn run_trials(n_seeds: usize, cfg: &RunConfig) -> Result<TrialAggregate, EvalError> {
    let per_seed: Vec<(u64, Result<Vec<ScoredPrediction>, String>)> = (0..n_seeds as u64)
        .into_par_iter()
        .map(|seed| {
            let result = generate_scenario(seed, &cfg.sim)
                .map_err(|e| e.to_string())
                .and_then(|scenario| {
                    run_episode(&scenario, &cfg.sim, cfg.eval.horizon)
                        .map_err(|e| e.to_string())
                })
                .and_then(|log| score_episode(&log, cfg).map_err(|e| e.to_string()));
            (seed, result)
        })
        .collect();

    let mut scored = Vec::new();
    let mut seeds_failed = Vec::new();
    for (seed, result) in per_seed {
        match result {
            Ok(mut s) => scored.append(&mut s),
            Err(_) => seeds_failed.push(seed),
        }
    }

    let bins = bin_report(&scored);
    let (scatter, deciles) = scatter_data(&scored);
    let summary = summarize(&scored, &bins, n_seeds, seeds_failed);
    Ok(TrialAggregate {
        scored,
        bins,
        scatter,
        deciles,
        summary,
    })
}
