//! `occlusim`: run the occlusion-aware obstacle prediction pipeline against
//! the bundled crowd simulator, evaluate seeded batches, or replay logs.

mod manifest;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use manifest::RunManifest;
use occlusion_core::eval::{
    bin_report, pipeline_outputs, scatter_csv, scatter_data, score_episode, score_published,
    run_trials,
};
use occlusion_core::sim::{generate_scenario, run_episode, EpisodeLog};
use occlusion_core::RunConfig;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "occlusim", version, about = "Occlusion-aware obstacle prediction: simulate, evaluate, replay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded episode end to end: writes the episode log, the
    /// published-obstacle stream, and a manifest.
    Simulate {
        /// TOML config; every key optional, defaults documented in the repo.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "OCCLUSIM_SEED")]
        seed: u64,
        #[arg(long, env = "OCCLUSIM_OUT")]
        out: PathBuf,
    },
    /// Run a batch of seeded trials and write the distance-bin CSV, the
    /// cost/error scatter CSV, and the summary JSON.
    Evaluate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seeds 0..N run through the full pipeline.
        #[arg(long, env = "OCCLUSIM_SEEDS")]
        seeds: usize,
        #[arg(long, env = "OCCLUSIM_OUT")]
        out: PathBuf,
        /// Worker threads for the seed fan-out; default: all cores.
        #[arg(long, env = "OCCLUSIM_WORKERS")]
        workers: Option<usize>,
    },
    /// Re-run prediction and evaluation offline from a recorded episode log.
    /// Prints the summary JSON; optionally writes the full report set.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let cfg: RunConfig = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(cfg)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

const PUBLISHED_SCHEMA: &str = "published/1";

fn cmd_simulate(config: Option<&Path>, seed: u64, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let episode_path = out.join(format!("episode_{seed}.jsonl"));
    let published_path = out.join(format!("published_{seed}.jsonl"));
    let manifest_path = out.join("manifest.json");

    let mut manifest = RunManifest::new(
        "simulate",
        cfg.clone(),
        vec![seed],
        vec![
            episode_path.display().to_string(),
            published_path.display().to_string(),
        ],
    );
    manifest.write(&manifest_path)?;

    let scenario = generate_scenario(seed, &cfg.sim)?;
    let log = run_episode(&scenario, &cfg.sim, cfg.eval.horizon)?;

    let file = fs::File::create(&episode_path)
        .with_context(|| format!("creating {}", episode_path.display()))?;
    log.write_ndjson(BufWriter::new(file))?;

    let outputs = pipeline_outputs(&log, &cfg)?;
    let file = fs::File::create(&published_path)
        .with_context(|| format!("creating {}", published_path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(
        &mut w,
        &serde_json::json!({"schema": PUBLISHED_SCHEMA, "seed": seed}),
    )?;
    w.write_all(b"\n")?;
    for tick in &outputs {
        serde_json::to_writer(&mut w, tick)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;

    manifest.finish(&manifest_path)?;
    println!(
        "wrote {} ticks to {} and {}",
        outputs.len(),
        episode_path.display(),
        published_path.display()
    );
    Ok(())
}

fn write_reports(
    out: &Path,
    scored: &[occlusion_core::eval::ScoredPrediction],
    summary: &serde_json::Value,
) -> Result<()> {
    let bins = bin_report(scored);
    write_atomic(&out.join("bin_report.csv"), bins.to_csv().as_bytes())?;
    let (points, _) = scatter_data(scored);
    write_atomic(&out.join("scatter.csv"), scatter_csv(&points).as_bytes())?;
    write_atomic(
        &out.join("summary.json"),
        serde_json::to_string_pretty(summary)?.as_bytes(),
    )?;
    Ok(())
}

fn cmd_evaluate(config: Option<&Path>, seeds: usize, out: &Path, workers: Option<usize>) -> Result<()> {
    if seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("initializing worker pool")?;
    }
    let cfg = load_config(config)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let manifest_path = out.join("manifest.json");
    let mut manifest = RunManifest::new(
        "evaluate",
        cfg.clone(),
        (0..seeds as u64).collect(),
        ["bin_report.csv", "scatter.csv", "summary.json"]
            .iter()
            .map(|f| out.join(f).display().to_string())
            .collect(),
    );
    manifest.write(&manifest_path)?;

    let agg = run_trials(seeds, &cfg)?;
    let summary = serde_json::json!({
        "schema": "summary/1",
        "counting": "each published region is scored once per tick it is published",
        "summary": agg.summary,
        "decile_mean_error": agg.deciles,
    });
    write_reports(out, &agg.scored, &summary)?;

    manifest.finish(&manifest_path)?;
    println!(
        "evaluated {} seeds: {} predictions, reports in {}",
        seeds,
        agg.summary.total_predictions,
        out.display()
    );
    Ok(())
}

fn cmd_replay(log_path: &Path, config: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let cfg = load_config(config)?;
    let file = fs::File::open(log_path)
        .with_context(|| format!("opening log {}", log_path.display()))?;
    let log = EpisodeLog::read_ndjson(BufReader::new(file))?;

    let outputs = pipeline_outputs(&log, &cfg)?;
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
    // Identical to what score_episode computes; kept separate so the
    // published stream below shares the same outputs.
    debug_assert_eq!(scored, score_episode(&log, &cfg)?);

    let bins = bin_report(&scored);
    let (_, deciles) = scatter_data(&scored);
    let unseen: Vec<f64> = scored
        .iter()
        .filter(|s| s.category == occlusion_core::eval::Category::Unseen)
        .map(|s| s.error)
        .collect();
    let summary = serde_json::json!({
        "schema": "summary/1",
        "seed": log.header.seed,
        "counting": "each published region is scored once per tick it is published",
        "total_predictions": scored.len(),
        "mean_unseen_error": if unseen.is_empty() { None } else {
            Some(unseen.iter().sum::<f64>() / unseen.len() as f64)
        },
        "bin_csv": bins.to_csv(),
        "decile_mean_error": deciles,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);

    if let Some(out) = out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let manifest_path = out.join("manifest.json");
        let mut manifest = RunManifest::new(
            "replay",
            cfg.clone(),
            vec![log.header.seed],
            ["bin_report.csv", "scatter.csv", "summary.json", "published_replay.jsonl"]
                .iter()
                .map(|f| out.join(f).display().to_string())
                .collect(),
        );
        manifest.write(&manifest_path)?;
        write_reports(out, &scored, &summary)?;

        let path = out.join("published_replay.jsonl");
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(
            &mut w,
            &serde_json::json!({"schema": PUBLISHED_SCHEMA, "seed": log.header.seed}),
        )?;
        w.write_all(b"\n")?;
        for tick in &outputs {
            serde_json::to_writer(&mut w, tick)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        manifest.finish(&manifest_path)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, seed, out } => cmd_simulate(config.as_deref(), seed, &out),
        Command::Evaluate {
            config,
            seeds,
            out,
            workers,
        } => cmd_evaluate(config.as_deref(), seeds, &out, workers),
        Command::Replay { log, config, out } => {
            cmd_replay(&log, config.as_deref(), out.as_deref())
        }
    }
}
