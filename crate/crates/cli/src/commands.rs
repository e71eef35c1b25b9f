//! The three subcommands: single estimation, MISE simulation study, and the
//! backend timing benchmark.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use regconv::datagen::generate_scenario;
use regconv::estimators::Grid;
use regconv::harness::{
    self, convergence_slopes, mise_study, timing_bench, MiseStudyConfig, TimingConfig,
};
use regconv::{bandwidth, DensityEstimate};

use crate::config::{Manifest, RunConfig};
use crate::input::read_data_csv;
use crate::CliError;

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("cannot create output directory {}: {e}", dir.display())))
}

fn out_file(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    let file = File::create(&path)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn write_manifest(
    cfg: &RunConfig,
    command: &str,
    failures: Vec<serde_json::Value>,
) -> Result<(), CliError> {
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config: cfg.clone(),
        failures,
    };
    let mut out = out_file(&cfg.out_dir, "manifest.json")?;
    serde_json::to_writer_pretty(&mut out, &manifest)
        .map_err(|e| CliError::Input(format!("cannot serialize manifest: {e}")))?;
    writeln!(out).map_err(|e| CliError::Input(e.to_string()))
}

fn write_estimate(
    dir: &Path,
    stem: &str,
    estimate: &DensityEstimate,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut csv = out_file(dir, &format!("{stem}.csv"))?;
    estimate.write_csv(&mut csv).map_err(|e| CliError::Input(e.to_string()))?;
    let mut meta = out_file(dir, &format!("{stem}.meta.json"))?;
    serde_json::to_writer_pretty(&mut meta, &estimate.metadata(seed))
        .map_err(|e| CliError::Input(e.to_string()))?;
    writeln!(meta).map_err(|e| CliError::Input(e.to_string()))
}

/// Estimates both densities for one sample and writes the CSV/JSON artifacts.
pub fn cmd_estimate(cfg: &RunConfig) -> Result<(), CliError> {
    ensure_out_dir(&cfg.out_dir)?;
    let pipeline = cfg.pipeline()?;
    let v = cfg.grid_size.expect("resolved");
    let (complete, aux, seed) = match &cfg.data {
        Some(path) => {
            let (complete, aux) = read_data_csv(path)?;
            (complete, aux, None)
        }
        None => {
            let spec = cfg.scenario.spec();
            spec.validate().map_err(|e| CliError::Input(e.to_string()))?;
            let (complete, aux) = generate_scenario(&spec, cfg.n, cfg.tau * cfg.n, cfg.seed)
                .map_err(|e| CliError::Input(e.to_string()))?;
            (complete, aux, Some(cfg.seed))
        }
    };
    let responses: Vec<f64> = complete.responses().iter().cloned().collect();
    let h_rp = bandwidth::bandwidth_rp(&responses, &pipeline.rule)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let grid = Grid::from_sample(&responses, h_rp, v)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let pair = harness::estimate_pair(&complete, &aux, &grid, &pipeline)?;
    write_estimate(&cfg.out_dir, "rp_estimate", &pair.rp, seed)?;
    write_estimate(&cfg.out_dir, "mr_estimate", &pair.conv, seed)?;
    write_manifest(cfg, "estimate", Vec::new())?;
    println!(
        "estimate: N = {}, M = {}, grid = {} points -> {}",
        complete.n(),
        aux.m(),
        grid.len(),
        cfg.out_dir.display()
    );
    Ok(())
}

/// Runs the MISE study and writes `mise_table.csv` and `slopes.json`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    ensure_out_dir(&cfg.out_dir)?;
    let spec = cfg.scenario.spec();
    spec.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let mut reference = cfg.reference;
    reference.grid_size = cfg.grid_size.expect("resolved");
    let study_cfg = MiseStudyConfig {
        scenario: spec,
        n_values: cfg.n_values.clone(),
        tau_values: cfg.tau_values.clone(),
        replications: cfg.replications,
        seed: cfg.seed,
        reference,
        pipeline: cfg.pipeline()?,
    };
    let study = mise_study(&study_cfg)?;
    let mut table = out_file(&cfg.out_dir, "mise_table.csv")?;
    harness::write_mise_csv(&study.cells, &mut table)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let slopes = convergence_slopes(&study.cells);
    let mut slopes_out = out_file(&cfg.out_dir, "slopes.json")?;
    serde_json::to_writer_pretty(&mut slopes_out, &slopes)
        .map_err(|e| CliError::Input(e.to_string()))?;
    writeln!(slopes_out).map_err(|e| CliError::Input(e.to_string()))?;
    for failure in &study.failures {
        eprintln!(
            "cell N = {}, tau = {} failed: {}",
            failure.n_complete, failure.tau, failure.message
        );
    }
    let failures = study
        .failures
        .iter()
        .map(|f| serde_json::to_value(f).expect("serializable"))
        .collect();
    write_manifest(cfg, "simulate", failures)?;
    println!(
        "simulate: {} cells ({} failed) -> {}",
        study.cells.len(),
        study.failures.len(),
        cfg.out_dir.display()
    );
    Ok(())
}

/// Times the backends over the M grid and writes `timing.csv`.
pub fn cmd_bench(cfg: &RunConfig) -> Result<(), CliError> {
    ensure_out_dir(&cfg.out_dir)?;
    let spec = cfg.scenario.spec();
    spec.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let pipeline = cfg.pipeline()?;
    let timing_cfg = TimingConfig {
        scenario: spec,
        n_complete: cfg.n,
        grid_size: cfg.grid_size.expect("resolved"),
        m_values: cfg.m_values.clone(),
        backends: cfg.backends.clone(),
        seed: cfg.seed,
        runs: cfg.runs,
        rule: pipeline.rule,
        select_on: pipeline.select_on,
    };
    let rows = timing_bench(&timing_cfg)?;
    let mut out = out_file(&cfg.out_dir, "timing.csv")?;
    harness::write_timing_csv(&rows, &mut out).map_err(|e| CliError::Input(e.to_string()))?;
    write_manifest(cfg, "bench", Vec::new())?;
    println!("bench: {} rows -> {}", rows.len(), cfg.out_dir.display());
    Ok(())
}
