//! Batch front door for spatial and spatio-temporal point-pattern
//! analysis. Subcommands: `run` (execute a pipeline), `validate` (dry-run
//! config check), `synth` (draw a synthetic pattern to a table).
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 degenerate statistic.

mod config;
mod data;
mod manifest;
mod pipelines;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stpp_core::error::Error;

use config::{AnalysisConfig, SynthSpecFile};
use manifest::RunManifest;
use pipelines::{run_pipeline, Pipeline};

#[derive(Parser)]
#[command(name = "stpp", version, about = "spatial / spatio-temporal point-pattern analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one analysis pipeline and write its outputs plus a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        pipeline: Pipeline,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores). Results do not depend on
        /// this value.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and sanity-check a configuration without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Draw a synthetic pattern from a generator spec and write it as a
    /// delimited table.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Domain(_) | Error::InsufficientData(_) | Error::EmptyPattern(_) | Error::Io(_) => 3,
        Error::DegenerateStatistic(_) => 4,
    }
}

fn execute(cli: Cli) -> stpp_core::Result<()> {
    match cli.command {
        Command::Run {
            config,
            pipeline,
            seed,
            out,
            threads,
        } => {
            let started = std::time::Instant::now();
            let (mut cfg, config_bytes) = AnalysisConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = Some(seed);
            }
            if let Some(threads) = threads.or(cfg.threads) {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            }
            let out_root = out
                .or_else(|| cfg.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out"));

            let output = run_pipeline(&cfg, pipeline, &out_root)?;
            for line in &output.summary {
                println!("{line}");
            }
            for warning in &output.warnings {
                eprintln!("warning: {warning}");
            }

            let manifest = RunManifest::new(
                pipeline.name(),
                &config_bytes,
                cfg.seed,
                output
                    .files
                    .iter()
                    .map(|p| p.to_string_lossy().into_owned())
                    .collect(),
                output.warnings.clone(),
                started.elapsed().as_millis(),
            );
            manifest.write(&out_root.join("manifest.toml"))?;
            Ok(())
        }
        Command::Validate { config } => {
            let (cfg, _) = AnalysisConfig::load(&config)?;
            validate_config(&cfg)?;
            println!("configuration OK");
            Ok(())
        }
        Command::Synth { spec, out } => {
            let spec = SynthSpecFile::load(&spec)?;
            let window = spec.window.build()?;
            let time_window = spec.time_window()?;
            let generated = stpp_core::synth::generate(
                &spec.generator,
                &window,
                time_window.as_ref(),
                spec.seed,
            )?;
            let mut buf = Vec::new();
            match generated {
                stpp_core::synth::Generated::Points(p) => {
                    stpp_core::table::write_points(&mut buf, &p)?;
                    println!("wrote {} points", p.len());
                }
                stpp_core::synth::Generated::Marked(m) => {
                    let case = spec.case_value.as_deref().unwrap_or("case");
                    let control = spec.control_value.as_deref().unwrap_or("control");
                    stpp_core::table::write_marked(&mut buf, &m, case, control)?;
                    println!("wrote {} marked points", m.len());
                }
                stpp_core::synth::Generated::SpaceTime(st) => {
                    stpp_core::table::write_st(&mut buf, &st)?;
                    println!("wrote {} space-time events", st.len());
                }
            }
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(&out, buf)?;
            Ok(())
        }
    }
}

/// Dry-run checks: referenced files exist, the window builds, grids and
/// Monte Carlo parameters are sane.
fn validate_config(cfg: &AnalysisConfig) -> stpp_core::Result<()> {
    if let Some(window) = &cfg.window {
        window.build()?;
    }
    if let Some(input) = &cfg.input {
        if !input.path.exists() {
            return Err(Error::Config(format!(
                "input file {} does not exist",
                input.path.display()
            )));
        }
        cfg.delimiter()?;
        if input.label.is_some() && (input.case_value.is_none() || input.control_value.is_none()) {
            return Err(Error::Config(
                "label column needs case_value and control_value".into(),
            ));
        }
        if input.time.is_some() {
            // Resolves the epoch/resolution rules and the header mapping.
            data::prepare_table(cfg)?;
        }
    }
    if let Some(g) = cfg.grids.s_max {
        if g.is_nan() || g <= 0.0 {
            return Err(Error::Config("grids.s_max must be positive".into()));
        }
    }
    if let Some(g) = cfg.grids.t_max {
        if g.is_nan() || g <= 0.0 {
            return Err(Error::Config("grids.t_max must be positive".into()));
        }
    }
    if cfg.mc.m() < 20 {
        return Err(Error::Config("mc.m must be at least 20".into()));
    }
    if cfg.mc.variance_permutations() < 2 {
        return Err(Error::Config(
            "mc.variance_permutations must be at least 2".into(),
        ));
    }
    if cfg.mc.envelope_replicates() < 2 {
        return Err(Error::Config(
            "mc.envelope_replicates must be at least 2".into(),
        ));
    }
    let level = cfg.mc.level();
    if !(0.0 < level && level < 1.0) {
        return Err(Error::Config("mc.level must lie in (0, 1)".into()));
    }
    if let Some(i) = &cfg.intensity {
        if i.bandwidth.is_nan() || i.bandwidth <= 0.0 {
            return Err(Error::Config("intensity.bandwidth must be positive".into()));
        }
    }
    Ok(())
}
