//! `dea-ar`: score DMUs under assurance-region SBM models and run the
//! property suite from the command line.

mod config;
mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use dea_core::closest::{f_b, f_s};
use dea_core::measures::{brwz_ar, sbm_ar};
use dea_core::verify::run_axiom_suite;
use dea_core::{Dataset, EfficiencyReport, Model, Technology};
use log::warn;
use rayon::prelude::*;

use config::{parse_models, Format, RunConfig};
use render::{DmuResult, ModelResult, ScoreRun};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_ASSUMPTIONS: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;
pub const EXIT_PROPERTY: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "dea-ar", version, about = "DEA efficiency scores under assurance regions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score every DMU under the selected models
    Score {
        /// CSV with a `dmu` column followed by `in:` and `out:` columns
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated list: sbm-ar, brwz-ar, max-sbm-ar, max-brwz-ar
        #[arg(long, value_delimiter = ',')]
        models: Vec<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Worker threads; 0 picks one per core
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Check the regularity assumptions of the configured assurance region
    CheckAr {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run the axiom property suite on the dataset's technology
    Verify {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

/// An error paired with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(error: anyhow::Error) -> Self {
        Failure {
            code: classify(&error),
            error,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure::input(error)
    }
}

pub fn exit_code(err: &dea_core::Error) -> u8 {
    use dea_core::Error as E;
    match err {
        E::InvalidData(_) | E::InvalidRegion(_) | E::Dimension(_) | E::ZeroCoordinate(..) | E::OutsideTechnology => {
            EXIT_INPUT
        }
        E::Assumptions(_) => EXIT_ASSUMPTIONS,
        E::Lp(_) | E::Unbounded(_) | E::DualMismatch { .. } | E::Internal(_) => EXIT_SOLVER,
    }
}

fn classify(error: &anyhow::Error) -> u8 {
    error
        .chain()
        .find_map(|e| e.downcast_ref::<dea_core::Error>())
        .map_or(EXIT_INPUT, exit_code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn,dea_core=error"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score {
            data,
            config,
            models,
            format,
            jobs,
        } => score(data, &config, &models, format, jobs),
        Command::CheckAr { config, data, format } => check_ar(&config, data, format),
        Command::Verify {
            data,
            config,
            seed,
            samples,
            format,
        } => verify(data, &config, seed, samples, format),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn load_dataset(cli: Option<PathBuf>, cfg: &RunConfig) -> anyhow::Result<Dataset> {
    let path = cli
        .or_else(|| cfg.dataset.clone())
        .ok_or_else(|| anyhow!("no dataset given (pass --data or set 'dataset' in the config)"))?;
    Ok(Dataset::from_csv_path(&path).with_context(|| format!("cannot load {}", path.display()))?)
}

fn technology(data: Option<PathBuf>, cfg: &RunConfig) -> Result<Technology, Failure> {
    let ds = load_dataset(data, cfg)?;
    let region = cfg.ar.build(ds.num_inputs(), ds.num_outputs())?;
    let tol = cfg.tolerances.resolve()?;
    Technology::with_tolerances(ds, region, tol).map_err(|e| Failure {
        code: exit_code(&e),
        error: e.into(),
    })
}

pub fn score_one(tech: &Technology, model: Model, x: &[f64], y: &[f64]) -> dea_core::Result<EfficiencyReport> {
    match model {
        Model::SbmAr => sbm_ar(tech, x, y),
        Model::BrwzAr => brwz_ar(tech, x, y),
        Model::MaxSbmAr => f_s(tech, x, y),
        Model::MaxBrwzAr => f_b(tech, x, y),
    }
}

fn score(
    data: Option<PathBuf>,
    config: &Path,
    models: &[String],
    format: Option<Format>,
    jobs: usize,
) -> Result<u8, Failure> {
    let cfg = RunConfig::load(config)?;
    let models = parse_models(if models.is_empty() { &cfg.models } else { models })?;
    let format = format.or(cfg.format).unwrap_or(Format::Table);
    let tech = technology(data, &cfg)?;

    if !tech.assumptions().holds() {
        if let Some(m) = models.iter().find(|m| m.is_max_model()) {
            return Err(Failure {
                code: EXIT_ASSUMPTIONS,
                error: anyhow!("{m} requires the assurance region to satisfy its regularity assumptions; run check-ar"),
            });
        }
        warn!("assurance region fails its regularity assumptions; classic scores may be negative");
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::input(anyhow!("cannot start worker pool: {e}")))?;
    let dmus: Vec<DmuResult> = pool.install(|| {
        (0..tech.n())
            .into_par_iter()
            .map(|j| {
                let (x, y) = tech.dmu(j);
                let results = models
                    .iter()
                    .map(|&model| match score_one(&tech, model, x, y) {
                        Ok(report) => ModelResult {
                            model,
                            report: Some(report),
                            error: None,
                            exit_code: 0,
                        },
                        Err(e) => ModelResult {
                            model,
                            report: None,
                            error: Some(e.to_string()),
                            exit_code: exit_code(&e),
                        },
                    })
                    .collect();
                DmuResult {
                    name: tech.data().names[j].clone(),
                    results,
                }
            })
            .collect()
    });

    let mut code = 0;
    for dmu in &dmus {
        for r in &dmu.results {
            if let Some(rep) = &r.report {
                for w in &rep.warnings {
                    warn!("{} {}: {w}", dmu.name, r.model);
                }
            }
            if let Some(e) = &r.error {
                eprintln!("error: {} {}: {e}", dmu.name, r.model);
            }
            code = code.max(r.exit_code);
        }
    }
    let run = ScoreRun {
        models,
        input_names: tech.data().input_names.clone(),
        output_names: tech.data().output_names.clone(),
        assumptions: tech.assumptions().clone(),
        dmus,
    };
    let text = match format {
        Format::Table => render::table(&run),
        Format::Json => render::json(&run)?,
        Format::Csv => render::csv(&run)?,
    };
    print!("{text}");
    Ok(code)
}

fn check_ar(config: &Path, data: Option<PathBuf>, format: Option<Format>) -> Result<u8, Failure> {
    let cfg = RunConfig::load(config)?;
    let (m, s) = match cfg.ar.dims() {
        Some(dims) => dims,
        None => {
            let ds = load_dataset(data, &cfg)?;
            (ds.num_inputs(), ds.num_outputs())
        }
    };
    let region = cfg.ar.build(m, s)?;
    let report = dea_core::ar::check_assumptions(&region).map_err(|e| Failure {
        code: exit_code(&e),
        error: e.into(),
    })?;
    let text = match format.or(cfg.format).unwrap_or(Format::Table) {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?
        ),
        _ => render::assumptions(&report),
    };
    print!("{text}");
    Ok(if report.holds() { 0 } else { EXIT_ASSUMPTIONS })
}

fn verify(
    data: Option<PathBuf>,
    config: &Path,
    seed: Option<u64>,
    samples: usize,
    format: Option<Format>,
) -> Result<u8, Failure> {
    let cfg = RunConfig::load(config)?;
    let tech = technology(data, &cfg)?;
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let report = run_axiom_suite(&tech, seed, samples).map_err(|e| Failure {
        code: exit_code(&e),
        error: e.into(),
    })?;
    let text = match format.or(cfg.format).unwrap_or(Format::Table) {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?
        ),
        _ => render::suite(&report),
    };
    print!("{text}");
    Ok(if report.all_passed() { 0 } else { EXIT_PROPERTY })
}
