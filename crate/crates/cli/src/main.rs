use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use drfs::data::{write_csv, SyntheticDataset, SyntheticSpec};
use drfs::objective::Aggregation;
use drfs_cli::config::DataSource;
use drfs_cli::gradcheck::{run_gradcheck, GradcheckParams};
use drfs_cli::{exit, load_config, run_experiment, validate, write_bundle, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "drfs", version, about = "Distributionally robust feature selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write report.json, trace.csv, comparison.csv and alpha.json.
    Run(RunArgs),
    /// Check a config file and list every problem.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare the analytic gradient against finite differences.
    Gradcheck(GradcheckArgs),
    /// Write a synthetic dataset as CSV.
    GenerateData(GenerateArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds; overrides `seeds` in the config.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Seeds to optimize concurrently.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 3)]
    populations: usize,
    #[arg(long, default_value_t = 20)]
    rows: usize,
    #[arg(long, default_value_t = 5)]
    features: usize,
    #[arg(long, default_value_t = 10)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    mc_samples: usize,
    #[arg(long, default_value_t = 1000)]
    neighbors: usize,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Softmax temperature; hard max when omitted.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long, hide = true)]
    corrupt: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// Read the data section of this config instead of the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    dataset: u8,
    #[arg(long, default_value_t = 3600)]
    n_total: usize,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_run(a: RunArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&a.config)?;
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    let out_dir = a
        .out
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set output_dir".into()))?;
    let out = run_experiment(&cfg, RunOptions { parallel: a.parallel })?;
    let files = write_bundle(&out_dir, &out)?;
    for r in &out.report.results.seeds {
        println!("seed {}: selected {:?}", r.seed, r.selected.get("drfs").and_then(|v| v.first()));
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_validate(config: PathBuf) -> Result<(), CliError> {
    let cfg = load_config(&config)?;
    let diags = validate(&cfg);
    if diags.is_empty() {
        println!("{}: ok", config.display());
        Ok(())
    } else {
        Err(CliError::Invalid(diags))
    }
}

fn cmd_gradcheck(a: GradcheckArgs) -> Result<(), CliError> {
    let mut p = GradcheckParams {
        populations: a.populations,
        rows: a.rows,
        features: a.features,
        points: a.points,
        seed: a.seed,
        tolerance: a.tolerance,
        corrupt: a.corrupt,
        ..Default::default()
    };
    p.objective.mc_samples = a.mc_samples;
    p.objective.neighbors = a.neighbors;
    p.objective.lambda = a.lambda;
    p.objective.aggregation = a.beta.map_or(Aggregation::Hardmax, Aggregation::Softmax);
    let report = run_gradcheck(&p)?;
    for (i, pt) in report.points.iter().enumerate() {
        println!("point {i}: rel error {:.3e}", pt.rel_error);
    }
    println!("max relative error {:.3e} (tolerance {:.1e})", report.max_rel_error, report.tolerance);
    if report.passed {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(CliError::Gradcheck(report.max_rel_error))
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<(), CliError> {
    let (dataset, n_total, dim, seed) = match a.config {
        Some(path) => match load_config(&path)?.data {
            DataSource::Synthetic {
                dataset,
                n_total,
                dim,
                seed,
            } => (dataset, n_total, Some(dim), seed),
            DataSource::Csv { .. } => {
                return Err(CliError::Config("config data source is a CSV file, not synthetic".into()))
            }
        },
        None => (a.dataset, a.n_total, a.dim, a.seed),
    };
    let ds = SyntheticDataset::from_id(dataset).map_err(CliError::stage("generate"))?;
    let spec = SyntheticSpec::new(ds, n_total, dim.unwrap_or(ds.min_dim()), seed);
    let data = spec.generate().map_err(CliError::stage("generate"))?;
    let result = File::create(&a.out)
        .map_err(CliError::from)
        .and_then(|f| write_csv(&data, f).map_err(CliError::stage("write")));
    if result.is_err() {
        let _ = std::fs::remove_file(&a.out);
    }
    result?;
    println!("wrote {} rows to {}", data.total_rows(), a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Validate { config } => cmd_validate(config),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::GenerateData(a) => cmd_generate(a),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
