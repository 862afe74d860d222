use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use drfs::data::{load_csv, MultiPopulationData, SyntheticDataset, SyntheticSpec};
use drfs::evaluation::{summarize_runs, Comparison};
use drfs::optimizer::{select_features, write_traces_csv};
use drfs::pipeline::{run_seed, SeedRun};

use crate::config::{validate, DataSource, ExperimentConfig};
use crate::error::CliError;
use crate::report::{Platform, Results, SeedResult, SeedTiming, SelectionReport, Timings, TraceSummary, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Seeds optimized at the same time. Results are merged in seed order.
    pub parallel: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { parallel: 1 }
    }
}

pub struct RunOutput {
    pub report: SelectionReport,
    pub comparison: Comparison,
}

pub fn load_data(source: &DataSource) -> Result<MultiPopulationData, CliError> {
    match source {
        DataSource::Synthetic {
            dataset,
            n_total,
            dim,
            seed,
        } => {
            let ds = SyntheticDataset::from_id(*dataset).map_err(CliError::stage("load"))?;
            SyntheticSpec::new(ds, *n_total, *dim, *seed)
                .generate()
                .map_err(CliError::stage("load"))
        }
        DataSource::Csv {
            path,
            population_column,
            target_column,
        } => load_csv(path, population_column, target_column).map_err(CliError::stage("load")),
    }
}

fn run_seeds(
    data: &MultiPopulationData,
    cfg: &ExperimentConfig,
    opts: RunOptions,
) -> Result<Vec<(SeedRun, f64)>, CliError> {
    let settings = cfg.pipeline_settings();
    let methods = cfg.methods();
    let one = |seed: u64| {
        let t = Instant::now();
        run_seed(data, seed, &settings, &methods)
            .map(|r| (r, t.elapsed().as_secs_f64()))
            .map_err(CliError::stage("fit"))
    };
    let width = opts.parallel.max(1);
    let mut out = Vec::with_capacity(cfg.seeds.len());
    if width == 1 {
        for &s in &cfg.seeds {
            out.push(one(s)?);
        }
        return Ok(out);
    }
    for chunk in cfg.seeds.chunks(width) {
        let results: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.iter().map(|&s| scope.spawn(move || one(s))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("seed worker panicked"))
                .collect()
        });
        for r in results {
            out.push(r?);
        }
    }
    Ok(out)
}

/// Validates `cfg`, runs every seed, and evaluates every method.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput, CliError> {
    let diagnostics = validate(cfg);
    if !diagnostics.is_empty() {
        return Err(CliError::Invalid(diagnostics));
    }
    let started = Instant::now();
    let data = load_data(&cfg.data)?;
    if cfg.budget > data.n_features() {
        return Err(CliError::Config(format!(
            "budget {} exceeds the {} features in the data",
            cfg.budget,
            data.n_features()
        )));
    }
    let load_seconds = started.elapsed().as_secs_f64();

    let fitted = run_seeds(&data, cfg, opts)?;
    let seed_timings: Vec<SeedTiming> = fitted
        .iter()
        .map(|(r, s)| SeedTiming {
            seed: r.seed(),
            seconds: *s,
        })
        .collect();
    let runs: Vec<SeedRun> = fitted.into_iter().map(|(r, _)| r).collect();

    let eval_start = Instant::now();
    let methods = cfg.methods();
    let comparison =
        summarize_runs(runs, cfg.budget, &methods, &cfg.downstream).map_err(CliError::stage("evaluate"))?;
    let evaluation_seconds = eval_start.elapsed().as_secs_f64();

    let mut seeds = Vec::with_capacity(comparison.runs.len());
    for run in &comparison.runs {
        let alpha = run.alpha.as_ref().map(|a| a.to_vec()).unwrap_or_default();
        let ranked = select_features(&alpha, alpha.len()).map_err(CliError::stage("select"))?;
        let mut selected = BTreeMap::new();
        for o in comparison.outcomes.iter().filter(|o| o.seed == run.seed()) {
            selected.insert(o.method.name().to_string(), o.selections.clone());
        }
        seeds.push(SeedResult {
            seed: run.seed(),
            final_alpha: alpha,
            ranked_features: ranked,
            selected,
            trace: run.trace.as_ref().and_then(TraceSummary::from_trace),
        });
    }

    let report = SelectionReport {
        schema_version: SCHEMA_VERSION,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        platform: Platform::current(),
        config: cfg.clone(),
        results: Results {
            budget: cfg.budget,
            feature_names: data.feature_names.clone(),
            population_ids: data.populations.iter().map(|p| p.id.clone()).collect(),
            seeds,
            comparison: comparison.table.rows.clone(),
        },
        timings: Timings {
            load_seconds,
            seeds: seed_timings,
            evaluation_seconds,
            total_seconds: started.elapsed().as_secs_f64(),
        },
    };
    Ok(RunOutput { report, comparison })
}

pub const REPORT_FILE: &str = "report.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const ALPHA_FILE: &str = "alpha.json";

/// Writes the report bundle into `dir`. On failure every file written so far
/// is removed, and so is `dir` if this call created it.
pub fn write_bundle(dir: &Path, out: &RunOutput) -> Result<Vec<PathBuf>, CliError> {
    let created_dir = !dir.exists();
    fs::create_dir_all(dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = write_files(dir, out, &mut written);
    if result.is_err() {
        remove_partial(dir, &written, created_dir);
    }
    result.map(|_| written)
}

fn write_files(dir: &Path, out: &RunOutput, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut file = |name: &str| -> Result<fs::File, CliError> {
        let p = dir.join(name);
        let f = fs::File::create(&p)?;
        written.push(p);
        Ok(f)
    };

    let traces: Vec<_> = out
        .comparison
        .runs
        .iter()
        .filter_map(|r| r.trace.as_ref().map(|t| (r.seed(), t)))
        .collect();
    write_traces_csv(file(TRACE_FILE)?, traces).map_err(CliError::stage("write"))?;
    out.comparison
        .table
        .write_csv(file(COMPARISON_FILE)?)
        .map_err(CliError::stage("write"))?;
    let alphas: Vec<_> = out
        .report
        .results
        .seeds
        .iter()
        .map(|s| serde_json::json!({ "seed": s.seed, "alpha": s.final_alpha }))
        .collect();
    serde_json::to_writer_pretty(file(ALPHA_FILE)?, &alphas)?;
    serde_json::to_writer_pretty(file(REPORT_FILE)?, &out.report)?;
    Ok(())
}

pub fn remove_partial(dir: &Path, written: &[PathBuf], created_dir: bool) {
    for p in written {
        let _ = fs::remove_file(p);
    }
    if created_dir {
        let _ = fs::remove_dir(dir);
    }
}
