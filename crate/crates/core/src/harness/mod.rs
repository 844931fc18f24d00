//! Batch execution and persistence.
//!
//! An experiment directory looks like
//!
//! ```text
//! config.toml            resolved configuration
//! Y_12/run_000.csv       one trace per run
//! Y_12/median.csv        per-iteration median of log dist
//! Y_12/mean.csv          per-iteration mean of log dist
//! summary.json           statuses, final values and rate fits
//! manifest.json          hashes of everything above, written last
//! ```
//!
//! `analyze`, `plot` and `probe` add their own files and refresh the
//! manifest.

pub mod config;
pub mod manifest;
pub mod plot;
pub mod trace_io;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    aggregate_runs, estimate_rate, rate_quantile_band, AggregateCurve, RateEstimate, RateScale,
    Statistic,
};
use crate::error::{Error, Result};
use crate::probe::{probe_schedule, MisrankReport, StateSource};
use crate::problem::ProblemSpec;
use crate::rng::SeedSpec;
use crate::strategy::{run_es, RunStatus, RunTrace, StrategyConfig};

use config::{ExperimentConfig, DEFAULT_Y_SWEEP};
use manifest::Manifest;
use trace_io::{format_real, read_trace, write_trace};

pub const CONFIG_FILE: &str = "config.toml";
pub const SUMMARY_FILE: &str = "summary.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const PROBE_JSON: &str = "probe_report.json";
pub const PROBE_CSV: &str = "probe_report.csv";

/// Tail probability on each side of the per-run rate band.
pub const RATE_BAND_DELTA: f64 = 0.1;

/// Seed of run `index`; the same for every `Y`, so a sweep compares runs
/// with shared randomness.
pub fn run_seed(master_seed: u64, index: usize) -> SeedSpec {
    SeedSpec::new(master_seed).child(index as u64)
}

pub fn y_dir(root: &Path, y: u32) -> PathBuf {
    root.join(format!("Y_{y}"))
}

pub fn run_path(root: &Path, y: u32, index: usize) -> PathBuf {
    y_dir(root, y).join(format!("run_{index:03}.csv"))
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool when `jobs`
/// is 0.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// `runs` independent runs of one configuration, in run order. Results do
/// not depend on `jobs`.
pub fn run_batch(
    spec: &ProblemSpec,
    cfg: &StrategyConfig,
    runs: usize,
    master_seed: u64,
    jobs: usize,
) -> Result<Vec<RunTrace>> {
    with_jobs(jobs, || {
        (0..runs)
            .into_par_iter()
            .map(|i| run_es(spec, cfg, &run_seed(master_seed, i)))
            .collect()
    })?
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub status: RunStatus,
    pub iterations: usize,
    pub final_log_dist: f64,
    /// Log-linear fit of this run; `None` when too few points remain.
    pub rate: Option<RateEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub statistic: Statistic,
    pub iterations: usize,
    pub final_log_dist: f64,
    pub rate: Option<RateEstimate>,
}

impl CurveSummary {
    fn of(curve: &AggregateCurve, burn_in: f64) -> Self {
        CurveSummary {
            statistic: curve.statistic,
            iterations: curve.values.len(),
            final_log_dist: curve.final_value(),
            rate: estimate_rate(curve, RateScale::LinearInN, burn_in).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YSummary {
    #[serde(rename = "Y")]
    pub y: u32,
    pub evals_per_iteration: u64,
    pub completed_runs: usize,
    pub diverged_runs: usize,
    pub underflowed_runs: usize,
    pub median: CurveSummary,
    pub mean: CurveSummary,
    /// `[q_δ, q_{1−δ}]` of the per-run rate constants.
    pub rate_band: Option<(f64, f64)>,
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub seed: String,
    pub burn_in: f64,
    pub rate_band_delta: f64,
    pub per_y: Vec<YSummary>,
    /// `Y` with the lowest final median (resp. mean) log distance.
    pub best_y_median: Option<u32>,
    pub best_y_mean: Option<u32>,
}

impl ExperimentSummary {
    pub fn get(&self, y: u32) -> Option<&YSummary> {
        self.per_y.iter().find(|s| s.y == y)
    }
}

/// Aggregates and fits the runs of one `Y`. Also returns the median and mean
/// curves.
pub fn summarize_runs(
    y: u32,
    traces: &[RunTrace],
    burn_in: f64,
) -> Result<(YSummary, AggregateCurve, AggregateCurve)> {
    let median = aggregate_runs(traces, Statistic::Median)?;
    let mean = aggregate_runs(traces, Statistic::Mean)?;
    let runs: Vec<RunSummary> = traces
        .iter()
        .enumerate()
        .map(|(i, t)| RunSummary {
            run: i,
            status: t.status,
            iterations: t.records.len(),
            final_log_dist: t.final_record().log_dist,
            rate: estimate_rate(t, RateScale::LinearInN, burn_in).ok(),
        })
        .collect();
    let rates: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.rate.map(|e| e.rate()))
        .collect();
    let summary = YSummary {
        y,
        evals_per_iteration: traces[0].config.evals_per_iteration(),
        completed_runs: runs
            .iter()
            .filter(|r| r.status == RunStatus::Completed)
            .count(),
        diverged_runs: median.diverged_runs,
        underflowed_runs: median.underflowed_runs,
        median: CurveSummary::of(&median, burn_in),
        mean: CurveSummary::of(&mean, burn_in),
        rate_band: rate_quantile_band(&rates, RATE_BAND_DELTA).ok(),
        runs,
    };
    Ok((summary, median, mean))
}

fn best_y(per_y: &[YSummary], pick: impl Fn(&YSummary) -> f64) -> Option<u32> {
    per_y
        .iter()
        .filter(|s| !pick(s).is_nan())
        .min_by(|a, b| pick(a).total_cmp(&pick(b)))
        .map(|s| s.y)
}

fn finish_summary(config: &ExperimentConfig, per_y: Vec<YSummary>) -> ExperimentSummary {
    ExperimentSummary {
        seed: config.experiment.seed.0.to_string(),
        burn_in: config.experiment.burn_in,
        rate_band_delta: RATE_BAND_DELTA,
        best_y_median: best_y(&per_y, |s| s.median.final_log_dist),
        best_y_mean: best_y(&per_y, |s| s.mean.final_log_dist),
        per_y,
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::output(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::output(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    write_file(path, &(text + "\n"))
}

fn curve_csv(curve: &AggregateCurve) -> String {
    let mut out = String::from("evals,log_dist\n");
    for (e, v) in curve.evals.iter().zip(&curve.values) {
        out.push_str(&format!("{e},{}\n", format_real(*v)));
    }
    out
}

fn new_manifest(config: &ExperimentConfig) -> Manifest {
    let ys = config.y_values();
    let mut m = Manifest::new(
        config.to_toml_string(),
        config.experiment.seed.0,
        ys.clone(),
    );
    m.notes.push(
        "median.csv and mean.csv hold the per-iteration median and mean of log(dist) across runs"
            .to_string(),
    );
    if ys == DEFAULT_Y_SWEEP {
        m.notes.push(
            "the Y sweep 1,2,4,8,12,16,20,24 is this tool's default choice, not a prescribed one"
                .to_string(),
        );
    }
    m
}

/// Runs every configured `Y` and writes the experiment directory.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentSummary> {
    config.validate()?;
    let root = config.output_dir();
    create_dir(&root)?;
    let spec = config.problem_spec();
    let seed = config.experiment.seed.0;
    let mut manifest = new_manifest(config);

    let config_path = root.join(CONFIG_FILE);
    write_file(&config_path, &config.to_toml_string())?;
    manifest.add_file(&root, &config_path)?;

    let mut per_y = Vec::new();
    for y in config.y_values() {
        let strategy = config.strategy_for(y);
        let dir = y_dir(&root, y);
        create_dir(&dir)?;
        let traces: Vec<RunTrace> = with_jobs(jobs, || {
            (0..config.experiment.runs)
                .into_par_iter()
                .map(|i| {
                    let trace = run_es(&spec, &strategy, &run_seed(seed, i))?;
                    write_trace(&run_path(&root, y, i), &trace.records)?;
                    Ok(trace)
                })
                .collect::<Result<_>>()
        })??;
        let (summary, median, mean) = summarize_runs(y, &traces, config.experiment.burn_in)?;
        drop(traces);
        for curve in [&median, &mean] {
            let path = dir.join(format!("{}.csv", curve.statistic.as_str()));
            write_file(&path, &curve_csv(curve))?;
        }
        for i in 0..config.experiment.runs {
            manifest.add_file(&root, &run_path(&root, y, i))?;
        }
        manifest.add_file(&root, &dir.join("median.csv"))?;
        manifest.add_file(&root, &dir.join("mean.csv"))?;
        per_y.push(summary);
    }
    let summary = finish_summary(config, per_y);
    let summary_path = root.join(SUMMARY_FILE);
    write_json(&summary_path, &summary)?;
    manifest.add_file(&root, &summary_path)?;
    manifest.write(&root)?;
    Ok(summary)
}

/// An existing experiment directory: its configuration and manifest.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub root: PathBuf,
    pub config: ExperimentConfig,
    pub manifest: Manifest,
}

impl Experiment {
    pub fn open(root: &Path) -> Result<Self> {
        let manifest = Manifest::load(root)?;
        let config_path = root.join(CONFIG_FILE);
        manifest.verify_file(root, &config_path)?;
        let text =
            std::fs::read_to_string(&config_path).map_err(|e| Error::corrupt(&config_path, e))?;
        let mut config =
            ExperimentConfig::from_toml_str(&text).map_err(|e| Error::corrupt(&config_path, e))?;
        config.experiment.output_dir = Some(root.to_path_buf());
        Ok(Experiment {
            root: root.to_path_buf(),
            config,
            manifest,
        })
    }

    /// Reads the traces of one `Y`, checking each against the manifest.
    pub fn traces(&self, y: u32) -> Result<Vec<RunTrace>> {
        let spec = self.config.problem_spec();
        let strategy = self.config.strategy_for(y);
        let seed = self.config.experiment.seed.0;
        (0..self.config.experiment.runs)
            .into_par_iter()
            .map(|i| {
                let path = run_path(&self.root, y, i);
                let key = format!("Y_{y}/run_{i:03}.csv");
                if !self.manifest.files.contains_key(&key) {
                    return Err(Error::corrupt(&path, "trace is not listed in the manifest"));
                }
                self.manifest.verify_file(&self.root, &path)?;
                read_trace(&path, &strategy, &spec, run_seed(seed, i))
            })
            .collect()
    }

    fn curves(&self, y: u32) -> Result<(YSummary, AggregateCurve, AggregateCurve)> {
        let traces = self.traces(y)?;
        summarize_runs(y, &traces, self.config.experiment.burn_in)
    }

    fn save(&mut self, path: &Path) -> Result<()> {
        self.manifest.add_file(&self.root, path)
    }
}

/// Recomputes aggregates and rate fits from the stored traces and writes
/// `analysis.json`.
pub fn analyze_experiment(root: &Path) -> Result<ExperimentSummary> {
    let mut exp = Experiment::open(root)?;
    let per_y = exp
        .config
        .y_values()
        .into_iter()
        .map(|y| exp.curves(y).map(|c| c.0))
        .collect::<Result<Vec<_>>>()?;
    let summary = finish_summary(&exp.config, per_y);
    let path = root.join(ANALYSIS_FILE);
    write_json(&path, &summary)?;
    exp.save(&path)?;
    exp.manifest.write(root)?;
    Ok(summary)
}

/// Writes `plot_median.csv` and `plot_mean.csv` (and `.svg` renderings when
/// `svg` is set). Returns the files written.
pub fn emit_plot_data(root: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    let mut exp = Experiment::open(root)?;
    let mut medians = Vec::new();
    let mut means = Vec::new();
    for y in exp.config.y_values() {
        let (_, median, mean) = exp.curves(y)?;
        medians.push((y, median));
        means.push((y, mean));
    }
    let mut written = Vec::new();
    for (name, curves) in [("median", &medians), ("mean", &means)] {
        let refs: Vec<(u32, &AggregateCurve)> = curves.iter().map(|(y, c)| (*y, c)).collect();
        let path = root.join(format!("plot_{name}.csv"));
        write_file(&path, &plot::curve_table(&refs))?;
        written.push(path);
        if svg {
            let path = root.join(format!("plot_{name}.svg"));
            write_file(
                &path,
                &plot::curve_svg(&format!("{name} of log distance"), &refs),
            )?;
            written.push(path);
        }
    }
    for p in &written {
        exp.save(p)?;
    }
    exp.manifest.write(root)?;
    Ok(written)
}

fn probe_csv(report: &MisrankReport) -> String {
    let mut out = String::from(
        "n,delta_n,dist,sigma,m,pair_proximity,pair_proximity_half_width,\
         noise_excess,noise_excess_half_width,misranking,misranking_half_width\n",
    );
    for e in &report.entries {
        let cells = [
            e.delta_n,
            e.dist,
            e.sigma,
            e.m,
            e.pair_proximity.estimate,
            e.pair_proximity.half_width,
            e.noise_excess.estimate,
            e.noise_excess.half_width,
            e.misranking.estimate,
            e.misranking.half_width,
        ];
        out.push_str(&e.n.to_string());
        for c in cells {
            out.push(',');
            out.push_str(&format_real(c));
        }
        out.push('\n');
    }
    out
}

/// Runs the misranking probes of `config.probe` (defaults when absent) and
/// writes `probe_report.json` and `probe_report.csv` to the output
/// directory.
pub fn run_probe(config: &ExperimentConfig, jobs: usize) -> Result<MisrankReport> {
    config.validate()?;
    let section = config.probe.clone().unwrap_or_default();
    let spec = config.problem_spec();
    let strategy = config.strategy.clone();
    let trace = match (&section.config.state_source, &section.trace) {
        (StateSource::Trace, Some(path)) => Some(read_trace(
            path,
            &strategy,
            &spec,
            run_seed(config.experiment.seed.0, 0),
        )?),
        (StateSource::Trace, None) => {
            return Err(Error::InvalidConfig(vec![
                "probe.trace is required when probe.state_source.kind = \"trace\"".to_string(),
            ]))
        }
        _ => None,
    };
    let seed = SeedSpec::new(config.experiment.seed.0);
    let report = with_jobs(jobs, || {
        probe_schedule(&section.config, &spec, &strategy, &seed, trace.as_ref())
    })??;

    let root = config.output_dir();
    create_dir(&root)?;
    let mut manifest = match Manifest::load(&root) {
        Ok(m) => m,
        Err(_) => new_manifest(config),
    };
    let json = root.join(PROBE_JSON);
    write_json(&json, &report)?;
    let csv = root.join(PROBE_CSV);
    write_file(&csv, &probe_csv(&report))?;
    manifest.add_file(&root, &json)?;
    manifest.add_file(&root, &csv)?;
    manifest.write(&root)?;
    Ok(report)
}
