use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use resample_es::analysis::{corollary_rate, theorem_threshold};
use resample_es::harness::config::{ExperimentConfig, Overrides, DEFAULT_Y_SWEEP};
use resample_es::harness::{
    analyze_experiment, emit_plot_data, run_experiment, run_probe, ExperimentSummary,
};
use resample_es::{Error, Result};

/// Noisy sphere experiments with a resampling (μ,λ) evolution strategy.
#[derive(Debug, Parser)]
#[command(name = "resample-es", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML file with [problem], [strategy], [experiment] and [probe] tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (decimal, 64-bit unsigned).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output directory; falls back to `output_dir` in the config, then to
    /// $RESAMPLE_ES_OUT, then to `resample-es-out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Resampling counts to sweep, comma separated, or `sweep` for
    /// 1,2,4,8,12,16,20,24.
    #[arg(long = "Y", global = true, value_delimiter = ',')]
    y: Option<Vec<String>>,
    /// Override a config key, e.g. `--set strategy.budget=10000`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment and write traces, aggregates and a manifest.
    Run,
    /// Recompute aggregates and rate fits from stored traces.
    Analyze {
        /// Experiment directory (defaults to the output directory).
        dir: Option<PathBuf>,
    },
    /// Estimate pair-proximity, noise-excess and misranking probabilities.
    Probe,
    /// Write plot tables (and optionally SVG) from stored traces.
    Plot {
        dir: Option<PathBuf>,
        /// Also render the curves as SVG.
        #[arg(long)]
        svg: bool,
    },
    /// Print the noise-exponent threshold and the per-evaluation rate bound.
    Threshold {
        #[arg(long)]
        alpha: f64,
        /// Defaults to `alpha`.
        #[arg(long)]
        alpha_prime: Option<f64>,
        /// Defaults to the configured problem.
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        lambda: Option<usize>,
    },
}

fn parse_y(values: &[String]) -> Result<Vec<u32>> {
    let mut ys = Vec::new();
    for v in values {
        let v = v.trim();
        if v == "sweep" {
            ys.extend(DEFAULT_Y_SWEEP);
        } else {
            ys.push(v.parse().map_err(|_| {
                Error::InvalidConfig(vec![format!("--Y: `{v}` is not a positive integer")])
            })?);
        }
    }
    Ok(ys)
}

impl GlobalArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let overrides = Overrides {
            seed: self.seed,
            out: self.out.clone(),
            y_sweep: self.y.as_deref().map(parse_y).transpose()?,
            set: self.set.clone(),
        };
        ExperimentConfig::load(self.config.as_deref(), &overrides)
    }

    fn experiment_dir(&self, dir: &Option<PathBuf>) -> Result<PathBuf> {
        match dir {
            Some(d) => Ok(d.clone()),
            None => Ok(self.load()?.output_dir()),
        }
    }
}

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        v.to_string()
    }
}

fn print_summary(s: &ExperimentSummary) {
    println!(
        "{:>4} {:>5} {:>5} {:>5} {:>12} {:>12} {:>14}",
        "Y", "done", "div", "uflow", "median", "mean", "rate/eval"
    );
    for y in &s.per_y {
        let rate = y
            .median
            .rate
            .map(|r| format!("{:.4e}", -r.slope_per_eval))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:>4} {:>5} {:>5} {:>5} {:>12} {:>12} {:>14}",
            y.y,
            y.completed_runs,
            y.diverged_runs,
            y.underflowed_runs,
            fmt(y.median.final_log_dist),
            fmt(y.mean.final_log_dist),
            rate
        );
    }
    if let Some(y) = s.best_y_median {
        println!("lowest final median log distance at Y = {y}");
    }
    if let Some(y) = s.best_y_mean {
        println!("lowest final mean log distance at Y = {y}");
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Run => {
            let config = g.load()?;
            let summary = run_experiment(&config, g.jobs)?;
            print_summary(&summary);
            println!("wrote {}", config.output_dir().display());
        }
        Command::Analyze { dir } => {
            let dir = g.experiment_dir(dir)?;
            print_summary(&analyze_experiment(&dir)?);
        }
        Command::Probe => {
            let config = g.load()?;
            let report = run_probe(&config, g.jobs)?;
            println!(
                "gamma = {:.6} (admissible window ({:.6}, {:.6}))",
                report.gamma, report.admissible_gamma.lower, report.admissible_gamma.upper
            );
            println!(
                "{:>6} {:>12} {:>12} {:>12} {:>12}",
                "n", "delta_n", "proximity", "excess", "misrank"
            );
            for e in &report.entries {
                println!(
                    "{:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                    e.n,
                    e.delta_n,
                    e.pair_proximity.estimate,
                    e.noise_excess.estimate,
                    e.misranking.estimate
                );
            }
            println!("sum of misranking estimates = {:.6}", report.misranking_sum);
            println!("wrote {}", config.output_dir().display());
        }
        Command::Plot { dir, svg } => {
            let dir = g.experiment_dir(dir)?;
            for p in emit_plot_data(&dir, *svg)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Threshold {
            alpha,
            alpha_prime,
            p,
            d,
            lambda,
        } => {
            let config = g.load()?;
            let p = p.unwrap_or(config.problem.p);
            let d = d.unwrap_or(config.problem.d);
            let lambda = lambda.unwrap_or(config.strategy.lambda);
            let alpha_prime = alpha_prime.unwrap_or(*alpha);
            let z = theorem_threshold(p, d, *alpha, alpha_prime)?;
            println!("threshold z > {z}");
            for y in config.y_values() {
                println!(
                    "Y = {y}: rate bound per evaluation {}",
                    corollary_rate(*alpha, lambda, y)?
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
