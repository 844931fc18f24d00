//! Convergence-rate fits, aggregation over runs, and closed-form quantities
//! from the convergence theory (noise-exponent threshold, per-evaluation rate
//! bound, and the measure of spherical shells).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategy::{RunStatus, RunTrace};

/// Minimum number of points a rate fit accepts.
pub const MIN_FIT_POINTS: usize = 10;

/// Default fraction of leading points dropped before fitting.
pub const DEFAULT_BURN_IN: f64 = 0.1;

/// One point of a log-distance curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub n: u64,
    pub evals: u64,
    pub log_dist: f64,
}

/// Anything that yields `log ‖x_n − x*‖` per iteration.
pub trait LogDistanceSeries {
    fn points(&self) -> Vec<SeriesPoint>;
}

impl LogDistanceSeries for RunTrace {
    fn points(&self) -> Vec<SeriesPoint> {
        self.records
            .iter()
            .map(|r| SeriesPoint {
                n: r.n,
                evals: r.evals,
                log_dist: r.log_dist,
            })
            .collect()
    }
}

impl LogDistanceSeries for [SeriesPoint] {
    fn points(&self) -> Vec<SeriesPoint> {
        self.to_vec()
    }
}

impl LogDistanceSeries for Vec<SeriesPoint> {
    fn points(&self) -> Vec<SeriesPoint> {
        self.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateScale {
    /// `log dist` against `n` (log-linear convergence).
    LinearInN,
    /// `log dist` against `log n` (log-log convergence).
    LinearInLogN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub scale: RateScale,
    /// Slope against the iteration index (or its log).
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Slope against the cumulative evaluation count (or its log).
    pub slope_per_eval: f64,
    /// Iteration indices `(first, last)` of the fitted window.
    pub window: (u64, u64),
    /// Set when the window was cut short by a zero distance.
    pub truncated: bool,
}

impl RateEstimate {
    /// `-slope`, the convergence rate constant.
    pub fn rate(&self) -> f64 {
        -self.slope
    }
}

#[derive(Debug, Clone, Copy)]
struct LineFit {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    // a constant series is fitted exactly, up to rounding in the mean
    let flat = syy <= 1e-24 * n * (1.0 + my * my);
    let r_squared = if !flat {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Least-squares rate fit after dropping the first `burn_in` fraction of
/// points. A zero distance (log = -inf) ends the window early.
pub fn estimate_rate<S: LogDistanceSeries + ?Sized>(
    series: &S,
    scale: RateScale,
    burn_in: f64,
) -> Result<RateEstimate> {
    if !(0.0..1.0).contains(&burn_in) {
        return Err(Error::invalid(format!(
            "burn-in fraction must be in [0, 1), got {burn_in}"
        )));
    }
    let points = series.points();
    let start = (burn_in * points.len() as f64).floor() as usize;
    let tail = &points[start.min(points.len())..];
    let end = tail
        .iter()
        .position(|p| !p.log_dist.is_finite())
        .unwrap_or(tail.len());
    let window = &tail[..end];
    if window.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: window.len(),
        });
    }
    let abscissa = |v: u64| match scale {
        RateScale::LinearInN => v as f64,
        RateScale::LinearInLogN => (v as f64).ln(),
    };
    let ys: Vec<f64> = window.iter().map(|p| p.log_dist).collect();
    let by_n: Vec<f64> = window.iter().map(|p| abscissa(p.n)).collect();
    let by_evals: Vec<f64> = window.iter().map(|p| abscissa(p.evals)).collect();
    let fit = fit_line(&by_n, &ys);
    let fit_evals = fit_line(&by_evals, &ys);
    Ok(RateEstimate {
        scale,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        slope_per_eval: fit_evals.slope,
        window: (window[0].n, window[window.len() - 1].n),
        truncated: end < tail.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Median,
    Mean,
}

impl Statistic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::Median => "median",
            Statistic::Mean => "mean",
        }
    }

    pub fn apply(&self, values: &mut [f64]) -> f64 {
        match self {
            Statistic::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Statistic::Median => median(values),
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Per-iteration statistic of the log-distance across runs.
///
/// This is the statistic of `log ‖x_n‖`, not the log of the statistic of
/// `‖x_n‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub statistic: Statistic,
    pub evals: Vec<u64>,
    pub values: Vec<f64>,
    pub run_count: usize,
    pub diverged_runs: usize,
    pub underflowed_runs: usize,
}

impl AggregateCurve {
    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("curves are nonempty")
    }
}

impl LogDistanceSeries for AggregateCurve {
    fn points(&self) -> Vec<SeriesPoint> {
        self.evals
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(i, (&evals, &log_dist))| SeriesPoint {
                n: i as u64 + 1,
                evals,
                log_dist,
            })
            .collect()
    }
}

/// Aggregates runs of one configuration.
///
/// The curve spans the shortest completed run (or the longest run if none
/// completed). Runs that stopped early, by diverging or underflowing, keep
/// contributing their last log-distance, so a diverged run stays in the mean
/// and drags it up.
pub fn aggregate_runs(traces: &[RunTrace], statistic: Statistic) -> Result<AggregateCurve> {
    let first = traces
        .first()
        .ok_or_else(|| Error::invalid("cannot aggregate an empty set of runs"))?;
    let per_iteration = first.config.evals_per_iteration();
    if let Some(t) = traces
        .iter()
        .find(|t| t.config.evals_per_iteration() != per_iteration)
    {
        return Err(Error::invalid(format!(
            "runs disagree on evaluations per iteration: {} vs {}",
            per_iteration,
            t.config.evals_per_iteration()
        )));
    }
    if traces.iter().any(|t| t.records.is_empty()) {
        return Err(Error::invalid("cannot aggregate an empty trace"));
    }
    let len = traces
        .iter()
        .filter(|t| t.status == RunStatus::Completed)
        .map(|t| t.records.len())
        .min()
        .unwrap_or_else(|| traces.iter().map(|t| t.records.len()).max().unwrap_or(0));

    let mut column = vec![0.0; traces.len()];
    let mut values = Vec::with_capacity(len);
    for i in 0..len {
        for (c, t) in column.iter_mut().zip(traces) {
            *c = t
                .records
                .get(i)
                .unwrap_or_else(|| t.final_record())
                .log_dist;
        }
        values.push(statistic.apply(&mut column));
    }
    let evals = (1..=len as u64).map(|n| n * per_iteration).collect();
    Ok(AggregateCurve {
        statistic,
        evals,
        values,
        run_count: traces.len(),
        diverged_runs: traces
            .iter()
            .filter(|t| t.status == RunStatus::Diverged)
            .count(),
        underflowed_runs: traces
            .iter()
            .filter(|t| t.status == RunStatus::Underflowed)
            .count(),
    })
}

/// Empirical `q`-quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!(
            "quantile level must be in [0, 1], got {q}"
        )));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

/// The band `[q_δ, q_{1−δ}]` of per-run rate constants: an empirical stand-in
/// for the slowest and fastest exponential envelopes that hold with
/// probability `1 − 2δ`.
pub fn rate_quantile_band(rates: &[f64], delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::invalid(format!(
            "delta must be in (0, 0.5), got {delta}"
        )));
    }
    Ok((quantile(rates, delta)?, quantile(rates, 1.0 - delta)?))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Lower bound on the noise exponent `z` for which a constant number of
/// resamplings preserves log-linear convergence, given noise-free envelope
/// rates `alpha <= alpha_prime`:
///
/// `max(2(p·α′ − (α − α′)·d) / (p·α), 2(2α′ − α) / α)`.
///
/// With `alpha == alpha_prime` this is exactly 2.
pub fn theorem_threshold(p: u32, d: usize, alpha: f64, alpha_prime: f64) -> Result<f64> {
    if p == 0 || d == 0 {
        return Err(Error::invalid("p and d must be positive"));
    }
    positive("alpha", alpha)?;
    positive("alpha_prime", alpha_prime)?;
    if alpha > alpha_prime {
        return Err(Error::invalid(format!(
            "alpha ({alpha}) must not exceed alpha_prime ({alpha_prime})"
        )));
    }
    let (p, d) = (f64::from(p), d as f64);
    let first = 2.0 * (p * alpha_prime - (alpha - alpha_prime) * d) / (p * alpha);
    let second = 2.0 * (2.0 * alpha_prime - alpha) / alpha;
    Ok(first.max(second))
}

/// Upper bound `−α/(λY)` on `limsup log‖x̃_n‖ / n` per function evaluation.
pub fn corollary_rate(alpha: f64, lambda: usize, y: u32) -> Result<f64> {
    positive("alpha", alpha)?;
    if lambda == 0 || y == 0 {
        return Err(Error::invalid("lambda and Y must be positive"));
    }
    Ok(-alpha / (lambda as f64 * f64::from(y)))
}

/// Volume of the unit ball in `ℝ^d`, from the double-factorial form.
pub fn ball_constant(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let two_pi = 2.0 * PI;
    let k = if d % 2 == 0 {
        let denom: f64 = (1..=d / 2).map(|i| (2 * i) as f64).product();
        two_pi.powi((d / 2) as i32) / denom
    } else {
        let denom: f64 = (0..=d / 2).map(|i| (2 * i + 1) as f64).product();
        2.0 * two_pi.powi(((d - 1) / 2) as i32) / denom
    };
    Ok(k)
}

/// Lebesgue measure of `{x : |‖x‖^p − v| ≤ ell}`.
pub fn shell_measure(v: f64, ell: f64, d: usize, p: u32) -> Result<f64> {
    positive("ell", ell)?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::invalid(format!(
            "v must be a finite real >= 0, got {v}"
        )));
    }
    if p == 0 {
        return Err(Error::invalid("p must be positive"));
    }
    let k = ball_constant(d)?;
    let e = d as f64 / f64::from(p);
    let outer = (v + ell).powf(e);
    if v >= ell {
        Ok(k * (outer - (v - ell).powf(e)))
    } else {
        Ok(k * outer)
    }
}
