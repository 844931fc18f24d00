//! Monte Carlo estimates of the events behind misranking.
//!
//! At an ES state `(x_n, σ_n)` with `λ` offspring drawn as `x_n + σ_n·N_d`,
//! and a threshold `δ_n = δ₀·exp(−γn)`:
//!
//! - *pair proximity*: some two offspring have `|‖a‖^p − ‖b‖^p| ≤ δ_n`;
//! - *noise excess*: some offspring's `Y`-sample average deviates from its
//!   expectation by at least `δ_n/2`;
//! - *misranking*: some pair is strictly ordered by true fitness but the
//!   averaged noisy values order it the other way (or tie).
//!
//! A misranking needs a close pair or a large deviation, so the third
//! probability is bounded by the sum of the first two. [`probe_schedule`]
//! evaluates all three events on the same samples, so the bound holds trial
//! by trial.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{euclidean_distance, ProblemSpec};
use crate::rng::{SeedSpec, Stream};
use crate::strategy::{RunTrace, StrategyConfig};

/// Two-sided normal quantile for 95% intervals.
const Z95: f64 = 1.959_963_984_540_054;

pub const MIN_TRIALS: u64 = 100;

/// A binomial proportion with a 95% confidence interval.
///
/// The interval is the normal approximation, except at 0 or `trials`
/// successes where it is the exact Clopper–Pearson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub half_width: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let p = successes as f64 / n;
        let (lower, upper) = if successes == 0 {
            (0.0, 1.0 - 0.025f64.powf(1.0 / n))
        } else if successes == trials {
            (0.025f64.powf(1.0 / n), 1.0)
        } else {
            let h = Z95 * (p * (1.0 - p) / n).sqrt();
            ((p - h).max(0.0), (p + h).min(1.0))
        };
        let half_width = if successes == 0 || successes == trials {
            0.5 * (upper - lower)
        } else {
            Z95 * (p * (1.0 - p) / n).sqrt()
        };
        Proportion {
            successes,
            trials,
            estimate: p,
            lower,
            upper,
            half_width,
        }
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::invalid(format!(
            "at least {MIN_TRIALS} trials required, got {trials}"
        )));
    }
    Ok(())
}

/// Runs `trials` independent trials, each with its own stream, and counts
/// how often each of the `K` events fires.
fn count_events<const K: usize>(
    trials: u64,
    seed: &SeedSpec,
    trial: impl Fn(&mut Stream) -> [bool; K] + Sync,
) -> [u64; K] {
    let base = seed.derived_seed();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = SeedSpec::new(base).stream_at(&[t]);
            trial(&mut stream).map(u64::from)
        })
        .reduce(
            || [0; K],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Draws `lambda` offspring of `(x_n, σ_n)` and returns their distances to
/// the optimum.
fn sample_offspring_distances(
    x_n: &[f64],
    sigma_n: f64,
    lambda: usize,
    optimum: &[f64],
    stream: &mut Stream,
    scratch: &mut [f64],
) -> Vec<f64> {
    (0..lambda)
        .map(|_| {
            stream.fill_gaussian(scratch);
            for (s, x) in scratch.iter_mut().zip(x_n) {
                *s = x + sigma_n * *s;
            }
            euclidean_distance(scratch, optimum)
        })
        .collect()
}

fn has_close_pair(values: &[f64], delta: f64) -> bool {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).any(|w| w[1] - w[0] <= delta)
}

/// True if some pair has strictly smaller true fitness but a noisy value that
/// is not smaller. Pairs with equal true fitness are never misranked.
pub fn has_misranked_pair(true_values: &[f64], noisy_values: &[f64]) -> bool {
    let n = true_values.len();
    (0..n).any(|i| {
        (0..n).any(|j| true_values[i] < true_values[j] && noisy_values[i] >= noisy_values[j])
    })
}

/// Mean noise deviation `‖x‖^(pz/2) · mean(η₁..η_Y)` at distance `r`.
fn averaged_deviation(spec: &ProblemSpec, r: f64, y: u32, stream: &mut Stream) -> f64 {
    let eta = spec.noise.mean_of(y, stream);
    if r == 0.0 || eta == 0.0 {
        0.0
    } else {
        r.powf(f64::from(spec.p) * spec.z / 2.0) * eta
    }
}

fn check_state(x_n: &[f64], spec: &ProblemSpec, sigma_n: f64) -> Result<()> {
    if x_n.len() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            got: x_n.len(),
        });
    }
    if !(sigma_n > 0.0) {
        return Err(Error::invalid("sigma_n must be positive"));
    }
    Ok(())
}

/// Probability that two of `lambda` offspring have expected fitness within
/// `delta_n` of each other.
pub fn probe_pair_proximity(
    x_n: &[f64],
    sigma_n: f64,
    lambda: usize,
    delta_n: f64,
    spec: &ProblemSpec,
    trials: u64,
    seed: &SeedSpec,
) -> Result<Proportion> {
    check_state(x_n, spec, sigma_n)?;
    check_trials(trials)?;
    if !(delta_n > 0.0) {
        return Err(Error::invalid("delta_n must be positive"));
    }
    let p = spec.p as i32;
    let [hits] = count_events(trials, seed, |stream| {
        let mut scratch = vec![0.0; spec.d];
        let r =
            sample_offspring_distances(x_n, sigma_n, lambda, &spec.optimum, stream, &mut scratch);
        let f: Vec<f64> = r.iter().map(|r| r.powi(p)).collect();
        [has_close_pair(&f, delta_n)]
    });
    Ok(Proportion::new(hits, trials))
}

/// Probability that at least one of the given points has a `Y`-sample
/// averaged noise deviation of at least `delta_n / 2`.
pub fn probe_noise_excess(
    points: &[Vec<f64>],
    spec: &ProblemSpec,
    y: u32,
    delta_n: f64,
    trials: u64,
    seed: &SeedSpec,
) -> Result<Proportion> {
    check_trials(trials)?;
    if y == 0 {
        return Err(Error::invalid("Y must be at least 1"));
    }
    if !(delta_n > 0.0) {
        return Err(Error::invalid("delta_n must be positive"));
    }
    let radii = points
        .iter()
        .map(|x| spec.distance(x))
        .collect::<Result<Vec<f64>>>()?;
    let [hits] = count_events(trials, seed, |stream| {
        [radii
            .iter()
            .any(|&r| averaged_deviation(spec, r, y, stream).abs() >= delta_n / 2.0)]
    });
    Ok(Proportion::new(hits, trials))
}

/// Probability that the `Y`-averaged noisy values of `lambda` offspring
/// misrank at least one pair.
pub fn probe_misranking(
    x_n: &[f64],
    sigma_n: f64,
    lambda: usize,
    y: u32,
    spec: &ProblemSpec,
    trials: u64,
    seed: &SeedSpec,
) -> Result<Proportion> {
    check_state(x_n, spec, sigma_n)?;
    check_trials(trials)?;
    if y == 0 {
        return Err(Error::invalid("Y must be at least 1"));
    }
    let p = spec.p as i32;
    let [hits] = count_events(trials, seed, |stream| {
        let mut scratch = vec![0.0; spec.d];
        let r =
            sample_offspring_distances(x_n, sigma_n, lambda, &spec.optimum, stream, &mut scratch);
        let truth: Vec<f64> = r.iter().map(|r| r.powi(p)).collect();
        let noisy: Vec<f64> = truth
            .iter()
            .zip(&r)
            .map(|(t, &r)| t + averaged_deviation(spec, r, y, stream))
            .collect();
        [has_misranked_pair(&truth, &noisy)]
    });
    Ok(Proportion::new(hits, trials))
}

/// Where the probed ES states come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateSource {
    /// `‖x_n − x*‖ = C·exp(−αn)`, `σ_n = V·exp(−αn)`.
    Synthetic { alpha: f64, c: f64, v: f64 },
    /// Best parent of a recorded run.
    Trace,
}

impl Default for StateSource {
    fn default() -> Self {
        StateSource::Synthetic {
            alpha: 0.05,
            c: 1.0,
            v: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Decay rate of `δ_n`. `None` picks `gamma_fraction` of the admissible
    /// maximum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default = "default_gamma_fraction")]
    pub gamma_fraction: f64,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_iterations")]
    pub iterations: Vec<u64>,
    #[serde(default)]
    pub state_source: StateSource,
    /// Envelope rates used for the admissible `γ` window. `alpha` defaults to
    /// the synthetic schedule's rate, `alpha_prime` to `alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_prime: Option<f64>,
}

fn default_gamma_fraction() -> f64 {
    0.8
}

fn default_delta0() -> f64 {
    1.0
}

fn default_trials() -> u64 {
    100_000
}

fn default_iterations() -> Vec<u64> {
    vec![10, 20, 40, 80]
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            gamma: None,
            gamma_fraction: default_gamma_fraction(),
            delta0: default_delta0(),
            trials: default_trials(),
            iterations: default_iterations(),
            state_source: StateSource::default(),
            alpha: None,
            alpha_prime: None,
        }
    }
}

impl ProbeConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                v.push(format!("probe.gamma must be positive, got {g}"));
            }
        }
        if !(self.gamma_fraction > 0.0 && self.gamma_fraction.is_finite()) {
            v.push("probe.gamma_fraction must be positive".to_string());
        }
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            v.push("probe.delta0 must be positive".to_string());
        }
        if self.trials < MIN_TRIALS {
            v.push(format!("probe.trials must be at least {MIN_TRIALS}"));
        }
        if self.iterations.is_empty() || self.iterations.contains(&0) {
            v.push("probe.iterations must be a nonempty list of positive integers".to_string());
        }
        if let StateSource::Synthetic { alpha, c, v: vv } = self.state_source {
            if !(alpha > 0.0 && c > 0.0 && vv > 0.0) {
                v.push("synthetic state parameters alpha, c, v must be positive".to_string());
            }
        }
        for (name, a) in [("alpha", self.alpha), ("alpha_prime", self.alpha_prime)] {
            if let Some(a) = a {
                if !(a > 0.0) {
                    v.push(format!("probe.{name} must be positive"));
                }
            }
        }
        v
    }

    fn envelope_rates(&self) -> Result<(f64, f64)> {
        let alpha = match (self.alpha, &self.state_source) {
            (Some(a), _) => a,
            (None, StateSource::Synthetic { alpha, .. }) => *alpha,
            (None, StateSource::Trace) => {
                return Err(Error::invalid(
                    "probe.alpha is required when states are replayed from a trace",
                ))
            }
        };
        Ok((alpha, self.alpha_prime.unwrap_or(alpha)))
    }
}

/// Interval of `γ` for which both decay exponents are positive with the
/// first branch of the proximity bound (`m = 1`):
/// `γ > pα′ − d(α − α′)` and `γ < αzp/2`. Empty when `lower >= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaWindow {
    pub lower: f64,
    pub upper: f64,
}

pub fn admissible_gamma(p: u32, d: usize, z: f64, alpha: f64, alpha_prime: f64) -> GammaWindow {
    let p = f64::from(p);
    GammaWindow {
        lower: p * alpha_prime - d as f64 * (alpha - alpha_prime),
        upper: alpha * z * p / 2.0,
    }
}

/// Exponent `m` selecting `max(q, q^(d/p))` for `q = δ_n / ‖x_n‖^p`.
pub fn proximity_exponent(delta_n: f64, dist: f64, p: u32, d: usize) -> f64 {
    let q = delta_n / dist.powi(p as i32);
    if q > 1.0 {
        d as f64 / f64::from(p)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub n: u64,
    pub delta_n: f64,
    pub dist: f64,
    pub sigma: f64,
    pub m: f64,
    pub pair_proximity: Proportion,
    pub noise_excess: Proportion,
    pub misranking: Proportion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisrankReport {
    pub gamma: f64,
    pub admissible_gamma: GammaWindow,
    pub lambda: usize,
    #[serde(rename = "Y")]
    pub y: u32,
    pub z: f64,
    pub entries: Vec<ProbeEntry>,
    /// `Σ_n P̂(misranking at n)` over the probed iterations.
    pub misranking_sum: f64,
}

impl MisrankReport {
    /// Entries where the misranking estimate exceeds the proximity plus
    /// noise-excess estimates by more than their combined half-widths.
    pub fn union_bound_violations(&self) -> Vec<u64> {
        self.entries
            .iter()
            .filter(|e| {
                e.misranking.estimate
                    > e.pair_proximity.estimate
                        + e.noise_excess.estimate
                        + e.pair_proximity.half_width
                        + e.noise_excess.half_width
            })
            .map(|e| e.n)
            .collect()
    }
}

/// One trial at a state: proximity, noise excess and misranking, all on the
/// same offspring and noise draws.
fn joint_trial(
    x_n: &[f64],
    sigma_n: f64,
    lambda: usize,
    y: u32,
    delta_n: f64,
    spec: &ProblemSpec,
    stream: &mut Stream,
) -> [bool; 3] {
    let mut scratch = vec![0.0; spec.d];
    let r = sample_offspring_distances(x_n, sigma_n, lambda, &spec.optimum, stream, &mut scratch);
    let truth: Vec<f64> = r.iter().map(|r| r.powi(spec.p as i32)).collect();
    let deviations: Vec<f64> = r
        .iter()
        .map(|&r| averaged_deviation(spec, r, y, stream))
        .collect();
    let noisy: Vec<f64> = truth.iter().zip(&deviations).map(|(t, e)| t + e).collect();
    [
        has_close_pair(&truth, delta_n),
        deviations.iter().any(|e| e.abs() >= delta_n / 2.0),
        has_misranked_pair(&truth, &noisy),
    ]
}

/// Runs the three probes at every requested iteration.
///
/// States come from the synthetic log-linear schedule or, for
/// [`StateSource::Trace`], from `trace` (the best parent's distance and
/// step-size at iteration `n`, placed along the unit diagonal).
pub fn probe_schedule(
    cfg: &ProbeConfig,
    spec: &ProblemSpec,
    strategy: &StrategyConfig,
    seed: &SeedSpec,
    trace: Option<&RunTrace>,
) -> Result<MisrankReport> {
    let problems: Vec<String> = cfg
        .violations()
        .into_iter()
        .chain(spec.violations())
        .chain(strategy.violations(spec.d))
        .collect();
    if !problems.is_empty() {
        return Err(Error::InvalidConfig(problems));
    }
    let (alpha, alpha_prime) = cfg.envelope_rates()?;
    let window = admissible_gamma(spec.p, spec.d, spec.z, alpha, alpha_prime);
    let gamma = cfg.gamma.unwrap_or(cfg.gamma_fraction * window.upper);
    if !(gamma > 0.0) {
        return Err(Error::invalid(format!(
            "gamma resolved to {gamma}; set probe.gamma explicitly"
        )));
    }

    let direction = vec![1.0 / (spec.d as f64).sqrt(); spec.d];
    let mut entries = Vec::with_capacity(cfg.iterations.len());
    for &n in &cfg.iterations {
        let (dist, sigma) = match (&cfg.state_source, trace) {
            (StateSource::Synthetic { alpha, c, v }, _) => {
                let decay = (-alpha * n as f64).exp();
                (c * decay, v * decay)
            }
            (StateSource::Trace, Some(t)) => {
                let r = t.records.get(n as usize - 1).ok_or(Error::TraceTooShort {
                    iteration: n as usize,
                    available: t.records.len(),
                })?;
                (r.dist, r.sigma)
            }
            (StateSource::Trace, None) => {
                return Err(Error::invalid("trace state source needs a trace"));
            }
        };
        let x_n: Vec<f64> = spec
            .optimum
            .iter()
            .zip(&direction)
            .map(|(o, u)| o + dist * u)
            .collect();
        let delta_n = cfg.delta0 * (-gamma * n as f64).exp();
        let [close, excess, misranked] = count_events(cfg.trials, &seed.child(n), |stream| {
            joint_trial(
                &x_n,
                sigma,
                strategy.lambda,
                strategy.y,
                delta_n,
                spec,
                stream,
            )
        });
        entries.push(ProbeEntry {
            n,
            delta_n,
            dist,
            sigma,
            m: proximity_exponent(delta_n, dist, spec.p, spec.d),
            pair_proximity: Proportion::new(close, cfg.trials),
            noise_excess: Proportion::new(excess, cfg.trials),
            misranking: Proportion::new(misranked, cfg.trials),
        });
    }
    let misranking_sum = entries.iter().map(|e| e.misranking.estimate).sum();
    Ok(MisrankReport {
        gamma,
        admissible_gamma: window,
        lambda: strategy.lambda,
        y: strategy.y,
        z: spec.z,
        entries,
        misranking_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::NoiseKind;

    #[test]
    fn proportion_intervals() {
        let p = Proportion::new(50, 100);
        assert_eq!(p.estimate, 0.5);
        assert!((p.half_width - Z95 * 0.05).abs() < 1e-12);
        for t in [100, 1000, 100_000] {
            let zero = Proportion::new(0, t);
            assert_eq!(zero.lower, 0.0);
            assert!(zero.half_width <= Z95 / (2.0 * (t as f64).sqrt()));
            let one = Proportion::new(t, t);
            assert_eq!(one.upper, 1.0);
            assert!((one.half_width - zero.half_width).abs() < 1e-15);
        }
    }

    #[test]
    fn misrank_predicate() {
        assert!(!has_misranked_pair(&[1.0, 1.0], &[5.0, -5.0]));
        assert!(!has_misranked_pair(&[1.0, 2.0], &[1.0, 2.0]));
        assert!(has_misranked_pair(&[1.0, 2.0], &[2.0, 2.0]));
        assert!(has_misranked_pair(&[1.0, 2.0, 3.0], &[1.0, 3.5, 3.0]));
    }

    #[test]
    fn single_offspring_has_no_pair() {
        let spec = ProblemSpec::reference_sphere();
        let x = vec![0.2; 15];
        let p = probe_pair_proximity(&x, 0.1, 1, 1e10, &spec, 500, &SeedSpec::new(1)).unwrap();
        assert_eq!(p.successes, 0);
        let p = probe_pair_proximity(&x, 0.1, 4, 1e10, &spec, 500, &SeedSpec::new(1)).unwrap();
        assert_eq!(p.successes, 500);
    }

    #[test]
    fn zero_noise_never_misranks() {
        let spec = ProblemSpec::new(15, 2, 2.1, NoiseKind::Zero).unwrap();
        let x = vec![0.2; 15];
        let p = probe_misranking(&x, 0.3, 4, 1, &spec, 2000, &SeedSpec::new(2)).unwrap();
        assert_eq!(p.successes, 0);
        let pts = vec![x.clone(); 4];
        let e = probe_noise_excess(&pts, &spec, 1, 1e-9, 2000, &SeedSpec::new(2)).unwrap();
        assert_eq!(e.successes, 0);
    }

    #[test]
    fn optimum_points_have_no_noise() {
        let spec = ProblemSpec::reference_sphere();
        let pts = vec![vec![0.0; 15]; 3];
        let e = probe_noise_excess(&pts, &spec, 1, 1e-12, 1000, &SeedSpec::new(3)).unwrap();
        assert_eq!(e.successes, 0);
    }

    #[test]
    fn trial_count_checked() {
        let spec = ProblemSpec::reference_sphere();
        assert!(probe_misranking(&[0.1; 15], 0.1, 4, 1, &spec, 10, &SeedSpec::new(0)).is_err());
    }

    #[test]
    fn estimates_reproducible() {
        let spec = ProblemSpec::reference_sphere();
        let x = vec![0.1; 15];
        let a = probe_misranking(&x, 0.2, 4, 3, &spec, 5000, &SeedSpec::new(8)).unwrap();
        let b = probe_misranking(&x, 0.2, 4, 3, &spec, 5000, &SeedSpec::new(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gamma_window() {
        let w = admissible_gamma(2, 15, 2.1, 0.05, 0.05);
        assert!((w.lower - 0.1).abs() < 1e-15);
        assert!((w.upper - 0.105).abs() < 1e-15);
        assert_eq!(proximity_exponent(1.0, 0.5, 2, 15), 7.5);
        assert_eq!(proximity_exponent(0.1, 0.5, 2, 15), 1.0);
    }

    #[test]
    fn schedule_single_entry() {
        let spec = ProblemSpec::reference_sphere();
        let cfg = ProbeConfig {
            trials: 400,
            iterations: vec![5],
            ..ProbeConfig::default()
        };
        let r = probe_schedule(
            &cfg,
            &spec,
            &StrategyConfig::default(),
            &SeedSpec::new(0),
            None,
        )
        .unwrap();
        assert_eq!(r.entries.len(), 1);
        let e = &r.entries[0];
        for p in [e.pair_proximity, e.noise_excess, e.misranking] {
            assert!(p.half_width <= Z95 / (2.0 * 20.0) + 1e-12);
            assert!((0.0..=1.0).contains(&p.estimate));
        }
        assert!((r.gamma - 0.8 * 0.105).abs() < 1e-12);
        assert_eq!(r.misranking_sum, e.misranking.estimate);
    }

    #[test]
    fn schedule_needs_long_enough_trace() {
        let spec = ProblemSpec::reference_sphere();
        let strategy = StrategyConfig {
            budget: 480,
            ..StrategyConfig::default()
        };
        let trace = crate::strategy::run_es(&spec, &strategy, &SeedSpec::new(1)).unwrap();
        let cfg = ProbeConfig {
            trials: 200,
            iterations: vec![5, 20],
            state_source: StateSource::Trace,
            alpha: Some(0.01),
            ..ProbeConfig::default()
        };
        assert!(matches!(
            probe_schedule(&cfg, &spec, &strategy, &SeedSpec::new(0), Some(&trace)),
            Err(Error::TraceTooShort {
                iteration: 20,
                available: 10
            })
        ));
        let ok = ProbeConfig {
            iterations: vec![5, 10],
            ..cfg
        };
        let r = probe_schedule(&ok, &spec, &strategy, &SeedSpec::new(0), Some(&trace)).unwrap();
        assert_eq!(r.entries[1].dist, trace.records[9].dist);
    }

    #[test]
    fn zero_noise_schedule_is_all_zero() {
        let spec = ProblemSpec::new(15, 2, 2.1, NoiseKind::Zero).unwrap();
        let cfg = ProbeConfig {
            trials: 1000,
            iterations: vec![10, 20],
            delta0: 1e-30,
            ..ProbeConfig::default()
        };
        let r = probe_schedule(
            &cfg,
            &spec,
            &StrategyConfig::default(),
            &SeedSpec::new(4),
            None,
        )
        .unwrap();
        for e in &r.entries {
            assert_eq!(e.misranking.successes, 0);
            assert_eq!(e.noise_excess.successes, 0);
            assert_eq!(e.pair_proximity.successes, 0);
        }
    }
}
