//! The self-adaptive (μ,λ) evolution strategy with a constant number `Y` of
//! fitness resamplings per offspring.
//!
//! Each iteration:
//!
//! 1. offspring `j` (0-based) mutates parent `j mod μ`: its step-size is
//!    `σ_parent · exp(τ · N(0,1))`, and its point is `x_parent + σ_child · N_d`
//!    using the freshly mutated `σ_child`;
//! 2. every offspring is evaluated `Y` times and the mean is its fitness;
//! 3. offspring are sorted by that mean (stable, so ties keep offspring
//!    order) and the best `μ` become the next parents. Parents never
//!    survive.
//!
//! Randomness is split per `(run, iteration, offspring, role)`, so changing
//! `Y` does not change the mutation draws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{euclidean_distance, CountingOracle, ProblemSpec};
use crate::rng::{DrawRole, SeedSpec, Stream};

/// Below this, distances and step-sizes no longer model the real-valued process.
pub const UNDERFLOW_LIMIT: f64 = 1e-300;
/// A run whose best parent drifts beyond this distance is flagged as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e150;

/// How the initial parents are placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Init {
    /// `x* + (1, …, 1)/√d`, at distance 1 from the optimum.
    Named(InitKind),
    /// Absolute coordinates.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    UnitVector,
}

impl Default for Init {
    fn default() -> Self {
        Init::Named(InitKind::UnitVector)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyConfig {
    pub mu: usize,
    pub lambda: usize,
    #[serde(rename = "Y")]
    pub y: u32,
    pub budget: u64,
    pub sigma0: f64,
    /// Step-size learning rate; `None` means `1/(2d)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default)]
    pub init: Init,
}

impl Default for StrategyConfig {
    /// `μ = 2`, `λ = 4`, `Y = 12`, budget 500000, `σ₁ = 1`.
    fn default() -> Self {
        StrategyConfig {
            mu: 2,
            lambda: 4,
            y: 12,
            budget: 500_000,
            sigma0: 1.0,
            tau: None,
            init: Init::default(),
        }
    }
}

impl StrategyConfig {
    pub fn tau_for(&self, d: usize) -> f64 {
        self.tau.unwrap_or(1.0 / (2.0 * d as f64))
    }

    pub fn evals_per_iteration(&self) -> u64 {
        self.lambda as u64 * u64::from(self.y)
    }

    /// Number of full iterations the budget pays for.
    pub fn max_iterations(&self) -> u64 {
        match self.evals_per_iteration() {
            0 => 0,
            per => self.budget / per,
        }
    }

    pub fn violations(&self, d: usize) -> Vec<String> {
        let mut v = Vec::new();
        if self.mu == 0 {
            v.push("strategy.mu must be at least 1".to_string());
        }
        if self.lambda < self.mu {
            v.push(format!(
                "strategy.lambda ({}) must be >= strategy.mu ({})",
                self.lambda, self.mu
            ));
        }
        if self.y == 0 {
            v.push("strategy.Y must be at least 1".to_string());
        }
        if self.budget < self.evals_per_iteration() {
            v.push(format!(
                "strategy.budget ({}) must be >= lambda * Y ({})",
                self.budget,
                self.evals_per_iteration()
            ));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            v.push(format!(
                "strategy.sigma0 must be positive, got {}",
                self.sigma0
            ));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                v.push(format!("strategy.tau must be positive, got {tau}"));
            }
        }
        if let Init::Explicit(x) = &self.init {
            if x.len() != d {
                v.push(format!(
                    "strategy.init has {} coordinates, expected d = {d}",
                    x.len()
                ));
            }
        }
        v
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let v = self.violations(d);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }

    pub fn initial_point(&self, spec: &ProblemSpec) -> Vec<f64> {
        match &self.init {
            Init::Named(InitKind::UnitVector) => {
                let c = 1.0 / (spec.d as f64).sqrt();
                spec.optimum.iter().map(|o| o + c).collect()
            }
            Init::Explicit(x) => x.clone(),
        }
    }
}

/// A point with its own step-size.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub x: Vec<f64>,
    pub sigma: f64,
}

/// Parents between two iterations, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct EsState {
    pub parents: Vec<Individual>,
    /// Iterations completed so far.
    pub iteration: u64,
    pub evals_used: u64,
}

impl EsState {
    pub fn initial(spec: &ProblemSpec, cfg: &StrategyConfig) -> Result<Self> {
        cfg.validate(spec.d)?;
        let x0 = cfg.initial_point(spec);
        Ok(EsState {
            parents: vec![
                Individual {
                    x: x0,
                    sigma: cfg.sigma0
                };
                cfg.mu
            ],
            iteration: 0,
            evals_used: 0,
        })
    }

    pub fn best(&self) -> &Individual {
        &self.parents[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: u64,
    pub evals: u64,
    pub dist: f64,
    pub log_dist: f64,
    pub sigma: f64,
}

impl IterationRecord {
    /// `log_dist` is `-inf` when `dist` is exactly 0.
    pub fn new(n: u64, evals: u64, dist: f64, sigma: f64) -> Self {
        IterationRecord {
            n,
            evals,
            dist,
            log_dist: dist.ln(),
            sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Diverged,
    Underflowed,
}

impl RunStatus {
    /// Status implied by a record, if it ends the run.
    pub fn terminal(record: &IterationRecord) -> Option<RunStatus> {
        if !(record.dist <= DIVERGENCE_LIMIT) {
            Some(RunStatus::Diverged)
        } else if record.dist < UNDERFLOW_LIMIT || record.sigma < UNDERFLOW_LIMIT {
            Some(RunStatus::Underflowed)
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Diverged => "diverged",
            RunStatus::Underflowed => "underflowed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub config: StrategyConfig,
    pub problem: ProblemSpec,
    pub seed: SeedSpec,
    pub records: Vec<IterationRecord>,
    pub status: RunStatus,
}

impl RunTrace {
    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("traces are nonempty")
    }
}

/// Everything one iteration produced; the offspring data is kept for
/// inspection in tests and probes.
#[derive(Debug, Clone)]
pub struct IterationStep {
    pub state: EsState,
    pub record: IterationRecord,
    pub offspring: Vec<Individual>,
    /// Noisy averaged fitness of each offspring, divided by a common positive
    /// factor (see [`ProblemSpec::averaged_fitness_scaled`]).
    pub values: Vec<f64>,
    /// Offspring indices of the new parents, best first.
    pub survivors: Vec<usize>,
}

/// Log-normal step-size mutation followed by an isotropic Gaussian step of
/// the mutated size.
pub fn mutate(
    parent_x: &[f64],
    parent_sigma: f64,
    tau: f64,
    sigma_stream: &mut Stream,
    point_stream: &mut Stream,
) -> Individual {
    let g = sigma_stream.gaussian_scalar();
    let mut step = vec![0.0; parent_x.len()];
    point_stream.fill_gaussian(&mut step);
    mutate_with(parent_x, parent_sigma, tau, g, &step)
}

/// [`mutate`] with the Gaussian draws supplied.
pub fn mutate_with(
    parent_x: &[f64],
    parent_sigma: f64,
    tau: f64,
    g: f64,
    step: &[f64],
) -> Individual {
    let sigma = parent_sigma * (tau * g).exp();
    let x = parent_x
        .iter()
        .zip(step)
        .map(|(xi, si)| xi + sigma * si)
        .collect();
    Individual { x, sigma }
}

/// Indices of the `mu` smallest values, ascending, ties broken by index.
pub fn select(values: &[f64], mu: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order.truncate(mu);
    order
}

pub fn es_iteration(
    state: &EsState,
    spec: &ProblemSpec,
    cfg: &StrategyConfig,
    run_seed: &SeedSpec,
) -> Result<IterationStep> {
    if state.parents.len() != cfg.mu {
        return Err(Error::invalid(format!(
            "state has {} parents, expected mu = {}",
            state.parents.len(),
            cfg.mu
        )));
    }
    let per_iteration = cfg.evals_per_iteration();
    let remaining = cfg.budget.saturating_sub(state.evals_used);
    if remaining < per_iteration {
        return Err(Error::BudgetExhausted {
            remaining,
            required: per_iteration,
        });
    }

    let n = state.iteration + 1;
    let tau = cfg.tau_for(spec.d);
    let reference = {
        let r = euclidean_distance(&state.best().x, &spec.optimum);
        if r > 0.0 && r.is_finite() {
            r
        } else {
            1.0
        }
    };

    let mut oracle = CountingOracle::new(spec);
    let mut offspring = Vec::with_capacity(cfg.lambda);
    let mut values = Vec::with_capacity(cfg.lambda);
    for j in 0..cfg.lambda {
        let parent = &state.parents[j % cfg.mu];
        let j64 = j as u64;
        let mut sigma_stream = run_seed.stream_at(&[n, j64, DrawRole::SigmaMutation as u64]);
        let mut point_stream = run_seed.stream_at(&[n, j64, DrawRole::PointMutation as u64]);
        let mut noise_stream = run_seed.stream_at(&[n, j64, DrawRole::FitnessNoise as u64]);
        let child = mutate(
            &parent.x,
            parent.sigma,
            tau,
            &mut sigma_stream,
            &mut point_stream,
        );
        values.push(oracle.averaged(&child.x, cfg.y, reference, &mut noise_stream)?);
        offspring.push(child);
    }
    debug_assert_eq!(oracle.evaluations(), per_iteration);

    let survivors = select(&values, cfg.mu);
    let parents: Vec<Individual> = survivors.iter().map(|&j| offspring[j].clone()).collect();
    let best = &parents[0];
    let evals_used = state.evals_used + oracle.evaluations();
    let record = IterationRecord::new(
        n,
        evals_used,
        euclidean_distance(&best.x, &spec.optimum),
        best.sigma,
    );
    Ok(IterationStep {
        state: EsState {
            parents,
            iteration: n,
            evals_used,
        },
        record,
        offspring,
        values,
        survivors,
    })
}

/// Runs until the budget cannot pay for another iteration, or the best
/// parent underflows or diverges.
pub fn run_es(spec: &ProblemSpec, cfg: &StrategyConfig, seed: &SeedSpec) -> Result<RunTrace> {
    let problems: Vec<String> = spec
        .violations()
        .into_iter()
        .chain(cfg.violations(spec.d))
        .collect();
    if !problems.is_empty() {
        return Err(Error::InvalidConfig(problems));
    }
    let mut state = EsState::initial(spec, cfg)?;
    let mut records = Vec::with_capacity(cfg.max_iterations().min(1 << 20) as usize);
    let mut status = RunStatus::Completed;
    while cfg.budget - state.evals_used >= cfg.evals_per_iteration() {
        let step = es_iteration(&state, spec, cfg, seed)?;
        records.push(step.record);
        state = step.state;
        if let Some(s) = RunStatus::terminal(&step.record) {
            status = s;
            break;
        }
    }
    Ok(RunTrace {
        config: cfg.clone(),
        problem: spec.clone(),
        seed: seed.clone(),
        records,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::NoiseKind;

    fn noise_free(d: usize) -> ProblemSpec {
        ProblemSpec::new(d, 2, 2.1, NoiseKind::Zero).unwrap()
    }

    #[test]
    fn identity_mutation() {
        let x = [1.0, -2.0, 0.5];
        let child = mutate_with(&x, 0.3, 0.1, 0.0, &[0.0; 3]);
        assert_eq!(child.x, x.to_vec());
        assert_eq!(child.sigma, 0.3);
        let child = mutate_with(&x, 0.3, 0.1, 0.0, &[1.0, 0.0, 0.0]);
        assert_eq!(child.sigma, 0.3);
        assert_eq!(child.x[0], 1.3);
    }

    #[test]
    fn mutated_sigma_scales_the_step() {
        let child = mutate_with(&[0.0], 1.0, 0.5, 2.0, &[1.0]);
        assert!((child.sigma - 1f64.exp()).abs() < 1e-15);
        assert_eq!(child.x[0], child.sigma);
    }

    #[test]
    fn log_step_size_change_is_centered() {
        let tau = 1.0 / 30.0;
        let n = 100_000;
        let seed = SeedSpec::new(31);
        let mut ss = seed.child(0).stream();
        let mut ps = seed.child(1).stream();
        let mean = (0..n)
            .map(|_| mutate(&[0.0; 15], 1.0, tau, &mut ss, &mut ps).sigma.ln())
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 3.0 * tau / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn noise_free_selects_nearer_offspring() {
        let spec = noise_free(3);
        let cfg = StrategyConfig {
            mu: 1,
            lambda: 2,
            y: 1,
            budget: 100,
            sigma0: 0.5,
            tau: None,
            init: Init::Explicit(vec![1.0, 1.0, 1.0]),
        };
        let state = EsState::initial(&spec, &cfg).unwrap();
        let step = es_iteration(&state, &spec, &cfg, &SeedSpec::new(3)).unwrap();
        let d: Vec<f64> = step
            .offspring
            .iter()
            .map(|o| spec.distance(&o.x).unwrap())
            .collect();
        let nearer = if d[0] <= d[1] { 0 } else { 1 };
        assert_eq!(step.survivors, vec![nearer]);
        assert_eq!(step.record.dist, d[nearer]);
    }

    #[test]
    fn evaluations_per_iteration() {
        let spec = ProblemSpec::reference_sphere();
        let cfg = StrategyConfig {
            y: 7,
            budget: 1000,
            ..StrategyConfig::default()
        };
        let state = EsState::initial(&spec, &cfg).unwrap();
        let step = es_iteration(&state, &spec, &cfg, &SeedSpec::new(1)).unwrap();
        assert_eq!(step.record.evals, 28);
        assert_eq!(step.state.evals_used, 28);
        assert_eq!(step.offspring.len(), 4);
        assert_eq!(step.survivors.len(), 2);
    }

    #[test]
    fn ties_keep_offspring_order() {
        let values = [3.0, 1.0, 2.0, 1.0, 1.0];
        assert_eq!(select(&values, 3), vec![1, 3, 4]);
        let mut reference: Vec<(f64, usize)> = values.iter().copied().zip(0..).collect();
        reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect: Vec<usize> = reference.iter().map(|&(_, i)| i).collect();
        assert_eq!(select(&values, 5), expect);
    }

    #[test]
    fn budget_refusal() {
        let spec = ProblemSpec::reference_sphere();
        let cfg = StrategyConfig {
            budget: 100,
            y: 12,
            ..StrategyConfig::default()
        };
        let mut state = EsState::initial(&spec, &cfg).unwrap();
        let seed = SeedSpec::new(1);
        state = es_iteration(&state, &spec, &cfg, &seed).unwrap().state;
        state = es_iteration(&state, &spec, &cfg, &seed).unwrap().state;
        assert_eq!(state.evals_used, 96);
        assert!(matches!(
            es_iteration(&state, &spec, &cfg, &seed),
            Err(Error::BudgetExhausted {
                remaining: 4,
                required: 48
            })
        ));
    }

    #[test]
    fn budget_of_one_iteration() {
        let spec = ProblemSpec::reference_sphere();
        let cfg = StrategyConfig {
            budget: 48,
            ..StrategyConfig::default()
        };
        let trace = run_es(&spec, &cfg, &SeedSpec::new(9)).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].n, 1);
        assert_eq!(trace.records[0].evals, 48);
        assert_eq!(trace.status, RunStatus::Completed);
    }

    #[test]
    fn invalid_configs() {
        let base = StrategyConfig::default();
        let cases = [
            StrategyConfig {
                mu: 0,
                ..base.clone()
            },
            StrategyConfig {
                mu: 5,
                ..base.clone()
            },
            StrategyConfig {
                y: 0,
                ..base.clone()
            },
            StrategyConfig {
                budget: 47,
                ..base.clone()
            },
            StrategyConfig {
                sigma0: 0.0,
                ..base.clone()
            },
            StrategyConfig {
                tau: Some(-1.0),
                ..base.clone()
            },
            StrategyConfig {
                init: Init::Explicit(vec![1.0; 3]),
                ..base.clone()
            },
        ];
        for cfg in cases {
            assert!(
                matches!(
                    run_es(&ProblemSpec::reference_sphere(), &cfg, &SeedSpec::new(0)),
                    Err(Error::InvalidConfig(_))
                ),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let spec = ProblemSpec::reference_sphere();
        let cfg = StrategyConfig {
            budget: 4800,
            ..StrategyConfig::default()
        };
        let a = run_es(&spec, &cfg, &SeedSpec::new(5).child(2)).unwrap();
        let b = run_es(&spec, &cfg, &SeedSpec::new(5).child(2)).unwrap();
        assert_eq!(a, b);
        let c = run_es(&spec, &cfg, &SeedSpec::new(5).child(3)).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn records_are_contiguous_and_budget_exact() {
        let spec = ProblemSpec::reference_sphere();
        let cfg = StrategyConfig {
            budget: 1000,
            y: 3,
            ..StrategyConfig::default()
        };
        let t = run_es(&spec, &cfg, &SeedSpec::new(1)).unwrap();
        assert_eq!(t.records.len() as u64, 1000 / 12);
        for (i, r) in t.records.iter().enumerate() {
            assert_eq!(r.n, i as u64 + 1);
            assert_eq!(r.evals, r.n * 12);
            assert!(r.dist >= 0.0 && r.sigma > 0.0);
        }
        let used = t.final_record().evals;
        assert!(used <= cfg.budget && cfg.budget < used + 12);
    }

    #[test]
    fn initial_point_is_unit_distance() {
        let spec = ProblemSpec::with_optimum(vec![2.0; 15], 2, 2.1, NoiseKind::Gaussian).unwrap();
        let x = StrategyConfig::default().initial_point(&spec);
        assert!((spec.distance(&x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_free_run_converges() {
        let spec = noise_free(15);
        let cfg = StrategyConfig {
            y: 1,
            budget: 20_000,
            ..StrategyConfig::default()
        };
        let t = run_es(&spec, &cfg, &SeedSpec::new(12)).unwrap();
        assert_eq!(t.status, RunStatus::Completed);
        assert!(t.final_record().dist < 1e-2, "{:?}", t.final_record());
    }

    #[test]
    fn underflow_stops_run() {
        let spec = noise_free(2);
        let cfg = StrategyConfig {
            y: 1,
            budget: 4_000_000,
            tau: Some(0.5),
            ..StrategyConfig::default()
        };
        let t = run_es(&spec, &cfg, &SeedSpec::new(2)).unwrap();
        assert_eq!(t.status, RunStatus::Underflowed);
        let last = t.final_record();
        assert!(last.dist < UNDERFLOW_LIMIT || last.sigma < UNDERFLOW_LIMIT);
        assert!((t.records.len() as u64) < cfg.max_iterations());
    }

    #[test]
    fn terminal_status_classification() {
        let r = IterationRecord::new(1, 4, 1e151, 1.0);
        assert_eq!(RunStatus::terminal(&r), Some(RunStatus::Diverged));
        let r = IterationRecord::new(1, 4, f64::NAN, 1.0);
        assert_eq!(RunStatus::terminal(&r), Some(RunStatus::Diverged));
        let r = IterationRecord::new(1, 4, 1.0, 1e-301);
        assert_eq!(RunStatus::terminal(&r), Some(RunStatus::Underflowed));
        let r = IterationRecord::new(1, 4, 0.0, 1.0);
        assert_eq!(RunStatus::terminal(&r), Some(RunStatus::Underflowed));
        assert_eq!(r.log_dist, f64::NEG_INFINITY);
        assert_eq!(
            RunStatus::terminal(&IterationRecord::new(1, 4, 0.5, 0.5)),
            None
        );
    }
}
