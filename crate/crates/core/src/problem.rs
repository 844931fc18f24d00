//! Noisy sphere objectives.
//!
//! A sample of the objective at `x` is
//!
//! ```text
//! f(x, ω) = ‖x − x*‖^p + ‖x − x*‖^(p·z/2) · η(ω)
//! ```
//!
//! with `η` a zero-mean draw from a fixed distribution. `z = 0` gives additive
//! noise, `z = 2` multiplicative noise, and for `z > 0` the variance vanishes at
//! the optimum. Norms are Euclidean.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Distribution of the noise factor `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NoiseKind {
    /// Standard Gaussian.
    Gaussian,
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
    /// No noise at all; `f(x, ω) = E f(x)`.
    Zero,
}

impl NoiseKind {
    pub fn variance(&self) -> f64 {
        match *self {
            NoiseKind::Gaussian => 1.0,
            NoiseKind::Uniform { half_width } => half_width * half_width / 3.0,
            NoiseKind::Zero => 0.0,
        }
    }

    /// Draws one `η`. `Zero` does not touch the stream.
    pub fn draw(&self, stream: &mut Stream) -> f64 {
        match *self {
            NoiseKind::Gaussian => stream.gaussian_scalar(),
            NoiseKind::Uniform { half_width } => stream.uniform(-half_width, half_width),
            NoiseKind::Zero => 0.0,
        }
    }

    /// Mean of `count` independent draws.
    pub fn mean_of(&self, count: u32, stream: &mut Stream) -> f64 {
        if matches!(self, NoiseKind::Zero) {
            return 0.0;
        }
        let sum: f64 = (0..count).map(|_| self.draw(stream)).sum();
        sum / f64::from(count)
    }
}

impl Default for NoiseKind {
    fn default() -> Self {
        NoiseKind::Gaussian
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseKind::Gaussian => f.write_str("gaussian"),
            NoiseKind::Uniform { half_width } => write!(f, "uniform:{half_width}"),
            NoiseKind::Zero => f.write_str("zero"),
        }
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "gaussian" | "standard-gaussian" => Ok(NoiseKind::Gaussian),
            "zero" | "none" => Ok(NoiseKind::Zero),
            _ => {
                let half_width = s
                    .strip_prefix("uniform:")
                    .and_then(|a| a.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::invalid(format!(
                            "unknown noise kind `{s}` (expected gaussian, zero or uniform:<a>)"
                        ))
                    })?;
                if !(half_width > 0.0 && half_width.is_finite()) {
                    return Err(Error::invalid("uniform noise half-width must be positive"));
                }
                Ok(NoiseKind::Uniform { half_width })
            }
        }
    }
}

impl TryFrom<String> for NoiseKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NoiseKind> for String {
    fn from(k: NoiseKind) -> String {
        k.to_string()
    }
}

/// A noisy sphere problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub d: usize,
    pub p: u32,
    pub z: f64,
    pub noise: NoiseKind,
    pub optimum: Vec<f64>,
}

impl ProblemSpec {
    /// Optimum at the origin.
    pub fn new(d: usize, p: u32, z: f64, noise: NoiseKind) -> Result<Self> {
        Self::with_optimum(vec![0.0; d], p, z, noise)
    }

    pub fn with_optimum(optimum: Vec<f64>, p: u32, z: f64, noise: NoiseKind) -> Result<Self> {
        let spec = ProblemSpec {
            d: optimum.len(),
            p,
            z,
            noise,
            optimum,
        };
        let problems = spec.violations();
        if problems.is_empty() {
            Ok(spec)
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    /// The experimental setup: `d = 15`, `p = 2`, `z = 2.1`, Gaussian noise.
    pub fn reference_sphere() -> Self {
        ProblemSpec::new(15, 2, 2.1, NoiseKind::Gaussian).expect("valid default")
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.d == 0 {
            v.push("problem.d must be at least 1".to_string());
        }
        if self.p == 0 {
            v.push("problem.p must be at least 1".to_string());
        }
        if !(self.z >= 0.0 && self.z.is_finite()) {
            v.push(format!(
                "problem.z must be a finite real >= 0, got {}",
                self.z
            ));
        }
        if self.optimum.len() != self.d {
            v.push(format!(
                "problem.optimum has {} coordinates, expected d = {}",
                self.optimum.len(),
                self.d
            ));
        }
        if self.optimum.iter().any(|c| !c.is_finite()) {
            v.push("problem.optimum must be finite".to_string());
        }
        v
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `‖x − x*‖`.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.distance_unchecked(x))
    }

    pub(crate) fn distance_unchecked(&self, x: &[f64]) -> f64 {
        euclidean_distance(x, &self.optimum)
    }

    pub fn expected_fitness(&self, x: &[f64]) -> Result<f64> {
        Ok(self.distance(x)?.powi(self.p as i32))
    }

    /// One noisy sample; consumes one noise draw.
    pub fn sample_fitness(&self, x: &[f64], stream: &mut Stream) -> Result<f64> {
        self.averaged_fitness(x, 1, stream)
    }

    /// Mean of `y` independent noisy samples at `x`.
    pub fn averaged_fitness(&self, x: &[f64], y: u32, stream: &mut Stream) -> Result<f64> {
        self.averaged_fitness_scaled(x, y, 1.0, stream)
    }

    /// `averaged_fitness(x, y) / reference^p`, computed without forming
    /// `‖x − x*‖^p` directly.
    ///
    /// Dividing every candidate of one generation by the same positive factor
    /// leaves their ranking unchanged, and keeps the values representable
    /// when the search gets far below `1e-150` from the optimum. With
    /// `reference = 1` the result is bit-identical to the unscaled form.
    pub fn averaged_fitness_scaled(
        &self,
        x: &[f64],
        y: u32,
        reference: f64,
        stream: &mut Stream,
    ) -> Result<f64> {
        self.check_dim(x)?;
        if y == 0 {
            return Err(Error::invalid("number of resamplings Y must be at least 1"));
        }
        if !(reference > 0.0) {
            return Err(Error::invalid("fitness reference scale must be positive"));
        }
        let r = self.distance_unchecked(x);
        Ok(self.scaled_value(r, y, reference, stream))
    }

    pub(crate) fn scaled_value(&self, r: f64, y: u32, reference: f64, stream: &mut Stream) -> f64 {
        let eta = self.noise.mean_of(y, stream);
        if r == 0.0 {
            return 0.0;
        }
        let half = f64::from(self.p) * self.z / 2.0;
        if eta == 0.0 {
            return (r / reference).powi(self.p as i32);
        }
        if reference == 1.0 {
            r.powi(self.p as i32) + r.powf(half) * eta
        } else {
            let ratio = r / reference;
            let noise_scale = ratio.powf(half) * reference.powf(half - f64::from(self.p));
            ratio.powi(self.p as i32) + noise_scale * eta
        }
    }
}

/// `‖a − b‖`, rescaled by the largest coordinate difference so that
/// distances down to the smallest normal `f64` do not flush to zero.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    let scale = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let t = (x - y) / scale;
            t * t
        })
        .sum();
    scale * sum.sqrt()
}

/// Wraps a problem and counts every call to the noisy black box.
#[derive(Debug)]
pub struct CountingOracle<'a> {
    spec: &'a ProblemSpec,
    evaluations: u64,
}

impl<'a> CountingOracle<'a> {
    pub fn new(spec: &'a ProblemSpec) -> Self {
        CountingOracle {
            spec,
            evaluations: 0,
        }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn averaged(
        &mut self,
        x: &[f64],
        y: u32,
        reference: f64,
        stream: &mut Stream,
    ) -> Result<f64> {
        let v = self.spec.averaged_fitness_scaled(x, y, reference, stream)?;
        self.evaluations += u64::from(y);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;

    fn var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (
            m,
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0),
        )
    }

    fn unit(d: usize) -> Vec<f64> {
        let mut x = vec![0.0; d];
        x[0] = 1.0;
        x
    }

    #[test]
    fn expected_fitness_examples() {
        let s = ProblemSpec::new(2, 2, 2.1, NoiseKind::Gaussian).unwrap();
        assert_eq!(s.expected_fitness(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(s.expected_fitness(&[3.0, 4.0]).unwrap(), 25.0);
        let s15 = ProblemSpec::reference_sphere();
        assert_eq!(s15.expected_fitness(&unit(15)).unwrap(), 1.0);
        let shifted = ProblemSpec::with_optimum(vec![1.0, -2.0], 2, 0.0, NoiseKind::Zero).unwrap();
        assert_eq!(shifted.expected_fitness(&[4.0, 2.0]).unwrap(), 25.0);
        assert_eq!(shifted.expected_fitness(&[1.0, -2.0]).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let s = ProblemSpec::reference_sphere();
        let mut st = SeedSpec::new(0).stream();
        assert!(matches!(
            s.expected_fitness(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 15,
                got: 1
            })
        ));
        assert!(s.sample_fitness(&[1.0, 2.0], &mut st).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(ProblemSpec::new(0, 2, 1.0, NoiseKind::Gaussian).is_err());
        assert!(ProblemSpec::new(3, 0, 1.0, NoiseKind::Gaussian).is_err());
        assert!(ProblemSpec::new(3, 2, -0.5, NoiseKind::Gaussian).is_err());
    }

    #[test]
    fn zero_noise_equals_expectation() {
        let s = ProblemSpec::new(4, 3, 2.1, NoiseKind::Zero).unwrap();
        let mut st = SeedSpec::new(1).stream();
        let x = [0.3, -1.2, 0.7, 2.0];
        let e = s.expected_fitness(&x).unwrap();
        assert_eq!(s.sample_fitness(&x, &mut st).unwrap(), e);
        for y in [1, 2, 7, 100] {
            assert_eq!(s.averaged_fitness(&x, y, &mut st).unwrap(), e);
        }
    }

    #[test]
    fn optimum_has_no_noise() {
        let s = ProblemSpec::reference_sphere();
        let mut st = SeedSpec::new(3).stream();
        for _ in 0..100 {
            assert_eq!(s.sample_fitness(&vec![0.0; 15], &mut st).unwrap(), 0.0);
        }
    }

    #[test]
    fn zero_resamplings_rejected() {
        let s = ProblemSpec::reference_sphere();
        let mut st = SeedSpec::new(3).stream();
        assert!(matches!(
            s.averaged_fitness(&unit(15), 0, &mut st),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn unit_radius_variance_is_noise_variance() {
        let s = ProblemSpec::reference_sphere();
        let mut st = SeedSpec::new(4).stream();
        let x = unit(15);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| s.sample_fitness(&x, &mut st).unwrap())
            .collect();
        let (_, v) = var(&xs);
        assert!((v - 1.0).abs() < 0.05, "variance {v}");
    }

    #[test]
    fn averaging_divides_variance() {
        let s = ProblemSpec::new(3, 2, 2.1, NoiseKind::Gaussian).unwrap();
        let x = [0.6, 0.0, 0.8];
        let r: f64 = 1.0;
        let mut st = SeedSpec::new(5).stream();
        let xs: Vec<f64> = (0..10_000)
            .map(|_| s.averaged_fitness(&x, 100, &mut st).unwrap())
            .collect();
        let (_, v) = var(&xs);
        let target = r.powf(2.0 * 2.1) / 100.0;
        assert!((v / target - 1.0).abs() < 0.1, "variance {v} vs {target}");
    }

    #[test]
    fn averaged_is_unbiased() {
        let s = ProblemSpec::new(2, 2, 2.0, NoiseKind::Uniform { half_width: 1.5 }).unwrap();
        let x = [0.9, -0.4];
        let e = s.expected_fitness(&x).unwrap();
        for y in [1u32, 3] {
            let mut st = SeedSpec::new(6).child(u64::from(y)).stream();
            let xs: Vec<f64> = (0..100_000)
                .map(|_| s.averaged_fitness(&x, y, &mut st).unwrap())
                .collect();
            let (m, v) = var(&xs);
            let se = (v / xs.len() as f64).sqrt();
            assert!((m - e).abs() < 3.0 * se, "Y={y}: mean {m} vs {e} (se {se})");
        }
    }

    #[test]
    fn variance_law_constant_across_radii() {
        let s = ProblemSpec::new(3, 2, 2.1, NoiseKind::Gaussian).unwrap();
        let mut ratios = Vec::new();
        for (i, r) in [0.1f64, 0.5, 2.0].into_iter().enumerate() {
            let x = [r, 0.0, 0.0];
            let mut st = SeedSpec::new(8).child(i as u64).stream();
            let xs: Vec<f64> = (0..100_000)
                .map(|_| s.sample_fitness(&x, &mut st).unwrap())
                .collect();
            let (_, v) = var(&xs);
            ratios.push(v / r.powf(2.0 * 2.1));
        }
        for w in ratios.windows(2) {
            assert!((w[0] / w[1] - 1.0).abs() < 0.1, "ratios {ratios:?}");
        }
    }

    #[test]
    fn scaled_evaluation_preserves_order_and_reference_one_is_exact() {
        let s = ProblemSpec::new(2, 2, 2.1, NoiseKind::Gaussian).unwrap();
        let x = [0.3, 0.4];
        let a = s
            .averaged_fitness(&x, 5, &mut SeedSpec::new(9).stream())
            .unwrap();
        let b = s
            .averaged_fitness_scaled(&x, 5, 1.0, &mut SeedSpec::new(9).stream())
            .unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let c = s
            .averaged_fitness_scaled(&x, 5, 0.5, &mut SeedSpec::new(9).stream())
            .unwrap();
        assert!((c * 0.25 - a).abs() < 1e-14);
        // far below the range where ‖x‖² is representable
        let tiny = [3e-200, 4e-200];
        let near = [3e-200, 4.1e-200];
        let z = ProblemSpec::new(2, 2, 2.1, NoiseKind::Zero).unwrap();
        let mut st = SeedSpec::new(0).stream();
        let ft = z
            .averaged_fitness_scaled(&tiny, 1, 5e-200, &mut st)
            .unwrap();
        let fn_ = z
            .averaged_fitness_scaled(&near, 1, 5e-200, &mut st)
            .unwrap();
        assert!((ft - 1.0).abs() < 1e-12);
        assert!(fn_ > ft);
    }

    #[test]
    fn distance_survives_tiny_coordinates() {
        let d = euclidean_distance(&[3e-200, 4e-200], &[0.0, 0.0]);
        assert!((d / 5e-200 - 1.0).abs() < 1e-15);
        assert_eq!(euclidean_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(euclidean_distance(&[3.0, 4.0], &[0.0, 0.0]), 5.0);
    }

    #[test]
    fn oracle_counts_resamplings() {
        let s = ProblemSpec::reference_sphere();
        let mut oracle = CountingOracle::new(&s);
        let mut st = SeedSpec::new(1).stream();
        oracle.averaged(&unit(15), 12, 1.0, &mut st).unwrap();
        oracle.averaged(&unit(15), 3, 1.0, &mut st).unwrap();
        assert_eq!(oracle.evaluations(), 15);
    }

    #[test]
    fn noise_kind_parse() {
        assert_eq!(
            "gaussian".parse::<NoiseKind>().unwrap(),
            NoiseKind::Gaussian
        );
        assert_eq!("zero".parse::<NoiseKind>().unwrap(), NoiseKind::Zero);
        assert_eq!(
            "uniform:0.5".parse::<NoiseKind>().unwrap(),
            NoiseKind::Uniform { half_width: 0.5 }
        );
        assert!("uniform:-1".parse::<NoiseKind>().is_err());
        assert!("cauchy".parse::<NoiseKind>().is_err());
        let k = NoiseKind::Uniform { half_width: 0.25 };
        assert_eq!(k.to_string().parse::<NoiseKind>().unwrap(), k);
    }
}
