//! Classical ±1 strategies for the `a·b` correlation functional and their
//! Monte Carlo and closed-form Bell values.
//!
//! Sign convention: `sgn(0) = +1`. In the one-bit protocol, ties
//! `|z'·a| = |z''·a|` send bit 0. Both are measure-zero events.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::bounds;
use crate::error::{invalid, Error, Result};
use crate::golden;
use crate::sphere::{dot, RandomStream, UnitVector};

const THETA_MAX_ITER: usize = 500;

#[inline]
pub fn sgn(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            expected,
            actual: got,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TranscriptSample {
    pub alpha: i8,
    pub beta: i8,
    pub bit: Option<u8>,
}

/// A transcript together with the inputs that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub a: UnitVector,
    pub b: UnitVector,
    pub outcome: TranscriptSample,
}

/// Something that maps Alice's and Bob's inputs to ±1 outputs.
pub trait Strategy: Sync {
    fn dim(&self) -> usize;

    /// Unchecked evaluation on raw unit-length slices of length [`Strategy::dim`].
    fn respond(&self, a: &[f64], b: &[f64]) -> TranscriptSample;
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalSignStrategy {
    z: UnitVector,
}

impl LocalSignStrategy {
    pub fn new(z: UnitVector) -> Self {
        LocalSignStrategy { z }
    }

    /// `z = e₁`, which is optimal up to rotation.
    pub fn aligned(n: usize) -> Result<Self> {
        Ok(Self::new(UnitVector::basis(n, 0)?))
    }

    pub fn z(&self) -> &UnitVector {
        &self.z
    }
}

impl Strategy for LocalSignStrategy {
    fn dim(&self) -> usize {
        self.z.dim()
    }

    fn respond(&self, a: &[f64], b: &[f64]) -> TranscriptSample {
        let z = self.z.components();
        TranscriptSample {
            alpha: sgn(dot(z, a)),
            beta: sgn(dot(z, b)),
            bit: None,
        }
    }
}

pub fn run_local(strategy: &LocalSignStrategy, a: &UnitVector, b: &UnitVector) -> Result<TranscriptSample> {
    check_dim(strategy.dim(), a.dim())?;
    check_dim(strategy.dim(), b.dim())?;
    Ok(strategy.respond(a.components(), b.components()))
}

/// Alice sends which of `z'`, `z''` is better aligned with her input and both
/// parties output the sign along that direction.
#[derive(Clone, Debug, PartialEq)]
pub struct OneBitSignStrategy {
    theta: f64,
    z_prime: UnitVector,
    z_double_prime: UnitVector,
}

impl OneBitSignStrategy {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return invalid(format!("theta must lie in [0, pi/2], got {theta}"));
        }
        if n < 2 {
            return invalid(format!("one-bit strategy needs n >= 2, got {n}"));
        }
        let (s, c) = theta.sin_cos();
        let mut zp = vec![0.0; n];
        let mut zpp = vec![0.0; n];
        zp[0] = s;
        zp[1] = c;
        zpp[0] = -s;
        zpp[1] = c;
        Ok(OneBitSignStrategy {
            theta,
            z_prime: UnitVector::new(zp)?,
            z_double_prime: UnitVector::new(zpp)?,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn z_prime(&self) -> &UnitVector {
        &self.z_prime
    }

    pub fn z_double_prime(&self) -> &UnitVector {
        &self.z_double_prime
    }

    fn direction(&self, bit: u8) -> &[f64] {
        if bit == 0 {
            self.z_prime.components()
        } else {
            self.z_double_prime.components()
        }
    }

    /// Alice's side: her output and the bit she transmits.
    pub fn alice(&self, a: &[f64]) -> (i8, u8) {
        let p = dot(self.z_prime.components(), a);
        let q = dot(self.z_double_prime.components(), a);
        if p.abs() >= q.abs() {
            (sgn(p), 0)
        } else {
            (sgn(q), 1)
        }
    }

    /// Bob's side: a function of his input and the received bit only.
    pub fn bob(&self, b: &[f64], bit: u8) -> i8 {
        sgn(dot(self.direction(bit), b))
    }
}

impl Strategy for OneBitSignStrategy {
    fn dim(&self) -> usize {
        self.z_prime.dim()
    }

    fn respond(&self, a: &[f64], b: &[f64]) -> TranscriptSample {
        let (alpha, bit) = self.alice(a);
        TranscriptSample {
            alpha,
            beta: self.bob(b, bit),
            bit: Some(bit),
        }
    }
}

pub fn run_one_bit(strategy: &OneBitSignStrategy, a: &UnitVector, b: &UnitVector) -> Result<TranscriptSample> {
    check_dim(strategy.dim(), a.dim())?;
    check_dim(strategy.dim(), b.dim())?;
    Ok(strategy.respond(a.components(), b.components()))
}

/// Draws one uniform pair from `stream` and records the full transcript.
pub fn sample_transcript<S: Strategy>(strategy: &S, stream: &mut RandomStream) -> Transcript {
    let n = strategy.dim();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    stream.fill_uniform(&mut a);
    stream.fill_uniform(&mut b);
    let outcome = strategy.respond(&a, &b);
    Transcript {
        a: UnitVector::normalized(a).expect("sampled point is nonzero"),
        b: UnitVector::normalized(b).expect("sampled point is nonzero"),
        outcome,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateResult {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl EstimateResult {
    /// `(mean − reference) / stderr`.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.stderr
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: u64,
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum.add(other.sum.value());
        self.sum_sq.add(other.sum_sq.value());
    }
}

/// Monte Carlo mean of `integrand(a, b)` over independent uniform pairs on
/// `S^{n-1}`. The index range is cut into `workers` contiguous chunks and
/// chunk `i` draws from stream `(seed, i)`, so the result depends only on
/// `(n_samples, seed, workers)`.
pub fn monte_carlo<F>(n: usize, n_samples: u64, seed: u64, workers: usize, integrand: F) -> Result<EstimateResult>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    if n < 2 {
        return invalid(format!("dimension must be >= 2, got {n}"));
    }
    if n_samples < 2 {
        return invalid(format!("need at least 2 samples, got {n_samples}"));
    }
    if workers == 0 {
        return invalid("workers must be >= 1");
    }
    let w = workers as u64;
    let chunk = |i: u64| -> Moments {
        let start = n_samples * i / w;
        let end = n_samples * (i + 1) / w;
        let mut stream = RandomStream::new(seed, i);
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut m = Moments::default();
        for _ in start..end {
            stream.fill_uniform(&mut a);
            stream.fill_uniform(&mut b);
            m.push(integrand(&a, &b));
        }
        m
    };
    let parts: Vec<Moments> = if workers == 1 {
        vec![chunk(0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..w).map(|i| scope.spawn(move || chunk(i))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    let count = total.count as f64;
    let mean = total.sum.value() / count;
    let var = ((total.sum_sq.value() - count * mean * mean) / (count - 1.0)).max(0.0);
    Ok(EstimateResult {
        mean,
        stderr: (var / count).sqrt(),
        n_samples,
        seed,
        workers,
    })
}

/// Estimates the Bell value `E[(a·b) α β]` of `strategy`.
pub fn estimate_bell<S: Strategy>(strategy: &S, n_samples: u64, seed: u64, workers: usize) -> Result<EstimateResult> {
    monte_carlo(strategy.dim(), n_samples, seed, workers, |a, b| {
        let t = strategy.respond(a, b);
        dot(a, b) * f64::from(t.alpha) * f64::from(t.beta)
    })
}

/// Bell value of the vector strategy `A(a) = a`, `B(b) = b`: `E[(a·b)²]`.
pub fn quantum_value_mc(n: usize, n_samples: u64, seed: u64, workers: usize) -> Result<EstimateResult> {
    monte_carlo(n, n_samples, seed, workers, |a, b| {
        let d = dot(a, b);
        d * d
    })
}

/// Exact Bell value of [`OneBitSignStrategy`]: `κ(n)² (cos θ̄ + sin θ̄)` with
/// `θ̄ = min(θ, π/2 − θ)`.
pub fn exact_one_bit_value(n: usize, theta: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return invalid(format!("theta must lie in [0, pi/2], got {theta}"));
    }
    let local = bounds::local_bound(n as i64)?.to_f64();
    let folded = theta.min(FRAC_PI_2 - theta);
    Ok(local * (folded.cos() + folded.sin()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaOptimum {
    pub theta: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section maximization of [`exact_one_bit_value`] over `[0, π/2]`.
pub fn optimize_theta(n: usize, tolerance: f64) -> Result<ThetaOptimum> {
    if n < 2 {
        return invalid(format!("optimize_theta needs n >= 2, got {n}"));
    }
    let local = bounds::local_bound(n as i64)?.to_f64();
    let objective = |t: f64| {
        let folded = t.min(FRAC_PI_2 - t).max(0.0);
        local * (folded.cos() + folded.sin())
    };
    let m = golden::maximize(objective, 0.0, FRAC_PI_2, tolerance, THETA_MAX_ITER)?;
    Ok(ThetaOptimum {
        theta: m.x,
        value: exact_one_bit_value(n, m.x.clamp(0.0, FRAC_PI_2))?,
        iterations: m.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};

    fn uv(v: Vec<f64>) -> UnitVector {
        UnitVector::new(v).unwrap()
    }

    #[test]
    fn local_examples() {
        let s = LocalSignStrategy::aligned(3).unwrap();
        let e1 = UnitVector::basis(3, 0).unwrap();
        let e2 = UnitVector::basis(3, 1).unwrap();
        let t = run_local(&s, &e1, &e1).unwrap();
        assert_eq!((t.alpha, t.beta, t.bit), (1, 1, None));
        let t = run_local(&s, &e1, &-e1.clone()).unwrap();
        assert_eq!((t.alpha, t.beta), (1, -1));
        let t = run_local(&s, &e2, &e1).unwrap();
        assert_eq!(t.alpha, 1);
        let t = run_local(&s, &-e2, &e1).unwrap();
        assert_eq!(t.alpha, 1, "sgn(-0) is +1");
        assert!(run_local(&s, &UnitVector::basis(2, 0).unwrap(), &e1).is_err());
    }

    #[test]
    fn one_bit_vectors() {
        for t in [0.0, 0.3, FRAC_PI_4, 1.2, FRAC_PI_2] {
            let s = OneBitSignStrategy::new(6, t).unwrap();
            let d = s.z_prime().dot(s.z_double_prime()).unwrap();
            assert!((d - (2.0 * t).cos()).abs() < 1e-12);
        }
        assert!(OneBitSignStrategy::new(3, -1e-3).is_err());
        assert!(OneBitSignStrategy::new(3, 2.0).is_err());
        assert!(OneBitSignStrategy::new(1, 0.5).is_err());
    }

    #[test]
    fn one_bit_examples() {
        let s = OneBitSignStrategy::new(4, FRAC_PI_4).unwrap();
        let e1 = UnitVector::basis(4, 0).unwrap();
        let e2 = UnitVector::basis(4, 1).unwrap();
        let t = run_one_bit(&s, &e1, &e1).unwrap();
        assert_eq!((t.alpha, t.beta, t.bit), (1, 1, Some(0)));
        let t = run_one_bit(&s, &e2, &e2).unwrap();
        assert_eq!((t.alpha, t.beta, t.bit), (1, 1, Some(0)));

        let a = uv(vec![-FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0]);
        let b_plus = uv(vec![-FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0]);
        let b_minus = uv(vec![FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0, 0.0]);
        let t = run_one_bit(&s, &a, &b_plus).unwrap();
        assert_eq!((t.alpha, t.beta, t.bit), (1, 1, Some(1)));
        let t = run_one_bit(&s, &a, &b_minus).unwrap();
        assert_eq!((t.alpha, t.beta, t.bit), (1, -1, Some(1)));

        assert!(run_one_bit(&s, &UnitVector::basis(3, 0).unwrap(), &e1).is_err());
    }

    #[test]
    fn exact_values() {
        assert!((exact_one_bit_value(5, FRAC_PI_4).unwrap() - 9.0 * SQRT_2 / 64.0).abs() < 1e-15);
        assert!((exact_one_bit_value(5, 0.0).unwrap() - 9.0 / 64.0).abs() < 1e-15);
        assert!((exact_one_bit_value(3, FRAC_PI_4).unwrap() - SQRT_2 / 4.0).abs() < 1e-15);
        assert!(exact_one_bit_value(3, -0.5).is_err());
        assert!(exact_one_bit_value(1, 0.5).is_err());
    }

    #[test]
    fn one_bit_dominance() {
        for n in 2..=20 {
            let local = bounds::local_bound(n as i64).unwrap().to_f64();
            let cap = SQRT_2 * local;
            assert!((exact_one_bit_value(n, 0.0).unwrap() - local).abs() < 1e-12);
            for i in 0..=100 {
                let t = FRAC_PI_2 * i as f64 / 100.0;
                let v = exact_one_bit_value(n, t).unwrap();
                assert!(v <= cap + 1e-12);
                if i != 50 {
                    assert!(v < cap - 1e-6, "n={n} θ={t}");
                }
            }
        }
    }

    #[test]
    fn optimizer_finds_quarter_pi() {
        for (n, tol) in [(5, 1e-8), (2, 1e-8), (3, 1e-6)] {
            let opt = optimize_theta(n, tol).unwrap();
            assert!((opt.theta - FRAC_PI_4).abs() <= tol, "n={n}: {}", opt.theta);
            let cap = bounds::one_bit_cap(n as i64).unwrap().to_f64();
            assert!((opt.value - cap).abs() < 1e-10);
        }
        assert!(optimize_theta(5, 0.0).is_err());
        assert!(optimize_theta(1, 1e-6).is_err());
    }

    #[test]
    fn estimator_rejects_bad_sizes() {
        let s = LocalSignStrategy::aligned(3).unwrap();
        assert!(estimate_bell(&s, 1, 0, 1).is_err());
        assert!(estimate_bell(&s, 100, 0, 0).is_err());
        assert!(quantum_value_mc(1, 100, 0, 1).is_err());
    }

    #[test]
    fn estimator_is_deterministic_per_partition() {
        let s = OneBitSignStrategy::new(5, FRAC_PI_4).unwrap();
        let r1 = estimate_bell(&s, 20_000, 9, 3).unwrap();
        let r2 = estimate_bell(&s, 20_000, 9, 3).unwrap();
        assert_eq!(r1.mean.to_bits(), r2.mean.to_bits());
        assert_eq!(r1.stderr.to_bits(), r2.stderr.to_bits());
        let r3 = estimate_bell(&s, 20_000, 9, 2).unwrap();
        assert_ne!(r1.mean.to_bits(), r3.mean.to_bits());
        assert_eq!((r1.n_samples, r1.seed, r1.workers), (20_000, 9, 3));
    }

    #[test]
    fn theta_zero_matches_local_pathwise() {
        let one = OneBitSignStrategy::new(5, 0.0).unwrap();
        let loc = LocalSignStrategy::new(uv(vec![0.0, 1.0, 0.0, 0.0, 0.0]));
        let r1 = estimate_bell(&one, 10_000, 3, 1).unwrap();
        let r2 = estimate_bell(&loc, 10_000, 3, 1).unwrap();
        assert_eq!(r1.mean, r2.mean);
    }

    #[test]
    fn bob_ignores_alice_input() {
        let s = OneBitSignStrategy::new(5, 0.6).unwrap();
        let mut stream = RandomStream::new(17, 0);
        for _ in 0..2000 {
            let t = sample_transcript(&s, &mut stream);
            let bit = t.outcome.bit.expect("one bit per round");
            assert!(bit <= 1);
            // coordinates 3..5 of a never reach Bob or the bit
            let mut a2 = t.a.components().to_vec();
            a2[2] = -a2[2];
            a2.swap(3, 4);
            let replay = s.respond(&a2, t.b.components());
            assert_eq!(replay.bit, t.outcome.bit);
            assert_eq!(replay.beta, t.outcome.beta);
            assert_eq!(s.bob(t.b.components(), bit), t.outcome.beta);
        }
    }
}
