//! Points on `S^{n-1}`, Haar sampling, and deterministic quadrature for the
//! sphere integrals behind the local and one-bit bounds.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, integrate_piecewise, Settings};

pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Accepts `components` as-is; they must already be unit length.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 2 {
            return invalid(format!("unit vectors need n >= 2, got {}", components.len()));
        }
        let norm = norm(&components);
        if !((norm - 1.0).abs() <= UNIT_TOLERANCE) {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitVector(components))
    }

    pub fn normalized(mut components: Vec<f64>) -> Result<Self> {
        let nrm = norm(&components);
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(Error::NotUnit { norm: nrm });
        }
        components.iter_mut().for_each(|c| *c /= nrm);
        Self::new(components)
    }

    /// `e_k` (zero-based `k`) in dimension `n`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return invalid(format!("basis index {k} out of range for n = {n}"));
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &UnitVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(dot(&self.0, &other.0))
    }
}

impl std::ops::Neg for UnitVector {
    type Output = UnitVector;

    fn neg(self) -> UnitVector {
        UnitVector(self.0.into_iter().map(|c| -c).collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// A reproducible random substream: ChaCha8 keyed by `seed`, on stream
/// `stream_index`. Distinct stream indices give non-overlapping sequences.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        RandomStream {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Overwrites `buf` with a Haar-uniform point of `S^{buf.len()-1}`.
    pub fn fill_uniform(&mut self, buf: &mut [f64]) {
        loop {
            let mut sq = 0.0;
            for c in buf.iter_mut() {
                let g: f64 = self.rng.sample(StandardNormal);
                *c = g;
                sq += g * g;
            }
            if sq > 0.0 {
                let inv = 1.0 / sq.sqrt();
                buf.iter_mut().for_each(|c| *c *= inv);
                return;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

pub fn sample_uniform(n: usize, stream: &mut RandomStream) -> Result<UnitVector> {
    if n < 2 {
        return invalid(format!("sample_uniform needs n >= 2, got {n}"));
    }
    let mut buf = vec![0.0; n];
    stream.fill_uniform(&mut buf);
    // renormalization leaves the norm within a few ulps of 1
    Ok(UnitVector(buf))
}

fn quad_settings() -> Settings {
    Settings {
        abs_tol: 1e-14,
        max_intervals: 8192,
    }
}

/// `∫|a₁| dσ(a)` over `S^{n-1}` as the latitude integral
/// `∫₀^π |cosϑ| sin^{n−2}ϑ dϑ / ∫₀^π sin^{n−2}ϑ dϑ`, both by quadrature.
pub fn abs_coord_integral_quad(n: usize) -> Result<f64> {
    if n < 2 {
        return invalid(format!("abs_coord_integral_quad needs n >= 2, got {n}"));
    }
    let p = (n - 2) as i32;
    let breaks = [0.0, FRAC_PI_2, PI];
    let num = integrate_piecewise(|t: f64| t.cos().abs() * t.sin().powi(p), &breaks, quad_settings())?;
    let den = integrate_piecewise(|t: f64| t.sin().powi(p), &breaks, quad_settings())?;
    Ok(num.value / den.value)
}

/// Mean of the planar radius `r = √(a₁² + a₂²)` under Haar measure on `S^{n-1}`.
///
/// For `n ≥ 3` the density of `r` is `∝ r(1−r²)^{(n−4)/2}` on `[0, 1]`; the
/// substitution `r = sin u` removes the endpoint singularity at `n = 3`.
pub fn planar_radius_mean(n: usize) -> Result<f64> {
    if n < 2 {
        return invalid(format!("planar_radius_mean needs n >= 2, got {n}"));
    }
    if n == 2 {
        return Ok(1.0);
    }
    let p = (n - 3) as i32;
    let num = integrate(|u: f64| u.sin().powi(2) * u.cos().powi(p), 0.0, FRAC_PI_2, quad_settings())?;
    let den = integrate(|u: f64| u.sin() * u.cos().powi(p), 0.0, FRAC_PI_2, quad_settings())?;
    Ok(num.value / den.value)
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return invalid(format!("theta must lie in [0, pi/2], got {theta}"));
    }
    Ok(())
}

/// `(1/2π) ∫₀^{2π} max{|sin(φ+θ)|, |sin(φ−θ)|} dφ`, the in-plane average of
/// `max{|z'·u|, |z''·u|}` for `u = (cos φ, sin φ)`.
pub fn max_two_angular_mean(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let tau = 2.0 * PI;
    // kinks: zeros of either sine and the crossings at multiples of π/2
    let mut breaks: Vec<f64> = (0..=4).map(|k| k as f64 * FRAC_PI_2).collect();
    for k in -1..=2 {
        let shift = k as f64 * PI;
        breaks.push(theta + shift);
        breaks.push(-theta + shift);
    }
    breaks.retain(|&x| (0.0..=tau).contains(&x));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let f = |phi: f64| (phi + theta).sin().abs().max((phi - theta).sin().abs());
    let r = integrate_piecewise(f, &breaks, quad_settings())?;
    Ok(r.value / tau)
}

/// `∫ max{|z'·a|, |z''·a|} dσ(a)` over `S^{n-1}` with
/// `z' = (sinθ, cosθ, 0, …)` and `z'' = (−sinθ, cosθ, 0, …)`.
///
/// Both projections only see `(a₁, a₂) = r(cos φ, sin φ)`, and under Haar
/// measure `r` and `φ` are independent with `φ` uniform, so the integral is
/// the product of the planar radius mean and the angular mean.
pub fn max_two_integral(n: usize, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(planar_radius_mean(n)? * max_two_angular_mean(theta)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_vector_validation() {
        assert!(UnitVector::new(vec![1.0]).is_err());
        assert!(matches!(
            UnitVector::new(vec![1.0, 1.0]),
            Err(Error::NotUnit { .. })
        ));
        assert!(UnitVector::new(vec![0.6, 0.8]).is_ok());
        assert!(UnitVector::normalized(vec![0.0, 0.0]).is_err());
        assert!(UnitVector::normalized(vec![f64::NAN, 1.0]).is_err());
        let v = UnitVector::normalized(vec![3.0, 4.0, 0.0]).unwrap();
        assert!((v.components()[0] - 0.6).abs() < 1e-15);
        let w = UnitVector::basis(2, 0).unwrap();
        assert!(v.dot(&w).is_err());
    }

    #[test]
    fn sampling_rejects_small_n() {
        let mut s = RandomStream::new(1, 0);
        assert!(sample_uniform(1, &mut s).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let mut s1 = RandomStream::new(42, 3);
        let mut s2 = RandomStream::new(42, 3);
        let mut s3 = RandomStream::new(42, 4);
        for _ in 0..10 {
            let a = sample_uniform(6, &mut s1).unwrap();
            let b = sample_uniform(6, &mut s2).unwrap();
            let c = sample_uniform(6, &mut s3).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
            assert!((a.dot(&a).unwrap() - 1.0).abs() < UNIT_TOLERANCE);
        }
    }

    #[test]
    fn quadrature_kappa_values() {
        assert!((abs_coord_integral_quad(2).unwrap() - 2.0 / PI).abs() < 1e-12);
        assert!((abs_coord_integral_quad(3).unwrap() - 0.5).abs() < 1e-12);
        assert!((abs_coord_integral_quad(5).unwrap() - 0.375).abs() < 1e-12);
        assert!(abs_coord_integral_quad(1).is_err());
    }

    #[test]
    fn max_two_examples() {
        assert!((max_two_integral(5, 0.0).unwrap() - 0.375).abs() < 1e-12);
        let quarter = max_two_integral(5, PI / 4.0).unwrap();
        assert!((quarter - std::f64::consts::SQRT_2 * 0.375).abs() < 1e-12);
        let eighth = max_two_integral(3, PI / 8.0).unwrap();
        let expected = ((PI / 8.0).cos() + (PI / 8.0).sin()) * 0.5;
        assert!((eighth - expected).abs() < 1e-12);
        assert!((eighth - 0.653_281).abs() < 1e-6);
    }

    #[test]
    fn max_two_rejects_bad_theta() {
        assert!(max_two_integral(3, -0.1).is_err());
        assert!(max_two_integral(3, 1.6).is_err());
        assert!(max_two_integral(3, f64::NAN).is_err());
    }

    #[test]
    fn max_two_symmetric_and_monotone() {
        for n in [2, 3, 5, 8] {
            let mut prev = 0.0;
            for i in 0..=40 {
                let t = FRAC_PI_2 * i as f64 / 40.0;
                let v = max_two_integral(n, t).unwrap();
                let mirrored = max_two_integral(n, FRAC_PI_2 - t).unwrap();
                assert!((v - mirrored).abs() < 1e-10);
                if i <= 20 {
                    assert!(v >= prev - 1e-15);
                    prev = v;
                }
            }
        }
    }
}
