//! Exact values of the correlation bounds for the `a·b` kernel on `S^{n-1}`.
//!
//! * `wallis_integral(n)` is `s_n = ∫₀^π sinⁿϑ dϑ`.
//! * `kappa(n) = ∫|a₁| dσ(a) = 2 / ((n−1) s_{n−2})`, the mean absolute coordinate.
//! * `local_bound(n) = kappa(n)²` is the best value reachable by local ±1 strategies.
//! * `one_bit_cap(n) = √2 · local_bound(n)` caps every local strategy with one bit
//!   of one-way communication.
//! * `quantum_lower_bound(n) = 1/n` is attained by `A(a) = a`, `B(b) = b`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exact::ExactValue;

/// Largest dimension scanned by [`threshold_dimension`].
const THRESHOLD_SCAN_LIMIT: u32 = 10_000;

pub fn wallis_integral(n: i64) -> Result<ExactValue> {
    if n < 0 {
        return invalid(format!("wallis_integral needs n >= 0, got {n}"));
    }
    // s_n = ((n-1)/n) s_{n-2}; telescoped into one rational product
    let base = if n % 2 == 0 {
        ExactValue::pi()
    } else {
        ExactValue::integer(2)
    };
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    let mut k = n;
    while k >= 2 {
        num *= k - 1;
        den *= k;
        k -= 2;
    }
    Ok(ExactValue::new(BigRational::new(num, den), 0, 0) * base)
}

fn check_dim(n: i64, what: &str) -> Result<()> {
    if n < 2 {
        return invalid(format!("{what} needs n >= 2, got {n}"));
    }
    Ok(())
}

pub fn kappa(n: i64) -> Result<ExactValue> {
    check_dim(n, "kappa")?;
    let s = wallis_integral(n - 2)?;
    Ok(ExactValue::integer(2) / (ExactValue::integer(n - 1) * s))
}

pub fn local_bound(n: i64) -> Result<ExactValue> {
    Ok(kappa(n)?.powi(2))
}

pub fn quantum_lower_bound(n: i64) -> Result<ExactValue> {
    check_dim(n, "quantum_lower_bound")?;
    Ok(ExactValue::from_ratio(1, n))
}

pub fn one_bit_cap(n: i64) -> Result<ExactValue> {
    Ok(ExactValue::sqrt2() * local_bound(n)?)
}

/// `Q̃(n) / L(n)`.
pub fn ratio(n: i64) -> Result<ExactValue> {
    Ok(quantum_lower_bound(n)? / local_bound(n)?)
}

/// Smallest `n ≥ 2` whose quantum-to-local ratio strictly exceeds √2,
/// decided by exact comparison.
pub fn threshold_dimension() -> u32 {
    let cap = ExactValue::sqrt2();
    (2..=THRESHOLD_SCAN_LIMIT)
        .find(|&n| ratio(i64::from(n)).expect("n >= 2") > cap)
        .expect("ratio tends to pi/2 > sqrt2")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsRow {
    pub n: u32,
    #[serde(serialize_with = "ser_exact")]
    pub q_tilde: ExactValue,
    #[serde(serialize_with = "ser_exact")]
    pub kappa: ExactValue,
    #[serde(serialize_with = "ser_exact")]
    pub local: ExactValue,
    #[serde(serialize_with = "ser_exact")]
    pub one_bit_cap: ExactValue,
    #[serde(serialize_with = "ser_exact")]
    pub ratio: ExactValue,
    pub exceeds_sqrt2: bool,
}

fn ser_exact<S: serde::Serializer>(v: &ExactValue, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl BoundsRow {
    pub fn compute(n: u32) -> Result<Self> {
        let m = i64::from(n);
        let kappa = kappa(m)?;
        let local = kappa.powi(2);
        let q_tilde = quantum_lower_bound(m)?;
        let ratio = q_tilde.clone() / local.clone();
        let exceeds_sqrt2 = ratio.to_f64() > std::f64::consts::SQRT_2;
        Ok(BoundsRow {
            n,
            one_bit_cap: ExactValue::sqrt2() * local.clone(),
            q_tilde,
            kappa,
            local,
            ratio,
            exceeds_sqrt2,
        })
    }
}

pub fn table(max_n: u32) -> Result<Vec<BoundsRow>> {
    if max_n < 2 {
        return invalid(format!("max-n must be >= 2, got {max_n}"));
    }
    (2..=max_n).map(BoundsRow::compute).collect()
}
