//! Quantum realization of 5-dimensional dot-product correlations on a
//! maximally entangled pair of four-level systems.
//!
//! The five generators are
//!
//! ```text
//! γ₁ = σx⊗𝟙   γ₂ = σy⊗𝟙   γ₃ = σz⊗σx   γ₄ = σz⊗σy   γ₅ = σz⊗σz
//! ```
//!
//! and `A(v) = Σ v_k γ_k`. On `|ψ⁺⟩ = ½ Σ|ii⟩` one has
//! `⟨ψ⁺|X⊗Y|ψ⁺⟩ = Tr(X Yᵀ)/4`, so the dot product `vA·vB` comes out when
//! Bob builds his observable from the transposed generators. With the plain
//! generators the antisymmetric `γ₂`, `γ₄` contribute with a minus sign.

use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sphere::{sample_uniform, RandomStream, UnitVector};

pub const GENERATORS: usize = 5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

type Mat2 = [[Complex64; 2]; 2];

const SIGMA_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
const SIGMA_Y: Mat2 = [[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]];
const SIGMA_Z: Mat2 = [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]];
const ID2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix4(pub [[Complex64; 4]; 4]);

impl ComplexMatrix4 {
    pub fn zeros() -> Self {
        ComplexMatrix4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.0[i][i] = ONE;
        }
        m
    }

    fn kron(a: &Mat2, b: &Mat2) -> Self {
        let mut m = Self::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m.0[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = self.transpose();
        m.0.iter_mut().flatten().for_each(|z| *z = z.conj());
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl fmt::Debug for ComplexMatrix4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.0 {
            let cells: Vec<String> = row.iter().map(|z| format!("{:+.3}{:+.3}i", z.re, z.im)).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl Add for ComplexMatrix4 {
    type Output = ComplexMatrix4;

    fn add(mut self, rhs: ComplexMatrix4) -> ComplexMatrix4 {
        for (x, y) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *x += y;
        }
        self
    }
}

impl Mul for ComplexMatrix4 {
    type Output = ComplexMatrix4;

    fn mul(self, rhs: ComplexMatrix4) -> ComplexMatrix4 {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        m
    }
}

/// `γ_k` for `k ∈ 1..=5`.
pub fn gamma(k: usize) -> Result<ComplexMatrix4> {
    let m = match k {
        1 => ComplexMatrix4::kron(&SIGMA_X, &ID2),
        2 => ComplexMatrix4::kron(&SIGMA_Y, &ID2),
        3 => ComplexMatrix4::kron(&SIGMA_Z, &SIGMA_X),
        4 => ComplexMatrix4::kron(&SIGMA_Z, &SIGMA_Y),
        5 => ComplexMatrix4::kron(&SIGMA_Z, &SIGMA_Z),
        _ => return invalid(format!("gamma index must be in 1..=5, got {k}")),
    };
    Ok(m)
}

fn gammas() -> [ComplexMatrix4; GENERATORS] {
    std::array::from_fn(|k| gamma(k + 1).expect("index in range"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Bob uses `Σ v_k γ_k`, the same generators as Alice.
    Naive,
    /// Bob uses `Σ v_k γ_kᵀ`.
    TransposeBob,
}

/// `Σ v_k γ_k` (or with transposed generators) for an arbitrary real vector.
pub fn linear_combination(v: &[f64; GENERATORS], transposed: bool) -> ComplexMatrix4 {
    gammas()
        .iter()
        .zip(v)
        .map(|(g, &c)| if transposed { g.transpose() } else { *g }.scale(c))
        .fold(ComplexMatrix4::zeros(), |acc, m| acc + m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianObservable {
    matrix: ComplexMatrix4,
    source: UnitVector,
}

impl HermitianObservable {
    pub fn matrix(&self) -> &ComplexMatrix4 {
        &self.matrix
    }

    pub fn source_vector(&self) -> &UnitVector {
        &self.source
    }
}

fn as_array(v: &UnitVector) -> Result<[f64; GENERATORS]> {
    v.components()
        .try_into()
        .map_err(|_| Error::DimensionMismatch {
            expected: GENERATORS,
            actual: v.dim(),
        })
}

fn observable_with(v: &UnitVector, convention: Convention) -> Result<HermitianObservable> {
    let c = as_array(v)?;
    let matrix = linear_combination(&c, convention == Convention::TransposeBob);
    if !matrix.is_finite() {
        return invalid("observable has non-finite entries");
    }
    Ok(HermitianObservable {
        matrix,
        source: v.clone(),
    })
}

/// `A(v) = Σ v_k γ_k` for a unit `v ∈ S⁴`.
pub fn observable(v: &UnitVector) -> Result<HermitianObservable> {
    observable_with(v, Convention::Naive)
}

/// Bob's observable under `convention`.
pub fn bob_observable(v: &UnitVector, convention: Convention) -> Result<HermitianObservable> {
    observable_with(v, convention)
}

/// Two-ququart pure state, amplitudes indexed `4i + j` for `|i⟩⊗|j⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState16(pub [Complex64; 16]);

impl PureState16 {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.0[4 * i + j]
    }
}

pub fn psi_plus() -> PureState16 {
    let mut amps = [ZERO; 16];
    for i in 0..4 {
        amps[4 * i + i] = Complex64::new(0.5, 0.0);
    }
    PureState16(amps)
}

/// `⟨ψ|X⊗Y|ψ⟩` by explicit 16-dimensional contraction.
pub fn expectation(state: &PureState16, x: &ComplexMatrix4, y: &ComplexMatrix4) -> Complex64 {
    let psi = &state.0;
    let mut acc = ZERO;
    for i in 0..4 {
        for j in 0..4 {
            let mut row = ZERO;
            for k in 0..4 {
                for l in 0..4 {
                    row += x.0[i][k] * y.0[j][l] * psi[4 * k + l];
                }
            }
            acc += psi[4 * i + j].conj() * row;
        }
    }
    acc
}

fn correlation_raw(va: &[f64; GENERATORS], vb: &[f64; GENERATORS], convention: Convention) -> Complex64 {
    let a = linear_combination(va, false);
    let b = linear_combination(vb, convention == Convention::TransposeBob);
    expectation(&psi_plus(), &a, &b)
}

/// Bilinear extension of [`correlation`] to arbitrary real vectors.
pub fn correlation_linear(va: &[f64; GENERATORS], vb: &[f64; GENERATORS], convention: Convention) -> f64 {
    correlation_raw(va, vb, convention).re
}

/// `⟨ψ⁺| A(vA) ⊗ B(vB) |ψ⁺⟩`.
pub fn correlation(va: &UnitVector, vb: &UnitVector, convention: Convention) -> Result<f64> {
    Ok(correlation_linear(&as_array(va)?, &as_array(vb)?, convention))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub samples: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub max_abs_error: f64,
    pub worst_pair: (Vec<f64>, Vec<f64>),
    /// Signs fitted to the naive-convention correlations.
    pub eta: [i8; GENERATORS],
    /// Unrounded least-squares coefficients behind `eta`.
    pub eta_fit: [f64; GENERATORS],
    /// Signs read off `correlation(e_k, e_k, naive)`.
    pub eta_basis: [i8; GENERATORS],
    /// Largest deviation of the naive correlation from `Σ η_k vA_k vB_k`.
    pub naive_max_residual: f64,
    pub passed: bool,
}

/// Checks `⟨ψ⁺|A(vA)⊗Bᵀ(vB)|ψ⁺⟩ = vA·vB` on random pairs and fits the sign
/// pattern of the naive convention.
pub fn verify_construction(n_samples: u64, seed: u64, tol: f64) -> Result<VerificationReport> {
    if n_samples < 1 {
        return invalid("verify_construction needs at least one sample");
    }
    if !(tol >= 0.0) {
        return invalid(format!("tolerance must be non-negative, got {tol}"));
    }
    let mut stream = RandomStream::new(seed, 0);
    let mut max_err = 0.0;
    let mut worst = (Vec::new(), Vec::new());
    let mut normal = [[0.0; GENERATORS]; GENERATORS];
    let mut rhs = [0.0; GENERATORS];
    let mut rows = Vec::with_capacity(n_samples as usize);
    for _ in 0..n_samples {
        let va = sample_uniform(GENERATORS, &mut stream)?;
        let vb = sample_uniform(GENERATORS, &mut stream)?;
        let err = (correlation(&va, &vb, Convention::TransposeBob)? - va.dot(&vb)?).abs();
        if err > max_err || worst.0.is_empty() {
            max_err = f64::max(err, max_err);
            worst = (va.components().to_vec(), vb.components().to_vec());
        }
        let naive = correlation(&va, &vb, Convention::Naive)?;
        let x: [f64; GENERATORS] = std::array::from_fn(|k| va.components()[k] * vb.components()[k]);
        for r in 0..GENERATORS {
            rhs[r] += x[r] * naive;
            for c in 0..GENERATORS {
                normal[r][c] += x[r] * x[c];
            }
        }
        rows.push((x, naive));
    }
    let eta_fit = solve_symmetric(normal, rhs).unwrap_or([0.0; GENERATORS]);
    let eta: [i8; GENERATORS] = std::array::from_fn(|k| if eta_fit[k] >= 0.0 { 1 } else { -1 });
    let naive_max_residual = rows
        .iter()
        .map(|(x, c)| {
            let pred: f64 = x.iter().zip(&eta).map(|(xi, &e)| xi * f64::from(e)).sum();
            (pred - c).abs()
        })
        .fold(0.0, f64::max);
    Ok(VerificationReport {
        samples: n_samples,
        seed,
        tolerance: tol,
        max_abs_error: max_err,
        worst_pair: worst,
        eta,
        eta_fit,
        eta_basis: basis_signs(),
        naive_max_residual,
        passed: max_err <= tol,
    })
}

/// `sgn ⟨ψ⁺|γ_k⊗γ_k|ψ⁺⟩` for each generator.
pub fn basis_signs() -> [i8; GENERATORS] {
    std::array::from_fn(|k| {
        let mut e = [0.0; GENERATORS];
        e[k] = 1.0;
        if correlation_linear(&e, &e, Convention::Naive) >= 0.0 {
            1
        } else {
            -1
        }
    })
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_symmetric(
    mut m: [[f64; GENERATORS]; GENERATORS],
    mut b: [f64; GENERATORS],
) -> Option<[f64; GENERATORS]> {
    for col in 0..GENERATORS {
        let pivot = (col..GENERATORS).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..GENERATORS {
            let f = m[row][col] / m[col][col];
            for k in col..GENERATORS {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; GENERATORS];
    for row in (0..GENERATORS).rev() {
        let tail: f64 = (row + 1..GENERATORS).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / m[row][row];
    }
    Some(x)
}

/// Local Hilbert-space dimension `2^⌊m/2⌋` that hosts `m` anticommuting generators.
pub fn local_dimension(m: u32) -> Result<u64> {
    if m < 1 {
        return invalid("local_dimension needs m >= 1");
    }
    1u64.checked_shl(m / 2)
        .ok_or_else(|| Error::InvalidArgument(format!("2^{} overflows u64", m / 2)))
}
