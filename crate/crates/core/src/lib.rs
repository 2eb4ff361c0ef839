//! Exact bounds, classical strategies and a quantum realization for the
//! question of whether one bit of communication suffices to simulate
//! correlations `A(a)·B(b)` of two-outcome measurements on maximally
//! entangled states.
//!
//! For the kernel `M(a, b) = a·b` on `S^{n-1}`:
//!
//! * local strategies reach at most `L(n) = κ(n)²` ([`bounds::local_bound`]),
//! * one bit of one-way communication reaches at most `√2·L(n)`
//!   ([`bounds::one_bit_cap`]), attained by [`protocols::OneBitSignStrategy`]
//!   at `θ = π/4`,
//! * the vector strategy `A(a) = a`, `B(b) = b` reaches `1/n`,
//!   which beats the one-bit cap from `n = 5` on
//!   ([`bounds::threshold_dimension`]),
//! * for `n = 5` the vector strategy is realized on two four-level systems by
//!   the gamma matrices in [`tsirelson`].

// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod exact;
pub mod golden;
pub mod protocols;
pub mod quadrature;
pub mod sphere;
pub mod tsirelson;

pub use error::{Error, Result};
pub use exact::ExactValue;
pub use protocols::{EstimateResult, LocalSignStrategy, OneBitSignStrategy, TranscriptSample};
pub use sphere::{RandomStream, UnitVector};
