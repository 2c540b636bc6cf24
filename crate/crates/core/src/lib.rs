//! Numerical toolkit for inner functions in weighted Hardy spaces.
//!
//! A weighted Hardy space is fixed by a positive sequence `ω` with `ω₀ = 1`;
//! the norm of `f = Σ aₙ zⁿ` is `Σ ωₙ |aₙ|²`. A unit-norm `f` is *inner* when
//! `zᵐ f ⟂ f` for every `m ≥ 1`.
//!
//! The crate provides:
//!
//! * [`weights`]: weight sequences and monomial multiplier diagnostics.
//! * [`series`]: truncated power series with the weighted inner product.
//! * [`kernels`]: reproducing kernels and their derivative kernels.
//! * [`projector`]: Gram matrices, Gram-determinant vectors and orthogonal
//!   projections onto complements of finite spans.
//! * [`blaschke`]: analogues of finite Blaschke products with prescribed zeros.
//! * [`innercheck`]: independent numerical characterizations of inner functions.
//! * [`divisor`]: recovery of inner factors through the kernel at the origin of
//!   the space weighted by `|b|²`.
//! * [`cli`]: the batch front end used by the `winner` binary.

pub mod blaschke;
pub mod cli;
pub mod divisor;
pub mod error;
pub mod innercheck;
pub mod kernels;
mod linalg;
pub mod projector;
pub mod series;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
