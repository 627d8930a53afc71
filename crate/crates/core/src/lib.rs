//! Explicit integral solution operators for the inhomogeneous Cauchy–Riemann
//! equations `∂̄u = f` on product domains `Ω = D₁ × … × Dₙ ⊂ ℂⁿ`.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] – star-shaped planar factor domains and their quadrature rules,
//! * [`cauchy1d`] – the one-variable solid Cauchy transform and boundary Cauchy integral,
//! * [`expr`] – complex expressions in `z₁…zₙ` with symbolic Wirtinger derivatives,
//! * [`forms`] – `(0,1)` forms, manufactured data, closedness and sup norms,
//! * [`kernel`] – the algebraic layer (`G`, inverse-product decomposition, kernels and exponents),
//! * [`quadrature`] – per-point product rules over mixed solid/boundary factors,
//! * [`operator_t`] – the operator **T** built from iterated slice transforms,
//! * [`operator_ttilde`] – the derivative-free operator **T̃**,
//! * [`verification`] – bound probes, the iterated Stokes identity and numerical studies.
//!
//! Parallel evaluation is provided by rayon behind the default `parallel`
//! feature; without it every routine runs sequentially with identical results.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cauchy1d;
pub mod error;
pub mod exec;
pub mod expr;
pub mod forms;
pub mod gauss;
pub mod geometry;
pub mod kernel;
pub mod operator_t;
pub mod operator_ttilde;
pub mod quadrature;
pub mod verification;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;
