// Validation code below rejects NaN by negating comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical free probability on the real line.
//!
//! The crate is organised around six building blocks:
//!
//! * [`measure`] — probability measures in five canonical representations
//!   (atomic, grid density, empirical sample, semicircle, free Poisson) with
//!   CDFs, moments, dilation and the Kolmogorov sup-distance.
//! * [`transforms`] — Cauchy transform evaluation on the upper half-plane and
//!   density recovery by Stieltjes inversion.
//! * [`freeconv`] — free additive convolution by subordination fixed-point
//!   iteration, iterated n-fold convolution, and the exact atom calculus.
//! * [`bai`] — certified Kolmogorov-distance upper bounds assembled from
//!   Cauchy-transform line integrals, CDF smoothness and tail terms.
//! * [`matrix`] — GUE sampling, an in-repo complex Hermitian eigensolver,
//!   matrix self-normalized sums and deterministic operator inequalities.
//! * [`rates`] — Lyapunov fractions, precondition gates, bound formulas,
//!   the Lindeberg functional, and log-log rate fitting.
//!
//! Everything is deterministic given a seed; random streams are ChaCha8 with
//! a documented 64-bit seed-mixing scheme (see [`matrix::derive_stream_seed`]).

pub mod bai;
pub mod freeconv;
pub mod matrix;
pub mod measure;
pub mod quad;
pub mod rates;
pub mod textio;
pub mod transforms;

pub use bai::{BaiBreakdown, BaiParameters};
pub use freeconv::{AtomList, ConvolveOptions, SubordinationResult};
pub use matrix::{HermitianMatrix, SpectralDecomposition};
pub use measure::{KolmogorovDistance, Measure};
pub use rates::{LyapunovReport, MomentProfile, RateFit, TheoremId};
pub use transforms::HalfPlanePoint;
