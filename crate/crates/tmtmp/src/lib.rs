//! Solver library for the truncated matrix trigonometric moment problem (TMTMP)
//! on the unit circle.
//!
//! Given matrix moments `S_0..S_d`, the library assembles the block-Toeplitz
//! Gram matrix, decides solvability, builds the finite-dimensional operator
//! model (an isometry with defect subspaces), parameterizes solutions by
//! contraction-valued Schur parameters, extracts atomic solution measures for
//! constant unitary parameters, and certifies solvability under an open-gap
//! constraint (the solution measure must vanish on a prescribed open subset of
//! the circle).
//!
//! The numerical core is generic over the real scalar type through
//! [`Scalar`]; `f64` aliases are provided at the crate root and are what the
//! CLI and the JSON interfaces use.

use num_complex::Complex;
use num_traits::{Float, FromPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

pub mod error;
pub mod gap;
pub mod io;
pub mod linalg;
pub mod model;
pub mod moment;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};

/// Real scalar the solver is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Shorthand for lossless literals in generic code.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of range for scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex matrix over a generic real scalar.
pub type CMatrix<F> = ndarray::Array2<Complex<F>>;
/// Complex vector over a generic real scalar.
pub type CVector<F> = ndarray::Array1<Complex<F>>;

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;
/// Double-precision complex matrix.
pub type CMatrix64 = CMatrix<f64>;
/// Double-precision complex vector.
pub type CVector64 = CVector<f64>;

pub use gap::{Arc, GapCertificate, GapSet, Verdict};
pub use model::{IsometryModel, ModelSpace};
pub use moment::{MomentSequence, PsdReport, ToeplitzGram};
pub use solver::{AtomicMeasure, ResidualReport, SchurParameter};

/// `MomentSequence` over `f64`.
pub type MomentSequence64 = MomentSequence<f64>;
/// `AtomicMeasure` over `f64`.
pub type AtomicMeasure64 = AtomicMeasure<f64>;
