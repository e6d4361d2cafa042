//! Moment data, the block-Toeplitz Gram matrix, and the basic solvability
//! test.

use crate::error::{Error, Result};
use crate::linalg;
use crate::{CMatrix, Scalar};
use ndarray::Array2;
use num_complex::Complex;

/// The input data of the moment problem: matrices `S_0..S_d` of size `N x N`.
#[derive(Debug, Clone)]
pub struct MomentSequence<F: Scalar> {
    n: usize,
    d: usize,
    s: Vec<CMatrix<F>>,
}

impl<F: Scalar> MomentSequence<F> {
    pub fn new(n: usize, d: usize, s: Vec<CMatrix<F>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("matrix size N must be positive".into()));
        }
        if d < 1 {
            return Err(Error::DimensionMismatch(
                "moment order d must be at least 1".into(),
            ));
        }
        if s.len() != d + 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} moment matrices, got {}",
                d + 1,
                s.len()
            )));
        }
        for (k, m) in s.iter().enumerate() {
            if m.dim() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "moment S_{k} has shape {:?}, expected ({n}, {n})",
                    m.dim()
                )));
            }
        }
        Ok(Self { n, d, s })
    }

    pub fn matrix_size(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn moment(&self, n: usize) -> &CMatrix<F> {
        &self.s[n]
    }

    /// Full table `S_{-d}..S_d` with `S_{-k} = S_k^*`; index `k + d`.
    pub fn hermitian_extend(&self) -> Vec<CMatrix<F>> {
        let mut table = Vec::with_capacity(2 * self.d + 1);
        for k in (1..=self.d).rev() {
            table.push(linalg::adjoint(&self.s[k]));
        }
        for k in 0..=self.d {
            table.push(self.s[k].clone());
        }
        table
    }

    /// `S_k` for `-d <= k <= d`.
    pub fn moment_signed(&self, k: i64) -> CMatrix<F> {
        if k >= 0 {
            self.s[k as usize].clone()
        } else {
            linalg::adjoint(&self.s[(-k) as usize])
        }
    }
}

/// The `(d+1)N`-square block-Toeplitz matrix `T_d = (S_{i-j})`.
#[derive(Debug, Clone)]
pub struct ToeplitzGram<F: Scalar> {
    n: usize,
    d: usize,
    dim: usize,
    mat: CMatrix<F>,
}

impl<F: Scalar> ToeplitzGram<F> {
    /// Assemble `T_d` from the moments. Entries are bit-identical copies of
    /// the moment entries; no arithmetic is applied.
    pub fn build(m: &MomentSequence<F>) -> Self {
        let n = m.n;
        let d = m.d;
        let dim = (d + 1) * n;
        let table = m.hermitian_extend();
        let mat = Array2::from_shape_fn((dim, dim), |(row, col)| {
            let (bi, s) = (row / n, row % n);
            let (bj, l) = (col / n, col % n);
            // gamma_{kN+s, rN+l} = S_{k-r; s, l}
            let k = bi as i64 - bj as i64;
            table[(k + d as i64) as usize][(s, l)]
        });
        Self { n, d, dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix_size(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix<F> {
        &self.mat
    }

    /// Entry `gamma_{i,j}` of the Gram matrix.
    pub fn gamma(&self, i: usize, j: usize) -> Complex<F> {
        self.mat[(i, j)]
    }
}

/// Outcome of the positive-semidefiniteness test of `T_d`.
#[derive(Debug, Clone)]
pub struct PsdReport<F: Scalar> {
    pub solvable: bool,
    pub min_eigenvalue: F,
    pub max_eigenvalue: F,
    pub rank: usize,
}

/// Test `T_d >= 0`, the solvability condition of the moment problem.
///
/// Rejects input whose Hermitian symmetry is broken beyond `tol` (relative to
/// the largest entry); that is a data error, not a negative result.
pub fn psd_check<F: Scalar>(t: &ToeplitzGram<F>, tol: F) -> Result<PsdReport<F>> {
    let scale = linalg::max_abs(&t.mat).max(F::one());
    let dev = linalg::hermitian_defect(&t.mat);
    if dev > tol * scale {
        return Err(Error::NotHermitian {
            deviation: dev.to_f64().unwrap_or(f64::NAN),
        });
    }
    let eig = linalg::hermitian_eig(&t.mat);
    let min_eigenvalue = eig.values[0];
    let max_eigenvalue = eig.values[eig.values.len() - 1];
    let solvable = min_eigenvalue >= -tol * F::one().max(max_eigenvalue);
    let rank = eig
        .values
        .iter()
        .filter(|&&v| v > tol * max_eigenvalue)
        .count();
    Ok(PsdReport {
        solvable,
        min_eigenvalue,
        max_eigenvalue,
        rank,
    })
}

/// Default relative tolerance for [`psd_check`] and rank decisions.
pub fn default_tol<F: Scalar>() -> F {
    F::lit(1e-10)
}
