//! The finite-dimensional operator model: the Hilbert space built from the
//! Gram matrix, the distinguished vectors `x_n`, the block-shift isometry with
//! its domain/range bases, and the defect subspaces.

use crate::error::{Error, Result};
use crate::linalg::{self, gram_schmidt};
use crate::moment::ToeplitzGram;
use crate::{CMatrix, CVector, Scalar};
use ndarray::{s, Array2};
use num_complex::Complex;

/// Relative drop threshold for Gram-Schmidt rank decisions. The quotient
/// construction makes exact linear dependence common, so this is deliberately
/// loose compared to machine precision.
pub fn gs_drop_tol<F: Scalar>() -> F {
    F::lit(1e-8)
}

/// Concrete coordinates for the quotient Hilbert space `H`.
///
/// Column `n` of `x` holds the coordinates of the vector `x_n` in an
/// orthonormal frame of `H`; inner products of columns reproduce the Gram
/// entries `gamma_{n,m}`.
#[derive(Debug, Clone)]
pub struct ModelSpace<F: Scalar> {
    n: usize,
    d: usize,
    r: usize,
    x: CMatrix<F>,
    rank_tol: F,
}

impl<F: Scalar> ModelSpace<F> {
    pub fn matrix_size(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.d
    }

    /// dim H.
    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn rank_tol(&self) -> F {
        self.rank_tol
    }

    /// The `r x (d+1)N` coordinate matrix of the vectors `x_n`.
    pub fn coordinates(&self) -> &CMatrix<F> {
        &self.x
    }

    pub fn vector(&self, n: usize) -> CVector<F> {
        self.x.column(n).to_owned()
    }

    /// Inner product `(x_n, x_m)` recomputed from coordinates.
    pub fn gram(&self, n: usize, m: usize) -> Complex<F> {
        let a = self.x.column(n);
        let b = self.x.column(m);
        a.iter()
            .zip(b.iter())
            .fold(Complex::new(F::zero(), F::zero()), |acc, (ai, bi)| {
                acc + bi.conj() * *ai
            })
    }

    /// Construct a model space from explicit coordinates. Intended for frame
    /// covariance checks; the coordinates must reproduce the same Gram data.
    pub fn from_coordinates(n: usize, d: usize, x: CMatrix<F>, rank_tol: F) -> Self {
        let r = x.nrows();
        Self { n, d, r, x, rank_tol }
    }
}

/// Build coordinates for the vectors `x_n` through the eigendecomposition of
/// the Gram matrix, quotienting the null space (eigenvalues at or below
/// `rank_tol * max_eigenvalue`).
///
/// Orientation: with the inner product `(a, b) = b^* a`, the Gram entries are
/// `(x_n, x_m) = gamma_{n,m}`, i.e. `X^* X` equals the transpose of `T_d`.
/// This is what makes the block shift `x_k -> x_{k+N}` correspond to
/// multiplication by `e^{it}` (rather than its conjugate) in the measure
/// realization, so that spectral angles of unitary extensions are atom angles
/// directly.
pub fn build_model_space<F: Scalar>(t: &ToeplitzGram<F>, rank_tol: F) -> Result<ModelSpace<F>> {
    let dim = t.dim();
    let eig = linalg::hermitian_eig(t.matrix());
    let max_eig = eig.values[dim - 1].max(F::zero());
    if eig.values[0] < -rank_tol * F::one().max(max_eig) {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.values[0].to_f64().unwrap_or(f64::NAN),
        });
    }
    let thresh = rank_tol * max_eig;
    let keep: Vec<usize> = (0..dim).filter(|&i| eig.values[i] > thresh).collect();
    let r = keep.len();
    let x = Array2::from_shape_fn((r, dim), |(i, j)| {
        let k = keep[i];
        eig.vectors[(j, k)] * Complex::new(eig.values[k].sqrt(), F::zero())
    });
    let space = ModelSpace {
        n: t.matrix_size(),
        d: t.order(),
        r,
        x,
        rank_tol,
    };
    // Gram reproduction must hold to working accuracy (transposed
    // orientation; the Gram matrix is Hermitian, so transpose = conjugate)
    let gram = linalg::adjoint(&space.x).dot(&space.x);
    let target = t.matrix().mapv(|z| z.conj());
    let dev = linalg::max_abs_diff(&gram, &target);
    let scale = linalg::max_abs(t.matrix()).max(F::one());
    if dev > F::lit(1e-8) * scale {
        return Err(Error::Internal(format!(
            "Gram reproduction failed: deviation {dev}"
        )));
    }
    Ok(space)
}

/// The block-shift isometry `A : x_k -> x_{k+N}` on
/// `D(A) = Lin{x_0..x_{dN-1}}`, with orthonormal bases for its domain, range,
/// and the two defect subspaces.
#[derive(Debug, Clone)]
pub struct IsometryModel<F: Scalar> {
    space: ModelSpace<F>,
    /// Orthonormal basis of D(A), Gram-Schmidt over `x_0..x_{dN-1}`.
    domain_basis: CMatrix<F>,
    /// Orthonormal basis of R(A), Gram-Schmidt over `x_N..x_{(d+1)N-1}`.
    range_basis: CMatrix<F>,
    /// Matrix of A from domain to range coordinates.
    a_matrix: CMatrix<F>,
    /// Orthonormal basis of N_0(A) = H - D(A) (vectors `u_j`).
    defect0: CMatrix<F>,
    /// Orthonormal basis of N_inf(A) = H - R(A) (vectors `v_j`).
    defect_inf: CMatrix<F>,
    tau: usize,
    delta: usize,
}

impl<F: Scalar> IsometryModel<F> {
    pub fn space(&self) -> &ModelSpace<F> {
        &self.space
    }

    pub fn domain_basis(&self) -> &CMatrix<F> {
        &self.domain_basis
    }

    pub fn range_basis(&self) -> &CMatrix<F> {
        &self.range_basis
    }

    pub fn a_matrix(&self) -> &CMatrix<F> {
        &self.a_matrix
    }

    pub fn defect0(&self) -> &CMatrix<F> {
        &self.defect0
    }

    pub fn defect_inf(&self) -> &CMatrix<F> {
        &self.defect_inf
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// `A P_{D(A)}` as an `r x r` matrix in the coordinates of `H`.
    pub fn shift_on_domain(&self) -> CMatrix<F> {
        self.range_basis
            .dot(&self.a_matrix)
            .dot(&linalg::adjoint(&self.domain_basis))
    }
}

/// Deficiency data of the isometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deficiency {
    pub tau: usize,
    pub delta: usize,
    pub indeterminate: bool,
}

pub fn build_isometry<F: Scalar>(space: &ModelSpace<F>) -> Result<IsometryModel<F>> {
    let n = space.n;
    let d = space.d;
    let r = space.r;
    let dn = d * n;
    let drop = gs_drop_tol::<F>();
    let empty: CMatrix<F> = Array2::zeros((r, 0));

    let dom_cols = space.x.slice(s![.., 0..dn]).to_owned();
    let dom = gram_schmidt(&empty, &dom_cols, drop);
    let domain_basis = dom.basis;
    let tau = domain_basis.ncols();

    let rng_cols = space.x.slice(s![.., n..(d + 1) * n]).to_owned();
    let rng = gram_schmidt(&empty, &rng_cols, drop);
    let range_basis = rng.basis;
    if range_basis.ncols() != tau {
        return Err(Error::Internal(format!(
            "domain rank {} differs from range rank {}",
            tau,
            range_basis.ncols()
        )));
    }

    // A maps each domain basis vector (a combination of x_0..x_{dN-1}) to the
    // same combination of x_N..x_{(d+1)N-1}.
    let shifted = space.x.slice(s![.., n..(d + 1) * n]).to_owned();
    let image = shifted.dot(&dom.coeffs); // r x tau
    let a_matrix = linalg::adjoint(&range_basis).dot(&image);
    // The image must lie in R(A) and A must be isometric; both follow from
    // the block-Toeplitz structure and are asserted here.
    let recon = range_basis.dot(&a_matrix);
    let tol = F::lit(1e-8);
    if linalg::max_abs_diff(&recon, &image) > tol {
        return Err(Error::Internal("shift image escapes the range basis".into()));
    }
    let gram_a = linalg::adjoint(&a_matrix).dot(&a_matrix);
    if linalg::max_abs_diff(&gram_a, &linalg::identity(tau)) > tol {
        return Err(Error::Internal("shift operator is not isometric".into()));
    }

    let tail = space.x.slice(s![.., dn..(d + 1) * n]).to_owned();
    let defect0 = gram_schmidt(&domain_basis, &tail, drop).basis;
    let delta = defect0.ncols();
    let head = space.x.slice(s![.., 0..n]).to_owned();
    let defect_inf = gram_schmidt(&range_basis, &head, drop).basis;
    if defect_inf.ncols() != delta {
        return Err(Error::DefectDimension {
            expected: delta,
            got: defect_inf.ncols(),
        });
    }
    if tau + delta != r {
        return Err(Error::Internal(format!(
            "tau {tau} + delta {delta} != rank {r}"
        )));
    }

    Ok(IsometryModel {
        space: space.clone(),
        domain_basis,
        range_basis,
        a_matrix,
        defect0,
        defect_inf,
        tau,
        delta,
    })
}

pub fn deficiency<F: Scalar>(model: &IsometryModel<F>) -> Deficiency {
    Deficiency {
        tau: model.tau,
        delta: model.delta,
        indeterminate: model.delta >= 1,
    }
}

/// Orthonormal basis of `M_zeta(A) = (E - zeta A) D(A)`, by Gram-Schmidt over
/// `x_0 - zeta x_N, x_1 - zeta x_{N+1}, ...` in that order.
pub fn m_zeta_basis<F: Scalar>(model: &IsometryModel<F>, zeta: Complex<F>) -> CMatrix<F> {
    let space = &model.space;
    let n = space.n;
    let dn = space.d * n;
    let cands = Array2::from_shape_fn((space.r, dn), |(i, k)| {
        space.x[(i, k)] - zeta * space.x[(i, k + n)]
    });
    let empty: CMatrix<F> = Array2::zeros((space.r, 0));
    gram_schmidt(&empty, &cands, gs_drop_tol::<F>()).basis
}

/// Orthonormal basis of `N_zeta(A)`: Gram-Schmidt continuation of the
/// `M_zeta(A)` basis with `x_0..x_{N-1}`. Requires `zeta` to be of regular
/// type (the `M_zeta` basis must have `tau` elements) and checks that the
/// continuation has exactly `delta` elements.
pub fn n_zeta_basis<F: Scalar>(model: &IsometryModel<F>, zeta: Complex<F>) -> Result<CMatrix<F>> {
    let mz = m_zeta_basis(model, zeta);
    if mz.ncols() != model.tau {
        return Err(Error::NotRegularPoint {
            expected: model.tau,
            got: mz.ncols(),
        });
    }
    let space = &model.space;
    let head = space.x.slice(s![.., 0..space.n]).to_owned();
    let mut cont = gram_schmidt(&mz, &head, gs_drop_tol::<F>()).basis;
    if cont.ncols() < model.delta {
        // degenerate points (e.g. zeta = 0) can have the whole head inside
        // M_zeta; complete the basis with the shifted vectors
        let prefix = ndarray::concatenate(ndarray::Axis(1), &[mz.view(), cont.view()])
            .map_err(|e| Error::Internal(e.to_string()))?;
        let tail = space.x.slice(s![.., space.n..]).to_owned();
        let extra = gram_schmidt(&prefix, &tail, gs_drop_tol::<F>()).basis;
        cont = ndarray::concatenate(ndarray::Axis(1), &[cont.view(), extra.view()])
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    if cont.ncols() != model.delta {
        return Err(Error::DefectDimension {
            expected: model.delta,
            got: cont.ncols(),
        });
    }
    Ok(cont)
}
