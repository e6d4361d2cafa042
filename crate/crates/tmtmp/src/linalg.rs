//! Dense complex linear algebra over a generic real scalar.
//!
//! Everything here works on small matrices (the model spaces have dimension
//! `(d+1)N`), so a cyclic Jacobi eigensolver and LU with partial pivoting are
//! sufficient and keep the crate generic over the scalar type.

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Scalar};
use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex;
use num_traits::Zero;

/// Conjugate transpose.
pub fn adjoint<F: Scalar>(m: &CMatrix<F>) -> CMatrix<F> {
    let (r, c) = m.dim();
    Array2::from_shape_fn((c, r), |(i, j)| m[(j, i)].conj())
}

/// `(m + m^*) / 2`.
pub fn hermitian_part<F: Scalar>(m: &CMatrix<F>) -> CMatrix<F> {
    let half = Complex::new(F::lit(0.5), F::zero());
    (m + &adjoint(m)).mapv(|z| z * half)
}

/// Largest entry modulus; zero for empty matrices.
pub fn max_abs<F: Scalar>(m: &CMatrix<F>) -> F {
    m.iter().map(|z| z.norm()).fold(F::zero(), F::max)
}

/// Max-entry distance between two matrices of the same shape.
pub fn max_abs_diff<F: Scalar>(a: &CMatrix<F>, b: &CMatrix<F>) -> F {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).norm())
        .fold(F::zero(), F::max)
}

pub fn identity<F: Scalar>(n: usize) -> CMatrix<F> {
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            Complex::new(F::one(), F::zero())
        } else {
            Complex::zero()
        }
    })
}

/// Max-entry deviation of `m` from Hermitian symmetry.
pub fn hermitian_defect<F: Scalar>(m: &CMatrix<F>) -> F {
    let n = m.nrows();
    let mut dev = F::zero();
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigendecomposition of a Hermitian matrix.
pub struct HermitianEig<F: Scalar> {
    /// Eigenvalues, ascending.
    pub values: Array1<F>,
    /// Orthonormal eigenvector columns, ordered like `values`.
    pub vectors: CMatrix<F>,
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// The input is symmetrized before iteration, so near-Hermitian input is
/// accepted; callers that need to reject non-Hermitian data check
/// [`hermitian_defect`] themselves.
pub fn hermitian_eig<F: Scalar>(m: &CMatrix<F>) -> HermitianEig<F> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "hermitian_eig needs a square matrix");
    let mut a = hermitian_part(m);
    let mut v = identity::<F>(n);
    if n <= 1 {
        let values = Array1::from_shape_fn(n, |i| a[(i, i)].re);
        return HermitianEig { values, vectors: v };
    }

    let fro = a.iter().map(|z| z.norm_sqr()).sum::<F>().sqrt();
    let stop = fro * F::epsilon() * F::lit(0.5);
    let half = F::lit(0.5);
    let two = F::lit(2.0);

    for _sweep in 0..100 {
        let mut off = F::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[(p, q)].norm_sqr();
            }
        }
        if (off * two).sqrt() <= stop || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let h = a[(p, q)];
                let habs = h.norm();
                if habs <= stop * F::lit(1e-3) {
                    continue;
                }
                let phi = h.arg();
                let eph = Complex::from_polar(F::one(), -phi);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = half * F::atan2(two * habs, app - aqq);
                let c = theta.cos();
                let s = theta.sin();
                // J[p][p]=c, J[p][q]=-s, J[q][p]=e^{-i phi} s, J[q][q]=e^{-i phi} c
                let jc = Complex::new(c, F::zero());
                let js = Complex::new(s, F::zero());
                // a <- a J (column update)
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * jc + aiq * eph * js;
                    a[(i, q)] = -aip * js + aiq * eph * jc;
                }
                // a <- J^* a (row update)
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * jc + aqj * eph.conj() * js;
                    a[(q, j)] = -apj * js + aqj * eph.conj() * jc;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)] = Complex::new(a[(p, p)].re, F::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, F::zero());
                // v <- v J
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * jc + viq * eph * js;
                    v[(i, q)] = -vip * js + viq * eph * jc;
                }
            }
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = Array1::from_shape_fn(n, |k| a[(idx[k], idx[k])].re);
    let vectors = Array2::from_shape_fn((n, n), |(i, k)| v[(i, idx[k])]);
    HermitianEig { values, vectors }
}

/// Solve `a x = b` for square `a` by LU with partial pivoting.
pub fn solve<F: Scalar>(a: &CMatrix<F>, b: &CMatrix<F>) -> Result<CMatrix<F>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve: a is {}x{}, b has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let m = b.ncols();
    if n == 0 {
        return Ok(b.clone());
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = max_abs(a).max(F::one());
    let tiny = scale * F::epsilon() * F::lit(1e2);
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let v = lu[(i, k)].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best <= tiny {
            return Err(Error::SingularMatrix);
        }
        if piv != k {
            for j in 0..n {
                lu.swap((k, j), (piv, j));
            }
            for j in 0..m {
                x.swap((k, j), (piv, j));
            }
        }
        let d = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / d;
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                let s = lu[(k, j)];
                lu[(i, j)] = lu[(i, j)] - f * s;
            }
            for j in 0..m {
                let s = x[(k, j)];
                x[(i, j)] = x[(i, j)] - f * s;
            }
        }
    }
    for j in 0..m {
        for i in (0..n).rev() {
            let mut acc = x[(i, j)];
            for k in (i + 1)..n {
                acc = acc - lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = acc / lu[(i, i)];
        }
    }
    Ok(x)
}

/// Singular values (ascending) via the eigenvalues of `m^* m`.
pub fn singular_values<F: Scalar>(m: &CMatrix<F>) -> Array1<F> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Array1::zeros(0);
    }
    let mtm = adjoint(m).dot(m);
    let eig = hermitian_eig(&mtm);
    eig.values.mapv(|v| v.max(F::zero()).sqrt())
}

/// Smallest singular value; zero for a matrix with more columns than rows.
pub fn sigma_min<F: Scalar>(m: &CMatrix<F>) -> F {
    if m.ncols() == 0 {
        return F::infinity();
    }
    if m.nrows() < m.ncols() {
        return F::zero();
    }
    singular_values(m)[0]
}

/// Largest singular value; zero for empty matrices.
pub fn sigma_max<F: Scalar>(m: &CMatrix<F>) -> F {
    let s = singular_values(m);
    if s.is_empty() {
        F::zero()
    } else {
        s[s.len() - 1]
    }
}

/// Result of a Gram-Schmidt pass.
pub struct Orthonormalized<F: Scalar> {
    /// New orthonormal columns (excludes the prefix).
    pub basis: CMatrix<F>,
    /// Coefficients expressing each kept column over the candidate list.
    /// Shape `candidates.ncols() x kept`. Only meaningful when the prefix was
    /// empty (with a prefix, kept columns also carry prefix components).
    pub coeffs: CMatrix<F>,
    /// Indices of the candidates that produced a kept column.
    pub kept: Vec<usize>,
}

fn inner<F: Scalar>(v: &ArrayView1<Complex<F>>, q: &ArrayView1<Complex<F>>) -> Complex<F> {
    // (v, q) = q^* v
    q.iter()
        .zip(v.iter())
        .fold(Complex::zero(), |acc, (qi, vi)| acc + qi.conj() * *vi)
}

fn norm<F: Scalar>(v: &CVector<F>) -> F {
    v.iter().map(|z| z.norm_sqr()).sum::<F>().sqrt()
}

/// Modified Gram-Schmidt with one full reorthogonalization pass, continuing an
/// (optional) orthonormal prefix. A candidate is dropped when its residual
/// falls below `drop_tol` relative to its original norm.
pub fn gram_schmidt<F: Scalar>(
    prefix: &CMatrix<F>,
    candidates: &CMatrix<F>,
    drop_tol: F,
) -> Orthonormalized<F> {
    let r = if prefix.ncols() > 0 {
        prefix.nrows()
    } else {
        candidates.nrows()
    };
    let ncand = candidates.ncols();
    let max_norm = (0..ncand)
        .map(|j| norm(&candidates.column(j).to_owned()))
        .fold(F::zero(), F::max)
        .max(F::one());
    let floor = drop_tol * max_norm;

    let mut qcols: Vec<CVector<F>> = Vec::new();
    let mut ccols: Vec<CVector<F>> = Vec::new();
    let mut kept = Vec::new();

    for j in 0..ncand {
        let mut v: CVector<F> = candidates.column(j).to_owned();
        let mut coeff: CVector<F> = Array1::zeros(ncand);
        coeff[j] = Complex::new(F::one(), F::zero());
        let orig = norm(&v);
        if orig <= floor {
            continue;
        }
        for _pass in 0..2 {
            for p in 0..prefix.ncols() {
                let w = prefix.column(p);
                let c = inner(&v.view(), &w);
                for i in 0..r {
                    v[i] = v[i] - c * w[i];
                }
            }
            for (q, qc) in qcols.iter().zip(ccols.iter()) {
                let c = inner(&v.view(), &q.view());
                for i in 0..r {
                    v[i] = v[i] - c * q[i];
                }
                for i in 0..ncand {
                    coeff[i] = coeff[i] - c * qc[i];
                }
            }
        }
        let res = norm(&v);
        if res <= drop_tol * orig {
            continue;
        }
        let inv = Complex::new(F::one() / res, F::zero());
        qcols.push(v.mapv(|z| z * inv));
        ccols.push(coeff.mapv(|z| z * inv));
        kept.push(j);
    }

    let k = qcols.len();
    let mut basis = Array2::zeros((r, k));
    let mut coeffs = Array2::zeros((ncand, k));
    for (c, (q, qc)) in qcols.iter().zip(ccols.iter()).enumerate() {
        basis.column_mut(c).assign(q);
        coeffs.column_mut(c).assign(qc);
    }
    Orthonormalized { basis, coeffs, kept }
}

/// Eigendecomposition of a (numerically) unitary matrix.
///
/// Splits `u` into commuting Hermitian parts `K = (u+u^*)/2` and
/// `S = (u-u^*)/(2i)`, diagonalizes `K`, and resolves clustered eigenvalues by
/// diagonalizing `S` on each cluster. Returns unimodular eigenvalues and
/// orthonormal eigenvectors.
pub fn unitary_eig<F: Scalar>(u: &CMatrix<F>) -> (CVector<F>, CMatrix<F>) {
    let n = u.nrows();
    assert_eq!(n, u.ncols());
    let ua = adjoint(u);
    let half = Complex::new(F::lit(0.5), F::zero());
    let mih = Complex::new(F::zero(), -F::lit(0.5)); // -i/2
    let k = (u + &ua).mapv(|z| z * half);
    let s = (u - &ua).mapv(|z| z * mih);
    let ek = hermitian_eig(&k);
    let cluster_tol = F::lit(1e-7);

    let mut values: CVector<F> = Array1::zeros(n);
    let mut vectors: CMatrix<F> = Array2::zeros((n, n));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (ek.values[end] - ek.values[end - 1]).abs() < cluster_tol {
            end += 1;
        }
        let m = end - start;
        let vc = ek
            .vectors
            .slice(ndarray::s![.., start..end])
            .to_owned();
        if m == 1 {
            let col = vc.column(0).to_owned();
            let sv = s.dot(&col);
            let mu = inner(&sv.view(), &col.view()).re;
            values[start] = Complex::new(ek.values[start], mu);
            vectors.column_mut(start).assign(&col);
        } else {
            let sc = adjoint(&vc).dot(&s).dot(&vc);
            let es = hermitian_eig(&sc);
            let sub = vc.dot(&es.vectors);
            for j in 0..m {
                let col = sub.column(j).to_owned();
                // per-vector Rayleigh quotient of K refines the clustered value
                let kv = k.dot(&col);
                let lam = inner(&kv.view(), &col.view()).re;
                values[start + j] = Complex::new(lam, es.values[j]);
                vectors.column_mut(start + j).assign(&col);
            }
        }
        start = end;
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn jacobi_diagonalizes_random_hermitian() {
        let mut state = 42u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for n in [1usize, 2, 5, 9] {
            let g = Array2::from_shape_fn((n, n), |_| c(rnd(), rnd()));
            let h = &g + &adjoint(&g);
            let e = hermitian_eig(&h);
            // unitarity of the eigenvector matrix
            let vv = adjoint(&e.vectors).dot(&e.vectors);
            assert!(max_abs_diff(&vv, &identity::<f64>(n)) < 1e-12);
            // reconstruction
            let lam = Array2::from_shape_fn((n, n), |(i, j)| {
                if i == j { c(e.values[i], 0.0) } else { C::ZERO }
            });
            let rec = e.vectors.dot(&lam).dot(&adjoint(&e.vectors));
            assert!(max_abs_diff(&rec, &h) < 1e-12 * (1.0 + max_abs(&h)));
            // ascending
            for i in 1..n {
                assert!(e.values[i] >= e.values[i - 1]);
            }
        }
    }

    #[test]
    fn solve_matches_known_inverse() {
        let a = array![[c(2.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(3.0, 0.0)]];
        let b = identity::<f64>(2);
        let x = solve(&a, &b).unwrap();
        let rec = a.dot(&x);
        assert!(max_abs_diff(&rec, &b) < 1e-13);
    }

    #[test]
    fn solve_rejects_singular() {
        let a = array![[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(1.0, 0.0)]];
        let b = identity::<f64>(2);
        assert!(matches!(solve(&a, &b), Err(Error::SingularMatrix)));
    }

    #[test]
    fn singular_values_of_diagonal() {
        let a = array![[c(3.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -4.0)]];
        let s = singular_values(&a);
        assert!((s[0] - 3.0).abs() < 1e-12);
        assert!((s[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_drops_duplicates() {
        let v = array![
            [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]
        ];
        let o = gram_schmidt(&Array2::zeros((2, 0)), &v, 1e-8);
        assert_eq!(o.basis.ncols(), 2);
        assert_eq!(o.kept, vec![0, 2]);
        // coefficients reconstruct the basis
        let rec = v.dot(&o.coeffs);
        assert!(max_abs_diff(&rec, &o.basis) < 1e-13);
    }

    #[test]
    fn unitary_eig_recovers_circle_spectrum() {
        // permutation-like unitary: swap plus a phase
        let t = std::f64::consts::FRAC_PI_3;
        let u = array![
            [c(0.0, 0.0), C::from_polar(1.0, t)],
            [c(1.0, 0.0), c(0.0, 0.0)]
        ];
        let (vals, vecs) = unitary_eig(&u);
        for j in 0..2 {
            let col = vecs.column(j).to_owned();
            let uv = u.dot(&col);
            let lv = col.mapv(|z| z * vals[j]);
            let dev: f64 = uv
                .iter()
                .zip(lv.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12, "dev={dev}");
            assert!((vals[j].norm() - 1.0).abs() < 1e-12);
        }
    }
}
