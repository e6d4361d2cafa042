//! Solution synthesis: Schur-parameter extensions of the isometry, the
//! resolvent-form transform of solutions, atomic measure extraction for
//! constant unitary parameters, and moment verification.

use crate::error::{Error, Result};
use crate::linalg::{self, adjoint, identity, max_abs, max_abs_diff};
use crate::model::IsometryModel;
use crate::moment::MomentSequence;
use crate::{CMatrix, Scalar};
use ndarray::{s, Array2};
use num_complex::Complex;
use num_traits::Zero;
use std::sync::Arc;

/// A contraction-valued Schur parameter selecting a solution: either a
/// constant `delta x delta` matrix or a zeta-dependent evaluator defined on
/// the open unit disk (and, for gap checks, on the conjugate gap).
///
/// The matrix represents `Phi_zeta : N_0(A) -> N_inf(A)` in the defect bases;
/// its `(j,k)` entry is `(Phi_zeta u_k, v_j)`.
#[derive(Clone)]
pub enum SchurParameter<F: Scalar> {
    Constant(CMatrix<F>),
    Evaluator {
        dim: usize,
        f: Arc<dyn Fn(Complex<F>) -> CMatrix<F> + Send + Sync>,
    },
}

impl<F: Scalar> SchurParameter<F> {
    pub fn constant(m: CMatrix<F>) -> Self {
        SchurParameter::Constant(m)
    }

    /// Scalar phase parameter `F = e^{i phi}` (requires `delta = 1`).
    pub fn phase(phi: F) -> Self {
        SchurParameter::Constant(Array2::from_elem(
            (1, 1),
            Complex::from_polar(F::one(), phi),
        ))
    }

    pub fn evaluator(
        dim: usize,
        f: impl Fn(Complex<F>) -> CMatrix<F> + Send + Sync + 'static,
    ) -> Self {
        SchurParameter::Evaluator { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            SchurParameter::Constant(m) => m.nrows(),
            SchurParameter::Evaluator { dim, .. } => *dim,
        }
    }

    pub fn eval(&self, zeta: Complex<F>) -> CMatrix<F> {
        match self {
            SchurParameter::Constant(m) => m.clone(),
            SchurParameter::Evaluator { f, .. } => f(zeta),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SchurParameter::Constant(_))
    }

    /// Deviation of the constant value from unitarity, or `None` for
    /// evaluators.
    pub fn unitary_defect(&self) -> Option<F> {
        match self {
            SchurParameter::Constant(m) => {
                Some(max_abs_diff(&adjoint(m).dot(m), &identity(m.nrows())))
            }
            SchurParameter::Evaluator { .. } => None,
        }
    }
}

/// Check the contraction bound for a parameter value at one point.
pub fn contraction_check<F: Scalar>(value: &CMatrix<F>) -> Result<()> {
    let smax = linalg::sigma_max(value);
    if smax > F::one() + F::lit(1e-10) {
        return Err(Error::NotContractive {
            sigma_max: smax.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Extend the isometry by a parameter value: acts as `A` on `D(A)` and sends
/// `u_k` to `sum_j phi[j][k] v_j` on `N_0(A)`. Returns the `r x r` matrix of
/// `A (+) Phi`.
pub fn extend<F: Scalar>(model: &IsometryModel<F>, phi: &CMatrix<F>) -> Result<CMatrix<F>> {
    let delta = model.delta();
    if phi.dim() != (delta, delta) {
        return Err(Error::DimensionMismatch(format!(
            "parameter has shape {:?}, expected ({delta}, {delta})",
            phi.dim()
        )));
    }
    let mut u = model.shift_on_domain();
    if delta > 0 {
        let ext = model
            .defect_inf()
            .dot(phi)
            .dot(&adjoint(model.defect0()));
        u = u + ext;
    }
    Ok(u)
}

/// Evaluate the transform of the selected solution at `zeta` in the open unit
/// disk: `G(zeta)[k][j] = ((E - zeta (A (+) Phi_zeta))^{-1} x_k, x_j)` for
/// `0 <= k, j <= N-1`.
pub fn transform_eval<F: Scalar>(
    model: &IsometryModel<F>,
    p: &SchurParameter<F>,
    zeta: Complex<F>,
) -> Result<CMatrix<F>> {
    if zeta.norm() >= F::one() {
        return Err(Error::OutsideDisk {
            modulus: zeta.norm().to_f64().unwrap_or(f64::NAN),
        });
    }
    let value = p.eval(zeta);
    contraction_check(&value)?;
    let u = extend(model, &value)?;
    resolvent_matrix(model, &u, zeta)
}

/// Matrix elements of `(E - zeta U)^{-1}` against the first block of vectors.
fn resolvent_matrix<F: Scalar>(
    model: &IsometryModel<F>,
    u: &CMatrix<F>,
    zeta: Complex<F>,
) -> Result<CMatrix<F>> {
    let space = model.space();
    let n = space.matrix_size();
    let r = space.rank();
    let x_first = space.coordinates().slice(s![.., 0..n]).to_owned();
    let lhs = identity::<F>(r) - u.mapv(|z| z * zeta);
    let y = linalg::solve(&lhs, &x_first)?;
    // G[k][j] = (y_k, x_j) = x_j^* y_k
    let prod = adjoint(&x_first).dot(&y); // prod[j][k] = x_j^* y_k
    Ok(Array2::from_shape_fn((n, n), |(k, j)| prod[(j, k)]))
}

/// One atom of a matrix measure on the circle.
#[derive(Debug, Clone)]
pub struct Atom<F: Scalar> {
    /// Angle in `[0, 2*pi)`.
    pub theta: F,
    /// PSD matrix weight.
    pub weight: CMatrix<F>,
}

/// A finitely supported matrix measure on the unit circle, atoms sorted by
/// ascending angle.
#[derive(Debug, Clone)]
pub struct AtomicMeasure<F: Scalar> {
    atoms: Vec<Atom<F>>,
}

impl<F: Scalar> AtomicMeasure<F> {
    pub fn from_atoms(mut atoms: Vec<Atom<F>>) -> Self {
        atoms.sort_by(|a, b| a.theta.partial_cmp(&b.theta).unwrap_or(std::cmp::Ordering::Equal));
        Self { atoms }
    }

    pub fn atoms(&self) -> &[Atom<F>] {
        &self.atoms
    }

    pub fn matrix_size(&self) -> usize {
        self.atoms.first().map_or(0, |a| a.weight.nrows())
    }

    /// Total mass `sum_m W_m`.
    pub fn total_mass(&self, dim: usize) -> CMatrix<F> {
        let mut acc: CMatrix<F> = Array2::zeros((dim, dim));
        for a in &self.atoms {
            acc = acc + &a.weight;
        }
        acc
    }

    /// `sum_m e^{i n theta_m} W_m`.
    pub fn moment(&self, n: usize, dim: usize) -> CMatrix<F> {
        let mut acc: CMatrix<F> = Array2::zeros((dim, dim));
        for a in &self.atoms {
            let phase = Complex::from_polar(F::one(), F::from_usize(n).unwrap() * a.theta);
            acc = acc + a.weight.mapv(|z| z * phase);
        }
        acc
    }
}

/// Extract the atomic solution measure of a constant unitary parameter by
/// eigendecomposing the unitary extension and reading spectral projections
/// against the first block of vectors.
pub fn atomic_measure<F: Scalar>(
    model: &IsometryModel<F>,
    p: &SchurParameter<F>,
) -> Result<AtomicMeasure<F>> {
    let value = match p {
        SchurParameter::Constant(m) => m.clone(),
        SchurParameter::Evaluator { .. } => {
            return Err(Error::NotUnitary { deviation: f64::NAN })
        }
    };
    let udev = max_abs_diff(&adjoint(&value).dot(&value), &identity(value.nrows()));
    if udev > F::lit(1e-10) * F::one().max(max_abs(&value)) {
        return Err(Error::NotUnitary {
            deviation: udev.to_f64().unwrap_or(f64::NAN),
        });
    }
    let u = extend(model, &value)?;
    let space = model.space();
    let r = space.rank();
    let n = space.matrix_size();
    if r == 0 {
        return Ok(AtomicMeasure { atoms: Vec::new() });
    }
    let udev2 = max_abs_diff(&adjoint(&u).dot(&u), &identity(r));
    if udev2 > F::lit(1e-8) {
        return Err(Error::Internal(format!(
            "extension is not unitary: deviation {udev2}"
        )));
    }
    let (vals, vecs) = linalg::unitary_eig(&u);

    let tau_full = F::lit(std::f64::consts::TAU);
    let mut items: Vec<(F, usize)> = (0..r)
        .map(|j| {
            let mut th = vals[j].arg();
            if th < F::zero() {
                th = th + tau_full;
            }
            if th >= tau_full {
                th = th - tau_full;
            }
            (th, j)
        })
        .collect();
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    // cluster eigenvalues whose angular distance is below the merge tolerance,
    // including across the 0 / 2*pi wrap
    let merge_tol = F::lit(1e-9);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut prev_theta: Option<F> = None;
    for &(th, j) in &items {
        match (prev_theta, clusters.last_mut()) {
            (Some(prev), Some(cur)) if th - prev < merge_tol => cur.push(j),
            _ => clusters.push(vec![j]),
        }
        prev_theta = Some(th);
    }
    if clusters.len() > 1 {
        let first_th = items[0].0;
        let last_th = items[items.len() - 1].0;
        if (first_th + tau_full) - last_th < merge_tol {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }

    let x_first = space.coordinates().slice(s![.., 0..n]).to_owned();
    let mut atoms = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        // circular mean of the cluster eigenvalues
        let mut dir: Complex<F> = Complex::zero();
        for &j in &cluster {
            dir = dir + vals[j] / vals[j].norm();
        }
        let mut theta = dir.arg();
        if theta < F::zero() {
            theta = theta + tau_full;
        }
        if theta >= tau_full {
            theta = theta - tau_full;
        }
        // weight[k][j] = (P x_k, x_j) = x_j^* P x_k
        let mut weight: CMatrix<F> = Array2::zeros((n, n));
        for &c in &cluster {
            let v = vecs.column(c);
            // y[j] = v^* x_j
            let y: Vec<Complex<F>> = (0..n)
                .map(|j| {
                    x_first
                        .column(j)
                        .iter()
                        .zip(v.iter())
                        .fold(Complex::zero(), |acc: Complex<F>, (xj, vi)| {
                            acc + vi.conj() * *xj
                        })
                })
                .collect();
            for k in 0..n {
                for j in 0..n {
                    weight[(k, j)] = weight[(k, j)] + y[j].conj() * y[k];
                }
            }
        }
        atoms.push(Atom { theta, weight });
    }
    atoms.sort_by(|a, b| a.theta.partial_cmp(&b.theta).unwrap_or(std::cmp::Ordering::Equal));

    let measure = AtomicMeasure { atoms };
    validate_measure(&measure, model)?;
    Ok(measure)
}

fn validate_measure<F: Scalar>(m: &AtomicMeasure<F>, model: &IsometryModel<F>) -> Result<()> {
    let space = model.space();
    let n = space.matrix_size();
    let scale = F::one();
    for atom in m.atoms() {
        let eig = linalg::hermitian_eig(&atom.weight);
        if !eig.values.is_empty() && eig.values[0] < -F::lit(1e-10) * scale.max(eig.values[eig.values.len() - 1]) {
            return Err(Error::Internal(format!(
                "atom weight not PSD: min eigenvalue {}",
                eig.values[0]
            )));
        }
    }
    // normalization: sum of weights equals the Gram block S_0
    let s0 = Array2::from_shape_fn((n, n), |(k, j)| space.gram(k, j));
    let dev = max_abs_diff(&m.total_mass(n), &s0);
    if dev > F::lit(1e-8) * F::one().max(max_abs(&s0)) {
        return Err(Error::Internal(format!(
            "measure mass misses S_0 by {dev}"
        )));
    }
    Ok(())
}

/// Direct transform of an explicit measure: `sum_m W_m / (1 - zeta e^{i theta_m})`.
pub fn measure_transform<F: Scalar>(
    m: &AtomicMeasure<F>,
    dim: usize,
    zeta: Complex<F>,
) -> Result<CMatrix<F>> {
    let mut acc: CMatrix<F> = Array2::zeros((dim, dim));
    for atom in m.atoms() {
        let denom = Complex::new(F::one(), F::zero())
            - zeta * Complex::from_polar(F::one(), atom.theta);
        if denom.norm() < F::lit(1e-12) {
            return Err(Error::PoleOnAtom);
        }
        acc = acc + atom.weight.mapv(|z| z / denom);
    }
    Ok(acc)
}

/// Per-order residual report of the moment identity
/// `sum_m e^{i n theta_m} W_m = S_n`.
#[derive(Debug, Clone)]
pub struct ResidualReport<F: Scalar> {
    pub residuals: Vec<F>,
    pub pass: bool,
    pub tol: F,
}

pub fn verify_moments<F: Scalar>(
    m: &AtomicMeasure<F>,
    s: &MomentSequence<F>,
    tol: F,
) -> ResidualReport<F> {
    let n = s.matrix_size();
    let mut residuals = Vec::with_capacity(s.order() + 1);
    for k in 0..=s.order() {
        residuals.push(max_abs_diff(&m.moment(k, n), s.moment(k)));
    }
    let pass = residuals.iter().all(|&r| r <= tol);
    ResidualReport { residuals, pass, tol }
}

/// Histogram approximation of the measure behind a transform evaluator `g`,
/// by averaging the Hermitian part of `C(zeta) = 2 G(zeta) - S_0` over `k`
/// equal arcs at radius `radius < 1` (Poisson-kernel smoothing).
///
/// Fails when the Hermitian part is negative beyond `herm_tol`, which signals
/// that `g` is not the transform of a valid solution.
pub fn invert_transform<F: Scalar>(
    g: &dyn Fn(Complex<F>) -> CMatrix<F>,
    s0: &CMatrix<F>,
    k: usize,
    radius: F,
    herm_tol: F,
) -> Result<AtomicMeasure<F>> {
    let n = s0.nrows();
    let tau_full = F::lit(std::f64::consts::TAU);
    let bin = tau_full / F::from_usize(k).unwrap();
    let sub = 4usize;
    let scale = F::one().max(max_abs(s0));
    let two = Complex::new(F::lit(2.0), F::zero());
    let mut atoms = Vec::with_capacity(k);
    for i in 0..k {
        let mut acc: CMatrix<F> = Array2::zeros((n, n));
        for t in 0..sub {
            let frac = (F::from_usize(t).unwrap() + F::lit(0.5))
                / F::from_usize(sub).unwrap();
            let theta = (F::from_usize(i).unwrap() + frac) * bin;
            // mass at angle theta shows up at zeta = r e^{-i theta}
            let zeta = Complex::from_polar(radius, -theta);
            let c = g(zeta).mapv(|z| z * two) - s0;
            let h = linalg::hermitian_part(&c);
            let eig = linalg::hermitian_eig(&h);
            if eig.values[0] < -herm_tol * scale {
                return Err(Error::NotHerglotz {
                    min_eigenvalue: eig.values[0].to_f64().unwrap_or(f64::NAN),
                });
            }
            acc = acc + &h;
        }
        let norm = Complex::new(
            F::one() / (F::from_usize(sub).unwrap() * F::from_usize(k).unwrap()),
            F::zero(),
        );
        let weight = acc.mapv(|z| z * norm);
        let theta = (F::from_usize(i).unwrap() + F::lit(0.5)) * bin;
        atoms.push(Atom { theta, weight });
    }
    Ok(AtomicMeasure { atoms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_isometry, build_model_space};
    use crate::moment::ToeplitzGram;
    use crate::synth;
    use ndarray::array;
    use num_complex::Complex64 as C;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn demo_model() -> IsometryModel<f64> {
        let t = ToeplitzGram::build(&synth::demo_moments());
        build_isometry(&build_model_space(&t, 1e-10).unwrap()).unwrap()
    }

    fn apply(m: &crate::CMatrix64, v: &crate::CVector64) -> crate::CVector64 {
        m.dot(v)
    }

    fn vec_dev(a: &crate::CVector64, b: &crate::CVector64) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn extend_with_unit_phase_swaps_defect_vectors() {
        let model = demo_model();
        let space = model.space();
        let u = extend(&model, &array![[c(1.0, 0.0)]]).unwrap();
        // fixes x_0, swaps x_2 <-> x_5
        assert!(vec_dev(&apply(&u, &space.vector(0)), &space.vector(0)) < 1e-10);
        assert!(vec_dev(&apply(&u, &space.vector(2)), &space.vector(5)) < 1e-10);
        assert!(vec_dev(&apply(&u, &space.vector(5)), &space.vector(2)) < 1e-10);
        // unitary on H
        let g = adjoint(&u).dot(&u);
        assert!(max_abs_diff(&g, &identity(3)) < 1e-10);
    }

    #[test]
    fn extend_with_empty_defect_is_the_shift() {
        let m = crate::moment::MomentSequence::new(
            1,
            1,
            vec![array![[c(1.0, 0.0)]], array![[c(1.0, 0.0)]]],
        )
        .unwrap();
        let model =
            build_isometry(&build_model_space(&ToeplitzGram::build(&m), 1e-10).unwrap()).unwrap();
        assert_eq!(model.delta(), 0);
        let u = extend(&model, &Array2::zeros((0, 0))).unwrap();
        assert!(max_abs_diff(&adjoint(&u).dot(&u), &identity(1)) < 1e-12);
    }

    #[test]
    fn extend_with_contraction_stays_contractive() {
        use rand::{Rng, SeedableRng};
        let model = demo_model();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let phi = array![[c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7))]];
            let u = extend(&model, &phi).unwrap();
            assert!(linalg::sigma_max(&u) <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn transform_matches_published_matrix() {
        let model = demo_model();
        let p = SchurParameter::phase(0.0);
        for &zeta in &[c(0.0, 0.0), c(0.3, 0.0), c(0.0, 0.5), c(-0.4, 0.2)] {
            let g = transform_eval(&model, &p, zeta).unwrap();
            let one = c(1.0, 0.0);
            let a = one / (one - zeta);
            let b = one / (one - zeta * zeta);
            let expect = array![
                [a, a, C::ZERO],
                [a, a, C::ZERO],
                [C::ZERO, C::ZERO, b]
            ];
            assert!(max_abs_diff(&g, &expect) < 1e-10, "zeta={zeta}");
        }
    }

    #[test]
    fn transform_at_zero_returns_s0() {
        use rand::SeedableRng;
        let model = demo_model();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let phi = synth::random_unitary(&mut rng, 1);
            let g = transform_eval(&model, &SchurParameter::constant(phi), C::ZERO).unwrap();
            let s0 = synth::demo_moments().moment(0).clone();
            assert!(max_abs_diff(&g, &s0) < 1e-12);
        }
    }

    #[test]
    fn transform_agrees_with_measure_sum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let n = 3;
        let measure = synth::random_measure(&mut rng, n, 5);
        let m = synth::moments_from_measure(&measure, n, 2);
        let model =
            build_isometry(&build_model_space(&ToeplitzGram::build(&m), 1e-10).unwrap()).unwrap();
        let phi = synth::random_unitary(&mut rng, model.delta());
        let p = SchurParameter::constant(phi);
        let sol = atomic_measure(&model, &p).unwrap();
        for _ in 0..10 {
            let zeta = C::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..2.0 * PI));
            let g1 = transform_eval(&model, &p, zeta).unwrap();
            let g2 = measure_transform(&sol, n, zeta).unwrap();
            assert!(max_abs_diff(&g1, &g2) < 1e-9);
        }
    }

    #[test]
    fn atomic_measure_demo_instance() {
        let model = demo_model();
        let sol = atomic_measure(&model, &SchurParameter::phase(0.0)).unwrap();
        assert_eq!(sol.atoms().len(), 2);
        let a0 = &sol.atoms()[0];
        let a1 = &sol.atoms()[1];
        assert!(a0.theta.abs() < 1e-10);
        assert!((a1.theta - PI).abs() < 1e-10);
        let one = c(1.0, 0.0);
        let half = c(0.5, 0.0);
        let w0 = array![
            [one, one, C::ZERO],
            [one, one, C::ZERO],
            [C::ZERO, C::ZERO, half]
        ];
        let w1 = array![
            [C::ZERO, C::ZERO, C::ZERO],
            [C::ZERO, C::ZERO, C::ZERO],
            [C::ZERO, C::ZERO, half]
        ];
        assert!(max_abs_diff(&a0.weight, &w0) < 1e-10);
        assert!(max_abs_diff(&a1.weight, &w1) < 1e-10);
    }

    #[test]
    fn determinate_instance_has_single_atom() {
        let m = crate::moment::MomentSequence::new(
            1,
            1,
            vec![array![[c(1.0, 0.0)]], array![[c(1.0, 0.0)]]],
        )
        .unwrap();
        let model =
            build_isometry(&build_model_space(&ToeplitzGram::build(&m), 1e-10).unwrap()).unwrap();
        let sol = atomic_measure(&model, &SchurParameter::constant(Array2::zeros((0, 0)))).unwrap();
        assert_eq!(sol.atoms().len(), 1);
        assert!(sol.atoms()[0].theta.abs() < 1e-10);
        assert!((sol.atoms()[0].weight[(0, 0)] - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn atomic_measure_rejects_non_unitary() {
        let model = demo_model();
        let p = SchurParameter::constant(array![[c(0.5, 0.0)]]);
        assert!(matches!(atomic_measure(&model, &p), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn moments_reproduce_for_random_unitaries() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for seed in 0..10u64 {
            let _ = seed;
            let (n, d) = synth::random_shape(&mut rng, 4, 4);
            let measure = synth::random_measure(&mut rng, n, 10);
            let m = synth::moments_from_measure(&measure, n, d);
            let model = build_isometry(
                &build_model_space(&ToeplitzGram::build(&m), 1e-10).unwrap(),
            )
            .unwrap();
            let phi = synth::random_unitary(&mut rng, model.delta());
            let sol = atomic_measure(&model, &SchurParameter::constant(phi)).unwrap();
            let rep = verify_moments(&sol, &m, 1e-8);
            assert!(rep.pass, "residuals {:?}", rep.residuals);
        }
    }

    #[test]
    fn two_parameters_give_distinct_measures() {
        let model = demo_model();
        let s1 = atomic_measure(&model, &SchurParameter::phase(0.0)).unwrap();
        let s2 = atomic_measure(&model, &SchurParameter::phase(PI)).unwrap();
        // measures must differ in at least one atom or weight
        let mut differ = s1.atoms().len() != s2.atoms().len();
        if !differ {
            for (a, b) in s1.atoms().iter().zip(s2.atoms().iter()) {
                if (a.theta - b.theta).abs() > 1e-6 || max_abs_diff(&a.weight, &b.weight) > 1e-6 {
                    differ = true;
                }
            }
        }
        assert!(differ);
    }

    #[test]
    fn measure_transform_single_atom() {
        let s0 = array![[c(2.0, 0.0)]];
        let m = AtomicMeasure::from_atoms(vec![Atom { theta: 0.0, weight: s0.clone() }]);
        let zeta = c(0.25, 0.1);
        let g = measure_transform(&m, 1, zeta).unwrap();
        let expect = s0.mapv(|z| z / (c(1.0, 0.0) - zeta));
        assert!(max_abs_diff(&g, &expect) < 1e-14);
    }

    #[test]
    fn measure_transform_demo_entry() {
        let model = demo_model();
        let sol = atomic_measure(&model, &SchurParameter::phase(0.0)).unwrap();
        let g = measure_transform(&sol, 3, c(0.5, 0.0)).unwrap();
        assert!((g[(2, 2)] - c(4.0 / 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn measure_transform_empty_measure() {
        let m = AtomicMeasure::<f64>::from_atoms(Vec::new());
        let g = measure_transform(&m, 2, c(0.3, 0.0)).unwrap();
        assert!(max_abs(&g) == 0.0);
    }

    #[test]
    fn measure_transform_pole_detection() {
        let m = AtomicMeasure::from_atoms(vec![Atom {
            theta: 0.0,
            weight: array![[c(1.0, 0.0)]],
        }]);
        assert!(matches!(
            measure_transform(&m, 1, c(1.0, 0.0)),
            Err(Error::PoleOnAtom)
        ));
    }

    #[test]
    fn verify_moments_detects_perturbation() {
        let model = demo_model();
        let moments = synth::demo_moments();
        let sol = atomic_measure(&model, &SchurParameter::phase(0.0)).unwrap();
        let rep = verify_moments(&sol, &moments, 1e-8);
        assert!(rep.pass);
        assert!(rep.residuals.iter().all(|&r| r < 1e-12));

        let mut atoms = sol.atoms().to_vec();
        atoms[0].weight[(0, 0)] += c(1e-3, 0.0);
        let bad = AtomicMeasure::from_atoms(atoms);
        let rep = verify_moments(&bad, &moments, 1e-8);
        assert!(!rep.pass);
        assert!((rep.residuals[0] - 1e-3).abs() < 1e-6);
    }

    #[test]
    fn herglotz_positivity_of_transforms() {
        use rand::{Rng, SeedableRng};
        let model = demo_model();
        let s0 = synth::demo_moments().moment(0).clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let p = SchurParameter::phase(1.3);
        for _ in 0..20 {
            let zeta = C::from_polar(rng.gen_range(0.0..0.95), rng.gen_range(0.0..2.0 * PI));
            let g = transform_eval(&model, &p, zeta).unwrap();
            let cmat = g.mapv(|z| z * c(2.0, 0.0)) - &s0;
            let h = linalg::hermitian_part(&cmat);
            let eig = linalg::hermitian_eig(&h);
            assert!(eig.values[0] > -1e-9);
        }
    }

    #[test]
    fn invert_transform_concentrates_at_atom() {
        let k = 1024usize;
        let r = 1.0 - 1.0 / 1024.0;
        let g = |zeta: C| array![[c(1.0, 0.0) / (c(1.0, 0.0) - zeta)]];
        let s0 = array![[c(1.0, 0.0)]];
        let hist = invert_transform(&g, &s0, k, r, 1e-9).unwrap();
        // the kernel peak is comparable to the sub-quadrature step, so the
        // total carries a few percent of quadrature error
        let total: f64 = hist.atoms().iter().map(|a| a.weight[(0, 0)].re).sum();
        assert!((total - 1.0).abs() < 0.05, "total={total}");
        // the two bins adjacent to theta = 0 carry the bulk of the mass
        let near: f64 = hist.atoms()[0].weight[(0, 0)].re
            + hist.atoms()[k - 1].weight[(0, 0)].re;
        assert!(near > 0.85, "near={near}");
    }

    #[test]
    fn invert_transform_flat_for_uniform_measure() {
        let k = 64usize;
        let g = |_zeta: C| array![[c(1.0, 0.0)]];
        let s0 = array![[c(1.0, 0.0)]];
        let hist = invert_transform(&g, &s0, k, 0.9, 1e-9).unwrap();
        for a in hist.atoms() {
            assert!((a.weight[(0, 0)].re - 1.0 / k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn invert_transform_matches_atomic_solution() {
        let model = demo_model();
        let p = SchurParameter::phase(0.0);
        let k = 2048usize;
        let r = 1.0 - 1.0 / 2048.0;
        let s0 = synth::demo_moments().moment(0).clone();
        let g = |zeta: C| transform_eval(&model, &p, zeta).unwrap();
        let hist = invert_transform(&g, &s0, k, r, 1e-6).unwrap();
        // entry (2,2) splits roughly half/half between 0 and pi
        let mass_near = |center: f64| -> f64 {
            hist.atoms()
                .iter()
                .filter(|a| {
                    let d = (a.theta - center).abs();
                    d.min(2.0 * PI - d) < 0.1
                })
                .map(|a| a.weight[(2, 2)].re)
                .sum()
        };
        assert!((mass_near(0.0) - 0.5).abs() < 0.1);
        assert!((mass_near(PI) - 0.5).abs() < 0.1);
    }

    #[test]
    fn invert_transform_rejects_non_herglotz() {
        let g = |zeta: C| array![[c(1.0, 0.0) / (c(1.0, 0.0) - zeta * c(3.0, 0.0))]];
        let s0 = array![[c(1.0, 0.0)]];
        // pole inside the disk; Hermitian part goes negative
        assert!(invert_transform(&g, &s0, 64, 0.9, 1e-9).is_err());
    }
}
