//! Gap machinery: open arcs and their conjugate sets, regular-type
//! certification on the conjugate set, the boundary matrices `M_S`, `M_Q` and
//! `W~`, the constrained parameter class check, constant candidate search,
//! and gap-mass evaluation.
//!
//! All "for all zeta" conditions are certified on finite grids; verdicts are
//! grid-certified, not proofs. Margins and the grid are reported so callers
//! can refine.

use crate::error::{Error, Result};
use crate::linalg::{self, adjoint};
use crate::model::{m_zeta_basis, n_zeta_basis, IsometryModel};
use crate::solver::{AtomicMeasure, SchurParameter};
use crate::{CMatrix, Scalar};
use ndarray::Array2;
use num_complex::Complex;
use rand::SeedableRng;

fn tau_f<F: Scalar>() -> F {
    F::lit(std::f64::consts::TAU)
}

/// Normalize an angle to `[0, 2*pi)`.
fn norm_angle<F: Scalar>(t: F) -> F {
    let tau = tau_f::<F>();
    let mut t = t % tau;
    if t < F::zero() {
        t = t + tau;
    }
    if t >= tau {
        t = t - tau;
    }
    t
}

/// Wrap an angle difference to `(-pi, pi]`.
fn wrap_pi<F: Scalar>(t: F) -> F {
    let tau = tau_f::<F>();
    let pi = tau / F::lit(2.0);
    let mut t = t % tau;
    if t <= -pi {
        t = t + tau;
    }
    if t > pi {
        t = t - tau;
    }
    t
}

/// Reduce an angle to the canonical storage range `(-pi, pi]`. Conjugation
/// (reflection across the real axis) is exact negation in this range, which
/// makes the conjugate-set involution exact in floating point.
fn canon_angle<F: Scalar>(t: F) -> F {
    let t = norm_angle(t);
    let pi = F::lit(std::f64::consts::PI);
    if t > pi {
        t - tau_f::<F>()
    } else {
        t
    }
}

/// Exact negation on `(-pi, pi]` with `pi` as the fixed point.
fn canon_neg<F: Scalar>(t: F) -> F {
    let pi = F::lit(std::f64::consts::PI);
    if t == pi {
        pi
    } else {
        -t
    }
}

/// An open arc of the unit circle, traversed counterclockwise from `start` to
/// `end` (wrapping through 0 when `end < start`). Endpoints are excluded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc<F: Scalar> {
    start: F,
    end: F,
}

impl<F: Scalar> Arc<F> {
    pub fn new(start: F, end: F) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidArc("arc angles must be finite".into()));
        }
        let start = canon_angle(start);
        let end = canon_angle(end);
        if start == end {
            return Err(Error::InvalidArc(
                "arc endpoints coincide (empty and full-circle arcs are excluded)".into(),
            ));
        }
        Ok(Self { start, end })
    }

    /// Start angle in `[0, 2*pi)`.
    pub fn start(&self) -> F {
        norm_angle(self.start)
    }

    /// End angle in `[0, 2*pi)`.
    pub fn end(&self) -> F {
        norm_angle(self.end)
    }

    /// Arc length in `(0, 2*pi)`.
    pub fn len(&self) -> F {
        let l = norm_angle(self.end - self.start);
        if l == F::zero() {
            tau_f::<F>()
        } else {
            l
        }
    }

    /// Strict membership of `e^{i theta}` in the open arc.
    pub fn contains(&self, theta: F) -> bool {
        let off = norm_angle(theta - self.start);
        off > F::zero() && off < self.len()
    }

    /// Membership with atoms within `slack` of an endpoint counted outside.
    pub fn contains_with_slack(&self, theta: F, slack: F) -> bool {
        let off = norm_angle(theta - self.start);
        off > slack && off < self.len() - slack
    }

    /// `n` midpoint samples, uniformly spaced inside the open arc.
    pub fn grid(&self, n: usize) -> Vec<F> {
        let len = self.len();
        (0..n)
            .map(|i| {
                let frac = (F::from_usize(i).unwrap() + F::lit(0.5))
                    / F::from_usize(n).unwrap();
                norm_angle(self.start + len * frac)
            })
            .collect()
    }

    /// Reflection across the real axis: `(a, b) -> (2*pi - b, 2*pi - a)`.
    pub fn conjugate(&self) -> Arc<F> {
        Arc {
            start: canon_neg(self.end),
            end: canon_neg(self.start),
        }
    }
}

/// The open arc `l(z, w)` from `z` counterclockwise to `w`, both unimodular.
pub fn make_arc<F: Scalar>(z: Complex<F>, w: Complex<F>) -> Result<Arc<F>> {
    let tol = F::lit(1e-12);
    if (z.norm() - F::one()).abs() > tol || (w.norm() - F::one()).abs() > tol {
        return Err(Error::InvalidArc("arc endpoints must be unimodular".into()));
    }
    let t = norm_angle(z.arg());
    let y = norm_angle(w.arg());
    if t == y {
        return Err(Error::InvalidArc("arc endpoints coincide".into()));
    }
    Arc::new(t, y)
}

/// A finite union of pairwise disjoint open arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSet<F: Scalar> {
    arcs: Vec<Arc<F>>,
}

impl<F: Scalar> GapSet<F> {
    pub fn new(arcs: Vec<Arc<F>>) -> Result<Self> {
        for (i, a) in arcs.iter().enumerate() {
            for b in arcs.iter().skip(i + 1) {
                if arcs_overlap(a, b) {
                    return Err(Error::InvalidGapSet(format!(
                        "arcs ({}, {}) and ({}, {}) overlap",
                        a.start, a.end, b.start, b.end
                    )));
                }
            }
        }
        Ok(Self { arcs })
    }

    pub fn arcs(&self) -> &[Arc<F>] {
        &self.arcs
    }

    pub fn contains(&self, theta: F) -> bool {
        self.arcs.iter().any(|a| a.contains(theta))
    }

    /// `n` midpoint samples per arc, grouped by arc.
    pub fn grid(&self, n: usize) -> Vec<Vec<F>> {
        self.arcs.iter().map(|a| a.grid(n)).collect()
    }
}

fn arcs_overlap<F: Scalar>(a: &Arc<F>, b: &Arc<F>) -> bool {
    // open arcs intersect iff one starts strictly inside the other, or they
    // share a start point
    let d = norm_angle(b.start - a.start);
    d < a.len() && d + b.len() > F::zero() || norm_angle(a.start - b.start) < b.len()
}

/// The conjugate set `{ z : conj(z) in g }`, the reflection of the gap across
/// the real axis. An involution.
pub fn conjugate_set<F: Scalar>(g: &GapSet<F>) -> GapSet<F> {
    GapSet {
        arcs: g.arcs.iter().map(Arc::conjugate).collect(),
    }
}

/// Grid certificate that every sampled point of the conjugate set is of
/// regular type for the isometry.
#[derive(Debug, Clone)]
pub struct RegularTypeReport<F: Scalar> {
    /// Sampled angles in the conjugate set, flattened over arcs.
    pub grid: Vec<F>,
    /// Per-point smallest singular value of the shifted-isometry matrix.
    pub margins: Vec<F>,
    /// All margins above `tol` and the local basis has full dimension.
    pub certified: bool,
}

/// Smallest singular value of the matrix of `E - zeta A` from the domain
/// basis to the basis of `M_zeta(A)`. A margin of zero (dimension collapse)
/// or below tolerance disqualifies `zeta` as a regular-type point.
fn regularity_margin<F: Scalar>(model: &IsometryModel<F>, zeta: Complex<F>) -> F {
    let mz = m_zeta_basis(model, zeta);
    if mz.ncols() != model.tau() {
        return F::zero();
    }
    // (E - zeta A) on the domain basis columns
    let shifted = model.domain_basis()
        - &model
            .range_basis()
            .dot(model.a_matrix())
            .mapv(|z| z * zeta);
    linalg::sigma_min(&adjoint(&mz).dot(&shifted))
}

/// Sample the conjugate set of `g` on `grid_n` midpoints per arc and check
/// that `E - zeta A` stays bounded below. This is necessary for gap
/// solvability; failure is conclusive, success is grid-certified only.
pub fn regular_type_certificate<F: Scalar>(
    model: &IsometryModel<F>,
    g: &GapSet<F>,
    grid_n: usize,
    tol: F,
) -> Result<RegularTypeReport<F>> {
    if model.delta() == 0 {
        return Err(Error::Determinate);
    }
    let conj = conjugate_set(g);
    let mut grid = Vec::new();
    let mut margins = Vec::new();
    for arc in conj.grid(grid_n) {
        for theta in arc {
            let zeta = Complex::from_polar(F::one(), theta);
            grid.push(theta);
            margins.push(regularity_margin(model, zeta));
        }
    }
    let certified = margins.iter().all(|&m| m > tol);
    Ok(RegularTypeReport { grid, margins, certified })
}

/// The boundary matrices `M_S[j][k] = (g'_k, u_j)` and `M_Q[j][k] = (g'_k, v_j)`
/// built from the `N_zeta(A)` basis against the defect bases.
pub fn szeta_qzeta<F: Scalar>(
    model: &IsometryModel<F>,
    zeta: Complex<F>,
) -> Result<(CMatrix<F>, CMatrix<F>)> {
    let gprime = n_zeta_basis(model, zeta)?;
    let ms = adjoint(model.defect0()).dot(&gprime);
    let mq = adjoint(model.defect_inf()).dot(&gprime);
    Ok((ms, mq))
}

/// The forbidden boundary matrix `W~ = zeta^{-1} M_Q M_S^{-1}`.
pub fn w_tilde<F: Scalar>(model: &IsometryModel<F>, zeta: Complex<F>) -> Result<CMatrix<F>> {
    let (ms, mq) = szeta_qzeta(model, zeta)?;
    let inv = linalg::solve(&ms, &linalg::identity(ms.nrows()))?;
    let zinv = zeta.inv();
    Ok(mq.dot(&inv).mapv(|z| z * zinv))
}

/// Diagnostics of the three membership conditions for the constrained
/// parameter class.
#[derive(Debug, Clone)]
pub struct ClassReport<F: Scalar> {
    /// Radial continuity (Cauchy behavior of `F(r zeta)` as `r -> 1`).
    pub cond_a: bool,
    /// Unitarity on the conjugate-set grid.
    pub cond_b: bool,
    pub cond_b_deviation: F,
    /// Invertibility of `F - W~` on the conjugate-set grid.
    pub cond_c: bool,
    pub cond_c_margin: F,
    pub pass: bool,
}

/// Scalar-case refinement of the condition-C margin: between consecutive grid
/// samples the continuous phase of `W~` may sweep past the phase of `F`,
/// which is an off-grid zero of `F - W~`. Detect it by a sign change of the
/// wrapped phase difference and report a zero margin.
fn refined_scalar_margin<F: Scalar>(fs: &[Complex<F>], ws: &[Complex<F>]) -> F {
    let pi = F::lit(std::f64::consts::PI);
    let mut margin = F::infinity();
    let mut prev_diff: Option<F> = None;
    for (f, w) in fs.iter().zip(ws.iter()) {
        margin = margin.min((f - w).norm());
        // phase tracking is meaningful only for unimodular samples
        if (f.norm() - F::one()).abs() > F::lit(1e-6)
            || (w.norm() - F::one()).abs() > F::lit(1e-6)
        {
            prev_diff = None;
            continue;
        }
        let d = wrap_pi(f.arg() - w.arg());
        if d == F::zero() {
            return F::zero();
        }
        if let Some(p) = prev_diff {
            // opposite signs without a branch jump: the difference crossed 0
            if p.signum() != d.signum() && (p - d).abs() < pi {
                return F::zero();
            }
        }
        prev_diff = Some(d);
    }
    margin
}

/// Check the three conditions for `p` to select a gap-respecting solution:
/// A) radial continuity of the evaluator toward the conjugate set, B)
/// unitarity of the boundary values, C) invertibility of `F - W~` on the
/// conjugate set. Grid-certified on `grid_n` midpoints per arc.
pub fn class_check<F: Scalar>(
    model: &IsometryModel<F>,
    g: &GapSet<F>,
    p: &SchurParameter<F>,
    grid_n: usize,
    tol: F,
) -> Result<ClassReport<F>> {
    if model.delta() == 0 {
        return Err(Error::Determinate);
    }
    let conj = conjugate_set(g);
    let arcs = conj.grid(grid_n);

    // A) radial Cauchy test with radii 1 - 2^{-k}: constants pass trivially
    let mut cond_a = true;
    if !p.is_constant() {
        'outer: for arc in &arcs {
            for &theta in arc {
                let dir = Complex::from_polar(F::one(), theta);
                let mut prev_val: Option<CMatrix<F>> = None;
                let mut prev_diff: Option<F> = None;
                let mut last_diff = F::zero();
                for k in 4..=12 {
                    let r = F::one() - F::lit(2.0).powi(-k);
                    let val = p.eval(dir * Complex::new(r, F::zero()));
                    if let Some(pv) = &prev_val {
                        last_diff = linalg::max_abs_diff(&val, pv);
                        if let Some(pd) = prev_diff {
                            if last_diff > tol && last_diff > F::lit(0.75) * pd {
                                cond_a = false;
                                break 'outer;
                            }
                        }
                        prev_diff = Some(last_diff);
                    }
                    prev_val = Some(val);
                }
                if last_diff > tol {
                    cond_a = false;
                    break 'outer;
                }
            }
        }
    }

    // B) and C) on the boundary grid
    let delta = model.delta();
    let eye = linalg::identity::<F>(delta);
    let mut b_dev = F::zero();
    let mut c_margin = F::infinity();
    for arc in &arcs {
        let mut fs = Vec::with_capacity(arc.len());
        let mut ws = Vec::with_capacity(arc.len());
        for &theta in arc {
            let zeta = Complex::from_polar(F::one(), theta);
            let fval = p.eval(zeta);
            b_dev = b_dev.max(linalg::max_abs_diff(&adjoint(&fval).dot(&fval), &eye));
            let wt = w_tilde(model, zeta)?;
            c_margin = c_margin.min(linalg::sigma_min(&(&fval - &wt)));
            fs.push(fval);
            ws.push(wt);
        }
        if delta == 1 {
            let f_scal: Vec<_> = fs.iter().map(|m| m[(0, 0)]).collect();
            let w_scal: Vec<_> = ws.iter().map(|m| m[(0, 0)]).collect();
            c_margin = c_margin.min(refined_scalar_margin(&f_scal, &w_scal));
        }
    }
    let cond_b = b_dev <= tol;
    let cond_c = c_margin > tol;
    Ok(ClassReport {
        cond_a,
        cond_b,
        cond_b_deviation: b_dev,
        cond_c,
        cond_c_margin: c_margin,
        pass: cond_a && cond_b && cond_c,
    })
}

/// A constant unitary candidate with its condition-C margin over the grid.
#[derive(Debug, Clone)]
pub struct Candidate<F: Scalar> {
    pub value: CMatrix<F>,
    pub margin: F,
}

/// Search for a constant unitary parameter with a positive condition-C margin
/// (constants satisfy conditions A and B automatically). For a
/// one-dimensional defect the phase circle is scanned exhaustively; for larger
/// defects a diagonal-phase grid plus seeded random unitaries are tried.
/// Returns the best candidate if its margin exceeds `tol`; `None` is
/// inconclusive, not a proof of emptiness.
pub fn constant_candidate_search<F: Scalar>(
    model: &IsometryModel<F>,
    g: &GapSet<F>,
    grid_n: usize,
    attempts: usize,
    tol: F,
    seed: u64,
) -> Result<Option<Candidate<F>>> {
    let delta = model.delta();
    if delta == 0 {
        return Err(Error::Determinate);
    }
    let conj = conjugate_set(g);
    let arcs = conj.grid(grid_n);
    let mut w_arcs: Vec<Vec<CMatrix<F>>> = Vec::with_capacity(arcs.len());
    for arc in &arcs {
        let mut ws = Vec::with_capacity(arc.len());
        for &theta in arc {
            ws.push(w_tilde(model, Complex::from_polar(F::one(), theta))?);
        }
        w_arcs.push(ws);
    }

    let margin_of = |f: &CMatrix<F>| -> F {
        let mut m = F::infinity();
        for ws in &w_arcs {
            for w in ws {
                m = m.min(linalg::sigma_min(&(f - w)));
            }
            if delta == 1 {
                let fs: Vec<_> = ws.iter().map(|_| f[(0, 0)]).collect();
                let wss: Vec<_> = ws.iter().map(|m| m[(0, 0)]).collect();
                m = m.min(refined_scalar_margin(&fs, &wss));
            }
        }
        m
    };

    let mut best: Option<Candidate<F>> = None;
    let mut consider = |value: CMatrix<F>, margin: F| {
        if best.as_ref().map_or(true, |b| margin > b.margin) {
            best = Some(Candidate { value, margin });
        }
    };

    if delta == 1 {
        for j in 0..attempts {
            let phi = tau_f::<F>() * F::from_usize(j).unwrap() / F::from_usize(attempts).unwrap();
            let f = Array2::from_elem((1, 1), Complex::from_polar(F::one(), phi));
            let m = margin_of(&f);
            consider(f, m);
        }
    } else {
        // diagonal-phase grid: per-entry phase resolution bounded by attempts
        let per = (F::from_usize(attempts).unwrap().powf(
            F::one() / F::from_usize(delta).unwrap(),
        ))
        .to_usize()
        .unwrap_or(2)
        .max(2);
        let total = per.pow(delta as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut f = Array2::zeros((delta, delta));
            for k in 0..delta {
                let j = rem % per;
                rem /= per;
                let phi =
                    tau_f::<F>() * F::from_usize(j).unwrap() / F::from_usize(per).unwrap();
                f[(k, k)] = Complex::from_polar(F::one(), phi);
            }
            let m = margin_of(&f);
            consider(f, m);
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..attempts {
            let q = random_unitary_generic::<F, _>(&mut rng, delta);
            let m = margin_of(&q);
            consider(q, m);
        }
    }

    Ok(best.filter(|c| c.margin > tol))
}

/// Orthonormalized complex Gaussian, generic-scalar version of the `f64`
/// generator in `synth`.
fn random_unitary_generic<F: Scalar, R: rand::Rng>(rng: &mut R, dim: usize) -> CMatrix<F> {
    loop {
        let g = Array2::from_shape_fn((dim, dim), |_| {
            Complex::new(
                F::lit(rng.gen_range(-1.0..1.0)),
                F::lit(rng.gen_range(-1.0..1.0)),
            )
        });
        let o = linalg::gram_schmidt(&Array2::zeros((dim, 0)), &g, F::lit(1e-8));
        if o.basis.ncols() == dim {
            return o.basis;
        }
    }
}

/// Sum of the weights of atoms strictly inside the gap, plus the max-entry
/// norm of that sum. Atoms within `1e-12` of an arc endpoint count as
/// outside, matching the open-arc semantics.
pub fn gap_mass<F: Scalar>(m: &AtomicMeasure<F>, g: &GapSet<F>, dim: usize) -> (CMatrix<F>, F) {
    let slack = F::lit(1e-12);
    let mut acc: CMatrix<F> = Array2::zeros((dim, dim));
    for atom in m.atoms() {
        if g.arcs.iter().any(|a| a.contains_with_slack(atom.theta, slack)) {
            acc = acc + &atom.weight;
        }
    }
    let norm = linalg::max_abs(&acc);
    (acc, norm)
}

/// Grid-certified verdict of the gap problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Some regularity margin fell below tolerance: the necessary condition
    /// fails, the gap problem has no solution (conclusive up to the grid).
    NecessaryFailed,
    /// A constant unitary parameter with positive margin was found.
    CandidateFound,
    /// No candidate found; inconclusive, not a proof of emptiness.
    NoCandidateFound,
}

/// The full evidence of a gap-solvability run.
#[derive(Debug, Clone)]
pub struct GapCertificate<F: Scalar> {
    /// Sampled angles in the conjugate set.
    pub grid: Vec<F>,
    /// Per-point regular-type margins.
    pub regularity_margin: Vec<F>,
    /// Per-point forbidden boundary matrices (empty when regularity failed).
    pub w_tilde: Vec<CMatrix<F>>,
    pub candidate: Option<Candidate<F>>,
    pub verdict: Verdict,
}

/// Run the full gap pipeline: regular-type certification, then constant
/// candidate search. Errors with [`Error::Determinate`] when there is no free
/// parameter; the unique solution's gap mass can then be checked directly.
pub fn certify_gap<F: Scalar>(
    model: &IsometryModel<F>,
    g: &GapSet<F>,
    grid_n: usize,
    attempts: usize,
    tol: F,
    seed: u64,
) -> Result<GapCertificate<F>> {
    let report = regular_type_certificate(model, g, grid_n, tol)?;
    if !report.certified {
        return Ok(GapCertificate {
            grid: report.grid,
            regularity_margin: report.margins,
            w_tilde: Vec::new(),
            candidate: None,
            verdict: Verdict::NecessaryFailed,
        });
    }
    let mut wts = Vec::with_capacity(report.grid.len());
    for &theta in &report.grid {
        wts.push(w_tilde(model, Complex::from_polar(F::one(), theta))?);
    }
    let candidate = constant_candidate_search(model, g, grid_n, attempts, tol, seed)?;
    let verdict = if candidate.is_some() {
        Verdict::CandidateFound
    } else {
        Verdict::NoCandidateFound
    };
    Ok(GapCertificate {
        grid: report.grid,
        regularity_margin: report.margins,
        w_tilde: wts,
        candidate,
        verdict,
    })
}
