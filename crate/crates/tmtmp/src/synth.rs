//! Test-data synthesis: random atomic measures, their moments, random
//! unitaries, and the built-in demo instance used by the `example21`
//! subcommand.

use crate::linalg::{adjoint, gram_schmidt};
use crate::moment::MomentSequence;
use crate::solver::{Atom, AtomicMeasure};
use crate::{C64, CMatrix64};
use ndarray::{array, Array2};
use rand::Rng;
use std::f64::consts::TAU;

/// Random measure with `atoms` point masses and random PSD matrix weights.
pub fn random_measure<R: Rng>(rng: &mut R, dim: usize, atoms: usize) -> AtomicMeasure<f64> {
    let mut list: Vec<Atom<f64>> = Vec::with_capacity(atoms);
    for _ in 0..atoms {
        let theta = rng.gen_range(0.0..TAU);
        let g = Array2::from_shape_fn((dim, dim), |_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let mut weight = adjoint(&g).dot(&g).mapv(|z| z / (atoms as f64));
        // the matrix product accumulates the two imaginary-part sums
        // separately, leaving ~1e-17 residue where exact cancellation is
        // expected; enforce exact Hermitian symmetry
        for i in 0..dim {
            weight[(i, i)].im = 0.0;
            for j in (i + 1)..dim {
                weight[(j, i)] = weight[(i, j)].conj();
            }
        }
        list.push(Atom { theta, weight });
    }
    list.sort_by(|a, b| a.theta.partial_cmp(&b.theta).unwrap());
    AtomicMeasure::from_atoms(list)
}

/// Forward moments `S_n = sum_m e^{i n theta_m} W_m`, `n = 0..=d`.
pub fn moments_from_measure(
    measure: &AtomicMeasure<f64>,
    dim: usize,
    d: usize,
) -> MomentSequence<f64> {
    let mut s = Vec::with_capacity(d + 1);
    for n in 0..=d {
        let mut acc: CMatrix64 = Array2::zeros((dim, dim));
        for atom in measure.atoms() {
            let phase = C64::from_polar(1.0, n as f64 * atom.theta);
            acc = acc + atom.weight.mapv(|z| z * phase);
        }
        s.push(acc);
    }
    MomentSequence::new(dim, d, s).expect("synthesized moments are well-formed")
}

/// Haar-ish random unitary: orthonormalized complex Gaussian.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix64 {
    if dim == 0 {
        return Array2::zeros((0, 0));
    }
    loop {
        let g = Array2::from_shape_fn((dim, dim), |_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let o = gram_schmidt(&Array2::zeros((dim, 0)), &g, 1e-8);
        if o.basis.ncols() == dim {
            return o.basis;
        }
    }
}

/// Random shape (N, d) within the given bounds.
pub fn random_shape<R: Rng>(rng: &mut R, max_n: usize, max_d: usize) -> (usize, usize) {
    (rng.gen_range(1..=max_n), rng.gen_range(1..=max_d))
}

/// The built-in 3x3, order-1 instance exercised by the `example21`
/// subcommand: rank-deficient Gram matrix, one-dimensional defect.
pub fn demo_moments() -> MomentSequence<f64> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let s0 = array![[l, l, o], [l, l, o], [o, o, l]];
    let s1 = array![[l, l, o], [l, l, o], [o, o, o]];
    MomentSequence::new(3, 1, vec![s0, s1]).expect("demo moments are well-formed")
}
