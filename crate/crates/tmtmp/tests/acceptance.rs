//! Acceptance gate: one test per criterion, each printing a single pass/fail
//! line (run with `--nocapture` to see them; a failed criterion panics after
//! printing its fail line).

use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use std::f64::consts::{PI, TAU};
use std::time::Instant;
use tmtmp::gap::{certify_gap, class_check, conjugate_set, gap_mass, szeta_qzeta, w_tilde, Arc,
    GapSet, Verdict};
use tmtmp::linalg;
use tmtmp::model::{build_isometry, build_model_space, IsometryModel};
use tmtmp::moment::ToeplitzGram;
use tmtmp::solver::{atomic_measure, measure_transform, transform_eval, verify_moments,
    SchurParameter};
use tmtmp::{synth, AtomicMeasure64, C64, MomentSequence64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn demo_model() -> IsometryModel<f64> {
    let t = ToeplitzGram::build(&synth::demo_moments());
    build_isometry(&build_model_space(&t, 1e-10).unwrap()).unwrap()
}

struct Criterion {
    name: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Self { name, failures: Vec::new() }
    }

    fn check(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("criterion {}: PASS", self.name);
        } else {
            println!("criterion {}: FAIL ({:?})", self.name, self.failures);
            panic!("criterion {} failed: {:?}", self.name, self.failures);
        }
    }
}

/// The shared random corpus of criteria 4 and 5.
fn corpus_instance(
    seed: u64,
) -> (usize, usize, AtomicMeasure64, MomentSequence64, IsometryModel<f64>, SchurParameter<f64>)
{
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4usize);
    let d = rng.gen_range(1..=4usize);
    let atoms = rng.gen_range(1..=20usize);
    let reference = synth::random_measure(&mut rng, n, atoms);
    let m = synth::moments_from_measure(&reference, n, d);
    let model =
        build_isometry(&build_model_space(&ToeplitzGram::build(&m), 1e-10).unwrap()).unwrap();
    let phi = synth::random_unitary(&mut rng, model.delta());
    (n, d, reference, m, model, SchurParameter::constant(phi))
}

#[test]
fn criterion_1_golden_suite() {
    let mut cr = Criterion::new("1 (golden suite)");
    let start = Instant::now();
    let model = demo_model();
    cr.check("rank", model.space().rank() == 3);
    cr.check("tau", model.tau() == 2);
    cr.check("delta", model.delta() == 1);
    let gap = GapSet::new(vec![Arc::new(0.0, PI).unwrap()]).unwrap();
    let conj = conjugate_set(&gap);
    let rt2 = 2.0f64.sqrt();
    for theta in conj.arcs()[0].grid(16) {
        let zeta = C64::from_polar(1.0, theta);
        let (ms, mq) = szeta_qzeta(&model, zeta).unwrap();
        cr.check("m_s", (ms[(0, 0)] - zeta / rt2).norm() < 1e-10);
        cr.check("m_q", (mq[(0, 0)] - c(1.0 / rt2, 0.0)).norm() < 1e-10);
        let w = w_tilde(&model, zeta).unwrap();
        cr.check("w_tilde", (w[(0, 0)] - zeta.powi(-2)).norm() < 1e-10);
    }
    let elapsed = start.elapsed();
    cr.check("runtime < 1s", elapsed.as_secs_f64() < 1.0);
    cr.finish();
}

#[test]
fn criterion_2_transform_values() {
    let mut cr = Criterion::new("2 (transform reproduction)");
    let model = demo_model();
    let p = SchurParameter::phase(0.0);
    let one = c(1.0, 0.0);
    for zeta in [
        c(0.0, 0.0),
        c(0.3, 0.0),
        c(0.0, 0.5),
        c(-0.4, 0.2),
        C64::from_polar(0.9, 2.0),
    ] {
        let g = transform_eval(&model, &p, zeta).unwrap();
        let a = one / (one - zeta);
        let b = one / (one - zeta * zeta);
        let expect = array![
            [a, a, C64::ZERO],
            [a, a, C64::ZERO],
            [C64::ZERO, C64::ZERO, b]
        ];
        cr.check("matrix value", linalg::max_abs_diff(&g, &expect) < 1e-10);
    }
    // G(0) = S_0 for arbitrary parameters
    let s0 = synth::demo_moments().moment(0).clone();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    for _ in 0..10 {
        let p = SchurParameter::phase(rng.gen_range(0.0..TAU));
        let g = transform_eval(&model, &p, C64::ZERO).unwrap();
        cr.check("G(0) = S_0", linalg::max_abs_diff(&g, &s0) < 1e-12);
    }
    cr.finish();
}

#[test]
fn criterion_3_gap_solvability() {
    let mut cr = Criterion::new("3 (gap solvability)");
    let model = demo_model();
    let gap = GapSet::new(vec![Arc::new(0.0, PI).unwrap()]).unwrap();
    let cert = certify_gap(&model, &gap, 1024, 4096, 1e-6, 0).unwrap();
    cr.check("candidate_found", cert.verdict == Verdict::CandidateFound);
    if let Some(cand) = &cert.candidate {
        let p = SchurParameter::constant(cand.value.clone());
        let measure = atomic_measure(&model, &p).unwrap();
        cr.check("two atoms", measure.atoms().len() == 2);
        let (_, norm) = gap_mass(&measure, &gap, 3);
        cr.check("gap mass < 1e-10", norm < 1e-10);
        let rep = verify_moments(&measure, &synth::demo_moments(), 1e-10);
        cr.check("residuals < 1e-10", rep.pass);
    }
    cr.finish();
}

#[test]
fn criterion_4_oracle_roundtrip() {
    let mut cr = Criterion::new("4 (oracle round-trip)");
    let start = Instant::now();
    for seed in 0..100u64 {
        let (n, _d, _reference, m, model, p) = corpus_instance(seed);
        let measure = atomic_measure(&model, &p).unwrap();
        let rep = verify_moments(&measure, &m, 1e-8);
        cr.check(&format!("seed {seed} residuals"), rep.pass);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let mut dev = 0.0f64;
        for _ in 0..50 {
            let z = C64::from_polar(rng.gen_range(0.0..0.95), rng.gen_range(0.0..TAU));
            let g1 = transform_eval(&model, &p, z).unwrap();
            let g2 = measure_transform(&measure, n, z).unwrap();
            dev = dev.max(linalg::max_abs_diff(&g1, &g2));
        }
        cr.check(&format!("seed {seed} transform agreement"), dev < 1e-9);
    }
    let elapsed = start.elapsed();
    cr.check("runtime < 60s", elapsed.as_secs_f64() < 60.0);
    cr.finish();
}

#[test]
fn criterion_5_invariant_suite() {
    let mut cr = Criterion::new("5 (invariants)");
    for seed in 0..100u64 {
        let (n, _d, _reference, m, model, p) = corpus_instance(seed);
        // isometry of A
        let a = model.a_matrix();
        let dev = linalg::max_abs_diff(&linalg::adjoint(a).dot(a), &linalg::identity(model.tau()));
        cr.check(&format!("seed {seed} isometry"), dev < 1e-10);
        // defect dimensions
        cr.check(
            &format!("seed {seed} defect dims"),
            model.defect0().ncols() == model.defect_inf().ncols(),
        );
        cr.check(&format!("seed {seed} delta bound"), model.delta() <= n);
        // measure invariants
        let measure = atomic_measure(&model, &p).unwrap();
        let mut min_eig = f64::INFINITY;
        let mut total: Array2<C64> = Array2::zeros((n, n));
        for atom in measure.atoms() {
            let eig = linalg::hermitian_eig(&atom.weight);
            min_eig = min_eig.min(eig.values[0]);
            total = total + &atom.weight;
        }
        cr.check(&format!("seed {seed} PSD weights"), min_eig > -1e-10);
        cr.check(
            &format!("seed {seed} mass = S_0"),
            linalg::max_abs_diff(&total, m.moment(0)) < 1e-8,
        );
        // conjugate involution (exact)
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x55);
        let a0 = rng.gen_range(0.0..3.0);
        let g = GapSet::new(vec![Arc::new(a0, a0 + 1.0).unwrap()]).unwrap();
        let back = conjugate_set(&conjugate_set(&g));
        cr.check(&format!("seed {seed} involution"), back == g);
        // Herglotz positivity of the transform
        let s0 = m.moment(0);
        for _ in 0..5 {
            let z = C64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..TAU));
            let gmat = transform_eval(&model, &p, z).unwrap();
            let herm = linalg::hermitian_part(&(gmat.mapv(|v| v * c(2.0, 0.0)) - s0));
            let eig = linalg::hermitian_eig(&herm);
            cr.check(&format!("seed {seed} herglotz"), eig.values[0] > -1e-9);
        }
    }
    cr.finish();
}

#[test]
fn criterion_6_negative_controls() {
    let mut cr = Criterion::new("6 (negative controls)");

    // non-PSD input rejected by the CLI with exit 2
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"N":1,"d":1,"S":[[[[1.0,0.0]]],[[[2.0,0.0]]]]}"#).unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_tmtmp"))
        .args(["check", path.to_str().unwrap()])
        .output()
        .unwrap();
    cr.check("non-PSD exit 2", out.status.code() == Some(2));

    // constant non-unitary parameter rejected by atomic_measure
    let model = demo_model();
    let p = SchurParameter::constant(array![[c(0.5, 0.0)]]);
    cr.check("non-unitary rejected", atomic_measure(&model, &p).is_err());

    // F = 0 fails condition B
    let gap = GapSet::new(vec![Arc::new(0.0, PI).unwrap()]).unwrap();
    let zero = SchurParameter::constant(array![[c(0.0, 0.0)]]);
    let rep = class_check(&model, &gap, &zero, 256, 1e-6).unwrap();
    cr.check("F=0 fails B", !rep.cond_b);

    // conjugate set containing zeta = 1 makes F = 1 fail condition C
    let sym = GapSet::new(vec![
        Arc::new(-PI / 2.0, PI / 2.0).unwrap(),
    ])
    .unwrap();
    let rep = class_check(&model, &sym, &SchurParameter::phase(0.0), 1024, 1e-6).unwrap();
    cr.check("F=1 fails C", !rep.cond_c && rep.cond_c_margin < 1e-6);

    cr.finish();
}
