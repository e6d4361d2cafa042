//! Command-line front end: solvability check, solution synthesis, transform
//! evaluation, gap certification, the built-in regression instance, and a
//! randomized self-test.
//!
//! All output is UTF-8 JSON on standard output unless `--out` is given.

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use ndarray::Array2;
use serde::Serialize;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use tmtmp::gap::{
    certify_gap, conjugate_set, gap_mass, szeta_qzeta, w_tilde, Arc, GapSet, Verdict,
};
use tmtmp::io::{
    matrix_from_json, matrix_to_json, verdict_str, CertificateJson, MatrixJson,
    MeasureJson, MomentsJson, ReportJson,
};
use tmtmp::model::{build_isometry, build_model_space, IsometryModel};
use tmtmp::moment::{psd_check, ToeplitzGram};
use tmtmp::solver::{atomic_measure, transform_eval, verify_moments, SchurParameter};
use tmtmp::{synth, C64, MomentSequence64};

#[derive(Parser)]
#[command(
    name = "tmtmp",
    about = "Truncated matrix trigonometric moment problem solver with open-gap constraints",
    version
)]
struct Cli {
    /// Write the JSON report to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide solvability: positive semidefiniteness of the block-Toeplitz
    /// matrix, plus the model dimensions. Exit 0 solvable, 2 not, 1 on input
    /// error.
    Check {
        /// Moments JSON file: {"N", "d", "S": [matrix, ...]}.
        input: PathBuf,
        /// Relative tolerance for the semidefiniteness and rank decisions.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Synthesize the atomic solution selected by a constant unitary
    /// parameter and verify its moments. Exit 2 if residuals exceed the
    /// tolerance.
    Solve {
        input: PathBuf,
        /// Scalar parameter e^{i phase} (defect dimension 1).
        #[arg(long, conflicts_with = "unitary")]
        phase: Option<f64>,
        /// JSON file holding a unitary matrix of the defect dimension.
        #[arg(long)]
        unitary: Option<PathBuf>,
        /// Residual tolerance for moment verification.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Evaluate the solution transform G(zeta) at the given points.
    /// Indexing convention: G[k][j] is the transform of the (k, j) scalar
    /// measure, i.e. ((E - zeta U)^{-1} x_k, x_j).
    Transform {
        input: PathBuf,
        /// Points inside the unit disk, "re,im" pairs separated by
        /// semicolons, e.g. "0.3,0;0,0.5".
        #[arg(long)]
        zeta: String,
        #[arg(long, conflicts_with = "unitary")]
        phase: Option<f64>,
        #[arg(long)]
        unitary: Option<PathBuf>,
    },
    /// Certify gap solvability: regular-type margins on the conjugate set,
    /// then a constant-candidate search. Exit 0 = candidate_found,
    /// 3 = necessary_failed, 4 = no_candidate_found, 2 = moment problem
    /// itself unsolvable, 1 = input error.
    GapCheck {
        input: PathBuf,
        /// Open arcs "start,end" in radians, separated by semicolons,
        /// e.g. "0,3.14159;4,5".
        #[arg(long)]
        gap: String,
        /// Grid points per arc for the boundary certificates.
        #[arg(long, default_value_t = 1024)]
        grid_n: usize,
        /// Candidate search effort (phase grid size or random unitaries).
        #[arg(long, default_value_t = 4096)]
        attempts: usize,
        /// Margin tolerance for all grid certificates.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Acceptable gap mass (max-entry norm) for the solved measure.
        #[arg(long, default_value_t = 1e-8)]
        mass_tol: f64,
        /// Seed for the randomized part of the candidate search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the built-in 3x3, order-1 regression instance and assert its known
    /// exact values; fails loudly on any mismatch.
    Example21,
    /// Differential self-test: random measure -> moments -> model -> random
    /// unitary parameter -> measure, checking moment reproduction and
    /// transform agreement. Exit 0 iff all residuals are below 1e-8.
    OracleRoundtrip {
        #[arg(long, default_value_t = 10)]
        atoms: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn load_moments(path: &PathBuf) -> anyhow::Result<MomentSequence64> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let j: MomentsJson = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(j.to_core()?)
}

fn build_model(m: &MomentSequence64, tol: f64) -> anyhow::Result<IsometryModel<f64>> {
    let t = ToeplitzGram::build(m);
    let space = build_model_space(&t, tol)?;
    Ok(build_isometry(&space)?)
}

fn parse_parameter(
    model: &IsometryModel<f64>,
    phase: &Option<f64>,
    unitary: &Option<PathBuf>,
) -> anyhow::Result<SchurParameter<f64>> {
    let delta = model.delta();
    if delta == 0 {
        if phase.is_some() || unitary.is_some() {
            eprintln!(
                "warning: the problem is determinate; the parameter is ignored"
            );
        }
        return Ok(SchurParameter::constant(Array2::zeros((0, 0))));
    }
    match (phase, unitary) {
        (Some(phi), None) => {
            if delta != 1 {
                bail!("--phase requires defect dimension 1, but delta = {delta}");
            }
            Ok(SchurParameter::phase(*phi))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let j: MatrixJson = serde_json::from_str(&text)?;
            let u = matrix_from_json(&j)?;
            if u.dim() != (delta, delta) {
                bail!(
                    "parameter matrix is {:?}, but the defect dimension is {delta}",
                    u.dim()
                );
            }
            let p = SchurParameter::constant(u);
            if let Some(dev) = p.unitary_defect() {
                if dev > 1e-10 {
                    bail!("parameter matrix is not unitary (deviation {dev:.3e})");
                }
            }
            Ok(p)
        }
        _ => bail!("exactly one of --phase or --unitary is required (delta = {delta})"),
    }
}

fn parse_zetas(s: &str) -> anyhow::Result<Vec<C64>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').collect();
            if parts.len() != 2 {
                bail!("bad zeta {pair:?}: expected \"re,im\"");
            }
            let re: f64 = parts[0].trim().parse()?;
            let im: f64 = parts[1].trim().parse()?;
            Ok(C64::new(re, im))
        })
        .collect()
}

fn parse_gap(s: &str) -> anyhow::Result<GapSet<f64>> {
    let arcs = s
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').collect();
            if parts.len() != 2 {
                bail!("bad arc {pair:?}: expected \"start,end\" in radians");
            }
            let start: f64 = parts[0].trim().parse()?;
            let end: f64 = parts[1].trim().parse()?;
            Ok(Arc::new(start, end)?)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(GapSet::new(arcs)?)
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Check { input, tol } => cmd_check(cli, input, *tol),
        Command::Solve { input, phase, unitary, tol } => {
            cmd_solve(cli, input, phase, unitary, *tol)
        }
        Command::Transform { input, zeta, phase, unitary } => {
            cmd_transform(cli, input, zeta, phase, unitary)
        }
        Command::GapCheck {
            input,
            gap,
            grid_n,
            attempts,
            tol,
            mass_tol,
            seed,
        } => cmd_gap_check(cli, input, gap, *grid_n, *attempts, *tol, *mass_tol, *seed),
        Command::Example21 => cmd_example21(cli),
        Command::OracleRoundtrip { atoms, dim, order, seed } => {
            cmd_oracle_roundtrip(cli, *atoms, *dim, *order, *seed)
        }
    }
}

fn cmd_check(cli: &Cli, input: &PathBuf, tol: f64) -> anyhow::Result<ExitCode> {
    if tol <= 0.0 {
        bail!("tolerance must be positive");
    }
    let m = load_moments(input)?;
    let t = ToeplitzGram::build(&m);
    let rep = psd_check(&t, tol)?;
    if !rep.solvable {
        emit(
            &cli.out,
            &json!({
                "solvable": false,
                "min_eigenvalue": rep.min_eigenvalue,
                "rank": rep.rank,
                "tau": null,
                "delta": null,
                "indeterminate": null,
            }),
        )?;
        return Ok(ExitCode::from(2));
    }
    let model = build_model(&m, tol)?;
    emit(
        &cli.out,
        &json!({
            "solvable": true,
            "min_eigenvalue": rep.min_eigenvalue,
            "rank": model.space().rank(),
            "tau": model.tau(),
            "delta": model.delta(),
            "indeterminate": model.delta() >= 1,
        }),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(
    cli: &Cli,
    input: &PathBuf,
    phase: &Option<f64>,
    unitary: &Option<PathBuf>,
    tol: f64,
) -> anyhow::Result<ExitCode> {
    if tol <= 0.0 {
        bail!("tolerance must be positive");
    }
    let m = load_moments(input)?;
    let model = build_model(&m, 1e-10)?;
    let p = parse_parameter(&model, phase, unitary)?;
    let measure = atomic_measure(&model, &p)?;
    let report = verify_moments(&measure, &m, tol);
    let pass = report.pass;
    emit(
        &cli.out,
        &json!({
            "measure": MeasureJson::from_core(&measure),
            "report": ReportJson::from_core(&report),
        }),
    )?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_transform(
    cli: &Cli,
    input: &PathBuf,
    zeta: &str,
    phase: &Option<f64>,
    unitary: &Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    let m = load_moments(input)?;
    let model = build_model(&m, 1e-10)?;
    let p = parse_parameter(&model, phase, unitary)?;
    let zetas = parse_zetas(zeta)?;
    let mut values = Vec::with_capacity(zetas.len());
    for z in &zetas {
        let g = transform_eval(&model, &p, *z)?;
        values.push(json!({
            "zeta": [z.re, z.im],
            "g": matrix_to_json(&g),
        }));
    }
    emit(
        &cli.out,
        &json!({
            "convention": "g[k][j] = ((E - zeta U)^{-1} x_k, x_j): entry (k, j) transforms the scalar measure m_{k,j}",
            "values": values,
        }),
    )?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gap_check(
    cli: &Cli,
    input: &PathBuf,
    gap: &str,
    grid_n: usize,
    attempts: usize,
    tol: f64,
    mass_tol: f64,
    seed: u64,
) -> anyhow::Result<ExitCode> {
    if grid_n < 16 {
        bail!("grid size must be at least 16");
    }
    if tol <= 0.0 || mass_tol <= 0.0 {
        bail!("tolerances must be positive");
    }
    let m = load_moments(input)?;
    let g = parse_gap(gap)?;
    let t = ToeplitzGram::build(&m);
    let psd = psd_check(&t, 1e-10)?;
    if !psd.solvable {
        emit(
            &cli.out,
            &json!({"solvable": false, "min_eigenvalue": psd.min_eigenvalue}),
        )?;
        return Ok(ExitCode::from(2));
    }
    let model = build_model(&m, 1e-10)?;

    if model.delta() == 0 {
        // determinate: the unique solution either respects the gap or not
        let measure = atomic_measure(
            &model,
            &SchurParameter::constant(Array2::zeros((0, 0))),
        )?;
        let (mass, norm) = gap_mass(&measure, &g, m.matrix_size());
        let ok = norm <= mass_tol;
        emit(
            &cli.out,
            &json!({
                "determinate": true,
                "verdict": if ok { "candidate_found" } else { "necessary_failed" },
                "gap_mass": matrix_to_json(&mass),
                "gap_mass_norm": norm,
                "measure": MeasureJson::from_core(&measure),
            }),
        )?;
        return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(3) });
    }

    let cert = certify_gap(&model, &g, grid_n, attempts, tol, seed)?;
    let mut report = serde_json::to_value(CertificateJson::from_core(&cert))?;
    let code = match cert.verdict {
        Verdict::NecessaryFailed => ExitCode::from(3),
        Verdict::NoCandidateFound => ExitCode::from(4),
        Verdict::CandidateFound => {
            let cand = cert.candidate.as_ref().expect("candidate present");
            let p = SchurParameter::constant(cand.value.clone());
            let measure = atomic_measure(&model, &p)?;
            let residuals = verify_moments(&measure, &m, 1e-8);
            let (mass, norm) = gap_mass(&measure, &g, m.matrix_size());
            let obj = report
                .as_object_mut()
                .ok_or_else(|| anyhow!("certificate serialization is not an object"))?;
            obj.insert("measure".into(), serde_json::to_value(MeasureJson::from_core(&measure))?);
            obj.insert("residual_report".into(), serde_json::to_value(ReportJson::from_core(&residuals))?);
            obj.insert("gap_mass".into(), serde_json::to_value(matrix_to_json(&mass))?);
            obj.insert("gap_mass_norm".into(), serde_json::to_value(norm)?);
            ExitCode::SUCCESS
        }
    };
    emit(&cli.out, &report)?;
    Ok(code)
}

fn cmd_example21(cli: &Cli) -> anyhow::Result<ExitCode> {
    let m = synth::demo_moments();
    let t = ToeplitzGram::build(&m);
    let psd = psd_check(&t, 1e-10)?;
    let model = build_model(&m, 1e-10)?;

    let mut failures: Vec<String> = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };

    check("psd", psd.solvable);
    check("rank", model.space().rank() == 3);
    check("tau", model.tau() == 2);
    check("delta", model.delta() == 1);

    // boundary matrices on 16 points of the conjugate arc
    let gap = GapSet::new(vec![Arc::new(0.0, std::f64::consts::PI)?])?;
    let conj = conjugate_set(&gap);
    let rt2 = 2.0f64.sqrt();
    for theta in conj.arcs()[0].grid(16) {
        let zeta = C64::from_polar(1.0, theta);
        let (ms, mq) = szeta_qzeta(&model, zeta)?;
        check("m_s", (ms[(0, 0)] - zeta / rt2).norm() < 1e-10);
        check("m_q", (mq[(0, 0)] - C64::new(1.0 / rt2, 0.0)).norm() < 1e-10);
        let w = w_tilde(&model, zeta)?;
        check("w_tilde", (w[(0, 0)] - zeta.powi(-2)).norm() < 1e-10);
    }

    // transform values of the unit-parameter solution at 8 sample points
    let p = SchurParameter::phase(0.0);
    let samples = [
        C64::new(0.0, 0.0),
        C64::new(0.3, 0.0),
        C64::new(0.0, 0.5),
        C64::new(-0.4, 0.2),
        C64::from_polar(0.9, 2.0),
        C64::new(0.5, 0.0),
        C64::new(-0.7, -0.1),
        C64::from_polar(0.8, 5.5),
    ];
    let one = C64::new(1.0, 0.0);
    for z in samples {
        let g = transform_eval(&model, &p, z)?;
        let a = one / (one - z);
        let b = one / (one - z * z);
        let mut ok = true;
        for k in 0..3 {
            for j in 0..3 {
                let expect = match (k, j) {
                    (0, 0) | (0, 1) | (1, 0) | (1, 1) => a,
                    (2, 2) => b,
                    _ => C64::new(0.0, 0.0),
                };
                ok &= (g[(k, j)] - expect).norm() < 1e-10;
            }
        }
        check("transform", ok);
    }

    // gap solvability of the open upper half circle
    let cert = certify_gap(&model, &gap, 1024, 4096, 1e-6, 0)?;
    check("gap_verdict", cert.verdict == Verdict::CandidateFound);
    if let Some(cand) = &cert.candidate {
        let sol = atomic_measure(&model, &SchurParameter::constant(cand.value.clone()))?;
        let (_, norm) = gap_mass(&sol, &gap, 3);
        check("gap_mass", norm < 1e-10);
    }

    let pass = failures.is_empty();
    emit(
        &cli.out,
        &json!({
            "pass": pass,
            "failures": failures,
            "rank": model.space().rank(),
            "tau": model.tau(),
            "delta": model.delta(),
            "gap_verdict": verdict_str(cert.verdict),
        }),
    )?;
    if pass {
        Ok(ExitCode::SUCCESS)
    } else {
        bail!("regression mismatches: {failures:?}");
    }
}

fn cmd_oracle_roundtrip(
    cli: &Cli,
    atoms: usize,
    dim: usize,
    order: usize,
    seed: u64,
) -> anyhow::Result<ExitCode> {
    use rand::{Rng, SeedableRng};
    if atoms * dim == 0 {
        bail!("--atoms and --dim must be positive");
    }
    if order == 0 {
        bail!("--order must be at least 1");
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let reference = synth::random_measure(&mut rng, dim, atoms);
    let m = synth::moments_from_measure(&reference, dim, order);
    let model = build_model(&m, 1e-10)?;
    let phi = synth::random_unitary(&mut rng, model.delta());
    let p = SchurParameter::constant(phi);
    let measure = atomic_measure(&model, &p)?;
    let report = verify_moments(&measure, &m, 1e-8);

    let mut transform_dev = 0.0f64;
    for _ in 0..50 {
        let z = C64::from_polar(
            rng.gen_range(0.0..0.95),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let g1 = transform_eval(&model, &p, z)?;
        let g2 = tmtmp::solver::measure_transform(&measure, dim, z)?;
        transform_dev = transform_dev.max(tmtmp::linalg::max_abs_diff(&g1, &g2));
    }
    let pass = report.pass && transform_dev < 1e-9;
    emit(
        &cli.out,
        &json!({
            "pass": pass,
            "moment_report": ReportJson::from_core(&report),
            "transform_deviation": transform_dev,
            "atoms_recovered": measure.atoms().len(),
            "delta": model.delta(),
        }),
    )?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}
