//! JSON schemas for the command-line interface (double precision only).
//! Complex numbers are `[re, im]` pairs; matrices are row-major nested lists.

use crate::error::{Error, Result};
use crate::gap::{Arc, Candidate, GapCertificate, GapSet, Verdict};
use crate::solver::{Atom, ResidualReport};
use crate::{AtomicMeasure64, C64, CMatrix64, MomentSequence64};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub type CplxJson = [f64; 2];
pub type MatrixJson = Vec<Vec<CplxJson>>;

pub fn matrix_to_json(m: &CMatrix64) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(v: &MatrixJson) -> Result<CMatrix64> {
    let rows = v.len();
    let cols = v.first().map_or(0, Vec::len);
    if v.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    Ok(Array2::from_shape_fn((rows, cols), |(i, j)| {
        C64::new(v[i][j][0], v[i][j][1])
    }))
}

/// `{"N": .., "d": .., "S": [matrix, ...]}` with `d + 1` matrices `S_0..S_d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentsJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    #[serde(rename = "S")]
    pub s: Vec<MatrixJson>,
}

impl MomentsJson {
    pub fn from_core(m: &MomentSequence64) -> Self {
        Self {
            n: m.matrix_size(),
            d: m.order(),
            s: (0..=m.order()).map(|k| matrix_to_json(m.moment(k))).collect(),
        }
    }

    pub fn to_core(&self) -> Result<MomentSequence64> {
        let mats = self
            .s
            .iter()
            .map(matrix_from_json)
            .collect::<Result<Vec<_>>>()?;
        MomentSequence64::new(self.n, self.d, mats)
    }
}

/// `{"atoms": [{"theta": .., "weight": matrix}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureJson {
    pub atoms: Vec<AtomJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomJson {
    pub theta: f64,
    pub weight: MatrixJson,
}

impl MeasureJson {
    pub fn from_core(m: &AtomicMeasure64) -> Self {
        Self {
            atoms: m
                .atoms()
                .iter()
                .map(|a| AtomJson {
                    theta: a.theta,
                    weight: matrix_to_json(&a.weight),
                })
                .collect(),
        }
    }

    pub fn to_core(&self) -> Result<AtomicMeasure64> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                Ok(Atom {
                    theta: a.theta,
                    weight: matrix_from_json(&a.weight)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AtomicMeasure64::from_atoms(atoms))
    }
}

/// `{"residuals": [..], "pass": .., "tol": ..}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportJson {
    pub residuals: Vec<f64>,
    pub pass: bool,
    pub tol: f64,
}

impl ReportJson {
    pub fn from_core(r: &ResidualReport<f64>) -> Self {
        Self {
            residuals: r.residuals.clone(),
            pass: r.pass,
            tol: r.tol,
        }
    }
}

/// `{"arcs": [{"start": .., "end": ..}, ...]}` (radians, counterclockwise,
/// open arcs).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapJson {
    pub arcs: Vec<ArcJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArcJson {
    pub start: f64,
    pub end: f64,
}

impl GapJson {
    pub fn from_core(g: &GapSet<f64>) -> Self {
        Self {
            arcs: g
                .arcs()
                .iter()
                .map(|a| ArcJson { start: a.start(), end: a.end() })
                .collect(),
        }
    }

    pub fn to_core(&self) -> Result<GapSet<f64>> {
        let arcs = self
            .arcs
            .iter()
            .map(|a| Arc::new(a.start, a.end))
            .collect::<Result<Vec<_>>>()?;
        GapSet::new(arcs)
    }
}

/// Mirrors [`GapCertificate`]; the verdict is a snake_case string.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    pub grid: Vec<f64>,
    pub regularity_margin: Vec<f64>,
    pub w_tilde: Vec<MatrixJson>,
    pub candidate: Option<CandidateJson>,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateJson {
    pub value: MatrixJson,
    pub margin: f64,
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::NecessaryFailed => "necessary_failed",
        Verdict::CandidateFound => "candidate_found",
        Verdict::NoCandidateFound => "no_candidate_found",
    }
}

impl CertificateJson {
    pub fn from_core(c: &GapCertificate<f64>) -> Self {
        Self {
            grid: c.grid.clone(),
            regularity_margin: c.regularity_margin.clone(),
            w_tilde: c.w_tilde.iter().map(matrix_to_json).collect(),
            candidate: c.candidate.as_ref().map(|cand: &Candidate<f64>| CandidateJson {
                value: matrix_to_json(&cand.value),
                margin: cand.margin,
            }),
            verdict: verdict_str(c.verdict).to_string(),
        }
    }
}
