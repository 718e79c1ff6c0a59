//! On-disk document formats: functionals as JSON atom lists, check reports
//! and Monte Carlo estimates as machine-readable records. The CLI only moves
//! these to and from files.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::CylinderFunctional;
use crate::checks::CheckReport;
use crate::error::{Error, Result};
use crate::expr::KernelExpr;
use crate::feynman::MCEstimate;
use crate::grid::{GridFunction, GridSpec};

/// Atom profile: either an expression in `s`, `t` or inline midpoint values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomProfile {
    Expr(String),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomDoc {
    pub weight_re: f64,
    pub weight_im: f64,
    pub atom: AtomProfile,
}

/// A serialized cylinder functional: a list of weighted atoms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalDoc {
    pub atoms: Vec<AtomDoc>,
}

impl FunctionalDoc {
    pub fn from_functional(f: &CylinderFunctional) -> Self {
        let atoms = f
            .measure()
            .atoms()
            .iter()
            .map(|a| AtomDoc {
                weight_re: a.weight.re,
                weight_im: a.weight.im,
                atom: AtomProfile::Values(a.atom.values().to_vec()),
            })
            .collect();
        Self { atoms }
    }

    pub fn to_functional(&self, grid: &GridSpec) -> Result<CylinderFunctional> {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let profile = match &a.atom {
                AtomProfile::Expr(src) => KernelExpr::parse(src)?.sample(grid)?,
                AtomProfile::Values(values) => GridFunction::from_values(grid, values.clone())?,
            };
            atoms.push((Complex64::new(a.weight_re, a.weight_im), profile));
        }
        CylinderFunctional::from_atoms(grid, atoms)
    }
}

pub fn functional_to_json(f: &CylinderFunctional) -> String {
    serde_json::to_string_pretty(&FunctionalDoc::from_functional(f))
        .expect("functional doc serializes")
}

pub fn functional_from_json(text: &str, grid: &GridSpec) -> Result<CylinderFunctional> {
    let doc: FunctionalDoc = serde_json::from_str(text)
        .map_err(|e| Error::InvalidArgument(format!("bad functional document: {e}")))?;
    doc.to_functional(grid)
}

/// Machine-readable form of a [`CheckReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDoc {
    pub name: String,
    pub mode: String,
    pub lhs: Vec<[f64; 2]>,
    pub rhs: Vec<[f64; 2]>,
    pub max_abs_diff: f64,
    pub threshold: f64,
    pub passed: bool,
    pub metadata: Vec<(String, String)>,
}

impl From<&CheckReport> for ReportDoc {
    fn from(r: &CheckReport) -> Self {
        let flat = |v: &[Complex64]| v.iter().map(|z| [z.re, z.im]).collect();
        Self {
            name: r.name.clone(),
            mode: r.mode.as_str().to_string(),
            lhs: flat(&r.lhs),
            rhs: flat(&r.rhs),
            max_abs_diff: r.max_abs_diff,
            threshold: r.threshold,
            passed: r.passed,
            metadata: r.metadata.clone(),
        }
    }
}

pub fn reports_to_json(reports: &[CheckReport]) -> String {
    let docs: Vec<ReportDoc> = reports.iter().map(ReportDoc::from).collect();
    serde_json::to_string_pretty(&docs).expect("report docs serialize")
}

/// Flat record of a Monte Carlo estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateDoc {
    pub mean_re: f64,
    pub mean_im: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub n: u64,
    pub seed: u64,
}

impl From<&MCEstimate> for EstimateDoc {
    fn from(e: &MCEstimate) -> Self {
        Self {
            mean_re: e.mean.re,
            mean_im: e.mean.im,
            se_re: e.se_re,
            se_im: e.se_im,
            n: e.n,
            seed: e.seed,
        }
    }
}
