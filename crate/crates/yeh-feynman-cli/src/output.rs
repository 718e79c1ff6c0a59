//! Report and CSV emission. Bodies contain no timestamps: identical runs
//! produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use yeh_feynman::checks::CheckReport;
use yeh_feynman::feynman::{ConvergenceRow, MCEstimate};
use yeh_feynman::formats::reports_to_json;
use yeh_feynman::sheet::SheetPath;

pub fn report_text(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&r.summary_line());
        out.push('\n');
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    let verdict = if passed == reports.len() { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "SUITE {verdict} ({passed}/{} checks passed)", reports.len());
    out
}

pub fn write_outputs(
    reports: &[CheckReport],
    report_path: Option<&Path>,
    json_path: Option<&Path>,
) -> anyhow::Result<()> {
    if let Some(path) = report_path {
        std::fs::write(path, report_text(reports))
            .with_context(|| format!("writing report {}", path.display()))?;
    }
    if let Some(path) = json_path {
        std::fs::write(path, reports_to_json(reports))
            .with_context(|| format!("writing JSON summary {}", path.display()))?;
    }
    Ok(())
}

/// Node values of a path as `s,t,value` rows.
pub fn path_csv(path: &SheetPath) -> String {
    let grid = path.grid();
    let (ns, nt) = (grid.ns(), grid.nt());
    let nodes = path.node_values();
    let mut out = String::from("s,t,value\n");
    for j in 0..=nt {
        for i in 0..=ns {
            let s = i as f64 * grid.ds();
            let t = j as f64 * grid.dt();
            let _ = writeln!(out, "{s},{t},{}", nodes[j * (ns + 1) + i]);
        }
    }
    out
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("n,mean_re,mean_im,se_re,se_im\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.n, r.mean_re, r.mean_im, r.se_re, r.se_im);
    }
    out
}

/// One-line structured record of an estimate.
pub fn estimate_record(e: &MCEstimate) -> String {
    format!(
        "{{\"mean_re\":{},\"mean_im\":{},\"se_re\":{},\"se_im\":{},\"n\":{},\"seed\":{}}}",
        e.mean.re, e.mean.im, e.se_re, e.se_im, e.n, e.seed
    )
}
