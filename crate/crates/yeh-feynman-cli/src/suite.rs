//! Check orchestration: builds the shared inputs (kernels, functionals,
//! sampled evaluation paths) from a run configuration, dispatches the named
//! checks, and assembles reports. All numerics live in the library.

use anyhow::{anyhow, bail};
use num_complex::Complex64;
use yeh_feynman::checks::{
    check_fubini, check_mc_consistency, check_relationship_i, check_relationship_ii,
    check_relationship_ii_dual_families, check_relationship_ii_extended,
    check_transform_inverse, check_transform_kernel_composition, check_transform_mixed_composition,
    check_transform_q_composition, mc_report, random_functional, random_kernel,
    sample_check_paths, CheckReport,
};
use yeh_feynman::feynman::{closed_form_real_lambda, yeh_wiener_mc};
use yeh_feynman::presets::preset_kernels;
use yeh_feynman::sheet::SheetPath;
use yeh_feynman::{CylinderFunctional, GridFunction, GridSpec, RngStream};

use crate::config::{resolve_kernels, RunConfig};

/// Canonical check order; `--check` filters this list.
pub const ALL_CHECKS: &[&str] = &[
    "fubini",
    "transform_inverse",
    "transform_q_composition",
    "transform_kernel_composition",
    "transform_mixed_composition",
    "relationship_i",
    "relationship_ii",
    "relationship_ii_extended",
    "relationship_ii_dual_families",
    "mc_consistency",
    "negative_control",
];

// Stream-id layout per seed: functionals, evaluation paths, and each Monte
// Carlo check draw from disjoint bases.
const STREAM_F: u64 = 0xF0;
const STREAM_G: u64 = 0xF1;
const STREAM_PATHS: u64 = 0xA000;
const STREAM_RANDOM_KERNELS: u64 = 0xB000;
const STREAM_MC: u64 = 1 << 32;
const STREAM_MC_CONTROL: u64 = 2 << 32;

/// Default number of sampled evaluation paths (the zero path is added on top).
const N_EVAL_PATHS: u64 = 10;

pub struct SuiteContext {
    pub grid: GridSpec,
    pub seed: u64,
    pub n_samples: u64,
    pub q: f64,
    pub lambda: f64,
    pub kernels: Vec<GridFunction>,
    pub f: CylinderFunctional,
    pub g: CylinderFunctional,
    pub paths: Vec<SheetPath>,
}

impl SuiteContext {
    pub fn build(cfg: &RunConfig) -> anyhow::Result<Self> {
        let grid = cfg.grid;
        let kernels = resolve_kernels(&cfg.kernel_specs, &grid)?;
        let f = cfg
            .functionals
            .first()
            .cloned()
            .unwrap_or_else(|| random_functional(&grid, 4, &RngStream::new(cfg.seed, STREAM_F)));
        let g = cfg
            .functionals
            .get(1)
            .cloned()
            .unwrap_or_else(|| random_functional(&grid, 3, &RngStream::new(cfg.seed, STREAM_G)));
        let paths = sample_check_paths(&grid, N_EVAL_PATHS, &RngStream::new(cfg.seed, STREAM_PATHS));
        Ok(Self {
            grid,
            seed: cfg.seed,
            n_samples: cfg.n_samples,
            q: cfg.q,
            lambda: cfg.lambda,
            kernels,
            f,
            g,
            paths,
        })
    }

    /// Run the named checks (all of them when the filter is empty).
    pub fn run(&self, filter: &[String]) -> anyhow::Result<Vec<CheckReport>> {
        let selected: Vec<&str> = if filter.is_empty() {
            ALL_CHECKS.to_vec()
        } else {
            for name in filter {
                if !ALL_CHECKS.contains(&name.as_str()) {
                    bail!("unknown check '{name}' (expected one of {ALL_CHECKS:?})");
                }
            }
            ALL_CHECKS
                .iter()
                .copied()
                .filter(|name| filter.iter().any(|f| f == name))
                .collect()
        };
        let mut reports = Vec::new();
        for name in selected {
            reports.extend(self.run_check(name)?);
        }
        Ok(reports)
    }

    pub fn run_check(&self, name: &str) -> anyhow::Result<Vec<CheckReport>> {
        match name {
            "fubini" => self.fubini(),
            "transform_inverse" => self.transform_inverse(),
            "transform_q_composition" => self.transform_q_composition(),
            "transform_kernel_composition" => self.transform_kernel_composition(),
            "transform_mixed_composition" => self.transform_mixed_composition(),
            "relationship_i" => self.relationship_i(),
            "relationship_ii" => self.relationship_ii(),
            "relationship_ii_extended" => self.relationship_ii_extended(),
            "relationship_ii_dual_families" => self.relationship_ii_dual_families(),
            "mc_consistency" => self.mc_consistency(),
            "negative_control" => self.negative_control(),
            other => Err(anyhow!("unknown check '{other}'")),
        }
    }

    fn first_kernel(&self) -> &GridFunction {
        &self.kernels[0]
    }

    fn qs(&self) -> [f64; 3] {
        [3.0 * self.q, -6.0 * self.q, 2.0 * self.q]
    }

    fn fubini(&self) -> anyhow::Result<Vec<CheckReport>> {
        let mut out =
            vec![renamed(check_fubini(&self.f, &self.kernels, self.q)?, "fubini[kernels]")];
        let random: Vec<GridFunction> = (0..3)
            .map(|j| random_kernel(&self.grid, &RngStream::new(self.seed, STREAM_RANDOM_KERNELS + j)))
            .collect();
        out.push(renamed(check_fubini(&self.f, &random, self.q)?, "fubini[random]"));
        Ok(out)
    }

    fn transform_inverse(&self) -> anyhow::Result<Vec<CheckReport>> {
        Ok(vec![check_transform_inverse(&self.f, self.first_kernel(), self.q)?])
    }

    fn transform_q_composition(&self) -> anyhow::Result<Vec<CheckReport>> {
        Ok(vec![check_transform_q_composition(
            &self.f,
            self.first_kernel(),
            &self.qs(),
            &self.paths,
        )?])
    }

    fn transform_kernel_composition(&self) -> anyhow::Result<Vec<CheckReport>> {
        Ok(vec![check_transform_kernel_composition(&self.f, &self.kernels, self.q, &self.paths)?])
    }

    fn transform_mixed_composition(&self) -> anyhow::Result<Vec<CheckReport>> {
        let k = self.first_kernel();
        let family1 = vec![k.clone(), k.clone()];
        let family2 = vec![k.scaled(std::f64::consts::SQRT_2)];
        Ok(vec![check_transform_mixed_composition(
            &self.f,
            &family1,
            &family2,
            self.q,
            2.0 * self.q,
            &self.paths,
        )?])
    }

    /// `(h, k1, k2)` triples satisfying `h^2 = k1 k2`: the all-ones case and
    /// the worked preset.
    fn hypothesis_triples(&self) -> anyhow::Result<Vec<(String, GridFunction, GridFunction, GridFunction)>> {
        let one = GridFunction::constant(&self.grid, 1.0);
        let ks = preset_kernels("k1k2-pair", &self.grid)?;
        Ok(vec![
            ("ones".into(), one.clone(), one.clone(), one),
            ("k1k2-pair".into(), ks[2].clone(), ks[0].clone(), ks[1].clone()),
        ])
    }

    fn relationship_i(&self) -> anyhow::Result<Vec<CheckReport>> {
        let mut out = Vec::new();
        for (tag, h, k1, k2) in self.hypothesis_triples()? {
            let r = check_relationship_i(&self.f, &self.g, &h, &k1, &k2, self.q, &self.paths)?;
            out.push(renamed(r, &format!("relationship_i[{tag}]")));
        }
        Ok(out)
    }

    fn relationship_ii(&self) -> anyhow::Result<Vec<CheckReport>> {
        let mut out = Vec::new();
        for (tag, h, k1, k2) in self.hypothesis_triples()? {
            let r = check_relationship_ii(&self.f, &self.g, &h, &k1, &k2, self.q, &self.paths)?;
            out.push(renamed(r, &format!("relationship_ii[{tag}]")));
        }
        Ok(out)
    }

    fn relationship_ii_extended(&self) -> anyhow::Result<Vec<CheckReport>> {
        let mut out = Vec::new();
        // constants with h1^2 + h2^2 = k1 k2
        let family =
            vec![GridFunction::constant(&self.grid, 0.6), GridFunction::constant(&self.grid, 0.8)];
        let k1 = GridFunction::constant(&self.grid, 2.0);
        let k2 = GridFunction::constant(&self.grid, 0.5);
        let r = check_relationship_ii_extended(&self.f, &self.g, &family, &k1, &k2, self.q, &self.paths)?;
        out.push(renamed(r, "relationship_ii_extended[constants]"));

        let ks = preset_kernels("k1k2-pair", &self.grid)?;
        let family = vec![ks[2].clone()];
        let r = check_relationship_ii_extended(
            &self.f,
            &self.g,
            &family,
            &ks[0],
            &ks[1],
            self.q,
            &self.paths,
        )?;
        out.push(renamed(r, "relationship_ii_extended[k1k2-pair]"));
        Ok(out)
    }

    fn relationship_ii_dual_families(&self) -> anyhow::Result<Vec<CheckReport>> {
        let mut out = Vec::new();
        // K1 = K2 = {h}: the hypothesis h^2 = |h| |h| holds for any kernel
        let h = self.first_kernel();
        let family = vec![h.clone()];
        let r = check_relationship_ii_dual_families(
            &self.f,
            &self.g,
            h,
            &family,
            &family,
            self.q,
            &self.paths,
        )?;
        out.push(renamed(r, "relationship_ii_dual_families[shared-kernel]"));

        let family1 = vec![GridFunction::constant(&self.grid, 3.0)];
        let family2 = vec![GridFunction::constant(&self.grid, 4.0 / 3.0)];
        let h = GridFunction::constant(&self.grid, 2.0);
        let r = check_relationship_ii_dual_families(
            &self.f,
            &self.g,
            &h,
            &family1,
            &family2,
            self.q,
            &self.paths,
        )?;
        out.push(renamed(r, "relationship_ii_dual_families[constants]"));
        Ok(out)
    }

    fn mc_consistency(&self) -> anyhow::Result<Vec<CheckReport>> {
        Ok(vec![check_mc_consistency(
            &self.f,
            self.first_kernel(),
            self.lambda,
            self.n_samples,
            &RngStream::new(self.seed, STREAM_MC),
        )?])
    }

    /// Harness self-tests: a healthy suite must *fail* when fed deliberately
    /// corrupted comparisons. Each control passes exactly when its perturbed
    /// check fails.
    fn negative_control(&self) -> anyhow::Result<Vec<CheckReport>> {
        let mut out = Vec::new();
        // unit-modulus functional keeps the perturbed difference at ~1e-6
        let probe = CylinderFunctional::unit_mass(GridFunction::constant(&self.grid, 1.0));

        let fubini = check_fubini(&probe, &self.kernels, self.q)?;
        out.push(control_report("negative_control[fubini]", fubini.with_lhs_phase_perturbation(1e-6)));

        let qcomp = check_transform_q_composition(&probe, self.first_kernel(), &self.qs(), &self.paths)?;
        out.push(control_report(
            "negative_control[transform_q_composition]",
            qcomp.with_lhs_phase_perturbation(1e-6),
        ));

        let one = GridFunction::constant(&self.grid, 1.0);
        let rel = check_relationship_ii(&probe, &probe, &one, &one, &one, self.q, &self.paths)?;
        out.push(control_report(
            "negative_control[relationship_ii]",
            rel.with_lhs_phase_perturbation(1e-6),
        ));

        // Monte Carlo oracle corrupted by ten combined standard errors
        let n = self.n_samples.min(10_000);
        let stream = RngStream::new(self.seed, STREAM_MC_CONTROL);
        let est = yeh_wiener_mc(&self.f, self.first_kernel(), self.lambda, n, &stream)?;
        let oracle = closed_form_real_lambda(&self.f, self.first_kernel(), self.lambda)?;
        let corrupted = oracle + Complex64::new(10.0 * est.se_re.max(1e-12), 0.0);
        out.push(control_report(
            "negative_control[mc_consistency]",
            mc_report("mc_consistency", &est, corrupted),
        ));
        Ok(out)
    }
}

fn renamed(mut report: CheckReport, name: &str) -> CheckReport {
    report.name = name.to_string();
    report
}

/// Invert a perturbed check into a control report: it passes when the
/// perturbed check failed by a clear margin. `max_abs_diff` carries the
/// ratio threshold/observed, so `passed <=> max_abs_diff <= threshold`
/// still holds with threshold 1.
fn control_report(name: &str, perturbed: CheckReport) -> CheckReport {
    let ratio = if perturbed.max_abs_diff > 0.0 {
        perturbed.threshold / perturbed.max_abs_diff
    } else {
        f64::INFINITY
    };
    let mut metadata = perturbed.metadata.clone();
    metadata.push(("perturbed_check".into(), perturbed.name.clone()));
    metadata.push(("perturbed_diff".into(), format!("{:e}", perturbed.max_abs_diff)));
    CheckReport {
        name: name.to_string(),
        mode: perturbed.mode,
        lhs: perturbed.lhs,
        rhs: perturbed.rhs,
        max_abs_diff: ratio,
        threshold: 1.0,
        passed: ratio <= 1.0,
        metadata,
    }
}
