//! Executable identity checks: each transform/convolution theorem becomes a
//! function producing a structured pass/fail report.
//!
//! Exact-mode checks compare finite sums of phase-weighted exponentials at a
//! handful of sampled paths (plus the zero path); agreement there is an
//! algebraic identity of the discrete measures, not a statistical statement.
//! Statistical checks compare a Monte Carlo estimate against its closed form
//! in units of combined standard errors.
//!
//! Checks validate their kernel hypotheses (`h^2 = k1 k2` and friends) on the
//! grid first and refuse to run when a hypothesis fails, so a red report
//! always means a broken identity, never a meaningless comparison.

use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{gcp, gfyft, gfyft_composed, scaled_product, CylinderFunctional};
use crate::error::{Error, Result};
use crate::feynman::{
    alpha_n, closed_form_real_lambda, feynman_closed_form, iterated_closed_form, yeh_wiener_mc,
    MCEstimate,
};
use crate::grid::{combine_kernels, GridFunction, GridSpec};
use crate::sheet::{sample_sheet, RngStream, SheetPath};

const SQRT_2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Tolerance for exact-mode checks that compare evaluated functionals.
/// Looser than machine epsilon to absorb phase-product rounding over a few
/// hundred atoms.
pub const EXACT_EVAL_THRESHOLD: f64 = 1e-10;
/// Tolerance for the closed-form Fubini comparison.
pub const FUBINI_THRESHOLD: f64 = 1e-12;
/// Tolerance for the measure-level inverse-transform identity.
pub const INVERSE_THRESHOLD: f64 = 1e-14;
/// Grid tolerance for kernel hypotheses such as `h^2 = k1 k2`.
pub const HYPOTHESIS_TOL: f64 = 1e-10;
/// Statistical checks pass within this many combined standard errors.
pub const STATISTICAL_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exact,
    Statistical,
}

impl CheckMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckMode::Exact => "exact",
            CheckMode::Statistical => "statistical",
        }
    }
}

/// Outcome of one identity check. `passed` holds exactly when
/// `max_abs_diff <= threshold`; for statistical checks the "difference" is
/// measured in combined standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub mode: CheckMode,
    pub lhs: Vec<Complex64>,
    pub rhs: Vec<Complex64>,
    pub max_abs_diff: f64,
    pub threshold: f64,
    pub passed: bool,
    pub metadata: Vec<(String, String)>,
}

impl CheckReport {
    fn exact(
        name: &str,
        lhs: Vec<Complex64>,
        rhs: Vec<Complex64>,
        threshold: f64,
        metadata: Vec<(String, String)>,
    ) -> Self {
        assert_eq!(lhs.len(), rhs.len());
        let max_abs_diff = lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Self {
            name: name.to_string(),
            mode: CheckMode::Exact,
            passed: max_abs_diff <= threshold,
            lhs,
            rhs,
            max_abs_diff,
            threshold,
            metadata,
        }
    }

    /// Exact comparison of a chain of forms which should all agree: the
    /// difference is maximized over adjacent pairs, the report keeps the two
    /// end forms.
    fn exact_chain(
        name: &str,
        forms: Vec<Vec<Complex64>>,
        threshold: f64,
        mut metadata: Vec<(String, String)>,
    ) -> Self {
        assert!(forms.len() >= 2);
        let mut max_abs_diff = 0.0f64;
        for w in forms.windows(2) {
            for (a, b) in w[0].iter().zip(&w[1]) {
                max_abs_diff = max_abs_diff.max((a - b).norm());
            }
        }
        metadata.push(("chain_forms".into(), forms.len().to_string()));
        let lhs = forms.first().unwrap().clone();
        let rhs = forms.last().unwrap().clone();
        Self {
            name: name.to_string(),
            mode: CheckMode::Exact,
            passed: max_abs_diff <= threshold,
            lhs,
            rhs,
            max_abs_diff,
            threshold,
            metadata,
        }
    }

    /// One line of the report file, e.g.
    /// `PASS fubini  mode=exact  max_abs_diff=1.2e-15  threshold=1.0e-12`.
    pub fn summary_line(&self) -> String {
        format!(
            "{} {:<34} mode={:<12} max_abs_diff={:.6e} threshold={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.mode.as_str(),
            self.max_abs_diff,
            self.threshold
        )
    }

    /// Negative-control helper: rotate every left-hand value by `exp(i eps)`,
    /// the grid-level effect of nudging each phase exponent by `eps`, and
    /// re-judge. A healthy exact check must flip to FAIL for eps well above
    /// its threshold.
    pub fn with_lhs_phase_perturbation(&self, eps: f64) -> CheckReport {
        let rot = Complex64::cis(eps);
        let lhs: Vec<Complex64> = self.lhs.iter().map(|z| z * rot).collect();
        let max_abs_diff = lhs
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        CheckReport {
            name: format!("{}[lhs phase +{eps:e}]", self.name),
            mode: self.mode,
            passed: max_abs_diff <= self.threshold,
            lhs,
            rhs: self.rhs.clone(),
            max_abs_diff,
            threshold: self.threshold,
            metadata: self.metadata.clone(),
        }
    }
}

/// Compare a Monte Carlo estimate against a reference value in units of
/// combined standard errors. Public so negative controls can feed a
/// deliberately corrupted reference through the same judgement.
pub fn mc_report(name: &str, estimate: &MCEstimate, reference: Complex64) -> CheckReport {
    let distance = estimate.sigma_distance(reference, (0.0, 0.0));
    CheckReport {
        name: name.to_string(),
        mode: CheckMode::Statistical,
        passed: distance <= STATISTICAL_SIGMAS,
        lhs: vec![estimate.mean],
        rhs: vec![reference],
        max_abs_diff: distance,
        threshold: STATISTICAL_SIGMAS,
        metadata: vec![
            ("se_re".into(), format!("{:e}", estimate.se_re)),
            ("se_im".into(), format!("{:e}", estimate.se_im)),
            ("n".into(), estimate.n.to_string()),
            ("seed".into(), estimate.seed.to_string()),
        ],
    }
}

fn require_cellwise_equal(
    lhs: &GridFunction,
    rhs: &GridFunction,
    what: &str,
) -> Result<()> {
    lhs.grid().check_same(rhs.grid(), what)?;
    let max_dev = lhs
        .values()
        .iter()
        .zip(rhs.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if max_dev > HYPOTHESIS_TOL {
        return Err(Error::HypothesisViolated(format!(
            "{what}: max cellwise deviation {max_dev:e} exceeds {HYPOTHESIS_TOL:e}"
        )));
    }
    Ok(())
}

fn evaluate_at(f: &CylinderFunctional, ys: &[SheetPath]) -> Result<Vec<Complex64>> {
    ys.iter().map(|y| f.evaluate(y)).collect()
}

fn meta_common(f: &CylinderFunctional, q: f64, ys: usize) -> Vec<(String, String)> {
    vec![
        ("atoms_f".into(), f.measure().atoms().len().to_string()),
        ("q".into(), format!("{q}")),
        ("paths".into(), ys.to_string()),
    ]
}

/// The zero path followed by `count` sampled Brownian sheets: the standard
/// evaluation set realizing "scale-invariant a.e." on the grid.
pub fn sample_check_paths(grid: &GridSpec, count: u64, stream: &RngStream) -> Vec<SheetPath> {
    let mut ys = Vec::with_capacity(count as usize + 1);
    ys.push(SheetPath::zero(grid));
    for i in 0..count {
        ys.push(sample_sheet(grid, &stream.offset(i)));
    }
    ys
}

/// A random kernel bounded away from zero: uniform magnitude in
/// `[0.25, 1.25]` with random sign per cell.
pub fn random_kernel(grid: &GridSpec, stream: &RngStream) -> GridFunction {
    let mut rng = stream.rng();
    let values = (0..grid.n_cells())
        .map(|_| {
            let mag = rng.random_range(0.25..1.25);
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    GridFunction::from_values(grid, values).expect("finite by construction")
}

/// A random cylinder functional with `1..=max_atoms` atoms, weights in the
/// unit disk, atom profiles uniform in `[-1, 1]` per cell.
pub fn random_functional(
    grid: &GridSpec,
    max_atoms: usize,
    stream: &RngStream,
) -> CylinderFunctional {
    let mut rng = stream.rng();
    let n_atoms = rng.random_range(1..=max_atoms.max(1));
    let atoms = (0..n_atoms)
        .map(|_| {
            let r: f64 = rng.random_range(0.0..1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let weight = r * Complex64::cis(phi);
            let values: Vec<f64> =
                (0..grid.n_cells()).map(|_| rng.random_range(-1.0..1.0)).collect();
            (weight, GridFunction::from_values(grid, values).expect("finite"))
        })
        .collect();
    CylinderFunctional::from_atoms(grid, atoms).expect("same grid by construction")
}

/// Fubini reduction: the iterated closed form over the kernel list equals the
/// single closed form under the combined kernel `s(H)`.
pub fn check_fubini(
    f: &CylinderFunctional,
    kernels: &[GridFunction],
    q: f64,
) -> Result<CheckReport> {
    let iterated = iterated_closed_form(f, kernels, q)?;
    let combined = combine_kernels(kernels)?;
    let single = feynman_closed_form(f, &combined, q)?;
    let mut meta = meta_common(f, q, 0);
    meta.push(("kernels".into(), kernels.len().to_string()));
    Ok(CheckReport::exact("fubini", vec![iterated], vec![single], FUBINI_THRESHOLD, meta))
}

/// Measure-level inverse identity: the weights of `T_{-q,h}(T_{q,h}(F))`
/// equal those of `F` (phases cancel exactly).
pub fn check_transform_inverse(
    f: &CylinderFunctional,
    h: &GridFunction,
    q: f64,
) -> Result<CheckReport> {
    let round_trip = gfyft(&gfyft(f, h, q)?, h, -q)?;
    let lhs: Vec<Complex64> = round_trip.measure().weights().collect();
    let rhs: Vec<Complex64> = f.measure().weights().collect();
    Ok(CheckReport::exact(
        "transform_inverse",
        lhs,
        rhs,
        INVERSE_THRESHOLD,
        meta_common(f, q, 0),
    ))
}

/// Composing transforms with one kernel over the parameters `q_1..q_n`
/// collapses to the single transform at `alpha_n`.
pub fn check_transform_q_composition(
    f: &CylinderFunctional,
    h: &GridFunction,
    qs: &[f64],
    ys: &[SheetPath],
) -> Result<CheckReport> {
    let alpha = alpha_n(qs)?;
    let mut composed = f.clone();
    for &q in qs {
        composed = gfyft(&composed, h, q)?;
    }
    let target = gfyft(f, h, alpha)?;
    let lhs = evaluate_at(&composed, ys)?;
    let rhs = evaluate_at(&target, ys)?;
    let mut meta = meta_common(f, alpha, ys.len());
    meta.push(("qs".into(), format!("{qs:?}")));
    meta[1].0 = "alpha_n".into();
    Ok(CheckReport::exact("transform_q_composition", lhs, rhs, EXACT_EVAL_THRESHOLD, meta))
}

/// Composing transforms at one `q` over the kernels of `H` collapses to the
/// single transform under `s(H)`.
pub fn check_transform_kernel_composition(
    f: &CylinderFunctional,
    kernels: &[GridFunction],
    q: f64,
    ys: &[SheetPath],
) -> Result<CheckReport> {
    let composed = gfyft_composed(f, kernels, q)?;
    let target = gfyft(f, &combine_kernels(kernels)?, q)?;
    let lhs = evaluate_at(&composed, ys)?;
    let rhs = evaluate_at(&target, ys)?;
    let mut meta = meta_common(f, q, ys.len());
    meta.push(("kernels".into(), kernels.len().to_string()));
    Ok(CheckReport::exact(
        "transform_kernel_composition",
        lhs,
        rhs,
        EXACT_EVAL_THRESHOLD,
        meta,
    ))
}

/// Mixed composition: families `H1`, `H2` with the same combination, run at
/// `q_1` and `q_2`, collapse to the single transform at `q_1 q_2/(q_1+q_2)`.
pub fn check_transform_mixed_composition(
    f: &CylinderFunctional,
    family1: &[GridFunction],
    family2: &[GridFunction],
    q1: f64,
    q2: f64,
    ys: &[SheetPath],
) -> Result<CheckReport> {
    let s1 = combine_kernels(family1)?;
    let s2 = combine_kernels(family2)?;
    require_cellwise_equal(&s1, &s2, "mixed composition needs s(H1) = s(H2)")?;
    let q_combined = alpha_n(&[q1, q2])?;
    let composed = gfyft_composed(&gfyft_composed(f, family1, q1)?, family2, q2)?;
    let target = gfyft(f, &s1, q_combined)?;
    let lhs = evaluate_at(&composed, ys)?;
    let rhs = evaluate_at(&target, ys)?;
    let mut meta = meta_common(f, q_combined, ys.len());
    meta.push(("q1".into(), format!("{q1}")));
    meta.push(("q2".into(), format!("{q2}")));
    Ok(CheckReport::exact(
        "transform_mixed_composition",
        lhs,
        rhs,
        EXACT_EVAL_THRESHOLD,
        meta,
    ))
}

/// Relationship I under `h^2 = k1 k2`: the transform of the convolution is
/// the product of transforms at `y/sqrt(2)` with kernels `s(h,k_j)/sqrt(2)`.
pub fn check_relationship_i(
    f: &CylinderFunctional,
    g: &CylinderFunctional,
    h: &GridFunction,
    k1: &GridFunction,
    k2: &GridFunction,
    q: f64,
    ys: &[SheetPath],
) -> Result<CheckReport> {
    require_cellwise_equal(
        &h.pointwise_mul(h)?,
        &k1.pointwise_mul(k2)?,
        "relationship I needs h^2 = k1 k2",
    )?;
    let lhs_fun = gfyft(&gcp(f, g, k1, k2, q)?, h, q)?;
    let tf = gfyft(f, &combine_kernels(&[h.clone(), k1.clone()])?.scaled(SQRT_2_INV), q)?;
    let tg = gfyft(g, &combine_kernels(&[h.clone(), k2.clone()])?.scaled(SQRT_2_INV), q)?;
    let mut lhs = Vec::with_capacity(ys.len());
    let mut rhs = Vec::with_capacity(ys.len());
    for y in ys {
        lhs.push(lhs_fun.evaluate(y)?);
        let half = y.scaled(SQRT_2_INV);
        rhs.push(tf.evaluate(&half)? * tg.evaluate(&half)?);
    }
    let mut meta = meta_common(f, q, ys.len());
    meta.push(("atoms_g".into(), g.measure().atoms().len().to_string()));
    Ok(CheckReport::exact("relationship_i", lhs, rhs, EXACT_EVAL_THRESHOLD, meta))
}

/// Relationship II under `h^2 = k1 k2`: the convolution (at `-q`) of the two
/// transforms equals the transform of the scaled product.
pub fn check_relationship_ii(
    f: &CylinderFunctional,
    g: &CylinderFunctional,
    h: &GridFunction,
    k1: &GridFunction,
    k2: &GridFunction,
    q: f64,
    ys: &[SheetPath],
) -> Result<CheckReport> {
    require_cellwise_equal(
        &h.pointwise_mul(h)?,
        &k1.pointwise_mul(k2)?,
        "relationship II needs h^2 = k1 k2",
    )?;
    let tf = gfyft(f, &combine_kernels(&[h.clone(), k1.clone()])?.scaled(SQRT_2_INV), q)?;
    let tg = gfyft(g, &combine_kernels(&[h.clone(), k2.clone()])?.scaled(SQRT_2_INV), q)?;
    let lhs_fun = gcp(&tf, &tg, k1, k2, -q)?;
    let rhs_fun = gfyft(&scaled_product(f, g)?, h, q)?;
    let lhs = evaluate_at(&lhs_fun, ys)?;
    let rhs = evaluate_at(&rhs_fun, ys)?;
    let mut meta = meta_common(f, q, ys.len());
    meta.push(("atoms_g".into(), g.measure().atoms().len().to_string()));
    Ok(CheckReport::exact("relationship_ii", lhs, rhs, EXACT_EVAL_THRESHOLD, meta))
}

/// Relationship II with an iterated transform family `H` under
/// `s^2(H) = k1 k2`: the three forms (iterated transforms, combined-kernel
/// transforms, single transform of the scaled product) agree.
pub fn check_relationship_ii_extended(
    f: &CylinderFunctional,
    g: &CylinderFunctional,
    kernels: &[GridFunction],
    k1: &GridFunction,
    k2: &GridFunction,
    q: f64,
    ys: &[SheetPath],
) -> Result<CheckReport> {
    let s_h = combine_kernels(kernels)?;
    require_cellwise_equal(
        &s_h.pointwise_mul(&s_h)?,
        &k1.pointwise_mul(k2)?,
        "extended relationship II needs s^2(H) = k1 k2",
    )?;

    let halved: Vec<GridFunction> = kernels.iter().map(|h| h.scaled(SQRT_2_INV)).collect();
    let iter_f = gfyft(&gfyft_composed(f, &halved, q)?, &k1.scaled(SQRT_2_INV), q)?;
    let iter_g = gfyft(&gfyft_composed(g, &halved, q)?, &k2.scaled(SQRT_2_INV), q)?;
    let form_a = evaluate_at(&gcp(&iter_f, &iter_g, k1, k2, -q)?, ys)?;

    let mut family_k1 = kernels.to_vec();
    family_k1.push(k1.clone());
    let mut family_k2 = kernels.to_vec();
    family_k2.push(k2.clone());
    let tf = gfyft(f, &combine_kernels(&family_k1)?.scaled(SQRT_2_INV), q)?;
    let tg = gfyft(g, &combine_kernels(&family_k2)?.scaled(SQRT_2_INV), q)?;
    let form_b = evaluate_at(&gcp(&tf, &tg, k1, k2, -q)?, ys)?;

    let form_c = evaluate_at(&gfyft(&scaled_product(f, g)?, &s_h, q)?, ys)?;

    let mut meta = meta_common(f, q, ys.len());
    meta.push(("atoms_g".into(), g.measure().atoms().len().to_string()));
    meta.push(("kernels".into(), kernels.len().to_string()));
    Ok(CheckReport::exact_chain(
        "relationship_ii_extended",
        vec![form_a, form_b, form_c],
        EXACT_EVAL_THRESHOLD,
        meta,
    ))
}

/// Relationship II with two kernel families under
/// `h^2 = s(K1) s(K2)`, the convolution taken with respect to the combined
/// kernels: the four forms of the chain agree.
pub fn check_relationship_ii_dual_families(
    f: &CylinderFunctional,
    g: &CylinderFunctional,
    h: &GridFunction,
    family1: &[GridFunction],
    family2: &[GridFunction],
    q: f64,
    ys: &[SheetPath],
) -> Result<CheckReport> {
    let s1 = combine_kernels(family1)?;
    let s2 = combine_kernels(family2)?;
    require_cellwise_equal(
        &h.pointwise_mul(h)?,
        &s1.pointwise_mul(&s2)?,
        "dual-family relationship II needs h^2 = s(K1) s(K2)",
    )?;
    let h_half = h.scaled(SQRT_2_INV);

    // iterated transforms over each family, then the shared kernel h
    let fam1_halved: Vec<GridFunction> = family1.iter().map(|k| k.scaled(SQRT_2_INV)).collect();
    let fam2_halved: Vec<GridFunction> = family2.iter().map(|k| k.scaled(SQRT_2_INV)).collect();
    let a_f = gfyft(&gfyft_composed(f, &fam1_halved, q)?, &h_half, q)?;
    let a_g = gfyft(&gfyft_composed(g, &fam2_halved, q)?, &h_half, q)?;
    let form_a = evaluate_at(&gcp(&a_f, &a_g, &s1, &s2, -q)?, ys)?;

    // families collapsed to their combinations first
    let b_f = gfyft(&gfyft(f, &s1.scaled(SQRT_2_INV), q)?, &h_half, q)?;
    let b_g = gfyft(&gfyft(g, &s2.scaled(SQRT_2_INV), q)?, &h_half, q)?;
    let form_b = evaluate_at(&gcp(&b_f, &b_g, &s1, &s2, -q)?, ys)?;

    // single transforms with s(h, s(Kj))/sqrt(2)
    let c_f = gfyft(f, &combine_kernels(&[h.clone(), s1.clone()])?.scaled(SQRT_2_INV), q)?;
    let c_g = gfyft(g, &combine_kernels(&[h.clone(), s2.clone()])?.scaled(SQRT_2_INV), q)?;
    let form_c = evaluate_at(&gcp(&c_f, &c_g, &s1, &s2, -q)?, ys)?;

    let form_d = evaluate_at(&gfyft(&scaled_product(f, g)?, h, q)?, ys)?;

    let mut meta = meta_common(f, q, ys.len());
    meta.push(("atoms_g".into(), g.measure().atoms().len().to_string()));
    meta.push(("family1".into(), family1.len().to_string()));
    meta.push(("family2".into(), family2.len().to_string()));
    Ok(CheckReport::exact_chain(
        "relationship_ii_dual_families",
        vec![form_a, form_b, form_c, form_d],
        EXACT_EVAL_THRESHOLD,
        meta,
    ))
}

/// Statistical consistency of the Monte Carlo estimator against the real
/// parameter closed form, judged at three combined standard errors.
pub fn check_mc_consistency(
    f: &CylinderFunctional,
    h: &GridFunction,
    lambda: f64,
    n: u64,
    stream: &RngStream,
) -> Result<CheckReport> {
    let estimate = yeh_wiener_mc(f, h, lambda, n, stream)?;
    let oracle = closed_form_real_lambda(f, h, lambda)?;
    let mut report = mc_report("mc_consistency", &estimate, oracle);
    report.metadata.push(("lambda".into(), format!("{lambda}")));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset_kernels;

    fn unit_grid(n: usize) -> GridSpec {
        GridSpec::new(1.0, 1.0, n, n).unwrap()
    }

    fn paths(grid: &GridSpec, n: u64, stream: u64) -> Vec<SheetPath> {
        sample_check_paths(grid, n, &RngStream::new(0xF00D, stream))
    }

    #[test]
    fn fubini_h4_and_random() {
        let g = unit_grid(32);
        let h4 = preset_kernels("H4", &g).unwrap();
        for case in 0..5u64 {
            let f = random_functional(&g, 5, &RngStream::new(1, case));
            let r = check_fubini(&f, &h4, 1.0 + case as f64).unwrap();
            assert!(r.passed, "{}", r.summary_line());
        }
        for case in 0..10u64 {
            let f = random_functional(&g, 5, &RngStream::new(2, case));
            let ks: Vec<GridFunction> =
                (0..3).map(|j| random_kernel(&g, &RngStream::new(3, case * 8 + j))).collect();
            let q = if case % 2 == 0 { 0.5 + case as f64 } else { -(0.5 + case as f64) };
            let r = check_fubini(&f, &ks, q).unwrap();
            assert!(r.passed, "{}", r.summary_line());
        }
    }

    #[test]
    fn fubini_single_kernel_diff_is_tiny() {
        let g = unit_grid(16);
        let f = random_functional(&g, 4, &RngStream::new(4, 0));
        let h = random_kernel(&g, &RngStream::new(5, 0));
        let r = check_fubini(&f, std::slice::from_ref(&h), 2.0).unwrap();
        // single kernel: |h| vs h differ only through squaring rounding
        assert!(r.max_abs_diff < 1e-14, "{}", r.summary_line());
    }

    #[test]
    fn transform_inverse_round_trip() {
        let g = unit_grid(16);
        let f = random_functional(&g, 5, &RngStream::new(6, 0));
        let h = random_kernel(&g, &RngStream::new(7, 0));
        let r = check_transform_inverse(&f, &h, 1.7).unwrap();
        assert!(r.passed, "{}", r.summary_line());
    }

    #[test]
    fn q_composition_examples() {
        let g = unit_grid(16);
        let f = random_functional(&g, 4, &RngStream::new(8, 0));
        let h = random_kernel(&g, &RngStream::new(9, 0));
        let ys = paths(&g, 5, 0);

        // (2,2) collapses to q=1
        let r = check_transform_q_composition(&f, &h, &[2.0, 2.0], &ys).unwrap();
        assert!(r.passed, "{}", r.summary_line());

        // single q: identity comparison
        let r = check_transform_q_composition(&f, &h, &[1.25], &ys).unwrap();
        assert!(r.max_abs_diff == 0.0, "{}", r.summary_line());

        // the (3, -6, 2) composition collapses to alpha = 3/2
        let r = check_transform_q_composition(&f, &h, &[3.0, -6.0, 2.0], &ys).unwrap();
        assert!(r.passed, "{}", r.summary_line());

        // degenerate parameters refuse to run
        assert!(matches!(
            check_transform_q_composition(&f, &h, &[3.0, -3.0], &ys),
            Err(Error::DegenerateParameter(_))
        ));
    }

    #[test]
    fn kernel_composition_examples() {
        let g = unit_grid(32);
        let f = random_functional(&g, 4, &RngStream::new(10, 0));
        let ys = paths(&g, 5, 1);

        let h4 = preset_kernels("H4", &g).unwrap();
        let r = check_transform_kernel_composition(&f, &h4, 0.8, &ys).unwrap();
        assert!(r.passed, "{}", r.summary_line());

        // trig pair: s(H) = 1, so the composition is the plain transform
        let pair = preset_kernels("trig-pair", &g).unwrap();
        let r = check_transform_kernel_composition(&f, &pair, 0.8, &ys).unwrap();
        assert!(r.passed, "{}", r.summary_line());
        let composed = gfyft_composed(&f, &pair, 0.8).unwrap();
        let plain = gfyft(&f, &GridFunction::constant(&g, 1.0), 0.8).unwrap();
        for y in &ys {
            let a = composed.evaluate(y).unwrap();
            let b = plain.evaluate(y).unwrap();
            assert!((a - b).norm() < 1e-10);
        }

        let h = random_kernel(&g, &RngStream::new(11, 0));
        let r = check_transform_kernel_composition(&f, std::slice::from_ref(&h), 0.8, &ys).unwrap();
        assert!(r.max_abs_diff < 1e-12, "{}", r.summary_line());
    }

    #[test]
    fn mixed_composition_families() {
        let g = unit_grid(16);
        let f = random_functional(&g, 4, &RngStream::new(12, 0));
        let ys = paths(&g, 5, 2);
        // two different families with identical combination: a kernel split
        // as (k, k) in one family and (k sqrt(2)) in the other
        let k = random_kernel(&g, &RngStream::new(13, 0));
        let fam1 = vec![k.clone(), k.clone()];
        let fam2 = vec![k.scaled(std::f64::consts::SQRT_2)];
        let r = check_transform_mixed_composition(&f, &fam1, &fam2, 3.0, 2.0, &ys).unwrap();
        assert!(r.passed, "{}", r.summary_line());

        // mismatched combinations refuse to run
        let fam3 = vec![k.scaled(2.0)];
        assert!(matches!(
            check_transform_mixed_composition(&f, &fam1, &fam3, 3.0, 2.0, &ys),
            Err(Error::HypothesisViolated(_))
        ));

        // q1 + q2 = 0 is degenerate
        assert!(matches!(
            check_transform_mixed_composition(&f, &fam1, &fam2, 3.0, -3.0, &ys),
            Err(Error::DegenerateParameter(_))
        ));
    }

    fn relationship_fixture(
        g: &GridSpec,
        which: &str,
    ) -> (CylinderFunctional, CylinderFunctional, GridFunction, GridFunction, GridFunction) {
        let f = random_functional(g, 3, &RngStream::new(14, 1));
        let gg = random_functional(g, 3, &RngStream::new(14, 2));
        match which {
            "ones" => {
                let one = GridFunction::constant(g, 1.0);
                (f, gg, one.clone(), one.clone(), one)
            }
            "k1k2" => {
                let ks = preset_kernels("k1k2-pair", g).unwrap();
                (f, gg, ks[2].clone(), ks[0].clone(), ks[1].clone())
            }
            "constants" => (
                f,
                gg,
                GridFunction::constant(g, 1.0),
                GridFunction::constant(g, 2.0),
                GridFunction::constant(g, 0.5),
            ),
            _ => unreachable!(),
        }
    }

    #[test]
    fn relationship_i_cases() {
        let g = unit_grid(32);
        let ys = paths(&g, 5, 3);
        for which in ["ones", "k1k2", "constants"] {
            let (f, gg, h, k1, k2) = relationship_fixture(&g, which);
            let r = check_relationship_i(&f, &gg, &h, &k1, &k2, 1.0, &ys).unwrap();
            assert!(r.passed, "{which}: {}", r.summary_line());
        }
    }

    #[test]
    fn relationship_i_rejects_bad_hypothesis() {
        let g = unit_grid(16);
        let ys = paths(&g, 3, 4);
        let (f, gg, _, k1, k2) = relationship_fixture(&g, "ones");
        let h = GridFunction::constant(&g, 2.0);
        assert!(matches!(
            check_relationship_i(&f, &gg, &h, &k1, &k2, 1.0, &ys),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn relationship_ii_cases() {
        let g = unit_grid(32);
        let ys = paths(&g, 5, 5);
        for which in ["ones", "k1k2", "constants"] {
            let (f, gg, h, k1, k2) = relationship_fixture(&g, which);
            let r = check_relationship_ii(&f, &gg, &h, &k1, &k2, 1.0, &ys).unwrap();
            assert!(r.passed, "{which}: {}", r.summary_line());
        }
    }

    #[test]
    fn relationship_ii_point_masses() {
        // single atoms at zero: both sides reduce to the weight product
        let g = unit_grid(16);
        let ys = paths(&g, 3, 6);
        let c = Complex64::new(0.4, -0.2);
        let d = Complex64::new(-0.7, 0.1);
        let f = CylinderFunctional::from_atoms(&g, vec![(c, GridFunction::constant(&g, 0.0))])
            .unwrap();
        let gg = CylinderFunctional::from_atoms(&g, vec![(d, GridFunction::constant(&g, 0.0))])
            .unwrap();
        let one = GridFunction::constant(&g, 1.0);
        let r = check_relationship_ii(&f, &gg, &one, &one, &one, 1.3, &ys).unwrap();
        assert!(r.passed);
        for v in &r.lhs {
            assert!((v - c * d).norm() < 1e-12);
        }
    }

    #[test]
    fn relationship_ii_extended_cases() {
        let g = unit_grid(32);
        let ys = paths(&g, 5, 7);
        let f = random_functional(&g, 3, &RngStream::new(15, 0));
        let gg = random_functional(&g, 3, &RngStream::new(15, 1));

        // single-kernel family reduces to relationship II with k1 k2 = h^2
        let ks = preset_kernels("k1k2-pair", &g).unwrap();
        let family = vec![ks[2].clone()];
        let r = check_relationship_ii_extended(&f, &gg, &family, &ks[0], &ks[1], 1.0, &ys).unwrap();
        assert!(r.passed, "{}", r.summary_line());

        // two constant kernels with h1^2 + h2^2 = k1 k2
        let family = vec![GridFunction::constant(&g, 0.6), GridFunction::constant(&g, 0.8)];
        let k1 = GridFunction::constant(&g, 2.0);
        let k2 = GridFunction::constant(&g, 0.5);
        let r = check_relationship_ii_extended(&f, &gg, &family, &k1, &k2, 0.7, &ys).unwrap();
        assert!(r.passed, "{}", r.summary_line());

        // random family of three, hypothesis constructed as k1 = s^2(H), k2 = 1
        let family: Vec<GridFunction> =
            (0..3).map(|j| random_kernel(&g, &RngStream::new(16, j))).collect();
        let s = combine_kernels(&family).unwrap();
        let k1 = s.pointwise_mul(&s).unwrap();
        let k2 = GridFunction::constant(&g, 1.0);
        let r = check_relationship_ii_extended(&f, &gg, &family, &k1, &k2, -1.1, &ys).unwrap();
        assert!(r.passed, "{}", r.summary_line());
    }

    #[test]
    fn relationship_ii_dual_family_cases() {
        let g = unit_grid(32);
        let ys = paths(&g, 5, 8);
        let f = random_functional(&g, 3, &RngStream::new(17, 0));
        let gg = random_functional(&g, 3, &RngStream::new(17, 1));

        // K1 = K2 = {h}: s(Kj) = |h|, hypothesis h^2 = |h|^2
        let h = random_kernel(&g, &RngStream::new(18, 0));
        let fam = vec![h.clone()];
        let r =
            check_relationship_ii_dual_families(&f, &gg, &h, &fam, &fam, 1.0, &ys).unwrap();
        assert!(r.passed, "{}", r.summary_line());

        // constants: s(K1) = 3, s(K2) = 4/3, h = 2
        let fam1 = vec![GridFunction::constant(&g, 3.0)];
        let fam2 = vec![GridFunction::constant(&g, 4.0 / 3.0)];
        let h = GridFunction::constant(&g, 2.0);
        let r =
            check_relationship_ii_dual_families(&f, &gg, &h, &fam1, &fam2, 0.9, &ys).unwrap();
        assert!(r.passed, "{}", r.summary_line());

        // k1k2 preset split into two-element families with equal combinations
        let ks = preset_kernels("k1k2-pair", &g).unwrap();
        let scale = 0.5f64.sqrt();
        let fam1 = vec![ks[0].scaled(scale), ks[0].scaled(scale)];
        let fam2 = vec![ks[1].scaled(scale), ks[1].scaled(scale)];
        // s(fam1) = k1, s(fam2) = k2 (both presets are nonnegative), h^2 = k1 k2
        let r = check_relationship_ii_dual_families(&f, &gg, &ks[2], &fam1, &fam2, 1.0, &ys)
            .unwrap();
        assert!(r.passed, "{}", r.summary_line());

        // violated hypothesis refuses to run
        let bad_h = GridFunction::constant(&g, 5.0);
        assert!(matches!(
            check_relationship_ii_dual_families(&f, &gg, &bad_h, &fam1, &fam2, 1.0, &ys),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn mc_consistency_point_mass_and_negative_control() {
        let g = unit_grid(16);
        let f = CylinderFunctional::unit_mass(GridFunction::constant(&g, 0.0));
        let one = GridFunction::constant(&g, 1.0);
        let r = check_mc_consistency(&f, &one, 1.0, 100, &RngStream::new(19, 0)).unwrap();
        assert!(r.passed);
        assert_eq!(r.max_abs_diff, 0.0);

        // a real estimate, then a 10-sigma corrupted oracle must fail
        let f = random_functional(&g, 3, &RngStream::new(20, 0));
        let h = random_kernel(&g, &RngStream::new(21, 0));
        let est = yeh_wiener_mc(&f, &h, 1.0, 10_000, &RngStream::new(22, 0)).unwrap();
        let oracle = closed_form_real_lambda(&f, &h, 1.0).unwrap();
        let good = mc_report("mc_consistency", &est, oracle);
        assert!(good.passed, "{}", good.summary_line());
        let corrupted = oracle + Complex64::new(10.0 * est.se_re.max(1e-12), 0.0);
        let bad = mc_report("mc_consistency", &est, corrupted);
        assert!(!bad.passed, "{}", bad.summary_line());
    }

    #[test]
    fn exact_checks_are_deterministic_and_perturbable() {
        let g = unit_grid(16);
        let f = random_functional(&g, 4, &RngStream::new(23, 0));
        let h4 = preset_kernels("H4", &g).unwrap();
        let a = check_fubini(&f, &h4, 1.0).unwrap();
        let b = check_fubini(&f, &h4, 1.0).unwrap();
        assert_eq!(a, b);

        // perturbing the left phases by 1e-6 must flip every exact check
        assert!(!a.with_lhs_phase_perturbation(1e-6).passed);
        let h = random_kernel(&g, &RngStream::new(24, 0));
        let ys = paths(&g, 5, 9);
        let r = check_transform_q_composition(&f, &h, &[3.0, -6.0, 2.0], &ys).unwrap();
        assert!(!r.with_lhs_phase_perturbation(1e-6).passed);
        let r = check_transform_kernel_composition(&f, &h4, 1.0, &ys).unwrap();
        assert!(!r.with_lhs_phase_perturbation(1e-6).passed);
    }

    #[test]
    fn relationship_checks_symmetric_in_f_and_g() {
        // swapping F and G (and k1 with k2) must not change the verdict
        let g = unit_grid(16);
        let ys = paths(&g, 4, 10);
        let (f, gg, h, k1, k2) = relationship_fixture(&g, "k1k2");
        let a = check_relationship_i(&f, &gg, &h, &k1, &k2, 1.0, &ys).unwrap();
        let b = check_relationship_i(&gg, &f, &h, &k2, &k1, 1.0, &ys).unwrap();
        assert_eq!(a.passed, b.passed);
        let a = check_relationship_ii(&f, &gg, &h, &k1, &k2, 1.0, &ys).unwrap();
        let b = check_relationship_ii(&gg, &f, &h, &k2, &k1, 1.0, &ys).unwrap();
        assert_eq!(a.passed, b.passed);
    }
}
