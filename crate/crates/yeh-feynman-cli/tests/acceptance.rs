//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured figure. Exact criteria assert algebraic identities at their
//! pinned tolerances; statistical criteria assert agreement within three
//! combined standard errors at pinned sample counts and fixed seeds.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use yeh_feynman::checks::{
    check_fubini, check_relationship_i, check_relationship_ii,
    check_relationship_ii_dual_families, check_relationship_ii_extended, check_transform_inverse,
    check_transform_kernel_composition, check_transform_mixed_composition,
    check_transform_q_composition, mc_report, random_functional, random_kernel,
    sample_check_paths,
};
use yeh_feynman::feynman::{iterated_mc_two_kernels, yeh_wiener_mc};
use yeh_feynman::presets::preset_kernels;
use yeh_feynman::{
    alpha_n, closed_form_real_lambda, combine_kernels, feynman_closed_form, gaussian_path,
    iterated_closed_form, pwz_integral, sample_sheet, CylinderFunctional, GridFunction, GridSpec,
    RngStream,
};

const SEED_PWZ: u64 = 0xACC1;
const SEED_GAUSS: u64 = 0xACC2;
const SEED_ORACLE: u64 = 0xACC3;
const SEED_FUBINI: u64 = 0xACC4;
const SEED_TWO_STAGE: u64 = 0xACC5;
const SEED_TRANSFORM: u64 = 0xACC6;
const SEED_RELATIONSHIP: u64 = 0xACC7;
const SEED_EXTENDED: u64 = 0xACC8;
const SEED_CONTROL: u64 = 0xACC9;

fn grid64() -> GridSpec {
    GridSpec::default_unit()
}

/// Uniform [-1, 1] cell values.
fn uniform_fn(grid: &GridSpec, stream: &RngStream) -> GridFunction {
    let mut rng = stream.rng();
    GridFunction::from_values(
        grid,
        (0..grid.n_cells()).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

#[test]
fn criterion_01_pwz_identity_exact() {
    let grid = grid64();
    let mut max_diff = 0.0f64;
    for case in 0..1000u64 {
        let base = RngStream::new(SEED_PWZ, 3 * case);
        let alpha = uniform_fn(&grid, &base);
        let h = uniform_fn(&grid, &base.offset(1));
        let x = sample_sheet(&grid, &base.offset(2));
        let lhs = pwz_integral(&alpha, &gaussian_path(&h, &x).unwrap()).unwrap();
        let rhs = pwz_integral(&alpha.pointwise_mul(&h).unwrap(), &x).unwrap();
        max_diff = max_diff.max((lhs - rhs).abs());
    }
    assert!(max_diff <= 1e-14, "max diff {max_diff:e}");
    println!(
        "ACCEPTANCE 1 PASS: <a,Y_h(x)> = <ah,x> over 1000 random triples, max diff {max_diff:.3e} <= 1e-14"
    );
}

#[test]
fn criterion_02_gaussian_law_of_pwz() {
    let grid = grid64();
    let n = 100_000u64;
    let tau = std::f64::consts::TAU;
    let vs = [
        ("1", GridFunction::constant(&grid, 1.0)),
        ("s*t", GridFunction::sample(&grid, |s, t| s * t).unwrap()),
        (
            "sin(2 pi s) sin(2 pi t)",
            GridFunction::sample(&grid, |s, t| (tau * s).sin() * (tau * t).sin()).unwrap(),
        ),
    ];
    let alphas = [0.5, 1.0, 2.0];

    // one pass over the sheets feeds every statistic
    let mut sum = [0.0f64; 3];
    let mut sum_sq = [0.0f64; 3];
    let mut cf = [[(0.0f64, 0.0f64, 0.0f64, 0.0f64); 3]; 3]; // (sum_re, sum_re2, sum_im, sum_im2)
    let base = RngStream::new(SEED_GAUSS, 0);
    for i in 0..n {
        let x = sample_sheet(&grid, &base.offset(i));
        for (vi, (_, v)) in vs.iter().enumerate() {
            let z = pwz_integral(v, &x).unwrap();
            sum[vi] += z;
            sum_sq[vi] += z * z;
            for (ai, &alpha) in alphas.iter().enumerate() {
                let (s, c) = (alpha * z).sin_cos();
                let e = &mut cf[vi][ai];
                e.0 += c;
                e.1 += c * c;
                e.2 += s;
                e.3 += s * s;
            }
        }
    }

    let nf = n as f64;
    for (vi, (name, v)) in vs.iter().enumerate() {
        let norm_sq = v.l2_norm_sq();
        let mean = sum[vi] / nf;
        let se_mean = (norm_sq / nf).sqrt();
        assert!(mean.abs() <= 3.0 * se_mean, "{name}: mean {mean} vs se {se_mean}");

        let var = (sum_sq[vi] - sum[vi] * sum[vi] / nf) / (nf - 1.0);
        let se_var = (2.0 / (nf - 1.0)).sqrt() * norm_sq;
        assert!(
            (var - norm_sq).abs() <= 3.0 * se_var,
            "{name}: var {var} vs {norm_sq} (se {se_var})"
        );

        for (ai, &alpha) in alphas.iter().enumerate() {
            let target = (-alpha * alpha * norm_sq / 2.0).exp();
            let (s_re, s_re2, s_im, s_im2) = cf[vi][ai];
            let mean_re = s_re / nf;
            let mean_im = s_im / nf;
            let se = |s: f64, s2: f64| (((s2 - s * s / nf) / (nf - 1.0)).max(0.0) / nf).sqrt();
            let (se_re, se_im) = (se(s_re, s_re2), se(s_im, s_im2));
            assert!(
                (mean_re - target).abs() <= 3.0 * se_re,
                "{name}, alpha={alpha}: re {mean_re} vs {target} (se {se_re})"
            );
            assert!(
                mean_im.abs() <= 3.0 * se_im,
                "{name}, alpha={alpha}: im {mean_im} (se {se_im})"
            );
        }
    }
    println!(
        "ACCEPTANCE 2 PASS: mean/variance/characteristic function of <v,x> within 3 sigma for 3 integrands, 3 alphas, n=10^5"
    );
}

#[test]
fn criterion_03_feynman_oracle_equivalence() {
    let grid = grid64();
    let mut kernel_set: Vec<(String, GridFunction)> = Vec::new();
    kernel_set.push(("one".into(), GridFunction::constant(&grid, 1.0)));
    for (i, k) in preset_kernels("H4", &grid).unwrap().into_iter().enumerate() {
        kernel_set.push((format!("H4[{i}]"), k));
    }
    for (i, k) in preset_kernels("trig-pair", &grid).unwrap().into_iter().enumerate() {
        kernel_set.push((format!("trig-pair[{i}]"), k));
    }
    assert_eq!(kernel_set.len(), 7);

    let n = 100_000u64;
    let lambdas = [0.5, 1.0, 2.0];
    let mut worst = 0.0f64;
    for case in 0..20u64 {
        let start = Instant::now();
        let f = random_functional(&grid, 5, &RngStream::new(SEED_ORACLE, 100 + case));
        let (kernel_name, kernel) = &kernel_set[case as usize % kernel_set.len()];
        for (j, &lambda) in lambdas.iter().enumerate() {
            let stream = RngStream::new(SEED_ORACLE, (1 + case * 3 + j as u64) << 32);
            let est = yeh_wiener_mc(&f, kernel, lambda, n, &stream).unwrap();
            let oracle = closed_form_real_lambda(&f, kernel, lambda).unwrap();
            let d = est.sigma_distance(oracle, (0.0, 0.0));
            assert!(
                d <= 3.0,
                "case {case} kernel {kernel_name} lambda {lambda}: {d:.2} sigma"
            );
            worst = worst.max(d);
        }
        let elapsed = start.elapsed();
        assert!(
            elapsed.as_secs() < 60,
            "case {case} took {elapsed:?}, expected < 60 s"
        );
    }
    println!(
        "ACCEPTANCE 3 PASS: MC vs closed form within 3 sigma for 20 functionals x 3 lambdas (n=10^5), worst {worst:.2} sigma"
    );
}

#[test]
fn criterion_04_fubini_exact() {
    let grid = grid64();
    let q = 1.0;

    // the four-kernel example reduces to sqrt(2) sin s cos t
    let h4 = preset_kernels("H4", &grid).unwrap();
    let f = random_functional(&grid, 5, &RngStream::new(SEED_FUBINI, 0));
    let report = check_fubini(&f, &h4, q).unwrap();
    assert!(report.passed, "{}", report.summary_line());
    let explicit =
        GridFunction::sample(&grid, |s, t| std::f64::consts::SQRT_2 * s.sin() * t.cos()).unwrap();
    let via_explicit = feynman_closed_form(&f, &explicit, q).unwrap();
    let iterated = iterated_closed_form(&f, &h4, q).unwrap();
    assert!(
        (via_explicit - iterated).norm() <= 1e-12,
        "explicit combined kernel: {:e}",
        (via_explicit - iterated).norm()
    );

    let mut max_diff: f64 = report.max_abs_diff;
    for case in 0..100u64 {
        let base = RngStream::new(SEED_FUBINI, 1000 + 10 * case);
        let f = random_functional(&grid, 5, &base);
        let n_kernels = 1 + (case as usize % 4);
        let kernels: Vec<GridFunction> =
            (0..n_kernels).map(|j| random_kernel(&grid, &base.offset(1 + j as u64))).collect();
        let mut rng = base.offset(9).rng();
        let mag: f64 = rng.random_range(0.3..3.3);
        let q = if rng.random::<bool>() { mag } else { -mag };
        let r = check_fubini(&f, &kernels, q).unwrap();
        assert!(r.passed, "case {case}: {}", r.summary_line());
        max_diff = max_diff.max(r.max_abs_diff);
    }
    println!(
        "ACCEPTANCE 4 PASS: Fubini reduction exact on 100 random (F,H,q) and the 4-kernel example, max diff {max_diff:.3e} <= 1e-12"
    );
}

#[test]
fn criterion_05_two_stage_mc_fubini() {
    let grid = grid64();
    let n_outer = 10_000u64;
    let lambda = 1.0;

    let mut run_pair = |tag: &str, h1: &GridFunction, h2: &GridFunction, case: u64| {
        let f = random_functional(&grid, 3, &RngStream::new(SEED_TWO_STAGE, case));
        let combined = combine_kernels(&[h1.clone(), h2.clone()]).unwrap();
        let two_stage = iterated_mc_two_kernels(
            &f,
            h1,
            h2,
            lambda,
            lambda,
            n_outer,
            1,
            &RngStream::new(SEED_TWO_STAGE, (case + 1) << 32),
        )
        .unwrap();
        let single = yeh_wiener_mc(
            &f,
            &combined,
            lambda,
            n_outer,
            &RngStream::new(SEED_TWO_STAGE, (case + 100) << 32),
        )
        .unwrap();
        let d = two_stage.sigma_distance(single.mean, (single.se_re, single.se_im));
        assert!(d <= 3.0, "{tag}: {d:.2} sigma");
        d
    };

    let pair = preset_kernels("trig-pair", &grid).unwrap();
    let s12 = combine_kernels(&pair).unwrap();
    assert!(s12.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    let d1 = run_pair("trig-pair", &pair[0], &pair[1], 0);

    let h1 = random_kernel(&grid, &RngStream::new(SEED_TWO_STAGE, 7001));
    let h2 = random_kernel(&grid, &RngStream::new(SEED_TWO_STAGE, 7002));
    let d2 = run_pair("random pair", &h1, &h2, 1);

    println!(
        "ACCEPTANCE 5 PASS: two-stage MC vs combined-kernel MC within 3 sigma (trig pair {d1:.2}, random pair {d2:.2})"
    );
}

#[test]
fn criterion_06_transform_algebra() {
    let grid = grid64();
    let ys = sample_check_paths(&grid, 10, &RngStream::new(SEED_TRANSFORM, 0xA000));

    // inverse identity at the measure level, 1e-14
    let mut max_inverse = 0.0f64;
    for case in 0..20u64 {
        let base = RngStream::new(SEED_TRANSFORM, 100 + 3 * case);
        let f = random_functional(&grid, 5, &base);
        let h = random_kernel(&grid, &base.offset(1));
        let q = 0.4 + 0.37 * case as f64;
        let r = check_transform_inverse(&f, &h, q).unwrap();
        assert!(r.passed, "case {case}: {}", r.summary_line());
        max_inverse = max_inverse.max(r.max_abs_diff);
    }

    // q-composition with (3, -6, 2) collapses to alpha = 3/2
    let f = random_functional(&grid, 5, &RngStream::new(SEED_TRANSFORM, 1));
    let h = random_kernel(&grid, &RngStream::new(SEED_TRANSFORM, 2));
    assert!((alpha_n(&[3.0, -6.0, 2.0]).unwrap() - 1.5).abs() < 1e-14);
    let r_q = check_transform_q_composition(&f, &h, &[3.0, -6.0, 2.0], &ys).unwrap();
    assert!(r_q.passed, "{}", r_q.summary_line());

    // kernel composition over the four-kernel family
    let h4 = preset_kernels("H4", &grid).unwrap();
    let r_k = check_transform_kernel_composition(&f, &h4, 1.0, &ys).unwrap();
    assert!(r_k.passed, "{}", r_k.summary_line());

    println!(
        "ACCEPTANCE 6 PASS: inverse exact (max {max_inverse:.3e} <= 1e-14), q-composition {:.3e} and kernel composition {:.3e} <= 1e-10 at 11 paths",
        r_q.max_abs_diff, r_k.max_abs_diff
    );
}

#[test]
fn criterion_07_relationships_i_and_ii() {
    let grid = grid64();
    let ys = sample_check_paths(&grid, 10, &RngStream::new(SEED_RELATIONSHIP, 0xA000));
    let f = random_functional(&grid, 4, &RngStream::new(SEED_RELATIONSHIP, 1));
    let g = random_functional(&grid, 4, &RngStream::new(SEED_RELATIONSHIP, 2));

    let one = GridFunction::constant(&grid, 1.0);
    let ks = preset_kernels("k1k2-pair", &grid).unwrap();
    let cases: [(&str, &GridFunction, &GridFunction, &GridFunction); 2] = [
        ("ones", &one, &one, &one),
        ("k1k2-pair", &ks[2], &ks[0], &ks[1]),
    ];
    let mut worst = 0.0f64;
    for (tag, h, k1, k2) in cases {
        for q in [1.0, -0.7] {
            let r1 = check_relationship_i(&f, &g, h, k1, k2, q, &ys).unwrap();
            assert!(r1.passed, "I[{tag}] q={q}: {}", r1.summary_line());
            let r2 = check_relationship_ii(&f, &g, h, k1, k2, q, &ys).unwrap();
            assert!(r2.passed, "II[{tag}] q={q}: {}", r2.summary_line());
            worst = worst.max(r1.max_abs_diff).max(r2.max_abs_diff);
        }
    }
    println!(
        "ACCEPTANCE 7 PASS: relationships I and II exact at 11 paths for ones and the k1k2 preset, max diff {worst:.3e} <= 1e-10"
    );
}

#[test]
fn criterion_08_extended_chains() {
    let grid = grid64();
    let ys = sample_check_paths(&grid, 10, &RngStream::new(SEED_EXTENDED, 0xA000));
    let f = random_functional(&grid, 3, &RngStream::new(SEED_EXTENDED, 1));
    let g = random_functional(&grid, 3, &RngStream::new(SEED_EXTENDED, 2));
    let q = 1.0;
    let mut worst = 0.0f64;

    // three-form chain: constants, the worked preset, and a constructed
    // random family with k1 = s^2(H), k2 = 1
    let family = vec![GridFunction::constant(&grid, 0.6), GridFunction::constant(&grid, 0.8)];
    let r = check_relationship_ii_extended(
        &f,
        &g,
        &family,
        &GridFunction::constant(&grid, 2.0),
        &GridFunction::constant(&grid, 0.5),
        q,
        &ys,
    )
    .unwrap();
    assert!(r.passed, "{}", r.summary_line());
    worst = worst.max(r.max_abs_diff);

    let ks = preset_kernels("k1k2-pair", &grid).unwrap();
    let r = check_relationship_ii_extended(&f, &g, &[ks[2].clone()], &ks[0], &ks[1], q, &ys)
        .unwrap();
    assert!(r.passed, "{}", r.summary_line());
    worst = worst.max(r.max_abs_diff);

    let family: Vec<GridFunction> =
        (0..3).map(|j| random_kernel(&grid, &RngStream::new(SEED_EXTENDED, 50 + j))).collect();
    let s = combine_kernels(&family).unwrap();
    let r = check_relationship_ii_extended(
        &f,
        &g,
        &family,
        &s.pointwise_mul(&s).unwrap(),
        &GridFunction::constant(&grid, 1.0),
        q,
        &ys,
    )
    .unwrap();
    assert!(r.passed, "{}", r.summary_line());
    worst = worst.max(r.max_abs_diff);

    // four-form chain: shared kernel, constants, and the split preset
    let h = random_kernel(&grid, &RngStream::new(SEED_EXTENDED, 60));
    let fam = vec![h.clone()];
    let r = check_relationship_ii_dual_families(&f, &g, &h, &fam, &fam, q, &ys).unwrap();
    assert!(r.passed, "{}", r.summary_line());
    worst = worst.max(r.max_abs_diff);

    let r = check_relationship_ii_dual_families(
        &f,
        &g,
        &GridFunction::constant(&grid, 2.0),
        &[GridFunction::constant(&grid, 3.0)],
        &[GridFunction::constant(&grid, 4.0 / 3.0)],
        q,
        &ys,
    )
    .unwrap();
    assert!(r.passed, "{}", r.summary_line());
    worst = worst.max(r.max_abs_diff);

    let half = 0.5f64.sqrt();
    let r = check_relationship_ii_dual_families(
        &f,
        &g,
        &ks[2],
        &[ks[0].scaled(half), ks[0].scaled(half)],
        &[ks[1].scaled(half), ks[1].scaled(half)],
        q,
        &ys,
    )
    .unwrap();
    assert!(r.passed, "{}", r.summary_line());
    worst = worst.max(r.max_abs_diff);

    println!(
        "ACCEPTANCE 8 PASS: extended three-form and dual-family four-form chains exact, max diff {worst:.3e} <= 1e-10"
    );
}

#[test]
fn criterion_09_negative_controls() {
    let grid = grid64();
    let ys = sample_check_paths(&grid, 10, &RngStream::new(SEED_CONTROL, 0xA000));
    // unit-modulus probes keep the perturbed difference at the full 1e-6
    let probe = CylinderFunctional::unit_mass(GridFunction::constant(&grid, 1.0));
    let one = GridFunction::constant(&grid, 1.0);
    let h4 = preset_kernels("H4", &grid).unwrap();
    let ks = preset_kernels("k1k2-pair", &grid).unwrap();
    let eps = 1e-6;

    let reports = vec![
        check_fubini(&probe, &h4, 1.0).unwrap(),
        check_transform_inverse(&probe, &h4[0], 1.0).unwrap(),
        check_transform_q_composition(&probe, &h4[0], &[3.0, -6.0, 2.0], &ys).unwrap(),
        check_transform_kernel_composition(&probe, &h4, 1.0, &ys).unwrap(),
        check_transform_mixed_composition(
            &probe,
            &[one.clone(), one.clone()],
            &[one.scaled(std::f64::consts::SQRT_2)],
            1.0,
            2.0,
            &ys,
        )
        .unwrap(),
        check_relationship_i(&probe, &probe, &ks[2], &ks[0], &ks[1], 1.0, &ys).unwrap(),
        check_relationship_ii(&probe, &probe, &ks[2], &ks[0], &ks[1], 1.0, &ys).unwrap(),
        check_relationship_ii_extended(&probe, &probe, &[ks[2].clone()], &ks[0], &ks[1], 1.0, &ys)
            .unwrap(),
        check_relationship_ii_dual_families(
            &probe,
            &probe,
            &one,
            &[one.clone()],
            &[one.clone()],
            1.0,
            &ys,
        )
        .unwrap(),
    ];
    for r in &reports {
        assert!(r.passed, "control baseline must pass: {}", r.summary_line());
        let flipped = r.with_lhs_phase_perturbation(eps);
        assert!(
            !flipped.passed,
            "perturbing {} by {eps:e} must flip it, diff {:e} vs threshold {:e}",
            r.name, flipped.max_abs_diff, flipped.threshold
        );
    }

    // MC oracle corrupted by ten combined standard errors
    let f = random_functional(&grid, 3, &RngStream::new(SEED_CONTROL, 1));
    let h = random_kernel(&grid, &RngStream::new(SEED_CONTROL, 2));
    let est = yeh_wiener_mc(&f, &h, 1.0, 10_000, &RngStream::new(SEED_CONTROL, 1 << 32)).unwrap();
    let oracle = closed_form_real_lambda(&f, &h, 1.0).unwrap();
    assert!(mc_report("mc", &est, oracle).passed);
    let corrupted = oracle + Complex64::new(10.0 * est.se_re, 0.0);
    assert!(!mc_report("mc", &est, corrupted).passed);

    println!(
        "ACCEPTANCE 9 PASS: 1e-6 phase perturbation flips all {} exact checks; 10-sigma oracle shift flips the MC check",
        reports.len()
    );
}

#[test]
fn criterion_10_cli_reproducibility() {
    let dir = std::env::temp_dir().join(format!("yf-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    let run_suite = |tag: &str, workers: &str| -> (String, String) {
        let report: PathBuf = dir.join(format!("report-{tag}.txt"));
        let json: PathBuf = dir.join(format!("report-{tag}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_yeh-feynman"))
            .args([
                "suite",
                "--seed",
                "13",
                "--samples",
                "6000",
                "--workers",
                workers,
                "--report",
                report.to_str().unwrap(),
                "--json",
                json.to_str().unwrap(),
            ])
            .output()
            .expect("suite runs");
        assert!(
            out.status.success(),
            "suite failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        (read(&report), read(&json))
    };

    let first = run_suite("run1", "1");
    let second = run_suite("run2", "1");
    assert_eq!(first, second, "same seed must give byte-identical reports");

    let eight = run_suite("run3", "8");
    assert_eq!(first, eight, "worker count must not change any result");
    assert!(first.0.contains("SUITE PASS"));

    println!(
        "ACCEPTANCE 10 PASS: full suite byte-identical across repeated runs and workers 1 vs 8"
    );
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}
