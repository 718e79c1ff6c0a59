//! Yeh-Feynman integrals of cylinder functionals: exact closed forms at both
//! real and Feynman variance parameters, Monte Carlo estimates at real
//! `lambda > 0` (the regime where the integral is a genuine Gaussian
//! expectation), iterated integrals, and the variance-parameter algebra.
//!
//! Monte Carlo accumulation is chunked: samples are processed in fixed-size
//! chunks, each chunk sequentially, and chunk statistics are folded in chunk
//! order. Workers parallelize over whole chunks, so estimates are bit
//! identical for every worker count, and a sequential prefix scan (used for
//! convergence output) reproduces the parallel result exactly.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{CylinderFunctional, FeynmanParameter};
use crate::error::{Error, Result};
use crate::grid::{combine_kernels, GridFunction};
use crate::sheet::{gaussian_path, sample_sheet, RngStream};

/// Samples per accumulation chunk. Fixed: it is part of the reproducibility
/// contract, not a tuning knob.
pub const MC_CHUNK: u64 = 4096;

/// A Monte Carlo mean with per-component standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: Complex64,
    pub se_re: f64,
    pub se_im: f64,
    pub n: u64,
    pub seed: u64,
}

impl MCEstimate {
    /// Distance to a reference value in units of combined standard errors,
    /// maximized over the real and imaginary components. Components with
    /// zero combined error count 0 when they agree exactly and infinity
    /// otherwise.
    pub fn sigma_distance(&self, reference: Complex64, reference_se: (f64, f64)) -> f64 {
        let d_re = (self.mean.re - reference.re).abs();
        let d_im = (self.mean.im - reference.im).abs();
        let s_re = self.se_re.hypot(reference_se.0);
        let s_im = self.se_im.hypot(reference_se.1);
        let ratio = |d: f64, s: f64| {
            if s > 0.0 {
                d / s
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        ratio(d_re, s_re).max(ratio(d_im, s_im))
    }
}

/// Plain sums over one chunk of samples; merging is associative and the fold
/// order is fixed, which is what makes the estimates deterministic.
#[derive(Debug, Clone, Copy, Default)]
struct RunningStats {
    n: u64,
    sum_re: f64,
    sum_im: f64,
    sum_sq_re: f64,
    sum_sq_im: f64,
}

impl RunningStats {
    fn push(&mut self, z: Complex64) {
        self.n += 1;
        self.sum_re += z.re;
        self.sum_im += z.im;
        self.sum_sq_re += z.re * z.re;
        self.sum_sq_im += z.im * z.im;
    }

    fn merge(self, other: RunningStats) -> RunningStats {
        RunningStats {
            n: self.n + other.n,
            sum_re: self.sum_re + other.sum_re,
            sum_im: self.sum_im + other.sum_im,
            sum_sq_re: self.sum_sq_re + other.sum_sq_re,
            sum_sq_im: self.sum_sq_im + other.sum_sq_im,
        }
    }

    fn estimate(&self, seed: u64) -> MCEstimate {
        let n = self.n as f64;
        let mean = Complex64::new(self.sum_re / n, self.sum_im / n);
        let se = |sum: f64, sum_sq: f64| {
            if self.n < 2 {
                return 0.0;
            }
            let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        };
        MCEstimate {
            mean,
            se_re: se(self.sum_re, self.sum_sq_re),
            se_im: se(self.sum_im, self.sum_sq_im),
            n: self.n,
            seed,
        }
    }
}

fn chunk_bounds(n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < n {
        let end = (start + MC_CHUNK).min(n);
        out.push((start, end));
        start = end;
    }
    out
}

/// Chunked mean of `eval(i)` for `i in 0..n`. Chunks run in parallel, folding
/// stays in chunk order.
fn mc_run<F>(n: u64, eval: F) -> RunningStats
where
    F: Fn(u64) -> Complex64 + Sync,
{
    chunk_bounds(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut stats = RunningStats::default();
            for i in lo..hi {
                stats.push(eval(i));
            }
            stats
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(RunningStats::default(), RunningStats::merge)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    Ok(())
}

fn check_samples(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    Ok(())
}

/// Closed form of the integral at an arbitrary variance parameter:
/// `sum_j c_j * phase(||u_j h||^2)`.
pub fn closed_form(
    f: &CylinderFunctional,
    h: &GridFunction,
    param: FeynmanParameter,
) -> Result<Complex64> {
    f.grid().check_same(h.grid(), "closed_form")?;
    let mut acc = Complex64::new(0.0, 0.0);
    for a in f.measure().atoms() {
        let norm_sq = a.atom.pointwise_mul(h).expect("same grid").l2_norm_sq();
        acc += a.weight * param.phase_factor(norm_sq);
    }
    Ok(acc)
}

/// The analytic Yeh-Feynman integral with kernel `h` and parameter `q`:
/// `sum_j c_j exp{-i ||u_j h||^2 / (2q)}`.
pub fn feynman_closed_form(
    f: &CylinderFunctional,
    h: &GridFunction,
    q: f64,
) -> Result<Complex64> {
    closed_form(f, h, FeynmanParameter::feynman_q(q)?)
}

/// The Yeh-Wiener integral at real `lambda > 0`:
/// `sum_j c_j exp{-||u_j h||^2 / (2 lambda)}`. This is the quantity the Monte
/// Carlo estimator converges to, and the function the Feynman integral
/// analytically continues.
pub fn closed_form_real_lambda(
    f: &CylinderFunctional,
    h: &GridFunction,
    lambda: f64,
) -> Result<Complex64> {
    closed_form(f, h, FeynmanParameter::real_lambda(lambda)?)
}

/// Monte Carlo estimate of `E[F(lambda^{-1/2} Y_h(x))]` over `n` sheets.
/// Sample `i` draws from `stream.offset(i)`.
pub fn yeh_wiener_mc(
    f: &CylinderFunctional,
    h: &GridFunction,
    lambda: f64,
    n: u64,
    stream: &RngStream,
) -> Result<MCEstimate> {
    check_lambda(lambda)?;
    check_samples(n)?;
    f.grid().check_same(h.grid(), "yeh_wiener_mc")?;
    let grid = *f.grid();
    let rho = 1.0 / lambda.sqrt();
    let stats = mc_run(n, |i| {
        let x = sample_sheet(&grid, &stream.offset(i));
        let y = gaussian_path(h, &x).expect("same grid").scaled(rho);
        f.evaluate(&y).expect("same grid")
    });
    Ok(stats.estimate(stream.seed()))
}

/// Closed form of the iterated integral over a kernel list at one `q`:
/// `sum_j c_j exp{-i/(2q) * sum_m ||u_j h_m||^2}`. Equals the single-kernel
/// form under the combination `s(H)`.
pub fn iterated_closed_form(
    f: &CylinderFunctional,
    kernels: &[GridFunction],
    q: f64,
) -> Result<Complex64> {
    if q == 0.0 || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be nonzero and finite, got {q}")));
    }
    if kernels.is_empty() {
        return Err(Error::InvalidArgument("iterated_closed_form: empty kernel list".into()));
    }
    for h in kernels {
        f.grid().check_same(h.grid(), "iterated_closed_form")?;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in f.measure().atoms() {
        let mut norm_sq_total = 0.0;
        for h in kernels {
            norm_sq_total += a.atom.pointwise_mul(h).expect("same grid").l2_norm_sq();
        }
        acc += a.weight * Complex64::cis(-norm_sq_total / (2.0 * q));
    }
    Ok(acc)
}

/// Nested Monte Carlo estimate of the two-kernel iterated integral
/// `E_{x2}[ E_{x1}[ F(l1^{-1/2} Y_{h1}(x1) + l2^{-1/2} Y_{h2}(x2)) ] ]`.
///
/// Each outer draw carries `n_inner` fresh inner sheets; the estimate and
/// standard errors are computed over the outer-level means, which stays
/// unbiased for any `n_inner >= 1`. Outer draw `i` uses stream offset
/// `i*(n_inner+1)`, its inner draws the following `n_inner` offsets.
pub fn iterated_mc_two_kernels(
    f: &CylinderFunctional,
    h1: &GridFunction,
    h2: &GridFunction,
    lambda1: f64,
    lambda2: f64,
    n_outer: u64,
    n_inner: u64,
    stream: &RngStream,
) -> Result<MCEstimate> {
    check_lambda(lambda1)?;
    check_lambda(lambda2)?;
    check_samples(n_outer)?;
    if n_inner == 0 {
        return Err(Error::InvalidArgument("n_inner must be at least 1".into()));
    }
    f.grid().check_same(h1.grid(), "iterated_mc h1")?;
    f.grid().check_same(h2.grid(), "iterated_mc h2")?;
    let grid = *f.grid();
    let rho1 = 1.0 / lambda1.sqrt();
    let rho2 = 1.0 / lambda2.sqrt();
    let stride = n_inner + 1;
    let stats = mc_run(n_outer, |i| {
        let x2 = sample_sheet(&grid, &stream.offset(i * stride));
        let y2 = gaussian_path(h2, &x2).expect("same grid").scaled(rho2);
        let mut inner = Complex64::new(0.0, 0.0);
        for j in 0..n_inner {
            let x1 = sample_sheet(&grid, &stream.offset(i * stride + 1 + j));
            let y1 = gaussian_path(h1, &x1).expect("same grid").scaled(rho1);
            inner += f.evaluate(&y1.add(&y2).expect("same grid")).expect("same grid");
        }
        inner / n_inner as f64
    });
    Ok(stats.estimate(stream.seed()))
}

/// The composed variance parameter `alpha_n = (1/q_1 + ... + 1/q_n)^{-1}`.
///
/// Every partial sum `1/q_1 + ... + 1/q_k`, `k >= 2`, must stay away from
/// zero; a vanishing partial sum means the corresponding iterated integral
/// does not exist.
pub fn alpha_n(qs: &[f64]) -> Result<f64> {
    if qs.is_empty() {
        return Err(Error::InvalidArgument("alpha_n: empty parameter list".into()));
    }
    for &q in qs {
        if q == 0.0 || !q.is_finite() {
            return Err(Error::InvalidArgument(format!("q must be nonzero and finite, got {q}")));
        }
    }
    if qs.len() == 1 {
        return Ok(qs[0]);
    }
    let mut sum = 0.0;
    let mut scale = 0.0;
    for (k, &q) in qs.iter().enumerate() {
        sum += 1.0 / q;
        scale += (1.0 / q).abs();
        if k >= 1 && sum.abs() <= 1e-12 * scale {
            return Err(Error::DegenerateParameter(format!(
                "partial sum 1/q_1 + ... + 1/q_{} vanishes",
                k + 1
            )));
        }
    }
    Ok(1.0 / sum)
}

/// One checkpoint of a running Monte Carlo mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: u64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub se_re: f64,
    pub se_im: f64,
}

/// Running means of the [`yeh_wiener_mc`] estimator at powers-of-two sample
/// counts (plus the final count). Uses the same streams and the same chunked
/// accumulation, so the last row equals the full estimate exactly.
pub fn convergence_rows(
    f: &CylinderFunctional,
    h: &GridFunction,
    lambda: f64,
    n: u64,
    stream: &RngStream,
) -> Result<Vec<ConvergenceRow>> {
    check_lambda(lambda)?;
    check_samples(n)?;
    f.grid().check_same(h.grid(), "convergence_rows")?;
    let grid = *f.grid();
    let rho = 1.0 / lambda.sqrt();
    let mut checkpoints: Vec<u64> = Vec::new();
    let mut c = 1u64;
    while c <= n {
        checkpoints.push(c);
        match c.checked_mul(2) {
            Some(next) => c = next,
            None => break,
        }
    }
    if *checkpoints.last().unwrap() != n {
        checkpoints.push(n);
    }

    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut completed = RunningStats::default();
    let mut chunk = RunningStats::default();
    let mut next_checkpoint = 0usize;
    for i in 0..n {
        let x = sample_sheet(&grid, &stream.offset(i));
        let y = gaussian_path(h, &x).expect("same grid").scaled(rho);
        chunk.push(f.evaluate(&y).expect("same grid"));
        if (i + 1) == checkpoints[next_checkpoint] {
            let est = completed.merge(chunk).estimate(stream.seed());
            rows.push(ConvergenceRow {
                n: i + 1,
                mean_re: est.mean.re,
                mean_im: est.mean.im,
                se_re: est.se_re,
                se_im: est.se_im,
            });
            next_checkpoint += 1;
        }
        if (i + 1) % MC_CHUNK == 0 {
            completed = completed.merge(chunk);
            chunk = RunningStats::default();
        }
    }
    Ok(rows)
}

/// Grid-level `s(h1, h2)` shortcut used by the two-kernel checks.
pub fn combined_pair(h1: &GridFunction, h2: &GridFunction) -> Result<GridFunction> {
    combine_kernels(&[h1.clone(), h2.clone()])
}
