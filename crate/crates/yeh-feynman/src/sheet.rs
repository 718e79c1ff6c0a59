//! Brownian sheets and the stochastic integrals driving everything else.
//!
//! The discrete Yeh-Wiener measure lives on per-cell increments: each cell of
//! the grid carries an independent centered Gaussian increment with variance
//! equal to the cell area. The path value at a point is the sum of the
//! increments over the window `[0,s] x [0,t]` (cells counted by midpoint), so
//! `x(0,t) = x(s,0) = 0` holds structurally.
//!
//! The PWZ stochastic integral `<v, x>` is the Riemann-Stieltjes sum of the
//! midpoint values of `v` against the increments. With functions at midpoints
//! and paths as increments, `<a, Y_h(x)> = <a h, x>` is a cellwise identity,
//! exact in floating point up to multiplication rounding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

/// A reproducible random stream: `(seed, stream id)` identifies the sequence.
///
/// Streams are ChaCha8 counter streams; normal variates are drawn through the
/// ziggurat transform of `rand_distr::StandardNormal`. Both are fixed by the
/// pinned dependency versions, so identical `(seed, stream)` pairs reproduce
/// identical samples on every run and every worker layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// The same seed, `delta` streams further on. Monte Carlo drivers hand
    /// each sample its own offset stream, which keeps parallel sampling
    /// reproducible independent of the worker count.
    pub fn offset(&self, delta: u64) -> Self {
        Self { seed: self.seed, stream: self.stream.wrapping_add(delta) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// A sample path stored as per-cell increments (flat-index order).
///
/// Both raw Brownian sheets and kernel-driven process paths `Y_h(x; .)` are
/// carried by this type; [`gaussian_path`] maps one to the other.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetPath {
    grid: GridSpec,
    increments: Vec<f64>,
}

impl SheetPath {
    pub fn zero(grid: &GridSpec) -> Self {
        Self { grid: *grid, increments: vec![0.0; grid.n_cells()] }
    }

    pub fn from_increments(grid: &GridSpec, increments: Vec<f64>) -> Result<Self> {
        if increments.len() != grid.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "increment array has length {}, grid has {} cells",
                increments.len(),
                grid.n_cells()
            )));
        }
        Ok(Self { grid: *grid, increments })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Path value `x(s,t)`: sum of the increments of all cells whose midpoint
    /// lies in `[0,s] x [0,t]`.
    pub fn value_at(&self, s: f64, t: f64) -> Result<f64> {
        if !self.grid.contains(s, t) {
            return Err(Error::InvalidArgument(format!("point ({s}, {t}) lies outside Q")));
        }
        let mut sum = 0.0;
        for (idx, (ms, mt)) in self.grid.midpoints().enumerate() {
            if ms <= s && mt <= t {
                sum += self.increments[idx];
            }
        }
        Ok(sum)
    }

    /// Path values at the `(ns+1) x (nt+1)` grid nodes, row-by-row in `t`
    /// (node `(i,j)` at flat position `j*(ns+1)+i`). The `i=0` and `j=0`
    /// edges are exactly zero.
    pub fn node_values(&self) -> Vec<f64> {
        let (ns, nt) = (self.grid.ns(), self.grid.nt());
        let mut nodes = vec![0.0; (ns + 1) * (nt + 1)];
        for j in 1..=nt {
            let mut row_acc = 0.0;
            for i in 1..=ns {
                // sum over the cell column above: increments[(j-1)*ns + (i-1)]
                row_acc += self.increments[(j - 1) * ns + (i - 1)];
                nodes[j * (ns + 1) + i] = nodes[(j - 1) * (ns + 1) + i] + row_acc;
            }
        }
        nodes
    }

    /// Increments multiplied by `rho`; by PWZ linearity this is the path
    /// `rho * x`.
    pub fn scaled(&self, rho: f64) -> SheetPath {
        let increments = self.increments.iter().map(|d| rho * d).collect();
        SheetPath { grid: self.grid, increments }
    }

    /// Cellwise sum of two paths on the same grid.
    pub fn add(&self, other: &SheetPath) -> Result<SheetPath> {
        self.grid.check_same(&other.grid, "path add")?;
        let increments = self
            .increments
            .iter()
            .zip(&other.increments)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SheetPath { grid: self.grid, increments })
    }
}

/// Draw one Brownian sheet from the discrete Yeh-Wiener measure: independent
/// `N(0, cellArea)` increments, in flat-index order of the stream.
pub fn sample_sheet(grid: &GridSpec, stream: &RngStream) -> SheetPath {
    let sd = grid.cell_area().sqrt();
    let mut rng = stream.rng();
    let increments = (0..grid.n_cells())
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    SheetPath { grid: *grid, increments }
}

/// The PWZ stochastic integral `<v, x>` as the discrete Riemann-Stieltjes sum
/// `sum_cells v * dx`.
pub fn pwz_integral(v: &GridFunction, x: &SheetPath) -> Result<f64> {
    v.grid().check_same(x.grid(), "pwz_integral")?;
    Ok(v.values().iter().zip(x.increments()).map(|(a, d)| a * d).sum())
}

/// The Gaussian process path `Y_h(x; .)` with kernel `h`: increments `h * dx`.
///
/// Its value at `(s,t)` is then the PWZ integral of the windowed kernel
/// `chi_{[0,s]x[0,t]} h` against `x`.
pub fn gaussian_path(h: &GridFunction, x: &SheetPath) -> Result<SheetPath> {
    h.grid().check_same(x.grid(), "gaussian_path")?;
    let increments = h.values().iter().zip(x.increments()).map(|(a, d)| a * d).collect();
    Ok(SheetPath { grid: *x.grid(), increments })
}

/// Sample mean of `Y_{h1}(x; p) * Y_{h2}(x; p')` over `n` sheets; converges to
/// the integral of `h1*h2` over `[0, min s] x [0, min t]`.
pub fn empirical_process_covariance(
    h1: &GridFunction,
    h2: &GridFunction,
    p: (f64, f64),
    p_prime: (f64, f64),
    n: u64,
    stream: &RngStream,
) -> Result<f64> {
    h1.grid().check_same(h2.grid(), "empirical_process_covariance")?;
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let grid = *h1.grid();
    let w1 = h1.windowed(p.0, p.1)?;
    let w2 = h2.windowed(p_prime.0, p_prime.1)?;
    let mut acc = 0.0;
    for i in 0..n {
        let x = sample_sheet(&grid, &stream.offset(i));
        let y1 = pwz_integral(&w1, &x).expect("same grid");
        let y2 = pwz_integral(&w2, &x).expect("same grid");
        acc += y1 * y2;
    }
    Ok(acc / n as f64)
}
