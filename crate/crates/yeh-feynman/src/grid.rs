//! Discretization of the rectangle `Q = [0,S] x [0,T]`.
//!
//! Real functions on `Q` (kernels `h`, atoms `u`) are stored by their values
//! at cell midpoints; quadrature is the plain midpoint rule. Sheet paths
//! (see [`crate::sheet`]) are stored as per-cell increments, so the discrete
//! stochastic-integral identities of this crate hold exactly at grid level
//! instead of up to discretization error.

use crate::error::{Error, Result};

/// Uniform partition of the rectangle `Q = [0,S] x [0,T]` into `ns x nt` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    s_extent: f64,
    t_extent: f64,
    ns: usize,
    nt: usize,
}

impl GridSpec {
    /// Build a uniform grid. `S,T > 0`, `ns,nt >= 1`.
    pub fn new(s_extent: f64, t_extent: f64, ns: usize, nt: usize) -> Result<Self> {
        if !(s_extent.is_finite() && s_extent > 0.0 && t_extent.is_finite() && t_extent > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid extents must be positive and finite, got S={s_extent}, T={t_extent}"
            )));
        }
        if ns == 0 || nt == 0 {
            return Err(Error::InvalidArgument(format!(
                "cell counts must be at least 1, got ns={ns}, nt={nt}"
            )));
        }
        Ok(Self { s_extent, t_extent, ns, nt })
    }

    /// The default desk-scale grid: `[0,1]^2` split into 64 x 64 cells.
    pub fn default_unit() -> Self {
        Self { s_extent: 1.0, t_extent: 1.0, ns: 64, nt: 64 }
    }

    pub fn s_extent(&self) -> f64 {
        self.s_extent
    }

    pub fn t_extent(&self) -> f64 {
        self.t_extent
    }

    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Cell width along `s`.
    pub fn ds(&self) -> f64 {
        self.s_extent / self.ns as f64
    }

    /// Cell height along `t`.
    pub fn dt(&self) -> f64 {
        self.t_extent / self.nt as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.ds() * self.dt()
    }

    pub fn n_cells(&self) -> usize {
        self.ns * self.nt
    }

    /// Flat index of cell `(i, j)`; cells are stored row-by-row in `t`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.ns && j < self.nt);
        j * self.ns + i
    }

    /// Midpoint of cell `(i, j)`.
    #[inline]
    pub fn midpoint(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.ds(), (j as f64 + 0.5) * self.dt())
    }

    /// Cell midpoints in flat-index order.
    pub fn midpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.nt).flat_map(move |j| (0..self.ns).map(move |i| self.midpoint(i, j)))
    }

    /// Whether the point lies in `Q` (boundary included).
    pub fn contains(&self, s: f64, t: f64) -> bool {
        (0.0..=self.s_extent).contains(&s) && (0.0..=self.t_extent).contains(&t)
    }

    pub(crate) fn check_same(&self, other: &GridSpec, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{what}: {:?} vs {:?}",
                self, other
            )));
        }
        Ok(())
    }
}

/// A real function on `Q`, stored by its values at cell midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    /// Sample a pointwise map at the cell midpoints.
    pub fn sample<F: Fn(f64, f64) -> f64>(grid: &GridSpec, f: F) -> Result<Self> {
        let values: Vec<f64> = grid.midpoints().map(|(s, t)| f(s, t)).collect();
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let j = pos / grid.ns();
            let i = pos % grid.ns();
            let (s, t) = grid.midpoint(i, j);
            return Err(Error::NonFinite(format!(
                "sampled function is not finite at midpoint ({s}, {t})"
            )));
        }
        Ok(Self { grid: *grid, values })
    }

    /// The constant function `c` on `Q`.
    pub fn constant(grid: &GridSpec, c: f64) -> Self {
        assert!(c.is_finite(), "constant grid function must be finite");
        Self { grid: *grid, values: vec![c; grid.n_cells()] }
    }

    /// Wrap an explicit midpoint-value array (flat-index order).
    pub fn from_values(grid: &GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "value array has length {}, grid has {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("value array contains a non-finite entry".into()));
        }
        Ok(Self { grid: *grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Midpoint-rule inner product `(u, v)_2 = sum u*v*cellArea`.
    pub fn l2_inner(&self, other: &GridFunction) -> Result<f64> {
        self.grid.check_same(&other.grid, "l2_inner")?;
        let area = self.grid.cell_area();
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * area)
    }

    /// Squared L2 norm `(u, u)_2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|a| a * a).sum::<f64>() * self.grid.cell_area()
    }

    /// Cellwise product `u*h`.
    pub fn pointwise_mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(&other.grid, "pointwise_mul")?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    /// Cellwise sum `u + v`.
    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(&other.grid, "add")?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    /// Cellwise difference `u - v`.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(&other.grid, "sub")?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    /// Cellwise scaling `c*u`.
    pub fn scaled(&self, c: f64) -> GridFunction {
        let values = self.values.iter().map(|a| c * a).collect();
        GridFunction { grid: self.grid, values }
    }

    /// Apply a finite map cellwise.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<GridFunction> {
        let values: Vec<f64> = self.values.iter().map(|&a| f(a)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mapped grid function has a non-finite entry".into()));
        }
        Ok(GridFunction { grid: self.grid, values })
    }

    /// Restriction `chi_{[0,s] x [0,t]} * h`: cells whose midpoint lies
    /// outside the window are zeroed.
    pub fn windowed(&self, s: f64, t: f64) -> Result<GridFunction> {
        if !self.grid.contains(s, t) {
            return Err(Error::InvalidArgument(format!(
                "window corner ({s}, {t}) lies outside Q"
            )));
        }
        let values = self
            .grid
            .midpoints()
            .zip(&self.values)
            .map(|((ms, mt), &v)| if ms <= s && mt <= t { v } else { 0.0 })
            .collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    /// True when some midpoint value vanishes. Kernels are expected to be
    /// nonzero a.e.; on the grid this means nonzero at every midpoint, and
    /// callers surface a warning (not an error) when it fails.
    pub fn has_zero_cell(&self) -> bool {
        self.values.iter().any(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }
}

/// The kernel-combination operator `s(H)`: the nonnegative cellwise square
/// root of `h_1^2 + ... + h_n^2`.
///
/// Any function whose square equals the sum of squares would do; every
/// downstream quantity depends only on `s^2(H)`, so the nonnegative root is
/// fixed as the convention here.
pub fn combine_kernels(kernels: &[GridFunction]) -> Result<GridFunction> {
    let first = kernels
        .first()
        .ok_or_else(|| Error::InvalidArgument("combine_kernels: empty kernel list".into()))?;
    let grid = *first.grid();
    let mut sum_sq = vec![0.0f64; grid.n_cells()];
    for k in kernels {
        grid.check_same(k.grid(), "combine_kernels")?;
        for (acc, v) in sum_sq.iter_mut().zip(k.values()) {
            *acc += v * v;
        }
    }
    let values = sum_sq.into_iter().map(f64::sqrt).collect();
    Ok(GridFunction { grid, values })
}
