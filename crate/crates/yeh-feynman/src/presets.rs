//! Named kernel presets used throughout the checks and the CLI.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

/// Names accepted by [`preset_kernels`].
pub const PRESET_NAMES: [&str; 4] = ["one", "H4", "trig-pair", "k1k2-pair"];

/// Resolve a preset name to its kernel family on the given grid.
///
/// * `one` - the single kernel `h = 1`; the driving process is the sheet itself.
/// * `H4` - four kernels whose combination is `sqrt(2) |sin s cos t|`.
/// * `trig-pair` - an angle-sum pair with combination identically 1
///   (arguments `2 pi s / T`, `2 pi t / T`).
/// * `k1k2-pair` - `[k1, k2, h]` with `k1 k2 = h^2` everywhere, the worked
///   hypothesis for the transform/convolution relationships.
pub fn preset_kernels(name: &str, grid: &GridSpec) -> Result<Vec<GridFunction>> {
    let period = grid.t_extent();
    let w = 2.0 * PI / period;
    match name {
        "one" => Ok(vec![GridFunction::constant(grid, 1.0)]),
        "H4" => Ok(vec![
            GridFunction::sample(grid, |s, t| s.sin().powi(2) * t.cos())?,
            GridFunction::sample(grid, |s, t| s.sin() * s.cos() * t.cos())?,
            GridFunction::sample(grid, |s, t| s.sin() * t.sin() * t.cos())?,
            GridFunction::sample(grid, |s, t| s.sin() * t.cos().powi(2))?,
        ]),
        "trig-pair" => Ok(vec![
            GridFunction::sample(grid, |s, t| {
                (w * s).sin() * (w * t).sin() - (w * s).cos() * (w * t).cos()
            })?,
            GridFunction::sample(grid, |s, t| {
                (w * s).sin() * (w * t).cos() + (w * s).cos() * (w * t).sin()
            })?,
        ]),
        "k1k2-pair" => Ok(vec![
            GridFunction::sample(grid, |s, t| {
                4.0 * (w * s).sin().powi(2) * (w * t).sin().powi(2)
            })?,
            GridFunction::sample(grid, |s, t| {
                4.0 * (w * s).cos().powi(2) * (w * t).cos().powi(2)
            })?,
            GridFunction::sample(grid, |s, t| (2.0 * w * s).sin() * (2.0 * w * t).sin())?,
        ]),
        other => Err(Error::InvalidArgument(format!(
            "unknown kernel preset '{other}' (expected one of {PRESET_NAMES:?})"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_resolve() {
        let g = GridSpec::default_unit();
        for name in PRESET_NAMES {
            let ks = preset_kernels(name, &g).unwrap();
            assert!(!ks.is_empty());
        }
        assert!(preset_kernels("nope", &g).is_err());
    }

    #[test]
    fn k1k2_pair_satisfies_hypothesis() {
        // k1 * k2 = h^2 cellwise, and none of the three vanish at a midpoint
        // of the default even-sized grid.
        let g = GridSpec::default_unit();
        let ks = preset_kernels("k1k2-pair", &g).unwrap();
        let (k1, k2, h) = (&ks[0], &ks[1], &ks[2]);
        let prod = k1.pointwise_mul(k2).unwrap();
        let h_sq = h.pointwise_mul(h).unwrap();
        for (a, b) in prod.values().iter().zip(h_sq.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(!k1.has_zero_cell());
        assert!(!k2.has_zero_cell());
        assert!(!h.has_zero_cell());
    }
}
