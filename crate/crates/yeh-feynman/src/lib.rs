//! Functional integration on two-parameter Wiener space.
//!
//! The crate simulates Brownian sheets on a rectangle `Q = [0,S] x [0,T]`,
//! evaluates cylinder functionals `F(x) = sum_j c_j exp{i <u_j, x>}` of the
//! Banach algebra `S(L2(Q))`, and computes their Yeh-Feynman integrals,
//! Fourier-Yeh-Feynman transforms, and convolution products with respect to
//! Gaussian processes `Y_h` driven by L2 kernels. Every Fubini and
//! transform/convolution identity is checkable two ways:
//!
//! * exactly, at the level of discrete measures (finite sums of
//!   phase-weighted exponentials), through [`checks`];
//! * statistically, by Monte Carlo over sampled sheets at real variance
//!   parameters, through [`feynman`].
//!
//! Functions on `Q` live at cell midpoints and paths live as cell
//! increments, which turns the key stochastic-integral identity
//! `<a, Y_h(x)> = <a h, x>` into cellwise arithmetic. All sampling is keyed
//! by explicit [`sheet::RngStream`] values and Monte Carlo accumulation is
//! chunk-ordered, so every result is reproducible bit for bit regardless of
//! the worker count.

pub mod algebra;
pub mod checks;
pub mod error;
pub mod expr;
pub mod feynman;
pub mod formats;
pub mod grid;
pub mod presets;
pub mod sheet;

pub use algebra::{
    gcp, gfyft, gfyft_composed, scaled_product, CylinderFunctional, DiscreteMeasure,
    FeynmanParameter, WeightedAtom,
};
pub use checks::{CheckMode, CheckReport};
pub use error::{Error, Result};
pub use feynman::{
    alpha_n, closed_form_real_lambda, feynman_closed_form, iterated_closed_form,
    iterated_mc_two_kernels, yeh_wiener_mc, ConvergenceRow, MCEstimate,
};
pub use grid::{combine_kernels, GridFunction, GridSpec};
pub use sheet::{
    empirical_process_covariance, gaussian_path, pwz_integral, sample_sheet, RngStream, SheetPath,
};
