//! Run configuration: TOML file, flag overrides, validation. Flags win over
//! the file, the file wins over the `YEH_FEYNMAN_SEED` environment variable
//! and the built-in defaults. Validation happens before any computation.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::Deserialize;
use yeh_feynman::expr::KernelExpr;
use yeh_feynman::formats::{functional_from_json, AtomDoc, FunctionalDoc};
use yeh_feynman::presets::{preset_kernels, PRESET_NAMES};
use yeh_feynman::{CylinderFunctional, GridFunction, GridSpec};

pub const SEED_ENV_VAR: &str = "YEH_FEYNMAN_SEED";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub n_samples: Option<u64>,
    pub q: Option<f64>,
    pub lambda: Option<f64>,
    pub workers: Option<usize>,
    pub kernels: Option<Vec<String>>,
    pub checks: Option<Vec<String>>,
    pub grid: Option<GridConfig>,
    pub functionals: Option<Vec<FunctionalSpec>>,
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "S", default = "default_extent")]
    pub s_extent: f64,
    #[serde(rename = "T", default = "default_extent")]
    pub t_extent: f64,
    #[serde(default = "default_cells")]
    pub ns: usize,
    #[serde(default = "default_cells")]
    pub nt: usize,
}

fn default_extent() -> f64 {
    1.0
}

fn default_cells() -> usize {
    64
}

/// A functional is either inline atoms or a reference to a JSON document.
#[derive(Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum FunctionalSpec {
    File { file: PathBuf },
    Inline { atoms: Vec<AtomDoc> },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub report: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// Scalar overrides coming from the command line.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub grid: Option<String>,
    pub q: Option<f64>,
    pub lambda: Option<f64>,
    pub workers: Option<usize>,
}

/// Fully resolved and validated run configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub seed: u64,
    pub n_samples: u64,
    pub q: f64,
    pub lambda: f64,
    pub workers: usize,
    pub kernel_specs: Vec<String>,
    pub functionals: Vec<CylinderFunctional>,
    pub checks: Vec<String>,
    pub out_report: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(config_path: Option<&Path>, overrides: &Overrides) -> anyhow::Result<Self> {
        let file: FileConfig = match config_path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => FileConfig::default(),
        };

        let env_seed = std::env::var(SEED_ENV_VAR)
            .ok()
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| anyhow!("{SEED_ENV_VAR} must be an integer, got '{v}'"))
            })
            .transpose()?;

        let grid = match (&overrides.grid, &file.grid) {
            (Some(spec), file_grid) => {
                let (ns, nt) = parse_grid_flag(spec)?;
                let (s, t) = file_grid
                    .as_ref()
                    .map(|g| (g.s_extent, g.t_extent))
                    .unwrap_or((1.0, 1.0));
                GridSpec::new(s, t, ns, nt)?
            }
            (None, Some(g)) => GridSpec::new(g.s_extent, g.t_extent, g.ns, g.nt)?,
            (None, None) => GridSpec::default_unit(),
        };

        let seed = overrides.seed.or(file.seed).or(env_seed).unwrap_or(42);
        let n_samples = overrides.samples.or(file.n_samples).unwrap_or(100_000);
        let q = overrides.q.or(file.q).unwrap_or(1.0);
        let lambda = overrides.lambda.or(file.lambda).unwrap_or(1.0);
        let workers = overrides.workers.or(file.workers).unwrap_or(0);

        if q == 0.0 || !q.is_finite() {
            bail!("q must be nonzero and finite, got {q}");
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            bail!("lambda must be positive and finite, got {lambda}");
        }
        if n_samples < 2 {
            bail!("n_samples must be at least 2, got {n_samples}");
        }

        let kernel_specs = file.kernels.unwrap_or_else(|| vec!["H4".to_string()]);
        // every referenced preset or expression must resolve up front
        for spec in &kernel_specs {
            resolve_kernel_family(spec, &grid)
                .with_context(|| format!("kernel spec '{spec}'"))?;
        }

        let config_dir = config_path.and_then(Path::parent);
        let mut functionals = Vec::new();
        for spec in file.functionals.unwrap_or_default() {
            functionals.push(resolve_functional(&spec, &grid, config_dir)?);
        }

        let checks = file.checks.unwrap_or_default();

        let output = file.output.unwrap_or_default();
        let rebase = |p: PathBuf| match (&config_dir, p.is_absolute()) {
            (Some(dir), false) => dir.join(p),
            _ => p,
        };

        Ok(Self {
            grid,
            seed,
            n_samples,
            q,
            lambda,
            workers,
            kernel_specs,
            functionals,
            checks,
            out_report: output.report.map(rebase),
            out_json: output.json.map(rebase),
            out_csv: output.csv.map(rebase),
        })
    }
}

fn parse_grid_flag(spec: &str) -> anyhow::Result<(usize, usize)> {
    let (ns, nt) = spec
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("--grid expects NSxNT, got '{spec}'"))?;
    Ok((
        ns.trim().parse().with_context(|| format!("--grid '{spec}'"))?,
        nt.trim().parse().with_context(|| format!("--grid '{spec}'"))?,
    ))
}

/// Resolve a kernel spec: a preset name yields its whole family, anything
/// else is parsed as an expression in `s`, `t`.
pub fn resolve_kernel_family(spec: &str, grid: &GridSpec) -> anyhow::Result<Vec<GridFunction>> {
    if PRESET_NAMES.contains(&spec) {
        return Ok(preset_kernels(spec, grid)?);
    }
    let kernel = KernelExpr::parse(spec)?.sample(grid)?;
    Ok(vec![kernel])
}

/// Resolve several kernel specs into one flat family.
pub fn resolve_kernels(specs: &[String], grid: &GridSpec) -> anyhow::Result<Vec<GridFunction>> {
    let mut out = Vec::new();
    for spec in specs {
        out.extend(resolve_kernel_family(spec, grid)?);
    }
    if out.is_empty() {
        bail!("no kernels resolved");
    }
    // kernels are expected nonzero a.e.; on the grid that means every midpoint
    for (spec, k) in specs.iter().zip(&out) {
        if k.has_zero_cell() {
            eprintln!("warning: kernel '{spec}' vanishes at some grid midpoint");
        }
    }
    Ok(out)
}

fn resolve_functional(
    spec: &FunctionalSpec,
    grid: &GridSpec,
    config_dir: Option<&Path>,
) -> anyhow::Result<CylinderFunctional> {
    match spec {
        FunctionalSpec::File { file } => {
            let path = match (config_dir, file.is_absolute()) {
                (Some(dir), false) => dir.join(file),
                _ => file.clone(),
            };
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading functional {}", path.display()))?;
            Ok(functional_from_json(&text, grid)?)
        }
        FunctionalSpec::Inline { atoms } => {
            let doc = FunctionalDoc { atoms: atoms.clone() };
            Ok(doc.to_functional(grid)?)
        }
    }
}

/// Load a functional from a JSON file given on the command line.
pub fn load_functional(path: &Path, grid: &GridSpec) -> anyhow::Result<CylinderFunctional> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading functional {}", path.display()))?;
    Ok(functional_from_json(&text, grid)?)
}
