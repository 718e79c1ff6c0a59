//! Command-line front end: one subcommand per verification surface. All
//! mathematics lives in the `yeh-feynman` library; this binary only resolves
//! configuration, dispatches checks, and writes reports.

mod config;
mod output;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use yeh_feynman::feynman::{convergence_rows, yeh_wiener_mc};
use yeh_feynman::{
    closed_form_real_lambda, feynman_closed_form, gaussian_path, sample_sheet,
    CylinderFunctional, GridFunction, RngStream,
};

use config::{load_functional, resolve_kernels, Overrides, RunConfig};
use suite::{SuiteContext, ALL_CHECKS};

#[derive(Parser)]
#[command(
    name = "yeh-feynman",
    version,
    about = "Simulate Brownian sheets and verify Yeh-Feynman transform/convolution identities",
    after_help = "Exit status: 0 all checks passed, 1 some check failed, 2 usage or input error."
)]
struct Cli {
    /// TOML configuration file; flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// RNG seed (also YEH_FEYNMAN_SEED; this flag wins)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo sample count
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Grid cell counts as NSxNT, e.g. 64x64
    #[arg(long, global = true, value_name = "NSxNT")]
    grid: Option<String>,

    /// Feynman variance parameter (nonzero)
    #[arg(long, global = true)]
    q: Option<f64>,

    /// Real variance parameter (positive)
    #[arg(long, global = true)]
    lambda: Option<f64>,

    /// Worker threads; 0 = available parallelism. Never affects results.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample Brownian sheets (or kernel-driven process paths) and dump
    /// them as s,t,value CSV
    Simulate {
        /// Kernel preset name or expression; omitted = raw sheet
        #[arg(long)]
        kernel: Option<String>,
        /// Number of paths
        #[arg(long, default_value_t = 1)]
        paths: u64,
        /// Output CSV (paths > 1 get numbered suffixes); stdout if omitted
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Closed-form integrals plus the Monte Carlo estimate for one
    /// functional and kernel
    Integrate {
        /// Kernel preset name or expression (first kernel of a preset family)
        #[arg(long, default_value = "one")]
        kernel: String,
        /// Functional document (JSON); default is unit mass at u = 1
        #[arg(long, value_name = "PATH")]
        functional: Option<PathBuf>,
        /// Write running-mean convergence checkpoints as CSV
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Closed-form Fubini reduction over a kernel family
    Fubini {
        /// Kernel presets or expressions (family members accumulate)
        #[arg(long = "kernels", value_name = "SPEC")]
        kernels: Vec<String>,
        #[arg(long, value_name = "PATH")]
        functional: Option<PathBuf>,
    },
    /// Transform identities: inverse, q-composition, kernel composition
    Transform {
        #[arg(long = "kernels", value_name = "SPEC")]
        kernels: Vec<String>,
        #[arg(long, value_name = "PATH")]
        functional: Option<PathBuf>,
    },
    /// Transform/convolution relationships I and II with their extensions
    Convolution {
        #[arg(long, value_name = "PATH")]
        functional: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        functional_g: Option<PathBuf>,
    },
    /// Run the named checks (default: all) and write reports
    Suite {
        /// Check name; repeatable. See --list-checks.
        #[arg(long = "check", value_name = "NAME")]
        checks: Vec<String>,
        /// Line-oriented report file
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
        /// Machine-readable JSON summary
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// List available check names and exit
        #[arg(long)]
        list_checks: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let overrides = Overrides {
        seed: cli.seed,
        samples: cli.samples,
        grid: cli.grid.clone(),
        q: cli.q,
        lambda: cli.lambda,
        workers: cli.workers,
    };
    let mut cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;

    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| anyhow::anyhow!("setting worker count: {e}"))?;
    }

    match cli.command {
        Command::Simulate { kernel, paths, csv } => simulate(&cfg, kernel.as_deref(), paths, csv),
        Command::Integrate { kernel, functional, csv } => {
            integrate(&cfg, &kernel, functional.as_deref(), csv.as_deref())
        }
        Command::Fubini { kernels, functional } => {
            apply_inputs(&mut cfg, &kernels, &[functional])?;
            run_checks(&cfg, &["fubini"])
        }
        Command::Transform { kernels, functional } => {
            apply_inputs(&mut cfg, &kernels, &[functional])?;
            run_checks(
                &cfg,
                &[
                    "transform_inverse",
                    "transform_q_composition",
                    "transform_kernel_composition",
                    "transform_mixed_composition",
                ],
            )
        }
        Command::Convolution { functional, functional_g } => {
            apply_inputs(&mut cfg, &[], &[functional, functional_g])?;
            run_checks(
                &cfg,
                &[
                    "relationship_i",
                    "relationship_ii",
                    "relationship_ii_extended",
                    "relationship_ii_dual_families",
                ],
            )
        }
        Command::Suite { checks, report, json, list_checks } => {
            if list_checks {
                for name in ALL_CHECKS {
                    println!("{name}");
                }
                return Ok(ExitCode::SUCCESS);
            }
            if report.is_some() {
                cfg.out_report = report;
            }
            if json.is_some() {
                cfg.out_json = json;
            }
            let selected: Vec<String> = if checks.is_empty() { cfg.checks.clone() } else { checks };
            let selected_refs: Vec<&str> = selected.iter().map(String::as_str).collect();
            run_checks(&cfg, &selected_refs)
        }
    }
}

/// Fold subcommand-level kernel and functional flags into the config.
fn apply_inputs(
    cfg: &mut RunConfig,
    kernels: &[String],
    functionals: &[Option<PathBuf>],
) -> anyhow::Result<()> {
    if !kernels.is_empty() {
        cfg.kernel_specs = kernels.to_vec();
    }
    let mut loaded = Vec::new();
    for f in functionals.iter().flatten() {
        loaded.push(load_functional(f, &cfg.grid)?);
    }
    if !loaded.is_empty() {
        // explicit functionals take the F (and G) slots
        loaded.extend(cfg.functionals.iter().cloned());
        cfg.functionals = loaded;
    }
    Ok(())
}

fn run_checks(cfg: &RunConfig, names: &[&str]) -> anyhow::Result<ExitCode> {
    let ctx = SuiteContext::build(cfg)?;
    let filter: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let reports = ctx.run(&filter)?;
    print!("{}", output::report_text(&reports));
    output::write_outputs(&reports, cfg.out_report.as_deref(), cfg.out_json.as_deref())?;
    let all_passed = reports.iter().all(|r| r.passed);
    Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn simulate(
    cfg: &RunConfig,
    kernel: Option<&str>,
    paths: u64,
    csv: Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    let kernel: Option<GridFunction> = match kernel {
        Some(spec) => Some(
            resolve_kernels(&[spec.to_string()], &cfg.grid)?
                .into_iter()
                .next()
                .expect("family is nonempty"),
        ),
        None => None,
    };
    for p in 0..paths {
        let sheet = sample_sheet(&cfg.grid, &RngStream::new(cfg.seed, p));
        let path = match &kernel {
            Some(h) => gaussian_path(h, &sheet)?,
            None => sheet,
        };
        let body = output::path_csv(&path);
        match &csv {
            Some(base) => {
                let target = if paths == 1 { base.clone() } else { numbered(base, p) };
                std::fs::write(&target, body)?;
            }
            None => {
                if p > 0 {
                    println!();
                }
                print!("{body}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn numbered(base: &std::path::Path, index: u64) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("path");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}-{index:03}.{ext}"))
}

fn integrate(
    cfg: &RunConfig,
    kernel_spec: &str,
    functional: Option<&std::path::Path>,
    csv: Option<&std::path::Path>,
) -> anyhow::Result<ExitCode> {
    let kernel = resolve_kernels(&[kernel_spec.to_string()], &cfg.grid)?
        .into_iter()
        .next()
        .expect("family is nonempty");
    let f: CylinderFunctional = match functional {
        Some(path) => load_functional(path, &cfg.grid)?,
        None => cfg
            .functionals
            .first()
            .cloned()
            .unwrap_or_else(|| {
                CylinderFunctional::unit_mass(GridFunction::constant(&cfg.grid, 1.0))
            }),
    };

    let feynman = feynman_closed_form(&f, &kernel, cfg.q)?;
    let real = closed_form_real_lambda(&f, &kernel, cfg.lambda)?;
    let stream = RngStream::new(cfg.seed, 0);
    let estimate = yeh_wiener_mc(&f, &kernel, cfg.lambda, cfg.n_samples, &stream)?;
    let distance = estimate.sigma_distance(real, (0.0, 0.0));

    println!("feynman_closed_form(q={}): {} + {}i", cfg.q, feynman.re, feynman.im);
    println!(
        "closed_form_real_lambda(lambda={}): {} + {}i",
        cfg.lambda, real.re, real.im
    );
    println!("mc_estimate: {}", output::estimate_record(&estimate));
    println!("sigma_distance: {distance}");

    if let Some(path) = csv.or(cfg.out_csv.as_deref()) {
        let rows = convergence_rows(&f, &kernel, cfg.lambda, cfg.n_samples, &stream)?;
        std::fs::write(path, output::convergence_csv(&rows))?;
    }

    Ok(if distance <= 3.0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
