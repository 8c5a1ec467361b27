//! Command-line front end: wires JSON run configurations (with flag
//! overrides) to the analysis and simulation pipelines and emits plot-ready
//! CSV/JSON files.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 partial sweep failure.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

use config::{parse_kernel_flag, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "wcnet",
    version,
    about = "Stability, Hopf-curve and synchronization analysis for delay-coupled Wilson-Cowan networks"
)]
struct Cli {
    /// JSON run configuration; flags override individual fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: WCNET_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOverrides {
    /// Kernel: none | dirac:TAU | uniform:TAU:SIGMA | gamma:M:GAMMA |
    /// weak:TAU | strong:TAU | raw JSON.
    #[arg(long)]
    kernel: Option<String>,
    /// Connectivity: uni:N | bi:N | csv:PATH.
    #[arg(long)]
    connectivity: Option<String>,
    #[arg(long)]
    w_ie: Option<f64>,
    #[arg(long)]
    w_e: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct GridOverrides {
    #[arg(long, value_names = ["LO", "HI"], num_args = 2)]
    w_ie_range: Option<Vec<f64>>,
    #[arg(long, value_names = ["LO", "HI"], num_args = 2)]
    w_e_range: Option<Vec<f64>>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Scan equilibrium stability over a (W^IE, W^E) grid.
    Stability {
        #[command(flatten)]
        common: CommonOverrides,
        #[command(flatten)]
        grid: GridOverrides,
    },
    /// Compute Hopf curves, curve ordering and double-Hopf intersections.
    Hopf {
        #[command(flatten)]
        common: CommonOverrides,
        /// closed | grid
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out_curves: Option<String>,
        #[arg(long)]
        out_intersections: Option<String>,
    },
    /// Integrate the network at one parameter point and classify the result.
    Simulate {
        #[command(flatten)]
        common: CommonOverrides,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        settle: Option<f64>,
        /// equilibrium | perturbed
        #[arg(long)]
        history: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Random-point sweep with stability pre-filter and classification.
    Sweep {
        #[command(flatten)]
        common: CommonOverrides,
        #[command(flatten)]
        grid: GridOverrides,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        settle: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Inspect delay kernels.
    Kernels {
        #[command(subcommand)]
        cmd: KernelsCmd,
    },
    /// Inspect connectivity matrices.
    Connectivity {
        #[command(subcommand)]
        cmd: ConnectivityCmd,
    },
}

#[derive(Subcommand)]
enum KernelsCmd {
    /// Print moments and transform samples of the configured kernel.
    Show {
        #[arg(long)]
        kernel: Option<String>,
    },
}

#[derive(Subcommand)]
enum ConnectivityCmd {
    /// Print the spectrum of the configured connectivity.
    Show {
        #[arg(long)]
        connectivity: Option<String>,
    },
}

fn apply_common(cfg: &mut RunConfig, common: &CommonOverrides) -> Result<(), CliError> {
    if let Some(kernel) = &common.kernel {
        cfg.kernel = Some(parse_kernel_flag(kernel).map_err(CliError::Config)?);
    }
    if let Some(conn) = &common.connectivity {
        cfg.connectivity = Some(conn.clone());
    }
    if common.w_ie.is_some() {
        cfg.w_ie = common.w_ie;
    }
    if common.w_e.is_some() {
        cfg.w_e = common.w_e;
    }
    Ok(())
}

fn pair(v: &[f64]) -> (f64, f64) {
    (v[0], v[1])
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    let threads = cfg
        .threads
        .or_else(|| {
            std::env::var("WCNET_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    // a failed build means a pool already exists (tests); keep going
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();

    match &cli.command {
        Command::Stability { common, grid } => {
            apply_common(&mut cfg, common)?;
            let mut section = cfg.stability.clone().unwrap_or_default();
            if let Some(r) = &grid.w_ie_range {
                section.w_ie_range = pair(r);
            }
            if let Some(r) = &grid.w_e_range {
                section.w_e_range = pair(r);
            }
            if let Some(nx) = grid.nx {
                section.nx = nx;
            }
            if let Some(ny) = grid.ny {
                section.ny = ny;
            }
            if let Some(out) = &grid.out {
                section.out = out.clone();
            }
            cfg.stability = Some(section);
            commands::cmd_stability(&cfg)
        }
        Command::Hopf {
            common,
            method,
            samples,
            out_curves,
            out_intersections,
        } => {
            apply_common(&mut cfg, common)?;
            let mut section = cfg.hopf.clone().unwrap_or_default();
            if let Some(m) = method {
                section.method = m.clone();
            }
            if let Some(s) = samples {
                section.samples = *s;
            }
            if let Some(o) = out_curves {
                section.out_curves = o.clone();
            }
            if let Some(o) = out_intersections {
                section.out_intersections = o.clone();
            }
            cfg.hopf = Some(section);
            commands::cmd_hopf(&cfg)
        }
        Command::Simulate {
            common,
            t_end,
            dt,
            settle,
            history,
            seed,
            out,
        } => {
            apply_common(&mut cfg, common)?;
            let mut section = cfg.simulate.clone().unwrap_or_default();
            if let Some(v) = t_end {
                section.t_end = *v;
            }
            if let Some(v) = dt {
                section.dt = *v;
            }
            if let Some(v) = settle {
                section.settle = *v;
            }
            if let Some(v) = history {
                section.history = v.clone();
            }
            if let Some(v) = seed {
                section.seed = *v;
            }
            if let Some(v) = out {
                section.out = v.clone();
            }
            cfg.simulate = Some(section);
            commands::cmd_simulate(&cfg)
        }
        Command::Sweep {
            common,
            grid,
            points,
            seed,
            settle,
            t_end,
        } => {
            apply_common(&mut cfg, common)?;
            let mut section = cfg.sweep.clone().unwrap_or_default();
            if let Some(r) = &grid.w_ie_range {
                section.w_ie_range = pair(r);
            }
            if let Some(r) = &grid.w_e_range {
                section.w_e_range = pair(r);
            }
            if let Some(out) = &grid.out {
                section.out = out.clone();
            }
            if let Some(v) = points {
                section.points = *v;
            }
            if let Some(v) = seed {
                section.seed = *v;
            }
            if let Some(v) = settle {
                section.settle = *v;
            }
            if let Some(v) = t_end {
                section.t_end = *v;
            }
            cfg.sweep = Some(section);
            commands::cmd_sweep(&cfg)
        }
        Command::Kernels { cmd } => match cmd {
            KernelsCmd::Show { kernel } => {
                let spec = kernel
                    .as_deref()
                    .map(parse_kernel_flag)
                    .transpose()
                    .map_err(CliError::Config)?;
                commands::cmd_kernels_show(&cfg, spec.as_ref())
            }
        },
        Command::Connectivity { cmd } => match cmd {
            ConnectivityCmd::Show { connectivity } => {
                if let Some(c) = connectivity {
                    cfg.connectivity = Some(c.clone());
                }
                commands::cmd_connectivity_show(&cfg)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
