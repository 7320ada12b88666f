//! `rspl`: fit kernel-regime networks, simulate breakplane dynamics,
//! analyze spectra, design activations from penalties, and reproduce the
//! desk-scale experiments.

mod commands;

use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "rspl", version, about = "radon-spline shallow network toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the frozen-feature (kernel regime) model on a dataset.
    FitKernel {
        /// Activation, e.g. `relu`, `gaussian:sigma=1`, `sinc:a=0.75`.
        #[arg(long, default_value = "relu")]
        activation: String,
        /// equality | mse-ball | gd
        #[arg(long, default_value = "mse-ball")]
        solver: String,
        /// Mse-ball radius (mse-ball solver).
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Accept inconsistent systems and return the least-squares answer.
        #[arg(long)]
        allow_lsq: bool,
        #[arg(long, default_value_t = 4000)]
        h: usize,
        /// CSV dataset `x1,x2,y` (header optional); synthetic random
        /// targets on the 4x4 square when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        n_train: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Gradient solver settings.
        #[arg(long, default_value_t = 3e-3)]
        gd_lr: f64,
        #[arg(long, default_value_t = 1e-6)]
        gd_stop_mse: f64,
        #[arg(long, default_value_t = 400000)]
        gd_max_iters: u64,
        /// Fit-sample grid edge.
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, default_value = "runs/fit-kernel")]
        out: PathBuf,
    },
    /// Explicit-Euler breakplane simulation with event detection.
    SimulateAdaptive {
        /// spline | weights
        #[arg(long, default_value = "spline")]
        param: String,
        #[arg(long, default_value = "relu")]
        activation: String,
        /// CSV dataset `x1,x2,y`; the built-in two-point pinning instance
        /// when omitted.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = 60000)]
        steps: u64,
        #[arg(long, default_value_t = 2e-4)]
        step_size: f64,
        #[arg(long, default_value_t = 1000)]
        snapshot_every: u64,
        /// Network width for random initialization (ignored for the demo).
        #[arg(long, default_value_t = 8)]
        h: usize,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        /// Keep the scales fixed (conditional-loss slices).
        #[arg(long)]
        freeze_mu: bool,
        #[arg(long, default_value = "runs/simulate")]
        out: PathBuf,
    },
    /// Total magnitude / sinogram analysis of a grid function or checkpoint.
    AnalyzeSpectrum {
        /// Binary grid file to analyze.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Alternatively: sample a checkpointed network...
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// ...with this activation.
        #[arg(long)]
        activation: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        half_width: f64,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Also write a sinogram and report the central-slice residual.
        #[arg(long)]
        radon: bool,
        #[arg(long, default_value = "runs/spectrum")]
        out: PathBuf,
    },
    /// Invert a spectral penalty factor into a sampled activation.
    DesignActivation {
        /// constant | k2 | k4 | exp-abs[:sigma=] | exp-sq[:sigma=] | g:n=,sigma=
        #[arg(long)]
        rho: String,
        /// real-even | causal-step
        #[arg(long, default_value = "real-even")]
        phase: String,
        #[arg(long, default_value_t = 32.0)]
        half_width: f64,
        #[arg(long, default_value_t = 16384)]
        samples: usize,
        /// Two-column output file (z, phi).
        #[arg(long, default_value = "runs/designed_activation.txt")]
        out: PathBuf,
    },
    /// Run a desk-scale experiment reproduction (exp1..exp4).
    Reproduce {
        /// exp1 | exp2 | exp3 | exp4
        experiment: String,
        /// Plain-text `key = value` configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Inline overrides, e.g. `--set h=1000 --set seed=3`.
        #[arg(long = "set")]
        sets: Vec<String>,
    },
    /// Summarize an emitted artifact (csv, grid, checkpoint, run log).
    Inspect { path: PathBuf },
    /// Fetch (or verify) the MNIST IDX files with pinned checksums.
    DownloadMnist {
        #[arg(long, default_value = "data/mnist")]
        dir: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::FitKernel {
            activation,
            solver,
            eps,
            allow_lsq,
            h,
            data,
            n_train,
            seed,
            gd_lr,
            gd_stop_mse,
            gd_max_iters,
            grid,
            out,
        } => commands::fit_kernel(commands::FitKernelArgs {
            activation,
            solver,
            eps,
            allow_lsq,
            h,
            data,
            n_train,
            seed,
            gd_lr,
            gd_stop_mse,
            gd_max_iters,
            grid,
            out,
        }),
        Cmd::SimulateAdaptive {
            param,
            activation,
            dataset,
            steps,
            step_size,
            snapshot_every,
            h,
            seed,
            freeze_mu,
            out,
        } => commands::simulate_adaptive(commands::SimulateArgs {
            param,
            activation,
            dataset,
            steps,
            step_size,
            snapshot_every,
            h,
            seed,
            freeze_mu,
            out,
        }),
        Cmd::AnalyzeSpectrum { grid, checkpoint, activation, half_width, samples, radon, out } => {
            commands::analyze_spectrum(grid, checkpoint, activation, half_width, samples, radon, out)
        }
        Cmd::DesignActivation { rho, phase, half_width, samples, out } => {
            commands::design_activation_cmd(&rho, &phase, half_width, samples, &out)
        }
        Cmd::Reproduce { experiment, config, sets } => {
            commands::reproduce(&experiment, config.as_deref(), &sets)
        }
        Cmd::Inspect { path } => commands::inspect(&path),
        Cmd::DownloadMnist { dir } => commands::download_mnist(&dir),
    }
}
