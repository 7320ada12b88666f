//! Experiment orchestration: configuration, dataset synthesis, and the
//! four desk-scale reproductions with their artifact emission.

pub mod experiments;
pub mod idx;
pub mod targets;

pub use experiments::{
    exp1, exp2, exp3, exp4, run_experiment, Exp1Row, Exp2Row, Exp34Result, EpochMetrics,
};
pub use idx::{load_idx, LabeledImages};
pub use targets::{bessel_j0, make_target, TargetFunction, TargetKind};

use crate::error::{Error, Result};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    Exp1,
    Exp2,
    Exp3,
    Exp4,
}

impl ExperimentId {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_lowercase().as_str() {
            "exp1" | "1" => Some(Self::Exp1),
            "exp2" | "2" => Some(Self::Exp2),
            "exp3" | "3" => Some(Self::Exp3),
            "exp4" | "4" => Some(Self::Exp4),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Exp1 => "exp1",
            Self::Exp2 => "exp2",
            Self::Exp3 => "exp3",
            Self::Exp4 => "exp4",
        }
    }
}

/// Desk-scale run configuration. Every field has a default; a plain-text
/// `key = value` file and environment overrides (`RSPL_OUT_DIR`,
/// `RSPL_THREADS`) adjust them.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: ExperimentId,
    pub activations: Vec<String>,
    /// Network width for the kernel-regime fits.
    pub h: usize,
    /// Training points for exp1 (random targets) and exp2 (target samples).
    pub n_train: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Grid edge for fit sampling (power of two).
    pub grid: usize,
    /// exp2 mse-ball radius.
    pub eps: f64,
    /// exp2 target.
    pub target: TargetKind,
    /// exp1 gradient training.
    pub gd_lr: f64,
    pub gd_stop_mse: f64,
    pub gd_max_iters: u64,
    /// exp3/exp4 SGD schedule.
    pub mnist_dir: PathBuf,
    pub mnist_train: usize,
    pub mnist_test: usize,
    pub mnist_h: usize,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    /// exp4: adaptive epochs before freezing the features.
    pub switch_epoch: usize,
    /// Accepted for interface compatibility; the build is single-threaded
    /// and deterministic, so this is recorded but has no effect.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentId::Exp1,
            activations: vec![
                "relu".into(),
                "logistic:sigma=1".into(),
                "erf:sigma=1".into(),
                "cauchy:sigma=1".into(),
            ],
            h: 4000,
            n_train: 20,
            seed: 7,
            out_dir: PathBuf::from("runs"),
            grid: 128,
            eps: 5e-6,
            target: TargetKind::BesselRing,
            gd_lr: 3e-3,
            gd_stop_mse: 1e-6,
            gd_max_iters: 400_000,
            mnist_dir: PathBuf::from("data/mnist"),
            mnist_train: 6400,
            mnist_test: 1000,
            mnist_h: 200,
            epochs: 10,
            batch: 256,
            lr: 0.2,
            switch_epoch: 2,
            threads: None,
        }
    }
}

impl RunConfig {
    /// Parse a `key = value` file (`#` comments, blank lines ignored) over
    /// the defaults, then apply environment overrides.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("{}:{}: expected key = value", path.display(), lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        }
        cfg.apply_env();
        Ok(cfg)
    }

    pub fn apply_env(&mut self) {
        if let Ok(dir) = std::env::var("RSPL_OUT_DIR") {
            self.out_dir = PathBuf::from(dir);
        }
        if let Ok(t) = std::env::var("RSPL_THREADS") {
            self.threads = t.parse().ok();
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("invalid {what}: `{value}`"));
        match key {
            "experiment" => {
                self.experiment =
                    ExperimentId::parse(value).ok_or_else(|| bad("experiment"))?;
            }
            "activation" | "activations" => {
                self.activations = value.split(',').map(|s| s.trim().to_string()).collect();
            }
            "h" => self.h = value.parse().map_err(|_| bad("h"))?,
            "n_train" => self.n_train = value.parse().map_err(|_| bad("n_train"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "grid" => self.grid = value.parse().map_err(|_| bad("grid"))?,
            "eps" => self.eps = value.parse().map_err(|_| bad("eps"))?,
            "target" => {
                self.target = TargetKind::parse(value).ok_or_else(|| bad("target"))?;
            }
            "gd_lr" => self.gd_lr = value.parse().map_err(|_| bad("gd_lr"))?,
            "gd_stop_mse" => self.gd_stop_mse = value.parse().map_err(|_| bad("gd_stop_mse"))?,
            "gd_max_iters" => self.gd_max_iters = value.parse().map_err(|_| bad("gd_max_iters"))?,
            "mnist_dir" => self.mnist_dir = PathBuf::from(value),
            "mnist_train" => self.mnist_train = value.parse().map_err(|_| bad("mnist_train"))?,
            "mnist_test" => self.mnist_test = value.parse().map_err(|_| bad("mnist_test"))?,
            "mnist_h" => self.mnist_h = value.parse().map_err(|_| bad("mnist_h"))?,
            "epochs" => self.epochs = value.parse().map_err(|_| bad("epochs"))?,
            "batch" => self.batch = value.parse().map_err(|_| bad("batch"))?,
            "lr" => self.lr = value.parse().map_err(|_| bad("lr"))?,
            "switch_epoch" => self.switch_epoch = value.parse().map_err(|_| bad("switch_epoch"))?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }
}

/// Write a CSV with a header row.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Line-delimited metric log: `step,name,value` per line.
pub struct RunLog {
    out: std::io::BufWriter<std::fs::File>,
}

impl RunLog {
    pub fn create(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        Ok(Self { out: std::io::BufWriter::new(std::fs::File::create(path)?) })
    }

    pub fn record(&mut self, step: u64, name: &str, value: f64) -> Result<()> {
        writeln!(self.out, "{step},{name},{value:.17e}")?;
        Ok(())
    }
}
