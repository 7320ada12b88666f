use anyhow::{anyhow, bail, Context, Result};
use ndarray::{Array1, Array2};
use rspl_core::activations::{
    design_activation, g_family_approx, parse_activation, DesignGrid, PhaseRule,
};
use rspl_core::adaptive::{simulate, Parameterization, SimEvent, SimulationConfig};
use rspl_core::checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
use rspl_core::fourier::SampleGrid;
use rspl_core::harness::{run_experiment, ExperimentId, RunConfig};
use rspl_core::kernel::{
    build_features, snapshot_hash, solve_min_norm, solve_mse_ball, train_kernel_gd, GdStop,
    KernelOptimizer, KernelSolution,
};
use rspl_core::network::{forward, Dataset, SplineParams};
use rspl_core::spectral::radon::{central_slice_error, radon_2d};
use rspl_core::spectral::{fft_grid, GridFunction};
use std::io::Write;
use std::path::{Path, PathBuf};

fn load_xy_csv(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading dataset {}", path.display()))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            bail!("{}:{}: expected x1,x2,y", path.display(), i + 1);
        }
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) => {
                xs.push([v[0], v[1]]);
                ys.push(v[2]);
            }
            Err(_) if i == 0 => continue, // header row
            Err(e) => bail!("{}:{}: {e}", path.display(), i + 1),
        }
    }
    let n = xs.len();
    if n == 0 {
        bail!("{}: no data rows", path.display());
    }
    let x = Array2::from_shape_fn((n, 2), |(i, j)| xs[i][j]);
    let y = Array2::from_shape_fn((n, 1), |(i, _)| ys[i]);
    Ok(Dataset::new(x, y)?)
}

fn synthetic_dataset(n: usize, seed: u64) -> Dataset {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-2.0..2.0));
    let y = Array2::from_shape_fn((n, 1), |_| rng.gen_range(-2.0..2.0));
    Dataset::new(x, y).unwrap()
}

fn solution_json(sol: &KernelSolution, activation: &str, seed: u64, hash: u64) -> String {
    let fmt_opt_u = |v: Option<u64>| v.map_or("null".into(), |x| x.to_string());
    let method = match sol.method {
        rspl_core::kernel::SolveMethod::Equality => "equality",
        rspl_core::kernel::SolveMethod::MseBall => "mse_ball",
        rspl_core::kernel::SolveMethod::Gd => "gd",
    };
    format!(
        "{{\n  \"method\": \"{method}\",\n  \"activation\": \"{activation}\",\n  \
         \"seed\": {seed},\n  \"snapshot_hash\": {hash},\n  \
         \"residual_mse\": {:e},\n  \"norm_sq\": {:e},\n  \"rank\": {},\n  \
         \"dual_tau\": {},\n  \"iterations\": {},\n  \"converged\": {}\n}}\n",
        sol.residual_mse,
        sol.norm_sq,
        sol.rank.map_or("null".into(), |r| r.to_string()),
        sol.dual_tau.map_or("null".into(), |t| format!("{t:e}")),
        fmt_opt_u(sol.iterations),
        sol.converged,
    )
}

pub struct FitKernelArgs {
    pub activation: String,
    pub solver: String,
    pub eps: f64,
    pub allow_lsq: bool,
    pub h: usize,
    pub data: Option<PathBuf>,
    pub n_train: usize,
    pub seed: u64,
    pub gd_lr: f64,
    pub gd_stop_mse: f64,
    pub gd_max_iters: u64,
    pub grid: usize,
    pub out: PathBuf,
}

pub fn fit_kernel(args: FitKernelArgs) -> Result<()> {
    let data = match &args.data {
        Some(p) => load_xy_csv(p)?,
        None => synthetic_dataset(args.n_train, args.seed),
    };
    let act = parse_activation(&args.activation)?;
    let s = rspl_core::harness::experiments::kernel_init(args.h, &data, args.seed);
    let fm = build_features(&s, &act, &data.x.view())?;
    let y = data.y.column(0).to_owned();
    let mu0 = Array1::zeros(args.h);
    let sol = match args.solver.as_str() {
        "equality" => solve_min_norm(&fm.phi, &y, &mu0, args.allow_lsq)?,
        "mse-ball" | "mse_ball" => solve_mse_ball(&fm.phi, &y, &mu0, args.eps)?,
        "gd" => train_kernel_gd(
            &fm,
            &y,
            &mu0,
            KernelOptimizer::Adam { lr: args.gd_lr },
            GdStop { mse_threshold: args.gd_stop_mse, max_iters: args.gd_max_iters },
        ),
        other => bail!("unknown solver `{other}` (equality | mse-ball | gd)"),
    };
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(
        args.out.join("solution.json"),
        solution_json(&sol, &args.activation, args.seed, snapshot_hash(&s)),
    )?;
    // Raw little-endian coefficients.
    let mut mu_file = std::io::BufWriter::new(std::fs::File::create(args.out.join("mu.bin"))?);
    for v in sol.mu_hat.iter() {
        mu_file.write_all(&v.to_le_bytes())?;
    }
    drop(mu_file);
    // Fitted parameters as a checkpoint and the fit sampled to CSV.
    let mut fitted = s.clone();
    fitted.mu.column_mut(0).assign(&sol.mu_hat);
    save_checkpoint(
        &args.out.join("fitted.rspl"),
        &fitted,
        &CheckpointMeta {
            activation: Some(args.activation.clone()),
            seed: Some(args.seed),
            step: sol.iterations,
            note: Some(format!("fit-kernel --solver {}", args.solver)),
        },
    )?;
    let g = SampleGrid::symmetric(2.0, args.grid);
    let mut csv = std::io::BufWriter::new(std::fs::File::create(args.out.join("fit.csv"))?);
    writeln!(csv, "x1,x2,f")?;
    let mut points = Array2::<f64>::zeros((args.grid, 2));
    for i in 0..args.grid {
        for j in 0..args.grid {
            points[(j, 0)] = g.point(i);
            points[(j, 1)] = g.point(j);
        }
        let out = forward(&fitted, &act, &points.view())?;
        for j in 0..args.grid {
            writeln!(csv, "{:.8e},{:.8e},{:.8e}", g.point(i), g.point(j), out[(j, 0)])?;
        }
    }
    println!(
        "fit-kernel: {} residual_mse {:.3e} |mu - mu0|^2 {:.3e} -> {}",
        args.solver,
        sol.residual_mse,
        sol.norm_sq,
        args.out.display()
    );
    Ok(())
}

pub struct SimulateArgs {
    pub param: String,
    pub activation: String,
    pub dataset: Option<PathBuf>,
    pub steps: u64,
    pub step_size: f64,
    pub snapshot_every: u64,
    pub h: usize,
    pub seed: u64,
    pub freeze_mu: bool,
    pub out: PathBuf,
}

pub fn simulate_adaptive(args: SimulateArgs) -> Result<()> {
    let act = parse_activation(&args.activation)?;
    let (data, s0) = match &args.dataset {
        Some(p) => {
            let data = load_xy_csv(p)?;
            let mut s = SplineParams::init_uniform(
                args.h,
                data.d(),
                1,
                1.1 * data
                    .x
                    .rows()
                    .into_iter()
                    .map(|r| r.dot(&r).sqrt())
                    .fold(0.0, f64::max),
                args.seed,
            );
            // Small random scales so breakplanes receive gradient.
            use rand::Rng;
            use rand_chacha::rand_core::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed ^ 0x5eed);
            s.mu.mapv_inplace(|_| rng.gen_range(-0.5..0.5));
            (data, s)
        }
        None => {
            // The two-datapoint pinning demonstration.
            let data = Dataset::new(
                ndarray::array![[1.2, 0.4], [0.759, -1.012]],
                ndarray::array![[2.0], [2.0]],
            )?;
            let theta0 = 2.84f64 + 0.3;
            let s = SplineParams {
                xi: ndarray::array![[theta0.cos(), theta0.sin()]],
                gamma: ndarray::array![-6.0],
                mu: ndarray::array![[-1.0]],
                omega: ndarray::array![1.0],
            };
            (data, s)
        }
    };
    let parameterization = match args.param.as_str() {
        "spline" => Parameterization::Spline,
        "weights" => Parameterization::Weights,
        other => bail!("unknown parameterization `{other}` (spline | weights)"),
    };
    let config = SimulationConfig {
        parameterization,
        steps: args.steps,
        step_size: args.step_size,
        snapshot_every: args.snapshot_every,
        freeze_mu: args.freeze_mu,
        ..Default::default()
    };
    let traj = simulate(&s0, &act, &data, &config)?;
    std::fs::create_dir_all(args.out.join("snapshots"))?;
    for (step, snap) in &traj.snapshots {
        save_checkpoint(
            &args.out.join(format!("snapshots/step_{step:08}.rspl")),
            snap,
            &CheckpointMeta {
                activation: Some(args.activation.clone()),
                seed: Some(args.seed),
                step: Some(*step),
                note: None,
            },
        )?;
    }
    let mut events = std::io::BufWriter::new(std::fs::File::create(args.out.join("events.log"))?);
    for e in &traj.events {
        match e {
            SimEvent::BoundaryCrossing { step, neuron, datapoint } => {
                writeln!(events, "{step},{neuron},boundary_crossing,{datapoint}")?
            }
            SimEvent::PatternJump { step, neuron, hamming } => {
                writeln!(events, "{step},{neuron},pattern_jump,{hamming}")?
            }
            SimEvent::PinningOnset { step, neuron, datapoint } => {
                writeln!(events, "{step},{neuron},pinning_onset,{datapoint}")?
            }
            SimEvent::PinPairFormed { step, neuron, datapoints } => {
                writeln!(events, "{step},{neuron},pin_pair,{} {}", datapoints.0, datapoints.1)?
            }
        }
    }
    let mut speeds = std::io::BufWriter::new(std::fs::File::create(args.out.join("speeds.csv"))?);
    writeln!(speeds, "step,breakplane_speed,attractor_speed")?;
    for (step, plane, attractor) in &traj.speed_log {
        writeln!(speeds, "{step},{plane:.8e},{attractor:.8e}")?;
    }
    println!(
        "simulate-adaptive: {} steps, {} events, {} snapshots -> {}",
        args.steps,
        traj.events.len(),
        traj.snapshots.len(),
        args.out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn analyze_spectrum(
    grid: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    activation: Option<String>,
    half_width: f64,
    samples: usize,
    radon: bool,
    out: PathBuf,
) -> Result<()> {
    let f = match (&grid, &checkpoint) {
        (Some(g), None) => GridFunction::load(g)?,
        (None, Some(c)) => {
            let (params, meta) = load_checkpoint(c)?;
            let act_name = activation
                .or(meta.activation)
                .ok_or_else(|| anyhow!("checkpoint carries no activation; pass --activation"))?;
            let act = parse_activation(&act_name)?;
            if params.c() != 1 {
                bail!("spectrum analysis expects a scalar-output network");
            }
            let g = SampleGrid::symmetric(half_width, samples);
            let mut values = Array2::<f64>::zeros((samples, samples));
            let mut points = Array2::<f64>::zeros((samples, 2));
            for i in 0..samples {
                for j in 0..samples {
                    points[(j, 0)] = g.point(i);
                    points[(j, 1)] = g.point(j);
                }
                let row = forward(&params, &act, &points.view())?;
                for j in 0..samples {
                    values[(i, j)] = row[(j, 0)];
                }
            }
            GridFunction { values, gx: g, gy: g }
        }
        _ => bail!("pass exactly one of --grid or --checkpoint"),
    };
    std::fs::create_dir_all(&out)?;
    let profile = fft_grid(&f);
    let mut csv = std::io::BufWriter::new(std::fs::File::create(out.join("m_profile.csv"))?);
    writeln!(csv, "r,m")?;
    for bin in &profile.m {
        writeln!(csv, "{:.8e},{:.8e}", bin.r, bin.value)?;
    }
    let peak = profile
        .m
        .iter()
        .skip(1)
        .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
        .map(|b| b.r)
        .unwrap_or(0.0);
    println!("total magnitude peak (excluding DC) at r = {peak:.4}");
    if radon {
        let sino = radon_2d(&f, 180, 2 * f.gx.len);
        let mut csv = std::io::BufWriter::new(std::fs::File::create(out.join("sinogram.csv"))?);
        writeln!(csv, "angle,offset,value")?;
        for (a, &angle) in sino.angles.iter().enumerate() {
            for l in 0..sino.offsets.len {
                writeln!(
                    csv,
                    "{angle:.8e},{:.8e},{:.8e}",
                    sino.offsets.point(l),
                    sino.values[(a, l)]
                )?;
            }
        }
        let band = 0.5 * std::f64::consts::PI / f.gx.step;
        let err = central_slice_error(&sino, &profile.spectrum, band);
        println!("central-slice residual (band {band:.2}): {err:.3e}");
    }
    println!("spectrum artifacts -> {}", out.display());
    Ok(())
}

fn parse_rho(spec: &str) -> Result<(Box<dyn Fn(f64) -> f64>, Option<(u32, f64)>)> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let get = |key: &str, default: f64| -> Result<f64> {
        if let Some(p) = params {
            for pair in p.split(',') {
                if let Some((k, v)) = pair.split_once('=') {
                    if k.trim() == key {
                        return v
                            .trim()
                            .parse()
                            .map_err(|_| anyhow!("bad value for {key}: {v}"));
                    }
                }
            }
        }
        Ok(default)
    };
    match name {
        "constant" | "1" => Ok((Box::new(|_| 1.0), None)),
        "k2" => Ok((Box::new(|k| k * k), None)),
        "k4" => Ok((Box::new(|k| k.powi(4)), None)),
        "exp-abs" => {
            let sigma = get("sigma", 1.0)?;
            Ok((Box::new(move |k: f64| (2.0 * sigma * k.abs()).exp()), None))
        }
        "exp-sq" => {
            let sigma = get("sigma", 1.0)?;
            Ok((Box::new(move |k: f64| (sigma * sigma * k * k).exp()), None))
        }
        "g" => {
            let n = get("n", 3.0)? as u32;
            let sigma = get("sigma", 1.0)?;
            Ok((Box::new(|_| 0.0), Some((n, sigma))))
        }
        other => bail!(
            "unknown penalty `{other}` (constant | k2 | k4 | exp-abs | exp-sq | g:n=,sigma=)"
        ),
    }
}

pub fn design_activation_cmd(
    rho_spec: &str,
    phase: &str,
    half_width: f64,
    samples: usize,
    out: &Path,
) -> Result<()> {
    let phase = match phase {
        "real-even" | "real_even" => PhaseRule::RealEven,
        "causal-step" | "causal_step" => PhaseRule::CausalStep,
        other => bail!("unknown phase rule `{other}` (real-even | causal-step)"),
    };
    let grid = DesignGrid { half_width, samples };
    let (rho, g_family) = parse_rho(rho_spec)?;
    let act = match g_family {
        Some((n, sigma)) => g_family_approx(n, sigma, grid)?,
        None => design_activation(&rho, phase, grid)?,
    };
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent)?;
    }
    act.write_two_column(out)?;
    println!("designed activation ({} samples) -> {}", act.values.len(), out.display());
    Ok(())
}

pub fn reproduce(experiment: &str, config: Option<&Path>, sets: &[String]) -> Result<()> {
    let mut cfg = match config {
        Some(p) => RunConfig::from_file(p)?,
        None => {
            let mut c = RunConfig::default();
            c.apply_env();
            c
        }
    };
    cfg.experiment = ExperimentId::parse(experiment)
        .ok_or_else(|| anyhow!("unknown experiment `{experiment}` (exp1..exp4)"))?;
    // exp3/exp4 default to the single best-understood activation.
    if matches!(cfg.experiment, ExperimentId::Exp3 | ExperimentId::Exp4) && config.is_none() {
        cfg.activations = vec!["relu".into()];
    }
    for kv in sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects key=value, got `{kv}`"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    run_experiment(&cfg)?;
    println!(
        "{} artifacts -> {}",
        cfg.experiment.name(),
        cfg.out_dir.join(cfg.experiment.name()).display()
    );
    Ok(())
}

pub fn inspect(path: &Path) -> Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "csv" => {
            let text = std::fs::read_to_string(path)?;
            let mut lines = text.lines();
            let header = lines.next().unwrap_or("");
            let cols: Vec<&str> = header.split(',').collect();
            let mut rows = 0usize;
            let mut bad = 0usize;
            for line in lines {
                if line.trim().is_empty() {
                    continue;
                }
                rows += 1;
                if line.split(',').count() != cols.len() {
                    bad += 1;
                }
            }
            println!("csv: {} columns {:?}, {rows} rows", cols.len(), cols);
            if bad > 0 {
                bail!("{bad} rows do not match the header schema");
            }
        }
        "grid" => {
            let g = GridFunction::load(path)?;
            let min = g.values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = g.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            println!(
                "grid: {}x{} over [{:.3}, {:.3}] x [{:.3}, {:.3}], values in [{min:.4e}, {max:.4e}]",
                g.gx.len,
                g.gy.len,
                g.gx.start,
                g.gx.point(g.gx.len - 1),
                g.gy.start,
                g.gy.point(g.gy.len - 1)
            );
        }
        "rspl" => {
            let (params, meta) = load_checkpoint(path)?;
            println!(
                "checkpoint: H={} D={} C={} activation={} seed={:?} step={:?}",
                params.h(),
                params.d(),
                params.c(),
                meta.activation.as_deref().unwrap_or("?"),
                meta.seed,
                meta.step
            );
        }
        "txt" | "log" => {
            let text = std::fs::read_to_string(path)?;
            let mut names: std::collections::BTreeMap<String, usize> = Default::default();
            for line in text.lines() {
                let mut parts = line.splitn(3, ',');
                let _step = parts.next();
                if let Some(name) = parts.next() {
                    *names.entry(name.to_string()).or_default() += 1;
                }
            }
            println!("run log: {} metric streams", names.len());
            for (name, count) in names {
                println!("  {name}: {count} records");
            }
        }
        other => bail!("no inspector for extension `{other}`"),
    }
    Ok(())
}

const MNIST_FILES: [(&str, &str); 4] = [
    (
        "train-images-idx3-ubyte.gz",
        "440fcabf73cc546fa21475e81ea370265605f56be210a4024d2ca8f203523609",
    ),
    (
        "train-labels-idx1-ubyte.gz",
        "3552534a0a558bbed6aed32b30c495cca23d567ec52cac8be1a0730e8010255c",
    ),
    (
        "t10k-images-idx3-ubyte.gz",
        "8d422c7b0a1c1c79245a5bcf07fe86e33eeafee792b84584aec276f5a2dbc4e6",
    ),
    (
        "t10k-labels-idx1-ubyte.gz",
        "f7ae60f92e00ec6debd23a6088c31dbd2371eca3ffa0defaefb259924204aec6",
    ),
];

const MNIST_MIRROR: &str = "https://ossci-datasets.s3.amazonaws.com/mnist";

pub fn download_mnist(dir: &Path) -> Result<()> {
    use sha2::{Digest, Sha256};
    std::fs::create_dir_all(dir)?;
    for (name, want) in MNIST_FILES {
        let path = dir.join(name);
        if !path.exists() {
            let url = format!("{MNIST_MIRROR}/{name}");
            println!("fetching {url}");
            let resp = ureq::get(&url)
                .call()
                .with_context(|| format!("downloading {name}"))?;
            let mut bytes = Vec::new();
            resp.into_reader().read_to_end(&mut bytes)?;
            std::fs::write(&path, &bytes)?;
        }
        let bytes = std::fs::read(&path)?;
        let digest = Sha256::digest(&bytes);
        let got = digest.iter().map(|b| format!("{b:02x}")).collect::<String>();
        if got != want {
            bail!(
                "{}: checksum mismatch\n  expected {want}\n  got      {got}",
                path.display()
            );
        }
        println!("{name}: ok ({} bytes)", bytes.len());
    }
    Ok(())
}

use std::io::Read;
