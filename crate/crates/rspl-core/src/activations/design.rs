//! Penalty-driven activation design: invert a requested spectral penalty
//! factor `rho(k)` back to a sampled activation via `F[phi] = zeta(k)/sqrt(rho)`.
//!
//! The square root leaves the phase `zeta(k)` free; two rules are exposed.
//! `RealEven` takes `zeta = 1` (even activations: Cauchy, Gaussian, bumps);
//! `CausalStep` takes `zeta(k) = -i sign(k)` (odd activations: for
//! `rho = k^2` this reproduces the Step family rather than Log-Absolute).

use crate::error::{Error, Result};
use crate::fourier::{self, SampleGrid};
use num_complex::Complex64;
use std::io::Write;
use std::path::Path;

/// Design grid: the activation is sampled on `[-half_width, half_width)`
/// with `samples` points; the penalty is read on the dual frequency grid.
#[derive(Debug, Clone, Copy)]
pub struct DesignGrid {
    pub half_width: f64,
    pub samples: usize,
}

impl Default for DesignGrid {
    fn default() -> Self {
        Self { half_width: 32.0, samples: 1 << 14 }
    }
}

impl DesignGrid {
    pub fn sample_grid(&self) -> SampleGrid {
        SampleGrid::symmetric(self.half_width, self.samples)
    }
}

/// Phase rule for the non-unique square root of the penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseRule {
    RealEven,
    CausalStep,
}

/// An activation known only through samples on a uniform grid.
#[derive(Debug, Clone)]
pub struct SampledActivation {
    pub grid: SampleGrid,
    pub values: Vec<f64>,
}

impl SampledActivation {
    /// Nearest-sample lookup (zero outside the grid).
    pub fn value(&self, z: f64) -> f64 {
        match self.grid.index_of(z) {
            Some(j) => self.values[j],
            None => 0.0,
        }
    }

    /// Two-column text: `z phi(z)` per line.
    pub fn write_two_column(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.17e} {:.17e}", self.grid.point(j), v)?;
        }
        Ok(())
    }
}

/// Minimum number of passband cells for the inverse transform to resolve.
const MIN_PASSBAND_CELLS: usize = 8;
/// Relative amplitude below which a frequency cell is outside the passband.
const PASSBAND_REL: f64 = 1e-6;

fn amplitudes(
    rho: &dyn Fn(f64) -> f64,
    kgrid: SampleGrid,
) -> Result<(Vec<f64>, f64)> {
    let mut amp = Vec::with_capacity(kgrid.len);
    let mut zeros = 0usize;
    for m in 0..kgrid.len {
        let k = kgrid.point(m);
        let r = rho(k);
        if r.is_nan() || r < 0.0 {
            return Err(Error::Design(format!("rho({k}) = {r} is not a nonnegative penalty")));
        }
        if r == 0.0 {
            // Isolated zeros (rho = k^2 at DC) are indeterminate cells the
            // design leaves empty; a positive-measure zero set is refused below.
            zeros += 1;
            amp.push(0.0);
            continue;
        }
        amp.push(if r.is_infinite() { 0.0 } else { 1.0 / r.sqrt() });
    }
    if zeros > 2.max(kgrid.len / 1024) {
        return Err(Error::Design(format!(
            "rho vanishes on {zeros} of {} frequency cells; not invertible",
            kgrid.len
        )));
    }
    let max = amp.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::Design("rho is infinite on the whole grid".into()));
    }
    Ok((amp, max))
}

/// Invert a spectral penalty factor to a sampled activation.
pub fn design_activation(
    rho: impl Fn(f64) -> f64,
    phase: PhaseRule,
    grid: DesignGrid,
) -> Result<SampledActivation> {
    let zgrid = grid.sample_grid();
    let kgrid = zgrid.freq_grid();
    let (amp, max) = amplitudes(&rho, kgrid)?;

    let passband = amp.iter().filter(|&&a| a >= PASSBAND_REL * max).count();
    if passband < MIN_PASSBAND_CELLS {
        return Err(Error::Design(format!(
            "penalty passband covers only {passband} frequency cells; \
             the grid cannot resolve the designed activation"
        )));
    }

    let spectrum: Vec<Complex64> = amp
        .iter()
        .enumerate()
        .map(|(m, &a)| {
            let k = kgrid.point(m);
            match phase {
                PhaseRule::RealEven => Complex64::new(a, 0.0),
                PhaseRule::CausalStep => Complex64::new(0.0, -k.signum() * a),
            }
        })
        .collect();
    let phi = fourier::inverse_to_grid(&spectrum, zgrid);
    let values: Vec<f64> = phi.iter().map(|c| c.re).collect();
    Ok(SampledActivation { grid: zgrid, values })
}

/// `|DFT[phi]|^-2` of a sampled activation, for round-trip checks against a
/// requested penalty. Returns `(k, rho_hat(k))` pairs on the dual grid.
pub fn sampled_penalty(sampled: &SampledActivation) -> Vec<(f64, f64)> {
    let spec = fourier::forward_real(&sampled.values, sampled.grid);
    let kgrid = sampled.grid.freq_grid();
    spec.iter()
        .enumerate()
        .map(|(m, v)| {
            let mag = v.norm_sqr();
            (kgrid.point(m), if mag > 0.0 { 1.0 / mag } else { f64::INFINITY })
        })
        .collect()
}

/// Numerical member of the exp-power penalty family
/// `rho_n(k) = exp(2 sigma^n |k|^n / n^(n-1))`: n = 1 reproduces Cauchy,
/// n = 2 Gaussian, higher n the oscillatory G-function activations.
pub fn g_family_approx(n: u32, sigma: f64, grid: DesignGrid) -> Result<SampledActivation> {
    if !(1..=6).contains(&n) {
        return Err(Error::InvalidParams(format!("g-family order n must be in 1..=6, got {n}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParams(format!("sigma must be positive, got {sigma}")));
    }
    let nf = n as f64;
    let rho = move |k: f64| (2.0 * sigma.powi(n as i32) * k.abs().powf(nf) / nf.powf(nf - 1.0)).exp();

    // The family decays like exp(-sigma^n |k|^n / ...); if the amplitude has
    // not died off by the edge of the frequency grid the activation wraps.
    let zgrid = grid.sample_grid();
    let kgrid = zgrid.freq_grid();
    let k_edge = kgrid.point(0).abs();
    let edge_amp = 1.0 / rho(k_edge).sqrt();
    if edge_amp > 1e-3 {
        return Err(Error::Design(format!(
            "grid too small for exponential decay: amplitude {edge_amp:.2e} at band edge"
        )));
    }
    design_activation(rho, PhaseRule::RealEven, grid)
}
