//! Fourier-side analysis on 2-D grids: spectra with the radial total
//! magnitude `M(r)`, the three frequency-penalty objectives evaluated in
//! both cylinder and Euclidean coordinates, Dirac-line spectra of finite
//! networks, contraction scaling, and 1-D fractional-derivative filters.

pub mod radon;

use crate::activations::ActivationSpec;
use crate::error::{Error, Result};
use crate::fourier::{self, SampleGrid};
use crate::network::SplineParams;
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

/// Radon inversion constant for D = 2 under this crate's transform
/// convention: `f = kappa_2 R*{(-d^2/dgamma^2)^(1/2) R f}`.
pub const KAPPA_2: f64 = 1.0 / (4.0 * PI);

/// Real samples on a uniform 2-D grid; `values[(i, j)]` lives at
/// `(gx.point(i), gy.point(j))`.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub values: Array2<f64>,
    pub gx: SampleGrid,
    pub gy: SampleGrid,
}

impl GridFunction {
    pub fn from_fn(gx: SampleGrid, gy: SampleGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values =
            Array2::from_shape_fn((gx.len, gy.len), |(i, j)| f(gx.point(i), gy.point(j)));
        Self { values, gx, gy }
    }

    /// Square symmetric grid covering `[-half, half)^2`, length a power of two.
    pub fn square(half: f64, n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::Grid(format!("grid size {n} is not a power of two")));
        }
        let g = SampleGrid::symmetric(half, n);
        Ok(Self::from_fn(g, g, f))
    }

    pub fn cell_area(&self) -> f64 {
        self.gx.step * self.gy.step
    }

    /// `sum f^2 dA`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.cell_area()
    }

    /// Bilinear interpolation, zero outside the grid.
    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        let px = (x - self.gx.start) / self.gx.step;
        let py = (y - self.gy.start) / self.gy.step;
        if px < 0.0 || py < 0.0 || px > (self.gx.len - 1) as f64 || py > (self.gy.len - 1) as f64 {
            return 0.0;
        }
        let i = (px.floor() as usize).min(self.gx.len - 2);
        let j = (py.floor() as usize).min(self.gy.len - 2);
        let tx = px - i as f64;
        let ty = py - j as f64;
        let v00 = self.values[(i, j)];
        let v10 = self.values[(i + 1, j)];
        let v01 = self.values[(i, j + 1)];
        let v11 = self.values[(i + 1, j + 1)];
        v00 * (1.0 - tx) * (1.0 - ty)
            + v10 * tx * (1.0 - ty)
            + v01 * (1.0 - tx) * ty
            + v11 * tx * ty
    }

    /// Catmull-Rom bicubic interpolation, zero outside; falls back to
    /// bilinear in the one-cell boundary frame. The tent-kernel transfer
    /// bias of bilinear sampling (O((k dx)^2)) is what limits Radon/slice
    /// accuracy, so ray quadrature uses this.
    pub fn bicubic(&self, x: f64, y: f64) -> f64 {
        let px = (x - self.gx.start) / self.gx.step;
        let py = (y - self.gy.start) / self.gy.step;
        if px < 1.0
            || py < 1.0
            || px > (self.gx.len - 3) as f64
            || py > (self.gy.len - 3) as f64
        {
            return self.bilinear(x, y);
        }
        let i = px.floor() as usize;
        let j = py.floor() as usize;
        let tx = px - i as f64;
        let ty = py - j as f64;
        let mut rows = [0.0f64; 4];
        for (r, row) in rows.iter_mut().enumerate() {
            let p0 = self.values[(i - 1 + r, j - 1)];
            let p1 = self.values[(i - 1 + r, j)];
            let p2 = self.values[(i - 1 + r, j + 1)];
            let p3 = self.values[(i - 1 + r, j + 2)];
            *row = catmull_rom(p0, p1, p2, p3, ty);
        }
        catmull_rom(rows[0], rows[1], rows[2], rows[3], tx)
    }

    /// Binary GRID file: magic, dims, grid geometry, then row-major f64.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        out.write_all(b"GRID")?;
        for v in [self.gx.len as u32, self.gy.len as u32] {
            out.write_all(&v.to_le_bytes())?;
        }
        for v in [self.gx.start, self.gx.step, self.gy.start, self.gy.step] {
            out.write_all(&v.to_le_bytes())?;
        }
        for v in self.values.iter() {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        file.read_exact(&mut magic)?;
        if &magic != b"GRID" {
            return Err(Error::Grid(format!("bad magic {magic:?}")));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        let mut dims = [0usize; 2];
        for d in dims.iter_mut() {
            file.read_exact(&mut b4)?;
            *d = u32::from_le_bytes(b4) as usize;
        }
        let mut geo = [0f64; 4];
        for g in geo.iter_mut() {
            file.read_exact(&mut b8)?;
            *g = f64::from_le_bytes(b8);
        }
        let mut buf = vec![0u8; dims[0] * dims[1] * 8];
        file.read_exact(&mut buf)?;
        let values = Array2::from_shape_vec(
            (dims[0], dims[1]),
            buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect(),
        )
        .unwrap();
        Ok(Self {
            values,
            gx: SampleGrid { start: geo[0], step: geo[1], len: dims[0] },
            gy: SampleGrid { start: geo[2], step: geo[3], len: dims[1] },
        })
    }
}

pub(crate) fn catmull_rom(p0: f64, p1: f64, p2: f64, p3: f64, t: f64) -> f64 {
    0.5 * (2.0 * p1
        + (-p0 + p2) * t
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t)
}

/// A centered 2-D spectrum.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub f: Array2<Complex64>,
    pub kx: SampleGrid,
    pub ky: SampleGrid,
}

impl Spectrum {
    pub fn cell_area(&self) -> f64 {
        self.kx.step * self.ky.step
    }

    /// Complex bilinear interpolation, zero outside.
    pub fn bilinear(&self, kx: f64, ky: f64) -> Complex64 {
        let px = (kx - self.kx.start) / self.kx.step;
        let py = (ky - self.ky.start) / self.ky.step;
        if px < 0.0 || py < 0.0 || px > (self.kx.len - 1) as f64 || py > (self.ky.len - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = (px.floor() as usize).min(self.kx.len - 2);
        let j = (py.floor() as usize).min(self.ky.len - 2);
        let tx = px - i as f64;
        let ty = py - j as f64;
        self.f[(i, j)] * (1.0 - tx) * (1.0 - ty)
            + self.f[(i + 1, j)] * tx * (1.0 - ty)
            + self.f[(i, j + 1)] * (1.0 - tx) * ty
            + self.f[(i + 1, j + 1)] * tx * ty
    }

    /// Catmull-Rom interpolation of the complex field (real and imaginary
    /// parts separately), bilinear fallback at the frame.
    pub fn bicubic(&self, kx: f64, ky: f64) -> Complex64 {
        let px = (kx - self.kx.start) / self.kx.step;
        let py = (ky - self.ky.start) / self.ky.step;
        if px < 1.0
            || py < 1.0
            || px > (self.kx.len - 3) as f64
            || py > (self.ky.len - 3) as f64
        {
            return self.bilinear(kx, ky);
        }
        let i = px.floor() as usize;
        let j = py.floor() as usize;
        let tx = px - i as f64;
        let ty = py - j as f64;
        let mut rows = [Complex64::new(0.0, 0.0); 4];
        for (r, row) in rows.iter_mut().enumerate() {
            let p: Vec<Complex64> =
                (0..4).map(|c| self.f[(i - 1 + r, j - 1 + c)]).collect();
            *row = Complex64::new(
                catmull_rom(p[0].re, p[1].re, p[2].re, p[3].re, ty),
                catmull_rom(p[0].im, p[1].im, p[2].im, p[3].im, ty),
            );
        }
        Complex64::new(
            catmull_rom(rows[0].re, rows[1].re, rows[2].re, rows[3].re, tx),
            catmull_rom(rows[0].im, rows[1].im, rows[2].im, rows[3].im, tx),
        )
    }

    /// Max deviation from Hermitian symmetry `F(-k) = conj(F(k))`,
    /// excluding the unpaired Nyquist row/column.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n1 = self.kx.len;
        let n2 = self.ky.len;
        let mut worst = 0.0f64;
        for i in 1..n1 {
            for j in 1..n2 {
                let a = self.f[(i, j)];
                let b = self.f[(n1 - i, n2 - j)];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    /// Sample the central slice `F(t xi(angle))` on a 1-D grid.
    pub fn central_slice(&self, angle: f64, t_grid: SampleGrid) -> Vec<Complex64> {
        let (c, s) = (angle.cos(), angle.sin());
        (0..t_grid.len)
            .map(|m| {
                let t = t_grid.point(m);
                self.bicubic(t * c, t * s)
            })
            .collect()
    }
}

/// One radial bin of the total magnitude.
#[derive(Debug, Clone, Copy)]
pub struct RadialBin {
    pub r: f64,
    pub value: f64,
}

/// A spectrum together with its radial reduction M(r).
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    pub spectrum: Spectrum,
    pub m: Vec<RadialBin>,
    pub bin_width: f64,
}

/// 2-D transform and the total magnitude
/// `M(r) = | integral over the circle |k| = r of F dk |`: complex cell
/// values are summed (signed, phased) within each one-cell-wide nearest-bin
/// annulus and the modulus is taken last. The sum is converted to a circle
/// line integral through the measured annulus area (`mean F x circumference`)
/// rather than the nominal `2 pi r dk`, which suppresses the cell-count
/// jitter of discrete annuli.
pub fn fft_grid(f: &GridFunction) -> SpectralProfile {
    let spec = fourier::forward_real_2d(&f.values, f.gx, f.gy);
    let kx = f.gx.freq_grid();
    let ky = f.gy.freq_grid();
    let spectrum = Spectrum { f: spec, kx, ky };
    let bin_width = kx.step.min(ky.step);
    let m = radial_reduce(&spectrum, bin_width, |v| v)
        .into_iter()
        .map(|(r, v, _)| RadialBin { r, value: v.norm() })
        .collect();
    SpectralProfile { spectrum, m, bin_width }
}

fn radial_reduce(
    spectrum: &Spectrum,
    bin_width: f64,
    map: impl Fn(Complex64) -> Complex64,
) -> Vec<(f64, Complex64, usize)> {
    let kmax = (spectrum.kx.point(0).powi(2) + spectrum.ky.point(0).powi(2)).sqrt();
    let nbins = (kmax / bin_width).ceil() as usize + 1;
    let mut acc = vec![Complex64::new(0.0, 0.0); nbins];
    let mut count = vec![0usize; nbins];
    let mut rsum = vec![0.0f64; nbins];
    for i in 0..spectrum.kx.len {
        let kxi = spectrum.kx.point(i);
        for j in 0..spectrum.ky.len {
            let kyj = spectrum.ky.point(j);
            let r = (kxi * kxi + kyj * kyj).sqrt();
            let b = (r / bin_width).round() as usize;
            if b < nbins {
                acc[b] += map(spectrum.f[(i, j)]);
                count[b] += 1;
                rsum[b] += r;
            }
        }
    }
    (0..nbins)
        .map(|b| {
            if count[b] == 0 {
                return (b as f64 * bin_width, Complex64::new(0.0, 0.0), 0);
            }
            let r_mean = rsum[b] / count[b] as f64;
            // mean(F) over the annulus cells times the circle circumference.
            let line = acc[b] / count[b] as f64 * (2.0 * std::f64::consts::PI * r_mean);
            // The r = 0 bin is the single DC cell: report the cell integral.
            if b == 0 {
                (0.0, acc[b] * spectrum.cell_area() / bin_width, count[b])
            } else {
                (b as f64 * bin_width, line, count[b])
            }
        })
        .collect()
}

/// Unsigned radial mass (`mean |F| x circumference` per annulus); used for
/// profile comparisons where phase cancellation is not wanted.
pub fn radial_abs_mass(spectrum: &Spectrum, bin_width: f64) -> Vec<RadialBin> {
    radial_reduce(spectrum, bin_width, |v| Complex64::new(v.norm(), 0.0))
        .into_iter()
        .map(|(r, v, _)| RadialBin { r, value: v.re })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveVariant {
    /// Plain L2 of the transform in radial coordinates: weight `1/k^(D-1)`.
    O1,
    /// With the dual-Radon deblurring factor: weight `k^(D-1)`.
    O2,
    /// Architecture and activation: weight `k^(D-1) rho_phi(k)`.
    O3,
}

/// Both coordinate evaluations of an objective and their relative gap.
#[derive(Debug, Clone, Copy)]
pub struct ObjectiveValue {
    pub cylinder: f64,
    pub euclidean: f64,
    pub rel_discrepancy: f64,
}

/// Evaluate a frequency objective along two independent routes (D = 2).
///
/// Cylinder route: per-direction central slices, weighted, inverse
/// transformed to offset space and squared there. Euclidean route: a
/// Cartesian sum of `weight(k) |F(k)|^2`, carrying the `1/(2pi)` Plancherel
/// constant of this crate's transform pair so the two routes are directly
/// comparable. `O3` with an infinite activation penalty returns +inf when
/// spectral mass sits outside the band.
pub fn objective(
    variant: ObjectiveVariant,
    f: &GridFunction,
    act: Option<&ActivationSpec>,
    n_angles: usize,
) -> Result<ObjectiveValue> {
    if matches!(variant, ObjectiveVariant::O3) && act.is_none() {
        return Err(Error::InvalidParams("O3 requires an activation".into()));
    }
    let profile = fft_grid(f);
    let spec = &profile.spectrum;

    // Euclidean route.
    let mut euclidean = 0.0f64;
    let area = spec.cell_area();
    for i in 0..spec.kx.len {
        for j in 0..spec.ky.len {
            let k = (spec.kx.point(i).powi(2) + spec.ky.point(j).powi(2)).sqrt();
            if k == 0.0 {
                continue;
            }
            let p = spec.f[(i, j)].norm_sqr();
            let w = match variant {
                ObjectiveVariant::O1 => 1.0 / k,
                ObjectiveVariant::O2 => k,
                ObjectiveVariant::O3 => {
                    let rho = act.unwrap().penalty(k);
                    if rho.is_infinite() {
                        if p * area > 1e-12 {
                            return Ok(ObjectiveValue {
                                cylinder: f64::INFINITY,
                                euclidean: f64::INFINITY,
                                rel_discrepancy: 0.0,
                            });
                        }
                        continue;
                    }
                    k * rho
                }
            };
            euclidean += w * p * area;
        }
    }
    euclidean *= 2.0 / (2.0 * PI);

    // Cylinder route: slices at angles in [0, pi), doubled for the full circle.
    let t_grid = spec.kx;
    // The dual grid of the slice grid (gamma space).
    let gamma_grid = {
        let dg = 2.0 * PI / (t_grid.len as f64 * t_grid.step);
        SampleGrid { start: -dg * (t_grid.len / 2) as f64, step: dg, len: t_grid.len }
    };
    let mut cylinder = 0.0f64;
    let dtheta = PI / n_angles as f64;
    for a in 0..n_angles {
        let angle = a as f64 * dtheta;
        let mut slice = spec.central_slice(angle, t_grid);
        for (m, v) in slice.iter_mut().enumerate() {
            let t = t_grid.point(m);
            let w: Complex64 = match variant {
                ObjectiveVariant::O1 => Complex64::new(1.0, 0.0),
                ObjectiveVariant::O2 => Complex64::new(t.abs(), 0.0),
                ObjectiveVariant::O3 => {
                    let filt = act.unwrap().filter(t);
                    if !(filt.re.is_finite() && filt.im.is_finite()) {
                        if v.norm_sqr() > 1e-12 {
                            return Ok(ObjectiveValue {
                                cylinder: f64::INFINITY,
                                euclidean: f64::INFINITY,
                                rel_discrepancy: 0.0,
                            });
                        }
                        Complex64::new(0.0, 0.0)
                    } else {
                        filt * t.abs()
                    }
                }
            };
            *v *= w;
        }
        let h = fourier::inverse_to_grid(&slice, gamma_grid);
        let sum: f64 = h.iter().map(|c| c.norm_sqr()).sum::<f64>() * gamma_grid.step;
        cylinder += sum * dtheta;
    }
    cylinder *= 2.0;

    let denom = cylinder.abs().max(euclidean.abs()).max(f64::MIN_POSITIVE);
    Ok(ObjectiveValue {
        cylinder,
        euclidean,
        rel_discrepancy: (cylinder - euclidean).abs() / denom,
    })
}

/// One neuron's line in the network spectrum: support `{u xi : u in R}`
/// with complex weight `mu e^{-i gamma u} F1[phi_omega](u)`.
#[derive(Debug, Clone)]
pub struct DiracLine {
    pub xi: Vec<f64>,
    pub gamma: f64,
    pub mu: f64,
    pub omega: f64,
}

#[derive(Debug, Clone)]
pub struct DiracLineSpectrum {
    pub lines: Vec<DiracLine>,
    activation: ActivationSpec,
}

impl DiracLineSpectrum {
    /// The complex line weight at signed frequency `u` along the line.
    pub fn weight(&self, line: &DiracLine, u: f64) -> Complex64 {
        let f1 = self.activation.fourier(u / line.omega) / (line.omega * line.omega);
        if !(f1.re.is_finite() && f1.im.is_finite()) {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        Complex64::from_polar(1.0, -line.gamma * u) * f1 * line.mu
    }

    /// Accumulate the lines onto a 2-D spectral grid for comparison with
    /// [`fft_grid`] of a windowed network sample.
    ///
    /// Both the transverse profile and the longitudinal smoothing follow
    /// from multiplying the network by the Gaussian window
    /// `exp(-|x|^2/(2 s^2))`: in frequency space each line is convolved
    /// with `F[window]`, which is separable along/across the line.
    pub fn project_to_grid(&self, kx: SampleGrid, ky: SampleGrid, window_sigma: f64) -> Array2<Complex64> {
        assert!(self.lines.iter().all(|l| l.xi.len() == 2), "grid projection is 2-D");
        let s = window_sigma;
        let gk = |t: f64| (2.0 * PI).sqrt() * s * (-0.5 * s * s * t * t).exp();
        let mut out = Array2::<Complex64>::zeros((kx.len, ky.len));
        // Quadrature step for the longitudinal convolution integral.
        let qstep = (1.0 / s) / 8.0;
        let qhalf = (5.0 / s / qstep).ceil() as i64;
        for line in &self.lines {
            let (e1, e2) = (line.xi[0], line.xi[1]);
            for i in 0..kx.len {
                for j in 0..ky.len {
                    let k1 = kx.point(i);
                    let k2 = ky.point(j);
                    let upar = k1 * e1 + k2 * e2;
                    let uperp = -k1 * e2 + k2 * e1;
                    let transverse = gk(uperp);
                    if transverse < 1e-14 {
                        continue;
                    }
                    // (1/2pi) (weight * F[g])(upar)
                    let mut conv = Complex64::new(0.0, 0.0);
                    for q in -qhalf..=qhalf {
                        let t = upar + q as f64 * qstep;
                        let w = self.weight(line, t);
                        if w.re.is_finite() && w.im.is_finite() {
                            conv += w * gk(upar - t) * qstep;
                        }
                    }
                    conv /= 2.0 * PI;
                    out[(i, j)] += conv * transverse;
                }
            }
        }
        out
    }
}

/// Symbolic line representation of the network transform
/// `F2[f](k) = sum_i mu_i e^{-i gamma_i <k, xi_i>} F1[phi_omega_i](<k, xi_i>) delta_line_i(k)`.
pub fn dirac_line_spectrum(s: &SplineParams, act: &ActivationSpec) -> Result<DiracLineSpectrum> {
    if s.c() != 1 {
        return Err(Error::InvalidParams("line spectrum is defined for scalar outputs".into()));
    }
    let lines = (0..s.h())
        .map(|i| DiracLine {
            xi: s.xi.row(i).to_vec(),
            gamma: s.gamma[i],
            mu: s.mu[(i, 0)],
            omega: s.omega[i],
        })
        .collect();
    Ok(DiracLineSpectrum { lines, activation: act.clone() })
}

/// One epsilon row of the contraction check.
#[derive(Debug, Clone, Copy)]
pub struct ContractionRow {
    pub eps: f64,
    /// Penalty of the resampled contraction `f(x/eps)`.
    pub direct: f64,
    /// `eps^-1 integral k rho_{phi_eps}(k) |F[f]|^2 dk` with the dilated
    /// activation `phi_eps = phi(eps .)`.
    pub predicted: f64,
    pub leakage_fraction: f64,
}

/// Evaluate the activation-weighted penalty of contractions `f_eps(x) = f(x/eps)`
/// two ways: directly (resample, transform, integrate) and through the
/// dilation identity. Uniform zero-plane density is assumed.
pub fn contraction_check(
    f: &GridFunction,
    act: &ActivationSpec,
    eps_list: &[f64],
) -> Result<Vec<ContractionRow>> {
    let base = fft_grid(f);
    // Cells below the DFT's floating-point noise floor are excluded: an
    // exploding penalty factor against roundoff-level spectral mass would
    // otherwise swamp the integral with garbage.
    let penalty_integral = |spec: &Spectrum, rho: &dyn Fn(f64) -> f64| -> (f64, f64) {
        let area = spec.cell_area();
        let kmax = spec.kx.point(0).abs().min(spec.ky.point(0).abs());
        let floor = spec.f.iter().map(|v| v.norm()).fold(0.0, f64::max) * 1e-12;
        let mut total = 0.0;
        let mut outer = 0.0;
        for i in 0..spec.kx.len {
            for j in 0..spec.ky.len {
                let k = (spec.kx.point(i).powi(2) + spec.ky.point(j).powi(2)).sqrt();
                if k == 0.0 || spec.f[(i, j)].norm() < floor {
                    continue;
                }
                let contrib = k * rho(k) * spec.f[(i, j)].norm_sqr() * area;
                total += contrib;
                if k > 0.95 * kmax {
                    outer += contrib;
                }
            }
        }
        (total, outer)
    };

    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParams(format!("eps must be in (0, 1], got {eps}")));
        }
        // Direct side: resample the contraction on the same grid.
        let contracted = GridFunction::from_fn(f.gx, f.gy, |x, y| f.bilinear(x / eps, y / eps));
        let cspec = fft_grid(&contracted);
        let rho_act = |k: f64| act.penalty(k);
        let (direct, outer) = penalty_integral(&cspec.spectrum, &rho_act);
        let leakage = if direct > 0.0 { outer / direct } else { 0.0 };
        if leakage > 0.01 {
            return Err(Error::SpectralLeakage { fraction: leakage * 100.0, eps });
        }
        // Identity side: dilated penalty against the base spectrum.
        // F[phi(eps .)](k) = F[phi](k/eps)/eps  =>  rho_dilated = eps^2 rho(k/eps).
        let rho_dilated = |k: f64| eps * eps * act.penalty(k / eps);
        let (pred_raw, _) = penalty_integral(&base.spectrum, &rho_dilated);
        rows.push(ContractionRow {
            eps,
            direct,
            predicted: pred_raw / eps,
            leakage_fraction: leakage,
        });
    }
    Ok(rows)
}

/// Exact change-of-variables control: the plain L2 mass of `f(x/eps)`
/// sampled on the grid scaled by `eps` equals `eps^D |f|^2` with the same
/// sample values, so the identity holds bit-for-bit.
pub fn l2_contraction_exact(f: &GridFunction, eps: f64) -> (f64, f64) {
    let scaled_area = (f.gx.step * eps) * (f.gy.step * eps);
    let lhs = f.values.iter().map(|v| v * v).sum::<f64>() * scaled_area;
    let rhs = eps * eps * f.norm_sq();
    (lhs, rhs)
}

/// Apply `(ik)^lambda` (principal branch) in frequency space: the
/// right-sided fractional derivative for positive `lambda`.
pub fn fractional_filter_apply(g: &[f64], grid: SampleGrid, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParams(format!("lambda must be positive, got {lambda}")));
    }
    let mut spec = fourier::forward_real(g, grid);
    let kg = grid.freq_grid();
    for (m, v) in spec.iter_mut().enumerate() {
        let k = kg.point(m);
        let mult = if k == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(k.abs().powf(lambda), lambda * PI / 2.0 * k.signum())
        };
        *v *= mult;
    }
    let out = fourier::inverse_to_grid(&spec, grid);
    Ok(out.into_iter().map(|c| c.re).collect())
}
