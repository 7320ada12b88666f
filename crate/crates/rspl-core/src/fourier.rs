//! Continuous Fourier transforms approximated on uniform grids.
//!
//! One convention is used everywhere in this crate: angular frequency,
//! forward kernel `e^{-ikz}` with no prefactor, inverse kernel `e^{+ikz}`
//! with a `1/(2pi)` prefactor per dimension. Frequency grids are centered
//! (ascending, negative half first), with `k_m = 2 pi m / (n dz)` for
//! signed index `m in [-n/2, n/2)`.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Uniform 1-D sample grid `z_j = start + j * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl SampleGrid {
    /// Symmetric grid covering `[-half_width, half_width)` with `len` samples.
    pub fn symmetric(half_width: f64, len: usize) -> Self {
        let step = 2.0 * half_width / len as f64;
        Self { start: -half_width, step, len }
    }

    pub fn point(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|j| self.point(j)).collect()
    }

    /// The centered frequency grid dual to this sample grid.
    pub fn freq_grid(&self) -> SampleGrid {
        let dk = 2.0 * std::f64::consts::PI / (self.len as f64 * self.step);
        SampleGrid { start: -dk * (self.len / 2) as f64, step: dk, len: self.len }
    }

    pub fn index_of(&self, z: f64) -> Option<usize> {
        let j = ((z - self.start) / self.step).round();
        if j >= 0.0 && (j as usize) < self.len { Some(j as usize) } else { None }
    }
}

fn fft_inplace(buf: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    fft.process(buf);
}

/// Swap the two halves of a centered spectrum into DFT order (or back;
/// the operation is an involution for even `n`).
pub fn fftshift<T: Copy>(x: &[T]) -> Vec<T> {
    let n = x.len();
    let half = n / 2;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&x[half..]);
    out.extend_from_slice(&x[..half]);
    out
}

/// Forward transform of real samples on `grid`; returns the spectrum on
/// `grid.freq_grid()` (centered order).
pub fn forward_real(samples: &[f64], grid: SampleGrid) -> Vec<Complex64> {
    let buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_complex(&buf, grid)
}

/// Forward transform of complex samples on `grid`.
pub fn forward_complex(samples: &[Complex64], grid: SampleGrid) -> Vec<Complex64> {
    assert_eq!(samples.len(), grid.len, "sample count must match grid");
    let mut buf = samples.to_vec();
    fft_inplace(&mut buf, false);
    let shifted = fftshift(&buf);
    let kg = grid.freq_grid();
    shifted
        .into_iter()
        .enumerate()
        .map(|(m, v)| {
            let k = kg.point(m);
            let phase = Complex64::from_polar(1.0, -k * grid.start);
            v * grid.step * phase
        })
        .collect()
}

/// Inverse transform of a centered spectrum back onto the sample grid.
pub fn inverse_to_grid(spectrum: &[Complex64], grid: SampleGrid) -> Vec<Complex64> {
    assert_eq!(spectrum.len(), grid.len, "spectrum length must match grid");
    let kg = grid.freq_grid();
    let dephased: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(m, &v)| v * Complex64::from_polar(1.0, kg.point(m) * grid.start))
        .collect();
    let mut buf = fftshift(&dephased);
    fft_inplace(&mut buf, true);
    let scale = 1.0 / (grid.len as f64 * grid.step);
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// 2-D forward transform of real samples. `values[(j1, j2)]` lives at
/// `(g1.point(j1), g2.point(j2))`; the output is centered along both axes.
pub fn forward_real_2d(
    values: &ndarray::Array2<f64>,
    g1: SampleGrid,
    g2: SampleGrid,
) -> ndarray::Array2<Complex64> {
    let (n1, n2) = values.dim();
    assert_eq!((n1, n2), (g1.len, g2.len));
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(n1);
    for j1 in 0..n1 {
        let row: Vec<Complex64> = (0..n2).map(|j2| Complex64::new(values[(j1, j2)], 0.0)).collect();
        rows.push(forward_complex(&row, g2));
    }
    let mut out = ndarray::Array2::<Complex64>::zeros((n1, n2));
    for m2 in 0..n2 {
        let col: Vec<Complex64> = (0..n1).map(|j1| rows[j1][m2]).collect();
        let tcol = forward_complex(&col, g1);
        for (m1, v) in tcol.into_iter().enumerate() {
            out[(m1, m2)] = v;
        }
    }
    out
}

/// 2-D inverse transform of a centered spectrum back to real samples
/// (imaginary parts are dropped; callers check Hermitian symmetry upstream).
pub fn inverse_real_2d(
    spectrum: &ndarray::Array2<Complex64>,
    g1: SampleGrid,
    g2: SampleGrid,
) -> ndarray::Array2<f64> {
    let (n1, n2) = spectrum.dim();
    assert_eq!((n1, n2), (g1.len, g2.len));
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n2);
    for m2 in 0..n2 {
        let col: Vec<Complex64> = (0..n1).map(|m1| spectrum[(m1, m2)]).collect();
        cols.push(inverse_to_grid(&col, g1));
    }
    let mut out = ndarray::Array2::<f64>::zeros((n1, n2));
    for j1 in 0..n1 {
        let row: Vec<Complex64> = (0..n2).map(|m2| cols[m2][j1]).collect();
        let trow = inverse_to_grid(&row, g2);
        for (j2, v) in trow.into_iter().enumerate() {
            out[(j1, j2)] = v.re;
        }
    }
    out
}

/// Relative l2 distance between two complex vectors.
pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        return if num == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_pair() {
        // F[exp(-z^2/2)](k) = sqrt(2 pi) exp(-k^2/2) under this convention.
        let grid = SampleGrid::symmetric(32.0, 1 << 12);
        let samples: Vec<f64> = grid.points().iter().map(|&z| (-0.5 * z * z).exp()).collect();
        let spec = forward_real(&samples, grid);
        let kg = grid.freq_grid();
        let scale = (2.0 * std::f64::consts::PI).sqrt();
        for (m, v) in spec.iter().enumerate() {
            let k = kg.point(m);
            if k.abs() < 8.0 {
                let expect = scale * (-0.5 * k * k).exp();
                assert!((v.re - expect).abs() < 1e-10, "k={k}: {} vs {expect}", v.re);
                assert!(v.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn round_trip() {
        let grid = SampleGrid::symmetric(16.0, 1 << 10);
        let samples: Vec<f64> = grid
            .points()
            .iter()
            .map(|&z| (-0.3 * z * z).exp() * (1.7 * z).cos())
            .collect();
        let spec = forward_real(&samples, grid);
        let back = inverse_to_grid(&spec, grid);
        for (orig, rec) in samples.iter().zip(&back) {
            assert!((orig - rec.re).abs() < 1e-12);
            assert!(rec.im.abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_2d() {
        let g = SampleGrid::symmetric(4.0, 64);
        let vals = ndarray::Array2::from_shape_fn((64, 64), |(i, j)| {
            let x = g.point(i);
            let y = g.point(j);
            (-(x * x + y * y) / 2.0).exp() * (x + 0.5 * y).cos()
        });
        let spec = forward_real_2d(&vals, g, g);
        let back = inverse_real_2d(&spec, g, g);
        let err = (&back - &vals).mapv(f64::abs).sum() / vals.len() as f64;
        assert!(err < 1e-12, "mean abs error {err}");
    }

    #[test]
    fn gaussian_pair_2d() {
        // F2[exp(-|x|^2/2)](k) = 2 pi exp(-|k|^2/2).
        let g = SampleGrid::symmetric(16.0, 256);
        let vals = ndarray::Array2::from_shape_fn((256, 256), |(i, j)| {
            let x = g.point(i);
            let y = g.point(j);
            (-(x * x + y * y) / 2.0).exp()
        });
        let spec = forward_real_2d(&vals, g, g);
        let kg = g.freq_grid();
        let tau = 2.0 * std::f64::consts::PI;
        for (m1, m2) in [(128usize, 128usize), (140, 128), (128, 150), (135, 120)] {
            let k1 = kg.point(m1);
            let k2 = kg.point(m2);
            let expect = tau * (-(k1 * k1 + k2 * k2) / 2.0).exp();
            let got = spec[(m1, m2)];
            assert!((got.re - expect).abs() < 1e-8, "{} vs {expect}", got.re);
            assert!(got.im.abs() < 1e-8);
        }
    }
}
