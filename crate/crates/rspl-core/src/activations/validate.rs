//! Numerical cross-checks between sampled activations and their analytic
//! filters; shared by the unit tests and the acceptance suite.

use super::ActivationSpec;
use crate::fourier::{self, SampleGrid};
use num_complex::Complex64;

/// Relative l2 distance between the discrete transform of sampled phi and
/// the analytic `1/filter(k)` over the significant band.
///
/// Rows whose phi does not decay (Step, ReLU, sigmoids, ...) are
/// pre-multiplied by `diff_order` forward differences: the difference
/// operator's exact frequency symbol `(e^{ikh}-1)/h` is applied to the
/// analytic side, so the comparison stays an identity rather than an
/// approximation. The band keeps cells with `|F[phi]| >= band_floor`,
/// eroded by four cells around band edges where windowing smears
/// discontinuous transforms, and capped at 80% of Nyquist.
pub fn filter_consistency_rel_l2(
    act: &ActivationSpec,
    diff_order: usize,
    half_width: f64,
    samples: usize,
    band_floor: f64,
) -> f64 {
    // Midpoint offset dodges point singularities (log|z| at 0).
    let step = 2.0 * half_width / samples as f64;
    let grid = SampleGrid { start: -half_width + step / 2.0, step, len: samples };
    let mut phi: Vec<f64> = grid.points().iter().map(|&z| act.value(z)).collect();
    for _ in 0..diff_order {
        let mut next = vec![0.0; phi.len()];
        for j in 0..phi.len() - 1 {
            next[j] = (phi[j + 1] - phi[j]) / step;
        }
        next[phi.len() - 1] = (phi[0] - phi[phi.len() - 1]) / step;
        phi = next;
    }
    // The wrap-around rows of the difference stencil hold the periodic
    // seam (huge for growing activations); they occupy exactly the last
    // diff_order cells, so drop them outright, then taper the outer 10%
    // so any slowly-decaying remainder does not ring. Both happen after
    // differencing, keeping the analytic side exact.
    for j in phi.len().saturating_sub(diff_order + 2)..phi.len() {
        phi[j] = 0.0;
    }
    for (j, v) in phi.iter_mut().enumerate() {
        let z = grid.point(j);
        let a = z.abs() / half_width;
        if a > 0.9 {
            let t = ((a - 0.9) / 0.1).min(1.0);
            *v *= 0.5 * (1.0 + (std::f64::consts::PI * t).cos());
        }
    }
    let numeric = fourier::forward_real(&phi, grid);
    let kg = grid.freq_grid();
    let nyquist = kg.point(0).abs();

    // Analytic side with the discrete difference symbol. The DFT of
    // samples is the alias-periodized transform, so a cell only enters the
    // comparison when its alias images (paired summation of the closed
    // form, which converges quickly) are negligible against F(k): that is
    // the band on which the sampled transform genuinely represents the
    // continuum filter.
    let mut in_band = vec![false; kg.len];
    let mut analytic = vec![Complex64::new(0.0, 0.0); kg.len];
    let alias_step = 2.0 * std::f64::consts::PI / step;
    for m in 0..kg.len {
        let k = kg.point(m);
        let f = act.fourier(k);
        if !(f.re.is_finite() && f.im.is_finite()) {
            continue;
        }
        if f.norm() >= band_floor && k.abs() <= 0.8 * nyquist {
            let mut alias = Complex64::new(0.0, 0.0);
            for j in 1..=64i64 {
                let hi = act.fourier(k + j as f64 * alias_step);
                let lo = act.fourier(k - j as f64 * alias_step);
                if hi.re.is_finite() && hi.im.is_finite() {
                    alias += hi;
                }
                if lo.re.is_finite() && lo.im.is_finite() {
                    alias += lo;
                }
            }
            if alias.norm() <= 1e-4 * f.norm() {
                in_band[m] = true;
            }
        }
        let symbol = (Complex64::from_polar(1.0, k * step) - 1.0) / step;
        analytic[m] = f * symbol.powu(diff_order as u32);
    }
    // Erode the band around its edges.
    let mut eroded = in_band.clone();
    for m in 0..kg.len {
        if in_band[m] {
            for d in 1..=4usize {
                if m < d || m + d >= kg.len || !in_band[m - d] || !in_band[m + d] {
                    eroded[m] = false;
                    break;
                }
            }
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut cells = 0usize;
    for m in 0..kg.len {
        if eroded[m] {
            num += (numeric[m] - analytic[m]).norm_sqr();
            den += analytic[m].norm_sqr();
            cells += 1;
        }
    }
    if cells == 0 {
        return f64::NAN; // no alias-clean band on this grid
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// The catalog rows with closed-form transforms, each with the difference
/// order and grid that make its sampled transform trustworthy:
/// `(spec string, diff_order, half_width, log2 samples)`.
pub fn consistency_table() -> Vec<(&'static str, usize, f64, usize)> {
    vec![
        ("step", 1, 64.0, 14),
        ("relu", 2, 64.0, 14),
        ("powerrelu:lambda=1.5", 2, 512.0, 17),
        ("powerrelu:lambda=2.5", 3, 512.0, 17),
        ("powerrelu:lambda=3", 3, 64.0, 14),
        ("logisticbump:sigma=1", 0, 64.0, 14),
        ("sigmoid:sigma=1", 1, 64.0, 14),
        ("softplus:sigma=1", 2, 64.0, 14),
        ("cauchy:sigma=1", 0, 2048.0, 18),
        ("arctangent:sigma=1", 1, 2048.0, 18),
        ("gaussian:sigma=1", 0, 64.0, 14),
        ("erf:sigma=1", 1, 64.0, 14),
        ("satrelu:delta=1.5", 2, 64.0, 14),
        ("wavepacket:omega=3,sigma=0.7", 0, 64.0, 14),
        ("rectangle:a=0.8", 0, 64.0, 18),
        ("triangle:a=1.2", 0, 64.0, 14),
        ("sinc:a=0.75", 0, 4096.0, 20),
        ("squaredsinc:a=0.75", 0, 512.0, 17),
        ("halfexponential:a=1", 0, 64.0, 18),
        ("hyperbolicsecant:a=1", 0, 64.0, 14),
    ]
}
