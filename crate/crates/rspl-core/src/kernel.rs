//! Kernel-regime solvers: frozen features, the minimum-norm equality
//! program, its mse-ball relaxation solved through the ridge dual, and a
//! frozen-feature gradient trainer used to cross-check the convex route.

use crate::activations::ActivationSpec;
use crate::error::{Error, Result};
use crate::linalg;
use crate::network::{features, SplineParams};
use crate::optim::{Adam, Sgd};
use ndarray::{Array1, Array2, ArrayView2};

/// Features frozen at a parameter snapshot: `Phi[n, i] = phi_omega_i(<xi_i, x_n> - gamma_i)`.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub phi: Array2<f64>,
    pub activation: String,
    /// FNV-1a over the frozen (xi, gamma, omega) bytes; rebuilding from the
    /// same snapshot reproduces both the hash and Phi exactly.
    pub snapshot_hash: u64,
}

fn fnv1a(bytes: impl Iterator<Item = u8>) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub fn snapshot_hash(s: &SplineParams) -> u64 {
    let bytes = s
        .xi
        .iter()
        .chain(s.gamma.iter())
        .chain(s.omega.iter())
        .flat_map(|v| v.to_le_bytes());
    fnv1a(bytes)
}

pub fn build_features(
    s: &SplineParams,
    act: &ActivationSpec,
    x: &ArrayView2<f64>,
) -> Result<FeatureMatrix> {
    Ok(FeatureMatrix {
        phi: features(s, act, x)?,
        activation: act.to_string(),
        snapshot_hash: snapshot_hash(s),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Equality,
    MseBall,
    Gd,
}

/// A fitted coefficient vector with solver diagnostics.
#[derive(Debug, Clone)]
pub struct KernelSolution {
    pub mu_hat: Array1<f64>,
    /// `(1/N) |y - Phi mu_hat|^2`.
    pub residual_mse: f64,
    /// `|mu_hat - mu0|^2`.
    pub norm_sq: f64,
    pub method: SolveMethod,
    /// Numerical rank of the system (equality route).
    pub rank: Option<usize>,
    /// Ridge parameter `tau = N / lambda` found by the dual bisection.
    pub dual_tau: Option<f64>,
    pub iterations: Option<u64>,
    pub converged: bool,
}

fn residual_mse(phi: &Array2<f64>, y: &Array1<f64>, mu: &Array1<f64>) -> f64 {
    let r = y - &phi.dot(mu);
    r.dot(&r) / y.len() as f64
}

/// Eq.-style minimum-norm interpolation: `mu_hat = argmin |mu - mu0|` s.t.
/// `Phi mu = y`, via the complete orthogonal decomposition.
///
/// An inconsistent system is an error unless `allow_lsq` is set, in which
/// case the minimum-norm least-squares solution is returned with the
/// residual reported.
pub fn solve_min_norm(
    phi: &Array2<f64>,
    y: &Array1<f64>,
    mu0: &Array1<f64>,
    allow_lsq: bool,
) -> Result<KernelSolution> {
    let n = phi.nrows();
    assert_eq!(y.len(), n);
    assert_eq!(mu0.len(), phi.ncols());
    let rhs = y - &phi.dot(mu0);
    let (dx, rank, rres) = linalg::min_norm_solve(&phi.view(), &rhs.view());
    let scale = rhs.dot(&rhs).sqrt().max(1e-300);
    if rres > 1e-8 * scale && !allow_lsq {
        return Err(Error::InconsistentSystem { residual_mse: rres * rres / n as f64 });
    }
    let mu_hat = mu0 + &dx;
    Ok(KernelSolution {
        residual_mse: residual_mse(phi, y, &mu_hat),
        norm_sq: dx.dot(&dx),
        mu_hat,
        method: SolveMethod::Equality,
        rank: Some(rank),
        dual_tau: None,
        iterations: None,
        converged: true,
    })
}

/// Relaxed program: `argmin |mu - mu0|^2` s.t. `(1/N)|y - Phi mu|^2 <= eps`.
///
/// Solved through the Lagrangian dual, which reduces to ridge regression
/// with parameter `tau = N/lambda`: the dual residual is monotone in `tau`,
/// so `tau` is found by bisection on `[1e-12, 1e12]` (log scale) until the
/// KKT condition `residual = eps` holds. Uses the N x N Gram form, so the
/// cost is independent of H.
pub fn solve_mse_ball(
    phi: &Array2<f64>,
    y: &Array1<f64>,
    mu0: &Array1<f64>,
    eps: f64,
) -> Result<KernelSolution> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParams(format!("eps must be positive, got {eps}")));
    }
    let n = phi.nrows() as f64;
    let r0 = y - &phi.dot(mu0);
    let mse0 = r0.dot(&r0) / n;
    if mse0 <= eps {
        // Constraint inactive at mu0.
        return Ok(KernelSolution {
            mu_hat: mu0.clone(),
            residual_mse: mse0,
            norm_sq: 0.0,
            method: SolveMethod::MseBall,
            rank: None,
            dual_tau: None,
            iterations: Some(0),
            converged: true,
        });
    }

    // Gram eigendecomposition: K = Phi Phi^T = U diag(lam) U^T.
    let k = phi.dot(&phi.t());
    let (lam, u) = linalg::jacobi_eigh(&k.view());
    let c = u.t().dot(&r0);
    let lam_max = lam.iter().cloned().fold(0.0, f64::max).max(0.0);
    let clamp = |l: f64| if l > linalg::RANK_TOL * lam_max { l } else { 0.0 };

    // Feasibility floor: content of r0 outside the range of K.
    let floor: f64 = lam
        .iter()
        .zip(c.iter())
        .map(|(&l, &ci)| if clamp(l) == 0.0 { ci * ci } else { 0.0 })
        .sum::<f64>()
        / n;
    if eps < floor - 1e-12 * mse0 {
        return Err(Error::InfeasibleEps { eps, floor });
    }

    let resid_of = |tau: f64| -> f64 {
        lam.iter()
            .zip(c.iter())
            .map(|(&l, &ci)| {
                let le = clamp(l);
                let f = tau / (le + tau);
                f * f * ci * ci
            })
            .sum::<f64>()
            / n
    };

    let mut lo = 1e-12_f64.ln();
    let mut hi = 1e12_f64.ln();
    if resid_of(lo.exp()) > eps {
        // Bisection cannot reach below the numerical floor; report it.
        return Err(Error::InfeasibleEps { eps, floor: resid_of(lo.exp()) });
    }
    let mut iters = 0u64;
    for _ in 0..200 {
        iters += 1;
        let mid = 0.5 * (lo + hi);
        if resid_of(mid.exp()) > eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let tau = lo.exp();
    // mu = mu0 + Phi^T U diag(1/(lam + tau)) U^T r0.
    let mut scaled = Array1::<f64>::zeros(c.len());
    for i in 0..c.len() {
        scaled[i] = c[i] / (clamp(lam[i]) + tau);
    }
    let dual = u.dot(&scaled);
    let dx = phi.t().dot(&dual);
    let mu_hat = mu0 + &dx;
    Ok(KernelSolution {
        residual_mse: residual_mse(phi, y, &mu_hat),
        norm_sq: dx.dot(&dx),
        mu_hat,
        method: SolveMethod::MseBall,
        rank: None,
        dual_tau: Some(tau),
        iterations: Some(iters),
        converged: true,
    })
}

/// The seminorm estimate together with its cylinder-grid integrand, for
/// concentration diagnostics.
#[derive(Debug, Clone)]
pub struct SeminormField {
    /// Angles over the full circle `[0, 2 pi)`.
    pub angles: Vec<f64>,
    pub gammas: crate::fourier::SampleGrid,
    /// `integrand[(a, l)] = (kappa_2 h_theta(gamma))^2 / eta0`.
    pub integrand: ndarray::Array2<f64>,
    pub total: f64,
}

/// Numerical Radon-seminorm estimate of a sampled function (D = 2):
/// for each direction, take the central slice of the 2-D transform,
/// multiply by `kappa_2 |theta| / F[phi](theta)`, inverse transform to
/// offset space, square, weight by `1/eta0`, and integrate over the
/// cylinder. Cells where `eta0 = 0` against a nonzero numerator make the
/// whole estimate `+inf` (representational cost with no zero-planes).
pub fn radon_seminorm_estimate(
    f: &crate::spectral::GridFunction,
    act: &ActivationSpec,
    eta0: impl Fn(f64, f64) -> f64,
    n_angles: usize,
) -> Result<SeminormField> {
    use crate::spectral::KAPPA_2;
    let profile = crate::spectral::fft_grid(f);
    let spec = &profile.spectrum;
    let t_grid = spec.kx;
    let gamma_grid = {
        let dg = 2.0 * std::f64::consts::PI / (t_grid.len as f64 * t_grid.step);
        crate::fourier::SampleGrid { start: -dg * (t_grid.len / 2) as f64, step: dg, len: t_grid.len }
    };
    let dtheta = 2.0 * std::f64::consts::PI / n_angles as f64;
    let angles: Vec<f64> = (0..n_angles).map(|a| a as f64 * dtheta).collect();
    let mut integrand = ndarray::Array2::<f64>::zeros((n_angles, gamma_grid.len));
    let mut total = 0.0f64;
    for (a, &angle) in angles.iter().enumerate() {
        let mut slice = spec.central_slice(angle, t_grid);
        for (m, v) in slice.iter_mut().enumerate() {
            let t = t_grid.point(m);
            let filt = act.filter(t);
            if filt.re.is_finite() && filt.im.is_finite() {
                *v *= filt * t.abs() * KAPPA_2;
            } else {
                // Outside the activation band: content here costs infinity,
                // absence costs nothing.
                if v.norm_sqr() > 1e-12 {
                    total = f64::INFINITY;
                }
                *v *= 0.0;
            }
        }
        let h = crate::fourier::inverse_to_grid(&slice, gamma_grid);
        for (l, hv) in h.iter().enumerate() {
            let gamma = gamma_grid.point(l);
            let num = hv.re * hv.re;
            let den = eta0(angle, gamma);
            if den <= 0.0 {
                if num > 1e-18 {
                    total = f64::INFINITY;
                }
                continue;
            }
            let cell = num / den;
            integrand[(a, l)] = cell;
            if total.is_finite() {
                total += cell * gamma_grid.step * dtheta;
            }
        }
    }
    Ok(SeminormField { angles, gammas: gamma_grid, integrand, total })
}

#[derive(Debug, Clone, Copy)]
pub enum KernelOptimizer {
    Sgd { lr: f64 },
    Adam { lr: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct GdStop {
    pub mse_threshold: f64,
    pub max_iters: u64,
}

/// Full-batch gradient training of `mu` only, with features frozen.
/// Non-convergence is reported through the `converged` flag on the best
/// iterate, not as an error.
pub fn train_kernel_gd(
    features: &FeatureMatrix,
    y: &Array1<f64>,
    mu0: &Array1<f64>,
    optimizer: KernelOptimizer,
    stop: GdStop,
) -> KernelSolution {
    let phi = &features.phi;
    let n = phi.nrows() as f64;
    let h = phi.ncols();
    let mut mu = mu0.clone();
    let mut adam = match optimizer {
        KernelOptimizer::Adam { lr } => Some(Adam::new(h, lr)),
        KernelOptimizer::Sgd { .. } => None,
    };
    let mut best = mu.clone();
    let mut best_mse = residual_mse(phi, y, &mu);
    let mut iters = 0u64;
    let mut converged = best_mse <= stop.mse_threshold;
    while !converged && iters < stop.max_iters {
        iters += 1;
        let r = phi.dot(&mu) - y;
        let grad = phi.t().dot(&r).mapv(|g| 2.0 * g / n);
        match optimizer {
            KernelOptimizer::Sgd { lr } => {
                Sgd { lr }.step(mu.as_slice_mut().unwrap(), grad.as_slice().unwrap())
            }
            KernelOptimizer::Adam { .. } => adam
                .as_mut()
                .unwrap()
                .step(mu.as_slice_mut().unwrap(), grad.as_slice().unwrap()),
        }
        let mse = residual_mse(phi, y, &mu);
        if mse < best_mse {
            best_mse = mse;
            best.assign(&mu);
        }
        if mse <= stop.mse_threshold {
            converged = true;
        }
    }
    let dx = &best - mu0;
    KernelSolution {
        residual_mse: best_mse,
        norm_sq: dx.dot(&dx),
        mu_hat: best,
        method: SolveMethod::Gd,
        rank: None,
        dual_tau: None,
        iterations: Some(iters),
        converged,
    }
}
