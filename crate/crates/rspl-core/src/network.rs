//! Shallow-network parameterizations and their bijection.
//!
//! `WeightParams` holds the raw per-neuron `(w_i, b_i, v_i)`; `SplineParams`
//! holds the spline form `(xi_i, gamma_i, mu_i, omega_i)` in which `xi` is a
//! unit orientation, `gamma` the signed breakplane offset, `mu` the scale and
//! `omega = |w|` the horizontal rescale. Multi-output networks carry `mu`
//! (and `v`) as per-neuron C-vectors with shared `xi, gamma, omega`.

use crate::activations::ActivationSpec;
use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightParams {
    /// H x D input weights.
    pub w: Array2<f64>,
    /// H biases.
    pub b: Array1<f64>,
    /// H x C output weights.
    pub v: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplineParams {
    /// H x D unit orientations.
    pub xi: Array2<f64>,
    /// H signed offsets.
    pub gamma: Array1<f64>,
    /// H x C scales (delta-slopes).
    pub mu: Array2<f64>,
    /// H positive input-weight norms.
    pub omega: Array1<f64>,
}

impl WeightParams {
    pub fn h(&self) -> usize {
        self.w.nrows()
    }
    pub fn d(&self) -> usize {
        self.w.ncols()
    }
    pub fn c(&self) -> usize {
        self.v.ncols()
    }
}

impl SplineParams {
    pub fn h(&self) -> usize {
        self.xi.nrows()
    }
    pub fn d(&self) -> usize {
        self.xi.ncols()
    }
    pub fn c(&self) -> usize {
        self.mu.ncols()
    }

    /// Orientation unit-norm and omega positivity.
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.xi.rows().into_iter().enumerate() {
            let n = row.dot(&row).sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParams(format!("|xi_{i}| = {n}, expected 1")));
            }
        }
        if self.omega.iter().any(|&o| !(o > 0.0)) {
            return Err(Error::InvalidParams("omega entries must be positive".into()));
        }
        Ok(())
    }

    /// Re-normalize each orientation row (the retraction after a tangent step).
    pub fn renormalize_xi(&mut self) {
        for mut row in self.xi.rows_mut() {
            let n = row.dot(&row).sqrt();
            if n > 0.0 {
                row.mapv_inplace(|x| x / n);
            }
        }
    }

    /// Experiment-style initialization: `xi` uniform on the sphere,
    /// `omega = 1`, `gamma` uniform on `[-a, a]`, `mu = 0`.
    pub fn init_uniform(h: usize, d: usize, c: usize, a: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xi = Array2::zeros((h, d));
        for mut row in xi.rows_mut() {
            loop {
                for x in row.iter_mut() {
                    *x = normal(&mut rng);
                }
                let n = row.dot(&row).sqrt();
                if n > 1e-8 {
                    row.mapv_inplace(|x| x / n);
                    break;
                }
            }
        }
        let gamma = Array1::from_iter((0..h).map(|_| rng.gen_range(-a..a)));
        Self { xi, gamma, mu: Array2::zeros((h, c)), omega: Array1::ones(h) }
    }
}

/// Box-Muller standard normal.
pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Training data. `y` is N x C (C = 1 for scalar regression targets).
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array2<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::Dataset("need at least one sample".into()));
        }
        if x.nrows() != y.nrows() {
            return Err(Error::Dataset(format!(
                "x has {} rows but y has {}",
                x.nrows(),
                y.nrows()
            )));
        }
        if x.iter().chain(y.iter()).any(|v| v.is_nan()) {
            return Err(Error::Dataset("NaN entries".into()));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }
    pub fn d(&self) -> usize {
        self.x.ncols()
    }
    pub fn c(&self) -> usize {
        self.y.ncols()
    }

    /// Largest pairwise distance scale: used for pinning tolerances.
    pub fn diameter(&self) -> f64 {
        let n = self.n();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut d2 = 0.0;
                for k in 0..self.d() {
                    let t = self.x[(i, k)] - self.x[(j, k)];
                    d2 += t * t;
                }
                best = best.max(d2);
            }
        }
        best.sqrt()
    }
}

/// `xi = w/|w|, gamma = -b/|w|, mu = v |w|, omega = |w|`.
pub fn to_spline(p: &WeightParams) -> Result<SplineParams> {
    let h = p.h();
    let mut xi = Array2::zeros((h, p.d()));
    let mut gamma = Array1::zeros(h);
    let mut mu = Array2::zeros((h, p.c()));
    let mut omega = Array1::zeros(h);
    for i in 0..h {
        let row = p.w.row(i);
        let norm = row.dot(&row).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParams(format!("w_{i} is the zero vector")));
        }
        xi.row_mut(i).assign(&row.mapv(|x| x / norm));
        gamma[i] = -p.b[i] / norm;
        for c in 0..p.c() {
            mu[(i, c)] = p.v[(i, c)] * norm;
        }
        omega[i] = norm;
    }
    Ok(SplineParams { xi, gamma, mu, omega })
}

/// Inverse of [`to_spline`]: `w = omega xi, b = -omega gamma, v = mu/omega`.
pub fn to_weights(s: &SplineParams) -> WeightParams {
    let h = s.h();
    let mut w = Array2::zeros((h, s.d()));
    let mut b = Array1::zeros(h);
    let mut v = Array2::zeros((h, s.c()));
    for i in 0..h {
        let om = s.omega[i];
        w.row_mut(i).assign(&s.xi.row(i).mapv(|x| x * om));
        b[i] = -om * s.gamma[i];
        for c in 0..s.c() {
            v[(i, c)] = s.mu[(i, c)] / om;
        }
    }
    WeightParams { w, b, v }
}

/// Pre-activations `z_ni = omega_i (<xi_i, x_n> - gamma_i)`, N x H.
pub fn preactivations(s: &SplineParams, x: &ArrayView2<f64>) -> Array2<f64> {
    let mut z = x.dot(&s.xi.t());
    for (mut row, _) in z.rows_mut().into_iter().zip(0..) {
        for i in 0..s.h() {
            row[i] = s.omega[i] * (row[i] - s.gamma[i]);
        }
    }
    z
}

/// Feature values `phi_omega(<xi_i, x_n> - gamma_i)`, N x H.
pub fn features(s: &SplineParams, act: &ActivationSpec, x: &ArrayView2<f64>) -> Result<Array2<f64>> {
    if !act.is_pointwise() {
        return Err(Error::DiracPointwise);
    }
    let mut z = preactivations(s, x);
    for mut row in z.rows_mut() {
        for i in 0..s.h() {
            row[i] = act.value(row[i]) / s.omega[i];
        }
    }
    Ok(z)
}

/// Network output `f(x_n) = sum_i mu_i phi_omega(<xi_i, x_n> - gamma_i)`, N x C.
pub fn forward(s: &SplineParams, act: &ActivationSpec, x: &ArrayView2<f64>) -> Result<Array2<f64>> {
    Ok(features(s, act, x)?.dot(&s.mu))
}

/// The function-preserving rescaling `(w, v, b) -> (alpha w, v/alpha, alpha b)`.
pub fn alpha_map(p: &WeightParams, alphas: &[f64]) -> Result<WeightParams> {
    if alphas.len() != p.h() {
        return Err(Error::InvalidParams("one alpha per neuron required".into()));
    }
    if alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidParams("alphas must be positive".into()));
    }
    let mut out = p.clone();
    for i in 0..p.h() {
        let a = alphas[i];
        out.w.row_mut(i).mapv_inplace(|x| x * a);
        out.b[i] *= a;
        out.v.row_mut(i).mapv_inplace(|x| x / a);
    }
    Ok(out)
}

/// `delta_i = |v_i|^2 - |w_i|^2 - b_i^2` from the weight form.
pub fn delta_stat(p: &WeightParams) -> Array1<f64> {
    Array1::from_iter((0..p.h()).map(|i| {
        let v2 = p.v.row(i).dot(&p.v.row(i));
        let w2 = p.w.row(i).dot(&p.w.row(i));
        v2 - w2 - p.b[i] * p.b[i]
    }))
}

/// The same statistic from the spline form:
/// `|mu_i|^2/omega_i^2 - (gamma_i^2 + 1) omega_i^2`.
pub fn delta_stat_spline(s: &SplineParams) -> Array1<f64> {
    Array1::from_iter((0..s.h()).map(|i| {
        let mu2 = s.mu.row(i).dot(&s.mu.row(i));
        let om2 = s.omega[i] * s.omega[i];
        mu2 / om2 - (s.gamma[i] * s.gamma[i] + 1.0) * om2
    }))
}

/// Training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// Mean squared error `(1/N) sum_n |f(x_n) - y_n|^2`.
    Mse,
    /// Mean softmax cross-entropy; targets must sum to 1 per row
    /// (one-hot labels or soft labels).
    SoftmaxCe,
}

impl Loss {
    pub fn value(&self, pred: &Array2<f64>, y: &Array2<f64>) -> f64 {
        let n = pred.nrows() as f64;
        match self {
            Loss::Mse => {
                let diff = pred - y;
                diff.iter().map(|v| v * v).sum::<f64>() / n
            }
            Loss::SoftmaxCe => {
                let mut total = 0.0;
                for (prow, yrow) in pred.rows().into_iter().zip(y.rows()) {
                    let max = prow.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let logsum = prow.iter().map(|&p| (p - max).exp()).sum::<f64>().ln() + max;
                    for (p, t) in prow.iter().zip(yrow.iter()) {
                        total -= t * (p - logsum);
                    }
                }
                total / n
            }
        }
    }

    /// dL/dpred, N x C.
    pub fn output_grad(&self, pred: &Array2<f64>, y: &Array2<f64>) -> Array2<f64> {
        let n = pred.nrows() as f64;
        match self {
            Loss::Mse => (pred - y).mapv(|v| 2.0 * v / n),
            Loss::SoftmaxCe => {
                let mut g = pred.clone();
                for mut row in g.rows_mut() {
                    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let sum: f64 = row.iter().map(|&p| (p - max).exp()).sum();
                    row.mapv_inplace(|p| (p - max).exp() / sum);
                }
                (&g - y).mapv(|v| v / n)
            }
        }
    }
}

/// Gradient of the loss in the weight parameterization.
#[derive(Debug, Clone)]
pub struct WeightGrad {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub v: Array2<f64>,
}

/// Gradient in the spline parameterization; `xi` rows are projected to the
/// tangent space of the unit sphere.
#[derive(Debug, Clone)]
pub struct SplineGrad {
    pub xi: Array2<f64>,
    pub gamma: Array1<f64>,
    pub mu: Array2<f64>,
    pub omega: Array1<f64>,
}

pub fn grad_weights(
    p: &WeightParams,
    act: &ActivationSpec,
    data: &Dataset,
    loss: Loss,
) -> Result<WeightGrad> {
    if !act.is_pointwise() {
        return Err(Error::DiracPointwise);
    }
    let x = data.x.view();
    // z_ni = <w_i, x_n> + b_i
    let mut z = x.dot(&p.w.t());
    for mut row in z.rows_mut() {
        for i in 0..p.h() {
            row[i] += p.b[i];
        }
    }
    let phi = z.mapv(|t| act.value(t));
    let dphi = z.mapv(|t| act.deriv(t));
    let pred = phi.dot(&p.v);
    let g = loss.output_grad(&pred, &data.y);

    let dv = phi.t().dot(&g);
    // s_ni = (sum_c g_nc v_ic) phi'(z_ni)
    let s = g.dot(&p.v.t()) * &dphi;
    let dw = s.t().dot(&x);
    let db = s.sum_axis(Axis(0));
    Ok(WeightGrad { w: dw, b: db, v: dv })
}

pub fn grad_spline(
    s: &SplineParams,
    act: &ActivationSpec,
    data: &Dataset,
    loss: Loss,
) -> Result<SplineGrad> {
    if !act.is_pointwise() {
        return Err(Error::DiracPointwise);
    }
    let x = data.x.view();
    let z = preactivations(s, &x);
    let mut phi_om = Array2::zeros(z.dim());
    let mut dphi = Array2::zeros(z.dim());
    for n in 0..z.nrows() {
        for i in 0..z.ncols() {
            phi_om[(n, i)] = act.value(z[(n, i)]) / s.omega[i];
            dphi[(n, i)] = act.deriv(z[(n, i)]);
        }
    }
    let pred = phi_om.dot(&s.mu);
    let g = loss.output_grad(&pred, &data.y);

    let dmu = phi_om.t().dot(&g);
    // t_ni = (sum_c g_nc mu_ic) phi'(z_ni)
    let t = g.dot(&s.mu.t()) * &dphi;
    let mut dxi = t.t().dot(&x);
    let dgamma = -t.sum_axis(Axis(0));
    // omega gradient: (mu.g) (phi'(z) z - phi(z)) / omega^2
    let mut domega = Array1::zeros(s.h());
    let gm = g.dot(&s.mu.t());
    for i in 0..s.h() {
        let om2 = s.omega[i] * s.omega[i];
        let mut acc = 0.0;
        for n in 0..z.nrows() {
            let zi = z[(n, i)];
            acc += gm[(n, i)] * (dphi[(n, i)] * zi - act.value(zi)) / om2;
        }
        domega[i] = acc;
    }
    // Project xi gradient onto the sphere tangent space.
    for i in 0..s.h() {
        let xi_row = s.xi.row(i);
        let dot = dxi.row(i).dot(&xi_row);
        let proj = xi_row.mapv(|x| x * dot);
        let new = &dxi.row(i) - &proj;
        dxi.row_mut(i).assign(&new);
    }
    Ok(SplineGrad { xi: dxi, gamma: dgamma, mu: dmu, omega: domega })
}
