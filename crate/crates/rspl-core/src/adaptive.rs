//! Adaptive-regime breakplane dynamics on the cylinder: the shared vector
//! field, its per-region attractor, local loss-landscape classification at
//! datapoint boundaries, and an explicit-Euler simulator with boundary,
//! pinning and cluster event detection.
//!
//! Residuals follow the dynamics-table convention `eps = f(x) - y` with the
//! unnormalized loss `l = (1/2) sum eps^2`; step sizes absorb constants.

use crate::activations::ActivationSpec;
use crate::error::{Error, Result};
use crate::network::{to_spline, to_weights, Dataset, SplineParams};
use ndarray::{Array1, Array2};

/// A point on the cylinder `S^(D-1) x R`.
#[derive(Debug, Clone)]
pub struct CylinderPoint {
    pub xi: Array1<f64>,
    pub gamma: f64,
}

impl CylinderPoint {
    pub fn new(xi: Array1<f64>, gamma: f64) -> Result<Self> {
        let n = xi.dot(&xi).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("|xi| = {n}, expected unit")));
        }
        Ok(Self { xi, gamma })
    }

    /// D = 2 convenience: `xi = (cos theta, sin theta)`.
    pub fn from_angle(theta: f64, gamma: f64) -> Self {
        Self { xi: ndarray::array![theta.cos(), theta.sin()], gamma }
    }

    /// The augmented coordinate `(xi_1, ..., xi_D, -gamma)`.
    pub fn xi_tilde(&self) -> Array1<f64> {
        let mut t = Array1::zeros(self.xi.len() + 1);
        for (i, &v) in self.xi.iter().enumerate() {
            t[i] = v;
        }
        t[self.xi.len()] = -self.gamma;
        t
    }
}

/// The activation pattern of a cylinder point on the training data
/// (`<xi, x_n> - gamma >= 0` is active; an exact zero counts as active).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationRegion {
    pub mask: Vec<bool>,
}

impl ActivationRegion {
    pub fn of(point: &CylinderPoint, data: &Dataset) -> Self {
        let mask = (0..data.n())
            .map(|n| point.xi.dot(&data.x.row(n)) - point.gamma >= 0.0)
            .collect();
        Self { mask }
    }

    pub fn active_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn hamming(&self, other: &Self) -> usize {
        self.mask.iter().zip(&other.mask).filter(|(a, b)| a != b).count()
    }
}

/// The shared vector field at one cylinder point.
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub point: CylinderPoint,
    /// `(D+1)`-vector `v = d_tilde - <d, xi> xi_tilde`; its spatial part is
    /// tangent to the sphere by construction.
    pub v: Array1<f64>,
    pub residuals: Array1<f64>,
    pub d_sigma: Array1<f64>,
    pub region: ActivationRegion,
}

fn field_with_weights(
    point: &CylinderPoint,
    data: &Dataset,
    residuals: &Array1<f64>,
    weight: impl Fn(f64) -> f64,
) -> (Array1<f64>, Array1<f64>, f64) {
    let d = point.xi.len();
    let mut d_sigma = Array1::<f64>::zeros(d);
    let mut ones = 0.0;
    for n in 0..data.n() {
        let z = point.xi.dot(&data.x.row(n)) - point.gamma;
        let w = weight(z);
        if w != 0.0 {
            let c = w * residuals[n];
            for k in 0..d {
                d_sigma[k] += c * data.x[(n, k)];
            }
            ones += c;
        }
    }
    // v = d_tilde - <d, xi> xi_tilde.
    let dot = d_sigma.dot(&point.xi);
    let mut v = Array1::<f64>::zeros(d + 1);
    for k in 0..d {
        v[k] = d_sigma[k] - dot * point.xi[k];
    }
    v[d] = ones - dot * (-point.gamma);
    (v, d_sigma, ones)
}

/// The ReLU shared field `v_t(sigma, xi_tilde)` with hard 0/1 masks.
pub fn shared_field(point: &CylinderPoint, data: &Dataset, residuals: &Array1<f64>) -> FieldSample {
    let region = ActivationRegion::of(point, data);
    let (v, d_sigma, _) =
        field_with_weights(point, data, residuals, |z| if z >= 0.0 { 1.0 } else { 0.0 });
    FieldSample { point: point.clone(), v, residuals: residuals.clone(), d_sigma, region }
}

/// The relaxed field for a smooth activation: the 0/1 masks become the
/// activation-derivative weights `phi'(z_n)`, removing the discontinuities
/// at region boundaries.
pub fn smooth_boundary_field(
    act: &ActivationSpec,
    point: &CylinderPoint,
    data: &Dataset,
    residuals: &Array1<f64>,
) -> Result<FieldSample> {
    if !act.is_pointwise() {
        return Err(Error::DiracPointwise);
    }
    let region = ActivationRegion::of(point, data);
    let (v, d_sigma, _) = field_with_weights(point, data, residuals, |z| act.deriv(z));
    Ok(FieldSample { point: point.clone(), v, residuals: residuals.clone(), d_sigma, region })
}

/// Per-neuron time derivatives of `(xi_i, gamma_i)`.
#[derive(Debug, Clone)]
pub struct CylinderRhs {
    /// H x D, tangent rows.
    pub xi_dot: Array2<f64>,
    pub gamma_dot: Array1<f64>,
}

fn rhs_impl(
    s: &SplineParams,
    act: &ActivationSpec,
    data: &Dataset,
    residuals: &Array1<f64>,
    rate: impl Fn(usize) -> f64,
    gamma_coupling: bool,
) -> CylinderRhs {
    let h = s.h();
    let d = s.d();
    let mut xi_dot = Array2::<f64>::zeros((h, d));
    let mut gamma_dot = Array1::<f64>::zeros(h);
    for i in 0..h {
        let point = CylinderPoint { xi: s.xi.row(i).to_owned(), gamma: s.gamma[i] };
        // phi' is evaluated at the rescaled pre-activation; for ReLU the
        // weight is the scale-invariant mask.
        let om = s.omega[i];
        let (v, _, ones) =
            field_with_weights(&point, data, residuals, |z| act.deriv(om * z));
        let r = rate(i);
        for k in 0..d {
            xi_dot[(i, k)] = -r * v[k];
        }
        // Direct theta_RS descent has no gamma coupling (the projection
        // subtracts (xi, 0), not xi_tilde); theta_NN training picks up the
        // gamma <X, xi> Jacobian term carried by the field's last component.
        gamma_dot[i] = if gamma_coupling { r * v[d] } else { r * ones };
    }
    CylinderRhs { xi_dot, gamma_dot }
}

/// Breakplane derivatives under theta_RS training: rate multiplier `mu_i`.
/// For ReLU the derivative weights reduce to the hard region masks.
pub fn rhs_spline(
    s: &SplineParams,
    act: &ActivationSpec,
    data: &Dataset,
    residuals: &Array1<f64>,
) -> CylinderRhs {
    rhs_impl(s, act, data, residuals, |i| s.mu[(i, 0)], false)
}

/// Breakplane derivatives induced by theta_NN training: the Jacobian of the
/// reparameterization contributes the `1/omega^2` rate and the
/// `gamma <X, xi>` coupling in the gamma equation (both carried by the
/// shared field's last component).
pub fn rhs_weights(
    s: &SplineParams,
    act: &ActivationSpec,
    data: &Dataset,
    residuals: &Array1<f64>,
) -> Result<CylinderRhs> {
    if s.omega.iter().any(|&o| o == 0.0) {
        return Err(Error::InvalidParams("omega must be nonzero".into()));
    }
    Ok(rhs_impl(s, act, data, residuals, |i| s.mu[(i, 0)] / (s.omega[i] * s.omega[i]), true))
}

/// The fixed point of `v_t(sigma, .)`:
/// `xi_tilde* = (d_sigma : <eps, 1_sigma>) / |d_sigma|` (sink), with the
/// antipode as source. The published display carries the opposite sign on
/// the offset component, which contradicts both the field's own zero and
/// the gamma-stationarity condition; the zero is implemented.
pub fn attractor(
    region: &ActivationRegion,
    data: &Dataset,
    residuals: &Array1<f64>,
) -> Result<(CylinderPoint, CylinderPoint)> {
    let d = data.d();
    let mut d_sigma = Array1::<f64>::zeros(d);
    let mut ones = 0.0;
    for n in 0..data.n() {
        if region.mask[n] {
            for k in 0..d {
                d_sigma[k] += residuals[n] * data.x[(n, k)];
            }
            ones += residuals[n];
        }
    }
    let norm = d_sigma.dot(&d_sigma).sqrt();
    if norm <= 1e-300 {
        return Err(Error::DegenerateRegion);
    }
    // xi_tilde = (xi, -gamma): the sink's last component is +ones/|d|,
    // so gamma_sink = -ones/|d|.
    let xi = d_sigma.mapv(|x| x / norm);
    let sink = CylinderPoint { xi: xi.clone(), gamma: -ones / norm };
    let source = CylinderPoint { xi: xi.mapv(|x| -x), gamma: ones / norm };
    Ok((sink, source))
}

/// Tangential norm of the field at a point: spatial part projected to the
/// sphere tangent plus the free offset component.
pub fn tangential_norm(sample: &FieldSample) -> f64 {
    let d = sample.point.xi.len();
    let dot: f64 = (0..d).map(|k| sample.v[k] * sample.point.xi[k]).sum();
    let mut s = 0.0;
    for k in 0..d {
        let t = sample.v[k] - dot * sample.point.xi[k];
        s += t * t;
    }
    s += sample.v[d] * sample.v[d];
    s.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryClass {
    Valley,
    Ridge,
    PassThrough,
    Plateau,
    Basin,
}

/// Classify the single-neuron conditional loss along the cylinder normal of
/// the datapoint boundary `E_n` at neuron `i`'s current position (D = 2,
/// all other neurons frozen).
///
/// With active data on both sides the stencil reads valley / ridge /
/// pass-through from the slope signs. When one side carries no active data
/// that side is exactly flat; a data-side slope rising away from the
/// boundary still pins arrivals (classified Valley), a falling one repels
/// (Ridge), and a flat data side distinguishes Plateau from Basin by level.
pub fn classify_boundary(
    s: &SplineParams,
    act: &ActivationSpec,
    neuron: usize,
    datapoint: usize,
    data: &Dataset,
    probe_step: f64,
) -> Result<BoundaryClass> {
    if s.d() != 2 {
        return Err(Error::InvalidParams("boundary classification is 2-D".into()));
    }
    let xi = s.xi.row(neuron).to_owned();
    let theta = xi[1].atan2(xi[0]);
    let gamma = s.gamma[neuron];
    let xn = data.x.row(datapoint).to_owned();
    let z = xi.dot(&xn) - gamma;
    if z.abs() > 10.0 * probe_step {
        return Err(Error::InvalidParams(format!(
            "neuron {neuron} is not on E_{datapoint}: distance {z}"
        )));
    }
    // Boundary curve gamma_n(theta) = <xi(theta), x_n>; normal in the
    // (theta, gamma) chart.
    let dgamma_dtheta = -theta.sin() * xn[0] + theta.cos() * xn[1];
    let norm = (1.0 + dgamma_dtheta * dgamma_dtheta).sqrt();
    let n_theta = -dgamma_dtheta / norm;
    let n_gamma = 1.0 / norm;

    let loss_at = |delta: f64| -> (f64, bool) {
        let th = theta + delta * n_theta;
        let gm = gamma + delta * n_gamma;
        let mut probe = s.clone();
        probe.xi[(neuron, 0)] = th.cos();
        probe.xi[(neuron, 1)] = th.sin();
        probe.gamma[neuron] = gm;
        let pred = crate::network::forward(&probe, act, &data.x.view()).unwrap();
        let mut l = 0.0;
        for n in 0..data.n() {
            let e = pred[(n, 0)] - data.y[(n, 0)];
            l += 0.5 * e * e;
        }
        // Does the probed neuron see any active data?
        let point = CylinderPoint { xi: probe.xi.row(neuron).to_owned(), gamma: gm };
        let active = ActivationRegion::of(&point, data).active_count() > 0;
        (l, active)
    };
    // Ambiguity check: within the stencil the activation pattern may differ
    // from the center only in datapoint `datapoint`.
    let center_point = CylinderPoint { xi: xi.clone(), gamma };
    let center_region = ActivationRegion::of(&center_point, data);
    for delta in [-2.0, -1.0, 1.0, 2.0] {
        let th = theta + delta * probe_step * n_theta;
        let gm = gamma + delta * probe_step * n_gamma;
        let p = CylinderPoint::from_angle(th, gm);
        let r = ActivationRegion::of(&p, data);
        for n in 0..data.n() {
            if n != datapoint && r.mask[n] != center_region.mask[n] {
                return Err(Error::AmbiguousProbe);
            }
        }
    }

    let h = probe_step;
    let (l_m2, _) = loss_at(-2.0 * h);
    let (l_m1, a_m1) = loss_at(-h);
    let (l_0, _) = loss_at(0.0);
    let (l_p1, a_p1) = loss_at(h);
    let (l_p2, _) = loss_at(2.0 * h);

    let s_minus = (l_0 - l_m1) / h;
    let s_plus = (l_p1 - l_0) / h;
    let scale = (l_0.abs() + l_m1.abs() + l_p1.abs()).max(1e-12);
    let flat_tol = 1e-9 * scale / h;
    let flat_minus = !a_m1 || s_minus.abs() < flat_tol && (l_m2 - l_m1).abs() < flat_tol * h;
    let flat_plus = !a_p1 || s_plus.abs() < flat_tol && (l_p2 - l_p1).abs() < flat_tol * h;

    if flat_minus && flat_plus {
        return Ok(BoundaryClass::Plateau);
    }
    if flat_minus || flat_plus {
        // One-sided data: the sloped side decides.
        let (slope_away, flat_level, data_level) = if flat_minus {
            (s_plus, l_m1, l_p1)
        } else {
            (-s_minus, l_p1, l_m1)
        };
        if slope_away > flat_tol {
            return Ok(BoundaryClass::Valley);
        }
        if slope_away < -flat_tol {
            return Ok(BoundaryClass::Ridge);
        }
        return Ok(if flat_level > data_level { BoundaryClass::Plateau } else { BoundaryClass::Basin });
    }
    // Two-sided: compare slope signs across the crease.
    if s_minus < 0.0 && s_plus > 0.0 {
        Ok(BoundaryClass::Valley)
    } else if s_minus > 0.0 && s_plus < 0.0 {
        Ok(BoundaryClass::Ridge)
    } else {
        Ok(BoundaryClass::PassThrough)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameterization {
    Spline,
    Weights,
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub parameterization: Parameterization,
    pub steps: u64,
    pub step_size: f64,
    pub snapshot_every: u64,
    /// Freeze the scales (Fig.-style single-breakplane slices probe the
    /// conditional loss with mu fixed).
    pub freeze_mu: bool,
    /// Pinning distance as a fraction of the data diameter.
    pub pin_tol_fraction: f64,
    /// Consecutive steps below tolerance before a pin is declared.
    pub pin_dwell: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            parameterization: Parameterization::Spline,
            steps: 10_000,
            step_size: 1e-3,
            snapshot_every: 100,
            freeze_mu: false,
            pin_tol_fraction: 1e-2,
            pin_dwell: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimEvent {
    BoundaryCrossing { step: u64, neuron: usize, datapoint: usize },
    /// Activation pattern changed by more than one datapoint in one step.
    PatternJump { step: u64, neuron: usize, hamming: usize },
    PinningOnset { step: u64, neuron: usize, datapoint: usize },
    PinPairFormed { step: u64, neuron: usize, datapoints: (usize, usize) },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<(u64, SplineParams)>,
    pub events: Vec<SimEvent>,
    /// Per snapshot: (step, mean breakplane speed, attractor drift speed).
    /// The cluster story depends on their ratio; it is logged, not judged.
    pub speed_log: Vec<(u64, f64, f64)>,
}

impl Trajectory {
    pub fn final_params(&self) -> &SplineParams {
        &self.snapshots.last().unwrap().1
    }

    pub fn pinned_pairs(&self) -> Vec<&SimEvent> {
        self.events.iter().filter(|e| matches!(e, SimEvent::PinPairFormed { .. })).collect()
    }
}

/// Explicit-Euler simulation of breakplane dynamics with event detection.
/// Masks are recomputed each step (no event-time root finding); crossings,
/// pattern jumps, pinning onsets and pin pairs are logged post hoc.
pub fn simulate(
    s0: &SplineParams,
    act: &ActivationSpec,
    data: &Dataset,
    config: &SimulationConfig,
) -> Result<Trajectory> {
    if !act.is_pointwise() {
        return Err(Error::DiracPointwise);
    }
    if s0.c() != 1 {
        return Err(Error::InvalidParams("simulation drives scalar-output networks".into()));
    }
    let h = s0.h();
    let eta = config.step_size;
    let diam = data.diameter();
    let pin_tol = config.pin_tol_fraction * diam.max(f64::MIN_POSITIVE);

    let mut s = s0.clone();
    let mut w = to_weights(&s);
    let mut events = Vec::new();
    let mut snapshots = vec![(0u64, s.clone())];
    let mut speed_log = Vec::new();

    let mut masks: Vec<ActivationRegion> = (0..h)
        .map(|i| {
            ActivationRegion::of(
                &CylinderPoint { xi: s.xi.row(i).to_owned(), gamma: s.gamma[i] },
                data,
            )
        })
        .collect();
    let mut pin_counters = vec![vec![0u64; data.n()]; h];
    let mut pinned = vec![vec![false; data.n()]; h];
    let mut pair_logged = vec![false; h];
    let mut last_snapshot_xi_tilde: Vec<Array1<f64>> = (0..h)
        .map(|i| CylinderPoint { xi: s.xi.row(i).to_owned(), gamma: s.gamma[i] }.xi_tilde())
        .collect();
    let mut last_attractors: Vec<Option<Array1<f64>>> = vec![None; h];

    for step in 1..=config.steps {
        let pred = crate::network::forward(&s, act, &data.x.view())?;
        let residuals =
            Array1::from_iter((0..data.n()).map(|n| pred[(n, 0)] - data.y[(n, 0)]));

        match config.parameterization {
            Parameterization::Spline => {
                let rhs = rhs_spline(&s, act, data, &residuals);
                for i in 0..h {
                    for k in 0..s.d() {
                        s.xi[(i, k)] += eta * rhs.xi_dot[(i, k)];
                    }
                    s.gamma[i] += eta * rhs.gamma_dot[i];
                }
                s.renormalize_xi();
                if !config.freeze_mu {
                    // d mu/dt = -<eps, phi_omega(z)>.
                    let feats = crate::network::features(&s, act, &data.x.view())?;
                    for i in 0..h {
                        let mut g = 0.0;
                        for n in 0..data.n() {
                            g += residuals[n] * feats[(n, i)];
                        }
                        s.mu[(i, 0)] -= eta * g;
                    }
                }
            }
            Parameterization::Weights => {
                // Euler GD on (w, b, v) with the residual-sum loss.
                let z = {
                    let mut z = data.x.dot(&w.w.t());
                    for mut row in z.rows_mut() {
                        for i in 0..h {
                            row[i] += w.b[i];
                        }
                    }
                    z
                };
                let mut dw = Array2::<f64>::zeros((h, s.d()));
                let mut db = Array1::<f64>::zeros(h);
                let mut dv = Array1::<f64>::zeros(h);
                for i in 0..h {
                    for n in 0..data.n() {
                        let phi = act.value(z[(n, i)]);
                        let dphi = act.deriv(z[(n, i)]);
                        let e = residuals[n];
                        dv[i] += e * phi;
                        let c = e * w.v[(i, 0)] * dphi;
                        db[i] += c;
                        for k in 0..s.d() {
                            dw[(i, k)] += c * data.x[(n, k)];
                        }
                    }
                }
                for i in 0..h {
                    for k in 0..s.d() {
                        w.w[(i, k)] -= eta * dw[(i, k)];
                    }
                    w.b[i] -= eta * db[i];
                    if !config.freeze_mu {
                        w.v[(i, 0)] -= eta * dv[i];
                    }
                }
                s = to_spline(&w)?;
            }
        }

        // Event detection on the new state.
        for i in 0..h {
            let point = CylinderPoint { xi: s.xi.row(i).to_owned(), gamma: s.gamma[i] };
            let region = ActivationRegion::of(&point, data);
            let jump = region.hamming(&masks[i]);
            if jump > 1 {
                events.push(SimEvent::PatternJump { step, neuron: i, hamming: jump });
            }
            if jump > 0 {
                for n in 0..data.n() {
                    if region.mask[n] != masks[i].mask[n] {
                        events.push(SimEvent::BoundaryCrossing { step, neuron: i, datapoint: n });
                    }
                }
            }
            masks[i] = region;

            for n in 0..data.n() {
                let dist = (point.xi.dot(&data.x.row(n)) - point.gamma).abs();
                if dist < pin_tol {
                    pin_counters[i][n] += 1;
                    if pin_counters[i][n] == config.pin_dwell && !pinned[i][n] {
                        pinned[i][n] = true;
                        events.push(SimEvent::PinningOnset { step, neuron: i, datapoint: n });
                    }
                } else {
                    pin_counters[i][n] = 0;
                    pinned[i][n] = false;
                }
            }
            if !pair_logged[i] {
                let held: Vec<usize> =
                    (0..data.n()).filter(|&n| pinned[i][n]).collect();
                if held.len() >= 2 {
                    pair_logged[i] = true;
                    events.push(SimEvent::PinPairFormed {
                        step,
                        neuron: i,
                        datapoints: (held[0], held[1]),
                    });
                }
            }
        }

        if step % config.snapshot_every == 0 || step == config.steps {
            // Speed bookkeeping: breakplane motion vs attractor motion.
            let mut plane_speed = 0.0;
            let mut attractor_speed = 0.0;
            let mut attractor_count = 0usize;
            for i in 0..h {
                let now =
                    CylinderPoint { xi: s.xi.row(i).to_owned(), gamma: s.gamma[i] }.xi_tilde();
                let diff = &now - &last_snapshot_xi_tilde[i];
                plane_speed += diff.dot(&diff).sqrt();
                last_snapshot_xi_tilde[i] = now;
                if let Ok((sink, _)) = attractor(&masks[i], data, &residuals) {
                    let tilde = sink.xi_tilde();
                    if let Some(prev) = &last_attractors[i] {
                        let d = &tilde - prev;
                        attractor_speed += d.dot(&d).sqrt();
                        attractor_count += 1;
                    }
                    last_attractors[i] = Some(tilde);
                } else {
                    last_attractors[i] = None;
                }
            }
            let denom = config.snapshot_every as f64;
            speed_log.push((
                step,
                plane_speed / (h as f64 * denom),
                if attractor_count > 0 {
                    attractor_speed / (attractor_count as f64 * denom)
                } else {
                    f64::NAN
                },
            ));
            snapshots.push((step, s.clone()));
        }
    }
    Ok(Trajectory { snapshots, events, speed_log })
}
