//! The five 2-D target functions fitted in the kernel-regime experiments,
//! chosen for their distinct Fourier signatures.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// Sum of six plane waves with random phase, frequency, direction and
    /// amplitude: six +/- Dirac pairs in frequency.
    PlaneWaves,
    /// `J0(2 pi |x|)`: a Dirac ring of radius 2 pi.
    BesselRing,
    /// 0 on the disc of radius 3/4, 1 outside: a 1/|k|^2 spectrum.
    Hole2d,
    /// Product of two 1-D chirps under a smooth envelope.
    Doppler2d,
    /// Signed sum of sharply pointed product bumps, regularized at the axes.
    Bumps2d,
}

impl TargetKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_lowercase().replace(['-', '_'], "").as_str() {
            "planewaves" => Some(Self::PlaneWaves),
            "besselring" => Some(Self::BesselRing),
            "hole2d" | "hole" => Some(Self::Hole2d),
            "doppler2d" | "doppler" => Some(Self::Doppler2d),
            "bumps2d" | "bumps" => Some(Self::Bumps2d),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PlaneWaves => "plane_waves",
            Self::BesselRing => "bessel_ring",
            Self::Hole2d => "hole_2d",
            Self::Doppler2d => "doppler_2d",
            Self::Bumps2d => "bumps_2d",
        }
    }
}

#[derive(Debug, Clone)]
enum Params {
    Waves(Vec<Wave>),
    Bumps(Vec<Bump>),
    None,
}

#[derive(Debug, Clone, Copy)]
struct Wave {
    kx: f64,
    ky: f64,
    amplitude: f64,
    phase: f64,
}

#[derive(Debug, Clone, Copy)]
struct Bump {
    cx: f64,
    cy: f64,
    scale: f64,
    weight: f64,
}

/// A target with its seeded shape parameters.
#[derive(Debug, Clone)]
pub struct TargetFunction {
    pub kind: TargetKind,
    pub seed: u64,
    params: Params,
}

pub fn make_target(kind: TargetKind, seed: u64) -> TargetFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = match kind {
        TargetKind::PlaneWaves => Params::Waves(
            (0..6)
                .map(|_| {
                    let angle = rng.gen_range(0.0..(2.0 * PI));
                    let freq = rng.gen_range(1.0..7.0);
                    Wave {
                        kx: freq * angle.cos(),
                        ky: freq * angle.sin(),
                        amplitude: rng.gen_range(0.5..1.5),
                        phase: rng.gen_range(0.0..(2.0 * PI)),
                    }
                })
                .collect(),
        ),
        TargetKind::Bumps2d => Params::Bumps(
            (0..6)
                .map(|_| Bump {
                    cx: rng.gen_range(-1.5..1.5),
                    cy: rng.gen_range(-1.5..1.5),
                    scale: rng.gen_range(0.3..1.0),
                    weight: rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
                })
                .collect(),
        ),
        _ => Params::None,
    };
    TargetFunction { kind, seed, params }
}

impl TargetFunction {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        match (&self.kind, &self.params) {
            (TargetKind::PlaneWaves, Params::Waves(waves)) => waves
                .iter()
                .map(|w| w.amplitude * (w.kx * x1 + w.ky * x2 + w.phase).cos())
                .sum(),
            (TargetKind::BesselRing, _) => bessel_j0(2.0 * PI * (x1 * x1 + x2 * x2).sqrt()),
            (TargetKind::Hole2d, _) => {
                if (x1 * x1 + x2 * x2).sqrt() <= 0.75 {
                    0.0
                } else {
                    1.0
                }
            }
            (TargetKind::Doppler2d, _) => doppler_1d((x1 + 2.0) / 4.0) * doppler_1d((x2 + 2.0) / 4.0),
            (TargetKind::Bumps2d, Params::Bumps(bumps)) => bumps
                .iter()
                .map(|b| {
                    b.weight
                        * pointy((x1 - b.cx) / b.scale)
                        * pointy((x2 - b.cy) / b.scale)
                })
                .sum(),
            _ => unreachable!("params match the kind by construction"),
        }
    }
}

/// Donoho-style chirp with a smooth envelope, mapped to `t in [0, 1]`.
fn doppler_1d(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    (t * (1.0 - t)).max(0.0).sqrt() * (2.1 * PI / (t + 0.05)).sin()
}

/// `(s / (|u| + s))^4` with s = 0.05: the sharply pointed bump profile,
/// regularized at the axis and normalized to peak 1.
fn pointy(u: f64) -> f64 {
    let s = 0.05;
    (s / (u.abs() + s)).powi(4)
}

/// Bessel function of the first kind, order zero. Power series up to
/// |t| <= 12, Hankel asymptotic expansion beyond; absolute error stays
/// below ~1e-10 over the grid ranges used here.
pub fn bessel_j0(t: f64) -> f64 {
    let t = t.abs();
    if t <= 12.0 {
        let q = t * t / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..80 {
            term *= -q / ((m * m) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        sum
    } else {
        // J0(t) = sqrt(2/(pi t)) [P(t) cos(t - pi/4) - Q(t) sin(t - pi/4)],
        // with c_m = prod (2j-1)^2 / (8 m): P takes the even m terms with
        // alternating sign, Q the odd ones.
        let mut p = 1.0;
        let mut q = 0.0;
        let mut c = 1.0;
        let mut last = f64::INFINITY;
        for m in 1..40 {
            let mf = m as f64;
            c *= (2.0 * mf - 1.0) * (2.0 * mf - 1.0) / (8.0 * mf);
            let term = c / t.powi(m as i32);
            if term.abs() > last {
                break; // asymptotic series started diverging
            }
            last = term.abs();
            match m % 4 {
                1 => q -= term,
                2 => p -= term,
                3 => q += term,
                _ => p += term,
            }
        }
        let phase = t - PI / 4.0;
        (2.0 / (PI * t)).sqrt() * (p * phase.cos() - q * phase.sin())
    }
}
