//! Shallow networks in the radon-spline parameterization: an activation
//! catalog with analytic spectral penalties, kernel-regime min-norm solvers,
//! adaptive-regime breakplane dynamics, Fourier/Radon diagnostics, and the
//! experiment harness driving them.

pub mod activations;
pub mod adaptive;
pub mod checkpoint;
pub mod diagnostics;
pub mod error;
pub mod fourier;
pub mod harness;
pub mod kernel;
pub mod linalg;
pub mod network;
pub mod spectral;
pub mod optim;

pub use activations::{
    catalog_lookup, design_activation, g_family_approx, parse_activation, ActivationSpec,
    DesignGrid, KinkRule, PhaseRule, RescaledActivation, SampledActivation,
};
pub use error::{Error, Result};
pub use network::{Dataset, Loss, SplineParams, WeightParams};
