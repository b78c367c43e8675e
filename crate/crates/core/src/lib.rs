//! Numerical toolkit for the stationary laws of rank-based interacting
//! diffusions and their mean-field limit.
//!
//! The crate is organised around five pieces:
//!
//! * [`drift`]: the rank drift `b`, its antiderivative `B`, the rank weights
//!   `b_n(k)` and the equilibrium checks.
//! * [`nonlinear`]: the centered stationary law of the mean-field diffusion,
//!   described by its quantile function `Φ`.
//! * [`finite`]: the stationary law of the projected `n`-particle system, its
//!   one- and two-coordinate Laplace transforms in closed product form, and
//!   an exact sampler.
//! * [`dynamics`]: Euler–Maruyama simulation of the particle system.
//! * [`transport`]: Wasserstein distances between empirical measures.

pub mod drift;
pub mod dynamics;
mod error;
pub mod finite;
pub mod nonlinear;
pub mod quadrature;
pub mod rng;
pub mod sample;
pub mod stats;
pub mod transport;

pub use drift::{DriftKind, DriftModel, InfimumRatios, ValidationCheck, ValidationReport};
pub use dynamics::{ParticleState, SimulationOutput, SimulationPlan};
pub use error::{Error, Result};
pub use finite::{EpsilonDeltaPlan, FeasibilityCertificate, FiniteLaw};
pub use nonlinear::{LaplaceDomainV, NonlinearLaw};
pub use sample::{EmpiricalSample, Provenance};
pub use transport::{TransportMethod, TransportResult};

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::drift::DriftModel;

    /// `b(u) = 2 (1/2 - u)`, `σ² = 2`: the mean-field law is the standard
    /// logistic distribution.
    pub fn logistic() -> DriftModel {
        DriftModel::linear_with_sigma2(2.0, 2.0).unwrap()
    }

    /// Balanced asymmetric drift with dyadic nodes, so `B(1) = 0` exactly.
    pub fn asymmetric() -> DriftModel {
        let nodes = [(0.0, 2.0), (0.25, 0.5), (0.5, -0.25), (1.0, -1.125)];
        DriftModel::piecewise_linear_with_sigma2(&nodes, 1.5).unwrap()
    }
}
