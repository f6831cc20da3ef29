//! Hill four-body problem with an oblate tertiary.
//!
//! This crate models the motion of an infinitesimal body (a moonlet or a
//! spacecraft) near the smallest of three heavy bodies that move on a
//! triangular central configuration, where the smallest body is oblate.
//! The pipeline goes from a physical ellipsoid shape to spherical-harmonic
//! coefficients, to the isosceles central configuration, to the Hill-limit
//! Hamiltonian, to the six axis equilibria with their stability spectra,
//! and finally to adaptive trajectory propagation with conservation
//! monitoring.
//!
//! The worked example throughout is the Sun–Jupiter–Hektor system with
//! Hektor's moonlet Skamandrios as the test particle; see
//! [`PhysicalInputs::hektor`].
//!
//! Modules:
//! - [`params`]: unit normalization and every derived scalar of the model.
//! - [`harmonics`]: ellipsoid harmonic coefficients and the J2 potential.
//! - [`central_config`]: the isosceles central configuration and vertex
//!   coordinates.
//! - [`four_body`]: the un-approximated restricted four-body problem.
//! - [`hill_model`]: the Hill limit, its rotation to diagonal form, and the
//!   rotated effective potential.
//! - [`equilibria`]: axis equilibria, stability spectra, classifications,
//!   and small-oblateness expansions.
//! - [`propagate`]: adaptive Runge-Kutta propagation with dense output.

pub use nalgebra;

pub mod central_config;
pub mod equilibria;
pub mod four_body;
pub mod harmonics;
pub mod hill_model;
pub mod params;
pub mod propagate;
mod root;
pub mod state;

pub use central_config::TriangleConfig;
pub use equilibria::{Axis, EquilibriumPoint, EquilibriumReport, StabilityClass};
pub use harmonics::{EllipsoidShape, HarmonicSet};
pub use hill_model::RotationFrame;
pub use params::{PhysicalInputs, SystemParams};
pub use propagate::Trajectory;
pub use state::{Frame, PhaseState, Representation};

/// Errors reported by the model layers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical input violates its basic constraints (non-positive mass,
    /// non-positive length, mass ordering).
    InvalidPhysicalInput(String),
    /// Prolate tertiary (c20 > 0) is not supported.
    ProlateUnsupported { c20: f64 },
    /// Ellipsoid semi-axes must satisfy a >= b >= c > 0 with a positive
    /// reference radius.
    InvalidShape(String),
    /// Harmonic degree must be even and >= 2.
    OddDegree(u32),
    /// Potential or field evaluated at the origin of the oblate body.
    SingularOrigin,
    /// Potential or field evaluated at the location of body `i` (1-based).
    SingularAtBody(usize),
    /// A bracketed root search could not start (no sign change available).
    NoBracket(String),
    /// The Baltagiannis form degenerates when its K factor vanishes.
    DegenerateK,
    /// Coincident curvature eigenvalues; the rotation is not determined.
    DegenerateEigenpair,
    /// The dense QR eigensolver did not converge.
    EigensolverFailed,
    /// The vertical equilibrium does not exist without oblateness.
    NoZEquilibrium,
    /// The supplied location fails the equilibrium gradient check.
    NotAnEquilibrium { grad_norm: f64 },
    /// A phase-space state was used in a frame or representation it does
    /// not carry.
    FrameMismatch { expected: String, found: String },
    /// Integration approached a gravitational singularity.
    SingularityApproach { t: f64, distance: f64 },
    /// The adaptive step size underflowed.
    StepUnderflow { t: f64, step: f64 },
    /// Integration tolerance outside the accepted range.
    InvalidTolerance(f64),
    /// Key-value configuration error (unknown key, bad number, missing key).
    Config(String),
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::InvalidPhysicalInput(msg) => write!(f, "invalid-physical-input: {msg}"),
            Error::ProlateUnsupported { c20 } => {
                write!(f, "prolate-unsupported: c20 = {c20} must be <= 0")
            }
            Error::InvalidShape(msg) => write!(f, "invalid-shape: {msg}"),
            Error::OddDegree(n) => write!(f, "degree must be even and >= 2, got {n}"),
            Error::SingularOrigin => write!(f, "singular-origin"),
            Error::SingularAtBody(i) => write!(f, "singular-at-body {i}"),
            Error::NoBracket(msg) => write!(f, "no-bracket: {msg}"),
            Error::DegenerateK => write!(f, "degenerate-K"),
            Error::DegenerateEigenpair => write!(f, "degenerate-eigenpair"),
            Error::EigensolverFailed => write!(f, "dense eigensolver did not converge"),
            Error::NoZEquilibrium => {
                write!(f, "no-z-equilibrium: vertical equilibria require c < 0")
            }
            Error::NotAnEquilibrium { grad_norm } => {
                write!(f, "not-an-equilibrium: gradient norm {grad_norm:e}")
            }
            Error::FrameMismatch { expected, found } => {
                write!(f, "frame mismatch: expected {expected}, found {found}")
            }
            Error::SingularityApproach { t, distance } => {
                write!(f, "singularity-approach at t = {t}: distance {distance:e}")
            }
            Error::StepUnderflow { t, step } => {
                write!(f, "step-underflow at t = {t}: step {step:e}")
            }
            Error::InvalidTolerance(tol) => {
                write!(f, "tolerance {tol:e} outside [1e-14, 1e-3]")
            }
            Error::Config(msg) => write!(f, "config: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
