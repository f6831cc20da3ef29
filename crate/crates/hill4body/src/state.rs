//! Tagged phase-space states.
//!
//! Every state carries the frame it lives in and whether its second
//! 3-vector is a velocity or a canonical momentum. Operations check the
//! tags and refuse mismatched states instead of converting silently.

use nalgebra::Vector3;

use crate::{Error, Result};

/// Reference frame of a phase-space state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Synodic frame of the full four-body problem, barycentric, rotating
    /// with the central configuration.
    Synodic4bp,
    /// Hill frame centered on the tertiary, axes parallel to the synodic
    /// frame, rescaled coordinates.
    HillShifted,
    /// Hill frame rotated so the quadratic part of the potential is
    /// diagonal (primary and secondary on the x-axis at infinity).
    HillRotated,
}

impl Frame {
    pub fn name(&self) -> &'static str {
        match self {
            Frame::Synodic4bp => "synodic-4bp",
            Frame::HillShifted => "hill-shifted",
            Frame::HillRotated => "hill-rotated",
        }
    }
}

/// Interpretation of the second 3-vector of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Velocity,
    CanonicalMomentum,
}

impl Representation {
    pub fn name(&self) -> &'static str {
        match self {
            Representation::Velocity => "velocity",
            Representation::CanonicalMomentum => "canonical-momentum",
        }
    }
}

/// A six-dimensional phase-space state with frame and representation tags.
///
/// In all three (rotating) frames the momentum map is the same:
/// `p_x = vx - y`, `p_y = vy + x`, `p_z = vz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub frame: Frame,
    pub representation: Representation,
    pub position: Vector3<f64>,
    /// Velocity or canonical momentum, per `representation`.
    pub velocity: Vector3<f64>,
}

impl PhaseState {
    pub fn velocity_state(frame: Frame, position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        PhaseState {
            frame,
            representation: Representation::Velocity,
            position,
            velocity,
        }
    }

    pub fn momentum_state(frame: Frame, position: Vector3<f64>, momentum: Vector3<f64>) -> Self {
        PhaseState {
            frame,
            representation: Representation::CanonicalMomentum,
            position,
            velocity: momentum,
        }
    }

    /// Checks the tags, returning a frame-mismatch error on failure.
    pub fn require(&self, frame: Frame, representation: Representation) -> Result<()> {
        if self.frame != frame || self.representation != representation {
            return Err(Error::FrameMismatch {
                expected: format!("{}/{}", frame.name(), representation.name()),
                found: format!("{}/{}", self.frame.name(), self.representation.name()),
            });
        }
        Ok(())
    }

    /// Converts to the canonical-momentum representation (no-op if already
    /// canonical).
    pub fn to_momentum(&self) -> Self {
        match self.representation {
            Representation::CanonicalMomentum => *self,
            Representation::Velocity => {
                let p = Vector3::new(
                    self.velocity.x - self.position.y,
                    self.velocity.y + self.position.x,
                    self.velocity.z,
                );
                PhaseState::momentum_state(self.frame, self.position, p)
            }
        }
    }

    /// Converts to the velocity representation (no-op if already velocity).
    pub fn to_velocity(&self) -> Self {
        match self.representation {
            Representation::Velocity => *self,
            Representation::CanonicalMomentum => {
                let v = Vector3::new(
                    self.velocity.x + self.position.y,
                    self.velocity.y - self.position.x,
                    self.velocity.z,
                );
                PhaseState::velocity_state(self.frame, self.position, v)
            }
        }
    }

    /// Flat `[x, y, z, vx, vy, vz]` view used by the integrator.
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.position.x,
            self.position.y,
            self.position.z,
            self.velocity.x,
            self.velocity.y,
            self.velocity.z,
        ]
    }

    pub fn from_array(frame: Frame, representation: Representation, a: [f64; 6]) -> Self {
        PhaseState {
            frame,
            representation,
            position: Vector3::new(a[0], a[1], a[2]),
            velocity: Vector3::new(a[3], a[4], a[5]),
        }
    }
}
