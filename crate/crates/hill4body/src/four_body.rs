//! The spatial circular restricted four-body problem with an oblate
//! tertiary, without any Hill approximation.
//!
//! The three heavy bodies sit at the central-configuration vertices of
//! [`crate::central_config::TriangleConfig`]; the test particle moves in
//! the synodic frame with time rescaled so the configuration's angular
//! velocity is 1. The oblate contribution of the tertiary is truncated at
//! its zonal degree-2 term.

use nalgebra::Vector3;

use crate::central_config::TriangleConfig;
use crate::params::SystemParams;
use crate::state::{Frame, PhaseState, Representation};
use crate::{Error, Result};

fn body_positions(triangle: &TriangleConfig) -> [Vector3<f64>; 3] {
    [
        Vector3::new(triangle.vertices[0].x, triangle.vertices[0].y, 0.0),
        Vector3::new(triangle.vertices[1].x, triangle.vertices[1].y, 0.0),
        Vector3::new(triangle.vertices[2].x, triangle.vertices[2].y, 0.0),
    ]
}

/// Distance to the nearest heavy body and its 1-based index.
pub fn min_body_distance(position: &Vector3<f64>, triangle: &TriangleConfig) -> (usize, f64) {
    let mut best = (1, f64::INFINITY);
    for (i, b) in body_positions(triangle).iter().enumerate() {
        let d = (position - b).norm();
        if d < best.1 {
            best = (i + 1, d);
        }
    }
    best
}

/// Gravitational part of the effective potential (everything under the
/// 1/omega^2 factor).
fn gravity_term(
    position: &Vector3<f64>,
    params: &SystemParams,
    triangle: &TriangleConfig,
) -> Result<f64> {
    let bodies = body_positions(triangle);
    let masses = [params.m1, params.m2, params.m3];
    let mut sum = 0.0;
    for i in 0..3 {
        let r = (position - bodies[i]).norm();
        if r == 0.0 {
            return Err(Error::SingularAtBody(i + 1));
        }
        sum += masses[i] / r;
    }
    let d3 = position - bodies[2];
    let r3_sq = d3.norm_squared();
    let r3 = r3_sq.sqrt();
    let k = params.m3 * params.r3 * params.r3 * params.c20 / 2.0;
    sum += k * (3.0 * position.z * position.z / (r3_sq * r3_sq * r3) - 1.0 / (r3_sq * r3));
    Ok(sum)
}

/// Effective potential of the synodic-frame equations,
/// `Omega = (x^2 + y^2)/2 + omega^-2 [ sum_i m_i/r_i + J2 term ]`.
pub fn effective_potential_4bp(
    position: &Vector3<f64>,
    params: &SystemParams,
    triangle: &TriangleConfig,
) -> Result<f64> {
    let w2 = triangle.omega * triangle.omega;
    Ok(0.5 * (position.x * position.x + position.y * position.y)
        + gravity_term(position, params, triangle)? / w2)
}

/// Gradient of [`effective_potential_4bp`].
pub fn gradient_4bp(
    position: &Vector3<f64>,
    params: &SystemParams,
    triangle: &TriangleConfig,
) -> Result<Vector3<f64>> {
    let bodies = body_positions(triangle);
    let masses = [params.m1, params.m2, params.m3];
    let mut grad = Vector3::new(position.x, position.y, 0.0);
    let w2 = triangle.omega * triangle.omega;
    let mut grav = Vector3::zeros();
    for i in 0..3 {
        let d = position - bodies[i];
        let r2 = d.norm_squared();
        if r2 == 0.0 {
            return Err(Error::SingularAtBody(i + 1));
        }
        let r3 = r2 * r2.sqrt();
        grav -= masses[i] / r3 * d;
    }
    let d3 = position - bodies[2];
    let r2 = d3.norm_squared();
    let r = r2.sqrt();
    let r5 = r2 * r2 * r;
    let r7 = r5 * r2;
    let k = params.m3 * params.r3 * params.r3 * params.c20 / 2.0;
    let z2 = position.z * position.z;
    grav += k * (3.0 / r5 - 15.0 * z2 / r7) * d3;
    grav.z += k * 6.0 * position.z / r5;
    grad += grav / w2;
    Ok(grad)
}

/// Synodic-frame equations of motion in velocity form,
/// `(vx, vy, vz, 2 vy + Omega_x, -2 vx + Omega_y, Omega_z)`.
pub fn eom_4bp(
    state: &PhaseState,
    params: &SystemParams,
    triangle: &TriangleConfig,
) -> Result<[f64; 6]> {
    state.require(Frame::Synodic4bp, Representation::Velocity)?;
    let g = gradient_4bp(&state.position, params, triangle)?;
    let v = state.velocity;
    Ok([v.x, v.y, v.z, 2.0 * v.y + g.x, -2.0 * v.x + g.y, g.z])
}

/// Canonical equations of the Hamiltonian in [`hamiltonian_4bp`];
/// state must carry canonical momenta.
pub fn eom_4bp_canonical(
    state: &PhaseState,
    params: &SystemParams,
    triangle: &TriangleConfig,
) -> Result<[f64; 6]> {
    state.require(Frame::Synodic4bp, Representation::CanonicalMomentum)?;
    let g = gradient_4bp(&state.position, params, triangle)?;
    let (x, y) = (state.position.x, state.position.y);
    let p = state.velocity;
    // W = Omega - (x^2 + y^2)/2, so W_x = Omega_x - x etc.
    Ok([
        p.x + y,
        p.y - x,
        p.z,
        p.y + (g.x - x),
        -p.x + (g.y - y),
        g.z,
    ])
}

/// Hamiltonian of the restricted four-body problem,
/// `H = |p|^2/2 + y p_x - x p_y - omega^-2 [ sum_i m_i/r_i + J2 term ]`.
pub fn hamiltonian_4bp(
    state: &PhaseState,
    params: &SystemParams,
    triangle: &TriangleConfig,
) -> Result<f64> {
    state.require(Frame::Synodic4bp, Representation::CanonicalMomentum)?;
    let p = state.velocity;
    let (x, y) = (state.position.x, state.position.y);
    let w2 = triangle.omega * triangle.omega;
    Ok(0.5 * p.norm_squared() + y * p.x
        - x * p.y
        - gravity_term(&state.position, params, triangle)? / w2)
}

/// Velocity-form energy `|v|^2/2 - Omega`, equal to [`hamiltonian_4bp`] at
/// the momentum-mapped state.
pub fn energy_4bp(
    state: &PhaseState,
    params: &SystemParams,
    triangle: &TriangleConfig,
) -> Result<f64> {
    state.require(Frame::Synodic4bp, Representation::Velocity)?;
    let omega = effective_potential_4bp(&state.position, params, triangle)?;
    Ok(0.5 * state.velocity.norm_squared() - omega)
}
