//! Triangular central configuration of three bodies with an oblate third
//! body.
//!
//! With the oblateness constant `C >= 0` of the third body, the stationary
//! configuration is an isosceles triangle: the two sides touching the
//! oblate body stay equal (`r13 = r23 = u`) while the opposite side
//! shrinks to `v = (u^5 / (u^2 + 3C))^(1/3)`. At `C = 0` the classical
//! equilateral triangle returns.

use nalgebra::Vector2;

use crate::root;
use crate::{Error, Result};

/// Solved central configuration in the synodic frame, convention `u = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleConfig {
    /// Long sides r13 = r23 (unit of distance).
    pub u: f64,
    /// Short side r12.
    pub v: f64,
    /// v - 1 at full relative precision.
    pub v_defect: f64,
    /// Angular velocity of the rigid rotation.
    pub omega: f64,
    /// Planar vertex coordinates of the three bodies, barycentric.
    pub vertices: [Vector2<f64>; 3],
}

impl TriangleConfig {
    /// Solves the unit-u configuration for masses `m2`, `m3`
    /// (`m1 = 1 - m2 - m3`) and oblateness constant `big_c`.
    pub fn solve(m2: f64, m3: f64, big_c: f64) -> Result<Self> {
        if !(m2 >= 0.0 && m3 >= 0.0 && m2 + m3 < 1.0) {
            return Err(Error::InvalidPhysicalInput(
                "need m2, m3 >= 0 and m2 + m3 < 1".into(),
            ));
        }
        if big_c < 0.0 {
            return Err(Error::InvalidPhysicalInput(
                "oblateness constant must be >= 0".into(),
            ));
        }
        let (v, omega) = solve_shape_unit_u(big_c);
        let v_defect = shape_defect(big_c);
        let vertices = vertex_positions(m2, m3, v)?;
        Ok(TriangleConfig {
            u: 1.0,
            v,
            v_defect,
            omega,
            vertices,
        })
    }

    /// Residuals of the three stationarity equations of the shape system,
    /// in the order (r12, r13, r23).
    pub fn stationarity_residuals(&self, big_c: f64) -> [f64; 3] {
        let w2 = self.omega * self.omega;
        let r12 = -1.0 / (self.v * self.v) + w2 * self.v;
        let r13 = -1.0 / (self.u * self.u) - 3.0 * big_c / self.u.powi(4) + w2 * self.u;
        [r12, r13, r13]
    }
}

/// Short side and angular velocity of the unit-u configuration:
/// `v = (1 + 3C)^(-1/3)`, `omega^2 = 1 + 3C`.
pub fn solve_shape_unit_u(big_c: f64) -> (f64, f64) {
    let v = 1.0 + shape_defect(big_c);
    let omega = (1.0 + 3.0 * big_c).sqrt();
    (v, omega)
}

/// `v - 1` evaluated without cancellation; O(-C) for small C.
pub fn shape_defect(big_c: f64) -> f64 {
    (-(3.0 * big_c).ln_1p() / 3.0).exp_m1()
}

/// Solves the fixed-moment-of-inertia form of the shape problem.
///
/// With `z = u^2`, `a = m1^3 m2^3`, `b = 3C` and `k = m1 m3 + m2 m3`, the
/// long side solves `a z^5 / (z + b)^2 = (inertia - k z)^3`. The left side
/// increases from 0 to infinity and the right side decreases from
/// `inertia^3`, so the crossing is unique; a geometric scan brackets it and
/// bisection plus Newton polish finishes the job.
pub fn solve_shape_fixed_inertia(
    m1: f64,
    m2: f64,
    m3: f64,
    big_c: f64,
    inertia_bar: f64,
) -> Result<(f64, f64)> {
    if inertia_bar <= 0.0 {
        return Err(Error::NoBracket("inertia must be positive".into()));
    }
    if !(m1 > 0.0 && m2 > 0.0 && m3 > 0.0) || (m1 + m2 + m3 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidPhysicalInput(
            "masses must be positive and sum to 1".into(),
        ));
    }
    let a = (m1 * m2).powi(3);
    let b = 3.0 * big_c;
    let k = m1 * m3 + m2 * m3;
    let g = |z: f64| {
        let lhs = a * z.powi(5) / ((z + b) * (z + b));
        let rhs = (inertia_bar - k * z).powi(3);
        lhs - rhs
    };
    let dg = |z: f64| {
        let zb = z + b;
        let lhs = a * z.powi(4) * (3.0 * z * z + 8.0 * b * z + 5.0 * b * b) / zb.powi(4);
        let rhs = -3.0 * k * (inertia_bar - k * z).powi(2);
        lhs - rhs
    };
    // g < 0 near 0 and g > 0 at z = inertia/k; scan from well below the
    // smallest plausible scale.
    let start = 1e-9 * (inertia_bar / k).min(1.0);
    let (lo, hi) = root::scan_geometric(g, start, 14)?;
    let z = root::bisect(g, Some(dg), lo, hi, 2)?;
    let u = z.sqrt();
    let v = (z.powi(2) * u / (z + b)).cbrt();
    Ok((u, v))
}

/// Synodic-frame vertex coordinates for short side `v` and masses `m2`,
/// `m3` (`m1 = 1 - m2 - m3`), with the primary on the negative x-semi-axis
/// and the tertiary above the axis.
pub fn vertex_positions(m2: f64, m3: f64, v: f64) -> Result<[Vector2<f64>; 3]> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::InvalidPhysicalInput(format!(
            "short side must satisfy 0 < v <= 1, got {v}"
        )));
    }
    if !(m2 >= 0.0 && m3 >= 0.0 && m2 + m3 < 1.0) {
        return Err(Error::InvalidPhysicalInput(
            "need m2, m3 >= 0 and m2 + m3 < 1".into(),
        ));
    }
    let v2 = v * v;
    let s = (v2 * m2 * m2 + v2 * m2 * m3 + m3 * m3).sqrt();
    let h = v * (4.0 - v2).sqrt();
    let x1 = -s;
    let x2 = (2.0 * v2 * m2 + v2 * m3 - 2.0 * v2 * m2 * m2 - 2.0 * v2 * m2 * m3 - 2.0 * m3 * m3)
        / (2.0 * s);
    let y2 = -h * m3 / (2.0 * s);
    let x3 =
        (v2 * m2 + 2.0 * m3 - 2.0 * v2 * m2 * m2 - 2.0 * v2 * m2 * m3 - 2.0 * m3 * m3) / (2.0 * s);
    let y3 = h * m2 / (2.0 * s);
    Ok([
        Vector2::new(x1, 0.0),
        Vector2::new(x2, y2),
        Vector2::new(x3, y3),
    ])
}

/// Equilateral-triangle (`v = 1`) vertex coordinates in the K-based form.
/// Used as a cross-validation route for [`vertex_positions`].
pub fn baltagiannis_positions(m1: f64, m2: f64, m3: f64) -> Result<[Vector2<f64>; 3]> {
    if !(m1 > 0.0 && m2 > 0.0 && m3 > 0.0) || (m1 + m2 + m3 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidPhysicalInput(
            "masses must be positive and sum to 1".into(),
        ));
    }
    let k = m2 * (m3 - m2) + m1 * (m2 + 2.0 * m3);
    if k == 0.0 {
        return Err(Error::DegenerateK);
    }
    let q = (m2 * m2 + m2 * m3 + m3 * m3).sqrt();
    let sign = k.abs() / k;
    let x1 = -sign * q;
    let x2 = sign * ((m2 - m3) * m3 + m1 * (2.0 * m2 + m3)) / (2.0 * q);
    let y2 = -3f64.sqrt() * m3 / (2.0 * m2.powf(1.5)) * (m2.powi(3) / (q * q)).sqrt();
    let x3 = k.abs() / (2.0 * q);
    let y3 = 3f64.sqrt() / (2.0 * m2.sqrt()) * (m2.powi(3) / (q * q)).sqrt();
    Ok([
        Vector2::new(x1, 0.0),
        Vector2::new(x2, y2),
        Vector2::new(x3, y3),
    ])
}

/// Worst absolute residual of the seven defining constraints (three side
/// lengths, two barycenter components, mass sum, y1 = 0).
pub fn constraint_residual(m2: f64, m3: f64, v: f64, vertices: &[Vector2<f64>; 3]) -> f64 {
    let m1 = 1.0 - m2 - m3;
    let [p1, p2, p3] = vertices;
    let r12 = (p2 - p1).norm();
    let r13 = (p3 - p1).norm();
    let r23 = (p3 - p2).norm();
    let bx = m1 * p1.x + m2 * p2.x + m3 * p3.x;
    let by = m1 * p1.y + m2 * p2.y + m3 * p3.y;
    [
        (r12 - v).abs(),
        (r13 - 1.0).abs(),
        (r23 - 1.0).abs(),
        bx.abs(),
        by.abs(),
        p1.y.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}
