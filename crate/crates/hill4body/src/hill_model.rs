//! The Hill limit with an oblate tertiary.
//!
//! Zooming onto an O(m3^(1/3)) neighborhood of the tertiary and dropping
//! the vanishing orders sends the primary and secondary to infinity and
//! leaves a three-parameter model (mu, v, c). Two frames are first-class:
//!
//! - *shifted*: origin at the tertiary, axes parallel to the synodic
//!   frame; the quadratic potential has a cross term.
//! - *rotated*: the planar rotation that diagonalizes the quadratic form,
//!   putting the distant primaries on the x-axis; curvatures are the
//!   eigenvalues `lambda2` (along x) and `lambda1` (along y).
//!
//! The angular velocity of the configuration does not survive the limit:
//! nothing here takes omega.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::state::{Frame, PhaseState, Representation};
use crate::{Error, Result};

/// Quadratic-form matrix of the planar shifted-frame potential.
pub fn shape_matrix(mu: f64, v: f64) -> Matrix2<f64> {
    let off = 0.75 * v * (4.0 - v * v).sqrt() * (1.0 - 2.0 * mu);
    Matrix2::new(0.75 * v * v, off, off, 0.75 * (4.0 - v * v))
}

/// Curvature eigenvalues of the rotated frame.
///
/// Solves `lambda^2 - 3 lambda + (9/4) v^2 (4 - v^2) (mu - mu^2) = 0`:
/// `lambda_{1,2} = (3/2)(1 -+ d)` with
/// `d = sqrt(1 - v^2 (4 - v^2)(mu - mu^2))`. Returns
/// `(lambda1, lambda2, d)`; the smaller eigenvalue is computed through the
/// product form `lambda1 = (3/2) upsilon / (1 + d)` to keep full relative
/// precision at small mass ratios.
pub fn rotation_eigenvalues(mu: f64, v: f64) -> (f64, f64, f64) {
    let upsilon = v * v * (4.0 - v * v) * (mu - mu * mu);
    let d = (1.0 - upsilon).sqrt();
    let lambda1 = 1.5 * upsilon / (1.0 + d);
    let lambda2 = 1.5 * (1.0 + d);
    (lambda1, lambda2, d)
}

/// The planar rotation diagonalizing the shifted-frame quadratic form,
/// with its eigen-data.
///
/// The matrix columns are the unit eigenvectors `(v2 | v1)` for
/// `(lambda2, lambda1)`, signed so that `v12 v21 - v11 v22 = +1`; the
/// rotation is then proper and symplectic, and `R^T M R =
/// diag(lambda2, lambda1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationFrame {
    pub lambda1: f64,
    pub lambda2: f64,
    pub d: f64,
    /// Columns (v2 | v1).
    pub matrix: Matrix2<f64>,
    /// Norm of the unnormalized lambda1 eigenvector.
    pub delta1: f64,
    /// Norm of the unnormalized lambda2 eigenvector.
    pub delta2: f64,
}

/// Builds the rotation frame for the given mass ratio and short side.
///
/// At `mu = 1/2` the quadratic form is already diagonal with the smaller
/// curvature along x, so the frame degenerates to the quarter-turn that
/// swaps the axes (the continuous limit of the generic eigenvectors).
pub fn build_rotation(mu: f64, v: f64) -> Result<RotationFrame> {
    let (lambda1, lambda2, d) = rotation_eigenvalues(mu, v);
    if lambda1 == lambda2 {
        return Err(Error::DegenerateEigenpair);
    }
    let m = shape_matrix(mu, v);
    let g = m[(1, 1)];
    let s = m[(0, 1)];
    if s == 0.0 {
        // mu = 1/2: limit of the generic branch, v2 -> (0,-1), v1 -> (1,0)
        return Ok(RotationFrame {
            lambda1,
            lambda2,
            d,
            matrix: Matrix2::new(0.0, 1.0, -1.0, 0.0),
            delta1: (g - lambda1).abs(),
            delta2: s.hypot(g - lambda2),
        });
    }
    let delta1 = (g - lambda1).hypot(s);
    let delta2 = (g - lambda2).hypot(s);
    let v1 = Vector2::new((g - lambda1) / delta1, -s / delta1);
    let v2 = Vector2::new((g - lambda2) / delta2, -s / delta2);
    Ok(RotationFrame {
        lambda1,
        lambda2,
        d,
        matrix: Matrix2::from_columns(&[v2, v1]),
        delta1,
        delta2,
    })
}

impl RotationFrame {
    /// Maps a shifted-frame state to the rotated frame (positions and the
    /// momentum/velocity slot transform with the same matrix; z is
    /// untouched).
    pub fn to_rotated(&self, state: &PhaseState) -> Result<PhaseState> {
        if state.frame != Frame::HillShifted {
            return Err(Error::FrameMismatch {
                expected: Frame::HillShifted.name().into(),
                found: state.frame.name().into(),
            });
        }
        Ok(self.apply(state, self.matrix.transpose(), Frame::HillRotated))
    }

    /// Inverse of [`RotationFrame::to_rotated`].
    pub fn to_shifted(&self, state: &PhaseState) -> Result<PhaseState> {
        if state.frame != Frame::HillRotated {
            return Err(Error::FrameMismatch {
                expected: Frame::HillRotated.name().into(),
                found: state.frame.name().into(),
            });
        }
        Ok(self.apply(state, self.matrix, Frame::HillShifted))
    }

    fn apply(&self, state: &PhaseState, r: Matrix2<f64>, frame: Frame) -> PhaseState {
        let p = r * Vector2::new(state.position.x, state.position.y);
        let q = r * Vector2::new(state.velocity.x, state.velocity.y);
        PhaseState {
            frame,
            representation: state.representation,
            position: Vector3::new(p.x, p.y, state.position.z),
            velocity: Vector3::new(q.x, q.y, state.velocity.z),
        }
    }
}

/// Hill Hamiltonian in the shifted frame (canonical momenta):
///
/// ```text
/// H = |p|^2/2 + y p_x - x p_y + (4-3v^2)/8 x^2 + (3v^2-8)/8 y^2 + z^2/2
///     - (3 v sqrt(4-v^2)/4)(1-2mu) xy - 1/r - (c/r^3)(3 z^2/r^2 - 1)
/// ```
pub fn hill_hamiltonian_shifted(state: &PhaseState, mu: f64, v: f64, c: f64) -> Result<f64> {
    state.require(Frame::HillShifted, Representation::CanonicalMomentum)?;
    let (x, y, z) = (state.position.x, state.position.y, state.position.z);
    let p = state.velocity;
    let r2 = state.position.norm_squared();
    if r2 == 0.0 {
        return Err(Error::SingularOrigin);
    }
    let r = r2.sqrt();
    let r3 = r2 * r;
    let v2 = v * v;
    let quad = (4.0 - 3.0 * v2) / 8.0 * x * x + (3.0 * v2 - 8.0) / 8.0 * y * y
        - 0.75 * v * (4.0 - v2).sqrt() * (1.0 - 2.0 * mu) * x * y;
    Ok(
        0.5 * p.norm_squared() + y * p.x - x * p.y + quad + 0.5 * z * z
            - 1.0 / r
            - c / r3 * (3.0 * z * z / r2 - 1.0),
    )
}

/// Hill Hamiltonian in the rotated frame (canonical momenta):
///
/// ```text
/// H = |p|^2/2 + y p_x - x p_y + (1-lambda2)/2 x^2 + (1-lambda1)/2 y^2
///     + z^2/2 - 1/r + c/r^3 - 3 c z^2/r^5
/// ```
pub fn hill_hamiltonian_rotated(
    state: &PhaseState,
    lambda1: f64,
    lambda2: f64,
    c: f64,
) -> Result<f64> {
    state.require(Frame::HillRotated, Representation::CanonicalMomentum)?;
    let (x, y, z) = (state.position.x, state.position.y, state.position.z);
    let p = state.velocity;
    let r2 = state.position.norm_squared();
    if r2 == 0.0 {
        return Err(Error::SingularOrigin);
    }
    let r = r2.sqrt();
    let r3 = r2 * r;
    let r5 = r3 * r2;
    Ok(0.5 * p.norm_squared() + y * p.x - x * p.y
        + 0.5 * (1.0 - lambda2) * x * x
        + 0.5 * (1.0 - lambda1) * y * y
        + 0.5 * z * z
        - 1.0 / r
        + c / r3
        - 3.0 * c * z * z / r5)
}

/// Rotated-frame effective potential
/// `Omega = (lambda2 x^2 + lambda1 y^2 - z^2)/2 + 1/r - c/r^3 + 3 c z^2/r^5`.
pub fn effective_potential_hill(
    position: &Vector3<f64>,
    lambda1: f64,
    lambda2: f64,
    c: f64,
) -> Result<f64> {
    let r2 = position.norm_squared();
    if r2 == 0.0 {
        return Err(Error::SingularOrigin);
    }
    let r = r2.sqrt();
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let (x, y, z) = (position.x, position.y, position.z);
    Ok(0.5 * (lambda2 * x * x + lambda1 * y * y - z * z) + 1.0 / r - c / r3 + 3.0 * c * z * z / r5)
}

/// Gradient of the rotated effective potential.
pub fn hill_gradient(
    position: &Vector3<f64>,
    lambda1: f64,
    lambda2: f64,
    c: f64,
) -> Result<Vector3<f64>> {
    let r2 = position.norm_squared();
    if r2 == 0.0 {
        return Err(Error::SingularOrigin);
    }
    let r = r2.sqrt();
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let r7 = r5 * r2;
    let (x, y, z) = (position.x, position.y, position.z);
    let z2 = z * z;
    Ok(Vector3::new(
        lambda2 * x - x / r3 + 3.0 * c * x / r5 - 15.0 * c * z2 * x / r7,
        lambda1 * y - y / r3 + 3.0 * c * y / r5 - 15.0 * c * z2 * y / r7,
        -z - z / r3 + 9.0 * c * z / r5 - 15.0 * c * z2 * z / r7,
    ))
}

/// Largest absolute term feeding any component of [`hill_gradient`].
///
/// The gradient is a sum of terms that cancel almost exactly at an
/// equilibrium, so its evaluation floor in binary64 is a few ulps of this
/// scale (at vertical equilibria the scale is `1/r^2`, which dwarfs the
/// representable gradient).
pub fn hill_gradient_term_scale(
    position: &Vector3<f64>,
    lambda1: f64,
    lambda2: f64,
    c: f64,
) -> Result<f64> {
    let r2 = position.norm_squared();
    if r2 == 0.0 {
        return Err(Error::SingularOrigin);
    }
    let r = r2.sqrt();
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let r7 = r5 * r2;
    let (x, y, z) = (position.x.abs(), position.y.abs(), position.z.abs());
    let z2 = z * z;
    let ca = c.abs();
    let gx = lambda2.abs() * x + x / r3 + 3.0 * ca * x / r5 + 15.0 * ca * z2 * x / r7;
    let gy = lambda1.abs() * y + y / r3 + 3.0 * ca * y / r5 + 15.0 * ca * z2 * y / r7;
    let gz = z + z / r3 + 9.0 * ca * z / r5 + 15.0 * ca * z2 * z / r7;
    Ok(gx.max(gy).max(gz))
}

/// Hessian of the rotated effective potential.
pub fn hill_hessian(
    position: &Vector3<f64>,
    lambda1: f64,
    lambda2: f64,
    c: f64,
) -> Result<Matrix3<f64>> {
    let r2 = position.norm_squared();
    if r2 == 0.0 {
        return Err(Error::SingularOrigin);
    }
    let r = r2.sqrt();
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let r7 = r5 * r2;
    let r9 = r7 * r2;
    let (x, y, z) = (position.x, position.y, position.z);
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let oxx =
        lambda2 - 1.0 / r3 + 3.0 * x2 / r5 + 3.0 * c / r5 - 15.0 * c * x2 / r7 - 15.0 * c * z2 / r7
            + 105.0 * c * z2 * x2 / r9;
    let oyy =
        lambda1 - 1.0 / r3 + 3.0 * y2 / r5 + 3.0 * c / r5 - 15.0 * c * y2 / r7 - 15.0 * c * z2 / r7
            + 105.0 * c * z2 * y2 / r9;
    let ozz = -1.0 - 1.0 / r3 + 3.0 * z2 / r5 + 9.0 * c / r5 - 90.0 * c * z2 / r7
        + 105.0 * c * z2 * z2 / r9;
    let oxy = 3.0 * x * y / r5 - 15.0 * c * x * y / r7 + 105.0 * c * z2 * x * y / r9;
    let oxz = 3.0 * x * z / r5 - 45.0 * c * x * z / r7 + 105.0 * c * z2 * z * x / r9;
    let oyz = 3.0 * y * z / r5 - 45.0 * c * y * z / r7 + 105.0 * c * z2 * z * y / r9;
    Ok(Matrix3::new(oxx, oxy, oxz, oxy, oyy, oyz, oxz, oyz, ozz))
}

/// Rotated-frame equations of motion,
/// `(vx, vy, vz, 2 vy + Omega_x, -2 vx + Omega_y, Omega_z)`.
pub fn eom_hill(state: &PhaseState, lambda1: f64, lambda2: f64, c: f64) -> Result<[f64; 6]> {
    state.require(Frame::HillRotated, Representation::Velocity)?;
    let g = hill_gradient(&state.position, lambda1, lambda2, c)?;
    let v = state.velocity;
    Ok([v.x, v.y, v.z, 2.0 * v.y + g.x, -2.0 * v.x + g.y, g.z])
}

/// Velocity-form energy in the rotated frame, `|v|^2/2 - Omega`. Conserved
/// along the flow of [`eom_hill`].
pub fn hill_energy(state: &PhaseState, lambda1: f64, lambda2: f64, c: f64) -> Result<f64> {
    state.require(Frame::HillRotated, Representation::Velocity)?;
    let omega = effective_potential_hill(&state.position, lambda1, lambda2, c)?;
    Ok(0.5 * state.velocity.norm_squared() - omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    const MU_H: f64 = 0.000953338644169616;
    const C_H: f64 = -1.327160919257125e-7;
    const V_H: f64 = 0.9999999999999967;

    #[test]
    fn hektor_eigenvalues() {
        let (l1, l2, _) = rotation_eigenvalues(MU_H, V_H);
        assert!((l1 - 0.0021444999866622183).abs() <= 1e-12 * 0.0021444999866622183);
        assert!((l2 - 2.997855500013338).abs() <= 1e-12 * 2.997855500013338);
        assert!((l1 + l2 - 3.0).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn classical_hill_curvatures() {
        let (l1, l2, d) = rotation_eigenvalues(0.0, 1.0);
        assert_eq!(l1, 0.0);
        assert_eq!(l2, 3.0);
        assert_eq!(d, 1.0);
    }

    #[test]
    fn equal_mass_curvatures() {
        let (l1, l2, d) = rotation_eigenvalues(0.5, 1.0);
        assert!((d - 0.5).abs() < 1e-15);
        assert!((l1 - 0.75).abs() < 1e-15);
        assert!((l2 - 2.25).abs() < 1e-15);
        // M is already diagonal there
        let m = shape_matrix(0.5, 1.0);
        assert_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn rotation_diagonalizes_shape_matrix() {
        let frame = build_rotation(MU_H, V_H).unwrap();
        let m = shape_matrix(MU_H, V_H);
        let d = frame.matrix.transpose() * m * frame.matrix;
        assert!((d[(0, 0)] - frame.lambda2).abs() < 1e-13);
        assert!((d[(1, 1)] - frame.lambda1).abs() < 1e-13);
        assert!(d[(0, 1)].abs() < 1e-13);
        assert!(d[(1, 0)].abs() < 1e-13);
    }

    #[test]
    fn rotation_is_proper_and_symplectic() {
        let mut rng = SmallRng::seed_from_u64(21);
        let j = Matrix2::new(0.0, 1.0, -1.0, 0.0);
        for _ in 0..200 {
            let mu = rng.gen_range(1e-6..=0.5);
            let v = rng.gen_range(0.5..=1.0);
            let frame = build_rotation(mu, v).unwrap();
            let r = frame.matrix;
            assert!((r.determinant() - 1.0).abs() < 1e-13);
            let s = r.transpose() * j * r - j;
            assert!(s.abs().max() < 1e-13, "symplectic residual at mu={mu}");
            // eigenvector residuals
            let m = shape_matrix(mu, v);
            let v2 = r.column(0).into_owned();
            let v1 = r.column(1).into_owned();
            assert!((m * v2 - frame.lambda2 * v2).norm() < 1e-13);
            assert!((m * v1 - frame.lambda1 * v1).norm() < 1e-13);
            // orientation identity v12 v21 - v11 v22 = 1
            assert!((v1.y * v2.x - v1.x * v2.y - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn half_mass_ratio_frame_swaps_axes() {
        let frame = build_rotation(0.5, 0.9).unwrap();
        assert_eq!(frame.matrix, Matrix2::new(0.0, 1.0, -1.0, 0.0));
        let m = shape_matrix(0.5, 0.9);
        let d = frame.matrix.transpose() * m * frame.matrix;
        assert!((d[(0, 0)] - frame.lambda2).abs() < 1e-15);
        assert!((d[(1, 1)] - frame.lambda1).abs() < 1e-15);
    }

    #[test]
    fn frame_equivalence_of_hamiltonians() {
        let mut rng = SmallRng::seed_from_u64(99);
        let frame = build_rotation(MU_H, V_H).unwrap();
        for _ in 0..100 {
            let s = PhaseState::momentum_state(
                Frame::HillShifted,
                Vector3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                ),
                Vector3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                ),
            );
            if s.position.norm() < 1e-2 {
                continue;
            }
            let h_shift = hill_hamiltonian_shifted(&s, MU_H, V_H, C_H).unwrap();
            let rotated = frame.to_rotated(&s).unwrap();
            let h_rot =
                hill_hamiltonian_rotated(&rotated, frame.lambda1, frame.lambda2, C_H).unwrap();
            assert!(
                (h_shift - h_rot).abs() <= 1e-13 * h_shift.abs().max(1.0),
                "{h_shift} vs {h_rot}"
            );
        }
    }

    #[test]
    fn quadratic_form_identity() {
        let mut rng = SmallRng::seed_from_u64(5);
        let frame = build_rotation(0.2, 0.97).unwrap();
        let m = shape_matrix(0.2, 0.97);
        for _ in 0..100 {
            let wbar = Vector2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let w = frame.matrix * wbar;
            let lhs = frame.lambda2 * wbar.x * wbar.x + frame.lambda1 * wbar.y * wbar.y;
            let rhs = (w.transpose() * m * w)[(0, 0)];
            assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn non_oblate_limit_matches_plain_quadratic() {
        // c = 0, v = 1: quadratic coefficients reduce to 1/8 and -5/8
        let s = PhaseState::momentum_state(
            Frame::HillShifted,
            Vector3::new(0.7, -0.4, 0.2),
            Vector3::new(0.1, 0.2, -0.3),
        );
        let h = hill_hamiltonian_shifted(&s, MU_H, 1.0, 0.0).unwrap();
        let (x, y, z) = (0.7, -0.4, 0.2);
        let p = Vector3::new(0.1, 0.2, -0.3);
        let r = s.position.norm();
        let manual = 0.5 * p.norm_squared() + y * p.x - x * p.y + 0.125 * x * x
            - 0.625 * y * y
            - 0.75 * 3f64.sqrt() * (1.0 - 2.0 * MU_H) * x * y
            + 0.5 * z * z
            - 1.0 / r;
        assert!((h - manual).abs() < 1e-15);
    }

    #[test]
    fn lunar_hill_limit() {
        // mu = 0, c = 0: after rotation the curvatures are (3, 0) and the
        // rotated Hamiltonian is the classical lunar one
        let (l1, l2, _) = rotation_eigenvalues(0.0, 1.0);
        let s = PhaseState::momentum_state(
            Frame::HillRotated,
            Vector3::new(0.5, 0.3, 0.1),
            Vector3::new(-0.2, 0.4, 0.0),
        );
        let h = hill_hamiltonian_rotated(&s, l1, l2, 0.0).unwrap();
        let (x, y, z) = (0.5_f64, 0.3_f64, 0.1_f64);
        let p: Vector3<f64> = Vector3::new(-0.2, 0.4, 0.0);
        let r = s.position.norm();
        let classical =
            0.5 * p.norm_squared() + y * p.x - x * p.y - x * x + 0.5 * y * y + 0.5 * z * z
                - 1.0 / r;
        assert!((h - classical).abs() < 1e-15);
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let mut rng = SmallRng::seed_from_u64(7);
        let (l1, l2) = (0.0021444999866622183, 2.997855500013338);
        for _ in 0..100 {
            let p = Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            if p.norm() < 0.3 {
                continue;
            }
            let grad = hill_gradient(&p, l1, l2, C_H).unwrap();
            let hess = hill_hessian(&p, l1, l2, C_H).unwrap();
            let h = 1e-6 * p.norm();
            for k in 0..3 {
                let mut hi = p;
                let mut lo = p;
                hi[k] += h;
                lo[k] -= h;
                let fd = (effective_potential_hill(&hi, l1, l2, C_H).unwrap()
                    - effective_potential_hill(&lo, l1, l2, C_H).unwrap())
                    / (2.0 * h);
                assert!((grad[k] - fd).abs() <= 1e-7 * grad.norm().max(1.0));
                let gh = hill_gradient(&hi, l1, l2, C_H).unwrap();
                let gl = hill_gradient(&lo, l1, l2, C_H).unwrap();
                for j in 0..3 {
                    let fd2 = (gh[j] - gl[j]) / (2.0 * h);
                    assert!((hess[(j, k)] - fd2).abs() <= 1e-7 * hess.abs().max().max(1.0));
                }
            }
        }
    }

    #[test]
    fn on_axis_potential_restriction() {
        let (l1, l2) = (0.1, 2.9);
        let x = 0.8;
        let omega = effective_potential_hill(&Vector3::new(x, 0.0, 0.0), l1, l2, -1e-3).unwrap();
        let expected = 0.5 * l2 * x * x + 1.0 / x - (-1e-3) / x.powi(3);
        assert!((omega - expected).abs() < 1e-15);
    }

    #[test]
    fn planar_states_stay_planar() {
        let s = PhaseState::velocity_state(
            Frame::HillRotated,
            Vector3::new(0.4, -0.7, 0.0),
            Vector3::new(0.2, 0.1, 0.0),
        );
        let rhs = eom_hill(&s, 0.1, 2.9, -1e-4).unwrap();
        assert_eq!(rhs[2], 0.0);
        assert_eq!(rhs[5], 0.0);
    }

    #[test]
    fn singular_origin_is_rejected() {
        assert!(matches!(
            effective_potential_hill(&Vector3::zeros(), 0.1, 2.9, -1e-4),
            Err(Error::SingularOrigin)
        ));
    }
}
