//! Spherical-harmonic coefficients of a homogeneous triaxial ellipsoid and
//! the truncated (J2-only) gravitational potential.
//!
//! For an ellipsoid of semi-axes `a >= b >= c` all S coefficients vanish,
//! as do the C coefficients of odd degree or odd order. The even ones have
//! a closed-form finite sum; degree 2 reduces to
//! `C20 = (c^2 - a^2/2 - b^2/2) / (5 R^2)` and
//! `C22 = (a^2 - b^2) / (20 R^2)`.

use std::collections::BTreeMap;

use nalgebra::Vector3;

use crate::{Error, Result};

/// Semi-axes of a homogeneous triaxial ellipsoid plus the reference radius
/// used to normalize the coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidShape {
    pub a_km: f64,
    pub b_km: f64,
    pub c_km: f64,
    pub reference_radius_km: f64,
}

impl EllipsoidShape {
    pub fn new(a_km: f64, b_km: f64, c_km: f64, reference_radius_km: f64) -> Result<Self> {
        if !(a_km >= b_km && b_km >= c_km && c_km > 0.0) {
            return Err(Error::InvalidShape(format!(
                "semi-axes must satisfy a >= b >= c > 0, got ({a_km}, {b_km}, {c_km})"
            )));
        }
        if reference_radius_km <= 0.0 {
            return Err(Error::InvalidShape(
                "reference radius must be positive".into(),
            ));
        }
        Ok(EllipsoidShape {
            a_km,
            b_km,
            c_km,
            reference_radius_km,
        })
    }

    /// Hektor's dumb-bell shape approximated as an ellipsoid.
    pub fn hektor() -> Self {
        EllipsoidShape::new(208.0, 65.5, 60.0, 92.0).unwrap()
    }
}

/// Table of C coefficients by (degree, order). Only even degrees and even
/// orders are stored; everything else is identically zero, as are all S
/// coefficients. `C00 = 1` for any shape.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSet {
    pub max_degree: u32,
    coefficients: BTreeMap<(u32, u32), f64>,
}

impl HarmonicSet {
    /// The coefficient `C_nm`, zero for anything not stored.
    pub fn c(&self, n: u32, m: u32) -> f64 {
        if n == 0 && m == 0 {
            return 1.0;
        }
        self.coefficients.get(&(n, m)).copied().unwrap_or(0.0)
    }

    /// Stored (degree, order, value) triples in (n, m) order.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        std::iter::once((0, 0, 1.0)).chain(self.coefficients.iter().map(|(&(n, m), &v)| (n, m, v)))
    }
}

/// Ratio `p! (2p-2q)! / (2p+1)!` accumulated as a running product of
/// factor ratios, so no factorial is ever materialized and the evaluation
/// stays in range well past degree 12.
fn prefactor_ratio(p: u32, q: u32) -> f64 {
    // (2p-2q)! / (2p+1)! = 1 / prod_{k=2p-2q+1}^{2p+1} k, interleaved with
    // the p! factors to keep intermediate magnitudes near 1.
    let mut value = 1.0;
    let mut num = 2; // next factor of p!
    for k in (2 * p - 2 * q + 1)..=(2 * p + 1) {
        value /= k as f64;
        if num <= p {
            value *= num as f64;
            num += 1;
        }
    }
    while num <= p {
        value *= num as f64;
        num += 1;
    }
    value
}

fn factorial_f64(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// All even C coefficients of the ellipsoid up to `max_degree`, from the
/// closed-form finite sum
///
/// ```text
/// C_{2p,2q} = 3/R^{2p} * p!(2p-2q)! / (2^{2q} (2p+3) (2p+1)!) * (2 - delta_{0q})
///             * sum_{i=0}^{floor((p-q)/2)} (a^2-b^2)^{q+2i} [c^2-(a^2+b^2)/2]^{p-q-2i}
///                                          / (16^i (p-q-2i)! (q+i)! i!)
/// ```
///
/// The bracket `c^2 - (a^2+b^2)/2` is signed; its integer powers carry the
/// sign through the sum.
pub fn ellipsoid_coefficients(shape: &EllipsoidShape, max_degree: u32) -> Result<HarmonicSet> {
    if max_degree < 2 || !max_degree.is_multiple_of(2) {
        return Err(Error::OddDegree(max_degree));
    }
    shape_check(shape)?;
    let a2 = shape.a_km * shape.a_km;
    let b2 = shape.b_km * shape.b_km;
    let c2 = shape.c_km * shape.c_km;
    let r2 = shape.reference_radius_km * shape.reference_radius_km;
    let f = a2 - b2;
    let e = c2 - 0.5 * (a2 + b2);

    let mut coefficients = BTreeMap::new();
    for p in 1..=(max_degree / 2) {
        for q in 0..=p {
            let kron = if q == 0 { 1.0 } else { 2.0 };
            let pre = 3.0 / r2.powi(p as i32) * prefactor_ratio(p, q) * kron
                / (4f64.powi(q as i32) * (2 * p + 3) as f64);
            let mut sum = 0.0;
            for i in 0..=((p - q) / 2) {
                let term = f.powi((q + 2 * i) as i32) * e.powi((p - q - 2 * i) as i32)
                    / (16f64.powi(i as i32)
                        * factorial_f64(p - q - 2 * i)
                        * factorial_f64(q + i)
                        * factorial_f64(i));
                sum += term;
            }
            coefficients.insert((2 * p, 2 * q), pre * sum);
        }
    }
    Ok(HarmonicSet {
        max_degree,
        coefficients,
    })
}

/// Degree-2 coefficients from their simple closed forms. Agrees with the
/// degree-2 entries of [`ellipsoid_coefficients`] to rounding.
pub fn c20_c22(shape: &EllipsoidShape) -> Result<(f64, f64)> {
    shape_check(shape)?;
    let a2 = shape.a_km * shape.a_km;
    let b2 = shape.b_km * shape.b_km;
    let c2 = shape.c_km * shape.c_km;
    let r2 = shape.reference_radius_km * shape.reference_radius_km;
    let c20 = (c2 - 0.5 * a2 - 0.5 * b2) / (5.0 * r2);
    let c22 = (0.25 * a2 - 0.25 * b2) / (5.0 * r2);
    Ok((c20, c22))
}

fn shape_check(shape: &EllipsoidShape) -> Result<()> {
    EllipsoidShape::new(
        shape.a_km,
        shape.b_km,
        shape.c_km,
        shape.reference_radius_km,
    )
    .map(|_| ())
}

/// Gravitational potential truncated at the zonal degree-2 term,
/// `V = gm/r * [1 + (radius/r)^2 (c20/2) (3 (z/r)^2 - 1)]`,
/// in a body-centered frame with z along the spin axis.
pub fn j2_potential(point: &Vector3<f64>, gm: f64, radius: f64, c20: f64) -> Result<f64> {
    let r2 = point.norm_squared();
    if r2 == 0.0 {
        return Err(Error::SingularOrigin);
    }
    let r = r2.sqrt();
    let sin_phi2 = point.z * point.z / r2;
    Ok(gm / r * (1.0 + (radius / r).powi(2) * (c20 / 2.0) * (3.0 * sin_phi2 - 1.0)))
}

/// Analytic gradient of [`j2_potential`] with respect to the field point.
pub fn j2_gradient(point: &Vector3<f64>, gm: f64, radius: f64, c20: f64) -> Result<Vector3<f64>> {
    let r2 = point.norm_squared();
    if r2 == 0.0 {
        return Err(Error::SingularOrigin);
    }
    let r = r2.sqrt();
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let r7 = r5 * r2;
    let k = gm * radius * radius * c20 / 2.0;
    let z2 = point.z * point.z;
    let common = -gm / r3 + k * (3.0 / r5 - 15.0 * z2 / r7);
    let mut grad = *point * common;
    grad.z += k * 6.0 * point.z / r5;
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hektor_coefficient_table() {
        let set = ellipsoid_coefficients(&EllipsoidShape::hektor(), 6).unwrap();
        let expected = [
            (2, 0, -0.476775),
            (2, 2, 0.230232),
            (4, 0, 0.714275),
            (4, 2, -0.078406),
            (4, 4, 0.009465),
            (6, 0, -1.54769),
            (6, 2, 0.076832),
            (6, 4, -0.002507),
            (6, 6, 0.000201),
        ];
        for (n, m, value) in expected {
            assert!(
                (set.c(n, m) - value).abs() < 1e-5,
                "C{n}{m} = {} vs {value}",
                set.c(n, m)
            );
        }
    }

    #[test]
    fn sphere_has_no_deviation() {
        let sphere = EllipsoidShape::new(50.0, 50.0, 50.0, 50.0).unwrap();
        let set = ellipsoid_coefficients(&sphere, 8).unwrap();
        for (n, _, v) in set.entries() {
            if n >= 2 {
                assert_eq!(v, 0.0);
            }
        }
        assert_eq!(set.c(0, 0), 1.0);
    }

    #[test]
    fn oblate_spheroid_is_axisymmetric() {
        let spheroid = EllipsoidShape::new(100.0, 100.0, 60.0, 90.0).unwrap();
        let (c20, c22) = c20_c22(&spheroid).unwrap();
        assert_eq!(c22, 0.0);
        let expected = (60f64.powi(2) - 100f64.powi(2)) / (5.0 * 90f64.powi(2));
        assert!((c20 - expected).abs() < 1e-16);
        let set = ellipsoid_coefficients(&spheroid, 2).unwrap();
        assert_eq!(set.c(2, 2), 0.0);
    }

    #[test]
    fn closed_forms_match_general_sum() {
        let shape = EllipsoidShape::hektor();
        let (c20, c22) = c20_c22(&shape).unwrap();
        let set = ellipsoid_coefficients(&shape, 2).unwrap();
        assert!((set.c(2, 0) - c20).abs() <= 1e-14 * c20.abs());
        assert!((set.c(2, 2) - c22).abs() <= 1e-14 * c22.abs());
    }

    #[test]
    fn degree_padding_is_consistent() {
        let shape = EllipsoidShape::hektor();
        let deg2 = ellipsoid_coefficients(&shape, 2).unwrap();
        let deg6 = ellipsoid_coefficients(&shape, 6).unwrap();
        assert_eq!(deg2.c(2, 0), deg6.c(2, 0));
        assert_eq!(deg2.c(2, 2), deg6.c(2, 2));
        assert_eq!(deg2.c(4, 0), 0.0);
    }

    #[test]
    fn rejects_odd_degree_and_bad_shape() {
        let shape = EllipsoidShape::hektor();
        assert!(matches!(
            ellipsoid_coefficients(&shape, 5),
            Err(Error::OddDegree(5))
        ));
        assert!(EllipsoidShape::new(10.0, 20.0, 5.0, 9.0).is_err());
        assert!(EllipsoidShape::new(10.0, 8.0, -1.0, 9.0).is_err());
    }

    #[test]
    fn potential_limits() {
        let p = Vector3::new(500.0, 0.0, 0.0);
        let gm = 0.5279;
        // no oblateness: plain monopole
        let v0 = j2_potential(&p, gm, 92.0, 0.0).unwrap();
        assert_eq!(v0, gm / 500.0);
        // equatorial point of an oblate body: strictly above the monopole
        let v = j2_potential(&p, gm, 92.0, -0.476775).unwrap();
        assert!(v > gm / 500.0);
        assert!(matches!(
            j2_potential(&Vector3::zeros(), gm, 92.0, -0.4),
            Err(Error::SingularOrigin)
        ));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::rngs::SmallRng;
        use rand::{Rng, SeedableRng};
        let mut rng = SmallRng::seed_from_u64(0x5eed);
        let gm = 0.5279;
        let radius = 92.0;
        let c20 = -0.476775;
        for _ in 0..100 {
            let p = Vector3::new(
                rng.gen_range(-1000.0..1000.0),
                rng.gen_range(-1000.0..1000.0),
                rng.gen_range(-1000.0..1000.0),
            );
            if p.norm() < 150.0 {
                continue;
            }
            let grad = j2_gradient(&p, gm, radius, c20).unwrap();
            let h = 1e-6 * p.norm();
            for k in 0..3 {
                let mut hi = p;
                let mut lo = p;
                hi[k] += h;
                lo[k] -= h;
                let fd = (j2_potential(&hi, gm, radius, c20).unwrap()
                    - j2_potential(&lo, gm, radius, c20).unwrap())
                    / (2.0 * h);
                assert!(
                    (grad[k] - fd).abs() <= 1e-8 * grad.norm().max(1e-30),
                    "component {k}: analytic {} vs fd {fd}",
                    grad[k]
                );
            }
        }
    }
}
