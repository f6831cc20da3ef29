//! Axis equilibria of the rotated Hill model, their stability spectra and
//! classifications, and the small-oblateness expansions.
//!
//! Every equilibrium lies on a coordinate axis. The radius on each axis is
//! the unique positive root of a strictly monotone one-dimensional
//! equation:
//!
//! - x-axis: `lambda2 - 1/r^3 + 3c/r^5 = 0`
//! - y-axis: `lambda1 - 1/r^3 + 3c/r^5 = 0`
//! - z-axis: `-r^5 - r^2 - 6c = 0` (exists only for `c < 0`)
//!
//! The linearization at an axis equilibrium block-factors, so the six
//! eigenvalues are the roots of
//! `(rho^2 - Ozz)(rho^4 + A rho^2 + B)` with `A = 4 - Oxx - Oyy`,
//! `B = Oxx * Oyy` and discriminant `D = A^2 - 4B`.

use nalgebra::{Matrix6, Vector3};
use num_complex::Complex64;

use crate::hill_model::{hill_gradient, hill_gradient_term_scale, hill_hessian};
use crate::root;
use crate::{Error, Result};

/// Coordinate axis carrying a pair of symmetric equilibria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Linear stability type at an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    /// All six eigenvalues purely imaginary.
    CenterCenterCenter,
    /// One real pair, two imaginary pairs.
    CenterCenterSaddle,
    /// A complex quadruple plus one imaginary pair.
    CenterComplexSaddle,
}

impl StabilityClass {
    pub fn name(&self) -> &'static str {
        match self {
            StabilityClass::CenterCenterCenter => "center x center x center",
            StabilityClass::CenterCenterSaddle => "center x center x saddle",
            StabilityClass::CenterComplexSaddle => "center x complex-saddle",
        }
    }
}

/// Location of an axis equilibrium (the positive representative of the
/// symmetric pair).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub axis: Axis,
    pub r_star: f64,
    pub location: Vector3<f64>,
}

/// Completed stability report for an axis equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumReport {
    pub axis: Axis,
    pub r_star: f64,
    pub location: Vector3<f64>,
    /// (Oxx, Oyy, Ozz) at the equilibrium; mixed terms vanish there.
    pub hessian_diag: [f64; 3],
    /// Quartic data (A, B, D = A^2 - 4B).
    pub quartic: QuarticCoeffs,
    /// The six eigenvalues, sorted by (re, im) descending.
    pub eigenvalues: [Complex64; 6],
    pub class: StabilityClass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

/// An eigenvalue counts as purely imaginary when
/// `|Re| <= 1e-9 (1 + |Im|)`; reports carry raw values so the threshold is
/// auditable.
pub const IMAGINARY_THRESHOLD: f64 = 1e-9;

/// Finds the unique positive equilibrium radius on the requested axis.
///
/// The x/y equations are solved in polynomial form
/// `lambda r^5 - r^2 + 3c = 0` on a bracket seeded from the dominant
/// balance `r ~ lambda^(-1/3)`; the z equation `-r^5 - r^2 - 6c = 0` is
/// seeded from `r ~ sqrt(-6c)`. Both brackets are widened geometrically if
/// the seed misses the sign change.
pub fn find_equilibrium(
    axis: Axis,
    lambda1: f64,
    lambda2: f64,
    c: f64,
) -> Result<EquilibriumPoint> {
    if c > 0.0 {
        return Err(Error::InvalidPhysicalInput(format!(
            "oblateness parameter must be <= 0, got {c}"
        )));
    }
    let r_star = match axis {
        Axis::X => axis_radius(lambda2, c)?,
        Axis::Y => axis_radius(lambda1, c)?,
        Axis::Z => {
            if c == 0.0 {
                return Err(Error::NoZEquilibrium);
            }
            let f = |r: f64| -r.powi(5) - r * r - 6.0 * c;
            let df = |r: f64| -5.0 * r.powi(4) - 2.0 * r;
            let seed = (-6.0 * c).sqrt();
            let (lo, hi) =
                root::widen_until_sign_change(f, seed * (1.0 - 1e-3), seed * (1.0 + 1e-3))?;
            root::bisect(f, Some(df), lo, hi, 2)?
        }
    };
    let location = match axis {
        Axis::X => Vector3::new(r_star, 0.0, 0.0),
        Axis::Y => Vector3::new(0.0, r_star, 0.0),
        Axis::Z => Vector3::new(0.0, 0.0, r_star),
    };
    Ok(EquilibriumPoint {
        axis,
        r_star,
        location,
    })
}

/// Root of `lambda r^5 - r^2 + 3c = 0` for `lambda > 0`, `c <= 0`.
fn axis_radius(lambda: f64, c: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::NoBracket(format!(
            "no positive equilibrium radius for curvature {lambda}"
        )));
    }
    let f = |r: f64| lambda * r.powi(5) - r * r + 3.0 * c;
    let df = |r: f64| 5.0 * lambda * r.powi(4) - 2.0 * r;
    let lo = (2.0 * lambda).powf(-1.0 / 3.0) / 16.0;
    let hi = (2.0 / lambda).powf(1.0 / 3.0) * 16.0;
    let (lo, hi) = if f(lo).signum() != f(hi).signum() {
        (lo, hi)
    } else {
        root::widen_until_sign_change(f, lo, hi)?
    };
    root::bisect(f, Some(df), lo, hi, 2)
}

/// Residual of the defining scalar equation at the reported radius, in the
/// polynomial normalization.
pub fn radius_residual(point: &EquilibriumPoint, lambda1: f64, lambda2: f64, c: f64) -> f64 {
    let r = point.r_star;
    match point.axis {
        Axis::X => lambda2 * r.powi(5) - r * r + 3.0 * c,
        Axis::Y => lambda1 * r.powi(5) - r * r + 3.0 * c,
        Axis::Z => -r.powi(5) - r * r - 6.0 * c,
    }
}

/// Distance of the vertical equilibrium with the `r^5` term dropped:
/// `r_hat_z = radius * sqrt(-3 c20)`. Same unit as `radius`; a close
/// approximation of the exact root converted through
/// [`crate::SystemParams::hill_to_km`].
pub fn approx_z_distance(radius: f64, c20: f64) -> f64 {
    radius * (-3.0 * c20).sqrt()
}

/// Diagonal of the Hessian at an axis equilibrium, from the closed forms
/// obtained by eliminating `1/r^3` with the defining equation.
fn hessian_diag_at(axis: Axis, r: f64, lambda1: f64, lambda2: f64, c: f64) -> [f64; 3] {
    let r3 = r.powi(3);
    let r5 = r3 * r * r;
    match axis {
        Axis::X => [
            lambda2 + 2.0 / r3 - 12.0 * c / r5,
            lambda1 - 1.0 / r3 + 3.0 * c / r5,
            -1.0 - 1.0 / r3 + 9.0 * c / r5,
        ],
        Axis::Y => [
            lambda2 - 1.0 / r3 + 3.0 * c / r5,
            lambda1 + 2.0 / r3 - 12.0 * c / r5,
            -1.0 - 1.0 / r3 + 9.0 * c / r5,
        ],
        Axis::Z => [
            lambda2 - 1.0 / r3 - 12.0 * c / r5,
            lambda1 - 1.0 / r3 - 12.0 * c / r5,
            -1.0 + 2.0 / r3 + 24.0 * c / r5,
        ],
    }
}

/// Roots of `rho^4 + A rho^2 + B` via the half-angle form. For `D < 0` the
/// quadruple is `+-a +- ib` with `rho^2 = alpha + i beta`,
/// `a = sqrt((sqrt(B) + alpha)/2)` and `b = beta / (2a)` (the product
/// `alpha^2 + beta^2 = B` is exact, which keeps the principal branch
/// stable).
fn quartic_roots(a_coef: f64, b_coef: f64, d: f64) -> [Complex64; 4] {
    if d >= 0.0 {
        let sq = d.sqrt();
        let rho1 = 0.5 * (-a_coef + sq);
        let rho2 = 0.5 * (-a_coef - sq);
        let pair = |rho2_val: f64| -> [Complex64; 2] {
            if rho2_val >= 0.0 {
                let r = rho2_val.sqrt();
                [Complex64::new(r, 0.0), Complex64::new(-r, 0.0)]
            } else {
                let r = (-rho2_val).sqrt();
                [Complex64::new(0.0, r), Complex64::new(0.0, -r)]
            }
        };
        let [p1, p2] = pair(rho1);
        let [p3, p4] = pair(rho2);
        [p1, p2, p3, p4]
    } else {
        let alpha = -0.5 * a_coef;
        let beta = 0.5 * (-d).sqrt();
        let modulus = b_coef.sqrt(); // |rho^2| = sqrt(alpha^2 + beta^2) = sqrt(B)
        let (a, b) = if alpha >= 0.0 {
            let a = (0.5 * (modulus + alpha)).sqrt();
            (a, beta / (2.0 * a))
        } else {
            let b = beta.signum() * (0.5 * (modulus - alpha)).sqrt();
            (beta / (2.0 * b), b)
        };
        [
            Complex64::new(a, b),
            Complex64::new(a, -b),
            Complex64::new(-a, b),
            Complex64::new(-a, -b),
        ]
    }
}

fn sort_spectrum(mut eig: [Complex64; 6]) -> [Complex64; 6] {
    eig.sort_by(|p, q| {
        q.re.partial_cmp(&p.re)
            .unwrap()
            .then(q.im.partial_cmp(&p.im).unwrap())
    });
    eig
}

fn classify(eigenvalues: &[Complex64; 6]) -> StabilityClass {
    let imaginary = |e: &Complex64| e.re.abs() <= IMAGINARY_THRESHOLD * (1.0 + e.im.abs());
    let real = |e: &Complex64| e.im.abs() <= IMAGINARY_THRESHOLD * (1.0 + e.re.abs());
    if eigenvalues.iter().all(imaginary) {
        StabilityClass::CenterCenterCenter
    } else if eigenvalues.iter().all(|e| imaginary(e) || real(e)) {
        StabilityClass::CenterCenterSaddle
    } else {
        StabilityClass::CenterComplexSaddle
    }
}

/// Completes an equilibrium point into a stability report: Hessian
/// diagonal, quartic data, the six eigenvalues of the factored
/// characteristic equation, and the classification.
///
/// Refuses locations where the potential gradient does not vanish.
pub fn stability_spectrum(
    point: &EquilibriumPoint,
    lambda1: f64,
    lambda2: f64,
    c: f64,
) -> Result<EquilibriumReport> {
    let grad = hill_gradient(&point.location, lambda1, lambda2, c)?;
    let grad_norm = grad.amax();
    // the gradient cancels terms of size `scale`, so its evaluation floor
    // is a few ulps of that; the gate must not sit below the floor
    let scale = hill_gradient_term_scale(&point.location, lambda1, lambda2, c)?;
    if grad_norm > 1e-10 * scale.max(1.0) {
        return Err(Error::NotAnEquilibrium { grad_norm });
    }
    let diag = hessian_diag_at(point.axis, point.r_star, lambda1, lambda2, c);
    let [oxx, oyy, ozz] = diag;
    let a = 4.0 - oxx - oyy;
    let b = oxx * oyy;
    let d = a * a - 4.0 * b;
    let vertical = if ozz >= 0.0 {
        let r = ozz.sqrt();
        [Complex64::new(r, 0.0), Complex64::new(-r, 0.0)]
    } else {
        let r = (-ozz).sqrt();
        [Complex64::new(0.0, r), Complex64::new(0.0, -r)]
    };
    let quartet = quartic_roots(a, b, d);
    let eigenvalues = sort_spectrum([
        vertical[0],
        vertical[1],
        quartet[0],
        quartet[1],
        quartet[2],
        quartet[3],
    ]);
    let class = classify(&eigenvalues);
    Ok(EquilibriumReport {
        axis: point.axis,
        r_star: point.r_star,
        location: point.location,
        hessian_diag: diag,
        quartic: QuarticCoeffs { a, b, d },
        eigenvalues,
        class,
    })
}

/// Assembles the full 6x6 linearization at a point: block structure
/// `[[0, I], [Hess, 2J]]` of the first-order system in (position,
/// velocity).
pub fn linearization(
    position: &Vector3<f64>,
    lambda1: f64,
    lambda2: f64,
    c: f64,
) -> Result<Matrix6<f64>> {
    let h = hill_hessian(position, lambda1, lambda2, c)?;
    let mut j = Matrix6::zeros();
    for i in 0..3 {
        j[(i, i + 3)] = 1.0;
        for k in 0..3 {
            j[(i + 3, k)] = h[(i, k)];
        }
    }
    j[(3, 4)] = 2.0;
    j[(4, 3)] = -2.0;
    Ok(j)
}

/// Hausdorff distance between the factored-quartic spectrum of a report
/// and the spectrum of the dense 6x6 linearization, relative to the
/// largest eigenvalue magnitude.
///
/// The dense side runs a general-purpose nonsymmetric eigensolver on the
/// assembled matrix, fully independent of the factored characteristic
/// equation.
pub fn eigensolver_cross_check(
    report: &EquilibriumReport,
    lambda1: f64,
    lambda2: f64,
    c: f64,
) -> Result<f64> {
    let j = linearization(&report.location, lambda1, lambda2, c)?;
    let dense = faer::Mat::from_fn(6, 6, |r, col| j[(r, col)])
        .eigenvalues()
        .map_err(|_| Error::EigensolverFailed)?;
    let scale = report
        .eigenvalues
        .iter()
        .map(|e| e.norm())
        .fold(1.0, f64::max);
    let dist = |p: Complex64, set: &[Complex64]| -> f64 {
        set.iter()
            .map(|q| (p - q).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let dense_vec: Vec<Complex64> = dense.iter().map(|e| Complex64::new(e.re, e.im)).collect();
    let forward = report
        .eigenvalues
        .iter()
        .map(|&e| dist(e, &dense_vec))
        .fold(0.0, f64::max);
    let backward = dense_vec
        .iter()
        .map(|&e| dist(e, &report.eigenvalues))
        .fold(0.0, f64::max);
    Ok(forward.max(backward) / scale)
}

/// First-order expansions of the frame and equilibrium data in the
/// oblateness parameter `c`, at fixed mass ratio and tertiary mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesCoefficients {
    /// `d` at c = 0: `sqrt(1 - 3(mu - mu^2))`.
    pub d0: f64,
    /// First-order coefficient `-2 (mu - mu^2) m3^(2/3) / d0`.
    pub d1: f64,
    /// Curvatures at c = 0.
    pub lambda10: f64,
    pub lambda20: f64,
    /// y-radius expansion `r_y = r_y0 + r_y1 c + O(c^2)`.
    pub r_y0: f64,
    pub r_y1: f64,
    /// x-radius expansion.
    pub r_x0: f64,
    pub r_x1: f64,
    /// `1/r_y^3 = alpha + beta c + O(c^2)`.
    pub alpha: f64,
    pub beta: f64,
    /// `1/r_x^3 = alpha' + beta' c + O(c^2)`.
    pub alpha_prime: f64,
    pub beta_prime: f64,
}

/// Expansion coefficients in `c`. The shape parameter `v` varies with `c`
/// through `v = (1 - 3 m3^(2/3) c)^(-1/3)`, which is where the tertiary
/// mass enters `d1`.
pub fn series_coefficients(mu: f64, m3: f64) -> SeriesCoefficients {
    let y = mu - mu * mu;
    let d0 = (1.0 - 3.0 * y).sqrt();
    let lambda10 = 1.5 * 3.0 * y / (1.0 + d0);
    let lambda20 = 1.5 * (1.0 + d0);
    let d1 = -2.0 * y * m3.powf(2.0 / 3.0) / d0;
    let r_y0 = lambda10.powf(-1.0 / 3.0);
    let r_x0 = lambda20.powf(-1.0 / 3.0);
    let r_y1 = (-1.0 + 0.5 * d1 * r_y0.powi(5)) / r_y0;
    let r_x1 = (-1.0 - 0.5 * d1 * r_x0.powi(5)) / r_x0;
    SeriesCoefficients {
        d0,
        d1,
        lambda10,
        lambda20,
        r_y0,
        r_y1,
        r_x0,
        r_x1,
        alpha: 1.0 / r_y0.powi(3),
        beta: -3.0 * r_y1 / r_y0.powi(4),
        alpha_prime: 1.0 / r_x0.powi(3),
        beta_prime: -3.0 * r_x1 / r_x0.powi(4),
    }
}

/// One row of a classification sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationRow {
    pub mu: f64,
    pub r_star: f64,
    pub omega_zz: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub class: StabilityClass,
}

/// Result of [`classify_over_parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationSweep {
    pub axis: Axis,
    pub rows: Vec<ClassificationRow>,
    /// For the y-axis, where the discriminant changes sign, bisected to
    /// 1e-10 in mu; `None` when D keeps its sign on the grid.
    pub mu_star: Option<f64>,
    /// Number of sign changes of D observed on the grid.
    pub d_sign_changes: usize,
}

/// Classifies the equilibria of one axis over a grid of mass ratios at
/// fixed `c`. The triangle shape is taken at its non-oblate limit
/// (`v = 1`): its c-dependence enters at O(m3^(2/3) c) and cannot move any
/// sign on these scales.
pub fn classify_over_parameters(
    axis: Axis,
    mu_grid: &[f64],
    c: f64,
) -> Result<ClassificationSweep> {
    if c > 0.0 {
        return Err(Error::InvalidPhysicalInput(format!(
            "oblateness parameter must be <= 0, got {c}"
        )));
    }
    let mut rows = Vec::with_capacity(mu_grid.len());
    for &mu in mu_grid {
        if !(mu > 0.0 && mu <= 0.5) {
            return Err(Error::InvalidPhysicalInput(format!(
                "mass ratio must be in (0, 1/2], got {mu}"
            )));
        }
        let (l1, l2, _) = crate::hill_model::rotation_eigenvalues(mu, 1.0);
        let point = find_equilibrium(axis, l1, l2, c)?;
        let report = stability_spectrum(&point, l1, l2, c)?;
        rows.push(ClassificationRow {
            mu,
            r_star: report.r_star,
            omega_zz: report.hessian_diag[2],
            a: report.quartic.a,
            b: report.quartic.b,
            d: report.quartic.d,
            class: report.class,
        });
    }
    let mut changes = Vec::new();
    for w in rows.windows(2) {
        if w[0].d.signum() != w[1].d.signum() {
            changes.push((w[0].mu, w[1].mu));
        }
    }
    let discriminant = |mu: f64| -> Result<f64> {
        let (l1, l2, _) = crate::hill_model::rotation_eigenvalues(mu, 1.0);
        let point = find_equilibrium(axis, l1, l2, c)?;
        let report = stability_spectrum(&point, l1, l2, c)?;
        Ok(report.quartic.d)
    };
    let mu_star = match changes.first() {
        Some(&(lo, hi)) => {
            let mut lo = lo;
            let mut hi = hi;
            let flo = discriminant(lo)?;
            for _ in 0..80 {
                if hi - lo <= 1e-10 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let fmid = discriminant(mid)?;
                if fmid.signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(0.5 * (lo + hi))
        }
        None => None,
    };
    Ok(ClassificationSweep {
        axis,
        rows,
        mu_star,
        d_sign_changes: changes.len(),
    })
}

/// One row of the vertical-equilibrium eigenvalue sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KreinSample {
    pub r_z: f64,
    /// Oblateness inducing this radius: `c = -(r^2 + r^5)/6`.
    pub c: f64,
    /// Real part of the complex quadruple (positive representative).
    pub a: f64,
    /// Imaginary part magnitude of the quadruple.
    pub b_abs: f64,
    /// `|b| - 1` evaluated without cancellation.
    pub b_abs_minus_one: f64,
}

/// Real and imaginary parts of the complex quadruple at vertical
/// equilibria, swept over radii.
///
/// Each radius induces its own `c` through the defining equation, and the
/// quadruple follows from `rho^2 = alpha + i beta` with
/// `a^2 = (sqrt(B) + alpha)/2`. The reported `|b| - 1` uses the
/// rationalized form
///
/// ```text
/// b^2 - 1 = [10 + (9/4) upsilon - (7/2) N / (1/r^3 + sqrt(B))]
///           / (2 (sqrt(B) + 1/r^3))
/// ```
///
/// with `N = 10 + (9/4) upsilon + 7/r^3`, which stays fully accurate as
/// `b -> 1` where the direct `sqrt(B)/2 + A/4` cancels catastrophically.
pub fn krein_limit_check(z_radius_grid: &[f64], mu: f64, v: f64) -> Result<Vec<KreinSample>> {
    let upsilon = v * v * (4.0 - v * v) * (mu - mu * mu);
    let mut out = Vec::with_capacity(z_radius_grid.len());
    for &r_z in z_radius_grid {
        if r_z <= 0.0 {
            return Err(Error::InvalidPhysicalInput(format!(
                "vertical radius must be positive, got {r_z}"
            )));
        }
        let c = -(r_z * r_z + r_z.powi(5)) / 6.0;
        let inv3 = 1.0 / r_z.powi(3);
        let n = 10.0 + 2.25 * upsilon + 7.0 * inv3;
        let big_b = n + inv3 * inv3;
        let sqrt_b = big_b.sqrt();
        let a = (0.5 * (sqrt_b + 1.5 + inv3)).sqrt();
        let b2_minus_one =
            (10.0 + 2.25 * upsilon - 3.5 * n / (inv3 + sqrt_b)) / (2.0 * (sqrt_b + inv3));
        let b_abs = (1.0 + b2_minus_one).sqrt();
        out.push(KreinSample {
            r_z,
            c,
            a,
            b_abs,
            b_abs_minus_one: b2_minus_one / (1.0 + b_abs),
        });
    }
    Ok(out)
}
