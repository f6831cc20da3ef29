//! Unit normalization and the derived scalar parameters of the model.
//!
//! All downstream modules consume one validated [`SystemParams`] record.
//! Conventions: total mass `m1 + m2 + m3 = 1`, the long sides of the
//! central configuration `r13 = r23 = 1` are the unit of distance, and the
//! gravitational constant is 1.

use crate::hill_model;
use crate::{Error, Result};

/// Raw physical description of the three heavy bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalInputs {
    pub mass_primary_kg: f64,
    pub mass_secondary_kg: f64,
    pub mass_tertiary_kg: f64,
    pub distance_primary_secondary_km: f64,
    /// Radius of the sphere with the same volume as the tertiary.
    pub equivalent_radius_km: f64,
    /// Zonal coefficient of the tertiary; <= 0 (oblate or spherical).
    pub c20: f64,
    /// Spin period of the tertiary, informational only.
    pub spin_period_hours: f64,
}

impl PhysicalInputs {
    /// Sun, Jupiter and the Trojan asteroid 624 Hektor, the worked example
    /// system of this crate.
    pub fn hektor() -> Self {
        PhysicalInputs {
            mass_primary_kg: 1.989e30,
            mass_secondary_kg: 1.898e27,
            mass_tertiary_kg: 7.91e18,
            distance_primary_secondary_km: 778.5e6,
            equivalent_radius_km: 92.0,
            c20: -0.476775,
            spin_period_hours: 6.92,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive = self.mass_primary_kg > 0.0
            && self.mass_secondary_kg > 0.0
            && self.mass_tertiary_kg > 0.0
            && self.distance_primary_secondary_km > 0.0
            && self.equivalent_radius_km > 0.0;
        if !all_positive {
            return Err(Error::InvalidPhysicalInput(
                "masses and lengths must be positive".into(),
            ));
        }
        if self.mass_primary_kg < self.mass_secondary_kg
            || self.mass_secondary_kg < self.mass_tertiary_kg
        {
            return Err(Error::InvalidPhysicalInput(
                "masses must satisfy m1 >= m2 >= m3".into(),
            ));
        }
        if self.c20 > 0.0 {
            return Err(Error::ProlateUnsupported { c20: self.c20 });
        }
        if self.spin_period_hours < 0.0 {
            return Err(Error::InvalidPhysicalInput(
                "spin period must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Parses a flat `key = value` configuration (one pair per line, `#`
    /// comments). Keys: `m1_kg, m2_kg, m3_kg, d12_km, radius_km, c20,
    /// spin_hours`. Unknown keys are an error; `spin_hours` is optional.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut m1 = None;
        let mut m2 = None;
        let mut m3 = None;
        let mut d12 = None;
        let mut radius = None;
        let mut c20 = None;
        let mut spin = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!("line {}: bad number for key `{key}`", lineno + 1))
            })?;
            let slot = match key {
                "m1_kg" => &mut m1,
                "m2_kg" => &mut m2,
                "m3_kg" => &mut m3,
                "d12_km" => &mut d12,
                "radius_km" => &mut radius,
                "c20" => &mut c20,
                "spin_hours" => &mut spin,
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            };
            if slot.is_some() {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
            *slot = Some(value);
        }
        let req = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::Config(format!("missing key `{name}`")))
        };
        let inputs = PhysicalInputs {
            mass_primary_kg: req("m1_kg", m1)?,
            mass_secondary_kg: req("m2_kg", m2)?,
            mass_tertiary_kg: req("m3_kg", m3)?,
            distance_primary_secondary_km: req("d12_km", d12)?,
            equivalent_radius_km: req("radius_km", radius)?,
            c20: req("c20", c20)?,
            spin_period_hours: spin.unwrap_or(0.0),
        };
        inputs.validate()?;
        Ok(inputs)
    }
}

/// Every normalized scalar parameter of the model, derived once from
/// [`PhysicalInputs`] and immutable afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Mass ratio m2 / (m1 + m2).
    pub mu: f64,
    /// Normalized primary mass (total mass 1).
    pub m1: f64,
    /// Normalized secondary mass.
    pub m2: f64,
    /// Normalized tertiary mass.
    pub m3: f64,
    /// Normalized tertiary radius (unit distance r13 = r23 = 1).
    pub r3: f64,
    /// Hill-rescaled tertiary radius, rho3 = m3^(-1/3) * r3.
    pub rho3: f64,
    /// Zonal coefficient of the tertiary (<= 0).
    pub c20: f64,
    /// Oblateness constant C = r3^2 * J2 / 2 = -r3^2 * c20 / 2 >= 0.
    pub big_c: f64,
    /// Hill-rescaled oblateness c = m3^(-2/3) * r3^2 * c20 / 2 <= 0.
    pub little_c: f64,
    /// Short side r12 of the central configuration (long sides are 1).
    pub v: f64,
    /// v - 1, carried separately because 1 - v is below one ulp of v for
    /// realistic oblateness.
    pub v_defect: f64,
    /// Angular velocity of the configuration, omega = sqrt(1 + 3C).
    pub omega: f64,
    /// Smaller curvature eigenvalue of the rotated Hill frame.
    pub lambda1: f64,
    /// Larger curvature eigenvalue; lambda1 + lambda2 = 3.
    pub lambda2: f64,
    /// Physical length of one Hill unit, m3^(1/3) * d12.
    pub hill_length_km: f64,
    /// Physical primary-secondary distance (the unit of distance), km.
    pub distance_primary_secondary_km: f64,
}

/// Derives all normalized model constants from physical inputs.
///
/// The short side is evaluated through `ln(1+x)`/`exp(x)-1` so that
/// `v_defect = v - 1` keeps full relative precision even when it is
/// O(1e-15), and omega comes from the defining relation
/// `omega^2 = 1/v^3 = 1 + 3C`.
pub fn normalize_system(inputs: &PhysicalInputs) -> Result<SystemParams> {
    inputs.validate()?;
    let total = inputs.mass_primary_kg + inputs.mass_secondary_kg + inputs.mass_tertiary_kg;
    let mu = inputs.mass_secondary_kg / (inputs.mass_primary_kg + inputs.mass_secondary_kg);
    let m3 = inputs.mass_tertiary_kg / total;
    let m2 = inputs.mass_secondary_kg / total;
    let m1 = inputs.mass_primary_kg / total;
    let r3 = inputs.equivalent_radius_km / inputs.distance_primary_secondary_km;
    let m3_cbrt = m3.cbrt();
    let rho3 = r3 / m3_cbrt;
    let big_c = -r3 * r3 * inputs.c20 / 2.0;
    let little_c = rho3 * rho3 * inputs.c20 / 2.0;
    let v_defect = (-(3.0 * big_c).ln_1p() / 3.0).exp_m1();
    let v = 1.0 + v_defect;
    let omega = (1.0 + 3.0 * big_c).sqrt();
    let (lambda1, lambda2, _) = hill_model::rotation_eigenvalues(mu, v);
    Ok(SystemParams {
        mu,
        m1,
        m2,
        m3,
        r3,
        rho3,
        c20: inputs.c20,
        big_c,
        little_c,
        v,
        v_defect,
        omega,
        lambda1,
        lambda2,
        hill_length_km: m3_cbrt * inputs.distance_primary_secondary_km,
        distance_primary_secondary_km: inputs.distance_primary_secondary_km,
    })
}

impl SystemParams {
    /// Converts a length in Hill units to kilometers:
    /// `length * m3^(1/3) * d12`.
    pub fn hill_to_km(&self, length_hill: f64) -> f64 {
        length_hill * self.hill_length_km
    }
}
