//! Adaptive trajectory propagation for both dynamical models with
//! conservation monitoring.
//!
//! The integrator is an embedded Dormand-Prince 5(4) pair with its
//! standard fourth-order dense-output interpolant. Step-size control uses
//! the usual PI controller (safety 0.9, growth limited to [0.2, 10],
//! stabilization exponent 0.04); the initial step comes from the standard
//! curvature heuristic comparing the first derivative against a trial
//! second-derivative estimate. Acceptance is judged by measured energy
//! drift, so no structure-preserving method is needed.

use nalgebra::{Matrix6, Vector6};

use crate::central_config::TriangleConfig;
use crate::four_body;
use crate::hill_model;
use crate::params::SystemParams;
use crate::state::{Frame, PhaseState, Representation};
use crate::{Error, Result};

/// Which vector field to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    FourBody,
    Hill,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::FourBody => "4bp",
            Model::Hill => "hill",
        }
    }
}

/// A dynamical model bound to its parameters.
#[derive(Debug, Clone, Copy)]
pub enum Dynamics<'a> {
    /// Synodic-frame four-body field. `representation` selects the
    /// velocity-form or the canonical (Hamiltonian) equations.
    FourBody {
        params: &'a SystemParams,
        triangle: &'a TriangleConfig,
        representation: Representation,
    },
    /// Rotated-frame Hill field in velocity form.
    Hill { lambda1: f64, lambda2: f64, c: f64 },
}

impl<'a> Dynamics<'a> {
    pub fn four_body(params: &'a SystemParams, triangle: &'a TriangleConfig) -> Self {
        Dynamics::FourBody {
            params,
            triangle,
            representation: Representation::Velocity,
        }
    }

    pub fn hill(lambda1: f64, lambda2: f64, c: f64) -> Self {
        Dynamics::Hill {
            lambda1,
            lambda2,
            c,
        }
    }

    pub fn model(&self) -> Model {
        match self {
            Dynamics::FourBody { .. } => Model::FourBody,
            Dynamics::Hill { .. } => Model::Hill,
        }
    }

    pub fn frame(&self) -> Frame {
        match self {
            Dynamics::FourBody { .. } => Frame::Synodic4bp,
            Dynamics::Hill { .. } => Frame::HillRotated,
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            Dynamics::FourBody { representation, .. } => *representation,
            Dynamics::Hill { .. } => Representation::Velocity,
        }
    }

    fn state_of(&self, y: &Vector6<f64>) -> PhaseState {
        PhaseState::from_array(
            self.frame(),
            self.representation(),
            [y[0], y[1], y[2], y[3], y[4], y[5]],
        )
    }

    fn derivative(&self, y: &Vector6<f64>) -> Result<Vector6<f64>> {
        let state = self.state_of(y);
        let rhs = match self {
            Dynamics::FourBody {
                params,
                triangle,
                representation,
            } => match representation {
                Representation::Velocity => four_body::eom_4bp(&state, params, triangle)?,
                Representation::CanonicalMomentum => {
                    four_body::eom_4bp_canonical(&state, params, triangle)?
                }
            },
            Dynamics::Hill {
                lambda1,
                lambda2,
                c,
            } => hill_model::eom_hill(&state, *lambda1, *lambda2, *c)?,
        };
        Ok(Vector6::from_row_slice(&rhs))
    }

    /// Conserved energy of the state (converted through the momentum map
    /// when integrating the canonical field).
    pub fn energy(&self, state: &PhaseState) -> Result<f64> {
        match self {
            Dynamics::FourBody {
                params, triangle, ..
            } => match state.representation {
                Representation::Velocity => four_body::energy_4bp(state, params, triangle),
                Representation::CanonicalMomentum => {
                    four_body::hamiltonian_4bp(state, params, triangle)
                }
            },
            Dynamics::Hill {
                lambda1,
                lambda2,
                c,
            } => hill_model::hill_energy(&state.to_velocity(), *lambda1, *lambda2, *c),
        }
    }

    fn min_distance(&self, y: &Vector6<f64>) -> f64 {
        let pos = nalgebra::Vector3::new(y[0], y[1], y[2]);
        match self {
            Dynamics::FourBody { triangle, .. } => four_body::min_body_distance(&pos, triangle).1,
            Dynamics::Hill { .. } => pos.norm(),
        }
    }
}

/// How to sample the solution.
#[derive(Debug, Clone)]
pub enum Sampling {
    /// Record every accepted solver step.
    SolverSteps,
    /// Dense output at `n >= 2` uniformly spaced times across the span.
    Uniform(usize),
    /// Dense output at explicit times (must lie inside the span, sorted in
    /// integration direction).
    Times(Vec<f64>),
}

/// Integration options. Tolerances must lie in [1e-14, 1e-3].
#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub sampling: Sampling,
    /// Refuse to approach any gravitating body closer than this.
    pub min_distance: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            sampling: Sampling::SolverSteps,
            min_distance: 1e-9,
        }
    }
}

/// Sampled solution with its conservation record.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub model: Model,
    pub frame: Frame,
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub energies: Vec<f64>,
    pub max_energy_drift: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &PhaseState {
        self.states.last().expect("trajectory has samples")
    }
}

// Dormand-Prince 5(4) tableau. Both vector fields are autonomous, so the
// stage abscissae never enter the right-hand sides.
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// b - bhat, for the embedded 4th-order error estimate
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense-output weights
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct DenseSegment {
    t0: f64,
    h: f64,
    cont: [Vector6<f64>; 5],
}

impl DenseSegment {
    fn eval(&self, t: f64) -> Vector6<f64> {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        self.cont[0]
            + s * (self.cont[1] + s1 * (self.cont[2] + s * (self.cont[3] + s1 * self.cont[4])))
    }
}

/// Initial step from the usual curvature heuristic: compare the state and
/// derivative scales, probe with an Euler step, and bound by the
/// fifth-order exponent of the resulting second-derivative estimate.
fn initial_step(
    dyn_: &Dynamics,
    span: f64,
    y0: &Vector6<f64>,
    f0: &Vector6<f64>,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let sc = |y: &Vector6<f64>| {
        let mut norm = 0.0;
        for i in 0..6 {
            let s = abs_tol + rel_tol * y0[i].abs();
            norm += (y[i] / s).powi(2);
        }
        (norm / 6.0).sqrt()
    };
    let d0 = sc(y0);
    let d1 = sc(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span.abs());
    let y1 = y0 + h0 * span.signum() * f0;
    let f1 = dyn_.derivative(&y1)?;
    let d2 = sc(&(f1 - f0)) / h0;
    let max_d = d1.max(d2);
    let h1 = if max_d <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / max_d).powf(0.2)
    };
    Ok(h1.min(100.0 * h0).min(span.abs()) * span.signum())
}

/// Integrates the model over `t_span` from `initial`, recording samples,
/// energies, and the worst energy drift.
///
/// The initial state must carry the frame and representation the model
/// expects. Backwards spans (`t1 < t0`) integrate in reverse time.
pub fn integrate(
    initial: &PhaseState,
    t_span: (f64, f64),
    dynamics: &Dynamics,
    options: &IntegrateOptions,
) -> Result<Trajectory> {
    for tol in [options.rel_tol, options.abs_tol] {
        if !(1e-14..=1e-3).contains(&tol) {
            return Err(Error::InvalidTolerance(tol));
        }
    }
    initial.require(dynamics.frame(), dynamics.representation())?;
    let (t0, t1) = t_span;
    let span = t1 - t0;
    if span == 0.0 {
        return Err(Error::InvalidPhysicalInput("empty time span".into()));
    }
    let direction = span.signum();
    let sample_times: Vec<f64> = match &options.sampling {
        Sampling::SolverSteps => Vec::new(),
        Sampling::Uniform(n) => {
            if *n < 2 {
                return Err(Error::InvalidPhysicalInput(
                    "uniform sampling needs at least 2 points".into(),
                ));
            }
            (0..*n)
                .map(|i| t0 + span * i as f64 / (*n - 1) as f64)
                .collect()
        }
        Sampling::Times(ts) => ts.clone(),
    };
    if !sample_times.is_empty() {
        for w in sample_times.windows(2) {
            if (w[1] - w[0]) * direction <= 0.0 {
                return Err(Error::InvalidPhysicalInput(
                    "sample times must be sorted in integration direction".into(),
                ));
            }
        }
        if (sample_times[0] - t0) * direction < 0.0
            || (t1 - *sample_times.last().unwrap()) * direction < 0.0
        {
            return Err(Error::InvalidPhysicalInput(
                "sample times must lie inside the span".into(),
            ));
        }
    }

    let mut y = Vector6::from_row_slice(&initial.to_array());
    if dynamics.min_distance(&y) < options.min_distance {
        return Err(Error::SingularityApproach {
            t: t0,
            distance: dynamics.min_distance(&y),
        });
    }

    let mut t = t0;
    let mut k1 = dynamics.derivative(&y)?;
    let mut h = initial_step(dynamics, span, &y, &k1, options.rel_tol, options.abs_tol)?;

    let mut times = Vec::new();
    let mut states = Vec::new();
    let record_solver_steps = matches!(options.sampling, Sampling::SolverSteps);
    let mut pending = sample_times.into_iter().peekable();

    let record = |t: f64, y: &Vector6<f64>, times: &mut Vec<f64>, states: &mut Vec<PhaseState>| {
        times.push(t);
        states.push(PhaseState::from_array(
            dynamics.frame(),
            dynamics.representation(),
            [y[0], y[1], y[2], y[3], y[4], y[5]],
        ));
    };

    // the first requested sample may coincide with t0
    if record_solver_steps {
        record(t, &y, &mut times, &mut states);
    } else {
        while let Some(&ts) = pending.peek() {
            if (ts - t0) * direction <= 0.0 {
                record(ts, &y, &mut times, &mut states);
                pending.next();
            } else {
                break;
            }
        }
    }

    let mut facold: f64 = 1e-4;
    let min_step = 1e-15 * span.abs();
    let mut ks = [Vector6::zeros(); 7];

    while (t1 - t) * direction > 0.0 {
        if h.abs() < min_step {
            return Err(Error::StepUnderflow { t, step: h });
        }
        // land exactly on t1 so rounding cannot leave a sub-step tail
        let final_step = (t + h - t1) * direction >= 0.0;
        if final_step {
            h = t1 - t;
        }

        ks[0] = k1;
        let stage = |coeffs: &[f64], ks: &[Vector6<f64>; 7]| -> Vector6<f64> {
            let mut acc = Vector6::zeros();
            for (a, k) in coeffs.iter().zip(ks.iter()) {
                if *a != 0.0 {
                    acc += *a * k;
                }
            }
            acc
        };
        let mut failed = false;
        for i in 1..=5 {
            let coeffs: &[f64] = match i {
                1 => &A2,
                2 => &A3,
                3 => &A4,
                4 => &A5,
                _ => &A6,
            };
            let yi = y + h * stage(coeffs, &ks);
            match dynamics.derivative(&yi) {
                Ok(k) => ks[i] = k,
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        let (ynew, err) = if failed {
            (y, f64::INFINITY)
        } else {
            let ynew = y + h * stage(&B, &ks);
            match dynamics.derivative(&ynew) {
                Ok(k7) => {
                    ks[6] = k7;
                    let errv = h * stage(&E, &ks);
                    let mut err = 0.0;
                    for i in 0..6 {
                        let s = options.abs_tol + options.rel_tol * y[i].abs().max(ynew[i].abs());
                        err += (errv[i] / s).powi(2);
                    }
                    (ynew, (err / 6.0).sqrt())
                }
                Err(_) => (y, f64::INFINITY),
            }
        };

        if err <= 1.0 {
            // accepted
            let dense = if !record_solver_steps && pending.peek().is_some() {
                let ydiff = ynew - y;
                let bspl = h * ks[0] - ydiff;
                let cont4 = h * stage(&D, &ks);
                Some(DenseSegment {
                    t0: t,
                    h,
                    cont: [y, ydiff, bspl, ydiff - h * ks[6] - bspl, cont4],
                })
            } else {
                None
            };
            let t_new = if final_step { t1 } else { t + h };
            if let Some(seg) = &dense {
                while let Some(&ts) = pending.peek() {
                    if (t_new - ts) * direction >= 0.0 {
                        let ys = seg.eval(ts);
                        record(ts, &ys, &mut times, &mut states);
                        pending.next();
                    } else {
                        break;
                    }
                }
            }
            t = t_new;
            y = ynew;
            k1 = ks[6]; // first-same-as-last
            if record_solver_steps {
                record(t, &y, &mut times, &mut states);
            }
            let dmin = dynamics.min_distance(&y);
            if dmin < options.min_distance {
                return Err(Error::SingularityApproach { t, distance: dmin });
            }
            // PI controller: h_new/h bounded to [0.2, 10], safety 0.9,
            // stabilization exponent 0.04
            let fac11 = err.powf(0.2 - 0.04 * 0.75);
            let fac = (fac11 / (facold.powf(0.04) * 0.9)).clamp(0.1, 5.0);
            facold = err.max(1e-4);
            h /= fac;
        } else if err.is_finite() {
            h /= (err.powf(0.2 - 0.04 * 0.75) / 0.9).min(5.0);
        } else {
            h *= 0.2;
        }
    }

    // pick up samples at t1 itself that dense output missed by rounding
    if !record_solver_steps {
        while let Some(&ts) = pending.peek() {
            if ((ts - t1) * direction).abs() <= 1e-12 * span.abs() {
                record(t1, &y, &mut times, &mut states);
                pending.next();
            } else {
                return Err(Error::InvalidPhysicalInput(format!(
                    "sample time {ts} beyond final time {t1}"
                )));
            }
        }
    }

    let mut energies = Vec::with_capacity(states.len());
    for s in &states {
        energies.push(dynamics.energy(s)?);
    }
    let e0 = energies.first().copied().unwrap_or(0.0);
    let max_energy_drift = energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
    Ok(Trajectory {
        model: dynamics.model(),
        frame: dynamics.frame(),
        times,
        states,
        energies,
        max_energy_drift,
    })
}

/// Scaling-and-squaring Taylor evaluation of the matrix exponential.
pub fn expm(m: &Matrix6<f64>) -> Matrix6<f64> {
    let norm = m.amax();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings);
    let mut result = Matrix6::identity();
    let mut term = Matrix6::identity();
    for k in 1..40 {
        term = (term * scaled) / k as f64;
        result += term;
        if term.amax() < 1e-18 * result.amax() {
            break;
        }
    }
    for _ in 0..squarings {
        result *= result;
    }
    result
}

/// Comparison between the nonlinear flow of a small displacement from an
/// equilibrium and its linearized flow.
#[derive(Debug, Clone, Copy)]
pub struct MonodromyReport {
    pub epsilon: f64,
    pub tau: f64,
    /// `|nonlinear - linear|` over the displacement size (absolute when
    /// the displacement is zero).
    pub relative_deviation: f64,
}

/// Flows the displaced state `equilibrium + displacement` for time `tau`
/// with the Hill field and compares against `exp(J tau) * displacement`
/// where `J` is the 6x6 linearization at the equilibrium.
///
/// The deviation is expected to scale linearly with the displacement size.
pub fn monodromy_step(
    equilibrium: &crate::equilibria::EquilibriumPoint,
    displacement: &Vector6<f64>,
    tau: f64,
    lambda1: f64,
    lambda2: f64,
    c: f64,
) -> Result<MonodromyReport> {
    let epsilon = displacement.norm();
    let j = crate::equilibria::linearization(&equilibrium.location, lambda1, lambda2, c)?;
    let linear = expm(&(j * tau)) * displacement;
    let y0 = PhaseState::velocity_state(
        Frame::HillRotated,
        equilibrium.location
            + nalgebra::Vector3::new(displacement[0], displacement[1], displacement[2]),
        nalgebra::Vector3::new(displacement[3], displacement[4], displacement[5]),
    );
    let dynamics = Dynamics::hill(lambda1, lambda2, c);
    let options = IntegrateOptions {
        rel_tol: 1e-13,
        abs_tol: 1e-14,
        sampling: Sampling::SolverSteps,
        min_distance: 1e-9,
    };
    let traj = integrate(&y0, (0.0, tau), &dynamics, &options)?;
    let yf = Vector6::from_row_slice(&traj.final_state().to_array());
    let eq6 = {
        let l = equilibrium.location;
        Vector6::new(l.x, l.y, l.z, 0.0, 0.0, 0.0)
    };
    let nonlinear = yf - eq6;
    let deviation = (nonlinear - linear).norm();
    Ok(MonodromyReport {
        epsilon,
        tau,
        relative_deviation: if epsilon > 0.0 {
            deviation / epsilon
        } else {
            deviation
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{find_equilibrium, Axis};
    use crate::hill_model::rotation_eigenvalues;
    use nalgebra::Vector3;

    const MU_H: f64 = 0.000953338644169616;
    const C_H: f64 = -1.327160919257125e-7;
    const V_H: f64 = 0.9999999999999967;

    fn hektor_lambdas() -> (f64, f64) {
        let (l1, l2, _) = rotation_eigenvalues(MU_H, V_H);
        (l1, l2)
    }

    fn circular_seed(r0: f64) -> PhaseState {
        PhaseState::velocity_state(
            Frame::HillRotated,
            Vector3::new(r0, 0.0, 0.0),
            Vector3::new(0.0, (1.0 / r0).sqrt(), 0.0),
        )
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        // the elliptic equilibrium: representation error stays bounded
        let (l1, l2) = hektor_lambdas();
        let eq = find_equilibrium(Axis::Y, l1, l2, C_H).unwrap();
        let s0 = PhaseState::velocity_state(Frame::HillRotated, eq.location, Vector3::zeros());
        let dynamics = Dynamics::hill(l1, l2, C_H);
        let traj = integrate(&s0, (0.0, 10.0), &dynamics, &IntegrateOptions::default()).unwrap();
        let sf = traj.final_state();
        assert!((sf.position - eq.location).norm() < 1e-9);
        assert!(sf.velocity.norm() < 1e-9);
    }

    #[test]
    fn saddle_equilibrium_drifts_only_through_instability() {
        // at the saddle the ulp-level residual grows like e^(2.5 t); over
        // t = 10 that amplifies ~1e-16 seeds to the 1e-5 scale, no better
        let (l1, l2) = hektor_lambdas();
        let eq = find_equilibrium(Axis::X, l1, l2, C_H).unwrap();
        let s0 = PhaseState::velocity_state(Frame::HillRotated, eq.location, Vector3::zeros());
        let dynamics = Dynamics::hill(l1, l2, C_H);
        let traj = integrate(&s0, (0.0, 10.0), &dynamics, &IntegrateOptions::default()).unwrap();
        let sf = traj.final_state();
        assert!((sf.position - eq.location).norm() < 1e-3);
    }

    #[test]
    fn energy_drift_bound() {
        let (l1, l2) = hektor_lambdas();
        let dynamics = Dynamics::hill(l1, l2, C_H);
        let traj = integrate(
            &circular_seed(0.5),
            (0.0, 10.0),
            &dynamics,
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert!(
            traj.max_energy_drift < 1e-10,
            "drift {:e}",
            traj.max_energy_drift
        );
    }

    #[test]
    fn drift_shrinks_with_tolerance() {
        let (l1, l2) = hektor_lambdas();
        let dynamics = Dynamics::hill(l1, l2, C_H);
        let drift_at = |rt: f64| {
            integrate(
                &circular_seed(0.5),
                (0.0, 10.0),
                &dynamics,
                &IntegrateOptions {
                    rel_tol: rt,
                    abs_tol: rt,
                    ..Default::default()
                },
            )
            .unwrap()
            .max_energy_drift
        };
        let coarse = drift_at(1e-9);
        let fine = drift_at(5e-10);
        assert!(fine <= 2.0 * coarse, "coarse {coarse:e}, fine {fine:e}");
        assert!(drift_at(1e-12) < coarse.max(1e-13));
    }

    #[test]
    fn time_reversal_returns_home() {
        let (l1, l2) = hektor_lambdas();
        let dynamics = Dynamics::hill(l1, l2, C_H);
        let s0 = circular_seed(0.5);
        let fwd = integrate(&s0, (0.0, 10.0), &dynamics, &IntegrateOptions::default()).unwrap();
        let back = integrate(
            fwd.final_state(),
            (10.0, 0.0),
            &dynamics,
            &IntegrateOptions::default(),
        )
        .unwrap();
        let sf = back.final_state();
        assert!((sf.position - s0.position).norm() < 1e-8);
        assert!((sf.velocity - s0.velocity).norm() < 1e-8);
    }

    #[test]
    fn mirror_symmetry_round_trip() {
        // reflect-and-reverse symmetry of the planar field: flowing the
        // reflected endpoint forward returns the reflected start
        let (l1, l2) = hektor_lambdas();
        let dynamics = Dynamics::hill(l1, l2, C_H);
        let s0 = circular_seed(0.5);
        let fwd = integrate(&s0, (0.0, 10.0), &dynamics, &IntegrateOptions::default()).unwrap();
        let reflect = |s: &PhaseState| {
            PhaseState::velocity_state(
                s.frame,
                Vector3::new(s.position.x, -s.position.y, s.position.z),
                Vector3::new(-s.velocity.x, s.velocity.y, -s.velocity.z),
            )
        };
        let mirrored = reflect(fwd.final_state());
        let second = integrate(
            &mirrored,
            (0.0, 10.0),
            &dynamics,
            &IntegrateOptions::default(),
        )
        .unwrap();
        let expected = reflect(&s0);
        let sf = second.final_state();
        assert!((sf.position - expected.position).norm() < 1e-9);
        assert!((sf.velocity - expected.velocity).norm() < 1e-9);
    }

    #[test]
    fn four_body_energy_conservation_short_arc() {
        let params =
            crate::params::normalize_system(&crate::params::PhysicalInputs::hektor()).unwrap();
        let triangle =
            crate::central_config::TriangleConfig::solve(params.m2, params.m3, params.big_c)
                .unwrap();
        let dynamics = Dynamics::four_body(&params, &triangle);
        let s0 = PhaseState::velocity_state(
            Frame::Synodic4bp,
            Vector3::new(0.3, 0.4, 0.1),
            Vector3::new(0.2, -0.1, 0.05),
        );
        let traj = integrate(&s0, (0.0, 1.0), &dynamics, &IntegrateOptions::default()).unwrap();
        assert!(traj.max_energy_drift < 1e-10);
    }

    #[test]
    fn four_body_energy_conservation_long_arc() {
        // retrograde circular orbit about the barycenter, well clear of
        // all three bodies for the whole span
        let params =
            crate::params::normalize_system(&crate::params::PhysicalInputs::hektor()).unwrap();
        let triangle =
            crate::central_config::TriangleConfig::solve(params.m2, params.m3, params.big_c)
                .unwrap();
        let dynamics = Dynamics::four_body(&params, &triangle);
        let r0 = 2.0;
        let s0 = PhaseState::velocity_state(
            Frame::Synodic4bp,
            Vector3::new(r0, 0.0, 0.0),
            Vector3::new(0.0, -(1.0 / r0).sqrt() - r0, 0.0),
        );
        let traj = integrate(&s0, (0.0, 10.0), &dynamics, &IntegrateOptions::default()).unwrap();
        let bound = 1e-10 * traj.energies[0].abs().max(1.0);
        assert!(
            traj.max_energy_drift < bound,
            "drift {:e} vs bound {bound:e}",
            traj.max_energy_drift
        );
    }

    #[test]
    fn canonical_and_velocity_forms_agree() {
        let params =
            crate::params::normalize_system(&crate::params::PhysicalInputs::hektor()).unwrap();
        let triangle =
            crate::central_config::TriangleConfig::solve(params.m2, params.m3, params.big_c)
                .unwrap();
        let s0 = PhaseState::velocity_state(
            Frame::Synodic4bp,
            Vector3::new(0.3, 0.4, 0.1),
            Vector3::new(0.2, -0.1, 0.05),
        );
        let vel_dyn = Dynamics::four_body(&params, &triangle);
        let can_dyn = Dynamics::FourBody {
            params: &params,
            triangle: &triangle,
            representation: Representation::CanonicalMomentum,
        };
        let t1 = 2.0;
        let a = integrate(&s0, (0.0, t1), &vel_dyn, &IntegrateOptions::default()).unwrap();
        let b = integrate(
            &s0.to_momentum(),
            (0.0, t1),
            &can_dyn,
            &IntegrateOptions::default(),
        )
        .unwrap();
        let va = a.final_state().to_velocity();
        let vb = b.final_state().to_velocity();
        assert!((va.position - vb.position).norm() < 1e-9);
        assert!((va.velocity - vb.velocity).norm() < 1e-9);
    }

    #[test]
    fn dense_output_matches_solver_steps() {
        let (l1, l2) = hektor_lambdas();
        let dynamics = Dynamics::hill(l1, l2, C_H);
        let s0 = circular_seed(0.5);
        let uniform = integrate(
            &s0,
            (0.0, 3.0),
            &dynamics,
            &IntegrateOptions {
                sampling: Sampling::Uniform(61),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(uniform.times.len(), 61);
        // spot-check one interior sample against an exact integration to it
        let t_probe = uniform.times[37];
        let direct =
            integrate(&s0, (0.0, t_probe), &dynamics, &IntegrateOptions::default()).unwrap();
        let interp = &uniform.states[37];
        let exact = direct.final_state();
        assert!((interp.position - exact.position).norm() < 1e-8);
    }

    #[test]
    fn singularity_guard_trips() {
        let (l1, l2) = hektor_lambdas();
        let dynamics = Dynamics::hill(l1, l2, C_H);
        // radial plunge straight at the origin
        let s0 = PhaseState::velocity_state(
            Frame::HillRotated,
            Vector3::new(0.05, 0.0, 0.0),
            Vector3::new(-2.0, 0.0, 0.0),
        );
        let err = integrate(
            &s0,
            (0.0, 5.0),
            &dynamics,
            &IntegrateOptions {
                min_distance: 1e-3,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularityApproach { .. }));
    }

    #[test]
    fn tolerance_range_is_enforced() {
        let (l1, l2) = hektor_lambdas();
        let dynamics = Dynamics::hill(l1, l2, C_H);
        let err = integrate(
            &circular_seed(0.5),
            (0.0, 1.0),
            &dynamics,
            &IntegrateOptions {
                rel_tol: 1e-2,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidTolerance(_)));
    }

    #[test]
    fn monodromy_linear_scaling() {
        let (l1, l2) = hektor_lambdas();
        let eq = find_equilibrium(Axis::X, l1, l2, C_H).unwrap();
        let dir = Vector6::from_element(1.0).normalize();
        let dev = |eps: f64| {
            monodromy_step(&eq, &(dir * eps), 0.1, l1, l2, C_H)
                .unwrap()
                .relative_deviation
        };
        let d1 = dev(1e-6);
        let d2 = dev(5e-7);
        assert!(d1 < 1e-6, "deviation {d1:e}");
        let ratio = d2 / d1;
        assert!((ratio - 0.5).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn monodromy_y_equilibrium_small_displacement() {
        let (l1, l2) = hektor_lambdas();
        let eq = find_equilibrium(Axis::Y, l1, l2, C_H).unwrap();
        let dir = Vector6::from_element(1.0).normalize();
        let report = monodromy_step(&eq, &(dir * 1e-8), 0.1, l1, l2, C_H).unwrap();
        assert!(report.relative_deviation < 1e-6);
    }

    #[test]
    fn monodromy_zero_displacement() {
        let (l1, l2) = hektor_lambdas();
        let eq = find_equilibrium(Axis::Y, l1, l2, C_H).unwrap();
        let report = monodromy_step(&eq, &Vector6::zeros(), 0.1, l1, l2, C_H).unwrap();
        assert!(report.relative_deviation < 1e-12);
    }

    #[test]
    fn expm_matches_scalar_blocks() {
        let mut m = Matrix6::zeros();
        for i in 0..6 {
            m[(i, i)] = -0.3 + 0.1 * i as f64;
        }
        let e = expm(&m);
        for i in 0..6 {
            assert!((e[(i, i)] - m[(i, i)].exp()).abs() < 1e-14);
        }
    }
}
