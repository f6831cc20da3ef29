//! Bracketed scalar root finding for the monotone shape and equilibrium
//! equations.
//!
//! Every function solved in this crate is strictly monotone on its domain,
//! so a sign-changing bracket is guaranteed to contain exactly one root and
//! bisection is unconditionally safe. Bisection runs to machine-level
//! interval width and is followed by a couple of Newton polish steps when a
//! derivative is supplied.

use crate::{Error, Result};

/// Bisection on a sign-changing bracket down to relative width ~1e-15,
/// followed by up to `polish` Newton steps kept inside the bracket.
pub(crate) fn bisect<F, D>(
    f: F,
    df: Option<D>,
    mut lo: f64,
    mut hi: f64,
    polish: usize,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket(format!(
            "f({lo:e}) = {flo:e} and f({hi:e}) = {fhi:e} have the same sign"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval at machine resolution
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= 1e-15 * lo.abs().max(hi.abs()) {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    if let Some(df) = df {
        for _ in 0..polish {
            let d = df(x);
            if d == 0.0 {
                break;
            }
            let step = f(x) / d;
            let next = x - step;
            if next.is_finite() && next > lo.min(hi) && next < lo.max(hi) {
                x = next;
            } else {
                break;
            }
        }
    }
    Ok(x)
}

/// Scans a geometric grid (64 points per decade over `decades` decades
/// starting at `start`) for the first sign change of `f` and returns the
/// bracketing pair.
pub(crate) fn scan_geometric<F>(f: F, start: f64, decades: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let per_decade = 64usize;
    let factor = 10f64.powf(1.0 / per_decade as f64);
    let mut lo = start;
    let mut flo = f(lo);
    if flo == 0.0 {
        return Ok((lo, lo));
    }
    let mut x = lo;
    for _ in 0..decades * per_decade {
        x *= factor;
        let fx = f(x);
        if fx == 0.0 || fx.signum() != flo.signum() {
            return Ok((lo, x));
        }
        lo = x;
        flo = fx;
    }
    Err(Error::NoBracket(format!(
        "no sign change on geometric scan from {start:e} over {decades} decades"
    )))
}

/// Widens the bracket `[lo, hi]` geometrically about its center until `f`
/// changes sign across it.
pub(crate) fn widen_until_sign_change<F>(f: F, mut lo: f64, mut hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    for _ in 0..200 {
        if f(lo).signum() != f(hi).signum() {
            return Ok((lo, hi));
        }
        lo *= 0.5;
        hi *= 2.0;
        if !lo.is_normal() || !hi.is_finite() {
            break;
        }
    }
    Err(Error::NoBracket(format!(
        "no sign change after widening to [{lo:e}, {hi:e}]"
    )))
}
