//! Exit identities. Two-sided problems live on `[0, a]`; callers shift coordinates.

use crate::error::{Error, Result};
use crate::quad;
use crate::scale::ScaleFn;

fn check_interval(op: &'static str, sf: &ScaleFn, x: f64, a: f64) -> Result<()> {
    if !(0.0..=a).contains(&x) || !a.is_finite() {
        return Err(Error::domain(op, format!("need 0 <= x <= a, got x={x}, a={a}")));
    }
    if sf.w_raw(a) <= 0.0 {
        return Err(Error::domain(op, format!("W(a) vanishes at a={a}")));
    }
    Ok(())
}

/// `E_x[e^{-r T_a^+}; T_a^+ < T_0^-] = W(x)/W(a)`.
pub fn up_exit(sf: &ScaleFn, x: f64, a: f64) -> Result<f64> {
    check_interval("up_exit", sf, x, a)?;
    Ok(sf.w_ratio(x, a))
}

/// `E_x[e^{-r T_0^-}; T_0^- < T_a^+] = Z(x) - Z(a) W(x)/W(a)`.
pub fn down_exit(sf: &ScaleFn, x: f64, a: f64) -> Result<f64> {
    check_interval("down_exit", sf, x, a)?;
    if x == a {
        return Ok(0.0);
    }
    Ok(sf.z_raw(x) - sf.z_raw(a) * sf.w_ratio(x, a))
}

fn check_drawdown(op: &'static str, y: f64, theta: f64, x: f64, strict_x: bool) -> Result<()> {
    if !(theta >= 0.0 && theta < y) {
        return Err(Error::domain(op, format!("need 0 <= theta < y, got theta={theta}, y={y}")));
    }
    let ok_x = if strict_x { x > 0.0 } else { x >= 0.0 };
    if !ok_x || !x.is_finite() {
        return Err(Error::domain(op, format!("invalid running-minimum level {x}")));
    }
    Ok(())
}

/// Transform of the time the drawdown falls from `y` to `theta`, restricted to the running
/// minimum staying above `-x`: `W(x) / W(y - theta + x)`.
pub fn drawdown_lower_exit(sf: &ScaleFn, y: f64, theta: f64, x: f64) -> Result<f64> {
    check_drawdown("drawdown_lower_exit", y, theta, x, true)?;
    Ok(sf.w_ratio(x, y - theta + x))
}

/// Density in `phi` of the running minimum `-phi` at that time: `d/dphi [W(phi)/W(y - theta + phi)]`.
pub fn drawdown_exit_min_density(sf: &ScaleFn, y: f64, theta: f64, phi: f64) -> Result<f64> {
    check_drawdown("drawdown_exit_min_density", y, theta, phi, true)?;
    Ok(min_density(sf, y - theta, phi))
}

/// `d/dphi [W(phi)/W(s + phi)]` for `s > 0`, `phi > 0`.
pub(crate) fn min_density(sf: &ScaleFn, s: f64, phi: f64) -> f64 {
    sf.w_ratio(phi, s + phi) * (sf.dlog_w_excess(phi) - sf.dlog_w_excess(s + phi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleTransform {
    pub value: f64,
    /// Set when the normalising denominator `1 + (r - psi(u)) int_0^b e^{-uy} W(y) dy` lost most
    /// of its significant digits to cancellation.
    pub near_cancellation: bool,
}

/// Direct evaluation of `E[e^{-r T_U + u Xmin_{T_U}}; Xmax_{T_U} < v]`, where `T_U` is the first
/// time the drawup from a fresh start reaches `b`.
pub fn drawup_triple_transform(sf: &ScaleFn, b: f64, u: f64, v: f64) -> Result<TripleTransform> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::domain("drawup_triple_transform", format!("need b > 0, got {b}")));
    }
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::domain("drawup_triple_transform", format!("need u >= 0, got {u}")));
    }
    if v.is_nan() {
        return Err(Error::domain("drawup_triple_transform", "v is NaN"));
    }
    if v <= 0.0 {
        // The running maximum is never below the starting point.
        return Ok(TripleTransform { value: 0.0, near_cancellation: false });
    }
    let k = sf.r() - sf.model().psi(u);
    let i_b = exp_weighted_w_integral(sf, u, b)?;
    let denom = 1.0 + k * i_b;
    let near_cancellation = denom.abs() < 1e-6 * (k * i_b).abs();
    let s = b - v;
    let (i_s, second) =
        if s > 0.0 { (exp_weighted_w_integral(sf, u, s)?, (-u * s).exp() * sf.w_ratio(s, b)) } else { (0.0, 0.0) };
    let value = (-u * b).exp() * (1.0 + k * i_s) / denom - second;
    Ok(TripleTransform { value, near_cancellation })
}

/// `int_0^s e^{-u y} W(y) dy`, split at multiples of the decay length `1/u`.
fn exp_weighted_w_integral(sf: &ScaleFn, u: f64, s: f64) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    let mut breaks = vec![0.0];
    if u > 0.0 {
        let len = 1.0 / u;
        let n = ((s / len).floor() as usize).min(64);
        breaks.extend((1..=n).map(|i| i as f64 * len).filter(|&x| x < s));
    }
    breaks.push(s);
    quad::integrate_with_breaks(|y| (-u * y).exp() * sf.w_raw(y), &breaks, 1e-10)
}
