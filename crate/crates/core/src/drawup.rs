//! Drawdown insurance that expires once the drawup reaches `b` first.
//!
//! Coverage of closed forms:
//! * `a = b`: both models, every state;
//! * `a > b`, `y + z >= a`: both models, as a shifted two-sided exit;
//! * `a > b`, `y + z < a`: Brownian model, through the scale functions of `-X`.
//!
//! The remaining region reports [`Error::McRequired`].

use crate::drawdown::{CancellableValue, ThetaStar, THETA_SCAN, THETA_TOL};
use crate::error::{Error, Result};
use crate::exit::min_density;
use crate::levy::LevyModel;
use crate::optimize;
use crate::quad;
use crate::scale::ScaleFn;

const QUAD_TOL: f64 = 1e-10;
const H_QUAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawupState {
    pub y: f64,
    pub z: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Analytic,
    McRequired,
}

/// Constants of the reflected-at-the-minimum phase, built from the scale functions of `-X`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct HatPhase {
    hat: ScaleFn,
    /// `What'(b)/What(b)`
    kappa: f64,
    /// `Zhat(b) kappa - r What(b)`, which equals `kappa / Z(b)`.
    rho: f64,
    w_b: f64,
    z_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawupContract {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub c: f64,
    pub r: f64,
    sf: ScaleFn,
    hat: Option<HatPhase>,
}

impl DrawupContract {
    pub fn new(model: LevyModel, a: f64, b: f64, alpha: f64, c: f64, r: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidContract(format!("a must be > 0, got {a}")));
        }
        if !(b > 0.0 && b <= a) {
            return Err(Error::InvalidContract(format!("need 0 < b <= a, got b={b}, a={a}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidContract(format!("r must be > 0, got {r}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidContract(format!("alpha must be >= 0, got {alpha}")));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidContract(format!("c must be >= 0, got {c}")));
        }
        let sf = ScaleFn::new(model, r)?;
        let hat = match model.negated_brownian() {
            Some(neg) if b < a => {
                let hat = ScaleFn::new(neg, r)?;
                let kappa = hat.dlog_w(b);
                let w_b = hat.w_raw(b);
                let z_b = hat.z_raw(b);
                Some(HatPhase { hat, kappa, rho: z_b * kappa - r * w_b, w_b, z_b })
            }
            _ => None,
        };
        Ok(DrawupContract { a, b, alpha, c, r, sf, hat })
    }

    pub fn model(&self) -> &LevyModel {
        self.sf.model()
    }

    pub fn scale(&self) -> &ScaleFn {
        &self.sf
    }

    /// Whether `(lambda, nu)` at `(y, z)` has a closed form.
    pub fn regime(&self, y: f64, z: f64) -> Regime {
        if self.b < self.a && y + z < self.a && self.hat.is_none() {
            Regime::McRequired
        } else {
            Regime::Analytic
        }
    }

    fn check_yz(&self, op: &'static str, y: f64, z: f64) -> Result<()> {
        if !(0.0..=self.a).contains(&y) {
            return Err(Error::domain(op, format!("drawdown y={y} outside [0, {}]", self.a)));
        }
        if !(0.0..=self.b).contains(&z) {
            return Err(Error::domain(op, format!("drawup z={z} outside [0, {}]", self.b)));
        }
        Ok(())
    }

    fn check_state(&self, op: &'static str, s: &DrawupState) -> Result<()> {
        self.check_yz(op, s.y, s.z)?;
        if !(s.p >= 0.0 && s.p.is_finite()) {
            return Err(Error::domain(op, format!("premium must be >= 0, got {}", s.p)));
        }
        Ok(())
    }

    /// `(lambda, nu)`: discounted probabilities that the drawup `b` comes first, and that the
    /// drawdown `a` comes first (ties counted as drawdown).
    pub fn lambda_nu(&self, y: f64, z: f64) -> Result<(f64, f64)> {
        self.check_yz("lambda_nu", y, z)?;
        let (a, b) = (self.a, self.b);
        let sf = &self.sf;
        if y + z >= a {
            // Exit of X from [y - a, b - z] started at 0.
            let len = a + b - y - z;
            let lambda = sf.w_ratio(a - y, len);
            return Ok((lambda, sf.z_raw(a - y) - sf.z_raw(len) * lambda));
        }
        if a == b {
            let slope = sf.dlog_w(a) / (self.r * sf.w_raw(a));
            let lambda = sf.w_ratio(a - y, a) - slope * (sf.z_raw(a - y) - sf.z_raw(z));
            return Ok((lambda, sf.z_raw(z) - sf.z_raw(a) * lambda));
        }
        match &self.hat {
            Some(h) => self.lambda_nu_hat(h, y, z),
            None => Err(Error::McRequired("lambda/nu with a > b and y + z < a")),
        }
    }

    /// Brownian case `a > b`, `y + z < a`. The path first leaves `[-z, b - z]` started at 0
    /// with `F` the discounted law of the exit through `-z`; from a fresh minimum at level
    /// `-z - v` the drawup and drawdown race is driven by the reflected process, whose
    /// discounted outcomes are `L` (drawup) and `V` (drawdown) as functions of the current
    /// `max - min` range `g`.
    fn lambda_nu_hat(&self, h: &HatPhase, y: f64, z: f64) -> Result<(f64, f64)> {
        let (a, b, r) = (self.a, self.b, self.r);
        let sf = &self.sf;
        let v_b = (-h.kappa * (a - b)).exp();
        let l_b = h.rho / h.kappa * (1.0 - v_b);
        let vl = |g: f64| -> (f64, f64) {
            if g >= b {
                let e = (-h.kappa * (a - g)).exp();
                (e, h.rho / h.kappa * (1.0 - e))
            } else {
                let dz = h.z_b - h.hat.z_raw(g);
                (v_b * (1.0 - h.kappa / (r * h.w_b) * dz), l_b + h.rho * v_b / (r * h.w_b) * dz)
            }
        };
        let wz = sf.w_raw(z);
        let exit_low = |v: f64| sf.z_raw(z) - sf.z_raw(v + z) * sf.w_ratio(z, v + z);
        let direct = sf.w_ratio(z, b);
        if y + z >= b {
            let f = exit_low(b - z);
            let (v, l) = vl(y + z);
            return Ok((direct + f * l, f * v));
        }
        let density = |v: f64| {
            let u = v + z;
            wz / sf.w_raw(u) * (sf.z_raw(u) * sf.dlog_w(u) - r * sf.w_raw(u))
        };
        let f_y = exit_low(y);
        let (v0, l0) = vl(y + z);
        let breaks = [y, b - z];
        let int_l = quad::integrate_with_breaks(|v| vl(v + z).1 * density(v), &breaks, QUAD_TOL)?;
        let int_v = quad::integrate_with_breaks(|v| vl(v + z).0 * density(v), &breaks, QUAD_TOL)?;
        Ok((direct + f_y * l0 + int_l, f_y * v0 + int_v))
    }

    pub fn price_k(&self, s: DrawupState) -> Result<f64> {
        self.check_state("price_k", &s)?;
        let (lambda, nu) = self.lambda_nu(s.y, s.z)?;
        let q = s.p / self.r;
        Ok((q + self.alpha) * nu + q * lambda - q)
    }

    pub fn fair_premium(&self, y: f64, z: f64) -> Result<f64> {
        let (lambda, nu) = self.lambda_nu(y, z)?;
        let denominator = 1.0 - lambda - nu;
        if denominator < 1e-12 {
            return Err(Error::PremiumDiverges { denominator });
        }
        Ok(self.r * self.alpha * nu / denominator)
    }

    /// Payoff from cancelling now: `-k(y, z, p) - c`.
    pub fn k_tilde(&self, s: DrawupState) -> Result<f64> {
        Ok(-self.price_k(s)? - self.c)
    }

    fn check_theta(&self, op: &'static str, theta: f64) -> Result<()> {
        if !(theta >= 0.0 && theta < self.a) {
            return Err(Error::domain(op, format!("theta={theta} outside [0, {})", self.a)));
        }
        Ok(())
    }

    /// Value of the right to cancel when the drawdown first falls to `theta`.
    pub fn h_value(&self, s: DrawupState, theta: f64) -> Result<f64> {
        self.check_state("h_value", &s)?;
        self.check_theta("h_value", theta)?;
        if theta >= s.y {
            return self.k_tilde(s);
        }
        if self.a == self.b {
            self.h_equal_triggers(s, theta)
        } else {
            self.h_by_minimum(s, theta)
        }
    }

    /// Same quantity as [`h_value`](Self::h_value), always integrating over the running minimum
    /// at the cancellation time instead of using the `a = b` closed form.
    pub fn h_value_by_quadrature(&self, s: DrawupState, theta: f64) -> Result<f64> {
        self.check_state("h_value_by_quadrature", &s)?;
        self.check_theta("h_value_by_quadrature", theta)?;
        if theta >= s.y {
            return self.k_tilde(s);
        }
        self.h_by_minimum(s, theta)
    }

    fn h_by_minimum(&self, s: DrawupState, theta: f64) -> Result<f64> {
        let DrawupState { y, z, p } = s;
        let (a, b) = (self.a, self.b);
        let gap = y - theta;
        let at = |zz: f64| self.k_tilde(DrawupState { y: theta, z: zz.min(b), p });
        let mut total = 0.0;
        if gap < b - z {
            let m = (a - y).min(z);
            total += at(gap + z)? * self.sf.w_ratio(m, gap + m);
        }
        let upper = (a - y).min(b - gap);
        if upper > z {
            let mut breaks = vec![z];
            // Kink where the post-cancellation state crosses the b-range of the closed forms.
            if b - y > z && b - y < upper {
                breaks.push(b - y);
            }
            breaks.push(upper);
            let mut failure = None;
            let integral = quad::integrate_with_breaks(
                |x| match at(gap + x) {
                    Ok(v) => v * min_density(&self.sf, gap, x),
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                &breaks,
                H_QUAD_TOL,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            total += integral;
        }
        Ok(total)
    }

    /// Three-branch closed form for `a = b` and `theta < y`.
    fn h_equal_triggers(&self, s: DrawupState, theta: f64) -> Result<f64> {
        let DrawupState { y, z, p } = s;
        let a = self.a;
        let sf = &self.sf;
        if a <= y + z - theta {
            return Ok(0.0);
        }
        let ratio = sf.w_ratio(a - y, a - theta);
        if a <= y + z {
            return Ok(self.k_tilde(DrawupState { y: theta, z: y + z - theta, p })? * ratio);
        }
        let q = p / self.r;
        let slope = sf.dlog_w(a) / (self.r * sf.w_raw(a));
        let bracket = (q + self.alpha) * (1.0 - sf.z_raw(a) * slope) + q * slope;
        let edge = self.k_tilde(DrawupState { y: theta, z: a - theta, p })?;
        Ok(bracket * (sf.z_raw(a - y) - sf.z_raw(z)) + edge * ratio)
    }

    /// Smallest grid level `theta0` in `[0, y]` at which cancelling beats holding for every
    /// reachable drawup, or `None` when no such level exists.
    pub fn cancellation_level(&self, s: DrawupState) -> Result<Option<f64>> {
        self.check_state("cancellation_level", &s)?;
        let DrawupState { y, z, p } = s;
        let (a, b) = (self.a, self.b);
        let at = |t: f64, zz: f64| self.k_tilde(DrawupState { y: t, z: zz, p });
        for i in 0..=THETA_SCAN {
            let t0 = y * i as f64 / THETA_SCAN as f64;
            if t0 >= a {
                break;
            }
            let worst = if y + z >= a {
                let zz = y + z - t0;
                if zz >= b {
                    continue;
                }
                at(t0, zz)?
            } else {
                // Drawup after the running minimum reaches level x in (y - a, -z).
                let lo = y - t0 + z;
                let hi = (a - t0).min(b);
                if hi <= lo {
                    continue;
                }
                let mut failure = None;
                let m = optimize::minimize(
                    |zz| match at(t0, zz) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::NAN
                        }
                    },
                    lo,
                    hi,
                    32,
                    1e-6,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                m.value
            };
            if worst > 0.0 {
                return Ok(Some(t0));
            }
        }
        Ok(None)
    }

    pub fn theta_star(&self, s: DrawupState) -> Result<ThetaStar> {
        self.check_state("theta_star", &s)?;
        if self.cancellation_level(s)?.is_none() {
            return Ok(ThetaStar::NeverCancel);
        }
        let hi = s.y.min(self.a * (1.0 - 1e-12));
        let mut failure = None;
        let m = optimize::maximize(
            |t| match self.h_value(s, t) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NEG_INFINITY
                }
            },
            0.0,
            hi,
            THETA_SCAN,
            THETA_TOL,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(ThetaStar::Optimal { theta: m.x, value: m.value, at_boundary: m.at_boundary })
    }

    /// Value of the cancellable contract, `k + max(h(theta*), 0)`.
    pub fn price_cancellable(&self, s: DrawupState) -> Result<CancellableValue> {
        let base = self.price_k(s)?;
        let theta_star = self.theta_star(s)?;
        let option_value = match theta_star {
            ThetaStar::Optimal { value, .. } => value.max(0.0),
            ThetaStar::NeverCancel => 0.0,
        };
        Ok(CancellableValue { value: base + option_value, base, option_value, theta_star })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bm() -> LevyModel {
        LevyModel::brownian(0.03, 0.4).unwrap()
    }
    fn cl() -> LevyModel {
        LevyModel::cramer_lundberg(0.05, 0.01, 2.5).unwrap()
    }
    fn fig5() -> DrawupContract {
        DrawupContract::new(bm(), 10.0, 8.0, 100.0, 50.0, 0.01).unwrap()
    }
    fn fig6() -> DrawupContract {
        DrawupContract::new(cl(), 10.0, 10.0, 100.0, 50.0, 0.01).unwrap()
    }

    #[test]
    fn lambda_nu_ranges() {
        for c in [fig5(), fig6(), DrawupContract::new(bm(), 10.0, 10.0, 100.0, 0.0, 0.01).unwrap()] {
            for y in [0.5, 3.0, 6.0, 9.5] {
                for z in [0.5, 2.0, 4.0, 7.5] {
                    let (l, n) = c.lambda_nu(y, z).unwrap();
                    assert!((0.0..=1.0).contains(&l) && (0.0..=1.0).contains(&n), "{y} {z}: {l} {n}");
                    assert!(l + n < 1.0);
                }
            }
        }
    }

    #[test]
    fn equal_triggers_branches_join() {
        for m in [bm(), cl()] {
            let c = DrawupContract::new(m, 10.0, 10.0, 100.0, 0.0, 0.01).unwrap();
            for y in [2.0, 5.0, 8.0] {
                let z = 10.0 - y;
                let (l1, n1) = c.lambda_nu(y, z + 1e-9).unwrap();
                let (l2, n2) = c.lambda_nu(y, z - 1e-9).unwrap();
                assert!((l1 - l2).abs() < 1e-8 && (n1 - n2).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn brownian_hat_branches_join() {
        let c = fig5();
        // across y + z = a and y + z = b
        for (y, z) in [(7.0, 3.0), (5.0, 3.0), (6.5, 1.5)] {
            let (l1, n1) = c.lambda_nu(y, z + 1e-9).unwrap();
            let (l2, n2) = c.lambda_nu(y, z - 1e-9).unwrap();
            assert!((l1 - l2).abs() < 1e-7 && (n1 - n2).abs() < 1e-7, "({y},{z}) {l1} {l2} {n1} {n2}");
        }
    }

    #[test]
    fn renewal_identity_below_a() {
        // From a point where the minimum is fresh, nu = Z(z) - Z(b) lambda.
        for c in [fig5(), fig6(), DrawupContract::new(bm(), 10.0, 6.0, 1.0, 0.0, 0.01).unwrap()] {
            for (y, z) in [(7.0, 2.0), (3.0, 2.0), (5.0, 4.0), (2.0, 1.0)] {
                if z >= c.b {
                    continue;
                }
                let (l, n) = c.lambda_nu(y, z).unwrap();
                let sf = c.scale();
                let rhs = sf.z_raw(z) - sf.z_raw(c.b) * l;
                assert!((n - rhs).abs() < 1e-8, "({y},{z}): nu={n} identity={rhs}");
            }
        }
    }

    #[test]
    fn jump_model_above_b_needs_simulation() {
        let c = DrawupContract::new(cl(), 10.0, 8.0, 100.0, 0.0, 0.01).unwrap();
        assert_eq!(c.regime(3.0, 2.0), Regime::McRequired);
        assert!(matches!(c.lambda_nu(3.0, 2.0), Err(Error::McRequired(_))));
        assert!(c.lambda_nu(8.0, 3.0).is_ok());
    }

    #[test]
    fn premium_root_and_limits() {
        for c in [fig5(), fig6()] {
            for (y, z) in [(3.0, 2.0), (7.0, 2.0), (9.0, 0.5)] {
                let p = c.fair_premium(y, z).unwrap();
                assert!(c.price_k(DrawupState { y, z, p }).unwrap().abs() < 1e-10);
                let (_, nu) = c.lambda_nu(y, z).unwrap();
                assert_relative_eq!(c.price_k(DrawupState { y, z, p: 0.0 }).unwrap(), 100.0 * nu, epsilon = 1e-12);
            }
        }
        let ratio = fig5().fair_premium(9.999, 1.0).unwrap() / fig5().fair_premium(9.99, 1.0).unwrap();
        assert!((ratio / 10.0 - 1.0).abs() < 0.05, "ratio {ratio}");
        let c = fig6();
        let edge = c.fair_premium(10.0, 1.0).unwrap();
        assert!(edge.is_finite() && edge > c.fair_premium(9.99, 1.0).unwrap());
    }

    #[test]
    fn value_matching() {
        let c = fig5();
        let s = DrawupState { y: 7.0, z: 2.0, p: 1.35 };
        assert_eq!(c.h_value(s, 7.0).unwrap(), c.k_tilde(s).unwrap());
        assert_eq!(c.h_value(s, 9.0).unwrap(), c.k_tilde(s).unwrap());
    }

    #[test]
    fn equal_triggers_closed_form_matches_quadrature() {
        for m in [bm(), cl()] {
            let c = DrawupContract::new(m, 10.0, 10.0, 100.0, 50.0, 0.01).unwrap();
            for (y, z, th) in [(6.0, 2.0, 3.0), (6.0, 4.0, 1.0), (6.0, 4.5, 0.2), (8.0, 1.0, 5.0), (3.0, 1.0, 0.0)] {
                let s = DrawupState { y, z, p: 0.55 };
                let closed = c.h_value(s, th).unwrap();
                let quad = c.h_value_by_quadrature(s, th).unwrap();
                assert!((closed - quad).abs() < 1e-8 * closed.abs().max(1.0), "{closed} vs {quad}");
            }
        }
    }

    #[test]
    fn never_cancel_with_prohibitive_fee() {
        let c = DrawupContract::new(bm(), 10.0, 8.0, 100.0, 1e6, 0.01).unwrap();
        let s = DrawupState { y: 7.0, z: 2.0, p: 1.35 };
        assert_eq!(c.theta_star(s).unwrap(), ThetaStar::NeverCancel);
        assert_eq!(c.price_cancellable(s).unwrap().value, c.price_k(s).unwrap());
    }

    #[test]
    fn rejects_invalid() {
        assert!(DrawupContract::new(bm(), 5.0, 6.0, 1.0, 0.0, 0.01).is_err());
        assert!(fig5().lambda_nu(3.0, 9.0).is_err());
        assert!(fig5().h_value(DrawupState { y: 3.0, z: 1.0, p: 0.1 }, -1.0).is_err());
    }
}
