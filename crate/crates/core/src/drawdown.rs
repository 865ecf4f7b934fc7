//! Drawdown insurance: the buyer pays premium `p` continuously and receives `alpha` when the
//! drawdown first reaches `a`; the cancellable version may be terminated for a fee `c`.

use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::optimize;
use crate::scale::ScaleFn;

/// Grid size and tolerance of the cancellation-level search.
pub const THETA_SCAN: usize = 200;
pub const THETA_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawdownContract {
    pub a: f64,
    pub alpha: f64,
    pub c: f64,
    pub r: f64,
    sf: ScaleFn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawdownState {
    pub y: f64,
    pub p: f64,
}

/// Outcome of the optimal cancellation search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaStar {
    /// Cancel the first time the drawdown falls to `theta`. `at_boundary` flags a maximiser on
    /// an end of the search range rather than at a stationary point.
    Optimal { theta: f64, value: f64, at_boundary: bool },
    /// Termination never pays; hold to maturity.
    NeverCancel,
}

impl ThetaStar {
    pub fn theta(&self) -> Option<f64> {
        match *self {
            ThetaStar::Optimal { theta, .. } => Some(theta),
            ThetaStar::NeverCancel => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CancellableValue {
    pub value: f64,
    /// Value without the cancellation right.
    pub base: f64,
    /// Value of the cancellation right, never negative.
    pub option_value: f64,
    pub theta_star: ThetaStar,
}

impl DrawdownContract {
    pub fn new(model: LevyModel, a: f64, alpha: f64, c: f64, r: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidContract(format!("a must be > 0, got {a}")));
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
        Ok(DrawdownContract { a, alpha, c, r, sf: ScaleFn::new(model, r)? })
    }

    pub fn model(&self) -> &LevyModel {
        self.sf.model()
    }

    pub fn scale(&self) -> &ScaleFn {
        &self.sf
    }

    fn check_y(&self, op: &'static str, y: f64) -> Result<()> {
        if !(0.0..=self.a).contains(&y) {
            return Err(Error::domain(op, format!("drawdown y={y} outside [0, {}]", self.a)));
        }
        Ok(())
    }

    fn check_state(&self, op: &'static str, s: &DrawdownState) -> Result<()> {
        self.check_y(op, s.y)?;
        if !(s.p >= 0.0 && s.p.is_finite()) {
            return Err(Error::domain(op, format!("premium must be >= 0, got {}", s.p)));
        }
        Ok(())
    }

    /// `E_{|y}[e^{-r T_D(a)}] = Z(a-y) - r W(a-y) W(a)/W'(a)`.
    pub fn xi(&self, y: f64) -> Result<f64> {
        self.check_y("xi", y)?;
        let u = self.a - y;
        // Both terms grow with `a` and nearly cancel near y = 0.
        Ok((self.sf.z_raw(u) - self.r * self.sf.w_raw(u) / self.sf.dlog_w(self.a)).clamp(0.0, 1.0))
    }

    pub fn price_f(&self, s: DrawdownState) -> Result<f64> {
        self.check_state("price_f", &s)?;
        let q = s.p / self.r;
        Ok((q + self.alpha) * self.xi(s.y)? - q)
    }

    /// Premium rate that makes the contract worthless at inception.
    pub fn fair_premium(&self, y: f64) -> Result<f64> {
        let xi = self.xi(y)?;
        let denominator = 1.0 - xi;
        if denominator < 1e-12 {
            return Err(Error::PremiumDiverges { denominator });
        }
        Ok(self.r * self.alpha * xi / denominator)
    }

    /// Payoff from cancelling now: `-f(y, p) - c`.
    pub fn f_tilde(&self, s: DrawdownState) -> Result<f64> {
        Ok(-self.price_f(s)? - self.c)
    }

    /// Value of the right to cancel when the drawdown first falls to `theta`.
    pub fn g_value(&self, s: DrawdownState, theta: f64) -> Result<f64> {
        self.check_state("g_value", &s)?;
        if !(theta >= 0.0 && theta < self.a) {
            return Err(Error::domain("g_value", format!("theta={theta} outside [0, {})", self.a)));
        }
        if theta >= s.y {
            return self.f_tilde(s);
        }
        let at_theta = self.f_tilde(DrawdownState { y: theta, ..s })?;
        Ok(at_theta * self.sf.w_ratio(self.a - s.y, self.a - theta))
    }

    /// Whether cancelling can ever be worth more than holding, `p/r - c > (p/r + alpha) xi(0)`.
    pub fn cancellation_worthwhile(&self, p: f64) -> Result<bool> {
        let q = p / self.r;
        Ok(q - self.c > (q + self.alpha) * self.xi(0.0)?)
    }

    pub fn theta_star(&self, s: DrawdownState) -> Result<ThetaStar> {
        self.check_state("theta_star", &s)?;
        if !self.cancellation_worthwhile(s.p)? {
            return Ok(ThetaStar::NeverCancel);
        }
        let hi = s.y.min(self.a * (1.0 - 1e-12));
        let g = |t: f64| self.g_value(s, t).unwrap_or(f64::NEG_INFINITY);
        let m = optimize::maximize(g, 0.0, hi, THETA_SCAN, THETA_TOL);
        Ok(ThetaStar::Optimal { theta: m.x, value: m.value, at_boundary: m.at_boundary })
    }

    /// Value of the cancellable contract, `f + max(g(theta*), 0)`.
    pub fn price_cancellable(&self, s: DrawdownState) -> Result<CancellableValue> {
        let base = self.price_f(s)?;
        let theta_star = self.theta_star(s)?;
        let option_value = match theta_star {
            ThetaStar::Optimal { value, .. } => value.max(0.0),
            ThetaStar::NeverCancel => 0.0,
        };
        Ok(CancellableValue { value: base + option_value, base, option_value, theta_star })
    }
}
