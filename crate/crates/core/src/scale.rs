//! Closed-form scale functions `W^(r)`, `Z^(r)` and `W^(r)'` for the shipped models.

use crate::error::{Error, Result};
use crate::levy::LevyModel;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// `r = 0`, `mu = 0`: `W(u) = 2u / sigma^2`.
    BrownianLinear { s2: f64 },
    /// `W(u) = 2/(s2 xi) e^{-c u} sinh(xi u)` with `c = mu / s2`.
    Brownian { s2: f64, c: f64, xi: f64 },
    /// Double root at zero (`r = 0`, `mu rho = beta`): `W(u) = (1 + rho u) / mu`.
    JumpDouble { mu: f64, rho: f64 },
    /// `W(u) = e^{phi u}/d_phi + e^{zeta u}/d_zeta` with `d = psi'` at each root.
    Jump { phi: f64, zeta: f64, d_phi: f64, d_zeta: f64 },
}

/// Scale functions of a model at a fixed discount rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFn {
    model: LevyModel,
    r: f64,
    kind: Kind,
}

impl ScaleFn {
    pub fn new(model: LevyModel, r: f64) -> Result<Self> {
        model.validate()?;
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::domain("ScaleFn::new", format!("r must be >= 0, got {r}")));
        }
        let kind = match model {
            LevyModel::BrownianDrift { mu, sigma } => {
                let s2 = sigma * sigma;
                if r == 0.0 && mu == 0.0 {
                    Kind::BrownianLinear { s2 }
                } else {
                    Kind::Brownian { s2, c: mu / s2, xi: (mu * mu + 2.0 * r * s2).sqrt() / s2 }
                }
            }
            LevyModel::CramerLundberg { mu, rho, .. } => {
                let (phi, zeta) = model.cl_roots(r);
                if r == 0.0 && (phi - zeta).abs() <= 1e-12 * (1.0 + phi.abs()) {
                    Kind::JumpDouble { mu, rho }
                } else {
                    Kind::Jump { phi, zeta, d_phi: model.dpsi(phi), d_zeta: model.dpsi(zeta) }
                }
            }
        };
        Ok(ScaleFn { model, r, kind })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// The two roots `(Phi(r), zeta)` of `psi = r` for the jump model.
    pub fn roots(&self) -> Option<(f64, f64)> {
        match self.kind {
            Kind::Jump { phi, zeta, .. } => Some((phi, zeta)),
            Kind::JumpDouble { .. } => Some((0.0, 0.0)),
            _ => None,
        }
    }

    pub fn w(&self, u: f64) -> Result<f64> {
        check_arg("W", u, false)?;
        guard("W", u, self.w_raw(u))
    }

    pub fn z(&self, u: f64) -> Result<f64> {
        check_arg("Z", u, false)?;
        guard("Z", u, self.z_raw(u))
    }

    pub fn w_prime(&self, u: f64) -> Result<f64> {
        check_arg("W'", u, true)?;
        guard("W'", u, self.wp_raw(u))
    }

    /// `W(x) / W(y)` computed in log space; `x, y >= 0` and `y > 0`.
    pub fn w_ratio(&self, x: f64, y: f64) -> f64 {
        if x <= 0.0 && self.w_raw(0.0) == 0.0 {
            return 0.0;
        }
        (self.ln_w(x.max(0.0)) - self.ln_w(y)).exp()
    }

    pub(crate) fn ln_w(&self, u: f64) -> f64 {
        match self.kind {
            Kind::Brownian { s2, c, xi } if xi * u > 30.0 => {
                // 2 sinh(t) = e^t (1 - e^{-2t})
                -(s2 * xi).ln() + (xi - c) * u + (-(-2.0 * xi * u).exp()).ln_1p()
            }
            Kind::Jump { phi, zeta, d_phi, d_zeta } if phi * u > 30.0 => {
                phi * u + (1.0 / d_phi + ((zeta - phi) * u).exp() / d_zeta).ln()
            }
            _ => self.w_raw(u).ln(),
        }
    }

    /// `W'(u)/W(u)` minus its limit at infinity, for `u > 0`. Free of overflow and cancellation.
    pub(crate) fn dlog_w_excess(&self, u: f64) -> f64 {
        match self.kind {
            Kind::BrownianLinear { .. } => 1.0 / u,
            // xi coth(xi u) - c, minus (xi - c)
            Kind::Brownian { xi, .. } => 2.0 * xi / (2.0 * xi * u).exp_m1(),
            Kind::JumpDouble { rho, .. } => rho / (1.0 + rho * u),
            Kind::Jump { phi, zeta, d_phi, d_zeta } => {
                let e = ((zeta - phi) * u).exp() / d_zeta;
                (zeta - phi) * e / (1.0 / d_phi + e)
            }
        }
    }

    /// `W'(u)/W(u)` for `u > 0`.
    pub(crate) fn dlog_w(&self, u: f64) -> f64 {
        let limit = match self.kind {
            Kind::Brownian { c, xi, .. } => xi - c,
            Kind::Jump { phi, .. } => phi,
            _ => 0.0,
        };
        limit + self.dlog_w_excess(u)
    }

    /// `W(u)` for `u >= 0` without argument checks.
    pub(crate) fn w_raw(&self, u: f64) -> f64 {
        match self.kind {
            Kind::BrownianLinear { s2 } => 2.0 * u / s2,
            Kind::Brownian { s2, c, xi } => {
                if xi * u > 300.0 {
                    self.ln_w(u).exp()
                } else {
                    2.0 / (s2 * xi) * (-c * u).exp() * (xi * u).sinh()
                }
            }
            Kind::JumpDouble { mu, rho } => (1.0 + rho * u) / mu,
            Kind::Jump { phi, zeta, d_phi, d_zeta } => (phi * u).exp() / d_phi + (zeta * u).exp() / d_zeta,
        }
    }

    pub(crate) fn wp_raw(&self, u: f64) -> f64 {
        match self.kind {
            Kind::BrownianLinear { s2 } => 2.0 / s2,
            Kind::Brownian { s2, c, xi } => {
                2.0 / (s2 * xi) * (-c * u).exp() * (xi * (xi * u).cosh() - c * (xi * u).sinh())
            }
            Kind::JumpDouble { mu, rho } => rho / mu,
            Kind::Jump { phi, zeta, d_phi, d_zeta } => phi * (phi * u).exp() / d_phi + zeta * (zeta * u).exp() / d_zeta,
        }
    }

    pub(crate) fn z_raw(&self, u: f64) -> f64 {
        if self.r == 0.0 {
            return 1.0;
        }
        match self.kind {
            Kind::BrownianLinear { .. } | Kind::JumpDouble { .. } => 1.0,
            Kind::Brownian { c, xi, .. } => (-c * u).exp() * ((xi * u).cosh() + c / xi * (xi * u).sinh()),
            Kind::Jump { phi, zeta, d_phi, d_zeta } => {
                let r = self.r;
                1.0 + r * (phi * u).exp_m1() / (phi * d_phi) + r * (zeta * u).exp_m1() / (zeta * d_zeta)
            }
        }
    }
}

fn check_arg(op: &'static str, u: f64, strict: bool) -> Result<()> {
    let ok = if strict { u > 0.0 } else { u >= 0.0 };
    if !ok || !u.is_finite() {
        let bound = if strict { "> 0" } else { ">= 0" };
        return Err(Error::domain(op, format!("argument must be {bound} and finite, got {u}")));
    }
    Ok(())
}

fn guard(op: &'static str, u: f64, v: f64) -> Result<f64> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::Numeric(format!("{op}({u}) evaluated to {v}")));
    }
    Ok(v)
}
