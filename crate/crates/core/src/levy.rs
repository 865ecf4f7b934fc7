//! Spectrally negative Lévy models and their Laplace exponents.

use crate::error::{Error, Result};

/// A spectrally negative Lévy process with `X_0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevyModel {
    /// `X_t = mu t + sigma B_t`.
    BrownianDrift { mu: f64, sigma: f64 },
    /// `X_t = mu t - sum of Exp(rho) jumps` arriving at Poisson rate `beta`.
    CramerLundberg { mu: f64, beta: f64, rho: f64 },
}

impl LevyModel {
    pub fn brownian(mu: f64, sigma: f64) -> Result<Self> {
        let m = LevyModel::BrownianDrift { mu, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn cramer_lundberg(mu: f64, beta: f64, rho: f64) -> Result<Self> {
        let m = LevyModel::CramerLundberg { mu, beta, rho };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LevyModel::BrownianDrift { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::InvalidModel(format!("mu must be finite, got {mu}")));
                }
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidModel(format!("sigma must be > 0, got {sigma}")));
                }
            }
            LevyModel::CramerLundberg { mu, beta, rho } => {
                if !(mu > 0.0 && mu.is_finite()) {
                    return Err(Error::InvalidModel(format!("mu must be > 0, got {mu}")));
                }
                if !(beta >= 0.0 && beta.is_finite()) {
                    return Err(Error::InvalidModel(format!("beta must be >= 0, got {beta}")));
                }
                if !(rho > 0.0 && rho.is_finite()) {
                    return Err(Error::InvalidModel(format!("rho must be > 0, got {rho}")));
                }
            }
        }
        Ok(())
    }

    /// `psi(phi) = log E[exp(phi X_1)]` for `phi >= 0`.
    pub fn laplace_exponent(&self, phi: f64) -> Result<f64> {
        if !(phi >= 0.0) {
            return Err(Error::domain("laplace_exponent", format!("phi must be >= 0, got {phi}")));
        }
        Ok(self.psi(phi))
    }

    /// Derivative of the Laplace exponent for `phi >= 0`.
    pub fn psi_prime(&self, phi: f64) -> Result<f64> {
        if !(phi >= 0.0) {
            return Err(Error::domain("psi_prime", format!("phi must be >= 0, got {phi}")));
        }
        Ok(self.dpsi(phi))
    }

    /// Right inverse `Phi(r) = sup{phi >= 0 : psi(phi) = r}`.
    pub fn phi_inverse(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::domain("phi_inverse", format!("r must be >= 0, got {r}")));
        }
        Ok(match *self {
            LevyModel::BrownianDrift { mu, sigma } => {
                let s2 = sigma * sigma;
                // Rationalised form of (-mu + sqrt(mu^2 + 2 r s2)) / s2, stable for mu > 0.
                let disc = (mu * mu + 2.0 * r * s2).sqrt();
                if mu > 0.0 {
                    2.0 * r / (mu + disc)
                } else {
                    (disc - mu) / s2
                }
            }
            LevyModel::CramerLundberg { .. } => self.cl_roots(r).0,
        })
    }

    /// Both roots of `psi(phi) = r` for the Cramér–Lundberg model as `(Phi(r), zeta)`.
    pub(crate) fn cl_roots(&self, r: f64) -> (f64, f64) {
        let LevyModel::CramerLundberg { mu, beta, rho } = *self else {
            unreachable!("cl_roots on a non Cramér–Lundberg model")
        };
        // mu phi^2 + (mu rho - beta - r) phi - r rho = 0
        let bq = beta + r - mu * rho;
        let disc = (bq * bq + 4.0 * r * mu * rho).sqrt();
        let big = (bq + disc) / (2.0 * mu);
        let small = (bq - disc) / (2.0 * mu);
        // Product of roots is -r rho / mu; use it to avoid cancellation in the smaller root.
        if bq >= 0.0 {
            let small = if big > 0.0 { -r * rho / (mu * big) } else { small };
            (big, small)
        } else {
            let big = if small < 0.0 { -r * rho / (mu * small) } else { big };
            (big, small)
        }
    }

    /// Generic bisection for `Phi(r)` on `[Phi(0), upper]`, with the upper bracket grown geometrically.
    pub fn phi_inverse_bisection(&self, r: f64, tol: f64) -> Result<f64> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::domain("phi_inverse_bisection", format!("r must be >= 0, got {r}")));
        }
        // psi is convex with psi(0) = 0; its largest zero is to the right of the minimiser.
        let mut lo = self.argmin_psi();
        let mut hi = lo.max(1.0);
        let mut grow = 0;
        while self.psi(hi) < r {
            hi *= 2.0;
            grow += 1;
            if grow > 200 {
                return Err(Error::Numeric("phi_inverse_bisection: bracket did not close".into()));
            }
        }
        if r == 0.0 && self.psi(lo) >= 0.0 {
            return Ok(lo);
        }
        while hi - lo > tol * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if self.psi(mid) < r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn argmin_psi(&self) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        if self.dpsi(0.0) >= 0.0 {
            return 0.0;
        }
        while self.dpsi(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.dpsi(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Expected increment per unit time, `psi'(0)`.
    pub fn mean_drift(&self) -> f64 {
        self.dpsi(0.0)
    }

    /// Returns the Brownian model with drift negated, i.e. the law of `-X`.
    pub fn negated_brownian(&self) -> Option<LevyModel> {
        match *self {
            LevyModel::BrownianDrift { mu, sigma } => Some(LevyModel::BrownianDrift { mu: -mu, sigma }),
            LevyModel::CramerLundberg { .. } => None,
        }
    }

    /// Unchecked `psi`, also valid for `phi > -rho` in the jump model.
    pub(crate) fn psi(&self, phi: f64) -> f64 {
        match *self {
            LevyModel::BrownianDrift { mu, sigma } => mu * phi + 0.5 * sigma * sigma * phi * phi,
            LevyModel::CramerLundberg { mu, beta, rho } => mu * phi - beta * phi / (rho + phi),
        }
    }

    pub(crate) fn dpsi(&self, phi: f64) -> f64 {
        match *self {
            LevyModel::BrownianDrift { mu, sigma } => mu + sigma * sigma * phi,
            LevyModel::CramerLundberg { mu, beta, rho } => {
                let d = rho + phi;
                mu - beta * rho / (d * d)
            }
        }
    }
}
