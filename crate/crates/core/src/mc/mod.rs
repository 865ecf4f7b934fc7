//! Monte Carlo oracle: simulated first-passage records and discounted cash-flow estimates,
//! built without reference to any closed-form scale function.

mod paths;
mod sim;

pub use paths::{check_path_logic, generate_skeleton, PathLogic, Skeleton};
pub use sim::{
    simulate_first_passage, simulate_jumps, JumpSource, Outcome, PathRecord, RandomJumps, ReplayJumps, Snapshot, Start,
    Triggers,
};

use crate::error::{Error, Result};
use crate::levy::LevyModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    /// Simulated time after which a path is censored.
    pub horizon: f64,
    /// Brownian step used close to an event level.
    pub dt: f64,
    /// Brownian step used far from every event level.
    pub dt_max: f64,
    pub seed: u64,
    pub antithetic: bool,
    /// Worker threads; 0 picks the number of available cores.
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 200_000,
            horizon: 1200.0,
            dt: 0.01,
            dt_max: 1.0,
            seed: 20_240_917,
            antithetic: false,
            workers: 0,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::domain("McConfig", m));
        if self.n_paths < 1000 {
            return bad(format!("n_paths must be >= 1000, got {}", self.n_paths));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be > 0, got {}", self.horizon));
        }
        if !(self.dt > 0.0 && self.dt_max >= self.dt) {
            return bad(format!("need 0 < dt <= dt_max, got dt={}, dt_max={}", self.dt, self.dt_max));
        }
        Ok(())
    }

    /// Number of simulated paths; antithetic runs use whole pairs.
    pub fn sample_count(&self) -> usize {
        if self.antithetic {
            self.n_paths.div_ceil(2) * 2
        } else {
            self.n_paths
        }
    }

    /// Random stream of path `i` and whether it is the reflected partner of a pair.
    pub(crate) fn stream_of(&self, i: usize) -> (u64, bool) {
        if self.antithetic {
            ((i / 2) as u64, i % 2 == 1)
        } else {
            (i as u64, false)
        }
    }

    /// Same configuration with both step sizes halved.
    pub fn refined(&self) -> Self {
        McConfig { dt: 0.5 * self.dt, dt_max: 0.5 * self.dt_max, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Independent samples behind the mean (pairs, when antithetic).
    pub n_effective: usize,
    /// Bound on the discounted payoff mass lost to censoring at the horizon.
    pub truncation_bound: f64,
    pub censored_fraction: f64,
    pub warning: Option<String>,
}

impl McEstimate {
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.mean - reference;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY * d.signum()
        }
    }
}

/// Discounted payoff functionals evaluated path by path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payoff {
    /// `e^{-rT}` on paths ending with the drawdown trigger.
    DrawdownTransform,
    /// `e^{-rT}` on paths ending with the drawup trigger.
    DrawupTransform,
    /// Premiums paid until the end, plus `alpha` if the drawdown trigger ends the path.
    Contract { alpha: f64, p: f64 },
    /// Cash flows changed by cancelling at the theta level: premiums saved after
    /// cancellation, the fee, and the indemnity forgone.
    Cancellation { alpha: f64, c: f64, p: f64 },
    /// Contract cash flows when the holder cancels at the theta level.
    CancelledContract { alpha: f64, c: f64, p: f64 },
    /// `e^{-r T_theta}` when the theta level is reached before the end; with a drawdown
    /// trigger `y + x` this is the transform restricted to `Xmin > -x`.
    ThetaTransform,
    /// `e^{-rT + u Xmin_T}` on drawup paths with `Xmax_T < v`.
    DrawupJoint { u: f64, v: f64 },
}

impl Payoff {
    fn scale(&self, r: f64) -> f64 {
        let annuity = |p: f64| if r > 0.0 { p / r } else { f64::INFINITY };
        match *self {
            Payoff::Contract { alpha, p } => alpha + annuity(p),
            Payoff::Cancellation { alpha, c, p } | Payoff::CancelledContract { alpha, c, p } => alpha + c + annuity(p),
            _ => 1.0,
        }
    }

    pub fn evaluate(&self, rec: &PathRecord, r: f64) -> f64 {
        let disc = |t: f64| (-r * t).exp();
        let annuity = |t: f64| if r > 0.0 { -(-r * t).exp_m1() / r } else { t };
        let end = rec.end.time;
        let is_dd = rec.outcome == Outcome::Drawdown;
        let indemnity = |alpha: f64| if is_dd { alpha * disc(end) } else { 0.0 };
        match *self {
            Payoff::DrawdownTransform => {
                if is_dd {
                    disc(end)
                } else {
                    0.0
                }
            }
            Payoff::DrawupTransform => {
                if rec.outcome == Outcome::Drawup {
                    disc(end)
                } else {
                    0.0
                }
            }
            Payoff::Contract { alpha, p } => -p * annuity(end) + indemnity(alpha),
            Payoff::Cancellation { alpha, c, p } => match rec.theta_hit {
                Some(h) => p * (annuity(end) - annuity(h.time)) - c * disc(h.time) - indemnity(alpha),
                None => 0.0,
            },
            Payoff::CancelledContract { alpha, c, p } => match rec.theta_hit {
                Some(h) => -p * annuity(h.time) - c * disc(h.time),
                None => -p * annuity(end) + indemnity(alpha),
            },
            Payoff::ThetaTransform => rec.theta_hit.map_or(0.0, |h| disc(h.time)),
            Payoff::DrawupJoint { u, v } => {
                if rec.outcome == Outcome::Drawup && rec.end.x_max < v {
                    (-r * end + u * rec.end.x_min).exp()
                } else {
                    0.0
                }
            }
        }
    }
}

/// Mean and standard error of `payoff` over simulated records.
pub fn estimate_records(records: &[PathRecord], cfg: &McConfig, r: f64, payoff: Payoff) -> McEstimate {
    let group = if cfg.antithetic { 2 } else { 1 };
    let (mut sum, mut sum_sq, mut n) = (0.0, 0.0, 0usize);
    for chunk in records.chunks(group) {
        let v = chunk.iter().map(|rec| payoff.evaluate(rec, r)).sum::<f64>() / chunk.len() as f64;
        sum += v;
        sum_sq += v * v;
        n += 1;
    }
    let mean = if n > 0 { sum / n as f64 } else { f64::NAN };
    let var = if n > 1 { ((sum_sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0) } else { f64::NAN };
    let std_error = (var / n as f64).sqrt();
    let censored = records.iter().filter(|r| r.outcome == Outcome::Censored).count();
    let censored_fraction = censored as f64 / records.len().max(1) as f64;
    let truncation_bound =
        if censored == 0 { 0.0 } else { censored_fraction * (-r * cfg.horizon).exp() * payoff.scale(r) };
    let warning = (truncation_bound > 0.1 * std_error)
        .then(|| format!("censoring bound {truncation_bound:.3e} exceeds 0.1 standard errors"));
    McEstimate { mean, std_error, n_effective: n, truncation_bound, censored_fraction, warning }
}

/// Simulates and estimates in one call.
pub fn estimate(
    model: &LevyModel,
    cfg: &McConfig,
    r: f64,
    triggers: Triggers,
    start: Start,
    payoff: Payoff,
) -> Result<McEstimate> {
    let records = simulate_first_passage(model, cfg, triggers, start)?;
    Ok(estimate_records(&records, cfg, r, payoff))
}

/// Records for the two-sided exit of `X` from `[0, a]` started at `x`: the upper exit is
/// reported as [`Outcome::Drawup`] and the lower exit as [`Outcome::Drawdown`].
///
/// With the historical maximum pinned at `a - x` and the historical minimum at `-x`, a
/// drawdown of size `a` or a drawup of size `a` can only occur at those two levels.
pub fn simulate_two_sided_exit(model: &LevyModel, cfg: &McConfig, x: f64, a: f64) -> Result<Vec<PathRecord>> {
    if !(x > 0.0 && x < a) {
        return Err(Error::domain("simulate_two_sided_exit", format!("need 0 < x < a, got x={x}, a={a}")));
    }
    let triggers = Triggers { a: Some(a), b: Some(a), theta: None };
    simulate_first_passage(model, cfg, triggers, Start { y: a - x, z: x })
}
