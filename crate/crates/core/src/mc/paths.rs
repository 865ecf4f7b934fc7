//! Level-crossing functionals of exact jump-model paths, computed directly from `X` without the
//! drawdown/drawup state machine of the simulator. Used to check the simulator's event logic.

use super::sim::{path_rng, simulate_jumps, JumpSource, Outcome, RandomJumps, ReplayJumps, Start, Triggers};
use crate::error::{Error, Result};
use crate::levy::LevyModel;

/// A fixed jump-model path: linear rise at `mu` between listed jumps, observed up to `horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub mu: f64,
    pub jumps: Vec<(f64, f64)>,
    pub horizon: f64,
}

pub fn generate_skeleton(model: &LevyModel, seed: u64, stream: u64, horizon: f64) -> Result<Skeleton> {
    let LevyModel::CramerLundberg { mu, beta, rho } = *model else {
        return Err(Error::domain("generate_skeleton", "only jump models have exact skeletons"));
    };
    let mut src = RandomJumps::new(path_rng(seed, stream), beta, rho, false);
    let mut jumps = Vec::new();
    let mut t = 0.0;
    while t <= horizon {
        match src.next_jump() {
            Some(j) => {
                t += j.0;
                jumps.push(j);
            }
            None => break,
        }
    }
    Ok(Skeleton { mu, jumps, horizon })
}

/// Crossing of a level during a rise: time and extremes of `X` up to that time.
#[derive(Debug, Clone, Copy)]
struct Crossing {
    time: f64,
    x_min: f64,
    x_max: f64,
}

impl Skeleton {
    /// Walks rising segments; `level(x_min)` gives the target while rising. Returns the first
    /// time `X` reaches the target.
    fn first_rise_to(&self, level: impl Fn(f64) -> f64) -> Option<Crossing> {
        let (mut t, mut x, mut x_min, mut x_max) = (0.0, 0.0f64, 0.0f64, 0.0f64);
        let mut jumps = self.jumps.iter();
        loop {
            let target = level(x_min);
            if x >= target {
                return Some(Crossing { time: t, x_min, x_max: x_max.max(x) });
            }
            let (wait, size) = jumps.next().copied().unwrap_or((f64::INFINITY, 0.0));
            let hit = t + (target - x) / self.mu;
            if hit <= t + wait {
                return (hit <= self.horizon).then_some(Crossing { time: hit, x_min, x_max: x_max.max(target) });
            }
            t += wait;
            if t > self.horizon {
                return None;
            }
            x += self.mu * wait;
            x_max = x_max.max(x);
            x -= size;
            x_min = x_min.min(x);
        }
    }

    /// First time `X >= level`.
    fn first_above(&self, level: f64) -> Option<Crossing> {
        self.first_rise_to(|_| level)
    }

    /// First time `X <= level`; downward crossings happen only at jumps.
    fn first_below(&self, level: f64) -> Option<f64> {
        if 0.0 <= level {
            return Some(0.0);
        }
        let (mut t, mut x) = (0.0, 0.0);
        for &(wait, size) in &self.jumps {
            t += wait;
            if t > self.horizon {
                return None;
            }
            x += self.mu * wait - size;
            if x <= level {
                return Some(t);
            }
        }
        None
    }
}

/// Left- and right-hand indicators of each event identity on one path; `None` when the path
/// is too short to decide.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathLogic {
    /// Drawup before drawdown.
    pub drawup_first: Option<(bool, bool)>,
    /// Drawdown before drawup.
    pub drawdown_first: Option<(bool, bool)>,
    /// Drawdown falls to theta before either trigger.
    pub theta_first: Option<(bool, bool)>,
}

impl PathLogic {
    pub fn violations(&self) -> usize {
        [self.drawup_first, self.drawdown_first, self.theta_first]
            .iter()
            .filter(|c| matches!(c, Some((l, r)) if l != r))
            .count()
    }
}

/// Compares the simulator's events with their descriptions through levels of `X`:
///
/// * drawup first iff `X` exits `((y-a) v (-z), b-z)` upwards, or at the drawup time the
///   minimum is at most `-z` and `max(Xmax, y) - Xmin < a`;
/// * drawdown first iff `y - a >= -z` and `X` exits `(y-a, b-z)` downwards, or `y - a < -z`
///   and at the drawup time the minimum is at most `-z`, `max(Xmax, y) - Xmin >= a` and
///   `Xmax <= b - z`;
/// * theta first iff at the first passage of `X` above `y - theta` the minimum exceeds
///   `y - a` and `min(Xmin, -z) > y - theta - b`.
pub fn check_path_logic(sk: &Skeleton, a: f64, b: f64, start: Start, theta: f64) -> PathLogic {
    let Start { y, z } = start;
    let rec = simulate_jumps(
        sk.mu,
        &mut ReplayJumps::new(&sk.jumps),
        sk.horizon,
        &Triggers { a: Some(a), b: Some(b), theta: Some(theta) },
        &start,
    );
    let mut out = PathLogic::default();

    let t = |c: Option<f64>| c.unwrap_or(f64::INFINITY);
    let up_exit = t(sk.first_above(b - z).map(|c| c.time));
    if let (Some(du), true) = (sk.first_rise_to(|m| m.min(-z) + b), rec.outcome != Outcome::Censored) {
        let range = du.x_max.max(y) - du.x_min;
        let low = du.x_min <= -z;
        let first = up_exit < t(sk.first_below((y - a).max(-z))) || (range < a && low);
        let second = (y - a >= -z && t(sk.first_below(y - a)) < up_exit)
            || (y - a < -z && range >= a && low && du.x_max <= b - z);
        out.drawup_first = Some((rec.outcome == Outcome::Drawup, first));
        out.drawdown_first = Some((rec.outcome == Outcome::Drawdown, second));
    }

    let lhs = rec.theta_hit.is_some();
    if lhs || rec.outcome != Outcome::Censored {
        let rhs =
            theta < y && sk.first_above(y - theta).is_some_and(|c| c.x_min > y - a && c.x_min.min(-z) > y - theta - b);
        out.theta_first = Some((lhs, rhs));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossings_on_a_hand_path() {
        // Rise 1 over [0, 10], drop 3, rise 1 over [10, 20], drop 3, then rise.
        let sk = Skeleton { mu: 0.1, jumps: vec![(10.0, 3.0), (10.0, 3.0)], horizon: 100.0 };
        assert!((sk.first_above(0.5).unwrap().time - 5.0).abs() < 1e-12);
        assert_eq!(sk.first_below(-1.5), Some(10.0));
        assert_eq!(sk.first_below(-3.5), Some(20.0));
        let c = sk.first_above(1.5).unwrap();
        assert!((c.time - 20.0 - 55.0).abs() < 1e-9 && (c.x_min + 4.0).abs() < 1e-12);
    }

    #[test]
    fn hand_path_logic() {
        let sk = Skeleton { mu: 0.1, jumps: vec![(10.0, 3.0), (10.0, 3.0)], horizon: 1000.0 };
        let logic = check_path_logic(&sk, 5.0, 3.0, Start { y: 1.0, z: 0.5 }, 0.2);
        assert_eq!(logic.violations(), 0);
        assert_eq!(logic.drawup_first, Some((false, false)));
        assert_eq!(logic.drawdown_first, Some((true, true)));
    }
}
