//! Path simulation of `X` with drawdown, drawup and cancellation-level bookkeeping.
//!
//! Coordinates: `X_0 = 0`, historical maximum `y` and historical minimum `-z`, so
//! `D = max(y, Xmax) - X` and `U = X - min(-z, Xmin)`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::McConfig;
use crate::error::{Error, Result};
use crate::levy::LevyModel;

/// Event levels. `None` disables an event.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Triggers {
    /// Drawdown size that ends the path.
    pub a: Option<f64>,
    /// Drawup size that ends the path.
    pub b: Option<f64>,
    /// Drawdown level whose first downward passage is recorded; the path continues.
    pub theta: Option<f64>,
}

/// Initial drawdown `y` and drawup `z`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Start {
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub x: f64,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Drawdown,
    Drawup,
    Censored,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRecord {
    /// First time the drawdown fell to `theta`, if that happened strictly before the end.
    pub theta_hit: Option<Snapshot>,
    pub outcome: Outcome,
    pub end: Snapshot,
}

/// Supplies `(waiting time, jump size)` pairs; `None` means no further jumps.
pub trait JumpSource {
    fn next_jump(&mut self) -> Option<(f64, f64)>;
}

/// Exponential waiting times and jump sizes by inversion, optionally antithetic.
pub struct RandomJumps<R> {
    rng: R,
    beta: f64,
    rho: f64,
    flip: bool,
}

impl<R: RngCore> RandomJumps<R> {
    pub fn new(rng: R, beta: f64, rho: f64, flip: bool) -> Self {
        RandomJumps { rng, beta, rho, flip }
    }
}

impl<R: RngCore> JumpSource for RandomJumps<R> {
    fn next_jump(&mut self) -> Option<(f64, f64)> {
        if self.beta == 0.0 {
            return None;
        }
        let u1 = open_uniform(&mut self.rng, self.flip);
        let u2 = open_uniform(&mut self.rng, self.flip);
        Some((-u1.ln() / self.beta, -u2.ln() / self.rho))
    }
}

/// Replays a fixed list of jumps.
pub struct ReplayJumps<'a> {
    jumps: std::slice::Iter<'a, (f64, f64)>,
}

impl<'a> ReplayJumps<'a> {
    pub fn new(jumps: &'a [(f64, f64)]) -> Self {
        ReplayJumps { jumps: jumps.iter() }
    }
}

impl JumpSource for ReplayJumps<'_> {
    fn next_jump(&mut self) -> Option<(f64, f64)> {
        self.jumps.next().copied()
    }
}

/// Uniform on the open interval (0, 1), reflected to `1 - u` for the antithetic partner.
pub(crate) fn open_uniform<R: RngCore>(rng: &mut R, flip: bool) -> f64 {
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    if flip {
        1.0 - u
    } else {
        u
    }
}

pub(crate) fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn validate(triggers: &Triggers, start: &Start, cfg: &McConfig) -> Result<()> {
    let bad = |m: String| Err(Error::domain("simulate_first_passage", m));
    if !(start.y >= 0.0 && start.z >= 0.0) {
        return bad(format!("need y, z >= 0, got y={}, z={}", start.y, start.z));
    }
    if let Some(a) = triggers.a {
        if !(a > start.y) {
            return bad(format!("drawdown trigger a={a} must exceed y={}", start.y));
        }
    }
    if let Some(b) = triggers.b {
        if !(b > start.z) {
            return bad(format!("drawup trigger b={b} must exceed z={}", start.z));
        }
    }
    if let Some(t) = triggers.theta {
        if !(t >= 0.0) {
            return bad(format!("theta must be >= 0, got {t}"));
        }
    }
    cfg.validate()
}

/// Simulates `cfg.n_paths` independent paths (rounded up to an even count when antithetic).
///
/// Record `i` depends only on `(cfg.seed, i)`, so output is identical for any worker count.
pub fn simulate_first_passage(
    model: &LevyModel,
    cfg: &McConfig,
    triggers: Triggers,
    start: Start,
) -> Result<Vec<PathRecord>> {
    model.validate()?;
    validate(&triggers, &start, cfg)?;
    let n = cfg.sample_count();
    let run = || -> Vec<PathRecord> {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let (stream, flip) = cfg.stream_of(i);
                let mut rng = path_rng(cfg.seed, stream);
                simulate_path(model, cfg, &triggers, &start, &mut rng, flip)
            })
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    Ok(pool.install(run))
}

pub(crate) fn simulate_path<R: RngCore>(
    model: &LevyModel,
    cfg: &McConfig,
    triggers: &Triggers,
    start: &Start,
    rng: &mut R,
    flip: bool,
) -> PathRecord {
    match *model {
        LevyModel::BrownianDrift { mu, sigma } => simulate_brownian(mu, sigma, cfg, triggers, start, rng, flip),
        LevyModel::CramerLundberg { mu, beta, rho } => {
            let mut src = RandomJumps::new(rng, beta, rho, flip);
            simulate_jumps(mu, &mut src, cfg.horizon, triggers, start)
        }
    }
}

struct Book {
    x: f64,
    x_min: f64,
    x_max: f64,
    y: f64,
    z: f64,
    theta_hit: Option<Snapshot>,
}

impl Book {
    fn new(start: &Start) -> Self {
        Book { x: 0.0, x_min: 0.0, x_max: 0.0, y: start.y, z: start.z, theta_hit: None }
    }
    fn top(&self) -> f64 {
        self.x_max.max(self.y)
    }
    fn bottom(&self) -> f64 {
        self.x_min.min(-self.z)
    }
    fn snap(&self, time: f64, x: f64) -> Snapshot {
        Snapshot { time, x, x_min: self.x_min.min(x), x_max: self.x_max.max(x) }
    }
    /// Handles events that are already in force at time zero.
    fn initial(&mut self, t: &Triggers) -> Option<PathRecord> {
        if let Some(th) = t.theta {
            if self.y <= th {
                self.theta_hit = Some(self.snap(0.0, 0.0));
            }
        }
        let outcome = if t.a.is_some_and(|a| self.y >= a) {
            Outcome::Drawdown
        } else if t.b.is_some_and(|b| self.z >= b) {
            Outcome::Drawup
        } else {
            return None;
        };
        Some(PathRecord { theta_hit: None, outcome, end: self.snap(0.0, 0.0) })
    }
}

/// Brownian paths on an adaptive grid. Each step samples the exact conditional maximum and
/// minimum of the Brownian bridge between its endpoints, so fixed-level crossings inside a
/// step are not missed. The step shrinks to `cfg.dt` near any active level and grows to
/// `cfg.dt_max` far from all of them.
fn simulate_brownian<R: RngCore>(
    mu: f64,
    sigma: f64,
    cfg: &McConfig,
    trig: &Triggers,
    start: &Start,
    rng: &mut R,
    flip: bool,
) -> PathRecord {
    const SPREAD: f64 = 5.0;
    let mut book = Book::new(start);
    if let Some(rec) = book.initial(trig) {
        return rec;
    }
    let sign = if flip { -1.0 } else { 1.0 };
    let mut t = 0.0;
    while t < cfg.horizon {
        let mut dist = f64::INFINITY;
        if let Some(a) = trig.a {
            dist = dist.min(a - (book.top() - book.x));
        }
        if let Some(b) = trig.b {
            dist = dist.min(b - (book.x - book.bottom()));
        }
        if let (Some(th), None) = (trig.theta, book.theta_hit) {
            dist = dist.min(book.top() - th - book.x);
        }
        let mut dt = (dist / (SPREAD * sigma)).powi(2);
        if mu != 0.0 {
            dt = dt.min(0.5 * dist / mu.abs());
        }
        let dt = dt.clamp(cfg.dt, cfg.dt_max).min(cfg.horizon - t);
        let s = sigma * dt.sqrt();
        let normal: f64 = rng.sample(StandardNormal);
        let x0 = book.x;
        let x1 = x0 + mu * dt + sign * s * normal;
        let d2 = (x1 - x0) * (x1 - x0);
        let hi = 0.5 * (x0 + x1 + (d2 - 2.0 * s * s * open_uniform(rng, flip).ln()).sqrt());
        let lo = 0.5 * (x0 + x1 - (d2 - 2.0 * s * s * open_uniform(rng, flip).ln()).sqrt());
        let t_event = t + 0.5 * dt;
        let down = trig.a.filter(|&a| lo <= book.top() - a).map(|a| book.top() - a);
        let up = trig.b.filter(|&b| hi >= book.bottom() + b).map(|b| book.bottom() + b);
        // A drawdown in the same step wins over a drawup, and any end wins over the theta level.
        if down.is_none() && up.is_none() && book.theta_hit.is_none() {
            if let Some(th) = trig.theta {
                let level = book.top() - th;
                if hi >= level {
                    book.x_min = book.x_min.min(lo);
                    book.theta_hit = Some(book.snap(t_event, level));
                }
            }
        }
        if let Some(level) = down {
            return PathRecord {
                theta_hit: book.theta_hit,
                outcome: Outcome::Drawdown,
                end: book.snap(t_event, level),
            };
        }
        if let Some(level) = up {
            return PathRecord { theta_hit: book.theta_hit, outcome: Outcome::Drawup, end: book.snap(t_event, level) };
        }
        book.x_max = book.x_max.max(hi);
        book.x_min = book.x_min.min(lo);
        book.x = x1;
        t += dt;
    }
    let end = book.snap(cfg.horizon, book.x);
    PathRecord { theta_hit: book.theta_hit, outcome: Outcome::Censored, end }
}

/// Exact simulation of `X_t = mu t - jumps`. Between jumps the path rises linearly, so upward
/// level crossings are solved in closed form; the drawdown can only reach `a` at a jump.
pub fn simulate_jumps<S: JumpSource + ?Sized>(
    mu: f64,
    src: &mut S,
    horizon: f64,
    trig: &Triggers,
    start: &Start,
) -> PathRecord {
    let mut book = Book::new(start);
    if let Some(rec) = book.initial(trig) {
        return rec;
    }
    let mut t = 0.0;
    loop {
        let (wait, size) = src.next_jump().unwrap_or((f64::INFINITY, 0.0));
        let t_jump = t + wait;
        let limit = t_jump.min(horizon);
        let t_up = trig.b.map_or(f64::INFINITY, |b| t + (book.bottom() + b - book.x) / mu);
        if let (Some(th), None) = (trig.theta, book.theta_hit) {
            let level = book.top() - th;
            let t_th = t + (level - book.x) / mu;
            if t_th < t_up && t_th < limit {
                book.theta_hit = Some(book.snap(t_th, level));
            }
        }
        if t_up < t_jump && t_up <= horizon {
            let level = book.bottom() + trig.b.unwrap_or(0.0);
            return PathRecord { theta_hit: book.theta_hit, outcome: Outcome::Drawup, end: book.snap(t_up, level) };
        }
        if t_jump >= horizon {
            let x = book.x + mu * (horizon - t);
            let end = book.snap(horizon, x);
            return PathRecord { theta_hit: book.theta_hit, outcome: Outcome::Censored, end };
        }
        book.x += mu * wait;
        book.x_max = book.x_max.max(book.x);
        book.x -= size;
        book.x_min = book.x_min.min(book.x);
        t = t_jump;
        if trig.a.is_some_and(|a| book.top() - book.x >= a) {
            return PathRecord { theta_hit: book.theta_hit, outcome: Outcome::Drawdown, end: book.snap(t, book.x) };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> McConfig {
        McConfig { n_paths: 2000, horizon: 200.0, ..McConfig::default() }
    }

    #[test]
    fn jumpless_drift_hits_theta_exactly() {
        let m = LevyModel::cramer_lundberg(0.5, 0.0, 1.0).unwrap();
        let trig = Triggers { a: Some(9.0), b: None, theta: Some(2.0) };
        let recs = simulate_first_passage(&m, &cfg(), trig, Start { y: 7.0, z: 0.0 }).unwrap();
        for r in recs {
            let hit = r.theta_hit.unwrap();
            assert!((hit.time - 10.0).abs() < 1e-12);
            assert_eq!(r.outcome, Outcome::Censored);
        }
    }

    #[test]
    fn drawdown_and_drawup_stay_in_range() {
        let trig = Triggers { a: Some(3.0), b: Some(2.0), theta: Some(0.5) };
        let start = Start { y: 1.0, z: 0.5 };
        for m in [LevyModel::brownian(0.03, 0.4).unwrap(), LevyModel::cramer_lundberg(0.05, 0.1, 2.5).unwrap()] {
            for r in simulate_first_passage(&m, &cfg(), trig, start).unwrap() {
                let e = r.end;
                let d = e.x_max.max(start.y) - e.x;
                let u = e.x - e.x_min.min(-start.z);
                assert!(d >= -1e-12 && u >= -1e-12);
                match r.outcome {
                    Outcome::Drawdown => assert!(d >= 3.0 - 1e-9),
                    Outcome::Drawup => assert!((u - 2.0).abs() < 1e-9 && d < 3.0),
                    Outcome::Censored => assert!(d < 3.0 && u < 2.0),
                }
                if let Some(h) = r.theta_hit {
                    assert!(h.time <= e.time);
                    assert!((h.x_max.max(start.y) - h.x - 0.5).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn replay_reproduces_random_source() {
        let mut rng = path_rng(7, 3);
        let jumps: Vec<(f64, f64)> = {
            let mut src = RandomJumps::new(&mut rng, 0.1, 2.5, false);
            (0..200).map(|_| src.next_jump().unwrap()).collect()
        };
        let trig = Triggers { a: Some(2.0), b: Some(1.5), theta: Some(0.3) };
        let start = Start { y: 1.0, z: 0.2 };
        let mut rng = path_rng(7, 3);
        let a = simulate_jumps(0.05, &mut RandomJumps::new(&mut rng, 0.1, 2.5, false), 1e4, &trig, &start);
        let b = simulate_jumps(0.05, &mut ReplayJumps::new(&jumps), 1e4, &trig, &start);
        assert_eq!(a, b);
    }

    #[test]
    fn worker_count_does_not_change_records() {
        let m = LevyModel::brownian(0.03, 0.4).unwrap();
        let trig = Triggers { a: Some(2.0), b: Some(1.0), theta: None };
        let one = McConfig { workers: 1, ..cfg() };
        let four = McConfig { workers: 4, ..cfg() };
        let start = Start { y: 0.5, z: 0.5 };
        assert_eq!(
            simulate_first_passage(&m, &one, trig, start).unwrap(),
            simulate_first_passage(&m, &four, trig, start).unwrap()
        );
    }

    #[test]
    fn rejects_started_events() {
        let m = LevyModel::brownian(0.03, 0.4).unwrap();
        let trig = Triggers { a: Some(1.0), ..Triggers::default() };
        assert!(simulate_first_passage(&m, &cfg(), trig, Start { y: 2.0, z: 0.0 }).is_err());
    }
}
