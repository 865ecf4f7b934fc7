use levy_drawdown::mc::{estimate, estimate_records, simulate_first_passage, Payoff, Start, Triggers};
use levy_drawdown::{
    DrawdownContract, DrawdownState, DrawupContract, DrawupState, Error as CoreError, Regime, ThetaStar,
};
use rayon::prelude::*;

use crate::config::{parse_grid, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{Cell, Report};

pub const ANALYTIC: &str = "analytic";
pub const MC_REQUIRED: &str = "mc-required";
pub const NEVER_CANCEL: &str = "never-cancel";
pub const NO_INTERIOR_MAX: &str = "no-interior-max";

pub fn theta_tag(t: &ThetaStar) -> &'static str {
    match t {
        ThetaStar::NeverCancel => NEVER_CANCEL,
        ThetaStar::Optimal { at_boundary: true, .. } => NO_INTERIOR_MAX,
        ThetaStar::Optimal { .. } => ANALYTIC,
    }
}

enum Contract {
    Down(DrawdownContract),
    Up(DrawupContract),
}

fn build(cfg: &RunConfig) -> Result<Contract> {
    let model = cfg.levy_model()?;
    let c = &cfg.contract;
    Ok(if cfg.kind().is_drawup() {
        Contract::Up(DrawupContract::new(model, c.a, cfg.b(), c.alpha, c.c, c.r)?)
    } else {
        Contract::Down(DrawdownContract::new(model, c.a, c.alpha, c.c, c.r)?)
    })
}

fn grid_or(spec: Option<&String>, fallback: f64) -> Result<Vec<f64>> {
    match spec {
        Some(s) => parse_grid(s).map_err(CliError::Config),
        None => Ok(vec![fallback]),
    }
}

fn in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Numeric(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

fn is_mc_required(e: &CoreError) -> bool {
    matches!(e, CoreError::McRequired(_))
}

/// Monte Carlo value of the plain drawup contract, for states without a closed form.
fn simulated_k(cfg: &RunConfig, y: f64, z: f64, p: f64) -> Result<(f64, f64)> {
    let c = &cfg.contract;
    let e = estimate(
        &cfg.levy_model()?,
        &cfg.mc_config(),
        c.r,
        Triggers { a: Some(c.a), b: Some(cfg.b()), theta: None },
        Start { y, z },
        Payoff::Contract { alpha: c.alpha, p },
    )?;
    Ok((e.mean, e.std_error))
}

pub fn price(cfg: &RunConfig) -> Result<Report> {
    let mut report =
        Report::new(vec!["contract", "y", "z", "p", "value", "se", "base", "option_value", "theta_star", "regime"]);
    let kind = cfg.kind();
    let s = &cfg.state;
    let head = |z: Cell| vec![Cell::from(kind.name()), s.y.into(), z, s.p.into()];
    let row = match build(cfg)? {
        Contract::Down(dd) => {
            let st = DrawdownState { y: s.y, p: s.p };
            let mut row = head(Cell::Empty);
            if kind.is_cancellable() {
                let v = dd.price_cancellable(st)?;
                row.extend([v.value.into(), Cell::Empty, v.base.into(), v.option_value.into()]);
                row.extend([v.theta_star.theta().into(), theta_tag(&v.theta_star).into()]);
            } else {
                let f = dd.price_f(st)?;
                row.extend([f.into(), Cell::Empty, f.into(), Cell::Empty, Cell::Empty, ANALYTIC.into()]);
            }
            row
        }
        Contract::Up(du) => {
            let st = DrawupState { y: s.y, z: s.z, p: s.p };
            let mut row = head(s.z.into());
            if du.regime(s.y, s.z) == Regime::McRequired {
                let (k, se) = simulated_k(cfg, s.y, s.z, s.p)?;
                row.extend([k.into(), se.into(), k.into(), Cell::Empty, Cell::Empty, MC_REQUIRED.into()]);
            } else if kind.is_cancellable() {
                match du.price_cancellable(st) {
                    Ok(v) => {
                        row.extend([v.value.into(), Cell::Empty, v.base.into(), v.option_value.into()]);
                        row.extend([v.theta_star.theta().into(), theta_tag(&v.theta_star).into()]);
                    }
                    // The plain value is analytic but the cancellation rule visits states that are not.
                    Err(e) if is_mc_required(&e) => {
                        let k = du.price_k(st)?;
                        row.extend([Cell::Empty, Cell::Empty, k.into(), Cell::Empty, Cell::Empty, MC_REQUIRED.into()]);
                    }
                    Err(e) => return Err(e.into()),
                }
            } else {
                let k = du.price_k(st)?;
                row.extend([k.into(), Cell::Empty, k.into(), Cell::Empty, Cell::Empty, ANALYTIC.into()]);
            }
            row
        }
    };
    report.push(row);
    Ok(report)
}

struct PremiumPoint {
    p_star: Option<f64>,
    se: Option<f64>,
    diverges: bool,
    regime: &'static str,
}

fn premium_from(result: levy_drawdown::Result<f64>, regime: &'static str) -> Result<PremiumPoint> {
    match result {
        Ok(p) => Ok(PremiumPoint { p_star: Some(p), se: None, diverges: false, regime }),
        Err(CoreError::PremiumDiverges { .. }) => Ok(PremiumPoint { p_star: None, se: None, diverges: true, regime }),
        Err(e) => Err(e.into()),
    }
}

/// Fair drawup premium from simulated `(lambda, nu)`, with a delta-method standard error.
fn simulated_premium(cfg: &RunConfig, y: f64, z: f64) -> Result<PremiumPoint> {
    let c = &cfg.contract;
    let mc = cfg.mc_config();
    let recs = simulate_first_passage(
        &cfg.levy_model()?,
        &mc,
        Triggers { a: Some(c.a), b: Some(cfg.b()), theta: None },
        Start { y, z },
    )?;
    let l = estimate_records(&recs, &mc, c.r, Payoff::DrawupTransform);
    let n = estimate_records(&recs, &mc, c.r, Payoff::DrawdownTransform);
    let d = 1.0 - l.mean - n.mean;
    if d <= 0.0 {
        return Ok(PremiumPoint { p_star: None, se: None, diverges: true, regime: MC_REQUIRED });
    }
    let scale = c.r * c.alpha;
    let dn = scale * (1.0 - l.mean) / (d * d);
    let dl = scale * n.mean / (d * d);
    // Per-path indicators are exclusive, so the sample covariance is -lambda nu / N.
    let cov = -l.mean * n.mean / n.n_effective as f64;
    let var = dn * dn * n.std_error.powi(2) + dl * dl * l.std_error.powi(2) + 2.0 * dn * dl * cov;
    Ok(PremiumPoint {
        p_star: Some(scale * n.mean / d),
        se: Some(var.max(0.0).sqrt()),
        diverges: false,
        regime: MC_REQUIRED,
    })
}

pub fn fair_premium(cfg: &RunConfig) -> Result<Report> {
    let mut report = Report::new(vec!["y", "z", "p_star", "se", "diverges", "regime"]);
    let ys = grid_or(cfg.grid.y.as_ref(), cfg.state.y)?;
    let contract = build(cfg)?;
    let points: Vec<(f64, Option<f64>)> = match &contract {
        Contract::Down(_) => ys.iter().map(|&y| (y, None)).collect(),
        Contract::Up(_) => {
            let zs = grid_or(cfg.grid.z.as_ref(), cfg.state.z)?;
            ys.iter().flat_map(|&y| zs.iter().map(move |&z| (y, Some(z)))).collect()
        }
    };
    let eval = |&(y, z): &(f64, Option<f64>)| -> Result<PremiumPoint> {
        match (&contract, z) {
            (Contract::Down(dd), _) => premium_from(dd.fair_premium(y), ANALYTIC),
            (Contract::Up(du), Some(z)) if du.regime(y, z) == Regime::McRequired => simulated_premium(cfg, y, z),
            (Contract::Up(du), Some(z)) => premium_from(du.fair_premium(y, z), ANALYTIC),
            (Contract::Up(_), None) => unreachable!("drawup points carry z"),
        }
    };
    let results: Vec<Result<PremiumPoint>> = in_pool(cfg.mc.workers, || points.par_iter().map(eval).collect())?;
    for (&(y, z), res) in points.iter().zip(results) {
        let pt = res?;
        report.push(vec![
            y.into(),
            z.into(),
            pt.p_star.into(),
            pt.se.into(),
            if pt.diverges { "true" } else { "false" }.into(),
            pt.regime.into(),
        ]);
    }
    Ok(report)
}

pub fn optimal_cancel(cfg: &RunConfig) -> Result<Report> {
    let mut report = Report::new(vec!["row", "theta", "value", "regime"]);
    let kind = cfg.kind();
    if !kind.is_cancellable() {
        return Err(CliError::Config(format!(
            "contract.type: optimal-cancel needs dd-cancel or du-cancel, got {}",
            kind.name()
        )));
    }
    let s = &cfg.state;
    let a = cfg.contract.a;
    let thetas: Vec<f64> = match &cfg.grid.theta {
        Some(g) => parse_grid(g).map_err(CliError::Config)?,
        None => (0..=100).map(|i| s.y * i as f64 / 100.0).collect(),
    };
    if let Some(t) = thetas.iter().find(|t| !(**t >= 0.0 && **t < a)) {
        return Err(CliError::Config(format!("grid.theta: values must lie in [0, a), got {t}")));
    }
    let contract = build(cfg)?;
    if let Contract::Up(du) = &contract {
        if du.regime(s.y, s.z) == Regime::McRequired {
            report.push(vec!["theta_star".into(), Cell::Empty, Cell::Empty, MC_REQUIRED.into()]);
            return Ok(report);
        }
    }
    let curve = |t: f64| -> levy_drawdown::Result<f64> {
        match &contract {
            Contract::Down(dd) => dd.g_value(DrawdownState { y: s.y, p: s.p }, t),
            Contract::Up(du) => du.h_value(DrawupState { y: s.y, z: s.z, p: s.p }, t),
        }
    };
    let values: Vec<levy_drawdown::Result<f64>> =
        in_pool(cfg.mc.workers, || thetas.par_iter().map(|&t| curve(t)).collect())?;
    let star = match &contract {
        Contract::Down(dd) => dd.theta_star(DrawdownState { y: s.y, p: s.p }),
        Contract::Up(du) => du.theta_star(DrawupState { y: s.y, z: s.z, p: s.p }),
    };
    let mut mc_required = false;
    for (&t, v) in thetas.iter().zip(values) {
        match v {
            Ok(v) => report.push(vec!["curve".into(), t.into(), v.into(), ANALYTIC.into()]),
            Err(e) if is_mc_required(&e) => {
                mc_required = true;
                report.push(vec!["curve".into(), t.into(), Cell::Empty, MC_REQUIRED.into()]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    match star {
        Ok(star) => {
            let value = match star {
                ThetaStar::Optimal { value, .. } => Cell::Num(value),
                ThetaStar::NeverCancel => Cell::Empty,
            };
            report.push(vec!["theta_star".into(), star.theta().into(), value, theta_tag(&star).into()]);
        }
        Err(e) if is_mc_required(&e) || mc_required => {
            report.push(vec!["theta_star".into(), Cell::Empty, Cell::Empty, MC_REQUIRED.into()]);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}
