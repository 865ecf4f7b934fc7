//! Built-in analytic-versus-simulation matrix.

use levy_drawdown::mc::{estimate_records, simulate_first_passage, McConfig, Payoff, Start, Triggers};
use levy_drawdown::{
    DrawdownContract, DrawdownState, DrawupContract, DrawupState, Error as CoreError, LevyModel, ThetaStar,
};

use crate::error::Result;
use crate::output::{Cell, Report};

const R: f64 = 0.01;
const A: f64 = 10.0;
const ALPHA: f64 = 100.0;
const FEE: f64 = 50.0;

/// One simulated configuration and the quantities read off its paths.
pub struct Scenario {
    pub model_name: &'static str,
    pub model: LevyModel,
    pub point: String,
    pub triggers: Triggers,
    pub start: Start,
    /// `(quantity, analytic value or None when only simulation is available, payoff)`.
    pub quantities: Vec<(&'static str, Option<f64>, Payoff)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: &'static str,
    pub model: &'static str,
    pub point: String,
    pub analytic: Option<f64>,
    pub mean: f64,
    pub se: f64,
    pub n: usize,
    pub truncation_bound: f64,
    pub abs_z: Option<f64>,
}

fn bm() -> LevyModel {
    LevyModel::brownian(0.03, 0.4).expect("valid model")
}

fn cl() -> LevyModel {
    LevyModel::cramer_lundberg(0.05, 0.1, 2.5).expect("valid model")
}

fn cl_drawup() -> LevyModel {
    LevyModel::cramer_lundberg(0.04, 0.1, 2.5).expect("valid model")
}

fn analytic(v: levy_drawdown::Result<f64>) -> Result<Option<f64>> {
    match v {
        Ok(v) => Ok(Some(v)),
        Err(CoreError::McRequired(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn drawdown_scenarios(
    name: &'static str,
    model: LevyModel,
    p: f64,
    ys: [f64; 3],
    cancel_ys: [f64; 3],
) -> Result<Vec<Scenario>> {
    let c = DrawdownContract::new(model, A, ALPHA, FEE, R)?;
    let mut out = Vec::new();
    for y in ys {
        let s = DrawdownState { y, p };
        out.push(Scenario {
            model_name: name,
            model,
            point: format!("a={A} y={y} p={p}"),
            triggers: Triggers { a: Some(A), ..Triggers::default() },
            start: Start { y, z: 0.0 },
            quantities: vec![
                ("xi", Some(c.xi(y)?), Payoff::DrawdownTransform),
                ("f", Some(c.price_f(s)?), Payoff::Contract { alpha: ALPHA, p }),
            ],
        });
    }
    for y in cancel_ys {
        let s = DrawdownState { y, p };
        if let ThetaStar::Optimal { theta, value, .. } = c.theta_star(s)? {
            out.push(Scenario {
                model_name: name,
                model,
                point: format!("a={A} y={y} p={p} theta*={theta:.4}"),
                triggers: Triggers { a: Some(A), b: None, theta: Some(theta) },
                start: Start { y, z: 0.0 },
                quantities: vec![("g(theta*)", Some(value), Payoff::Cancellation { alpha: ALPHA, c: FEE, p })],
            });
        }
    }
    Ok(out)
}

fn drawup_scenarios(
    name: &'static str,
    model: LevyModel,
    p: f64,
    points: &[(f64, f64, f64)],
    cancel_points: &[(f64, f64, f64)],
) -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    for &(b, y, z) in points {
        let c = DrawupContract::new(model, A, b, ALPHA, FEE, R)?;
        let s = DrawupState { y, z, p };
        let (lambda, nu) = match c.lambda_nu(y, z) {
            Ok((l, n)) => (Some(l), Some(n)),
            Err(CoreError::McRequired(_)) => (None, None),
            Err(e) => return Err(e.into()),
        };
        let triggers = Triggers { a: Some(A), b: Some(b), theta: None };
        out.push(Scenario {
            model_name: name,
            model,
            point: format!("a={A} b={b} y={y} z={z} p={p}"),
            triggers,
            start: Start { y, z },
            quantities: vec![
                ("lambda", lambda, Payoff::DrawupTransform),
                ("nu", nu, Payoff::DrawdownTransform),
                ("k", analytic(c.price_k(s))?, Payoff::Contract { alpha: ALPHA, p }),
            ],
        });
    }
    for &(b, y, z) in cancel_points {
        let c = DrawupContract::new(model, A, b, ALPHA, FEE, R)?;
        if let ThetaStar::Optimal { theta, value, .. } = c.theta_star(DrawupState { y, z, p })? {
            out.push(Scenario {
                model_name: name,
                model,
                point: format!("a={A} b={b} y={y} z={z} p={p} theta*={theta:.4}"),
                triggers: Triggers { a: Some(A), b: Some(b), theta: Some(theta) },
                start: Start { y, z },
                quantities: vec![("h(theta*)", Some(value), Payoff::Cancellation { alpha: ALPHA, c: FEE, p })],
            });
        }
    }
    Ok(out)
}

/// The default matrix: three or more points per quantity and model wherever a closed form exists,
/// plus a jump-model drawup point that only simulation covers.
pub fn matrix() -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    out.extend(drawdown_scenarios("bm", bm(), 0.55, [3.0, 7.0, 9.0], [5.0, 7.0, 9.0])?);
    out.extend(drawdown_scenarios("cl", cl(), 0.51, [3.0, 8.0, 9.5], [5.0, 8.0, 9.5])?);
    out.extend(drawup_scenarios(
        "bm",
        bm(),
        1.35,
        &[(8.0, 7.0, 2.0), (8.0, 3.0, 4.0), (8.0, 6.0, 5.0), (A, 4.0, 3.0)],
        &[(8.0, 7.0, 2.0), (8.0, 8.0, 1.0), (A, 7.0, 1.0)],
    )?);
    out.extend(drawup_scenarios(
        "cl",
        cl_drawup(),
        0.55,
        &[(A, 6.0, 4.0), (A, 3.0, 2.0), (A, 8.0, 1.0), (8.0, 7.0, 4.0), (8.0, 3.0, 2.0)],
        &[(A, 6.0, 4.0), (A, 7.0, 2.0), (A, 5.0, 4.0)],
    )?);
    Ok(out)
}

/// Simulates every scenario; scenario `i` uses root seed `cfg.seed + i`.
pub fn run(cfg: &McConfig) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (i, sc) in matrix()?.into_iter().enumerate() {
        let mc = McConfig { seed: cfg.seed.wrapping_add(i as u64), ..*cfg };
        let recs = simulate_first_passage(&sc.model, &mc, sc.triggers, sc.start)?;
        for (quantity, value, payoff) in sc.quantities {
            let e = estimate_records(&recs, &mc, R, payoff);
            rows.push(Row {
                quantity,
                model: sc.model_name,
                point: sc.point.clone(),
                analytic: value,
                mean: e.mean,
                se: e.std_error,
                n: e.n_effective,
                truncation_bound: e.truncation_bound,
                abs_z: value.map(|v| e.z_score(v).abs()),
            });
        }
    }
    Ok(rows)
}

pub fn report(rows: &[Row]) -> Report {
    let mut report = Report::new(vec![
        "quantity",
        "model",
        "point",
        "analytic",
        "mc_mean",
        "mc_se",
        "n",
        "truncation_bound",
        "abs_z",
    ]);
    for r in rows {
        report.push(vec![
            r.quantity.into(),
            r.model.into(),
            r.point.clone().into(),
            r.analytic.into(),
            r.mean.into(),
            r.se.into(),
            r.n.into(),
            r.truncation_bound.into(),
            r.abs_z.map_or(Cell::Empty, Cell::Num),
        ]);
    }
    report
}

/// Number of rows whose analytic value lies 3 or more standard errors from the simulation.
pub fn breaches(rows: &[Row]) -> usize {
    rows.iter().filter(|r| r.abs_z.is_some_and(|z| !(z < 3.0))).count()
}
