//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 2 and 5 are known not to hold as stated (see README); for those the run checks
//! that the measured numbers match the documented analysis instead of failing the build.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use ddins::validate;
use levy_drawdown::exit::{down_exit, up_exit};
use levy_drawdown::mc::{
    check_path_logic, estimate_records, generate_skeleton, simulate_two_sided_exit, McConfig, Payoff, Start,
};
use levy_drawdown::quad::integrate_with_breaks;
use levy_drawdown::{DrawdownContract, DrawdownState, DrawupContract, DrawupState, LevyModel, ScaleFn, ThetaStar};

type Check = fn() -> Outcome;

const KNOWN_UNATTAINABLE: [usize; 2] = [2, 5];

struct Outcome {
    pass: bool,
    detail: String,
    /// For criteria that cannot hold as stated: whether the documented explanation checks out.
    explained: Option<bool>,
}

fn bm() -> LevyModel {
    LevyModel::brownian(0.03, 0.4).unwrap()
}

fn cl() -> LevyModel {
    LevyModel::cramer_lundberg(0.05, 0.1, 2.5).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn theta_reproduction() -> Outcome {
    let c = DrawdownContract::new(bm(), 10.0, 100.0, 50.0, 0.01).unwrap();
    let (star, dt) = timed(|| c.theta_star(DrawdownState { y: 7.0, p: 0.55 }).unwrap());
    let theta = star.theta().unwrap_or(f64::NAN);
    Outcome {
        pass: (theta - 2.0).abs() <= 0.2 && dt < Duration::from_secs(1),
        detail: format!("theta*={theta:.6} in {dt:.2?}"),
        explained: None,
    }
}

fn divergence_dichotomy() -> Outcome {
    type Premiums = (f64, f64, f64, f64, levy_drawdown::Result<f64>, levy_drawdown::Result<f64>);
    let ((bm_near, bm_closer, cl_near, cl_far, cl_edge, bm_edge), dt): (Premiums, _) = timed(|| {
        let b = DrawdownContract::new(bm(), 10.0, 100.0, 0.0, 0.01).unwrap();
        let c = DrawdownContract::new(cl(), 10.0, 100.0, 0.0, 0.01).unwrap();
        (
            b.fair_premium(9.99).unwrap(),
            b.fair_premium(9.999).unwrap(),
            c.fair_premium(9.99).unwrap(),
            c.fair_premium(9.9).unwrap(),
            c.fair_premium(10.0),
            b.fair_premium(10.0),
        )
    });
    let bm_ok = bm_near > 1e3;
    let cl_ok = cl_near.is_finite() && (cl_near / cl_far - 1.0).abs() < 0.1;
    // Documented behaviour: BM premium ~ 1/(a - y) and unbounded at a; CL premium bounded at a.
    let explained = (bm_closer / bm_near / 10.0 - 1.0).abs() < 0.05
        && bm_edge.is_err()
        && cl_edge.as_ref().is_ok_and(|v| v.is_finite() && *v > cl_near);
    Outcome {
        pass: bm_ok && cl_ok && dt < Duration::from_secs(1),
        detail: format!(
            "BM p*(a-0.01)={bm_near:.4} (need >1e3), CL p*(a-0.01)/p*(a-0.1)={:.4} (need within 10%), \
             BM p* x10 per decade towards a, CL p*(a)={:.4} finite, in {dt:.2?}",
            cl_near / cl_far,
            cl_edge.unwrap_or(f64::NAN)
        ),
        explained: Some(explained),
    }
}

fn oracle_equivalence() -> Outcome {
    let cfg = McConfig { n_paths: 200_000, ..McConfig::default() };
    let (rows, dt) = timed(|| validate::run(&cfg).unwrap());
    let breaches = validate::breaches(&rows);
    let max_z = rows.iter().filter_map(|r| r.abs_z).fold(0.0, f64::max);
    let mut coverage: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.analytic.is_some()) {
        *coverage.entry((r.model, r.quantity)).or_default() += 1;
    }
    let quantities = ["xi", "lambda", "nu", "f", "k", "g(theta*)", "h(theta*)"];
    let thin: Vec<String> = ["bm", "cl"]
        .iter()
        .flat_map(|m| quantities.iter().map(move |q| (*m, *q)))
        .filter(|k| coverage.get(k).copied().unwrap_or(0) < 3)
        .map(|(m, q)| format!("{m}/{q}"))
        .collect();
    Outcome {
        pass: breaches == 0 && thin.is_empty() && dt < Duration::from_secs(600),
        detail: format!(
            "{} comparisons at 2e5 paths, max |z|={max_z:.3}, breaches={breaches}, under-covered={thin:?}, in {dt:.1?}",
            rows.iter().filter(|r| r.abs_z.is_some()).count()
        ),
        explained: None,
    }
}

fn fluctuation_identities() -> Outcome {
    let mut worst_laplace: f64 = 0.0;
    for model in [bm(), cl()] {
        for r in [0.01, 0.05] {
            let sf = ScaleFn::new(model, r).unwrap();
            let phi = model.phi_inverse(r).unwrap() + 1.0;
            let breaks: Vec<f64> = (0..=60).map(f64::from).collect();
            let lhs = integrate_with_breaks(|u| (-phi * u).exp() * sf.w(u).unwrap(), &breaks, 1e-14).unwrap();
            let rhs = 1.0 / (model.laplace_exponent(phi).unwrap() - r);
            worst_laplace = worst_laplace.max(((lhs - rhs) / rhs).abs());
        }
    }
    let mut worst_sum: f64 = 0.0;
    for model in [bm(), cl()] {
        let sf = ScaleFn::new(model, 0.0).unwrap();
        for a in [1.0, 5.0, 10.0, 30.0] {
            for i in 0..=50 {
                let x = a * f64::from(i) / 50.0;
                worst_sum = worst_sum.max((up_exit(&sf, x, a).unwrap() + down_exit(&sf, x, a).unwrap() - 1.0).abs());
            }
        }
    }
    let driftless = LevyModel::brownian(0.0, 1.0).unwrap();
    let cfg = McConfig { n_paths: 100_000, seed: 4, ..McConfig::default() };
    let mut worst_z: f64 = 0.0;
    for x in [2.0, 5.0, 8.0] {
        let recs = simulate_two_sided_exit(&driftless, &cfg, x, 10.0).unwrap();
        let e = estimate_records(&recs, &cfg, 0.0, Payoff::DrawupTransform);
        worst_z = worst_z.max(e.z_score(x / 10.0).abs());
    }
    Outcome {
        // Exact up to floating-point rounding of the two ratios.
        pass: worst_laplace < 1e-6 && worst_sum <= 4.0 * f64::EPSILON && worst_z < 3.0,
        detail: format!(
            "Laplace residual {worst_laplace:.2e}, |up+down-1| at r=0 {worst_sum:.1e}, gambler's ruin max |z| {worst_z:.2}"
        ),
        explained: None,
    }
}

fn branch_continuity() -> Outcome {
    let eps = 1e-10;
    let mut worst_ln: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    let mut worst_h_first: f64 = 0.0;
    let mut worst_h_second: f64 = 0.0;
    let mut worst_h_second_free: f64 = 0.0;
    let mut worst_jump_mismatch: f64 = 0.0;
    let models = [bm(), LevyModel::cramer_lundberg(0.04, 0.1, 2.5).unwrap()];
    for model in models {
        let c = DrawupContract::new(model, 10.0, 10.0, 100.0, 50.0, 0.01).unwrap();
        let free = DrawupContract::new(model, 10.0, 10.0, 100.0, 0.0, 0.01).unwrap();
        for y in [3.0, 5.0, 7.0] {
            let z = 10.0 - y;
            let (l0, n0) = c.lambda_nu(y, z - eps).unwrap();
            let (l1, n1) = c.lambda_nu(y, z + eps).unwrap();
            worst_ln = worst_ln.max((l0 - l1).abs()).max((n0 - n1).abs());
            let p0 = c.fair_premium(y, z - eps).unwrap();
            let p1 = c.fair_premium(y, z + eps).unwrap();
            worst_p = worst_p.max((p0 - p1).abs());
            for (theta, p) in [(1.0, 0.55), (2.5, 1.0)] {
                let h = |k: &DrawupContract, zz: f64| k.h_value(DrawupState { y, z: zz, p }, theta).unwrap();
                worst_h_first = worst_h_first.max((h(&c, z - eps) - h(&c, z + eps)).abs());
                // Second split: the drawup reached at the cancellation level equals a.
                let z2 = 10.0 - y + theta;
                let jump = h(&c, z2 - eps) - h(&c, z2 + eps);
                worst_h_second = worst_h_second.max(jump.abs());
                worst_h_second_free = worst_h_second_free.max((h(&free, z2 - eps) - h(&free, z2 + eps)).abs());
                let fee_term = -50.0 * c.scale().w_ratio(10.0 - y, 10.0 - theta);
                worst_jump_mismatch = worst_jump_mismatch.max((jump - fee_term).abs());
            }
        }
    }
    let pass = worst_ln < 1e-8 && worst_p < 1e-8 && worst_h_first < 1e-8 && worst_h_second < 1e-8;
    let explained = worst_ln < 1e-8
        && worst_p < 1e-8
        && worst_h_first < 1e-8
        && worst_h_second_free < 1e-8
        && worst_jump_mismatch < 1e-7;
    Outcome {
        pass,
        detail: format!(
            "lambda/nu {worst_ln:.1e}, p* {worst_p:.1e}, h at a=y+z {worst_h_first:.1e}, h at a=y+z-theta \
             {worst_h_second:.3e} with c=50 (c=0: {worst_h_second_free:.1e}; jump minus -c W(a-y)/W(a-theta): \
             {worst_jump_mismatch:.1e})"
        ),
        explained: Some(explained),
    }
}

fn root_property() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for model in [bm(), cl()] {
        let c = DrawdownContract::new(model, 10.0, 100.0, 50.0, 0.01).unwrap();
        for i in 1..=19 {
            let y = 0.5 * f64::from(i);
            let p = c.fair_premium(y).unwrap();
            worst = worst.max(c.price_f(DrawdownState { y, p }).unwrap().abs());
            count += 1;
        }
    }
    let drawup = [
        DrawupContract::new(bm(), 10.0, 8.0, 100.0, 50.0, 0.01).unwrap(),
        DrawupContract::new(bm(), 10.0, 10.0, 100.0, 50.0, 0.01).unwrap(),
        DrawupContract::new(LevyModel::cramer_lundberg(0.05, 0.01, 2.5).unwrap(), 10.0, 10.0, 100.0, 50.0, 0.01)
            .unwrap(),
    ];
    for c in drawup {
        for i in 1..=19 {
            for j in 0..16 {
                let (y, z) = (0.5 * f64::from(i), 0.5 * f64::from(j));
                if z >= c.b {
                    continue;
                }
                let p = c.fair_premium(y, z).unwrap();
                worst = worst.max(c.price_k(DrawupState { y, z, p }).unwrap().abs());
                count += 1;
            }
        }
    }
    Outcome {
        pass: worst < 1e-10,
        detail: format!("max |value at p*| = {worst:.2e} over {count} points"),
        explained: None,
    }
}

fn optimality() -> Outcome {
    let dd = DrawdownContract::new(bm(), 10.0, 100.0, 50.0, 0.01).unwrap();
    let s = DrawdownState { y: 7.0, p: 0.55 };
    let ThetaStar::Optimal { theta, value, .. } = dd.theta_star(s).unwrap() else {
        return Outcome { pass: false, detail: "drawdown: no optimal level".into(), explained: None };
    };
    let grid_max = (0..=7000).map(|i| dd.g_value(s, f64::from(i) * 1e-3).unwrap()).fold(f64::MIN, f64::max);
    let g_ok = value >= grid_max - 1e-12;

    let du = DrawupContract::new(bm(), 10.0, 8.0, 100.0, 50.0, 0.01).unwrap();
    let us = DrawupState { y: 7.0, z: 2.0, p: 1.35 };
    let h_star = du.theta_star(us).unwrap();
    let h_grid_max = (0..=7000).map(|i| du.h_value(us, f64::from(i) * 1e-3).unwrap()).fold(f64::MIN, f64::max);
    let h_ok = matches!(h_star, ThetaStar::Optimal { value, .. } if value >= h_grid_max - 1e-12);

    let matching = dd.g_value(s, s.y).unwrap() == dd.f_tilde(s).unwrap()
        && du.h_value(us, us.y).unwrap() == du.k_tilde(us).unwrap();

    let dd_levels: Vec<f64> = [3.0, 5.0, 7.0, 9.0]
        .iter()
        .map(|&y| dd.theta_star(DrawdownState { y, p: 0.55 }).unwrap().theta().unwrap())
        .collect();
    let dd_spread = dd_levels.iter().fold(0.0f64, |m, t| m.max((t - theta).abs()));

    // A level at or above the current drawdown means "cancel now", so a boundary optimum at y is
    // the same rule as any common level >= y.
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    for y in [6.0, 7.0] {
        for z in [2.0, 3.0] {
            match du.theta_star(DrawupState { y, z, p: 1.35 }).unwrap() {
                ThetaStar::Optimal { theta, at_boundary: false, .. } => interior.push(theta),
                ThetaStar::Optimal { theta, at_boundary: true, .. } => boundary.push((y, theta)),
                ThetaStar::NeverCancel => boundary.push((y, f64::NAN)),
            }
        }
    }
    let common = interior.first().copied().unwrap_or(f64::NAN);
    let du_spread = interior.iter().fold(0.0f64, |m, t| m.max((t - common).abs()));
    let boundary_ok = boundary.iter().all(|&(y, t)| (t - y).abs() < 1e-9 && y <= common);
    let invariant = dd_spread < 1e-4 && du_spread < 1e-4 && !interior.is_empty() && boundary_ok;

    Outcome {
        pass: g_ok && h_ok && matching && invariant,
        detail: format!(
            "g(theta*)>=grid {g_ok}, h(theta*)>=grid {h_ok}, value matching {matching}, dd theta* spread \
             {dd_spread:.1e} over y in 3..9, du theta*={common:.4} spread {du_spread:.1e} ({} interior, {} at theta=y<=theta*)",
            interior.len(),
            boundary.len()
        ),
        explained: None,
    }
}

fn path_logic() -> Outcome {
    let model = cl();
    let starts = [(7.0, 2.0, 3.0), (2.0, 1.0, 0.5), (9.5, 0.0, 6.0), (4.0, 3.5, 1.0)];
    let mut violations = 0;
    let mut checked = 0;
    for i in 0..10_000u64 {
        let (y, z, theta) = starts[i as usize % starts.len()];
        let sk = generate_skeleton(&model, 2024, i, 1200.0).unwrap();
        let logic = check_path_logic(&sk, 10.0, 8.0, Start { y, z }, theta);
        violations += logic.violations();
        checked += [logic.drawup_first, logic.drawdown_first, logic.theta_first].iter().flatten().count();
    }
    Outcome {
        pass: violations == 0,
        detail: format!("10000 exact paths, {checked} indicator pairs, {violations} violations"),
        explained: None,
    }
}

fn run_validate(workers: usize, tag: &str) -> Vec<u8> {
    let out: PathBuf = std::env::temp_dir().join(format!("ddins-accept-{}-{tag}.csv", std::process::id()));
    let status = Command::new(env!("CARGO_BIN_EXE_ddins"))
        .args(["validate", "--paths", "2000", "--seed", "99", "--workers", &workers.to_string(), "--out"])
        .arg(&out)
        .status()
        .expect("run ddins");
    assert!(matches!(status.code(), Some(0 | 4)), "validate exited with {status:?}");
    let bytes = std::fs::read(&out).expect("read validate output");
    let _ = std::fs::remove_file(&out);
    bytes
}

fn determinism() -> Outcome {
    let first = run_validate(1, "a");
    let second = run_validate(1, "b");
    let wide = run_validate(8, "c");
    let lines = first.iter().filter(|&&b| b == b'\n').count();
    Outcome {
        pass: first == second && first == wide && lines > 1,
        detail: format!(
            "{lines} lines; repeat identical {}, workers 1 vs 8 identical {}",
            first == second,
            first == wide
        ),
        explained: None,
    }
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("theta* reproduction", theta_reproduction),
        ("divergence/boundedness dichotomy", divergence_dichotomy),
        ("oracle equivalence", oracle_equivalence),
        ("fluctuation identities", fluctuation_identities),
        ("branch continuity", branch_continuity),
        ("root property", root_property),
        ("optimality properties", optimality),
        ("path-logic equivalences", path_logic),
        ("determinism", determinism),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        let o = check();
        println!("criterion {n} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        let known = KNOWN_UNATTAINABLE.contains(&n);
        if !o.pass && !(known && o.explained == Some(true)) {
            unexpected.push(n);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: every failure matches its documented analysis");
    } else {
        println!("acceptance: unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
