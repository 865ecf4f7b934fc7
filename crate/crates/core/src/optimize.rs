//! One-dimensional global maximisation by grid scan plus golden-section refinement.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    /// True when the maximiser sits on an end of the search interval.
    pub at_boundary: bool,
}

/// Maximises `f` on `[lo, hi]`.
///
/// `n_scan` equally spaced intervals are scanned first; the best bracket is then refined by
/// golden-section search down to width `tol`. Ties resolve to the smallest abscissa.
pub fn maximize<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n_scan: usize, tol: f64) -> Maximum {
    if hi <= lo {
        return Maximum { x: lo, value: f(lo), at_boundary: true };
    }
    let n = n_scan.max(2);
    let step = (hi - lo) / n as f64;
    let grid = move |i: usize| if i == n { hi } else { lo + step * i as f64 };
    let mut best_i = 0;
    let mut best_v = f(lo);
    for i in 1..=n {
        let v = f(grid(i));
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let left = grid(best_i.saturating_sub(1));
    let right = grid((best_i + 1).min(n));
    let (gx, gv) = golden(&mut f, left, right, tol);
    let (x, value) = if gv > best_v { (gx, gv) } else { (grid(best_i), best_v) };
    let at_boundary = x - lo <= tol || hi - x <= tol;
    Maximum { x, value, at_boundary }
}

/// Minimises `f` on `[lo, hi]` with the same strategy as [`maximize`].
pub fn minimize<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n_scan: usize, tol: f64) -> Maximum {
    let m = maximize(|x| -f(x), lo, hi, n_scan, tol);
    Maximum { value: -m.value, ..m }
}

fn golden<F: FnMut(f64) -> f64>(f: &mut F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        // On ties keep the left part so that the smallest maximiser survives.
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        let m = maximize(|x| -(x - 1.234567).powi(2), 0.0, 5.0, 200, 1e-9);
        assert!((m.x - 1.234567).abs() < 1e-6);
        assert!(!m.at_boundary);
    }

    #[test]
    fn boundary_maximum_is_flagged() {
        let m = maximize(|x| x, 0.0, 3.0, 50, 1e-9);
        assert_eq!(m.x, 3.0);
        assert!(m.at_boundary);
    }

    #[test]
    fn plateau_prefers_smallest() {
        let m = maximize(|x: f64| x.min(1.0), 0.0, 4.0, 200, 1e-9);
        assert!((m.x - 1.0).abs() < 1e-6, "{}", m.x);
    }

    #[test]
    fn global_over_local() {
        let f = |x: f64| (3.0 * x).sin() + 0.3 * x;
        let m = maximize(f, 0.0, 6.0, 200, 1e-10);
        let brute = (0..=600000).map(|i| i as f64 * 1e-5).fold(f64::NEG_INFINITY, |acc, x| acc.max(f(x)));
        assert!(m.value >= brute - 1e-9);
    }

    #[test]
    fn minimize_mirrors() {
        let m = minimize(|x| (x - 2.0).powi(2) + 1.0, 0.0, 3.0, 30, 1e-10);
        assert!((m.x - 2.0).abs() < 1e-6 && (m.value - 1.0).abs() < 1e-12);
    }
}
