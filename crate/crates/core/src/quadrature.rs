//! Gauss–Legendre rules and an adaptive complex line integrator.

use std::sync::OnceLock;

use num_complex::Complex64;

const ORDER: usize = 10;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_{n-1}(x).
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        acc += f(mid + half * x) * *w;
    }
    acc * half
}

/// `∫_a^b f(t) dt` by adaptive bisection of Gauss–Legendre panels, starting
/// from `panels` equal pieces. Returns `None` if some piece cannot meet its
/// share of `tol` within `max_depth` bisections.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    tol: f64,
    max_depth: u32,
) -> Option<Complex64> {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let lo = a + h * k as f64;
        let hi = if k + 1 == panels { b } else { lo + h };
        let whole = panel(f, lo, hi);
        total += refine(f, lo, hi, whole, tol / panels as f64, max_depth)?;
    }
    Some(total)
}

fn refine<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, whole: Complex64, tol: f64, depth: u32) -> Option<Complex64> {
    let m = 0.5 * (a + b);
    let left = panel(f, a, m);
    let right = panel(f, m, b);
    let split = left + right;
    let err = (split - whole).norm();
    if !err.is_finite() {
        return None;
    }
    if err <= tol.max(1e-15 * split.norm()) {
        return Some(split);
    }
    if depth == 0 {
        return None;
    }
    Some(refine(f, a, m, left, 0.5 * tol, depth - 1)? + refine(f, m, b, right, 0.5 * tol, depth - 1)?)
}
