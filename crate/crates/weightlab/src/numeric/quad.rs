//! Gauss-Legendre quadrature with a crude error estimate.

use std::sync::OnceLock;

fn legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn rule(n: usize) -> &'static [(f64, f64)] {
    static G10: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static G20: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    match n {
        10 => G10.get_or_init(|| legendre_nodes(10)),
        _ => G20.get_or_init(|| legendre_nodes(20)),
    }
}

fn panel(g: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule(n).iter().map(|&(x, w)| w * g(c + h * x)).sum::<f64>() * h
}

/// Integral of `g` over `[a, b]` with panels graded geometrically toward
/// `a` (where integrable endpoint singularities are expected).
/// Returns `(estimate, error bound)`.
pub fn integrate_graded(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let len = b - a;
    let mut cuts = vec![b];
    let mut t = len;
    while t > len * 1e-30 && t > 1e-300 {
        t *= 0.5;
        cuts.push(a + t);
    }
    cuts.push(a);
    let (mut fine, mut err) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let f20 = panel(g, lo, hi, 20);
        let f10 = panel(g, lo, hi, 10);
        fine += f20;
        err += (f20 - f10).abs();
    }
    (fine, err + fine.abs() * 1e-14)
}

/// Plain composite rule for smooth integrands.
pub fn integrate(g: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> (f64, f64) {
    let h = (b - a) / panels as f64;
    let (mut fine, mut err) = (0.0, 0.0);
    for i in 0..panels {
        let lo = a + h * i as f64;
        let hi = if i + 1 == panels { b } else { lo + h };
        let f20 = panel(g, lo, hi, 20);
        fine += f20;
        err += (f20 - panel(g, lo, hi, 10)).abs();
    }
    (fine, err + fine.abs() * 1e-14)
}
