//! One-dimensional integration kernels shared across the crate: fixed-order
//! Gauss-Legendre panels and adaptive Simpson refinement.

use std::sync::OnceLock;

/// Nodes and weights of the 32-point Gauss-Legendre rule on [-1, 1].
fn gl32() -> &'static [(f64, f64)] {
    static CACHE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CACHE.get_or_init(|| gauss_legendre(32))
}

/// Computes Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    assert!(order >= 2);
    let n = order;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((-x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Integrates `f` over [a, b] with a single 32-point Gauss-Legendre panel.
pub fn gl32_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in gl32() {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integrates `f` over [a, b] splitting into `panels` equal Gauss-Legendre
/// panels.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        acc += gl32_panel(&f, a + i as f64 * h, a + (i + 1) as f64 * h);
    }
    acc
}

/// Outcome of adaptive Simpson integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Accumulated error estimate from the accepted panels.
    pub error_estimate: f64,
    /// True when some panel hit the depth cap before meeting its tolerance.
    pub converged: bool,
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    out: &mut QuadResult,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 {
        out.value += left + right + delta / 15.0;
        out.error_estimate += delta.abs() / 15.0;
        out.converged = false;
        return;
    }
    if delta.abs() <= 15.0 * tol {
        out.value += left + right + delta / 15.0;
        out.error_estimate += delta.abs() / 15.0;
        return;
    }
    adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

/// Adaptive Simpson integration of `f` over [a, b] to absolute tolerance
/// `tol`. Depth is capped at `max_depth` (the result records whether the cap
/// was hit).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> QuadResult {
    let mut out = QuadResult {
        value: 0.0,
        error_estimate: 0.0,
        converged: true,
    };
    if a == b {
        return out;
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    adaptive_step(&f, a, b, fa, fm, fb, whole, tol, max_depth, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_exact_on_polynomials() {
        // 32-point rule integrates x^k exactly for k <= 63.
        let v = integrate_gl(|x| x * x * x * x, -1.0, 1.0, 1);
        assert!((v - 0.4).abs() < 1e-14);
        let v = integrate_gl(|x| x.powi(10), 0.0, 2.0, 1);
        assert!((v - 2048.0 / 11.0).abs() < 1e-10);
    }

    #[test]
    fn adaptive_simpson_smooth() {
        let r = adaptive_simpson(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12, 40);
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn adaptive_simpson_kink() {
        let r = adaptive_simpson(|x: f64| x.abs(), -1.0, 2.0, 1e-12, 48);
        assert!((r.value - 2.5).abs() < 1e-9);
    }
}
