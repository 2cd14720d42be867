//! Adaptive Gauss-Legendre quadrature on finite intervals.
//!
//! Each panel is integrated with a fixed 20-point rule and compared against
//! the same rule applied to its two halves; panels are bisected until the
//! discrepancy falls below the share of the absolute tolerance allotted to
//! their width. The integrands in this crate are smooth Gaussians of known
//! width, for which this converges after a handful of levels.

use std::sync::OnceLock;

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 40;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum over accepted panels of |coarse - refined|.
    pub error: f64,
    pub panels: usize,
}

fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule::<ORDER>())
}

/// Nodes and weights of the `N`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre_rule<const N: usize>() -> ([f64; N], [f64; N]) {
    let mut nodes = [0.0; N];
    let mut weights = [0.0; N];
    let n = N as f64;
    for i in 0..N.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_N.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(N, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(N, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[N - 1 - i] = x;
        weights[i] = w;
        weights[N - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Panels are processed depth-first from left to right, so the summation
/// order (and hence the result) is deterministic.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error: 0.0, panels: 0 };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let width = hi - lo;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut panels = 0;
    let mut stack = vec![(lo, hi, panel(&f, lo, hi), 0u32)];
    while let Some((x0, x1, coarse, depth)) = stack.pop() {
        let m = 0.5 * (x0 + x1);
        let left = panel(&f, x0, m);
        let right = panel(&f, m, x1);
        let refined = left + right;
        let diff = (refined - coarse).abs();
        // below a few ulps of the panel value the difference is rounding noise
        let budget = (tol * (x1 - x0) / width).max(16.0 * f64::EPSILON * (left.abs() + right.abs()));
        if diff <= budget || depth >= MAX_DEPTH {
            value += refined;
            error += diff;
            panels += 1;
        } else {
            // right pushed first so the left half is handled first
            stack.push((m, x1, right, depth + 1));
            stack.push((x0, m, left, depth + 1));
        }
    }
    Quadrature { value: sign * value, error, panels }
}

/// Integrate over `[a, b]` split at the given interior breakpoints.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Quadrature {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let pieces = (edges.len() - 1) as f64;
    let mut total = Quadrature { value: 0.0, error: 0.0, panels: 0 };
    for w in edges.windows(2) {
        let q = integrate(&f, w[0], w[1], tol / pieces);
        total.value += q.value;
        total.error += q.error;
        total.panels += q.panels;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre_rule::<ORDER>();
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // degree 38 is the highest exactly integrated even power
        let m: f64 = x.iter().zip(w.iter()).map(|(x, w)| w * x.powi(38)).sum();
        assert!((m - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let q = integrate(|x: f64| (-x * x).exp(), -12.0, 12.0, 1e-13);
        assert!((q.value - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = integrate(|x: f64| x.cos(), 0.0, 2.0, 1e-13).value;
        let b = integrate(|x: f64| x.cos(), 2.0, 0.0, 1e-13).value;
        assert_eq!(a, -b);
        assert!((a - 2f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn narrow_peak_is_resolved_with_break() {
        let s = 1e-2;
        let q = integrate_with_breaks(
            |x: f64| (-(x - 0.3) * (x - 0.3) / (2.0 * s * s)).exp(),
            -5.0,
            5.0,
            &[0.3 - 10.0 * s, 0.3 + 10.0 * s],
            1e-14,
        );
        let exact = s * (2.0 * std::f64::consts::PI).sqrt();
        assert!((q.value - exact).abs() < 1e-12, "{} vs {}", q.value, exact);
    }
}
