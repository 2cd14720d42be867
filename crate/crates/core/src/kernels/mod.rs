//! Closed-form semigroup kernels.
//!
//! All kernels are evaluated in log space and exponentiated at the end so
//! that `kappa * t` up to ~1e3 neither overflows the prefactor nor underflows
//! the Gaussian. Multidimensional kernels are products of one-dimensional
//! factors; points are passed as slices whose length is the dimension.

pub mod hyperbolic;

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, Error, Result};
use hyperbolic::{coth, ln_sinh};

/// Cramer's constant: `|H_s(x)| e^{-x^2/2} <= K sqrt(2^s s!)`.
pub const CRAMER_CONSTANT: f64 = 1.086435;

/// Stiffness and spatial dimension of the oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    kappa: f64,
    dim: usize,
}

impl OscillatorParams {
    pub fn new(kappa: f64, dim: usize) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return domain(format!("kappa must be finite and >= 0, got {kappa}"));
        }
        check_dim(dim)?;
        Ok(Self { kappa, dim })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Bottom of the whole-space spectrum, `d kappa / 2`.
    pub fn ground_energy(&self) -> f64 {
        0.5 * self.dim as f64 * self.kappa
    }

    fn require_oscillator(&self) -> Result<()> {
        if self.kappa > 0.0 {
            Ok(())
        } else {
            domain("kappa = 0 has no Mehler kernel; use the heat or box kernel")
        }
    }
}

/// Semigroup time, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TimePoint(f64);

impl TimePoint {
    pub fn new(t: f64) -> Result<Self> {
        if t.is_finite() && t > 0.0 {
            Ok(Self(t))
        } else {
            domain(format!("time must be finite and > 0, got {t}"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Widening parameter `gamma` of the Mehler exponent; 1 gives the plain kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidenFactor(f64);

impl WidenFactor {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(Self(gamma))
        } else {
            domain(format!("widening factor must be finite and > 0, got {gamma}"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for WidenFactor {
    fn default() -> Self {
        Self(1.0)
    }
}

/// The open cube `(-L/2, L/2)^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGeometry {
    side: f64,
}

impl BoxGeometry {
    pub fn new(side: f64) -> Result<Self> {
        if side.is_finite() && side > 0.0 {
            Ok(Self { side })
        } else {
            domain(format!("box side must be finite and > 0, got {side}"))
        }
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn half(&self) -> f64 {
        0.5 * self.side
    }

    /// Membership in the closed box.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|c| c.abs() <= self.half())
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        domain(format!("dimension must be 1, 2 or 3, got {dim}"))
    }
}

fn check_points(x: &[f64], y: &[f64]) -> Result<usize> {
    if x.len() != y.len() {
        return domain(format!("point dimensions differ: {} vs {}", x.len(), y.len()));
    }
    check_dim(x.len())?;
    if x.iter().chain(y).any(|c| !c.is_finite()) {
        return domain("point coordinates must be finite");
    }
    Ok(x.len())
}

pub fn ln_heat_kernel_1d(x: f64, y: f64, t: f64) -> f64 {
    let r = x - y;
    -0.5 * (2.0 * PI * t).ln() - r * r / (2.0 * t)
}

/// Free heat kernel `prod_j (2 pi t)^{-1/2} exp(-(x_j - y_j)^2 / 2t)`.
pub fn heat_kernel(x: &[f64], y: &[f64], t: TimePoint) -> Result<f64> {
    Ok(ln_heat_kernel(x, y, t)?.exp())
}

pub fn ln_heat_kernel(x: &[f64], y: &[f64], t: TimePoint) -> Result<f64> {
    check_points(x, y)?;
    Ok(x.iter().zip(y).map(|(&a, &b)| ln_heat_kernel_1d(a, b, t.value())).sum())
}

/// One-dimensional widened Mehler kernel in log form.
pub fn ln_mehler_kernel_1d(x: f64, y: f64, t: f64, kappa: f64, gamma: f64) -> f64 {
    let a = kappa * t;
    let half = 0.5 * a;
    let ln_pref = 0.5 * (kappa.ln() - (2.0 * PI).ln() - ln_sinh(a));
    let (s, r) = (x + y, x - y);
    ln_pref - kappa / (4.0 * gamma) * (s * s * half.tanh() + r * r * coth(half))
}

/// Mehler kernel of `exp(-t H)` with the exponent divided by `gamma`.
pub fn mehler_kernel(x: &[f64], y: &[f64], t: TimePoint, p: OscillatorParams, g: WidenFactor) -> Result<f64> {
    Ok(ln_mehler_kernel(x, y, t, p, g)?.exp())
}

pub fn ln_mehler_kernel(x: &[f64], y: &[f64], t: TimePoint, p: OscillatorParams, g: WidenFactor) -> Result<f64> {
    p.require_oscillator()?;
    let d = check_points(x, y)?;
    if d != p.dim() {
        return domain(format!("points are {d}-dimensional but params say d = {}", p.dim()));
    }
    Ok(x.iter()
        .zip(y)
        .map(|(&a, &b)| ln_mehler_kernel_1d(a, b, t.value(), p.kappa(), g.value()))
        .sum())
}

/// How many image pairs to keep in the Dirichlet image sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageCutoff {
    /// Stop at the first `m` whose terms fall below `1e-16` of the partial sum.
    #[default]
    Auto,
    /// Keep `|m| <= m_max`, `m_max >= 1`.
    Fixed(usize),
}

/// Image-sum value with derivatives in the first argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxKernelJet {
    pub value: f64,
    pub dx: f64,
    pub dxx: f64,
    /// Truncation tail plus a rounding allowance, bounding `|value - exact|`.
    pub tail_bound: f64,
    pub images: usize,
}

const AUTO_IMAGE_CAP: usize = 1_000_000;

/// One-dimensional Dirichlet heat kernel on `(-L/2, L/2)` by the method of images.
pub fn box_kernel_1d(x: f64, y: f64, t: f64, side: f64, cutoff: ImageCutoff) -> BoxKernelJet {
    let pref = 1.0 / (2.0 * PI * t).sqrt();
    let term = |u: f64| {
        let e = (-u * u / (2.0 * t)).exp();
        (e, -u / t * e, (u * u / (t * t) - 1.0 / t) * e)
    };
    let pair = |m: f64| {
        let (a, da, dda) = term(x - y + 2.0 * m * side);
        let (b, db, ddb) = term(x + y - 2.0 * m * side - side);
        (a - b, da - db, dda - ddb, a.max(b))
    };
    let (mut v, mut dv, mut ddv, mut abs_sum) = {
        let (v, dv, ddv, big) = pair(0.0);
        (v, dv, ddv, 2.0 * big)
    };
    let limit = match cutoff {
        ImageCutoff::Fixed(m) => m.max(1),
        ImageCutoff::Auto => AUTO_IMAGE_CAP,
    };
    let mut m = 0usize;
    while m < limit {
        m += 1;
        let (p, dp, ddp, bp) = pair(m as f64);
        let (q, dq, ddq, bq) = pair(-(m as f64));
        v += p + q;
        dv += dp + dq;
        ddv += ddp + ddq;
        abs_sum += 2.0 * (bp + bq);
        if cutoff == ImageCutoff::Auto {
            let largest = bp.max(bq);
            if largest == 0.0 || largest < 1e-16 * v.abs() {
                break;
            }
        }
    }
    // each remaining term is <= exp(-2 (|m| - 1)^2 L^2 / t), four per |m|
    let a = 2.0 * side * side / t;
    let mf = m as f64;
    let tail = 4.0 * (-a * mf * mf).exp() / (1.0 - (-2.0 * a * mf).exp());
    let rounding = 4.0 * f64::EPSILON * abs_sum * (2 * m + 1) as f64;
    BoxKernelJet {
        value: pref * v,
        dx: pref * dv,
        dxx: pref * ddv,
        tail_bound: pref * (tail + rounding),
        images: m,
    }
}

/// Dirichlet kernel value with its accumulated error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxKernelValue {
    pub value: f64,
    pub tail_bound: f64,
    /// Largest per-axis image index kept.
    pub images: usize,
}

/// Dirichlet heat kernel (`kappa = 0`) on the cube, product of 1D image sums.
pub fn dirichlet_box_kernel(
    x: &[f64],
    y: &[f64],
    t: TimePoint,
    geometry: BoxGeometry,
    cutoff: ImageCutoff,
) -> Result<BoxKernelValue> {
    check_points(x, y)?;
    if let ImageCutoff::Fixed(0) = cutoff {
        return domain("image cutoff m_max must be >= 1");
    }
    if !geometry.contains(x) || !geometry.contains(y) {
        return domain(format!("points must lie in the closed box of side {}", geometry.side()));
    }
    let mut value = 1.0;
    let mut upper = 1.0;
    let mut images = 0;
    for (&a, &b) in x.iter().zip(y) {
        let jet = box_kernel_1d(a, b, t.value(), geometry.side(), cutoff);
        value *= jet.value;
        upper *= jet.value.abs() + jet.tail_bound;
        images = images.max(jet.images);
    }
    Ok(BoxKernelValue { value, tail_bound: upper - value.abs(), images })
}

/// Values `phi_0(x), ..., phi_S(x)` of the normalized oscillator eigenfunctions.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteBasisEval {
    pub values: Vec<f64>,
}

impl HermiteBasisEval {
    pub fn order_max(&self) -> usize {
        self.values.len() - 1
    }
}

/// Hermite functions via the normalized three-term recurrence in `xi = sqrt(kappa) x`.
///
/// Mantissas are rescaled whenever they grow past 1e150 so that far tails
/// (where the Gaussian factor alone underflows) still come out right.
pub fn hermite_functions(x: f64, p: OscillatorParams, order_max: usize) -> Result<HermiteBasisEval> {
    p.require_oscillator()?;
    if !x.is_finite() {
        return domain("x must be finite");
    }
    const BIG: f64 = 1e150;
    let xi = p.kappa().sqrt() * x;
    let mut ln_scale = 0.25 * (p.kappa() / PI).ln() - 0.5 * xi * xi;
    let mut values = Vec::with_capacity(order_max + 1);
    let mut prev = 0.0;
    let mut cur = 1.0;
    values.push(ln_scale.exp());
    for s in 0..order_max {
        let sf = s as f64;
        let next = xi * (2.0 / (sf + 1.0)).sqrt() * cur - (sf / (sf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            ln_scale += BIG.ln();
        }
        values.push(if cur == 0.0 { 0.0 } else { cur.signum() * (cur.abs().ln() + ln_scale).exp() });
    }
    Ok(HermiteBasisEval { values })
}

/// Truncated eigenfunction expansion of the Mehler kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSum {
    pub value: f64,
    /// Rigorous bound on the omitted terms `s > S`, plus a rounding allowance.
    pub tail_bound: f64,
    pub terms: usize,
}

/// `sum_{s <= S} exp(-t kappa (s + 1/2)) phi_s(x) phi_s(y)`, per axis, multiplied over axes.
pub fn mehler_via_spectral_sum(
    x: &[f64],
    y: &[f64],
    t: TimePoint,
    p: OscillatorParams,
    truncation: usize,
) -> Result<SpectralSum> {
    p.require_oscillator()?;
    let d = check_points(x, y)?;
    if d != p.dim() {
        return domain(format!("points are {d}-dimensional but params say d = {}", p.dim()));
    }
    let (kappa, tv) = (p.kappa(), t.value());
    let sup_sq = kappa.sqrt() * (CRAMER_CONSTANT * PI.powf(-0.25)).powi(2);
    let q = (-tv * kappa).exp();
    let tail_1d = sup_sq * (-tv * kappa * (truncation as f64 + 1.5)).exp() / (1.0 - q);
    let mut value = 1.0;
    let mut upper = 1.0;
    for (&a, &b) in x.iter().zip(y) {
        let fa = hermite_functions(a, p, truncation)?;
        let fb = hermite_functions(b, p, truncation)?;
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        for (s, (u, v)) in fa.values.iter().zip(&fb.values).enumerate() {
            let term = (-tv * kappa * (s as f64 + 0.5)).exp() * (u * v);
            sum += term;
            abs_sum += term.abs();
        }
        let rounding = 4.0 * f64::EPSILON * abs_sum * (truncation + 1) as f64;
        value *= sum;
        upper *= sum.abs() + tail_1d + rounding;
    }
    Ok(SpectralSum { value, tail_bound: upper - value.abs(), terms: truncation + 1 })
}

/// Closed form of `int exp(-[a(x+z)^2 + b(x-z)^2]) exp(-[c(z+y)^2 + dd(z-y)^2]) dz`.
pub fn gaussian_product_integral(a: f64, b: f64, c: f64, dd: f64, x: f64, y: f64) -> Result<f64> {
    for (name, v) in [("a", a), ("b", b), ("c", c), ("dd", dd)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("coefficient {name} must be finite and > 0, got {v}")));
        }
    }
    let s = a + b + c + dd;
    let ex = (b * (c + dd) + a * (dd + c) + 4.0 * a * b) / s;
    let ey = (b * (c + dd) + a * (dd + c) + 4.0 * c * dd) / s;
    let exy = 2.0 * (b * (c - dd) + a * (dd - c)) / s;
    Ok(PI.sqrt() / s.sqrt() * (-ex * x * x - ey * y * y - exy * x * y).exp())
}

/// `ln(2)`-free helper used by trace formulas: `ln(2 sinh(a/2))`.
pub(crate) fn ln_two_sinh_half(a: f64) -> f64 {
    LN_2 + ln_sinh(0.5 * a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_with_breaks};

    fn tp(t: f64) -> TimePoint {
        TimePoint::new(t).unwrap()
    }
    fn osc(k: f64, d: usize) -> OscillatorParams {
        OscillatorParams::new(k, d).unwrap()
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(TimePoint::new(0.0).is_err());
        assert!(TimePoint::new(-1.0).is_err());
        assert!(OscillatorParams::new(-0.1, 1).is_err());
        assert!(OscillatorParams::new(1.0, 4).is_err());
        assert!(OscillatorParams::new(1.0, 0).is_err());
        assert!(WidenFactor::new(0.0).is_err());
        assert!(BoxGeometry::new(0.0).is_err());
        assert_eq!(WidenFactor::default().value(), 1.0);
    }

    #[test]
    fn heat_kernel_closed_values() {
        let v = heat_kernel(&[0.0], &[0.0], tp(1.0)).unwrap();
        assert!((v - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let v3 = heat_kernel(&[0.0; 3], &[0.0; 3], tp(1.0)).unwrap();
        assert!((v3 - (2.0 * PI).powf(-1.5)).abs() < 1e-15);
        assert!(heat_kernel(&[0.0, 1.0], &[0.0], tp(1.0)).is_err());
    }

    #[test]
    fn heat_kernel_chapman_kolmogorov_by_quadrature() {
        let direct = heat_kernel(&[1.0], &[0.0], tp(2.0)).unwrap();
        let q = integrate(
            |z| heat_kernel(&[1.0], &[z], tp(1.0)).unwrap() * heat_kernel(&[z], &[0.0], tp(1.0)).unwrap(),
            -20.0,
            20.0,
            1e-14,
        );
        assert!((q.value - direct).abs() < 1e-12, "{} vs {}", q.value, direct);
    }

    #[test]
    fn mehler_at_origin_two_routes() {
        let v = mehler_kernel(&[0.0], &[0.0], tp(1.0), osc(1.0, 1), WidenFactor::default()).unwrap();
        let route_a = (1.0 / (2.0 * PI * 1f64.sinh())).sqrt();
        // sinh(1) = 2 sinh(1/2) cosh(1/2)
        let route_b = 1.0 / (2.0 * PI * 2.0 * 0.5f64.sinh() * 0.5f64.cosh()).sqrt();
        assert!((v - route_a).abs() < 1e-15);
        assert!((v - route_b).abs() < 1e-15);
    }

    #[test]
    fn mehler_small_kappa_approaches_heat() {
        for &(x, y, t) in &[(0.3, -0.2, 1.0), (1.0, 0.5, 0.5), (0.0, 0.0, 2.0)] {
            let m = mehler_kernel(&[x], &[y], tp(t), osc(1e-6, 1), WidenFactor::default()).unwrap();
            let h = heat_kernel(&[x], &[y], tp(t)).unwrap();
            assert!((m - h).abs() < 1e-8, "{m} vs {h}");
        }
    }

    #[test]
    fn mehler_rejects_zero_kappa() {
        assert!(mehler_kernel(&[0.0], &[0.0], tp(1.0), osc(0.0, 1), WidenFactor::default()).is_err());
    }

    #[test]
    fn mehler_large_kappa_t_stays_finite() {
        let ln = ln_mehler_kernel(&[0.0], &[0.0], tp(1.0), osc(1e3, 1), WidenFactor::default()).unwrap();
        assert!(ln.is_finite());
        let expected = 0.5 * (1e3f64.ln() - (2.0 * PI).ln() - (1e3 - LN_2));
        assert!((ln - expected).abs() < 1e-10);
    }

    #[test]
    fn box_kernel_vanishes_on_boundary() {
        let g = BoxGeometry::new(1.5).unwrap();
        for y in [-0.7, 0.0, 0.4] {
            for t in [0.05, 1.0, 10.0] {
                let v = dirichlet_box_kernel(&[0.75], &[y], tp(t), g, ImageCutoff::Auto).unwrap();
                assert!(v.value.abs() <= v.tail_bound + 1e-300, "{v:?}");
            }
        }
    }

    #[test]
    fn box_kernel_large_box_reduces_to_heat() {
        let g = BoxGeometry::new(10.0).unwrap();
        let v = dirichlet_box_kernel(&[0.0], &[0.0], tp(0.1), g, ImageCutoff::Fixed(3)).unwrap();
        let h = heat_kernel(&[0.0], &[0.0], tp(0.1)).unwrap();
        assert!((v.value - h).abs() < 1e-12);
    }

    #[test]
    fn box_kernel_rejects_outside_points() {
        let g = BoxGeometry::new(1.0).unwrap();
        assert!(dirichlet_box_kernel(&[0.6], &[0.0], tp(1.0), g, ImageCutoff::Auto).is_err());
        assert!(dirichlet_box_kernel(&[0.0], &[0.0], tp(1.0), g, ImageCutoff::Fixed(0)).is_err());
    }

    #[test]
    fn box_kernel_matches_sine_series() {
        // eigen-expansion of the Dirichlet Laplacian on (-L/2, L/2)
        let (l, t) = (2.0, 0.3);
        let g = BoxGeometry::new(l).unwrap();
        for &(x, y) in &[(0.1, -0.4), (0.9, 0.2), (0.0, 0.0)] {
            let mut series = 0.0;
            for n in 1..200 {
                let k = n as f64 * PI / l;
                let f = |u: f64| (2.0 / l).sqrt() * (k * (u + 0.5 * l)).sin();
                series += (-0.5 * t * k * k).exp() * f(x) * f(y);
            }
            let v = dirichlet_box_kernel(&[x], &[y], tp(t), g, ImageCutoff::Auto).unwrap();
            assert!((v.value - series).abs() < 1e-13, "{} vs {}", v.value, series);
        }
    }

    #[test]
    fn box_kernel_derivatives_match_finite_differences() {
        let (y, t, l) = (0.2, 0.4, 1.3);
        let x = -0.1;
        let h = 1e-4;
        let f = |u: f64| box_kernel_1d(u, y, t, l, ImageCutoff::Auto).value;
        let jet = box_kernel_1d(x, y, t, l, ImageCutoff::Auto);
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        assert!((jet.dx - d1).abs() < 1e-7);
        assert!((jet.dxx - d2).abs() < 1e-5);
    }

    #[test]
    fn hermite_closed_values() {
        let p = osc(1.0, 1);
        let h = hermite_functions(0.0, p, 7).unwrap();
        assert!((h.values[0] - PI.powf(-0.25)).abs() < 1e-15);
        for s in (1..=7).step_by(2) {
            assert_eq!(h.values[s], 0.0);
        }
        // phi_2(x) = (2 xi^2 - 1) / sqrt(2) * phi_0
        let x = 0.7;
        let h = hermite_functions(x, osc(2.0, 1), 2).unwrap();
        let xi2 = 2.0 * x * x;
        let phi0 = (2.0 / PI).powf(0.25) * (-0.5 * xi2).exp();
        assert!((h.values[2] - (2.0 * xi2 - 1.0) / 2f64.sqrt() * phi0).abs() < 1e-15);
    }

    #[test]
    fn hermite_orthonormality_by_quadrature() {
        let p = osc(1.0, 1);
        let inner = |i: usize, j: usize| {
            integrate_with_breaks(
                |x| {
                    let h = hermite_functions(x, p, 5).unwrap();
                    h.values[i] * h.values[j]
                },
                -12.0,
                12.0,
                &[-6.0, -3.0, 0.0, 3.0, 6.0],
                1e-13,
            )
            .value
        };
        assert!(inner(3, 5).abs() < 1e-10);
        assert!((inner(4, 4) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hermite_high_order_far_tail_is_finite() {
        let p = osc(1.0, 1);
        for x in [0.0, 10.0, 30.0, -30.0] {
            let h = hermite_functions(x, p, 500).unwrap();
            assert!(h.values.iter().all(|v| v.is_finite()));
            let bound = CRAMER_CONSTANT * PI.powf(-0.25) * (1.0 + 1e-12);
            assert!(h.values.iter().all(|v| v.abs() <= bound), "Cramer bound violated at x = {x}");
        }
    }

    #[test]
    fn spectral_sum_reproduces_mehler() {
        let p = osc(1.0, 1);
        let s = mehler_via_spectral_sum(&[0.0], &[0.0], tp(2.0), p, 40).unwrap();
        let m = mehler_kernel(&[0.0], &[0.0], tp(2.0), p, WidenFactor::default()).unwrap();
        assert!((s.value - m).abs() < 1e-10);
        assert!((s.value - m).abs() <= s.tail_bound);
        let first = mehler_via_spectral_sum(&[0.0], &[0.0], tp(2.0), p, 0).unwrap();
        assert!((first.value - (-1f64).exp() / PI.sqrt()).abs() < 1e-15);
        assert!(first.value < m);
        let a = mehler_via_spectral_sum(&[0.4], &[-1.1], tp(0.7), p, 30).unwrap();
        let b = mehler_via_spectral_sum(&[-1.1], &[0.4], tp(0.7), p, 30).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn gaussian_product_closed_values() {
        let v = gaussian_product_integral(1.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert!((v - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!(gaussian_product_integral(0.0, 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn gaussian_product_matches_quadrature() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let [a, b, c, dd]: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.1..5.0));
            let (x, y) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let f = |z: f64| (-(a * (x + z).powi(2) + b * (x - z).powi(2)) - (c * (z + y).powi(2) + dd * (z - y).powi(2))).exp();
            let breaks: Vec<f64> = (-40..=40).map(|k| 0.25 * k as f64).collect();
            let q = integrate_with_breaks(f, -12.0, 12.0, &breaks, 1e-14);
            let exact = gaussian_product_integral(a, b, c, dd, x, y).unwrap();
            assert!((q.value - exact).abs() < 1e-10, "{q:?} vs {exact}");
        }
    }
}
