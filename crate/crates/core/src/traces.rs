//! Traces of the semigroup on the whole space and in the cube, and the
//! split of their difference into an interior kernel-difference integral
//! (`Y`) and an exterior Mehler-diagonal integral (`Z`).
//!
//! Cube quantities are built from the one-dimensional spectrum and raised to
//! the power `d`: both the potential `sum_l x_l^2` and the cube separate
//! across coordinates, so the `d`-dimensional trace is the `d`-th power of
//! the 1D trace. The 2D dense oracle checks this numerically.

use libm::erfc;

use crate::error::{domain, Error, Result};
use crate::kernels::hyperbolic::ln_sinh;
use crate::kernels::{
    box_kernel_1d, check_dim, ln_mehler_kernel_1d, ln_two_sinh_half, ImageCutoff, OscillatorParams, TimePoint,
};
use crate::oracle::{oracle_diagonal_integral, DenseGridModel};
use crate::quad::integrate_with_breaks;
use crate::spectrum::{box_oscillator_eigs, Discretization, DirichletOscillatorSpec, EigenSpectrum};

/// A difference is trusted only when it exceeds this multiple of its error.
pub const NOISE_FLOOR_FACTOR: f64 = 10.0;

/// Default relative truncation tolerance for trace sums.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A trace value with the error budget attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceReport {
    pub value: f64,
    /// Bound on the omitted eigenvalue tail.
    pub truncation_error: f64,
    /// Propagated eigenvalue errors.
    pub discretization_error: f64,
    /// 1D eigenvalues summed before the tail bound met the tolerance.
    pub eigencount_used: usize,
    pub dim: usize,
}

impl TraceReport {
    pub fn total_error(&self) -> f64 {
        self.truncation_error + self.discretization_error
    }
}

/// `(2 sinh(kappa t / 2))^{-d}`, evaluated in log space.
pub fn trace_infinite(t: TimePoint, p: OscillatorParams) -> Result<f64> {
    Ok(ln_trace_infinite(t, p)?.exp())
}

pub fn ln_trace_infinite(t: TimePoint, p: OscillatorParams) -> Result<f64> {
    if p.kappa() <= 0.0 {
        return domain("kappa = 0: the free semigroup is not trace class on the whole space");
    }
    Ok(-(p.dim() as f64) * ln_two_sinh_half(p.kappa() * t.value()))
}

/// Second route to the same number: `exp(-E0 t) / (1 - exp(-kappa t))^d`.
pub fn trace_infinite_geometric(t: TimePoint, p: OscillatorParams) -> Result<f64> {
    if p.kappa() <= 0.0 {
        return domain("kappa = 0: the free semigroup is not trace class on the whole space");
    }
    let kt = p.kappa() * t.value();
    Ok((-p.ground_energy() * t.value()).exp() / (-(-kt).exp_m1()).powi(p.dim() as i32))
}

/// Rigorous bound on `sum_{k > used} exp(-t eps_k)` for the 1D box problem.
///
/// Uses both `eps_k >= k^2 pi^2 / (2 L^2)` (free walls) and, for
/// `kappa > 0`, `eps_k >= kappa (k - 1/2)` (whole-line levels), and returns
/// the smaller of the two resulting bounds.
pub fn eigen_tail_bound(t: f64, spec: &DirichletOscillatorSpec, used: usize) -> f64 {
    let k = used as f64;
    let c = t * std::f64::consts::PI.powi(2) / (2.0 * spec.side() * spec.side());
    // sum_{j > K} e^{-c j^2} <= int_K^inf e^{-c x^2} dx
    let free = 0.5 * (std::f64::consts::PI / c).sqrt() * erfc(k * c.sqrt());
    if spec.kappa() > 0.0 {
        let kt = t * spec.kappa();
        let osc = (-kt * (k + 0.5)).exp() / -(-kt).exp_m1();
        free.min(osc)
    } else {
        free
    }
}

/// Sum `exp(-t eps_k)` over a computed spectrum until the tail bound drops
/// below `tol` times the partial sum, then raise to the power `dim`.
pub fn trace_from_spectrum(
    t: TimePoint,
    spectrum: &EigenSpectrum,
    spec: &DirichletOscillatorSpec,
    dim: usize,
    tol: f64,
) -> Result<TraceReport> {
    check_dim(dim)?;
    if !(tol.is_finite() && tol > 0.0) {
        return domain(format!("tolerance must be > 0, got {tol}"));
    }
    let tv = t.value();
    let mut partial = 0.0;
    let mut disc = 0.0;
    let mut used = None;
    let mut tail = f64::INFINITY;
    for (k, (e, err)) in spectrum.values.iter().zip(&spectrum.errors).enumerate() {
        let w = (-tv * e).exp();
        partial += w;
        disc += (-tv * (e - err)).exp() - w;
        tail = eigen_tail_bound(tv, spec, k + 1);
        if tail < tol * partial {
            used = Some(k + 1);
            break;
        }
    }
    let Some(used) = used else {
        return Err(Error::Refused(format!(
            "tail bound {tail:e} still above tol x sum after {} eigenvalues; use a larger grid",
            spectrum.count()
        )));
    };
    let tail = tail + f64::EPSILON * used as f64 * partial;
    let d = dim as i32;
    let value = partial.powi(d);
    let with_tail = (partial + tail).powi(d);
    let with_all = (partial + tail + disc).powi(d);
    Ok(TraceReport {
        value,
        truncation_error: with_tail - value,
        discretization_error: with_all - with_tail,
        eigencount_used: used,
        dim,
    })
}

/// Finite-box trace `Tr exp(-t H_L)` in dimension `dim`.
pub fn trace_finite(
    t: TimePoint,
    spec: &DirichletOscillatorSpec,
    dim: usize,
    tol: f64,
    disc: Discretization,
) -> Result<TraceReport> {
    let spectrum = box_oscillator_eigs(spec, disc, disc.max_count())?;
    trace_from_spectrum(t, &spectrum, spec, dim, tol)
}

/// Exact 1D exterior integral of the Mehler diagonal,
/// `erfc(sqrt(kappa tanh(kappa t/2)) L/2) / sqrt(2 sinh(kappa t) tanh(kappa t/2))`.
pub fn z_term_1d(t: TimePoint, spec: &DirichletOscillatorSpec) -> Result<f64> {
    let kappa = spec.kappa();
    if kappa <= 0.0 {
        return domain("z term needs kappa > 0");
    }
    let kt = kappa * t.value();
    let th = (0.5 * kt).tanh();
    let arg = (kappa * th).sqrt() * spec.geometry.half();
    let ln_denom = 0.5 * (std::f64::consts::LN_2 + ln_sinh(kt) + th.ln());
    Ok(erfc(arg) * (-ln_denom).exp())
}

/// `Z_d = T^d - (T - Z_1)^d` with `T` the 1D whole-space trace, written as
/// `Z_1 sum_j T^j (T - Z_1)^{d-1-j}` to avoid cancellation.
pub fn z_term(t: TimePoint, spec: &DirichletOscillatorSpec, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    let z1 = z_term_1d(t, spec)?;
    let whole = trace_infinite(t, OscillatorParams::new(spec.kappa(), 1)?)?;
    let inside = whole - z1;
    Ok(z1 * (0..dim).map(|j| whole.powi(j as i32) * inside.powi((dim - 1 - j) as i32)).sum::<f64>())
}

/// Majorant for `Z_d` from `erfc(a) <= exp(-a^2)`.
///
/// The exterior of the cube is the union over coordinates of `|x_l| > L/2`,
/// so `Z_d <= d T^{d-1} Z_1`, giving
/// `d (2 sinh(kappa t/2))^{-d} exp(-kappa (L^2/4) tanh(kappa t/2))`.
/// For `d = 1` this is the classical Chernoff estimate.
pub fn z_term_chernoff_bound(t: TimePoint, spec: &DirichletOscillatorSpec, dim: usize) -> Result<f64> {
    let p = OscillatorParams::new(spec.kappa(), dim)?;
    Ok(dim as f64 * (ln_trace_infinite(t, p)? - z_exponent(t, spec)).exp())
}

/// The product-form estimate `(2 sinh(kappa t/2))^{-d} exp(-d kappa (L^2/4) tanh(kappa t/2))`.
///
/// This bounds the integral over the product of the 1D exteriors, not the
/// full cube exterior; it fails for `Z_d` once `d >= 2` and is kept so the
/// check suite can report that.
pub fn z_term_product_bound(t: TimePoint, spec: &DirichletOscillatorSpec, dim: usize) -> Result<f64> {
    let p = OscillatorParams::new(spec.kappa(), dim)?;
    Ok((ln_trace_infinite(t, p)? - dim as f64 * z_exponent(t, spec)).exp())
}

fn z_exponent(t: TimePoint, spec: &DirichletOscillatorSpec) -> f64 {
    let l = spec.side();
    spec.kappa() * 0.25 * l * l * (0.5 * spec.kappa() * t.value()).tanh()
}

/// `Tr_inf - Tr_L` split as `Y + Z`, with error bars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceDifference {
    pub delta: f64,
    pub y_term: f64,
    pub z_term: f64,
    pub err_delta: f64,
    pub err_y: f64,
    pub err_z: f64,
    /// `|delta| < 10 * err_delta`: the value is numerical noise.
    pub below_noise_floor: bool,
}

pub fn trace_difference(
    t: TimePoint,
    spec: &DirichletOscillatorSpec,
    dim: usize,
    tol: f64,
    disc: Discretization,
) -> Result<TraceDifference> {
    let spectrum = box_oscillator_eigs(spec, disc, disc.max_count())?;
    trace_difference_from_spectrum(t, &spectrum, spec, dim, tol)
}

pub fn trace_difference_from_spectrum(
    t: TimePoint,
    spectrum: &EigenSpectrum,
    spec: &DirichletOscillatorSpec,
    dim: usize,
    tol: f64,
) -> Result<TraceDifference> {
    let whole = trace_infinite(t, OscillatorParams::new(spec.kappa(), dim)?)?;
    let finite = trace_from_spectrum(t, spectrum, spec, dim, tol)?;
    let delta = whole - finite.value;
    let err_delta = finite.total_error() + 4.0 * f64::EPSILON * whole;
    let z = z_term(t, spec, dim)?;
    let err_z = 1e-14 * z;
    Ok(TraceDifference {
        delta,
        y_term: delta - z,
        z_term: z,
        err_delta,
        err_y: err_delta + err_z,
        err_z,
        below_noise_floor: delta.abs() < NOISE_FLOOR_FACTOR * err_delta,
    })
}

/// Directly integrated interior term with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YTermDirect {
    pub value: f64,
    pub error: f64,
}

/// `Y` for `d = 1` computed straight from its definition,
/// `int_{box} [G_inf(x, x; t) - G_L(x, x; t)] dx`.
///
/// For `kappa > 0` the box kernel diagonal is rebuilt from a dense grid
/// model on `grid` and `2 grid + 1` points (spacings exactly 1:2) and the
/// two diagonal integrals are Richardson-extrapolated; the Mehler part is
/// integrated by quadrature. For `kappa = 0` both kernels are exact and the
/// whole integrand is integrated by quadrature.
pub fn y_term_direct(t: TimePoint, spec: &DirichletOscillatorSpec, grid: usize) -> Result<YTermDirect> {
    let (tv, kappa, half) = (t.value(), spec.kappa(), spec.geometry.half());
    let breaks: Vec<f64> = (1..16).map(|k| -half + k as f64 * half / 8.0).collect();
    if kappa == 0.0 {
        let side = spec.side();
        let pref = 1.0 / (2.0 * std::f64::consts::PI * tv).sqrt();
        let q = integrate_with_breaks(
            |x| pref - box_kernel_1d(x, x, tv, side, ImageCutoff::Auto).value,
            -half,
            half,
            &breaks,
            1e-14,
        );
        let tail = box_kernel_1d(0.0, 0.0, tv, side, ImageCutoff::Auto).tail_bound;
        return Ok(YTermDirect { value: q.value, error: q.error + side * tail + 1e-13 });
    }
    let inner = integrate_with_breaks(|x| ln_mehler_kernel_1d(x, x, tv, kappa, 1.0).exp(), -half, half, &breaks, 1e-14);
    let coarse = oracle_diagonal_integral(&DenseGridModel::new(spec, grid)?, t);
    let fine = oracle_diagonal_integral(&DenseGridModel::new(spec, 2 * grid + 1)?, t);
    let box_integral = (4.0 * fine - coarse) / 3.0;
    Ok(YTermDirect {
        value: inner.value - box_integral,
        error: inner.error + (box_integral - fine).abs() / 3.0 + 1e-13,
    })
}

/// `L / sqrt(2 pi t) - sum_n exp(-t n^2 pi^2 / (2 L^2))` rewritten by Poisson
/// summation as `1/2 - (2 L / sqrt(2 pi t)) sum_{m >= 1} exp(-2 m^2 L^2 / t)`:
/// the exact interior term for the free (kappa = 0) box.
pub fn y_term_free_exact(t: TimePoint, side: f64) -> f64 {
    let tv = t.value();
    let mut s = 0.0;
    for m in 1..1000 {
        let term = (-2.0 * (m * m) as f64 * side * side / tv).exp();
        s += term;
        if term < 1e-18 * s || term == 0.0 {
            break;
        }
    }
    0.5 - 2.0 * side / (2.0 * std::f64::consts::PI * tv).sqrt() * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::box_eigenvalue_free;

    fn tp(t: f64) -> TimePoint {
        TimePoint::new(t).unwrap()
    }
    fn osc(k: f64, d: usize) -> OscillatorParams {
        OscillatorParams::new(k, d).unwrap()
    }
    fn spec(side: f64, kappa: f64) -> DirichletOscillatorSpec {
        DirichletOscillatorSpec::new(side, kappa).unwrap()
    }

    #[test]
    fn whole_space_trace_closed_form() {
        let v = trace_infinite(tp(1.0), osc(1.0, 1)).unwrap();
        let exact = 1.0 / (2.0 * 0.5f64.sinh());
        assert!((v - exact).abs() < 1e-15 * exact);
        let series: f64 = (0..=60).map(|s| (-(s as f64 + 0.5)).exp()).sum();
        assert!((series - exact).abs() < 1e-14 * exact);
        let v3 = trace_infinite(tp(1.0), osc(1.0, 3)).unwrap();
        assert!((v3 - exact.powi(3)).abs() < 1e-14 * v3);
        assert!(trace_infinite(tp(1.0), osc(0.0, 1)).is_err());
    }

    #[test]
    fn whole_space_trace_ground_state_dominance() {
        for t in [10.0, 30.0, 200.0] {
            let p = osc(1.0, 2);
            let scaled = (ln_trace_infinite(tp(t), p).unwrap() + p.ground_energy() * t).exp();
            assert!((scaled - 1.0).abs() < 3.0 * (-t).exp());
        }
    }

    #[test]
    fn free_box_trace_matches_analytic_series() {
        let s = spec(1.0, 0.0);
        let r = trace_finite(tp(1.0), &s, 1, 1e-12, Discretization::default()).unwrap();
        let exact: f64 = (1..50).map(|n| (-box_eigenvalue_free(n, s.geometry).unwrap()).exp()).sum();
        assert!((r.value - exact).abs() < 1e-9, "{} vs {}", r.value, exact);
        assert!((r.value - exact).abs() <= r.total_error());
    }

    #[test]
    fn large_box_trace_equals_whole_space() {
        let s = spec(30.0, 1.0);
        let r = trace_finite(tp(1.0), &s, 1, 1e-10, Discretization::default()).unwrap();
        let whole = trace_infinite(tp(1.0), osc(1.0, 1)).unwrap();
        assert!((r.value - whole).abs() < 1e-8, "{} vs {}", r.value, whole);
    }

    #[test]
    fn finite_trace_monotone_in_box_size() {
        let disc = Discretization::new(256).unwrap();
        let a = trace_finite(tp(1.0), &spec(4.0, 1.0), 1, 1e-10, disc).unwrap().value;
        let b = trace_finite(tp(1.0), &spec(8.0, 1.0), 1, 1e-10, disc).unwrap().value;
        let whole = trace_infinite(tp(1.0), osc(1.0, 1)).unwrap();
        assert!(a < b && b < whole);
    }

    #[test]
    fn unreachable_tolerance_is_refused() {
        // a tiny time needs far more eigenvalues than a 64-point grid offers
        let err = trace_finite(tp(1e-4), &spec(1.0, 1.0), 1, 1e-12, Discretization::new(64).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Refused(_)));
    }

    #[test]
    fn z_term_matches_quadrature_and_bound() {
        let s = spec(4.0, 1.0);
        let z = z_term(tp(1.0), &s, 1).unwrap();
        let q = crate::oracle::quadrature_z_term(4.0, 1.0, tp(1.0)).unwrap();
        assert!((z - q).abs() < 1e-10);
        assert!(z <= z_term_chernoff_bound(tp(1.0), &s, 1).unwrap());
        assert_eq!(z_term(tp(1.0), &spec(1e3, 1.0), 1).unwrap(), 0.0);
    }

    #[test]
    fn z_term_inclusion_exclusion() {
        let s = spec(2.5, 0.8);
        let (t, z1) = (tp(0.7), z_term(tp(0.7), &s, 1).unwrap());
        let whole = trace_infinite(t, osc(0.8, 1)).unwrap();
        for d in 2..=3 {
            let zd = z_term(t, &s, d).unwrap();
            let naive = whole.powi(d as i32) - (whole - z1).powi(d as i32);
            assert!((zd - naive).abs() < 1e-13 * zd);
            assert!(zd <= z_term_chernoff_bound(t, &s, d).unwrap());
            assert!(zd > z_term_product_bound(t, &s, d).unwrap());
        }
        assert_eq!(z_term_product_bound(t, &s, 1).unwrap(), z_term_chernoff_bound(t, &s, 1).unwrap());
    }

    #[test]
    fn difference_decomposition_at_small_box() {
        let d = trace_difference(tp(1.0), &spec(3.0, 1.0), 1, 1e-10, Discretization::default()).unwrap();
        assert!(!d.below_noise_floor);
        assert!(d.delta > 0.0);
        assert!((d.delta - d.y_term - d.z_term).abs() <= d.err_delta + d.err_y + d.err_z);
        assert!(d.y_term >= -d.err_y && d.z_term >= 0.0);
    }

    #[test]
    fn difference_at_huge_box_is_noise() {
        let d = trace_difference(tp(1.0), &spec(30.0, 1.0), 1, 1e-10, Discretization::default()).unwrap();
        assert!(d.below_noise_floor, "{d:?}");
    }

    #[test]
    fn difference_decreases_with_box_size() {
        let disc = Discretization::default();
        let deltas: Vec<f64> = [2.0, 3.0, 4.0, 5.0]
            .iter()
            .map(|&l| trace_difference(tp(1.0), &spec(l, 1.0), 1, 1e-10, disc).unwrap().delta)
            .collect();
        assert!(deltas.windows(2).all(|w| w[0] > w[1]), "{deltas:?}");
    }

    #[test]
    fn direct_interior_term_free_case() {
        for &(side, t) in &[(1.0, 0.2), (1.5, 1.0), (0.7, 2.0)] {
            let y = y_term_direct(tp(t), &spec(side, 0.0), 64).unwrap();
            let exact = y_term_free_exact(tp(t), side);
            assert!((y.value - exact).abs() < 1e-11 + y.error, "{} vs {}", y.value, exact);
            assert!(y.value >= 0.0);
        }
    }

    #[test]
    fn direct_interior_term_agrees_with_trace_pipeline() {
        let t = tp(1.0);
        let s = spec(3.0, 1.0);
        let direct = y_term_direct(t, &s, 255).unwrap();
        let pipeline = trace_difference(t, &s, 1, 1e-12, Discretization::default()).unwrap();
        assert!((direct.value - pipeline.y_term).abs() < 1e-6, "{direct:?} vs {pipeline:?}");
        assert!(direct.value >= -direct.error);
    }
}
