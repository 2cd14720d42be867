//! Ideal Bose gas in a harmonic trap, confined or not to a Dirichlet cube:
//! single-particle partition functions, the grand-canonical mean particle
//! number, and the finite-size corrections to both.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::fit::least_squares_line;
use crate::kernels::{check_dim, OscillatorParams, TimePoint};
use crate::spectrum::{box_oscillator_eigs, Discretization, DirichletOscillatorSpec, EigenSpectrum};
use crate::traces::{trace_from_spectrum, TraceReport, NOISE_FLOOR_FACTOR};

/// Series are abandoned (as non-convergent in practice) beyond this many terms.
pub const MAX_SERIES_TERMS: usize = 100_000;

/// Minimum number of usable ladder points for a finite-size fit.
pub const MIN_SCAN_POINTS: usize = 3;

/// Inverse temperature and fugacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    beta: f64,
    z: f64,
}

impl EnsembleParams {
    pub fn new(beta: f64, z: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return domain(format!("beta must be finite and > 0, got {beta}"));
        }
        if !(z.is_finite() && z > 0.0) {
            return domain(format!("fugacity must be finite and > 0, got {z}"));
        }
        Ok(Self { beta, z })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Chemical potential `ln(z) / beta`.
    pub fn mu(&self) -> f64 {
        self.z.ln() / self.beta
    }
}

/// Where the gas lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Volume {
    Box(DirichletOscillatorSpec),
    WholeSpace,
}

/// Truncated series for the mean particle number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberSeriesReport {
    pub value: f64,
    pub terms_used: usize,
    /// Bound on the omitted terms.
    pub tail_bound: f64,
    /// Accumulated error of the partition functions entering the kept terms.
    pub term_error: f64,
}

impl NumberSeriesReport {
    pub fn total_error(&self) -> f64 {
        self.tail_bound + self.term_error
    }
}

/// `Phi_L(beta)`, the trace of the semigroup in the cube at time `beta`.
pub fn partition_finite(
    beta: f64,
    spec: &DirichletOscillatorSpec,
    dim: usize,
    tol: f64,
    disc: Discretization,
) -> Result<TraceReport> {
    if spec.kappa() <= 0.0 {
        return domain("partition function needs kappa > 0");
    }
    crate::traces::trace_finite(TimePoint::new(beta)?, spec, dim, tol, disc)
}

/// `Phi_inf(beta) = exp(-beta E0) / (1 - exp(-beta kappa))^d`, `E0 = d kappa / 2`.
pub fn partition_infinite(beta: f64, p: OscillatorParams) -> Result<f64> {
    crate::traces::trace_infinite_geometric(TimePoint::new(beta)?, p)
}

/// A single-particle partition function `l -> Phi(l beta)` with a lower bound
/// on the spectrum it sums over.
enum PartitionSource<'a> {
    Spectrum { spectrum: &'a EigenSpectrum, spec: &'a DirichletOscillatorSpec, tol: f64 },
    Closed(OscillatorParams),
}

impl PartitionSource<'_> {
    /// `(value, error)` of `Phi(time)`.
    fn eval(&self, time: f64, dim: usize) -> Result<(f64, f64)> {
        let t = TimePoint::new(time)?;
        match self {
            PartitionSource::Spectrum { spectrum, spec, tol } => {
                let r = trace_from_spectrum(t, spectrum, spec, dim, *tol)?;
                Ok((r.value, r.total_error()))
            }
            PartitionSource::Closed(p) => Ok((partition_infinite(time, *p)?, 0.0)),
        }
    }

    /// Lower bound for the d-dimensional ground energy.
    fn ground_lower(&self, dim: usize) -> f64 {
        match self {
            PartitionSource::Spectrum { spectrum, .. } => dim as f64 * spectrum.lower_ground(),
            PartitionSource::Closed(p) => p.ground_energy(),
        }
    }
}

/// `sum_{l >= 1} z^l Phi(l beta)`.
///
/// The tail uses `Phi(l beta) <= exp(-(l - 1) beta E) Phi(beta)` with `E` a
/// lower bound on the ground energy, which gives a geometric series of ratio
/// `z exp(-beta E)`.
fn number_series(ens: EnsembleParams, source: &PartitionSource, dim: usize, tol: f64) -> Result<NumberSeriesReport> {
    let e_min = source.ground_lower(dim);
    let (beta, z) = (ens.beta(), ens.z());
    let ln_q = z.ln() - beta * e_min;
    if ln_q >= 0.0 {
        return domain(format!(
            "fugacity {z} outside the convergence region z < exp(beta * inf spec) = {:e}",
            (beta * e_min).exp()
        ));
    }
    let q = ln_q.exp();
    let (phi1, err1) = source.eval(beta, dim)?;
    let lead = (phi1 + err1) * (beta * e_min).exp();
    let mut value = 0.0;
    let mut term_error = 0.0;
    for l in 1..=MAX_SERIES_TERMS {
        let (phi, err) = if l == 1 { (phi1, err1) } else { source.eval(l as f64 * beta, dim)? };
        let zl = (l as f64 * z.ln()).exp();
        value += zl * phi;
        term_error += zl * err;
        // sum_{k > l} q^k lead
        let tail = lead * (l as f64 * ln_q).exp() * q / (1.0 - q);
        if tail < tol {
            return Ok(NumberSeriesReport { value, terms_used: l, tail_bound: tail, term_error });
        }
    }
    Err(Error::Refused(format!("series tail still above {tol:e} after {MAX_SERIES_TERMS} terms; z is too close to the edge")))
}

/// Grand-canonical mean particle number `sum_l z^l Phi(l beta)`.
pub fn avg_number(
    ens: EnsembleParams,
    volume: Volume,
    kappa: f64,
    dim: usize,
    tol: f64,
    disc: Discretization,
) -> Result<NumberSeriesReport> {
    check_dim(dim)?;
    if !(tol.is_finite() && tol > 0.0) {
        return domain(format!("tolerance must be > 0, got {tol}"));
    }
    match volume {
        Volume::WholeSpace => number_series(ens, &PartitionSource::Closed(OscillatorParams::new(kappa, dim)?), dim, tol),
        Volume::Box(spec) => {
            if spec.kappa() != kappa {
                return domain("box spec and kappa disagree");
            }
            let spectrum = box_oscillator_eigs(&spec, disc, disc.max_count())?;
            number_series(ens, &PartitionSource::Spectrum { spectrum: &spectrum, spec: &spec, tol: tol.min(1e-10) }, dim, tol)
        }
    }
}

/// One rung of the box-size ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub side: f64,
    pub phi: f64,
    /// `Phi_inf - Phi_L`.
    pub phi_diff: f64,
    pub phi_err: f64,
    pub number: f64,
    /// `N_inf - N_L`.
    pub number_diff: f64,
    pub number_err: f64,
}

impl ScanPoint {
    pub fn phi_usable(&self) -> bool {
        self.phi_diff.abs() >= NOISE_FLOOR_FACTOR * self.phi_err && self.phi_diff > 0.0
    }

    pub fn number_usable(&self) -> bool {
        self.number_diff.abs() >= NOISE_FLOOR_FACTOR * self.number_err && self.number_diff > 0.0
    }
}

/// Fit of `-ln(diff)` against `L^2`, with the competing fit against `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    /// Slope against `L^2`: the constant `c` in `O(exp(-c L^2))`.
    pub c: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub residual_rms_linear_in_side: f64,
    pub points_used: usize,
}

impl ScalingFit {
    pub fn gaussian_preferred(&self) -> bool {
        self.residual_rms < self.residual_rms_linear_in_side
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSizeReport {
    pub phi_infinite: f64,
    pub number_infinite: f64,
    pub points: Vec<ScanPoint>,
    pub phi_fit: ScalingFit,
    pub number_fit: ScalingFit,
}

fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < MIN_SCAN_POINTS {
        return Err(Error::InsufficientPoints { needed: MIN_SCAN_POINTS, got: points.len() });
    }
    let ys: Vec<f64> = points.iter().map(|p| -p.1.ln()).collect();
    let sq: Vec<f64> = points.iter().map(|p| p.0 * p.0).collect();
    let lin: Vec<f64> = points.iter().map(|p| p.0).collect();
    let a = least_squares_line(&sq, &ys)?;
    let b = least_squares_line(&lin, &ys)?;
    Ok(ScalingFit {
        c: a.slope,
        intercept: a.intercept,
        residual_rms: a.residual_rms,
        residual_rms_linear_in_side: b.residual_rms,
        points_used: points.len(),
    })
}

/// Finite-size corrections of `Phi` and `N` along a ladder of box sides.
///
/// Points whose difference is below ten times its error are excluded from
/// the fits; if too few remain the scan is refused.
pub fn finite_size_scan(
    ens: EnsembleParams,
    kappa: f64,
    dim: usize,
    ladder: &[f64],
    tol: f64,
    disc: Discretization,
) -> Result<FiniteSizeReport> {
    let p = OscillatorParams::new(kappa, dim)?;
    let phi_inf = partition_infinite(ens.beta(), p)?;
    let n_inf = avg_number(ens, Volume::WholeSpace, kappa, dim, tol, disc)?;
    let points: Vec<ScanPoint> = ladder
        .par_iter()
        .map(|&side| -> Result<ScanPoint> {
            let spec = DirichletOscillatorSpec::new(side, kappa)?;
            let phi = partition_finite(ens.beta(), &spec, dim, tol.min(1e-10), disc)?;
            let n = avg_number(ens, Volume::Box(spec), kappa, dim, tol, disc)?;
            Ok(ScanPoint {
                side,
                phi: phi.value,
                phi_diff: phi_inf - phi.value,
                phi_err: phi.total_error() + 4.0 * f64::EPSILON * phi_inf,
                number: n.value,
                number_diff: n_inf.value - n.value,
                number_err: n.total_error() + n_inf.total_error() + 4.0 * f64::EPSILON * n_inf.value,
            })
        })
        .collect::<Result<_>>()?;
    let phi_pts: Vec<(f64, f64)> = points.iter().filter(|s| s.phi_usable()).map(|s| (s.side, s.phi_diff)).collect();
    let n_pts: Vec<(f64, f64)> = points.iter().filter(|s| s.number_usable()).map(|s| (s.side, s.number_diff)).collect();
    if phi_pts.is_empty() && n_pts.is_empty() {
        return Err(Error::Refused(
            "every ladder point is below the noise floor; use smaller boxes or a finer grid".into(),
        ));
    }
    Ok(FiniteSizeReport {
        phi_infinite: phi_inf,
        number_infinite: n_inf.value,
        phi_fit: scaling_fit(&phi_pts)?,
        number_fit: scaling_fit(&n_pts)?,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ens(beta: f64, z: f64) -> EnsembleParams {
        EnsembleParams::new(beta, z).unwrap()
    }

    #[test]
    fn infinite_partition_function() {
        let v = partition_infinite(1.0, OscillatorParams::new(1.0, 1).unwrap()).unwrap();
        assert!((v - (-0.5f64).exp() / (1.0 - (-1f64).exp())).abs() < 1e-16);
        assert!((v - 1.0 / (2.0 * 0.5f64.sinh())).abs() < 1e-15);
        let v3 = partition_infinite(1.0, OscillatorParams::new(1.0, 3).unwrap()).unwrap();
        assert!((v3 - v.powi(3)).abs() < 1e-14 * v3);
        let big = partition_infinite(50.0, OscillatorParams::new(1.0, 2).unwrap()).unwrap();
        assert!((big * (50f64).exp() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn finite_partition_function() {
        let spec = DirichletOscillatorSpec::new(30.0, 1.0).unwrap();
        let disc = Discretization::default();
        let v = partition_finite(1.0, &spec, 1, 1e-10, disc).unwrap().value;
        assert!((v - 1.0 / (2.0 * 0.5f64.sinh())).abs() < 1e-8);
        let v3 = partition_finite(1.0, &spec, 3, 1e-10, disc).unwrap().value;
        assert!((v3 - v.powi(3)).abs() < 1e-13);
        let later = partition_finite(1.5, &spec, 1, 1e-10, disc).unwrap().value;
        assert!(later < v);
    }

    #[test]
    fn whole_space_number_matches_direct_sum() {
        let r = avg_number(ens(1.0, 0.3), Volume::WholeSpace, 1.0, 1, 1e-12, Discretization::default()).unwrap();
        let direct: f64 = (1..=200).map(|l| 0.3f64.powi(l) * (-0.5 * l as f64).exp() / (1.0 - (-(l as f64)).exp())).sum();
        assert!((r.value - direct).abs() < 1e-12, "{} vs {direct}", r.value);
        assert!(r.tail_bound < 1e-12);
    }

    #[test]
    fn small_fugacity_leading_term() {
        let z = 1e-6;
        let r = avg_number(ens(1.0, z), Volume::WholeSpace, 1.0, 2, 1e-18, Discretization::default()).unwrap();
        let phi = partition_infinite(1.0, OscillatorParams::new(1.0, 2).unwrap()).unwrap();
        assert!((r.value - z * phi).abs() < 2.0 * z * z * phi);
    }

    #[test]
    fn divergent_fugacity_is_rejected() {
        // exp(beta d kappa / 2) = exp(0.5)
        let err = avg_number(ens(1.0, 1.7), Volume::WholeSpace, 1.0, 1, 1e-12, Discretization::default()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        // the box pushes the ground state up, so the same z converges there
        let spec = DirichletOscillatorSpec::new(2.0, 1.0).unwrap();
        assert!(avg_number(ens(1.0, 1.7), Volume::Box(spec), 1.0, 1, 1e-12, Discretization::new(256).unwrap()).is_ok());
    }

    #[test]
    fn number_is_monotone_in_fugacity_and_box() {
        let disc = Discretization::new(256).unwrap();
        let n = |z: f64, side: f64| {
            let spec = DirichletOscillatorSpec::new(side, 1.0).unwrap();
            avg_number(ens(1.0, z), Volume::Box(spec), 1.0, 1, 1e-12, disc).unwrap().value
        };
        assert!(n(0.2, 3.0) < n(0.3, 3.0) && n(0.3, 3.0) < n(0.5, 3.0));
        assert!(n(0.3, 2.0) < n(0.3, 3.0) && n(0.3, 3.0) < n(0.3, 4.0));
    }

    #[test]
    fn scan_fits_a_gaussian() {
        let r = finite_size_scan(ens(1.0, 0.3), 1.0, 1, &[2.0, 3.0, 4.0, 5.0], 1e-12, Discretization::default()).unwrap();
        assert!(r.phi_fit.c > 0.0 && r.number_fit.c > 0.0, "{r:?}");
        assert!(r.phi_fit.gaussian_preferred() && r.number_fit.gaussian_preferred());
        assert!(r.points.windows(2).all(|w| w[0].number_diff > w[1].number_diff));
    }

    #[test]
    fn scan_of_huge_boxes_is_refused() {
        let err = finite_size_scan(ens(1.0, 0.3), 1.0, 1, &[28.0, 30.0], 1e-12, Discretization::default()).unwrap_err();
        assert!(matches!(err, Error::Refused(_)));
    }
}
