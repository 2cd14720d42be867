//! One-dimensional spectra: the exact whole-line oscillator, the exact
//! Dirichlet Laplacian, and the Dirichlet oscillator in a box computed by
//! second-order finite differences with Richardson extrapolation.

use crate::error::{domain, Error, Result};
use crate::kernels::BoxGeometry;
use crate::tridiag::symmetric_tridiagonal_eigenvalues;

/// Default number of interior grid points for the coarse grid.
pub const DEFAULT_GRID: usize = 1024;

/// Extrapolations whose error estimate exceeds this fraction of the value are flagged.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-4;

/// `H = -1/2 d^2/dx^2 + kappa^2 x^2 / 2` on `(-L/2, L/2)` with Dirichlet walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletOscillatorSpec {
    pub geometry: BoxGeometry,
    kappa: f64,
}

impl DirichletOscillatorSpec {
    pub fn new(side: f64, kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return domain(format!("kappa must be finite and >= 0, got {kappa}"));
        }
        Ok(Self { geometry: BoxGeometry::new(side)?, kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn side(&self) -> f64 {
        self.geometry.side()
    }
}

/// Central second-order differences on `n` interior points, `h = L / (n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discretization {
    n: usize,
}

impl Discretization {
    pub fn new(n: usize) -> Result<Self> {
        if n < 64 || !n.is_power_of_two() {
            return domain(format!("grid size must be a power of two >= 64, got {n}"));
        }
        Ok(Self { n })
    }

    pub fn points(&self) -> usize {
        self.n
    }

    /// Largest number of eigenvalues the grid is trusted to resolve.
    pub fn max_count(&self) -> usize {
        self.n / 4
    }
}

impl Default for Discretization {
    fn default() -> Self {
        Self { n: DEFAULT_GRID }
    }
}

/// Ascending eigenvalues with per-value error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Coarse grid size used for the extrapolation.
    pub grid: usize,
    /// Indices whose error estimate exceeds `CONVERGENCE_THRESHOLD * value`.
    pub unconverged: Vec<usize>,
}

impl EigenSpectrum {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn is_converged(&self) -> bool {
        self.unconverged.is_empty()
    }

    /// Lowest eigenvalue minus its error bar: a safe lower estimate of `inf spec`.
    pub fn lower_ground(&self) -> f64 {
        self.values[0] - self.errors[0]
    }
}

/// `kappa (s + 1/2)`.
pub fn ho_eigenvalue(s: usize, kappa: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return domain(format!("kappa must be > 0, got {kappa}"));
    }
    Ok(kappa * (s as f64 + 0.5))
}

/// Eigenvalue of the `d`-dimensional oscillator with quantum numbers `s`.
pub fn ho_eigenvalue_multi(s: &[usize], kappa: f64) -> Result<f64> {
    crate::kernels::check_dim(s.len())?;
    s.iter().map(|&q| ho_eigenvalue(q, kappa)).sum()
}

/// `n^2 pi^2 / (2 L^2)`, the Dirichlet Laplacian (kappa = 0) eigenvalues, `n >= 1`.
pub fn box_eigenvalue_free(n: usize, geometry: BoxGeometry) -> Result<f64> {
    if n == 0 {
        return domain("box eigenvalue index starts at 1");
    }
    let k = n as f64 * std::f64::consts::PI / geometry.side();
    Ok(0.5 * k * k)
}

/// Lowest `count` eigenvalues of the finite-difference matrix on `n` interior points.
pub fn fd_eigenvalues(spec: &DirichletOscillatorSpec, n: usize, count: usize) -> Result<Vec<f64>> {
    let h = spec.side() / (n + 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    let k2 = spec.kappa() * spec.kappa();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let x = -spec.geometry.half() + (i + 1) as f64 * h;
            inv_h2 + 0.5 * k2 * x * x
        })
        .collect();
    let off = vec![-0.5 * inv_h2; n - 1];
    let mut all = symmetric_tridiagonal_eigenvalues(&diag, &off)?;
    all.truncate(count);
    Ok(all)
}

/// Richardson-extrapolated lowest eigenvalues from grids `n` and `2n`.
///
/// With `h = L/(n+1)` the two spacings are not exactly in ratio 2; the
/// extrapolation uses the exact ratio. The error estimate is
/// `|extrapolated - fine| / 3`.
pub fn box_oscillator_eigs(spec: &DirichletOscillatorSpec, disc: Discretization, count: usize) -> Result<EigenSpectrum> {
    let n = disc.points();
    if count == 0 {
        return domain("eigenvalue count must be >= 1");
    }
    if count > disc.max_count() {
        return Err(Error::Refused(format!(
            "{count} eigenvalues requested but a grid of {n} points resolves at most {}; use a larger grid",
            disc.max_count()
        )));
    }
    let coarse = fd_eigenvalues(spec, n, count)?;
    let fine = fd_eigenvalues(spec, 2 * n, count)?;
    let ratio = (2 * n + 1) as f64 / (n + 1) as f64;
    let r2 = ratio * ratio;
    let mut values = Vec::with_capacity(count);
    let mut errors = Vec::with_capacity(count);
    let mut unconverged = Vec::new();
    for (k, (c, f)) in coarse.iter().zip(&fine).enumerate() {
        let v = (r2 * f - c) / (r2 - 1.0);
        let err = (v - f).abs() / 3.0;
        if err > CONVERGENCE_THRESHOLD * v.abs() {
            unconverged.push(k);
        }
        values.push(v);
        errors.push(err);
    }
    Ok(EigenSpectrum { values, errors, grid: n, unconverged })
}
