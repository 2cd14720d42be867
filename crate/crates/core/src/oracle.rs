//! Brute-force reference computations, deliberately independent of the
//! production pipeline: dense finite-difference Hamiltonians diagonalized
//! with a general symmetric eigensolver, kernel diagonals rebuilt from grid
//! eigenvectors, and the exterior Mehler integral by plain quadrature.
//!
//! Dense decompositions are memory-heavy (a 48 x 48 two-dimensional grid is
//! a 2304 x 2304 matrix); callers should not run many of them at once.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Result};
use crate::kernels::{ln_mehler_kernel_1d, TimePoint};
use crate::quad::integrate_with_breaks;
use crate::spectrum::DirichletOscillatorSpec;

pub const MAX_POINTS_1D: usize = 2048;
pub const MAX_POINTS_PER_AXIS_2D: usize = 48;

/// Fully diagonalized finite-difference model of the 1D box oscillator.
#[derive(Debug, Clone)]
pub struct DenseGridModel {
    pub spec: DirichletOscillatorSpec,
    nodes: Vec<f64>,
    h: f64,
    /// Ascending eigenvalues.
    values: Vec<f64>,
    /// Columns are Euclidean-orthonormal eigenvectors matching `values`.
    vectors: DMatrix<f64>,
}

impl DenseGridModel {
    pub fn new(spec: &DirichletOscillatorSpec, n: usize) -> Result<Self> {
        if !(2..=MAX_POINTS_1D).contains(&n) {
            return domain(format!("dense 1D model needs 2..={MAX_POINTS_1D} points, got {n}"));
        }
        let h = spec.side() / (n + 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| -spec.geometry.half() + (i + 1) as f64 * h).collect();
        let k2 = spec.kappa() * spec.kappa();
        let inv_h2 = 1.0 / (h * h);
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (i, x) in nodes.iter().enumerate() {
            m[(i, i)] = inv_h2 + 0.5 * k2 * x * x;
            if i + 1 < n {
                m[(i, i + 1)] = -0.5 * inv_h2;
                m[(i + 1, i)] = -0.5 * inv_h2;
            }
        }
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(Self { spec: *spec, nodes, h, values, vectors })
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// `max |h U^T U - I|` for grid eigenfunctions `U = V / sqrt(h)`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.values.len();
        let gram = self.vectors.transpose() * &self.vectors;
        (gram - DMatrix::<f64>::identity(n, n)).abs().max()
    }

    /// `sum_k exp(-t eps_k)` over all grid eigenvalues.
    pub fn trace(&self, t: TimePoint) -> f64 {
        self.values.iter().map(|e| (-t.value() * e).exp()).sum()
    }
}

/// Kernel diagonal `G_L(x_i, x_i; t) = sum_k exp(-t eps_k) v_k(x_i)^2 / h` on the grid nodes.
pub fn oracle_kernel_diag(model: &DenseGridModel, t: TimePoint) -> Vec<f64> {
    let weights = DVector::from_iterator(model.values.len(), model.values.iter().map(|e| (-t.value() * e).exp()));
    let squared = model.vectors.map(|v| v * v);
    (squared * weights / model.h).iter().copied().collect()
}

/// Trapezoid integral of the reconstructed diagonal (the wall values are zero).
pub fn oracle_diagonal_integral(model: &DenseGridModel, t: TimePoint) -> f64 {
    oracle_kernel_diag(model, t).iter().sum::<f64>() * model.h
}

/// Trace of the dense 2D finite-difference model on an `n x n` interior grid.
pub fn oracle_trace_2d(side: f64, kappa: f64, t: TimePoint, n: usize) -> Result<f64> {
    if !(2..=MAX_POINTS_PER_AXIS_2D).contains(&n) {
        return domain(format!("2D oracle needs 2..={MAX_POINTS_PER_AXIS_2D} points per axis, got {n}"));
    }
    let spec = DirichletOscillatorSpec::new(side, kappa)?;
    let h = spec.side() / (n + 1) as f64;
    let x = |i: usize| -spec.geometry.half() + (i + 1) as f64 * h;
    let inv_h2 = 1.0 / (h * h);
    let k2 = kappa * kappa;
    let dim = n * n;
    let idx = |i: usize, j: usize| i * n + j;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            let p = idx(i, j);
            m[(p, p)] = 2.0 * inv_h2 + 0.5 * k2 * (x(i) * x(i) + x(j) * x(j));
            if i + 1 < n {
                let q = idx(i + 1, j);
                m[(p, q)] = -0.5 * inv_h2;
                m[(q, p)] = -0.5 * inv_h2;
            }
            if j + 1 < n {
                let q = idx(i, j + 1);
                m[(p, q)] = -0.5 * inv_h2;
                m[(q, p)] = -0.5 * inv_h2;
            }
        }
    }
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    // summed smallest-first in eigenvalue order for reproducibility
    Ok(values.iter().map(|e| (-t.value() * e).exp()).sum())
}

/// A quantity computed on several grids and extrapolated to `h -> 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolated {
    pub value: f64,
    /// `(n, h, value on that grid)` for each grid used.
    pub samples: Vec<(usize, f64, f64)>,
}

/// Fit `T(h) = T0 + c1 h^2 + ... + c_{m-1} h^{2(m-1)}` through the samples and return `T0`.
pub fn extrapolate_in_h_squared(samples: &[(f64, f64)]) -> f64 {
    let m = samples.len();
    assert!(m > 0);
    let a = DMatrix::from_fn(m, m, |i, j| samples[i].0.powi(2 * j as i32));
    let b = DVector::from_iterator(m, samples.iter().map(|s| s.1));
    let sol = a.lu().solve(&b).expect("distinct grid spacings");
    sol[0]
}

/// 2D oracle trace on each grid, extrapolated in `h^2`.
pub fn oracle_trace_2d_extrapolated(side: f64, kappa: f64, t: TimePoint, grids: &[usize]) -> Result<Extrapolated> {
    let mut samples = Vec::with_capacity(grids.len());
    for &n in grids {
        let h = side / (n + 1) as f64;
        samples.push((n, h, oracle_trace_2d(side, kappa, t, n)?));
    }
    let fit: Vec<(f64, f64)> = samples.iter().map(|s| (s.1, s.2)).collect();
    Ok(Extrapolated { value: extrapolate_in_h_squared(&fit), samples })
}

/// `int_{|x| > L/2} G_inf(x, x; t) dx` by adaptive quadrature of the Mehler diagonal.
pub fn quadrature_z_term(side: f64, kappa: f64, t: TimePoint) -> Result<f64> {
    if !(side.is_finite() && side >= 0.0) {
        return domain(format!("side must be finite and >= 0, got {side}"));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return domain(format!("kappa must be > 0, got {kappa}"));
    }
    let tv = t.value();
    let width = 1.0 / (kappa * (0.5 * kappa * tv).tanh()).sqrt();
    let lo = 0.5 * side;
    let hi = lo.max(0.0) + 40.0 * width;
    let breaks: Vec<f64> = (1..40).map(|k| lo + k as f64 * width).collect();
    let q = integrate_with_breaks(|x| ln_mehler_kernel_1d(x, x, tv, kappa, 1.0).exp(), lo, hi, &breaks, 1e-15);
    Ok(2.0 * q.value)
}
