//! Randomized checks of the hyperbolic identities, the exponential absorption
//! inequality, the Gaussian convolution formula and the (widened) semigroup
//! property of the Mehler kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::kernels::hyperbolic::{
    coth, coth_bounds, coth_half_angle, coth_sum, exp_absorption, sinh_doubling, tanh_sum, tanh_sum_lower_bound, Sides,
};
use crate::kernels::{gaussian_product_integral, ln_heat_kernel_1d, ln_mehler_kernel_1d};
use crate::quad::integrate_with_breaks;

/// Relative tolerance for identities that hold exactly in real arithmetic.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Relative tolerance for the quadrature-based semigroup checks.
pub const SEMIGROUP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equality,
    Inequality,
}

/// Worst case of one relation over the random sample.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub relation: Relation,
    pub samples: usize,
    /// Equalities: largest relative gap. Inequalities: largest `(lhs - rhs) / scale`,
    /// negative when every sample holds strictly.
    pub worst: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub seed: u64,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

struct Tally {
    name: &'static str,
    relation: Relation,
    samples: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str, relation: Relation) -> Self {
        let worst = match relation {
            Relation::Equality => 0.0,
            Relation::Inequality => f64::NEG_INFINITY,
        };
        Self { name, relation, samples: 0, worst }
    }

    fn push(&mut self, s: Sides) {
        self.samples += 1;
        let v = match self.relation {
            Relation::Equality => s.relative_gap(),
            Relation::Inequality => {
                let scale = s.lhs.abs().max(s.rhs.abs()).max(1.0);
                (s.lhs - s.rhs) / scale
            }
        };
        self.worst = self.worst.max(v);
    }

    fn finish(self) -> IdentityCheck {
        let passed = self.worst <= IDENTITY_TOL;
        IdentityCheck { name: self.name, relation: self.relation, samples: self.samples, worst: self.worst, passed }
    }
}

/// Run every hyperbolic identity and inequality on `samples` random points.
pub fn check_identities(seed: u64, samples: usize) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut id1 = Tally::new("Id1", Relation::Equality);
    let mut id2 = Tally::new("Id2", Relation::Equality);
    let mut id3 = Tally::new("Id3", Relation::Equality);
    let mut id5 = Tally::new("Id5", Relation::Equality);
    let mut id5_lower = Tally::new("Id5-lower", Relation::Inequality);
    let mut ek4_lower = Tally::new("Ek4-lower", Relation::Inequality);
    let mut ek4_upper = Tally::new("Ek4-upper", Relation::Inequality);
    let mut redexp = Tally::new("redexp", Relation::Inequality);
    for _ in 0..samples {
        let alpha = log_uniform(&mut rng, 1e-3, 10.0);
        let t = log_uniform(&mut rng, 1e-2, 10.0);
        let s = t * rng.random_range(0.01..0.99);
        id1.push(sinh_doubling(alpha, t));
        id2.push(coth_half_angle(alpha, t));
        id3.push(coth_sum(alpha, t, s));
        id5.push(tanh_sum(alpha, t, s));
        id5_lower.push(tanh_sum_lower_bound(alpha, t, s));
        let (lo, hi) = coth_bounds(log_uniform(&mut rng, 1e-3, 30.0));
        ek4_lower.push(lo);
        ek4_upper.push(hi);
        let mu = rng.random_range(0.1..5.0);
        let nu = rng.random_range(0.1..5.0);
        let x = rng.random_range(0.0..50.0);
        redexp.push(exp_absorption(mu, nu, x));
    }
    let checks = [id1, id2, id3, id5, id5_lower, ek4_lower, ek4_upper, redexp].into_iter().map(Tally::finish).collect();
    IdentityReport { seed, checks }
}

/// Widened semigroup property at one widening factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupCheck {
    pub gamma: f64,
    pub configs: usize,
    /// Largest relative error of quadrature against `gamma^{d/2} G(x, y; t, gamma)`, over d = 1, 2, 3.
    pub max_quadrature_error: f64,
    /// Largest relative error of the closed-form Gaussian product against the same target.
    pub max_closed_form_error: f64,
    /// The convolution equals the kernel times exactly `gamma^{d/2}`.
    pub prefactor_confirmed: bool,
    pub passed: bool,
}

/// `int G(x, z; t - u, gamma) G(z, y; u, gamma) dz / G(x, y; t, gamma)` by quadrature.
fn convolution_ratio(x: f64, y: f64, t: f64, u: f64, kappa: f64, gamma: f64) -> f64 {
    let target = ln_mehler_kernel_1d(x, y, t, kappa, gamma);
    let width = |s: f64| (gamma / (kappa * coth(kappa * s))).sqrt();
    let w = width(t - u).min(width(u));
    let reach = x.abs().max(y.abs()) + 40.0 * width(t - u).max(width(u));
    let breaks: Vec<f64> = (-400..=400).map(|k| k as f64 * w).filter(|b| b.abs() < reach).collect();
    integrate_with_breaks(
        |z| (ln_mehler_kernel_1d(x, z, t - u, kappa, gamma) + ln_mehler_kernel_1d(z, y, u, kappa, gamma) - target).exp(),
        -reach,
        reach,
        &breaks,
        1e-13,
    )
    .value
}

/// `convolution_ratio` from the closed-form Gaussian product integral.
fn closed_form_ratio(x: f64, y: f64, t: f64, u: f64, kappa: f64, gamma: f64) -> Result<f64> {
    let q = kappa / (4.0 * gamma);
    let (h1, h2) = (0.5 * kappa * (t - u), 0.5 * kappa * u);
    let ln_pref = |s: f64| 0.5 * (kappa / (2.0 * std::f64::consts::PI * (kappa * s).sinh())).ln();
    let integral = gaussian_product_integral(q * h1.tanh(), q * coth(h1), q * h2.tanh(), q * coth(h2), x, y)?;
    let target = ln_mehler_kernel_1d(x, y, t, kappa, gamma);
    Ok((ln_pref(t - u) + ln_pref(u) + integral.ln() - target).exp())
}

/// Check the widened semigroup property on `configs` random configurations per `gamma`.
///
/// Each configuration draws a point pair in three dimensions; the 1D
/// convolutions are combined into the d = 1, 2, 3 identities.
pub fn check_semigroup(seed: u64, configs: usize, gammas: &[f64]) -> Result<Vec<SemigroupCheck>> {
    let mut out = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut quad_err, mut closed_err) = (0.0f64, 0.0f64);
        let mut prefactor_confirmed = true;
        for _ in 0..configs {
            let kappa = log_uniform(&mut rng, 0.3, 3.0);
            let t = log_uniform(&mut rng, 0.2, 3.0);
            let u = t * rng.random_range(0.1..0.9);
            let mut product = 1.0;
            for d in 1..=3 {
                let x = rng.random_range(-2.0..2.0);
                let y = rng.random_range(-2.0..2.0);
                let expected = gamma.powf(0.5 * d as f64);
                product *= convolution_ratio(x, y, t, u, kappa, gamma);
                let closed = closed_form_ratio(x, y, t, u, kappa, gamma)?;
                closed_err = closed_err.max((closed / gamma.sqrt() - 1.0).abs());
                quad_err = quad_err.max((product / expected - 1.0).abs());
                if gamma != 1.0 {
                    // recover the exponent of gamma from the data
                    let exponent = product.ln() / gamma.ln();
                    prefactor_confirmed &= (exponent - 0.5 * d as f64).abs() < SEMIGROUP_TOL;
                }
            }
        }
        prefactor_confirmed &= quad_err < SEMIGROUP_TOL;
        out.push(SemigroupCheck {
            gamma,
            configs,
            max_quadrature_error: quad_err,
            max_closed_form_error: closed_err,
            prefactor_confirmed,
            passed: quad_err < SEMIGROUP_TOL && closed_err < SEMIGROUP_TOL && prefactor_confirmed,
        });
    }
    Ok(out)
}

/// `int heat(x, z; t - u) heat(z, y; u) dz / heat(x, y; t)` by quadrature.
pub fn heat_semigroup_ratio(x: f64, y: f64, t: f64, u: f64) -> f64 {
    let target = ln_heat_kernel_1d(x, y, t);
    let w = u.min(t - u).sqrt();
    let reach = x.abs().max(y.abs()) + 40.0 * t.sqrt();
    let breaks: Vec<f64> = (-400..=400).map(|k| k as f64 * w).filter(|b| b.abs() < reach).collect();
    integrate_with_breaks(
        |z| (ln_heat_kernel_1d(x, z, t - u) + ln_heat_kernel_1d(z, y, u) - target).exp(),
        -reach,
        reach,
        &breaks,
        1e-13,
    )
    .value
}
