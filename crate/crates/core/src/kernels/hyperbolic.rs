//! Hyperbolic helpers and the identities/inequalities the kernel estimates rest on.
//!
//! Each identity is exposed as a pair of independently evaluated sides so the
//! check suite can assert agreement to rounding; inequalities return both
//! sides with the convention `lhs <= rhs`.

use std::f64::consts::LN_2;

/// `ln(sinh(a))` for `a > 0`, finite for arbitrarily large `a`.
pub fn ln_sinh(a: f64) -> f64 {
    if a < 20.0 {
        a.sinh().ln()
    } else {
        a - LN_2 + (-(-2.0 * a).exp()).ln_1p()
    }
}

/// `ln(cosh(a))`, finite for arbitrarily large `|a|`.
pub fn ln_cosh(a: f64) -> f64 {
    let a = a.abs();
    a - LN_2 + (-2.0 * a).exp().ln_1p()
}

pub fn coth(a: f64) -> f64 {
    1.0 / a.tanh()
}

/// Two sides of a relation, evaluated along separate routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    pub fn relative_gap(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs()).max(f64::MIN_POSITIVE);
        (self.lhs - self.rhs).abs() / scale
    }

    /// `lhs <= rhs` up to a relative slack.
    pub fn ordered(&self, slack: f64) -> bool {
        self.lhs <= self.rhs || self.lhs <= self.rhs + slack * self.rhs.abs().max(self.lhs.abs())
    }
}

/// `sinh(a t) = 2 sinh(a t / 2) cosh(a t / 2)`.
pub fn sinh_doubling(alpha: f64, t: f64) -> Sides {
    let h = 0.5 * alpha * t;
    Sides { lhs: (alpha * t).sinh(), rhs: 2.0 * h.sinh() * h.cosh() }
}

/// `coth(a t) = (coth(a t / 2) + tanh(a t / 2)) / 2`.
pub fn coth_half_angle(alpha: f64, t: f64) -> Sides {
    let h = 0.5 * alpha * t;
    Sides { lhs: coth(alpha * t), rhs: 0.5 * coth(h) + 0.5 * h.tanh() }
}

/// `coth(a s) + coth(a (t - s)) = sinh(a t) / (sinh(a s) sinh(a (t - s)))`, `0 < s < t`.
pub fn coth_sum(alpha: f64, t: f64, s: f64) -> Sides {
    let (p, q) = (alpha * s, alpha * (t - s));
    Sides { lhs: coth(p) + coth(q), rhs: (alpha * t).sinh() / (p.sinh() * q.sinh()) }
}

/// `tanh(a s) + tanh(a (t - s)) = tanh(a t) (1 + tanh(a s) tanh(a (t - s)))`.
pub fn tanh_sum(alpha: f64, t: f64, s: f64) -> Sides {
    let (p, q) = ((alpha * s).tanh(), (alpha * (t - s)).tanh());
    Sides { lhs: p + q, rhs: (alpha * t).tanh() * (1.0 + p * q) }
}

/// Lower bound `tanh(a t) <= tanh(a s) + tanh(a (t - s))`.
pub fn tanh_sum_lower_bound(alpha: f64, t: f64, s: f64) -> Sides {
    Sides { lhs: (alpha * t).tanh(), rhs: (alpha * s).tanh() + (alpha * (t - s)).tanh() }
}

/// `1/a <= coth(a) <= (1 + a)/a`; returns both inequalities.
pub fn coth_bounds(alpha: f64) -> (Sides, Sides) {
    let c = coth(alpha);
    (Sides { lhs: 1.0 / alpha, rhs: c }, Sides { lhs: c, rhs: (1.0 + alpha) / alpha })
}

/// `x^mu e^{-nu x} <= (2 mu / (e nu))^mu e^{-nu x / 2}` for `x >= 0`.
pub fn exp_absorption(mu: f64, nu: f64, x: f64) -> Sides {
    let lhs = mu * x.ln() - nu * x;
    let rhs = mu * (2.0 * mu / (std::f64::consts::E * nu)).ln() - 0.5 * nu * x;
    // compared in log space; x = 0 gives lhs = -inf
    Sides { lhs, rhs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_sinh_matches_direct_and_survives_large_arguments() {
        for a in [1e-8, 0.3, 5.0, 19.9, 20.1, 40.0] {
            assert!((ln_sinh(a) - a.sinh().ln()).abs() < 1e-13 * a.sinh().ln().abs().max(1.0));
        }
        assert!((ln_sinh(1e3) - (1e3 - LN_2)).abs() < 1e-12);
        assert!((ln_cosh(-1e3) - (1e3 - LN_2)).abs() < 1e-12);
        assert!((ln_cosh(0.7) - 0.7f64.cosh().ln()).abs() < 1e-15);
    }

    #[test]
    fn identities_hold_at_sample_points() {
        for &(a, t, s) in &[(0.5, 1.0, 0.3), (2.0, 3.0, 2.9), (1e-3, 2.0, 1.0)] {
            assert!(sinh_doubling(a, t).relative_gap() < 1e-14);
            assert!(coth_half_angle(a, t).relative_gap() < 1e-13);
            assert!(coth_sum(a, t, s).relative_gap() < 1e-12);
            assert!(tanh_sum(a, t, s).relative_gap() < 1e-14);
            assert!(tanh_sum_lower_bound(a, t, s).ordered(0.0));
        }
    }

    #[test]
    fn exp_absorption_is_tight_at_the_optimum() {
        // equality at x = 2 mu / nu
        let (mu, nu) = (1.5, 0.7);
        let s = exp_absorption(mu, nu, 2.0 * mu / nu);
        assert!((s.lhs - s.rhs).abs() < 1e-14);
        assert!(exp_absorption(mu, nu, 0.0).ordered(0.0));
    }
}
