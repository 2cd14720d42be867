//! Eigenvalues of a real symmetric tridiagonal matrix by implicit QL with
//! Wilkinson-type shifts (the classic `tqli` scheme without vectors).

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// All eigenvalues of the symmetric tridiagonal matrix with diagonal `diag`
/// and sub-diagonal `off` (`off.len() == diag.len() - 1`), sorted ascending.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    assert_eq!(off.len() + 1, n, "off-diagonal must have n - 1 entries");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence(format!("QL iteration stalled at index {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    #[test]
    fn second_difference_matrix_spectrum() {
        let n = 200;
        let eig = symmetric_tridiagonal_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (k, v) in eig.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "k = {k}: {v} vs {exact}");
        }
    }

    #[test]
    fn trivial_sizes() {
        assert!(symmetric_tridiagonal_eigenvalues(&[], &[]).unwrap().is_empty());
        assert_eq!(symmetric_tridiagonal_eigenvalues(&[3.5], &[]).unwrap(), vec![3.5]);
        let two = symmetric_tridiagonal_eigenvalues(&[1.0, 1.0], &[1.0]).unwrap();
        assert!((two[0] - 0.0).abs() < 1e-15 && (two[1] - 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn agrees_with_dense_solver(
            diag in prop::collection::vec(-5.0f64..5.0, 2..40),
            seed in prop::collection::vec(-3.0f64..3.0, 40),
        ) {
            let n = diag.len();
            let off: Vec<f64> = seed[..n - 1].to_vec();
            let mut dense = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                dense[(i, i)] = diag[i];
                if i + 1 < n {
                    dense[(i, i + 1)] = off[i];
                    dense[(i + 1, i)] = off[i];
                }
            }
            let mut reference: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            let ours = symmetric_tridiagonal_eigenvalues(&diag, &off).unwrap();
            for (a, b) in ours.iter().zip(&reference) {
                prop_assert!((a - b).abs() < 1e-11, "{} vs {}", a, b);
            }
        }
    }
}
