//! One-sided (Hestenes) Jacobi singular values.

use crate::error::{Error, Result};
use crate::householder::dot;
use crate::matrix::{norm2, DenseMatrix};

/// Largest dimension the oracle accepts after orienting `m >= n`.
pub const MAX_ORDER: usize = 512;
pub const MAX_SWEEPS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Singular values, descending.
    pub sigmas: Vec<f64>,
    /// Count of `sigma_i > eps * n * sigma_1`, `n` the column count of the input.
    pub numerical_rank: usize,
    pub convergence_sweeps: usize,
}

impl SpectrumReport {
    pub fn sigma_max(&self) -> f64 {
        self.sigmas.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigmas.last().copied().unwrap_or(0.0)
    }

    /// `sigma_i`, 1-based; zero past the end of the spectrum.
    pub fn sigma(&self, i: usize) -> f64 {
        assert!(i >= 1, "singular values are 1-based");
        self.sigmas.get(i - 1).copied().unwrap_or(0.0)
    }

    /// Count of `sigma_i > threshold`.
    pub fn rank_above(&self, threshold: f64) -> usize {
        self.sigmas.iter().take_while(|&&s| s > threshold).count()
    }
}

/// Rotation threshold on `|a_p . a_q| / (|a_p| |a_q|)`.
fn tolerance(m: usize) -> f64 {
    (f64::EPSILON * (m as f64).sqrt()).max(1e-15)
}

/// Singular values of `a` by one-sided Jacobi on its columns (rows when
/// `a` is wide). Pairs are rotated until every column pair is orthogonal
/// to working precision, for at most [`MAX_SWEEPS`] sweeps.
pub fn jacobi_svd(a: &DenseMatrix) -> Result<SpectrumReport> {
    let cols_in = a.cols();
    let mut u = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.transpose()
    };
    let (m, n) = u.shape();
    if n > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "jacobi oracle limited to order {MAX_ORDER}, got {n}"
        )));
    }
    let tol = tolerance(m);
    let mut sq: Vec<f64> = (0..n).map(|j| norm2(u.col(j).iter().copied()).powi(2)).collect();
    let mut sweeps = 0;
    let mut converged = n < 2;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta) = (sq[p], sq[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let (cp, cq) = two_columns(&mut u, p, q);
                let gamma = dot(cp, cq);
                if gamma.abs() <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
                // exact-arithmetic updates drift; recompute to stay accurate
                sq[p] = norm2(cp.iter().copied()).powi(2);
                sq[q] = norm2(cq.iter().copied()).powi(2);
            }
        }
        converged = !rotated;
    }
    let mut sigmas: Vec<f64> = (0..n).map(|j| norm2(u.col(j).iter().copied())).collect();
    sigmas.sort_by(|x, y| y.total_cmp(x));
    let threshold = f64::EPSILON * cols_in as f64 * sigmas.first().copied().unwrap_or(0.0);
    let numerical_rank = sigmas.iter().filter(|&&s| s > threshold).count();
    let report = SpectrumReport {
        sigmas,
        numerical_rank,
        convergence_sweeps: sweeps,
    };
    if converged {
        Ok(report)
    } else {
        Err(Error::NoConvergence {
            sweeps,
            partial: Box::new(report),
        })
    }
}

fn two_columns(u: &mut DenseMatrix, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let m = u.rows();
    let (left, right) = u.data_mut().split_at_mut(q * m);
    (&mut left[p * m..(p + 1) * m], &mut right[..m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi
    /// rotations, an independent route to the squared singular values.
    fn symmetric_eigenvalues(mut s: DenseMatrix) -> Vec<f64> {
        let n = s.rows();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| s[(i, j)] * s[(i, j)])
                .sum();
            if off.sqrt() < 1e-14 * s.frobenius_norm() {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if s[(p, q)] == 0.0 {
                        continue;
                    }
                    let theta = (s[(q, q)] - s[(p, p)]) / (2.0 * s[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * c;
                    for k in 0..n {
                        let (a, b) = (s[(k, p)], s[(k, q)]);
                        s[(k, p)] = c * a - sn * b;
                        s[(k, q)] = sn * a + c * b;
                    }
                    for k in 0..n {
                        let (a, b) = (s[(p, k)], s[(q, k)]);
                        s[(p, k)] = c * a - sn * b;
                        s[(q, k)] = sn * a + c * b;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| s[(i, i)]).collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        ev
    }

    #[test]
    fn diagonal() {
        let r = jacobi_svd(&DenseMatrix::from_diag(&[2.0, 3.0, 1.0])).unwrap();
        assert_eq!(r.sigmas, vec![3.0, 2.0, 1.0]);
        assert_eq!(r.numerical_rank, 3);
    }

    #[test]
    fn rank_one_outer_product() {
        let u = [1.0, 2.0, 2.0];
        let v = [3.0, 4.0, 0.0];
        let a = DenseMatrix::from_fn(3, 3, |i, j| u[i] * v[j]);
        let r = jacobi_svd(&a).unwrap();
        assert!((r.sigmas[0] - 15.0).abs() <= 1e-13 * 15.0);
        assert!(r.sigmas[1] <= 1e-13 * 15.0 && r.sigmas[2] <= 1e-13 * 15.0);
        assert_eq!(r.numerical_rank, 1);
    }

    #[test]
    fn wide_input_is_transposed() {
        let a = DenseMatrix::from_rows(&[&[3.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 4.0, 0.0]]).unwrap();
        assert_eq!(jacobi_svd(&a).unwrap().sigmas, vec![4.0, 3.0]);
    }

    #[test]
    fn matches_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(2012);
        let a = DenseMatrix::from_fn(20, 12, |_, _| rng.random_range(-1.0..1.0));
        let r = jacobi_svd(&a).unwrap();
        let ev = symmetric_eigenvalues(a.transpose().matmul(&a));
        for (s, e) in r.sigmas.iter().zip(&ev) {
            assert!((s * s - e).abs() <= 1e-10 * e, "{} vs {}", s * s, e);
        }
    }

    #[test]
    fn zero_matrix() {
        let r = jacobi_svd(&DenseMatrix::zeros(4, 3)).unwrap();
        assert_eq!(r.sigmas, vec![0.0; 3]);
        assert_eq!(r.numerical_rank, 0);
    }

    #[test]
    fn guard_rejects_large_order() {
        let a = DenseMatrix::zeros(MAX_ORDER + 1, MAX_ORDER + 1);
        assert!(matches!(jacobi_svd(&a), Err(Error::InvalidArgument(_))));
    }
}
