//! Test-matrix generators.

use qrdm_core::householder::{apply_packed, reflect_in_place};
use qrdm_core::{DenseMatrix, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Kahan's matrix `diag(1, s, ..., s^{n-1}) * R`, `R` unit upper triangular
/// with every entry above the diagonal equal to `-c`; `c = cos(theta)`,
/// `s = sin(theta)`. Every column has unit norm.
pub fn kahan_matrix(n: usize, theta: f64) -> Result<DenseMatrix> {
    if n < 2 || !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "kahan matrix needs n >= 2 and theta in (0, pi/2], got n={n}, theta={theta}"
        )));
    }
    let (s, c) = theta.sin_cos();
    // cos(pi/2) is 6e-17, not 0
    let c = if theta == std::f64::consts::FRAC_PI_2 { 0.0 } else { c };
    let s = if theta == std::f64::consts::FRAC_PI_2 { 1.0 } else { s };
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let scale = s.powi(i as i32);
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => scale,
            std::cmp::Ordering::Less => -c * scale,
            std::cmp::Ordering::Greater => 0.0,
        }
    }))
}

/// Kahan matrix with `c = cos(theta)` given directly.
pub fn kahan_matrix_c(n: usize, c: f64) -> Result<DenseMatrix> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::InvalidArgument(format!("kahan c must lie in [0, 1), got {c}")));
    }
    kahan_matrix(n, c.acos())
}

/// Orthogonal matrix of order `n` as a product of reflectors built from
/// Gaussian vectors.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    let mut q = DenseMatrix::identity(n);
    for k in (0..n.saturating_sub(1)).rev() {
        let mut v: Vec<f64> = (k..n).map(|_| rng.sample(StandardNormal)).collect();
        let (coeff, _) = reflect_in_place(&mut v);
        for j in 0..n {
            apply_packed(&v[1..], coeff, &mut q.col_mut(j)[k..]);
        }
    }
    q
}

/// `U * diag(sigmas) * V^T` with `U`, `V` random orthogonal of orders `m`
/// and `n`; `sigmas` must have `min(m, n)` entries.
pub fn with_spectrum(m: usize, n: usize, sigmas: &[f64], seed: u64) -> Result<DenseMatrix> {
    let p = m.min(n);
    if sigmas.len() != p {
        return Err(Error::InvalidArgument(format!(
            "{} singular values for a {m}x{n} matrix",
            sigmas.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_orthogonal(m, &mut rng);
    let v = random_orthogonal(n, &mut rng);
    let us = DenseMatrix::from_fn(m, p, |i, k| u[(i, k)] * sigmas[k]);
    let vt = DenseMatrix::from_fn(p, n, |k, j| v[(j, k)]);
    Ok(us.matmul(&vt))
}

/// `r` values log-spaced from 1 down to `1/cond`, then `p - r` copies of
/// `(1/cond)/gap`.
pub fn gapped_spectrum(p: usize, r: usize, cond: f64, gap: f64) -> Vec<f64> {
    let low = 1.0 / cond;
    let tail = low / gap;
    (0..p)
        .map(|i| {
            if i >= r {
                tail
            } else if r == 1 {
                1.0
            } else {
                low.powf(i as f64 / (r - 1) as f64)
            }
        })
        .collect()
}

/// Random `m x n` matrix with `r` significant singular values in
/// `[1/cond, 1]` and the rest a factor `gap` below the smallest of them.
pub fn random_with_gap(
    m: usize,
    n: usize,
    r: usize,
    cond: f64,
    gap: f64,
    seed: u64,
) -> Result<DenseMatrix> {
    let p = m.min(n);
    if r > p || !(gap > 1.0) || !(cond >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need r <= min(m, n), gap > 1, cond >= 1; got r={r}, gap={gap}, cond={cond}"
        )));
    }
    with_spectrum(m, n, &gapped_spectrum(p, r, cond, gap), seed)
}

/// Random rank-deficient matrix whose neglected singular values sit near
/// half a unit roundoff: `cond` is chosen so that `(1/cond)/gap = eps/2`,
/// clamped to `[1, 1e8]` so the significant values stay well above the
/// rank threshold. `r = 0` gives the zero matrix.
pub fn random_rank_deficient(m: usize, n: usize, r: usize, gap: f64, seed: u64) -> Result<DenseMatrix> {
    if r == 0 {
        if !(gap > 1.0) {
            return Err(Error::InvalidArgument(format!("gap must exceed 1, got {gap}")));
        }
        return Ok(DenseMatrix::zeros(m, n));
    }
    let cond = (2.0 / (f64::EPSILON * gap)).clamp(1.0, 1e8);
    random_with_gap(m, n, r, cond, gap, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qrdm_core::oracle::jacobi_svd;

    #[test]
    fn kahan_small_cases() {
        let k = kahan_matrix(2, std::f64::consts::FRAC_PI_2).unwrap();
        assert_eq!(k, DenseMatrix::identity(2));
        let k = kahan_matrix_c(3, 0.5).unwrap();
        let s = (1.0f64 - 0.25).sqrt();
        assert!((k[(0, 2)] + 0.5).abs() < 1e-15);
        assert!((k[(1, 2)] + 0.5 * s).abs() < 1e-15);
        assert!((k[(2, 2)] - s * s).abs() < 1e-15);
        assert_eq!(k[(2, 0)], 0.0);
        assert!(kahan_matrix(1, 1.0).is_err());
    }

    #[test]
    fn kahan_columns_have_unit_norm() {
        let k = kahan_matrix_c(40, 0.3).unwrap();
        for j in 0..40 {
            let norm: f64 = k.col(j).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_orthogonal(17, &mut rng);
        let e = q.transpose().matmul(&q).sub(&DenseMatrix::identity(17)).max_abs();
        assert!(e < 1e-14);
    }

    #[test]
    fn prescribed_spectrum_is_realized() {
        let a = random_with_gap(30, 20, 8, 1e3, 1e6, 9).unwrap();
        let want = gapped_spectrum(20, 8, 1e3, 1e6);
        let got = jacobi_svd(&a).unwrap().sigmas;
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn rank_deficient_oracle_rank() {
        let a = random_rank_deficient(60, 40, 15, 1e8, 4).unwrap();
        assert_eq!(jacobi_svd(&a).unwrap().numerical_rank, 15);
        let full = random_rank_deficient(10, 6, 6, 10.0, 4).unwrap();
        assert_eq!(jacobi_svd(&full).unwrap().numerical_rank, 6);
        assert_eq!(random_rank_deficient(5, 4, 0, 10.0, 1).unwrap(), DenseMatrix::zeros(5, 4));
    }

    #[test]
    fn seeds_are_deterministic() {
        let a = random_rank_deficient(12, 9, 4, 1e10, 77).unwrap();
        let b = random_rank_deficient(12, 9, 4, 1e10, 77).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_rank_deficient(12, 9, 4, 1e10, 78).unwrap());
    }
}
