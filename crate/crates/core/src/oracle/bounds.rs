//! Empirical checks of singular-value inequalities.

use crate::dm::dominance_gap;
use crate::error::{mismatch, Error, Result};
use crate::householder::reflect_in_place;
use crate::matrix::{column_norms, DenseMatrix};
use crate::rrqr::RRQRResult;

use super::jacobi::{jacobi_svd, SpectrumReport};

/// Relative slack granted to rounding when an inequality is tight.
pub const ROUNDING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Whether the inequality is satisfied; false when not applicable.
    pub holds: bool,
    /// `rhs - lhs` for upper bounds, `lhs - rhs` for lower bounds.
    pub slack: f64,
    /// False when the hypotheses of the bound are not met.
    pub applicable: bool,
}

impl BoundReport {
    /// `lhs <= rhs` up to [`ROUNDING_TOL`].
    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let tol = ROUNDING_TOL * lhs.abs().max(rhs.abs());
        Self {
            name: name.into(),
            lhs,
            rhs,
            holds: lhs <= rhs + tol,
            slack: rhs - lhs,
            applicable: true,
        }
    }

    /// `lhs >= rhs` up to [`ROUNDING_TOL`].
    pub fn at_least(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let tol = ROUNDING_TOL * lhs.abs().max(rhs.abs());
        Self {
            name: name.into(),
            lhs,
            rhs,
            holds: lhs + tol >= rhs,
            slack: lhs - rhs,
            applicable: true,
        }
    }

    /// `lhs > rhs` with no rounding allowance.
    pub fn strictly_above(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            holds: lhs > rhs,
            slack: lhs - rhs,
            applicable: true,
        }
    }

    pub fn not_applicable(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            holds: false,
            slack: f64::NAN,
            applicable: false,
        }
    }

    pub fn is_violation(&self) -> bool {
        self.applicable && !self.holds
    }
}

/// Column-norm and max-entry bounds on `||A||_2`.
pub fn norm_bounds_check(a: &DenseMatrix) -> Result<Vec<BoundReport>> {
    let (m, n) = a.shape();
    let s1 = jacobi_svd(a)?.sigma_max();
    let max_col = column_norms(a.view()).into_iter().fold(0.0, f64::max);
    let max_abs = a.max_abs();
    Ok(vec![
        BoundReport::at_most("max column norm <= ||A||_2", max_col, s1),
        BoundReport::at_most("||A||_2 <= sqrt(n) max column norm", s1, (n as f64).sqrt() * max_col),
        BoundReport::at_most("||A||_max <= ||A||_2", max_abs, s1),
        BoundReport::at_most("||A||_2 <= sqrt(mn) ||A||_max", s1, ((m * n) as f64).sqrt() * max_abs),
    ])
}

/// Upper triangular factor of an unpivoted Householder QR.
fn triangular_factor(a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = a.shape();
    let mut w = a.clone();
    for k in 0..n.min(m) {
        let (coeff, _) = reflect_in_place(&mut w.col_mut(k)[k..]);
        if coeff == 0.0 {
            continue;
        }
        let v: Vec<f64> = std::iter::once(1.0)
            .chain(w.col(k)[k + 1..].iter().copied())
            .collect();
        for j in k + 1..n {
            let col = &mut w.col_mut(j)[k..];
            let s = coeff * v.iter().zip(col.iter()).map(|(x, y)| x * y).sum::<f64>();
            col.iter_mut().zip(&v).for_each(|(c, x)| *c -= s * x);
        }
    }
    DenseMatrix::from_fn(n.min(m), n, |i, j| if i <= j { w[(i, j)] } else { 0.0 })
}

/// Inverse of a nonsingular upper triangular matrix by back substitution
/// against the identity.
fn upper_inverse(r: &DenseMatrix) -> DenseMatrix {
    let n = r.rows();
    let mut x = DenseMatrix::zeros(n, n);
    for c in 0..n {
        for i in (0..=c).rev() {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in i + 1..=c {
                s -= r[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / r[(i, i)];
        }
    }
    x
}

/// Rows `b_i` of `A^{-1}` bound the smallest singular value:
/// `sigma_min <= min_i 1/||b_i|| <= sqrt(n) sigma_min`. Reported as the
/// ratio `min_i (1/||b_i||) / sigma_min`, which must lie in `[1, sqrt(n)]`.
pub fn row_inverse_bound_check(a: &DenseMatrix) -> Result<BoundReport> {
    const NAME: &str = "sigma_min <= min 1/||row of inverse|| <= sqrt(n) sigma_min";
    let n = a.rows();
    if n != a.cols() {
        return Err(mismatch("row_inverse_bound_check", format!("{}x{} is not square", n, a.cols())));
    }
    let spec = jacobi_svd(a)?;
    let (smax, smin) = (spec.sigma_max(), spec.sigma_min());
    if smin == 0.0 || smax / smin > 1e12 {
        return Ok(BoundReport::not_applicable(NAME));
    }
    // A = QR, so the rows of A^{-1} = R^{-1} Q^T have the norms of the rows of R^{-1}
    let rinv = upper_inverse(&triangular_factor(a));
    let min_inv = (0..n)
        .map(|i| 1.0 / crate::matrix::norm2((0..n).map(|j| rinv[(i, j)])))
        .fold(f64::INFINITY, f64::min);
    let ratio = min_inv / smin;
    let root_n = (n as f64).sqrt();
    let tol = ROUNDING_TOL.sqrt();
    // conditioning up to 1e12 costs digits in the inverse; allow for it
    let holds = ratio >= 1.0 - tol && ratio <= root_n * (1.0 + tol);
    Ok(BoundReport {
        name: NAME.into(),
        lhs: ratio,
        rhs: root_n,
        holds,
        slack: (ratio - 1.0).min(root_n - ratio),
        applicable: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    Rows,
    Cols,
}

/// `min_i (|a_ii| - sum_{j != i} |a_ij|)` along rows or columns; `None`
/// when the gap is not positive.
pub fn sdd_gap(a: &DenseMatrix, by: Dominance) -> Result<Option<f64>> {
    let n = a.rows();
    if n != a.cols() {
        return Err(mismatch("sdd_gap", format!("{}x{} is not square", n, a.cols())));
    }
    let entry = |i: usize, j: usize| match by {
        Dominance::Rows => a[(i, j)],
        Dominance::Cols => a[(j, i)],
    };
    let alpha = (0..n)
        .map(|i| {
            entry(i, i).abs() - (0..n).filter(|&j| j != i).map(|j| entry(i, j).abs()).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    Ok((alpha > 0.0).then_some(alpha))
}

/// Varah's bounds for diagonally dominant matrices. For `A` dominant by
/// rows with gap `alpha`: `||A^{-1}||_inf <= 1/alpha`. When `A` is also
/// dominant by columns with gap `beta`: `sigma_min(A) >= sqrt(alpha beta)`.
/// The third report is the strict form `sigma_min > min(alpha, beta)`,
/// which fails only on equality cases such as diagonal matrices. The last
/// two are not applicable for row-only dominance.
pub fn varah_check(a: &DenseMatrix) -> Result<Vec<BoundReport>> {
    const INF: &str = "||A^-1||_inf <= 1/alpha";
    const TWO: &str = "sigma_min >= sqrt(alpha beta)";
    const STRICT: &str = "sigma_min > min(alpha, beta)";
    let Some(alpha) = sdd_gap(a, Dominance::Rows)? else {
        return Ok(vec![
            BoundReport::not_applicable(INF),
            BoundReport::not_applicable(TWO),
            BoundReport::not_applicable(STRICT),
        ]);
    };
    let n = a.rows();
    let inv = inverse(a);
    let inf_norm = (0..n)
        .map(|i| (0..n).map(|j| inv[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut out = vec![BoundReport::at_most(INF, inf_norm, 1.0 / alpha)];
    match sdd_gap(a, Dominance::Cols)? {
        Some(beta) => {
            let smin = jacobi_svd(a)?.sigma_min();
            out.push(BoundReport::at_least(TWO, smin, (alpha * beta).sqrt()));
            out.push(BoundReport::strictly_above(STRICT, smin, alpha.min(beta)));
        }
        None => {
            out.push(BoundReport::not_applicable(TWO));
            out.push(BoundReport::not_applicable(STRICT));
        }
    }
    Ok(out)
}

/// Gaussian elimination with partial pivoting on `[A | I]`.
fn inverse(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let mut m = a.clone();
    let mut x = DenseMatrix::identity(n);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs())).unwrap();
        if p != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = t;
                let t = x[(k, j)];
                x[(k, j)] = x[(p, j)];
                x[(p, j)] = t;
            }
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
            for j in 0..n {
                x[(i, j)] -= f * x[(k, j)];
            }
        }
    }
    for c in 0..n {
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= m[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / m[(i, i)];
        }
    }
    x
}

/// Diagonal scaling keeps dominance: for `A` with unit-normalized gap
/// `gamma > 1 - tau^2` and `|d_i| >= tau max|d|`, `D A D` is dominant by
/// rows. Reports the row gap of `D A D` against zero.
pub fn scaled_sdd_check(a: &DenseMatrix, d: &[f64], tau: f64) -> Result<BoundReport> {
    const NAME: &str = "DAD dominant by rows";
    let n = a.rows();
    if n != a.cols() || d.len() != n {
        return Err(mismatch(
            "scaled_sdd_check",
            format!("{}x{} matrix with {} scalings", n, a.cols(), d.len()),
        ));
    }
    if let Some(i) = d.iter().position(|&x| x == 0.0) {
        return Err(Error::InvalidArgument(format!("scaling entry {i} is zero")));
    }
    let dbar = d.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if !(tau > 0.0 && tau <= 1.0) || d.iter().any(|x| x.abs() < tau * dbar) {
        return Err(Error::InvalidArgument(
            "scalings must satisfy |d_i| >= tau max|d| with tau in (0, 1]".into(),
        ));
    }
    let gamma = normalized_gap(a);
    if !(gamma > 1.0 - tau * tau) {
        return Ok(BoundReport::not_applicable(NAME));
    }
    let dad = DenseMatrix::from_fn(n, n, |i, j| d[i] * a[(i, j)] * d[j]);
    let gap = (0..n)
        .map(|i| dad[(i, i)].abs() - (0..n).filter(|&j| j != i).map(|j| dad[(i, j)].abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    Ok(BoundReport::strictly_above(NAME, gap, 0.0))
}

/// `min_i (1 - sum_{j != i} |a_ij / a_ii|)`.
pub fn normalized_gap(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    (0..n)
        .map(|i| {
            let aii = a[(i, i)].abs();
            1.0 - (0..n).filter(|&j| j != i).map(|j| (a[(i, j)] / aii).abs()).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

fn sigma_min_of(m: &DenseMatrix) -> Result<f64> {
    Ok(jacobi_svd(m)?.sigma_min())
}

fn block(r: &RRQRResult, r0: usize, c0: usize, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |i, j| {
        let (ii, jj) = (r0 + i, c0 + j);
        if ii <= jj {
            r.packed[(ii, jj)]
        } else {
            0.0
        }
    })
}

/// Per-step checks for a factorization produced with the `delta_max`
/// selection rule: the smallest singular value of the leading triangular
/// block after each step against the worst-case lower bound, and of each
/// diagonal block `T` against `sqrt(gamma + tau^2 - 1) / sqrt(n - n' + 1)
/// sigma_{n'}(A)`, with `n'` the order after the step.
///
/// At the first step the leading block is `T` itself and the second bound
/// is used for both. Steps whose block fails `gamma > 1 - tau^2`, and
/// scalar fallback steps, are reported as not applicable.
pub fn qrdm_theorem_check(
    a: &DenseMatrix,
    result: &RRQRResult,
    tau: f64,
) -> Result<Vec<BoundReport>> {
    let spec = jacobi_svd(a)?;
    let s1 = spec.sigma_max();
    let n = a.cols();
    let mut out = Vec::new();
    let mut prev: Option<f64> = None;
    for (s, step) in result.step_log.iter().enumerate() {
        let (ns, k) = (step.n_s, step.k_accepted);
        let ns1 = ns + k;
        let r11 = result.r11(ns1);
        let sbar = sigma_min_of(&r11)?;
        let gamma = step.gamma.unwrap_or(f64::NAN);
        let usable = !step.fell_back_to_scalar && gamma > 1.0 - tau * tau;
        if usable {
            let g = (gamma + tau * tau - 1.0).sqrt();
            let sig = spec.sigma(ns1);
            let t = block(result, ns, ns, k, k);
            let block_bound = g / ((n - ns1 + 1) as f64).sqrt() * sig;
            out.push(BoundReport::at_least(
                format!("step {s}: sigma_min(T) >= selected-block bound"),
                sigma_min_of(&t)?,
                block_bound,
            ));
            let rhs = match prev {
                None => block_bound,
                Some(prev) => {
                    sig * (prev / s1) / (2.0 * ((n - ns1).max(1) * ns1) as f64).sqrt() * g
                        / ((k * k * ns) as f64)
                }
            };
            out.push(BoundReport::at_least(
                format!("step {s}: sigma_min(R11) >= leading-block bound"),
                sbar,
                rhs,
            ));
        } else {
            out.push(BoundReport::not_applicable(format!("step {s}: selected-block bound")));
            out.push(BoundReport::not_applicable(format!("step {s}: leading-block bound")));
        }
        prev = Some(sbar);
    }
    Ok(out)
}

/// The classical worst-case bound for column pivoting,
/// `sigma_min(R11 of order s+1) >= sigma_{s+1}(A) (sigma_min(R11 of order s)
/// / sigma_1(A)) / sqrt(2 (n - s) (s + 1))`, with the order-0 value taken
/// as `sigma_1(A)`.
pub fn qrp_theorem_check(a: &DenseMatrix, result: &RRQRResult) -> Result<Vec<BoundReport>> {
    let spec = jacobi_svd(a)?;
    let s1 = spec.sigma_max();
    let n = a.cols();
    let mut prev = s1;
    let mut out = Vec::new();
    for s in 0..result.reflector_count() {
        let sbar = sigma_min_of(&result.r11(s + 1))?;
        let rhs = spec.sigma(s + 1) * (prev / s1) / (2.0 * ((n - s) * (s + 1)) as f64).sqrt();
        out.push(BoundReport::at_least(format!("order {}", s + 1), sbar, rhs));
        prev = sbar;
    }
    Ok(out)
}

/// Interlacing at split `r`: `sigma_min(R11) <= sigma_r(A)` and
/// `sigma_max(R22) >= sigma_{r+1}(A)`, each up to an absolute allowance of
/// `64 eps max(m, n) sigma_1(A)` for the backward error of the factorization.
pub fn interlacing_check(
    spectrum: &SpectrumReport,
    result: &RRQRResult,
    r: usize,
) -> Result<[BoundReport; 2]> {
    let (m, n) = result.packed.shape();
    if r == 0 || r > result.reflector_count() {
        return Err(Error::IndexOutOfRange {
            index: r,
            len: result.reflector_count(),
        });
    }
    let slack = 64.0 * f64::EPSILON * m.max(n) as f64 * spectrum.sigma_max();
    let r11 = sigma_min_of(&result.r11(r))?;
    let r22 = if r < n && r < m {
        let b = DenseMatrix::from_fn(m - r, n - r, |i, j| {
            let (ii, jj) = (r + i, r + j);
            if ii <= jj || jj >= result.reflector_count() {
                result.packed[(ii, jj)]
            } else {
                0.0
            }
        });
        jacobi_svd(&b)?.sigma_max()
    } else {
        0.0
    };
    Ok([
        BoundReport::at_most("sigma_min(R11) <= sigma_r(A)", r11, spectrum.sigma(r) + slack),
        BoundReport::at_least("sigma_max(R22) >= sigma_r+1(A)", r22 + slack, spectrum.sigma(r + 1)),
    ])
}

/// Dominance gap of the cosine matrix of `c`, for callers assembling selection
/// certificates by hand.
pub fn cosine_gap(c: &DenseMatrix) -> Result<f64> {
    let theta = crate::dm::cosine_matrix(c.view())?;
    let idx: Vec<usize> = (0..c.cols()).collect();
    Ok(dominance_gap(&theta, &idx))
}
