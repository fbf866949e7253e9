//! Householder reflectors and their compact WY aggregation.
//!
//! A reflector is `H = I - coeff * v * v^T` with `v[0] = 1`. A block of `k`
//! reflectors `H_1 H_2 ... H_k` is stored as `I - Y * W * Y^T`, with `Y` the
//! unit lower-trapezoidal matrix of the vectors and `W` upper triangular.
//! Applying the block transpose to a trailing matrix takes three
//! matrix-matrix products instead of `k` rank-1 updates.

use crate::error::{mismatch, Error, Result};
use crate::matrix::{gemm, norm2, DenseMatrix, MatrixView, MatrixViewMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Reflector {
    /// Householder vector including the leading unit entry.
    pub v: Vec<f64>,
    pub coeff: f64,
}

impl Reflector {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// Explicit `I - coeff * v * v^T`.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.v.len();
        DenseMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - self.coeff * self.v[i] * self.v[j]
        })
    }

    pub fn apply(&self, x: &mut [f64]) {
        apply_packed(&self.v[1..], self.coeff, x);
    }
}

/// Reduces `x` in place to `(beta, v_2, ..., v_n)`: `beta` lands in the head,
/// the essential part of `v` overwrites the tail. Returns `(coeff, beta)`.
///
/// `beta` always takes the sign opposite to `x[0]` (positive zero counts as
/// positive), so `x[0] - beta` never cancels. A zero vector yields the
/// identity reflector with `coeff = 0`.
pub fn reflect_in_place(x: &mut [f64]) -> (f64, f64) {
    let Some((&mut alpha, tail)) = x.split_first_mut() else {
        return (0.0, 0.0);
    };
    let norm = norm2(std::iter::once(alpha).chain(tail.iter().copied()));
    if norm == 0.0 {
        return (0.0, 0.0);
    }
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let coeff = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    tail.iter_mut().for_each(|t| *t *= scale);
    x[0] = beta;
    (coeff, beta)
}

/// Builds the reflector mapping `x` to `(beta, 0, ..., 0)`.
pub fn make_reflector(x: &[f64]) -> Result<(Reflector, f64)> {
    if x.is_empty() {
        return Err(Error::InvalidArgument(
            "reflector of an empty vector".into(),
        ));
    }
    let mut v = x.to_vec();
    let (coeff, beta) = reflect_in_place(&mut v);
    v[0] = 1.0;
    Ok((Reflector { v, coeff }, beta))
}

/// `x <- (I - coeff * v * v^T) x` where `v = (1, essential)`.
#[inline]
pub fn apply_packed(essential: &[f64], coeff: f64, x: &mut [f64]) {
    if coeff == 0.0 {
        return;
    }
    let (head, tail) = x.split_first_mut().expect("non-empty target");
    debug_assert_eq!(tail.len(), essential.len());
    let w = *head + dot(essential, tail);
    let s = coeff * w;
    *head -= s;
    for (t, &e) in tail.iter_mut().zip(essential) {
        *t -= s * e;
    }
}

/// Applies one reflector to every column of `c` (a rank-1 update).
pub fn apply_reflector_left(essential: &[f64], coeff: f64, c: &mut MatrixViewMut<'_>) {
    for j in 0..c.cols() {
        apply_packed(essential, coeff, c.col_mut(j));
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorize without reassociation flags
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Compact WY pair for `k` reflectors sharing an ambient dimension `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectorBlock {
    y: DenseMatrix,
    w: DenseMatrix,
}

impl ReflectorBlock {
    /// Wraps `Y` (m x k, unit lower trapezoidal) and recomputes `W` from the
    /// reflector coefficients.
    pub fn from_parts(y: DenseMatrix, coeffs: &[f64]) -> Result<Self> {
        if y.cols() != coeffs.len() || coeffs.is_empty() {
            return Err(mismatch(
                "ReflectorBlock::from_parts",
                format!("{} vectors with {} coefficients", y.cols(), coeffs.len()),
            ));
        }
        let w = wy_factor(y.view(), coeffs);
        Ok(Self { y, w })
    }

    pub fn y(&self) -> &DenseMatrix {
        &self.y
    }

    pub fn w(&self) -> &DenseMatrix {
        &self.w
    }

    pub fn k(&self) -> usize {
        self.y.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.y.rows()
    }

    /// Explicit `I - Y W Y^T`, the product `H_1 H_2 ... H_k`.
    pub fn to_dense(&self) -> DenseMatrix {
        let m = self.ambient_dim();
        let yw = self.y.matmul(&self.w);
        let mut q = DenseMatrix::identity(m);
        gemm(-1.0, yw.view(), self.y.view().t(), 1.0, &mut q.view_mut())
            .expect("square by construction");
        q
    }
}

/// Upper-triangular `W` such that `H_1 ... H_k = I - Y W Y^T`, accumulated
/// forward one column at a time:
/// `W[..i, i] = -coeff_i * W[..i, ..i] * Y[:, ..i]^T y_i`, `W[i, i] = coeff_i`.
pub fn wy_factor(y: MatrixView<'_>, coeffs: &[f64]) -> DenseMatrix {
    let k = coeffs.len();
    debug_assert_eq!(y.cols(), k);
    let mut gram = DenseMatrix::zeros(k, k);
    gemm(1.0, y.t(), y, 0.0, &mut gram.view_mut()).expect("gram shape");
    let mut w = DenseMatrix::zeros(k, k);
    let mut z = vec![0.0; k];
    for i in 0..k {
        let tau = coeffs[i];
        w[(i, i)] = tau;
        if i == 0 || tau == 0.0 {
            continue;
        }
        for (l, zl) in z.iter_mut().enumerate().take(i) {
            *zl = -tau * gram[(l, i)];
        }
        for r in 0..i {
            let mut s = 0.0;
            for l in r..i {
                s += w[(r, l)] * z[l];
            }
            w[(r, i)] = s;
        }
    }
    w
}

/// Aggregates reflectors into compact WY form. Reflector `l` is embedded in
/// the trailing `len(v_l)` coordinates of the ambient space set by the first.
pub fn accumulate_wy(reflectors: &[Reflector]) -> Result<ReflectorBlock> {
    let first = reflectors
        .first()
        .ok_or_else(|| Error::InvalidArgument("no reflectors to accumulate".into()))?;
    let m = first.len();
    let k = reflectors.len();
    let mut y = DenseMatrix::zeros(m, k);
    for (l, r) in reflectors.iter().enumerate() {
        if r.len() > m || r.is_empty() {
            return Err(mismatch(
                "accumulate_wy",
                format!("reflector {l} has length {} in ambient dimension {m}", r.len()),
            ));
        }
        let offset = m - r.len();
        y.col_mut(l)[offset..].copy_from_slice(&r.v);
    }
    let coeffs: Vec<f64> = reflectors.iter().map(|r| r.coeff).collect();
    ReflectorBlock::from_parts(y, &coeffs)
}

/// `C <- (I - Y W^T Y^T) C`, i.e. `H_k ... H_1 C`, via three products with a
/// `k x cols(C)` temporary.
pub fn apply_block_left(block: &ReflectorBlock, c: &mut MatrixViewMut<'_>) -> Result<()> {
    apply_wy_transpose(block.y.view(), &block.w, c)
}

pub(crate) fn apply_wy_transpose(
    y: MatrixView<'_>,
    w: &DenseMatrix,
    c: &mut MatrixViewMut<'_>,
) -> Result<()> {
    if y.rows() != c.rows() {
        return Err(mismatch(
            "apply_block_left",
            format!("block of dimension {} on {} rows", y.rows(), c.rows()),
        ));
    }
    let k = y.cols();
    let nc = c.cols();
    if k == 0 || nc == 0 {
        return Ok(());
    }
    let mut work = DenseMatrix::zeros(k, nc);
    gemm(1.0, y.t(), c.as_view(), 0.0, &mut work.view_mut())?;
    // work <- W^T work; row i only needs rows l <= i, so sweep upward
    for j in 0..nc {
        let col = work.col_mut(j);
        for i in (0..k).rev() {
            let mut s = 0.0;
            for l in 0..=i {
                s += w[(l, i)] * col[l];
            }
            col[i] = s;
        }
    }
    gemm(-1.0, y, work.view(), 1.0, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = f64::EPSILON;

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn random_reflectors(m: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Reflector> {
        (0..k)
            .map(|l| make_reflector(&random_vec(m - l, rng)).unwrap().0)
            .collect()
    }

    fn embed(r: &Reflector, m: usize) -> DenseMatrix {
        let off = m - r.len();
        let h = r.to_dense();
        DenseMatrix::from_fn(m, m, |i, j| {
            if i >= off && j >= off {
                h[(i - off, j - off)]
            } else if i == j {
                1.0
            } else {
                0.0
            }
        })
    }

    fn orthogonality_defect(q: &DenseMatrix) -> f64 {
        q.transpose()
            .matmul(q)
            .sub(&DenseMatrix::identity(q.rows()))
            .max_abs()
    }

    #[test]
    fn unit_vector_sign_convention() {
        let (r, beta) = make_reflector(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(beta, -1.0);
        let mut x = vec![1.0, 0.0, 0.0];
        r.apply(&mut x);
        assert_eq!(x, vec![-1.0, 0.0, 0.0]);
        assert!((0.0..=2.0).contains(&r.coeff));
    }

    #[test]
    fn three_four_five() {
        let (r, beta) = make_reflector(&[3.0, 4.0]).unwrap();
        assert_eq!(beta.abs(), 5.0);
        assert!(beta < 0.0);
        let mut x = vec![3.0, 4.0];
        r.apply(&mut x);
        assert!((x[0] + 5.0).abs() < 4.0 * EPS * 5.0 && x[1].abs() < 4.0 * EPS * 5.0);
    }

    #[test]
    fn zero_and_empty_inputs() {
        let (r, beta) = make_reflector(&[0.0, 0.0]).unwrap();
        assert_eq!((r.coeff, beta), (0.0, 0.0));
        assert!(make_reflector(&[]).is_err());
        let (r, beta) = make_reflector(&[-2.0]).unwrap();
        assert_eq!(beta, 2.0);
        assert_eq!(r.coeff, 2.0);
    }

    #[test]
    fn random_reflector_annihilates_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let x = random_vec(9, &mut rng);
            let (r, beta) = make_reflector(&x).unwrap();
            let h = r.to_dense();
            let nx = norm2(x.iter().copied());
            let hx: Vec<f64> = (0..9).map(|i| (0..9).map(|j| h[(i, j)] * x[j]).sum()).collect();
            assert!((hx[0] - beta).abs() <= 1e-14 * nx);
            assert!(hx[1..].iter().all(|t| t.abs() <= 1e-14 * nx));
            assert!((beta.abs() - nx).abs() <= 4.0 * EPS * nx);
            assert!(orthogonality_defect(&h) <= 16.0 * EPS * 9.0);
            assert!((0.0..=2.0).contains(&r.coeff));
        }
    }

    #[test]
    fn single_reflector_block_is_degenerate_wy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (r, _) = make_reflector(&random_vec(5, &mut rng)).unwrap();
        let block = accumulate_wy(std::slice::from_ref(&r)).unwrap();
        assert_eq!(block.y().col(0), r.v.as_slice());
        assert_eq!(block.w()[(0, 0)], r.coeff);
        assert!(accumulate_wy(&[]).is_err());
    }

    #[test]
    fn two_reflectors_match_dense_product() {
        let r1 = make_reflector(&[1.0, 1.0, 0.0]).unwrap().0;
        let r2 = make_reflector(&[0.0, 1.0]).unwrap().0;
        let block = accumulate_wy(&[r1.clone(), r2.clone()]).unwrap();
        let explicit = embed(&r1, 3).matmul(&embed(&r2, 3));
        assert!(block.to_dense().sub(&explicit).max_abs() <= 1e-15);
    }

    #[test]
    fn eight_reflectors_on_32() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (m, k) = (32, 8);
        let rs = random_reflectors(m, k, &mut rng);
        let block = accumulate_wy(&rs).unwrap();
        let explicit = rs
            .iter()
            .fold(DenseMatrix::identity(m), |acc, r| acc.matmul(&embed(r, m)));
        let q = block.to_dense();
        assert!(q.sub(&explicit).max_abs() <= 1e-12);
        assert!(orthogonality_defect(&q) <= 64.0 * EPS * (m * k) as f64);
    }

    #[test]
    fn identity_block_leaves_c_alone() {
        let y = DenseMatrix::from_fn(4, 2, |i, j| if i == j { 1.0 } else { 0.0 });
        let block = ReflectorBlock::from_parts(y, &[0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c0 = DenseMatrix::from_fn(4, 3, |_, _| rng.random_range(-1.0..1.0));
        let mut c = c0.clone();
        apply_block_left(&block, &mut c.view_mut()).unwrap();
        assert_eq!(c, c0);
    }

    #[test]
    fn k1_block_equals_rank1_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (r, _) = make_reflector(&random_vec(6, &mut rng)).unwrap();
        let c0 = DenseMatrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..1.0));
        let mut blocked = c0.clone();
        apply_block_left(&accumulate_wy(std::slice::from_ref(&r)).unwrap(), &mut blocked.view_mut())
            .unwrap();
        let mut scalar = c0.clone();
        apply_reflector_left(&r.v[1..], r.coeff, &mut scalar.view_mut());
        assert!(blocked.sub(&scalar).max_abs() <= 1e-15);
    }

    #[test]
    fn block_application_matches_dense_and_sequential() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let (m, k, n) = (64, 12, 64);
        let rs = random_reflectors(m, k, &mut rng);
        let block = accumulate_wy(&rs).unwrap();
        let c0 = DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));

        let mut blocked = c0.clone();
        apply_block_left(&block, &mut blocked.view_mut()).unwrap();

        let dense = block.to_dense().transpose().matmul(&c0);
        assert!(blocked.sub(&dense).max_abs() <= 1e-12);

        let mut sequential = c0.clone();
        for r in &rs {
            let off = m - r.len();
            let mut view = sequential.submatrix_mut(off, 0, r.len(), n);
            apply_reflector_left(&r.v[1..], r.coeff, &mut view);
        }
        assert!(blocked.sub(&sequential).max_abs() <= 1e-12);

        let rel = (blocked.frobenius_norm() - c0.frobenius_norm()).abs() / c0.frobenius_norm();
        assert!(rel <= 1e-13);
    }

    #[test]
    fn block_rejects_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let block = accumulate_wy(&random_reflectors(5, 2, &mut rng)).unwrap();
        let mut c = DenseMatrix::zeros(4, 3);
        assert!(apply_block_left(&block, &mut c.view_mut()).is_err());
    }
}
