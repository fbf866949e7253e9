//! Dense column-major storage, strided views, norms, permutations and the
//! matrix-matrix product used by the blocked updates.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{mismatch, Error, Result};

/// Column-major dense real matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Wraps a column-major buffer, rejecting wrong lengths and non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(mismatch(
                "from_col_major",
                format!("{} values for a {rows}x{cols} matrix", data.len()),
            ));
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: k % rows.max(1),
                col: k / rows.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices; convenient for literals in tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(mismatch("from_rows", "ragged rows"));
        }
        Self::from_col_major(
            m,
            n,
            (0..n).flat_map(|j| rows.iter().map(move |r| r[j])).collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Exchanges two columns without any scratch storage.
    pub fn swap_columns(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let m = self.rows;
        let (head, tail) = self.data.split_at_mut(hi * m);
        head[lo * m..(lo + 1) * m].swap_with_slice(&mut tail[..m]);
    }

    pub fn view(&self) -> MatrixView<'_> {
        MatrixView {
            data: &self.data,
            rows: self.rows,
            cols: self.cols,
            row_stride: 1,
            col_stride: self.rows,
        }
    }

    pub fn view_mut(&mut self) -> MatrixViewMut<'_> {
        MatrixViewMut {
            rows: self.rows,
            cols: self.cols,
            ld: self.rows,
            data: &mut self.data,
        }
    }

    /// Borrow of the block `[row0..row0+rows, col0..col0+cols]`.
    ///
    /// Panics when the block does not fit inside the matrix.
    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> MatrixView<'_> {
        self.view().submatrix(row0, col0, rows, cols)
    }

    pub fn submatrix_mut(
        &mut self,
        row0: usize,
        col0: usize,
        rows: usize,
        cols: usize,
    ) -> MatrixViewMut<'_> {
        assert!(
            row0 + rows <= self.rows && col0 + cols <= self.cols,
            "block {rows}x{cols} at ({row0}, {col0}) exceeds {}x{}",
            self.rows,
            self.cols
        );
        let ld = self.rows;
        let start = if rows == 0 || cols == 0 {
            0
        } else {
            row0 + col0 * ld
        };
        MatrixViewMut {
            rows,
            cols,
            ld,
            data: &mut self.data[start..],
        }
    }

    /// Copies the listed columns, in order, into a new matrix.
    pub fn select_columns(&self, indices: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, indices.len());
        for (k, &j) in indices.iter().enumerate() {
            out.col_mut(k).copy_from_slice(self.col(j));
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        self.view().t().to_owned()
    }

    /// `self * rhs`, panicking on mismatched shapes.
    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        gemm(1.0, self.view(), rhs.view(), 0.0, &mut out.view_mut())
            .expect("matmul shapes must agree");
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(self.data.iter().copied())
    }

    /// Largest absolute entry (the max-norm).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), rhs.shape());
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|x| *x *= alpha);
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.5e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Read-only strided window into a matrix. Transposition only swaps strides.
#[derive(Clone, Copy)]
pub struct MatrixView<'a> {
    data: &'a [f64],
    rows: usize,
    cols: usize,
    row_stride: usize,
    col_stride: usize,
}

impl<'a> MatrixView<'a> {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.row_stride + j * self.col_stride]
    }

    pub fn t(self) -> MatrixView<'a> {
        MatrixView {
            data: self.data,
            rows: self.cols,
            cols: self.rows,
            row_stride: self.col_stride,
            col_stride: self.row_stride,
        }
    }

    pub fn submatrix(self, row0: usize, col0: usize, rows: usize, cols: usize) -> MatrixView<'a> {
        assert!(
            row0 + rows <= self.rows && col0 + cols <= self.cols,
            "block {rows}x{cols} at ({row0}, {col0}) exceeds {}x{}",
            self.rows,
            self.cols
        );
        let start = if rows == 0 || cols == 0 {
            0
        } else {
            row0 * self.row_stride + col0 * self.col_stride
        };
        MatrixView {
            data: &self.data[start..],
            rows,
            cols,
            row_stride: self.row_stride,
            col_stride: self.col_stride,
        }
    }

    /// Contiguous column slice; only available for unit row stride.
    pub fn col(&self, j: usize) -> Option<&'a [f64]> {
        if self.row_stride != 1 || self.rows == 0 {
            return None;
        }
        let start = j * self.col_stride;
        Some(&self.data[start..start + self.rows])
    }

    pub fn column_iter(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |i| self.get(i, j))
    }

    pub fn to_owned(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }
}

/// Mutable column-major window (unit row stride).
pub struct MatrixViewMut<'a> {
    data: &'a mut [f64],
    rows: usize,
    cols: usize,
    ld: usize,
}

impl<'a> MatrixViewMut<'a> {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.ld]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.ld] = value;
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        let start = j * self.ld;
        &mut self.data[start..start + self.rows]
    }

    pub fn col(&self, j: usize) -> &[f64] {
        let start = j * self.ld;
        &self.data[start..start + self.rows]
    }

    pub fn as_view(&self) -> MatrixView<'_> {
        MatrixView {
            data: self.data,
            rows: self.rows,
            cols: self.cols,
            row_stride: 1,
            col_stride: self.ld,
        }
    }

    pub fn reborrow(&mut self) -> MatrixViewMut<'_> {
        MatrixViewMut {
            data: self.data,
            rows: self.rows,
            cols: self.cols,
            ld: self.ld,
        }
    }
}

/// `C <- alpha * A * B + beta * C`.
///
/// Backed by a packed, cache-blocked micro-kernel; when `beta == 0` the prior
/// contents of `C` are never read.
pub fn gemm(
    alpha: f64,
    a: MatrixView<'_>,
    b: MatrixView<'_>,
    beta: f64,
    c: &mut MatrixViewMut<'_>,
) -> Result<()> {
    if a.cols != b.rows || a.rows != c.rows || b.cols != c.cols {
        return Err(mismatch(
            "gemm",
            format!(
                "({}x{}) * ({}x{}) into ({}x{})",
                a.rows, a.cols, b.rows, b.cols, c.rows, c.cols
            ),
        ));
    }
    let (m, k, n) = (a.rows, a.cols, b.cols);
    if m == 0 || n == 0 {
        return Ok(());
    }
    if k == 0 || alpha == 0.0 {
        for j in 0..n {
            for x in c.col_mut(j) {
                *x = if beta == 0.0 { 0.0 } else { beta * *x };
            }
        }
        return Ok(());
    }
    // SAFETY: every view was bounds-checked on construction so all strided
    // offsets below (m-1)*rs + (k-1)*cs lie inside the borrowed slices, and
    // `c` is an exclusive borrow so it cannot alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            a.row_stride as isize,
            a.col_stride as isize,
            b.data.as_ptr(),
            b.row_stride as isize,
            b.col_stride as isize,
            beta,
            c.data.as_mut_ptr(),
            1,
            c.ld as isize,
        );
    }
    Ok(())
}

/// Euclidean norm with running rescaling, so neither huge nor tiny entries
/// overflow or underflow the accumulator.
pub fn norm2(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut scale = 0.0f64;
    let mut ssq = 1.0f64;
    for x in values {
        if x != 0.0 {
            let ax = x.abs();
            if scale < ax {
                let r = scale / ax;
                ssq = 1.0 + ssq * r * r;
                scale = ax;
            } else {
                let r = ax / scale;
                ssq += r * r;
            }
        }
    }
    scale * ssq.sqrt()
}

pub fn column_norms(a: MatrixView<'_>) -> Vec<f64> {
    (0..a.cols()).map(|j| norm2(a.column_iter(j))).collect()
}

/// Index of the largest entry; ties go to the smallest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Column permutation kept both as a forward map and as the log of
/// transpositions that produced it.
///
/// `forward[k]` is the original column now sitting at position `k`, so
/// applying the permutation to `A` yields `A * Pi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    swaps: Vec<(usize, usize)>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            forward: (0..n).collect(),
            swaps: Vec::new(),
        }
    }

    /// Builds a permutation from its forward map, deriving a swap log of at
    /// most `n - 1` transpositions.
    pub fn from_forward(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &k in &map {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, len: n });
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidArgument(format!(
                    "index {k} repeated in permutation"
                )));
            }
        }
        let mut p = Self::identity(n);
        let mut position: Vec<usize> = (0..n).collect();
        for (k, &want) in map.iter().enumerate() {
            let at = position[want];
            if at != k {
                let displaced = p.forward[k];
                p.swap(k, at);
                position[displaced] = at;
                position[want] = k;
            }
        }
        debug_assert_eq!(p.forward, map);
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn swaps(&self) -> &[(usize, usize)] {
        &self.swaps
    }

    /// Exchanges positions `i` and `j`. Panics on out-of-range positions.
    pub fn swap(&mut self, i: usize, j: usize) {
        self.forward.swap(i, j);
        if i != j {
            self.swaps.push((i, j));
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.forward.len()];
        for (k, &f) in self.forward.iter().enumerate() {
            inv[f] = k;
        }
        Self {
            forward: inv,
            swaps: self.swaps.iter().rev().copied().collect(),
        }
    }

    /// Forward map obtained by replaying the swap log from the identity.
    pub fn replay(&self) -> Vec<usize> {
        let mut map: Vec<usize> = (0..self.forward.len()).collect();
        for &(i, j) in &self.swaps {
            map.swap(i, j);
        }
        map
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.forward.len()];
        self.forward
            .iter()
            .all(|&k| k < seen.len() && !std::mem::replace(&mut seen[k], true))
    }
}

/// Replays the swap log of `p` on the columns of `a`, producing `A * Pi` in place.
pub fn apply_column_swaps(a: &mut DenseMatrix, p: &Permutation) -> Result<()> {
    if p.len() != a.cols() {
        return Err(mismatch(
            "apply_column_swaps",
            format!("permutation of {} for {} columns", p.len(), a.cols()),
        ));
    }
    for &(i, j) in p.swaps() {
        let bad = i.max(j);
        if bad >= a.cols() {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: a.cols(),
            });
        }
        a.swap_columns(i, j);
    }
    Ok(())
}
