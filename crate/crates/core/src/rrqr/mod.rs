//! Pivoted QR drivers: classical column pivoting (QRP), Deviation
//! Maximization block pivoting (QRDM), and QRDM with the within-block length
//! check (QRDM2).
//!
//! All drivers overwrite a working copy of `A` with the packed factorization
//! `A * Pi = Q * R`: `R` on and above the diagonal, the essential parts of the
//! Householder vectors below it.

mod norms;

pub use norms::{check_stop, downdate_norms, PartialNorms, StopCriterion};

use crate::dm::{dm_select, DmParams};
use crate::error::{Error, Result};
use crate::householder::{apply_packed, apply_wy_transpose, reflect_in_place, wy_factor};
use crate::matrix::{argmax, norm2, DenseMatrix, Permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Qrp,
    Qrdm,
    Qrdm2,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Qrp => "qrp",
            Algorithm::Qrdm => "qrdm",
            Algorithm::Qrdm2 => "qrdm2",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qrp" => Ok(Algorithm::Qrp),
            "qrdm" => Ok(Algorithm::Qrdm),
            "qrdm2" => Ok(Algorithm::Qrdm2),
            other => Err(Error::InvalidArgument(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Diagnostics for one outer step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Columns already factored when the step began.
    pub n_s: usize,
    pub k_selected: usize,
    pub k_accepted: usize,
    pub broke_early: bool,
    pub fell_back_to_scalar: bool,
    /// Length-check threshold (zero when no check was made).
    pub eps_s: f64,
    /// Columns entering the cosine filter, seed included.
    pub k_max: usize,
    /// Dominance gap of the selected block, when a selection was made.
    pub gamma: Option<f64>,
}

/// Flop counts by kind of update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WorkStats {
    /// Single reflectors applied as rank-1 updates.
    pub rank1: f64,
    /// Compact WY blocks applied to trailing columns.
    pub blocked: f64,
    /// Reflector generation, WY formation, cosines, norms.
    pub other: f64,
}

impl WorkStats {
    pub fn total(&self) -> f64 {
        self.rank1 + self.blocked + self.other
    }

    pub fn blocked_fraction(&self) -> f64 {
        frac(self.blocked, self.total())
    }

    pub fn rank1_fraction(&self) -> f64 {
        frac(self.rank1, self.total())
    }
}

fn frac(x: f64, total: f64) -> f64 {
    if total > 0.0 {
        x / total
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RRQRResult {
    pub algorithm: Algorithm,
    pub packed: DenseMatrix,
    /// One coefficient per reflector; reflector `i` lives in column `i`.
    pub coeffs: Vec<f64>,
    pub perm: Permutation,
    pub rank: usize,
    pub step_log: Vec<StepRecord>,
    /// True when the stopping test ended the factorization.
    pub stopped: bool,
    /// Largest column norm of the input.
    pub initial_max_norm: f64,
    pub work: WorkStats,
}

impl RRQRResult {
    pub fn rows(&self) -> usize {
        self.packed.rows()
    }

    pub fn cols(&self) -> usize {
        self.packed.cols()
    }

    pub fn reflector_count(&self) -> usize {
        self.coeffs.len()
    }

    /// `r_11, ..., r_kk` for the `k` computed reflectors.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.coeffs.len()).map(|i| self.packed[(i, i)]).collect()
    }

    /// Leading `k x k` triangular block of `R`.
    pub fn r11(&self, k: usize) -> DenseMatrix {
        DenseMatrix::from_fn(k, k, |i, j| if i <= j { self.packed[(i, j)] } else { 0.0 })
    }

    /// Explicit `Q` (`m x m`) and `R` (`m x n`) with `Q * R = A * Pi`.
    ///
    /// `R` is upper triangular in its first `reflector_count()` columns;
    /// when the stopping test fired, the remaining columns carry the
    /// unreduced trailing block below the factored rows.
    pub fn reconstruct(&self) -> (DenseMatrix, DenseMatrix) {
        reconstruct(self)
    }
}

pub fn reconstruct(result: &RRQRResult) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = result.packed.shape();
    let k = result.coeffs.len();
    let mut q = DenseMatrix::identity(m);
    for i in (0..k).rev() {
        let essential = &result.packed.col(i)[i + 1..];
        let coeff = result.coeffs[i];
        for j in i..m {
            apply_packed(essential, coeff, &mut q.col_mut(j)[i..]);
        }
    }
    let r = DenseMatrix::from_fn(m, n, |i, j| {
        if i <= j || j >= k {
            result.packed[(i, j)]
        } else {
            0.0
        }
    });
    (q, r)
}

/// State handed to a step observer after every outer step.
pub struct StepSnapshot<'a> {
    /// Columns factored so far.
    pub n_s: usize,
    pub matrix: &'a DenseMatrix,
    pub norms: &'a PartialNorms,
    pub record: &'a StepRecord,
}

pub fn qrp(a: DenseMatrix, stop: StopCriterion) -> Result<RRQRResult> {
    factorize(a, Algorithm::Qrp, &DmParams::default(), stop)
}

pub fn qrdm(a: DenseMatrix, params: &DmParams, stop: StopCriterion) -> Result<RRQRResult> {
    factorize(a, Algorithm::Qrdm, params, stop)
}

pub fn qrdm2(a: DenseMatrix, params: &DmParams, stop: StopCriterion) -> Result<RRQRResult> {
    factorize(a, Algorithm::Qrdm2, params, stop)
}

/// Runs `algorithm` on `a`; `params` is ignored by QRP.
pub fn factorize(
    a: DenseMatrix,
    algorithm: Algorithm,
    params: &DmParams,
    stop: StopCriterion,
) -> Result<RRQRResult> {
    factorize_observed(a, algorithm, params, stop, &mut |_| {})
}

/// As [`factorize`], calling `observer` after each outer step.
pub fn factorize_observed(
    a: DenseMatrix,
    algorithm: Algorithm,
    params: &DmParams,
    stop: StopCriterion,
    observer: &mut dyn FnMut(&StepSnapshot<'_>),
) -> Result<RRQRResult> {
    if algorithm != Algorithm::Qrp {
        params.validate()?;
    }
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("cannot factor a {m}x{n} matrix")));
    }
    let mut f = Factorization::new(a);
    let kmax = m.min(n);
    let floor = n as f64 * f64::EPSILON * f.initial_max_norm;
    let mut stopped = false;

    while f.n_s < kmax {
        if check_stop(&f.norms, f.initial_max_norm, n, f.n_s, stop) {
            stopped = true;
            break;
        }
        let n_s = f.n_s;
        let record = match algorithm {
            Algorithm::Qrp => f.scalar_step(false),
            Algorithm::Qrdm | Algorithm::Qrdm2 => {
                let trailing = f.a.submatrix(n_s, n_s, m - n_s, n - n_s);
                match dm_select(trailing, &f.norms.u[n_s..], params, floor) {
                    Ok(sel) => {
                        let abs: Vec<usize> = sel.indices.iter().map(|&i| n_s + i).collect();
                        f.work.other += (sel.k_max * sel.k_max) as f64 * (m - n_s) as f64;
                        f.block_step(
                            &abs,
                            params.tau,
                            algorithm == Algorithm::Qrdm2,
                            sel.k_max,
                            sel.gamma,
                        )
                    }
                    Err(Error::NormFloor { .. })
                    | Err(Error::EmptyCandidates)
                    | Err(Error::DegenerateColumn(_)) => f.scalar_step(true),
                    Err(e) => return Err(e),
                }
            }
        };
        observer(&StepSnapshot {
            n_s: f.n_s,
            matrix: &f.a,
            norms: &f.norms,
            record: &record,
        });
        f.log.push(record);
    }

    // A block may run past the numerical rank before the stopping test gets
    // another look, so negligible diagonal entries cap the reported rank.
    let eps1 = stop.eps1(n).unwrap_or(f64::EPSILON * n as f64);
    let threshold = eps1 * f.initial_max_norm;
    let significant = (0..f.coeffs.len())
        .filter(|&i| f.a[(i, i)].abs() > threshold)
        .count();
    let rank = if stop == StopCriterion::None {
        significant
    } else {
        f.n_s.min(significant)
    };
    Ok(RRQRResult {
        algorithm,
        packed: f.a,
        coeffs: f.coeffs,
        perm: f.perm,
        rank,
        step_log: f.log,
        stopped,
        initial_max_norm: f.initial_max_norm,
        work: f.work,
    })
}

struct Factorization {
    a: DenseMatrix,
    norms: PartialNorms,
    perm: Permutation,
    coeffs: Vec<f64>,
    log: Vec<StepRecord>,
    work: WorkStats,
    n_s: usize,
    initial_max_norm: f64,
}

impl Factorization {
    fn new(a: DenseMatrix) -> Self {
        let norms = PartialNorms::new(a.view());
        let initial_max_norm = norms.max_from(0);
        let n = a.cols();
        Self {
            a,
            norms,
            perm: Permutation::identity(n),
            coeffs: Vec::new(),
            log: Vec::new(),
            work: WorkStats::default(),
            n_s: 0,
            initial_max_norm,
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap_columns(i, j);
            self.norms.swap(i, j);
            self.perm.swap(i, j);
        }
    }

    /// Generates the reflector for column `k` (rows `k..`) and applies it to
    /// columns `k+1..end`.
    fn reflect(&mut self, k: usize, end: usize) {
        let m = self.a.rows();
        let data = self.a.data_mut();
        let (coeff, _) = reflect_in_place(&mut data[k * m + k..(k + 1) * m]);
        self.coeffs.push(coeff);
        self.work.other += 3.0 * (m - k) as f64;
        if coeff == 0.0 || end <= k + 1 {
            return;
        }
        let (left, right) = data.split_at_mut((k + 1) * m);
        let essential = &left[k * m + k + 1..];
        for j in 0..end - k - 1 {
            apply_packed(essential, coeff, &mut right[j * m + k..(j + 1) * m]);
        }
        self.work.rank1 += 4.0 * ((m - k) * (end - k - 1)) as f64;
    }

    /// One column of classical pivoting.
    fn scalar_step(&mut self, fallback: bool) -> StepRecord {
        let n_s = self.n_s;
        let n = self.a.cols();
        let j = n_s + argmax(&self.norms.u[n_s..]).expect("trailing columns remain");
        self.swap(n_s, j);
        self.reflect(n_s, n);
        self.downdate(n_s, n_s + 1);
        self.n_s += 1;
        StepRecord {
            n_s,
            k_selected: 1,
            k_accepted: 1,
            broke_early: false,
            fell_back_to_scalar: fallback,
            eps_s: 0.0,
            k_max: 1,
            gamma: None,
        }
    }

    /// Moves the selected columns to the front of the trailing matrix,
    /// triangularizes them with rank-1 updates confined to the block, and
    /// updates the remaining columns with one compact WY block.
    fn block_step(
        &mut self,
        selected: &[usize],
        tau: f64,
        length_check: bool,
        k_max: usize,
        gamma: f64,
    ) -> StepRecord {
        let n_s = self.n_s;
        let (m, n) = self.a.shape();
        let k = selected.len();
        let eps_s = tau * self.norms.max_from(n_s);

        let mut pos = selected.to_vec();
        for i in 0..k {
            let (src, dst) = (pos[i], n_s + i);
            if src != dst {
                self.swap(dst, src);
                // the column that sat at dst now sits at src
                for p in &mut pos[i + 1..] {
                    if *p == dst {
                        *p = src;
                    }
                }
            }
        }

        let mut accepted = 0;
        let mut broke = false;
        for l in 0..k {
            let c = n_s + l;
            if length_check && l > 0 {
                let tail = norm2(self.a.col(c)[c..].iter().copied());
                self.work.other += 2.0 * (m - c) as f64;
                if tail < eps_s {
                    broke = true;
                    break;
                }
            }
            self.reflect(c, n_s + k);
            accepted += 1;
        }

        let rest = n_s + k;
        if rest < n {
            if accepted == 1 {
                let coeff = self.coeffs[n_s];
                let data = self.a.data_mut();
                let (left, right) = data.split_at_mut((n_s + 1) * m);
                let essential = &left[n_s * m + n_s + 1..];
                let skip = (rest - n_s - 1) * m;
                for j in 0..n - rest {
                    let start = skip + j * m + n_s;
                    apply_packed(essential, coeff, &mut right[start..start + m - n_s]);
                }
                self.work.rank1 += 4.0 * ((m - n_s) * (n - rest)) as f64;
            } else {
                let rows = m - n_s;
                let y = DenseMatrix::from_fn(rows, accepted, |i, l| match i.cmp(&l) {
                    std::cmp::Ordering::Less => 0.0,
                    std::cmp::Ordering::Equal => 1.0,
                    std::cmp::Ordering::Greater => self.a[(n_s + i, n_s + l)],
                });
                let w = wy_factor(y.view(), &self.coeffs[n_s..n_s + accepted]);
                let mut c = self.a.submatrix_mut(n_s, rest, rows, n - rest);
                apply_wy_transpose(y.view(), &w, &mut c).expect("block shapes agree");
                let (r, kk, cols) = (rows as f64, accepted as f64, (n - rest) as f64);
                self.work.other += 2.0 * r * kk * kk;
                self.work.blocked += 4.0 * r * kk * cols + kk * kk * cols;
            }
        }

        self.downdate(n_s, n_s + accepted);
        self.n_s += accepted;
        StepRecord {
            n_s,
            k_selected: k,
            k_accepted: accepted,
            broke_early: broke,
            fell_back_to_scalar: false,
            eps_s: if length_check { eps_s } else { 0.0 },
            k_max,
            gamma: Some(gamma),
        }
    }

    fn downdate(&mut self, n_s: usize, n_s1: usize) {
        downdate_norms(&mut self.norms, &self.a, n_s, n_s1);
        let (m, n) = self.a.shape();
        self.work.other += 2.0 * ((n_s1 - n_s).min(m) * n.saturating_sub(n_s1)) as f64;
    }
}
