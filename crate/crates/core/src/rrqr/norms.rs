//! Partial column norms and the stopping test.

use crate::matrix::{column_norms, norm2, DenseMatrix, MatrixView};

/// Downdated trailing-column norms with a cancellation guard.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialNorms {
    pub u: Vec<f64>,
    /// Value of `u` at its last exact computation.
    pub u_ref: Vec<f64>,
    /// A norm is recomputed from the matrix once its downdated square drops
    /// to this fraction of `u_ref^2`.
    pub recompute_threshold: f64,
    pub recomputations: usize,
}

impl PartialNorms {
    pub const DEFAULT_THRESHOLD: f64 = 1e-2;

    pub fn new(a: MatrixView<'_>) -> Self {
        let u = column_norms(a);
        Self {
            u_ref: u.clone(),
            u,
            recompute_threshold: Self::DEFAULT_THRESHOLD,
            recomputations: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn swap(&mut self, i: usize, j: usize) {
        self.u.swap(i, j);
        self.u_ref.swap(i, j);
    }

    /// Largest norm among columns `from..`.
    pub fn max_from(&self, from: usize) -> f64 {
        self.u[from..].iter().copied().fold(0.0, f64::max)
    }
}

/// Removes rows `n_s..n_s1` of `a` from the norms of columns `n_s1..` and
/// zeroes the norms of columns `..n_s1`.
///
/// `a` is the working matrix after the rows `n_s..n_s1` of `R` have been
/// produced. A downdated square at or below `recompute_threshold * u_ref^2`
/// (including a negative one) is replaced by the exact norm of
/// `a[n_s1.., j]`.
pub fn downdate_norms(pn: &mut PartialNorms, a: &DenseMatrix, n_s: usize, n_s1: usize) {
    let (m, n) = a.shape();
    debug_assert!(n_s <= n_s1 && n_s1 <= n && pn.len() == n);
    let last_row = n_s1.min(m);
    for j in 0..n_s1.min(n) {
        pn.u[j] = 0.0;
        pn.u_ref[j] = 0.0;
    }
    for j in n_s1..n {
        let col = a.col(j);
        let removed: f64 = col[n_s.min(m)..last_row].iter().map(|x| x * x).sum();
        if removed == 0.0 {
            continue;
        }
        let uj = pn.u[j];
        let sq = (uj - removed.sqrt()) * (uj + removed.sqrt());
        let rf = pn.u_ref[j];
        if sq <= pn.recompute_threshold * rf * rf {
            let exact = norm2(col[last_row..].iter().copied());
            pn.u[j] = exact;
            pn.u_ref[j] = exact;
            pn.recomputations += 1;
        } else {
            pn.u[j] = sq.sqrt();
        }
    }
}

/// Which relative tolerance the stopping test uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopCriterion {
    /// `eps_1 = eps * n`.
    #[default]
    EpsTimesN,
    /// `eps_1 = eps * sqrt(n)`.
    EpsTimesSqrtN,
    /// Never stop early; factor every column.
    None,
}

impl StopCriterion {
    pub fn eps1(self, n: usize) -> Option<f64> {
        let n = n as f64;
        match self {
            StopCriterion::EpsTimesN => Some(f64::EPSILON * n),
            StopCriterion::EpsTimesSqrtN => Some(f64::EPSILON * n.sqrt()),
            StopCriterion::None => Option::None,
        }
    }
}

/// True when `sqrt(n - n_s) * max_{j >= n_s} u_j <= eps_1 * initial_max_norm`.
pub fn check_stop(
    pn: &PartialNorms,
    initial_max_norm: f64,
    n: usize,
    n_s: usize,
    stop: StopCriterion,
) -> bool {
    let Some(eps1) = stop.eps1(n) else {
        return false;
    };
    let remaining = n.saturating_sub(n_s) as f64;
    remaining.sqrt() * pn.max_from(n_s.min(pn.len())) <= eps1 * initial_max_norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rows_leave_norms() {
        let a = DenseMatrix::from_rows(&[&[0.0, 0.0], &[3.0, 4.0], &[4.0, 3.0]]).unwrap();
        let mut pn = PartialNorms::new(a.view());
        let before = pn.u.clone();
        downdate_norms(&mut pn, &a, 0, 1);
        assert_eq!(pn.u[1], before[1]);
        assert_eq!(pn.u[0], 0.0);
    }

    #[test]
    fn consumed_column_recomputes_to_zero() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 0.0]]).unwrap();
        let mut pn = PartialNorms::new(a.view());
        downdate_norms(&mut pn, &a, 0, 1);
        assert_eq!(pn.u[1], 0.0);
        assert_eq!(pn.recomputations, 1);
    }

    #[test]
    fn plain_downdate() {
        let a = DenseMatrix::from_rows(&[&[1.0, 3.0], &[0.0, 4.0], &[0.0, 0.0]]).unwrap();
        let mut pn = PartialNorms::new(a.view());
        downdate_norms(&mut pn, &a, 0, 1);
        assert!((pn.u[1] - 4.0).abs() < 1e-15);
        assert_eq!(pn.recomputations, 0);
    }

    #[test]
    fn stop_choices() {
        let zero = PartialNorms {
            u: vec![0.0; 3],
            u_ref: vec![0.0; 3],
            recompute_threshold: 1e-2,
            recomputations: 0,
        };
        assert!(check_stop(&zero, 1.0, 3, 0, StopCriterion::EpsTimesN));
        assert!(check_stop(&zero, 1.0, 3, 0, StopCriterion::EpsTimesSqrtN));
        assert!(!check_stop(&zero, 1.0, 3, 0, StopCriterion::None));

        let fresh = PartialNorms::new(DenseMatrix::identity(4).view());
        assert!(!check_stop(&fresh, 1.0, 4, 0, StopCriterion::EpsTimesN));

        // one trailing column at amplitude eps * n * ||A|| / 2
        let n = 100;
        let mut u = vec![0.0; n];
        u[n - 1] = f64::EPSILON * n as f64 / 2.0;
        let pn = PartialNorms {
            u_ref: u.clone(),
            u,
            recompute_threshold: 1e-2,
            recomputations: 0,
        };
        assert!(check_stop(&pn, 1.0, n, n - 1, StopCriterion::EpsTimesN));
        assert!(!check_stop(&pn, 1.0, n, n - 1, StopCriterion::EpsTimesSqrtN));
    }
}
