//! Deviation Maximization: pick a block of long, mutually well-separated
//! columns from a trailing matrix.
//!
//! The seed is the longest column. Every other column whose norm reaches
//! `tau * max` becomes a candidate (longest first, at most `k_dm - 1` of
//! them), and a candidate is accepted when the absolute cosine of its angle
//! with every already accepted column stays below `delta`.

use std::borrow::Cow;

use crate::error::{mismatch, Error, Result};
use crate::householder::dot;
use crate::matrix::{argmax, column_norms, DenseMatrix, MatrixView};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmParams {
    /// Relative norm threshold, in `(0, 1]`.
    pub tau: f64,
    /// Cosine threshold, in `[0, 1)`.
    pub delta: f64,
    /// Largest block the selection may return.
    pub k_dm: usize,
    /// Replace `delta` by `tau^2 / (k_max - 1)` at every selection.
    pub use_delta_max: bool,
}

impl Default for DmParams {
    fn default() -> Self {
        Self {
            tau: 0.15,
            delta: 0.9,
            k_dm: 64,
            use_delta_max: false,
        }
    }
}

impl DmParams {
    pub fn new(tau: f64, delta: f64, k_dm: usize) -> Result<Self> {
        let p = Self {
            tau,
            delta,
            k_dm,
            use_delta_max: false,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for the regime in which every selected block provably
    /// satisfies the smallest-singular-value bound.
    pub fn with_delta_max(tau: f64, k_dm: usize) -> Result<Self> {
        let p = Self {
            tau,
            delta: 0.0,
            k_dm,
            use_delta_max: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tau must lie in (0, 1], got {}",
                self.tau
            )));
        }
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in [0, 1), got {}",
                self.delta
            )));
        }
        if self.k_dm == 0 {
            return Err(Error::InvalidArgument("k_dm must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    /// Longest column (smallest index among ties).
    pub seed: usize,
    /// Other columns passing the norm threshold, longest first, capped.
    pub candidates: Vec<usize>,
    /// Number of non-seed columns passing the threshold before the cap.
    pub passing: usize,
}

/// Seed and capped candidate list for the norms `u`. With `k_dm = 1` the
/// list is always empty.
pub fn candidate_set(u: &[f64], tau: f64, k_dm: usize) -> Result<CandidateSet> {
    let seed = argmax(u).ok_or(Error::EmptyCandidates)?;
    let max = u[seed];
    if max <= 0.0 {
        return Err(Error::EmptyCandidates);
    }
    let threshold = tau * max;
    let mut candidates: Vec<usize> = (0..u.len())
        .filter(|&i| i != seed && u[i] >= threshold)
        .collect();
    let passing = candidates.len();
    // descending norm, ascending index on ties
    candidates.sort_by(|&a, &b| u[b].total_cmp(&u[a]).then(a.cmp(&b)));
    candidates.truncate(k_dm.saturating_sub(1));
    Ok(CandidateSet {
        seed,
        candidates,
        passing,
    })
}

fn column<'a>(a: &MatrixView<'a>, j: usize) -> Cow<'a, [f64]> {
    match a.col(j) {
        Some(c) => Cow::Borrowed(c),
        None => Cow::Owned(a.column_iter(j).collect()),
    }
}

/// Cosine matrix of the listed columns of `a`: the Gram matrix of the upper
/// triangle, scaled on both sides by the inverse column norms and mirrored.
pub(crate) fn cosine_matrix_of(a: MatrixView<'_>, cols: &[usize]) -> Result<DenseMatrix> {
    let k = cols.len();
    let columns: Vec<Cow<'_, [f64]>> = cols.iter().map(|&j| column(&a, j)).collect();
    let mut theta = DenseMatrix::zeros(k, k);
    for j in 0..k {
        for i in 0..=j {
            theta[(i, j)] = dot(&columns[i], &columns[j]);
        }
    }
    let mut d = Vec::with_capacity(k);
    for (i, &j) in cols.iter().enumerate() {
        let norm = theta[(i, i)].sqrt();
        if norm == 0.0 {
            return Err(Error::DegenerateColumn(j));
        }
        d.push(norm);
    }
    for j in 0..k {
        theta[(j, j)] = 1.0;
        for i in 0..j {
            let c = theta[(i, j)] / d[i] / d[j];
            theta[(i, j)] = c;
            theta[(j, i)] = c;
        }
    }
    Ok(theta)
}

/// `D^-1 C^T C D^-1` with `D` the column norms of `c`. Symmetric with a unit
/// diagonal.
pub fn cosine_matrix(c: MatrixView<'_>) -> Result<DenseMatrix> {
    let cols: Vec<usize> = (0..c.cols()).collect();
    cosine_matrix_of(c, &cols)
}

/// `min_i (1 - sum_{j != i} |theta_ij|)` over the index subset `idx`.
pub fn dominance_gap(theta: &DenseMatrix, idx: &[usize]) -> f64 {
    idx.iter()
        .map(|&i| {
            1.0 - idx
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| theta[(i, j)].abs())
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmSelection {
    /// Selected trailing-column indices; the first is the seed.
    pub indices: Vec<usize>,
    /// Columns entering the cosine filter, seed included.
    pub k_max: usize,
    /// Diagonal-dominance gap of the selected cosine submatrix.
    pub gamma: f64,
    /// Cosine threshold actually applied.
    pub delta: f64,
}

/// Runs Deviation Maximization on `trailing` given its column norms `u`.
///
/// Fails with [`Error::NormFloor`] when the largest norm does not exceed
/// `norm_floor`, the signal for the caller to fall back to scalar pivoting.
/// The block never exceeds the number of rows of `trailing`.
pub fn dm_select(
    trailing: MatrixView<'_>,
    u: &[f64],
    params: &DmParams,
    norm_floor: f64,
) -> Result<DmSelection> {
    if u.len() != trailing.cols() {
        return Err(mismatch(
            "dm_select",
            format!("{} norms for {} columns", u.len(), trailing.cols()),
        ));
    }
    let max = u.iter().copied().fold(0.0, f64::max);
    if max <= norm_floor || max == 0.0 {
        return Err(Error::NormFloor {
            max,
            floor: norm_floor,
        });
    }
    let cs = candidate_set(u, params.tau, params.k_dm)?;
    let mut cols = Vec::with_capacity(cs.candidates.len() + 1);
    cols.push(cs.seed);
    cols.extend_from_slice(&cs.candidates);
    let k_max = cols.len();

    let delta = if params.use_delta_max && k_max > 1 {
        params.tau * params.tau / (k_max - 1) as f64
    } else {
        params.delta
    };

    let mut accepted = vec![0usize];
    if k_max > 1 {
        let theta = cosine_matrix_of(trailing, &cols)?;
        for c in 1..k_max {
            if accepted.len() >= trailing.rows() {
                break;
            }
            if accepted.iter().all(|&j| theta[(c, j)].abs() < delta) {
                accepted.push(c);
            }
        }
        let gamma = dominance_gap(&theta, &accepted);
        return Ok(DmSelection {
            indices: accepted.iter().map(|&c| cols[c]).collect(),
            k_max,
            gamma,
            delta,
        });
    }
    Ok(DmSelection {
        indices: vec![cs.seed],
        k_max,
        gamma: 1.0,
        delta,
    })
}

/// Outcome of checking the hypotheses of the smallest-singular-value bound
/// `sigma_min(C) >= sqrt(gamma + tau^2 - 1) * ||c_1||`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Certificate {
    pub gamma: f64,
    /// Guaranteed lower bound on `sigma_min(C)`, zero when not applicable.
    pub bound: f64,
    /// Whether the hypotheses hold, making `bound` valid.
    pub holds: bool,
    pub max_norm: f64,
}

/// `c` must have nonzero columns and its first column must be the longest.
pub fn lemma1_certificate(c: MatrixView<'_>, tau: f64) -> Result<Lemma1Certificate> {
    if c.cols() == 0 {
        return Err(Error::InvalidArgument("empty column block".into()));
    }
    let norms = column_norms(c);
    let max_norm = norms[0];
    if norms.iter().any(|&x| x > max_norm) {
        return Err(Error::InvalidArgument(
            "first column must attain the maximum norm".into(),
        ));
    }
    let theta = cosine_matrix(c)?;
    let all: Vec<usize> = (0..c.cols()).collect();
    let gamma = dominance_gap(&theta, &all);
    let long_enough = norms.iter().all(|&x| x >= tau * max_norm);
    let holds = tau > 0.0 && tau <= 1.0 && long_enough && gamma > 1.0 - tau * tau;
    let bound = if holds {
        (gamma + tau * tau - 1.0).sqrt() * max_norm
    } else {
        0.0
    };
    Ok(Lemma1Certificate {
        gamma,
        bound,
        holds,
        max_norm,
    })
}
