//! Verification oracle: singular values by one-sided Jacobi and empirical
//! checks of the inequalities the pivoting strategies rely on.

mod bounds;
mod jacobi;

pub use bounds::{
    cosine_gap, interlacing_check, norm_bounds_check, normalized_gap, qrdm_theorem_check,
    qrp_theorem_check, row_inverse_bound_check, scaled_sdd_check, sdd_gap, varah_check,
    BoundReport, Dominance, ROUNDING_TOL,
};
pub use jacobi::{jacobi_svd, SpectrumReport, MAX_ORDER, MAX_SWEEPS};
