//! Solution groups of integer systems with coefficients in `Q/Z`.
//!
//! For an integer matrix `M` with `c` columns let `S = {x in (Q/Z)^c : Mx = 0}`.
//! `S` is dual to the cokernel `A = Z^c / rowspace(M)`, so it splits as a
//! divisible part `(Q/Z)^(c - rank M)` plus a finite part isomorphic to the
//! torsion of `A`. Quotienting by `T = B*Q^k mod Z^c` (with `MB = 0`) leaves a
//! finite group exactly when `T` fills the divisible part, which happens iff
//! `rank B = c - rank M`; the quotient is then the torsion of `A`.

use super::dense::DenseIntMatrix;
use super::int::{rem_euclid, Int};
use super::smith::{dense_smith, reduce_sparse, smith_normal_form, SmithLimits};
use super::sparse::SparseIntMatrix;
use super::LinalgError;

/// Invariant factors (> 1) of `{x in (Q/Z)^c : Mx = 0} / (B Q^k mod Z^c)`.
pub fn qz_solution_group(m: &SparseIntMatrix, b: &SparseIntMatrix) -> Result<Vec<Int>, LinalgError> {
    if b.rows() != m.cols() {
        return Err(LinalgError::DimensionMismatch { left: (m.rows(), m.cols()), right: (b.rows(), b.cols()) });
    }
    if !m.mul(b)?.is_zero() {
        return Err(LinalgError::ProductNotZero);
    }
    let sm = smith_normal_form(m, false)?;
    let sb = smith_normal_form(b, false)?;
    let kernel_rank = m.cols() - sm.rank;
    if sb.rank != kernel_rank {
        return Err(LinalgError::NonFiniteQuotient { image_rank: sb.rank, kernel_rank });
    }
    Ok(sm.torsion())
}

/// One generator of the finite part of `{x in (Q/Z)^c : Mx = 0}`:
/// `x = numerators / order`, an element of exact order `order` modulo the
/// divisible part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionGenerator {
    pub order: Int,
    /// Residues in `[0, order)`.
    pub numerators: Vec<Int>,
}

/// Generators of the finite part of the `Q/Z` solutions of `Mx = 0`, one per
/// invariant factor greater than one, in increasing order.
pub fn qz_torsion_generators(m: &SparseIntMatrix) -> Result<Vec<TorsionGenerator>, LinalgError> {
    let limits = SmithLimits::default();
    let reduced = reduce_sparse(m, &limits, true)?;
    let mut block = reduced.echelon_dense();
    let n = block.cols();
    let mut u = DenseIntMatrix::identity(block.rows());
    let mut v = DenseIntMatrix::identity(n);
    let factors = dense_smith(&mut block, Some((&mut u, &mut v)), &limits)?;
    let mut out = Vec::new();
    for (i, d) in factors.iter().enumerate() {
        if d.is_one() {
            continue;
        }
        let mut x = vec![Int::ZERO; m.cols()];
        for (k, &col) in reduced.residual_cols.iter().enumerate() {
            x[col] = rem_euclid(v.get(k, i), d);
        }
        // unit * x_col + sum_{j != col} a_j x_j = 0 with unit = ±1
        for (col, unit, row) in reduced.pivot_rows.iter().rev() {
            let mut acc = Int::ZERO;
            for (j, a) in row {
                if j != col {
                    acc += a * &x[*j];
                }
            }
            x[*col] = rem_euclid(&-(acc * unit), d);
        }
        out.push(TorsionGenerator { order: d.clone(), numerators: x });
    }
    Ok(out)
}
