//! Smith normal form over the integers.
//!
//! Two paths share one contract. When transforms are requested the whole
//! matrix is diagonalised densely while `U` and `V` are accumulated. Otherwise
//! the matrix is first shrunk by sparse elimination on `±1` pivots, the
//! residual rows are brought to integer echelon form, and only that small
//! echelon block goes through the dense algorithm.

use std::collections::{BTreeMap, HashMap, HashSet};

use log::debug;

use super::dense::DenseIntMatrix;
use super::eliminate::{eliminate_units, IntRing};
use super::int::{abs, bit_len, div_rem_euclid, ext_gcd, Int};
use super::modp::rank_mod_p;
use super::sparse::SparseIntMatrix;
use super::LinalgError;

/// Resource limits for the exact path.
#[derive(Clone, Debug)]
pub struct SmithLimits {
    /// Largest admissible entry, in bits, anywhere during elimination.
    pub max_entry_bits: usize,
    /// Largest number of cells a dense working matrix may have.
    pub max_dense_cells: usize,
}

impl Default for SmithLimits {
    fn default() -> Self {
        SmithLimits { max_entry_bits: 4096, max_dense_cells: 16_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithTransforms {
    /// Unimodular `rows x rows` matrix.
    pub left: DenseIntMatrix,
    /// Unimodular `cols x cols` matrix.
    pub right: DenseIntMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithResult {
    /// Nonzero diagonal entries, each dividing the next.
    pub invariant_factors: Vec<Int>,
    pub rank: usize,
    pub nullity: usize,
    /// `left * M * right = diag(invariant_factors, 0, ...)` when present.
    pub transforms: Option<SmithTransforms>,
}

impl SmithResult {
    /// Invariant factors greater than one: the torsion of the cokernel.
    pub fn torsion(&self) -> Vec<Int> {
        self.invariant_factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

/// The prime used by the modular pre-pass.
pub const PREPASS_PRIME: u64 = 2_147_483_647;

pub fn smith_normal_form(m: &SparseIntMatrix, want_transforms: bool) -> Result<SmithResult, LinalgError> {
    smith_normal_form_with(m, want_transforms, &SmithLimits::default())
}

pub fn smith_normal_form_with(
    m: &SparseIntMatrix,
    want_transforms: bool,
    limits: &SmithLimits,
) -> Result<SmithResult, LinalgError> {
    if want_transforms {
        let cells = m.rows() * m.cols() + m.rows() * m.rows() + m.cols() * m.cols();
        if cells > limits.max_dense_cells {
            return Err(LinalgError::ResourceCap(format!(
                "dense Smith form with transforms needs {} cells (limit {})",
                cells, limits.max_dense_cells
            )));
        }
        let mut a = DenseIntMatrix::from_sparse(m);
        let mut u = DenseIntMatrix::identity(m.rows());
        let mut v = DenseIntMatrix::identity(m.cols());
        let factors = dense_smith(&mut a, Some((&mut u, &mut v)), limits)?;
        let rank = factors.len();
        return Ok(SmithResult {
            invariant_factors: factors,
            rank,
            nullity: m.cols() - rank,
            transforms: Some(SmithTransforms { left: u, right: v }),
        });
    }

    let prepass_rank = rank_mod_p(m, PREPASS_PRIME)?;
    let reduced = reduce_sparse(m, limits, false)?;
    let mut echelon = reduced.echelon_dense();
    let residual = dense_smith(&mut echelon, None, limits)?;
    let mut factors = vec![Int::ONE; reduced.unit_pivots];
    factors.extend(residual);
    let rank = factors.len();
    debug!(
        "smith: {}x{} nnz={} unit pivots={} residual echelon={}x{} rank={} (mod-p pre-pass {})",
        m.rows(),
        m.cols(),
        m.nnz(),
        reduced.unit_pivots,
        reduced.echelon.len(),
        reduced.residual_cols.len(),
        rank,
        prepass_rank
    );
    if rank < prepass_rank {
        return Err(LinalgError::Internal(format!(
            "exact rank {} below modular rank {}",
            rank, prepass_rank
        )));
    }
    Ok(SmithResult { invariant_factors: factors, rank, nullity: m.cols() - rank, transforms: None })
}

/// `(col, unit, row)` of one eliminated unit pivot.
pub(crate) type PivotRow = (usize, Int, Vec<(usize, Int)>);

/// Output of the sparse reduction: unit pivots plus an integer echelon basis
/// of what is left, on the surviving columns.
pub(crate) struct SparseReduction {
    pub unit_pivots: usize,
    /// `(col, unit, row)` in elimination order, kept on request.
    pub pivot_rows: Vec<PivotRow>,
    pub residual_cols: Vec<usize>,
    /// Rows indexed by compressed residual columns.
    pub echelon: Vec<Vec<(usize, Int)>>,
}

impl SparseReduction {
    pub fn echelon_dense(&self) -> DenseIntMatrix {
        let mut d = DenseIntMatrix::zeros(self.echelon.len(), self.residual_cols.len());
        for (r, row) in self.echelon.iter().enumerate() {
            for (c, v) in row {
                *d.get_mut(r, *c) = v.clone();
            }
        }
        d
    }
}

/// Rows with a positive leading entry, exact duplicates removed, zeros dropped.
pub(crate) fn normalized_rows(m: &SparseIntMatrix) -> Vec<Vec<(usize, Int)>> {
    let mut seen: HashSet<Vec<(usize, Int)>> = HashSet::new();
    let mut out = Vec::new();
    for row in m.row_data() {
        if row.is_empty() {
            continue;
        }
        let row: Vec<(usize, Int)> = if row[0].1.sign() == dashu_int::Sign::Negative {
            row.iter().map(|(c, v)| (*c, -v)).collect()
        } else {
            row.clone()
        };
        if seen.insert(row.clone()) {
            out.push(row);
        }
    }
    out
}

pub(crate) fn reduce_sparse(
    m: &SparseIntMatrix,
    limits: &SmithLimits,
    keep_pivot_rows: bool,
) -> Result<SparseReduction, LinalgError> {
    let rows = normalized_rows(m);
    let elim = eliminate_units(&IntRing { max_bits: limits.max_entry_bits }, m.cols(), rows, keep_pivot_rows)?;
    let index: HashMap<usize, usize> = elim.residual_cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let residual: Vec<Vec<(usize, Int)>> = elim
        .residual
        .into_iter()
        .map(|row| row.into_iter().map(|(c, v)| (index[&c], v)).collect())
        .collect();
    let ncols = elim.residual_cols.len();
    if ncols.saturating_mul(ncols) > limits.max_dense_cells {
        return Err(LinalgError::ResourceCap(format!("residual block has {} columns", ncols)));
    }
    let echelon = integer_row_echelon(residual, limits)?;
    Ok(SparseReduction {
        unit_pivots: elim.pivots.len(),
        pivot_rows: elim.pivots.into_iter().map(|p| (p.col, p.unit, p.row)).collect(),
        residual_cols: elim.residual_cols,
        echelon,
    })
}

fn axpy(x: &[(usize, Int)], f: &Int, y: &[(usize, Int)], g: &Int) -> Vec<(usize, Int)> {
    // f*x + g*y
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        if j >= y.len() || (i < x.len() && x[i].0 < y[j].0) {
            let v = f * &x[i].1;
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
        } else if i >= x.len() || y[j].0 < x[i].0 {
            let v = g * &y[j].1;
            if !v.is_zero() {
                out.push((y[j].0, v));
            }
            j += 1;
        } else {
            let v = f * &x[i].1 + g * &y[j].1;
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Row echelon basis of the lattice spanned by `rows`, built one row at a
/// time with unimodular 2x2 combinations on leading entries.
pub(crate) fn integer_row_echelon(
    rows: Vec<Vec<(usize, Int)>>,
    limits: &SmithLimits,
) -> Result<Vec<Vec<(usize, Int)>>, LinalgError> {
    let one = Int::ONE;
    let mut basis: BTreeMap<usize, Vec<(usize, Int)>> = BTreeMap::new();
    for row in rows {
        let mut v = row;
        while let Some((lead, a)) = v.first().cloned() {
            let Some(b_row) = basis.get_mut(&lead) else {
                if a.sign() == dashu_int::Sign::Negative {
                    for e in v.iter_mut() {
                        e.1 = -std::mem::take(&mut e.1);
                    }
                }
                basis.insert(lead, v);
                break;
            };
            let b = b_row[0].1.clone();
            let (q, r) = div_rem_euclid(&a, &b);
            if r.is_zero() {
                v = axpy(&v, &one, b_row, &-q);
            } else {
                let (g, s, t) = ext_gcd(&b, &a);
                let new_b = axpy(b_row, &s, &v, &t);
                let new_v = axpy(b_row, &(&a / &g), &v, &-(&b / &g));
                if new_b.iter().chain(new_v.iter()).any(|(_, x)| bit_len(x) > limits.max_entry_bits) {
                    return Err(LinalgError::ResourceCap("entry size limit exceeded in echelon".into()));
                }
                *b_row = new_b;
                v = new_v;
            }
        }
    }
    Ok(basis.into_values().collect())
}

fn min_entry(a: &DenseIntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(Int, usize, usize)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            let x = a.get(i, j);
            if x.is_zero() {
                continue;
            }
            let ax = abs(x);
            if best.as_ref().is_none_or(|(b, _, _)| ax < *b) {
                let unit = ax.is_one();
                best = Some((ax, i, j));
                if unit {
                    return best.map(|(_, i, j)| (i, j));
                }
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Diagonalises `a` in place and returns the invariant factors.
pub(crate) fn dense_smith(
    a: &mut DenseIntMatrix,
    mut transforms: Option<(&mut DenseIntMatrix, &mut DenseIntMatrix)>,
    limits: &SmithLimits,
) -> Result<Vec<Int>, LinalgError> {
    let (rows, cols) = (a.rows(), a.cols());
    let mut factors = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = min_entry(a, t) else { break };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);
        if let Some((u, v)) = transforms.as_mut() {
            u.swap_rows(t, pi);
            v.swap_cols(t, pj);
        }
        loop {
            // clear column t below the pivot
            for i in t + 1..rows {
                let b = a.get(i, t).clone();
                if b.is_zero() {
                    continue;
                }
                let p = a.get(t, t).clone();
                let (q, r) = div_rem_euclid(&b, &p);
                if r.is_zero() {
                    let f = -q;
                    a.add_row_multiple(i, t, &f);
                    if let Some((u, _)) = transforms.as_mut() {
                        u.add_row_multiple(i, t, &f);
                    }
                } else {
                    let (g, s, x) = ext_gcd(&p, &b);
                    let (c, d) = (-(&b / &g), &p / &g);
                    a.combine_rows(t, i, &s, &x, &c, &d);
                    if let Some((u, _)) = transforms.as_mut() {
                        u.combine_rows(t, i, &s, &x, &c, &d);
                    }
                }
            }
            // clear row t right of the pivot
            for j in t + 1..cols {
                let b = a.get(t, j).clone();
                if b.is_zero() {
                    continue;
                }
                let p = a.get(t, t).clone();
                let (q, r) = div_rem_euclid(&b, &p);
                if r.is_zero() {
                    let f = -q;
                    a.add_col_multiple(j, t, &f);
                    if let Some((_, v)) = transforms.as_mut() {
                        v.add_col_multiple(j, t, &f);
                    }
                } else {
                    let (g, s, x) = ext_gcd(&p, &b);
                    let (c, d) = (-(&b / &g), &p / &g);
                    a.combine_cols(t, j, &s, &x, &c, &d);
                    if let Some((_, v)) = transforms.as_mut() {
                        v.combine_cols(t, j, &s, &x, &c, &d);
                    }
                }
            }
            if bit_len(a.get(t, t)) > limits.max_entry_bits {
                return Err(LinalgError::ResourceCap("entry size limit exceeded in dense Smith form".into()));
            }
            let column_clear = (t + 1..rows).all(|i| a.get(i, t).is_zero());
            if !column_clear {
                continue;
            }
            // divisibility: fold an offending row into the pivot row
            let p = a.get(t, t).clone();
            let offending = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !div_rem_euclid(a.get(i, j), &p).1.is_zero()));
            match offending {
                Some(i) => {
                    let one = Int::ONE;
                    a.add_row_multiple(t, i, &one);
                    if let Some((u, _)) = transforms.as_mut() {
                        u.add_row_multiple(t, i, &one);
                    }
                }
                None => break,
            }
        }
        if a.get(t, t).sign() == dashu_int::Sign::Negative {
            a.negate_row(t);
            if let Some((u, _)) = transforms.as_mut() {
                u.negate_row(t);
            }
        }
        factors.push(a.get(t, t).clone());
        t += 1;
    }
    Ok(factors)
}
