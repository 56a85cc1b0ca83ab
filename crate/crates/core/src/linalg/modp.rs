//! Linear algebra over the field with p elements.

use super::eliminate::{eliminate_units, pow_mod, ModRing};
use super::int::{int, rem_euclid, to_i64};
use super::sparse::SparseIntMatrix;
use super::LinalgError;

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn check_prime(p: u64) -> Result<(), LinalgError> {
    if is_prime(p) && p < (1 << 62) {
        Ok(())
    } else {
        Err(LinalgError::NotPrime(p))
    }
}

fn reduced_rows(m: &SparseIntMatrix, p: u64) -> Vec<Vec<(usize, u64)>> {
    let pm = int(p as i64);
    m.row_data()
        .iter()
        .map(|row| {
            row.iter()
                .map(|(c, v)| (*c, to_i64(&rem_euclid(v, &pm)).expect("residue fits") as u64))
                .filter(|(_, v)| *v != 0)
                .collect::<Vec<_>>()
        })
        .filter(|r: &Vec<_>| !r.is_empty())
        .collect()
}

pub fn rank_mod_p(m: &SparseIntMatrix, p: u64) -> Result<usize, LinalgError> {
    check_prime(p)?;
    let elim = eliminate_units(&ModRing { p }, m.cols(), reduced_rows(m, p), false)?;
    debug_assert!(elim.residual.is_empty());
    Ok(elim.pivots.len())
}

/// Basis of `{x : M x = 0 (mod p)}`, one vector per free column. Each vector has
/// a 1 in its own free column and 0 in every other free column.
pub fn nullspace_mod_p(m: &SparseIntMatrix, p: u64) -> Result<Vec<Vec<u64>>, LinalgError> {
    check_prime(p)?;
    let ring = ModRing { p };
    let elim = eliminate_units(&ring, m.cols(), reduced_rows(m, p), true)?;
    let mut basis = Vec::with_capacity(elim.residual_cols.len());
    for &free in &elim.residual_cols {
        let mut x = vec![0u64; m.cols()];
        x[free] = 1;
        for piv in elim.pivots.iter().rev() {
            // unit * x_col + sum_{j != col} a_j x_j = 0
            let mut acc = 0u64;
            for (j, a) in &piv.row {
                if *j != piv.col {
                    acc = ((acc as u128 + *a as u128 * x[*j] as u128) % p as u128) as u64;
                }
            }
            let inv = pow_mod(piv.unit, p - 2, p);
            x[piv.col] = ((((p - acc) % p) as u128 * inv as u128) % p as u128) as u64;
        }
        basis.push(x);
    }
    Ok(basis)
}

/// Incrementally maintained reduced row echelon form over F_p with a
/// caller-chosen column priority: among the nonzero entries of a new row, the
/// one in the column of lowest priority rank becomes its pivot.
///
/// With this rule the non-pivot columns are exactly the ones a greedy scan in
/// reverse priority order would select as independent modulo the row space.
#[derive(Clone, Debug)]
pub struct ModpEchelon {
    p: u64,
    ncols: usize,
    rank_of: Vec<usize>,
    rows: Rows,
    pivot_cols: Vec<usize>,
    pivot_row_of: Vec<Option<usize>>,
}

#[derive(Clone, Debug)]
enum Rows {
    /// p = 2, 64 columns per word.
    Bits(Vec<Vec<u64>>),
    Wide(Vec<Vec<u64>>),
}

#[inline]
fn bit(row: &[u64], c: usize) -> bool {
    row[c / 64] >> (c % 64) & 1 == 1
}

impl ModpEchelon {
    /// `priority` lists all columns, the first one being pivoted first.
    pub fn new(p: u64, priority: &[usize]) -> Self {
        let ncols = priority.len();
        let mut rank_of = vec![usize::MAX; ncols];
        for (rank, &c) in priority.iter().enumerate() {
            rank_of[c] = rank;
        }
        assert!(rank_of.iter().all(|&r| r != usize::MAX), "priority must be a permutation");
        let rows = if p == 2 { Rows::Bits(Vec::new()) } else { Rows::Wide(Vec::new()) };
        ModpEchelon { p, ncols, rank_of, rows, pivot_cols: Vec::new(), pivot_row_of: vec![None; ncols] }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_row_of[col].is_some()
    }

    /// The reduced row whose pivot is `col`; the pivot entry is 1.
    pub fn pivot_row(&self, col: usize) -> Option<Vec<u64>> {
        let r = self.pivot_row_of[col]?;
        Some(match &self.rows {
            Rows::Bits(rows) => (0..self.ncols).map(|c| bit(&rows[r], c) as u64).collect(),
            Rows::Wide(rows) => rows[r].clone(),
        })
    }

    /// Adds a row (entries already reduced mod p); returns whether the rank grew.
    pub fn insert(&mut self, v: Vec<u64>) -> bool {
        assert_eq!(v.len(), self.ncols);
        match self.rows {
            Rows::Bits(_) => self.insert_bits(v),
            Rows::Wide(_) => self.insert_wide(v),
        }
    }

    fn insert_bits(&mut self, v: Vec<u64>) -> bool {
        let Rows::Bits(rows) = &mut self.rows else { unreachable!() };
        let mut w = vec![0u64; self.ncols.div_ceil(64)];
        for (c, &x) in v.iter().enumerate() {
            if x & 1 == 1 {
                w[c / 64] |= 1 << (c % 64);
            }
        }
        for (row, &pc) in rows.iter().zip(&self.pivot_cols) {
            if bit(&w, pc) {
                w.iter_mut().zip(row).for_each(|(x, y)| *x ^= y);
            }
        }
        let rank_of = &self.rank_of;
        let Some(pc) = (0..self.ncols).filter(|&c| bit(&w, c)).min_by_key(|&c| rank_of[c]) else {
            return false;
        };
        for row in rows.iter_mut() {
            if bit(row, pc) {
                row.iter_mut().zip(&w).for_each(|(x, y)| *x ^= y);
            }
        }
        self.pivot_row_of[pc] = Some(rows.len());
        rows.push(w);
        self.pivot_cols.push(pc);
        true
    }

    fn insert_wide(&mut self, mut v: Vec<u64>) -> bool {
        let p = self.p;
        let Rows::Wide(rows) = &mut self.rows else { unreachable!() };
        for (row, &pc) in rows.iter().zip(&self.pivot_cols) {
            let f = v[pc];
            if f == 0 {
                continue;
            }
            let f = p - f;
            for (x, &y) in v.iter_mut().zip(row) {
                if y != 0 {
                    *x = ((*x as u128 + f as u128 * y as u128) % p as u128) as u64;
                }
            }
        }
        let rank_of = &self.rank_of;
        let Some(pc) = (0..self.ncols).filter(|&c| v[c] != 0).min_by_key(|&c| rank_of[c]) else {
            return false;
        };
        let inv = pow_mod(v[pc], p - 2, p);
        for x in v.iter_mut() {
            *x = ((*x as u128 * inv as u128) % p as u128) as u64;
        }
        for row in rows.iter_mut() {
            let f = row[pc];
            if f == 0 {
                continue;
            }
            let f = p - f;
            for (x, &y) in row.iter_mut().zip(&v) {
                if y != 0 {
                    *x = ((*x as u128 + f as u128 * y as u128) % p as u128) as u64;
                }
            }
        }
        self.pivot_row_of[pc] = Some(rows.len());
        rows.push(v);
        self.pivot_cols.push(pc);
        true
    }
}
