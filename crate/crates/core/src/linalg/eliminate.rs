//! Sparse elimination on unit pivots with a Markowitz-style ordering.
//!
//! The same engine serves the exact integer path (where only `±1` entries are
//! usable pivots) and the mod-p path (where every nonzero entry is one).
//! Eliminating a unit pivot does not change the invariant factors of a
//! matrix, so the integer path hands a much smaller residual matrix to the
//! dense Smith form.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::int::{bit_len, is_unit, Int};
use super::LinalgError;

pub(crate) trait PivotRing {
    type E: Clone + PartialEq;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn is_unit(&self, a: &Self::E) -> bool;
    /// The `f` with `b + f*u = 0`, where `u` is a unit.
    fn cancel_factor(&self, b: &Self::E, u: &Self::E) -> Self::E;
    /// `a + f*x`
    fn mul_add(&self, a: &Self::E, f: &Self::E, x: &Self::E) -> Self::E;
    fn mul(&self, f: &Self::E, x: &Self::E) -> Self::E;
    fn within_limits(&self, a: &Self::E) -> bool;
}

pub(crate) struct IntRing {
    pub max_bits: usize,
}

impl PivotRing for IntRing {
    type E = Int;

    fn is_zero(&self, a: &Int) -> bool {
        a.is_zero()
    }

    fn is_unit(&self, a: &Int) -> bool {
        is_unit(a)
    }

    fn cancel_factor(&self, b: &Int, u: &Int) -> Int {
        // u is ±1, so u^-1 = u
        -(b * u)
    }

    fn mul_add(&self, a: &Int, f: &Int, x: &Int) -> Int {
        a + f * x
    }

    fn mul(&self, f: &Int, x: &Int) -> Int {
        f * x
    }

    fn within_limits(&self, a: &Int) -> bool {
        bit_len(a) <= self.max_bits
    }
}

pub(crate) struct ModRing {
    pub p: u64,
}

impl ModRing {
    pub fn inv(&self, a: u64) -> u64 {
        pow_mod(a, self.p - 2, self.p)
    }
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

impl PivotRing for ModRing {
    type E = u64;

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn is_unit(&self, a: &u64) -> bool {
        *a != 0
    }

    fn cancel_factor(&self, b: &u64, u: &u64) -> u64 {
        let q = ((*b as u128 * self.inv(*u) as u128) % self.p as u128) as u64;
        (self.p - q) % self.p
    }

    fn mul_add(&self, a: &u64, f: &u64, x: &u64) -> u64 {
        ((*a as u128 + *f as u128 * *x as u128) % self.p as u128) as u64
    }

    fn mul(&self, f: &u64, x: &u64) -> u64 {
        ((*f as u128 * *x as u128) % self.p as u128) as u64
    }

    fn within_limits(&self, _: &u64) -> bool {
        true
    }
}

pub(crate) struct Pivot<E> {
    pub col: usize,
    pub unit: E,
    /// The pivot row at the moment it was chosen; it only touches columns
    /// that were still live then.
    pub row: Vec<(usize, E)>,
}

pub(crate) struct UnitElimination<E> {
    pub pivots: Vec<Pivot<E>>,
    pub residual: Vec<Vec<(usize, E)>>,
    /// Columns never used as pivots, ascending.
    pub residual_cols: Vec<usize>,
}

fn entry<E>(row: &[(usize, E)], col: usize) -> Option<&E> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|p| &row[p].1)
}

/// Eliminates unit pivots until none remain.
///
/// Pivot columns are taken in order of increasing live count (ties broken by
/// column index); within a column the shortest row holding a unit wins (ties
/// broken by row index), so the result is deterministic.
pub(crate) fn eliminate_units<R: PivotRing>(
    ring: &R,
    cols: usize,
    mut rows: Vec<Vec<(usize, R::E)>>,
    keep_pivot_rows: bool,
) -> Result<UnitElimination<R::E>, LinalgError> {
    let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); cols];
    let mut col_count = vec![0usize; cols];
    let mut col_version = vec![0u64; cols];
    let mut col_alive = vec![true; cols];
    for (r, row) in rows.iter().enumerate() {
        for (c, _) in row {
            col_rows[*c].push(r as u32);
            col_count[*c] += 1;
        }
    }
    let mut heap: BinaryHeap<Reverse<(usize, usize, u64)>> =
        (0..cols).filter(|&c| col_count[c] > 0).map(|c| Reverse((col_count[c], c, 0))).collect();
    let mut pivots = Vec::new();
    let mut touched: Vec<usize> = Vec::new();
    let mut merged: Vec<(usize, R::E)> = Vec::new();

    while let Some(Reverse((count, c, version))) = heap.pop() {
        if !col_alive[c] || version != col_version[c] || count == 0 {
            continue;
        }
        col_rows[c].retain(|&r| entry(&rows[r as usize], c).is_some());
        col_rows[c].sort_unstable();
        col_rows[c].dedup();
        let mut best: Option<(usize, usize)> = None;
        for &r in &col_rows[c] {
            let row = &rows[r as usize];
            if ring.is_unit(entry(row, c).expect("retained rows hold the column")) {
                let key = (row.len(), r as usize);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        let Some((_, pr)) = best else { continue };

        let prow = std::mem::take(&mut rows[pr]);
        let unit = entry(&prow, c).expect("pivot entry").clone();
        let others: Vec<u32> = col_rows[c].iter().copied().filter(|&r| r as usize != pr).collect();
        for s in others {
            let s = s as usize;
            let b = entry(&rows[s], c).expect("column list is exact").clone();
            let f = ring.cancel_factor(&b, &unit);
            let old = std::mem::take(&mut rows[s]);
            merged.clear();
            let (mut i, mut j) = (0, 0);
            while i < old.len() || j < prow.len() {
                let take_old = j >= prow.len() || (i < old.len() && old[i].0 < prow[j].0);
                let take_piv = i >= old.len() || (j < prow.len() && prow[j].0 < old[i].0);
                if take_old {
                    merged.push(old[i].clone());
                    i += 1;
                } else if take_piv {
                    let (col, x) = &prow[j];
                    let v = ring.mul(&f, x);
                    if !ring.within_limits(&v) {
                        return Err(LinalgError::ResourceCap("entry size limit exceeded during elimination".into()));
                    }
                    col_count[*col] += 1;
                    col_rows[*col].push(s as u32);
                    touched.push(*col);
                    merged.push((*col, v));
                    j += 1;
                } else {
                    let col = old[i].0;
                    let v = ring.mul_add(&old[i].1, &f, &prow[j].1);
                    if ring.is_zero(&v) {
                        col_count[col] -= 1;
                    } else {
                        if !ring.within_limits(&v) {
                            return Err(LinalgError::ResourceCap(
                                "entry size limit exceeded during elimination".into(),
                            ));
                        }
                        merged.push((col, v));
                    }
                    touched.push(col);
                    i += 1;
                    j += 1;
                }
            }
            rows[s] = std::mem::take(&mut merged);
        }
        for (col, _) in &prow {
            col_count[*col] -= 1;
            touched.push(*col);
        }
        col_alive[c] = false;
        col_rows[c] = Vec::new();
        touched.sort_unstable();
        touched.dedup();
        for &col in &touched {
            if col_alive[col] {
                col_version[col] += 1;
                heap.push(Reverse((col_count[col], col, col_version[col])));
            }
        }
        touched.clear();
        pivots.push(Pivot { col: c, unit, row: if keep_pivot_rows { prow } else { Vec::new() } });
    }

    let residual: Vec<Vec<(usize, R::E)>> = rows.into_iter().filter(|r| !r.is_empty()).collect();
    let residual_cols = (0..cols).filter(|&c| col_alive[c]).collect();
    Ok(UnitElimination { pivots, residual, residual_cols })
}
