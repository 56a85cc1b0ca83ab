//! Sparse integer matrices stored as sorted row lists.

use std::fmt::Write as _;

use super::int::{int, Int};
use super::LinalgError;

/// An exact integer matrix; only nonzero entries are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseIntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, Int)>>,
}

impl SparseIntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseIntMatrix { rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i].push((i, int(1)));
        }
        m
    }

    /// Builds a matrix from dense rows of machine integers.
    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(0, cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged dense matrix");
            m.push_row(r.iter().enumerate().filter(|(_, &v)| v != 0).map(|(c, &v)| (c, int(v))).collect());
        }
        m
    }

    /// Builds a matrix from `(row, col, value)` triplets; repeated positions accumulate.
    pub fn from_triplets(rows: usize, cols: usize, triplets: impl IntoIterator<Item = (usize, usize, Int)>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (r, c, v) in triplets {
            m.add_to(r, c, &v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    /// Nonzero entries of row `r`, sorted by column.
    pub fn row(&self, r: usize) -> &[(usize, Int)] {
        &self.data[r]
    }

    pub fn row_data(&self) -> &[Vec<(usize, Int)>] {
        &self.data
    }

    /// Appends a row given as `(col, value)` pairs; pairs are sorted, merged and
    /// zeros dropped.
    pub fn push_row(&mut self, mut entries: Vec<(usize, Int)>) {
        entries.sort_by_key(|e| e.0);
        let mut row: Vec<(usize, Int)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            assert!(c < self.cols, "column {} out of range {}", c, self.cols);
            match row.last_mut() {
                Some((lc, lv)) if *lc == c => *lv += v,
                _ => row.push((c, v)),
            }
        }
        row.retain(|(_, v)| !v.is_zero());
        self.data.push(row);
        self.rows += 1;
    }

    pub fn get(&self, r: usize, c: usize) -> Int {
        match self.data[r].binary_search_by_key(&c, |e| e.0) {
            Ok(pos) => self.data[r][pos].1.clone(),
            Err(_) => Int::ZERO,
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: Int) {
        assert!(r < self.rows && c < self.cols, "index ({}, {}) out of range", r, c);
        let row = &mut self.data[r];
        match row.binary_search_by_key(&c, |e| e.0) {
            Ok(pos) => {
                if v.is_zero() {
                    row.remove(pos);
                } else {
                    row[pos].1 = v;
                }
            }
            Err(pos) => {
                if !v.is_zero() {
                    row.insert(pos, (c, v));
                }
            }
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &Int) {
        let cur = self.get(r, c);
        self.set(r, c, cur + v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Int)> {
        self.data.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, *c, v)))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (r, c, v) in self.iter() {
            t.data[c].push((r, v.clone()));
        }
        t
    }

    pub fn mul(&self, other: &SparseIntMatrix) -> Result<SparseIntMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = Self::zeros(0, other.cols);
        let mut acc: Vec<Int> = vec![Int::ZERO; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        for row in &self.data {
            for (k, a) in row {
                for (c, b) in &other.data[*k] {
                    if acc[*c].is_zero() {
                        touched.push(*c);
                    }
                    acc[*c] += a * b;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut entries = Vec::with_capacity(touched.len());
            for &c in &touched {
                let v = std::mem::take(&mut acc[c]);
                if !v.is_zero() {
                    entries.push((c, v));
                }
            }
            touched.clear();
            out.data.push(entries);
            out.rows += 1;
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Vec<Vec<Int>> {
        let mut d = vec![vec![Int::ZERO; self.cols]; self.rows];
        for (r, c, v) in self.iter() {
            d[r][c] = v.clone();
        }
        d
    }

    /// Renders the exchange format: `rows cols nnz`, then one `r c v` line per
    /// entry with 1-based indices.
    pub fn to_exchange(&self) -> String {
        let mut out = format!("{} {} {}\n", self.rows, self.cols, self.nnz());
        for (r, c, v) in self.iter() {
            let _ = writeln!(out, "{} {} {}", r + 1, c + 1, v);
        }
        out
    }

    pub fn parse_exchange(text: &str) -> Result<SparseIntMatrix, LinalgError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, message: &str| LinalgError::Parse { line: line + 1, message: message.to_string() };
        let (l0, header) = lines.next().ok_or_else(|| bad(0, "empty input"))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| bad(l0, "expected \"rows cols nnz\""))?;
        let [rows, cols, nnz] = nums[..] else {
            return Err(bad(l0, "expected \"rows cols nnz\""));
        };
        let mut m = Self::zeros(rows, cols);
        let mut count = 0;
        for (ln, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad(ln, "expected \"r c v\""));
            }
            let r: usize = parts[0].parse().map_err(|_| bad(ln, "bad row index"))?;
            let c: usize = parts[1].parse().map_err(|_| bad(ln, "bad column index"))?;
            let v: Int = parts[2].parse().map_err(|_| bad(ln, "bad value"))?;
            if r == 0 || r > rows || c == 0 || c > cols {
                return Err(bad(ln, "index out of range"));
            }
            m.add_to(r - 1, c - 1, &v);
            count += 1;
        }
        if count != nnz {
            return Err(bad(l0, &format!("header announces {} entries, found {}", nnz, count)));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_transpose() {
        let a = SparseIntMatrix::from_dense(&[vec![1, 2], vec![0, -1]]);
        let b = SparseIntMatrix::from_dense(&[vec![3, 0], vec![1, 1]]);
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab, SparseIntMatrix::from_dense(&[vec![5, 2], vec![-1, -1]]));
        assert_eq!(a.transpose().get(1, 0), int(2));
        assert!(a.mul(&SparseIntMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn cancellation_drops_entries() {
        let mut m = SparseIntMatrix::zeros(0, 3);
        m.push_row(vec![(2, int(1)), (0, int(4)), (2, int(-1))]);
        assert_eq!(m.row(0), &[(0, int(4))]);
        m.set(0, 0, Int::ZERO);
        assert!(m.is_zero());
    }

    #[test]
    fn exchange_format() {
        let m = SparseIntMatrix::from_dense(&[vec![0, 7], vec![-2, 0], vec![0, 0]]);
        let text = m.to_exchange();
        assert_eq!(text, "3 2 2\n1 2 7\n2 1 -2\n");
        assert_eq!(SparseIntMatrix::parse_exchange(&text).unwrap(), m);
        assert!(SparseIntMatrix::parse_exchange("2 2 1\n3 1 1\n").is_err());
        assert!(SparseIntMatrix::parse_exchange("2 2 2\n1 1 1\n").is_err());
    }
}
