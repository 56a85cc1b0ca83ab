use super::int::Int;
use super::sparse::SparseIntMatrix;

/// Row-major dense integer matrix, used for Smith transforms and small residuals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseIntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl DenseIntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseIntMatrix { rows, cols, data: vec![Int::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Int::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Int>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        DenseIntMatrix { rows: r, cols: c, data }
    }

    pub fn from_sparse(m: &SparseIntMatrix) -> Self {
        let mut d = Self::zeros(m.rows(), m.cols());
        for (r, c, v) in m.iter() {
            d.data[r * m.cols() + c] = v.clone();
        }
        d
    }

    pub fn to_sparse(&self) -> SparseIntMatrix {
        SparseIntMatrix::from_triplets(
            self.rows,
            self.cols,
            (0..self.rows)
                .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
                .filter(|&(r, c)| !self.get(r, c).is_zero())
                .map(|(r, c)| (r, c, self.get(r, c).clone())),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &Int {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut Int {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Int] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Int> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn mul(&self, other: &DenseIntMatrix) -> DenseIntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        *out.get_mut(i, j) += a * b;
                    }
                }
            }
        }
        out
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] += f * row[src]
    pub(crate) fn add_row_multiple(&mut self, dst: usize, src: usize, f: &Int) {
        if f.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = self.data[src * self.cols + c].clone();
            if !v.is_zero() {
                self.data[dst * self.cols + c] += f * v;
            }
        }
    }

    /// col[dst] += f * col[src]
    pub(crate) fn add_col_multiple(&mut self, dst: usize, src: usize, f: &Int) {
        if f.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = self.data[r * self.cols + src].clone();
            if !v.is_zero() {
                self.data[r * self.cols + dst] += f * v;
            }
        }
    }

    pub(crate) fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = std::mem::take(&mut self.data[r * self.cols + c]);
            self.data[r * self.cols + c] = -v;
        }
    }

    /// Replaces rows `(a, b)` by `(s*a + t*b, u*a + v*b)`.
    pub(crate) fn combine_rows(&mut self, a: usize, b: usize, s: &Int, t: &Int, u: &Int, v: &Int) {
        for c in 0..self.cols {
            let x = self.data[a * self.cols + c].clone();
            let y = self.data[b * self.cols + c].clone();
            if x.is_zero() && y.is_zero() {
                continue;
            }
            self.data[a * self.cols + c] = s * &x + t * &y;
            self.data[b * self.cols + c] = u * &x + v * &y;
        }
    }

    /// Replaces columns `(a, b)` by `(s*a + t*b, u*a + v*b)`.
    pub(crate) fn combine_cols(&mut self, a: usize, b: usize, s: &Int, t: &Int, u: &Int, v: &Int) {
        for r in 0..self.rows {
            let x = self.data[r * self.cols + a].clone();
            let y = self.data[r * self.cols + b].clone();
            if x.is_zero() && y.is_zero() {
                continue;
            }
            self.data[r * self.cols + a] = s * &x + t * &y;
            self.data[r * self.cols + b] = u * &x + v * &y;
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::ONE;
        }
        let mut a = self.clone();
        let mut sign = Int::ONE;
        let mut prev = Int::ONE;
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                let Some(swap) = (k + 1..n).find(|&i| !a.get(i, k).is_zero()) else {
                    return Int::ZERO;
                };
                a.swap_rows(k, swap);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j);
                    *a.get_mut(i, j) = v / &prev;
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }
}
