//! Symmetric 2-cocycles with values in `Q/Z`.
//!
//! A symmetric cochain is a function on unordered pairs of group elements.
//! It is a cocycle when
//! `d(alpha)(g,h,k) = alpha(h,k) - alpha(gh,k) + alpha(g,hk) - alpha(g,h)`
//! vanishes in `Q/Z` for every triple. A symmetric coboundary `df` needs
//! `f(gh) = f(hg)`, i.e. `f` is a class function, so the quotient computed
//! here uses one coboundary column per conjugacy class.

use std::fmt::Write as _;

pub use dashu_ratio::RBig as Rational;
use log::info;
use thiserror::Error;

use crate::group::FiniteGroup;
use crate::linalg::int::{ext_gcd, int, lcm, rem_euclid, Int};
use crate::linalg::{qz_solution_group, qz_torsion_generators, LinalgError, SparseIntMatrix};

/// Largest group order the oracle accepts unless told otherwise.
pub const DEFAULT_ORACLE_CAP: usize = 64;

#[derive(Debug, Error)]
pub enum CocycleError {
    #[error("group of order {order} exceeds the oracle cap {cap}")]
    CapExceeded { order: usize, cap: usize },
    #[error("cochain is defined on a group of order {cochain}, group has order {group}")]
    OrderMismatch { cochain: usize, group: usize },
    #[error("cochain parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Number of unordered pairs `{g, h}` with `g = h` allowed.
pub fn pair_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Column of the unordered pair `{g, h}` (0-based elements).
#[inline]
pub fn pair_index(g: usize, h: usize) -> usize {
    let (a, b) = if g <= h { (g, h) } else { (h, g) };
    b * (b + 1) / 2 + a
}

/// The group of symmetric cocycle classes, as invariant factors greater than one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyGroup {
    pub invariant_factors: Vec<Int>,
}

impl CohomologyGroup {
    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    pub fn order(&self) -> Int {
        self.invariant_factors.iter().fold(Int::ONE, |acc, d| acc * d)
    }
}

/// The cocycle system `M` (one row per ordered triple, one column per
/// unordered pair) and the class-function coboundary matrix `B` (one row per
/// unordered pair, one column per conjugacy class). `M * B = 0`.
pub fn symmetric_cocycle_system(g: &FiniteGroup) -> (SparseIntMatrix, SparseIntMatrix) {
    let n = g.order();
    let pairs = pair_count(n);
    let mut m = SparseIntMatrix::zeros(0, pairs);
    for a in 0..n {
        for b in 0..n {
            let ab = g.mul(a + 1, b + 1) - 1;
            for c in 0..n {
                let bc = g.mul(b + 1, c + 1) - 1;
                m.push_row(vec![
                    (pair_index(b, c), int(1)),
                    (pair_index(ab, c), int(-1)),
                    (pair_index(a, bc), int(1)),
                    (pair_index(a, b), int(-1)),
                ]);
            }
        }
    }
    let classes = g.conjugacy_classes();
    let mut b = SparseIntMatrix::zeros(0, classes.class_count());
    for h in 0..n {
        for x in 0..=h {
            let xh = g.mul(x + 1, h + 1);
            b.push_row(vec![
                (classes.class_of(x + 1) - 1, int(1)),
                (classes.class_of(h + 1) - 1, int(1)),
                (classes.class_of(xh) - 1, int(-1)),
            ]);
        }
    }
    (m, b)
}

fn check_cap(g: &FiniteGroup, cap: usize) -> Result<(), CocycleError> {
    if g.order() > cap {
        Err(CocycleError::CapExceeded { order: g.order(), cap })
    } else {
        Ok(())
    }
}

pub fn symmetric_h2(g: &FiniteGroup) -> Result<CohomologyGroup, CocycleError> {
    symmetric_h2_with_cap(g, DEFAULT_ORACLE_CAP)
}

pub fn symmetric_h2_with_cap(g: &FiniteGroup, cap: usize) -> Result<CohomologyGroup, CocycleError> {
    check_cap(g, cap)?;
    let (m, b) = symmetric_cocycle_system(g);
    info!("cocycle system: {} x {}, {} classes", m.rows(), m.cols(), b.cols());
    Ok(CohomologyGroup { invariant_factors: qz_solution_group(&m, &b)? })
}

/// A `Q/Z`-valued function on unordered pairs, values kept in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricCochain {
    n: usize,
    values: Vec<Rational>,
}

fn frac_part(q: Rational) -> Rational {
    let floor = Rational::from(q.floor());
    q - floor
}

impl SymmetricCochain {
    pub fn zero(n: usize) -> Self {
        SymmetricCochain { n, values: vec![Rational::ZERO; pair_count(n)] }
    }

    pub fn group_order(&self) -> usize {
        self.n
    }

    /// Value on `{g, h}` (1-based).
    pub fn get(&self, g: usize, h: usize) -> &Rational {
        &self.values[pair_index(g - 1, h - 1)]
    }

    /// Sets the value on `{g, h}` (1-based), reduced modulo 1.
    pub fn set(&mut self, g: usize, h: usize, q: Rational) {
        self.values[pair_index(g - 1, h - 1)] = frac_part(q);
    }

    /// Least common denominator of all values.
    pub fn denominator(&self) -> Int {
        self.values.iter().fold(Int::ONE, |acc, q| lcm(&acc, &Int::from(q.denominator().clone())))
    }

    /// Integer numerators over `denominator()`, indexed by pair column.
    fn numerators(&self, den: &Int) -> Vec<Int> {
        self.values.iter().map(|q| q.numerator() * den / Int::from(q.denominator().clone())).collect()
    }

    /// Subtracts the constant `alpha(1, 1)`, which is `df` for the constant
    /// class function `f = alpha(1, 1)`. A cocycle has `alpha(1, h) = alpha(1, 1)`
    /// for all `h`, so the result is cohomologous and vanishes on `{1, h}`.
    pub fn normalized(&self) -> Self {
        let c = self.values[0].clone();
        SymmetricCochain { n: self.n, values: self.values.iter().map(|q| frac_part(q - &c)).collect() }
    }

    /// Dump format: one `g h num/den` line per nonzero value, `g <= h`, 1-based.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        for h in 0..self.n {
            for g in 0..=h {
                let q = &self.values[pair_index(g, h)];
                if *q != Rational::ZERO {
                    let _ = writeln!(out, "{} {} {}/{}", g + 1, h + 1, q.numerator(), q.denominator());
                }
            }
        }
        out
    }

    /// Parses the dump format; pairs not listed are zero. Lines starting with
    /// `#` are ignored.
    pub fn parse_dump(n: usize, text: &str) -> Result<Self, CocycleError> {
        let mut c = SymmetricCochain::zero(n);
        let mut seen = vec![false; pair_count(n)];
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: &str| CocycleError::Parse { line: i + 1, message: message.to_string() };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad("expected \"g h num/den\""));
            }
            let g: usize = parts[0].parse().map_err(|_| bad("bad element index"))?;
            let h: usize = parts[1].parse().map_err(|_| bad("bad element index"))?;
            if g == 0 || g > n || h == 0 || h > n {
                return Err(bad("element index out of range"));
            }
            let q: Rational = parts[2].parse().map_err(|_| bad("bad rational value"))?;
            let idx = pair_index(g - 1, h - 1);
            if std::mem::replace(&mut seen[idx], true) {
                return Err(bad("pair listed twice"));
            }
            c.values[idx] = frac_part(q);
        }
        Ok(c)
    }
}

/// Outcome of checking the cocycle identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CocycleCheck {
    Cocycle,
    /// First failing triple in lexicographic order, 1-based.
    NotCocycle { g: usize, h: usize, k: usize },
}

/// Checks `d(alpha)(g,h,k) = 0` in `Q/Z` on every ordered triple, exactly.
pub fn verify_cocycle(g: &FiniteGroup, alpha: &SymmetricCochain) -> Result<CocycleCheck, CocycleError> {
    let n = g.order();
    if alpha.n != n {
        return Err(CocycleError::OrderMismatch { cochain: alpha.n, group: n });
    }
    let den = alpha.denominator();
    let a = alpha.numerators(&den);
    for x in 0..n {
        for y in 0..n {
            let xy = g.mul(x + 1, y + 1) - 1;
            for z in 0..n {
                let yz = g.mul(y + 1, z + 1) - 1;
                let d = &a[pair_index(y, z)] - &a[pair_index(xy, z)] + &a[pair_index(x, yz)] - &a[pair_index(x, y)];
                if !rem_euclid(&d, &den).is_zero() {
                    return Ok(CocycleCheck::NotCocycle { g: x + 1, h: y + 1, k: z + 1 });
                }
            }
        }
    }
    Ok(CocycleCheck::Cocycle)
}

/// A symmetric cocycle whose class generates the largest cyclic factor of the
/// symmetric cohomology, or `None` when that group is trivial. The result is
/// checked against the cocycle identity and the coboundary solve before it is
/// returned.
pub fn extract_nontrivial_cocycle(g: &FiniteGroup) -> Result<Option<SymmetricCochain>, CocycleError> {
    extract_nontrivial_cocycle_with_cap(g, DEFAULT_ORACLE_CAP)
}

pub fn extract_nontrivial_cocycle_with_cap(
    g: &FiniteGroup,
    cap: usize,
) -> Result<Option<SymmetricCochain>, CocycleError> {
    check_cap(g, cap)?;
    let (m, b) = symmetric_cocycle_system(g);
    if qz_solution_group(&m, &b)?.is_empty() {
        return Ok(None);
    }
    let gens = qz_torsion_generators(&m)?;
    let top = gens.last().ok_or_else(|| LinalgError::Internal("nontrivial quotient without torsion generators".into()))?;
    let mut alpha = SymmetricCochain::zero(g.order());
    for (slot, num) in alpha.values.iter_mut().zip(&top.numerators) {
        *slot = Rational::from_parts_signed(num.clone(), top.order.clone());
    }
    if verify_cocycle(g, &alpha)? != CocycleCheck::Cocycle {
        return Err(LinalgError::Internal("extracted cochain fails the cocycle identity".into()).into());
    }
    if is_class_function_coboundary(g, &alpha)? {
        return Err(LinalgError::Internal("extracted cocycle is a coboundary".into()).into());
    }
    Ok(Some(alpha))
}

/// Whether `alpha = df (mod Z)` for some `Q/Z`-valued class function `f`.
///
/// If `alpha` has denominator `N` and `m f(g) = sum_i alpha(g, g^i)` for `m`
/// the order of `g`, every solution has denominators dividing `N * exp(G)`.
/// The system is therefore solved over `Z/(N exp(G))`, one prime power at a
/// time, by diagonalising over the local ring.
pub fn is_class_function_coboundary(g: &FiniteGroup, alpha: &SymmetricCochain) -> Result<bool, CocycleError> {
    let n = g.order();
    if alpha.n != n {
        return Err(CocycleError::OrderMismatch { cochain: alpha.n, group: n });
    }
    let den = alpha.denominator();
    let modulus = &den * int(g.exponent() as i64);
    let scale = int(g.exponent() as i64);
    let rhs: Vec<Int> = alpha.numerators(&den).into_iter().map(|a| a * &scale).collect();
    let classes = g.conjugacy_classes();
    let c = classes.class_count();
    let mut rows = Vec::with_capacity(pair_count(n));
    for h in 0..n {
        for x in 0..=h {
            let mut row = vec![Int::ZERO; c];
            row[classes.class_of(x + 1) - 1] += int(1);
            row[classes.class_of(h + 1) - 1] += int(1);
            row[classes.class_of(g.mul(x + 1, h + 1)) - 1] -= int(1);
            rows.push(row);
        }
    }
    for (p, s) in factor(&modulus) {
        if !solvable_mod_prime_power(&rows, &rhs, &p, s) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn factor(m: &Int) -> Vec<(Int, u32)> {
    let mut out = Vec::new();
    let mut rest = m.clone();
    let mut p = int(2);
    while &p * &p <= rest {
        let mut s = 0;
        while rem_euclid(&rest, &p).is_zero() {
            rest /= &p;
            s += 1;
        }
        if s > 0 {
            out.push((p.clone(), s));
        }
        p += int(1);
    }
    if rest > Int::ONE {
        out.push((rest, 1));
    }
    out
}

fn valuation(x: &Int, p: &Int, cap: u32) -> u32 {
    if x.is_zero() {
        return cap;
    }
    let mut v = 0;
    let mut y = x.clone();
    while v < cap && rem_euclid(&y, p).is_zero() {
        y /= p;
        v += 1;
    }
    v
}

/// Unit inverse modulo `q`.
fn inverse_mod(u: &Int, q: &Int) -> Int {
    let (g, s, _) = ext_gcd(u, q);
    debug_assert!(g.is_one());
    rem_euclid(&s, q)
}

/// Solvability of `A x = b` over `Z/p^s` by full pivoting on entries of
/// least valuation.
fn solvable_mod_prime_power(a: &[Vec<Int>], b: &[Int], p: &Int, s: u32) -> bool {
    let q = (0..s).fold(Int::ONE, |acc, _| acc * p);
    let mut rows: Vec<Vec<Int>> = a
        .iter()
        .zip(b)
        .map(|(r, bv)| r.iter().chain(std::iter::once(bv)).map(|x| rem_euclid(x, &q)).collect())
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut live_cols: Vec<usize> = (0..cols).collect();
    let mut top = 0;
    while top < rows.len() && !live_cols.is_empty() {
        let mut best: Option<(u32, usize, usize)> = None;
        for (r, row) in rows.iter().enumerate().skip(top) {
            for (ci, &col) in live_cols.iter().enumerate() {
                let v = valuation(&row[col], p, s);
                if v < s && best.is_none_or(|b| v < b.0) {
                    best = Some((v, r, ci));
                }
            }
        }
        let Some((v, r, ci)) = best else { break };
        rows.swap(top, r);
        let col = live_cols.remove(ci);
        let pv = (0..v).fold(Int::ONE, |acc, _| acc * p);
        let unit_inv = inverse_mod(&(&rows[top][col] / &pv), &q);
        let pivot = rows[top].clone();
        for row in rows.iter_mut().skip(top + 1) {
            if row[col].is_zero() {
                continue;
            }
            // v is minimal, so pv divides row[col]
            let f = rem_euclid(&(&row[col] / &pv * &unit_inv), &q);
            for (x, y) in row.iter_mut().zip(&pivot) {
                *x = rem_euclid(&(&*x - &f * y), &q);
            }
        }
        if valuation(&pivot[cols], p, s) < v {
            return false;
        }
        top += 1;
    }
    rows[top..].iter().all(|r| r[cols].is_zero())
}
