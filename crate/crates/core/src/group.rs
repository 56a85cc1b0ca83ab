//! Finite groups given by Cayley tables.
//!
//! Elements are numbered `1..=n` in every file format and report; element 1
//! is always the identity. Internally the table is stored 0-based.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Default cap on the order of a group generated from permutations.
pub const DEFAULT_PERMUTATION_CAP: usize = 10_000;

/// Largest order for which associativity is checked on every triple.
pub const EXHAUSTIVE_ASSOCIATIVITY_LIMIT: usize = 256;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("row {row} is not a permutation of 1..{n}")]
    RowNotPermutation { row: usize, n: usize },
    #[error("column {col} is not a permutation of 1..{n}")]
    ColumnNotPermutation { col: usize, n: usize },
    #[error("element 1 is not the identity: 1*{index} = {got}")]
    IdentityViolation { index: usize, got: usize },
    #[error("associativity fails: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("element index {index} out of range 1..{n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("generator {index} is not a permutation of 1..{degree}")]
    InvalidPermutation { index: usize, degree: usize },
    #[error("generated group exceeds the order cap {cap}")]
    CapExceeded { cap: usize },
}

/// A finite group as an immutable multiplication table.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    n: usize,
    // table[i * n + j] = index of g_i * g_j, 0-based
    table: Vec<u32>,
    inverses: Vec<u32>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup").field("order", &self.n).finish()
    }
}

/// A set of element indices of a parent group (1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementSet {
    members: Vec<usize>,
    parent_order: usize,
}

impl ElementSet {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn parent_order(&self) -> usize {
        self.parent_order
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }
}

/// Partition of a group into conjugacy classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyPartition {
    /// `class_of[i - 1]` is the class (1-based) of element `i`.
    class_of: Vec<usize>,
    representatives: Vec<usize>,
}

impl ConjugacyPartition {
    pub fn class_of(&self, element: usize) -> usize {
        self.class_of[element - 1]
    }

    pub fn class_count(&self) -> usize {
        self.representatives.len()
    }

    /// One element per class; the representative of class `c` is entry `c - 1`.
    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count()];
        for &c in &self.class_of {
            sizes[c - 1] += 1;
        }
        sizes
    }
}

impl FiniteGroup {
    /// Builds a group from a 1-based table, verifying all group axioms.
    pub fn from_table(rows: Vec<Vec<usize>>) -> Result<FiniteGroup, GroupError> {
        let n = rows.len();
        if n == 0 {
            return Err(GroupError::Parse { line: 1, message: "group order must be positive".into() });
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::Parse {
                    line: i + 2,
                    message: format!("expected {} entries, found {}", n, row.len()),
                });
            }
            for &v in row {
                if v == 0 || v > n {
                    return Err(GroupError::IndexOutOfRange { index: v, n });
                }
                table.push((v - 1) as u32);
            }
        }
        let mut seen = vec![usize::MAX; n];
        for i in 0..n {
            for j in 0..n {
                let v = table[i * n + j] as usize;
                if seen[v] == i {
                    return Err(GroupError::RowNotPermutation { row: i + 1, n });
                }
                seen[v] = i;
            }
        }
        let mut seen = vec![usize::MAX; n];
        for j in 0..n {
            for i in 0..n {
                let v = table[i * n + j] as usize;
                if seen[v] == j {
                    return Err(GroupError::ColumnNotPermutation { col: j + 1, n });
                }
                seen[v] = j;
            }
        }
        for j in 0..n {
            if table[j] as usize != j {
                return Err(GroupError::IdentityViolation { index: j + 1, got: table[j] as usize + 1 });
            }
            if table[j * n] as usize != j {
                return Err(GroupError::IdentityViolation { index: j + 1, got: table[j * n] as usize + 1 });
            }
        }
        let mut inverses = vec![0u32; n];
        for i in 0..n {
            let k = (0..n).find(|&k| table[i * n + k] == 0).expect("latin square row contains identity");
            inverses[i] = k as u32;
        }
        let group = FiniteGroup { n, table, inverses };
        group.check_associativity()?;
        Ok(group)
    }

    fn check_associativity(&self) -> Result<(), GroupError> {
        let n = self.n;
        let t = &self.table;
        let check = |a: usize, b: usize, c: usize| -> Result<(), GroupError> {
            let left = t[t[a * n + b] as usize * n + c];
            let right = t[a * n + t[b * n + c] as usize];
            if left != right {
                return Err(GroupError::NotAssociative { a: a + 1, b: b + 1, c: c + 1 });
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_ASSOCIATIVITY_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            // xorshift with a fixed seed keeps loading deterministic
            let mut state: u64 = 0x9E37_79B9_7F4A_7C15 ^ n as u64;
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state % n as u64) as usize
            };
            for _ in 0..10 * n * n {
                let (a, b, c) = (next(), next(), next());
                check(a, b, c)?;
            }
        }
        Ok(())
    }

    /// Closure of permutation generators, numbered breadth-first from the identity.
    ///
    /// Permutations are image lists over `1..=degree`; the product `g*h` applies
    /// `g` first, then `h`.
    pub fn from_permutations(
        degree: usize,
        generators: &[Vec<usize>],
        cap: usize,
    ) -> Result<FiniteGroup, GroupError> {
        let mut gens: Vec<Vec<u32>> = Vec::with_capacity(generators.len());
        for (idx, g) in generators.iter().enumerate() {
            if g.len() != degree {
                return Err(GroupError::InvalidPermutation { index: idx + 1, degree });
            }
            let mut hit = vec![false; degree];
            for &x in g {
                if x == 0 || x > degree || hit[x - 1] {
                    return Err(GroupError::InvalidPermutation { index: idx + 1, degree });
                }
                hit[x - 1] = true;
            }
            gens.push(g.iter().map(|&x| (x - 1) as u32).collect());
        }
        let compose = |a: &[u32], b: &[u32]| -> Vec<u32> { a.iter().map(|&x| b[x as usize]).collect() };

        let identity: Vec<u32> = (0..degree as u32).collect();
        let mut elements = vec![identity.clone()];
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        index.insert(identity, 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(e) = queue.pop_front() {
            for g in &gens {
                let next = compose(&elements[e], g);
                if !index.contains_key(&next) {
                    if elements.len() >= cap {
                        return Err(GroupError::CapExceeded { cap });
                    }
                    index.insert(next.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(next);
                }
            }
        }
        let rows: Vec<Vec<usize>> = elements
            .iter()
            .map(|a| elements.iter().map(|b| index[&compose(a, b)] + 1).collect())
            .collect();
        FiniteGroup::from_table(rows)
    }

    /// Parses the `.mtab` text format.
    pub fn parse_mtab(text: &str) -> Result<FiniteGroup, GroupError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (first_line, header) =
            lines.next().ok_or(GroupError::Parse { line: 1, message: "empty file".into() })?;
        let n: usize = header.trim().parse().map_err(|_| GroupError::Parse {
            line: first_line + 1,
            message: format!("expected group order, found {:?}", header.trim()),
        })?;
        let mut rows = Vec::with_capacity(n);
        for (lineno, line) in lines {
            let row: Result<Vec<usize>, _> = line.split_whitespace().map(str::parse::<usize>).collect();
            let row = row.map_err(|e| GroupError::Parse { line: lineno + 1, message: e.to_string() })?;
            rows.push(row);
        }
        if rows.len() != n {
            return Err(GroupError::Parse {
                line: rows.len() + 2,
                message: format!("expected {} table rows, found {}", n, rows.len()),
            });
        }
        FiniteGroup::from_table(rows)
    }

    /// Parses the `.perm` text format and closes the generators.
    pub fn parse_perm(text: &str, cap: usize) -> Result<FiniteGroup, GroupError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (first_line, header) =
            lines.next().ok_or(GroupError::Parse { line: 1, message: "empty file".into() })?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e: std::num::ParseIntError| GroupError::Parse { line: first_line + 1, message: e.to_string() })?;
        let [degree, count] = nums[..] else {
            return Err(GroupError::Parse { line: first_line + 1, message: "expected \"degree count\"".into() });
        };
        let mut gens = Vec::with_capacity(count);
        for (lineno, line) in lines {
            let g: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e: std::num::ParseIntError| GroupError::Parse { line: lineno + 1, message: e.to_string() })?;
            gens.push(g);
        }
        if gens.len() != count {
            return Err(GroupError::Parse {
                line: gens.len() + 2,
                message: format!("expected {} generators, found {}", count, gens.len()),
            });
        }
        FiniteGroup::from_permutations(degree, &gens, cap)
    }

    /// Renders the `.mtab` format.
    pub fn to_mtab(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| (self.table[i * self.n + j] + 1).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        1
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        1..=self.n
    }

    fn check(&self, i: usize) -> Result<(), GroupError> {
        if i == 0 || i > self.n {
            Err(GroupError::IndexOutOfRange { index: i, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn try_mul(&self, i: usize, j: usize) -> Result<usize, GroupError> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.mul(i, j))
    }

    pub fn try_inv(&self, i: usize) -> Result<usize, GroupError> {
        self.check(i)?;
        Ok(self.inv(i))
    }

    /// Product of two elements. Panics on out-of-range indices; see [`Self::try_mul`].
    #[inline]
    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[(i - 1) * self.n + (j - 1)] as usize + 1
    }

    #[inline]
    pub fn inv(&self, i: usize) -> usize {
        self.inverses[i - 1] as usize + 1
    }

    /// `g * h * g^-1`
    #[inline]
    pub fn conjugate(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv(g))
    }

    /// `g * h * g^-1 * h^-1`
    #[inline]
    pub fn commutator(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.mul(self.inv(g), self.inv(h)))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Least common multiple of the element orders.
    pub fn exponent(&self) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 { a } else { gcd(b, a % b) }
        }
        self.elements().map(|g| self.element_order(g)).fold(1, |acc, o| acc / gcd(acc, o) * o)
    }

    /// Map from element order to the number of elements of that order.
    pub fn order_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for g in self.elements() {
            *hist.entry(self.element_order(g)).or_insert(0) += 1;
        }
        hist
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|g| self.elements().all(|h| self.mul(g, h) == self.mul(h, g)))
    }

    pub fn conjugacy_classes(&self) -> ConjugacyPartition {
        let mut class_of = vec![0usize; self.n];
        let mut representatives = Vec::new();
        for h in self.elements() {
            if class_of[h - 1] != 0 {
                continue;
            }
            representatives.push(h);
            let c = representatives.len();
            for g in self.elements() {
                class_of[self.conjugate(g, h) - 1] = c;
            }
        }
        ConjugacyPartition { class_of, representatives }
    }

    /// Smallest subgroup containing `seeds`, by worklist closure.
    pub fn subgroup_closure(&self, seeds: &[usize]) -> Result<ElementSet, GroupError> {
        for &s in seeds {
            self.check(s)?;
        }
        let mut inside = vec![false; self.n];
        inside[0] = true;
        let mut members = vec![1usize];
        let mut work: Vec<usize> = Vec::new();
        for &s in seeds {
            if !inside[s - 1] {
                inside[s - 1] = true;
                members.push(s);
                work.push(s);
            }
        }
        let generators: Vec<usize> = members[1..].to_vec();
        // in a finite group, closing under right multiplication by generators
        // already yields inverses
        while let Some(x) = work.pop() {
            for &g in &generators {
                let y = self.mul(x, g);
                if !inside[y - 1] {
                    inside[y - 1] = true;
                    members.push(y);
                    work.push(y);
                }
            }
        }
        members.sort_unstable();
        Ok(ElementSet { members, parent_order: self.n })
    }

    pub fn derived_subgroup(&self) -> ElementSet {
        let mut seen = vec![false; self.n];
        let mut commutators = Vec::new();
        for g in self.elements() {
            for h in self.elements() {
                let c = self.commutator(g, h);
                if !seen[c - 1] {
                    seen[c - 1] = true;
                    commutators.push(c);
                }
            }
        }
        self.subgroup_closure(&commutators).expect("commutators are valid indices")
    }

    pub fn is_normal(&self, set: &ElementSet) -> bool {
        set.members().iter().all(|&s| self.elements().all(|g| set.contains(self.conjugate(g, s))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> FiniteGroup {
        FiniteGroup::parse_mtab("2\n1 2\n2 1\n").unwrap()
    }

    fn s3() -> FiniteGroup {
        FiniteGroup::from_permutations(3, &[vec![2, 1, 3], vec![2, 3, 1]], DEFAULT_PERMUTATION_CAP).unwrap()
    }

    fn c4() -> FiniteGroup {
        FiniteGroup::from_permutations(4, &[vec![2, 3, 4, 1]], DEFAULT_PERMUTATION_CAP).unwrap()
    }

    #[test]
    fn trivial_table() {
        let g = FiniteGroup::parse_mtab("1\n1\n").unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.inv(1), 1);
    }

    #[test]
    fn z2_table() {
        let g = z2();
        assert_eq!(g.order(), 2);
        assert_eq!(g.mul(2, 2), 1);
        assert_eq!(g.inv(2), 2);
        assert_eq!(g.inv(1), 1);
        assert_eq!(g.mul(1, 2), 2);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(FiniteGroup::parse_mtab("2\n1 2\n2 2\n"), Err(GroupError::RowNotPermutation { row: 2, .. })));
        assert!(matches!(
            FiniteGroup::parse_mtab("2\n2 1\n1 2\n"),
            Err(GroupError::IdentityViolation { .. })
        ));
        assert!(matches!(FiniteGroup::parse_mtab("2\n1 2\n"), Err(GroupError::Parse { .. })));
        assert!(matches!(FiniteGroup::parse_mtab("2\n1 x\n2 1\n"), Err(GroupError::Parse { line: 2, .. })));
        assert!(matches!(FiniteGroup::parse_mtab("2\n1 3\n2 1\n"), Err(GroupError::IndexOutOfRange { .. })));
        assert!(matches!(FiniteGroup::parse_mtab(""), Err(GroupError::Parse { .. })));
    }

    #[test]
    fn rejects_non_associative_loop() {
        // a Latin square with identity 1 that is not associative (order 5 loop)
        let rows = vec![
            vec![1, 2, 3, 4, 5],
            vec![2, 1, 4, 5, 3],
            vec![3, 5, 1, 2, 4],
            vec![4, 3, 5, 1, 2],
            vec![5, 4, 2, 3, 1],
        ];
        assert!(matches!(FiniteGroup::from_table(rows), Err(GroupError::NotAssociative { .. })));
    }

    #[test]
    fn permutation_closures() {
        assert_eq!(s3().order(), 6);
        assert_eq!(FiniteGroup::from_permutations(1, &[], 10).unwrap().order(), 1);
        let c4 = c4();
        assert_eq!(c4.order(), 4);
        assert!(c4.is_abelian());
        assert!(matches!(
            FiniteGroup::from_permutations(3, &[vec![1, 1, 2]], 10),
            Err(GroupError::InvalidPermutation { index: 1, .. })
        ));
        assert!(matches!(
            FiniteGroup::from_permutations(4, &[vec![2, 1, 3, 4], vec![2, 3, 4, 1]], 10),
            Err(GroupError::CapExceeded { cap: 10 })
        ));
    }

    #[test]
    fn perm_format() {
        let g = FiniteGroup::parse_perm("3 2\n2 1 3\n2 3 1\n", 100).unwrap();
        assert_eq!(g.order(), 6);
        assert!(FiniteGroup::parse_perm("3 2\n2 1 3\n", 100).is_err());
    }

    #[test]
    fn arithmetic_errors() {
        let g = z2();
        assert_eq!(g.try_mul(1, 3), Err(GroupError::IndexOutOfRange { index: 3, n: 2 }));
        assert_eq!(g.try_inv(0), Err(GroupError::IndexOutOfRange { index: 0, n: 2 }));
        assert_eq!(g.try_mul(2, 2), Ok(1));
    }

    #[test]
    fn classes_and_derived() {
        let s3 = s3();
        assert_eq!(s3.conjugacy_classes().class_count(), 3);
        assert_eq!(s3.derived_subgroup().len(), 3);
        let c4 = c4();
        assert_eq!(c4.conjugacy_classes().class_count(), 4);
        assert_eq!(c4.derived_subgroup().members(), &[1]);
    }

    #[test]
    fn closures() {
        let c4 = c4();
        assert_eq!(c4.subgroup_closure(&[]).unwrap().members(), &[1]);
        assert_eq!(c4.subgroup_closure(&[1]).unwrap().members(), &[1]);
        // breadth-first numbering: 1 = id, 2 = g, 3 = g^2
        let g2 = c4.mul(2, 2);
        assert_eq!(c4.subgroup_closure(&[g2]).unwrap().len(), 2);
        assert!(c4.subgroup_closure(&[7]).is_err());
    }

    #[test]
    fn mtab_round_trip() {
        let s3 = s3();
        assert_eq!(FiniteGroup::parse_mtab(&s3.to_mtab()).unwrap(), s3);
    }
}
