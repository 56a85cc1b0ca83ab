//! Finitely presented groups and the enveloping group of a conjugacy quandle.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::group::FiniteGroup;
use crate::linalg::int::int;
use crate::linalg::SparseIntMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("generator {generator} out of range 1..={count}")]
    GeneratorOutOfRange { generator: usize, count: usize },
}

/// `generator` is 1-based; `exponent` is +1 or -1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub exponent: i8,
}

impl Letter {
    pub fn new(generator: usize, exponent: i8) -> Self {
        assert!(generator >= 1 && (exponent == 1 || exponent == -1), "invalid letter");
        Letter { generator, exponent }
    }

    pub fn inverse(self) -> Self {
        Letter { generator: self.generator, exponent: -self.exponent }
    }

    /// Signed form used by the text format: `g` or `-g`.
    pub fn signed(self) -> i64 {
        self.generator as i64 * self.exponent as i64
    }

    pub fn from_signed(v: i64) -> Option<Self> {
        if v == 0 {
            None
        } else {
            Some(Letter { generator: v.unsigned_abs() as usize, exponent: v.signum() as i8 })
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    pub fn from_signed(values: &[i64]) -> Self {
        Word { letters: values.iter().filter_map(|&v| Letter::from_signed(v)).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }
}

pub fn free_reduce(w: &Word) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(w.letters.len());
    for &l in &w.letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word { letters: out }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    generator_count: usize,
    relators: Vec<Word>,
}

impl Presentation {
    /// Freely reduces the relators and drops empty ones and exact duplicates,
    /// keeping first occurrences in order.
    pub fn new(generator_count: usize, relators: impl IntoIterator<Item = Word>) -> Result<Self, PresentationError> {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for r in relators {
            if let Some(l) = r.letters.iter().find(|l| l.generator > generator_count) {
                return Err(PresentationError::GeneratorOutOfRange { generator: l.generator, count: generator_count });
            }
            let r = free_reduce(&r);
            if !r.is_empty() && seen.insert(r.clone()) {
                kept.push(r);
            }
        }
        Ok(Presentation { generator_count, relators: kept })
    }

    pub fn generator_count(&self) -> usize {
        self.generator_count
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// `.fpres`: generator count, then one relator per line as signed integers.
    pub fn to_fpres(&self) -> String {
        let mut out = format!("{}\n", self.generator_count);
        for r in &self.relators {
            let parts: Vec<String> = r.letters.iter().map(|l| l.signed().to_string()).collect();
            let _ = writeln!(out, "{}", parts.join(" "));
        }
        out
    }

    pub fn parse_fpres(text: &str) -> Result<Self, PresentationError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, message: &str| PresentationError::Parse { line: line + 1, message: message.into() };
        let (l0, first) = lines.next().ok_or_else(|| bad(0, "empty input"))?;
        let count: usize = first.trim().parse().map_err(|_| bad(l0, "expected generator count"))?;
        let mut relators = Vec::new();
        for (ln, line) in lines {
            let values: Vec<i64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| bad(ln, "expected signed generator indices"))?;
            if values.contains(&0) {
                return Err(bad(ln, "generator 0 does not exist"));
            }
            relators.push(Word::from_signed(&values));
        }
        Presentation::new(count, relators)
    }
}

/// Number of relators `envelope_presentation` generates before reduction.
pub fn envelope_raw_relator_count(g: &FiniteGroup) -> usize {
    g.order() * g.order()
}

/// `A(G) = < e_g | e_i e_j e_i^-1 e_k^-1, k = i j i^-1 >`, relators in row-major
/// `(i, j)` order.
pub fn envelope_presentation(g: &FiniteGroup) -> Presentation {
    let n = g.order();
    let relators = (1..=n).flat_map(|i| {
        (1..=n).map(move |j| {
            let k = g.conjugate(i, j);
            Word::new(vec![Letter::new(i, 1), Letter::new(j, 1), Letter::new(i, -1), Letter::new(k, -1)])
        })
    });
    Presentation::new(n, relators).expect("indices are in range")
}

/// One row per relator, one column per generator, entries the exponent sums.
pub fn abelianized_relation_matrix(p: &Presentation) -> SparseIntMatrix {
    let mut m = SparseIntMatrix::zeros(0, p.generator_count());
    for r in p.relators() {
        m.push_row(r.letters.iter().map(|l| (l.generator - 1, int(l.exponent as i64))).collect());
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[i64]) -> Word {
        Word::from_signed(v)
    }

    #[test]
    fn reduction() {
        assert!(free_reduce(&w(&[1, -1])).is_empty());
        assert_eq!(free_reduce(&w(&[1, 2, -2, 1])), w(&[1, 1]));
        assert_eq!(free_reduce(&w(&[1, 2, -1])), w(&[1, 2, -1]));
        assert_eq!(free_reduce(&w(&[3, 1, 2, -2, -1, -3, 2])), w(&[2]));
    }

    #[test]
    fn duplicates_and_empties_are_dropped() {
        let p = Presentation::new(2, vec![w(&[1, -1]), w(&[1, 2]), w(&[1, 2]), w(&[-2, -1])]).unwrap();
        assert_eq!(p.relators(), &[w(&[1, 2]), w(&[-2, -1])]);
        assert!(Presentation::new(1, vec![w(&[2])]).is_err());
    }

    #[test]
    fn fpres_round_trip() {
        let p = Presentation::new(3, vec![w(&[1, 2, -1, -3]), w(&[2, 2])]).unwrap();
        let text = p.to_fpres();
        assert_eq!(text, "3\n1 2 -1 -3\n2 2\n");
        assert_eq!(Presentation::parse_fpres(&text).unwrap(), p);
        assert!(Presentation::parse_fpres("2\n1 0\n").is_err());
        assert!(Presentation::parse_fpres("2\n1 3\n").is_err());
    }

    #[test]
    fn trivial_and_cyclic_envelopes() {
        let trivial = FiniteGroup::from_table(vec![vec![1]]).unwrap();
        let p = envelope_presentation(&trivial);
        assert_eq!((p.generator_count(), p.relators().len()), (1, 0));
        let c3 = FiniteGroup::from_table(vec![vec![1, 2, 3], vec![2, 3, 1], vec![3, 1, 2]]).unwrap();
        let p = envelope_presentation(&c3);
        // commutators [e_i, e_j] for i != j
        assert_eq!(p.relators().len(), 6);
        assert!(p.relators().iter().all(|r| r.len() == 4));
        assert!(abelianized_relation_matrix(&p).is_zero());
    }

    #[test]
    fn exponent_sums() {
        let p = Presentation::new(3, vec![w(&[1, 2, -1, -3])]).unwrap();
        assert_eq!(abelianized_relation_matrix(&p), SparseIntMatrix::from_dense(&[vec![0, 1, -1]]));
    }
}
