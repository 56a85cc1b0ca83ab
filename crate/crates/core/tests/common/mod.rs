#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use qenv_core::group::FiniteGroup;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn load(name: &str) -> FiniteGroup {
    let path = fixture_dir().join(format!("{}.mtab", name));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {}", path.display(), e));
    FiniteGroup::parse_mtab(&text).unwrap_or_else(|e| panic!("{}: {}", name, e))
}

/// `order` -> `derived order` of a reference quotient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuotientRef {
    pub p: u32,
    pub rank: usize,
    pub derived: u64,
}

#[derive(Clone, Debug)]
pub struct Reference {
    pub name: String,
    pub order: usize,
    pub classes: usize,
    pub derived: usize,
    pub exponent: usize,
    pub schur: Vec<u64>,
    /// keyed by (p, class)
    pub quotients: BTreeMap<(u32, usize), QuotientRef>,
}

fn quotient(v: &str) -> QuotientRef {
    let (pow, derived) = v.split_once('/').unwrap();
    let (p, rank) = pow.split_once('^').unwrap();
    QuotientRef { p: p.parse().unwrap(), rank: rank.parse().unwrap(), derived: derived.parse().unwrap() }
}

pub fn references() -> Vec<Reference> {
    let text = std::fs::read_to_string(fixture_dir().join("gap_reference.txt")).unwrap();
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let (name, rest) = line.split_once(' ').unwrap();
        let (schur_part, rest) = rest.split_once("schur=[").unwrap();
        let (schur, tail) = rest.split_once(']').unwrap();
        let mut r = Reference {
            name: name.to_string(),
            order: 0,
            classes: 0,
            derived: 0,
            exponent: 0,
            schur: schur.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
            quotients: BTreeMap::new(),
        };
        for field in schur_part.split_whitespace().chain(tail.split_whitespace()) {
            let (key, value) = field.split_once('=').unwrap();
            match key {
                "n" => r.order = value.parse().unwrap(),
                "classes" => r.classes = value.parse().unwrap(),
                "derived" => r.derived = value.parse().unwrap(),
                "exponent" => r.exponent = value.parse().unwrap(),
                _ => {
                    let q = quotient(value);
                    let class: usize = key[1..2].parse().unwrap();
                    r.quotients.insert((q.p, class), q);
                }
            }
        }
        out.push(r);
    }
    out
}
