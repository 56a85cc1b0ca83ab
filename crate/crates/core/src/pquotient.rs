//! Weighted polycyclic presentations of finite p-groups and the p-quotient
//! algorithm.
//!
//! Pc-generators are 0-based in the API and 1-based in the text dump.
//! Elements are exponent vectors `x` with `0 <= x[i] < p`, standing for
//! `a_0^x[0] ... a_{k-1}^x[k-1]`. Commutators follow `[x, y] = x^-1 y^-1 x y`,
//! so `a_j^{a_i} = a_j [a_j, a_i]`.

use std::collections::HashMap;
use std::fmt::Write as _;

use log::{debug, info};
use thiserror::Error;

use crate::linalg::int::{int, Int};
use crate::linalg::{is_prime, ModpEchelon};
use crate::presentation::{Letter, Presentation, Word};

pub const DEFAULT_MAX_STEPS: usize = 1_000_000;
pub const DEFAULT_MAX_GENERATORS: usize = 2048;
/// Environment variable overriding the collection step cap.
pub const MAX_STEPS_ENV: &str = "QENV_MAX_STEPS";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PQuotientError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("maximal class must be at least 1")]
    InvalidClass,
    #[error("collection exceeded {cap} steps")]
    StepCapExceeded { cap: usize },
    #[error("pc-presentation would need {needed} generators (cap {cap})")]
    GeneratorCapExceeded { needed: usize, cap: usize },
    #[error("invalid pc-presentation: {0}")]
    InvalidPresentation(String),
    #[error("inconsistent pc-presentation: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientLimits {
    pub max_steps: usize,
    pub max_generators: usize,
}

impl Default for QuotientLimits {
    fn default() -> Self {
        QuotientLimits { max_steps: DEFAULT_MAX_STEPS, max_generators: DEFAULT_MAX_GENERATORS }
    }
}

impl QuotientLimits {
    /// Defaults, with the step cap taken from `QENV_MAX_STEPS` when it is set
    /// to a positive integer.
    pub fn from_env() -> Self {
        let mut limits = QuotientLimits::default();
        if let Some(steps) = std::env::var(MAX_STEPS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            if steps > 0 {
                limits.max_steps = steps;
            }
        }
        limits
    }
}

/// How a pc-generator entered the presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Definition {
    /// Image of a source-presentation generator (0-based).
    Image { source: usize },
    /// `a_i^p`.
    Power { i: usize },
    /// `[a_j, a_i]`, `j > i`.
    Commutator { j: usize, i: usize },
}

/// Sparse normal form: `(generator, exponent)` pairs, increasing generators.
type Sparse = Vec<(usize, u32)>;

fn to_sparse(v: &[u32]) -> Sparse {
    v.iter().enumerate().filter(|(_, &e)| e != 0).map(|(i, &e)| (i, e)).collect()
}

fn to_dense(s: &[(usize, u32)], k: usize) -> Vec<u32> {
    let mut v = vec![0; k];
    for &(i, e) in s {
        v[i] = e;
    }
    v
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcGroup {
    p: u32,
    weights: Vec<usize>,
    power: Vec<Sparse>,
    /// `comm[j][i]` for `i < j`.
    comm: Vec<Vec<Sparse>>,
    definitions: Vec<Option<Definition>>,
    max_steps: usize,
}

impl PcGroup {
    pub fn trivial(p: u32) -> Self {
        PcGroup {
            p,
            weights: Vec::new(),
            power: Vec::new(),
            comm: Vec::new(),
            definitions: Vec::new(),
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    /// Builds a presentation from dense right-hand sides. `powers[i]` is
    /// `a_i^p`; `commutators` lists `((j, i), [a_j, a_i])` with `j > i`, all
    /// others being trivial. Only shapes and exponent ranges are checked here;
    /// see [`consistency_violations`] for the rest.
    pub fn from_relations(
        p: u32,
        weights: Vec<usize>,
        powers: Vec<Vec<u32>>,
        commutators: Vec<((usize, usize), Vec<u32>)>,
    ) -> Result<Self, PQuotientError> {
        if !is_prime(p as u64) {
            return Err(PQuotientError::NotPrime(p));
        }
        let k = weights.len();
        let bad = |m: String| Err(PQuotientError::InvalidPresentation(m));
        if powers.len() != k {
            return bad(format!("{} power relations for {} generators", powers.len(), k));
        }
        let check = |v: &Vec<u32>| v.len() == k && v.iter().all(|&e| e < p);
        if !powers.iter().all(check) {
            return bad("power relation of wrong length or exponent out of range".into());
        }
        let mut comm: Vec<Vec<Sparse>> = (0..k).map(|j| vec![Vec::new(); j]).collect();
        for ((j, i), v) in commutators {
            if i >= j || j >= k || !check(&v) {
                return bad(format!("bad commutator relation [{}, {}]", j + 1, i + 1));
            }
            comm[j][i] = to_sparse(&v);
        }
        Ok(PcGroup {
            p,
            weights,
            power: powers.iter().map(|v| to_sparse(v)).collect(),
            comm,
            definitions: vec![None; k],
            max_steps: DEFAULT_MAX_STEPS,
        })
    }

    pub fn with_step_cap(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    /// `p^rank`.
    pub fn order(&self) -> Int {
        (0..self.rank()).fold(Int::ONE, |acc, _| acc * int(self.p as i64))
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    /// Largest weight, i.e. the p-class of a presentation built by [`p_quotient`].
    pub fn class(&self) -> usize {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    pub fn definitions(&self) -> &[Option<Definition>] {
        &self.definitions
    }

    pub fn power_relation(&self, i: usize) -> Vec<u32> {
        to_dense(&self.power[i], self.rank())
    }

    pub fn commutator_relation(&self, j: usize, i: usize) -> Vec<u32> {
        assert!(i < j, "commutator relations are stored for j > i");
        to_dense(&self.comm[j][i], self.rank())
    }

    pub fn identity(&self) -> Vec<u32> {
        vec![0; self.rank()]
    }

    pub fn generator(&self, i: usize) -> Vec<u32> {
        let mut v = self.identity();
        v[i] = 1 % self.p;
        v
    }

    fn collector(&self) -> Collector<'_> {
        Collector { g: self, tails: None, max_steps: self.max_steps }
    }

    /// Normal form of `prod a_g^e` for a word of `(generator, exponent)`
    /// pairs; exponents may be negative.
    pub fn collect(&self, word: &[(usize, i64)]) -> Result<Vec<u32>, PQuotientError> {
        let c = self.collector();
        let mut x = self.identity();
        let mut none = Vec::new();
        for &(g, e) in word {
            assert!(g < self.rank(), "generator {} out of range", g);
            let step = if e >= 0 { vec![(g, 1)] } else { to_sparse(&c.inverse(&self.generator(g), &[])?.0) };
            for _ in 0..e.unsigned_abs() {
                c.mul_word(&mut x, &mut none, &step)?;
            }
        }
        Ok(x)
    }

    pub fn multiply(&self, x: &[u32], y: &[u32]) -> Result<Vec<u32>, PQuotientError> {
        let mut out = x.to_vec();
        self.collector().mul_word(&mut out, &mut Vec::new(), &to_sparse(y))?;
        Ok(out)
    }

    pub fn inverse(&self, x: &[u32]) -> Result<Vec<u32>, PQuotientError> {
        Ok(self.collector().inverse(x, &[])?.0)
    }

    pub fn pow(&self, x: &[u32], e: u64) -> Result<Vec<u32>, PQuotientError> {
        let mut out = self.identity();
        let w = to_sparse(x);
        for _ in 0..e {
            self.collector().mul_word(&mut out, &mut Vec::new(), &w)?;
        }
        Ok(out)
    }

    /// `x^-1 y^-1 x y`
    pub fn commutator(&self, x: &[u32], y: &[u32]) -> Result<Vec<u32>, PQuotientError> {
        let xi = self.inverse(x)?;
        let yi = self.inverse(y)?;
        let a = self.multiply(&xi, &yi)?;
        let b = self.multiply(&a, x)?;
        self.multiply(&b, y)
    }

    /// Text dump: `p k`, the weights, then every power and commutator relation.
    pub fn to_dump(&self) -> String {
        let k = self.rank();
        let vec_text = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        let mut out = format!("{} {}\n", self.p, k);
        let _ = writeln!(out, "weights {}", vec_text(&self.weights.iter().map(|&w| w as u32).collect::<Vec<_>>()));
        for i in 0..k {
            let _ = writeln!(out, "{}^{} = {}", i + 1, self.p, vec_text(&self.power_relation(i)));
        }
        for j in 0..k {
            for i in 0..j {
                let _ = writeln!(out, "[{},{}] = {}", j + 1, i + 1, vec_text(&self.commutator_relation(j, i)));
            }
        }
        out
    }
}

/// Tail variables attached to the relations during a lift. Tails are central
/// of order p, so they are tracked as a separate count vector.
struct TailTable {
    power: Vec<Option<usize>>,
    comm: Vec<Vec<Option<usize>>>,
}

struct Collector<'a> {
    g: &'a PcGroup,
    tails: Option<&'a TailTable>,
    max_steps: usize,
}

impl Collector<'_> {
    #[inline]
    fn add_tail(&self, tv: &mut [u32], var: Option<usize>, times: u32) {
        if let Some(v) = var {
            tv[v] = ((tv[v] as u64 + times as u64) % self.g.p as u64) as u32;
        }
    }

    /// `x := x * word`, collecting from the left with an explicit stack.
    fn mul_word(&self, x: &mut [u32], tv: &mut [u32], word: &[(usize, u32)]) -> Result<(), PQuotientError> {
        let g = self.g;
        let p = g.p;
        let k = x.len();
        let mut stack: Vec<usize> = Vec::new();
        for &(a, e) in word.iter().rev() {
            stack.extend(std::iter::repeat_n(a, e as usize));
        }
        let mut steps = 0usize;
        while let Some(a) = stack.pop() {
            steps += 1;
            if steps > self.max_steps {
                return Err(PQuotientError::StepCapExceeded { cap: self.max_steps });
            }
            let mut commuting = true;
            let mut suffix = false;
            for (h, &e) in x.iter().enumerate().skip(a + 1) {
                if e != 0 {
                    suffix = true;
                    if let Some(t) = self.tails {
                        self.add_tail(tv, t.comm[h][a], e);
                    }
                    if !g.comm[h][a].is_empty() {
                        commuting = false;
                    }
                }
            }
            let overflow = x[a] + 1 == p;
            if commuting && !(overflow && suffix) {
                if overflow {
                    x[a] = 0;
                    self.push_power(a, tv, &mut stack);
                } else {
                    x[a] += 1;
                }
                continue;
            }
            // x = L * R with R on generators > a; R * a = a * prod (a_h c_ha)^{e_h}
            for h in (a + 1..k).rev() {
                let e = std::mem::take(&mut x[h]);
                for _ in 0..e {
                    for &(c, ce) in g.comm[h][a].iter().rev() {
                        stack.extend(std::iter::repeat_n(c, ce as usize));
                    }
                    stack.push(h);
                }
            }
            x[a] += 1;
            if x[a] == p {
                x[a] = 0;
                self.push_power(a, tv, &mut stack);
            }
        }
        Ok(())
    }

    fn push_power(&self, a: usize, tv: &mut [u32], stack: &mut Vec<usize>) {
        if let Some(t) = self.tails {
            self.add_tail(tv, t.power[a], 1);
        }
        for &(c, ce) in self.g.power[a].iter().rev() {
            stack.extend(std::iter::repeat_n(c, ce as usize));
        }
    }

    /// Inverse of `(x, xt)`. Multiplying by `a_g^(p - e)` on the leading
    /// generator builds a normal-form word `r` with `x r` central, equal to
    /// the tail vector collected on the way.
    fn inverse(&self, x: &[u32], xt: &[u32]) -> Result<(Vec<u32>, Vec<u32>), PQuotientError> {
        let p = self.g.p;
        let mut cur = x.to_vec();
        let mut ct = vec![0u32; xt.len()];
        let mut r = vec![0u32; x.len()];
        while let Some(a) = cur.iter().position(|&e| e != 0) {
            let f = p - cur[a];
            r[a] = f;
            self.mul_word(&mut cur, &mut ct, &[(a, f)])?;
        }
        let rt = xt.iter().zip(&ct).map(|(&a, &b)| ((2 * p as u64 - a as u64 - b as u64) % p as u64) as u32).collect();
        Ok((r, rt))
    }
}

/// Images of the source generators as exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Epimorphism {
    pub images: Vec<Vec<u32>>,
}

impl Epimorphism {
    /// Image of a word in the source generators.
    pub fn image_of(&self, g: &PcGroup, w: &Word) -> Result<Vec<u32>, PQuotientError> {
        let mut x = g.identity();
        for l in &w.letters {
            let img = &self.images[l.generator - 1];
            let y = if l.exponent > 0 { img.clone() } else { g.inverse(img)? };
            x = g.multiply(&x, &y)?;
        }
        Ok(x)
    }

    /// Relators of `source` whose image is not the identity (0-based).
    pub fn failing_relators(&self, g: &PcGroup, source: &Presentation) -> Result<Vec<usize>, PQuotientError> {
        let mut bad = Vec::new();
        for (i, r) in source.relators().iter().enumerate() {
            if self.image_of(g, r)?.iter().any(|&e| e != 0) {
                bad.push(i);
            }
        }
        Ok(bad)
    }
}

/// A test word whose two collections disagree, or a malformed relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConsistencyViolation {
    /// A relation whose right-hand side involves generators it may not.
    Malformed(String),
    /// `(a_k a_j) a_i` against `a_k (a_j a_i)`.
    Associativity { k: usize, j: usize, i: usize },
    /// `(a_j^p) a_i` against `a_j^(p-1) (a_j a_i)`.
    PowerLeft { j: usize, i: usize },
    /// `(a_j a_i^(p-1)) a_i` against `a_j (a_i^p)`.
    PowerRight { j: usize, i: usize },
    /// `(a_i^p) a_i` against `a_i (a_i^p)`.
    PowerSelf { i: usize },
}

/// The test words of the consistency check, as pairs of collections.
#[derive(Clone, Copy, Debug)]
enum TestWord {
    Associativity(usize, usize, usize),
    PowerLeft(usize, usize),
    PowerRight(usize, usize),
    PowerSelf(usize),
}

fn test_words(k: usize) -> impl Iterator<Item = TestWord> {
    let triples = (0..k).flat_map(move |c| (0..c).flat_map(move |b| (0..b).map(move |a| TestWord::Associativity(c, b, a))));
    let pairs = (0..k).flat_map(|j| (0..j).flat_map(move |i| [TestWord::PowerLeft(j, i), TestWord::PowerRight(j, i)]));
    triples.chain(pairs).chain((0..k).map(TestWord::PowerSelf))
}

type Element = (Vec<u32>, Vec<u32>);

impl Collector<'_> {
    fn element(&self, word: &[(usize, u32)], ntails: usize) -> Result<Element, PQuotientError> {
        let mut x = vec![0; self.g.rank()];
        let mut t = vec![0; ntails];
        self.mul_word(&mut x, &mut t, word)?;
        Ok((x, t))
    }

    fn times(&self, (mut x, mut t): Element, (y, yt): &Element) -> Result<Element, PQuotientError> {
        for (a, b) in t.iter_mut().zip(yt) {
            *a = ((*a as u64 + *b as u64) % self.g.p as u64) as u32;
        }
        self.mul_word(&mut x, &mut t, &to_sparse(y))?;
        Ok((x, t))
    }

    fn power_element(&self, i: usize, ntails: usize) -> Element {
        let mut t = vec![0; ntails];
        if let Some(tt) = self.tails {
            self.add_tail(&mut t, tt.power[i], 1);
        }
        (to_dense(&self.g.power[i], self.g.rank()), t)
    }

    /// Both sides of a test word.
    fn evaluate(&self, w: TestWord, nt: usize) -> Result<(Element, Element), PQuotientError> {
        let p = self.g.p;
        let gen = |i: usize| self.element(&[(i, 1)], nt);
        Ok(match w {
            TestWord::Associativity(c, b, a) => {
                let lhs = self.times(self.element(&[(c, 1), (b, 1)], nt)?, &gen(a)?)?;
                let rhs = self.times(gen(c)?, &self.element(&[(b, 1), (a, 1)], nt)?)?;
                (lhs, rhs)
            }
            TestWord::PowerLeft(j, i) => {
                let lhs = self.times(self.power_element(j, nt), &gen(i)?)?;
                let rhs = self.times(self.element(&[(j, p - 1)], nt)?, &self.element(&[(j, 1), (i, 1)], nt)?)?;
                (lhs, rhs)
            }
            TestWord::PowerRight(j, i) => {
                let lhs = self.times(self.element(&[(j, 1), (i, p - 1)], nt)?, &gen(i)?)?;
                let rhs = self.times(gen(j)?, &self.power_element(i, nt))?;
                (lhs, rhs)
            }
            TestWord::PowerSelf(i) => {
                let lhs = self.times(self.power_element(i, nt), &gen(i)?)?;
                let rhs = self.times(gen(i)?, &self.power_element(i, nt))?;
                (lhs, rhs)
            }
        })
    }
}

/// Empty iff the presentation is consistent. A collection that fails (for
/// instance by running into the step cap) counts as a violation.
pub fn consistency_violations(g: &PcGroup) -> Vec<ConsistencyViolation> {
    let k = g.rank();
    let mut out = Vec::new();
    for i in 0..k {
        if g.power[i].iter().any(|&(x, _)| x <= i) {
            out.push(ConsistencyViolation::Malformed(format!("a{}^{} involves a generator of index <= {}", i + 1, g.p, i + 1)));
        }
        for j in i + 1..k {
            if g.comm[j][i].iter().any(|&(x, _)| x <= j) {
                out.push(ConsistencyViolation::Malformed(format!(
                    "[a{},a{}] involves a generator of index <= {}",
                    j + 1,
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    let c = g.collector();
    for w in test_words(k) {
        let ok = matches!(c.evaluate(w, 0), Ok((l, r)) if l.0 == r.0);
        if !ok {
            out.push(match w {
                TestWord::Associativity(c, b, a) => ConsistencyViolation::Associativity { k: c, j: b, i: a },
                TestWord::PowerLeft(j, i) => ConsistencyViolation::PowerLeft { j, i },
                TestWord::PowerRight(j, i) => ConsistencyViolation::PowerRight { j, i },
                TestWord::PowerSelf(i) => ConsistencyViolation::PowerSelf { i },
            });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Relation {
    Power(usize),
    Comm(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    Rel(Relation),
    Source(usize),
}

struct Lift {
    group: PcGroup,
    images: Vec<Vec<u32>>,
    /// Pc-generator defined by each source generator, if any.
    defines: Vec<Option<usize>>,
}

impl Lift {
    /// Extends a consistent class-`c` quotient by its next layer; returns the
    /// number of new generators.
    fn step(&mut self, source: &Presentation, c: usize, limits: &QuotientLimits) -> Result<usize, PQuotientError> {
        let g = &self.group;
        let k = g.rank();
        let p = g.p;
        let defined: HashMap<Relation, usize> = g
            .definitions
            .iter()
            .enumerate()
            .filter_map(|(l, d)| match d {
                Some(Definition::Power { i }) => Some((Relation::Power(*i), l)),
                Some(Definition::Commutator { j, i }) => Some((Relation::Comm(*j, *i), l)),
                _ => None,
            })
            .collect();

        let relations = (0..k).map(Relation::Power).chain((0..k).flat_map(|j| (0..j).map(move |i| Relation::Comm(j, i))));
        let mut vars: Vec<Var> = relations.filter(|r| !defined.contains_key(r)).map(Var::Rel).collect();
        let rel_vars = vars.len();
        vars.extend((0..source.generator_count()).filter(|&y| self.defines[y].is_none()).map(Var::Source));
        let nv = vars.len();

        let mut table = TailTable { power: vec![None; k], comm: (0..k).map(|j| vec![None; j]).collect() };
        let mut source_var = vec![None; source.generator_count()];
        for (v, var) in vars.iter().enumerate() {
            match *var {
                Var::Rel(Relation::Power(i)) => table.power[i] = Some(v),
                Var::Rel(Relation::Comm(j, i)) => table.comm[j][i] = Some(v),
                Var::Source(y) => source_var[y] = Some(v),
            }
        }

        let preferred = |r: Relation| match r {
            Relation::Power(i) => g.weights[i] == c,
            Relation::Comm(j, i) => g.weights[j] == c && g.weights[i] == 1,
        };
        // pivot first: source tails, then ordinary tails, then preferred
        // definitions from the least to the most preferred
        let mut priority: Vec<usize> = Vec::with_capacity(nv);
        if c == 0 {
            priority.extend((rel_vars..nv).rev());
        } else {
            priority.extend(rel_vars..nv);
        }
        let is_pref = |v: usize| matches!(vars[v], Var::Rel(r) if preferred(r));
        priority.extend((0..rel_vars).filter(|&v| !is_pref(v)));
        priority.extend((0..rel_vars).rev().filter(|&v| is_pref(v)));
        let mut echelon = ModpEchelon::new(p as u64, &priority);

        let collector = Collector { g, tails: Some(&table), max_steps: limits.max_steps };
        let mut equations = 0usize;
        let mut add_equation = |lhs: &[u32], rhs: &[u32]| {
            let row: Vec<u64> = lhs.iter().zip(rhs).map(|(&a, &b)| ((a + p - b) % p) as u64).collect();
            if row.iter().any(|&x| x != 0) {
                equations += 1;
                echelon.insert(row);
            }
        };
        for w in test_words(k) {
            let ((lx, lt), (rx, rt)) = collector.evaluate(w, nv)?;
            if lx != rx {
                return Err(PQuotientError::Inconsistent(format!("test word {:?} at class {}", w, c)));
            }
            add_equation(&lt, &rt);
        }

        let images: Vec<Element> = (0..source.generator_count())
            .map(|y| {
                let mut t = vec![0; nv];
                if let Some(v) = source_var[y] {
                    t[v] = 1;
                }
                (self.images[y].clone(), t)
            })
            .collect();
        let mut inverses: Vec<Option<Element>> = vec![None; images.len()];
        for r in source.relators() {
            let mut x: Element = (vec![0; k], vec![0; nv]);
            for &Letter { generator, exponent } in &r.letters {
                let y = generator - 1;
                if exponent > 0 {
                    x = collector.times(x, &images[y])?;
                } else {
                    if inverses[y].is_none() {
                        inverses[y] = Some(collector.inverse(&images[y].0, &images[y].1)?);
                    }
                    x = collector.times(x, inverses[y].as_ref().expect("just computed"))?;
                }
            }
            if x.0.iter().any(|&e| e != 0) {
                return Err(PQuotientError::Inconsistent("a source relator does not map to the identity".into()));
            }
            add_equation(&vec![0; nv], &x.1);
        }

        // free columns become the new generators, most preferred first
        let free: Vec<usize> = priority.iter().rev().copied().filter(|&v| !echelon.is_pivot(v)).collect();
        let m = free.len();
        debug!("class {} -> {}: {} tails, {} equations, rank {}, {} new generators", c, c + 1, nv, equations, echelon.rank(), m);
        if k + m > limits.max_generators {
            return Err(PQuotientError::GeneratorCapExceeded { needed: k + m, cap: limits.max_generators });
        }
        let mut new_defs = Vec::with_capacity(m);
        for &v in &free {
            new_defs.push(match vars[v] {
                Var::Source(y) if c == 0 => Definition::Image { source: y },
                Var::Rel(r) if c > 0 && preferred(r) => match r {
                    Relation::Power(i) => Definition::Power { i },
                    Relation::Comm(j, i) => Definition::Commutator { j, i },
                },
                other => {
                    return Err(PQuotientError::Inconsistent(format!("tail {:?} survived without a definition", other)))
                }
            });
        }
        let slot: HashMap<usize, usize> = free.iter().enumerate().map(|(s, &v)| (v, k + s)).collect();
        let value = |v: usize| -> Sparse {
            if let Some(&s) = slot.get(&v) {
                return vec![(s, 1)];
            }
            let row = echelon.pivot_row(v).expect("non-free tails are pivots");
            let mut out: Sparse = free
                .iter()
                .filter(|&&f| row[f] != 0)
                .map(|&f| (slot[&f], ((p as u64 - row[f]) % p as u64) as u32))
                .collect();
            out.sort_unstable();
            out
        };

        let mut next = self.group.clone();
        for (v, var) in vars.iter().enumerate().take(rel_vars) {
            let extra = value(v);
            match *var {
                Var::Rel(Relation::Power(i)) => next.power[i].extend(extra),
                Var::Rel(Relation::Comm(j, i)) => next.comm[j][i].extend(extra),
                Var::Source(_) => unreachable!(),
            }
        }
        for (s, d) in new_defs.iter().enumerate() {
            next.weights.push(c + 1);
            next.power.push(Vec::new());
            next.comm.push(vec![Vec::new(); k + s]);
            next.definitions.push(Some(*d));
            if let Definition::Image { source } = d {
                self.defines[*source] = Some(k + s);
            }
        }
        for (y, img) in self.images.iter_mut().enumerate() {
            img.resize(k + m, 0);
            if let Some(v) = source_var[y] {
                for (s, e) in value(v) {
                    img[s] = e;
                }
            }
        }
        self.group = next;
        Ok(m)
    }
}

/// The largest quotient of the group presented by `source` that is a finite
/// p-group of p-class at most `max_class`, with the images of the source
/// generators.
pub fn p_quotient(source: &Presentation, p: u32, max_class: usize) -> Result<(PcGroup, Epimorphism), PQuotientError> {
    p_quotient_with(source, p, max_class, &QuotientLimits::default())
}

pub fn p_quotient_with(
    source: &Presentation,
    p: u32,
    max_class: usize,
    limits: &QuotientLimits,
) -> Result<(PcGroup, Epimorphism), PQuotientError> {
    if !is_prime(p as u64) || p > u16::MAX as u32 {
        return Err(PQuotientError::NotPrime(p));
    }
    if max_class == 0 {
        return Err(PQuotientError::InvalidClass);
    }
    let mut lift = Lift {
        group: PcGroup::trivial(p).with_step_cap(limits.max_steps),
        images: vec![Vec::new(); source.generator_count()],
        defines: vec![None; source.generator_count()],
    };
    for c in 0..max_class {
        let m = lift.step(source, c, limits)?;
        info!("p-quotient: class {} layer has rank {}", c + 1, m);
        if m == 0 {
            break;
        }
    }
    Ok((lift.group, Epimorphism { images: lift.images }))
}

/// Order of the subgroup generated by `seeds`, through an induced generating
/// sequence with one element per leading index. With `normal` set the
/// normal closure is measured instead.
pub fn pc_subgroup_order(g: &PcGroup, seeds: &[Vec<u32>], normal: bool) -> Result<Int, PQuotientError> {
    let k = g.rank();
    let p = g.p;
    let mut table: Vec<Option<Vec<u32>>> = vec![None; k];
    let mut queue: Vec<Vec<u32>> = seeds.to_vec();
    while let Some(mut x) = queue.pop() {
        // sift
        let added = loop {
            let Some(d) = x.iter().position(|&e| e != 0) else { break None };
            match &table[d] {
                Some(y) => {
                    let y = g.pow(y, (p - x[d]) as u64)?;
                    x = g.multiply(&x, &y)?;
                }
                None => {
                    let inv = (1..p).find(|&s| (s as u64 * x[d] as u64) % p as u64 == 1).expect("p is prime");
                    x = g.pow(&x, inv as u64)?;
                    break Some(d);
                }
            }
        };
        let Some(d) = added else { continue };
        queue.push(g.pow(&x, p as u64)?);
        for y in table.iter().flatten() {
            queue.push(g.commutator(&x, y)?);
        }
        if normal {
            for i in 0..k {
                queue.push(g.commutator(&x, &g.generator(i))?);
            }
        }
        table[d] = Some(x);
    }
    let size = table.iter().filter(|t| t.is_some()).count();
    Ok((0..size).fold(Int::ONE, |acc, _| acc * int(p as i64)))
}

/// Order of the derived subgroup: the normal closure of the commutators of
/// the pc-generators.
pub fn pc_derived_order(g: &PcGroup) -> Result<Int, PQuotientError> {
    let k = g.rank();
    let mut seeds = Vec::new();
    for j in 0..k {
        for i in 0..j {
            seeds.push(g.commutator(&g.generator(j), &g.generator(i))?);
        }
    }
    pc_subgroup_order(g, &seeds, true)
}
