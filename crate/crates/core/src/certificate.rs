//! The certification pipeline and its report.
//!
//! The verdict rests on one inequality. An epimorphism `A(G) -> K` maps
//! `A(G)'` onto `K'`, so `|A(G)'| >= |K'|`. If `|K'| > |G'|` the derived
//! subgroups of `A(G)` and `G` cannot be isomorphic, and that happens exactly
//! when the symmetric cohomology `H^2_S(G, C^x)` is nonzero. A bounded-class
//! quotient never proves the converse, so the only other verdict is
//! INCONCLUSIVE.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cocycle::{CocycleError, CohomologyGroup};
use crate::group::FiniteGroup;
use crate::linalg::int::{int, Int};
use crate::pquotient::{p_quotient_with, pc_derived_order, PQuotientError, QuotientLimits};
use crate::presentation::{envelope_presentation, envelope_raw_relator_count};

pub const TOOL_VERSION: &str = concat!("qenv ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("p-quotient stage")]
    Quotient(#[from] PQuotientError),
    #[error("oracle stage")]
    Oracle(#[from] CocycleError),
    #[error("report parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("report serialisation")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Nontrivial,
    Inconclusive,
}

impl Verdict {
    /// NONTRIVIAL iff the quotient's derived subgroup is larger than `G'`.
    pub fn decide(derived_order: &Int, quotient_derived_order: &Int) -> Verdict {
        if quotient_derived_order > derived_order {
            Verdict::Nontrivial
        } else {
            Verdict::Inconclusive
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Nontrivial => "NONTRIVIAL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "NONTRIVIAL" => Ok(Verdict::Nontrivial),
            "INCONCLUSIVE" => Ok(Verdict::Inconclusive),
            other => Err(format!("unknown verdict {:?}", other)),
        }
    }
}

mod int_string {
    use super::Int;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Int, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Int, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

mod int_list {
    use super::Int;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Int>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|l| l.iter().map(Int::to_string).collect::<Vec<_>>()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Int>>, D::Error> {
        Option::<Vec<String>>::deserialize(d)?
            .map(|l| l.iter().map(|x| x.parse().map_err(D::Error::custom)).collect())
            .transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub group_order: usize,
    pub class_count: usize,
    pub derived_order: usize,
    /// Element order -> number of elements, for identifying the input group.
    pub element_orders: BTreeMap<usize, usize>,
    pub envelope_generators: usize,
    pub envelope_relators_raw: usize,
    /// Relators left after free reduction and removal of duplicates.
    pub envelope_relators: usize,
    pub quotient_prime: u32,
    pub quotient_class: usize,
    #[serde(with = "int_string")]
    pub quotient_order: Int,
    #[serde(with = "int_string")]
    pub quotient_derived_order: Int,
    pub verdict: Verdict,
    pub decision: String,
    #[serde(with = "int_list", default, skip_serializing_if = "Option::is_none")]
    pub oracle_invariant_factors: Option<Vec<Int>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cocycle_path: Option<String>,
    pub tool_version: String,
    pub fixture_checksum: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn decision_text(derived: &Int, quotient_derived: &Int, p: u32, class: usize, verdict: Verdict) -> String {
    match verdict {
        Verdict::Nontrivial => format!(
            "|A(G)'| >= |K'| = {} > {} = |G'| for the class-{} {}-quotient K, so A(G)' and G' are not isomorphic and H^2_S(G, C^x) != 0",
            quotient_derived, derived, class, p
        ),
        Verdict::Inconclusive => format!(
            "|K'| = {} <= {} = |G'| for the class-{} {}-quotient K; this bound cannot separate A(G)' from G'",
            quotient_derived, derived, class, p
        ),
    }
}

/// Runs the quotient route on `g`. `source` is the group file the table was
/// read from; only its checksum is recorded.
pub fn certify(
    g: &FiniteGroup,
    source: &[u8],
    p: u32,
    max_class: usize,
    limits: &QuotientLimits,
) -> Result<Certificate, CertifyError> {
    let derived = g.derived_subgroup().len();
    let envelope = envelope_presentation(g);
    let (k, _) = p_quotient_with(&envelope, p, max_class, limits)?;
    let quotient_derived = pc_derived_order(&k)?;
    let derived_int = int(derived as i64);
    let verdict = Verdict::decide(&derived_int, &quotient_derived);
    Ok(Certificate {
        group_order: g.order(),
        class_count: g.conjugacy_classes().class_count(),
        derived_order: derived,
        element_orders: g.order_histogram(),
        envelope_generators: envelope.generator_count(),
        envelope_relators_raw: envelope_raw_relator_count(g),
        envelope_relators: envelope.relators().len(),
        quotient_prime: p,
        quotient_class: max_class,
        quotient_order: k.order(),
        decision: decision_text(&derived_int, &quotient_derived, p, max_class, verdict),
        quotient_derived_order: quotient_derived,
        verdict,
        oracle_invariant_factors: None,
        cocycle_path: None,
        tool_version: TOOL_VERSION.to_string(),
        fixture_checksum: sha256_hex(source),
        timestamp: None,
    })
}

impl Certificate {
    pub fn attach_oracle(&mut self, h: &CohomologyGroup) {
        self.oracle_invariant_factors = Some(h.invariant_factors.clone());
    }

    /// False only when the quotient route proved nontriviality while the
    /// attached oracle found the group trivial.
    pub fn oracle_agrees(&self) -> bool {
        match (&self.oracle_invariant_factors, self.verdict) {
            (Some(f), Verdict::Nontrivial) => !f.is_empty(),
            _ => true,
        }
    }

    /// `key: value` lines in field order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(out, "{}: {}", k, v);
        };
        line("group_order", &self.group_order);
        line("class_count", &self.class_count);
        line("derived_order", &self.derived_order);
        let orders: Vec<String> = self.element_orders.iter().map(|(o, c)| format!("{}:{}", o, c)).collect();
        line("element_orders", &orders.join(" "));
        line("envelope_generators", &self.envelope_generators);
        line("envelope_relators_raw", &self.envelope_relators_raw);
        line("envelope_relators", &self.envelope_relators);
        line("quotient_prime", &self.quotient_prime);
        line("quotient_class", &self.quotient_class);
        line("quotient_order", &self.quotient_order);
        line("quotient_derived_order", &self.quotient_derived_order);
        line("verdict", &self.verdict);
        line("decision", &self.decision);
        if let Some(f) = &self.oracle_invariant_factors {
            let f: Vec<String> = f.iter().map(Int::to_string).collect();
            line("oracle_invariant_factors", &format!("[{}]", f.join(", ")));
        }
        if let Some(c) = &self.cocycle_path {
            line("cocycle_path", c);
        }
        line("tool_version", &self.tool_version);
        line("fixture_checksum", &self.fixture_checksum);
        if let Some(t) = &self.timestamp {
            line("timestamp", t);
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Certificate, CertifyError> {
        let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, l) in text.lines().enumerate() {
            if l.trim().is_empty() {
                continue;
            }
            let (k, v) = l.split_once(':').ok_or(CertifyError::Parse { line: i + 1, message: "expected key: value".into() })?;
            if fields.insert(k.trim(), (i + 1, v.trim())).is_some() {
                return Err(CertifyError::Parse { line: i + 1, message: format!("duplicate key {}", k.trim()) });
            }
        }
        fn get<'a>(f: &BTreeMap<&str, (usize, &'a str)>, key: &str) -> Result<(usize, &'a str), CertifyError> {
            f.get(key).copied().ok_or(CertifyError::Parse { line: 0, message: format!("missing key {}", key) })
        }
        fn parse<T: FromStr>(f: &BTreeMap<&str, (usize, &str)>, key: &str) -> Result<T, CertifyError> {
            let (line, v) = get(f, key)?;
            v.parse().map_err(|_| CertifyError::Parse { line, message: format!("bad value for {}", key) })
        }
        let (orders_line, orders) = get(&fields, "element_orders")?;
        let element_orders = orders
            .split_whitespace()
            .map(|pair| {
                let (o, c) = pair.split_once(':')?;
                Some((o.parse().ok()?, c.parse().ok()?))
            })
            .collect::<Option<BTreeMap<usize, usize>>>()
            .ok_or(CertifyError::Parse { line: orders_line, message: "bad element_orders".into() })?;
        let oracle = match fields.get("oracle_invariant_factors") {
            None => None,
            Some(&(line, v)) => {
                let inner = v
                    .strip_prefix('[')
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or(CertifyError::Parse { line, message: "expected [..]".into() })?;
                Some(
                    inner
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse::<Int>().map_err(|_| CertifyError::Parse { line, message: "bad factor".into() }))
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
        };
        let verdict_line = get(&fields, "verdict")?.0;
        Ok(Certificate {
            group_order: parse(&fields, "group_order")?,
            class_count: parse(&fields, "class_count")?,
            derived_order: parse(&fields, "derived_order")?,
            element_orders,
            envelope_generators: parse(&fields, "envelope_generators")?,
            envelope_relators_raw: parse(&fields, "envelope_relators_raw")?,
            envelope_relators: parse(&fields, "envelope_relators")?,
            quotient_prime: parse(&fields, "quotient_prime")?,
            quotient_class: parse(&fields, "quotient_class")?,
            quotient_order: parse(&fields, "quotient_order")?,
            quotient_derived_order: parse(&fields, "quotient_derived_order")?,
            verdict: get(&fields, "verdict")?
                .1
                .parse()
                .map_err(|message| CertifyError::Parse { line: verdict_line, message })?,
            decision: get(&fields, "decision")?.1.to_string(),
            oracle_invariant_factors: oracle,
            cocycle_path: fields.get("cocycle_path").map(|v| v.1.to_string()),
            tool_version: get(&fields, "tool_version")?.1.to_string(),
            fixture_checksum: get(&fields, "fixture_checksum")?.1.to_string(),
            timestamp: fields.get("timestamp").map(|v| v.1.to_string()),
        })
    }

    pub fn to_json(&self) -> Result<String, CertifyError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn parse_json(text: &str) -> Result<Certificate, CertifyError> {
        Ok(serde_json::from_str(text)?)
    }
}
