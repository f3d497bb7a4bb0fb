//! Generator schedules of disjoint disks, reduced words, the nested disks
//! they index, and the radius recursion relating a word to its suffix.

mod tree;
mod words;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::hyperbolic::{Circle, GeometryError};
use crate::scalar::rational::{format_rational, parse_rational, pow2};
use crate::scalar::Scalar;

pub use tree::{beardon_check, beardon_sweep, word_disk, BeardonReport, DiskNode, DiskTree, TreeOptions};
pub use words::{enumerate_words, word_count, ReducedWord, WordStream};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("word {word:?} is not reduced: {reason}")]
    NotReduced { word: Vec<usize>, reason: &'static str },
    #[error("index {0} is not in the schedule")]
    MissingIndex(usize),
    #[error("schedule is not admissible: {0}")]
    Inadmissible(ValidationReport),
    #[error("|c_{i} - c_{j}| <= 1, so the contraction factor 1/(|c_i - c_j| - 1) is undefined")]
    CentersTooClose { i: usize, j: usize },
    #[error("disk of {child} is not nested in the disk of {parent}")]
    Nesting { parent: String, child: String },
    #[error("disks of {a} and {b} at the same depth intersect")]
    Overlap { a: String, b: String },
    #[error("the image of {0} under its first generator is unbounded")]
    UnboundedImage(String),
    #[error("invalid window: {0}")]
    Window(String),
    #[error("schedule file: {0}")]
    Format(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One generator: inversion in the circle `B(center, radius)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub index: usize,
    pub center: BigRational,
    pub radius: BigRational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// `r_i = 2^(-2 i^2)`, `c_1 = 0`, `c_i = c_(i-1) + 2^(i^2 + 2) + 1`.
    #[serde(rename = "paper")]
    Standard,
    User,
}

/// Radius `2^(-2 i^2)` of the standard schedule.
pub fn standard_radius(i: usize) -> BigRational {
    pow2(-2 * (i * i) as i64)
}

/// Gap `c_i - c_(i-1) = 2^(i^2 + 2) + 1` of the standard schedule.
pub fn standard_center_step(i: usize) -> BigRational {
    pow2((i * i + 2) as i64) + BigRational::one()
}

/// Ordered list of generators with exact centers and radii.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSchedule {
    entries: Vec<Generator>,
    provenance: Provenance,
}

/// A single violated invariant, with the witnessing indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Overlap { i: usize, j: usize },
    RadiusAboveOne { i: usize },
    NonPositiveRadius { i: usize },
    CentersNotIncreasing { i: usize, j: usize },
    DuplicateIndex { i: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Overlap { i, j } => write!(f, "disks {i} and {j} intersect"),
            Violation::RadiusAboveOne { i } => write!(f, "radius of {i} exceeds 1"),
            Violation::NonPositiveRadius { i } => write!(f, "radius of {i} is not positive"),
            Violation::CentersNotIncreasing { i, j } => write!(f, "center of {j} does not exceed center of {i}"),
            Violation::DuplicateIndex { i } => write!(f, "index {i} appears twice"),
        }
    }
}

/// Every violated invariant; empty iff the schedule is admissible.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("admissible");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

impl GeneratorSchedule {
    /// Generators `1..=count` of the standard schedule.
    pub fn standard(count: usize) -> Self {
        let mut entries = Vec::with_capacity(count);
        let mut c = BigRational::zero();
        for i in 1..=count {
            if i > 1 {
                c += standard_center_step(i);
            }
            entries.push(Generator { index: i, center: c.clone(), radius: standard_radius(i) });
        }
        GeneratorSchedule { entries, provenance: Provenance::Standard }
    }

    /// Builds a schedule without checking it; see [`GeneratorSchedule::validate`].
    pub fn from_entries(entries: Vec<Generator>, provenance: Provenance) -> Self {
        GeneratorSchedule { entries, provenance }
    }

    pub fn entries(&self) -> &[Generator] {
        &self.entries
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> usize {
        self.entries.iter().map(|g| g.index).max().unwrap_or(0)
    }

    pub fn get(&self, index: usize) -> Option<&Generator> {
        // Schedules are usually 1..=n in order.
        match self.entries.get(index.wrapping_sub(1)) {
            Some(g) if g.index == index => Some(g),
            _ => self.entries.iter().find(|g| g.index == index),
        }
    }

    pub fn generator(&self, index: usize) -> Result<&Generator, ScheduleError> {
        self.get(index).ok_or(ScheduleError::MissingIndex(index))
    }

    pub fn circle<S: Scalar>(&self, index: usize, bits: usize) -> Result<Circle<S>, ScheduleError> {
        let g = self.generator(index)?;
        Ok(Circle::from_rationals(&g.center, &g.radius, bits)?)
    }

    /// Checks disjointness, `r_i <= 1`, positivity and increasing centers,
    /// listing every violation with its witnessing indices.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut seen = BTreeSet::new();
        for g in &self.entries {
            if !seen.insert(g.index) {
                violations.push(Violation::DuplicateIndex { i: g.index });
            }
            if !g.radius.is_positive() {
                violations.push(Violation::NonPositiveRadius { i: g.index });
            } else if g.radius > BigRational::one() {
                violations.push(Violation::RadiusAboveOne { i: g.index });
            }
        }
        let mut by_index: Vec<&Generator> = self.entries.iter().collect();
        by_index.sort_by_key(|g| g.index);
        for w in by_index.windows(2) {
            if w[1].center <= w[0].center {
                violations.push(Violation::CentersNotIncreasing { i: w[0].index, j: w[1].index });
            }
        }
        for (a, ga) in by_index.iter().enumerate() {
            for gb in &by_index[a + 1..] {
                if Signed::abs(&(&ga.center - &gb.center)) <= &ga.radius + &gb.radius {
                    violations.push(Violation::Overlap { i: ga.index, j: gb.index });
                }
            }
        }
        ValidationReport { violations }
    }

    /// `max 1/(|c_i - c_j| - 1)` over distinct pairs in `window`.
    pub fn mu(&self, window: &[usize]) -> Result<BigRational, ScheduleError> {
        if window.len() < 2 {
            return Err(ScheduleError::Window("need at least two indices".into()));
        }
        let mut best: Option<BigRational> = None;
        for (a, &i) in window.iter().enumerate() {
            for &j in &window[a + 1..] {
                if i == j {
                    continue;
                }
                let f = contraction_factor(self, i, j)?;
                if best.as_ref().is_none_or(|b| &f > b) {
                    best = Some(f);
                }
            }
        }
        best.ok_or_else(|| ScheduleError::Window("no distinct pairs".into()))
    }

    pub fn to_json(&self) -> String {
        let doc = ScheduleDoc {
            model: MODEL.to_string(),
            provenance: self.provenance,
            entries: self
                .entries
                .iter()
                .map(|g| EntryDoc {
                    i: g.index,
                    c: Literal::Text(format_rational(&g.center)),
                    r: Literal::Text(format_rational(&g.radius)),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("schedule serializes")
    }

    /// Parses a schedule document, rejecting inadmissible schedules.
    pub fn from_json(text: &str) -> Result<Self, ScheduleError> {
        let doc: ScheduleDoc = serde_json::from_str(text).map_err(|e| ScheduleError::Format(e.to_string()))?;
        if doc.model != MODEL {
            return Err(ScheduleError::Format(format!("unsupported model {:?}", doc.model)));
        }
        let mut entries = Vec::with_capacity(doc.entries.len());
        for e in doc.entries {
            if e.i == 0 {
                return Err(ScheduleError::Format("indices start at 1".into()));
            }
            entries.push(Generator { index: e.i, center: e.c.value()?, radius: e.r.value()? });
        }
        if doc.provenance == Provenance::Standard && entries != GeneratorSchedule::standard(entries.len()).entries {
            return Err(ScheduleError::Format("entries marked \"paper\" differ from the standard schedule".into()));
        }
        let schedule = GeneratorSchedule { entries, provenance: doc.provenance };
        let report = schedule.validate();
        if !report.is_admissible() {
            return Err(ScheduleError::Inadmissible(report));
        }
        Ok(schedule)
    }
}

/// `1/(|c_i - c_j| - 1)`, defined when the centers are more than 1 apart.
pub fn contraction_factor(s: &GeneratorSchedule, i: usize, j: usize) -> Result<BigRational, ScheduleError> {
    let gap = Signed::abs(&(&s.generator(i)?.center - &s.generator(j)?.center)) - BigRational::one();
    if !gap.is_positive() {
        return Err(ScheduleError::CentersTooClose { i, j });
    }
    Ok(gap.recip())
}

const MODEL: &str = "upper-half-plane";

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    model: String,
    provenance: Provenance,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    i: usize,
    c: Literal,
    r: Literal,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Literal {
    Text(String),
    Int(i64),
}

impl Literal {
    fn value(&self) -> Result<BigRational, ScheduleError> {
        match self {
            Literal::Text(s) => parse_rational(s).map_err(|e| ScheduleError::Format(e.to_string())),
            Literal::Int(v) => Ok(BigRational::from_integer(BigInt::from(*v))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn standard_schedule_values() {
        let s = GeneratorSchedule::standard(3);
        let e = s.entries();
        assert_eq!((e[0].center.clone(), e[0].radius.clone()), (q(0, 1), q(1, 4)));
        assert_eq!((e[1].center.clone(), e[1].radius.clone()), (q(65, 1), q(1, 256)));
        assert_eq!((e[2].center.clone(), e[2].radius.clone()), (q(2114, 1), pow2(-18)));
        assert_eq!(s.provenance(), Provenance::Standard);
        assert!(GeneratorSchedule::standard(10).validate().is_admissible());
    }

    #[test]
    fn validation_witnesses() {
        let overlap = GeneratorSchedule::from_entries(
            vec![
                Generator { index: 1, center: q(0, 1), radius: q(1, 1) },
                Generator { index: 2, center: q(1, 1), radius: q(1, 1) },
            ],
            Provenance::User,
        );
        assert_eq!(overlap.validate().violations, vec![Violation::Overlap { i: 1, j: 2 }]);
        let big = GeneratorSchedule::from_entries(
            vec![
                Generator { index: 1, center: q(0, 1), radius: q(2, 1) },
                Generator { index: 2, center: q(100, 1), radius: q(1, 2) },
            ],
            Provenance::User,
        );
        assert_eq!(big.validate().violations, vec![Violation::RadiusAboveOne { i: 1 }]);
        let unordered = GeneratorSchedule::from_entries(
            vec![
                Generator { index: 1, center: q(10, 1), radius: q(1, 2) },
                Generator { index: 2, center: q(0, 1), radius: q(1, 2) },
            ],
            Provenance::User,
        );
        assert_eq!(unordered.validate().violations, vec![Violation::CentersNotIncreasing { i: 1, j: 2 }]);
    }

    #[test]
    fn mu_examples() {
        let s = GeneratorSchedule::standard(3);
        assert_eq!(s.mu(&[1, 2]).unwrap(), q(1, 64));
        assert_eq!(s.mu(&[1, 2, 3]).unwrap(), q(1, 64));
        assert_eq!(s.mu(&[2, 3]).unwrap(), q(1, 2048));
        assert!(s.mu(&[1]).is_err());
        let close = GeneratorSchedule::from_entries(
            vec![
                Generator { index: 1, center: q(0, 1), radius: q(1, 4) },
                Generator { index: 2, center: q(1, 1), radius: q(1, 4) },
            ],
            Provenance::User,
        );
        assert_eq!(close.mu(&[1, 2]).unwrap_err(), ScheduleError::CentersTooClose { i: 1, j: 2 });
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let s = GeneratorSchedule::standard(4);
        let text = s.to_json();
        assert!(text.contains("\"model\": \"upper-half-plane\""));
        assert!(text.contains("\"r\": \"1/256\""));
        assert_eq!(GeneratorSchedule::from_json(&text).unwrap(), s);
        let user = r#"{"model":"upper-half-plane","provenance":"user",
            "entries":[{"i":1,"c":"0","r":"0.25"},{"i":2,"c":10,"r":"1/8"}]}"#;
        let u = GeneratorSchedule::from_json(user).unwrap();
        assert_eq!(u.provenance(), Provenance::User);
        assert_eq!(u.generator(1).unwrap().radius, q(1, 4));
        let bad = r#"{"model":"upper-half-plane","provenance":"user",
            "entries":[{"i":1,"c":"0","r":"1"},{"i":2,"c":"1","r":"1"}]}"#;
        assert!(matches!(GeneratorSchedule::from_json(bad), Err(ScheduleError::Inadmissible(_))));
        let forged = text.replace("\"1/256\"", "\"1/512\"");
        assert!(matches!(GeneratorSchedule::from_json(&forged), Err(ScheduleError::Format(_))));
        assert!(GeneratorSchedule::from_json(r#"{"model":"disk","provenance":"user","entries":[]}"#).is_err());
        assert!(GeneratorSchedule::from_json(
            r#"{"model":"upper-half-plane","provenance":"user","entries":[{"i":1,"c":"x","r":"1"}]}"#
        )
        .is_err());
    }
}
