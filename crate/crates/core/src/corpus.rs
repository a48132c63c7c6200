//! Built-in example functions with known values, stored as data files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::funcmodel::{parse_function, FunctionSpec};

const SOURCES: [(&str, &str); 9] = [
    ("neg_abs", include_str!("../corpus/neg_abs.fn")),
    ("sqrt_abs", include_str!("../corpus/sqrt_abs.fn")),
    ("countable_zeros", include_str!("../corpus/countable_zeros.fn")),
    ("step_up", include_str!("../corpus/step_up.fn")),
    ("countable_zeros_inf", include_str!("../corpus/countable_zeros_inf.fn")),
    ("neg_sqrt_halfplane", include_str!("../corpus/neg_sqrt_halfplane.fn")),
    ("abs", include_str!("../corpus/abs.fn")),
    ("square", include_str!("../corpus/square.fn")),
    ("indicator", include_str!("../corpus/indicator.fn")),
];

const GROUND_TRUTHS: &str = include_str!("../corpus/ground_truths.csv");
const CASES: &str = include_str!("../corpus/cases.csv");

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    /// Stated for the example in the literature; checked, not recomputed.
    Known,
    /// Recomputed by an oracle in the test suite before use.
    Derived,
    /// Textbook value.
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// A subderivative kind name, or one of `value`, `drop_limsup_radial_lower`,
    /// `ball_limsup_radial_lower`, `radially_accessible`, `subgradient_count`,
    /// `support_mr`, `radial_witness`, `density_witness`. Boolean quantities
    /// use 0 and 1.
    pub quantity: String,
    pub point: Vec<f64>,
    /// Empty when the quantity takes no direction.
    pub direction: Vec<f64>,
    pub expected: ExtReal,
    pub tag: Tag,
    pub anchor: String,
}

/// A designated (point, direction) pair used by the check suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub source: String,
    pub spec: FunctionSpec,
    pub ground_truths: Vec<GroundTruth>,
    pub cases: Vec<Case>,
}

impl CorpusEntry {
    /// Distinct anchors of the ground truths, in file order.
    pub fn citations(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for g in &self.ground_truths {
            if !out.contains(&g.anchor) {
                out.push(g.anchor.clone());
            }
        }
        out
    }

    pub fn truth(&self, quantity: &str, point: &[f64], direction: &[f64]) -> Option<&GroundTruth> {
        self.ground_truths
            .iter()
            .find(|g| g.quantity == quantity && g.point == point && g.direction == direction)
    }
}

pub fn corpus_ids() -> Vec<&'static str> {
    SOURCES.iter().map(|(id, _)| *id).collect()
}

fn vector(field: &str) -> Result<Vec<f64>> {
    field
        .split_whitespace()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad coordinate '{}' in corpus data", s)))
        })
        .collect()
}

/// Splits a data file into rows, checking the header.
fn rows<'a>(text: &'a str, header: &str) -> Result<Vec<Vec<&'a str>>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next() != Some(header) {
        return Err(Error::InvalidParameter(format!("corpus data header is not '{}'", header)));
    }
    let width = header.split(',').count();
    lines
        .map(|l| {
            let r: Vec<&str> = l.split(',').map(str::trim).collect();
            if r.len() == width {
                Ok(r)
            } else {
                Err(Error::InvalidParameter(format!("corpus row '{}' has {} fields", l, r.len())))
            }
        })
        .collect()
}

fn parse_tag(s: &str) -> Result<Tag> {
    match s {
        "known" => Ok(Tag::Known),
        "derived" => Ok(Tag::Derived),
        "trivial" => Ok(Tag::Trivial),
        _ => Err(Error::InvalidParameter(format!("unknown ground truth tag '{}'", s))),
    }
}

fn try_load() -> Result<Vec<CorpusEntry>> {
    let mut entries: Vec<CorpusEntry> = SOURCES
        .iter()
        .map(|(id, src)| {
            Ok(CorpusEntry {
                id: id.to_string(),
                source: src.to_string(),
                spec: parse_function(src)?,
                ground_truths: Vec::new(),
                cases: Vec::new(),
            })
        })
        .collect::<Result<_>>()?;
    let index = |entries: &[CorpusEntry], id: &str| {
        entries
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| Error::InvalidParameter(format!("corpus data names unknown entry '{}'", id)))
    };
    for r in rows(GROUND_TRUTHS, "id,quantity,point,direction,expected,tag,anchor")? {
        let i = index(&entries, r[0])?;
        entries[i].ground_truths.push(GroundTruth {
            quantity: r[1].to_string(),
            point: vector(r[2])?,
            direction: vector(r[3])?,
            expected: r[4]
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad expected value '{}'", r[4])))?,
            tag: parse_tag(r[5])?,
            anchor: r[6].to_string(),
        });
    }
    for r in rows(CASES, "id,point,direction")? {
        let i = index(&entries, r[0])?;
        entries[i].cases.push(Case {
            point: vector(r[1])?,
            direction: vector(r[2])?,
        });
    }
    Ok(entries)
}

/// All built-in entries. The data ships with the crate and is validated by
/// the test suite, so a failure here is a packaging bug.
pub fn load_corpus() -> Vec<CorpusEntry> {
    try_load().expect("built-in corpus data is malformed")
}

pub fn corpus_entry(id: &str) -> Option<CorpusEntry> {
    load_corpus().into_iter().find(|e| e.id == id)
}
