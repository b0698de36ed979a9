//! Append-only JSON-lines catalog of verified polynomials.

use std::collections::HashSet;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::construct::{canonicalize, ExponentTriple};
use crate::verify::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "theorem31")]
    Theorem31,
    #[serde(rename = "table1")]
    Table1,
    #[serde(rename = "table2-fraction")]
    Table2Fraction,
    #[serde(rename = "manual")]
    Manual,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Theorem31 => "theorem31",
            Source::Table1 => "table1",
            Source::Table2Fraction => "table2-fraction",
            Source::Manual => "manual",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Source::Theorem31,
            Source::Table1,
            Source::Table2Fraction,
            Source::Manual,
        ]
        .into_iter()
        .find(|src| src.as_str() == s.trim())
        .ok_or_else(|| format!("unknown source {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub m: u32,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<i64>,
    pub d1: u64,
    pub d2: u64,
    pub d3: u64,
    pub canonical: Vec<u64>,
    pub source: Source,
    pub verified_by: Vec<Method>,
    pub is_permutation: bool,
    pub timestamp: String,
}

pub fn now_timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl CatalogRecord {
    pub fn new(
        m: u32,
        exponents: [u64; 3],
        source: Source,
        verified_by: Vec<Method>,
        is_permutation: bool,
    ) -> CatalogRecord {
        let [d1, d2, d3] = exponents;
        CatalogRecord {
            m,
            n: 2 * m,
            i: None,
            j: None,
            u: None,
            d1,
            d2,
            d3,
            canonical: canonicalize(&exponents, 2 * m),
            source,
            verified_by,
            is_permutation,
            timestamp: now_timestamp(),
        }
    }

    pub fn from_triple(
        triple: &ExponentTriple,
        verified_by: Vec<Method>,
        is_permutation: bool,
    ) -> CatalogRecord {
        let p = triple.params;
        CatalogRecord {
            i: Some(p.i),
            j: Some(p.j),
            u: Some(p.u),
            ..CatalogRecord::new(
                p.m,
                triple.normalized,
                Source::Theorem31,
                verified_by,
                is_permutation,
            )
        }
    }

    pub fn exponents(&self) -> [u64; 3] {
        [self.d1, self.d2, self.d3]
    }

    /// Schema invariants beyond what deserialization enforces.
    pub fn is_valid(&self) -> bool {
        self.n == 2 * self.m
            && (1..=crate::field::MAX_HALF_DEGREE).contains(&self.m)
            && !self.verified_by.is_empty()
            && self.canonical == canonicalize(&self.exponents(), self.n)
    }
}

/// Appends one JSON object per line, creating the file if needed.
pub fn append_records(path: &Path, records: &[CatalogRecord]) -> io::Result<()> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = BufWriter::new(file);
    for rec in records {
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CatalogContents {
    pub records: Vec<CatalogRecord>,
    /// Lines that failed to parse or violate the schema.
    pub malformed: usize,
}

pub fn read_catalog(path: &Path) -> io::Result<CatalogContents> {
    let mut out = CatalogContents::default();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CatalogRecord>(&line) {
            Ok(rec) if rec.is_valid() => out.records.push(rec),
            _ => out.malformed += 1,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CatalogFilter {
    pub m: Option<u32>,
    pub source: Option<Source>,
    pub canonical: Option<Vec<u64>>,
    /// Keep only the first record per `(n, canonical)`.
    pub dedup: bool,
}

impl CatalogFilter {
    pub fn matches(&self, rec: &CatalogRecord) -> bool {
        self.m.is_none_or(|m| rec.m == m)
            && self.source.is_none_or(|s| rec.source == s)
            && self.canonical.as_ref().is_none_or(|c| {
                let mut c = c.clone();
                c.sort_unstable();
                rec.canonical == canonicalize(&c, rec.n)
            })
    }

    pub fn apply<'a, I>(&self, records: I) -> Vec<CatalogRecord>
    where
        I: IntoIterator<Item = &'a CatalogRecord>,
    {
        let mut seen = HashSet::new();
        records
            .into_iter()
            .filter(|r| self.matches(r))
            .filter(|r| !self.dedup || seen.insert((r.n, r.canonical.clone())))
            .cloned()
            .collect()
    }
}

/// Reads every file in order and applies `filter` to the concatenation.
pub fn query(paths: &[&Path], filter: &CatalogFilter) -> io::Result<CatalogContents> {
    let mut all = CatalogContents::default();
    for path in paths {
        let c = read_catalog(path)?;
        all.records.extend(c.records);
        all.malformed += c.malformed;
    }
    Ok(CatalogContents {
        records: filter.apply(&all.records),
        malformed: all.malformed,
    })
}
