//! Claim records: ingestion, validation, and slicing.
//!
//! The canonical claim file is UTF-8 JSON Lines, one object per line with
//! fields `id`, `claim`, `entities`, `label`, `types`, `split`. An optional
//! `evidence` field (gold subgraphs shipped with some corpora) is carried
//! through untouched, and an optional `version` field is reserved for
//! schema evolution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The five claim reasoning types, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimType {
    OneHop,
    Conjunction,
    Existence,
    MultiHop,
    Negation,
}

impl ClaimType {
    pub const ALL: [ClaimType; 5] = [
        ClaimType::OneHop,
        ClaimType::Conjunction,
        ClaimType::Existence,
        ClaimType::MultiHop,
        ClaimType::Negation,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ClaimType::OneHop => "one-hop",
            ClaimType::Conjunction => "conjunction",
            ClaimType::Existence => "existence",
            ClaimType::MultiHop => "multi-hop",
            ClaimType::Negation => "negation",
        }
    }

    /// Column header used in human-readable reports.
    pub fn column_name(self) -> &'static str {
        match self {
            ClaimType::OneHop => "One-hop",
            ClaimType::Conjunction => "Conjunction",
            ClaimType::Existence => "Existence",
            ClaimType::MultiHop => "Multi-hop",
            ClaimType::Negation => "Negation",
        }
    }
}

impl fmt::Display for ClaimType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ClaimType {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClaimType::ALL
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| DatasetError::UnknownTypeTag {
                tag: s.to_string(),
                line: None,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn tag(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Split {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| DatasetError::UnknownSplit {
                value: s.to_string(),
                line: None,
            })
    }
}

/// One claim with its gold label and retrieval seed entities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub id: String,
    pub claim: String,
    /// KG node identifiers present in the claim, in dataset order.
    pub entities: Vec<String>,
    /// True when the claim is supported by the graph.
    pub label: bool,
    pub types: BTreeSet<ClaimType>,
    pub split: Split,
    /// Gold evidence shipped with some corpora; accepted but unused here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<serde_json::Value>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: malformed claim record ({reason})")]
    MalformedRecord { line: usize, reason: String },
    #[error("unknown claim type tag {tag:?}{}", fmt_line(.line))]
    UnknownTypeTag { tag: String, line: Option<usize> },
    #[error("unknown split {value:?}{}", fmt_line(.line))]
    UnknownSplit { value: String, line: Option<usize> },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn fmt_line(line: &Option<usize>) -> String {
    match line {
        Some(n) => format!(" on line {n}"),
        None => String::new(),
    }
}

#[derive(Deserialize)]
struct RawClaim {
    id: String,
    claim: String,
    entities: Vec<String>,
    label: bool,
    types: Vec<String>,
    split: String,
    #[serde(default)]
    evidence: Option<serde_json::Value>,
    #[serde(default)]
    #[allow(dead_code)]
    version: Option<u32>,
}

/// Parse a JSON Lines claim file, validating each record.
pub fn load_claims<R: BufRead>(source: R) -> Result<Vec<ClaimRecord>, DatasetError> {
    let mut records = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let raw: RawClaim =
            serde_json::from_str(&line).map_err(|e| DatasetError::MalformedRecord {
                line: line_no,
                reason: e.to_string(),
            })?;
        if raw.entities.is_empty() {
            return Err(DatasetError::MalformedRecord {
                line: line_no,
                reason: "empty entity list".into(),
            });
        }
        if raw.types.is_empty() {
            return Err(DatasetError::MalformedRecord {
                line: line_no,
                reason: "empty type list".into(),
            });
        }
        let mut types = BTreeSet::new();
        for tag in &raw.types {
            let parsed = tag
                .parse::<ClaimType>()
                .map_err(|_| DatasetError::UnknownTypeTag {
                    tag: tag.clone(),
                    line: Some(line_no),
                })?;
            types.insert(parsed);
        }
        let split = raw
            .split
            .parse::<Split>()
            .map_err(|_| DatasetError::UnknownSplit {
                value: raw.split.clone(),
                line: Some(line_no),
            })?;
        records.push(ClaimRecord {
            id: raw.id,
            claim: raw.claim,
            entities: raw.entities,
            label: raw.label,
            types,
            split,
            evidence: raw.evidence,
        });
    }
    Ok(records)
}

/// Write claims back out as JSON Lines.
pub fn write_claims<W: Write>(claims: &[ClaimRecord], sink: &mut W) -> io::Result<usize> {
    for claim in claims {
        serde_json::to_writer(&mut *sink, claim)?;
        sink.write_all(b"\n")?;
    }
    Ok(claims.len())
}

/// Exact record counts per split; every split tag is present in the map.
pub fn split_counts(claims: &[ClaimRecord]) -> BTreeMap<Split, usize> {
    let mut counts: BTreeMap<Split, usize> = Split::ALL.into_iter().map(|s| (s, 0)).collect();
    for claim in claims {
        *counts.get_mut(&claim.split).unwrap() += 1;
    }
    counts
}

/// Records carrying `tag`, input order preserved. A record with several
/// tags appears in every matching filter.
pub fn filter_by_type(claims: &[ClaimRecord], tag: ClaimType) -> Vec<&ClaimRecord> {
    claims.iter().filter(|c| c.types.contains(&tag)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record_line(id: &str, types: &str, split: &str) -> String {
        format!(
            r#"{{"id":"{id}","claim":"c{id}","entities":["E{id}"],"label":true,"types":[{types}],"split":"{split}"}}"#
        )
    }

    #[test]
    fn loads_valid_records_in_order() {
        let lines: Vec<String> = (0..10)
            .map(|i| record_line(&i.to_string(), "\"one-hop\"", "train"))
            .collect();
        let claims = load_claims(lines.join("\n").as_bytes()).unwrap();
        assert_eq!(claims.len(), 10);
        let ids: Vec<&str> = claims.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(
            ids,
            (0..10)
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>()
        );
        assert!(claims[0].types.contains(&ClaimType::OneHop));
        assert!(claims[0].label);
    }

    #[test]
    fn rejects_unknown_type_tag() {
        let line = record_line("1", "\"nonsense\"", "train");
        match load_claims(line.as_bytes()) {
            Err(DatasetError::UnknownTypeTag { tag, line }) => {
                assert_eq!(tag, "nonsense");
                assert_eq!(line, Some(1));
            }
            other => panic!("expected UnknownTypeTag, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_split() {
        let line = record_line("1", "\"negation\"", "dev");
        match load_claims(line.as_bytes()) {
            Err(DatasetError::UnknownSplit { value, line }) => {
                assert_eq!(value, "dev");
                assert_eq!(line, Some(1));
            }
            other => panic!("expected UnknownSplit, got {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_records() {
        for bad in [
            "not json",
            r#"{"id":"1","claim":"x","entities":[],"label":true,"types":["one-hop"],"split":"train"}"#,
            r#"{"id":"1","claim":"x","entities":["E"],"label":true,"types":[],"split":"train"}"#,
            r#"{"id":"1","claim":"x","entities":["E"],"label":"yes","types":["one-hop"],"split":"train"}"#,
        ] {
            assert!(
                matches!(
                    load_claims(bad.as_bytes()),
                    Err(DatasetError::MalformedRecord { line: 1, .. })
                ),
                "input {bad:?}"
            );
        }
    }

    #[test]
    fn split_counts_are_exact_and_order_independent() {
        let mut lines = Vec::new();
        for i in 0..8 {
            lines.push(record_line(&format!("t{i}"), "\"one-hop\"", "train"));
        }
        lines.push(record_line("v", "\"one-hop\"", "validation"));
        lines.push(record_line("s", "\"one-hop\"", "test"));
        let claims = load_claims(lines.join("\n").as_bytes()).unwrap();
        let counts = split_counts(&claims);
        assert_eq!(counts[&Split::Train], 8);
        assert_eq!(counts[&Split::Validation], 1);
        assert_eq!(counts[&Split::Test], 1);

        let mut reversed = claims.clone();
        reversed.reverse();
        assert_eq!(split_counts(&reversed), counts);

        let empty = split_counts(&[]);
        assert!(Split::ALL.iter().all(|s| empty[s] == 0));
    }

    #[test]
    fn filter_by_type_honors_multi_tag_membership() {
        let lines = [
            record_line("a", "\"multi-hop\",\"negation\"", "train"),
            record_line("b", "\"one-hop\"", "train"),
            record_line("c", "\"negation\"", "train"),
        ];
        let claims = load_claims(lines.join("\n").as_bytes()).unwrap();

        let multi = filter_by_type(&claims, ClaimType::MultiHop);
        let neg = filter_by_type(&claims, ClaimType::Negation);
        assert_eq!(
            multi.iter().map(|c| c.id.as_str()).collect::<Vec<_>>(),
            ["a"]
        );
        assert_eq!(
            neg.iter().map(|c| c.id.as_str()).collect::<Vec<_>>(),
            ["a", "c"]
        );
        assert!(filter_by_type(&claims, ClaimType::Existence).is_empty());

        // Union over the five filters covers every record at least once.
        let covered: std::collections::HashSet<&str> = ClaimType::ALL
            .into_iter()
            .flat_map(|t| filter_by_type(&claims, t))
            .map(|c| c.id.as_str())
            .collect();
        assert_eq!(covered.len(), claims.len());
    }

    #[test]
    fn round_trip_is_identity_on_records() {
        let lines = [
            record_line("a", "\"multi-hop\",\"negation\"", "train"),
            r#"{"id":"b","claim":"with evidence","entities":["X","Y"],"label":false,"types":["existence"],"split":"test","evidence":[["X","rel","Y"]]}"#.to_string(),
        ];
        let claims = load_claims(lines.join("\n").as_bytes()).unwrap();
        let mut buf = Vec::new();
        let written = write_claims(&claims, &mut buf).unwrap();
        assert_eq!(written, claims.len());
        let reloaded = load_claims(&buf[..]).unwrap();
        assert_eq!(reloaded, claims);
    }

    #[test]
    fn unknown_split_error_reports_line_number() {
        let input = format!("\n{}", record_line("1", "\"negation\"", "dev"));
        match load_claims(input.as_bytes()) {
            Err(DatasetError::UnknownSplit { line, .. }) => assert_eq!(line, Some(2)),
            other => panic!("expected UnknownSplit, got {other:?}"),
        }
    }
}
