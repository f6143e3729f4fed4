//! JSON report types for the CLI: a fixed, machine-diffable schema that
//! round-trips losslessly through serde.
//!
//! Top-level schema (key names are stable):
//!
//! ```json
//! {"field": str, "p": int, "i": int,
//!  "verdict": {"kind": "does_not_split" | "splits_certified"
//!              | "no_obstruction_up_to", "level": int},
//!  "obstructions": [{"n": int, "invariants": [int], "route": str}],
//!  "jaulent": {"hypotheses": [bool, bool, bool, bool], "conclusion": bool},
//!  "caveats": [str], "timing_ms": int}
//! ```
//!
//! `jaulent` is `null` when the wild-kernel criterion does not apply (p = 2).

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::criterion::{Analysis, JaulentReport, SplittingVerdict};

/// One analysis run, serialized to the schema above.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub field: String,
    pub p: u64,
    pub i: u64,
    pub verdict: VerdictEntry,
    pub obstructions: Vec<ObstructionEntry>,
    pub jaulent: Option<JaulentEntry>,
    pub caveats: Vec<String>,
    pub timing_ms: u64,
}

/// `kind` is one of `does_not_split` (level = witness level),
/// `splits_certified` (level = certified tower base), or
/// `no_obstruction_up_to` (level = highest level checked).
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct VerdictEntry {
    pub kind: String,
    pub level: u32,
}

/// The twisted-coinvariant obstruction at one level: its invariant factors
/// (empty = trivial) and which formula produced it.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct ObstructionEntry {
    pub n: u32,
    pub invariants: Vec<u64>,
    pub route: String,
}

/// The four wild-kernel hypotheses and their joint conclusion.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct JaulentEntry {
    pub hypotheses: [bool; 4],
    pub conclusion: bool,
}

impl Report {
    /// Assembles a report from an analysis run. Caveats from the analysis
    /// and the wild-kernel check are merged into the single caveat list.
    pub fn build(
        field: &str,
        p: u64,
        i: u64,
        analysis: &Analysis,
        jaulent: Option<&JaulentReport>,
        timing_ms: u64,
    ) -> Report {
        let verdict = match &analysis.verdict {
            SplittingVerdict::DoesNotSplit { witness_level } => VerdictEntry {
                kind: "does_not_split".into(),
                level: *witness_level,
            },
            SplittingVerdict::SplitsCertified { certificate } => VerdictEntry {
                kind: "splits_certified".into(),
                level: certificate.n0,
            },
            SplittingVerdict::NoObstructionUpTo { max_level } => VerdictEntry {
                kind: "no_obstruction_up_to".into(),
                level: *max_level,
            },
        };
        let obstructions = analysis
            .reports
            .iter()
            .map(|r| ObstructionEntry {
                n: r.n,
                invariants: r
                    .group
                    .invariants()
                    .iter()
                    .map(|d| d.to_u64().expect("obstruction invariants fit in u64"))
                    .collect(),
                route: r.route.as_str().to_string(),
            })
            .collect();
        let mut caveats = analysis.caveats.clone();
        if let Some(j) = jaulent {
            for c in &j.caveats {
                if !caveats.contains(c) {
                    caveats.push(c.clone());
                }
            }
        }
        Report {
            field: field.to_string(),
            p,
            i,
            verdict,
            obstructions,
            jaulent: jaulent.map(|j| JaulentEntry {
                hypotheses: j.hypotheses,
                conclusion: j.conclusion,
            }),
            caveats,
            timing_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// The F = Q table report of `analyze-q`: one row per residue class of the
/// twist index mod p − 1.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct QTableReport {
    pub p: u64,
    pub rows: Vec<QTableRow>,
    pub timing_ms: u64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct QTableRow {
    /// representative twist index (1 ≤ i ≤ p − 1); the verdict depends on i
    /// only through i mod p − 1
    pub i: u64,
    pub splits: bool,
    /// the irregular Bernoulli index responsible for a non-split row
    pub irregular_index: Option<u64>,
}

impl QTableReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<QTableReport, serde_json::Error> {
        serde_json::from_str(text)
    }
}
