//! Persistent cache for class-group relation matrices.
//!
//! A class-group computation is dominated by the randomized relation search;
//! the relation matrix it finds is small and replayable. One JSON file per
//! (defining-polynomial SHA-256, p) pair stores that matrix together with
//! the certification state. On reload the factor base is rebuilt
//! deterministically, the presentation is recomputed from the stored
//! relations, the stored invariants are compared, and generator orders are
//! spot-checked where principality testing is certified. Any mismatch or
//! parse failure silently falls back to recomputation — a corrupt cache can
//! cost time, never correctness.

use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classgrp::{class_group_from_relations, ClassGroupConfig, ClassGroupData};
use crate::intlinalg::IntMatrix;
use crate::numfield::{ideal_pow, is_principal, NumberField, PrincipalityOptions};
use crate::poly::ZPoly;

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    format_version: u32,
    poly: String,
    p: u64,
    generators: usize,
    relations: Vec<Vec<String>>,
    certified: bool,
    invariants: Vec<String>,
}

/// File name for the cache entry of a field and focus prime: the SHA-256 of
/// the defining polynomial text, then the prime.
pub fn cache_file_name(poly: &ZPoly, p: Option<u64>) -> String {
    let mut h = Sha256::new();
    h.update(poly.to_string().as_bytes());
    let digest = h.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("{hex}-{}.json", p.unwrap_or(0))
}

fn entry_path(dir: &Path, k: &NumberField, config: &ClassGroupConfig) -> PathBuf {
    dir.join(cache_file_name(k.poly(), config.p_focus))
}

/// Loads, replays, and re-verifies a cached class group; `None` on any miss,
/// mismatch, or verification failure.
pub fn load_class_group(
    dir: &Path,
    k: &NumberField,
    config: &ClassGroupConfig,
) -> Option<ClassGroupData> {
    let path = entry_path(dir, k, config);
    let text = fs::read_to_string(&path).ok()?;
    let entry: CacheEntry = serde_json::from_str(&text).ok()?;
    if entry.format_version != FORMAT_VERSION
        || entry.poly != k.poly().to_string()
        || entry.p != config.p_focus.unwrap_or(0)
    {
        return None;
    }
    let mut rows = Vec::with_capacity(entry.relations.len());
    for r in &entry.relations {
        if r.len() != entry.generators {
            return None;
        }
        let mut row = Vec::with_capacity(r.len());
        for c in r {
            row.push(c.parse::<BigInt>().ok()?);
        }
        rows.push(row);
    }
    let rel = if rows.is_empty() {
        IntMatrix::zero(0, entry.generators)
    } else {
        IntMatrix::from_rows(rows)
    };
    let cl = class_group_from_relations(k, config, rel, entry.certified).ok()?;
    let stored: Option<Vec<BigInt>> =
        entry.invariants.iter().map(|s| s.parse::<BigInt>().ok()).collect();
    if stored.as_deref() != Some(cl.structure.invariants()) {
        return None;
    }
    if !spot_check_orders(k, &cl) {
        return None;
    }
    Some(cl)
}

/// Re-verifies claimed generator orders where an exact principality test is
/// available and cheap: in finite-unit fields (Q, imaginary quadratic),
/// `P^order(P)` must be exhibited principal for the first few generators
/// with nontrivial class. Elsewhere the structural checks of the replay path
/// (factor-base shape, invariant match) are the whole verification.
fn spot_check_orders(k: &NumberField, cl: &ClassGroupData) -> bool {
    let finite_units =
        k.degree() == 1 || (k.degree() == 2 && k.discriminant() < &BigInt::from(0));
    if !finite_units {
        return true;
    }
    let opts = PrincipalityOptions::default();
    let mut checked = 0usize;
    for (j, img) in cl.gen_images.iter().enumerate() {
        if checked >= 2 {
            break;
        }
        if cl.structure.is_zero_el(img) {
            continue;
        }
        let Some(d) = cl.structure.element_order(img).to_u32() else {
            return false;
        };
        if d > 60 {
            continue; // too expensive to re-verify; rely on structural checks
        }
        let Ok(power) = ideal_pow(k, &cl.generators[j].ideal, d) else {
            return false;
        };
        match is_principal(k, &power, &opts) {
            Ok(res) if res.generator.is_some() => checked += 1,
            _ => return false,
        }
    }
    true
}

/// Persists a computed class group. Write errors are ignored (the cache is
/// an optimization); the file is staged beside its target and renamed so
/// readers never observe a partial entry.
pub fn store_class_group(
    dir: &Path,
    k: &NumberField,
    config: &ClassGroupConfig,
    cl: &ClassGroupData,
) {
    let entry = CacheEntry {
        format_version: FORMAT_VERSION,
        poly: k.poly().to_string(),
        p: config.p_focus.unwrap_or(0),
        generators: cl.generators.len(),
        relations: (0..cl.relations.rows())
            .map(|r| {
                (0..cl.relations.cols())
                    .map(|c| cl.relations.get(r, c).to_string())
                    .collect()
            })
            .collect(),
        certified: cl.certified,
        invariants: cl.structure.invariants().iter().map(|d| d.to_string()).collect(),
    };
    let Ok(text) = serde_json::to_string_pretty(&entry) else {
        return;
    };
    if fs::create_dir_all(dir).is_err() {
        return;
    }
    let path = entry_path(dir, k, config);
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    if fs::write(&tmp, text).is_ok() {
        let _ = fs::rename(&tmp, &path);
    }
}
