//! Behavior of the persistent class-group cache: round trips, tamper
//! detection, and silent fallback to recomputation.

use num_bigint::BigInt;

use kloc::cache::{cache_file_name, load_class_group, store_class_group};
use kloc::classgrp::{class_group, ClassGroupConfig};
use kloc::numfield::{new_field, NumberField};
use kloc::poly::parse_poly;

fn field(s: &str) -> NumberField {
    new_field(&parse_poly(s).unwrap()).unwrap()
}

#[test]
fn file_names_depend_on_polynomial_and_prime() {
    let f = field("x^2+47");
    let g = field("x^2+23");
    assert_ne!(cache_file_name(f.poly(), None), cache_file_name(g.poly(), None));
    assert_ne!(
        cache_file_name(f.poly(), None),
        cache_file_name(f.poly(), Some(3))
    );
    assert_eq!(cache_file_name(f.poly(), None), cache_file_name(f.poly(), None));
}

#[test]
fn round_trip_restores_the_same_group() {
    let dir = tempfile::tempdir().unwrap();
    let k = field("x^2+47"); // class number 5
    let mut cfg = ClassGroupConfig::default();
    cfg.cache_dir = Some(dir.path().to_path_buf());

    let cl = class_group(&k, &cfg).unwrap();
    assert_eq!(cl.structure.invariants(), [BigInt::from(5)]);
    assert!(cl.certified);

    let path = dir.path().join(cache_file_name(k.poly(), None));
    assert!(path.exists(), "cache entry was not written");

    let reloaded = load_class_group(dir.path(), &k, &cfg).expect("cache entry should replay");
    assert_eq!(reloaded.structure.invariants(), cl.structure.invariants());
    assert_eq!(reloaded.certified, cl.certified);

    // a second full call must also succeed through the cache path
    let again = class_group(&k, &cfg).unwrap();
    assert_eq!(again.structure.invariants(), cl.structure.invariants());
}

#[test]
fn corrupt_entries_fall_back_to_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let k = field("x^2+23"); // class number 3
    let mut cfg = ClassGroupConfig::default();
    cfg.cache_dir = Some(dir.path().to_path_buf());

    let path = dir.path().join(cache_file_name(k.poly(), None));
    std::fs::write(&path, "this is not json").unwrap();
    assert!(load_class_group(dir.path(), &k, &cfg).is_none());

    // the full call recomputes and repairs the entry
    let cl = class_group(&k, &cfg).unwrap();
    assert_eq!(cl.structure.invariants(), [BigInt::from(3)]);
    assert!(load_class_group(dir.path(), &k, &cfg).is_some());
}

#[test]
fn tampered_invariants_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let k = field("x^2+47");
    let mut cfg = ClassGroupConfig::default();
    cfg.cache_dir = Some(dir.path().to_path_buf());
    let cl = class_group(&k, &cfg).unwrap();
    store_class_group(dir.path(), &k, &cfg, &cl);

    let path = dir.path().join(cache_file_name(k.poly(), None));
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["invariants"] = serde_json::json!(["7"]);
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();

    assert!(
        load_class_group(dir.path(), &k, &cfg).is_none(),
        "entry with forged invariants must not replay"
    );
}

#[test]
fn entries_are_keyed_by_focus_prime() {
    let dir = tempfile::tempdir().unwrap();
    let k = field("x^2+23");
    let mut plain = ClassGroupConfig::default();
    plain.cache_dir = Some(dir.path().to_path_buf());
    let mut focused = plain.clone();
    focused.p_focus = Some(3);

    class_group(&k, &plain).unwrap();
    assert!(load_class_group(dir.path(), &k, &plain).is_some());
    // the focused variant uses a different factor base, hence its own entry
    assert!(load_class_group(dir.path(), &k, &focused).is_none());
    class_group(&k, &focused).unwrap();
    assert!(load_class_group(dir.path(), &k, &focused).is_some());
}
