//! Integer linear algebra in action: Smith normal form, group
//! presentations, and twisted coinvariants of a small Galois module.
//!
//! Run with: cargo run --example snf_and_coinvariants

use std::collections::BTreeMap;

use num_bigint::BigInt;

use kloc::intlinalg::{
    group_from_relations, snf, twisted_coinvariants, FiniteAbelianGroup, GaloisModule, IntMatrix,
};

fn main() {
    // Smith normal form: U * M * V = D with unimodular U, V
    let m = IntMatrix::from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]);
    let (u, d, v) = snf(&m);
    println!("M = {m:?}");
    println!("SNF diagonal: {:?}", (0..3).map(|j| d.get(j, j)).collect::<Vec<_>>());
    assert_eq!(u.mul(&m).mul(&v), d);

    // the same matrix read as relations among three generators presents a
    // finite abelian group with those invariant factors
    let pres = group_from_relations(3, &m).unwrap();
    println!(
        "Z^3 / rows(M) has invariants {:?} and order {}",
        pres.group.invariants(),
        pres.group.order()
    );

    // a Galois module: A = Z/9 x Z/3 with an actor of order 2 that inverts
    // the first coordinate, and character value kappa = 2
    let group = FiniteAbelianGroup::new(vec![BigInt::from(3), BigInt::from(9)]);
    let sigma = IntMatrix::from_i64(&[&[1, 0], &[0, 8]]);
    let mut character = BTreeMap::new();
    character.insert("sigma".to_string(), BigInt::from(2));
    let module = GaloisModule::new(group, vec![("sigma".into(), sigma)], Some(character));

    // (A (x) mu_{3^n}^{(x)i})_Gamma for n = 1, 2
    for n in [1u32, 2] {
        let co = twisted_coinvariants(&module, 3, n).unwrap();
        println!(
            "twisted coinvariants at level n = {n}: invariants {:?}",
            co.invariants()
        );
    }
}
