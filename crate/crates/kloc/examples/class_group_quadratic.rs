//! Class groups of imaginary quadratic fields, with certified structure,
//! discrete logarithms, and S-class quotients.
//!
//! Run with: cargo run --example class_group_quadratic

use kloc::classgrp::{class_group, s_quotient, ClassGroupConfig};
use kloc::numfield::{factor_rational_prime, new_field};
use kloc::poly::parse_poly;

fn main() {
    let cfg = ClassGroupConfig::default();

    for (poly, label) in [
        ("x^2+5", "Q(sqrt -5)"),
        ("x^2+23", "Q(sqrt -23)"),
        ("x^2+47", "Q(sqrt -47)"),
        ("x^2-x+58", "Q(sqrt -231)"),
    ] {
        let k = new_field(&parse_poly(poly).unwrap()).unwrap();
        let cl = class_group(&k, &cfg).unwrap();
        println!(
            "{label:14} disc {:>6}  Cl = {:?}  (certified: {})",
            k.discriminant(),
            cl.structure.invariants(),
            cl.certified
        );
    }

    // discrete logarithms: the class of a prime ideal above 2 in Q(sqrt -23)
    let k = new_field(&parse_poly("x^2+23").unwrap()).unwrap();
    let cl = class_group(&k, &ClassGroupConfig::default()).unwrap();
    let above2 = factor_rational_prime(&k, 2).unwrap();
    for p in &above2 {
        let log = cl.discrete_log(&k, &p.ideal).unwrap();
        println!("class of a prime above 2 in Q(sqrt -23): {log:?} in {:?}", cl.structure.invariants());
    }

    // S-class group: quotient of the class group by the classes of the
    // primes above 23 (the ramified prime of this field)
    let sq = s_quotient(&k, &cl, 23).unwrap();
    println!(
        "Cl^S for S = primes above 23: {:?}",
        sq.structure.invariants()
    );
}
