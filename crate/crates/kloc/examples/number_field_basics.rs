//! Number-field arithmetic: integral bases, discriminants, norms, and how
//! rational primes factor into prime ideals.
//!
//! Run with: cargo run --example number_field_basics

use num_bigint::BigInt;

use kloc::numfield::{factor_rational_prime, new_field};
use kloc::poly::parse_poly;

fn main() {
    // Q(cbrt 2): the classic example with a nontrivial index at 2... almost:
    // here Z[theta] is already maximal, disc = -108
    let f = new_field(&parse_poly("x^3-2").unwrap()).unwrap();
    println!("field: Q[x]/(x^3 - 2)");
    println!("  degree       {}", f.degree());
    println!("  discriminant {}", f.discriminant());
    println!("  signature    {:?}", f.signature());

    // norms are computed exactly through resultants
    let theta = f.theta_coords();
    let one = f.one_coords();
    let a = f.el_add(&theta, &one); // 1 + cbrt(2)
    println!("  N(1 + theta) = {}", f.el_norm(&a));
    assert_eq!(f.el_norm(&a), BigInt::from(3));

    // factorization patterns of small primes: (e, f) pairs per prime ideal
    for q in [2u64, 3, 5, 7, 11, 31] {
        let factors = factor_rational_prime(&f, q).unwrap();
        let pattern: Vec<(u32, u32)> = factors.iter().map(|p| (p.e, p.f)).collect();
        println!("  {q} factors with (e, f) = {pattern:?}");
        let total: usize = pattern.iter().map(|&(e, ff)| (e * ff) as usize).sum();
        assert_eq!(total, f.degree());
    }

    // a field with an index divisor: disc(x^2 - x + 39) = -155... take the
    // standard example x^2+3 where Z[theta] has index 2 in the maximal order
    let g = new_field(&parse_poly("x^2+3").unwrap()).unwrap();
    println!("\nfield: Q[x]/(x^2 + 3) = Q(sqrt -3)");
    println!("  field discriminant {}   (poly discriminant -12)", g.discriminant());
    println!("  index of Z[theta]  {}", g.index());
    assert_eq!(g.discriminant(), &BigInt::from(-3));
}
