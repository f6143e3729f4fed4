//! The F = Q fast path: Bernoulli numbers mod p, irregular primes, and the
//! split/non-split table over the twist index.
//!
//! Run with: cargo run --example rational_table

use kloc::rationals::{irregular_indices, responsible_index, splits_q};

fn main() {
    // regular primes: every row of the table splits
    for p in [3u64, 5, 7, 11, 13, 31] {
        let all = (1..p).all(|i| splits_q(p, i).unwrap());
        println!("p = {p:>3}: irregular indices {:?} -> all split: {all}", irregular_indices(p));
    }

    // 37 is the smallest irregular prime (37 | B_32); exactly one residue
    // class of the twist index fails to split
    println!();
    for p in [37u64, 59, 67, 691] {
        let non_split: Vec<u64> = (1..p).filter(|&i| !splits_q(p, i).unwrap()).collect();
        println!("p = {p:>3}: irregular indices {:?}", irregular_indices(p));
        for &i in &non_split {
            println!(
                "         non-split at i ≡ {i} mod {}, responsible index B_{}",
                p - 1,
                responsible_index(p, i).unwrap()
            );
        }
    }
}
