//! Deciding whether the localization sequence for K_{2i}(F) splits at p,
//! with the machine-readable report the CLI emits.
//!
//! Run with: cargo run --example splitting_analysis

use kloc::criterion::{analyze_splitting, CriterionConfig, SplittingVerdict};
use kloc::numfield::new_field;
use kloc::poly::parse_poly;
use kloc::report::Report;

fn main() {
    let cfg = CriterionConfig::default();

    // over Q every analysis below certifies splitting through the
    // cyclotomic tower (regular primes)
    let q = new_field(&parse_poly("x").unwrap()).unwrap();
    for (p, i) in [(3u64, 1u64), (5, 2), (7, 4)] {
        let a = analyze_splitting(&q, p, i, 2, &cfg).unwrap();
        match &a.verdict {
            SplittingVerdict::SplitsCertified { certificate } => println!(
                "Q, p={p}, i={i}: splits (tower certified at level {}, layer degree {})",
                certificate.n0, certificate.layer_degree
            ),
            other => println!("Q, p={p}, i={i}: {other:?}"),
        }
    }

    // Q(i) at p = 2: the field is nonexceptional, so the p = 2 theory
    // applies; level-1 analysis finds no obstruction
    let gauss = new_field(&parse_poly("x^2+1").unwrap()).unwrap();
    let a = analyze_splitting(&gauss, 2, 1, 1, &cfg).unwrap();
    println!("\nQ(i), p=2, i=1: verdict {:?}", a.verdict);
    for rep in &a.reports {
        println!(
            "  level {}: obstruction invariants {:?} via {}",
            rep.n,
            rep.group.invariants(),
            rep.route.as_str()
        );
    }

    // the same analysis as the JSON report of the command-line tool
    let report = Report::build("x^2+1", 2, 1, &a, None, 0);
    println!("\nCLI report:\n{}", report.to_json());
}
