//! Building the layers F_{i,n}: the fixed field of ker(chi^i) inside
//! F(mu_{p^n}), together with its Galois group and character.
//!
//! Run with: cargo run --example cyclotomic_layers

use kloc::cyclolayer::{build_layer, layer_s_primes, residue_extension_degree};
use kloc::numfield::new_field;
use kloc::poly::parse_poly;

fn main() {
    let q = new_field(&parse_poly("x").unwrap()).unwrap();

    // over Q the layers are the subfields of Q(mu_{p^n}) cut out by chi^i
    for (p, n, i) in [(5u64, 1u32, 1u64), (5, 1, 2), (3, 1, 2), (7, 1, 3), (3, 2, 1)] {
        let layer = build_layer(&q, p, n, i).unwrap();
        println!(
            "Q-layer (p={p}, n={n}, i={i}): degree {:2}, disc {}",
            layer.degree,
            layer.layer_field.discriminant()
        );
        // kappa = chi^i is injective on Gamma by construction
        let kappas: Vec<u64> = layer.gamma.iter().map(|(_, k)| *k).collect();
        println!("  kappa values on Gamma: {kappas:?}");
    }

    // over a quadratic base: Q(i) at p = 3
    let gauss = new_field(&parse_poly("x^2+1").unwrap()).unwrap();
    let layer = build_layer(&gauss, 3, 1, 1).unwrap();
    println!(
        "\nQ(i)-layer (p=3, n=1, i=1): [layer : Q(i)] = {}, layer field degree {}",
        layer.degree,
        layer.layer_field.degree()
    );

    // ramification of p through the layer: (e, f) per layer prime, relative
    // to the base prime it lies over
    let sp = layer_s_primes(&gauss, &layer).unwrap();
    for (b, above) in sp.behavior.iter().enumerate() {
        let base = &sp.base_primes[b];
        for &(l, e, f) in above {
            println!(
                "  base prime (e={}, f={}) -> layer prime {} with relative (e={}, f={})",
                base.e, base.f, l, e, f
            );
        }
    }

    // local residue data: the degree [k_v(mu_{p^n}^{(x)i}) : k_v] is the
    // multiplicative order of q^i mod p^n
    println!();
    for (qq, p, n, i) in [(3u64, 61u64, 1u32, 1u64), (2, 7, 1, 1), (2, 7, 2, 3)] {
        println!(
            "residue extension degree (q={qq}, p={p}, n={n}, i={i}): {}",
            residue_extension_degree(qq, p, n, i)
        );
    }
}
