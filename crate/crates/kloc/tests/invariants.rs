//! Property-based tests for the structural invariants of the integer
//! linear algebra, group machinery, and number-field arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use kloc::intlinalg::{
    group_from_relations, hnf, mod_inverse, p_primary_part, snf, solve_integer,
    twisted_coinvariants, FiniteAbelianGroup, GaloisModule, IntMatrix,
};
use kloc::numfield::{new_field, NumberField};
use kloc::poly::parse_poly;
use kloc::rationals::{responsible_index, splits_q};

fn field(s: &str) -> NumberField {
    new_field(&parse_poly(s).unwrap()).unwrap()
}

fn matrix_strategy(max_dim: usize) -> impl Strategy<Value = IntMatrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(-9i64..=9, c), r)
            .prop_map(|rows| {
                IntMatrix::from_rows(
                    rows.into_iter()
                        .map(|row| row.into_iter().map(BigInt::from).collect())
                        .collect(),
                )
            })
    })
}

fn square_matrix_strategy(max_dim: usize) -> impl Strategy<Value = IntMatrix> {
    (1..=max_dim).prop_flat_map(|n| {
        proptest::collection::vec(proptest::collection::vec(-9i64..=9, n), n).prop_map(|rows| {
            IntMatrix::from_rows(
                rows.into_iter()
                    .map(|row| row.into_iter().map(BigInt::from).collect())
                    .collect(),
            )
        })
    })
}

/// Invariant factors of a random p-group, as a divisibility chain.
fn p_group_strategy() -> impl Strategy<Value = (u64, FiniteAbelianGroup)> {
    (
        prop_oneof![Just(2u64), Just(3), Just(5)],
        proptest::collection::vec(1u32..=3, 1..=3),
    )
        .prop_map(|(p, mut exps)| {
            exps.sort();
            let inv = exps.iter().map(|&e| BigInt::from(p).pow(e)).collect();
            (p, FiniteAbelianGroup::new(inv))
        })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn hnf_is_idempotent_and_preserves_determinant(m in square_matrix_strategy(4)) {
        let h = hnf(&m);
        prop_assert_eq!(hnf(&h), h.clone());
        prop_assert_eq!(h.det().abs(), m.det().abs());
    }

    #[test]
    fn snf_transforms_are_unimodular_and_exact(m in matrix_strategy(4)) {
        let (u, d, v) = snf(&m);
        prop_assert!(u.det().abs().is_one());
        prop_assert!(v.det().abs().is_one());
        prop_assert_eq!(u.mul(&m).mul(&v), d.clone());
        let k = d.rows().min(d.cols());
        for r in 0..d.rows() {
            for c in 0..d.cols() {
                if r != c {
                    prop_assert!(d.get(r, c).is_zero());
                }
            }
        }
        for j in 1..k {
            let (a, b) = (d.get(j - 1, j - 1), d.get(j, j));
            prop_assert!(b.is_zero() || (b % a).is_zero());
        }
    }

    #[test]
    fn presented_group_order_is_relation_determinant(m in square_matrix_strategy(3)) {
        prop_assume!(!m.det().is_zero());
        let pres = group_from_relations(m.cols(), &m).unwrap();
        prop_assert_eq!(pres.group.order(), m.det().abs());
    }

    #[test]
    fn solve_integer_finds_constructed_solutions(
        m in square_matrix_strategy(3),
        x in proptest::collection::vec(-5i64..=5, 3),
    ) {
        let x0: Vec<BigInt> = x.into_iter().take(m.cols()).map(BigInt::from).collect();
        prop_assume!(x0.len() == m.cols());
        let b = m.mul_vec(&x0);
        let sol = solve_integer(&m, &b);
        prop_assert!(sol.is_some());
        prop_assert_eq!(m.mul_vec(&sol.unwrap()), b);
    }

    #[test]
    fn group_arithmetic_axioms((_, g) in p_group_strategy(), coords in proptest::collection::vec(-40i64..=40, 3)) {
        let a: Vec<BigInt> = coords.iter().take(g.rank()).map(|&c| BigInt::from(c)).collect();
        prop_assume!(a.len() == g.rank());
        let a = g.reduce(&a);
        prop_assert!(g.is_zero_el(&g.add(&a, &g.neg(&a))));
        let ord = g.element_order(&a);
        prop_assert!((g.exponent() % &ord).is_zero());
        // ord * a = 0, and no smaller multiple by a prime divisor of ord is
        let mut scaled = g.zero_el();
        let mut k = BigInt::zero();
        while k < ord {
            scaled = g.add(&scaled, &a);
            k += 1;
        }
        prop_assert!(g.is_zero_el(&scaled));
    }

    #[test]
    fn p_primary_part_splits_the_order((p, g) in p_group_strategy(), extra in 2u64..=7) {
        // adjoin a coprime cyclic factor so the p-part is proper
        prop_assume!(extra % p != 0);
        let mut inv: Vec<BigInt> = g.invariants().to_vec();
        let last = inv.pop().unwrap();
        inv.push(last * BigInt::from(extra));
        let mixed = FiniteAbelianGroup::new(inv);
        let (p_part, _) = p_primary_part(&mixed, p);
        prop_assert!(p_part.is_p_group(p));
        let coprime = mixed.order() / p_part.order();
        prop_assert!(!(&coprime % BigInt::from(p)).is_zero());
    }

    #[test]
    fn coinvariants_without_action_are_the_plain_quotient((p, g) in p_group_strategy(), n in 0u32..=3) {
        let module = GaloisModule::new(g.clone(), vec![], None);
        let computed = twisted_coinvariants(&module, p, n).unwrap();
        let pn = BigInt::from(p).pow(n);
        let expected: Vec<BigInt> = g
            .invariants()
            .iter()
            .map(|d| d.gcd(&pn))
            .filter(|d| !d.is_one())
            .collect();
        prop_assert_eq!(computed.invariants(), &expected[..]);
    }

    #[test]
    fn mod_inverse_inverts_units(a in 1i64..200, m in 2i64..200) {
        let (ab, mb) = (BigInt::from(a), BigInt::from(m));
        match mod_inverse(&ab, &mb) {
            Some(inv) => prop_assert!(((ab * inv) % mb).is_one()),
            None => prop_assert!(!ab.gcd(&mb).is_one()),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn norm_is_multiplicative(
        which in 0usize..4,
        a in proptest::collection::vec(-6i64..=6, 4),
        b in proptest::collection::vec(-6i64..=6, 4),
    ) {
        let f = field(["x^2+1", "x^2-5", "x^3-2", "x^4+1"][which]);
        let a: Vec<BigInt> = a.iter().take(f.degree()).map(|&c| BigInt::from(c)).collect();
        let b: Vec<BigInt> = b.iter().take(f.degree()).map(|&c| BigInt::from(c)).collect();
        prop_assume!(a.len() == f.degree() && b.len() == f.degree());
        prop_assert_eq!(f.el_norm(&f.el_mul(&a, &b)), f.el_norm(&a) * f.el_norm(&b));
    }

    #[test]
    fn element_multiplication_is_commutative_and_associative(
        which in 0usize..4,
        a in proptest::collection::vec(-6i64..=6, 4),
        b in proptest::collection::vec(-6i64..=6, 4),
        c in proptest::collection::vec(-6i64..=6, 4),
    ) {
        let f = field(["x^2+1", "x^2-5", "x^3-2", "x^4+1"][which]);
        let take = |v: &[i64]| -> Vec<BigInt> {
            v.iter().take(f.degree()).map(|&x| BigInt::from(x)).collect()
        };
        let (a, b, c) = (take(&a), take(&b), take(&c));
        prop_assume!(a.len() == f.degree());
        prop_assert_eq!(f.el_mul(&a, &b), f.el_mul(&b, &a));
        prop_assert_eq!(f.el_mul(&f.el_mul(&a, &b), &c), f.el_mul(&a, &f.el_mul(&b, &c)));
    }

    #[test]
    fn non_split_rows_name_an_irregular_index(i in 1u64..100) {
        // 37 is the smallest irregular prime; every non-split row must point
        // at an even index k with p | B_k, and split rows must not
        let p = 37u64;
        let s = splits_q(p, i).unwrap();
        match responsible_index(p, i) {
            Some(k) => {
                prop_assert!(!s);
                prop_assert!(k % 2 == 0 && k <= p - 3);
            }
            None => prop_assert!(s),
        }
    }
}
