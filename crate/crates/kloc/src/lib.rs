//! Splitting analysis for the K-theory localization sequence of number fields.
//!
//! For a number field `F`, a prime `p` (odd, or `p = 2` with `F`
//! nonexceptional) and a twist index `i >= 1`, this crate decides whether the
//! localization sequence for `K_{2i}(F)_p` splits. The obstruction at level
//! `n` is the group of twisted Galois coinvariants of the p-part of the
//! S-class group of the layer field `F_{i,n}` inside `F(mu_{p^n})`; the
//! sequence splits exactly when every obstruction vanishes.
//!
//! The building blocks are exposed as modules:
//!
//! * [`intlinalg`] — exact integer linear algebra (HNF, SNF), finite abelian
//!   groups in invariant-factor form and twisted coinvariants.
//! * [`poly`] — integer polynomials: parsing, discriminants, factorization
//!   mod q and certified factorization over Z.
//! * [`numeric`] — arbitrary-precision fixed-point complex arithmetic, root
//!   finding and algebraic element recognition.
//! * [`lll`] — integral LLL reduction and short-vector enumeration.
//! * [`numfield`] — number fields, maximal orders, ideals in HNF, prime
//!   factorization, automorphisms and principality testing.
//! * [`classgrp`] — class groups and S-class groups with Galois action.
//! * [`cyclolayer`] — cyclotomic character images, layer fields `F_{i,n}`
//!   and the nonexceptionality test.
//! * [`criterion`] — obstruction groups, splitting verdicts, tower
//!   certification and the wild-kernel criterion.
//! * [`rationals`] — the fast `F = Q` path through Bernoulli numbers mod p.
//! * [`report`] and [`cache`] — JSON reports and the class-group cache.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod cache;
pub mod classgrp;
pub mod criterion;
pub mod cyclolayer;
pub mod error;
pub mod intlinalg;
pub mod lll;
pub mod numeric;
pub mod numfield;
pub mod poly;
pub mod rationals;
pub mod report;

pub use error::KlocError;
