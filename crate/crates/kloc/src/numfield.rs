//! Number fields Q[x]/(f): maximal orders, ideals in Hermite normal form,
//! prime factorization, automorphisms, and principality testing.
//!
//! Elements of the ring of integers are integer coordinate vectors with
//! respect to the stored integral basis. Anything decided numerically
//! (signatures, recognized elements, short generators) is re-verified by
//! exact integer arithmetic before it is returned.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use crate::error::{KlocError, Result};
use crate::intlinalg::{hnf, rat_inverse, IntMatrix};
use crate::lll::{enumerate_short_vectors, lll_gram, EnumOptions};
use crate::numeric::{eval_zpoly, zpoly_roots, CFx, Fx};
use crate::poly::{factor_mod, fq_degree, fq_inv_mod, fq_mul, fq_rem, fq_to_zpoly, FqPoly, ZPoly};

/// Which primes the stored order is known to be maximal at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Maximality {
    /// The order is the full ring of integers.
    AllPrimes,
    /// The order is only guaranteed maximal at the listed primes; the stored
    /// discriminant may be off by squares of other primes.
    AtPrimes(Vec<u64>),
}

/// A number field Q[x]/(f) with a distinguished order (the maximal order, or
/// a p-maximal one — see [`Maximality`]).
#[derive(Clone)]
pub struct NumberField {
    poly: ZPoly,
    degree: usize,
    /// rows = numerators of the integral basis in the power basis
    basis: IntMatrix,
    den: BigInt,
    /// basis * basis_inv = basis_inv_den * identity
    basis_inv: IntMatrix,
    basis_inv_den: BigInt,
    /// mult[k].row(m) = coordinates of w_k * w_m
    mult: Vec<IntMatrix>,
    disc: BigInt,
    index: BigInt,
    signature: (usize, usize),
    roots: Vec<CFx>,
    prec: u32,
    maximality: Maximality,
    one: Vec<BigInt>,
    fingerprint: u64,
}

impl NumberField {
    pub fn poly(&self) -> &ZPoly {
        &self.poly
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }
    pub fn index(&self) -> &BigInt {
        &self.index
    }
    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }
    pub fn roots(&self) -> &[CFx] {
        &self.roots
    }
    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// The same field with its embeddings recomputed at another working
    /// precision. All exact data (order basis, multiplication table) is
    /// shared; the root order is preserved, so embedding indices stay valid.
    pub fn with_precision(&self, prec: u32) -> NumberField {
        let mut fresh = zpoly_roots(self.poly.coeffs(), prec);
        let mut roots = Vec::with_capacity(self.roots.len());
        for old in &self.roots {
            let pos = fresh
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    let da = a.1.sub(old).abs_f64();
                    let db = b.1.sub(old).abs_f64();
                    da.partial_cmp(&db).expect("finite root distances")
                })
                .map(|(j, _)| j)
                .expect("as many refined roots as original roots");
            roots.push(fresh.swap_remove(pos));
        }
        let mut k = self.clone();
        k.roots = roots;
        k.prec = prec;
        k
    }
    pub fn maximality(&self) -> &Maximality {
        &self.maximality
    }
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
    pub fn integral_basis(&self) -> (&IntMatrix, &BigInt) {
        (&self.basis, &self.den)
    }

    /// Coordinates of 1.
    pub fn one_coords(&self) -> Vec<BigInt> {
        self.one.clone()
    }

    /// Coordinates of the generator θ (a root of the defining polynomial).
    pub fn theta_coords(&self) -> Vec<BigInt> {
        self.power_to_ib(&poly_mod(&ZPoly::x(), &self.poly), &BigInt::one())
            .expect("theta is integral")
    }

    pub fn el_add(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn el_scal(&self, k: &BigInt, a: &[BigInt]) -> Vec<BigInt> {
        a.iter().map(|x| x * k).collect()
    }

    /// Product in integral-basis coordinates.
    pub fn el_mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let n = self.degree;
        let mut out = vec![BigInt::zero(); n];
        for k in 0..n {
            if a[k].is_zero() {
                continue;
            }
            let contrib = vec_mat(b, &self.mult[k]);
            for t in 0..n {
                out[t] += &a[k] * &contrib[t];
            }
        }
        out
    }

    /// Evaluates an integer polynomial at an integral element.
    pub fn el_eval_poly(&self, g: &ZPoly, alpha: &[BigInt]) -> Vec<BigInt> {
        let mut acc = vec![BigInt::zero(); self.degree];
        for c in g.coeffs().iter().rev() {
            acc = self.el_mul(&acc, alpha);
            let unit = self.el_scal(c, &self.one);
            acc = self.el_add(&acc, &unit);
        }
        acc
    }

    /// Integral-basis coordinates -> power-basis numerator (denominator is
    /// `self.den`).
    pub fn ib_to_power(&self, coords: &[BigInt]) -> ZPoly {
        ZPoly::new(vec_mat(coords, &self.basis))
    }

    /// Power-basis element `g / den_g` -> integral-basis coordinates, if the
    /// element lies in the order.
    pub fn power_to_ib(&self, g: &ZPoly, den_g: &BigInt) -> Option<Vec<BigInt>> {
        assert!(g.degree() < self.degree || g.is_zero());
        let mut v = vec![BigInt::zero(); self.degree];
        for (k, c) in g.coeffs().iter().enumerate() {
            v[k] = c * &self.den;
        }
        let num = vec_mat(&v, &self.basis_inv);
        let d = &self.basis_inv_den * den_g;
        let mut out = Vec::with_capacity(self.degree);
        for x in num {
            let (q, r) = x.div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(out)
    }

    /// Embedding of an integral element under the j-th complex root.
    pub fn embed(&self, coords: &[BigInt], j: usize) -> CFx {
        let g = self.ib_to_power(coords);
        let val = eval_zpoly(g.coeffs(), &self.roots[j]);
        let den = CFx::from_int(&self.den, self.prec);
        val.div(&den)
    }

    /// Exact field norm of an integral element.
    pub fn el_norm(&self, coords: &[BigInt]) -> BigInt {
        let g = self.ib_to_power(coords);
        if g.is_zero() {
            return BigInt::zero();
        }
        // f monic: res(f, g) = Π g(θ_i), so N(g(θ)/d) = res(f, g) / d^n
        let res = self.poly.resultant(&g);
        let (q, r) = res.div_rem(&self.den.pow(self.degree as u32));
        debug_assert!(r.is_zero(), "norm not integral");
        q
    }
}

fn vec_mat(v: &[BigInt], m: &IntMatrix) -> Vec<BigInt> {
    let cols = m.cols();
    let mut out = vec![BigInt::zero(); cols];
    for (r, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for c in 0..cols {
            out[c] += x * m.get(r, c);
        }
    }
    out
}

/// Builds a number field with the full maximal order.
pub fn new_field(f: &ZPoly) -> Result<NumberField> {
    build_field(f, None, true, &[])
}

/// Builds a number field whose order is only made maximal at the given
/// primes (used when the polynomial discriminant cannot be factored).
pub fn new_field_p_maximal(f: &ZPoly, primes: &[u64]) -> Result<NumberField> {
    build_field(f, Some(primes.to_vec()), true, &[])
}

/// Like [`new_field_p_maximal`], for callers holding an independent
/// irreducibility certificate for `f` (e.g. a count of distinct conjugates
/// matching its degree), so the expensive factorization check is skipped.
pub(crate) fn new_field_p_maximal_certified_irreducible(
    f: &ZPoly,
    primes: &[u64],
) -> Result<NumberField> {
    build_field(f, Some(primes.to_vec()), false, &[])
}

const DEFAULT_PREC: u32 = 320;

/// Like [`new_field_p_maximal_certified_irreducible`], with extra integral
/// elements (power-basis numerator and denominator pairs) adjoined to the
/// order before use, so their coordinates become integral.
pub(crate) fn new_field_with_order_elements(
    f: &ZPoly,
    primes: &[u64],
    extra: &[(ZPoly, BigInt)],
) -> Result<NumberField> {
    build_field(f, Some(primes.to_vec()), false, extra)
}

fn build_field(
    f: &ZPoly,
    scope: Option<Vec<u64>>,
    check_irreducible: bool,
    extra: &[(ZPoly, BigInt)],
) -> Result<NumberField> {
    if f.is_constant() {
        return Err(KlocError::DegreeZero);
    }
    if !f.is_monic() {
        return Err(KlocError::NotMonic);
    }
    let n = f.degree();
    if n > 1 && check_irreducible {
        let (_, factors) = crate::poly::factor_z(f)?;
        if factors.len() > 1 || factors[0].1 > 1 {
            return Err(KlocError::Reducible(format!("{}", factors[0].0)));
        }
    }
    let prec = DEFAULT_PREC;
    let roots = zpoly_roots(f.coeffs(), prec);
    let disc_f = f.discriminant();

    // signature from root imaginary parts, cross-checked against sign(disc)
    let r1 = roots
        .iter()
        .filter(|z| {
            let scale = 1.0 + z.abs_f64();
            z.im.to_f64().abs() < 1e-12 * scale
        })
        .count();
    let r2 = (n - r1) / 2;
    if r1 + 2 * r2 != n {
        return Err(KlocError::PrecisionExhausted(prec));
    }
    let disc_negative = disc_f.is_negative();
    if (r2 % 2 == 1) != disc_negative {
        return Err(KlocError::PrecisionExhausted(prec));
    }

    // primes at which to maximalize
    let (work_primes, mut maximality) = match scope {
        Some(ps) => (ps.clone(), Maximality::AtPrimes(ps)),
        None => {
            let factors = factor_bigint(&disc_f.abs())
                .map_err(|_| KlocError::FactoringFailed(disc_f.to_string()))?;
            let ps: Vec<u64> = factors
                .iter()
                .filter(|(_, e)| *e >= 2)
                .map(|(p, _)| {
                    p.to_u64().ok_or_else(|| {
                        KlocError::FactoringFailed(format!("prime factor too large: {p}"))
                    })
                })
                .collect::<Result<_>>()?;
            (ps, Maximality::AllPrimes)
        }
    };

    let mut order = Order {
        f: f.clone(),
        basis: IntMatrix::identity(n),
        den: BigInt::one(),
    };
    for &q in &work_primes {
        let local = p_maximal_order(f, q)?;
        order = order.sum(&local);
    }
    if !extra.is_empty() {
        order.add_rows(extra);
        order.close_multiplicatively();
    }
    order.normalize();

    // A scoped order can still be non-maximal at small primes outside its
    // scope. Extend the scope to every small prime whose square divides the
    // order discriminant, so prime factorization (and everything built on
    // it, like class-group factor bases) is certified at any prime it will
    // realistically meet: q^2 ∤ disc already implies q-maximality.
    if let Maximality::AtPrimes(ref mut ps) = maximality {
        const SCAN_BOUND: u64 = 1 << 16;
        let scan = small_primes(SCAN_BOUND);
        loop {
            let det = order.basis.det().abs();
            let index = order.den.pow(n as u32) / &det;
            let disc = &disc_f / (&index * &index);
            let mut added = false;
            for &q in &scan {
                if ps.contains(&q) {
                    continue;
                }
                let q2 = BigInt::from(q) * BigInt::from(q);
                if disc.mod_floor(&q2).is_zero() {
                    if std::env::var_os("KLOC_DEBUG").is_some() {
                        eprintln!("maximality scan: deg {} adding prime {q}", n);
                    }
                    order = order.sum(&p_maximal_order(f, q)?);
                    ps.push(q);
                    added = true;
                }
            }
            if !added {
                break;
            }
            if !extra.is_empty() {
                order.close_multiplicatively();
            }
            order.normalize();
        }
    }

    let det = order.basis.det().abs();
    let den_n = order.den.pow(n as u32);
    let (index, r) = den_n.div_rem(&det);
    assert!(r.is_zero(), "order basis determinant must divide den^n");
    let (disc, r2d) = disc_f.div_rem(&(&index * &index));
    assert!(r2d.is_zero(), "index^2 must divide disc(f)");

    let (basis_inv, basis_inv_den) =
        rat_inverse(&order.basis).expect("integral basis is nonsingular");

    // multiplication table (also the ring-closure check)
    let mut mult = Vec::with_capacity(n);
    for k in 0..n {
        let mut m = IntMatrix::zero(n, n);
        for j in 0..n {
            let prod = order.mul_rows(k, j);
            let coords = order
                .coords_of_power(&prod, &(&order.den * &order.den))
                .expect("order closed under multiplication");
            for (t, c) in coords.into_iter().enumerate() {
                m.set(j, t, c);
            }
        }
        mult.push(m);
    }

    let mut hasher = Sha256::new();
    hasher.update(format!("{}", f).as_bytes());
    let digest = hasher.finalize();
    let fingerprint = u64::from_le_bytes(digest[..8].try_into().unwrap());

    let mut field = NumberField {
        poly: f.clone(),
        degree: n,
        basis: order.basis,
        den: order.den,
        basis_inv,
        basis_inv_den,
        mult,
        disc,
        index,
        signature: (r1, r2),
        roots,
        prec,
        maximality,
        one: vec![],
        fingerprint,
    };
    field.one = field
        .power_to_ib(&ZPoly::one(), &BigInt::one())
        .expect("1 lies in every order");
    Ok(field)
}

// ---------------------------------------------------------------------------
// orders and the Round-2 procedure
// ---------------------------------------------------------------------------

struct Order {
    f: ZPoly,
    /// rows = numerators of basis elements in the power basis
    basis: IntMatrix,
    den: BigInt,
}

impl Order {
    fn n(&self) -> usize {
        self.f.degree()
    }

    fn normalize(&mut self) {
        let n = self.n();
        let h = hnf(&self.basis);
        let mut b = IntMatrix::zero(n, n);
        for r in 0..n {
            for c in 0..n {
                b.set(r, c, h.get(r, c).clone());
            }
        }
        // reduce the common content into the denominator
        let mut g = self.den.clone();
        for r in 0..n {
            for c in 0..n {
                g = g.gcd(b.get(r, c));
            }
        }
        if g > BigInt::one() {
            for r in 0..n {
                for c in 0..n {
                    let v = b.get(r, c) / &g;
                    b.set(r, c, v);
                }
            }
            self.den = &self.den / &g;
        }
        self.basis = b;
    }

    fn same_as(&self, other: &Order) -> bool {
        self.den == other.den && self.basis == other.basis
    }

    /// Product of basis rows i and j as a power-basis numerator over den^2.
    fn mul_rows(&self, i: usize, j: usize) -> ZPoly {
        let a = ZPoly::new(self.basis.row(i).to_vec());
        let b = ZPoly::new(self.basis.row(j).to_vec());
        poly_mod(&a.mul(&b), &self.f)
    }

    /// Coordinates of a power-basis element `g / den_g` in this order, if
    /// integral.
    fn coords_of_power(&self, g: &ZPoly, den_g: &BigInt) -> Option<Vec<BigInt>> {
        let n = self.n();
        let (inv, inv_den) = rat_inverse(&self.basis)?;
        let mut v = vec![BigInt::zero(); n];
        for (k, c) in g.coeffs().iter().enumerate() {
            v[k] = c * &self.den;
        }
        let num = vec_mat(&v, &inv);
        let d = &inv_den * den_g;
        let mut out = Vec::with_capacity(n);
        for x in num {
            let (q, r) = x.div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(out)
    }

    /// Structure constants: `table[k].row(m)` = coordinates of w_k * w_m.
    fn mult_table(&self) -> Vec<IntMatrix> {
        let n = self.n();
        let den2 = &self.den * &self.den;
        let (inv, inv_den) = rat_inverse(&self.basis).expect("order basis nonsingular");
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut m = IntMatrix::zero(n, n);
            for j in 0..n {
                let prod = self.mul_rows(k, j);
                let mut v = vec![BigInt::zero(); n];
                for (t, c) in prod.coeffs().iter().enumerate() {
                    v[t] = c * &self.den;
                }
                let num = vec_mat(&v, &inv);
                let d = &inv_den * &den2;
                for (t, x) in num.into_iter().enumerate() {
                    let (q, r) = x.div_rem(&d);
                    assert!(r.is_zero(), "order not closed under multiplication");
                    m.set(j, t, q);
                }
            }
            out.push(m);
        }
        out
    }

    /// Enlarges the module by the given power-basis elements `g / den_g`.
    fn add_rows(&mut self, els: &[(ZPoly, BigInt)]) {
        let n = self.n();
        let mut den = self.den.clone();
        for (_, d) in els {
            den = den.lcm(d);
        }
        let s = &den / &self.den;
        let mut rows: Vec<Vec<BigInt>> = vec![];
        for r in 0..n {
            rows.push(self.basis.row(r).iter().map(|c| c * &s).collect());
        }
        for (g, d) in els {
            let s = &den / d;
            let mut v = vec![BigInt::zero(); n];
            for (k, c) in g.coeffs().iter().enumerate() {
                v[k] = c * &s;
            }
            rows.push(v);
        }
        let h = hnf(&IntMatrix::from_rows(rows));
        let mut b = IntMatrix::zero(n, n);
        for r in 0..n {
            for c in 0..n {
                b.set(r, c, h.get(r, c).clone());
            }
        }
        self.basis = b;
        self.den = den;
        self.normalize();
    }

    /// Closes the module under multiplication, yielding the smallest order
    /// containing it. Terminates because every generator is integral, so the
    /// growing chain of modules stays inside the maximal order.
    fn close_multiplicatively(&mut self) {
        loop {
            let n = self.n();
            let den2 = &self.den * &self.den;
            let (inv, inv_den) = rat_inverse(&self.basis).expect("order basis nonsingular");
            let d = &inv_den * &den2;
            let mut new_els: Vec<(ZPoly, BigInt)> = vec![];
            'scan: for i in 0..n {
                for j in i..n {
                    let prod = self.mul_rows(i, j);
                    let mut v = vec![BigInt::zero(); n];
                    for (k, c) in prod.coeffs().iter().enumerate() {
                        v[k] = c * &self.den;
                    }
                    let num = vec_mat(&v, &inv);
                    if num.iter().any(|x| !(x % &d).is_zero()) {
                        new_els.push((prod, den2.clone()));
                        if new_els.len() >= 12 {
                            break 'scan;
                        }
                    }
                }
            }
            if new_els.is_empty() {
                return;
            }
            self.add_rows(&new_els);
        }
    }

    /// Sum of two orders (the smallest lattice containing both; an order
    /// when both contain Z[θ], as here).
    fn sum(&self, other: &Order) -> Order {
        let n = self.n();
        let den = self.den.lcm(&other.den);
        let s1 = &den / &self.den;
        let s2 = &den / &other.den;
        let mut rows: Vec<Vec<BigInt>> = vec![];
        for r in 0..n {
            rows.push(self.basis.row(r).iter().map(|c| c * &s1).collect());
        }
        for r in 0..n {
            rows.push(other.basis.row(r).iter().map(|c| c * &s2).collect());
        }
        let h = hnf(&IntMatrix::from_rows(rows));
        let mut b = IntMatrix::zero(n, n);
        for r in 0..n {
            for c in 0..n {
                b.set(r, c, h.get(r, c).clone());
            }
        }
        let mut o = Order {
            f: self.f.clone(),
            basis: b,
            den,
        };
        o.normalize();
        o
    }
}

/// Reduction of a polynomial modulo a monic polynomial (exact over Z).
fn poly_mod(a: &ZPoly, f: &ZPoly) -> ZPoly {
    assert!(f.is_monic());
    let n = f.degree();
    let mut r = a.clone();
    while !r.is_zero() && r.degree() >= n {
        let k = r.degree() - n;
        let c = r.lc();
        r = r.sub(&f.mul_scalar(&c).shift(k));
    }
    r
}

/// The q-maximal order containing Z[θ] (Round-2 / Pohst–Zassenhaus).
fn p_maximal_order(f: &ZPoly, q: u64) -> Result<Order> {
    let n = f.degree();
    let mut order = Order {
        f: f.clone(),
        basis: IntMatrix::identity(n),
        den: BigInt::one(),
    };
    let qb = BigInt::from(q);
    loop {
        let table = order.mult_table();
        let tables_q: Vec<Vec<Vec<u64>>> = table.iter().map(|m| mat_mod_q(m, q)).collect();

        // radical of O/qO = kernel of the iterated Frobenius
        let mut e = 1u32;
        let mut qe = q;
        while (qe as u128) < n as u128 {
            qe = qe.saturating_mul(q);
            e += 1;
        }
        let mut frob_rows: Vec<Vec<u64>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut x = vec![0u64; n];
            x[k] = 1;
            for _ in 0..e {
                x = fq_coords_pow(&x, q as u64, &tables_q, q);
            }
            frob_rows.push(x);
        }
        let rad = fq_left_kernel(&frob_rows, q);

        // I = radical lift + qO, in order coordinates
        let mut rows: Vec<Vec<BigInt>> = rad
            .iter()
            .map(|v| v.iter().map(|&c| BigInt::from(c)).collect())
            .collect();
        for k in 0..n {
            let mut r = vec![BigInt::zero(); n];
            r[k] = qb.clone();
            rows.push(r);
        }
        let g_full = hnf(&IntMatrix::from_rows(rows));
        let mut g = IntMatrix::zero(n, n);
        for r in 0..n {
            for c in 0..n {
                g.set(r, c, g_full.get(r, c).clone());
            }
        }
        let (g_inv, g_den) = rat_inverse(&g).expect("radical ideal has full rank");

        // multiplier ring: kernel of O/qO -> End(I/qI)
        let mut big_rows: Vec<Vec<u64>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut flat = Vec::with_capacity(n * n);
            for j in 0..n {
                // coordinates of w_k * g_j in the order
                let z = vec_mat(g.row(j), &table[k]);
                // express in I-coordinates
                let num = vec_mat(&z, &g_inv);
                for x in num {
                    let (c, r) = x.div_rem(&g_den);
                    assert!(r.is_zero(), "radical ideal not an O-ideal");
                    flat.push(c.mod_floor(&qb).to_u64().unwrap());
                }
            }
            big_rows.push(flat);
        }
        let kernel = fq_left_kernel(&big_rows, q);

        // new order = (kernel lifts + qO) / q, in power-basis coordinates
        let mut rows: Vec<Vec<BigInt>> = vec![];
        for y in &kernel {
            let yc: Vec<BigInt> = y.iter().map(|&c| BigInt::from(c)).collect();
            rows.push(vec_mat(&yc, &order.basis));
        }
        for k in 0..n {
            rows.push(order.basis.row(k).iter().map(|c| c * &qb).collect());
        }
        let mut new_order = Order {
            f: f.clone(),
            basis: {
                let h = hnf(&IntMatrix::from_rows(rows));
                let mut b = IntMatrix::zero(n, n);
                for r in 0..n {
                    for c in 0..n {
                        b.set(r, c, h.get(r, c).clone());
                    }
                }
                b
            },
            den: &order.den * &qb,
        };
        new_order.normalize();
        let mut old = order;
        old.normalize();
        if new_order.same_as(&old) {
            return Ok(old);
        }
        order = new_order;
    }
}

fn mat_mod_q(m: &IntMatrix, q: u64) -> Vec<Vec<u64>> {
    let qb = BigInt::from(q);
    (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| m.get(r, c).mod_floor(&qb).to_u64().unwrap())
                .collect()
        })
        .collect()
}

/// Product of two order elements mod q using mod-q structure constants.
fn fq_coords_mul(a: &[u64], b: &[u64], tables: &[Vec<Vec<u64>>], q: u64) -> Vec<u64> {
    let n = a.len();
    let mut out = vec![0u64; n];
    for k in 0..n {
        if a[k] == 0 {
            continue;
        }
        for m in 0..n {
            if b[m] == 0 {
                continue;
            }
            let coef = (a[k] as u128 * b[m] as u128) % q as u128;
            for t in 0..n {
                let add = (coef * tables[k][m][t] as u128) % q as u128;
                out[t] = ((out[t] as u128 + add) % q as u128) as u64;
            }
        }
    }
    out
}

fn fq_coords_pow(x: &[u64], mut e: u64, tables: &[Vec<Vec<u64>>], q: u64) -> Vec<u64> {
    // identity coordinates: compute lazily as x^1 accumulate
    let mut base = x.to_vec();
    let mut acc: Option<Vec<u64>> = None;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => fq_coords_mul(&a, &base, tables, q),
            });
        }
        e >>= 1;
        if e > 0 {
            base = fq_coords_mul(&base, &base, tables, q);
        }
    }
    acc.unwrap_or_else(|| x.to_vec())
}

/// Basis of `{y : y M = 0 mod q}` for a matrix given as rows.
fn fq_left_kernel(m: &[Vec<u64>], q: u64) -> Vec<Vec<u64>> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    // transpose and compute the right kernel of the transpose
    let mt: Vec<Vec<u64>> = (0..cols).map(|c| (0..rows).map(|r| m[r][c]).collect()).collect();
    fq_right_kernel(&mt, q)
}

/// Basis of `{x : M x = 0 mod q}` (x as row vectors of length cols(M)).
fn fq_right_kernel(m: &[Vec<u64>], q: u64) -> Vec<Vec<u64>> {
    let rows = m.len();
    let cols = if rows > 0 { m[0].len() } else { 0 };
    let mut a: Vec<Vec<u64>> = m.to_vec();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0usize;
    for c in 0..cols {
        let piv = (rank..rows).find(|&r| a[r][c] % q != 0);
        let Some(piv) = piv else { continue };
        a.swap(rank, piv);
        let inv = mod_inv_u64(a[rank][c] % q, q);
        for x in a[rank].iter_mut() {
            *x = ((*x as u128 * inv as u128) % q as u128) as u64;
        }
        for r in 0..rows {
            if r != rank && a[r][c] % q != 0 {
                let f = a[r][c] % q;
                for cc in 0..cols {
                    let sub = (f as u128 * a[rank][cc] as u128) % q as u128;
                    a[r][cc] = ((a[r][cc] as u128 + q as u128 - sub) % q as u128) as u64;
                }
            }
        }
        pivot_of_col[c] = Some(rank);
        rank += 1;
    }
    let mut kernel = vec![];
    for c in 0..cols {
        if pivot_of_col[c].is_some() {
            continue;
        }
        let mut v = vec![0u64; cols];
        v[c] = 1;
        for cc in 0..cols {
            if let Some(r) = pivot_of_col[cc] {
                // x_cc = -a[r][c]
                v[cc] = (q - a[r][c] % q) % q;
            }
        }
        kernel.push(v);
    }
    kernel
}

fn mod_inv_u64(a: u64, q: u64) -> u64 {
    let (mut r0, mut r1) = (q as i128, (a % q) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let t = r0 / r1;
        let r = r0 - t * r1;
        r0 = r1;
        r1 = r;
        let s = s0 - t * s1;
        s0 = s1;
        s1 = s;
    }
    assert_eq!(r0, 1);
    (s0.rem_euclid(q as i128)) as u64
}

// ---------------------------------------------------------------------------
// integer factoring (for polynomial discriminants)
// ---------------------------------------------------------------------------

/// Miller–Rabin primality test (deterministic bases, reliable far beyond the
/// sizes used here).
pub fn is_prime_big(n: &BigInt) -> bool {
    if n <= &BigInt::one() {
        return false;
    }
    let n = n.to_biguint().unwrap();
    let two = BigUint::from(2u32);
    if n == two {
        return true;
    }
    if (&n % &two).is_zero() {
        return false;
    }
    let n_minus_1 = &n - BigUint::one();
    let s = n_minus_1.trailing_zeros().unwrap();
    let d = &n_minus_1 >> s;
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let a = BigUint::from(a);
        if a >= n {
            continue;
        }
        let mut x = a.modpow(&d, &n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % &n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Full factorization of a positive integer by trial division and Pollard's
/// rho (Brent variant); errors with `FactoringFailed` if effort runs out.
pub fn factor_bigint(n: &BigInt) -> Result<Vec<(BigInt, u32)>> {
    assert!(n.is_positive());
    let mut out: Vec<(BigInt, u32)> = vec![];
    let mut rest = n.clone();
    let push = |p: BigInt, out: &mut Vec<(BigInt, u32)>| {
        if let Some(e) = out.iter_mut().find(|(q, _)| *q == p) {
            e.1 += 1;
        } else {
            out.push((p, 1));
        }
    };
    for q in small_primes(100_000) {
        let qb = BigInt::from(q);
        while (&rest % &qb).is_zero() {
            rest /= &qb;
            push(qb.clone(), &mut out);
        }
        if rest.is_one() {
            break;
        }
    }
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime_big(&m) {
            push(m, &mut out);
            continue;
        }
        // perfect square?
        let r = m.sqrt();
        if &r * &r == m {
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        let d = pollard_rho(&m).ok_or_else(|| KlocError::FactoringFailed(m.to_string()))?;
        stack.push(&m / &d);
        stack.push(d);
    }
    out.sort();
    Ok(out)
}

fn pollard_rho(n: &BigInt) -> Option<BigInt> {
    let nu = n.to_biguint().unwrap();
    for c in 1u64..40 {
        let cc = BigUint::from(c);
        let mut x = BigUint::from(2u32);
        let mut y = x.clone();
        let mut d = BigUint::one();
        let mut steps = 0u64;
        while d.is_one() && steps < 2_000_000 {
            x = (&x * &x + &cc) % &nu;
            y = (&y * &y + &cc) % &nu;
            y = (&y * &y + &cc) % &nu;
            let diff = if x > y { &x - &y } else { &y - &x };
            if diff.is_zero() {
                break;
            }
            d = diff.gcd(&nu);
            steps += 1;
        }
        if !d.is_one() && d != nu {
            return Some(BigInt::from_biguint(Sign::Plus, d));
        }
    }
    None
}

/// Primes up to `bound` by a simple sieve.
pub fn small_primes(bound: u64) -> Vec<u64> {
    let b = bound as usize;
    let mut sieve = vec![true; b + 1];
    let mut out = vec![];
    for p in 2..=b {
        if sieve[p] {
            out.push(p as u64);
            let mut m = p * p;
            while m <= b {
                sieve[m] = false;
                m += p;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// ideals
// ---------------------------------------------------------------------------

/// Integral ideal (or fractional with `den > 1`) as a full-rank HNF lattice
/// in integral-basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealHNF {
    pub matrix: IntMatrix,
    pub den: BigInt,
    field_fingerprint: u64,
}

impl IdealHNF {
    pub fn norm(&self, k: &NumberField) -> BigInt {
        assert_eq!(self.field_fingerprint, k.fingerprint());
        let d = self.matrix.det().abs();
        let dn = self.den.pow(k.degree() as u32);
        let (q, r) = d.div_rem(&dn);
        assert!(r.is_zero(), "norm of a non-integral ideal requested");
        q
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }
}

/// The unit ideal (the whole ring of integers).
pub fn whole_ring(k: &NumberField) -> IdealHNF {
    IdealHNF {
        matrix: IntMatrix::identity(k.degree()),
        den: BigInt::one(),
        field_fingerprint: k.fingerprint(),
    }
}

/// Ideal generated by a list of integral elements plus `q * O` (pass q = 0
/// for the pure element span if it already has full rank).
pub fn ideal_from_generators(k: &NumberField, gens: &[Vec<BigInt>], q: &BigInt) -> IdealHNF {
    let n = k.degree();
    let mut rows: Vec<Vec<BigInt>> = vec![];
    for g in gens {
        for m in 0..n {
            let mut e = vec![BigInt::zero(); n];
            e[m] = BigInt::one();
            rows.push(k.el_mul(g, &e));
        }
    }
    if !q.is_zero() {
        for m in 0..n {
            let mut r = vec![BigInt::zero(); n];
            r[m] = q.clone();
            rows.push(r);
        }
    }
    let h = hnf(&IntMatrix::from_rows(rows));
    let mut b = IntMatrix::zero(n, n);
    for r in 0..n {
        for c in 0..n {
            b.set(r, c, h.get(r, c).clone());
        }
    }
    IdealHNF {
        matrix: b,
        den: BigInt::one(),
        field_fingerprint: k.fingerprint(),
    }
}

/// Principal ideal αO.
pub fn principal_ideal(k: &NumberField, alpha: &[BigInt]) -> IdealHNF {
    ideal_from_generators(k, &[alpha.to_vec()], &BigInt::zero())
}

/// Product of two ideals.
pub fn ideal_mul(k: &NumberField, a: &IdealHNF, b: &IdealHNF) -> Result<IdealHNF> {
    if a.field_fingerprint != k.fingerprint() || b.field_fingerprint != k.fingerprint() {
        return Err(KlocError::FieldMismatch);
    }
    let n = k.degree();
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n * n);
    for r in 0..n {
        for s in 0..n {
            rows.push(k.el_mul(a.matrix.row(r), b.matrix.row(s)));
        }
    }
    let h = hnf(&IntMatrix::from_rows(rows));
    let mut m = IntMatrix::zero(n, n);
    for r in 0..n {
        for c in 0..n {
            m.set(r, c, h.get(r, c).clone());
        }
    }
    Ok(IdealHNF {
        matrix: m,
        den: &a.den * &b.den,
        field_fingerprint: k.fingerprint(),
    })
}

/// k-th power by repeated squaring.
pub fn ideal_pow(k: &NumberField, a: &IdealHNF, mut e: u32) -> Result<IdealHNF> {
    let mut acc = whole_ring(k);
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = ideal_mul(k, &acc, &base)?;
        }
        e >>= 1;
        if e > 0 {
            base = ideal_mul(k, &base, &base)?;
        }
    }
    Ok(acc)
}

/// Membership of an integral element in an integral ideal (HNF forward
/// substitution; the HNF of a full-rank lattice is upper triangular).
pub fn ideal_contains(k: &NumberField, i: &IdealHNF, x: &[BigInt]) -> bool {
    assert_eq!(i.field_fingerprint, k.fingerprint());
    assert!(i.is_integral());
    let n = k.degree();
    let mut rem: Vec<BigInt> = x.to_vec();
    for col in 0..n {
        let piv = i.matrix.get(col, col);
        if rem[col].is_zero() {
            continue;
        }
        let (q, r) = rem[col].div_rem(piv);
        if !r.is_zero() {
            return false;
        }
        for c in col..n {
            rem[c] -= &q * i.matrix.get(col, c);
        }
    }
    rem.iter().all(|v| v.is_zero())
}

/// Lattice containment: every generator of `b` lies in `a`.
pub fn ideal_contains_ideal(k: &NumberField, a: &IdealHNF, b: &IdealHNF) -> bool {
    (0..k.degree()).all(|r| ideal_contains(k, a, b.matrix.row(r)))
}

/// Valuation of an integral element at a prime ideal (needs e*v small; the
/// powers are capped at `cap`).
pub fn element_valuation(
    k: &NumberField,
    alpha: &[BigInt],
    p: &IdealHNF,
    cap: u32,
) -> Result<u32> {
    let mut v = 0u32;
    let mut pk = p.clone();
    while v < cap {
        if !ideal_contains(k, &pk, alpha) {
            return Ok(v);
        }
        v += 1;
        pk = ideal_mul(k, &pk, p)?;
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// prime factorization
// ---------------------------------------------------------------------------

/// One prime ideal above a rational prime.
#[derive(Clone, Debug)]
pub struct PrimeIdealFactor {
    pub ideal: IdealHNF,
    pub p: u64,
    pub e: u32,
    pub f: u32,
}

/// Complete factorization `q O = Π P_j^{e_j}`.
pub fn factor_rational_prime(k: &NumberField, q: u64) -> Result<Vec<PrimeIdealFactor>> {
    let n = k.degree();
    let qb = BigInt::from(q);
    if let Maximality::AtPrimes(ps) = k.maximality() {
        // the order is q-maximal either by construction or because its
        // discriminant is not divisible by q^2
        assert!(
            ps.contains(&q) || !k.discriminant().mod_floor(&(&qb * &qb)).is_zero(),
            "order is not known to be maximal at {q}; factorization would be wrong"
        );
    }
    let index_divisor = k.index().mod_floor(&qb).is_zero();
    let mut out: Vec<PrimeIdealFactor> = vec![];
    if !index_divisor {
        // Dedekind: factor f mod q
        for (g, e) in factor_mod(k.poly(), q, 7) {
            let gz = fq_to_zpoly(&g);
            let deg = fq_degree(&g);
            let coords = k
                .power_to_ib(&poly_mod(&gz, k.poly()), &BigInt::one())
                .expect("Z[θ] elements are integral");
            let ideal = ideal_from_generators(k, &[coords], &qb);
            debug_assert_eq!(ideal.norm(k), qb.pow(deg as u32));
            out.push(PrimeIdealFactor {
                ideal,
                p: q,
                e,
                f: deg as u32,
            });
        }
    } else {
        out = factor_index_divisor(k, q)?;
    }
    let total: u32 = out.iter().map(|p| p.e * p.f).sum();
    assert_eq!(total as usize, n, "Σ e_j f_j must equal the degree");
    Ok(out)
}

/// Index-divisor case: split the algebra O/qO.
fn factor_index_divisor(k: &NumberField, q: u64) -> Result<Vec<PrimeIdealFactor>> {
    let n = k.degree();
    let qb = BigInt::from(q);
    let tables_q: Vec<Vec<Vec<u64>>> = k.mult.iter().map(|m| mat_mod_q(m, q)).collect();

    // radical of A = O/qO
    let mut e = 1u32;
    let mut qe = q;
    while (qe as u128) < n as u128 {
        qe = qe.saturating_mul(q);
        e += 1;
    }
    let mut frob_rows: Vec<Vec<u64>> = Vec::with_capacity(n);
    for kk in 0..n {
        let mut x = vec![0u64; n];
        x[kk] = 1;
        for _ in 0..e {
            x = fq_coords_pow(&x, q, &tables_q, q);
        }
        frob_rows.push(x);
    }
    let rad = fq_left_kernel(&frob_rows, q);

    // quotient B = A / radical via echelon of the radical
    let quot = FqQuotient::new(&rad, n, q);
    let m = quot.dim();
    let one_q: Vec<u64> = k
        .one
        .iter()
        .map(|c| c.mod_floor(&qb).to_u64().unwrap())
        .collect();
    let b_mul = |x: &[u64], y: &[u64]| -> Vec<u64> {
        let prod = fq_coords_mul(&quot.lift(x), &quot.lift(y), &tables_q, q);
        quot.project(&prod)
    };
    let b_one = quot.project(&one_q);

    // split B into its simple components
    struct Component {
        basis: Vec<Vec<u64>>,
        identity: Vec<u64>,
    }
    let mut work: Vec<Component> = vec![Component {
        basis: {
            let mut rows = vec![];
            for c in 0..m {
                let mut v = vec![0u64; m];
                v[c] = 1;
                rows.push(v);
            }
            rows
        },
        identity: b_one.clone(),
    }];
    let mut fields: Vec<Component> = vec![];
    let mut rng_counter: u64 = 0;
    while let Some(comp) = work.pop() {
        let s = comp.basis.len();
        if s == 1 {
            fields.push(comp);
            continue;
        }
        // find an element whose minimal polynomial splits the component
        let mut attempt = 0usize;
        loop {
            if attempt > 200 {
                return Err(KlocError::EffortExceeded(format!(
                    "algebra splitting at q = {q}"
                )));
            }
            let b: Vec<u64> = if attempt < s {
                comp.basis[attempt].clone()
            } else {
                // deterministic pseudo-random combination
                use rand::{Rng, SeedableRng};
                let mut rng =
                    rand_chacha::ChaCha8Rng::seed_from_u64(rng_counter ^ 0xA5A5_5A5A);
                rng_counter += 1;
                let mut v = vec![0u64; m];
                for row in &comp.basis {
                    let c: u64 = rng.gen_range(0..q);
                    for t in 0..m {
                        v[t] = ((v[t] as u128 + c as u128 * row[t] as u128) % q as u128) as u64;
                    }
                }
                v
            };
            attempt += 1;
            let minpoly = fq_min_poly(&b, &comp.identity, &b_mul, s, q);
            let d = fq_degree(&minpoly);
            let factors = factor_mod(&fq_to_zpoly(&minpoly), q, 11);
            if factors.len() == 1 && factors[0].1 == 1 {
                if d == s {
                    // primitive element with irreducible minimal polynomial:
                    // the component is a field
                    fields.push(comp);
                    break;
                }
                // b generates a proper subfield; try another element
                continue;
            }
            // idempotents by CRT across the coprime factors
            assert!(factors.iter().all(|(_, e)| *e == 1), "étale algebra");
            for (ml, _) in &factors {
                let rest = fq_div_all_but(&minpoly, ml, q);
                let inv = fq_inv_mod(&rest, ml, q);
                let h = fq_rem(&fq_mul(&rest, &inv, q), &minpoly, q);
                // e_l = h(b), by Horner in the algebra
                let mut el = vec![0u64; m];
                for c in h.iter().rev() {
                    el = b_mul(&el, &b);
                    for t in 0..m {
                        el[t] = ((el[t] as u128
                            + *c as u128 * comp.identity[t] as u128)
                            % q as u128) as u64;
                    }
                }
                // subcomponent basis = e_l * basis, reduced to independent rows
                let sub_rows: Vec<Vec<u64>> =
                    comp.basis.iter().map(|r| b_mul(&el, r)).collect();
                let sub_basis = fq_row_space_basis(&sub_rows, q);
                if !sub_basis.is_empty() {
                    work.push(Component {
                        basis: sub_basis,
                        identity: el,
                    });
                }
            }
            break;
        }
    }

    // each field component gives a prime: kernel of O -> component
    let mut out = vec![];
    for comp in &fields {
        let fdeg = comp.basis.len();
        // map A -> B -> e_j B, rows indexed by the standard basis of A
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n);
        for kk in 0..n {
            let mut x = vec![0u64; n];
            x[kk] = 1;
            let img = b_mul(&quot.project(&x), &comp.identity);
            rows.push(img);
        }
        let kernel = fq_left_kernel(&rows, q);
        let mut lat_rows: Vec<Vec<BigInt>> = kernel
            .iter()
            .map(|v| v.iter().map(|&c| BigInt::from(c)).collect())
            .collect();
        for t in 0..n {
            let mut r = vec![BigInt::zero(); n];
            r[t] = qb.clone();
            lat_rows.push(r);
        }
        let h = hnf(&IntMatrix::from_rows(lat_rows));
        let mut mmat = IntMatrix::zero(n, n);
        for r in 0..n {
            for c in 0..n {
                mmat.set(r, c, h.get(r, c).clone());
            }
        }
        let ideal = IdealHNF {
            matrix: mmat,
            den: BigInt::one(),
            field_fingerprint: k.fingerprint(),
        };
        assert_eq!(ideal.norm(k), qb.pow(fdeg as u32), "prime norm mismatch");
        out.push(PrimeIdealFactor {
            ideal,
            p: q,
            e: 0, // filled below
            f: fdeg as u32,
        });
    }

    // ramification indices
    if out.len() == 1 {
        let f = out[0].f;
        assert_eq!(n as u32 % f, 0);
        out[0].e = n as u32 / f;
    } else {
        let q_o = {
            let mut gens = vec![];
            let mut one_q = vec![BigInt::zero(); n];
            for (t, c) in k.one.iter().enumerate() {
                one_q[t] = c * &qb;
            }
            gens.push(one_q);
            ideal_from_generators(k, &gens, &BigInt::zero())
        };
        let mut remaining = n as u32;
        for idx in 0..out.len() {
            if idx == out.len() - 1 {
                assert_eq!(remaining % out[idx].f, 0);
                out[idx].e = remaining / out[idx].f;
                break;
            }
            let mut eord = 1u32;
            let mut pk = out[idx].ideal.clone();
            loop {
                pk = ideal_mul(k, &pk, &out[idx].ideal)?;
                if ideal_contains_ideal(k, &pk, &q_o) {
                    eord += 1;
                } else {
                    break;
                }
            }
            out[idx].e = eord;
            remaining -= eord * out[idx].f;
        }
    }
    Ok(out)
}

/// Quotient of F_q^n by the row space of `rad`, with a section.
struct FqQuotient {
    q: u64,
    n: usize,
    /// echelonized radical rows
    ech: Vec<Vec<u64>>,
    /// pivot column of each echelon row
    pivots: Vec<usize>,
    /// complement (free) columns, in order — the quotient coordinates
    free_cols: Vec<usize>,
}

impl FqQuotient {
    fn new(rad: &[Vec<u64>], n: usize, q: u64) -> Self {
        let mut ech: Vec<Vec<u64>> = vec![];
        let mut pivots: Vec<usize> = vec![];
        for row in rad {
            let mut r = row.clone();
            for (er, &pc) in ech.iter().zip(&pivots) {
                if r[pc] != 0 {
                    let f = r[pc];
                    for c in 0..n {
                        let sub = (f as u128 * er[c] as u128) % q as u128;
                        r[c] = ((r[c] as u128 + q as u128 - sub) % q as u128) as u64;
                    }
                }
            }
            if let Some(pc) = (0..n).find(|&c| r[c] != 0) {
                let inv = mod_inv_u64(r[pc], q);
                for c in 0..n {
                    r[c] = ((r[c] as u128 * inv as u128) % q as u128) as u64;
                }
                ech.push(r);
                pivots.push(pc);
            }
        }
        // back-substitute to reduced echelon form
        for i in 0..ech.len() {
            for j in 0..ech.len() {
                if i != j && ech[i][pivots[j]] != 0 {
                    let f = ech[i][pivots[j]];
                    let rj = ech[j].clone();
                    for c in 0..n {
                        let sub = (f as u128 * rj[c] as u128) % q as u128;
                        ech[i][c] =
                            ((ech[i][c] as u128 + q as u128 - sub) % q as u128) as u64;
                    }
                }
            }
        }
        let free_cols: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        FqQuotient {
            q,
            n,
            ech,
            pivots,
            free_cols,
        }
    }

    fn dim(&self) -> usize {
        self.free_cols.len()
    }

    /// Reduce an ambient vector modulo the radical and read off quotient
    /// coordinates.
    fn project(&self, x: &[u64]) -> Vec<u64> {
        let q = self.q;
        let mut r = x.to_vec();
        for (er, &pc) in self.ech.iter().zip(&self.pivots) {
            if r[pc] != 0 {
                let f = r[pc];
                for c in 0..self.n {
                    let sub = (f as u128 * er[c] as u128) % q as u128;
                    r[c] = ((r[c] as u128 + q as u128 - sub) % q as u128) as u64;
                }
            }
        }
        self.free_cols.iter().map(|&c| r[c]).collect()
    }

    /// Section: quotient coordinates -> ambient representative.
    fn lift(&self, y: &[u64]) -> Vec<u64> {
        let mut v = vec![0u64; self.n];
        for (i, &c) in self.free_cols.iter().enumerate() {
            v[c] = y[i];
        }
        v
    }
}

/// Minimal polynomial of `b` over F_q inside a commutative algebra with the
/// given identity and multiplication, dimension bound `s`.
fn fq_min_poly(
    b: &[u64],
    identity: &[u64],
    mul: &dyn Fn(&[u64], &[u64]) -> Vec<u64>,
    s: usize,
    q: u64,
) -> FqPoly {
    let m = b.len();
    let mut powers: Vec<Vec<u64>> = vec![identity.to_vec()];
    loop {
        let d = powers.len();
        // is the last power in the span of the previous ones?
        // solve: sum c_i powers[i] = powers[d-1+1]? -> build next power first
        let next = mul(powers.last().unwrap(), b);
        // solve c over F_q: [powers rows]^T c = next
        let mut mat: Vec<Vec<u64>> = (0..m)
            .map(|c| (0..d).map(|r| powers[r][c]).collect())
            .collect();
        for (rowi, row) in mat.iter_mut().enumerate() {
            row.push(next[rowi]);
        }
        if let Some(coeffs) = fq_solve(&mat, d, q) {
            // x^d - sum coeffs_i x^i
            let mut mp: FqPoly = coeffs.iter().map(|&c| (q - c % q) % q).collect();
            mp.push(1);
            while mp.last() == Some(&0) {
                mp.pop();
            }
            return mp;
        }
        powers.push(next);
        assert!(powers.len() <= s + 1, "minimal polynomial search overran");
    }
}

/// Solve an overdetermined consistent system: columns 0..d are coefficients,
/// last column the target. Returns None if inconsistent.
fn fq_solve(aug: &[Vec<u64>], d: usize, q: u64) -> Option<Vec<u64>> {
    let rows = aug.len();
    let mut a = aug.to_vec();
    let mut pivot_rows: Vec<(usize, usize)> = vec![]; // (col, row)
    let mut rank = 0usize;
    for c in 0..d {
        let piv = (rank..rows).find(|&r| a[r][c] % q != 0);
        let Some(piv) = piv else { continue };
        a.swap(rank, piv);
        let inv = mod_inv_u64(a[rank][c] % q, q);
        for x in a[rank].iter_mut() {
            *x = ((*x as u128 * inv as u128) % q as u128) as u64;
        }
        for r in 0..rows {
            if r != rank && a[r][c] % q != 0 {
                let f = a[r][c] % q;
                for cc in 0..=d {
                    let sub = (f as u128 * a[rank][cc] as u128) % q as u128;
                    a[r][cc] = ((a[r][cc] as u128 + q as u128 - sub) % q as u128) as u64;
                }
            }
        }
        pivot_rows.push((c, rank));
        rank += 1;
    }
    // consistency: rows beyond rank must have zero target
    for r in rank..rows {
        if a[r][d] % q != 0 {
            return None;
        }
    }
    let mut x = vec![0u64; d];
    for &(c, r) in &pivot_rows {
        x[c] = a[r][d] % q;
    }
    Some(x)
}

/// Row-space basis over F_q (echelonized, zero rows dropped).
fn fq_row_space_basis(rows: &[Vec<u64>], q: u64) -> Vec<Vec<u64>> {
    let n = if rows.is_empty() { 0 } else { rows[0].len() };
    let mut ech: Vec<Vec<u64>> = vec![];
    let mut pivots: Vec<usize> = vec![];
    for row in rows {
        let mut r = row.clone();
        for (er, &pc) in ech.iter().zip(&pivots) {
            if r[pc] != 0 {
                let f = r[pc];
                for c in 0..n {
                    let sub = (f as u128 * er[c] as u128) % q as u128;
                    r[c] = ((r[c] as u128 + q as u128 - sub) % q as u128) as u64;
                }
            }
        }
        if let Some(pc) = (0..n).find(|&c| r[c] != 0) {
            let inv = mod_inv_u64(r[pc], q);
            for c in 0..n {
                r[c] = ((r[c] as u128 * inv as u128) % q as u128) as u64;
            }
            ech.push(r);
            pivots.push(pc);
        }
    }
    ech
}

/// `minpoly / ml` (exact division over F_q).
fn fq_div_all_but(minpoly: &FqPoly, ml: &FqPoly, q: u64) -> FqPoly {
    crate::poly::fq_div_exact(minpoly, ml, q)
}

// ---------------------------------------------------------------------------
// automorphisms
// ---------------------------------------------------------------------------

/// A field automorphism, stored as its matrix on the integral basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldAutomorphism {
    /// coordinates of σ(θ)
    pub image: Vec<BigInt>,
    /// row j = coordinates of σ(w_j)
    pub matrix: IntMatrix,
}

impl FieldAutomorphism {
    pub fn apply(&self, coords: &[BigInt]) -> Vec<BigInt> {
        vec_mat(coords, &self.matrix)
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &FieldAutomorphism) -> FieldAutomorphism {
        let matrix = other.matrix.mul(&self.matrix);
        let image = vec_mat(&other.image, &self.matrix);
        FieldAutomorphism { image, matrix }
    }

    pub fn is_identity(&self, k: &NumberField) -> bool {
        self.matrix == IntMatrix::identity(k.degree())
    }
}

/// All automorphisms of K/Q, found by recognizing each complex root of f as
/// an element of O_K and verifying `f(σθ) = 0` exactly.
pub fn automorphisms(k: &NumberField) -> Result<Vec<FieldAutomorphism>> {
    let n = k.degree();
    if n == 1 {
        return Ok(vec![FieldAutomorphism {
            image: k.theta_coords(),
            matrix: IntMatrix::identity(1),
        }]);
    }
    let mut out = vec![];
    for j in 0..n {
        let target = k.roots()[j].clone();
        let Some(image) = recognize_integral_element(k, &target) else {
            continue;
        };
        // exact verification: f(image) = 0 in O_K
        let val = k.el_eval_poly(k.poly(), &image);
        if !val.iter().all(|c| c.is_zero()) {
            continue;
        }
        let matrix = automorphism_matrix(k, &image)?;
        if !out.contains(&FieldAutomorphism {
            image: image.clone(),
            matrix: matrix.clone(),
        }) {
            out.push(FieldAutomorphism { image, matrix });
        }
    }
    if out.is_empty() {
        return Err(KlocError::PrecisionExhausted(k.prec));
    }
    Ok(out)
}

/// The identity automorphism of K.
pub fn identity_automorphism(k: &NumberField) -> FieldAutomorphism {
    FieldAutomorphism {
        image: k.theta_coords(),
        matrix: IntMatrix::identity(k.degree()),
    }
}

/// Builds the automorphism sending θ to the element with the given
/// coordinates, after verifying `f(image) = 0` exactly.
pub fn automorphism_from_image(k: &NumberField, image: Vec<BigInt>) -> Result<FieldAutomorphism> {
    let val = k.el_eval_poly(k.poly(), &image);
    if !val.iter().all(|c| c.is_zero()) {
        return Err(KlocError::PrecisionExhausted(k.prec));
    }
    let matrix = automorphism_matrix(k, &image)?;
    Ok(FieldAutomorphism { image, matrix })
}

/// Matrix of σ on the integral basis from the image of θ.
fn automorphism_matrix(k: &NumberField, sigma_theta: &[BigInt]) -> Result<IntMatrix> {
    let n = k.degree();
    let mut m = IntMatrix::zero(n, n);
    for j in 0..n {
        // w_j = g_j(θ)/den  =>  σ(w_j) = g_j(σθ)/den
        let g = ZPoly::new(k.basis.row(j).to_vec());
        let num = k.el_eval_poly(&g, sigma_theta);
        for (t, c) in num.iter().enumerate() {
            let (q, r) = c.div_rem(&k.den);
            if !r.is_zero() {
                return Err(KlocError::PrecisionExhausted(k.prec));
            }
            m.set(j, t, q);
        }
    }
    Ok(m)
}

/// Finds integer coordinates y with Σ y_k w_k ≈ target under the first
/// embedding, by LLL on an integer-relation lattice; caller must verify.
pub fn recognize_integral_element(k: &NumberField, target: &CFx) -> Option<Vec<BigInt>> {
    let n = k.degree();
    let prec = k.prec;
    let shift = prec.saturating_sub(16);
    let scale = |f: &Fx| -> BigInt {
        // round(f * 2^shift)
        let m = &f.m;
        if f.prec >= shift {
            crate::numeric::shr_round(m, f.prec - shift)
        } else {
            m << (shift - f.prec)
        }
    };
    // embedding values of the basis under root 0
    let mut emb: Vec<(BigInt, BigInt)> = vec![];
    for j in 0..n {
        let mut e = vec![BigInt::zero(); n];
        e[j] = BigInt::one();
        let v = k.embed(&e, 0);
        emb.push((scale(&v.re), scale(&v.im)));
    }
    let t = (scale(&target.re), scale(&target.im));
    if t.0.is_zero() && t.1.is_zero() {
        // a zero target row would make the recognition lattice degenerate
        return Some(vec![BigInt::zero(); n]);
    }
    // lattice rows: [I_n | C*emb], plus target row [0 | C*t]
    let mut b = IntMatrix::zero(n + 1, n + 2);
    for j in 0..n {
        b.set(j, j, BigInt::one());
        b.set(j, n, emb[j].0.clone());
        b.set(j, n + 1, emb[j].1.clone());
    }
    b.set(n, n, t.0.clone());
    b.set(n, n + 1, t.1.clone());
    let gram = b.mul(&b.transpose());
    let red = lll_gram(&gram);
    // find a reduced vector with target coefficient ±1 and small residual
    for r in 0..n + 1 {
        let coeffs = red.transform.row(r);
        let m = &coeffs[n];
        if m.abs() != BigInt::one() {
            continue;
        }
        let sign = if m.is_negative() {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        let y: Vec<BigInt> = (0..n).map(|j| &coeffs[j] * &sign).collect();
        // residual check: |Σ y emb - t| must be tiny relative to the scale
        let val = k.embed(&y, 0);
        let dr = val.re.sub(&target.re).abs();
        let di = val.im.sub(&target.im).abs();
        let tol = Fx::from_f64(2f64.powi(-((prec / 2) as i32)), prec);
        if dr.m <= tol.m && di.m <= tol.m {
            return Some(y);
        }
    }
    None
}

/// Candidate representations of `target` (a value at the field's embedding
/// 0) as `g(θ) / den` over the power basis, denominators allowed. The
/// candidates are short lattice vectors and only numerically plausible;
/// callers must verify the intended algebraic identity exactly.
pub(crate) fn recognize_power_coords(k: &NumberField, target: &CFx) -> Vec<(ZPoly, BigInt)> {
    let n = k.degree();
    let prec = k.prec;
    let shift = prec.saturating_sub(16);
    let scale = |f: &Fx| -> BigInt {
        let m = &f.m;
        if f.prec >= shift {
            crate::numeric::shr_round(m, f.prec - shift)
        } else {
            m << (shift - f.prec)
        }
    };
    // embedding values of the power basis under root 0
    let z = &k.roots[0];
    let mut pw = CFx::from_int(&BigInt::one(), prec);
    let mut emb: Vec<(BigInt, BigInt)> = vec![];
    for j in 0..n {
        if j > 0 {
            pw = pw.mul(z);
        }
        emb.push((scale(&pw.re), scale(&pw.im)));
    }
    let t = (scale(&target.re), scale(&target.im));
    // lattice rows: [I_{n+1} | C*emb], last row carrying the target
    let mut b = IntMatrix::zero(n + 1, n + 3);
    for j in 0..n {
        b.set(j, j, BigInt::one());
        b.set(j, n + 1, emb[j].0.clone());
        b.set(j, n + 2, emb[j].1.clone());
    }
    b.set(n, n, BigInt::one());
    b.set(n, n + 1, t.0);
    b.set(n, n + 2, t.1);
    let gram = b.mul(&b.transpose());
    let red = lll_gram(&gram);
    let mut out = vec![];
    for r in 0..n + 1 {
        let coeffs = red.transform.row(r);
        let q = &coeffs[n];
        if q.is_zero() {
            continue;
        }
        // a short vector means Σ a_j θ^j + q·target ≈ 0
        let (num, den): (Vec<BigInt>, BigInt) = if q.is_negative() {
            (coeffs[..n].to_vec(), -q)
        } else {
            (coeffs[..n].iter().map(|c| -c).collect(), q.clone())
        };
        let mut g = den.clone();
        for c in &num {
            g = g.gcd(c);
        }
        out.push((
            ZPoly::new(num.into_iter().map(|c| c / &g).collect()),
            &den / &g,
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// principality testing
// ---------------------------------------------------------------------------

pub struct PrincipalityOptions {
    /// multiplies the AM-GM enumeration radius
    pub safety_factor: f64,
    pub max_candidates: usize,
}

impl Default for PrincipalityOptions {
    fn default() -> Self {
        PrincipalityOptions {
            safety_factor: 1.2,
            max_candidates: 2_000_000,
        }
    }
}

pub struct PrincipalityResult {
    /// generator coordinates, if found
    pub generator: Option<Vec<BigInt>>,
    /// true when a "no generator" answer is exhaustive (finite unit group,
    /// i.e. Q or imaginary quadratic)
    pub certified: bool,
}

/// Searches for a generator of an integral ideal among the short vectors of
/// its Minkowski lattice.
pub fn is_principal(
    k: &NumberField,
    ideal: &IdealHNF,
    opts: &PrincipalityOptions,
) -> Result<PrincipalityResult> {
    assert!(ideal.is_integral());
    let n = k.degree();
    let norm = ideal.norm(k);
    let finite_units = n == 1 || (n == 2 && k.discriminant().is_negative());

    let shift = 64u32;
    let gram = t2_gram(k, ideal, shift);

    let norm_f = norm.to_f64().unwrap_or(f64::MAX);
    let disc_f = k.discriminant().abs().to_f64().unwrap_or(f64::MAX);
    let base_bound = if finite_units {
        // every generator has T2 = n * N^(2/n) exactly
        (n as f64) * norm_f.powf(2.0 / n as f64) * 1.000001
    } else {
        opts.safety_factor * (n as f64) * (norm_f * norm_f * disc_f).powf(1.0 / n as f64)
    };
    let bound_scaled = {
        use num_traits::FromPrimitive;
        BigInt::from_f64((base_bound * 2f64.powi(shift as i32)).ceil())
            .ok_or_else(|| KlocError::EffortExceeded("principality bound overflow".into()))?
    };

    let red = lll_gram(&gram);
    let Some(cands) = enumerate_short_vectors(
        &red.gram,
        &EnumOptions {
            bound: bound_scaled,
            max_candidates: opts.max_candidates,
        },
    ) else {
        return Err(KlocError::EffortExceeded("principality enumeration".into()));
    };
    for x in cands {
        // back to ideal-basis coordinates, then to integral-basis coordinates
        let xi: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
        let in_ideal_basis = vec_mat(&xi, &red.transform);
        let coords = vec_mat(&in_ideal_basis, &ideal.matrix);
        let nrm = k.el_norm(&coords).abs();
        if nrm == norm {
            // exact confirmation: αO = I
            let a_ideal = principal_ideal(k, &coords);
            if a_ideal == *ideal {
                return Ok(PrincipalityResult {
                    generator: Some(coords),
                    certified: true,
                });
            }
        }
    }
    Ok(PrincipalityResult {
        generator: None,
        certified: finite_units,
    })
}

/// Gram matrix of the ideal lattice under the T2 form (Σ over all complex
/// embeddings of σ(x)·conj(σ(y))), scaled by 2^shift and rounded.
fn t2_gram(k: &NumberField, ideal: &IdealHNF, shift: u32) -> IntMatrix {
    let n = k.degree();
    let prec = k.prec;
    let emb: Vec<Vec<CFx>> = (0..n)
        .map(|r| (0..n).map(|j| k.embed(ideal.matrix.row(r), j)).collect())
        .collect();
    let mut gram = IntMatrix::zero(n, n);
    for r in 0..n {
        for s in 0..n {
            let mut acc = Fx::zero(prec);
            for j in 0..n {
                let term = emb[r][j].mul(&emb[s][j].conj());
                acc = acc.add(&term.re);
            }
            let scaled = if acc.prec >= shift {
                crate::numeric::shr_round(&acc.m, acc.prec - shift)
            } else {
                &acc.m << (shift - acc.prec)
            };
            gram.set(r, s, scaled);
        }
    }
    // symmetrize away numeric noise
    for r in 0..n {
        for s in r + 1..n {
            let avg = (gram.get(r, s) + gram.get(s, r)) / BigInt::from(2);
            gram.set(r, s, avg.clone());
            gram.set(s, r, avg);
        }
    }
    gram
}

/// Nonzero elements of an integral ideal with T2 norm at most
/// `radius_factor * n * (N(I)² |disc|)^(1/n)` (one per antipodal pair, small
/// first). Candidates are exact lattice points; the T2 radius itself is a
/// floating-point cutoff.
pub fn short_ideal_elements(
    k: &NumberField,
    ideal: &IdealHNF,
    radius_factor: f64,
    max_candidates: usize,
) -> Result<Vec<Vec<BigInt>>> {
    assert!(ideal.is_integral());
    let n = k.degree();
    let shift = 64u32;
    let gram = t2_gram(k, ideal, shift);
    let norm_f = ideal.norm(k).to_f64().unwrap_or(f64::MAX);
    let disc_f = k.discriminant().abs().to_f64().unwrap_or(f64::MAX);
    let radius = radius_factor * (n as f64) * (norm_f * norm_f * disc_f).powf(1.0 / n as f64);
    let bound_scaled = {
        use num_traits::FromPrimitive;
        BigInt::from_f64((radius * 2f64.powi(shift as i32)).ceil())
            .ok_or_else(|| KlocError::EffortExceeded("short-vector bound overflow".into()))?
    };
    let red = lll_gram(&gram);
    let Some(mut cands) = enumerate_short_vectors(
        &red.gram,
        &EnumOptions {
            bound: bound_scaled,
            max_candidates,
        },
    ) else {
        return Err(KlocError::EffortExceeded("short-vector enumeration".into()));
    };
    // order by quadratic-form value so callers see small elements first
    let qval = |x: &Vec<i64>| -> BigInt {
        let mut acc = BigInt::zero();
        for r in 0..n {
            for s in 0..n {
                acc += BigInt::from(x[r]) * BigInt::from(x[s]) * red.gram.get(r, s);
            }
        }
        acc
    };
    cands.sort_by_cached_key(qval);
    Ok(cands
        .into_iter()
        .map(|x| {
            let xi: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
            let in_ideal_basis = vec_mat(&xi, &red.transform);
            vec_mat(&in_ideal_basis, &ideal.matrix)
        })
        .collect())
}

/// Minkowski bound: every ideal class contains an integral ideal of norm at
/// most this value.
pub fn minkowski_bound(k: &NumberField) -> BigInt {
    let n = k.degree() as u32;
    if n == 1 {
        return BigInt::one();
    }
    let (_, r2) = k.signature();
    let mut fact = 1f64;
    for i in 2..=n {
        fact *= i as f64;
    }
    let nn = (n as f64).powi(n as i32);
    let disc_f = k.discriminant().abs().to_f64().unwrap_or(f64::MAX);
    let b = fact / nn * (4.0 / std::f64::consts::PI).powi(r2 as i32) * disc_f.sqrt();
    BigInt::from((b * (1.0 + 1e-9)).ceil() as i128)
}

/// Transports an ideal along an automorphism: σ(I).
pub fn apply_automorphism(k: &NumberField, sigma: &FieldAutomorphism, i: &IdealHNF) -> IdealHNF {
    let n = k.degree();
    let rows: Vec<Vec<BigInt>> = (0..n).map(|r| sigma.apply(i.matrix.row(r))).collect();
    let h = hnf(&IntMatrix::from_rows(rows));
    let mut m = IntMatrix::zero(n, n);
    for r in 0..n {
        for c in 0..n {
            m.set(r, c, h.get(r, c).clone());
        }
    }
    IdealHNF {
        matrix: m,
        den: i.den.clone(),
        field_fingerprint: i.field_fingerprint,
    }
}
