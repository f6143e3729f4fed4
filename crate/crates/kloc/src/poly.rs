//! Integer polynomials.
//!
//! Covers what the number-field layer needs: parsing the CLI input grammar,
//! exact arithmetic, resultants and discriminants, factorization modulo a
//! prime (squarefree / distinct-degree / equal-degree), and a certified
//! factorization over Z that combines complex roots into integer factors and
//! verifies every factor by exact division.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KlocError, Result};
use crate::intlinalg::IntMatrix;
use crate::numeric::{zpoly_roots, CFx};

/// Polynomial with integer coefficients, stored low degree first.
/// Invariant: the last coefficient is nonzero (the zero polynomial is empty).
#[derive(Clone, PartialEq, Eq)]
pub struct ZPoly {
    coeffs: Vec<BigInt>,
}

impl ZPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        ZPoly { coeffs }
    }

    pub fn zero() -> Self {
        ZPoly { coeffs: vec![] }
    }

    pub fn constant(c: BigInt) -> Self {
        ZPoly::new(vec![c])
    }

    pub fn one() -> Self {
        ZPoly::constant(BigInt::one())
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        ZPoly::new(vec![BigInt::zero(), BigInt::one()])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        ZPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Leading coefficient (zero for the zero polynomial).
    pub fn lc(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().map_or(false, |c| c.is_one())
    }

    pub fn neg(&self) -> ZPoly {
        ZPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn add(&self, o: &ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            v.push(self.coeff(k) + o.coeff(k));
        }
        ZPoly::new(v)
    }

    pub fn sub(&self, o: &ZPoly) -> ZPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &ZPoly) -> ZPoly {
        if self.is_zero() || o.is_zero() {
            return ZPoly::zero();
        }
        let mut v = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        ZPoly::new(v)
    }

    pub fn mul_scalar(&self, k: &BigInt) -> ZPoly {
        ZPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, k: usize) -> ZPoly {
        if self.is_zero() {
            return ZPoly::zero();
        }
        let mut v = vec![BigInt::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        ZPoly { coeffs: v }
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluate at a rational a/b with b > 0, scaled: returns `b^deg * f(a/b)`.
    pub fn eval_scaled(&self, a: &BigInt, b: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        let mut bp = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * a + c * &bp;
            bp *= b;
        }
        // bp overshoots by one factor of b; acc already has b^deg distributed
        acc
    }

    pub fn derivative(&self) -> ZPoly {
        if self.coeffs.len() <= 1 {
            return ZPoly::zero();
        }
        ZPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c * BigInt::from(k as u64 + 1))
                .collect(),
        )
    }

    /// gcd of the coefficients (positive; 0 for the zero polynomial).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        g
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> ZPoly {
        if self.is_zero() {
            return ZPoly::zero();
        }
        let mut g = self.content();
        if self.lc().is_negative() {
            g = -g;
        }
        ZPoly::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Exact division over Z; `None` if `d` does not divide `self` exactly.
    pub fn div_exact(&self, d: &ZPoly) -> Option<ZPoly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(ZPoly::zero());
        }
        if self.degree() < d.degree() {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let dn = d.coeffs.len();
        let lead = d.coeffs.last().unwrap();
        let qlen = rem.len() - dn + 1;
        let mut q = vec![BigInt::zero(); qlen];
        for k in (0..qlen).rev() {
            let top = rem[k + dn - 1].clone();
            if top.is_zero() {
                continue;
            }
            let (qk, r) = top.div_rem(lead);
            if !r.is_zero() {
                return None;
            }
            for j in 0..dn {
                rem[k + j] -= &qk * &d.coeffs[j];
            }
            q[k] = qk;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(ZPoly::new(q))
    }

    /// Pseudo-remainder: `lc(d)^(deg−deg_d+1) * self mod d`.
    fn pseudo_rem(&self, d: &ZPoly) -> ZPoly {
        assert!(!d.is_zero());
        let mut r = self.clone();
        let lead = d.lc();
        let dd = d.degree();
        while !r.is_zero() && r.degree() >= dd {
            let k = r.degree() - dd;
            let c = r.lc();
            r = r.mul_scalar(&lead).sub(&d.mul_scalar(&c).shift(k));
        }
        r
    }

    /// gcd over Z via the primitive PRS, returned primitive with positive lc.
    pub fn gcd(&self, o: &ZPoly) -> ZPoly {
        if self.is_zero() {
            return o.primitive_part();
        }
        if o.is_zero() {
            return self.primitive_part();
        }
        let cont = self.content().gcd(&o.content());
        let mut a = self.primitive_part();
        let mut b = o.primitive_part();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            let r = a.pseudo_rem(&b);
            if r.is_zero() {
                let g = b.primitive_part();
                return if g.is_constant() {
                    ZPoly::constant(cont)
                } else {
                    g.mul_scalar(&cont)
                };
            }
            a = b;
            b = r.primitive_part();
        }
    }

    /// Yun's squarefree decomposition: `self = content * prod g_j^j` with the
    /// `g_j` primitive, squarefree and pairwise coprime.
    pub fn squarefree_decomposition(&self) -> Vec<(ZPoly, u32)> {
        assert!(!self.is_zero());
        let f = self.primitive_part();
        if f.is_constant() {
            return vec![];
        }
        let df = f.derivative();
        let a0 = f.gcd(&df);
        if a0.is_constant() {
            return vec![(f, 1)];
        }
        let mut out = vec![];
        let mut c = f.div_exact(&a0).expect("gcd divides");
        let mut d = df.div_exact(&a0).expect("gcd divides").sub(&c.derivative());
        let mut i = 1u32;
        while !c.is_constant() {
            let h = c.gcd(&d);
            if !h.is_constant() {
                out.push((h.clone(), i));
            }
            c = c.div_exact(&h).expect("gcd divides");
            d = d.div_exact(&h).expect("gcd divides").sub(&c.derivative());
            i += 1;
        }
        out
    }

    /// Resultant of `self` and `o` via the Sylvester matrix.
    pub fn resultant(&self, o: &ZPoly) -> BigInt {
        if self.is_zero() || o.is_zero() {
            return BigInt::zero();
        }
        let m = self.degree();
        let n = o.degree();
        if m == 0 {
            return self.coeff(0).pow(n as u32);
        }
        if n == 0 {
            return o.coeff(0).pow(m as u32);
        }
        let size = m + n;
        let mut s = IntMatrix::zero(size, size);
        for r in 0..n {
            for k in 0..=m {
                s.set(r, r + (m - k), self.coeff(k));
            }
        }
        for r in 0..m {
            for k in 0..=n {
                s.set(n + r, r + (n - k), o.coeff(k));
            }
        }
        s.det()
    }

    /// Discriminant: `(-1)^(m(m-1)/2) res(f, f') / lc(f)`.
    pub fn discriminant(&self) -> BigInt {
        let m = self.degree();
        assert!(m >= 1);
        let res = self.resultant(&self.derivative());
        let signed = if (m * (m - 1) / 2) % 2 == 1 { -res } else { res };
        let (q, r) = signed.div_rem(&self.lc());
        debug_assert!(r.is_zero());
        q
    }

    /// Substitute `x -> k*x`.
    pub fn scale_arg(&self, k: &BigInt) -> ZPoly {
        let mut v = Vec::with_capacity(self.coeffs.len());
        let mut kp = BigInt::one();
        for c in &self.coeffs {
            v.push(c * &kp);
            kp *= k;
        }
        ZPoly::new(v)
    }

    /// Substitute `x -> x + k`.
    pub fn translate_arg(&self, k: &BigInt) -> ZPoly {
        let mut acc = ZPoly::zero();
        for c in self.coeffs.iter().rev() {
            // acc = acc * (x + k) + c
            acc = acc.shift(1).add(&acc.mul_scalar(k)).add(&ZPoly::constant(c.clone()));
        }
        acc
    }

    /// `||f||_2^2`.
    pub fn norm2_sq(&self) -> BigInt {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

impl fmt::Debug for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for k in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[k];
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit_coeff = mag.is_one() && k > 0;
            if !unit_coeff {
                write!(f, "{}", mag)?;
            }
            if k > 0 {
                if !unit_coeff {
                    write!(f, "*")?;
                }
                if k == 1 {
                    write!(f, "x")?;
                } else {
                    write!(f, "x^{}", k)?;
                }
            }
        }
        Ok(())
    }
}

/// Parses the input grammar
/// `poly := term (('+'|'-') term)*`, `term := [coeff]['*']['x'['^' exp]]`,
/// with variable `x` and whitespace ignored. A leading sign is allowed.
pub fn parse_poly(s: &str) -> Result<ZPoly> {
    let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err(KlocError::Parse("empty input".into()));
    }
    let mut pos = 0usize;
    let mut terms: Vec<(usize, BigInt)> = vec![];
    let mut sign: i32 = 1;
    if chars[0] == '+' || chars[0] == '-' {
        sign = if chars[0] == '-' { -1 } else { 1 };
        pos = 1;
    }
    let read_uint = |pos: &mut usize| -> Option<BigInt> {
        let start = *pos;
        while *pos < chars.len() && chars[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if *pos == start {
            None
        } else {
            let s: String = chars[start..*pos].iter().collect();
            Some(s.parse::<BigInt>().unwrap())
        }
    };
    loop {
        // one term
        let coeff = read_uint(&mut pos);
        let mut saw_star = false;
        if pos < chars.len() && chars[pos] == '*' {
            if coeff.is_none() {
                return Err(KlocError::Parse(format!("unexpected '*' at position {pos}")));
            }
            saw_star = true;
            pos += 1;
        }
        let (exp, saw_x) = if pos < chars.len() && chars[pos] == 'x' {
            pos += 1;
            if pos < chars.len() && chars[pos] == '^' {
                pos += 1;
                match read_uint(&mut pos) {
                    Some(e) => {
                        let e = e.to_usize().ok_or_else(|| {
                            KlocError::Parse("exponent out of range".into())
                        })?;
                        (e, true)
                    }
                    None => return Err(KlocError::Parse("missing exponent after '^'".into())),
                }
            } else {
                (1, true)
            }
        } else {
            if saw_star {
                return Err(KlocError::Parse("expected 'x' after '*'".into()));
            }
            (0, false)
        };
        if coeff.is_none() && !saw_x {
            return Err(KlocError::Parse(format!("expected term at position {pos}")));
        }
        let c = coeff.unwrap_or_else(BigInt::one);
        terms.push((exp, if sign < 0 { -c } else { c }));
        if pos == chars.len() {
            break;
        }
        match chars[pos] {
            '+' => sign = 1,
            '-' => sign = -1,
            c => {
                return Err(KlocError::Parse(format!(
                    "unexpected character '{c}' at position {pos}"
                )))
            }
        }
        pos += 1;
        if pos == chars.len() {
            return Err(KlocError::Parse("trailing sign".into()));
        }
    }
    let deg = terms.iter().map(|(e, _)| *e).max().unwrap_or(0);
    let mut v = vec![BigInt::zero(); deg + 1];
    for (e, c) in terms {
        v[e] += c;
    }
    Ok(ZPoly::new(v))
}

/// `Phi_{p^k}(x) = sum_{j<p} x^(j * p^(k-1))`, the cyclotomic polynomial of a
/// prime power.
pub fn cyclotomic_prime_power(p: u64, k: u32) -> ZPoly {
    assert!(k >= 1);
    let step = p.pow(k - 1) as usize;
    let mut v = vec![BigInt::zero(); step * (p as usize - 1) + 1];
    for j in 0..p as usize {
        v[j * step] = BigInt::one();
    }
    ZPoly::new(v)
}

// ---------------------------------------------------------------------------
// arithmetic modulo a prime q (q < 2^31), coefficients low degree first
// ---------------------------------------------------------------------------

pub type FqPoly = Vec<u64>;

fn fq_trim(a: &mut FqPoly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn fq_degree(a: &FqPoly) -> usize {
    a.len().saturating_sub(1)
}

pub fn fq_is_zero(a: &FqPoly) -> bool {
    a.is_empty()
}

/// Reduce an integer polynomial modulo q.
pub fn fq_from_zpoly(f: &ZPoly, q: u64) -> FqPoly {
    let qq = BigInt::from(q);
    let mut v: FqPoly = f
        .coeffs()
        .iter()
        .map(|c| c.mod_floor(&qq).to_u64().unwrap())
        .collect();
    fq_trim(&mut v);
    v
}

pub fn fq_to_zpoly(a: &FqPoly) -> ZPoly {
    ZPoly::new(a.iter().map(|&c| BigInt::from(c)).collect())
}

pub fn fq_mul(a: &FqPoly, b: &FqPoly, q: u64) -> FqPoly {
    assert!(q < (1 << 31));
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut v = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let t = v[i + j] as u128 + (x as u128) * (y as u128);
            v[i + j] = (t % q as u128) as u64;
        }
    }
    fq_trim(&mut v);
    v
}

fn inv_mod_u64(a: u64, q: u64) -> u64 {
    // extended Euclid
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
    assert_eq!(r0, 1, "not invertible mod q");
    (s0.rem_euclid(q as i128)) as u64
}

pub fn fq_rem(a: &FqPoly, m: &FqPoly, q: u64) -> FqPoly {
    assert!(!m.is_empty());
    let mut r = a.clone();
    fq_trim(&mut r);
    let dm = m.len() - 1;
    let inv = inv_mod_u64(*m.last().unwrap(), q);
    while r.len() > dm {
        let k = r.len() - 1 - dm;
        let c = ((*r.last().unwrap() as u128 * inv as u128) % q as u128) as u64;
        if c != 0 {
            for j in 0..m.len() {
                let sub = (c as u128 * m[j] as u128) % q as u128;
                let cur = r[k + j] as u128;
                r[k + j] = ((cur + q as u128 - sub) % q as u128) as u64;
            }
        }
        r.pop();
        fq_trim(&mut r);
        if r.len() <= dm {
            break;
        }
    }
    fq_trim(&mut r);
    r
}

/// Exact quotient `a / m` over F_q (remainder must be zero).
pub fn fq_div_exact(a: &FqPoly, m: &FqPoly, q: u64) -> FqPoly {
    assert!(!m.is_empty());
    let mut r = a.clone();
    fq_trim(&mut r);
    if r.len() < m.len() {
        assert!(r.is_empty(), "inexact division");
        return vec![];
    }
    let dm = m.len() - 1;
    let inv = inv_mod_u64(*m.last().unwrap(), q);
    let mut quo = vec![0u64; r.len() - dm];
    for k in (0..quo.len()).rev() {
        let top = r[k + dm];
        if top == 0 {
            continue;
        }
        let c = ((top as u128 * inv as u128) % q as u128) as u64;
        quo[k] = c;
        for j in 0..m.len() {
            let sub = (c as u128 * m[j] as u128) % q as u128;
            let cur = r[k + j] as u128;
            r[k + j] = ((cur + q as u128 - sub) % q as u128) as u64;
        }
    }
    assert!(r.iter().all(|&c| c == 0), "inexact division");
    fq_trim(&mut quo);
    quo
}

/// Inverse of `a` modulo `m` over F_q (extended Euclid; gcd(a, m) must be 1).
pub fn fq_inv_mod(a: &FqPoly, m: &FqPoly, q: u64) -> FqPoly {
    let mut r0 = m.clone();
    let mut r1 = fq_rem(a, m, q);
    fq_trim(&mut r0);
    fq_trim(&mut r1);
    let mut s0: FqPoly = vec![];
    let mut s1: FqPoly = vec![1];
    while !r1.is_empty() {
        // r0 = t * r1 + r, with t recovered by synthetic division
        let r = fq_rem(&r0, &r1, q);
        let diff = fq_sub(&r0, &r, q);
        let t = if diff.is_empty() {
            vec![]
        } else {
            fq_div_exact(&diff, &r1, q)
        };
        let new_s = fq_sub(&s0, &fq_mul(&t, &s1, q), q);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, new_s);
    }
    assert_eq!(fq_degree(&r0), 0, "fq_inv_mod: arguments not coprime");
    let inv = inv_mod_u64(r0[0], q);
    let mut out: FqPoly = s0
        .iter()
        .map(|&c| ((c as u128 * inv as u128) % q as u128) as u64)
        .collect();
    out = fq_rem(&out, m, q);
    out
}

fn fq_sub(a: &FqPoly, b: &FqPoly, q: u64) -> FqPoly {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0) as u128;
        let y = b.get(i).copied().unwrap_or(0) as u128;
        *o = ((x + q as u128 - y % q as u128) % q as u128) as u64;
    }
    fq_trim(&mut out);
    out
}

pub fn fq_gcd(a: &FqPoly, b: &FqPoly, q: u64) -> FqPoly {
    let mut a = a.clone();
    let mut b = b.clone();
    fq_trim(&mut a);
    fq_trim(&mut b);
    while !b.is_empty() {
        let r = fq_rem(&a, &b, q);
        a = b;
        b = r;
    }
    // monic normalization
    if let Some(&l) = a.last() {
        if l != 1 {
            let inv = inv_mod_u64(l, q);
            for c in a.iter_mut() {
                *c = ((*c as u128 * inv as u128) % q as u128) as u64;
            }
        }
    }
    a
}

/// `base^e mod m` over F_q, with a big-integer exponent.
pub fn fq_pow_mod(base: &FqPoly, e: &BigUint, m: &FqPoly, q: u64) -> FqPoly {
    let mut result: FqPoly = vec![1];
    let mut b = fq_rem(base, m, q);
    let bits = e.bits();
    for k in 0..bits {
        if e.bit(k) {
            result = fq_rem(&fq_mul(&result, &b, q), m, q);
        }
        if k + 1 < bits {
            b = fq_rem(&fq_mul(&b, &b, q), m, q);
        }
    }
    result
}

fn fq_derivative(a: &FqPoly, q: u64) -> FqPoly {
    if a.len() <= 1 {
        return vec![];
    }
    let mut v: FqPoly = a[1..]
        .iter()
        .enumerate()
        .map(|(k, &c)| ((c as u128 * ((k as u64 + 1) % q) as u128) % q as u128) as u64)
        .collect();
    fq_trim(&mut v);
    v
}

fn fq_monic(a: &FqPoly, q: u64) -> FqPoly {
    let mut a = a.clone();
    if let Some(&l) = a.last() {
        if l != 1 {
            let inv = inv_mod_u64(l, q);
            for c in a.iter_mut() {
                *c = ((*c as u128 * inv as u128) % q as u128) as u64;
            }
        }
    }
    a
}

/// Squarefree decomposition over F_q (handles p-th powers in characteristic q).
fn fq_squarefree_decomposition(f: &FqPoly, q: u64) -> Vec<(FqPoly, u32)> {
    let f = fq_monic(f, q);
    if f.len() <= 1 {
        return vec![];
    }
    let mut out: Vec<(FqPoly, u32)> = vec![];
    let df = fq_derivative(&f, q);
    if fq_is_zero(&df) {
        // f = g(x^q); over the prime field coefficients are their own q-th roots
        let mut g: FqPoly = vec![];
        for (k, &c) in f.iter().enumerate() {
            if c != 0 {
                assert_eq!(k % q as usize, 0, "derivative zero but not a q-th power");
                if g.len() <= k / q as usize {
                    g.resize(k / q as usize + 1, 0);
                }
                g[k / q as usize] = c;
            }
        }
        for (h, e) in fq_squarefree_decomposition(&g, q) {
            out.push((h, e * q as u32));
        }
        return out;
    }
    let a0 = fq_gcd(&f, &df, q);
    let mut w = fq_div_exact(&f, &a0, q);
    let mut rest = a0;
    let mut i = 1u32;
    // peel off the squarefree parts of multiplicity not divisible by q
    while w.len() > 1 {
        let y = fq_gcd(&w, &rest, q);
        let factor = fq_div_exact(&w, &y, q);
        if factor.len() > 1 {
            out.push((fq_monic(&factor, q), i));
        }
        w = y.clone();
        rest = fq_div_exact(&rest, &y, q);
        i += 1;
    }
    // what remains is a q-th power
    if rest.len() > 1 {
        for (h, e) in fq_squarefree_decomposition(&rest, q) {
            // merge with equal factors already present
            if let Some(entry) = out.iter_mut().find(|(g, _)| *g == h) {
                entry.1 += e;
            } else {
                out.push((h, e));
            }
        }
    }
    out
}

/// Distinct-degree decomposition of a squarefree monic f: returns (product, d)
/// pairs where `product` is the product of all irreducible factors of degree d.
fn fq_distinct_degree(f: &FqPoly, q: u64) -> Vec<(FqPoly, usize)> {
    let mut out = vec![];
    let mut f = fq_monic(f, q);
    let mut h: FqPoly = vec![0, 1]; // x
    let mut d = 0usize;
    while f.len() > 1 {
        d += 1;
        if 2 * d > fq_degree(&f) {
            out.push((f.clone(), fq_degree(&f)));
            break;
        }
        h = fq_pow_mod(&h, &BigUint::from(q), &f, q);
        // gcd(h - x, f)
        let mut hx = h.clone();
        if hx.len() < 2 {
            hx.resize(2, 0);
        }
        hx[1] = (hx[1] + q - 1) % q;
        fq_trim(&mut hx);
        let g = fq_gcd(&hx, &f, q);
        if g.len() > 1 {
            out.push((g.clone(), d));
            f = fq_div_exact(&f, &g, q);
            h = fq_rem(&h, &f, q);
        }
    }
    out
}

/// Equal-degree splitting (Cantor–Zassenhaus) of a monic squarefree product
/// of degree-d irreducibles.
fn fq_equal_degree(f: &FqPoly, d: usize, q: u64, rng: &mut ChaCha8Rng) -> Vec<FqPoly> {
    let n = fq_degree(f);
    if n == d {
        return vec![fq_monic(f, q)];
    }
    loop {
        let a: FqPoly = {
            let mut v: FqPoly = (0..n).map(|_| rng.gen_range(0..q)).collect();
            fq_trim(&mut v);
            v
        };
        if a.is_empty() {
            continue;
        }
        let g1 = fq_gcd(&a, f, q);
        if g1.len() > 1 && g1.len() <= n {
            let rest = fq_div_exact(f, &g1, q);
            let mut out = fq_equal_degree(&g1, d, q, rng);
            out.extend(fq_equal_degree(&rest, d, q, rng));
            return out;
        }
        let g = if q == 2 {
            // trace map: a + a^2 + ... + a^(2^(d-1)) mod f
            let mut t = fq_rem(&a, f, q);
            let mut pw = t.clone();
            for _ in 1..d {
                pw = fq_rem(&fq_mul(&pw, &pw, q), f, q);
                t = fq_add(&t, &pw, q);
            }
            fq_gcd(&t, f, q)
        } else {
            // a^((q^d - 1)/2) - 1 mod f
            let e = (BigUint::from(q).pow(d as u32) - BigUint::one()) / BigUint::from(2u32);
            let mut b = fq_pow_mod(&a, &e, f, q);
            if b.is_empty() {
                b = vec![q - 1];
            } else {
                b[0] = (b[0] + q - 1) % q;
            }
            fq_trim(&mut b);
            fq_gcd(&b, f, q)
        };
        if g.len() > 1 && fq_degree(&g) < n {
            let rest = fq_div_exact(f, &g, q);
            let mut out = fq_equal_degree(&g, d, q, rng);
            out.extend(fq_equal_degree(&rest, d, q, rng));
            return out;
        }
    }
}

fn fq_add(a: &FqPoly, b: &FqPoly, q: u64) -> FqPoly {
    let n = a.len().max(b.len());
    let mut v = vec![0u64; n];
    for k in 0..n {
        let x = *a.get(k).unwrap_or(&0);
        let y = *b.get(k).unwrap_or(&0);
        v[k] = (x + y) % q;
    }
    fq_trim(&mut v);
    v
}

/// Full factorization of `f mod q` into monic irreducibles with
/// multiplicities. Randomized but deterministic for a fixed seed.
pub fn factor_mod(f: &ZPoly, q: u64, seed: u64) -> Vec<(FqPoly, u32)> {
    let fq = fq_from_zpoly(f, q);
    assert!(!fq_is_zero(&fq), "polynomial vanishes mod q");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ q.wrapping_mul(0x9e3779b97f4a7c15));
    let mut out: Vec<(FqPoly, u32)> = vec![];
    for (g, e) in fq_squarefree_decomposition(&fq, q) {
        for (prod, d) in fq_distinct_degree(&g, q) {
            for irr in fq_equal_degree(&prod, d, q, &mut rng) {
                out.push((irr, e));
            }
        }
    }
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(&b.0)));
    out
}

/// Degrees (with multiplicity) of the irreducible factors of `f mod q`.
pub fn factor_degrees_mod(f: &ZPoly, q: u64, seed: u64) -> Vec<usize> {
    let mut v: Vec<usize> = factor_mod(f, q, seed)
        .iter()
        .flat_map(|(g, e)| std::iter::repeat(fq_degree(g)).take(*e as usize))
        .collect();
    v.sort();
    v
}

// ---------------------------------------------------------------------------
// certified factorization over Z
// ---------------------------------------------------------------------------

/// Subset sums achievable from a multiset of factor degrees.
fn achievable_degrees(pattern: &[usize]) -> Vec<bool> {
    let total: usize = pattern.iter().sum();
    let mut can = vec![false; total + 1];
    can[0] = true;
    for &d in pattern {
        for s in (d..=total).rev() {
            if can[s - d] {
                can[s] = true;
            }
        }
    }
    can
}

const SIEVE_PRIMES: [u64; 10] = [101, 103, 107, 109, 113, 127, 131, 137, 139, 149];

/// Factors a primitive polynomial over Z into irreducible primitive factors
/// with multiplicity; the product of the factors (to their powers) times the
/// returned unit equals the input. Every factor is verified by exact division.
pub fn factor_z(f: &ZPoly) -> Result<(BigInt, Vec<(ZPoly, u32)>)> {
    if f.is_zero() {
        return Err(KlocError::InvalidInput("cannot factor zero".into()));
    }
    let mut unit = f.content();
    if f.lc().is_negative() {
        unit = -unit;
    }
    let prim = f.primitive_part();
    if prim.is_constant() {
        return Ok((unit, vec![]));
    }
    let mut out: Vec<(ZPoly, u32)> = vec![];
    for (g, e) in prim.squarefree_decomposition() {
        for irr in factor_squarefree_z(&g)? {
            out.push((irr, e));
        }
    }
    out.sort_by(|a, b| {
        a.0.degree()
            .cmp(&b.0.degree())
            .then_with(|| a.0.coeffs().cmp(b.0.coeffs()))
    });
    Ok((unit, out))
}

/// Convenience: true iff the (nonconstant) polynomial is irreducible over Q.
pub fn is_irreducible_z(f: &ZPoly) -> Result<bool> {
    if f.is_constant() {
        return Ok(false);
    }
    let (_, factors) = factor_z(f)?;
    Ok(factors.len() == 1 && factors[0].1 == 1)
}

fn factor_squarefree_z(g: &ZPoly) -> Result<Vec<ZPoly>> {
    let n = g.degree();
    if n <= 1 {
        return Ok(vec![g.clone()]);
    }
    // degree sieve mod several primes of good reduction
    let disc = g.discriminant();
    let mut can: Option<Vec<bool>> = None;
    for &q in SIEVE_PRIMES.iter() {
        let qb = BigInt::from(q);
        if (g.lc().mod_floor(&qb)).is_zero() || (disc.mod_floor(&qb)).is_zero() {
            continue;
        }
        let pattern = factor_degrees_mod(g, q, 1);
        if pattern.len() == 1 {
            return Ok(vec![g.clone()]);
        }
        let a = achievable_degrees(&pattern);
        can = Some(match can {
            None => a,
            Some(prev) => prev
                .iter()
                .zip(a.iter())
                .map(|(&x, &y)| x && y)
                .collect(),
        });
        let c = can.as_ref().unwrap();
        if (1..n).all(|d| !c[d]) {
            return Ok(vec![g.clone()]);
        }
    }
    let can = can.unwrap_or_else(|| vec![true; n + 1]);

    // reduce to the monic case: h(x) = lc^(n-1) g(x/lc) is monic with the
    // same splitting field; factors map back by x -> lc*x + primitive part
    let lc = g.lc();
    let monic_input = lc.is_one();
    let h = if monic_input {
        g.clone()
    } else {
        // coefficient of x^k in h is a_k * lc^(n-1-k); the top one is 1
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[n] = BigInt::one();
        let mut pw = BigInt::one();
        for k in (0..n).rev() {
            coeffs[k] = g.coeff(k) * &pw;
            pw *= &lc;
        }
        ZPoly::new(coeffs)
    };

    // root-combination search with exact verification
    let norm_bits = h.norm2_sq().bits() / 2 + 1;
    let mut prec: u32 = (2 * n as u64 + 2 * norm_bits + 96) as u32;
    for _attempt in 0..4 {
        if let Some(mut factors) = try_root_combinations(&h, &can, prec) {
            if !monic_input {
                factors = factors
                    .into_iter()
                    .map(|u| u.scale_arg(&lc).primitive_part())
                    .collect();
                // sanity: the product matches g up to content
                let mut prod = ZPoly::one();
                for u in &factors {
                    prod = prod.mul(u);
                }
                let ratio = g.div_exact(&prod);
                debug_assert!(ratio.map_or(false, |r| r.is_constant()));
            }
            return Ok(factors);
        }
        prec *= 2;
    }
    Err(KlocError::PrecisionExhausted(prec))
}

/// Attempts to split monic squarefree `h` completely by combining complex
/// roots; returns `None` if the working precision proved insufficient.
fn try_root_combinations(h: &ZPoly, can: &[bool], prec: u32) -> Option<Vec<ZPoly>> {
    let n = h.degree();
    let roots = zpoly_roots(h.coeffs(), prec);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut current = h.clone();
    let mut out: Vec<ZPoly> = vec![];
    'outer: while current.degree() > 1 {
        let m = current.degree();
        for d in 1..=m / 2 {
            if d < can.len() && !can[d] {
                continue;
            }
            let mut combo = first_combination(remaining.len(), d)?;
            loop {
                let subset: Vec<usize> = combo.iter().map(|&k| remaining[k]).collect();
                if let Some(cand) = candidate_from_roots(&roots, &subset, prec) {
                    if let Some(quot) = current.div_exact(&cand) {
                        out.push(cand);
                        current = quot;
                        let keep: Vec<usize> = remaining
                            .iter()
                            .copied()
                            .filter(|i| !subset.contains(i))
                            .collect();
                        remaining = keep;
                        continue 'outer;
                    }
                }
                if !next_combination(&mut combo, remaining.len()) {
                    break;
                }
            }
        }
        // no proper factor found at any allowed degree: current is irreducible
        break;
    }
    if !current.is_constant() {
        out.push(current);
    }
    // exact verification of the full product
    let mut prod = ZPoly::one();
    for u in &out {
        prod = prod.mul(u);
    }
    if &prod == h {
        Some(out)
    } else {
        None
    }
}

fn first_combination(n: usize, d: usize) -> Option<Vec<usize>> {
    if d > n {
        return None;
    }
    Some((0..d).collect())
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let d = combo.len();
    let mut i = d;
    while i > 0 {
        i -= 1;
        if combo[i] < n - (d - i) {
            combo[i] += 1;
            for j in i + 1..d {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Monic product over the chosen roots, rounded to integers; `None` if any
/// coefficient is visibly non-integral at this precision.
fn candidate_from_roots(roots: &[CFx], subset: &[usize], prec: u32) -> Option<ZPoly> {
    let mut coeffs: Vec<CFx> = vec![CFx::from_int(&BigInt::one(), prec)];
    for &k in subset {
        let r = &roots[k];
        let mut next: Vec<CFx> = Vec::with_capacity(coeffs.len() + 1);
        next.push(coeffs[0].mul(&r.neg()));
        for j in 1..coeffs.len() {
            next.push(coeffs[j].mul(&r.neg()).add(&coeffs[j - 1]));
        }
        next.push(coeffs.last().unwrap().clone());
        coeffs = next;
    }
    let mut v: Vec<BigInt> = Vec::with_capacity(coeffs.len());
    for c in coeffs.iter() {
        if c.im.abs().to_f64() > 0.1 || c.re.dist_to_int() > 0.1 {
            return None;
        }
        v.push(c.re.round_to_int());
    }
    Some(ZPoly::new(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(s: &str) -> ZPoly {
        parse_poly(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        let f = zp("x^6-793*x^3+226981");
        assert_eq!(f.degree(), 6);
        assert_eq!(f.coeff(3), BigInt::from(-793));
        assert_eq!(f.coeff(0), BigInt::from(226981));
        assert!(f.is_monic());

        assert_eq!(zp("x"), ZPoly::x());
        assert_eq!(zp("-x + 1"), ZPoly::from_i64(&[1, -1]));
        assert_eq!(zp("2*x^2 + 3x"), ZPoly::from_i64(&[0, 3, 2]));
        assert_eq!(zp("5"), ZPoly::constant(BigInt::from(5)));
        assert_eq!(zp("x^2+x+x"), ZPoly::from_i64(&[0, 2, 1]));
        assert!(parse_poly("").is_err());
        assert!(parse_poly("x^").is_err());
        assert!(parse_poly("*x").is_err());
        assert!(parse_poly("x+").is_err());
        assert!(parse_poly("y+1").is_err());
    }

    #[test]
    fn display_roundtrip() {
        for s in ["x^6 - 793*x^3 + 226981", "x^2 + 1", "x", "2*x - 3"] {
            let f = zp(s);
            assert_eq!(format!("{}", f), s);
            assert_eq!(zp(&format!("{}", f)), f);
        }
    }

    #[test]
    fn arithmetic_and_division() {
        let f = zp("x^2-1");
        let g = zp("x-1");
        assert_eq!(f.div_exact(&g).unwrap(), zp("x+1"));
        assert!(zp("x^2+1").div_exact(&g).is_none());
        assert_eq!(f.mul(&g), zp("x^3-x^2-x+1"));
        assert_eq!(f.derivative(), zp("2*x"));
        assert_eq!(f.eval(&BigInt::from(3)), BigInt::from(8));
    }

    #[test]
    fn gcd_and_squarefree() {
        let f = zp("x^2-1").mul(&zp("x-1")); // (x-1)^2 (x+1)
        let g = f.gcd(&f.derivative());
        assert_eq!(g, zp("x-1"));
        let sf = f.squarefree_decomposition();
        assert_eq!(sf, vec![(zp("x+1"), 1), (zp("x-1"), 2)]);
    }

    #[test]
    fn discriminants() {
        assert_eq!(zp("x^2+1").discriminant(), BigInt::from(-4));
        assert_eq!(zp("x^2-5").discriminant(), BigInt::from(20));
        assert_eq!(zp("x^3-x").discriminant(), BigInt::from(4));
        // disc(x^2 + bx + c) = b^2 - 4c
        assert_eq!(zp("x^2+3*x+1").discriminant(), BigInt::from(5));
        // cyclotomic: disc(Phi_5) = 5^3
        assert_eq!(cyclotomic_prime_power(5, 1).discriminant(), BigInt::from(125));
    }

    #[test]
    fn sextic_discriminant_shape() {
        // disc(x^6 - 793 x^3 + 226981) = -3^5 * 61^2 * (793^2 - 4*226981)...
        // just check the 3-adic and 61-adic content is positive
        let d = zp("x^6-793*x^3+226981").discriminant();
        assert!(!d.is_zero());
        let three = BigInt::from(3);
        assert!(d.mod_floor(&three).is_zero());
        let sixty_one = BigInt::from(61);
        assert!(d.mod_floor(&sixty_one).is_zero());
    }

    #[test]
    fn factor_mod_small() {
        // x^2 + 1 mod 5 = (x+2)(x+3)
        let f = zp("x^2+1");
        let fs = factor_mod(&f, 5, 0);
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().all(|(g, e)| fq_degree(g) == 1 && *e == 1));
        // irreducible mod 3
        let fs3 = factor_mod(&f, 3, 0);
        assert_eq!(fs3.len(), 1);
        assert_eq!(fq_degree(&fs3[0].0), 2);
        // repeated factor: x^2 mod 7
        let fs7 = factor_mod(&zp("x^2"), 7, 0);
        assert_eq!(fs7, vec![(vec![0, 1], 2)]);
    }

    #[test]
    fn factor_mod_char_p_powers() {
        // x^4 + 2x^2 + 1 = (x^2+1)^2; mod 2 this is (x+1)^4
        let fs = factor_mod(&zp("x^4+2*x^2+1"), 2, 0);
        assert_eq!(fs, vec![(vec![1, 1], 4)]);
        // x^9 - x mod 3 splits into all monic irreducibles of degree dividing 2
        let fs = factor_mod(&zp("x^9-x"), 3, 0);
        let total: usize = fs.iter().map(|(g, e)| fq_degree(g) * *e as usize).sum();
        assert_eq!(total, 9);
        assert!(fs.iter().all(|(_, e)| *e == 1));
    }

    #[test]
    fn cyclotomic_prime_power_factors_mod() {
        // Phi_9 = x^6 + x^3 + 1; mod 19 (19 = 1 mod 9) it splits completely
        let phi9 = cyclotomic_prime_power(3, 2);
        assert_eq!(phi9, zp("x^6+x^3+1"));
        let fs = factor_mod(&phi9, 19, 0);
        assert_eq!(fs.len(), 6);
        // mod 2 (order of 2 mod 9 is 6) it stays irreducible
        let fs2 = factor_mod(&phi9, 2, 0);
        assert_eq!(fs2.len(), 1);
    }

    #[test]
    fn factor_z_basics() {
        let (u, fs) = factor_z(&zp("x^2-1")).unwrap();
        assert_eq!(u, BigInt::one());
        assert_eq!(fs, vec![(zp("x-1"), 1), (zp("x+1"), 1)]);

        let (_, fs) = factor_z(&zp("x^4-1")).unwrap();
        assert_eq!(fs, vec![(zp("x-1"), 1), (zp("x+1"), 1), (zp("x^2+1"), 1)]);

        // repeated factors
        let (_, fs) = factor_z(&zp("x^4+2*x^2+1")).unwrap();
        assert_eq!(fs, vec![(zp("x^2+1"), 2)]);

        // non-monic with content and sign
        let (u, fs) = factor_z(&zp("-6*x^2+6")).unwrap();
        assert_eq!(u, BigInt::from(-6));
        assert_eq!(fs.len(), 2);
    }

    #[test]
    fn factor_z_swinnerton_dyer_like() {
        // min poly of sqrt2 + sqrt3: x^4 - 10x^2 + 1, irreducible over Z but
        // reducible mod every prime — exercises the root-combination path
        let f = zp("x^4-10*x^2+1");
        assert!(is_irreducible_z(&f).unwrap());
    }

    #[test]
    fn sextic_is_irreducible() {
        assert!(is_irreducible_z(&zp("x^6-793*x^3+226981")).unwrap());
    }

    #[test]
    fn factor_z_reducible_products() {
        let f = zp("x^2-2").mul(&zp("x^3+x+1")).mul(&zp("x-7"));
        let (u, fs) = factor_z(&f).unwrap();
        assert_eq!(u, BigInt::one());
        let names: Vec<String> = fs.iter().map(|(g, _)| format!("{}", g)).collect();
        assert!(names.contains(&"x - 7".to_string()));
        assert!(names.contains(&"x^2 - 2".to_string()));
        assert!(names.contains(&"x^3 + x + 1".to_string()));
    }

    #[test]
    fn resultant_multiplicative() {
        let f = zp("x^2+1");
        let g = zp("x-2");
        let h = zp("x+3");
        let r1 = f.resultant(&g.mul(&h));
        let r2 = f.resultant(&g) * f.resultant(&h);
        assert_eq!(r1, r2);
    }

    #[test]
    fn translate_and_scale() {
        let f = zp("x^2");
        assert_eq!(f.translate_arg(&BigInt::from(1)), zp("x^2+2*x+1"));
        assert_eq!(f.scale_arg(&BigInt::from(3)), zp("9*x^2"));
    }
}
