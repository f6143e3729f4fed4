//! Arbitrary-precision fixed-point real/complex arithmetic and polynomial
//! root finding.
//!
//! Values are stored as `mantissa / 2^prec` with a `BigInt` mantissa. All
//! numeric results that feed a decision are re-verified by exact arithmetic
//! elsewhere; this module only has to be accurate, not certified.

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

/// Fixed-point real number `m / 2^prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fx {
    pub m: BigInt,
    pub prec: u32,
}

impl Fx {
    pub fn zero(prec: u32) -> Self {
        Fx {
            m: BigInt::zero(),
            prec,
        }
    }

    pub fn from_int(v: &BigInt, prec: u32) -> Self {
        Fx {
            m: v << prec,
            prec,
        }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::from_int(&BigInt::from(v), prec)
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite());
        // decompose x = s * 2^e with s an integer mantissa
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1 << 52), exp - 1075)
        };
        let mut m = BigInt::from(mant) * sign;
        let shift = prec as i64 + e;
        if shift >= 0 {
            m <<= shift as u64;
        } else {
            m = shr_round(&m, (-shift) as u32);
        }
        Fx { m, prec }
    }

    pub fn to_f64(&self) -> f64 {
        big_to_f64_shifted(&self.m, self.prec as i64)
    }

    pub fn add(&self, o: &Fx) -> Fx {
        Fx {
            m: &self.m + &o.m,
            prec: self.prec,
        }
    }

    pub fn sub(&self, o: &Fx) -> Fx {
        Fx {
            m: &self.m - &o.m,
            prec: self.prec,
        }
    }

    pub fn neg(&self) -> Fx {
        Fx {
            m: -&self.m,
            prec: self.prec,
        }
    }

    pub fn mul(&self, o: &Fx) -> Fx {
        Fx {
            m: shr_round(&(&self.m * &o.m), self.prec),
            prec: self.prec,
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Fx {
        Fx {
            m: &self.m * k,
            prec: self.prec,
        }
    }

    pub fn div(&self, o: &Fx) -> Fx {
        assert!(!o.m.is_zero(), "division by zero");
        Fx {
            m: div_round(&(&self.m << self.prec), &o.m),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Fx {
        Fx {
            m: self.m.abs(),
            prec: self.prec,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    /// Rounds to the nearest integer.
    pub fn round_to_int(&self) -> BigInt {
        shr_round(&self.m, self.prec)
    }

    /// Distance to the nearest integer, as f64.
    pub fn dist_to_int(&self) -> f64 {
        let r = self.round_to_int();
        self.sub(&Fx::from_int(&r, self.prec)).to_f64().abs()
    }
}

/// `v / 2^s`, rounded to nearest.
pub fn shr_round(v: &BigInt, s: u32) -> BigInt {
    if s == 0 {
        return v.clone();
    }
    let half = BigInt::from(1) << (s - 1);
    if v.sign() == Sign::Minus {
        -((-v + half) >> s)
    } else {
        (v + half) >> s
    }
}

/// `a / b`, rounded to nearest.
pub fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (two_a, sign) = if b.is_negative() {
        (-(a << 1u8), -b)
    } else {
        ((a << 1u8), b.clone())
    };
    // round(a/b) = floor((2a + b) / 2b)
    use num_integer::Integer;
    let num = two_a + &sign;
    num.div_floor(&(sign << 1u8))
}

/// f64 value of `m / 2^shift` without overflowing.
pub fn big_to_f64_shifted(m: &BigInt, shift: i64) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    let bits = m.bits() as i64;
    if bits <= 1000 {
        let x = m.to_f64().unwrap_or(f64::INFINITY);
        return x / 2f64.powi(shift.clamp(-1000, 1000) as i32);
    }
    let drop = bits - 64;
    let top: BigInt = m >> drop as u64;
    let x = top.to_f64().unwrap();
    x * 2f64.powi((drop - shift).clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

/// Fixed-point complex number.
#[derive(Clone, Debug)]
pub struct CFx {
    pub re: Fx,
    pub im: Fx,
}

impl CFx {
    pub fn zero(prec: u32) -> Self {
        CFx {
            re: Fx::zero(prec),
            im: Fx::zero(prec),
        }
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        CFx {
            re: Fx::from_f64(re, prec),
            im: Fx::from_f64(im, prec),
        }
    }

    pub fn from_int(v: &BigInt, prec: u32) -> Self {
        CFx {
            re: Fx::from_int(v, prec),
            im: Fx::zero(prec),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec
    }

    pub fn add(&self, o: &CFx) -> CFx {
        CFx {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }

    pub fn sub(&self, o: &CFx) -> CFx {
        CFx {
            re: self.re.sub(&o.re),
            im: self.im.sub(&o.im),
        }
    }

    pub fn neg(&self) -> CFx {
        CFx {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn mul(&self, o: &CFx) -> CFx {
        CFx {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn conj(&self) -> CFx {
        CFx {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn norm_sqr(&self) -> Fx {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn div(&self, o: &CFx) -> CFx {
        let n = o.norm_sqr();
        let t = self.mul(&o.conj());
        CFx {
            re: t.re.div(&n),
            im: t.im.div(&n),
        }
    }

    pub fn to_c64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn abs_f64(&self) -> f64 {
        let (r, i) = self.to_c64();
        r.hypot(i)
    }
}

/// Evaluates a polynomial with `BigInt` coefficients (low to high) at a
/// complex fixed-point value.
pub fn eval_zpoly(coeffs: &[BigInt], z: &CFx) -> CFx {
    let prec = z.prec();
    let mut acc = CFx::zero(prec);
    for c in coeffs.iter().rev() {
        acc = acc.mul(z);
        acc.re = acc.re.add(&Fx::from_int(c, prec));
    }
    acc
}

/// Evaluates a polynomial with complex fixed-point coefficients.
pub fn eval_cpoly(coeffs: &[CFx], z: &CFx) -> CFx {
    let prec = z.prec();
    let mut acc = CFx::zero(prec);
    for c in coeffs.iter().rev() {
        acc = acc.mul(z).add(c);
    }
    acc
}

fn derivative_z(coeffs: &[BigInt]) -> Vec<BigInt> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect()
}

/// All complex roots of a squarefree integer polynomial, at `prec` bits.
///
/// Seeds come from a double-precision Aberth iteration; each root is then
/// polished with fixed-point Newton. Panics if f64 convergence fails (caller
/// retries at higher precision level or reports the defect).
pub fn zpoly_roots(coeffs: &[BigInt], prec: u32) -> Vec<CFx> {
    let seeds = aberth_f64(coeffs);
    let deriv = derivative_z(coeffs);
    seeds
        .into_iter()
        .map(|(re, im)| newton_polish(coeffs, &deriv, CFx::from_f64(re, im, prec)))
        .collect()
}

/// Newton-polishes a root of an integer polynomial at fixed precision.
pub fn newton_polish(coeffs: &[BigInt], deriv: &[BigInt], mut z: CFx) -> CFx {
    // doubling convergence: ~log2(prec) iterations from an f64 seed
    let iters = 3 + (z.prec() as f64).log2().ceil() as usize;
    for _ in 0..iters {
        let f = eval_zpoly(coeffs, &z);
        let fp = eval_zpoly(deriv, &z);
        if fp.norm_sqr().is_zero() {
            break;
        }
        z = z.sub(&f.div(&fp));
    }
    z
}

/// Aberth–Ehrlich iteration in double precision. Returns all roots of a
/// squarefree polynomial with f64-representable coefficients.
pub fn aberth_f64(coeffs: &[BigInt]) -> Vec<(f64, f64)> {
    use std::cmp::Ordering;
    let n = coeffs.len() - 1;
    assert!(n >= 1);
    let c: Vec<f64> = coeffs.iter().map(|b| b.to_f64().unwrap()).collect();
    assert!(
        c.iter().all(|x| x.is_finite()),
        "coefficients exceed f64 range"
    );
    // Fujiwara root bound: 2 · max_k |c_{n-k}/c_n|^{1/k}; much tighter than
    // the Cauchy bound, keeping f64 evaluation in range for polynomials with
    // large low-order coefficients
    let lead = c[n].abs();
    let radius = 2.0
        * (0..n)
            .map(|k| (c[k].abs() / lead).powf(1.0 / (n - k) as f64))
            .fold(f64::MIN_POSITIVE, f64::max);
    // initial guesses on a circle with an irrational-ish angle offset
    let mut zs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            (radius * 0.7 * ang.cos(), radius * 0.7 * ang.sin())
        })
        .collect();
    let eval = |z: (f64, f64), cs: &[f64]| -> (f64, f64) {
        let mut acc = (0.0, 0.0);
        for &co in cs.iter().rev() {
            acc = cmul(acc, z);
            acc.0 += co;
        }
        acc
    };
    let dc: Vec<f64> = (1..=n).map(|i| c[i] * i as f64).collect();
    for _ in 0..400 {
        let mut maxstep = 0.0f64;
        let snapshot = zs.clone();
        for i in 0..n {
            let z = snapshot[i];
            let f = eval(z, &c);
            let fp = eval(z, &dc);
            if f.0 == 0.0 && f.1 == 0.0 {
                continue;
            }
            let newton = cdiv(f, fp);
            let mut s = (0.0, 0.0);
            for (j, w) in snapshot.iter().enumerate() {
                if j != i {
                    let d = (z.0 - w.0, z.1 - w.1);
                    let inv = cdiv((1.0, 0.0), d);
                    s = (s.0 + inv.0, s.1 + inv.1);
                }
            }
            let denom = (1.0 - (newton.0 * s.0 - newton.1 * s.1), -(newton.0 * s.1 + newton.1 * s.0));
            let step = cdiv(newton, denom);
            if !step.0.is_finite() || !step.1.is_finite() {
                continue; // overflow in the correction; keep the iterate
            }
            zs[i] = (z.0 - step.0, z.1 - step.1);
            let st = step.0.hypot(step.1);
            if st > maxstep {
                maxstep = st;
            }
        }
        if maxstep < 1e-14 * radius.max(1.0) {
            break;
        }
    }
    // deterministic order: by real part, then imaginary part
    zs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
    });
    zs
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cdiv(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let n = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / n, (a.1 * b.0 - a.0 * b.1) / n)
}

/// Primitive m-th root of unity `e^{2 pi i k / m}` at `prec` bits, via
/// Newton refinement of the f64 seed on `z^m - 1`.
pub fn root_of_unity(m: u64, k: u64, prec: u32) -> CFx {
    let ang = 2.0 * std::f64::consts::PI * (k % m) as f64 / m as f64;
    let mut z = CFx::from_f64(ang.cos(), ang.sin(), prec);
    let iters = 3 + (prec as f64).log2().ceil() as usize;
    let mbig = BigInt::from(m);
    for _ in 0..iters {
        // z <- z - (z^m - 1) / (m z^{m-1}) computed via powers
        let zm1 = cpow(&z, m - 1);
        let zm = zm1.mul(&z);
        let mut f = zm;
        f.re = f.re.sub(&Fx::from_i64(1, prec));
        let fp = CFx {
            re: zm1.re.mul_int(&mbig),
            im: zm1.im.mul_int(&mbig),
        };
        z = z.sub(&f.div(&fp));
    }
    z
}

/// z^e by binary powering.
pub fn cpow(z: &CFx, e: u64) -> CFx {
    let prec = z.prec();
    let mut result = CFx::from_int(&BigInt::from(1), prec);
    let mut base = z.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul(&base);
        }
        base = base.mul(&base);
        e >>= 1;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn fx_roundtrip() {
        let x = Fx::from_f64(3.14159, 128);
        assert!((x.to_f64() - 3.14159).abs() < 1e-12);
        let y = Fx::from_f64(-0.001, 128);
        assert!((y.to_f64() + 0.001).abs() < 1e-15);
    }

    #[test]
    fn fx_arith() {
        let a = Fx::from_f64(1.5, 96);
        let b = Fx::from_f64(-2.25, 96);
        assert!((a.mul(&b).to_f64() + 3.375).abs() < 1e-20);
        assert!((a.div(&b).to_f64() + 2.0 / 3.0).abs() < 1e-20);
    }

    #[test]
    fn cfx_mul_div() {
        let a = CFx::from_f64(1.0, 2.0, 96);
        let b = CFx::from_f64(3.0, -1.0, 96);
        let p = a.mul(&b);
        assert!((p.re.to_f64() - 5.0).abs() < 1e-20);
        assert!((p.im.to_f64() - 5.0).abs() < 1e-20);
        let q = p.div(&b);
        assert!((q.re.to_f64() - 1.0).abs() < 1e-20);
        assert!((q.im.to_f64() - 2.0).abs() < 1e-20);
    }

    #[test]
    fn roots_of_quadratic() {
        // x^2 + 1 -> +-i
        let roots = zpoly_roots(&[bi(1), bi(0), bi(1)], 128);
        for r in &roots {
            assert!(r.re.to_f64().abs() < 1e-30);
            assert!((r.im.to_f64().abs() - 1.0).abs() < 1e-30);
        }
    }

    #[test]
    fn roots_of_sextic() {
        // x^6 - 793x^3 + 226981: |theta|^3 = sqrt(226981) for every root
        let coeffs = [bi(226981), bi(0), bi(0), bi(-793), bi(0), bi(0), bi(1)];
        let roots = zpoly_roots(&coeffs, 192);
        assert_eq!(roots.len(), 6);
        for r in &roots {
            let v = eval_zpoly(&coeffs, r);
            assert!(v.abs_f64() < 1e-40, "residual {}", v.abs_f64());
        }
    }

    #[test]
    fn zeta_five() {
        let z = root_of_unity(5, 1, 160);
        let z5 = cpow(&z, 5);
        assert!((z5.re.to_f64() - 1.0).abs() < 1e-40);
        assert!(z5.im.to_f64().abs() < 1e-40);
        // zeta + zeta^4 = (-1+sqrt 5)/2
        let s = z.add(&cpow(&z, 4));
        let expect = (5f64.sqrt() - 1.0) / 2.0;
        assert!((s.re.to_f64() - expect).abs() < 1e-14);
    }

    #[test]
    fn div_round_signs() {
        assert_eq!(div_round(&bi(7), &bi(2)), bi(4)); // 3.5 -> 4
        assert_eq!(div_round(&bi(-7), &bi(2)), bi(-3)); // -3.5 -> -3
        assert_eq!(div_round(&bi(7), &bi(-2)), bi(-3));
        assert_eq!(div_round(&bi(9), &bi(3)), bi(3));
    }
}
