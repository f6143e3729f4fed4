//! Integral LLL reduction and short-vector enumeration.
//!
//! The LLL variant is the all-integer one (de Weger): it works from a Gram
//! matrix only, tracks the transformation, and never leaves Z. Enumeration
//! is Fincke–Pohst on a scaled f64 Cholesky factor; candidates are always
//! re-verified exactly by the caller.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::intlinalg::IntMatrix;
use crate::numeric::{big_to_f64_shifted, div_round};

/// Result of LLL reduction on a Gram matrix.
pub struct LllGram {
    /// Unimodular transformation: reduced basis = `transform` * original.
    pub transform: IntMatrix,
    /// Gram matrix of the reduced basis.
    pub gram: IntMatrix,
}

/// LLL-reduces a lattice given by its (positive definite) Gram matrix,
/// with Lovász parameter 3/4. Returns the transformation and new Gram.
pub fn lll_gram(gram: &IntMatrix) -> LllGram {
    let n = gram.rows();
    assert_eq!(n, gram.cols());
    if n == 0 {
        return LllGram {
            transform: IntMatrix::identity(0),
            gram: gram.clone(),
        };
    }
    let mut u = IntMatrix::identity(n);
    // integral Gram-Schmidt data: d[0..=n], lambda[i][j] for j < i
    let mut d: Vec<BigInt> = vec![BigInt::one(); n + 1];
    let mut lam: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut t = gram.get(i, j).clone();
            for k in 0..j {
                t = (&d[k + 1] * &t - &lam[i][k] * &lam[j][k]) / &d[k];
            }
            if j < i {
                lam[i][j] = t;
            } else {
                d[i + 1] = t;
            }
        }
        assert!(
            d[i + 1].is_positive(),
            "Gram matrix not positive definite (or rank-deficient)"
        );
    }

    let redi = |k: usize,
                l: usize,
                u: &mut IntMatrix,
                lam: &mut Vec<Vec<BigInt>>,
                d: &Vec<BigInt>| {
        let two_lam = BigInt::from(2) * lam[k][l].abs();
        if two_lam > d[l + 1] {
            let q = div_round(&lam[k][l], &d[l + 1]);
            let nq = -&q;
            u.add_multiple_of_row_pub(k, l, &nq);
            lam[k][l] = &lam[k][l] - &q * &d[l + 1];
            for j in 0..l {
                lam[k][j] = &lam[k][j] - &q * &lam[l][j];
            }
        }
    };

    let mut k = 1usize;
    while k < n {
        redi(k, k - 1, &mut u, &mut lam, &d);
        // Lovász: d[k+1] d[k-1] >= (3/4) d[k]^2 - lambda^2, integerized x4
        let lhs = BigInt::from(4) * &d[k + 1] * &d[k - 1];
        let rhs = BigInt::from(3) * &d[k] * &d[k] - BigInt::from(4) * &lam[k][k - 1] * &lam[k][k - 1];
        if lhs < rhs {
            // swap b_{k-1} and b_k
            u.swap_rows_pub(k - 1, k);
            for j in 0..k.saturating_sub(1) {
                let t = lam[k][j].clone();
                lam[k][j] = lam[k - 1][j].clone();
                lam[k - 1][j] = t;
            }
            let lam_k = lam[k][k - 1].clone();
            let b = (&d[k - 1] * &d[k + 1] + &lam_k * &lam_k) / &d[k];
            for i in k + 1..n {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &lam_k * &t) / &d[k];
                lam[i][k - 1] = (&b * &t + &lam_k * &lam[i][k]) / &d[k + 1];
            }
            d[k] = b;
            k = k.max(2) - 1;
        } else {
            for l in (0..k.saturating_sub(1)).rev() {
                redi(k, l, &mut u, &mut lam, &d);
            }
            k += 1;
        }
    }
    let gram_new = u.mul(gram).mul(&u.transpose());
    LllGram {
        transform: u,
        gram: gram_new,
    }
}

/// Options for short-vector enumeration.
pub struct EnumOptions {
    /// Quadratic-form bound (same scale as the Gram matrix).
    pub bound: BigInt,
    /// Abort after this many candidates.
    pub max_candidates: usize,
}

/// Fincke–Pohst enumeration of all nonzero `x` with `x G x^T <= bound`,
/// up to sign (one of each antipodal pair is returned).
///
/// Uses an f64 Cholesky factor with a small safety margin; callers must
/// verify candidates exactly. Returns `None` if `max_candidates` is hit.
pub fn enumerate_short_vectors(gram: &IntMatrix, opts: &EnumOptions) -> Option<Vec<Vec<i64>>> {
    let n = gram.rows();
    assert_eq!(n, gram.cols());
    if n == 0 {
        return Some(vec![]);
    }
    // scale so entries fit comfortably in f64
    let max_bits = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| gram.get(i, j).bits())
        .max()
        .unwrap_or(0);
    let shift = max_bits.saturating_sub(50) as i64;
    let gf: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| big_to_f64_shifted(gram.get(i, j), shift))
                .collect()
        })
        .collect();
    let bound_f = big_to_f64_shifted(&opts.bound, shift) * (1.0 + 1e-9) + 1e-9;

    // Cholesky-style decomposition: q[i][i] and q[i][j] (j > i)
    let mut q = gf.clone();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
        if q[i][i] <= 0.0 {
            return Some(vec![]); // numerically degenerate; caller retries
        }
    }

    let mut results: Vec<Vec<i64>> = Vec::new();
    let mut x = vec![0i64; n];
    // t[i]: remaining bound at level i; u[i]: offset
    let mut t = vec![0.0f64; n + 1];
    let mut uoff = vec![0.0f64; n];
    t[n] = bound_f;

    // iterative depth-first search from coordinate n-1 down to 0
    struct Frame {
        high: i64,
        cur: i64,
    }
    impl Frame {
        fn advance(&mut self) -> Option<i64> {
            self.cur += 1;
            if self.cur > self.high {
                None
            } else {
                Some(self.cur)
            }
        }
    }
    let mut frames: Vec<Frame> = Vec::with_capacity(n);
    let mut level = n - 1;
    let (mut lo, mut hi);
    {
        let r = (t[n] / q[level][level]).max(0.0).sqrt();
        lo = (-r).floor() as i64;
        hi = r.ceil() as i64;
    }
    uoff[level] = 0.0;
    frames.push(Frame { high: hi, cur: lo - 1 });
    loop {
        let f = frames.last_mut().expect("frame stack nonempty").advance();
        match f {
            Some(v) => {
                x[level] = v;
                let diff = v as f64 + uoff[level];
                let used = q[level][level] * diff * diff;
                let remaining = t[level + 1] - used;
                if remaining < 0.0 {
                    continue;
                }
                if level == 0 {
                    if x.iter().any(|&c| c != 0) {
                        // canonical sign: first nonzero from the top positive
                        let keep = {
                            let first = x.iter().rev().find(|&&c| c != 0).unwrap();
                            *first > 0
                        };
                        if keep {
                            results.push(x.clone());
                            if results.len() > opts.max_candidates {
                                return None;
                            }
                        }
                    }
                    continue;
                }
                t[level] = remaining;
                level -= 1;
                uoff[level] = (level + 1..n).map(|j| q[level][j] * x[j] as f64).sum();
                let r = (t[level + 1] / q[level][level]).max(0.0).sqrt();
                lo = (-r - uoff[level]).floor() as i64;
                hi = (r - uoff[level]).ceil() as i64;
                frames.push(Frame { high: hi, cur: lo - 1 });
            }
            None => {
                frames.pop();
                if frames.is_empty() {
                    break;
                }
                level += 1;
            }
        }
    }
    Some(results)
}

impl IntMatrix {
    /// row[dst] += q * row[src] (public helper for LLL).
    pub fn add_multiple_of_row_pub(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.cols() {
            let v = self.get(src, c) * q + self.get(dst, c);
            self.set(dst, c, v);
        }
    }

    pub fn swap_rows_pub(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols() {
            let x = self.get(a, c).clone();
            let y = self.get(b, c).clone();
            self.set(a, c, y);
            self.set(b, c, x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram_of(basis: &IntMatrix) -> IntMatrix {
        basis.mul(&basis.transpose())
    }

    #[test]
    fn lll_reduces_skewed_basis() {
        // basis (1, 0), (10000, 1): reduced first vector should be short
        let b = IntMatrix::from_i64(&[&[1, 0], &[10000, 1]]);
        let g = gram_of(&b);
        let r = lll_gram(&g);
        // determinant preserved
        assert_eq!(r.gram.det(), g.det());
        // shortest vector of this lattice is (1,0) with norm 1
        assert_eq!(r.gram.get(0, 0), &BigInt::from(1));
        assert_eq!(r.transform.det().abs(), BigInt::one());
    }

    #[test]
    fn enumerate_z2() {
        let g = IntMatrix::identity(2);
        let opts = EnumOptions {
            bound: BigInt::from(2),
            max_candidates: 100,
        };
        let v = enumerate_short_vectors(&g, &opts).unwrap();
        // up to sign: (1,0),(0,1),(1,1),(1,-1) -> 4 vectors
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn enumerate_respects_bound() {
        let g = IntMatrix::from_i64(&[&[2, 1], &[1, 3]]);
        let opts = EnumOptions {
            bound: BigInt::from(12),
            max_candidates: 1000,
        };
        let v = enumerate_short_vectors(&g, &opts).unwrap();
        for x in &v {
            let q = 2 * x[0] * x[0] + 2 * x[0] * x[1] + 3 * x[1] * x[1];
            assert!(q <= 13); // small slack allowed by margin
        }
        assert!(!v.is_empty());
    }
}
