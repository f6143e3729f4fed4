//! Exact integer linear algebra and finite abelian group algebra.
//!
//! Everything here runs over arbitrary-precision integers with no rounding:
//! Hermite and Smith normal forms, cokernel presentations of finite abelian
//! groups in invariant-factor form, p-primary parts, and the twisted
//! coinvariant quotient used by the splitting criterion.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{KlocError, Result};

/// Dense integer matrix, row-major, arbitrary-precision entries.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  [")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Builds a matrix from rows of i64 entries (test and small-case helper).
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(*v));
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        IntMatrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut s = BigInt::zero();
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    if !a.is_zero() && !v[j].is_zero() {
                        s += a * &v[j];
                    }
                }
                s
            })
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination. Square only.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.data.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k * n + k].is_zero() {
                // find a pivot row below
                let mut found = None;
                for r in k + 1..n {
                    if !a[r * n + k].is_zero() {
                        found = Some(r);
                        break;
                    }
                }
                match found {
                    Some(r) => {
                        for c in 0..n {
                            a.swap(k * n + c, r * n + c);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = &num / &prev;
                }
                a[i * n + k] = BigInt::zero();
            }
            prev = a[k * n + k].clone();
        }
        let d = a[(n - 1) * n + (n - 1)].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// row[dst] += q * row[src]
    fn add_multiple_of_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = &self.data[src * self.cols + c] * q;
            self.data[dst * self.cols + c] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let idx = r * self.cols + c;
            let v = -std::mem::take(&mut self.data[idx]);
            self.data[idx] = v;
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    fn add_multiple_of_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = &self.data[r * self.cols + src] * q;
            self.data[r * self.cols + dst] += v;
        }
    }

}

/// Exact inverse of a nonsingular square matrix, returned as `(A, d)` with
/// `M * A = d * I` and `d > 0` (so `M^{-1} = A / d`). `None` when singular.
pub fn rat_inverse(m: &IntMatrix) -> Option<(IntMatrix, BigInt)> {
    use num_rational::BigRational;
    let n = m.rows();
    assert_eq!(n, m.cols());
    // Gauss-Jordan over Q on [M | I]
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|r| {
            (0..2 * n)
                .map(|c| {
                    if c < n {
                        BigRational::from(m.get(r, c).clone())
                    } else if c - n == r {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for c in col..2 * n {
            a[col][c] = &a[col][c] * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..2 * n {
                    let delta = &factor * &a[col][c];
                    a[r][c] = &a[r][c] - delta;
                }
            }
        }
    }
    // common denominator of the right block
    let mut den = BigInt::one();
    for r in 0..n {
        for c in n..2 * n {
            den = den.lcm(a[r][c].denom());
        }
    }
    let mut out = IntMatrix::zero(n, n);
    for r in 0..n {
        for c in 0..n {
            let v = &a[r][n + c] * BigRational::from(den.clone());
            debug_assert!(v.is_integer());
            out.set(r, c, v.to_integer());
        }
    }
    Some((out, den))
}

/// Row Hermite normal form: pivots positive, entries above each pivot reduced
/// into `[0, pivot)`, zero rows at the bottom. Unique for the row span.
pub fn hnf(m: &IntMatrix) -> IntMatrix {
    let mut h = m.clone();
    let (rows, cols) = (h.rows, h.cols);
    let mut pivot_row = 0usize;
    for col in 0..cols {
        if pivot_row >= rows {
            break;
        }
        // Euclidean elimination below pivot_row in this column, always
        // keeping the smallest nonzero entry as the working pivot.
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..rows {
                if !h.get(r, col).is_zero() {
                    best = match best {
                        None => Some(r),
                        Some(b) => {
                            if h.get(r, col).abs() < h.get(b, col).abs() {
                                Some(r)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let Some(b) = best else { break };
            h.swap_rows(pivot_row, b);
            if h.get(pivot_row, col).is_negative() {
                h.negate_row(pivot_row);
            }
            let mut done = true;
            let p = h.get(pivot_row, col).clone();
            for r in pivot_row + 1..rows {
                if !h.get(r, col).is_zero() {
                    let q = -(h.get(r, col).div_floor(&p));
                    h.add_multiple_of_row(r, pivot_row, &q);
                    if !h.get(r, col).is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h.get(pivot_row, col).is_zero() {
            continue;
        }
        // reduce entries above the pivot into [0, pivot)
        let p = h.get(pivot_row, col).clone();
        for r in 0..pivot_row {
            let q = -(h.get(r, col).div_floor(&p));
            h.add_multiple_of_row(r, pivot_row, &q);
        }
        pivot_row += 1;
    }
    h
}

/// Smith normal form: returns `(U, D, V)` with `U * M * V = D`, `U` and `V`
/// unimodular and `D` diagonal with `d_1 | d_2 | ...`, all `d_j >= 0`.
pub fn snf(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let mut d = m.clone();
    let (rows, cols) = (d.rows, d.cols);
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let k = rows.min(cols);

    for t in 0..k {
        loop {
            // pick smallest-magnitude nonzero pivot in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for r in t..rows {
                for c in t..cols {
                    if !d.get(r, c).is_zero() {
                        best = match best {
                            None => Some((r, c)),
                            Some((br, bc)) => {
                                if d.get(r, c).abs() < d.get(br, bc).abs() {
                                    Some((r, c))
                                } else {
                                    Some((br, bc))
                                }
                            }
                        };
                    }
                }
            }
            let Some((br, bc)) = best else {
                // trailing block is zero; done with this and later pivots
                break;
            };
            d.swap_rows(t, br);
            u.swap_rows(t, br);
            d.swap_cols(t, bc);
            v.swap_cols(t, bc);
            if d.get(t, t).is_negative() {
                d.negate_row(t);
                u.negate_row(t);
            }
            let p = d.get(t, t).clone();
            let mut clean = true;
            for r in t + 1..rows {
                if !d.get(r, t).is_zero() {
                    let q = -(d.get(r, t).div_floor(&p));
                    d.add_multiple_of_row(r, t, &q);
                    u.add_multiple_of_row(r, t, &q);
                    if !d.get(r, t).is_zero() {
                        clean = false;
                    }
                }
            }
            for c in t + 1..cols {
                if !d.get(t, c).is_zero() {
                    let q = -(d.get(t, c).div_floor(&p));
                    d.add_multiple_of_col(c, t, &q);
                    v.add_multiple_of_col(c, t, &q);
                    if !d.get(t, c).is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue;
            }
            // pivot divides everything in its row/column; enforce that it
            // divides the whole trailing block
            let mut bad: Option<(usize, usize)> = None;
            'scan: for r in t + 1..rows {
                for c in t + 1..cols {
                    if !(d.get(r, c) % &p).is_zero() {
                        bad = Some((r, c));
                        break 'scan;
                    }
                }
            }
            match bad {
                None => break,
                Some((r, _)) => {
                    // fold the offending row into row t and re-eliminate
                    d.add_multiple_of_row(t, r, &BigInt::one());
                    u.add_multiple_of_row(t, r, &BigInt::one());
                }
            }
        }
    }
    (u, d, v)
}

/// Diagonal of a matrix in Smith form, as owned integers.
pub fn snf_diagonal(d: &IntMatrix) -> Vec<BigInt> {
    let k = d.rows().min(d.cols());
    (0..k).map(|i| d.get(i, i).clone()).collect()
}

/// Finite abelian group in invariant-factor form `Z/d_1 x ... x Z/d_k` with
/// `d_1 | d_2 | ... | d_k` and every `d_j >= 2`. The trivial group is the
/// empty list. Elements are integer vectors with the j-th coordinate mod
/// `d_j`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteAbelianGroup {
    invariants: Vec<BigInt>,
}

impl FiniteAbelianGroup {
    pub fn trivial() -> Self {
        FiniteAbelianGroup { invariants: vec![] }
    }

    /// Builds from invariant factors; panics on an invalid chain.
    pub fn new(invariants: Vec<BigInt>) -> Self {
        for w in invariants.windows(2) {
            assert!(
                (&w[1] % &w[0]).is_zero(),
                "invariant factors must form a divisibility chain"
            );
        }
        for d in &invariants {
            assert!(d >= &BigInt::from(2), "invariant factors must be >= 2");
        }
        FiniteAbelianGroup { invariants }
    }

    pub fn from_u64(invariants: &[u64]) -> Self {
        Self::new(invariants.iter().map(|&d| BigInt::from(d)).collect())
    }

    pub fn invariants(&self) -> &[BigInt] {
        &self.invariants
    }

    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }

    pub fn order(&self) -> BigInt {
        self.invariants.iter().product()
    }

    /// Exponent of the group (1 for the trivial group).
    pub fn exponent(&self) -> BigInt {
        self.invariants.last().cloned().unwrap_or_else(BigInt::one)
    }

    /// Reduces a coordinate vector into canonical range `[0, d_j)`.
    pub fn reduce(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.invariants.len());
        v.iter()
            .zip(&self.invariants)
            .map(|(x, d)| x.mod_floor(d))
            .collect()
    }

    pub fn add(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let s: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&s)
    }

    pub fn neg(&self, a: &[BigInt]) -> Vec<BigInt> {
        let s: Vec<BigInt> = a.iter().map(|x| -x).collect();
        self.reduce(&s)
    }

    pub fn zero_el(&self) -> Vec<BigInt> {
        vec![BigInt::zero(); self.invariants.len()]
    }

    pub fn is_zero_el(&self, a: &[BigInt]) -> bool {
        self.reduce(a).iter().all(|x| x.is_zero())
    }

    /// Order of an element.
    pub fn element_order(&self, a: &[BigInt]) -> BigInt {
        let a = self.reduce(a);
        let mut ord = BigInt::one();
        for (x, d) in a.iter().zip(&self.invariants) {
            if x.is_zero() {
                continue;
            }
            let g = x.gcd(d);
            let o = d / g;
            ord = ord.lcm(&o);
        }
        ord
    }

    /// p-group test: every invariant is a power of p.
    pub fn is_p_group(&self, p: u64) -> bool {
        let p = BigInt::from(p);
        self.invariants.iter().all(|d| {
            let mut d = d.clone();
            while (&d % &p).is_zero() {
                d /= &p;
            }
            d.is_one()
        })
    }

    /// Checks that a square matrix in invariant-factor coordinates defines an
    /// automorphism of the group.
    pub fn is_automorphism_matrix(&self, a: &IntMatrix) -> bool {
        let k = self.invariants.len();
        if a.rows() != k || a.cols() != k {
            return false;
        }
        // well-defined: d_j * (column j) must vanish in the group
        for j in 0..k {
            for i in 0..k {
                if !((a.get(i, j) * &self.invariants[j]) % &self.invariants[i]).is_zero() {
                    return false;
                }
            }
        }
        // surjective endomorphism of a finite group is an automorphism:
        // Z^k / (columns of A + relation lattice) must be trivial
        let mut m = IntMatrix::zero(k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                m.set(i, j, a.get(i, j).clone());
            }
            m.set(i, k + i, self.invariants[i].clone());
        }
        let (_, d, _) = snf(&m);
        (0..k).all(|i| d.get(i, i).is_one())
    }
}

/// A cokernel presentation: the group together with the images of the
/// original generators in invariant-factor coordinates.
#[derive(Clone, Debug)]
pub struct CokernelPresentation {
    pub group: FiniteAbelianGroup,
    /// `gen_images[k]` is the class of the k-th original generator.
    pub gen_images: Vec<Vec<BigInt>>,
}

/// Presents the cokernel `Z^g / <rows of relations>` in invariant-factor
/// form, discarding trivial factors. Errors with `InfiniteCokernel` when the
/// cokernel is infinite.
pub fn group_from_relations(
    generator_count: usize,
    relations: &IntMatrix,
) -> Result<CokernelPresentation> {
    assert_eq!(relations.cols(), generator_count, "relation width mismatch");
    let (_, d, v) = snf(relations);
    let g = generator_count;
    let k = relations.rows().min(g);
    let mut diag: Vec<BigInt> = Vec::with_capacity(g);
    for j in 0..g {
        if j < k {
            diag.push(d.get(j, j).clone());
        } else {
            diag.push(BigInt::zero());
        }
    }
    if diag.iter().any(|x| x.is_zero()) {
        return Err(KlocError::InfiniteCokernel);
    }
    // surviving coordinates: d_j >= 2
    let keep: Vec<usize> = (0..g).filter(|&j| !diag[j].is_one()).collect();
    let invariants: Vec<BigInt> = keep.iter().map(|&j| diag[j].clone()).collect();
    let group = FiniteAbelianGroup::new(invariants);
    // generator e_k maps to (V^T e_k) mod d, i.e. row k of V, restricted
    let mut gen_images = Vec::with_capacity(g);
    for gen in 0..g {
        let img: Vec<BigInt> = keep
            .iter()
            .map(|&j| v.get(gen, j).mod_floor(&diag[j]))
            .collect();
        gen_images.push(img);
    }
    Ok(CokernelPresentation { group, gen_images })
}

/// Coordinate map between finite abelian groups given by a matrix:
/// `target_vec = M * source_vec` reduced mod the target invariants.
#[derive(Clone, Debug)]
pub struct GroupMap {
    pub matrix: IntMatrix,
    pub target: FiniteAbelianGroup,
}

impl GroupMap {
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.target.reduce(&self.matrix.mul_vec(v))
    }
}

/// p-Sylow subgroup of `G` in invariant-factor form, with the projection
/// map (multiplication by the prime-to-p part of the exponent, rescaled
/// into p-part coordinates).
pub fn p_primary_part(g: &FiniteAbelianGroup, p: u64) -> (FiniteAbelianGroup, GroupMap) {
    let p_big = BigInt::from(p);
    let mut p_invs: Vec<BigInt> = Vec::new();
    let mut data: Vec<(usize, BigInt)> = Vec::new(); // (source coord, multiplier)
    for (j, d) in g.invariants().iter().enumerate() {
        let mut pa = BigInt::one();
        let mut m = d.clone();
        while (&m % &p_big).is_zero() {
            m /= &p_big;
            pa *= &p_big;
        }
        if pa.is_one() {
            continue;
        }
        // idempotent multiplier: c = m * (m^{-1} mod p^a); then c == 1 mod
        // p^a and c == 0 mod m, so x -> c*x projects Z/d onto its p-part.
        // In p-part coordinates (Z/p^a as quotient of the cyclic piece
        // <d/p^a * e_j>): class of x corresponds to x mod p^a.
        let minv = mod_inverse(&m, &pa).expect("m invertible mod p^a");
        let c = (&m * &minv) % d;
        p_invs.push(pa);
        data.push((j, c));
    }
    let target = FiniteAbelianGroup::new(p_invs);
    let mut matrix = IntMatrix::zero(target.rank(), g.rank());
    for (i, (j, c)) in data.into_iter().enumerate() {
        matrix.set(i, j, c);
    }
    let map = GroupMap {
        matrix,
        target: target.clone(),
    };
    (target, map)
}

/// One integer solution `x` of `M x = b`, if any exists.
pub fn solve_integer(m: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(m.rows(), b.len());
    let (u, d, v) = snf(m);
    let ub = u.mul_vec(b);
    let k = m.rows().min(m.cols());
    let mut y = vec![BigInt::zero(); m.cols()];
    for r in 0..m.rows() {
        let dr = if r < k { d.get(r, r).clone() } else { BigInt::zero() };
        if dr.is_zero() {
            if !ub[r].is_zero() {
                return None;
            }
        } else {
            let (q, rem) = ub[r].div_rem(&dr);
            if !rem.is_zero() {
                return None;
            }
            y[r] = q;
        }
    }
    Some(v.mul_vec(&y))
}

/// Modular inverse of `a` mod `m` (m > 0), if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// A finite abelian p-group together with commuting automorphisms and an
/// optional character (unit mod p^n) per actor.
#[derive(Clone, Debug)]
pub struct GaloisModule {
    pub group: FiniteAbelianGroup,
    pub actors: Vec<(String, IntMatrix)>,
    pub character: Option<BTreeMap<String, BigInt>>,
}

impl GaloisModule {
    pub fn new(
        group: FiniteAbelianGroup,
        actors: Vec<(String, IntMatrix)>,
        character: Option<BTreeMap<String, BigInt>>,
    ) -> Self {
        for (label, m) in &actors {
            assert!(
                group.is_automorphism_matrix(m),
                "actor {label} is not an automorphism of the group"
            );
        }
        GaloisModule {
            group,
            actors,
            character,
        }
    }

    fn kappa(&self, label: &str) -> Result<BigInt> {
        self.character
            .as_ref()
            .and_then(|c| c.get(label).cloned())
            .ok_or_else(|| KlocError::MissingCharacter(label.to_string()))
    }
}

/// Twisted coinvariants `(A (x) mu_{p^n}^{(x)i})_Gamma`.
///
/// Identifying `A (x) mu_{p^n}^{(x)i}` with `A/p^n A` through a generator of
/// the twist, this is the quotient of `A/p^n A` by the subgroup generated by
/// `kappa(gamma) * gamma(a) - a` over all actors `gamma` and generators `a`.
pub fn twisted_coinvariants(m: &GaloisModule, p: u64, n: u32) -> Result<FiniteAbelianGroup> {
    if !m.group.is_p_group(p) {
        return Err(KlocError::NotPGroup(p));
    }
    let pn = BigInt::from(p).pow(n);
    let k = m.group.rank();
    // A/p^n A has invariants gcd(d_j, p^n)
    let quot_invs: Vec<BigInt> = m.group.invariants().iter().map(|d| d.gcd(&pn)).collect();
    let mut rel_rows: Vec<Vec<BigInt>> = Vec::new();
    for j in 0..k {
        let mut row = vec![BigInt::zero(); k];
        row[j] = quot_invs[j].clone();
        rel_rows.push(row);
    }
    for (label, act) in &m.actors {
        let kappa = m.kappa(label)?;
        for j in 0..k {
            // kappa * gamma(e_j) - e_j, as a relation row
            let mut row: Vec<BigInt> = (0..k).map(|i| act.get(i, j) * &kappa).collect();
            row[j] -= BigInt::one();
            rel_rows.push(row);
        }
    }
    if k == 0 {
        return Ok(FiniteAbelianGroup::trivial());
    }
    let rels = IntMatrix::from_rows(rel_rows);
    Ok(group_from_relations(k, &rels)?.group)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn hnf_identity() {
        let m = IntMatrix::identity(2);
        assert_eq!(hnf(&m), m);
    }

    #[test]
    fn hnf_already_reduced() {
        let m = IntMatrix::from_i64(&[&[2, 1], &[0, 3]]);
        assert_eq!(hnf(&m), m);
    }

    #[test]
    fn hnf_row_swap() {
        let m = IntMatrix::from_i64(&[&[0, 3], &[2, 1]]);
        let expect = IntMatrix::from_i64(&[&[2, 1], &[0, 3]]);
        assert_eq!(hnf(&m), expect);
    }

    #[test]
    fn snf_identity() {
        let m = IntMatrix::identity(3);
        let (u, d, v) = snf(&m);
        assert_eq!(d, m);
        assert_eq!(u.mul(&m).mul(&v), d);
    }

    #[test]
    fn snf_2448() {
        let m = IntMatrix::from_i64(&[&[2, 4], &[6, 8]]);
        let (u, d, v) = snf(&m);
        assert_eq!(u.mul(&m).mul(&v), d);
        assert_eq!(snf_diagonal(&d), vec![bi(2), bi(4)]);
        assert_eq!(u.det().abs(), BigInt::one());
        assert_eq!(v.det().abs(), BigInt::one());
    }

    #[test]
    fn snf_1x1() {
        let m = IntMatrix::from_i64(&[&[3]]);
        let (_, d, _) = snf(&m);
        assert_eq!(snf_diagonal(&d), vec![bi(3)]);
    }

    #[test]
    fn cokernel_z3() {
        let rels = IntMatrix::from_i64(&[&[3]]);
        let p = group_from_relations(1, &rels).unwrap();
        assert_eq!(p.group, FiniteAbelianGroup::from_u64(&[3]));
    }

    #[test]
    fn cokernel_z2_z2() {
        let rels = IntMatrix::from_i64(&[&[2, 0], &[0, 2]]);
        let p = group_from_relations(2, &rels).unwrap();
        assert_eq!(p.group, FiniteAbelianGroup::from_u64(&[2, 2]));
    }

    #[test]
    fn cokernel_z2_z4() {
        let rels = IntMatrix::from_i64(&[&[2, 4], &[6, 8]]);
        let p = group_from_relations(2, &rels).unwrap();
        assert_eq!(p.group, FiniteAbelianGroup::from_u64(&[2, 4]));
    }

    #[test]
    fn cokernel_infinite() {
        let rels = IntMatrix::from_i64(&[&[2, 4]]);
        assert!(matches!(
            group_from_relations(2, &rels),
            Err(KlocError::InfiniteCokernel)
        ));
    }

    #[test]
    fn gen_images_consistent() {
        // Z^2 / <(2,4),(6,8)> = Z/2 + Z/4; the relation rows must map to 0.
        let rels = IntMatrix::from_i64(&[&[2, 4], &[6, 8]]);
        let p = group_from_relations(2, &rels).unwrap();
        for r in 0..2 {
            let mut acc = p.group.zero_el();
            for g in 0..2 {
                let scaled: Vec<BigInt> =
                    p.gen_images[g].iter().map(|x| x * rels.get(r, g)).collect();
                acc = p.group.add(&acc, &p.group.reduce(&scaled));
            }
            assert!(p.group.is_zero_el(&acc));
        }
    }

    #[test]
    fn p_part_z6_at_3() {
        let g = FiniteAbelianGroup::from_u64(&[6]);
        let (p3, _) = p_primary_part(&g, 3);
        assert_eq!(p3, FiniteAbelianGroup::from_u64(&[3]));
    }

    #[test]
    fn p_part_z2_z12_at_2() {
        let g = FiniteAbelianGroup::from_u64(&[2, 12]);
        let (p2, _) = p_primary_part(&g, 2);
        assert_eq!(p2, FiniteAbelianGroup::from_u64(&[2, 4]));
    }

    #[test]
    fn p_part_z5_at_3() {
        let g = FiniteAbelianGroup::from_u64(&[5]);
        let (p3, _) = p_primary_part(&g, 3);
        assert!(p3.is_trivial());
    }

    #[test]
    fn p_part_projection_is_identity_on_p_part() {
        // Z/12 at p=2: element 3 generates the 2-part (order 4)
        let g = FiniteAbelianGroup::from_u64(&[12]);
        let (p2, proj) = p_primary_part(&g, 2);
        assert_eq!(p2, FiniteAbelianGroup::from_u64(&[4]));
        // x=3 has order 4 in Z/12; projection must have order 4 in Z/4
        let img = proj.apply(&[bi(3)]);
        assert_eq!(p2.element_order(&img), bi(4));
        // prime-to-p elements die: x=4 has order 3
        let img = proj.apply(&[bi(4)]);
        assert!(p2.is_zero_el(&img));
    }

    #[test]
    fn coinvariants_trivial_gamma() {
        let g = FiniteAbelianGroup::from_u64(&[3]);
        let m = GaloisModule::new(g, vec![], Some(BTreeMap::new()));
        let c = twisted_coinvariants(&m, 3, 1).unwrap();
        assert_eq!(c, FiniteAbelianGroup::from_u64(&[3]));
    }

    #[test]
    fn coinvariants_inversion_kappa_minus_one() {
        // A = Z/9, sigma(a) = -a, kappa = -1 mod 9: relation vanishes
        let g = FiniteAbelianGroup::from_u64(&[9]);
        let act = IntMatrix::from_i64(&[&[-1]]);
        let mut ch = BTreeMap::new();
        ch.insert("s".to_string(), bi(8));
        let m = GaloisModule::new(g, vec![("s".to_string(), act)], Some(ch));
        let c = twisted_coinvariants(&m, 3, 2).unwrap();
        assert_eq!(c, FiniteAbelianGroup::from_u64(&[9]));
    }

    #[test]
    fn coinvariants_inversion_kappa_one() {
        // A = Z/9, sigma(a) = -a, kappa = 1: relation -2a, 2 invertible mod 9
        let g = FiniteAbelianGroup::from_u64(&[9]);
        let act = IntMatrix::from_i64(&[&[-1]]);
        let mut ch = BTreeMap::new();
        ch.insert("s".to_string(), bi(1));
        let m = GaloisModule::new(g, vec![("s".to_string(), act)], Some(ch));
        let c = twisted_coinvariants(&m, 3, 2).unwrap();
        assert!(c.is_trivial());
    }

    #[test]
    fn coinvariants_missing_character() {
        let g = FiniteAbelianGroup::from_u64(&[9]);
        let act = IntMatrix::from_i64(&[&[-1]]);
        let m = GaloisModule::new(g, vec![("s".to_string(), act)], None);
        assert!(matches!(
            twisted_coinvariants(&m, 3, 1),
            Err(KlocError::MissingCharacter(_))
        ));
    }

    #[test]
    fn coinvariants_not_p_group() {
        let g = FiniteAbelianGroup::from_u64(&[6]);
        let m = GaloisModule::new(g, vec![], Some(BTreeMap::new()));
        assert!(matches!(
            twisted_coinvariants(&m, 3, 1),
            Err(KlocError::NotPGroup(3))
        ));
    }

    #[test]
    fn det_small() {
        let m = IntMatrix::from_i64(&[&[2, 4], &[6, 8]]);
        assert_eq!(m.det(), bi(-8));
    }
}
