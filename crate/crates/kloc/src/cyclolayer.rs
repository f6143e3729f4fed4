//! Cyclotomic character images, layer fields and their Galois data, primes
//! above p in a layer, residue extension degrees, and the nonexceptionality
//! test at p = 2.
//!
//! For a base field `F` and prime power `p^n`, the cyclotomic character
//! identifies `Gal(F(μ_{p^n})/F)` with a subgroup `H` of `(Z/p^n)^×`. The
//! twist-`i` layer field is the fixed field of `ker(χ^i)` inside
//! `F(μ_{p^n})`; its Galois group `Γ` over `F` acts faithfully on
//! `μ_{p^n}^{⊗i}` through `κ = χ^i`.
//!
//! Subfields of `Q(μ_{p^n})` are handled through Gaussian periods: the sum
//! of `ζ^{k}` (or of a fixed small polynomial in `ζ`, when the plain period
//! degenerates) over a subgroup generates its fixed field. Minimal
//! polynomials are computed from complex embeddings, rounded to integers,
//! and every algebraic identity used afterwards (polynomial vanishing,
//! fixing the base field) is re-verified exactly.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{KlocError, Result};
use crate::numeric::{root_of_unity, CFx};
use crate::numfield::{
    automorphism_from_image, element_valuation, factor_bigint, factor_rational_prime,
    identity_automorphism, new_field, new_field_p_maximal_certified_irreducible,
    new_field_with_order_elements, recognize_integral_element, recognize_power_coords,
    FieldAutomorphism, NumberField, PrimeIdealFactor,
};
use crate::poly::ZPoly;

// ---------------------------------------------------------------------------
// modular arithmetic helpers
// ---------------------------------------------------------------------------

fn prime_power(p: u64, n: u32) -> Result<u64> {
    p.checked_pow(n)
        .ok_or_else(|| KlocError::EffortExceeded(format!("{p}^{n} exceeds u64")))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

fn units_mod(m: u64) -> Vec<u64> {
    (1..m.max(2))
        .filter(|&x| num_integer::gcd(x, m) == 1)
        .collect()
}

fn factor_u64(x: u64) -> Vec<(u64, u32)> {
    factor_bigint(&BigInt::from(x))
        .expect("factoring a small integer")
        .into_iter()
        .map(|(p, e)| (p.to_u64().expect("small factor"), e))
        .collect()
}

fn divisors(x: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factor_u64(x) {
        let mut next = vec![];
        for d in &out {
            let mut pk = 1u64;
            for _ in 0..=e {
                next.push(d * pk);
                pk *= p;
            }
        }
        out = next;
    }
    out.sort_unstable();
    out
}

/// Multiplicative order of `a` mod `m`, where the order divides `lambda`.
fn order_dividing(a: u64, m: u64, lambda: u64) -> u64 {
    debug_assert_eq!(pow_mod(a, lambda, m), 1 % m);
    let mut ord = lambda;
    for (q, _) in factor_u64(lambda) {
        while ord % q == 0 && pow_mod(a, ord / q, m) == 1 % m {
            ord /= q;
        }
    }
    ord
}

/// Subgroup of units mod `m` generated by `gens`, as a sorted list.
fn subgroup_closure(m: u64, gens: &[u64]) -> Vec<u64> {
    let mut set: BTreeSet<u64> = BTreeSet::new();
    set.insert(1 % m);
    loop {
        let snapshot: Vec<u64> = set.iter().copied().collect();
        let before = set.len();
        for s in &snapshot {
            for g in gens {
                set.insert(mul_mod(*s, *g, m));
            }
        }
        if set.len() == before {
            break;
        }
    }
    set.into_iter().collect()
}

/// All subgroups of `(Z/p^n)^×`.
fn all_subgroups(p: u64, n: u32) -> Result<Vec<Vec<u64>>> {
    let m = prime_power(p, n)?;
    let units = units_mod(m);
    let phi = units.len() as u64;
    if p == 2 {
        if n <= 1 {
            return Ok(vec![vec![1]]);
        }
        if n > 16 {
            return Err(KlocError::EffortExceeded(
                "2-power cyclotomic level too large for subgroup enumeration".into(),
            ));
        }
        // (Z/2^n)^× is 2-generated: closures of all generator pairs
        let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
        for (ai, &a) in units.iter().enumerate() {
            for &b in &units[ai..] {
                seen.insert(subgroup_closure(m, &[a, b]));
            }
        }
        seen.insert(vec![1]);
        return Ok(seen.into_iter().collect());
    }
    // odd p: the unit group is cyclic of order φ = p^{n-1}(p-1)
    let fac = factor_u64(phi);
    let gen = units
        .iter()
        .copied()
        .find(|&x| fac.iter().all(|&(q, _)| pow_mod(x, phi / q, m) != 1))
        .expect("cyclic unit group has a generator");
    Ok(divisors(phi)
        .into_iter()
        .map(|d| subgroup_closure(m, &[pow_mod(gen, phi / d, m)]))
        .collect())
}

/// Coset representatives of `subgroup` among `ambient` (both sorted element
/// lists of subgroups of the units mod `m`), each rep the smallest element
/// of its coset.
fn coset_reps(m: u64, ambient: &[u64], subgroup: &[u64]) -> Vec<u64> {
    let mut covered: BTreeSet<u64> = BTreeSet::new();
    let mut reps = vec![];
    for &u in ambient {
        if covered.contains(&u) {
            continue;
        }
        reps.push(u);
        for &h in subgroup {
            covered.insert(mul_mod(u, h, m));
        }
    }
    reps
}

// ---------------------------------------------------------------------------
// Gaussian periods and numeric minimal polynomials
// ---------------------------------------------------------------------------

/// Resolvent kernels tried in order until the period conjugates separate.
/// When the fixed field of a subgroup has conductor p^c < p^n, all period
/// sums with exponents coprime to p^n vanish, so the list also carries
/// monomials and mixtures at the exponents p^a.
fn beta_candidates(p: u64, n: u32) -> Vec<ZPoly> {
    let mut out = vec![
        ZPoly::from_i64(&[0, 1]),
        ZPoly::from_i64(&[0, 1, 1]),
        ZPoly::from_i64(&[0, 1, 2]),
        ZPoly::from_i64(&[0, 1, 0, 1]),
        ZPoly::from_i64(&[0, 2, 1, 3]),
        ZPoly::from_i64(&[0, 1, 3, 1, 2]),
    ];
    let monomial = |e: usize, c: i64| {
        let mut v = vec![BigInt::zero(); e + 1];
        v[e] = BigInt::from(c);
        v
    };
    for a in 1..n {
        let Some(pa) = p.checked_pow(a).and_then(|x| usize::try_from(x).ok()) else {
            break;
        };
        if pa > 1 << 20 {
            break;
        }
        out.push(ZPoly::new(monomial(pa, 1)));
        let mut mixed = monomial(pa, 1);
        mixed[1] = BigInt::one();
        out.push(ZPoly::new(mixed.clone()));
        mixed[pa] = BigInt::from(2);
        out.push(ZPoly::new(mixed));
    }
    if n >= 3 {
        // one kernel touching every conductor level at once
        let top = p.pow(n - 1) as usize;
        let mut v = vec![BigInt::zero(); top + 1];
        for a in 0..n {
            v[p.pow(a) as usize] = BigInt::from(a as i64 + 1);
        }
        out.push(ZPoly::new(v));
    }
    out
}

/// `Σ_{k ∈ subgroup} β(ζ_m^{mult·k})` at the given precision.
fn period(m: u64, mult: u64, subgroup: &[u64], beta: &ZPoly, prec: u32) -> CFx {
    let mut acc = CFx::zero(prec);
    for &k in subgroup {
        let base = mul_mod(mult, k, m);
        for (j, c) in beta.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = mul_mod(base, j as u64 % m, m);
            let term = root_of_unity(m, e, prec);
            acc = acc.add(&CFx::from_int(c, prec).mul(&term));
        }
    }
    acc
}

fn pairwise_distinct(vals: &[CFx], margin: f64) -> bool {
    for a in 0..vals.len() {
        for b in a + 1..vals.len() {
            if vals[a].sub(&vals[b]).abs_f64() < margin {
                return false;
            }
        }
    }
    true
}

/// Monic integer polynomial with the given complex roots, or None when a
/// coefficient fails to round cleanly.
fn round_poly_from_roots(vals: &[CFx], prec: u32) -> Option<ZPoly> {
    let mut coeffs = vec![CFx::from_int(&BigInt::one(), prec)];
    for v in vals {
        let mut next = vec![CFx::zero(prec); coeffs.len() + 1];
        for (j, c) in coeffs.iter().enumerate() {
            // multiply by (x - v): shift up, subtract v * c
            next[j + 1] = next[j + 1].add(c);
            next[j] = next[j].sub(&c.mul(v));
        }
        coeffs = next;
    }
    let mut out = vec![];
    for c in &coeffs {
        if c.re.dist_to_int() > 1e-6 || c.im.to_f64().abs() > 1e-6 {
            return None;
        }
        out.push(c.re.round_to_int());
    }
    Some(ZPoly::new(out))
}

/// Remainder of `a` modulo the monic polynomial `m` over Z.
fn zpoly_rem_monic(a: &ZPoly, m: &ZPoly) -> ZPoly {
    debug_assert!(m.is_monic());
    let dm = m.degree();
    let mut c = a.coeffs().to_vec();
    while c.len() > dm {
        let lead = c.pop().expect("nonempty");
        if lead.is_zero() {
            continue;
        }
        let shift = c.len() - dm;
        for j in 0..dm {
            c[shift + j] -= &lead * m.coeff(j);
        }
    }
    ZPoly::new(c)
}


fn dbg_stage(tag: &str, t0: std::time::Instant) {
    if std::env::var_os("KLOC_DEBUG").is_some() {
        eprintln!("[cyclolayer] {tag}: {:?}", t0.elapsed());
    }
}

fn dbg_fail(prec: u32, tag: &str) -> KlocError {
    if std::env::var_os("KLOC_DEBUG").is_some() {
        eprintln!("[cyclolayer] precision failure: {tag}");
    }
    KlocError::PrecisionExhausted(prec)
}

// ---------------------------------------------------------------------------
// character images
// ---------------------------------------------------------------------------

/// The image of the cyclotomic character mod p^n on the absolute Galois
/// group of a field F, as a subgroup of `(Z/p^n)^×`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterImage {
    pub p: u64,
    pub n: u32,
    /// sorted residues; `H ≅ Gal(F(μ_{p^n})/F)` via χ
    pub elements: Vec<u64>,
}

/// Exact data exhibiting the fixed field of a subgroup inside F.
struct SubfieldWitness {
    /// coordinates in F of a generator of the fixed field
    coords: Vec<BigInt>,
    /// coset representatives of the subgroup in the full unit group
    reps: Vec<u64>,
    /// period values aligned with `reps`
    values: Vec<CFx>,
}

/// Decides whether the fixed field of `subgroup` inside Q(μ_m) embeds in F,
/// returning exact witness data when it does.
fn fixed_subfield_in(
    f: &NumberField,
    p: u64,
    n: u32,
    subgroup: &[u64],
    units: &[u64],
) -> Result<Option<SubfieldWitness>> {
    let m = prime_power(p, n)?;
    let prec = f.precision();
    let reps = coset_reps(m, units, subgroup);
    for beta in beta_candidates(p, n) {
        let values: Vec<CFx> = reps
            .iter()
            .map(|&c| period(m, c, subgroup, &beta, prec))
            .collect();
        if !pairwise_distinct(&values, 1e-8) {
            continue;
        }
        let Some(g) = round_poly_from_roots(&values, prec) else {
            continue;
        };
        // the period is in F iff one of its conjugates is recognized in F
        // and the candidate minimal polynomial vanishes on it exactly
        for v in &values {
            let Some(coords) = recognize_integral_element(f, v) else {
                continue;
            };
            let check = f.el_eval_poly(&g, &coords);
            if check.iter().all(|c| c.is_zero()) {
                return Ok(Some(SubfieldWitness {
                    coords,
                    reps,
                    values,
                }));
            }
        }
        return Ok(None);
    }
    if std::env::var_os("KLOC_DEBUG").is_some() {
        eprintln!("[cyclolayer] no separating resolvent for subgroup {subgroup:?} mod {m}");
    }
    Err(KlocError::PrecisionExhausted(prec))
}

/// Computes `H = χ(G_F) mod p^n` by walking the subfield lattice of
/// `Q(μ_{p^n})`: H is the intersection of all subgroups whose fixed field
/// embeds in F.
pub fn char_image(f: &NumberField, p: u64, n: u32) -> Result<CharacterImage> {
    assert!(n >= 1, "character image needs level n >= 1");
    let m = prime_power(p, n)?;
    let units = units_mod(m);
    if f.degree() == 1 {
        return Ok(CharacterImage {
            p,
            n,
            elements: units,
        });
    }
    let order = units.len() as u64;
    let mut current: BTreeSet<u64> = units.iter().copied().collect();
    for sub in all_subgroups(p, n)? {
        let index = order / sub.len() as u64;
        // a subfield of F has degree dividing [F:Q]
        if index <= 1 || f.degree() as u64 % index != 0 {
            continue;
        }
        if fixed_subfield_in(f, p, n, &sub, &units)?.is_some() {
            let sset: BTreeSet<u64> = sub.iter().copied().collect();
            current = current.intersection(&sset).copied().collect();
        }
    }
    Ok(CharacterImage {
        p,
        n,
        elements: current.into_iter().collect(),
    })
}

// ---------------------------------------------------------------------------
// layer fields
// ---------------------------------------------------------------------------

/// The layer field `F_{i,n}` with its Galois group over F and the values of
/// `κ = χ^i` on it.
pub struct Layer {
    pub p: u64,
    pub n: u32,
    pub i: u64,
    pub base_fingerprint: u64,
    pub base_degree: usize,
    pub layer_field: NumberField,
    /// coordinates of the base field generator θ_F inside `layer_field`
    pub base_theta: Vec<BigInt>,
    /// `(σ, κ(σ) mod p^n)` for every σ ∈ Γ = Gal(layer/F); κ is injective
    pub gamma: Vec<(FieldAutomorphism, u64)>,
    /// `|Γ| = [layer : F]`
    pub degree: usize,
}

fn layer_as_base(f: &NumberField, p: u64, n: u32, i: u64) -> Layer {
    Layer {
        p,
        n,
        i,
        base_fingerprint: f.fingerprint(),
        base_degree: f.degree(),
        layer_field: f.clone(),
        base_theta: f.theta_coords(),
        gamma: vec![(identity_automorphism(f), 1)],
        degree: 1,
    }
}

/// Builds the layer `F_{i,n}`: the fixed field of `ker(χ^i)` inside
/// `F(μ_{p^n})`, together with Γ and κ.
pub fn build_layer(f: &NumberField, p: u64, n: u32, i: u64) -> Result<Layer> {
    assert!(i >= 1, "twist index must be at least 1");
    if n == 0 {
        return Ok(layer_as_base(f, p, 0, i));
    }
    if p == 2 && !is_nonexceptional(f)? {
        return Err(KlocError::OutOfTheoremScope);
    }
    let m = prime_power(p, n)?;
    let h = char_image(f, p, n)?;
    let kernel: Vec<u64> = h
        .elements
        .iter()
        .copied()
        .filter(|&x| pow_mod(x, i, m) == 1 % m)
        .collect();
    let gamma_order = h.elements.len() / kernel.len();
    if gamma_order == 1 {
        return Ok(layer_as_base(f, p, n, i));
    }
    let units = units_mod(m);
    if f.degree() == 1 && kernel == [1] && h.elements == units {
        return cyclotomic_layer(f, p, n, i, m, &units);
    }
    period_layer(f, p, n, i, m, &h.elements, &kernel, &units, gamma_order)
}

/// Fast exact path for F = Q with `ker(χ^i)` trivial: the layer is the full
/// cyclotomic field, and automorphisms are `ζ ↦ ζ^h` in the power basis.
fn cyclotomic_layer(
    f: &NumberField,
    p: u64,
    n: u32,
    i: u64,
    m: u64,
    units: &[u64],
) -> Result<Layer> {
    let poly = crate::poly::cyclotomic_prime_power(p, n);
    // prime-power cyclotomic polynomials are irreducible over Q
    let layer = if n >= 2 {
        new_field_p_maximal_certified_irreducible(&poly, &[p])?
    } else {
        new_field(&poly)?
    };
    // θ_F is the rational root of the degree-1 base polynomial
    let a = -f.poly().coeff(0);
    let base_theta = layer.el_scal(&a, &layer.one_coords());
    let mut gamma = vec![];
    for &hval in units {
        let mut mono = vec![BigInt::zero(); hval as usize + 1];
        mono[hval as usize] = BigInt::one();
        let img_poly = zpoly_rem_monic(&ZPoly::new(mono), &poly);
        let coords = layer
            .power_to_ib(&img_poly, &BigInt::one())
            .ok_or(KlocError::PrecisionExhausted(layer.precision()))?;
        let sigma = automorphism_from_image(&layer, coords)?;
        gamma.push((sigma, pow_mod(hval, i, m)));
    }
    finish_layer(f, p, n, i, layer, base_theta, gamma)
}

/// General layer construction through Gaussian periods.
#[allow(clippy::too_many_arguments)]
fn period_layer(
    f: &NumberField,
    p: u64,
    n: u32,
    i: u64,
    m: u64,
    h: &[u64],
    kernel: &[u64],
    units: &[u64],
    gamma_order: usize,
) -> Result<Layer> {
    let prec = f.precision();
    let df = f.degree();
    let s = units.len() / h.len();
    let t0 = std::time::Instant::now();

    // period values of the layer generator, per coset of the kernel in the
    // full unit group
    let reps_g = coset_reps(m, units, kernel);
    let mut coset_of: BTreeMap<u64, usize> = BTreeMap::new();
    for (idx, &c) in reps_g.iter().enumerate() {
        for &k in kernel {
            coset_of.insert(mul_mod(c, k, m), idx);
        }
    }
    let mut eta: Option<(Vec<CFx>, ZPoly)> = None;
    for beta in beta_candidates(p, n) {
        let vals: Vec<CFx> = reps_g
            .iter()
            .map(|&c| period(m, c, kernel, &beta, prec))
            .collect();
        if pairwise_distinct(&vals, 1e-8) {
            eta = Some((vals, beta));
            break;
        }
    }
    let (eta_vals, beta) = eta.ok_or_else(|| dbg_fail(prec, "eta separation"))?;

    // which coset of H each embedding of F extends along: matched through
    // the recognized generator of F ∩ Q(μ_{p^n})
    let embedding_mult: Vec<u64> = if s == 1 {
        vec![1; df]
    } else {
        let witness = fixed_subfield_in(f, p, n, h, units)?
            .ok_or_else(|| dbg_fail(prec, "subfield witness for H"))?;
        let mut mults = vec![];
        for j in 0..df {
            let vj = f.embed(&witness.coords, j);
            let close: Vec<usize> = (0..witness.reps.len())
                .filter(|&c| witness.values[c].sub(&vj).abs_f64() < 1e-8)
                .collect();
            if close.len() != 1 {
                return Err(dbg_fail(prec, "embedding coset match"));
            }
            mults.push(witness.reps[close[0]]);
        }
        mults
    };

    // conjugates of θ_layer = θ_F + t·η over Q, for a separating t
    let reps_h = coset_reps(m, h, kernel);
    assert_eq!(reps_h.len(), gamma_order);
    let mut chosen: Option<(Vec<Vec<CFx>>, i64)> = None;
    't_search: for t in 1..=12i64 {
        let tb = BigInt::from(t);
        let mut w: Vec<Vec<CFx>> = vec![];
        for j in 0..df {
            let mut row = vec![];
            let rj = &f.roots()[j];
            for &ha in &reps_h {
                let c = coset_of[&mul_mod(embedding_mult[j], ha, m)];
                row.push(rj.add(&CFx::from_int(&tb, prec).mul(&eta_vals[c])));
            }
            w.push(row);
        }
        let flat: Vec<CFx> = w.iter().flatten().cloned().collect();
        if pairwise_distinct(&flat, 1e-8) {
            chosen = Some((w, t));
            break 't_search;
        }
    }
    let (w, t) = chosen.ok_or_else(|| dbg_fail(prec, "separating t"))?;
    dbg_stage("separating t found", t0);
    let flat: Vec<CFx> = w.iter().flatten().cloned().collect();
    let poly = round_poly_from_roots(&flat, prec)
        .ok_or_else(|| dbg_fail(prec, "minimal polynomial rounding"))?;
    assert_eq!(poly.degree(), df * gamma_order);
    dbg_stage("minimal polynomial rounded", t0);

    // the polynomial is irreducible: its roots are the pairwise distinct
    // conjugates of θ_F + t·η, and there are exactly [F(η):Q] of them
    let layer = if n <= 1 {
        match new_field(&poly) {
            Ok(k) => k,
            Err(KlocError::FactoringFailed(_)) | Err(KlocError::EffortExceeded(_)) => {
                new_field_p_maximal_certified_irreducible(&poly, &[p])?
            }
            Err(e) => return Err(e),
        }
    } else {
        new_field_p_maximal_certified_irreducible(&poly, &[p])?
    };

    // locate the layer's first embedding among the conjugates
    let root0 = &layer.roots()[0];
    let (mut jstar, mut astar, mut best) = (0usize, 0usize, f64::INFINITY);
    for j in 0..df {
        for a in 0..gamma_order {
            let d = w[j][a].sub(root0).abs_f64();
            if d < best {
                best = d;
                jstar = j;
                astar = a;
            }
        }
    }
    let cstar = mul_mod(embedding_mult[jstar], reps_h[astar], m);
    dbg_stage("layer order built", t0);

    // When F is itself a subfield of Q(μ_{p^n}), the whole layer embeds in
    // the cyclotomic field, whose ring of integers is exactly Z[ζ]: every
    // map can be written down there with small height and transported to
    // the layer's power basis by exact linear algebra, avoiding the large
    // lattice recognitions below entirely.
    if df * h.len() == units.len() {
        if let Some((enlarged, base_theta, gamma)) = cyclotomic_exact_maps(
            f, &layer, m, p, n, i, t, &beta, kernel, &reps_g, &reps_h, &coset_of,
        )? {
            dbg_stage("exact cyclotomic route done", t0);
            return finish_layer(f, p, n, i, enlarged, base_theta, gamma);
        }
        dbg_stage("exact cyclotomic route failed", t0);
    }

    // Recognizing θ_F and the Γ-images over the layer basis needs enough
    // bits to dominate the coordinate sizes (which can approach √disc of
    // the layer polynomial), so retry with refined embeddings as needed.
    // When θ_F is not in the computed order at all (its denominator has
    // factors away from p), fall back to rational recognition over the
    // power basis and enlarge the order by the recognized elements. The
    // rational route only recognizes a generating set of Γ-images (one
    // lattice reduction each) and fills in the rest by exact composition;
    // pieces recognized at one precision are kept when escalating.
    let gens = gamma_generators(m, &reps_h, &coset_of);
    let mut known_theta: Option<(ZPoly, BigInt)> = None;
    let mut known_gen_images: BTreeMap<u64, (ZPoly, BigInt)> = BTreeMap::new();
    for mult in [1u32, 2, 4, 8, 16] {
        let wp = prec * mult;
        let working = if mult == 1 {
            layer.clone()
        } else {
            layer.with_precision(wp)
        };
        let f_working = if mult == 1 {
            f.clone()
        } else {
            f.with_precision(wp)
        };
        let eta_hp: Vec<CFx> = if mult == 1 {
            eta_vals.clone()
        } else {
            reps_g
                .iter()
                .map(|&c| period(m, c, kernel, &beta, wp))
                .collect()
        };
        // integral coordinates over the computed order: only worth trying at
        // base precision — when it fails there the cause is almost always a
        // denominator outside the order, not a shortage of bits
        if mult == 1 {
            if let Some((base_theta, gamma)) = recognize_layer_maps(
                &f_working, &working, &eta_hp, &coset_of, &reps_h, m, i, t, jstar, cstar,
            ) {
                dbg_stage("integral recognition done", t0);
                return finish_layer(f, p, n, i, working, base_theta, gamma);
            }
            dbg_stage("integral recognition failed", t0);
        }
        if known_theta.is_none() {
            known_theta = recognize_power_coords(&working, &f_working.roots()[jstar])
                .into_iter()
                .find(|(g, d)| rat_poly_vanishes(f.poly(), g, d, working.poly()));
            dbg_stage(
                &format!(
                    "rational theta {} at {wp} bits",
                    if known_theta.is_some() { "recognized" } else { "missed" }
                ),
                t0,
            );
        }
        if known_theta.is_some() {
            let tb = BigInt::from(t);
            for &ha in &gens {
                if known_gen_images.contains_key(&ha) {
                    continue;
                }
                let c = coset_of[&mul_mod(ha, cstar, m)];
                let target = f_working.roots()[jstar].add(&CFx::from_int(&tb, wp).mul(&eta_hp[c]));
                if let Some(img) = recognize_power_coords(&working, &target)
                    .into_iter()
                    .find(|(g, d)| rat_poly_vanishes(working.poly(), g, d, working.poly()))
                {
                    known_gen_images.insert(ha, img);
                }
            }
            dbg_stage(
                &format!(
                    "generator images {}/{} at {wp} bits",
                    known_gen_images.len(),
                    gens.len()
                ),
                t0,
            );
            if known_gen_images.len() == gens.len() {
                let theta = known_theta.as_ref().expect("checked above");
                if let Some((enlarged, base_theta, gamma)) = assemble_adjoined_layer(
                    &layer,
                    &reps_h,
                    m,
                    p,
                    i,
                    theta,
                    &known_gen_images,
                    &coset_of,
                )? {
                    dbg_stage("adjoined assembly done", t0);
                    return finish_layer(f, p, n, i, enlarged, base_theta, gamma);
                }
                // assembly works with exact data only; more precision in the
                // recognized pieces cannot change its outcome
                dbg_stage("adjoined assembly failed", t0);
                break;
            }
        }
    }
    Err(dbg_fail(prec, "layer coordinate recognition"))
}

/// A set of representatives in `reps_h` whose cosets generate Γ = H/K,
/// greedily chosen from elements of large coset order so that as few images
/// as possible need lattice recognition (one suffices whenever Γ is cyclic).
fn gamma_generators(m: u64, reps_h: &[u64], coset_of: &BTreeMap<u64, usize>) -> Vec<u64> {
    let target = reps_h.len();
    let id_key = coset_of[&(1 % m)];
    let coset_order = |a: u64| -> usize {
        let mut x = a % m;
        let mut k = 1usize;
        while coset_of[&x] != id_key {
            x = mul_mod(x, a, m);
            k += 1;
        }
        k
    };
    let mut cands: Vec<(usize, u64)> = reps_h
        .iter()
        .filter(|&&a| coset_of[&a] != id_key)
        .map(|&a| (coset_order(a), a))
        .collect();
    cands.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut gens: Vec<u64> = vec![];
    let mut covered: BTreeMap<usize, u64> = BTreeMap::new();
    covered.insert(id_key, 1 % m);
    for (_, a) in cands {
        if covered.len() == target {
            break;
        }
        if covered.contains_key(&coset_of[&a]) {
            continue;
        }
        gens.push(a);
        loop {
            let els: Vec<u64> = covered.values().copied().collect();
            let before = covered.len();
            for &x in &els {
                for &g in &gens {
                    let y = mul_mod(x, g, m);
                    covered.entry(coset_of[&y]).or_insert(y);
                }
            }
            if covered.len() == before {
                break;
            }
        }
    }
    gens
}

/// `outer(g/d) ≡ 0 (mod modpoly)`, checked exactly over the rationals.
fn rat_poly_vanishes(outer: &ZPoly, g: &ZPoly, d: &BigInt, modpoly: &ZPoly) -> bool {
    let mut num = ZPoly::zero();
    let mut den = BigInt::one();
    for c in outer.coeffs().iter().rev() {
        num = zpoly_rem_monic(&num.mul(g), modpoly);
        den *= d;
        num = num.add(&ZPoly::constant(c * &den));
        let content = num.content().gcd(&den);
        if content > BigInt::one() {
            num = ZPoly::new(num.coeffs().iter().map(|x| x / &content).collect());
            den /= &content;
        }
    }
    num.is_zero()
}

/// The period `Σ_{k∈subgroup} β(ζ^{mult·k})`, exactly in Z[ζ] mod Φ.
fn period_exact(m: u64, mult: u64, subgroup: &[u64], beta: &ZPoly, phi: &ZPoly) -> ZPoly {
    let mut acc = vec![BigInt::zero(); m as usize];
    for &k in subgroup {
        let base = mul_mod(mult, k, m);
        for (j, c) in beta.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = mul_mod(base, j as u64 % m, m) as usize;
            acc[e] += c;
        }
    }
    zpoly_rem_monic(&ZPoly::new(acc), phi)
}

/// `ζ ↦ ζ^a` applied to a polynomial in ζ, reduced mod Φ.
fn subst_zeta(g: &ZPoly, a: u64, m: u64, phi: &ZPoly) -> ZPoly {
    let mut acc = vec![BigInt::zero(); m as usize];
    for (k, c) in g.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let e = mul_mod(k as u64 % m, a, m) as usize;
        acc[e] += c;
    }
    zpoly_rem_monic(&ZPoly::new(acc), phi)
}

/// Solves `Σ_j x_j·cols[j] = b` over Q by Gaussian elimination; `None`
/// unless the solution exists and is unique.
fn solve_rational(cols: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = b.len();
    let nc = cols.len();
    let mut a: Vec<Vec<BigRational>> = (0..rows)
        .map(|r| {
            let mut row: Vec<BigRational> = cols.iter().map(|c| c[r].clone()).collect();
            row.push(b[r].clone());
            row
        })
        .collect();
    let mut pivots = vec![];
    let mut pr = 0usize;
    for pc in 0..nc {
        let Some(sel) = (pr..rows).find(|&r| !a[r][pc].is_zero()) else {
            continue;
        };
        a.swap(pr, sel);
        let inv = a[pr][pc].recip();
        for x in a[pr].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows {
            if r != pr && !a[r][pc].is_zero() {
                let factor = a[r][pc].clone();
                for cc in pc..=nc {
                    let delta = &factor * &a[pr][cc];
                    a[r][cc] -= delta;
                }
            }
        }
        pivots.push(pc);
        pr += 1;
        if pr == rows {
            break;
        }
    }
    for r in pr..rows {
        if !a[r][nc].is_zero() {
            return None;
        }
    }
    if pivots.len() != nc {
        return None;
    }
    let mut x = vec![BigRational::zero(); nc];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = a[r][nc].clone();
    }
    Some(x)
}

/// Clears denominators: rational coefficient vector -> `(g, d)` with
/// `g/d` the same polynomial and `d > 0` minimal.
fn rat_to_poly(x: &[BigRational]) -> (ZPoly, BigInt) {
    let mut d = BigInt::one();
    for r in x {
        d = d.lcm(r.denom());
    }
    let g = ZPoly::new(x.iter().map(|r| r.numer() * (&d / r.denom())).collect());
    (g, d)
}

/// Exact layer maps for the case F ⊆ Q(μ_{p^n}): θ_F is located inside the
/// cyclotomic field (a small-height recognition, then verified exactly);
/// θ_L = θ_F + t·η and all its Γ-conjugates are exact elements of Z[ζ]
/// (conjugation is the substitution ζ ↦ ζ^{h_a}), and an exact rational
/// linear solve rewrites each of them in powers of θ_L.
#[allow(clippy::too_many_arguments)]
fn cyclotomic_exact_maps(
    f: &NumberField,
    layer: &NumberField,
    m: u64,
    p: u64,
    n: u32,
    i: u64,
    t: i64,
    beta: &ZPoly,
    kernel: &[u64],
    reps_g: &[u64],
    reps_h: &[u64],
    coset_of: &BTreeMap<u64, usize>,
) -> Result<Option<(NumberField, Vec<BigInt>, Vec<(FieldAutomorphism, u64)>)>> {
    let t0 = std::time::Instant::now();
    let phi = crate::poly::cyclotomic_prime_power(p, n);
    let cyc = new_field_p_maximal_certified_irreducible(&phi, &[p])?;
    // θ_F as an exact element of Q(μ_{p^n})
    let theta_f = (0..f.degree()).find_map(|j| {
        recognize_power_coords(&cyc, &f.roots()[j])
            .into_iter()
            .find(|(g, d)| rat_poly_vanishes(f.poly(), g, d, &phi))
    });
    let Some((gf, fden)) = theta_f else {
        dbg_stage("cyclotomic theta_F not recognized", t0);
        return Ok(None);
    };
    // fden·θ_L = gf + fden·t·η_c for the translate that is a root of the
    // layer polynomial
    let tb = BigInt::from(t);
    let mut nu: Option<ZPoly> = None;
    for &c in reps_g {
        let eta_c = period_exact(m, c, kernel, beta, &phi);
        let scaled = ZPoly::new(eta_c.coeffs().iter().map(|x| x * &tb * &fden).collect());
        let cand = gf.add(&scaled);
        if rat_poly_vanishes(layer.poly(), &cand, &fden, &phi) {
            nu = Some(cand);
            break;
        }
    }
    let Some(nu) = nu else {
        dbg_stage("cyclotomic theta_L not located", t0);
        return Ok(None);
    };
    dbg_stage("cyclotomic generators located", t0);

    // ζ-coordinates of the powers of θ_L
    let dd = phi.degree();
    let dl = layer.poly().degree();
    let mut cols: Vec<Vec<BigRational>> = vec![];
    let mut pw = ZPoly::one();
    let mut denpow = BigInt::one();
    for j in 0..dl {
        if j > 0 {
            pw = zpoly_rem_monic(&pw.mul(&nu), &phi);
            denpow *= &fden;
        }
        let mut col = vec![BigRational::zero(); dd];
        for (k, c) in pw.coeffs().iter().enumerate() {
            col[k] = BigRational::new(c.clone(), denpow.clone());
        }
        cols.push(col);
    }
    let to_rat = |g: &ZPoly, d: &BigInt| -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); dd];
        for (k, c) in g.coeffs().iter().enumerate() {
            v[k] = BigRational::new(c.clone(), d.clone());
        }
        v
    };
    let express = |g: &ZPoly, d: &BigInt| -> Option<(ZPoly, BigInt)> {
        solve_rational(&cols, &to_rat(g, d)).map(|x| rat_to_poly(&x))
    };

    let Some(theta) = express(&gf, &fden) else {
        return Ok(None);
    };
    if !rat_poly_vanishes(f.poly(), &theta.0, &theta.1, layer.poly()) {
        return Ok(None);
    }
    let id_key = coset_of[&(1 % m)];
    let mut gen_images: BTreeMap<u64, (ZPoly, BigInt)> = BTreeMap::new();
    for &ha in reps_h {
        if coset_of[&ha] == id_key {
            continue;
        }
        let img_nu = subst_zeta(&nu, ha, m, &phi);
        let Some(img) = express(&img_nu, &fden) else {
            return Ok(None);
        };
        if !rat_poly_vanishes(layer.poly(), &img.0, &img.1, layer.poly()) {
            return Ok(None);
        }
        gen_images.insert(ha, img);
    }
    dbg_stage("cyclotomic images expressed over the layer", t0);
    assemble_adjoined_layer(layer, reps_h, m, p, i, &theta, &gen_images, coset_of)
}

/// The order-enlarging fallback of [`recognize_layer_maps`]: θ_F and a
/// generating set of Γ-images arrive as exact rational elements over the
/// power basis (each certified by exact polynomial vanishing). They are
/// adjoined to the layer's order so their coordinates become integral by
/// construction; the remaining automorphisms are exact compositions of the
/// generators. Returns `None` when the exact data is inconsistent (e.g. a
/// generator image was matched to the wrong conjugate) — retrying with more
/// precision cannot help in that case, only re-recognition could.
#[allow(clippy::too_many_arguments)]
fn assemble_adjoined_layer(
    layer: &NumberField,
    reps_h: &[u64],
    m: u64,
    p: u64,
    i: u64,
    theta: &(ZPoly, BigInt),
    gen_images: &BTreeMap<u64, (ZPoly, BigInt)>,
    coset_of: &BTreeMap<u64, usize>,
) -> Result<Option<(NumberField, Vec<BigInt>, Vec<(FieldAutomorphism, u64)>)>> {
    let t0 = std::time::Instant::now();
    let mut extra = vec![theta.clone()];
    extra.extend(gen_images.values().cloned());
    let enlarged = new_field_with_order_elements(layer.poly(), &[p], &extra)?;
    dbg_stage("order enlarged", t0);
    let base_theta = enlarged
        .power_to_ib(&theta.0, &theta.1)
        .expect("adjoined element lies in the enlarged order");

    // automorphisms keyed by their coset of K in H, starting from the
    // identity and the recognized generators, then closed under composition
    let id_key = coset_of[&(1 % m)];
    let mut auts: BTreeMap<usize, (u64, FieldAutomorphism)> = BTreeMap::new();
    auts.insert(id_key, (1 % m, identity_automorphism(&enlarged)));
    for (&ha, (g, d)) in gen_images {
        let coords = enlarged
            .power_to_ib(g, d)
            .expect("adjoined element lies in the enlarged order");
        let sigma = match automorphism_from_image(&enlarged, coords) {
            Ok(s) => s,
            Err(_) => return Ok(None),
        };
        if sigma.apply(&base_theta) != base_theta {
            return Ok(None);
        }
        match auts.insert(coset_of[&ha], (ha, sigma)) {
            None => {}
            Some(_) => return Ok(None),
        }
    }
    let gamma_order = reps_h.len();
    loop {
        let snapshot: Vec<(u64, FieldAutomorphism)> = auts.values().cloned().collect();
        let before = auts.len();
        'pairs: for (ha, sa) in &snapshot {
            for (hb, sb) in &snapshot {
                let hc = mul_mod(*ha, *hb, m);
                let key = coset_of[&hc];
                match auts.get(&key) {
                    None => {
                        auts.insert(key, (hc, sa.compose(sb)));
                        if auts.len() == gamma_order {
                            break 'pairs;
                        }
                    }
                    Some((_, existing)) => {
                        // closure must be consistent: a mismatch means a
                        // generator was labeled with the wrong character value
                        if existing.matrix != sa.compose(sb).matrix {
                            return Ok(None);
                        }
                    }
                }
            }
        }
        if auts.len() == gamma_order || auts.len() == before {
            break;
        }
    }
    if auts.len() != gamma_order {
        return Ok(None);
    }
    // the action must be faithful: distinct cosets, distinct automorphisms
    let mats: Vec<&FieldAutomorphism> = auts.values().map(|(_, s)| s).collect();
    for a in 0..mats.len() {
        for b in a + 1..mats.len() {
            if mats[a].matrix == mats[b].matrix {
                return Ok(None);
            }
        }
    }
    let mut gamma = vec![];
    for &ha in reps_h {
        let Some((_, sigma)) = auts.get(&coset_of[&ha]) else {
            return Ok(None);
        };
        gamma.push((sigma.clone(), pow_mod(ha, i, m)));
    }
    dbg_stage("automorphism closure done", t0);
    Ok(Some((enlarged, base_theta, gamma)))
}

/// θ_F's coordinates inside the layer and the Γ-automorphisms, each verified
/// exactly; `None` when coordinate recognition fails at this precision.
#[allow(clippy::too_many_arguments)]
fn recognize_layer_maps(
    f: &NumberField,
    layer: &NumberField,
    eta_vals: &[CFx],
    coset_of: &BTreeMap<u64, usize>,
    reps_h: &[u64],
    m: u64,
    i: u64,
    t: i64,
    jstar: usize,
    cstar: u64,
) -> Option<(Vec<BigInt>, Vec<(FieldAutomorphism, u64)>)> {
    let prec = layer.precision();
    // θ_F inside the layer, verified exactly
    let base_theta = recognize_integral_element(layer, &f.roots()[jstar])?;
    if !layer
        .el_eval_poly(f.poly(), &base_theta)
        .iter()
        .all(|c| c.is_zero())
    {
        return None;
    }
    // Γ: σ with χ(σ) ≡ h_a sends η to the h_a-translated period
    let tb = BigInt::from(t);
    let mut gamma = vec![];
    for &ha in reps_h {
        let c = coset_of[&mul_mod(ha, cstar, m)];
        let target = f.roots()[jstar].add(&CFx::from_int(&tb, prec).mul(&eta_vals[c]));
        let coords = recognize_integral_element(layer, &target)?;
        let sigma = automorphism_from_image(layer, coords).ok()?;
        if sigma.apply(&base_theta) != base_theta {
            return None;
        }
        gamma.push((sigma, pow_mod(ha, i, m)));
    }
    Some((base_theta, gamma))
}

fn finish_layer(
    f: &NumberField,
    p: u64,
    n: u32,
    i: u64,
    layer: NumberField,
    base_theta: Vec<BigInt>,
    gamma: Vec<(FieldAutomorphism, u64)>,
) -> Result<Layer> {
    // κ must be injective on Γ (faithful action on μ_{p^n}^{⊗i})
    let kappas: BTreeSet<u64> = gamma.iter().map(|(_, k)| *k).collect();
    assert_eq!(kappas.len(), gamma.len(), "κ is injective on Γ");
    let degree = gamma.len();
    assert_eq!(layer.degree(), f.degree() * degree);
    Ok(Layer {
        p,
        n,
        i,
        base_fingerprint: f.fingerprint(),
        base_degree: f.degree(),
        layer_field: layer,
        base_theta,
        gamma,
        degree,
    })
}

// ---------------------------------------------------------------------------
// primes above p in a layer
// ---------------------------------------------------------------------------

/// Primes above p in the layer field, matched to the primes of the base
/// field they lie over.
pub struct LayerSPrimes {
    pub layer_primes: Vec<PrimeIdealFactor>,
    pub base_primes: Vec<PrimeIdealFactor>,
    /// `behavior[b]` lists, for base prime b, the layer primes above it as
    /// `(layer index, relative e, relative f)`
    pub behavior: Vec<Vec<(usize, u32, u32)>>,
}

/// Factors p in the layer field and reports the splitting behavior of every
/// base prime above p.
pub fn layer_s_primes(f: &NumberField, l: &Layer) -> Result<LayerSPrimes> {
    assert_eq!(l.base_fingerprint, f.fingerprint(), "layer belongs to another field");
    let p = l.p;
    let layer_primes = factor_rational_prime(&l.layer_field, p)?;
    let base_primes = factor_rational_prime(f, p)?;
    let rel_degree = (l.layer_field.degree() / f.degree()) as u32;

    // map den·(basis element of P) into the layer through θ_F; the extra
    // integer factor only shifts valuations by a computable amount
    let (_, f_den) = f.integral_basis();
    let mut behavior: Vec<Vec<(usize, u32, u32)>> = vec![vec![]; base_primes.len()];
    let mut assigned = vec![false; layer_primes.len()];
    for (b, bp) in base_primes.iter().enumerate() {
        let scale = f_den * &bp.ideal.den;
        let vp_scale = {
            let mut v = 0u32;
            let mut x = scale.clone();
            let pb = BigInt::from(p);
            while (&x % &pb).is_zero() {
                x /= &pb;
                v += 1;
            }
            v
        };
        for (qidx, qp) in layer_primes.iter().enumerate() {
            let shift = qp.e * vp_scale;
            let cap = shift + 2;
            let mut inside = true;
            for r in 0..bp.ideal.matrix.rows() {
                let g = f.ib_to_power(bp.ideal.matrix.row(r));
                let mapped = l.layer_field.el_eval_poly(&g, &l.base_theta);
                if mapped.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let v = element_valuation(&l.layer_field, &mapped, &qp.ideal, cap)?;
                if v < shift + 1 {
                    inside = false;
                    break;
                }
            }
            if inside {
                assert!(!assigned[qidx], "layer prime above two base primes");
                assigned[qidx] = true;
                assert_eq!(qp.e % bp.e, 0, "relative ramification is integral");
                assert_eq!(qp.f % bp.f, 0, "relative residue degree is integral");
                behavior[b].push((qidx, qp.e / bp.e, qp.f / bp.f));
            }
        }
        let total: u32 = behavior[b].iter().map(|&(_, e, ff)| e * ff).sum();
        assert_eq!(total, rel_degree, "Σ e·f over a base prime equals [layer:F]");
    }
    assert!(assigned.iter().all(|&a| a), "every layer prime lies over a base prime");
    Ok(LayerSPrimes {
        layer_primes,
        base_primes,
        behavior,
    })
}

// ---------------------------------------------------------------------------
// residue extension degrees and local K-group orders
// ---------------------------------------------------------------------------

/// `[k_v(μ_{p^n}^{⊗i}) : k_v]` for a residue field of size q coprime to p:
/// the multiplicative order of `q^i mod p^n`.
pub fn residue_extension_degree(q: u64, p: u64, n: u32, i: u64) -> u64 {
    if n == 0 {
        return 1;
    }
    let m = prime_power(p, n).expect("p^n fits in u64");
    assert_eq!(num_integer::gcd(q, p), 1, "q must be coprime to p");
    let phi = (units_mod(m)).len() as u64;
    order_dividing(pow_mod(q, i, m), m, phi)
}

/// `|K_{2i-1}(k_v)| = q^i − 1` for the residue field of size q.
pub fn local_k_order(q: u64, i: u64) -> BigInt {
    assert!(q >= 2 && i >= 1);
    let e = u32::try_from(i).expect("twist index fits in u32");
    BigInt::from(q).pow(e) - BigInt::one()
}

// ---------------------------------------------------------------------------
// nonexceptionality at p = 2
// ---------------------------------------------------------------------------

/// Whether F is nonexceptional at 2: the closed subgroup `χ₂(G_F) ⊆ Z₂^×`
/// contains no element of order 2, i.e. does not contain −1. Decided at the
/// first level where `[F ∩ Q(μ_{2^n}) : Q]` stops growing — from there on
/// the reduction of the image determines it completely.
pub fn is_nonexceptional(f: &NumberField) -> Result<bool> {
    let mut prev: Option<u64> = None;
    for n in 2..=16u32 {
        let h = char_image(f, 2, n)?;
        let phi = 1u64 << (n - 1);
        let s = phi / h.elements.len() as u64;
        if prev == Some(s) {
            let minus_one = (1u64 << n) - 1;
            return Ok(!h.elements.contains(&minus_one));
        }
        prev = Some(s);
    }
    Err(KlocError::EffortExceeded(
        "2-adic character image did not stabilize".into(),
    ))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn field(s: &str) -> NumberField {
        new_field(&parse_poly(s).unwrap()).unwrap()
    }

    #[test]
    fn char_image_of_q_is_everything() {
        let q = field("x");
        let h = char_image(&q, 5, 1).unwrap();
        assert_eq!(h.elements, vec![1, 2, 3, 4]);
        let h9 = char_image(&q, 3, 2).unwrap();
        assert_eq!(h9.elements, vec![1, 2, 4, 5, 7, 8]);
    }

    #[test]
    fn char_image_of_real_quadratic_in_mu5() {
        // Q(√5) is the fixed field of ±1 in Q(μ_5)
        let k = field("x^2-x-1");
        let h = char_image(&k, 5, 1).unwrap();
        assert_eq!(h.elements, vec![1, 4]);
    }

    #[test]
    fn char_image_of_gaussian_field_at_two() {
        let k = field("x^2+1");
        assert_eq!(char_image(&k, 2, 2).unwrap().elements, vec![1]);
        assert_eq!(char_image(&k, 2, 3).unwrap().elements, vec![1, 5]);
    }

    #[test]
    fn char_image_reduction_compatibility() {
        // reduction mod p^n maps the level-(n+1) image onto the level-n one
        for poly in ["x^2-x-1", "x^2+1", "x^2+2"] {
            let k = field(poly);
            for p in [3u64, 5] {
                let h1 = char_image(&k, p, 1).unwrap();
                let h2 = char_image(&k, p, 2).unwrap();
                let reduced: BTreeSet<u64> =
                    h2.elements.iter().map(|&x| x % p).collect();
                let h1set: BTreeSet<u64> = h1.elements.iter().copied().collect();
                assert_eq!(reduced, h1set, "{poly} at {p}");
            }
        }
    }

    #[test]
    fn layer_at_level_zero_is_the_base() {
        let k = field("x^2+5");
        let l = build_layer(&k, 7, 0, 3).unwrap();
        assert_eq!(l.degree, 1);
        assert_eq!(l.layer_field.fingerprint(), k.fingerprint());
    }

    #[test]
    fn layer_q_p3_i2_is_q() {
        // χ² is trivial mod 3, so the layer collapses to Q
        let q = field("x");
        let l = build_layer(&q, 3, 1, 2).unwrap();
        assert_eq!(l.degree, 1);
        assert_eq!(l.layer_field.degree(), 1);
    }

    #[test]
    fn layer_q_p5_i2_is_real_quadratic() {
        // ker(χ² mod 5) = {±1}, fixed field Q(√5)
        let q = field("x");
        let l = build_layer(&q, 5, 1, 2).unwrap();
        assert_eq!(l.degree, 2);
        assert_eq!(l.layer_field.degree(), 2);
        assert_eq!(l.layer_field.discriminant(), &BigInt::from(5));
        let mut kappas: Vec<u64> = l.gamma.iter().map(|(_, k)| *k).collect();
        kappas.sort_unstable();
        assert_eq!(kappas, vec![1, 4]);
    }

    #[test]
    fn layer_q_p5_i1_is_full_cyclotomic() {
        let q = field("x");
        let l = build_layer(&q, 5, 1, 1).unwrap();
        assert_eq!(l.degree, 4);
        assert_eq!(l.layer_field.discriminant(), &BigInt::from(125));
        // Γ is the full unit group mod 5 through κ
        let mut kappas: Vec<u64> = l.gamma.iter().map(|(_, k)| *k).collect();
        kappas.sort_unstable();
        assert_eq!(kappas, vec![1, 2, 3, 4]);
        // automorphism group closes: σ τ is again in Γ
        let (s0, _) = &l.gamma[1];
        let (s1, _) = &l.gamma[2];
        let comp = s0.compose(s1);
        assert!(l.gamma.iter().any(|(g, _)| g == &comp));
    }

    #[test]
    fn layer_of_quadratic_base() {
        // F = Q(√5), p = 3: μ_3 generates a quadratic extension with κ = χ
        let k = field("x^2-x-1");
        let l = build_layer(&k, 3, 1, 1).unwrap();
        assert_eq!(l.degree, 2);
        assert_eq!(l.layer_field.degree(), 4);
        let mut kappas: Vec<u64> = l.gamma.iter().map(|(_, k)| *k).collect();
        kappas.sort_unstable();
        assert_eq!(kappas, vec![1, 2]);
    }

    #[test]
    fn s_primes_of_full_cyclotomic_layer() {
        let q = field("x");
        let l = build_layer(&q, 5, 1, 1).unwrap();
        let sp = layer_s_primes(&q, &l).unwrap();
        assert_eq!(sp.layer_primes.len(), 1);
        assert_eq!(sp.layer_primes[0].e, 4);
        assert_eq!(sp.layer_primes[0].f, 1);
        assert_eq!(sp.behavior, vec![vec![(0, 4, 1)]]);
    }

    #[test]
    fn s_primes_of_trivial_layer_on_sextic() {
        // μ_3 ⊆ F for the sextic example field, so the (3,1,1) layer is F
        let k = field("x^6-793*x^3+226981");
        let l = build_layer(&k, 3, 1, 1).unwrap();
        assert_eq!(l.degree, 1);
        let sp = layer_s_primes(&k, &l).unwrap();
        assert_eq!(sp.layer_primes.len(), 1);
        assert_eq!(sp.layer_primes[0].e, 6);
        assert_eq!(sp.behavior, vec![vec![(0, 1, 1)]]);
    }

    #[test]
    fn residue_degrees() {
        assert_eq!(residue_extension_degree(2, 3, 1, 1), 2);
        assert_eq!(residue_extension_degree(2, 3, 1, 2), 1);
        // 3 has order 10 modulo 61
        assert_eq!(residue_extension_degree(3, 61, 1, 1), 10);
        assert_eq!(61 % 3, 1);
    }

    #[test]
    fn residue_degree_gcd_invariant() {
        // ord(q^i) = ord(q) / gcd(ord(q), i)
        for (q, p, n) in [(2u64, 7u64, 1u32), (3, 11, 1), (2, 5, 2), (7, 3, 3)] {
            let d1 = residue_extension_degree(q, p, n, 1);
            for i in 1..=12u64 {
                assert_eq!(
                    residue_extension_degree(q, p, n, i),
                    d1 / num_integer::gcd(d1, i),
                    "q={q} p={p} n={n} i={i}"
                );
            }
        }
    }

    #[test]
    fn exceptionality() {
        assert!(!is_nonexceptional(&field("x")).unwrap()); // Q is exceptional
        assert!(is_nonexceptional(&field("x^2+1")).unwrap()); // Q(i)
        assert!(is_nonexceptional(&field("x^2+2")).unwrap()); // Q(√−2)
        assert!(!is_nonexceptional(&field("x^2-2")).unwrap()); // real field
    }

    #[test]
    fn exceptional_base_rejected_at_two() {
        let q = field("x");
        assert!(matches!(
            build_layer(&q, 2, 1, 1),
            Err(KlocError::OutOfTheoremScope)
        ));
        // nonexceptional base runs
        let gauss = field("x^2+1");
        let l = build_layer(&gauss, 2, 2, 1).unwrap();
        assert_eq!(l.degree, 1); // μ_4 ⊆ Q(i)
    }

    #[test]
    fn local_orders() {
        assert_eq!(local_k_order(3, 1), BigInt::from(2));
        assert_eq!(local_k_order(4, 2), BigInt::from(15));
        assert_eq!(local_k_order(2, 3), BigInt::from(7));
    }
}
