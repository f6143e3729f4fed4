//! Splitting decision procedures.
//!
//! For a number field `F`, prime `p`, and twist index `i`, the localization
//! sequence for `K_{2i}(F)` at `p` splits exactly when every per-level
//! obstruction group — the twisted Γ-coinvariants of the p-part of the
//! S-class group of the layer field — vanishes. This module computes those
//! groups level by level, applies the shortcuts that decide the answer
//! without visiting every level (the μ_p shortcut, the Nakayama reduction,
//! tower certification), and evaluates the four-hypothesis wild-kernel
//! criterion.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::classgrp::{
    class_group, galois_action_on_classes, s_quotient, ClassGroupConfig,
};
use crate::cyclolayer::{build_layer, char_image, is_nonexceptional, layer_s_primes};
use crate::error::{KlocError, Result};
use crate::intlinalg::{
    p_primary_part, solve_integer, twisted_coinvariants, FiniteAbelianGroup, GaloisModule,
    GroupMap, IntMatrix,
};
use crate::numfield::{factor_rational_prime, minkowski_bound, NumberField};

/// Effort knobs for the decision procedures.
#[derive(Clone, Debug)]
pub struct CriterionConfig {
    /// Highest layer level checked by [`analyze_splitting`] when no shortcut
    /// settles the verdict earlier.
    pub max_level: u32,
    /// Factor bases of layer-field class groups are truncated to this norm
    /// bound whenever the Minkowski bound exceeds it. A truncated
    /// presentation is an upper bound only and is never used to certify
    /// splitting.
    pub generation_cap: BigInt,
    /// Settings forwarded to the class-group computation.
    pub class_cfg: ClassGroupConfig,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        let mut class_cfg = ClassGroupConfig::default();
        // layer fields legitimately exceed the casual-use degree and
        // discriminant caps of the class-group module
        class_cfg.max_degree = 48;
        class_cfg.max_disc = BigInt::from(10u32).pow(60);
        // unit-infinite fields get no certification sweep, so the relation
        // search itself must be pushed well past apparent stabilization
        class_cfg.stable_rounds = 120;
        class_cfg.stale_round_limit = 3000;
        CriterionConfig {
            max_level: 2,
            generation_cap: BigInt::from(1500),
            class_cfg,
        }
    }
}

/// Which formula produced an obstruction group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObstructionRoute {
    /// n = 0: the group is trivial by definition, nothing is computed.
    LevelZero,
    /// Twisted coinvariants of the S-class group under the full Γ-action.
    FullCoinvariants,
    /// μ_p ⊆ F makes Γ a p-group, so the coinvariants vanish exactly when
    /// the p-part of the S-class group does; the action is never computed.
    NakayamaReduction,
}

impl ObstructionRoute {
    pub fn as_str(self) -> &'static str {
        match self {
            ObstructionRoute::LevelZero => "level_zero",
            ObstructionRoute::FullCoinvariants => "full_coinvariants",
            ObstructionRoute::NakayamaReduction => "nakayama_reduction",
        }
    }
}

/// What was computed about one layer field along the way.
#[derive(Clone, Debug)]
pub struct LayerSummary {
    /// absolute degree of the layer field
    pub degree: usize,
    /// `|Γ| = [layer : F]`
    pub gamma_order: usize,
    /// `(e, f)` of each prime above p in the layer field
    pub s_primes: Vec<(u32, u32)>,
    /// p-part of the S-class group of the layer field
    pub class_p_part: FiniteAbelianGroup,
    /// the factor base was truncated below the Minkowski bound, so the
    /// class-group presentation is an upper bound only
    pub truncated: bool,
    /// the class-group presentation was fully verified
    pub certified: bool,
}

/// The obstruction group at one level, with its provenance.
#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub p: u64,
    pub i: u64,
    pub n: u32,
    /// the twisted coinvariant group; splitting requires it to vanish
    pub group: FiniteAbelianGroup,
    pub layer: LayerSummary,
    pub route: ObstructionRoute,
    /// p = 2 only: the identification of this group with the K-theory
    /// obstruction is guaranteed only for large n, though vanishing for
    /// every n is still equivalent to splitting
    pub small_n_caveat: bool,
}

/// How total ramification in the next tower level was established.
#[derive(Clone, Debug)]
pub enum RamificationEvidence {
    /// F = Q: every layer is a subfield of a p-power cyclotomic field, in
    /// which p is totally ramified, so each tower step has a unique,
    /// totally ramified prime above p.
    PrimePowerCyclotomic,
    /// Established by factoring p in both layer fields and comparing.
    LayerFactorization {
        /// `(e, f)` of the unique prime above p at level n0
        base: (u32, u32),
        /// `(e, f)` of the unique prime above p at level n0 + 1
        next: (u32, u32),
    },
}

/// Evidence that the whole tower above level `n0` has trivial p-class
/// S-groups, hence trivial obstructions at every level.
#[derive(Clone, Debug)]
pub struct TowerCertificate {
    pub n0: u32,
    /// absolute degree of the level-n0 layer field
    pub layer_degree: usize,
    pub ramification: RamificationEvidence,
}

/// The three-valued decision. The underlying theorem quantifies over all
/// levels, so "splits" is only ever asserted with a tower certificate.
#[derive(Clone, Debug)]
pub enum SplittingVerdict {
    DoesNotSplit { witness_level: u32 },
    SplitsCertified { certificate: TowerCertificate },
    NoObstructionUpTo { max_level: u32 },
}

/// Verdict plus everything computed on the way to it.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub verdict: SplittingVerdict,
    pub reports: Vec<ObstructionReport>,
    pub caveats: Vec<String>,
}

/// The four-hypothesis wild-kernel criterion: when all hypotheses hold,
/// `WK^{ét}_{2i}(F)_p = 0` for every i ≥ 1 and the localization sequence
/// does not split for any i ≥ 1.
#[derive(Clone, Debug)]
pub struct JaulentReport {
    /// μ_p ⊆ F; (Cl^S_F)_p ≅ Z/p; unique prime above p; F(μ_{p²})/F
    /// nontrivial and totally split at the primes over p
    pub hypotheses: [bool; 4],
    pub evidence: [String; 4],
    /// true exactly when all four hypotheses hold
    pub conclusion: bool,
    pub caveats: Vec<String>,
}

/// `μ_p ⊆ F`, tested through the cyclotomic character image at level 1.
pub fn mu_p_in_field(f: &NumberField, p: u64) -> Result<bool> {
    Ok(char_image(f, p, 1)?.elements.len() == 1)
}

/// Pushes an automorphism of the source group through a surjective
/// coordinate map: the returned matrix acts on the map's target and
/// commutes with the map. Panics if the map has no integral section (it
/// always does for the quotient and p-part maps used here).
fn push_action(map: &GroupMap, act: &IntMatrix) -> IntMatrix {
    let rs = map.matrix.cols();
    let rt = map.target.rank();
    let mut out = IntMatrix::zero(rt, rt);
    if rt == 0 {
        return out;
    }
    // section: solve  map.matrix · s + diag(invariants) · w = e_u
    let mut aug = IntMatrix::zero(rt, rs + rt);
    for r in 0..rt {
        for c in 0..rs {
            aug.set(r, c, map.matrix.get(r, c).clone());
        }
        aug.set(r, rs + r, map.target.invariants()[r].clone());
    }
    for u in 0..rt {
        let mut b = vec![BigInt::zero(); rt];
        b[u] = BigInt::one();
        let sol = solve_integer(&aug, &b).expect("surjective group map has a section");
        let s = sol[..rs].to_vec();
        let img = map.apply(&act.mul_vec(&s));
        for r in 0..rt {
            out.set(r, u, img[r].clone());
        }
    }
    out
}

/// The obstruction group at level `n`: the twisted Γ-coinvariants of the
/// p-part of the S-class group of the layer field `F_{i,n}`.
pub fn obstruction(
    f: &NumberField,
    p: u64,
    i: u64,
    n: u32,
    cfg: &CriterionConfig,
) -> Result<ObstructionReport> {
    assert!(i >= 1, "twist index must be at least 1");
    if n == 0 {
        // trivial by definition: the 0-th layer carries no twist
        let s_primes = factor_rational_prime(f, p)?
            .iter()
            .map(|q| (q.e, q.f))
            .collect();
        return Ok(ObstructionReport {
            p,
            i,
            n,
            group: FiniteAbelianGroup::trivial(),
            layer: LayerSummary {
                degree: f.degree(),
                gamma_order: 1,
                s_primes,
                class_p_part: FiniteAbelianGroup::trivial(),
                truncated: false,
                certified: false,
            },
            route: ObstructionRoute::LevelZero,
            small_n_caveat: false,
        });
    }
    let layer = build_layer(f, p, n, i)?;
    let kf = &layer.layer_field;
    let mut ccfg = cfg.class_cfg.clone();
    ccfg.p_focus = Some(p);
    let truncated = minkowski_bound(kf) > cfg.generation_cap;
    if truncated {
        ccfg.generation_bound = Some(cfg.generation_cap.clone());
    }
    let cl = class_group(kf, &ccfg)?;
    let sq = s_quotient(kf, &cl, p)?;
    let (a_p, pmap) = p_primary_part(&sq.structure, p);
    let summary = LayerSummary {
        degree: kf.degree(),
        gamma_order: layer.degree,
        s_primes: factor_rational_prime(kf, p)?
            .iter()
            .map(|q| (q.e, q.f))
            .collect(),
        class_p_part: a_p.clone(),
        truncated,
        certified: cl.certified,
    };
    let mu_p = mu_p_in_field(f, p)?;
    let (group, route) = if layer.degree == 1 || a_p.is_trivial() {
        if mu_p && layer.degree > 1 {
            // Γ is a p-group acting on the trivial p-group: nothing to do
            (FiniteAbelianGroup::trivial(), ObstructionRoute::NakayamaReduction)
        } else {
            // no actors (or a trivial module): coinvariants are A/p^n A
            let module = GaloisModule::new(a_p, vec![], Some(BTreeMap::new()));
            (
                twisted_coinvariants(&module, p, n)?,
                ObstructionRoute::FullCoinvariants,
            )
        }
    } else {
        // full route: Γ acts on the class group; push the action through
        // the S-quotient and the p-part projection
        let mut actors = vec![];
        let mut character = BTreeMap::new();
        let id = IntMatrix::identity(kf.degree());
        for (j, (sigma, kappa)) in layer.gamma.iter().enumerate() {
            if sigma.matrix == id {
                continue;
            }
            let on_cl = galois_action_on_classes(kf, &cl, sigma)?;
            let on_sq = push_action(&sq.quotient_map, &on_cl);
            let on_ap = push_action(
                &pmap,
                &on_sq,
            );
            let label = format!("g{j}");
            character.insert(label.clone(), BigInt::from(*kappa));
            actors.push((label, on_ap));
        }
        let module = GaloisModule::new(a_p, actors, Some(character));
        (
            twisted_coinvariants(&module, p, n)?,
            ObstructionRoute::FullCoinvariants,
        )
    };
    Ok(ObstructionReport {
        p,
        i,
        n,
        group,
        layer: summary,
        route,
        small_n_caveat: p == 2,
    })
}

/// The μ_p shortcut: when `μ_p ⊆ F` and `(Cl^S_F)_p ≠ 0`, the sequence does
/// not split for any `i ≥ 1`. Returns the nontrivial p-part as evidence, or
/// `None` when the shortcut does not apply (including when the class group
/// is out of reach at the configured effort).
pub fn trieste_shortcut(
    f: &NumberField,
    p: u64,
    cfg: &CriterionConfig,
) -> Result<Option<FiniteAbelianGroup>> {
    if !mu_p_in_field(f, p)? {
        return Ok(None);
    }
    let mut ccfg = cfg.class_cfg.clone();
    ccfg.p_focus = Some(p);
    if minkowski_bound(f) > cfg.generation_cap {
        ccfg.generation_bound = Some(cfg.generation_cap.clone());
    }
    let cl = match class_group(f, &ccfg) {
        Ok(cl) => cl,
        Err(KlocError::EffortExceeded(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let sq = s_quotient(f, &cl, p)?;
    let (a_p, _) = p_primary_part(&sq.structure, p);
    if a_p.is_trivial() {
        return Ok(None);
    }
    Ok(Some(a_p))
}

/// Tower certification at level `n0`: when F = Q or `μ_p ⊆ F`, exactly one
/// prime of `F_{i,n0}` lies above p, it is totally ramified in
/// `F_{i,n0+1}/F_{i,n0}`, and the p-part of the level-n0 S-class group is
/// trivial (with a factor base covering the full Minkowski bound), then
/// every higher level has a trivial p-class S-group and every obstruction
/// vanishes.
pub fn certify_split_tower(
    f: &NumberField,
    p: u64,
    i: u64,
    n0: u32,
    cfg: &CriterionConfig,
) -> Result<Option<TowerCertificate>> {
    assert!(n0 >= 1);
    if f.degree() > 1 && !mu_p_in_field(f, p)? {
        return Ok(None);
    }
    let layer = build_layer(f, p, n0, i)?;
    let kf = &layer.layer_field;
    let primes = factor_rational_prime(kf, p)?;
    if primes.len() != 1 {
        return Ok(None);
    }
    // total ramification in the next level
    let ramification = if f.degree() == 1 {
        // every layer over Q sits in Q(μ_{p^{n0+1}}), where p is totally
        // ramified; the unique prime below stays totally ramified in any
        // subextension of the tower
        RamificationEvidence::PrimePowerCyclotomic
    } else {
        // the tower can be stationary for a few levels (mu_{p^m} already in
        // the layer); those levels share field and class data with n0, so
        // the ramification test must look at the first level that grows
        let mut m = n0 + 1;
        let next = loop {
            let cand = build_layer(f, p, m, i)?;
            if cand.layer_field.degree() > kf.degree() {
                break cand;
            }
            if m >= n0 + 6 {
                return Ok(None);
            }
            m += 1;
        };
        let sp_next = layer_s_primes(f, &next)?;
        if sp_next.layer_primes.len() != 1 {
            return Ok(None);
        }
        let b = (primes[0].e, primes[0].f);
        let nx = (sp_next.layer_primes[0].e, sp_next.layer_primes[0].f);
        let step = (next.layer_field.degree() / kf.degree()) as u32;
        if nx.0 != b.0 * step || nx.1 != b.1 {
            return Ok(None);
        }
        RamificationEvidence::LayerFactorization { base: b, next: nx }
    };
    // trivial p-part of the S-class group, with full generation (a
    // truncated factor base could hide classes, so it certifies nothing)
    if minkowski_bound(kf) > cfg.generation_cap {
        return Ok(None);
    }
    let mut ccfg = cfg.class_cfg.clone();
    ccfg.p_focus = Some(p);
    let cl = class_group(kf, &ccfg)?;
    let sq = s_quotient(kf, &cl, p)?;
    let (a_p, _) = p_primary_part(&sq.structure, p);
    if !a_p.is_trivial() {
        return Ok(None);
    }
    Ok(Some(TowerCertificate {
        n0,
        layer_degree: kf.degree(),
        ramification,
    }))
}

/// Decides splitting for `K_{2i}(F)` at p, checking levels `1..=max_level`
/// with early exits through the μ_p shortcut and tower certification.
pub fn analyze_splitting(
    f: &NumberField,
    p: u64,
    i: u64,
    max_level: u32,
    cfg: &CriterionConfig,
) -> Result<Analysis> {
    assert!(max_level >= 1);
    assert!(i >= 1, "twist index must be at least 1");
    if p == 2 && !is_nonexceptional(f)? {
        return Err(KlocError::OutOfTheoremScope);
    }
    let mut caveats = vec![];
    if p == 2 {
        caveats.push(
            "p=2: per-level groups are identified with the true obstructions only for large n; \
             vanishing at every level remains equivalent to splitting"
                .to_string(),
        );
    }
    let mut reports = vec![];
    if trieste_shortcut(f, p, cfg)?.is_some() {
        // μ_p ⊆ F forces Γ trivial at level 1, so the level-1 group is the
        // nontrivial (Cl^S_F)_p mod p — recorded as the witness
        let rep = obstruction(f, p, i, 1, cfg)?;
        assert!(!rep.group.is_trivial(), "shortcut implies a level-1 witness");
        note_presentation_caveats(&rep, &mut caveats);
        reports.push(rep);
        return Ok(Analysis {
            verdict: SplittingVerdict::DoesNotSplit { witness_level: 1 },
            reports,
            caveats,
        });
    }
    for n in 1..=max_level {
        let rep = obstruction(f, p, i, n, cfg)?;
        note_presentation_caveats(&rep, &mut caveats);
        let nontrivial = !rep.group.is_trivial();
        reports.push(rep);
        if nontrivial {
            return Ok(Analysis {
                verdict: SplittingVerdict::DoesNotSplit { witness_level: n },
                reports,
                caveats,
            });
        }
        if n == 1 {
            // a certificate at the first level settles every higher level,
            // so the deeper (and much larger) layers are never constructed
            if let Some(certificate) = certify_split_tower(f, p, i, 1, cfg)? {
                return Ok(Analysis {
                    verdict: SplittingVerdict::SplitsCertified { certificate },
                    reports,
                    caveats,
                });
            }
        }
    }
    Ok(Analysis {
        verdict: SplittingVerdict::NoObstructionUpTo { max_level },
        reports,
        caveats,
    })
}

fn note_presentation_caveats(rep: &ObstructionReport, caveats: &mut Vec<String>) {
    if rep.layer.truncated {
        caveats.push(format!(
            "level {}: class-group factor base truncated below the Minkowski bound; \
             the presented group is an upper bound",
            rep.n
        ));
    } else if !rep.layer.certified && !rep.layer.class_p_part.is_trivial() {
        caveats.push(format!(
            "level {}: class-group presentation is an unverified upper bound \
             (no finite-unit certification)",
            rep.n
        ));
    }
}

/// Evaluates the four wild-kernel hypotheses and, when all hold, concludes
/// that the wild kernel is trivial and the sequence does not split, for
/// every `i ≥ 1`.
pub fn jaulent_check(f: &NumberField, p: u64, cfg: &CriterionConfig) -> Result<JaulentReport> {
    assert!(p % 2 == 1, "the wild-kernel criterion needs an odd prime");
    let mut caveats = vec![];

    // 1: μ_p ⊆ F
    let h1 = mu_p_in_field(f, p)?;
    let e1 = format!("cyclotomic character image at level 1 {}", if h1 { "is trivial" } else { "is nontrivial" });

    // 2: (Cl^S_F)_p ≅ Z/p
    let mut ccfg = cfg.class_cfg.clone();
    ccfg.p_focus = Some(p);
    if minkowski_bound(f) > cfg.generation_cap {
        ccfg.generation_bound = Some(cfg.generation_cap.clone());
    }
    let cl = class_group(f, &ccfg)?;
    let sq = s_quotient(f, &cl, p)?;
    let (a_p, _) = p_primary_part(&sq.structure, p);
    let h2 = a_p.invariants() == [BigInt::from(p)];
    let e2 = format!(
        "p-part of the S-class group has invariants {:?}",
        a_p.invariants().iter().map(|d| d.to_string()).collect::<Vec<_>>()
    );
    if !cl.certified {
        caveats.push(
            "the class-group presentation is an unverified upper bound; hypothesis 2 \
             compares against the presented group"
                .to_string(),
        );
    }

    // 3: exactly one prime of F above p
    let primes = factor_rational_prime(f, p)?;
    let h3 = primes.len() == 1;
    let e3 = format!("{} prime(s) above {p}", primes.len());

    // 4: F(μ_{p²})/F nontrivial and totally split at the primes above p
    let layer = build_layer(f, p, 2, 1)?;
    let (h4, e4) = if layer.degree <= 1 {
        (false, "F(μ_{p^2}) = F (extension trivial)".to_string())
    } else {
        let sp = layer_s_primes(f, &layer)?;
        let split = sp
            .behavior
            .iter()
            .all(|b| b.len() == layer.degree && b.iter().all(|&(_, e, ff)| e == 1 && ff == 1));
        (
            split,
            format!(
                "degree-{} extension; primes above {p} split into {:?} (relative e, f)",
                layer.degree,
                sp.behavior
                    .iter()
                    .map(|b| b.iter().map(|&(_, e, ff)| (e, ff)).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            ),
        )
    };

    let hypotheses = [h1, h2, h3, h4];
    Ok(JaulentReport {
        conclusion: hypotheses.iter().all(|&b| b),
        hypotheses,
        evidence: [e1, e2, e3, e4],
        caveats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::new_field;
    use crate::poly::parse_poly;

    fn field(s: &str) -> NumberField {
        new_field(&parse_poly(s).unwrap()).unwrap()
    }

    fn q() -> NumberField {
        field("x")
    }

    #[test]
    fn level_zero_is_trivial() {
        let cfg = CriterionConfig::default();
        for (f, p) in [(q(), 3), (field("x^2+1"), 5), (field("x^2+x+1"), 3)] {
            let rep = obstruction(&f, p, 7, 0, &cfg).unwrap();
            assert!(rep.group.is_trivial());
            assert_eq!(rep.route, ObstructionRoute::LevelZero);
        }
    }

    #[test]
    fn q_level_one_trivial_for_5() {
        let cfg = CriterionConfig::default();
        let rep = obstruction(&q(), 5, 1, 1, &cfg).unwrap();
        assert!(rep.group.is_trivial());
        assert_eq!(rep.layer.degree, 4);
        assert!(!rep.layer.truncated);
    }

    #[test]
    fn trieste_does_not_fire_for_q_or_small_cyclotomics() {
        let cfg = CriterionConfig::default();
        assert!(trieste_shortcut(&q(), 3, &cfg).unwrap().is_none());
        // μ_3 ⊆ Q(μ_3) but the class group is trivial
        assert!(trieste_shortcut(&field("x^2+x+1"), 3, &cfg).unwrap().is_none());
        // μ_3 ⊄ Q(√5)
        assert!(trieste_shortcut(&field("x^2-5"), 3, &cfg).unwrap().is_none());
    }

    #[test]
    fn certify_tower_over_q() {
        let cfg = CriterionConfig::default();
        let cert = certify_split_tower(&q(), 5, 1, 1, &cfg).unwrap().unwrap();
        assert_eq!(cert.layer_degree, 4);
        assert!(matches!(
            cert.ramification,
            RamificationEvidence::PrimePowerCyclotomic
        ));
    }

    #[test]
    fn certify_tower_over_q_mu5() {
        let cfg = CriterionConfig::default();
        // same data one level up: Q(μ_5), p = 5
        let f = field("x^4+x^3+x^2+x+1");
        let cert = certify_split_tower(&f, 5, 1, 1, &cfg).unwrap().unwrap();
        assert_eq!(cert.n0, 1);
    }

    #[test]
    fn certify_refuses_split_primes() {
        let cfg = CriterionConfig::default();
        // 5 splits in Q(i): two primes above 5 already in the base layer
        let f = field("x^2+1");
        assert!(certify_split_tower(&f, 5, 1, 1, &cfg).unwrap().is_none());
    }

    #[test]
    fn analyze_q_regular_primes_split() {
        let cfg = CriterionConfig::default();
        for (p, i) in [(3u64, 1u64), (3, 2), (5, 3)] {
            let a = analyze_splitting(&q(), p, i, 2, &cfg).unwrap();
            assert!(
                matches!(a.verdict, SplittingVerdict::SplitsCertified { .. }),
                "expected certified splitting for p={p}, i={i}, got {:?}",
                a.verdict
            );
        }
    }

    #[test]
    fn analyze_rejects_exceptional_field_at_two() {
        let cfg = CriterionConfig::default();
        assert!(matches!(
            analyze_splitting(&q(), 2, 1, 1, &cfg),
            Err(KlocError::OutOfTheoremScope)
        ));
    }

    #[test]
    fn analyze_runs_at_two_for_gaussian_field() {
        let cfg = CriterionConfig::default();
        let a = analyze_splitting(&field("x^2+1"), 2, 1, 1, &cfg).unwrap();
        assert_eq!(a.reports.len(), 1);
        assert!(a.reports[0].group.is_trivial());
        assert!(a.reports[0].small_n_caveat);
    }

    #[test]
    fn jaulent_hypotheses_fail_where_expected() {
        let cfg = CriterionConfig::default();
        // Q: μ_3 ⊄ Q
        let r = jaulent_check(&q(), 3, &cfg).unwrap();
        assert!(!r.hypotheses[0]);
        assert!(!r.conclusion);
        // Q(μ_3): trivial class group fails hypothesis 2
        let r = jaulent_check(&field("x^2+x+1"), 3, &cfg).unwrap();
        assert!(r.hypotheses[0]);
        assert!(!r.hypotheses[1]);
        assert!(!r.conclusion);
    }
}
