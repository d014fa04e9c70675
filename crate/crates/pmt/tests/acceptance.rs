//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single pass line on success (visible with --nocapture); a failed
//! assertion marks the criterion failed.

use pmt::dlattice::builders::{boolean, chain, free_on_two, product};
use pmt::dlattice::{DLattice, LatticeHom, SetVector, DEFAULT_ELEMENT_CAP};
use pmt::semantics::{
    denotation, find_models, homomorphisms, is_homomorphism, is_positively_closed_semantic,
    parse_theory, FiniteStructure, Homomorphism, ModelClass,
};
use pmt::spectrum::{is_homeomorphism, spec};
use pmt::syntax::{morleise, FirstOrderFormula, OrdinalMap, PositiveFormula, Signature};
use pmt::typespace::{natural_iso_check, Interpretation, TheoryContext, TypespaceError};
use std::collections::{BTreeMap, BTreeSet};

fn pass(n: usize, what: &str) {
    println!("[PASS] criterion {n}: {what}");
}

/// Deterministic xorshift64 generator for the random lattice suite.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

fn random_lattice(rng: &mut Rng, max_size: usize) -> DLattice {
    loop {
        let gen_count = 1 + rng.below(3) as usize;
        let generators: Vec<(SetVector, Option<PositiveFormula>)> = (0..gen_count)
            .map(|_| {
                let set: BTreeSet<usize> = (0..5).filter(|_| rng.below(2) == 1).collect();
                (vec![set], None)
            })
            .collect();
        let l = DLattice::from_set_family(&[5], &generators, DEFAULT_ELEMENT_CAP).unwrap();
        if l.size() <= max_size {
            return l;
        }
    }
}

fn lattice_suite() -> Vec<DLattice> {
    let mut out: Vec<DLattice> = (2..=6).map(chain).collect();
    out.extend((1..=4).map(boolean));
    out.push(product(&chain(2), &chain(3)));
    out.push(product(&chain(3), &chain(3)));
    out.push(product(&chain(2), &boolean(2)));
    out.push(free_on_two());
    let mut rng = Rng(0x5eed_cafe_f00d_1234);
    for _ in 0..50 {
        out.push(random_lattice(&mut rng, 20));
    }
    out
}

#[test]
fn criterion_01_stone_round_trips() {
    for l in lattice_suite() {
        assert!(l.size() <= 20 || l.size() <= 32, "suite stays at desk scale");
        let s = spec(&l);
        // compact_opens(spec(L)) is isomorphic to L via a -> [a].
        let (ko, map) = s.compact_opens().unwrap();
        let hom = LatticeHom::new(&l, &ko, map).unwrap();
        assert!(hom.is_bijective(), "lattice of size {}", l.size());
        // spec(compact_opens(S)) is homeomorphic to S via the induced
        // point bijection.
        let s2 = spec(&ko);
        let point_map: Vec<usize> = (0..s.point_count())
            .map(|p| {
                let filter: BTreeSet<usize> = (0..ko.size())
                    .filter(|&u| ko.vector(u).unwrap()[0].contains(&p))
                    .collect();
                s2.points()
                    .iter()
                    .position(|q| q.elements == filter)
                    .expect("induced filter is prime")
            })
            .collect();
        assert!(is_homeomorphism(&s, &s2, &point_map));
    }
    pass(1, "Stone round trips exact on the whole lattice suite");
}

#[test]
fn criterion_02_prime_filter_oracle() {
    for l in lattice_suite() {
        if l.size() > 16 {
            continue;
        }
        let fast: BTreeSet<BTreeSet<usize>> =
            l.prime_filters().into_iter().map(|f| f.elements).collect();
        let mut brute = BTreeSet::new();
        for mask in 0u32..(1 << l.size()) {
            let set: BTreeSet<usize> = (0..l.size()).filter(|&e| mask & (1 << e) != 0).collect();
            if l.is_prime_filter(&set) {
                brute.insert(set);
            }
        }
        assert_eq!(fast, brute, "lattice of size {}", l.size());
    }
    assert_eq!(chain(3).prime_filters().len(), 2);
    assert_eq!(boolean(2).prime_filters().len(), 2);
    assert_eq!(free_on_two().prime_filters().len(), 4);
    pass(2, "prime filters match the subset scan and the anchor counts");
}

fn pq_class() -> ModelClass {
    parse_theory(
        "sig P/1 Q/1;\n\
         model M { universe 1; }\n\
         model N1 { universe 1; P = {0}; }\n\
         model N2 { universe 1; Q = {0}; }\n\
         axiom P(x0) & Q(x0) -> false;",
    )
    .unwrap()
}

fn r_edge_class() -> ModelClass {
    parse_theory("sig R/2; model M { universe 2; R = {(0,1)}; }").unwrap()
}

fn constants_class() -> ModelClass {
    parse_theory(
        "sig C1/1 C2/1 C3/1;\n\
         model K { universe 3; C1 = {0}; C2 = {1}; C3 = {2}; }\n\
         axiom C1(x0) & C1(x1) -> x0 = x1;\n\
         axiom C2(x0) & C2(x1) -> x0 = x1;\n\
         axiom C3(x0) & C3(x1) -> x0 = x1;\n\
         axiom C1(x0) & C2(x0) -> false;\n\
         axiom C1(x0) & C3(x0) -> false;\n\
         axiom C2(x0) & C3(x0) -> false;\n\
         axiom true -> exists y. C1(y);\n\
         axiom true -> exists y. C2(y);\n\
         axiom true -> exists y. C3(y);",
    )
    .unwrap()
}

/// A Morleised class: extend the signature for the formula pair, then take
/// all one-element models of the linking axioms.
fn morleised_class(sig: Signature, formulas: &[FirstOrderFormula]) -> ModelClass {
    let (ext, axioms) = morleise(formulas, &sig).unwrap();
    let models = find_models(&axioms, &ext, 1);
    assert!(!models.is_empty());
    let named = models
        .into_iter()
        .enumerate()
        .map(|(i, m)| (format!("M{i}"), m))
        .collect();
    ModelClass::new(ext, named, axioms).unwrap()
}

fn p_sig() -> Signature {
    Signature::new(vec![pmt::syntax::RelationSymbol {
        name: "P".into(),
        arity: 1,
    }])
    .unwrap()
}

fn r_sig() -> Signature {
    Signature::new(vec![pmt::syntax::RelationSymbol {
        name: "R".into(),
        arity: 2,
    }])
    .unwrap()
}

/// The ten contexts of the PMC criterion; each is built with n_max = 2.
fn pmc_contexts() -> Vec<(String, TheoryContext, bool)> {
    let morley_p = morleised_class(
        p_sig(),
        &[
            FirstOrderFormula::atom("P", &["x0"]),
            FirstOrderFormula::not(FirstOrderFormula::atom("P", &["x0"])),
        ],
    );
    let morley_r = morleised_class(
        r_sig(),
        &[
            FirstOrderFormula::atom("R", &["x0", "x1"]),
            FirstOrderFormula::not(FirstOrderFormula::atom("R", &["x0", "x1"])),
        ],
    );
    let mut out = Vec::new();
    let mut push = |name: &str, class: ModelClass, v: usize, morleised: bool| {
        out.push((
            name.to_string(),
            TheoryContext::build(class, 2, v).unwrap(),
            morleised,
        ));
    };
    push("trivial", parse_theory("sig ; model M { universe 1; }").unwrap(), 1, false);
    push("pq", pq_class(), 1, false);
    push("r-edge", r_edge_class(), 1, false);
    push("morley-p", morley_p, 1, true);
    push("morley-r", morley_r, 1, true);
    push(
        "sentences",
        parse_theory(
            "sig B/0 D/0; model M { universe 1; B = {()}; } model N { universe 1; D = {()}; }",
        )
        .unwrap(),
        1,
        false,
    );
    push(
        "two-colours",
        parse_theory("sig P/1 Q/1; model M { universe 2; P = {0}; Q = {1}; }").unwrap(),
        1,
        false,
    );
    push(
        "loop",
        parse_theory("sig R/2; model M { universe 1; R = {(0,0)}; }").unwrap(),
        1,
        false,
    );
    push(
        "pq-chain",
        parse_theory("sig P/1; model M { universe 1; } model N { universe 1; P = {0}; }").unwrap(),
        1,
        false,
    );
    push("constants", constants_class(), 0, false);
    out
}

#[test]
fn criterion_03_pmc_iff_hausdorff() {
    let contexts = pmc_contexts();
    assert!(contexts.len() >= 10);
    for (name, ctx, morleised) in &contexts {
        let pmc = ctx.check_pmc();
        for n in 0..=2 {
            // is_hausdorff itself asserts agreement of the separation and
            // complementation computations; re-check the algebraic side.
            assert_eq!(
                pmc[n],
                ctx.lattice(n).unwrap().is_boolean(),
                "{name} at arity {n}"
            );
        }
        if *morleised {
            assert!(pmc.iter().all(|&b| b), "{name} must be PMC at all arities");
        }
    }
    assert!(!contexts[1].1.check_pmc()[1], "pq is not PMC");
    assert!(contexts[2].1.check_pmc()[1], "r-edge is PMC");
    pass(3, "Hausdorff equals complementation on ten contexts; Morleised contexts PMC");
}

/// Brute-force amalgam search: a model of the axioms within the bound and
/// homomorphisms u, v closing the span square.
fn find_amalgam(
    f: &Homomorphism,
    g: &Homomorphism,
    class: &ModelClass,
    max_size: usize,
) -> Option<(FiniteStructure, Vec<usize>, Vec<usize>)> {
    for a in find_models(&class.axioms, &class.sig, max_size) {
        for u in homomorphisms(&f.target, &a) {
            for v in homomorphisms(&g.target, &a) {
                let commutes = (0..f.source.size)
                    .all(|e| u.apply(f.apply(e)) == v.apply(g.apply(e)));
                if commutes {
                    return Some((a, u.map, v.map));
                }
            }
        }
    }
    None
}

#[test]
fn criterion_04_amalgamation_iff_disjoint_components() {
    // P/Q: overlapping components with a shared-point witness, and the span
    // N1 <- M -> N2 has no amalgam among models of the axiom up to size 4.
    let pq = pq_class();
    let ctx = TheoryContext::build(pq.clone(), 1, 1).unwrap();
    let verdict = &ctx.check_amalgamation()[1];
    assert!(!verdict.disjoint);
    let w = verdict.witness.as_ref().unwrap();
    let s = ctx.type_space(1).unwrap();
    assert!(s.point_closure(w.generic_a).contains(&w.shared_point));
    assert!(s.point_closure(w.generic_b).contains(&w.shared_point));
    let f = Homomorphism {
        source: pq.models[0].clone(),
        target: pq.models[1].clone(),
        map: vec![0],
    };
    let g = Homomorphism {
        source: pq.models[0].clone(),
        target: pq.models[2].clone(),
        map: vec![0],
    };
    assert!(is_homomorphism(&f) && is_homomorphism(&g));
    assert!(find_amalgam(&f, &g, &pq, 4).is_none());

    // R-edge: disjoint components; every span of class homomorphisms has an
    // amalgam within size 4.
    let redge = r_edge_class();
    let ctx = TheoryContext::build(redge.clone(), 1, 1).unwrap();
    assert!(ctx.check_amalgamation().iter().all(|v| v.disjoint));
    let m = &redge.models[0];
    for f in homomorphisms(m, m) {
        for g in homomorphisms(m, m) {
            assert!(find_amalgam(&f, &g, &redge, 4).is_some());
        }
    }
    pass(4, "component overlap matches the brute-force amalgam search");
}

#[test]
fn criterion_05_functor_laws() {
    // Two contexts with n_max = 3; all maps f : n -> m with n, m <= 3.
    let trivial = parse_theory("sig ; model M { universe 1; }").unwrap();
    let contexts = [
        TheoryContext::build(trivial, 3, 1).unwrap(),
        TheoryContext::build(pq_class(), 3, 1).unwrap(),
    ];
    for ctx in &contexts {
        let mut cache: BTreeMap<(usize, usize, Vec<usize>), Vec<usize>> = BTreeMap::new();
        for n in 0..=3 {
            for m in 0..=3 {
                for f in OrdinalMap::all(n, m) {
                    // f_star construction verifies spectrality and openness.
                    let fs = ctx.f_star(&f).unwrap();
                    cache.insert((n, m, f.values().to_vec()), fs.map);
                }
            }
        }
        for n in 0..=3usize {
            for m in 0..=3usize {
                for k in 0..=3usize {
                    for f in OrdinalMap::all(n, m) {
                        for g in OrdinalMap::all(m, k) {
                            let gf = f.then(&g).unwrap();
                            let lhs = &cache[&(n, k, gf.values().to_vec())];
                            let fs = &cache[&(n, m, f.values().to_vec())];
                            let gs = &cache[&(m, k, g.values().to_vec())];
                            let composed: Vec<usize> =
                                gs.iter().map(|&q| fs[q]).collect();
                            assert_eq!(lhs, &composed);
                        }
                    }
                }
            }
        }
    }
    pass(5, "f_star functoriality, spectrality and openness over all maps with arities <= 3");
}

#[test]
fn criterion_06_pc_cross_validation() {
    for (name, ctx, _) in pmc_contexts() {
        let wits = ctx.witnesses();
        for (i, m) in ctx.class().models.iter().enumerate() {
            let filter = ctx.pc_filter_criterion(i).unwrap();
            let semantic = is_positively_closed_semantic(m, &ctx.class().models, &wits).unwrap();
            assert_eq!(filter, semantic, "{name}, member {i}");
        }
    }
    pass(6, "maximal-filter positive closure equals the immersion oracle everywhere");
}

#[test]
fn criterion_07_atomic_prime_suite() {
    let class = constants_class();
    let ctx = TheoryContext::build(class.clone(), 2, 0).unwrap();
    let flags = ctx.pc_and_prime_report().unwrap();
    assert!(flags[0].positively_closed && flags[0].atomic && flags[0].prime);
    assert!(ctx.check_countcat_condition().iter().all(|&b| b));
    // Unique positively closed model up to isomorphism within size 4.
    let found = find_models(&class.axioms, &class.sig, 4);
    let wits = ctx.witnesses();
    let pc: Vec<&FiniteStructure> = found
        .iter()
        .filter(|m| is_positively_closed_semantic(m, &found, &wits).unwrap())
        .collect();
    assert_eq!(pc.len(), 1);
    assert_eq!(pc[0].size, 3);
    // Forward direction of the density theorem: wherever an atomic
    // positively closed member exists, the somewhere dense points are dense.
    for (name, ctx, _) in pmc_contexts() {
        let flags = ctx.pc_and_prime_report().unwrap();
        if flags.iter().any(|f| f.positively_closed && f.atomic) {
            assert!(
                ctx.check_somewhere_dense_density().iter().all(|&b| b),
                "{name}"
            );
        }
    }
    pass(7, "three-constant theory has a unique pc model, atomic and prime; density holds");
}

#[test]
fn criterion_08_omitting_search() {
    let ctx = TheoryContext::build(pq_class(), 1, 1).unwrap();
    let p = PositiveFormula::atom("P", &["x0"]);
    let q = PositiveFormula::atom("Q", &["x0"]);
    let target = ctx.pi_type_from_formulas(1, &[p.clone(), q.clone()]).unwrap();
    assert!(ctx.support_of(&target).unwrap().element.is_none());
    let found = ctx.omitting_search(&[target], 2).unwrap().unwrap();
    // The found model omits the type: every element satisfies P or Q.
    let dp = denotation(&found, &p, 1).unwrap();
    let dq = denotation(&found, &q, 1).unwrap();
    for e in 0..found.size {
        assert!(dp.contains(&vec![e]) || dq.contains(&vec![e]));
    }
    // A supported target is rejected, and the certificate is independently
    // re-verified: [support] is nonempty and contained in [p].
    let supported = ctx.pi_type_from_formulas(1, &[p]).unwrap();
    let err = ctx.omitting_search(&[supported.clone()], 2).unwrap_err();
    assert!(matches!(err, TypespaceError::SupportedTarget { .. }));
    let report = ctx.support_of(&supported).unwrap();
    let a = report.element.unwrap();
    let s = ctx.type_space(1).unwrap();
    let closed = ctx.pi_type_set(&supported).unwrap();
    assert!(!s.basic_open(a).is_empty());
    assert!(s.basic_open(a).is_subset(&closed));
    pass(8, "unsupported type omitted by a found pc model; supports certified");
}

#[test]
fn criterion_09_interpretation_equivalence() {
    // Renaming between two relabeled copies of the same theory.
    let t = parse_theory("sig R/1; model A { universe 2; R = {0}; } model B { universe 1; }")
        .unwrap();
    let tp = parse_theory("sig S/1; model A { universe 2; S = {0}; } model B { universe 1; }")
        .unwrap();
    let ctx_t = TheoryContext::build(t.clone(), 2, 1).unwrap();
    let ctx_tp = TheoryContext::build(tp.clone(), 2, 1).unwrap();
    let gamma = Interpretation {
        source_sig: t.sig.clone(),
        mapping: BTreeMap::from([("R".to_string(), PositiveFormula::atom("S", &["x0"]))]),
    };
    let gamma_inv = Interpretation {
        source_sig: tp.sig.clone(),
        mapping: BTreeMap::from([("S".to_string(), PositiveFormula::atom("R", &["x0"]))]),
    };
    assert!(gamma.verify(&t.axioms, &tp).unwrap());
    assert!(gamma_inv.verify(&tp.axioms, &t).unwrap());
    let report = natural_iso_check(&gamma, &ctx_t, &ctx_tp).unwrap();
    assert!(report.ok, "{:?}", report.failure);
    for (n, beta) in report.betas.iter().enumerate() {
        assert_eq!(beta.map.len(), ctx_tp.type_space(n).unwrap().point_count());
    }
    // Collapsing two distinct relations is rejected as non-invertible.
    let t2 = parse_theory(
        "sig P/1 Q/1; model M { universe 1; P = {0}; } model N { universe 1; Q = {0}; }",
    )
    .unwrap();
    let tp2 = parse_theory("sig S/1; model M { universe 1; S = {0}; } model N { universe 1; }")
        .unwrap();
    let cx2 = TheoryContext::build(t2.clone(), 1, 1).unwrap();
    let cx2p = TheoryContext::build(tp2, 1, 1).unwrap();
    let collapse = Interpretation {
        source_sig: t2.sig.clone(),
        mapping: BTreeMap::from([
            ("P".to_string(), PositiveFormula::atom("S", &["x0"])),
            ("Q".to_string(), PositiveFormula::atom("S", &["x0"])),
        ]),
    };
    let err = natural_iso_check(&collapse, &cx2, &cx2p).unwrap_err();
    assert!(matches!(err, TypespaceError::NotInvertible { .. }));
    pass(9, "renaming gives natural homeomorphisms; collapse rejected");
}
