//! Definable-set lattices and type spaces of a finitely presented class.
//!
//! A formula is identified with its denotation vector: one set of n-tuples
//! per class member. The lattice of these vectors at arity n, closed under
//! intersection, union, variable maps, cylindrification and projection
//! within a working-arity window, plays the role of the lattice of
//! positive formulas in n variables modulo the theory; its spectrum is the
//! type space. Witness formulas are carried alongside as annotations.

use crate::dlattice::{DLattice, LatticeError, LatticeHom, SetVector, DEFAULT_ELEMENT_CAP};
use crate::semantics::{
    denotation, homomorphisms, is_positively_closed_semantic, satisfies_axiom, find_models,
    FiniteStructure, ModelClass, SemanticsError,
};
use crate::spectrum::{spec, spectral_map_from_hom, SpectralMap, SpectralSpace, SpectrumError};
use crate::syntax::{
    canonical_var, substitute, NegativeFormula, OrdinalMap, PositiveFormula, SyntaxError,
};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypespaceError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Lattice(LatticeError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("element cap {cap} exceeded at arity {arity}")]
    CapExceeded { arity: usize, cap: usize },
    #[error("arity {arity} out of range (n_max = {n_max})")]
    ArityOutOfRange { arity: usize, n_max: usize },
    #[error("model index {0} is not in the class")]
    ModelNotInClass(usize),
    #[error("denotation at arity {arity} is not a lattice element: {formula}")]
    NotRepresentable { arity: usize, formula: String },
    #[error("target type has a support: {support}")]
    SupportedTarget { support: String },
    #[error("interpretation is not invertible at arity {arity}")]
    NotInvertible { arity: usize },
    #[error("no formula assigned to symbol {0}")]
    UnmappedSymbol(String),
}

impl From<LatticeError> for TypespaceError {
    fn from(e: LatticeError) -> Self {
        TypespaceError::Lattice(e)
    }
}

/// Denotation vector: per class member, a set of encoded tuple indices.
type Den = Vec<BTreeSet<usize>>;

fn carrier(size: usize, arity: usize) -> usize {
    size.pow(arity as u32)
}

/// Tuples are encoded positionally, last coordinate least significant.
fn encode(size: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &e| acc * size + e)
}

fn decode(size: usize, arity: usize, mut idx: usize) -> Vec<usize> {
    let mut t = vec![0usize; arity];
    for i in (0..arity).rev() {
        t[i] = idx % size;
        idx /= size;
    }
    t
}

/// Denotation of the substituted formula, computed directly on the vectors:
/// an m-tuple t lies in the image iff (t[f(0)], ..., t[f(n-1)]) lies in den.
fn subst_den(class: &ModelClass, den: &Den, f: &OrdinalMap) -> Den {
    class
        .models
        .iter()
        .zip(den)
        .map(|(m, set)| {
            (0..carrier(m.size, f.target))
                .filter(|&idx| {
                    let t = decode(m.size, f.target, idx);
                    let pre: Vec<usize> = f.values().iter().map(|&i| t[i]).collect();
                    set.contains(&encode(m.size, &pre))
                })
                .collect()
        })
        .collect()
}

fn formula_den(class: &ModelClass, phi: &PositiveFormula, arity: usize) -> Result<Den, SemanticsError> {
    class
        .models
        .iter()
        .map(|m| {
            Ok(denotation(m, phi, arity)?
                .iter()
                .map(|t| encode(m.size, t))
                .collect())
        })
        .collect()
}

type Family = BTreeMap<Den, PositiveFormula>;

fn insert_new(
    fam: &mut Family,
    den: Den,
    w: PositiveFormula,
    arity: usize,
    cap: usize,
    changed: &mut bool,
) -> Result<(), TypespaceError> {
    if fam.contains_key(&den) {
        return Ok(());
    }
    if fam.len() == cap {
        return Err(TypespaceError::CapExceeded { arity, cap });
    }
    fam.insert(den, w);
    *changed = true;
    Ok(())
}

/// Fixpoint closure of the definable families at arities 0..=window.
fn close_families(
    class: &ModelClass,
    window: usize,
    cap: usize,
) -> Result<Vec<Family>, TypespaceError> {
    let mut families: Vec<Family> = vec![BTreeMap::new(); window + 1];
    let mut changed = true;

    // Seeds: bounds, equality diagonals, atomic denotations.
    for k in 0..=window {
        let bottom: Den = class.models.iter().map(|_| BTreeSet::new()).collect();
        let top: Den = class
            .models
            .iter()
            .map(|m| (0..carrier(m.size, k)).collect())
            .collect();
        insert_new(&mut families[k], bottom, PositiveFormula::Bottom, k, cap, &mut changed)?;
        insert_new(&mut families[k], top, PositiveFormula::Top, k, cap, &mut changed)?;
        for i in 0..k {
            for j in i + 1..k {
                let den: Den = class
                    .models
                    .iter()
                    .map(|m| {
                        (0..carrier(m.size, k))
                            .filter(|&idx| {
                                let t = decode(m.size, k, idx);
                                t[i] == t[j]
                            })
                            .collect()
                    })
                    .collect();
                let w = PositiveFormula::Equal(canonical_var(i), canonical_var(j));
                insert_new(&mut families[k], den, w, k, cap, &mut changed)?;
            }
        }
        for sym in class.sig.symbols() {
            if sym.arity > 0 && k == 0 {
                continue;
            }
            // Argument index tuples over the variables 0..k.
            for args_idx in 0..carrier(k, sym.arity) {
                let args = decode(k, sym.arity, args_idx);
                let den: Den = class
                    .models
                    .iter()
                    .map(|m| {
                        (0..carrier(m.size, k))
                            .filter(|&idx| {
                                let t = decode(m.size, k, idx);
                                let tuple: Vec<usize> = args.iter().map(|&i| t[i]).collect();
                                m.holds(&sym.name, &tuple)
                            })
                            .collect()
                    })
                    .collect();
                let w = PositiveFormula::Atom {
                    sym: sym.name.clone(),
                    args: args.iter().map(|&i| canonical_var(i)).collect(),
                };
                insert_new(&mut families[k], den, w, k, cap, &mut changed)?;
            }
        }
    }

    // Closure generators: meets and joins per arity; adjacent swaps (k -> k),
    // identification of the last two variables (k -> k-1), cylindrification
    // (k -> k+1), projection (k+1 -> k). These generate substitution along
    // every map between arities within the window.
    while changed {
        changed = false;
        for k in 0..=window {
            let items: Vec<(Den, PositiveFormula)> =
                families[k].iter().map(|(d, w)| (d.clone(), w.clone())).collect();
            for i in 0..items.len() {
                for j in 0..i {
                    let meet: Den = items[i]
                        .0
                        .iter()
                        .zip(&items[j].0)
                        .map(|(a, b)| a.intersection(b).cloned().collect())
                        .collect();
                    let join: Den = items[i]
                        .0
                        .iter()
                        .zip(&items[j].0)
                        .map(|(a, b)| a.union(b).cloned().collect())
                        .collect();
                    let wm = PositiveFormula::and(vec![items[j].1.clone(), items[i].1.clone()]);
                    let wj = PositiveFormula::or(vec![items[j].1.clone(), items[i].1.clone()]);
                    insert_new(&mut families[k], meet, wm, k, cap, &mut changed)?;
                    insert_new(&mut families[k], join, wj, k, cap, &mut changed)?;
                }
            }
            let mut maps: Vec<OrdinalMap> = Vec::new();
            for i in 0..k.saturating_sub(1) {
                let mut v: Vec<usize> = (0..k).collect();
                v.swap(i, i + 1);
                maps.push(OrdinalMap::new(k, k, v).unwrap());
            }
            if k >= 2 {
                let mut v: Vec<usize> = (0..k - 1).collect();
                v.push(k - 2);
                maps.push(OrdinalMap::new(k, k - 1, v).unwrap());
            }
            if k < window {
                maps.push(OrdinalMap::inclusion(k, k + 1).unwrap());
            }
            for f in &maps {
                for (den, w) in &items {
                    let nd = subst_den(class, den, f);
                    let nw = substitute(w, f)?;
                    insert_new(&mut families[f.target], nd, nw, f.target, cap, &mut changed)?;
                }
            }
            if k < window {
                let items_up: Vec<(Den, PositiveFormula)> = families[k + 1]
                    .iter()
                    .map(|(d, w)| (d.clone(), w.clone()))
                    .collect();
                for (den, w) in &items_up {
                    let projected: Den = class
                        .models
                        .iter()
                        .zip(den)
                        .map(|(m, set)| set.iter().map(|&idx| idx / m.size).collect())
                        .collect();
                    let nw = PositiveFormula::exists(&canonical_var(k), w.clone());
                    insert_new(&mut families[k], projected, nw, k, cap, &mut changed)?;
                }
            }
        }
    }
    Ok(families)
}

/// The built theory context: definable-set lattices L_0..L_{n_max} with
/// their spectra, plus the class they were computed from.
#[derive(Debug, Clone)]
pub struct TheoryContext {
    class: ModelClass,
    n_max: usize,
    v: usize,
    lattices: Vec<DLattice>,
    spaces: Vec<SpectralSpace>,
    stabilized: bool,
}

impl TheoryContext {
    pub fn build(class: ModelClass, n_max: usize, v: usize) -> Result<TheoryContext, TypespaceError> {
        Self::build_with_cap(class, n_max, v, DEFAULT_ELEMENT_CAP)
    }

    pub fn build_with_cap(
        class: ModelClass,
        n_max: usize,
        v: usize,
        cap: usize,
    ) -> Result<TheoryContext, TypespaceError> {
        let window = n_max + v;
        let families = close_families(&class, window, cap)?;
        // Heuristic exactness evidence: growing the window by one variable
        // must leave L_0..L_{n_max} unchanged.
        let stabilized = match close_families(&class, window + 1, cap) {
            Ok(bigger) => (0..=n_max).all(|k| {
                families[k].keys().collect::<BTreeSet<_>>()
                    == bigger[k].keys().collect::<BTreeSet<_>>()
            }),
            Err(_) => false,
        };
        let mut lattices = Vec::new();
        let mut spaces = Vec::new();
        for (k, fam) in families.iter().enumerate().take(n_max + 1) {
            let carrier_sizes: Vec<usize> =
                class.models.iter().map(|m| carrier(m.size, k)).collect();
            let generators: Vec<(SetVector, Option<PositiveFormula>)> = fam
                .iter()
                .map(|(den, w)| (den.clone(), Some(w.clone())))
                .collect();
            let l = DLattice::from_set_family(&carrier_sizes, &generators, cap).map_err(|e| {
                match e {
                    LatticeError::CapExceeded { cap } => TypespaceError::CapExceeded { arity: k, cap },
                    other => TypespaceError::Lattice(other),
                }
            })?;
            debug_assert_eq!(l.size(), fam.len(), "family is already closed");
            spaces.push(spec(&l));
            lattices.push(l);
        }
        Ok(TheoryContext {
            class,
            n_max,
            v,
            lattices,
            spaces,
            stabilized,
        })
    }

    pub fn class(&self) -> &ModelClass {
        &self.class
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn budget(&self) -> usize {
        self.v
    }

    pub fn stabilized(&self) -> bool {
        self.stabilized
    }

    pub fn lattice(&self, n: usize) -> Result<&DLattice, TypespaceError> {
        self.lattices.get(n).ok_or(TypespaceError::ArityOutOfRange {
            arity: n,
            n_max: self.n_max,
        })
    }

    pub fn type_space(&self, n: usize) -> Result<&SpectralSpace, TypespaceError> {
        self.spaces.get(n).ok_or(TypespaceError::ArityOutOfRange {
            arity: n,
            n_max: self.n_max,
        })
    }

    /// The prime filter realized by a tuple of a class member, as a point
    /// index of S_n.
    pub fn tp(&self, model_index: usize, tuple: &[usize]) -> Result<usize, TypespaceError> {
        let n = tuple.len();
        let l = self.lattice(n)?;
        let m = self
            .class
            .models
            .get(model_index)
            .ok_or(TypespaceError::ModelNotInClass(model_index))?;
        let idx = encode(m.size, tuple);
        let filter: BTreeSet<usize> = (0..l.size())
            .filter(|&a| l.vector(a).unwrap()[model_index].contains(&idx))
            .collect();
        self.spaces[n]
            .points()
            .iter()
            .position(|p| p.elements == filter)
            .ok_or_else(|| TypespaceError::NotRepresentable {
                arity: n,
                formula: format!("tp of {tuple:?} is not prime"),
            })
    }

    /// The index of the lattice element with the formula's denotation vector.
    pub fn element_of_formula(
        &self,
        phi: &PositiveFormula,
        n: usize,
    ) -> Result<usize, TypespaceError> {
        let l = self.lattice(n)?;
        let den = formula_den(&self.class, phi, n)?;
        l.index_of_vector(&den)
            .ok_or_else(|| TypespaceError::NotRepresentable {
                arity: n,
                formula: phi.to_string(),
            })
    }

    /// The dual map S_m -> S_n of a variable map f : n -> m, induced by the
    /// lattice hom a -> [phi_a(x_f(0), ..., x_f(n-1))]. Spectrality and
    /// openness are verified.
    pub fn f_star(&self, f: &OrdinalMap) -> Result<SpectralMap, TypespaceError> {
        let (n, m) = (f.source, f.target);
        let ln = self.lattice(n)?;
        let lm = self.lattice(m)?;
        let map: Vec<usize> = (0..ln.size())
            .map(|a| {
                let den = subst_den(&self.class, ln.vector(a).unwrap(), f);
                lm.index_of_vector(&den)
                    .expect("lattices are closed under variable maps within the window")
            })
            .collect();
        let hom = LatticeHom::new(ln, lm, map)?;
        let sm = spectral_map_from_hom(&hom, &self.spaces[n], &self.spaces[m])?;
        assert!(
            sm.is_open_map(&self.spaces[n], &self.spaces[m]),
            "dual of a variable map must be open"
        );
        Ok(sm)
    }

    /// Hausdorffness of S_n per arity; is_hausdorff itself asserts agreement
    /// with complementedness of every L_n element.
    pub fn check_pmc(&self) -> Vec<bool> {
        self.spaces.iter().map(|s| s.is_hausdorff()).collect()
    }

    pub fn check_amalgamation(&self) -> Vec<AmalgamationVerdict> {
        self.spaces
            .iter()
            .map(|s| {
                let comps = s.irreducible_components();
                for i in 0..comps.len() {
                    for j in i + 1..comps.len() {
                        if let Some(&shared) = comps[i].1.intersection(&comps[j].1).next() {
                            return AmalgamationVerdict {
                                disjoint: false,
                                witness: Some(AmalgamationWitness {
                                    shared_point: shared,
                                    generic_a: comps[i].0,
                                    generic_b: comps[j].0,
                                }),
                            };
                        }
                    }
                }
                AmalgamationVerdict {
                    disjoint: true,
                    witness: None,
                }
            })
            .collect()
    }

    /// Bottom of L_0 is prime: no two nonzero sentences meet to bottom.
    pub fn check_jcp(&self) -> bool {
        let l = &self.lattices[0];
        for a in 0..l.size() {
            for b in 0..l.size() {
                if l.meet(a, b) == l.bottom() && a != l.bottom() && b != l.bottom() {
                    return false;
                }
            }
        }
        true
    }

    /// The Pi-theory of a point of S_0: negations of the sentences outside
    /// the filter.
    pub fn restrict_pi(&self, point: usize) -> Vec<(usize, NegativeFormula)> {
        let l = &self.lattices[0];
        let p = self.spaces[0].point(point);
        (0..l.size())
            .filter(|a| !p.contains(*a))
            .map(|a| (a, NegativeFormula(l.witness(a).cloned().unwrap_or(PositiveFormula::Bottom))))
            .collect()
    }

    /// [p] as a point set: the points avoiding every negated element.
    pub fn pi_type_set(&self, p: &PiType) -> Result<BTreeSet<usize>, TypespaceError> {
        let s = self.type_space(p.arity)?;
        Ok((0..s.point_count())
            .filter(|&q| p.co_elements.iter().all(|&a| !s.basic_open(a).contains(&q)))
            .collect())
    }

    /// A support: a nonbottom element whose basic open lies inside [p]. Ties
    /// go to the largest canonical index among inclusion-maximal candidates;
    /// absence comes with the nowhere-density certificate.
    pub fn support_of(&self, p: &PiType) -> Result<SupportReport, TypespaceError> {
        let s = self.type_space(p.arity)?;
        let l = &self.lattices[p.arity];
        let closed = self.pi_type_set(p)?;
        let candidates: Vec<usize> = (0..l.size())
            .filter(|&a| a != l.bottom() && s.basic_open(a).is_subset(&closed))
            .collect();
        let maximal: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&a| {
                !candidates
                    .iter()
                    .any(|&b| b != a && s.basic_open(a).is_subset(s.basic_open(b)) && s.basic_open(a) != s.basic_open(b))
            })
            .collect();
        match maximal.into_iter().max() {
            Some(a) => Ok(SupportReport {
                element: Some(a),
                witness: l.witness(a).cloned(),
                interior_empty: false,
            }),
            None => {
                let interior_empty = s.interior(&closed).is_empty();
                debug_assert!(interior_empty, "no support but nonempty interior");
                Ok(SupportReport {
                    element: None,
                    witness: None,
                    interior_empty,
                })
            }
        }
    }

    /// The Pi-type realized by a tuple: everything outside its filter, read
    /// negatively.
    pub fn realized_pi_type(
        &self,
        model_index: usize,
        tuple: &[usize],
    ) -> Result<PiType, TypespaceError> {
        let n = tuple.len();
        let point = self.tp(model_index, tuple)?;
        let l = &self.lattices[n];
        let filter = &self.spaces[n].point(point).elements;
        Ok(PiType {
            arity: n,
            co_elements: (0..l.size()).filter(|a| !filter.contains(a)).collect(),
        })
    }

    /// Every realized Pi-type (tuple lengths 0..=n_max) has a support.
    pub fn is_atomic(&self, model_index: usize) -> Result<bool, TypespaceError> {
        let m = self
            .class
            .models
            .get(model_index)
            .ok_or(TypespaceError::ModelNotInClass(model_index))?;
        for n in 0..=self.n_max {
            for idx in 0..carrier(m.size, n) {
                let tuple = decode(m.size, n, idx);
                let p = self.realized_pi_type(model_index, &tuple)?;
                if self.support_of(&p)?.element.is_none() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Witness formulas of all lattice elements, grouped by arity; the exact
    /// formula sets for immersion checks.
    pub fn witnesses(&self) -> Vec<(usize, Vec<PositiveFormula>)> {
        self.lattices
            .iter()
            .enumerate()
            .map(|(n, l)| {
                (
                    n,
                    (0..l.size()).filter_map(|a| l.witness(a).cloned()).collect(),
                )
            })
            .collect()
    }

    /// Positive closure via the maximal-filter criterion: every realized
    /// type is maximal among the prime filters of its lattice.
    pub fn pc_filter_criterion(&self, model_index: usize) -> Result<bool, TypespaceError> {
        let m = self
            .class
            .models
            .get(model_index)
            .ok_or(TypespaceError::ModelNotInClass(model_index))?;
        for n in 0..=self.n_max {
            let s = &self.spaces[n];
            for idx in 0..carrier(m.size, n) {
                let tuple = decode(m.size, n, idx);
                let point = self.tp(model_index, &tuple)?;
                let maximal = (0..s.point_count()).all(|q| {
                    q == point
                        || !s.point(point).elements.is_subset(&s.point(q).elements)
                });
                if !maximal {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Per-member flags. Positive closure is computed both ways (filter
    /// criterion and semantic immersion oracle); prime means positively
    /// closed with a homomorphism into every positively closed member.
    pub fn pc_and_prime_report(&self) -> Result<Vec<ModelFlags>, TypespaceError> {
        let wits = self.witnesses();
        let mut pc = Vec::new();
        for (i, m) in self.class.models.iter().enumerate() {
            let filter = self.pc_filter_criterion(i)?;
            let semantic = is_positively_closed_semantic(m, &self.class.models, &wits)?;
            pc.push((filter, semantic));
        }
        let jcp = self.check_jcp();
        let mut out = Vec::new();
        for (i, m) in self.class.models.iter().enumerate() {
            let positively_closed = pc[i].0;
            let atomic = self.is_atomic(i)?;
            let prime = positively_closed
                && pc
                    .iter()
                    .enumerate()
                    .filter(|(j, flags)| *j != i && flags.0)
                    .all(|(j, _)| !homomorphisms(m, &self.class.models[j]).is_empty());
            // All members are finite, hence countable; with the JCP the
            // proposition predicts prime == atomic for positively closed
            // members. Reported, not enforced: both flags are window-bounded.
            let prime_atomic_consistent = !(jcp && positively_closed) || prime == atomic;
            out.push(ModelFlags {
                name: self.class.names[i].clone(),
                positively_closed,
                pc_semantic: pc[i].1,
                atomic,
                prime,
                prime_atomic_consistent,
            });
        }
        Ok(out)
    }

    /// Every irreducible component of S_n has nonempty interior.
    pub fn check_countcat_condition(&self) -> Vec<bool> {
        self.spaces
            .iter()
            .map(|s| {
                s.irreducible_components()
                    .iter()
                    .all(|(_, c)| !s.interior(c).is_empty())
            })
            .collect()
    }

    /// The somewhere dense points (interior of closure nonempty) meet every
    /// nonempty basic open.
    pub fn check_somewhere_dense_density(&self) -> Vec<bool> {
        self.spaces.iter().map(somewhere_dense_density).collect()
    }

    /// Builds a PiType from the formulas to be negated.
    pub fn pi_type_from_formulas(
        &self,
        arity: usize,
        formulas: &[PositiveFormula],
    ) -> Result<PiType, TypespaceError> {
        let co_elements = formulas
            .iter()
            .map(|phi| self.element_of_formula(phi, arity))
            .collect::<Result<BTreeSet<usize>, _>>()?;
        Ok(PiType { arity, co_elements })
    }

    /// Finite-search omitting: a positively closed model within the size
    /// bound omitting every target. Targets with a support are rejected with
    /// the support as certificate. Positive closure is measured against the
    /// enumerated candidate pool; "None" is bound-limited, not a refutation.
    pub fn omitting_search(
        &self,
        targets: &[PiType],
        max_size: usize,
    ) -> Result<Option<FiniteStructure>, TypespaceError> {
        for p in targets {
            let support = self.support_of(p)?;
            if let Some(a) = support.element {
                return Err(TypespaceError::SupportedTarget {
                    support: self.lattices[p.arity]
                        .witness(a)
                        .map(|w| w.to_string())
                        .unwrap_or_else(|| format!("element {a}")),
                });
            }
        }
        let candidates = find_models(&self.class.axioms, &self.class.sig, max_size);
        let wits = self.witnesses();
        'candidates: for m in &candidates {
            if !is_positively_closed_semantic(m, &candidates, &wits)? {
                continue;
            }
            for p in targets {
                let dens: Vec<BTreeSet<usize>> = p
                    .co_elements
                    .iter()
                    .map(|&a| {
                        let w = self.lattices[p.arity]
                            .witness(a)
                            .cloned()
                            .unwrap_or(PositiveFormula::Bottom);
                        Ok::<_, SemanticsError>(
                            denotation(m, &w, p.arity)?
                                .iter()
                                .map(|t| encode(m.size, t))
                                .collect(),
                        )
                    })
                    .collect::<Result<_, _>>()?;
                for idx in 0..carrier(m.size, p.arity) {
                    if dens.iter().all(|d| !d.contains(&idx)) {
                        // This tuple realizes the target.
                        continue 'candidates;
                    }
                }
            }
            return Ok(Some(m.clone()));
        }
        Ok(None)
    }

    /// Machine-readable summary for the front end.
    pub fn report(&self) -> Result<TheoryReport, TypespaceError> {
        let pmc = self.check_pmc();
        let amal = self.check_amalgamation();
        let countcat = self.check_countcat_condition();
        let dense = self.check_somewhere_dense_density();
        let arities = (0..=self.n_max)
            .map(|n| ArityReport {
                arity: n,
                lattice_size: self.lattices[n].size(),
                point_count: self.spaces[n].point_count(),
                hausdorff_pmc: pmc[n],
                amalgamation: amal[n].clone(),
                countcat_condition: countcat[n],
                somewhere_dense_density: dense[n],
            })
            .collect();
        Ok(TheoryReport {
            n_max: self.n_max,
            budget: self.v,
            stabilized: self.stabilized,
            jcp: self.check_jcp(),
            arities,
            models: self.pc_and_prime_report()?,
        })
    }
}

fn somewhere_dense_density(s: &SpectralSpace) -> bool {
    let dense_points: BTreeSet<usize> = (0..s.point_count())
        .filter(|&p| !s.interior(&s.point_closure(p)).is_empty())
        .collect();
    (0..s.lattice().size()).all(|a| {
        s.basic_open(a).is_empty() || !s.basic_open(a).is_disjoint(&dense_points)
    })
}

/// A partial Pi-type, stored as the lattice elements whose negations it
/// asserts; [p] is the complement of the union of their basic opens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiType {
    pub arity: usize,
    pub co_elements: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportReport {
    pub element: Option<usize>,
    pub witness: Option<PositiveFormula>,
    /// Certified only when no support exists.
    pub interior_empty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AmalgamationVerdict {
    pub disjoint: bool,
    pub witness: Option<AmalgamationWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AmalgamationWitness {
    pub shared_point: usize,
    pub generic_a: usize,
    pub generic_b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelFlags {
    pub name: String,
    pub positively_closed: bool,
    pub pc_semantic: bool,
    pub atomic: bool,
    pub prime: bool,
    pub prime_atomic_consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryReport {
    pub n_max: usize,
    pub budget: usize,
    pub stabilized: bool,
    pub jcp: bool,
    pub arities: Vec<ArityReport>,
    pub models: Vec<ModelFlags>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArityReport {
    pub arity: usize,
    pub lattice_size: usize,
    pub point_count: usize,
    pub hausdorff_pmc: bool,
    pub amalgamation: AmalgamationVerdict,
    pub countcat_condition: bool,
    pub somewhere_dense_density: bool,
}

/// An interpretation of the source signature in the target one: each source
/// symbol gets a positive formula over the target signature with free
/// variables among x0..x(arity-1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    pub source_sig: crate::syntax::Signature,
    pub mapping: BTreeMap<String, PositiveFormula>,
}

impl Interpretation {
    pub fn identity(sig: &crate::syntax::Signature) -> Interpretation {
        let mapping = sig
            .symbols()
            .iter()
            .map(|s| {
                let args: Vec<String> = (0..s.arity).map(canonical_var).collect();
                (
                    s.name.clone(),
                    PositiveFormula::Atom {
                        sym: s.name.clone(),
                        args,
                    },
                )
            })
            .collect();
        Interpretation {
            source_sig: sig.clone(),
            mapping,
        }
    }

    /// Structural translation: atoms are replaced by their assigned formulas
    /// with arguments substituted capture-avoidingly.
    pub fn translate(&self, phi: &PositiveFormula) -> Result<PositiveFormula, TypespaceError> {
        let mut fresh = 0usize;
        self.translate_inner(phi, &mut fresh)
    }

    fn translate_inner(
        &self,
        phi: &PositiveFormula,
        fresh: &mut usize,
    ) -> Result<PositiveFormula, TypespaceError> {
        use PositiveFormula as F;
        Ok(match phi {
            F::Bottom => F::Bottom,
            F::Top => F::Top,
            F::Equal(a, b) => F::Equal(a.clone(), b.clone()),
            F::Atom { sym, args } => {
                let body = self
                    .mapping
                    .get(sym)
                    .ok_or_else(|| TypespaceError::UnmappedSymbol(sym.clone()))?;
                let map: BTreeMap<String, String> = args
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (canonical_var(i), a.clone()))
                    .collect();
                rename_free(body, &map, fresh)
            }
            F::And(ps) => F::And(
                ps.iter()
                    .map(|p| self.translate_inner(p, fresh))
                    .collect::<Result<_, _>>()?,
            ),
            F::Or(ps) => F::Or(
                ps.iter()
                    .map(|p| self.translate_inner(p, fresh))
                    .collect::<Result<_, _>>()?,
            ),
            F::Exists(v, body) => {
                F::Exists(v.clone(), Box::new(self.translate_inner(body, fresh)?))
            }
        })
    }

    /// The induced source-signature structure on a target model.
    pub fn gamma_star(&self, m: &FiniteStructure) -> Result<FiniteStructure, TypespaceError> {
        let mut relations = BTreeMap::new();
        for s in self.source_sig.symbols() {
            let body = self
                .mapping
                .get(&s.name)
                .ok_or_else(|| TypespaceError::UnmappedSymbol(s.name.clone()))?;
            let tuples = denotation(m, body, s.arity)?;
            relations.insert(s.name.clone(), tuples);
        }
        Ok(FiniteStructure::new(m.size, relations)?)
    }

    /// Every target model must induce a model of the source axioms.
    pub fn verify(
        &self,
        source_axioms: &[crate::syntax::HInductiveSentence],
        target_class: &ModelClass,
    ) -> Result<bool, TypespaceError> {
        for m in &target_class.models {
            let induced = self.gamma_star(m)?;
            if !source_axioms.iter().all(|ax| satisfies_axiom(&induced, ax)) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Capture-avoiding simultaneous renaming of free variables.
fn rename_free(
    phi: &PositiveFormula,
    map: &BTreeMap<String, String>,
    fresh: &mut usize,
) -> PositiveFormula {
    use PositiveFormula as F;
    let rename = |v: &String| map.get(v).cloned().unwrap_or_else(|| v.clone());
    match phi {
        F::Bottom => F::Bottom,
        F::Top => F::Top,
        F::Atom { sym, args } => F::Atom {
            sym: sym.clone(),
            args: args.iter().map(rename).collect(),
        },
        F::Equal(a, b) => F::Equal(rename(a), rename(b)),
        F::And(ps) => F::And(ps.iter().map(|p| rename_free(p, map, fresh)).collect()),
        F::Or(ps) => F::Or(ps.iter().map(|p| rename_free(p, map, fresh)).collect()),
        F::Exists(b, body) => {
            let captured = map.values().any(|v| v == b);
            if captured || map.contains_key(b) {
                let nb = loop {
                    let cand = format!("u{}", *fresh);
                    *fresh += 1;
                    if !map.values().any(|v| *v == cand) && !body.free_vars().contains(&cand) {
                        break cand;
                    }
                };
                let mut inner = map.clone();
                inner.insert(b.clone(), nb.clone());
                F::Exists(nb, Box::new(rename_free(body, &inner, fresh)))
            } else {
                F::Exists(b.clone(), Box::new(rename_free(body, map, fresh)))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct NaturalIsoReport {
    pub ok: bool,
    /// beta_n : S_n(T') -> S_n(T), as point maps, one per arity.
    pub betas: Vec<SpectralMap>,
    pub failure: Option<String>,
}

/// Theorem-level check: the interpretation induces homeomorphisms
/// beta_n : S_n(T') -> S_n(T) commuting with every dual variable map. A
/// non-bijective lattice translation is an error (the interpretation is not
/// invertible); a failed naturality square is reported in the result.
pub fn natural_iso_check(
    gamma: &Interpretation,
    ctx_t: &TheoryContext,
    ctx_tp: &TheoryContext,
) -> Result<NaturalIsoReport, TypespaceError> {
    assert_eq!(ctx_t.n_max, ctx_tp.n_max, "contexts must share n_max");
    let mut betas = Vec::new();
    for n in 0..=ctx_t.n_max {
        let ln = &ctx_t.lattices[n];
        let lnp = &ctx_tp.lattices[n];
        let mut map = Vec::with_capacity(ln.size());
        for a in 0..ln.size() {
            let w = ln.witness(a).cloned().unwrap_or(PositiveFormula::Bottom);
            let translated = gamma.translate(&w)?;
            let den = formula_den(&ctx_tp.class, &translated, n)?;
            let idx = lnp
                .index_of_vector(&den)
                .ok_or_else(|| TypespaceError::NotRepresentable {
                    arity: n,
                    formula: translated.to_string(),
                })?;
            map.push(idx);
        }
        let hom = LatticeHom::new(ln, lnp, map)
            .map_err(|_| TypespaceError::NotInvertible { arity: n })?;
        if !hom.is_bijective() {
            return Err(TypespaceError::NotInvertible { arity: n });
        }
        let beta = spectral_map_from_hom(&hom, &ctx_t.spaces[n], &ctx_tp.spaces[n])?;
        if !beta.is_bijective(&ctx_t.spaces[n])
            || !beta.is_open_map(&ctx_t.spaces[n], &ctx_tp.spaces[n])
        {
            return Err(TypespaceError::NotInvertible { arity: n });
        }
        betas.push(beta);
    }
    // Naturality squares over every variable map n -> m.
    for n in 0..=ctx_t.n_max {
        for m in 0..=ctx_t.n_max {
            for f in OrdinalMap::all(n, m) {
                let fs_t = ctx_t.f_star(&f)?;
                let fs_tp = ctx_tp.f_star(&f)?;
                for q in 0..ctx_tp.spaces[m].point_count() {
                    let left = betas[n].apply(fs_tp.apply(q));
                    let right = fs_t.apply(betas[m].apply(q));
                    if left != right {
                        return Ok(NaturalIsoReport {
                            ok: false,
                            betas,
                            failure: Some(format!(
                                "naturality fails for f: {n} -> {m} ({:?}) at point {q}",
                                f.values()
                            )),
                        });
                    }
                }
            }
        }
    }
    Ok(NaturalIsoReport {
        ok: true,
        betas,
        failure: None,
    })
}
