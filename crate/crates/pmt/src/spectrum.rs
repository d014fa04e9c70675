//! Spectra of finite bounded distributive lattices.
//!
//! The spectrum of a lattice L has the prime filters of L as points and the
//! sets [a] = { p : a in p } as basic opens. Since a finite union of basic
//! opens is the basic open of the join, every open of the finite spectrum is
//! basic; most topological questions reduce to lattice questions.

use crate::dlattice::{DLattice, LatticeError, LatticeHom, PrimeFilter, SetVector};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("map is not spectral: {0}")]
    NotSpectral(String),
}

/// The spectrum of a finite bounded distributive lattice. Points are indexed
/// in the canonical prime-filter order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralSpace {
    lattice: DLattice,
    points: Vec<PrimeFilter>,
    /// `basic_open[a]` is the set of points containing lattice element `a`.
    basic_open: Vec<BTreeSet<usize>>,
}

pub fn spec(lattice: &DLattice) -> SpectralSpace {
    let points = lattice.prime_filters();
    let basic_open = (0..lattice.size())
        .map(|a| {
            points
                .iter()
                .enumerate()
                .filter(|(_, p)| p.contains(a))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    SpectralSpace {
        lattice: lattice.clone(),
        points,
        basic_open,
    }
}

impl SpectralSpace {
    pub fn lattice(&self) -> &DLattice {
        &self.lattice
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[PrimeFilter] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &PrimeFilter {
        &self.points[i]
    }

    pub fn basic_open(&self, a: usize) -> &BTreeSet<usize> {
        &self.basic_open[a]
    }

    /// q specializes to p (q lies in the closure of p) iff q is contained in
    /// p as a filter.
    pub fn specializes(&self, q: usize, p: usize) -> bool {
        self.points[q].elements.is_subset(&self.points[p].elements)
    }

    /// A point lies in the closure iff each of its basic neighbourhoods meets
    /// the set.
    pub fn closure(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        (0..self.points.len())
            .filter(|&q| {
                self.points[q]
                    .elements
                    .iter()
                    .all(|&a| !self.basic_open[a].is_disjoint(set))
            })
            .collect()
    }

    pub fn point_closure(&self, p: usize) -> BTreeSet<usize> {
        (0..self.points.len())
            .filter(|&q| self.specializes(q, p))
            .collect()
    }

    /// Union of the basic opens contained in the set.
    pub fn interior(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for open in &self.basic_open {
            if open.is_subset(set) {
                out.extend(open.iter().copied());
            }
        }
        out
    }

    pub fn is_open(&self, set: &BTreeSet<usize>) -> bool {
        self.interior(set) == *set
    }

    pub fn is_closed(&self, set: &BTreeSet<usize>) -> bool {
        self.closure(set) == *set
    }

    /// Basis criterion: a closed set is irreducible iff it is nonempty and
    /// whenever it meets [a] and [b] it meets [a ∧ b].
    pub fn is_irreducible_closed(&self, set: &BTreeSet<usize>) -> bool {
        if set.is_empty() || !self.is_closed(set) {
            return false;
        }
        for a in 0..self.lattice.size() {
            if self.basic_open[a].is_disjoint(set) {
                continue;
            }
            for b in 0..self.lattice.size() {
                if !self.basic_open[b].is_disjoint(set)
                    && self.basic_open[self.lattice.meet(a, b)].is_disjoint(set)
                {
                    return false;
                }
            }
        }
        true
    }

    /// The points whose closure is the set.
    pub fn generic_points(&self, set: &BTreeSet<usize>) -> Vec<usize> {
        set.iter()
            .copied()
            .filter(|&p| self.point_closure(p) == *set)
            .collect()
    }

    /// Maximal irreducible closed sets; in the finite spectrum these are the
    /// maximal point closures. Returned with their generic points, in order
    /// of the generic point index.
    pub fn irreducible_components(&self) -> Vec<(usize, BTreeSet<usize>)> {
        let closures: Vec<BTreeSet<usize>> =
            (0..self.points.len()).map(|p| self.point_closure(p)).collect();
        let mut out: Vec<(usize, BTreeSet<usize>)> = Vec::new();
        for p in 0..self.points.len() {
            let maximal = closures
                .iter()
                .all(|c| !closures[p].is_subset(c) || *c == closures[p]);
            if maximal && !out.iter().any(|(_, c)| *c == closures[p]) {
                out.push((p, closures[p].clone()));
            }
        }
        out
    }

    pub fn is_t0(&self) -> bool {
        for p in 0..self.points.len() {
            for q in p + 1..self.points.len() {
                if self.points[p] == self.points[q] {
                    return false;
                }
            }
        }
        true
    }

    /// Every irreducible closed set has a unique generic point. Checked
    /// exhaustively over all subsets when the space is small enough,
    /// otherwise over the point closures.
    pub fn is_sober(&self) -> bool {
        if self.points.len() <= 15 {
            for mask in 0u32..(1 << self.points.len()) {
                let set: BTreeSet<usize> = (0..self.points.len())
                    .filter(|&p| mask & (1 << p) != 0)
                    .collect();
                if self.is_irreducible_closed(&set) && self.generic_points(&set).len() != 1 {
                    return false;
                }
            }
            true
        } else {
            (0..self.points.len()).all(|p| {
                let c = self.point_closure(p);
                self.is_irreducible_closed(&c) && self.generic_points(&c).len() == 1
            })
        }
    }

    /// Hausdorffness two ways: pairwise separation by disjoint basic opens,
    /// and complementedness of every lattice element. The two answers must
    /// agree.
    pub fn is_hausdorff(&self) -> bool {
        let separated = |p: usize, q: usize| {
            for a in 0..self.lattice.size() {
                if !self.basic_open[a].contains(&p) {
                    continue;
                }
                for b in 0..self.lattice.size() {
                    if self.basic_open[b].contains(&q)
                        && self.basic_open[a].is_disjoint(&self.basic_open[b])
                    {
                        return true;
                    }
                }
            }
            false
        };
        let topological = (0..self.points.len()).all(|p| {
            (0..self.points.len()).all(|q| p == q || separated(p, q))
        });
        let algebraic = self.lattice.is_boolean();
        assert_eq!(
            topological, algebraic,
            "separation and complementedness disagree"
        );
        topological
    }

    /// A set is dense iff its closure is the whole space.
    pub fn is_dense(&self, set: &BTreeSet<usize>) -> bool {
        self.closure(set).len() == self.points.len()
    }

    /// Finite Baire property: the intersection of all dense opens is dense.
    /// Since every open is basic, this is the basic open of the meet of all
    /// dense elements.
    pub fn baire_check(&self) -> bool {
        let mut acc = self.lattice.top();
        for a in 0..self.lattice.size() {
            if self.is_dense(&self.basic_open[a]) {
                acc = self.lattice.meet(acc, a);
            }
        }
        self.is_dense(&self.basic_open[acc])
    }

    /// The lattice of compact open sets, generated as a set family over the
    /// points, together with the map sending lattice element a to the index
    /// of [a] in the new lattice.
    pub fn compact_opens(&self) -> Result<(DLattice, Vec<usize>), SpectrumError> {
        let generators: Vec<(SetVector, Option<_>)> = self
            .basic_open
            .iter()
            .map(|open| (vec![open.clone()], None))
            .collect();
        let ko = DLattice::from_set_family(
            &[self.points.len()],
            &generators,
            crate::dlattice::DEFAULT_ELEMENT_CAP,
        )?;
        let map = self
            .basic_open
            .iter()
            .map(|open| {
                ko.index_of_vector(&vec![open.clone()])
                    .expect("generators are in the closure")
            })
            .collect();
        Ok((ko, map))
    }

    /// Spectrum of the opposite lattice.
    pub fn hochster_dual(&self) -> SpectralSpace {
        spec(&self.lattice.opposite())
    }

    /// Machine-readable summary.
    pub fn report(&self) -> SpectrumReport {
        SpectrumReport {
            lattice_size: self.lattice.size(),
            points: self
                .points
                .iter()
                .map(|p| p.elements.iter().copied().collect())
                .collect(),
            basic_opens: self
                .basic_open
                .iter()
                .map(|o| o.iter().copied().collect())
                .collect(),
            components: self
                .irreducible_components()
                .into_iter()
                .map(|(g, c)| ComponentReport {
                    generic_point: g,
                    points: c.into_iter().collect(),
                })
                .collect(),
            t0: self.is_t0(),
            sober: self.is_sober(),
            hausdorff: self.is_hausdorff(),
        }
    }

    /// Specialization DAG in DOT: an edge q -> p when q specializes to p and
    /// p covers q; components as clusters, generic points doubled.
    pub fn to_dot(&self, name: &str) -> String {
        let components = self.irreducible_components();
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{name}\" {{");
        let _ = writeln!(out, "  rankdir=BT;");
        for (k, (g, comp)) in components.iter().enumerate() {
            let _ = writeln!(out, "  subgraph cluster_{k} {{");
            let _ = writeln!(out, "    label=\"component {k}\";");
            for &p in comp {
                let shape = if p == *g { "doublecircle" } else { "circle" };
                let label: Vec<String> =
                    self.points[p].elements.iter().map(|e| e.to_string()).collect();
                let _ = writeln!(
                    out,
                    "    p{p} [shape={shape}, label=\"p{p}: {{{}}}\"];",
                    label.join(",")
                );
            }
            let _ = writeln!(out, "  }}");
        }
        // Covers of the specialization order.
        for q in 0..self.points.len() {
            for p in 0..self.points.len() {
                if q == p || !self.specializes(q, p) {
                    continue;
                }
                let between = (0..self.points.len()).any(|r| {
                    r != q && r != p && self.specializes(q, r) && self.specializes(r, p)
                });
                if !between {
                    let _ = writeln!(out, "  p{q} -> p{p};");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub lattice_size: usize,
    pub points: Vec<Vec<usize>>,
    pub basic_opens: Vec<Vec<usize>>,
    pub components: Vec<ComponentReport>,
    pub t0: bool,
    pub sober: bool,
    pub hausdorff: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub generic_point: usize,
    pub points: Vec<usize>,
}

/// The continuous map spec(B) -> spec(A) induced by a hom h : A -> B, sending
/// a prime filter to its preimage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralMap {
    /// Point index in spec(B) to point index in spec(A).
    pub map: Vec<usize>,
}

pub fn spectral_map_from_hom(
    h: &LatticeHom,
    source: &SpectralSpace,
    target: &SpectralSpace,
) -> Result<SpectralMap, SpectrumError> {
    let mut map = Vec::with_capacity(target.point_count());
    for p in target.points() {
        let preimage: BTreeSet<usize> = (0..source.lattice().size())
            .filter(|&a| p.contains(h.apply(a)))
            .collect();
        let idx = source
            .points()
            .iter()
            .position(|q| q.elements == preimage)
            .ok_or_else(|| {
                SpectrumError::NotSpectral(format!(
                    "preimage of a prime filter is not prime: {preimage:?}"
                ))
            })?;
        map.push(idx);
    }
    // Spectrality: the preimage of each basic open [a] is the basic open
    // [h(a)], hence compact open.
    for a in 0..source.lattice().size() {
        let pulled: BTreeSet<usize> = (0..target.point_count())
            .filter(|&q| source.basic_open(a).contains(&map[q]))
            .collect();
        if pulled != *target.basic_open(h.apply(a)) {
            return Err(SpectrumError::NotSpectral(format!(
                "preimage of [{a}] is not [h({a})]"
            )));
        }
    }
    Ok(SpectralMap { map })
}

impl SpectralMap {
    pub fn apply(&self, q: usize) -> usize {
        self.map[q]
    }

    /// Is the image of every basic open of the domain open in the codomain?
    pub fn is_open_map(&self, source: &SpectralSpace, target: &SpectralSpace) -> bool {
        for a in 0..target.lattice().size() {
            let image: BTreeSet<usize> = target
                .basic_open(a)
                .iter()
                .map(|&q| self.map[q])
                .collect();
            if !source.is_open(&image) {
                return false;
            }
        }
        true
    }

    pub fn is_bijective(&self, source: &SpectralSpace) -> bool {
        let mut seen = vec![false; source.point_count()];
        if self.map.len() != source.point_count() {
            return false;
        }
        for &v in &self.map {
            if seen[v] {
                return false;
            }
            seen[v] = true;
        }
        true
    }
}

/// Checks that the two spaces are homeomorphic by the given point bijection
/// source -> target: basic opens must correspond both ways.
pub fn is_homeomorphism(
    source: &SpectralSpace,
    target: &SpectralSpace,
    map: &[usize],
) -> bool {
    if map.len() != source.point_count() || target.point_count() != source.point_count() {
        return false;
    }
    let mut seen = vec![false; map.len()];
    for &v in map {
        if v >= seen.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    let image_open = |a: usize| -> BTreeSet<usize> {
        source.basic_open(a).iter().map(|&p| map[p]).collect()
    };
    (0..source.lattice().size()).all(|a| target.is_open(&image_open(a)))
        && (0..target.lattice().size()).all(|b| {
            let pre: BTreeSet<usize> = (0..source.point_count())
                .filter(|&p| target.basic_open(b).contains(&map[p]))
                .collect();
            source.is_open(&pre)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dlattice::builders::{boolean, chain, free_on_two};
    use crate::dlattice::find_isomorphism;

    #[test]
    fn chain_three_spectrum_is_sierpinski() {
        let s = spec(&chain(3));
        assert_eq!(s.point_count(), 2);
        assert!(s.is_t0());
        assert!(s.is_sober());
        assert!(!s.is_hausdorff());
        // One component with a generic point whose closure is everything.
        let comps = s.irreducible_components();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].1.len(), 2);
    }

    #[test]
    fn boolean_square_spectrum_is_discrete() {
        let s = spec(&boolean(2));
        assert_eq!(s.point_count(), 2);
        assert!(s.is_hausdorff());
        assert_eq!(s.irreducible_components().len(), 2);
        for p in 0..2 {
            assert_eq!(s.point_closure(p).len(), 1);
        }
    }

    #[test]
    fn free_on_two_spectrum_has_one_component() {
        let s = spec(&free_on_two());
        assert_eq!(s.point_count(), 4);
        assert!(!s.is_hausdorff());
        assert_eq!(s.irreducible_components().len(), 1);
    }

    #[test]
    fn closure_against_definition() {
        // Brute-force closure: smallest closed superset, closed sets being
        // complements of opens.
        let s = spec(&free_on_two());
        let n = s.point_count();
        for mask in 0u32..(1 << n) {
            let set: BTreeSet<usize> = (0..n).filter(|&p| mask & (1 << p) != 0).collect();
            let mut best: Option<BTreeSet<usize>> = None;
            for cmask in 0u32..(1 << n) {
                let c: BTreeSet<usize> = (0..n).filter(|&p| cmask & (1 << p) != 0).collect();
                let complement: BTreeSet<usize> = (0..n).filter(|p| !c.contains(p)).collect();
                if s.is_open(&complement)
                    && set.is_subset(&c)
                    && best.as_ref().is_none_or(|b| c.len() < b.len())
                {
                    best = Some(c);
                }
            }
            assert_eq!(s.closure(&set), best.unwrap());
        }
    }

    #[test]
    fn stone_round_trip_on_lattices() {
        for l in [chain(2), chain(3), chain(4), boolean(2), boolean(3), free_on_two()] {
            let s = spec(&l);
            let (ko, map) = s.compact_opens().unwrap();
            let hom = LatticeHom::new(&l, &ko, map).expect("a -> [a] is a homomorphism");
            assert!(hom.is_bijective(), "lattice of size {}", l.size());
        }
    }

    #[test]
    fn stone_round_trip_on_spaces() {
        for l in [chain(3), boolean(2), free_on_two()] {
            let s = spec(&l);
            let (ko, _) = s.compact_opens().unwrap();
            let s2 = spec(&ko);
            // Match each point of s with the prime filter of compact opens it
            // induces.
            let map: Vec<usize> = (0..s.point_count())
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
            assert!(is_homeomorphism(&s, &s2, &map));
        }
    }

    #[test]
    fn hochster_dual_of_chain_reverses_specialization() {
        let s = spec(&chain(3));
        let d = s.hochster_dual();
        assert_eq!(d.point_count(), 2);
        // The dual of the dual's lattice is isomorphic to the original.
        assert!(find_isomorphism(
            &s.lattice().opposite().opposite(),
            s.lattice()
        )
        .is_some());
        // Specialization flips: the generic point of s corresponds to the
        // closed point of d.
        let sc = s.irreducible_components();
        let dc = d.irreducible_components();
        assert_eq!(sc.len(), 1);
        assert_eq!(dc.len(), 1);
    }

    #[test]
    fn hausdorff_iff_boolean() {
        for (l, expect) in [
            (chain(2), true),
            (chain(3), false),
            (boolean(3), true),
            (free_on_two(), false),
        ] {
            assert_eq!(spec(&l).is_hausdorff(), expect);
        }
    }

    #[test]
    fn spectral_map_from_embedding() {
        // h : chain(2) -> chain(3), 0 -> 0, 1 -> 2.
        let a = chain(2);
        let b = chain(3);
        let h = LatticeHom::new(&a, &b, vec![0, 2]).unwrap();
        let sa = spec(&a);
        let sb = spec(&b);
        let f = spectral_map_from_hom(&h, &sa, &sb).unwrap();
        assert_eq!(f.map.len(), 2);
        // Both points of spec(chain(3)) land on the single point of
        // spec(chain(2)).
        assert_eq!(f.map, vec![0, 0]);
        assert!(f.is_open_map(&sa, &sb));
    }

    #[test]
    fn identity_spectral_map() {
        let l = free_on_two();
        let s = spec(&l);
        let f = spectral_map_from_hom(&LatticeHom::identity(&l), &s, &s).unwrap();
        assert_eq!(f.map, (0..s.point_count()).collect::<Vec<_>>());
    }

    #[test]
    fn baire_holds_on_samples() {
        for l in [chain(4), boolean(3), free_on_two()] {
            assert!(spec(&l).baire_check());
        }
    }

    #[test]
    fn report_and_dot_are_stable() {
        let s = spec(&chain(3));
        let r = s.report();
        assert_eq!(r.points.len(), 2);
        assert!(r.t0 && r.sober && !r.hausdorff);
        let dot = s.to_dot("sierpinski");
        assert!(dot.contains("doublecircle"));
        assert!(dot.contains("cluster_0"));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"hausdorff\":false"));
    }
}
