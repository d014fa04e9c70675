//! A desk-scale workbench for positive model theory over finite relational
//! structures.
//!
//! The library is organised around a pipeline:
//!
//! * [`syntax`] — signatures, positive / h-inductive formulas, a small text
//!   DSL, substitution along finite-ordinal maps, primitive-positive normal
//!   form and the Morleisation transformer.
//! * [`semantics`] — finite structures, formula evaluation, homomorphism and
//!   immersion search, bounded model enumeration.
//! * [`dlattice`] — finite bounded distributive lattices, join-irreducibles
//!   and prime filters.
//! * [`spectrum`] — the spectral space of a lattice: specialization, closure,
//!   irreducible components, Hausdorff / sober checks, Hochster dual.
//! * [`typespace`] — definable-set lattices of a finite model class, the type
//!   spaces built from them, the substitution functor and the theory-level
//!   checkers (positive model-completeness, amalgamation, joint continuation,
//!   supports, atomic and prime models, interpretations).

pub mod dlattice;
pub mod semantics;
pub mod spectrum;
pub mod syntax;
pub mod typespace;
