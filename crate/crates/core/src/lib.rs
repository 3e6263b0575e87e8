//! Equivariant deformation cohomology of local group actions on k[[t]].
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] — exact dense linear algebra over 𝔽_p;
//! * [`series`] — truncated Laurent series with exact precision tracking;
//! * [`groups`] — finite groups, 𝔽_p[G]-modules and their low-degree cohomology;
//! * [`action`] — local actions `g ↦ f_g(t)`, ramification, invariants,
//!   quotient actions and derivation lattices;
//! * [`maps`] — restriction/induction tangent maps, the splitting element of
//!   Hilbert 90, the γ/σ/∂ maps and diagram checkers;
//! * [`deform`] — artinian lifts, obstruction classes and the relative
//!   obstruction for a normal subgroup;
//! * [`io`] — JSON formats and the bundled fixture corpus.

pub mod linalg;
pub mod series;
pub mod groups;
pub mod action;
pub mod maps;
pub mod deform;
pub mod io;
pub mod cli;
