//! Equivariant deformations over artinian bases: lifts, their differences,
//! obstruction classes, the two liftability components of a subgroup, the
//! relative obstruction for a normal subgroup and the completion of
//! compatible pairs.
//!
//! Conventions (shared with [`crate::maps`]): `g` acts on series by
//! `x ↦ x(f_g)`, so `f_{gh} = f_h(f_g)`; a lift `F_g ∈ A[[t]]` acts by the
//! ring automorphism `Φ_g(x) = x(F_g)` and `Φ_{gh} = Φ_g Φ_h`. For a small
//! extension `A′ → A` with kernel `I` the automorphisms of `A′[[t]]`
//! reducing to the identity are `1 + Σᵢ εᵢ Dᵢ` with `Dᵢ = cᵢ d/dt`, and `G`
//! acts on them by conjugation, which is `g·c = c(f_g)/f_g'`. With these:
//!
//! | object | series |
//! |---|---|
//! | `(1 + εD)Φ_g` | `F_g + ε·c·f_g'` |
//! | `Φ¹_g (Φ²_g)⁻¹` (difference) | `F²_g⁻¹(F¹_g)` |
//! | `Φ_g Φ_h Φ_{gh}⁻¹` (obstruction) | `F_{gh}⁻¹(F_h(F_g))` |
//! | `X Φ_g X⁻¹` (conjugation) | `X⁻¹(F_g(X))` |

mod lift;
mod obstruction;
mod ring;

pub use lift::*;
pub use obstruction::*;
pub use ring::*;

use thiserror::Error;

use crate::action::ActionError;
use crate::groups::GroupError;
use crate::linalg::LinalgError;
use crate::maps::MapsError;
use crate::series::SeriesError;

/// Failures of deformation computations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeformError {
    /// An invalid ring or ring map.
    #[error("invalid ring: {0}")]
    Ring(String),
    /// The extension is not small.
    #[error("not a small extension: {0}")]
    NotSmall(String),
    /// Two lifts do not lie over the same lift.
    #[error("lifts lie in different fibers: {0}")]
    FiberMismatch(String),
    /// A family of series is not a lift.
    #[error("invalid lift: {0}")]
    InvalidLift(String),
    /// A hypothesis of the construction fails.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// The obstruction restricted to the subgroup is not a coboundary.
    #[error("the obstruction restricted to the subgroup is not a coboundary")]
    RestrictionNotCoboundary,
    /// Not enough precision.
    #[error("precision: {0}")]
    Precision(String),
    /// Failure in the maps layer.
    #[error(transparent)]
    Maps(#[from] MapsError),
}

impl DeformError {
    /// True for precision failures, at any layer.
    pub fn is_precision(&self) -> bool {
        match self {
            DeformError::Precision(_) => true,
            DeformError::Maps(m) => m.is_precision(),
            _ => false,
        }
    }
}

impl From<SeriesError> for DeformError {
    fn from(e: SeriesError) -> Self {
        DeformError::Maps(e.into())
    }
}

impl From<ActionError> for DeformError {
    fn from(e: ActionError) -> Self {
        DeformError::Maps(e.into())
    }
}

impl From<GroupError> for DeformError {
    fn from(e: GroupError) -> Self {
        DeformError::Maps(e.into())
    }
}

impl From<LinalgError> for DeformError {
    fn from(e: LinalgError) -> Self {
        DeformError::Maps(e.into())
    }
}

/// Reborrows an optional random source for one call.
pub(crate) fn reborrow<'a>(rng: &'a mut Option<&mut dyn rand::RngCore>) -> Option<&'a mut dyn rand::RngCore> {
    match rng {
        Some(r) => Some(&mut **r),
        None => None,
    }
}
