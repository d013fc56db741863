//! Embedded manifolds with linear orthogonal group actions.

mod action;
mod manifold;

pub use action::{LinearAction, RepKind};
pub use manifold::{
    Chart, Embedding, EquivariantManifold, HorizontalFrame, InertiaTensor, SectionModel, MEMBERSHIP_TOL,
};
