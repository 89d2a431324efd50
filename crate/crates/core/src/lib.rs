//! Twisted cohomology of groups acting on cell complexes, Kazhdan constants
//! and certified stability bounds under small deformations of the
//! coefficient representation.

pub mod analysis;
pub mod cochain;
pub mod complex;
pub mod linalg;
pub mod presentation;
pub mod random;
pub mod rep;

pub use analysis::{cohomology, kazhdan_constant, CohomologyReport, SubspaceBasis};
pub use cochain::{codifferential, laplacian, CochainNorm, TwistedCodifferential};
pub use complex::EquivariantComplex;
pub use linalg::{CMat, RankTolerance, C64};
pub use presentation::{GroupPresentation, GroupRingElement, Word};
pub use rep::{DeformationKind, DeformationSpec, Representation};
