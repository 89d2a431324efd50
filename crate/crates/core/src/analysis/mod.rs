//! Cohomology, Kazhdan constants, subspace closeness and the certified
//! stability chain for deformations of the coefficient representation.

mod cohomology;
mod criteria;
mod stability;
mod subspace;

pub use cohomology::{cohomology, cohomology_with, kazhdan_constant, rank_scale, CohomologyReport, DegreeReport};
pub use criteria::{
    duality_check, laplacian_criterion, weil_rigidity_check, DualityRecord, LaplacianCriterion, WeilCertificate,
};
pub use stability::{
    certified_lower_bound, deformation_bound, deformation_report, kernel_closeness_bound, sufficient_epsilon,
    ChainCase, DeformationReport, Drift, KernelCloseness, SufficientEpsilon, EPSILON_GRID,
};
pub use subspace::{
    bounded_below_perturbation_check, closeness, closeness_lemma_checks, quotient_comparison_check, LemmaCheck,
    LemmaRecord, SubspaceBasis,
};

use thiserror::Error;

use crate::cochain::CochainError;
use crate::rep::RepError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error("ambient dimensions differ: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("basis columns are not orthonormal (defect {0:e})")]
    NotOrthonormal(f64),
    #[error("operator shapes are inconsistent: {0}")]
    Shape(String),
    #[error("Kazhdan constant of degree {0} is zero; the rank threshold is likely misconfigured")]
    ZeroKazhdan(usize),
    #[error("dim H^{degree} = {dim}, expected vanishing")]
    NonVanishing { degree: usize, dim: i64 },
    #[error("representation is not unitary; the Laplacian criterion applies only to unitary coefficients")]
    NonUnitary,
}

/// Serializes non-finite floats as the strings `inf`, `-inf` and `nan`.
pub(crate) mod float_repr {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn serialize_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&Repr(*x))?;
        }
        seq.end()
    }

    pub fn serialize_option<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => serialize(v, s),
            None => s.serialize_none(),
        }
    }

    struct Repr(f64);

    impl serde::Serialize for Repr {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            serialize(&self.0, s)
        }
    }
}
