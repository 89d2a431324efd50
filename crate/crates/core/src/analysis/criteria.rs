use serde::Serialize;

use super::cohomology::{cohomology, decompositions, rank_scale};
use super::{float_repr, AnalysisError};
use crate::cochain::{codifferential, laplacian};
use crate::complex::EquivariantComplex;
use crate::linalg::{self, RankTolerance};
use crate::rep::{self, Representation};

#[derive(Clone, Debug, Serialize)]
pub struct LaplacianCriterion {
    pub degree: usize,
    pub invertible: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub tau_gap: f64,
}

/// `H^n = 0` iff `Delta^n` is invertible, decided by `lambda_min > 1e-9 lambda_max`.
/// `lambda_max` is floored by the squared rounding scale of the adjacent codifferentials,
/// so a Laplacian that vanishes up to roundoff reads as singular.
pub fn laplacian_criterion(x: &EquivariantComplex, pi: &Representation, n: usize) -> Result<LaplacianCriterion, AnalysisError> {
    let l = laplacian(x, pi, n)?;
    if l.non_unitary {
        return Err(AnalysisError::NonUnitary);
    }
    let ev = linalg::hermitian_eigenvalues(&l.matrix);
    let lambda_min = ev.first().copied().unwrap_or(0.0);
    let lambda_max = ev.last().copied().unwrap_or(0.0);
    let mut floor = rank_scale(x, pi, n).powi(2);
    if n > 0 {
        floor = floor.max(rank_scale(x, pi, n - 1).powi(2));
    }
    let tau_gap = 1e-9 * lambda_max.max(floor);
    Ok(LaplacianCriterion { degree: n, invertible: lambda_min > tau_gap, lambda_min, lambda_max, tau_gap })
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityRecord {
    pub degree: usize,
    pub dim_h: i64,
    /// Minimum of `|(d^{n-1})^* f|` over unit `f` in `ker d^n`.
    #[serde(serialize_with = "float_repr::serialize")]
    pub lower_bound: f64,
    pub bounded_below: bool,
    #[serde(serialize_with = "float_repr::serialize")]
    pub kappa_prev: f64,
    /// `dim H^n = 0` exactly when the adjoint is bounded below.
    pub consistent: bool,
    /// For `n >= 1` with `H^n = 0`, whether `lower_bound` equals `kappa_{n-1}` within `1e-8`.
    pub matches_kappa: Option<bool>,
}

pub fn duality_check(x: &EquivariantComplex, pi: &Representation, n: usize) -> Result<DualityRecord, AnalysisError> {
    let decs = decompositions(x, pi, RankTolerance::Relative)?;
    let report = cohomology(x, pi)?;
    let dim_h = report.dim(n);
    let kernel = decs[n].kernel();
    let (lower_bound, threshold, kappa_prev) = if n == 0 {
        (if kernel.ncols() == 0 { f64::INFINITY } else { 0.0 }, 0.0, f64::INFINITY)
    } else {
        let prev = codifferential(x, pi, n - 1)?.matrix;
        let gain = if kernel.ncols() == 0 { f64::INFINITY } else { linalg::min_gain(&(prev.adjoint() * &kernel)) };
        (gain, decs[n - 1].threshold, report.kappa(n - 1))
    };
    let bounded_below = lower_bound > threshold;
    let matches_kappa = (n >= 1 && dim_h == 0).then(|| lower_bound == kappa_prev || (lower_bound - kappa_prev).abs() <= 1e-8);
    Ok(DualityRecord {
        degree: n,
        dim_h,
        lower_bound,
        bounded_below,
        kappa_prev,
        consistent: (dim_h == 0) == bounded_below,
        matches_kappa,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WeilCertificate {
    pub rigid: bool,
    pub dim_h1: i64,
    #[serde(serialize_with = "float_repr::serialize")]
    pub kappa_0: f64,
    #[serde(serialize_with = "float_repr::serialize")]
    pub kappa_1: f64,
}

/// First cohomology with coefficients in `Ad(phi)` on the presentation complex;
/// vanishing certifies local rigidity of `phi`.
pub fn weil_rigidity_check(phi: &Representation) -> Result<WeilCertificate, AnalysisError> {
    let x = EquivariantComplex::presentation_complex(phi.presentation());
    let ad = rep::adjoint_rep(phi);
    let report = cohomology(&x, &ad)?;
    let dim_h1 = if x.max_degree() >= 1 { report.dim(1) } else { 0 };
    Ok(WeilCertificate {
        rigid: dim_h1 == 0,
        dim_h1,
        kappa_0: report.kappa(0),
        kappa_1: if x.max_degree() >= 1 { report.kappa(1) } else { f64::INFINITY },
    })
}
