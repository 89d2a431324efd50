use serde::Serialize;

use super::cohomology::{block_weight_norm, cohomology, decompositions};
use super::subspace::{closeness, SubspaceBasis};
use super::{float_repr, AnalysisError};
use crate::cochain::codifferential;
use crate::complex::EquivariantComplex;
use crate::linalg::{self, RankTolerance};
use crate::rep::{self, Representation};

/// Bisection range and step count for [`sufficient_epsilon`].
pub const EPSILON_GRID: (f64, f64, usize) = (1e-8, 10.0, 60);

/// Upper bound on `|d^n_pi - d^n_rho|_2` valid for every `rho` with `d_S(pi, rho) <= eps`.
///
/// Each word `w` satisfies `|pi(w) - rho(w)| <= len(w) eps B^{len(w) - 1}` with
/// `B = max_s |pi(s)| + eps`; the per-block sums form a nonnegative matrix
/// whose spectral norm dominates that of the block difference.
pub fn deformation_bound(x: &EquivariantComplex, pi: &Representation, eps: f64, n: usize) -> f64 {
    if eps == 0.0 {
        return 0.0;
    }
    let b = pi.max_generator_norm() + eps;
    let bound = block_weight_norm(x, n, |len| if len == 0 { 0.0 } else { len as f64 * eps * b.powi(len as i32 - 1) });
    bound * (1.0 + 64.0 * f64::EPSILON)
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelCloseness {
    pub bound: f64,
    pub measured: f64,
    pub comparable: bool,
    pub dim_ker_pi: usize,
    pub dim_ker_rho: usize,
}

/// Measured `closeness(ker d^n_rho, ker d^n_pi)` against `|d^n_pi - d^n_rho| / kappa_n(pi)`.
pub fn kernel_closeness_bound(
    x: &EquivariantComplex,
    pi: &Representation,
    rho: &Representation,
    n: usize,
) -> Result<KernelCloseness, AnalysisError> {
    let dp = codifferential(x, pi, n)?.matrix;
    let dr = codifferential(x, rho, n)?.matrix;
    if dp.shape() != dr.shape() {
        return Err(AnalysisError::Shape(format!("codifferentials are {:?} and {:?}", dp.shape(), dr.shape())));
    }
    let decs_pi = decompositions(x, pi, RankTolerance::Relative)?;
    let decs_rho = decompositions(x, rho, RankTolerance::Relative)?;
    let kappa = decs_pi[n].smallest_positive().unwrap_or(f64::INFINITY);
    if kappa == 0.0 {
        return Err(AnalysisError::ZeroKazhdan(n));
    }
    let bound = linalg::spectral_norm(&(&dp - &dr)) / kappa;
    let ker_pi = SubspaceBasis::from_orthonormal(decs_pi[n].kernel())?;
    let ker_rho = SubspaceBasis::from_orthonormal(decs_rho[n].kernel())?;
    Ok(KernelCloseness {
        bound,
        measured: closeness(&ker_rho, &ker_pi)?,
        comparable: ker_pi.dim() == ker_rho.dim(),
        dim_ker_pi: ker_pi.dim(),
        dim_ker_rho: ker_rho.dim(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ChainCase {
    /// `ker d^n_pi = 0`: `d^n_rho` stays injective.
    Injective,
    /// `d^{n-1}_pi != 0`: the adjoint of `d^{n-1}_rho` stays bounded below on `ker d^n_rho`.
    Adjoint,
}

/// Guaranteed drift: `kappa_degree(rho) >= kappa_degree(pi) - c`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Drift {
    pub degree: usize,
    #[serde(serialize_with = "float_repr::serialize")]
    pub c: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SufficientEpsilon {
    pub epsilon: f64,
    pub case: ChainCase,
    pub drift: Drift,
    /// Certified lower bound at `epsilon` for the operator that must stay bounded below.
    pub lower_bound: f64,
    pub diagnostic: Option<String>,
}

struct ChainData {
    case: ChainCase,
    kappa_prev: f64,
    kappa_n: f64,
}

fn chain_data(x: &EquivariantComplex, pi: &Representation, n: usize) -> Result<ChainData, AnalysisError> {
    let report = cohomology(x, pi)?;
    let dim = report.dim(n);
    if dim != 0 {
        return Err(AnalysisError::NonVanishing { degree: n, dim });
    }
    let kappa_n = report.kappa(n);
    let (case, kappa_prev) = if n == 0 || report.degrees[n - 1].rank == 0 {
        (ChainCase::Injective, f64::INFINITY)
    } else {
        (ChainCase::Adjoint, report.kappa(n - 1))
    };
    Ok(ChainData { case, kappa_prev, kappa_n })
}

fn lower_at(x: &EquivariantComplex, pi: &Representation, n: usize, data: &ChainData, eps: f64) -> (f64, Drift) {
    let delta_n = deformation_bound(x, pi, eps, n);
    match data.case {
        ChainCase::Injective => (data.kappa_n - delta_n, Drift { degree: n, c: delta_n }),
        ChainCase::Adjoint => {
            let eta = if data.kappa_n.is_infinite() { 0.0 } else { delta_n / data.kappa_n };
            let delta_prev = deformation_bound(x, pi, eps, n - 1);
            let lower = data.kappa_prev * (1.0 - 2.0 * eta) - delta_prev;
            (lower, Drift { degree: n - 1, c: data.kappa_prev - lower })
        }
    }
}

/// Certified lower bound and drift at a given `eps`, without the search.
pub fn certified_lower_bound(
    x: &EquivariantComplex,
    pi: &Representation,
    n: usize,
    eps: f64,
) -> Result<(f64, Drift), AnalysisError> {
    let data = chain_data(x, pi, n)?;
    Ok(lower_at(x, pi, n, &data, eps))
}

/// Largest `eps` on a log-bisection grid for which the certified chain keeps
/// `H^n(rho) = 0` for every `eps`-deformation `rho` of `pi`.
pub fn sufficient_epsilon(x: &EquivariantComplex, pi: &Representation, n: usize) -> Result<SufficientEpsilon, AnalysisError> {
    let data = chain_data(x, pi, n)?;
    let (lo0, hi0, steps) = EPSILON_GRID;
    let certified = |eps: f64| lower_at(x, pi, n, &data, eps).0 > 0.0;
    let finish = |eps: f64, diagnostic: Option<String>| {
        let (lower_bound, drift) = lower_at(x, pi, n, &data, eps);
        SufficientEpsilon { epsilon: eps, case: data.case, drift, lower_bound, diagnostic }
    };
    if certified(hi0) {
        return Ok(finish(hi0, Some("certified across the whole grid".into())));
    }
    if !certified(lo0) {
        let mut out = finish(0.0, Some(format!("chain does not close at eps = {lo0:e}")));
        out.epsilon = 0.0;
        return Ok(out);
    }
    let (mut lo, mut hi) = (lo0.ln(), hi0.ln());
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if certified(mid.exp()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut eps = lo.exp();
    if !certified(eps) {
        // exp(ln x) may round upward past the certified edge.
        eps = f64::from_bits(eps.to_bits() - 1);
    }
    Ok(finish(eps, None))
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformationReport {
    pub degree: usize,
    pub epsilon_requested: f64,
    pub epsilon_measured: f64,
    /// `|d^k_pi - d^k_rho|_2` for every degree `k`.
    pub codifferential_drift: Vec<f64>,
    pub certified_drift_bound: Vec<f64>,
    pub dims_before: Vec<i64>,
    pub dims_after: Vec<i64>,
    #[serde(serialize_with = "float_repr::serialize_vec")]
    pub kappa_before: Vec<f64>,
    #[serde(serialize_with = "float_repr::serialize_vec")]
    pub kappa_after: Vec<f64>,
    pub kernel_closeness_measured: f64,
    pub kernel_closeness_bound: f64,
    pub kernel_comparable: bool,
    pub vanishing_preserved: bool,
}

pub fn deformation_report(
    x: &EquivariantComplex,
    pi: &Representation,
    rho: &Representation,
    n: usize,
    epsilon_requested: f64,
    tol: RankTolerance,
) -> Result<DeformationReport, AnalysisError> {
    let before = super::cohomology_with(x, pi, tol)?;
    let after = super::cohomology_with(x, rho, tol)?;
    let mut drift = Vec::new();
    let mut drift_bound = Vec::new();
    for k in 0..=x.max_degree() {
        let dp = codifferential(x, pi, k)?.matrix;
        let dr = codifferential(x, rho, k)?.matrix;
        drift.push(linalg::spectral_norm(&(dp - dr)));
        drift_bound.push(deformation_bound(x, pi, epsilon_requested, k));
    }
    let kc = kernel_closeness_bound(x, pi, rho, n)?;
    Ok(DeformationReport {
        degree: n,
        epsilon_requested,
        epsilon_measured: rep::deformation_distance(pi, rho)?,
        codifferential_drift: drift,
        certified_drift_bound: drift_bound,
        vanishing_preserved: before.dim(n) == 0 && after.dim(n) == 0,
        dims_before: before.dims(),
        dims_after: after.dims(),
        kappa_before: before.kappas(),
        kappa_after: after.kappas(),
        kernel_closeness_measured: kc.measured,
        kernel_closeness_bound: kc.bound,
        kernel_comparable: kc.comparable,
    })
}
