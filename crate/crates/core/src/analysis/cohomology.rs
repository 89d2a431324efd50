use nalgebra::DMatrix;
use serde::Serialize;

use super::{float_repr, AnalysisError};
use crate::cochain::{codifferential, laplacian, UNITARY_TOL};
use crate::complex::EquivariantComplex;
use crate::linalg::{self, Decomposition, RankTolerance};
use crate::rep::Representation;

#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub degree: usize,
    pub cells: usize,
    /// `dim ker d^n - rank d^{n-1}`; negative only under a broken rank threshold.
    pub dim_h: i64,
    pub rank: usize,
    pub nullity: usize,
    #[serde(serialize_with = "float_repr::serialize")]
    pub kappa: f64,
    pub gap: f64,
    pub reduced: bool,
    pub threshold: f64,
    /// Smallest singular value of `d^n` kept by the threshold.
    #[serde(serialize_with = "float_repr::serialize_option")]
    pub sigma_kept: Option<f64>,
    /// Largest singular value of `d^n` discarded by the threshold.
    #[serde(serialize_with = "float_repr::serialize_option")]
    pub sigma_dropped: Option<f64>,
    #[serde(serialize_with = "float_repr::serialize_option")]
    pub laplacian_lambda_min: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologyReport {
    pub complex: String,
    pub representation: String,
    pub dim_e: usize,
    pub rank_tolerance: RankTolerance,
    pub unitary: bool,
    pub euler_characteristic: i64,
    pub degrees: Vec<DegreeReport>,
}

impl CohomologyReport {
    pub fn dims(&self) -> Vec<i64> {
        self.degrees.iter().map(|d| d.dim_h).collect()
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.degrees.iter().map(|d| d.kappa).collect()
    }

    pub fn dim(&self, n: usize) -> i64 {
        self.degrees[n].dim_h
    }

    pub fn kappa(&self, n: usize) -> f64 {
        self.degrees[n].kappa
    }

    pub fn euler_sum(&self) -> i64 {
        self.degrees.iter().map(|d| if d.degree % 2 == 0 { d.dim_h } else { -d.dim_h }).sum()
    }

    pub fn euler_audit(&self) -> bool {
        self.euler_sum() == self.dim_e as i64 * self.euler_characteristic
    }
}

/// Spectral norm of the real matrix whose `(c', c)` entry is
/// `sum |coeff| * weight(len(word))` over the boundary terms of that block.
pub(crate) fn block_weight_norm(x: &EquivariantComplex, n: usize, weight: impl Fn(usize) -> f64) -> f64 {
    if n >= x.max_degree() {
        return 0.0;
    }
    let b = x.boundary(n + 1);
    let mut m = DMatrix::<f64>::zeros(b.rows(), b.cols());
    for (row, col, e) in b.nonzero() {
        m[(row, col)] = e.terms().map(|(w, c)| c.unsigned_abs() as f64 * weight(w.len())).sum();
    }
    linalg::real_spectral_norm(&m)
}

/// Magnitude of the rounding carried by `d^n`: each word of length `len`
/// costs `(len + 1) dim M^len`, `M = max_s |pi(s)|`. Floors the relative rank
/// threshold so that residue of exact cancellations reads as zero. The factor
/// [`RANK_SAFETY`] absorbs rounding already present in the generator images.
pub fn rank_scale(x: &EquivariantComplex, pi: &Representation, n: usize) -> f64 {
    let m = pi.max_generator_norm();
    let d = pi.dim() as f64;
    RANK_SAFETY * block_weight_norm(x, n, |len| (len + 1) as f64 * d * m.powi(len as i32))
}

pub const RANK_SAFETY: f64 = 64.0;

pub(crate) fn decompositions(
    x: &EquivariantComplex,
    pi: &Representation,
    tol: RankTolerance,
) -> Result<Vec<Decomposition>, AnalysisError> {
    (0..=x.max_degree())
        .map(|n| {
            let d = codifferential(x, pi, n)?.matrix;
            Ok(Decomposition::with_scale(&d, tol, rank_scale(x, pi, n)))
        })
        .collect()
}

pub fn cohomology(x: &EquivariantComplex, pi: &Representation) -> Result<CohomologyReport, AnalysisError> {
    cohomology_with(x, pi, RankTolerance::Relative)
}

pub fn cohomology_with(
    x: &EquivariantComplex,
    pi: &Representation,
    tol: RankTolerance,
) -> Result<CohomologyReport, AnalysisError> {
    let decs = decompositions(x, pi, tol)?;
    let unitary = pi.is_unitary(UNITARY_TOL);
    let mut degrees = Vec::with_capacity(decs.len());
    for (n, dec) in decs.iter().enumerate() {
        let prev_rank = if n == 0 { 0 } else { decs[n - 1].rank };
        let laplacian_lambda_min = if unitary {
            let l = laplacian(x, pi, n)?.matrix;
            linalg::hermitian_eigenvalues(&l).first().copied()
        } else {
            None
        };
        degrees.push(DegreeReport {
            degree: n,
            cells: x.cell_count(n),
            dim_h: dec.nullity() as i64 - prev_rank as i64,
            rank: dec.rank,
            nullity: dec.nullity(),
            kappa: dec.smallest_positive().unwrap_or(f64::INFINITY),
            gap: dec.smallest_positive().unwrap_or(0.0),
            reduced: true,
            threshold: dec.threshold,
            sigma_kept: dec.smallest_positive(),
            sigma_dropped: dec.largest_discarded(),
            laplacian_lambda_min,
        });
    }
    Ok(CohomologyReport {
        complex: x.name().to_string(),
        representation: pi.label().to_string(),
        dim_e: pi.dim(),
        rank_tolerance: tol,
        unitary,
        euler_characteristic: x.euler_characteristic(),
        degrees,
    })
}

/// Smallest positive singular value of `d^n`, `+inf` when `d^n = 0`.
pub fn kazhdan_constant(x: &EquivariantComplex, pi: &Representation, n: usize) -> Result<f64, AnalysisError> {
    let d = codifferential(x, pi, n)?.matrix;
    let dec = Decomposition::with_scale(&d, RankTolerance::Relative, rank_scale(x, pi, n));
    Ok(dec.smallest_positive().unwrap_or(f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::presentation::GroupPresentation;
    use crate::random::unit_phase;
    use std::f64::consts::PI;

    fn setup(name: &str) -> (std::sync::Arc<GroupPresentation>, EquivariantComplex) {
        let p = GroupPresentation::preset(name).unwrap();
        let x = EquivariantComplex::presentation_complex(&p);
        (p, x)
    }

    #[test]
    fn torus_dims() {
        let (p, x) = setup("Z2");
        let triv = Representation::trivial(p.clone(), 1);
        let r = cohomology(&x, &triv).unwrap();
        assert_eq!(r.dims(), vec![1, 2, 1]);
        assert!(r.euler_audit());
        let minus = Representation::character(p, &[C64::new(-1.0, 0.0), C64::new(-1.0, 0.0)]).unwrap();
        let r = cohomology(&x, &minus).unwrap();
        assert_eq!(r.dims(), vec![0, 0, 0]);
        assert!((r.kappa(0) - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn line_examples() {
        let (p, x) = setup("Z");
        let minus = Representation::character(p.clone(), &[C64::new(-1.0, 0.0)]).unwrap();
        assert_eq!(cohomology(&x, &minus).unwrap().dims(), vec![0, 0]);
        assert_eq!(kazhdan_constant(&x, &minus, 0).unwrap(), 2.0);
        let triv = Representation::trivial(p, 1);
        assert_eq!(kazhdan_constant(&x, &triv, 0).unwrap(), f64::INFINITY);
        assert_eq!(kazhdan_constant(&x, &triv, 1).unwrap(), f64::INFINITY);
    }

    #[test]
    fn root_of_unity_residue_reads_as_zero() {
        let (p, x) = setup("Z3");
        let chi = Representation::character(p, &[unit_phase(2.0 * PI / 3.0)]).unwrap();
        let r = cohomology(&x, &chi).unwrap();
        // The presentation complex is not aspherical: d^1 = 0 leaves H^2 = C.
        assert_eq!(r.dims(), vec![0, 0, 1]);
        assert!(r.euler_audit());
        assert_eq!(r.kappa(1), f64::INFINITY);
        assert!((r.kappa(0) - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn circle_kappa() {
        let x = setup("Z").1;
        for n in [4usize, 8, 16, 64] {
            let pi = Representation::circle_discretization(n).unwrap();
            let k = kazhdan_constant(&x, &pi, 0).unwrap();
            assert!((k - 2.0 * (PI / n as f64).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn json_writes_inf_as_string() {
        let (p, x) = setup("Z");
        let r = cohomology(&x, &Representation::trivial(p, 1)).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"kappa\":\"inf\""));
        let first = json.find("\"complex\"").unwrap();
        assert!(first < json.find("\"degrees\"").unwrap());
    }
}
