use rand::Rng;
use serde::Serialize;

use super::AnalysisError;
use crate::linalg::{self, CMat, Decomposition, RankTolerance};
use crate::random;

/// Orthonormal column basis of a subspace of `C^ambient`.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    basis: CMat,
}

impl SubspaceBasis {
    pub const ORTHONORMAL_TOL: f64 = 1e-12;

    pub fn from_orthonormal(basis: CMat) -> Result<Self, AnalysisError> {
        let k = basis.ncols();
        let defect = linalg::spectral_norm(&(basis.adjoint() * &basis - CMat::identity(k, k)));
        if defect > Self::ORTHONORMAL_TOL {
            return Err(AnalysisError::NotOrthonormal(defect));
        }
        Ok(Self { basis })
    }

    /// Orthonormal basis of the column span of `m`.
    pub fn span(m: &CMat) -> Self {
        Self { basis: Decomposition::new(m, RankTolerance::Relative).image() }
    }

    pub fn zero(ambient: usize) -> Self {
        Self { basis: CMat::zeros(ambient, 0) }
    }

    pub fn whole(ambient: usize) -> Self {
        Self { basis: CMat::identity(ambient, ambient) }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, ambient: usize, dim: usize) -> Self {
        Self::span(&random::gaussian_matrix(rng, ambient, dim))
    }

    pub fn kernel_of(m: &CMat, tol: RankTolerance) -> Self {
        Self { basis: Decomposition::new(m, tol).kernel() }
    }

    pub fn image_of(m: &CMat, tol: RankTolerance) -> Self {
        Self { basis: Decomposition::new(m, tol).image() }
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    pub fn complement(&self) -> Self {
        let n = self.ambient();
        if self.dim() == 0 {
            return Self::whole(n);
        }
        let dec = Decomposition::new(&self.basis.adjoint(), RankTolerance::Relative);
        Self { basis: dec.kernel() }
    }
}

/// `sup_{v in V, |v| = 1} dist(v, W)`, the largest singular value of `(I - P_W) Q_V`.
pub fn closeness(v: &SubspaceBasis, w: &SubspaceBasis) -> Result<f64, AnalysisError> {
    if v.ambient() != w.ambient() {
        return Err(AnalysisError::AmbientMismatch(v.ambient(), w.ambient()));
    }
    let qv = v.basis();
    let qw = w.basis();
    let residual = qv - qw * (qw.adjoint() * qv);
    Ok(linalg::spectral_norm(&residual).clamp(0.0, 1.0))
}

/// One inequality `lhs >= rhs`.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl LemmaCheck {
    pub fn slack(&self) -> f64 {
        if self.lhs == self.rhs {
            0.0
        } else {
            self.lhs - self.rhs
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.slack() >= -tol
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LemmaRecord {
    pub checks: Vec<LemmaCheck>,
}

impl LemmaRecord {
    fn push(&mut self, name: &'static str, lhs: f64, rhs: f64) {
        self.checks.push(LemmaCheck { name, lhs, rhs });
    }

    pub fn get(&self, name: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn violations(&self, tol: f64) -> Vec<&LemmaCheck> {
        self.checks.iter().filter(|c| !c.holds(tol)).collect()
    }

    pub fn all_hold(&self, tol: f64) -> bool {
        self.violations(tol).is_empty()
    }

    pub fn min_slack(&self) -> f64 {
        self.checks.iter().map(LemmaCheck::slack).fold(f64::INFINITY, f64::min)
    }
}

/// Minimum of `|P_W v|` over unit `v` in `V` (1 for `V = 0`).
fn projection_gain(v: &SubspaceBasis, w: &SubspaceBasis) -> f64 {
    linalg::min_gain(&(w.basis().adjoint() * v.basis())).min(1.0)
}

/// With `eps = closeness(V, W)` and `c = min |P_W v|` over unit `v` in `V`:
/// `c >= 1 - eps`, and `eps <= sqrt(1 - c^2)`.
pub fn closeness_lemma_checks(v: &SubspaceBasis, w: &SubspaceBasis) -> Result<(f64, f64, LemmaRecord), AnalysisError> {
    let eps = closeness(v, w)?;
    let c = projection_gain(v, w);
    let mut record = LemmaRecord::default();
    record.push("projection_lower_bound", c, 1.0 - eps);
    record.push("closeness_from_projection", (1.0 - c * c).max(0.0).sqrt() * (1.0 + 1e-10), eps);
    Ok((eps, c, record))
}

fn restrict(m: &CMat, v: &SubspaceBasis) -> Result<CMat, AnalysisError> {
    if m.ncols() != v.ambient() {
        return Err(AnalysisError::Shape(format!("operator has {} columns, subspace lives in C^{}", m.ncols(), v.ambient())));
    }
    Ok(m * v.basis())
}

/// Perturbation inequalities for two operators `T`, `S` with `eps = |T - S|`:
///
/// * `min |Sv| >= C - eps` on `V`, where `C = min |Tv|` on `V`;
/// * with `V` `eps'`-close to `W` and `C_W = min |Sw|` on `W`:
///   `min |Sv| >= C_W - eps' - eps' |S|` on `V`;
/// * `im S` is `eps / gap(S)`-close to `im T`;
/// * `ker T` is `eps / gap(S)`-close to `ker S`.
pub fn bounded_below_perturbation_check(
    t: &CMat,
    s: &CMat,
    v: &SubspaceBasis,
    w: Option<&SubspaceBasis>,
) -> Result<LemmaRecord, AnalysisError> {
    if t.shape() != s.shape() {
        return Err(AnalysisError::Shape(format!("T is {:?}, S is {:?}", t.shape(), s.shape())));
    }
    let eps = linalg::spectral_norm(&(t - s));
    let c = linalg::min_gain(&restrict(t, v)?);
    let s_on_v = linalg::min_gain(&restrict(s, v)?);
    let mut record = LemmaRecord::default();
    record.push("perturbation", s_on_v, c - eps);

    if let Some(w) = w {
        let eps_vw = closeness(v, w)?;
        let c_w = linalg::min_gain(&restrict(s, w)?);
        let norm_s = linalg::spectral_norm(s);
        record.push("transfer", s_on_v, c_w - eps_vw - eps_vw * norm_s);
    }

    let dec_s = Decomposition::new(s, RankTolerance::Relative);
    let dec_t = Decomposition::new(t, RankTolerance::Relative);
    let delta = match dec_s.smallest_positive() {
        Some(g) => eps / g,
        None => 0.0,
    };
    let im_s = SubspaceBasis { basis: dec_s.image() };
    let im_t = SubspaceBasis { basis: dec_t.image() };
    record.push("image_closeness", delta, closeness(&im_s, &im_t)?);
    let ker_t = SubspaceBasis { basis: dec_t.kernel() };
    let ker_s = SubspaceBasis { basis: dec_s.kernel() };
    record.push("kernel_closeness", delta, closeness(&ker_t, &ker_s)?);
    Ok(record)
}

/// Operators on quotients: `T~` vanishes on `V`, `S~` on `W`, `V` is
/// `eps`-close to `W` and `|T~ - S~| <= delta`. If `T` is bounded below by
/// `C` on `E / V` then `S` is bounded below by `C (1 - 2 eps) - delta` on `E / W`.
///
/// Also records the underlying estimate `|P_{V^perp} w'| >= (1 - 2 eps) |w'|`
/// for `w'` orthogonal to `W`.
pub fn quotient_comparison_check(
    t_lift: &CMat,
    s_lift: &CMat,
    v: &SubspaceBasis,
    w: &SubspaceBasis,
) -> Result<LemmaRecord, AnalysisError> {
    if t_lift.shape() != s_lift.shape() {
        return Err(AnalysisError::Shape(format!("lifts are {:?} and {:?}", t_lift.shape(), s_lift.shape())));
    }
    let scale = linalg::spectral_norm(t_lift).max(linalg::spectral_norm(s_lift)).max(1.0);
    for (name, m, sub) in [("T", t_lift, v), ("S", s_lift, w)] {
        let leak = linalg::spectral_norm(&restrict(m, sub)?);
        if leak > 1e-10 * scale {
            return Err(AnalysisError::Shape(format!("lift of {name} does not vanish on its subspace ({leak:e})")));
        }
    }
    let eps = closeness(v, w)?;
    let delta = linalg::spectral_norm(&(t_lift - s_lift));
    let v_perp = v.complement();
    let w_perp = w.complement();
    let c = linalg::min_gain(&restrict(t_lift, &v_perp)?);
    let s_below = linalg::min_gain(&restrict(s_lift, &w_perp)?);
    let mut record = LemmaRecord::default();
    let gain = linalg::min_gain(&(v_perp.basis().adjoint() * w_perp.basis()));
    record.push("quotient_projection", gain.min(1.0), 1.0 - 2.0 * eps);
    record.push("quotient_comparison", s_below, c * (1.0 - 2.0 * eps) - delta);
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::random::rng_from_seed;

    fn line(theta: f64) -> SubspaceBasis {
        let m = CMat::from_column_slice(2, 1, &[C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)]);
        SubspaceBasis::from_orthonormal(m).unwrap()
    }

    #[test]
    fn closeness_examples() {
        let v = line(0.3);
        assert!(closeness(&v, &v).unwrap() < 1e-15);
        assert!((closeness(&line(0.0), &line(std::f64::consts::FRAC_PI_2)).unwrap() - 1.0).abs() < 1e-15);
        for theta in [0.1, 0.7, 1.2] {
            assert!((closeness(&line(0.0), &line(theta)).unwrap() - theta.sin()).abs() < 1e-14);
        }
        assert!(closeness(&line(0.0), &SubspaceBasis::whole(3)).is_err());
    }

    #[test]
    fn closeness_is_asymmetric() {
        let plane = SubspaceBasis::whole(2);
        let l = line(0.4);
        assert!(closeness(&l, &plane).unwrap() < 1e-15);
        assert!((closeness(&plane, &l).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lemma_checks_on_lines() {
        let theta = 0.6;
        let (eps, c, record) = closeness_lemma_checks(&line(0.0), &line(theta)).unwrap();
        assert!((eps - theta.sin()).abs() < 1e-14);
        assert!((c - theta.cos()).abs() < 1e-14);
        assert!(record.all_hold(0.0));
        let (eps, c, _) = closeness_lemma_checks(&line(1.0), &line(1.0)).unwrap();
        assert!(eps < 1e-15 && (c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lemma_checks_random() {
        for seed in 0..50 {
            let mut rng = rng_from_seed(seed);
            let v = SubspaceBasis::random(&mut rng, 8, 3);
            let w = SubspaceBasis::random(&mut rng, 8, 3);
            let (_, _, record) = closeness_lemma_checks(&v, &w).unwrap();
            assert!(record.all_hold(1e-12), "{record:?}");
        }
    }

    #[test]
    fn identical_operators_have_nonnegative_slack() {
        let mut rng = rng_from_seed(1);
        let t = random::gaussian_matrix(&mut rng, 6, 4);
        let v = SubspaceBasis::random(&mut rng, 4, 2);
        let record = bounded_below_perturbation_check(&t, &t, &v, Some(&v)).unwrap();
        assert!(record.all_hold(1e-12), "{record:?}");
    }

    #[test]
    fn coimage_gain_is_gap() {
        let mut rng = rng_from_seed(2);
        let t = random::gaussian_matrix(&mut rng, 5, 2) * random::gaussian_matrix(&mut rng, 2, 4);
        let dec = Decomposition::new(&t, RankTolerance::Relative);
        let v = SubspaceBasis::from_orthonormal(dec.coimage()).unwrap();
        let c = linalg::min_gain(&(&t * v.basis()));
        assert!((c - dec.smallest_positive().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quotient_rejects_nonvanishing_lift() {
        let v = line(0.0);
        let t = CMat::identity(2, 2);
        assert!(quotient_comparison_check(&t, &t, &v, &v).is_err());
    }

    #[test]
    fn complement_is_orthogonal() {
        let mut rng = rng_from_seed(3);
        let v = SubspaceBasis::random(&mut rng, 6, 2);
        let c = v.complement();
        assert_eq!(c.dim(), 4);
        assert!((v.basis().adjoint() * c.basis()).norm() < 1e-14);
        assert_eq!(SubspaceBasis::zero(3).complement().dim(), 3);
    }
}
