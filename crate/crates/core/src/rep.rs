//! Finite-dimensional representations of a finitely presented group and the
//! deformation constructors built on top of them.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::EquivariantComplex;
use crate::linalg::{self, CMat, Decomposition, RankTolerance, C64};
use crate::presentation::{GroupPresentation, GroupRingElement, Letter, Word};
use crate::random::{self, rng_from_seed};

/// Absolute spectral-norm tolerance on `pi(r) - I` for every relator `r`.
pub const RELATOR_TOL: f64 = 1e-9;

/// Generator images with a larger condition number are rejected.
pub const CONDITION_CAP: f64 = 1e12;

const RESCALE_ATTEMPTS: usize = 100;

#[derive(Debug, Error)]
pub enum RepError {
    #[error("expected {expected} generator images, got {found}")]
    GeneratorCount { expected: usize, found: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("image of generator {generator} is singular (condition number {condition:e})")]
    Singular { generator: usize, condition: f64 },
    #[error("relator {relator} violated: |pi(r) - I| = {residual:e}")]
    RelatorViolated { relator: String, residual: f64 },
    #[error("representations are attached to different presentations ({0} vs {1})")]
    PresentationMismatch(String, String),
    #[error("derivation identity fails on relator {relator}: residual {residual:e}")]
    InvalidDerivation { relator: String, residual: f64 },
    #[error("mode count {modes} out of range 0..={max}")]
    ModeOutOfRange { modes: usize, max: usize },
    #[error("circle discretization needs N >= 3, got {0}")]
    CircleTooSmall(usize),
    #[error("conjugating matrix is singular (condition number {0:e})")]
    SingularConjugator(f64),
    #[error("deformation kind does not fit this representation: {0}")]
    KindMismatch(String),
    #[error("could not land a deformation in [{lo}, {hi}] after {attempts} attempts")]
    Rescale { lo: f64, hi: f64, attempts: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug)]
pub struct Representation {
    presentation: Arc<GroupPresentation>,
    dim: usize,
    images: Vec<CMat>,
    inverses: Vec<CMat>,
    condition_numbers: Vec<f64>,
    label: String,
}

impl Representation {
    pub fn new(
        presentation: Arc<GroupPresentation>,
        images: Vec<CMat>,
        label: impl Into<String>,
    ) -> Result<Self, RepError> {
        Self::with_tolerance(presentation, images, label, RELATOR_TOL)
    }

    pub fn with_tolerance(
        presentation: Arc<GroupPresentation>,
        images: Vec<CMat>,
        label: impl Into<String>,
        relator_tol: f64,
    ) -> Result<Self, RepError> {
        let k = presentation.generator_count();
        if images.len() != k {
            return Err(RepError::GeneratorCount { expected: k, found: images.len() });
        }
        let dim = images[0].nrows();
        if dim == 0 {
            return Err(RepError::DimensionMismatch { expected: 1, found: 0 });
        }
        let mut inverses = Vec::with_capacity(k);
        let mut condition_numbers = Vec::with_capacity(k);
        for (g, m) in images.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(RepError::DimensionMismatch { expected: dim, found: m.ncols().max(m.nrows()) });
            }
            let condition = linalg::condition_number(m);
            if !(condition <= CONDITION_CAP) {
                return Err(RepError::Singular { generator: g, condition });
            }
            let inv = m.clone().try_inverse().ok_or(RepError::Singular { generator: g, condition })?;
            inverses.push(inv);
            condition_numbers.push(condition);
        }
        let rep = Self { presentation, dim, images, inverses, condition_numbers, label: label.into() };
        for r in rep.presentation.relators() {
            let residual = rep.relator_residual(r);
            if !(residual <= relator_tol) {
                return Err(RepError::RelatorViolated { relator: r.to_string(), residual });
            }
        }
        Ok(rep)
    }

    pub fn trivial(presentation: Arc<GroupPresentation>, dim: usize) -> Self {
        let images = vec![CMat::identity(dim, dim); presentation.generator_count()];
        Self::new(presentation, images, format!("trivial:{dim}")).expect("trivial representation")
    }

    /// One-dimensional representation with the given generator images.
    pub fn character(presentation: Arc<GroupPresentation>, values: &[C64]) -> Result<Self, RepError> {
        let images = values.iter().map(|&z| CMat::from_element(1, 1, z)).collect();
        let label = format!("char:{values:?}");
        Self::new(presentation, images, label)
    }

    /// Generators act by the given diagonals.
    pub fn diagonal(
        presentation: Arc<GroupPresentation>,
        diagonals: &[Vec<C64>],
        label: impl Into<String>,
    ) -> Result<Self, RepError> {
        let images = diagonals
            .iter()
            .map(|d| CMat::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
            .collect();
        Self::new(presentation, images, label)
    }

    /// Multiplication by `diag(w, w^2, ..., w^{N-1})`, `w = exp(2 pi i / N)`:
    /// the regular representation of `Z/N` with the invariant line removed,
    /// viewed as a representation of `Z`.
    pub fn circle_discretization(n: usize) -> Result<Self, RepError> {
        if n < 3 {
            return Err(RepError::CircleTooSmall(n));
        }
        let z = GroupPresentation::preset("Z").expect("Z preset");
        let diag: Vec<C64> = (1..n)
            .map(|k| random::unit_phase(2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        Self::diagonal(z, &[diag], format!("circle:{n}"))
    }

    /// Seeded random unitary representation.
    ///
    /// Relator-free presentations get independent Haar unitaries. Otherwise
    /// each basis line carries a random character (continuous phases when all
    /// relators have zero exponent sum, roots of unity otherwise) and the
    /// result is conjugated by a Haar unitary.
    pub fn random_unitary(presentation: Arc<GroupPresentation>, dim: usize, seed: u64) -> Result<Self, RepError> {
        let mut rng = rng_from_seed(seed);
        let k = presentation.generator_count();
        let label = format!("unitary:{dim}:{seed}");
        if presentation.relators().is_empty() {
            let images = (0..k).map(|_| random::haar_unitary(&mut rng, dim)).collect();
            return Self::new(presentation, images, label);
        }
        let sums: Vec<Vec<i64>> = presentation.relators().iter().map(|r| r.exponent_sums(k)).collect();
        let balanced = sums.iter().all(|s| s.iter().all(|&e| e == 0));
        let mut diagonals = vec![Vec::with_capacity(dim); k];
        for _ in 0..dim {
            let phases = if balanced {
                (0..k).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect::<Vec<_>>()
            } else {
                random_root_character(&mut rng, &sums)
                    .ok_or_else(|| RepError::KindMismatch("no finite-order character found".into()))?
            };
            for (g, phi) in phases.into_iter().enumerate() {
                diagonals[g].push(random::unit_phase(phi));
            }
        }
        let u = random::haar_unitary(&mut rng, dim);
        let images = diagonals
            .iter()
            .map(|d| &u * CMat::from_diagonal(&nalgebra::DVector::from_column_slice(d)) * u.adjoint())
            .collect();
        Self::new(presentation, images, label)
    }

    pub fn presentation(&self) -> &Arc<GroupPresentation> {
        &self.presentation
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn images(&self) -> &[CMat] {
        &self.images
    }

    pub fn image(&self, generator: usize) -> &CMat {
        &self.images[generator]
    }

    pub fn inverse_image(&self, generator: usize) -> &CMat {
        &self.inverses[generator]
    }

    pub fn letter(&self, l: Letter) -> &CMat {
        if l.inverse {
            &self.inverses[l.generator]
        } else {
            &self.images[l.generator]
        }
    }

    pub fn condition_numbers(&self) -> &[f64] {
        &self.condition_numbers
    }

    /// Product of generator images in word order; the empty word maps to `I`.
    pub fn evaluate(&self, w: &Word) -> CMat {
        let mut out = CMat::identity(self.dim, self.dim);
        for &l in w.letters() {
            out *= self.letter(l);
        }
        out
    }

    pub fn evaluate_ring(&self, e: &GroupRingElement) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (w, c) in e.terms() {
            out += self.evaluate(w) * C64::new(c as f64, 0.0);
        }
        out
    }

    pub fn relator_residual(&self, r: &Word) -> f64 {
        linalg::spectral_norm(&(self.evaluate(r) - CMat::identity(self.dim, self.dim)))
    }

    pub fn max_relator_residual(&self) -> f64 {
        self.presentation.relators().iter().map(|r| self.relator_residual(r)).fold(0.0, f64::max)
    }

    /// `max_{s in S} |pi(s)|` over generators and their inverses.
    pub fn max_generator_norm(&self) -> f64 {
        self.images.iter().chain(&self.inverses).map(linalg::spectral_norm).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let id = CMat::identity(self.dim, self.dim);
        self.images.iter().all(|m| linalg::spectral_norm(&(m.adjoint() * m - &id)) <= tol)
    }

    pub fn is_diagonal(&self) -> bool {
        self.images.iter().all(linalg::is_diagonal)
    }

    fn same_presentation(&self, other: &Self) -> Result<(), RepError> {
        if self.presentation != other.presentation {
            return Err(RepError::PresentationMismatch(
                self.presentation.name().into(),
                other.presentation.name().into(),
            ));
        }
        Ok(())
    }

    pub fn parse(presentation: Arc<GroupPresentation>, text: &str, label: impl Into<String>) -> Result<Self, RepError> {
        let mut dim: Option<usize> = None;
        let mut images: Vec<Option<CMat>> = vec![None; presentation.generator_count()];
        let mut current: Option<(usize, Vec<Vec<C64>>)> = None;
        let finish = |current: &mut Option<(usize, Vec<Vec<C64>>)>,
                      images: &mut Vec<Option<CMat>>,
                      dim: usize,
                      line: usize|
         -> Result<(), RepError> {
            if let Some((g, rows)) = current.take() {
                if rows.len() != dim {
                    return Err(RepError::Parse { line, message: format!("generator {g}: {} rows, expected {dim}", rows.len()) });
                }
                images[g] = Some(CMat::from_fn(dim, dim, |i, j| rows[i][j]));
            }
            Ok(())
        };
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| RepError::Parse { line: line_no, message };
            if let Some(rest) = line.strip_prefix("dim:") {
                dim = Some(rest.trim().parse().map_err(|_| err(format!("bad dimension {:?}", rest.trim())))?);
                continue;
            }
            if let Some(rest) = line.strip_prefix("gen ") {
                let d = dim.ok_or_else(|| err("`gen` before `dim`".into()))?;
                finish(&mut current, &mut images, d, line_no)?;
                let name = rest.trim_end_matches(':').trim();
                let mut chars = name.chars();
                let letter = match (chars.next(), chars.next()) {
                    (Some(c), None) => Letter::from_char(c).map_err(|e| err(e.to_string()))?,
                    _ => return Err(err(format!("bad generator name {name:?}"))),
                };
                if letter.inverse || letter.generator >= images.len() {
                    return Err(err(format!("generator {name:?} not in presentation")));
                }
                if images[letter.generator].is_some() {
                    return Err(err(format!("duplicate generator {name:?}")));
                }
                current = Some((letter.generator, Vec::new()));
                continue;
            }
            let d = dim.ok_or_else(|| err("matrix row before `dim`".into()))?;
            let (_, rows) = current.as_mut().ok_or_else(|| err("matrix row before `gen`".into()))?;
            let row = line
                .split_whitespace()
                .map(|tok| parse_complex(tok).ok_or_else(|| err(format!("bad complex entry {tok:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != d {
                return Err(err(format!("row has {} entries, expected {d}", row.len())));
            }
            if rows.len() == d {
                return Err(err("too many rows".into()));
            }
            rows.push(row);
        }
        let d = dim.ok_or(RepError::Parse { line: 1, message: "missing `dim` line".into() })?;
        finish(&mut current, &mut images, d, text.lines().count())?;
        let images = images
            .into_iter()
            .enumerate()
            .map(|(g, m)| m.ok_or(RepError::Parse { line: 0, message: format!("missing generator {}", Letter::new(g, 1).to_char()) }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(presentation, images, label)
    }

    pub fn from_file(presentation: Arc<GroupPresentation>, path: &Path) -> Result<Self, RepError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| RepError::Io { path: path.display().to_string(), source })?;
        Self::parse(presentation, &text, path.display().to_string())
    }

    /// Text form; entries carry 17 significant digits so parsing is exact.
    pub fn to_text(&self) -> String {
        let mut out = format!("dim: {}\n", self.dim);
        for (g, m) in self.images.iter().enumerate() {
            writeln!(out, "gen {}:", Letter::new(g, 1).to_char()).unwrap();
            for i in 0..self.dim {
                let row: Vec<String> = (0..self.dim).map(|j| format_complex(m[(i, j)])).collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
        }
        out
    }
}

pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{:.16e}{sign}{:.16e}j", z.re, z.im)
}

/// Parses `re+imj` / `re-imj`, or a bare real number.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    let finite = |z: C64| (z.re.is_finite() && z.im.is_finite()).then_some(z);
    let Some(body) = s.strip_suffix('j') else {
        return s.parse::<f64>().ok().map(|re| C64::new(re, 0.0)).and_then(finite);
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))?;
    let re: f64 = body[..split].parse().ok()?;
    let im: f64 = body[split..].trim_start_matches('+').parse().ok()?;
    finite(C64::new(re, im))
}

fn random_root_character<R: Rng + ?Sized>(rng: &mut R, sums: &[Vec<i64>]) -> Option<Vec<f64>> {
    let k = sums[0].len();
    for _ in 0..10_000 {
        let q: i64 = rng.random_range(1..=12);
        let m: Vec<i64> = (0..k).map(|_| rng.random_range(0..q)).collect();
        if sums.iter().all(|s| s.iter().zip(&m).map(|(e, x)| e * x).sum::<i64>().rem_euclid(q) == 0) {
            return Some(m.iter().map(|&x| std::f64::consts::TAU * x as f64 / q as f64).collect());
        }
    }
    None
}

/// `d_S(pi, rho) = max_{s in S} |pi(s) - rho(s)|` over generators and inverses.
pub fn deformation_distance(pi: &Representation, rho: &Representation) -> Result<f64, RepError> {
    if pi.dim != rho.dim {
        return Err(RepError::DimensionMismatch { expected: pi.dim, found: rho.dim });
    }
    if pi.images.len() != rho.images.len() {
        return Err(RepError::GeneratorCount { expected: pi.images.len(), found: rho.images.len() });
    }
    let forward = pi.images.iter().zip(&rho.images);
    let backward = pi.inverses.iter().zip(&rho.inverses);
    Ok(forward.chain(backward).map(|(a, b)| linalg::spectral_norm(&(a - b))).fold(0.0, f64::max))
}

pub fn direct_sum(pi: &Representation, rho: &Representation) -> Result<Representation, RepError> {
    pi.same_presentation(rho)?;
    let images = pi.images.iter().zip(&rho.images).map(|(a, b)| linalg::block_diagonal(a, b)).collect();
    Representation::new(pi.presentation.clone(), images, format!("({})+({})", pi.label, rho.label))
}

/// `X -> pi(g) X rho(g)^{-1}` on `Hom(E_rho, E_pi)`, matrices vectorized row by row.
pub fn hom_rep(pi: &Representation, rho: &Representation) -> Result<Representation, RepError> {
    pi.same_presentation(rho)?;
    let images = pi
        .images
        .iter()
        .zip(&rho.inverses)
        .map(|(a, b_inv)| a.kronecker(&b_inv.transpose()))
        .collect();
    Representation::new(pi.presentation.clone(), images, format!("Hom({},{})", rho.label, pi.label))
}

/// Adjoint action `M -> phi(g) M phi(g)^{-1}` on `d x d` matrices, basis of
/// matrix units `E_11, E_12, ..., E_dd`.
pub fn adjoint_rep(phi: &Representation) -> Representation {
    hom_rep(phi, phi).expect("same presentation").with_label(format!("Ad({})", phi.label))
}

pub fn conjugation_deformation(pi: &Representation, t: &CMat) -> Result<Representation, RepError> {
    if t.nrows() != pi.dim || t.ncols() != pi.dim {
        return Err(RepError::DimensionMismatch { expected: pi.dim, found: t.nrows() });
    }
    let condition = linalg::condition_number(t);
    if !(condition <= CONDITION_CAP) {
        return Err(RepError::SingularConjugator(condition));
    }
    let t_inv = t.clone().try_inverse().ok_or(RepError::SingularConjugator(condition))?;
    let images = pi.images.iter().map(|m| t * m * &t_inv).collect();
    Representation::new(pi.presentation.clone(), images, format!("conj({})", pi.label))
}

/// Block upper-triangular twist `[[pi_g, alpha D_g], [0, pi'_g]]`.
///
/// `D` is validated as a derivation, `D(gh) = pi_g D(h) + D(g) pi'_h`, by
/// requiring the off-diagonal block of every relator image to vanish.
pub fn derivation_twist(
    pi: &Representation,
    pi_prime: &Representation,
    derivation: &[CMat],
    alpha: f64,
) -> Result<Representation, RepError> {
    pi.same_presentation(pi_prime)?;
    let k = pi.images.len();
    if derivation.len() != k {
        return Err(RepError::GeneratorCount { expected: k, found: derivation.len() });
    }
    for d in derivation {
        if d.nrows() != pi.dim || d.ncols() != pi_prime.dim {
            return Err(RepError::DimensionMismatch { expected: pi.dim, found: d.nrows() });
        }
    }
    let block = |scale: f64| -> Vec<CMat> {
        (0..k)
            .map(|g| {
                let mut m = linalg::block_diagonal(&pi.images[g], &pi_prime.images[g]);
                m.view_mut((0, pi.dim), (pi.dim, pi_prime.dim))
                    .copy_from(&(&derivation[g] * C64::new(scale, 0.0)));
                m
            })
            .collect()
    };
    let unit = block(1.0);
    for r in pi.presentation.relators() {
        let mut img = CMat::identity(pi.dim + pi_prime.dim, pi.dim + pi_prime.dim);
        for &l in r.letters() {
            let m = &unit[l.generator];
            img = if l.inverse { img * m.clone().try_inverse().expect("block triangular with invertible diagonal") } else { img * m };
        }
        let off = img.view((0, pi.dim), (pi.dim, pi_prime.dim)).into_owned();
        let residual = linalg::spectral_norm(&off);
        if !(residual <= RELATOR_TOL) {
            return Err(RepError::InvalidDerivation { relator: r.to_string(), residual });
        }
    }
    let images = if alpha == 1.0 { unit } else { block(alpha) };
    Representation::new(pi.presentation.clone(), images, format!("twist({},{};{alpha})", pi.label, pi_prime.label))
}

/// Indices of the `modes` diagonal entries of the first generator closest to 1.
fn flatten_order(pi: &Representation) -> Vec<usize> {
    let m = &pi.images[0];
    let mut idx: Vec<usize> = (0..pi.dim).collect();
    idx.sort_by(|&i, &j| {
        let di = (m[(i, i)] - C64::new(1.0, 0.0)).norm();
        let dj = (m[(j, j)] - C64::new(1.0, 0.0)).norm();
        di.total_cmp(&dj).then(i.cmp(&j))
    });
    idx
}

/// Moves the `modes` eigenvalues of a diagonal one-generator representation
/// closest to 1 along `lambda -> lambda^{1 - t}`; `t = 1` sets them to exactly 1.
pub fn partial_mode_flatten(pi: &Representation, modes: usize, t: f64) -> Result<Representation, RepError> {
    if pi.images.len() != 1 || !pi.is_diagonal() {
        return Err(RepError::KindMismatch("mode flattening needs one diagonal generator".into()));
    }
    if modes > pi.dim {
        return Err(RepError::ModeOutOfRange { modes, max: pi.dim });
    }
    let mut m = pi.images[0].clone();
    for &i in flatten_order(pi).iter().take(modes) {
        m[(i, i)] = if t == 1.0 { C64::new(1.0, 0.0) } else { m[(i, i)].powf(1.0 - t) };
    }
    Representation::new(pi.presentation.clone(), vec![m], format!("flatten({},{modes},{t})", pi.label))
}

/// Replaces the `modes` eigenvalues closest to 1 by 1, creating invariant vectors.
pub fn circle_mode_flatten(pi: &Representation, modes: usize) -> Result<Representation, RepError> {
    partial_mode_flatten(pi, modes, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DeformationKind {
    Conjugation,
    /// `pi` must be block diagonal with blocks of size `split` and `dim - split`.
    DerivationTwist { split: usize },
    /// Random phases on each diagonal entry; `scaling` also applies positive real factors.
    DiagonalPerturbation { scaling: bool },
    CircleModeFlatten { modes: usize },
    FreeArbitrary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationSpec {
    pub kind: DeformationKind,
    pub epsilon: f64,
    pub seed: u64,
}

/// Draws a representation `rho` with `d_S(pi, rho)` in `[0.99 eps, eps]`.
///
/// Each kind defines a one-parameter family through `pi` along a random
/// direction; the parameter is bracketed and bisected until the distance lands
/// in the window. Deterministic in `spec.seed`.
pub fn random_deformation(pi: &Representation, spec: &DeformationSpec) -> Result<Representation, RepError> {
    let eps = spec.epsilon;
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(RepError::KindMismatch(format!("epsilon must be finite and nonnegative, got {eps}")));
    }
    let presentation = pi.presentation.clone();
    let k = pi.images.len();
    match &spec.kind {
        DeformationKind::FreeArbitrary if !presentation.relators().is_empty() => {
            return Err(RepError::KindMismatch("free_arbitrary needs a relator-free presentation".into()));
        }
        DeformationKind::DiagonalPerturbation { .. } => {
            if !pi.is_diagonal() {
                return Err(RepError::KindMismatch("diagonal_perturbation needs diagonal generator images".into()));
            }
            let unbalanced = presentation.relators().iter().any(|r| r.exponent_sums(k).iter().any(|&e| e != 0));
            if unbalanced {
                return Err(RepError::KindMismatch(
                    "diagonal_perturbation needs relators with zero exponent sums".into(),
                ));
            }
        }
        DeformationKind::CircleModeFlatten { .. } if k != 1 || !pi.is_diagonal() => {
            return Err(RepError::KindMismatch("mode flattening needs one diagonal generator".into()));
        }
        DeformationKind::CircleModeFlatten { modes } if *modes > pi.dim => {
            return Err(RepError::ModeOutOfRange { modes: *modes, max: pi.dim });
        }
        DeformationKind::DerivationTwist { split } if *split == 0 || *split >= pi.dim => {
            return Err(RepError::KindMismatch(format!("split {split} must lie strictly between 0 and {}", pi.dim)));
        }
        _ => {}
    }
    if eps == 0.0 {
        return Ok(pi.clone().with_label(format!("{}~0", pi.label)));
    }
    let mut rng = rng_from_seed(spec.seed);
    let (lo, hi) = (0.99 * eps, eps);
    let label = format!("{}~{:?}({eps},{})", pi.label, spec.kind, spec.seed);

    // For the derivation twist the direction is drawn once from the cocycle space.
    let twist_parts = match &spec.kind {
        DeformationKind::DerivationTwist { split } => Some(split_blocks(pi, *split)?),
        _ => None,
    };

    for _ in 0..RESCALE_ATTEMPTS {
        let family: Box<dyn Fn(f64) -> Result<Representation, RepError>> = match &spec.kind {
            DeformationKind::Conjugation => {
                let x = random::unit_direction(&mut rng, pi.dim, pi.dim);
                let pi = pi.clone();
                Box::new(move |s| conjugation_deformation(&pi, &(CMat::identity(pi.dim, pi.dim) + &x * C64::new(s, 0.0))))
            }
            DeformationKind::FreeArbitrary => {
                let dirs: Vec<CMat> = (0..k).map(|_| random::unit_direction(&mut rng, pi.dim, pi.dim)).collect();
                let pi = pi.clone();
                Box::new(move |s| {
                    let images = pi.images.iter().zip(&dirs).map(|(m, x)| m + x * C64::new(s, 0.0)).collect();
                    Representation::new(pi.presentation.clone(), images, "free")
                })
            }
            DeformationKind::DiagonalPerturbation { scaling } => {
                let phases: Vec<Vec<f64>> =
                    (0..k).map(|_| (0..pi.dim).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
                let logs: Vec<Vec<f64>> = (0..k)
                    .map(|_| (0..pi.dim).map(|_| if *scaling { rng.random_range(-1.0..=1.0) } else { 0.0 }).collect())
                    .collect();
                let pi = pi.clone();
                Box::new(move |s| {
                    let diagonals: Vec<Vec<C64>> = (0..k)
                        .map(|g| {
                            (0..pi.dim)
                                .map(|i| pi.images[g][(i, i)] * C64::from_polar((s * logs[g][i]).exp(), s * phases[g][i]))
                                .collect()
                        })
                        .collect();
                    Representation::diagonal(pi.presentation.clone(), &diagonals, "diag")
                })
            }
            DeformationKind::CircleModeFlatten { modes } => {
                let (pi, modes) = (pi.clone(), *modes);
                Box::new(move |t| {
                    if t > 1.0 {
                        return Err(RepError::ModeOutOfRange { modes, max: pi.dim });
                    }
                    partial_mode_flatten(&pi, modes, t)
                })
            }
            DeformationKind::DerivationTwist { .. } => {
                let (p1, p2) = twist_parts.clone().expect("split computed above");
                let d = random_derivation(&p1, &p2, &mut rng)?;
                Box::new(move |alpha| derivation_twist(&p1, &p2, &d, alpha))
            }
        };
        let cap = matches!(spec.kind, DeformationKind::CircleModeFlatten { .. }).then_some(1.0);
        if let Some(rho) = land(pi, family.as_ref(), lo, hi, eps, cap) {
            return Ok(rho.with_label(label));
        }
        if cap.is_some() {
            break;
        }
    }
    Err(RepError::Rescale { lo, hi, attempts: RESCALE_ATTEMPTS })
}

/// Brackets and bisects the family parameter until `d_S` lands in `[lo, hi]`.
fn land(
    pi: &Representation,
    family: &dyn Fn(f64) -> Result<Representation, RepError>,
    lo: f64,
    hi: f64,
    scale: f64,
    cap: Option<f64>,
) -> Option<Representation> {
    let eval = |s: f64| -> (f64, Option<Representation>) {
        match family(s) {
            Ok(rho) => match deformation_distance(pi, &rho) {
                Ok(d) => (d, Some(rho)),
                Err(_) => (f64::INFINITY, None),
            },
            Err(_) => (f64::INFINITY, None),
        }
    };
    if let Some(c) = cap {
        let (d, rho) = eval(c);
        if d <= hi && d >= lo {
            return rho;
        }
        if d < lo {
            return None;
        }
    }
    let mut s_lo = 0.0;
    let mut s_hi = cap.unwrap_or(scale);
    let mut found_hi = cap.is_some();
    for _ in 0..80 {
        if found_hi {
            break;
        }
        let (d, rho) = eval(s_hi);
        if d >= lo && d <= hi {
            return rho;
        }
        if d > hi {
            found_hi = true;
        } else {
            s_lo = s_hi;
            s_hi *= 2.0;
        }
    }
    if !found_hi {
        return None;
    }
    for _ in 0..RESCALE_ATTEMPTS {
        let mid = 0.5 * (s_lo + s_hi);
        let (d, rho) = eval(mid);
        if d >= lo && d <= hi {
            return rho;
        }
        if d > hi {
            s_hi = mid;
        } else {
            s_lo = mid;
        }
    }
    None
}

fn split_blocks(pi: &Representation, split: usize) -> Result<(Representation, Representation), RepError> {
    let d = pi.dim;
    let rest = d - split;
    let mut tops = Vec::new();
    let mut bottoms = Vec::new();
    for m in &pi.images {
        let off = linalg::max_abs_entry(&m.view((0, split), (split, rest)).into_owned())
            .max(linalg::max_abs_entry(&m.view((split, 0), (rest, split)).into_owned()));
        if off > 1e-15 {
            return Err(RepError::KindMismatch(format!("representation is not block diagonal at split {split}")));
        }
        tops.push(m.view((0, 0), (split, split)).into_owned());
        bottoms.push(m.view((split, split), (rest, rest)).into_owned());
    }
    Ok((
        Representation::new(pi.presentation.clone(), tops, format!("{}[..{split}]", pi.label))?,
        Representation::new(pi.presentation.clone(), bottoms, format!("{}[{split}..]", pi.label))?,
    ))
}

/// Random derivation `D` for the bimodule `(pi, pi')`, normalized so that
/// `max_g |D_g| = 1`.
///
/// `D'(g) = D(g) pi'(g)^{-1}` is a 1-cocycle for `X -> pi(g) X pi'(g)^{-1}`,
/// so `D'` is drawn from the kernel of the degree-1 codifferential of the
/// presentation complex with those coefficients.
pub fn random_derivation<R: Rng + ?Sized>(
    pi: &Representation,
    pi_prime: &Representation,
    rng: &mut R,
) -> Result<Vec<CMat>, RepError> {
    let hom = hom_rep(pi, pi_prime)?;
    let x = EquivariantComplex::presentation_complex(&pi.presentation);
    let d1 = crate::cochain::codifferential(&x, &hom, 1).expect("degree 1 exists").matrix;
    let kernel = Decomposition::new(&d1, RankTolerance::Relative).kernel();
    if kernel.ncols() == 0 {
        return Err(RepError::KindMismatch("no nonzero derivation exists for these coefficients".into()));
    }
    let coeffs = random::gaussian_matrix(rng, kernel.ncols(), 1);
    let v = kernel * coeffs;
    let (d, dp) = (pi.dim, pi_prime.dim);
    let block = d * dp;
    let mut out: Vec<CMat> = (0..pi.images.len())
        .map(|g| {
            let cocycle = CMat::from_fn(d, dp, |i, j| v[(g * block + i * dp + j, 0)]);
            cocycle * &pi_prime.images[g]
        })
        .collect();
    let scale = out.iter().map(linalg::spectral_norm).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(RepError::KindMismatch("sampled derivation vanishes".into()));
    }
    for m in &mut out {
        *m /= C64::new(scale, 0.0);
    }
    Ok(out)
}
