//! Twisted cochain spaces: codifferential matrices, Laplacians and mixed
//! p-norms. A degree-`n` cochain is stored as `cells[n]` consecutive blocks of
//! length `dim E`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::EquivariantComplex;
use crate::linalg::{self, CMat, C64};
use crate::rep::{self, Representation};

/// Generator images are treated as unitary when `|U*U - I| <= UNITARY_TOL`.
pub const UNITARY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CochainError {
    #[error("degree {degree} outside 0..={max}")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("complex has {complex} generators but the representation has {rep}")]
    GeneratorMismatch { complex: usize, rep: usize },
    #[error("cochain has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
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
pub struct TwistedCodifferential {
    pub degree: usize,
    pub matrix: CMat,
    pub complex: String,
    pub representation: String,
}

fn check(x: &EquivariantComplex, pi: &Representation, n: usize) -> Result<(), CochainError> {
    if n > x.max_degree() {
        return Err(CochainError::DegreeOutOfRange { degree: n, max: x.max_degree() });
    }
    let rep_gens = pi.presentation().generator_count();
    if x.generator_count() > rep_gens {
        return Err(CochainError::GeneratorMismatch { complex: x.generator_count(), rep: rep_gens });
    }
    Ok(())
}

/// `d^n`, mapping degree-`n` cochains to degree-`n+1` cochains.
pub fn codifferential(x: &EquivariantComplex, pi: &Representation, n: usize) -> Result<TwistedCodifferential, CochainError> {
    check(x, pi, n)?;
    let d = pi.dim();
    let matrix = if n == x.max_degree() {
        CMat::zeros(0, d * x.cell_count(n))
    } else {
        let b = x.boundary(n + 1);
        let mut m = CMat::zeros(d * b.rows(), d * b.cols());
        for (row, col, e) in b.nonzero() {
            m.view_mut((row * d, col * d), (d, d)).copy_from(&pi.evaluate_ring(e));
        }
        m
    };
    Ok(TwistedCodifferential {
        degree: n,
        matrix,
        complex: x.name().to_string(),
        representation: pi.label().to_string(),
    })
}

#[derive(Clone, Debug)]
pub struct Laplacian {
    pub degree: usize,
    pub matrix: CMat,
    /// Set when `pi` is not unitary; the vanishing criterion does not apply then.
    pub non_unitary: bool,
}

/// `Delta^n = d^{n-1} (d^{n-1})* + (d^n)* d^n`.
pub fn laplacian(x: &EquivariantComplex, pi: &Representation, n: usize) -> Result<Laplacian, CochainError> {
    let up = codifferential(x, pi, n)?.matrix;
    let mut matrix = up.adjoint() * &up;
    if n > 0 {
        let down = codifferential(x, pi, n - 1)?.matrix;
        matrix += &down * down.adjoint();
    }
    Ok(Laplacian { degree: n, matrix, non_unitary: !pi.is_unitary(UNITARY_TOL) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CochainNorm {
    L1,
    L2,
    Inf,
}

impl CochainNorm {
    pub fn combine(self, parts: impl Iterator<Item = f64>) -> f64 {
        match self {
            CochainNorm::L1 => parts.sum(),
            CochainNorm::L2 => parts.map(|x| x * x).sum::<f64>().sqrt(),
            CochainNorm::Inf => parts.fold(0.0, f64::max),
        }
    }
}

/// Mixed norm: Euclidean inside each block of length `block`, `p` across blocks.
pub fn cochain_norm(f: &[C64], block: usize, cells: usize, p: CochainNorm) -> Result<f64, CochainError> {
    if f.len() != block * cells {
        return Err(CochainError::LengthMismatch { expected: block * cells, found: f.len() });
    }
    if block == 0 {
        return Ok(0.0);
    }
    Ok(p.combine(f.chunks(block).map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())))
}

/// Operator norm of `m` between mixed-norm spaces with the given block sizes.
///
/// Exact for `L2`. For `L1` and `Inf` the value is the induced norm of the
/// matrix of block spectral norms, an upper bound that is exact when there is
/// one block.
pub fn operator_norm(m: &CMat, p: CochainNorm, row_block: usize, col_block: usize) -> f64 {
    if p == CochainNorm::L2 || m.is_empty() {
        return linalg::spectral_norm(m);
    }
    let (rb, cb) = (m.nrows() / row_block.max(1), m.ncols() / col_block.max(1));
    let blocks = nalgebra::DMatrix::<f64>::from_fn(rb, cb, |i, j| {
        linalg::spectral_norm(&m.view((i * row_block, j * col_block), (row_block, col_block)).into_owned())
    });
    match p {
        CochainNorm::L1 => (0..cb).map(|j| blocks.column(j).sum()).fold(0.0, f64::max),
        _ => (0..rb).map(|i| blocks.row(i).sum()).fold(0.0, f64::max),
    }
}

/// Plain text form: `rows cols`, then one `re im` pair per entry in row-major order.
pub fn matrix_to_text(m: &CMat) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| rep::format_complex(m[(i, j)])).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

pub fn matrix_from_text(text: &str) -> Result<CMat, CochainError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(CochainError::Parse { line: 1, message: "empty input".into() })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| CochainError::Parse { line: 1, message: format!("bad header {header:?}") }))
        .collect::<Result<_, _>>()?;
    let [rows, cols] = dims[..] else {
        return Err(CochainError::Parse { line: 1, message: format!("bad header {header:?}") });
    };
    let mut entries = Vec::with_capacity(rows * cols);
    for (idx, line) in lines {
        for tok in line.split_whitespace() {
            let z = rep::parse_complex(tok)
                .ok_or_else(|| CochainError::Parse { line: idx + 1, message: format!("bad entry {tok:?}") })?;
            entries.push(z);
        }
    }
    if entries.len() != rows * cols {
        return Err(CochainError::Parse {
            line: text.lines().count(),
            message: format!("{} entries, expected {}", entries.len(), rows * cols),
        });
    }
    Ok(CMat::from_row_slice(rows, cols, &entries))
}

pub fn matrix_from_file(path: &Path) -> Result<CMat, CochainError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CochainError::Io { path: path.display().to_string(), source })?;
    matrix_from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::GroupPresentation;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pres(name: &str) -> EquivariantComplex {
        EquivariantComplex::presentation_complex(&GroupPresentation::preset(name).unwrap())
    }

    #[test]
    fn codifferential_examples() {
        let z = GroupPresentation::preset("Z").unwrap();
        let x = pres("Z");
        let minus = Representation::character(z.clone(), &[c(-1.0, 0.0)]).unwrap();
        assert_eq!(codifferential(&x, &minus, 0).unwrap().matrix, CMat::from_element(1, 1, c(-2.0, 0.0)));
        let triv = Representation::trivial(z, 1);
        assert_eq!(codifferential(&x, &triv, 0).unwrap().matrix, CMat::zeros(1, 1));
        let top = codifferential(&x, &triv, 1).unwrap().matrix;
        assert_eq!(top.shape(), (0, 1));
        assert!(matches!(codifferential(&x, &triv, 2), Err(CochainError::DegreeOutOfRange { .. })));

        let z3 = GroupPresentation::preset("Z3").unwrap();
        let w = crate::random::unit_phase(2.0 * std::f64::consts::PI / 3.0);
        let chi = Representation::character(z3, &[w]).unwrap();
        let d1 = codifferential(&pres("Z3"), &chi, 1).unwrap().matrix;
        assert!(d1[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn presentation_degree_zero_is_coboundary() {
        let z2 = GroupPresentation::preset("Z2").unwrap();
        let pi = Representation::random_unitary(z2, 2, 4).unwrap();
        let d0 = codifferential(&pres("Z2"), &pi, 0).unwrap().matrix;
        for g in 0..2 {
            let block = d0.view((2 * g, 0), (2, 2)).into_owned();
            assert!((block - (pi.image(g) - CMat::identity(2, 2))).norm() < 1e-14);
        }
    }

    #[test]
    fn laplacian_examples() {
        let z = GroupPresentation::preset("Z").unwrap();
        let minus = Representation::character(z.clone(), &[c(-1.0, 0.0)]).unwrap();
        let l = laplacian(&pres("Z"), &minus, 0).unwrap();
        assert_eq!(l.matrix, CMat::from_element(1, 1, c(4.0, 0.0)));
        assert!(!l.non_unitary);
        let triv = Representation::trivial(GroupPresentation::preset("Z2").unwrap(), 1);
        assert_eq!(laplacian(&pres("Z2"), &triv, 1).unwrap().matrix, CMat::zeros(2, 2));
        let scaled = Representation::character(z, &[c(2.0, 0.0)]).unwrap();
        assert!(laplacian(&pres("Z"), &scaled, 0).unwrap().non_unitary);
    }

    #[test]
    fn norm_examples() {
        let f = [c(3.0, 0.0), c(4.0, 0.0)];
        for p in [CochainNorm::L1, CochainNorm::L2, CochainNorm::Inf] {
            assert_eq!(cochain_norm(&f, 2, 1, p).unwrap(), 5.0);
        }
        assert_eq!(cochain_norm(&f, 1, 2, CochainNorm::L1).unwrap(), 7.0);
        assert_eq!(cochain_norm(&f, 1, 2, CochainNorm::Inf).unwrap(), 4.0);
        assert!(cochain_norm(&f, 1, 3, CochainNorm::L2).is_err());
    }

    #[test]
    fn operator_norm_examples() {
        let id = CMat::identity(3, 3);
        for p in [CochainNorm::L1, CochainNorm::L2, CochainNorm::Inf] {
            assert!((operator_norm(&id, p, 3, 3) - 1.0).abs() < 1e-15);
        }
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0, 0.0), c(1.0, 0.0)]));
        assert!((operator_norm(&d, CochainNorm::L2, 1, 1) - 3.0).abs() < 1e-15);
        let s = CMat::from_element(1, 1, c(-2.0, 0.0));
        assert_eq!(operator_norm(&s, CochainNorm::L1, 1, 1), 2.0);
    }

    #[test]
    fn operator_norm_bounds_ratio() {
        let mut rng = crate::random::rng_from_seed(12);
        let m = crate::random::gaussian_matrix(&mut rng, 6, 4);
        let f = crate::random::gaussian_matrix(&mut rng, 4, 1);
        let g = &m * &f;
        for p in [CochainNorm::L1, CochainNorm::Inf] {
            let bound = operator_norm(&m, p, 2, 2);
            let ratio = cochain_norm(g.as_slice(), 2, 3, p).unwrap() / cochain_norm(f.as_slice(), 2, 2, p).unwrap();
            assert!(ratio <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn matrix_text_roundtrip() {
        let mut rng = crate::random::rng_from_seed(5);
        let m = crate::random::gaussian_matrix(&mut rng, 3, 2);
        assert_eq!(matrix_from_text(&matrix_to_text(&m)).unwrap(), m);
        let empty = CMat::zeros(0, 4);
        assert_eq!(matrix_from_text(&matrix_to_text(&empty)).unwrap().shape(), (0, 4));
        assert!(matrix_from_text("2 2\n1 2 3\n").is_err());
    }
}
