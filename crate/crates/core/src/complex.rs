//! Fundamental-domain data of a free cocompact cell complex: orbit-cell
//! counts per degree and boundary matrices over the integral group ring.
//!
//! Row `i`, column `j` of the degree-`k` boundary is the group-ring element
//! describing how the `k`-cell `i` is attached to translates of the
//! `(k-1)`-cell `j`. Evaluating those entries under a representation gives
//! the twisted codifferential `d^{k-1}`.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::presentation::{GroupPresentation, GroupRingElement, Word};

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("degree {degree}: boundary entry ({row}, {col}) outside shape {rows}x{cols}")]
    DimensionMismatch { degree: usize, row: usize, col: usize, rows: usize, cols: usize },
    #[error("degree {0} has no cells")]
    EmptyDegree(usize),
    #[error("boundary words use generator {index} but the complex declares {count} generators")]
    GeneratorOutOfRange { index: usize, count: usize },
    #[error("simplex {cell} in degree {degree} has {faces} faces, expected {expected}")]
    FaceCount { degree: usize, cell: usize, faces: usize, expected: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Dense matrix of group-ring elements, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<GroupRingElement>,
}

impl BoundaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![GroupRingElement::zero(); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &GroupRingElement {
        &self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: GroupRingElement) {
        self.entries[row * self.cols + col] = value;
    }

    fn add_to(&mut self, row: usize, col: usize, value: &GroupRingElement) {
        let idx = row * self.cols + col;
        self.entries[idx] = self.entries[idx].add(value);
    }

    /// Nonzero entries in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, &GroupRingElement)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .map(move |(idx, e)| (idx / self.cols, idx % self.cols, e))
    }

    /// Max over columns of the number of boundary terms landing on that column.
    pub fn incidence(&self) -> usize {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.get(r, c).term_count()).sum::<usize>())
            .max()
            .unwrap_or(0)
    }
}

/// One `k`-simplex of a fundamental domain given by its ordered faces: face
/// `i` is `carrier_i . tau_i` with `tau_i` an orbit representative of degree `k-1`.
#[derive(Clone, Debug)]
pub struct SimplicialCell {
    pub faces: Vec<(usize, Word)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivariantComplex {
    name: String,
    generator_count: usize,
    cells: Vec<usize>,
    /// Entry `k - 1` is the degree-`k` boundary, shape `cells[k] x cells[k-1]`.
    boundaries: Vec<BoundaryMatrix>,
    incidence_bounds: Vec<usize>,
}

impl EquivariantComplex {
    pub fn new(
        name: impl Into<String>,
        generator_count: usize,
        cells: Vec<usize>,
        boundaries: Vec<BoundaryMatrix>,
    ) -> Result<Self, ComplexError> {
        if let Some(degree) = cells.iter().position(|&c| c == 0) {
            return Err(ComplexError::EmptyDegree(degree));
        }
        if cells.is_empty() {
            return Err(ComplexError::EmptyDegree(0));
        }
        if boundaries.len() + 1 != cells.len() {
            return Err(ComplexError::DimensionMismatch {
                degree: boundaries.len(),
                row: 0,
                col: 0,
                rows: cells.len(),
                cols: boundaries.len(),
            });
        }
        for (i, b) in boundaries.iter().enumerate() {
            let k = i + 1;
            if b.rows != cells[k] || b.cols != cells[k - 1] {
                return Err(ComplexError::DimensionMismatch {
                    degree: k,
                    row: b.rows,
                    col: b.cols,
                    rows: cells[k],
                    cols: cells[k - 1],
                });
            }
            for (_, _, e) in b.nonzero() {
                if let Some(g) = e.max_generator() {
                    if g >= generator_count {
                        return Err(ComplexError::GeneratorOutOfRange { index: g, count: generator_count });
                    }
                }
            }
        }
        let incidence_bounds = boundaries.iter().map(BoundaryMatrix::incidence).collect();
        Ok(Self { name: name.into(), generator_count, cells, boundaries, incidence_bounds })
    }

    /// The presentation 2-complex: one vertex, an edge per generator and a
    /// 2-cell per relator attached along its Fox derivatives.
    pub fn presentation_complex(p: &GroupPresentation) -> Self {
        let k = p.generator_count();
        let mut b1 = BoundaryMatrix::zeros(k, 1);
        for g in 0..k {
            b1.set(g, 0, GroupRingElement::from_terms([(Word::generator(g), 1), (Word::empty(), -1)]));
        }
        let mut cells = vec![1, k];
        let mut boundaries = vec![b1];
        if !p.relators().is_empty() {
            let mut b2 = BoundaryMatrix::zeros(p.relators().len(), k);
            for (i, r) in p.relators().iter().enumerate() {
                for g in 0..k {
                    b2.set(i, g, crate::presentation::fox_derivative(r, g));
                }
            }
            cells.push(p.relators().len());
            boundaries.push(b2);
        }
        Self::new(p.name(), k, cells, boundaries).expect("presentation complex is well formed")
    }

    /// Builds boundaries from simplices listed by degree (`simplices[k - 1]`
    /// holds the `k`-simplices); face `i` enters with sign `(-1)^i`.
    pub fn from_simplicial(
        name: impl Into<String>,
        generator_count: usize,
        vertex_count: usize,
        simplices: &[Vec<SimplicialCell>],
    ) -> Result<Self, ComplexError> {
        let mut cells = vec![vertex_count];
        cells.extend(simplices.iter().map(Vec::len));
        let mut boundaries = Vec::with_capacity(simplices.len());
        for (i, layer) in simplices.iter().enumerate() {
            let k = i + 1;
            let mut b = BoundaryMatrix::zeros(cells[k], cells[k - 1]);
            for (row, cell) in layer.iter().enumerate() {
                if cell.faces.len() != k + 1 {
                    return Err(ComplexError::FaceCount { degree: k, cell: row, faces: cell.faces.len(), expected: k + 1 });
                }
                for (face_idx, (tau, carrier)) in cell.faces.iter().enumerate() {
                    if *tau >= cells[k - 1] {
                        return Err(ComplexError::DimensionMismatch {
                            degree: k,
                            row,
                            col: *tau,
                            rows: cells[k],
                            cols: cells[k - 1],
                        });
                    }
                    let sign = if face_idx % 2 == 0 { 1 } else { -1 };
                    b.add_to(row, *tau, &GroupRingElement::from_word(carrier.clone(), sign));
                }
            }
            boundaries.push(b);
        }
        Self::new(name, generator_count, cells, boundaries)
    }

    /// The standard triangulation of the plane with `Z^2` acting by
    /// translations: one vertex, edges along `a`, `b`, `ab`, and two triangles.
    pub fn torus_triangulation() -> Self {
        let a = Word::generator(0);
        let b = Word::generator(1);
        let e = Word::empty();
        let edges = vec![
            SimplicialCell { faces: vec![(0, a.clone()), (0, e.clone())] },
            SimplicialCell { faces: vec![(0, b.clone()), (0, e.clone())] },
            SimplicialCell { faces: vec![(0, a.mul(&b)), (0, e.clone())] },
        ];
        // (0, a, ab) has faces a.e_b, e_ab, e_a; (0, b, ab) has b.e_a, e_ab, e_b.
        let triangles = vec![
            SimplicialCell { faces: vec![(1, a.clone()), (2, e.clone()), (0, e.clone())] },
            SimplicialCell { faces: vec![(0, b.clone()), (2, e.clone()), (1, e.clone())] },
        ];
        Self::from_simplicial("T2", 2, 1, &[edges, triangles]).expect("torus fixture")
    }

    /// The bundled complexes with their presentations: the presentation
    /// complexes of every preset group and the triangulated torus over `Z2`.
    pub fn fixtures() -> Vec<(Arc<GroupPresentation>, EquivariantComplex)> {
        let mut out: Vec<_> = GroupPresentation::preset_names()
            .iter()
            .map(|name| {
                let p = GroupPresentation::preset(name).expect("preset");
                let x = Self::presentation_complex(&p);
                (p, x)
            })
            .collect();
        out.push((GroupPresentation::preset("Z2").expect("preset"), Self::torus_triangulation()));
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generator_count(&self) -> usize {
        self.generator_count
    }

    pub fn max_degree(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn cell_count(&self, degree: usize) -> usize {
        self.cells[degree]
    }

    /// Boundary of degree `k` (`1 <= k <= max_degree`).
    pub fn boundary(&self, k: usize) -> &BoundaryMatrix {
        &self.boundaries[k - 1]
    }

    pub fn incidence_bound(&self, k: usize) -> usize {
        self.incidence_bounds[k - 1]
    }

    pub fn incidence_bounds(&self) -> &[usize] {
        &self.incidence_bounds
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.cells
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, ComplexError> {
        let mut name = name.into();
        let mut degrees: Option<usize> = None;
        let mut gens: Option<usize> = None;
        let mut cells: Vec<Option<usize>> = Vec::new();
        let mut entries: Vec<(usize, usize, usize, usize, GroupRingElement)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ComplexError::Parse { line: line_no, message };
            let (key, value) =
                line.split_once(':').ok_or_else(|| err(format!("expected `key: value`, got {line:?}")))?;
            let mut key_parts = key.split_whitespace();
            let head = key_parts.next().unwrap_or("");
            let nums = key_parts
                .map(|s| s.parse::<usize>().map_err(|_| err(format!("bad index {s:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let parse_count =
                |v: &str| v.trim().parse::<usize>().map_err(|_| err(format!("bad count {:?}", v.trim())));
            match (head, nums.as_slice()) {
                ("degrees", []) => {
                    let n = parse_count(value)?;
                    degrees = Some(n);
                    cells = vec![None; n + 1];
                }
                ("gens", []) => gens = Some(parse_count(value)?),
                ("name", []) => name = value.trim().to_string(),
                ("cells", [k]) => {
                    let slot = cells.get_mut(*k).ok_or_else(|| err(format!("degree {k} above `degrees`")))?;
                    if slot.is_some() {
                        return Err(err(format!("duplicate cell count for degree {k}")));
                    }
                    *slot = Some(parse_count(value)?);
                }
                ("boundary", [k, i, j]) => {
                    if degrees.is_none() {
                        return Err(err("`boundary` before `degrees`".into()));
                    }
                    let e = GroupRingElement::parse(value).map_err(err)?;
                    entries.push((line_no, *k, *i, *j, e));
                }
                _ => return Err(err(format!("unknown key {key:?}"))),
            }
        }
        let n = degrees.ok_or(ComplexError::Parse { line: 1, message: "missing `degrees` line".into() })?;
        let cells: Vec<usize> = cells
            .into_iter()
            .enumerate()
            .map(|(k, c)| c.ok_or(ComplexError::Parse { line: 0, message: format!("missing `cells {k}`") }))
            .collect::<Result<_, _>>()?;
        let mut boundaries: Vec<BoundaryMatrix> =
            (1..=n).map(|k| BoundaryMatrix::zeros(cells[k], cells[k - 1])).collect();
        let mut max_gen = None;
        for (line, k, i, j, e) in entries {
            if k == 0 || k > n {
                return Err(ComplexError::Parse { line, message: format!("boundary degree {k} outside 1..={n}") });
            }
            if i >= cells[k] || j >= cells[k - 1] {
                return Err(ComplexError::DimensionMismatch {
                    degree: k,
                    row: i,
                    col: j,
                    rows: cells[k],
                    cols: cells[k - 1],
                });
            }
            max_gen = max_gen.max(e.max_generator());
            boundaries[k - 1].add_to(i, j, &e);
        }
        let generator_count = gens.unwrap_or_else(|| max_gen.map_or(1, |g| g + 1));
        Self::new(name, generator_count, cells, boundaries)
    }

    pub fn from_file(path: &Path) -> Result<Self, ComplexError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ComplexError::Io { path: path.display().to_string(), source })?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::parse(name, &text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "degrees: {}", self.max_degree()).unwrap();
        writeln!(out, "gens: {}", self.generator_count).unwrap();
        writeln!(out, "name: {}", self.name).unwrap();
        for (k, c) in self.cells.iter().enumerate() {
            writeln!(out, "cells {k}: {c}").unwrap();
        }
        for (i, b) in self.boundaries.iter().enumerate() {
            for (r, c, e) in b.nonzero() {
                writeln!(out, "boundary {} {r} {c}: {e}", i + 1).unwrap();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(s: &str) -> GroupRingElement {
        GroupRingElement::parse(s).unwrap()
    }

    fn preset(name: &str) -> EquivariantComplex {
        EquivariantComplex::presentation_complex(&GroupPresentation::preset(name).unwrap())
    }

    #[test]
    fn circle_complex() {
        let x = preset("Z");
        assert_eq!(x.cells(), &[1, 1]);
        assert_eq!(x.max_degree(), 1);
        assert_eq!(x.boundary(1).get(0, 0), &ring("1*a + -1*1"));
        assert_eq!(x.euler_characteristic(), 0);
    }

    #[test]
    fn torus_complex() {
        let x = preset("Z2");
        assert_eq!(x.cells(), &[1, 2, 1]);
        assert_eq!(x.boundary(2).get(0, 0), &ring("1*1 + -1*abA"));
        assert_eq!(x.boundary(2).get(0, 1), &ring("1*a + -1*abAB"));
        assert_eq!(x.euler_characteristic(), 0);
        assert_eq!(x.incidence_bounds(), &[4, 2]);
    }

    #[test]
    fn order_three_complex() {
        let x = preset("Z3");
        assert_eq!(x.cells(), &[1, 1, 1]);
        assert_eq!(x.boundary(2).get(0, 0), &ring("1*1 + 1*a + 1*aa"));
        assert_eq!(x.euler_characteristic(), 1);
        assert_eq!(x.incidence_bound(2), 3);
    }

    #[test]
    fn torus_file_matches_presentation() {
        let text = "\
# torus as a presentation complex
degrees: 2
gens: 2
cells 0: 1
cells 1: 2
cells 2: 1
boundary 1 0 0: 1*a + -1*1
boundary 1 1 0: -1*1 + 1*b
boundary 2 0 0: 1*1 + -1*abA
boundary 2 0 1: 1*a + -1*abAB
";
        let x = EquivariantComplex::parse("Z2", text).unwrap();
        assert_eq!(x, preset("Z2"));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let text = "degrees: 1\ncells 0: 1\ncells 1: 1\nboundary 1 0 1: 1*a\n";
        assert!(matches!(
            EquivariantComplex::parse("x", text),
            Err(ComplexError::DimensionMismatch { degree: 1, col: 1, .. })
        ));
        let text = "degrees: 1\ncells 0: 1\ncells 1: 0\n";
        assert!(matches!(EquivariantComplex::parse("x", text), Err(ComplexError::EmptyDegree(1))));
        let text = "degrees: 1\ncells 0: 1\ncells 1: 1\nboundary 1 0 0: 1*a\nboundary 1 0 0 oops\n";
        assert!(matches!(EquivariantComplex::parse("x", text), Err(ComplexError::Parse { line: 5, .. })));
    }

    #[test]
    fn empty_top_boundary_accepted() {
        let text = "degrees: 2\ngens: 1\ncells 0: 1\ncells 1: 1\ncells 2: 2\nboundary 1 0 0: 1*a + -1*1\n";
        let x = EquivariantComplex::parse("x", text).unwrap();
        assert!(x.boundary(2).nonzero().next().is_none());
        assert_eq!(x.incidence_bound(2), 0);
    }

    #[test]
    fn text_roundtrip_is_exact() {
        for x in [preset("Z"), preset("F2"), preset("Z2"), preset("Z3"), EquivariantComplex::torus_triangulation()] {
            let text = x.to_text();
            let back = EquivariantComplex::parse("ignored", &text).unwrap();
            assert_eq!(back, x);
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn simplicial_torus() {
        let x = EquivariantComplex::torus_triangulation();
        assert_eq!(x.cells(), &[1, 3, 2]);
        assert_eq!(x.euler_characteristic(), 0);
        assert_eq!(x.boundary(2).get(0, 1), &ring("1*a"));
        assert_eq!(x.boundary(2).get(0, 2), &ring("-1*1"));
        assert_eq!(x.boundary(2).get(1, 0), &ring("1*b"));
    }

    #[test]
    fn simplicial_face_count_checked() {
        let bad = vec![vec![SimplicialCell { faces: vec![(0, Word::empty())] }]];
        assert!(matches!(
            EquivariantComplex::from_simplicial("x", 1, 1, &bad),
            Err(ComplexError::FaceCount { .. })
        ));
    }
}
