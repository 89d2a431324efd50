use std::f64::consts::TAU;
use std::path::Path;
use std::sync::Arc;

use cohomolab_core::linalg::{CMat, C64};
use cohomolab_core::random::unit_phase;
use cohomolab_core::rep::RepError;
use cohomolab_core::{EquivariantComplex, GroupPresentation, Representation};

use crate::cli::Settings;
use crate::LabError;

pub struct Setup {
    pub presentation: Arc<GroupPresentation>,
    pub complex: EquivariantComplex,
    pub rep: Representation,
}

fn missing(path: &Path) -> LabError {
    LabError::Input(format!("{}: no such file", path.display()))
}

pub fn presentation(preset: Option<&str>) -> Result<(Arc<GroupPresentation>, Option<EquivariantComplex>), LabError> {
    let name = preset.unwrap_or("Z");
    if name == "T2" {
        return Ok((GroupPresentation::preset("Z2").expect("preset"), Some(EquivariantComplex::torus_triangulation())));
    }
    if let Some(p) = GroupPresentation::preset(name) {
        return Ok((p, None));
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(LabError::Input(format!(
            "{name}: not a preset ({}, T2) and no such file",
            GroupPresentation::preset_names().join(", ")
        )));
    }
    let p = GroupPresentation::from_file(path).map_err(|e| LabError::Input(e.to_string()))?;
    Ok((Arc::new(p), None))
}

fn ratio(s: &str) -> Result<f64, LabError> {
    let bad = || LabError::Input(format!("expected p/q, got {s:?}"));
    let (p, q) = s.split_once('/').ok_or_else(bad)?;
    let p: f64 = p.trim().parse().map_err(|_| bad())?;
    let q: f64 = q.trim().parse().map_err(|_| bad())?;
    if q == 0.0 {
        return Err(bad());
    }
    Ok(p / q)
}

fn count(kind: &str, s: &str) -> Result<usize, LabError> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(LabError::Input(format!("{kind}: expected a positive integer, got {s:?}"))),
    }
}

fn rep_error(e: RepError) -> LabError {
    match e {
        RepError::Parse { .. } | RepError::Io { .. } | RepError::CircleTooSmall(_) => LabError::Input(e.to_string()),
        other => LabError::Verification(other.to_string()),
    }
}

/// Builds a representation from a builder spec or a representation file.
pub fn representation(p: &Arc<GroupPresentation>, spec: &str, seed: u64) -> Result<Representation, LabError> {
    let k = p.generator_count();
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let rep = match kind {
        "trivial" => Ok(Representation::trivial(p.clone(), count("trivial", arg)?)),
        "char" => {
            let turns = arg.split(',').map(ratio).collect::<Result<Vec<_>, _>>()?;
            let turns = match turns.len() {
                1 => vec![turns[0]; k],
                n if n == k => turns,
                n => return Err(LabError::Input(format!("char: {n} values for {k} generators"))),
            };
            let values: Vec<C64> = turns.iter().map(|t| unit_phase(TAU * t)).collect();
            Representation::character(p.clone(), &values).map(|r| r.with_label(spec))
        }
        "circle" => {
            if k != 1 || !p.relators().is_empty() {
                return Err(LabError::Input("circle:N is a representation of Z".into()));
            }
            Representation::circle_discretization(count("circle", arg)?).map(|r| r.with_label(spec))
        }
        "rot" => {
            let theta = TAU * ratio(arg)?;
            let (c, s) = (theta.cos(), theta.sin());
            let m = CMat::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)]);
            Representation::new(p.clone(), vec![m; k], spec)
        }
        "unitary" => Representation::random_unitary(p.clone(), count("unitary", arg)?, seed).map(|r| r.with_label(spec)),
        _ => {
            let path = Path::new(spec);
            if !path.exists() {
                return Err(missing(path));
            }
            Representation::from_file(p.clone(), path)
        }
    };
    rep.map_err(rep_error)
}

impl Setup {
    pub fn from_settings(s: &Settings) -> Result<Self, LabError> {
        let (presentation, bundled) = presentation(s.preset.as_deref())?;
        let complex = match &s.complex {
            Some(path) => {
                if !path.exists() {
                    return Err(missing(path));
                }
                let x = EquivariantComplex::from_file(path).map_err(|e| LabError::Input(e.to_string()))?;
                if x.generator_count() > presentation.generator_count() {
                    return Err(LabError::Input(format!(
                        "{} uses {} generators but the group has {}",
                        path.display(),
                        x.generator_count(),
                        presentation.generator_count()
                    )));
                }
                x
            }
            None => bundled.unwrap_or_else(|| EquivariantComplex::presentation_complex(&presentation)),
        };
        let rep = representation(&presentation, s.rep.as_deref().unwrap_or("trivial:1"), s.seed)?;
        Ok(Self { presentation, complex, rep })
    }
}
