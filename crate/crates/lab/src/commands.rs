use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use cohomolab_core::analysis::{cohomology_with, deformation_report, sufficient_epsilon, weil_rigidity_check, AnalysisError};
use cohomolab_core::linalg::RankTolerance;
use cohomolab_core::rep::{self, RepError};
use cohomolab_core::{DeformationKind, DeformationSpec, EquivariantComplex, GroupPresentation, Representation};
use rayon::prelude::*;

use crate::checks;
use crate::cli::Settings;
use crate::setup::Setup;
use crate::LabError;

pub const SWEEP_HEADER: &str = "seed,epsilon_requested,epsilon_measured,drift,drift_bound,dimH_before,dimH_after,\
kappa_before,kappa_after,closeness,closeness_bound,vanishing_preserved";

/// 17 significant digits; non-finite values as `inf`, `-inf`, `nan`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn tolerance(s: &Settings) -> RankTolerance {
    s.rank_tol.map(RankTolerance::Absolute).unwrap_or(RankTolerance::Relative)
}

fn analysis_error(e: AnalysisError) -> LabError {
    match e {
        AnalysisError::Rep(r) => rep_error(r),
        AnalysisError::Cochain(c) => LabError::Input(c.to_string()),
        AnalysisError::NonUnitary => LabError::Input(e.to_string()),
        other => LabError::Failed(other.to_string()),
    }
}

fn rep_error(e: RepError) -> LabError {
    match e {
        RepError::KindMismatch(_) | RepError::ModeOutOfRange { .. } | RepError::Parse { .. } | RepError::Io { .. } => {
            LabError::Input(e.to_string())
        }
        other => LabError::Verification(other.to_string()),
    }
}

fn write_out(dir: &Path, name: &str, text: &str) -> Result<(), LabError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| LabError::Input(format!("{}: {e}", path.display())))
}

fn degree(s: &Settings, x: &EquivariantComplex) -> Result<usize, LabError> {
    let n = s.degree.unwrap_or(0);
    if n > x.max_degree() {
        return Err(LabError::Input(format!("degree {n} exceeds the top degree {} of {}", x.max_degree(), x.name())));
    }
    Ok(n)
}

pub fn cohomology(s: &Settings) -> Result<(), LabError> {
    let setup = Setup::from_settings(s)?;
    let report = cohomology_with(&setup.complex, &setup.rep, tolerance(s)).map_err(analysis_error)?;
    let mut table = format!(
        "complex {}  rep {}  dim {}  chi {}\n{:>3} {:>6} {:>6} {:>6} {:>24} {:>12} {:>12}\n",
        report.complex, report.representation, report.dim_e, report.euler_characteristic, "n", "cells", "dimH", "rank",
        "kappa", "threshold", "lap_min"
    );
    for d in &report.degrees {
        let lap = d.laplacian_lambda_min.map(|l| format!("{l:.4e}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            table,
            "{:>3} {:>6} {:>6} {:>6} {:>24} {:>12.4e} {:>12}",
            d.degree,
            d.cells,
            d.dim_h,
            d.rank,
            fmt_float(d.kappa),
            d.threshold,
            lap
        );
    }
    let _ = writeln!(table, "euler audit: {}", if report.euler_audit() { "ok" } else { "FAILED" });
    print!("{table}");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &s.out {
        Some(dir) => write_out(dir, "cohomology.json", &json)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn sweep_kind(s: &Settings, pi: &Representation) -> Result<DeformationKind, LabError> {
    let name = match s.strategy.as_deref() {
        Some(n) => n.to_string(),
        None if pi.presentation().relators().is_empty() => "free".into(),
        None if pi.is_diagonal() => "diagonal".into(),
        None => "conjugation".into(),
    };
    Ok(match name.as_str() {
        "conjugation" => DeformationKind::Conjugation,
        "derivation" => DeformationKind::DerivationTwist { split: s.split.unwrap_or(pi.dim() / 2) },
        "diagonal" => DeformationKind::DiagonalPerturbation { scaling: false },
        "diagonal-scaled" => DeformationKind::DiagonalPerturbation { scaling: true },
        "flatten" => DeformationKind::CircleModeFlatten { modes: s.modes.unwrap_or(1) },
        "free" => DeformationKind::FreeArbitrary,
        other => {
            return Err(LabError::Input(format!(
                "unknown strategy {other:?} (conjugation, derivation, diagonal, diagonal-scaled, flatten, free)"
            )))
        }
    })
}

fn pool(s: &Settings) -> Result<rayon::ThreadPool, LabError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(s.jobs.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Input(format!("thread pool: {e}")))
}

/// Runs the sweep and returns the CSV text.
pub fn sweep_csv(s: &Settings) -> Result<String, LabError> {
    let setup = Setup::from_settings(s)?;
    let (x, pi) = (&setup.complex, &setup.rep);
    let n = degree(s, x)?;
    let kind = sweep_kind(s, pi)?;
    let tol = tolerance(s);
    let cells: Vec<(u64, f64)> =
        (0..s.trials as u64).flat_map(|t| s.eps.iter().map(move |&e| (s.seed + t, e))).collect();
    let rows: Vec<Result<String, LabError>> = pool(s)?.install(|| {
        cells
            .par_iter()
            .map(|&(seed, eps)| {
                let rho = rep::random_deformation(pi, &DeformationSpec { kind: kind.clone(), epsilon: eps, seed })
                    .map_err(rep_error)?;
                let r = deformation_report(x, pi, &rho, n, eps, tol).map_err(analysis_error)?;
                Ok([
                    seed.to_string(),
                    fmt_float(eps),
                    fmt_float(r.epsilon_measured),
                    fmt_float(r.codifferential_drift[n]),
                    fmt_float(r.certified_drift_bound[n]),
                    r.dims_before[n].to_string(),
                    r.dims_after[n].to_string(),
                    fmt_float(r.kappa_before[n]),
                    fmt_float(r.kappa_after[n]),
                    fmt_float(r.kernel_closeness_measured),
                    fmt_float(r.kernel_closeness_bound),
                    r.vanishing_preserved.to_string(),
                ]
                .join(","))
            })
            .collect()
    });
    let mut csv = format!("{SWEEP_HEADER}\n");
    let mut preserved = vec![0usize; s.eps.len()];
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        if row.ends_with(",true") {
            preserved[i % s.eps.len()] += 1;
        }
        csv.push_str(&row);
        csv.push('\n');
    }
    let blanks = ",".repeat(9);
    for (eps, count) in s.eps.iter().zip(&preserved) {
        let _ = writeln!(csv, "summary,{},{blanks}{}", fmt_float(*eps), fmt_float(*count as f64 / s.trials as f64));
    }
    let star = match sufficient_epsilon(x, pi, n) {
        Ok(se) => fmt_float(se.epsilon),
        Err(AnalysisError::NonVanishing { .. }) => String::new(),
        Err(e) => return Err(analysis_error(e)),
    };
    let _ = writeln!(csv, "sufficient_epsilon,{star},{blanks}");
    Ok(csv)
}

pub fn sweep(s: &Settings) -> Result<(), LabError> {
    let csv = sweep_csv(s)?;
    match &s.out {
        Some(dir) => {
            write_out(dir, "sweep.csv", &csv)?;
            for line in csv.lines().filter(|l| l.starts_with("summary") || l.starts_with("sufficient")) {
                println!("{line}");
            }
        }
        None => print!("{csv}"),
    }
    Ok(())
}

pub fn scaling(s: &Settings) -> Result<(), LabError> {
    let z = GroupPresentation::preset("Z").expect("preset");
    let x = EquivariantComplex::presentation_complex(&z);
    let tol = tolerance(s);
    let mut csv = String::from("N,kappa0,closed_form,sufficient_epsilon,flatten_distance,flatten_dimH0\n");
    let mut worst: f64 = 0.0;
    for &n in &s.n_list {
        let pi = Representation::circle_discretization(n).map_err(rep_error)?;
        let report = cohomology_with(&x, &pi, tol).map_err(analysis_error)?;
        let kappa = report.kappa(0);
        let closed = 2.0 * (PI / n as f64).sin();
        worst = worst.max((kappa - closed).abs());
        let star = match sufficient_epsilon(&x, &pi, 0) {
            Ok(se) => fmt_float(se.epsilon),
            Err(AnalysisError::NonVanishing { .. }) => String::new(),
            Err(e) => return Err(analysis_error(e)),
        };
        let rho = rep::circle_mode_flatten(&pi, 1).map_err(rep_error)?;
        let dist = rep::deformation_distance(&pi, &rho).map_err(rep_error)?;
        let flat = cohomology_with(&x, &rho, tol).map_err(analysis_error)?;
        let _ = writeln!(
            csv,
            "{n},{},{},{star},{},{}",
            fmt_float(kappa),
            fmt_float(closed),
            fmt_float(dist),
            flat.dim(0)
        );
    }
    print!("{csv}");
    if let Some(dir) = &s.out {
        write_out(dir, "scaling.csv", &csv)?;
    }
    if !(worst <= 1e-10) {
        return Err(LabError::Failed(format!("kappa_0 differs from 2 sin(pi/N) by {worst:e}")));
    }
    Ok(())
}

pub fn verify(s: &Settings) -> Result<(), LabError> {
    let groups: Vec<String> = match &s.only {
        Some(list) => {
            if let Some(bad) = list.iter().find(|g| !checks::GROUPS.contains(&g.as_str())) {
                return Err(LabError::Input(format!("unknown check group {bad:?} ({})", checks::GROUPS.join(", "))));
            }
            list.clone()
        }
        None => checks::GROUPS.iter().map(|g| g.to_string()).collect(),
    };
    let outcomes = checks::run(&groups, tolerance(s));
    let mut report = String::new();
    for o in &outcomes {
        let _ = writeln!(report, "{} [{}] {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.group, o.name, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let _ = writeln!(report, "{} checks, {failed} failed", outcomes.len());
    print!("{report}");
    if let Some(dir) = &s.out {
        write_out(dir, "verify.txt", &report)?;
    }
    if failed > 0 {
        return Err(LabError::Failed(format!("{failed} checks failed")));
    }
    Ok(())
}

pub fn weil(s: &Settings) -> Result<(), LabError> {
    let setup = Setup::from_settings(s)?;
    let cert = weil_rigidity_check(&setup.rep).map_err(analysis_error)?;
    println!(
        "rep {}  dim H^1(Ad) = {}  kappa_0 = {}  kappa_1 = {}  {}",
        setup.rep.label(),
        cert.dim_h1,
        fmt_float(cert.kappa_0),
        fmt_float(cert.kappa_1),
        if cert.rigid { "locally rigid" } else { "not certified rigid" }
    );
    if let Some(dir) = &s.out {
        write_out(dir, "weil.json", &serde_json::to_string_pretty(&cert).expect("certificate serializes"))?;
    }
    Ok(())
}
