//! The invariant suite run by `cohomolab verify`.

use std::f64::consts::PI;

use cohomolab_core::analysis::{
    self, bounded_below_perturbation_check, closeness_lemma_checks, cohomology_with, deformation_bound, duality_check,
    laplacian_criterion, quotient_comparison_check, weil_rigidity_check, LemmaRecord, SubspaceBasis,
};
use cohomolab_core::linalg::{self, CMat, RankTolerance, C64};
use cohomolab_core::random::{self, rng_from_seed, unit_phase};
use cohomolab_core::rep::{self, DeformationKind, DeformationSpec};
use cohomolab_core::{codifferential, EquivariantComplex, GroupPresentation, Representation};
use rand::Rng;

pub const GROUPS: [&str; 9] =
    ["chain", "torus", "euler", "kazhdan", "laplacian", "closeness", "duality", "deformation", "weil"];

#[derive(Clone, Debug)]
pub struct Outcome {
    pub group: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(group: &'static str, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { group, name: name.into(), passed, detail: detail.into() }
}

/// Fixture complexes with seeded unitary representations of dimension 1 to 4.
pub fn fixture_reps(per_fixture: u64) -> Vec<(EquivariantComplex, Representation)> {
    let mut out = Vec::new();
    for (p, x) in EquivariantComplex::fixtures() {
        for seed in 0..per_fixture {
            let dim = 1 + (seed as usize % 4);
            let pi = Representation::random_unitary(p.clone(), dim, seed).expect("unitary fixture");
            out.push((x.clone(), pi));
        }
    }
    out
}

pub fn chain_soundness(cases: &[(EquivariantComplex, Representation)]) -> (usize, f64) {
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for (x, pi) in cases {
        for n in 0..x.max_degree() {
            let dn = codifferential(x, pi, n).expect("degree in range").matrix;
            let dn1 = codifferential(x, pi, n + 1).expect("degree in range").matrix;
            let lhs = linalg::spectral_norm(&(&dn1 * &dn));
            let scale = 1.0 + linalg::spectral_norm(&dn1) * linalg::spectral_norm(&dn);
            worst = worst.max(lhs / scale);
            if lhs > 1e-10 * scale {
                violations += 1;
            }
        }
    }
    (violations, worst)
}

fn z2_character(a: f64, b: f64) -> Representation {
    let z2 = GroupPresentation::preset("Z2").expect("preset");
    Representation::character(z2, &[C64::new(a, 0.0), C64::new(b, 0.0)]).expect("character")
}

/// Draws one random instance of every subspace lemma; ambient dimension 4 to 12.
pub fn lemma_instance(seed: u64) -> Vec<(&'static str, LemmaRecord)> {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(4..=12usize);
    let k = rng.random_range(1..=n / 2);
    let near = |rng: &mut random::SeededRng, v: &SubspaceBasis, t: f64, extra: usize| {
        let mut m = v.basis() + random::gaussian_matrix(rng, n, v.dim()) * C64::new(t, 0.0);
        if extra > 0 {
            let cols = random::gaussian_matrix(rng, n, extra);
            m = CMat::from_fn(n, v.dim() + extra, |i, j| if j < v.dim() { m[(i, j)] } else { cols[(i, j - v.dim())] });
        }
        SubspaceBasis::span(&m)
    };
    let mut out = Vec::new();

    let v = SubspaceBasis::random(&mut rng, n, k);
    let t = rng.random_range(0.0..0.5);
    let extra = rng.random_range(0..=(n - k).min(2));
    let w = near(&mut rng, &v, t, extra);
    out.push(("closeness", closeness_lemma_checks(&v, &w).expect("same ambient").2));

    let rows = rng.random_range(4..=12usize);
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    let t_op = if rng.random_bool(0.3) {
        let r = rng.random_range(1..n.min(rows));
        random::gaussian_matrix(&mut rng, rows, r) * random::gaussian_matrix(&mut rng, r, n) * C64::new(scale, 0.0)
    } else {
        random::gaussian_matrix(&mut rng, rows, n) * C64::new(scale, 0.0)
    };
    let eta = rng.random_range(0.0..0.2) * linalg::spectral_norm(&t_op);
    let s_op = &t_op + random::unit_direction(&mut rng, rows, n) * C64::new(eta, 0.0);
    let v = SubspaceBasis::random(&mut rng, n, k);
    let t = rng.random_range(0.0..0.3);
    let w = near(&mut rng, &v, t, 0);
    out.push(("perturbation", bounded_below_perturbation_check(&t_op, &s_op, &v, Some(&w)).expect("shapes agree")));

    let v = SubspaceBasis::random(&mut rng, n, k);
    let t = rng.random_range(0.0..0.2);
    let w = near(&mut rng, &v, t, 0);
    let a = random::gaussian_matrix(&mut rng, rows, n) * C64::new(scale, 0.0);
    let e = random::unit_direction(&mut rng, rows, n) * C64::new(rng.random_range(0.0..0.2) * scale, 0.0);
    let p_v = CMat::identity(n, n) - v.projector();
    let p_w = CMat::identity(n, n) - w.projector();
    let t_lift = &a * p_v;
    let s_lift = (&a + e) * p_w;
    out.push(("quotient", quotient_comparison_check(&t_lift, &s_lift, &v, &w).expect("lifts vanish")));
    out
}

/// Seeded legal deformations for the domination check on `Z2` and `F2`.
pub fn domination_cases(eps: f64, count: u64) -> Vec<(EquivariantComplex, Representation, Representation)> {
    let mut out = Vec::new();
    let z2 = GroupPresentation::preset("Z2").expect("preset");
    let f2 = GroupPresentation::preset("F2").expect("preset");
    let xz2 = EquivariantComplex::presentation_complex(&z2);
    let xf2 = EquivariantComplex::presentation_complex(&f2);
    let diag = Representation::diagonal(
        z2.clone(),
        &[vec![C64::new(-1.0, 0.0), unit_phase(0.7)], vec![C64::new(-1.0, 0.0), unit_phase(2.1)]],
        "diag",
    )
    .expect("diagonal");
    for seed in 0..count {
        let (x, pi, kind) = match seed % 4 {
            0 => (&xz2, diag.clone(), DeformationKind::DiagonalPerturbation { scaling: seed % 8 == 4 }),
            1 => (&xz2, Representation::random_unitary(z2.clone(), 2, seed).expect("unitary"), DeformationKind::Conjugation),
            _ => (&xf2, Representation::random_unitary(f2.clone(), 2, seed).expect("unitary"), DeformationKind::FreeArbitrary),
        };
        let rho = rep::random_deformation(&pi, &DeformationSpec { kind, epsilon: eps, seed }).expect("legal deformation");
        out.push((x.clone(), pi, rho));
    }
    out
}

pub fn run(groups: &[String], tol: RankTolerance) -> Vec<Outcome> {
    let wants = |g: &str| groups.iter().any(|x| x == g);
    let mut out = Vec::new();
    let cases = fixture_reps(20);

    if wants("chain") {
        let (violations, worst) = chain_soundness(&cases);
        out.push(outcome("chain", "d^{n+1} d^n = 0", violations == 0, format!("{} cases, worst ratio {worst:.3e}", cases.len())));
    }

    if wants("torus") {
        let x = EquivariantComplex::presentation_complex(&GroupPresentation::preset("Z2").expect("preset"));
        let triv = Representation::trivial(GroupPresentation::preset("Z2").expect("preset"), 1);
        for (label, pi, expected) in [("trivial", triv, vec![1, 2, 1]), ("(-1,-1)", z2_character(-1.0, -1.0), vec![0, 0, 0])] {
            let dims = cohomology_with(&x, &pi, tol).map(|r| r.dims());
            let passed = dims.as_ref().map(|d| *d == expected).unwrap_or(false);
            out.push(outcome("torus", format!("Z2 {label} dims"), passed, format!("{dims:?}, expected {expected:?}")));
        }
    }

    if wants("euler") {
        let mut bad = Vec::new();
        for (x, pi) in &cases {
            let report = cohomology_with(x, pi, tol).expect("fixture cohomology");
            if !report.euler_audit() || report.dims().iter().any(|&d| d < 0) {
                bad.push(format!("{}/{}", x.name(), pi.label()));
            }
        }
        out.push(outcome("euler", "rank-nullity audit", bad.is_empty(), format!("{} runs, failures {bad:?}", cases.len())));
    }

    if wants("kazhdan") {
        let z = GroupPresentation::preset("Z").expect("preset");
        let x = EquivariantComplex::presentation_complex(&z);
        let mut worst: f64 = 0.0;
        for theta in [PI, PI / 2.0, 2.0 * PI / 3.0] {
            let pi = Representation::character(z.clone(), &[unit_phase(theta)]).expect("character");
            let k = analysis::kazhdan_constant(&x, &pi, 0).expect("degree 0");
            worst = worst.max((k - 2.0 * (theta / 2.0).sin()).abs());
        }
        for n in [4usize, 8, 16, 64] {
            let pi = Representation::circle_discretization(n).expect("N >= 3");
            let k = analysis::kazhdan_constant(&x, &pi, 0).expect("degree 0");
            worst = worst.max((k - 2.0 * (PI / n as f64).sin()).abs());
        }
        out.push(outcome("kazhdan", "closed forms", worst <= 1e-10, format!("max error {worst:.3e}")));
    }

    if wants("laplacian") {
        let mut disagreements = 0;
        for (x, pi) in &cases {
            let report = cohomology_with(x, pi, tol).expect("fixture cohomology");
            for n in 0..=x.max_degree() {
                let crit = laplacian_criterion(x, pi, n).expect("unitary fixture");
                if crit.invertible != (report.dim(n) == 0) {
                    disagreements += 1;
                }
            }
        }
        out.push(outcome("laplacian", "invertibility iff vanishing", disagreements == 0, format!("{disagreements} disagreements")));
    }

    if wants("closeness") {
        let mut worst = f64::INFINITY;
        let mut failures = Vec::new();
        for seed in 0..200 {
            for (kind, record) in lemma_instance(seed) {
                worst = worst.min(record.min_slack());
                for v in record.violations(1e-9) {
                    failures.push(format!("{kind}/{} seed {seed}", v.name));
                }
            }
        }
        out.push(outcome(
            "closeness",
            "subspace and perturbation lemmas",
            failures.is_empty(),
            format!("200 instances, min slack {worst:.3e}, failures {failures:?}"),
        ));
    }

    if wants("duality") {
        let mut bad = Vec::new();
        for (x, pi) in &cases {
            for n in 0..=x.max_degree() {
                let d = duality_check(x, pi, n).expect("fixture duality");
                if !d.consistent || d.matches_kappa == Some(false) {
                    bad.push(format!("{}/{} n={n}", x.name(), pi.label()));
                }
            }
        }
        out.push(outcome("duality", "adjoint bounded below iff vanishing", bad.is_empty(), format!("failures {bad:?}")));
    }

    if wants("deformation") {
        let mut violations = 0;
        let mut total = 0;
        for eps in [0.01, 0.05, 0.1] {
            for (x, pi, rho) in domination_cases(eps, 20) {
                for n in 0..=x.max_degree() {
                    let dp = codifferential(&x, &pi, n).expect("degree").matrix;
                    let dr = codifferential(&x, &rho, n).expect("degree").matrix;
                    total += 1;
                    if linalg::spectral_norm(&(dp - dr)) > deformation_bound(&x, &pi, eps, n) {
                        violations += 1;
                    }
                }
            }
        }
        out.push(outcome("deformation", "certified drift dominates", violations == 0, format!("{violations}/{total} violations")));
    }

    if wants("weil") {
        let z3 = GroupPresentation::preset("Z3").expect("preset");
        let chi = Representation::character(z3, &[unit_phase(2.0 * PI / 3.0)]).expect("character");
        let rigid = weil_rigidity_check(&chi).expect("certificate");
        out.push(outcome("weil", "Z3 character rigid", rigid.rigid, format!("dim H^1 = {}", rigid.dim_h1)));
        let z = GroupPresentation::preset("Z").expect("preset");
        let (c, s) = (0.9f64.cos(), 0.9f64.sin());
        let rot = CMat::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)]);
        let phi = Representation::new(z, vec![rot], "rot").expect("rotation");
        let cert = weil_rigidity_check(&phi).expect("certificate");
        out.push(outcome("weil", "Z rotation not certified", !cert.rigid && cert.dim_h1 >= 1, format!("dim H^1 = {}", cert.dim_h1)));
    }
    out
}
