//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::Command;

use cohomolab::checks::{fixture_reps, lemma_instance};
use cohomolab_core::analysis::{
    certified_lower_bound, cohomology, deformation_bound, kazhdan_constant, laplacian_criterion,
    sufficient_epsilon, weil_rigidity_check, SubspaceBasis,
};
use cohomolab_core::linalg::{self, CMat, RankTolerance, C64};
use cohomolab_core::random::unit_phase;
use cohomolab_core::rep::{self, DeformationKind, DeformationSpec};
use cohomolab_core::{codifferential, EquivariantComplex, GroupPresentation, Representation};

struct Line {
    passed: bool,
    detail: String,
}

fn line(passed: bool, detail: impl Into<String>) -> Line {
    Line { passed, detail: detail.into() }
}

fn z2() -> std::sync::Arc<GroupPresentation> {
    GroupPresentation::preset("Z2").unwrap()
}

fn minus_z2() -> Representation {
    Representation::character(z2(), &[C64::new(-1.0, 0.0), C64::new(-1.0, 0.0)]).unwrap()
}

fn complex(name: &str) -> EquivariantComplex {
    EquivariantComplex::presentation_complex(&GroupPresentation::preset(name).unwrap())
}

fn chain_soundness() -> Line {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (x, pi) in fixture_reps(20) {
        for n in 0..x.max_degree() {
            let dn = codifferential(&x, &pi, n).unwrap().matrix;
            let dn1 = codifferential(&x, &pi, n + 1).unwrap().matrix;
            let lhs = linalg::spectral_norm(&(&dn1 * &dn));
            worst = worst.max(lhs / (1.0 + linalg::spectral_norm(&dn1) * linalg::spectral_norm(&dn)));
            count += 1;
        }
    }
    line(worst <= 1e-10, format!("{count} compositions, worst ratio {worst:.2e}"))
}

fn torus_table() -> Line {
    let x = complex("Z2");
    let triv = cohomology(&x, &Representation::trivial(z2(), 1)).unwrap().dims();
    let minus = cohomology(&x, &minus_z2()).unwrap().dims();
    let t2 = cohomology(&EquivariantComplex::torus_triangulation(), &Representation::trivial(z2(), 1)).unwrap().dims();
    let mut audits = 0;
    let mut bad = 0;
    for (x, pi) in fixture_reps(20) {
        let r = cohomology(&x, &pi).unwrap();
        let alternating: i64 = r.dims().iter().enumerate().map(|(n, d)| if n % 2 == 0 { *d } else { -d }).sum();
        audits += 1;
        if alternating != pi.dim() as i64 * x.euler_characteristic() || r.dims().iter().any(|&d| d < 0) {
            bad += 1;
        }
    }
    let ok = triv == [1, 2, 1] && minus == [0, 0, 0] && t2 == [1, 2, 1] && bad == 0;
    line(ok, format!("trivial {triv:?}, (-1,-1) {minus:?}, T2 {t2:?}, euler audit {bad}/{audits} failures"))
}

fn kazhdan_closed_forms() -> Line {
    let z = GroupPresentation::preset("Z").unwrap();
    let x = complex("Z");
    let mut worst: f64 = 0.0;
    for theta in [PI, PI / 2.0, 2.0 * PI / 3.0] {
        let pi = Representation::character(z.clone(), &[unit_phase(theta)]).unwrap();
        worst = worst.max((kazhdan_constant(&x, &pi, 0).unwrap() - 2.0 * (theta / 2.0).sin()).abs());
    }
    for n in [4usize, 8, 16, 64] {
        let pi = Representation::circle_discretization(n).unwrap();
        worst = worst.max((kazhdan_constant(&x, &pi, 0).unwrap() - 2.0 * (PI / n as f64).sin()).abs());
    }
    line(worst <= 1e-10, format!("max error {worst:.2e}"))
}

fn laplacian_agreement() -> Line {
    let mut cases = fixture_reps(20);
    let z = GroupPresentation::preset("Z").unwrap();
    for theta in [0.0, PI, PI / 2.0] {
        cases.push((complex("Z"), Representation::character(z.clone(), &[unit_phase(theta)]).unwrap()));
    }
    cases.push((complex("Z2"), minus_z2()));
    cases.push((complex("Z"), Representation::circle_discretization(8).unwrap()));
    let mut disagreements = 0;
    let mut total = 0;
    for (x, pi) in &cases {
        let r = cohomology(x, pi).unwrap();
        for n in 0..=x.max_degree() {
            total += 1;
            if laplacian_criterion(x, pi, n).unwrap().invertible != (r.dim(n) == 0) {
                disagreements += 1;
            }
        }
    }
    line(disagreements == 0, format!("{disagreements}/{total} disagreements"))
}

fn lemma_suite() -> Line {
    let mut worst = f64::INFINITY;
    let mut failures = Vec::new();
    let mut checks = 0;
    for seed in 0..200 {
        for (kind, record) in lemma_instance(seed) {
            checks += record.checks.len();
            worst = worst.min(record.min_slack());
            failures.extend(record.violations(1e-9).iter().map(|c| format!("{kind}/{} seed {seed}", c.name)));
        }
    }
    line(failures.is_empty(), format!("{checks} inequalities, min slack {worst:.2e}, failures {failures:?}"))
}

fn domination() -> Line {
    let (xz2, xf2) = (complex("Z2"), complex("F2"));
    let f2 = GroupPresentation::preset("F2").unwrap();
    let diag = Representation::diagonal(
        z2(),
        &[vec![C64::new(-1.0, 0.0), unit_phase(0.7)], vec![C64::new(-1.0, 0.0), unit_phase(2.1)]],
        "diag",
    )
    .unwrap();
    let mut violations = 0;
    let mut total = 0;
    let mut monotone = true;
    let bases = [(&xz2, diag.clone()), (&xz2, Representation::random_unitary(z2(), 2, 5).unwrap()), (&xf2, Representation::random_unitary(f2.clone(), 2, 6).unwrap())];
    for (x, pi) in &bases {
        for n in 0..=x.max_degree() {
            let grid: Vec<f64> = [0.0, 0.01, 0.05, 0.1].iter().map(|&e| deformation_bound(x, pi, e, n)).collect();
            let top = n == x.max_degree();
            monotone &= grid[0] == 0.0 && (top || grid.windows(2).all(|w| w[0] < w[1]));
        }
    }
    for eps in [0.01, 0.05, 0.1] {
        for seed in 0..100u64 {
            let (x, pi, kind) = match seed % 4 {
                0 => (&xz2, diag.clone(), DeformationKind::DiagonalPerturbation { scaling: seed % 8 == 4 }),
                1 => (&xz2, Representation::random_unitary(z2(), 2, seed).unwrap(), DeformationKind::Conjugation),
                _ => (&xf2, Representation::random_unitary(f2.clone(), 2, seed).unwrap(), DeformationKind::FreeArbitrary),
            };
            let rho = rep::random_deformation(&pi, &DeformationSpec { kind, epsilon: eps, seed }).unwrap();
            for n in 0..=x.max_degree() {
                let measured = linalg::spectral_norm(
                    &(codifferential(x, &pi, n).unwrap().matrix - codifferential(x, &rho, n).unwrap().matrix),
                );
                total += 1;
                if measured > deformation_bound(x, &pi, eps, n) {
                    violations += 1;
                }
            }
        }
    }
    line(violations == 0 && monotone, format!("{violations}/{total} violations, bound monotone to 0: {monotone}"))
}

/// Certified lower bound for Z2 with both generators acting by -1, worked out by hand:
/// `d^0 = [-2; -2]`, `d^1 = [2, -2]`, `delta_0 = sqrt(2) eps`, and
/// `delta_1 = eps sqrt(9 B^4 + (1 + 4 B^3)^2)` with `B = 1 + eps`.
fn minus_z2_lower(eps: f64) -> f64 {
    let b = 1.0 + eps;
    let delta1 = eps * (9.0 * b.powi(4) + (1.0 + 4.0 * b.powi(3)).powi(2)).sqrt();
    let kappa = 2.0 * 2f64.sqrt();
    kappa * (1.0 - 2.0 * delta1 / kappa) - 2f64.sqrt() * eps
}

fn certified_vanishing() -> Line {
    let x = complex("Z2");
    let pi = minus_z2();
    let se = sufficient_epsilon(&x, &pi, 1).unwrap();
    let (mut lo, mut hi) = (1e-8, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if minus_z2_lower(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle_ok = (se.epsilon - lo).abs() <= 1e-6 * lo;
    let eps = 0.9 * se.epsilon;
    let (_, drift) = certified_lower_bound(&x, &pi, 1, eps).unwrap();
    let kappa0 = kazhdan_constant(&x, &pi, 0).unwrap();
    let mut failures = 0;
    for seed in 0..200u64 {
        let kind = DeformationKind::DiagonalPerturbation { scaling: seed % 2 == 1 };
        let rho = rep::random_deformation(&pi, &DeformationSpec { kind, epsilon: eps, seed }).unwrap();
        let r = cohomology(&x, &rho).unwrap();
        if r.dim(1) != 0 || r.kappa(drift.degree) < kappa0 - drift.c {
            failures += 1;
        }
    }
    line(
        se.epsilon > 0.0 && oracle_ok && failures == 0 && drift.degree == 0,
        format!("eps* = {:.6} (hand bound {lo:.6}), {failures}/200 failures at 0.9 eps*, c = {:.4}", se.epsilon, drift.c),
    )
}

/// `sup_{v in V, |v| = 1} dist(v, W)` from orthonormal bases.
fn gap(v: &CMat, w: &CMat) -> f64 {
    if v.ncols() == 0 {
        return 0.0;
    }
    let residual = v - w * (w.adjoint() * v);
    linalg::spectral_norm(&residual)
}

fn kernel_closeness() -> Line {
    let f2 = GroupPresentation::preset("F2").unwrap();
    let z = GroupPresentation::preset("Z").unwrap();
    let configs: Vec<(EquivariantComplex, Representation, DeformationKind)> = vec![
        (complex("Z2"), minus_z2(), DeformationKind::DiagonalPerturbation { scaling: true }),
        (complex("Z2"), Representation::random_unitary(z2(), 3, 1).unwrap(), DeformationKind::Conjugation),
        (complex("F2"), Representation::random_unitary(f2, 2, 2).unwrap(), DeformationKind::FreeArbitrary),
        (complex("Z"), Representation::circle_discretization(8).unwrap(), DeformationKind::CircleModeFlatten { modes: 1 }),
        (complex("Z"), Representation::character(z, &[unit_phase(1.0)]).unwrap(), DeformationKind::FreeArbitrary),
    ];
    let mut comparable = 0;
    let mut violations = 0;
    for (x, pi, kind) in &configs {
        for n in 0..=x.max_degree() {
            let dp = codifferential(x, pi, n).unwrap().matrix;
            let kp = SubspaceBasis::kernel_of(&dp, RankTolerance::Relative);
            let kappa = cohomology(x, pi).unwrap().kappa(n);
            for &eps in &[0.01, 0.05, 0.1] {
                for seed in 0..10u64 {
                    let rho = rep::random_deformation(pi, &DeformationSpec { kind: kind.clone(), epsilon: eps, seed }).unwrap();
                    let dr = codifferential(x, &rho, n).unwrap().matrix;
                    let kr = SubspaceBasis::kernel_of(&dr, RankTolerance::Relative);
                    if kr.dim() != kp.dim() || kappa.is_infinite() {
                        continue;
                    }
                    comparable += 1;
                    let measured = gap(kr.basis(), kp.basis());
                    if measured > linalg::spectral_norm(&(&dp - dr)) / kappa + 1e-8 {
                        violations += 1;
                    }
                }
            }
        }
    }
    line(violations == 0 && comparable > 0, format!("{violations}/{comparable} comparable cells violate"))
}

fn flatten_necessity() -> Line {
    let x = complex("Z");
    let mut notes = Vec::new();
    let mut ok = true;
    for n in [4usize, 8, 16, 64] {
        let pi = Representation::circle_discretization(n).unwrap();
        let rho = rep::circle_mode_flatten(&pi, 1).unwrap();
        let target = 2.0 * (PI / n as f64).sin();
        let dist = rep::deformation_distance(&pi, &rho).unwrap();
        let (before, after) = (cohomology(&x, &pi).unwrap().dim(0), cohomology(&x, &rho).unwrap().dim(0));
        let star = sufficient_epsilon(&x, &pi, 0).unwrap().epsilon;
        let good = (dist - target).abs() <= 1e-12 && before == 0 && after == 1 && star < target;
        ok &= good;
        notes.push(format!("N={n}: eps*={star:.12} < {target:.12}"));
    }
    line(ok, notes.join(", "))
}

fn direct_sum() -> Line {
    let mut worst: f64 = 0.0;
    let z = GroupPresentation::preset("Z").unwrap();
    for i in 0..20u64 {
        let (p, name) = if i % 2 == 0 { (z.clone(), "Z") } else { (z2(), "Z2") };
        let x = complex(name);
        let a = Representation::random_unitary(p.clone(), 1 + (i as usize % 3), 100 + i).unwrap();
        let b = Representation::random_unitary(p, 1 + (i as usize % 2), 200 + i).unwrap();
        let s = rep::direct_sum(&a, &b).unwrap();
        let (ka, kb, ks) = (
            kazhdan_constant(&x, &a, 0).unwrap(),
            kazhdan_constant(&x, &b, 0).unwrap(),
            kazhdan_constant(&x, &s, 0).unwrap(),
        );
        let expected = ka.min(kb);
        if ks != expected {
            worst = worst.max((ks - expected).abs());
        }
    }
    line(worst <= 1e-8, format!("20 pairs, max error {worst:.2e}"))
}

fn weil_demo() -> Line {
    let z3 = GroupPresentation::preset("Z3").unwrap();
    let chi = Representation::character(z3, &[unit_phase(2.0 * PI / 3.0)]).unwrap();
    let rigid = weil_rigidity_check(&chi).unwrap();
    let (c, s) = (0.9f64.cos(), 0.9f64.sin());
    let rot = CMat::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)]);
    let phi = Representation::new(GroupPresentation::preset("Z").unwrap(), vec![rot], "rot").unwrap();
    let loose = weil_rigidity_check(&phi).unwrap();
    line(rigid.rigid && rigid.dim_h1 == 0 && !loose.rigid && loose.dim_h1 >= 1, format!(
        "Z3 dim H^1 = {}, Z rotation dim H^1 = {}",
        rigid.dim_h1, loose.dim_h1
    ))
}

fn determinism() -> Line {
    let run = |jobs: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_cohomolab"))
            .args(["sweep", "--preset", "Z2", "--rep", "unitary:2", "--strategy", "conjugation", "--degree", "1"])
            .args(["--trials", "6", "--eps", "0.01,0.05,0.1", "--seed", "11", "--jobs", jobs])
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let (a, b, c) = (run("1"), run("1"), run("4"));
    let rows = a.iter().filter(|&&ch| ch == b'\n').count();
    line(a == b && a == c && rows > 1, format!("{} bytes, {rows} lines, identical across repeats and thread counts", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Line); 12] = [
        ("chain complex soundness", chain_soundness),
        ("torus table and Euler audit", torus_table),
        ("Kazhdan closed forms", kazhdan_closed_forms),
        ("Laplacian criterion", laplacian_agreement),
        ("subspace lemma suite", lemma_suite),
        ("deformation bound domination", domination),
        ("vanishing under certified deformations", certified_vanishing),
        ("kernel closeness bound", kernel_closeness),
        ("flattening counterexample", flatten_necessity),
        ("direct sum Kazhdan constant", direct_sum),
        ("Weil rigidity demo", weil_demo),
        ("sweep determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let r = check();
        if !r.passed {
            failed += 1;
        }
        println!("{} criterion {:>2} {name}: {}", if r.passed { "PASS" } else { "FAIL" }, i + 1, r.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
