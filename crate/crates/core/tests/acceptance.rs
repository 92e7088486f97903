//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every line is printed whether it passes or not; exits non-zero on any
//! failure.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subsol_core::boundary_layer::{scaling_study, CollarQuadrature, HolderField, StreamTestField};
use subsol_core::burgers::convergence_study;
use subsol_core::fit::ratios;
use subsol_core::subsolution::{check_constraint_structure, SampleGrid};
use subsol_core::viscosity::{mms_space_study, mms_time_study, vanishing_viscosity_study};
use subsol_core::weakform::testfield::{library, scalar_library};
use subsol_core::weakform::{
    energy_history, initial_energy, initial_energy_quadrature, radial_fd_study,
    radial_sample_points, residual_refinement, strictly_decreasing, weak_residual_divergence,
    WeakQuadrature, REFINEMENT_BASE,
};
use subsol_core::{AnnulusGeometry, Subsolution, SubsolutionParams};

struct Line {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn sub(lambda: f64, epsilon: f64) -> Subsolution {
    Subsolution::new(AnnulusGeometry::default(), SubsolutionParams { lambda, epsilon }).unwrap()
}

/// Largest eigenvalue of `[[a, b], [b, c]]`.
fn lambda_max(a: f64, b: f64, c: f64) -> f64 {
    let m = 0.5 * (a + c);
    let d = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    m + d
}

fn energy_oracle() -> Line {
    let start = Instant::now();
    let s = sub(0.1, 0.5);
    let g = s.geom;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst = 0.0_f64;
    for _ in 0..10_000 {
        let r = rng.gen_range(g.rho..g.outer);
        let th = rng.gen_range(0.0..TAU);
        let t = rng.gen_range(0.0..=g.horizon);
        let x = [r * th.cos(), r * th.sin()];
        let v = s.vbar(x, t);
        let u = s.ubar(x, t).to_array();
        // d/2 = 1 in two dimensions
        let oracle = lambda_max(v[0] * v[0] - u[0][0], v[0] * v[1] - u[0][1], v[1] * v[1] - u[1][1]);
        worst = worst.max((oracle - s.egen(x[0].hypot(x[1]), t)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: 1,
        name: "closed-form energy vs eigenvalue oracle",
        passed: worst < 1e-12 && secs < 1.0,
        detail: format!("max diff {worst:.2e} (< 1e-12), {secs:.2} s (< 1 s)"),
    }
}

fn constraint_dichotomy() -> Line {
    let start = Instant::now();
    let s = sub(0.1, 0.5);
    let rep = check_constraint_structure(&s, &SampleGrid::new(100, 64, 10));
    let secs = start.elapsed().as_secs_f64();
    let ok = rep.strict_in_region
        && rep.equality_outside
        && rep.max_margin_formula_error < 1e-13
        && rep.max_gap_outside < 1e-13
        && rep.n_in_region > 0;
    Line {
        id: 2,
        name: "constraint dichotomy on 100x64x10",
        passed: ok && secs < 5.0,
        detail: format!(
            "{} in U, min margin {:.3e}, margin formula err {:.1e}, gap outside {:.1e}, {secs:.2} s",
            rep.n_in_region,
            rep.min_margin_in_region.unwrap_or(f64::NAN),
            rep.max_margin_formula_error,
            rep.max_gap_outside
        ),
    }
}

fn energy_anchors() -> Line {
    let quad = WeakQuadrature::default();
    let g = AnnulusGeometry::default();
    let e0 = initial_energy(&g);
    let e0_exact = 0.75 * std::f64::consts::PI;
    let rel = ((initial_energy_quadrature(&sub(0.1, 0.5), &quad) - e0) / e0).abs();
    let times: Vec<f64> = (0..10).map(|k| k as f64 / 9.0).collect();
    let conserved = energy_history(&sub(0.1, 0.0), &times, &quad);
    let drift = conserved.iter().map(|h| h.deficit.abs()).fold(0.0, f64::max);
    let dissip = energy_history(&sub(0.1, 0.5), &times, &quad);
    let dec = strictly_decreasing(&dissip.iter().map(|h| h.energy_total).collect::<Vec<_>>());
    Line {
        id: 3,
        name: "energy anchors",
        passed: rel < 1e-10 && (e0 - e0_exact).abs() < 1e-14 && drift < 1e-10 * e0 && dec,
        detail: format!(
            "E0 = {e0:.7}, quadrature rel err {rel:.1e}; eps=0 drift {:.1e} E0; eps=0.5 strictly decreasing: {dec}",
            drift / e0
        ),
    }
}

fn weak_residuals() -> Line {
    let start = Instant::now();
    let s = sub(0.1, 0.5);
    let lib = library(&s.geom);
    let rep = residual_refinement(&s, &lib, &REFINEMENT_BASE, 4).unwrap();
    let decreasing = rep
        .fields
        .iter()
        .all(|f| f.residuals.windows(2).all(|w| w[1].abs() < w[0].abs()));
    let quad = WeakQuadrature::default();
    let mut div = 0.0_f64;
    for (_, p) in scalar_library(&s.geom) {
        for k in 0..=4 {
            let t = 0.25 * k as f64;
            div = div.max(weak_residual_divergence(&s, &p, t, &quad).unwrap().abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: 4,
        name: "weak-form residuals",
        passed: lib.len() == 5 && decreasing && rep.min_order() >= 2.0 && div < 1e-10 && secs < 30.0,
        detail: format!(
            "{} fields, min observed order {:.2} (>= 2), decreasing: {decreasing}, divergence {div:.1e} (< 1e-10), {secs:.1} s",
            rep.fields.len(),
            rep.min_order()
        ),
    }
}

fn radial_system() -> Line {
    let s = sub(0.1, 0.5);
    let pts = radial_sample_points(&s, 200, 5e-3);
    let fd = radial_fd_study(&s, &pts, &[1e-3, 5e-4, 2.5e-4]).unwrap();
    let (r1, r2) = fd.ratios();
    let all: Vec<f64> = r1.iter().chain(&r2).flatten().copied().collect();
    let ok = r1.iter().all(|r| r.is_some()) && all.iter().all(|r| (3.5..=4.5).contains(r));
    Line {
        id: 5,
        name: "radial system FD order",
        passed: ok,
        detail: format!("{} points, ratios res1 {r1:.3?}, res2 {r2:.3?} (4 +/- 0.5)", fd.n_points),
    }
}

fn burgers_oracle() -> Line {
    let g = AnnulusGeometry::default();
    let study = convergence_study(&g, &SubsolutionParams::default(), 0.5, 2000, 4).unwrap();
    let rat = ratios(&study.iter().map(|c| c.l1_error).collect::<Vec<_>>());
    let bounded = study.iter().all(|c| c.min_value >= -1.0 && c.max_value <= 1.0);
    Line {
        id: 6,
        name: "Godunov vs rarefaction",
        passed: rat.len() == 3 && rat.iter().all(|r| (1.7..=2.3).contains(r)) && bounded,
        detail: format!("L1 ratios {rat:.3?} over 2000..16000 cells, in [-1, 1]: {bounded}"),
    }
}

fn viscosity_limit() -> Line {
    let start = Instant::now();
    let g = AnnulusGeometry::default();
    let study = vanishing_viscosity_study(&g, &[1e-2, 1e-3, 1e-4], 1.0, 2000).unwrap();
    let space = mms_space_study(&g, &[20, 40, 80, 160], 1e-4, 0.5).unwrap();
    let time = mms_time_study(&g, 1000, &[0.1, 0.05, 0.025, 0.0125], 1.0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Line {
        id: 7,
        name: "viscosity limit and parabolic MMS",
        passed: study.strictly_decreasing
            && min(&space.orders) >= 1.8
            && min(&time.orders) >= 1.8
            && secs < 60.0,
        detail: format!(
            "distances {:.4?}, MMS orders space {:.2} time {:.2} (>= 1.8), {secs:.1} s",
            study.distances,
            min(&space.orders),
            min(&time.orders)
        ),
    }
}

fn boundary_lines() -> [Line; 2] {
    let g = AnnulusGeometry::default();
    let v = HolderField::new(0.5, &g).unwrap();
    let rep = scaling_study(
        &v,
        &StreamTestField::new(&g),
        &g,
        &[0.04, 0.02, 0.01, 0.005],
        &[0.0, 0.5, 1.0],
        &CollarQuadrature::default(),
        0.15,
    )
    .unwrap();
    let bounds = [1.85, 0.35, 1.35, 0.85];
    let slopes: Vec<f64> = rep.terms.iter().map(|t| t.slope.unwrap_or(f64::NAN)).collect();
    let ok = slopes.iter().zip(bounds).all(|(s, b)| *s >= b) && rep.max_consistency() < 1e-8;
    let strong = rep.strong_slope.unwrap_or(f64::NAN);
    [
        Line {
            id: 8,
            name: "boundary-layer scaling",
            passed: ok,
            detail: format!(
                "slopes {slopes:.3?} vs {bounds:?}, consistency {:.1e} (< 1e-8)",
                rep.max_consistency()
            ),
        },
        Line {
            id: 9,
            name: "strong approximation",
            passed: strong >= 0.5,
            detail: format!(
                "||w_eps - w|| {:.4?}, fitted order {strong:.4} (>= 0.5)",
                rep.strong_norms
            ),
        },
    ]
}

fn main() -> ExitCode {
    let mut lines = vec![
        energy_oracle(),
        constraint_dichotomy(),
        energy_anchors(),
        weak_residuals(),
        radial_system(),
        burgers_oracle(),
        viscosity_limit(),
    ];
    lines.extend(boundary_lines());
    let mut failed = 0;
    for l in &lines {
        if !l.passed {
            failed += 1;
        }
        println!(
            "{} criterion {}: {}: {}",
            if l.passed { "PASS" } else { "FAIL" },
            l.id,
            l.name,
            l.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
