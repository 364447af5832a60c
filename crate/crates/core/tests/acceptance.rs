//! Acceptance suite. Each criterion prints one PASS/FAIL line with the
//! measured quantity next to its pinned tolerance; the process exits with
//! status 1 if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use latstretch_core::asymptotics::{
    amgm_gap, error_row, fit_error_exponent, predict_hyperplane, weyl_cuboid_count, CountTarget, ErrorRow,
};
use latstretch_core::counting::{brute_force_count, lattice_counts, LatticeSubset};
use latstretch_core::fourier::{decay_check, default_shells, sandwich_check, Mollifier, SpectralBody};
use latstretch_core::optimizer::{convergence_sweep, optimize_d2_exact, Objective, SweepMode};
use latstretch_core::{ConvexBody, DiagonalStretch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const ORACLE_INSTANCES: usize = 200;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(60);
const GAUSS_CIRCLE_LIMIT: f64 = 10.0;
const GAUSS_CIRCLE_TIME_LIMIT: Duration = Duration::from_secs(30);
const ERROR_SHAPE_LIMIT: f64 = 10.0;
const EXPONENT_SLACK: f64 = 0.15;
const HYPERPLANE_LIMIT: f64 = 10.0;
const BALANCE_TOL: f64 = 1e-9;
const DEVIATION_LIMIT: f64 = 0.25;
const DEVIATION_EXPONENT_SLACK: f64 = 0.2;
const SWEEP_TIME_LIMIT: Duration = Duration::from_secs(600);
const RANDOM_STRETCHES: usize = 1000;
const DECAY_LIMIT: f64 = 1.0;
const WEYL_TWO_TERM_TOL: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Random unimodular diagonal stretch with every entry in `[1/3, 3]`.
fn random_stretch(rng: &mut ChaCha8Rng, d: usize) -> DiagonalStretch {
    let lo = (1.0f64 / 3.0).ln();
    loop {
        let mut t: Vec<f64> = (0..d - 1).map(|_| rng.gen_range(lo..-lo)).collect();
        let last = -t.iter().sum::<f64>();
        if last.abs() <= -lo {
            t.push(last);
            let entries: Vec<f64> = t.iter().map(|v| v.exp()).collect();
            let prod: f64 = entries.iter().product();
            // Absorb rounding in the last entry so det A = 1 to machine precision.
            let mut entries = entries;
            entries[d - 1] /= prod;
            return DiagonalStretch::unimodular(entries).unwrap();
        }
    }
}

fn oracle_instances() -> Vec<(ConvexBody, DiagonalStretch, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..ORACLE_INSTANCES)
        .map(|_| {
            let d = rng.gen_range(2..=3);
            let p = [1.5, 2.0, 3.0][rng.gen_range(0..3)];
            let axes: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..1.5)).collect();
            let a = random_stretch(&mut rng, d);
            let r = rng.gen_range(1.0..30.0);
            (ConvexBody::p_ellipsoid(p, axes).unwrap(), a, r)
        })
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    for (body, a, r) in oracle_instances() {
        let report = lattice_counts(&body, &a, r).unwrap();
        let checks = [
            (report.positive, LatticeSubset::Positive),
            (report.nonnegative, LatticeSubset::Nonnegative),
            (report.all, LatticeSubset::All),
            (report.nonzero, LatticeSubset::Nonzero),
            (report.hyperplane_union, LatticeSubset::Hyperplane),
        ];
        for (fast, subset) in checks {
            if fast != brute_force_count(&body, &a, r, subset).unwrap() {
                mismatches += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < ORACLE_TIME_LIMIT,
        format!("{mismatches} mismatches over {ORACLE_INSTANCES} instances x 5 counts, {elapsed:.2?} (limit {ORACLE_TIME_LIMIT:?})"),
    )
}

fn decomposition_identity() -> Outcome {
    let mut failures = 0;
    for (body, a, r) in oracle_instances() {
        let rep = lattice_counts(&body, &a, r).unwrap();
        if rep.all != (rep.positive << body.dimension()) + rep.hyperplane_union {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("all = 2^d positive + hyperplane_union failed on {failures} of {ORACLE_INSTANCES}"))
}

fn gauss_circle() -> Outcome {
    let start = Instant::now();
    let disk = ConvexBody::disk(1.0).unwrap();
    let id = DiagonalStretch::identity(2);
    let mut worst: f64 = 0.0;
    for i in 1..=50 {
        let r = 10.0 * i as f64;
        let row = error_row(&disk, &id, r, CountTarget::All).unwrap();
        worst = worst.max((row.exact as f64 - PI * r * r).abs() / r.powf(2.0 / 3.0));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= GAUSS_CIRCLE_LIMIT && elapsed < GAUSS_CIRCLE_TIME_LIMIT,
        format!("max |N(r) - pi r^2| / r^(2/3) = {worst:.4} (limit {GAUSS_CIRCLE_LIMIT}), {elapsed:.2?}"),
    )
}

fn planar_grid() -> (ConvexBody, Vec<f64>, Vec<f64>) {
    let disk = ConvexBody::disk(0.5).unwrap();
    let radii = (1..=30).map(|i| 10.0 * i as f64).collect();
    (disk, vec![1.0, 1.5, 2.0, 3.0], radii)
}

fn error_shape_planar() -> Outcome {
    let (disk, stretches, radii) = planar_grid();
    let mut worst: f64 = 0.0;
    let mut identity_rows: Vec<ErrorRow> = Vec::new();
    for &a in &stretches {
        let stretch = DiagonalStretch::planar(a).unwrap();
        for &r in &radii {
            let row = error_row(&disk, &stretch, r, CountTarget::Positive).unwrap();
            worst = worst.max(row.normalized_error);
            if a == 1.0 {
                identity_rows.push(row);
            }
        }
    }
    let slope = fit_error_exponent(&identity_rows).unwrap();
    let slope_limit = 2.0 / 3.0 + EXPONENT_SLACK;
    outcome(
        worst <= ERROR_SHAPE_LIMIT && slope <= slope_limit,
        format!(
            "max normalized error {worst:.4} (limit {ERROR_SHAPE_LIMIT}); fitted exponent at a=1 {slope:.4} (limit {slope_limit:.4})"
        ),
    )
}

fn hyperplane_count() -> Outcome {
    let (disk, stretches, radii) = planar_grid();
    let mut worst: f64 = 0.0;
    for &a in &stretches {
        let stretch = DiagonalStretch::planar(a).unwrap();
        for &r in &radii {
            let prediction = predict_hyperplane(&disk, &stretch, r).unwrap();
            let exact = lattice_counts(&disk, &stretch, r).unwrap().hyperplane_union;
            worst = worst.max((exact as f64 - prediction.predicted).abs() / prediction.error_shape);
        }
    }
    outcome(
        worst <= HYPERPLANE_LIMIT,
        format!("max |hyperplane_union - tr(A^-1) r| / (a^(4/3) r^(2/3)) = {worst:.4} (limit {HYPERPLANE_LIMIT})"),
    )
}

fn balancing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_section: f64 = 0.0;
    let mut worst_second: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.gen_range(2..=4);
        let p = rng.gen_range(1.2..6.0);
        let axes: Vec<f64> = (0..d).map(|_| rng.gen_range(0.2..5.0)).collect();
        let body = ConvexBody::p_ellipsoid(p, axes).unwrap();
        let (_, balanced) = body.balanced_representative().unwrap();
        for s in balanced.cross_section_measures() {
            worst_section = worst_section.max((s - 1.0).abs());
        }
        let (second, _) = balanced.balanced_representative().unwrap();
        worst_second = worst_second.max(second.deviation_from_identity());
    }
    outcome(
        worst_section <= BALANCE_TOL && worst_second <= BALANCE_TOL,
        format!("max |section - 1| = {worst_section:.2e}, max |B2 - Id| = {worst_second:.2e} (limit {BALANCE_TOL:e})"),
    )
}

fn optimal_stretch_convergence() -> Outcome {
    let start = Instant::now();
    let disk = ConvexBody::disk(0.5).unwrap();
    let grid: Vec<f64> = (1..=20).map(|i| 20.0 * i as f64).collect();
    let sweep = convergence_sweep(&disk, &grid, Objective::MaximizePositive, SweepMode::ExactD2).unwrap();
    let late = sweep.rows.iter().filter(|row| row.r >= 100.0).fold(0.0_f64, |m, row| m.max(row.deviation));
    let (first, last) = sweep.rows.split_at(sweep.rows.len() / 2);
    let max_of = |rows: &[latstretch_core::optimizer::SweepRow]| rows.iter().fold(0.0_f64, |m, row| m.max(row.deviation));
    let (first_max, last_max) = (max_of(first), max_of(last));
    let exponent = sweep.exponent;
    let exponent_limit = -1.0 / 6.0 + DEVIATION_EXPONENT_SLACK;
    let elapsed = start.elapsed();
    let pass = late <= DEVIATION_LIMIT
        && last_max < first_max
        && exponent.is_some_and(|e| e <= exponent_limit)
        && elapsed < SWEEP_TIME_LIMIT;
    outcome(
        pass,
        format!(
            "max deviation for r >= 100: {late:.4} (limit {DEVIATION_LIMIT}); first/last half max {first_max:.4}/{last_max:.4}; exponent {} (limit {exponent_limit:.4}); {elapsed:.2?}",
            exponent.map_or("n/a".to_string(), |e| format!("{e:.4}"))
        ),
    )
}

fn optimality_certificates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let disk = ConvexBody::disk(0.5).unwrap();
    let mut beaten = 0;
    for _ in 0..20 {
        let r = rng.gen_range(20.0..200.0);
        let max = optimize_d2_exact(&disk, r, Objective::MaximizePositive, None).unwrap();
        let min = optimize_d2_exact(&disk, r, Objective::MinimizeNonnegative, None).unwrap();
        for _ in 0..RANDOM_STRETCHES {
            let a = random_stretch(&mut rng, 2);
            if Objective::MaximizePositive.evaluate(&disk, &a, r).unwrap() > max.count {
                beaten += 1;
            }
            if Objective::MinimizeNonnegative.evaluate(&disk, &a, r).unwrap() < min.count {
                beaten += 1;
            }
        }
    }
    outcome(beaten == 0, format!("{beaten} of 2 x 20 x {RANDOM_STRETCHES} random stretches beat the optimum"))
}

fn amgm() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut negative = 0;
    let mut quadratic_failures = 0;
    let mut near = 0;
    for _ in 0..1000 {
        let d = rng.gen_range(2..=5);
        let a = random_stretch(&mut rng, d);
        let gap = amgm_gap(&a).unwrap();
        if gap < 0.0 {
            negative += 1;
        }
        let dev = a.deviation_from_identity();
        if dev <= 0.5 {
            near += 1;
            if gap < dev * dev / 8.0 {
                quadratic_failures += 1;
            }
        }
    }
    let id_gap = amgm_gap(&DiagonalStretch::identity(3)).unwrap();
    outcome(
        negative == 0 && quadratic_failures == 0 && id_gap == 0.0,
        format!("negative gaps {negative}; quadratic bound failures {quadratic_failures} of {near} near Id; gap(Id) = {id_gap}"),
    )
}

fn sandwich() -> Outcome {
    let bump = Mollifier::bump(2, 0.1).unwrap();
    let mut cells = 0;
    let mut failures = Vec::new();
    // Both the unit disk (c = 1) and the balanced disk (c = 2).
    for radius in [1.0, 0.5] {
        let sb = SpectralBody::new(ConvexBody::disk(radius).unwrap()).unwrap();
        for stretch in [DiagonalStretch::identity(2), DiagonalStretch::unimodular(vec![2.0, 0.5]).unwrap()] {
            for r in [5.0, 10.0, 25.0, 50.0] {
                for delta in [0.05, 0.1, 0.2] {
                    cells += 1;
                    let rep = sandwich_check(&sb, &stretch, r, &bump.with_delta(delta).unwrap(), None).unwrap();
                    if !rep.pass {
                        failures.push(format!("disk {radius} A {:?} r {r} delta {delta}", stretch.entries()));
                    }
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{} of {cells} cells failed {failures:?}", failures.len()))
}

fn decay() -> Outcome {
    let sb = SpectralBody::new(ConvexBody::disk(1.0).unwrap()).unwrap();
    let max = decay_check(&sb, &default_shells(), 64).unwrap();
    outcome(max <= DECAY_LIMIT, format!("max |xi|^(3/2) |chi_hat(xi)| on [1, 100] = {max:.6} (limit {DECAY_LIMIT})"))
}

fn weyl() -> Outcome {
    let w = weyl_cuboid_count(&[1.0, 1.0], 25.0 * PI * PI).unwrap();
    let target = 25.0 * PI / 4.0 - 5.0;
    let errors: Vec<f64> = (1..=20)
        .map(|i| {
            let r = 10.0 * i as f64;
            let w = weyl_cuboid_count(&[1.0, 1.0], PI * PI * r * r).unwrap();
            (w.exact as f64 - w.two_term).abs() / w.exact as f64
        })
        .collect();
    let first = errors[..10].iter().fold(0.0_f64, |m, &e| m.max(e));
    let last = errors[10..].iter().fold(0.0_f64, |m, &e| m.max(e));
    outcome(
        w.exact == 15 && (w.two_term - target).abs() <= WEYL_TWO_TERM_TOL && last < first,
        format!(
            "exact {} (want 15); two_term {:.6} vs {target:.6} (tol {WEYL_TWO_TERM_TOL:e}); relative error max first/last half {first:.3e}/{last:.3e}",
            w.exact, w.two_term
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("fast counts equal brute force", oracle_equivalence),
        ("all = 2^d positive + hyperplane union", decomposition_identity),
        ("Gauss circle error", gauss_circle),
        ("two-term error shape in the plane", error_shape_planar),
        ("hyperplane count", hyperplane_count),
        ("balancing", balancing),
        ("optimal stretch convergence", optimal_stretch_convergence),
        ("optimality certificates", optimality_certificates),
        ("AM-GM gap", amgm),
        ("smoothed-count sandwich", sandwich),
        ("indicator transform decay", decay),
        ("Weyl law for the square", weyl),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = run();
        println!("[{:02}] {} {name}: {}", i + 1, if result.pass { "PASS" } else { "FAIL" }, result.detail);
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
