use super::*;
use crate::quadrature::{integrate, QuadOptions};
use alloc::vec;

fn opts() -> QuadOptions {
    QuadOptions { rel_tol: 1e-12, abs_tol: 1e-14, max_intervals: 4000 }
}

fn balanced_disk() -> SpectralBody {
    SpectralBody::new(ConvexBody::disk(0.5).unwrap()).unwrap()
}

#[test]
fn ball_transform_at_zero_and_even() {
    assert!((ball_indicator_ft(2, &[0.0, 0.0]).unwrap() - PI).abs() < 1e-15);
    assert!((ball_indicator_ft(3, &[0.0, 0.0, 0.0]).unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
    for xi in [[0.3, -1.7], [2.5, 0.1]] {
        let neg = [-xi[0], -xi[1]];
        assert_eq!(ball_indicator_ft(2, &xi).unwrap(), ball_indicator_ft(2, &neg).unwrap());
    }
    assert!(matches!(ball_indicator_ft(4, &[0.0; 4]), Err(Error::NotImplemented(_))));
    assert!(ball_indicator_ft(2, &[0.0; 3]).is_err());
}

#[test]
fn disk_transform_matches_quadrature() {
    // int_{|x|<=1} cos(2 pi x_1) dx = 2 int_{-1}^{1} cos(2 pi u) sqrt(1-u^2) du.
    let q = integrate(|u| 2.0 * libm::cos(2.0 * PI * u) * libm::sqrt(1.0 - u * u), -1.0, 1.0, opts()).unwrap();
    let v = ball_indicator_ft(2, &[1.0, 0.0]).unwrap();
    assert!((v - q.value).abs() < 1e-6);
    assert!((v - bessel_j1(2.0 * PI)).abs() < 1e-15);
}

#[test]
fn ball_transform_series_joins_closed_form() {
    for s in [0.079, 0.0795, 0.0796, 0.08] {
        let x = 2.0 * PI * s;
        let closed = (libm::sin(x) - x * libm::cos(x)) / (2.0 * PI * PI * s * s * s);
        assert!((ball_ft_radial(3, s) - closed).abs() < 1e-12);
    }
    // Ball in R^3 against a radial quadrature: 4 pi int_0^1 sinc(2 pi s rho) rho^2.
    let s: f64 = 1.3;
    let q = integrate(|rho| 4.0 * PI * libm::sin(2.0 * PI * s * rho) / (2.0 * PI * s) * rho, 0.0, 1.0, opts()).unwrap();
    assert!((ball_ft_radial(3, s) - q.value).abs() < 1e-10);
}

#[test]
fn spectral_body_basics() {
    let sb = SpectralBody::new(ConvexBody::p_ellipsoid(2.0, vec![2.0, 0.5]).unwrap()).unwrap();
    assert!((sb.transform(&[0.0, 0.0]) - sb.body().volume()).abs() < 1e-10);
    assert_eq!(sb.transform(&[0.4, -1.1]), sb.transform(&[-0.4, 1.1]));
    assert!(matches!(
        SpectralBody::new(ConvexBody::p_ellipsoid(3.0, vec![1.0, 1.0]).unwrap()),
        Err(Error::NotImplemented(_))
    ));
}

#[test]
fn decay_examples() {
    let unit = SpectralBody::new(ConvexBody::disk(1.0).unwrap()).unwrap();
    let m = unit.measured_decay();
    assert!(m <= 1.0, "{m}");
    // Radius rho: chi_hat(xi) = rho^2 chi_hat(rho xi), so on |xi| >= 1/rho the
    // normalized max scales as rho^{(d-1)/2}.
    let rho: f64 = 3.0;
    let big = SpectralBody::new(ConvexBody::disk(rho).unwrap()).unwrap();
    let shells: Vec<f64> = (0..200).map(|i| libm::pow(10.0, 1.0 + i as f64 / 199.0)).collect();
    let scaled: Vec<f64> = shells.iter().map(|s| s * rho).collect();
    let a = decay_check(&big, &shells, 64).unwrap();
    let b = decay_check(&unit, &scaled, 64).unwrap();
    assert!((a / b - libm::sqrt(rho)).abs() < 1e-9 * a);
    let ellipse = SpectralBody::new(ConvexBody::p_ellipsoid(2.0, vec![2.0, 0.5]).unwrap()).unwrap();
    assert!(ellipse.measured_decay().is_finite() && ellipse.measured_decay() < 10.0);
    let ball = SpectralBody::new(ConvexBody::ball(3, 1.0).unwrap()).unwrap();
    assert!(ball.measured_decay() <= 1.0);
    assert!(decay_check(&unit, &[0.5], 8).is_err());
}

#[test]
fn zero_frequency_term() {
    let sb = balanced_disk();
    let m = Mollifier::bump(2, 0.1).unwrap();
    let id = DiagonalStretch::identity(2);
    let terms = lattice_terms(&sb, &id, 10.0, &m, 1e-3);
    assert_eq!(terms.len(), 1);
    assert!((terms[0] - sb.body().volume() * 100.0).abs() < 1e-10 * terms[0]);
}

/// `sum_n (chi_r * phi_delta)(n)` for the disk of radius `big_r` centered at 0:
/// interior points contribute 1; points near the circle get the mollifier
/// mass of their radius-`big_r` disk section.
fn real_space_sum(m: &Mollifier, big_r: f64) -> f64 {
    let delta = m.delta();
    let reach = libm::ceil(big_r + delta) as i64;
    let mut total = 0.0;
    for i in -reach..=reach {
        for j in -reach..=reach {
            let p = libm::sqrt((i * i + j * j) as f64);
            if p <= big_r - delta {
                total += 1.0;
            } else if p < big_r + delta {
                let f = |rho: f64| {
                    if rho == 0.0 {
                        return 0.0;
                    }
                    let kappa = ((p * p + rho * rho - big_r * big_r) / (2.0 * rho * p)).clamp(-1.0, 1.0);
                    m.scaled_density(rho) * rho * 2.0 * libm::acos(kappa)
                };
                total += integrate(f, 0.0, delta, opts()).unwrap().value;
            }
        }
    }
    total
}

#[test]
fn mollified_sum_matches_real_space() {
    let sb = balanced_disk();
    let id = DiagonalStretch::identity(2);
    let m = Mollifier::bump(2, 0.1).unwrap();
    let smooth = mollified_count(&sb, &id, 10.0, &m, Some(50.0)).unwrap();
    let oracle = real_space_sum(&m, 5.0);
    assert!((smooth.value - oracle).abs() <= smooth.truncation_bound, "{} {} {}", smooth.value, oracle, smooth.truncation_bound);
    let auto = mollified_count(&sb, &id, 10.0, &m, None).unwrap();
    assert!(auto.truncation_bound <= AUTO_TAIL_TARGET);
    assert!((auto.value - oracle).abs() <= auto.truncation_bound + 1e-8);
}

#[test]
fn width_precondition() {
    let sb = balanced_disk();
    let id = DiagonalStretch::identity(2);
    // c = 2, so delta must stay below r / 3.
    let m = Mollifier::bump(2, 1.0).unwrap();
    assert!(matches!(mollified_count(&sb, &id, 3.0, &m, Some(10.0)), Err(Error::Precondition(_))));
    assert!(mollified_count(&sb, &id, 3.1, &m, Some(10.0)).is_ok());
    assert!(matches!(sandwich_check(&sb, &id, 2.9, &m, Some(10.0)), Err(Error::Precondition(_))));
    let g = Mollifier::gaussian(2, 0.1).unwrap();
    assert!(sandwich_check(&sb, &id, 10.0, &g, None).is_err());
    assert!(mollified_count(&sb, &id, 10.0, &g, Some(30.0)).is_ok());
}

#[test]
fn sandwich_balanced_disk() {
    let sb = balanced_disk();
    let m = Mollifier::bump(2, 0.1).unwrap();
    let id = DiagonalStretch::identity(2);
    let mut last_width = f64::INFINITY;
    for delta in [0.5, 0.2, 0.1, 0.05] {
        let rep = sandwich_check(&sb, &id, 10.0, &m.with_delta(delta).unwrap(), None).unwrap();
        assert_eq!(rep.exact, 81);
        assert!(rep.pass, "{rep:?}");
        let width = rep.upper - rep.lower;
        assert!(width < last_width);
        last_width = width;
    }
    let a = DiagonalStretch::unimodular(vec![2.0, 0.5]).unwrap();
    let rep = sandwich_check(&sb, &a, 10.0, &m, None).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn smoothed_value_within_shell_of_exact() {
    let sb = balanced_disk();
    let m = Mollifier::bump(2, 0.1).unwrap();
    let c = sb.body().sandwich_constant();
    for (a, r) in [(1.0, 10.0), (1.3, 17.0), (2.0, 23.5)] {
        let stretch = DiagonalStretch::planar(a).unwrap();
        for delta in [0.05, 0.1, 0.2] {
            let md = m.with_delta(delta).unwrap();
            let v = mollified_count(&sb, &stretch, r, &md, None).unwrap();
            let exact = counting::count_all(sb.body(), &stretch, r).unwrap() as f64;
            let shell = (counting::count_all(sb.body(), &stretch, r + c * delta).unwrap()
                - counting::count_all(sb.body(), &stretch, r - c * delta).unwrap()) as f64;
            assert!((v.value - exact).abs() <= v.truncation_bound + shell, "a {a} r {r} delta {delta}");
        }
    }
}
