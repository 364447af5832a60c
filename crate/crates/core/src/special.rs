//! Special functions and small numerical helpers shared by the modules.
//!
//! Gamma and the integer-order Bessel functions come from `libm`; the
//! half-integer order needed for three-dimensional balls is elementary.

use core::f64::consts::PI;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Volume of the Euclidean unit ball in `R^k`, `pi^(k/2) / Gamma(k/2 + 1)`.
///
/// `k = 0` gives 1, matching the convention for a point.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => libm::pow(PI, k as f64 / 2.0) / gamma(k as f64 / 2.0 + 1.0),
    }
}

/// Surface measure of the unit sphere `S^(k-1)`, equal to `k * v_k`.
pub fn unit_sphere_area(k: usize) -> f64 {
    k as f64 * unit_ball_volume(k)
}

/// Volume of the unit `l^p` ball in `R^k`: `2^k Gamma(1+1/p)^k / Gamma(1+k/p)`.
pub fn p_ball_volume(k: usize, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let k_f = k as f64;
    if p == 2.0 {
        return unit_ball_volume(k);
    }
    let log = k_f * core::f64::consts::LN_2 + k_f * ln_gamma(1.0 + 1.0 / p) - ln_gamma(1.0 + k_f / p);
    libm::exp(log)
}

pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

pub fn bessel_j1(x: f64) -> f64 {
    libm::j1(x)
}

/// `J_{3/2}(x)` from its elementary closed form; series near zero.
pub fn bessel_j3_2(x: f64) -> f64 {
    let ax = x.abs();
    let val = if ax < 1e-2 {
        // sqrt(2/(pi x)) * (x^2/3 - x^4/30 + x^6/840)
        let x2 = ax * ax;
        libm::sqrt(2.0 * ax / PI) * (1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0) * ax
    } else {
        libm::sqrt(2.0 / (PI * ax)) * (libm::sin(ax) / ax - libm::cos(ax))
    };
    if x < 0.0 {
        -val
    } else {
        val
    }
}

/// Sum in a fixed binary-tree order.
///
/// The result depends only on the order of `values`, so splitting work
/// across threads and concatenating per-chunk term lists gives the same
/// bits as a serial pass.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut s = 0.0;
        for v in values {
            s += v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Positive real `x^y` for `x >= 0`.
#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
