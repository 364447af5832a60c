//! Smoothed lattice counting by Poisson summation.
//!
//! For `f = chi_{A,r} * phi_{A,delta}` the lattice sum `sum_n f(n)` equals
//! `sum_n r^d chi_hat(r A n) phi_hat(delta A n)`. Truncating at `|A n| <= K`
//! leaves a tail bounded through `|chi_hat(xi)| <= M |xi|^{-(d+1)/2}` and
//! the mollifier's polynomial decay. Since
//! `chi_{A,r-c delta} * phi <= chi_{A,r} <= chi_{A,r+c delta} * phi`
//! pointwise, the two smoothed sums bracket the exact count.

mod mollifier;

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::counting;
use crate::geometry::{BodyKind, ConvexBody, DiagonalStretch};
use crate::special::{bessel_j1, pairwise_sum, powf, unit_ball_volume, unit_sphere_area};
use crate::{Error, Result};

pub use mollifier::{Mollifier, MollifierKind, MAX_ORDER, TABLE_MAX, TABLE_STEP};

/// Added to each side of the sandwich to absorb rounding.
pub const SANDWICH_GUARD: f64 = 1e-9;
/// Shells `|xi|` sampled when measuring the decay constant.
pub const DECAY_SHELLS: usize = 400;
pub const DECAY_DIRECTIONS: usize = 64;
/// Decay-order range searched for the tightest tail bound.
const ORDERS: core::ops::RangeInclusive<usize> = 2..=MAX_ORDER;
/// Automatic truncation stops growing `K` past this many summed terms.
pub const AUTO_TERM_LIMIT: f64 = 2e7;
/// Target tail bound for the automatic truncation radius.
pub const AUTO_TAIL_TARGET: f64 = 0.05;

/// Fourier transform of the unit-ball indicator in `R^d` at `xi`:
/// `|xi|^{-d/2} J_{d/2}(2 pi |xi|)`, equal to the ball volume at 0.
pub fn ball_indicator_ft(d: usize, xi: &[f64]) -> Result<f64> {
    if xi.len() != d {
        return Err(Error::invalid(alloc::format!("frequency has {} coordinates, expected {d}", xi.len())));
    }
    if !(d == 2 || d == 3) {
        return Err(Error::NotImplemented(alloc::format!("ball transform is implemented for d = 2, 3, got d = {d}")));
    }
    let s = libm::sqrt(xi.iter().map(|v| v * v).sum());
    Ok(ball_ft_radial(d, s))
}

fn ball_ft_radial(d: usize, s: f64) -> f64 {
    let x = 2.0 * PI * s;
    match d {
        2 => {
            if x < 1e-8 {
                PI * (1.0 - x * x / 8.0)
            } else {
                bessel_j1(x) / s
            }
        }
        _ => {
            if x < 0.5 {
                // (sin x - x cos x) = sum_k (-1)^(k+1) 2k x^(2k+1) / (2k+1)!, divided by x^3.
                let x2 = x * x;
                let mut term = 1.0 / 3.0;
                let mut acc = term;
                for k in 2..12 {
                    let kf = k as f64;
                    term *= -x2 * kf / ((kf - 1.0) * (2.0 * kf) * (2.0 * kf + 1.0));
                    acc += term;
                }
                4.0 * PI * acc
            } else {
                (libm::sin(x) - x * libm::cos(x)) / (2.0 * PI * PI * s * s * s)
            }
        }
    }
}

/// An ellipsoid with its closed-form indicator transform and measured
/// decay constant.
#[derive(Debug, Clone)]
pub struct SpectralBody {
    body: ConvexBody,
    axes: Vec<f64>,
    det: f64,
    /// Max of `|xi|^{(d+1)/2} |chi_hat(xi)|` over the default shells.
    decay_max: f64,
}

impl SpectralBody {
    /// Only ellipsoids (`p = 2`) in `d = 2, 3` have a closed-form transform.
    pub fn new(body: ConvexBody) -> Result<Self> {
        let axes = match body.kind() {
            BodyKind::PEllipsoid { p, semi_axes } if *p == 2.0 => semi_axes.clone(),
            _ => return Err(Error::NotImplemented("Fourier transforms are implemented for ellipsoids (p = 2) only".into())),
        };
        let d = body.dimension();
        if !(d == 2 || d == 3) {
            return Err(Error::NotImplemented(alloc::format!("Fourier transforms need d = 2, 3, got d = {d}")));
        }
        let det = axes.iter().product();
        let mut sb = SpectralBody { body, axes, det, decay_max: 0.0 };
        sb.decay_max = decay_check(&sb, &default_shells(), DECAY_DIRECTIONS)?;
        Ok(sb)
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    /// `chi_hat(xi) = det(E) chi_hat_ball(E xi)` for `Omega = E B`.
    pub fn transform(&self, xi: &[f64]) -> f64 {
        let s2: f64 = xi.iter().zip(&self.axes).map(|(x, c)| (x * c) * (x * c)).sum();
        self.det * ball_ft_radial(self.dimension(), libm::sqrt(s2))
    }

    /// Measured `max |xi|^{(d+1)/2} |chi_hat(xi)|` on `|xi| in [1, 100]`.
    pub fn measured_decay(&self) -> f64 {
        self.decay_max
    }

    /// Decay constant used in tail bounds: the measured value doubled.
    pub fn decay_constant(&self) -> f64 {
        2.0 * self.decay_max
    }
}

/// `DECAY_SHELLS` log-spaced radii in `[1, 100]`.
pub fn default_shells() -> Vec<f64> {
    (0..DECAY_SHELLS).map(|i| libm::pow(100.0, i as f64 / (DECAY_SHELLS - 1) as f64)).collect()
}

/// `max |xi|^{(d+1)/2} |chi_hat(xi)|` over the given shells, sampling
/// `samples_per_shell` directions on each (evenly spaced angles in the
/// plane, a Fibonacci lattice on the sphere).
pub fn decay_check(body: &SpectralBody, shells: &[f64], samples_per_shell: usize) -> Result<f64> {
    if shells.iter().any(|&s| !(1.0..=1e3).contains(&s)) {
        return Err(Error::invalid("decay shells must lie in [1, 1000]"));
    }
    if samples_per_shell == 0 {
        return Err(Error::invalid("need at least one direction per shell"));
    }
    let d = body.dimension();
    let dirs = directions(d, samples_per_shell);
    let power = (d as f64 + 1.0) / 2.0;
    let mut max = 0.0_f64;
    let mut xi = alloc::vec![0.0; d];
    for &s in shells {
        let scale = powf(s, power);
        for u in &dirs {
            for (x, c) in xi.iter_mut().zip(u) {
                *x = s * c;
            }
            max = max.max(scale * body.transform(&xi).abs());
        }
    }
    Ok(max)
}

fn directions(d: usize, m: usize) -> Vec<Vec<f64>> {
    if d == 2 {
        return (0..m)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / m as f64;
                alloc::vec![libm::cos(th), libm::sin(th)]
            })
            .collect();
    }
    let golden = PI * (3.0 - libm::sqrt(5.0));
    (0..m)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
            let rho = libm::sqrt(1.0 - z * z);
            let th = golden * k as f64;
            alloc::vec![rho * libm::cos(th), rho * libm::sin(th), z]
        })
        .collect()
}

/// A truncated smoothed lattice sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifiedCount {
    pub value: f64,
    /// Rigorous bound on the omitted terms `|A n| > K`, given the decay
    /// constants.
    pub truncation_bound: f64,
    pub truncation_radius: f64,
    /// Decay order of the mollifier used in the bound.
    pub order: usize,
    pub terms: usize,
}

fn check_common(sb: &SpectralBody, stretch: &DiagonalStretch, r: f64, m: &Mollifier) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid(alloc::format!("radius must be positive and finite, got {r}")));
    }
    stretch.check_dimension(sb.dimension())?;
    stretch.check_unimodular()?;
    if m.dimension() != sb.dimension() {
        return Err(Error::invalid("mollifier and body dimensions differ"));
    }
    Ok(())
}

fn check_width(sb: &SpectralBody, r: f64, delta: f64, strict: bool) -> Result<()> {
    let c = sb.body.sandwich_constant();
    let limit = r / (1.0 + c);
    let ok = if strict { delta < limit } else { delta <= limit };
    if ok {
        Ok(())
    } else {
        Err(Error::precondition(alloc::format!(
            "mollifier width {delta} must satisfy delta {} r/(1 + c) = {limit} (c = {c})",
            if strict { "<" } else { "<=" }
        )))
    }
}

/// `sum_{|A n| <= K} r^d chi_hat(r A n) phi_hat(delta A n)` with a tail
/// bound. `K = None` picks the radius automatically.
pub fn mollified_count(
    sb: &SpectralBody,
    stretch: &DiagonalStretch,
    r: f64,
    mollifier: &Mollifier,
    truncation: Option<f64>,
) -> Result<MollifiedCount> {
    check_common(sb, stretch, r, mollifier)?;
    check_width(sb, r, mollifier.delta(), true)?;
    smoothed_sum(sb, stretch, r, mollifier, truncation)
}

fn smoothed_sum(
    sb: &SpectralBody,
    stretch: &DiagonalStretch,
    r: f64,
    mollifier: &Mollifier,
    truncation: Option<f64>,
) -> Result<MollifiedCount> {
    let k = match truncation {
        Some(k) if k.is_finite() && k >= 1.0 => k,
        Some(k) => return Err(Error::invalid(alloc::format!("truncation radius must be at least 1, got {k}"))),
        None => auto_truncation(sb, stretch, r, mollifier),
    };
    let (bound, order) = tail_bound(sb, stretch, r, mollifier, k);
    let terms = lattice_terms(sb, stretch, r, mollifier, k);
    Ok(MollifiedCount { value: pairwise_sum(&terms), truncation_bound: bound, truncation_radius: k, order, terms: terms.len() })
}

/// Terms over the nonnegative orthant, each weighted by its number of sign
/// images, in lexicographic order.
fn lattice_terms(sb: &SpectralBody, stretch: &DiagonalStretch, r: f64, m: &Mollifier, k: f64) -> Vec<f64> {
    let d = sb.dimension();
    let a = stretch.entries();
    let rd = powf(r, d as f64);
    let bounds: Vec<i64> = a.iter().map(|aj| libm::floor(k / aj) as i64).collect();
    let mut terms = Vec::new();
    let mut n = alloc::vec![0i64; d];
    let mut xi = alloc::vec![0.0; d];
    loop {
        let norm2: f64 = n.iter().zip(a).map(|(&v, aj)| (v as f64 * aj) * (v as f64 * aj)).sum();
        if norm2 <= k * k {
            for ((x, &v), aj) in xi.iter_mut().zip(&n).zip(a) {
                *x = r * aj * v as f64;
            }
            let weight = (1u64 << n.iter().filter(|&&v| v != 0).count()) as f64;
            terms.push(weight * rd * sb.transform(&xi) * m.scaled_transform(libm::sqrt(norm2)));
        }
        // Odometer over the box, last axis fastest; skip rows past the ball.
        let mut j = d;
        loop {
            if j == 0 {
                return terms;
            }
            j -= 1;
            let partial: f64 = n[..j].iter().zip(a).map(|(&v, aj)| (v as f64 * aj) * (v as f64 * aj)).sum();
            let next = (n[j] + 1) as f64 * a[j];
            if n[j] < bounds[j] && partial + next * next <= k * k {
                n[j] += 1;
                for v in &mut n[j + 1..] {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// Bound on `sum_{|A n| > K} |r^d chi_hat(r A n) phi_hat(delta A n)|`.
///
/// Each term is at most `C0 |A n|^{-q}` with `q = (d+1)/2 + N` and
/// `C0 = r^d M r^{-(d+1)/2} M_N delta^{-N}`. The cells `A n + A[-1/2,1/2]^d`
/// have volume 1 and half-diameter `rho`, so on the cell of `y = A n`,
/// `|y|^{-q} <= (1 + rho/K)^q |x|^{-q}`, and the sum is at most
/// `C0 (1 + rho/K)^q omega_d (K - rho)^{d-q} / (q - d)`. Minimized over `N`.
fn tail_bound(sb: &SpectralBody, stretch: &DiagonalStretch, r: f64, m: &Mollifier, k: f64) -> (f64, usize) {
    let d = sb.dimension() as f64;
    let rho = 0.5 * libm::sqrt(stretch.entries().iter().map(|a| a * a).sum());
    if k <= rho || r * k < 1.0 {
        return (f64::INFINITY, *ORDERS.start());
    }
    let omega = unit_sphere_area(sb.dimension());
    let chi = sb.decay_constant();
    let mut best = (f64::INFINITY, *ORDERS.start());
    for order in ORDERS {
        let n = order as f64;
        let q = (d + 1.0) / 2.0 + n;
        // Work in logs; delta^{-N} and (K - rho)^{d-q} span many decades.
        let log = d * libm::log(r) + libm::log(chi) - (d + 1.0) / 2.0 * libm::log(r)
            + libm::log(m.decay_constant(order))
            - n * libm::log(m.delta())
            + q * libm::log1p(rho / k)
            + libm::log(omega)
            + (d - q) * libm::log(k - rho)
            - libm::log(q - d);
        let bound = libm::exp(log);
        if bound < best.0 {
            best = (bound, order);
        }
    }
    best
}

/// Smallest `K` on a geometric ladder from `4/delta` whose tail bound is
/// below [`AUTO_TAIL_TARGET`], capped by [`AUTO_TERM_LIMIT`] summed terms.
pub fn auto_truncation(sb: &SpectralBody, stretch: &DiagonalStretch, r: f64, m: &Mollifier) -> f64 {
    let d = sb.dimension();
    let mut k = (4.0 / m.delta()).max(1.0);
    loop {
        let terms = unit_ball_volume(d) * powf(k + 1.0, d as f64) / powf(2.0, d as f64);
        if tail_bound(sb, stretch, r, m, k).0 <= AUTO_TAIL_TARGET || terms * powf(1.25, d as f64) > AUTO_TERM_LIMIT {
            return k;
        }
        k *= 1.25;
    }
}

/// Outcome of bracketing the exact count between smoothed sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub r: f64,
    pub delta: f64,
    pub lower: f64,
    pub exact: u64,
    pub upper: f64,
    pub pass: bool,
    /// Larger of the two truncation bounds.
    pub truncation_bound: f64,
}

/// `lower = N(r - c delta) - bound`, `upper = N(r + c delta) + bound` with
/// `c = 1/inradius`, against `exact = count_all(r)`. Needs the compactly
/// supported bump and `delta <= r/(1 + c)`.
pub fn sandwich_check(
    sb: &SpectralBody,
    stretch: &DiagonalStretch,
    r: f64,
    mollifier: &Mollifier,
    truncation: Option<f64>,
) -> Result<SandwichReport> {
    check_common(sb, stretch, r, mollifier)?;
    if mollifier.kind() != MollifierKind::Bump {
        return Err(Error::invalid("the sandwich needs the compactly supported bump mollifier"));
    }
    let delta = mollifier.delta();
    check_width(sb, r, delta, false)?;
    let c = sb.body.sandwich_constant();
    let inner = smoothed_sum(sb, stretch, r - c * delta, mollifier, truncation)?;
    let outer = smoothed_sum(sb, stretch, r + c * delta, mollifier, truncation)?;
    let exact = counting::count_all(&sb.body, stretch, r)?;
    let lower = inner.value - inner.truncation_bound - SANDWICH_GUARD;
    let upper = outer.value + outer.truncation_bound + SANDWICH_GUARD;
    let e = exact as f64;
    Ok(SandwichReport {
        r,
        delta,
        lower,
        exact,
        upper,
        pass: lower <= e && e <= upper,
        truncation_bound: inner.truncation_bound.max(outer.truncation_bound),
    })
}

#[cfg(test)]
mod tests;
