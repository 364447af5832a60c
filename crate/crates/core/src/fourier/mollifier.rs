//! Radial mollifiers `phi` on `R^d` and their Fourier transforms.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::quadrature::{integrate, QuadOptions};
use crate::special::{bessel_j0, powf, unit_sphere_area};
use crate::{Error, Result};

/// Grid step of the tabulated bump transform.
pub const TABLE_STEP: f64 = 1.0 / 64.0;
/// Frequencies above this are integrated directly.
pub const TABLE_MAX: f64 = 64.0;
/// Largest decay order with a precomputed constant.
pub const MAX_ORDER: usize = 8;
const INTERP_POINTS: usize = 8;
const PANELS: usize = 48;
const PANEL_NODES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MollifierKind {
    /// `exp(-1/(1 - |x|^2))` on the unit ball, normalized.
    Bump,
    /// Centered Gaussian with the bump's per-coordinate variance. Not
    /// compactly supported.
    Gaussian,
}

/// `phi_delta(x) = delta^{-d} phi(x / delta)` with `int phi = 1`.
#[derive(Debug, Clone)]
pub struct Mollifier {
    kind: MollifierKind,
    delta: f64,
    profile: Arc<Profile>,
}

#[derive(Debug)]
struct Profile {
    dimension: usize,
    /// `int exp(-1/(1-|x|^2)) dx` over the unit ball.
    norm: f64,
    /// Per-coordinate second moment of the normalized bump.
    sigma2: f64,
    /// Bump transform at `k * TABLE_STEP`.
    table: Vec<f64>,
    /// `max(1, 2 sup_{s >= 1} |phi_hat(s)| s^N)` for `N = 0..=MAX_ORDER`.
    decay: [f64; MAX_ORDER + 1],
}

fn quad_opts() -> QuadOptions {
    QuadOptions { rel_tol: 1e-12, abs_tol: 1e-16, max_intervals: 4000 }
}

fn bump(rho: f64) -> f64 {
    if rho >= 1.0 {
        0.0
    } else {
        libm::exp(-1.0 / (1.0 - rho * rho))
    }
}

/// Unnormalized radial transform of the bump at `|xi| = s`.
fn bump_transform_raw(d: usize, s: f64) -> Result<f64> {
    let w = 2.0 * PI * s;
    let q = match d {
        2 => integrate(|rho| bump(rho) * bessel_j0(w * rho) * rho, 0.0, 1.0, quad_opts())?.value * 2.0 * PI,
        _ => {
            let sinc = |x: f64| if x == 0.0 { 1.0 } else { libm::sin(x) / x };
            integrate(|rho| bump(rho) * sinc(w * rho) * rho * rho, 0.0, 1.0, quad_opts())?.value * 4.0 * PI
        }
    };
    Ok(q)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = libm::cos(PI * (i as f64 - 0.25) / (n as f64 + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite Gauss-Legendre rule on `[0, 1]` with the radial weight
/// `bump(rho) rho^{d-1}` folded into the weights.
fn radial_rule(d: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(PANEL_NODES);
    let h = 1.0 / PANELS as f64;
    let mut rule = Vec::with_capacity(PANELS * PANEL_NODES);
    for p in 0..PANELS {
        let mid = (p as f64 + 0.5) * h;
        for &(x, w) in &base {
            let rho = mid + 0.5 * h * x;
            rule.push((rho, 0.5 * h * w * bump(rho) * libm::pow(rho, (d - 1) as f64)));
        }
    }
    rule
}

/// Unnormalized radial transform from a precomputed rule.
fn bump_transform_rule(d: usize, rule: &[(f64, f64)], s: f64) -> f64 {
    let w = 2.0 * PI * s;
    if d == 2 {
        2.0 * PI * rule.iter().map(|&(rho, wt)| wt * bessel_j0(w * rho)).sum::<f64>()
    } else {
        let sinc = |x: f64| if x == 0.0 { 1.0 } else { libm::sin(x) / x };
        4.0 * PI * rule.iter().map(|&(rho, wt)| wt * sinc(w * rho)).sum::<f64>()
    }
}

impl Profile {
    fn build(d: usize) -> Result<Self> {
        let omega = unit_sphere_area(d);
        let moment = |k: i32| integrate(|rho| bump(rho) * libm::pow(rho, k as f64), 0.0, 1.0, quad_opts());
        let norm = omega * moment(d as i32 - 1)?.value;
        let sigma2 = omega * moment(d as i32 + 1)?.value / norm / d as f64;
        let n = libm::round(TABLE_MAX / TABLE_STEP) as usize;
        let rule = radial_rule(d);
        let table: Vec<f64> = (0..=n).map(|k| bump_transform_rule(d, &rule, k as f64 * TABLE_STEP) / norm).collect();
        let mut profile = Profile { dimension: d, norm, sigma2, table, decay: [1.0; MAX_ORDER + 1] };
        // Sup over the table range plus a coarse direct sweep beyond it.
        let start = libm::round(1.0 / TABLE_STEP) as usize;
        let mut samples: Vec<(f64, f64)> =
            (start..=n).map(|k| (k as f64 * TABLE_STEP, profile.table[k].abs())).collect();
        let mut s = TABLE_MAX * 1.1;
        while s <= 512.0 {
            samples.push((s, (bump_transform_raw(d, s)? / norm).abs()));
            s *= 1.1;
        }
        for (order, slot) in profile.decay.iter_mut().enumerate() {
            let sup = samples.iter().fold(0.0_f64, |m, &(s, v)| m.max(v * libm::pow(s, order as f64)));
            *slot = (2.0 * sup).max(1.0);
        }
        Ok(profile)
    }

    fn interpolate(&self, s: f64) -> f64 {
        let x = s / TABLE_STEP;
        let n = self.table.len();
        let half = INTERP_POINTS / 2;
        let base = (libm::floor(x) as usize).saturating_sub(half - 1).min(n - INTERP_POINTS);
        let mut acc = 0.0;
        for i in 0..INTERP_POINTS {
            let xi = (base + i) as f64;
            let mut w = 1.0;
            for j in 0..INTERP_POINTS {
                if j != i {
                    let xj = (base + j) as f64;
                    w *= (x - xj) / (xi - xj);
                }
            }
            acc += w * self.table[base + i];
        }
        acc
    }
}

impl Mollifier {
    /// `d` must be 2 or 3 and `delta > 0`. Building a bump tabulates its
    /// transform once; reuse it across widths with [`Mollifier::with_delta`].
    pub fn new(kind: MollifierKind, d: usize, delta: f64) -> Result<Self> {
        if !(d == 2 || d == 3) {
            return Err(Error::NotImplemented(alloc::format!("mollifiers are implemented for d = 2, 3, got d = {d}")));
        }
        check_delta(delta)?;
        Ok(Mollifier { kind, delta, profile: Arc::new(Profile::build(d)?) })
    }

    pub fn bump(d: usize, delta: f64) -> Result<Self> {
        Self::new(MollifierKind::Bump, d, delta)
    }

    pub fn gaussian(d: usize, delta: f64) -> Result<Self> {
        Self::new(MollifierKind::Gaussian, d, delta)
    }

    /// Same profile and table, different width.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Mollifier { kind: self.kind, delta, profile: Arc::clone(&self.profile) })
    }

    pub fn kind(&self) -> MollifierKind {
        self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dimension(&self) -> usize {
        self.profile.dimension
    }

    /// Per-coordinate variance of the unit-width profile.
    pub fn variance(&self) -> f64 {
        self.profile.sigma2
    }

    /// Unit-width density at `|x| = rho`.
    pub fn density(&self, rho: f64) -> f64 {
        match self.kind {
            MollifierKind::Bump => bump(rho) / self.profile.norm,
            MollifierKind::Gaussian => {
                let s2 = self.profile.sigma2;
                libm::exp(-rho * rho / (2.0 * s2)) / powf(2.0 * PI * s2, self.dimension() as f64 / 2.0)
            }
        }
    }

    /// `phi_delta` at `|x| = rho`.
    pub fn scaled_density(&self, rho: f64) -> f64 {
        self.density(rho / self.delta) / powf(self.delta, self.dimension() as f64)
    }

    /// Unit-width transform `phi_hat` at `|xi| = s`.
    pub fn transform(&self, s: f64) -> f64 {
        let s = s.abs();
        match self.kind {
            MollifierKind::Gaussian => libm::exp(-2.0 * PI * PI * self.profile.sigma2 * s * s),
            MollifierKind::Bump if s <= TABLE_MAX => self.profile.interpolate(s),
            MollifierKind::Bump => bump_transform_raw(self.dimension(), s).map_or(0.0, |v| v / self.profile.norm),
        }
    }

    /// `phi_hat(delta s)`, the transform of `phi_delta`.
    pub fn scaled_transform(&self, s: f64) -> f64 {
        self.transform(self.delta * s)
    }

    /// `M_N >= 1` with `|phi_hat(xi)| <= M_N |xi|^{-N}` for all `xi != 0`,
    /// measured with a factor 2 of headroom.
    pub fn decay_constant(&self, order: usize) -> f64 {
        let order = order.min(MAX_ORDER);
        match self.kind {
            MollifierKind::Bump => self.profile.decay[order],
            MollifierKind::Gaussian => {
                // sup_s s^N exp(-2 pi^2 sigma^2 s^2), attained at s^2 = N / (4 pi^2 sigma^2).
                let n = order as f64;
                let peak = if order == 0 {
                    1.0
                } else {
                    let s2 = (n / (4.0 * PI * PI * self.profile.sigma2)).max(1.0);
                    powf(s2, n / 2.0) * libm::exp(-2.0 * PI * PI * self.profile.sigma2 * s2)
                };
                (2.0 * peak).max(1.0)
            }
        }
    }

    /// `int phi` over `R^d`, by radial quadrature.
    pub fn total_mass(&self) -> Result<f64> {
        let d = self.dimension();
        let upper = match self.kind {
            MollifierKind::Bump => 1.0,
            MollifierKind::Gaussian => 40.0 * libm::sqrt(self.profile.sigma2),
        };
        let q = integrate(|rho| self.density(rho) * libm::pow(rho, (d - 1) as f64), 0.0, upper, quad_opts())?;
        Ok(unit_sphere_area(d) * q.value)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("mollifier width must be positive and finite, got {delta}")))
    }
}
