//! Coordinate-symmetric convex bodies described by their gauge.
//!
//! A body `Omega` is stored through its Minkowski functional `phi`, with
//! `x` in the closed body iff `phi(x) <= 1`. Built-in bodies are
//! `p`-ellipsoids `(sum |x_j / c_j|^p)^(1/p)`; anything else implements
//! [`Gauge`]. All bodies must be unconditional (invariant under sign flips
//! of each coordinate) and convex; neither property is checked at runtime
//! for user gauges.
//!
//! Volume, the coordinate cross sections, the inradius and the bounding
//! constant `C` (with `Omega` inside `[-C, C]^d`) are computed once at
//! construction.

mod region;
mod stretch;

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::fmt;

use crate::quadrature::{integrate, QuadOptions};
use crate::special::{p_ball_volume, powf};
use crate::{Error, Result};

pub use region::StretchedRegion;
pub use stretch::{DiagonalStretch, UNIMODULAR_TOL};

/// Absolute tolerance of the bisection in [`ConvexBody::extent_by_bisection`].
pub const EXTENT_TOL: f64 = 1e-12;
/// Cross sections of a balanced representative equal 1 within this.
pub const BALANCE_TOL: f64 = 1e-9;
/// Directions sampled when the inradius has no closed form (planar case).
pub const INRADIUS_SAMPLES: usize = 20_000;

/// A positively homogeneous, unconditional, convex gauge on `R^d`.
pub trait Gauge: Send + Sync {
    fn dimension(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
}

#[derive(Clone)]
pub enum BodyKind {
    /// `(sum_j |x_j / c_j|^p)^(1/p) <= 1` with `p > 1`.
    PEllipsoid { p: f64, semi_axes: Vec<f64> },
    /// Code-registered gauge; volumes come from nested quadrature.
    Generic(Arc<dyn Gauge>),
}

impl fmt::Debug for BodyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyKind::PEllipsoid { p, semi_axes } => {
                f.debug_struct("PEllipsoid").field("p", p).field("semi_axes", semi_axes).finish()
            }
            BodyKind::Generic(g) => write!(f, "Generic(dimension = {})", g.dimension()),
        }
    }
}

/// An unconditional convex body with its cached measures and constants.
#[derive(Clone, Debug)]
pub struct ConvexBody {
    dimension: usize,
    kind: BodyKind,
    volume: f64,
    sections: Vec<f64>,
    inradius: f64,
    bounding: f64,
}

impl ConvexBody {
    pub fn p_ellipsoid(p: f64, semi_axes: Vec<f64>) -> Result<Self> {
        let d = semi_axes.len();
        if d < 2 {
            return Err(Error::body(alloc::format!("dimension must be at least 2, got {d}")));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::body(alloc::format!("exponent p must be finite and > 1, got {p}")));
        }
        if let Some((j, c)) = semi_axes.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::body(alloc::format!("semi-axis {j} must be positive and finite, got {c}")));
        }
        let unit = p_ball_volume(d, p);
        let volume = semi_axes.iter().product::<f64>() * unit;
        let unit_section = p_ball_volume(d - 1, p);
        let sections = (0..d)
            .map(|j| {
                let others: f64 = semi_axes.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, c)| c).product();
                others * unit_section
            })
            .collect();
        let bounding = semi_axes.iter().cloned().fold(0.0, f64::max);
        let mut body = ConvexBody {
            dimension: d,
            kind: BodyKind::PEllipsoid { p, semi_axes },
            volume,
            sections,
            inradius: 0.0,
            bounding,
        };
        body.inradius = match &body.kind {
            // The p-ellipsoid contains the ellipsoid with the same axes.
            BodyKind::PEllipsoid { p, semi_axes } if *p >= 2.0 => {
                semi_axes.iter().cloned().fold(f64::INFINITY, f64::min)
            }
            _ => inradius_by_sampling(&|x: &[f64]| body.gauge_unchecked(x), d),
        };
        Ok(body)
    }

    /// Euclidean ball of the given radius.
    pub fn ball(d: usize, radius: f64) -> Result<Self> {
        Self::p_ellipsoid(2.0, alloc::vec![radius; d])
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::ball(2, radius)
    }

    /// Body from a user gauge. Fails if the gauge is degenerate on an axis
    /// or the volume quadrature does not converge.
    pub fn from_gauge(gauge: Arc<dyn Gauge>) -> Result<Self> {
        let d = gauge.dimension();
        if d < 2 {
            return Err(Error::body(alloc::format!("dimension must be at least 2, got {d}")));
        }
        let origin = alloc::vec![0.0; d];
        let g0 = gauge.eval(&origin);
        if g0 != 0.0 {
            return Err(Error::body(alloc::format!("gauge must vanish at the origin, got {g0}")));
        }
        let mut axis_lengths = Vec::with_capacity(d);
        for k in 0..d {
            let mut e = origin.clone();
            e[k] = 1.0;
            let g = gauge.eval(&e);
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::body(alloc::format!("gauge of unit vector {k} must be positive and finite, got {g}")));
            }
            axis_lengths.push(1.0 / g);
        }
        let eval = |x: &[f64]| gauge.eval(x);
        let all: Vec<usize> = (0..d).collect();
        let volume = nested_measure(&eval, &axis_lengths, &all)?;
        let mut sections = Vec::with_capacity(d);
        for j in 0..d {
            let free: Vec<usize> = (0..d).filter(|&k| k != j).collect();
            sections.push(nested_measure(&eval, &axis_lengths, &free)?);
        }
        let inradius = inradius_by_sampling(&eval, d);
        let bounding = axis_lengths.iter().cloned().fold(0.0, f64::max);
        Ok(ConvexBody { dimension: d, kind: BodyKind::Generic(gauge), volume, sections, inradius, bounding })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    /// `(p, semi_axes)` for built-in bodies.
    pub fn p_ellipsoid_params(&self) -> Option<(f64, &[f64])> {
        match &self.kind {
            BodyKind::PEllipsoid { p, semi_axes } => Some((*p, semi_axes)),
            BodyKind::Generic(_) => None,
        }
    }

    /// `Some(semi_axes)` when the body is an ellipsoid (`p = 2`).
    pub fn ellipsoid_axes(&self) -> Option<&[f64]> {
        match self.p_ellipsoid_params() {
            Some((2.0, axes)) => Some(axes),
            _ => None,
        }
    }

    /// The Minkowski functional at `x`.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::invalid(alloc::format!(
                "point has {} coordinates, body has dimension {}",
                x.len(),
                self.dimension
            )));
        }
        if let Some((j, v)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(alloc::format!("coordinate {j} is not finite: {v}")));
        }
        Ok(self.gauge_unchecked(x))
    }

    pub(crate) fn gauge_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            BodyKind::PEllipsoid { p, semi_axes } => {
                if *p == 2.0 {
                    let s: f64 = x.iter().zip(semi_axes).map(|(v, c)| (v / c) * (v / c)).sum();
                    libm::sqrt(s)
                } else {
                    let s: f64 = x.iter().zip(semi_axes).map(|(v, c)| powf((v / c).abs(), *p)).sum();
                    powf(s, 1.0 / p)
                }
            }
            BodyKind::Generic(g) => g.eval(x),
        }
    }

    /// Membership of `x` in the closed body `A(r Omega)`.
    pub fn contains(&self, stretch: &DiagonalStretch, r: f64, x: &[f64]) -> Result<bool> {
        if x.len() != self.dimension {
            return Err(Error::invalid("point dimension does not match the body"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point has non-finite coordinates"));
        }
        let region = StretchedRegion::new(self, stretch, r)?;
        Ok(region.contains(x))
    }

    /// d-dimensional Lebesgue measure `|Omega|`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// (d-1)-dimensional measure of `Omega ∩ {x_j = 0}`; `j` is 0-based.
    pub fn cross_section_measure(&self, j: usize) -> Result<f64> {
        self.sections
            .get(j)
            .copied()
            .ok_or_else(|| Error::invalid(alloc::format!("axis {j} out of range for dimension {}", self.dimension)))
    }

    pub fn cross_section_measures(&self) -> &[f64] {
        &self.sections
    }

    /// Radius of the largest origin-centred Euclidean ball inside the body.
    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    /// `C` with `Omega ⊂ [-C, C]^d`; for unconditional bodies the largest
    /// axis extent.
    pub fn bounding_constant(&self) -> f64 {
        self.bounding
    }

    /// Sandwich constant `c = 1 / inradius`.
    pub fn sandwich_constant(&self) -> f64 {
        1.0 / self.inradius
    }

    /// `(inradius, C)`.
    pub fn constants(&self) -> (f64, f64) {
        (self.inradius, self.bounding)
    }

    /// Extent of the body along axis `k` from the origin, `1 / phi(e_k)`.
    pub fn axis_length(&self, k: usize) -> f64 {
        match &self.kind {
            BodyKind::PEllipsoid { semi_axes, .. } => semi_axes[k],
            BodyKind::Generic(_) => {
                let mut e = alloc::vec![0.0; self.dimension];
                e[k] = 1.0;
                1.0 / self.gauge_unchecked(&e)
            }
        }
    }

    /// Largest `t >= 0` with `phi(x_1, ..., x_{k-1}, t, 0, ..., 0) <= 1`,
    /// 0 when the prefix already lies outside. `prefix.len()` is the axis.
    pub fn axis_extent(&self, prefix: &[f64]) -> Result<f64> {
        let k = prefix.len();
        if k >= self.dimension {
            return Err(Error::invalid(alloc::format!("axis {k} out of range for dimension {}", self.dimension)));
        }
        let mut point = alloc::vec![0.0; self.dimension];
        point[..k].copy_from_slice(prefix);
        Ok(self.extent_along_axis(&point, k))
    }

    /// Largest `t >= 0` with `phi(point with x_k = t) <= 1`.
    ///
    /// Closed form for p-ellipsoids, bisection otherwise.
    pub fn extent_along_axis(&self, point: &[f64], k: usize) -> f64 {
        match &self.kind {
            BodyKind::PEllipsoid { p, semi_axes } => {
                let level: f64 = point
                    .iter()
                    .zip(semi_axes)
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .map(|(_, (v, c))| powf((v / c).abs(), *p))
                    .sum();
                if level >= 1.0 {
                    0.0
                } else {
                    semi_axes[k] * powf(1.0 - level, 1.0 / p)
                }
            }
            BodyKind::Generic(_) => self.extent_by_bisection(point, k),
        }
    }

    /// Bisection on `t -> phi(point with x_k = t)`, monotone by orthant
    /// monotonicity, to absolute tolerance [`EXTENT_TOL`].
    pub fn extent_by_bisection(&self, point: &[f64], k: usize) -> f64 {
        extent_bisect(&|x: &[f64]| self.gauge_unchecked(x), point, k, self.axis_length(k))
    }

    /// The image `B Omega` of the body under a positive diagonal map.
    pub fn scaled(&self, b: &DiagonalStretch) -> Result<Self> {
        b.check_dimension(self.dimension)?;
        match &self.kind {
            BodyKind::PEllipsoid { p, semi_axes } => {
                Self::p_ellipsoid(*p, semi_axes.iter().zip(b.entries()).map(|(c, s)| c * s).collect())
            }
            BodyKind::Generic(g) => Self::from_gauge(Arc::new(ScaledGauge {
                inner: g.clone(),
                inverse: b.entries().iter().map(|s| 1.0 / s).collect(),
            })),
        }
    }

    /// The unique balanced representative `B Omega` and the map `B`.
    ///
    /// Solves `sum_{k != j} log b_k = -log |Omega_j|` in closed form; `B`
    /// is generally not unimodular.
    pub fn balanced_representative(&self) -> Result<(DiagonalStretch, ConvexBody)> {
        let logs = balancing_logs(&self.sections)?;
        let b = DiagonalStretch::new(logs.iter().map(|&l| libm::exp(l)).collect())?;
        let balanced = self.scaled(&b)?;
        Ok((b, balanced))
    }

    pub fn is_balanced(&self, tol: f64) -> bool {
        self.check_balanced(tol).is_ok()
    }

    /// Error names the first cross section that is not 1 within `tol`.
    pub fn check_balanced(&self, tol: f64) -> Result<()> {
        for (j, s) in self.sections.iter().enumerate() {
            if (s - 1.0).abs() > tol {
                return Err(Error::precondition(alloc::format!(
                    "body is not balanced: cross section {j} has measure {s} (tolerance {tol:e})"
                )));
            }
        }
        Ok(())
    }
}

/// `log b_j = S + log |Omega_j|` with `S = -(sum_j log |Omega_j|) / (d - 1)`.
pub fn balancing_logs(sections: &[f64]) -> Result<Vec<f64>> {
    let d = sections.len();
    if d < 2 {
        return Err(Error::body("balancing needs dimension at least 2"));
    }
    if let Some((j, s)) = sections.iter().enumerate().find(|(_, s)| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::body(alloc::format!("cross section {j} must be positive and finite, got {s}")));
    }
    let logs: Vec<f64> = sections.iter().map(|s| libm::log(*s)).collect();
    let total = -logs.iter().sum::<f64>() / (d as f64 - 1.0);
    Ok(logs.iter().map(|l| total + l).collect())
}

struct ScaledGauge {
    inner: Arc<dyn Gauge>,
    inverse: Vec<f64>,
}

impl Gauge for ScaledGauge {
    fn dimension(&self) -> usize {
        self.inverse.len()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().zip(&self.inverse).map(|(v, s)| v * s).collect();
        self.inner.eval(&y)
    }
}

fn extent_bisect(gauge: &dyn Fn(&[f64]) -> f64, point: &[f64], k: usize, axis_len: f64) -> f64 {
    let mut x = point.to_vec();
    x[k] = 0.0;
    if gauge(&x) > 1.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = axis_len * (1.0 + 1e-12) + EXTENT_TOL;
    x[k] = hi;
    while gauge(&x) <= 1.0 {
        // Only reachable for gauges that break orthant monotonicity.
        lo = hi;
        hi *= 2.0;
        x[k] = hi;
    }
    while hi - lo > EXTENT_TOL {
        let mid = 0.5 * (lo + hi);
        x[k] = mid;
        if gauge(&x) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `2^m` times the iterated integral of the body over the positive
/// orthant of the coordinates in `free` (the others pinned at 0).
fn nested_measure(gauge: &dyn Fn(&[f64]) -> f64, axis_lengths: &[f64], free: &[usize]) -> Result<f64> {
    let mut point = alloc::vec![0.0; axis_lengths.len()];
    let half = nested_level(gauge, axis_lengths, free, &mut point, 0)?;
    Ok(half * libm::ldexp(1.0, free.len() as i32))
}

fn nested_level(
    gauge: &dyn Fn(&[f64]) -> f64,
    axis_lengths: &[f64],
    free: &[usize],
    point: &mut Vec<f64>,
    level: usize,
) -> Result<f64> {
    let k = free[level];
    let extent = extent_bisect(gauge, point, k, axis_lengths[k]);
    if level + 1 == free.len() || extent == 0.0 {
        return Ok(if level + 1 == free.len() { extent } else { 0.0 });
    }
    // x_k = E sin(theta) removes the square-root edge of smooth boundaries.
    let mut failure = None;
    let opts = QuadOptions { rel_tol: 1e-10, abs_tol: 1e-15, max_intervals: 400 };
    let q = integrate(
        |theta| {
            if failure.is_some() {
                return 0.0;
            }
            let (s, c) = libm::sincos(theta);
            point[k] = extent * s;
            let inner = match nested_level(gauge, axis_lengths, free, point, level + 1) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            };
            point[k] = 0.0;
            inner * extent * c
        },
        0.0,
        FRAC_PI_2,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(q?.value)
}

/// `1 / max_u phi(u)` over unit vectors in the positive orthant, by dense
/// direction sampling and local refinement.
pub(crate) fn inradius_by_sampling(gauge: &dyn Fn(&[f64]) -> f64, d: usize) -> f64 {
    if d == 2 {
        let n = INRADIUS_SAMPLES;
        let step = FRAC_PI_2 / (n - 1) as f64;
        let g_at = |theta: f64| {
            let (s, c) = libm::sincos(theta);
            gauge(&[c, s])
        };
        let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
        for i in 0..n {
            let v = g_at(i as f64 * step);
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let lo = (best_i as f64 - 1.0).max(0.0) * step;
        let hi = ((best_i + 1) as f64 * step).min(FRAC_PI_2);
        let (_, refined) = golden_max(&g_at, lo, hi, 1e-13);
        return 1.0 / best.max(refined);
    }
    let m = d - 1;
    let samples = 4_000 * m;
    let mut angles = alloc::vec![0.0; m];
    let mut u = alloc::vec![0.0; d];
    let eval = |angles: &[f64], u: &mut Vec<f64>| {
        hyperspherical(angles, u);
        gauge(u)
    };
    let mut best = f64::NEG_INFINITY;
    let mut best_angles = angles.clone();
    // Axis directions and the main diagonal first.
    for k in 0..d {
        let mut e = alloc::vec![0.0; d];
        e[k] = 1.0;
        best = best.max(gauge(&e));
    }
    let diag = alloc::vec![1.0 / libm::sqrt(d as f64); d];
    best = best.max(gauge(&diag));
    for i in 1..=samples {
        for (j, a) in angles.iter_mut().enumerate() {
            *a = FRAC_PI_2 * radical_inverse(i as u64, PRIMES[j % PRIMES.len()]);
        }
        let v = eval(&angles, &mut u);
        if v > best {
            best = v;
            best_angles.copy_from_slice(&angles);
        }
    }
    // Compass search around the best sample.
    let mut step = FRAC_PI_2 / libm::pow(samples as f64, 1.0 / m as f64);
    let mut current = best_angles;
    while step > 1e-12 {
        let mut improved = false;
        for j in 0..m {
            for sign in [1.0, -1.0] {
                let mut trial = current.clone();
                trial[j] = (trial[j] + sign * step).clamp(0.0, FRAC_PI_2);
                let v = eval(&trial, &mut u);
                if v > best {
                    best = v;
                    current = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    1.0 / best
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

fn hyperspherical(angles: &[f64], out: &mut [f64]) {
    let mut s = 1.0;
    for (j, a) in angles.iter().enumerate() {
        let (sa, ca) = libm::sincos(*a);
        out[j] = s * ca;
        s *= sa;
    }
    out[angles.len()] = s;
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}
