use alloc::vec::Vec;

use super::{BodyKind, ConvexBody, DiagonalStretch};
use crate::special::powf;
use crate::{Error, Result};

/// Points with `phi(A^{-1} x / r) <= 1 + MEMBERSHIP_SLACK` count as inside,
/// so exact boundary points survive binary rounding.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;
/// Largest admissible stretched half-width `a_j r L_j` per axis.
pub const MAX_HALF_WIDTH: f64 = 1e6;

/// The closed set `A(r Omega)` with a membership predicate shared by every
/// counter, the brute-force oracle and the optimizer.
#[derive(Debug, Clone)]
pub struct StretchedRegion<'a> {
    body: &'a ConvexBody,
    scale: Vec<f64>,
    half_widths: Vec<f64>,
    form: Form,
    exact: Option<ExactPlanar>,
}

#[derive(Debug, Clone)]
enum Form {
    PEllipsoid { p: f64, inv_axes: Vec<f64>, threshold: f64 },
    Generic { inv_scale: Vec<f64> },
}

/// Integer arithmetic for planar ellipses whose stretched semi-axes are
/// dyadic rationals: `(n_1/S_1)^2 + (n_2/S_2)^2 <= 1` decided exactly.
#[derive(Debug, Clone, Copy)]
struct ExactPlanar {
    t: [u128; 2],
    shift: u32,
}

impl ExactPlanar {
    fn detect(axes: &[f64]) -> Option<Self> {
        if axes.len() != 2 {
            return None;
        }
        for shift in 0..=24u32 {
            let scaled = [libm::ldexp(axes[0], shift as i32), libm::ldexp(axes[1], shift as i32)];
            if scaled.iter().all(|s| *s <= (1u64 << 30) as f64 && libm::trunc(*s) == *s) {
                return Some(ExactPlanar { t: [scaled[0] as u128, scaled[1] as u128], shift });
            }
        }
        None
    }

    fn contains(&self, n: [i64; 2]) -> Option<bool> {
        let lift = |v: i64| -> Option<u128> {
            let v = v.unsigned_abs() as u128;
            if v >= 1u128 << 40 {
                None
            } else {
                Some(v << self.shift)
            }
        };
        let (n1, n2) = (lift(n[0])?, lift(n[1])?);
        let (t1, t2) = (self.t[0] * self.t[0], self.t[1] * self.t[1]);
        let lhs = (n1 * n1).checked_mul(t2)?.checked_add((n2 * n2).checked_mul(t1)?)?;
        Some(lhs <= t1.checked_mul(t2)?)
    }
}

impl<'a> StretchedRegion<'a> {
    pub fn new(body: &'a ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid(alloc::format!("r must be positive and finite, got {r}")));
        }
        let d = body.dimension();
        stretch.check_dimension(d)?;
        let scale: Vec<f64> = stretch.entries().iter().map(|a| a * r).collect();
        let half_widths: Vec<f64> = (0..d).map(|k| scale[k] * body.axis_length(k)).collect();
        if let Some(w) = half_widths.iter().cloned().find(|w| *w > MAX_HALF_WIDTH) {
            return Err(Error::too_large("stretched half-width a_j r C", w, MAX_HALF_WIDTH));
        }
        let (form, exact) = match body.kind() {
            BodyKind::PEllipsoid { p, semi_axes } => {
                let axes: Vec<f64> = semi_axes.iter().zip(&scale).map(|(c, s)| c * s).collect();
                let exact = if *p == 2.0 { ExactPlanar::detect(&axes) } else { None };
                let threshold = powf(1.0 + MEMBERSHIP_SLACK, *p);
                (Form::PEllipsoid { p: *p, inv_axes: axes.iter().map(|s| 1.0 / s).collect(), threshold }, exact)
            }
            BodyKind::Generic(_) => (Form::Generic { inv_scale: scale.iter().map(|s| 1.0 / s).collect() }, None),
        };
        Ok(StretchedRegion { body, scale, half_widths, form, exact })
    }

    pub fn body(&self) -> &ConvexBody {
        self.body
    }

    pub fn dimension(&self) -> usize {
        self.scale.len()
    }

    /// Extent of the region along axis `k`, `a_k r L_k`.
    pub fn half_width(&self, k: usize) -> f64 {
        self.half_widths[k]
    }

    /// `a_k r`.
    pub fn scale(&self, k: usize) -> f64 {
        self.scale[k]
    }

    /// Whether the exact integer predicate is active.
    pub fn has_exact_path(&self) -> bool {
        self.exact.is_some()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if let Some(ex) = &self.exact {
            if x.iter().all(|v| libm::trunc(*v) == *v && v.abs() < 1e12) {
                if let Some(inside) = ex.contains([x[0] as i64, x[1] as i64]) {
                    return inside;
                }
            }
        }
        self.float_contains(x)
    }

    pub fn contains_lattice(&self, n: &[i64]) -> bool {
        if let Some(ex) = &self.exact {
            if let Some(inside) = ex.contains([n[0], n[1]]) {
                return inside;
            }
        }
        let mut buf = [0.0; 16];
        if n.len() <= buf.len() {
            for (b, v) in buf.iter_mut().zip(n) {
                *b = *v as f64;
            }
            self.float_contains(&buf[..n.len()])
        } else {
            let x: Vec<f64> = n.iter().map(|v| *v as f64).collect();
            self.float_contains(&x)
        }
    }

    fn float_contains(&self, x: &[f64]) -> bool {
        match &self.form {
            Form::PEllipsoid { p, inv_axes, threshold } => p_level(*p, inv_axes, x) <= *threshold,
            Form::Generic { inv_scale } => {
                let y: Vec<f64> = x.iter().zip(inv_scale).map(|(v, s)| v * s).collect();
                self.body.gauge_unchecked(&y) <= 1.0 + MEMBERSHIP_SLACK
            }
        }
    }

    /// Largest `m >= 0` such that `n` with `n_k = m` lies in the region, or
    /// `-1` when even `n_k = 0` lies outside. Other coordinates of `n` are
    /// taken as given; `n[k]` is left at an unspecified value.
    pub fn run_length(&self, n: &mut [i64], k: usize) -> i64 {
        let guess = self.extent_guess(n, k);
        let mut m = if guess.is_finite() && guess > 0.0 { libm::floor(guess) as i64 } else { 0 };
        n[k] = m + 1;
        while self.contains_lattice(n) {
            m += 1;
            n[k] = m + 1;
        }
        n[k] = m;
        while m >= 0 && !self.contains_lattice(n) {
            m -= 1;
            n[k] = m;
        }
        m
    }

    fn extent_guess(&self, n: &[i64], k: usize) -> f64 {
        match &self.form {
            Form::PEllipsoid { p, inv_axes, threshold } => {
                let level: f64 = n
                    .iter()
                    .zip(inv_axes)
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .map(|(_, (v, s))| p_term(*p, *v as f64 * s))
                    .sum();
                if level >= *threshold {
                    return 0.0;
                }
                powf(threshold - level, 1.0 / p) / inv_axes[k]
            }
            Form::Generic { inv_scale } => {
                let y: Vec<f64> = n.iter().zip(inv_scale).map(|(v, s)| *v as f64 * s).collect();
                self.body.extent_by_bisection(&y, k) * self.scale[k]
            }
        }
    }
}

#[inline]
fn p_term(p: f64, v: f64) -> f64 {
    if p == 2.0 {
        v * v
    } else {
        powf(v.abs(), p)
    }
}

#[inline]
fn p_level(p: f64, inv_axes: &[f64], x: &[f64]) -> f64 {
    x.iter().zip(inv_axes).map(|(v, s)| p_term(p, v * s)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn exact_path_detection() {
        let disk = ConvexBody::disk(1.0).unwrap();
        let id = DiagonalStretch::identity(2);
        assert!(StretchedRegion::new(&disk, &id, 5.0).unwrap().has_exact_path());
        assert!(StretchedRegion::new(&disk, &id, 2.5).unwrap().has_exact_path());
        assert!(!StretchedRegion::new(&disk, &id, core::f64::consts::PI).unwrap().has_exact_path());
        let ball = ConvexBody::ball(3, 1.0).unwrap();
        assert!(!StretchedRegion::new(&ball, &DiagonalStretch::identity(3), 5.0).unwrap().has_exact_path());
    }

    #[test]
    fn boundary_points_are_inside() {
        let disk = ConvexBody::disk(1.0).unwrap();
        let id = DiagonalStretch::identity(2);
        let region = StretchedRegion::new(&disk, &id, 5.0).unwrap();
        assert!(region.contains_lattice(&[3, 4]));
        assert!(region.contains_lattice(&[-5, 0]));
        assert!(!region.contains_lattice(&[4, 4]));
        // Same points through the float path (r not dyadic-exact but equal).
        let ball = ConvexBody::ball(3, 1.0).unwrap();
        let region = StretchedRegion::new(&ball, &DiagonalStretch::identity(3), 13.0).unwrap();
        assert!(region.contains_lattice(&[3, 4, 12]));
        assert!(!region.contains_lattice(&[3, 5, 12]));
    }

    #[test]
    fn run_length_matches_scan() {
        let body = ConvexBody::p_ellipsoid(3.0, vec![1.0, 0.7]).unwrap();
        let a = DiagonalStretch::planar(1.7).unwrap();
        let region = StretchedRegion::new(&body, &a, 9.3).unwrap();
        for n1 in -20..=20 {
            let mut n = [n1, 0];
            let m = region.run_length(&mut n, 1);
            let mut scan = -1;
            for m2 in 0..100 {
                if region.contains_lattice(&[n1, m2]) {
                    scan = m2;
                }
            }
            assert_eq!(m, scan, "column {n1}");
        }
    }

    #[test]
    fn guard_and_bad_radius() {
        let disk = ConvexBody::disk(1.0).unwrap();
        let id = DiagonalStretch::identity(2);
        assert!(matches!(StretchedRegion::new(&disk, &id, 2e6), Err(Error::TooLarge { .. })));
        assert!(matches!(StretchedRegion::new(&disk, &id, 0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(StretchedRegion::new(&disk, &id, -1.0), Err(Error::InvalidInput(_))));
    }
}
