//! Exact lattice-point counts in `A(r Omega)`.
//!
//! For an unconditional body every lattice point is determined by its zero
//! pattern, its sign pattern and a point with positive entries on the
//! remaining axes. Writing `P(Z)` for the number of points with `n_j = 0`
//! for `j` in `Z` and `n_j >= 1` otherwise, all subset counts follow:
//!
//! ```text
//! positive         = P({})
//! nonnegative      = sum_Z P(Z)
//! all              = sum_Z 2^(d - |Z|) P(Z)
//! hyperplane_union = sum_{Z != {}} 2^(d - |Z|) P(Z)
//! nonzero          = 2^d P({})
//! ```
//!
//! Each `P(Z)` is enumerated with nested loops over the free axes; the
//! innermost axis is resolved in O(1) through the region's extent and a
//! membership fix-up, so counts agree exactly with the brute-force oracle,
//! which uses the same predicate.

use alloc::vec::Vec;

use crate::geometry::{ConvexBody, DiagonalStretch, StretchedRegion};
use crate::{Error, Result};

/// Largest box the brute-force oracle will scan.
pub const BRUTE_FORCE_LIMIT: f64 = 1e9;

/// Which lattice points are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeSubset {
    /// `n_j >= 1` for all `j`.
    Positive,
    /// `n_j >= 0` for all `j`.
    Nonnegative,
    /// All of `Z^d`.
    All,
    /// `n_j != 0` for all `j`.
    Nonzero,
    /// At least one `n_j = 0`.
    Hyperplane,
}

impl LatticeSubset {
    pub fn contains(self, n: &[i64]) -> bool {
        match self {
            LatticeSubset::Positive => n.iter().all(|&v| v >= 1),
            LatticeSubset::Nonnegative => n.iter().all(|&v| v >= 0),
            LatticeSubset::All => true,
            LatticeSubset::Nonzero => n.iter().all(|&v| v != 0),
            LatticeSubset::Hyperplane => n.contains(&0),
        }
    }
}

/// Every subset count for one `(body, A, r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeCountReport {
    pub positive: u64,
    pub nonnegative: u64,
    pub all: u64,
    pub nonzero: u64,
    pub hyperplane_union: u64,
    /// Points with `n_j = 0`, per axis `j`.
    pub per_hyperplane: Vec<u64>,
}

fn region<'a>(body: &'a ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<StretchedRegion<'a>> {
    stretch.check_dimension(body.dimension())?;
    stretch.check_unimodular()?;
    StretchedRegion::new(body, stretch, r)
}

/// `#{ n in Z^d_{>0} ∩ A(r Omega) }`.
pub fn count_positive(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<u64> {
    let region = region(body, stretch, r)?;
    let full = (1u32 << body.dimension()) - 1;
    Ok(orthant_count(&region, full))
}

/// `#{ n in Z^d_{>=0} ∩ A(r Omega) }` as a sum over zero patterns.
pub fn count_nonnegative(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<u64> {
    Ok(lattice_counts(body, stretch, r)?.nonnegative)
}

/// `#{ n in Z^d ∩ A(r Omega) }` through `2^d positive + hyperplane_union`.
pub fn count_all(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<u64> {
    Ok(lattice_counts(body, stretch, r)?.all)
}

/// Points with no zero coordinate, `2^d positive` for unconditional bodies.
pub fn count_nonzero(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<u64> {
    Ok(count_positive(body, stretch, r)? << body.dimension())
}

/// Points with at least one zero coordinate, and per-axis counts of
/// points with `n_j = 0`.
pub fn count_hyperplane_union(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<(u64, Vec<u64>)> {
    let report = lattice_counts(body, stretch, r)?;
    Ok((report.hyperplane_union, report.per_hyperplane))
}

/// Count for any subset.
pub fn count(body: &ConvexBody, stretch: &DiagonalStretch, r: f64, subset: LatticeSubset) -> Result<u64> {
    match subset {
        LatticeSubset::Positive => count_positive(body, stretch, r),
        LatticeSubset::Nonzero => count_nonzero(body, stretch, r),
        LatticeSubset::Nonnegative => count_nonnegative(body, stretch, r),
        LatticeSubset::All => count_all(body, stretch, r),
        LatticeSubset::Hyperplane => count_hyperplane_union(body, stretch, r).map(|c| c.0),
    }
}

/// All subset counts from the `2^d` zero-pattern counts.
pub fn lattice_counts(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<LatticeCountReport> {
    let region = region(body, stretch, r)?;
    let d = body.dimension();
    let full = (1u32 << d) - 1;
    let mut report = LatticeCountReport {
        positive: 0,
        nonnegative: 0,
        all: 0,
        nonzero: 0,
        hyperplane_union: 0,
        per_hyperplane: alloc::vec![0; d],
    };
    for free in 0..=full {
        let p = orthant_count(&region, free);
        let zeros = full & !free;
        let signed = p << free.count_ones();
        report.nonnegative += p;
        report.all += signed;
        if zeros == 0 {
            report.positive = p;
            report.nonzero = signed;
        } else {
            report.hyperplane_union += signed;
            for (j, c) in report.per_hyperplane.iter_mut().enumerate() {
                if zeros >> j & 1 == 1 {
                    *c += signed;
                }
            }
        }
    }
    Ok(report)
}

/// Full-lattice count by signed enumeration of every axis, without the
/// zero-pattern decomposition.
pub fn count_all_direct(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<u64> {
    let region = region(body, stretch, r)?;
    Ok(enumerate_direct(&region, Mode::Signed))
}

/// Nonnegative count by enumerating `n_j >= 0` directly.
pub fn count_nonnegative_direct(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<u64> {
    let region = region(body, stretch, r)?;
    Ok(enumerate_direct(&region, Mode::Nonnegative))
}

/// Membership test over the whole bounding box; the ground truth for the
/// fast counters. Fails when the box holds more than
/// [`BRUTE_FORCE_LIMIT`] points.
pub fn brute_force_count(body: &ConvexBody, stretch: &DiagonalStretch, r: f64, subset: LatticeSubset) -> Result<u64> {
    let region = region(body, stretch, r)?;
    let d = body.dimension();
    let bounds: Vec<i64> = (0..d).map(|k| libm::floor(region.half_width(k)) as i64 + 1).collect();
    let size: f64 = bounds.iter().map(|b| (2 * b + 1) as f64).product();
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::too_large("brute-force box", size, BRUTE_FORCE_LIMIT));
    }
    let mut n: Vec<i64> = bounds.iter().map(|b| -b).collect();
    let mut total = 0u64;
    loop {
        if subset.contains(&n) && region.contains_lattice(&n) {
            total += 1;
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == d {
                return Ok(total);
            }
            if n[k] < bounds[k] {
                n[k] += 1;
                break;
            }
            n[k] = -bounds[k];
            k += 1;
        }
    }
}

/// `P(Z)`: points with `n_j >= 1` on the axes in `free` and `n_j = 0` on
/// the rest.
pub(crate) fn orthant_count(region: &StretchedRegion<'_>, free: u32) -> u64 {
    let d = region.dimension();
    let mut n = alloc::vec![0i64; d];
    let mut axes: Vec<usize> = (0..d).filter(|k| free >> k & 1 == 1).collect();
    if axes.is_empty() {
        return u64::from(region.contains_lattice(&n));
    }
    // Widest axis innermost: it is resolved in O(1).
    axes.sort_by(|&a, &b| region.half_width(a).total_cmp(&region.half_width(b)).then(a.cmp(&b)));
    let inner = axes.pop().expect("non-empty");
    for &k in &axes {
        n[k] = 1;
    }
    n[inner] = 1;
    positive_level(region, &mut n, &axes, inner)
}

fn positive_level(region: &StretchedRegion<'_>, n: &mut [i64], outer: &[usize], inner: usize) -> u64 {
    match outer.split_first() {
        None => {
            let m = region.run_length(n, inner);
            n[inner] = 1;
            m.max(0) as u64
        }
        Some((&k, rest)) => {
            let mut total = 0;
            n[k] = 1;
            while region.contains_lattice(n) {
                total += positive_level(region, n, rest, inner);
                n[k] += 1;
            }
            n[k] = 1;
            total
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Nonnegative,
    Signed,
}

fn enumerate_direct(region: &StretchedRegion<'_>, mode: Mode) -> u64 {
    let d = region.dimension();
    let mut axes: Vec<usize> = (0..d).collect();
    axes.sort_by(|&a, &b| region.half_width(a).total_cmp(&region.half_width(b)).then(a.cmp(&b)));
    let inner = axes.pop().expect("dimension >= 2");
    let mut n = alloc::vec![0i64; d];
    direct_level(region, &mut n, &axes, inner, mode)
}

fn direct_level(region: &StretchedRegion<'_>, n: &mut [i64], outer: &[usize], inner: usize, mode: Mode) -> u64 {
    match outer.split_first() {
        None => {
            let m = region.run_length(n, inner);
            n[inner] = 0;
            match (mode, m) {
                (_, m) if m < 0 => 0,
                (Mode::Nonnegative, m) => m as u64 + 1,
                (Mode::Signed, m) => 2 * m as u64 + 1,
            }
        }
        Some((&k, rest)) => {
            let bound = libm::floor(region.half_width(k)) as i64 + 1;
            let lo = if mode == Mode::Signed { -bound } else { 0 };
            let mut total = 0;
            for v in lo..=bound {
                n[k] = v;
                // Remaining axes pinned at 0: outside here means no completion.
                if region.contains_lattice(n) {
                    total += direct_level(region, n, rest, inner, mode);
                }
            }
            n[k] = 0;
            total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};

    fn id(d: usize) -> DiagonalStretch {
        DiagonalStretch::identity(d)
    }

    /// Independent integer oracle for the Euclidean ball of radius `r`.
    fn ball_points(d: usize, r: i64, subset: LatticeSubset) -> u64 {
        let mut total = 0;
        let mut n = vec![-r; d];
        loop {
            if subset.contains(&n) && n.iter().map(|v| v * v).sum::<i64>() <= r * r {
                total += 1;
            }
            let mut k = 0;
            while k < d && n[k] == r {
                n[k] = -r;
                k += 1;
            }
            if k == d {
                return total;
            }
            n[k] += 1;
        }
    }

    #[test]
    fn positive_examples() {
        let disk = ConvexBody::disk(1.0).unwrap();
        assert_eq!(count_positive(&disk, &id(2), 5.0).unwrap(), 15);
        assert_eq!(ball_points(2, 5, LatticeSubset::Positive), 15);
        assert_eq!(count_positive(&disk, &id(2), 1.0).unwrap(), 0);
        let a = DiagonalStretch::unimodular(vec![2.0, 0.5]).unwrap();
        assert_eq!(count_positive(&disk, &a, 4.0).unwrap(), 6);
        assert_eq!(brute_force_count(&disk, &a, 4.0, LatticeSubset::Positive).unwrap(), 6);
    }

    #[test]
    fn all_examples() {
        let disk = ConvexBody::disk(1.0).unwrap();
        assert_eq!(count_all(&disk, &id(2), 5.0).unwrap(), 81);
        assert_eq!(count_all_direct(&disk, &id(2), 5.0).unwrap(), 81);
        assert_eq!(brute_force_count(&disk, &id(2), 5.0, LatticeSubset::All).unwrap(), 81);
        assert_eq!(count_all(&disk, &id(2), 0.5).unwrap(), 1);
        let ball = ConvexBody::ball(3, 1.0).unwrap();
        let oracle = ball_points(3, 2, LatticeSubset::All);
        assert_eq!(oracle, 33);
        assert_eq!(count_all(&ball, &id(3), 2.0).unwrap(), oracle);
        assert_eq!(count_all_direct(&ball, &id(3), 2.0).unwrap(), oracle);
    }

    #[test]
    fn hyperplane_examples() {
        let half = ConvexBody::disk(0.5).unwrap();
        let (union, per) = count_hyperplane_union(&half, &id(2), 10.0).unwrap();
        assert_eq!(union, 21);
        assert_eq!(per, vec![11, 11]);
        assert_eq!(union, per[0] + per[1] - 1);
        assert_eq!(brute_force_count(&half, &id(2), 10.0, LatticeSubset::Hyperplane).unwrap(), 21);
        let ball = ConvexBody::ball(3, 1.0).unwrap();
        let (union, _) = count_hyperplane_union(&ball, &id(3), 2.0).unwrap();
        assert_eq!(union, ball_points(3, 2, LatticeSubset::Hyperplane));
    }

    #[test]
    fn nonnegative_examples() {
        let half = ConvexBody::disk(0.5).unwrap();
        assert_eq!(count_nonnegative(&half, &id(2), 10.0).unwrap(), 26);
        assert_eq!(count_nonnegative_direct(&half, &id(2), 10.0).unwrap(), 26);
        assert_eq!(count_nonnegative(&half, &id(2), 0.3).unwrap(), 1);
        let ball = ConvexBody::ball(3, 1.0).unwrap();
        let oracle = ball_points(3, 2, LatticeSubset::Nonnegative);
        assert_eq!(count_nonnegative(&ball, &id(3), 2.0).unwrap(), oracle);
        assert_eq!(count_nonnegative_direct(&ball, &id(3), 2.0).unwrap(), oracle);
    }

    #[test]
    fn nonzero_and_report_consistency() {
        let ball = ConvexBody::ball(3, 1.0).unwrap();
        let report = lattice_counts(&ball, &id(3), 4.0).unwrap();
        assert_eq!(report.nonzero, ball_points(3, 4, LatticeSubset::Nonzero));
        assert_eq!(report.all, 8 * report.positive + report.hyperplane_union);
        assert!(report.all >= report.nonnegative && report.nonnegative >= report.positive);
        // nonnegative - positive = nonnegative points on the hyperplanes.
        let on_planes = brute_force_count(&ball, &id(3), 4.0, LatticeSubset::Nonnegative).unwrap()
            - brute_force_count(&ball, &id(3), 4.0, LatticeSubset::Positive).unwrap();
        assert_eq!(report.nonnegative - report.positive, on_planes);
    }

    #[test]
    fn brute_force_examples_and_guard() {
        let disk = ConvexBody::disk(1.0).unwrap();
        assert_eq!(brute_force_count(&disk, &id(2), 5.0, LatticeSubset::All).unwrap(), 81);
        assert_eq!(brute_force_count(&disk, &id(2), 1.0, LatticeSubset::Positive).unwrap(), 0);
        let ball = ConvexBody::ball(4, 1.0).unwrap();
        assert!(matches!(
            brute_force_count(&ball, &id(4), 200.0, LatticeSubset::All),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn preconditions() {
        let disk = ConvexBody::disk(1.0).unwrap();
        assert!(matches!(count_positive(&disk, &id(2), 0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(count_positive(&disk, &id(2), -1.0), Err(Error::InvalidInput(_))));
        let bad = DiagonalStretch::new(vec![2.0, 2.0]).unwrap();
        assert!(matches!(count_positive(&disk, &bad, 3.0), Err(Error::InvalidInput(_))));
        assert!(count_positive(&disk, &id(3), 3.0).is_err());
    }

    fn random_instance(rng: &mut impl Rng) -> (ConvexBody, DiagonalStretch, f64) {
        let d = rng.gen_range(2..=3);
        let p = [1.5, 2.0, 3.0][rng.gen_range(0..3)];
        let axes: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..1.5)).collect();
        let mut t: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.8..0.8)).collect();
        let mean = t.iter().sum::<f64>() / d as f64;
        t.iter_mut().for_each(|v| *v -= mean);
        (ConvexBody::p_ellipsoid(p, axes).unwrap(), DiagonalStretch::from_log(&t).unwrap(), rng.gen_range(1.0..15.0))
    }

    #[test]
    fn fast_counts_equal_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..60 {
            let (body, a, r) = random_instance(&mut rng);
            let report = lattice_counts(&body, &a, r).unwrap();
            let bf = |s| brute_force_count(&body, &a, r, s).unwrap();
            assert_eq!(report.positive, bf(LatticeSubset::Positive));
            assert_eq!(report.nonnegative, bf(LatticeSubset::Nonnegative));
            assert_eq!(report.all, bf(LatticeSubset::All));
            assert_eq!(report.nonzero, bf(LatticeSubset::Nonzero));
            assert_eq!(report.hyperplane_union, bf(LatticeSubset::Hyperplane));
            assert_eq!(report.all, count_all_direct(&body, &a, r).unwrap());
            assert_eq!(report.nonnegative, count_nonnegative_direct(&body, &a, r).unwrap());
        }
    }

    #[test]
    fn axis_swap_symmetry() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = [1.5, 2.0, 3.0][rng.gen_range(0..3)];
            let c = rng.gen_range(0.3..1.0);
            let body = ConvexBody::p_ellipsoid(p, vec![c, c]).unwrap();
            let a: f64 = rng.gen_range(0.4..2.5);
            let r = rng.gen_range(1.0..40.0);
            let fwd = count_positive(&body, &DiagonalStretch::planar(a).unwrap(), r).unwrap();
            let rev = count_positive(&body, &DiagonalStretch::unimodular(vec![1.0 / a, a]).unwrap(), r).unwrap();
            assert_eq!(fwd, rev);
        }
    }

    #[test]
    fn monotone_in_radius() {
        let body = ConvexBody::p_ellipsoid(3.0, vec![0.7, 1.1, 0.9]).unwrap();
        let a = DiagonalStretch::from_log(&[0.2, -0.5, 0.3]).unwrap();
        let mut last = lattice_counts(&body, &a, 0.5).unwrap();
        for i in 1..60 {
            let next = lattice_counts(&body, &a, 0.5 + 0.25 * i as f64).unwrap();
            assert!(next.positive >= last.positive && next.all >= last.all);
            assert!(next.nonnegative >= last.nonnegative && next.hyperplane_union >= last.hyperplane_union);
            last = next;
        }
    }

    #[test]
    fn permuted_stretch_and_axes_agree() {
        let body = ConvexBody::p_ellipsoid(2.0, vec![0.6, 1.0, 1.3]).unwrap();
        let permuted = ConvexBody::p_ellipsoid(2.0, vec![1.3, 0.6, 1.0]).unwrap();
        let a = DiagonalStretch::from_log(&[0.4, -0.1, -0.3]).unwrap();
        let pa = DiagonalStretch::unimodular(vec![a.entries()[2], a.entries()[0], a.entries()[1]]).unwrap();
        for r in [3.0, 7.5, 12.0] {
            assert_eq!(lattice_counts(&body, &a, r).unwrap().all, lattice_counts(&permuted, &pa, r).unwrap().all);
            assert_eq!(count_positive(&body, &a, r).unwrap(), count_positive(&permuted, &pa, r).unwrap());
        }
    }

    #[test]
    fn generic_gauge_counts_match_builtin() {
        struct Euclid;
        impl crate::Gauge for Euclid {
            fn dimension(&self) -> usize {
                2
            }
            fn eval(&self, x: &[f64]) -> f64 {
                libm::sqrt(x[0] * x[0] + x[1] * x[1])
            }
        }
        let generic = ConvexBody::from_gauge(alloc::sync::Arc::new(Euclid)).unwrap();
        let disk = ConvexBody::disk(1.0).unwrap();
        let a = DiagonalStretch::planar(1.3).unwrap();
        for r in [2.5, 7.3, 11.0] {
            let g = lattice_counts(&generic, &a, r).unwrap();
            assert_eq!(g.all, brute_force_count(&generic, &a, r, LatticeSubset::All).unwrap());
            assert_eq!(g.positive, count_positive(&disk, &a, r).unwrap());
        }
    }
}
