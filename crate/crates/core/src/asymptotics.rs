//! Two-term predictions for stretched lattice counts, error measurement and
//! the cuboid Weyl law.

use alloc::vec::Vec;

use crate::counting::{self, LatticeSubset};
use crate::geometry::{ConvexBody, DiagonalStretch};
use crate::special::{powf, unit_ball_volume};
use crate::{Error, Result};

/// Tolerance for "all cross sections equal 1" when a prediction needs a
/// balanced body.
pub const BALANCED_TOL: f64 = 1e-6;

/// `leading + second`, plus the size `a^{2d/(d+1)} r^{d - 2d/(d+1)}` of the
/// expected remainder, where `a = ||A^{-1}||_inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPrediction {
    pub r: f64,
    pub leading: f64,
    pub second: f64,
    pub predicted: f64,
    pub error_shape: f64,
}

impl AsymptoticPrediction {
    fn new(r: f64, leading: f64, second: f64, stretch: &DiagonalStretch) -> Self {
        AsymptoticPrediction { r, leading, second, predicted: leading + second, error_shape: error_shape(stretch, r) }
    }
}

/// `a^{2d/(d+1)} r^{d - 2d/(d+1)}`.
pub fn error_shape(stretch: &DiagonalStretch, r: f64) -> f64 {
    let d = stretch.dimension() as f64;
    let e = 2.0 * d / (d + 1.0);
    powf(stretch.sup_inverse(), e) * powf(r, d - e)
}

/// Which lattice count a prediction or error row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountTarget {
    Positive,
    Nonnegative,
    Nonzero,
    /// Full lattice against the volume term alone.
    All,
    /// Points on the coordinate hyperplanes against `tr A^{-1} r^{d-1}`.
    Hyperplane,
}

impl CountTarget {
    pub fn subset(self) -> LatticeSubset {
        match self {
            CountTarget::Positive => LatticeSubset::Positive,
            CountTarget::Nonnegative => LatticeSubset::Nonnegative,
            CountTarget::Nonzero => LatticeSubset::Nonzero,
            CountTarget::All => LatticeSubset::All,
            CountTarget::Hyperplane => LatticeSubset::Hyperplane,
        }
    }
}

fn check_common(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid(alloc::format!("radius must be positive and finite, got {r}")));
    }
    stretch.check_dimension(body.dimension())?;
    stretch.check_unimodular()
}

fn balanced_terms(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<(f64, f64)> {
    check_common(body, stretch, r)?;
    body.check_balanced(BALANCED_TOL)?;
    let d = body.dimension() as i32;
    Ok((body.volume() * libm::pow(r, d as f64), stretch.tr_inverse() * libm::pow(r, (d - 1) as f64)))
}

/// `|Omega| r^d / 2^d - tr(A^{-1}) r^{d-1} / 2^d` for a balanced body.
pub fn predict_positive(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<AsymptoticPrediction> {
    let (vol, tr) = balanced_terms(body, stretch, r)?;
    let scale = libm::ldexp(1.0, -(body.dimension() as i32));
    Ok(AsymptoticPrediction::new(r, vol * scale, -tr * scale, stretch))
}

/// As [`predict_positive`] with `+` on the second term. Requires
/// `1 <= ||A^{-1}||_inf <= C r` with `C` the bounding constant.
pub fn predict_nonnegative(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<AsymptoticPrediction> {
    let (vol, tr) = balanced_terms(body, stretch, r)?;
    let a = stretch.sup_inverse();
    let limit = body.bounding_constant() * r;
    if a < 1.0 - 1e-12 || a > limit {
        return Err(Error::precondition(alloc::format!(
            "||A^-1||_inf = {a} must lie in [1, C r] = [1, {limit}]"
        )));
    }
    let scale = libm::ldexp(1.0, -(body.dimension() as i32));
    Ok(AsymptoticPrediction::new(r, vol * scale, tr * scale, stretch))
}

/// `|Omega| r^d - tr(A^{-1}) r^{d-1}`: points with no zero coordinate.
pub fn predict_nonzero(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<AsymptoticPrediction> {
    let (vol, tr) = balanced_terms(body, stretch, r)?;
    Ok(AsymptoticPrediction::new(r, vol, -tr, stretch))
}

/// Volume term `|Omega| r^d` alone; no balance requirement.
pub fn predict_all(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<AsymptoticPrediction> {
    check_common(body, stretch, r)?;
    let vol = body.volume() * libm::pow(r, body.dimension() as f64);
    Ok(AsymptoticPrediction::new(r, vol, 0.0, stretch))
}

/// `tr(A^{-1}) r^{d-1}` for the points on the coordinate hyperplanes.
pub fn predict_hyperplane(body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<AsymptoticPrediction> {
    let (_, tr) = balanced_terms(body, stretch, r)?;
    Ok(AsymptoticPrediction::new(r, tr, 0.0, stretch))
}

pub fn predict(body: &ConvexBody, stretch: &DiagonalStretch, r: f64, target: CountTarget) -> Result<AsymptoticPrediction> {
    match target {
        CountTarget::Positive => predict_positive(body, stretch, r),
        CountTarget::Nonnegative => predict_nonnegative(body, stretch, r),
        CountTarget::Nonzero => predict_nonzero(body, stretch, r),
        CountTarget::All => predict_all(body, stretch, r),
        CountTarget::Hyperplane => predict_hyperplane(body, stretch, r),
    }
}

/// One exact-versus-predicted comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub r: f64,
    pub exact: u64,
    pub predicted: f64,
    /// `|exact - predicted|`.
    pub error: f64,
    /// `error / error_shape`.
    pub normalized_error: f64,
}

impl ErrorRow {
    pub const HEADER: [&'static str; 5] = ["r", "exact", "predicted", "error", "normalized_error"];

    pub fn from_prediction(prediction: &AsymptoticPrediction, exact: u64) -> Self {
        let error = libm::fabs(exact as f64 - prediction.predicted);
        ErrorRow {
            r: prediction.r,
            exact,
            predicted: prediction.predicted,
            error,
            normalized_error: error / prediction.error_shape,
        }
    }
}

/// Comparison at a single radius.
pub fn error_row(body: &ConvexBody, stretch: &DiagonalStretch, r: f64, target: CountTarget) -> Result<ErrorRow> {
    let prediction = predict(body, stretch, r, target)?;
    let exact = counting::count(body, stretch, r, target.subset())?;
    Ok(ErrorRow::from_prediction(&prediction, exact))
}

/// [`error_row`] over an ascending grid of radii.
pub fn measure_error_series(
    body: &ConvexBody,
    stretch: &DiagonalStretch,
    r_grid: &[f64],
    target: CountTarget,
) -> Result<Vec<ErrorRow>> {
    if r_grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(core::cmp::Ordering::Less)) {
        return Err(Error::invalid("radius grid must be strictly ascending"));
    }
    r_grid.iter().map(|&r| error_row(body, stretch, r, target)).collect()
}

/// Least-squares slope of `log error` against `log r`, skipping zero-error
/// rows. Needs at least five usable rows.
pub fn fit_error_exponent(rows: &[ErrorRow]) -> Result<f64> {
    let points: Vec<(f64, f64)> = rows.iter().map(|row| (row.r, row.error)).collect();
    fit_log_slope(&points)
}

/// Least-squares slope of `log y` against `log x` over points with `y > 0`.
pub fn fit_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (libm::log(x), libm::log(y)))
        .collect();
    if logs.len() < 5 {
        return Err(Error::precondition(alloc::format!(
            "slope fit needs at least 5 rows with nonzero error, got {}",
            logs.len()
        )));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::precondition("slope fit needs at least two distinct radii"));
    }
    Ok(sxy / sxx)
}

/// Exact eigenvalue count next to its two-term Weyl approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylCount {
    pub exact: u64,
    pub two_term: f64,
}

impl WeylCount {
    pub fn relative_error(&self) -> f64 {
        libm::fabs(self.exact as f64 - self.two_term) / self.two_term
    }
}

/// Dirichlet eigenvalues `pi^2 sum (i_j / a_j)^2 <= lambda` of the box with
/// the given side lengths, against
/// `v_d/(2pi)^d |R| lambda^{d/2} - v_{d-1}/(4 (2pi)^{d-1}) |dR| lambda^{(d-1)/2}`.
pub fn weyl_cuboid_count(side_lengths: &[f64], lambda: f64) -> Result<WeylCount> {
    weyl(side_lengths, lambda, false)
}

/// Neumann version: indices may vanish and the boundary term enters with `+`.
pub fn weyl_cuboid_count_neumann(side_lengths: &[f64], lambda: f64) -> Result<WeylCount> {
    weyl(side_lengths, lambda, true)
}

fn weyl(sides: &[f64], lambda: f64, neumann: bool) -> Result<WeylCount> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(alloc::format!("lambda must be positive and finite, got {lambda}")));
    }
    let d = sides.len();
    let body = ConvexBody::p_ellipsoid(2.0, sides.to_vec())?;
    let id = DiagonalStretch::identity(d);
    let r = libm::sqrt(lambda) / core::f64::consts::PI;
    let exact = if neumann {
        counting::count_nonnegative(&body, &id, r)?
    } else {
        counting::count_positive(&body, &id, r)?
    };
    let volume: f64 = sides.iter().product();
    let boundary: f64 = 2.0 * sides.iter().map(|s| volume / s).sum::<f64>();
    let two_pi = 2.0 * core::f64::consts::PI;
    let df = d as f64;
    let first = unit_ball_volume(d) / libm::pow(two_pi, df) * volume * libm::pow(lambda, df / 2.0);
    let second = unit_ball_volume(d - 1) / (4.0 * libm::pow(two_pi, df - 1.0))
        * boundary
        * libm::pow(lambda, (df - 1.0) / 2.0);
    let two_term = if neumann { first + second } else { first - second };
    Ok(WeylCount { exact, two_term })
}

/// `tr(A^{-1}) - d`, nonnegative for `det A = 1` and zero only at the identity.
pub fn amgm_gap(stretch: &DiagonalStretch) -> Result<f64> {
    stretch.check_unimodular()?;
    Ok((stretch.tr_inverse() - stretch.dimension() as f64).max(0.0))
}
