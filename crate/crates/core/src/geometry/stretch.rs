use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Relative tolerance on `det A = 1` for stretches used in counting and
/// optimization.
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// A positive diagonal matrix `diag(a_1, ..., a_d)`.
#[derive(Clone, PartialEq)]
pub struct DiagonalStretch {
    entries: Vec<f64>,
}

impl DiagonalStretch {
    /// Any positive diagonal matrix. Used for balancing maps, which need not
    /// preserve volume.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("stretch needs at least one entry"));
        }
        if let Some((j, a)) = entries.iter().enumerate().find(|(_, a)| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::invalid(alloc::format!("stretch entry {j} must be positive and finite, got {a}")));
        }
        Ok(DiagonalStretch { entries })
    }

    /// A determinant-one stretch; the product of `entries` must equal 1
    /// within [`UNIMODULAR_TOL`] relative error.
    pub fn unimodular(entries: Vec<f64>) -> Result<Self> {
        let s = Self::new(entries)?;
        s.check_unimodular()?;
        Ok(s)
    }

    pub fn identity(d: usize) -> Self {
        DiagonalStretch { entries: alloc::vec![1.0; d] }
    }

    /// `diag(a, 1/a)`, the planar determinant-one family.
    pub fn planar(a: f64) -> Result<Self> {
        Self::unimodular(alloc::vec![a, 1.0 / a])
    }

    /// `diag(e^{t_1}, ..., e^{t_d})`; unimodular iff `sum t_j = 0`.
    pub fn from_log(t: &[f64]) -> Result<Self> {
        Self::new(t.iter().map(|&x| libm::exp(x)).collect())
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    pub fn det(&self) -> f64 {
        self.entries.iter().product()
    }

    pub fn tr_inverse(&self) -> f64 {
        self.entries.iter().map(|a| 1.0 / a).sum()
    }

    /// `a = ||A^{-1}||_inf = max_j 1/a_j`.
    pub fn sup_inverse(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, a| m.max(1.0 / a))
    }

    /// `||A - Id||_inf = max_j |a_j - 1|`.
    pub fn deviation_from_identity(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, a| m.max((a - 1.0).abs()))
    }

    pub fn log_entries(&self) -> Vec<f64> {
        self.entries.iter().map(|&a| libm::log(a)).collect()
    }

    pub fn inverse(&self) -> Self {
        DiagonalStretch { entries: self.entries.iter().map(|a| 1.0 / a).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().all(|&a| a == 1.0)
    }

    pub fn is_unimodular(&self) -> bool {
        (self.det() - 1.0).abs() <= UNIMODULAR_TOL
    }

    pub fn check_unimodular(&self) -> Result<()> {
        if self.is_unimodular() {
            Ok(())
        } else {
            Err(Error::invalid(alloc::format!(
                "stretch must have determinant 1 (relative tolerance {UNIMODULAR_TOL:e}), got {}",
                self.det()
            )))
        }
    }

    pub(crate) fn check_dimension(&self, d: usize) -> Result<()> {
        if self.entries.len() == d {
            Ok(())
        } else {
            Err(Error::invalid(alloc::format!(
                "stretch has {} entries but the body has dimension {d}",
                self.entries.len()
            )))
        }
    }
}

impl fmt::Debug for DiagonalStretch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "diag{:?}", self.entries)
    }
}
