//! Optimal determinant-one stretches.
//!
//! In the plane the count is a step function of `t = log a` and
//! [`optimize_d2_exact`] finds its exact optimum from the breakpoints of
//! every relevant lattice point. In higher dimension [`optimize_general`]
//! runs a seeded multi-start pattern search and only guarantees a value
//! attained somewhere.

mod planar;

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::{fit_log_slope, BALANCED_TOL};
use crate::counting;
use crate::geometry::{ConvexBody, DiagonalStretch};
use crate::special::powf;
use crate::{Error, Result};

pub use planar::{default_interval, optimize_d2_exact, plateau_profile, Plateau};

/// Smallest evaluation budget accepted by [`optimize_general`].
pub const MIN_BUDGET: usize = 1_000;
/// Random starts besides the identity.
pub const RANDOM_STARTS: usize = 8;
/// Random starts are drawn with `||t||_inf <= START_RADIUS`.
pub const START_RADIUS: f64 = 0.7;
const INITIAL_STEP: f64 = 0.2;
const FINAL_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Most points with all coordinates positive.
    MaximizePositive,
    /// Fewest points with all coordinates nonnegative.
    MinimizeNonnegative,
}

impl Objective {
    /// `true` when `a` is strictly better than `b`.
    pub fn better(self, a: u64, b: u64) -> bool {
        match self {
            Objective::MaximizePositive => a > b,
            Objective::MinimizeNonnegative => a < b,
        }
    }

    pub fn evaluate(self, body: &ConvexBody, stretch: &DiagonalStretch, r: f64) -> Result<u64> {
        match self {
            Objective::MaximizePositive => counting::count_positive(body, stretch, r),
            Objective::MinimizeNonnegative => counting::count_nonnegative(body, stretch, r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub stretch: DiagonalStretch,
    pub count: u64,
    pub objective: Objective,
    /// Optimal plateaus found (planar exact mode only).
    pub tie_set_size: Option<usize>,
    /// `||A_opt - Id||_inf`.
    pub deviation: f64,
    /// Range of `t = log a` on which the optimum holds (planar exact mode).
    pub plateau: Option<(f64, f64)>,
    /// Pattern-search result: a value attained, not a certified optimum.
    pub heuristic: bool,
    /// The evaluation budget ran out before the step floor was reached.
    pub budget_exhausted: bool,
    /// Some breakpoint search saw a non-unimodal profile and fell back to
    /// fine sampling.
    pub non_unimodal: bool,
    /// Exact count evaluations performed.
    pub evaluations: usize,
}

impl OptimizationResult {
    /// `||A_opt^{-1}||_inf`; in the plane this is `max(a, 1/a)`.
    pub fn a_opt(&self) -> f64 {
        self.stretch.sup_inverse()
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("radius must be positive and finite, got {r}")))
    }
}

/// Multi-start pattern search over `A = diag(e^{t_1}, ..., e^{t_d})`,
/// `sum t_j = 0`, moving along `e_i - e_j` with steps halving from 0.2 to
/// 1e-4. Starts at the identity and at [`RANDOM_STARTS`] seeded points.
/// Only strict improvements are accepted, so the identity start can never
/// be beaten by a tie.
pub fn optimize_general(
    body: &ConvexBody,
    r: f64,
    objective: Objective,
    seed: u64,
    budget: usize,
) -> Result<OptimizationResult> {
    check_radius(r)?;
    body.check_balanced(BALANCED_TOL)?;
    if budget < MIN_BUDGET {
        return Err(Error::invalid(alloc::format!("budget must be at least {MIN_BUDGET} evaluations, got {budget}")));
    }
    let d = body.dimension();
    // Outside |t_j| < log(C r) the positive count vanishes.
    let t_max = libm::log(body.bounding_constant() * r).max(0.0);
    let mut search = PatternSearch { body, r, objective, budget, evaluations: 0, exhausted: false, t_max };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = alloc::vec![alloc::vec![0.0; d]];
    for _ in 0..RANDOM_STARTS {
        let mut t: Vec<f64> = (0..d).map(|_| rng.gen_range(-START_RADIUS..=START_RADIUS)).collect();
        center(&mut t);
        let m = t.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if m > START_RADIUS {
            t.iter_mut().for_each(|v| *v *= START_RADIUS / m);
        }
        starts.push(t);
    }

    let mut best: Option<(Vec<f64>, u64)> = None;
    for start in starts {
        if search.exhausted {
            break;
        }
        let Some((t, value)) = search.run(start)? else { break };
        let replace = match &best {
            None => true,
            Some((bt, bv)) => objective.better(value, *bv) || (value == *bv && sup_norm(&t) < sup_norm(bt)),
        };
        if replace {
            best = Some((t, value));
        }
    }
    let (t, count) = best.ok_or_else(|| Error::invalid("budget too small to evaluate the identity"))?;
    let stretch = DiagonalStretch::from_log(&t)?;
    Ok(OptimizationResult {
        deviation: stretch.deviation_from_identity(),
        stretch,
        count,
        objective,
        tie_set_size: None,
        plateau: None,
        heuristic: true,
        budget_exhausted: search.exhausted,
        non_unimodal: false,
        evaluations: search.evaluations,
    })
}

fn center(t: &mut [f64]) {
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    t.iter_mut().for_each(|v| *v -= mean);
}

fn sup_norm(t: &[f64]) -> f64 {
    t.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

struct PatternSearch<'a> {
    body: &'a ConvexBody,
    r: f64,
    objective: Objective,
    budget: usize,
    evaluations: usize,
    exhausted: bool,
    t_max: f64,
}

impl PatternSearch<'_> {
    fn eval(&mut self, t: &[f64]) -> Result<Option<u64>> {
        if self.evaluations >= self.budget {
            self.exhausted = true;
            return Ok(None);
        }
        self.evaluations += 1;
        let stretch = DiagonalStretch::from_log(t)?;
        match self.objective.evaluate(self.body, &stretch, self.r) {
            Ok(v) => Ok(Some(v)),
            // A stretch so extreme that the region is unmanageable is never optimal.
            Err(Error::TooLarge { .. }) => Ok(Some(match self.objective {
                Objective::MaximizePositive => 0,
                Objective::MinimizeNonnegative => u64::MAX,
            })),
            Err(e) => Err(e),
        }
    }

    fn run(&mut self, mut t: Vec<f64>) -> Result<Option<(Vec<f64>, u64)>> {
        let d = t.len();
        let Some(mut value) = self.eval(&t)? else { return Ok(None) };
        let mut step = INITIAL_STEP;
        while step >= FINAL_STEP {
            let mut best_move: Option<(Vec<f64>, u64)> = None;
            for i in 0..d {
                for j in 0..d {
                    if i == j {
                        continue;
                    }
                    let mut trial = t.clone();
                    trial[i] += step;
                    trial[j] -= step;
                    if trial[i].abs() > self.t_max || trial[j].abs() > self.t_max {
                        continue;
                    }
                    let Some(v) = self.eval(&trial)? else { return Ok(Some((t, value))) };
                    let current = best_move.as_ref().map_or(value, |b| b.1);
                    if self.objective.better(v, current) {
                        best_move = Some((trial, v));
                    }
                }
            }
            match best_move {
                Some((next, v)) => {
                    t = next;
                    value = v;
                }
                None => step /= 2.0,
            }
        }
        Ok(Some((t, value)))
    }
}

/// How [`convergence_sweep`] optimizes at each radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// [`optimize_d2_exact`] over the default interval.
    ExactD2,
    /// [`optimize_general`] with the given seed and budget.
    Heuristic { seed: u64, budget: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    /// `||A_opt^{-1}||_inf`.
    pub a_opt: f64,
    /// `||A_opt - Id||_inf`.
    pub deviation: f64,
    /// `r^{-(d-1)/(2(d+1))}`.
    pub bound: f64,
    pub count: u64,
}

impl SweepRow {
    pub const HEADER: [&'static str; 5] = ["r", "a_opt", "deviation", "bound", "count"];
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// Log-log slope of deviation against `r`; `None` when fewer than five
    /// rows have nonzero deviation.
    pub exponent: Option<f64>,
}

/// `r^{-(d-1)/(2(d+1))}`.
pub fn deviation_bound(d: usize, r: f64) -> f64 {
    let d = d as f64;
    powf(r, -(d - 1.0) / (2.0 * (d + 1.0)))
}

/// Optimum at one radius, as a sweep row.
pub fn sweep_row(body: &ConvexBody, r: f64, objective: Objective, mode: SweepMode) -> Result<SweepRow> {
    let result = match mode {
        SweepMode::ExactD2 => optimize_d2_exact(body, r, objective, None)?,
        SweepMode::Heuristic { seed, budget } => optimize_general(body, r, objective, seed, budget)?,
    };
    Ok(SweepRow {
        r,
        a_opt: result.a_opt(),
        deviation: result.deviation,
        bound: deviation_bound(body.dimension(), r),
        count: result.count,
    })
}

/// Slope of `log deviation` against `log r` over rows with nonzero deviation.
pub fn fit_deviation_exponent(rows: &[SweepRow]) -> Result<f64> {
    let points: Vec<(f64, f64)> = rows.iter().map(|row| (row.r, row.deviation)).collect();
    fit_log_slope(&points)
}

/// [`sweep_row`] over an ascending grid, with the fitted exponent.
pub fn convergence_sweep(body: &ConvexBody, r_grid: &[f64], objective: Objective, mode: SweepMode) -> Result<Sweep> {
    check_sweep(body, r_grid, mode)?;
    let rows = r_grid.iter().map(|&r| sweep_row(body, r, objective, mode)).collect::<Result<Vec<_>>>()?;
    Ok(finish_sweep(rows))
}

/// Grid and mode checks shared with callers that compute rows themselves.
pub fn check_sweep(body: &ConvexBody, r_grid: &[f64], mode: SweepMode) -> Result<()> {
    if r_grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(core::cmp::Ordering::Less)) {
        return Err(Error::invalid("radius grid must be strictly ascending"));
    }
    if mode == SweepMode::ExactD2 && body.dimension() != 2 {
        return Err(Error::invalid(alloc::format!("exact mode needs d = 2, got d = {}", body.dimension())));
    }
    Ok(())
}

pub fn finish_sweep(rows: Vec<SweepRow>) -> Sweep {
    let exponent = fit_deviation_exponent(&rows).ok();
    Sweep { rows, exponent }
}
