//! Exact planar optimum over `A = diag(e^t, e^{-t})`.
//!
//! A lattice point `n` lies in `A(r Omega)` exactly for `t` in a closed
//! interval (an orbit of the stretch family crosses the boundary at most
//! twice). The count at `t` is then
//! `#{starts <= t} - #{ends < t}`, and only plateaus between consecutive
//! breakpoints and the breakpoints themselves need to be compared. The
//! interval arithmetic only ranks candidates; the reported count always
//! comes from the exact counter.

use alloc::vec::Vec;

use super::{check_radius, Objective, OptimizationResult};
use crate::asymptotics::BALANCED_TOL;
use crate::geometry::{BodyKind, ConvexBody, DiagonalStretch};
use crate::special::powf;
use crate::{Error, Result};

/// Lattice points whose breakpoints may be examined.
pub const CANDIDATE_LIMIT: usize = 10_000_000;
/// Breakpoints closer than this in `t` are treated as one.
const CLUSTER_TOL: f64 = 1e-9;
/// A point is a candidate when its best gauge value is at most `1 + SLACK`.
const SLACK: f64 = 1e-9;
const PRESAMPLE_STEP: f64 = 1e-3;
const FALLBACK_STEP: f64 = 1e-5;

/// A maximal `t`-range on which the event count is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub t_start: f64,
    pub t_end: f64,
    pub count: u64,
}

impl Plateau {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.t_start + self.t_end)
    }
}

/// `(a_lo, a_hi)` just inside `(1/(C r), C r)`, or `(1, 1)` when `C r <= 1`.
pub fn default_interval(body: &ConvexBody, r: f64) -> (f64, f64) {
    let cr = body.bounding_constant() * r;
    if cr <= 1.0 {
        (1.0, 1.0)
    } else {
        ((1.0 + 1e-9) / cr, cr * (1.0 - 1e-9))
    }
}

fn check_interval(body: &ConvexBody, r: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if lo == 1.0 && hi == 1.0 {
        return Ok(());
    }
    let cr = body.bounding_constant() * r;
    let ok = lo.is_finite() && hi.is_finite() && 1.0 / cr < lo && lo <= 1.0 && 1.0 <= hi && hi < cr;
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!(
            "search interval [{lo}, {hi}] must satisfy 1/(C r) < a_lo <= 1 <= a_hi < C r with C r = {cr}"
        )))
    }
}

fn planar_stretch(t: f64) -> Result<DiagonalStretch> {
    DiagonalStretch::unimodular(alloc::vec![libm::exp(t), libm::exp(-t)])
}

/// Exact optimum of the objective over `a = e^t` in the search interval
/// (default [`default_interval`]). Among equally good plateaus the one
/// whose midpoint is closest to `t = 0` wins; its midpoint is reported.
pub fn optimize_d2_exact(
    body: &ConvexBody,
    r: f64,
    objective: Objective,
    interval: Option<(f64, f64)>,
) -> Result<OptimizationResult> {
    let (events, t_lo, t_hi) = prepare(body, r, objective, interval)?;
    let mut candidates = candidates(&events, t_lo, t_hi, objective);
    // Most promising bound first, then closest to the identity.
    candidates.sort_by(|a, b| {
        let by_bound = match objective {
            Objective::MaximizePositive => b.bound.cmp(&a.bound),
            Objective::MinimizeNonnegative => a.bound.cmp(&b.bound),
        };
        by_bound.then(identity_order(a.t, b.t))
    });

    let mut best: Option<(Candidate, u64)> = None;
    let mut ties = 0usize;
    let mut evaluations = 0usize;
    for cand in candidates {
        if let Some((_, value)) = best {
            // Bounds are optimistic, so nothing later can beat or tie.
            if objective.better(value, cand.bound) {
                break;
            }
        }
        evaluations += 1;
        let exact = objective.evaluate(body, &planar_stretch(cand.t)?, r)?;
        match best {
            None => {
                best = Some((cand, exact));
                ties = 1;
            }
            Some((ref b, value)) => {
                if objective.better(exact, value) {
                    best = Some((cand, exact));
                    ties = 1;
                } else if exact == value {
                    ties += 1;
                    if tie_order(&cand, b).is_lt() {
                        best = Some((cand, exact));
                    }
                }
            }
        }
    }
    let (cand, count) = best.expect("the search interval always yields a candidate");
    let stretch = planar_stretch(cand.t)?;
    Ok(OptimizationResult {
        deviation: stretch.deviation_from_identity(),
        stretch,
        count,
        objective,
        tie_set_size: Some(ties),
        plateau: Some(cand.range),
        heuristic: false,
        budget_exhausted: false,
        non_unimodal: events.non_unimodal,
        evaluations,
    })
}

/// Among equal counts: open plateaus before isolated breakpoints, then
/// closest to the identity.
fn tie_order(a: &Candidate, b: &Candidate) -> core::cmp::Ordering {
    let point = |c: &Candidate| c.range.0 == c.range.1;
    point(a).cmp(&point(b)).then(identity_order(a.t, b.t))
}

/// Closer to `t = 0` first; mirror images within rounding prefer `t >= 0`.
fn identity_order(a: f64, b: f64) -> core::cmp::Ordering {
    if libm::fabs(libm::fabs(a) - libm::fabs(b)) > 1e-12 {
        libm::fabs(a).total_cmp(&libm::fabs(b))
    } else {
        b.total_cmp(&a)
    }
}

/// Open plateaus of the event count across the search interval.
pub fn plateau_profile(
    body: &ConvexBody,
    r: f64,
    objective: Objective,
    interval: Option<(f64, f64)>,
) -> Result<Vec<Plateau>> {
    let (events, t_lo, t_hi) = prepare(body, r, objective, interval)?;
    let bounds = boundaries(&events, t_lo, t_hi);
    Ok(bounds
        .windows(2)
        .filter(|w| w[0].1 < w[1].0)
        .map(|w| {
            let (s, e) = (w[0].1, w[1].0);
            Plateau { t_start: s, t_end: e, count: events.upper(0.5 * (s + e), 0.0) }
        })
        .collect())
}

fn prepare(
    body: &ConvexBody,
    r: f64,
    objective: Objective,
    interval: Option<(f64, f64)>,
) -> Result<(Events, f64, f64)> {
    check_radius(r)?;
    if body.dimension() != 2 {
        return Err(Error::invalid(alloc::format!("exact mode needs d = 2, got d = {}", body.dimension())));
    }
    body.check_balanced(BALANCED_TOL)?;
    let interval = interval.unwrap_or_else(|| default_interval(body, r));
    check_interval(body, r, interval)?;
    let (t_lo, t_hi) = (libm::log(interval.0), libm::log(interval.1));
    let events = collect_events(body, r, objective, t_lo, t_hi)?;
    Ok((events, t_lo, t_hi))
}

/// Closed membership intervals in `t`, one pair of sorted arrays.
struct Events {
    starts: Vec<f64>,
    ends: Vec<f64>,
    /// Points inside for every `t` (the origin in the nonnegative count).
    base: u64,
    non_unimodal: bool,
}

impl Events {
    fn below(v: &[f64], x: f64, inclusive: bool) -> i64 {
        (if inclusive { v.partition_point(|&s| s <= x) } else { v.partition_point(|&s| s < x) }) as i64
    }

    /// Intervals meeting `[t - w, t + w]`.
    fn upper(&self, t: f64, w: f64) -> u64 {
        let n = Self::below(&self.starts, t + w, true) - Self::below(&self.ends, t - w, false);
        self.base + n.max(0) as u64
    }

    /// At most the number of intervals covering `[t - w, t + w]`.
    fn lower(&self, t: f64, w: f64) -> u64 {
        let n = Self::below(&self.starts, t - w, true) - Self::below(&self.ends, t + w, false);
        self.base + n.max(0) as u64
    }
}

fn collect_events(body: &ConvexBody, r: f64, objective: Objective, t_lo: f64, t_hi: f64) -> Result<Events> {
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut non_unimodal = false;
    let mut examined = 0usize;
    let tick = |examined: &mut usize| -> Result<()> {
        *examined += 1;
        if *examined > CANDIDATE_LIMIT {
            Err(Error::too_large("breakpoint candidates", *examined as f64, CANDIDATE_LIMIT as f64))
        } else {
            Ok(())
        }
    };

    match body.kind() {
        BodyKind::PEllipsoid { p, semi_axes } => {
            let (p, c1, c2) = (*p, semi_axes[0], semi_axes[1]);
            let beta1 = powf(1.0 / (r * c2), p);
            for n1 in 1i64.. {
                let alpha = powf(n1 as f64 / (r * c1), p);
                if 4.0 * alpha * beta1 > 1.0 + SLACK {
                    break;
                }
                let mut first = true;
                for n2 in 1i64.. {
                    tick(&mut examined)?;
                    let beta = powf(n2 as f64 / (r * c2), p);
                    let disc = 1.0 - 4.0 * alpha * beta;
                    if disc < -SLACK {
                        break;
                    }
                    // Roots of beta u^2 - u + alpha = 0 in u = e^{p t}.
                    let sq = libm::sqrt(disc.max(0.0));
                    let s = libm::log(2.0 * alpha / (1.0 + sq)) / p;
                    let e = libm::log((1.0 + sq) / (2.0 * beta)) / p;
                    if first && s > t_hi {
                        // Larger n1 only moves the interval further right.
                        return finish(intervals, body, r, objective, t_lo, t_hi, non_unimodal);
                    }
                    first = false;
                    if e < t_lo {
                        break;
                    }
                    if s <= t_hi {
                        intervals.push((s, e));
                    }
                }
            }
        }
        BodyKind::Generic(_) => {
            let (lo, hi) = (t_lo - PRESAMPLE_STEP, t_hi + PRESAMPLE_STEP);
            'outer: for n1 in 1i64.. {
                for n2 in 1i64.. {
                    tick(&mut examined)?;
                    let x = n1 as f64 / r;
                    let y = n2 as f64 / r;
                    let found = generic_intervals(body, x, y, lo, hi);
                    non_unimodal |= found.non_unimodal;
                    if found.min > 1.0 + SLACK {
                        if n2 == 1 {
                            break 'outer;
                        }
                        break;
                    }
                    intervals.extend(found.intervals);
                }
            }
        }
    }
    finish(intervals, body, r, objective, t_lo, t_hi, non_unimodal)
}

fn finish(
    mut intervals: Vec<(f64, f64)>,
    body: &ConvexBody,
    r: f64,
    objective: Objective,
    t_lo: f64,
    t_hi: f64,
    non_unimodal: bool,
) -> Result<Events> {
    let mut base = 0;
    if objective == Objective::MinimizeNonnegative {
        base = 1;
        // Gauge is homogeneous, so axis points have one-sided intervals.
        for n1 in 1i64.. {
            let s = libm::log(body.gauge_unchecked(&[n1 as f64 / r, 0.0]));
            if s > t_hi {
                break;
            }
            intervals.push((s, f64::INFINITY));
        }
        for n2 in 1i64.. {
            let e = -libm::log(body.gauge_unchecked(&[0.0, n2 as f64 / r]));
            if e < t_lo {
                break;
            }
            intervals.push((f64::NEG_INFINITY, e));
        }
    }
    let mut starts: Vec<f64> = intervals.iter().map(|i| i.0).collect();
    let mut ends: Vec<f64> = intervals.iter().map(|i| i.1).collect();
    starts.sort_by(f64::total_cmp);
    ends.sort_by(f64::total_cmp);
    Ok(Events { starts, ends, base, non_unimodal })
}

struct Found {
    intervals: Vec<(f64, f64)>,
    min: f64,
    non_unimodal: bool,
}

/// Where `t -> phi(e^{-t} x, e^t y)` is at most 1 on `[lo, hi]`; infinite
/// ends mean the interval runs past the window.
fn generic_intervals(body: &ConvexBody, x: f64, y: f64, lo: f64, hi: f64) -> Found {
    let h = |t: f64| body.gauge_unchecked(&[libm::exp(-t) * x, libm::exp(t) * y]);
    let n = (libm::ceil((hi - lo) / PRESAMPLE_STEP) as usize).max(2);
    let ts: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vs: Vec<f64> = ts.iter().map(|&t| h(t)).collect();
    let m = (0..=n).min_by(|&a, &b| vs[a].total_cmp(&vs[b])).expect("samples");
    let unimodal = (0..m).all(|i| vs[i + 1] <= vs[i] * (1.0 + 1e-12))
        && (m..n).all(|i| vs[i + 1] >= vs[i] * (1.0 - 1e-12));
    if !unimodal {
        return fine_scan(&h, lo, hi);
    }
    let (tm, hm) = golden_min(&h, ts[m.saturating_sub(1)], ts[(m + 1).min(n)]);
    let (tm, hm) = if hm <= vs[m] { (tm, hm) } else { (ts[m], vs[m]) };
    let mut found = Found { intervals: Vec::new(), min: hm, non_unimodal: false };
    if hm > 1.0 + SLACK {
        return found;
    }
    if hm > 1.0 {
        found.intervals.push((tm, tm));
        return found;
    }
    let s = if vs[0] <= 1.0 { f64::NEG_INFINITY } else { root(&h, lo, tm) };
    let e = if vs[n] <= 1.0 { f64::INFINITY } else { root(&h, hi, tm) };
    found.intervals.push((s, e));
    found
}

/// Boundary of `{h <= 1}` between `outside` (h > 1) and `inside` (h <= 1).
fn root(h: &dyn Fn(f64) -> f64, mut outside: f64, mut inside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (outside + inside);
        if mid == outside || mid == inside {
            break;
        }
        if h(mid) <= 1.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

fn golden_min(h: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (h(c), h(d));
    for _ in 0..200 {
        if b - a <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = h(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Non-unimodal profile: sample at [`FALLBACK_STEP`] and bisect every sign
/// change of `h - 1`.
fn fine_scan(h: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Found {
    let n = (libm::ceil((hi - lo) / FALLBACK_STEP) as usize).max(2);
    let at = |i: usize| lo + (hi - lo) * i as f64 / n as f64;
    let mut found = Found { intervals: Vec::new(), min: f64::INFINITY, non_unimodal: true };
    let mut open: Option<f64> = None;
    let mut prev = h(lo);
    found.min = prev;
    if prev <= 1.0 {
        open = Some(f64::NEG_INFINITY);
    }
    for i in 1..=n {
        let v = h(at(i));
        found.min = found.min.min(v);
        match (open, v <= 1.0) {
            (None, true) => open = Some(root(h, at(i - 1), at(i))),
            (Some(s), false) => {
                found.intervals.push((s, root(h, at(i), at(i - 1))));
                open = None;
            }
            _ => {}
        }
        prev = v;
    }
    let _ = prev;
    if let Some(s) = open {
        found.intervals.push((s, f64::INFINITY));
    }
    found
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    t: f64,
    range: (f64, f64),
    /// Optimistic objective value: an upper bound when maximizing, a lower
    /// bound when minimizing.
    bound: u64,
}

/// Breakpoint clusters inside the interval, framed by the interval ends.
fn boundaries(events: &Events, t_lo: f64, t_hi: f64) -> Vec<(f64, f64)> {
    let mut points: Vec<f64> = events
        .starts
        .iter()
        .chain(events.ends.iter())
        .copied()
        .filter(|t| t.is_finite() && *t > t_lo && *t < t_hi)
        .collect();
    points.sort_by(f64::total_cmp);
    let mut out = alloc::vec![(t_lo, t_lo)];
    for t in points {
        let last = out.last_mut().expect("non-empty");
        if t - last.1 <= CLUSTER_TOL {
            last.1 = t;
        } else {
            out.push((t, t));
        }
    }
    if t_hi - out.last().expect("non-empty").1 <= CLUSTER_TOL {
        out.last_mut().expect("non-empty").1 = t_hi;
    } else {
        out.push((t_hi, t_hi));
    }
    out
}

fn candidates(events: &Events, t_lo: f64, t_hi: f64, objective: Objective) -> Vec<Candidate> {
    let bounds = boundaries(events, t_lo, t_hi);
    let mut out = Vec::new();
    let maximize = objective == Objective::MaximizePositive;
    for w in bounds.windows(2) {
        let (s, e) = (w[0].1, w[1].0);
        if s < e {
            let t = 0.5 * (s + e);
            out.push(Candidate { t, range: (s, e), bound: events.upper(t, 0.0) });
        }
    }
    // A closed membership interval makes the count at a breakpoint at least
    // that of either neighbour, so breakpoints only matter when maximizing.
    if maximize || out.is_empty() {
        for &(a, b) in &bounds {
            let mut t = 0.5 * (a + b);
            if t.abs() < 1e-12 {
                t = 0.0;
            }
            let w = 0.5 * (b - a) + CLUSTER_TOL;
            let bound = if maximize { events.upper(t, w) } else { events.lower(t, w) };
            out.push(Candidate { t, range: (t, t), bound });
        }
    }
    out
}
