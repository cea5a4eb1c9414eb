use serde::{Deserialize, Serialize};

use super::interval::Interval;
use super::likelihood::{prob_term, LogLikelihood, LogProduct, PhaseCache};
use crate::error::{Error, Result};
use crate::probe::{MeasurementRecord, ProbeConfig};

/// Result of a restricted-domain maximisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub omega_hat: f64,
    pub fisher_total: f64,
    pub domain_used: Interval,
}

/// Search parameters.
///
/// The scan runs on a nested dyadic grid over `[-1, 1]`, picking the coarsest
/// level with at least `min_points` nodes inside the domain. Cached node
/// values are running sums over records, so a sequential estimator only pays
/// for the newest records at each call. Domains narrower than the finest
/// level allows fall back to an uncached uniform scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub min_points: usize,
    pub candidates: usize,
    pub finest_level: u32,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { min_points: 256, candidates: 3, finest_level: 16, tolerance: 1e-12, max_iterations: 100 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    value: f64,
    upto: u32,
}

/// `sin_cos(rate * x_k)` for one rate, valid where `stamp` matches.
#[derive(Debug, Clone, Default)]
struct PhaseTable {
    rate: f64,
    stamp: u32,
    entries: Vec<(f64, f64, u32)>,
}

#[derive(Debug, Clone, Default)]
struct Level {
    cells: Vec<Cell>,
    phases: PhaseTable,
}

/// Lazily filled per-level node values. Level `L` holds nodes
/// `x_k = -1 + k 2^{1-L}` for `k = 0..=2^L`.
#[derive(Debug, Clone, Default)]
struct DyadicGrid {
    levels: Vec<Level>,
}

impl DyadicGrid {
    fn node(level: u32, k: usize) -> f64 {
        -1.0 + k as f64 * (2.0f64).powi(1 - level as i32)
    }

    /// Inclusive index range of level-`level` nodes inside `[lo, hi]`.
    fn nodes_in(level: u32, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let half = (2.0f64).powi(level as i32 - 1);
        let kmin = ((lo + 1.0) * half).ceil() as i64;
        let kmax = (((hi + 1.0) * half).floor() as i64).min(1i64 << level);
        (kmax >= kmin).then(|| (kmin as usize, kmax as usize))
    }

    /// Allocates `level` and points its phase table at `rate`.
    fn prepare(&mut self, level: u32, rate: f64) {
        let lv = level as usize;
        if self.levels.len() <= lv {
            self.levels.resize_with(lv + 1, Level::default);
        }
        let size = (1 << level) + 1;
        let entry = &mut self.levels[lv];
        if entry.cells.is_empty() {
            entry.cells = vec![Cell::default(); size];
            entry.phases.entries = vec![(0.0, 0.0, 0); size];
        }
        if entry.phases.rate != rate || entry.phases.stamp == 0 {
            entry.phases.rate = rate;
            entry.phases.stamp = entry.phases.stamp.wrapping_add(1).max(1);
        }
    }

    /// Value of node `k` at `level` summed over all records of `ll`.
    fn value(&mut self, ll: &LogLikelihood, level: u32, k: usize) -> f64 {
        let n = ll.len() as u32;
        let lv = level as usize;
        let mut cell = self.levels[lv].cells[k];
        if cell.upto >= n {
            return cell.value;
        }
        // the same node on a coarser level may already be further along
        let (mut up, mut idx) = (lv, k);
        while up > 0 && idx % 2 == 0 {
            up -= 1;
            idx /= 2;
            if let Some(c) = self.levels.get(up).and_then(|l| l.cells.get(idx)) {
                if c.upto > cell.upto {
                    cell = *c;
                }
            }
        }
        let x = Self::node(level, k);
        let table = &mut self.levels[lv].phases;
        let mut cache = PhaseCache::new(x);
        let mut acc = LogProduct::default();
        for term in &ll.terms()[cell.upto as usize..] {
            let (s, c) = if term.rate == table.rate {
                let e = &mut table.entries[k];
                if e.2 != table.stamp {
                    let (s, c) = (term.rate * x).sin_cos();
                    *e = (s, c, table.stamp);
                }
                (e.0, e.1)
            } else {
                cache.get(term.rate)
            };
            acc.push(prob_term(term, s, c));
        }
        cell.value += acc.finish();
        cell.upto = n;
        self.levels[lv].cells[k] = cell;
        cell.value
    }
}

/// Sequential maximum-likelihood estimator with a persistent grid cache.
#[derive(Debug, Clone)]
pub struct MleEngine {
    likelihood: LogLikelihood,
    grid: DyadicGrid,
    options: MleOptions,
}

impl MleEngine {
    pub fn new(probe: ProbeConfig) -> Self {
        Self::with_options(probe, MleOptions::default())
    }

    pub fn with_options(probe: ProbeConfig, options: MleOptions) -> Self {
        Self { likelihood: LogLikelihood::new(probe), grid: DyadicGrid::default(), options }
    }

    pub fn push(&mut self, record: MeasurementRecord) {
        self.likelihood.push(record);
    }

    pub fn likelihood(&self) -> &LogLikelihood {
        &self.likelihood
    }

    /// Global maximiser of the log-likelihood over the closed `domain`.
    pub fn maximize(&mut self, domain: Interval) -> Result<EstimateResult> {
        maximize_with(&self.likelihood, &mut self.grid, &self.options, domain)
    }
}

/// One-shot maximisation over `domain`.
pub fn mle(likelihood: &LogLikelihood, domain: Interval) -> Result<EstimateResult> {
    mle_with_options(likelihood, domain, &MleOptions::default())
}

pub fn mle_with_options(
    likelihood: &LogLikelihood,
    domain: Interval,
    options: &MleOptions,
) -> Result<EstimateResult> {
    maximize_with(likelihood, &mut DyadicGrid::default(), options, domain)
}

fn maximize_with(
    ll: &LogLikelihood,
    grid: &mut DyadicGrid,
    opts: &MleOptions,
    domain: Interval,
) -> Result<EstimateResult> {
    if ll.is_empty() {
        return Err(Error::usage("maximum likelihood needs at least one record"));
    }
    let (lo, hi) = (domain.lo, domain.hi);
    let finish = |omega_hat: f64| EstimateResult {
        omega_hat,
        fisher_total: ll.fisher_total(),
        domain_used: domain,
    };
    if lo >= hi {
        return Ok(finish(lo));
    }

    // Sample positions with values; NaN marks an off-grid endpoint whose
    // value is only computed if it can be the maximiser.
    let mut xs = Vec::with_capacity(2 * opts.min_points + 4);
    let mut vs = Vec::with_capacity(xs.capacity());
    let level = (1..=opts.finest_level).find(|&lv| {
        DyadicGrid::nodes_in(lv, lo, hi).is_some_and(|(a, b)| b - a + 1 >= opts.min_points)
    });
    match level {
        Some(lv) => {
            let (a, b) = DyadicGrid::nodes_in(lv, lo, hi).expect("level was chosen nonempty");
            let rate = ll.terms().last().map_or(0.0, |t| t.rate);
            grid.prepare(lv, rate);
            if DyadicGrid::node(lv, a) > lo {
                xs.push(lo);
                vs.push(f64::NAN);
            }
            for k in a..=b {
                xs.push(DyadicGrid::node(lv, k));
                vs.push(grid.value(ll, lv, k));
            }
            if DyadicGrid::node(lv, b) < hi {
                xs.push(hi);
                vs.push(f64::NAN);
            }
        }
        None => {
            let m = opts.min_points + 1;
            let step = (hi - lo) / m as f64;
            for k in 0..=m {
                let x = if k == m { hi } else { lo + step * k as f64 };
                xs.push(x);
                vs.push(ll.eval(x));
            }
        }
    }

    let last = xs.len() - 1;
    for k in [0, last] {
        if vs[k].is_nan() {
            let d1 = ll.score(xs[k]).0;
            let uphill_inward = if k == 0 { d1 > 0.0 } else { d1 < 0.0 };
            if !uphill_inward {
                vs[k] = ll.eval(xs[k]);
            }
        }
    }
    let below = |k: usize, j: usize, strict: bool| vs[j].is_nan() || if strict { vs[k] > vs[j] } else { vs[k] >= vs[j] };
    let mut peaks: Vec<usize> = (0..=last)
        .filter(|&k| {
            !vs[k].is_nan() && (k == 0 || below(k, k - 1, true)) && (k == last || below(k, k + 1, false))
        })
        .collect();
    // stable sort keeps smaller omega first among equal values
    peaks.sort_by(|&a, &b| vs[b].total_cmp(&vs[a]));
    peaks.truncate(opts.candidates.max(1));

    // Between singular points every term is concave in omega, so the tangent
    // at a sample bounds what refinement inside its bracket can gain. That
    // lets lower peaks be discarded without refining them.
    let mut best: Option<(f64, f64)> = None;
    for &k in &peaks {
        let (d0, _) = ll.score(xs[k]);
        if let Some((_, bv)) = best {
            let reach = if d0 > 0.0 && k < last {
                xs[k + 1] - xs[k]
            } else if d0 < 0.0 && k > 0 {
                xs[k] - xs[k - 1]
            } else {
                0.0
            };
            if vs[k] + d0.abs() * reach < bv - 1e-9 * bv.abs().max(1.0) {
                continue;
            }
        }
        let x = refine(ll, &xs, k, d0, opts);
        if peaks.len() == 1 {
            return Ok(finish(x));
        }
        let (x, v) = if x == xs[k] {
            (x, vs[k])
        } else {
            let v = ll.eval(x);
            // the cached node value drifts from a direct sum in the last bits only
            if v < vs[k] - 1e-9 * vs[k].abs().max(1.0) {
                (xs[k], vs[k])
            } else {
                (x, v)
            }
        };
        let better = match best {
            None => true,
            Some((bx, bv)) => v > bv || (v == bv && x < bx),
        };
        if better {
            best = Some((x, v));
        }
    }
    let (x, _) = best.expect("at least one local maximum exists");
    Ok(finish(x))
}

/// Polishes sample `k` with a safeguarded Newton iteration on the score.
fn refine(ll: &LogLikelihood, xs: &[f64], k: usize, d0: f64, opts: &MleOptions) -> f64 {
    let x0 = xs[k];
    let (mut a, mut b) = if d0 > 0.0 && k + 1 < xs.len() {
        (x0, xs[k + 1])
    } else if d0 < 0.0 && k > 0 {
        (xs[k - 1], x0)
    } else {
        return x0;
    };
    let other = if a == x0 { b } else { a };
    let d_other = ll.score(other).0;
    if d_other.signum() == d0.signum() || !d_other.is_finite() {
        return x0;
    }
    let mut x = x0;
    let mut dx_old = b - a;
    let mut dx = dx_old;
    for _ in 0..opts.max_iterations {
        let (d1, d2) = ll.score(x);
        if d1 == 0.0 || !d1.is_finite() {
            break;
        }
        if d1 > 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - d1 / d2;
        // bisect when Newton leaves the bracket or stalls
        if !(newton > a && newton < b) || (2.0 * d1).abs() > (dx_old * d2).abs() {
            dx_old = dx;
            dx = 0.5 * (b - a);
            x = a + dx;
        } else {
            dx_old = dx;
            dx = newton - x;
            x = newton;
        }
        if dx.abs() < opts.tolerance || b - a < opts.tolerance {
            break;
        }
    }
    x
}
