//! Equal-weight divide and conquer, and its modified variant that re-routes
//! the boundary area when the sorted areas have a sharp gap at the split.

use super::{check_inputs, cut, SortedAreas};
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::layout::Layout;
use crate::tree::AreaList;

/// The gap ratio `c` of the modified divide and conquer trigger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConstant(f64);

impl SplitConstant {
    pub fn new(c: f64) -> Result<Self> {
        if c > 0.0 && !c.is_nan() {
            Ok(Self(c))
        } else {
            Err(Error::Validation(format!("split constant must be > 0, got {c}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for SplitConstant {
    fn default() -> Self {
        Self(2.0)
    }
}

/// Recursive equal-weight bisection of the sorted areas.
pub fn dc_baseline(container: Rect, areas: &AreaList) -> Result<Layout> {
    run(container, areas, None)
}

/// Divide and conquer with the gap check at each balanced split.
///
/// With split index `k`, when
/// `A[k-1] - A[k] > c * (A[k] - A[k+1])` both re-routed splits (`A[k]` moved
/// to the second run, or `A[k+1]` moved to the first) are laid out in full
/// and the one with the smaller perimeter sum is kept; equal sums keep the
/// first. The number of such double evaluations is capped at `2n`; once the
/// budget is spent the plain balanced split is used.
pub fn modified_dc(container: Rect, areas: &AreaList, c: SplitConstant) -> Result<Layout> {
    run(container, areas, Some(c.value()))
}

fn run(container: Rect, areas: &AreaList, c: Option<f64>) -> Result<Layout> {
    check_inputs(&container, areas)?;
    let sorted = SortedAreas::descending(areas);
    let n = sorted.len();
    let mut ctx = Ctx {
        s: &sorted,
        c,
        budget: 2 * n,
        cells: vec![Rect::raw(0.0, 0.0, 0.0, 0.0); n],
        scratch: Vec::new(),
    };
    ctx.partition(container, 0, n - 1);
    Ok(sorted.to_layout(container, &ctx.cells))
}

struct Ctx<'a> {
    s: &'a SortedAreas,
    c: Option<f64>,
    budget: usize,
    cells: Vec<Rect>,
    scratch: Vec<Rect>,
}

/// Balanced split index: the first `k` in `start..stop` at which moving one
/// more area into the prefix would increase `|S1 - S2|`, or `stop - 1`.
///
/// With `D(k) = S1 - S2` for prefix `start..=k`, `D` is increasing and the
/// scan stops at the first `k` with `D(k) + D(k+1) > 0`; that predicate is
/// monotone in `k`, so it is found by bisection.
pub(crate) fn balanced_split(s: &SortedAreas, start: usize, stop: usize) -> usize {
    let total = s.sum(start, stop);
    let d = |k: usize| 2.0 * s.sum(start, k) - total;
    let (mut lo, mut hi) = (start, stop - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if d(mid) + d(mid + 1) > 0.0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

impl Ctx<'_> {
    /// Lays out sorted positions `start..=stop` in `q`; returns the sum of
    /// `w + h` over the produced cells.
    fn partition(&mut self, q: Rect, start: usize, stop: usize) -> f64 {
        if start == stop {
            self.cells[start] = q;
            return q.w + q.h;
        }
        let k = balanced_split(self.s, start, stop);
        // Ties in orientation cut vertically.
        let vertical = q.w >= q.h;
        if let Some(c) = self.c {
            let a = &self.s.areas;
            let before = a[k.saturating_sub(1).max(start)];
            let after = a[(k + 1).min(stop)];
            let fires = (before - a[k]).abs() > c * (a[k] - after).abs();
            if fires && self.budget > 0 {
                self.budget -= 1;
                return self.best_of_rerouted(q, start, stop, k, vertical);
            }
        }
        let (q1, q2) = cut(&q, self.s.sum(start, k), vertical);
        self.partition(q1, start, k) + self.partition(q2, k + 1, stop)
    }

    fn best_of_rerouted(&mut self, q: Rect, start: usize, stop: usize, k: usize, vertical: bool) -> f64 {
        // The trigger cannot fire at k == start, so the first run below is non-empty.
        let first = {
            let (q1, q2) = cut(&q, self.s.sum(start, k - 1), vertical);
            self.partition(q1, start, k - 1) + self.partition(q2, k, stop)
        };
        if k + 1 >= stop {
            // Moving A[k+1] left would empty the second run.
            return first;
        }
        let saved_from = self.scratch.len();
        self.scratch.extend_from_slice(&self.cells[start..=stop]);
        let second = {
            let (q1, q2) = cut(&q, self.s.sum(start, k + 1), vertical);
            self.partition(q1, start, k + 1) + self.partition(q2, k + 2, stop)
        };
        let result = if second < first {
            second
        } else {
            self.cells[start..=stop].copy_from_slice(&self.scratch[saved_from..]);
            first
        };
        self.scratch.truncate(saved_from);
        result
    }
}
