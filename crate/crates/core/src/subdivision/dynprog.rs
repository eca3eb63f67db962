//! The slicing recursion memoized by box shape.
//!
//! A subproblem is "lay out sorted positions `start..=stop` in a `w x h` box".
//! Its optimum does not depend on where the box sits, so results are cached
//! per `(start, stop, w, h)` with the box anchored at the origin and moved
//! into place with a translation when reused.

use std::collections::HashMap;

use super::{check_inputs, cut, SortedAreas};
use crate::error::Result;
use crate::geometry::{translate, Rect, Vec2};
use crate::layout::Layout;
use crate::tree::AreaList;

/// Significant decimal digits kept when keying box dimensions.
const KEY_DIGITS: i32 = 12;

/// Box dimension rounded to [`KEY_DIGITS`] significant digits, stored as
/// (decimal exponent, integer mantissa).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantizedLen(i32, i64);

impl QuantizedLen {
    pub fn new(v: f64) -> Self {
        if v <= 0.0 || !v.is_finite() {
            return Self(i32::MIN, 0);
        }
        let mut e = v.log10().floor() as i32;
        let mut m = (v * 10f64.powi(KEY_DIGITS - 1 - e)).round() as i64;
        // Rounding can carry into an extra digit (9.99.. -> 10.0..).
        if m >= 10i64.pow(KEY_DIGITS as u32) {
            e += 1;
            m = (v * 10f64.powi(KEY_DIGITS - 1 - e)).round() as i64;
        }
        Self(e, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemoKey {
    pub start: u32,
    pub stop: u32,
    pub w: QuantizedLen,
    pub h: QuantizedLen,
}

impl MemoKey {
    fn new(start: usize, stop: usize, q: &Rect) -> Self {
        Self {
            start: start as u32,
            stop: stop as u32,
            w: QuantizedLen::new(q.w),
            h: QuantizedLen::new(q.h),
        }
    }
}

/// Best split found for one subproblem.
#[derive(Debug, Clone, Copy)]
struct Entry {
    /// Sum of `w + h` over the cells of the best layout.
    best: f64,
    /// Last position of the first run; unused for single areas.
    k: u32,
    vertical: bool,
}

/// Per-call cache of solved subproblems.
///
/// Entries keep the optimal split decision; the origin-anchored layout of an
/// entry is rebuilt on demand by [`MemoTable::relative_layout`].
#[derive(Debug)]
pub struct MemoTable<'a> {
    sorted: &'a SortedAreas,
    entries: HashMap<MemoKey, Entry>,
    memoize: bool,
}

impl<'a> MemoTable<'a> {
    fn new(sorted: &'a SortedAreas, memoize: bool) -> Self {
        Self {
            sorted,
            entries: HashMap::new(),
            memoize,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Optimal perimeter sum of `start..=stop` in a box of the given size.
    pub fn best(&mut self, start: usize, stop: usize, w: f64, h: f64) -> f64 {
        self.solve(&Rect::raw(0.0, 0.0, w, h), start, stop).best
    }

    fn solve(&mut self, q: &Rect, start: usize, stop: usize) -> Entry {
        let key = MemoKey::new(start, stop, q);
        if let Some(e) = self.entries.get(&key) {
            return *e;
        }
        let entry = if start == stop {
            Entry {
                best: q.w + q.h,
                k: start as u32,
                vertical: true,
            }
        } else {
            let mut best = Entry {
                best: f64::INFINITY,
                k: start as u32,
                vertical: true,
            };
            for k in start..stop {
                let s = self.sorted.sum(start, k);
                let (v1, v2) = cut(q, s, true);
                let (h1, h2) = cut(q, s, false);
                let vert = self.solve(&v1, start, k).best + self.solve(&v2, k + 1, stop).best;
                let horiz = self.solve(&h1, start, k).best + self.solve(&h2, k + 1, stop).best;
                let (tmp, vertical) = if vert < horiz { (vert, true) } else { (horiz, false) };
                if tmp < best.best {
                    best = Entry {
                        best: tmp,
                        k: k as u32,
                        vertical,
                    };
                }
            }
            best
        };
        if self.memoize {
            self.entries.insert(key, entry);
        }
        entry
    }

    /// The stored optimal layout of `start..=stop` in a `w x h` box whose
    /// lower-left corner is the origin, in sorted-position order.
    pub fn relative_layout(&mut self, start: usize, stop: usize, w: f64, h: f64) -> Vec<Rect> {
        let mut out = vec![Rect::raw(0.0, 0.0, 0.0, 0.0); stop - start + 1];
        self.fill(Rect::raw(0.0, 0.0, w, h), start, stop, start, &mut out);
        out
    }

    fn fill(&mut self, q: Rect, start: usize, stop: usize, base: usize, out: &mut [Rect]) {
        if start == stop {
            out[start - base] = q;
            return;
        }
        let e = self.solve(&q, start, stop);
        let k = e.k as usize;
        let (q1, q2) = cut(&q, self.sorted.sum(start, k), e.vertical);
        self.fill(q1, start, k, base, out);
        self.fill(q2, k + 1, stop, base, out);
    }
}

/// Same optimum as [`super::dynamic_prog`], memoized per `(start, stop, w, h)`.
///
/// A run can be reached through exponentially many sequences of cuts, each
/// leaving it a box of a different shape, so the table grows exponentially
/// with `n`. Kept for cross-checking.
pub fn dynamic_prog_memo(container: Rect, areas: &AreaList) -> Result<Layout> {
    solve_with(container, areas, true)
}

/// Same recursion without the cache; exponential, for cross-checking only.
pub fn dynamic_prog_unmemoized(container: Rect, areas: &AreaList) -> Result<Layout> {
    solve_with(container, areas, false)
}

fn solve_with(container: Rect, areas: &AreaList, memoize: bool) -> Result<Layout> {
    check_inputs(&container, areas)?;
    let sorted = SortedAreas::descending(areas);
    let n = sorted.len();
    let mut memo = MemoTable::new(&sorted, memoize);
    let relative = memo.relative_layout(0, n - 1, container.w, container.h);
    let cells = translate(&relative, Vec2::new(container.x, container.y));
    Ok(sorted.to_layout(container, &cells))
}
