//! Guillotine-cut layouts inside a given container.
//!
//! All algorithms here sort the areas in non-increasing order (ties by leaf
//! id) and then recursively split contiguous runs of that order with
//! straight cuts. A vertical cut puts the prefix run on the left; a
//! horizontal cut puts it on top.

mod dc;
mod dynprog;
mod envelope;
mod oracle;
mod squarified;

pub use dc::{dc_baseline, modified_dc, SplitConstant};
pub use dynprog::{dynamic_prog_memo, dynamic_prog_unmemoized, MemoKey, MemoTable};
pub use envelope::dynamic_prog;
pub use oracle::{slicing_oracle, ORACLE_MAX_N};
pub use squarified::{squarified, squarify_into};

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::layout::Layout;
use crate::tree::{AreaList, AREA_MATCH_TOL};

/// Areas sorted non-increasing together with their ids.
#[derive(Debug, Clone)]
pub(crate) struct SortedAreas {
    pub ids: Vec<usize>,
    pub areas: Vec<f64>,
    /// `prefix[i]` is the sum of the first `i` areas.
    pub prefix: Vec<f64>,
}

impl SortedAreas {
    pub fn descending(list: &AreaList) -> Self {
        let order = list.order_descending();
        let ids: Vec<usize> = order.iter().map(|&i| list.ids[i]).collect();
        let areas: Vec<f64> = order.iter().map(|&i| list.areas[i]).collect();
        let mut prefix = Vec::with_capacity(areas.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for a in &areas {
            acc += a;
            prefix.push(acc);
        }
        Self { ids, areas, prefix }
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    /// Sum of areas `start..=stop`.
    pub fn sum(&self, start: usize, stop: usize) -> f64 {
        self.prefix[stop + 1] - self.prefix[start]
    }

    pub fn to_layout(&self, container: Rect, cells: &[Rect]) -> Layout {
        let mut layout = Layout::new(container);
        for (pos, r) in cells.iter().enumerate() {
            layout.cells.insert(self.ids[pos], *r);
        }
        layout
    }
}

/// Validates the inputs shared by every subdivision algorithm.
pub(crate) fn check_inputs(container: &Rect, areas: &AreaList) -> Result<()> {
    areas.validate()?;
    let total = areas.total();
    let target = container.area();
    if (total - target).abs() > AREA_MATCH_TOL * target {
        return Err(Error::AreaMismatch {
            expected: target,
            actual: total,
        });
    }
    Ok(())
}

/// Splits `q` so that the first piece has area `s`.
///
/// Vertical cuts put the first piece on the left, horizontal cuts put it on
/// top.
pub(crate) fn cut(q: &Rect, s: f64, vertical: bool) -> (Rect, Rect) {
    if vertical {
        let w1 = s / q.h;
        (
            Rect::raw(q.x, q.y, w1, q.h),
            Rect::raw(q.x + w1, q.y, q.w - w1, q.h),
        )
    } else {
        let h1 = s / q.w;
        (
            Rect::raw(q.x, q.y + q.h - h1, q.w, h1),
            Rect::raw(q.x, q.y, q.w, q.h - h1),
        )
    }
}

/// Sum of `w + h` over cells, the internal perimeter scale.
pub fn half_perimeter_sum(layout: &Layout) -> f64 {
    layout.cells.values().map(|r| r.w + r.h).sum()
}
