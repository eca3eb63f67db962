//! Squarified layout: greedy rows along the shorter side of the free space.

use super::{check_inputs, SortedAreas};
use crate::error::Result;
use crate::geometry::Rect;
use crate::layout::Layout;
use crate::tree::AreaList;

/// Classic squarified treemap of `areas` in `container`.
pub fn squarified(container: Rect, areas: &AreaList) -> Result<Layout> {
    check_inputs(&container, areas)?;
    let sorted = SortedAreas::descending(areas);
    let mut cells = vec![Rect::raw(0.0, 0.0, 0.0, 0.0); sorted.len()];
    squarify_into(container, &sorted.areas, &mut cells);
    Ok(sorted.to_layout(container, &cells))
}

/// Worst aspect ratio of a row with the given sum/min/max laid along `side`.
fn worst(sum: f64, min: f64, max: f64, side: f64) -> f64 {
    let s2 = sum * sum;
    let w2 = side * side;
    (w2 * max / s2).max(s2 / (w2 * min))
}

/// Lays `areas` (already in the desired order) into `rect`, writing one cell
/// per area into `out`. The areas must sum to the area of `rect`.
pub fn squarify_into(rect: Rect, areas: &[f64], out: &mut [Rect]) {
    debug_assert_eq!(areas.len(), out.len());
    let n = areas.len();
    let mut free = rect;
    let mut start = 0;
    while start < n {
        if start == n - 1 {
            out[start] = free;
            break;
        }
        let side = free.w.min(free.h);
        let (mut sum, mut min, mut max) = (areas[start], areas[start], areas[start]);
        let mut current = worst(sum, min, max, side);
        let mut end = start + 1;
        while end < n {
            let a = areas[end];
            let next = worst(sum + a, min.min(a), max.max(a), side);
            if next > current {
                break;
            }
            sum += a;
            min = min.min(a);
            max = max.max(a);
            current = next;
            end += 1;
        }
        if end == n {
            // Last row takes whatever is left so the partition closes exactly.
            sum = free.area();
        }
        free = place_row(free, &areas[start..end], sum, &mut out[start..end]);
        start = end;
    }
}

/// Places a row along the shorter side of `free` and returns what is left.
fn place_row(free: Rect, row: &[f64], sum: f64, out: &mut [Rect]) -> Rect {
    let last = row.len() - 1;
    if free.w >= free.h {
        // Column on the left, cells from top to bottom.
        let cw = (sum / free.h).min(free.w);
        let mut top = free.top();
        for (i, a) in row.iter().enumerate() {
            let ch = if i == last { top - free.y } else { a / cw };
            out[i] = Rect::raw(free.x, top - ch, cw, ch);
            top -= ch;
        }
        Rect::raw(free.x + cw, free.y, free.w - cw, free.h)
    } else {
        // Row along the top, cells from left to right.
        let rh = (sum / free.w).min(free.h);
        let mut left = free.x;
        for (i, a) in row.iter().enumerate() {
            let cw = if i == last { free.right() - left } else { a / rh };
            out[i] = Rect::raw(left, free.top() - rh, cw, rh);
            left += cw;
        }
        Rect::raw(free.x, free.y, free.w, free.h - rh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::aspect_ratio;

    #[test]
    fn single_area_fills_container() {
        let c = Rect::raw(0.0, 0.0, 2.0, 3.0);
        let l = squarified(c, &AreaList::from_areas(vec![6.0])).unwrap();
        assert_eq!(l.cells[&0], c);
    }

    #[test]
    fn four_quarters_make_four_squares() {
        let c = Rect::raw(0.0, 0.0, 1.0, 1.0);
        let l = squarified(c, &AreaList::from_areas(vec![0.25; 4])).unwrap();
        for r in l.cells.values() {
            assert!((r.w - 0.5).abs() < 1e-12 && (r.h - 0.5).abs() < 1e-12);
            assert!((aspect_ratio(r) - 1.0).abs() < 1e-12);
        }
        assert!(l.partition_defects(1e-9).is_empty());
    }

    #[test]
    fn empty_input_is_an_error() {
        let c = Rect::raw(0.0, 0.0, 1.0, 1.0);
        assert!(squarified(c, &AreaList::from_areas(vec![])).is_err());
    }

    #[test]
    fn classic_six_area_example() {
        // The 6x4 example from the original squarified description.
        let c = Rect::raw(0.0, 0.0, 6.0, 4.0);
        let l = squarified(c, &AreaList::from_areas(vec![6.0, 6.0, 4.0, 3.0, 2.0, 2.0, 1.0]))
            .unwrap();
        assert!(l.partition_defects(1e-9).is_empty());
        // First row: the two 6s stacked in a 3-wide column.
        assert!(l.cells[&0].approx_eq(&Rect::raw(0.0, 2.0, 3.0, 2.0), 1e-12));
        assert!(l.cells[&1].approx_eq(&Rect::raw(0.0, 0.0, 3.0, 2.0), 1e-12));
    }
}
