//! Brute-force enumeration of slicing layouts, used to check the dynamic
//! program. Every slicing tree over contiguous runs of the sorted areas is
//! built explicitly, then evaluated geometrically on its own.

use super::{check_inputs, cut, SortedAreas};
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::layout::Layout;
use crate::tree::AreaList;

/// Largest input accepted by [`slicing_oracle`].
pub const ORACLE_MAX_N: usize = 8;

#[derive(Debug, Clone)]
enum SliceTree {
    Leaf(usize),
    Cut {
        vertical: bool,
        first: Box<SliceTree>,
        second: Box<SliceTree>,
    },
}

impl SliceTree {
    fn span(&self) -> (usize, usize) {
        match self {
            SliceTree::Leaf(i) => (*i, *i),
            SliceTree::Cut { first, second, .. } => (first.span().0, second.span().1),
        }
    }
}

fn enumerate(start: usize, stop: usize) -> Vec<SliceTree> {
    if start == stop {
        return vec![SliceTree::Leaf(start)];
    }
    let mut out = Vec::new();
    for k in start..stop {
        let firsts = enumerate(start, k);
        let seconds = enumerate(k + 1, stop);
        for vertical in [true, false] {
            for f in &firsts {
                for s in &seconds {
                    out.push(SliceTree::Cut {
                        vertical,
                        first: Box::new(f.clone()),
                        second: Box::new(s.clone()),
                    });
                }
            }
        }
    }
    out
}

fn realize(tree: &SliceTree, q: Rect, sorted: &SortedAreas, cells: &mut [Rect]) {
    match tree {
        SliceTree::Leaf(i) => cells[*i] = q,
        SliceTree::Cut {
            vertical,
            first,
            second,
        } => {
            let (a, b) = first.span();
            let (q1, q2) = cut(&q, sorted.sum(a, b), *vertical);
            realize(first, q1, sorted, cells);
            realize(second, q2, sorted, cells);
        }
    }
}

/// Minimum-perimeter layout among all slicing trees; `n <= 8`.
pub fn slicing_oracle(container: Rect, areas: &AreaList) -> Result<Layout> {
    check_inputs(&container, areas)?;
    if areas.len() > ORACLE_MAX_N {
        return Err(Error::TooLarge {
            n: areas.len(),
            max: ORACLE_MAX_N,
        });
    }
    let sorted = SortedAreas::descending(areas);
    let n = sorted.len();
    let mut cells = vec![Rect::raw(0.0, 0.0, 0.0, 0.0); n];
    let mut best_cells = cells.clone();
    let mut best = f64::INFINITY;
    for tree in enumerate(0, n - 1) {
        realize(&tree, container, &sorted, &mut cells);
        let p: f64 = cells.iter().map(|r| r.w + r.h).sum();
        if p < best {
            best = p;
            best_cells.copy_from_slice(&cells);
        }
    }
    Ok(sorted.to_layout(container, &best_cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subdivision::half_perimeter_sum;

    #[test]
    fn tree_counts() {
        // Catalan(n-1) shapes times 2^(n-1) orientations.
        assert_eq!(enumerate(0, 0).len(), 1);
        assert_eq!(enumerate(0, 2).len(), 2 * 4);
        assert_eq!(enumerate(0, 5).len(), 42 * 32);
    }

    #[test]
    fn single_area() {
        let c = Rect::raw(0.0, 0.0, 2.0, 1.0);
        let l = slicing_oracle(c, &AreaList::from_areas(vec![2.0])).unwrap();
        assert_eq!(l.cells[&0], c);
    }

    #[test]
    fn two_areas_take_the_better_single_cut() {
        let c = Rect::raw(0.0, 0.0, 2.0, 1.0);
        let l = slicing_oracle(c, &AreaList::from_areas(vec![1.5, 0.5])).unwrap();
        // Vertical: (0.75+1.5... ) widths 1.5, 0.5 -> (1.5+1)+(0.5+1) = 4.
        // Horizontal: heights 0.75, 0.25 -> (2+0.75)+(2+0.25) = 5.
        assert!((half_perimeter_sum(&l) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_large_inputs() {
        let c = Rect::raw(0.0, 0.0, 9.0, 1.0);
        assert!(matches!(
            slicing_oracle(c, &AreaList::from_areas(vec![1.0; 9])),
            Err(Error::TooLarge { .. })
        ));
    }
}
