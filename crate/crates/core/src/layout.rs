//! The common output of every layout algorithm.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{bounding_box, rotate_rect_ccw90, Rect, Vec2};
use crate::tree::LeafId;

/// A container rectangle and one cell per leaf id.
///
/// `bundles` lists groups of leaves that an algorithm placed as one block
/// (only the bundled spirals emit them).
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub container: Rect,
    pub cells: BTreeMap<LeafId, Rect>,
    pub bundles: Vec<Vec<LeafId>>,
}

impl Layout {
    pub fn new(container: Rect) -> Self {
        Self {
            container,
            cells: BTreeMap::new(),
            bundles: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, id: LeafId) -> Option<&Rect> {
        self.cells.get(&id)
    }

    pub fn translated(&self, v: Vec2) -> Layout {
        Layout {
            container: self.container.translated(v),
            cells: self.cells.iter().map(|(&id, r)| (id, r.translated(v))).collect(),
            bundles: self.bundles.clone(),
        }
    }

    /// Same layout with the container's lower-left corner moved to the origin.
    pub fn anchored(&self) -> Layout {
        self.translated(Vec2::new(-self.container.x, -self.container.y))
    }

    /// 90 degree counterclockwise rotation about the container's lower-left
    /// corner, re-anchored so that corner stays where it was.
    pub fn rotate_ccw90(&self) -> Layout {
        let c = self.container;
        Layout {
            container: rotate_rect_ccw90(&c, &c),
            cells: self
                .cells
                .iter()
                .map(|(&id, r)| (id, rotate_rect_ccw90(r, &c)))
                .collect(),
            bundles: self.bundles.clone(),
        }
    }

    pub fn total_cell_area(&self) -> f64 {
        self.cells.values().map(Rect::area).sum()
    }

    /// Bounding box of all cells; `None` for an empty layout.
    pub fn cells_bounding_box(&self) -> Option<Rect> {
        bounding_box(self.cells.values()).ok()
    }

    /// Largest pairwise interior overlap between cells.
    ///
    /// Quadratic; meant for validation and tests.
    pub fn max_pairwise_overlap(&self) -> f64 {
        let cells: Vec<&Rect> = self.cells.values().collect();
        let mut worst = 0.0_f64;
        for i in 0..cells.len() {
            for j in i + 1..cells.len() {
                worst = worst.max(cells[i].overlap_area(cells[j]));
            }
        }
        worst
    }

    /// Largest pairwise overlap computed with a sweep over x; usable for
    /// layouts with many thousands of cells.
    pub fn max_pairwise_overlap_sweep(&self) -> f64 {
        let mut cells: Vec<&Rect> = self.cells.values().collect();
        cells.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut worst = 0.0_f64;
        for i in 0..cells.len() {
            let a = cells[i];
            for b in &cells[i + 1..] {
                if b.x >= a.right() {
                    break;
                }
                worst = worst.max(a.overlap_area(b));
            }
        }
        worst
    }

    /// Checks the exact-partition contract of subdivision layouts: cells lie
    /// inside the container, their areas add up to the container area, and
    /// no two overlap. Tolerances are relative to the container area.
    pub fn partition_defects(&self, rel_tol: f64) -> Vec<String> {
        let mut defects = Vec::new();
        let area = self.container.area();
        let scale = self.container.w.max(self.container.h);
        let sum = self.total_cell_area();
        if (sum - area).abs() > rel_tol * area {
            defects.push(format!("cell areas sum to {sum}, container area {area}"));
        }
        for (id, r) in &self.cells {
            if !self.container.contains_rect(r, rel_tol * scale) {
                defects.push(format!("cell {id} lies outside the container"));
            }
        }
        let overlap = self.max_pairwise_overlap_sweep();
        if overlap > rel_tol * area {
            defects.push(format!("cells overlap by {overlap}"));
        }
        defects
    }
}

/// Flat, renderer-agnostic JSON form of a [`Layout`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDocument {
    pub container: Rect,
    pub cells: Vec<CellRecord>,
    pub bundles: Vec<Vec<LeafId>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub id: LeafId,
    pub name: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl LayoutDocument {
    /// `names` is indexed by leaf id; missing names are rendered as the id.
    pub fn from_layout(layout: &Layout, names: &[String]) -> Self {
        let cells = layout
            .cells
            .iter()
            .map(|(&id, r)| CellRecord {
                id,
                name: names.get(id).cloned().unwrap_or_else(|| id.to_string()),
                x: r.x,
                y: r.y,
                w: r.w,
                h: r.h,
            })
            .collect();
        Self {
            container: layout.container,
            cells,
            bundles: layout.bundles.clone(),
        }
    }

    pub fn to_layout(&self) -> Layout {
        Layout {
            container: self.container,
            cells: self
                .cells
                .iter()
                .map(|c| (c.id, Rect::raw(c.x, c.y, c.w, c.h)))
                .collect(),
            bundles: self.bundles.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halves() -> Layout {
        let mut l = Layout::new(Rect::raw(0.0, 0.0, 2.0, 1.0));
        l.cells.insert(0, Rect::raw(0.0, 0.0, 1.0, 1.0));
        l.cells.insert(1, Rect::raw(1.0, 0.0, 1.0, 1.0));
        l
    }

    #[test]
    fn rotation_swaps_container_dims() {
        let r = halves().rotate_ccw90();
        assert_eq!((r.container.w, r.container.h), (1.0, 2.0));
        assert!(r.partition_defects(1e-12).is_empty());
    }

    #[test]
    fn four_rotations_are_identity() {
        let l = halves();
        let back = l.rotate_ccw90().rotate_ccw90().rotate_ccw90().rotate_ccw90();
        for (id, r) in &l.cells {
            assert!(back.cells[id].approx_eq(r, 1e-12));
        }
    }

    #[test]
    fn sweep_and_quadratic_overlap_agree() {
        let mut l = halves();
        l.cells.insert(2, Rect::raw(0.5, 0.25, 1.0, 0.5));
        assert_eq!(l.max_pairwise_overlap(), l.max_pairwise_overlap_sweep());
        assert!(l.max_pairwise_overlap() > 0.0);
    }

    #[test]
    fn document_round_trip() {
        let l = halves();
        let doc = LayoutDocument::from_layout(&l, &["a".into(), "b".into()]);
        assert_eq!(doc.cells[1].name, "b");
        assert_eq!(doc.to_layout(), l);
    }
}
