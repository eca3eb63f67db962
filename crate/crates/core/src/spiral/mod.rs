//! Spiral layouts that grow their own container.
//!
//! Areas are placed smallest first. The first two sit side by side with a
//! union of aspect ratio `rho`; every later block spans one full side of the
//! current union, cycling top, right, bottom, left, so the union stays a
//! rectangle after each step. The three variants differ in how many areas go
//! into one block and how the block is cut.

mod hierarchy;

pub use hierarchy::{layout_hierarchy, HierarchyLayout, NodeCell};

use crate::error::{Error, Result};
use crate::geometry::{Rect, Vec2};
use crate::layout::Layout;
use crate::subdivision::squarify_into;
use crate::tree::{AreaList, LeafId};

/// Golden ratio, the alternative seed aspect ratio.
pub const PHI: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralConfig {
    rho: f64,
}

impl SpiralConfig {
    pub fn new(rho: f64) -> Result<Self> {
        if rho >= 1.0 && rho.is_finite() {
            Ok(Self { rho })
        } else {
            Err(Error::Validation(format!("seed aspect ratio must be >= 1, got {rho}")))
        }
    }

    pub fn golden() -> Self {
        Self { rho: PHI }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

impl Default for SpiralConfig {
    fn default() -> Self {
        Self { rho: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Top,
    Right,
    Bottom,
    Left,
}

impl Direction {
    pub fn next(self) -> Self {
        match self {
            Direction::Top => Direction::Right,
            Direction::Right => Direction::Bottom,
            Direction::Bottom => Direction::Left,
            Direction::Left => Direction::Top,
        }
    }

    fn horizontal_edge(self) -> bool {
        matches!(self, Direction::Top | Direction::Bottom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpiralKind {
    /// One area per block.
    Symmetric,
    /// Blocks as close to square as possible, filled by squarified.
    SquareBundle,
    /// Blocks sliced into a single strip of cells.
    StripBundle,
}

/// Construction state: placed cells, their bounding box and the side the
/// next block attaches to.
#[derive(Debug, Clone)]
pub struct SpiralState {
    pub placed: Vec<(LeafId, Rect)>,
    pub union_box: Rect,
    pub direction: Direction,
    placed_area: f64,
}

impl SpiralState {
    fn new(union_box: Rect) -> Self {
        Self {
            placed: Vec::new(),
            union_box,
            direction: Direction::Top,
            placed_area: 0.0,
        }
    }

    pub fn placed_area(&self) -> f64 {
        self.placed_area
    }

    /// Whether the placed cells fill their bounding box.
    pub fn is_rectangular(&self, rel_tol: f64) -> bool {
        let box_area = self.union_box.area();
        (box_area - self.placed_area).abs() <= rel_tol * box_area
    }

    fn push(&mut self, id: LeafId, r: Rect) {
        self.placed_area += r.area();
        self.placed.push((id, r));
    }

    /// Length of the union edge the next block attaches to.
    fn side(&self) -> f64 {
        if self.direction.horizontal_edge() {
            self.union_box.w
        } else {
            self.union_box.h
        }
    }

    /// Grows the union by a block of `area` on the current side and turns.
    fn attach(&mut self, area: f64) -> Rect {
        let q = self.union_box;
        let t = area / self.side();
        let (block, union) = match self.direction {
            Direction::Top => (Rect::raw(q.x, q.top(), q.w, t), Rect::raw(q.x, q.y, q.w, q.h + t)),
            Direction::Right => (Rect::raw(q.right(), q.y, t, q.h), Rect::raw(q.x, q.y, q.w + t, q.h)),
            Direction::Bottom => (Rect::raw(q.x, q.y - t, q.w, t), Rect::raw(q.x, q.y - t, q.w, q.h + t)),
            Direction::Left => (Rect::raw(q.x - t, q.y, t, q.h), Rect::raw(q.x - t, q.y, q.w + t, q.h)),
        };
        self.union_box = union;
        block
    }
}

pub fn symmetric_spiral(areas: &AreaList, cfg: SpiralConfig) -> Result<Layout> {
    spiral_traced(SpiralKind::Symmetric, areas, cfg, |_| {})
}

pub fn square_bundle_spiral(areas: &AreaList, cfg: SpiralConfig) -> Result<Layout> {
    spiral_traced(SpiralKind::SquareBundle, areas, cfg, |_| {})
}

pub fn strip_bundle_spiral(areas: &AreaList, cfg: SpiralConfig) -> Result<Layout> {
    spiral_traced(SpiralKind::StripBundle, areas, cfg, |_| {})
}

/// Runs a spiral and hands the state to `observe` after every placement.
pub fn spiral_traced<F>(kind: SpiralKind, areas: &AreaList, cfg: SpiralConfig, observe: F) -> Result<Layout>
where
    F: FnMut(&SpiralState),
{
    areas.validate()?;
    let items: Vec<(LeafId, f64)> = areas.iter().collect();
    Ok(build(kind, &items, cfg, None, observe))
}

/// Builds the spiral over `(id, area)` items in any order.
///
/// `seed_shape` fixes the width and height of the smallest item; the second
/// item then takes its height instead of the one derived from `rho`.
pub(crate) fn build<F>(
    kind: SpiralKind,
    items: &[(LeafId, f64)],
    cfg: SpiralConfig,
    seed_shape: Option<(f64, f64)>,
    mut observe: F,
) -> Layout
where
    F: FnMut(&SpiralState),
{
    let mut items = items.to_vec();
    items.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let n = items.len();
    let (id1, a1) = items[0];

    if n == 1 {
        let (w, h) = seed_shape.unwrap_or((a1.sqrt(), a1.sqrt()));
        let r = Rect::raw(0.0, 0.0, w, h);
        let mut state = SpiralState::new(r);
        state.push(id1, r);
        observe(&state);
        return finish(state, Vec::new());
    }

    let (id2, a2) = items[1];
    let (r1, h) = match seed_shape {
        Some((w1, h1)) => (Rect::raw(0.0, 0.0, w1, h1), h1),
        None => {
            let h = ((a1 + a2) / cfg.rho).sqrt();
            (Rect::raw(0.0, 0.0, a1 / h, h), h)
        }
    };
    let w2 = a2 / h;
    let r2 = Rect::raw(-w2, 0.0, w2, h);
    let mut state = SpiralState::new(Rect::raw(-w2, 0.0, w2 + r1.w, h));
    state.push(id1, r1);
    state.push(id2, r2);
    observe(&state);

    let mut bundles = Vec::new();
    let mut i = 2;
    while i < n {
        let side = state.side();
        let end = match kind {
            SpiralKind::Symmetric => i + 1,
            SpiralKind::SquareBundle => scan(&items, i, |s, _, _| (side - s / side).abs()),
            SpiralKind::StripBundle => scan(&items, i, |s, min, max| {
                let t2 = (s / side) * (s / side);
                (t2 / min).max(max / t2)
            }),
        };
        let total: f64 = items[i..end].iter().map(|x| x.1).sum();
        let block = state.attach(total);
        let group = &items[i..end];
        match kind {
            SpiralKind::Symmetric => state.push(group[0].0, block),
            SpiralKind::SquareBundle => {
                // Largest first inside the block, as squarified expects.
                let areas: Vec<f64> = group.iter().rev().map(|x| x.1).collect();
                let mut cells = vec![Rect::raw(0.0, 0.0, 0.0, 0.0); areas.len()];
                squarify_into(block, &areas, &mut cells);
                for ((id, _), r) in group.iter().rev().zip(cells) {
                    state.push(*id, r);
                }
            }
            SpiralKind::StripBundle => {
                for (id, r) in slice_strip(block, state.direction, group) {
                    state.push(id, r);
                }
            }
        }
        if group.len() > 1 {
            bundles.push(group.iter().map(|x| x.0).collect());
        }
        state.direction = state.direction.next();
        observe(&state);
        i = end;
    }
    finish(state, bundles)
}

/// End (exclusive) of the block starting at `i`: grows while the objective
/// of `(sum, min, max)` strictly improves.
fn scan<F>(items: &[(LeafId, f64)], i: usize, objective: F) -> usize
where
    F: Fn(f64, f64, f64) -> f64,
{
    // Ascending order: the first area is the minimum, the last the maximum.
    let min = items[i].1;
    let mut sum = min;
    let mut best = objective(sum, min, min);
    let mut end = i + 1;
    while end < items.len() {
        let a = items[end].1;
        let next = objective(sum + a, min, a);
        if next >= best {
            break;
        }
        sum += a;
        best = next;
        end += 1;
    }
    end
}

/// Cuts a block into consecutive cells, running clockwise around the union:
/// left to right on top, top to bottom on the right, right to left on the
/// bottom and bottom to top on the left.
fn slice_strip(block: Rect, dir: Direction, group: &[(LeafId, f64)]) -> Vec<(LeafId, Rect)> {
    let last = group.len() - 1;
    let mut out = Vec::with_capacity(group.len());
    match dir {
        Direction::Top | Direction::Bottom => {
            let t = block.h;
            let mut used = 0.0;
            for (k, &(id, a)) in group.iter().enumerate() {
                let len = if k == last { block.w - used } else { a / t };
                let x = if dir == Direction::Top {
                    block.x + used
                } else {
                    block.right() - used - len
                };
                out.push((id, Rect::raw(x, block.y, len, t)));
                used += len;
            }
        }
        Direction::Right | Direction::Left => {
            let t = block.w;
            let mut used = 0.0;
            for (k, &(id, a)) in group.iter().enumerate() {
                let len = if k == last { block.h - used } else { a / t };
                let y = if dir == Direction::Right {
                    block.top() - used - len
                } else {
                    block.y + used
                };
                out.push((id, Rect::raw(block.x, y, t, len)));
                used += len;
            }
        }
    }
    out
}

/// Moves the union to the origin and turns it landscape.
fn finish(state: SpiralState, bundles: Vec<Vec<LeafId>>) -> Layout {
    let q = state.union_box;
    let mut layout = Layout::new(q);
    layout.cells = state.placed.into_iter().collect();
    layout.bundles = bundles;
    let mut layout = layout.translated(Vec2::new(-q.x, -q.y));
    if layout.container.w < layout.container.h {
        layout = layout.rotate_ccw90();
    }
    layout
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::aspect_ratio;

    fn rho2() -> SpiralConfig {
        SpiralConfig::default()
    }

    #[test]
    fn config_validation() {
        assert!(SpiralConfig::new(0.5).is_err());
        assert!(SpiralConfig::new(f64::NAN).is_err());
        assert_eq!(SpiralConfig::new(1.0).unwrap().rho(), 1.0);
    }

    #[test]
    fn two_unit_areas() {
        let l = symmetric_spiral(&AreaList::from_areas(vec![1.0, 1.0]), rho2()).unwrap();
        assert!(l.container.approx_eq(&Rect::raw(0.0, 0.0, 2.0, 1.0), 1e-12));
        // The second area sits to the left of the first.
        assert!(l.cells[&1].approx_eq(&Rect::raw(0.0, 0.0, 1.0, 1.0), 1e-12));
        assert!(l.cells[&0].approx_eq(&Rect::raw(1.0, 0.0, 1.0, 1.0), 1e-12));
    }

    #[test]
    fn third_area_goes_on_top() {
        let l = symmetric_spiral(&AreaList::from_areas(vec![1.0, 1.0, 2.0]), rho2()).unwrap();
        assert!(l.container.approx_eq(&Rect::raw(0.0, 0.0, 2.0, 2.0), 1e-12));
        assert!(l.cells[&2].approx_eq(&Rect::raw(0.0, 1.0, 2.0, 1.0), 1e-12));
    }

    #[test]
    fn fourth_area_goes_right() {
        let l = symmetric_spiral(&AreaList::from_areas(vec![1.0, 1.0, 2.0, 4.0]), rho2()).unwrap();
        assert!(l.container.approx_eq(&Rect::raw(0.0, 0.0, 4.0, 2.0), 1e-12));
        assert!(l.cells[&3].approx_eq(&Rect::raw(2.0, 0.0, 2.0, 2.0), 1e-12));
    }

    #[test]
    fn fifth_and_sixth_go_below_and_left() {
        let l = symmetric_spiral(&AreaList::from_areas(vec![1.0, 1.0, 2.0, 4.0, 8.0, 16.0]), rho2()).unwrap();
        // Before the final shift the union is [-5,3]x[-2,2].
        assert!(l.container.approx_eq(&Rect::raw(0.0, 0.0, 8.0, 4.0), 1e-12));
        assert!(l.cells[&4].approx_eq(&Rect::raw(4.0, 0.0, 4.0, 2.0), 1e-12));
        assert!(l.cells[&5].approx_eq(&Rect::raw(0.0, 0.0, 4.0, 4.0), 1e-12));
        assert!(l.partition_defects(1e-9).is_empty());
    }

    #[test]
    fn square_bundle_of_six_units() {
        let l = square_bundle_spiral(&AreaList::from_areas(vec![1.0; 6]), rho2()).unwrap();
        assert!(l.container.approx_eq(&Rect::raw(0.0, 0.0, 3.0, 2.0), 1e-12));
        for r in l.cells.values() {
            assert!((aspect_ratio(r) - 1.0).abs() < 1e-12);
        }
        assert_eq!(l.bundles, vec![vec![2, 3, 4, 5]]);
    }

    #[test]
    fn strip_of_two_units() {
        let l = strip_bundle_spiral(&AreaList::from_areas(vec![1.0; 4]), rho2()).unwrap();
        assert!(l.container.approx_eq(&Rect::raw(0.0, 0.0, 2.0, 2.0), 1e-12));
        assert_eq!(l.bundles, vec![vec![2, 3]]);
        // Left to right along the top.
        assert!(l.cells[&2].approx_eq(&Rect::raw(0.0, 1.0, 1.0, 1.0), 1e-12));
        assert!(l.cells[&3].approx_eq(&Rect::raw(1.0, 1.0, 1.0, 1.0), 1e-12));
    }

    #[test]
    fn variants_agree_on_two_areas() {
        let a = AreaList::from_areas(vec![0.3, 0.7]);
        let s = symmetric_spiral(&a, SpiralConfig::golden()).unwrap();
        assert_eq!(s, square_bundle_spiral(&a, SpiralConfig::golden()).unwrap());
        assert_eq!(s, strip_bundle_spiral(&a, SpiralConfig::golden()).unwrap());
    }

    #[test]
    fn single_area_is_a_square() {
        let l = symmetric_spiral(&AreaList::from_areas(vec![4.0]), rho2()).unwrap();
        assert!(l.container.approx_eq(&Rect::raw(0.0, 0.0, 2.0, 2.0), 1e-12));
        assert_eq!(l.cells[&0], l.container);
    }

    #[test]
    fn union_stays_rectangular() {
        let areas = AreaList::from_areas((1..=40).map(|i| (i as f64).sqrt()).collect());
        for kind in [SpiralKind::Symmetric, SpiralKind::SquareBundle, SpiralKind::StripBundle] {
            let mut steps = 0;
            let l = spiral_traced(kind, &areas, rho2(), |s| {
                steps += 1;
                assert!(s.is_rectangular(1e-9));
            })
            .unwrap();
            assert!(steps >= 2);
            assert!(l.container.w >= l.container.h);
            assert!(l.max_pairwise_overlap() < 1e-9);
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(symmetric_spiral(&AreaList::from_areas(vec![]), rho2()).is_err());
    }
}
