//! Multi-level layouts of weighted trees.
//!
//! Container-based algorithms work top-down: the root's children split the
//! container, then every child cell is split among its own children.
//! Spirals work bottom-up: the children of the deepest nodes are laid out
//! first and each finished block is treated as one area a level higher.

use super::{build, SpiralConfig, SpiralKind};
use crate::algorithm::Algorithm;
use crate::error::{Error, Result};
use crate::geometry::{rotate_rect_ccw90, Rect};
use crate::layout::Layout;
use crate::tree::{AreaList, LeafId, WeightedTree};

/// Rectangle of one internal node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCell {
    pub name: String,
    pub depth: usize,
    pub rect: Rect,
    pub leaves: Vec<LeafId>,
}

/// Leaf cells keyed by pre-order leaf index, plus one rectangle per internal
/// node in pre-order (the root first).
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyLayout {
    pub layout: Layout,
    pub nodes: Vec<NodeCell>,
}

/// Lays out every level of `tree`.
///
/// Container-based algorithms need `container`; spirals build their own and
/// reject one.
pub fn layout_hierarchy(tree: &WeightedTree, algorithm: &Algorithm, container: Option<Rect>) -> Result<HierarchyLayout> {
    tree.validate()?;
    match (algorithm.spiral(), container) {
        (Some(_), Some(_)) => Err(Error::Usage(format!(
            "{} builds its own container; drop the container",
            algorithm.id()
        ))),
        (None, None) => Err(Error::Usage(format!("{} needs a container", algorithm.id()))),
        (None, Some(c)) => {
            let mut out = HierarchyLayout {
                layout: Layout::new(c),
                nodes: Vec::new(),
            };
            let mut next = 0;
            top_down(tree, c, 0, algorithm, &mut next, &mut out)?;
            Ok(out)
        }
        (Some((kind, cfg)), None) => {
            let mut next = 0;
            let sub = bottom_up(tree, 0, kind, cfg, &mut next);
            let mut layout = Layout::new(sub.container);
            layout.cells = sub.cells.into_iter().collect();
            layout.bundles = sub.bundles;
            Ok(HierarchyLayout { layout, nodes: sub.nodes })
        }
    }
}

fn top_down(
    node: &WeightedTree,
    rect: Rect,
    depth: usize,
    algorithm: &Algorithm,
    next: &mut LeafId,
    out: &mut HierarchyLayout,
) -> Result<Vec<LeafId>> {
    if node.is_leaf() {
        out.layout.cells.insert(*next, rect);
        *next += 1;
        return Ok(vec![*next - 1]);
    }
    let slot = out.nodes.len();
    out.nodes.push(NodeCell {
        name: node.name.clone(),
        depth,
        rect,
        leaves: Vec::new(),
    });
    let weights: Vec<f64> = node.children.iter().map(WeightedTree::total_weight).collect();
    let areas = AreaList::from_areas(weights).normalized(rect.area())?;
    let level = algorithm.layout(Some(rect), &areas)?;
    let mut leaves = Vec::new();
    for (i, child) in node.children.iter().enumerate() {
        leaves.extend(top_down(child, level.cells[&i], depth + 1, algorithm, next, out)?);
    }
    out.nodes[slot].leaves = leaves.clone();
    Ok(leaves)
}

struct Sub {
    container: Rect,
    cells: Vec<(LeafId, Rect)>,
    nodes: Vec<NodeCell>,
    bundles: Vec<Vec<LeafId>>,
}

impl Sub {
    fn leaves(&self) -> Vec<LeafId> {
        self.cells.iter().map(|c| c.0).collect()
    }

    /// Maps the block onto `target` (same area), turning it first when
    /// that matches the target's orientation better.
    fn fit_into(mut self, target: Rect) -> Sub {
        let c = self.container;
        if (c.w >= c.h) != (target.w >= target.h) {
            for (_, r) in &mut self.cells {
                *r = rotate_rect_ccw90(r, &c);
            }
            for n in &mut self.nodes {
                n.rect = rotate_rect_ccw90(&n.rect, &c);
            }
            self.container = rotate_rect_ccw90(&c, &c);
        }
        let c = self.container;
        let (sx, sy) = (target.w / c.w, target.h / c.h);
        let map = |r: &Rect| Rect::raw(target.x + (r.x - c.x) * sx, target.y + (r.y - c.y) * sy, r.w * sx, r.h * sy);
        for (_, r) in &mut self.cells {
            *r = map(r);
        }
        for n in &mut self.nodes {
            n.rect = map(&n.rect);
        }
        self.container = target;
        self
    }
}

fn bottom_up(node: &WeightedTree, depth: usize, kind: SpiralKind, cfg: SpiralConfig, next: &mut LeafId) -> Sub {
    if node.is_leaf() {
        let a = node.total_weight();
        let id = *next;
        *next += 1;
        let r = Rect::raw(0.0, 0.0, a.sqrt(), a.sqrt());
        return Sub {
            container: r,
            cells: vec![(id, r)],
            nodes: Vec::new(),
            bundles: Vec::new(),
        };
    }
    let subs: Vec<Sub> = node.children.iter().map(|c| bottom_up(c, depth + 1, kind, cfg, next)).collect();
    let items: Vec<(LeafId, f64)> = node
        .children
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.total_weight()))
        .collect();

    // An internal node placed first keeps its shape; a leaf uses `rho`.
    let smallest = items
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|x| x.0)
        .expect("internal nodes have children");
    let seed_shape = (!node.children[smallest].is_leaf()).then(|| {
        let c = subs[smallest].container;
        (c.w, c.h)
    });

    let level = build(kind, &items, cfg, seed_shape, |_| {});
    let mut cells = Vec::new();
    let mut nodes = vec![NodeCell {
        name: node.name.clone(),
        depth,
        rect: level.container,
        leaves: Vec::new(),
    }];
    let mut bundles = Vec::new();
    let mut child_leaves = Vec::with_capacity(subs.len());
    for (i, sub) in subs.into_iter().enumerate() {
        let placed = sub.fit_into(level.cells[&i]);
        child_leaves.push(placed.leaves());
        cells.extend(placed.cells);
        nodes.extend(placed.nodes);
        bundles.extend(placed.bundles);
    }
    for b in &level.bundles {
        bundles.push(b.iter().flat_map(|&i| child_leaves[i].iter().copied()).collect());
    }
    nodes[0].leaves = child_leaves.concat();
    Sub {
        container: level.container,
        cells,
        nodes,
        bundles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spiral::symmetric_spiral;

    fn two_level() -> WeightedTree {
        WeightedTree::node(
            "root",
            vec![
                WeightedTree::flat("a", [("a1", 1.0), ("a2", 2.0), ("a3", 3.0)]),
                WeightedTree::leaf("b", 2.5),
                WeightedTree::flat("c", [("c1", 0.5), ("c2", 0.5)]),
            ],
        )
    }

    #[test]
    fn container_rules() {
        let t = two_level();
        let unit = Rect::raw(0.0, 0.0, 1.0, 1.0);
        assert!(matches!(
            layout_hierarchy(&t, &Algorithm::Spiral(SpiralKind::Symmetric, SpiralConfig::default()), Some(unit)),
            Err(Error::Usage(_))
        ));
        assert!(matches!(layout_hierarchy(&t, &Algorithm::Dp, None), Err(Error::Usage(_))));
    }

    #[test]
    fn flat_tree_matches_flat_spiral() {
        let t = WeightedTree::flat("root", [("a", 1.0), ("b", 3.0), ("c", 2.0), ("d", 5.0)]);
        let h = layout_hierarchy(&t, &Algorithm::Spiral(SpiralKind::Symmetric, SpiralConfig::default()), None).unwrap();
        let flat = symmetric_spiral(&t.area_list(), SpiralConfig::default()).unwrap();
        assert_eq!(h.layout, flat);
    }

    #[test]
    fn subdivision_children_partition_their_parent() {
        let t = two_level();
        let c = Rect::raw(0.0, 0.0, 3.0, 3.0);
        let h = layout_hierarchy(&t, &Algorithm::Dp, Some(c)).unwrap();
        assert_eq!(h.layout.len(), 6);
        assert!(h.layout.partition_defects(1e-9).is_empty());
        for n in &h.nodes {
            let area: f64 = n.leaves.iter().map(|id| h.layout.cells[id].area()).sum();
            assert!((area - n.rect.area()).abs() < 1e-9 * n.rect.area());
            for id in &n.leaves {
                assert!(n.rect.contains_rect(&h.layout.cells[id], 1e-9));
            }
        }
    }

    #[test]
    fn spiral_preserves_leaf_areas() {
        let t = two_level();
        for kind in [SpiralKind::Symmetric, SpiralKind::SquareBundle, SpiralKind::StripBundle] {
            let h = layout_hierarchy(&t, &Algorithm::Spiral(kind, SpiralConfig::default()), None).unwrap();
            let expected = [1.0, 2.0, 3.0, 2.5, 0.5, 0.5];
            for (id, a) in expected.iter().enumerate() {
                let got = h.layout.cells[&id].area();
                assert!((got - a).abs() < 1e-9 * a, "{kind:?} leaf {id}: {got}");
            }
            assert!(h.layout.partition_defects(1e-9).is_empty());
            assert_eq!(h.nodes.len(), 3);
        }
    }
}
