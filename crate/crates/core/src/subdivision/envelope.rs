//! Minimum-perimeter slicing layouts through cost envelopes.
//!
//! Put a run of sorted areas into a box of width `w` and area `S`. Under any
//! fixed slicing tree every cell's width scales with `w` or with `1 / w`, so
//! the tree costs `a w + b / w` for constants `a, b > 0`. The best cost of the
//! run is therefore the lower envelope of these curves, and only points on
//! the lower-left convex hull of the `(a, b)` set can attain it. Hulls
//! compose: a horizontal cut keeps `w` for both pieces (Minkowski sum), a
//! vertical cut hands piece `p` the width `w S_p / S` (scale `a` by `S_p / S`
//! and `b` by `S / S_p`, then sum). Each run keeps only the hull vertices
//! that are optimal for some width the container can give it.

use super::{check_inputs, cut, SortedAreas};
use crate::error::Result;
use crate::geometry::Rect;
use crate::layout::Layout;
use crate::tree::AreaList;

/// Relative widening of the width range a run may be asked about.
const RANGE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
enum Origin {
    Leaf,
    Split {
        k: u32,
        vertical: bool,
        first: u32,
        second: u32,
    },
}

#[derive(Debug, Clone, Copy)]
struct Vertex {
    a: f64,
    b: f64,
    origin: Origin,
}

impl Vertex {
    fn cost(&self, w: f64) -> f64 {
        self.a * w + self.b / w
    }
}

/// Per-run hulls, `a` increasing and `b` decreasing along each.
struct Envelopes {
    n: usize,
    hulls: Vec<Vec<Vertex>>,
}

impl Envelopes {
    fn slot(&self, start: usize, stop: usize) -> usize {
        start * self.n + stop
    }

    fn hull(&self, start: usize, stop: usize) -> &[Vertex] {
        &self.hulls[self.slot(start, stop)]
    }

    fn build(sorted: &SortedAreas, container: &Rect) -> Self {
        let n = sorted.len();
        let mut env = Envelopes {
            n,
            hulls: vec![Vec::new(); n * n],
        };
        let mut candidates = Vec::new();
        for len in 1..=n {
            for start in 0..=n - len {
                let stop = start + len - 1;
                let total = sorted.sum(start, stop);
                let hull = if len == 1 {
                    vec![Vertex {
                        a: 1.0,
                        b: total,
                        origin: Origin::Leaf,
                    }]
                } else {
                    candidates.clear();
                    for k in start..stop {
                        let (p, q) = (env.hull(start, k), env.hull(k + 1, stop));
                        let s1 = sorted.sum(start, k) / total;
                        let s2 = sorted.sum(k + 1, stop) / total;
                        minkowski(p, q, (1.0, 1.0), k, false, &mut candidates);
                        minkowski(p, q, (s1, s2), k, true, &mut candidates);
                    }
                    let range = (total / container.h * (1.0 - RANGE_SLACK), container.w * (1.0 + RANGE_SLACK));
                    lower_hull(&mut candidates, range)
                };
                let slot = env.slot(start, stop);
                env.hulls[slot] = hull;
            }
        }
        env
    }

    /// Cells of `start..=stop` in `q` following hull vertex `v`.
    fn place(&self, sorted: &SortedAreas, q: Rect, start: usize, stop: usize, v: usize, out: &mut [Rect]) {
        match self.hull(start, stop)[v].origin {
            Origin::Leaf => out[start] = q,
            Origin::Split {
                k,
                vertical,
                first,
                second,
            } => {
                let k = k as usize;
                let (q1, q2) = cut(&q, sorted.sum(start, k), vertical);
                self.place(sorted, q1, start, k, first as usize, out);
                self.place(sorted, q2, k + 1, stop, second as usize, out);
            }
        }
    }
}

/// Appends the Minkowski sum of `p` scaled by `(c, 1/c)` for `c = scale.0`
/// and `q` scaled likewise by `scale.1`. Both chains are convex with slopes
/// increasing, so the sum walks them in slope order.
fn minkowski(p: &[Vertex], q: &[Vertex], scale: (f64, f64), k: usize, vertical: bool, out: &mut Vec<Vertex>) {
    let at = |h: &[Vertex], i: usize, c: f64| (h[i].a * c, h[i].b / c);
    let (mut i, mut j) = (0, 0);
    loop {
        let (pa, pb) = at(p, i, scale.0);
        let (qa, qb) = at(q, j, scale.1);
        out.push(Vertex {
            a: pa + qa,
            b: pb + qb,
            origin: Origin::Split {
                k: k as u32,
                vertical,
                first: i as u32,
                second: j as u32,
            },
        });
        let step_p = (i + 1 < p.len()).then(|| {
            let (na, nb) = at(p, i + 1, scale.0);
            (nb - pb) / (na - pa)
        });
        let step_q = (j + 1 < q.len()).then(|| {
            let (na, nb) = at(q, j + 1, scale.1);
            (nb - qb) / (na - qa)
        });
        match (step_p, step_q) {
            (None, None) => break,
            (Some(_), None) => i += 1,
            (None, Some(_)) => j += 1,
            (Some(sp), Some(sq)) => {
                if sp <= sq {
                    i += 1;
                } else {
                    j += 1;
                }
            }
        }
    }
}

fn cross(o: &Vertex, a: &Vertex, b: &Vertex) -> f64 {
    (a.a - o.a) * (b.b - o.b) - (a.b - o.b) * (b.a - o.a)
}

/// Vertices of the lower-left hull of `points` that minimize `a w + b / w`
/// for some `w` in `range`.
fn lower_hull(points: &mut [Vertex], range: (f64, f64)) -> Vec<Vertex> {
    points.sort_by(|p, q| p.a.total_cmp(&q.a).then(p.b.total_cmp(&q.b)));
    let mut hull: Vec<Vertex> = Vec::new();
    for p in points.iter() {
        if hull.last().is_some_and(|l| p.b >= l.b) {
            continue;
        }
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    // Vertex m is optimal for w^2 between the negated slopes of its two
    // edges; the first vertex covers the widest boxes.
    let (t_lo, t_hi) = (range.0 * range.0, range.1 * range.1);
    let slope = |m: usize| (hull[m + 1].b - hull[m].b) / (hull[m + 1].a - hull[m].a);
    let last = hull.len() - 1;
    let keep: Vec<bool> = (0..hull.len())
        .map(|m| {
            let upper = if m == 0 { f64::INFINITY } else { -slope(m - 1) };
            let lower = if m == last { 0.0 } else { -slope(m) };
            upper >= t_lo && lower <= t_hi
        })
        .collect();
    hull.into_iter().zip(keep).filter_map(|(v, k)| k.then_some(v)).collect()
}

/// Minimum-perimeter slicing layout over contiguous splits of the sorted
/// areas, with either cut orientation at every split.
///
/// Among equally good layouts the one whose cost grows least with the box
/// width wins.
pub fn dynamic_prog(container: Rect, areas: &AreaList) -> Result<Layout> {
    check_inputs(&container, areas)?;
    let sorted = SortedAreas::descending(areas);
    let n = sorted.len();
    let env = Envelopes::build(&sorted, &container);
    let root = env.hull(0, n - 1);
    let mut best = 0;
    for (m, v) in root.iter().enumerate() {
        if v.cost(container.w) < root[best].cost(container.w) {
            best = m;
        }
    }
    let mut cells = vec![Rect::raw(0.0, 0.0, 0.0, 0.0); n];
    env.place(&sorted, container, 0, n - 1, best, &mut cells);
    Ok(sorted.to_layout(container, &cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subdivision::{dynamic_prog_memo, half_perimeter_sum};

    fn v(a: f64, b: f64) -> Vertex {
        Vertex { a, b, origin: Origin::Leaf }
    }

    #[test]
    fn hull_drops_dominated_and_interior_points() {
        let mut pts = vec![v(1.0, 4.0), v(2.0, 2.0), v(3.0, 1.9), v(4.0, 1.0), v(2.5, 3.0), v(5.0, 1.0)];
        let h = lower_hull(&mut pts, (1e-3, 1e3));
        let ab: Vec<_> = h.iter().map(|p| (p.a, p.b)).collect();
        assert_eq!(ab, vec![(1.0, 4.0), (2.0, 2.0), (4.0, 1.0)]);
    }

    #[test]
    fn hull_keeps_only_reachable_widths() {
        let mut pts = vec![v(1.0, 4.0), v(2.0, 2.0), v(4.0, 1.0)];
        // Slopes -2 and -1/2: the middle vertex wins for w^2 in [0.5, 2].
        let h = lower_hull(&mut pts, (0.8, 1.2));
        assert_eq!(h.len(), 1);
        assert_eq!((h[0].a, h[0].b), (2.0, 2.0));
    }

    #[test]
    fn minkowski_of_scaled_chains() {
        let p = [v(1.0, 1.0)];
        let mut out = Vec::new();
        minkowski(&p, &p, (0.5, 0.5), 0, true, &mut out);
        assert_eq!(out.len(), 1);
        assert_eq!((out[0].a, out[0].b), (1.0, 4.0));
    }

    #[test]
    fn agrees_with_the_keyed_recursion() {
        let c = Rect::raw(0.0, 0.0, 1.6, 0.9);
        let mut seed = 7u64;
        for n in 1..=9 {
            for _ in 0..20 {
                let areas: Vec<f64> = (0..n)
                    .map(|_| {
                        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        0.05 + (seed >> 11) as f64 / (1u64 << 53) as f64
                    })
                    .collect();
                let list = AreaList::from_areas(areas).normalized(c.area()).unwrap();
                let fast = half_perimeter_sum(&dynamic_prog(c, &list).unwrap());
                let slow = half_perimeter_sum(&dynamic_prog_memo(c, &list).unwrap());
                assert!((fast - slow).abs() < 1e-9, "n={n}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn two_halves_cost_six() {
        let unit = Rect::raw(0.0, 0.0, 1.0, 1.0);
        let l = dynamic_prog(unit, &AreaList::from_areas(vec![0.5, 0.5])).unwrap();
        assert!((2.0 * half_perimeter_sum(&l) - 6.0).abs() < 1e-12);
        assert!(l.partition_defects(1e-12).is_empty());
    }

    #[test]
    fn hundreds_of_areas() {
        let areas: Vec<f64> = (1..=150).map(|i| 1.0 / i as f64).collect();
        let c = Rect::raw(0.0, 0.0, 2.0, 1.0);
        let list = AreaList::from_areas(areas).normalized(2.0).unwrap();
        let l = dynamic_prog(c, &list).unwrap();
        assert!(l.partition_defects(1e-9).is_empty());
    }
}
