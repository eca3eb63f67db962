//! The convex program left once every pair's relative position is fixed.
//!
//! With pair relations fixed the separation rows are linear, the area rows
//! become `(w + h, 2 sqrt(A), w - h)` in a second-order cone and the
//! closeness terms are norms, so each node of the search is one cone
//! program.

use super::clarabel_backend::solve_clarabel;
use super::model::Model;
use super::socp::{solve_cone_program, ConeProgram, ConeStatus, IpmSettings, Row};
use crate::geometry::Rect;

/// Relative position of a pair `(i, j)` with `i < j`. The vertical
/// relations also require the two x-ranges to overlap, so apart from
/// touching boundaries a layout satisfies exactly one relation per pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    ILeftJ,
    JLeftI,
    IBelowJ,
    JBelowI,
}

impl Relation {
    pub const ALL: [Relation; 4] = [Relation::ILeftJ, Relation::JLeftI, Relation::IBelowJ, Relation::JBelowI];

    /// How far `a` and `b` are from satisfying the relation; zero or less
    /// when they already do.
    pub fn violation(self, a: &Rect, b: &Rect) -> f64 {
        match self {
            Relation::ILeftJ => a.right() - b.x,
            Relation::JLeftI => b.right() - a.x,
            Relation::IBelowJ => (a.top() - b.y).max(x_gap(a, b)),
            Relation::JBelowI => (b.top() - a.y).max(x_gap(a, b)),
        }
    }
}

fn x_gap(a: &Rect, b: &Rect) -> f64 {
    a.x.max(b.x) - a.right().min(b.right())
}

/// Index of the unordered pair `i < j` among `n` cells.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Every unordered pair in [`pair_index`] order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Fixed relations (indexed by [`pair_index`]; `None` leaves the pair free)
/// and fixed `z` values (`None` keeps `z_i` continuous in `[0, 1]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub relations: Vec<Option<Relation>>,
    pub z: Vec<Option<bool>>,
}

impl Assignment {
    pub fn free(n: usize) -> Self {
        Assignment {
            relations: vec![None; n * n.saturating_sub(1) / 2],
            z: vec![None; n],
        }
    }

    pub fn set(&mut self, n: usize, i: usize, j: usize, r: Relation) {
        self.relations[pair_index(n, i, j)] = Some(r);
    }

    pub fn get(&self, n: usize, i: usize, j: usize) -> Option<Relation> {
        self.relations[pair_index(n, i, j)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Subproblem {
    Optimal {
        rects: Vec<Rect>,
        /// `z` values; read off the shapes when `beta = 0`.
        z: Vec<f64>,
        objective: f64,
        kkt_residual: f64,
    },
    /// `(y, z)` with `A'y + G'z = 0` and `b'y + h'z < 0` for the cone
    /// program returned by [`cone_program`].
    Infeasible { y: Vec<f64>, z: Vec<f64> },
    /// The interior point method stopped without an answer.
    Failed(ConeStatus),
}

/// Column layout of the cone program.
struct Columns {
    n: usize,
    /// For each cell whose `z` is free: the column of `z`, followed by the
    /// width and height of the wide part of the cell.
    z: Vec<Option<usize>>,
    gamma: Vec<(usize, usize, f64)>,
    total: usize,
}

impl Columns {
    fn new(m: &Model, a: &Assignment) -> Self {
        let n = m.n();
        let mut next = 4 * n;
        let z = (0..n)
            .map(|i| {
                (m.params.beta > 0.0 && a.z[i].is_none()).then(|| {
                    next += 3;
                    next - 3
                })
            })
            .collect();
        let mut gamma = Vec::new();
        for (i, j) in pairs(n) {
            let g = m.params.gamma_weight(i, j);
            if g > 0.0 {
                gamma.push((i, j, g));
            }
        }
        let total = next + gamma.len();
        Columns { n, z, gamma, total }
    }

    fn w(&self, i: usize) -> usize {
        4 * i
    }
    fn h(&self, i: usize) -> usize {
        4 * i + 1
    }
    fn x(&self, i: usize) -> usize {
        4 * i + 2
    }
    fn y(&self, i: usize) -> usize {
        4 * i + 3
    }
}

/// The cone program of `m` under `a`, and the constant that must be added
/// to its objective.
pub fn cone_program(m: &Model, a: &Assignment) -> (ConeProgram, f64) {
    let cols = Columns::new(m, a);
    let n = cols.n;
    let p = &m.params;
    let (cw, ch) = (m.container.w, m.container.h);
    let mut prog = ConeProgram {
        n: cols.total,
        c: vec![0.0; cols.total],
        ..ConeProgram::default()
    };
    let mut constant = 0.0;
    let leq = |prog: &mut ConeProgram, row: Row, rhs: f64| {
        prog.g.push(row);
        prog.h.push(rhs);
    };

    for i in 0..n {
        let c = m.weight(i);
        prog.c[cols.w(i)] = c;
        prog.c[cols.h(i)] = c;
        if p.delta[i] {
            prog.a.push(vec![(cols.x(i), 1.0)]);
            prog.b.push(0.0);
            prog.a.push(vec![(cols.y(i), 1.0)]);
            prog.b.push(0.0);
        } else {
            leq(&mut prog, vec![(cols.x(i), -1.0)], 0.0);
            leq(&mut prog, vec![(cols.y(i), -1.0)], 0.0);
        }
        leq(&mut prog, vec![(cols.x(i), 1.0), (cols.w(i), 1.0)], cw);
        leq(&mut prog, vec![(cols.y(i), 1.0), (cols.h(i), 1.0)], ch);

        match (a.z[i], cols.z[i]) {
            (Some(zi), _) => {
                let zv = if zi { 1.0 } else { 0.0 };
                constant -= p.beta * c * zv;
                leq(&mut prog, vec![(cols.h(i), 1.0), (cols.w(i), -1.0)], ch * (1.0 - zv));
                leq(&mut prog, vec![(cols.w(i), 1.0), (cols.h(i), -1.0)], cw * zv);
            }
            (None, Some(zc)) => {
                // (w, h) splits into a wide part (w1, h1) scaled by z and a
                // tall part scaled by 1 - z; the area cones on both parts
                // below make this the convex hull of the two shapes.
                let (w, h, w1, h1) = (cols.w(i), cols.h(i), zc + 1, zc + 2);
                prog.c[zc] = -p.beta * c;
                leq(&mut prog, vec![(zc, -1.0)], 0.0);
                leq(&mut prog, vec![(zc, 1.0)], 1.0);
                leq(&mut prog, vec![(h1, 1.0), (w1, -1.0)], 0.0);
                leq(&mut prog, vec![(w, 1.0), (w1, -1.0), (h, -1.0), (h1, 1.0)], 0.0);
                leq(&mut prog, vec![(w1, -1.0)], 0.0);
                leq(&mut prog, vec![(h1, -1.0)], 0.0);
                leq(&mut prog, vec![(w1, 1.0), (zc, -cw)], 0.0);
                leq(&mut prog, vec![(h1, 1.0), (zc, -ch)], 0.0);
                leq(&mut prog, vec![(w, 1.0), (w1, -1.0), (zc, cw)], cw);
                leq(&mut prog, vec![(h, 1.0), (h1, -1.0), (zc, ch)], ch);
            }
            (None, None) => {}
        }
    }

    // Left of: x_a + w_a - x_b <= 0.
    let left = |a: usize, b: usize| vec![(cols.x(a), 1.0), (cols.w(a), 1.0), (cols.x(b), -1.0)];
    let below = |a: usize, b: usize| vec![(cols.y(a), 1.0), (cols.h(a), 1.0), (cols.y(b), -1.0)];
    // b starts before a ends: x_b - x_a - w_a <= 0.
    let reaches = |a: usize, b: usize| vec![(cols.x(b), 1.0), (cols.x(a), -1.0), (cols.w(a), -1.0)];
    for (k, (i, j)) in pairs(n).into_iter().enumerate() {
        match a.relations[k] {
            Some(Relation::ILeftJ) => leq(&mut prog, left(i, j), 0.0),
            Some(Relation::JLeftI) => leq(&mut prog, left(j, i), 0.0),
            Some(Relation::IBelowJ) => leq(&mut prog, below(i, j), 0.0),
            Some(Relation::JBelowI) => leq(&mut prog, below(j, i), 0.0),
            None => continue,
        }
        if matches!(a.relations[k], Some(Relation::IBelowJ | Relation::JBelowI)) {
            leq(&mut prog, reaches(i, j), 0.0);
            leq(&mut prog, reaches(j, i), 0.0);
        }
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            if p.eta[i][j] {
                prog.a.push(left(i, j));
                prog.b.push(0.0);
            }
            if p.theta[i][j] {
                prog.a.push(below(i, j));
                prog.b.push(0.0);
            }
        }
    }
    // Every cell known to lie left of i fits in the strip left of x_i.
    let (left_of, below_of) = closures(m, a);
    let areas = &m.areas.areas;
    for i in 0..n {
        let sum = |set: &[bool]| -> f64 { (0..n).filter(|&k| set[k]).map(|k| areas[k]).sum() };
        let before_x: f64 = sum(&(0..n).map(|k| left_of[k][i]).collect::<Vec<_>>());
        let after_x: f64 = sum(&left_of[i]);
        let before_y: f64 = sum(&(0..n).map(|k| below_of[k][i]).collect::<Vec<_>>());
        let after_y: f64 = sum(&below_of[i]);
        if before_x > 0.0 {
            leq(&mut prog, vec![(cols.x(i), -1.0)], -before_x / ch);
        }
        if after_x > 0.0 {
            leq(&mut prog, vec![(cols.x(i), 1.0), (cols.w(i), 1.0)], cw - after_x / ch);
        }
        if before_y > 0.0 {
            leq(&mut prog, vec![(cols.y(i), -1.0)], -before_y / cw);
        }
        if after_y > 0.0 {
            leq(&mut prog, vec![(cols.y(i), 1.0), (cols.h(i), 1.0)], ch - after_y / cw);
        }
    }
    prog.nonneg = prog.g.len();

    for i in 0..n {
        let (w, h) = (cols.w(i), cols.h(i));
        leq(&mut prog, vec![(w, -1.0), (h, -1.0)], 0.0);
        leq(&mut prog, Vec::new(), 2.0 * m.areas.areas[i].sqrt());
        leq(&mut prog, vec![(w, -1.0), (h, 1.0)], 0.0);
        prog.soc.push(3);
        if let Some(zc) = cols.z[i] {
            let (w1, h1, r) = (zc + 1, zc + 2, 2.0 * m.areas.areas[i].sqrt());
            leq(&mut prog, vec![(w1, -1.0), (h1, -1.0)], 0.0);
            leq(&mut prog, vec![(zc, -r)], 0.0);
            leq(&mut prog, vec![(w1, -1.0), (h1, 1.0)], 0.0);
            leq(&mut prog, vec![(w, -1.0), (w1, 1.0), (h, -1.0), (h1, 1.0)], 0.0);
            leq(&mut prog, vec![(zc, r)], r);
            leq(&mut prog, vec![(w, -1.0), (w1, 1.0), (h, 1.0), (h1, -1.0)], 0.0);
            prog.soc.extend([3, 3]);
        }
    }
    let t0 = cols.total - cols.gamma.len();
    for (k, &(i, j, g)) in cols.gamma.iter().enumerate() {
        let t = t0 + k;
        prog.c[t] = g;
        leq(&mut prog, vec![(t, -1.0)], 0.0);
        leq(&mut prog, vec![(cols.x(i), -1.0), (cols.x(j), 1.0)], 0.0);
        leq(&mut prog, vec![(cols.y(i), -1.0), (cols.y(j), 1.0)], 0.0);
        prog.soc.push(3);
    }
    (prog, constant)
}

/// Which interior point code solves the cone programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// The in-crate solver in [`super::socp`].
    Native,
    /// Clarabel.
    #[default]
    Clarabel,
}

/// Transitive closures of "left of" and "below": `left[i][j]` when cell
/// `i` must end before `j` starts.
pub(crate) fn closures(m: &Model, a: &Assignment) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
    let n = m.n();
    let mut left = m.params.eta.clone();
    let mut below = m.params.theta.clone();
    for (k, (i, j)) in pairs(n).into_iter().enumerate() {
        match a.relations[k] {
            Some(Relation::ILeftJ) => left[i][j] = true,
            Some(Relation::JLeftI) => left[j][i] = true,
            Some(Relation::IBelowJ) => below[i][j] = true,
            Some(Relation::JBelowI) => below[j][i] = true,
            None => {}
        }
    }
    for rel in [&mut left, &mut below] {
        for k in 0..n {
            for i in 0..n {
                if rel[i][k] {
                    for j in 0..n {
                        if rel[k][j] {
                            rel[i][j] = true;
                        }
                    }
                }
            }
        }
    }
    (left, below)
}

/// Minimizes the objective of `m` with the pairs and `z` values fixed by
/// `a`. Free pairs are simply unconstrained, which makes the result a
/// relaxation of every completion of `a`.
pub fn solve_subproblem(m: &Model, a: &Assignment) -> Subproblem {
    solve_with(m, a, Backend::default())
}

pub fn solve_with(m: &Model, a: &Assignment, backend: Backend) -> Subproblem {
    let (prog, constant) = cone_program(m, a);
    let sol = match backend {
        Backend::Native => solve_cone_program(&prog, &IpmSettings::default()),
        Backend::Clarabel => solve_clarabel(&prog),
    };
    match sol.status {
        ConeStatus::Optimal | ConeStatus::Reduced => {
            let cols = Columns::new(m, a);
            let x = &sol.x;
            let rects: Vec<Rect> = (0..cols.n)
                .map(|i| Rect::raw(x[cols.x(i)], x[cols.y(i)], x[cols.w(i)], x[cols.h(i)]))
                .collect();
            let z = (0..cols.n)
                .map(|i| match (a.z[i], cols.z[i]) {
                    (Some(v), _) => f64::from(u8::from(v)),
                    (None, Some(zc)) => x[zc].clamp(0.0, 1.0),
                    (None, None) => f64::from(u8::from(rects[i].w >= rects[i].h)),
                })
                .collect();
            Subproblem::Optimal {
                rects,
                z,
                objective: sol.primal_obj + constant,
                kkt_residual: sol.kkt_residual(),
            }
        }
        ConeStatus::PrimalInfeasible => Subproblem::Infeasible { y: sol.y, z: sol.z },
        other => match infeasibility_margin(&prog, backend) {
            Some((margin, y, z)) if margin > INFEASIBLE_MARGIN * m.container.w.max(m.container.h) => {
                Subproblem::Infeasible { y, z }
            }
            _ => Subproblem::Failed(other),
        },
    }
}

/// Smallest violation, relative to the container size, at which a failed
/// program is declared infeasible.
const INFEASIBLE_MARGIN: f64 = 1e-8;

/// The least `t >= 0` for which every orthant row of `prog` holds when
/// relaxed by `t`, with the dual `(y, z)` of that program restricted to
/// the rows of `prog`. When `t > 0` the pair is a Farkas certificate:
/// `A'y + G'z = 0` and `b'y + h'z = -t`.
pub fn infeasibility_margin(prog: &ConeProgram, backend: Backend) -> Option<(f64, Vec<f64>, Vec<f64>)> {
    let t = prog.n;
    let k = prog.nonneg;
    let mut g: Vec<Row> = prog.g[..k]
        .iter()
        .map(|row| {
            let mut row = row.clone();
            row.push((t, -1.0));
            row
        })
        .collect();
    g.push(vec![(t, -1.0)]);
    g.extend_from_slice(&prog.g[k..]);
    let mut h = prog.h[..k].to_vec();
    h.push(0.0);
    h.extend_from_slice(&prog.h[k..]);
    let mut c = vec![0.0; t + 1];
    c[t] = 1.0;
    let phase = ConeProgram {
        n: t + 1,
        c,
        g,
        h,
        a: prog.a.clone(),
        b: prog.b.clone(),
        nonneg: k + 1,
        soc: prog.soc.clone(),
    };
    let sol = match backend {
        Backend::Native => solve_cone_program(&phase, &IpmSettings::default()),
        Backend::Clarabel => solve_clarabel(&phase),
    };
    if sol.status != ConeStatus::Optimal {
        return None;
    }
    let mut z = sol.z[..k].to_vec();
    z.extend_from_slice(&sol.z[k + 1..]);
    Some((sol.x[t], sol.y, z))
}
