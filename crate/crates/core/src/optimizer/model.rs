//! The perimeter-minimization model: parameters, variables and constraints.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::layout::Layout;
use crate::tree::AreaList;

/// Preference parameters. All zero means plain total-perimeter minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Weight each cell's perimeter by its area.
    pub area_weighted: bool,
    /// Reward for cells with `w >= h`.
    pub beta: f64,
    /// `gamma[i][j] = true` asks for `i` close to `j`.
    pub gamma: Vec<Vec<bool>>,
    /// At most one cell pinned to the lower-left corner.
    pub delta: Vec<bool>,
    /// `eta[i][j] = true`: `j` must touch the right side of `i`.
    pub eta: Vec<Vec<bool>>,
    /// `theta[i][j] = true`: `j` must touch the top side of `i`.
    pub theta: Vec<Vec<bool>>,
    /// Minimum overlap of projections that count as overlapping.
    /// `None` picks `1e-6 * max(W, H)`.
    pub epsilon: Option<f64>,
}

impl ModelParams {
    pub fn zero(n: usize) -> Self {
        ModelParams {
            area_weighted: false,
            beta: 0.0,
            gamma: vec![vec![false; n]; n],
            delta: vec![false; n],
            eta: vec![vec![false; n]; n],
            theta: vec![vec![false; n]; n],
            epsilon: None,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// True when only the perimeter term and no placement rules are active.
    pub fn is_plain(&self) -> bool {
        !self.area_weighted
            && self.beta == 0.0
            && !self.delta.iter().any(|&d| d)
            && [&self.gamma, &self.eta, &self.theta]
                .iter()
                .all(|m| m.iter().flatten().all(|&v| !v))
    }

    /// True when reflecting a layout in either axis of the container
    /// keeps it feasible at the same objective.
    pub fn mirror_symmetric(&self) -> bool {
        !self.delta.iter().any(|&d| d) && [&self.eta, &self.theta].iter().all(|m| m.iter().flatten().all(|&v| !v))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let square = |m: &Vec<Vec<bool>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if self.delta.len() != n || !square(&self.gamma) || !square(&self.eta) || !square(&self.theta) {
            return Err(Error::Validation(format!("parameter dimensions do not match n = {n}")));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Validation(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Validation(format!("epsilon must be positive, got {e}")));
            }
        }
        let pinned: Vec<usize> = (0..n).filter(|&i| self.delta[i]).collect();
        if pinned.len() > 1 {
            return Err(Error::Validation(format!("delta pins more than one cell: {pinned:?}")));
        }
        let mut bad = Vec::new();
        for (name, m) in [("eta", &self.eta), ("theta", &self.theta)] {
            for i in 0..n {
                if m[i][i] {
                    bad.push(format!("{name}[{i}][{i}]"));
                }
                for j in i + 1..n {
                    if m[i][j] && m[j][i] {
                        bad.push(format!("{name}[{i}][{j}] and {name}[{j}][{i}]"));
                    }
                }
            }
        }
        for i in 0..n {
            if self.gamma[i][i] {
                bad.push(format!("gamma[{i}][{i}]"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(format!("conflicting pairs: {}", bad.join(", "))))
        }
    }

    pub(crate) fn gamma_weight(&self, i: usize, j: usize) -> f64 {
        f64::from(u8::from(self.gamma[i][j]) + u8::from(self.gamma[j][i]))
    }
}

/// An instance of the model: container, areas and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub container: Rect,
    pub areas: AreaList,
    pub params: ModelParams,
    pub epsilon: f64,
}

/// Checks the parameters and builds the model. The container is taken to sit
/// at the origin; the areas must already sum to its area.
pub fn build_model(container: Rect, areas: AreaList, params: ModelParams) -> Result<Model> {
    areas.validate()?;
    params.validate(areas.len())?;
    if !(container.w > 0.0 && container.h > 0.0) {
        return Err(Error::InvalidGeometry(format!("container {container:?} has no area")));
    }
    let epsilon = params.epsilon.unwrap_or(1e-6 * container.w.max(container.h));
    Ok(Model {
        container: Rect::raw(0.0, 0.0, container.w, container.h),
        areas,
        params,
        epsilon,
    })
}

impl Model {
    pub fn n(&self) -> usize {
        self.areas.len()
    }

    /// Width, height and corner of every cell.
    pub fn continuous_count(&self) -> usize {
        4 * self.n()
    }

    /// `x_ij`, `y_ij` for ordered pairs plus one `z_i` per cell.
    pub fn binary_count(&self) -> usize {
        let n = self.n();
        2 * n * (n - 1) + n
    }

    /// Objective weight of cell `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if self.params.area_weighted {
            self.areas.areas[i]
        } else {
            1.0
        }
    }

    /// Plain-text listing with one variable or constraint per line.
    pub fn export(&self) -> String {
        let n = self.n();
        let (w, h) = (self.container.w, self.container.h);
        let p = &self.params;
        let mut out = String::new();
        let _ = writeln!(out, "# container {w} x {h}, n = {n}, epsilon = {}", self.epsilon);
        for i in 0..n {
            let _ = writeln!(out, "var w{i} >= 0");
            let _ = writeln!(out, "var h{i} >= 0");
            let _ = writeln!(out, "var vx{i} >= 0");
            let _ = writeln!(out, "var vy{i} >= 0");
        }
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let _ = writeln!(out, "bin x{i}_{j}");
                let _ = writeln!(out, "bin y{i}_{j}");
            }
        }
        for i in 0..n {
            let _ = writeln!(out, "bin z{i}");
        }
        let mut obj = Vec::new();
        for i in 0..n {
            let c = self.weight(i);
            obj.push(format!("{c} * (w{i} + h{i} - {} * z{i})", p.beta));
        }
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i && p.gamma[i][j]) {
                obj.push(format!("norm(vx{i} - vx{j}, vy{i} - vy{j})"));
            }
        }
        let _ = writeln!(out, "min {}", obj.join(" + "));
        for i in 0..n {
            let a = self.areas.areas[i];
            let d = if p.delta[i] { 0.0 } else { w + h };
            let _ = writeln!(out, "(1) log({a}) - log(w{i}) - log(h{i}) <= 0");
            let _ = writeln!(out, "(2) vx{i} + w{i} <= {w}");
            let _ = writeln!(out, "(3) vy{i} + h{i} <= {h}");
            let _ = writeln!(out, "(4) vx{i} + vy{i} <= {d}");
        }
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let (e, t) = (u8::from(p.eta[i][j]), u8::from(p.theta[i][j]));
                let eps = self.epsilon;
                let _ = writeln!(out, "(5) vx{i} - vx{j} + w{i} <= {w} * x{i}_{j}");
                let _ = writeln!(out, "(6) vx{i} - vx{j} + w{i} >= ({eps} - {w} * (1 - x{i}_{j})) * {}", 1 - e);
                let _ = writeln!(out, "(7) x{i}_{j} <= {}", 1 - e);
                let _ = writeln!(out, "(8) vy{i} - vy{j} + h{i} <= {h} * y{i}_{j}");
                let _ = writeln!(out, "(9) vy{i} - vy{j} + h{i} >= ({eps} - {h} * (1 - y{i}_{j})) * {}", 1 - t);
                let _ = writeln!(out, "(10) y{i}_{j} <= {}", 1 - t);
                let _ = writeln!(out, "(11) x{i}_{j} + x{j}_{i} + y{i}_{j} + y{j}_{i} <= 3");
            }
        }
        for i in 0..n {
            let _ = writeln!(out, "(12) w{i} >= h{i} - {h} * (1 - z{i})");
            let _ = writeln!(out, "(13) h{i} >= w{i} - {w} * z{i}");
        }
        out
    }
}

/// Solver outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    NodeLimit,
}

/// A point of the model: cells in model order plus the `z` indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub rects: Vec<Rect>,
    pub z: Vec<bool>,
    /// Objective in `sum(w + h)` units.
    pub objective: f64,
    /// `sum 2(w + h)`, the total perimeter of the cells.
    pub reported_perimeter: f64,
    /// Proven lower bound on the optimal objective.
    pub bound: f64,
    pub status: Status,
    pub nodes: u64,
}

impl Solution {
    /// Wraps `rects` with the `z` indicators read off their shapes and the
    /// objective evaluated under `m`.
    pub fn from_rects(m: &Model, rects: Vec<Rect>, status: Status) -> Solution {
        let z = rects.iter().map(|r| r.w >= r.h).collect();
        let mut s = Solution {
            rects,
            z,
            objective: 0.0,
            reported_perimeter: 0.0,
            bound: f64::NEG_INFINITY,
            status,
            nodes: 0,
        };
        s.objective = evaluate_objective(m, &s);
        s.reported_perimeter = s.rects.iter().map(|r| 2.0 * (r.w + r.h)).sum();
        s
    }

    /// Reads a layout whose cells are keyed by the ids of `m.areas`.
    pub fn from_layout(m: &Model, layout: &Layout) -> Result<Solution> {
        let rects = m
            .areas
            .ids
            .iter()
            .map(|id| {
                layout
                    .cells
                    .get(id)
                    .map(|r| Rect::raw(r.x - layout.container.x, r.y - layout.container.y, r.w, r.h))
                    .ok_or(Error::IdMismatch)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Solution::from_rects(m, rects, Status::Feasible))
    }

    pub fn to_layout(&self, m: &Model) -> Layout {
        let mut l = Layout::new(m.container);
        for (id, r) in m.areas.ids.iter().zip(&self.rects) {
            l.cells.insert(*id, *r);
        }
        l
    }
}

/// Objective value of `s` under `m`, in `sum(w + h)` units.
pub fn evaluate_objective(m: &Model, s: &Solution) -> f64 {
    let p = &m.params;
    let mut total = 0.0;
    for (i, r) in s.rects.iter().enumerate() {
        let z = if s.z[i] { 1.0 } else { 0.0 };
        total += m.weight(i) * (r.w + r.h - p.beta * z);
    }
    let n = s.rects.len();
    for i in 0..n {
        for j in 0..n {
            if i != j && p.gamma[i][j] {
                let (a, b) = (&s.rects[i], &s.rects[j]);
                total += (a.x - b.x).hypot(a.y - b.y);
            }
        }
    }
    total
}

/// `sum 2 sqrt(A_i)`: no cell of area `A` has `w + h` below `2 sqrt(A)`.
pub fn lower_bound(areas: &AreaList) -> f64 {
    areas.areas.iter().map(|a| 2.0 * a.sqrt()).sum()
}
