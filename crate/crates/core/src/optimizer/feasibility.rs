//! Constraint-by-constraint check of a candidate solution.

use std::fmt;

use super::model::{Model, Solution};

/// One violated constraint. `constraint` is the model's row number, 0 for
/// the sign and dimension checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: u8,
    pub i: usize,
    pub j: Option<usize>,
    pub amount: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.j {
            Some(j) => write!(f, "({}) i={} j={j}: {:.3e}", self.constraint, self.i, self.amount),
            None => write!(f, "({}) i={}: {:.3e}", self.constraint, self.i, self.amount),
        }
    }
}

/// The relative-position indicators that `s` implies: `x[i][j] = false`
/// when `j` starts at or right of the right edge of `i`, up to `tol`.
pub fn implied_binaries(s: &Solution, tol: f64) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
    let n = s.rects.len();
    let mut x = vec![vec![false; n]; n];
    let mut y = vec![vec![false; n]; n];
    for (i, a) in s.rects.iter().enumerate() {
        for (j, b) in s.rects.iter().enumerate() {
            if i != j {
                x[i][j] = b.x < a.x + a.w - tol;
                y[i][j] = b.y < a.y + a.h - tol;
            }
        }
    }
    (x, y)
}

/// Every constraint `s` violates by more than `tol`. The pairwise binaries
/// are read off the geometry with [`implied_binaries`]; `z` is taken from
/// `s`. The area row is checked in its logarithmic form, so `tol` is
/// relative there.
pub fn check_feasibility(m: &Model, s: &Solution, tol: f64) -> Vec<Violation> {
    let n = m.n();
    let mut out = Vec::new();
    let mut push = |constraint: u8, i: usize, j: Option<usize>, amount: f64| {
        if amount > tol {
            out.push(Violation { constraint, i, j, amount });
        }
    };
    if s.rects.len() != n || s.z.len() != n {
        push(0, 0, None, f64::INFINITY);
        return out;
    }
    let (cw, ch) = (m.container.w, m.container.h);
    let p = &m.params;
    for (i, r) in s.rects.iter().enumerate() {
        push(0, i, None, (-r.x).max(-r.y).max(-r.w).max(-r.h));
        let area = if r.w > 0.0 && r.h > 0.0 {
            m.areas.areas[i].ln() - r.w.ln() - r.h.ln()
        } else {
            f64::INFINITY
        };
        push(1, i, None, area);
        push(2, i, None, r.x + r.w - cw);
        push(3, i, None, r.y + r.h - ch);
        let corner = if p.delta[i] { 0.0 } else { cw + ch };
        push(4, i, None, r.x + r.y - corner);
        let z = if s.z[i] { 1.0 } else { 0.0 };
        push(12, i, None, r.h - ch * (1.0 - z) - r.w);
        push(13, i, None, r.w - cw * z - r.h);
    }
    let (x, y) = implied_binaries(s, tol);
    let b = |v: bool| if v { 1.0 } else { 0.0 };
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let (a, c) = (&s.rects[i], &s.rects[j]);
            let eta = b(p.eta[i][j]);
            let theta = b(p.theta[i][j]);
            let dx = a.x - c.x + a.w;
            let dy = a.y - c.y + a.h;
            push(5, i, Some(j), dx - cw * b(x[i][j]));
            push(6, i, Some(j), (m.epsilon - cw * (1.0 - b(x[i][j]))) * (1.0 - eta) - dx);
            push(7, i, Some(j), b(x[i][j]) - (1.0 - eta));
            push(8, i, Some(j), dy - ch * b(y[i][j]));
            push(9, i, Some(j), (m.epsilon - ch * (1.0 - b(y[i][j]))) * (1.0 - theta) - dy);
            push(10, i, Some(j), b(y[i][j]) - (1.0 - theta));
            // Overlap depth makes the magnitude meaningful.
            if x[i][j] && x[j][i] && y[i][j] && y[j][i] {
                push(11, i, Some(j), a.overlap_area(c).max(tol * 2.0));
            }
        }
    }
    out
}
