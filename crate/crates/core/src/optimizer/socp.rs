//! Small dense second-order cone programs.
//!
//! Solves
//!
//! ```text
//! minimize    c'x
//! subject to  G x + s = h,  A x = b,  s in K
//! ```
//!
//! where `K` is a nonnegative orthant followed by second-order cones, with a
//! primal-dual interior point method on the homogeneous self-dual embedding
//! (Nesterov-Todd scaling, Mehrotra predictor-corrector). The embedding
//! yields either an optimal pair or a certificate of infeasibility.
//!
//! The Newton systems are reduced to `[G'W^-2 G  A'; A  0]` and factored
//! densely, which is fast for the few dozen variables the layout
//! subproblems have.

use nalgebra::{DMatrix, DVector};

/// Sparse row: (column, value) pairs.
pub type Row = Vec<(usize, f64)>;

#[derive(Debug, Clone, Default)]
pub struct ConeProgram {
    pub n: usize,
    pub c: Vec<f64>,
    /// Conic rows: the first `nonneg` rows belong to the orthant, the rest to
    /// the second-order cones listed in `soc`, in order.
    pub g: Vec<Row>,
    pub h: Vec<f64>,
    pub a: Vec<Row>,
    pub b: Vec<f64>,
    pub nonneg: usize,
    pub soc: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    /// Stopped early; the best iterate met only `reduced_tol`.
    Reduced,
    MaxIterations,
    Numerical,
}

#[derive(Debug, Clone)]
pub struct ConeSolution {
    pub status: ConeStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub s: Vec<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub iterations: usize,
    /// Scaled primal residual `max(|Ax-b|, |Gx+s-h|)`.
    pub primal_res: f64,
    /// Scaled dual residual `|A'y + G'z + c|`.
    pub dual_res: f64,
    pub gap: f64,
}

impl ConeSolution {
    /// Largest of the primal residual, dual residual and relative gap.
    pub fn kkt_residual(&self) -> f64 {
        let rel = self.gap / self.primal_obj.abs().max(1.0);
        self.primal_res.max(self.dual_res).max(rel)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IpmSettings {
    pub max_iter: usize,
    pub feastol: f64,
    pub abstol: f64,
    pub reltol: f64,
    /// Accepted KKT residual when the iteration stalls.
    pub reduced_tol: f64,
}

impl Default for IpmSettings {
    fn default() -> Self {
        Self {
            max_iter: 100,
            feastol: 1e-8,
            abstol: 1e-8,
            reltol: 1e-8,
            reduced_tol: 1e-7,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

fn mul_rows(rows: &[Row], x: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect()
}

fn mul_rows_t(rows: &[Row], y: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (r, &yi) in rows.iter().zip(y) {
        for &(j, v) in r {
            out[j] += v * yi;
        }
    }
    out
}

/// Block layout of the cone.
#[derive(Debug, Clone)]
struct Cone {
    nonneg: usize,
    /// (offset, dim) of every second-order block.
    soc: Vec<(usize, usize)>,
}

impl Cone {
    fn new(nonneg: usize, dims: &[usize]) -> Self {
        let mut off = nonneg;
        let soc = dims
            .iter()
            .map(|&d| {
                let b = (off, d);
                off += d;
                b
            })
            .collect();
        Self { nonneg, soc }
    }

    fn degree(&self) -> usize {
        self.nonneg + self.soc.len()
    }

    fn identity(&self, m: usize) -> Vec<f64> {
        let mut e = vec![0.0; m];
        e[..self.nonneg].iter_mut().for_each(|v| *v = 1.0);
        for &(o, _) in &self.soc {
            e[o] = 1.0;
        }
        e
    }

    /// Smallest "eigenvalue" of `u`: negative when `u` is outside the cone.
    fn min_eig(&self, u: &[f64]) -> f64 {
        let mut m = f64::INFINITY;
        for &v in &u[..self.nonneg] {
            m = m.min(v);
        }
        for &(o, d) in &self.soc {
            m = m.min(u[o] - norm(&u[o + 1..o + d]));
        }
        m
    }

    /// Jordan product `u o v`.
    fn prod(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for i in 0..self.nonneg {
            out[i] = u[i] * v[i];
        }
        for &(o, d) in &self.soc {
            out[o] = dot(&u[o..o + d], &v[o..o + d]);
            for k in 1..d {
                out[o + k] = u[o] * v[o + k] + v[o] * u[o + k];
            }
        }
        out
    }

    /// Solves `lambda o x = d` for `x`.
    fn div(&self, lambda: &[f64], d: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; d.len()];
        for i in 0..self.nonneg {
            out[i] = d[i] / lambda[i];
        }
        for &(o, dim) in &self.soc {
            let l0 = lambda[o];
            let l1 = &lambda[o + 1..o + dim];
            let det = l0 * l0 - dot(l1, l1);
            let ld = dot(l1, &d[o + 1..o + dim]);
            let x0 = (l0 * d[o] - ld) / det;
            out[o] = x0;
            for k in 1..dim {
                out[o + k] = (d[o + k] - x0 * lambda[o + k]) / l0;
            }
        }
        out
    }

    /// Largest step `alpha` with `u + alpha du` in the cone.
    fn max_step(&self, u: &[f64], du: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        for i in 0..self.nonneg {
            if du[i] < 0.0 {
                alpha = alpha.min(-u[i] / du[i]);
            }
        }
        for &(o, d) in &self.soc {
            let (u0, d0) = (u[o], du[o]);
            let (u1, d1) = (&u[o + 1..o + d], &du[o + 1..o + d]);
            let qa = d0 * d0 - dot(d1, d1);
            let qb = u0 * d0 - dot(u1, d1);
            let qc = (u0 * u0 - dot(u1, u1)).max(0.0);
            alpha = alpha.min(first_exit(qa, qb, qc));
        }
        alpha
    }
}

/// Smallest positive root of `a t^2 + 2 b t + c` with `c >= 0`, or infinity.
fn first_exit(a: f64, b: f64, c: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(f64::MIN_POSITIVE);
    if a.abs() <= 1e-14 * scale {
        return if b < 0.0 { -c / (2.0 * b) } else { f64::INFINITY };
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    let t = -(b + b.signum() * disc.sqrt());
    let mut best = f64::INFINITY;
    for r in [t / a, if t != 0.0 { c / t } else { f64::INFINITY }] {
        if r > 0.0 && r < best {
            best = r;
        }
    }
    best
}

/// Nesterov-Todd scaling at a primal-dual pair.
struct Scaling {
    /// `sqrt(s/z)` on the orthant.
    d: Vec<f64>,
    /// Per second-order block: `beta` and the normalized point `w`.
    soc: Vec<(f64, Vec<f64>)>,
    lambda: Vec<f64>,
}

fn jdot(u: &[f64], v: &[f64]) -> f64 {
    u[0] * v[0] - dot(&u[1..], &v[1..])
}

/// `u'Ju` without the cancellation of the direct formula.
fn jnorm2(u: &[f64]) -> f64 {
    let r = norm(&u[1..]);
    (u[0] - r) * (u[0] + r)
}

impl Scaling {
    fn new(cone: &Cone, s: &[f64], z: &[f64]) -> Option<Self> {
        let d: Vec<f64> = (0..cone.nonneg).map(|i| (s[i] / z[i]).sqrt()).collect();
        let mut soc = Vec::with_capacity(cone.soc.len());
        for &(o, dim) in &cone.soc {
            let (sb, zb) = (&s[o..o + dim], &z[o..o + dim]);
            let (sjs, zjz) = (jnorm2(sb), jnorm2(zb));
            if sjs <= 0.0 || zjz <= 0.0 {
                return None;
            }
            let (sn, zn) = (sjs.sqrt(), zjz.sqrt());
            let sbar: Vec<f64> = sb.iter().map(|v| v / sn).collect();
            let zbar: Vec<f64> = zb.iter().map(|v| v / zn).collect();
            let gamma = ((1.0 + dot(&zbar, &sbar)) / 2.0).sqrt();
            let wbar: Vec<f64> = (0..dim)
                .map(|k| {
                    let jz = if k == 0 { zbar[0] } else { -zbar[k] };
                    (sbar[k] + jz) / (2.0 * gamma)
                })
                .collect();
            let vn = (2.0 * (wbar[0] + 1.0)).sqrt();
            let mut w: Vec<f64> = wbar.iter().map(|v| v / vn).collect();
            w[0] += 1.0 / vn;
            // Renormalize so that w'Jw = 1 exactly.
            let wn = jdot(&w, &w);
            if wn <= 0.0 {
                return None;
            }
            let wn = wn.sqrt();
            w.iter_mut().for_each(|v| *v /= wn);
            soc.push(((sjs / zjz).powf(0.25), w));
        }
        let mut sc = Self {
            d,
            soc,
            lambda: Vec::new(),
        };
        sc.lambda = sc.apply(cone, z, false);
        Some(sc)
    }

    /// `W v`, or `W^-1 v` when `inverse`.
    fn apply(&self, cone: &Cone, v: &[f64], inverse: bool) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for i in 0..cone.nonneg {
            out[i] = if inverse { v[i] / self.d[i] } else { v[i] * self.d[i] };
        }
        for (&(o, dim), (beta, w)) in cone.soc.iter().zip(&self.soc) {
            let vb = &v[o..o + dim];
            if inverse {
                // (1/beta) (2 J w w' J - J) v
                let jw_v = w[0] * vb[0] - dot(&w[1..], &vb[1..]);
                out[o] = (2.0 * w[0] * jw_v - vb[0]) / beta;
                for k in 1..dim {
                    out[o + k] = (-2.0 * w[k] * jw_v + vb[k]) / beta;
                }
            } else {
                // beta (2 w w' - J) v
                let wv = dot(w, vb);
                out[o] = beta * (2.0 * w[0] * wv - vb[0]);
                for k in 1..dim {
                    out[o + k] = beta * (2.0 * w[k] * wv + vb[k]);
                }
            }
        }
        out
    }

    fn apply_inv2(&self, cone: &Cone, v: &[f64]) -> Vec<f64> {
        let t = self.apply(cone, v, true);
        self.apply(cone, &t, true)
    }

    /// Dense `W^-1` block of one second-order cone.
    fn inv_block(&self, k: usize, dim: usize) -> Vec<f64> {
        let (beta, w) = &self.soc[k];
        let mut winv = vec![0.0; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                let jr = if r == 0 { w[0] } else { -w[r] };
                let jc = if c == 0 { w[0] } else { -w[c] };
                let j = if r == c { if r == 0 { 1.0 } else { -1.0 } } else { 0.0 };
                winv[r * dim + c] = (2.0 * jr * jc - j) / beta;
            }
        }
        winv
    }
}

const REFINE_STEPS: usize = 3;

/// Factored reduced Newton system for one iteration.
struct Kkt {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
    scale: Vec<f64>,
}

impl Kkt {
    fn new(prog: &ConeProgram, cone: &Cone, sc: &Scaling) -> Option<Self> {
        let n = prog.n;
        let p = prog.a.len();
        let mut k = DMatrix::<f64>::zeros(n + p, n + p);
        for i in 0..cone.nonneg {
            let wt = 1.0 / (sc.d[i] * sc.d[i]);
            let row = &prog.g[i];
            for &(a, va) in row {
                for &(b, vb) in row {
                    k[(a, b)] += wt * va * vb;
                }
            }
        }
        // G'W^-2 G as the Gram matrix of W^-1 G, which keeps the rank-one
        // part of the scaling from cancelling.
        for (bi, &(o, dim)) in cone.soc.iter().enumerate() {
            let winv = sc.inv_block(bi, dim);
            let mut cols: Vec<usize> = (o..o + dim).flat_map(|r| prog.g[r].iter().map(|e| e.0)).collect();
            cols.sort_unstable();
            cols.dedup();
            let mut scaled = vec![0.0; dim * cols.len()];
            for r in 0..dim {
                for q in 0..dim {
                    let wt = winv[r * dim + q];
                    for &(a, va) in &prog.g[o + q] {
                        let ci = cols.binary_search(&a).expect("collected above");
                        scaled[r * cols.len() + ci] += wt * va;
                    }
                }
            }
            for r in 0..dim {
                let row = &scaled[r * cols.len()..(r + 1) * cols.len()];
                for (ai, &a) in cols.iter().enumerate() {
                    for (bi2, &b) in cols.iter().enumerate() {
                        k[(a, b)] += row[ai] * row[bi2];
                    }
                }
            }
        }
        let reg = 1e-13;
        for i in 0..n {
            k[(i, i)] += reg;
        }
        for (r, row) in prog.a.iter().enumerate() {
            for &(j, v) in row {
                k[(n + r, j)] = v;
                k[(j, n + r)] = v;
            }
            k[(n + r, n + r)] = -reg;
        }
        // Symmetric diagonal equilibration before factoring.
        let dim = n + p;
        let scale: Vec<f64> = (0..dim)
            .map(|i| {
                let d = k[(i, i)].abs();
                if d > 0.0 && d.is_finite() {
                    1.0 / d.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        for r in 0..dim {
            for c in 0..dim {
                k[(r, c)] *= scale[r] * scale[c];
            }
        }
        let lu = k.lu();
        if !lu.is_invertible() {
            return None;
        }
        Some(Self { lu, n, scale })
    }

    fn solve_scaled(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let scaled = DVector::from_iterator(rhs.len(), rhs.iter().zip(&self.scale).map(|(v, s)| v * s));
        let mut sol = self.lu.solve(&scaled)?;
        for (v, s) in sol.iter_mut().zip(&self.scale) {
            *v *= s;
        }
        Some(sol)
    }

    /// Solves `A'dy + G'dz = a1, A dx = a2, G dx - W^2 dz = a3`.
    fn solve(
        &self,
        prog: &ConeProgram,
        cone: &Cone,
        sc: &Scaling,
        a1: &[f64],
        a2: &[f64],
        a3: &[f64],
    ) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let w3 = sc.apply_inv2(cone, a3);
        let gt = mul_rows_t(&prog.g, &w3, n);
        let mut rhs = DVector::<f64>::zeros(n + a2.len());
        for i in 0..n {
            rhs[i] = a1[i] + gt[i];
        }
        for (i, v) in a2.iter().enumerate() {
            rhs[n + i] = *v;
        }
        let sol = self.solve_scaled(&rhs)?;
        let mut dx: Vec<f64> = sol.as_slice()[..n].to_vec();
        let mut dy: Vec<f64> = sol.as_slice()[n..].to_vec();
        let dz_of = |dx: &[f64]| {
            let mut gdx = mul_rows(&prog.g, dx);
            axpy(&mut gdx, -1.0, a3);
            sc.apply_inv2(cone, &gdx)
        };
        let mut dz = dz_of(&dx);

        // Iterative refinement against the unregularized system.
        let residual = |dx: &[f64], dy: &[f64], dz: &[f64]| {
            let mut e1 = a1.to_vec();
            axpy(&mut e1, -1.0, &mul_rows_t(&prog.a, dy, n));
            axpy(&mut e1, -1.0, &mul_rows_t(&prog.g, dz, n));
            let mut e2 = a2.to_vec();
            axpy(&mut e2, -1.0, &mul_rows(&prog.a, dx));
            (e1, e2)
        };
        let mut err = residual(&dx, &dy, &dz);
        let size = |e: &(Vec<f64>, Vec<f64>)| norm_inf(&e.0).max(norm_inf(&e.1));
        for _ in 0..REFINE_STEPS {
            let before = size(&err);
            if before <= 1e-14 * (1.0 + norm_inf(a1).max(norm_inf(a2)).max(norm_inf(a3))) {
                break;
            }
            let mut rhs = DVector::<f64>::zeros(n + a2.len());
            for i in 0..n {
                rhs[i] = err.0[i];
            }
            for (i, v) in err.1.iter().enumerate() {
                rhs[n + i] = *v;
            }
            let Some(c) = self.solve_scaled(&rhs) else { break };
            let mut nx = dx.clone();
            axpy(&mut nx, 1.0, &c.as_slice()[..n]);
            let mut ny = dy.clone();
            axpy(&mut ny, 1.0, &c.as_slice()[n..]);
            let nz = dz_of(&nx);
            let after = residual(&nx, &ny, &nz);
            if !(size(&after) < before) {
                break;
            }
            (dx, dy, dz, err) = (nx, ny, nz, after);
        }
        if dx.iter().chain(&dy).chain(&dz).any(|v| !v.is_finite()) {
            return None;
        }
        Some((dx, dy, dz))
    }
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<f64>,
    ds: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

/// Solves the program; never panics on bad numerics, reporting a status
/// instead.
pub fn solve_cone_program(prog: &ConeProgram, settings: &IpmSettings) -> ConeSolution {
    let n = prog.n;
    let m = prog.g.len();
    let p = prog.a.len();
    debug_assert_eq!(prog.nonneg + prog.soc.iter().sum::<usize>(), m);
    let cone = Cone::new(prog.nonneg, &prog.soc);
    let e = cone.identity(m);
    let deg = cone.degree() as f64;

    let fail = |status, iterations| ConeSolution {
        status,
        x: vec![0.0; n],
        y: vec![0.0; p],
        z: vec![0.0; m],
        s: vec![0.0; m],
        primal_obj: f64::NAN,
        dual_obj: f64::NAN,
        iterations,
        primal_res: f64::INFINITY,
        dual_res: f64::INFINITY,
        gap: f64::INFINITY,
    };

    // Starting point from two least-squares solves with identity scaling.
    let unit = match Scaling::new(&cone, &e, &e) {
        Some(s) => s,
        None => return fail(ConeStatus::Numerical, 0),
    };
    let kkt = match Kkt::new(prog, &cone, &unit) {
        Some(k) => k,
        None => return fail(ConeStatus::Numerical, 0),
    };
    let zeros_n = vec![0.0; n];
    let zeros_m = vec![0.0; m];
    let (mut x, _, r) = match kkt.solve(prog, &cone, &unit, &zeros_n, &prog.b, &prog.h) {
        Some(v) => v,
        None => return fail(ConeStatus::Numerical, 0),
    };
    // r = G x - h, so s = -r.
    let mut s: Vec<f64> = r.iter().map(|v| -v).collect();
    let neg_c: Vec<f64> = prog.c.iter().map(|v| -v).collect();
    let (_, mut y, mut z) = match kkt.solve(prog, &cone, &unit, &neg_c, &vec![0.0; p], &zeros_m) {
        Some(v) => v,
        None => return fail(ConeStatus::Numerical, 0),
    };
    for u in [&mut s, &mut z] {
        let shift = -cone.min_eig(u);
        if shift >= 0.0 {
            axpy(u, 1.0 + shift, &e);
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        x = vec![0.0; n];
    }
    let (mut tau, mut kappa) = (1.0f64, 1.0f64);

    let norm_b = norm_inf(&prog.b).max(1.0);
    let norm_h = norm_inf(&prog.h).max(1.0);
    let norm_c = norm_inf(&prog.c).max(1.0);

    let mut best: Option<ConeSolution> = None;
    for iter in 0..=settings.max_iter {
        // Residuals of the embedding.
        let mut r1 = mul_rows_t(&prog.a, &y, n);
        axpy(&mut r1, 1.0, &mul_rows_t(&prog.g, &z, n));
        let at_y_gt_z = r1.clone();
        axpy(&mut r1, tau, &prog.c);
        let ax = mul_rows(&prog.a, &x);
        let mut r2: Vec<f64> = ax.iter().map(|v| -v).collect();
        axpy(&mut r2, tau, &prog.b);
        let gx = mul_rows(&prog.g, &x);
        let mut r3: Vec<f64> = gx.iter().map(|v| -v).collect();
        axpy(&mut r3, tau, &prog.h);
        axpy(&mut r3, -1.0, &s);
        let cx = dot(&prog.c, &x);
        let by_hz = dot(&prog.b, &y) + dot(&prog.h, &z);
        let r4 = -cx - by_hz - kappa;

        let primal_res = (norm_inf(&r2) / norm_b).max(norm_inf(&r3) / norm_h) / tau;
        let dual_res = norm_inf(&r1) / norm_c / tau;
        let pcost = cx / tau;
        let dcost = -by_hz / tau;
        let gap = dot(&s, &z) / (tau * tau);
        let relgap = gap / pcost.abs().max(dcost.abs()).max(1e-300);

        let finish = |status, x: &[f64], y: &[f64], z: &[f64], s: &[f64], scale: f64| ConeSolution {
            status,
            x: x.iter().map(|v| v / scale).collect(),
            y: y.iter().map(|v| v / scale).collect(),
            z: z.iter().map(|v| v / scale).collect(),
            s: s.iter().map(|v| v / scale).collect(),
            primal_obj: pcost,
            dual_obj: dcost,
            iterations: iter,
            primal_res,
            dual_res,
            gap,
        };

        let current = finish(ConeStatus::Reduced, &x, &y, &z, &s, tau);
        let score = current.kkt_residual();
        if score.is_finite() && best.as_ref().is_none_or(|b: &ConeSolution| score < b.kkt_residual()) {
            best = Some(current);
        }
        let stalled = |fallback: ConeSolution, best: Option<ConeSolution>| match best {
            Some(b) if b.kkt_residual() <= settings.reduced_tol => b,
            _ => fallback,
        };
        // Past the accuracy the factorization supports the iterates drift
        // away again; stop once that is clear.
        if let Some(b) = &best {
            if b.kkt_residual() <= settings.reduced_tol && score > 1e3 * b.kkt_residual() {
                return best.expect("checked above");
            }
        }

        if primal_res < settings.feastol
            && dual_res < settings.feastol
            && (gap < settings.abstol || relgap < settings.reltol)
        {
            return finish(ConeStatus::Optimal, &x, &y, &z, &s, tau);
        }
        if by_hz < 0.0 && norm_inf(&at_y_gt_z) / norm_c <= settings.feastol * -by_hz {
            let mut sol = finish(ConeStatus::PrimalInfeasible, &x, &y, &z, &s, -by_hz);
            sol.primal_obj = f64::INFINITY;
            sol.dual_obj = f64::INFINITY;
            return sol;
        }
        if cx < 0.0 {
            let mut gxs = gx.clone();
            axpy(&mut gxs, 1.0, &s);
            if (norm_inf(&ax) / norm_b).max(norm_inf(&gxs) / norm_h) <= settings.feastol * -cx {
                let mut sol = finish(ConeStatus::DualInfeasible, &x, &y, &z, &s, -cx);
                sol.primal_obj = f64::NEG_INFINITY;
                sol.dual_obj = f64::NEG_INFINITY;
                return sol;
            }
        }
        if iter == settings.max_iter {
            return stalled(finish(ConeStatus::MaxIterations, &x, &y, &z, &s, tau), best);
        }

        let sc = match Scaling::new(&cone, &s, &z) {
            Some(sc) => sc,
            None => return stalled(finish(ConeStatus::Numerical, &x, &y, &z, &s, tau), best),
        };
        let kkt = match Kkt::new(prog, &cone, &sc) {
            Some(k) => k,
            None => return stalled(finish(ConeStatus::Numerical, &x, &y, &z, &s, tau), best),
        };
        let lam = &sc.lambda;
        let mu = (dot(&s, &z) + tau * kappa) / (deg + 1.0);

        // Second solve shared by predictor and corrector.
        let neg_cv: Vec<f64> = prog.c.iter().map(|v| -v).collect();
        let Some(u1) = kkt.solve(prog, &cone, &sc, &neg_cv, &prog.b, &prog.h) else {
            return stalled(finish(ConeStatus::Numerical, &x, &y, &z, &s, tau), best);
        };
        // -c'x1 - b'y1 - h'z1 equals |W z1|^2; the direct sum cancels badly
        // near the optimum.
        let wz1 = sc.apply(&cone, &u1.2, false);
        let f1 = dot(&wz1, &wz1);

        let direction = |eta: f64, d_s: &[f64], d_k: f64| -> Option<Direction> {
            let a1: Vec<f64> = r1.iter().map(|v| -eta * v).collect();
            let a2: Vec<f64> = r2.iter().map(|v| eta * v).collect();
            let wl = sc.apply(&cone, &cone.div(lam, d_s), false);
            let a3: Vec<f64> = r3.iter().zip(&wl).map(|(r, w)| eta * r - w).collect();
            let u0 = kkt.solve(prog, &cone, &sc, &a1, &a2, &a3)?;
            let wz0 = sc.apply(&cone, &u0.2, false);
            let f0 = dot(&u1.1, &a2) + dot(&u1.2, &a3) - dot(&u1.0, &a1) + 2.0 * dot(&wz1, &wz0);
            let dtau = (-eta * r4 + d_k / tau - f0) / (f1 + kappa / tau);
            let mut dx = u0.0;
            axpy(&mut dx, dtau, &u1.0);
            let mut dy = u0.1;
            axpy(&mut dy, dtau, &u1.1);
            let mut dz = u0.2;
            axpy(&mut dz, dtau, &u1.2);
            // ds = W (lambda \ d_s - W dz)
            let wdz = sc.apply(&cone, &dz, false);
            let mut inner = cone.div(lam, d_s);
            axpy(&mut inner, -1.0, &wdz);
            let ds = sc.apply(&cone, &inner, false);
            let dkappa = (d_k - kappa * dtau) / tau;
            if !dtau.is_finite() || !dkappa.is_finite() {
                return None;
            }
            Some(Direction {
                dx,
                dy,
                dz,
                ds,
                dtau,
                dkappa,
            })
        };
        let step_to_boundary = |d: &Direction| {
            let mut a = cone.max_step(&s, &d.ds).min(cone.max_step(&z, &d.dz));
            if d.dtau < 0.0 {
                a = a.min(-tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-kappa / d.dkappa);
            }
            a
        };

        let lam_sq = cone.prod(lam, lam);
        let aff_s: Vec<f64> = lam_sq.iter().map(|v| -v).collect();
        let Some(aff) = direction(1.0, &aff_s, -tau * kappa) else {
            return stalled(finish(ConeStatus::Numerical, &x, &y, &z, &s, tau), best);
        };
        let alpha_aff = step_to_boundary(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        let ws = sc.apply(&cone, &aff.ds, true);
        let wz = sc.apply(&cone, &aff.dz, false);
        let cross = cone.prod(&ws, &wz);
        let d_s: Vec<f64> = (0..m).map(|i| -lam_sq[i] - cross[i] + sigma * mu * e[i]).collect();
        let d_k = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        let Some(dir) = direction(1.0 - sigma, &d_s, d_k) else {
            return stalled(finish(ConeStatus::Numerical, &x, &y, &z, &s, tau), best);
        };
        let alpha = (0.99 * step_to_boundary(&dir)).min(1.0);
        if !(alpha > 0.0) {
            return stalled(finish(ConeStatus::Numerical, &x, &y, &z, &s, tau), best);
        }
        axpy(&mut x, alpha, &dir.dx);
        axpy(&mut y, alpha, &dir.dy);
        axpy(&mut z, alpha, &dir.dz);
        axpy(&mut s, alpha, &dir.ds);
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
    }
    unreachable!("the loop returns at max_iter")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_maps_z_and_s_to_the_same_point() {
        let cone = Cone::new(2, &[3, 4]);
        let s = [1.0, 2.0, 3.0, 1.0, -0.5, 2.0, 0.3, -0.4, 0.1];
        let z = [0.5, 0.1, 2.0, -1.0, 0.5, 3.0, 1.0, 1.0, 0.5];
        let sc = Scaling::new(&cone, &s, &z).unwrap();
        let wz = sc.apply(&cone, &z, false);
        let wis = sc.apply(&cone, &s, true);
        for (a, b) in wz.iter().zip(&wis) {
            assert!((a - b).abs() < 1e-12, "{wz:?} vs {wis:?}");
        }
        let back = sc.apply(&cone, &sc.apply(&cone, &s, true), false);
        for (a, b) in back.iter().zip(&s) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn jordan_division_inverts_product() {
        let cone = Cone::new(1, &[3]);
        let l = [2.0, 3.0, 0.5, 0.2];
        let x = [0.7, 1.0, -2.0, 0.3];
        let d = cone.prod(&l, &x);
        let back = cone.div(&l, &d);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exit_step_of_a_cone() {
        let cone = Cone::new(0, &[2]);
        // (1, 0) + a (0, 1) leaves |x1| <= x0 at a = 1.
        assert!((cone.max_step(&[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-12);
        assert!(cone.max_step(&[1.0, 0.0], &[1.0, 0.5]).is_infinite());
    }

    /// minimize w + h subject to w h >= a.
    fn square_program(a: f64) -> ConeProgram {
        ConeProgram {
            n: 2,
            c: vec![1.0, 1.0],
            g: vec![vec![(0, -1.0), (1, -1.0)], vec![], vec![(0, -1.0), (1, 1.0)]],
            h: vec![0.0, 2.0 * a.sqrt(), 0.0],
            a: vec![],
            b: vec![],
            nonneg: 0,
            soc: vec![3],
        }
    }

    #[test]
    fn area_cone_gives_a_square() {
        let sol = solve_cone_program(&square_program(4.0), &IpmSettings::default());
        assert_eq!(sol.status, ConeStatus::Optimal);
        assert!((sol.primal_obj - 4.0).abs() < 1e-8);
        assert!((sol.x[0] - 2.0).abs() < 1e-6 && (sol.x[1] - 2.0).abs() < 1e-6);
        assert!(sol.kkt_residual() < 1e-7);
    }

    #[test]
    fn linear_program_with_equality() {
        // minimize x0 + 2 x1, x0 + x1 = 1, x >= 0.
        let p = ConeProgram {
            n: 2,
            c: vec![1.0, 2.0],
            g: vec![vec![(0, -1.0)], vec![(1, -1.0)]],
            h: vec![0.0, 0.0],
            a: vec![vec![(0, 1.0), (1, 1.0)]],
            b: vec![1.0],
            nonneg: 2,
            soc: vec![],
        };
        let sol = solve_cone_program(&p, &IpmSettings::default());
        assert_eq!(sol.status, ConeStatus::Optimal);
        assert!((sol.primal_obj - 1.0).abs() < 1e-8);
    }

    #[test]
    fn detects_primal_infeasibility() {
        // w h >= 4 with w <= 1 and h <= 1.
        let mut p = square_program(4.0);
        p.g.insert(0, vec![(0, 1.0)]);
        p.g.insert(1, vec![(1, 1.0)]);
        p.h.insert(0, 1.0);
        p.h.insert(1, 1.0);
        p.nonneg = 2;
        let sol = solve_cone_program(&p, &IpmSettings::default());
        assert_eq!(sol.status, ConeStatus::PrimalInfeasible);
        // Certificate: G'z = 0 (no equalities), h'z < 0, z in the cone.
        let gtz = mul_rows_t(&p.g, &sol.z, 2);
        assert!(norm_inf(&gtz) < 1e-6);
        assert!(dot(&p.h, &sol.z) < 0.0);
    }

    #[test]
    fn detects_unboundedness() {
        // minimize -x with x >= 0.
        let p = ConeProgram {
            n: 1,
            c: vec![-1.0],
            g: vec![vec![(0, -1.0)]],
            h: vec![0.0],
            nonneg: 1,
            ..Default::default()
        };
        let sol = solve_cone_program(&p, &IpmSettings::default());
        assert_eq!(sol.status, ConeStatus::DualInfeasible);
    }
}
