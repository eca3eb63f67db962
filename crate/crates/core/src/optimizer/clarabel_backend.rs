//! [`ConeProgram`]s handed to the Clarabel interior point solver.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT, SolverStatus, SupportedConeT,
    ZeroConeT,
};

use super::socp::{ConeProgram, ConeSolution, ConeStatus};

/// Solves `prog` with Clarabel; equality rows go first as a zero cone.
pub fn solve_clarabel(prog: &ConeProgram) -> ConeSolution {
    let n = prog.n;
    let p = prog.a.len();
    let m = prog.g.len();
    let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
    for (r, row) in prog.a.iter().chain(&prog.g).enumerate() {
        for &(c, v) in row {
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
    }
    let a = CscMatrix::new_from_triplets(p + m, n, rows, cols, vals);
    let q = CscMatrix::zeros((n, n));
    let b: Vec<f64> = prog.b.iter().chain(&prog.h).copied().collect();
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    if p > 0 {
        cones.push(ZeroConeT(p));
    }
    if prog.nonneg > 0 {
        cones.push(NonnegativeConeT(prog.nonneg));
    }
    cones.extend(prog.soc.iter().map(|&d| SecondOrderConeT(d)));
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .presolve_enable(false)
        .build()
        .expect("static settings are valid");

    let failed = |status| ConeSolution {
        status,
        x: vec![0.0; n],
        y: vec![0.0; p],
        z: vec![0.0; m],
        s: vec![0.0; m],
        primal_obj: f64::NAN,
        dual_obj: f64::NAN,
        iterations: 0,
        primal_res: f64::INFINITY,
        dual_res: f64::INFINITY,
        gap: f64::INFINITY,
    };
    let Ok(mut solver) = DefaultSolver::new(&q, &prog.c, &a, &b, &cones, settings) else {
        return failed(ConeStatus::Numerical);
    };
    solver.solve();
    let sol = &solver.solution;
    let info = &solver.info;
    let status = match sol.status {
        SolverStatus::Solved => ConeStatus::Optimal,
        SolverStatus::AlmostSolved => ConeStatus::Reduced,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => ConeStatus::PrimalInfeasible,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => ConeStatus::DualInfeasible,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => ConeStatus::MaxIterations,
        _ => ConeStatus::Numerical,
    };
    ConeSolution {
        status,
        x: sol.x.clone(),
        y: sol.z[..p].to_vec(),
        z: sol.z[p..].to_vec(),
        s: sol.s[p..].to_vec(),
        primal_obj: sol.obj_val,
        dual_obj: sol.obj_val_dual,
        iterations: sol.iterations as usize,
        primal_res: info.res_primal,
        dual_res: info.res_dual,
        gap: info.gap_abs,
    }
}
