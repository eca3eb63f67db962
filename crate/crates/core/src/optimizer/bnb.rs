//! Depth-first branch and bound over pair relations.

use std::time::{Duration, Instant};

use log::{debug, warn};

use super::feasibility::check_feasibility;
use super::model::{Model, Solution, Status};
use super::subproblem::{pairs, solve_subproblem, Assignment, Relation, Subproblem};
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::layout::Layout;
use crate::subdivision::dynamic_prog;

/// Where the first incumbent comes from.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum WarmStart {
    /// The dynamic-programming layout of the same instance.
    #[default]
    DynamicProg,
    Layout(Layout),
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
    pub warm_start: WarmStart,
    /// Largest accepted instance.
    pub max_n: usize,
    /// Relative optimality gap.
    pub gap: f64,
    /// Skip branches that only hold mirror images (and, for a square
    /// container with no wide-cell reward, transposes) of layouts found
    /// elsewhere. Ignored when corner pins or adjacency rules are set.
    pub break_symmetry: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            node_limit: 1_000_000,
            time_limit: None,
            warm_start: WarmStart::DynamicProg,
            max_n: 9,
            gap: 1e-5,
            break_symmetry: false,
        }
    }
}

/// Feasibility tolerance for accepted solutions.
pub const FEAS_TOL: f64 = 1e-6;

struct Node {
    assign: Assignment,
    bound: f64,
}

/// Minimizes the model's objective. The returned solution passes
/// [`check_feasibility`] at [`FEAS_TOL`] unless its status is
/// [`Status::Infeasible`], in which case it has no cells.
pub fn solve(m: &Model, cfg: &SolveConfig) -> Result<Solution> {
    let n = m.n();
    if n > cfg.max_n {
        return Err(Error::TooLarge { n, max: cfg.max_n });
    }
    let start = Instant::now();
    let scale = m.container.w.max(m.container.h);
    let overlap_tol = 1e-7 * scale;

    let mut incumbent = warm_start(m, &cfg.warm_start);
    let mirrors = cfg.break_symmetry && m.params.mirror_symmetric();
    let square = (m.container.w - m.container.h).abs() <= 1e-12 * scale;
    let transpose = mirrors && square && m.params.beta == 0.0;
    let all_pairs = pairs(n);

    let mut stack = vec![Node {
        assign: Assignment::free(n),
        bound: f64::NEG_INFINITY,
    }];
    let mut nodes = 0u64;
    let mut pruned_bound = f64::INFINITY;
    let mut inexact = false;
    let mut limited = false;

    let cutoff = |inc: &Option<Solution>| {
        inc.as_ref()
            .map_or(f64::INFINITY, |s| s.objective - cfg.gap * s.objective.abs().max(1e-12))
    };
    while let Some(node) = stack.pop() {
        if nodes >= cfg.node_limit || cfg.time_limit.is_some_and(|t| start.elapsed() >= t) {
            stack.push(node);
            limited = true;
            break;
        }
        if node.bound >= cutoff(&incumbent) {
            pruned_bound = pruned_bound.min(node.bound);
            continue;
        }
        if chains_too_long(m, &node.assign) {
            continue;
        }
        nodes += 1;
        let (rects, z, objective) = match solve_subproblem(m, &node.assign) {
            Subproblem::Optimal { rects, z, objective, .. } => (rects, z, objective),
            Subproblem::Infeasible { .. } => continue,
            Subproblem::Failed(status) => {
                warn!("relaxation failed with {status:?}; node dropped");
                inexact = true;
                continue;
            }
        };
        let bound = (objective - 1e-7 * objective.abs().max(1.0)).max(node.bound);
        if bound >= cutoff(&incumbent) {
            pruned_bound = pruned_bound.min(bound);
            continue;
        }

        if let Some(&(i, j)) = overlapping_pairs(&node.assign, &all_pairs, &rects, overlap_tol).first() {
            let mut options = Relation::ALL.to_vec();
            if mirrors {
                let fixed = |h: bool| {
                    node.assign
                        .relations
                        .iter()
                        .flatten()
                        .any(|r| matches!(r, Relation::ILeftJ | Relation::JLeftI) == h)
                };
                let (horizontal, vertical) = (fixed(true), fixed(false));
                // A mirror image keeps every fixed relation along the other
                // axis, so one orientation suffices until the first relation
                // along its own axis is fixed.
                options.retain(|&r| match r {
                    Relation::JLeftI => horizontal,
                    Relation::JBelowI => vertical,
                    Relation::IBelowJ => horizontal || vertical || !transpose,
                    Relation::ILeftJ => true,
                });
            }
            options.sort_by(|a, b| a.violation(&rects[i], &rects[j]).total_cmp(&b.violation(&rects[i], &rects[j])));
            for &r in options.iter().rev() {
                let mut assign = node.assign.clone();
                assign.set(n, i, j, r);
                stack.push(Node { assign, bound });
            }
            continue;
        }

        if let Some(i) = z.iter().position(|&v| v > 1e-6 && v < 1.0 - 1e-6) {
            for value in [false, true] {
                let mut assign = node.assign.clone();
                assign.z[i] = Some(value);
                stack.push(Node { assign, bound });
            }
            continue;
        }

        let mut candidate = Solution::from_rects(m, rects, Status::Feasible);
        if m.params.beta > 0.0 {
            candidate.z = z.iter().map(|&v| v > 0.5).collect();
            candidate.objective = super::model::evaluate_objective(m, &candidate);
        }
        let violations = check_feasibility(m, &candidate, FEAS_TOL);
        if !violations.is_empty() {
            debug!("leaf rejected: {}", violations[0]);
            inexact = true;
            continue;
        }
        if incumbent.as_ref().is_none_or(|s| candidate.objective < s.objective) {
            debug!("node {nodes}: incumbent {:.9}", candidate.objective);
            incumbent = Some(candidate);
        }
    }

    let open_bound = stack.iter().map(|s| s.bound).fold(f64::INFINITY, f64::min);
    Ok(match incumbent {
        Some(mut s) => {
            s.bound = s.objective.min(pruned_bound).min(open_bound);
            s.nodes = nodes;
            s.status = if limited {
                Status::NodeLimit
            } else if inexact {
                Status::Feasible
            } else {
                Status::Optimal
            };
            s
        }
        None => Solution {
            rects: Vec::new(),
            z: Vec::new(),
            objective: f64::INFINITY,
            reported_perimeter: f64::INFINITY,
            bound: pruned_bound.min(open_bound),
            status: if limited { Status::NodeLimit } else { Status::Infeasible },
            nodes,
        },
    })
}

fn warm_start(m: &Model, w: &WarmStart) -> Option<Solution> {
    match w {
        WarmStart::None => None,
        WarmStart::Layout(l) => accept(m, Solution::from_layout(m, l).ok()?),
        WarmStart::DynamicProg => {
            let direct = dynamic_prog(m.container, &m.areas)
                .ok()
                .and_then(|l| accept(m, Solution::from_layout(m, &l).ok()?));
            if m.params.beta == 0.0 {
                return direct;
            }
            // The wide-cell reward can favor the layout cut for the
            // transposed container.
            let c = m.container;
            let flipped = dynamic_prog(Rect::raw(c.y, c.x, c.h, c.w), &m.areas).ok().and_then(|l| {
                let s = Solution::from_layout(m, &l).ok()?;
                let rects = s.rects.iter().map(|r| Rect::raw(r.y, r.x, r.h, r.w)).collect();
                accept(m, Solution::from_rects(m, rects, Status::Feasible))
            });
            match (direct, flipped) {
                (Some(a), Some(b)) => Some(if b.objective < a.objective { b } else { a }),
                (a, b) => a.or(b),
            }
        }
    }
}

fn accept(m: &Model, s: Solution) -> Option<Solution> {
    let violations = check_feasibility(m, &s, FEAS_TOL);
    if violations.is_empty() {
        Some(s)
    } else {
        debug!("warm start rejected: {}", violations[0]);
        None
    }
}

/// Free pairs whose cells overlap in the relaxed solution, largest
/// overlap first.
fn overlapping_pairs(a: &Assignment, all_pairs: &[(usize, usize)], rects: &[Rect], tol: f64) -> Vec<(usize, usize)> {
    let mut out: Vec<((usize, usize), f64)> = Vec::new();
    for (k, &(i, j)) in all_pairs.iter().enumerate() {
        if a.relations[k].is_some() {
            continue;
        }
        let (p, q) = (&rects[i], &rects[j]);
        let ox = p.right().min(q.right()) - p.x.max(q.x);
        let oy = p.top().min(q.top()) - p.y.max(q.y);
        if ox > tol && oy > tol {
            out.push(((i, j), ox * oy));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out.into_iter().map(|(p, _)| p).collect()
}

/// True when the fixed relations force a row of cells wider than the
/// container (or a column taller), or contain a cycle. A cell of area `A`
/// is at least `A / H` wide.
fn chains_too_long(m: &Model, a: &Assignment) -> bool {
    let n = m.n();
    let (cw, ch) = (m.container.w, m.container.h);
    let mut left = vec![Vec::new(); n];
    let mut below = vec![Vec::new(); n];
    for (k, (i, j)) in pairs(n).into_iter().enumerate() {
        match a.relations[k] {
            Some(Relation::ILeftJ) => left[i].push(j),
            Some(Relation::JLeftI) => left[j].push(i),
            Some(Relation::IBelowJ) => below[i].push(j),
            Some(Relation::JBelowI) => below[j].push(i),
            None => {}
        }
    }
    for i in 0..n {
        for j in 0..n {
            if m.params.eta[i][j] {
                left[i].push(j);
            }
            if m.params.theta[i][j] {
                below[i].push(j);
            }
        }
    }
    let areas = &m.areas.areas;
    let min_w: Vec<f64> = areas.iter().map(|a| a / ch).collect();
    let min_h: Vec<f64> = areas.iter().map(|a| a / cw).collect();
    longest_chain(&left, &min_w).is_none_or(|l| l > cw * (1.0 + 1e-9))
        || longest_chain(&below, &min_h).is_none_or(|l| l > ch * (1.0 + 1e-9))
}

/// Heaviest path in a DAG given by adjacency lists, or `None` on a cycle.
fn longest_chain(succ: &[Vec<usize>], weight: &[f64]) -> Option<f64> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for s in succ {
        for &j in s {
            indeg[j] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut best: Vec<f64> = weight.to_vec();
    let mut seen = 0;
    while let Some(i) = ready.pop() {
        seen += 1;
        for &j in &succ[i] {
            best[j] = best[j].max(best[i] + weight[j]);
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(j);
            }
        }
    }
    (seen == n).then(|| best.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::model::{build_model, ModelParams};
    use crate::tree::AreaList;

    fn unit(areas: Vec<f64>) -> Model {
        let n = areas.len();
        build_model(Rect::raw(0.0, 0.0, 1.0, 1.0), AreaList::from_areas(areas), ModelParams::zero(n)).unwrap()
    }

    #[test]
    fn chains() {
        assert_eq!(longest_chain(&[vec![1], vec![2], vec![]], &[1.0, 2.0, 3.0]), Some(6.0));
        assert_eq!(longest_chain(&[vec![1], vec![0]], &[1.0, 1.0]), None);
        let m = unit(vec![0.4, 0.3, 0.3]);
        let mut a = Assignment::free(3);
        a.set(3, 0, 1, Relation::ILeftJ);
        assert!(!chains_too_long(&m, &a));
        a.set(3, 1, 2, Relation::ILeftJ);
        assert!(!chains_too_long(&m, &a));
        a.set(3, 0, 2, Relation::JLeftI);
        assert!(chains_too_long(&m, &a));
    }

    #[test]
    fn two_halves() {
        let s = solve(&unit(vec![0.5, 0.5]), &SolveConfig::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.reported_perimeter - 6.0).abs() < 1e-6);
        assert!((s.objective - 3.0).abs() < 1e-6);
    }

    #[test]
    fn single_cell_fills_the_container() {
        let m = build_model(Rect::raw(0.0, 0.0, 2.0, 1.0), AreaList::from_areas(vec![2.0]), ModelParams::zero(1)).unwrap();
        let s = solve(&m, &SolveConfig::default()).unwrap();
        assert!(s.rects[0].approx_eq(&Rect::raw(0.0, 0.0, 2.0, 1.0), 1e-9));
    }

    #[test]
    fn without_warm_start() {
        let cfg = SolveConfig {
            warm_start: WarmStart::None,
            ..SolveConfig::default()
        };
        let s = solve(&unit(vec![0.2, 0.3, 0.5]), &cfg).unwrap();
        let dp = dynamic_prog(Rect::raw(0.0, 0.0, 1.0, 1.0), &AreaList::from_areas(vec![0.2, 0.3, 0.5])).unwrap();
        let dp_obj: f64 = dp.cells.values().map(|r| r.w + r.h).sum();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - dp_obj).abs() < 1e-5, "{} vs {dp_obj}", s.objective);
    }

    #[test]
    fn too_large() {
        let m = unit(vec![0.1; 10]);
        assert!(matches!(solve(&m, &SolveConfig::default()), Err(Error::TooLarge { n: 10, max: 9 })));
    }

    #[test]
    fn node_limit_keeps_the_incumbent() {
        let cfg = SolveConfig {
            node_limit: 1,
            ..SolveConfig::default()
        };
        let s = solve(&unit(vec![0.1, 0.2, 0.3, 0.4]), &cfg).unwrap();
        assert_eq!(s.status, Status::NodeLimit);
        assert_eq!(s.rects.len(), 4);
        assert!(s.bound <= s.objective);
    }

    #[test]
    fn symmetry_breaking_keeps_the_optimum() {
        let areas = vec![0.3, 0.25, 0.2, 0.15, 0.1];
        for beta in [0.0, 0.1] {
            let m = build_model(
                Rect::raw(0.0, 0.0, 1.0, 1.0),
                AreaList::from_areas(areas.clone()),
                ModelParams::zero(5).with_beta(beta),
            )
            .unwrap();
            let full = solve(&m, &SolveConfig::default()).unwrap();
            let cfg = SolveConfig {
                break_symmetry: true,
                ..SolveConfig::default()
            };
            let reduced = solve(&m, &cfg).unwrap();
            assert_eq!((full.status, reduced.status), (Status::Optimal, Status::Optimal));
            assert!((full.objective - reduced.objective).abs() < 1e-6, "{beta}: {} vs {}", full.objective, reduced.objective);
            assert!(reduced.nodes < full.nodes);
        }
    }

    #[test]
    fn wide_cells_start_from_the_better_cut() {
        // Stacked full-width strips are all wide; the direct cut gives
        // tall columns.
        let m = build_model(
            Rect::raw(0.0, 0.0, 1.0, 1.0),
            AreaList::from_areas(vec![0.5, 0.5]),
            ModelParams::zero(2).with_beta(0.5),
        )
        .unwrap();
        let s = warm_start(&m, &WarmStart::DynamicProg).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-9, "{}", s.objective);
    }
}
