//! The simplex against an independent vertex-enumeration oracle.

mod common;

use ftf_core::lp::{build_fair_lp, solve_lp, solve_lp_with, BoundHandling, LpModel, SolveStatus};
use nalgebra::{DMatrix, DVector};

/// Minimum of the LP over all basic feasible points, found by solving every
/// square system of active constraints. `None` when no vertex is feasible.
fn vertex_enumeration(model: &LpModel) -> Option<f64> {
    let n = model.num_vars();
    // Each candidate constraint as (coefficients, rhs).
    let mut ineq: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &model.coverage_rows {
        let mut a = vec![0.0; n];
        for &j in &row.workers {
            a[j] += 1.0;
        }
        ineq.push((a, 1.0));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        ineq.push((e.clone(), 0.0));
        ineq.push((e, model.upper[j]));
    }
    let eq: Vec<(Vec<f64>, f64)> = model.fairness.iter().map(|k| (k.clone(), 0.0)).collect();
    let pick = n - eq.len();

    let feasible = |x: &[f64]| model.max_violation(x) <= 1e-9;
    let mut best: Option<f64> = None;
    let mut chosen = Vec::with_capacity(pick);
    fn rec(
        start: usize,
        pick: usize,
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
        total: usize,
    ) {
        if chosen.len() == pick {
            visit(chosen);
            return;
        }
        for i in start..total {
            chosen.push(i);
            rec(i + 1, pick, chosen, visit, total);
            chosen.pop();
        }
    }
    let total = ineq.len();
    rec(0, pick, &mut chosen, &mut |idx: &[usize]| {
        let rows: Vec<&(Vec<f64>, f64)> = eq.iter().chain(idx.iter().map(|&i| &ineq[i])).collect();
        let a = DMatrix::from_fn(n, n, |r, c| rows[r].0[c]);
        if a.determinant().abs() < 1e-9 {
            return;
        }
        let b = DVector::from_iterator(n, rows.iter().map(|r| r.1));
        if let Some(x) = a.lu().solve(&b) {
            let x: Vec<f64> = x.iter().copied().collect();
            if feasible(&x) {
                let obj = model.objective(&x);
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    }, total);
    best
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = common::rng(0x1b);
    let mut compared = 0;
    let mut infeasible = 0;
    for _ in 0..400 {
        let n = 2 + (compared + infeasible) % 5;
        let (inst, task) = common::small_instance_with(&mut rng, n.clamp(4, 6), 4);
        let model = build_fair_lp(&inst, &task).unwrap();
        for m in [model.clone(), model.without_fairness()] {
            let oracle = vertex_enumeration(&m);
            for bounds in [BoundHandling::Implicit, BoundHandling::ExplicitRows] {
                let sol = solve_lp_with(&m, bounds).unwrap();
                match oracle {
                    Some(opt) => {
                        assert_eq!(sol.status, SolveStatus::Optimal, "{}", m.to_listing());
                        assert!(
                            (sol.objective_value - opt).abs() <= 1e-7,
                            "{} vs {opt}\n{}",
                            sol.objective_value,
                            m.to_listing()
                        );
                    }
                    None => assert_eq!(sol.status, SolveStatus::Infeasible, "{}", m.to_listing()),
                }
            }
            if oracle.is_some() {
                compared += 1;
            } else {
                infeasible += 1;
            }
        }
    }
    assert!(compared > 300, "{compared}");
}

#[test]
fn solutions_are_feasible_and_deterministic() {
    let mut rng = common::rng(77);
    for _ in 0..300 {
        let (inst, task) = common::small_instance(&mut rng);
        let model = build_fair_lp(&inst, &task).unwrap();
        let a = solve_lp(&model).unwrap();
        let b = solve_lp(&model).unwrap();
        assert_eq!(a, b);
        if a.status == SolveStatus::Optimal {
            // Independent re-check of every row.
            for row in &model.coverage_rows {
                let lhs: f64 = row.workers.iter().map(|&i| a.x[i]).sum();
                assert!(lhs >= 1.0 - 1e-7);
            }
            let fair: f64 = inst.workers().iter().zip(&a.x).map(|(w, x)| w.class.sign() * x).sum();
            assert!(fair.abs() <= 1e-7);
            assert!(a.x.iter().all(|&x| (-1e-9..=1.0 + 1e-9).contains(&x)));
        }
    }
}

#[test]
fn cost_scaling_scales_objective() {
    let mut rng = common::rng(5);
    for i in 0..200 {
        let (inst, task) = common::small_instance(&mut rng);
        let model = build_fair_lp(&inst, &task).unwrap();
        let base = solve_lp(&model).unwrap();
        if base.status != SolveStatus::Optimal {
            continue;
        }
        let lambda = [0.5, 3.0, 17.25][i % 3];
        let scaled = solve_lp(&model.scaled_costs(lambda)).unwrap();
        assert_eq!(scaled.status, SolveStatus::Optimal);
        let want = lambda * base.objective_value;
        assert!((scaled.objective_value - want).abs() <= 1e-7 * want.abs().max(1.0));
        for (a, b) in scaled.x.iter().zip(&base.x) {
            assert!((a - b).abs() <= 1e-7);
        }
    }
}
