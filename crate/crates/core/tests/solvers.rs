//! Cross-checks of the heuristics against brute force and simpler reference versions.

mod common;

use ftf_core::fair::{alternating_pass, round_solution};
use ftf_core::greedy::strictly_less;
use ftf_core::io::{gen_hardness_gadget, GadgetSpec};
use ftf_core::lp::{build_fair_lp, solve_lp, SolveStatus};
use ftf_core::*;

const N_CASES: u64 = 1500;

/// Pairs heuristic written the slow way: every bi-chromatic pair of unhired workers.
fn naive_pairs(inst: &Instance, task: &Task) -> Option<Team> {
    let mut hired = vec![false; inst.len()];
    let mut uncovered = task.skills.clone();
    let mut team = Team::empty();
    while !uncovered.is_clear() {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..inst.len() {
            for b in 0..inst.len() {
                let (wa, wb) = (inst.worker(a), inst.worker(b));
                if hired[a] || hired[b] || wa.class != ClassLabel::Class1 || wb.class != ClassLabel::Class2 {
                    continue;
                }
                let mut both = wa.skills.clone();
                both.union_with(&wb.skills);
                let gain = both.intersection_count(&uncovered);
                if gain == 0 {
                    continue;
                }
                let eff = (wa.cost + wb.cost) / gain as f64;
                let better = match best {
                    None => true,
                    Some((e, ba, bb)) => {
                        strictly_less(eff, e) || (!strictly_less(e, eff) && (a, b) < (ba, bb))
                    }
                };
                if better {
                    best = Some((eff, a, b));
                }
            }
        }
        let (_, a, b) = best?;
        for r in [a, b] {
            hired[r] = true;
            team.insert(r);
            uncovered.difference_with(&inst.worker(r).skills);
        }
    }
    Some(team)
}

#[test]
fn pairs_matches_naive_reference() {
    let mut rng = common::rng(31);
    for _ in 0..N_CASES {
        let (inst, task) = common::small_instance(&mut rng);
        let fast = fair_pairs(&inst, &task).ok().map(|r| r.team);
        assert_eq!(fast, naive_pairs(&inst, &task));
    }
}

#[test]
fn heuristics_are_sound_and_bounded_by_oracle() {
    let mut rng = common::rng(32);
    let options = SolveOptions { seed: 9, max_restarts: 1000 };
    for _ in 0..N_CASES {
        let (inst, task) = common::small_instance(&mut rng);
        let fair_opt = brute_force_fair_optimum(&inst, &task, 20).unwrap().optimum;
        let unfair_opt = brute_force_unfair_optimum(&inst, &task, 20).unwrap().optimum.unwrap().1;
        if let Some((_, f)) = &fair_opt {
            assert!(unfair_opt <= f + 1e-9);
        }
        for alg in Algorithm::FAIR {
            let Ok(res) = solve(&inst, &task, alg, &options) else { continue };
            assert!(is_fair_cover(&res.team, &task, &inst).unwrap(), "{alg}");
            let (_, opt) = fair_opt.as_ref().expect("a fair team exists");
            assert!(res.cost >= opt - 1e-6, "{alg}: {} < {opt}", res.cost);
        }
        let lp = solve_lp(&build_fair_lp(&inst, &task).unwrap()).unwrap();
        match (&fair_opt, lp.status) {
            (Some((_, opt)), SolveStatus::Optimal) => assert!(lp.objective_value <= opt + 1e-6),
            (Some(_), s) => panic!("fair cover exists but LP status {s:?}"),
            (None, _) => {}
        }
    }
}

#[test]
fn greedy_within_harmonic_factor_of_optimum() {
    let mut rng = common::rng(33);
    for _ in 0..N_CASES {
        let (inst, task) = common::small_instance(&mut rng);
        let g = greedy_set_cover(&inst, &task).unwrap();
        let opt = brute_force_unfair_optimum(&inst, &task, 20).unwrap().optimum.unwrap().1;
        assert!(g.cost <= harmonic(inst.skill_count()).unwrap() * opt + 1e-9);
        assert!(g.cost <= harmonic(task.len()).unwrap() * opt + 1e-9);
        assert_eq!(g, greedy_set_cover(&inst, &task).unwrap());
        // Newly covered sets partition the task.
        let mut seen = Vec::new();
        for p in &g.trace.picks {
            seen.extend(p.newly_covered.iter().copied());
        }
        seen.sort();
        assert_eq!(seen, task.skill_ids().collect::<Vec<_>>());
    }
}

#[test]
fn padding_alternating_structure() {
    let mut rng = common::rng(34);
    for _ in 0..N_CASES {
        let (inst, task) = common::small_instance(&mut rng);
        let g = greedy_set_cover(&inst, &task).unwrap();
        if let Ok(p) = fair_padding(&inst, &task) {
            assert!(p.cost >= g.cost - 1e-12);
        }
        let a = alternating_pass(&inst, &task, ClassLabel::Class1).ok();
        let b = alternating_pass(&inst, &task, ClassLabel::Class2).ok();
        let cost = |t: &Team| team_cost(t, &inst).unwrap();
        let expect = match (a, b) {
            (Some(a), Some(b)) => Some(if cost(&b) < cost(&a) { b } else { a }),
            (a, b) => a.or(b),
        };
        assert_eq!(fair_alternating(&inst, &task).ok().map(|r| r.team), expect);
        if let Ok(p) = fair_pairs(&inst, &task) {
            let bal = balance(&p.team, &inst).unwrap();
            assert_eq!(p.team.len() % 2, 0);
            assert_eq!(bal.class1, bal.class2);
        }
    }
}

#[test]
fn rounding_is_deterministic_and_respects_zero_probabilities() {
    let mut rng = common::rng(35);
    for i in 0..N_CASES {
        let (inst, task) = common::small_instance(&mut rng);
        let lp = solve_lp(&build_fair_lp(&inst, &task).unwrap()).unwrap();
        if lp.status != SolveStatus::Optimal {
            continue;
        }
        let a = round_solution(&inst, &task, &lp, i, 200);
        let b = round_solution(&inst, &task, &lp, i, 200);
        match (&a, &b) {
            (Ok(x), Ok(y)) => {
                assert_eq!(x, y);
                assert!(x.team.members().iter().all(|&r| lp.x[r] >= 1e-9));
            }
            (Err(_), Err(_)) => {}
            _ => panic!("non-deterministic rounding"),
        }
    }
}

#[test]
fn oracle_orders_agree() {
    let mut rng = common::rng(36);
    for _ in 0..300 {
        let (inst, task) = common::small_instance_with(&mut rng, 8, 5);
        let forward = brute_force_fair_optimum(&inst, &task, 20).unwrap().optimum.map(|o| o.1);
        let n = inst.len();
        let mut reverse: Option<f64> = None;
        for s in (0..1u32 << n).rev() {
            let team = Team::new((0..n).filter(|&i| s & (1 << i) != 0));
            if is_fair_cover(&team, &task, &inst).unwrap() {
                let c = team_cost(&team, &inst).unwrap();
                reverse = Some(reverse.map_or(c, |r| r.min(c)));
            }
        }
        match (forward, reverse) {
            (Some(f), Some(r)) => assert!((f - r).abs() < 1e-9),
            (None, None) => {}
            other => panic!("{other:?}"),
        }
    }
}

fn has_vertex_cover(vertices: usize, edges: &[(usize, usize)], k: usize) -> bool {
    (0u32..1 << vertices).any(|s| {
        s.count_ones() as usize <= k && edges.iter().all(|&(u, v)| s & (1 << u) != 0 || s & (1 << v) != 0)
    })
}

#[test]
fn gadget_on_random_graphs_up_to_eight_vertices() {
    use rand::Rng;
    let mut rng = common::rng(37);
    for _ in 0..300 {
        let vertices = rng.random_range(1..=8);
        let mut edges = Vec::new();
        for u in 0..vertices {
            for v in u + 1..vertices {
                if rng.random_bool(0.35) {
                    edges.push((u, v));
                }
            }
        }
        let k_blue = rng.random_range(0..=4);
        let spec = GadgetSpec { vertices, edges: edges.clone(), k_blue, red_cost: 1.0, blue_cost: 0.5 };
        let (inst, task) = gen_hardness_gadget(&spec).unwrap();
        let fair = brute_force_fair_optimum(&inst, &task, 20).unwrap().optimum.is_some();
        assert_eq!(fair, has_vertex_cover(vertices, &edges, k_blue), "{edges:?} k={k_blue}");
    }
}
