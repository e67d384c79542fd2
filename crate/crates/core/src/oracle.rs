//! Exhaustive optimum search for small workforces.
//!
//! Subsets are visited in binary-counter order; each subset's cost, coverage
//! and class balance are derived from the subset with its lowest member removed,
//! so every visit is O(1).

use crate::error::{Error, Result};
use crate::model::{ClassLabel, Instance, Task, Team, COST_EPS};

pub const DEFAULT_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub optimum: Option<(Team, f64)>,
    /// Subsets whose coverage was examined (the rest were pruned on cost).
    pub explored: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Variant {
    Fair,
    Unfair,
}

/// Subset order on sorted member lists: is `a` lexicographically before `b`?
pub(crate) fn lex_less(a: u32, b: u32) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let d = diff.trailing_zeros();
    let above = !((1u64 << (d + 1)) - 1) as u32;
    if a & (1 << d) != 0 {
        // `a` has the first differing element; it is smaller unless `b` ended there.
        b & above != 0
    } else {
        a & above == 0
    }
}

fn search(instance: &Instance, task: &Task, limit: usize, variant: Variant) -> Result<OracleResult> {
    let n = instance.len();
    if n > limit {
        return Err(Error::TooLarge { size: n, limit });
    }
    if n > 30 {
        return Err(Error::TooLarge { size: n, limit: 30 });
    }
    let need = task.len();
    if need > 128 {
        return Err(Error::TooLarge { size: need, limit: 128 });
    }
    let mut local = vec![None; instance.skill_count()];
    for (i, s) in task.skill_ids().enumerate() {
        if let Some(slot) = local.get_mut(s.index()) {
            *slot = Some(i);
        }
    }
    let target: u128 = if need == 128 { u128::MAX } else { (1u128 << need) - 1 };
    let masks: Vec<u128> = instance
        .workers()
        .iter()
        .map(|w| {
            w.skills
                .ones()
                .filter_map(|s| local.get(s).copied().flatten())
                .fold(0u128, |m, i| m | (1u128 << i))
        })
        .collect();
    let class1: u32 = instance
        .workers()
        .iter()
        .enumerate()
        .filter(|(_, w)| w.class == ClassLabel::Class1)
        .fold(0, |m, (i, _)| m | (1 << i));

    let total = 1usize << n;
    let mut cover = vec![0u128; total];
    let mut cost = vec![0.0f64; total];
    let mut best: Option<(u32, f64)> = None;
    let mut explored = 0u64;

    for s in 0..total {
        if s > 0 {
            let low = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            cover[s] = cover[rest] | masks[low];
            cost[s] = cost[rest] + instance.worker(low).cost;
        }
        let c = cost[s];
        if let Some((_, bc)) = best {
            if c > bc + COST_EPS {
                continue;
            }
        }
        explored += 1;
        if cover[s] & target != target {
            continue;
        }
        let mask = s as u32;
        if variant == Variant::Fair && 2 * (mask & class1).count_ones() != mask.count_ones() {
            continue;
        }
        let better = match best {
            None => true,
            Some((bm, bc)) => c < bc - COST_EPS || (c <= bc + COST_EPS && lex_less(mask, bm)),
        };
        if better {
            best = Some((mask, c));
        }
    }

    let optimum = best.map(|(mask, c)| {
        let team = Team::new((0..n).filter(|&i| mask & (1 << i) != 0));
        (team, c)
    });
    Ok(OracleResult { optimum, explored })
}

pub fn brute_force_fair_optimum(instance: &Instance, task: &Task, limit: usize) -> Result<OracleResult> {
    search(instance, task, limit, Variant::Fair)
}

pub fn brute_force_unfair_optimum(
    instance: &Instance,
    task: &Task,
    limit: usize,
) -> Result<OracleResult> {
    search(instance, task, limit, Variant::Unfair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{is_fair_cover, Worker, ClassLabel::*};

    /// Independent enumeration: descending counter, direct recomputation per subset.
    fn reverse_fair_cost(instance: &Instance, task: &Task) -> Option<f64> {
        let n = instance.len();
        let mut best: Option<f64> = None;
        for s in (0..1u32 << n).rev() {
            let team = Team::new((0..n).filter(|&i| s & (1 << i) != 0));
            if is_fair_cover(&team, task, instance).unwrap() {
                let c = crate::model::team_cost(&team, instance).unwrap();
                best = Some(best.map_or(c, |b: f64| b.min(c)));
            }
        }
        best
    }

    #[test]
    fn i4_optima() {
        let (inst, task) = fixtures::i4();
        let fair = brute_force_fair_optimum(&inst, &task, DEFAULT_LIMIT).unwrap();
        let (team, cost) = fair.optimum.unwrap();
        assert_eq!(team, Team::new([0, 2]));
        assert!((cost - 6.0).abs() < 1e-12);
        assert!((reverse_fair_cost(&inst, &task).unwrap() - 6.0).abs() < 1e-12);

        let unfair = brute_force_unfair_optimum(&inst, &task, DEFAULT_LIMIT).unwrap();
        let (team, cost) = unfair.optimum.unwrap();
        assert_eq!(team, Team::new([0, 1]));
        assert!((cost - 2.0).abs() < 1e-12);
    }

    #[test]
    fn i3_unfair_optimum() {
        let (inst, task) = fixtures::i3();
        let (team, cost) = brute_force_unfair_optimum(&inst, &task, DEFAULT_LIMIT)
            .unwrap()
            .optimum
            .unwrap();
        assert_eq!(team, Team::new([0, 3]));
        assert!((cost - 1.5).abs() < 1e-12);
    }

    #[test]
    fn forced_pair_and_empty_task() {
        let (inst, task) = fixtures::forced_pair();
        let (team, cost) = brute_force_fair_optimum(&inst, &task, DEFAULT_LIMIT)
            .unwrap()
            .optimum
            .unwrap();
        assert_eq!(team, Team::new([0, 1]));
        assert_eq!(cost, 2.0);

        let empty = Task::new(1, std::iter::empty::<usize>());
        let (team, cost) = brute_force_unfair_optimum(&inst, &empty, DEFAULT_LIMIT)
            .unwrap()
            .optimum
            .unwrap();
        assert!(team.is_empty());
        assert_eq!(cost, 0.0);
    }

    #[test]
    fn no_fair_cover() {
        let inst = Instance::new(
            1,
            vec![Worker::new(0, 1.0, Class1, [0usize]), Worker::new(1, 1.0, Class1, [0usize])],
        )
        .unwrap();
        let out = brute_force_fair_optimum(&inst, &Task::new(0, [0usize]), DEFAULT_LIMIT).unwrap();
        assert!(out.optimum.is_none());
    }

    #[test]
    fn too_large() {
        let (inst, task) = fixtures::i4();
        assert!(matches!(
            brute_force_fair_optimum(&inst, &task, 3),
            Err(Error::TooLarge { size: 4, limit: 3 })
        ));
    }

    #[test]
    fn ties_pick_lexicographically_smallest() {
        // {w0,w3} and {w1,w2} both cost 2 and are fair covers.
        let inst = Instance::new(
            1,
            vec![
                Worker::new(0, 1.0, Class1, [0usize]),
                Worker::new(1, 1.0, Class1, [0usize]),
                Worker::new(2, 1.0, Class2, [0usize]),
                Worker::new(3, 1.0, Class2, [0usize]),
            ],
        )
        .unwrap();
        let (team, _) = brute_force_fair_optimum(&inst, &Task::new(0, [0usize]), 20)
            .unwrap()
            .optimum
            .unwrap();
        assert_eq!(team, Team::new([0, 2]));
    }

    #[test]
    fn lex_order_matches_vec_order() {
        for a in 0u32..64 {
            for b in 0u32..64 {
                let va: Vec<u32> = (0..6).filter(|i| a & (1 << i) != 0).collect();
                let vb: Vec<u32> = (0..6).filter(|i| b & (1 << i) != 0).collect();
                assert_eq!(lex_less(a, b), va < vb, "{va:?} {vb:?}");
            }
        }
    }
}
