//! Weighted greedy set cover with per-skill pricing, and the trivial lower
//! bound derived from the greedy cost.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::model::{Instance, SkillId, Task, Team, Worker, COST_EPS};

/// Price of each task skill: the cost efficiency of the worker that first covered it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PriceVector {
    prices: BTreeMap<SkillId, f64>,
}

impl PriceVector {
    pub fn get(&self, skill: SkillId) -> Option<f64> {
        self.prices.get(&skill).copied()
    }

    pub fn total(&self) -> f64 {
        self.prices.values().sum()
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SkillId, f64)> + '_ {
        self.prices.iter().map(|(&s, &p)| (s, p))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pick {
    pub worker: usize,
    pub efficiency: f64,
    pub newly_covered: Vec<SkillId>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GreedyTrace {
    pub picks: Vec<Pick>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyOutcome {
    pub team: Team,
    pub cost: f64,
    pub prices: PriceVector,
    pub trace: GreedyTrace,
}

/// `a` beats the incumbent `b` only when smaller by more than the cost tolerance,
/// so that near-equal keys fall back to the caller's iteration order.
pub fn strictly_less(a: f64, b: f64) -> bool {
    a < b - COST_EPS * b.abs().max(1.0)
}

/// Workers having at least one of the task's skills, ascending.
pub(crate) fn relevant_workers(instance: &Instance, task: &Task) -> Vec<usize> {
    let mut out: Vec<usize> = task
        .skill_ids()
        .flat_map(|s| instance.pool(s).iter().copied())
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub(crate) fn new_coverage(worker: &Worker, uncovered: &FixedBitSet) -> usize {
    worker.skills.intersection_count(uncovered)
}

pub fn greedy_set_cover(instance: &Instance, task: &Task) -> Result<GreedyOutcome> {
    instance.ensure_coverable(task)?;
    let candidates = relevant_workers(instance, task);
    let mut hired = vec![false; instance.len()];
    let mut uncovered = task.skills.clone();
    let mut team = Team::empty();
    let mut prices = PriceVector::default();
    let mut trace = GreedyTrace::default();

    while !uncovered.is_clear() {
        let mut best: Option<(usize, f64)> = None;
        for &r in &candidates {
            if hired[r] {
                continue;
            }
            let k = new_coverage(instance.worker(r), &uncovered);
            if k == 0 {
                continue;
            }
            let eff = instance.worker(r).cost / k as f64;
            if best.is_none_or(|(_, b)| strictly_less(eff, b)) {
                best = Some((r, eff));
            }
        }
        // Coverability was checked up front, so some candidate always adds a skill.
        let (r, eff) = best.expect("coverable task always has a covering candidate");
        let mut newly = instance.worker(r).skills.clone();
        newly.intersect_with(&uncovered);
        let newly: Vec<SkillId> = newly.ones().map(SkillId::from).collect();
        for &s in &newly {
            uncovered.remove(s.index());
            prices.prices.insert(s, eff);
        }
        hired[r] = true;
        team.insert(r);
        trace.picks.push(Pick {
            worker: r,
            efficiency: eff,
            newly_covered: newly,
        });
    }

    let cost = team.members().iter().map(|&r| instance.worker(r).cost).sum();
    Ok(GreedyOutcome {
        team,
        cost,
        prices,
        trace,
    })
}

/// `H(k) = 1 + 1/2 + ... + 1/k`.
pub fn harmonic(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("harmonic number of 0".into()));
    }
    Ok((1..=k).rev().map(|i| 1.0 / i as f64).sum())
}

/// Checks that the prices of the worker's task skills add up to at most
/// `cost * H(m)`, with `m` the skill universe size.
pub fn verify_price_bound(
    prices: &PriceVector,
    worker: &Worker,
    task: &Task,
    m: usize,
) -> Result<bool> {
    let mut sum = 0.0;
    for s in worker.skill_ids().filter(|&s| task.skills.contains(s.index())) {
        sum += prices.get(s).ok_or(Error::MissingPrice(s))?;
    }
    Ok(sum <= worker.cost * harmonic(m.max(1))? + COST_EPS)
}

/// Denominator of the trivial lower bound: `ln n − ln ln n + 3 + ln ln 32 − ln 32`.
pub fn greedy_ratio_bound(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "trivial lower bound needs at least 2 workers, got {n}"
        )));
    }
    let ln = |x: f64| x.ln();
    let n = n as f64;
    Ok(ln(n) - ln(ln(n)) + 3.0 + ln(ln(32.0)) - ln(32.0))
}

/// Greedy cost divided by the greedy approximation ratio bound for `n` workers.
pub fn trivial_lower_bound(greedy_cost: f64, n: usize) -> Result<f64> {
    if greedy_cost.is_nan() || greedy_cost < 0.0 {
        return Err(Error::Domain(format!("negative greedy cost {greedy_cost}")));
    }
    Ok(greedy_cost / greedy_ratio_bound(n)?)
}
