//! Fair team formation heuristics: padding, alternating, pairs and LP rounding.
//!
//! Every successful result is a fair cover: it covers the task and has equally
//! many workers from each class.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rand::Rng;

use crate::error::{Error, Result};
use crate::greedy::{greedy_set_cover, new_coverage, relevant_workers, strictly_less};
use crate::lp::{build_fair_lp, solve_lp, FractionalSolution, SolveStatus};
use crate::model::{balance, ClassLabel, Instance, Task, Team, Worker};
use crate::rng::rng_for;

pub const DEFAULT_MAX_RESTARTS: u32 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    /// Plain weighted greedy; not fair, kept as the baseline.
    Greedy,
    Padding,
    Alternating,
    Pairs,
    Rounding,
}

impl Algorithm {
    pub const FAIR: [Algorithm; 4] = [
        Algorithm::Padding,
        Algorithm::Alternating,
        Algorithm::Pairs,
        Algorithm::Rounding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Padding => "padding",
            Algorithm::Alternating => "alternating",
            Algorithm::Pairs => "pairs",
            Algorithm::Rounding => "rounding",
        }
    }

    pub fn is_fair(self) -> bool {
        self != Algorithm::Greedy
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Algorithm::Greedy),
            "padding" => Ok(Algorithm::Padding),
            "alternating" => Ok(Algorithm::Alternating),
            "pairs" => Ok(Algorithm::Pairs),
            "rounding" => Ok(Algorithm::Rounding),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub team: Team,
    pub cost: f64,
    pub algorithm: Algorithm,
    pub seed: Option<u64>,
    /// Restarts used by rounding; 0 for the deterministic solvers.
    pub iterations: u32,
}

impl SolveResult {
    fn new(instance: &Instance, team: Team, algorithm: Algorithm) -> Self {
        SolveResult {
            cost: cost_of(instance, &team),
            team,
            algorithm,
            seed: None,
            iterations: 0,
        }
    }
}

fn cost_of(instance: &Instance, team: &Team) -> f64 {
    team.members().iter().map(|&r| instance.worker(r).cost).sum()
}

/// Worker marginal utility: cost per still-uncovered skill, `+∞` when the
/// worker adds nothing.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Wmu(pub f64);

impl Wmu {
    pub fn of(worker: &Worker, uncovered: &FixedBitSet) -> Self {
        match new_coverage(worker, uncovered) {
            0 => Wmu(f64::INFINITY),
            k => Wmu(worker.cost / k as f64),
        }
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

/// Unhired workers of one class, cheapest first (ties by position).
fn by_cost(instance: &Instance, class: ClassLabel) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..instance.len())
        .filter(|&r| instance.worker(r).class == class)
        .collect();
    ids.sort_by(|&a, &b| {
        instance
            .worker(a)
            .cost
            .total_cmp(&instance.worker(b).cost)
            .then(a.cmp(&b))
    });
    ids
}

/// The `deficit` cheapest workers of `class` not already in `team`, cheapest first.
pub fn get_cheapest_workers(
    instance: &Instance,
    team: &Team,
    class: ClassLabel,
    deficit: usize,
) -> Result<Vec<usize>> {
    if deficit == 0 {
        return Ok(Vec::new());
    }
    let free: Vec<usize> = by_cost(instance, class)
        .into_iter()
        .filter(|&r| !team.contains(r))
        .collect();
    if free.len() < deficit {
        return Err(Error::InsufficientWorkers {
            class,
            needed: deficit,
            available: free.len(),
        });
    }
    Ok(free[..deficit].to_vec())
}

/// Pads `team` with the cheapest minority-class workers until balanced.
fn pad(instance: &Instance, mut team: Team) -> Result<Team> {
    if let Some((class, deficit)) = balance(&team, instance)?.deficit() {
        for r in get_cheapest_workers(instance, &team, class, deficit)? {
            team.insert(r);
        }
    }
    Ok(team)
}

pub fn greedy(instance: &Instance, task: &Task) -> Result<SolveResult> {
    let out = greedy_set_cover(instance, task)?;
    Ok(SolveResult::new(instance, out.team, Algorithm::Greedy))
}

pub fn fair_padding(instance: &Instance, task: &Task) -> Result<SolveResult> {
    let base = greedy_set_cover(instance, task)?.team;
    let team = pad(instance, base).map_err(|_| Error::FairCoverNotFound)?;
    Ok(SolveResult::new(instance, team, Algorithm::Padding))
}

/// One alternating pass starting from `start`, padded to balance.
pub fn alternating_pass(instance: &Instance, task: &Task, start: ClassLabel) -> Result<Team> {
    instance.ensure_coverable(task)?;
    let candidates = relevant_workers(instance, task);
    let cheapest = [
        by_cost(instance, ClassLabel::Class1),
        by_cost(instance, ClassLabel::Class2),
    ];
    let cheapest_of = |class: ClassLabel| &cheapest[usize::from(class == ClassLabel::Class2)];

    let mut hired = vec![false; instance.len()];
    let mut uncovered = task.skills.clone();
    let mut team = Team::empty();
    let mut due = start;

    let best_of = |class: Option<ClassLabel>, hired: &[bool], uncovered: &FixedBitSet| {
        let mut best: Option<(usize, f64)> = None;
        for &r in &candidates {
            let w = instance.worker(r);
            if hired[r] || class.is_some_and(|c| w.class != c) {
                continue;
            }
            let wmu = Wmu::of(w, uncovered);
            if wmu.is_finite() && best.is_none_or(|(_, b)| strictly_less(wmu.0, b)) {
                best = Some((r, wmu.0));
            }
        }
        best.map(|(r, _)| r)
    };

    while !uncovered.is_clear() {
        let pick = best_of(Some(due), &hired, &uncovered)
            .or_else(|| cheapest_of(due).iter().copied().find(|&r| !hired[r]))
            .or_else(|| best_of(None, &hired, &uncovered))
            .expect("coverable task always has a covering candidate");
        hired[pick] = true;
        team.insert(pick);
        uncovered.difference_with(&instance.worker(pick).skills);
        due = due.other();
    }
    pad(instance, team)
}

pub fn fair_alternating(instance: &Instance, task: &Task) -> Result<SolveResult> {
    instance.ensure_coverable(task)?;
    let first = alternating_pass(instance, task, ClassLabel::Class1).ok();
    let second = alternating_pass(instance, task, ClassLabel::Class2).ok();
    let team = match (first, second) {
        (Some(a), Some(b)) => {
            if cost_of(instance, &b) < cost_of(instance, &a) {
                b
            } else {
                a
            }
        }
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::FairCoverNotFound),
    };
    Ok(SolveResult::new(instance, team, Algorithm::Alternating))
}

#[derive(Clone, Copy, Debug)]
struct PairChoice {
    efficiency: f64,
    class1: usize,
    class2: usize,
}

impl PairChoice {
    fn new(instance: &Instance, a: usize, b: usize, gain: usize) -> Self {
        let (class1, class2) = if instance.worker(a).class == ClassLabel::Class1 {
            (a, b)
        } else {
            (b, a)
        };
        PairChoice {
            efficiency: (instance.worker(a).cost + instance.worker(b).cost) / gain as f64,
            class1,
            class2,
        }
    }

    fn beats(&self, other: &PairChoice) -> bool {
        if strictly_less(self.efficiency, other.efficiency) {
            true
        } else if strictly_less(other.efficiency, self.efficiency) {
            false
        } else {
            (self.class1, self.class2) < (other.class1, other.class2)
        }
    }
}

/// Greedy cover over bi-chromatic pairs: each step hires one class-1 and one
/// class-2 worker, choosing the pair with the lowest joint cost per newly
/// covered skill. Ties go to the lexicographically smallest `(class1, class2)`.
///
/// A pair's gain is positive only if one member covers something new, so the
/// search is limited to pairs inside the set of useful workers, plus each
/// useful worker joined with the cheapest useless worker of the other class.
pub fn fair_pairs(instance: &Instance, task: &Task) -> Result<SolveResult> {
    instance.ensure_coverable(task)?;
    let candidates = relevant_workers(instance, task);
    let cheapest = [
        by_cost(instance, ClassLabel::Class1),
        by_cost(instance, ClassLabel::Class2),
    ];
    let mut hired = vec![false; instance.len()];
    let mut uncovered = task.skills.clone();
    let mut team = Team::empty();
    let mut scratch = FixedBitSet::with_capacity(instance.skill_count());

    while !uncovered.is_clear() {
        let useful: Vec<(usize, usize)> = candidates
            .iter()
            .filter(|&&r| !hired[r])
            .filter_map(|&r| {
                let k = new_coverage(instance.worker(r), &uncovered);
                (k > 0).then_some((r, k))
            })
            .collect();
        let mut is_useful = vec![false; instance.len()];
        for &(r, _) in &useful {
            is_useful[r] = true;
        }

        let mut best: Option<PairChoice> = None;
        let mut offer = |choice: PairChoice| {
            if best.is_none_or(|b| choice.beats(&b)) {
                best = Some(choice);
            }
        };
        for (i, &(a, ka)) in useful.iter().enumerate() {
            let class_a = instance.worker(a).class;
            for &(b, _) in &useful[i + 1..] {
                if instance.worker(b).class == class_a {
                    continue;
                }
                scratch.clone_from(&instance.worker(a).skills);
                scratch.union_with(&instance.worker(b).skills);
                let gain = scratch.intersection_count(&uncovered);
                offer(PairChoice::new(instance, a, b, gain));
            }
            let partners = &cheapest[usize::from(class_a == ClassLabel::Class1)];
            if let Some(&b) = partners.iter().find(|&&b| !hired[b] && !is_useful[b]) {
                offer(PairChoice::new(instance, a, b, ka));
            }
        }

        let choice = best.ok_or(Error::FairCoverNotFound)?;
        for r in [choice.class1, choice.class2] {
            hired[r] = true;
            team.insert(r);
            uncovered.difference_with(&instance.worker(r).skills);
        }
    }
    Ok(SolveResult::new(instance, team, Algorithm::Pairs))
}

/// Hiring probabilities from the fair LP, with solver noise snapped to 0 or 1.
fn hiring_probabilities(solution: &FractionalSolution) -> Vec<f64> {
    solution
        .x
        .iter()
        .map(|&x| {
            if x < 1e-9 {
                0.0
            } else if x > 1.0 - 1e-9 {
                1.0
            } else {
                x
            }
        })
        .collect()
}

pub fn fair_rounding(
    instance: &Instance,
    task: &Task,
    seed: u64,
    max_restarts: u32,
) -> Result<SolveResult> {
    let model = build_fair_lp(instance, task)?;
    let solution = solve_lp(&model)?;
    match solution.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(Error::LpInfeasible),
        SolveStatus::IterationLimit => return Err(Error::LpIterationLimit),
    }
    round_solution(instance, task, &solution, seed, max_restarts)
}

/// Randomised rounding of a fractional solution: scan workers by decreasing
/// probability, admit each independently, and stop at the first prefix that is
/// a fair cover. Restart `i` draws from a stream derived from `(seed, i)`.
pub fn round_solution(
    instance: &Instance,
    task: &Task,
    solution: &FractionalSolution,
    seed: u64,
    max_restarts: u32,
) -> Result<SolveResult> {
    if max_restarts == 0 {
        return Err(Error::Domain("max_restarts must be positive".into()));
    }
    let p = hiring_probabilities(solution);
    let mut order: Vec<usize> = (0..instance.len()).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));

    // Task skills renumbered 0..|J| for the per-restart coverage counters.
    let mut local = vec![usize::MAX; instance.skill_count()];
    for (i, s) in task.skill_ids().enumerate() {
        local[s.index()] = i;
    }
    let need = task.len();

    for restart in 0..max_restarts {
        let mut rng = rng_for(seed, u64::from(restart));
        let mut hits = vec![0u32; need];
        let mut covered = 0;
        let mut diff: i64 = 0;
        let mut team = Team::empty();
        for &r in &order {
            let draw: f64 = rng.random();
            if draw >= p[r] {
                continue;
            }
            let w = instance.worker(r);
            team.insert(r);
            diff += match w.class {
                ClassLabel::Class1 => 1,
                ClassLabel::Class2 => -1,
            };
            for s in w.skills.ones() {
                let l = local[s];
                if l != usize::MAX {
                    if hits[l] == 0 {
                        covered += 1;
                    }
                    hits[l] += 1;
                }
            }
            if covered == need && diff == 0 {
                let mut out = SolveResult::new(instance, team, Algorithm::Rounding);
                out.seed = Some(seed);
                out.iterations = restart + 1;
                return Ok(out);
            }
        }
    }
    Err(Error::RoundingBudgetExhausted(max_restarts))
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub seed: u64,
    pub max_restarts: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: 0,
            max_restarts: DEFAULT_MAX_RESTARTS,
        }
    }
}

pub fn solve(
    instance: &Instance,
    task: &Task,
    algorithm: Algorithm,
    options: &SolveOptions,
) -> Result<SolveResult> {
    match algorithm {
        Algorithm::Greedy => greedy(instance, task),
        Algorithm::Padding => fair_padding(instance, task),
        Algorithm::Alternating => fair_alternating(instance, task),
        Algorithm::Pairs => fair_pairs(instance, task),
        Algorithm::Rounding => fair_rounding(instance, task, options.seed, options.max_restarts),
    }
}

/// Orders results by cost, then by member list.
pub fn cheaper(a: &SolveResult, b: &SolveResult) -> Ordering {
    a.cost.total_cmp(&b.cost).then_with(|| a.team.cmp(&b.team))
}
