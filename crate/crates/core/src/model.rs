//! Workers, tasks, teams and the skill-indexed workforce they live in.

use std::collections::HashSet;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Tolerance used wherever two costs are compared for equality.
pub const COST_EPS: f64 = 1e-9;

/// Dense skill index in `0..m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SkillId(pub u32);

impl SkillId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for SkillId {
    fn from(i: usize) -> Self {
        SkillId(i as u32)
    }
}

impl fmt::Display for SkillId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Class1,
    Class2,
}

impl ClassLabel {
    pub fn other(self) -> Self {
        match self {
            ClassLabel::Class1 => ClassLabel::Class2,
            ClassLabel::Class2 => ClassLabel::Class1,
        }
    }

    /// Coefficient of this class in the fairness row: -1 for class 1, +1 for class 2.
    pub fn sign(self) -> f64 {
        match self {
            ClassLabel::Class1 => -1.0,
            ClassLabel::Class2 => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Class1 => "class1",
            ClassLabel::Class2 => "class2",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Builds a skill bitset from skill ids; the set grows to fit the largest id.
pub fn skill_set<I>(skills: I) -> FixedBitSet
where
    I: IntoIterator,
    I::Item: Into<SkillId>,
{
    let mut set = FixedBitSet::new();
    for s in skills {
        let i = s.into().index();
        set.grow(i + 1);
        set.insert(i);
    }
    set
}

#[derive(Clone, Debug, PartialEq)]
pub struct Worker {
    /// External identifier (as found in the workforce file).
    pub id: u64,
    pub skills: FixedBitSet,
    pub cost: f64,
    pub class: ClassLabel,
}

impl Worker {
    pub fn new<I>(id: u64, cost: f64, class: ClassLabel, skills: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<SkillId>,
    {
        Worker {
            id,
            skills: skill_set(skills),
            cost,
            class,
        }
    }

    pub fn skill_ids(&self) -> impl Iterator<Item = SkillId> + '_ {
        self.skills.ones().map(SkillId::from)
    }

    pub fn has_skill(&self, skill: SkillId) -> bool {
        self.skills.contains(skill.index())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub id: u64,
    pub skills: FixedBitSet,
}

impl Task {
    pub fn new<I>(id: u64, skills: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<SkillId>,
    {
        Task {
            id,
            skills: skill_set(skills),
        }
    }

    pub fn skill_ids(&self) -> impl Iterator<Item = SkillId> + '_ {
        self.skills.ones().map(SkillId::from)
    }

    pub fn len(&self) -> usize {
        self.skills.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.skills.is_clear()
    }
}

/// The workforce: `n` workers over a universe of `m` skills, plus the inverted
/// skill → workers index.
///
/// Workers are addressed by their position `0..n`; [`Worker::id`] is only a label.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    m: usize,
    workers: Vec<Worker>,
    pool: Vec<Vec<usize>>,
}

impl Instance {
    pub fn new(m: usize, mut workers: Vec<Worker>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(workers.len());
        for w in &mut workers {
            if !seen.insert(w.id) {
                return Err(Error::DuplicateWorkerId(w.id));
            }
            if !(w.cost.is_finite() && w.cost >= 0.0) {
                return Err(Error::Domain(format!(
                    "worker {} has invalid cost {}",
                    w.id, w.cost
                )));
            }
            if let Some(bad) = w.skills.ones().find(|&s| s >= m) {
                return Err(Error::Domain(format!(
                    "worker {} has skill {} outside 0..{m}",
                    w.id, bad
                )));
            }
            w.skills.grow(m);
        }
        let mut pool = vec![Vec::new(); m];
        for (r, w) in workers.iter().enumerate() {
            for s in w.skills.ones() {
                pool[s].push(r);
            }
        }
        Ok(Instance { m, workers, pool })
    }

    pub fn skill_count(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.workers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.workers.is_empty()
    }

    pub fn workers(&self) -> &[Worker] {
        &self.workers
    }

    pub fn worker(&self, r: usize) -> &Worker {
        &self.workers[r]
    }

    /// Workers possessing `skill`; empty for skills outside the universe.
    pub fn pool(&self, skill: SkillId) -> &[usize] {
        self.pool.get(skill.index()).map_or(&[], Vec::as_slice)
    }

    /// Same workers over a (possibly larger) skill universe.
    pub fn with_skill_count(&self, m: usize) -> Result<Self> {
        Instance::new(m, self.workers.clone())
    }

    /// Same workforce with a new class label per worker.
    pub fn with_classes(&self, classes: &[ClassLabel]) -> Result<Self> {
        if classes.len() != self.workers.len() {
            return Err(Error::Domain(format!(
                "{} class labels for {} workers",
                classes.len(),
                self.workers.len()
            )));
        }
        let mut out = self.clone();
        for (w, &c) in out.workers.iter_mut().zip(classes) {
            w.class = c;
        }
        Ok(out)
    }

    /// Task skills nobody in the workforce possesses.
    pub fn missing_skills(&self, task: &Task) -> Vec<SkillId> {
        task.skill_ids()
            .filter(|&s| self.pool(s).is_empty())
            .collect()
    }

    pub fn ensure_coverable(&self, task: &Task) -> Result<()> {
        let missing = self.missing_skills(task);
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::UncoverableTask {
                task: task.id,
                missing,
            })
        }
    }

    /// Number of workers in each class.
    pub fn class_counts(&self) -> Balance {
        let mut b = Balance::default();
        for w in &self.workers {
            b.add(w.class);
        }
        b
    }
}

/// A set of worker positions, kept sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Team {
    members: Vec<usize>,
}

impl Team {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Team { members }
    }

    pub fn empty() -> Self {
        Team::default()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, r: usize) -> bool {
        self.members.binary_search(&r).is_ok()
    }

    pub fn insert(&mut self, r: usize) -> bool {
        match self.members.binary_search(&r) {
            Ok(_) => false,
            Err(at) => {
                self.members.insert(at, r);
                true
            }
        }
    }

    fn check(&self, instance: &Instance) -> Result<()> {
        match self.members.last() {
            Some(&r) if r >= instance.len() => Err(Error::InvalidTeam(r)),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for Team {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Team::new(iter)
    }
}

/// Per-class member counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Balance {
    pub class1: usize,
    pub class2: usize,
}

impl Balance {
    pub fn add(&mut self, class: ClassLabel) {
        match class {
            ClassLabel::Class1 => self.class1 += 1,
            ClassLabel::Class2 => self.class2 += 1,
        }
    }

    pub fn get(&self, class: ClassLabel) -> usize {
        match class {
            ClassLabel::Class1 => self.class1,
            ClassLabel::Class2 => self.class2,
        }
    }

    pub fn is_fair(&self) -> bool {
        self.class1 == self.class2
    }

    /// The under-represented class and how many workers it lacks, if unbalanced.
    pub fn deficit(&self) -> Option<(ClassLabel, usize)> {
        use std::cmp::Ordering::*;
        match self.class1.cmp(&self.class2) {
            Less => Some((ClassLabel::Class1, self.class2 - self.class1)),
            Greater => Some((ClassLabel::Class2, self.class1 - self.class2)),
            Equal => None,
        }
    }

    pub fn total(&self) -> usize {
        self.class1 + self.class2
    }
}

pub fn covered_skills(team: &Team, instance: &Instance) -> Result<FixedBitSet> {
    team.check(instance)?;
    let mut covered = FixedBitSet::with_capacity(instance.skill_count());
    for &r in team.members() {
        covered.union_with(&instance.worker(r).skills);
    }
    Ok(covered)
}

pub fn covers(team: &Team, task: &Task, instance: &Instance) -> Result<bool> {
    let covered = covered_skills(team, instance)?;
    Ok(task.skills.is_subset(&covered))
}

pub fn team_cost(team: &Team, instance: &Instance) -> Result<f64> {
    team.check(instance)?;
    Ok(team.members().iter().map(|&r| instance.worker(r).cost).sum())
}

pub fn balance(team: &Team, instance: &Instance) -> Result<Balance> {
    team.check(instance)?;
    let mut b = Balance::default();
    for &r in team.members() {
        b.add(instance.worker(r).class);
    }
    Ok(b)
}

/// True iff `team` covers `task` with equal class counts.
pub fn is_fair_cover(team: &Team, task: &Task, instance: &Instance) -> Result<bool> {
    Ok(covers(team, task, instance)? && balance(team, instance)?.is_fair())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskCoverage {
    pub task: u64,
    pub coverable: bool,
    pub missing_skills: Vec<SkillId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub tasks: Vec<TaskCoverage>,
    pub class_counts: Balance,
}

impl ValidationReport {
    pub fn all_coverable(&self) -> bool {
        self.tasks.iter().all(|t| t.coverable)
    }
}

pub fn validate_instance(instance: &Instance, tasks: &[Task]) -> ValidationReport {
    let tasks = tasks
        .iter()
        .map(|t| {
            let missing_skills = instance.missing_skills(t);
            TaskCoverage {
                task: t.id,
                coverable: missing_skills.is_empty(),
                missing_skills,
            }
        })
        .collect();
    ValidationReport {
        tasks,
        class_counts: instance.class_counts(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use ClassLabel::{Class1 as A, Class2 as B};

    // w1:{s1,s2} A 1.0, w2:{s2} A 2.0, w3:{s1,s2,s3} B 5.0, w4:{s3} B 0.5
    fn sample() -> Instance {
        Instance::new(
            3,
            vec![
                Worker::new(1, 1.0, A, [0usize, 1]),
                Worker::new(2, 2.0, A, [1usize]),
                Worker::new(3, 5.0, B, [0usize, 1, 2]),
                Worker::new(4, 0.5, B, [2usize]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn union_of_member_skills() {
        let inst = sample();
        let got = covered_skills(&Team::new([0, 3]), &inst).unwrap();
        assert_eq!(got.ones().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(covered_skills(&Team::empty(), &inst).unwrap().is_clear());
        let single = covered_skills(&Team::new([2]), &inst).unwrap();
        assert_eq!(single.count_ones(..), 3);
    }

    #[test]
    fn cover_checks() {
        let inst = sample();
        let task = Task::new(0, [0usize, 1, 2]);
        assert!(covers(&Team::new([0, 3]), &task, &inst).unwrap());
        assert!(!covers(&Team::empty(), &task, &inst).unwrap());
        assert!(!covers(&Team::new([0]), &task, &inst).unwrap());
    }

    #[test]
    fn costs_and_balance() {
        let inst = sample();
        assert_eq!(team_cost(&Team::new([0, 3]), &inst).unwrap(), 1.5);
        assert_eq!(team_cost(&Team::empty(), &inst).unwrap(), 0.0);
        assert_eq!(team_cost(&Team::new([2, 0]), &inst).unwrap(), 6.0);

        let b = balance(&Team::new([0, 3]), &inst).unwrap();
        assert_eq!((b.class1, b.class2), (1, 1));
        assert!(b.is_fair());
        assert!(balance(&Team::empty(), &inst).unwrap().is_fair());
        let b = balance(&Team::new([0, 1, 2]), &inst).unwrap();
        assert_eq!((b.class1, b.class2), (2, 1));
        assert!(!b.is_fair());
        assert_eq!(b.deficit(), Some((B, 1)));
    }

    #[test]
    fn unknown_worker_is_rejected() {
        let inst = sample();
        let bad = Team::new([0, 9]);
        assert!(matches!(covered_skills(&bad, &inst), Err(Error::InvalidTeam(9))));
        assert!(matches!(team_cost(&bad, &inst), Err(Error::InvalidTeam(9))));
        assert!(matches!(balance(&bad, &inst), Err(Error::InvalidTeam(9))));
    }

    #[test]
    fn validation_flags_missing_skills() {
        let inst = Instance::new(
            4,
            vec![
                Worker::new(0, 1.0, A, [0usize]),
                Worker::new(1, 1.0, A, [1usize]),
            ],
        )
        .unwrap();
        let ok = Task::new(0, [0usize, 1]);
        let bad = Task::new(1, [1usize, 3]);
        let report = validate_instance(&inst, &[ok, bad]);
        assert!(report.tasks[0].coverable);
        assert!(!report.tasks[1].coverable);
        assert_eq!(report.tasks[1].missing_skills, vec![SkillId(3)]);
        assert_eq!(report.class_counts, Balance { class1: 2, class2: 0 });
        assert!(!report.all_coverable());
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            Instance::new(2, vec![Worker::new(1, 1.0, A, [0usize]), Worker::new(1, 1.0, B, [1usize])]),
            Err(Error::DuplicateWorkerId(1))
        ));
        assert!(Instance::new(2, vec![Worker::new(1, -1.0, A, [0usize])]).is_err());
        assert!(Instance::new(2, vec![Worker::new(1, 1.0, A, [5usize])]).is_err());
    }

    fn arb_instance() -> impl Strategy<Value = (Instance, Task, Team)> {
        (1usize..8, 1usize..10).prop_flat_map(|(m, n)| {
            let workers = proptest::collection::vec(
                (
                    0.0f64..10.0,
                    any::<bool>(),
                    proptest::collection::vec(0..m, 0..=m),
                ),
                n,
            );
            let task = proptest::collection::vec(0..m, 1..=m);
            let team = proptest::collection::vec(0..n, 0..=n);
            (Just(m), workers, task, team)
        })
        .prop_map(|(m, ws, task, team)| {
            let workers = ws
                .into_iter()
                .enumerate()
                .map(|(i, (c, a, s))| Worker::new(i as u64, c, if a { A } else { B }, s))
                .collect();
            (
                Instance::new(m, workers).unwrap(),
                Task::new(0, task),
                Team::new(team),
            )
        })
    }

    proptest! {
        #[test]
        fn cover_iff_no_uncovered_skill((inst, task, team) in arb_instance()) {
            let covered = covered_skills(&team, &inst).unwrap();
            let mut rest = task.skills.clone();
            rest.difference_with(&covered);
            prop_assert_eq!(covers(&team, &task, &inst).unwrap(), rest.is_clear());
        }

        #[test]
        fn cost_monotone_and_counts_sum((inst, _task, team) in arb_instance(), extra in 0usize..10) {
            let extra = extra % inst.len();
            let mut bigger = team.clone();
            bigger.insert(extra);
            prop_assert!(team_cost(&bigger, &inst).unwrap() >= team_cost(&team, &inst).unwrap());
            prop_assert_eq!(balance(&team, &inst).unwrap().total(), team.len());
        }

        #[test]
        fn pool_is_inverse_of_skill_sets((inst, _task, _team) in arb_instance()) {
            for s in 0..inst.skill_count() {
                for r in 0..inst.len() {
                    let in_pool = inst.pool(SkillId::from(s)).contains(&r);
                    prop_assert_eq!(in_pool, inst.worker(r).has_skill(SkillId::from(s)));
                }
            }
        }
    }
}
