//! Workforce and task files, class relabelling, and instance generators.
//!
//! File formats (UTF-8 CSV):
//!
//! ```text
//! worker_id,cost,class,skills
//! 7,2.5,class2,video editing;project management
//!
//! task_id,skills
//! 0,video editing;copywriting
//! ```
//!
//! Skill names are interned per file in sorted order; names first seen in a
//! tasks file are appended after the workforce's skills.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{ClassLabel, Instance, SkillId, Task, Worker};
use crate::rng::rng_for;

pub const WORKERS_HEADER: [&str; 4] = ["worker_id", "cost", "class", "skills"];
pub const TASKS_HEADER: [&str; 2] = ["task_id", "skills"];

/// Environment variable naming the default directory for `workers.csv` / `tasks.csv`.
pub const DATA_DIR_ENV: &str = "FTF_DATA_DIR";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SkillVocabulary {
    names: Vec<String>,
    index: HashMap<String, SkillId>,
}

impl SkillVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I: IntoIterator<Item = String>>(names: I) -> Result<Self> {
        let mut vocab = Self::new();
        for name in names {
            if vocab.index.contains_key(&name) {
                return Err(Error::Domain(format!("duplicate skill name `{name}`")));
            }
            vocab.push(name);
        }
        Ok(vocab)
    }

    fn push(&mut self, name: String) -> SkillId {
        let id = SkillId::from(self.names.len());
        self.index.insert(name.clone(), id);
        self.names.push(name);
        id
    }

    /// Interns the names not yet known, in sorted order.
    fn extend_sorted<'a, I: IntoIterator<Item = &'a str>>(&mut self, names: I) {
        let fresh: BTreeSet<&str> = names
            .into_iter()
            .filter(|n| !self.index.contains_key(*n))
            .collect();
        for name in fresh {
            self.push(name.to_owned());
        }
    }

    pub fn get(&self, name: &str) -> Option<SkillId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: SkillId) -> Option<&str> {
        self.names.get(id.index()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// A workforce, its tasks, and the skill names behind the dense ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub instance: Instance,
    pub tasks: Vec<Task>,
    pub vocabulary: SkillVocabulary,
}

fn split_skills(field: &str) -> impl Iterator<Item = &str> {
    field.split(';').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        msg: msg.into(),
    }
}

struct Rows {
    path: PathBuf,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn read_rows<R: Read>(reader: R, path: &Path, header: &[&str]) -> Result<Rows> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let found = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(parse_err(
            path,
            1,
            format!("expected header `{}`", header.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    Ok(Rows {
        path: path.to_owned(),
        rows,
    })
}

pub fn read_workers<R: Read>(
    reader: R,
    path: &Path,
    vocab: &mut SkillVocabulary,
) -> Result<Instance> {
    let Rows { path, rows } = read_rows(reader, path, &WORKERS_HEADER)?;
    vocab.extend_sorted(rows.iter().flat_map(|(_, r)| split_skills(&r[3])));

    let mut workers = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        let line = *line;
        let id: u64 = rec[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(&path, line, format!("bad worker id `{}`", &rec[0])))?;
        let cost: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(&path, line, format!("bad cost `{}`", &rec[1])))?;
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(parse_err(&path, line, format!("cost must be >= 0, got {cost}")));
        }
        let class = match rec[2].trim() {
            "class1" => ClassLabel::Class1,
            "class2" => ClassLabel::Class2,
            other => {
                return Err(Error::UnknownClassLabel {
                    path: path.clone(),
                    line,
                    label: other.to_owned(),
                })
            }
        };
        let skills = split_skills(&rec[3]).map(|s| vocab.get(s).expect("interned above"));
        workers.push(Worker::new(id, cost, class, skills));
    }
    Instance::new(vocab.len(), workers)
}

pub fn read_tasks<R: Read>(reader: R, path: &Path, vocab: &mut SkillVocabulary) -> Result<Vec<Task>> {
    let Rows { path, rows } = read_rows(reader, path, &TASKS_HEADER)?;
    vocab.extend_sorted(rows.iter().flat_map(|(_, r)| split_skills(&r[1])));
    let mut tasks = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        let id: u64 = rec[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(&path, *line, format!("bad task id `{}`", &rec[0])))?;
        let task = Task::new(id, split_skills(&rec[1]).map(|s| vocab.get(s).expect("interned above")));
        if task.is_empty() {
            return Err(parse_err(&path, *line, "task requires no skills"));
        }
        tasks.push(task);
    }
    Ok(tasks)
}

pub fn load_workers(path: &Path, vocab: &mut SkillVocabulary) -> Result<Instance> {
    read_workers(File::open(path)?, path, vocab)
}

pub fn load_tasks(path: &Path, vocab: &mut SkillVocabulary) -> Result<Vec<Task>> {
    read_tasks(File::open(path)?, path, vocab)
}

/// Loads both files with a shared vocabulary. Skills required by tasks but held
/// by nobody extend the universe with empty pools.
pub fn load_dataset(workers: &Path, tasks: &Path) -> Result<Dataset> {
    let mut vocabulary = SkillVocabulary::new();
    let instance = load_workers(workers, &mut vocabulary)?;
    let tasks = load_tasks(tasks, &mut vocabulary)?;
    let instance = if instance.skill_count() == vocabulary.len() {
        instance
    } else {
        instance.with_skill_count(vocabulary.len())?
    };
    Ok(Dataset {
        instance,
        tasks,
        vocabulary,
    })
}

fn skill_field(ids: impl Iterator<Item = SkillId>, vocab: &SkillVocabulary) -> Result<String> {
    let mut names = Vec::new();
    for id in ids {
        let name = vocab
            .name(id)
            .ok_or_else(|| Error::Domain(format!("skill {id} has no name")))?;
        if name.contains(';') || name.trim() != name || name.is_empty() {
            return Err(Error::Domain(format!("skill name `{name}` cannot be written")));
        }
        names.push(name);
    }
    Ok(names.join(";"))
}

pub fn write_workers<W: Write>(writer: W, instance: &Instance, vocab: &SkillVocabulary) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(WORKERS_HEADER)?;
    for worker in instance.workers() {
        w.write_record([
            worker.id.to_string(),
            worker.cost.to_string(),
            worker.class.as_str().to_owned(),
            skill_field(worker.skill_ids(), vocab)?,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tasks<W: Write>(writer: W, tasks: &[Task], vocab: &SkillVocabulary) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TASKS_HEADER)?;
    for task in tasks {
        w.write_record([task.id.to_string(), skill_field(task.skill_ids(), vocab)?])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset(dataset: &Dataset, workers: &Path, tasks: &Path) -> Result<()> {
    write_workers(File::create(workers)?, &dataset.instance, &dataset.vocabulary)?;
    write_tasks(File::create(tasks)?, &dataset.tasks, &dataset.vocabulary)?;
    Ok(())
}

/// Relabels exactly `round(fraction · n)` workers, chosen by a seeded shuffle,
/// as class 1 and the rest as class 2.
pub fn random_class_assignment(instance: &Instance, class1_fraction: f64, seed: u64) -> Result<Instance> {
    if !(class1_fraction > 0.0 && class1_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "class-1 fraction must lie in (0, 1), got {class1_fraction}"
        )));
    }
    let n = instance.len();
    let k = (class1_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, 0xC1A5));
    let mut classes = vec![ClassLabel::Class2; n];
    for &r in &order[..k] {
        classes[r] = ClassLabel::Class1;
    }
    instance.with_classes(&classes)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub n_workers: usize,
    pub n_skills: usize,
    pub n_tasks: usize,
    pub skills_per_worker_mean: f64,
    pub skills_per_task_mean: f64,
    /// Largest skill-set size for workers and tasks.
    pub max_skills: usize,
    pub cost_min: f64,
    pub cost_max: f64,
    pub class1_fraction: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_workers: 1211,
            n_skills: 175,
            n_tasks: 600,
            skills_per_worker_mean: 1.45,
            skills_per_task_mean: 2.86,
            max_skills: 6,
            cost_min: 10.0,
            cost_max: 100.0,
            class1_fraction: 0.5,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Domain(msg.to_owned()));
        if self.n_workers == 0 || self.n_skills == 0 {
            return bad("worker and skill counts must be positive");
        }
        if !(self.skills_per_worker_mean >= 1.0 && self.skills_per_task_mean >= 1.0) {
            return bad("skill-set size means must be at least 1");
        }
        let cap = self.max_skills.min(self.n_skills) as f64;
        if self.skills_per_worker_mean > cap || self.skills_per_task_mean > cap {
            return bad("skill-set size mean exceeds the maximum set size");
        }
        if !(self.cost_min.is_finite() && self.cost_max.is_finite())
            || self.cost_min < 0.0
            || self.cost_min > self.cost_max
        {
            return bad("need 0 <= cost_min <= cost_max");
        }
        if !(self.class1_fraction > 0.0 && self.class1_fraction < 1.0) {
            return bad("class-1 fraction must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Poisson(λ) conditioned on `lo ≤ X ≤ hi`, with λ chosen so the conditional
/// mean equals `mean`.
#[derive(Clone, Debug)]
pub struct TruncatedPoisson {
    lo: usize,
    weights: Vec<f64>,
    dist: WeightedIndex<f64>,
}

impl TruncatedPoisson {
    pub fn with_mean(mean: f64, lo: usize, hi: usize) -> Result<Self> {
        if !(lo as f64 <= mean && mean <= hi as f64) {
            return Err(Error::Domain(format!("mean {mean} outside [{lo}, {hi}]")));
        }
        let weights_for = |lambda: f64| -> Vec<f64> {
            // Unnormalised pmf, computed in log space.
            let mut log_fact = 0.0;
            let mut out = Vec::with_capacity(hi - lo + 1);
            for k in 0..=hi {
                if k > 0 {
                    log_fact += (k as f64).ln();
                }
                if k >= lo {
                    out.push((k as f64 * lambda.ln() - log_fact).exp());
                }
            }
            out
        };
        let mean_for = |w: &[f64]| {
            let total: f64 = w.iter().sum();
            w.iter().enumerate().map(|(i, p)| (lo + i) as f64 * p).sum::<f64>() / total
        };
        let width = hi - lo + 1;
        let point = |at: usize| (0..width).map(|i| if i == at { 1.0 } else { 0.0 }).collect();
        let weights = if mean <= lo as f64 {
            point(0)
        } else if mean >= hi as f64 {
            point(width - 1)
        } else {
            // The conditional mean increases with λ.
            let (mut a, mut b) = (1e-9_f64, 1e3_f64);
            for _ in 0..200 {
                let mid = (a * b).sqrt();
                if mean_for(&weights_for(mid)) < mean {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            weights_for((a * b).sqrt())
        };
        let dist = WeightedIndex::new(weights.clone())
            .map_err(|e| Error::Domain(format!("bad size distribution: {e}")))?;
        Ok(TruncatedPoisson { lo, weights, dist })
    }

    pub fn mean(&self) -> f64 {
        let total: f64 = self.weights.iter().sum();
        self.weights
            .iter()
            .enumerate()
            .map(|(i, p)| (self.lo + i) as f64 * p)
            .sum::<f64>()
            / total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.lo + self.dist.sample(rng)
    }
}

fn skill_names(m: usize) -> SkillVocabulary {
    let width = (m.max(2) - 1).to_string().len();
    SkillVocabulary::from_names((0..m).map(|i| format!("skill_{i:0width$}")))
        .expect("generated names are distinct")
}

/// Synthetic marketplace: Poisson-sized skill sets over uniformly drawn skills,
/// uniform costs, and a random class split. Task skills nobody holds are
/// redrawn so every task is coverable.
pub fn gen_random_instance(params: &GenParams) -> Result<Dataset> {
    params.validate()?;
    let m = params.n_skills;
    let cap = params.max_skills.min(m);
    let worker_sizes = TruncatedPoisson::with_mean(params.skills_per_worker_mean, 0, cap)?;
    let task_sizes = TruncatedPoisson::with_mean(params.skills_per_task_mean, 1, cap)?;

    let mut rng = rng_for(params.seed, 1);
    let mut workers = Vec::with_capacity(params.n_workers);
    for id in 0..params.n_workers {
        let k = worker_sizes.sample(&mut rng);
        let skills = index::sample(&mut rng, m, k).into_vec();
        let cost = if params.cost_min == params.cost_max {
            params.cost_min
        } else {
            rng.random_range(params.cost_min..=params.cost_max)
        };
        workers.push(Worker::new(id as u64, cost, ClassLabel::Class2, skills));
    }
    let instance = Instance::new(m, workers)?;

    let pooled: Vec<usize> = (0..m)
        .filter(|&s| !instance.pool(SkillId::from(s)).is_empty())
        .collect();
    if pooled.is_empty() && params.n_tasks > 0 {
        return Err(Error::Domain("no worker holds any skill; tasks cannot be covered".into()));
    }
    let mut tasks = Vec::with_capacity(params.n_tasks);
    for id in 0..params.n_tasks {
        let k = task_sizes.sample(&mut rng).min(pooled.len());
        let mut skills: BTreeSet<usize> = index::sample(&mut rng, m, k).into_iter().collect();
        let uncovered: Vec<usize> = skills
            .iter()
            .copied()
            .filter(|&s| instance.pool(SkillId::from(s)).is_empty())
            .collect();
        for s in uncovered {
            skills.remove(&s);
            loop {
                let pick = pooled[rng.random_range(0..pooled.len())];
                if skills.insert(pick) {
                    break;
                }
            }
        }
        tasks.push(Task::new(id as u64, skills));
    }

    let instance = random_class_assignment(&instance, params.class1_fraction, params.seed)?;
    Ok(Dataset {
        instance,
        tasks,
        vocabulary: skill_names(m),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GadgetSpec {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub k_blue: usize,
    pub red_cost: f64,
    pub blue_cost: f64,
}

/// Vertex cover as fair cover: one skill per edge, one class-1 worker per vertex
/// holding its incident edges, and `k_blue` skill-less class-2 workers. The task
/// (all edges) has a fair cover iff the graph has a vertex cover of size at most
/// `k_blue`.
pub fn gen_hardness_gadget(spec: &GadgetSpec) -> Result<(Instance, Task)> {
    for &(u, v) in &spec.edges {
        if u >= spec.vertices || v >= spec.vertices {
            return Err(Error::Domain(format!("edge ({u}, {v}) references a missing vertex")));
        }
        if u == v {
            return Err(Error::Domain(format!("self-loop at vertex {u}")));
        }
    }
    for c in [spec.red_cost, spec.blue_cost] {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Domain(format!("invalid gadget cost {c}")));
        }
    }
    let mut incident = vec![Vec::new(); spec.vertices];
    for (e, &(u, v)) in spec.edges.iter().enumerate() {
        incident[u].push(e);
        incident[v].push(e);
    }
    let mut workers: Vec<Worker> = incident
        .into_iter()
        .enumerate()
        .map(|(v, edges)| Worker::new(v as u64, spec.red_cost, ClassLabel::Class1, edges))
        .collect();
    workers.extend((0..spec.k_blue).map(|b| {
        Worker::new(
            (spec.vertices + b) as u64,
            spec.blue_cost,
            ClassLabel::Class2,
            std::iter::empty::<usize>(),
        )
    }));
    let instance = Instance::new(spec.edges.len(), workers)?;
    Ok((instance, Task::new(0, 0..spec.edges.len())))
}

/// Parses `0-1,1-2` style edge lists.
pub fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|e| {
            let (a, b) = e
                .split_once('-')
                .ok_or_else(|| Error::Config(format!("edge `{e}` is not of the form u-v")))?;
            let p = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad vertex `{s}` in edge `{e}`")))
            };
            Ok((p(a)?, p(b)?))
        })
        .collect()
}
