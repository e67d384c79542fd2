//! Benchmark harness: solve every task under each class split with every
//! selected algorithm, attach lower bounds, and summarise cost-to-bound ratios.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fair::{round_solution, solve, Algorithm, SolveOptions, DEFAULT_MAX_RESTARTS};
use crate::greedy::{greedy_set_cover, trivial_lower_bound};
use crate::io::{random_class_assignment, Dataset};
use crate::lp::{build_fair_lp, solve_lp, SolveStatus};
use crate::model::{balance, Instance, Task, COST_EPS};
use crate::oracle::brute_force_fair_optimum;
use crate::rng::derive_seed;

pub const REPORT_HEADER: [&str; 11] = [
    "task_id",
    "fraction",
    "algorithm",
    "status",
    "cost",
    "team_size",
    "tlb",
    "lp_bound",
    "best_lb",
    "ratio",
    "seed",
];
pub const SUMMARY_HEADER: [&str; 5] = ["fraction", "series", "bin_lo", "bin_hi", "value"];

pub const BIN_WIDTH: f64 = 0.25;
pub const HIST_MIN: f64 = 1.0;
pub const HIST_MAX: f64 = 8.0;
/// Workforces up to this size are cross-checked against the exhaustive optimum.
pub const ORACLE_CHECK_MAX_WORKERS: usize = 15;
const BOUND_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    /// Class-1 fractions to relabel the workforce with; empty keeps the loaded labels.
    pub fractions: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
    pub max_restarts: u32,
    /// Worker threads for the task fan-out; 0 lets rayon decide.
    pub threads: usize,
    pub oracle_check: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            fractions: vec![0.10, 0.30, 0.50],
            algorithms: Algorithm::FAIR.to_vec(),
            seed: 0,
            max_restarts: DEFAULT_MAX_RESTARTS,
            threads: 0,
            oracle_check: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithm selected".into()));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return Err(Error::Config(format!("fraction {f} outside (0, 1)")));
        }
        if self.max_restarts == 0 {
            return Err(Error::Config("max_restarts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub task_id: u64,
    pub fraction: Option<f64>,
    pub algorithm: Algorithm,
    /// `ok`, `unfair` (greedy baseline only) or a failure token.
    pub status: String,
    pub cost: Option<f64>,
    pub team_size: Option<usize>,
    pub tlb: Option<f64>,
    pub lp_bound: Option<f64>,
    pub best_lb: Option<f64>,
    pub ratio: Option<f64>,
    pub seed: Option<u64>,
}

impl BenchRow {
    pub fn succeeded(&self) -> bool {
        self.cost.is_some()
    }

    fn fields(&self) -> [String; 11] {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map_or_else(String::new, |v| v.to_string())
        }
        [
            self.task_id.to_string(),
            opt(self.fraction),
            self.algorithm.name().to_owned(),
            self.status.clone(),
            opt(self.cost),
            opt(self.team_size),
            opt(self.tlb),
            opt(self.lp_bound),
            opt(self.best_lb),
            opt(self.ratio),
            opt(self.seed),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub fraction: Option<f64>,
    pub series: String,
    pub bin_lo: Option<f64>,
    pub bin_hi: Option<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Oracle cross-check failures, one message each (empty unless enabled).
    pub oracle_violations: Vec<String>,
    /// Tasks skipped by the oracle check because the workforce was too large.
    pub oracle_skipped: usize,
}

impl BenchReport {
    /// `(task, fraction)` groups in report order.
    fn groups(&self) -> Vec<&[BenchRow]> {
        self.rows
            .chunk_by(|a, b| a.task_id == b.task_id && a.fraction == b.fraction)
            .collect()
    }

    pub fn fractions(&self) -> Vec<Option<f64>> {
        let mut out: Vec<Option<f64>> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.fraction) {
                out.push(r.fraction);
            }
        }
        out
    }

    /// Ratios of successful rows for one algorithm (optionally one fraction).
    pub fn ratios(&self, algorithm: Algorithm, fraction: Option<Option<f64>>) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.algorithm == algorithm && fraction.is_none_or(|f| r.fraction == f))
            .filter_map(|r| r.ratio)
            .collect()
    }

    /// Per task, the cheapest fair result over its bound.
    pub fn best_ratios(&self, fraction: Option<Option<f64>>) -> Vec<f64> {
        self.groups()
            .into_iter()
            .filter(|g| fraction.is_none_or(|f| g[0].fraction == f))
            .filter_map(|g| {
                let best = g
                    .iter()
                    .filter(|r| r.algorithm.is_fair() && r.succeeded())
                    .filter_map(|r| r.cost)
                    .min_by(f64::total_cmp)?;
                let lb = g[0].best_lb?;
                (lb > 0.0).then(|| best / lb)
            })
            .collect()
    }

    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| !r.succeeded())
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut out = Vec::new();
        let algorithms: Vec<Algorithm> = {
            let mut a: Vec<Algorithm> = self.rows.iter().map(|r| r.algorithm).collect();
            a.sort();
            a.dedup();
            a
        };
        let has_fair = algorithms.iter().any(|a| a.is_fair());
        for fraction in self.fractions() {
            let mut series: Vec<(String, Vec<f64>)> = algorithms
                .iter()
                .map(|&a| (a.name().to_owned(), self.ratios(a, Some(fraction))))
                .collect();
            if has_fair {
                series.push(("best".to_owned(), self.best_ratios(Some(fraction))));
            }
            for (name, ratios) in series {
                for (lo, hi, count) in histogram(&ratios) {
                    out.push(SummaryRow {
                        fraction,
                        series: name.clone(),
                        bin_lo: Some(lo),
                        bin_hi: Some(hi),
                        value: count as f64,
                    });
                }
            }
            if let Ok(rate) = match_rate(self.groups().into_iter().filter(|g| g[0].fraction == fraction)) {
                out.push(SummaryRow {
                    fraction,
                    series: "rounding_match_rate".to_owned(),
                    bin_lo: None,
                    bin_hi: None,
                    value: rate,
                });
            }
        }
        out
    }
}

/// Fixed-width bins over `[1, 8)` plus an overflow bin `[8, inf)`. Ratios a hair
/// below 1 (bound round-off) land in the first bin.
pub fn histogram(ratios: &[f64]) -> Vec<(f64, f64, usize)> {
    let nbins = ((HIST_MAX - HIST_MIN) / BIN_WIDTH).round() as usize;
    let mut counts = vec![0usize; nbins + 1];
    for &r in ratios {
        let i = ((r - HIST_MIN) / BIN_WIDTH).floor();
        let i = if i < 0.0 { 0 } else { (i as usize).min(nbins) };
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let lo = HIST_MIN + i as f64 * BIN_WIDTH;
            let hi = if i == nbins { f64::INFINITY } else { lo + BIN_WIDTH };
            (lo, hi, c)
        })
        .collect()
}

fn match_rate<'a>(groups: impl Iterator<Item = &'a [BenchRow]>) -> Result<f64> {
    let mut total = 0usize;
    let mut matched = 0usize;
    let mut saw_rounding = false;
    let mut saw_other = false;
    for g in groups {
        let rounding = g.iter().find(|r| r.algorithm == Algorithm::Rounding);
        let others: Vec<&BenchRow> = g
            .iter()
            .filter(|r| r.algorithm.is_fair() && r.algorithm != Algorithm::Rounding)
            .collect();
        saw_rounding |= rounding.is_some();
        saw_other |= !others.is_empty();
        let Some(rounding) = rounding else { continue };
        if others.is_empty() {
            continue;
        }
        total += 1;
        let best_other = others.iter().filter_map(|r| r.cost).min_by(f64::total_cmp);
        match (rounding.cost, best_other) {
            (Some(c), Some(o)) if c <= o + COST_EPS => matched += 1,
            (Some(_), None) => matched += 1,
            _ => {}
        }
    }
    if !saw_rounding {
        return Err(Error::MissingAlgorithm("rounding".into()));
    }
    if !saw_other {
        return Err(Error::MissingAlgorithm("padding|alternating|pairs".into()));
    }
    Ok(if total == 0 { 0.0 } else { matched as f64 / total as f64 })
}

/// Share of tasks where rounding is at least as cheap as every other fair solver.
pub fn rounding_match_rate(report: &BenchReport) -> Result<f64> {
    match_rate(report.groups().into_iter())
}

struct TaskOutcome {
    rows: Vec<BenchRow>,
    violations: Vec<String>,
    oracle_skipped: bool,
}

fn bench_task(
    instance: &Instance,
    task: &Task,
    fraction: Option<f64>,
    config: &BenchConfig,
) -> TaskOutcome {
    let row = |algorithm: Algorithm, status: &str| BenchRow {
        task_id: task.id,
        fraction,
        algorithm,
        status: status.to_owned(),
        cost: None,
        team_size: None,
        tlb: None,
        lp_bound: None,
        best_lb: None,
        ratio: None,
        seed: None,
    };

    let greedy = match greedy_set_cover(instance, task) {
        Ok(g) => g,
        Err(e) => {
            return TaskOutcome {
                rows: config.algorithms.iter().map(|&a| row(a, e.status_token())).collect(),
                violations: Vec::new(),
                oracle_skipped: false,
            }
        }
    };
    let tlb = trivial_lower_bound(greedy.cost, instance.len()).ok();
    let lp = build_fair_lp(instance, task).and_then(|m| solve_lp(&m));
    let lp_bound = match &lp {
        Ok(s) if s.status == SolveStatus::Optimal => Some(s.objective_value),
        _ => None,
    };
    let best_lb = match (tlb, lp_bound) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    let rounding_seed = derive_seed(config.seed, task.id);

    let mut rows = Vec::with_capacity(config.algorithms.len());
    for &algorithm in &config.algorithms {
        let result = match algorithm {
            Algorithm::Rounding => match &lp {
                Ok(s) => match s.status {
                    SolveStatus::Optimal => {
                        round_solution(instance, task, s, rounding_seed, config.max_restarts)
                    }
                    SolveStatus::Infeasible => Err(Error::LpInfeasible),
                    SolveStatus::IterationLimit => Err(Error::LpIterationLimit),
                },
                Err(_) => Err(Error::LpInfeasible),
            },
            other => solve(
                instance,
                task,
                other,
                &SolveOptions {
                    seed: rounding_seed,
                    max_restarts: config.max_restarts,
                },
            ),
        };
        let mut r = row(algorithm, "ok");
        r.tlb = tlb;
        r.lp_bound = lp_bound;
        r.best_lb = if algorithm.is_fair() { best_lb } else { tlb };
        if algorithm == Algorithm::Rounding {
            r.seed = Some(rounding_seed);
        }
        match result {
            Ok(res) => {
                if !algorithm.is_fair()
                    && !balance(&res.team, instance).map(|b| b.is_fair()).unwrap_or(false)
                {
                    r.status = "unfair".to_owned();
                }
                r.cost = Some(res.cost);
                r.team_size = Some(res.team.len());
                r.ratio = r.best_lb.filter(|&lb| lb > 0.0).map(|lb| res.cost / lb);
            }
            Err(e) => r.status = e.status_token().to_owned(),
        }
        rows.push(r);
    }

    let mut violations = Vec::new();
    let mut oracle_skipped = false;
    if config.oracle_check {
        if instance.len() <= ORACLE_CHECK_MAX_WORKERS {
            check_against_oracle(instance, task, &rows, &mut violations);
        } else {
            oracle_skipped = true;
        }
    }
    TaskOutcome {
        rows,
        violations,
        oracle_skipped,
    }
}

fn check_against_oracle(instance: &Instance, task: &Task, rows: &[BenchRow], out: &mut Vec<String>) {
    let Ok(oracle) = brute_force_fair_optimum(instance, task, ORACLE_CHECK_MAX_WORKERS) else {
        return;
    };
    let tag = |r: &BenchRow| format!("task {} fraction {:?} {}", r.task_id, r.fraction, r.algorithm);
    match oracle.optimum {
        Some((_, opt)) => {
            for r in rows.iter().filter(|r| r.algorithm.is_fair()) {
                if let Some(c) = r.cost {
                    if c < opt - BOUND_TOL {
                        out.push(format!("{}: cost {c} below fair optimum {opt}", tag(r)));
                    }
                }
                if let Some(lb) = r.lp_bound {
                    if lb > opt + BOUND_TOL {
                        out.push(format!("{}: LP bound {lb} above fair optimum {opt}", tag(r)));
                    }
                }
            }
        }
        None => {
            for r in rows.iter().filter(|r| r.algorithm.is_fair() && r.succeeded()) {
                out.push(format!("{}: returned a team but no fair cover exists", tag(r)));
            }
        }
    }
}

pub fn run_benchmark(dataset: &Dataset, config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let splits: Vec<(Option<f64>, Instance)> = if config.fractions.is_empty() {
        vec![(None, dataset.instance.clone())]
    } else {
        config
            .fractions
            .iter()
            .map(|&f| {
                let seed = derive_seed(config.seed, f.to_bits());
                Ok((Some(f), random_class_assignment(&dataset.instance, f, seed)?))
            })
            .collect::<Result<_>>()?
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut report = BenchReport::default();
    for (fraction, instance) in &splits {
        let outcomes: Vec<TaskOutcome> = pool.install(|| {
            dataset
                .tasks
                .par_iter()
                .map(|t| bench_task(instance, t, *fraction, config))
                .collect()
        });
        for o in outcomes {
            report.rows.extend(o.rows);
            report.oracle_violations.extend(o.violations);
            report.oracle_skipped += usize::from(o.oracle_skipped);
        }
    }
    Ok(report)
}

/// `report.csv` → `report.summary.csv`; extension-less paths get the suffix appended.
pub fn summary_path(path: &Path) -> PathBuf {
    match path.extension() {
        Some(_) => path.with_extension("summary.csv"),
        None => {
            let mut s = path.as_os_str().to_owned();
            s.push(".summary.csv");
            PathBuf::from(s)
        }
    }
}

pub fn write_rows<W: Write>(writer: W, report: &BenchReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_HEADER)?;
    for r in &report.rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(writer: W, report: &BenchReport) -> Result<()> {
    fn opt(v: Option<f64>) -> String {
        v.map_or_else(String::new, |v| v.to_string())
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for s in report.summary() {
        w.write_record([
            opt(s.fraction),
            s.series,
            opt(s.bin_lo),
            opt(s.bin_hi),
            s.value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the rows CSV to `path` and the histogram summary next to it.
pub fn emit_report(report: &BenchReport, path: &Path) -> Result<PathBuf> {
    write_rows(File::create(path)?, report)?;
    let summary = summary_path(path);
    write_summary(File::create(&summary)?, report)?;
    Ok(summary)
}
