use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use ftf_core::harness::ORACLE_CHECK_MAX_WORKERS;
use ftf_core::io::{self as fio, parse_edges, DATA_DIR_ENV};
use ftf_core::*;

const WORKERS_FILE: &str = "workers.csv";
const TASKS_FILE: &str = "tasks.csv";

#[derive(Parser)]
#[command(name = "ftf", version, about = "Fair team formation solvers and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve tasks with one or more algorithms and print the teams.
    Solve(SolveArgs),
    /// Run every algorithm on every task for each class split; write report CSVs.
    Bench(BenchArgs),
    /// Greedy-derived and LP lower bounds per task.
    Lb(LbArgs),
    /// Generate a synthetic workforce and task list.
    Gen(GenArgs),
    /// Write the vertex-cover gadget instance for a graph.
    Gadget(GadgetArgs),
    /// Exact optimum by exhaustive search (small workforces only).
    Oracle(OracleArgs),
    /// Check a dataset: class counts and task coverability.
    Verify(DataArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Workers CSV [default: $FTF_DATA_DIR/workers.csv]
    #[arg(long)]
    workers: Option<PathBuf>,
    /// Tasks CSV [default: $FTF_DATA_DIR/tasks.csv]
    #[arg(long)]
    tasks: Option<PathBuf>,
}

impl DataArgs {
    fn resolve(&self) -> anyhow::Result<(PathBuf, PathBuf)> {
        let dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
        let pick = |given: &Option<PathBuf>, file: &str, flag: &str| match (given, &dir) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(d)) => Ok(d.join(file)),
            (None, None) => Err(anyhow::anyhow!("--{flag} not given and {DATA_DIR_ENV} is unset")),
        };
        Ok((pick(&self.workers, WORKERS_FILE, "workers")?, pick(&self.tasks, TASKS_FILE, "tasks")?))
    }

    fn load(&self) -> anyhow::Result<Dataset> {
        let (w, t) = self.resolve()?;
        Ok(fio::load_dataset(&w, &t)?)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Algorithm(s) to run; repeat or comma-separate.
    #[arg(long, value_delimiter = ',', default_value = "padding,alternating,pairs,rounding")]
    algorithm: Vec<Algorithm>,
    /// Only this task.
    #[arg(long)]
    task_id: Option<u64>,
    /// Relabel a random share of workers as class1 first.
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = fair::DEFAULT_MAX_RESTARTS)]
    max_restarts: u32,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also compare every team with the exhaustive optimum (n ≤ 15).
    #[arg(long)]
    oracle_check: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Generate the dataset with default generator settings instead of loading one.
    #[arg(long, conflicts_with_all = ["workers", "tasks"])]
    generate: bool,
    #[arg(long, value_delimiter = ',', default_value = "padding,alternating,pairs,rounding")]
    algorithm: Vec<Algorithm>,
    /// Class-1 fractions; repeat or comma-separate.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5")]
    fraction: Vec<f64>,
    /// Use the class labels from the file instead of random splits.
    #[arg(long, conflicts_with = "fraction")]
    keep_labels: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = fair::DEFAULT_MAX_RESTARTS)]
    max_restarts: u32,
    /// Report CSV; the histogram summary goes next to it as `<stem>.summary.csv`.
    #[arg(long, default_value = "report.csv")]
    out: PathBuf,
    /// Task-level worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    oracle_check: bool,
}

#[derive(Args)]
struct LbArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    task_id: Option<u64>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write each task's LP as a plain-text listing `task_<id>.lp` into this directory.
    #[arg(long)]
    lp_listing: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1211)]
    n_workers: usize,
    #[arg(long, default_value_t = 175)]
    n_skills: usize,
    #[arg(long, default_value_t = 600)]
    n_tasks: usize,
    #[arg(long, default_value_t = 1.45)]
    worker_skills_mean: f64,
    #[arg(long, default_value_t = 2.86)]
    task_skills_mean: f64,
    #[arg(long, default_value_t = 6)]
    max_skills: usize,
    #[arg(long, default_value_t = 10.0)]
    cost_min: f64,
    #[arg(long, default_value_t = 100.0)]
    cost_max: f64,
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory [default: $FTF_DATA_DIR]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GadgetArgs {
    #[arg(long)]
    vertices: usize,
    /// Edge list such as `0-1,1-2,0-2`.
    #[arg(long, default_value = "")]
    edges: String,
    /// Number of skill-less class-2 workers.
    #[arg(long)]
    k_blue: usize,
    #[arg(long, default_value_t = 1.0)]
    red_cost: f64,
    #[arg(long, default_value_t = 1.0)]
    blue_cost: f64,
    /// Output directory [default: $FTF_DATA_DIR]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    task_id: Option<u64>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse workforces larger than this.
    #[arg(long, default_value_t = oracle::DEFAULT_LIMIT)]
    limit: usize,
    /// Drop the fairness constraint.
    #[arg(long)]
    unfair: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure that should exit with a code other than 1.
#[derive(Debug)]
struct AllTasksFailed;

impl std::fmt::Display for AllTasksFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("every task failed")
    }
}

impl std::error::Error for AllTasksFailed {}

fn main() -> ExitCode {
    // Usage errors are configuration errors (1); clap would exit with 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Lb(a) => cmd_lb(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Gadget(a) => cmd_gadget(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<AllTasksFailed>() => {
            eprintln!("ftf: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("ftf: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn out_dir(given: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    let dir = match given {
        Some(d) => d,
        None => std::env::var_os(DATA_DIR_ENV)
            .map(PathBuf::from)
            .with_context(|| format!("--out not given and {DATA_DIR_ENV} is unset"))?,
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Loads the dataset, optionally relabels classes, and narrows to one task.
fn prepare(
    data: &DataArgs,
    fraction: Option<f64>,
    seed: u64,
    task_id: Option<u64>,
) -> anyhow::Result<(Instance, Vec<Task>)> {
    let ds = data.load()?;
    let instance = match fraction {
        Some(f) => fio::random_class_assignment(&ds.instance, f, seed)?,
        None => ds.instance,
    };
    let tasks = match task_id {
        Some(id) => {
            let t: Vec<Task> = ds.tasks.into_iter().filter(|t| t.id == id).collect();
            if t.is_empty() {
                bail!("no task with id {id}");
            }
            t
        }
        None => ds.tasks,
    };
    Ok((instance, tasks))
}

fn team_labels(team: &Team, instance: &Instance) -> String {
    team.members()
        .iter()
        .map(|&r| instance.worker(r).id.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn cmd_solve(a: SolveArgs) -> anyhow::Result<()> {
    let (instance, tasks) = prepare(&a.data, a.fraction, a.seed, a.task_id)?;
    let opts = SolveOptions { seed: a.seed, max_restarts: a.max_restarts };
    let mut out = csv::Writer::from_writer(output(&a.out)?);
    out.write_record(["task_id", "algorithm", "status", "cost", "team_size", "team"])?;
    let mut succeeded = 0;
    let mut oracle_failures = Vec::new();
    for task in &tasks {
        let fair_opt = if a.oracle_check && instance.len() <= ORACLE_CHECK_MAX_WORKERS {
            brute_force_fair_optimum(&instance, task, ORACLE_CHECK_MAX_WORKERS)
                .ok()
                .map(|o| o.optimum.map(|(_, c)| c))
        } else {
            None
        };
        for &alg in &a.algorithm {
            match solve(&instance, task, alg, &opts) {
                Ok(res) => {
                    succeeded += 1;
                    let fair = balance(&res.team, &instance)?.is_fair();
                    let status = if alg.is_fair() || fair { "ok" } else { "unfair" };
                    if alg.is_fair() {
                        match fair_opt {
                            Some(Some(opt)) if res.cost < opt - 1e-6 => oracle_failures
                                .push(format!("task {} {alg}: cost {} below optimum {opt}", task.id, res.cost)),
                            Some(None) => oracle_failures
                                .push(format!("task {} {alg}: team returned but no fair cover exists", task.id)),
                            _ => {}
                        }
                    }
                    out.write_record([
                        task.id.to_string(),
                        alg.to_string(),
                        status.to_owned(),
                        res.cost.to_string(),
                        res.team.len().to_string(),
                        team_labels(&res.team, &instance),
                    ])?;
                }
                Err(e) => out.write_record([
                    task.id.to_string(),
                    alg.to_string(),
                    e.status_token().to_owned(),
                    String::new(),
                    String::new(),
                    String::new(),
                ])?,
            }
        }
    }
    out.flush()?;
    if a.oracle_check && instance.len() > ORACLE_CHECK_MAX_WORKERS {
        eprintln!("oracle check skipped: {} workers > {ORACLE_CHECK_MAX_WORKERS}", instance.len());
    }
    if !oracle_failures.is_empty() {
        for v in &oracle_failures {
            eprintln!("oracle check: {v}");
        }
        bail!("{} oracle check violation(s)", oracle_failures.len());
    }
    if succeeded == 0 && !tasks.is_empty() {
        return Err(AllTasksFailed.into());
    }
    Ok(())
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn cmd_bench(a: BenchArgs) -> anyhow::Result<()> {
    let dataset = if a.generate {
        fio::gen_random_instance(&GenParams { seed: a.seed, ..GenParams::default() })?
    } else {
        a.data.load()?
    };
    let config = BenchConfig {
        fractions: if a.keep_labels { Vec::new() } else { a.fraction },
        algorithms: a.algorithm,
        seed: a.seed,
        max_restarts: a.max_restarts,
        threads: a.threads,
        oracle_check: a.oracle_check,
    };
    let report = run_benchmark(&dataset, &config)?;
    let summary = emit_report(&report, &a.out)?;

    let algorithms: Vec<Algorithm> = {
        let mut v = config.algorithms.clone();
        v.sort();
        v.dedup();
        v
    };
    for f in report.fractions() {
        let label = f.map_or_else(|| "file labels".to_owned(), |f| format!("fraction {f}"));
        let mut parts: Vec<String> = algorithms
            .iter()
            .filter_map(|&alg| {
                median(report.ratios(alg, Some(f))).map(|m| format!("{alg} {m:.3}"))
            })
            .collect();
        if let Some(m) = median(report.best_ratios(Some(f))) {
            parts.push(format!("best {m:.3}"));
        }
        eprintln!("{label}: median ratio {}", parts.join(", "));
    }
    if let Ok(rate) = rounding_match_rate(&report) {
        eprintln!("rounding match rate {rate:.3}");
    }
    eprintln!("wrote {} and {}", a.out.display(), summary.display());
    if a.oracle_check && report.oracle_skipped > 0 {
        eprintln!(
            "oracle check skipped for {} task(s): more than {ORACLE_CHECK_MAX_WORKERS} workers",
            report.oracle_skipped
        );
    }
    if !report.oracle_violations.is_empty() {
        for v in &report.oracle_violations {
            eprintln!("oracle check: {v}");
        }
        bail!("{} oracle check violation(s)", report.oracle_violations.len());
    }
    if report.all_failed() {
        return Err(AllTasksFailed.into());
    }
    Ok(())
}

fn cmd_lb(a: LbArgs) -> anyhow::Result<()> {
    let (instance, tasks) = prepare(&a.data, a.fraction, a.seed, a.task_id)?;
    if let Some(dir) = &a.lp_listing {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut out = csv::Writer::from_writer(output(&a.out)?);
    out.write_record(["task_id", "status", "greedy_cost", "tlb", "lp_status", "lp_bound", "best_lb"])?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
    let mut succeeded = 0;
    for task in &tasks {
        let greedy = match greedy_set_cover(&instance, task) {
            Ok(g) => g,
            Err(e) => {
                out.write_record([&task.id.to_string(), e.status_token(), "", "", "", "", ""])?;
                continue;
            }
        };
        succeeded += 1;
        let tlb = trivial_lower_bound(greedy.cost, instance.len()).ok();
        let model = build_fair_lp(&instance, task)?;
        if let Some(dir) = &a.lp_listing {
            let path = dir.join(format!("task_{}.lp", task.id));
            fs::write(&path, model.to_listing()).with_context(|| format!("writing {}", path.display()))?;
        }
        let sol = solve_lp(&model)?;
        let lp = lp_lower_bound(&sol).ok();
        let best = match (tlb, lp) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        out.write_record([
            task.id.to_string(),
            "ok".to_owned(),
            greedy.cost.to_string(),
            opt(tlb),
            format!("{:?}", sol.status),
            opt(lp),
            opt(best),
        ])?;
    }
    out.flush()?;
    if succeeded == 0 && !tasks.is_empty() {
        return Err(AllTasksFailed.into());
    }
    Ok(())
}

fn write_dataset(dir: &Path, dataset: &Dataset) -> anyhow::Result<()> {
    let (w, t) = (dir.join(WORKERS_FILE), dir.join(TASKS_FILE));
    fio::save_dataset(dataset, &w, &t)?;
    eprintln!("wrote {} and {}", w.display(), t.display());
    Ok(())
}

fn cmd_gen(a: GenArgs) -> anyhow::Result<()> {
    let params = GenParams {
        n_workers: a.n_workers,
        n_skills: a.n_skills,
        n_tasks: a.n_tasks,
        skills_per_worker_mean: a.worker_skills_mean,
        skills_per_task_mean: a.task_skills_mean,
        max_skills: a.max_skills,
        cost_min: a.cost_min,
        cost_max: a.cost_max,
        class1_fraction: a.fraction,
        seed: a.seed,
    };
    let dataset = fio::gen_random_instance(&params)?;
    write_dataset(&out_dir(a.out)?, &dataset)
}

fn cmd_gadget(a: GadgetArgs) -> anyhow::Result<()> {
    let spec = GadgetSpec {
        vertices: a.vertices,
        edges: parse_edges(&a.edges)?,
        k_blue: a.k_blue,
        red_cost: a.red_cost,
        blue_cost: a.blue_cost,
    };
    let (instance, task) = fio::gen_hardness_gadget(&spec)?;
    let vocabulary = SkillVocabulary::from_names(spec.edges.iter().map(|(u, v)| format!("edge_{u}_{v}")))?;
    let dataset = Dataset { instance, tasks: vec![task], vocabulary };
    write_dataset(&out_dir(a.out)?, &dataset)
}

fn cmd_oracle(a: OracleArgs) -> anyhow::Result<()> {
    let (instance, tasks) = prepare(&a.data, a.fraction, a.seed, a.task_id)?;
    let mut out = csv::Writer::from_writer(output(&a.out)?);
    out.write_record(["task_id", "status", "cost", "team_size", "team", "explored"])?;
    let mut succeeded = 0;
    for task in &tasks {
        let res = if a.unfair {
            brute_force_unfair_optimum(&instance, task, a.limit)
        } else {
            brute_force_fair_optimum(&instance, task, a.limit)
        };
        match res {
            Ok(OracleResult { optimum: Some((team, cost)), explored }) => {
                succeeded += 1;
                out.write_record([
                    task.id.to_string(),
                    "ok".to_owned(),
                    cost.to_string(),
                    team.len().to_string(),
                    team_labels(&team, &instance),
                    explored.to_string(),
                ])?;
            }
            Ok(OracleResult { optimum: None, explored }) => out.write_record([
                task.id.to_string(),
                Error::FairCoverNotFound.status_token().to_owned(),
                String::new(),
                String::new(),
                String::new(),
                explored.to_string(),
            ])?,
            Err(e @ Error::TooLarge { .. }) => return Err(e.into()),
            Err(e) => out.write_record([
                task.id.to_string(),
                e.status_token().to_owned(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ])?,
        }
    }
    out.flush()?;
    if succeeded == 0 && !tasks.is_empty() {
        return Err(AllTasksFailed.into());
    }
    Ok(())
}

fn cmd_verify(a: DataArgs) -> anyhow::Result<()> {
    let ds = a.load()?;
    let report = validate_instance(&ds.instance, &ds.tasks);
    println!(
        "{} workers ({} class1, {} class2), {} skills, {} tasks",
        ds.instance.len(),
        report.class_counts.class1,
        report.class_counts.class2,
        ds.instance.skill_count(),
        ds.tasks.len()
    );
    let mut bad = 0;
    for t in report.tasks.iter().filter(|t| !t.coverable) {
        bad += 1;
        let names: Vec<&str> = t
            .missing_skills
            .iter()
            .map(|&s| ds.vocabulary.name(s).unwrap_or("?"))
            .collect();
        println!("task {}: no worker has {}", t.task, names.join(", "));
    }
    if bad > 0 {
        bail!("{bad} task(s) cannot be covered");
    }
    println!("all tasks coverable");
    Ok(())
}
