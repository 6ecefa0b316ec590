use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relaxsim::config::{FileConfig, SchedulerSection, TxSection};
use relaxsim::experiment::{
    binomial_sigma, inversion_probability, lower_bound_extra_steps, run_experiment, scheduler_seed, ExperimentKind,
    ExperimentSpec, SchedulerGrid,
};
use relaxsim::io::{self, GraphFormat};
use relaxsim::stats::Summary;
use relaxsim::{HarnessError, Result};
use relaxsim_core::incremental::Workload;
use relaxsim_core::sched::{AdversaryStrategy, SchedulerConfig, SchedulerKind, SchedulerTrace};
use relaxsim_core::sssp::{dijkstra_oracle, random_graph, relaxed_sssp, DuplicateMode, VertexId, WeightedDigraph};
use relaxsim_core::txsim::{simulate, verify_tx_properties, TxConfig};
use relaxsim_core::workloads::{BstSortInstance, DelaunayInstance, SyntheticDagInstance, WorkloadKind};
use relaxsim_core::{assert_lemmas, run, CheckMode, DependencyOracle, ExecutionReport};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "relaxsim", version, about = "Relaxed priority scheduler simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sort keys by BST insertion under a relaxed scheduler.
    RunSort(RunSortArgs),
    /// Incremental Delaunay triangulation under a relaxed scheduler.
    RunDelaunay(RunDelaunayArgs),
    /// Relaxed single-source shortest paths, checked against Dijkstra.
    RunSssp(RunSsspArgs),
    /// Discrete-event transactional simulation.
    RunTxsim(RunTxsimArgs),
    /// Estimate Pr[label i+1 is returned before label i] for a MultiQueue.
    InversionProb(InversionArgs),
    /// Mean extra steps under a MultiQueue against ln n.
    LowerBound(LowerBoundArgs),
    /// Check the rank, fairness and transactional bounds over many seeds.
    LemmaAudit(LemmaAuditArgs),
    /// Write a random G(n, m) graph.
    GenGraph(GenGraphArgs),
    /// Write distinct random grid points.
    GenPoints(GenPointsArgs),
    /// Run an experiment described by a TOML file.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone, Default)]
struct SchedArgs {
    #[arg(long, value_parser = parse_kind)]
    scheduler: Option<SchedulerKind>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<AdversaryStrategy>,
    /// First seed; instance and scheduler seeds are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of consecutive seeds.
    #[arg(long)]
    seeds: Option<u64>,
    /// TOML file with `[scheduler]` and `[txsim]` tables; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct OutputArgs {
    /// Per-seed CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scheduler trace of the first seed as JSONL.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Full report of the first seed as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Check {
    #[default]
    Structural,
    Oracle,
    #[value(name = "cross-check")]
    Both,
}

impl From<Check> for CheckMode {
    fn from(c: Check) -> Self {
        match c {
            Check::Structural => CheckMode::Structural,
            Check::Oracle => CheckMode::Oracle,
            Check::Both => CheckMode::CrossCheck,
        }
    }
}

#[derive(Args)]
struct RunSortArgs {
    /// Random keys are generated when no key file is given.
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// One integer key per line.
    #[arg(long)]
    keys: Option<PathBuf>,
    /// Line `l` holds the 0-based index of the key given label `l`; file order otherwise.
    #[arg(long, requires = "keys")]
    perm: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    check: Check,
    /// Charged label pairs of the first seed as CSV.
    #[arg(long)]
    charged: Option<PathBuf>,
    #[command(flatten)]
    sched: SchedArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct RunDelaunayArgs {
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// `x y` per line, integer coordinates in [0, 2^30).
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, requires = "points")]
    perm: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    check: Check,
    #[arg(long)]
    charged: Option<PathBuf>,
    #[command(flatten)]
    sched: SchedArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct RunSsspArgs {
    /// DIMACS `.gr` or TSV file; a random graph is generated otherwise.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<GraphFormat>,
    /// 0-based source vertex.
    #[arg(long, default_value_t = 0)]
    source: VertexId,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    max_weight: u64,
    #[arg(long, value_parser = parse_duplicates, default_value = "decrease-key")]
    duplicates: DuplicateMode,
    #[command(flatten)]
    sched: SchedArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Clone, Default)]
struct TxArgs {
    /// Interval contention bound.
    #[arg(long)]
    c: Option<u32>,
    #[arg(long)]
    workers: Option<u32>,
    /// Steps per attempt.
    #[arg(long)]
    duration: Option<u32>,
}

#[derive(Args)]
struct RunTxsimArgs {
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// `i j` dependency pairs with i < j; BST dependencies of random keys otherwise.
    #[arg(long)]
    dag: Option<PathBuf>,
    /// Fetch, commit and abort events of the first seed as JSONL.
    #[arg(long)]
    events: Option<PathBuf>,
    #[command(flatten)]
    tx: TxArgs,
    #[command(flatten)]
    sched: SchedArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct InversionArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    q: u32,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fail unless every estimate for i > 1 is at least this value minus 3 sigma.
    #[arg(long)]
    min_prob: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[arg(long, value_parser = parse_workload, default_value = "bst-sort")]
    workload: WorkloadKind,
    #[arg(long, value_delimiter = ',', default_values_t = [256, 512, 1024, 2048, 4096, 8192, 16384])]
    n: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    q: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    seeds: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LemmaAuditArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 4, 8])]
    k: Vec<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    #[command(flatten)]
    tx: TxArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenGraphArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    max_weight: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inferred from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<GraphFormat>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenPointsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment description.
    spec: PathBuf,
    /// Overrides `out` in the spec.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> std::result::Result<SchedulerKind, String> {
    s.parse().map_err(|_| format!("`{s}` is not one of exact, adversarial, multiqueue"))
}

fn parse_strategy(s: &str) -> std::result::Result<AdversaryStrategy, String> {
    s.parse().map_err(|_| format!("`{s}` is not one of max-rank, delay-top, random-top-k"))
}

fn parse_workload(s: &str) -> std::result::Result<WorkloadKind, String> {
    s.parse().map_err(|_| format!("`{s}` is not one of bst-sort, delaunay"))
}

fn parse_duplicates(s: &str) -> std::result::Result<DuplicateMode, String> {
    match s {
        "decrease-key" => Ok(DuplicateMode::DecreaseKey),
        "insert-only" => Ok(DuplicateMode::InsertOnly),
        _ => Err(format!("`{s}` is not one of decrease-key, insert-only")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Violations(n)) => {
            eprintln!("error: {n} violation(s)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

enum Outcome {
    Clean,
    Violations(u64),
}

impl Outcome {
    fn from_count(n: u64) -> Self {
        if n == 0 {
            Self::Clean
        } else {
            Self::Violations(n)
        }
    }
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::RunSort(a) => run_sort(a),
        Command::RunDelaunay(a) => run_delaunay(a),
        Command::RunSssp(a) => run_sssp(a),
        Command::RunTxsim(a) => run_txsim(a),
        Command::InversionProb(a) => inversion(a),
        Command::LowerBound(a) => lower_bound(a),
        Command::LemmaAudit(a) => lemma_audit(a),
        Command::GenGraph(a) => gen_graph(a),
        Command::GenPoints(a) => gen_points(a),
        Command::Experiment(a) => experiment(a),
    }
}

struct Resolved {
    config: SchedulerConfig,
    seeds: std::ops::Range<u64>,
    file: FileConfig,
}

fn resolve(args: &SchedArgs) -> Result<Resolved> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = SchedulerSection {
        kind: args.scheduler,
        k: args.k,
        q: args.q,
        strategy: args.strategy,
        seed: args.seed,
        seeds: args.seeds,
    };
    let merged = file.scheduler.overlay(&flags);
    let config = merged.resolve()?;
    let count = merged.seed_count();
    if count == 0 {
        return Err(HarnessError::Input("--seeds must be at least 1".into()));
    }
    Ok(Resolved {
        seeds: config.seed..config.seed + count,
        config,
        file,
    })
}

fn tx_section(file: &TxSection, flags: &TxArgs) -> (u32, u32, u32) {
    (
        flags.c.or(file.c).unwrap_or(8),
        flags.workers.or(file.workers).unwrap_or(8),
        flags.duration.or(file.duration).unwrap_or(1),
    )
}

/// One CSV row per seed.
#[derive(Serialize)]
struct SeedRow {
    seed: u64,
    n: usize,
    scheduler: &'static str,
    k: u32,
    q: u32,
    strategy: &'static str,
    work: u64,
    baseline: u64,
    extra: u64,
    overhead: f64,
    max_rank: u32,
    violations: u64,
}

impl SeedRow {
    fn new(seed: u64, n: usize, cfg: &SchedulerConfig) -> Self {
        Self {
            seed,
            n,
            scheduler: cfg.kind.name(),
            k: cfg.relaxation(),
            q: if cfg.kind == SchedulerKind::Multiqueue { cfg.q } else { 1 },
            strategy: if cfg.kind == SchedulerKind::Adversarial { cfg.strategy.name() } else { "-" },
            work: 0,
            baseline: 0,
            extra: 0,
            overhead: 1.0,
            max_rank: 0,
            violations: 0,
        }
    }
}

#[derive(Serialize)]
struct RunSummary {
    command: &'static str,
    seeds: usize,
    mean_extra: f64,
    sd_extra: f64,
    mean_overhead: f64,
    max_overhead: f64,
    max_rank: u32,
    violations: u64,
}

fn finish(command: &'static str, rows: &[SeedRow], out: Option<&Path>) -> Result<Outcome> {
    if let Some(path) = out {
        io::write_csv(path, rows)?;
    }
    let extra: Vec<f64> = rows.iter().map(|r| r.extra as f64).collect();
    let overhead: Vec<f64> = rows.iter().map(|r| r.overhead).collect();
    let e = Summary::of(&extra);
    let o = Summary::of(&overhead);
    let summary = RunSummary {
        command,
        seeds: rows.len(),
        mean_extra: e.mean,
        sd_extra: e.sd,
        mean_overhead: o.mean,
        max_overhead: o.max,
        max_rank: rows.iter().map(|r| r.max_rank).max().unwrap_or(0),
        violations: rows.iter().map(|r| r.violations).sum(),
    };
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    Ok(Outcome::from_count(summary.violations))
}

fn write_first(
    first: bool,
    output: &OutputArgs,
    charged: Option<&Path>,
    report: &ExecutionReport,
    trace: &SchedulerTrace,
) -> Result<()> {
    if !first {
        return Ok(());
    }
    if let Some(path) = &output.trace {
        io::write_trace_file(path, trace)?;
    }
    if let Some(path) = &output.report {
        io::write_json(path, report)?;
    }
    if let Some(path) = charged {
        io::write_charged_pairs(path, report)?;
    }
    Ok(())
}

fn lemma_k(cfg: &SchedulerConfig, trace: &SchedulerTrace) -> u32 {
    match cfg.kind {
        SchedulerKind::Multiqueue => trace.effective_relaxation(),
        _ => cfg.relaxation(),
    }
}

fn incremental_row<W: Workload + ?Sized>(
    workload: &mut W,
    seed: u64,
    cfg: &SchedulerConfig,
    mode: CheckMode,
) -> Result<(SeedRow, ExecutionReport, SchedulerTrace)> {
    let (report, trace) = run(workload, cfg, mode)?;
    let mut row = SeedRow::new(seed, report.n, cfg);
    row.work = report.total_steps;
    row.baseline = report.n as u64;
    row.extra = report.extra_steps;
    row.overhead = report.overhead_ratio();
    row.max_rank = trace.max_rank_observed;
    row.violations = assert_lemmas(&report, &trace, lemma_k(cfg, &trace)).len() as u64;
    Ok((row, report, trace))
}

fn run_sort(a: RunSortArgs) -> Result<Outcome> {
    let r = resolve(&a.sched)?;
    let loaded = match &a.keys {
        Some(path) => {
            let keys = io::load_keys(path)?;
            let keys = match &a.perm {
                Some(p) => io::apply_permutation(&keys, &io::load_permutation(p, keys.len())?),
                None => keys,
            };
            Some(BstSortInstance::from_keys_by_label(keys)?)
        }
        None => None,
    };
    let mut rows = Vec::new();
    for seed in r.seeds.clone() {
        let generated;
        let inst = match &loaded {
            Some(inst) => inst,
            None => {
                generated = BstSortInstance::generate(a.n, seed)?;
                &generated
            }
        };
        let cfg = r.config.with_seed(scheduler_seed(seed));
        let (row, report, trace) = incremental_row(&mut inst.workload(), seed, &cfg, a.check.into())?;
        write_first(seed == r.seeds.start, &a.output, a.charged.as_deref(), &report, &trace)?;
        rows.push(row);
    }
    finish("run-sort", &rows, a.output.out.as_deref())
}

fn run_delaunay(a: RunDelaunayArgs) -> Result<Outcome> {
    let r = resolve(&a.sched)?;
    let loaded = match &a.points {
        Some(path) => {
            let points = io::load_points(path)?;
            let points = match &a.perm {
                Some(p) => io::apply_permutation(&points, &io::load_permutation(p, points.len())?),
                None => points,
            };
            Some(DelaunayInstance::from_points_by_label(points)?)
        }
        None => None,
    };
    let mut rows = Vec::new();
    for seed in r.seeds.clone() {
        let generated;
        let inst = match &loaded {
            Some(inst) => inst,
            None => {
                generated = DelaunayInstance::generate(a.n, seed)?;
                &generated
            }
        };
        let cfg = r.config.with_seed(scheduler_seed(seed));
        let mut workload = inst.workload();
        let (mut row, report, trace) = incremental_row(&mut workload, seed, &cfg, a.check.into())?;
        row.violations += workload.mesh().delaunay_violations() as u64;
        write_first(seed == r.seeds.start, &a.output, a.charged.as_deref(), &report, &trace)?;
        rows.push(row);
    }
    finish("run-delaunay", &rows, a.output.out.as_deref())
}

fn run_sssp(a: RunSsspArgs) -> Result<Outcome> {
    let r = resolve(&a.sched)?;
    let loaded = match &a.graph {
        Some(path) => {
            let format = a.format.unwrap_or_else(|| GraphFormat::from_path(path));
            Some(io::load_graph(path, format, a.source)?)
        }
        None => None,
    };
    let mut rows = Vec::new();
    for seed in r.seeds.clone() {
        let generated: WeightedDigraph;
        let graph = match &loaded {
            Some(g) => g,
            None => {
                generated = random_graph(a.n, a.m, a.max_weight, seed)?.with_source(a.source)?;
                &generated
            }
        };
        let cfg = r.config.with_seed(scheduler_seed(seed));
        let result = relaxed_sssp(graph, &cfg, a.duplicates)?;
        let expected = dijkstra_oracle(graph);
        let mut row = SeedRow::new(seed, graph.n(), &cfg);
        row.work = result.stats.total_pops;
        row.baseline = result.stats.reachable;
        row.extra = result.stats.total_pops - result.stats.reachable;
        row.overhead = result.stats.overhead_ratio();
        row.max_rank = result.trace.max_rank_observed;
        row.violations = result.dist.iter().zip(&expected).filter(|(a, b)| a != b).count() as u64;
        if seed == r.seeds.start {
            if let Some(path) = &a.output.trace {
                io::write_trace_file(path, &result.trace)?;
            }
            if let Some(path) = &a.output.report {
                io::write_json(path, &result.stats)?;
            }
        }
        rows.push(row);
    }
    finish("run-sssp", &rows, a.output.out.as_deref())
}

fn run_txsim(a: RunTxsimArgs) -> Result<Outcome> {
    let r = resolve(&a.sched)?;
    if r.config.kind == SchedulerKind::Multiqueue {
        return Err(HarnessError::Input("run-txsim needs an exact or adversarial scheduler".into()));
    }
    let (c, workers, duration) = tx_section(&r.file.txsim, &a.tx);
    let dag = match &a.dag {
        Some(path) => {
            let edges = io::load_dag(path)?;
            let n = edges.iter().map(|&(_, j)| j as usize).max().unwrap_or(0).max(a.n);
            Some(SyntheticDagInstance::from_edges(n, edges)?)
        }
        None => None,
    };
    let mut rows = Vec::new();
    for seed in r.seeds.clone() {
        let generated;
        let oracle: &DependencyOracle = match &dag {
            Some(d) => d.oracle(),
            None => {
                generated = BstSortInstance::generate(a.n, seed)?;
                generated.oracle()
            }
        };
        let cfg = TxConfig {
            duration,
            ..TxConfig::new(r.config.relaxation(), c, workers, r.config.strategy, scheduler_seed(seed))
        };
        let report = simulate(oracle, &cfg)?;
        let mut row = SeedRow::new(seed, report.n, &r.config);
        row.work = report.commits + report.aborts;
        row.baseline = report.n as u64;
        row.extra = report.aborts;
        row.overhead = row.work as f64 / row.baseline.max(1) as f64;
        row.violations = verify_tx_properties(&report, oracle, &cfg).len() as u64;
        if seed == r.seeds.start {
            if let Some(path) = &a.events {
                io::write_events_file(path, &report.events)?;
            }
            if let Some(path) = &a.output.report {
                io::write_json(path, &report)?;
            }
        }
        rows.push(row);
    }
    finish("run-txsim", &rows, a.output.out.as_deref())
}

fn inversion(a: InversionArgs) -> Result<Outcome> {
    if a.trials == 0 || a.q == 0 || a.n < 2 {
        return Err(HarnessError::Input("need n >= 2, q >= 1 and trials >= 1".into()));
    }
    let est = inversion_probability(a.n, a.q, a.trials, a.seed);
    #[derive(Serialize)]
    struct Row {
        i: usize,
        estimate: f64,
        sigma: f64,
    }
    let rows: Vec<Row> = est
        .iter()
        .enumerate()
        .map(|(idx, &p)| Row {
            i: idx + 1,
            estimate: p,
            sigma: binomial_sigma(p, a.trials),
        })
        .collect();
    if let Some(path) = &a.out {
        io::write_csv(path, &rows)?;
    }
    let tail = rows.iter().skip(1);
    let min = tail.clone().map(|r| r.estimate).fold(f64::INFINITY, f64::min);
    let failures = match a.min_prob {
        Some(bound) => tail
            .filter(|r| r.estimate < bound - 3.0 * binomial_sigma(bound, a.trials))
            .count() as u64,
        None => 0,
    };
    println!(
        "{}",
        serde_json::json!({"command": "inversion-prob", "n": a.n, "q": a.q, "trials": a.trials, "min_estimate_i_gt_1": min, "failures": failures})
    );
    Ok(Outcome::from_count(failures))
}

fn lower_bound(a: LowerBoundArgs) -> Result<Outcome> {
    if a.seeds == 0 || a.n.is_empty() {
        return Err(HarnessError::Input("need at least one n and one seed".into()));
    }
    let cfg = SchedulerConfig::multiqueue(a.q, 0);
    cfg.validate()?;
    let result = lower_bound_extra_steps(a.workload, &a.n, &cfg, a.seed..a.seed + a.seeds)?;
    if let Some(path) = &a.out {
        io::write_csv(path, &result.rows)?;
    }
    let failed_rows = result.rows.iter().filter(|r| !r.pass).count() as u64;
    let slope_ok = result.fit.is_some_and(|f| f.slope > 0.0 && f.p_positive < 0.01);
    println!(
        "{}",
        serde_json::json!({"command": "lower-bound", "rows": result.rows, "fit": result.fit, "slope_positive": slope_ok})
    );
    Ok(Outcome::from_count(failed_rows + u64::from(!slope_ok)))
}

fn lemma_audit(a: LemmaAuditArgs) -> Result<Outcome> {
    let file = match &a.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let (c, workers, duration) = tx_section(&file.txsim, &a.tx);
    let spec = ExperimentSpec {
        kind: ExperimentKind::LemmaAudit,
        n: vec![a.n],
        schedulers: SchedulerGrid {
            kinds: vec![SchedulerKind::Adversarial],
            k: a.k.clone(),
            q: vec![8],
            strategies: AdversaryStrategy::ALL.to_vec(),
        },
        seed_start: a.seed,
        seeds: a.seeds,
        c,
        workers,
        duration,
        out: a.out.clone(),
        ..ExperimentSpec::default()
    };
    report_table(&spec, a.out.as_deref())
}

fn report_table(spec: &ExperimentSpec, out: Option<&Path>) -> Result<Outcome> {
    let table = run_experiment(spec)?;
    if let Some(path) = out {
        table.write_csv(path)?;
    }
    let violations = table.violations();
    println!(
        "{}",
        serde_json::json!({"command": spec.kind.name(), "violations": violations})
    );
    Ok(Outcome::from_count(violations))
}

fn gen_graph(a: GenGraphArgs) -> Result<Outcome> {
    let graph = random_graph(a.n, a.m, a.max_weight, a.seed)?;
    let format = a.format.unwrap_or_else(|| GraphFormat::from_path(&a.out));
    io::write_graph(&a.out, &graph, format)?;
    Ok(Outcome::Clean)
}

fn gen_points(a: GenPointsArgs) -> Result<Outcome> {
    let inst = DelaunayInstance::generate(a.n, a.seed)?;
    io::write_points(&a.out, inst.points_by_label())?;
    Ok(Outcome::Clean)
}

fn experiment(a: ExperimentArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&a.spec).map_err(|e| HarnessError::io(&a.spec, e))?;
    let spec: ExperimentSpec =
        toml::from_str(&text).map_err(|e| HarnessError::Input(format!("{}: {e}", a.spec.display())))?;
    let out = a.out.or_else(|| spec.out.clone());
    report_table(&spec, out.as_deref())
}
