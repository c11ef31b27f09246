//! Command-line front end: simulation, exhaustive search, bound calculators,
//! adversary generators, arrangement verification, and table reproduction.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use boxmis::formats::{
    parse_arrangement, parse_graph, parse_order_tag, parse_shape_tag, write_arrangement,
    write_graph, write_polynomial,
};
use boxmis::harness::{
    adaptive_game, mc_ratio, minimax_search_parallel,
    ExperimentRecord,
};
use boxmis::report::{
    compute_table6_extended, default_golden_dir, reproduce, OutputFormat, TableId,
};
use boxmis::{parse_policy, resolve_workers};
use boxmis_core::adversaries::{
    dominating_chain, marking_generate, AdaptivePackSpec, ChainKind, MarkingSpec,
};
use boxmis_core::expectation::{greedy_p_polynomial, optimize_p};
use boxmis_core::geometry::{intersection_graph, validate_order, validate_shape};
use boxmis_core::graph::mis_size;
use boxmis_core::policies::run_policy;
use boxmis_core::rat::{format_rat, parse_rat, rat_to_decimal, Rat};
use boxmis_core::rng::RandomSource;
use boxmis_core::search::{worst_graph_report, SearchConfig};
use boxmis_core::tuning::{bounds_table, choose_k, AdversaryModel, BoundQuery};

#[derive(Parser)]
#[command(name = "boxmis", version, about = "Online maximum independent set of axis-aligned boxes: simulation, search, bounds")]
struct Cli {
    /// Optional key=value config file (keys: workers, format).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a policy over an arrangement file.
    Simulate(SimulateArgs),
    /// Exhaustive worst-case search over ordered graphs.
    Search(SearchArgs),
    /// Expectation polynomial and optimal p for a graph file.
    OptimizeP(OptimizePArgs),
    /// Classification tuning for size-bounded hypercubes.
    TuneK(TuneKArgs),
    /// Competitive-ratio table entry for a configuration.
    Bounds(BoundsArgs),
    /// Adversary instance generators and games.
    #[command(subcommand)]
    Adversary(AdversaryCmd),
    /// Validate an arrangement file, optionally against a graph file.
    VerifyArrangement(VerifyArgs),
    /// Recompute a reported table and diff it against the golden fixture.
    ReproduceTable(ReproduceArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// greedy | greedyp:<p> | classified:<sigma>:<k>
    #[arg(long)]
    policy: String,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repeat the run over derived per-trial seeds and emit trial,solution_size CSV.
    #[arg(long)]
    trials: Option<u64>,
    /// Write the per-trial CSV here (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    /// Grid step, e.g. 0.01 (default). Mutually exclusive with --fixed-p.
    #[arg(long, default_value = "0.01")]
    p_grid_step: String,
    /// Search a single probability instead of the grid.
    #[arg(long)]
    fixed_p: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also print the refined worst-graph report for the best grid point.
    #[arg(long, default_value_t = false)]
    report: bool,
}

#[derive(Args)]
struct OptimizePArgs {
    /// Graph file: n=<n> then one hex adjacency mask per vertex.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct TuneKArgs {
    #[arg(short, long)]
    d: u32,
    #[arg(long)]
    sigma: String,
}

#[derive(Args)]
struct BoundsArgs {
    /// unit | sigma:<value> | unitvol | cube | rect
    #[arg(long)]
    shape: String,
    /// dominating | nondominated | arbitrary
    #[arg(long)]
    order: String,
    /// adaptive | oblivious
    #[arg(long)]
    adversary: String,
    #[arg(short, long, default_value_t = 2)]
    d: u32,
    #[arg(short, long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum AdversaryCmd {
    /// Generate a self-verified instance and write it as an arrangement file.
    Generate(GenerateArgs),
    /// Play an adversary against a live policy.
    Play(PlayArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// pack | marking | chain
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Shape tag for marking instances (unit | sigma:<v> | unitvol | cube | rect).
    #[arg(long, default_value = "unit")]
    shape: String,
    /// Order class (nondominated | arbitrary); chains are always dominating.
    #[arg(long, default_value = "nondominated")]
    order: String,
    /// Marking levels per block.
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long, default_value_t = 1)]
    blocks: usize,
    /// Chain length (kind=chain) or pack size (kind=pack).
    #[arg(long)]
    count: Option<usize>,
    /// Overlapping staircase instead of disjoint chain (kind=chain).
    #[arg(long, default_value_t = false)]
    overlapping: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlayArgs {
    /// pack | marking
    #[arg(long)]
    kind: String,
    #[arg(long)]
    policy: String,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value = "unit")]
    shape: String,
    #[arg(long, default_value = "arbitrary")]
    order: String,
    #[arg(long, default_value_t = 10)]
    blocks: usize,
    /// Pack size; defaults to the configuration formula where one exists.
    #[arg(long)]
    pack_count: Option<usize>,
    /// Marking levels per block (kind=marking).
    #[arg(long, default_value_t = 2)]
    levels: usize,
    /// Monte Carlo trials (kind=marking).
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    /// Compare the arrangement's graph against this graph file.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// 1 | 2 | 4 | 5 | 6
    table: String,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    golden_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Include the optional 7-vertex extension row for table 6.
    #[arg(long, default_value_t = false)]
    extended: bool,
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let config_text = match &cli.config {
        Some(path) => Some(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?),
        None => None,
    };
    let config = config_text.as_deref();
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Search(args) => search(args, config),
        Command::OptimizeP(args) => optimize(args),
        Command::TuneK(args) => tune_k(args),
        Command::Bounds(args) => bounds(args),
        Command::Adversary(AdversaryCmd::Generate(args)) => generate(args),
        Command::Adversary(AdversaryCmd::Play(args)) => play(args),
        Command::VerifyArrangement(args) => verify(args),
        Command::ReproduceTable(args) => reproduce_table(args, config),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let arrangement = parse_arrangement(&text)?;
    arrangement.validate().map_err(|e| anyhow!("invalid arrangement: {e}"))?;
    let policy = parse_policy(&args.policy)?;
    let record = ExperimentRecord::new(
        &format!("simulate policy={} seed={} trials={:?}", args.policy, args.seed, args.trials),
        &text,
    );
    match args.trials {
        None => {
            let mut rng = RandomSource::new(args.seed);
            let trace = run_policy(&policy, &arrangement.boxes, &mut rng).map_err(|e| anyhow!("{e}"))?;
            let accepted: Vec<String> = trace.accepted_indices().map(|i| i.to_string()).collect();
            println!(
                "policy={} n={} solution_size={} accepted=[{}] seed={}",
                args.policy,
                arrangement.len(),
                trace.solution_size,
                accepted.join(" "),
                args.seed
            );
            Ok(())
        }
        Some(trials) => {
            let mut csv = record.comment_lines();
            csv.push_str("trial,solution_size\n");
            let mut total = 0u64;
            for trial in 0..trials {
                let mut rng = RandomSource::for_trial(args.seed, trial);
                let trace = run_policy(&policy, &arrangement.boxes, &mut rng).map_err(|e| anyhow!("{e}"))?;
                total += trace.solution_size as u64;
                csv.push_str(&format!("{trial},{}\n", trace.solution_size));
            }
            eprintln!(
                "mean solution size over {} trials: {:.6}",
                trials,
                total as f64 / trials as f64
            );
            emit(args.out.as_ref(), &csv)
        }
    }
}

fn search(args: SearchArgs, config: Option<&str>) -> Result<()> {
    let workers = resolve_workers(args.workers, config);
    let mut cfg = match &args.fixed_p {
        Some(p) => {
            let p = parse_rat(p).ok_or_else(|| anyhow!("bad fixed p"))?;
            SearchConfig::fixed_p(args.n, p)
        }
        None => {
            let step = parse_rat(&args.p_grid_step).ok_or_else(|| anyhow!("bad grid step"))?;
            let mut grid = Vec::new();
            let mut p = Rat::new(0.into(), 1.into());
            let one = Rat::new(1.into(), 1.into());
            while p <= one {
                grid.push(p.clone());
                p += &step;
            }
            let mut cfg = SearchConfig::with_grid_step_hundredths(args.n);
            cfg.p_grid = grid;
            cfg
        }
    };
    cfg.worker_count = workers;
    let started = Instant::now();
    let result = minimax_search_parallel(&cfg, args.checkpoint.as_deref())?;
    let elapsed = started.elapsed();
    // worker count is an execution detail: the payload must be bit-identical
    // at any parallelism, so it stays out of the config digest
    let record = ExperimentRecord::new(&format!("search n={} grid={}", args.n, cfg.p_grid.len()), "");
    let mut csv = record.comment_lines();
    csv.push_str("p,worst_ratio,worst_graph_hex,opt,expectation_num,expectation_den\n");
    for pp in &result.per_p {
        match &pp.entry {
            None => csv.push_str(&format!("{},inf,,,,\n", rat_to_decimal(&pp.p, 2))),
            Some(e) => csv.push_str(&format!(
                "{},{},{:x},{},{},{}\n",
                rat_to_decimal(&pp.p, 2),
                rat_to_decimal(&e.ratio, 6),
                e.mask,
                e.opt,
                e.expectation.numer(),
                e.expectation.denom()
            )),
        }
    }
    fs::write(&args.out, &csv).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some((p, entry)) = result.best_entry() {
        println!(
            "n={} best_p={} worst_ratio={} graphs={} elapsed_s={:.3}",
            args.n,
            rat_to_decimal(p, 2),
            rat_to_decimal(&entry.ratio, 6),
            result.graphs_scanned,
            elapsed.as_secs_f64()
        );
        if args.report {
            let p = p.clone();
            let report = worst_graph_report(&cfg, &result, &p).map_err(|e| anyhow!("{e}"))?;
            println!(
                "worst graph: mask={:x} polynomial=[{}] opt={} refined_p={} refined_ratio={} confirmed={} degrees={:?}",
                report.graph.edge_mask(),
                write_polynomial(&report.polynomial),
                report.opt,
                format_rat(&report.refined.p_star),
                format_rat(&report.refined.min_ratio),
                report.confirmed,
                report.degree_sequence
            );
        }
    }
    Ok(())
}

fn optimize(args: OptimizePArgs) -> Result<()> {
    let text = fs::read_to_string(&args.graph).with_context(|| format!("reading {}", args.graph.display()))?;
    let graph = parse_graph(&text)?;
    let poly = greedy_p_polynomial(&graph).map_err(|e| anyhow!("{e}"))?;
    let opt = mis_size(&graph).size;
    let optimum = optimize_p(&poly, opt).map_err(|e| anyhow!("{e}"))?;
    println!("polynomial: {}", write_polynomial(&poly));
    println!("opt: {opt}");
    println!(
        "p_star: {} ({})",
        format_rat(&optimum.p_star),
        rat_to_decimal(&optimum.p_star, 9)
    );
    println!("max_expectation: {}", format_rat(&optimum.max_expectation));
    println!(
        "min_ratio: {} ({})",
        format_rat(&optimum.min_ratio),
        rat_to_decimal(&optimum.min_ratio, 6)
    );
    Ok(())
}

fn tune_k(args: TuneKArgs) -> Result<()> {
    let sigma = parse_rat(&args.sigma).ok_or_else(|| anyhow!("bad sigma"))?;
    let tuning = choose_k(args.d, &sigma).map_err(|e| anyhow!("{e}"))?;
    println!("k_star: {:.6}", tuning.k_star);
    println!("candidates (k, bound):");
    for (k, bound) in &tuning.candidates {
        println!("  {k} {bound}");
    }
    println!("k_chosen: {}", tuning.k_chosen);
    println!("bound_at_k: {}", tuning.bound_at_k);
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<()> {
    let shape = parse_shape_tag(&args.shape)?;
    let order = parse_order_tag(&args.order)?;
    let adversary = match args.adversary.as_str() {
        "adaptive" => AdversaryModel::Adaptive,
        "oblivious" => AdversaryModel::Oblivious,
        other => bail!("unknown adversary {other:?}"),
    };
    let entry = bounds_table(&BoundQuery { shape, order, adversary, d: args.d, n: args.n })
        .map_err(|e| anyhow!("{e}"))?;
    println!(
        "lower={} upper={} tight={}",
        format_rat(&entry.lower),
        format_rat(&entry.upper),
        entry.tight
    );
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let order = parse_order_tag(&args.order)?;
    let shape = parse_shape_tag(&args.shape)?;
    let arrangement = match args.kind.as_str() {
        "chain" => {
            let n = args.count.ok_or_else(|| anyhow!("kind=chain needs --count"))?;
            let kind = if args.overlapping { ChainKind::Overlapping } else { ChainKind::Disjoint };
            dominating_chain(n, args.d, kind)
        }
        "marking" => {
            let spec = MarkingSpec::new(args.d, shape, order, args.levels, args.blocks)
                .map_err(|e| anyhow!("{e}"))?;
            let mut rng = RandomSource::new(args.seed);
            let instance = marking_generate(&spec, &mut rng).map_err(|e| anyhow!("{e}"))?;
            let marks: Vec<String> = instance
                .marks
                .iter()
                .flatten()
                .map(|m| m.to_string())
                .collect();
            let mut text = format!("# marks: {}\n# opt: {}\n", marks.join(" "), instance.opt_size);
            text.push_str(&write_arrangement(&instance.arrangement));
            return emit(Some(&args.out), &text);
        }
        "pack" => {
            let spec = AdaptivePackSpec::new(
                shape,
                order,
                args.d,
                args.count.ok_or_else(|| anyhow!("kind=pack needs --count"))?,
                args.blocks,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let mut rng = RandomSource::new(args.seed);
            let outcome = boxmis_core::adversaries::adaptive_pack_play(
                &spec,
                &boxmis_core::policies::PolicySpec::NaiveGreedy,
                &mut rng,
            )
            .map_err(|e| anyhow!("{e}"))?;
            outcome.instance.arrangement.clone()
        }
        other => bail!("unknown kind {other:?}"),
    };
    emit(Some(&args.out), &write_arrangement(&arrangement))
}

fn play(args: PlayArgs) -> Result<()> {
    let policy = parse_policy(&args.policy)?;
    let order = parse_order_tag(&args.order)?;
    let shape = parse_shape_tag(&args.shape)?;
    match args.kind.as_str() {
        "pack" => {
            let count = match args.pack_count {
                Some(c) => c,
                None => match (&shape, order) {
                    (boxmis_core::geometry::ShapeClass::UnitCube, boxmis_core::geometry::OrderClass::NonDominated) => (1 << args.d) - 1,
                    (boxmis_core::geometry::ShapeClass::UnitCube, _) => 1 << args.d,
                    _ => bail!("--pack-count required for this shape"),
                },
            };
            let spec = AdaptivePackSpec::new(shape, order, args.d, count, args.blocks)
                .map_err(|e| anyhow!("{e}"))?;
            let outcome = adaptive_game(&policy, &spec, args.seed)?;
            let record = ExperimentRecord::new(
                &format!(
                    "play pack policy={} d={} blocks={} pack={} seed={}",
                    args.policy, args.d, args.blocks, spec.pack_count, args.seed
                ),
                "",
            );
            let ratio = outcome
                .ratio
                .as_ref()
                .map(|r| rat_to_decimal(r, 6))
                .unwrap_or_else(|| "inf".to_string());
            let mut csv = record.comment_lines();
            csv.push_str("blocks,opt,sol,ratio\n");
            csv.push_str(&format!("{},{},{},{}\n", args.blocks, outcome.opt, outcome.sol, ratio));
            emit(args.out.as_ref(), &csv)
        }
        "marking" => {
            let spec = MarkingSpec::new(args.d, shape, order, args.levels, args.blocks)
                .map_err(|e| anyhow!("{e}"))?;
            let outcome = mc_ratio(&policy, &spec, args.trials, args.seed)?;
            let record = ExperimentRecord::new(
                &format!(
                    "play marking policy={} d={} levels={} blocks={} trials={} seed={}",
                    args.policy, args.d, args.levels, args.blocks, args.trials, args.seed
                ),
                "",
            );
            let mut csv = record.comment_lines();
            csv.push_str("opt,mean,stderr,ci95_low,ci95_high,ratio_point\n");
            csv.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                outcome.opt,
                outcome.estimate.mean,
                outcome.estimate.stderr,
                outcome.estimate.ci95.0,
                outcome.estimate.ci95.1,
                outcome.ratio_point
            ));
            emit(args.out.as_ref(), &csv)
        }
        other => bail!("unknown kind {other:?}"),
    }
}

fn verify(args: VerifyArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let arrangement = parse_arrangement(&text)?;
    let shape = validate_shape(&arrangement);
    let order = validate_order(&arrangement);
    println!("n={} dim={}", arrangement.len(), arrangement.dim().unwrap_or(0));
    match shape.first_violation {
        None => println!("shape: ok"),
        Some(i) => println!("shape: violation at box {i}"),
    }
    match order.first_violation {
        None => println!("order: ok"),
        Some((later, earlier)) => println!("order: violation, box {later} against box {earlier}"),
    }
    let graph = intersection_graph(&arrangement).map_err(|e| anyhow!("{e}"))?;
    println!("graph:\n{}", write_graph(&graph).trim_end());
    if let Some(path) = &args.graph {
        let expected = parse_graph(&fs::read_to_string(path)?)?;
        let matches = graph == expected;
        println!("matches_graph_file: {matches}");
        if !(matches && shape.ok && order.ok) {
            std::process::exit(1);
        }
    } else if !(shape.ok && order.ok) {
        std::process::exit(1);
    }
    Ok(())
}

fn reproduce_table(args: ReproduceArgs, config: Option<&str>) -> Result<()> {
    let id = TableId::parse(&args.table)?;
    let format = OutputFormat::parse(&args.format)?;
    let workers = resolve_workers(args.workers, config);
    let golden_dir = args.golden_dir.clone().unwrap_or_else(default_golden_dir);
    let started = Instant::now();
    let result = reproduce(id, &golden_dir, format, workers)?;
    eprintln!("computed in {:.3}s", started.elapsed().as_secs_f64());
    let mut content = result.content.clone();
    if args.extended && id == TableId::T6 {
        let extended = compute_table6_extended(workers)?;
        content.push_str("\n# extended\n");
        content.push_str(&extended.render(format));
    }
    emit(args.out.as_ref(), &content)?;
    if result.diffs.is_empty() {
        eprintln!("golden comparison: match");
        Ok(())
    } else {
        for d in &result.diffs {
            eprintln!("golden mismatch: {d}");
        }
        std::process::exit(1);
    }
}
