//! Command-line front end: generation, sampling, runs, the brute-force
//! oracle, parameter sweeps, and the concentration checker.
//!
//! Every command is a pure function of its flags: all randomness flows
//! through explicit --seed values, outputs are byte-identical across
//! invocations. Exit codes: 0 success, 2 usage or parameter error,
//! 3 invariant violation, 1 anything else.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cost::{self, brute_force_opt, CostError, CostReport, PNorm};
use crate::engine::{self, ArrivalOrder, EngineError};
use crate::goodevent::{check_good_event, GoodEventParams};
use crate::graph::{GraphError, SignedGraph};
use crate::instances::{self, Instance, InstanceError, InstanceMeta, InstanceSpec};
use crate::metrics::MetricContext;
use crate::report::{sweep_csv, RunReport, SweepRow};
use crate::sampling::{Epsilon, SamplingError, SubsampleBundle};

pub const ENV_WORKERS: &str = "CORRCLUST_WORKERS";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or bad input parameters → exit 2.
    Usage(String),
    /// A library invariant tripped → exit 3.
    Invariant(String),
    /// I/O and everything else → exit 1.
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violation: {m}"),
            CliError::Other(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SamplingError> for CliError {
    fn from(e: SamplingError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::BadOrder(_) => CliError::Usage(e.to_string()),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl From<CostError> for CliError {
    fn from(e: CostError) -> Self {
        match e {
            CostError::TooLarge(..) | CostError::BadNorm(_) | CostError::BadOrder(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "corrclust",
    version,
    about = "Online correlation clustering with a vertex sample: generators, runs, oracles, sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Generate an instance: graph file plus a .meta.json sidecar.
    Gen(GenArgs),
    /// Draw the sample and subsamples for a graph, as JSON.
    Sample(SampleArgs),
    /// Run the online algorithm over a graph and report the clustering.
    Run(RunArgs),
    /// Exact brute-force optimum (n ≤ 12).
    Oracle(OracleArgs),
    /// Grid of runs over instance seeds × epsilons × order seeds, as CSV.
    Sweep(SweepArgs),
    /// Evaluate the seven concentration conditions on a drawn sample.
    Check(CheckArgs),
    /// Dump both estimated metrics for all pairs as CSV.
    DumpMetrics(DumpMetricsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindArg {
    Planted,
    TwoCliques,
    Clique,
    GadgetMixRo,
    GadgetMixAos,
    RandomSign,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: u32,
    /// Cluster count (planted).
    #[arg(long)]
    pub k: Option<u32>,
    /// Sign flip probability (planted).
    #[arg(long)]
    pub flip: Option<f64>,
    /// Positive-edge probability (random-sign).
    #[arg(long)]
    pub density: Option<f64>,
    /// Gadget size exponent (gadget-mix-ro): size ≈ n^delta.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Sample rate for the gadget preset (gadget-mix-aos): size ≈ log n / 4ε.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Explicit gadget size, overriding the presets.
    #[arg(long)]
    pub gadget_size: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub epsilon: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderArg {
    Ascending,
    Random,
    Adversarial,
    File,
}

impl OrderArg {
    fn name(&self) -> &'static str {
        match self {
            OrderArg::Ascending => "ascending",
            OrderArg::Random => "random",
            OrderArg::Adversarial => "adversarial",
            OrderArg::File => "file",
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Sidecar metadata; defaults to <graph>.meta.json when present.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long)]
    pub epsilon: String,
    /// Seed for the sample draw and split.
    #[arg(long)]
    pub seed: u64,
    /// Load a previously saved bundle instead of drawing one.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ascending")]
    pub order: OrderArg,
    /// Seed for --order random; defaults to --seed.
    #[arg(long)]
    pub order_seed: Option<u64>,
    /// Arrival list for --order file: one vertex id per line.
    #[arg(long)]
    pub order_file: Option<PathBuf>,
    /// Norms to evaluate, e.g. "1,2,inf".
    #[arg(long, default_value = "1,2,inf")]
    pub p: String,
    /// Report JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the run as a one-row sweep CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "inf")]
    pub p: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub flip: Option<f64>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub gadget_size: Option<u32>,
    /// Comma-separated epsilons, e.g. "0.1,0.3,0.6".
    #[arg(long)]
    pub epsilons: String,
    /// Number of instance seeds (base, base+1, ...).
    #[arg(long, default_value_t = 1)]
    pub instance_seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub instance_seed_base: u64,
    #[arg(long, value_enum, default_value = "random")]
    pub order: OrderArg,
    /// Number of order seeds per (instance, ε).
    #[arg(long, default_value_t = 1)]
    pub order_seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub order_seed_base: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub epsilon: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100.0)]
    pub c: f64,
    #[arg(long, default_value_t = 5.0)]
    pub c_prime: f64,
    /// Base of the unpinned logarithms in the size thresholds (default e).
    #[arg(long, default_value_t = std::f64::consts::E)]
    pub log_base: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DumpMetricsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub epsilon: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Sample(args) => cmd_sample(args),
        Cmd::Run(args) => cmd_run(args),
        Cmd::Oracle(args) => cmd_oracle(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Check(args) => cmd_check(args),
        Cmd::DumpMetrics(args) => cmd_dump_metrics(args),
    }
}

#[allow(clippy::too_many_arguments)]
fn build_spec(
    kind: KindArg,
    n: u32,
    k: Option<u32>,
    flip: Option<f64>,
    density: Option<f64>,
    delta: Option<f64>,
    eps: Option<f64>,
    gadget_size: Option<u32>,
    seed: u64,
) -> Result<InstanceSpec, CliError> {
    let need = |opt: Option<f64>, flag: &str| {
        opt.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this kind")))
    };
    Ok(match kind {
        KindArg::Planted => InstanceSpec::Planted {
            n,
            k: k.ok_or_else(|| CliError::Usage("--k is required for planted".into()))?,
            flip: flip.unwrap_or(0.0),
            seed,
        },
        KindArg::TwoCliques => InstanceSpec::TwoCliques { n },
        KindArg::Clique => InstanceSpec::Clique { n },
        KindArg::GadgetMixRo => InstanceSpec::GadgetMixRo {
            n,
            delta: delta.unwrap_or(1.0 / 3.0),
            gadget_size,
            seed,
        },
        KindArg::GadgetMixAos => InstanceSpec::GadgetMixAos {
            n,
            eps: need(eps, "eps")?,
            gadget_size,
            seed,
        },
        KindArg::RandomSign => InstanceSpec::RandomSign {
            n,
            density: need(density, "density")?,
            seed,
        },
    })
}

pub fn meta_path(graph: &Path) -> PathBuf {
    let mut os = graph.as_os_str().to_owned();
    os.push(".meta.json");
    PathBuf::from(os)
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let spec = build_spec(
        args.kind,
        args.n,
        args.k,
        args.flip,
        args.density,
        args.delta,
        args.eps,
        args.gadget_size,
        args.seed,
    )?;
    let Instance { graph, meta } = instances::generate(&spec)?;
    fs::write(&args.out, graph.serialize())?;
    let mut meta_json = serde_json::to_string_pretty(&meta).expect("meta serialization");
    meta_json.push('\n');
    fs::write(meta_path(&args.out), meta_json)?;
    Ok(())
}

fn load_graph(path: &Path) -> Result<SignedGraph, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(SignedGraph::parse(&text)?)
}

fn load_meta(path: &Path) -> Result<InstanceMeta, CliError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad metadata: {e}")))
}

fn parse_epsilon(s: &str) -> Result<Epsilon, CliError> {
    Ok(s.parse::<Epsilon>()?)
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let g = load_graph(&args.graph)?;
    let eps = parse_epsilon(&args.epsilon)?;
    let bundle = SubsampleBundle::draw(&g, eps, args.seed);
    let mut json = bundle.to_json();
    json.push('\n');
    write_or_print(args.out.as_deref(), &json)
}

fn parse_p_list(s: &str) -> Result<Vec<PNorm>, CliError> {
    s.split(',')
        .map(|tok| PNorm::parse(tok).map_err(CliError::from))
        .collect()
}

fn arrival_order(
    order: OrderArg,
    g: &SignedGraph,
    bundle: &SubsampleBundle,
    meta: Option<&InstanceMeta>,
    order_seed: u64,
    order_file: Option<&Path>,
) -> Result<ArrivalOrder, CliError> {
    match order {
        OrderArg::Ascending => Ok(ArrivalOrder::ascending(g.n(), &bundle.s)),
        OrderArg::Random => Ok(ArrivalOrder::shuffled(g.n(), &bundle.s, order_seed)),
        OrderArg::Adversarial => {
            let meta = meta.ok_or_else(|| {
                CliError::Usage("adversarial order needs instance metadata (--meta)".into())
            })?;
            let gadgets = meta.gadgets.as_ref().ok_or_else(|| {
                CliError::Usage("adversarial order needs gadget metadata".into())
            })?;
            Ok(instances::adversarial_order(gadgets, &bundle.s, g.n())?)
        }
        OrderArg::File => {
            let path = order_file
                .ok_or_else(|| CliError::Usage("--order file needs --order-file".into()))?;
            let text = fs::read_to_string(path)?;
            let ids: Result<Vec<u32>, _> = text.split_whitespace().map(|t| t.parse()).collect();
            let ids = ids.map_err(|e| CliError::Usage(format!("bad order file: {e}")))?;
            Ok(ArrivalOrder::new(ids, g.n(), &bundle.s)?)
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let g = load_graph(&args.graph)?;
    let eps = parse_epsilon(&args.epsilon)?;
    let bundle = match &args.bundle {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let b = SubsampleBundle::from_json(&text)
                .map_err(|e| CliError::Usage(format!("bad bundle: {e}")))?;
            SubsampleBundle::from_parts(b.epsilon, b.seed, b.s, b.s_p, b.s_d, b.s_b, b.s_r)?
        }
        None => SubsampleBundle::draw(&g, eps, args.seed),
    };
    let meta = {
        let path = args.meta.clone().unwrap_or_else(|| meta_path(&args.graph));
        if path.exists() {
            Some(load_meta(&path)?)
        } else {
            None
        }
    };
    let order_seed = args.order_seed.unwrap_or(args.seed);
    let order = arrival_order(
        args.order,
        &g,
        &bundle,
        meta.as_ref(),
        order_seed,
        args.order_file.as_deref(),
    )?;
    let clustering = engine::run(&g, &bundle, &order)?;
    let ps = parse_p_list(&args.p)?;
    let cost = CostReport::compute(&g, &clustering.cluster_of, &ps)?;
    let report = RunReport::new(
        &clustering,
        cost,
        bundle.epsilon.to_string(),
        args.seed,
        args.order.name().to_string(),
    );
    write_or_print(args.out.as_deref(), &report.to_json())?;

    if let Some(csv_path) = &args.csv {
        let row = sweep_row(
            meta.as_ref().map_or("file", |m| m.kind.as_str()),
            &g,
            args.seed,
            &bundle,
            args.order.name(),
            order_seed,
            &clustering.cluster_of,
            meta.as_ref(),
        )?;
        fs::write(csv_path, sweep_csv(&[row]))?;
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), CliError> {
    let g = load_graph(&args.graph)?;
    let p = PNorm::parse(&args.p)?;
    let opt = brute_force_opt(&g, p)?;
    let json = serde_json::json!({
        "schema": 1,
        "p": p.label(),
        "opt_cost": opt.norm,
        "opt_exact": opt.exact.to_string(),
        "opt_edge_cost": opt.edge_cost,
        "opt_y_l1": opt.y.iter().map(|&v| u64::from(v)).sum::<u64>(),
        "opt_clustering": opt.clusters,
    });
    let mut text = serde_json::to_string_pretty(&json).expect("oracle serialization");
    text.push('\n');
    write_or_print(args.out.as_deref(), &text)
}

#[allow(clippy::too_many_arguments)]
fn sweep_row(
    kind: &str,
    g: &SignedGraph,
    instance_seed: u64,
    bundle: &SubsampleBundle,
    order_source: &str,
    order_seed: u64,
    cluster_of: &[usize],
    meta: Option<&InstanceMeta>,
) -> Result<SweepRow, CliError> {
    let y = cost::disagreements(g, cluster_of)?;
    let (opt1_edge, optinf) = if g.n() <= cost::BRUTE_FORCE_MAX_N {
        let o1 = brute_force_opt(g, PNorm::Finite(1))?;
        let oi = brute_force_opt(g, PNorm::Inf)?;
        (Some(o1.edge_cost), Some(oi.exact as u32))
    } else {
        (None, None)
    };
    Ok(SweepRow {
        kind: kind.to_string(),
        n: g.n(),
        instance_seed,
        epsilon: bundle.epsilon.to_string(),
        order_source: order_source.to_string(),
        order_seed,
        edge_cost: y.edge_cost(),
        l1: y.l1(),
        l2: cost::lp_cost(&y, PNorm::Finite(2)),
        linf: y.linf(),
        opt1_edge,
        optinf,
        planted_edge_cost: meta.and_then(|m| m.planted_edge_cost),
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let epsilons: Result<Vec<Epsilon>, CliError> =
        args.epsilons.split(',').map(parse_epsilon).collect();
    let epsilons = epsilons?;
    if epsilons.is_empty() || args.instance_seeds == 0 || args.order_seeds == 0 {
        return Err(CliError::Usage(
            "sweep needs at least one epsilon, instance seed, and order seed".into(),
        ));
    }

    let mut cells = Vec::new();
    for iseed in 0..args.instance_seeds {
        for &eps in &epsilons {
            for oseed in 0..args.order_seeds {
                cells.push((
                    args.instance_seed_base + iseed,
                    eps,
                    args.order_seed_base + oseed,
                ));
            }
        }
    }

    let pool = worker_pool()?;
    let rows: Result<Vec<SweepRow>, CliError> = pool.install(|| {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|&(iseed, eps, oseed)| {
                let spec = build_spec(
                    args.kind,
                    args.n,
                    args.k,
                    args.flip,
                    args.density,
                    args.delta,
                    args.eps,
                    args.gadget_size,
                    iseed,
                )?;
                let Instance { graph, meta } = instances::generate(&spec)?;
                let bundle = SubsampleBundle::draw(&graph, eps, iseed);
                let order = arrival_order(
                    args.order,
                    &graph,
                    &bundle,
                    Some(&meta),
                    oseed,
                    None,
                )?;
                let clustering = engine::run(&graph, &bundle, &order)?;
                sweep_row(
                    &meta.kind,
                    &graph,
                    iseed,
                    &bundle,
                    args.order.name(),
                    oseed,
                    &clustering.cluster_of,
                    Some(&meta),
                )
            })
            .collect()
    });
    fs::write(&args.out, sweep_csv(&rows?))?;
    Ok(())
}

fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(val) = std::env::var(ENV_WORKERS) {
        let workers: usize = val
            .parse()
            .map_err(|_| CliError::Usage(format!("bad {ENV_WORKERS} value {val:?}")))?;
        builder = builder.num_threads(workers.max(1));
    }
    builder
        .build()
        .map_err(|e| CliError::Other(format!("worker pool: {e}")))
}

fn cmd_check(args: CheckArgs) -> Result<(), CliError> {
    let g = load_graph(&args.graph)?;
    let eps = parse_epsilon(&args.epsilon)?;
    if args.c <= 0.0 || args.c_prime <= 0.0 || args.log_base <= 1.0 {
        return Err(CliError::Usage(
            "--c and --c-prime must be positive and --log-base > 1".into(),
        ));
    }
    let bundle = SubsampleBundle::draw(&g, eps, args.seed);
    let params = GoodEventParams {
        c: args.c,
        c_prime: args.c_prime,
        log_base: args.log_base,
    };
    let report = check_good_event(&g, &bundle, &params);
    let mut json = serde_json::to_string_pretty(&report).expect("report serialization");
    json.push('\n');
    write_or_print(args.out.as_deref(), &json)
}

fn cmd_dump_metrics(args: DumpMetricsArgs) -> Result<(), CliError> {
    let g = load_graph(&args.graph)?;
    let eps = parse_epsilon(&args.epsilon)?;
    let bundle = SubsampleBundle::draw(&g, eps, args.seed);
    let ctx = MetricContext::estimated(&g, &bundle);
    write_or_print(args.out.as_deref(), &ctx.dump_csv())
}
