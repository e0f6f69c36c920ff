use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bootperc::experiments::{self, PointSummary};
use bootperc::graphgen::{self, clamped_pair_count, expected_edges};
use bootperc::percolation::{run_bootstrap, select_seeds, SeedSpec};
use bootperc::thresholds::{er_thresholds, threshold_report};
use bootperc::weights::{alt_weights_chung_lu, build_weights};
use bootperc::{Graph, RngStream, WeightSequence};

#[derive(Debug, Parser)]
#[command(
    name = "bootperc",
    version,
    about = "Bootstrap percolation on Chung-Lu power-law random graphs"
)]
struct Cli {
    /// Master seed for every random stream
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print machine-readable JSON on stdout
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for `sweep` (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Only log errors
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weight sequences
    #[command(subcommand)]
    Weights(WeightsCmd),
    /// Random graph samplers
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Run bootstrap percolation on an edge-list file
    Percolate(PercolateArgs),
    /// Closed-form thresholds
    Thresholds(ThresholdsArgs),
    /// Run a Monte Carlo sweep from a JSON config
    Sweep(SweepArgs),
    /// Summarize a sweep CSV
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
enum WeightsCmd {
    /// Build a deterministic power-law weight sequence
    Gen(WeightsGenArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    /// min(n^zeta, x0 (n/i)^(1/(beta-1)))
    Canonical,
    /// d (beta-2)/(beta-1) (n/(i+i0))^(1/(beta-1))
    ChungLu,
}

#[derive(Debug, Args)]
struct WeightsGenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long, required_if_eq("family", "canonical"))]
    zeta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, value_enum, default_value_t = Family::Canonical)]
    family: Family,
    /// Average degree (chung-lu family)
    #[arg(long, required_if_eq("family", "chung-lu"))]
    d: Option<f64>,
    /// Index offset (chung-lu family)
    #[arg(long, default_value_t = 0.0)]
    i0: f64,
    /// Output file, one weight per line (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GraphCmd {
    /// Sample CL(w) from a weights file
    Gen(GraphGenArgs),
    /// Sample G(n, p)
    Gnp(GnpArgs),
}

#[derive(Debug, Args)]
struct GraphGenArgs {
    #[arg(long)]
    weights: PathBuf,
    /// Restrict to the kernel of vertices with weight >= f
    #[arg(long)]
    kernel: Option<f64>,
    /// Sample the kernel jointly with G(N_f, p_f)
    #[arg(long, requires_all = ["kernel", "gnp_out"])]
    coupled: bool,
    /// Edge list for the coupled G(N_f, p_f)
    #[arg(long, requires = "coupled")]
    gnp_out: Option<PathBuf>,
    /// Edge-list output (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GnpArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Strategy {
    Uniform,
    Bernoulli,
    Smallest,
    Kernel,
    Explicit,
}

#[derive(Debug, Args)]
struct PercolateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    r: u32,
    #[arg(long, value_enum)]
    seed_strategy: Strategy,
    /// Seed count (expected count for bernoulli)
    #[arg(long, required_if_eq_any([("seed_strategy", "uniform"), ("seed_strategy", "bernoulli"), ("seed_strategy", "smallest"), ("seed_strategy", "kernel")]))]
    a: Option<f64>,
    /// Kernel cutoff for the kernel strategy
    #[arg(long, required_if_eq("seed_strategy", "kernel"))]
    f: Option<f64>,
    /// Weights file for the smallest and kernel strategies
    #[arg(long, required_if_eq_any([("seed_strategy", "smallest"), ("seed_strategy", "kernel")]))]
    weights: Option<PathBuf>,
    /// Comma-separated vertex ids for the explicit strategy
    #[arg(
        long,
        value_delimiter = ',',
        required_if_eq("seed_strategy", "explicit")
    )]
    seeds: Vec<usize>,
    /// Trace JSON output (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct ThresholdsArgs {
    #[command(subcommand)]
    er: Option<ThresholdsCmd>,
    #[arg(long, required = true)]
    n: Option<f64>,
    #[arg(long, required = true)]
    beta: Option<f64>,
    #[arg(long, required = true)]
    zeta: Option<f64>,
    #[arg(long, required = true)]
    r: Option<u32>,
    /// Seed size for the a-dependent quantities
    #[arg(long)]
    a: Option<f64>,
    /// Minimum weight of the canonical sequence built when --a is given
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    /// Override the measured tail constant in f(n)
    #[arg(long)]
    gamma1: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum ThresholdsCmd {
    /// Erdős–Rényi thresholds T_c, A_c, B_c
    Er(ErArgs),
}

#[derive(Debug, Args)]
struct ErArgs {
    #[arg(long = "N")]
    big_n: f64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    r: u32,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV output; overrides output_path in the config
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Sweep config, used to express seed sizes as multiples of a_c
    #[arg(long)]
    config: Option<PathBuf>,
    /// Plot-ready CSV (default: printed after the table)
    #[arg(long)]
    plot_out: Option<PathBuf>,
}

/// Bad input detected by the front end itself.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn is_validation(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<Usage>().is_some()
            || e.downcast_ref::<bootperc::Error>()
                .is_some_and(bootperc::Error::is_validation)
    })
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprintln!("bootperc {} argv={:?}", env!("CARGO_PKG_VERSION"), argv);
            }
            e.exit()
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    eprintln!(
        "bootperc {} argv={:?} seed={}",
        env!("CARGO_PKG_VERSION"),
        argv,
        cli.seed
    );

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_validation(&err) { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Weights(WeightsCmd::Gen(a)) => weights_gen(cli, a),
        Command::Graph(GraphCmd::Gen(a)) => graph_gen(cli, a),
        Command::Graph(GraphCmd::Gnp(a)) => graph_gnp(cli, a),
        Command::Percolate(a) => percolate(cli, a),
        Command::Thresholds(a) => thresholds(cli, a),
        Command::Sweep(a) => sweep(cli, a),
        Command::Report(a) => report(cli, a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Writes to `path`, or to stdout when there is none. A closed stdout pipe is not an error.
fn emit(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            body(&mut w)
                .and_then(|_| w.flush())
                .with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut out = io::stdout().lock();
            match body(&mut out).and_then(|_| out.flush()) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r.context("writing stdout"),
            }
        }
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    emit(None, |w| writeln!(w, "{text}"))
}

fn read_weights(path: &Path) -> Result<WeightSequence> {
    WeightSequence::read_from(open(path)?)
        .with_context(|| format!("reading weights from {}", path.display()))
}

fn read_graph(path: &Path) -> Result<Graph> {
    Graph::read_edge_list(open(path)?)
        .with_context(|| format!("reading edge list from {}", path.display()))
}

#[derive(Serialize)]
struct WeightsSummary {
    n: usize,
    total: f64,
    max_weight: f64,
    min_weight: f64,
    gamma1: Option<f64>,
    gamma2: Option<f64>,
    plateau: Option<usize>,
    out: Option<PathBuf>,
}

fn weights_gen(cli: &Cli, a: &WeightsGenArgs) -> Result<()> {
    let ws = match a.family {
        Family::Canonical => build_weights(a.n, a.beta, a.zeta.expect("required by clap"), a.x0)?,
        Family::ChungLu => alt_weights_chung_lu(a.n, a.beta, a.d.expect("required by clap"), a.i0)?,
    };
    if a.out.is_none() && cli.json {
        return Err(usage(
            "--json needs --out, since the weights themselves go to stdout otherwise",
        ));
    }
    emit(a.out.as_deref(), |w| ws.write_to(w))?;
    let law = ws.law();
    let summary = WeightsSummary {
        n: ws.n(),
        total: ws.total(),
        max_weight: ws.max_weight(),
        min_weight: ws.min_weight(),
        gamma1: law.map(|l| l.gamma1),
        gamma2: law.map(|l| l.gamma2),
        plateau: law.map(|l| l.plateau),
        out: a.out.clone(),
    };
    if cli.json {
        print_json(&summary)?;
    } else {
        log::info!(
            "n={} W={:.6} max={:.6} gamma1={:?} gamma2={:?}",
            summary.n,
            summary.total,
            summary.max_weight,
            summary.gamma1,
            summary.gamma2
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct GraphSummary {
    n: usize,
    m: usize,
    seed: u64,
    expected_edges: Option<f64>,
    clamped_pairs: Option<u64>,
    kernel_size: Option<usize>,
    p_f: Option<f64>,
    gnp_m: Option<usize>,
    out: Option<PathBuf>,
}

fn graph_gen(cli: &Cli, a: &GraphGenArgs) -> Result<()> {
    let ws = read_weights(&a.weights)?;
    let mut rng = RngStream::new(cli.seed, 0);
    let mut summary = GraphSummary {
        n: 0,
        m: 0,
        seed: cli.seed,
        expected_edges: Some(expected_edges(&ws)),
        clamped_pairs: Some(clamped_pair_count(&ws)),
        kernel_size: None,
        p_f: None,
        gnp_m: None,
        out: a.out.clone(),
    };
    let g = match (a.kernel, a.coupled) {
        (Some(f), true) => {
            let ck = graphgen::sample_coupled_kernel(&ws, f, &mut rng)?;
            let gnp_out = a.gnp_out.as_deref().expect("required by clap");
            emit(Some(gnp_out), |w| ck.gnp.write_edge_list(w))?;
            summary.kernel_size = Some(ck.cl_kernel.n());
            summary.p_f = Some(ck.p_f);
            summary.gnp_m = Some(ck.gnp.m());
            ck.cl_kernel
        }
        (Some(f), false) => {
            let kernel: Vec<usize> = ws.kernel(f).collect();
            if kernel.is_empty() {
                return Err(bootperc::Error::EmptyKernel(f).into());
            }
            summary.kernel_size = Some(kernel.len());
            let full = graphgen::sample_chung_lu(&ws, &mut rng);
            graphgen::induced_subgraph(&full, &kernel)?
        }
        (None, _) => graphgen::sample_chung_lu(&ws, &mut rng),
    };
    summary.n = g.n();
    summary.m = g.m();
    if a.out.is_none() && cli.json {
        return Err(usage(
            "--json needs --out, since the edge list goes to stdout otherwise",
        ));
    }
    emit(a.out.as_deref(), |w| g.write_edge_list(w))?;
    if cli.json {
        print_json(&summary)?;
    } else {
        log::info!(
            "sampled n={} m={} (expected {:.1})",
            summary.n,
            summary.m,
            expected_edges(&ws)
        );
    }
    Ok(())
}

fn graph_gnp(cli: &Cli, a: &GnpArgs) -> Result<()> {
    let g = graphgen::sample_gnp(a.n, a.p, &mut RngStream::new(cli.seed, 0))?;
    if a.out.is_none() && cli.json {
        return Err(usage(
            "--json needs --out, since the edge list goes to stdout otherwise",
        ));
    }
    emit(a.out.as_deref(), |w| g.write_edge_list(w))?;
    let summary = GraphSummary {
        n: g.n(),
        m: g.m(),
        seed: cli.seed,
        expected_edges: Some(a.p * (a.n as f64) * (a.n as f64 - 1.0) / 2.0),
        clamped_pairs: None,
        kernel_size: None,
        p_f: None,
        gnp_m: None,
        out: a.out.clone(),
    };
    if cli.json {
        print_json(&summary)?;
    } else {
        log::info!("sampled G({}, {}) with m={}", a.n, a.p, g.m());
    }
    Ok(())
}

fn whole(a: f64, what: &str) -> Result<usize> {
    if a >= 0.0 && a.fract() == 0.0 && a <= usize::MAX as f64 {
        Ok(a as usize)
    } else {
        Err(usage(format!(
            "--a must be a nonnegative integer for the {what} strategy, got {a}"
        )))
    }
}

fn percolate(cli: &Cli, a: &PercolateArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let ws = a.weights.as_deref().map(read_weights).transpose()?;
    let count = a.a.unwrap_or(0.0);
    let spec = match a.seed_strategy {
        Strategy::Uniform => SeedSpec::Uniform {
            a: whole(count, "uniform")?,
        },
        Strategy::Bernoulli => SeedSpec::Bernoulli { a: count },
        Strategy::Smallest => SeedSpec::SmallestWeights {
            a: whole(count, "smallest")?,
        },
        Strategy::Kernel => SeedSpec::UniformInKernel {
            f: a.f.expect("required by clap"),
            a: whole(count, "kernel")?,
        },
        Strategy::Explicit => SeedSpec::Explicit(a.seeds.clone()),
    };
    let seeds = select_seeds(&spec, g.n(), ws.as_ref(), &mut RngStream::new(cli.seed, 1))?;
    let trace = run_bootstrap(&g, &seeds, a.r)?;
    let summary = trace.summary();
    let text = serde_json::to_string_pretty(&summary)?;
    emit(a.out.as_deref(), |w| writeln!(w, "{text}"))?;
    if a.out.is_some() && cli.json {
        emit(None, |w| writeln!(w, "{text}"))?;
    }
    log::info!(
        "|A_0|={} |A_f|={} rounds={} no_evolution={}",
        trace.seed.len(),
        trace.final_size(),
        trace.rounds.len(),
        trace.no_evolution()
    );
    Ok(())
}

fn thresholds(cli: &Cli, a: &ThresholdsArgs) -> Result<()> {
    if let Some(ThresholdsCmd::Er(er)) = &a.er {
        let t = er_thresholds(er.big_n, er.p, er.r)?;
        if cli.json {
            return print_json(&t);
        }
        println!("N    = {}", t.n);
        println!("p    = {}", t.p);
        println!("r    = {}", t.r);
        println!("T_c  = {:.6}", t.t_c);
        println!("A_c  = {:.6}", t.a_c);
        println!("B_c  = {:.6e}", t.b_c);
        return Ok(());
    }
    let (n, beta, zeta, r) = (
        a.n.expect("required by clap"),
        a.beta.expect("required by clap"),
        a.zeta.expect("required by clap"),
        a.r.expect("required by clap"),
    );
    let ws = match a.a {
        Some(_) => {
            if !(n >= 1.0 && n.fract() == 0.0 && n <= 1e9) {
                return Err(usage(format!(
                    "--a needs an integer n <= 1e9 to build weights, got {n}"
                )));
            }
            Some(build_weights(n as usize, beta, zeta, a.x0)?)
        }
        None => None,
    };
    let rep = threshold_report(n, beta, zeta, r, a.a, ws.as_ref(), a.gamma1)?;
    if cli.json {
        return print_json(&rep);
    }
    println!("n          = {}", rep.n);
    println!("beta       = {}", rep.beta);
    println!("zeta       = {}", rep.zeta);
    println!("r          = {}", rep.r);
    println!("regime     = {:?}", rep.regime);
    println!("a_c        = {:.6} (n^{:.6})", rep.a_c, rep.a_c_exponent);
    if let (Some(v), Some(e)) = (rep.a_c_plus, rep.a_c_plus_exponent) {
        println!("a_c_plus   = {v:.6} (n^{e:.6})");
    }
    if let Some(a) = rep.a {
        println!("a          = {a}");
        if let Some(f) = rep.f_n {
            println!("f(n)       = {f:.6}");
        }
        if let Some(flags) = rep.f_flags {
            println!(
                "N_f        = {} (f < n^zeta: {}, a < N_f: {}, a f < n: {})",
                flags.kernel_size,
                flags.below_max_weight,
                flags.seeds_fit_kernel,
                flags.sublinear_product
            );
        }
        if let Some(p) = rep.p_inf {
            println!(
                "p_Inf      = {p:.6e}{}",
                if rep.p_inf_clamped { " (clamped)" } else { "" }
            );
        }
        if let Some(b) = rep.first_moment_bound {
            println!("E[X] bound = {b:.6e}");
        }
        if let Some(w) = &rep.witness {
            println!("witness    = {:?}, satisfied: {}", w.condition, w.satisfied);
            if let Some(b) = &w.best {
                println!(
                    "  best f   = {:.4}: N_f={} N_f p_Inf={:.4} margin={:.4}",
                    b.f, b.n_f, b.n_f_p_inf, b.margin
                );
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary {
    records: usize,
    out: Option<PathBuf>,
    points: Vec<PointSummary>,
}

fn sweep(cli: &Cli, a: &SweepArgs) -> Result<()> {
    let mut cfg = experiments::read_config(&a.config)?;
    if let Some(out) = &a.out {
        cfg.output_path = Some(out.clone());
    }
    if cfg.output_path.is_none() {
        return Err(usage(
            "no output: pass --out or set output_path in the config",
        ));
    }
    let records = experiments::run_sweep(&cfg, cli.threads)?;
    let points =
        experiments::summarize(&records, |n| experiments::reference_critical(&cfg, n).ok());
    log::info!(
        "wrote {} records to {}",
        records.len(),
        cfg.output_path.as_ref().unwrap().display()
    );
    if cli.json {
        print_json(&SweepSummary {
            records: records.len(),
            out: cfg.output_path.clone(),
            points,
        })?;
    } else {
        print_table(&points);
    }
    Ok(())
}

fn print_table(points: &[PointSummary]) {
    println!(
        "{:>10} {:>12} {:>9} {:>8} {:>12} {:>10} {:>10} {:>17} {:>8}",
        "n", "a", "a/a_c", "reps", "final_frac", "stderr", "no_evol", "95% CI", "kernel"
    );
    for p in points {
        let ratio = p.a_over_a_c.map_or("-".into(), |x| format!("{x:.4}"));
        let kernel = p
            .mean_kernel_fraction
            .map_or("-".into(), |x| format!("{x:.4}"));
        println!(
            "{:>10} {:>12.3} {:>9} {:>8} {:>12.6} {:>10.2e} {:>10.4} {:>8.4}..{:<7.4} {:>8}",
            p.n,
            p.a,
            ratio,
            p.replicas,
            p.final_fraction.mean,
            p.final_fraction.stderr,
            p.no_evolution.p_hat,
            p.no_evolution.ci_low,
            p.no_evolution.ci_high,
            kernel
        );
    }
}

const PLOT_HEADER: &str = "n,a,a_over_a_c,final_fraction,final_fraction_stderr,no_evolution,no_evolution_ci_low,no_evolution_ci_high";

fn write_plot(w: &mut dyn Write, points: &[PointSummary]) -> io::Result<()> {
    writeln!(w, "{PLOT_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.n,
            p.a,
            p.a_over_a_c.map_or(String::new(), |x| x.to_string()),
            p.final_fraction.mean,
            p.final_fraction.stderr,
            p.no_evolution.p_hat,
            p.no_evolution.ci_low,
            p.no_evolution.ci_high
        )?;
    }
    Ok(())
}

fn report(cli: &Cli, a: &ReportArgs) -> Result<()> {
    let records = experiments::read_csv(&a.input)?;
    if records.is_empty() {
        return Err(usage(format!("{} holds no records", a.input.display())));
    }
    let cfg = a
        .config
        .as_deref()
        .map(experiments::read_config)
        .transpose()?;
    let points = experiments::summarize(&records, |n| {
        cfg.as_ref()
            .and_then(|c| experiments::reference_critical(c, n).ok())
    });
    if let Some(path) = &a.plot_out {
        emit(Some(path), |w| write_plot(w, &points))?;
    }
    if cli.json {
        return print_json(&points);
    }
    print_table(&points);
    if a.plot_out.is_none() {
        println!();
        emit(None, |w| write_plot(w, &points))?;
    }
    Ok(())
}
