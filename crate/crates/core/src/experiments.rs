//! Monte Carlo sweeps over `(n, a)` grids.
//!
//! Every replica draws its own graph and seed set from streams keyed by the
//! grid coordinates, so results do not depend on the number of worker threads.
//! Within one `(n, replica)` all seed sizes share the same graph.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::graphgen::{sample_chung_lu, sample_gnp};
use crate::percolation::{run_bootstrap, select_seeds, PercolationTrace, SeedSpec};
use crate::rng::RngStream;
use crate::thresholds::{critical_a, er_thresholds};
use crate::weights::{build_weights, BandDecomposition, WeightSequence};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    /// Canonical power-law weights.
    ChungLu { beta: f64, zeta: f64, x0: f64 },
    /// `G(N, p)` with `N` taken from `n_values`.
    Gnp { p: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedTemplate {
    Uniform,
    Bernoulli,
    Smallest,
    Kernel { f: f64 },
}

/// A seed size, either absolute or a multiple of the critical size at each `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AValueRepr", into = "AValueRepr")]
pub enum AValue {
    Absolute(f64),
    TimesCritical(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AValueRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<AValueRepr> for AValue {
    type Error = String;

    fn try_from(v: AValueRepr) -> std::result::Result<Self, String> {
        match v {
            AValueRepr::Number(x) if x >= 0.0 && x.is_finite() => Ok(AValue::Absolute(x)),
            AValueRepr::Number(x) => Err(format!("seed size must be nonnegative, got {x}")),
            AValueRepr::Text(s) => s.parse(),
        }
    }
}

impl From<AValue> for AValueRepr {
    fn from(v: AValue) -> Self {
        match v {
            AValue::Absolute(x) => AValueRepr::Number(x),
            AValue::TimesCritical(m) => AValueRepr::Text(format!("{m}*a_c")),
        }
    }
}

impl std::str::FromStr for AValue {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let t = s.trim();
        let bad = || format!("expected a number or \"<mult>*a_c\", got \"{s}\"");
        if t == "a_c" {
            return Ok(AValue::TimesCritical(1.0));
        }
        if let Some(m) = t
            .strip_suffix("a_c")
            .and_then(|m| m.trim_end().strip_suffix('*'))
        {
            let m: f64 = m.trim().parse().map_err(|_| bad())?;
            if !(m >= 0.0 && m.is_finite()) {
                return Err(bad());
            }
            return Ok(AValue::TimesCritical(m));
        }
        match t.parse::<f64>() {
            Ok(x) if x >= 0.0 && x.is_finite() => Ok(AValue::Absolute(x)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: Model,
    pub r: u32,
    pub seed_strategy: SeedTemplate,
    pub a_values: Vec<AValue>,
    pub n_values: Vec<usize>,
    pub replicas: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Cutoff `C` for the `kernel_fraction` column (Chung-Lu only).
    #[serde(default)]
    pub kernel_c: Option<f64>,
    /// Reuse one graph per `n` across replicas; only the seeds vary.
    #[serde(default)]
    pub fixed_graph: bool,
}

const MAX_N_POINTS: usize = 1 << 14;
const MAX_A_POINTS: usize = 1 << 16;

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.replicas == 0 {
            return bad("replicas must be at least 1".into());
        }
        if self.r == 0 {
            return bad("r must be at least 1".into());
        }
        if self.n_values.is_empty() || self.a_values.is_empty() {
            return bad("n_values and a_values must be nonempty".into());
        }
        if self.n_values.len() > MAX_N_POINTS || self.a_values.len() > MAX_A_POINTS {
            return bad("too many grid points".into());
        }
        if self.replicas > u32::MAX as usize {
            return bad("too many replicas".into());
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n == 0) {
            return bad(format!("n must be positive, got {n}"));
        }
        match self.model {
            Model::ChungLu { beta, zeta, x0 } => {
                // Probe the parameter ranges on the smallest n.
                let n = *self.n_values.iter().min().unwrap();
                build_weights(n, beta, zeta, x0)?;
            }
            Model::Gnp { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("p must lie in [0,1], got {p}"));
                }
                if matches!(
                    self.seed_strategy,
                    SeedTemplate::Smallest | SeedTemplate::Kernel { .. }
                ) {
                    return bad("weight-based seed strategies need the chung_lu model".into());
                }
                if self.kernel_c.is_some() {
                    return bad("kernel_c needs the chung_lu model".into());
                }
            }
        }
        Ok(())
    }
}

pub fn read_config(path: impl AsRef<Path>) -> Result<SweepConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: SweepConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn write_config(cfg: &SweepConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(cfg).expect("config serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Critical seed size used to resolve `"<mult>*a_c"`: `a_c(n)` for Chung-Lu,
/// `A_c(N)` for `G(N, p)`.
pub fn reference_critical(cfg: &SweepConfig, n: usize) -> Result<f64> {
    match cfg.model {
        Model::ChungLu { beta, zeta, .. } => {
            Ok(critical_a(n as f64, beta, zeta, cfg.r.max(2))?.value)
        }
        Model::Gnp { p } => Ok(er_thresholds(n as f64, p, cfg.r.max(2))?.a_c),
    }
}

/// One replica's outcome at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub a: f64,
    pub replica: usize,
    pub graph_seed: u64,
    pub seed_seed: u64,
    pub r: u32,
    pub final_size: usize,
    pub rounds: usize,
    pub no_evolution: bool,
    pub kernel_fraction: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "n",
    "a",
    "replica",
    "graph_seed",
    "seed_seed",
    "r",
    "final_size",
    "rounds",
    "no_evolution",
    "kernel_fraction",
];

fn graph_stream_id(n_idx: usize, replica: usize) -> u64 {
    (1u64 << 62) | ((n_idx as u64) << 48) | replica as u64
}

fn seed_stream_id(n_idx: usize, a_idx: usize, replica: usize) -> u64 {
    (2u64 << 62) | ((n_idx as u64) << 48) | ((a_idx as u64) << 32) | replica as u64
}

/// `|A_f ∩ Ker_C| / |Ker_C|`.
pub fn kernel_coverage(trace: &PercolationTrace, ws: &WeightSequence, c: f64) -> Result<f64> {
    let k = ws.kernel(c);
    if k.is_empty() {
        return Err(Error::EmptyKernel(c));
    }
    let hit = k.clone().filter(|&v| trace.is_infected(v)).count();
    Ok(hit as f64 / k.len() as f64)
}

/// Infected fraction of each band, `Lambda_0` first.
pub fn band_coverage(trace: &PercolationTrace, bands: &BandDecomposition) -> Vec<Option<f64>> {
    bands
        .bands
        .iter()
        .map(|b| {
            if b.is_empty() {
                None
            } else {
                let hit = b.clone().filter(|&v| trace.is_infected(v)).count();
                Some(hit as f64 / b.len() as f64)
            }
        })
        .collect()
}

struct Level {
    n_idx: usize,
    n: usize,
    ws: Option<WeightSequence>,
    points: Vec<(usize, f64, SeedSpec)>,
}

impl Level {
    fn sample_graph(&self, cfg: &SweepConfig, stream: u64) -> Result<Graph> {
        let mut rng = RngStream::new(cfg.master_seed, stream);
        match (&cfg.model, &self.ws) {
            (Model::ChungLu { .. }, Some(ws)) => Ok(sample_chung_lu(ws, &mut rng)),
            (Model::Gnp { p }, _) => sample_gnp(self.n, *p, &mut rng),
            _ => unreachable!("chung_lu levels carry weights"),
        }
    }
}

fn build_level(cfg: &SweepConfig, n_idx: usize, n: usize) -> Result<Level> {
    let ws = match cfg.model {
        Model::ChungLu { beta, zeta, x0 } => Some(build_weights(n, beta, zeta, x0)?),
        Model::Gnp { .. } => None,
    };
    let needs_ac = cfg
        .a_values
        .iter()
        .any(|a| matches!(a, AValue::TimesCritical(_)));
    let a_c = if needs_ac {
        reference_critical(cfg, n)?
    } else {
        f64::NAN
    };
    let mut points = Vec::new();
    for (a_idx, av) in cfg.a_values.iter().enumerate() {
        let raw = match *av {
            AValue::Absolute(x) => x,
            AValue::TimesCritical(m) => m * a_c,
        };
        let (a, spec) = match cfg.seed_strategy {
            SeedTemplate::Bernoulli => (raw, SeedSpec::Bernoulli { a: raw }),
            SeedTemplate::Uniform => {
                let a = raw.round() as usize;
                (a as f64, SeedSpec::Uniform { a })
            }
            SeedTemplate::Smallest => {
                let a = raw.round() as usize;
                (a as f64, SeedSpec::SmallestWeights { a })
            }
            SeedTemplate::Kernel { f } => {
                let a = raw.round() as usize;
                (a as f64, SeedSpec::UniformInKernel { f, a })
            }
        };
        let pool = match (&cfg.seed_strategy, &ws) {
            (SeedTemplate::Kernel { f }, Some(ws)) => ws.kernel_size(*f),
            _ => n,
        };
        if a > pool as f64 {
            log::warn!("skipping grid point n={n}, a={a}: exceeds eligible population {pool}");
            continue;
        }
        points.push((a_idx, a, spec));
    }
    if let (Some(c), Some(ws)) = (cfg.kernel_c, &ws) {
        if ws.kernel(c).is_empty() {
            return Err(Error::EmptyKernel(c));
        }
    }
    Ok(Level {
        n_idx,
        n,
        ws,
        points,
    })
}

fn simulate_replica(
    cfg: &SweepConfig,
    level: &Level,
    replica: usize,
    shared: Option<&Graph>,
) -> Result<Vec<SweepRecord>> {
    let graph_seed = graph_stream_id(level.n_idx, if cfg.fixed_graph { 0 } else { replica });
    let owned;
    let g = match shared {
        Some(g) => g,
        None => {
            owned = level.sample_graph(cfg, graph_seed)?;
            &owned
        }
    };
    let mut out = Vec::with_capacity(level.points.len());
    for (a_idx, a, spec) in &level.points {
        let seed_seed = seed_stream_id(level.n_idx, *a_idx, replica);
        let wrap = |e: Error| Error::GridPoint {
            n: level.n,
            a: *a,
            source: Box::new(e),
        };
        let mut rng = RngStream::new(cfg.master_seed, seed_seed);
        let seeds = select_seeds(spec, level.n, level.ws.as_ref(), &mut rng).map_err(wrap)?;
        let trace = run_bootstrap(g, &seeds, cfg.r).map_err(wrap)?;
        let kernel_fraction = match (cfg.kernel_c, &level.ws) {
            (Some(c), Some(ws)) => Some(kernel_coverage(&trace, ws, c).map_err(wrap)?),
            _ => None,
        };
        out.push(SweepRecord {
            n: level.n,
            a: *a,
            replica,
            graph_seed,
            seed_seed,
            r: cfg.r,
            final_size: trace.final_size(),
            rounds: trace.rounds.len(),
            no_evolution: trace.no_evolution(),
            kernel_fraction,
        });
    }
    Ok(out)
}

/// Runs the sweep, handing each finished `n` level to `sink` in grid order.
pub fn run_sweep_with<F>(
    cfg: &SweepConfig,
    threads: Option<usize>,
    mut sink: F,
) -> Result<Vec<SweepRecord>>
where
    F: FnMut(&[SweepRecord]) -> Result<()>,
{
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;

    let mut all = Vec::new();
    for (n_idx, &n) in cfg.n_values.iter().enumerate() {
        let level = build_level(cfg, n_idx, n)?;
        let shared = if cfg.fixed_graph {
            Some(level.sample_graph(cfg, graph_stream_id(n_idx, 0))?)
        } else {
            None
        };
        let per_replica: Vec<Vec<SweepRecord>> = pool.install(|| {
            (0..cfg.replicas)
                .into_par_iter()
                .map(|rep| simulate_replica(cfg, &level, rep, shared.as_ref()))
                .collect::<Result<_>>()
        })?;
        let mut batch = Vec::with_capacity(cfg.replicas * level.points.len());
        for k in 0..level.points.len() {
            batch.extend(per_replica.iter().map(|recs| recs[k].clone()));
        }
        sink(&batch)?;
        all.extend(batch);
    }
    Ok(all)
}

/// Runs the sweep, streaming records to `cfg.output_path` when set.
pub fn run_sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<Vec<SweepRecord>> {
    match &cfg.output_path {
        None => run_sweep_with(cfg, threads, |_| Ok(())),
        Some(path) => {
            let mut w = CsvSink::create(path)?;
            let records = run_sweep_with(cfg, threads, |batch| w.write(batch))?;
            w.finish()?;
            Ok(records)
        }
    }
}

/// Incremental CSV writer with the fixed column layout.
pub struct CsvSink {
    path: PathBuf,
    inner: csv::Writer<Box<dyn Write>>,
}

impl CsvSink {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_writer(Box::new(std::io::BufWriter::new(file)), path)
    }

    pub fn from_writer(out: Box<dyn Write>, path: PathBuf) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        inner.write_record(CSV_COLUMNS)?;
        Ok(Self { path, inner })
    }

    pub fn write(&mut self, records: &[SweepRecord]) -> Result<()> {
        for r in records {
            self.inner.serialize(r)?;
        }
        self.inner.flush().map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_csv(records: &[SweepRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut sink = CsvSink::create(path)?;
    sink.write(records)?;
    sink.finish()
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(BufReader::new(file));
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Parse {
            location: path.display().to_string(),
            message: format!("unexpected CSV header {header:?}"),
        });
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub a: f64,
}

fn select(records: &[SweepRecord], point: GridPoint) -> Result<Vec<&SweepRecord>> {
    let sel: Vec<_> = records
        .iter()
        .filter(|r| r.n == point.n && r.a == point.a)
        .collect();
    if sel.is_empty() {
        return Err(Error::invalid(format!(
            "no records at grid point n={}, a={}",
            point.n, point.a
        )));
    }
    Ok(sel)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: usize,
}

/// Fraction of replicas at `point` where nothing beyond the seeds was infected.
pub fn estimate_no_evolution(records: &[SweepRecord], point: GridPoint) -> Result<Proportion> {
    let sel = select(records, point)?;
    let k = sel.iter().filter(|r| r.no_evolution).count();
    Ok(proportion(k, sel.len()))
}

pub fn proportion(successes: usize, trials: usize) -> Proportion {
    let (lo, hi) = wilson_interval(successes, trials);
    Proportion {
        p_hat: successes as f64 / trials as f64,
        ci_low: lo,
        ci_high: hi,
        trials,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub mean: f64,
    pub stderr: f64,
    pub median: f64,
    pub count: usize,
}

impl SampleStats {
    pub fn of(values: &[f64]) -> Self {
        let k = values.len();
        let mean = values.iter().sum::<f64>() / k as f64;
        let stderr = if k > 1 && values.iter().any(|&v| v != values[0]) {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if k % 2 == 1 {
            sorted[k / 2]
        } else {
            0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
        };
        Self {
            mean,
            stderr,
            median,
            count: k,
        }
    }
}

/// Statistics of `|A_f| / n` at `point`.
pub fn estimate_final_fraction(records: &[SweepRecord], point: GridPoint) -> Result<SampleStats> {
    let sel = select(records, point)?;
    let v: Vec<f64> = sel
        .iter()
        .map(|r| r.final_size as f64 / r.n as f64)
        .collect();
    Ok(SampleStats::of(&v))
}

/// Statistics of `|A_f|` at `point`.
pub fn estimate_final_size(records: &[SweepRecord], point: GridPoint) -> Result<SampleStats> {
    let sel = select(records, point)?;
    let v: Vec<f64> = sel.iter().map(|r| r.final_size as f64).collect();
    Ok(SampleStats::of(&v))
}

/// Per-point aggregate used by `report`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub n: usize,
    pub a: f64,
    pub r: u32,
    pub replicas: usize,
    pub a_over_a_c: Option<f64>,
    pub no_evolution: Proportion,
    pub final_fraction: SampleStats,
    pub mean_rounds: f64,
    pub mean_kernel_fraction: Option<f64>,
}

/// Groups records by grid point in order of first appearance.
pub fn summarize(records: &[SweepRecord], a_c: impl Fn(usize) -> Option<f64>) -> Vec<PointSummary> {
    let mut points: Vec<GridPoint> = Vec::new();
    for r in records {
        let p = GridPoint { n: r.n, a: r.a };
        if !points.contains(&p) {
            points.push(p);
        }
    }
    points
        .into_iter()
        .map(|p| {
            let sel = select(records, p).expect("point taken from records");
            let kf: Vec<f64> = sel.iter().filter_map(|r| r.kernel_fraction).collect();
            PointSummary {
                n: p.n,
                a: p.a,
                r: sel[0].r,
                replicas: sel.len(),
                a_over_a_c: a_c(p.n).map(|c| p.a / c),
                no_evolution: estimate_no_evolution(records, p).expect("nonempty"),
                final_fraction: estimate_final_fraction(records, p).expect("nonempty"),
                mean_rounds: sel.iter().map(|r| r.rounds as f64).sum::<f64>() / sel.len() as f64,
                mean_kernel_fraction: (!kf.is_empty())
                    .then(|| kf.iter().sum::<f64>() / kf.len() as f64),
            }
        })
        .collect()
}
