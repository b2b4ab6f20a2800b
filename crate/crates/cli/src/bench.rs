//! The `run`, `verify`, `sweep` and `gen` commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use metric_dbscan::{
    brute_force_dbscan, build_clusters, build_coarse_partition, check_equivalence, classify,
    estimate_diameter, Clustering, Dataset, DbscanParams, DistanceOracle, GonzalezParams, Label,
    LabelSet, Metric, Mismatch, Variant,
};

use crate::io::{load_points, save_clustering, save_points, DataError};
use crate::synthetic::{generate_synthetic, SyntheticSpec};

/// Command failures, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    /// Invalid flags or parameters (exit 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// Reading or writing a file failed (exit 1).
    #[error(transparent)]
    Data(#[from] DataError),
    /// The clustering core rejected its input (exit 1).
    #[error(transparent)]
    Core(metric_dbscan::Error),
    /// `verify` found a disagreement with the reference (exit 3).
    #[error("mismatch against brute force: {0}")]
    Mismatch(#[from] Mismatch),
    /// One sweep point failed.
    #[error("sweep failed at ratio {ratio}: {source}")]
    Sweep {
        /// The failing ratio.
        ratio: f64,
        /// What went wrong.
        source: Box<BenchError>,
    },
}

impl BenchError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Mismatch(_) => 3,
            BenchError::Sweep { source, .. } => source.exit_code(),
            BenchError::Data(_) | BenchError::Core(_) => 1,
        }
    }
}

impl From<metric_dbscan::Error> for BenchError {
    fn from(e: metric_dbscan::Error) -> Self {
        match e {
            metric_dbscan::Error::Config(m) => BenchError::Config(m.into()),
            other => BenchError::Core(other),
        }
    }
}

/// Where the points come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// A CSV point file.
    Input(PathBuf),
    /// A generated dataset.
    Synthetic(SyntheticSpec),
}

/// A count given directly or as a fraction of `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amount {
    /// Exactly this many.
    Absolute(usize),
    /// `round(fraction · n)`, at least 1.
    Fraction(f64),
}

impl Amount {
    /// Resolves against a dataset size.
    pub fn resolve(self, n: usize) -> Result<usize, BenchError> {
        match self {
            Amount::Absolute(k) => Ok(k),
            Amount::Fraction(f) if f > 0.0 && f < 1.0 => {
                Ok(((f * n as f64).round() as usize).max(1))
            }
            Amount::Fraction(f) => Err(BenchError::Config(format!(
                "fraction {f} must lie strictly between 0 and 1"
            ))),
        }
    }
}

/// The partition radius given directly or relative to the diameter estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    /// Fixed `r`.
    Absolute(f64),
    /// `r = ratio · Δ̃`.
    Ratio(f64),
}

/// Accelerated variant or the brute-force baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Partition-accelerated DBSCAN.
    Accelerated(Variant),
    /// All-pairs DBSCAN.
    Brute,
}

impl Algorithm {
    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Accelerated(v) => v.name(),
            Algorithm::Brute => "brute",
        }
    }
}

/// Everything a command needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Input points.
    pub source: Source,
    /// Distance function.
    pub metric: Metric,
    /// DBSCAN radius.
    pub epsilon: f64,
    /// DBSCAN density threshold.
    pub min_pts: Amount,
    /// Partition radius.
    pub r: Radius,
    /// Outlier bound.
    pub z_tilde: Amount,
    /// Sampler slack.
    pub delta: f64,
    /// Sampler failure knob.
    pub eta: f64,
    /// Which algorithm to run.
    pub algorithm: Algorithm,
    /// Seed for sampling and the diameter estimate.
    pub seed: u64,
    /// Clustering CSV (run), sweep table (sweep) or point file (gen).
    pub out: Option<PathBuf>,
    /// Bench record file.
    pub stats: Option<PathBuf>,
    /// Repetitions per sweep point; timings report the median.
    pub repeat: usize,
    /// Whether to report wall-clock times; without them every output is
    /// byte-for-byte reproducible.
    pub timings: bool,
}

impl RunConfig {
    /// A config with the default knobs: `MinPts = n/1000`, `z̃ = n/100`,
    /// `r = 0.1·Δ̃`, `δ = 1`, `η = 0.1`, metric1.
    pub fn new(source: Source, epsilon: f64) -> Self {
        RunConfig {
            source,
            metric: Metric::Euclidean,
            epsilon,
            min_pts: Amount::Fraction(0.001),
            r: Radius::Ratio(0.1),
            z_tilde: Amount::Fraction(0.01),
            delta: 1.0,
            eta: 0.1,
            algorithm: Algorithm::Accelerated(Variant::Metric1),
            seed: 0,
            out: None,
            stats: None,
            repeat: 3,
            timings: true,
        }
    }
}

/// Measurements of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    /// Algorithm name.
    pub algorithm: &'static str,
    /// Metric name.
    pub metric: &'static str,
    /// Number of points.
    pub n: usize,
    /// Dimension.
    pub dim: usize,
    /// ε.
    pub epsilon: f64,
    /// Resolved MinPts.
    pub min_pts: usize,
    /// Resolved `r` (0 for brute force).
    pub r: f64,
    /// Resolved `z̃` (0 for brute force).
    pub z_tilde: usize,
    /// `Δ̃`, when `r` was given as a ratio.
    pub diameter_estimate: Option<f64>,
    /// Seconds spent estimating the diameter.
    pub diameter_secs: f64,
    /// Seconds in the partition phase.
    pub part1_secs: f64,
    /// Seconds in classification and joining.
    pub part2_secs: f64,
    /// Sum of the three timings.
    pub total_secs: f64,
    /// Evaluations for the diameter estimate.
    pub diameter_evals: u64,
    /// Evaluations in the partition phase.
    pub part1_evals: u64,
    /// Evaluations in classification and joining.
    pub part2_evals: u64,
    /// Sum of the three counts.
    pub total_evals: u64,
    /// `|E|`.
    pub num_centers: usize,
    /// `|X_z̃|`.
    pub num_uncovered: usize,
    /// Batches drawn.
    pub rounds_run: usize,
    /// Whether the round cap ended the sampler.
    pub hit_max_rounds: bool,
    /// Mean candidate-set size.
    pub candidates_mean: f64,
    /// Largest candidate-set size.
    pub candidates_max: usize,
    /// Number of clusters.
    pub cluster_count: usize,
    /// Core points.
    pub core_count: usize,
    /// Border points.
    pub border_count: usize,
    /// Outliers.
    pub outlier_count: usize,
}

impl BenchRecord {
    /// `key=value` lines, one per field. Times print as `NA` when `timings`
    /// is off.
    pub fn to_key_values(&self, timings: bool) -> String {
        let secs = |x: f64| {
            if timings {
                format!("{x:.6}")
            } else {
                "NA".into()
            }
        };
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("algorithm", self.algorithm.into());
        kv("metric", self.metric.into());
        kv("n", self.n.to_string());
        kv("dim", self.dim.to_string());
        kv("epsilon", self.epsilon.to_string());
        kv("min_pts", self.min_pts.to_string());
        kv("r", self.r.to_string());
        kv("z_tilde", self.z_tilde.to_string());
        kv(
            "diameter_estimate",
            self.diameter_estimate
                .map_or("NA".into(), |d| d.to_string()),
        );
        kv("diameter_secs", secs(self.diameter_secs));
        kv("part1_secs", secs(self.part1_secs));
        kv("part2_secs", secs(self.part2_secs));
        kv("total_secs", secs(self.total_secs));
        kv("diameter_evals", self.diameter_evals.to_string());
        kv("part1_evals", self.part1_evals.to_string());
        kv("part2_evals", self.part2_evals.to_string());
        kv("total_evals", self.total_evals.to_string());
        kv("num_centers", self.num_centers.to_string());
        kv("num_uncovered", self.num_uncovered.to_string());
        kv("rounds_run", self.rounds_run.to_string());
        kv("hit_max_rounds", self.hit_max_rounds.to_string());
        kv("candidates_mean", format!("{:.3}", self.candidates_mean));
        kv("candidates_max", self.candidates_max.to_string());
        kv("cluster_count", self.cluster_count.to_string());
        kv("core_count", self.core_count.to_string());
        kv("border_count", self.border_count.to_string());
        kv("outlier_count", self.outlier_count.to_string());
        s
    }
}

/// Result of one run: the record plus the clustering itself.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Measurements.
    pub record: BenchRecord,
    /// Per-point labels.
    pub labels: LabelSet,
    /// Cluster ids.
    pub clustering: Clustering,
}

/// Loads or generates the configured dataset.
pub fn load_source(source: &Source) -> Result<Dataset, BenchError> {
    match source {
        Source::Input(path) => Ok(load_points(path)?),
        Source::Synthetic(spec) => generate_synthetic(spec)
            .map(|s| s.dataset)
            .map_err(BenchError::Config),
    }
}

/// Runs the configured algorithm on `data`.
pub fn execute(config: &RunConfig, data: &Dataset) -> Result<RunOutcome, BenchError> {
    let n = data.len();
    let oracle = DistanceOracle::new(data, config.metric)?;
    let dbscan = DbscanParams::new(config.epsilon, config.min_pts.resolve(n)?);
    dbscan.validate()?;

    let mut record = BenchRecord {
        algorithm: config.algorithm.name(),
        metric: config.metric.name(),
        n,
        dim: data.dim(),
        epsilon: config.epsilon,
        min_pts: dbscan.min_pts,
        r: 0.0,
        z_tilde: 0,
        diameter_estimate: None,
        diameter_secs: 0.0,
        part1_secs: 0.0,
        part2_secs: 0.0,
        total_secs: 0.0,
        diameter_evals: 0,
        part1_evals: 0,
        part2_evals: 0,
        total_evals: 0,
        num_centers: 0,
        num_uncovered: 0,
        rounds_run: 0,
        hit_max_rounds: false,
        candidates_mean: n as f64,
        candidates_max: n,
        cluster_count: 0,
        core_count: 0,
        border_count: 0,
        outlier_count: 0,
    };

    let (labels, clustering) = match config.algorithm {
        Algorithm::Brute => {
            let t = Instant::now();
            let out = brute_force_dbscan(&oracle, &dbscan)?;
            record.part2_secs = t.elapsed().as_secs_f64();
            record.part2_evals = oracle.evaluations();
            out
        }
        Algorithm::Accelerated(variant) => {
            let r = match config.r {
                Radius::Absolute(r) => r,
                Radius::Ratio(ratio) => {
                    if !(ratio > 0.0 && ratio.is_finite()) {
                        return Err(BenchError::Config(format!(
                            "r ratio {ratio} must be positive"
                        )));
                    }
                    let t = Instant::now();
                    let diameter = estimate_diameter(&oracle, config.seed);
                    record.diameter_secs = t.elapsed().as_secs_f64();
                    record.diameter_evals = oracle.evaluations();
                    record.diameter_estimate = Some(diameter);
                    ratio * diameter
                }
            };
            let sampler = GonzalezParams {
                delta: config.delta,
                eta: config.eta,
                ..GonzalezParams::new(r, config.z_tilde.resolve(n)?, variant, config.seed)
            };
            record.r = r;
            record.z_tilde = sampler.z_tilde;

            let mark = oracle.evaluations();
            let t = Instant::now();
            let partition = build_coarse_partition(&oracle, &sampler)?;
            record.part1_secs = t.elapsed().as_secs_f64();
            record.part1_evals = oracle.evaluations() - mark;

            let mark = oracle.evaluations();
            let t = Instant::now();
            let classified = classify(&oracle, &partition, &dbscan)?;
            let clustering = build_clusters(&classified.labels, &classified.core_neighborhoods);
            record.part2_secs = t.elapsed().as_secs_f64();
            record.part2_evals = oracle.evaluations() - mark;

            record.num_centers = partition.num_centers();
            record.num_uncovered = partition.uncovered().len();
            record.rounds_run = partition.rounds_run();
            record.hit_max_rounds = partition.hit_max_rounds();
            record.candidates_mean = classified.stats.mean_candidates();
            record.candidates_max = classified.stats.max_candidates();
            (classified.labels, clustering)
        }
    };

    record.total_secs = record.diameter_secs + record.part1_secs + record.part2_secs;
    record.total_evals = record.diameter_evals + record.part1_evals + record.part2_evals;
    debug_assert_eq!(record.total_evals, oracle.evaluations());
    record.cluster_count = clustering.cluster_count();
    record.core_count = labels.count(Label::Core);
    record.border_count = labels.count(Label::Border);
    record.outlier_count = labels.count(Label::Outlier);
    Ok(RunOutcome {
        record,
        labels,
        clustering,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), BenchError> {
    fs::write(path, text).map_err(|source| {
        BenchError::Data(DataError::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

/// `run`: executes one configuration, writes the clustering to `out` and the
/// record to `stats` when given. Returns the record.
pub fn cmd_run(config: &RunConfig) -> Result<BenchRecord, BenchError> {
    let data = load_source(&config.source)?;
    let outcome = execute(config, &data)?;
    if let Some(out) = &config.out {
        save_clustering(out, &outcome.labels, &outcome.clustering)?;
    }
    if let Some(stats) = &config.stats {
        write_text(stats, &outcome.record.to_key_values(config.timings))?;
    }
    Ok(outcome.record)
}

/// Summary of a successful `verify`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Record of the run under test.
    pub record: BenchRecord,
    /// Evaluations spent by the reference.
    pub brute_evals: u64,
}

/// Size above which `verify` warns that the reference will be slow.
pub const VERIFY_WARN_N: usize = 20_000;

/// `verify`: runs the configured algorithm and brute force, and checks
/// that labels and core clusters agree and that border assignments are valid.
pub fn cmd_verify(config: &RunConfig) -> Result<VerifyReport, BenchError> {
    let data = load_source(&config.source)?;
    if data.len() > VERIFY_WARN_N {
        eprintln!(
            "warning: verifying {} points runs an O(n^2) reference",
            data.len()
        );
    }
    let outcome = execute(config, &data)?;
    let reference = match config.algorithm {
        Algorithm::Brute => outcome.clone(),
        Algorithm::Accelerated(_) => execute(
            &RunConfig {
                algorithm: Algorithm::Brute,
                ..config.clone()
            },
            &data,
        )?,
    };
    let oracle = DistanceOracle::new(&data, config.metric)?;
    check_equivalence(
        &oracle,
        config.epsilon,
        (&outcome.labels, &outcome.clustering),
        (&reference.labels, &reference.clustering),
    )?;
    Ok(VerifyReport {
        brute_evals: reference.record.part2_evals,
        record: outcome.record,
    })
}

/// One row of the sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// `r / Δ̃`.
    pub ratio: f64,
    /// Median partition time.
    pub part1_secs: f64,
    /// Median classification time.
    pub part2_secs: f64,
    /// Median total time.
    pub total_secs: f64,
    /// Partition evaluations.
    pub part1_evals: u64,
    /// Classification evaluations.
    pub part2_evals: u64,
    /// `|E|`.
    pub num_centers: usize,
    /// `|X_z̃|`.
    pub num_uncovered: usize,
}

/// Header of the sweep table.
pub const SWEEP_HEADER: &str =
    "ratio,part1_time_s,part2_time_s,total_time_s,part1_dist_evals,part2_dist_evals,num_centers,num_uncovered";

/// Renders sweep rows as CSV.
pub fn sweep_csv(rows: &[SweepRow], timings: bool) -> String {
    let secs = |x: f64| {
        if timings {
            format!("{x:.6}")
        } else {
            "NA".into()
        }
    };
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for row in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            row.ratio,
            secs(row.part1_secs),
            secs(row.part2_secs),
            secs(row.total_secs),
            row.part1_evals,
            row.part2_evals,
            row.num_centers,
            row.num_uncovered
        );
    }
    s
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Runs an already loaded dataset at every `r / Δ̃` ratio.
pub fn sweep_dataset(
    config: &RunConfig,
    data: &Dataset,
    ratios: &[f64],
) -> Result<Vec<SweepRow>, BenchError> {
    if !matches!(config.algorithm, Algorithm::Accelerated(_)) {
        return Err(BenchError::Config(
            "sweep needs --variant metric1 or metric2".into(),
        ));
    }
    if config.repeat == 0 {
        return Err(BenchError::Config("repeat must be at least 1".into()));
    }
    if ratios.is_empty() {
        return Err(BenchError::Config("no ratios given".into()));
    }
    if let Some(&bad) = ratios.iter().find(|&&x| !(x > 0.0 && x <= 0.5)) {
        return Err(BenchError::Config(format!(
            "ratio {bad} is outside (0, 0.5]"
        )));
    }
    let mut rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let cfg = RunConfig {
            r: Radius::Ratio(ratio),
            ..config.clone()
        };
        let mut records = Vec::with_capacity(config.repeat);
        for _ in 0..config.repeat {
            let outcome = execute(&cfg, data).map_err(|e| BenchError::Sweep {
                ratio,
                source: Box::new(e),
            })?;
            records.push(outcome.record);
        }
        let first = &records[0];
        rows.push(SweepRow {
            ratio,
            part1_secs: median(records.iter().map(|r| r.part1_secs).collect()),
            part2_secs: median(records.iter().map(|r| r.part2_secs).collect()),
            total_secs: median(records.iter().map(|r| r.total_secs).collect()),
            part1_evals: first.part1_evals,
            part2_evals: first.part2_evals,
            num_centers: first.num_centers,
            num_uncovered: first.num_uncovered,
        });
    }
    Ok(rows)
}

/// `sweep`: writes the table to `out` when given and returns it.
pub fn cmd_sweep(config: &RunConfig, ratios: &[f64]) -> Result<String, BenchError> {
    let data = load_source(&config.source)?;
    let rows = sweep_dataset(config, &data, ratios)?;
    let csv = sweep_csv(&rows, config.timings);
    if let Some(out) = &config.out {
        write_text(out, &csv)?;
    }
    Ok(csv)
}

/// `gen`: writes a synthetic dataset as a point file.
pub fn cmd_gen(spec: &SyntheticSpec, out: &Path) -> Result<usize, BenchError> {
    let synthetic = generate_synthetic(spec).map_err(BenchError::Config)?;
    save_points(out, &synthetic.dataset)?;
    Ok(synthetic.dataset.len())
}
