use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metric_dbscan::{Metric, Variant};
use metric_dbscan_cli::{
    cmd_gen, cmd_run, cmd_sweep, cmd_verify, Algorithm, Amount, BenchError, Radius, RunConfig,
    Source, SyntheticSpec,
};

#[derive(Parser)]
#[command(
    name = "metric-dbscan",
    version,
    about = "Exact metric DBSCAN with k-center accelerated range queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one dataset and report phase timings and distance counts.
    Run(RunArgs),
    /// Compare an accelerated run against brute-force DBSCAN.
    Verify(RunArgs),
    /// Run a list of r/Δ̃ ratios and print a CSV table.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated r/Δ̃ ratios in (0, 0.5].
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.05,0.1,0.2,0.3,0.4,0.5"
        )]
        ratios: Vec<f64>,
    },
    /// Write a synthetic dataset to a CSV file.
    Gen {
        /// key=value list, e.g. n=20000,dim=500,k=100,radius=2,outliers=200,box=100,spread=0.05
        #[arg(long, default_value = "")]
        synthetic: String,
        #[arg(long, env = "METRIC_DBSCAN_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Manhattan,
    Angular,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Metric1,
    Metric2,
    Brute,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "synthetic"]))]
struct RunArgs {
    /// CSV point file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generate the data instead: key=value list (n, dim, k, radius, outliers, box, spread, seed).
    #[arg(long)]
    synthetic: Option<String>,
    #[arg(long, value_enum, default_value = "euclidean")]
    metric: MetricArg,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, conflicts_with = "min_pts_frac")]
    min_pts: Option<usize>,
    /// MinPts as a fraction of n (default 0.001).
    #[arg(long)]
    min_pts_frac: Option<f64>,
    #[arg(long, conflicts_with = "r_ratio")]
    r: Option<f64>,
    /// r as a fraction of the diameter estimate (default 0.1).
    #[arg(long)]
    r_ratio: Option<f64>,
    #[arg(long, conflicts_with = "z_frac")]
    z_tilde: Option<usize>,
    /// z̃ as a fraction of n (default 0.01).
    #[arg(long)]
    z_frac: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, value_enum, default_value = "metric1")]
    variant: VariantArg,
    #[arg(long, env = "METRIC_DBSCAN_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Clustering CSV for run, table for sweep.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bench record (key=value lines).
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    repeat: usize,
    /// Print NA instead of wall-clock times so outputs are reproducible.
    #[arg(long)]
    no_timings: bool,
}

fn synthetic_spec(text: &str, seed: u64) -> Result<SyntheticSpec, BenchError> {
    let mut spec: SyntheticSpec = text.parse().map_err(BenchError::Config)?;
    if !text.split(',').any(|kv| kv.trim().starts_with("seed=")) {
        spec.seed = seed;
    }
    Ok(spec)
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, BenchError> {
        let source = match (&self.input, &self.synthetic) {
            (Some(path), None) => Source::Input(path.clone()),
            (None, Some(s)) => Source::Synthetic(synthetic_spec(s, self.seed)?),
            _ => {
                return Err(BenchError::Config(
                    "give exactly one of --input, --synthetic".into(),
                ))
            }
        };
        let defaults = RunConfig::new(source, self.epsilon);
        Ok(RunConfig {
            metric: match self.metric {
                MetricArg::Euclidean => Metric::Euclidean,
                MetricArg::Manhattan => Metric::Manhattan,
                MetricArg::Angular => Metric::Angular,
            },
            min_pts: match (self.min_pts, self.min_pts_frac) {
                (Some(k), _) => Amount::Absolute(k),
                (None, Some(f)) => Amount::Fraction(f),
                (None, None) => defaults.min_pts,
            },
            r: match (self.r, self.r_ratio) {
                (Some(r), _) => Radius::Absolute(r),
                (None, Some(x)) => Radius::Ratio(x),
                (None, None) => defaults.r,
            },
            z_tilde: match (self.z_tilde, self.z_frac) {
                (Some(z), _) => Amount::Absolute(z),
                (None, Some(f)) => Amount::Fraction(f),
                (None, None) => defaults.z_tilde,
            },
            delta: self.delta,
            eta: self.eta,
            algorithm: match self.variant {
                VariantArg::Metric1 => Algorithm::Accelerated(Variant::Metric1),
                VariantArg::Metric2 => Algorithm::Accelerated(Variant::Metric2),
                VariantArg::Brute => Algorithm::Brute,
            },
            seed: self.seed,
            out: self.out.clone(),
            stats: self.stats.clone(),
            repeat: self.repeat,
            timings: !self.no_timings,
            ..defaults
        })
    }
}

fn with_workers<T>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, BenchError>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

fn dispatch(command: Command) -> Result<(), BenchError> {
    match command {
        Command::Run(args) => {
            let config = args.config()?;
            let record = with_workers(args.workers, || cmd_run(&config))??;
            print!("{}", record.to_key_values(config.timings));
        }
        Command::Verify(args) => {
            let config = args.config()?;
            let report = with_workers(args.workers, || cmd_verify(&config))??;
            println!(
                "verify: ok ({} vs brute force, {} points, {} clusters, {} evaluations vs {})",
                report.record.algorithm,
                report.record.n,
                report.record.cluster_count,
                report.record.total_evals,
                report.brute_evals
            );
        }
        Command::Sweep { run, ratios } => {
            let config = run.config()?;
            let csv = with_workers(run.workers, || cmd_sweep(&config, &ratios))??;
            if config.out.is_none() {
                print!("{csv}");
            }
        }
        Command::Gen {
            synthetic,
            seed,
            out,
        } => {
            let spec = synthetic_spec(&synthetic, seed)?;
            let n = cmd_gen(&spec, &out)?;
            eprintln!("wrote {n} points to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let BenchError::Mismatch(m) = &e {
                eprintln!("verify: FAILED, first counterexample: {m}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
