//! File formats, synthetic data generation and the benchmark commands
//! around the `metric-dbscan` core.

#![deny(missing_docs)]

pub mod bench;
pub mod io;
pub mod synthetic;

pub use bench::{
    cmd_gen, cmd_run, cmd_sweep, cmd_verify, execute, load_source, sweep_dataset, Algorithm,
    Amount, BenchError, BenchRecord, Radius, RunConfig, RunOutcome, Source, SweepRow, VerifyReport,
};
pub use io::{load_clustering, load_points, save_clustering, save_points, DataError};
pub use synthetic::{generate_synthetic, Synthetic, SyntheticSpec};
