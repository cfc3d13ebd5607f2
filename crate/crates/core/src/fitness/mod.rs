//! Scoring variants: datasets, the 2fcNet workload and the (cost, error)
//! evaluation protocol.

mod data;
mod evaluate;
mod twofc;
mod workload;

pub use data::{gaussian_blobs, load_csv, load_dir, load_idx, read_idx, Batch, DataError, Dataset, Split};
pub use evaluate::{error_rate, evaluate, evaluate_module, holdout_report, train, Fitness};
pub use twofc::{NetSpec, WEIGHTS};
pub use workload::{
    build_2fcnet_workload, build_prediction_workload, freeze, DataSource, Mode, Workload, WorkloadConfig, WorkloadError,
};
