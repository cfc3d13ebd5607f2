//! NSGA-II over patches, the persistent Pareto archive and run artifacts.

mod archive;
mod artifacts;
mod engine;
mod hypervolume;
mod nsga;

pub use archive::{Member, ParetoArchive};
pub use artifacts::{frontier_csv, history_jsonl, summary, write_artifacts, ArchiveFile};
pub use engine::{
    initial_population, run_search, step_generation, Evaluator, Generation, GenerationRecord, Individual, SearchConfig,
    SearchError, SearchOutcome,
};
pub use hypervolume::hypervolume;
pub use nsga::{crowded_cmp, crowded_order, crowding_distance, nondominated_sort, rank_all, Rank};
