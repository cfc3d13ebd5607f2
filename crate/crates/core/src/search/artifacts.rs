use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::archive::Member;
use super::engine::SearchOutcome;
use crate::fitness::Fitness;

/// Contents of archive.json.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveFile {
    pub seed: u64,
    pub baseline: Fitness,
    pub baseline_holdout: Fitness,
    pub reference: (f64, f64),
    pub archive: Vec<Member>,
    pub last_generation: Vec<Member>,
}

impl From<&SearchOutcome> for ArchiveFile {
    fn from(o: &SearchOutcome) -> Self {
        ArchiveFile {
            seed: o.seed,
            baseline: o.baseline,
            baseline_holdout: o.baseline_holdout,
            reference: o.reference,
            archive: o.archive.clone(),
            last_generation: o.last_front.clone(),
        }
    }
}

pub fn history_jsonl(o: &SearchOutcome) -> String {
    o.history.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect()
}

pub fn frontier_csv(o: &SearchOutcome) -> String {
    let mut s = String::from("index,cost,error,holdout_cost,holdout_error,edits,generation\n");
    for (i, m) in o.archive.iter().enumerate() {
        let h = m.holdout.unwrap_or(Fitness::invalid());
        writeln!(s, "{i},{},{},{},{},{},{}", m.fitness.cost, m.fitness.error, h.cost, h.error, m.patch.len(), m.generation)
            .unwrap();
    }
    s
}

fn pct(a: f64, b: f64) -> f64 {
    100.0 * (a - b) / b
}

/// Human-readable run summary.
pub fn summary(o: &SearchOutcome) -> String {
    let b = o.baseline;
    let mut s = String::new();
    writeln!(s, "seed {}", o.seed).unwrap();
    writeln!(s, "generations {}", o.history.len().saturating_sub(1)).unwrap();
    if let Some(last) = o.history.last() {
        writeln!(s, "evaluations {} ({} cache hits)", last.evaluations, last.cache_hits).unwrap();
        writeln!(s, "archive hypervolume {:.6e}", last.hypervolume).unwrap();
    }
    writeln!(s, "baseline cost {} error {:.4} (holdout error {:.4})", b.cost, b.error, o.baseline_holdout.error).unwrap();
    writeln!(s, "archive size {}, last-generation front size {}", o.archive.len(), o.last_front.len()).unwrap();
    let best_err = o.archive.iter().min_by(|x, y| x.fitness.error.total_cmp(&y.fitness.error));
    let best_cost = o.archive.iter().min_by(|x, y| x.fitness.cost.total_cmp(&y.fitness.cost));
    for (label, m) in [("lowest error", best_err), ("lowest cost", best_cost)] {
        if let Some(m) = m {
            let h = m.holdout.map_or(f64::NAN, |h| h.error);
            writeln!(
                s,
                "{label}: cost {} ({:+.2}%) error {:.4} ({:+.2} points) holdout error {:.4}, {} edits",
                m.fitness.cost,
                pct(m.fitness.cost, b.cost),
                m.fitness.error,
                100.0 * (m.fitness.error - b.error),
                h,
                m.patch.len()
            )
            .unwrap();
        }
    }
    s
}

/// Write archive.json, history.jsonl, frontier.csv and summary.txt into
/// `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, o: &SearchOutcome) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let archive = serde_json::to_string_pretty(&ArchiveFile::from(o)).map_err(io::Error::other)?;
    fs::write(dir.join("archive.json"), archive + "\n")?;
    fs::write(dir.join("history.jsonl"), history_jsonl(o))?;
    fs::write(dir.join("frontier.csv"), frontier_csv(o))?;
    fs::write(dir.join("summary.txt"), summary(o))?;
    Ok(())
}
