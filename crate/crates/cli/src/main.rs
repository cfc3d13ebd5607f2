//! `tensor-evo`: run searches, inspect archived individuals, re-evaluate them.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{threads_from_env, RunConfig, WorkloadKind};
use similar::{ChangeTag, TextDiff};
use tensor_evo::fitness::{build_2fcnet_workload, build_prediction_workload, evaluate_module, Workload};
use tensor_evo::genome::apply_patch;
use tensor_evo::ir::{parse_module, print_functions, print_module, Module};
use tensor_evo::search::{run_search, write_artifacts, ArchiveFile, Member};

#[derive(Parser)]
#[command(name = "tensor-evo", version, about = "Evolve tensor programs for cost and error")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a search and write its artifacts to <out>/run-<seed>.
    Run(RunArgs),
    /// Show an archived individual's patch, variant and diff.
    Inspect(Pick),
    /// Re-evaluate an archived individual.
    Eval {
        #[command(flatten)]
        pick: Pick,
        /// Score on the holdout split instead of the search split.
        #[arg(long)]
        holdout: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    workload: Option<WorkloadKind>,
    #[arg(long)]
    dataset_dir: Option<PathBuf>,
}

#[derive(Args)]
struct Pick {
    /// A run directory or its archive.json.
    archive: PathBuf,
    /// Position in the archive (ordered by cost).
    #[arg(long, default_value_t = 0)]
    index: usize,
}

/// Failures split by exit status.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T> Classify<T> for Result<T> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(Failure::Usage)
    }

    fn runtime(self) -> Result<T, Failure> {
        self.map_err(Failure::Runtime)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Inspect(pick) => cmd_inspect(&pick),
        Command::Eval { pick, holdout } => cmd_eval(&pick, holdout),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn build_workload(cfg: &RunConfig) -> Result<Workload> {
    let wc = cfg.workload_config();
    Ok(match cfg.workload {
        WorkloadKind::Train2fc => build_2fcnet_workload(&wc)?,
        WorkloadKind::Predict2fc => build_prediction_workload(&wc)?,
    })
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).usage()?,
        None => RunConfig::default(),
    };
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.generations {
        cfg.generations = v;
    }
    if let Some(v) = args.population {
        cfg.population = v;
    }
    if let Some(v) = args.out {
        cfg.out = v;
    }
    if let Some(v) = args.workload {
        cfg.workload = v;
    }
    if let Some(v) = args.dataset_dir {
        cfg.dataset_dir = v;
    }
    let threads = threads_from_env().usage()?;
    cfg.check().usage()?;
    if let Ok(abs) = cfg.dataset_dir.canonicalize() {
        cfg.dataset_dir = abs;
    }
    let workload = build_workload(&cfg).context("building workload").usage()?;

    let dir = cfg.run_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display())).runtime()?;
    fs::write(dir.join("config.toml"), cfg.to_toml()).context("writing config copy").runtime()?;
    fs::write(dir.join("original.tir"), print_module(&workload.module))
        .context("writing original.tir")
        .runtime()?;

    eprintln!("searching: population {}, {} generations, seed {}", cfg.population, cfg.generations, cfg.seed);
    let outcome = run_search(&cfg.search_config(threads), &workload, &mut |r| {
        eprintln!(
            "gen {:>3}: best error {:.4}, best cost {:.4e}, front {}, archive {}, hypervolume {:.4e}, evaluations {}",
            r.generation,
            r.best_error,
            r.best_cost,
            r.front.len(),
            r.archive_size,
            r.hypervolume,
            r.evaluations
        );
    })
    .context("search failed")
    .runtime()?;
    write_artifacts(&dir, &outcome).with_context(|| format!("writing artifacts to {}", dir.display())).runtime()?;
    print!("{}", tensor_evo::search::summary(&outcome));
    println!("artifacts in {}", dir.display());
    Ok(())
}

struct Loaded {
    dir: PathBuf,
    archive: ArchiveFile,
    member: Member,
}

fn load_member(pick: &Pick) -> Result<Loaded, Failure> {
    let path = if pick.archive.is_dir() { pick.archive.join("archive.json") } else { pick.archive.clone() };
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display())).usage()?;
    let archive: ArchiveFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).usage()?;
    let member = archive
        .archive
        .get(pick.index)
        .cloned()
        .ok_or_else(|| anyhow!("index {} out of range: archive has {} members", pick.index, archive.archive.len()))
        .usage()?;
    Ok(Loaded { dir, archive, member })
}

fn load_original(dir: &Path) -> Result<Module, Failure> {
    let path = dir.join("original.tir");
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display())).usage()?;
    parse_module(&text).with_context(|| format!("parsing {}", path.display())).usage()
}

fn cmd_inspect(pick: &Pick) -> Result<(), Failure> {
    let loaded = load_member(pick)?;
    let original = load_original(&loaded.dir)?;
    let m = &loaded.member;
    println!("individual {}: cost {} error {}", pick.index, m.fitness.cost, m.fitness.error);
    if m.patch.is_empty() {
        println!("no edits");
    } else {
        println!("patch:\n{}", serde_json::to_string_pretty(&m.patch).unwrap());
    }
    let applied = apply_patch(&original, &m.patch).context("applying patch").runtime()?;
    let before = print_functions(&original);
    let after = print_functions(&applied.module);
    println!("variant:\n{after}");
    println!("diff:");
    for change in TextDiff::from_lines(&before, &after).iter_all_changes() {
        let sign = match change.tag() {
            ChangeTag::Delete => "-",
            ChangeTag::Insert => "+",
            ChangeTag::Equal => continue,
        };
        print!("{sign}{change}");
    }
    Ok(())
}

fn cmd_eval(pick: &Pick, holdout: bool) -> Result<(), Failure> {
    let loaded = load_member(pick)?;
    let cfg = RunConfig::load(&loaded.dir.join("config.toml")).usage()?;
    cfg.check().usage()?;
    let workload = build_workload(&cfg).context("building workload").usage()?;
    let applied = apply_patch(&workload.module, &loaded.member.patch).context("applying patch").runtime()?;
    let split = if holdout { &workload.holdout } else { &workload.search };
    let fit = evaluate_module(&workload, &applied.module, split);
    if !fit.valid {
        return Err(Failure::Runtime(anyhow!("individual {} failed to execute", pick.index)));
    }
    println!("split {}: cost {} error {}", split.name(), fit.cost, fit.error);
    let archived = if holdout { loaded.member.holdout } else { Some(loaded.member.fitness) };
    if let Some(a) = archived {
        if a == fit {
            println!("matches archive (seed {})", loaded.archive.seed);
        } else {
            bail_runtime(format!("archived cost {} error {} differ", a.cost, a.error))?;
        }
    }
    Ok(())
}

fn bail_runtime(msg: String) -> Result<(), Failure> {
    Err(Failure::Runtime(anyhow::Error::msg(msg)))
}

