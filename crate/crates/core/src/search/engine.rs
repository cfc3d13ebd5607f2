use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::archive::{Member, ParetoArchive};
use super::hypervolume::hypervolume;
use super::nsga::{crowded_cmp, crowded_order, nondominated_sort, rank_all, Rank};
use crate::fitness::{evaluate_module, holdout_report, Fitness, Workload};
use crate::genome::{apply_patch, crossover, mutate, MutationConfig, Patch};
use crate::ir::{print_functions, Module};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub population: usize,
    pub elites: usize,
    pub initial_mutations: usize,
    pub crossover_probability: f64,
    pub mutation_probability: f64,
    pub tournament_size: usize,
    pub generations: usize,
    /// Stop at the first generation boundary past this many seconds.
    pub wall_clock_secs: Option<f64>,
    pub seed: u64,
    pub crossover_retries: usize,
    pub mutation_retries: usize,
    /// Evaluation threads; `None` lets the thread pool decide.
    pub threads: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population: 64,
            elites: 16,
            initial_mutations: 3,
            crossover_probability: 0.8,
            mutation_probability: 0.3,
            tournament_size: 2,
            generations: 20,
            wall_clock_secs: None,
            seed: 0,
            crossover_retries: 25,
            mutation_retries: 100,
            threads: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search config: {0}")]
    Config(String),
    #[error("the original module does not evaluate on this workload")]
    Baseline,
    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::Config(m.into()));
        if self.population == 0 {
            return bad("population must be positive");
        }
        if self.elites > self.population {
            return bad("elite count exceeds population");
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) || !(0.0..=1.0).contains(&self.mutation_probability) {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be positive");
        }
        if self.threads == Some(0) {
            return bad("threads must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub patch: Patch,
    pub fitness: Fitness,
}

/// Per-generation snapshot, one line of history.jsonl.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub evaluations: usize,
    pub cache_hits: usize,
    pub valid: usize,
    /// (cost, error) of the population's first front.
    pub front: Vec<Fitness>,
    pub archive_size: usize,
    pub hypervolume: f64,
    pub best_error: f64,
    pub best_cost: f64,
    pub crossover_first_try: usize,
    pub crossovers: usize,
    /// Holdout batches read since the search started; stays 0.
    pub holdout_reads: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub seed: u64,
    pub baseline: Fitness,
    pub baseline_holdout: Fitness,
    /// Reference point of the recorded hypervolumes.
    pub reference: (f64, f64),
    /// The persistent non-dominated archive, with holdout scores.
    pub archive: Vec<Member>,
    /// First front of the last generation, with holdout scores.
    pub last_front: Vec<Member>,
    pub history: Vec<GenerationRecord>,
    pub final_population: Vec<Individual>,
}

/// Scores patches with memoization on the variant's printed functions.
pub struct Evaluator<'w> {
    pub workload: &'w Workload,
    cache: Mutex<HashMap<String, Fitness>>,
    evaluations: Mutex<(usize, usize)>,
}

impl<'w> Evaluator<'w> {
    pub fn new(workload: &'w Workload) -> Self {
        Evaluator { workload, cache: Mutex::new(HashMap::new()), evaluations: Mutex::new((0, 0)) }
    }

    pub fn evaluate(&self, patch: &Patch) -> Fitness {
        let Ok(applied) = apply_patch(&self.workload.module, patch) else {
            self.evaluations.lock().unwrap().0 += 1;
            return Fitness::invalid();
        };
        let key = print_functions(&applied.module);
        if let Some(&f) = self.cache.lock().unwrap().get(&key) {
            let mut counts = self.evaluations.lock().unwrap();
            counts.0 += 1;
            counts.1 += 1;
            return f;
        }
        let f = evaluate_module(self.workload, &applied.module, &self.workload.search);
        self.cache.lock().unwrap().insert(key, f);
        self.evaluations.lock().unwrap().0 += 1;
        f
    }

    /// Evaluate in parallel on the current thread pool, keeping order.
    pub fn evaluate_all(&self, patches: Vec<Patch>) -> Vec<Individual> {
        patches.into_par_iter().map(|patch| Individual { fitness: self.evaluate(&patch), patch }).collect()
    }

    /// (evaluations, cache hits) so far.
    pub fn counts(&self) -> (usize, usize) {
        *self.evaluations.lock().unwrap()
    }
}

fn tournament(ranks: &[Rank], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.gen_range(0..ranks.len());
    for _ in 1..size {
        let c = rng.gen_range(0..ranks.len());
        if crowded_cmp(ranks, c, best).is_lt() {
            best = c;
        }
    }
    best
}

struct Variation<'a> {
    workload: &'a Workload,
    mutation: MutationConfig,
}

impl<'a> Variation<'a> {
    fn new(cfg: &SearchConfig, workload: &'a Workload) -> Self {
        let mutation =
            MutationConfig { scope: workload.scope(), retry_budget: cfg.mutation_retries, ..MutationConfig::default() };
        Variation { workload, mutation }
    }

    fn valid(&self) -> impl Fn(&Module) -> bool + '_ {
        |m| self.workload.smoke(m)
    }

    /// Append one mutation to `patch`; unchanged if none is found.
    fn mutated(&self, patch: Patch, rng: &mut ChaCha8Rng) -> Patch {
        let Ok(applied) = apply_patch(&self.workload.module, &patch) else { return patch };
        match mutate(&applied.module, &self.mutation, rng, &self.valid()) {
            Ok((edit, _)) => patch.with(edit),
            Err(_) => patch,
        }
    }
}

/// One generation's result.
#[derive(Clone, Debug)]
pub struct Generation {
    pub next: Vec<Individual>,
    pub offspring: Vec<Individual>,
    pub crossovers: usize,
    /// Crossovers whose first shuffle already gave valid children.
    pub first_try: usize,
}

/// Elites, tournament-bred offspring, evaluation, then elites plus a
/// tournament-selected remainder of parents and offspring.
pub fn step_generation(pop: &[Individual], cfg: &SearchConfig, evaluator: &Evaluator, rng: &mut ChaCha8Rng) -> Generation {
    let workload = evaluator.workload;
    let variation = Variation::new(cfg, workload);
    let fits: Vec<Fitness> = pop.iter().map(|i| i.fitness).collect();
    let ranks = rank_all(&fits);
    let elites: Vec<Individual> = crowded_order(&ranks).into_iter().take(cfg.elites).map(|i| pop[i].clone()).collect();

    let wanted = cfg.population - elites.len();
    let mut children = Vec::with_capacity(wanted + 1);
    let (mut crossovers, mut first_try) = (0, 0);
    while children.len() < wanted {
        let a = &pop[tournament(&ranks, cfg.tournament_size, rng)].patch;
        let b = &pop[tournament(&ranks, cfg.tournament_size, rng)].patch;
        let (mut c1, mut c2) = (a.clone(), b.clone());
        if rng.gen_bool(cfg.crossover_probability) {
            crossovers += 1;
            if let Ok(off) = crossover(a, b, &workload.module, cfg.crossover_retries, rng, &variation.valid()) {
                first_try += usize::from(off.attempts == 1);
                (c1, c2) = off.children;
            }
        }
        for c in [c1, c2] {
            let c = if rng.gen_bool(cfg.mutation_probability) { variation.mutated(c, rng) } else { c };
            children.push(c);
        }
    }
    children.truncate(wanted);
    let offspring = evaluator.evaluate_all(children);

    let merged: Vec<Individual> = pop.iter().chain(&offspring).cloned().collect();
    let merged_fits: Vec<Fitness> = merged.iter().map(|i| i.fitness).collect();
    let merged_ranks = rank_all(&merged_fits);
    let mut next = elites;
    for _ in 0..wanted {
        next.push(merged[tournament(&merged_ranks, cfg.tournament_size, rng)].clone());
    }
    Generation { next, offspring, crossovers, first_try }
}

/// Population of `cfg.population`: the original, then copies carrying
/// `cfg.initial_mutations` random edits each, all evaluated.
pub fn initial_population(cfg: &SearchConfig, evaluator: &Evaluator, rng: &mut ChaCha8Rng) -> Vec<Individual> {
    let variation = Variation::new(cfg, evaluator.workload);
    let mut patches = vec![Patch::default()];
    while patches.len() < cfg.population {
        let mut p = Patch::default();
        for _ in 0..cfg.initial_mutations {
            p = variation.mutated(p, rng);
        }
        patches.push(p);
    }
    evaluator.evaluate_all(patches)
}

fn front_of(pop: &[Individual]) -> Vec<usize> {
    let fits: Vec<Fitness> = pop.iter().map(|i| i.fitness).collect();
    nondominated_sort(&fits).into_iter().next().unwrap_or_default()
}

/// NSGA-II over patches of `workload.module`. `observe` sees each
/// generation's record as it is produced.
pub fn run_search(
    cfg: &SearchConfig,
    workload: &Workload,
    observe: &mut (dyn FnMut(&GenerationRecord) + Send),
) -> Result<SearchOutcome, SearchError> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    builder.build()?.install(|| search(cfg, workload, observe))
}

fn search(
    cfg: &SearchConfig,
    workload: &Workload,
    observe: &mut (dyn FnMut(&GenerationRecord) + Send),
) -> Result<SearchOutcome, SearchError> {
    let started = Instant::now();
    let reads_before = workload.holdout.reads();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let evaluator = Evaluator::new(workload);
    let baseline = evaluator.evaluate(&Patch::default());
    if !baseline.valid {
        return Err(SearchError::Baseline);
    }
    let reference = (1.5 * baseline.cost, 1.5 * baseline.error);

    let mut pop = initial_population(cfg, &evaluator, &mut rng);
    let mut archive = ParetoArchive::default();
    for ind in &pop {
        archive.offer(&ind.patch, ind.fitness, 0);
    }
    let mut history = Vec::new();
    let mut record = |generation: usize, pop: &[Individual], archive: &ParetoArchive, xo: (usize, usize)| {
        let (evaluations, cache_hits) = evaluator.counts();
        let valid: Vec<&Fitness> = pop.iter().map(|i| &i.fitness).filter(|f| f.valid).collect();
        let rec = GenerationRecord {
            generation,
            evaluations,
            cache_hits,
            valid: valid.len(),
            front: front_of(pop).iter().map(|&i| pop[i].fitness).collect(),
            archive_size: archive.len(),
            hypervolume: hypervolume(&archive.points(), reference),
            best_error: valid.iter().map(|f| f.error).fold(f64::INFINITY, f64::min),
            best_cost: valid.iter().map(|f| f.cost).fold(f64::INFINITY, f64::min),
            crossover_first_try: xo.0,
            crossovers: xo.1,
            holdout_reads: workload.holdout.reads() - reads_before,
        };
        observe(&rec);
        history.push(rec);
    };
    record(0, &pop, &archive, (0, 0));

    for generation in 1..=cfg.generations {
        if cfg.wall_clock_secs.is_some_and(|s| started.elapsed() > Duration::from_secs_f64(s)) {
            break;
        }
        let step = step_generation(&pop, cfg, &evaluator, &mut rng);
        for ind in &step.offspring {
            archive.offer(&ind.patch, ind.fitness, generation);
        }
        pop = step.next;
        record(generation, &pop, &archive, (step.first_try, step.crossovers));
    }

    // post hoc: only now is the holdout split read
    let with_holdout = |mut m: Member| {
        m.holdout = Some(holdout_report(&workload.module, &m.patch, workload));
        m
    };
    let baseline_holdout = holdout_report(&workload.module, &Patch::default(), workload);
    let last = history.len() - 1;
    let last_front: Vec<Member> = front_of(&pop)
        .into_iter()
        .filter(|&i| pop[i].fitness.valid)
        .map(|i| Member { patch: pop[i].patch.clone(), fitness: pop[i].fitness, generation: last, holdout: None })
        .collect();
    let archive: Vec<Member> = archive.members().to_vec().into_par_iter().map(with_holdout).collect();
    let last_front: Vec<Member> = last_front.into_par_iter().map(with_holdout).collect();
    Ok(SearchOutcome { seed: cfg.seed, baseline, baseline_holdout, reference, archive, last_front, history, final_population: pop })
}
