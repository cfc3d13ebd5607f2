use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tensor_evo::fitness::{DataSource, NetSpec, WorkloadConfig};
use tensor_evo::interp::CostModel;
use tensor_evo::search::SearchConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum WorkloadKind {
    #[serde(rename = "train-2fc")]
    #[value(name = "train-2fc")]
    Train2fc,
    #[serde(rename = "predict-2fc")]
    #[value(name = "predict-2fc")]
    Predict2fc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Mnist,
    Blobs,
}

/// Everything a run needs; written back into the run directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub workload: WorkloadKind,
    pub dataset: DatasetKind,
    pub dataset_dir: PathBuf,
    pub blob_features: usize,
    pub blob_seed: u64,
    pub search_size: usize,
    pub holdout_size: usize,

    pub batch: usize,
    pub hidden: usize,
    pub learning_rate: f64,
    pub init_seed: u64,
    pub steps: usize,
    pub pretrain_steps: usize,

    pub seed: u64,
    pub population: usize,
    pub generations: usize,
    pub elites: usize,
    pub initial_mutations: usize,
    pub crossover_probability: f64,
    pub mutation_probability: f64,
    pub tournament_size: usize,
    pub crossover_retries: usize,
    pub mutation_retries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_secs: Option<f64>,

    pub out: PathBuf,
    pub cost_model: CostModel,
}

impl Default for RunConfig {
    fn default() -> Self {
        let w = WorkloadConfig::default();
        let s = SearchConfig::default();
        RunConfig {
            workload: WorkloadKind::Train2fc,
            dataset: DatasetKind::Mnist,
            dataset_dir: PathBuf::from("data/mnist-5k"),
            blob_features: 8,
            blob_seed: 5,
            search_size: w.search_size,
            holdout_size: w.holdout_size,
            batch: w.net.batch,
            hidden: w.net.hidden,
            learning_rate: w.net.learning_rate,
            init_seed: w.net.init_seed,
            steps: w.steps,
            pretrain_steps: w.pretrain_steps,
            seed: s.seed,
            population: s.population,
            generations: s.generations,
            elites: s.elites,
            initial_mutations: s.initial_mutations,
            crossover_probability: s.crossover_probability,
            mutation_probability: s.mutation_probability,
            tournament_size: s.tournament_size,
            crossover_retries: s.crossover_retries,
            mutation_retries: s.mutation_retries,
            wall_clock_secs: None,
            out: PathBuf::from("out"),
            cost_model: CostModel::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn run_dir(&self) -> PathBuf {
        self.out.join(format!("run-{}", self.seed))
    }

    pub fn workload_config(&self) -> WorkloadConfig {
        let (data, inputs, classes) = match self.dataset {
            DatasetKind::Mnist => (DataSource::Mnist { dir: self.dataset_dir.clone() }, 784, 10),
            DatasetKind::Blobs => {
                (DataSource::Blobs { features: self.blob_features, seed: self.blob_seed }, self.blob_features, 2)
            }
        };
        WorkloadConfig {
            data,
            search_size: self.search_size,
            holdout_size: self.holdout_size,
            net: NetSpec {
                batch: self.batch,
                inputs,
                hidden: self.hidden,
                classes,
                learning_rate: self.learning_rate,
                init_seed: self.init_seed,
                ..NetSpec::default()
            },
            steps: self.steps,
            pretrain_steps: self.pretrain_steps,
            cost_model: self.cost_model.clone(),
        }
    }

    pub fn search_config(&self, threads: Option<usize>) -> SearchConfig {
        SearchConfig {
            population: self.population,
            elites: self.elites,
            initial_mutations: self.initial_mutations,
            crossover_probability: self.crossover_probability,
            mutation_probability: self.mutation_probability,
            tournament_size: self.tournament_size,
            generations: self.generations,
            wall_clock_secs: self.wall_clock_secs,
            seed: self.seed,
            crossover_retries: self.crossover_retries,
            mutation_retries: self.mutation_retries,
            threads,
        }
    }

    /// Problems detectable without touching the data.
    pub fn check(&self) -> Result<()> {
        self.search_config(None).validate()?;
        if self.batch == 0 || self.hidden == 0 {
            bail!("batch and hidden must be positive");
        }
        if self.search_size < self.batch {
            bail!("search_size {} is smaller than one batch of {}", self.search_size, self.batch);
        }
        if self.holdout_size == 0 {
            bail!("holdout_size must be positive");
        }
        if self.dataset == DatasetKind::Mnist && !self.dataset_dir.is_dir() {
            bail!("dataset directory {} does not exist", self.dataset_dir.display());
        }
        Ok(())
    }
}

/// Thread cap from `GEVO_MINI_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("GEVO_MINI_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!("GEVO_MINI_THREADS must be a positive integer, got {v:?}"),
        },
    }
}
