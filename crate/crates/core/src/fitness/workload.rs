use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::data::{gaussian_blobs, load_dir, DataError, Dataset, Split};
use super::evaluate::train;
use super::twofc::{NetSpec, WEIGHTS};
use crate::interp::{CostModel, InterpError, Program};
use crate::ir::{Initializer, Module};
use crate::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Training,
    Prediction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSource {
    /// IDX or CSV files in a directory.
    Mnist { dir: PathBuf },
    /// Synthetic two-class Gaussian blobs.
    Blobs { features: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadConfig {
    pub data: DataSource,
    pub search_size: usize,
    pub holdout_size: usize,
    pub net: NetSpec,
    /// SGD steps per training evaluation.
    pub steps: usize,
    /// Steps used to produce the frozen weights of the prediction workload.
    pub pretrain_steps: usize,
    pub cost_model: CostModel,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            data: DataSource::Mnist { dir: PathBuf::from("data/mnist-5k") },
            search_size: 1000,
            holdout_size: 1000,
            net: NetSpec::default(),
            steps: 600,
            pretrain_steps: 3000,
            cost_model: CostModel::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WorkloadError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("network expects {expected} {what}, dataset has {found}")]
    Mismatch { what: &'static str, expected: usize, found: usize },
    #[error("baseline module: {0}")]
    Baseline(#[from] InterpError),
    #[error("baseline training diverged")]
    Diverged,
}

/// Everything needed to score a variant: the original module, the data
/// splits and the evaluation protocol.
#[derive(Debug)]
pub struct Workload {
    pub mode: Mode,
    pub module: Module,
    pub net: NetSpec,
    pub search: Split,
    pub holdout: Split,
    pub steps: usize,
    pub cost_model: CostModel,
}

fn load(cfg: &WorkloadConfig) -> Result<(Dataset, Dataset), WorkloadError> {
    let need = cfg.search_size + cfg.holdout_size;
    let data = match &cfg.data {
        DataSource::Mnist { dir } => load_dir(dir)?,
        DataSource::Blobs { features, seed } => gaussian_blobs(need, *features, *seed),
    };
    if data.len() < need {
        return Err(DataError::TooSmall { have: data.len(), need }.into());
    }
    if data.features != cfg.net.inputs {
        return Err(WorkloadError::Mismatch { what: "input features", expected: cfg.net.inputs, found: data.features });
    }
    if data.classes != cfg.net.classes {
        return Err(WorkloadError::Mismatch { what: "classes", expected: cfg.net.classes, found: data.classes });
    }
    Ok((data.slice(0..cfg.search_size), data.slice(cfg.search_size..need)))
}

/// Training workload: each evaluation retrains the variant from the fixed
/// initial weights and scores it on the search split.
pub fn build_2fcnet_workload(cfg: &WorkloadConfig) -> Result<Workload, WorkloadError> {
    let (search, holdout) = load(cfg)?;
    let b = cfg.net.batch;
    Ok(Workload {
        mode: Mode::Training,
        module: cfg.net.module(),
        net: cfg.net.clone(),
        search: Split::new("search", search, b),
        holdout: Split::new("holdout", holdout, b),
        steps: cfg.steps,
        cost_model: cfg.cost_model.clone(),
    })
}

/// Prediction workload over the baseline network trained for
/// `pretrain_steps` and frozen into the module's globals.
pub fn build_prediction_workload(cfg: &WorkloadConfig) -> Result<Workload, WorkloadError> {
    let trainer = build_2fcnet_workload(cfg)?;
    let weights = train(&trainer, &trainer.module, cfg.pretrain_steps)?.ok_or(WorkloadError::Diverged)?;
    let mut module = trainer.module.clone();
    freeze(&mut module, &weights);
    module.functions.retain(|f| f.name == "forward");
    Ok(Workload { mode: Mode::Prediction, module, steps: 0, ..trainer })
}

/// Replace the weight globals' initializers with `weights`.
pub fn freeze(m: &mut Module, weights: &[Tensor]) {
    for (name, w) in WEIGHTS.iter().zip(weights) {
        let g = m.globals.iter_mut().find(|g| g.name == *name).expect("weight global");
        g.init = Initializer::Dense(w.to_f64_vec());
    }
}

impl Workload {
    /// Functions that mutation may touch.
    pub fn scope(&self) -> Vec<String> {
        match self.mode {
            Mode::Training => vec!["forward".into(), "train_step".into()],
            Mode::Prediction => vec!["forward".into()],
        }
    }

    /// Weight tensors as initialized by `m`'s globals.
    pub fn initial_weights(&self, m: &Module) -> Vec<Tensor> {
        WEIGHTS
            .iter()
            .map(|name| {
                let g = m.global(name).expect("weight global");
                Tensor::from_f64(g.ty.clone(), &g.init.materialize(g.ty.num_elements())).expect("global fits its type")
            })
            .collect()
    }

    /// Whether `m` runs one training step and one forward pass on the first
    /// search batch.
    pub fn smoke(&self, m: &Module) -> bool {
        let batch = self.search.batch(0);
        let weights = self.initial_weights(m);
        let forward = || -> Result<(), InterpError> {
            let p = Program::compile(m, "forward", &self.cost_model)?;
            let mut inputs = vec![batch.x.clone()];
            inputs.extend(weights.iter().cloned());
            p.run(inputs).map(|_| ())
        };
        let step = || -> Result<(), InterpError> {
            let p = Program::compile(m, "train_step", &self.cost_model)?;
            let mut inputs = vec![batch.x.clone(), batch.y.clone()];
            inputs.extend(weights.iter().cloned());
            p.run(inputs).map(|_| ())
        };
        forward().is_ok() && (self.mode == Mode::Prediction || step().is_ok())
    }
}
