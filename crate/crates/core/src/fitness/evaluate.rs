use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::data::Split;
use super::workload::{Mode, Workload};
use crate::genome::{apply_patch, Patch};
use crate::interp::{InterpError, Program};
use crate::ir::Module;
use crate::Tensor;

/// The two minimized objectives. Invalid individuals carry infinities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fitness {
    #[serde(with = "maybe_inf")]
    pub cost: f64,
    #[serde(with = "maybe_inf")]
    pub error: f64,
    pub valid: bool,
}

impl Fitness {
    pub fn invalid() -> Self {
        Fitness { cost: f64::INFINITY, error: f64::INFINITY, valid: false }
    }

    /// Pareto dominance under minimization of both objectives.
    pub fn dominates(&self, other: &Fitness) -> bool {
        self.cost <= other.cost && self.error <= other.error && (self.cost < other.cost || self.error < other.error)
    }
}

/// JSON has no infinity; write it as the string "inf".
mod maybe_inf {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

fn with_weights(head: &[&Tensor], weights: &[Tensor]) -> Vec<Tensor> {
    head.iter().map(|t| (*t).clone()).chain(weights.iter().cloned()).collect()
}

fn finite(ts: &[Tensor]) -> bool {
    ts.iter().all(Tensor::all_finite)
}

/// Run `steps` SGD steps of `m`'s train_step from its initial weights over
/// the workload's search split. `None` when the weights stop being finite.
pub fn train(w: &Workload, m: &Module, steps: usize) -> Result<Option<Vec<Tensor>>, InterpError> {
    let program = Program::compile(m, "train_step", &w.cost_model)?;
    let mut weights = w.initial_weights(m);
    let batches = w.search.full_batches().max(1);
    for s in 0..steps {
        let batch = w.search.batch(s % batches);
        weights = program.run(with_weights(&[&batch.x, &batch.y], &weights))?;
        if !finite(&weights) {
            return Ok(None);
        }
    }
    Ok(Some(weights))
}

/// Misclassification rate of `m`'s forward with `weights` on `split`;
/// 1.0 if any probability is not finite.
pub fn error_rate(w: &Workload, m: &Module, weights: &[Tensor], split: &Split) -> Result<f64, InterpError> {
    let program = Program::compile(m, "forward", &w.cost_model)?;
    let mut wrong = 0usize;
    for b in 0..split.eval_batches() {
        let batch = split.batch(b);
        let out = program.run(with_weights(&[&batch.x], weights))?;
        let probs = out[0].as_floats().ok_or_else(|| InterpError::BadData("forward must return floats".into()))?;
        let classes = out[0].shape().last().copied().unwrap_or(1);
        for (r, &label) in batch.labels.iter().enumerate() {
            let row = &probs[r * classes..(r + 1) * classes];
            if row.iter().any(|v| !v.is_finite()) {
                return Ok(1.0);
            }
            // first maximum wins ties
            let guess = row.iter().enumerate().fold(0, |best, (i, &v)| if v > row[best] { i } else { best });
            if guess != label as usize {
                wrong += 1;
            }
        }
    }
    Ok(wrong as f64 / split.len() as f64)
}

/// Score an already-patched module on `split` (the search split during
/// search). Training always learns from the search split.
pub fn evaluate_module(w: &Workload, m: &Module, split: &Split) -> Fitness {
    let run = || -> Result<Fitness, InterpError> {
        match w.mode {
            Mode::Training => {
                let cost = Program::compile(m, "train_step", &w.cost_model)?.cost() * w.steps as f64;
                let error = match train(w, m, w.steps)? {
                    Some(weights) => error_rate(w, m, &weights, split)?,
                    None => 1.0,
                };
                Ok(Fitness { cost, error, valid: true })
            }
            Mode::Prediction => {
                let cost = Program::compile(m, "forward", &w.cost_model)?.cost() * split.eval_batches() as f64;
                let error = error_rate(w, m, &w.initial_weights(m), split)?;
                Ok(Fitness { cost, error, valid: true })
            }
        }
    };
    run().unwrap_or_else(|_| Fitness::invalid())
}

/// Fitness of `p` on the search split.
pub fn evaluate(original: &Module, p: &Patch, w: &Workload) -> Fitness {
    match apply_patch(original, p) {
        Ok(applied) => evaluate_module(w, &applied.module, &w.search),
        Err(_) => Fitness::invalid(),
    }
}

/// Post-hoc score of `p` on the holdout split.
pub fn holdout_report(original: &Module, p: &Patch, w: &Workload) -> Fitness {
    match apply_patch(original, p) {
        Ok(applied) => evaluate_module(w, &applied.module, &w.holdout),
        Err(_) => Fitness::invalid(),
    }
}
