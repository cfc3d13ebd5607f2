use std::path::PathBuf;

use tensor_evo::fitness::{DataSource, NetSpec, WorkloadConfig};
use tensor_evo::genome::{copy_value, synthesize_resize, Binding, Edit, Patch, Rebind, ResizeRecipe, UseSite};
use tensor_evo::ir::{Module, OpId};

pub fn mnist_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-5k")
}

pub fn mnist_config() -> WorkloadConfig {
    WorkloadConfig { data: DataSource::Mnist { dir: mnist_dir() }, ..WorkloadConfig::default() }
}

/// Small, fast workload on Gaussian blobs.
pub fn blobs_config() -> WorkloadConfig {
    WorkloadConfig {
        data: DataSource::Blobs { features: 8, seed: 5 },
        search_size: 128,
        holdout_size: 64,
        net: NetSpec { batch: 16, inputs: 8, hidden: 6, classes: 2, learning_rate: 0.5, ..NetSpec::default() },
        steps: 40,
        pretrain_steps: 200,
        ..WorkloadConfig::default()
    }
}

pub fn op_id(m: &Module, function: &str, result: &str) -> OpId {
    m.function(function).unwrap().ops.iter().find(|o| o.result.as_str() == result).unwrap().id
}

/// The gradient-scaling mutation: a copy of the softmax-sum broadcast, fed
/// with the labels shrunk to a batch vector, replaces the 1/batch scale.
pub fn gradient_scaling_patch(m: &Module) -> Patch {
    let f = m.function("train_step").unwrap();
    let y = f.type_of(&"y".into()).unwrap().clone();
    let source = f.op(op_id(m, "train_step", "sb")).unwrap();
    let operand_ty = f.type_of(&source.operands[0]).unwrap().clone();
    let recipe = synthesize_resize(&y, &operand_ty);
    let base = 1u32 << 24;
    let ids = (0..recipe.op_count() as u32).map(|k| OpId(base + 1 + k)).collect();
    let id = OpId(base);
    let g = op_id(m, "train_step", "g");
    Patch::new(vec![Edit::Copy {
        source: source.id,
        function: "train_step".into(),
        before: Some(g),
        id,
        operands: vec![Binding { value: "y".into(), recipe, ids }],
        consumer: Some(Rebind {
            site: UseSite::Operand { op: g, index: 1 },
            binding: Binding { value: copy_value(id), recipe: ResizeRecipe::identity(&source.result_type), ids: vec![] },
        }),
    }])
}

/// The `.tir` files under `tests/corpus`, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "tir"))
        .collect();
    files.sort();
    assert!(files.len() >= 5, "corpus went missing from {}", dir.display());
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(p).unwrap()))
        .collect()
}
