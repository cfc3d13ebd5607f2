//! Analytic gradients recovered from one `train_step` versus central finite
//! differences of `@loss`, everything in f64.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tensor_evo::fitness::{build_2fcnet_workload, NetSpec, WorkloadConfig};
use tensor_evo::interp::interpret;
use tensor_evo::Tensor64;

pub struct GradReport {
    pub checked: usize,
    pub worst: f64,
    pub worst_at: String,
}

/// Checks every bias and second-layer entry plus `w1_samples` random
/// first-layer entries on the first `batch` examples of `cfg`'s search split.
pub fn check(cfg: &WorkloadConfig, batch: usize, w1_samples: usize) -> GradReport {
    let mut cfg = cfg.clone();
    cfg.net = NetSpec { batch, ..cfg.net };
    let w = build_2fcnet_workload(&cfg).unwrap();
    let m = &w.module;
    let data = w.search.batch(0);
    let x: Tensor64 = data.x.cast();
    let y: Tensor64 = data.y.cast();
    let weights: Vec<Tensor64> = w.initial_weights(m).iter().map(|t| t.cast()).collect();
    let lr = cfg.net.learning_rate;

    let mut inputs = vec![x.clone(), y.clone()];
    inputs.extend(weights.iter().cloned());
    let stepped = interpret(m, "train_step", &inputs).unwrap().outputs;

    let loss = |ws: &[Tensor64]| -> f64 {
        let mut inputs = vec![x.clone(), y.clone()];
        inputs.extend(ws.iter().cloned());
        interpret(m, "loss", &inputs).unwrap().outputs[0].as_floats().unwrap()[0]
    };

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-5;
    let mut report = GradReport { checked: 0, worst: 0.0, worst_at: String::new() };
    for (k, name) in ["w1", "b1", "w2", "b2"].iter().enumerate() {
        let n = weights[k].ty().num_elements();
        let entries: Vec<usize> = if k == 0 { sample(&mut rng, n, w1_samples.min(n)).into_vec() } else { (0..n).collect() };
        for i in entries {
            let before = weights[k].as_floats().unwrap()[i];
            let after = stepped[k].as_floats().unwrap()[i];
            let analytic = (before - after) / lr;
            let mut ws = weights.clone();
            ws[k].as_floats_mut().unwrap()[i] = before + h;
            let up = loss(&ws);
            ws[k].as_floats_mut().unwrap()[i] = before - h;
            let down = loss(&ws);
            let numeric = (up - down) / (2.0 * h);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            report.checked += 1;
            if rel > report.worst {
                report.worst = rel;
                report.worst_at = format!("{name}[{i}]: analytic {analytic:e} numeric {numeric:e}");
            }
        }
    }
    report
}
