mod common;

use common::fixtures::corpus;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensor_evo::fitness::NetSpec;
use tensor_evo::genome::{mutate, MutationConfig};
use tensor_evo::ir::*;

fn modules() -> Vec<Module> {
    let mut out: Vec<Module> = corpus().iter().map(|(_, t)| parse_module(t).unwrap()).collect();
    out.push(NetSpec::default().module());
    out
}

#[test]
fn corpus_prints_back_verbatim() {
    for (name, text) in corpus() {
        let m = parse_module(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(print_module(&m), text, "{name}");
        let again = parse_module(&print_module(&m)).unwrap();
        assert_eq!(again, m, "{name}");
    }
}

#[test]
fn twofc_round_trip_keeps_op_order() {
    let m = NetSpec::default().module();
    let text = print_module(&m);
    assert_eq!(text, print_module(&m));
    let back = parse_module(&text).unwrap();
    assert_eq!(back, m);
    for (a, b) in m.functions.iter().zip(&back.functions) {
        let ids = |f: &FunctionBody| f.ops.iter().map(|o| (o.id, o.result.clone())).collect::<Vec<_>>();
        assert_eq!(ids(a), ids(b), "@{}", a.name);
    }
}

#[test]
fn mutated_modules_round_trip() {
    let base = NetSpec { batch: 4, inputs: 6, hidden: 5, classes: 3, ..NetSpec::default() }.module();
    let cfg = MutationConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut m = base.clone();
    for step in 0..60 {
        if step % 15 == 0 {
            m = base.clone();
        }
        let (_, next) = mutate(&m, &cfg, &mut rng, &|_| true).unwrap();
        m = next;
        assert!(verify_module(&m).is_ok());
        let back = parse_module(&print_module(&m)).unwrap();
        assert_eq!(back, m, "step {step}");
    }
}

#[test]
fn whitespace_is_insignificant() {
    let text = "func @f(%a: tensor<2xf32>) -> (tensor<2xf32>) {\n  %b = add %a, %a : tensor<2xf32>\n  return %b\n}\n";
    let loose = "\n\nfunc   @f( %a : tensor<2xf32> )->( tensor<2xf32> ){\n\t%b=add %a ,%a:tensor<2xf32>\n return   %b }\n\n";
    assert_eq!(parse_module(loose).unwrap(), parse_module(text).unwrap());
}

/// Result type an op would have for the given operand types, written from
/// the opcode semantics alone. `None` when the operands are unacceptable.
fn infer(op: &Operation, t: &[TensorType]) -> Option<TensorType> {
    use ElementKind::*;
    let numeric = |k: ElementKind| k != I1;
    let ints = |name: &str| op.attr_usizes(name);
    let same = |a: &TensorType, b: &TensorType| a == b;
    match op.opcode {
        Opcode::Add | Opcode::Subtract | Opcode::Multiply | Opcode::Divide | Opcode::Maximum => {
            (same(&t[0], &t[1]) && numeric(t[0].element)).then(|| t[0].clone())
        }
        Opcode::Negate => numeric(t[0].element).then(|| t[0].clone()),
        Opcode::Exponential | Opcode::Log => (t[0].element == F32).then(|| t[0].clone()),
        Opcode::Dot => {
            let (a, b) = (&t[0], &t[1]);
            let ok = a.element == b.element && numeric(a.element) && a.rank() == 2 && b.rank() == 2 && a.shape[1] == b.shape[0];
            ok.then(|| TensorType::new(vec![a.shape[0], b.shape[1]], a.element))
        }
        Opcode::Transpose => {
            let perm = ints("perm")?;
            let mut sorted = perm.clone();
            sorted.sort();
            (sorted == (0..t[0].rank()).collect::<Vec<_>>())
                .then(|| TensorType::new(perm.iter().map(|&p| t[0].shape[p]).collect::<Vec<_>>(), t[0].element))
        }
        Opcode::Reshape => (t[0].num_elements() == op.result_type.num_elements() && t[0].element == op.result_type.element)
            .then(|| op.result_type.clone()),
        Opcode::BroadcastInDim => {
            let dims = ints("dims")?;
            let r = &op.result_type;
            let ok = dims.len() == t[0].rank()
                && t[0].element == r.element
                && dims.iter().enumerate().all(|(i, &d)| d < r.rank() && (t[0].shape[i] == 1 || t[0].shape[i] == r.shape[d]));
            ok.then(|| r.clone())
        }
        Opcode::Reduce => {
            let axis = op.attr_int("axis")? as usize;
            if axis >= t[0].rank() || !numeric(t[0].element) {
                return None;
            }
            let mut shape = t[0].shape.clone();
            shape.remove(axis);
            Some(TensorType::new(shape, t[0].element))
        }
        Opcode::Pad => {
            let (low, high) = (ints("low")?, ints("high")?);
            let ok = t[1].rank() == 0 && t[1].element == t[0].element && low.len() == t[0].rank() && high.len() == t[0].rank();
            ok.then(|| TensorType::new((0..t[0].rank()).map(|d| low[d] + t[0].shape[d] + high[d]).collect::<Vec<_>>(), t[0].element))
        }
        Opcode::Slice => {
            let (start, limit) = (ints("start")?, ints("limit")?);
            let ok = start.len() == t[0].rank()
                && limit.len() == t[0].rank()
                && (0..t[0].rank()).all(|d| start[d] < limit[d] && limit[d] <= t[0].shape[d]);
            ok.then(|| TensorType::new((0..t[0].rank()).map(|d| limit[d] - start[d]).collect::<Vec<_>>(), t[0].element))
        }
        Opcode::Compare => same(&t[0], &t[1]).then(|| TensorType::new(t[0].shape.clone(), I1)),
        Opcode::Select => {
            let ok = t[0].element == I1 && t[0].shape == t[1].shape && same(&t[1], &t[2]);
            ok.then(|| t[1].clone())
        }
        Opcode::Convert => (t[0].shape == op.result_type.shape).then(|| op.result_type.clone()),
        Opcode::Constant | Opcode::Iota => Some(op.result_type.clone()),
    }
}

enum Corruption {
    Swap,
    Truncate,
}

/// Applies one random corruption to a verifying module. Returns `None` when
/// the chosen op offers nothing to corrupt.
fn corrupt(m: &Module, rng: &mut ChaCha8Rng) -> Option<(Module, Corruption)> {
    let fi = rng.gen_range(0..m.functions.len());
    let f = &m.functions[fi];
    if f.ops.is_empty() {
        return None;
    }
    let oi = rng.gen_range(0..f.ops.len());
    let op = &f.ops[oi];
    if op.operands.is_empty() {
        return None;
    }
    let mut out = m.clone();
    if rng.gen_bool(0.5) {
        let slot = rng.gen_range(0..op.operands.len());
        let types: Vec<TensorType> = op.operands.iter().map(|v| f.type_of(v).unwrap().clone()).collect();
        let wrong: Vec<ValueId> = f
            .values_in_scope(oi)
            .into_iter()
            .filter(|(_, t)| {
                let mut ts = types.clone();
                ts[slot] = t.clone();
                infer(op, &ts).as_ref() != Some(&op.result_type)
            })
            .map(|(v, _)| v)
            .collect();
        let pick = wrong.choose(rng)?.clone();
        out.functions[fi].ops[oi].operands[slot] = pick;
        Some((out, Corruption::Swap))
    } else {
        let keep = rng.gen_range(0..op.operands.len());
        out.functions[fi].ops[oi].operands.truncate(keep);
        Some((out, Corruption::Truncate))
    }
}

#[test]
fn verifier_catches_single_op_corruptions() {
    let pool = modules();
    for m in &pool {
        for f in &m.functions {
            for op in &f.ops {
                let ts: Vec<TensorType> = op.operands.iter().map(|v| f.type_of(v).unwrap().clone()).collect();
                assert_eq!(infer(op, &ts).as_ref(), Some(&op.result_type), "oracle rejects {op:?}");
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    let (mut done, mut swaps, mut missed) = (0, 0, Vec::new());
    while done < 1000 {
        let m = pool.choose(&mut rng).unwrap();
        let Some((bad, kind)) = corrupt(m, &mut rng) else { continue };
        done += 1;
        if matches!(kind, Corruption::Swap) {
            swaps += 1;
        }
        if verify_module(&bad).is_ok() {
            missed.push(print_functions(&bad));
        }
    }
    assert!(swaps > 300, "only {swaps} swaps");
    assert!(missed.is_empty(), "{} corruptions verified, first:\n{}", missed.len(), missed[0]);
}
