use std::collections::HashMap;

use crate::ir::{verify_module, Module, Operation, TensorType, ValueId};
use crate::scalar::Scalar;

use super::cost::CostModel;
use super::eval::apply;
use super::tensor::TensorValue;
use super::InterpError;

struct Step {
    op: Operation,
    operands: Vec<usize>,
    out: usize,
    /// Slots whose last reader is this step.
    release: Vec<usize>,
}

/// One entry function resolved to slot indices, ready to run repeatedly.
pub struct Program {
    name: String,
    param_types: Vec<TensorType>,
    return_types: Vec<TensorType>,
    steps: Vec<Step>,
    slots: usize,
    returns: Vec<usize>,
    cost: f64,
}

#[derive(Clone, Debug)]
pub struct Execution<T> {
    pub outputs: Vec<TensorValue<T>>,
    pub cost: f64,
}

impl Program {
    /// Verify `m` and resolve `entry`. Fails with `Malformed` if the module
    /// does not verify.
    pub fn compile(m: &Module, entry: &str, model: &CostModel) -> Result<Program, InterpError> {
        let report = verify_module(m);
        if !report.is_ok() {
            return Err(InterpError::Malformed(report));
        }
        let f = m.function(entry).ok_or_else(|| InterpError::UnknownFunction(entry.to_string()))?;

        let mut slot_of: HashMap<&ValueId, usize> = HashMap::new();
        let mut types: Vec<&TensorType> = Vec::new();
        for p in &f.params {
            slot_of.insert(&p.value, types.len());
            types.push(&p.ty);
        }
        let mut steps = Vec::with_capacity(f.ops.len());
        let mut cost = 0.0;
        for op in &f.ops {
            let operands: Vec<usize> = op.operands.iter().map(|v| slot_of[v]).collect();
            let operand_types: Vec<TensorType> = operands.iter().map(|&s| types[s].clone()).collect();
            cost += model.op_cost(op, &operand_types);
            let out = types.len();
            slot_of.insert(&op.result, out);
            types.push(&op.result_type);
            steps.push(Step { op: op.clone(), operands, out, release: Vec::new() });
        }
        let returns: Vec<usize> = f.returns.iter().map(|v| slot_of[v]).collect();

        let mut last_read = vec![None; types.len()];
        for (i, s) in steps.iter().enumerate() {
            for &o in &s.operands {
                last_read[o] = Some(i);
            }
        }
        for r in &returns {
            last_read[*r] = None;
        }
        for (slot, lr) in last_read.iter().enumerate() {
            if let Some(i) = lr {
                steps[*i].release.push(slot);
            }
        }

        Ok(Program {
            name: f.name.clone(),
            param_types: f.param_types(),
            return_types: f.return_types.clone(),
            slots: types.len(),
            steps,
            returns,
            cost,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn param_types(&self) -> &[TensorType] {
        &self.param_types
    }

    pub fn return_types(&self) -> &[TensorType] {
        &self.return_types
    }

    pub fn run<T: Scalar>(&self, inputs: Vec<TensorValue<T>>) -> Result<Vec<TensorValue<T>>, InterpError> {
        if inputs.len() != self.param_types.len() {
            return Err(InterpError::InputCount { expected: self.param_types.len(), got: inputs.len() });
        }
        for (i, (v, t)) in inputs.iter().zip(&self.param_types).enumerate() {
            if v.ty() != t {
                return Err(InterpError::InputType { index: i, expected: t.clone(), got: v.ty().clone() });
            }
        }
        let mut env: Vec<Option<TensorValue<T>>> = Vec::with_capacity(self.slots);
        env.extend(inputs.into_iter().map(Some));
        env.resize_with(self.slots, || None);

        for step in &self.steps {
            let value = {
                let args: Vec<&TensorValue<T>> =
                    step.operands.iter().map(|&s| env[s].as_ref().expect("slot live")).collect();
                apply(&step.op, &args)?
            };
            env[step.out] = Some(value);
            for &s in &step.release {
                env[s] = None;
            }
        }
        Ok(self.returns.iter().map(|&s| env[s].clone().expect("returned slot live")).collect())
    }
}

/// Run `entry` once on `inputs`, returning outputs and the cost charged.
pub fn interpret<T: Scalar>(
    m: &Module,
    entry: &str,
    inputs: &[TensorValue<T>],
) -> Result<Execution<T>, InterpError> {
    interpret_with(m, entry, inputs, &CostModel::default())
}

pub fn interpret_with<T: Scalar>(
    m: &Module,
    entry: &str,
    inputs: &[TensorValue<T>],
    model: &CostModel,
) -> Result<Execution<T>, InterpError> {
    let program = Program::compile(m, entry, model)?;
    let outputs = program.run(inputs.to_vec())?;
    Ok(Execution { outputs, cost: program.cost() })
}
