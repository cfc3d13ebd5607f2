use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ir::{Module, Opcode, Operation, TensorType};

use super::exec::Program;
use super::InterpError;

/// Deterministic, shape-only stand-in for execution time.
///
/// Every op is charged `unit × output elements`, except `dot` (`unit × m·n·k`)
/// and `reduce` (`unit × input elements`). Units default to 1.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostModel {
    pub unit: BTreeMap<Opcode, f64>,
}

impl CostModel {
    pub fn unit_cost(&self, opcode: Opcode) -> f64 {
        self.unit.get(&opcode).copied().unwrap_or(1.0)
    }

    pub fn op_cost(&self, op: &Operation, operand_types: &[TensorType]) -> f64 {
        let work = match op.opcode {
            Opcode::Dot => {
                let (a, b) = (&operand_types[0], &operand_types[1]);
                a.shape[0] * a.shape[1] * b.shape[1]
            }
            Opcode::Reduce => operand_types[0].num_elements(),
            _ => op.result_type.num_elements(),
        };
        self.unit_cost(op.opcode) * work as f64
    }
}

/// Static cost of running `entry` once under the default cost model.
pub fn cost_of(m: &Module, entry: &str) -> Result<f64, InterpError> {
    cost_of_with(m, entry, &CostModel::default())
}

pub fn cost_of_with(m: &Module, entry: &str, model: &CostModel) -> Result<f64, InterpError> {
    Ok(Program::compile(m, entry, model)?.cost())
}
