use std::fmt::Write;

use super::module::{FunctionBody, Global, Initializer, Module};
use super::op::{Attr, Operation};

#[derive(Clone, Copy, Debug, Default)]
pub struct PrintOptions {
    /// Replace dense literals longer than this with `dense<...N values>`.
    /// The output is then for display only and does not parse.
    pub elide_dense_over: Option<usize>,
    /// Skip globals entirely.
    pub functions_only: bool,
}

pub fn print_module(m: &Module) -> String {
    print_module_with(m, PrintOptions::default())
}

/// Canonical text of the functions alone; used as a cache key for variants
/// (globals are never edited).
pub fn print_functions(m: &Module) -> String {
    print_module_with(m, PrintOptions { functions_only: true, ..Default::default() })
}

pub fn print_module_with(m: &Module, opts: PrintOptions) -> String {
    let mut out = String::new();
    if !opts.functions_only {
        for g in &m.globals {
            print_global(&mut out, g, opts);
        }
    }
    // ids are implicit while they count up by one, module-wide
    let mut expected_id: u32 = 0;
    for f in &m.functions {
        print_function(&mut out, f, &mut expected_id, opts);
    }
    out
}

fn float(v: f64) -> String {
    format!("{v:?}")
}

fn float_list(out: &mut String, values: &[f64], opts: PrintOptions) {
    if let Some(limit) = opts.elide_dense_over {
        if values.len() > limit {
            let _ = write!(out, "...{} values", values.len());
            return;
        }
    }
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&float(*v));
    }
    out.push(']');
}

fn print_global(out: &mut String, g: &Global, opts: PrintOptions) {
    let _ = write!(out, "global @{} : {} = ", g.name, g.ty);
    match &g.init {
        Initializer::Dense(v) => {
            out.push_str("dense<");
            float_list(out, v, opts);
            out.push('>');
        }
        Initializer::Uniform { seed, low, high } => {
            let _ = write!(out, "uniform<seed = {seed}, low = {}, high = {}>", float(*low), float(*high));
        }
    }
    out.push('\n');
}

fn print_function(out: &mut String, f: &FunctionBody, expected_id: &mut u32, opts: PrintOptions) {
    let _ = write!(out, "func @{}(", f.name);
    for (i, p) in f.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}: {}", p.value, p.ty);
    }
    out.push_str(") -> (");
    for (i, t) in f.return_types.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{t}");
    }
    out.push_str(") {\n");
    for op in &f.ops {
        print_op(out, op, *expected_id, opts);
        *expected_id = op.id.0.wrapping_add(1);
    }
    out.push_str("  return");
    for (i, v) in f.returns.iter().enumerate() {
        out.push_str(if i == 0 { " " } else { ", " });
        let _ = write!(out, "{v}");
    }
    out.push_str("\n}\n");
}

pub(crate) fn format_attr(out: &mut String, a: &Attr, opts: PrintOptions) {
    match a {
        Attr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Attr::Float(v) => out.push_str(&float(*v)),
        Attr::Ints(v) => {
            out.push('[');
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{x}");
            }
            out.push(']');
        }
        Attr::Dense(v) => {
            out.push_str("dense<");
            float_list(out, v, opts);
            out.push('>');
        }
        Attr::Ident(s) => out.push_str(s),
    }
}

fn print_op(out: &mut String, op: &Operation, expected_id: u32, opts: PrintOptions) {
    let _ = write!(out, "  {} = {}", op.result, op.opcode);
    for (i, v) in op.operands.iter().enumerate() {
        out.push_str(if i == 0 { " " } else { ", " });
        let _ = write!(out, "{v}");
    }
    if !op.attrs.is_empty() {
        out.push_str(" {");
        for (i, (k, v)) in op.attrs.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{k} = ");
            format_attr(out, v, opts);
        }
        out.push('}');
    }
    let _ = write!(out, " : {}", op.result_type);
    if op.id.0 != expected_id {
        let _ = write!(out, " #{}", op.id.0);
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse::parse_module;

    #[test]
    fn identity_function_is_three_lines() {
        let text = "func @id(%x: tensor<4xf32>) -> (tensor<4xf32>) {\n  return %x\n}\n";
        let m = parse_module(text).unwrap();
        let printed = print_module(&m);
        assert_eq!(printed, text);
        assert_eq!(printed.lines().count(), 3);
        assert_eq!(print_module(&m), printed);
    }

    #[test]
    fn non_sequential_ids_survive() {
        let text = "func @f(%a: tensor<2xf32>) -> (tensor<2xf32>) {\n  %b = negate %a : tensor<2xf32>\n  %c = negate %b : tensor<2xf32> #900\n  %d = add %b, %c : tensor<2xf32> #7\n  %e = negate %d : tensor<2xf32>\n  return %e\n}\n";
        let m = parse_module(text).unwrap();
        assert_eq!(print_module(&m), text);
        let ids: Vec<u32> = m.functions[0].ops.iter().map(|o| o.id.0).collect();
        assert_eq!(ids, vec![0, 900, 7, 8]);
    }

    #[test]
    fn special_floats_round_trip() {
        let text = "func @f() -> (tensor<3xf32>) {\n  %c = constant {value = dense<[inf, -inf, 1e-7]>} : tensor<3xf32>\n  return %c\n}\n";
        let m = parse_module(text).unwrap();
        assert_eq!(print_module(&m), text);
    }
}
