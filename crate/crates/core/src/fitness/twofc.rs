use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::ir::{parse_module, Module};

/// Shape and hyperparameters of the two-layer network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetSpec {
    pub batch: usize,
    pub inputs: usize,
    pub hidden: usize,
    pub classes: usize,
    pub learning_rate: f64,
    pub init_seed: u64,
    pub init_range: f64,
}

impl Default for NetSpec {
    fn default() -> Self {
        NetSpec { batch: 32, inputs: 784, hidden: 16, classes: 10, learning_rate: 0.01, init_seed: 1, init_range: 0.05 }
    }
}

/// Names of the weight globals, in parameter order after the data inputs.
pub const WEIGHTS: [&str; 4] = ["w1", "b1", "w2", "b2"];

fn t(shape: &[usize]) -> String {
    let mut s = String::from("tensor<");
    for d in shape {
        write!(s, "{d}x").unwrap();
    }
    s.push_str("f32>");
    s
}

struct Body {
    text: String,
}

impl Body {
    fn op(&mut self, line: String) {
        self.text.push_str("  ");
        self.text.push_str(&line);
        self.text.push('\n');
    }
}

impl NetSpec {
    fn weight_params(&self) -> String {
        let (i, h, c) = (self.inputs, self.hidden, self.classes);
        format!("%w1: {}, %b1: {}, %w2: {}, %b2: {}", t(&[i, h]), t(&[h]), t(&[h, c]), t(&[c]))
    }

    /// Shared forward pass ending in softmax probabilities `%p`.
    fn forward_ops(&self, b: &mut Body) {
        let (n, h, c) = (self.batch, self.hidden, self.classes);
        let (nh, nc) = (t(&[n, h]), t(&[n, c]));
        b.op(format!("%h = dot %x, %w1 : {nh}"));
        b.op(format!("%b1b = broadcast_in_dim %b1 {{dims = [1]}} : {nh}"));
        b.op(format!("%ha = add %h, %b1b : {nh}"));
        b.op("%zero = constant {value = 0.0} : tensor<f32>".into());
        b.op(format!("%zh = broadcast_in_dim %zero {{dims = []}} : {nh}"));
        b.op(format!("%a = maximum %ha, %zh : {nh}"));
        b.op(format!("%o = dot %a, %w2 : {nc}"));
        b.op(format!("%b2b = broadcast_in_dim %b2 {{dims = [1]}} : {nc}"));
        b.op(format!("%logits = add %o, %b2b : {nc}"));
        b.op(format!("%mx = reduce %logits {{axis = 1, kind = max}} : {}", t(&[n])));
        b.op(format!("%mxb = broadcast_in_dim %mx {{dims = [0]}} : {nc}"));
        b.op(format!("%sh = subtract %logits, %mxb : {nc}"));
        b.op(format!("%e = exponential %sh : {nc}"));
        b.op(format!("%s = reduce %e {{axis = 1, kind = sum}} : {}", t(&[n])));
        b.op(format!("%sb = broadcast_in_dim %s {{dims = [0]}} : {nc}"));
        b.op(format!("%p = divide %e, %sb : {nc}"));
    }

    /// The module as dialect text.
    pub fn text(&self) -> String {
        let (n, i, h, c) = (self.batch, self.inputs, self.hidden, self.classes);
        let (nh, nc) = (t(&[n, h]), t(&[n, c]));
        let r = self.init_range;
        let mut out = String::new();
        writeln!(out, "// two fully connected layers, softmax output, SGD on mean cross-entropy").unwrap();
        for (k, (name, shape)) in WEIGHTS.iter().zip([vec![i, h], vec![h], vec![h, c], vec![c]]).enumerate() {
            let seed = self.init_seed.wrapping_mul(4).wrapping_add(k as u64);
            writeln!(out, "global @{name} : {} = uniform<seed = {seed}, low = {:?}, high = {r:?}>", t(&shape), -r).unwrap();
        }
        let weights = self.weight_params();

        let mut b = Body { text: String::new() };
        self.forward_ops(&mut b);
        writeln!(out, "\nfunc @forward(%x: {}, {weights}) -> ({nc}) {{", t(&[n, i])).unwrap();
        out.push_str(&b.text);
        out.push_str("  return %p\n}\n");

        let mut b = Body { text: String::new() };
        self.forward_ops(&mut b);
        b.op(format!("%d = subtract %p, %y : {nc}"));
        b.op(format!("%inv = constant {{value = {:?}}} : tensor<f32>", 1.0 / n as f64));
        b.op(format!("%scale = broadcast_in_dim %inv {{dims = []}} : {nc}"));
        b.op(format!("%g = multiply %d, %scale : {nc}"));
        b.op(format!("%gb2 = reduce %g {{axis = 0, kind = sum}} : {}", t(&[c])));
        b.op(format!("%at = transpose %a {{perm = [1, 0]}} : {}", t(&[h, n])));
        b.op(format!("%gw2 = dot %at, %g : {}", t(&[h, c])));
        b.op(format!("%w2t = transpose %w2 {{perm = [1, 0]}} : {}", t(&[c, h])));
        b.op(format!("%da = dot %g, %w2t : {nh}"));
        b.op(format!("%live = compare %ha, %zh {{kind = gt}} : tensor<{n}x{h}xi1>"));
        b.op(format!("%dh = select %live, %da, %zh : {nh}"));
        b.op(format!("%gb1 = reduce %dh {{axis = 0, kind = sum}} : {}", t(&[h])));
        b.op(format!("%xt = transpose %x {{perm = [1, 0]}} : {}", t(&[i, n])));
        b.op(format!("%gw1 = dot %xt, %dh : {}", t(&[i, h])));
        b.op(format!("%lr = constant {{value = {:?}}} : tensor<f32>", self.learning_rate));
        for (w, g, shape) in [("w1", "gw1", vec![i, h]), ("b1", "gb1", vec![h]), ("w2", "gw2", vec![h, c]), ("b2", "gb2", vec![c])] {
            let ty = t(&shape);
            b.op(format!("%lr_{w} = broadcast_in_dim %lr {{dims = []}} : {ty}"));
            b.op(format!("%step_{w} = multiply %{g}, %lr_{w} : {ty}"));
            b.op(format!("%new_{w} = subtract %{w}, %step_{w} : {ty}"));
        }
        let (w1, b1, w2, b2) = (t(&[i, h]), t(&[h]), t(&[h, c]), t(&[c]));
        writeln!(out, "\nfunc @train_step(%x: {}, %y: {nc}, {weights}) -> ({w1}, {b1}, {w2}, {b2}) {{", t(&[n, i])).unwrap();
        out.push_str(&b.text);
        out.push_str("  return %new_w1, %new_b1, %new_w2, %new_b2\n}\n");

        let mut b = Body { text: String::new() };
        self.forward_ops(&mut b);
        b.op(format!("%lp = log %p : {nc}"));
        b.op(format!("%yl = multiply %y, %lp : {nc}"));
        b.op(format!("%rows = reduce %yl {{axis = 1, kind = sum}} : {}", t(&[n])));
        b.op("%total = reduce %rows {axis = 0, kind = sum} : tensor<f32>".into());
        b.op(format!("%neg_inv = constant {{value = {:?}}} : tensor<f32>", -1.0 / n as f64));
        b.op("%loss = multiply %total, %neg_inv : tensor<f32>".into());
        writeln!(out, "\nfunc @loss(%x: {}, %y: {nc}, {weights}) -> (tensor<f32>) {{", t(&[n, i])).unwrap();
        out.push_str(&b.text);
        out.push_str("  return %loss\n}\n");
        out
    }

    pub fn module(&self) -> Module {
        parse_module(&self.text()).expect("generated 2fcNet module verifies")
    }
}
