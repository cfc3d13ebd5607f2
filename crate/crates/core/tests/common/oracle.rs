//! Naive nested-loop reference semantics for every opcode, written against
//! explicit coordinates rather than strides so it shares no code with the
//! interpreter.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tensor_evo::interp::{apply, Buffer};
use tensor_evo::ir::{check_signature, Attr, Attributes, ElementKind, OpId, Opcode, Operation, TensorType, ValueId};
use tensor_evo::Tensor;

#[derive(Clone, Debug)]
pub enum Data {
    F(Vec<f32>),
    I(Vec<i32>),
    B(Vec<bool>),
}

#[derive(Clone, Debug)]
pub struct Ref {
    pub shape: Vec<usize>,
    pub data: Data,
}

fn all_coords(shape: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &e in shape {
        let mut next = Vec::new();
        for c in &out {
            for i in 0..e {
                let mut c2 = c.clone();
                c2.push(i);
                next.push(c2);
            }
        }
        out = next;
    }
    out
}

fn linear(shape: &[usize], coord: &[usize]) -> usize {
    let mut idx = 0;
    for (d, &c) in coord.iter().enumerate() {
        idx = idx * shape[d] + c;
    }
    idx
}

fn pick(data: &Data, i: usize) -> Data {
    match data {
        Data::F(v) => Data::F(vec![v[i]]),
        Data::I(v) => Data::I(vec![v[i]]),
        Data::B(v) => Data::B(vec![v[i]]),
    }
}

fn concat(parts: Vec<Data>, kind: ElementKind) -> Data {
    let mut out = match kind {
        ElementKind::F32 => Data::F(vec![]),
        ElementKind::I32 => Data::I(vec![]),
        ElementKind::I1 => Data::B(vec![]),
    };
    for p in parts {
        match (&mut out, p) {
            (Data::F(o), Data::F(v)) => o.extend(v),
            (Data::I(o), Data::I(v)) => o.extend(v),
            (Data::B(o), Data::B(v)) => o.extend(v),
            _ => panic!("kind mix"),
        }
    }
    out
}

fn fmax(a: f32, b: f32) -> f32 {
    if a.is_nan() || b.is_nan() {
        f32::NAN
    } else if a > b {
        a
    } else {
        b
    }
}

/// Reference result of `op` on `args`.
pub fn reference(op: &Operation, args: &[Ref]) -> Ref {
    let rt = &op.result_type;
    let rs = rt.shape.clone();
    let coords = all_coords(&rs);
    let gather = |src: &Ref, map: &dyn Fn(&[usize]) -> Option<Vec<usize>>, fill: Option<&Data>| -> Data {
        let parts = coords
            .iter()
            .map(|c| match map(c) {
                Some(sc) => pick(&src.data, linear(&src.shape, &sc)),
                None => fill.unwrap().clone(),
            })
            .collect();
        concat(parts, rt.element)
    };
    let data = match op.opcode {
        Opcode::Constant => {
            let vals: Vec<f64> = match op.attr("value").unwrap() {
                Attr::Float(v) => vec![*v; rt.num_elements()],
                Attr::Int(v) => vec![*v as f64; rt.num_elements()],
                Attr::Dense(v) => v.clone(),
                _ => unreachable!(),
            };
            match rt.element {
                ElementKind::F32 => Data::F(vals.iter().map(|&v| v as f32).collect()),
                ElementKind::I32 => Data::I(vals.iter().map(|&v| v as i32).collect()),
                ElementKind::I1 => Data::B(vals.iter().map(|&v| v != 0.0).collect()),
            }
        }
        Opcode::Add | Opcode::Subtract | Opcode::Multiply | Opcode::Divide | Opcode::Maximum => {
            match (&args[0].data, &args[1].data) {
                (Data::F(a), Data::F(b)) => Data::F(
                    (0..a.len())
                        .map(|i| match op.opcode {
                            Opcode::Add => a[i] + b[i],
                            Opcode::Subtract => a[i] - b[i],
                            Opcode::Multiply => a[i] * b[i],
                            Opcode::Divide => a[i] / b[i],
                            _ => fmax(a[i], b[i]),
                        })
                        .collect(),
                ),
                (Data::I(a), Data::I(b)) => Data::I(
                    (0..a.len())
                        .map(|i| match op.opcode {
                            Opcode::Add => a[i].wrapping_add(b[i]),
                            Opcode::Subtract => a[i].wrapping_sub(b[i]),
                            Opcode::Multiply => a[i].wrapping_mul(b[i]),
                            Opcode::Divide => {
                                if b[i] == 0 {
                                    0
                                } else {
                                    a[i].wrapping_div(b[i])
                                }
                            }
                            _ => std::cmp::max(a[i], b[i]),
                        })
                        .collect(),
                ),
                _ => unreachable!(),
            }
        }
        Opcode::Negate => match &args[0].data {
            Data::F(a) => Data::F(a.iter().map(|x| -x).collect()),
            Data::I(a) => Data::I(a.iter().map(|x| x.wrapping_neg()).collect()),
            _ => unreachable!(),
        },
        Opcode::Exponential | Opcode::Log => match &args[0].data {
            Data::F(a) => Data::F(a.iter().map(|x| if op.opcode == Opcode::Log { x.ln() } else { x.exp() }).collect()),
            _ => unreachable!(),
        },
        Opcode::Dot => {
            let (m, k, n) = (args[0].shape[0], args[0].shape[1], args[1].shape[1]);
            match (&args[0].data, &args[1].data) {
                (Data::F(a), Data::F(b)) => {
                    let mut out = Vec::new();
                    for i in 0..m {
                        for j in 0..n {
                            let mut s = 0f32;
                            for kk in 0..k {
                                s += a[i * k + kk] * b[kk * n + j];
                            }
                            out.push(s);
                        }
                    }
                    Data::F(out)
                }
                (Data::I(a), Data::I(b)) => {
                    let mut out = Vec::new();
                    for i in 0..m {
                        for j in 0..n {
                            let mut s = 0i32;
                            for kk in 0..k {
                                s = s.wrapping_add(a[i * k + kk].wrapping_mul(b[kk * n + j]));
                            }
                            out.push(s);
                        }
                    }
                    Data::I(out)
                }
                _ => unreachable!(),
            }
        }
        Opcode::Transpose => {
            let perm = op.attr_usizes("perm").unwrap();
            gather(
                &args[0],
                &|c| {
                    let mut sc = vec![0; c.len()];
                    for (i, &p) in perm.iter().enumerate() {
                        sc[p] = c[i];
                    }
                    Some(sc)
                },
                None,
            )
        }
        Opcode::Reshape => args[0].data.clone(),
        Opcode::BroadcastInDim => {
            let dims = op.attr_usizes("dims").unwrap();
            let src_shape = args[0].shape.clone();
            gather(
                &args[0],
                &|c| Some(dims.iter().enumerate().map(|(i, &d)| if src_shape[i] == 1 { 0 } else { c[d] }).collect()),
                None,
            )
        }
        Opcode::Reduce => {
            let axis = op.attr_int("axis").unwrap() as usize;
            let is_sum = op.attr_ident("kind") == Some("sum");
            let len = args[0].shape[axis];
            let src = &args[0];
            let at = |c: &[usize], k: usize| {
                let mut sc = c.to_vec();
                sc.insert(axis, k);
                linear(&src.shape, &sc)
            };
            match &src.data {
                Data::F(a) => Data::F(
                    coords
                        .iter()
                        .map(|c| {
                            let mut acc = if is_sum { 0f32 } else { f32::NEG_INFINITY };
                            for k in 0..len {
                                let v = a[at(c, k)];
                                acc = if is_sum { acc + v } else { fmax(acc, v) };
                            }
                            acc
                        })
                        .collect(),
                ),
                Data::I(a) => Data::I(
                    coords
                        .iter()
                        .map(|c| {
                            let mut acc = if is_sum { 0i32 } else { i32::MIN };
                            for k in 0..len {
                                let v = a[at(c, k)];
                                acc = if is_sum { acc.wrapping_add(v) } else { acc.max(v) };
                            }
                            acc
                        })
                        .collect(),
                ),
                _ => unreachable!(),
            }
        }
        Opcode::Pad => {
            let low = op.attr_usizes("low").unwrap();
            let src_shape = args[0].shape.clone();
            let fill = pick(&args[1].data, 0);
            gather(
                &args[0],
                &|c| {
                    let mut sc = Vec::new();
                    for (d, &x) in c.iter().enumerate() {
                        if x < low[d] || x - low[d] >= src_shape[d] {
                            return None;
                        }
                        sc.push(x - low[d]);
                    }
                    Some(sc)
                },
                Some(&fill),
            )
        }
        Opcode::Slice => {
            let start = op.attr_usizes("start").unwrap();
            gather(&args[0], &|c| Some(c.iter().zip(&start).map(|(x, s)| x + s).collect()), None)
        }
        Opcode::Compare => {
            let kind = op.attr_ident("kind").unwrap().to_string();
            let test = |o: std::cmp::Ordering, unordered: bool| -> bool {
                use std::cmp::Ordering::*;
                if unordered {
                    return kind == "ne";
                }
                match kind.as_str() {
                    "eq" => o == Equal,
                    "ne" => o != Equal,
                    "lt" => o == Less,
                    "le" => o != Greater,
                    "gt" => o == Greater,
                    _ => o != Less,
                }
            };
            let out = match (&args[0].data, &args[1].data) {
                (Data::F(a), Data::F(b)) => (0..a.len())
                    .map(|i| match a[i].partial_cmp(&b[i]) {
                        Some(o) => test(o, false),
                        None => test(std::cmp::Ordering::Equal, true),
                    })
                    .collect(),
                (Data::I(a), Data::I(b)) => (0..a.len()).map(|i| test(a[i].cmp(&b[i]), false)).collect(),
                (Data::B(a), Data::B(b)) => (0..a.len()).map(|i| test(a[i].cmp(&b[i]), false)).collect(),
                _ => unreachable!(),
            };
            Data::B(out)
        }
        Opcode::Select => {
            let Data::B(p) = &args[0].data else { unreachable!() };
            let parts = (0..p.len()).map(|i| pick(if p[i] { &args[1].data } else { &args[2].data }, i)).collect();
            concat(parts, rt.element)
        }
        Opcode::Iota => {
            let dim = op.attr_int("dim").unwrap() as usize;
            match rt.element {
                ElementKind::F32 => Data::F(coords.iter().map(|c| c[dim] as f32).collect()),
                _ => Data::I(coords.iter().map(|c| c[dim] as i32).collect()),
            }
        }
        Opcode::Convert => {
            let n = rt.num_elements();
            let as_f64: Vec<f64> = match &args[0].data {
                Data::F(a) => a.iter().map(|&x| x as f64).collect(),
                Data::I(a) => a.iter().map(|&x| x as f64).collect(),
                Data::B(a) => a.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect(),
            };
            match (rt.element, &args[0].data) {
                (ElementKind::F32, Data::F(a)) => Data::F(a.clone()),
                (ElementKind::F32, _) => Data::F(as_f64.iter().map(|&v| v as f32).collect()),
                (ElementKind::I32, Data::F(a)) => Data::I(a.iter().map(|&v| v as i32).collect()),
                (ElementKind::I32, _) => Data::I(as_f64.iter().map(|&v| v as i32).collect()),
                (ElementKind::I1, _) => Data::B((0..n).map(|i| as_f64[i] != 0.0).collect()),
            }
        }
    };
    Ref { shape: rs, data }
}

pub fn to_tensor(r: &Ref) -> Tensor {
    let buf = match &r.data {
        Data::F(v) => Buffer::Float(v.clone()),
        Data::I(v) => Buffer::Int(v.clone()),
        Data::B(v) => Buffer::Bool(v.clone()),
    };
    let kind = match r.data {
        Data::F(_) => ElementKind::F32,
        Data::I(_) => ElementKind::I32,
        Data::B(_) => ElementKind::I1,
    };
    Tensor::new(TensorType::new(r.shape.clone(), kind), buf).unwrap()
}

fn random_shape_in(rng: &mut ChaCha8Rng, ranks: std::ops::RangeInclusive<usize>) -> Vec<usize> {
    let rank = rng.gen_range(ranks);
    random_shape(rng, rank)
}

fn random_shape(rng: &mut ChaCha8Rng, rank: usize) -> Vec<usize> {
    (0..rank).map(|_| rng.gen_range(1..=5)).collect()
}

fn random_data(rng: &mut ChaCha8Rng, kind: ElementKind, n: usize, positive: bool) -> Data {
    match kind {
        ElementKind::F32 => Data::F(
            (0..n)
                .map(|_| if positive { rng.gen_range(0.01f32..4.0) } else { rng.gen_range(-4.0f32..4.0) })
                .collect(),
        ),
        ElementKind::I32 => Data::I((0..n).map(|_| rng.gen_range(-9..=9)).collect()),
        ElementKind::I1 => Data::B((0..n).map(|_| rng.gen_bool(0.5)).collect()),
    }
}

fn rnd(rng: &mut ChaCha8Rng, kind: ElementKind, shape: Vec<usize>) -> Ref {
    let n: usize = shape.iter().product();
    Ref { data: random_data(rng, kind, n, false), shape }
}

fn numeric_kind(rng: &mut ChaCha8Rng) -> ElementKind {
    if rng.gen_bool(0.5) {
        ElementKind::F32
    } else {
        ElementKind::I32
    }
}

fn any_kind(rng: &mut ChaCha8Rng) -> ElementKind {
    [ElementKind::F32, ElementKind::I32, ElementKind::I1][rng.gen_range(0..3)]
}

fn mk(opcode: Opcode, n_args: usize, attrs: Attributes, rt: TensorType) -> Operation {
    Operation {
        id: OpId(0),
        opcode,
        operands: (0..n_args).map(|i| ValueId::new(format!("a{i}"))).collect(),
        attrs,
        result: ValueId::new("r"),
        result_type: rt,
    }
}

fn attrs(pairs: Vec<(&str, Attr)>) -> Attributes {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// A random, well-typed instance of `opcode` with extents ≤ 5.
pub fn random_case(opcode: Opcode, rng: &mut ChaCha8Rng) -> (Operation, Vec<Ref>) {
    let ty = |r: &Ref| {
        let kind = match r.data {
            Data::F(_) => ElementKind::F32,
            Data::I(_) => ElementKind::I32,
            Data::B(_) => ElementKind::I1,
        };
        TensorType::new(r.shape.clone(), kind)
    };
    match opcode {
        Opcode::Constant => {
            let kind = any_kind(rng);
            let shape = random_shape_in(rng, 0..=3);
            let rt = TensorType::new(shape, kind);
            let value = if rng.gen_bool(0.5) {
                Attr::Float(rng.gen_range(-3.0..3.0))
            } else {
                Attr::Dense((0..rt.num_elements()).map(|_| rng.gen_range(-5i32..5) as f64 * 0.5).collect())
            };
            (mk(opcode, 0, attrs(vec![("value", value)]), rt), vec![])
        }
        o if o.is_elementwise_binary() => {
            let kind = numeric_kind(rng);
            let shape = random_shape_in(rng, 0..=3);
            let a = rnd(rng, kind, shape.clone());
            let b = rnd(rng, kind, shape);
            (mk(o, 2, Attributes::new(), ty(&a)), vec![a, b])
        }
        Opcode::Negate => {
            let kind = numeric_kind(rng);
            let shape = random_shape_in(rng, 0..=3);
            let a = rnd(rng, kind, shape);
            (mk(opcode, 1, Attributes::new(), ty(&a)), vec![a])
        }
        Opcode::Exponential | Opcode::Log => {
            let shape = random_shape_in(rng, 0..=3);
            let n: usize = shape.iter().product();
            let a = Ref { data: random_data(rng, ElementKind::F32, n, opcode == Opcode::Log), shape };
            (mk(opcode, 1, Attributes::new(), ty(&a)), vec![a])
        }
        Opcode::Dot => {
            let kind = numeric_kind(rng);
            let (m, k, n) = (rng.gen_range(1..=5), rng.gen_range(1..=5), rng.gen_range(1..=5));
            let a = rnd(rng, kind, vec![m, k]);
            let b = rnd(rng, kind, vec![k, n]);
            (mk(opcode, 2, Attributes::new(), TensorType::new(vec![m, n], kind)), vec![a, b])
        }
        Opcode::Transpose => {
            let kind = any_kind(rng);
            let rank = rng.gen_range(1..=4);
            let a = { let s = random_shape(rng, rank); rnd(rng, kind, s) };
            let mut perm: Vec<usize> = (0..rank).collect();
            for i in (1..rank).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let rs: Vec<usize> = perm.iter().map(|&p| a.shape[p]).collect();
            (mk(opcode, 1, attrs(vec![("perm", Attr::ints(perm))]), TensorType::new(rs, kind)), vec![a])
        }
        Opcode::Reshape => {
            let kind = any_kind(rng);
            let a = { let s = random_shape_in(rng, 0..=3); rnd(rng, kind, s) };
            let n: usize = a.shape.iter().product();
            // factor n into a random shape
            let mut rs = Vec::new();
            let mut rem = n;
            for f in [2, 3, 5] {
                while rem % f == 0 && rng.gen_bool(0.7) {
                    rs.push(f);
                    rem /= f;
                }
            }
            if rem > 1 {
                rs.push(rem);
            }
            if rng.gen_bool(0.3) {
                rs.insert(0, 1);
            }
            (mk(opcode, 1, Attributes::new(), TensorType::new(rs, kind)), vec![a])
        }
        Opcode::BroadcastInDim => {
            let kind = any_kind(rng);
            let rrank = rng.gen_range(1..=4);
            let rs = random_shape(rng, rrank);
            let dims: Vec<usize> = (0..rrank).filter(|_| rng.gen_bool(0.5)).collect();
            let src: Vec<usize> = dims.iter().map(|&d| if rng.gen_bool(0.3) { 1 } else { rs[d] }).collect();
            let a = rnd(rng, kind, src);
            (mk(opcode, 1, attrs(vec![("dims", Attr::ints(dims))]), TensorType::new(rs, kind)), vec![a])
        }
        Opcode::Reduce => {
            let kind = numeric_kind(rng);
            let rank = rng.gen_range(1..=4);
            let a = { let s = random_shape(rng, rank); rnd(rng, kind, s) };
            let axis = rng.gen_range(0..rank);
            let mut rs = a.shape.clone();
            rs.remove(axis);
            let k = if rng.gen_bool(0.5) { "sum" } else { "max" };
            (
                mk(opcode, 1, attrs(vec![("axis", Attr::Int(axis as i64)), ("kind", Attr::ident(k))]), TensorType::new(rs, kind)),
                vec![a],
            )
        }
        Opcode::Pad => {
            let kind = any_kind(rng);
            let rank = rng.gen_range(1..=3);
            let a = { let s = random_shape(rng, rank); rnd(rng, kind, s) };
            let v = rnd(rng, kind, vec![]);
            let low: Vec<usize> = (0..rank).map(|_| rng.gen_range(0..=2)).collect();
            let high: Vec<usize> = (0..rank).map(|_| rng.gen_range(0..=2)).collect();
            let rs: Vec<usize> = (0..rank).map(|d| low[d] + a.shape[d] + high[d]).collect();
            (
                mk(opcode, 2, attrs(vec![("low", Attr::ints(low)), ("high", Attr::ints(high))]), TensorType::new(rs, kind)),
                vec![a, v],
            )
        }
        Opcode::Slice => {
            let kind = any_kind(rng);
            let rank = rng.gen_range(1..=4);
            let a = { let s = random_shape(rng, rank); rnd(rng, kind, s) };
            let mut start = Vec::new();
            let mut limit = Vec::new();
            for &e in &a.shape {
                let s = rng.gen_range(0..e);
                start.push(s);
                limit.push(rng.gen_range(s + 1..=e));
            }
            let rs: Vec<usize> = start.iter().zip(&limit).map(|(s, l)| l - s).collect();
            (
                mk(opcode, 1, attrs(vec![("start", Attr::ints(start)), ("limit", Attr::ints(limit))]), TensorType::new(rs, kind)),
                vec![a],
            )
        }
        Opcode::Compare => {
            let kind = any_kind(rng);
            let shape = random_shape_in(rng, 0..=3);
            let a = rnd(rng, kind, shape.clone());
            let mut b = rnd(rng, kind, shape);
            // force some equal pairs
            if let (Data::F(x), Data::F(y)) = (&a.data, &mut b.data) {
                for i in 0..x.len() {
                    if i % 3 == 0 {
                        y[i] = x[i];
                    }
                }
            }
            let k = ["eq", "ne", "lt", "le", "gt", "ge"][rng.gen_range(0..6)];
            let rt = TensorType::new(a.shape.clone(), ElementKind::I1);
            (mk(opcode, 2, attrs(vec![("kind", Attr::ident(k))]), rt), vec![a, b])
        }
        Opcode::Select => {
            let kind = any_kind(rng);
            let shape = random_shape_in(rng, 0..=3);
            let p = rnd(rng, ElementKind::I1, shape.clone());
            let t = rnd(rng, kind, shape.clone());
            let f = rnd(rng, kind, shape);
            (mk(opcode, 3, Attributes::new(), ty(&t)), vec![p, t, f])
        }
        Opcode::Iota => {
            let kind = numeric_kind(rng);
            let rank = rng.gen_range(1..=4);
            let rs = random_shape(rng, rank);
            let dim = rng.gen_range(0..rank);
            (mk(opcode, 0, attrs(vec![("dim", Attr::Int(dim as i64))]), TensorType::new(rs, kind)), vec![])
        }
        Opcode::Convert => {
            let from = any_kind(rng);
            let to = any_kind(rng);
            let a = { let s = random_shape_in(rng, 0..=3); rnd(rng, from, s) };
            let rt = TensorType::new(a.shape.clone(), to);
            (mk(opcode, 1, Attributes::new(), rt), vec![a])
        }
        _ => unreachable!(),
    }
}

fn close(a: f32, b: f32, rel: f64) -> bool {
    if a.is_nan() && b.is_nan() || a == b {
        return true;
    }
    let (a, b) = (a as f64, b as f64);
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Compare the interpreter against the reference on `cases` random cases
/// of `opcode`. Returns the number of mismatches and a sample message.
pub fn check_opcode(opcode: Opcode, cases: usize, rng: &mut ChaCha8Rng) -> (usize, Option<String>) {
    let mut failures = 0;
    let mut sample = None;
    for _ in 0..cases {
        let (op, args) = random_case(opcode, rng);
        let arg_types: Vec<TensorType> = args.iter().map(|a| to_tensor(a).ty().clone()).collect();
        check_signature(&op, &arg_types).unwrap_or_else(|e| panic!("generator produced invalid {opcode}: {e:?}"));
        let tensors: Vec<Tensor> = args.iter().map(to_tensor).collect();
        let refs: Vec<&Tensor> = tensors.iter().collect();
        let got = apply(&op, &refs).expect("interpreter accepts a verified op");
        let want = to_tensor(&reference(&op, &args));
        let ok = got.ty() == want.ty()
            && match (got.data(), want.data()) {
                (Buffer::Float(g), Buffer::Float(w)) => g.iter().zip(w).all(|(&x, &y)| close(x, y, 1e-6)),
                (g, w) => g == w,
            };
        if !ok {
            failures += 1;
            sample.get_or_insert_with(|| format!("{op:?}\n got  {got:?}\n want {want:?}"));
        }
    }
    (failures, sample)
}
