use std::collections::HashSet;

use super::module::{FunctionBody, Global, Initializer, Module, Param};
use super::op::{Attr, Attributes, OpId, Opcode, Operation, ValueId};
use super::types::TensorType;
use super::verify::{verify_module, VerifyReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: bad type: {message}")]
    Type { line: usize, col: usize, message: String },
    #[error("{line}:{col}: duplicate definition of {name}")]
    Duplicate { line: usize, col: usize, name: String },
    #[error("module does not verify: {0}")]
    Invalid(VerifyReport),
}

/// Parse and verify a module.
pub fn parse_module(text: &str) -> Result<Module, ParseError> {
    let m = parse_module_unverified(text)?;
    let report = verify_module(&m);
    if report.is_ok() {
        Ok(m)
    } else {
        Err(ParseError::Invalid(report))
    }
}

/// Parse without running the verifier. Only syntax, type annotations and
/// duplicate names are checked.
pub fn parse_module_unverified(text: &str) -> Result<Module, ParseError> {
    let mut p = Parser { src: text, pos: 0, next_id: 0 };
    p.module()
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    next_id: u32,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '$'
}

impl<'a> Parser<'a> {
    fn location(&self, pos: usize) -> (usize, usize) {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
        (line, col)
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.location(self.pos);
        Err(ParseError::Syntax { line, col, message: message.into() })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        loop {
            let r = self.rest();
            let trimmed = r.trim_start();
            self.pos += r.len() - trimmed.len();
            if trimmed.starts_with("//") {
                let end = trimmed.find('\n').unwrap_or(trimmed.len());
                self.pos += end;
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            let found: String = self.rest().chars().take(12).collect();
            self.syntax(format!("expected `{tok}`, found `{found}`"))
        }
    }

    fn at_eof(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }

    fn word(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let r = self.rest();
        let len = r.find(|c: char| !is_name_char(c)).unwrap_or(r.len());
        if len == 0 {
            return self.syntax("expected identifier");
        }
        self.pos += len;
        Ok(&r[..len])
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let start = self.pos;
        let w = self.word()?;
        if w == kw {
            Ok(())
        } else {
            self.pos = start;
            self.syntax(format!("expected `{kw}`, found `{w}`"))
        }
    }

    fn sigil_name(&mut self, sigil: char) -> Result<&'a str, ParseError> {
        self.skip_ws();
        if !self.rest().starts_with(sigil) {
            return self.syntax(format!("expected `{sigil}name`"));
        }
        self.pos += 1;
        let r = self.rest();
        let len = r.find(|c: char| !is_name_char(c)).unwrap_or(r.len());
        if len == 0 {
            return self.syntax("empty name");
        }
        self.pos += len;
        Ok(&r[..len])
    }

    fn value(&mut self) -> Result<ValueId, ParseError> {
        self.sigil_name('%').map(ValueId::new)
    }

    fn number_text(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let r = self.rest();
        for special in ["-inf", "inf", "NaN"] {
            if r.starts_with(special) && !r[special.len()..].starts_with(is_name_char) {
                self.pos += special.len();
                return Ok(&r[..special.len()]);
            }
        }
        let len = r
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_digit()
                    || c == '.'
                    || c == 'e'
                    || c == 'E'
                    || ((c == '-' || c == '+') && (i == 0 || matches!(r.as_bytes()[i - 1], b'e' | b'E'))))
            })
            .map(|(i, _)| i)
            .unwrap_or(r.len());
        if len == 0 {
            return self.syntax("expected number");
        }
        self.pos += len;
        Ok(&r[..len])
    }

    fn is_float_text(t: &str) -> bool {
        t.contains(['.', 'e', 'E']) || t.ends_with("inf") || t == "NaN"
    }

    fn float(&mut self) -> Result<f64, ParseError> {
        let t = self.number_text()?;
        match t.parse::<f64>() {
            Ok(v) => Ok(v),
            Err(_) => self.syntax(format!("bad number `{t}`")),
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let t = self.number_text()?;
        match t.parse::<i64>() {
            Ok(v) => Ok(v),
            Err(_) => self.syntax(format!("bad integer `{t}`")),
        }
    }

    fn tensor_type(&mut self) -> Result<TensorType, ParseError> {
        self.skip_ws();
        let start = self.pos;
        self.keyword("tensor")?;
        if !self.rest().starts_with('<') {
            return self.syntax("expected `<` after tensor");
        }
        let r = self.rest();
        let close = match r.find('>') {
            Some(i) => i,
            None => return self.syntax("unterminated tensor type"),
        };
        let text = format!("tensor{}", &r[..=close]);
        self.pos += close + 1;
        text.parse::<TensorType>().map_err(|e| {
            let (line, col) = self.location(start);
            ParseError::Type { line, col, message: e.to_string() }
        })
    }

    fn float_list(&mut self) -> Result<Vec<f64>, ParseError> {
        self.expect("[")?;
        let mut out = Vec::new();
        if !self.eat("]") {
            loop {
                out.push(self.float()?);
                if self.eat("]") {
                    break;
                }
                self.expect(",")?;
            }
        }
        Ok(out)
    }

    fn module(&mut self) -> Result<Module, ParseError> {
        let mut m = Module::default();
        let mut globals = HashSet::new();
        let mut funcs = HashSet::new();
        while !self.at_eof() {
            let start = self.pos;
            let kw = self.word()?;
            match kw {
                "global" => {
                    let g = self.global()?;
                    if !globals.insert(g.name.clone()) {
                        let (line, col) = self.location(start);
                        return Err(ParseError::Duplicate { line, col, name: format!("@{}", g.name) });
                    }
                    m.globals.push(g);
                }
                "func" => {
                    let f = self.function()?;
                    if !funcs.insert(f.name.clone()) {
                        let (line, col) = self.location(start);
                        return Err(ParseError::Duplicate { line, col, name: format!("@{}", f.name) });
                    }
                    m.functions.push(f);
                }
                other => {
                    self.pos = start;
                    return self.syntax(format!("expected `global` or `func`, found `{other}`"));
                }
            }
        }
        Ok(m)
    }

    fn global(&mut self) -> Result<Global, ParseError> {
        let name = self.sigil_name('@')?.to_string();
        self.expect(":")?;
        let ty = self.tensor_type()?;
        self.expect("=")?;
        let kind = self.word()?;
        let init = match kind {
            "dense" => {
                self.expect("<")?;
                let v = self.float_list()?;
                self.expect(">")?;
                Initializer::Dense(v)
            }
            "uniform" => {
                self.expect("<")?;
                self.keyword("seed")?;
                self.expect("=")?;
                let seed = self.int()?;
                self.expect(",")?;
                self.keyword("low")?;
                self.expect("=")?;
                let low = self.float()?;
                self.expect(",")?;
                self.keyword("high")?;
                self.expect("=")?;
                let high = self.float()?;
                self.expect(">")?;
                let seed = u64::try_from(seed).or_else(|_| self.syntax("seed must be non-negative"))?;
                Initializer::Uniform { seed, low, high }
            }
            other => return self.syntax(format!("unknown initializer `{other}`")),
        };
        Ok(Global { name, ty, init })
    }

    fn function(&mut self) -> Result<FunctionBody, ParseError> {
        let name = self.sigil_name('@')?.to_string();
        let mut defined: HashSet<String> = HashSet::new();
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.eat(")") {
            loop {
                self.skip_ws();
                let at = self.pos;
                let value = self.value()?;
                self.dup_check(&mut defined, &value, at)?;
                self.expect(":")?;
                let ty = self.tensor_type()?;
                params.push(Param { value, ty });
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        self.expect("->")?;
        self.expect("(")?;
        let mut return_types = Vec::new();
        if !self.eat(")") {
            loop {
                return_types.push(self.tensor_type()?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        self.expect("{")?;
        let mut ops = Vec::new();
        loop {
            match self.peek() {
                Some('%') => {
                    let at = self.pos;
                    let op = self.operation()?;
                    self.dup_check(&mut defined, &op.result, at)?;
                    ops.push(op);
                }
                Some(_) => break,
                None => return self.syntax("unexpected end of input in function body"),
            }
        }
        self.keyword("return")?;
        let mut returns = Vec::new();
        if self.peek() == Some('%') {
            loop {
                returns.push(self.value()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect("}")?;
        Ok(FunctionBody { name, params, ops, returns, return_types })
    }

    fn dup_check(&self, defined: &mut HashSet<String>, v: &ValueId, at: usize) -> Result<(), ParseError> {
        if defined.insert(v.0.clone()) {
            Ok(())
        } else {
            let (line, col) = self.location(at);
            Err(ParseError::Duplicate { line, col, name: v.to_string() })
        }
    }

    fn operation(&mut self) -> Result<Operation, ParseError> {
        let result = self.value()?;
        self.expect("=")?;
        self.skip_ws();
        let start = self.pos;
        let name = self.word()?;
        let opcode = match Opcode::from_name(name) {
            Some(o) => o,
            None => {
                self.pos = start;
                return self.syntax(format!("unknown opcode `{name}`"));
            }
        };
        let mut operands = Vec::new();
        if self.peek() == Some('%') {
            loop {
                operands.push(self.value()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        let mut attrs = Attributes::new();
        if self.eat("{") {
            loop {
                let key = self.word()?.to_string();
                self.expect("=")?;
                let v = self.attr_value()?;
                if attrs.insert(key.clone(), v).is_some() {
                    return self.syntax(format!("attribute `{key}` given twice"));
                }
                if self.eat("}") {
                    break;
                }
                self.expect(",")?;
            }
        }
        self.expect(":")?;
        let result_type = self.tensor_type()?;
        let id = if self.eat("#") {
            let v = self.int()?;
            match u32::try_from(v) {
                Ok(v) => OpId(v),
                Err(_) => return self.syntax("op id out of range"),
            }
        } else {
            OpId(self.next_id)
        };
        self.next_id = id.0.wrapping_add(1);
        Ok(Operation { id, opcode, operands, attrs, result, result_type })
    }

    fn attr_value(&mut self) -> Result<Attr, ParseError> {
        match self.peek() {
            Some('[') => {
                self.expect("[")?;
                let mut out = Vec::new();
                if !self.eat("]") {
                    loop {
                        out.push(self.int()?);
                        if self.eat("]") {
                            break;
                        }
                        self.expect(",")?;
                    }
                }
                Ok(Attr::Ints(out))
            }
            Some(c) if c.is_ascii_digit() || c == '-' || c == '+' => self.scalar_attr(),
            Some(_) => {
                let r = self.rest();
                if r.starts_with("inf") || r.starts_with("NaN") {
                    return self.scalar_attr();
                }
                let w = self.word()?;
                if w == "dense" {
                    self.expect("<")?;
                    let v = self.float_list()?;
                    self.expect(">")?;
                    Ok(Attr::Dense(v))
                } else {
                    Ok(Attr::Ident(w.to_string()))
                }
            }
            None => self.syntax("expected attribute value"),
        }
    }

    fn scalar_attr(&mut self) -> Result<Attr, ParseError> {
        let save = self.pos;
        let t = self.number_text()?;
        self.pos = save;
        if Self::is_float_text(t) {
            self.float().map(Attr::Float)
        } else {
            self.int().map(Attr::Int)
        }
    }
}
