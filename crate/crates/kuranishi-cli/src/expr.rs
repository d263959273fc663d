//! Entry expressions: rational literals, `+ - * / ^`, parentheses, the curve
//! coordinates `x`, `y` (elliptic) or `z` (line), and base variables.
//!
//! Values are truncated polynomials in the base variables whose
//! coefficients are functions on the curve.

use std::collections::BTreeMap;

use kuranishi::arith::{Mono, Rational};
use kuranishi::curve::{CurveModel, FFElement};
use num_bigint::BigInt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    /// Byte offset into the expression.
    pub offset: usize,
    pub message: String,
}

impl ExprError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        ExprError { offset, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
    End,
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let mut out = Vec::new();
    let mut it = s.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
        } else if c.is_ascii_digit() {
            let mut j = i;
            while let Some(&(k, d)) = it.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                j = k + d.len_utf8();
                it.next();
            }
            out.push((i, Tok::Num(s[i..j].parse().expect("digits"))));
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while let Some(&(k, d)) = it.peek() {
                if !(d.is_alphanumeric() || d == '_') {
                    break;
                }
                j = k + d.len_utf8();
                it.next();
            }
            out.push((i, Tok::Ident(s[i..j].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            it.next();
        } else {
            return Err(ExprError::new(i, format!("unexpected character '{c}'")));
        }
    }
    out.push((s.len(), Tok::End));
    Ok(out)
}

#[derive(Debug, Clone)]
enum Ast {
    Num(BigInt),
    Var(usize, String),
    Neg(Box<Ast>),
    Bin(usize, char, Box<Ast>, Box<Ast>),
    Pow(usize, Box<Ast>, i64),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &(usize, Tok) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn sum(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.product()?;
        while let (i, Tok::Op(c @ ('+' | '-'))) = self.peek().clone() {
            self.bump();
            let rhs = self.product()?;
            lhs = Ast::Bin(i, c, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.unary()?;
        while let (i, Tok::Op(c @ ('*' | '/'))) = self.peek().clone() {
            self.bump();
            let rhs = self.unary()?;
            lhs = Ast::Bin(i, c, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast, ExprError> {
        if let (_, Tok::Op('-')) = self.peek() {
            self.bump();
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        if let (_, Tok::Op('+')) = self.peek() {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, ExprError> {
        let base = self.atom()?;
        if let (i, Tok::Op('^')) = self.peek().clone() {
            self.bump();
            let neg = matches!(self.peek(), (_, Tok::Op('-')));
            if neg {
                self.bump();
            }
            let (j, t) = self.bump();
            let Tok::Num(n) = t else {
                return Err(ExprError::new(j, "exponent must be an integer literal"));
            };
            let e: i64 = n.try_into().map_err(|_| ExprError::new(j, "exponent too large"))?;
            return Ok(Ast::Pow(i, Box::new(base), if neg { -e } else { e }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, ExprError> {
        match self.bump() {
            (_, Tok::Num(n)) => Ok(Ast::Num(n)),
            (i, Tok::Ident(s)) => Ok(Ast::Var(i, s)),
            (i, Tok::Op('(')) => {
                let e = self.sum()?;
                match self.bump() {
                    (_, Tok::Op(')')) => Ok(e),
                    (j, _) => Err(ExprError::new(j, format!("expected ')' to close '(' at offset {i}"))),
                }
            }
            (i, Tok::End) => Err(ExprError::new(i, "unexpected end of expression")),
            (i, Tok::Op(c)) => Err(ExprError::new(i, format!("unexpected '{c}'"))),
        }
    }
}

fn parse(s: &str) -> Result<Ast, ExprError> {
    let mut p = Parser { toks: lex(s)?, pos: 0 };
    let e = p.sum()?;
    match p.peek() {
        (_, Tok::End) => Ok(e),
        (i, t) => Err(ExprError::new(*i, format!("unexpected {}", describe(t)))),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number {n}"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Op(c) => format!("'{c}'"),
        Tok::End => "end of expression".into(),
    }
}

/// Truncated polynomial in the base variables with function coefficients.
#[derive(Clone, Debug)]
pub struct Value {
    pub terms: BTreeMap<Mono, FFElement>,
    nvars: usize,
    order: u32,
}

impl Value {
    fn constant(n: usize, order: u32, f: FFElement) -> Self {
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(Mono::one(n), f);
        }
        Value { terms, nvars: n, order }
    }

    /// The coefficient of the constant monomial when nothing else is present.
    pub fn as_function(&self, curve: &CurveModel) -> Option<FFElement> {
        match self.terms.len() {
            0 => Some(curve.zero()),
            1 => self.terms.get(&Mono::one(self.nvars)).cloned(),
            _ => None,
        }
    }

    fn add(&self, o: &Value, sign: bool) -> Value {
        let mut terms = self.terms.clone();
        for (m, c) in &o.terms {
            let c = if sign { c.clone() } else { c.neg() };
            let v = match terms.remove(m) {
                Some(a) => a.add(&c),
                None => c,
            };
            if !v.is_zero() {
                terms.insert(m.clone(), v);
            }
        }
        Value { terms, nvars: self.nvars, order: self.order }
    }

    fn mul(&self, o: &Value) -> Value {
        let mut acc = Value { terms: BTreeMap::new(), nvars: self.nvars, order: self.order };
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                let m = a.mul(b);
                if m.degree() > self.order {
                    continue;
                }
                let one = Value { terms: BTreeMap::from([(m, x.mul(y))]), nvars: self.nvars, order: self.order };
                acc = acc.add(&one, true);
            }
        }
        acc
    }

    fn map(&self, f: impl Fn(&FFElement) -> Result<FFElement, String>) -> Result<Value, String> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = f(c)?;
            if !v.is_zero() {
                terms.insert(m.clone(), v);
            }
        }
        Ok(Value { terms, nvars: self.nvars, order: self.order })
    }
}

/// Variables an expression may use.
#[derive(Clone, Debug)]
pub struct Context {
    pub curve: CurveModel,
    /// Base variable names, `ε` also accepted as `eps`.
    pub base: Vec<String>,
    pub order: u32,
    /// Only rational constants allowed.
    pub constant: bool,
}

impl Context {
    pub fn functions(curve: &CurveModel) -> Self {
        Context { curve: curve.clone(), base: Vec::new(), order: 0, constant: false }
    }

    pub fn constants(curve: &CurveModel) -> Self {
        Context { curve: curve.clone(), base: Vec::new(), order: 0, constant: true }
    }

    fn var(&self, at: usize, name: &str) -> Result<Value, ExprError> {
        let n = self.base.len();
        let lit = |f: FFElement| Ok(Value::constant(n, self.order, f));
        if self.constant {
            return Err(ExprError::new(at, format!("'{name}' not allowed: a rational constant is expected")));
        }
        let canon = if name == "eps" { "ε" } else { name };
        if let Some(i) = self.base.iter().position(|b| b == canon) {
            return Ok(Value { terms: BTreeMap::from([(Mono::var(n, i), self.curve.one())]), nvars: n, order: self.order });
        }
        match (name, self.curve.is_elliptic()) {
            ("x", true) | ("z", false) => lit(self.curve.coord()),
            ("y", true) => lit(self.curve.y()),
            _ => {
                let allowed = if self.curve.is_elliptic() { "x, y" } else { "z" };
                let base = if self.base.is_empty() { String::new() } else { format!(", {}", self.base.join(", ")) };
                Err(ExprError::new(at, format!("unknown variable '{name}' (allowed: {allowed}{base})")))
            }
        }
    }

    fn eval(&self, e: &Ast) -> Result<Value, ExprError> {
        let n = self.base.len();
        Ok(match e {
            Ast::Num(k) => Value::constant(n, self.order, self.curve.constant(Rational::from_integer(k.clone()))),
            Ast::Var(i, s) => self.var(*i, s)?,
            Ast::Neg(a) => self.eval(a)?.map(|c| Ok(c.neg())).expect("negation"),
            Ast::Bin(i, op, a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                match op {
                    '+' => a.add(&b, true),
                    '-' => a.add(&b, false),
                    '*' => a.mul(&b),
                    _ => {
                        let d = b.as_function(&self.curve).ok_or_else(|| ExprError::new(*i, "division by an expression involving base variables"))?;
                        if d.is_zero() {
                            return Err(ExprError::new(*i, "division by zero"));
                        }
                        a.map(|c| c.div(&d).map_err(|e| e.to_string())).map_err(|m| ExprError::new(*i, m))?
                    }
                }
            }
            Ast::Pow(i, a, k) => {
                let a = self.eval(a)?;
                if *k < 0 {
                    let f = a.as_function(&self.curve).ok_or_else(|| ExprError::new(*i, "negative power of an expression involving base variables"))?;
                    let p = f.pow(*k).map_err(|e| ExprError::new(*i, e.to_string()))?;
                    Value::constant(n, self.order, p)
                } else {
                    let mut acc = Value::constant(n, self.order, self.curve.one());
                    for _ in 0..*k {
                        acc = acc.mul(&a);
                    }
                    acc
                }
            }
        })
    }

    pub fn value(&self, s: &str) -> Result<Value, ExprError> {
        self.eval(&parse(s)?)
    }

    pub fn function(&self, s: &str) -> Result<FFElement, ExprError> {
        let v = self.value(s)?;
        v.as_function(&self.curve).ok_or_else(|| ExprError::new(0, "base variables are not allowed here"))
    }

    pub fn rational(&self, s: &str) -> Result<Rational, ExprError> {
        let f = Context::constants(&self.curve).function(s)?;
        f.constant_value().ok_or_else(|| ExprError::new(0, "not a rational constant"))
    }
}
