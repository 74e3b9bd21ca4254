//! Arithmetic expression language for metric components.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          right-associative
//! atom   := number | 'x' | 'y' | 'z' | func '(' expr ')' | '(' expr ')'
//! func   := sin cos tan sinh cosh tanh exp log sqrt abs
//! ```
//!
//! `-x^2` is `-(x^2)` and `2^3^2` is `2^(3^2)`. Error positions are byte offsets.

use std::fmt;

use thiserror::Error;

use crate::jet::Real;

/// Parse trees deeper than this are rejected.
pub const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        pos: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("expression nested deeper than {MAX_DEPTH} at byte {pos}")]
    TooDeep { pos: usize },
}

impl ParseError {
    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } | ParseError::TooDeep { .. } => "SyntaxError",
            ParseError::UnknownIdentifier { .. } => "UnknownIdentifier",
        }
    }

    pub fn pos(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownIdentifier { pos, .. }
            | ParseError::TooDeep { pos } => *pos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn apply<S: Real>(self, v: S) -> S {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    pub fn apply<S: Real>(self, a: S, b: S) -> S {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
            BinOp::Pow => a.powf(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Non-negative finite literal.
    Num(f64),
    /// Coordinate 0, 1 or 2 (`x`, `y`, `z`).
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

const VAR_NAMES: [&str; 3] = ["x", "y", "z"];

impl Expr {
    /// Recursive tree-walking evaluation.
    pub fn eval<S: Real>(&self, p: &[S; 3]) -> S {
        match self {
            Expr::Num(v) => S::cst(*v),
            Expr::Var(i) => p[*i],
            Expr::Neg(e) => -e.eval(p),
            Expr::Bin(op, a, b) => op.apply(a.eval(p), b.eval(p)),
            Expr::Call(f, e) => f.apply(e.eval(p)),
        }
    }

    pub fn compile(&self) -> Compiled {
        let mut ops = Vec::new();
        self.emit(&mut ops);
        Compiled { ops }
    }

    fn emit(&self, ops: &mut Vec<Op>) {
        match self {
            Expr::Num(v) => ops.push(Op::Num(*v)),
            Expr::Var(i) => ops.push(Op::Var(*i)),
            Expr::Neg(e) => {
                e.emit(ops);
                ops.push(Op::Neg);
            }
            Expr::Bin(op, a, b) => {
                a.emit(ops);
                b.emit(ops);
                ops.push(Op::Bin(*op));
            }
            Expr::Call(f, e) => {
                e.emit(ops);
                ops.push(Op::Call(*f));
            }
        }
    }

    /// Binding strength used by the printer: sums 1, products 2, negation 3,
    /// powers 4, atoms 5.
    fn level(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "{}", VAR_NAMES[*i]),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.write_at(f, 3)
            }
            Expr::Bin(op, a, b) => {
                let (lmin, rmin) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                    BinOp::Pow => (5, 3),
                };
                a.write_at(f, lmin)?;
                match op {
                    BinOp::Add | BinOp::Sub => write!(f, " {} ", op.symbol())?,
                    _ => write!(f, "{}", op.symbol())?,
                }
                b.write_at(f, rmin)
            }
            Expr::Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.write_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Num(f64),
    Var(usize),
    Neg,
    Bin(BinOp),
    Call(Func),
}

/// Postfix program for an [`Expr`], evaluated with an explicit stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    ops: Vec<Op>,
}

impl Compiled {
    pub fn eval<S: Real>(&self, p: &[S; 3]) -> S {
        let mut stack: Vec<S> = Vec::with_capacity(16);
        for op in &self.ops {
            match *op {
                Op::Num(v) => stack.push(S::cst(v)),
                Op::Var(i) => stack.push(p[i]),
                Op::Neg => {
                    let a = stack.pop().expect("well-formed program");
                    stack.push(-a);
                }
                Op::Bin(b) => {
                    let rhs = stack.pop().expect("well-formed program");
                    let lhs = stack.pop().expect("well-formed program");
                    stack.push(b.apply(lhs, rhs));
                }
                Op::Call(f) => {
                    let a = stack.pop().expect("well-formed program");
                    stack.push(f.apply(a));
                }
            }
        }
        stack.pop().expect("well-formed program")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".to_string(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push((start, Tok::Num(v))),
                _ => {
                    return Err(ParseError::Syntax {
                        pos: start,
                        expected: vec!["finite number"],
                        found: format!("`{text}`"),
                    })
                }
            }
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if b"+-*/^()".contains(&c) {
            out.push((i, Tok::Sym(c as char)));
            i += 1;
        } else {
            let ch = src[i..].chars().next().expect("in bounds");
            return Err(ParseError::Syntax {
                pos: i,
                expected: vec!["number", "variable", "function", "operator", "`(`", "`)`"],
                found: format!("`{ch}`"),
            });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    depth: usize,
}

type Parsed = Result<(Expr, usize), ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            expected,
            found: describe(self.peek()),
        }
    }

    fn node(&self, e: Expr, depth: usize, pos: usize) -> Parsed {
        if depth > MAX_DEPTH {
            return Err(ParseError::TooDeep { pos });
        }
        Ok((e, depth))
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::TooDeep { pos: self.pos() });
        }
        Ok(())
    }

    fn expr(&mut self) -> Parsed {
        self.enter()?;
        let (mut lhs, mut d) = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => break,
            };
            let pos = self.pos();
            self.bump();
            let (rhs, rd) = self.term()?;
            (lhs, d) = self.node(Expr::Bin(op, Box::new(lhs), Box::new(rhs)), 1 + d.max(rd), pos)?;
        }
        self.depth -= 1;
        Ok((lhs, d))
    }

    fn term(&mut self) -> Parsed {
        let (mut lhs, mut d) = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => break,
            };
            let pos = self.pos();
            self.bump();
            let (rhs, rd) = self.unary()?;
            (lhs, d) = self.node(Expr::Bin(op, Box::new(lhs), Box::new(rhs)), 1 + d.max(rd), pos)?;
        }
        Ok((lhs, d))
    }

    fn unary(&mut self) -> Parsed {
        if self.peek() == &Tok::Sym('-') {
            let pos = self.pos();
            self.bump();
            self.enter()?;
            let (e, d) = self.unary()?;
            self.depth -= 1;
            return self.node(Expr::Neg(Box::new(e)), d + 1, pos);
        }
        self.power()
    }

    fn power(&mut self) -> Parsed {
        let (base, d) = self.atom()?;
        if self.peek() == &Tok::Sym('^') {
            let pos = self.pos();
            self.bump();
            self.enter()?;
            let (exp, ed) = self.unary()?;
            self.depth -= 1;
            return self.node(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)), 1 + d.max(ed), pos);
        }
        Ok((base, d))
    }

    fn atom(&mut self) -> Parsed {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok((Expr::Num(v), 1))
            }
            Tok::Sym('(') => {
                self.bump();
                let (e, d) = self.expr()?;
                self.expect_close()?;
                Ok((e, d))
            }
            Tok::Ident(name) => {
                if let Some(i) = VAR_NAMES.iter().position(|v| *v == name) {
                    self.bump();
                    return Ok((Expr::Var(i), 1));
                }
                if let Some(f) = Func::from_name(&name) {
                    self.bump();
                    if self.peek() != &Tok::Sym('(') {
                        return Err(self.fail(vec!["`(`"]));
                    }
                    self.bump();
                    let (e, d) = self.expr()?;
                    self.expect_close()?;
                    return self.node(Expr::Call(f, Box::new(e)), d + 1, pos);
                }
                if matches!(name.as_str(), "dx" | "dy" | "dz") {
                    // differential notation: components are entered one per slot
                    return Err(self.fail(vec!["metric component expression (no differentials)"]));
                }
                Err(ParseError::UnknownIdentifier { pos, name })
            }
            _ => Err(self.fail(vec!["number", "variable", "function", "`(`"])),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        if self.peek() == &Tok::Sym(')') {
            self.bump();
            Ok(())
        } else {
            Err(self.fail(vec!["`)`", "operator"]))
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0, depth: 0 };
    let (e, _) = p.expr()?;
    if p.peek() != &Tok::End {
        return Err(p.fail(vec!["operator", "end of input"]));
    }
    Ok(e)
}
