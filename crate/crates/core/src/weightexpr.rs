//! Weight functions `R(u)` written as small arithmetic expressions.
//!
//! Grammar (whitespace is ignored, `u` is the only variable):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-'? atom
//! atom   := number | 'u' | '(' expr ')' | func '(' expr ')'
//! func   := cos | sin | exp | log | abs | sqrt
//! ```
//!
//! `^` is right-associative and binds a leading minus to its base, so
//! `-u^2` is `(-u)^2`. `log` is the natural logarithm.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Number of grid points used by [`WeightFn::check_nonnegative`].
pub const NONNEG_GRID_POINTS: usize = 1024;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Cos,
    Sin,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Cos, Func::Sin, Func::Exp, Func::Log, Func::Abs, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Cos => "cos",
            Func::Sin => "sin",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, u: f64) -> Result<f64> {
        let v = match self {
            Expr::Num(c) => *c,
            Expr::Var => u,
            Expr::Neg(e) => -e.eval(u)?,
            Expr::Bin(op, l, r) => {
                let (x, y) = (l.eval(u)?, r.eval(u)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(Error::Eval(format!("division by zero at u = {u}")));
                        }
                        x / y
                    }
                    BinOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, arg) => {
                let x = arg.eval(u)?;
                match f {
                    Func::Cos => x.cos(),
                    Func::Sin => x.sin(),
                    Func::Exp => x.exp(),
                    Func::Abs => x.abs(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(Error::Eval(format!("log of non-positive value {x} at u = {u}")));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(Error::Eval(format!("sqrt of negative value {x} at u = {u}")));
                        }
                        x.sqrt()
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Eval(format!("non-finite value at u = {u}")))
        }
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(_) | Expr::Var | Expr::Call(..) | Expr::Bin(..) => write!(f, "{self}"),
            Expr::Neg(_) => write!(f, "({self})"),
        }
    }
}

/// Canonical form: every binary node is parenthesised, so printing and
/// re-parsing reproduces the tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c:?}"),
            Expr::Var => f.write_str("u"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_atom(f)
            }
            Expr::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn error<T>(&self, offset: usize, message: impl Into<String>) -> std::result::Result<T, ParseError> {
        Err(ParseError {
            offset,
            message: message.into(),
        })
    }

    fn found(&self) -> String {
        match self.src.get(self.pos) {
            Some(&c) => format!("found '{}'", c as char),
            None => "found end of input".to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> std::result::Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.error(self.pos, format!("expected '{}', {}", c as char, self.found()))
        }
    }

    fn parse_all(mut self) -> std::result::Result<Expr, ParseError> {
        if self.peek().is_none() {
            return self.error(self.pos, "expected expression, found end of input");
        }
        let e = self.expr()?;
        if self.peek().is_some() {
            return self.error(self.pos, format!("expected operator or end of input, {}", self.found()));
        }
        Ok(e)
    }

    fn expr(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> std::result::Result<Expr, ParseError> {
        let base = self.unary()?;
        if self.eat(b'^') {
            let exp = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> std::result::Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.atom()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> std::result::Result<Expr, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let begin = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[begin..self.pos]).expect("ascii");
                if name == "u" {
                    return Ok(Expr::Var);
                }
                match Func::from_name(name) {
                    Some(func) => {
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                    None => self.error(
                        begin,
                        format!("unknown identifier '{name}', expected 'u' or one of cos, sin, exp, log, abs, sqrt"),
                    ),
                }
            }
            _ => {
                let _ = start;
                self.error(self.pos, format!("expected number, 'u', function or '(', {}", self.found()))
            }
        }
    }

    fn number(&mut self) -> std::result::Result<Expr, ParseError> {
        let begin = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return self.error(begin, "expected digits in number");
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // `2exp(u)` is not implicit multiplication; report the exponent.
                return self.error(save, "expected digits in exponent");
            }
        }
        let text = std::str::from_utf8(&self.src[begin..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Num(v)),
            _ => self.error(begin, format!("number '{text}' is out of range")),
        }
    }
}

/// A parsed weight function together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFn {
    ast: Expr,
    source: String,
}

impl WeightFn {
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        let ast = Parser::new(text).parse_all()?;
        Ok(Self {
            ast,
            source: text.to_string(),
        })
    }

    /// The constant weight `1` (ordinary least squares).
    pub fn unit() -> Self {
        Self {
            ast: Expr::Num(1.0),
            source: "1".to_string(),
        }
    }

    pub fn from_expr(ast: Expr) -> Self {
        let source = ast.to_string();
        Self { ast, source }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        self.ast.eval(u)
    }

    /// `c * R(u)`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            ast: Expr::Bin(BinOp::Mul, Box::new(Expr::Num(c)), Box::new(self.ast.clone())),
            source: format!("{c:?}*({})", self.source),
        }
    }

    /// Grid check that `R` is finite and nonnegative on `[a, b]`.
    pub fn check_nonnegative(&self, a: f64, b: f64) -> Result<()> {
        let m = NONNEG_GRID_POINTS - 1;
        for i in 0..=m {
            let u = a + (b - a) * i as f64 / m as f64;
            let w = self.eval(u)?;
            if w < 0.0 {
                return Err(Error::Config(format!(
                    "weight '{}' is negative ({w}) at u = {u}",
                    self.source
                )));
            }
        }
        Ok(())
    }
}

impl FromStr for WeightFn {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        WeightFn::parse(s)
    }
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

pub fn parse_weight(text: &str) -> Result<WeightFn> {
    Ok(WeightFn::parse(text)?)
}

pub fn eval_weight(w: &WeightFn, u: f64) -> Result<f64> {
    w.eval(u)
}
