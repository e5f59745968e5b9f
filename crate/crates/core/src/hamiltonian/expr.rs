//! Arithmetic expressions in one variable `x`, with symbolic differentiation.
//!
//! Grammar (whitespace is ignored between tokens):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ('^' factor)?
//! atom   := number | 'x' | func '(' expr ')' | '(' expr ')' | '-' atom
//! func   := exp | ln | sin | cos | sqrt
//! ```
//!
//! Unary minus binds tighter than `^`, so `-x^2` is `(-x)^2`.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Exp, Func::Ln, Func::Sin, Func::Cos, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
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

/// Expression tree. Equality is structural.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

/// Evaluation outside the domain of an operation.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
#[error("{op} undefined for argument {arg} (at x = {x})")]
pub struct DomainError {
    pub op: &'static str,
    pub arg: f64,
    pub x: f64,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
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
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                expected: "number".into(),
                found: format!("`{lit}`"),
            })?;
            out.push((start, Tok::Num(value)));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if b"+-*/^()".contains(&c) {
            out.push((i, Tok::Sym(c as char)));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(ParseError::Syntax {
                offset: i,
                expected: "operator, number or identifier".into(),
                found: format!("`{ch}`"),
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.into(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Sym('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.atom()?)))
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let offset = self.offset();
                if name == "x" {
                    self.bump();
                    return Ok(Expr::Var);
                }
                let func = Func::from_name(&name).ok_or(ParseError::UnknownIdentifier { name, offset })?;
                self.bump();
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.error("expression")),
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let expr = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error("operator or end of input"));
    }
    Ok(expr)
}

fn integer_exponent(b: f64) -> Option<i32> {
    (b.fract() == 0.0 && b.abs() <= i32::MAX as f64).then_some(b as i32)
}

/// `a^b`: repeated multiplication for integer `b`, `exp(b ln a)` otherwise.
fn power(a: f64, b: f64, x: f64) -> Result<f64, DomainError> {
    match integer_exponent(b) {
        Some(n) if n >= 0 => Ok(a.powi(n)),
        Some(n) => {
            if a == 0.0 {
                Err(DomainError {
                    op: "negative power",
                    arg: a,
                    x,
                })
            } else {
                Ok(1.0 / a.powi(-n))
            }
        }
        None => {
            if a > 0.0 {
                Ok((b * a.ln()).exp())
            } else {
                Err(DomainError {
                    op: "non-integer power",
                    arg: a,
                    x,
                })
            }
        }
    }
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// True when the tree does not mention `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, DomainError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(DomainError {
                                op: "division",
                                arg: b,
                                x,
                            });
                        }
                        a / b
                    }
                    BinOp::Pow => power(a, b, x)?,
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval(x)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Ln if a > 0.0 => a.ln(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sqrt if a >= 0.0 => a.sqrt(),
                    Func::Ln | Func::Sqrt => {
                        return Err(DomainError {
                            op: f.name(),
                            arg: a,
                            x,
                        })
                    }
                }
            }
        })
    }

    /// Symbolic derivative with respect to `x`, followed by constant folding.
    pub fn differentiate(&self) -> Expr {
        self.derive().fold_constants()
    }

    fn derive(&self) -> Expr {
        use BinOp::*;
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Neg(a) => Expr::Neg(Box::new(a.derive())),
            Expr::Binary(op, u, v) => {
                let (u, v) = (u.as_ref().clone(), v.as_ref().clone());
                match op {
                    Add | Sub => Expr::bin(*op, u.derive(), v.derive()),
                    Mul => Expr::bin(
                        Add,
                        Expr::bin(Mul, u.derive(), v.clone()),
                        Expr::bin(Mul, u, v.derive()),
                    ),
                    Div => Expr::bin(
                        Div,
                        Expr::bin(
                            Sub,
                            Expr::bin(Mul, u.derive(), v.clone()),
                            Expr::bin(Mul, u.clone(), v.derive()),
                        ),
                        Expr::bin(Mul, v.clone(), v),
                    ),
                    Pow if v.is_constant() => {
                        // c * u^(c-1) * u'
                        let du = u.derive();
                        Expr::bin(
                            Mul,
                            Expr::bin(Mul, v.clone(), Expr::bin(Pow, u, Expr::bin(Sub, v, Expr::Const(1.0)))),
                            du,
                        )
                    }
                    Pow => {
                        // u^v * (v' ln u + v u' / u)
                        let (du, dv) = (u.derive(), v.derive());
                        Expr::bin(
                            Mul,
                            Expr::bin(Pow, u.clone(), v.clone()),
                            Expr::bin(
                                Add,
                                Expr::bin(Mul, dv, Expr::call(Func::Ln, u.clone())),
                                Expr::bin(Div, Expr::bin(Mul, v, du), u),
                            ),
                        )
                    }
                }
            }
            Expr::Call(f, a) => {
                let inner = a.as_ref().clone();
                let da = inner.derive();
                match f {
                    Func::Exp => Expr::bin(Mul, Expr::call(Func::Exp, inner), da),
                    Func::Ln => Expr::bin(Div, da, inner),
                    Func::Sin => Expr::bin(Mul, Expr::call(Func::Cos, inner), da),
                    Func::Cos => Expr::Neg(Box::new(Expr::bin(Mul, Expr::call(Func::Sin, inner), da))),
                    Func::Sqrt => Expr::bin(Div, da, Expr::bin(Mul, Expr::Const(2.0), Expr::call(Func::Sqrt, inner))),
                }
            }
        }
    }

    /// Replaces every subtree made only of literals by its value. Subtrees
    /// that would evaluate to a non-finite value or a domain error are kept.
    pub fn fold_constants(self) -> Expr {
        let folded = match self {
            Expr::Neg(a) => Expr::Neg(Box::new(a.fold_constants())),
            Expr::Binary(op, a, b) => Expr::Binary(op, Box::new(a.fold_constants()), Box::new(b.fold_constants())),
            Expr::Call(f, a) => Expr::Call(f, Box::new(a.fold_constants())),
            leaf => leaf,
        };
        match &folded {
            Expr::Const(_) | Expr::Var => folded,
            _ if folded.is_constant() => match folded.eval(0.0) {
                Ok(v) if v.is_finite() => Expr::Const(v),
                _ => folded,
            },
            _ => folded,
        }
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{:?})", -c)
            }
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => f.write_str("x"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_atom(f)
            }
            Expr::Binary(op, a, b) => {
                f.write_str("(")?;
                a.fmt_atom(f)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_atom(f)?;
                f.write_str(")")
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_atom(f)?;
                f.write_str(")")
            }
        }
    }
}

/// Fully parenthesised form that re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_atom(f)
    }
}
