//! Formulas for `rho`: numbers, `+ - * / ^`, parentheses, `pi`, `e`,
//! `exp log ln sqrt sin cos tan sinh cosh tanh`, ambient coordinates
//! `x1..x{n+1}` and chart coordinates `u1..un`.
//!
//! Positions in errors are byte offsets into the text handed to [`parse`],
//! shifted by its `offset` argument.

use crate::dual::Dual2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn apply(self, a: &Dual2) -> Dual2 {
        match self {
            Func::Exp => a.exp(),
            Func::Ln => a.ln(),
            Func::Sqrt => a.sqrt(),
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Tan => a.tan(),
            Func::Sinh => a.sinh(),
            Func::Cosh => a.cosh(),
            Func::Tanh => a.tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    /// Ambient coordinate, 0-based.
    X(usize),
    /// Chart coordinate, 0-based.
    U(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    uses_chart: bool,
    uses_ambient: bool,
}

impl Expr {
    pub fn uses_chart(&self) -> bool {
        self.uses_chart
    }

    pub fn uses_ambient(&self) -> bool {
        self.uses_ambient
    }

    /// Evaluates with ambient jets `x` (length `n + 1`) and chart jets `u`
    /// (length `n`).
    pub fn eval(&self, x: &[Dual2], u: &[Dual2]) -> Dual2 {
        let proto = x.first().or(u.first()).expect("at least one variable");
        eval(&self.root, proto, x, u)
    }

    /// Plain-value evaluation.
    pub fn eval_f64(&self, x: &[f64], u: &[f64]) -> f64 {
        let xs = Dual2::plain(x);
        let us = Dual2::plain(u);
        let proto = xs.first().or(us.first()).cloned().unwrap_or(Dual2::constant(0.0, 0));
        eval(&self.root, &proto, &xs, &us).value()
    }
}

fn eval(node: &Node, proto: &Dual2, x: &[Dual2], u: &[Dual2]) -> Dual2 {
    match node {
        Node::Num(v) => proto.lift(*v),
        Node::X(i) => x[*i].clone(),
        Node::U(i) => u[*i].clone(),
        Node::Neg(a) => -eval(a, proto, x, u),
        Node::Call(f, a) => f.apply(&eval(a, proto, x, u)),
        Node::Bin(op, a, b) => {
            if *op == BinOp::Pow {
                if let Node::Num(p) = **b {
                    let base = eval(a, proto, x, u);
                    return if p.fract() == 0.0 && p.abs() <= 64.0 {
                        base.powi(p as i32)
                    } else {
                        base.powf(p)
                    };
                }
            }
            let (l, r) = (eval(a, proto, x, u), eval(b, proto, x, u));
            match op {
                BinOp::Add => &l + &r,
                BinOp::Sub => &l - &r,
                BinOp::Mul => &l * &r,
                BinOp::Div => &l / &r,
                BinOp::Pow => (&r * &l.ln()).exp(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: usize,
    offset: usize,
    uses_chart: bool,
    uses_ambient: bool,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

fn lex(text: &str, offset: usize) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit
                .parse()
                .map_err(|_| err(offset + start, format!("bad number '{lit}'")))?;
            out.push((Tok::Num(v), offset + start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), offset + start));
        } else if "+-*/^".contains(c) {
            out.push((Tok::Op(c), offset + start));
            i += 1;
        } else if c == '(' {
            out.push((Tok::LParen, offset + start));
            i += 1;
        } else if c == ')' {
            out.push((Tok::RParen, offset + start));
            i += 1;
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(err(offset + start, format!("unexpected character '{ch}'")));
        }
    }
    out.push((Tok::End, offset + text.len()));
    Ok(out)
}

impl Parser {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let (Tok::Op(c @ ('+' | '-')), _) = self.peek().clone() {
            self.next();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let (Tok::Op(c @ ('*' | '/')), _) = self.peek().clone() {
            self.next();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // unary := '-' unary | '+' unary | power
    fn unary(&mut self) -> Result<Node> {
        match self.peek().0 {
            Tok::Op('-') => {
                self.next();
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    // power := atom ('^' unary)?   (right associative, -x^2 = -(x^2))
    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if let (Tok::Op('^'), _) = self.peek() {
            self.next();
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let (tok, pos) = self.next();
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                match self.next() {
                    (Tok::RParen, _) => Ok(inner),
                    (_, p) => Err(err(p, "expected ')'")),
                }
            }
            Tok::Ident(name) => self.ident(&name, pos),
            Tok::End => Err(err(pos, "unexpected end of formula")),
            Tok::RParen => Err(err(pos, "unexpected ')'")),
            Tok::Op(c) => Err(err(pos, format!("unexpected operator '{c}'"))),
        }
    }

    fn ident(&mut self, name: &str, pos: usize) -> Result<Node> {
        if let Some(f) = Func::from_name(name) {
            match self.next() {
                (Tok::LParen, _) => {}
                (_, p) => return Err(err(p, format!("expected '(' after {name}"))),
            }
            let arg = self.expr()?;
            return match self.next() {
                (Tok::RParen, _) => Ok(Node::Call(f, Box::new(arg))),
                (_, p) => Err(err(p, "expected ')'")),
            };
        }
        match name {
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            "e" => return Ok(Node::Num(std::f64::consts::E)),
            _ => {}
        }
        let (kind, idx) = name.split_at(1);
        if let (Ok(i), true) = (idx.parse::<usize>(), kind == "x" || kind == "u") {
            let max = if kind == "x" { self.n + 1 } else { self.n };
            if i == 0 || i > max {
                return Err(err(pos, format!("variable {name} out of range {kind}1..{kind}{max}")));
            }
            return Ok(if kind == "x" {
                self.uses_ambient = true;
                Node::X(i - 1)
            } else {
                self.uses_chart = true;
                Node::U(i - 1)
            });
        }
        Err(err(pos, format!("unknown identifier '{name}'")))
    }
}

/// Parses `text` for sphere dimension `n`. Error positions are shifted by
/// `offset`.
pub fn parse(text: &str, n: usize, offset: usize) -> Result<Expr> {
    let toks = lex(text, offset)?;
    let mut p = Parser {
        toks,
        pos: 0,
        n,
        offset,
        uses_chart: false,
        uses_ambient: false,
    };
    let root = p.expr()?;
    match p.peek() {
        (Tok::End, _) => {}
        (_, pos) => return Err(err(*pos, "unexpected trailing input")),
    }
    let _ = p.offset;
    Ok(Expr {
        root,
        uses_chart: p.uses_chart,
        uses_ambient: p.uses_ambient,
    })
}
