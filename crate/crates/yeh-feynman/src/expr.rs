//! Arithmetic expressions in the variables `s`, `t` for custom kernels and
//! atoms: `+ - * / ^`, parentheses, `pi`, and the functions
//! `sin cos tan exp sqrt abs`.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    VarS,
    VarT,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Func(Func, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Sqrt,
    Abs,
}

/// A parsed expression over `(s, t)`.
#[derive(Debug, Clone)]
pub struct KernelExpr {
    source: String,
    root: Node,
}

impl KernelExpr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut p = Parser { tokens, pos: 0, source };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self { source: source.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        eval(&self.root, s, t)
    }

    /// Sample the expression at the grid midpoints.
    pub fn sample(&self, grid: &GridSpec) -> Result<GridFunction> {
        GridFunction::sample(grid, |s, t| self.eval(s, t)).map_err(|e| match e {
            Error::NonFinite(_) => {
                Error::NonFinite(format!("expression '{}' is not finite on the grid", self.source))
            }
            other => other,
        })
    }
}

fn eval(node: &Node, s: f64, t: f64) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::VarS => s,
        Node::VarT => t,
        Node::Add(a, b) => eval(a, s, t) + eval(b, s, t),
        Node::Sub(a, b) => eval(a, s, t) - eval(b, s, t),
        Node::Mul(a, b) => eval(a, s, t) * eval(b, s, t),
        Node::Div(a, b) => eval(a, s, t) / eval(b, s, t),
        Node::Pow(a, b) => eval(a, s, t).powf(eval(b, s, t)),
        Node::Neg(a) => -eval(a, s, t),
        Node::Func(f, a) => {
            let x = eval(a, s, t);
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Exp => x.exp(),
                Func::Sqrt => x.sqrt(),
                Func::Abs => x.abs(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // exponent suffix like 1.5e-3
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::Expr(format!("bad number '{text}' in '{src}'")))?;
                out.push(Token::Num(v));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push(Token::Ident(src[start..i].to_string()));
            }
            other => return Err(Error::Expr(format!("unexpected character '{other}' in '{src}'"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    source: &'a str,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: &str) -> Error {
        Error::Expr(format!("{msg} in '{}'", self.source))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    // right-associative: 2^3^2 = 2^(3^2)
    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.bump() {
            Some(Token::Num(v)) => Ok(Node::Num(v)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(self.error("expected ')'")),
                }
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "s" => Ok(Node::VarS),
                "t" => Ok(Node::VarT),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                func => {
                    let f = match func {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "tan" => Func::Tan,
                        "exp" => Func::Exp,
                        "sqrt" => Func::Sqrt,
                        "abs" => Func::Abs,
                        _ => return Err(self.error(&format!("unknown identifier '{name}'"))),
                    };
                    match self.bump() {
                        Some(Token::LParen) => {}
                        _ => return Err(self.error(&format!("expected '(' after '{name}'"))),
                    }
                    let arg = self.expr()?;
                    match self.bump() {
                        Some(Token::RParen) => Ok(Node::Func(f, Box::new(arg))),
                        _ => Err(self.error("expected ')'")),
                    }
                }
            },
            _ => Err(self.error("expected a value")),
        }
    }
}
