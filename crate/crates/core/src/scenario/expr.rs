//! A small arithmetic expression language over the time variable `t`, used to
//! define fault signals: literals, `t`, unary minus, `+ - * / ^`, and the
//! functions `sin`, `cos`, `abs`, `min`, `max`. `^` binds tightest and is
//! right-associative; unary minus binds between `^` and `* /`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("parse error at position {position}: found {found}, expected {}", expected.join(" or "))]
    UnexpectedToken { position: usize, found: String, expected: Vec<String> },
    #[error("parse error at position {position}: unknown identifier `{name}`")]
    UnknownIdentifier { position: usize, name: String },
    #[error("parse error at position {position}: division by constant zero")]
    DivisionByConstantZero { position: usize },
    #[error("parse error at position {position}: invalid number literal `{text}`")]
    InvalidNumber { position: usize, text: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("division by zero while evaluating at t = {t}")]
    DivisionByZero { t: String },
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
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Abs,
    Min,
    Max,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Sin | Func::Cos | Func::Abs => 1,
            Func::Min | Func::Max => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Literal(f64),
    Time,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

const NEG_PRECEDENCE: u8 = 3;

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Literal(_) | Node::Time | Node::Call(..) => u8::MAX,
            Node::Neg(_) => NEG_PRECEDENCE,
            Node::Binary(op, ..) => op.precedence(),
        }
    }

    fn eval(&self, t: f64) -> Result<f64, EvalError> {
        Ok(match self {
            Node::Literal(v) => *v,
            Node::Time => t,
            Node::Neg(e) => -e.eval(t)?,
            Node::Binary(op, l, r) => {
                let a = l.eval(t)?;
                let b = r.eval(t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero { t: t.to_string() });
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            Node::Call(f, args) => {
                let a = args[0].eval(t)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Abs => a.abs(),
                    Func::Min => a.min(args[1].eval(t)?),
                    Func::Max => a.max(args[1].eval(t)?),
                }
            }
        })
    }

    fn write(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Literal(v) => write!(f, "{v}"),
            Node::Time => write!(f, "t"),
            Node::Neg(e) => {
                write!(f, "-")?;
                // operands binding looser than unary minus need parentheses
                if e.precedence() < NEG_PRECEDENCE {
                    write!(f, "(")?;
                    e.write(f)?;
                    write!(f, ")")
                } else {
                    e.write(f)
                }
            }
            Node::Binary(op, l, r) => {
                let p = op.precedence();
                let (lp, rp) = match op {
                    BinOp::Pow => (p + 1, p), // right-associative
                    _ => (p, p + 1),
                };
                paren_if(f, l, lp)?;
                write!(f, " {} ", op.symbol())?;
                paren_if(f, r, rp)
            }
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    a.write(f)?;
                }
                write!(f, ")")
            }
        }
    }
}

fn paren_if(f: &mut fmt::Formatter<'_>, node: &Node, min_prec: u8) -> fmt::Result {
    if node.precedence() < min_prec {
        write!(f, "(")?;
        node.write(f)?;
        write!(f, ")")
    } else {
        node.write(f)
    }
}

/// A parsed fault-signal expression over `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalExpression {
    root: Node,
}

impl SignalExpression {
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        self.root.eval(t)
    }

    pub fn constant(v: f64) -> Self {
        Self { root: Node::Literal(v) }
    }
}

impl fmt::Display for SignalExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(f)
    }
}

impl FromStr for SignalExpression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_signal(s)
    }
}

/// Parses an expression; errors carry the byte position and the expected
/// token set.
pub fn parse_signal(text: &str) -> Result<SignalExpression, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, end: text.len() };
    let root = p.expression()?;
    p.expect_end()?;
    Ok(SignalExpression { root })
}

/// Evaluates a parsed expression at a point in time.
pub fn eval_expression(expr: &SignalExpression, t: f64) -> Result<f64, EvalError> {
    expr.eval(t)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(_, text) => format!("number `{text}`"),
            Token::Ident(name) => format!("`{name}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '+' => push(&mut tokens, Token::Plus, &mut i),
            '-' => push(&mut tokens, Token::Minus, &mut i),
            '*' => push(&mut tokens, Token::Star, &mut i),
            '/' => push(&mut tokens, Token::Slash, &mut i),
            '^' => push(&mut tokens, Token::Caret, &mut i),
            '(' => push(&mut tokens, Token::LParen, &mut i),
            ')' => push(&mut tokens, Token::RParen, &mut i),
            ',' => push(&mut tokens, Token::Comma, &mut i),
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                let text = &text[start..i];
                let value = f64::from_str(text).map_err(|_| ParseError::InvalidNumber {
                    position: start,
                    text: text.to_string(),
                })?;
                tokens.push((Token::Number(value, text.to_string()), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                tokens.push((Token::Ident(text[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError::UnexpectedToken {
                    position: i,
                    found: format!("`{c}`"),
                    expected: vec!["a token".into()],
                })
            }
        }
    }
    Ok(tokens)
}

fn push(tokens: &mut Vec<(Token, usize)>, t: Token, i: &mut usize) {
    tokens.push((t, *i));
    *i += 1;
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &[&str]) -> ParseError {
        let (found, position) = match self.peek() {
            Some((t, p)) => (t.describe(), *p),
            None => ("end of input".to_string(), self.end),
        };
        ParseError::UnexpectedToken {
            position,
            found,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(self.error_here(&["end of input", "an operator"]))
        }
    }

    fn expression(&mut self) -> Result<Node, ParseError> {
        let mut node = self.term()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.term()?;
            node = Node::Binary(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut node = self.unary()?;
        while let Some((tok, pos)) = self.peek().cloned() {
            let op = match tok {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => break,
            };
            self.advance();
            let rhs_pos = self.peek().map(|(_, p)| *p).unwrap_or(pos);
            let rhs = self.unary()?;
            if op == BinOp::Div && matches!(rhs, Node::Literal(v) if v == 0.0) {
                return Err(ParseError::DivisionByConstantZero { position: rhs_pos });
            }
            node = Node::Binary(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if matches!(self.peek(), Some((Token::Minus, _))) {
            self.advance();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some((Token::Caret, _))) {
            self.advance();
            // right-associative; the exponent may carry a unary minus
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let atom_expected: [&str; 5] = ["a number", "`t`", "a function", "`(`", "`-`"];
        let Some((tok, pos)) = self.peek().cloned() else {
            return Err(self.error_here(&atom_expected));
        };
        match tok {
            Token::Number(v, _) => {
                self.advance();
                Ok(Node::Literal(v))
            }
            Token::LParen => {
                self.advance();
                let node = self.expression()?;
                if matches!(self.peek(), Some((Token::RParen, _))) {
                    self.advance();
                    Ok(node)
                } else {
                    Err(self.error_here(&["`)`"]))
                }
            }
            Token::Ident(name) => {
                self.advance();
                match name.as_str() {
                    "t" => Ok(Node::Time),
                    "sin" => self.call(Func::Sin),
                    "cos" => self.call(Func::Cos),
                    "abs" => self.call(Func::Abs),
                    "min" => self.call(Func::Min),
                    "max" => self.call(Func::Max),
                    _ => Err(ParseError::UnknownIdentifier { position: pos, name }),
                }
            }
            _ => Err(self.error_here(&atom_expected)),
        }
    }

    fn call(&mut self, func: Func) -> Result<Node, ParseError> {
        if !matches!(self.peek(), Some((Token::LParen, _))) {
            return Err(self.error_here(&["`(`"]));
        }
        self.advance();
        let mut args = vec![self.expression()?];
        while args.len() < func.arity() {
            if !matches!(self.peek(), Some((Token::Comma, _))) {
                return Err(self.error_here(&["`,`"]));
            }
            self.advance();
            args.push(self.expression()?);
        }
        if !matches!(self.peek(), Some((Token::RParen, _))) {
            return Err(self.error_here(&["`)`"]));
        }
        self.advance();
        Ok(Node::Call(func, args))
    }
}
