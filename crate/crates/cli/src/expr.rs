//! Point expressions: comma-separated terms built from decimal literals,
//! `pi`, `+ - * /`, parentheses and integer powers. Each coordinate is
//! evaluated by enclosure and correctly rounded to a double.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use stabilis::fp::{round_with_retry, ExactReal, FpError, Precision};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("cannot parse `{input}`: {reason}")]
    Syntax { input: String, reason: String },
    #[error("cannot evaluate `{input}`: {source}")]
    Eval { input: String, source: FpError },
    #[error("`{0}` does not fit in a double")]
    NotFinite(String),
}

#[derive(Clone, Debug, PartialEq)]
enum Expr {
    Num(BigRational),
    Pi,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    fn eval(&self, bits: u32) -> Result<ExactReal, FpError> {
        Ok(match self {
            Expr::Num(q) => ExactReal::Rational(q.clone()),
            Expr::Pi => ExactReal::pi(bits),
            Expr::Neg(e) => e.eval(bits)?.neg(),
            Expr::Add(a, b) => a.eval(bits)?.add(&b.eval(bits)?),
            Expr::Sub(a, b) => a.eval(bits)?.sub(&b.eval(bits)?),
            Expr::Mul(a, b) => a.eval(bits)?.mul(&b.eval(bits)?),
            Expr::Div(a, b) => a.eval(bits)?.div(&b.eval(bits)?, bits)?,
            Expr::Pow(base, k) => {
                let b = base.eval(bits)?;
                let mut acc = ExactReal::from_integer(1);
                for _ in 0..k.unsigned_abs() {
                    acc = acc.mul(&b);
                }
                if *k < 0 {
                    ExactReal::from_integer(1).div(&acc, bits)?
                } else {
                    acc
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(BigRational),
    Int(i64),
    Pi,
    Op(char),
}

fn decimal(text: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exponent - frac.len() as i32;
    let ten = BigRational::from_integer(10.into());
    Some(BigRational::from_integer(digits) * Pow::pow(ten, scale))
}

fn tokenize(s: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let token = match text.parse::<i64>() {
                Ok(n) => Token::Int(n),
                Err(_) => Token::Num(decimal(&text).ok_or(format!("bad number `{text}`"))?),
            };
            out.push(token);
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word.eq_ignore_ascii_case("pi") {
                out.push(Token::Pi);
            } else {
                return Err(format!("unknown name `{word}`"));
            }
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, String> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, String> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, String> {
        let base = self.primary()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let negative = self.peek_op() == Some('-');
        if negative {
            self.pos += 1;
        }
        match self.tokens.get(self.pos) {
            Some(Token::Int(k)) if *k <= 4096 => {
                self.pos += 1;
                let k = *k as i32;
                Ok(Expr::Pow(Box::new(base), if negative { -k } else { k }))
            }
            _ => Err("exponent must be an integer of magnitude at most 4096".into()),
        }
    }

    fn primary(&mut self) -> Result<Expr, String> {
        let token = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        match token {
            Some(Token::Int(n)) => Ok(Expr::Num(BigRational::from_integer(n.into()))),
            Some(Token::Num(q)) => Ok(Expr::Num(q)),
            Some(Token::Pi) => Ok(Expr::Pi),
            Some(Token::Op('(')) => {
                let e = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(e)
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of input".into()),
        }
    }
}

fn parse(input: &str) -> Result<Expr, ExprError> {
    let syntax = |reason: String| ExprError::Syntax {
        input: input.to_string(),
        reason,
    };
    let tokens = tokenize(input).map_err(syntax)?;
    let mut parser = Parser { tokens, pos: 0 };
    let e = parser.expr().map_err(syntax)?;
    if parser.pos != parser.tokens.len() {
        return Err(syntax("trailing input".into()));
    }
    Ok(e)
}

/// Evaluates one expression, correctly rounded to the nearest double.
pub fn eval_f64(input: &str) -> Result<f64, ExprError> {
    let e = parse(input)?;
    let x = round_with_retry(Precision::DOUBLE, |bits| e.eval(bits)).map_err(|source| ExprError::Eval {
        input: input.to_string(),
        source,
    })?;
    let v = x.to_f64();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::NotFinite(input.to_string()))
    }
}

/// Parses a comma-separated point.
pub fn parse_point(input: &str) -> Result<Vec<f64>, ExprError> {
    input.split(',').map(eval_f64).collect()
}
