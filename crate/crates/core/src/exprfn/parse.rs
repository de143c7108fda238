//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          right-associative, exponent must be constant
//! primary := number | 'pi' | 'e' | VAR | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! `-x^2` therefore parses as `-(x^2)` and `2^3^2` as `2^(3^2)`.

use std::fmt;

use thiserror::Error;

use super::expr::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at byte offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Empty,
    Syntax { expected: Vec<&'static str>, found: String },
    UnknownIdentifier(String),
    NonConstantExponent,
    InvalidNumber(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => f.write_str("empty expression"),
            ParseErrorKind::Syntax { expected, found } => {
                write!(f, "expected one of [{}], found {found}", expected.join(", "))
            }
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier `{name}`"),
            ParseErrorKind::NonConstantExponent => f.write_str("exponent must be a constant expression"),
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number literal `{s}`"),
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
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number {v}"),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

const OPERAND: &[&str] = &["number", "identifier", "`(`", "`-`"];

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                // optional exponent part: e, E followed by optional sign and digits
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text = &src[i..j];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::InvalidNumber(text.to_string()),
                })?;
                out.push((Token::Num(v), start));
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                out.push((Token::Ident(src[i..j].to_string()), start));
                i = j;
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::Syntax {
                        expected: vec!["operator", "operand"],
                        found: format!("character `{ch}`"),
                    },
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Token::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Syntax {
                expected: expected.to_vec(),
                found: self.peek().describe(),
            },
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Token::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Token::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Token::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Token::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let exponent = self.unary()?;
        if !exponent.is_constant() {
            return Err(ParseError {
                offset: at,
                kind: ParseErrorKind::NonConstantExponent,
            });
        }
        let p = exponent.eval(0.0).map_err(|_| ParseError {
            offset: at,
            kind: ParseErrorKind::NonConstantExponent,
        })?;
        Ok(Expr::Pow(Box::new(base), p))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Token::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Token::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                self.bump();
                if name == self.var {
                    return Ok(Expr::Var);
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
                    "e" => return Ok(Expr::Const(std::f64::consts::E)),
                    _ => {}
                }
                let func = Func::from_name(&name).ok_or(ParseError {
                    offset: at,
                    kind: ParseErrorKind::UnknownIdentifier(name),
                })?;
                if *self.peek() != Token::LParen {
                    return Err(self.unexpected(&["`(`"]));
                }
                self.bump();
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.unexpected(OPERAND)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Token::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&["`)`", "operator"]))
        }
    }
}

/// Parses `source` with `var` as the only free variable.
pub fn parse_in(source: &str, var: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    if tokens.len() == 1 {
        return Err(ParseError {
            offset: 0,
            kind: ParseErrorKind::Empty,
        });
    }
    let mut p = Parser { tokens, pos: 0, var };
    let e = p.expr()?;
    if *p.peek() != Token::End {
        return Err(p.unexpected(&["operator", "end of input"]));
    }
    Ok(e)
}

/// Parses an expression in the variable `x`.
pub fn parse_expression(source: &str) -> Result<Expr, ParseError> {
    parse_in(source, "x")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn product() {
        assert_eq!(
            parse_expression("2*x").unwrap(),
            Expr::Mul(b(Expr::Const(2.0)), b(Expr::Var))
        );
    }

    #[test]
    fn power() {
        assert_eq!(parse_expression("x^2").unwrap(), Expr::Pow(b(Expr::Var), 2.0));
    }

    #[test]
    fn unclosed_call_reports_end_offset() {
        let err = parse_expression("sin(").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(matches!(err.kind, ParseErrorKind::Syntax { .. }));
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expression("-x^2").unwrap();
        assert_eq!(e, Expr::Neg(b(Expr::Pow(b(Expr::Var), 2.0))));
        assert_eq!(parse_expression("2^3^2").unwrap(), Expr::Pow(b(Expr::Const(2.0)), 9.0));
        let e = parse_expression("1 - 2 - 3").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), -4.0);
        let e = parse_expression("8 / 4 / 2").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 1.0);
        let e = parse_expression("2 + 3 * x ^ 2").unwrap();
        assert_eq!(e.eval(2.0).unwrap(), 14.0);
    }

    #[test]
    fn constant_exponent_expressions_fold() {
        let e = parse_expression("x^(1/2)").unwrap();
        assert_eq!(e, Expr::Pow(b(Expr::Var), 0.5));
        let e = parse_expression("x^-1").unwrap();
        assert_eq!(e, Expr::Pow(b(Expr::Var), -1.0));
        let err = parse_expression("2^x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonConstantExponent);
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_expression("2*y").unwrap_err();
        assert_eq!(err.offset, 2);
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("y".into()));
        assert!(parse_in("2*y", "y").is_ok());
        assert!(matches!(
            parse_expression("tan(x)").unwrap_err().kind,
            ParseErrorKind::UnknownIdentifier(_)
        ));
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(parse_expression("").unwrap_err().kind, ParseErrorKind::Empty);
        assert_eq!(parse_expression("   ").unwrap_err().kind, ParseErrorKind::Empty);
        assert_eq!(parse_expression("x +").unwrap_err().offset, 3);
        assert_eq!(parse_expression("x x").unwrap_err().offset, 2);
        assert_eq!(parse_expression("(x").unwrap_err().offset, 2);
        assert_eq!(parse_expression("x # 2").unwrap_err().offset, 2);
        assert_eq!(parse_expression("sin x").unwrap_err().offset, 4);
    }

    #[test]
    fn scientific_literals_and_constants() {
        assert_eq!(parse_expression("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse_expression("2E2").unwrap(), Expr::Const(200.0));
        let e = parse_expression("sin(pi/2) + e - e").unwrap();
        assert!((e.eval(0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn display_reparses_to_same_values() {
        for src in [
            "x^2 - 3*x/(1 + x)",
            "-(x - 1)^3",
            "exp(-x)*sin(2*x)",
            "sqrt(abs(x)) - log(1 + x^2)",
        ] {
            let e = parse_expression(src).unwrap();
            let again = parse_expression(&e.to_string()).unwrap();
            for x in [0.3, 0.7, 1.9] {
                assert_eq!(e.eval(x).unwrap(), again.eval(x).unwrap(), "{src} vs {e}");
            }
        }
    }
}
