use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::error::AlgebraError;
use crate::expr::{Expression, FieldContext, FuncKind, Owner};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    Lex(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("densities may not depend explicitly on the base coordinate `{0}`")]
    BaseCoordinate(String),
    #[error("malformed multi-index: {0}")]
    MalformedMultiIndex(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("exponent must be a positive integer")]
    BadExponent,
    #[error("{0}")]
    Algebra(AlgebraError),
    #[error("invalid context declaration: {0}")]
    Context(String),
}

/// A parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, column);
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        let tok = if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&d) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                digits.push(d);
                chars.next();
                column += 1;
            }
            Tok::Int(digits.parse().expect("ascii digits"))
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while let Some(&d) = chars.peek() {
                if !(d.is_ascii_alphanumeric() || d == '_') {
                    break;
                }
                name.push(d);
                chars.next();
                column += 1;
            }
            Tok::Ident(name)
        } else if "+-*/^()[],".contains(c) {
            chars.next();
            column += 1;
            Tok::Sym(c)
        } else {
            return Err(ParseError {
                line,
                column,
                kind: ParseErrorKind::Lex(c),
            });
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    ctx: &'a Arc<FieldContext>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, at: &Spanned, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: at.line,
            column: at.column,
            kind,
        }
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        self.error_at(&self.toks[self.pos], kind)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_here(ParseErrorKind::Unexpected {
            expected: expected.into(),
            found: self.peek().describe(),
        })
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(-self.term()?);
        }
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Sym('*') {
            self.bump();
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expression, ParseError> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Sym('^') {
            self.bump();
            let at = self.toks[self.pos].clone();
            let n = match self.bump().tok {
                Tok::Int(n) if !n.is_zero() => n,
                _ => return Err(self.error_at(&at, ParseErrorKind::BadExponent)),
            };
            let n: u32 = n
                .try_into()
                .map_err(|_| self.error_at(&at, ParseErrorKind::BadExponent))?;
            base = base.pow(n);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expression, ParseError> {
        let at = self.toks[self.pos].clone();
        match at.tok.clone() {
            Tok::Int(num) => {
                self.bump();
                let mut den = BigInt::one();
                if *self.peek() == Tok::Sym('/') {
                    self.bump();
                    let den_at = self.toks[self.pos].clone();
                    match self.bump().tok {
                        Tok::Int(d) if d.is_zero() => {
                            return Err(self.error_at(&den_at, ParseErrorKind::ZeroDenominator))
                        }
                        Tok::Int(d) => den = d,
                        other => {
                            return Err(self.error_at(
                                &den_at,
                                ParseErrorKind::Unexpected {
                                    expected: "denominator".into(),
                                    found: other.describe(),
                                },
                            ))
                        }
                    }
                }
                Ok(Expression::constant(self.ctx, Rational::new(num, den)))
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.expr()?;
                self.expect_sym(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(kind) = FuncKind::from_name(&name) {
                    self.expect_sym('(')?;
                    let arg = self.expr()?;
                    self.expect_sym(')')?;
                    return Expression::func(kind, &arg)
                        .map_err(|e| self.error_at(&at, ParseErrorKind::Algebra(e)));
                }
                if self.ctx.is_independent(&name) {
                    return Err(self.error_at(&at, ParseErrorKind::BaseCoordinate(name)));
                }
                let owner = self.ctx.lookup(&name).ok_or_else(|| {
                    self.error_at(&at, ParseErrorKind::UnknownIdentifier(name.clone()))
                })?;
                let order = self.multi_index()?;
                self.jet(owner, order, &at)
            }
            _ => Err(self.unexpected("a number, jet variable, function or `(`")),
        }
    }

    fn multi_index(&mut self) -> Result<Option<Vec<u16>>, ParseError> {
        if *self.peek() != Tok::Sym('[') {
            return Ok(None);
        }
        self.bump();
        let mut orders = Vec::new();
        loop {
            let at = self.toks[self.pos].clone();
            match self.bump().tok {
                Tok::Int(k) => {
                    let k: u16 = k.try_into().map_err(|_| {
                        self.error_at(
                            &at,
                            ParseErrorKind::MalformedMultiIndex("order too large".into()),
                        )
                    })?;
                    orders.push(k);
                }
                other => {
                    return Err(self.error_at(
                        &at,
                        ParseErrorKind::MalformedMultiIndex(format!(
                            "expected an order, found {}",
                            other.describe()
                        )),
                    ))
                }
            }
            match self.peek() {
                Tok::Sym(',') => {
                    self.bump();
                }
                Tok::Sym(']') => {
                    self.bump();
                    return Ok(Some(orders));
                }
                _ => {
                    return Err(self.error_here(ParseErrorKind::MalformedMultiIndex(format!(
                        "expected `,` or `]`, found {}",
                        self.peek().describe()
                    ))))
                }
            }
        }
    }

    fn jet(
        &self,
        owner: Owner,
        order: Option<Vec<u16>>,
        at: &Spanned,
    ) -> Result<Expression, ParseError> {
        let dim = self.ctx.dim();
        let order = match order {
            None => vec![0; dim],
            Some(o) if o.len() == dim => o,
            Some(o) => {
                return Err(self.error_at(
                    at,
                    ParseErrorKind::MalformedMultiIndex(format!(
                        "{} entries given, {} independent variables declared",
                        o.len(),
                        dim
                    )),
                ))
            }
        };
        Expression::jet(self.ctx, owner, &order)
            .map_err(|e| self.error_at(at, ParseErrorKind::Algebra(e)))
    }
}

/// Parses a density in the `+ - * ^ ( )` grammar with bracketed jet orders
/// (`q[2]`, `u[1,0]`) and `exp`/`sin`/`cos` factors.
pub fn parse_density(text: &str, ctx: &Arc<FieldContext>) -> Result<Expression, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0, ctx };
    let e = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.unexpected("an operator or end of input"));
    }
    Ok(e)
}
