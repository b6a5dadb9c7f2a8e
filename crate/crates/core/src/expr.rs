//! Scalar expressions in one variable `t`, for order functions and forcing
//! terms given as text.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          // right associative
//! primary := number | 't' | 'pi' | ('sin' | 'cos') '(' expr ')' | '(' expr ')'
//! ```

use std::fmt;

use crate::error::{Error, Result};

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
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    T,
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        Parser::new(src).parse()
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::T => t,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(e) => -e.eval(t),
            Expr::Bin(op, l, r) => {
                let (a, b) = (l.eval(t), r.eval(t));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(Func::Sin, e) => e.eval(t).sin(),
            Expr::Call(Func::Cos, e) => e.eval(t).cos(),
        }
    }

    pub fn depends_on_t(&self) -> bool {
        match self {
            Expr::T => true,
            Expr::Num(_) | Expr::Pi => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on_t(),
            Expr::Bin(_, l, r) => l.depends_on_t() || r.depends_on_t(),
        }
    }
}

// Fully parenthesised so that printing and re-parsing is stable.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => write!(f, "(-{})", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::T => f.write_str("t"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(Func::Sin, e) => write!(f, "sin({e})"),
            Expr::Call(Func::Cos, e) => write!(f, "cos({e})"),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
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

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            tok: Tok::End,
            tok_start: 0,
        }
    }

    fn parse(mut self) -> Result<Expr> {
        if self.src.trim().is_empty() {
            return Err(Error::Syntax {
                offset: 0,
                message: "empty expression".into(),
            });
        }
        self.advance()?;
        let e = self.expr()?;
        if self.tok != Tok::End {
            return Err(self.unexpected("end of input"));
        }
        Ok(e)
    }

    fn unexpected(&self, wanted: &str) -> Error {
        let found = match &self.tok {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        };
        Error::Syntax {
            offset: self.tok_start,
            message: format!("expected {wanted}, found {found}"),
        }
    }

    fn advance(&mut self) -> Result<()> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        self.tok = match c {
            b'0'..=b'9' | b'.' => {
                let start = self.pos;
                while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                    self.pos += 1;
                }
                if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                    let mut look = self.pos + 1;
                    if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                        look += 1;
                    }
                    if look < bytes.len() && bytes[look].is_ascii_digit() {
                        self.pos = look;
                        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                    }
                }
                let text = &self.src[start..self.pos];
                let v: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                Tok::Num(v)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                    self.pos += 1;
                }
                Tok::Ident(self.src[start..self.pos].to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            _ => {
                let ch = self.src[self.pos..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: self.pos,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.tok == Tok::Op('-') {
            self.advance()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.tok == Tok::Op('^') {
            self.advance()?;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.advance()?;
                let e = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.advance()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.tok_start;
                let func = match name.as_str() {
                    "t" => {
                        self.advance()?;
                        return Ok(Expr::T);
                    }
                    "pi" => {
                        self.advance()?;
                        return Ok(Expr::Pi);
                    }
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    _ => return Err(Error::UnknownIdentifier { name, offset: at }),
                };
                self.advance()?;
                if self.tok != Tok::LParen {
                    return Err(self.unexpected("`(` after function name"));
                }
                self.advance()?;
                let arg = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.advance()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.unexpected("a number, `t`, `pi`, a function or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, t: f64) -> f64 {
        Expr::parse(src).unwrap().eval(t)
    }

    #[test]
    fn examples() {
        assert_eq!(ev("1 + sin(t)", 0.0), 1.0);
        assert_eq!(ev("0.5 * cos(0.79 * t)", 0.0), 0.5);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0), 512.0);
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("-2^2", 0.0), -4.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(ev("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(ev("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(ev("(1 + 2) * 3", 0.0), 9.0);
        assert_eq!(ev("--t", 0.25), 0.25);
        assert!((ev("2*pi", 0.0) - std::f64::consts::TAU).abs() < 1e-15);
        assert_eq!(ev("1.5e-1 + .5", 0.0), 0.65);
        assert!(!Expr::parse("1 + sin(0.3)").unwrap().depends_on_t());
        assert!(Expr::parse("1 + sin(t)").unwrap().depends_on_t());
    }

    #[test]
    fn errors_carry_offsets() {
        match Expr::parse("1 + foo(t)") {
            Err(Error::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "foo");
                assert_eq!(offset, 4);
            }
            other => panic!("{other:?}"),
        }
        match Expr::parse("sin t") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match Expr::parse("(1 + 2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        match Expr::parse("1 $ 2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Expr::parse("   "), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(Expr::parse("1 2"), Err(Error::Syntax { offset: 2, .. })));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-5.0f64..5.0).prop_map(Expr::Num),
            Just(Expr::T),
            Just(Expr::Pi),
        ];
        leaf.prop_recursive(5, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (inner.clone(), inner.clone(), prop_oneof![
                    Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)
                ])
                .prop_map(|(l, r, op)| Expr::Bin(op, Box::new(l), Box::new(r))),
                inner.clone().prop_map(|e| Expr::Call(Func::Sin, Box::new(e))),
                inner.prop_map(|e| Expr::Call(Func::Cos, Box::new(e))),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn print_parse_round_trip(e in arb_expr(), ts in proptest::collection::vec(0.0f64..=1.0, 10)) {
            let printed = e.to_string();
            let back = Expr::parse(&printed).unwrap();
            prop_assert_eq!(back.to_string(), printed.clone());
            for t in ts {
                let (a, b) = (e.eval(t), back.eval(t));
                prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()), "{} at t={}: {} vs {}", printed, t, a, b);
            }
        }
    }
}
