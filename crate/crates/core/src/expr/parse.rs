//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := base ("^" exponent)?
//! exponent := INT | "-" INT | "(" "-"? INT ("/" INT)? ")"
//! base   := number | ident | "(" expr ")" | "sqrt(" expr ")"
//!         | ident "(" expr ("," expr)* ")" | "d[" INT ("," INT)* "]" ident "(" ... ")"
//! ```
//!
//! Coordinates are `x1..xn` or the declared base names, and `u<i>` or
//! `u<i>_<letters>` for fiber coordinates (`u`, `u_<letters>` when `m = 1`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::Expr;
use crate::error::{Error, Result};
use crate::jet::JetContext;
use crate::multi_index::MultiIndex;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let (pos, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(k + 1).is_some_and(|(_, d)| d.is_ascii_digit())) {
            let start = k;
            while k < chars.len() && chars[k].1.is_ascii_digit() {
                k += 1;
            }
            let int_part: String = chars[start..k].iter().map(|(_, c)| c).collect();
            if k < chars.len() && chars[k].1 == '.' {
                k += 1;
                let fs = k;
                while k < chars.len() && chars[k].1.is_ascii_digit() {
                    k += 1;
                }
                let frac: String = chars[fs..k].iter().map(|(_, c)| c).collect();
                let digits = format!("{int_part}{frac}");
                let n: BigInt = digits.parse().unwrap_or_else(|_| BigInt::zero());
                let d = num_traits::pow(BigInt::from(10), frac.len());
                out.push((Tok::Num(BigRational::new(n, d)), pos));
            } else {
                out.push((Tok::Int(int_part.parse().unwrap()), pos));
            }
        } else if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].1.is_alphanumeric() || chars[k].1 == '_') {
                k += 1;
            }
            out.push((Tok::Ident(chars[start..k].iter().map(|(_, c)| c).collect()), pos));
        } else if "+-*/^(),[]".contains(c) {
            out.push((Tok::Sym(c), pos));
            k += 1;
        } else {
            return Err(Error::Syntax {
                position: pos,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    ctx: &'a JetContext,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            position: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if *self.peek() == Tok::Sym('/') {
                let pos = self.pos();
                self.bump();
                let d = self.unary()?;
                acc = acc.checked_div(&d).map_err(|_| Error::Syntax {
                    position: pos,
                    message: "division by an expression that is identically zero".into(),
                })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn small_int(&mut self) -> Result<i64> {
        let neg = self.eat('-');
        match self.bump() {
            Tok::Int(n) => {
                let v = n.to_i64().filter(|v| v.abs() <= 1 << 20);
                match v {
                    Some(v) => Ok(if neg { -v } else { v }),
                    None => self.err("exponent too large"),
                }
            }
            _ => self.err("expected an integer exponent"),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let b = self.primary()?;
        if !self.eat('^') {
            return Ok(b);
        }
        let pos = self.pos();
        let (p, q) = if self.eat('(') {
            let p = self.small_int()?;
            let q = if self.eat('/') { self.small_int()? } else { 1 };
            self.expect(')')?;
            (p, q)
        } else {
            (self.small_int()?, 1)
        };
        if q == 0 {
            return Err(Error::Syntax {
                position: pos,
                message: "zero denominator in exponent".into(),
            });
        }
        let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
        b.pow_rational(p, q).map_err(|e| Error::Syntax {
            position: pos,
            message: e.to_string(),
        })
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(args)
    }

    fn function(&mut self, name: &str, pos: usize, derivative: &[usize]) -> Result<Expr> {
        let decl = self.ctx.function(name).ok_or_else(|| Error::UnknownIdentifier {
            name: name.to_string(),
            position: pos,
        })?;
        let args = if *self.peek() == Tok::Sym('(') {
            self.args()?
        } else {
            decl.args.clone()
        };
        if args.len() != decl.args.len() {
            return Err(Error::Syntax {
                position: pos,
                message: format!("`{name}` takes {} arguments, got {}", decl.args.len(), args.len()),
            });
        }
        if let Some(&bad) = derivative.iter().find(|&&d| d >= args.len()) {
            return Err(Error::Syntax {
                position: pos,
                message: format!("derivative position {} out of range for `{name}`", bad + 1),
            });
        }
        Ok(Expr::func_derivative(name, derivative, args))
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::rational(BigRational::from_integer(n))),
            Tok::Num(q) => Ok(Expr::rational(q)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) if name == "sqrt" && *self.peek() == Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e.sqrt())
            }
            Tok::Ident(name) if name == "d" && *self.peek() == Tok::Sym('[') => {
                self.bump();
                let mut positions = Vec::new();
                loop {
                    match self.bump() {
                        Tok::Int(k) if k >= BigInt::one() => positions.push(k.to_usize().unwrap_or(usize::MAX) - 1),
                        _ => return self.err("expected a 1-based argument position"),
                    }
                    if !self.eat(',') {
                        break;
                    }
                }
                self.expect(']')?;
                let fpos = self.pos();
                match self.bump() {
                    Tok::Ident(f) => self.function(&f, fpos, &positions),
                    _ => self.err("expected a function name"),
                }
            }
            Tok::Ident(name) => {
                if self.ctx.function(&name).is_some() {
                    return self.function(&name, pos, &[]);
                }
                self.ctx.resolve(&name, pos)
            }
            Tok::End => self.err("unexpected end of input"),
            t => Err(Error::Syntax {
                position: pos,
                message: format!("unexpected token {t:?}"),
            }),
        }
    }
}

/// Parses `text` in `ctx` into a canonical expression.
pub fn parse(text: &str, ctx: &JetContext) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        ctx,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Splits a subscript such as `xxy` into base indices using the context's
/// base names, longest name first.
pub(crate) fn parse_subscript(sub: &str, names: &[String]) -> Option<MultiIndex> {
    let mut order: Vec<(usize, &str)> = names.iter().map(String::as_str).enumerate().collect();
    order.sort_by_key(|(_, n)| std::cmp::Reverse(n.len()));
    let mut rest = sub;
    let mut idx = Vec::new();
    while !rest.is_empty() {
        let (i, n) = order.iter().find(|(_, n)| rest.starts_with(n))?;
        idx.push(*i);
        rest = &rest[n.len()..];
    }
    Some(MultiIndex::new(idx))
}
