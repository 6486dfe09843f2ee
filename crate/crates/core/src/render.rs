//! Deterministic rendering of expressions as text, LaTeX or a compact
//! machine format that [`crate::expr::parse`] reads back.

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::expr::{Atom, Expr, Monomial, Poly};
use crate::jet::JetContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Latex,
    Machine,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "latex" => Ok(Format::Latex),
            "machine" => Ok(Format::Machine),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

struct Names<'a> {
    ctx: Option<&'a JetContext>,
}

impl Names<'_> {
    fn base(&self, l: usize) -> String {
        if let Some(c) = self.ctx {
            if l < c.n {
                return c.base_name(l).to_string();
            }
        }
        match l {
            0 => "x".into(),
            1 => "y".into(),
            2 => "z".into(),
            _ => format!("x{}", l + 1),
        }
    }
}

struct Renderer<'a> {
    names: Names<'a>,
    fmt: Format,
}

fn latex_symbol(name: &str) -> String {
    const GREEK: [&str; 12] = [
        "alpha", "beta", "gamma", "delta", "epsilon", "kappa", "lambda", "mu", "nu", "rho", "sigma", "omega",
    ];
    if name == "hbar" || GREEK.contains(&name) {
        format!("\\{name}")
    } else if name.chars().count() > 1 {
        format!("\\mathrm{{{name}}}")
    } else {
        name.to_string()
    }
}

impl Renderer<'_> {
    fn atom(&self, a: &Atom) -> String {
        match a {
            Atom::Base(l) => self.names.base(*l as usize),
            Atom::Fiber(i, s) => {
                let letters: String = s.indices().map(|l| self.names.base(l)).collect();
                match self.fmt {
                    Format::Latex if letters.is_empty() => format!("u^{{{}}}", i + 1),
                    Format::Latex => format!("u^{{{}}}_{{{letters}}}", i + 1),
                    _ if letters.is_empty() => format!("u{}", i + 1),
                    _ => format!("u{}_{letters}", i + 1),
                }
            }
            Atom::Symbol(s) => match self.fmt {
                Format::Latex => latex_symbol(&s.name),
                _ => s.name.clone(),
            },
            Atom::Func(f) => {
                let sep = if self.fmt == Format::Machine { "," } else { ", " };
                let args: Vec<String> = f.args.iter().map(|e| self.expr(e)).collect();
                let pos: Vec<String> = f.derivative.iter().map(|p| (p + 1).to_string()).collect();
                let name = match self.fmt {
                    Format::Latex => latex_symbol(&f.name),
                    _ => f.name.clone(),
                };
                let head = match (self.fmt, pos.is_empty()) {
                    (_, true) => name,
                    (Format::Latex, false) => format!("\\partial_{{{}}} {name}", pos.join(",")),
                    (_, false) => format!("d[{}]{name}", pos.join(",")),
                };
                format!("{head}({})", args.join(sep))
            }
            Atom::Root(r) => {
                let base = self.poly(&r.base);
                match (self.fmt, r.index) {
                    (Format::Latex, 2) => format!("\\sqrt{{{base}}}"),
                    (Format::Latex, q) => format!("\\sqrt[{q}]{{{base}}}"),
                    (_, 2) => format!("sqrt({base})"),
                    (_, q) => format!("({base})^(1/{q})"),
                }
            }
        }
    }

    fn atom_power(&self, a: &Atom, e: u32) -> String {
        if e == 1 {
            return self.atom(a);
        }
        match (self.fmt, a) {
            (Format::Latex, Atom::Fiber(..) | Atom::Func(_)) => format!("{{{}}}^{{{e}}}", self.atom(a)),
            (Format::Latex, _) => format!("{}^{{{e}}}", self.atom(a)),
            (_, Atom::Root(r)) if r.index > 2 => format!("({})^({e}/{})", self.poly(&r.base), r.index),
            _ => format!("{}^{e}", self.atom(a)),
        }
    }

    fn monomial(&self, m: &Monomial) -> String {
        let sep = if self.fmt == Format::Latex { " " } else { "*" };
        m.factors().map(|(a, e)| self.atom_power(a, e)).collect::<Vec<_>>().join(sep)
    }

    fn rational(&self, c: &BigRational) -> String {
        if c.is_integer() {
            c.numer().to_string()
        } else if self.fmt == Format::Latex {
            format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
        } else {
            format!("{}/{}", c.numer(), c.denom())
        }
    }

    fn poly(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".into();
        }
        let (plus, minus) = match self.fmt {
            Format::Machine => ("+", "-"),
            _ => (" + ", " - "),
        };
        let mut out = String::new();
        for (k, (m, c)) in p.terms().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { minus } else { plus });
            }
            if m.is_one() {
                out.push_str(&self.rational(&a));
            } else if a.is_one() {
                out.push_str(&self.monomial(m));
            } else {
                let sep = if self.fmt == Format::Latex { " " } else { "*" };
                out.push_str(&self.rational(&a));
                out.push_str(sep);
                out.push_str(&self.monomial(m));
            }
        }
        out
    }

    fn grouped(&self, p: &Poly) -> String {
        let s = self.poly(p);
        if p.len() > 1 || s.starts_with('-') || s.contains('/') && self.fmt != Format::Latex {
            if self.fmt == Format::Latex {
                format!("\\left({s}\\right)")
            } else {
                format!("({s})")
            }
        } else {
            s
        }
    }

    fn expr(&self, e: &Expr) -> String {
        let num = self.poly(e.numerator());
        if e.is_polynomial() {
            return num;
        }
        let sep = if self.fmt == Format::Latex { " " } else { "*" };
        let den: Vec<String> = e
            .denominator_factors()
            .map(|(f, k)| {
                let b = if f.len() > 1 { self.grouped(f) } else { self.poly(f) };
                match (k, self.fmt) {
                    (1, _) => b,
                    (k, Format::Latex) => format!("{b}^{{{k}}}"),
                    (k, _) => format!("{b}^{k}"),
                }
            })
            .collect();
        let den = den.join(sep);
        match self.fmt {
            Format::Latex => format!("\\frac{{{num}}}{{{den}}}"),
            _ => format!("({num})/({den})"),
        }
    }
}

/// Renders `e` with the names of `ctx`.
pub fn render(e: &Expr, ctx: &JetContext, fmt: Format) -> String {
    Renderer {
        names: Names { ctx: Some(ctx) },
        fmt,
    }
    .expr(e)
}

/// Text rendering with default coordinate names.
pub(crate) fn expr_plain(e: &Expr) -> String {
    Renderer {
        names: Names { ctx: None },
        fmt: Format::Text,
    }
    .expr(e)
}

/// Text name of a single atom.
pub fn atom_name(a: &Atom, ctx: &JetContext) -> String {
    Renderer {
        names: Names { ctx: Some(ctx) },
        fmt: Format::Text,
    }
    .atom(a)
}

/// Renders `e`, wrapping it in parentheses when it is a sum or quotient.
pub fn render_factor(e: &Expr, ctx: &JetContext, fmt: Format) -> String {
    let s = render(e, ctx, fmt);
    let simple = e.is_polynomial() && e.numerator().len() <= 1 && !s.starts_with('-');
    if simple {
        s
    } else if fmt == Format::Latex {
        format!("\\left({s}\\right)")
    } else {
        format!("({s})")
    }
}
