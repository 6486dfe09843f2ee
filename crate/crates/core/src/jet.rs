//! Jet-space bookkeeping: contexts, coordinates, total derivatives and
//! evolutionary derivations.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr};
use crate::linalg::{self, Matrix};
use crate::multi_index::MultiIndex;

/// Declaration of an abstract function symbol with its default arguments.
#[derive(Clone, Debug)]
pub struct FunctionDecl {
    pub name: String,
    pub args: Vec<Expr>,
}

/// Dimensions and naming of a divided chart on `J^r(E, n)`: `n` independent
/// coordinates `x^λ`, `m` dependent coordinates `u^i`, jet order `r`.
#[derive(Clone, Debug)]
pub struct JetContext {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    base_names: Vec<String>,
    parameters: Vec<String>,
    constants: Vec<(String, Option<String>)>,
    functions: Vec<FunctionDecl>,
}

fn default_base_names(n: usize) -> Vec<String> {
    match n {
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (1..=n).map(|k| format!("x{k}")).collect(),
    }
}

fn valid_ident(s: &str) -> bool {
    let mut c = s.chars();
    c.next().is_some_and(|f| f.is_alphabetic()) && s.chars().all(|c| c.is_alphanumeric() || c == '_')
}

impl JetContext {
    pub fn new(n: usize, m: usize, r: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Invalid(format!("need n ≥ 1 and m ≥ 1, got n = {n}, m = {m}")));
        }
        if n > 200 {
            return Err(Error::Invalid("too many base coordinates".into()));
        }
        Ok(JetContext {
            n,
            m,
            r,
            base_names: default_base_names(n),
            parameters: Vec::new(),
            constants: Vec::new(),
            functions: Vec::new(),
        })
    }

    pub fn with_base_names<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self> {
        if names.len() != self.n {
            return Err(Error::Invalid(format!("expected {} base names, got {}", self.n, names.len())));
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (k, a) in names.iter().enumerate() {
            if !valid_ident(a) || a.starts_with('u') || a == "d" || a == "sqrt" {
                return Err(Error::Invalid(format!("`{a}` cannot name a base coordinate")));
            }
            if names[..k].contains(a) {
                return Err(Error::Invalid(format!("duplicate base name `{a}`")));
            }
        }
        self.base_names = names;
        Ok(self)
    }

    /// Same context with a different jet order.
    pub fn with_order(&self, r: usize) -> Self {
        let mut c = self.clone();
        c.r = r;
        c
    }

    fn check_fresh(&self, name: &str) -> Result<()> {
        if !valid_ident(name) || name == "sqrt" || name == "d" {
            return Err(Error::Invalid(format!("invalid identifier `{name}`")));
        }
        if self.resolve(name, 0).is_ok() || self.function(name).is_some() {
            return Err(Error::Invalid(format!("`{name}` is already declared")));
        }
        Ok(())
    }

    pub fn declare_parameter(&mut self, name: &str) -> Result<()> {
        self.check_fresh(name)?;
        self.parameters.push(name.to_string());
        Ok(())
    }

    /// Declares a named constant; the dimension tag is carried only.
    pub fn declare_constant(&mut self, name: &str, dimension: Option<&str>) -> Result<()> {
        self.check_fresh(name)?;
        self.constants.push((name.to_string(), dimension.map(str::to_string)));
        Ok(())
    }

    /// Declares `name(args…)`, the arguments being coordinate expressions.
    pub fn declare_function(&mut self, name: &str, args: &[&str]) -> Result<()> {
        self.check_fresh(name)?;
        let args = args.iter().map(|a| crate::expr::parse(a, self)).collect::<Result<Vec<_>>>()?;
        self.functions.push(FunctionDecl {
            name: name.to_string(),
            args,
        });
        Ok(())
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn functions(&self) -> &[FunctionDecl] {
        &self.functions
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn constants(&self) -> &[(String, Option<String>)] {
        &self.constants
    }

    pub fn base_names(&self) -> &[String] {
        &self.base_names
    }

    pub fn base_name(&self, lambda: usize) -> &str {
        &self.base_names[lambda]
    }

    /// `x^λ` as an expression.
    pub fn x(&self, lambda: usize) -> Expr {
        Expr::base(lambda)
    }

    /// `u^i_σ` as an expression.
    pub fn u(&self, i: usize, sigma: &[usize]) -> Expr {
        Expr::fiber(i, MultiIndex::new(sigma.iter().copied()))
    }

    pub fn constant(&self, name: &str) -> Option<Expr> {
        self.constants
            .iter()
            .find(|(c, _)| c == name)
            .map(|(c, d)| Expr::constant(c, d.as_deref()))
    }

    /// Parses `text` in this context.
    pub fn parse(&self, text: &str) -> Result<Expr> {
        crate::expr::parse(text, self)
    }

    /// Resolves a coordinate, parameter or constant identifier.
    pub fn resolve(&self, name: &str, position: usize) -> Result<Expr> {
        let unknown = || Error::UnknownIdentifier {
            name: name.to_string(),
            position,
        };
        if let Some(l) = self.base_names.iter().position(|b| b == name) {
            return Ok(Expr::base(l));
        }
        if let Some(k) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if (1..=self.n).contains(&k) && !name.starts_with("x0") {
                return Ok(Expr::base(k - 1));
            }
        }
        if let Some(rest) = name.strip_prefix('u') {
            let (comp, sub) = match rest.split_once('_') {
                Some((c, s)) => (c, Some(s)),
                None => (rest, None),
            };
            let i = if comp.is_empty() {
                (self.m == 1).then_some(0)
            } else if comp.starts_with('0') {
                None
            } else {
                comp.parse::<usize>().ok().filter(|k| (1..=self.m).contains(k)).map(|k| k - 1)
            };
            if let Some(i) = i {
                let sigma = match sub {
                    None => Some(MultiIndex::empty()),
                    Some("") => None,
                    Some(s) => crate::expr::parse::parse_subscript(s, &self.base_names),
                };
                if let Some(sigma) = sigma {
                    if sigma.order() > self.r {
                        return Err(Error::OrderExceeded {
                            name: name.to_string(),
                            order: sigma.order(),
                            max: self.r,
                        });
                    }
                    return Ok(Expr::fiber(i, sigma));
                }
            }
        }
        if self.parameters.iter().any(|p| p == name) {
            return Ok(Expr::parameter(name));
        }
        if let Some(c) = self.constant(name) {
            return Ok(c);
        }
        Err(unknown())
    }

    /// All coordinates `x^λ, u^i_σ` with `|σ| ≤ k`, ordered by level, then
    /// component, then multi-index.
    pub fn enumerate_coordinates(&self, k: usize) -> Result<Vec<Atom>> {
        if k > self.r {
            return Err(Error::OutOfRange { order: k, max: self.r });
        }
        let mut out: Vec<Atom> = (0..self.n).map(Atom::base).collect();
        for level in 0..=k {
            for i in 0..self.m {
                for s in MultiIndex::of_order(self.n, level) {
                    out.push(Atom::fiber(i, s));
                }
            }
        }
        Ok(out)
    }

    /// Fails if `e` involves coordinates outside this context.
    pub fn check_expr(&self, e: &Expr, max_order: usize) -> Result<()> {
        for a in e.leaves() {
            match a {
                Atom::Base(l) if l as usize >= self.n => {
                    return Err(Error::Invalid(format!("base coordinate {} outside n = {}", l + 1, self.n)))
                }
                Atom::Fiber(i, ref s) => {
                    if i as usize >= self.m || s.max_index().is_some_and(|l| l >= self.n) {
                        return Err(Error::Invalid(format!("fiber coordinate {a:?} outside the context")));
                    }
                    if s.order() > max_order {
                        return Err(Error::OrderExceeded {
                            name: crate::render::atom_name(&a, self),
                            order: s.order(),
                            max: max_order,
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// `D_λ e = ∂e/∂x^λ + u^j_{σ,λ} ∂e/∂u^j_σ`.
pub fn total_derivative(e: &Expr, lambda: usize) -> Expr {
    e.derive_with(&mut |a| match a {
        Atom::Base(l) => (*l as usize == lambda).then(Expr::one),
        Atom::Fiber(i, s) => Some(Expr::fiber(*i as usize, s.with(lambda))),
        _ => None,
    })
}

/// `D_σ e`, composed letter by letter.
pub fn iterated_total_derivative(e: &Expr, sigma: &MultiIndex) -> Expr {
    sigma.indices().fold(e.clone(), |acc, l| total_derivative(&acc, l))
}

/// Generator `φ = (φ^1, …, φ^m)` of the evolutionary field
/// `Evo_φ = D_σ(φ^i) ∂/∂u^i_σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionaryField {
    pub components: Vec<Expr>,
}

impl EvolutionaryField {
    pub fn new(components: Vec<Expr>) -> Self {
        EvolutionaryField { components }
    }

    /// `D_σ φ^i`, memoized through `cache`.
    pub(crate) fn prolonged(&self, i: usize, sigma: &MultiIndex, cache: &mut BTreeMap<(usize, MultiIndex), Expr>) -> Expr {
        if let Some(v) = cache.get(&(i, sigma.clone())) {
            return v.clone();
        }
        let v = match sigma.split_first() {
            None => self.components.get(i).cloned().unwrap_or_default(),
            Some(_) => {
                // peel the largest letter so that prefixes are shared
                let last = sigma.max_index().unwrap();
                let rest = sigma.without(last).unwrap();
                total_derivative(&self.prolonged(i, &rest, cache), last)
            }
        };
        cache.insert((i, sigma.clone()), v.clone());
        v
    }

    /// `Evo_φ(e) = Σ D_σ(φ^i) ∂e/∂u^i_σ`.
    pub fn apply(&self, e: &Expr) -> Expr {
        let mut cache = BTreeMap::new();
        e.derive_with(&mut |a| match a {
            Atom::Fiber(i, s) => Some(self.prolonged(*i as usize, s, &mut cache)),
            _ => None,
        })
    }
}

/// `Evo_φ(e)`.
pub fn evolutionary_apply(phi: &EvolutionaryField, e: &Expr) -> Expr {
    phi.apply(e)
}

/// Jacobian of a fibered coordinate change `(x, u) ↦ (y, v)` split into
/// blocks `J^μ_λ = ∂y^μ/∂x^λ`, `J^μ_i = ∂y^μ/∂u^i`, `J^j_λ = ∂v^j/∂x^λ`,
/// `J^j_i = ∂v^j/∂u^i`.
#[derive(Clone, Debug)]
pub struct Jacobian {
    pub yx: Matrix,
    pub yu: Matrix,
    pub vx: Matrix,
    pub vu: Matrix,
}

impl Jacobian {
    pub fn from_full(j: &Matrix, n: usize) -> Result<Self> {
        let size = j.len();
        if size <= n || j.iter().any(|r| r.len() != size) {
            return Err(Error::Shape(format!("Jacobian must be square of size > {n}")));
        }
        let block = |r0: usize, r1: usize, c0: usize, c1: usize| -> Matrix {
            (r0..r1).map(|r| (c0..c1).map(|c| j[r][c].clone()).collect()).collect()
        };
        Ok(Jacobian {
            yx: block(0, n, 0, n),
            yu: block(0, n, n, size),
            vx: block(n, size, 0, n),
            vu: block(n, size, n, size),
        })
    }

    pub fn to_full(&self) -> Matrix {
        let mut out = Vec::new();
        for (a, b) in self.yx.iter().zip(&self.yu) {
            out.push(a.iter().chain(b).cloned().collect());
        }
        for (a, b) in self.vx.iter().zip(&self.vu) {
            out.push(a.iter().chain(b).cloned().collect());
        }
        out
    }

    /// Jacobian of the inverse change (the matrix inverse).
    pub fn inverse(&self) -> Result<Self> {
        let inv = linalg::inverse(&self.to_full())?;
        Self::from_full(&inv, self.yx.len())
    }
}

/// First-order coordinates `v^j_μ` of the new division in terms of the old:
/// `v^j_μ = (J^j_λ + J^j_i u^i_λ) A^λ_μ` with `A = (J^μ_λ + J^μ_i u^i_λ)^{-1}`.
/// The result is indexed `[j][μ]`.
pub fn change_division_first_order(j: &Jacobian) -> Result<Matrix> {
    let n = j.yx.len();
    let m = j.vx.len();
    if j.yu.len() != n || j.vu.len() != m || j.yx.iter().chain(&j.vx).any(|r| r.len() != n) {
        return Err(Error::Shape("inconsistent Jacobian blocks".into()));
    }
    if j.yu.iter().chain(&j.vu).any(|r| r.len() != m) {
        return Err(Error::Shape("inconsistent Jacobian blocks".into()));
    }
    let u = |i: usize, l: usize| Expr::fiber(i, MultiIndex::single(l));
    // B[μ][λ] = J^μ_λ + J^μ_i u^i_λ
    let b: Matrix = (0..n)
        .map(|mu| {
            (0..n)
                .map(|l| &j.yx[mu][l] + Expr::sum((0..m).map(|i| &j.yu[mu][i] * u(i, l))))
                .collect()
        })
        .collect();
    let c: Matrix = (0..m)
        .map(|jj| {
            (0..n)
                .map(|l| &j.vx[jj][l] + Expr::sum((0..m).map(|i| &j.vu[jj][i] * u(i, l))))
                .collect()
        })
        .collect();
    let a = linalg::inverse(&b).map_err(|_| Error::Singular("total Jacobian of the new base coordinates".into()))?;
    Ok(linalg::mul(&c, &a))
}

/// Rewrites first-order coordinates `u^j_μ` by `v[j][μ]` in every entry of `map`.
pub fn compose_first_order(map: &Matrix, v: &Matrix) -> Result<Matrix> {
    let mut bind = BTreeMap::new();
    for (jj, row) in v.iter().enumerate() {
        for (mu, e) in row.iter().enumerate() {
            bind.insert(Atom::fiber(jj, MultiIndex::single(mu)), e.clone());
        }
    }
    map.iter()
        .map(|row| row.iter().map(|e| e.map_leaves(&mut |a| bind.get(a).cloned())).collect())
        .collect()
}

/// Relabels base coordinates by `perm` (`x^λ ↦ x^{perm[λ]}`), including the
/// letters of every multi-index.
pub fn relabel_base(e: &Expr, perm: &[usize]) -> Result<Expr> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Invalid("not a permutation".into()));
        }
    }
    e.map_leaves(&mut |a| match a {
        Atom::Base(l) => Some(Expr::base(perm[*l as usize])),
        Atom::Fiber(i, s) => Some(Expr::fiber(*i as usize, MultiIndex::new(s.indices().map(|l| perm[l])))),
        _ => None,
    })
}
