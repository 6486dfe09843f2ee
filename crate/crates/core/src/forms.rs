//! Exterior calculus on jet coordinates.
//!
//! A [`Form`] is stored either in the raw basis `{dx^λ, du^i_σ}` or in the
//! contact basis `{dx̄^λ, ω^i_σ}` with `ω^i_σ = du^i_σ − u^i_{σ,λ} dx^λ`;
//! the two are related by an exact change of basis. Horizontal forms are
//! kept separately as [`HorizontalForm`].
//!
//! Densities are stored against `dx̄^1 ∧ … ∧ dx̄^n`. The variational
//! literature often normalizes `Vol_n = n! dx̄^1 ∧ … ∧ dx̄^n`; every equation
//! produced here is homogeneous in that factor.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr};
use crate::jet::{total_derivative, EvolutionaryField, JetContext};
use crate::multi_index::MultiIndex;
use crate::render::{render_factor, Format};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    Raw,
    Contact,
}

/// A basis covector. In the raw basis `Dx` is `dx^λ` and `Du` is `du^i_σ`;
/// in the contact basis they are `dx̄^λ` and `ω^i_σ`. The derived order puts
/// all `Dx` first, then `Du` by component and multi-index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Covector {
    Dx(u16),
    Du(u16, MultiIndex),
}

impl Covector {
    pub fn dx(lambda: usize) -> Self {
        Covector::Dx(lambda as u16)
    }

    pub fn du(i: usize, sigma: MultiIndex) -> Self {
        Covector::Du(i as u16, sigma)
    }

    pub fn is_vertical(&self) -> bool {
        matches!(self, Covector::Du(..))
    }
}

/// Sorts `covs` and returns the permutation sign, or `None` on a repeat.
fn canonical_wedge(mut covs: Vec<Covector>) -> Option<(Vec<Covector>, i64)> {
    let mut sign = 1;
    for i in 1..covs.len() {
        let mut j = i;
        while j > 0 && covs[j - 1] > covs[j] {
            covs.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if covs.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((covs, sign))
}

/// Exterior form on a jet space with `n` base coordinates.
#[derive(Clone, PartialEq, Eq)]
pub struct Form {
    n: usize,
    basis: Basis,
    terms: BTreeMap<Vec<Covector>, Expr>,
}

impl Form {
    pub fn zero(n: usize, basis: Basis) -> Self {
        Form {
            n,
            basis,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(n: usize, basis: Basis, e: Expr) -> Self {
        Self::term(n, basis, e, vec![])
    }

    /// `coef · c₁ ∧ … ∧ c_k`, with the factors put in canonical order.
    pub fn term(n: usize, basis: Basis, coef: Expr, covs: Vec<Covector>) -> Self {
        let mut f = Self::zero(n, basis);
        f.add_term(covs, coef);
        f
    }

    pub fn dx(n: usize, lambda: usize) -> Self {
        Self::term(n, Basis::Raw, Expr::one(), vec![Covector::dx(lambda)])
    }

    pub fn du(n: usize, i: usize, sigma: MultiIndex) -> Self {
        Self::term(n, Basis::Raw, Expr::one(), vec![Covector::du(i, sigma)])
    }

    pub fn dx_bar(n: usize, lambda: usize) -> Self {
        Self::term(n, Basis::Contact, Expr::one(), vec![Covector::dx(lambda)])
    }

    pub fn omega(n: usize, i: usize, sigma: MultiIndex) -> Self {
        Self::term(n, Basis::Contact, Expr::one(), vec![Covector::du(i, sigma)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Covector], &Expr)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn coefficient(&self, covs: &[Covector]) -> Expr {
        match canonical_wedge(covs.to_vec()) {
            Some((k, s)) => self.terms.get(&k).map(|c| c.scale(&crate::expr::rat(s))).unwrap_or_default(),
            None => Expr::zero(),
        }
    }

    /// Degrees present among the stored terms.
    pub fn degrees(&self) -> BTreeSet<usize> {
        self.terms.keys().map(Vec::len).collect()
    }

    fn add_term(&mut self, covs: Vec<Covector>, coef: Expr) {
        if coef.is_zero() {
            return;
        }
        let Some((covs, sign)) = canonical_wedge(covs) else {
            return;
        };
        let coef = if sign < 0 { -coef } else { coef };
        let slot = self.terms.entry(covs).or_default();
        *slot = &*slot + &coef;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    fn check_compatible(&self, other: &Form) {
        assert_eq!(self.n, other.n, "forms over different base dimensions");
    }

    pub fn add(&self, other: &Form) -> Form {
        self.check_compatible(other);
        let other = other.in_basis(self.basis);
        let mut out = self.clone();
        for (k, c) in other.terms {
            out.add_term(k, c);
        }
        out
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.scale(&Expr::int(-1))
    }

    pub fn scale(&self, e: &Expr) -> Form {
        let mut out = Form::zero(self.n, self.basis);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c * e);
        }
        out
    }

    pub fn wedge(&self, other: &Form) -> Form {
        self.check_compatible(other);
        let other = other.in_basis(self.basis);
        let mut out = Form::zero(self.n, self.basis);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let mut k = k1.clone();
                k.extend(k2.iter().cloned());
                out.add_term(k, c1 * c2);
            }
        }
        out
    }

    /// Rewrites every `Du` factor through `image` (a 1-form in the target
    /// basis) and keeps `Dx` factors; `Dx` in the source basis maps to `Dx`.
    fn rewrite(&self, target: Basis, image: &dyn Fn(usize, &MultiIndex) -> Form) -> Form {
        let mut out = Form::zero(self.n, target);
        for (k, c) in &self.terms {
            let mut acc = Form::scalar(self.n, target, c.clone());
            for cov in k {
                let f = match cov {
                    Covector::Dx(l) => Form::term(self.n, target, Expr::one(), vec![Covector::Dx(*l)]),
                    Covector::Du(i, s) => image(*i as usize, s),
                };
                acc = acc.wedge(&f);
            }
            for (k2, c2) in acc.terms {
                out.add_term(k2, c2);
            }
        }
        out
    }

    /// Raw-basis expression (`ω^i_σ = du^i_σ − u^i_{σ,λ} dx^λ`).
    pub fn to_raw(&self) -> Form {
        if self.basis == Basis::Raw {
            return self.clone();
        }
        let n = self.n;
        self.rewrite(Basis::Raw, &|i, s| {
            let mut f = Form::du(n, i, s.clone());
            for l in 0..n {
                f.add_term(vec![Covector::dx(l)], -Expr::fiber(i, s.with(l)));
            }
            f
        })
    }

    /// Contact-basis expression (`du^i_σ = ω^i_σ + u^i_{σ,λ} dx̄^λ`).
    pub fn to_contact(&self) -> Form {
        if self.basis == Basis::Contact {
            return self.clone();
        }
        let n = self.n;
        self.rewrite(Basis::Contact, &|i, s| {
            let mut f = Form::omega(n, i, s.clone());
            for l in 0..n {
                f.add_term(vec![Covector::dx(l)], Expr::fiber(i, s.with(l)));
            }
            f
        })
    }

    pub fn in_basis(&self, b: Basis) -> Form {
        match b {
            Basis::Raw => self.to_raw(),
            Basis::Contact => self.to_contact(),
        }
    }

    /// Contact-basis rewrite; the result is graded by [`Form::by_contact_degree`].
    pub fn contact_split(&self) -> Form {
        self.to_contact()
    }

    /// Contact-basis components grouped by the number of `ω` factors.
    pub fn by_contact_degree(&self) -> BTreeMap<usize, Form> {
        let c = self.to_contact();
        let mut out: BTreeMap<usize, Form> = BTreeMap::new();
        for (k, v) in c.terms {
            let p = k.iter().filter(|c| c.is_vertical()).count();
            out.entry(p).or_insert_with(|| Form::zero(self.n, Basis::Contact)).add_term(k, v);
        }
        out
    }

    /// Component with exactly `p` contact factors (contact basis).
    pub fn contact_part(&self, p: usize) -> Form {
        self.by_contact_degree()
            .remove(&p)
            .unwrap_or_else(|| Form::zero(self.n, Basis::Contact))
    }

    /// Differential of a scalar in the raw basis.
    fn d_scalar(&self, c: &Expr) -> Form {
        let mut f = Form::zero(self.n, Basis::Raw);
        for a in c.leaves() {
            let cov = match &a {
                Atom::Base(l) => Covector::Dx(*l),
                Atom::Fiber(i, s) => Covector::Du(*i, s.clone()),
                _ => continue,
            };
            f.add_term(vec![cov], c.partial(&a));
        }
        f
    }

    /// Exterior derivative, returned in the basis of the input.
    pub fn exterior_derivative(&self) -> Form {
        let raw = self.to_raw();
        let mut out = Form::zero(self.n, Basis::Raw);
        for (k, c) in &raw.terms {
            let dc = self.d_scalar(c);
            for (k1, c1) in dc.terms {
                let mut kk = k1;
                kk.extend(k.iter().cloned());
                out.add_term(kk, c1);
            }
        }
        out.in_basis(self.basis)
    }

    /// `h^{0,q}`: the part free of contact factors.
    pub fn horizontalize(&self) -> HorizontalForm {
        HorizontalForm::from_contact(&self.contact_part(0)).expect("contact-free part")
    }

    /// `h^{p,q}`: the part with exactly `p` contact factors, the remaining
    /// factors horizontalized.
    pub fn partial_horizontalize(&self, p: usize) -> Form {
        self.contact_part(p)
    }

    /// Horizontal differential on contact-homogeneous forms: the component
    /// of `d` that preserves the contact degree.
    pub fn horizontal_differential(&self) -> Form {
        let mut out = Form::zero(self.n, Basis::Contact);
        for (p, part) in self.by_contact_degree() {
            out = out.add(&part.exterior_derivative().contact_part(p));
        }
        out
    }

    /// Interior product with a vector field given on the raw basis.
    pub fn interior(&self, x: &VectorField) -> Form {
        let raw = self.to_raw();
        let mut out = Form::zero(self.n, Basis::Raw);
        for (k, c) in &raw.terms {
            for (pos, cov) in k.iter().enumerate() {
                let v = x.component(cov);
                if v.is_zero() {
                    continue;
                }
                let mut rest = k.clone();
                rest.remove(pos);
                let sign = if pos % 2 == 0 { Expr::one() } else { Expr::int(-1) };
                out.add_term(rest, c * &v * sign);
            }
        }
        out.in_basis(self.basis)
    }

    /// `Evo_φ ⌟ β` with `ω^i_σ(Evo_φ) = D_σ φ^i` and `dx̄^λ(Evo_φ) = 0`.
    pub fn insert_evolutionary(&self, phi: &EvolutionaryField) -> Result<Form> {
        let c = self.to_contact();
        if c.terms.keys().all(|k| !k.iter().any(Covector::is_vertical)) {
            return Err(Error::Invalid("insertion of an evolutionary field needs contact degree ≥ 1".into()));
        }
        let mut cache = BTreeMap::new();
        let mut out = Form::zero(self.n, Basis::Contact);
        for (k, coef) in &c.terms {
            let mut sign = 1;
            for (pos, cov) in k.iter().enumerate() {
                if let Covector::Du(i, s) = cov {
                    let v = phi.prolonged(*i as usize, s, &mut cache);
                    if !v.is_zero() {
                        let mut rest = k.clone();
                        rest.remove(pos);
                        out.add_term(rest, coef * &v * Expr::int(sign));
                    }
                }
                sign = -sign;
                let _ = pos;
            }
        }
        Ok(out)
    }

    /// Pullback along the graph `u^i = p^i(x)` (each `p^i` depending on the
    /// base coordinates only), as a form in the `dx` only.
    pub fn pullback_graph(&self, graph: &[Expr]) -> Result<Form> {
        let raw = self.to_raw();
        let mut jets = GraphJets::new(graph);
        let mut out = Form::zero(self.n, Basis::Raw);
        for (k, c) in &raw.terms {
            let mut acc = Form::scalar(self.n, Basis::Raw, jets.pull(c)?);
            for cov in k {
                let f = match cov {
                    Covector::Dx(l) => Form::dx(self.n, *l as usize),
                    Covector::Du(i, s) => {
                        let mut f = Form::zero(self.n, Basis::Raw);
                        for l in 0..self.n {
                            let v = jets.value(*i as usize, &s.with(l));
                            f.add_term(vec![Covector::dx(l)], v);
                        }
                        f
                    }
                };
                acc = acc.wedge(&f);
            }
            for (k2, c2) in acc.terms {
                out.add_term(k2, c2);
            }
        }
        Ok(out)
    }

    pub fn render(&self, ctx: &JetContext, fmt: Format) -> String {
        render_terms(self.terms.iter().map(|(k, c)| (k.as_slice(), c)), self.basis, ctx, fmt)
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx = JetContext::new(self.n.max(1), 1, 0).expect("valid context");
        write!(f, "{}", self.render(&ctx, Format::Text))
    }
}

/// Derivatives of a graph `u = p(x)` as jet coordinate values.
struct GraphJets<'a> {
    graph: &'a [Expr],
    cache: BTreeMap<(usize, MultiIndex), Expr>,
}

impl<'a> GraphJets<'a> {
    fn new(graph: &'a [Expr]) -> Self {
        GraphJets {
            graph,
            cache: BTreeMap::new(),
        }
    }

    fn value(&mut self, i: usize, s: &MultiIndex) -> Expr {
        if let Some(v) = self.cache.get(&(i, s.clone())) {
            return v.clone();
        }
        let v = match s.max_index() {
            None => self.graph[i].clone(),
            Some(l) => {
                let prev = self.value(i, &s.without(l).unwrap());
                prev.partial(&Atom::base(l))
            }
        };
        self.cache.insert((i, s.clone()), v.clone());
        v
    }

    fn pull(&mut self, e: &Expr) -> Result<Expr> {
        e.map_leaves(&mut |a| match a {
            Atom::Fiber(i, s) => Some(self.value(*i as usize, s)),
            _ => None,
        })
    }
}

fn covector_name(c: &Covector, basis: Basis, ctx: &JetContext, fmt: Format) -> String {
    let base = |l: usize| -> String {
        if l < ctx.n {
            ctx.base_name(l).to_string()
        } else {
            format!("x{}", l + 1)
        }
    };
    match (c, basis, fmt) {
        (Covector::Dx(l), Basis::Raw, Format::Latex) => format!("dx^{{{}}}", l + 1),
        (Covector::Dx(l), Basis::Raw, _) => format!("d{}", base(*l as usize)),
        (Covector::Dx(l), Basis::Contact, Format::Latex) => format!("\\overline{{dx}}^{{{}}}", l + 1),
        (Covector::Dx(l), Basis::Contact, _) => format!("d{}bar", base(*l as usize)),
        (Covector::Du(i, s), b, fmt) => {
            let letters: String = s.indices().map(base).collect();
            let head = match (b, fmt) {
                (Basis::Raw, Format::Latex) => "du",
                (Basis::Contact, Format::Latex) => "\\omega",
                (Basis::Raw, _) => "du",
                (Basis::Contact, _) => "w",
            };
            match fmt {
                Format::Latex if letters.is_empty() => format!("{head}^{{{}}}", i + 1),
                Format::Latex => format!("{head}^{{{}}}_{{{letters}}}", i + 1),
                _ if letters.is_empty() => format!("{head}{}", i + 1),
                _ => format!("{head}{}_{letters}", i + 1),
            }
        }
    }
}

fn render_terms<'a>(terms: impl Iterator<Item = (&'a [Covector], &'a Expr)>, basis: Basis, ctx: &JetContext, fmt: Format) -> String {
    let wedge = match fmt {
        Format::Latex => " \\wedge ",
        Format::Machine => "^",
        Format::Text => " ∧ ",
    };
    let parts: Vec<String> = terms
        .map(|(k, c)| {
            let covs: Vec<String> = k.iter().map(|cv| covector_name(cv, basis, ctx, fmt)).collect();
            if covs.is_empty() {
                render_factor(c, ctx, fmt)
            } else if c.is_one() {
                covs.join(wedge)
            } else {
                let sep = if fmt == Format::Latex { " \\, " } else { "*" };
                format!("{}{sep}{}", render_factor(c, ctx, fmt), covs.join(wedge))
            }
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(if fmt == Format::Machine { "+" } else { " + " })
    }
}

/// Vector field on the jet space: components on `∂/∂x^λ` and `∂/∂u^i_σ`.
#[derive(Clone, Debug, Default)]
pub struct VectorField {
    pub base: BTreeMap<usize, Expr>,
    pub fiber: BTreeMap<(usize, MultiIndex), Expr>,
}

impl VectorField {
    pub fn component(&self, c: &Covector) -> Expr {
        match c {
            Covector::Dx(l) => self.base.get(&(*l as usize)).cloned().unwrap_or_default(),
            Covector::Du(i, s) => self.fiber.get(&(*i as usize, s.clone())).cloned().unwrap_or_default(),
        }
    }

    /// `X(f)`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for (l, v) in &self.base {
            acc = acc + v * f.partial(&Atom::base(*l));
        }
        for ((i, s), v) in &self.fiber {
            acc = acc + v * f.partial(&Atom::fiber(*i, s.clone()));
        }
        acc
    }

    /// The evolutionary field of the vertical part `v(X)`, for a field whose
    /// components are those of a prolonged vector field on `E`:
    /// `φ^i = b^i − a^λ u^i_λ`.
    pub fn vertical_part(&self, m: usize) -> EvolutionaryField {
        let comps = (0..m)
            .map(|i| {
                let b = self.fiber.get(&(i, MultiIndex::empty())).cloned().unwrap_or_default();
                let a = Expr::sum(self.base.iter().map(|(l, v)| v * Expr::fiber(i, MultiIndex::single(*l))));
                b - a
            })
            .collect();
        EvolutionaryField::new(comps)
    }
}

/// Form whose factors are all `dx̄^λ`; stored by sorted base indices.
#[derive(Clone, PartialEq, Eq)]
pub struct HorizontalForm {
    n: usize,
    terms: BTreeMap<Vec<u16>, Expr>,
}

impl HorizontalForm {
    pub fn zero(n: usize) -> Self {
        HorizontalForm { n, terms: BTreeMap::new() }
    }

    pub fn scalar(n: usize, e: Expr) -> Self {
        let mut h = Self::zero(n);
        h.add_term(vec![], e);
        h
    }

    pub fn term(n: usize, coef: Expr, idx: Vec<usize>) -> Self {
        let mut h = Self::zero(n);
        h.add_term(idx.into_iter().map(|l| l as u16).collect(), coef);
        h
    }

    /// `ρ dx̄^1 ∧ … ∧ dx̄^n`.
    pub fn volume(n: usize, density: Expr) -> Self {
        Self::term(n, density, (0..n).collect())
    }

    /// `Σ_λ (−1)^λ J^λ dx̄^1 ∧ … (omit λ) … ∧ dx̄^n`, whose horizontal
    /// differential is `D_λ J^λ` times the volume.
    pub fn from_current(n: usize, current: &[Expr]) -> Self {
        let mut h = Self::zero(n);
        for (l, j) in current.iter().enumerate() {
            let idx: Vec<u16> = (0..n as u16).filter(|&k| k as usize != l).collect();
            let c = if l % 2 == 0 { j.clone() } else { -j };
            h.add_term(idx, c);
        }
        h
    }

    /// Accepts a contact-basis form without `ω` factors.
    pub fn from_contact(f: &Form) -> Result<Self> {
        let f = f.to_contact();
        let mut h = Self::zero(f.n);
        for (k, c) in &f.terms {
            let idx = k
                .iter()
                .map(|cv| match cv {
                    Covector::Dx(l) => Ok(*l),
                    Covector::Du(..) => Err(Error::Invalid("form has contact factors".into())),
                })
                .collect::<Result<Vec<u16>>>()?;
            h.add_term(idx, c.clone());
        }
        Ok(h)
    }

    pub fn to_form(&self) -> Form {
        let mut f = Form::zero(self.n, Basis::Contact);
        for (k, c) in &self.terms {
            f.add_term(k.iter().map(|&l| Covector::Dx(l)).collect(), c.clone());
        }
        f
    }

    fn add_term(&mut self, idx: Vec<u16>, coef: Expr) {
        if coef.is_zero() {
            return;
        }
        let covs = idx.into_iter().map(Covector::Dx).collect();
        let Some((covs, sign)) = canonical_wedge(covs) else {
            return;
        };
        let idx: Vec<u16> = covs
            .into_iter()
            .map(|c| match c {
                Covector::Dx(l) => l,
                Covector::Du(..) => unreachable!(),
            })
            .collect();
        let coef = if sign < 0 { -coef } else { coef };
        let slot = self.terms.entry(idx).or_default();
        *slot = &*slot + &coef;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], &Expr)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn coefficient(&self, idx: &[usize]) -> Expr {
        let h = Self::term(self.n, Expr::one(), idx.to_vec());
        match h.terms.into_iter().next() {
            Some((k, s)) => self.terms.get(&k).map(|c| c * s).unwrap_or_default(),
            None => Expr::zero(),
        }
    }

    /// Coefficient of `dx̄^1 ∧ … ∧ dx̄^n`.
    pub fn density(&self) -> Expr {
        self.coefficient(&(0..self.n).collect::<Vec<_>>())
    }

    pub fn add(&self, other: &HorizontalForm) -> HorizontalForm {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &HorizontalForm) -> HorizontalForm {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, e: &Expr) -> HorizontalForm {
        let mut out = Self::zero(self.n);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c * e);
        }
        out
    }

    pub fn degrees(&self) -> BTreeSet<usize> {
        self.terms.keys().map(Vec::len).collect()
    }

    /// `d̄β = D_λ(β_I) dx̄^λ ∧ dx̄^I`.
    pub fn horizontal_differential(&self) -> HorizontalForm {
        let mut out = Self::zero(self.n);
        for (k, c) in &self.terms {
            for l in 0..self.n {
                if k.contains(&(l as u16)) {
                    continue;
                }
                let mut idx = vec![l as u16];
                idx.extend(k.iter().copied());
                out.add_term(idx, total_derivative(c, l));
            }
        }
        out
    }

    /// Pullback along `u = p(x)`, with `dx̄` becoming `dx`.
    pub fn pullback_graph(&self, graph: &[Expr]) -> Result<Form> {
        let mut jets = GraphJets::new(graph);
        let mut out = Form::zero(self.n, Basis::Raw);
        for (k, c) in &self.terms {
            out.add_term(k.iter().map(|&l| Covector::Dx(l)).collect(), jets.pull(c)?);
        }
        Ok(out)
    }

    pub fn render(&self, ctx: &JetContext, fmt: Format) -> String {
        if self.degrees() == BTreeSet::from([self.n]) {
            let vol = match fmt {
                Format::Latex => " \\, \\mathrm{Vol}",
                Format::Machine => "*Vol",
                Format::Text => " Vol",
            };
            return format!("{}{vol}", render_factor(&self.density(), ctx, fmt));
        }
        let f = self.to_form();
        f.render(ctx, fmt)
    }
}

impl fmt::Debug for HorizontalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx = JetContext::new(self.n.max(1), 1, 0).expect("valid context");
        write!(f, "{}", self.to_form().render(&ctx, Format::Text))
    }
}

/// `h^{0,q}`.
pub fn horizontalize(alpha: &Form) -> HorizontalForm {
    alpha.horizontalize()
}

/// `h^{p,q}`.
pub fn partial_horizontalize(alpha: &Form, p: usize) -> Form {
    alpha.partial_horizontalize(p)
}

pub fn exterior_derivative(alpha: &Form) -> Form {
    alpha.exterior_derivative()
}

pub fn horizontal_differential(beta: &HorizontalForm) -> HorizontalForm {
    beta.horizontal_differential()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.iter().copied())
    }

    #[test]
    fn contact_split_examples() {
        let du = Form::du(1, 0, mi(&[]));
        let split = du.contact_split();
        let expected = Form::omega(1, 0, mi(&[])).add(&Form::dx_bar(1, 0).scale(&Expr::fiber(0, mi(&[0]))));
        assert_eq!(split, expected);
        assert_eq!(split.to_raw(), du);
        let w = du.wedge(&Form::dx(1, 0)).contact_split();
        assert_eq!(w, Form::omega(1, 0, mi(&[])).wedge(&Form::dx_bar(1, 0)));
    }

    #[test]
    fn horizontalization_examples() {
        let du = Form::du(1, 0, mi(&[]));
        assert_eq!(du.horizontalize(), HorizontalForm::term(1, Expr::fiber(0, mi(&[0])), vec![0]));
        assert!(Form::omega(2, 0, mi(&[1])).horizontalize().is_zero());
        let a = Form::du(2, 0, mi(&[])).wedge(&Form::dx(2, 0));
        let h = a.horizontalize();
        assert_eq!(h, HorizontalForm::term(2, -Expr::fiber(0, mi(&[1])), vec![0, 1]));
        let p = Form::du(1, 0, mi(&[])).wedge(&Form::dx(1, 0)).partial_horizontalize(1);
        assert_eq!(p, Form::omega(1, 0, mi(&[])).wedge(&Form::dx_bar(1, 0)));
        assert_eq!(du.partial_horizontalize(1), Form::omega(1, 0, mi(&[])));
    }

    #[test]
    fn exterior_derivative_basics() {
        let u = Expr::u(0);
        let f = Form::scalar(1, Basis::Raw, u.clone());
        assert_eq!(f.exterior_derivative(), Form::du(1, 0, mi(&[])));
        let g = Form::dx(1, 0).scale(&u);
        assert_eq!(g.exterior_derivative(), Form::du(1, 0, mi(&[])).wedge(&Form::dx(1, 0)));
        let h = Form::scalar(2, Basis::Raw, u.powi(3) * Expr::base(1) + Expr::fiber(0, mi(&[0])).sqrt());
        assert!(h.exterior_derivative().exterior_derivative().is_zero());
    }

    #[test]
    fn horizontal_differential_examples() {
        let h = HorizontalForm::term(2, Expr::u(0), vec![0]);
        assert_eq!(
            h.horizontal_differential(),
            HorizontalForm::term(2, -Expr::fiber(0, mi(&[1])), vec![0, 1])
        );
        let s = HorizontalForm::scalar(2, Expr::u(0).powi(2));
        assert!(s.horizontal_differential().horizontal_differential().is_zero());
    }

    #[test]
    fn insertion_examples() {
        let one = EvolutionaryField::new(vec![Expr::one()]);
        let beta = Form::omega(1, 0, mi(&[])).wedge(&Form::dx_bar(1, 0));
        assert_eq!(beta.insert_evolutionary(&one).unwrap(), Form::dx_bar(1, 0));
        let ux = EvolutionaryField::new(vec![Expr::fiber(0, mi(&[0]))]);
        let beta = Form::omega(1, 0, mi(&[0])).wedge(&Form::dx_bar(1, 0));
        assert_eq!(
            beta.insert_evolutionary(&ux).unwrap(),
            Form::dx_bar(1, 0).scale(&Expr::fiber(0, mi(&[0, 0])))
        );
        assert!(Form::dx_bar(1, 0).insert_evolutionary(&one).is_err());
    }
}
