//! Euler–Lagrange operator, adjoints and Green's formula, linearization,
//! the Helmholtz test and the first-variation decomposition.

use std::collections::BTreeMap;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr, FunctionTable};
use crate::forms::HorizontalForm;
use crate::jet::{iterated_total_derivative, total_derivative, EvolutionaryField, JetContext};
use crate::multi_index::MultiIndex;
use crate::render::{render, render_factor, Format};

/// Density `λ₀` of the horizontal form `λ₀ dx̄^1 ∧ … ∧ dx̄^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lagrangian {
    pub n: usize,
    pub m: usize,
    pub density: Expr,
}

impl Lagrangian {
    /// Checks the density against the order of `ctx`.
    pub fn new(ctx: &JetContext, density: Expr) -> Result<Self> {
        ctx.check_expr(&density, ctx.r)?;
        Ok(Lagrangian {
            n: ctx.n,
            m: ctx.m,
            density,
        })
    }

    pub fn order(&self) -> usize {
        self.density.jet_order()
    }

    pub fn as_form(&self) -> HorizontalForm {
        HorizontalForm::volume(self.n, self.density.clone())
    }
}

/// `ε = ε_i ω^i ∧ Vol`, stored by its components.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceForm {
    pub n: usize,
    pub components: Vec<Expr>,
}

impl SourceForm {
    pub fn new(n: usize, components: Vec<Expr>) -> Self {
        SourceForm { n, components }
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_identically_zero)
    }

    /// `ε(φ) = ε_i φ^i`.
    pub fn pair(&self, phi: &[Expr]) -> Expr {
        Expr::sum(self.components.iter().zip(phi).map(|(e, p)| e * p))
    }

    pub fn render(&self, ctx: &JetContext, fmt: Format) -> String {
        self.components
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let lhs = match fmt {
                    Format::Latex => format!("E_{{{}}}", i + 1),
                    _ => format!("E[{}]", i + 1),
                };
                format!("{lhs} = {}", render(e, ctx, fmt))
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Matrix of total-derivative polynomials: entry `(i, j)` is
/// `Σ_σ a^σ_{ij} D_σ`, acting by `(Δφ)_i = Σ_j Σ_σ a^σ_{ij} D_σ φ^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct COperator {
    pub n: usize,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<BTreeMap<MultiIndex, Expr>>>,
}

impl COperator {
    pub fn zero(n: usize, rows: usize, cols: usize) -> Self {
        COperator {
            n,
            rows,
            cols,
            entries: vec![vec![BTreeMap::new(); cols]; rows],
        }
    }

    pub fn identity(n: usize, m: usize) -> Self {
        let mut op = Self::zero(n, m, m);
        for i in 0..m {
            op.add_term(i, i, MultiIndex::empty(), Expr::one());
        }
        op
    }

    /// The scalar operator `a D_σ` (one row, one column).
    pub fn scalar(n: usize, sigma: MultiIndex, a: Expr) -> Self {
        let mut op = Self::zero(n, 1, 1);
        op.add_term(0, 0, sigma, a);
        op
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &BTreeMap<MultiIndex, Expr> {
        &self.entries[i][j]
    }

    pub fn coefficient(&self, i: usize, j: usize, sigma: &MultiIndex) -> Expr {
        self.entries[i][j].get(sigma).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, i: usize, j: usize, sigma: MultiIndex, a: Expr) {
        if a.is_zero() {
            return;
        }
        let slot = self.entries[i][j].entry(sigma.clone()).or_default();
        *slot = &*slot + &a;
        if slot.is_zero() {
            self.entries[i][j].remove(&sigma);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &MultiIndex, &Expr)> {
        self.entries.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .flat_map(move |(j, e)| e.iter().map(move |(s, a)| (i, j, s, a)))
        })
    }

    /// Drops coefficients that vanish identically.
    pub fn pruned(&self) -> COperator {
        let mut out = self.clone();
        for row in &mut out.entries {
            for e in row {
                e.retain(|_, a| !a.is_identically_zero());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms().all(|(_, _, _, a)| a.is_identically_zero())
    }

    pub fn order(&self) -> usize {
        self.terms().map(|(_, _, s, _)| s.order()).max().unwrap_or(0)
    }

    fn check_shape(&self, other: &COperator) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Shape(format!(
                "{}×{} against {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &COperator) -> Result<COperator> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (i, j, s, a) in other.terms() {
            out.add_term(i, j, s.clone(), a.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &COperator) -> Result<COperator> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, e: &Expr) -> COperator {
        let mut out = Self::zero(self.n, self.rows, self.cols);
        for (i, j, s, a) in self.terms() {
            out.add_term(i, j, s.clone(), a * e);
        }
        out
    }

    pub fn apply(&self, phi: &[Expr]) -> Result<Vec<Expr>> {
        if phi.len() != self.cols {
            return Err(Error::Shape(format!("operator takes {} arguments, got {}", self.cols, phi.len())));
        }
        let mut cache: BTreeMap<(usize, MultiIndex), Expr> = BTreeMap::new();
        let field = EvolutionaryField::new(phi.to_vec());
        let mut out = vec![Expr::zero(); self.rows];
        for (i, j, s, a) in self.terms() {
            let d = field.prolonged(j, s, &mut cache);
            out[i] = &out[i] + a * d;
        }
        Ok(out)
    }

    /// Formal adjoint `(Δ*ψ)_j = (−1)^{|σ|} D_σ(a^σ_{ij} ψ_i)`, expanded by
    /// the Leibniz rule into canonical form.
    pub fn adjoint(&self) -> COperator {
        let mut out = Self::zero(self.n, self.cols, self.rows);
        let mut derived: BTreeMap<(usize, usize, MultiIndex, MultiIndex), Expr> = BTreeMap::new();
        for (i, j, sigma, a) in self.terms() {
            let sign = if sigma.order() % 2 == 0 { 1 } else { -1 };
            for (rho, rest, w) in sigma.splits() {
                let key = (i, j, sigma.clone(), rho.clone());
                let da = derived.entry(key).or_insert_with(|| iterated_total_derivative(a, &rho)).clone();
                let w = BigRational::from_integer(w * sign);
                out.add_term(j, i, rest, da.scale(&w));
            }
        }
        out
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &COperator) -> Result<COperator> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot compose {} columns with {} rows",
                self.cols, other.rows
            )));
        }
        let mut out = Self::zero(self.n, self.rows, other.cols);
        for (i, k, sigma, a) in self.terms() {
            for (k2, j, tau, b) in other.terms() {
                if k2 != k {
                    continue;
                }
                for (rho, rest, w) in sigma.splits() {
                    let db = iterated_total_derivative(b, &rho);
                    out.add_term(i, j, rest.join(tau), (a * db).scale(&BigRational::from_integer(w)));
                }
            }
        }
        Ok(out)
    }

    pub fn render(&self, ctx: &JetContext, fmt: Format) -> String {
        let mut lines = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.entries[i][j].is_empty() {
                    continue;
                }
                let parts: Vec<String> = self.entries[i][j]
                    .iter()
                    .rev()
                    .map(|(s, a)| {
                        let letters: String = s.indices().map(|l| ctx.base_name(l).to_string()).collect();
                        let d = match (fmt, s.is_empty()) {
                            (Format::Latex, true) => "\\mathrm{id}".to_string(),
                            (Format::Latex, false) => format!("D_{{{letters}}}"),
                            (_, true) => "id".to_string(),
                            (_, false) => format!("D_{letters}"),
                        };
                        if a.is_one() {
                            d
                        } else {
                            let sep = if fmt == Format::Latex { " \\, " } else { "*" };
                            format!("{}{sep}{d}", render_factor(a, ctx, fmt))
                        }
                    })
                    .collect();
                let lhs = match fmt {
                    Format::Latex => format!("\\Delta_{{{}{}}}", i + 1, j + 1),
                    _ => format!("[{},{}]", i + 1, j + 1),
                };
                lines.push(format!("{lhs} = {}", parts.join(" + ")));
            }
        }
        if lines.is_empty() {
            "0".into()
        } else {
            lines.join("\n")
        }
    }
}

pub fn adjoint(op: &COperator) -> COperator {
    op.adjoint()
}

/// `∂λ₀/∂u^i_τ` for every fiber coordinate present.
fn fiber_partials(e: &Expr) -> BTreeMap<(usize, MultiIndex), Expr> {
    let mut out = BTreeMap::new();
    for a in e.leaves() {
        if let Atom::Fiber(i, s) = &a {
            let p = e.partial(&a);
            if !p.is_zero() {
                out.insert((*i as usize, s.clone()), p);
            }
        }
    }
    out
}

/// `ε_i = Σ_τ (−1)^{|τ|} D_τ(∂λ₀/∂u^i_τ)`.
pub fn euler_lagrange(lagrangian: &Lagrangian) -> SourceForm {
    let mut comps = vec![Expr::zero(); lagrangian.m];
    for ((i, tau), p) in fiber_partials(&lagrangian.density) {
        if i >= lagrangian.m {
            continue;
        }
        let d = iterated_total_derivative(&p, &tau);
        comps[i] = if tau.order() % 2 == 0 { &comps[i] + d } else { &comps[i] - d };
    }
    SourceForm::new(lagrangian.n, comps)
}

/// `ℓ_ε` with entries `Σ_σ ∂ε_i/∂u^j_σ D_σ`.
pub fn linearization(eps: &SourceForm, m: usize) -> COperator {
    let mut op = COperator::zero(eps.n, eps.m(), m);
    for (i, e) in eps.components.iter().enumerate() {
        for ((j, s), p) in fiber_partials(e) {
            if j < m {
                op.add_term(i, j, s, p);
            }
        }
    }
    op
}

/// Outcome of the variationality test.
#[derive(Clone, Debug)]
pub struct HelmholtzReport {
    pub variational: bool,
    pub residual: COperator,
}

/// `ℓ_ε − ℓ_ε*`; the source form is locally variational iff this vanishes.
pub fn helmholtz_check(eps: &SourceForm) -> Result<HelmholtzReport> {
    let m = eps.m();
    let ell = linearization(eps, m);
    let residual = ell.sub(&ell.adjoint())?.pruned();
    Ok(HelmholtzReport {
        variational: residual.is_zero(),
        residual,
    })
}

/// Null-Lagrangian test: the Euler–Lagrange form vanishes identically.
pub fn is_null_lagrangian(lagrangian: &Lagrangian) -> bool {
    euler_lagrange(lagrangian).is_zero()
}

/// The `(n−1)`-form `ω` with `d̄ω = (ψ·Δφ − Δ*ψ·φ) Vol`, built letter by
/// letter from `a D_λ b = D_λ(ab) − D_λ a · b` and checked before return.
pub fn green_residual(op: &COperator, phi: &[Expr], psi: &[Expr]) -> Result<HorizontalForm> {
    if phi.len() != op.cols() || psi.len() != op.rows() {
        return Err(Error::Shape(format!(
            "operator is {}×{}, arguments have lengths {} and {}",
            op.rows(),
            op.cols(),
            phi.len(),
            psi.len()
        )));
    }
    let n = op.n;
    let phi_field = EvolutionaryField::new(phi.to_vec());
    let mut phi_cache = BTreeMap::new();
    let mut current = vec![Expr::zero(); n];
    for (i, j, sigma, a) in op.terms() {
        let letters: Vec<usize> = sigma.indices().collect();
        // b = (−1)^s D_{σ₁…σ_s}(ψ_i a), c = D_{σ_{s+2}…}φ^j
        let mut b = &psi[i] * a;
        for (s, &l) in letters.iter().enumerate() {
            let rest = MultiIndex::new(letters[s + 1..].iter().copied());
            let c = phi_field.prolonged(j, &rest, &mut phi_cache);
            current[l] = &current[l] + &b * c;
            b = -total_derivative(&b, l);
        }
    }
    let omega = HorizontalForm::from_current(n, &current);
    let lhs = omega.horizontal_differential().density();
    let dphi = op.apply(phi)?;
    let dstar = op.adjoint().apply(psi)?;
    let rhs = Expr::sum(psi.iter().zip(&dphi).map(|(a, b)| a * b)) - Expr::sum(dstar.iter().zip(phi).map(|(a, b)| a * b));
    if !(lhs - rhs).is_identically_zero() {
        return Err(Error::Verification("Green's formula residual does not close".into()));
    }
    Ok(omega)
}

/// `Evo_φ(λ₀) = Σ ∂λ₀/∂u^i_σ D_σ` as a one-row operator.
pub fn variation_operator(lagrangian: &Lagrangian) -> COperator {
    let mut op = COperator::zero(lagrangian.n, 1, lagrangian.m);
    for ((i, s), p) in fiber_partials(&lagrangian.density) {
        if i < lagrangian.m {
            op.add_term(0, i, s, p);
        }
    }
    op
}

/// Decomposition `Evo_φ(λ₀) Vol = E(λ)(φ) Vol + d̄ω`, verified before return.
#[derive(Clone, Debug)]
pub struct FirstVariation {
    pub euler_term: Expr,
    pub boundary: HorizontalForm,
}

pub fn first_variation(lagrangian: &Lagrangian, phi: &EvolutionaryField) -> Result<FirstVariation> {
    if phi.components.len() != lagrangian.m {
        return Err(Error::Shape(format!(
            "variation has {} components, Lagrangian has {}",
            phi.components.len(),
            lagrangian.m
        )));
    }
    let op = variation_operator(lagrangian);
    let boundary = green_residual(&op, &phi.components, &[Expr::one()])?;
    let euler_term = euler_lagrange(lagrangian).pair(&phi.components);
    let check = phi.apply(&lagrangian.density) - &euler_term - boundary.horizontal_differential().density();
    if !check.is_identically_zero() {
        return Err(Error::Verification("first variation does not decompose".into()));
    }
    Ok(FirstVariation { euler_term, boundary })
}

type Slot = (usize, MultiIndex);

/// Multilinear C-differential operator with scalar values:
/// `Δ(φ_1, …, φ_p) = Σ a^{σ_1…σ_p}_{j_1…j_p} D_{σ_1}φ_1^{j_1} ⋯ D_{σ_p}φ_p^{j_p}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilinearOperator {
    pub n: usize,
    pub m: usize,
    pub arity: usize,
    terms: BTreeMap<Vec<Slot>, Expr>,
}

/// First fiber index that is free in all of `es`.
fn fresh_offset<'a>(m: usize, es: impl Iterator<Item = &'a Expr>) -> usize {
    let mut top = m;
    for e in es {
        for a in e.leaves() {
            if let Atom::Fiber(i, _) = a {
                top = top.max(i as usize + 1);
            }
        }
    }
    top
}

impl MultilinearOperator {
    pub fn zero(n: usize, m: usize, arity: usize) -> Self {
        MultilinearOperator {
            n,
            m,
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, slots: Vec<Slot>, a: Expr) -> Result<()> {
        if slots.len() != self.arity {
            return Err(Error::Shape(format!("{} slots for arity {}", slots.len(), self.arity)));
        }
        if a.is_zero() {
            return Ok(());
        }
        let slot = self.terms.entry(slots.clone()).or_default();
        *slot = &*slot + &a;
        if slot.is_zero() {
            self.terms.remove(&slots);
        }
        Ok(())
    }

    /// The bilinear form `(φ_1, φ_2) ↦ φ_1 · Δ(φ_2)`.
    pub fn pairing_second(op: &COperator) -> Self {
        let mut out = Self::zero(op.n, op.cols().max(op.rows()), 2);
        for (i, j, s, a) in op.terms() {
            out.add_term(vec![(i, MultiIndex::empty()), (j, s.clone())], a.clone())
                .expect("arity 2");
        }
        out
    }

    /// The form `φ ↦ Σ ∂λ₀/∂u^i_τ D_τ φ^i`.
    pub fn from_lagrangian(lagrangian: &Lagrangian) -> Self {
        let mut out = Self::zero(lagrangian.n, lagrangian.m, 1);
        for ((i, s), p) in fiber_partials(&lagrangian.density) {
            out.add_term(vec![(i, s)], p).expect("arity 1");
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Slot], &Expr)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn apply(&self, args: &[Vec<Expr>]) -> Result<Expr> {
        if args.len() != self.arity {
            return Err(Error::Shape(format!("{} arguments for arity {}", args.len(), self.arity)));
        }
        let fields: Vec<EvolutionaryField> = args.iter().map(|a| EvolutionaryField::new(a.clone())).collect();
        let mut caches = vec![BTreeMap::new(); self.arity];
        let mut acc = Expr::zero();
        for (slots, a) in &self.terms {
            let mut t = a.clone();
            for (k, (j, s)) in slots.iter().enumerate() {
                t = t * fields[k].prolonged(*j, s, &mut caches[k]);
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Antisymmetry in the argument pair `(k, k+1)`.
    fn antisymmetric_in(&self, k: usize) -> bool {
        self.terms.iter().all(|(slots, a)| {
            let mut sw = slots.clone();
            sw.swap(k, k + 1);
            let b = self.terms.get(&sw).cloned().unwrap_or_default();
            (a + b).is_identically_zero()
        })
    }

    /// Integrates the last argument by parts:
    /// `I_p(Δ)(φ_1, …, φ_{p−1})_j = (−1)^{|τ|} D_τ(a^{…τ}_{…j} D_{σ_1}φ_1 ⋯)`,
    /// returned as one `(p−1)`-linear operator per component `j`.
    pub fn internalize(&self) -> Result<Vec<MultilinearOperator>> {
        if self.arity == 0 {
            return Err(Error::Shape("internalization needs at least one argument".into()));
        }
        for k in 0..self.arity.saturating_sub(2) {
            if !self.antisymmetric_in(k) {
                return Err(Error::Invalid(format!(
                    "operator is not antisymmetric in arguments {} and {}",
                    k + 1,
                    k + 2
                )));
            }
        }
        let p = self.arity;
        let off = fresh_offset(self.m, self.terms.values());
        let fresh = |k: usize, j: usize| off + k * self.m + j;
        let mut comps: Vec<Expr> = vec![Expr::zero(); self.m];
        for (slots, a) in &self.terms {
            let mut t = a.clone();
            for (k, (j, s)) in slots[..p - 1].iter().enumerate() {
                t = t * Expr::fiber(fresh(k, *j), s.clone());
            }
            let (j, tau) = &slots[p - 1];
            let d = iterated_total_derivative(&t, tau);
            comps[*j] = if tau.order() % 2 == 0 { &comps[*j] + d } else { &comps[*j] - d };
        }
        let block = off..off + (p - 1) * self.m;
        comps
            .into_iter()
            .map(|c| {
                let mut op = MultilinearOperator::zero(self.n, self.m, p - 1);
                let pred = |a: &Atom| matches!(a, Atom::Fiber(i, _) if (*i as usize) >= off && (*i as usize) < off + (p - 1) * self.m);
                for (mono, coef) in c.collect_by(pred) {
                    let mut slots: Vec<Option<Slot>> = vec![None; p - 1];
                    for (atom, e) in mono.factors() {
                        let Atom::Fiber(i, s) = atom else { unreachable!() };
                        let i = *i as usize;
                        debug_assert!(block.contains(&i) && e == 1);
                        let k = (i - off) / self.m;
                        slots[k] = Some((i - off - k * self.m, s.clone()));
                    }
                    let slots: Option<Vec<Slot>> = slots.into_iter().collect();
                    let slots = slots.ok_or_else(|| Error::Verification("internalized term is not multilinear".into()))?;
                    op.add_term(slots, coef)?;
                }
                Ok(op)
            })
            .collect()
    }
}

/// Turns a unary internalized operator list into a source form.
pub fn internalized_source(ops: &[MultilinearOperator]) -> Result<SourceForm> {
    let n = ops.first().map(|o| o.n).unwrap_or(1);
    let comps = ops
        .iter()
        .map(|o| {
            if o.arity != 0 {
                return Err(Error::Shape("expected scalar components".into()));
            }
            Ok(o.terms.get(&vec![]).cloned().unwrap_or_default())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SourceForm::new(n, comps))
}

pub fn internalize(op: &MultilinearOperator) -> Result<Vec<MultilinearOperator>> {
    op.internalize()
}

/// Box grid for numerical quadrature; `points` per axis, made odd.
#[derive(Clone, Debug)]
pub struct Grid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: usize,
}

impl Grid {
    pub fn unit(n: usize, points: usize) -> Self {
        Grid {
            lower: vec![0.0; n],
            upper: vec![1.0; n],
            points,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FdConfig {
    pub step: f64,
    pub tolerance: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step: 1e-4,
            tolerance: 1e-4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FdReport {
    /// Central difference of the discretized action in `t`.
    pub action_derivative: f64,
    /// Grid integral of `E(λ)(φ)` on the test submanifold.
    pub euler_integral: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Jets of `u = p(x)` and of a variation `φ(x)`, evaluated numerically.
struct GraphData {
    graph: Vec<Expr>,
    derivatives: BTreeMap<(usize, MultiIndex), Expr>,
}

impl GraphData {
    fn new(graph: &[Expr]) -> Self {
        GraphData {
            graph: graph.to_vec(),
            derivatives: BTreeMap::new(),
        }
    }

    fn derivative(&mut self, i: usize, s: &MultiIndex) -> Expr {
        if let Some(v) = self.derivatives.get(&(i, s.clone())) {
            return v.clone();
        }
        let v = match s.max_index() {
            None => self.graph[i].clone(),
            Some(l) => self.derivative(i, &s.without(l).unwrap()).partial(&Atom::base(l)),
        };
        self.derivatives.insert((i, s.clone()), v.clone());
        v
    }
}

fn simpson_weights(points: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let h = (b - a) / (points - 1) as f64;
    (0..points)
        .map(|k| {
            let w = if k == 0 || k == points - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (a + k as f64 * h, w * h / 3.0)
        })
        .collect()
}

/// Compares `d/dt|₀ ∫ λ₀(j(p + tφ))` with `∫ E(λ)(φ)` on `p`, both by
/// Simpson quadrature on `grid`.
pub fn finite_difference_action_check(
    lagrangian: &Lagrangian,
    graph: &[Expr],
    variation: &[Expr],
    grid: &Grid,
    funcs: &FunctionTable,
    config: FdConfig,
) -> Result<FdReport> {
    let n = lagrangian.n;
    let m = lagrangian.m;
    if graph.len() != m || variation.len() != m || grid.lower.len() != n || grid.upper.len() != n {
        return Err(Error::Shape(
            "graph, variation and grid must match the Lagrangian's dimensions".into(),
        ));
    }
    for e in graph.iter().chain(variation) {
        if e.leaves().iter().any(|a| matches!(a, Atom::Fiber(..))) {
            return Err(Error::Invalid(
                "graph and variation must depend on the base coordinates only".into(),
            ));
        }
    }
    let points = if grid.points.is_multiple_of(2) {
        grid.points + 1
    } else {
        grid.points.max(3)
    };
    let axes: Vec<Vec<(f64, f64)>> = (0..n).map(|l| simpson_weights(points, grid.lower[l], grid.upper[l])).collect();
    let eps = euler_lagrange(lagrangian);
    let integrand = eps.pair(variation);
    let mut p_data = GraphData::new(graph);
    let mut v_data = GraphData::new(variation);
    let lag_atoms: Vec<(usize, MultiIndex)> = lagrangian
        .density
        .leaves()
        .into_iter()
        .filter_map(|a| match a {
            Atom::Fiber(i, s) => Some((i as usize, s)),
            _ => None,
        })
        .collect();
    let el_atoms: Vec<(usize, MultiIndex)> = integrand
        .leaves()
        .into_iter()
        .filter_map(|a| match a {
            Atom::Fiber(i, s) => Some((i as usize, s)),
            _ => None,
        })
        .collect();
    let p_lag: Vec<(Atom, Expr, Expr)> = lag_atoms
        .iter()
        .map(|(i, s)| (Atom::fiber(*i, s.clone()), p_data.derivative(*i, s), v_data.derivative(*i, s)))
        .collect();
    let p_el: Vec<(Atom, Expr)> = el_atoms
        .iter()
        .map(|(i, s)| (Atom::fiber(*i, s.clone()), p_data.derivative(*i, s)))
        .collect();

    let base_of = |pt: &[f64]| {
        let pt = pt.to_vec();
        move |a: &Atom| match a {
            Atom::Base(l) => pt.get(*l as usize).copied(),
            _ => None,
        }
    };

    let mut action = [0.0f64; 2];
    let mut euler = 0.0f64;
    let mut idx = vec![0usize; n];
    loop {
        let pt: Vec<f64> = (0..n).map(|l| axes[l][idx[l]].0).collect();
        let w: f64 = (0..n).map(|l| axes[l][idx[l]].1).product();
        let base = base_of(&pt);
        let mut jet_p = BTreeMap::new();
        let mut jet_v = BTreeMap::new();
        for (a, pe, ve) in &p_lag {
            jet_p.insert(a.clone(), pe.eval_f64(&base, funcs)?);
            jet_v.insert(a.clone(), ve.eval_f64(&base, funcs)?);
        }
        for (k, t) in [config.step, -config.step].into_iter().enumerate() {
            let leaf = |a: &Atom| match a {
                Atom::Base(_) => base(a),
                Atom::Fiber(..) => Some(jet_p[a] + t * jet_v[a]),
                _ => None,
            };
            action[k] += w * lagrangian.density.eval_f64(&leaf, funcs)?;
        }
        let mut jet_e = BTreeMap::new();
        for (a, pe) in &p_el {
            jet_e.insert(a.clone(), pe.eval_f64(&base, funcs)?);
        }
        let leaf = |a: &Atom| match a {
            Atom::Base(_) => base(a),
            Atom::Fiber(..) => jet_e.get(a).copied(),
            _ => None,
        };
        euler += w * integrand.eval_f64(&leaf, funcs)?;

        let mut l = 0;
        loop {
            if l == n {
                let lhs = (action[0] - action[1]) / (2.0 * config.step);
                let scale = lhs.abs().max(euler.abs());
                let relative_error = if scale < 1e-12 { 0.0 } else { (lhs - euler).abs() / scale };
                return Ok(FdReport {
                    action_derivative: lhs,
                    euler_integral: euler,
                    relative_error,
                    tolerance: config.tolerance,
                    passed: relative_error < config.tolerance,
                });
            }
            idx[l] += 1;
            if idx[l] < points {
                break;
            }
            idx[l] = 0;
            l += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: usize, m: usize, r: usize) -> JetContext {
        JetContext::new(n, m, r).unwrap()
    }

    fn lag(c: &JetContext, s: &str) -> Lagrangian {
        Lagrangian::new(c, c.parse(s).unwrap()).unwrap()
    }

    fn src(c: &JetContext, s: &[&str]) -> SourceForm {
        SourceForm::new(c.n, s.iter().map(|t| c.parse(t).unwrap()).collect())
    }

    #[test]
    fn euler_lagrange_examples() {
        let c = ctx(2, 1, 1);
        let e = euler_lagrange(&lag(&c, "1/2*(u_x^2 + u_y^2)"));
        assert_eq!(e.components, vec![c.with_order(2).parse("-u_xx - u_yy").unwrap()]);
        let c1 = ctx(1, 1, 1);
        let e = euler_lagrange(&lag(&c1, "sqrt(1 + u_x^2)"));
        let expected = c1.with_order(2).parse("-u_xx*(1 + u_x^2)^(-3/2)").unwrap();
        assert!(e.components[0].equivalent(&expected));
    }

    #[test]
    fn adjoint_examples() {
        let dx = MultiIndex::single(0);
        let dxx = MultiIndex::new([0, 0]);
        let a = Expr::base(0).powi(2) + Expr::one();
        assert_eq!(
            COperator::scalar(1, dx.clone(), Expr::one()).adjoint(),
            COperator::scalar(1, dx, Expr::int(-1))
        );
        let id = COperator::scalar(1, MultiIndex::empty(), a.clone());
        assert_eq!(id.adjoint(), id);
        let d2 = COperator::scalar(1, dxx, Expr::one());
        assert_eq!(d2.adjoint(), d2);
    }

    #[test]
    fn helmholtz_examples() {
        let c = ctx(1, 1, 2);
        let rep = helmholtz_check(&src(&c, &["u_xx + u*u_x"])).unwrap();
        assert!(!rep.variational);
        let mut expected = COperator::zero(1, 1, 1);
        expected.add_term(0, 0, MultiIndex::single(0), c.parse("2*u").unwrap());
        expected.add_term(0, 0, MultiIndex::empty(), c.parse("u_x").unwrap());
        assert_eq!(rep.residual, expected);
        assert!(helmholtz_check(&src(&c, &["u_xx"])).unwrap().variational);
    }

    #[test]
    fn linearization_examples() {
        let c = ctx(1, 1, 2);
        let l = linearization(&src(&c, &["u*u_x"]), 1);
        assert_eq!(l.coefficient(0, 0, &MultiIndex::empty()), c.parse("u_x").unwrap());
        assert_eq!(l.coefficient(0, 0, &MultiIndex::single(0)), c.parse("u").unwrap());
        assert!(linearization(&src(&c, &["0"]), 1).is_zero());
    }

    #[test]
    fn green_residual_examples() {
        let c = ctx(1, 1, 2);
        let phi = vec![c.parse("x^2*u").unwrap()];
        let psi = vec![c.parse("u_x + x").unwrap()];
        let w = green_residual(&COperator::scalar(1, MultiIndex::single(0), Expr::one()), &phi, &psi).unwrap();
        assert_eq!(w.coefficient(&[]), &phi[0] * &psi[0]);
        let w = green_residual(&COperator::identity(1, 1), &phi, &psi).unwrap();
        assert!(w.is_zero());
        let w = green_residual(&COperator::scalar(1, MultiIndex::new([0, 0]), Expr::one()), &phi, &psi).unwrap();
        let expected = &psi[0] * total_derivative(&phi[0], 0) - total_derivative(&psi[0], 0) * &phi[0];
        assert_eq!(w.coefficient(&[]), expected);
    }

    #[test]
    fn first_variation_examples() {
        let c = ctx(1, 1, 1);
        let c2 = c.with_order(2);
        let fv = first_variation(&lag(&c, "1/2*u_x^2"), &EvolutionaryField::new(vec![Expr::one()])).unwrap();
        assert_eq!(fv.euler_term, c2.parse("-u_xx").unwrap());
        assert_eq!(fv.boundary.coefficient(&[]), c.parse("u_x").unwrap());
        let fv = first_variation(&lag(&c, "7"), &EvolutionaryField::new(vec![c.parse("u").unwrap()])).unwrap();
        assert!(fv.euler_term.is_zero() && fv.boundary.is_zero());
        let phi = c.parse("x*u").unwrap();
        let fv = first_variation(&lag(&c, "sqrt(1 + u_x^2)"), &EvolutionaryField::new(vec![phi.clone()])).unwrap();
        assert!(fv.euler_term.equivalent(&(c2.parse("-u_xx*(1 + u_x^2)^(-3/2)").unwrap() * &phi)));
        assert!(fv
            .boundary
            .coefficient(&[])
            .equivalent(&(c.parse("u_x*(1 + u_x^2)^(-1/2)").unwrap() * &phi)));
    }

    #[test]
    fn internalization_reproduces_euler_lagrange() {
        let c = ctx(2, 1, 2);
        let l = lag(&c, "u_x^2*u_yy + u*u_xy + x*u_y^3");
        let ops = MultilinearOperator::from_lagrangian(&l).internalize().unwrap();
        let e = internalized_source(&ops).unwrap();
        assert_eq!(e, euler_lagrange(&l));
    }

    #[test]
    fn fd_check_quadratic() {
        let c = ctx(1, 1, 1);
        let rep = finite_difference_action_check(
            &lag(&c, "1/2*u_x^2"),
            &[c.parse("x^2").unwrap()],
            &[c.parse("x*(1 - x)").unwrap()],
            &Grid::unit(1, 1001),
            &FunctionTable::new(),
            FdConfig::default(),
        )
        .unwrap();
        assert!((rep.euler_integral + 1.0 / 3.0).abs() < 1e-9);
        assert!((rep.action_derivative + 1.0 / 3.0).abs() < 1e-6);
        assert!(rep.passed);
    }
}
