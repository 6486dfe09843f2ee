//! Exact symbolic expressions over jet coordinates.
//!
//! An [`Expr`] is always held in canonical form: a numerator polynomial over
//! ℚ divided by a product of primitive polynomial factors. Radicals and
//! function applications are opaque atoms whose insides are themselves
//! canonical, so structural equality of atoms is meaningful. Every
//! constructor and arithmetic operation returns canonical output, which makes
//! [`Expr::normalize`] idempotent by construction.

mod atom;
mod derive;
mod eval;
pub(crate) mod parse;
mod poly;
mod root;
mod subst;
mod zero;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use atom::{Atom, FuncApp, RootAtom, SymbolAtom, SymbolKind};
pub use eval::{FunctionTable, Value};
pub use parse::parse;
pub use poly::{Monomial, Poly};
pub use zero::{ZeroCertainty, ZeroTest, ZeroTestConfig};

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
struct Frac {
    num: Poly,
    den: BTreeMap<Poly, u32>,
}

/// Canonical rational function in atoms.
#[derive(Clone)]
pub struct Expr(Arc<Frac>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}
impl Eq for Expr {}
impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            Ordering::Equal
        } else {
            self.0.cmp(&other.0)
        }
    }
}
impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Expr {
    fn from_frac(f: Frac) -> Expr {
        Expr(Arc::new(f))
    }

    pub fn zero() -> Expr {
        Expr::from_poly(Poly::zero())
    }

    pub fn one() -> Expr {
        Expr::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn rational(q: BigRational) -> Expr {
        Expr::from_poly(Poly::constant(q))
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::from_frac(Frac {
            num: p,
            den: BTreeMap::new(),
        })
    }

    pub fn atom(a: Atom) -> Expr {
        Expr::from_poly(Poly::atom(a))
    }

    /// `x^λ`.
    pub fn base(lambda: usize) -> Expr {
        Expr::atom(Atom::base(lambda))
    }

    /// `u^i_σ`.
    pub fn fiber(i: usize, sigma: MultiIndex) -> Expr {
        Expr::atom(Atom::fiber(i, sigma))
    }

    /// `u^i` (order zero).
    pub fn u(i: usize) -> Expr {
        Expr::fiber(i, MultiIndex::empty())
    }

    pub fn parameter(name: &str) -> Expr {
        Expr::atom(Atom::parameter(name))
    }

    pub fn constant(name: &str, dimension: Option<&str>) -> Expr {
        Expr::atom(Atom::constant(name, dimension))
    }

    /// Undifferentiated application `f(args…)`.
    pub fn func(name: &str, args: Vec<Expr>) -> Expr {
        Expr::atom(Atom::Func(Arc::new(FuncApp {
            name: name.to_string(),
            derivative: Vec::new(),
            args,
        })))
    }

    /// Formal derivative `∂_{positions} f(args…)`.
    pub fn func_derivative(name: &str, positions: &[usize], args: Vec<Expr>) -> Expr {
        let mut d: Vec<u16> = positions.iter().map(|&p| p as u16).collect();
        d.sort_unstable();
        Expr::atom(Atom::Func(Arc::new(FuncApp {
            name: name.to_string(),
            derivative: d,
            args,
        })))
    }

    /// Returns the canonical form, which is the expression itself.
    pub fn normalize(&self) -> Expr {
        Expr::build(self.0.num.clone(), self.0.den.clone())
    }

    pub fn numerator(&self) -> &Poly {
        &self.0.num
    }

    /// Denominator factors with multiplicities.
    pub fn denominator_factors(&self) -> impl Iterator<Item = (&Poly, u32)> {
        self.0.den.iter().map(|(p, e)| (p, *e))
    }

    pub fn denominator(&self) -> Poly {
        self.0.den.iter().fold(Poly::one(), |acc, (p, e)| acc.mul(&p.pow(*e)))
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_empty()
    }

    /// Structural zero test on the canonical form.
    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.den.is_empty() && self.0.num.is_one()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.0.den.is_empty() {
            self.0.num.as_constant()
        } else {
            None
        }
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        if !self.0.den.is_empty() || self.0.num.len() != 1 {
            return None;
        }
        let (m, c) = self.0.num.leading()?;
        if !c.is_one() {
            return None;
        }
        let mut f = m.factors();
        match (f.next(), f.next()) {
            (Some((a, 1)), None) => Some(a),
            _ => None,
        }
    }

    /// Builds a canonical expression from a numerator and canonical
    /// denominator factors, cancelling factors that divide the numerator.
    fn build(mut num: Poly, mut den: BTreeMap<Poly, u32>) -> Expr {
        if num.is_zero() {
            return Expr::zero();
        }
        den.retain(|_, e| *e > 0);
        if !den.is_empty() {
            let keys: Vec<Poly> = den.keys().cloned().collect();
            for f in keys {
                let e = den.get_mut(&f).unwrap();
                while *e > 0 {
                    match num.exact_div(&f) {
                        Some(q) => {
                            num = q;
                            *e -= 1;
                        }
                        None => break,
                    }
                }
            }
            den.retain(|_, e| *e > 0);
        }
        Expr::from_frac(Frac { num, den })
    }

    /// Divides the fraction `num / den` by `p^exp`, splitting `p` into canonical factors.
    fn divide_by_poly(num: &mut Poly, den: &mut BTreeMap<Poly, u32>, p: &Poly, exp: u32) -> Result<()> {
        if p.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if exp == 0 {
            return Ok(());
        }
        let (c, prim) = p.primitive();
        let ce = num_traits::pow(c, exp as usize);
        *num = num.scale(&ce.recip());
        let mc = prim.monomial_content();
        let rest = if mc.is_one() { prim } else { prim.div_monomial(&mc) };
        for (a, k) in mc.factors() {
            let t = k * exp;
            match a {
                Atom::Root(r) => {
                    // 1 / r^t = r^((q - t mod q) mod q) / base^ceil(t/q)
                    let q = r.index;
                    let up = (q - t % q) % q;
                    if up > 0 {
                        *num = num.mul(&Poly::term(BigRational::one(), Monomial::of(a.clone(), up)));
                    }
                    let base_exp = t.div_ceil(q);
                    let base = r.base.clone();
                    Self::divide_by_poly(num, den, &base, base_exp)?;
                }
                _ => {
                    *den.entry(Poly::atom(a.clone())).or_insert(0) += t;
                }
            }
        }
        if rest.as_constant().is_none() {
            Self::insert_factor(den, rest, exp);
        }
        Ok(())
    }

    /// Adds the primitive factor `f^exp`, merging it with existing factors
    /// that divide it or that it divides.
    fn insert_factor(den: &mut BTreeMap<Poly, u32>, mut f: Poly, exp: u32) {
        'outer: loop {
            if f.as_constant().is_some() {
                return;
            }
            if let Some(e) = den.get_mut(&f) {
                *e += exp;
                return;
            }
            let keys: Vec<Poly> = den.keys().cloned().collect();
            for g in keys {
                if let Some(q) = f.exact_div(&g) {
                    *den.get_mut(&g).unwrap() += exp;
                    f = q.primitive().1;
                    continue 'outer;
                }
                if let Some(q) = g.exact_div(&f) {
                    let k = den.remove(&g).unwrap();
                    den.insert(f, k + exp);
                    Self::insert_factor(den, q.primitive().1, k);
                    return;
                }
            }
            den.insert(f, exp);
            return;
        }
    }

    pub fn checked_recip(&self) -> Result<Expr> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut num = self.denominator();
        let mut den = BTreeMap::new();
        Self::divide_by_poly(&mut num, &mut den, &self.0.num, 1)?;
        Ok(Expr::build(num, den))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr> {
        Ok(self * &other.checked_recip()?)
    }

    pub fn recip(&self) -> Expr {
        self.checked_recip().expect("reciprocal of zero expression")
    }

    pub fn scale(&self, k: &BigRational) -> Expr {
        if k.is_zero() {
            return Expr::zero();
        }
        Expr::from_frac(Frac {
            num: self.0.num.scale(k),
            den: self.0.den.clone(),
        })
    }

    fn add_impl(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.0.den == other.0.den {
            return Expr::build(self.0.num.add(&other.0.num), self.0.den.clone());
        }
        let mut lcm = self.0.den.clone();
        for (f, e) in &other.0.den {
            let v = lcm.entry(f.clone()).or_insert(0);
            *v = (*v).max(*e);
        }
        let lift = |x: &Expr| -> Poly {
            let mut p = x.0.num.clone();
            for (f, e) in &lcm {
                let have = x.0.den.get(f).copied().unwrap_or(0);
                if *e > have {
                    p = p.mul(&f.pow(e - have));
                }
            }
            p
        };
        let num = lift(self).add(&lift(other));
        Expr::build(num, lcm)
    }

    fn mul_impl(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if let Some(k) = other.as_rational() {
            return self.scale(&k);
        }
        if let Some(k) = self.as_rational() {
            return other.scale(&k);
        }
        let mut den = self.0.den.clone();
        for (f, e) in &other.0.den {
            *den.entry(f.clone()).or_insert(0) += e;
        }
        Expr::build(self.0.num.mul(&other.0.num), den)
    }

    pub fn powi(&self, e: i64) -> Expr {
        if e == 0 {
            return Expr::one();
        }
        if e < 0 {
            return self.powi(-e).recip();
        }
        let e = e as u32;
        let den = self.0.den.iter().map(|(f, k)| (f.clone(), k * e)).collect();
        Expr::build(self.0.num.pow(e), den)
    }

    pub fn checked_powi(&self, e: i64) -> Result<Expr> {
        if e < 0 && self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.powi(e))
    }

    /// `self^(p/q)` with the principal real root.
    pub fn pow_rational(&self, p: i64, q: i64) -> Result<Expr> {
        if q == 0 {
            return Err(Error::DivisionByZero);
        }
        let r = BigRational::new(BigInt::from(p), BigInt::from(q));
        let (p, q) = (i64::try_from(r.numer().clone()).unwrap(), i64::try_from(r.denom().clone()).unwrap());
        if q == 1 {
            return self.checked_powi(p);
        }
        if self.is_zero() {
            return if p > 0 { Ok(Expr::zero()) } else { Err(Error::DivisionByZero) };
        }
        root::root_of(self, q as u32).checked_powi(p)
    }

    pub fn sqrt(&self) -> Expr {
        root::root_of(self, 2)
    }

    /// Leaf atoms (coordinates and symbols), searching inside radicals and
    /// function arguments.
    pub fn leaves(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out, &mut BTreeSet::new());
        out
    }

    /// Opaque atoms (radicals and function applications) at any depth.
    pub fn opaque_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_atoms(&self, leaves: &mut BTreeSet<Atom>, opaque: &mut BTreeSet<Atom>) {
        fn visit(p: &Poly, leaves: &mut BTreeSet<Atom>, opaque: &mut BTreeSet<Atom>) {
            for a in p.atoms() {
                match &a {
                    Atom::Root(r) => {
                        if opaque.insert(a.clone()) {
                            visit(&r.base, leaves, opaque);
                        }
                    }
                    Atom::Func(f) => {
                        if opaque.insert(a.clone()) {
                            for arg in &f.args {
                                arg.collect_atoms(leaves, opaque);
                            }
                        }
                    }
                    _ => {
                        leaves.insert(a);
                    }
                }
            }
        }
        visit(&self.0.num, leaves, opaque);
        for f in self.0.den.keys() {
            visit(f, leaves, opaque);
        }
    }

    /// Highest jet order of any fiber coordinate present.
    pub fn jet_order(&self) -> usize {
        self.leaves().iter().map(Atom::jet_order).max().unwrap_or(0)
    }

    pub fn contains_radicals(&self) -> bool {
        self.opaque_atoms().iter().any(|a| matches!(a, Atom::Root(_)))
    }

    /// Degree of the numerator in `atom` (top level only).
    pub fn numerator_degree_in(&self, atom: &Atom) -> u32 {
        self.0.num.degree_in(atom)
    }

    /// Splits the expression by the atoms selected by `pred`, which must not
    /// occur in the denominator: `self = Σ m · coeff(m)`.
    pub fn collect_by(&self, pred: impl Fn(&Atom) -> bool + Copy) -> BTreeMap<Monomial, Expr> {
        self.0
            .num
            .collect_by(pred)
            .into_iter()
            .map(|(m, p)| (m, Expr::build(p, self.0.den.clone())))
            .collect()
    }

    /// Semantic equality: `self − other` is identically zero. Structural
    /// equality can miss equal values whose denominators were factored
    /// differently.
    pub fn equivalent(&self, other: &Expr) -> bool {
        self == other || (self - other).is_identically_zero()
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(it: I) -> Expr {
        it.into_iter().fold(Expr::zero(), |a, b| a + b)
    }

    pub fn product<I: IntoIterator<Item = Expr>>(it: I) -> Expr {
        it.into_iter().fold(Expr::one(), |a, b| a * b)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.add_impl(b));
binop!(Sub, sub, |a, b| a.add_impl(&-b));
binop!(Mul, mul, |a, b| a.mul_impl(b));
// Panics on a zero divisor; use `checked_div` for fallible division.
binop!(Div, div, |a, b| a.mul_impl(&b.recip()));

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::from_frac(Frac {
            num: self.0.num.neg(),
            den: self.0.den.clone(),
        })
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::render::expr_plain(self))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::render::expr_plain(self))
    }
}
