//! Derivations of the expression field.
//!
//! Every derivation (partial derivative, total derivative, evolutionary
//! field) is determined by its values on leaf atoms; radicals and function
//! applications are handled once, here, by the chain rule.

use std::collections::BTreeMap;

use num_rational::BigRational;

use super::atom::Atom;
use super::poly::Poly;
use super::{rat, Expr};

pub(crate) struct Derivation<'a> {
    leaf: &'a mut dyn FnMut(&Atom) -> Option<Expr>,
    cache: BTreeMap<Atom, Expr>,
}

impl<'a> Derivation<'a> {
    pub(crate) fn new(leaf: &'a mut dyn FnMut(&Atom) -> Option<Expr>) -> Self {
        Derivation {
            leaf,
            cache: BTreeMap::new(),
        }
    }

    fn atom(&mut self, a: &Atom) -> Expr {
        if let Some(d) = self.cache.get(a) {
            return d.clone();
        }
        let d = match a {
            Atom::Root(r) => {
                let base = Expr::from_poly(r.base.clone());
                let db = self.poly(&r.base);
                if db.is_zero() {
                    Expr::zero()
                } else {
                    let q = BigRational::new(1.into(), r.index.into());
                    (Expr::atom(a.clone()) * db / base).scale(&q)
                }
            }
            Atom::Func(f) => {
                let mut acc = Expr::zero();
                for (k, arg) in f.args.iter().enumerate() {
                    let da = self.expr(arg);
                    if !da.is_zero() {
                        let g = Atom::Func(std::sync::Arc::new(f.differentiated(k)));
                        acc = acc + Expr::atom(g) * da;
                    }
                }
                acc
            }
            _ => (self.leaf)(a).unwrap_or_default(),
        };
        self.cache.insert(a.clone(), d.clone());
        d
    }

    fn poly(&mut self, p: &Poly) -> Expr {
        let mut polys: Poly = Poly::zero();
        let mut rest = Expr::zero();
        for a in p.atoms() {
            let da = self.atom(&a);
            if da.is_zero() {
                continue;
            }
            let dp = p.formal_derivative(&a);
            if da.is_polynomial() {
                polys = polys.add(&dp.mul(da.numerator()));
            } else {
                rest = rest + Expr::from_poly(dp) * da;
            }
        }
        Expr::from_poly(polys) + rest
    }

    pub(crate) fn expr(&mut self, e: &Expr) -> Expr {
        let dn = self.poly(e.numerator());
        if e.is_polynomial() {
            return dn;
        }
        let factors: Vec<(Poly, u32)> = e.denominator_factors().map(|(f, k)| (f.clone(), k)).collect();
        let inv = Expr::build(Poly::one(), factors.iter().cloned().collect());
        let mut log = Expr::zero();
        for (f, k) in &factors {
            let df = self.poly(f);
            if df.is_zero() {
                continue;
            }
            let finv = Expr::build(Poly::one(), [(f.clone(), 1)].into_iter().collect());
            log = log + (df * finv).scale(&rat(*k as i64));
        }
        dn * inv - e * &log
    }
}

impl Expr {
    /// Applies the derivation determined by its values on coordinates and
    /// symbols (`None` meaning zero).
    pub fn derive_with(&self, leaf: &mut dyn FnMut(&Atom) -> Option<Expr>) -> Expr {
        Derivation::new(leaf).expr(self)
    }

    /// `∂e/∂a`, treating every other leaf atom as independent.
    pub fn partial(&self, a: &Atom) -> Expr {
        let target = a.clone();
        self.derive_with(&mut |b| (*b == target).then(Expr::one))
    }
}
