use std::collections::{BTreeMap, BTreeSet};

use super::atom::{Atom, FuncApp};
use super::poly::Poly;
use super::{root, Expr};
use crate::error::{Error, Result};

struct Mapper<'a> {
    leaf: &'a mut dyn FnMut(&Atom) -> Option<Expr>,
    cache: BTreeMap<Atom, Expr>,
}

impl Mapper<'_> {
    fn atom(&mut self, a: &Atom) -> Result<Expr> {
        if let Some(v) = self.cache.get(a) {
            return Ok(v.clone());
        }
        let v = match a {
            Atom::Root(r) => {
                let base = self.poly(&r.base)?;
                if base.numerator() == &r.base && base.is_polynomial() {
                    Expr::atom(a.clone())
                } else {
                    root::root_of(&base, r.index)
                }
            }
            Atom::Func(f) => {
                let args = f.args.iter().map(|x| self.expr(x)).collect::<Result<Vec<_>>>()?;
                Expr::atom(Atom::Func(std::sync::Arc::new(FuncApp {
                    name: f.name.clone(),
                    derivative: f.derivative.clone(),
                    args,
                })))
            }
            _ => (self.leaf)(a).unwrap_or_else(|| Expr::atom(a.clone())),
        };
        self.cache.insert(a.clone(), v.clone());
        Ok(v)
    }

    fn poly(&mut self, p: &Poly) -> Result<Expr> {
        let mut images = BTreeMap::new();
        let mut all_poly = true;
        for a in p.atoms() {
            let v = self.atom(&a)?;
            all_poly &= v.is_polynomial();
            images.insert(a, v);
        }
        if all_poly {
            let mut acc = Poly::zero();
            for (m, c) in p.terms() {
                let mut t = Poly::constant(c.clone());
                for (a, e) in m.factors() {
                    t = t.mul(&images[a].numerator().pow(e));
                }
                acc = acc.add(&t);
            }
            return Ok(Expr::from_poly(acc));
        }
        let mut acc = Expr::zero();
        for (m, c) in p.terms() {
            let mut t = Expr::rational(c.clone());
            for (a, e) in m.factors() {
                t = t * images[a].powi(e as i64);
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    fn expr(&mut self, e: &Expr) -> Result<Expr> {
        let mut out = self.poly(e.numerator())?;
        for (f, k) in e.denominator_factors() {
            let v = self.poly(f)?;
            out = out.checked_div(&v.checked_powi(k as i64)?)?;
        }
        Ok(out)
    }
}

impl Expr {
    /// Replaces leaf atoms by the values of `leaf` (`None` keeps the atom),
    /// rebuilding radicals and function applications around the images.
    pub fn map_leaves(&self, leaf: &mut dyn FnMut(&Atom) -> Option<Expr>) -> Result<Expr> {
        Mapper {
            leaf,
            cache: BTreeMap::new(),
        }
        .expr(self)
    }

    /// Simultaneous substitution. A binding set in which some bound atom
    /// depends, directly or through other bindings, on itself is rejected.
    pub fn substitute(&self, bindings: &BTreeMap<Atom, Expr>) -> Result<Expr> {
        check_acyclic(bindings)?;
        self.map_leaves(&mut |a| bindings.get(a).cloned())
    }
}

fn check_acyclic(bindings: &BTreeMap<Atom, Expr>) -> Result<()> {
    let deps: BTreeMap<&Atom, BTreeSet<Atom>> = bindings
        .iter()
        .map(|(a, e)| (a, e.leaves().into_iter().filter(|b| bindings.contains_key(b)).collect()))
        .collect();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&Atom, u8> = BTreeMap::new();
    fn visit<'a>(
        a: &'a Atom,
        deps: &'a BTreeMap<&'a Atom, BTreeSet<Atom>>,
        state: &mut BTreeMap<&'a Atom, u8>,
    ) -> std::result::Result<(), &'a Atom> {
        match state.get(a) {
            Some(1) => return Err(a),
            Some(2) => return Ok(()),
            _ => {}
        }
        state.insert(a, 1);
        for b in &deps[a] {
            let key = deps.get_key_value(b).unwrap().0;
            visit(key, deps, state)?;
        }
        state.insert(a, 2);
        Ok(())
    }
    for a in deps.keys() {
        if let Err(bad) = visit(a, &deps, &mut state) {
            return Err(Error::CyclicBinding(format!("{bad:?}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::MultiIndex;

    #[test]
    fn substitution_into_radicals() {
        let ux = Atom::fiber(0, MultiIndex::single(0));
        let e = (Expr::one() + Expr::atom(ux.clone()).powi(2)).sqrt();
        let v = e.substitute(&[(ux.clone(), Expr::int(0))].into_iter().collect()).unwrap();
        assert!(v.is_one());
        let v = e.substitute(&[(ux, Expr::frac(3, 4))].into_iter().collect()).unwrap();
        assert_eq!(v, Expr::frac(5, 4));
    }

    #[test]
    fn cycles_are_rejected() {
        let (a, b) = (Atom::base(0), Atom::base(1));
        let bind: BTreeMap<_, _> = [(a.clone(), Expr::atom(b.clone())), (b, Expr::atom(a))].into_iter().collect();
        assert!(matches!(Expr::one().substitute(&bind), Err(Error::CyclicBinding(_))));
    }

    #[test]
    fn vanishing_denominator_is_an_error() {
        let ux = Atom::fiber(0, MultiIndex::single(0));
        let e = Expr::atom(ux.clone()).recip();
        let r = e.substitute(&[(ux, Expr::zero())].into_iter().collect());
        assert_eq!(r, Err(Error::DivisionByZero));
    }
}
