//! Canonical radicals.
//!
//! A radical atom `Root(P, q)` always has an integral radicand `±t·P₀` with
//! `P₀` primitive and `t` free of `q`-th powers, so two radicals of the same
//! quantity are structurally equal. Rational factors that are perfect powers
//! are pulled out in front.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::atom::{Atom, RootAtom};
use super::poly::{Monomial, Poly};
use super::Expr;

/// Splits `|k|` into `s^q · t` with `t` (probably) free of `q`-th powers.
fn split_power(k: &BigInt, q: u32) -> (BigInt, BigInt) {
    let mut rest = k.abs();
    let mut s = BigInt::one();
    let mut t = BigInt::one();
    let mut p = 2u32;
    while p <= 1000 && rest > BigInt::one() {
        let bp = BigInt::from(p);
        let mut e = 0u32;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            e += 1;
        }
        if e > 0 {
            s *= num_traits::pow(bp.clone(), (e / q) as usize);
            t *= num_traits::pow(bp, (e % q) as usize);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > BigInt::one() {
        let r = rest.nth_root(q);
        if num_traits::pow(r.clone(), q as usize) == rest {
            s *= r;
        } else {
            t *= rest;
        }
    }
    (s, t)
}

/// Principal `q`-th root of a polynomial as a canonical polynomial.
pub(crate) fn root_of_poly(base: &Poly, q: u32) -> Poly {
    assert!(q >= 1, "root index must be positive");
    if q == 1 || base.is_zero() {
        return base.clone();
    }
    let (c, p0) = base.primitive();
    let negative = c.is_negative();
    let a = c.numer().abs();
    let b = c.denom().clone();
    let k = a * num_traits::pow(b.clone(), (q - 1) as usize);
    let (s, t) = split_power(&k, q);
    let even = q.is_multiple_of(2);
    let mut front = BigRational::new(s, b);
    let mut radicand = p0.scale(&BigRational::from_integer(t));
    if negative {
        if even {
            radicand = radicand.neg();
        } else {
            front = -front;
        }
    }
    if radicand.is_one() {
        return Poly::constant(front);
    }
    let atom = Atom::Root(Arc::new(RootAtom { base: radicand, index: q }));
    Poly::term(front, Monomial::of(atom, 1))
}

/// Principal `q`-th root of an expression, taken factorwise over the
/// numerator and the denominator factors.
pub(crate) fn root_of(e: &Expr, q: u32) -> Expr {
    if q == 1 || e.is_zero() {
        return e.clone();
    }
    let mut out = Expr::from_poly(root_of_poly(e.numerator(), q));
    let den: BTreeMap<Poly, u32> = e.denominator_factors().map(|(p, k)| (p.clone(), k)).collect();
    for (f, k) in den {
        let r = Expr::from_poly(root_of_poly(&f, q));
        out = out * r.powi(-(k as i64));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_power_parts() {
        let (s, t) = split_power(&BigInt::from(72), 2);
        assert_eq!((s, t), (BigInt::from(6), BigInt::from(2)));
        let (s, t) = split_power(&BigInt::from(1_000_003i64 * 1_000_003i64), 2);
        assert_eq!((s, t), (BigInt::from(1_000_003), BigInt::one()));
    }

    #[test]
    fn odd_roots_keep_sign_outside() {
        let r = root_of_poly(&Poly::constant(BigRational::from_integer((-8).into())), 3);
        assert_eq!(r, Poly::constant(BigRational::from_integer((-2).into())));
    }
}
