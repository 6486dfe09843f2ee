//! Sparse multivariate polynomials over ℚ in [`Atom`]s.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::atom::Atom;
use super::root;

/// Power product of atoms, sorted by atom with positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(SmallVec<[(Atom, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn of(atom: Atom, exp: u32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        let mut v = SmallVec::new();
        v.push((atom, exp));
        Monomial(v)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Atom, u32)> {
        self.0.iter().map(|(a, e)| (a, *e))
    }

    pub fn exponent(&self, atom: &Atom) -> u32 {
        self.0.binary_search_by(|(a, _)| a.cmp(atom)).map(|i| self.0[i].1).unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().cloned());
        Monomial(out)
    }

    /// `self / d` when `d` divides `self`.
    pub fn div(&self, d: &Monomial) -> Option<Monomial> {
        let mut out = SmallVec::with_capacity(self.0.len());
        let mut j = 0;
        for (a, e) in &self.0 {
            if j < d.0.len() && d.0[j].0 == *a {
                let f = d.0[j].1;
                if f > *e {
                    return None;
                }
                if f < *e {
                    out.push((a.clone(), e - f));
                }
                j += 1;
            } else if j < d.0.len() && d.0[j].0 < *a {
                return None;
            } else {
                out.push((a.clone(), *e));
            }
        }
        if j < d.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        other.div(self).is_some()
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = SmallVec::new();
        for (a, e) in &self.0 {
            let f = other.exponent(a);
            if f > 0 {
                out.push((a.clone(), (*e).min(f)));
            }
        }
        Monomial(out)
    }

    pub fn without(&self, atom: &Atom) -> Monomial {
        Monomial(self.0.iter().filter(|(a, _)| a != atom).cloned().collect())
    }

    /// Splits into the factors whose atom satisfies `pred` and the rest.
    pub fn partition(&self, pred: impl Fn(&Atom) -> bool) -> (Monomial, Monomial) {
        let mut yes = SmallVec::new();
        let mut no = SmallVec::new();
        for f in &self.0 {
            if pred(&f.0) {
                yes.push(f.clone());
            } else {
                no.push(f.clone());
            }
        }
        (Monomial(yes), Monomial(no))
    }

    fn needs_root_reduction(&self) -> bool {
        self.0.iter().any(|(a, e)| match a {
            Atom::Root(r) => *e >= r.index || e.gcd(&r.index) > 1,
            _ => false,
        })
    }
}

/// Lexicographic term order: the smaller atom is the more significant variable.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        for k in 0..a.len().min(b.len()) {
            match a[k].0.cmp(&b[k].0) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match a[k].1.cmp(&b[k].1) {
                    Ordering::Equal => {}
                    o => return o,
                },
            }
        }
        a.len().cmp(&b.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial with rational coefficients; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn atom(a: Atom) -> Self {
        Self::term(BigRational::one(), Monomial::of(a, 1))
    }

    pub fn term(c: BigRational, m: Monomial) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        if p.terms.keys().any(Monomial::needs_root_reduction) {
            p = p.reduce_roots();
        }
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        if p.terms.keys().any(Monomial::needs_root_reduction) {
            p = p.reduce_roots();
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value of a constant polynomial.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// Terms in increasing term order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn trailing(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next()
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= other.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), -c);
        }
        r
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Multiplication in the free polynomial ring (radical relations not applied).
    fn raw_mul(&self, other: &Poly) -> Poly {
        let mut r = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                r.add_term(m1.mul(m2), c1 * c2);
            }
        }
        r
    }

    fn mul_term(&self, m: &Monomial, c: &BigRational) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m1, c1)| (m1.mul(m), c1 * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let r = self.raw_mul(other);
        if self.has_roots() && other.has_roots() && r.terms.keys().any(Monomial::needs_root_reduction) {
            r.reduce_roots()
        } else {
            r
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn has_roots(&self) -> bool {
        self.terms.keys().any(|m| m.factors().any(|(a, _)| matches!(a, Atom::Root(_))))
    }

    /// Applies `r^index = base` and lowers the index of radicals whose
    /// exponent shares a factor with it.
    fn reduce_roots(self) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in self.terms {
            if !m.needs_root_reduction() {
                out.add_term(m, c);
                continue;
            }
            let mut factor = Poly::constant(c);
            let mut plain = Monomial::one();
            for (a, e) in m.factors() {
                match a {
                    Atom::Root(r) if e >= r.index || e.gcd(&r.index) > 1 => {
                        let whole = e / r.index;
                        let rest = e % r.index;
                        if whole > 0 {
                            factor = factor.mul(&r.base.pow(whole));
                        }
                        if rest > 0 {
                            let g = rest.gcd(&r.index);
                            let p = if g > 1 {
                                root::root_of_poly(&r.base, r.index / g).pow(rest / g)
                            } else {
                                Poly::term(BigRational::one(), Monomial::of(a.clone(), rest))
                            };
                            factor = factor.mul(&p);
                        }
                    }
                    _ => plain = plain.mul(&Monomial::of(a.clone(), e)),
                }
            }
            for (m2, c2) in factor.mul_term(&plain, &BigRational::one()).terms {
                out.add_term(m2, c2);
            }
        }
        if out.terms.keys().any(Monomial::needs_root_reduction) {
            out.reduce_roots()
        } else {
            out
        }
    }

    /// Exact quotient `self / d`, if `d` divides `self` in the free polynomial ring.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (dl_m, dl_c) = d.leading().unwrap();
        let (dt_m, _) = d.trailing().unwrap();
        if !dl_m.divides(self.leading().unwrap().0) || !dt_m.divides(self.trailing().unwrap().0) {
            return None;
        }
        if d.len() > self.len() && d.len() > 1 && self.len() == 1 {
            return None;
        }
        let dl_inv = dl_c.recip();
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.div(dl_m)?;
            let qc = rc * &dl_inv;
            let sub = d.mul_term(&qm, &qc);
            quot.add_term(qm, qc);
            rem = rem.sub(&sub);
        }
        Some(quot)
    }

    /// Positive rational content: gcd of numerators over lcm of denominators.
    pub fn content(&self) -> BigRational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return BigRational::one();
        }
        BigRational::new(num, den)
    }

    /// `(c, p)` with `self = c · p`, `p` integral primitive with positive leading coefficient.
    pub fn primitive(&self) -> (BigRational, Poly) {
        if self.is_zero() {
            return (BigRational::zero(), Poly::zero());
        }
        let mut c = self.content();
        if self.leading().unwrap().1.is_negative() {
            c = -c;
        }
        (c.clone(), self.scale(&c.recip()))
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for m in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.div(m).expect("monomial does not divide"), c.clone()))
                .collect(),
        }
    }

    /// Formal partial derivative treating `atom` as an independent variable.
    pub fn formal_derivative(&self, atom: &Atom) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(atom);
            if e == 0 {
                continue;
            }
            let rest = m.without(atom).mul(&Monomial::of(atom.clone(), e - 1));
            r.add_term(rest, c * BigRational::from_integer(BigInt::from(e)));
        }
        r
    }

    /// Atoms appearing at the top level.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            for (a, _) in m.factors() {
                s.insert(a.clone());
            }
        }
        s
    }

    pub fn degree_in(&self, atom: &Atom) -> u32 {
        self.terms.keys().map(|m| m.exponent(atom)).max().unwrap_or(0)
    }

    /// Collects coefficients with respect to the atoms selected by `pred`.
    pub fn collect_by(&self, pred: impl Fn(&Atom) -> bool + Copy) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (sel, rest) = m.partition(pred);
            out.entry(sel).or_default().add_term(rest, c.clone());
        }
        out
    }
}
