//! Seeded generators of random test data shared by the integration suites.
#![allow(dead_code)]

use jetvar::expr::Atom;
use jetvar::forms::{Basis, Covector, Form};
use jetvar::variational::COperator;
use jetvar::{Expr, MultiIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn coeff(&mut self) -> Expr {
        let mut k = self.rng.gen_range(-4i64..=4);
        if k == 0 {
            k = 1;
        }
        if self.rng.gen_bool(0.2) {
            Expr::frac(k, self.rng.gen_range(2..=5))
        } else {
            Expr::int(k)
        }
    }

    /// Jet coordinates `x^λ` and `u^i_σ` with `|σ| ≤ order`.
    pub fn atoms(n: usize, m: usize, order: usize) -> Vec<Atom> {
        let mut out: Vec<Atom> = (0..n).map(Atom::base).collect();
        for i in 0..m {
            for s in MultiIndex::up_to(n, order) {
                out.push(Atom::fiber(i, s));
            }
        }
        out
    }

    fn monomial(&mut self, atoms: &[Atom], max_deg: usize) -> Expr {
        let deg = self.rng.gen_range(0..=max_deg);
        let mut t = Expr::one();
        for _ in 0..deg {
            let a = &atoms[self.rng.gen_range(0..atoms.len())];
            t = t * Expr::atom(a.clone());
        }
        t
    }

    pub fn poly_over(&mut self, atoms: &[Atom], terms: usize, max_deg: usize) -> Expr {
        let mut e = Expr::zero();
        for _ in 0..terms {
            e = e + self.coeff() * self.monomial(atoms, max_deg);
        }
        e
    }

    /// Random polynomial in jet coordinates up to `order`, with at least one
    /// term of that order.
    pub fn poly(&mut self, n: usize, m: usize, order: usize) -> Expr {
        let atoms = Self::atoms(n, m, order);
        let terms = self.rng.gen_range(1..=4);
        let mut e = self.poly_over(&atoms, terms, 3);
        if order > 0 {
            let top: Vec<Atom> = atoms.iter().filter(|a| a.jet_order() == order).cloned().collect();
            e = e + self.coeff() * self.monomial(&atoms, 1) * Expr::atom(top[self.rng.gen_range(0..top.len())].clone());
        }
        e
    }

    /// Polynomial in the base coordinates only.
    pub fn base_poly(&mut self, n: usize, max_deg: usize) -> Expr {
        let atoms: Vec<Atom> = (0..n).map(Atom::base).collect();
        let terms = self.rng.gen_range(1..=4);
        self.poly_over(&atoms, terms, max_deg)
    }

    pub fn covector(&mut self, n: usize, m: usize, order: usize) -> Covector {
        if self.rng.gen_bool(0.4) {
            Covector::dx(self.rng.gen_range(0..n))
        } else {
            let sigmas = MultiIndex::up_to(n, order);
            Covector::du(self.rng.gen_range(0..m), sigmas[self.rng.gen_range(0..sigmas.len())].clone())
        }
    }

    /// Random raw-basis form of degree `q`.
    pub fn form(&mut self, n: usize, m: usize, q: usize, order: usize) -> Form {
        let atoms = Self::atoms(n, m, order);
        let mut f = Form::zero(n, Basis::Raw);
        for _ in 0..self.rng.gen_range(1..=3) {
            let covs = (0..q).map(|_| self.covector(n, m, order)).collect();
            let c = self.poly_over(&atoms, 2, 2);
            f = f.add(&Form::term(n, Basis::Raw, c, covs));
        }
        f
    }

    /// Random form of degree `q` whose horizontalization vanishes: a sum of
    /// terms containing a contact factor or the differential of one.
    pub fn contact_form(&mut self, n: usize, m: usize, q: usize, order: usize) -> Form {
        let atoms = Self::atoms(n, m, order);
        let mut f = Form::zero(n, Basis::Contact);
        for _ in 0..self.rng.gen_range(1..=2) {
            let sigmas = MultiIndex::up_to(n, order.saturating_sub(1));
            let i = self.rng.gen_range(0..m);
            let s = sigmas[self.rng.gen_range(0..sigmas.len())].clone();
            let omega = Form::omega(n, i, s);
            let gen = if q >= 2 && self.rng.gen_bool(0.3) {
                omega.exterior_derivative()
            } else {
                omega
            };
            let rest_deg = q - gen.degrees().into_iter().next().unwrap_or(1).min(q);
            let rest = {
                let covs: Vec<Covector> = (0..rest_deg).map(|_| self.covector(n, m, order)).collect();
                Form::term(n, Basis::Raw, self.poly_over(&atoms, 2, 2), covs)
            };
            f = f.add(&gen.wedge(&rest.to_contact()));
        }
        f.to_raw()
    }

    pub fn coperator(&mut self, n: usize, rows: usize, cols: usize, order: usize) -> COperator {
        let mut op = COperator::zero(n, rows, cols);
        for _ in 0..self.rng.gen_range(1..=4) {
            let sigmas = MultiIndex::up_to(n, order);
            let s = sigmas[self.rng.gen_range(0..sigmas.len())].clone();
            let a = self.poly(n, rows.max(cols), 1);
            op.add_term(self.rng.gen_range(0..rows), self.rng.gen_range(0..cols), s, a);
        }
        op
    }

    pub fn dims(&mut self) -> (usize, usize) {
        (self.rng.gen_range(1..=2), self.rng.gen_range(1..=2))
    }
}
