use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::atom::Atom;
use super::eval::{FunctionTable, Value};
use super::poly::Poly;
use super::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroCertainty {
    /// Decided on the canonical form.
    Exact,
    /// Decided by numeric sampling.
    Probabilistic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZeroTest {
    pub is_zero: bool,
    pub certainty: ZeroCertainty,
}

#[derive(Clone, Copy, Debug)]
pub struct ZeroTestConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

const INITIAL_SEED: u64 = 0x6a65_7476;

static DEFAULT_SEED: AtomicU64 = AtomicU64::new(INITIAL_SEED);

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig {
            samples: 8,
            seed: DEFAULT_SEED.load(Ordering::Relaxed),
            tolerance: 1e-9,
        }
    }
}

impl ZeroTestConfig {
    /// Sets the sampling seed used by [`ZeroTestConfig::default`] and hence by
    /// [`Expr::is_identically_zero`] for the rest of the process.
    pub fn set_default_seed(seed: u64) {
        DEFAULT_SEED.store(seed, Ordering::Relaxed);
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let den: i64 = rng.gen_range(2..=64);
    let num: i64 = rng.gen_range(-(den / 2)..=den / 2);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `(value, Σ|term|)` of a polynomial at a point.
fn sample_poly(p: &Poly, leaf: &dyn Fn(&Atom) -> Option<Value>) -> Option<(f64, f64)> {
    let funcs = FunctionTable::new();
    let (mut value, mut scale) = (0.0, 0.0);
    for (m, c) in p.terms() {
        let t = Expr::from_poly(Poly::term(c.clone(), m.clone()));
        let v = t.evaluate_with(leaf, &funcs).ok()?.to_f64();
        if !v.is_finite() {
            return None;
        }
        value += v;
        scale += v.abs();
    }
    Some((value, scale))
}

impl Expr {
    /// Zero test with a flagged numeric fallback for expressions involving
    /// radicals, whose algebraic relations the canonical form does not see.
    pub fn zero_test(&self, config: &ZeroTestConfig) -> ZeroTest {
        let num = self.numerator();
        if num.is_zero() {
            return ZeroTest {
                is_zero: true,
                certainty: ZeroCertainty::Exact,
            };
        }
        let opaque = self.opaque_atoms();
        if !opaque.iter().any(|a| matches!(a, Atom::Root(_))) {
            return ZeroTest {
                is_zero: false,
                certainty: ZeroCertainty::Exact,
            };
        }
        let leaves = self.leaves();
        let funcs: Vec<Atom> = opaque.into_iter().filter(|a| matches!(a, Atom::Func(_))).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut accepted = 0;
        let mut attempts = 0;
        while accepted < config.samples && attempts < 20 * config.samples.max(1) {
            attempts += 1;
            let mut point: BTreeMap<Atom, Value> = BTreeMap::new();
            for a in leaves.iter().chain(funcs.iter()) {
                point.insert(a.clone(), Value::Exact(random_rational(&mut rng)));
            }
            let leaf = |a: &Atom| point.get(a).cloned();
            // the denominator must be defined and nonzero at the sample
            let den_ok = self
                .denominator_factors()
                .all(|(f, _)| sample_poly(f, &leaf).is_some_and(|(v, s)| v.abs() > config.tolerance * s.max(1.0)));
            if !den_ok {
                continue;
            }
            let Some((v, s)) = sample_poly(num, &leaf) else {
                continue;
            };
            accepted += 1;
            if v.abs() > config.tolerance * s.max(1e-300) {
                return ZeroTest {
                    is_zero: false,
                    certainty: ZeroCertainty::Probabilistic,
                };
            }
        }
        ZeroTest {
            is_zero: accepted > 0,
            certainty: ZeroCertainty::Probabilistic,
        }
    }

    /// [`Expr::zero_test`] with the default configuration.
    pub fn is_identically_zero(&self) -> bool {
        self.zero_test(&ZeroTestConfig::default()).is_zero
    }
}
