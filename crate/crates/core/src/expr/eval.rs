use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::atom::Atom;
use super::poly::Poly;
use super::Expr;
use crate::error::{Error, Result};

/// Numeric value: exact while only rational operations were needed.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Approx(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Value::Approx(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    fn add(self, o: Value) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            (a, b) => Value::Approx(a.to_f64() + b.to_f64()),
        }
    }

    fn mul(self, o: &Value) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
            (a, b) => Value::Approx(a.to_f64() * b.to_f64()),
        }
    }

    fn powi(&self, e: u32) -> Value {
        match self {
            Value::Exact(a) => Value::Exact(num_traits::pow(a.clone(), e as usize)),
            Value::Approx(x) => Value::Approx(x.powi(e as i32)),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Value::Exact(a) => a.is_zero(),
            Value::Approx(x) => *x == 0.0,
        }
    }

    fn div(self, o: &Value) -> Result<Value> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a / b),
            (a, b) => Value::Approx(a.to_f64() / b.to_f64()),
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(q) => write!(f, "{q}"),
            Value::Approx(x) => write!(f, "{x}"),
        }
    }
}

type Callback = Arc<dyn Fn(&[u16], &[f64]) -> f64 + Send + Sync>;

/// Numeric implementations of abstract function symbols. A callback
/// receives the sorted derivative positions and the argument values.
#[derive(Clone, Default)]
pub struct FunctionTable {
    funcs: BTreeMap<String, Callback>,
}

impl FunctionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, f: impl Fn(&[u16], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.funcs.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn get(&self, name: &str) -> Option<&Callback> {
        self.funcs.get(name)
    }
}

fn exact_root(v: &BigRational, q: u32) -> Option<BigRational> {
    let root = |n: &BigInt| -> Option<BigInt> {
        let r = n.nth_root(q);
        (num_traits::pow(r.clone(), q as usize) == *n).then_some(r)
    };
    Some(BigRational::new(root(v.numer())?, root(v.denom())?))
}

fn real_root(x: f64, q: u32) -> Result<f64> {
    if x < 0.0 {
        if q.is_multiple_of(2) {
            return Err(Error::NegativeRadicand);
        }
        return Ok(-(-x).powf(1.0 / q as f64));
    }
    Ok(if q == 2 { x.sqrt() } else { x.powf(1.0 / q as f64) })
}

struct Evaluator<'a> {
    leaf: &'a dyn Fn(&Atom) -> Option<Value>,
    funcs: &'a FunctionTable,
    cache: BTreeMap<Atom, Value>,
}

impl Evaluator<'_> {
    fn atom(&mut self, a: &Atom) -> Result<Value> {
        if let Some(v) = self.cache.get(a) {
            return Ok(v.clone());
        }
        let v = match a {
            Atom::Root(r) => {
                let b = self.poly(&r.base)?;
                match &b {
                    Value::Exact(q) if q.is_negative() && r.index % 2 == 0 => return Err(Error::NegativeRadicand),
                    Value::Exact(q) => {
                        let neg = q.is_negative();
                        match exact_root(&q.abs(), r.index) {
                            Some(s) => Value::Exact(if neg { -s } else { s }),
                            None => Value::Approx(real_root(b.to_f64(), r.index)?),
                        }
                    }
                    Value::Approx(x) => Value::Approx(real_root(*x, r.index)?),
                }
            }
            Atom::Func(f) => {
                let args = f
                    .args
                    .iter()
                    .map(|x| self.expr(x).map(|v| v.to_f64()))
                    .collect::<Result<Vec<_>>>()?;
                match (self.leaf)(a) {
                    Some(v) => v,
                    None => {
                        let cb = self.funcs.get(&f.name).ok_or_else(|| Error::UnboundAtom(f.name.clone()))?;
                        Value::Approx(cb(&f.derivative, &args))
                    }
                }
            }
            _ => (self.leaf)(a).ok_or_else(|| Error::UnboundAtom(format!("{a:?}")))?,
        };
        self.cache.insert(a.clone(), v.clone());
        Ok(v)
    }

    fn poly(&mut self, p: &Poly) -> Result<Value> {
        let mut acc = Value::Exact(BigRational::zero());
        for (m, c) in p.terms() {
            let mut t = Value::Exact(c.clone());
            for (a, e) in m.factors() {
                t = t.mul(&self.atom(a)?.powi(e));
            }
            acc = acc.add(t);
        }
        Ok(acc)
    }

    fn expr(&mut self, e: &Expr) -> Result<Value> {
        let mut v = self.poly(e.numerator())?;
        for (f, k) in e.denominator_factors() {
            v = v.div(&self.poly(f)?.powi(k))?;
        }
        Ok(v)
    }
}

impl Expr {
    /// Evaluates at a rational point. The result stays exact unless an
    /// irrational radical or a function callback is met.
    pub fn evaluate(&self, point: &BTreeMap<Atom, BigRational>, funcs: &FunctionTable) -> Result<Value> {
        self.evaluate_with(&|a| point.get(a).cloned().map(Value::Exact), funcs)
    }

    /// Evaluates with values supplied by `leaf`; `leaf` may also override
    /// whole function applications.
    pub fn evaluate_with(&self, leaf: &dyn Fn(&Atom) -> Option<Value>, funcs: &FunctionTable) -> Result<Value> {
        Evaluator {
            leaf,
            funcs,
            cache: BTreeMap::new(),
        }
        .expr(self)
    }

    /// Floating-point evaluation.
    pub fn eval_f64(&self, leaf: &dyn Fn(&Atom) -> Option<f64>, funcs: &FunctionTable) -> Result<f64> {
        let wrapped = |a: &Atom| leaf(a).map(Value::Approx);
        Ok(self.evaluate_with(&wrapped, funcs)?.to_f64())
    }
}
