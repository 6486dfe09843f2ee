use std::cmp::Ordering;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::poly::Poly;
use super::Expr;
use crate::multi_index::MultiIndex;

/// An indivisible variable of the canonical polynomial form.
///
/// Jet coordinates, parameters and constants are genuine indeterminates.
/// Function applications and radicals are opaque: they take part in the
/// polynomial arithmetic as variables, but carry enough structure to be
/// differentiated, substituted into and evaluated.
#[derive(Clone, Debug)]
pub enum Atom {
    /// Base coordinate `x^λ` (0-based).
    Base(u16),
    /// Fiber coordinate `u^i_σ` (0-based component).
    Fiber(u16, MultiIndex),
    Symbol(Arc<SymbolAtom>),
    Func(Arc<FuncApp>),
    Root(Arc<RootAtom>),
}

impl Atom {
    fn rank(&self) -> u8 {
        match self {
            Atom::Base(_) => 0,
            Atom::Fiber(..) => 1,
            Atom::Symbol(_) => 2,
            Atom::Func(_) => 3,
            Atom::Root(_) => 4,
        }
    }

    pub fn base(lambda: usize) -> Atom {
        Atom::Base(lambda as u16)
    }

    pub fn fiber(i: usize, sigma: MultiIndex) -> Atom {
        Atom::Fiber(i as u16, sigma)
    }

    pub fn parameter(name: &str) -> Atom {
        Atom::Symbol(Arc::new(SymbolAtom {
            name: name.to_string(),
            kind: SymbolKind::Parameter,
        }))
    }

    pub fn constant(name: &str, dimension: Option<&str>) -> Atom {
        Atom::Symbol(Arc::new(SymbolAtom {
            name: name.to_string(),
            kind: SymbolKind::Constant {
                dimension: dimension.map(str::to_string),
            },
        }))
    }

    /// True for coordinates of the jet space (as opposed to symbols and opaque atoms).
    pub fn is_coordinate(&self) -> bool {
        matches!(self, Atom::Base(_) | Atom::Fiber(..))
    }

    /// Jet order of a coordinate atom; 0 for anything else.
    pub fn jet_order(&self) -> usize {
        match self {
            Atom::Fiber(_, s) => s.order(),
            _ => 0,
        }
    }

    pub fn as_root(&self) -> Option<&RootAtom> {
        match self {
            Atom::Root(r) => Some(r),
            _ => None,
        }
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Atom {}

impl Hash for Atom {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Atom::Base(l) => l.hash(state),
            Atom::Fiber(i, s) => {
                i.hash(state);
                s.hash(state);
            }
            Atom::Symbol(a) => a.hash(state),
            Atom::Func(a) => a.hash(state),
            Atom::Root(a) => a.hash(state),
        }
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Atom::Base(a), Atom::Base(b)) => a.cmp(b),
            (Atom::Fiber(i, s), Atom::Fiber(j, t)) => i.cmp(j).then_with(|| s.cmp(t)),
            (Atom::Symbol(a), Atom::Symbol(b)) => {
                if Arc::ptr_eq(a, b) {
                    Ordering::Equal
                } else {
                    a.cmp(b)
                }
            }
            (Atom::Func(a), Atom::Func(b)) => {
                if Arc::ptr_eq(a, b) {
                    Ordering::Equal
                } else {
                    a.cmp(b)
                }
            }
            (Atom::Root(a), Atom::Root(b)) => {
                if Arc::ptr_eq(a, b) {
                    Ordering::Equal
                } else {
                    a.cmp(b)
                }
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SymbolAtom {
    pub name: String,
    pub kind: SymbolKind,
}

#[derive(Clone, Debug)]
pub enum SymbolKind {
    Parameter,
    /// Named physical constant; the dimension tag is metadata and never
    /// takes part in comparisons.
    Constant {
        dimension: Option<String>,
    },
}

impl SymbolAtom {
    fn key(&self) -> (bool, &str) {
        (matches!(self.kind, SymbolKind::Constant { .. }), &self.name)
    }

    pub fn dimension(&self) -> Option<&str> {
        match &self.kind {
            SymbolKind::Constant { dimension } => dimension.as_deref(),
            SymbolKind::Parameter => None,
        }
    }
}

impl PartialEq for SymbolAtom {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for SymbolAtom {}
impl PartialOrd for SymbolAtom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SymbolAtom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}
impl Hash for SymbolAtom {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

/// Application of an abstract function symbol, possibly formally
/// differentiated. `derivative` lists argument positions (0-based) and is
/// kept sorted, so formal mixed partials commute.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FuncApp {
    pub name: String,
    pub derivative: Vec<u16>,
    pub args: Vec<Expr>,
}

impl FuncApp {
    pub fn differentiated(&self, position: usize) -> FuncApp {
        let mut d = self.derivative.clone();
        let p = position as u16;
        let at = d.partition_point(|&x| x <= p);
        d.insert(at, p);
        FuncApp {
            name: self.name.clone(),
            derivative: d,
            args: self.args.clone(),
        }
    }
}

/// `base^(1/index)` with a canonical polynomial radicand.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RootAtom {
    pub base: Poly,
    pub index: u32,
}
