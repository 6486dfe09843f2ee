//! Geometric objects on jets of submanifolds of a (pseudo-)Riemannian
//! manifold `(E, g)`: the universal first fundamental form, the normal
//! frame, the totally geodesic and minimal submanifold equations, and the
//! area Lagrangian with its fiber Hessian.
//!
//! Coordinates on `E` are ordered `(x^1, …, x^n, u^1, …, u^m)`; index `a < n`
//! is a base coordinate and `a = n + i` is the fiber coordinate `u^i`.
//!
//! The minimal submanifold equation is produced as `ḡ^{λξ} T^k_{λξ}`, the
//! contraction of the totally geodesic tensor, without the `1/n` factor of
//! the mean curvature normal.

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr};
use crate::linalg::{self, Matrix};
use crate::multi_index::MultiIndex;
use crate::variational::{euler_lagrange, Lagrangian, SourceForm};

/// Symmetric metric on `E` with entries depending on `(x, u)`.
#[derive(Clone, Debug)]
pub struct MetricSpec {
    pub n: usize,
    pub m: usize,
    g: Matrix,
}

impl MetricSpec {
    pub fn new(n: usize, m: usize, g: Matrix) -> Result<Self> {
        let d = n + m;
        if g.len() != d || g.iter().any(|row| row.len() != d) {
            return Err(Error::Shape(format!("metric must be {d}×{d}")));
        }
        if !linalg::is_symmetric(&g) {
            return Err(Error::Invalid("metric is not symmetric".into()));
        }
        for e in g.iter().flatten() {
            if e.jet_order() > 0 {
                return Err(Error::Invalid("metric entries must not depend on derivatives".into()));
            }
        }
        if linalg::det(&g)?.is_identically_zero() {
            return Err(Error::Singular("metric determinant vanishes".into()));
        }
        Ok(MetricSpec { n, m, g })
    }

    /// Euclidean metric on `ℝ^{n+m}`.
    pub fn euclidean(n: usize, m: usize) -> Self {
        MetricSpec {
            n,
            m,
            g: linalg::identity(n + m),
        }
    }

    pub fn diagonal(n: usize, m: usize, diag: Vec<Expr>) -> Result<Self> {
        let d = diag.len();
        let mut g = linalg::zeros(d, d);
        for (a, e) in diag.into_iter().enumerate() {
            g[a][a] = e;
        }
        Self::new(n, m, g)
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn matrix(&self) -> &Matrix {
        &self.g
    }

    pub fn entry(&self, a: usize, b: usize) -> &Expr {
        &self.g[a][b]
    }

    /// Coordinate atom of index `a` on `E`.
    pub fn coordinate(&self, a: usize) -> Atom {
        if a < self.n {
            Atom::base(a)
        } else {
            Atom::fiber(a - self.n, MultiIndex::empty())
        }
    }

    /// The same metric with coordinates reordered by `perm` (new index `a`
    /// is old index `perm[a]`), optionally with a different split `n`.
    pub fn permuted(&self, perm: &[usize], n: usize) -> Result<Self> {
        let d = self.dim();
        let mut seen = vec![false; d];
        if perm.len() != d || perm.iter().any(|&p| p >= d || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Invalid("not a permutation of the coordinates".into()));
        }
        if n == 0 || n >= d {
            return Err(Error::Invalid("the split must leave base and fiber coordinates".into()));
        }
        let target = |a: usize| -> Expr {
            if a < n {
                Expr::base(a)
            } else {
                Expr::fiber(a - n, MultiIndex::empty())
            }
        };
        let mut inv = vec![0; d];
        for (a, &p) in perm.iter().enumerate() {
            inv[p] = a;
        }
        let rename = |e: &Expr| -> Result<Expr> {
            e.map_leaves(&mut |atom| {
                let old = match atom {
                    Atom::Base(l) => *l as usize,
                    Atom::Fiber(i, s) if s.is_empty() => self.n + *i as usize,
                    _ => return None,
                };
                Some(target(inv[old]))
            })
        };
        let mut g = linalg::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                g[a][b] = rename(&self.g[perm[a]][perm[b]])?;
            }
        }
        Self::new(n, d - n, g)
    }

    /// Value `g(V, W)` on coordinate components.
    pub fn pair(&self, v: &[Expr], w: &[Expr]) -> Expr {
        let mut acc = Expr::zero();
        for a in 0..self.dim() {
            if v[a].is_zero() {
                continue;
            }
            for b in 0..self.dim() {
                if !w[b].is_zero() {
                    acc = acc + &v[a] * &self.g[a][b] * &w[b];
                }
            }
        }
        acc
    }
}

/// `Γ^a_{bc}` stored as `[a][b][c]`.
pub type Christoffel = Vec<Vec<Vec<Expr>>>;

/// `Γ^a_{bc} = ½ g^{ad}(∂_b g_{dc} + ∂_c g_{bd} − ∂_d g_{bc})`.
pub fn christoffel(g: &MetricSpec) -> Result<Christoffel> {
    let d = g.dim();
    let inv = linalg::inverse(&g.g)?;
    let coords: Vec<Atom> = (0..d).map(|a| g.coordinate(a)).collect();
    // dg[c][a][b] = ∂_c g_{ab}
    let dg: Vec<Matrix> = coords
        .iter()
        .map(|x| g.g.iter().map(|row| row.iter().map(|e| e.partial(x)).collect()).collect())
        .collect();
    let half = Expr::frac(1, 2);
    let mut out = vec![vec![vec![Expr::zero(); d]; d]; d];
    for b in 0..d {
        for c in b..d {
            let lowered: Vec<Expr> = (0..d).map(|e| &dg[b][e][c] + &dg[c][b][e] - &dg[e][b][c]).collect();
            for a in 0..d {
                let v = Expr::sum((0..d).filter(|&e| !inv[a][e].is_zero()).map(|e| &inv[a][e] * &lowered[e])) * &half;
                out[a][b][c] = v.clone();
                out[a][c][b] = v;
            }
        }
    }
    Ok(out)
}

fn u1(i: usize, lambda: usize) -> Expr {
    Expr::fiber(i, MultiIndex::single(lambda))
}

/// Tangent vector `D_λ = ∂_λ + u^j_λ ∂_{u^j}` on coordinate components.
fn horizontal_vector(g: &MetricSpec, lambda: usize) -> Vec<Expr> {
    let mut v = vec![Expr::zero(); g.dim()];
    v[lambda] = Expr::one();
    for j in 0..g.m {
        v[g.n + j] = u1(j, lambda);
    }
    v
}

/// `g^H_{λμ} = g_{λμ} + g_{λj}u^j_μ + g_{iμ}u^i_λ + g_{ij}u^i_λ u^j_μ`.
pub fn first_fundamental_form(g: &MetricSpec) -> Matrix {
    let n = g.n;
    let d: Vec<Vec<Expr>> = (0..n).map(|l| horizontal_vector(g, l)).collect();
    let mut out = linalg::zeros(n, n);
    for l in 0..n {
        for mu in l..n {
            let v = g.pair(&d[l], &d[mu]);
            out[l][mu] = v.clone();
            out[mu][l] = v;
        }
    }
    out
}

pub fn inverse_first_fundamental_form(gh: &Matrix) -> Result<Matrix> {
    linalg::inverse(gh)
}

/// `N_i = ∂/∂u^i − c_i^λ D_λ` with `c_i^λ = (g_{μi} + g_{ij}u^j_μ) ḡ^{μλ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalVector {
    pub index: usize,
    /// Coefficient of `D_λ` (with the sign of the frame, i.e. `−c_i^λ`).
    pub horizontal: Vec<Expr>,
}

impl NormalVector {
    /// Components on `(∂_x, ∂_u)`.
    pub fn components(&self, g: &MetricSpec) -> Vec<Expr> {
        let mut v = vec![Expr::zero(); g.dim()];
        v[g.n + self.index] = Expr::one();
        for (l, c) in self.horizontal.iter().enumerate() {
            let d = horizontal_vector(g, l);
            for a in 0..g.dim() {
                v[a] = &v[a] + c * &d[a];
            }
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct Submanifolds {
    pub metric: MetricSpec,
    pub g_h: Matrix,
    pub g_h_inv: Matrix,
    pub christoffel: Christoffel,
}

impl Submanifolds {
    pub fn new(metric: &MetricSpec) -> Result<Self> {
        let g_h = first_fundamental_form(metric);
        let g_h_inv = inverse_first_fundamental_form(&g_h)?;
        let christoffel = christoffel(metric)?;
        Ok(Submanifolds {
            metric: metric.clone(),
            g_h,
            g_h_inv,
            christoffel,
        })
    }

    fn mixed(&self, i: usize, mu: usize) -> Expr {
        let g = &self.metric;
        let mut acc = g.entry(mu, g.n + i).clone();
        for j in 0..g.m {
            acc = acc + g.entry(g.n + i, g.n + j) * u1(j, mu);
        }
        acc
    }

    /// Normal frame, checked against `g(N_i, D_λ) = 0`.
    pub fn normal_frame(&self) -> Result<Vec<NormalVector>> {
        let g = &self.metric;
        let frame: Vec<NormalVector> = (0..g.m)
            .map(|i| {
                let horizontal = (0..g.n)
                    .map(|l| -Expr::sum((0..g.n).map(|mu| self.mixed(i, mu) * &self.g_h_inv[mu][l])))
                    .collect();
                NormalVector { index: i, horizontal }
            })
            .collect();
        for nv in &frame {
            let c = nv.components(g);
            for l in 0..g.n {
                if !g.pair(&c, &horizontal_vector(g, l)).is_identically_zero() {
                    return Err(Error::Verification(format!("N_{} is not normal to D_{}", nv.index + 1, l + 1)));
                }
            }
        }
        Ok(frame)
    }

    /// `g^V_{ij} = g_{ij} − (g_{λi} + g_{ik}u^k_λ)(g_{μj} + g_{jk}u^k_μ) ḡ^{λμ}`,
    /// checked against `g(N_i, N_j)`.
    pub fn vertical_metric(&self) -> Result<Matrix> {
        let g = &self.metric;
        let (n, m) = (g.n, g.m);
        let mut out = linalg::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let mut v = g.entry(n + i, n + j).clone();
                for l in 0..n {
                    for mu in 0..n {
                        v = v - self.mixed(i, l) * self.mixed(j, mu) * &self.g_h_inv[l][mu];
                    }
                }
                out[i][j] = v.clone();
                out[j][i] = v;
            }
        }
        let frame = self.normal_frame()?;
        for i in 0..m {
            for j in 0..m {
                let direct = g.pair(&frame[i].components(g), &frame[j].components(g));
                if !direct.equivalent(&out[i][j]) {
                    return Err(Error::Verification(format!("g^V_{}{} differs from g(N_i, N_j)", i + 1, j + 1)));
                }
            }
        }
        Ok(out)
    }

    /// `Γ_λ{}^a{}_ξ + Γ_λ{}^a{}_i u^i_ξ + Γ_j{}^a{}_ξ u^j_λ + Γ_j{}^a{}_i u^j_λ u^i_ξ`.
    fn connection_term(&self, a: usize, lambda: usize, xi: usize) -> Expr {
        let g = &self.metric;
        let n = g.n;
        let gam = &self.christoffel[a];
        let mut acc = gam[lambda][xi].clone();
        for i in 0..g.m {
            acc = acc + &gam[lambda][n + i] * u1(i, xi) + &gam[n + i][xi] * u1(i, lambda);
            for j in 0..g.m {
                acc = acc + &gam[n + j][n + i] * u1(j, lambda) * u1(i, xi);
            }
        }
        acc
    }

    /// Totally geodesic tensor `T^k_{λξ}`, stored as `[k][λ][ξ]`.
    pub fn totally_geodesic_tensor(&self) -> Vec<Matrix> {
        let g = &self.metric;
        let n = g.n;
        let mut out = vec![linalg::zeros(n, n); g.m];
        for (k, t) in out.iter_mut().enumerate() {
            for l in 0..n {
                for xi in l..n {
                    let mut v = Expr::fiber(k, MultiIndex::new([l, xi])) + self.connection_term(n + k, l, xi);
                    for beta in 0..n {
                        v = v - u1(k, beta) * self.connection_term(beta, l, xi);
                    }
                    t[l][xi] = v.clone();
                    t[xi][l] = v;
                }
            }
        }
        out
    }

    /// `ḡ^{λξ} T^k_{λξ} = 0`.
    pub fn mean_curvature_equation(&self) -> SourceForm {
        let t = self.totally_geodesic_tensor();
        let n = self.metric.n;
        let comps = t
            .iter()
            .map(|tk| {
                let mut acc = Expr::zero();
                for l in 0..n {
                    for xi in 0..n {
                        acc = acc + &self.g_h_inv[l][xi] * &tk[l][xi];
                    }
                }
                acc
            })
            .collect();
        SourceForm::new(n, comps)
    }

    /// `√|g^H|`, the area density.
    pub fn area_density(&self) -> Expr {
        linalg::det(&self.g_h).expect("square matrix").sqrt()
    }

    pub fn area_lagrangian(&self) -> Lagrangian {
        Lagrangian {
            n: self.metric.n,
            m: self.metric.m,
            density: self.area_density(),
        }
    }

    /// Defining Hessian `∂²√|g^H| / ∂u^i_λ ∂u^j_μ` and the closed form
    /// `ḡ^{λμ} g^V_{ij} √|g^H|`, both indexed `[i][j][λ][μ]`.
    pub fn hessian_area(&self) -> Result<HessianReport> {
        let g = &self.metric;
        let (n, m) = (g.n, g.m);
        let a = self.area_density();
        let gv = self.vertical_metric()?;
        let mut defining = vec![vec![vec![vec![Expr::zero(); n]; n]; m]; m];
        let mut closed = defining.clone();
        let first: Vec<Vec<Expr>> = (0..m)
            .map(|i| (0..n).map(|l| a.partial(&Atom::fiber(i, MultiIndex::single(l)))).collect())
            .collect();
        for i in 0..m {
            for j in 0..m {
                for l in 0..n {
                    for mu in 0..n {
                        defining[i][j][l][mu] = first[i][l].partial(&Atom::fiber(j, MultiIndex::single(mu)));
                        closed[i][j][l][mu] = &self.g_h_inv[l][mu] * &gv[i][j] * &a;
                    }
                }
            }
        }
        let holds = defining
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .zip(closed.iter().flatten().flatten().flatten())
            .all(|(x, y)| x.equivalent(y));
        Ok(HessianReport { defining, closed, holds })
    }

    /// Compares `E(A)_i` with `−Hess^{λμ}_{ij} T^j_{λμ}`.
    pub fn euler_lagrange_theorem(&self) -> Result<TheoremCheck> {
        let hess = self.hessian_area()?;
        let t = self.totally_geodesic_tensor();
        let e = euler_lagrange(&self.area_lagrangian());
        let (n, m) = (self.metric.n, self.metric.m);
        let contraction: Vec<Expr> = (0..m)
            .map(|i| {
                let mut acc = Expr::zero();
                for j in 0..m {
                    for l in 0..n {
                        for mu in 0..n {
                            acc = acc - &hess.closed[i][j][l][mu] * &t[j][l][mu];
                        }
                    }
                }
                acc
            })
            .collect();
        let holds = e.components.iter().zip(&contraction).all(|(a, b)| a.equivalent(b));
        Ok(TheoremCheck {
            euler_lagrange: e,
            contraction,
            holds,
        })
    }
}

#[derive(Clone, Debug)]
pub struct HessianReport {
    pub defining: Vec<Vec<Vec<Vec<Expr>>>>,
    pub closed: Vec<Vec<Vec<Vec<Expr>>>>,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct TheoremCheck {
    pub euler_lagrange: SourceForm,
    pub contraction: Vec<Expr>,
    pub holds: bool,
}

/// The factor `a / b` when it does not vanish and is free of the
/// highest-order jet coordinates of `b`, so that `a = 0` and `b = 0`
/// define the same equation where the factor is regular.
pub fn proportionality_factor(a: &Expr, b: &Expr) -> Option<Expr> {
    if b.is_identically_zero() {
        return None;
    }
    let q = a.checked_div(b).ok()?;
    let top = b.jet_order();
    let free = q.leaves().iter().all(|x| top == 0 || x.jet_order() < top);
    (free && !q.is_identically_zero()).then_some(q)
}
