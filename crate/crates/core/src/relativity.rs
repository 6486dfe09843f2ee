//! A relativistic particle as a variational problem on jets of curves in a
//! four-dimensional spacetime `(E, g)` of signature `(+−−−)`.
//!
//! The jet context has one base coordinate `x^0` (named `t`) and three fiber
//! coordinates `x^i`, so velocities are `x^i_0` and accelerations `x^i_{00}`.
//! Spacetime index `a = 0` is `x^0` and `a = 1, 2, 3` is `x^a`.
//!
//! The connection coefficients `K_φ{}^ν{}_μ` of the gravitational 2-form are
//! taken to be the Christoffel symbols `Γ^ν_{φμ}` of `g`. The field `F` and a
//! potential `A` are related by `F = 2 dA`, that is
//! `F_{μν} = 2(∂_μ A_ν − ∂_ν A_μ)` for the form `Σ_{μ<ν} F_{μν} dx^μ ∧ dx^ν`.

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr};
use crate::forms::{Basis, Covector, Form, VectorField};
use crate::jet::JetContext;
use crate::linalg::{self, Matrix};
use crate::multi_index::MultiIndex;
use crate::riemann::{christoffel, Christoffel, MetricSpec};
use crate::variational::{euler_lagrange, Lagrangian, SourceForm};

/// Physical constants as expressions; by default opaque symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct Constants {
    pub mass: Expr,
    pub c: Expr,
    pub charge: Expr,
    pub hbar: Expr,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            mass: Expr::constant("m", Some("mass")),
            c: Expr::constant("c", Some("velocity")),
            charge: Expr::constant("q", Some("charge")),
            hbar: Expr::constant("hbar", Some("action")),
        }
    }
}

/// Jet context for curves in spacetime, with the constants declared.
pub fn spacetime_context(order: usize) -> JetContext {
    let mut ctx = JetContext::new(1, 3, order)
        .and_then(|c| c.with_base_names(&["t"]))
        .expect("valid context");
    for (name, dim) in [("m", "mass"), ("c", "velocity"), ("q", "charge"), ("hbar", "action")] {
        ctx.declare_constant(name, Some(dim)).expect("fresh constant");
    }
    ctx
}

pub fn minkowski() -> MetricSpec {
    MetricSpec::diagonal(1, 3, vec![Expr::one(), Expr::int(-1), Expr::int(-1), Expr::int(-1)]).expect("nondegenerate")
}

fn coord(a: usize) -> Expr {
    if a == 0 {
        Expr::base(0)
    } else {
        Expr::fiber(a - 1, MultiIndex::empty())
    }
}

fn coord_atom(a: usize) -> Atom {
    if a == 0 {
        Atom::base(0)
    } else {
        Atom::fiber(a - 1, MultiIndex::empty())
    }
}

/// Spacetime differential `dx^a` as a raw covector.
fn dx(a: usize) -> Covector {
    if a == 0 {
        Covector::dx(0)
    } else {
        Covector::du(a - 1, MultiIndex::empty())
    }
}

/// Velocity `x^i_0` for `i = 1, 2, 3`.
pub fn velocity(i: usize) -> Expr {
    Expr::fiber(i - 1, MultiIndex::single(0))
}

pub fn acceleration(i: usize) -> Expr {
    Expr::fiber(i - 1, MultiIndex::new([0, 0]))
}

/// `Σ_{μ<ν} F_{μν} dx^μ ∧ dx^ν` on the jet space.
fn two_form(f: &Matrix) -> Form {
    let mut out = Form::zero(1, Basis::Raw);
    for mu in 0..4 {
        for nu in mu + 1..4 {
            out = out.add(&Form::term(1, Basis::Raw, f[mu][nu].clone(), vec![dx(mu), dx(nu)]));
        }
    }
    out
}

/// `A_ν = ¼ F_{μν} x^μ`, a potential of a constant field with `F = 2 dA`.
pub fn potential_for_constant_field(f: &Matrix) -> Vec<Expr> {
    (0..4)
        .map(|nu| Expr::sum((0..4).map(|mu| &f[mu][nu] * coord(mu))) * Expr::frac(1, 4))
        .collect()
}

#[derive(Clone, Debug)]
pub struct SpacetimeModel {
    pub metric: MetricSpec,
    pub potential: Option<Vec<Expr>>,
    pub field: Option<Matrix>,
    pub constants: Constants,
}

#[derive(Clone, Debug)]
pub struct GravitationalReport {
    /// `dτ^♮`.
    pub d_tau: Form,
    /// The coordinate display with `K = Γ`.
    pub display: Form,
    /// The coordinate display with `K = −Γ`.
    pub display_opposite: Form,
    pub matches: bool,
    pub matches_opposite: bool,
    /// `d(dτ^♮) = 0`.
    pub closed: bool,
}

#[derive(Clone, Debug)]
pub struct MotionReport {
    pub euler_lagrange: SourceForm,
    /// `g_{ij} − c^{−2} τ_i τ_j`.
    pub coefficient_matrix: Matrix,
    /// Accelerations solving `E(λ_GR) = 0`.
    pub solved_accelerations: Vec<Expr>,
    /// `∂_v` components of the kernel field `D_0 + b^i ∂/∂x^i_0` of `Ω`.
    pub kernel_accelerations: Option<Vec<Expr>>,
    pub gamma_natural: Vec<Expr>,
    pub gamma_e: Vec<Expr>,
    /// `(mc/ħ) α (g_{ij} − c^{−2}τ_iτ_j)(x^j_{00} − γ^j♮ − γ^j_e)`.
    pub display: Vec<Expr>,
    /// Common constant `κ` with `E(λ_GR)_i = κ · display_i`, if any.
    pub display_factor: Option<Expr>,
    /// Whether the solved accelerations equal `γ♮ + γ^e`.
    pub accelerations_match: bool,
    /// Common ratio `(a_i − γ^i♮) / γ^i_e` when the accelerations differ and
    /// the electromagnetic part is present.
    pub electromagnetic_ratio: Option<Expr>,
}

/// `κ` with `a_i = κ b_i` for all `i`, if `κ` is free of coordinates.
fn common_constant_factor(a: &[Expr], b: &[Expr]) -> Option<Expr> {
    let mut factor: Option<Expr> = None;
    for (x, y) in a.iter().zip(b) {
        match (x.is_identically_zero(), y.is_identically_zero()) {
            (true, true) => continue,
            (_, true) | (true, _) => return None,
            _ => {}
        }
        let q = x.checked_div(y).ok()?;
        match &factor {
            None => factor = Some(q),
            Some(f) if f.equivalent(&q) => {}
            Some(_) => return None,
        }
    }
    let f = factor.unwrap_or_else(Expr::one);
    let coordinate_free = f.leaves().iter().all(|a| matches!(a, Atom::Symbol(_)));
    coordinate_free.then_some(f)
}

/// Common ratio `a_i / b_i` without any restriction on its form.
fn common_ratio(a: &[Expr], b: &[Expr]) -> Option<Expr> {
    let mut factor: Option<Expr> = None;
    for (x, y) in a.iter().zip(b) {
        if y.is_identically_zero() {
            if x.is_identically_zero() {
                continue;
            }
            return None;
        }
        let q = x.checked_div(y).ok()?;
        match &factor {
            None => factor = Some(q),
            Some(f) if f.equivalent(&q) => {}
            Some(_) => return None,
        }
    }
    factor
}

impl SpacetimeModel {
    pub fn new(metric: MetricSpec, potential: Option<Vec<Expr>>, field: Option<Matrix>, constants: Constants) -> Result<Self> {
        if metric.n != 1 || metric.m != 3 {
            return Err(Error::Shape(
                "spacetime metric must have one base and three fiber coordinates".into(),
            ));
        }
        if let Some(a) = &potential {
            if a.len() != 4 {
                return Err(Error::Shape("potential needs four components".into()));
            }
        }
        if let Some(f) = &field {
            if f.len() != 4 || f.iter().any(|r| r.len() != 4) {
                return Err(Error::Shape("field must be 4×4".into()));
            }
            for mu in 0..4 {
                for nu in 0..4 {
                    if !(&f[mu][nu] + &f[nu][mu]).is_identically_zero() {
                        return Err(Error::Invalid("field is not antisymmetric".into()));
                    }
                }
            }
        }
        for e in potential.iter().flatten().chain(field.iter().flatten().flatten()) {
            if e.jet_order() > 0 {
                return Err(Error::Invalid("potential and field must not depend on velocities".into()));
            }
        }
        Ok(SpacetimeModel {
            metric,
            potential,
            field,
            constants,
        })
    }

    pub fn g(&self, a: usize, b: usize) -> &Expr {
        self.metric.entry(a, b)
    }

    /// `α = (g_{00} + 2g_{0j}x^j_0 + g_{ij}x^i_0x^j_0)^{−1/2}`.
    pub fn alpha(&self) -> Expr {
        self.speed_squared().sqrt().recip()
    }

    /// `g_{00} + 2g_{0j}x^j_0 + g_{ij}x^i_0x^j_0`.
    pub fn speed_squared(&self) -> Expr {
        let mut acc = self.g(0, 0).clone();
        for j in 1..4 {
            acc = acc + Expr::int(2) * self.g(0, j) * velocity(j);
            for i in 1..4 {
                acc = acc + self.g(i, j) * velocity(i) * velocity(j);
            }
        }
        acc
    }

    /// `τ_λ = cα(g_{0λ} + g_{iλ}x^i_0)`.
    pub fn tau(&self) -> Vec<Expr> {
        let ca = &self.constants.c * self.alpha();
        (0..4)
            .map(|l| {
                let mut acc = self.g(0, l).clone();
                for i in 1..4 {
                    acc = acc + self.g(i, l) * velocity(i);
                }
                &ca * acc
            })
            .collect()
    }

    /// `τ^♮ = τ_λ dx^λ` on the jet space.
    pub fn tau_form(&self) -> Form {
        let mut out = Form::zero(1, Basis::Raw);
        for (l, t) in self.tau().into_iter().enumerate() {
            out = out.add(&Form::term(1, Basis::Raw, t, vec![dx(l)]));
        }
        out
    }

    /// `ḡ^{λμ}τ_λτ_μ`, which equals `c²`.
    pub fn tau_norm(&self) -> Result<Expr> {
        let inv = linalg::inverse(self.metric.matrix())?;
        let t = self.tau();
        let mut acc = Expr::zero();
        for l in 0..4 {
            for mu in 0..4 {
                acc = acc + &inv[l][mu] * &t[l] * &t[mu];
            }
        }
        Ok(acc)
    }

    /// `Γ_φ{}^i{}_0 = K_φ{}^i{}_j x^j_0 + K_φ{}^i{}_0 − x^i_0(K_φ{}^0{}_j x^j_0 + K_φ{}^0{}_0)`.
    fn gamma_phi(&self, k: &Christoffel, sign: i64, phi: usize, i: usize) -> Expr {
        let kk = |nu: usize, mu: usize| k[nu][phi][mu].clone() * Expr::int(sign);
        let mut first = kk(i, 0);
        let mut second = kk(0, 0);
        for j in 1..4 {
            first = first + kk(i, j) * velocity(j);
            second = second + kk(0, j) * velocity(j);
        }
        first - velocity(i) * second
    }

    fn gravitational_display(&self, k: &Christoffel, sign: i64) -> Form {
        let t = self.tau();
        let c2 = self.constants.c.powi(2);
        let ca = &self.constants.c * self.alpha();
        let mut out = Form::zero(1, Basis::Raw);
        for i in 1..4 {
            let mut left = Form::du(1, i - 1, MultiIndex::single(0));
            for phi in 0..4 {
                let g = self.gamma_phi(k, sign, phi, i);
                left = left.sub(&Form::term(1, Basis::Raw, g, vec![dx(phi)]));
            }
            for mu in 0..4 {
                let coef = &ca * (self.g(i, mu) - &t[i] * &t[mu] / &c2);
                if coef.is_zero() {
                    continue;
                }
                out = out.add(&left.wedge(&Form::term(1, Basis::Raw, coef, vec![dx(mu)])));
            }
        }
        out
    }

    fn forms_equal(a: &Form, b: &Form) -> bool {
        let diff = a.sub(b);
        let equal = diff.terms().all(|(_, c)| c.is_identically_zero());
        equal
    }

    /// `Ω^♮ = dτ^♮` with the coordinate display evaluated for both signs of
    /// the identification `K = ±Γ`.
    pub fn gravitational_two_form(&self) -> Result<GravitationalReport> {
        let k = christoffel(&self.metric)?;
        let d_tau = self.tau_form().exterior_derivative();
        let display = self.gravitational_display(&k, 1);
        let display_opposite = self.gravitational_display(&k, -1);
        let closed = d_tau.exterior_derivative().terms().all(|(_, c)| c.is_identically_zero());
        Ok(GravitationalReport {
            matches: Self::forms_equal(&d_tau, &display),
            matches_opposite: Self::forms_equal(&d_tau, &display_opposite),
            d_tau,
            display,
            display_opposite,
            closed,
        })
    }

    /// `F_{μν} = 2(∂_μ A_ν − ∂_ν A_μ)` from the potential.
    pub fn field_from_potential(&self) -> Option<Matrix> {
        let a = self.potential.as_ref()?;
        let mut f = linalg::zeros(4, 4);
        for mu in 0..4 {
            for nu in 0..4 {
                f[mu][nu] = Expr::int(2) * (a[nu].partial(&coord_atom(mu)) - a[mu].partial(&coord_atom(nu)));
            }
        }
        Some(f)
    }

    /// `F = 2dA` as forms, when both are given.
    pub fn field_matches_potential(&self) -> Option<bool> {
        let f = self.field.as_ref()?;
        let a = self.potential.as_ref()?;
        let mut a_form = Form::zero(1, Basis::Raw);
        for (l, al) in a.iter().enumerate() {
            a_form = a_form.add(&Form::term(1, Basis::Raw, al.clone(), vec![dx(l)]));
        }
        let two_da = a_form.exterior_derivative().scale(&Expr::int(2));
        Some(Self::forms_equal(&two_form(f), &two_da))
    }

    /// Supplied field, else the one derived from the potential, else zero.
    pub fn effective_field(&self) -> Matrix {
        self.field
            .clone()
            .or_else(|| self.field_from_potential())
            .unwrap_or_else(|| linalg::zeros(4, 4))
    }

    /// `Ω = (m/ħ)Ω^♮ + (q/(2ħc)) F`.
    pub fn joined_form(&self) -> Form {
        let k = &self.constants;
        let grav = self.tau_form().exterior_derivative().scale(&(&k.mass / &k.hbar));
        let em = two_form(&self.effective_field()).scale(&(&k.charge / (Expr::int(2) * &k.hbar * &k.c)));
        grav.add(&em)
    }

    /// `λ_GR = (mc/ħ)√(g_{00} + 2g_{0j}x^j_0 + g_{ij}x^i_0x^j_0) + (q/(ħc))(A_0 + x^i_0A_i)`.
    pub fn relativistic_lagrangian(&self) -> Result<Lagrangian> {
        let k = &self.constants;
        let mut density = &k.mass * &k.c / &k.hbar * self.speed_squared().sqrt();
        match &self.potential {
            Some(a) => {
                let mut pot = a[0].clone();
                for i in 1..4 {
                    pot = pot + velocity(i) * &a[i];
                }
                density = density + &k.charge / (&k.hbar * &k.c) * pot;
            }
            None if !k.charge.is_zero() => {
                return Err(Error::Invalid("a potential is required when the charge is nonzero".into()));
            }
            None => {}
        }
        Ok(Lagrangian { n: 1, m: 3, density })
    }

    /// `g_{ij} − c^{−2} τ_i τ_j` for spatial `i, j`.
    pub fn coefficient_matrix(&self) -> Matrix {
        let t = self.tau();
        let c2 = self.constants.c.powi(2);
        (1..4)
            .map(|i| (1..4).map(|j| self.g(i, j) - &t[i] * &t[j] / &c2).collect())
            .collect()
    }

    /// `γ^i_{00}{}^♮` with `K = Γ`.
    pub fn gamma_natural(&self) -> Result<Vec<Expr>> {
        let k = christoffel(&self.metric)?;
        let kk = |a: usize, nu: usize, b: usize| k[nu][a][b].clone();
        Ok((1..4)
            .map(|i| {
                let vi = velocity(i);
                let mut acc = kk(0, i, 0) + kk(0, 0, 0) * &vi;
                for j in 1..4 {
                    let vj = velocity(j);
                    acc = acc - Expr::int(2) * kk(0, i, j) * &vj + Expr::int(2) * kk(0, 0, j) * &vi * &vj;
                    for l in 1..4 {
                        let vl = velocity(l);
                        acc = acc - kk(j, i, l) * &vj * &vl + kk(j, 0, l) * &vj * &vl * &vi;
                    }
                }
                acc
            })
            .collect())
    }

    /// `γ^i_{00}{}^e = −(q/(mc))(g^{iμ} − x^i_0 g^{0μ})(F_{0μ} + F_{jμ}x^j_0)`.
    pub fn gamma_e(&self) -> Result<Vec<Expr>> {
        let inv = linalg::inverse(self.metric.matrix())?;
        let f = self.effective_field();
        let k = &self.constants;
        let pre = -(&k.charge / (&k.mass * &k.c));
        Ok((1..4)
            .map(|i| {
                let mut acc = Expr::zero();
                for mu in 0..4 {
                    let left = &inv[i][mu] - velocity(i) * &inv[0][mu];
                    let mut right = f[0][mu].clone();
                    for j in 1..4 {
                        right = right + &f[j][mu] * velocity(j);
                    }
                    acc = acc + left * right;
                }
                &pre * acc
            })
            .collect())
    }

    /// Accelerations `b^i` making `D_0 + b^i ∂/∂x^i_0` a kernel field of `Ω`.
    pub fn kernel_accelerations(&self) -> Result<Option<Vec<Expr>>> {
        let omega = self.joined_form();
        let mut base = VectorField::default();
        base.base.insert(0, Expr::one());
        for i in 1..4 {
            base.fiber.insert((i - 1, MultiIndex::empty()), velocity(i));
        }
        let c0 = omega.interior(&base);
        let cols: Vec<Form> = (1..4)
            .map(|k| {
                let mut v = VectorField::default();
                v.fiber.insert((k - 1, MultiIndex::single(0)), Expr::one());
                omega.interior(&v)
            })
            .collect();
        let p: Matrix = (1..4).map(|i| (0..3).map(|k| cols[k].coefficient(&[dx(i)])).collect()).collect();
        let rhs: Vec<Expr> = (1..4).map(|i| -c0.coefficient(&[dx(i)])).collect();
        let b = linalg::solve(&p, &rhs)?;
        let mut total = c0;
        for (k, bk) in b.iter().enumerate() {
            total = total.add(&cols[k].scale(bk));
        }
        let closes = total.terms().all(|(_, c)| c.is_identically_zero());
        Ok(closes.then_some(b))
    }

    pub fn motion_equation(&self) -> Result<MotionReport> {
        let lag = self.relativistic_lagrangian()?;
        let e = euler_lagrange(&lag);
        let coefficient_matrix = self.coefficient_matrix();
        if linalg::det(&coefficient_matrix)?.is_identically_zero() {
            return Err(Error::Singular("coefficient matrix g_ij − τ_iτ_j/c² is degenerate".into()));
        }
        // E is affine in the accelerations
        let accel: Vec<Atom> = (0..3).map(|i| Atom::fiber(i, MultiIndex::new([0, 0]))).collect();
        let p: Matrix = e
            .components
            .iter()
            .map(|ei| accel.iter().map(|a| ei.partial(a)).collect())
            .collect();
        let zero_acc: std::collections::BTreeMap<Atom, Expr> = accel.iter().map(|a| (a.clone(), Expr::zero())).collect();
        let q: Vec<Expr> = e.components.iter().map(|ei| ei.substitute(&zero_acc)).collect::<Result<_>>()?;
        let neg_q: Vec<Expr> = q.iter().map(|x| -x).collect();
        let solved = linalg::solve(&p, &neg_q)?;
        let gamma_natural = self.gamma_natural()?;
        let gamma_e = self.gamma_e()?;
        let k = &self.constants;
        let pre = &k.mass * &k.c / &k.hbar * self.alpha();
        let display: Vec<Expr> = (0..3)
            .map(|i| Expr::sum((0..3).map(|j| &coefficient_matrix[i][j] * (acceleration(j + 1) - &gamma_natural[j] - &gamma_e[j]))) * &pre)
            .collect();
        let display_factor = common_constant_factor(&e.components, &display);
        let accelerations_match = (0..3).all(|i| solved[i].equivalent(&(&gamma_natural[i] + &gamma_e[i])));
        let electromagnetic_ratio = if accelerations_match || gamma_e.iter().all(Expr::is_identically_zero) {
            None
        } else {
            let em: Vec<Expr> = (0..3).map(|i| &solved[i] - &gamma_natural[i]).collect();
            common_ratio(&em, &gamma_e)
        };
        Ok(MotionReport {
            euler_lagrange: e,
            coefficient_matrix,
            solved_accelerations: solved,
            kernel_accelerations: self.kernel_accelerations()?,
            gamma_natural,
            gamma_e,
            display,
            display_factor,
            accelerations_match,
            electromagnetic_ratio,
        })
    }
}
