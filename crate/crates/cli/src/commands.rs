use jetvar::linalg;
use jetvar::relativity::{spacetime_context, SpacetimeModel};
use jetvar::riemann::{proportionality_factor, MetricSpec, Submanifolds};
use jetvar::variational::{
    euler_lagrange, finite_difference_action_check, helmholtz_check, is_null_lagrangian, FdConfig, Lagrangian, SourceForm,
};
use jetvar::{Expr, Format, JetContext};

use crate::error::CliError;
use crate::problem::ProblemFile;

/// Rendered output plus the description of a failed check, if any.
pub struct Outcome {
    pub text: String,
    pub failure: Option<String>,
}

struct Report<'a> {
    ctx: &'a JetContext,
    fmt: Format,
    out: String,
}

impl<'a> Report<'a> {
    fn new(ctx: &'a JetContext, fmt: Format) -> Self {
        Report {
            ctx,
            fmt,
            out: String::new(),
        }
    }

    fn expr(&self, e: &Expr) -> String {
        jetvar::render::render(e, self.ctx, self.fmt)
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }

    fn field(&mut self, key: &str, value: impl AsRef<str>) {
        let sep = if self.fmt == Format::Machine { "=" } else { ": " };
        self.line(format!("{key}{sep}{}", value.as_ref()));
    }

    /// `key: lhs = 0`, or `key=lhs` in the machine format.
    fn equation(&mut self, key: &str, lhs: String) {
        if self.fmt == Format::Machine {
            self.field(key, lhs);
        } else {
            self.field(key, format!("{lhs} = 0"));
        }
    }

    fn heading(&mut self, s: &str) {
        if self.fmt == Format::Machine {
            self.line(format!("[{s}]"));
        } else {
            self.line(format!("{s}:"));
        }
    }

    fn equations(&mut self, label: &str, comps: &[Expr]) {
        for (i, e) in comps.iter().enumerate() {
            let name = if self.fmt == Format::Latex {
                format!("{label}_{{{}}}", i + 1)
            } else {
                format!("{label}{}", i + 1)
            };
            let lhs = self.expr(e);
            self.equation(&name, lhs);
        }
    }

    fn values(&mut self, label: &str, comps: &[Expr]) {
        for (i, e) in comps.iter().enumerate() {
            let v = self.expr(e);
            self.field(&format!("{label}{}", i + 1), v);
        }
    }

    fn finish(self, failure: Option<String>) -> Outcome {
        Outcome { text: self.out, failure }
    }
}

fn verdict(b: bool, yes: &'static str, no: &'static str) -> &'static str {
    if b {
        yes
    } else {
        no
    }
}

pub fn euler_lagrange_cmd(p: &ProblemFile, fmt: Format) -> Result<Outcome, CliError> {
    let ctx = p.context(None)?;
    let lag = Lagrangian::new(&ctx, p.lagrangian(&ctx)?)?;
    let eps = euler_lagrange(&lag);
    let out_ctx = ctx.with_order(2 * ctx.r);
    let mut r = Report::new(&out_ctx, fmt);
    r.equations("E", &eps.components);
    Ok(r.finish(None))
}

pub fn helmholtz_cmd(p: &ProblemFile, fmt: Format) -> Result<Outcome, CliError> {
    let ctx = p.context(None)?;
    let eps = SourceForm::new(ctx.n, p.vector("source", &ctx, ctx.m)?);
    let report = helmholtz_check(&eps)?;
    let mut r = Report::new(&ctx, fmt);
    r.line(verdict(report.variational, "variational", "not variational"));
    if !report.variational {
        r.heading("residual");
        r.line(report.residual.render(&ctx, fmt));
    }
    Ok(r.finish(None))
}

pub fn null_check_cmd(p: &ProblemFile, fmt: Format) -> Result<Outcome, CliError> {
    let ctx = p.context(None)?;
    let lag = Lagrangian::new(&ctx, p.lagrangian(&ctx)?)?;
    let null = is_null_lagrangian(&lag);
    let out_ctx = ctx.with_order(2 * ctx.r);
    let mut r = Report::new(&out_ctx, fmt);
    r.line(verdict(null, "null Lagrangian", "not a null Lagrangian"));
    if !null {
        r.equations("E", &euler_lagrange(&lag).components);
    }
    Ok(r.finish(None))
}

pub fn minimal_cmd(p: &ProblemFile, fmt: Format) -> Result<Outcome, CliError> {
    let ctx = p.context(None)?;
    let (n, m) = (ctx.n, ctx.m);
    let metric = MetricSpec::new(n, m, p.matrix("metric", &ctx, n + m)?)?;
    let sub = Submanifolds::new(&metric)?;
    let out_ctx = ctx.with_order(2);
    let mut r = Report::new(&out_ctx, fmt);

    r.heading("totally geodesic system");
    for (k, t) in sub.totally_geodesic_tensor().iter().enumerate() {
        for l in 0..n {
            for x in l..n {
                let name = format!("T{}[{},{}]", k + 1, ctx.base_name(l), ctx.base_name(x));
                let v = r.expr(&t[l][x]);
                r.equation(&name, v);
            }
        }
    }
    let h = sub.mean_curvature_equation();
    r.heading("mean curvature equation");
    r.equations("H", &h.components);

    r.heading("area Lagrangian");
    let density = r.expr(&sub.area_density());
    r.line(density);
    let e = euler_lagrange(&sub.area_lagrangian());
    r.heading("Euler-Lagrange equations of the area");
    r.equations("E", &e.components);

    let hess = sub.hessian_area()?;
    let thm = sub.euler_lagrange_theorem()?;
    r.field("Hessian identity", verdict(hess.holds, "holds", "fails"));
    r.field("E(A) = -Hess(A)·T", verdict(thm.holds, "holds", "fails"));
    if m == 1 {
        match proportionality_factor(&e.components[0], &h.components[0]) {
            Some(f) => {
                let f = r.expr(&f);
                r.field("E(A) / H", f)
            }
            None => r.field("E(A) / H", "not a multiple"),
        }
    }
    let failure = match (hess.holds, thm.holds) {
        (true, true) => None,
        (false, _) => Some("the Hessian identity does not hold".to_string()),
        (_, false) => Some("E(A) differs from the contraction of the Hessian with T".to_string()),
    };
    Ok(r.finish(failure))
}

pub fn relativistic_cmd(p: &ProblemFile, fmt: Format) -> Result<Outcome, CliError> {
    let ctx = p.context(Some(spacetime_context(2)))?;
    if ctx.n != 1 || ctx.m != 3 {
        return Err(CliError::Invalid(
            "relativistic problems need one base coordinate and three fibers".into(),
        ));
    }
    let ctx = ctx.with_order(2);
    let metric = MetricSpec::new(1, 3, p.matrix("metric", &ctx, 4)?)?;
    let potential = if p.has("potential") {
        Some(p.vector("potential", &ctx, 4)?)
    } else {
        None
    };
    let field = if p.has("field") { Some(p.matrix("field", &ctx, 4)?) } else { None };
    let model = SpacetimeModel::new(metric, potential, field, p.particle(&ctx)?)?;
    if model.field_matches_potential() == Some(false) {
        return Err(CliError::Invalid("[field] is not 2dA for the given [potential]".into()));
    }
    let lag = model.relativistic_lagrangian()?;
    let rep = model.motion_equation()?;
    let grav = model.gravitational_two_form()?;

    let mut r = Report::new(&ctx, fmt);
    r.heading("Lagrangian");
    let density = r.expr(&lag.density);
    r.line(density);
    r.heading("Euler-Lagrange equations");
    r.equations("E", &rep.euler_lagrange.components);
    let det = linalg::det(&rep.coefficient_matrix)?;
    let det = r.expr(&det);
    r.field("det(g_ij - tau_i tau_j / c^2)", det);
    r.heading("accelerations");
    r.values("a", &rep.solved_accelerations);
    r.heading("gamma natural");
    r.values("g", &rep.gamma_natural);
    r.heading("gamma e");
    r.values("e", &rep.gamma_e);
    match &rep.display_factor {
        Some(k) => {
            let k = r.expr(k);
            r.field("E / display", k)
        }
        None => r.field("E / display", "no constant factor"),
    }
    r.field("accelerations match display", verdict(rep.accelerations_match, "yes", "no"));
    if let Some(ratio) = &rep.electromagnetic_ratio {
        let ratio = r.expr(ratio);
        r.field("electromagnetic ratio", ratio);
    }
    let kernel = match &rep.kernel_accelerations {
        Some(k) if k.iter().zip(&rep.solved_accelerations).all(|(a, b)| a.equivalent(b)) => "agrees",
        Some(_) => "differs",
        None => "degenerate",
    };
    r.field("kernel of Omega", kernel);
    r.field("d(Omega natural)", verdict(grav.closed, "0", "nonzero"));
    r.field(
        "Omega display with K = Christoffel",
        verdict(grav.matches, "matches dtau", "differs from dtau"),
    );
    r.field(
        "Omega display with K = -Christoffel",
        verdict(grav.matches_opposite, "matches dtau", "differs from dtau"),
    );
    let failure = (!grav.closed).then(|| "d(dtau) does not vanish".to_string());
    Ok(r.finish(failure))
}

pub fn verify_cmd(p: &ProblemFile, fmt: Format, config: FdConfig) -> Result<Outcome, CliError> {
    let ctx = p.context(None)?;
    let lag = Lagrangian::new(&ctx, p.lagrangian(&ctx)?)?;
    let graph = p.vector("graph", &ctx, ctx.m)?;
    let variation = p.vector("variation", &ctx, ctx.m)?;
    for e in graph.iter().chain(&variation) {
        if e.jet_order() > 0 || e.leaves().iter().any(|a| matches!(a, jetvar::Atom::Fiber(..))) {
            return Err(CliError::Invalid(
                "[graph] and [variation] must depend on the base coordinates only".into(),
            ));
        }
    }
    let grid = p.grid(ctx.n)?;
    let rep = finite_difference_action_check(&lag, &graph, &variation, &grid, &jetvar::expr::FunctionTable::new(), config)?;
    let mut r = Report::new(&ctx, fmt);
    r.field("action derivative", format!("{:.12e}", rep.action_derivative));
    r.field("Euler-Lagrange integral", format!("{:.12e}", rep.euler_integral));
    r.field("relative error", format!("{:.3e}", rep.relative_error));
    r.field("tolerance", format!("{:.3e}", rep.tolerance));
    r.line(verdict(rep.passed, "passed", "failed"));
    let failure = (!rep.passed).then(|| format!("relative error {:.3e} exceeds {:.3e}", rep.relative_error, rep.tolerance));
    Ok(r.finish(failure))
}
