//! Acceptance criteria, one line per criterion.
//!
//! Run with `cargo test -p jetvar --test acceptance`. A failing criterion is
//! reported on its line and in the summary; the process exits nonzero only
//! when `JETVAR_ACCEPTANCE_STRICT` is set.

mod common;

use std::time::{Duration, Instant};

use common::Gen;
use jetvar::expr::FunctionTable;
use jetvar::forms::HorizontalForm;
use jetvar::jet::{change_division_first_order, compose_first_order, total_derivative, Jacobian};
use jetvar::linalg;
use jetvar::relativity::{minkowski, potential_for_constant_field, spacetime_context, Constants, SpacetimeModel};
use jetvar::render::{render, Format};
use jetvar::riemann::{proportionality_factor, MetricSpec, Submanifolds};
use jetvar::variational::{euler_lagrange, finite_difference_action_check, green_residual, helmholtz_check, FdConfig, Grid, Lagrangian};
use jetvar::{Expr, JetContext};
use rand::Rng;

const SEED: u64 = 20_240_917;
const CASES: usize = 100;
const KERNEL_FORMS: usize = 50;
const KERNEL_GRAPHS: usize = 20;
const FD_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-4;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn minimal_surface_polynomial(ctx: &JetContext) -> Expr {
    ctx.parse("(1 + u_y^2)*u_xx - 2*u_x*u_y*u_xy + (1 + u_x^2)*u_yy").unwrap()
}

fn criterion_1() -> Outcome {
    let ctx = JetContext::new(2, 1, 2).unwrap();
    let lag = Lagrangian::new(&ctx, ctx.parse("sqrt(1 + u_x^2 + u_y^2)").unwrap()).unwrap();
    let e = euler_lagrange(&lag);
    let target = minimal_surface_polynomial(&ctx);
    match e.components[0].numerator().exact_div(target.numerator()) {
        Some(q) if !q.is_zero() => outcome(
            true,
            format!(
                "numerator = ({}) × minimal surface polynomial",
                render(&Expr::from_poly(q), &ctx, Format::Text)
            ),
        ),
        _ => outcome(false, "numerator is not divisible by the minimal surface polynomial"),
    }
}

fn criterion_2() -> Outcome {
    let sub = match Submanifolds::new(&MetricSpec::euclidean(2, 1)) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let ctx = JetContext::new(2, 1, 2).unwrap();
    let h = sub.mean_curvature_equation();
    let e = euler_lagrange(&sub.area_lagrangian());
    match proportionality_factor(&e.components[0], &h.components[0]) {
        Some(f) => outcome(
            true,
            format!("E(A) = ({}) × mean curvature equation", render(&f, &ctx, Format::Text)),
        ),
        None => outcome(false, "no nonzero factor relates the two equations"),
    }
}

fn criterion_3() -> Outcome {
    let mut ctx = JetContext::new(2, 1, 1).unwrap();
    ctx.declare_function("f", &["x", "y"]).unwrap();
    let conformal = MetricSpec::diagonal(2, 1, vec![Expr::one(), Expr::one(), ctx.parse("f").unwrap()]).unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for (name, g) in [("Euclidean", MetricSpec::euclidean(2, 1)), ("diag(1,1,f(x,y))", conformal)] {
        let res = Submanifolds::new(&g).and_then(|s| Ok((s.hessian_area()?, s.euler_lagrange_theorem()?)));
        match res {
            Ok((hess, thm)) => {
                ok &= hess.holds;
                details.push(format!(
                    "{name}: Hessian {} (E(A) = −II∘Hess {})",
                    verdict(hess.holds),
                    verdict(thm.holds)
                ));
            }
            Err(e) => {
                ok = false;
                details.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(ok, details.join("; "))
}

fn verdict(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

fn criterion_4a() -> Outcome {
    let constants = Constants {
        charge: Expr::zero(),
        ..Constants::default()
    };
    let ctx = spacetime_context(2);
    let model = SpacetimeModel::new(minkowski(), None, None, constants).unwrap();
    let rep = match model.motion_equation() {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let straight = rep.solved_accelerations.iter().all(Expr::is_identically_zero);
    let symmetric = (0..3).all(|i| (0..3).all(|j| rep.coefficient_matrix[i][j].equivalent(&rep.coefficient_matrix[j][i])));
    let nondegenerate = !linalg::det(&rep.coefficient_matrix).unwrap().is_identically_zero();
    let factor = rep.display_factor.as_ref().map(|f| render(f, &ctx, Format::Text));
    let ok = straight && symmetric && nondegenerate && factor.is_some();
    outcome(
        ok,
        format!(
            "accelerations zero: {straight}; matrix symmetric: {symmetric}, nondegenerate: {nondegenerate}; E = κ·display with κ = {}",
            factor.unwrap_or_else(|| "none".into())
        ),
    )
}

fn criterion_4b() -> Outcome {
    let ctx = spacetime_context(2);
    let mut f = linalg::zeros(4, 4);
    for (mu, nu, v) in [(0, 1, 3), (0, 3, -1), (1, 2, 2), (2, 3, 5)] {
        f[mu][nu] = Expr::int(v);
        f[nu][mu] = Expr::int(-v);
    }
    let a = potential_for_constant_field(&f);
    let model = SpacetimeModel::new(minkowski(), Some(a), Some(f), Constants::default()).unwrap();
    let rep = match model.motion_equation() {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let kernel_agrees = rep
        .kernel_accelerations
        .as_ref()
        .map(|k| k.iter().zip(&rep.solved_accelerations).all(|(a, b)| a.equivalent(b)))
        .unwrap_or(false);
    if rep.accelerations_match {
        return outcome(true, format!("solved accelerations equal γ^e; kernel of Ω agrees: {kernel_agrees}"));
    }
    match &rep.electromagnetic_ratio {
        Some(r) if r.leaves().iter().all(|a| matches!(a, jetvar::Atom::Symbol(_))) => outcome(
            true,
            format!(
                "solved = ({}) × γ^e; kernel of Ω agrees: {kernel_agrees}",
                render(r, &ctx, Format::Text)
            ),
        ),
        Some(r) => outcome(
            false,
            format!(
                "solved = ({}) × γ^e, a non-constant factor; kernel of Ω agrees with the solved accelerations: {kernel_agrees}",
                render(r, &ctx, Format::Text)
            ),
        ),
        None => outcome(false, format!("no common factor; kernel of Ω agrees: {kernel_agrees}")),
    }
}

fn random_lagrangian(gen: &mut Gen) -> (JetContext, Lagrangian) {
    let (n, m) = gen.dims();
    let order = gen.rng.gen_range(1..=2);
    let ctx = JetContext::new(n, m, order).unwrap();
    let density = gen.poly(n, m, order);
    (ctx.clone(), Lagrangian::new(&ctx, density).unwrap())
}

fn criterion_5() -> Outcome {
    let mut gen = Gen::new(SEED);
    let mut failures: Vec<String> = Vec::new();
    let mut count = |name: &str, ok: usize| {
        if ok != CASES {
            failures.push(format!("{name}: {ok}/{CASES}"));
        }
    };

    let mut ok = 0;
    for _ in 0..CASES {
        let (n, m) = gen.dims();
        let order = gen.rng.gen_range(0..=1);
        let ctx = JetContext::new(n, m, order + 1).unwrap();
        let density = Expr::sum((0..n).map(|l| total_derivative(&gen.poly(n, m, order), l)));
        let lag = Lagrangian::new(&ctx, density).unwrap();
        ok += euler_lagrange(&lag).is_zero() as usize;
    }
    count("(i) E(D_λ f^λ) = 0", ok);

    let mut ok = 0;
    for _ in 0..CASES {
        let (_, lag) = random_lagrangian(&mut gen);
        ok += helmholtz_check(&euler_lagrange(&lag)).map(|r| r.variational).unwrap_or(false) as usize;
    }
    count("(ii) H∘E = 0", ok);

    let mut ok = 0;
    for _ in 0..CASES {
        let (n, m) = gen.dims();
        let rows = gen.rng.gen_range(1..=m);
        let op = gen.coperator(n, rows, m, 2);
        ok += (op.adjoint().adjoint() == op) as usize;
    }
    count("(iii) Δ** = Δ", ok);

    let mut ok = 0;
    for _ in 0..CASES {
        let (n, m) = gen.dims();
        let f = gen.poly(n, m, 2);
        let l = gen.rng.gen_range(0..n);
        let mu = gen.rng.gen_range(0..n);
        ok += (total_derivative(&total_derivative(&f, l), mu) == total_derivative(&total_derivative(&f, mu), l)) as usize;
    }
    count("(iv) D_λD_μ = D_μD_λ", ok);

    let mut ok = 0;
    for _ in 0..CASES {
        let (n, m) = gen.dims();
        let mut h = HorizontalForm::zero(n);
        for _ in 0..3 {
            let q = gen.rng.gen_range(0..=n);
            let mut idx: Vec<usize> = (0..n).collect();
            while idx.len() > q {
                idx.remove(gen.rng.gen_range(0..idx.len()));
            }
            h = h.add(&HorizontalForm::term(n, gen.poly(n, m, 1), idx));
        }
        ok += h.horizontal_differential().horizontal_differential().is_zero() as usize;
    }
    count("(v) d̄∘d̄ = 0", ok);

    let mut ok = 0;
    for _ in 0..CASES {
        let (n, m) = gen.dims();
        let q = gen.rng.gen_range(0..n);
        let alpha = gen.form(n, m, q, 1);
        let lhs = alpha.horizontalize().horizontal_differential();
        let rhs = alpha.exterior_derivative().horizontalize();
        ok += lhs.sub(&rhs).terms().all(|(_, c)| c.is_identically_zero()) as usize;
    }
    count("(vi) d̄∘h = h∘d", ok);

    let mut ok = 0;
    for _ in 0..CASES {
        let (n, m) = gen.dims();
        let rows = gen.rng.gen_range(1..=m);
        let op = gen.coperator(n, rows, m, 2);
        let phi: Vec<Expr> = (0..m).map(|_| gen.poly(n, m, 1)).collect();
        let psi: Vec<Expr> = (0..rows).map(|_| gen.poly(n, m, 1)).collect();
        ok += green_residual(&op, &phi, &psi).is_ok() as usize;
    }
    count("(vii) Green's formula", ok);

    if failures.is_empty() {
        outcome(true, format!("7 properties × {CASES} cases"))
    } else {
        outcome(false, failures.join("; "))
    }
}

fn criterion_6() -> Outcome {
    let mut gen = Gen::new(SEED ^ 0x6b);
    let mut agree = 0;
    let mut lemma = 0;
    let mut vanishing = 0;
    for k in 0..KERNEL_FORMS {
        let (n, m) = gen.dims();
        let q = gen.rng.gen_range(1..=n);
        let alpha = if k % 2 == 0 {
            gen.contact_form(n, m, q, 1)
        } else {
            gen.form(n, m, q, 1)
        };
        let h = alpha.horizontalize();
        let h_zero = h.terms().all(|(_, c)| c.is_identically_zero());
        vanishing += h_zero as usize;
        let mut all_zero = true;
        let mut lemma_ok = true;
        for _ in 0..KERNEL_GRAPHS {
            let graph: Vec<Expr> = (0..m).map(|_| gen.base_poly(n, 3)).collect();
            let pa = alpha.pullback_graph(&graph).unwrap();
            let ph = h.pullback_graph(&graph).unwrap();
            all_zero &= pa.terms().all(|(_, c)| c.is_identically_zero());
            lemma_ok &= pa.sub(&ph).terms().all(|(_, c)| c.is_identically_zero());
        }
        agree += (h_zero == all_zero) as usize;
        lemma += lemma_ok as usize;
    }
    outcome(
        agree == KERNEL_FORMS && lemma == KERNEL_FORMS,
        format!(
            "kernel iff: {agree}/{KERNEL_FORMS}; pullback of α = pullback of h(α): {lemma}/{KERNEL_FORMS}; {vanishing} forms with h(α) = 0; {KERNEL_GRAPHS} graphs each"
        ),
    )
}

fn criterion_7() -> Outcome {
    let cfg = FdConfig {
        step: FD_STEP,
        tolerance: FD_TOL,
    };
    let funcs = FunctionTable::new();
    let c1 = JetContext::new(1, 1, 1).unwrap();
    let quad = finite_difference_action_check(
        &Lagrangian::new(&c1, c1.parse("1/2*u_x^2").unwrap()).unwrap(),
        &[c1.parse("x^2").unwrap()],
        &[c1.parse("x*(1 - x)").unwrap()],
        &Grid::unit(1, 1001),
        &funcs,
        cfg,
    );
    let c2 = JetContext::new(2, 1, 1).unwrap();
    let minimal = finite_difference_action_check(
        &Lagrangian::new(&c2, c2.parse("sqrt(1 + u_x^2 + u_y^2)").unwrap()).unwrap(),
        &[c2.parse("x^2 + 1/2*x*y - y^3/3").unwrap()],
        &[c2.parse("x*(1 - x)*y*(1 - y)").unwrap()],
        &Grid::unit(2, 33),
        &funcs,
        cfg,
    );
    match (quad, minimal) {
        (Ok(a), Ok(b)) => outcome(
            a.passed && b.passed,
            format!(
                "½u_x²: {:.9} vs {:.9} (rel {:.2e}); area: {:.9} vs {:.9} (rel {:.2e}); tol {FD_TOL:e}",
                a.action_derivative, a.euler_integral, a.relative_error, b.action_derivative, b.euler_integral, b.relative_error
            ),
        ),
        (a, b) => outcome(false, format!("{:?} / {:?}", a.err(), b.err())),
    }
}

fn criterion_8() -> Outcome {
    let ctx = JetContext::new(1, 1, 1).unwrap();
    let swap = Jacobian::from_full(&vec![vec![Expr::zero(), Expr::one()], vec![Expr::one(), Expr::zero()]], 1).unwrap();
    let v = change_division_first_order(&swap).unwrap();
    let swap_ok = v[0][0] == ctx.parse("1/u_x").unwrap();
    let j = Jacobian::from_full(&vec![vec![Expr::int(2), Expr::int(1)], vec![Expr::int(1), Expr::frac(3, 2)]], 1).unwrap();
    let forward = change_division_first_order(&j).unwrap();
    let backward = change_division_first_order(&j.inverse().unwrap()).unwrap();
    let round = compose_first_order(&backward, &forward).unwrap();
    let identity_ok = round[0][0].equivalent(&ctx.parse("u_x").unwrap());
    outcome(
        swap_ok && identity_ok,
        format!(
            "swap gives v_y = {}; inverse composition gives {}",
            render(&v[0][0], &ctx, Format::Text),
            render(&round[0][0], &ctx, Format::Text)
        ),
    )
}

type Criterion = (&'static str, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1", "minimal surface golden test", Duration::from_secs(1), criterion_1),
        ("2", "mean curvature equation vs E(area)", Duration::from_secs(5), criterion_2),
        ("3", "Hessian of the area Lagrangian", Duration::from_secs(10), criterion_3),
        ("4a", "Minkowski free particle", Duration::from_secs(30), criterion_4a),
        ("4b", "Minkowski constant field vs γ^e", Duration::from_secs(30), criterion_4b),
        ("5", "variational sequence properties", Duration::from_secs(300), criterion_5),
        ("6", "kernel of horizontalization", Duration::from_secs(120), criterion_6),
        ("7", "finite-difference action check", Duration::from_secs(30), criterion_7),
        ("8", "change of division", Duration::from_secs(1), criterion_8),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let passed = out.passed && in_time;
        failed += !passed as usize;
        let timing = if in_time {
            format!("{:.2}s", elapsed.as_secs_f64())
        } else {
            format!("{:.2}s, over the {}s budget", elapsed.as_secs_f64(), budget.as_secs())
        };
        println!("[{}] {id} {name}: {} ({timing})", if passed { "PASS" } else { "FAIL" }, out.detail);
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 && std::env::var_os("JETVAR_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
