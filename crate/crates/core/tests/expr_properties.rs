mod common;

use std::collections::BTreeMap;

use common::Gen;
use jetvar::expr::{Atom, FunctionTable};
use jetvar::render::{render, Format};
use jetvar::{Expr, JetContext};
use proptest::prelude::*;
use rand::Rng;

fn random_rational(gen: &mut Gen) -> Expr {
    let (n, m) = gen.dims();
    let num = gen.poly(n, m, 2);
    let den = gen.poly(n, m, 1) + Expr::int(7);
    num.checked_div(&den).unwrap_or(num)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sums_and_products_are_congruent(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let a = random_rational(&mut gen);
        let b = random_rational(&mut gen);
        prop_assert_eq!((&a + &b).normalize(), a.normalize() + b.normalize());
        prop_assert_eq!((&a * &b).normalize(), a.normalize() * b.normalize());
        prop_assert!((&a * &b - &b * &a).is_identically_zero());
    }

    #[test]
    fn partial_derivatives_match_central_differences(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let (n, m) = gen.dims();
        let atoms = Gen::atoms(n, m, 1);
        let e = gen.poly_over(&atoms, 5, 3);
        let point: BTreeMap<Atom, f64> =
            atoms.iter().map(|a| (a.clone(), gen.rng.gen_range(-1.5..1.5))).collect();
        let funcs = FunctionTable::new();
        let a = atoms[gen.rng.gen_range(0..atoms.len())].clone();
        let h = 1e-4;
        let at = |shift: f64| {
            e.eval_f64(&|x: &Atom| Some(point[x] + if *x == a { shift } else { 0.0 }), &funcs).unwrap()
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let exact = e.partial(&a).eval_f64(&|x: &Atom| point.get(x).copied(), &funcs).unwrap();
        let scale = exact.abs().max(1.0);
        prop_assert!((fd - exact).abs() <= 1e-6 * scale, "fd {} vs exact {}", fd, exact);
    }

    #[test]
    fn machine_output_round_trips(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let ctx = JetContext::new(2, 2, 2).unwrap();
        let mut e = random_rational(&mut gen);
        if gen.rng.gen_bool(0.5) {
            e = e + gen.poly(2, 2, 1).powi(2).sqrt() * Expr::frac(1, 3)
                + (gen.poly(2, 2, 1) + Expr::int(5)).pow_rational(3, 2).unwrap();
        }
        let text = render(&e, &ctx, Format::Machine);
        let back = ctx.parse(&text).unwrap();
        prop_assert!(back.equivalent(&e), "{} reparsed as {}", text, render(&back, &ctx, Format::Machine));
    }

    #[test]
    fn function_symbol_derivatives_commute(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let atoms = Gen::atoms(2, 1, 1);
        let args = vec![gen.poly_over(&atoms, 2, 2), gen.poly_over(&atoms, 2, 2)];
        let f = Expr::func("f", args);
        let a = atoms[gen.rng.gen_range(0..atoms.len())].clone();
        let b = atoms[gen.rng.gen_range(0..atoms.len())].clone();
        prop_assert_eq!(f.partial(&a).partial(&b), f.partial(&b).partial(&a));
    }
}

#[test]
fn zero_tests_on_known_identities() {
    let ctx = JetContext::new(2, 1, 2).unwrap();
    assert!(ctx.parse("u_xy - u_yx").unwrap().is_identically_zero());
    assert!(ctx.parse("(1 + u_x^2)*(1 - u_x^2) - (1 - u_x^4)").unwrap().is_identically_zero());
    assert!(!ctx.parse("u_xx").unwrap().is_identically_zero());
    assert!(ctx.parse("sqrt(u_x^2 + 1)^2 - u_x^2 - 1").unwrap().is_identically_zero());
}
