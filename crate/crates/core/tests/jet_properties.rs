mod common;

use common::Gen;
use jetvar::expr::Atom;
use jetvar::jet::{change_division_first_order, compose_first_order, evolutionary_apply, relabel_base, total_derivative, Jacobian};
use jetvar::{EvolutionaryField, Expr, JetContext, MultiIndex};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn total_derivatives_commute(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let f = gen.poly(2, 2, 2);
        prop_assert_eq!(total_derivative(&total_derivative(&f, 0), 1), total_derivative(&total_derivative(&f, 1), 0));
    }

    #[test]
    fn total_derivative_raises_order_by_one(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let (n, m) = gen.dims();
        let r = gen.rng.gen_range(0..=2);
        let e = gen.poly(n, m, r);
        let l = gen.rng.gen_range(0..n);
        let d = total_derivative(&e, l);
        prop_assert!(d.jet_order() <= e.jet_order() + 1);
        for i in 0..m {
            for tau in MultiIndex::up_to(n, r + 1) {
                let lhs = d.partial(&Atom::fiber(i, tau.clone()));
                let mut rhs = total_derivative(&e.partial(&Atom::fiber(i, tau.clone())), l);
                if let Some(rest) = tau.without(l) {
                    rhs = rhs + e.partial(&Atom::fiber(i, rest));
                }
                prop_assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn evolutionary_fields_commute_with_total_derivatives(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let (n, m) = gen.dims();
        let e = gen.poly(n, m, 1);
        let phi = EvolutionaryField::new((0..m).map(|_| gen.poly(n, m, 1)).collect());
        let l = gen.rng.gen_range(0..n);
        prop_assert_eq!(
            evolutionary_apply(&phi, &total_derivative(&e, l)),
            total_derivative(&evolutionary_apply(&phi, &e), l)
        );
    }

    #[test]
    fn change_of_division_inverts(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let n = gen.rng.gen_range(1..=2);
        let dim = n + 1;
        let j: Vec<Vec<Expr>> = (0..dim)
            .map(|a| (0..dim).map(|b| Expr::int(gen.rng.gen_range(-3..=3) + if a == b { 4 } else { 0 })).collect())
            .collect();
        let jac = Jacobian::from_full(&j, n).unwrap();
        let inverse = jac.inverse();
        prop_assume!(inverse.is_ok());
        let forward = change_division_first_order(&jac);
        let backward = change_division_first_order(&inverse.unwrap());
        prop_assume!(forward.is_ok() && backward.is_ok());
        let round = compose_first_order(&backward.unwrap(), &forward.unwrap()).unwrap();
        for (mu, e) in round[0].iter().enumerate() {
            prop_assert!(e.equivalent(&Expr::fiber(0, MultiIndex::single(mu))));
        }
    }
}

#[test]
fn evolutionary_derivation_of_first_derivative() {
    let ctx = JetContext::new(1, 1, 2).unwrap();
    let phi = EvolutionaryField::new(vec![ctx.parse("u_x").unwrap()]);
    let u = ctx.parse("u").unwrap();
    let uxx = ctx.parse("u_xx").unwrap();
    assert_eq!(evolutionary_apply(&phi, &total_derivative(&u, 0)), uxx);
    assert_eq!(total_derivative(&evolutionary_apply(&phi, &u), 0), uxx);
}

#[test]
fn rotation_changes_division() {
    let ctx = JetContext::new(1, 1, 1).unwrap();
    let (c, s) = (Expr::constant("C", None), Expr::constant("S", None));
    let j = vec![vec![c.clone(), -&s], vec![s.clone(), c.clone()]];
    let v = change_division_first_order(&Jacobian::from_full(&j, 1).unwrap()).unwrap();
    let ux = ctx.parse("u_x").unwrap();
    let expected = (&s + &c * &ux).checked_div(&(&c - &s * &ux)).unwrap();
    assert!(v[0][0].equivalent(&expected));
}

#[test]
fn relabeling_swaps_base_coordinates() {
    let ctx = JetContext::new(2, 1, 2).unwrap();
    let e = ctx.parse("x*u_xy + y^2*u_x").unwrap();
    let swapped = relabel_base(&e, &[1, 0]).unwrap();
    assert_eq!(swapped, ctx.parse("y*u_xy + x^2*u_y").unwrap());
}
