#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeMap;

use common::Gen;
use jetvar::expr::Atom;
use jetvar::linalg::{self, Matrix};
use jetvar::relativity::{minkowski, spacetime_context, Constants, SpacetimeModel};
use jetvar::riemann::{christoffel, first_fundamental_form, proportionality_factor, MetricSpec, Submanifolds};
use jetvar::variational::euler_lagrange;
use jetvar::{Expr, JetContext, MultiIndex};
use proptest::prelude::*;
use rand::Rng;

fn graph_bindings(n: usize, graph: &[Expr]) -> BTreeMap<Atom, Expr> {
    let mut b = BTreeMap::new();
    for (i, p) in graph.iter().enumerate() {
        b.insert(Atom::fiber(i, MultiIndex::empty()), p.clone());
        for l in 0..n {
            b.insert(Atom::fiber(i, MultiIndex::single(l)), p.partial(&Atom::base(l)));
        }
    }
    b
}

fn random_metric(gen: &mut Gen, n: usize, m: usize) -> MetricSpec {
    let dim = n + m;
    let coords: Vec<Atom> = (0..n)
        .map(Atom::base)
        .chain((0..m).map(|i| Atom::fiber(i, MultiIndex::empty())))
        .collect();
    let mut g = linalg::zeros(dim, dim);
    for a in 0..dim {
        g[a][a] = Expr::int(3) + gen.poly_over(&coords, 1, 2).powi(2);
        for b in 0..a {
            let off = gen.poly_over(&coords, 1, 1) * Expr::frac(1, 5);
            g[a][b] = off.clone();
            g[b][a] = off;
        }
    }
    MetricSpec::new(n, m, g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn first_fundamental_form_pulls_back_to_the_induced_metric(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let (n, m) = gen.dims();
        let metric = random_metric(&mut gen, n, m);
        let graph: Vec<Expr> = (0..m).map(|_| gen.base_poly(n, 2)).collect();
        let bindings = graph_bindings(n, &graph);
        let gh = first_fundamental_form(&metric);
        let dim = n + m;
        let immersion: Matrix = (0..dim)
            .map(|a| {
                (0..n)
                    .map(|l| {
                        if a < n {
                            if a == l { Expr::one() } else { Expr::zero() }
                        } else {
                            graph[a - n].partial(&Atom::base(l))
                        }
                    })
                    .collect()
            })
            .collect();
        for l in 0..n {
            for mu in 0..n {
                let mut direct = Expr::zero();
                for a in 0..dim {
                    for b in 0..dim {
                        let gab = metric.entry(a, b).substitute(&bindings).unwrap();
                        direct = direct + gab * &immersion[a][l] * &immersion[b][mu];
                    }
                }
                let pulled = gh[l][mu].substitute(&bindings).unwrap();
                prop_assert!((pulled - direct).is_identically_zero());
            }
        }
    }

    #[test]
    fn christoffel_symbols_are_symmetric(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let n = gen.rng.gen_range(1..=2);
        let metric = random_metric(&mut gen, n, 1);
        let g = christoffel(&metric).unwrap();
        let dim = n + 1;
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    prop_assert_eq!(&g[a][b][c], &g[a][c][b]);
                }
            }
        }
    }
}

#[test]
fn euclidean_mean_curvature_is_a_multiple_of_the_area_equation() {
    for (n, m) in [(1, 1), (2, 1), (3, 1)] {
        let sub = Submanifolds::new(&MetricSpec::euclidean(n, m)).unwrap();
        let h = sub.mean_curvature_equation();
        let e = euler_lagrange(&sub.area_lagrangian());
        let factor = proportionality_factor(&e.components[0], &h.components[0]).expect("proportional");
        for (a, b) in e.components.iter().zip(&h.components) {
            assert!(a.equivalent(&(&factor * b)), "n = {n}, m = {m}");
        }
    }
}

#[test]
fn normal_frame_is_orthogonal() {
    let ctx = JetContext::new(2, 1, 1).unwrap();
    let g = MetricSpec::diagonal(
        2,
        1,
        vec![Expr::one(), ctx.parse("1 + x^2").unwrap(), ctx.parse("2 + u^2").unwrap()],
    )
    .unwrap();
    let sub = Submanifolds::new(&g).unwrap();
    assert_eq!(sub.normal_frame().unwrap().len(), 1);
    let vm = sub.vertical_metric().unwrap();
    assert!(!vm[0][0].is_identically_zero());
}

#[test]
fn area_theorem_on_a_conformal_metric() {
    let mut ctx = JetContext::new(2, 1, 1).unwrap();
    ctx.declare_function("f", &["x", "y"]).unwrap();
    let g = MetricSpec::diagonal(2, 1, vec![Expr::one(), Expr::one(), ctx.parse("f").unwrap()]).unwrap();
    let sub = Submanifolds::new(&g).unwrap();
    let hess = sub.hessian_area().unwrap();
    assert!(hess.holds);
    for i in 0..1 {
        for l in 0..2 {
            for mu in 0..2 {
                assert!(hess.defining[i][i][l][mu].equivalent(&hess.defining[i][i][mu][l]));
            }
        }
    }
    assert!(sub.euler_lagrange_theorem().unwrap().holds);
}

#[test]
fn swapped_division_gives_the_same_minimal_surface_equation() {
    let g = MetricSpec::euclidean(2, 1).permuted(&[0, 2, 1], 2).unwrap();
    let sub = Submanifolds::new(&g).unwrap();
    let e = euler_lagrange(&sub.area_lagrangian());
    let ctx = JetContext::new(2, 1, 2).unwrap();
    let mse = ctx.parse("(1 + u_y^2)*u_xx - 2*u_x*u_y*u_xy + (1 + u_x^2)*u_yy").unwrap();
    assert!(proportionality_factor(&e.components[0], &mse).is_some());
}

fn curved() -> MetricSpec {
    let mut g = linalg::zeros(4, 4);
    g[0][0] = Expr::one() + Expr::u(0).powi(2);
    for a in 1..4 {
        g[a][a] = Expr::int(-1);
    }
    MetricSpec::new(1, 3, g).unwrap()
}

#[test]
fn proper_velocity_has_norm_c_squared() {
    let model = SpacetimeModel::new(minkowski(), None, None, Constants::default()).unwrap();
    let c = Constants::default().c;
    assert!(model.tau_norm().unwrap().equivalent(&(&c * &c)));
}

#[test]
fn coefficient_matrix_is_symmetric_and_nondegenerate() {
    for metric in [minkowski(), curved()] {
        let model = SpacetimeModel::new(metric, None, None, Constants::default()).unwrap();
        let a = model.coefficient_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert!(a[i][j].equivalent(&a[j][i]));
            }
        }
        assert!(!linalg::det(&a).unwrap().is_identically_zero());
    }
}

#[test]
fn gravitational_form_is_closed_and_matches_display() {
    let flat = SpacetimeModel::new(minkowski(), None, None, Constants::default()).unwrap();
    let rep = flat.gravitational_two_form().unwrap();
    assert!(rep.closed && rep.matches && rep.matches_opposite);
    // On a curved metric the display reproduces dτ only with K = −Γ.
    let bent = SpacetimeModel::new(curved(), None, None, Constants::default()).unwrap();
    let rep = bent.gravitational_two_form().unwrap();
    assert!(rep.closed);
    assert!(!rep.matches);
    assert!(rep.matches_opposite);
}

fn neutral() -> Constants {
    Constants {
        charge: Expr::zero(),
        ..Constants::default()
    }
}

#[test]
fn no_connection_means_no_natural_acceleration() {
    let model = SpacetimeModel::new(minkowski(), None, None, Constants::default()).unwrap();
    assert!(model.gamma_natural().unwrap().iter().all(Expr::is_identically_zero));
}

#[test]
fn motion_equation_scales_with_inverse_hbar() {
    let base = neutral();
    let scaled = Constants {
        hbar: Expr::int(2) * &base.hbar,
        ..base.clone()
    };
    let e1 = SpacetimeModel::new(curved(), None, None, base)
        .unwrap()
        .motion_equation()
        .unwrap()
        .euler_lagrange;
    let e2 = SpacetimeModel::new(curved(), None, None, scaled)
        .unwrap()
        .motion_equation()
        .unwrap()
        .euler_lagrange;
    for (a, b) in e1.components.iter().zip(&e2.components) {
        assert!(a.equivalent(&(Expr::int(2) * b)));
    }
}

#[test]
fn neutral_particles_ignore_potential_and_mass() {
    let ctx = spacetime_context(2);
    let neutral = neutral();
    let heavy = Constants {
        mass: Expr::int(3) * &neutral.mass,
        ..neutral.clone()
    };
    let a: Vec<Expr> = ["t*u2", "u1^2", "0", "u3*t"].iter().map(|s| ctx.parse(s).unwrap()).collect();
    let plain = SpacetimeModel::new(curved(), None, None, neutral.clone())
        .unwrap()
        .motion_equation()
        .unwrap();
    let with_a = SpacetimeModel::new(curved(), Some(a), None, neutral)
        .unwrap()
        .motion_equation()
        .unwrap();
    let massive = SpacetimeModel::new(curved(), None, None, heavy).unwrap().motion_equation().unwrap();
    for i in 0..3 {
        assert!(plain.euler_lagrange.components[i].equivalent(&with_a.euler_lagrange.components[i]));
        let k = massive.euler_lagrange.components[i]
            .checked_div(&plain.euler_lagrange.components[i])
            .unwrap();
        assert!(k.equivalent(&Expr::int(3)));
    }
    for (x, y) in plain.solved_accelerations.iter().zip(&massive.solved_accelerations) {
        assert!(x.equivalent(y));
    }
}

#[test]
fn solved_accelerations_are_the_geodesic_equation() {
    let model = SpacetimeModel::new(curved(), None, None, neutral()).unwrap();
    let rep = model.motion_equation().unwrap();
    let gamma = christoffel(&model.metric).unwrap();
    let v: Vec<Expr> = std::iter::once(Expr::one())
        .chain((0..3).map(|i| Expr::fiber(i, MultiIndex::single(0))))
        .collect();
    for i in 0..3 {
        let mut expected = Expr::zero();
        for a in 0..4 {
            for b in 0..4 {
                let t = &gamma[0][a][b] * &v[i + 1] - &gamma[i + 1][a][b];
                expected = expected + t * &v[a] * &v[b];
            }
        }
        assert!(rep.solved_accelerations[i].equivalent(&expected));
    }
    let kernel = rep.kernel_accelerations.unwrap();
    for (k, a) in kernel.iter().zip(&rep.solved_accelerations) {
        assert!(k.equivalent(a));
    }
}
