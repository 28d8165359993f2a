use std::collections::BTreeMap;

use liesym::adjoint::{apply_adjoint, equivalent, normalize};
use liesym::expr::{canonicalize, eval_numeric, parse, total_derivative, Assignment, Context, Expr, Indep, Symbol};
use liesym::flows::flow_map;
use liesym::symmetry::{bracket, invariance_residual, Generator, PdeInstance};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-5i64..=5).prop_map(Expr::int),
        (1i64..=4, 2i64..=5).prop_map(|(n, d)| Expr::frac(n, d)),
        prop::sample::select(vec!["x", "y", "t", "a", "b", "s", "u", "u_x", "u_xy", "u_tt", "f"]).prop_map(|s| parse(
            s,
            &Context::default()
        )
        .unwrap()),
    ]
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a + &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a - &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a * &b),
            (inner.clone(), 0i64..=2).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.exp()),
            inner.prop_map(|a| (&(&a * &a) + &Expr::one()).recip()),
        ]
    })
}

/// Expressions in `x`, `y`, `a` only, for finite differences.
fn smooth_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        prop::sample::select(vec!["x", "y", "a"]).prop_map(|s| parse(s, &Context::default()).unwrap()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a + &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a * &b),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| (&a * &Expr::frac(1, 4)).exp()),
            inner.prop_map(|a| (&(&a * &a) + &Expr::one()).recip()),
        ]
    })
}

/// Polynomials in the first-order jets of `u` with coefficients in `x, y`.
fn jet_poly() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        prop::sample::select(vec!["x", "y", "u", "u_x", "u_y", "u_t", "u_xy", "u_xx", "f"])
            .prop_map(|s| parse(s, &Context::default()).unwrap()),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![(inner.clone(), inner.clone()).prop_map(|(a, b)| &a + &b), (inner.clone(), inner).prop_map(|(a, b)| &a * &b),]
    })
}

fn poly_coeff() -> impl Strategy<Value = Expr> {
    let mono = (-3i64..=3, prop::sample::select(vec!["1", "x", "y", "t", "u", "f", "x*y", "x*u", "t^2", "y*f"]))
        .prop_map(|(c, m)| &Expr::int(c) * &parse(m, &Context::default()).unwrap());
    prop::collection::vec(mono, 0..3).prop_map(|v| v.into_iter().sum())
}

fn field() -> impl Strategy<Value = Generator> {
    [poly_coeff(), poly_coeff(), poly_coeff(), poly_coeff(), poly_coeff()].prop_map(|c| Generator::new(c).unwrap())
}

fn nonzero_vec() -> impl Strategy<Value = [f64; 5]> {
    prop::array::uniform5(-3.0f64..3.0).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn canonical_form_is_idempotent(e in expr_tree()) {
        let once = canonicalize(&e);
        prop_assert_eq!(&once, &e);
        prop_assert_eq!(canonicalize(&once), once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_parse_round_trip(e in expr_tree()) {
        let text = e.to_string();
        let back = parse(&text, &Context::default()).unwrap();
        prop_assert!(liesym::expr::equals(&back, &e), "{}", text);
        prop_assert_eq!(back, e);
    }

    #[test]
    fn total_derivatives_commute(e in jet_poly()) {
        let xy = total_derivative(&total_derivative(&e, Indep::X).unwrap(), Indep::Y).unwrap();
        let yx = total_derivative(&total_derivative(&e, Indep::Y).unwrap(), Indep::X).unwrap();
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn derivative_matches_finite_differences(e in smooth_tree(), x0 in -1.5f64..1.5, y0 in -1.5f64..1.5) {
        let d = total_derivative(&e, Indep::X).unwrap();
        let at = |x: f64| Assignment::new()
            .set(Symbol::indep(Indep::X), x)
            .set(Symbol::indep(Indep::Y), y0)
            .set(Symbol::param("a"), 0.7);
        let h = 1e-5;
        let (Ok(p), Ok(m), Ok(exact)) = (eval_numeric(&e, &at(x0 + h)), eval_numeric(&e, &at(x0 - h)), eval_numeric(&d, &at(x0))) else {
            return Ok(());
        };
        let fd = (p - m) / (2.0 * h);
        prop_assume!(exact.is_finite() && fd.is_finite() && exact.abs() < 1e6);
        prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{} vs {}", fd, exact);
    }

    #[test]
    fn total_derivative_follows_a_concrete_solution(e in jet_poly(), x0 in -1.0f64..1.0, y0 in -1.0f64..1.0) {
        // u = sin(x) * y^2 + x*t, f = x*y; jets replaced by exact partials
        let ctx = Context::default();
        let u = parse("sin(x)*y^2 + x*t", &ctx).unwrap();
        let concrete = |g: &Expr| -> Expr {
            let mut bind = BTreeMap::new();
            for s in g.free_symbols() {
                if s.base() == Some("u") {
                    let j = s.jet_index().unwrap();
                    let d = j.indices().iter().fold(u.clone(), |acc, &v| acc.diff(&Symbol::Independent(v)));
                    bind.insert(s, d);
                } else if s.base() == Some("f") {
                    let j = s.jet_index().unwrap();
                    let d = j.indices().iter().fold(parse("x*y", &ctx).unwrap(), |acc, &v| acc.diff(&Symbol::Independent(v)));
                    bind.insert(s, d);
                }
            }
            liesym::expr::substitute(g, &bind).unwrap()
        };
        let d = total_derivative(&e, Indep::X).unwrap();
        let at = |x: f64| Assignment::new()
            .set(Symbol::indep(Indep::X), x)
            .set(Symbol::indep(Indep::Y), y0)
            .set(Symbol::indep(Indep::T), 0.3);
        let h = 1e-5;
        let ce = concrete(&e);
        let fd = (eval_numeric(&ce, &at(x0 + h)).unwrap() - eval_numeric(&ce, &at(x0 - h)).unwrap()) / (2.0 * h);
        let exact = eval_numeric(&concrete(&d), &at(x0)).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{} vs {}", fd, exact);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bracket_is_antisymmetric(v in field(), w in field()) {
        let lhs = bracket(&v, &w);
        let rhs = bracket(&w, &v).scale(&Expr::int(-1));
        prop_assert_eq!(lhs.coefficients(), rhs.coefficients());
    }

    #[test]
    fn jacobi_identity(u in field(), v in field(), w in field()) {
        let s = bracket(&u, &bracket(&v, &w)).add(&bracket(&v, &bracket(&w, &u))).add(&bracket(&w, &bracket(&u, &v)));
        prop_assert!(s.is_zero());
    }

    #[test]
    fn orbit_invariance(v in nonzero_vec(),
                        word in prop::collection::vec((1usize..=5, -3.0f64..3.0), 3),
                        lambda in prop_oneof![-4.0f64..-0.2, 0.2f64..4.0]) {
        let w = apply_adjoint(&word, &v).unwrap().map(|x| lambda * x);
        prop_assert!(equivalent(&v, &w).unwrap());
    }

    #[test]
    fn normalization_reproduces_representative(v in nonzero_vec()) {
        let n = normalize(&v).unwrap();
        let w = apply_adjoint(&n.word, &v).unwrap().map(|x| x * n.scale);
        let rep = n.class.representative();
        prop_assert!(w.iter().zip(rep).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs())), "{:?} vs {:?}", w, rep);
        let again = normalize(&rep).unwrap();
        prop_assert!(again.word.is_empty());
        prop_assert_eq!(again.class.id, n.class.id);
    }

    #[test]
    fn flow_group_law(c in prop::array::uniform3(-3i64..=3), k in -2i64..=2,
                      seed in prop::array::uniform3(-2.0f64..2.0), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = Generator::basis(1).scale(&Expr::int(c[0]))
            .add(&Generator::basis(2).scale(&Expr::int(c[1])))
            .add(&Generator::basis(3).scale(&Expr::int(c[2])))
            .add(&Generator::basis(4).scale(&Expr::int(k)));
        let fm = flow_map(&g).unwrap();
        let two = fm.evaluate(fm.evaluate(seed, b).unwrap(), a).unwrap();
        let one = fm.evaluate(seed, a + b).unwrap();
        prop_assert!(two.iter().zip(one).all(|(p, q)| (p - q).abs() < 1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn residual_is_linear(v in field(), w in field(), al in -4i64..=4, be in -4i64..=4) {
        let pde = PdeInstance::viscoelastic();
        let (al, be) = (Expr::int(al), Expr::int(be));
        let lhs = invariance_residual(&v.scale(&al).add(&w.scale(&be)), &pde).unwrap();
        let rhs = &(&al * &invariance_residual(&v, &pde).unwrap()) + &(&be * &invariance_residual(&w, &pde).unwrap());
        prop_assert_eq!(lhs, rhs);
    }
}
