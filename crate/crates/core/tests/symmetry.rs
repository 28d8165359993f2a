use std::collections::BTreeMap;

use liesym::expr::{eval_numeric, parse, random_assignment, Assignment, Context, Expr, Symbol};
use liesym::symmetry::{
    bracket, commutator_table, determining_equations, invariance_residual, prolong, verify_symmetry, Generator, PdeInstance,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn p(s: &str) -> Expr {
    parse(s, &Context::default()).unwrap()
}

#[test]
fn basis_and_f2_family_are_symmetries() {
    let pde = PdeInstance::viscoelastic();
    let mut all = Generator::basis_all();
    all.push(Generator::f2_family());
    all.push(Generator::general_element());
    for g in &all {
        let r = verify_symmetry(g, &pde, 42).unwrap();
        assert!(r.is_symmetry, "{:?}: {}", g.label, r.residual);
        assert!(r.residual.is_zero());
    }
}

#[test]
fn table_of_brackets() {
    let t = commutator_table(&Generator::basis_all()).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let expected = match (i + 1, j + 1) {
                (1, 4) => "-X2",
                (4, 1) => "X2",
                (2, 4) => "X1",
                (4, 2) => "-X1",
                _ => "0",
            };
            assert_eq!(t.entry(i, j).to_string(), expected, "[X{}, X{}]", i + 1, j + 1);
        }
    }
    assert!(t.is_antisymmetric());
    assert!(t.satisfies_jacobi());
}

#[test]
fn center_and_abelian_pairs() {
    let center = commutator_table(&[Generator::basis(3), Generator::basis(5)]).unwrap();
    assert!(center.is_zero());
    let pair = commutator_table(&[Generator::basis(1), Generator::basis(2)]).unwrap();
    assert!(pair.is_zero());
}

#[test]
fn brackets_of_family_with_basis() {
    // [X1, XF2] replaces F2 by its x-derivative; stays a symmetry
    let pde = PdeInstance::viscoelastic();
    let b = bracket(&Generator::basis(1), &Generator::f2_family());
    assert!(verify_symmetry(&b, &pde, 1).unwrap().is_symmetry);
}

/// Rotation prolongation against the transformed graph: the slope of
/// `ũ = u ∘ g_{-e}` at `g_e(p)`, differentiated in `e` at 0.
#[test]
fn rotation_prolongation_matches_finite_differences() {
    let pr = prolong(&Generator::basis(4), 1).unwrap();
    let u = |x: f64, y: f64| x * x * y + 3.0 * x;
    let g = |e: f64, x: f64, y: f64| (x * e.cos() + y * e.sin(), y * e.cos() - x * e.sin());
    let (x0, y0) = (0.7, -0.4);
    let slope = |e: f64, dir: usize| {
        let (px, py) = g(e, x0, y0);
        let d = 1e-5;
        let (dx, dy) = if dir == 0 { (d, 0.0) } else { (0.0, d) };
        let ut = |x: f64, y: f64| {
            let (a, b) = g(-e, x, y);
            u(a, b)
        };
        (ut(px + dx, py + dy) - ut(px - dx, py - dy)) / (2.0 * d)
    };
    let h = 1e-4;
    let asg =
        Assignment::new().set(Symbol::jet_str("u", "x").unwrap(), 2.0 * x0 * y0 + 3.0).set(Symbol::jet_str("u", "y").unwrap(), x0 * x0);
    for (dir, name) in ["x", "y"].iter().enumerate() {
        let fd = (slope(h, dir) - slope(-h, dir)) / (2.0 * h);
        let sym = eval_numeric(&pr[&Symbol::jet_str("u", name).unwrap()], &asg).unwrap();
        assert!((fd - sym).abs() < 1e-4, "u_{name}: {fd} vs {sym}");
    }
}

#[test]
fn dilation_residual_is_nonzero_on_shell() {
    let pde = PdeInstance::viscoelastic();
    let v = Generator::from_strings(["x", "0", "0", "0", "0"], &Context::default()).unwrap();
    let r = invariance_residual(&v, &pde).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let asg = random_assignment(&r, &mut rng);
    assert!(eval_numeric(&r, &asg).unwrap().abs() > 1e-6);
}

#[test]
fn residual_is_linear_in_the_generator() {
    let pde = PdeInstance::viscoelastic();
    let ctx = Context::default();
    let v = Generator::from_strings(["x*t", "y^2", "u", "x*u", "f*t"], &ctx).unwrap();
    let w = Generator::from_strings(["t^2", "x*y", "1", "u*y", "f"], &ctx).unwrap();
    let (al, be) = (Expr::frac(3, 2), Expr::param("c1"));
    let lhs = invariance_residual(&v.scale(&al).add(&w.scale(&be)), &pde).unwrap();
    let rhs = &(&al * &invariance_residual(&v, &pde).unwrap()) + &(&be * &invariance_residual(&w, &pde).unwrap());
    assert_eq!(lhs, rhs);
}

#[test]
fn full_ansatz_is_solved_by_general_solution() {
    let pde = PdeInstance::viscoelastic();
    let sys = determining_equations(&Generator::ansatz(), &pde).unwrap();
    assert!(sys.len() > 20, "{}", sys.len());
    let defs: BTreeMap<_, _> = Generator::general_solution().into_iter().collect();
    for (eq, value) in sys.equations.iter().zip(sys.evaluate_at(&defs).unwrap()) {
        assert!(value.is_zero(), "coefficient of {}: {}", eq.monomial, value);
    }
    // a wrong candidate is caught
    let mut bad = defs.clone();
    let args: Vec<Symbol> = liesym::symmetry::point_symbols().to_vec();
    bad.insert("xi1".into(), liesym::expr::FunctionDef::new(&args, p("t")));
    assert!(sys.evaluate_at(&bad).unwrap().iter().any(|e| !e.is_zero()));
}
