use liesym::expr::{parse, Context, Expr, Indep};
use liesym::reduction::{
    audit_printed_reductions, characteristic_invariants, reduce_pde, verify_reduction, ReducedPde, SimilarityChart,
    PRINTED_CHART_GENERATORS, PRINTED_INVARIANTS,
};
use liesym::symmetry::{Generator, PdeInstance};

fn gen(s: &str) -> Generator {
    Generator::parse_combination(s, &Context::default()).unwrap()
}

fn p(s: &str) -> Expr {
    parse(s, &Context::default()).unwrap()
}

#[test]
fn printed_invariants_reproduced() {
    for (g, (xi, eta)) in PRINTED_CHART_GENERATORS.iter().zip(PRINTED_INVARIANTS) {
        let c = characteristic_invariants(&gen(g)).unwrap();
        assert_eq!((c.xi.clone(), c.eta.clone()), (p(xi), p(eta)), "{g}");
        assert!(c.is_invariant());
    }
}

#[test]
fn every_catalog_reduction_verifies() {
    let pde = PdeInstance::viscoelastic();
    for g in ["X1", "X2", "X3", "X1 + X3", "X2 + X3", "X4", "X4 + 3*X3", "2*X1 - X2 + 5*X3"] {
        let chart = characteristic_invariants(&gen(g)).unwrap();
        assert!(chart.has_full_rank(5, 9), "{g}");
        let red = reduce_pde(&pde, &chart).unwrap();
        let rep = verify_reduction(&pde, &chart, &red, 42);
        assert!(rep.passed, "{g}: {} ({})", rep.max_discrepancy, red.residual);
    }
}

#[test]
fn wrong_candidates_fail() {
    let pde = PdeInstance::viscoelastic();
    let chart = characteristic_invariants(&gen("X1")).unwrap();
    let zero = ReducedPde { residual: Expr::zero() };
    assert!(!verify_reduction(&pde, &chart, &zero, 42).passed);
}

#[test]
fn reduced_equations_are_linear() {
    let pde = PdeInstance::viscoelastic();
    for g in ["X1", "X4", "X4 + 3*X3"] {
        let red = reduce_pde(&pde, &characteristic_invariants(&gen(g)).unwrap()).unwrap();
        for s in red.residual.free_symbols() {
            if matches!(s.base(), Some("h" | "g")) {
                assert!(red.residual.diff(&s).diff(&s).is_zero());
            }
        }
    }
}

#[test]
fn alternative_chart_gives_same_verdicts() {
    // X1 + X3 with (x - t + y, y + t - x)
    let pde = PdeInstance::viscoelastic();
    let g = gen("X1 + X3");
    let xi = p("x - t + y");
    let eta = p("y + t - x");
    let (xv, ev, tau) = (Expr::indep(Indep::Xi), Expr::indep(Indep::Eta), Expr::param("tau"));
    // y = (xi + eta)/2, x - t = (xi - eta)/2, t = tau
    let half = Expr::frac(1, 2);
    let inverse = [&(&half * &(&xv - &ev)) + &tau, &half * &(&xv + &ev), tau.clone()];
    let alt = SimilarityChart::custom(g.clone(), xi, eta, inverse);
    assert!(alt.is_invariant());
    let std = characteristic_invariants(&g).unwrap();
    for chart in [&std, &alt] {
        let red = reduce_pde(&pde, chart).unwrap();
        assert!(verify_reduction(&pde, chart, &red, 5).passed);
        assert!(!verify_reduction(&pde, chart, &ReducedPde { residual: Expr::zero() }, 5).passed);
    }
}

#[test]
fn printed_rows_audit() {
    let audit = audit_printed_reductions(42).unwrap();
    let with_diffs: Vec<usize> = audit.iter().filter(|r| !r.diff.is_empty()).map(|r| r.row).collect();
    for row in [1, 3, 4, 5] {
        assert!(with_diffs.contains(&row));
    }
    assert_eq!(audit[0].duplicate_of, vec![2, 3]);
    assert!(audit[3].duplicate_of.is_empty());
    assert!(audit.iter().all(|r| !r.printed_verify.passed));
}
