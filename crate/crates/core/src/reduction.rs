//! Similarity variables of catalog generators, reduction of the equation to
//! two independent variables, and numeric verification of reductions.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{eval_numeric, parse, Assignment, Context, Expr, ExprError, Indep, JetIndex, Symbol, SymbolKind};
use crate::symmetry::{Generator, PdeInstance};

pub const CATALOG: &str = "c1*X1 + c2*X2 + c3*X3 with constant coefficients (not all zero), k*X4, or k*X4 + c3*X3 with c3 != 0";

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("unsupported generator {generator}; supported: {CATALOG}")]
    Unsupported { generator: String },
    #[error("the zero field has no invariants")]
    ZeroGenerator,
    #[error("reduced residual still depends on {symbols}: {residual}")]
    NotReduced { symbols: String, residual: String },
}

/// Invariant coordinates `(xi, eta)` of a generator together with a
/// transverse coordinate `tau` completing them to a chart of `(x, y, t)`.
#[derive(Clone, Debug)]
pub struct SimilarityChart {
    pub generator: Generator,
    pub xi: Expr,
    pub eta: Expr,
    /// `(x, y, t)` as functions of `(xi, eta, tau)`.
    pub inverse: [Expr; 3],
    /// `u = h(xi, eta)`.
    pub u_subst: Expr,
    /// `f = g(xi, eta)`.
    pub f_subst: Expr,
}

fn base_syms() -> [Symbol; 3] {
    [Symbol::Independent(Indep::X), Symbol::Independent(Indep::Y), Symbol::Independent(Indep::T)]
}

fn tau() -> Expr {
    Expr::param("tau")
}

fn is_constant(e: &Expr) -> bool {
    e.free_symbols().iter().all(|s| s.kind() == SymbolKind::Parameter)
}

impl SimilarityChart {
    /// A chart from explicit invariants and inverse map.
    pub fn custom(generator: Generator, xi: Expr, eta: Expr, inverse: [Expr; 3]) -> SimilarityChart {
        SimilarityChart { generator, xi, eta, inverse, u_subst: Expr::dep("h"), f_subst: Expr::dep("g") }
    }

    /// `V(xi) = V(eta) = 0` symbolically.
    pub fn is_invariant(&self) -> bool {
        self.generator.apply(&self.xi).is_zero() && self.generator.apply(&self.eta).is_zero()
    }

    /// Rank of the Jacobian of `(xi, eta)` with respect to `(x, y, t)` is 2
    /// at `points` random points in `[-2, 2]^3`.
    pub fn has_full_rank(&self, points: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grads: Vec<Vec<Expr>> = [&self.xi, &self.eta].iter().map(|e| base_syms().iter().map(|s| e.diff(s)).collect()).collect();
        (0..points).all(|_| {
            let asg = random_base_point(&mut rng);
            let j: Vec<Vec<f64>> =
                grads.iter().map(|row| row.iter().map(|e| eval_numeric(e, &asg).unwrap_or(f64::NAN)).collect()).collect();
            let minors = [(0, 1), (0, 2), (1, 2)].map(|(p, q)| j[0][p] * j[1][q] - j[0][q] * j[1][p]);
            minors.iter().any(|m| m.abs() > 1e-9)
        })
    }
}

fn random_base_point(rng: &mut impl Rng) -> Assignment {
    let mut asg = Assignment::new();
    for s in base_syms() {
        asg.insert(s, rng.gen_range(-2.0..2.0));
    }
    asg
}

/// Two functionally independent invariants of a catalog generator.
///
/// For `c1 ∂x + c2 ∂y + c3 ∂t` the pivot is the last variable with a nonzero
/// coefficient; every other variable `v` contributes `v` itself when its
/// coefficient vanishes and `v - (c_v/c_p) p` otherwise, in the order
/// `x, y, t`. Rotations use `x^2 + y^2` and `t`, or `atan2(y, x) + t/c3`
/// when combined with a time translation.
pub fn characteristic_invariants(v: &Generator) -> Result<SimilarityChart, ReductionError> {
    if v.is_zero() {
        return Err(ReductionError::ZeroGenerator);
    }
    let unsupported = || ReductionError::Unsupported { generator: v.to_string() };
    if !v.phi1().is_zero() || !v.phi2().is_zero() {
        return Err(unsupported());
    }
    let [x, y, t] = base_syms().map(Expr::symbol);
    let c = v.base_part();
    if c.iter().all(|e| is_constant(e)) {
        let pivot = (0..3).rev().find(|&i| !c[i].is_zero()).expect("nonzero field");
        let coords = [&x, &y, &t];
        let chart_vars = [Expr::indep(Indep::Xi), Expr::indep(Indep::Eta)];
        let mut invariants = Vec::new();
        let mut inverse: [Expr; 3] = std::array::from_fn(|_| Expr::zero());
        inverse[pivot] = tau();
        for i in (0..3).filter(|&i| i != pivot) {
            let var = &chart_vars[invariants.len()];
            if c[i].is_zero() {
                invariants.push(coords[i].clone());
                inverse[i] = var.clone();
            } else {
                let ratio = c[i] * &c[pivot].recip();
                invariants.push(coords[i] - &(&ratio * coords[pivot]));
                inverse[i] = var + &(&ratio * &tau());
            }
        }
        let eta = invariants.pop().expect("two invariants");
        let xi = invariants.pop().expect("two invariants");
        return Ok(SimilarityChart::custom(v.clone(), xi, eta, inverse));
    }
    // k (y ∂x - x ∂y) + c3 ∂t
    let k = c[0].diff(&Symbol::Independent(Indep::Y));
    let is_rotation = !k.is_zero() && is_constant(&k) && *c[0] == &k * &y && *c[1] == -(&k * &x) && is_constant(c[2]);
    if !is_rotation {
        return Err(unsupported());
    }
    let r2 = &(&x * &x) + &(&y * &y);
    let (xi_v, eta_v) = (Expr::indep(Indep::Xi), Expr::indep(Indep::Eta));
    let root = xi_v.sqrt();
    let (cx, sy) = (&root * &tau().cos(), &root * &tau().sin());
    if c[2].is_zero() {
        return Ok(SimilarityChart::custom(v.clone(), r2, t, [cx, sy, eta_v]));
    }
    let c3 = c[2] * &k.recip();
    let eta = &y.atan2(&x) + &(&t * &c3.recip());
    let t_inv = &c3 * &(&eta_v - &tau());
    Ok(SimilarityChart::custom(v.clone(), r2, eta, [cx, sy, t_inv]))
}

/// A residual in the jets of `h` and in `g` over `(xi, eta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPde {
    pub residual: Expr,
}

/// `D_v` of an expression in `(x, y, t)` and the jets of `h`, where `h`
/// depends on `(x, y, t)` only through the chart.
fn chart_derivative(e: &Expr, v: Indep, grad: &BTreeMap<Indep, [Expr; 2]>) -> Result<Expr, ExprError> {
    let mut parts = vec![e.diff(&Symbol::Independent(v))];
    let [dxi, deta] = &grad[&v];
    for s in e.free_symbols() {
        if s.base() != Some("h") {
            continue;
        }
        let de = e.diff(&s);
        if de.is_zero() {
            continue;
        }
        let along = |w: Indep| -> Result<Expr, ExprError> { Ok(Expr::symbol(s.jet_append(w)?.expect("dependent"))) };
        let chain = &(dxi * &along(Indep::Xi)?) + &(deta * &along(Indep::Eta)?);
        parts.push(&de * &chain);
    }
    Ok(parts.into_iter().sum())
}

/// Substitutes `u = h(xi, eta)`, `f = g(xi, eta)` into the residual, expands
/// every derivative by the chain rule and rewrites the result in `(xi, eta)`.
pub fn reduce_pde(pde: &PdeInstance, chart: &SimilarityChart) -> Result<ReducedPde, ReductionError> {
    let grad: BTreeMap<Indep, [Expr; 2]> = Indep::BASE
        .iter()
        .map(|&v| {
            let s = Symbol::Independent(v);
            (v, [chart.xi.diff(&s), chart.eta.diff(&s)])
        })
        .collect();
    let mut images: BTreeMap<JetIndex, Expr> = BTreeMap::new();
    images.insert(JetIndex::new(Vec::new()), chart.u_subst.clone());
    let mut bind: BTreeMap<Symbol, Expr> = BTreeMap::new();
    let mut jets: Vec<(Symbol, JetIndex)> =
        pde.residual().free_symbols().into_iter().filter(|s| s.base() == Some("u")).filter_map(|s| s.jet_index().map(|j| (s, j))).collect();
    jets.sort_by_key(|(_, j)| j.order());
    for (s, j) in jets {
        let img = jet_image(&j, &mut images, &grad)?;
        bind.insert(s, img);
    }
    bind.insert(Symbol::dep("f"), chart.f_subst.clone());
    let in_base = pde.residual().subst_with(&bind)?;
    let back: BTreeMap<Symbol, Expr> = base_syms().into_iter().zip(chart.inverse.iter().cloned()).collect();
    let residual = in_base.subst_with(&back)?;
    let leftover: BTreeSet<String> = residual
        .free_symbols()
        .iter()
        .filter(|s| {
            matches!(s, Symbol::Independent(Indep::X | Indep::Y | Indep::T))
                || s.base().is_some_and(|b| b == "u" || b == "f")
                || **s == Symbol::param("tau")
        })
        .map(|s| s.to_string())
        .collect();
    if !leftover.is_empty() {
        return Err(ReductionError::NotReduced {
            symbols: leftover.into_iter().collect::<Vec<_>>().join(", "),
            residual: residual.to_string(),
        });
    }
    Ok(ReducedPde { residual })
}

fn jet_image(j: &JetIndex, images: &mut BTreeMap<JetIndex, Expr>, grad: &BTreeMap<Indep, [Expr; 2]>) -> Result<Expr, ExprError> {
    if let Some(e) = images.get(j) {
        return Ok(e.clone());
    }
    let last = *j.indices().last().expect("nonempty index");
    let parent = jet_image(&j.without(last).expect("present"), images, grad)?;
    let e = chart_derivative(&parent, last, grad)?;
    images.insert(j.clone(), e.clone());
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReductionReport {
    pub max_discrepancy: f64,
    pub seed: u64,
    pub passed: bool,
    pub functions: usize,
    pub points: usize,
}

pub const REDUCTION_TOLERANCE: f64 = 1e-7;

/// Random polynomial of total degree 4 in `(xi, eta)` with coefficients in
/// `[-1, 1]` quantised to sixteenths.
fn random_bivariate(rng: &mut impl Rng) -> Expr {
    let (xi, eta) = (Expr::indep(Indep::Xi), Expr::indep(Indep::Eta));
    let mut e = Expr::zero();
    for i in 0..=4 {
        for j in 0..=(4 - i) {
            let c = Expr::frac(rng.gen_range(-16..=16), 16);
            e = &e + &(&c * &(&xi.powi(i) * &eta.powi(j)));
        }
    }
    e
}

/// Compares the original residual of `u = h∘chart`, `f = g∘chart` at random
/// base points with `reduced` at the image points, for random polynomial
/// `h` and `g`. The composite is differentiated directly in `(x, y, t)`.
pub fn verify_reduction(pde: &PdeInstance, chart: &SimilarityChart, reduced: &ReducedPde, seed: u64) -> VerifyReductionReport {
    const FUNCTIONS: usize = 10;
    const POINTS: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let to_chart: BTreeMap<Symbol, Expr> =
        [(Symbol::Independent(Indep::Xi), chart.xi.clone()), (Symbol::Independent(Indep::Eta), chart.eta.clone())].into_iter().collect();
    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    for _ in 0..FUNCTIONS {
        let (h, g) = (random_bivariate(&mut rng), random_bivariate(&mut rng));
        let u_of_xyt = h.subst_with(&to_chart).expect("symbol substitution");
        let f_of_xyt = g.subst_with(&to_chart).expect("symbol substitution");
        let mut original = BTreeMap::new();
        let mut reduced_bind = BTreeMap::new();
        for s in pde.residual().free_symbols() {
            match s.base() {
                Some("u") => {
                    let idx = s.jet_index().expect("jet");
                    let d = idx.indices().iter().fold(u_of_xyt.clone(), |e, &v| e.diff(&Symbol::Independent(v)));
                    original.insert(s, d);
                }
                Some("f") => {
                    original.insert(s, f_of_xyt.clone());
                }
                _ => {}
            }
        }
        for s in reduced.residual.free_symbols() {
            match s.base() {
                Some("h") => {
                    let idx = s.jet_index().expect("jet");
                    let d = idx.indices().iter().fold(h.clone(), |e, &v| e.diff(&Symbol::Independent(v)));
                    reduced_bind.insert(s, d);
                }
                Some("g") => {
                    reduced_bind.insert(s, g.clone());
                }
                _ => {}
            }
        }
        let lhs = pde.residual().subst_with(&original).expect("symbol substitution");
        let rhs = reduced.residual.subst_with(&reduced_bind).expect("symbol substitution");
        let mut done = 0;
        let mut attempts = 0;
        while done < POINTS && attempts < 50 * POINTS {
            attempts += 1;
            let mut asg = random_base_point(&mut rng);
            for p in lhs.free_symbols().into_iter().chain(rhs.free_symbols()) {
                if p.kind() == SymbolKind::Parameter && asg.lookup(&p).is_err() {
                    asg.insert(p, rng.gen_range(0.5..2.0));
                }
            }
            let (Ok(xi), Ok(eta)) = (eval_numeric(&chart.xi, &asg), eval_numeric(&chart.eta, &asg)) else { continue };
            let Ok(a) = eval_numeric(&lhs, &asg) else { continue };
            let mut at_chart = asg.clone();
            at_chart.insert(Symbol::Independent(Indep::Xi), xi);
            at_chart.insert(Symbol::Independent(Indep::Eta), eta);
            let Ok(b) = eval_numeric(&rhs, &at_chart) else { continue };
            worst = worst.max((a - b).abs());
            done += 1;
            evaluated += 1;
        }
    }
    VerifyReductionReport {
        max_discrepancy: worst,
        seed,
        passed: evaluated == FUNCTIONS * POINTS && worst < REDUCTION_TOLERANCE,
        functions: FUNCTIONS,
        points: POINTS,
    }
}

/// Generators of the charts with a printed reduction, in row order.
pub const PRINTED_CHART_GENERATORS: [&str; 5] = ["X1", "X2", "X3", "X1 + X3", "X2 + X3"];

/// Invariants printed next to each chart, `(xi, eta)`.
pub const PRINTED_INVARIANTS: [(&str, &str); 5] = [("y", "t"), ("x", "t"), ("x", "y"), ("x - t", "y"), ("x", "y - t")];

/// Reduced equations as printed, one per chart, residual form.
pub const PRINTED_REDUCTIONS: [&str; 5] = [
    "h_etaeta - a*h_xixieta - a*h_etaetaeta - b*h_xixi - b*h_etaeta - g",
    "h_etaeta - a*h_xixieta - a*h_etaetaeta - b*h_xixi - b*h_etaeta - g",
    "h_etaeta - a*h_xixieta - a*h_etaetaeta - b*h_xixi - b*h_etaeta - g",
    "h_xixi + a*h_xixieta + a*h_etaetaxi + a*h_xixixi - b*h_xixi - b*h_etaeta - b*h_xixi - g",
    "h_etaeta + a*h_xixieta + a*h_etaetaeta + a*h_etaetaeta - b*h_xixi - b*h_xixi - b*h_etaeta - b*h_etaeta - g",
];

/// Coefficient of one jet monomial in the computed and printed residuals.
#[derive(Clone, Debug, PartialEq)]
pub struct TermDiff {
    pub term: String,
    pub computed: Expr,
    pub printed: Expr,
}

/// Linear residuals compared coefficient by coefficient over the jets of
/// `h` and `g`.
pub fn term_diff(computed: &Expr, printed: &Expr) -> Vec<TermDiff> {
    let vars: BTreeSet<Symbol> =
        computed.free_symbols().into_iter().chain(printed.free_symbols()).filter(|s| matches!(s.base(), Some("h" | "g"))).collect();
    let mut out = Vec::new();
    for s in vars {
        let (c, p) = (computed.diff(&s), printed.diff(&s));
        if c != p {
            out.push(TermDiff { term: s.to_string(), computed: c, printed: p });
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct PrintedRowAudit {
    pub row: usize,
    pub generator: String,
    pub computed: Expr,
    pub printed: Expr,
    pub diff: Vec<TermDiff>,
    /// Other rows whose printed text is identical.
    pub duplicate_of: Vec<usize>,
    pub printed_verify: VerifyReductionReport,
}

pub fn reduction_context() -> Context {
    Context::default()
}

/// Reduces every chart with a printed row and compares.
pub fn audit_printed_reductions(seed: u64) -> Result<Vec<PrintedRowAudit>, ReductionError> {
    let ctx = reduction_context();
    let pde = PdeInstance::viscoelastic();
    let mut out = Vec::new();
    for (i, spec) in PRINTED_CHART_GENERATORS.iter().enumerate() {
        let g = Generator::parse_combination(spec, &ctx).map_err(|e| ReductionError::Unsupported { generator: e.to_string() })?;
        let chart = characteristic_invariants(&g)?;
        let computed = reduce_pde(&pde, &chart)?.residual;
        let printed = parse(PRINTED_REDUCTIONS[i], &ctx)?;
        let duplicate_of =
            (0..PRINTED_REDUCTIONS.len()).filter(|&j| j != i && PRINTED_REDUCTIONS[j] == PRINTED_REDUCTIONS[i]).map(|j| j + 1).collect();
        let printed_verify = verify_reduction(&pde, &chart, &ReducedPde { residual: printed.clone() }, seed);
        out.push(PrintedRowAudit {
            row: i + 1,
            generator: spec.to_string(),
            diff: term_diff(&computed, &printed),
            computed,
            printed,
            duplicate_of,
            printed_verify,
        });
    }
    Ok(out)
}
