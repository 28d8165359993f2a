//! Closed-form one-parameter flows of affine generators on `(x, y, t)` and
//! sampled trajectories.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{eval_numeric, Assignment, Expr, ExprError, Indep, Rational, Symbol, SymbolKind};
use crate::symmetry::Generator;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("coefficient `{0}` is not affine in (x, y, t) with rational linear part")]
    NonAffine(String),
    #[error("linear part is neither nilpotent nor a rotation; no closed form")]
    NoClosedForm,
    #[error("no seed points")]
    NoSeeds,
    #[error("invalid parameter range {lo}:{hi}:{n}; need lo < hi and n >= 2")]
    BadRange { lo: f64, hi: f64, n: usize },
}

/// `(x(eps), y(eps), t(eps))` in terms of the initial point and `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowMap {
    pub components: [Expr; 3],
}

pub fn eps() -> Symbol {
    Symbol::param("eps")
}

fn base() -> [Symbol; 3] {
    Indep::BASE.map(Symbol::Independent)
}

type Mat = [[Rational; 3]; 3];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).fold(Rational::zero(), |s, k| s + &a[i][k] * &b[k][j])))
}

fn apply(a: &Mat, v: &[Expr; 3]) -> [Expr; 3] {
    std::array::from_fn(|i| (0..3).map(|k| &Expr::rational(a[i][k].clone()) * &v[k]).sum())
}

fn is_zero(a: &Mat) -> bool {
    a.iter().flatten().all(Zero::is_zero)
}

fn add(a: &[Expr; 3], b: &[Expr; 3], k: &Expr) -> [Expr; 3] {
    std::array::from_fn(|i| &a[i] + &(k * &b[i]))
}

/// Exact flow of `V` restricted to `(x, y, t)`: the exponential of the
/// affine system `z' = A z + b`.
pub fn flow_map(v: &Generator) -> Result<FlowMap, FlowError> {
    let vars = base();
    let mut a: Mat = std::array::from_fn(|_| std::array::from_fn(|_| Rational::zero()));
    let mut b: [Expr; 3] = std::array::from_fn(|_| Expr::zero());
    for (i, c) in v.base_part().iter().enumerate() {
        let mut rest = (*c).clone();
        for (j, s) in vars.iter().enumerate() {
            let d = c.diff(s);
            let q = d.as_rational().ok_or_else(|| FlowError::NonAffine(c.to_string()))?;
            rest = &rest - &(&d * &Expr::symbol(s.clone()));
            a[i][j] = q;
        }
        if rest.free_symbols().iter().any(|s| s.kind() != SymbolKind::Parameter) {
            return Err(FlowError::NonAffine(c.to_string()));
        }
        b[i] = rest;
    }
    let z: [Expr; 3] = vars.clone().map(Expr::symbol);
    let e = Expr::symbol(eps());
    let a2 = mat_mul(&a, &a);
    let a3 = mat_mul(&a2, &a);
    let components = if is_zero(&a3) {
        // exp(eA) z + Σ e^{n+1}/(n+1)! A^n b
        let (e2, e3) = (&(&e * &e) * &Expr::frac(1, 2), &(&(&e * &e) * &e) * &Expr::frac(1, 6));
        let mut out = add(&add(&z, &apply(&a, &z), &e), &apply(&a2, &z), &e2);
        out = add(&out, &b, &e);
        out = add(&out, &apply(&a, &b), &e2);
        add(&out, &apply(&a2, &b), &e3)
    } else {
        let w = rotation_frequency(&a, &a3).ok_or(FlowError::NoClosedForm)?;
        let wq = Expr::rational(w.clone());
        let inv = Expr::rational(Rational::one() / &w);
        let we = &wq * &e;
        let (sn, cs) = (we.sin(), we.cos());
        let one_minus_cos = &Expr::one() - &cs;
        let inv2 = &inv * &inv;
        // exp(eA) = I + sin(we)/w A + (1 - cos(we))/w^2 A^2
        let mut out = add(&add(&z, &apply(&a, &z), &(&sn * &inv)), &apply(&a2, &z), &(&one_minus_cos * &inv2));
        // ∫_0^e exp(sA) ds = e I + (1 - cos(we))/w^2 A + (e/w^2 - sin(we)/w^3) A^2
        out = add(&out, &b, &e);
        out = add(&out, &apply(&a, &b), &(&one_minus_cos * &inv2));
        add(&out, &apply(&a2, &b), &(&(&e * &inv2) - &(&sn * &(&inv2 * &inv))))
    };
    Ok(FlowMap { components })
}

fn rotation_frequency(a: &Mat, a3: &Mat) -> Option<Rational> {
    let (i, j) = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero())?;
    let w2 = -(&a3[i][j] / &a[i][j]);
    if !w2.is_positive() || !(0..3).all(|i| (0..3).all(|j| a3[i][j] == -(&w2 * &a[i][j]))) {
        return None;
    }
    let (n, d) = (w2.numer().sqrt(), w2.denom().sqrt());
    (&n * &n == *w2.numer() && &d * &d == *w2.denom()).then(|| Rational::new(n, d))
}

impl FlowMap {
    /// `Φ_eps` with `eps` replaced by `value` symbolically.
    pub fn at(&self, value: &Expr) -> [Expr; 3] {
        let bind = [(eps(), value.clone())].into_iter().collect();
        self.components.clone().map(|c| c.subst_with(&bind).expect("symbol substitution"))
    }

    /// `Φ_a ∘ Φ_b`: the point moved by `b` first.
    pub fn compose(&self, a: &Expr, b: &Expr) -> [Expr; 3] {
        let inner = self.at(b);
        let bind: BTreeMap<Symbol, Expr> = base().into_iter().zip(inner).collect();
        self.at(a).map(|c| c.subst_with(&bind).expect("symbol substitution"))
    }

    pub fn evaluate(&self, seed: [f64; 3], e: f64) -> Result<[f64; 3], FlowError> {
        let mut asg = Assignment::new().set(eps(), e);
        for (s, v) in base().into_iter().zip(seed) {
            asg.insert(s, v);
        }
        let mut out = [0.0; 3];
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = eval_numeric(c, &asg)?;
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowPoint {
    pub seed_id: usize,
    pub eps: f64,
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

/// `n` evenly spaced parameter values in `[lo, hi]` per seed. With
/// `project_xy` the `t` coordinate is set to 0.
pub fn sample_flow(fm: &FlowMap, seeds: &[[f64; 3]], range: (f64, f64, usize), project_xy: bool) -> Result<Vec<FlowPoint>, FlowError> {
    let (lo, hi, n) = range;
    if seeds.is_empty() {
        return Err(FlowError::NoSeeds);
    }
    if !(lo < hi) || n < 2 {
        return Err(FlowError::BadRange { lo, hi, n });
    }
    let mut out = Vec::with_capacity(seeds.len() * n);
    for (id, seed) in seeds.iter().enumerate() {
        for k in 0..n {
            let e = if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
            let [x, y, t] = fm.evaluate(*seed, e)?;
            out.push(FlowPoint { seed_id: id, eps: e, x, y, t: if project_xy { 0.0 } else { t } });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context};

    fn gen(s: &str) -> Generator {
        Generator::parse_combination(s, &Context::default()).unwrap()
    }

    fn p(s: &str) -> Expr {
        parse(s, &Context::default()).unwrap()
    }

    #[test]
    fn rotation_flow() {
        let fm = flow_map(&gen("X4")).unwrap();
        assert_eq!(fm.components, [p("x*cos(eps) + y*sin(eps)"), p("y*cos(eps) - x*sin(eps)"), p("t")]);
        let fm = flow_map(&gen("X4 + X3")).unwrap();
        assert_eq!(fm.components[2], p("t + eps"));
    }

    #[test]
    fn translation_flow() {
        let fm = flow_map(&gen("X1")).unwrap();
        assert_eq!(fm.components, [p("x + eps"), p("y"), p("t")]);
        let pts = sample_flow(&fm, &[[0.0; 3]], (0.0, 1.0, 2), false).unwrap();
        assert_eq!((pts[0].x, pts[1].x), (0.0, 1.0));
    }

    #[test]
    fn shifted_rotation_closes() {
        // X1 + X4 rotates about (0, -1)
        let fm = flow_map(&gen("X1 + X4")).unwrap();
        let at = fm.evaluate([0.0, -1.0, 0.0], 0.9).unwrap();
        assert!((at[0]).abs() < 1e-15 && (at[1] + 1.0).abs() < 1e-15);
        let full = fm.evaluate([0.3, -0.2, 0.0], 2.0 * std::f64::consts::PI).unwrap();
        assert!((full[0] - 0.3).abs() < 1e-12 && (full[1] + 0.2).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let dil = Generator::from_strings(["x", "0", "0", "0", "0"], &Context::default()).unwrap();
        assert_eq!(flow_map(&dil), Err(FlowError::NoClosedForm));
        let sq = Generator::from_strings(["x^2", "0", "0", "0", "0"], &Context::default()).unwrap();
        assert!(matches!(flow_map(&sq), Err(FlowError::NonAffine(_))));
        let fm = flow_map(&gen("X1")).unwrap();
        assert_eq!(sample_flow(&fm, &[], (0.0, 1.0, 2), false), Err(FlowError::NoSeeds));
        assert!(sample_flow(&fm, &[[0.0; 3]], (1.0, 0.0, 2), false).is_err());
    }
}
