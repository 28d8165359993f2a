use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{
    eval_numeric, random_assignment, total_derivative, Expr, Indep, JetIndex, Symbol, SymbolKind, EQUALS_TOLERANCE, MAX_JET_ORDER,
};

use super::{Generator, PdeInstance, SymmetryError};

/// Lazily computed prolongation coefficients of a generator, memoised per
/// jet symbol.
pub struct Prolongation<'a> {
    v: &'a Generator,
    dxi: BTreeMap<(usize, Indep), Expr>,
    memo: BTreeMap<Symbol, Expr>,
}

impl<'a> Prolongation<'a> {
    pub fn new(v: &'a Generator) -> Prolongation<'a> {
        Prolongation { v, dxi: BTreeMap::new(), memo: BTreeMap::new() }
    }

    fn d_xi(&mut self, k: usize, i: Indep) -> Result<Expr, SymmetryError> {
        if let Some(e) = self.dxi.get(&(k, i)) {
            return Ok(e.clone());
        }
        let e = total_derivative(self.v.base_part()[k], i)?;
        self.dxi.insert((k, i), e.clone());
        Ok(e)
    }

    /// Coefficient of `∂/∂s` in the prolonged field for a point coordinate
    /// or jet symbol `s`; parameters and unknown symbols get 0.
    pub fn coefficient(&mut self, s: &Symbol) -> Result<Expr, SymmetryError> {
        if let Some(c) = self.v.coefficient_of(s) {
            return Ok(c.clone());
        }
        let Symbol::Jet(base, j) = s else {
            return Ok(Expr::zero());
        };
        if base.as_ref() != "u" && base.as_ref() != "f" {
            return Ok(Expr::zero());
        }
        if let Some(c) = self.memo.get(s) {
            return Ok(c.clone());
        }
        // φ^{J,i} = D_i φ^J - Σ_k D_i ξ^k u_{J,k}
        let i = *j.indices().last().expect("jet has indices");
        let parent_idx = j.without(i).expect("index present");
        let parent = if parent_idx.order() == 0 { Symbol::dep(base) } else { Symbol::Jet(base.clone(), parent_idx.clone()) };
        let mut c = total_derivative(&self.coefficient(&parent)?, i)?;
        for (k, &xk) in Indep::BASE.iter().enumerate() {
            let dk = self.d_xi(k, i)?;
            if dk.is_zero() {
                continue;
            }
            let jet = Symbol::jet(base, parent_idx.with(xk).indices().to_vec())?;
            c = &c - &(&dk * &Expr::symbol(jet));
        }
        self.memo.insert(s.clone(), c.clone());
        Ok(c)
    }

    /// `pr V (e)`: the prolonged field applied to `e`.
    pub fn apply(&mut self, e: &Expr) -> Result<Expr, SymmetryError> {
        let mut parts = Vec::new();
        for s in e.free_symbols() {
            if s.kind() == SymbolKind::Parameter {
                continue;
            }
            let c = self.coefficient(&s)?;
            if !c.is_zero() {
                parts.push(&c * &e.diff(&s));
            }
        }
        Ok(parts.into_iter().sum())
    }
}

/// Coefficients of every jet `u_J`, `f_J` with `|J| <= order` (including the
/// bare `u` and `f`).
pub fn prolong(v: &Generator, order: usize) -> Result<BTreeMap<Symbol, Expr>, SymmetryError> {
    if order > MAX_JET_ORDER - 1 {
        return Err(SymmetryError::OrderTooHigh { order, max: MAX_JET_ORDER - 1 });
    }
    let mut p = Prolongation::new(v);
    let mut out = BTreeMap::new();
    for base in ["u", "f"] {
        out.insert(Symbol::dep(base), p.coefficient(&Symbol::dep(base))?);
        for n in 1..=order {
            for j in JetIndex::all_of_order(&Indep::BASE, n) {
                let s = Symbol::Jet(base.into(), j);
                let c = p.coefficient(&s)?;
                out.insert(s, c);
            }
        }
    }
    Ok(out)
}

/// `pr V (Δ)` before any on-shell substitution.
pub fn prolonged_action(v: &Generator, pde: &PdeInstance) -> Result<Expr, SymmetryError> {
    Prolongation::new(v).apply(pde.residual())
}

/// `pr V (Δ)` with `f` replaced by the solved form of the equation.
pub fn invariance_residual(v: &Generator, pde: &PdeInstance) -> Result<Expr, SymmetryError> {
    let raw = prolonged_action(v, pde)?;
    let bind = [(Symbol::dep("f"), pde.solved_form().clone())].into_iter().collect();
    Ok(raw.subst_with(&bind)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMethod {
    Canonical,
    Numeric,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub is_symmetry: bool,
    pub residual: Expr,
    pub method: VerifyMethod,
    /// Largest |residual| seen at the sample points (0 for a canonical zero).
    pub max_abs: f64,
}

/// Canonical zero test on the invariance residual, with a seeded numeric
/// fallback at 20 random points.
pub fn verify_symmetry(v: &Generator, pde: &PdeInstance, seed: u64) -> Result<VerifyReport, SymmetryError> {
    let residual = invariance_residual(v, pde)?;
    if residual.is_zero() {
        return Ok(VerifyReport { is_symmetry: true, residual, method: VerifyMethod::Canonical, max_abs: 0.0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs: f64 = 0.0;
    let mut points = 0;
    let mut attempts = 0;
    while points < 20 && attempts < 1000 {
        attempts += 1;
        let asg = random_assignment(&residual, &mut rng);
        if let Ok(val) = eval_numeric(&residual, &asg) {
            max_abs = max_abs.max(val.abs());
            points += 1;
        }
    }
    Ok(VerifyReport { is_symmetry: points == 20 && max_abs < EQUALS_TOLERANCE, residual, method: VerifyMethod::Numeric, max_abs })
}
