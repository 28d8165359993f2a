//! Point symmetries of the viscoelastic equation: vector fields on
//! `(x, y, t, u, f)`, brackets and structure constants, prolongation,
//! invariance residuals and determining equations.

mod algebra;
mod determining;
mod generator;
mod prolong;

pub use algebra::{bracket, commutator_table, StructureConstants};
pub use determining::{determining_equations, DeterminingEquation, DeterminingSystem};
pub use generator::{point_symbols, Generator, BASIS_LABELS, F2_LABEL};
pub use prolong::{invariance_residual, prolong, prolonged_action, verify_symmetry, Prolongation, VerifyMethod, VerifyReport};

use thiserror::Error;

use crate::expr::{parse, Context, Expr, ExprError, Symbol};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SymmetryError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("generator coefficient contains the jet variable `{0}`")]
    JetInCoefficient(String),
    #[error("`{0}` is not a linear combination of X1..X5 and XF2 with constant coefficients")]
    NotLinearCombination(String),
    #[error("bracket [{left}, {right}] is not in the span of the basis (not closed)")]
    NotClosed { left: String, right: String },
    #[error("residual must be linear in f with coefficient -1; got {0}")]
    NotSolvableForF(String),
    #[error("residual must contain u_tt linearly with coefficient 1; got {0}")]
    NotSolvableForUtt(String),
    #[error("prolongation order {order} exceeds {max}")]
    OrderTooHigh { order: usize, max: usize },
    #[error("jet variable `{0}` enters non-polynomially")]
    NonPolynomial(String),
}

/// A scalar PDE `Δ = 0` in which `f` enters algebraically with coefficient
/// `-1`, so `f = Δ + f` is its solved form.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeInstance {
    residual: Expr,
    solved: Expr,
}

pub const VISCOELASTIC: &str = "u_tt - a*(u_xxt + u_yyt) - b*(u_xx + u_yy) - f";

impl PdeInstance {
    pub fn new(residual: Expr) -> Result<PdeInstance, SymmetryError> {
        let f = Symbol::dep("f");
        let coeff = residual.diff(&f);
        if coeff != Expr::int(-1) {
            return Err(SymmetryError::NotSolvableForF(coeff.to_string()));
        }
        let solved = &residual + &Expr::symbol(f.clone());
        if solved.contains_symbol(&f) {
            return Err(SymmetryError::NotSolvableForF(residual.to_string()));
        }
        Ok(PdeInstance { residual, solved })
    }

    /// `u_tt - a (u_xxt + u_yyt) - b (u_xx + u_yy) - f` with symbolic `a`, `b`.
    pub fn viscoelastic() -> PdeInstance {
        PdeInstance::new(parse(VISCOELASTIC, &Context::default()).expect("static equation")).expect("solvable for f")
    }

    /// Same equation with `a` and `b` replaced by the given expressions.
    pub fn viscoelastic_with(a: Expr, b: Expr) -> PdeInstance {
        let base = PdeInstance::viscoelastic();
        let bind = [(Symbol::param("a"), a), (Symbol::param("b"), b)].into_iter().filter(|(s, e)| *e != Expr::symbol(s.clone())).collect();
        let residual = crate::expr::substitute(&base.residual, &bind).expect("acyclic");
        PdeInstance::new(residual).expect("solvable for f")
    }

    pub fn residual(&self) -> &Expr {
        &self.residual
    }

    /// Right-hand side of `f = ...`.
    pub fn solved_form(&self) -> &Expr {
        &self.solved
    }

    /// `u_tt = ...` solved form; needed when unknown functions depend on `f`.
    pub fn solved_for_utt(&self) -> Result<(Symbol, Expr), SymmetryError> {
        let utt = Symbol::jet_str("u", "tt")?;
        let coeff = self.residual.diff(&utt);
        if !coeff.is_one() {
            return Err(SymmetryError::NotSolvableForUtt(coeff.to_string()));
        }
        let rhs = &Expr::symbol(utt.clone()) - &self.residual;
        if rhs.contains_symbol(&utt) {
            return Err(SymmetryError::NotSolvableForUtt(self.residual.to_string()));
        }
        Ok((utt, rhs))
    }

    /// Highest jet order appearing in the residual.
    pub fn order(&self) -> usize {
        self.residual.free_symbols().iter().filter_map(|s| s.jet_index()).map(|j| j.order()).max().unwrap_or(0)
    }
}
