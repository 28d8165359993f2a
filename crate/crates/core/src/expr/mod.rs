//! Symbolic expression kernel.
//!
//! Expressions are immutable and always canonical: a sum of rational
//! multiples of monomials over atoms (symbols, elementary functions, opaque
//! functions and irreducible powers of sums). The canonical form applies a
//! small set of rewrites on construction:
//!
//! * like terms merge and zero terms vanish;
//! * `sin(a)^2` is rewritten as `1 - cos(a)^2`, so `sin^2 + cos^2 = 1`;
//! * `sin`/`cos` of a sum are expanded by the angle-addition formulas, and
//!   odd/even symmetry pulls out signs;
//! * a negative power of a sum is combined with the other terms sharing it
//!   and exact factors are cancelled.

mod context;
mod eval;
mod node;
mod parse;
mod print;
mod subst;
mod symbol;

pub use context::Context;
pub use eval::{equals, equals_with, eval_numeric, random_assignment, Assignment, StandIn, EQUALS_TOLERANCE};
pub use node::{Atom, Exponent, Expr, Func, Monomial, Opaque, Rational};
pub use parse::parse;
pub use subst::{substitute, FunctionDef};
pub use symbol::{Indep, JetIndex, Symbol, SymbolKind, MAX_JET_ORDER};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}; declared symbols: {known}")]
    UnknownIdentifier { name: String, offset: usize, known: String },
    #[error("jet `{symbol}` exceeds the maximum derivative order {max}")]
    JetOrder { symbol: String, max: usize },
    #[error("cyclic substitution through `{0}`")]
    Cycle(String),
    #[error("opaque function `{name}` cannot take argument `{arg}`; arguments must be symbols")]
    OpaqueArgument { name: String, arg: String },
    #[error("symbol `{0}` has no value")]
    Unassigned(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Total derivative `D_v e`: every dependent symbol `u` contributes
/// `∂e/∂u · u_v` and every jet `u_J` contributes `∂e/∂u_J · u_{J+v}`.
pub fn total_derivative(e: &Expr, v: Indep) -> Result<Expr, ExprError> {
    let mut parts = vec![e.diff(&Symbol::Independent(v))];
    for s in e.free_symbols() {
        if let Some(next) = s.jet_append(v)? {
            let d = e.diff(&s);
            if !d.is_zero() {
                parts.push(&d * &Expr::symbol(next));
            }
        }
    }
    Ok(parts.into_iter().sum())
}

/// Rebuilds an expression from its parts through the smart constructors.
/// Canonical expressions are fixed points.
pub fn canonicalize(e: &Expr) -> Expr {
    e.terms()
        .map(|(m, c)| {
            let mut t = Expr::rational(c.clone());
            for (a, p) in m.factors() {
                let base = match a {
                    Atom::Sym(s) => Expr::symbol(s.clone()),
                    Atom::Fn(f, args) => {
                        let args: Vec<Expr> = args.iter().map(canonicalize).collect();
                        Expr::apply_func(*f, &args)
                    }
                    Atom::Opaque(o) => Expr::from_atom(Atom::Opaque(o.clone())),
                    Atom::Group(g) => canonicalize(g),
                };
                t = &t * &base.pow(*p);
            }
            t
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s, &Context::default()).unwrap()
    }

    #[test]
    fn total_derivative_examples() {
        assert_eq!(total_derivative(&p("u"), Indep::T).unwrap(), p("u_t"));
        assert_eq!(total_derivative(&p("u_xx"), Indep::X).unwrap(), p("u_xxx"));
        assert_eq!(total_derivative(&p("u_xx*u"), Indep::T).unwrap(), p("u_xxt*u + u_xx*u_t"));
        assert_eq!(total_derivative(&p("a*x^2"), Indep::X).unwrap(), p("2*a*x"));
    }

    #[test]
    fn total_derivative_respects_cap() {
        assert!(matches!(total_derivative(&p("u_xxxt"), Indep::Y), Err(ExprError::JetOrder { .. })));
    }

    #[test]
    fn total_derivative_of_opaque_function() {
        // D_x xi1(x,y,t,u,f) = xi1_x + xi1_u u_x + xi1_f f_x
        let d = total_derivative(&p("xi1(x,y,t,u,f)"), Indep::X).unwrap();
        let expected = p("diff(xi1(x,y,t,u,f), x) + diff(xi1(x,y,t,u,f), u)*u_x + diff(xi1(x,y,t,u,f), f)*f_x");
        assert_eq!(d, expected);
    }

    #[test]
    fn canonicalize_is_identity_on_canonical() {
        let e = p("sin(s)^3 + (x + y)^-2 * x + u_xt*cos(s + delta)");
        assert_eq!(canonicalize(&e), e);
    }
}
