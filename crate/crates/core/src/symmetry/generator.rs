use std::fmt;

use crate::expr::{parse, Context, Expr, FunctionDef, Indep, Symbol, SymbolKind};

use super::SymmetryError;

/// Names of the basis elements, in basis order.
pub const BASIS_LABELS: [&str; 5] = ["X1", "X2", "X3", "X4", "X5"];
/// Label of the generator family carried by the arbitrary function `F2`.
pub const F2_LABEL: &str = "XF2";

/// The point coordinates `(x, y, t, u, f)` the generators act on.
pub fn point_symbols() -> [Symbol; 5] {
    [Symbol::Independent(Indep::X), Symbol::Independent(Indep::Y), Symbol::Independent(Indep::T), Symbol::dep("u"), Symbol::dep("f")]
}

/// A point vector field
/// `xi1 ∂x + xi2 ∂y + xi3 ∂t + phi1 ∂u + phi2 ∂f`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    coeffs: [Expr; 5],
    pub label: Option<String>,
}

impl Generator {
    /// Fails if a coefficient involves jet variables.
    pub fn new(coeffs: [Expr; 5]) -> Result<Generator, SymmetryError> {
        for c in &coeffs {
            if let Some(j) = c.free_symbols().into_iter().find(|s| s.kind() == SymbolKind::Jet) {
                return Err(SymmetryError::JetInCoefficient(j.to_string()));
            }
        }
        Ok(Generator { coeffs, label: None })
    }

    pub fn labelled(mut self, label: &str) -> Generator {
        self.label = Some(label.to_string());
        self
    }

    pub fn zero() -> Generator {
        Generator { coeffs: std::array::from_fn(|_| Expr::zero()), label: None }
    }

    /// Parses five coefficient expressions.
    pub fn from_strings(parts: [&str; 5], ctx: &Context) -> Result<Generator, SymmetryError> {
        let mut coeffs: [Expr; 5] = std::array::from_fn(|_| Expr::zero());
        for (c, s) in coeffs.iter_mut().zip(parts) {
            *c = parse(s, ctx)?;
        }
        Generator::new(coeffs)
    }

    pub fn xi1(&self) -> &Expr {
        &self.coeffs[0]
    }
    pub fn xi2(&self) -> &Expr {
        &self.coeffs[1]
    }
    pub fn xi3(&self) -> &Expr {
        &self.coeffs[2]
    }
    pub fn phi1(&self) -> &Expr {
        &self.coeffs[3]
    }
    pub fn phi2(&self) -> &Expr {
        &self.coeffs[4]
    }

    pub fn coefficients(&self) -> &[Expr; 5] {
        &self.coeffs
    }

    /// Coefficient in front of `∂/∂s` for a point coordinate `s`.
    pub fn coefficient_of(&self, s: &Symbol) -> Option<&Expr> {
        point_symbols().iter().position(|p| p == s).map(|i| &self.coeffs[i])
    }

    /// Base-space part `(xi1, xi2, xi3)`.
    pub fn base_part(&self) -> [&Expr; 3] {
        [&self.coeffs[0], &self.coeffs[1], &self.coeffs[2]]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }

    /// `V(F)`: the field acting as a first-order differential operator.
    pub fn apply(&self, e: &Expr) -> Expr {
        point_symbols().iter().zip(&self.coeffs).filter(|(_, c)| !c.is_zero()).map(|(s, c)| c * &e.diff(s)).sum()
    }

    pub fn scale(&self, k: &Expr) -> Generator {
        Generator { coeffs: std::array::from_fn(|i| k * &self.coeffs[i]), label: None }
    }

    pub fn add(&self, other: &Generator) -> Generator {
        Generator { coeffs: std::array::from_fn(|i| &self.coeffs[i] + &other.coeffs[i]), label: None }
    }

    /// Basis element `X_i` for `i` in `1..=5`:
    /// `∂x`, `∂y`, `∂t`, `y∂x - x∂y`, `u∂u + f∂f`.
    pub fn basis(i: usize) -> Generator {
        let x = Expr::indep(Indep::X);
        let y = Expr::indep(Indep::Y);
        let z = Expr::zero;
        let one = Expr::one;
        let coeffs = match i {
            1 => [one(), z(), z(), z(), z()],
            2 => [z(), one(), z(), z(), z()],
            3 => [z(), z(), one(), z(), z()],
            4 => [y, -x, z(), z(), z()],
            5 => [z(), z(), z(), Expr::dep("u"), Expr::dep("f")],
            _ => panic!("basis index {i} outside 1..=5"),
        };
        Generator { coeffs, label: Some(BASIS_LABELS[i - 1].to_string()) }
    }

    pub fn basis_all() -> Vec<Generator> {
        (1..=5).map(Generator::basis).collect()
    }

    /// `F2 ∂u + (F2_tt - a (F2_xxt + F2_yyt) - b (F2_xx + F2_yy)) ∂f` for the
    /// arbitrary function `F2(x, y, t)`.
    pub fn f2_family() -> Generator {
        let xyt: Vec<Symbol> = Indep::BASE.iter().map(|&v| Symbol::Independent(v)).collect();
        let f2 = Expr::opaque("F2", &xyt);
        let d = |vars: &[Indep]| vars.iter().fold(f2.clone(), |e, &v| e.diff(&Symbol::Independent(v)));
        let (a, b) = (Expr::param("a"), Expr::param("b"));
        let phi2 = &(&d(&[Indep::T, Indep::T]) - &(&a * &(&d(&[Indep::X, Indep::X, Indep::T]) + &d(&[Indep::Y, Indep::Y, Indep::T]))))
            - &(&b * &(&d(&[Indep::X, Indep::X]) + &d(&[Indep::Y, Indep::Y])));
        Generator { coeffs: [Expr::zero(), Expr::zero(), Expr::zero(), f2, phi2], label: Some(F2_LABEL.to_string()) }
    }

    /// Fully general point field: each coefficient is an opaque function of
    /// `(x, y, t, u, f)`, named `xi1, xi2, xi3, phi1, phi2`.
    pub fn ansatz() -> Generator {
        let args = point_symbols();
        let coeffs = std::array::from_fn(|i| Expr::opaque(ANSATZ_NAMES[i], &args));
        Generator { coeffs, label: Some("ansatz".into()) }
    }

    /// Parses `"X1 + 2*X3"`-style linear combinations of the basis and the
    /// `XF2` family. Coefficients may be symbolic constants.
    pub fn parse_combination(text: &str, ctx: &Context) -> Result<Generator, SymmetryError> {
        let mut ctx = ctx.clone();
        for l in BASIS_LABELS.iter().chain(std::iter::once(&F2_LABEL)) {
            ctx = ctx.with_param(l);
        }
        let e = parse(text, &ctx)?;
        let mut total = Generator::zero();
        let mut rest = e.clone();
        let mut members: Vec<(String, Generator)> = (1..=5).map(|i| (BASIS_LABELS[i - 1].to_string(), Generator::basis(i))).collect();
        members.push((F2_LABEL.to_string(), Generator::f2_family()));
        for (label, g) in &members {
            let sym = Symbol::param(label);
            let k = e.diff(&sym);
            if k.is_zero() {
                continue;
            }
            if members.iter().any(|(l, _)| k.contains_symbol(&Symbol::param(l)))
                || k.free_symbols().iter().any(|s| s.kind() != SymbolKind::Parameter)
            {
                return Err(SymmetryError::NotLinearCombination(text.to_string()));
            }
            rest = &rest - &(&k * &Expr::symbol(sym));
            total = total.add(&g.scale(&k));
        }
        if !rest.is_zero() {
            return Err(SymmetryError::NotLinearCombination(text.to_string()));
        }
        total.label = Some(text.trim().to_string());
        Ok(total)
    }

    /// The general solution of the determining system: constants `c1..c5`
    /// and the arbitrary function `F2`, as replacements for the ansatz
    /// functions.
    pub fn general_solution() -> Vec<(String, FunctionDef)> {
        let args = point_symbols();
        let ctx = Context::default();
        let f2 = Generator::f2_family();
        let p = |s: &str| parse(s, &ctx).expect("static expression");
        let bodies = [p("c1*y + c2"), p("-c1*x + c3"), p("c4"), &p("c5*u") + f2.phi1(), &p("c5*f") + f2.phi2()];
        ANSATZ_NAMES.iter().zip(bodies).map(|(n, body)| (n.to_string(), FunctionDef::new(&args, body))).collect()
    }

    /// The general solution as a single generator.
    pub fn general_element() -> Generator {
        let sol = Generator::general_solution();
        let coeffs = std::array::from_fn(|i| sol[i].1.body.clone());
        Generator { coeffs, label: Some("general".into()) }
    }
}

pub(crate) const ANSATZ_NAMES: [&str; 5] = ["xi1", "xi2", "xi3", "phi1", "phi2"];

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["x", "y", "t", "u", "f"];
        let mut first = true;
        for (c, n) in self.coeffs.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let text = c.to_string();
            if c.num_terms() > 1 {
                write!(f, "{}({text})*d{n}", if first { "" } else { " + " })?;
            } else if let (false, Some(rest)) = (first, text.strip_prefix('-')) {
                write!(f, " - {rest}*d{n}")?;
            } else {
                write!(f, "{}{text}*d{n}", if first { "" } else { " + " })?;
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_parsing() {
        let ctx = Context::default();
        let g = Generator::parse_combination("X1 + 2*X3", &ctx).unwrap();
        assert_eq!(g.xi1(), &Expr::one());
        assert_eq!(g.xi3(), &Expr::int(2));
        let g = Generator::parse_combination("X4 + c3*X3", &ctx).unwrap();
        assert_eq!(g.xi3(), &Expr::param("c3"));
        assert!(Generator::parse_combination("X1*X2", &ctx).is_err());
        assert!(Generator::parse_combination("X1 + 1", &ctx).is_err());
        assert!(Generator::parse_combination("x*X1", &ctx).is_err());
    }

    #[test]
    fn jets_rejected() {
        let ctx = Context::default();
        assert!(matches!(Generator::from_strings(["u_x", "0", "0", "0", "0"], &ctx), Err(SymmetryError::JetInCoefficient(_))));
    }

    #[test]
    fn action_on_functions() {
        let ctx = Context::default();
        let r2 = parse("x^2 + y^2", &ctx).unwrap();
        assert!(Generator::basis(4).apply(&r2).is_zero());
        assert_eq!(Generator::basis(5).apply(&parse("u*f", &ctx).unwrap()), parse("2*u*f", &ctx).unwrap());
    }
}
