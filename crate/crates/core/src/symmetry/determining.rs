use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive};

use crate::expr::{Atom, Expr, FunctionDef, Monomial, Rational, Symbol, SymbolKind};

use super::{prolonged_action, Generator, PdeInstance, SymmetryError};

/// One coefficient of the expanded invariance condition.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterminingEquation {
    /// Jet monomial the coefficient multiplies, e.g. `u_x*u_xt` or `1`.
    pub monomial: String,
    pub coefficient: Expr,
}

#[derive(Clone, Debug)]
pub struct DeterminingSystem {
    pub equations: Vec<DeterminingEquation>,
    /// Number of distinct jet monomials before deduplication.
    pub raw_count: usize,
}

impl DeterminingSystem {
    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Each equation with the named unknown functions replaced.
    pub fn evaluate_at(&self, defs: &BTreeMap<String, FunctionDef>) -> Result<Vec<Expr>, SymmetryError> {
        self.equations.iter().map(|e| Ok(e.coefficient.substitute_functions(defs)?)).collect()
    }
}

type JetKey = (i64, Vec<(Symbol, i64)>);

/// Expands the on-shell invariance residual of `ansatz` as a polynomial in
/// the jet variables of order at least one and returns the coefficient of
/// each jet monomial, in graded lexicographic order, without duplicates up
/// to a constant factor.
///
/// The equation is imposed by eliminating `u_tt`, so `f` and its jets stay
/// free coordinates and unknown functions of `f` keep symbol arguments.
pub fn determining_equations(ansatz: &Generator, pde: &PdeInstance) -> Result<DeterminingSystem, SymmetryError> {
    let (utt, rhs) = pde.solved_for_utt()?;
    let raw = prolonged_action(ansatz, pde)?;
    let residual = raw.subst_with(&[(utt, rhs)].into_iter().collect())?;
    let mut groups: BTreeMap<JetKey, Vec<(Rational, Monomial)>> = BTreeMap::new();
    for (m, c) in residual.terms() {
        let mut jets: Vec<(Symbol, i64)> = Vec::new();
        let mut rest = Monomial::one();
        for (a, p) in m.factors() {
            match a {
                Atom::Sym(s) if s.kind() == SymbolKind::Jet => {
                    let n = p.to_i64().filter(|n| p.is_integer() && n.is_positive());
                    let n = n.ok_or_else(|| SymmetryError::NonPolynomial(s.to_string()))?;
                    jets.push((s.clone(), n));
                }
                _ => {
                    if let Some(j) = atom_jets(a) {
                        return Err(SymmetryError::NonPolynomial(j.to_string()));
                    }
                    rest = rest.mul(&Monomial::atom(a.clone(), *p));
                }
            }
        }
        let degree = jets.iter().map(|(_, n)| n).sum();
        groups.entry((degree, jets)).or_default().push((c.clone(), rest));
    }
    let raw_count = groups.len();
    let mut equations = Vec::new();
    let mut seen: Vec<Expr> = Vec::new();
    for ((_, jets), parts) in groups {
        let coefficient: Expr = parts.into_iter().map(|(c, m)| Expr::term(c, m)).sum();
        if coefficient.is_zero() {
            continue;
        }
        let lead = coefficient.lex_leading().map(|(_, q)| q.clone()).unwrap_or_else(Rational::one);
        let normal = coefficient.scale(&(Rational::one() / lead));
        if seen.contains(&normal) {
            continue;
        }
        seen.push(normal);
        equations.push(DeterminingEquation { monomial: monomial_label(&jets), coefficient });
    }
    Ok(DeterminingSystem { equations, raw_count })
}

fn atom_jets(a: &Atom) -> Option<Symbol> {
    let inner = |e: &Expr| e.free_symbols().into_iter().find(|s| s.kind() == SymbolKind::Jet);
    match a {
        Atom::Sym(s) if s.kind() == SymbolKind::Jet => Some(s.clone()),
        Atom::Sym(_) => None,
        Atom::Fn(_, args) => args.iter().find_map(inner),
        Atom::Group(g) => inner(g),
        Atom::Opaque(o) => o.args().iter().find(|s| s.kind() == SymbolKind::Jet).cloned(),
    }
}

fn monomial_label(jets: &[(Symbol, i64)]) -> String {
    if jets.is_empty() {
        return "1".into();
    }
    jets.iter().map(|(s, n)| if *n == 1 { s.to_string() } else { format!("{s}^{n}") }).collect::<Vec<_>>().join("*")
}
