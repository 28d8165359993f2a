use std::fmt;
use std::sync::Arc;

use super::ExprError;

/// Highest derivative order a jet symbol may carry.
pub const MAX_JET_ORDER: usize = 4;

/// Independent variables. `X`, `Y`, `T` are the base coordinates; `Xi` and
/// `Eta` are the coordinates of a reduced (similarity) chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Indep {
    X,
    Y,
    T,
    Xi,
    Eta,
}

impl Indep {
    pub const BASE: [Indep; 3] = [Indep::X, Indep::Y, Indep::T];
    pub const CHART: [Indep; 2] = [Indep::Xi, Indep::Eta];

    pub fn name(self) -> &'static str {
        match self {
            Indep::X => "x",
            Indep::Y => "y",
            Indep::T => "t",
            Indep::Xi => "xi",
            Indep::Eta => "eta",
        }
    }

    pub fn from_name(name: &str) -> Option<Indep> {
        match name {
            "x" => Some(Indep::X),
            "y" => Some(Indep::Y),
            "t" => Some(Indep::T),
            "xi" => Some(Indep::Xi),
            "eta" => Some(Indep::Eta),
            _ => None,
        }
    }

    /// Splits a jet subscript such as `xxt` or `xieta` into its indices.
    /// `xi` is matched before `x`.
    pub fn parse_indices(mut s: &str) -> Option<Vec<Indep>> {
        let mut out = Vec::new();
        while !s.is_empty() {
            let (ix, len) = if s.starts_with("xi") {
                (Indep::Xi, 2)
            } else if s.starts_with("eta") {
                (Indep::Eta, 3)
            } else if s.starts_with('x') {
                (Indep::X, 1)
            } else if s.starts_with('y') {
                (Indep::Y, 1)
            } else if s.starts_with('t') {
                (Indep::T, 1)
            } else {
                return None;
            };
            out.push(ix);
            s = &s[len..];
        }
        if out.is_empty() {
            None
        } else {
            Some(out)
        }
    }
}

impl fmt::Display for Indep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sorted multiset of differentiation indices; `u_tx` and `u_xt` share one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetIndex(Vec<Indep>);

impl JetIndex {
    pub fn new(mut indices: Vec<Indep>) -> Self {
        indices.sort();
        JetIndex(indices)
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[Indep] {
        &self.0
    }

    pub fn count(&self, v: Indep) -> usize {
        self.0.iter().filter(|&&w| w == v).count()
    }

    pub fn with(&self, v: Indep) -> JetIndex {
        let mut idx = self.0.clone();
        idx.push(v);
        JetIndex::new(idx)
    }

    /// Removes one occurrence of `v`, if present.
    pub fn without(&self, v: Indep) -> Option<JetIndex> {
        let pos = self.0.iter().position(|&w| w == v)?;
        let mut idx = self.0.clone();
        idx.remove(pos);
        Some(JetIndex(idx))
    }

    /// All multisets over `vars` of exactly `order` elements, in sorted order.
    pub fn all_of_order(vars: &[Indep], order: usize) -> Vec<JetIndex> {
        fn rec(vars: &[Indep], order: usize, start: usize, cur: &mut Vec<Indep>, out: &mut Vec<JetIndex>) {
            if cur.len() == order {
                out.push(JetIndex::new(cur.clone()));
                return;
            }
            for i in start..vars.len() {
                cur.push(vars[i]);
                rec(vars, order, i, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(vars, order, 0, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for JetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            f.write_str(v.name())?;
        }
        Ok(())
    }
}

/// Coarse classification of a symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Independent,
    Dependent,
    Parameter,
    Jet,
}

/// A symbol of the expression language. The variant fixes its kind.
///
/// Variant order is the canonical order used when printing products, so
/// parameters come first (`a*u_xxt`) and jets last.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Parameter(Arc<str>),
    Independent(Indep),
    Dependent(Arc<str>),
    Jet(Arc<str>, JetIndex),
}

impl Symbol {
    pub fn param(name: &str) -> Symbol {
        Symbol::Parameter(Arc::from(name))
    }

    pub fn dep(name: &str) -> Symbol {
        Symbol::Dependent(Arc::from(name))
    }

    pub fn indep(v: Indep) -> Symbol {
        Symbol::Independent(v)
    }

    /// Jet symbol of `base` differentiated along `indices`, bounded by
    /// [`MAX_JET_ORDER`].
    pub fn jet(base: &str, indices: Vec<Indep>) -> Result<Symbol, ExprError> {
        if indices.is_empty() {
            return Ok(Symbol::dep(base));
        }
        if indices.len() > MAX_JET_ORDER {
            return Err(ExprError::JetOrder { symbol: format!("{}_{}", base, JetIndex::new(indices.clone())), max: MAX_JET_ORDER });
        }
        Ok(Symbol::Jet(Arc::from(base), JetIndex::new(indices)))
    }

    /// Parses a jet subscript string like `"xxt"`.
    pub fn jet_str(base: &str, subscript: &str) -> Result<Symbol, ExprError> {
        let idx = Indep::parse_indices(subscript).ok_or_else(|| ExprError::UnknownIdentifier {
            name: format!("{base}_{subscript}"),
            offset: 0,
            known: String::new(),
        })?;
        Symbol::jet(base, idx)
    }

    pub fn kind(&self) -> SymbolKind {
        match self {
            Symbol::Parameter(_) => SymbolKind::Parameter,
            Symbol::Independent(_) => SymbolKind::Independent,
            Symbol::Dependent(_) => SymbolKind::Dependent,
            Symbol::Jet(..) => SymbolKind::Jet,
        }
    }

    /// Name of the dependent variable a jet or dependent symbol refers to.
    pub fn base(&self) -> Option<&str> {
        match self {
            Symbol::Dependent(n) | Symbol::Jet(n, _) => Some(n),
            _ => None,
        }
    }

    /// Differentiation indices; empty for a bare dependent variable.
    pub fn jet_index(&self) -> Option<JetIndex> {
        match self {
            Symbol::Dependent(_) => Some(JetIndex::new(Vec::new())),
            Symbol::Jet(_, j) => Some(j.clone()),
            _ => None,
        }
    }

    /// `u_J` → `u_{J+v}`, `u` → `u_v`.
    pub fn jet_append(&self, v: Indep) -> Result<Option<Symbol>, ExprError> {
        match self {
            Symbol::Dependent(n) => Symbol::jet(n, vec![v]).map(Some),
            Symbol::Jet(n, j) => Symbol::jet(n, j.with(v).0).map(Some),
            _ => Ok(None),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Parameter(n) | Symbol::Dependent(n) => f.write_str(n),
            Symbol::Independent(v) => f.write_str(v.name()),
            Symbol::Jet(n, j) => write!(f, "{n}_{j}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_indices_are_sorted() {
        let a = Symbol::jet_str("u", "tx").unwrap();
        let b = Symbol::jet_str("u", "xt").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "u_xt");
    }

    #[test]
    fn chart_indices_parse_greedily() {
        let s = Symbol::jet_str("h", "xixieta").unwrap();
        assert_eq!(s.to_string(), "h_xixieta");
        assert_eq!(s.jet_index().unwrap().count(Indep::Xi), 2);
    }

    #[test]
    fn jet_cap_is_enforced() {
        assert!(Symbol::jet_str("u", "xxxx").is_ok());
        assert!(matches!(Symbol::jet_str("u", "xxxxt"), Err(ExprError::JetOrder { .. })));
    }

    #[test]
    fn multisets_of_order() {
        assert_eq!(JetIndex::all_of_order(&Indep::BASE, 2).len(), 6);
        assert_eq!(JetIndex::all_of_order(&Indep::BASE, 3).len(), 10);
    }
}
