use std::collections::BTreeMap;

use super::symbol::{Indep, Symbol};

/// Symbol table used by the parser: declared symbols and opaque functions
/// together with their argument lists.
#[derive(Clone, Debug)]
pub struct Context {
    symbols: BTreeMap<String, Symbol>,
    functions: BTreeMap<String, Vec<Symbol>>,
}

/// Names reserved for built-in functions.
pub(crate) const BUILTINS: [&str; 7] = ["sin", "cos", "exp", "arctan", "atan2", "sqrt", "diff"];

impl Context {
    /// A table holding only the independent variables.
    pub fn empty() -> Context {
        let mut symbols = BTreeMap::new();
        for v in [Indep::X, Indep::Y, Indep::T, Indep::Xi, Indep::Eta] {
            symbols.insert(v.name().to_string(), Symbol::Independent(v));
        }
        Context { symbols, functions: BTreeMap::new() }
    }

    pub fn with_param(mut self, name: &str) -> Context {
        self.symbols.insert(name.to_string(), Symbol::param(name));
        self
    }

    pub fn with_dependent(mut self, name: &str) -> Context {
        self.symbols.insert(name.to_string(), Symbol::dep(name));
        self
    }

    pub fn with_function(mut self, name: &str, args: &[Symbol]) -> Context {
        self.functions.insert(name.to_string(), args.to_vec());
        self
    }

    pub fn lookup(&self, name: &str) -> Option<&Symbol> {
        self.symbols.get(name)
    }

    pub fn function(&self, name: &str) -> Option<&[Symbol]> {
        self.functions.get(name).map(Vec::as_slice)
    }

    pub fn is_dependent(&self, name: &str) -> bool {
        matches!(self.symbols.get(name), Some(Symbol::Dependent(_)))
    }

    /// Comma-separated listing for error messages.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self.symbols.keys().cloned().collect();
        parts.extend(self.functions.iter().map(|(n, args)| {
            let a: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            format!("{n}({})", a.join(","))
        }));
        parts.join(", ")
    }
}

impl Default for Context {
    /// Variables of the viscoelastic problem: `x, y, t` and chart
    /// coordinates `xi, eta`; dependents `u, f, h, g`; parameters `a, b`,
    /// group parameters `s, eps, tau`, constants `c1..c5` and `pi`; the
    /// arbitrary function `F2(x,y,t)` and the ansatz functions
    /// `xi1, xi2, xi3, phi1, phi2` of `(x,y,t,u,f)`.
    fn default() -> Context {
        let mut ctx = Context::empty();
        for d in ["u", "f", "h", "g"] {
            ctx = ctx.with_dependent(d);
        }
        for p in ["a", "b", "s", "eps", "delta", "tau", "pi", "c1", "c2", "c3", "c4", "c5"] {
            ctx = ctx.with_param(p);
        }
        let xyt: Vec<Symbol> = Indep::BASE.iter().map(|&v| Symbol::Independent(v)).collect();
        let mut point = xyt.clone();
        point.push(Symbol::dep("u"));
        point.push(Symbol::dep("f"));
        ctx = ctx.with_function("F2", &xyt);
        for name in ["xi1", "xi2", "xi3", "phi1", "phi2"] {
            ctx = ctx.with_function(name, &point);
        }
        ctx
    }
}
