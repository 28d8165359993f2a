use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

use super::node::{Atom, Expr, Opaque, Rational};
use super::symbol::Symbol;
use super::ExprError;

/// Simultaneous substitution followed by canonicalisation.
///
/// The binding graph must be acyclic: a binding whose value mentions its own
/// key, directly or through other bindings, is rejected, because its meaning
/// would depend on whether substitution is iterated.
pub fn substitute(e: &Expr, bindings: &BTreeMap<Symbol, Expr>) -> Result<Expr, ExprError> {
    check_acyclic(bindings)?;
    e.subst_with(bindings)
}

fn check_acyclic(bindings: &BTreeMap<Symbol, Expr>) -> Result<(), ExprError> {
    let deps: BTreeMap<&Symbol, Vec<&Symbol>> =
        bindings.iter().map(|(k, v)| (k, bindings.keys().filter(|s| v.contains_symbol(s)).collect())).collect();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&Symbol, u8> = BTreeMap::new();
    fn visit<'a>(
        s: &'a Symbol,
        deps: &BTreeMap<&'a Symbol, Vec<&'a Symbol>>,
        state: &mut BTreeMap<&'a Symbol, u8>,
    ) -> Result<(), ExprError> {
        match state.get(s) {
            Some(1) => return Err(ExprError::Cycle(s.to_string())),
            Some(2) => return Ok(()),
            _ => {}
        }
        state.insert(s, 1);
        for d in &deps[s] {
            visit(d, deps, state)?;
        }
        state.insert(s, 2);
        Ok(())
    }
    for k in bindings.keys() {
        visit(k, &deps, &mut state)?;
    }
    Ok(())
}

/// Definition used to replace an opaque function by a concrete expression.
/// `body` is written in terms of `params`.
#[derive(Clone, Debug)]
pub struct FunctionDef {
    pub params: Vec<Symbol>,
    pub body: Expr,
}

impl FunctionDef {
    pub fn new(params: &[Symbol], body: Expr) -> FunctionDef {
        FunctionDef { params: params.to_vec(), body }
    }

    /// The formal derivative node `o` evaluated through this definition.
    fn instantiate(&self, o: &Opaque) -> Result<Expr, ExprError> {
        let mut rename = BTreeMap::new();
        for (p, a) in self.params.iter().zip(o.args().iter()) {
            if p != a {
                rename.insert(p.clone(), Expr::symbol(a.clone()));
            }
        }
        let mut body = if rename.is_empty() { self.body.clone() } else { self.body.subst_with(&rename)? };
        for d in o.derivs() {
            body = body.diff(d);
        }
        Ok(body)
    }
}

impl Expr {
    /// Simultaneous substitution without the cycle check.
    pub(crate) fn subst_with(&self, bindings: &BTreeMap<Symbol, Expr>) -> Result<Expr, ExprError> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        let keys: BTreeSet<&Symbol> = bindings.keys().collect();
        self.map_atoms(&mut |a| match a {
            Atom::Sym(s) => Ok(bindings.get(s).cloned()),
            Atom::Opaque(o) => {
                if !o.args().iter().any(|s| keys.contains(s)) {
                    return Ok(None);
                }
                let mut args = Vec::with_capacity(o.args().len());
                for s in o.args() {
                    match bindings.get(s) {
                        None => args.push(s.clone()),
                        Some(v) => match v.as_symbol() {
                            Some(r) => args.push(r.clone()),
                            None => return Err(ExprError::OpaqueArgument { name: o.name().to_string(), arg: v.to_string() }),
                        },
                    }
                }
                let rename: BTreeMap<Symbol, Symbol> = o.args().iter().cloned().zip(args.iter().cloned()).collect();
                let derivs: Vec<Symbol> = o.derivs().iter().map(|d| rename[d].clone()).collect();
                let mut e = Expr::opaque(o.name(), &args);
                for d in &derivs {
                    e = e.diff(d);
                }
                Ok(Some(e))
            }
            _ => Ok(None),
        })
    }

    /// Replaces every opaque function named in `defs` (and its formal
    /// derivatives) by the corresponding concrete expression.
    pub fn substitute_functions(&self, defs: &BTreeMap<String, FunctionDef>) -> Result<Expr, ExprError> {
        self.map_atoms(&mut |a| match a {
            Atom::Opaque(o) => match defs.get(o.name()) {
                Some(def) => def.instantiate(o).map(Some),
                None => Ok(None),
            },
            _ => Ok(None),
        })
    }

    /// Rebuilds the expression, replacing the atoms for which `f` returns a
    /// value. Function arguments and group contents are visited first.
    pub(crate) fn map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Result<Option<Expr>, ExprError>) -> Result<Expr, ExprError> {
        let mut parts = Vec::with_capacity(self.num_terms());
        for (m, c) in self.terms() {
            let mut t = Expr::rational(c.clone());
            let mut untouched = super::node::Monomial::one();
            for (a, p) in m.factors() {
                let replaced = match a {
                    Atom::Fn(func, args) => {
                        let new_args = args.iter().map(|e| e.map_atoms(f)).collect::<Result<Vec<_>, _>>()?;
                        if &new_args == args {
                            None
                        } else {
                            Some(Expr::apply_func(*func, &new_args))
                        }
                    }
                    Atom::Group(g) => {
                        let ng = g.map_atoms(f)?;
                        if &ng == g {
                            None
                        } else {
                            Some(ng)
                        }
                    }
                    other => f(other)?,
                };
                match replaced {
                    Some(base) => t = &t * &base.pow(*p),
                    None => untouched = untouched.mul(&super::node::Monomial::atom(a.clone(), *p)),
                }
            }
            parts.push(&t * &Expr::term(Rational::one(), untouched));
        }
        Ok(parts.into_iter().sum())
    }
}
