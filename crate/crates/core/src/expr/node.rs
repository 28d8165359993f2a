use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

use super::symbol::{Indep, Symbol};

/// Exact coefficient type.
pub type Rational = BigRational;
/// Exponent type: integers and simple fractions (square roots).
pub type Exponent = Ratio<i64>;

/// Elementary functions known to the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Arctan,
    /// Two-argument arctangent, `atan2(y, x)`.
    Atan2,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Arctan => "arctan",
            Func::Atan2 => "atan2",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }
}

/// An arbitrary (unknown) function of a fixed list of symbols, with formal
/// partial derivatives. `derivs` is a sorted multiset drawn from `args`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Opaque {
    pub(crate) name: Arc<str>,
    pub(crate) args: Arc<[Symbol]>,
    pub(crate) derivs: Vec<Symbol>,
}

impl Opaque {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn args(&self) -> &[Symbol] {
        &self.args
    }

    pub fn derivs(&self) -> &[Symbol] {
        &self.derivs
    }

    fn with_deriv(&self, v: &Symbol) -> Opaque {
        let mut derivs = self.derivs.clone();
        derivs.push(v.clone());
        derivs.sort();
        Opaque { name: self.name.clone(), args: self.args.clone(), derivs }
    }
}

/// Multiplicative building block of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Sym(Symbol),
    Fn(Func, Vec<Expr>),
    Opaque(Opaque),
    /// A sum (or an irreducible constant) that is raised to a power which
    /// cannot be expanded: negative or fractional.
    Group(Expr),
}

/// Product of atoms with nonzero exponents, sorted by atom.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub(crate) Vec<(Atom, Exponent)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, p: Exponent) -> Monomial {
        if p.is_zero() {
            Monomial::one()
        } else {
            Monomial(vec![(a, p)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, Exponent)] {
        &self.0
    }

    pub fn exponent_of(&self, a: &Atom) -> Exponent {
        self.0.binary_search_by(|(b, _)| b.cmp(a)).map(|i| self.0[i].1).unwrap_or_else(|_| Exponent::zero())
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let p = self.0[i].1 + other.0[j].1;
                    if !p.is_zero() {
                        out.push((self.0[i].0.clone(), p));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    pub fn pow(&self, p: Exponent) -> Monomial {
        if p.is_zero() {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, q)| (a.clone(), q * p)).collect())
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.mul(&other.pow(-Exponent::one()))
    }

    /// Monomial with the factor `a` removed.
    pub fn without(&self, a: &Atom) -> Monomial {
        Monomial(self.0.iter().filter(|(b, _)| b != a).cloned().collect())
    }

    /// Pure lexicographic monomial order over exponent vectors. Unlike the
    /// derived `Ord`, this order is compatible with multiplication, which the
    /// exact division below relies on.
    pub fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let (mut i, mut j) = (0, 0);
        let zero = Exponent::zero();
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => return self.0[i].1.cmp(&zero),
                Ordering::Greater => return zero.cmp(&other.0[j].1),
                Ordering::Equal => {
                    let c = self.0[i].1.cmp(&other.0[j].1);
                    if c != Ordering::Equal {
                        return c;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        if i < self.0.len() {
            return self.0[i].1.cmp(&zero);
        }
        if j < other.0.len() {
            return zero.cmp(&other.0[j].1);
        }
        Ordering::Equal
    }

    /// Total degree counted over symbol atoms only.
    pub fn degree(&self) -> Exponent {
        self.0.iter().map(|(_, p)| *p).fold(Exponent::zero(), |a, b| a + b)
    }
}

/// Immutable symbolic expression, always held in canonical form: a sum of
/// rational multiples of distinct monomials, zero terms removed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    terms: Arc<BTreeMap<Monomial, Rational>>,
}

/// Accumulates terms while enforcing the monomial-level rewrite rules.
#[derive(Default)]
pub(crate) struct Acc {
    map: BTreeMap<Monomial, Rational>,
}

impl Acc {
    pub(crate) fn new() -> Acc {
        Acc::default()
    }

    pub(crate) fn push(&mut self, c: Rational, m: Monomial) {
        if c.is_zero() {
            return;
        }
        // sin(a)^n, n >= 2  ->  sin(a)^(n-2) * (1 - cos(a)^2)
        if let Some(pos) =
            m.0.iter().position(|(a, p)| matches!(a, Atom::Fn(Func::Sin, _)) && p.is_integer() && *p >= Exponent::from_integer(2))
        {
            let (atom, p) = m.0[pos].clone();
            let arg = match &atom {
                Atom::Fn(_, args) => args[0].clone(),
                _ => unreachable!(),
            };
            let mut reduced = m.clone();
            let q = p - Exponent::from_integer(2);
            if q.is_zero() {
                reduced.0.remove(pos);
            } else {
                reduced.0[pos].1 = q;
            }
            let cos2 = Monomial::atom(Atom::Fn(Func::Cos, vec![arg]), Exponent::from_integer(2));
            self.push(-c.clone(), reduced.mul(&cos2));
            self.push(c, reduced);
            return;
        }
        // Group(g)^k for a positive integer k is expanded.
        if let Some(pos) = m.0.iter().position(|(a, p)| matches!(a, Atom::Group(_)) && p.is_integer() && *p > Exponent::zero()) {
            let (atom, p) = m.0[pos].clone();
            let content = match atom {
                Atom::Group(g) => g,
                _ => unreachable!(),
            };
            let mut rest = m.clone();
            rest.0.remove(pos);
            let expanded = content.powi(*p.numer());
            for (m2, c2) in expanded.terms.iter() {
                self.push(&c * c2, rest.mul(m2));
            }
            return;
        }
        match self.map.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn push_expr(&mut self, e: &Expr, scale: &Rational) {
        for (m, c) in e.terms.iter() {
            self.push(c * scale, m.clone());
        }
    }

    /// Adds `c * m * e`.
    pub(crate) fn push_scaled_product(&mut self, c: &Rational, m: &Monomial, e: &Expr) {
        for (m2, c2) in e.terms.iter() {
            self.push(c * c2, m.mul(m2));
        }
    }

    fn finish_raw(self) -> Expr {
        Expr { terms: Arc::new(self.map) }
    }

    pub(crate) fn finish(self) -> Expr {
        let e = self.finish_raw();
        if e.has_negative_group() {
            cancel_groups(e)
        } else {
            e
        }
    }
}

impl Expr {
    pub fn zero() -> Expr {
        Expr { terms: Arc::new(BTreeMap::new()) }
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::rational(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn rational(q: Rational) -> Expr {
        Expr::term(q, Monomial::one())
    }

    pub fn term(c: Rational, m: Monomial) -> Expr {
        let mut acc = Acc::new();
        acc.push(c, m);
        acc.finish()
    }

    pub fn symbol(s: Symbol) -> Expr {
        Expr::term(Rational::one(), Monomial::atom(Atom::Sym(s), Exponent::one()))
    }

    pub fn indep(v: Indep) -> Expr {
        Expr::symbol(Symbol::Independent(v))
    }

    pub fn param(name: &str) -> Expr {
        Expr::symbol(Symbol::param(name))
    }

    pub fn dep(name: &str) -> Expr {
        Expr::symbol(Symbol::dep(name))
    }

    /// Opaque function application `name(args...)`.
    pub fn opaque(name: &str, args: &[Symbol]) -> Expr {
        let o = Opaque { name: Arc::from(name), args: Arc::from(args.to_vec()), derivs: Vec::new() };
        Expr::from_atom(Atom::Opaque(o))
    }

    pub fn from_atom(a: Atom) -> Expr {
        Expr::term(Rational::one(), Monomial::atom(a, Exponent::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    /// The value if this is a constant.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        match m.0.as_slice() {
            [(Atom::Sym(s), p)] if p.is_one() && c.is_one() => Some(s),
            _ => None,
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Leading term under [`Monomial::lex_cmp`].
    pub(crate) fn lex_leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| a.0.lex_cmp(b.0))
    }

    pub fn scale(&self, q: &Rational) -> Expr {
        if q.is_zero() {
            return Expr::zero();
        }
        let map = self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect();
        Expr { terms: Arc::new(map) }
    }

    fn add_expr(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut map = (*self.terms).clone();
        for (m, c) in other.terms.iter() {
            match map.entry(m.clone()) {
                Entry::Vacant(v) => {
                    v.insert(c.clone());
                }
                Entry::Occupied(mut o) => {
                    *o.get_mut() += c;
                    if o.get().is_zero() {
                        o.remove();
                    }
                }
            }
        }
        let e = Expr { terms: Arc::new(map) };
        if e.has_negative_group() {
            cancel_groups(e)
        } else {
            e
        }
    }

    fn mul_acc(&self, other: &Expr) -> Acc {
        let mut acc = Acc::new();
        for (m1, c1) in self.terms.iter() {
            for (m2, c2) in other.terms.iter() {
                acc.push(c1 * c2, m1.mul(m2));
            }
        }
        acc
    }

    fn mul_expr(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        self.mul_acc(other).finish()
    }

    fn mul_raw(&self, other: &Expr) -> Expr {
        self.mul_acc(other).finish_raw()
    }

    /// Integer power; expands sums for positive exponents.
    pub fn powi(&self, n: i64) -> Expr {
        if n >= 0 && self.terms.len() > 1 {
            let mut result = Expr::one();
            let mut base = self.clone();
            let mut k = n;
            while k > 0 {
                if k & 1 == 1 {
                    result = &result * &base;
                }
                k >>= 1;
                if k > 0 {
                    base = &base * &base;
                }
            }
            return result;
        }
        self.pow(Exponent::from_integer(n))
    }

    /// General rational power. Symbols are treated as positive, so
    /// `(x^2)^(1/2) = x`.
    ///
    /// Panics when a zero expression is raised to a negative power; callers
    /// handling user input check divisors first.
    pub fn pow(&self, p: Exponent) -> Expr {
        if p.is_zero() {
            return Expr::one();
        }
        if p.is_one() {
            return self.clone();
        }
        if self.is_zero() {
            assert!(p > Exponent::zero(), "zero raised to a negative power");
            return Expr::zero();
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if p.is_integer() {
                let cp = c.pow(*p.numer() as i32);
                return Expr::term(cp, m.pow(p));
            }
            if c.is_positive() {
                let mut acc = Acc::new();
                match rational_root(c, p) {
                    Some(r) => acc.push(r, m.pow(p)),
                    None => {
                        let g = Monomial::atom(Atom::Group(Expr::rational(c.clone())), p);
                        acc.push(Rational::one(), g.mul(&m.pow(p)));
                    }
                }
                return acc.finish();
            }
            return Expr::term(Rational::one(), Monomial::atom(Atom::Group(self.clone()), p));
        }
        if p.is_integer() && p > Exponent::zero() {
            return self.powi(*p.numer());
        }
        let (_, lc) = self.lex_leading().unwrap();
        let lc = lc.clone();
        let content = self.scale(&lc.recip());
        let prefactor = if p.is_integer() {
            Some(Rational::one() * lc.pow(*p.numer() as i32))
        } else if lc.is_positive() {
            rational_root(&lc, p)
        } else {
            None
        };
        match prefactor {
            Some(pf) => Expr::term(pf, Monomial::atom(Atom::Group(content), p)),
            None => Expr::term(Rational::one(), Monomial::atom(Atom::Group(self.clone()), p)),
        }
    }

    pub fn recip(&self) -> Expr {
        self.pow(-Exponent::one())
    }

    pub fn sqrt(&self) -> Expr {
        self.pow(Exponent::new(1, 2))
    }

    /// Single-term expression whose coefficient is negative.
    fn is_negative_term(&self) -> bool {
        self.terms.len() == 1 && self.terms.values().next().unwrap().is_negative()
    }

    /// Splits a sum into its first term and the remainder.
    fn split_first(&self) -> (Expr, Expr) {
        let mut it = self.terms.iter();
        let (m, c) = it.next().unwrap();
        let first = Expr::term(c.clone(), m.clone());
        let rest: BTreeMap<_, _> = it.map(|(m, c)| (m.clone(), c.clone())).collect();
        (first, Expr { terms: Arc::new(rest) })
    }

    pub fn sin(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        if self.terms.len() > 1 {
            let (a, b) = self.split_first();
            return &(&a.sin() * &b.cos()) + &(&a.cos() * &b.sin());
        }
        if self.is_negative_term() {
            return -(-self).sin();
        }
        Expr::from_atom(Atom::Fn(Func::Sin, vec![self.clone()]))
    }

    pub fn cos(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        if self.terms.len() > 1 {
            let (a, b) = self.split_first();
            return &(&a.cos() * &b.cos()) - &(&a.sin() * &b.sin());
        }
        if self.is_negative_term() {
            return (-self).cos();
        }
        Expr::from_atom(Atom::Fn(Func::Cos, vec![self.clone()]))
    }

    pub fn exp(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        Expr::from_atom(Atom::Fn(Func::Exp, vec![self.clone()]))
    }

    pub fn arctan(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        if self.is_negative_term() {
            return -(-self).arctan();
        }
        Expr::from_atom(Atom::Fn(Func::Arctan, vec![self.clone()]))
    }

    /// `atan2(self, x)`: angle of the point `(x, self)`.
    pub fn atan2(&self, x: &Expr) -> Expr {
        if self.is_zero() && x.as_rational().is_some_and(|q| q.is_positive()) {
            return Expr::zero();
        }
        Expr::from_atom(Atom::Fn(Func::Atan2, vec![self.clone(), x.clone()]))
    }

    pub(crate) fn apply_func(f: Func, args: &[Expr]) -> Expr {
        match f {
            Func::Sin => args[0].sin(),
            Func::Cos => args[0].cos(),
            Func::Exp => args[0].exp(),
            Func::Arctan => args[0].arctan(),
            Func::Atan2 => args[0].atan2(&args[1]),
        }
    }

    fn has_negative_group(&self) -> bool {
        self.terms.keys().any(|m| m.0.iter().any(|(a, p)| matches!(a, Atom::Group(_)) && *p < Exponent::zero()))
    }

    /// Every symbol the expression depends on, including the argument
    /// symbols of opaque functions.
    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                match a {
                    Atom::Sym(s) => {
                        out.insert(s.clone());
                    }
                    Atom::Fn(_, args) => args.iter().for_each(|e| e.collect_symbols(out)),
                    Atom::Opaque(o) => out.extend(o.args.iter().cloned()),
                    Atom::Group(g) => g.collect_symbols(out),
                }
            }
        }
    }

    pub fn contains_symbol(&self, s: &Symbol) -> bool {
        self.terms.keys().any(|m| m.0.iter().any(|(a, _)| atom_contains(a, s)))
    }

    /// Whether any opaque function application occurs.
    pub fn has_opaque(&self) -> bool {
        self.terms.keys().any(|m| {
            m.0.iter().any(|(a, _)| match a {
                Atom::Opaque(_) => true,
                Atom::Fn(_, args) => args.iter().any(Expr::has_opaque),
                Atom::Group(g) => g.has_opaque(),
                Atom::Sym(_) => false,
            })
        })
    }

    /// Partial derivative with respect to `v`, treating every other symbol
    /// (jets included) as independent.
    pub fn diff(&self, v: &Symbol) -> Expr {
        let mut acc = Acc::new();
        for (m, c) in self.terms.iter() {
            for (i, (a, p)) in m.0.iter().enumerate() {
                if !atom_contains(a, v) {
                    continue;
                }
                let da = atom_diff(a, v);
                if da.is_zero() {
                    continue;
                }
                let mut rest = m.clone();
                let q = p - Exponent::one();
                if q.is_zero() {
                    rest.0.remove(i);
                } else {
                    rest.0[i].1 = q;
                }
                let coeff = c * Rational::new(BigInt::from(*p.numer()), BigInt::from(*p.denom()));
                acc.push_scaled_product(&coeff, &rest, &da);
            }
        }
        acc.finish()
    }

    /// Coefficient of `s` in an expression that is affine in `s`.
    pub fn linear_coefficient(&self, s: &Symbol) -> Expr {
        self.diff(s)
    }
}

fn atom_contains(a: &Atom, s: &Symbol) -> bool {
    match a {
        Atom::Sym(t) => t == s,
        Atom::Fn(_, args) => args.iter().any(|e| e.contains_symbol(s)),
        Atom::Opaque(o) => o.args.contains(s),
        Atom::Group(g) => g.contains_symbol(s),
    }
}

fn atom_diff(a: &Atom, v: &Symbol) -> Expr {
    match a {
        Atom::Sym(s) => {
            if s == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Atom::Opaque(o) => {
            if o.args.contains(v) {
                Expr::from_atom(Atom::Opaque(o.with_deriv(v)))
            } else {
                Expr::zero()
            }
        }
        Atom::Group(g) => g.diff(v),
        Atom::Fn(f, args) => match f {
            Func::Sin => &args[0].cos() * &args[0].diff(v),
            Func::Cos => -(&args[0].sin() * &args[0].diff(v)),
            Func::Exp => &args[0].exp() * &args[0].diff(v),
            Func::Arctan => {
                let den = &Expr::one() + &args[0].powi(2);
                &args[0].diff(v) * &den.recip()
            }
            Func::Atan2 => {
                let (y, x) = (&args[0], &args[1]);
                let num = &(x * &y.diff(v)) - &(y * &x.diff(v));
                let den = &x.powi(2) + &y.powi(2);
                &num * &den.recip()
            }
        },
    }
}

/// Exact root `c^p` for a positive rational, when it exists.
fn rational_root(c: &Rational, p: Exponent) -> Option<Rational> {
    let d = *p.denom() as u32;
    let root = |n: &BigInt| -> Option<BigInt> {
        let r = n.nth_root(d);
        (r.pow(d) == *n).then_some(r)
    };
    let rn = root(c.numer())?;
    let rd = root(c.denom())?;
    Some(Rational::new(rn, rd).pow(*p.numer() as i32))
}

/// Combines the terms carrying a negative power of the same sum over that
/// common denominator, then cancels exact factors of it.
fn cancel_groups(e: Expr) -> Expr {
    let mut groups: BTreeSet<Expr> = BTreeSet::new();
    for m in e.terms.keys() {
        for (a, p) in &m.0 {
            if let Atom::Group(g) = a {
                if *p < Exponent::zero() && g.terms.len() > 1 {
                    groups.insert(g.clone());
                }
            }
        }
    }
    let mut cur = e;
    for g in groups {
        let atom = Atom::Group(g.clone());
        let mut rest = Acc::new();
        let mut parts: Vec<(Rational, Monomial, Exponent)> = Vec::new();
        for (m, c) in cur.terms.iter() {
            let p = m.exponent_of(&atom);
            if p < Exponent::zero() {
                parts.push((c.clone(), m.without(&atom), p));
            } else {
                rest.push(c.clone(), m.clone());
            }
        }
        if parts.len() < 2 || parts.iter().any(|(_, _, p)| !p.is_integer()) {
            continue;
        }
        let pmin = parts.iter().map(|(_, _, p)| *p).min().unwrap();
        let mut numer = Acc::new();
        for (c, m, p) in &parts {
            let lift = g.powi(*(p - pmin).numer());
            numer.push_scaled_product(c, m, &lift);
        }
        let mut numer = numer.finish_raw();
        let mut k = pmin;
        while k < Exponent::zero() {
            match exact_div(&numer, &g) {
                Some(q) => {
                    numer = q;
                    k += Exponent::one();
                }
                None => break,
            }
        }
        let gk = Monomial::atom(atom, k);
        for (m, c) in numer.terms.iter() {
            rest.push(c.clone(), m.mul(&gk));
        }
        cur = rest.finish_raw();
    }
    cur
}

/// Exact quotient `n / d` by multivariate division, if it exists.
fn exact_div(n: &Expr, d: &Expr) -> Option<Expr> {
    let (dm, dc) = d.lex_leading()?;
    let (dm, dc) = (dm.clone(), dc.clone());
    let mut r = n.clone();
    let mut q = Acc::new();
    let limit = 4 * (n.terms.len() + 1) * (d.terms.len() + 1);
    for _ in 0..limit {
        let Some((m, c)) = r.lex_leading() else {
            return Some(q.finish_raw());
        };
        let qm = m.div(&dm);
        let qc = c / &dc;
        let t = Expr::term(qc.clone(), qm.clone());
        q.push(qc, qm);
        r = r.add_raw(&-(d.mul_raw(&t)));
    }
    None
}

impl Expr {
    fn add_raw(&self, other: &Expr) -> Expr {
        let mut acc = Acc { map: (*self.terms).clone() };
        acc.push_expr(other, &Rational::one());
        acc.finish_raw()
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Expr {
        Expr::symbol(s)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(&-Rational::one())
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                (&self).$method(rhs)
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.add_expr(b));
binop!(Sub, sub, |a, b| a.add_expr(&-b));
binop!(Mul, mul, |a, b| a.mul_expr(b));

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        let mut acc = Acc::new();
        let one = Rational::one();
        for e in iter {
            acc.push_expr(&e, &one);
        }
        acc.finish()
    }
}
