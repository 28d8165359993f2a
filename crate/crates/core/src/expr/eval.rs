use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::node::{Atom, Expr, Func, Opaque};
use super::subst::FunctionDef;
use super::symbol::Symbol;
use super::ExprError;

/// Absolute tolerance of the numeric equality fallback.
pub const EQUALS_TOLERANCE: f64 = 1e-9;
const EQUALS_POINTS: usize = 20;
const DEFAULT_SEED: u64 = 0x5eed_0042;

/// Numeric stand-in for an opaque function.
#[derive(Clone)]
pub enum StandIn {
    /// Concrete expression; derivatives are taken symbolically.
    Symbolic(FunctionDef),
    /// Black-box callable; derivatives by nested central differences.
    Callable(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for StandIn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StandIn::Symbolic(d) => write!(f, "Symbolic({})", d.body),
            StandIn::Callable(_) => f.write_str("Callable(..)"),
        }
    }
}

/// Values for symbols and stand-ins for opaque functions.
#[derive(Clone, Debug, Default)]
pub struct Assignment {
    pub values: BTreeMap<Symbol, f64>,
    pub functions: BTreeMap<String, StandIn>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn set(mut self, s: Symbol, v: f64) -> Assignment {
        self.values.insert(s, v);
        self
    }

    pub fn insert(&mut self, s: Symbol, v: f64) {
        self.values.insert(s, v);
    }

    pub fn with_function(mut self, name: &str, f: StandIn) -> Assignment {
        self.functions.insert(name.to_string(), f);
        self
    }

    /// Value of `s`; `pi` defaults to π.
    pub fn lookup(&self, s: &Symbol) -> Result<f64, ExprError> {
        if let Some(v) = self.values.get(s) {
            return Ok(*v);
        }
        match s {
            Symbol::Parameter(n) if &**n == "pi" => Ok(std::f64::consts::PI),
            _ => Err(ExprError::Unassigned(s.to_string())),
        }
    }
}

/// IEEE double evaluation.
pub fn eval_numeric(e: &Expr, asg: &Assignment) -> Result<f64, ExprError> {
    let mut total = 0.0;
    for (m, c) in e.terms() {
        let mut t = c.to_f64().unwrap_or(f64::NAN);
        for (a, p) in m.factors() {
            let base = eval_atom(a, asg)?;
            let v = if p.is_integer() {
                if base == 0.0 && *p.numer() < 0 {
                    return Err(ExprError::Domain(format!("division by zero in {a}")));
                }
                base.powi(*p.numer() as i32)
            } else {
                if base < 0.0 {
                    return Err(ExprError::Domain(format!("fractional power of negative value in {a}")));
                }
                if base == 0.0 && *p.numer() < 0 {
                    return Err(ExprError::Domain(format!("division by zero in {a}")));
                }
                base.powf(*p.numer() as f64 / *p.denom() as f64)
            };
            t *= v;
        }
        total += t;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(ExprError::Domain("non-finite result".into()))
    }
}

fn eval_atom(a: &Atom, asg: &Assignment) -> Result<f64, ExprError> {
    match a {
        Atom::Sym(s) => asg.lookup(s),
        Atom::Group(g) => eval_numeric(g, asg),
        Atom::Fn(f, args) => {
            let x = eval_numeric(&args[0], asg)?;
            Ok(match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Arctan => x.atan(),
                Func::Atan2 => {
                    let xx = eval_numeric(&args[1], asg)?;
                    if x == 0.0 && xx == 0.0 {
                        return Err(ExprError::Domain("atan2(0, 0)".into()));
                    }
                    x.atan2(xx)
                }
            })
        }
        Atom::Opaque(o) => eval_opaque(o, asg),
    }
}

fn eval_opaque(o: &Opaque, asg: &Assignment) -> Result<f64, ExprError> {
    let stand_in = asg.functions.get(o.name()).ok_or_else(|| ExprError::Unassigned(format!("function {}", o.name())))?;
    match stand_in {
        StandIn::Symbolic(def) => {
            let mut defs = BTreeMap::new();
            defs.insert(o.name().to_string(), def.clone());
            let concrete = Expr::from_atom(Atom::Opaque(o.clone())).substitute_functions(&defs)?;
            eval_numeric(&concrete, asg)
        }
        StandIn::Callable(f) => {
            let point = o.args().iter().map(|s| asg.lookup(s)).collect::<Result<Vec<_>, _>>()?;
            let dirs: Vec<usize> =
                o.derivs().iter().map(|d| o.args().iter().position(|a| a == d).expect("derivative over an argument")).collect();
            let h = match dirs.len() {
                0 | 1 => 1e-5,
                2 => 1e-4,
                3 => 1e-3,
                _ => 5e-3,
            };
            let v = central_difference(f.as_ref(), &point, &dirs, h);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ExprError::Domain(format!("non-finite value of {}", o.name())))
            }
        }
    }
}

fn central_difference(f: &dyn Fn(&[f64]) -> f64, point: &[f64], dirs: &[usize], h: f64) -> f64 {
    let Some((&i, rest)) = dirs.split_first() else {
        return f(point);
    };
    let mut plus = point.to_vec();
    let mut minus = point.to_vec();
    plus[i] += h;
    minus[i] -= h;
    (central_difference(f, &plus, rest, h) - central_difference(f, &minus, rest, h)) / (2.0 * h)
}

/// Uniform values in `[-2, 2]` for every free symbol of `e`, and random
/// smooth symbolic stand-ins for its opaque functions.
pub fn random_assignment(e: &Expr, rng: &mut impl Rng) -> Assignment {
    let mut asg = Assignment::new();
    for s in e.free_symbols() {
        let v = rng.gen_range(-2.0..2.0);
        asg.insert(s, v);
    }
    let mut names = BTreeMap::new();
    collect_opaque(e, &mut names);
    for (name, params) in names {
        asg.functions.insert(name, StandIn::Symbolic(random_stand_in(&params, rng)));
    }
    asg
}

fn collect_opaque(e: &Expr, out: &mut BTreeMap<String, Vec<Symbol>>) {
    for (m, _) in e.terms() {
        for (a, _) in m.factors() {
            match a {
                Atom::Opaque(o) => {
                    out.entry(o.name().to_string()).or_insert_with(|| o.args().to_vec());
                }
                Atom::Fn(_, args) => args.iter().for_each(|x| collect_opaque(x, out)),
                Atom::Group(g) => collect_opaque(g, out),
                Atom::Sym(_) => {}
            }
        }
    }
}

/// `exp(Σ w_i p_i) * (1 + Σ v_i p_i + q p_0 p_last)` with small random
/// rational weights: smooth, with generically nonzero derivatives of every
/// order.
fn random_stand_in(params: &[Symbol], rng: &mut impl Rng) -> FunctionDef {
    let mut lin = Expr::zero();
    let mut poly = Expr::one();
    for s in params {
        let w = Expr::frac(rng.gen_range(-4..=4), 8);
        let v = Expr::frac(rng.gen_range(-6..=6), 4);
        lin = &lin + &(&w * &Expr::symbol(s.clone()));
        poly = &poly + &(&v * &Expr::symbol(s.clone()));
    }
    if let (Some(first), Some(last)) = (params.first(), params.last()) {
        let q = Expr::frac(rng.gen_range(-3..=3), 2);
        poly = &poly + &(&q * &(&Expr::symbol(first.clone()) * &Expr::symbol(last.clone())));
    }
    FunctionDef::new(params, &lin.exp() * &poly)
}

/// `canonical(e1 - e2) = 0`, falling back to `|e1 - e2| < 1e-9` at 20 random
/// points in `[-2, 2]` per symbol.
pub fn equals(e1: &Expr, e2: &Expr) -> bool {
    equals_with(e1, e2, DEFAULT_SEED)
}

pub fn equals_with(e1: &Expr, e2: &Expr, seed: u64) -> bool {
    let d = e1 - e2;
    if d.is_zero() {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok_points = 0;
    let mut attempts = 0;
    while ok_points < EQUALS_POINTS {
        attempts += 1;
        if attempts > 50 * EQUALS_POINTS {
            return false;
        }
        let asg = random_assignment(&d, &mut rng);
        match eval_numeric(&d, &asg) {
            Ok(v) if v.abs() < EQUALS_TOLERANCE => ok_points += 1,
            Ok(_) => return false,
            Err(_) => continue,
        }
    }
    true
}
