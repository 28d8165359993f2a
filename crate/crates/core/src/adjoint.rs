//! Adjoint action of the five-dimensional symmetry algebra, audit of the
//! printed adjoint table, and normalization of algebra elements to the
//! optimal list of one-dimensional subalgebras.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::expr::{eval_numeric, parse, Assignment, Context, Expr, Rational, Symbol};
use crate::symmetry::{commutator_table, Generator, StructureConstants, SymmetryError, BASIS_LABELS};

pub const DIM: usize = 5;
/// Coordinates in the basis `X1..X5`.
pub type CoeffVector = [f64; DIM];

const MAX_SERIES_TERMS: usize = 12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AdjointError {
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error("basis index {0} outside 1..=5")]
    BadIndex(usize),
    #[error("adjoint series of X{0} neither terminates nor closes into a rotation within {MAX_SERIES_TERMS} terms")]
    SeriesNotRecognized(usize),
    #[error("non-finite group parameter {0}")]
    NonFinite(f64),
    #[error("the zero vector spans no subalgebra")]
    ZeroVector,
}

/// `m[r][k]`: coefficient of `X_k` in `Ad(exp(s X_t)) X_r` (0-based), so
/// row `r` is the image of `X_r`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointMatrix {
    pub t: usize,
    pub param: Symbol,
    pub m: Vec<Vec<Expr>>,
}

fn structure() -> StructureConstants {
    commutator_table(&Generator::basis_all()).expect("basis is closed")
}

/// `ad_t` in row convention: `a[r][k] = c_{t r}^k`.
fn ad_matrix(c: &StructureConstants, t: usize) -> Vec<Vec<Rational>> {
    (0..DIM).map(|r| (0..DIM).map(|k| c.get(t, r, k).clone()).collect()).collect()
}

fn rat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).fold(Rational::zero(), |acc, k| acc + &a[i][k] * &b[k][j])).collect()).collect()
}

fn rat_is_zero(a: &[Vec<Rational>]) -> bool {
    a.iter().flatten().all(Zero::is_zero)
}

fn identity_expr() -> Vec<Vec<Expr>> {
    (0..DIM).map(|i| (0..DIM).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect()
}

fn lift(a: &[Vec<Rational>]) -> Vec<Vec<Expr>> {
    a.iter().map(|row| row.iter().map(|q| Expr::rational(q.clone())).collect()).collect()
}

pub fn mat_mul(a: &[Vec<Expr>], b: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
}

fn mat_add_scaled(acc: &mut [Vec<Expr>], k: &Expr, a: &[Vec<Expr>]) {
    for (row, arow) in acc.iter_mut().zip(a) {
        for (x, y) in row.iter_mut().zip(arow) {
            *x = &*x + &(k * y);
        }
    }
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant(a: &[Vec<Expr>]) -> Expr {
    let n = a.len();
    if n == 1 {
        return a[0][0].clone();
    }
    let mut total = Expr::zero();
    for j in 0..n {
        if a[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Expr>> =
            a[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, e)| e.clone()).collect()).collect();
        let term = &a[0][j] * &determinant(&minor);
        total = if j % 2 == 0 { &total + &term } else { &total - &term };
    }
    total
}

impl AdjointMatrix {
    /// `Ad(exp(s X_t))` for `t` in `1..=5`, from the series
    /// `X_r - s[X_t, X_r] + s^2/2 [X_t, [X_t, X_r]] - ...`, summed in closed
    /// form when `ad_t` is nilpotent or satisfies `ad^3 = -w^2 ad`.
    pub fn new(t: usize, param: &str) -> Result<AdjointMatrix, AdjointError> {
        if !(1..=DIM).contains(&t) {
            return Err(AdjointError::BadIndex(t));
        }
        let c = structure();
        let a = ad_matrix(&c, t - 1);
        let s = Expr::param(param);
        let mut powers = vec![a.clone()];
        while !rat_is_zero(powers.last().unwrap()) && powers.len() < MAX_SERIES_TERMS {
            let next = rat_mul(powers.last().unwrap(), &a);
            powers.push(next);
        }
        let mut m = identity_expr();
        if rat_is_zero(powers.last().unwrap()) {
            // nilpotent: exp(-s A) = Σ (-s)^n / n! A^n
            let mut coeff = Expr::one();
            for (n, p) in powers.iter().enumerate() {
                coeff = &(&coeff * &(-&s)) * &Expr::frac(1, (n + 1) as i64);
                mat_add_scaled(&mut m, &coeff, &lift(p));
            }
        } else {
            let omega = rotation_frequency(&powers).ok_or(AdjointError::SeriesNotRecognized(t))?;
            // exp(-s A) = I - sin(w s)/w A + (1 - cos(w s))/w^2 A^2
            let ws = &Expr::rational(omega.clone()) * &s;
            let inv = Expr::rational(Rational::one() / &omega);
            mat_add_scaled(&mut m, &-(&ws.sin() * &inv), &lift(&powers[0]));
            mat_add_scaled(&mut m, &(&(&Expr::one() - &ws.cos()) * &(&inv * &inv)), &lift(&powers[1]));
        }
        Ok(AdjointMatrix { t, param: Symbol::param(param), m })
    }

    pub fn all(param: &str) -> Vec<AdjointMatrix> {
        (1..=DIM).map(|t| AdjointMatrix::new(t, param).expect("closed-form adjoint")).collect()
    }

    /// The matrix with its parameter replaced by `value`.
    pub fn at(&self, value: &Expr) -> Vec<Vec<Expr>> {
        let bind = [(self.param.clone(), value.clone())].into_iter().collect();
        self.m.iter().map(|row| row.iter().map(|e| e.subst_with(&bind).expect("symbol substitution")).collect()).collect()
    }

    /// Numeric entries at `s = value`.
    pub fn evaluate(&self, value: f64) -> Result<[[f64; DIM]; DIM], AdjointError> {
        if !value.is_finite() {
            return Err(AdjointError::NonFinite(value));
        }
        let asg = Assignment::new().set(self.param.clone(), value);
        let mut out = [[0.0; DIM]; DIM];
        for (r, row) in self.m.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                out[r][k] = eval_numeric(e, &asg).map_err(SymmetryError::from)?;
            }
        }
        Ok(out)
    }

    /// `Ad(exp(s X_t)) X_r` as a combination of the basis labels.
    pub fn image(&self, r: usize) -> Expr {
        self.m[r].iter().zip(BASIS_LABELS).map(|(c, l)| c * &Expr::param(l)).sum()
    }

    pub fn determinant(&self) -> Expr {
        determinant(&self.m)
    }
}

/// `w` with `A^3 = -w^2 A`, `w` a positive rational.
fn rotation_frequency(powers: &[Vec<Vec<Rational>>]) -> Option<Rational> {
    let (a, a3) = (&powers[0], powers.get(2)?);
    let (i, j) = (0..DIM).flat_map(|i| (0..DIM).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero())?;
    let w2 = -(&a3[i][j] / &a[i][j]);
    if !w2.is_positive() {
        return None;
    }
    let consistent = (0..DIM).all(|i| (0..DIM).all(|j| a3[i][j] == -(&w2 * &a[i][j])));
    if !consistent {
        return None;
    }
    let num = w2.numer().sqrt();
    let den = w2.denom().sqrt();
    (&num * &num == *w2.numer() && &den * &den == *w2.denom()).then(|| Rational::new(num, den))
}

/// One cell of the adjoint-table audit.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditCell {
    pub t: usize,
    pub r: usize,
    pub expected_from_series: Expr,
    pub printed: Expr,
    pub matches: bool,
}

/// Printed adjoint table, row `X_t`, column `X_r`.
pub const PRINTED_ADJOINT_TABLE: [[&str; DIM]; DIM] = [
    ["X1", "X2 - s*X4", "X3", "X4", "X5"],
    ["X1 + s*X4", "X2", "X3", "X4", "X5"],
    ["X1", "X2", "X3", "X4", "X5"],
    ["cos(s)*X1 - sin(s)*X2", "sin(s)*X1 + cos(s)*X2", "X3", "X4", "X5"],
    ["X1", "X2", "X3", "X4", "X5"],
];

/// Adjoint matrices as printed, in row convention, parameter `s`.
pub const PRINTED_MATRICES: [[[&str; DIM]; DIM]; DIM] = [
    [
        ["1", "0", "0", "0", "0"],
        ["0", "1", "0", "-s", "0"],
        ["0", "0", "1", "0", "0"],
        ["0", "0", "0", "1", "0"],
        ["0", "0", "0", "0", "1"],
    ],
    [["1", "0", "0", "s", "0"], ["0", "1", "0", "0", "0"], ["0", "0", "1", "0", "0"], ["0", "0", "0", "1", "0"], ["0", "0", "0", "0", "1"]],
    [["1", "0", "0", "0", "0"], ["0", "1", "0", "0", "0"], ["0", "0", "1", "0", "0"], ["0", "0", "0", "1", "0"], ["0", "0", "0", "0", "1"]],
    [
        ["cos(s)", "-sin(s)", "0", "0", "0"],
        ["sin(s)", "cos(s)", "0", "0", "0"],
        ["0", "0", "1", "0", "0"],
        ["0", "0", "0", "1", "0"],
        ["0", "0", "0", "0", "1"],
    ],
    [["1", "0", "0", "0", "0"], ["0", "1", "0", "0", "0"], ["0", "0", "1", "0", "0"], ["0", "0", "0", "1", "0"], ["0", "0", "0", "0", "1"]],
];

fn label_context() -> Context {
    BASIS_LABELS.iter().fold(Context::default(), |c, l| c.with_param(l))
}

/// 5×5 table of `Ad(exp(s X_t)) X_r`, compared cell by cell with the
/// printed table.
pub fn adjoint_table() -> Vec<AuditCell> {
    let ctx = label_context();
    let mut out = Vec::new();
    for (t, m) in AdjointMatrix::all("s").iter().enumerate() {
        for r in 0..DIM {
            let expected = m.image(r);
            let printed = parse(PRINTED_ADJOINT_TABLE[t][r], &ctx).expect("static table");
            out.push(AuditCell { t: t + 1, r: r + 1, matches: expected == printed, expected_from_series: expected, printed });
        }
    }
    out
}

/// Entry-wise comparison of the computed matrices with the printed ones;
/// `(t, row, col, computed, printed)` for every differing entry.
pub fn matrix_audit() -> Vec<(usize, usize, usize, Expr, Expr)> {
    let ctx = Context::default();
    let mut out = Vec::new();
    for (t, m) in AdjointMatrix::all("s").iter().enumerate() {
        for r in 0..DIM {
            for k in 0..DIM {
                let printed = parse(PRINTED_MATRICES[t][r][k], &ctx).expect("static matrix");
                if printed != m.m[r][k] {
                    out.push((t + 1, r + 1, k + 1, m.m[r][k].clone(), printed));
                }
            }
        }
    }
    out
}

/// Applies the letters of `word` in order, first letter first:
/// `v ↦ Ad(exp(s_1 X_{t_1})) v ↦ ...`.
pub fn apply_adjoint(word: &[(usize, f64)], v: &CoeffVector) -> Result<CoeffVector, AdjointError> {
    let mut cur = *v;
    for &(t, s) in word {
        let m = AdjointMatrix::new(t, "s")?.evaluate(s)?;
        let mut next = [0.0; DIM];
        for (r, row) in m.iter().enumerate() {
            for k in 0..DIM {
                next[k] += cur[r] * row[k];
            }
        }
        cur = next;
    }
    Ok(cur)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassId {
    /// `X1 + c1 X3 + c2 X5`
    One,
    /// `X2 + c1 X3 + c2 X5`
    Two,
    /// `X4 + c1 X3 + c2 X5`
    Three,
    /// `X3 + c1 X5`
    Four,
    /// `X5`
    FourB,
}

impl ClassId {
    pub fn label(self) -> &'static str {
        match self {
            ClassId::One => "1",
            ClassId::Two => "2",
            ClassId::Three => "3",
            ClassId::Four => "4",
            ClassId::FourB => "4b",
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalClass {
    pub id: ClassId,
    pub c1: f64,
    pub c2: f64,
}

impl OptimalClass {
    pub fn representative(&self) -> CoeffVector {
        let (c1, c2) = (self.c1, self.c2);
        match self.id {
            ClassId::One => [1.0, 0.0, c1, 0.0, c2],
            ClassId::Two => [0.0, 1.0, c1, 0.0, c2],
            ClassId::Three => [0.0, 0.0, c1, 1.0, c2],
            ClassId::Four => [0.0, 0.0, 1.0, 0.0, c1],
            ClassId::FourB => [0.0, 0.0, 0.0, 0.0, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub class: OptimalClass,
    /// Adjoint letters `(t, s)`, applied first to last.
    pub word: Vec<(usize, f64)>,
    /// `scale * apply_adjoint(word, v)` is the representative.
    pub scale: f64,
}

fn negligible(x: f64, norm: f64) -> bool {
    x.abs() <= 1e-12 * norm
}

/// Case analysis on `a4`, then `a2`, then `a1`, then `a3`.
pub fn normalize(v: &CoeffVector) -> Result<Normalization, AdjointError> {
    if let Some(&x) = v.iter().find(|x| !x.is_finite()) {
        return Err(AdjointError::NonFinite(x));
    }
    let norm = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if norm == 0.0 {
        return Err(AdjointError::ZeroVector);
    }
    let [a1, a2, a3, a4, a5] = *v;
    let mut word = Vec::new();
    let (id, scale, c1, c2);
    if !negligible(a4, norm) {
        if !negligible(a1, norm) {
            word.push((2, a1 / a4));
        }
        if !negligible(a2, norm) {
            word.push((1, -a2 / a4));
        }
        (id, scale, c1, c2) = (ClassId::Three, 1.0 / a4, a3 / a4, a5 / a4);
    } else if !negligible(a2, norm) {
        let r = a1.hypot(a2);
        if !negligible(a1, norm) || a2 < 0.0 {
            word.push((4, (-a1).atan2(a2)));
        }
        (id, scale, c1, c2) = (ClassId::Two, 1.0 / r, a3 / r, a5 / r);
    } else if !negligible(a1, norm) {
        (id, scale, c1, c2) = (ClassId::One, 1.0 / a1, a3 / a1, a5 / a1);
    } else if !negligible(a3, norm) {
        (id, scale, c1, c2) = (ClassId::Four, 1.0 / a3, a5 / a3, 0.0);
    } else {
        (id, scale, c1, c2) = (ClassId::FourB, 1.0 / a5, 0.0, 0.0);
    }
    Ok(Normalization { class: OptimalClass { id, c1, c2 }, word, scale })
}

/// Orbit-level invariant: classes 1 and 2 are one orbit (a quarter turn
/// maps `X1` to `-X2`) whose parameters are fixed only up to a joint sign.
fn orbit_key(c: &OptimalClass) -> (u8, f64, f64) {
    match c.id {
        ClassId::One | ClassId::Two => {
            let flip = c.c1 < 0.0 || (c.c1 == 0.0 && c.c2 < 0.0);
            if flip {
                (1, -c.c1, -c.c2)
            } else {
                (1, c.c1, c.c2)
            }
        }
        ClassId::Three => (3, c.c1, c.c2),
        ClassId::Four => (4, c.c1, 0.0),
        ClassId::FourB => (5, 0.0, 0.0),
    }
}

/// Whether `v` and `w` span adjoint-equivalent one-dimensional subalgebras.
pub fn equivalent(v: &CoeffVector, w: &CoeffVector) -> Result<bool, AdjointError> {
    let (a, b) = (orbit_key(&normalize(v)?.class), orbit_key(&normalize(w)?.class));
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()));
    Ok(a.0 == b.0 && close(a.1, b.1) && close(a.2, b.2))
}
