use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::expr::{Expr, Monomial, Rational};

use super::{Generator, SymmetryError};

/// `[V, W]^k = V(W^k) - W(V^k)`.
pub fn bracket(v: &Generator, w: &Generator) -> Generator {
    let coeffs = std::array::from_fn(|k| &v.apply(&w.coefficients()[k]) - &w.apply(&v.coefficients()[k]));
    Generator::new(coeffs).expect("brackets of point fields are point fields")
}

/// `c[i][j][k]` with `[X_i, X_j] = Σ_k c[i][j][k] X_k` (0-based indices).
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConstants {
    pub labels: Vec<String>,
    c: Vec<Rational>,
}

impl StructureConstants {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Rational {
        let n = self.dim();
        &self.c[(i * n + j) * n + k]
    }

    /// Coefficient vector of `[X_i, X_j]`.
    pub fn bracket_vector(&self, i: usize, j: usize) -> Vec<Rational> {
        (0..self.dim()).map(|k| self.get(i, j, k).clone()).collect()
    }

    /// `[X_i, X_j]` written as a combination of the labels, e.g. `-X2`.
    pub fn entry(&self, i: usize, j: usize) -> Expr {
        (0..self.dim()).map(|k| &Expr::rational(self.get(i, j, k).clone()) * &Expr::param(&self.labels[k])).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| self.get(i, j, k) == &-self.get(j, i, k))))
    }

    /// `Σ_m c_ij^m c_mk^l + c_jk^m c_mi^l + c_ki^m c_mj^l = 0` for all indices.
    pub fn satisfies_jacobi(&self) -> bool {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = Rational::zero();
                        for m in 0..n {
                            s += self.get(i, j, m) * self.get(m, k, l);
                            s += self.get(j, k, m) * self.get(m, i, l);
                            s += self.get(k, i, m) * self.get(m, j, l);
                        }
                        if !s.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Markdown table: row `X_i`, column `X_j`, cell `[X_i, X_j]`.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| [ , ] |");
        for l in &self.labels {
            write!(out, " {l} |").unwrap();
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(self.dim()));
        out.push('\n');
        for i in 0..self.dim() {
            write!(out, "| {} |", self.labels[i]).unwrap();
            for j in 0..self.dim() {
                write!(out, " {} |", self.entry(i, j)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Structure constants of `basis`, found by an exact linear solve of each
/// bracket against the basis coefficients.
pub fn commutator_table(basis: &[Generator]) -> Result<StructureConstants, SymmetryError> {
    let n = basis.len();
    let labels: Vec<String> = basis.iter().enumerate().map(|(i, g)| g.label.clone().unwrap_or_else(|| format!("V{}", i + 1))).collect();
    let columns: Vec<BTreeMap<(usize, Monomial), Rational>> = basis.iter().map(flatten).collect();
    let mut c = vec![Rational::zero(); n * n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let b = flatten(&bracket(&basis[i], &basis[j]));
            let x = solve_in_span(&columns, &b)
                .ok_or_else(|| SymmetryError::NotClosed { left: labels[i].clone(), right: labels[j].clone() })?;
            for (k, xk) in x.into_iter().enumerate() {
                c[(i * n + j) * n + k] = xk.clone();
                c[(j * n + i) * n + k] = -xk;
            }
        }
    }
    Ok(StructureConstants { labels, c })
}

/// `(component, monomial) -> coefficient` view of a generator.
fn flatten(g: &Generator) -> BTreeMap<(usize, Monomial), Rational> {
    let mut out = BTreeMap::new();
    for (i, e) in g.coefficients().iter().enumerate() {
        for (m, q) in e.terms() {
            out.insert((i, m.clone()), q.clone());
        }
    }
    out
}

/// Solves `Σ_k x_k col_k = target` exactly; free unknowns are set to zero.
fn solve_in_span(cols: &[BTreeMap<(usize, Monomial), Rational>], target: &BTreeMap<(usize, Monomial), Rational>) -> Option<Vec<Rational>> {
    let n = cols.len();
    let mut keys: Vec<&(usize, Monomial)> = cols.iter().flat_map(|c| c.keys()).chain(target.keys()).collect();
    keys.sort();
    keys.dedup();
    let get = |m: &BTreeMap<(usize, Monomial), Rational>, k: &(usize, Monomial)| m.get(k).cloned().unwrap_or_else(Rational::zero);
    let mut rows: Vec<Vec<Rational>> =
        keys.iter().map(|k| cols.iter().map(|c| get(c, k)).chain(std::iter::once(get(target, k))).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = Rational::one() / rows[r][col].clone();
        for v in rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for k in 0..=n {
                    let d = &f * &rows[r][k];
                    rows[i][k] -= d;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (row, &col) in pivots.iter().enumerate() {
        x[col] = rows[row][n].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Context;

    #[test]
    fn basic_brackets() {
        let x = |i| Generator::basis(i);
        assert_eq!(bracket(&x(1), &x(4)).coefficients(), Generator::basis(2).scale(&Expr::int(-1)).coefficients());
        assert_eq!(bracket(&x(2), &x(4)).coefficients(), Generator::basis(1).coefficients());
        assert!(bracket(&x(3), &x(5)).is_zero());
    }

    #[test]
    fn not_closed() {
        let ctx = Context::default();
        let d = Generator::from_strings(["1", "0", "0", "0", "0"], &ctx).unwrap();
        let r = Generator::from_strings(["x^2", "0", "0", "0", "0"], &ctx).unwrap();
        let err = commutator_table(&[d, r]).unwrap_err();
        assert!(matches!(err, SymmetryError::NotClosed { .. }));
    }

    #[test]
    fn markdown_shape() {
        let t = commutator_table(&Generator::basis_all()).unwrap();
        let md = t.to_markdown();
        assert_eq!(md.lines().count(), 7);
        assert!(md.contains("| X1 | 0 | 0 | 0 | -X2 | 0 |"));
    }
}
