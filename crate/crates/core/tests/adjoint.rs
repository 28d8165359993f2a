use liesym::adjoint::{adjoint_table, apply_adjoint, equivalent, mat_mul, normalize, AdjointMatrix, ClassId, DIM};
use liesym::expr::{Expr, Symbol};
use liesym::symmetry::{commutator_table, Generator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn identity() -> Vec<Vec<Expr>> {
    (0..DIM).map(|i| (0..DIM).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect()
}

#[test]
fn identity_at_zero() {
    for m in AdjointMatrix::all("s") {
        assert_eq!(m.at(&Expr::zero()), identity(), "X{}", m.t);
    }
}

#[test]
fn one_parameter_group_law() {
    for t in 1..=DIM {
        let m = AdjointMatrix::new(t, "s").unwrap();
        let (s, d) = (Expr::param("s"), Expr::param("delta"));
        let lhs = mat_mul(&m.at(&s), &m.at(&d));
        let rhs = m.at(&(&s + &d));
        assert_eq!(lhs, rhs, "X{t}");
    }
}

#[test]
fn derivative_at_zero_is_minus_ad() {
    let c = commutator_table(&Generator::basis_all()).unwrap();
    let s = Symbol::param("s");
    for m in AdjointMatrix::all("s") {
        for r in 0..DIM {
            for k in 0..DIM {
                let d = m.m[r][k].diff(&s);
                let at0 = liesym::expr::substitute(&d, &[(s.clone(), Expr::zero())].into_iter().collect()).unwrap();
                assert_eq!(at0, -Expr::rational(c.get(m.t - 1, r, k).clone()), "t={} r={} k={}", m.t, r + 1, k + 1);
            }
        }
    }
}

#[test]
fn unimodular_and_orthogonal_rotation_block() {
    for m in AdjointMatrix::all("s") {
        assert!(m.determinant().is_one(), "X{}: {}", m.t, m.determinant());
    }
    let m4 = AdjointMatrix::new(4, "s").unwrap();
    let block: Vec<Vec<Expr>> = m4.m[..2].iter().map(|r| r[..2].to_vec()).collect();
    let transpose: Vec<Vec<Expr>> = (0..2).map(|i| (0..2).map(|j| block[j][i].clone()).collect()).collect();
    let prod = mat_mul(&block, &transpose);
    assert!(prod[0][0].is_one() && prod[1][1].is_one() && prod[0][1].is_zero() && prod[1][0].is_zero());
}

#[test]
fn table_audit_shape() {
    let cells = adjoint_table();
    assert_eq!(cells.len(), 25);
    let row3: Vec<_> = cells.iter().filter(|c| c.t == 3).collect();
    assert!(row3.iter().all(|c| c.matches && c.expected_from_series == Expr::param(&format!("X{}", c.r))));
}

#[test]
fn empty_word_and_inverse_word() {
    let v = [0.3, -1.2, 2.0, 0.5, 0.7];
    assert_eq!(apply_adjoint(&[], &v).unwrap(), v);
    for t in 1..=DIM {
        let w = apply_adjoint(&[(t, 0.8), (t, -0.8)], &v).unwrap();
        assert!(w.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-14), "X{t}");
    }
}

#[test]
fn rotation_example_round_trip() {
    let v = [3.0, 4.0, 0.0, 0.0, 0.0];
    let n = normalize(&v).unwrap();
    let w = apply_adjoint(&n.word, &v).unwrap().map(|x| x * n.scale);
    assert!(w.iter().zip(n.class.representative()).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn negative_a2_uses_full_turn() {
    let v = [0.0, -2.0, 1.0, 0.0, 4.0];
    let n = normalize(&v).unwrap();
    assert_eq!(n.class.id, ClassId::Two);
    let w = apply_adjoint(&n.word, &v).unwrap().map(|x| x * n.scale);
    assert!(w.iter().zip(n.class.representative()).all(|(a, b)| (a - b).abs() < 1e-12), "{w:?}");
    assert!(w[1] > 0.0);
}

#[test]
fn orbit_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let v: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let word: Vec<(usize, f64)> = (0..3).map(|_| (rng.gen_range(1..=5), rng.gen_range(-3.0..3.0))).collect();
        let lambda = if rng.gen_bool(0.5) { rng.gen_range(0.2..4.0) } else { -rng.gen_range(0.2..4.0) };
        let w = apply_adjoint(&word, &v).unwrap().map(|x| lambda * x);
        assert!(equivalent(&v, &w).unwrap(), "{v:?} {word:?}");
    }
}

#[test]
fn distinct_classes_are_inequivalent() {
    let reps = [[1.0, 0.0, 0.5, 0.0, 0.0], [0.0, 0.0, 0.5, 1.0, 0.0], [0.0, 0.0, 1.0, 0.0, 0.5], [0.0, 0.0, 0.0, 0.0, 1.0]];
    for i in 0..reps.len() {
        for j in 0..reps.len() {
            assert_eq!(equivalent(&reps[i], &reps[j]).unwrap(), i == j);
        }
    }
}
