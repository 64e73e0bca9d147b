//! Closed-form derivatives of the forward map against central finite differences.

use proptest::prelude::*;
use waring_core::polyspace::{forward_hessian_contraction, forward_jacobian, forward_map, summand_tangent_rows};
use waring_core::{Complex64, ComplexRing, ProblemSpec};

const H: f64 = 1e-5;

fn specs() -> Vec<ProblemSpec> {
    [(1, vec![3]), (2, vec![2, 2]), (2, vec![2, 3, 3, 3]), (3, vec![2, 3]), (2, vec![3, 4, 5])]
        .into_iter()
        .map(|(n, d)| ProblemSpec::new(n, d).unwrap())
        .collect()
}

fn to_complex(re: &[f64], im: &[f64]) -> Vec<Complex64> {
    re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()
}

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = a.iter().chain(b).map(|z| z.norm()).fold(1.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

fn point_strategy(len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-1.0..1.0f64, len), prop::collection::vec(-0.5..0.5f64, len))
}

#[test]
fn jacobian_matches_central_differences() {
    for spec in specs() {
        let k = 2;
        let len = k * spec.block_size();
        let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(20));
        runner
            .run(&point_strategy(len), |(re, im)| {
                let u = to_complex(&re, &im);
                let jac = forward_jacobian(&ComplexRing, &spec, &u).unwrap();
                for s in 0..len {
                    let mut up = u.clone();
                    let mut dn = u.clone();
                    up[s] += H;
                    dn[s] -= H;
                    let fp = forward_map(&ComplexRing, &spec, &up).unwrap();
                    let fm = forward_map(&ComplexRing, &spec, &dn).unwrap();
                    let fd: Vec<Complex64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * H)).collect();
                    let col: Vec<Complex64> = (0..jac.rows()).map(|i| jac.get(i, s)).collect();
                    let e = rel_err(&col, &fd);
                    prop_assert!(e < 1e-6, "{spec}: column {s} relative error {e:e}");
                }
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn hessian_contraction_matches_differenced_tangents() {
    for spec in specs() {
        let bs = spec.block_size();
        let n_amb = spec.ambient_dim();
        let strategy = (point_strategy(bs), point_strategy(n_amb));
        let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(20));
        runner
            .run(&strategy, |((re, im), (kre, kim))| {
                let u = to_complex(&re, &im);
                let cov = to_complex(&kre, &kim);
                let hess = forward_hessian_contraction(&ComplexRing, &spec, &u, &cov).unwrap();
                let contract = |v: &[Complex64]| -> Vec<Complex64> {
                    let rows = summand_tangent_rows(&ComplexRing, &spec, v).unwrap();
                    (0..bs).map(|s| rows.row(s).iter().zip(&cov).map(|(a, b)| a * b).sum()).collect()
                };
                for t in 0..bs {
                    let mut up = u.clone();
                    let mut dn = u.clone();
                    up[t] += H;
                    dn[t] -= H;
                    let gp = contract(&up);
                    let gm = contract(&dn);
                    let fd: Vec<Complex64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * H)).collect();
                    let col: Vec<Complex64> = (0..bs).map(|s| hess.get(s, t)).collect();
                    let e = rel_err(&col, &fd);
                    prop_assert!(e < 1e-6, "{spec}: hessian column {t} relative error {e:e}");
                    // symmetry
                    for s in 0..bs {
                        prop_assert!((hess.get(s, t) - hess.get(t, s)).norm() < 1e-9 * (1.0 + hess.get(s, t).norm()));
                    }
                }
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn tangent_rows_are_the_jacobian_columns_of_one_summand() {
    let spec = ProblemSpec::new(2, vec![2, 3]).unwrap();
    let u: Vec<Complex64> = (0..spec.block_size()).map(|i| Complex64::new(0.3 * i as f64 - 0.4, 0.1)).collect();
    let rows = summand_tangent_rows(&ComplexRing, &spec, &u).unwrap();
    let jac = forward_jacobian(&ComplexRing, &spec, &u).unwrap();
    for s in 0..spec.block_size() {
        for i in 0..spec.ambient_dim() {
            assert_eq!(rows.get(s, i), jac.get(i, s));
        }
    }
}
