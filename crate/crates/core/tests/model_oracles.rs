mod common;

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use qgrad::bounds::{
    fixed_hessian_bound_binary, fixed_hessian_bound_multiclass, is_loewner_leq, kron,
    quadratic_bound, quadratic_gradient, SymmetricMatrix,
};
use qgrad::linalg::jacobi_eigenvalues;
use qgrad::lrmodel::{
    auc, gradient_binary, gradient_multiclass, hessian_binary, log_likelihood_binary,
    log_likelihood_multiclass, sigmoid, softmax_probs, BinaryLabels, Dataset,
};
use qgrad::polyapprox::{reference_poly, REFERENCE_C0, REFERENCE_C1, REFERENCE_C3, REFERENCE_C5};
use rand::Rng;

use common::*;

fn ulps(a: f64, b: f64) -> u64 {
    let (x, y) = (a.to_bits() as i64, b.to_bits() as i64);
    if (x < 0) != (y < 0) {
        return if a == b { 0 } else { u64::MAX };
    }
    x.abs_diff(y)
}

#[test]
fn diagonal_bound_holds_for_random_symmetric_matrices() {
    let mut r = rng(11);
    for _ in 0..60 {
        let order = r.gen_range(2..=20);
        let a = symmetric(&mut r, order, -5.0, 5.0);
        let b = quadratic_bound(&a, 1e-8).unwrap().as_symmetric();
        let diff = a.sub(&b).unwrap().into_inner();
        assert!(min_eigenvalue(&diff) >= -1e-9);
        assert!(is_loewner_leq(&b, &a, 1e-9).unwrap());
    }
}

#[test]
fn jacobi_agrees_with_nalgebra() {
    let mut r = rng(12);
    for _ in 0..30 {
        let order = r.gen_range(1..=12);
        let a = symmetric(&mut r, order, -3.0, 3.0).into_inner();
        let mine = jacobi_eigenvalues(&a);
        let mut theirs: Vec<f64> = to_nalgebra(&a)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        theirs.sort_by(f64::total_cmp);
        for (x, y) in mine.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-9, "{mine:?} vs {theirs:?}");
        }
    }
}

#[test]
fn kronecker_matches_nalgebra_and_inverse_identity() {
    let mut r = rng(13);
    for _ in 0..20 {
        let (p, q) = (r.gen_range(1..=4), r.gen_range(1..=4));
        // diagonally dominant so both factors are invertible
        let a = Array2::from_shape_fn((p, p), |(i, j)| {
            r.gen_range(-1.0..1.0) + if i == j { 5.0 } else { 0.0 }
        });
        let b = Array2::from_shape_fn((q, q), |(i, j)| {
            r.gen_range(-1.0..1.0) + if i == j { 5.0 } else { 0.0 }
        });
        let k = kron(&a, &b);
        let (na, nb) = (to_nalgebra(&a), to_nalgebra(&b));
        let expected = from_nalgebra(&na.kronecker(&nb));
        assert_eq!(k, expected);

        let k_inv = to_nalgebra(&k).try_inverse().unwrap();
        let factored = kron(
            &from_nalgebra(&na.try_inverse().unwrap()),
            &from_nalgebra(&nb.try_inverse().unwrap()),
        );
        for (x, y) in from_nalgebra(&k_inv).iter().zip(factored.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn kronecker_mixed_product() {
    let mut r = rng(14);
    for _ in 0..50 {
        let m = |r: &mut rand_chacha::ChaCha8Rng| {
            Array2::from_shape_fn((2, 2), |_| r.gen_range(-3.0..3.0))
        };
        let (a, b, c, d) = (m(&mut r), m(&mut r), m(&mut r), m(&mut r));
        let lhs = kron(&a, &b).dot(&kron(&c, &d));
        let rhs = kron(&a.dot(&c), &b.dot(&d));
        for (x, y) in lhs.iter().zip(rhs.iter()) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn hessian_against_finite_differences_of_gradient() {
    let mut r = rng(15);
    for _ in 0..20 {
        let (n, d) = (r.gen_range(1..=12), r.gen_range(1..=5));
        let data = design(&mut r, n, d);
        let y = binary_labels(&mut r, n);
        let beta = weights(&mut r, d + 1, 2.0);
        let h = hessian_binary(&data, &y, beta.view()).unwrap();
        for k in 0..=d {
            let col = central_differences(
                |b| gradient_binary(&data, &y, Array1::from(b.to_vec()).view()).unwrap()[k],
                beta.as_slice().unwrap(),
                1e-5,
            );
            for (j, v) in col.iter().enumerate() {
                assert!((h.get(k, j) - v).abs() < 1e-6 * v.abs().max(1.0));
            }
        }
    }
}

#[test]
fn hessian_is_bounded_by_quarter_gram() {
    let mut r = rng(16);
    for _ in 0..30 {
        let (n, d) = (r.gen_range(1..=15), r.gen_range(1..=6));
        let data = design(&mut r, n, d);
        let y = binary_labels(&mut r, n);
        let bound = fixed_hessian_bound_binary(data.x()).unwrap();
        assert_eq!(
            hessian_binary(&data, &y, Array1::zeros(d + 1).view()).unwrap(),
            bound
        );
        let beta = weights(&mut r, d + 1, 4.0);
        let h = hessian_binary(&data, &y, beta.view()).unwrap();
        assert!(is_loewner_leq(&bound, &h, 1e-9).unwrap());
        assert!(h.eigenvalues().iter().all(|&e| e <= 1e-9));
    }
}

#[test]
fn multiclass_bound_doubles_binary_bound() {
    let mut r = rng(17);
    for _ in 0..20 {
        let (n, d) = (r.gen_range(1..10), r.gen_range(1..6));
        let data = design(&mut r, n, d);
        let b = fixed_hessian_bound_binary(data.x()).unwrap().into_inner();
        let m = fixed_hessian_bound_multiclass(data.x())
            .unwrap()
            .into_inner();
        assert_eq!(m, b * 2.0);
    }
}

#[test]
fn two_class_softmax_is_sigmoid_of_difference() {
    let mut r = rng(18);
    let data = design(&mut r, 10, 3);
    let w = Array2::from_shape_fn((2, 4), |_| r.gen_range(-3.0..3.0));
    let p = softmax_probs(&data, w.view()).unwrap();
    let diff = data.x().dot(&(&w.row(0) - &w.row(1)));
    for (i, z) in diff.iter().enumerate() {
        assert!((p.p()[[i, 0]] - sigmoid(*z)).abs() < 1e-12);
    }
}

#[test]
fn auc_matches_pair_enumeration() {
    let mut r = rng(19);
    for _ in 0..30 {
        let n = r.gen_range(2..25);
        let mut y = binary_labels(&mut r, n).values().to_owned();
        y[0] = 1.0;
        y[1] = -1.0;
        // coarse scores so ties happen
        let s: Array1<f64> = (0..n).map(|_| (r.gen_range(0..5) as f64) / 4.0).collect();
        let labels = BinaryLabels::new(y.clone()).unwrap();
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for i in 0..n {
            for j in 0..n {
                if y[i] > 0.0 && y[j] < 0.0 {
                    pairs += 1.0;
                    wins += if s[i] > s[j] {
                        1.0
                    } else if s[i] == s[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        assert!((auc(s.view(), &labels).unwrap() - wins / pairs).abs() < 1e-12);
    }
}

#[test]
fn poly_is_monotone_where_its_derivative_is_positive() {
    let g = reference_poly();
    let mut prev = g.value(-4.4);
    let mut x = -4.4;
    while x < 4.4 {
        x += 0.01;
        let v = g.value(x);
        assert!(v > prev, "x = {x}");
        prev = v;
    }
}

#[test]
fn poly_derivative_changes_sign_before_five() {
    let g = reference_poly();
    assert!(g.derivative(4.4) > 0.0);
    assert!(g.derivative(4.5) < 0.0);
    assert!((g.derivative(5.0) - (-0.02455875)).abs() < 1e-6);
    assert!(g.value(5.0) < g.value(4.43));
}

fn naive_poly(x: f64) -> f64 {
    REFERENCE_C0 + REFERENCE_C1 * x + REFERENCE_C3 * x * x * x + REFERENCE_C5 * x * x * x * x * x
}

#[test]
fn horner_matches_power_sum_within_four_ulps() {
    let g = reference_poly();
    let worst = (0..=16_000)
        .map(|i| -8.0 + i as f64 * 1e-3)
        .map(|x| (x, ulps(g.value(x), naive_poly(x))))
        .max_by_key(|&(_, u)| u)
        .unwrap();
    assert!(worst.1 <= 4, "{} ulps apart at x = {}", worst.1, worst.0);
}

#[test]
fn horner_matches_power_sum_at_unit_scale() {
    // the terms are O(1), so rounding is measured against 1.0
    let g = reference_poly();
    for i in 0..=16_000 {
        let x = -8.0 + i as f64 * 1e-3;
        assert!(
            (g.value(x) - naive_poly(x)).abs() <= 4.0 * f64::EPSILON,
            "x = {x}"
        );
    }
}

fn matrix(max_n: usize, max_d: usize) -> impl Strategy<Value = (Array2<f64>, Vec<f64>)> {
    (1..=max_n, 1..=max_d).prop_flat_map(|(n, d)| {
        (
            proptest::collection::vec(0.0f64..1.0, n * d),
            proptest::collection::vec(prop_oneof![Just(1.0), Just(-1.0)], n),
        )
            .prop_map(move |(v, y)| (Array2::from_shape_vec((n, d), v).unwrap(), y))
    })
}

proptest! {
    #[test]
    fn bound_entries_are_reciprocals(a in (2usize..12).prop_flat_map(|n| proptest::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| (n, v)))) {
        let (n, v) = a;
        let h = SymmetricMatrix::from_upper(n, |i, j| v[i * n + j]);
        let b = quadratic_bound(&h, 1e-8).unwrap();
        for (bb, bt) in b.b_bar().iter().zip(b.b_tilde().iter()) {
            prop_assert!(ulps(bb * bt.abs(), 1.0) <= 4);
        }
    }

    #[test]
    fn quadratic_gradient_is_linear_and_scale_covariant(
        bbar in proptest::collection::vec(0.01f64..10.0, 1..10),
        seed in any::<u64>(),
        scale in 0.01f64..100.0,
    ) {
        let mut r = rng(seed);
        let k = bbar.len();
        let b = qgrad::bounds::DiagonalBound::from_b_bar(Array1::from(bbar)).unwrap();
        let g1 = weights(&mut r, k, 5.0);
        let g2 = weights(&mut r, k, 5.0);
        let sum = quadratic_gradient(&b, (&g1 + &g2).view()).unwrap();
        let parts = quadratic_gradient(&b, g1.view()).unwrap() + quadratic_gradient(&b, g2.view()).unwrap();
        let scale_of = (&g1.mapv(f64::abs) + &g2.mapv(f64::abs)) * b.b_bar();
        for ((x, y), s) in sum.iter().zip(parts.iter()).zip(scale_of.iter()) {
            prop_assert!((x - y).abs() <= 4.0 * f64::EPSILON * s);
        }
        let argmax = |v: &Array1<f64>| v.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap().0;
        let g = quadratic_gradient(&b, g1.view()).unwrap();
        let gs = quadratic_gradient(&b, (&g1 * scale).view()).unwrap();
        prop_assert_eq!(argmax(&g), argmax(&gs));
    }

    #[test]
    fn binary_gradient_matches_finite_differences((f, y) in matrix(20, 8), seed in any::<u64>()) {
        let data = Dataset::from_features(f.view()).unwrap();
        let y = BinaryLabels::new(Array1::from(y)).unwrap();
        let beta = weights(&mut rng(seed), data.width(), 2.0);
        let g = gradient_binary(&data, &y, beta.view()).unwrap();
        let fd = central_differences(|b| log_likelihood_binary(&data, &y, Array1::from(b.to_vec()).view()).unwrap(), beta.as_slice().unwrap(), 1e-5);
        prop_assert!(max_rel_err(g.as_slice().unwrap(), &fd) < 1e-6);
    }

    #[test]
    fn multiclass_gradient_matches_finite_differences((f, _) in matrix(20, 8), c in 2usize..=5, seed in any::<u64>()) {
        let data = Dataset::from_features(f.view()).unwrap();
        let mut r = rng(seed);
        let y = class_labels(&mut r, data.n(), c);
        let w = weights(&mut r, c * data.width(), 2.0);
        let shape = (c, data.width());
        let ll = |v: &[f64]| log_likelihood_multiclass(&data, &y, Array2::from_shape_vec(shape, v.to_vec()).unwrap().view()).unwrap();
        let g = gradient_multiclass(&data, &y, w.view().into_shape_with_order(shape).unwrap()).unwrap();
        let fd = central_differences(ll, w.as_slice().unwrap(), 1e-5);
        prop_assert!(max_rel_err(&g.iter().copied().collect::<Vec<_>>(), &fd) < 1e-6);
    }

    #[test]
    fn probabilities_sum_to_one_even_for_huge_logits((f, _) in matrix(10, 4), c in 2usize..=5, seed in any::<u64>()) {
        let data = Dataset::from_features(f.view()).unwrap();
        let w = Array2::from_shape_fn((c, data.width()), |_| 0.0) + &weights(&mut rng(seed), c * data.width(), 1000.0).into_shape_with_order((c, data.width())).unwrap();
        let p = softmax_probs(&data, w.view()).unwrap();
        for row in p.p().rows() {
            prop_assert!((row.sum() - 1.0).abs() <= 1e-12);
            prop_assert!(row.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn likelihood_ignores_row_order((f, y) in matrix(12, 4), seed in any::<u64>()) {
        let data = Dataset::from_features(f.view()).unwrap();
        let y = BinaryLabels::new(Array1::from(y)).unwrap();
        let mut r = rng(seed);
        let beta = weights(&mut r, data.width(), 3.0);
        let mut perm: Vec<usize> = (0..data.n()).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut r);
        let a = log_likelihood_binary(&data, &y, beta.view()).unwrap();
        let b = log_likelihood_binary(&data.select_rows(&perm), &y.select(&perm), beta.view()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(a <= 0.0);
    }

    #[test]
    fn auc_ignores_increasing_transforms(scores in proptest::collection::vec(-3.0f64..3.0, 4..30), seed in any::<u64>()) {
        let n = scores.len();
        let mut y = binary_labels(&mut rng(seed), n).values().to_owned();
        y[0] = 1.0;
        y[1] = -1.0;
        let y = BinaryLabels::new(y).unwrap();
        let s = Array1::from(scores);
        let t = s.mapv(|v| v.exp() * 3.0 + 1.0);
        prop_assert_eq!(auc(s.view(), &y).unwrap(), auc(t.view(), &y).unwrap());
    }

    #[test]
    fn poly_is_symmetric_about_its_constant(x in -8.0f64..8.0) {
        let g = reference_poly();
        prop_assert_eq!(g.value(x) + g.value(-x), 2.0 * g.c0());
    }
}
