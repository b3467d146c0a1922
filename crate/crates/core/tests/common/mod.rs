//! Random instances and independent numeric oracles shared by the test targets.
#![allow(dead_code)]

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use qgrad::bounds::SymmetricMatrix;
use qgrad::lrmodel::{one_hot_encode, BinaryLabels, Dataset, OneHotLabels};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n × (1+d)` design with features in `[0, 1]`.
pub fn design(rng: &mut impl Rng, n: usize, d: usize) -> Dataset {
    let f = Array2::from_shape_fn((n, d), |_| rng.gen::<f64>());
    Dataset::from_features(f.view()).unwrap()
}

pub fn binary_labels(rng: &mut impl Rng, n: usize) -> BinaryLabels {
    BinaryLabels::new((0..n).map(|_| if rng.gen() { 1.0 } else { -1.0 }).collect()).unwrap()
}

pub fn class_labels(rng: &mut impl Rng, n: usize, c: usize) -> OneHotLabels {
    let v: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
    one_hot_encode(&v, c).unwrap()
}

pub fn symmetric(rng: &mut impl Rng, order: usize, lo: f64, hi: f64) -> SymmetricMatrix {
    SymmetricMatrix::from_upper(order, |_, _| rng.gen_range(lo..=hi))
}

/// Central differences of `f` at `x` with step `h`.
pub fn central_differences(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[k] += h;
            down[k] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

pub fn to_nalgebra(m: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

pub fn from_nalgebra(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Smallest eigenvalue via nalgebra's symmetric eigensolver.
pub fn min_eigenvalue(m: &Array2<f64>) -> f64 {
    to_nalgebra(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

pub fn weights(rng: &mut impl Rng, len: usize, scale: f64) -> Array1<f64> {
    (0..len).map(|_| rng.gen_range(-scale..scale)).collect()
}
