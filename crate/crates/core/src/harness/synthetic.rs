//! Seeded synthetic binary data.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::harness::data::RawTable;

/// `n` points with `d` features drawn from `U[0, 1]`, labelled `1`/`0` by a
/// random hyperplane through the centre of the cube. Then `round(noise · n)`
/// randomly chosen labels are flipped.
pub fn separable_with_noise(n: usize, d: usize, noise: f64, seed: u64) -> Result<RawTable> {
    if n < 2 || d == 0 {
        return Err(Error::invalid(format!(
            "need n >= 2 and d >= 1, got n={n}, d={d}"
        )));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::invalid(format!("noise {noise} is not a fraction")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let features = Array2::from_shape_fn((n, d), |_| rng.gen::<f64>());
    let mut labels: Vec<f64> = features
        .rows()
        .into_iter()
        .map(|row| {
            let side: f64 = row.iter().zip(&normal).map(|(x, w)| (x - 0.5) * w).sum();
            if side >= 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let flips = (noise * n as f64).round() as usize;
    for r in sample(&mut rng, n, flips) {
        labels[r] = 1.0 - labels[r];
    }
    Ok(RawTable {
        columns: (1..=d).map(|j| format!("x{j}")).collect(),
        label_name: "y".into(),
        features,
        labels,
    })
}
