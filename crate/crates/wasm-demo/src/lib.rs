//! Browser bindings for three qgrad demos: sigmoid approximation curves,
//! NAG convergence traces and packed-slot summation.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(e: qgrad::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Rows of `[x, sigmoid(x), reference poly(x), fitted poly(x)]`, flattened.
#[wasm_bindgen]
pub fn sigmoid_curves(lo: f64, hi: f64, points: usize, degree: usize) -> Result<Vec<f64>, JsError> {
    demo::sigmoid_curves(lo, hi, points, degree).map_err(js)
}

/// Least-squares coefficients `c0, c1, c3, …` on `[lo, hi]`.
#[wasm_bindgen]
pub fn fit_coefficients(degree: usize, lo: f64, hi: f64) -> Result<Vec<f64>, JsError> {
    demo::fit_coefficients(degree, lo, hi).map_err(js)
}

/// Baseline then enhanced NAG log-likelihoods, `iterations` values each.
#[wasm_bindgen]
pub fn nag_traces(
    n: usize,
    d: usize,
    noise: f64,
    seed: u64,
    iterations: usize,
) -> Result<Vec<f64>, JsError> {
    demo::nag_traces(n, d, noise, seed, iterations).map_err(js)
}

/// Text report of packed row/column sums and their primitive counts.
#[wasm_bindgen]
pub fn packed_sums(rows: usize, cols: usize, seed: u64) -> Result<String, JsError> {
    demo::packed_sums(rows, cols, seed).map_err(js)
}
