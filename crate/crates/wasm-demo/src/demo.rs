//! Plain Rust versions of the exported functions.

use std::fmt::Write;

use qgrad::harness::{normalize, synthetic::separable_with_noise};
use qgrad::lrmodel::sigmoid;
use qgrad::optimizers::{train, Method, TrainConfig};
use qgrad::packedsim::{decode, encode, sum_col_vec, sum_row_vec, Evaluator};
use qgrad::polyapprox::{fit_least_squares, reference_poly, DEFAULT_SAMPLES};
use qgrad::{Error, Result};

pub fn sigmoid_curves(lo: f64, hi: f64, points: usize, degree: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidInput("need at least two points".into()));
    }
    let fitted = fit_least_squares(degree, lo, hi, DEFAULT_SAMPLES)?;
    let reference = reference_poly();
    let step = (hi - lo) / (points - 1) as f64;
    let mut out = Vec::with_capacity(points * 4);
    for i in 0..points {
        let x = lo + step * i as f64;
        out.extend([x, sigmoid(x), reference.value(x), fitted.value(x)]);
    }
    Ok(out)
}

pub fn fit_coefficients(degree: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    Ok(fit_least_squares(degree, lo, hi, DEFAULT_SAMPLES)?.coefficients())
}

pub fn nag_traces(
    n: usize,
    d: usize,
    noise: f64,
    seed: u64,
    iterations: usize,
) -> Result<Vec<f64>> {
    let p = normalize(&separable_with_noise(n, d, noise, seed)?)?;
    let cfg = TrainConfig::default();
    let mut out = train(Method::Nag, &p.data, &p.labels, iterations, &cfg)?.mle();
    out.extend(train(Method::EnhancedNag, &p.data, &p.labels, iterations, &cfg)?.mle());
    Ok(out)
}

pub fn packed_sums(rows: usize, cols: usize, seed: u64) -> Result<String> {
    if rows == 0 || cols == 0 || rows * cols > 4096 {
        return Err(Error::InvalidInput(
            "matrix must have between 1 and 4096 entries".into(),
        ));
    }
    // small integers keep the printout readable
    let m = ndarray::Array2::from_shape_fn((rows, cols), |(i, j)| {
        ((i as u64 * 7 + j as u64 * 3 + seed) % 10) as f64
    });
    let slots = (rows * cols).next_power_of_two();
    let packed = encode(m.view(), slots)?;

    let mut s = String::new();
    let ev = Evaluator::new();
    let r = decode(&sum_col_vec(&ev, &packed)?);
    let row_counts = ev.counts();
    let ev = Evaluator::new();
    let c = decode(&sum_row_vec(&ev, &packed)?);
    let col_counts = ev.counts();

    let _ = writeln!(s, "matrix {rows}x{cols} in {slots} slots");
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
        let _ = writeln!(s, "  {}", cells.join(" "));
    }
    let sums: Vec<String> = r.column(0).iter().map(|v| v.to_string()).collect();
    let _ = writeln!(s, "row sums    [{}]  {row_counts}", sums.join(", "));
    let sums: Vec<String> = c.row(0).iter().map(|v| v.to_string()).collect();
    let _ = writeln!(s, "column sums [{}]  {col_counts}", sums.join(", "));
    Ok(s)
}
