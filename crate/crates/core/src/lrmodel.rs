//! Binary and multiclass logistic regression: likelihoods, gradients, the
//! exact binary Hessian, one-hot labels and evaluation metrics.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{check_len, Error, Result};
use crate::linalg::SymmetricMatrix;

/// Design matrix `n × (1+d)` whose first column is the bias column of ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
}

impl Dataset {
    pub fn new(x: Array2<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::invalid("dataset has no rows or columns"));
        }
        if let Some(i) = x.column(0).iter().position(|&v| v != 1.0) {
            return Err(Error::invalid(format!("row {i} has no bias term of 1")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains non-finite values"));
        }
        Ok(Self { x })
    }

    /// Prepends the bias column to a raw `n × d` feature matrix.
    pub fn from_features(features: ArrayView2<'_, f64>) -> Result<Self> {
        let (n, d) = features.dim();
        let mut x = Array2::ones((n, d + 1));
        x.slice_mut(ndarray::s![.., 1..]).assign(&features);
        Self::new(x)
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Feature count, excluding the bias column.
    pub fn d(&self) -> usize {
        self.x.ncols() - 1
    }

    /// Width of a weight vector, `1 + d`.
    pub fn width(&self) -> usize {
        self.x.ncols()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), rows),
        }
    }
}

/// Labels in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLabels(Array1<f64>);

impl BinaryLabels {
    pub fn new(y: Array1<f64>) -> Result<Self> {
        if let Some(i) = y.iter().position(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::invalid(format!(
                "label {} at index {i} is not ±1",
                y[i]
            )));
        }
        Ok(Self(y))
    }

    /// Maps `0 → -1` and `1 → +1`.
    pub fn from_zero_one(y: &[u8]) -> Result<Self> {
        y.iter()
            .map(|&v| match v {
                0 => Ok(-1.0),
                1 => Ok(1.0),
                other => Err(Error::invalid(format!("label {other} is not 0 or 1"))),
            })
            .collect::<Result<Array1<f64>>>()
            .map(Self)
    }

    pub fn values(&self) -> ArrayView1<'_, f64> {
        self.0.view()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn select(&self, rows: &[usize]) -> BinaryLabels {
        BinaryLabels(self.0.select(Axis(0), rows))
    }

    pub fn flipped(&self) -> BinaryLabels {
        BinaryLabels(self.0.mapv(|v| -v))
    }
}

/// One-hot label matrix `n × c`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotLabels {
    y: Array2<f64>,
}

impl OneHotLabels {
    pub fn y(&self) -> ArrayView2<'_, f64> {
        self.y.view()
    }

    pub fn classes(&self) -> usize {
        self.y.ncols()
    }

    pub fn len(&self) -> usize {
        self.y.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.y.nrows() == 0
    }

    /// Class index of every row.
    pub fn decode(&self) -> Vec<usize> {
        self.y
            .rows()
            .into_iter()
            .map(|r| r.iter().position(|&v| v == 1.0).expect("one-hot row"))
            .collect()
    }

    pub fn select(&self, rows: &[usize]) -> OneHotLabels {
        OneHotLabels {
            y: self.y.select(Axis(0), rows),
        }
    }
}

/// Class indices `0..classes` for every sample; the common form both binary
/// and multiclass trainers convert from.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    indices: Vec<usize>,
    classes: usize,
}

impl LabelSet {
    pub fn new(indices: Vec<usize>, classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 classes, got {classes}"
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= classes) {
            return Err(Error::invalid(format!(
                "label {bad} is outside 0..{classes}"
            )));
        }
        Ok(Self { indices, classes })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Class 0 becomes `-1`, class 1 becomes `+1`. Only valid for two classes.
    pub fn binary(&self) -> Result<BinaryLabels> {
        if self.classes != 2 {
            return Err(Error::invalid(format!(
                "binary method needs 2 classes, data has {}",
                self.classes
            )));
        }
        Ok(BinaryLabels(
            self.indices
                .iter()
                .map(|&i| if i == 1 { 1.0 } else { -1.0 })
                .collect(),
        ))
    }

    pub fn one_hot(&self) -> OneHotLabels {
        one_hot_encode(&self.indices, self.classes).expect("indices validated")
    }

    pub fn select(&self, rows: &[usize]) -> LabelSet {
        LabelSet {
            indices: rows.iter().map(|&r| self.indices[r]).collect(),
            classes: self.classes,
        }
    }
}

/// Encodes class indices in `0..classes` as one-hot rows.
pub fn one_hot_encode(labels: &[usize], classes: usize) -> Result<OneHotLabels> {
    if classes < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 classes, got {classes}"
        )));
    }
    let mut y = Array2::zeros((labels.len(), classes));
    for (i, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::invalid(format!(
                "label {label} at index {i} is outside 0..{classes}"
            )));
        }
        y[[i, label]] = 1.0;
    }
    Ok(OneHotLabels { y })
}

/// Row-stochastic matrix of class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix(Array2<f64>);

impl ProbMatrix {
    pub fn p(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    /// Index of the most probable class per row.
    pub fn argmax(&self) -> Vec<usize> {
        self.0
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (j, &v)| {
                        if v > best.1 {
                            (j, v)
                        } else {
                            best
                        }
                    })
                    .0
            })
            .collect()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^{-t})` without overflow.
fn log1p_exp_neg(t: f64) -> f64 {
    if t > 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

fn check_binary(data: &Dataset, y: &BinaryLabels, beta: ArrayView1<'_, f64>) -> Result<()> {
    check_len("label count", data.n(), y.len())?;
    check_len("weight length", data.width(), beta.len())
}

/// `l(β) = -Σ ln(1 + exp(-yᵢ βᵀxᵢ))`.
pub fn log_likelihood_binary(
    data: &Dataset,
    y: &BinaryLabels,
    beta: ArrayView1<'_, f64>,
) -> Result<f64> {
    check_binary(data, y, beta)?;
    let margins = data.x.dot(&beta);
    Ok(-margins
        .iter()
        .zip(y.0.iter())
        .map(|(m, yi)| log1p_exp_neg(yi * m))
        .sum::<f64>())
}

/// `∇l(β) = Σ (1 - σ(yᵢ βᵀxᵢ)) yᵢ xᵢ`.
pub fn gradient_binary(
    data: &Dataset,
    y: &BinaryLabels,
    beta: ArrayView1<'_, f64>,
) -> Result<Array1<f64>> {
    check_binary(data, y, beta)?;
    Ok(gradient_binary_with(data, y, beta, sigmoid))
}

/// Binary gradient with a caller-supplied sigmoid (exact or polynomial).
/// Dimensions must already be checked.
pub(crate) fn gradient_binary_with(
    data: &Dataset,
    y: &BinaryLabels,
    beta: ArrayView1<'_, f64>,
    link: impl Fn(f64) -> f64,
) -> Array1<f64> {
    let mut g = Array1::zeros(data.width());
    for (row, &yi) in data.x.rows().into_iter().zip(y.0.iter()) {
        let z = yi * row.dot(&beta);
        let w = (1.0 - link(z)) * yi;
        g.scaled_add(w, &row);
    }
    g
}

/// Exact Hessian `XᵀSX` with `Sᵢᵢ = (σ(yᵢβᵀxᵢ) - 1) σ(yᵢβᵀxᵢ)`.
pub fn hessian_binary(
    data: &Dataset,
    y: &BinaryLabels,
    beta: ArrayView1<'_, f64>,
) -> Result<SymmetricMatrix> {
    check_binary(data, y, beta)?;
    let s: Vec<f64> = data
        .x
        .rows()
        .into_iter()
        .zip(y.0.iter())
        .map(|(row, &yi)| {
            let p = sigmoid(yi * row.dot(&beta));
            (p - 1.0) * p
        })
        .collect();
    Ok(SymmetricMatrix::from_upper(data.width(), |i, j| {
        let mut acc = 0.0;
        for (row, &sk) in data.x.rows().into_iter().zip(&s) {
            acc += sk * (row[i] * row[j]);
        }
        acc
    }))
}

fn check_multiclass(data: &Dataset, w: ArrayView2<'_, f64>) -> Result<()> {
    check_len("weight row width", data.width(), w.ncols())
}

/// Softmax over the logits `X Wᵀ`, with per-row max subtraction.
pub fn softmax_probs(data: &Dataset, w: ArrayView2<'_, f64>) -> Result<ProbMatrix> {
    check_multiclass(data, w)?;
    let mut z = data.x.dot(&w.t());
    for mut row in z.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        row.mapv_inplace(|v| v / total);
    }
    Ok(ProbMatrix(z))
}

/// `Σᵢ ln p[i][yᵢ]`, via log-sum-exp.
pub fn log_likelihood_multiclass(
    data: &Dataset,
    y: &OneHotLabels,
    w: ArrayView2<'_, f64>,
) -> Result<f64> {
    check_multiclass(data, w)?;
    check_len("label count", data.n(), y.len())?;
    check_len("class count", w.nrows(), y.classes())?;
    let z = data.x.dot(&w.t());
    let mut total = 0.0;
    for (row, label) in z.rows().into_iter().zip(y.decode()) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += row[label] - lse;
    }
    Ok(total)
}

/// `(Ȳ - P)ᵀ X`, shaped like `W`.
pub fn gradient_multiclass(
    data: &Dataset,
    y: &OneHotLabels,
    w: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    check_len("label count", data.n(), y.len())?;
    check_len("class count", w.nrows(), y.classes())?;
    let p = softmax_probs(data, w)?;
    let residual = &y.y - &p.0;
    Ok(residual.t().dot(&data.x))
}

/// Linear scores `βᵀxᵢ` for every row.
pub fn decision_scores(data: &Dataset, beta: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    check_len("weight length", data.width(), beta.len())?;
    Ok(data.x.dot(&beta))
}

/// `σ(βᵀxᵢ)` for every row.
pub fn predict_proba(data: &Dataset, beta: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    Ok(decision_scores(data, beta)?.mapv(sigmoid))
}

/// Fraction of rows where `prob ≥ 0.5` agrees with a `+1` label.
pub fn accuracy(probs: ArrayView1<'_, f64>, labels: &BinaryLabels) -> Result<f64> {
    check_len("label count", probs.len(), labels.len())?;
    if probs.is_empty() {
        return Err(Error::invalid("no samples to score"));
    }
    let correct = probs
        .iter()
        .zip(labels.0.iter())
        .filter(|(&p, &y)| (p >= 0.5) == (y > 0.0))
        .count();
    Ok(correct as f64 / probs.len() as f64)
}

/// Fraction of rows whose predicted class matches.
pub fn accuracy_multiclass(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_len("label count", truth.len(), predicted.len())?;
    if truth.is_empty() {
        return Err(Error::invalid("no samples to score"));
    }
    let correct = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(correct as f64 / truth.len() as f64)
}

/// Area under the ROC curve via the Mann–Whitney rank statistic, with tied
/// scores receiving their average rank.
pub fn auc(scores: ArrayView1<'_, f64>, labels: &BinaryLabels) -> Result<f64> {
    check_len("label count", scores.len(), labels.len())?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("non-finite score".into()));
    }
    let positives = labels.0.iter().filter(|&&y| y > 0.0).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::AucUndefined);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut positive_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks are 1-based: the tie group covers start+1 ..= end
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            if labels.0[idx] > 0.0 {
                positive_rank_sum += avg_rank;
            }
        }
        start = end;
    }

    let p = positives as f64;
    let n = negatives as f64;
    Ok((positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Macro one-vs-rest AUC over the classes present in `truth`.
pub fn auc_one_vs_rest(probs: &ProbMatrix, truth: &[usize]) -> Result<f64> {
    check_len("label count", probs.0.nrows(), truth.len())?;
    let mut total = 0.0;
    let mut counted = 0;
    for class in 0..probs.0.ncols() {
        let y: Array1<f64> = truth
            .iter()
            .map(|&t| if t == class { 1.0 } else { -1.0 })
            .collect();
        match auc(probs.0.column(class), &BinaryLabels(y)) {
            Ok(a) => {
                total += a;
                counted += 1;
            }
            Err(Error::AucUndefined) => continue,
            Err(e) => return Err(e),
        }
    }
    if counted == 0 {
        return Err(Error::AucUndefined);
    }
    Ok(total / counted as f64)
}
