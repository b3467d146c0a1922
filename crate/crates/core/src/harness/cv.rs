//! k-fold cross-validation and method comparison reports.

use std::io::Write;
use std::thread;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::harness::data::{encode_labels, Normalizer, RawTable};
use crate::lrmodel::{
    accuracy, accuracy_multiclass, auc, auc_one_vs_rest, predict_proba, softmax_probs, Dataset,
    LabelSet,
};
use crate::optimizers::{train, Method, TrainConfig, TrainTrace, Weights};

pub const DEFAULT_SEED: u64 = 42;

/// Fold assignment for every row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvPlan {
    k: usize,
    seed: u64,
    assignment: Vec<usize>,
}

impl CvPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn rows(&self) -> usize {
        self.assignment.len()
    }

    /// `(training rows, held-out rows)` for `fold`, each in ascending order.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignment.len()).partition(|&r| self.assignment[r] != fold)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle, then round-robin fold assignment.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<CvPlan> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!(
            "need 2 <= k <= n, got k={k}, n={n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        assignment[row] = pos % k;
    }
    Ok(CvPlan {
        k,
        seed,
        assignment,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub method: Method,
    pub fold: usize,
    pub accuracy: f64,
    pub auc: f64,
    /// Training-split trace.
    pub trace: TrainTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub seed: u64,
    pub folds: usize,
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    pub methods: Vec<Method>,
    /// Method-major, then fold order.
    pub results: Vec<FoldResult>,
}

impl ComparisonReport {
    pub fn for_method(&self, method: Method) -> impl Iterator<Item = &FoldResult> {
        self.results.iter().filter(move |r| r.method == method)
    }

    /// `(mean accuracy, mean AUC)` over folds.
    pub fn means(&self, method: Method) -> (f64, f64) {
        let rows: Vec<_> = self.for_method(method).collect();
        let k = rows.len() as f64;
        (
            rows.iter().map(|r| r.accuracy).sum::<f64>() / k,
            rows.iter().map(|r| r.auc).sum::<f64>() / k,
        )
    }

    /// Training log-likelihood averaged over folds, per iteration.
    pub fn mean_mle(&self, method: Method) -> Vec<f64> {
        let traces: Vec<Vec<f64>> = self.for_method(method).map(|r| r.trace.mle()).collect();
        let len = traces.first().map_or(0, Vec::len);
        (0..len)
            .map(|i| traces.iter().map(|t| t[i]).sum::<f64>() / traces.len() as f64)
            .collect()
    }

    /// Comment header, then `method,fold,accuracy,auc` rows and one `mean` row
    /// per method.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# seed={}", self.seed)?;
        writeln!(
            out,
            "# samples={} features={} classes={} folds={}",
            self.samples, self.features, self.classes, self.folds
        )?;
        writeln!(out, "method,fold,accuracy,auc")?;
        for &m in &self.methods {
            for r in self.for_method(m) {
                writeln!(out, "{},{},{},{}", m, r.fold, r.accuracy, r.auc)?;
            }
        }
        for &m in &self.methods {
            let (acc, a) = self.means(m);
            writeln!(out, "{m},mean,{acc},{a}")?;
        }
        Ok(())
    }

    /// `method,fold,iteration,mle` for every recorded training step.
    pub fn write_traces_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "method,fold,iteration,mle")?;
        for r in &self.results {
            for t in &r.trace.records {
                writeln!(out, "{},{},{},{}", r.method, r.fold, t.iteration, t.mle)?;
            }
        }
        Ok(())
    }
}

/// Held-out `(accuracy, AUC)` of trained weights.
pub fn evaluate(weights: &Weights, data: &Dataset, labels: &LabelSet) -> Result<(f64, f64)> {
    match weights {
        Weights::Binary(beta) => {
            let y = labels.binary()?;
            let probs = predict_proba(data, beta.view())?;
            Ok((accuracy(probs.view(), &y)?, auc(probs.view(), &y)?))
        }
        Weights::Multiclass(w) => {
            let probs = softmax_probs(data, w.view())?;
            let acc = accuracy_multiclass(&probs.argmax(), labels.indices())?;
            Ok((acc, auc_one_vs_rest(&probs, labels.indices())?))
        }
    }
}

type FoldData = (Dataset, LabelSet, Dataset, LabelSet);

fn run_folds(
    methods: &[Method],
    iterations: usize,
    cv: &CvPlan,
    cfg: &TrainConfig,
    fold_data: impl Fn(usize) -> Result<FoldData> + Sync,
) -> Result<Vec<FoldResult>> {
    if methods.is_empty() {
        return Err(Error::invalid("at least one method is required"));
    }
    let per_fold: Vec<Result<Vec<FoldResult>>> = thread::scope(|s| {
        let handles: Vec<_> = (0..cv.k())
            .map(|fold| {
                let fold_data = &fold_data;
                s.spawn(move || {
                    let (train_x, train_y, test_x, test_y) = fold_data(fold)?;
                    methods
                        .iter()
                        .map(|&method| {
                            let trace = train(method, &train_x, &train_y, iterations, cfg)?;
                            let (accuracy, auc) = evaluate(&trace.weights, &test_x, &test_y)?;
                            Ok(FoldResult {
                                method,
                                fold,
                                accuracy,
                                auc,
                                trace,
                            })
                        })
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fold worker panicked"))
            .collect()
    });

    let mut by_fold = Vec::with_capacity(cv.k());
    for r in per_fold {
        by_fold.push(r?);
    }
    let mut results = Vec::with_capacity(methods.len() * cv.k());
    for m in 0..methods.len() {
        for fold in &by_fold {
            results.push(fold[m].clone());
        }
    }
    Ok(results)
}

/// Trains every method on each training split and scores it on the held-out
/// fold. Folds run concurrently; results are assembled in fold order.
pub fn compare_methods(
    data: &Dataset,
    labels: &LabelSet,
    methods: &[Method],
    iterations: usize,
    cv: &CvPlan,
    cfg: &TrainConfig,
) -> Result<ComparisonReport> {
    check_len("label count", data.n(), labels.len())?;
    check_len("plan rows", data.n(), cv.rows())?;
    let results = run_folds(methods, iterations, cv, cfg, |fold| {
        let (train_rows, test_rows) = cv.split(fold);
        Ok((
            data.select_rows(&train_rows),
            labels.select(&train_rows),
            data.select_rows(&test_rows),
            labels.select(&test_rows),
        ))
    })?;
    Ok(ComparisonReport {
        seed: cv.seed(),
        folds: cv.k(),
        samples: data.n(),
        features: data.d(),
        classes: labels.classes(),
        methods: methods.to_vec(),
        results,
    })
}

/// Like [`compare_methods`], but the min-max statistics of each fold come from
/// its training rows only.
pub fn compare_methods_per_fold(
    table: &RawTable,
    methods: &[Method],
    iterations: usize,
    cv: &CvPlan,
    cfg: &TrainConfig,
) -> Result<ComparisonReport> {
    check_len("plan rows", table.rows(), cv.rows())?;
    let (labels, _) = encode_labels(&table.labels)?;
    let results = run_folds(methods, iterations, cv, cfg, |fold| {
        let (train_rows, test_rows) = cv.split(fold);
        let train_t = table.select_rows(&train_rows);
        let test_t = table.select_rows(&test_rows);
        let scaler = Normalizer::fit(train_t.features.view())?;
        Ok((
            scaler.apply(train_t.features.view())?,
            labels.select(&train_rows),
            scaler.apply(test_t.features.view())?,
            labels.select(&test_rows),
        ))
    })?;
    Ok(ComparisonReport {
        seed: cv.seed(),
        folds: cv.k(),
        samples: table.rows(),
        features: table.features.ncols(),
        classes: labels.classes(),
        methods: methods.to_vec(),
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_sizes() {
        let mut s = kfold_split(10, 5, 1).unwrap().fold_sizes();
        assert_eq!(s, vec![2; 5]);
        s = kfold_split(11, 5, 1).unwrap().fold_sizes();
        s.sort_unstable();
        assert_eq!(s, vec![2, 2, 2, 2, 3]);
    }

    #[test]
    fn seeded_and_validated() {
        assert_eq!(
            kfold_split(30, 3, 9).unwrap(),
            kfold_split(30, 3, 9).unwrap()
        );
        assert_ne!(
            kfold_split(30, 3, 9).unwrap().assignment(),
            kfold_split(30, 3, 10).unwrap().assignment()
        );
        assert!(kfold_split(4, 5, 0).is_err());
        assert!(kfold_split(4, 1, 0).is_err());
    }

    #[test]
    fn split_is_complementary() {
        let plan = kfold_split(7, 3, 0).unwrap();
        let (train, test) = plan.split(1);
        assert_eq!(train.len() + test.len(), 7);
        assert!(test.iter().all(|&r| plan.assignment()[r] == 1));
    }
}
