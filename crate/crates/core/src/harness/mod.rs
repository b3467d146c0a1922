//! Data ingestion, cross-validation, method comparison and the command line.

pub mod cli;
pub mod cv;
pub mod data;
pub mod synthetic;

pub use cv::{compare_methods, compare_methods_per_fold, kfold_split, ComparisonReport, CvPlan};
pub use data::{
    load_csv, load_libsvm, normalize, read_csv, read_libsvm, LabelColumn, Prepared, RawTable,
};
