//! Loading CSV and libsvm tables and min-max normalization.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::lrmodel::{Dataset, LabelSet};

/// Which CSV column holds the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::invalid("empty label column"));
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

/// Features and raw labels exactly as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    /// Names of the feature columns, in order.
    pub columns: Vec<String>,
    pub label_name: String,
    pub features: Array2<f64>,
    pub labels: Vec<f64>,
}

impl RawTable {
    pub fn rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn select_rows(&self, rows: &[usize]) -> RawTable {
        RawTable {
            columns: self.columns.clone(),
            label_name: self.label_name.clone(),
            features: self.features.select(Axis(0), rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }
}

fn parse_cell(cell: &str, line: usize, column: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("column '{column}': '{cell}' is not a number"),
    })
}

/// CSV with a header row. Every cell must be numeric.
pub fn read_csv<R: Read>(reader: R, label: &LabelColumn) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    let names: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    let label_idx = match label {
        LabelColumn::Index(i) if *i < names.len() => *i,
        LabelColumn::Index(i) => {
            return Err(Error::invalid(format!(
                "label column {i} out of range for {} columns",
                names.len()
            )))
        }
        LabelColumn::Name(n) => names
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| Error::invalid(format!("no column named '{n}'")))?,
    };

    let width = names.len();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != width {
            return Err(Error::Shape {
                line,
                expected: width,
                actual: rec.len(),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            let v = parse_cell(cell, line, &names[j])?;
            if j == label_idx {
                labels.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no data rows".into(),
        });
    }
    let features =
        Array2::from_shape_vec((labels.len(), width - 1), values).expect("row lengths checked");
    let mut columns = names;
    let label_name = columns.remove(label_idx);
    Ok(RawTable {
        columns,
        label_name,
        features,
        labels,
    })
}

pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<RawTable> {
    read_csv(File::open(path)?, label)
}

/// libsvm lines `label idx:value …` with 1-based indices. Missing indices are
/// zero; the widest row fixes the feature count. Blank and `#` lines are skipped.
pub fn read_libsvm<R: BufRead>(reader: R) -> Result<RawTable> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut width = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let label_tok = parts.next().expect("non-empty line");
        labels.push(label_tok.parse::<f64>().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad label '{label_tok}'"),
        })?);
        let mut row = Vec::new();
        for tok in parts {
            let bad = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| bad(format!("expected index:value, found '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| bad(format!("bad feature index '{idx}'")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| bad(format!("bad feature value '{val}'")))?;
            if row.iter().any(|&(k, _)| k == idx) {
                return Err(bad(format!("feature index {idx} repeated")));
            }
            width = width.max(idx);
            row.push((idx, val));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "empty file".into(),
        });
    }
    let mut features = Array2::zeros((rows.len(), width));
    for (r, row) in rows.iter().enumerate() {
        for &(idx, val) in row {
            features[[r, idx - 1]] = val;
        }
    }
    Ok(RawTable {
        columns: (1..=width).map(|k| k.to_string()).collect(),
        label_name: "label".into(),
        features,
        labels,
    })
}

pub fn load_libsvm(path: impl AsRef<Path>) -> Result<RawTable> {
    read_libsvm(BufReader::new(File::open(path)?))
}

/// Per-column min-max statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Normalizer {
    pub fn fit(features: ArrayView2<'_, f64>) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::invalid("cannot normalize an empty table"));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("table contains non-finite values"));
        }
        let cols = features.axis_iter(Axis(1));
        let (min, max) = cols
            .map(|c| {
                c.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    })
            })
            .unzip();
        Ok(Self { min, max })
    }

    /// Maps each fitted column onto `[0, 1]`; constant columns become 0.
    /// Rows that were not part of the fit may fall outside the unit interval.
    pub fn apply(&self, features: ArrayView2<'_, f64>) -> Result<Dataset> {
        crate::error::check_len("feature count", self.min.len(), features.ncols())?;
        let mut scaled = features.to_owned();
        for (j, mut col) in scaled.axis_iter_mut(Axis(1)).enumerate() {
            let (lo, hi) = (self.min[j], self.max[j]);
            let span = hi - lo;
            col.mapv_inplace(|v| if span > 0.0 { (v - lo) / span } else { 0.0 });
        }
        Dataset::from_features(scaled.view())
    }
}

/// Sorted distinct label values mapped to class indices. With two classes the
/// smaller value becomes `-1` and the larger `+1` in binary form.
pub fn encode_labels(raw: &[f64]) -> Result<(LabelSet, Vec<f64>)> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("labels must be finite"));
    }
    let mut values = raw.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    if values.len() < 2 {
        return Err(Error::invalid("labels contain a single class"));
    }
    let indices = raw
        .iter()
        .map(|v| {
            values
                .binary_search_by(|p| p.total_cmp(v))
                .expect("present")
        })
        .collect();
    Ok((LabelSet::new(indices, values.len())?, values))
}

/// A normalized design matrix with its encoded labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub data: Dataset,
    pub labels: LabelSet,
    /// Original label value of each class index.
    pub class_values: Vec<f64>,
}

/// Min-max scales every feature over the whole table, prepends the bias column
/// and encodes labels.
pub fn normalize(table: &RawTable) -> Result<Prepared> {
    let data = Normalizer::fit(table.features.view())?.apply(table.features.view())?;
    let (labels, class_values) = encode_labels(&table.labels)?;
    Ok(Prepared {
        data,
        labels,
        class_values,
    })
}
