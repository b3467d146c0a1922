//! Small dense linear algebra: symmetric matrices, a cyclic Jacobi eigensolver,
//! Kronecker products and a pivoted Gaussian solve.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

/// Square matrix whose entries are symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    entries: Array2<f64>,
}

impl SymmetricMatrix {
    /// Accepts `m` only if it is square and exactly symmetric.
    pub fn new(m: Array2<f64>) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c {
            return Err(Error::invalid(format!("matrix is {r}x{c}, not square")));
        }
        if r == 0 {
            return Err(Error::invalid("empty matrix"));
        }
        for i in 0..r {
            for j in (i + 1)..r {
                if m[[i, j]] != m[[j, i]] {
                    return Err(Error::invalid(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { entries: m })
    }

    /// Builds a symmetric matrix from its upper triangle, mirroring into the lower.
    pub fn from_upper(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Array2::zeros((order, order));
        for i in 0..order {
            for j in i..order {
                let v = f(i, j);
                m[[i, j]] = v;
                m[[j, i]] = v;
            }
        }
        Self { entries: m }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            entries: Array2::from_diag(&Array1::from(diag.to_vec())),
        }
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[[i, j]]
    }

    /// Element-wise `self - other`.
    pub fn sub(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        if self.order() != other.order() {
            return Err(Error::DimensionMismatch {
                what: "matrix order",
                expected: self.order(),
                actual: other.order(),
            });
        }
        Ok(SymmetricMatrix {
            entries: &self.entries - &other.entries,
        })
    }

    pub fn scale(&self, s: f64) -> SymmetricMatrix {
        SymmetricMatrix {
            entries: self.entries.mapv(|v| v * s),
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        jacobi_eigenvalues(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations on a symmetric matrix. Iterates until the
/// off-diagonal Frobenius norm drops below `1e-12` (relative to the full norm,
/// with an absolute floor for the zero matrix). Returns sorted eigenvalues.
pub fn jacobi_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    let full = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let threshold = JACOBI_TOL * full.max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[[p, q]] * a[[p, q]];
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Kronecker product: block `(i, j)` of the result is `a[i][j] * b`.
pub fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (m, n) = a.dim();
    let (p, q) = b.dim();
    let mut out = Array2::zeros((m * p, n * q));
    for i in 0..m {
        for j in 0..n {
            let aij = a[[i, j]];
            for k in 0..p {
                for l in 0..q {
                    out[[i * p + k, j * q + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Fails when a pivot is numerically zero.
pub fn solve(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::invalid("solve expects a square system"));
    }
    let mut m = a.clone();
    let mut rhs = b.clone();
    let scale = m
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))
            .unwrap_or(col);
        if m[[pivot, col]].abs() <= 1e-13 * scale {
            return Err(Error::FitFailed("singular normal matrix".into()));
        }
        if pivot != col {
            for k in 0..n {
                m.swap([pivot, k], [col, k]);
            }
            rhs.swap(pivot, col);
        }
        for row in (col + 1)..n {
            let factor = m[[row, col]] / m[[col, col]];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[[row, k]] -= factor * m[[col, k]];
            }
            rhs[row] -= factor * rhs[col];
        }
    }

    let mut x = Array1::zeros(n);
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[[row, k]] * x[k];
        }
        x[row] = acc / m[[row, row]];
    }
    Ok(x)
}
