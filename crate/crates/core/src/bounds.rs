//! Fixed-Hessian lower bounds and the diagonal preconditioner behind the
//! quadratic gradient.
//!
//! For a log-likelihood with Hessian `H`, any symmetric `H̄ ≤ H` (Loewner
//! order) can be turned into a diagonal `B̃` with
//! `B̃[k][k] = -ε - Σᵢ |H̄[k][i]|`, which by Gerschgorin satisfies `B̃ ≤ H̄`.
//! The quadratic gradient is `G = B̄ g` where `B̄[k] = 1 / |B̃[k][k]|`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{check_len, Error, Result};
pub use crate::linalg::{kron, SymmetricMatrix};

/// Default regulariser added to every absolute row sum.
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// `XᵀX`, accumulated over rows in index order and mirrored so the result is
/// exactly symmetric.
pub(crate) fn gram_scaled(x: ArrayView2<'_, f64>, scale: f64) -> SymmetricMatrix {
    let cols = x.ncols();
    SymmetricMatrix::from_upper(cols, |i, j| {
        let mut acc = 0.0;
        for row in x.rows() {
            acc += row[i] * row[j];
        }
        scale * acc
    })
}

fn check_design(x: ArrayView2<'_, f64>) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::invalid("design matrix is empty"));
    }
    Ok(())
}

/// `-¼ XᵀX`, the classic Böhning–Lindsay bound for the binary LR Hessian.
pub fn fixed_hessian_bound_binary(x: ArrayView2<'_, f64>) -> Result<SymmetricMatrix> {
    check_design(x)?;
    Ok(gram_scaled(x, -0.25))
}

/// `-½ XᵀX`, the bound used for every class block of multiclass LR.
pub fn fixed_hessian_bound_multiclass(x: ArrayView2<'_, f64>) -> Result<SymmetricMatrix> {
    check_design(x)?;
    Ok(gram_scaled(x, -0.5))
}

/// Signed row sums of `H̄`: the simplified fixed Hessian diagonal. Kept for
/// comparison only; entries can be zero or positive on sparse data.
pub fn sfh_rowsum_diagonal(h: &SymmetricMatrix) -> Array1<f64> {
    h.entries().rows().into_iter().map(|r| r.sum()).collect()
}

/// Diagonal bound `B̃` and its reciprocal magnitudes `B̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalBound {
    b_tilde: Array1<f64>,
    b_bar: Array1<f64>,
    epsilon: f64,
}

impl DiagonalBound {
    /// Builds a bound directly from preconditioner values `b_bar` (all > 0).
    /// `B̃` is recovered as `-1 / b_bar`.
    pub fn from_b_bar(b_bar: Array1<f64>) -> Result<Self> {
        if b_bar.is_empty() {
            return Err(Error::invalid("empty preconditioner"));
        }
        if let Some(bad) = b_bar.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(format!(
                "preconditioner entry {bad} is not positive"
            )));
        }
        let b_tilde = b_bar.mapv(|v| -1.0 / v);
        let epsilon = b_tilde.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        Ok(Self {
            b_tilde,
            b_bar,
            epsilon,
        })
    }

    pub fn b_tilde(&self) -> ArrayView1<'_, f64> {
        self.b_tilde.view()
    }

    pub fn b_bar(&self) -> ArrayView1<'_, f64> {
        self.b_bar.view()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.b_bar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_bar.is_empty()
    }

    /// `B̃` as a dense diagonal matrix.
    pub fn as_symmetric(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(self.b_tilde.as_slice().expect("contiguous"))
    }

    /// `G = B̄ ⊙ g`.
    pub fn quadratic_gradient(&self, g: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_len("gradient length", self.b_bar.len(), g.len())?;
        Ok(&self.b_bar * &g)
    }

    /// `B̄` replicated over `classes` rows, matching a `classes × (1+d)` weight matrix.
    pub fn replicated(&self, classes: usize) -> Array2<f64> {
        let f = self.b_bar.len();
        Array2::from_shape_fn((classes, f), |(_, j)| self.b_bar[j])
    }
}

/// Builds `B̃` from absolute row sums of `h` plus `epsilon`, and `B̄` as the
/// reciprocal magnitudes.
pub fn quadratic_bound(h: &SymmetricMatrix, epsilon: f64) -> Result<DiagonalBound> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let magnitudes: Array1<f64> = h
        .entries()
        .rows()
        .into_iter()
        .map(|r| epsilon + r.iter().map(|v| v.abs()).sum::<f64>())
        .collect();
    Ok(DiagonalBound {
        b_tilde: magnitudes.mapv(|m| -m),
        b_bar: magnitudes.mapv(|m| 1.0 / m),
        epsilon,
    })
}

/// `G = B̄ ⊙ g`.
pub fn quadratic_gradient(bound: &DiagonalBound, g: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    bound.quadratic_gradient(g)
}

/// True iff `a - b` is positive semi-definite up to `tol`, i.e. `b ≤ a`.
pub fn is_loewner_leq(b: &SymmetricMatrix, a: &SymmetricMatrix, tol: f64) -> Result<bool> {
    let diff = a.sub(b)?;
    Ok(diff.min_eigenvalue() >= -tol)
}
