//! Odd-basis polynomial approximations of the sigmoid.
//!
//! The approximations have the shape `c0 + c1 x + c3 x³ + c5 x⁵ + …`, so
//! `g(x) + g(-x) = 2 c0` holds for every `x`.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::lrmodel::sigmoid;

/// Reference degree-5 coefficients for the sigmoid on `[-8, 8]`.
pub const REFERENCE_C0: f64 = 0.5;
pub const REFERENCE_C1: f64 = 0.19131;
pub const REFERENCE_C3: f64 = -0.0045963;
pub const REFERENCE_C5: f64 = 0.0000412332;

/// Default number of grid points used by [`fit_least_squares`].
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidPoly {
    constant: f64,
    /// `odd[k]` multiplies `x^(2k+1)`.
    odd: Vec<f64>,
    lo: f64,
    hi: f64,
}

/// A polynomial value plus whether the input was inside the fitted interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub in_domain: bool,
}

impl SigmoidPoly {
    pub fn new(constant: f64, odd: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        if odd.is_empty() {
            return Err(Error::invalid("polynomial needs at least a linear term"));
        }
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::invalid(format!("bad domain [{lo}, {hi}]")));
        }
        Ok(Self {
            constant,
            odd,
            lo,
            hi,
        })
    }

    pub fn degree(&self) -> usize {
        2 * self.odd.len() - 1
    }

    pub fn c0(&self) -> f64 {
        self.constant
    }

    /// Coefficient of `x^power`; zero for even powers above 0 and powers beyond the degree.
    pub fn coefficient(&self, power: usize) -> f64 {
        if power == 0 {
            self.constant
        } else if power % 2 == 1 {
            self.odd.get(power / 2).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }

    pub fn c1(&self) -> f64 {
        self.coefficient(1)
    }

    pub fn c3(&self) -> f64 {
        self.coefficient(3)
    }

    pub fn c5(&self) -> f64 {
        self.coefficient(5)
    }

    /// `[c0, c1, c3, c5, …]`.
    pub fn coefficients(&self) -> Vec<f64> {
        std::iter::once(self.constant)
            .chain(self.odd.iter().copied())
            .collect()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Horner evaluation in `x²`: `c0 + x (c1 + x² (c3 + x² c5 …))`.
    ///
    /// Negative inputs are reflected through `(0, c0)`, which makes
    /// `g(x) + g(-x) == 2 c0` exact whenever `g(|x|)` lies in `[c0, 4 c0]`.
    pub fn value(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 2.0 * self.constant - self.value(-x);
        }
        let x2 = x * x;
        let inner = self.odd.iter().rev().fold(0.0, |acc, &c| acc * x2 + c);
        self.constant + x * inner
    }

    pub fn eval(&self, x: f64) -> Evaluation {
        Evaluation {
            value: self.value(x),
            in_domain: (self.lo..=self.hi).contains(&x),
        }
    }

    /// First derivative, used for monotonicity checks.
    pub fn derivative(&self, x: f64) -> f64 {
        let x2 = x * x;
        self.odd
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x2 + (2 * k + 1) as f64 * c)
    }
}

/// The degree-5 approximation on `[-8, 8]` with the reference coefficients.
pub fn reference_poly() -> SigmoidPoly {
    SigmoidPoly {
        constant: REFERENCE_C0,
        odd: vec![REFERENCE_C1, REFERENCE_C3, REFERENCE_C5],
        lo: -8.0,
        hi: 8.0,
    }
}

/// Unweighted least-squares fit of the sigmoid over `[lo, hi]` in the basis
/// `{1, x, x³, …, x^degree}`, sampled on a uniform grid with both endpoints.
///
/// The grid is rescaled to `[-1, 1]` before forming the normal equations so the
/// high powers stay well conditioned.
pub fn fit_least_squares(degree: usize, lo: f64, hi: f64, n_samples: usize) -> Result<SigmoidPoly> {
    if degree.is_multiple_of(2) || degree > 15 {
        return Err(Error::invalid(format!(
            "degree must be odd and at most 15, got {degree}"
        )));
    }
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::invalid(format!("bad domain [{lo}, {hi}]")));
    }
    if n_samples < degree + 1 {
        return Err(Error::invalid(format!(
            "need at least {} samples for degree {degree}, got {n_samples}",
            degree + 1
        )));
    }

    let basis = 1 + degree.div_ceil(2);
    let scale = lo.abs().max(hi.abs());
    let step = (hi - lo) / (n_samples - 1) as f64;

    let mut normal = Array2::<f64>::zeros((basis, basis));
    let mut rhs = Array1::<f64>::zeros(basis);
    let mut row = vec![0.0; basis];
    for i in 0..n_samples {
        let x = if i == n_samples - 1 {
            hi
        } else {
            lo + step * i as f64
        };
        let t = x / scale;
        let t2 = t * t;
        row[0] = 1.0;
        let mut p = t;
        for r in row.iter_mut().skip(1) {
            *r = p;
            p *= t2;
        }
        let target = sigmoid(x);
        for a in 0..basis {
            rhs[a] += row[a] * target;
            for b in 0..basis {
                normal[[a, b]] += row[a] * row[b];
            }
        }
    }

    let coeffs = solve(&normal, &rhs)?;
    let odd: Vec<f64> = (1..basis)
        .map(|k| coeffs[k] / scale.powi((2 * k - 1) as i32))
        .collect();
    if !coeffs[0].is_finite() || odd.iter().any(|c| !c.is_finite()) {
        return Err(Error::FitFailed("non-finite coefficients".into()));
    }
    SigmoidPoly::new(coeffs[0], odd, lo, hi)
}
