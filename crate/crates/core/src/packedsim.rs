//! Plaintext simulation of SIMD slot arithmetic.
//!
//! A matrix `n × f` is packed row-major into one power-of-two slot vector
//! (slot `i·f + j` holds entry `(i, j)`, the tail is zero). Algorithms here
//! only touch packed data through three primitives, exactly as a homomorphic
//! evaluator would: left rotation, slot-wise addition and slot-wise
//! multiplication. An [`Evaluator`] counts every primitive so callers can
//! audit that nothing was decoded along the way.
//!
//! Public constants (masks, scalars broadcast over the matrix window) are
//! encoded as plaintext vectors, which costs nothing in the op counts.

use std::cell::Cell;
use std::fmt;
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView2};

use crate::bounds::DiagonalBound;
use crate::error::{check_len, Error, Result};
use crate::lrmodel::{BinaryLabels, Dataset};
use crate::optimizers::{next_alpha, TraceRecord, TrainTrace, Weights, ALPHA_START};
use crate::polyapprox::SigmoidPoly;

/// Slot count used by the reference homomorphic parameters.
pub const FIDELITY_SLOTS: usize = 32768;

/// Vector of real slots whose length is a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotVector {
    slots: Vec<f64>,
}

impl SlotVector {
    pub fn new(slots: Vec<f64>) -> Result<Self> {
        if !slots.len().is_power_of_two() {
            return Err(Error::invalid(format!(
                "slot count {} is not a power of two",
                slots.len()
            )));
        }
        Ok(Self { slots })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.slots
    }
}

/// Left rotation: `out[i] = in[(i + l) mod len]`. Negative `l` rotates right.
pub fn rot(v: &SlotVector, l: isize) -> SlotVector {
    let len = v.slots.len();
    let shift = l.rem_euclid(len as isize) as usize;
    let mut slots = v.slots.clone();
    slots.rotate_left(shift);
    SlotVector { slots }
}

pub fn add(a: &SlotVector, b: &SlotVector) -> Result<SlotVector> {
    check_len("slot count", a.len(), b.len())?;
    Ok(SlotVector {
        slots: a.slots.iter().zip(&b.slots).map(|(x, y)| x + y).collect(),
    })
}

pub fn mul(a: &SlotVector, b: &SlotVector) -> Result<SlotVector> {
    check_len("slot count", a.len(), b.len())?;
    Ok(SlotVector {
        slots: a.slots.iter().zip(&b.slots).map(|(x, y)| x * y).collect(),
    })
}

/// An `n × f` matrix packed row-major into a slot vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedMatrix {
    vec: SlotVector,
    n: usize,
    f: usize,
}

impl PackedMatrix {
    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.f
    }

    pub fn slot_count(&self) -> usize {
        self.vec.len()
    }

    pub fn slots(&self) -> &SlotVector {
        &self.vec
    }

    /// True when every slot past `n·f` is zero.
    pub fn padding_is_zero(&self) -> bool {
        self.vec.slots[self.n * self.f..].iter().all(|&v| v == 0.0)
    }

    /// Plaintext matrix of the same shape with `value(i, j)` in the window.
    pub fn plaintext_like(&self, value: impl Fn(usize, usize) -> f64) -> PackedMatrix {
        let mut slots = vec![0.0; self.vec.len()];
        for i in 0..self.n {
            for j in 0..self.f {
                slots[i * self.f + j] = value(i, j);
            }
        }
        PackedMatrix {
            vec: SlotVector { slots },
            n: self.n,
            f: self.f,
        }
    }

    /// The scalar `c` broadcast over the `n × f` window.
    pub fn constant_like(&self, c: f64) -> PackedMatrix {
        self.plaintext_like(|_, _| c)
    }

    fn with_vec(&self, vec: SlotVector) -> PackedMatrix {
        PackedMatrix {
            vec,
            n: self.n,
            f: self.f,
        }
    }
}

/// Smallest power of two that holds `n·f` slots.
pub fn auto_slot_count(n: usize, f: usize) -> usize {
    (n * f).max(1).next_power_of_two()
}

/// Packs `m` row by row into `slot_count` slots, zero-padding the tail.
pub fn encode(m: ArrayView2<'_, f64>, slot_count: usize) -> Result<PackedMatrix> {
    let (n, f) = m.dim();
    if n == 0 || f == 0 {
        return Err(Error::invalid("cannot pack an empty matrix"));
    }
    if !slot_count.is_power_of_two() {
        return Err(Error::invalid(format!(
            "slot count {slot_count} is not a power of two"
        )));
    }
    if n * f > slot_count {
        return Err(Error::Capacity {
            needed: n * f,
            available: slot_count,
        });
    }
    let mut slots = vec![0.0; slot_count];
    for ((i, j), &v) in m.indexed_iter() {
        slots[i * f + j] = v;
    }
    Ok(PackedMatrix {
        vec: SlotVector { slots },
        n,
        f,
    })
}

pub fn decode(p: &PackedMatrix) -> Array2<f64> {
    Array2::from_shape_fn((p.n, p.f), |(i, j)| p.vec.slots[i * p.f + j])
}

/// Primitive operation counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub rot: usize,
    pub add: usize,
    pub mul: usize,
    /// Decodes performed inside a logging scope.
    pub logged_decodes: usize,
    /// Decodes performed anywhere else; must stay zero for a clean audit.
    pub unlogged_decodes: usize,
}

impl OpCounts {
    pub fn audit_passed(&self) -> bool {
        self.unlogged_decodes == 0
    }
}

impl fmt::Display for OpCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rot={},add={},mul={}", self.rot, self.add, self.mul)
    }
}

/// Counts every primitive applied to packed data.
#[derive(Debug, Default)]
pub struct Evaluator {
    counts: Cell<OpCounts>,
    logging: Cell<bool>,
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self) -> OpCounts {
        self.counts.get()
    }

    fn bump(&self, f: impl FnOnce(&mut OpCounts)) {
        let mut c = self.counts.get();
        f(&mut c);
        self.counts.set(c);
    }

    pub fn rot(&self, v: &SlotVector, l: isize) -> SlotVector {
        self.bump(|c| c.rot += 1);
        rot(v, l)
    }

    pub fn add(&self, a: &SlotVector, b: &SlotVector) -> Result<SlotVector> {
        self.bump(|c| c.add += 1);
        add(a, b)
    }

    pub fn mul(&self, a: &SlotVector, b: &SlotVector) -> Result<SlotVector> {
        self.bump(|c| c.mul += 1);
        mul(a, b)
    }

    /// Runs `f` as trace logging; decodes inside it are permitted.
    pub fn logging<R>(&self, f: impl FnOnce() -> R) -> R {
        let prev = self.logging.replace(true);
        let out = f();
        self.logging.set(prev);
        out
    }

    pub fn decode(&self, p: &PackedMatrix) -> Array2<f64> {
        if self.logging.get() {
            self.bump(|c| c.logged_decodes += 1);
        } else {
            self.bump(|c| c.unlogged_decodes += 1);
        }
        decode(p)
    }

    fn check_shape(a: &PackedMatrix, b: &PackedMatrix) -> Result<()> {
        check_len("packed rows", a.n, b.n)?;
        check_len("packed cols", a.f, b.f)?;
        check_len("slot count", a.vec.len(), b.vec.len())
    }

    pub fn add_packed(&self, a: &PackedMatrix, b: &PackedMatrix) -> Result<PackedMatrix> {
        Self::check_shape(a, b)?;
        Ok(a.with_vec(self.add(&a.vec, &b.vec)?))
    }

    pub fn mul_packed(&self, a: &PackedMatrix, b: &PackedMatrix) -> Result<PackedMatrix> {
        Self::check_shape(a, b)?;
        Ok(a.with_vec(self.mul(&a.vec, &b.vec)?))
    }

    /// `c · a` as a multiplication by a broadcast plaintext.
    pub fn scale(&self, a: &PackedMatrix, c: f64) -> Result<PackedMatrix> {
        self.mul_packed(a, &a.constant_like(c))
    }

    /// `out[s] = Σ_{t < count} v[s + t·stride]` by binary decomposition of
    /// `count`: O(log count) rotations and additions.
    fn window_sum(&self, v: &SlotVector, stride: isize, count: usize) -> Result<SlotVector> {
        debug_assert!(count >= 1);
        let mut result: Option<SlotVector> = None;
        let mut block = v.clone();
        let mut block_len = 1usize;
        let mut offset = 0usize;
        let mut remaining = count;
        loop {
            if remaining & 1 == 1 {
                let shifted = if offset == 0 {
                    block.clone()
                } else {
                    self.rot(&block, offset as isize * stride)
                };
                result = Some(match result {
                    None => shifted,
                    Some(r) => self.add(&r, &shifted)?,
                });
                offset += block_len;
            }
            remaining >>= 1;
            if remaining == 0 {
                break;
            }
            let doubled = self.rot(&block, block_len as isize * stride);
            block = self.add(&block, &doubled)?;
            block_len *= 2;
        }
        Ok(result.expect("count >= 1"))
    }
}

/// Rotation by `l` confined to the `n·f` window, so the zero tail is kept.
/// Identical to a plain rotation when the matrix fills every slot.
fn window_rotate(ev: &Evaluator, p: &PackedMatrix, l: usize) -> Result<PackedMatrix> {
    let window = p.n * p.f;
    let l = l % window;
    if l == 0 {
        return Ok(p.clone());
    }
    if window == p.vec.len() {
        return Ok(p.with_vec(ev.rot(&p.vec, l as isize)));
    }
    let split = window - l;
    let front = p.plaintext_like(|i, j| if i * p.f + j < split { 1.0 } else { 0.0 });
    let back = p.plaintext_like(|i, j| if i * p.f + j >= split { 1.0 } else { 0.0 });
    let ahead = ev.mul(&ev.rot(&p.vec, l as isize), &front.vec)?;
    let wrapped = ev.mul(&ev.rot(&p.vec, l as isize - window as isize), &back.vec)?;
    Ok(p.with_vec(ev.add(&ahead, &wrapped)?))
}

/// Shift by one slot: entry `(i, j)` takes `(i, j+1)`, with the first entry
/// wrapping to the last position.
pub fn incomplete_column_shift(ev: &Evaluator, p: &PackedMatrix) -> Result<PackedMatrix> {
    window_rotate(ev, p, 1)
}

/// Shift by one row: row `i` takes row `i+1`, row 0 wraps to the last row.
pub fn row_shift(ev: &Evaluator, p: &PackedMatrix) -> Result<PackedMatrix> {
    window_rotate(ev, p, p.f)
}

/// Every row of the result holds the column sums `Σᵢ p[i][j]`.
pub fn sum_row_vec(ev: &Evaluator, p: &PackedMatrix) -> Result<PackedMatrix> {
    let f = p.f as isize;
    let folded = ev.window_sum(&p.vec, f, p.n)?;
    let first_row = p.plaintext_like(|i, _| if i == 0 { 1.0 } else { 0.0 });
    let head = ev.mul(&folded, &first_row.vec)?;
    Ok(p.with_vec(ev.window_sum(&head, -f, p.n)?))
}

/// Every entry `(i, j)` of the result holds the row sum `Σⱼ p[i][j]`.
pub fn sum_col_vec(ev: &Evaluator, p: &PackedMatrix) -> Result<PackedMatrix> {
    let folded = ev.window_sum(&p.vec, 1, p.f)?;
    let first_col = p.plaintext_like(|_, j| if j == 0 { 1.0 } else { 0.0 });
    let head = ev.mul(&folded, &first_col.vec)?;
    Ok(p.with_vec(ev.window_sum(&head, -1, p.f)?))
}

/// Sliding `kh × kw` window sums anchored at the top-left corner of every
/// window that fits; all other entries are zero.
pub fn sum_for_conv(
    ev: &Evaluator,
    p: &PackedMatrix,
    kh: usize,
    kw: usize,
) -> Result<PackedMatrix> {
    if kh == 0 || kw == 0 || kh > p.n || kw > p.f {
        return Err(Error::invalid(format!(
            "kernel {kh}x{kw} does not fit a {}x{} matrix",
            p.n, p.f
        )));
    }
    let across = ev.window_sum(&p.vec, 1, kw)?;
    let down = ev.window_sum(&across, p.f as isize, kh)?;
    let valid = p.plaintext_like(|i, j| {
        if i + kh <= p.n && j + kw <= p.f {
            1.0
        } else {
            0.0
        }
    });
    Ok(p.with_vec(ev.mul(&down, &valid.vec)?))
}

/// The three packed inputs of encrypted enhanced-NAG training.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedTrainingContext {
    /// Row `i` is `yᵢ · xᵢ`.
    pub ct_z: PackedMatrix,
    /// Weight row replicated `n` times; starts at zero.
    pub ct_beta: PackedMatrix,
    /// `B̄` diagonal replicated `n` times.
    pub ct_bbar: PackedMatrix,
}

impl PackedTrainingContext {
    pub fn samples(&self) -> usize {
        self.ct_z.n
    }

    pub fn width(&self) -> usize {
        self.ct_z.f
    }
}

/// Packs `yᵢ xᵢ`, a zero weight matrix and the replicated `B̄`.
/// `slot_count = None` picks the smallest power of two that fits.
pub fn build_context(
    data: &Dataset,
    y: &BinaryLabels,
    bound: &DiagonalBound,
    slot_count: Option<usize>,
) -> Result<PackedTrainingContext> {
    check_len("label count", data.n(), y.len())?;
    check_len("bound length", data.width(), bound.len())?;
    let (n, f) = (data.n(), data.width());
    let slots = slot_count.unwrap_or_else(|| auto_slot_count(n, f));

    let mut z = data.x().to_owned();
    for (mut row, &yi) in z.rows_mut().into_iter().zip(y.values().iter()) {
        row.mapv_inplace(|v| yi * v);
    }
    let ct_z = encode(z.view(), slots)?;
    let ct_beta = encode(Array2::zeros((n, f)).view(), slots)?;
    let b_bar = bound.b_bar();
    let ct_bbar = encode(
        Array2::from_shape_fn((n, f), |(_, j)| b_bar[j]).view(),
        slots,
    )?;
    Ok(PackedTrainingContext {
        ct_z,
        ct_beta,
        ct_bbar,
    })
}

/// `1 - g(s)` over the matrix window, evaluated by Horner in `s²`.
fn poly_complement(ev: &Evaluator, s: &PackedMatrix, poly: &SigmoidPoly) -> Result<PackedMatrix> {
    let coeffs = poly.coefficients();
    let odd = &coeffs[1..];
    let s2 = ev.mul_packed(s, s)?;
    let mut acc = s.constant_like(*odd.last().expect("non-empty"));
    for &c in odd.iter().rev().skip(1) {
        acc = ev.add_packed(&ev.mul_packed(&acc, &s2)?, &s.constant_like(c))?;
    }
    let odd_part = ev.mul_packed(&acc, s)?;
    let negated = ev.scale(&odd_part, -1.0)?;
    ev.add_packed(&negated, &s.constant_like(1.0 - poly.c0()))
}

/// Result of a packed run.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedRun {
    pub trace: TrainTrace,
    pub counts: OpCounts,
}

/// Enhanced NAG carried out on packed data only:
///
/// 1. `ct_Z ⊙ ct_β`, then row sums give `yᵢ βᵀxᵢ` in every slot of row `i`;
/// 2. the polynomial sigmoid gives `1 - g(yᵢ βᵀxᵢ)`;
/// 3. multiplying by `ct_Z` and taking column sums gives the gradient in every row;
/// 4. `ct_B̄ ⊙ ∇` is the quadratic gradient, followed by the momentum blend.
///
/// Decoding happens only inside the evaluator's logging scope to record the
/// per-iteration log-likelihood.
pub fn train_packed(
    ev: &Evaluator,
    ctx: &PackedTrainingContext,
    poly: &SigmoidPoly,
    iterations: usize,
) -> Result<PackedRun> {
    if iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    let n = ctx.samples();
    let start = Instant::now();
    let z_clear = ev.logging(|| ev.decode(&ctx.ct_z));

    let mut v = ctx.ct_beta.clone();
    let mut w = ctx.ct_beta.plaintext_like(|_, _| 0.0);
    let mut alpha0 = ALPHA_START;
    let mut alpha1 = next_alpha(alpha0);
    let mut records = Vec::with_capacity(iterations);
    let mut weights = Array1::zeros(ctx.width());

    for count in 1..=iterations {
        let zb = ev.mul_packed(&ctx.ct_z, &v)?;
        let margins = sum_col_vec(ev, &zb)?;
        let residual = poly_complement(ev, &margins, poly)?;
        let weighted = ev.mul_packed(&residual, &ctx.ct_z)?;
        let grad = sum_row_vec(ev, &weighted)?;
        let big_g = ev.mul_packed(&ctx.ct_bbar, &grad)?;

        let eta = (1.0 - alpha0) / alpha1;
        let gamma = 1.0 / (n as f64 * count as f64);
        let temp = ev.add_packed(&v, &ev.scale(&big_g, 1.0 + gamma)?)?;
        v = ev.add_packed(&ev.scale(&temp, 1.0 - eta)?, &ev.scale(&w, eta)?)?;
        w = temp;
        alpha0 = alpha1;
        alpha1 = next_alpha(alpha0);

        let (beta, mle) = ev.logging(|| {
            let beta = ev.decode(&v).row(0).to_owned();
            let mle = -z_clear
                .rows()
                .into_iter()
                .map(|row| {
                    let m = row.dot(&beta);
                    if m > 0.0 {
                        (-m).exp().ln_1p()
                    } else {
                        -m + m.exp().ln_1p()
                    }
                })
                .sum::<f64>();
            (beta, mle)
        });
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Numerical(format!(
                "packed weights became non-finite at iteration {count}"
            )));
        }
        weights = beta;
        records.push(TraceRecord {
            iteration: count,
            mle,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    Ok(PackedRun {
        trace: TrainTrace {
            records,
            weights: Weights::Binary(weights),
        },
        counts: ev.counts(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sv(v: &[f64]) -> SlotVector {
        SlotVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn encode_examples() {
        let m = array![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(
            encode(m.view(), 4).unwrap().slots().as_slice(),
            &[1.0, 2.0, 3.0, 4.0]
        );
        let p = encode(m.view(), 8).unwrap();
        assert_eq!(
            p.slots().as_slice(),
            &[1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(decode(&p), m);
        assert!(matches!(encode(m.view(), 2), Err(Error::Capacity { .. })));
        assert!(encode(m.view(), 6).is_err());
    }

    #[test]
    fn slot_vector_must_be_power_of_two() {
        assert!(SlotVector::new(vec![0.0; 3]).is_err());
        assert!(SlotVector::new(vec![0.0; 1]).is_ok());
    }

    #[test]
    fn rotation_examples() {
        let v = sv(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(rot(&v, 1).as_slice(), &[2.0, 3.0, 4.0, 1.0]);
        assert_eq!(rot(&v, 4), v);
        assert_eq!(rot(&v, -1).as_slice(), &[4.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn add_mul_identities() {
        let v = sv(&[1.5, -2.0, 0.0, 7.0]);
        assert_eq!(add(&v, &sv(&[0.0; 4])).unwrap(), v);
        assert_eq!(mul(&v, &sv(&[1.0; 4])).unwrap(), v);
        assert!(add(&v, &sv(&[0.0; 2])).is_err());
        assert!(mul(&v, &sv(&[0.0; 8])).is_err());
    }

    #[test]
    fn first_column_filter_by_mask() {
        let z = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]];
        let p = encode(z.view(), 16).unwrap();
        let mask = p.plaintext_like(|_, j| if j == 0 { 1.0 } else { 0.0 });
        let ev = Evaluator::new();
        let filtered = ev.mul_packed(&mask, &p).unwrap();
        assert_eq!(
            decode(&filtered),
            array![[1.0, 0.0, 0.0], [4.0, 0.0, 0.0], [7.0, 0.0, 0.0]]
        );
    }

    #[test]
    fn column_shift_full_capacity_matches_display() {
        let z = Array2::from_shape_fn((4, 4), |(i, j)| (10 * (i + 1) + j + 1) as f64);
        let p = encode(z.view(), 16).unwrap();
        let ev = Evaluator::new();
        let s = decode(&incomplete_column_shift(&ev, &p).unwrap());
        // row i becomes (z[i][2], z[i][3], z[i][4], z[i+1][1]); z[1][1] lands at (n, f)
        assert_eq!(s.row(0), array![12.0, 13.0, 14.0, 21.0]);
        assert_eq!(s.row(3), array![42.0, 43.0, 44.0, 11.0]);
        assert_eq!(ev.counts().rot, 1);
    }

    #[test]
    fn row_shift_moves_rows_up() {
        let z = Array2::from_shape_fn((3, 2), |(i, j)| (i * 2 + j) as f64);
        let p = encode(z.view(), 8).unwrap();
        let ev = Evaluator::new();
        let s = row_shift(&ev, &p).unwrap();
        let d = decode(&s);
        assert_eq!(d.row(0), z.row(1));
        assert_eq!(d.row(1), z.row(2));
        assert_eq!(d.row(2), z.row(0));
        assert!(s.padding_is_zero());
    }

    #[test]
    fn column_shift_cycles_back() {
        let z = Array2::from_shape_fn((3, 3), |(i, j)| (i * 3 + j + 1) as f64);
        let p = encode(z.view(), 16).unwrap();
        let ev = Evaluator::new();
        let mut q = p.clone();
        for k in 1..=9 {
            q = incomplete_column_shift(&ev, &q).unwrap();
            assert!(q.padding_is_zero());
            if k < 9 {
                assert_ne!(q, p);
            }
        }
        assert_eq!(q, p);
    }

    #[test]
    fn sums_on_two_by_two() {
        let p = encode(array![[1.0, 2.0], [3.0, 4.0]].view(), 4).unwrap();
        let ev = Evaluator::new();
        assert_eq!(
            decode(&sum_row_vec(&ev, &p).unwrap()),
            array![[4.0, 6.0], [4.0, 6.0]]
        );
        assert_eq!(
            decode(&sum_col_vec(&ev, &p).unwrap()),
            array![[3.0, 3.0], [7.0, 7.0]]
        );
        assert_eq!(ev.counts().unlogged_decodes, 0);
    }

    #[test]
    fn conv_display_example() {
        let z = Array2::from_shape_fn((4, 4), |(i, j)| (i * 4 + j) as f64);
        let p = encode(z.view(), 16).unwrap();
        let ev = Evaluator::new();
        let s = decode(&sum_for_conv(&ev, &p, 3, 3).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i < 2 && j < 2 {
                    (0..3)
                        .flat_map(|a| (0..3).map(move |b| (a, b)))
                        .map(|(a, b)| z[[i + a, j + b]])
                        .sum()
                } else {
                    0.0
                };
                assert_eq!(s[[i, j]], expected);
            }
        }
    }

    #[test]
    fn conv_unit_kernel_is_identity_and_oversize_fails() {
        let z = Array2::from_shape_fn((3, 5), |(i, j)| (i * 7 + j) as f64 - 4.0);
        let p = encode(z.view(), 16).unwrap();
        let ev = Evaluator::new();
        assert_eq!(decode(&sum_for_conv(&ev, &p, 1, 1).unwrap()), z);
        assert!(sum_for_conv(&ev, &p, 4, 1).is_err());
        assert!(sum_for_conv(&ev, &p, 1, 6).is_err());
        assert!(sum_for_conv(&ev, &p, 0, 1).is_err());
    }

    #[test]
    fn context_layout() {
        let data = Dataset::new(array![[1.0, 0.5]]).unwrap();
        let y = BinaryLabels::new(array![-1.0]).unwrap();
        let bound = DiagonalBound::from_b_bar(array![2.0, 3.0]).unwrap();
        let ctx = build_context(&data, &y, &bound, None).unwrap();
        assert_eq!(decode(&ctx.ct_z), array![[-1.0, -0.5]]);
        assert_eq!(decode(&ctx.ct_beta), array![[0.0, 0.0]]);
        assert_eq!(decode(&ctx.ct_bbar), array![[2.0, 3.0]]);
        assert!(matches!(
            build_context(&data, &y, &bound, Some(1)),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn op_count_summary_format() {
        let c = OpCounts {
            rot: 3,
            add: 4,
            mul: 5,
            ..Default::default()
        };
        assert_eq!(c.to_string(), "rot=3,add=4,mul=5");
    }

    #[test]
    fn decode_outside_logging_fails_audit() {
        let ev = Evaluator::new();
        let p = encode(array![[1.0]].view(), 1).unwrap();
        ev.logging(|| ev.decode(&p));
        assert!(ev.counts().audit_passed());
        ev.decode(&p);
        assert!(!ev.counts().audit_passed());
    }
}
