//! NAG and Adagrad training loops, in baseline form and enhanced with the
//! quadratic gradient `G = B̄ ⊙ g`.
//!
//! Every method maximises the log-likelihood, so all updates are ascent steps.
//! Multiclass weights are handled flattened row-major (`c × (1+d)` → `c(1+d)`),
//! with `B̄` replicated across the class rows.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1};

use crate::bounds::{
    fixed_hessian_bound_binary, fixed_hessian_bound_multiclass, quadratic_bound, DiagonalBound,
    DEFAULT_EPSILON,
};
use crate::error::{check_len, Error, Result};
use crate::lrmodel::{
    gradient_binary_with, gradient_multiclass, log_likelihood_binary, log_likelihood_multiclass,
    sigmoid, BinaryLabels, Dataset, LabelSet, OneHotLabels,
};
use crate::polyapprox::SigmoidPoly;

/// Initial value of the momentum sequence.
pub const ALPHA_START: f64 = 0.01;

/// Which sigmoid the binary gradient uses.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Link {
    #[default]
    Exact,
    Poly(SigmoidPoly),
}

impl Link {
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            Link::Exact => sigmoid(z),
            Link::Poly(p) => p.value(z),
        }
    }
}

/// A log-likelihood over flattened weights.
pub trait Objective {
    /// Length of the flattened weight vector.
    fn dim(&self) -> usize;
    /// Training sample count `n`.
    fn samples(&self) -> usize;
    fn gradient(&self, w: ArrayView1<'_, f64>) -> Result<Array1<f64>>;
    fn log_likelihood(&self, w: ArrayView1<'_, f64>) -> Result<f64>;
}

pub struct BinaryObjective<'a> {
    data: &'a Dataset,
    labels: &'a BinaryLabels,
    link: Link,
}

impl<'a> BinaryObjective<'a> {
    pub fn new(data: &'a Dataset, labels: &'a BinaryLabels, link: Link) -> Result<Self> {
        check_len("label count", data.n(), labels.len())?;
        Ok(Self { data, labels, link })
    }
}

impl Objective for BinaryObjective<'_> {
    fn dim(&self) -> usize {
        self.data.width()
    }

    fn samples(&self) -> usize {
        self.data.n()
    }

    fn gradient(&self, w: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_len("weight length", self.dim(), w.len())?;
        Ok(gradient_binary_with(self.data, self.labels, w, |z| {
            self.link.apply(z)
        }))
    }

    fn log_likelihood(&self, w: ArrayView1<'_, f64>) -> Result<f64> {
        log_likelihood_binary(self.data, self.labels, w)
    }
}

pub struct MulticlassObjective<'a> {
    data: &'a Dataset,
    labels: &'a OneHotLabels,
}

impl<'a> MulticlassObjective<'a> {
    pub fn new(data: &'a Dataset, labels: &'a OneHotLabels) -> Result<Self> {
        check_len("label count", data.n(), labels.len())?;
        Ok(Self { data, labels })
    }

    pub fn classes(&self) -> usize {
        self.labels.classes()
    }

    fn unflatten(&self, w: ArrayView1<'_, f64>) -> Result<Array2<f64>> {
        check_len("weight length", self.dim(), w.len())?;
        Ok(w.to_owned()
            .into_shape_with_order((self.classes(), self.data.width()))
            .expect("length checked"))
    }
}

impl Objective for MulticlassObjective<'_> {
    fn dim(&self) -> usize {
        self.classes() * self.data.width()
    }

    fn samples(&self) -> usize {
        self.data.n()
    }

    fn gradient(&self, w: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let w = self.unflatten(w)?;
        let g = gradient_multiclass(self.data, self.labels, w.view())?;
        Ok(g.into_shape_with_order(self.dim()).expect("same size"))
    }

    fn log_likelihood(&self, w: ArrayView1<'_, f64>) -> Result<f64> {
        let w = self.unflatten(w)?;
        log_likelihood_multiclass(self.data, self.labels, w.view())
    }
}

/// Flattened `B̄` matching an objective's weight layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Preconditioner(Array1<f64>);

impl Preconditioner {
    pub fn binary(bound: &DiagonalBound) -> Self {
        Self(bound.b_bar().to_owned())
    }

    /// `B̄` copied to every class row.
    pub fn multiclass(bound: &DiagonalBound, classes: usize) -> Self {
        let replicated = bound.replicated(classes);
        let len = replicated.len();
        Self(replicated.into_shape_with_order(len).expect("same size"))
    }

    /// `B̄` from `-¼XᵀX`.
    pub fn for_binary(data: &Dataset, epsilon: f64) -> Result<Self> {
        let h = fixed_hessian_bound_binary(data.x())?;
        Ok(Self::binary(&quadratic_bound(&h, epsilon)?))
    }

    /// `B̄` from `-½XᵀX`, replicated over `classes` rows.
    pub fn for_multiclass(data: &Dataset, classes: usize, epsilon: f64) -> Result<Self> {
        let h = fixed_hessian_bound_multiclass(data.x())?;
        Ok(Self::multiclass(&quadratic_bound(&h, epsilon)?, classes))
    }

    pub fn values(&self) -> ArrayView1<'_, f64> {
        self.0.view()
    }

    pub fn apply(&self, g: &Array1<f64>) -> Result<Array1<f64>> {
        check_len("gradient length", self.0.len(), g.len())?;
        Ok(&self.0 * g)
    }
}

/// Step size for baseline NAG at iteration index `t` (0 for the first step).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrSchedule {
    /// `scale / (t + 1)`.
    Harmonic(f64),
    /// `scale / ((t + 1) n)`: the harmonic rate applied to the mean gradient
    /// rather than the summed one.
    HarmonicPerSample(f64),
    Constant(f64),
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule::Harmonic(10.0)
    }
}

impl LrSchedule {
    pub fn rate(&self, t: usize, samples: usize) -> f64 {
        match *self {
            LrSchedule::Harmonic(s) => s / (t as f64 + 1.0),
            LrSchedule::HarmonicPerSample(s) => s / ((t as f64 + 1.0) * samples as f64),
            LrSchedule::Constant(r) => r,
        }
    }
}

/// How the new weights blend the fresh step with the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Mixing {
    /// `η = (1 - α₀) / α₁` from the momentum sequence.
    #[default]
    Nesterov,
    /// A fixed blend weight; `Fixed(0.0)` disables momentum.
    Fixed(f64),
}

/// `α₁ = ½ (1 + √(1 + 4 α₀²))`.
pub fn next_alpha(alpha: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * alpha * alpha).sqrt())
}

/// State shared by baseline and enhanced NAG.
///
/// `weights` is the point where the gradient is evaluated and the value
/// returned by training; `lagged` holds the previous un-mixed step.
#[derive(Debug, Clone, PartialEq)]
pub struct NagState {
    pub weights: Array1<f64>,
    pub lagged: Array1<f64>,
    pub alpha0: f64,
    pub alpha1: f64,
    pub iteration: usize,
}

impl NagState {
    pub fn new(dim: usize) -> Self {
        Self {
            weights: Array1::zeros(dim),
            lagged: Array1::zeros(dim),
            alpha0: ALPHA_START,
            alpha1: next_alpha(ALPHA_START),
            iteration: 0,
        }
    }

    /// Blend weight for the current iteration.
    pub fn momentum(&self) -> f64 {
        (1.0 - self.alpha0) / self.alpha1
    }

    /// `temp = weights + step; weights = (1-η) temp + η lagged; lagged = temp`,
    /// then advances the α sequence.
    pub fn advance(&mut self, step: &Array1<f64>, mixing: Mixing) -> Result<()> {
        check_len("step length", self.weights.len(), step.len())?;
        let eta = match mixing {
            Mixing::Nesterov => self.momentum(),
            Mixing::Fixed(v) => v,
        };
        let temp = &self.weights + step;
        self.weights = &temp * (1.0 - eta) + &self.lagged * eta;
        self.lagged = temp;
        self.alpha0 = self.alpha1;
        self.alpha1 = next_alpha(self.alpha0);
        self.iteration += 1;
        Ok(())
    }
}

/// One NAG ascent step with the raw gradient and rate `schedule(t)`.
pub fn nag_step_baseline(
    state: &mut NagState,
    objective: &impl Objective,
    schedule: LrSchedule,
    mixing: Mixing,
) -> Result<()> {
    let g = objective.gradient(state.weights.view())?;
    let rate = schedule.rate(state.iteration, objective.samples());
    state.advance(&(g * rate), mixing)
}

/// One enhanced NAG step: `step = (1 + γ) B̄ g` with `γ = 1 / (n · count)`.
pub fn enhanced_nag_step(
    state: &mut NagState,
    objective: &impl Objective,
    precond: &Preconditioner,
    mixing: Mixing,
) -> Result<()> {
    let g = objective.gradient(state.weights.view())?;
    let big_g = precond.apply(&g)?;
    let count = (state.iteration + 1) as f64;
    let gamma = 1.0 / (objective.samples() as f64 * count);
    state.advance(&(big_g * (1.0 + gamma)), mixing)
}

/// Where ε enters the Adagrad denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EpsPlacement {
    /// `ε + √acc`
    #[default]
    Outside,
    /// `√(ε + acc)`
    InsideRoot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdagradState {
    pub weights: Array1<f64>,
    /// Running sum of squared (quadratic) gradients.
    pub accum: Array1<f64>,
    pub iteration: usize,
}

impl AdagradState {
    pub fn new(dim: usize) -> Self {
        Self {
            weights: Array1::zeros(dim),
            accum: Array1::zeros(dim),
            iteration: 0,
        }
    }

    fn apply(
        &mut self,
        direction: &Array1<f64>,
        numerator: f64,
        eps: f64,
        placement: EpsPlacement,
    ) {
        self.accum.zip_mut_with(direction, |acc, &d| *acc += d * d);
        for ((w, &acc), &d) in self
            .weights
            .iter_mut()
            .zip(self.accum.iter())
            .zip(direction.iter())
        {
            let denom = match placement {
                EpsPlacement::Outside => eps + acc.sqrt(),
                EpsPlacement::InsideRoot => (eps + acc).sqrt(),
            };
            if denom > 0.0 {
                *w += numerator / denom * d;
            }
        }
        self.iteration += 1;
    }
}

/// `acc += g²; β += η / (ε + √acc) · g`.
pub fn adagrad_step_baseline(
    state: &mut AdagradState,
    objective: &impl Objective,
    eta: f64,
    eps: f64,
) -> Result<()> {
    check_len("weight length", objective.dim(), state.weights.len())?;
    let g = objective.gradient(state.weights.view())?;
    state.apply(&g, eta, eps, EpsPlacement::Outside);
    Ok(())
}

/// `acc += G²; β += (1 + η) / (ε + √acc) · G` (or `√(ε + acc)` with
/// [`EpsPlacement::InsideRoot`]).
pub fn enhanced_adagrad_step(
    state: &mut AdagradState,
    objective: &impl Objective,
    precond: &Preconditioner,
    eta: f64,
    eps: f64,
    placement: EpsPlacement,
) -> Result<()> {
    check_len("weight length", objective.dim(), state.weights.len())?;
    let g = objective.gradient(state.weights.view())?;
    let big_g = precond.apply(&g)?;
    state.apply(&big_g, 1.0 + eta, eps, placement);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Nag,
    EnhancedNag,
    Adagrad,
    EnhancedAdagrad,
    EnhancedNagMulti,
    EnhancedAdagradMulti,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Nag,
        Method::EnhancedNag,
        Method::Adagrad,
        Method::EnhancedAdagrad,
        Method::EnhancedNagMulti,
        Method::EnhancedAdagradMulti,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Nag => "nag",
            Method::EnhancedNag => "nag+",
            Method::Adagrad => "adagrad",
            Method::EnhancedAdagrad => "adagrad+",
            Method::EnhancedNagMulti => "nag+multi",
            Method::EnhancedAdagradMulti => "adagrad+multi",
        }
    }

    pub fn is_multiclass(&self) -> bool {
        matches!(
            self,
            Method::EnhancedNagMulti | Method::EnhancedAdagradMulti
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub schedule: LrSchedule,
    pub adagrad_eta: f64,
    pub adagrad_eps: f64,
    pub bound_epsilon: f64,
    pub link: Link,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            schedule: LrSchedule::default(),
            adagrad_eta: 0.01,
            adagrad_eps: 1e-8,
            bound_epsilon: DEFAULT_EPSILON,
            link: Link::Exact,
        }
    }
}

/// Trained weights in their natural shape.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Binary(Array1<f64>),
    Multiclass(Array2<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub mle: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub records: Vec<TraceRecord>,
    pub weights: Weights,
}

impl TrainTrace {
    pub fn mle(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.mle).collect()
    }

    /// `iteration,mle,seconds`, one row per iteration, LF line endings.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(b"iteration,mle,seconds\n")?;
        for r in &self.records {
            writeln!(out, "{},{},{}", r.iteration, r.mle, r.seconds)?;
        }
        Ok(())
    }
}

enum Runner {
    Nag {
        state: NagState,
        step: NagKind,
    },
    Adagrad {
        state: AdagradState,
        step: AdagradKind,
    },
}

enum NagKind {
    Baseline(LrSchedule),
    Enhanced(Preconditioner),
}

enum AdagradKind {
    Baseline,
    Enhanced(Preconditioner, EpsPlacement),
}

impl Runner {
    fn step(&mut self, obj: &impl Objective, cfg: &TrainConfig) -> Result<()> {
        match self {
            Runner::Nag { state, step } => match step {
                NagKind::Baseline(s) => nag_step_baseline(state, obj, *s, Mixing::Nesterov),
                NagKind::Enhanced(p) => enhanced_nag_step(state, obj, p, Mixing::Nesterov),
            },
            Runner::Adagrad { state, step } => match step {
                AdagradKind::Baseline => {
                    adagrad_step_baseline(state, obj, cfg.adagrad_eta, cfg.adagrad_eps)
                }
                AdagradKind::Enhanced(p, placement) => enhanced_adagrad_step(
                    state,
                    obj,
                    p,
                    cfg.adagrad_eta,
                    cfg.adagrad_eps,
                    *placement,
                ),
            },
        }
    }

    fn weights(&self) -> &Array1<f64> {
        match self {
            Runner::Nag { state, .. } => &state.weights,
            Runner::Adagrad { state, .. } => &state.weights,
        }
    }
}

fn run_loop(
    mut runner: Runner,
    obj: &impl Objective,
    iterations: usize,
    cfg: &TrainConfig,
) -> Result<(Vec<TraceRecord>, Array1<f64>)> {
    let start = Instant::now();
    let mut records = Vec::with_capacity(iterations);
    for iteration in 1..=iterations {
        runner.step(obj, cfg)?;
        let w = runner.weights();
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "weights became non-finite at iteration {iteration}"
            )));
        }
        let mle = obj.log_likelihood(w.view())?;
        records.push(TraceRecord {
            iteration,
            mle,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok((records, runner.weights().clone()))
}

/// Runs `iterations` steps of `method` from zero weights, recording the
/// log-likelihood after every step.
pub fn train(
    method: Method,
    data: &Dataset,
    labels: &LabelSet,
    iterations: usize,
    cfg: &TrainConfig,
) -> Result<TrainTrace> {
    if iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    check_len("label count", data.n(), labels.len())?;

    if method.is_multiclass() {
        let one_hot = labels.one_hot();
        let obj = MulticlassObjective::new(data, &one_hot)?;
        let precond = Preconditioner::for_multiclass(data, labels.classes(), cfg.bound_epsilon)?;
        let runner = match method {
            Method::EnhancedNagMulti => Runner::Nag {
                state: NagState::new(obj.dim()),
                step: NagKind::Enhanced(precond),
            },
            _ => Runner::Adagrad {
                state: AdagradState::new(obj.dim()),
                step: AdagradKind::Enhanced(precond, EpsPlacement::InsideRoot),
            },
        };
        let (records, w) = run_loop(runner, &obj, iterations, cfg)?;
        let w = w
            .into_shape_with_order((labels.classes(), data.width()))
            .expect("flattened weights");
        return Ok(TrainTrace {
            records,
            weights: Weights::Multiclass(w),
        });
    }

    let binary = labels.binary()?;
    let obj = BinaryObjective::new(data, &binary, cfg.link.clone())?;
    let dim = obj.dim();
    let runner = match method {
        Method::Nag => Runner::Nag {
            state: NagState::new(dim),
            step: NagKind::Baseline(cfg.schedule),
        },
        Method::EnhancedNag => Runner::Nag {
            state: NagState::new(dim),
            step: NagKind::Enhanced(Preconditioner::for_binary(data, cfg.bound_epsilon)?),
        },
        Method::Adagrad => Runner::Adagrad {
            state: AdagradState::new(dim),
            step: AdagradKind::Baseline,
        },
        Method::EnhancedAdagrad => Runner::Adagrad {
            state: AdagradState::new(dim),
            step: AdagradKind::Enhanced(
                Preconditioner::for_binary(data, cfg.bound_epsilon)?,
                EpsPlacement::Outside,
            ),
        },
        _ => unreachable!("multiclass handled above"),
    };
    let (records, w) = run_loop(runner, &obj, iterations, cfg)?;
    Ok(TrainTrace {
        records,
        weights: Weights::Binary(w),
    })
}
