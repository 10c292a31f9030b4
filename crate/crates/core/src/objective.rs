//! Penalized negative log-likelihood of the composed model.
//!
//! The smooth part is the mean Bernoulli negative log-likelihood with the
//! composed probability clamped to `[ε, 1-ε]`; inside the clamp the gradient
//! is zero. The non-smooth part is a sum of per-flow penalties `λ_k ψ_k`,
//! each with a closed-form proximal map.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Dataset, FlowKind, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyKind {
    None,
    L1,
    L2,
    ElasticNet,
    AdaptiveL1,
}

impl PenaltyKind {
    pub fn parse(s: &str) -> Option<PenaltyKind> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Some(PenaltyKind::None),
            "l1" | "lasso" => Some(PenaltyKind::L1),
            "l2" | "ridge" => Some(PenaltyKind::L2),
            "elasticnet" | "elastic-net" | "enet" => Some(PenaltyKind::ElasticNet),
            "adaptive" | "adaptivel1" | "adaptive-lasso" => Some(PenaltyKind::AdaptiveL1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub lambda: f64,
    /// L1 share of the elastic net; ignored by the other kinds.
    pub alpha: f64,
    /// Per-coefficient weights, only for `AdaptiveL1`.
    pub weights: Option<Vec<f64>>,
}

impl PenaltySpec {
    pub fn none() -> Self {
        PenaltySpec {
            kind: PenaltyKind::None,
            lambda: 0.0,
            alpha: 1.0,
            weights: None,
        }
    }

    pub fn lasso(lambda: f64) -> Self {
        PenaltySpec {
            kind: PenaltyKind::L1,
            lambda,
            ..PenaltySpec::none()
        }
    }

    pub fn ridge(lambda: f64) -> Self {
        PenaltySpec {
            kind: PenaltyKind::L2,
            lambda,
            ..PenaltySpec::none()
        }
    }

    pub fn elastic_net(lambda: f64, alpha: f64) -> Self {
        PenaltySpec {
            kind: PenaltyKind::ElasticNet,
            lambda,
            alpha,
            weights: None,
        }
    }

    pub fn adaptive(lambda: f64, weights: Vec<f64>) -> Self {
        PenaltySpec {
            kind: PenaltyKind::AdaptiveL1,
            lambda,
            alpha: 1.0,
            weights: Some(weights),
        }
    }

    /// Same penalty with a different tuning weight.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        PenaltySpec {
            lambda,
            ..self.clone()
        }
    }

    fn validate(&self, flow: FlowKind) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!(
                "flow {flow}: lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if self.kind == PenaltyKind::ElasticNet && !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "flow {flow}: elastic-net alpha must be in [0, 1], got {}",
                self.alpha
            )));
        }
        match (&self.weights, self.kind) {
            (None, PenaltyKind::AdaptiveL1) => Err(Error::Config(format!(
                "flow {flow}: adaptive L1 penalty requires weights"
            ))),
            (Some(_), k) if k != PenaltyKind::AdaptiveL1 => Err(Error::Config(format!(
                "flow {flow}: weights given for a {k:?} penalty"
            ))),
            (Some(w), _) if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) => Err(
                Error::Config(format!("flow {flow}: adaptive weights must be finite and >= 0")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveConfig {
    pub clamp_epsilon: f64,
    /// Flows without an entry are unpenalized.
    pub penalties: BTreeMap<FlowKind, PenaltySpec>,
    pub penalize_intercepts: bool,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig {
            clamp_epsilon: 1e-9,
            penalties: BTreeMap::new(),
            penalize_intercepts: false,
        }
    }
}

impl ObjectiveConfig {
    /// The same penalty on every listed flow.
    pub fn uniform(flows: &[FlowKind], penalty: PenaltySpec) -> Self {
        ObjectiveConfig {
            penalties: flows.iter().map(|&k| (k, penalty.clone())).collect(),
            ..ObjectiveConfig::default()
        }
    }

    pub fn with_penalty(mut self, flow: FlowKind, penalty: PenaltySpec) -> Self {
        self.penalties.insert(flow, penalty);
        self
    }

    pub fn penalty(&self, flow: FlowKind) -> Option<&PenaltySpec> {
        self.penalties
            .get(&flow)
            .filter(|p| p.kind != PenaltyKind::None)
    }

    /// Checks the config and its conformity with `model`.
    pub fn validate(&self, model: &ModelSpec) -> Result<()> {
        if !(self.clamp_epsilon > 0.0 && self.clamp_epsilon < 1e-3) {
            return Err(Error::Config(format!(
                "clamp epsilon must be in (0, 1e-3), got {}",
                self.clamp_epsilon
            )));
        }
        for (&kind, spec) in &self.penalties {
            spec.validate(kind)?;
            if let (Some(w), Some(flow)) = (&spec.weights, model.flow(kind)) {
                if w.len() != flow.coefficients.len() {
                    return Err(Error::Config(format!(
                        "flow {kind}: {} adaptive weights for {} coefficients",
                        w.len(),
                        flow.coefficients.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `ψ(β)` for one coefficient vector (without `λ`).
pub fn penalty_term(kind: PenaltyKind, beta: &[f64], alpha: f64, weights: Option<&[f64]>) -> f64 {
    let l1 = || beta.iter().map(|b| b.abs()).sum::<f64>();
    let l2 = || beta.iter().map(|b| b * b).sum::<f64>();
    match kind {
        PenaltyKind::None => 0.0,
        PenaltyKind::L1 => l1(),
        PenaltyKind::L2 => l2(),
        PenaltyKind::ElasticNet => alpha * l1() + (1.0 - alpha) * l2(),
        PenaltyKind::AdaptiveL1 => {
            let w = weights.expect("adaptive L1 without weights");
            beta.iter().zip(w).map(|(b, w)| w * b.abs()).sum()
        }
    }
}

/// Soft threshold `sign(z) max(|z| - t, 0)`.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Proximal map of `gamma * ψ` evaluated at `z`.
pub fn prox(
    kind: PenaltyKind,
    z: &[f64],
    gamma: f64,
    alpha: f64,
    weights: Option<&[f64]>,
) -> Result<Vec<f64>> {
    if !(gamma >= 0.0) {
        return Err(Error::Argument(format!("prox step must be >= 0, got {gamma}")));
    }
    if kind == PenaltyKind::AdaptiveL1 {
        match weights {
            None => return Err(Error::Argument("adaptive prox requires weights".into())),
            Some(w) if w.len() != z.len() => {
                return Err(Error::Argument(format!(
                    "{} weights for {} coordinates",
                    w.len(),
                    z.len()
                )))
            }
            _ => {}
        }
    }
    let mut out = z.to_vec();
    prox_in_place(kind, &mut out, gamma, alpha, weights);
    Ok(out)
}

#[inline]
fn prox_in_place(kind: PenaltyKind, z: &mut [f64], gamma: f64, alpha: f64, weights: Option<&[f64]>) {
    match kind {
        PenaltyKind::None => {}
        PenaltyKind::L1 => z.iter_mut().for_each(|v| *v = soft_threshold(*v, gamma)),
        PenaltyKind::L2 => {
            let s = 1.0 + 2.0 * gamma;
            z.iter_mut().for_each(|v| *v /= s);
        }
        PenaltyKind::ElasticNet => {
            let s = 1.0 + 2.0 * gamma * (1.0 - alpha);
            z.iter_mut()
                .for_each(|v| *v = soft_threshold(*v, gamma * alpha) / s);
        }
        PenaltyKind::AdaptiveL1 => {
            let w = weights.expect("adaptive L1 without weights");
            z.iter_mut()
                .zip(w)
                .for_each(|(v, w)| *v = soft_threshold(*v, gamma * w));
        }
    }
}

/// Applies the block prox of `step * g` to a flat parameter vector in place.
/// A penalized intercept is shrunk like a unit-weight coefficient.
pub(crate) fn prox_params(model: &ModelSpec, config: &ObjectiveConfig, params: &mut [f64], step: f64) {
    let mut at = 0;
    for flow in &model.flows {
        let len = flow.n_params();
        if let Some(spec) = config.penalty(flow.kind) {
            let block = &mut params[at..at + len];
            let gamma = step * spec.lambda;
            let start = usize::from(flow.has_intercept);
            if flow.has_intercept && config.penalize_intercepts {
                let unit = spec.weights.as_ref().map(|_| &[1.0][..]);
                prox_in_place(spec.kind, &mut block[..1], gamma, spec.alpha, unit);
            }
            prox_in_place(spec.kind, &mut block[start..], gamma, spec.alpha, spec.weights.as_deref());
        }
        at += len;
    }
}

/// `Σ_k λ_k ψ_k(β_k)`; intercepts are excluded unless `penalize_intercepts`.
pub fn penalty_value(model: &ModelSpec, config: &ObjectiveConfig) -> Result<f64> {
    config.validate(model)?;
    Ok(penalty_sum(model, config))
}

/// [`penalty_value`] for a config already validated against `model`.
pub(crate) fn penalty_sum(model: &ModelSpec, config: &ObjectiveConfig) -> f64 {
    let mut total = 0.0;
    for flow in &model.flows {
        let Some(spec) = config.penalty(flow.kind) else {
            continue;
        };
        let mut value = penalty_term(spec.kind, &flow.coefficients, spec.alpha, spec.weights.as_deref());
        if flow.has_intercept && config.penalize_intercepts {
            let b0 = [flow.intercept];
            let weights = spec.weights.as_ref().map(|_| &[1.0][..]);
            value += penalty_term(spec.kind, &b0, spec.alpha, weights);
        }
        total += spec.lambda * value;
    }
    total
}

/// Smooth-part evaluation shared by the optimizer.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SmoothEval {
    pub value: f64,
    pub clamped: usize,
}

#[inline]
fn bernoulli_nll(y: u8, p: f64) -> f64 {
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

pub(crate) fn nll_eval(model: &ModelSpec, data: &Dataset, eps: f64) -> SmoothEval {
    let mut sum = 0.0;
    let mut clamped = 0;
    for (i, &y) in data.y().iter().enumerate() {
        let p = model.compose_unchecked(data.row_slice(i));
        let pc = if p < eps {
            clamped += 1;
            eps
        } else if p > 1.0 - eps {
            clamped += 1;
            1.0 - eps
        } else if p.is_nan() {
            // treat NaN like a saturated prediction on the wrong side
            clamped += 1;
            if y == 1 {
                eps
            } else {
                1.0 - eps
            }
        } else {
            p
        };
        sum += bernoulli_nll(y, pc);
    }
    SmoothEval {
        value: sum / data.n() as f64,
        clamped,
    }
}

/// NLL and its gradient in one pass; `grad` is overwritten.
pub(crate) fn nll_and_gradient(model: &ModelSpec, data: &Dataset, eps: f64, grad: &mut [f64]) -> SmoothEval {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let offsets = model.block_offsets();
    let mut sens = [0.0f64; 3];
    let mut sum = 0.0;
    let mut clamped = 0;
    for (i, &y) in data.y().iter().enumerate() {
        let x = data.row_slice(i);
        let p = model.compose_with_sensitivities(x, &mut sens);
        if !(p >= eps && p <= 1.0 - eps) {
            clamped += 1;
            let pc = if p < eps || (p.is_nan() && y == 1) { eps } else { 1.0 - eps };
            sum += bernoulli_nll(y, pc);
            continue;
        }
        sum += bernoulli_nll(y, p);
        let dnll_dp = if y == 1 { -1.0 / p } else { 1.0 / (1.0 - p) };
        for (k, flow) in model.flows.iter().enumerate() {
            let g = dnll_dp * sens[k];
            let mut at = offsets[k];
            if flow.has_intercept {
                grad[at] += g;
                at += 1;
            }
            for (slot, &j) in grad[at..at + flow.covariate_indices.len()]
                .iter_mut()
                .zip(&flow.covariate_indices)
            {
                *slot += g * x[j];
            }
        }
    }
    let n = data.n() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    SmoothEval {
        value: sum / n,
        clamped,
    }
}

/// Mean negative log-likelihood with clamped probabilities.
pub fn nll(model: &ModelSpec, data: &Dataset, config: &ObjectiveConfig) -> Result<f64> {
    model.check_columns(data.d())?;
    Ok(nll_eval(model, data, config.clamp_epsilon).value)
}

/// Analytic gradient of [`nll`], laid out like [`ModelSpec::params`].
pub fn nll_gradient(model: &ModelSpec, data: &Dataset, config: &ObjectiveConfig) -> Result<Vec<f64>> {
    model.check_columns(data.d())?;
    let mut grad = vec![0.0; model.n_params()];
    nll_and_gradient(model, data, config.clamp_epsilon, &mut grad);
    Ok(grad)
}

/// Number of observations whose composed probability falls outside `[ε, 1-ε]`.
pub fn clamp_count(model: &ModelSpec, data: &Dataset, config: &ObjectiveConfig) -> Result<usize> {
    model.check_columns(data.d())?;
    Ok(nll_eval(model, data, config.clamp_epsilon).clamped)
}

/// `nll + penalty_value`.
pub fn objective_total(model: &ModelSpec, data: &Dataset, config: &ObjectiveConfig) -> Result<f64> {
    Ok(nll(model, data, config)? + penalty_value(model, config)?)
}
