//! Proximal gradient descent with backtracking.
//!
//! Each iteration takes a gradient step on the mean NLL and applies the
//! block-separable prox of the penalty, one flow at a time:
//!
//! ```text
//! β⁺ = prox_{η g}(β - η ∇f(β))
//! ```
//!
//! The step `η` starts at `min(init_step, 2 η_prev)` and is multiplied by
//! `shrink` until `F(β⁺) ≤ F(β) - c/(2η) ‖β⁺ - β‖²`. Every accepted iterate
//! therefore decreases `F`.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::model::{Dataset, ModelSpec};
use crate::objective::{nll_and_gradient, nll_eval, penalty_sum, prox_params, ObjectiveConfig, PenaltyKind};

/// Steps below this are treated as a line-search failure.
const MIN_STEP: f64 = 1e-16;

static FITS: AtomicUsize = AtomicUsize::new(0);
static ASCENTS: AtomicUsize = AtomicUsize::new(0);

/// Process-wide count of completed fits and of accepted iterates that raised
/// the objective by more than 1e-12.
pub fn descent_audit() -> (usize, usize) {
    (FITS.load(Ordering::Relaxed), ASCENTS.load(Ordering::Relaxed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimOptions {
    pub max_iters: usize,
    /// Relative objective change that declares convergence.
    pub tol: f64,
    pub init_step: f64,
    pub shrink: f64,
    pub sufficient_decrease_c: f64,
    /// Starting parameters in [`ModelSpec::params`] layout; zeros when absent.
    pub init_coefficients: Option<Vec<f64>>,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions {
            max_iters: 500,
            tol: 1e-8,
            init_step: 1.0,
            shrink: 0.5,
            sufficient_decrease_c: 0.5,
            init_coefficients: None,
        }
    }
}

impl OptimOptions {
    pub fn with_init(mut self, params: Vec<f64>) -> Self {
        self.init_coefficients = Some(params);
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Argument(format!("optimizer option {what} out of range")));
        if self.max_iters == 0 {
            return bad("max_iters");
        }
        if !(self.tol > 0.0) {
            return bad("tol");
        }
        if !(self.init_step > 0.0) || !self.init_step.is_finite() {
            return bad("init_step");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink");
        }
        if !(self.sufficient_decrease_c > 0.0 && self.sufficient_decrease_c < 1.0) {
            return bad("sufficient_decrease_c");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Template with the fitted coefficients.
    pub model: ModelSpec,
    /// `F` at the starting point followed by one entry per accepted iterate.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Observations clamped at the final iterate.
    pub clamp_count: usize,
    pub final_step: f64,
    /// Smallest accepted step over the run.
    pub min_step: f64,
    pub line_search_failed: bool,
    pub initial_params: Vec<f64>,
    /// Every flow carries a strictly convex penalty with `λ > 0`.
    pub strongly_convex: bool,
}

impl FitResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace is never empty")
    }

    pub fn params(&self) -> Vec<f64> {
        self.model.params()
    }
}

fn strongly_convex(model: &ModelSpec, config: &ObjectiveConfig) -> bool {
    model.flows.iter().all(|flow| {
        config.penalty(flow.kind).is_some_and(|p| {
            p.lambda > 0.0
                && match p.kind {
                    PenaltyKind::L2 => true,
                    PenaltyKind::ElasticNet => p.alpha < 1.0,
                    _ => false,
                }
        })
    })
}

/// Minimizes `nll + penalty` starting from `options.init_coefficients` (or zeros).
pub fn fit(data: &Dataset, template: &ModelSpec, config: &ObjectiveConfig, options: &OptimOptions) -> Result<FitResult> {
    template.validate()?;
    template.check_columns(data.d())?;
    config.validate(template)?;
    options.validate()?;

    let n_params = template.n_params();
    let mut params = match &options.init_coefficients {
        Some(init) if init.len() != n_params => {
            return Err(Error::Argument(format!(
                "{} initial coefficients for {n_params} parameters",
                init.len()
            )))
        }
        Some(init) => init.clone(),
        None => vec![0.0; n_params],
    };
    if params.iter().any(|b| !b.is_finite()) {
        return Err(Error::Initialization("non-finite starting coefficients".into()));
    }
    let eps = config.clamp_epsilon;
    let c = options.sufficient_decrease_c;

    let mut model = template.with_params(&params);
    let mut work = model.clone();
    let mut grad = vec![0.0; n_params];
    let mut current = nll_and_gradient(&model, data, eps, &mut grad).value + penalty_sum(&model, config);
    if !current.is_finite() {
        return Err(Error::Initialization(format!("objective at the starting point is {current}")));
    }

    let initial_params = params.clone();
    let mut trace = vec![current];
    let mut candidate = vec![0.0; n_params];
    let mut step = options.init_step;
    let mut min_step = f64::INFINITY;
    let mut converged = false;
    let mut line_search_failed = false;
    let mut iterations = 0;

    while iterations < options.max_iters {
        step = options.init_step.min(2.0 * step);
        let next = loop {
            for ((cand, &b), &g) in candidate.iter_mut().zip(&params).zip(&grad) {
                *cand = b - step * g;
            }
            prox_params(&model, config, &mut candidate, step);
            work.set_params(&candidate);
            let value = nll_eval(&work, data, eps).value + penalty_sum(&work, config);
            let moved: f64 = candidate.iter().zip(&params).map(|(a, b)| (a - b) * (a - b)).sum();
            if value.is_finite() && value <= current - c / (2.0 * step) * moved {
                break Some(value);
            }
            step *= options.shrink;
            if step < MIN_STEP {
                break None;
            }
        };
        let Some(value) = next else {
            line_search_failed = true;
            break;
        };

        iterations += 1;
        min_step = min_step.min(step);
        std::mem::swap(&mut params, &mut candidate);
        std::mem::swap(&mut model, &mut work);
        let change = (current - value).abs() / current.abs().max(1.0);
        current = value;
        trace.push(current);
        if change < options.tol {
            converged = true;
            break;
        }
        nll_and_gradient(&model, data, eps, &mut grad);
    }

    let clamp_count = nll_eval(&model, data, eps).clamped;
    let ascents = trace.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
    FITS.fetch_add(1, Ordering::Relaxed);
    ASCENTS.fetch_add(ascents, Ordering::Relaxed);
    Ok(FitResult {
        strongly_convex: strongly_convex(&model, config),
        model,
        objective_trace: trace,
        converged,
        iterations,
        clamp_count,
        final_step: step,
        min_step: if min_step.is_finite() { min_step } else { step },
        line_search_failed,
        initial_params,
    })
}

/// Rate diagnostics computed from an objective trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `t (F_t - F_final)` for every trace index `t`.
    pub scaled_gaps: Vec<f64>,
    pub scaled_gap_max: f64,
    /// Sublinear-rate constant `‖β_0 - β_final‖² / (2 η_min)`.
    pub sublinear_bound: f64,
    pub sublinear_ok: bool,
    /// Least-squares slope of `log(F_t - F_final + 1e-15)` against `t`;
    /// only computed for strongly convex configurations.
    pub log_gap_slope: Option<f64>,
    /// Whether no accepted iterate increased the objective beyond 1e-12.
    pub monotone: bool,
}

impl ConvergenceReport {
    pub fn linear_rate_ok(&self) -> Option<bool> {
        self.log_gap_slope.map(|s| s < 0.0)
    }
}

/// Checks the `O(1/t)` and, when applicable, the linear-rate behaviour of a fit.
pub fn convergence_report(result: &FitResult) -> Result<ConvergenceReport> {
    if result.iterations < 10 {
        return Err(Error::DiagnosticUnavailable(format!(
            "need at least 10 iterations, fit ran {}",
            result.iterations
        )));
    }
    let trace = &result.objective_trace;
    let last = result.objective();
    let gaps: Vec<f64> = trace.iter().map(|f| (f - last).max(0.0)).collect();
    let scaled_gaps: Vec<f64> = gaps.iter().enumerate().map(|(t, g)| t as f64 * g).collect();
    let scaled_gap_max = scaled_gaps.iter().copied().fold(0.0, f64::max);

    let final_params = result.params();
    let dist2: f64 = result
        .initial_params
        .iter()
        .zip(&final_params)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let sublinear_bound = dist2 / (2.0 * result.min_step);

    let log_gap_slope = result.strongly_convex.then(|| {
        // the final entry has gap 0 by construction and carries no rate information
        let pts: Vec<(f64, f64)> = gaps[..gaps.len() - 1]
            .iter()
            .enumerate()
            .map(|(t, g)| (t as f64, (g + 1e-15).ln()))
            .collect();
        least_squares_slope(&pts)
    });

    let monotone = trace.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(ConvergenceReport {
        scaled_gaps,
        scaled_gap_max,
        sublinear_bound,
        sublinear_ok: scaled_gap_max <= sublinear_bound * (1.0 + 1e-9) + 1e-12,
        log_gap_slope,
        monotone,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FlowKind, FlowSpec};
    use crate::objective::{objective_total, PenaltySpec};
    use ndarray::Array2;

    fn toy(n: usize) -> Dataset {
        let x = Array2::from_shape_fn((n, 2), |(i, j)| ((i * 7 + j * 3) % 11) as f64 / 5.0 - 1.0);
        let y = (0..n).map(|i| u8::from((i * 5 + 1) % 3 == 0)).collect();
        Dataset::unnamed(x, y).unwrap()
    }

    fn assert_monotone(r: &FitResult) {
        for w in r.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "trace increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn constant_outcome_drives_probability_to_one() {
        let x = Array2::from_shape_fn((30, 1), |(i, _)| i as f64 / 10.0);
        let data = Dataset::unnamed(x, vec![1; 30]).unwrap();
        let template = ModelSpec::new(0.5, vec![FlowSpec::new(FlowKind::ScOdds, true, vec![])]).unwrap();
        let opts = OptimOptions {
            max_iters: 5000,
            ..OptimOptions::default()
        };
        let r = fit(&data, &template, &ObjectiveConfig::default(), &opts).unwrap();
        assert_monotone(&r);
        assert!(r.objective() < 1e-2, "{}", r.objective());
        assert!(r.model.flows[0].intercept > 4.0);
    }

    #[test]
    fn dominating_ridge_gives_intercept_only_fit() {
        let data = toy(60);
        let template = ModelSpec::canonical(&[0, 1], true);
        let cfg = ObjectiveConfig::uniform(&FlowKind::CANONICAL, PenaltySpec::ridge(1e6));
        let opts = OptimOptions {
            tol: 1e-14,
            max_iters: 5000,
            ..OptimOptions::default()
        };
        let r = fit(&data, &template, &cfg, &opts).unwrap();
        assert_monotone(&r);
        let p = r.params();
        assert!(p[1..].iter().all(|b| b.abs() < 1e-5), "{p:?}");
        let rate = data.y().iter().map(|&v| v as f64).sum::<f64>() / 60.0;
        assert!((p[0] - (rate / (1.0 - rate)).ln()).abs() < 1e-4);
    }

    #[test]
    fn zero_penalty_never_worse_than_start() {
        let data = toy(40);
        let template = ModelSpec::canonical(&[0, 1], true);
        let cfg = ObjectiveConfig::default();
        let r = fit(&data, &template, &cfg, &OptimOptions::default()).unwrap();
        assert_monotone(&r);
        assert!(r.objective() <= objective_total(&template, &data, &cfg).unwrap());
    }

    #[test]
    fn non_finite_start_is_an_initialization_error() {
        let data = toy(10);
        let template = ModelSpec::canonical(&[0, 1], true);
        let mut init = vec![0.0; template.n_params()];
        init[0] = f64::NAN;
        let opts = OptimOptions::default().with_init(init);
        let err = fit(&data, &template, &ObjectiveConfig::default(), &opts).unwrap_err();
        assert!(matches!(err, Error::Initialization(_)), "{err:?}");
    }

    #[test]
    fn wrong_init_length_is_rejected() {
        let data = toy(10);
        let template = ModelSpec::canonical(&[0], true);
        let opts = OptimOptions::default().with_init(vec![0.0; 2]);
        assert!(fit(&data, &template, &ObjectiveConfig::default(), &opts).is_err());
    }

    #[test]
    fn report_needs_ten_iterations() {
        let data = toy(20);
        let template = ModelSpec::canonical(&[0, 1], true);
        let opts = OptimOptions {
            max_iters: 5,
            ..OptimOptions::default()
        };
        let r = fit(&data, &template, &ObjectiveConfig::default(), &opts).unwrap();
        assert!(!r.converged);
        assert!(matches!(convergence_report(&r), Err(Error::DiagnosticUnavailable(_))));
    }

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|t| (t as f64, 3.0 - 0.5 * t as f64)).collect();
        assert!((least_squares_slope(&pts) + 0.5).abs() < 1e-12);
    }
}
