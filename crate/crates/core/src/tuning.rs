//! K-fold cross-validation of per-flow tuning weights.
//!
//! `tune_lambda` runs coordinate descent over flows: each sweep scans the
//! grid for one flow while the others stay fixed, keeping the value with the
//! smallest cross-validated deviance. Ties go to the larger `λ`.
//!
//! With [`SelectionRule::OneStandardError`] the scan instead keeps the largest
//! `λ` whose deviance is within one standard error (across folds) of the scan
//! minimum.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Dataset, FlowKind, ModelSpec};
use crate::objective::{nll_eval, ObjectiveConfig};
use crate::optimizer::{fit, FitResult, OptimOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionRule {
    /// Smallest mean deviance.
    #[default]
    Minimum,
    /// Largest `λ` within one standard error of the minimum.
    OneStandardError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    /// Strictly increasing, positive.
    pub lambda_grid: Vec<f64>,
    pub seed: u64,
    pub max_sweeps: usize,
    pub rule: SelectionRule,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            lambda_grid: log_grid(1e-4, 1e2, 20),
            seed: 0,
            max_sweeps: 3,
            rule: SelectionRule::Minimum,
        }
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

impl CvConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if self.folds < 2 || self.folds > n {
            return Err(Error::Argument(format!(
                "need 2 <= folds <= n, got folds = {} with n = {n}",
                self.folds
            )));
        }
        if self.lambda_grid.is_empty()
            || self.lambda_grid[0] <= 0.0
            || self.lambda_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Argument(
                "lambda grid must be positive and strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CvPoint {
    /// Flow being scanned when this point was evaluated.
    pub flow: FlowKind,
    pub lambda: f64,
    pub lambdas: BTreeMap<FlowKind, f64>,
    /// Mean held-out NLL.
    pub deviance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best_lambdas: BTreeMap<FlowKind, f64>,
    pub best_deviance: f64,
    pub cv_curve: Vec<CvPoint>,
    pub fold_assignments: Vec<usize>,
    pub sweeps: usize,
}

/// Shuffled fold labels in `0..folds`; sizes differ by at most one.
pub fn kfold_split(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 || folds > n {
        return Err(Error::Argument(format!(
            "need 2 <= folds <= n, got folds = {folds} with n = {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % folds;
    }
    Ok(assignment)
}

/// `config` with the tuning weight of each listed flow replaced.
pub fn with_lambdas(config: &ObjectiveConfig, lambdas: &BTreeMap<FlowKind, f64>) -> ObjectiveConfig {
    let mut out = config.clone();
    for (kind, &lambda) in lambdas {
        if let Some(spec) = out.penalties.get_mut(kind) {
            spec.lambda = lambda;
        }
    }
    out
}

/// Mean held-out NLL over the folds of `assignment`.
pub fn cv_deviance_with_folds(
    data: &Dataset,
    template: &ModelSpec,
    config: &ObjectiveConfig,
    options: &OptimOptions,
    assignment: &[usize],
    folds: usize,
) -> Result<f64> {
    let per_fold = fold_deviances(data, template, config, options, assignment, folds)?;
    // ordered reduction keeps the result independent of scheduling
    Ok(per_fold.iter().sum::<f64>() / folds as f64)
}

/// Held-out NLL of each fold, in fold order.
pub fn fold_deviances(
    data: &Dataset,
    template: &ModelSpec,
    config: &ObjectiveConfig,
    options: &OptimOptions,
    assignment: &[usize],
    folds: usize,
) -> Result<Vec<f64>> {
    let per_fold: Vec<Result<f64>> = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..data.n()).partition(|&i| assignment[i] == fold);
            let fitted = fit(&data.subset(&train), template, config, options).map_err(|e| Error::Tuning {
                fold,
                source: Box::new(e),
            })?;
            Ok(nll_eval(&fitted.model, &data.subset(&test), config.clamp_epsilon).value)
        })
        .collect();
    per_fold.into_iter().collect()
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Cross-validated deviance (mean held-out NLL) with the given per-flow `λ`.
pub fn cv_deviance(
    data: &Dataset,
    template: &ModelSpec,
    config: &ObjectiveConfig,
    options: &OptimOptions,
    lambdas: &BTreeMap<FlowKind, f64>,
    cv: &CvConfig,
) -> Result<f64> {
    cv.validate(data.n())?;
    let assignment = kfold_split(data.n(), cv.folds, cv.seed)?;
    cv_deviance_with_folds(data, template, &with_lambdas(config, lambdas), options, &assignment, cv.folds)
}

/// Coordinate descent over the per-flow `λ` of `penalized_flows`.
///
/// Every flow starts at the middle of the grid. The penalty kinds come from
/// `config`; only their `λ` are tuned.
pub fn tune_lambda(
    data: &Dataset,
    template: &ModelSpec,
    config: &ObjectiveConfig,
    options: &OptimOptions,
    cv: &CvConfig,
    penalized_flows: &BTreeSet<FlowKind>,
) -> Result<CvResult> {
    cv.validate(data.n())?;
    if penalized_flows.is_empty() {
        return Err(Error::Argument("no flows to tune".into()));
    }
    let flows: Vec<FlowKind> = FlowKind::CANONICAL
        .into_iter()
        .filter(|k| penalized_flows.contains(k))
        .collect();
    for &kind in &flows {
        if config.penalty(kind).is_none() {
            return Err(Error::Config(format!("flow {kind} is tuned but has no penalty")));
        }
        if template.flow(kind).is_none() {
            return Err(Error::Config(format!("flow {kind} is tuned but absent from the model")));
        }
    }

    let assignment = kfold_split(data.n(), cv.folds, cv.seed)?;
    let grid = &cv.lambda_grid;
    let mut index: Vec<usize> = vec![grid.len() / 2; flows.len()];
    let mut memo: HashMap<Vec<usize>, (f64, f64)> = HashMap::new();
    let mut curve = Vec::new();
    let lambdas_at = |index: &[usize]| -> BTreeMap<FlowKind, f64> {
        flows.iter().zip(index).map(|(&k, &i)| (k, grid[i])).collect()
    };

    let mut best_deviance = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < cv.max_sweeps {
        sweeps += 1;
        let mut changed = false;
        for slot in 0..flows.len() {
            let mut scores = Vec::with_capacity(grid.len());
            for g in 0..grid.len() {
                let mut probe = index.clone();
                probe[slot] = g;
                let lambdas = lambdas_at(&probe);
                let (deviance, se) = match memo.get(&probe) {
                    Some(&d) => d,
                    None => {
                        let per_fold = fold_deviances(
                            data,
                            template,
                            &with_lambdas(config, &lambdas),
                            options,
                            &assignment,
                            cv.folds,
                        )?;
                        let d = mean_and_se(&per_fold);
                        memo.insert(probe.clone(), d);
                        d
                    }
                };
                curve.push(CvPoint {
                    flow: flows[slot],
                    lambda: grid[g],
                    lambdas,
                    deviance,
                });
                scores.push((deviance, se));
            }
            let best = (0..grid.len())
                .min_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0))
                .expect("grid is non-empty");
            let min = scores[best].0;
            let slack = match cv.rule {
                SelectionRule::Minimum => 0.0,
                SelectionRule::OneStandardError => scores[best].1,
            };
            let tie = slack + 1e-12 * min.abs().max(1e-300);
            let chosen = (0..grid.len())
                .rev()
                .find(|&g| scores[g].0 <= min + tie)
                .unwrap_or(index[slot]);
            if chosen != index[slot] {
                changed = true;
                index[slot] = chosen;
            }
            best_deviance = scores[chosen].0;
        }
        if !changed {
            break;
        }
    }

    Ok(CvResult {
        best_lambdas: lambdas_at(&index),
        best_deviance,
        cv_curve: curve,
        fold_assignments: assignment,
        sweeps,
    })
}

/// Adaptive-lasso weights `1 / max(|β̃|, floor)^exponent` for each flow's coefficients.
pub fn adaptive_weights(initial: &FitResult, exponent: f64, floor: f64) -> Result<BTreeMap<FlowKind, Vec<f64>>> {
    if !(exponent > 0.0) || !(floor > 0.0) {
        return Err(Error::Argument(format!(
            "adaptive weights need exponent > 0 and floor > 0, got {exponent} and {floor}"
        )));
    }
    Ok(initial
        .model
        .flows
        .iter()
        .map(|flow| {
            let w = flow
                .coefficients
                .iter()
                .map(|b| b.abs().max(floor).powf(-exponent))
                .collect();
            (flow.kind, w)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FlowSpec;

    fn fake_fit(coefs: Vec<f64>) -> FitResult {
        let flow = FlowSpec::new(FlowKind::ScRisk1, false, (0..coefs.len()).collect()).with_coefficients(coefs);
        let model = ModelSpec::new(0.5, vec![flow]).unwrap();
        FitResult {
            initial_params: vec![0.0; model.n_params()],
            model,
            objective_trace: vec![1.0],
            converged: true,
            iterations: 1,
            clamp_count: 0,
            final_step: 1.0,
            min_step: 1.0,
            line_search_failed: false,
            strongly_convex: false,
        }
    }

    #[test]
    fn adaptive_weight_examples() {
        let w = adaptive_weights(&fake_fit(vec![1.0, 0.5, 0.0]), 1.0, 1e-4).unwrap();
        let w = &w[&FlowKind::ScRisk1];
        assert_eq!(w[0], 1.0);
        assert_eq!(w[1], 2.0);
        assert!((w[2] - 1e4).abs() < 1e-8);
    }

    #[test]
    fn adaptive_weights_reject_bad_exponent() {
        assert!(adaptive_weights(&fake_fit(vec![1.0]), 0.0, 1e-4).is_err());
    }

    #[test]
    fn kfold_examples() {
        let a = kfold_split(10, 5, 3).unwrap();
        for f in 0..5 {
            assert_eq!(a.iter().filter(|&&v| v == f).count(), 2);
        }
        assert_eq!(a, kfold_split(10, 5, 3).unwrap());

        let b = kfold_split(7, 5, 11).unwrap();
        let mut sizes: Vec<usize> = (0..5).map(|f| b.iter().filter(|&&v| v == f).count()).collect();
        sizes.sort_unstable_by(|x, y| y.cmp(x));
        assert_eq!(sizes, vec![2, 2, 1, 1, 1]);
    }

    #[test]
    fn kfold_rejects_too_many_folds() {
        assert!(matches!(kfold_split(3, 4, 0), Err(Error::Argument(_))));
        assert!(kfold_split(3, 1, 0).is_err());
    }

    #[test]
    fn default_grid_shape() {
        let g = CvConfig::default().lambda_grid;
        assert_eq!(g.len(), 20);
        assert!((g[0] - 1e-4).abs() < 1e-16);
        assert!((g[19] - 1e2).abs() < 1e-10);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
