//! Replicated simulation study under the canonical three-flow model.
//!
//! Data come from `Ber(1/2) · ScOdds(xᵀβ_odds) · ScRisk1(xᵀβ_risk1) · ScRisk0(0)`
//! with AR(1)-correlated Gaussian covariates. Only the first covariate enters
//! the risk flow (coefficient 0.5); the survival flow is redundant. Each method
//! fits the full three-flow model and is scored on coefficient recovery and on
//! recovering the sparsity pattern of the two risk flows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Dataset, FlowKind, ModelSpec};
use crate::objective::{ObjectiveConfig, PenaltySpec};
use crate::optimizer::{fit, FitResult, OptimOptions};
use crate::tuning::{adaptive_weights, cv_deviance, tune_lambda, CvConfig};

/// Sample sizes of the published design.
pub const CANONICAL_N: [usize; 3] = [100, 500, 1000];

/// Risk-flow coefficient of the first covariate in the truth.
pub const RISK1_SIGNAL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Unregularized,
    Lasso,
    Ridge,
    ElasticNet,
    AdaptiveLasso,
}

impl Method {
    /// Methods reported in the summary tables by default.
    pub const DEFAULT: [Method; 4] = [Method::Unregularized, Method::Lasso, Method::Ridge, Method::ElasticNet];
    pub const ALL: [Method; 5] = [
        Method::Unregularized,
        Method::Lasso,
        Method::Ridge,
        Method::ElasticNet,
        Method::AdaptiveLasso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Unregularized => "Unregularized",
            Method::Lasso => "Lasso",
            Method::Ridge => "Ridge",
            Method::ElasticNet => "ElasticNet",
            Method::AdaptiveLasso => "AdaptiveLasso",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "unregularized" | "unreg" | "mle" => Some(Method::Unregularized),
            "lasso" => Some(Method::Lasso),
            "ridge" => Some(Method::Ridge),
            "elasticnet" | "enet" => Some(Method::ElasticNet),
            "adaptivelasso" | "adaptive" => Some(Method::AdaptiveLasso),
            _ => None,
        }
    }

    pub fn is_penalized(self) -> bool {
        self != Method::Unregularized
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub n: usize,
    pub p: usize,
    /// AR(1) correlation between neighbouring covariates.
    pub rho: f64,
    /// Variance of the odds-flow linear predictor.
    pub snr: f64,
    pub replications: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    /// Tune `λ` on the first replication only and reuse it afterwards.
    pub freeze_lambda: bool,
    pub cv: CvConfig,
    pub options: OptimOptions,
    pub elastic_net_alpha: f64,
    pub adaptive_exponent: f64,
    /// Ridge weight of the warm-start fit, which also serves as the adaptive-lasso pilot.
    pub warm_ridge_lambda: f64,
    /// Selection threshold on `|β̂|`.
    pub threshold: f64,
}

impl ScenarioConfig {
    pub fn new(name: impl Into<String>, n: usize, p: usize, rho: f64, snr: f64) -> Self {
        ScenarioConfig {
            name: name.into(),
            n,
            p,
            rho,
            snr,
            replications: 30,
            base_seed: 1,
            methods: Method::DEFAULT.to_vec(),
            freeze_lambda: true,
            cv: CvConfig::default(),
            options: OptimOptions::default(),
            elastic_net_alpha: 0.5,
            adaptive_exponent: 1.0,
            warm_ridge_lambda: 0.01,
            threshold: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 20 {
            return Err(Error::Argument(format!("scenario {}: n = {} < 20", self.name, self.n)));
        }
        if self.p < 2 {
            return Err(Error::Argument(format!("scenario {}: p = {} < 2", self.name, self.p)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::Argument(format!("scenario {}: rho = {} not in [0, 1)", self.name, self.rho)));
        }
        if !(self.snr > 0.0) {
            return Err(Error::Argument(format!("scenario {}: snr must be positive", self.name)));
        }
        if self.replications == 0 || self.methods.is_empty() {
            return Err(Error::Argument(format!("scenario {}: nothing to run", self.name)));
        }
        Ok(())
    }

    /// Seed of replication `rep` (1-based).
    pub fn rep_seed(&self, rep: usize) -> u64 {
        self.base_seed.wrapping_mul(10_000).wrapping_add(rep as u64)
    }
}

/// The eight one-factor-at-a-time scenarios plus the worst case, at sample size `n`.
///
/// Scenario `i` (0-based) uses `base_seed = seed * 100 + i`.
pub fn preset_scenarios(n: usize, seed: u64) -> Vec<ScenarioConfig> {
    let specs: [(&str, usize, f64, f64); 8] = [
        ("reference", 10, 0.5, 1.0),
        ("p5", 5, 0.5, 1.0),
        ("p20", 20, 0.5, 1.0),
        ("rho0", 10, 0.0, 1.0),
        ("rho0.8", 10, 0.8, 1.0),
        ("snr0.5", 10, 0.5, 0.5),
        ("snr2", 10, 0.5, 2.0),
        ("worst", 20, 0.8, 0.5),
    ];
    specs
        .iter()
        .enumerate()
        .map(|(i, &(name, p, rho, snr))| {
            let mut cfg = ScenarioConfig::new(name, n, p, rho, snr);
            cfg.base_seed = seed.wrapping_mul(100).wrapping_add(i as u64);
            cfg
        })
        .collect()
}

pub fn is_canonical_n(n: usize) -> bool {
    CANONICAL_N.contains(&n)
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Gaussian design with `Cov(x_i, x_j) = ρ^|i-j|`, built row by row from
/// the AR(1) recursion `x_1 = z_1`, `x_j = ρ x_{j-1} + √(1-ρ²) z_j`.
pub fn gen_design(n: usize, p: usize, rho: f64, seed: u64) -> Array2<f64> {
    let mut rng = stream(seed, 1);
    let scale = (1.0 - rho * rho).sqrt();
    let mut x = Array2::zeros((n, p));
    for mut row in x.rows_mut() {
        let mut prev = 0.0;
        for j in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            prev = if j == 0 { z } else { rho * prev + scale * z };
            row[j] = prev;
        }
    }
    x
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthSpec {
    pub beta_odds: Vec<f64>,
    pub beta_risk1: Vec<f64>,
    pub beta_risk0: Vec<f64>,
}

impl TruthSpec {
    /// Concatenated covariate coefficients in canonical flow order.
    pub fn concatenated(&self) -> Vec<f64> {
        [&self.beta_odds[..], &self.beta_risk1, &self.beta_risk0].concat()
    }

    /// The data-generating model; no intercepts anywhere.
    pub fn model(&self) -> ModelSpec {
        let p = self.beta_odds.len();
        let idx: Vec<usize> = (0..p).collect();
        let mut m = ModelSpec::canonical(&idx, false);
        m.flows[0].coefficients = self.beta_odds.clone();
        m.flows[1].coefficients = self.beta_risk1.clone();
        m.flows[2].coefficients = self.beta_risk0.clone();
        m
    }
}

/// `βᵀ Σ β` with `Σ_ij = ρ^|i-j|`.
pub fn ar1_quadratic_form(beta: &[f64], rho: f64) -> f64 {
    let mut total = 0.0;
    for (i, bi) in beta.iter().enumerate() {
        for (j, bj) in beta.iter().enumerate() {
            total += bi * bj * rho.powi((i as i32 - j as i32).abs());
        }
    }
    total
}

/// Odds coefficients iid `N(0,1)` rescaled to `βᵀΣβ = snr`.
pub fn gen_truth(p: usize, rho: f64, snr: f64, seed: u64) -> TruthSpec {
    let mut rng = stream(seed, 2);
    let raw: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    let scale = (snr / ar1_quadratic_form(&raw, rho)).sqrt();
    let mut beta_risk1 = vec![0.0; p];
    beta_risk1[0] = RISK1_SIGNAL;
    TruthSpec {
        beta_odds: raw.iter().map(|b| b * scale).collect(),
        beta_risk1,
        beta_risk0: vec![0.0; p],
    }
}

/// Bernoulli draws from the clamped composed probability.
pub fn gen_response(x: &Array2<f64>, truth: &TruthSpec, seed: u64) -> Vec<u8> {
    let eps = ObjectiveConfig::default().clamp_epsilon;
    let model = truth.model();
    let mut rng = stream(seed, 3);
    x.rows()
        .into_iter()
        .map(|row| {
            let row = row.to_vec();
            let p = model.compose_unchecked(&row).clamp(eps, 1.0 - eps);
            u8::from(rng.random::<f64>() < p)
        })
        .collect()
}

/// Per-replication scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepMetrics {
    pub estimation_error: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub nonzero_count: f64,
}

/// Scores a fit of the canonical model against the truth.
pub fn compute_metrics(fit: &FitResult, truth: &TruthSpec, threshold: f64) -> RepMetrics {
    let coefs = |k: FlowKind| {
        fit.model
            .flow(k)
            .map(|f| f.coefficients.clone())
            .unwrap_or_else(|| vec![0.0; truth.beta_odds.len()])
    };
    let (odds, risk1, risk0) = (coefs(FlowKind::ScOdds), coefs(FlowKind::ScRisk1), coefs(FlowKind::ScRisk0));
    let estimate = [&odds[..], &risk1, &risk0].concat();
    let estimation_error = estimate
        .iter()
        .zip(truth.concatenated())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();

    let selected = |b: &f64| b.abs() > threshold;
    let tpr = if selected(&risk1[0]) { 1.0 } else { 0.0 };
    let false_pos = risk1[1..].iter().chain(&risk0).filter(|b| selected(b)).count();
    let zeros = risk1.len() - 1 + risk0.len();
    let nonzero = risk1.iter().chain(&risk0).filter(|b| selected(b)).count();
    RepMetrics {
        estimation_error,
        tpr,
        fpr: false_pos as f64 / zeros as f64,
        nonzero_count: nonzero as f64,
    }
}

/// One method on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RepRecord {
    pub scenario: String,
    pub method: Method,
    pub rep: usize,
    pub metrics: RepMetrics,
    /// Mean held-out NLL from K-fold CV on the replication's sample.
    pub deviance: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSummary {
    pub method: Method,
    pub estimation_error: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub deviance: f64,
    pub nonzero_count: f64,
    pub failed_reps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    /// Ordered by replication, then by method.
    pub records: Vec<RepRecord>,
    pub summaries: Vec<MetricsSummary>,
    pub tuned_lambdas: BTreeMap<Method, BTreeMap<FlowKind, f64>>,
}

struct RepData {
    data: Dataset,
    truth: TruthSpec,
    template: ModelSpec,
    /// Ridge fit used both as warm start and as adaptive-lasso pilot.
    warm: FitResult,
}

fn rep_data(cfg: &ScenarioConfig, rep: usize) -> Result<RepData> {
    let seed = cfg.rep_seed(rep);
    let x = gen_design(cfg.n, cfg.p, cfg.rho, seed);
    let truth = gen_truth(cfg.p, cfg.rho, cfg.snr, seed);
    let y = gen_response(&x, &truth, seed);
    let data = Dataset::unnamed(x, y)?;
    let idx: Vec<usize> = (0..cfg.p).collect();
    let template = ModelSpec::canonical(&idx, true);
    let ridge = ObjectiveConfig::uniform(&FlowKind::CANONICAL, PenaltySpec::ridge(cfg.warm_ridge_lambda));
    let warm = fit(&data, &template, &ridge, &cfg.options)?;
    Ok(RepData {
        data,
        truth,
        template,
        warm,
    })
}

/// Objective config of `method` with unit `λ`; adaptive weights come from `pilot`.
fn method_config(cfg: &ScenarioConfig, method: Method, pilot: &FitResult) -> Result<ObjectiveConfig> {
    let base = ObjectiveConfig::default();
    let spec = match method {
        Method::Unregularized => return Ok(base),
        Method::Lasso => PenaltySpec::lasso(1.0),
        Method::Ridge => PenaltySpec::ridge(1.0),
        Method::ElasticNet => PenaltySpec::elastic_net(1.0, cfg.elastic_net_alpha),
        Method::AdaptiveLasso => {
            let weights = adaptive_weights(pilot, cfg.adaptive_exponent, 1e-4)?;
            let mut out = base;
            for kind in FlowKind::CANONICAL {
                out.penalties.insert(kind, PenaltySpec::adaptive(1.0, weights[&kind].clone()));
            }
            return Ok(out);
        }
    };
    Ok(ObjectiveConfig::uniform(&FlowKind::CANONICAL, spec))
}

fn apply_lambdas(config: &mut ObjectiveConfig, lambdas: &BTreeMap<FlowKind, f64>) {
    for (kind, &lambda) in lambdas {
        if let Some(spec) = config.penalties.get_mut(kind) {
            spec.lambda = lambda;
        }
    }
}

/// Fits from zeros and from the ridge warm start; keeps the lower objective.
fn multi_start_fit(rd: &RepData, config: &ObjectiveConfig, options: &OptimOptions) -> Result<FitResult> {
    let cold = fit(&rd.data, &rd.template, config, options)?;
    let warm_opts = options.clone().with_init(rd.warm.params());
    let warm = fit(&rd.data, &rd.template, config, &warm_opts)?;
    Ok(if warm.objective() < cold.objective() { warm } else { cold })
}

fn tune_method(
    cfg: &ScenarioConfig,
    method: Method,
    rd: &RepData,
    seed: u64,
) -> Result<BTreeMap<FlowKind, f64>> {
    if !method.is_penalized() {
        return Ok(BTreeMap::new());
    }
    let config = method_config(cfg, method, &rd.warm)?;
    let cv = CvConfig { seed, ..cfg.cv.clone() };
    let flows: BTreeSet<FlowKind> = FlowKind::CANONICAL.into_iter().collect();
    Ok(tune_lambda(&rd.data, &rd.template, &config, &cfg.options, &cv, &flows)?.best_lambdas)
}

fn run_rep(
    cfg: &ScenarioConfig,
    rep: usize,
    rd: &RepData,
    tuned: &BTreeMap<Method, BTreeMap<FlowKind, f64>>,
) -> Result<Vec<RepRecord>> {
    let seed = cfg.rep_seed(rep);
    let mut out = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let lambdas = match tuned.get(&method) {
            Some(l) if cfg.freeze_lambda || rep == 1 => l.clone(),
            _ => tune_method(cfg, method, rd, seed)?,
        };
        let mut config = method_config(cfg, method, &rd.warm)?;
        apply_lambdas(&mut config, &lambdas);
        let fitted = multi_start_fit(rd, &config, &cfg.options)?;
        let cv = CvConfig { seed, ..cfg.cv.clone() };
        let deviance = cv_deviance(&rd.data, &rd.template, &config, &cfg.options, &lambdas, &cv)?;
        out.push(RepRecord {
            scenario: cfg.name.clone(),
            method,
            rep,
            metrics: compute_metrics(&fitted, &rd.truth, cfg.threshold),
            deviance,
            converged: fitted.converged,
        });
    }
    Ok(out)
}

/// Means over converged replications, per method.
pub fn summarize(cfg: &ScenarioConfig, records: &[RepRecord]) -> Result<Vec<MetricsSummary>> {
    cfg.methods
        .iter()
        .map(|&method| {
            let ok: Vec<&RepRecord> = records
                .iter()
                .filter(|r| r.method == method && r.converged)
                .collect();
            let total = records.iter().filter(|r| r.method == method).count();
            if ok.is_empty() {
                return Err(Error::Scenario {
                    scenario: cfg.name.clone(),
                    method: method.name().to_string(),
                });
            }
            let mean = |f: &dyn Fn(&RepRecord) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64;
            Ok(MetricsSummary {
                method,
                estimation_error: mean(&|r| r.metrics.estimation_error),
                tpr: mean(&|r| r.metrics.tpr),
                fpr: mean(&|r| r.metrics.fpr),
                deviance: mean(&|r| r.deviance),
                nonzero_count: mean(&|r| r.metrics.nonzero_count),
                failed_reps: total - ok.len(),
            })
        })
        .collect()
}

/// Runs every replication of a scenario.
///
/// Tuning happens on replication 1; replications 2.. run in parallel and are
/// reduced in replication order, so the output is bit-identical for a given
/// config regardless of thread count.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let first = rep_data(cfg, 1)?;
    let mut tuned = BTreeMap::new();
    for &method in &cfg.methods {
        tuned.insert(method, tune_method(cfg, method, &first, cfg.rep_seed(1))?);
    }
    let mut records = run_rep(cfg, 1, &first, &tuned)?;
    drop(first);

    let rest: Vec<Result<Vec<RepRecord>>> = (2..=cfg.replications)
        .into_par_iter()
        .map(|rep| run_rep(cfg, rep, &rep_data(cfg, rep)?, &tuned))
        .collect();
    for r in rest {
        records.extend(r?);
    }
    let summaries = summarize(cfg, &records)?;
    Ok(ScenarioResult {
        config: cfg.clone(),
        records,
        summaries,
        tuned_lambdas: tuned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_the_design() {
        let s = preset_scenarios(500, 7);
        assert_eq!(s.len(), 8);
        assert_eq!((s[0].p, s[0].rho, s[0].snr), (10, 0.5, 1.0));
        let worst = s.iter().find(|c| c.name == "worst").unwrap();
        assert_eq!((worst.p, worst.rho, worst.snr), (20, 0.8, 0.5));
        assert!(s.iter().all(|c| c.n == 500));
        let seeds: BTreeSet<u64> = s.iter().map(|c| c.base_seed).collect();
        assert_eq!(seeds.len(), 8);
        // every scenario except the worst case differs from the reference in one factor
        for c in &s[1..7] {
            let diffs = usize::from(c.p != 10) + usize::from(c.rho != 0.5) + usize::from(c.snr != 1.0);
            assert_eq!(diffs, 1, "{}", c.name);
        }
        assert!(is_canonical_n(500) && !is_canonical_n(250));
    }

    #[test]
    fn truth_has_fixed_risk_structure() {
        let t = gen_truth(6, 0.5, 1.0, 3);
        assert!(t.beta_risk0.iter().all(|&b| b == 0.0));
        assert_eq!(t.beta_risk1[0], 0.5);
        assert!(t.beta_risk1[1..].iter().all(|&b| b == 0.0));
        assert!((ar1_quadratic_form(&t.beta_odds, 0.5) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn design_is_deterministic() {
        assert_eq!(gen_design(50, 4, 0.3, 9), gen_design(50, 4, 0.3, 9));
        assert_ne!(gen_design(50, 4, 0.3, 9), gen_design(50, 4, 0.3, 10));
    }

    #[test]
    fn metrics_of_exact_and_zero_estimates() {
        let truth = gen_truth(4, 0.5, 1.0, 1);
        let mut exact = truth.model();
        exact.flows[0].has_intercept = true;
        let as_fit = |model: ModelSpec| FitResult {
            initial_params: vec![0.0; model.n_params()],
            model,
            objective_trace: vec![0.0],
            converged: true,
            iterations: 1,
            clamp_count: 0,
            final_step: 1.0,
            min_step: 1.0,
            line_search_failed: false,
            strongly_convex: false,
        };
        let m = compute_metrics(&as_fit(exact.clone()), &truth, 1e-6);
        assert_eq!((m.estimation_error, m.tpr, m.fpr), (0.0, 1.0, 0.0));

        let m = compute_metrics(&as_fit(exact.zeroed()), &truth, 1e-6);
        let norm = (0.25 + truth.beta_odds.iter().map(|b| b * b).sum::<f64>()).sqrt();
        assert_eq!((m.tpr, m.fpr), (0.0, 0.0));
        assert!((m.estimation_error - norm).abs() < 1e-12);

        let ones = exact.with_params(&vec![1.0; exact.n_params()]);
        let m = compute_metrics(&as_fit(ones), &truth, 1e-6);
        assert_eq!(m.fpr, 1.0);
        assert_eq!(m.nonzero_count, 8.0);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.name()), Some(m));
        }
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        assert!(ScenarioConfig::new("s", 10, 3, 0.5, 1.0).validate().is_err());
        assert!(ScenarioConfig::new("s", 50, 1, 0.5, 1.0).validate().is_err());
        assert!(ScenarioConfig::new("s", 50, 3, 1.0, 1.0).validate().is_err());
    }
}
