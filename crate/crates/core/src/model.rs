//! Flow algebra on Bernoulli probabilities.
//!
//! A flow acts on the success probability `p` of a Bernoulli distribution
//! through a real parameter `v`:
//!
//! | flow       | scales               | action                          |
//! |------------|----------------------|---------------------------------|
//! | `ScOdds`   | the odds `p/(1-p)`   | `p e^v / (1 - p + p e^v)`       |
//! | `ScRisk1`  | the risk `p`         | `p e^v`                         |
//! | `ScRisk0`  | the survival `1 - p` | `1 - (1 - p) e^v`               |
//!
//! Each action satisfies `p · 0 = p` and `(p · v) · v' = p · (v + v')`.
//! The risk flows can leave `[0, 1]`; nothing here clamps, so the group
//! laws hold exactly. Clamping is the likelihood's business.

use std::fmt;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlowKind {
    ScOdds,
    ScRisk1,
    ScRisk0,
}

impl FlowKind {
    /// Canonical composition order.
    pub const CANONICAL: [FlowKind; 3] = [FlowKind::ScOdds, FlowKind::ScRisk1, FlowKind::ScRisk0];

    pub fn name(self) -> &'static str {
        match self {
            FlowKind::ScOdds => "ScOdds",
            FlowKind::ScRisk1 => "ScRisk1",
            FlowKind::ScRisk0 => "ScRisk0",
        }
    }

    pub fn parse(s: &str) -> Option<FlowKind> {
        match s.to_ascii_lowercase().as_str() {
            "scodds" | "odds" => Some(FlowKind::ScOdds),
            "scrisk1" | "risk1" => Some(FlowKind::ScRisk1),
            "scrisk0" | "risk0" => Some(FlowKind::ScRisk0),
            _ => None,
        }
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One flow of the composition together with its linear predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub has_intercept: bool,
    /// Log-scale intercept; always 0 when `has_intercept` is false.
    pub intercept: f64,
    pub covariate_indices: Vec<usize>,
    pub coefficients: Vec<f64>,
}

impl FlowSpec {
    /// A flow with all coefficients at zero.
    pub fn new(kind: FlowKind, has_intercept: bool, covariate_indices: Vec<usize>) -> Self {
        let coefficients = vec![0.0; covariate_indices.len()];
        FlowSpec {
            kind,
            has_intercept,
            intercept: 0.0,
            covariate_indices,
            coefficients,
        }
    }

    pub fn with_intercept(mut self, intercept: f64) -> Self {
        self.has_intercept = true;
        self.intercept = intercept;
        self
    }

    pub fn with_coefficients(mut self, coefficients: Vec<f64>) -> Self {
        self.coefficients = coefficients;
        self
    }

    /// Number of free parameters: the intercept (if any) plus one per covariate.
    pub fn n_params(&self) -> usize {
        usize::from(self.has_intercept) + self.coefficients.len()
    }

    fn validate(&self) -> Result<()> {
        if self.coefficients.len() != self.covariate_indices.len() {
            return Err(Error::InvalidModel(format!(
                "flow {}: {} coefficients for {} covariates",
                self.kind,
                self.coefficients.len(),
                self.covariate_indices.len()
            )));
        }
        if !self.has_intercept && self.intercept != 0.0 {
            return Err(Error::InvalidModel(format!(
                "flow {}: intercept {} set on a flow without intercept",
                self.kind, self.intercept
            )));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn predictor_unchecked(&self, x: &[f64]) -> f64 {
        let mut eta = self.intercept;
        for (&j, &b) in self.covariate_indices.iter().zip(&self.coefficients) {
            eta += b * x[j];
        }
        eta
    }
}

/// `intercept + Σ_j β_j x[idx_j]`.
pub fn linear_predictor(flow: &FlowSpec, x: &[f64]) -> Result<f64> {
    if let Some(&index) = flow.covariate_indices.iter().find(|&&j| j >= x.len()) {
        return Err(Error::Structural {
            flow: flow.kind,
            index,
            len: x.len(),
        });
    }
    Ok(flow.predictor_unchecked(x))
}

/// Applies a single flow with parameter `v` to probability `p`.
#[inline]
pub fn apply_flow(p: f64, kind: FlowKind, v: f64) -> f64 {
    match kind {
        FlowKind::ScOdds => {
            let t = p * v.exp();
            t / (1.0 - p + t)
        }
        FlowKind::ScRisk1 => p * v.exp(),
        FlowKind::ScRisk0 => 1.0 - (1.0 - p) * v.exp(),
    }
}

/// Partial derivatives of `apply_flow` with respect to `v` and `p`.
#[inline]
fn flow_partials(p: f64, kind: FlowKind, v: f64) -> (f64, f64, f64) {
    let e = v.exp();
    match kind {
        FlowKind::ScOdds => {
            let den = 1.0 - p + p * e;
            let out = p * e / den;
            (out, out * (1.0 - out), e / (den * den))
        }
        FlowKind::ScRisk1 => {
            let out = p * e;
            (out, out, e)
        }
        FlowKind::ScRisk0 => {
            let out = 1.0 - (1.0 - p) * e;
            (out, out - 1.0, e)
        }
    }
}

/// Reference probability plus an ordered list of flows.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub p0: f64,
    pub flows: Vec<FlowSpec>,
}

impl ModelSpec {
    pub fn new(p0: f64, flows: Vec<FlowSpec>) -> Result<Self> {
        let model = ModelSpec { p0, flows };
        model.validate()?;
        Ok(model)
    }

    /// The three canonical flows over the same covariates, reference `Ber(1/2)`.
    /// Only the odds flow carries an intercept when `odds_intercept` is set.
    pub fn canonical(covariates: &[usize], odds_intercept: bool) -> Self {
        ModelSpec {
            p0: 0.5,
            flows: vec![
                FlowSpec::new(FlowKind::ScOdds, odds_intercept, covariates.to_vec()),
                FlowSpec::new(FlowKind::ScRisk1, false, covariates.to_vec()),
                FlowSpec::new(FlowKind::ScRisk0, false, covariates.to_vec()),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(Error::InvalidModel(format!(
                "reference probability {} is not in (0, 1)",
                self.p0
            )));
        }
        for (i, flow) in self.flows.iter().enumerate() {
            flow.validate()?;
            if self.flows[..i].iter().any(|f| f.kind == flow.kind) {
                return Err(Error::InvalidModel(format!(
                    "flow {} appears more than once",
                    flow.kind
                )));
            }
        }
        Ok(())
    }

    /// Checks every covariate index against a design with `d` columns.
    pub fn check_columns(&self, d: usize) -> Result<()> {
        for flow in &self.flows {
            if let Some(&index) = flow.covariate_indices.iter().find(|&&j| j >= d) {
                return Err(Error::Structural {
                    flow: flow.kind,
                    index,
                    len: d,
                });
            }
        }
        Ok(())
    }

    pub fn flow(&self, kind: FlowKind) -> Option<&FlowSpec> {
        self.flows.iter().find(|f| f.kind == kind)
    }

    pub fn flow_mut(&mut self, kind: FlowKind) -> Option<&mut FlowSpec> {
        self.flows.iter_mut().find(|f| f.kind == kind)
    }

    pub fn n_params(&self) -> usize {
        self.flows.iter().map(FlowSpec::n_params).sum()
    }

    /// Flattens parameters flow by flow: `[intercept?, coefficients...]` per block.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for flow in &self.flows {
            if flow.has_intercept {
                out.push(flow.intercept);
            }
            out.extend_from_slice(&flow.coefficients);
        }
        out
    }

    /// Inverse of [`ModelSpec::params`].
    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.n_params(), "parameter vector length");
        let mut at = 0;
        for flow in &mut self.flows {
            if flow.has_intercept {
                flow.intercept = params[at];
                at += 1;
            }
            let k = flow.coefficients.len();
            flow.coefficients.copy_from_slice(&params[at..at + k]);
            at += k;
        }
    }

    pub fn with_params(&self, params: &[f64]) -> Self {
        let mut m = self.clone();
        m.set_params(params);
        m
    }

    /// Offsets of each flow's block inside the flat parameter vector.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.flows.len());
        let mut at = 0;
        for flow in &self.flows {
            offsets.push(at);
            at += flow.n_params();
        }
        offsets
    }

    /// A copy with every intercept and coefficient set to zero.
    pub fn zeroed(&self) -> Self {
        self.with_params(&vec![0.0; self.n_params()])
    }

    #[inline]
    pub(crate) fn compose_unchecked(&self, x: &[f64]) -> f64 {
        self.flows.iter().fold(self.p0, |p, flow| {
            apply_flow(p, flow.kind, flow.predictor_unchecked(x))
        })
    }

    /// Composed probability and `dp/d(predictor_k)` for each flow, written to `dp_dpred`.
    #[inline]
    pub(crate) fn compose_with_sensitivities(&self, x: &[f64], dp_dpred: &mut [f64]) -> f64 {
        // forward pass keeps d(out)/d(in) per flow, backward pass chains them
        let mut dp_din = [0.0f64; 3];
        let mut p = self.p0;
        for (k, flow) in self.flows.iter().enumerate() {
            let (out, dv, dp) = flow_partials(p, flow.kind, flow.predictor_unchecked(x));
            dp_dpred[k] = dv;
            dp_din[k] = dp;
            p = out;
        }
        let mut acc = 1.0;
        for k in (0..self.flows.len()).rev() {
            dp_dpred[k] *= acc;
            acc *= dp_din[k];
        }
        p
    }
}

/// Folds the flows over `x`, starting from the reference probability.
pub fn compose_probability(model: &ModelSpec, x: &[f64]) -> Result<f64> {
    model.check_columns(x.len())?;
    Ok(model.compose_unchecked(x))
}

/// Points `(γ, δ)` that reproduce `p_star` at odds ratio `theta`.
///
/// With `q = θ/(1+θ)` the canonical composition is `1 - (1 - γq)δ`, so the
/// likelihood at one design point is flat along `δ = (1 - p*)/(1 - γq)`.
pub fn nonident_family(theta: f64, gamma_grid: &[f64], p_star: f64) -> Result<Vec<(f64, f64)>> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::Domain(format!("theta must be positive, got {theta}")));
    }
    if !(p_star > 0.0 && p_star < 1.0) {
        return Err(Error::Domain(format!("p_star must be in (0, 1), got {p_star}")));
    }
    let q = theta / (1.0 + theta);
    gamma_grid
        .iter()
        .map(|&gamma| {
            if !(gamma > 0.0) {
                return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
            }
            let slack = 1.0 - gamma * q;
            if slack <= 0.0 {
                return Err(Error::Domain(format!(
                    "gamma {gamma} gives gamma*q = {} >= 1",
                    gamma * q
                )));
            }
            Ok((gamma, (1.0 - p_star) / slack))
        })
        .collect()
}

/// Binary-outcome data: design matrix, 0/1 outcome, column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Vec<u8>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        let (n, d) = x.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidData(format!("design is {n}x{d}")));
        }
        if y.len() != n {
            return Err(Error::InvalidData(format!(
                "{} outcomes for {n} rows",
                y.len()
            )));
        }
        if feature_names.len() != d {
            return Err(Error::InvalidData(format!(
                "{} feature names for {d} columns",
                feature_names.len()
            )));
        }
        if let Some(i) = y.iter().position(|&v| v > 1) {
            return Err(Error::InvalidData(format!(
                "outcome at row {i} is {}, expected 0 or 1",
                y[i]
            )));
        }
        if let Some(((i, j), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite value at ({i}, {j})")));
        }
        // row slices are used directly in the hot loops
        let x = x.as_standard_layout().into_owned();
        Ok(Dataset {
            x,
            y,
            feature_names,
        })
    }

    /// Dataset with generated names `x1..xd`.
    pub fn unnamed(x: Array2<f64>, y: Vec<u8>) -> Result<Self> {
        let names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Dataset::new(x, y, names)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.x.row(i)
    }

    #[inline]
    pub(crate) fn row_slice(&self, i: usize) -> &[f64] {
        let d = self.d();
        &self.x.as_slice().expect("standard layout")[i * d..(i + 1) * d]
    }

    /// Rows selected by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let x = self.x.select(ndarray::Axis(0), indices);
        let y = indices.iter().map(|&i| self.y[i]).collect();
        Dataset {
            x,
            y,
            feature_names: self.feature_names.clone(),
        }
    }
}
