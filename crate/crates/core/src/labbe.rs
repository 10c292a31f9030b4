//! L'Abbé curves: event probability under exposure against the unexposed one.

use crate::error::{Error, Result};
use crate::model::{apply_flow, FlowKind, ModelSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct LabbeCurve {
    pub covariate: String,
    /// Change of the exposure covariate, in the units the coefficients were fitted on.
    pub delta: f64,
    /// `(p_control, p_treated)`, both in `[0, 1]`.
    pub points: Vec<(f64, f64)>,
}

/// `count` equally spaced control probabilities from 0.01 to 0.99.
pub fn control_grid(count: usize) -> Vec<f64> {
    assert!(count >= 2);
    (0..count)
        .map(|i| (1.0 + 98.0 * i as f64 / (count - 1) as f64) / 100.0)
        .collect()
}

/// Flow increments `(kind, β·delta)` for the exposure column, in model order.
pub fn exposure_increments(model: &ModelSpec, column: usize, delta: f64) -> Vec<(FlowKind, f64)> {
    model
        .flows
        .iter()
        .filter_map(|flow| {
            flow.covariate_indices
                .iter()
                .position(|&j| j == column)
                .map(|at| (flow.kind, flow.coefficients[at] * delta))
        })
        .collect()
}

/// Pushes each control probability through the exposure's flow increments.
pub fn labbe_curve(model: &ModelSpec, column: usize, name: &str, delta: f64, count: usize) -> Result<LabbeCurve> {
    let increments = exposure_increments(model, column, delta);
    if increments.is_empty() {
        return Err(Error::Config(format!("exposure {name} does not enter any flow")));
    }
    let points = control_grid(count)
        .into_iter()
        .map(|pc| {
            let pt = increments
                .iter()
                .fold(pc, |p, &(kind, v)| apply_flow(p, kind, v));
            (pc, pt.clamp(0.0, 1.0))
        })
        .collect();
    Ok(LabbeCurve {
        covariate: name.to_string(),
        delta,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FlowSpec;

    fn exposure_model(odds: f64, risk1: f64, risk0: f64) -> ModelSpec {
        ModelSpec::new(
            0.5,
            vec![
                FlowSpec::new(FlowKind::ScOdds, true, vec![0, 1]).with_coefficients(vec![0.3, odds]),
                FlowSpec::new(FlowKind::ScRisk1, false, vec![1]).with_coefficients(vec![risk1]),
                FlowSpec::new(FlowKind::ScRisk0, false, vec![1]).with_coefficients(vec![risk0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_effects_give_identity() {
        let c = labbe_curve(&exposure_model(0.0, 0.0, 0.0), 1, "lead", 1.67, 99).unwrap();
        assert_eq!(c.points.len(), 99);
        assert!(c.points.iter().all(|(a, b)| (a - b).abs() < 1e-15));
        assert!((c.points[0].0 - 0.01).abs() < 1e-15 && (c.points[98].0 - 0.99).abs() < 1e-12);
        assert!(c.points.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn survival_flow_follows_closed_form() {
        let delta = 1.67;
        for c in [0.2, -0.2] {
            let curve = labbe_curve(&exposure_model(0.0, 0.0, c), 1, "lead", delta, 99).unwrap();
            for &(pc, pt) in &curve.points {
                let expected = (1.0 - (1.0 - pc) * (c * delta).exp()).clamp(0.0, 1.0);
                assert!((pt - expected).abs() < 1e-14);
                // scaling the survival up lowers the event probability
                if c > 0.0 {
                    assert!(pt < pc);
                } else {
                    assert!(pt > pc);
                }
            }
        }
    }

    #[test]
    fn negative_risk_flow_lowers_curve() {
        let curve = labbe_curve(&exposure_model(0.0, -0.3, 0.0), 1, "lead", 2.0, 99).unwrap();
        for &(pc, pt) in &curve.points {
            assert!((pt - pc * (-0.6f64).exp()).abs() < 1e-14);
            assert!(pt < pc);
        }
    }

    #[test]
    fn absent_exposure_is_a_config_error() {
        let m = exposure_model(0.0, 0.0, 0.0);
        assert!(matches!(labbe_curve(&m, 7, "pm", 1.0, 99), Err(Error::Config(_))));
    }
}
