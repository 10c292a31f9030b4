mod common;

use common::*;
use rand::Rng;
use rbc::{
    convergence_report, fit, nll_gradient, Dataset, FlowKind, FlowSpec, ModelSpec, ObjectiveConfig, OptimOptions,
    PenaltySpec,
};

fn tight() -> OptimOptions {
    OptimOptions {
        max_iters: 50_000,
        tol: 1e-15,
        ..OptimOptions::default()
    }
}

#[test]
fn lasso_fits_satisfy_the_subgradient_conditions() {
    let mut r = rng(10);
    for case in 0..20 {
        let d = 3;
        let data = bounded_data(100 + case, 300, d);
        let template = ModelSpec::canonical(&(0..d).collect::<Vec<_>>(), true);
        let lambda = r.random_range(0.02..0.05);
        let cfg = uniform_config(PenaltySpec::lasso(lambda));
        let res = fit(&data, &template, &cfg, &tight()).unwrap();
        assert_monotone(&res.objective_trace);
        assert!(res.converged, "case {case} did not converge");
        assert!(boundary_margin(&res.model, &data) > 1e-3, "case {case} ended on the probability boundary");
        let grad = nll_gradient(&res.model, &data, &cfg).unwrap();
        let params = res.params();
        let offsets = res.model.block_offsets();
        for (flow, &start) in res.model.flows.iter().zip(&offsets) {
            let first = start + usize::from(flow.has_intercept);
            if flow.has_intercept {
                assert!(grad[start].abs() < 1e-4, "case {case}: intercept gradient {} (iters {}, clamps {}, step {:e})", grad[start], res.iterations, res.clamp_count, res.final_step);
            }
            for j in first..first + flow.coefficients.len() {
                if params[j] == 0.0 {
                    assert!(grad[j].abs() <= lambda * (1.0 + 1e-6), "case {case} coord {j}: |{}| > {lambda}", grad[j]);
                } else {
                    let resid = grad[j] + lambda * params[j].signum();
                    assert!(resid.abs() < 1e-4, "case {case} coord {j}: residual {resid}");
                }
            }
        }
    }
}

#[test]
fn ridge_fits_show_a_linear_rate() {
    for case in 0..10 {
        let data = bounded_data(200 + case, 120, 3);
        let template = ModelSpec::canonical(&[0, 1, 2], true);
        let cfg = uniform_config(PenaltySpec::ridge(0.1));
        let res = fit(&data, &template, &cfg, &tight()).unwrap();
        assert_monotone(&res.objective_trace);
        let report = convergence_report(&res).unwrap();
        let slope = report.log_gap_slope.expect("ridge everywhere is strongly convex");
        assert!(slope < 0.0, "case {case}: slope {slope}");
        assert_eq!(report.linear_rate_ok(), Some(true));
        assert!(report.sublinear_ok);
    }
}

#[test]
fn lasso_scaled_gap_stays_within_the_sublinear_bound() {
    for case in 0..5 {
        let data = bounded_data(300 + case, 150, 4);
        let template = ModelSpec::canonical(&[0, 1, 2, 3], true);
        let cfg = uniform_config(PenaltySpec::lasso(0.02));
        let res = fit(&data, &template, &cfg, &tight()).unwrap();
        let report = convergence_report(&res).unwrap();
        assert!(report.monotone);
        assert!(report.log_gap_slope.is_none());
        assert!(
            report.sublinear_ok,
            "case {case}: max t·gap {} exceeds {}",
            report.scaled_gap_max, report.sublinear_bound
        );
    }
}

#[test]
fn ridge_minimizer_does_not_depend_on_the_start() {
    let mut r = rng(11);
    for case in 0..10 {
        let data = bounded_data(400 + case, 300, 3);
        let template = ModelSpec::canonical(&[0, 1, 2], true);
        let cfg = uniform_config(PenaltySpec::ridge(0.1));
        let k = template.n_params();
        let start = |r: &mut rand_chacha::ChaCha8Rng| (0..k).map(|_| r.random_range(-0.1..0.1)).collect::<Vec<_>>();
        let a = fit(&data, &template, &cfg, &tight().with_init(start(&mut r))).unwrap();
        let b = fit(&data, &template, &cfg, &tight().with_init(start(&mut r))).unwrap();
        assert_monotone(&a.objective_trace);
        assert_monotone(&b.objective_trace);
        assert!(boundary_margin(&a.model, &data).min(boundary_margin(&b.model, &data)) > 1e-3);
        for (u, v) in a.params().iter().zip(b.params()) {
            assert!((u - v).abs() < 1e-4, "case {case}: {u} vs {v}");
        }
    }
}

#[test]
fn odds_only_fit_reduces_to_logistic_regression() {
    for case in 0..10 {
        let data = logistic_data(500 + case, 200, 5);
        let template = ModelSpec::new(0.5, vec![FlowSpec::new(FlowKind::ScOdds, true, (0..5).collect())]).unwrap();
        let res = fit(&data, &template, &ObjectiveConfig::default(), &tight()).unwrap();
        assert_monotone(&res.objective_trace);
        let oracle = newton_logistic(data.x(), data.y());
        for (got, want) in res.params().iter().zip(&oracle) {
            assert!((got - want).abs() < 1e-4, "case {case}: {got} vs {want}");
        }
    }
}

#[test]
fn unpenalized_fit_never_ends_above_its_start() {
    let mut r = rng(12);
    for case in 0..5 {
        let data = bounded_data(600 + case, 80, 2);
        let template = random_three_flow(&mut r, 2, 0.2);
        let res = fit(&data, &template, &ObjectiveConfig::default(), &OptimOptions::default()).unwrap();
        assert_monotone(&res.objective_trace);
        assert!(res.objective() <= res.objective_trace[0]);
    }
}

#[test]
fn fits_are_deterministic() {
    let data = bounded_data(700, 100, 3);
    let template = ModelSpec::canonical(&[0, 1, 2], true);
    let cfg = uniform_config(PenaltySpec::elastic_net(0.05, 0.5));
    let a = fit(&data, &template, &cfg, &OptimOptions::default()).unwrap();
    let b = fit(&data, &template, &cfg, &OptimOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fits_stalled_on_the_probability_boundary_still_descend() {
    // unbounded covariates let the risk flows push fitted p past 1; the flat
    // clamp then stalls the line search, but every accepted step still descends
    let mut stalled = 0;
    for case in 0..10 {
        let mut r = rng(800 + case);
        let x = gaussian_matrix(&mut r, 150, 3, 1.0);
        let y = x.rows().into_iter().map(|row| u8::from(row[0] + 0.5 * r.random::<f64>() > 0.2)).collect();
        let data = Dataset::unnamed(x, y).unwrap();
        let template = ModelSpec::canonical(&[0, 1, 2], true);
        let res = fit(&data, &template, &uniform_config(PenaltySpec::lasso(0.01)), &tight()).unwrap();
        assert_monotone(&res.objective_trace);
        assert!(res.objective() < res.objective_trace[0]);
        stalled += usize::from(res.clamp_count > 0);
    }
    assert!(stalled > 0);
}
