use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::array;
use rbc::labbe::{labbe_curve, LabbeCurve};
use rbc::simulation::{
    is_canonical_n, preset_scenarios, run_scenario, Method, RepRecord, ScenarioResult,
};
use rbc::tuning::{tune_lambda, with_lambdas, CvConfig, CvResult, SelectionRule};
use rbc::tuning::adaptive_weights;
use rbc::{
    fit, nll, nonident_family, objective_total, Dataset, FitResult, FlowKind, FlowSpec, ModelSpec, ObjectiveConfig,
    OptimOptions, PenaltyKind, PenaltySpec,
};

use crate::cli::{Cli, Command, DemoArgs, GenSampleArgs, LabbeArgs, ModelArgs, SimulateArgs};
use crate::coefficients::{load_coefficients, write_coefficients};
use crate::config::{parse_bool, split_list, ConfigFile};
use crate::data::{csv_writer, flush, load_table, read_scaling, to_dataset, write_row, write_scaling, Scaling};
use crate::error::{CliError, Result};
use crate::sample::{write_sample, SAMPLE_ROWS, SAMPLE_SEED};
use crate::svg::{boxplot, line_chart, BoxStats, Series};

pub const DEFAULT_OUTDIR: &str = "out";
pub const DEFAULT_SAMPLE_PATH: &str = "data/asthma_synthetic.csv";
/// Ridge weight of the pilot fit behind adaptive-lasso weights.
pub const PILOT_RIDGE_LAMBDA: f64 = 0.01;

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Fit(args) => cmd_fit(&args, &file).map(drop),
        Command::Cv(args) => cmd_cv(&args, &file).map(drop),
        Command::Labbe(args) => cmd_labbe(&args, &file).map(drop),
        Command::Simulate(args) => cmd_simulate(&args, &file).map(drop),
        Command::DemoNonident(args) => cmd_demo_nonident(&args, &file).map(drop),
        Command::GenSample(args) => cmd_gen_sample(&args, &file),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn outdir(flag: &Option<PathBuf>, file: &ConfigFile) -> Result<PathBuf> {
    let dir = file.pick_or(flag.clone(), "outdir", PathBuf::from(DEFAULT_OUTDIR))?;
    ensure_dir(&dir)?;
    Ok(dir)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    Cv,
}

/// Everything `fit` and `cv` need, resolved from flags and the config file.
#[derive(Debug, Clone)]
pub struct ModelPlan {
    pub input: PathBuf,
    pub outdir: PathBuf,
    pub outcome: String,
    pub data: Dataset,
    pub scaling: Option<Scaling>,
    pub template: ModelSpec,
    /// Penalty kinds with placeholder weights.
    pub config: ObjectiveConfig,
    pub penalized: BTreeSet<FlowKind>,
    pub lambda: LambdaChoice,
    pub options: OptimOptions,
    pub cv: CvConfig,
    pub seed: u64,
}

fn flow_list(value: &str) -> Vec<String> {
    if value.trim().eq_ignore_ascii_case("none") {
        Vec::new()
    } else {
        split_list(value)
    }
}

fn parse_intercepts(value: &str) -> Result<[bool; 3]> {
    let parts: Vec<Option<bool>> = split_list(value).iter().map(|s| parse_bool(s)).collect();
    match parts.as_slice() {
        [Some(a), Some(b), Some(c)] => Ok([*a, *b, *c]),
        _ => Err(CliError::Usage(format!(
            "--intercepts expects three booleans for odds,risk1,risk0, got '{value}'"
        ))),
    }
}

pub fn resolve_plan(args: &ModelArgs, file: &ConfigFile) -> Result<ModelPlan> {
    let input: PathBuf = file
        .pick(args.input.clone(), "input")?
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let table = load_table(&input)?;
    let has = |name: &str| table.names.iter().any(|c| c == name);

    let outcome = match file.pick(args.outcome.clone(), "outcome")? {
        Some(o) => o,
        None if has("asthma") => "asthma".to_string(),
        None => return Err(CliError::Usage("--outcome is required".into())),
    };
    let default_risk = if has("lead") { "lead" } else { "none" };
    let odds = match file.pick(args.odds.clone(), "odds")? {
        Some(v) => flow_list(&v),
        None => table.names.iter().filter(|c| **c != outcome).cloned().collect(),
    };
    let risk1 = flow_list(&file.pick_or(args.risk1.clone(), "risk1", default_risk.to_string())?);
    let risk0 = flow_list(&file.pick_or(args.risk0.clone(), "risk0", default_risk.to_string())?);
    let intercepts = parse_intercepts(&file.pick_or(args.intercepts.clone(), "intercepts", "1,0,0".to_string())?)?;
    let standardize_raw = file.pick_or(args.standardize.clone(), "standardize", "true".to_string())?;
    let standardize = parse_bool(&standardize_raw)
        .ok_or_else(|| CliError::Usage(format!("--standardize expects true or false, got '{standardize_raw}'")))?;

    // dataset columns follow header order
    let lists = [&odds, &risk1, &risk0];
    for name in lists.iter().flat_map(|l| l.iter()) {
        if !has(name) {
            return Err(CliError::Data(format!("missing column '{name}' (have {})", table.names.join(", "))));
        }
    }
    let covariates: Vec<String> = table
        .names
        .iter()
        .filter(|c| lists.iter().any(|l| l.contains(c)))
        .cloned()
        .collect();
    let (data, scaling) = to_dataset(&table, &outcome, &covariates, standardize)?;

    let mut flows = Vec::new();
    for ((kind, list), &intercept) in FlowKind::CANONICAL.into_iter().zip(lists).zip(&intercepts) {
        if list.is_empty() && !intercept {
            continue;
        }
        let idx = list
            .iter()
            .map(|name| covariates.iter().position(|c| c == name).expect("covariate was collected"))
            .collect();
        flows.push(FlowSpec::new(kind, intercept, idx));
    }
    if flows.is_empty() {
        return Err(CliError::Usage("the model has no flows".into()));
    }
    let template = ModelSpec::new(0.5, flows)?;

    let alpha = file.pick_or(args.alpha, "alpha", 0.5)?;
    let max_iters = file.pick_or(args.max_iters, "max-iters", 500)?;
    let tol = file.pick_or(args.tol, "tol", 1e-8)?;
    let options = OptimOptions {
        max_iters,
        tol,
        ..OptimOptions::default()
    };
    let penalty_flags = [&args.penalty_odds, &args.penalty_risk1, &args.penalty_risk0];
    let penalty_keys = ["penalty-odds", "penalty-risk1", "penalty-risk0"];
    let mut config = ObjectiveConfig::default();
    let mut penalized = BTreeSet::new();
    let mut pilot: Option<FitResult> = None;
    for ((kind, flag), key) in FlowKind::CANONICAL.into_iter().zip(penalty_flags).zip(penalty_keys) {
        let raw = file.pick_or(flag.clone(), key, "none".to_string())?;
        let pk = PenaltyKind::parse(&raw)
            .ok_or_else(|| CliError::Usage(format!("--{key}: unknown penalty '{raw}'")))?;
        if pk == PenaltyKind::None || template.flow(kind).is_none() {
            continue;
        }
        let spec = match pk {
            PenaltyKind::L1 => PenaltySpec::lasso(1.0),
            PenaltyKind::L2 => PenaltySpec::ridge(1.0),
            PenaltyKind::ElasticNet => PenaltySpec::elastic_net(1.0, alpha),
            PenaltyKind::AdaptiveL1 => {
                if pilot.is_none() {
                    let ridge = ObjectiveConfig::uniform(&FlowKind::CANONICAL, PenaltySpec::ridge(PILOT_RIDGE_LAMBDA));
                    pilot = Some(fit(&data, &template, &ridge, &options)?);
                }
                let weights = adaptive_weights(pilot.as_ref().expect("pilot was fitted"), 1.0, 1e-4)?;
                PenaltySpec::adaptive(1.0, weights[&kind].clone())
            }
            PenaltyKind::None => unreachable!(),
        };
        config.penalties.insert(kind, spec);
        penalized.insert(kind);
    }

    let lambda_raw = file.pick_or(args.lambda.clone(), "lambda", "cv".to_string())?;
    let lambda = if lambda_raw.eq_ignore_ascii_case("cv") {
        LambdaChoice::Cv
    } else {
        match lambda_raw.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => LambdaChoice::Fixed(v),
            _ => return Err(CliError::Usage(format!("--lambda expects a non-negative number or cv, got '{lambda_raw}'"))),
        }
    };
    let seed = file.seed(args.seed)?;
    let rule = match file.pick_or(args.cv_rule.clone(), "cv-rule", "min".to_string())?.as_str() {
        "min" => SelectionRule::Minimum,
        "1se" => SelectionRule::OneStandardError,
        other => return Err(CliError::Usage(format!("--cv-rule expects min or 1se, got '{other}'"))),
    };
    let cv = CvConfig {
        folds: file.pick_or(args.folds, "folds", 5)?,
        seed,
        rule,
        ..CvConfig::default()
    };
    Ok(ModelPlan {
        input,
        outdir: outdir(&args.outdir, file)?,
        outcome,
        data,
        scaling,
        template,
        config,
        penalized,
        lambda,
        options,
        cv,
        seed,
    })
}

fn write_cv_curve(path: &Path, plan: &ModelPlan, result: &CvResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut head = vec!["scan_flow".to_string(), "lambda".to_string()];
    head.extend(plan.penalized.iter().map(|k| format!("lambda_{k}")));
    head.push("mean_heldout_nll".to_string());
    write_row(&mut w, path, &head)?;
    for pt in &result.cv_curve {
        let mut row = vec![pt.flow.name().to_string(), pt.lambda.to_string()];
        row.extend(plan.penalized.iter().map(|k| pt.lambdas[k].to_string()));
        row.push(pt.deviance.to_string());
        write_row(&mut w, path, &row)?;
    }
    flush(w, path)
}

fn tune(plan: &ModelPlan) -> Result<CvResult> {
    if plan.penalized.is_empty() {
        return Err(CliError::Usage("cross-validation needs at least one penalized flow".into()));
    }
    let result = tune_lambda(&plan.data, &plan.template, &plan.config, &plan.options, &plan.cv, &plan.penalized)?;
    write_cv_curve(&plan.outdir.join("cv_curve.csv"), plan, &result)?;
    Ok(result)
}

fn metadata(entries: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

fn plan_metadata(command: &str, plan: &ModelPlan) -> Vec<(&'static str, String)> {
    vec![
        ("command", command.to_string()),
        ("input", plan.input.display().to_string()),
        ("outcome", plan.outcome.clone()),
        ("n", plan.data.n().to_string()),
        ("covariates", plan.data.feature_names().join(",")),
        ("standardized", plan.scaling.is_some().to_string()),
        ("seed", plan.seed.to_string()),
        ("folds", plan.cv.folds.to_string()),
    ]
}

fn lambda_entries(plan: &ModelPlan, lambdas: &BTreeMap<FlowKind, f64>) -> Vec<(&'static str, String)> {
    FlowKind::CANONICAL
        .into_iter()
        .filter(|k| plan.template.flow(*k).is_some())
        .flat_map(|k| {
            let (pkey, lkey) = match k {
                FlowKind::ScOdds => ("penalty_odds", "lambda_odds"),
                FlowKind::ScRisk1 => ("penalty_risk1", "lambda_risk1"),
                FlowKind::ScRisk0 => ("penalty_risk0", "lambda_risk0"),
            };
            let kind = plan.config.penalty(k).map_or(PenaltyKind::None, |p| p.kind);
            [
                (pkey, format!("{kind:?}")),
                (lkey, lambdas.get(&k).copied().unwrap_or(0.0).to_string()),
            ]
        })
        .collect()
}

/// Fits the model; returns the fit and the weights used.
pub fn cmd_fit(args: &ModelArgs, file: &ConfigFile) -> Result<(FitResult, BTreeMap<FlowKind, f64>)> {
    let plan = resolve_plan(args, file)?;
    let lambdas: BTreeMap<FlowKind, f64> = match plan.lambda {
        _ if plan.penalized.is_empty() => BTreeMap::new(),
        LambdaChoice::Fixed(v) => plan.penalized.iter().map(|&k| (k, v)).collect(),
        LambdaChoice::Cv => tune(&plan)?.best_lambdas,
    };
    let config = with_lambdas(&plan.config, &lambdas);
    let result = fit(&plan.data, &plan.template, &config, &plan.options)?;

    let dir = &plan.outdir;
    write_coefficients(&dir.join("coefficients.csv"), &result.model, plan.data.feature_names())?;
    let trace_path = dir.join("trace.csv");
    let mut w = csv_writer(&trace_path)?;
    write_row(&mut w, &trace_path, &["iteration", "objective"])?;
    for (t, f) in result.objective_trace.iter().enumerate() {
        write_row(&mut w, &trace_path, &[t.to_string(), f.to_string()])?;
    }
    flush(w, &trace_path)?;
    if let Some(s) = &plan.scaling {
        write_scaling(&dir.join("scaling.csv"), s)?;
    }
    let mut meta = plan_metadata("fit", &plan);
    meta.push(("lambda_mode", format!("{:?}", plan.lambda).to_lowercase()));
    meta.extend(lambda_entries(&plan, &lambdas));
    meta.extend([
        ("iterations", result.iterations.to_string()),
        ("converged", result.converged.to_string()),
        ("line_search_failed", result.line_search_failed.to_string()),
        ("clamp_count", result.clamp_count.to_string()),
        ("final_step", result.final_step.to_string()),
        ("objective", result.objective().to_string()),
    ]);
    write_text(&dir.join("metadata.txt"), &metadata(&meta))?;

    if result.line_search_failed {
        return Err(CliError::Optimization(format!(
            "line search failed after {} iterations; results written to {}",
            result.iterations,
            dir.display()
        )));
    }
    if !result.converged {
        eprintln!(
            "warning: no convergence within {} iterations; see {}",
            result.iterations,
            dir.join("metadata.txt").display()
        );
    }
    Ok((result, lambdas))
}

pub fn cmd_cv(args: &ModelArgs, file: &ConfigFile) -> Result<CvResult> {
    let plan = resolve_plan(args, file)?;
    let result = tune(&plan)?;
    let mut meta = plan_metadata("cv", &plan);
    meta.extend(lambda_entries(&plan, &result.best_lambdas));
    meta.extend([
        ("best_mean_heldout_nll", result.best_deviance.to_string()),
        ("sweeps", result.sweeps.to_string()),
    ]);
    write_text(&plan.outdir.join("metadata.txt"), &metadata(&meta))?;
    Ok(result)
}

pub fn cmd_labbe(args: &LabbeArgs, file: &ConfigFile) -> Result<LabbeCurve> {
    let dir = outdir(&args.outdir, file)?;
    let coef_path = file
        .pick(args.coefficients.clone(), "coefficients")?
        .unwrap_or_else(|| dir.join("coefficients.csv"));
    let (model, names) = load_coefficients(&coef_path)?;
    let exposure = file.pick_or(args.exposure.clone(), "exposure", "lead".to_string())?;
    let column = names
        .iter()
        .position(|n| *n == exposure)
        .ok_or_else(|| CliError::Usage(format!("exposure '{exposure}' does not enter any flow")))?;

    let scaling_path = match file.pick(args.scaling.clone(), "scaling")? {
        Some(p) => Some(p),
        None => coef_path
            .parent()
            .map(|d| d.join("scaling.csv"))
            .filter(|p| p.exists()),
    };
    let sd = match &scaling_path {
        Some(p) => read_scaling(p)?.get(&exposure).map_or(1.0, |(_, sd)| sd),
        None => 1.0,
    };
    let delta = match file.pick(args.delta, "delta")? {
        Some(d) => d,
        None => {
            let input: PathBuf = file.pick(args.input.clone(), "input")?.ok_or_else(|| {
                CliError::Usage("--delta or --input is needed to fix the exposure change".into())
            })?;
            let table = load_table(&input)?;
            let col = table.column(&exposure)?;
            col.iter().sum::<f64>() / col.len() as f64
        }
    };
    let points = file.pick_or(args.points, "points", 99)?;
    let curve = labbe_curve(&model, column, &exposure, delta / sd, points)?;

    let path = dir.join("labbe.csv");
    let mut w = csv_writer(&path)?;
    write_row(&mut w, &path, &["p_control", "p_treated"])?;
    for (a, b) in &curve.points {
        write_row(&mut w, &path, &[a.to_string(), b.to_string()])?;
    }
    flush(w, &path)?;
    let series = [
        Series {
            label: format!("{exposure} +{delta:.3}"),
            points: curve.points.clone(),
            dashed: false,
        },
        Series {
            label: "identity".into(),
            points: vec![(0.0, 0.0), (1.0, 1.0)],
            dashed: true,
        },
    ];
    let svg = line_chart(
        &format!("L'Abbé plot for {exposure}"),
        "p (control)",
        "p (exposed)",
        &series,
        Some(((0.0, 1.0), (0.0, 1.0))),
    );
    write_text(&dir.join("labbe.svg"), &svg)?;
    Ok(curve)
}

/// Linear-interpolation quantiles `[min, q1, median, q3, max]`.
pub fn five_numbers(values: &[f64]) -> [f64; 5] {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return [f64::NAN; 5];
    }
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    [v[0], q(0.25), q(0.5), q(0.75), v[v.len() - 1]]
}

const METRICS: [(&str, fn(&RepRecord) -> f64); 3] = [
    ("estimation_error", |r| r.metrics.estimation_error),
    ("tpr", |r| r.metrics.tpr),
    ("fpr", |r| r.metrics.fpr),
];

fn write_scenario_csv(path: &Path, result: &ScenarioResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    write_row(
        &mut w,
        path,
        &["scenario", "method", "rep", "estimation_error", "tpr", "fpr", "deviance", "nonzero_count", "converged"],
    )?;
    for r in &result.records {
        write_row(
            &mut w,
            path,
            &[
                r.scenario.clone(),
                r.method.name().to_string(),
                r.rep.to_string(),
                r.metrics.estimation_error.to_string(),
                r.metrics.tpr.to_string(),
                r.metrics.fpr.to_string(),
                r.deviance.to_string(),
                r.metrics.nonzero_count.to_string(),
                r.converged.to_string(),
            ],
        )?;
    }
    flush(w, path)
}

pub fn cmd_simulate(args: &SimulateArgs, file: &ConfigFile) -> Result<Vec<ScenarioResult>> {
    let dir = outdir(&args.outdir, file)?;
    let n = file.pick_or(args.n, "n", 100)?;
    let reps = file.pick_or(args.reps, "reps", 30)?;
    let seed = file.seed(args.seed)?;
    let methods = match file.pick(args.methods.clone(), "methods")? {
        Some(list) => split_list(&list)
            .iter()
            .map(|m| Method::parse(m).ok_or_else(|| CliError::Usage(format!("unknown method '{m}'"))))
            .collect::<Result<Vec<_>>>()?,
        None => Method::DEFAULT.to_vec(),
    };
    let presets = file.pick_or(args.preset.clone(), "preset", "all".to_string())?;
    let all = preset_scenarios(n, seed);
    let chosen: Vec<_> = if presets.trim().eq_ignore_ascii_case("all") {
        all
    } else {
        split_list(&presets)
            .iter()
            .map(|name| {
                all.iter().find(|c| c.name == *name).cloned().ok_or_else(|| {
                    let names: Vec<&str> = all.iter().map(|c| c.name.as_str()).collect();
                    CliError::Usage(format!("unknown preset '{name}' (choose from {})", names.join(", ")))
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    if !is_canonical_n(n) {
        eprintln!("note: n = {n} is not one of the canonical sizes 100, 500, 1000");
    }
    let folds = file.pick(args.folds, "folds")?;
    let max_iters = file.pick(args.max_iters, "max-iters")?;

    let mut results = Vec::new();
    for mut cfg in chosen {
        cfg.replications = reps;
        cfg.methods = methods.clone();
        if let Some(k) = folds {
            cfg.cv.folds = k;
        }
        if let Some(m) = max_iters {
            cfg.options.max_iters = m;
        }
        let result = run_scenario(&cfg)?;
        write_scenario_csv(&dir.join(format!("{}.csv", cfg.name)), &result)?;
        results.push(result);
    }

    let path = dir.join("summary.csv");
    let mut w = csv_writer(&path)?;
    write_row(
        &mut w,
        &path,
        &["scenario", "method", "estimation_error", "tpr", "fpr", "mean_heldout_nll", "nonzero_count", "failed_reps"],
    )?;
    for res in &results {
        for s in &res.summaries {
            write_row(
                &mut w,
                &path,
                &[
                    res.config.name.clone(),
                    s.method.name().to_string(),
                    s.estimation_error.to_string(),
                    s.tpr.to_string(),
                    s.fpr.to_string(),
                    s.deviance.to_string(),
                    s.nonzero_count.to_string(),
                    s.failed_reps.to_string(),
                ],
            )?;
        }
    }
    flush(w, &path)?;

    for (metric, get) in METRICS {
        let path = dir.join(format!("boxplot_{metric}.csv"));
        let mut w = csv_writer(&path)?;
        write_row(&mut w, &path, &["scenario", "method", "min", "q1", "median", "q3", "max"])?;
        let mut boxes = Vec::new();
        for res in &results {
            for &method in &res.config.methods {
                let values: Vec<f64> = res
                    .records
                    .iter()
                    .filter(|r| r.method == method && r.converged)
                    .map(get)
                    .collect();
                let stats = five_numbers(&values);
                let mut row = vec![res.config.name.clone(), method.name().to_string()];
                row.extend(stats.iter().map(f64::to_string));
                write_row(&mut w, &path, &row)?;
                boxes.push(BoxStats {
                    label: format!("{}/{}", res.config.name, method.name()),
                    stats,
                });
            }
        }
        flush(w, &path)?;
        let svg = boxplot(&format!("{metric}, n = {n}"), metric, &boxes);
        write_text(&dir.join(format!("boxplot_{metric}.svg")), &svg)?;
    }
    Ok(results)
}

/// One row of the non-identifiability table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeRow {
    pub gamma: f64,
    pub delta: f64,
    pub nll: f64,
    /// `|log γ| + |log δ|`.
    pub penalty: f64,
    pub objective: f64,
}

pub const DEMO_GAMMAS: [f64; 17] = [
    0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8,
];

/// θ = 1 at a single design point observed once with each outcome, so
/// `p* = 0.5` and the likelihood is flat along the family.
pub fn nonident_table(lambda: f64) -> Result<Vec<RidgeRow>> {
    let theta = 1.0;
    let data = Dataset::unnamed(array![[0.0], [0.0]], vec![1, 0])?;
    let mut config = ObjectiveConfig::default()
        .with_penalty(FlowKind::ScRisk1, PenaltySpec::lasso(lambda))
        .with_penalty(FlowKind::ScRisk0, PenaltySpec::lasso(lambda));
    config.penalize_intercepts = true;
    nonident_family(theta, &DEMO_GAMMAS, 0.5)?
        .into_iter()
        .map(|(gamma, delta)| {
            let model = ModelSpec::new(
                0.5,
                vec![
                    FlowSpec::new(FlowKind::ScOdds, true, vec![]).with_intercept(f64::ln(theta)),
                    FlowSpec::new(FlowKind::ScRisk1, true, vec![]).with_intercept(gamma.ln()),
                    FlowSpec::new(FlowKind::ScRisk0, true, vec![]).with_intercept(delta.ln()),
                ],
            )?;
            Ok(RidgeRow {
                gamma,
                delta,
                nll: nll(&model, &data, &config)?,
                penalty: gamma.ln().abs() + delta.ln().abs(),
                objective: objective_total(&model, &data, &config)?,
            })
        })
        .collect()
}

pub fn cmd_demo_nonident(args: &DemoArgs, file: &ConfigFile) -> Result<Vec<RidgeRow>> {
    let dir = outdir(&args.outdir, file)?;
    let lambda = file.pick_or(args.lambda, "lambda", 1.0)?;
    let rows = nonident_table(lambda)?;
    let path = dir.join("nonident.csv");
    let mut w = csv_writer(&path)?;
    write_row(&mut w, &path, &["gamma", "delta", "nll", "penalty", "objective"])?;
    for r in &rows {
        write_row(
            &mut w,
            &path,
            &[r.gamma, r.delta, r.nll, r.penalty, r.objective].map(|v| v.to_string()),
        )?;
    }
    flush(w, &path)?;
    let series = [
        Series {
            label: "negative log-likelihood".into(),
            points: rows.iter().map(|r| (r.gamma, r.nll)).collect(),
            dashed: true,
        },
        Series {
            label: format!("penalized objective (λ = {lambda})"),
            points: rows.iter().map(|r| (r.gamma, r.objective)).collect(),
            dashed: false,
        },
    ];
    let svg = line_chart("Objective along the flat ridge (θ = 1)", "γ", "value", &series, None);
    write_text(&dir.join("nonident.svg"), &svg)?;
    Ok(rows)
}

pub fn cmd_gen_sample(args: &GenSampleArgs, file: &ConfigFile) -> Result<()> {
    let path = file.pick_or(args.output.clone(), "output", PathBuf::from(DEFAULT_SAMPLE_PATH))?;
    let seed = file.pick_or(args.seed, "seed", SAMPLE_SEED)?;
    let rows = file.pick_or(args.rows, "rows", SAMPLE_ROWS)?;
    write_sample(&path, rows, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        assert_eq!(five_numbers(&[3.0, 1.0, 2.0, 4.0, 5.0]), [1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(five_numbers(&[0.0, 1.0]), [0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(five_numbers(&[]).iter().all(|v| v.is_nan()));
    }

    #[test]
    fn intercept_flags() {
        assert_eq!(parse_intercepts("1,0,0").unwrap(), [true, false, false]);
        assert_eq!(parse_intercepts("true, yes, no").unwrap(), [true, true, false]);
        assert!(parse_intercepts("1,0").is_err());
    }

    #[test]
    fn ridge_table_is_flat_with_a_unique_penalized_minimum() {
        let rows = nonident_table(1.0).unwrap();
        let unit = rows.iter().find(|r| r.gamma == 1.0).unwrap();
        assert_eq!(unit.penalty, 0.0);
        assert_eq!(unit.objective, unit.nll);
    }
}
