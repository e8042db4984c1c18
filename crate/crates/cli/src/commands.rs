//! Subcommand handlers. Every handler echoes its fully-resolved config into
//! the output for provenance; validation handlers additionally write a CSV
//! and a JSON summary next to `--out` and signal assertion failures through
//! exit code 4.

use std::path::{Path, PathBuf};

use pacbayes::bounds::{
    chernoff_binary_kl, empirical_gradient_bound, fixed_lambda_bound, l2_bound,
    logsobolev_oracle_bound, mcallester_bound, pac_bayes_chernoff, seeger_bound, subgamma_bound,
    subgaussian_bound, BoundQuery, BoundReport, FixedLambdaVariant,
};
use pacbayes::cgf::{empirical_cgf, LossSampleSet};
use pacbayes::harness::{
    check_exp_moment, check_survival_dominance, default_ratio_grid, gradient_ratio_curve,
    run_coverage, CoverageConfig, Environment, SurvivalRow,
};
use pacbayes::numeric::binomial_se;
use pacbayes::posterior::{
    map_index, optimal_posterior, optimize_bound, FiniteModelClass, ModelEntry,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{
    BoundSpec, CompareConfig, ComputeConfig, CoverageRunConfig, ExpMomentRunConfig,
    SurvivalRunConfig,
};
use crate::errors::{json_config_error, CliError, CliResult};
use crate::output::{
    emit_json, emit_text, fmt_float, parse_grid, read_numeric_csv, read_to_string, side_paths,
    write_file,
};
use crate::OutputFormat;

fn load_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| json_config_error(path, &e))
}

/// Extra constants surfaced by the parameter-norm bound: the envelope
/// inverts to twice the widely printed closed form, and both are reported.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct L2Forms {
    pub solver_gap: f64,
    pub printed_gap: f64,
    pub forms_disagree: bool,
}

fn evaluate_spec(q: &BoundQuery, spec: &BoundSpec) -> CliResult<(BoundReport, Option<L2Forms>)> {
    let report = match spec {
        BoundSpec::Mcallester => (mcallester_bound(q)?, None),
        BoundSpec::Seeger => (seeger_bound(q)?, None),
        BoundSpec::ChernoffBinaryKl => (chernoff_binary_kl(q)?, None),
        BoundSpec::PacBayesChernoff { psi } => (pac_bayes_chernoff(q, psi)?, None),
        BoundSpec::FixedLambda {
            psi,
            lambda,
            variant,
        } => (fixed_lambda_bound(q, psi, *lambda, *variant)?, None),
        BoundSpec::Subgaussian { expected_sigma2 } => {
            (subgaussian_bound(q, *expected_sigma2)?, None)
        }
        BoundSpec::Subgamma { sigma2, c } => (subgamma_bound(q, *sigma2, *c)?, None),
        BoundSpec::L2 {
            m,
            expected_theta_norm2,
        } => {
            let l2 = l2_bound(q, *m, *expected_theta_norm2)?;
            (
                l2.report,
                Some(L2Forms {
                    solver_gap: l2.solver_gap,
                    printed_gap: l2.printed_gap,
                    forms_disagree: l2.forms_disagree,
                }),
            )
        }
        BoundSpec::LogsobolevOracle {
            c,
            expected_grad_norm2,
        } => (logsobolev_oracle_bound(q, *c, *expected_grad_norm2)?, None),
        BoundSpec::EmpiricalGradient {
            c,
            l,
            expected_emp_grad_norm2,
        } => (
            empirical_gradient_bound(q, *c, *l, *expected_emp_grad_norm2)?,
            None,
        ),
    };
    Ok(report)
}

fn report_csv(reports: &[BoundReport]) -> String {
    let mut body = String::from("kind,value,lambda_star,complexity,empirical_risk,gap\n");
    for r in reports {
        let kind = serde_json::to_value(r.kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        body.push_str(&format!(
            "{kind},{},{},{},{},{}\n",
            fmt_float(r.value),
            fmt_float(r.lambda_star),
            fmt_float(r.complexity),
            fmt_float(r.empirical_risk),
            fmt_float(r.gap)
        ));
    }
    body
}

#[derive(Serialize)]
struct ComputeResponse {
    config: ComputeConfig,
    report: BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    l2_forms: Option<L2Forms>,
}

pub fn bound_compute(config_path: &Path, format: OutputFormat) -> CliResult<()> {
    let config: ComputeConfig = load_config(config_path)?;
    let q = BoundQuery::new(config.emp_gibbs_risk, config.kl_div, config.n, config.delta)?;
    let (report, l2_forms) = evaluate_spec(&q, &config.bound)?;
    match format {
        OutputFormat::Json => emit_json(&ComputeResponse {
            config,
            report,
            l2_forms,
        }),
        OutputFormat::Csv => emit_text(&report_csv(&[report])),
    }
}

#[derive(Serialize)]
struct CompareResponse {
    config: CompareConfig,
    reports: Vec<BoundReport>,
}

pub fn bound_compare(config_path: &Path, format: OutputFormat) -> CliResult<()> {
    let config: CompareConfig = load_config(config_path)?;
    if config.bounds.is_empty() {
        return Err(CliError::Config("`bounds` must not be empty".into()));
    }
    let q = BoundQuery::new(config.emp_gibbs_risk, config.kl_div, config.n, config.delta)?;
    let reports = config
        .bounds
        .iter()
        .map(|spec| evaluate_spec(&q, spec).map(|(r, _)| r))
        .collect::<CliResult<Vec<_>>>()?;
    match format {
        OutputFormat::Json => emit_json(&CompareResponse { config, reports }),
        OutputFormat::Csv => emit_text(&report_csv(&reports)),
    }
}

/// Raw mirror of the model-class file; semantic validation happens in
/// [`FiniteModelClass::new`] so malformed values exit 3, not 2.
#[derive(Deserialize)]
struct ClassFile {
    n: u64,
    models: Vec<ModelEntry>,
}

#[derive(Serialize)]
struct PosteriorConfigEcho {
    class: PathBuf,
    delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_lambda: Option<f64>,
}

#[derive(Serialize)]
struct PosteriorResponse {
    config: PosteriorConfigEcho,
    weights: Vec<f64>,
    lambda: f64,
    map_index: usize,
    bound: BoundReport,
}

pub fn posterior_optimize(
    class_path: &Path,
    delta: f64,
    fixed_lambda: Option<f64>,
    format: OutputFormat,
) -> CliResult<()> {
    let raw: ClassFile = load_config(class_path)?;
    let class = FiniteModelClass::new(raw.n, raw.models)?;

    let (weights, lambda, bound) = match fixed_lambda {
        Some(lambda) => {
            let rho = optimal_posterior(&class, lambda)?;
            let kl = pacbayes::posterior::kl_discrete(&rho, &class.prior())?;
            let emp = rho.expectation(&class.emp_risks())?;
            let q = BoundQuery::new(emp, kl, class.n, delta)?;
            let mix = class.expected_psi(&rho)?;
            let report = fixed_lambda_bound(&q, &mix, lambda, FixedLambdaVariant::Chernoff)?;
            (rho, lambda, report)
        }
        None => {
            let out = optimize_bound(&class, delta)?;
            (out.posterior, out.lambda, out.report)
        }
    };
    let map_index = map_index(&class, lambda)?;

    let response = PosteriorResponse {
        config: PosteriorConfigEcho {
            class: class_path.to_path_buf(),
            delta,
            fixed_lambda,
        },
        weights: weights.weights().to_vec(),
        lambda,
        map_index,
        bound,
    };
    match format {
        OutputFormat::Json => emit_json(&response),
        OutputFormat::Csv => {
            let mut body = String::from("index,weight\n");
            for (i, w) in response.weights.iter().enumerate() {
                body.push_str(&format!("{i},{}\n", fmt_float(*w)));
            }
            emit_text(&body)
        }
    }
}

#[derive(Serialize)]
struct CoverageSummary {
    config: CoverageRunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
    trials: u64,
    violations: u64,
    violation_rate: f64,
    binomial_se: f64,
    oracle_se_slack: f64,
    threshold: f64,
    passed: bool,
}

pub fn validate_coverage(
    config_path: &Path,
    seed_override: Option<u64>,
    workers: Option<usize>,
    out: Option<&Path>,
) -> CliResult<()> {
    let mut config: CoverageRunConfig = load_config(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let env = Environment::from_spec(config.environment.clone())?;
    let run_cfg = CoverageConfig {
        n: config.n,
        delta: config.delta,
        trials: config.trials,
        seed: config.seed,
        workers,
        record_trials: out.is_some(),
    };
    let report = run_coverage(&env, config.bound, &config.posterior_rule, &run_cfg)?;

    // The Monte Carlo assertion: the violation rate may not exceed δ by more
    // than three binomial standard errors (at the nominal δ), plus the
    // frozen-oracle slack on environments whose true risks are estimated.
    let threshold = config.delta
        + 3.0 * binomial_se(config.delta, config.trials)
        + 3.0 * report.oracle_se_slack;
    let passed = report.violation_rate <= threshold;

    let summary = CoverageSummary {
        config,
        workers,
        trials: report.trials,
        violations: report.violations,
        violation_rate: report.violation_rate,
        binomial_se: report.binomial_se,
        oracle_se_slack: report.oracle_se_slack,
        threshold,
        passed,
    };

    if let Some(base) = out {
        let (csv_path, json_path) = side_paths(base);
        let mut body = String::from("trial_id,bound,gibbs_true_risk,gibbs_emp_risk,violated\n");
        for r in report.records.as_deref().unwrap_or_default() {
            body.push_str(&format!(
                "{},{},{},{},{}\n",
                r.trial_id,
                fmt_float(r.bound),
                fmt_float(r.gibbs_true_risk),
                fmt_float(r.gibbs_emp_risk),
                r.violated
            ));
        }
        write_file(&csv_path, &body)?;
        write_file(
            &json_path,
            &format!(
                "{}\n",
                serde_json::to_string_pretty(&summary)
                    .map_err(|e| CliError::Config(format!("serialization: {e}")))?
            ),
        )?;
    }
    emit_json(&summary)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "violation rate {} exceeds {threshold}",
            summary.violation_rate
        )))
    }
}

#[derive(Serialize)]
struct SurvivalSummary {
    config: SurvivalRunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
    rows: Vec<SurvivalRow>,
    dominated: bool,
}

pub fn validate_survival(
    config_path: &Path,
    seed_override: Option<u64>,
    workers: Option<usize>,
    out: Option<&Path>,
) -> CliResult<()> {
    let mut config: SurvivalRunConfig = load_config(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let env = Environment::from_spec(config.environment.clone())?;
    let report = check_survival_dominance(
        &env,
        config.model_index,
        config.n,
        &config.c_grid,
        config.trials,
        config.seed,
        workers,
    )?;
    let summary = SurvivalSummary {
        config,
        workers,
        rows: report.rows.clone(),
        dominated: report.dominated,
    };

    if let Some(base) = out {
        let (csv_path, json_path) = side_paths(base);
        let mut body = String::from("c,survival,exponential_bound,se\n");
        for row in &report.rows {
            body.push_str(&format!(
                "{},{},{},{}\n",
                fmt_float(row.c),
                fmt_float(row.survival),
                fmt_float(row.exponential_bound),
                fmt_float(row.se)
            ));
        }
        write_file(&csv_path, &body)?;
        write_file(
            &json_path,
            &format!(
                "{}\n",
                serde_json::to_string_pretty(&summary)
                    .map_err(|e| CliError::Config(format!("serialization: {e}")))?
            ),
        )?;
    }
    emit_json(&summary)?;
    if report.dominated {
        Ok(())
    } else {
        Err(CliError::Validation(
            "empirical survival exceeded e^-c + 3·SE somewhere on the grid".into(),
        ))
    }
}

#[derive(Serialize)]
struct ExpMomentSummary {
    config: ExpMomentRunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
    estimate: f64,
    se: f64,
    pareto_bound: f64,
    high_variance_warning: bool,
    within_bound: bool,
}

pub fn validate_exp_moment(
    config_path: &Path,
    seed_override: Option<u64>,
    workers: Option<usize>,
    out: Option<&Path>,
) -> CliResult<()> {
    let mut config: ExpMomentRunConfig = load_config(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let env = Environment::from_spec(config.environment.clone())?;
    let report = check_exp_moment(
        &env,
        config.model_index,
        config.n,
        config.m,
        config.trials,
        config.seed,
        workers,
    )?;
    let summary = ExpMomentSummary {
        config,
        workers,
        estimate: report.estimate,
        se: report.se,
        pareto_bound: report.pareto_bound,
        high_variance_warning: report.high_variance_warning,
        within_bound: report.within_bound,
    };

    if let Some(base) = out {
        let (csv_path, json_path) = side_paths(base);
        let body = format!(
            "estimate,se,pareto_bound,trials,high_variance_warning\n{},{},{},{},{}\n",
            fmt_float(report.estimate),
            fmt_float(report.se),
            fmt_float(report.pareto_bound),
            report.trials,
            report.high_variance_warning
        );
        write_file(&csv_path, &body)?;
        write_file(
            &json_path,
            &format!(
                "{}\n",
                serde_json::to_string_pretty(&summary)
                    .map_err(|e| CliError::Config(format!("serialization: {e}")))?
            ),
        )?;
    }
    emit_json(&summary)?;
    if report.within_bound {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "estimate {} exceeds {} + 3·SE",
            report.estimate, report.pareto_bound
        )))
    }
}

/// Read a one-column loss CSV; syntax problems exit 2, value problems 3.
fn read_losses(path: &Path) -> CliResult<LossSampleSet> {
    let rows = read_numeric_csv(path, 1)?;
    let values: Vec<f64> = rows.into_iter().map(|r| r[0]).collect();
    Ok(LossSampleSet::new(values)?)
}

#[derive(Serialize)]
struct CgfCurveConfigEcho {
    samples: PathBuf,
    lambda_grid: String,
}

#[derive(Serialize)]
struct CgfCurveResponse {
    config: CgfCurveConfigEcho,
    curve: Vec<(f64, f64)>,
}

pub fn cgf_estimate(
    samples_path: &Path,
    grid_spec: &str,
    format: OutputFormat,
    out: Option<&Path>,
) -> CliResult<()> {
    let samples = read_losses(samples_path)?;
    let grid = parse_grid(grid_spec)?;
    let rf = empirical_cgf(&samples);
    let curve = grid
        .iter()
        .map(|&l| Ok((l, rf.eval(l)?)))
        .collect::<Result<Vec<_>, pacbayes::Error>>()?;

    let mut csv = String::from("lambda,cgf\n");
    for &(l, v) in &curve {
        csv.push_str(&format!("{},{}\n", fmt_float(l), fmt_float(v)));
    }
    if let Some(path) = out {
        write_file(path, &csv)?;
    }
    match format {
        OutputFormat::Csv => emit_text(&csv),
        OutputFormat::Json => emit_json(&CgfCurveResponse {
            config: CgfCurveConfigEcho {
                samples: samples_path.to_path_buf(),
                lambda_grid: grid_spec.to_string(),
            },
            curve,
        }),
    }
}

#[derive(Serialize)]
struct RatioResponse {
    config: CgfCurveConfigEcho,
    limit: f64,
    empirical_c: f64,
    assumption_failure: bool,
    curve: Vec<(f64, f64)>,
}

pub fn cgf_logsobolev(
    samples_path: &Path,
    grid_spec: Option<&str>,
    format: OutputFormat,
    out: Option<&Path>,
) -> CliResult<()> {
    let rows = read_numeric_csv(samples_path, 2)?;
    let pairs: Vec<(f64, f64)> = rows.into_iter().map(|r| (r[0], r[1])).collect();
    let grid = match grid_spec {
        Some(spec) => parse_grid(spec)?,
        None => default_ratio_grid(),
    };
    let report = gradient_ratio_curve(&pairs, &grid)?;

    let mut csv = String::from("lambda,ratio\n");
    for &(l, r) in &report.curve {
        csv.push_str(&format!("{},{}\n", fmt_float(l), fmt_float(r)));
    }
    if let Some(path) = out {
        write_file(path, &csv)?;
    }
    let response = RatioResponse {
        config: CgfCurveConfigEcho {
            samples: samples_path.to_path_buf(),
            lambda_grid: grid_spec
                .map(str::to_string)
                .unwrap_or_else(|| "0.05:5:0.05".to_string()),
        },
        limit: report.limit,
        empirical_c: report.empirical_c,
        assumption_failure: report.assumption_failure,
        curve: report.curve,
    };
    match format {
        OutputFormat::Csv => emit_text(&csv),
        OutputFormat::Json => emit_json(&response),
    }
}
