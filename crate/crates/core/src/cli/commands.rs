//! The five driver commands: analytic, simulate, compare, optimize,
//! validate. All consume the same config schema; exit codes are 0 on
//! success, 1 for schema/config errors (naming the offending key), 2 for
//! simulation aborts or failed validation checks.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::analytic::{
    activity_probs, coverage_hetnet_sir, coverage_random, hetnet_activity_probs, AnalyticError,
};
use crate::model::{derive_ratios, NetworkSpec, OccupancyModel};
use crate::optimize::{
    derivative_trace, optimal_threshold_search, optimal_thresholds_hetnet,
    optimal_thresholds_hetnet_closed, threshold_closed_result, SearchMethod, ThresholdResult,
};
use crate::sim::stats::{chi_square_pvalue, chi_square_statistic, ks_statistic, total_variation};
use crate::sim::{empirical_nth_distance, estimate_sweep, EstimateMode, OnOffPolicy, SimError};
use crate::specialfn::regularized_upper_gamma;

use super::config::{as_policies, ConfigFile, Experiment, NoiseRegime, OutputFormat, PolicyPlan};
use super::table::{
    plan_len, write_json, write_paired_csv, write_sweep_csv, Manifest, PairedRow, SweepRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Analytic,
    Simulate,
    Compare,
    Optimize,
    Validate,
}

impl CommandKind {
    fn name(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Simulate => "simulate",
            Self::Compare => "compare",
            Self::Optimize => "optimize",
            Self::Validate => "validate",
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
    pub trials: Option<u32>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Load, resolve, and run; returns the process exit code.
pub fn execute(kind: CommandKind, config_path: &Path, overrides: &Overrides) -> i32 {
    let text = match fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return 1;
        }
    };
    let mut exp = match ConfigFile::parse(&text).and_then(|c| c.resolve()) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Some(out) = &overrides.out {
        exp.output = Some(out.clone());
    }
    if let Some(f) = overrides.format {
        exp.format = f;
    }
    if let Some(t) = overrides.trials {
        exp.trials = Some(t);
    }
    if let Some(s) = overrides.seed {
        exp.master_seed = s;
    }

    let body = || match kind {
        CommandKind::Analytic => run_analytic(&exp),
        CommandKind::Simulate => run_table(&exp, kind),
        CommandKind::Compare => run_table(&exp, kind),
        CommandKind::Optimize => run_optimize(&exp),
        CommandKind::Validate => run_validate(&exp),
    };
    let result = match overrides.threads {
        // The thread pool only sets the worker count; estimates are
        // bit-identical for any value.
        Some(n) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: thread pool: {e}");
                    return 1;
                }
            };
            pool.install(body)
        }
        None => body(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error: {e}");
            code
        }
    }
}

/// Internal command failure with its exit code.
#[derive(Debug)]
enum CmdError {
    Config(String),
    Sim(SimError),
    Analytic(AnalyticError),
    Io(std::io::Error),
}

impl CmdError {
    fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 1,
            CmdError::Io(_) => 1,
            CmdError::Sim(SimError::ExcessiveDiscards { .. }) => 2,
            CmdError::Sim(_) => 1,
            CmdError::Analytic(_) => 2,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Config(m) => write!(f, "{m}"),
            CmdError::Sim(e) => write!(f, "{e}"),
            CmdError::Analytic(e) => write!(f, "{e}"),
            CmdError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<SimError> for CmdError {
    fn from(e: SimError) -> Self {
        Self::Sim(e)
    }
}

impl From<AnalyticError> for CmdError {
    fn from(e: AnalyticError) -> Self {
        Self::Analytic(e)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

fn spec_with(spec: &NetworkSpec, thresholds: &[u32]) -> NetworkSpec {
    let mut s = spec.clone();
    for (tier, &t) in s.tiers.iter_mut().zip(thresholds) {
        tier.threshold = t;
    }
    s
}

fn estimate_mode(noise: NoiseRegime) -> EstimateMode {
    match noise {
        NoiseRegime::Sir => EstimateMode::Sir,
        NoiseRegime::Sinr => EstimateMode::Sinr,
    }
}

fn analytic_columns(
    exp: &Experiment,
    thresholds: &[u32],
) -> Result<(f64, f64, f64, f64), AnalyticError> {
    let spec = spec_with(&exp.spec, thresholds);
    let exact = coverage_hetnet_sir(&spec, OccupancyModel::ExactGamma)?;
    let approx = coverage_hetnet_sir(&spec, OccupancyModel::PoissonApprox)?;
    let (probs, _) = hetnet_activity_probs(&spec, OccupancyModel::ExactGamma)?;
    Ok((exact, approx, probs.active, probs.nearest))
}

fn write_output<T: Serialize>(
    exp: &Experiment,
    command: &str,
    rows: &[T],
    csv: impl Fn(&mut dyn std::io::Write) -> std::io::Result<()>,
) -> Result<(), CmdError> {
    match &exp.output {
        Some(path) => {
            let mut file = fs::File::create(path)?;
            match exp.format {
                OutputFormat::Csv => csv(&mut file)?,
                OutputFormat::Json => write_json(&mut file, rows)?,
            }
            let manifest = Manifest::new(command, exp, plan_len(&exp.plan));
            let manifest_path = format!("{path}.manifest.json");
            fs::write(
                &manifest_path,
                serde_json::to_string_pretty(&manifest)?.into_bytes(),
            )?;
            println!("wrote {path} and {manifest_path}");
        }
        None => {
            let mut out = std::io::stdout().lock();
            match exp.format {
                OutputFormat::Csv => csv(&mut out)?,
                OutputFormat::Json => write_json(&mut out, rows)?,
            }
        }
    }
    Ok(())
}

impl From<serde_json::Error> for CmdError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(e.into())
    }
}

// ---------------------------------------------------------------------------
// analytic / simulate / compare
// ---------------------------------------------------------------------------

fn run_analytic(exp: &Experiment) -> Result<i32, CmdError> {
    if exp.trials.is_some() {
        eprintln!("warning: run.trials is ignored by `analytic` (formulas only, no sampling)");
    }
    match &exp.plan {
        PolicyPlan::RandomPaired { .. } => {
            let rows = paired_rows(exp, false)?;
            write_output(exp, "analytic", &rows, |w| write_paired_csv(w, &rows))?;
        }
        _ => {
            let mut rows = Vec::new();
            for thresholds in exp.plan.sorted_thresholds() {
                let (exact, approx, p_a, p_1) = analytic_columns(exp, &thresholds)?;
                rows.push(SweepRow {
                    thresholds,
                    analytic_exact: Some(exact),
                    analytic_approx: Some(approx),
                    simulated_mean: None,
                    simulated_stderr: None,
                    p_a,
                    p_1,
                    trials: None,
                });
            }
            let k = exp.spec.tier_count();
            write_output(exp, "analytic", &rows, |w| write_sweep_csv(w, &rows, k))?;
        }
    }
    Ok(0)
}

fn require_trials(exp: &Experiment) -> Result<u32, CmdError> {
    exp.trials.ok_or_else(|| {
        CmdError::Config("config key `run.trials`: required for simulation commands".into())
    })
}

fn run_table(exp: &Experiment, kind: CommandKind) -> Result<i32, CmdError> {
    let with_analytic = kind == CommandKind::Compare;
    match &exp.plan {
        PolicyPlan::RandomPaired { .. } => {
            let rows = paired_rows(exp, true)?;
            if with_analytic {
                let mut max_thr = 0.0f64;
                let mut max_rnd = 0.0f64;
                for r in &rows {
                    if let (Some(a), Some(s)) = (r.threshold_analytic, r.threshold_simulated) {
                        max_thr = max_thr.max((a - s).abs());
                    }
                    if let (Some(a), Some(s)) = (r.random_analytic, r.random_simulated) {
                        max_rnd = max_rnd.max((a - s).abs());
                    }
                }
                println!("max |simulated - analytic| threshold: {max_thr:.6}");
                println!("max |simulated - analytic| random:    {max_rnd:.6}");
            }
            write_output(exp, kind.name(), &rows, |w| write_paired_csv(w, &rows))?;
        }
        _ => {
            let trials = require_trials(exp)?;
            let sorted = exp.plan.sorted_thresholds();
            let engine_rows = exp.plan.engine_order(&exp.spec);
            let policies = as_policies(&engine_rows);
            let estimates = estimate_sweep(
                &exp.spec,
                &exp.region,
                &policies,
                estimate_mode(exp.noise),
                trials,
                exp.master_seed,
            )?;
            let by_thresholds: HashMap<Vec<u32>, usize> = engine_rows
                .iter()
                .enumerate()
                .map(|(i, r)| (r.clone(), i))
                .collect();
            let mut rows = Vec::with_capacity(sorted.len());
            let mut max_delta = 0.0f64;
            for thresholds in sorted {
                let est = &estimates[by_thresholds[&thresholds]];
                let (exact, approx, p_a, p_1) = analytic_columns(exp, &thresholds)?;
                if with_analytic {
                    max_delta = max_delta.max((est.mean - exact).abs());
                }
                rows.push(SweepRow {
                    thresholds,
                    analytic_exact: with_analytic.then_some(exact),
                    analytic_approx: with_analytic.then_some(approx),
                    simulated_mean: Some(est.mean),
                    simulated_stderr: Some(est.std_error),
                    p_a,
                    p_1,
                    trials: Some(trials),
                });
            }
            if with_analytic {
                println!("max |simulated - analytic_exact| = {max_delta:.6}");
            }
            let k = exp.spec.tier_count();
            write_output(exp, kind.name(), &rows, |w| write_sweep_csv(w, &rows, k))?;
        }
    }
    Ok(0)
}

/// Rows of the random-vs-threshold pairing: for each θ, the matched
/// operating probability is q = p_a(θ, γ) so both schemes silence the
/// same fraction of BSs.
fn paired_rows(exp: &Experiment, simulate: bool) -> Result<Vec<PairedRow>, CmdError> {
    let thetas = match &exp.plan {
        PolicyPlan::RandomPaired { thetas } => thetas.clone(),
        _ => unreachable!("paired_rows requires a random-paired plan"),
    };
    let gamma = exp.spec.users_per_bs();
    let alpha = exp.spec.pathloss_exponent;
    let t = exp.spec.target_sinr;

    let mut rows = Vec::with_capacity(thetas.len());
    let mut policies = Vec::new();
    for &theta in &thetas {
        let q = activity_probs(theta, gamma, OccupancyModel::ExactGamma)?.active;
        let thr_analytic = crate::analytic::coverage_homnet_sir(
            t,
            gamma,
            theta,
            alpha,
            OccupancyModel::ExactGamma,
        )?;
        let rnd_analytic = coverage_random(t, gamma, q, alpha, OccupancyModel::ExactGamma)?;
        rows.push(PairedRow {
            theta,
            off_probability: 1.0 - q,
            q,
            threshold_analytic: Some(thr_analytic),
            threshold_simulated: None,
            threshold_stderr: None,
            random_analytic: Some(rnd_analytic),
            random_simulated: None,
            random_stderr: None,
            trials: None,
        });
        policies.push(OnOffPolicy::Threshold(vec![theta]));
    }
    if simulate {
        let trials = require_trials(exp)?;
        for r in &rows {
            policies.push(OnOffPolicy::Random { q: r.q });
        }
        let estimates = estimate_sweep(
            &exp.spec,
            &exp.region,
            &policies,
            estimate_mode(exp.noise),
            trials,
            exp.master_seed,
        )?;
        let n = thetas.len();
        for (i, r) in rows.iter_mut().enumerate() {
            r.threshold_simulated = Some(estimates[i].mean);
            r.threshold_stderr = Some(estimates[i].std_error);
            r.random_simulated = Some(estimates[n + i].mean);
            r.random_stderr = Some(estimates[n + i].std_error);
            r.trials = Some(trials);
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct MethodReport {
    method: String,
    thresholds: Vec<u32>,
    coverage: f64,
}

#[derive(Debug, Serialize)]
struct OptimizeReport {
    closed_form: MethodReport,
    exhaustive: MethodReport,
    weighted_loads: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    derivative_trace: Option<Vec<(u32, f64)>>,
}

fn method_report(r: &ThresholdResult) -> MethodReport {
    MethodReport {
        method: r.method.to_string(),
        thresholds: r.thresholds.clone(),
        coverage: r.achieved_coverage,
    }
}

fn run_optimize(exp: &Experiment) -> Result<i32, CmdError> {
    let spec = &exp.spec;
    let ratios = derive_ratios(spec);
    let theta_max = exp
        .plan
        .sorted_thresholds()
        .iter()
        .flatten()
        .copied()
        .max()
        .unwrap_or(0)
        .max(
            ratios
                .weighted_ratios
                .iter()
                .fold(0u32, |m, &g| m.max((3.0 * g).ceil() as u32 + 10)),
        );

    let (closed, exhaustive, trace) = if spec.tier_count() == 1 {
        let gamma = spec.users_per_bs();
        let closed =
            threshold_closed_result(spec.target_sinr, gamma, spec.pathloss_exponent, exp.model)?;
        let searched = optimal_threshold_search(
            spec.target_sinr,
            gamma,
            spec.pathloss_exponent,
            theta_max,
            exp.model,
        )?;
        let trace = derivative_trace(spec.target_sinr, gamma, spec.pathloss_exponent, theta_max)?;
        (closed, searched, Some(trace))
    } else {
        let thresholds = optimal_thresholds_hetnet_closed(spec);
        let closed_spec = spec_with(spec, &thresholds);
        let closed = ThresholdResult {
            achieved_coverage: coverage_hetnet_sir(&closed_spec, exp.model)?,
            thresholds,
            method: SearchMethod::ClosedForm,
            derivative_trace: None,
        };
        let searched = optimal_thresholds_hetnet(spec, theta_max, exp.model)?;
        (closed, searched, None)
    };

    println!(
        "closed_form: theta = {:?}, coverage = {:.6}",
        closed.thresholds, closed.achieved_coverage
    );
    println!(
        "exhaustive:  theta = {:?}, coverage = {:.6}",
        exhaustive.thresholds, exhaustive.achieved_coverage
    );
    for (i, g) in ratios.weighted_ratios.iter().enumerate() {
        println!("tier {}: weighted load = {g:.4}", i + 1);
    }

    let report = OptimizeReport {
        closed_form: method_report(&closed),
        exhaustive: method_report(&exhaustive),
        weighted_loads: ratios.weighted_ratios.clone(),
        derivative_trace: trace,
    };
    if let Some(path) = &exp.output {
        fs::write(path, serde_json::to_string_pretty(&report)?.into_bytes())?;
        println!("wrote {path}");
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn run_validate(exp: &Experiment) -> Result<i32, CmdError> {
    let mut checks = Vec::new();
    distance_law_checks(exp, &mut checks)?;
    occupancy_checks(exp, &mut checks)?;
    let all_pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        println!(
            "[{}] {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    println!(
        "{}: {} of {} checks passed",
        if all_pass { "ok" } else { "FAILED" },
        checks.iter().filter(|c| c.pass).count(),
        checks.len()
    );
    Ok(if all_pass { 0 } else { 2 })
}

/// KS of the n-th weighted-nearest distance, conditioned per tier,
/// against the Poisson distance law at the weighted density; plus the
/// tier census of the nearer BSs against its multinomial law (K >= 2).
fn distance_law_checks(exp: &Experiment, checks: &mut Vec<Check>) -> Result<(), CmdError> {
    const SAMPLES: u32 = 10_000;
    let n = 3u32;
    let ratios = derive_ratios(&exp.spec);
    let samples = empirical_nth_distance(&exp.spec, &exp.region, n, SAMPLES, exp.master_seed);

    for tier in 0..exp.spec.tier_count() {
        let lbar = ratios.weighted_densities[tier];
        let mut dist: Vec<f64> = samples
            .iter()
            .filter(|s| s.tier == tier as u32)
            .map(|s| s.distance)
            .collect();
        if dist.len() < 500 {
            checks.push(Check {
                name: format!("tier {} distance law (n={n})", tier + 1),
                pass: false,
                detail: format!("only {} conditional samples", dist.len()),
            });
            continue;
        }
        let count = dist.len();
        let ks = ks_statistic(&mut dist, |r| {
            1.0 - regularized_upper_gamma(n, lbar * std::f64::consts::PI * r * r)
                .expect("valid order")
        });
        checks.push(Check {
            name: format!("tier {} distance law (n={n})", tier + 1),
            pass: ks < 0.03,
            detail: format!("KS = {ks:.4} over {count} samples (limit 0.03)"),
        });
    }

    if exp.spec.tier_count() >= 2 {
        // Census of the n-1 nearer BSs: the count in tier 1 is
        // Binomial(n-1, q_1); three categories give df = 2.
        let q1 = ratios.tier_probs[0];
        let mut observed = vec![0u64; n as usize];
        for s in &samples {
            observed[s.nearer_tier_counts[0] as usize] += 1;
        }
        let expected: Vec<f64> = (0..n as usize)
            .map(|k| {
                let c = match k {
                    0 | 2 => 1.0,
                    1 => 2.0,
                    _ => unreachable!("n = 3 census has 3 categories"),
                };
                c * q1.powi(k as i32) * (1.0 - q1).powi((n as usize - 1 - k) as i32)
            })
            .collect();
        let stat = chi_square_statistic(&observed, &expected);
        let p = chi_square_pvalue(stat, 2);
        checks.push(Check {
            name: "nearer-BS tier census".into(),
            pass: p > 0.01,
            detail: format!("chi2 = {stat:.3}, p = {p:.4} (need p > 0.01)"),
        });
    }
    Ok(())
}

/// Occupancy histogram, activity fraction, and nearest-service fraction
/// per tier against the gamma-cell law at the weighted load.
fn occupancy_checks(exp: &Experiment, checks: &mut Vec<Check>) -> Result<(), CmdError> {
    const SNAPSHOTS: u64 = 250;
    const HIST_LEN: usize = 200;
    let ratios = derive_ratios(&exp.spec);
    let tiers = exp.spec.tier_count();
    let mut hist = vec![vec![0u64; HIST_LEN]; tiers];
    for trial in 0..SNAPSHOTS {
        let snap = match crate::sim::sample_snapshot(
            &exp.spec,
            &exp.region,
            exp.master_seed ^ 0x0cc,
            trial,
        ) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let assoc = crate::sim::associate(&snap, &exp.spec, &exp.region);
        for b in 0..snap.bs_count() {
            let c = (assoc.user_count[b] as usize).min(HIST_LEN - 1);
            hist[snap.bs_tier[b] as usize][c] += 1;
        }
    }

    for tier in 0..tiers {
        let gbar = ratios.weighted_ratios[tier];
        let expected: Vec<f64> = (0..HIST_LEN)
            .map(|m| {
                crate::analytic::occupancy_pmf(m as u32, gbar, OccupancyModel::ExactGamma)
                    .expect("valid pmf arguments")
            })
            .collect();
        let tv = total_variation(&hist[tier], &expected);
        checks.push(Check {
            name: format!("tier {} occupancy histogram", tier + 1),
            pass: tv <= 0.03,
            detail: format!("total variation = {tv:.4} (limit 0.03)"),
        });

        let total: u64 = hist[tier].iter().sum();
        let load: f64 = hist[tier]
            .iter()
            .enumerate()
            .map(|(m, &c)| m as f64 * c as f64)
            .sum();
        let theta = gbar.round() as u32;
        let below: u64 = hist[tier].iter().take(theta as usize + 1).sum();
        let emp_active = 1.0 - below as f64 / total as f64;
        let probs = activity_probs(theta, gbar, OccupancyModel::ExactGamma)?;
        checks.push(Check {
            name: format!("tier {} activity fraction (theta={theta})", tier + 1),
            pass: (emp_active - probs.active).abs() <= 0.02,
            detail: format!(
                "empirical {emp_active:.4} vs analytic {:.4} (limit 0.02)",
                probs.active
            ),
        });

        let stranded: f64 = hist[tier]
            .iter()
            .take(theta as usize + 1)
            .enumerate()
            .map(|(m, &c)| m as f64 * c as f64)
            .sum();
        let emp_nearest = 1.0 - stranded / load;
        checks.push(Check {
            name: format!("tier {} nearest-service fraction (theta={theta})", tier + 1),
            pass: (emp_nearest - probs.nearest).abs() <= 0.02,
            detail: format!(
                "empirical {emp_nearest:.4} vs analytic {:.4} (limit 0.02)",
                probs.nearest
            ),
        });
    }
    Ok(())
}
