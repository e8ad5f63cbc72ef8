//! Sweep-table and manifest output.
//!
//! Tables are comma-separated with a header row, or a JSON array of
//! objects; rows are strictly sorted by the sweep variables and floats are
//! printed with six decimals, so identical runs are byte-identical.

use std::io::Write;

use serde::Serialize;

use crate::model::NetworkSpec;

use super::config::{Experiment, NoiseRegime, OutputFormat, PolicyPlan};

/// One sweep point of a threshold experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub thresholds: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_approx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulated_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulated_stderr: Option<f64>,
    pub p_a: f64,
    pub p_1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u32>,
}

/// One matched-off-probability point of a random-vs-threshold experiment.
#[derive(Debug, Clone, Serialize)]
pub struct PairedRow {
    pub theta: u32,
    pub off_probability: f64,
    pub q: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_analytic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_simulated: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_analytic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_simulated: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u32>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn fmt_opt_u32(v: Option<u32>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Column names for the threshold table of a K-tier scenario.
fn threshold_headers(k: usize) -> Vec<String> {
    if k == 1 {
        vec!["theta".into()]
    } else {
        (1..=k).map(|i| format!("theta_{i}")).collect()
    }
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow], k: usize) -> std::io::Result<()> {
    let mut header = threshold_headers(k);
    header.extend(
        [
            "analytic_exact",
            "analytic_approx",
            "simulated_mean",
            "simulated_stderr",
            "p_a",
            "p_1",
            "trials",
        ]
        .map(String::from),
    );
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut cells: Vec<String> = r.thresholds.iter().map(|t| t.to_string()).collect();
        cells.push(fmt_opt(r.analytic_exact));
        cells.push(fmt_opt(r.analytic_approx));
        cells.push(fmt_opt(r.simulated_mean));
        cells.push(fmt_opt(r.simulated_stderr));
        cells.push(format!("{:.6}", r.p_a));
        cells.push(format!("{:.6}", r.p_1));
        cells.push(fmt_opt_u32(r.trials));
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_paired_csv<W: Write>(mut w: W, rows: &[PairedRow]) -> std::io::Result<()> {
    writeln!(
        w,
        "theta,off_probability,q,threshold_analytic,threshold_simulated,threshold_stderr,\
         random_analytic,random_simulated,random_stderr,trials"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{:.6},{:.6},{},{},{},{},{},{},{}",
            r.theta,
            r.off_probability,
            r.q,
            fmt_opt(r.threshold_analytic),
            fmt_opt(r.threshold_simulated),
            fmt_opt(r.threshold_stderr),
            fmt_opt(r.random_analytic),
            fmt_opt(r.random_simulated),
            fmt_opt(r.random_stderr),
            fmt_opt_u32(r.trials),
        )?;
    }
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, rows: &[T]) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, rows)?;
    writeln!(w)
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct TierManifest {
    bs_density_per_m2: f64,
    tx_power_watts: f64,
}

#[derive(Debug, Serialize)]
struct RegionManifest {
    width_m: f64,
    height_m: f64,
    boundary: String,
}

/// Fully resolved run parameters written next to every output table.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u32>,
    pub occupancy_model: String,
    pub sinr_mode: NoiseRegime,
    pub format: OutputFormat,
    pub pathloss_exponent: f64,
    pub target_sinr_linear: f64,
    pub noise_power_watts: f64,
    pub user_density_per_m2: f64,
    tiers: Vec<TierManifest>,
    region: RegionManifest,
    pub sweep_points: usize,
}

impl Manifest {
    pub fn new(command: &str, exp: &Experiment, sweep_points: usize) -> Self {
        let spec: &NetworkSpec = &exp.spec;
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: exp.master_seed,
            trials: exp.trials,
            occupancy_model: format!("{:?}", exp.model),
            sinr_mode: exp.noise,
            format: exp.format,
            pathloss_exponent: spec.pathloss_exponent,
            target_sinr_linear: spec.target_sinr,
            noise_power_watts: spec.noise_power,
            user_density_per_m2: spec.user_density,
            tiers: spec
                .tiers
                .iter()
                .map(|t| TierManifest {
                    bs_density_per_m2: t.bs_density,
                    tx_power_watts: t.tx_power,
                })
                .collect(),
            region: RegionManifest {
                width_m: exp.region.width,
                height_m: exp.region.height,
                boundary: format!("{:?}", exp.region.boundary),
            },
            sweep_points,
        }
    }
}

/// Number of sweep points a plan produces.
pub fn plan_len(plan: &PolicyPlan) -> usize {
    plan.sorted_thresholds().len()
}
