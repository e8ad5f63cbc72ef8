//! Experiment configuration: a TOML schema with explicit units, resolved
//! into linear SI quantities.
//!
//! Every physical quantity is written with a unit suffix and exactly one
//! spelling must be present: densities `*_per_m2` or `*_per_km2`, powers
//! `*_watts` or `*_dbm`, the SINR target `target_sinr_linear` or
//! `target_sinr_db`. Schema errors name the offending key.

use serde::{Deserialize, Serialize};

use crate::model::{NetworkSpec, OccupancyModel, TierSpec};
use crate::sim::{Boundary, OnOffPolicy, Region};

/// Raw TOML shape.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: ScenarioSection,
    pub region: RegionSection,
    pub policy: PolicySection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub pathloss_exponent: f64,
    pub target_sinr_linear: Option<f64>,
    pub target_sinr_db: Option<f64>,
    pub user_density_per_m2: Option<f64>,
    pub user_density_per_km2: Option<f64>,
    pub noise_power_watts: Option<f64>,
    pub noise_power_dbm: Option<f64>,
    pub tiers: Vec<TierSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierSection {
    pub bs_density_per_m2: Option<f64>,
    pub bs_density_per_km2: Option<f64>,
    pub tx_power_watts: Option<f64>,
    pub tx_power_dbm: Option<f64>,
    /// When true, the tier's base power is calibrated so a cell-edge user
    /// (5th-percentile distance) sees 10 dB above target; requires noise
    /// power > 0 and replaces the explicit tx_power keys.
    #[serde(default)]
    pub cell_edge_power: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    pub width_m: f64,
    pub height_m: f64,
    /// "torus" (default) or "inner-window".
    pub boundary: Option<String>,
    pub margin_m: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    /// "threshold-sweep" | "random-paired" | "fixed"
    pub kind: String,
    pub theta_min: Option<IntOrPerTier>,
    pub theta_max: Option<IntOrPerTier>,
    pub theta_step: Option<IntOrPerTier>,
    /// Fixed per-tier thresholds (kind = "fixed").
    pub thresholds: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum IntOrPerTier {
    Same(u32),
    PerTier(Vec<u32>),
}

impl IntOrPerTier {
    fn resolve(&self, tiers: usize, key: &'static str) -> Result<Vec<u32>, ConfigError> {
        match self {
            IntOrPerTier::Same(v) => Ok(vec![*v; tiers]),
            IntOrPerTier::PerTier(v) if v.len() == tiers => Ok(v.clone()),
            IntOrPerTier::PerTier(v) => Err(ConfigError::new(
                key,
                format!("expected {tiers} per-tier values, got {}", v.len()),
            )),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub master_seed: u64,
    pub trials: Option<u32>,
    /// "exact-gamma" (default) | "poisson" | "normal"
    pub occupancy_model: Option<String>,
    /// "sir" (default) | "sinr"
    pub sinr_mode: Option<String>,
    pub output: Option<String>,
    /// "csv" (default) | "json"
    pub format: Option<String>,
}

/// A schema or consistency error, naming the key at fault.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

// ---------------------------------------------------------------------------
// Resolved form
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseRegime {
    Sir,
    Sinr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Policy plan driving a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyPlan {
    /// Cartesian product of per-tier threshold value lists.
    ThresholdSweep { values: Vec<Vec<u32>> },
    /// Single-tier threshold sweep paired with random control at the
    /// matching off-probability.
    RandomPaired { thetas: Vec<u32> },
    /// One fixed threshold vector.
    Fixed { thresholds: Vec<u32> },
}

/// Fully resolved experiment: linear SI units, explicit defaults.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: NetworkSpec,
    pub region: Region,
    pub plan: PolicyPlan,
    pub trials: Option<u32>,
    pub master_seed: u64,
    pub model: OccupancyModel,
    pub noise: NoiseRegime,
    pub output: Option<String>,
    pub format: OutputFormat,
}

fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn one_of(
    key_a: &'static str,
    a: Option<f64>,
    key_b: &'static str,
    b: Option<f64>,
) -> Result<(f64, bool), ConfigError> {
    match (a, b) {
        (Some(v), None) => Ok((v, true)),
        (None, Some(v)) => Ok((v, false)),
        (Some(_), Some(_)) => Err(ConfigError::new(
            key_a,
            format!("give either `{key_a}` or `{key_b}`, not both"),
        )),
        (None, None) => Err(ConfigError::new(
            key_a,
            format!("one of `{key_a}` or `{key_b}` is required"),
        )),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::new("<toml>", e.to_string()))
    }

    /// Resolve units, defaults, and cross-field constraints.
    pub fn resolve(&self) -> Result<Experiment, ConfigError> {
        let s = &self.scenario;
        if s.tiers.is_empty() {
            return Err(ConfigError::new("scenario.tiers", "at least one tier"));
        }
        let (t_raw, t_linear) = one_of(
            "scenario.target_sinr_linear",
            s.target_sinr_linear,
            "scenario.target_sinr_db",
            s.target_sinr_db,
        )?;
        let target_sinr = if t_linear { t_raw } else { db_to_linear(t_raw) };
        let (u_raw, u_m2) = one_of(
            "scenario.user_density_per_m2",
            s.user_density_per_m2,
            "scenario.user_density_per_km2",
            s.user_density_per_km2,
        )?;
        let user_density = if u_m2 { u_raw } else { u_raw * 1e-6 };
        let noise_power = match (s.noise_power_watts, s.noise_power_dbm) {
            (Some(w), None) => w,
            (None, Some(d)) => dbm_to_watts(d),
            (None, None) => 0.0,
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "scenario.noise_power_watts",
                    "give either watts or dBm, not both",
                ))
            }
        };

        let mut tiers = Vec::with_capacity(s.tiers.len());
        for (i, t) in s.tiers.iter().enumerate() {
            let (d_raw, d_m2) = one_of(
                "scenario.tiers.bs_density_per_m2",
                t.bs_density_per_m2,
                "scenario.tiers.bs_density_per_km2",
                t.bs_density_per_km2,
            )?;
            let bs_density = if d_m2 { d_raw } else { d_raw * 1e-6 };
            let tx_power = if t.cell_edge_power {
                if t.tx_power_watts.is_some() || t.tx_power_dbm.is_some() {
                    return Err(ConfigError::new(
                        "scenario.tiers.cell_edge_power",
                        "remove explicit tx_power keys when calibrating",
                    ));
                }
                if !(noise_power > 0.0) {
                    return Err(ConfigError::new(
                        "scenario.tiers.cell_edge_power",
                        "cell-edge calibration needs noise_power > 0",
                    ));
                }
                crate::model::cell_edge_base_power(
                    bs_density,
                    s.pathloss_exponent,
                    noise_power,
                    target_sinr,
                )
            } else {
                let (p_raw, p_w) = one_of(
                    "scenario.tiers.tx_power_watts",
                    t.tx_power_watts,
                    "scenario.tiers.tx_power_dbm",
                    t.tx_power_dbm,
                )?;
                if p_w {
                    p_raw
                } else {
                    dbm_to_watts(p_raw)
                }
            };
            let _ = i;
            tiers.push(TierSpec::new(bs_density, tx_power, 0));
        }

        let spec = NetworkSpec {
            tiers,
            user_density,
            pathloss_exponent: s.pathloss_exponent,
            noise_power,
            target_sinr,
        };
        spec.validate()
            .map_err(|e| ConfigError::new(format!("scenario.{}", e.field), e.message))?;

        let r = &self.region;
        let boundary = match r.boundary.as_deref().unwrap_or("torus") {
            "torus" => {
                if r.margin_m.is_some() {
                    return Err(ConfigError::new(
                        "region.margin_m",
                        "margin applies to inner-window boundaries only",
                    ));
                }
                Boundary::Torus
            }
            "inner-window" => Boundary::InnerWindow {
                margin: r.margin_m.unwrap_or(500.0),
            },
            other => {
                return Err(ConfigError::new(
                    "region.boundary",
                    format!("unknown boundary `{other}`"),
                ))
            }
        };
        let region = Region {
            width: r.width_m,
            height: r.height_m,
            boundary,
        };
        region
            .validate()
            .map_err(|e| ConfigError::new("region", e.to_string()))?;

        let tiers_n = spec.tier_count();
        let p = &self.policy;
        let plan = match p.kind.as_str() {
            "threshold-sweep" => {
                let min = p
                    .theta_min
                    .as_ref()
                    .map(|v| v.resolve(tiers_n, "policy.theta_min"))
                    .transpose()?
                    .unwrap_or_else(|| vec![0; tiers_n]);
                let max = p
                    .theta_max
                    .as_ref()
                    .ok_or_else(|| ConfigError::new("policy.theta_max", "required for sweeps"))?
                    .resolve(tiers_n, "policy.theta_max")?;
                let step = p
                    .theta_step
                    .as_ref()
                    .map(|v| v.resolve(tiers_n, "policy.theta_step"))
                    .transpose()?
                    .unwrap_or_else(|| vec![1; tiers_n]);
                let mut values = Vec::with_capacity(tiers_n);
                for i in 0..tiers_n {
                    if step[i] == 0 || max[i] < min[i] {
                        return Err(ConfigError::new("policy.theta_step", "empty sweep range"));
                    }
                    values.push((min[i]..=max[i]).step_by(step[i] as usize).collect());
                }
                PolicyPlan::ThresholdSweep { values }
            }
            "random-paired" => {
                if tiers_n != 1 {
                    return Err(ConfigError::new(
                        "policy.kind",
                        "random-paired applies to single-tier scenarios",
                    ));
                }
                let min = match p.theta_min.as_ref() {
                    Some(v) => v.resolve(1, "policy.theta_min")?[0],
                    None => 0,
                };
                let max = p
                    .theta_max
                    .as_ref()
                    .ok_or_else(|| ConfigError::new("policy.theta_max", "required for sweeps"))?
                    .resolve(1, "policy.theta_max")?[0];
                let step = match p.theta_step.as_ref() {
                    Some(v) => v.resolve(1, "policy.theta_step")?[0].max(1),
                    None => 1,
                };
                if max < min {
                    return Err(ConfigError::new("policy.theta_max", "empty sweep range"));
                }
                PolicyPlan::RandomPaired {
                    thetas: (min..=max).step_by(step as usize).collect(),
                }
            }
            "fixed" => {
                let thresholds = p
                    .thresholds
                    .clone()
                    .ok_or_else(|| ConfigError::new("policy.thresholds", "required for fixed"))?;
                if thresholds.len() != tiers_n {
                    return Err(ConfigError::new(
                        "policy.thresholds",
                        format!("expected {tiers_n} per-tier values"),
                    ));
                }
                PolicyPlan::Fixed { thresholds }
            }
            other => {
                return Err(ConfigError::new(
                    "policy.kind",
                    format!("unknown policy kind `{other}`"),
                ))
            }
        };

        let run = &self.run;
        let model = match run.occupancy_model.as_deref().unwrap_or("exact-gamma") {
            "exact-gamma" => OccupancyModel::ExactGamma,
            "poisson" => OccupancyModel::PoissonApprox,
            "normal" => OccupancyModel::NormalApprox,
            other => {
                return Err(ConfigError::new(
                    "run.occupancy_model",
                    format!("unknown model `{other}`"),
                ))
            }
        };
        let noise = match run.sinr_mode.as_deref().unwrap_or("sir") {
            "sir" => NoiseRegime::Sir,
            "sinr" => {
                if !(noise_power > 0.0) {
                    return Err(ConfigError::new(
                        "run.sinr_mode",
                        "sinr mode needs scenario noise_power > 0",
                    ));
                }
                NoiseRegime::Sinr
            }
            other => {
                return Err(ConfigError::new(
                    "run.sinr_mode",
                    format!("unknown sinr mode `{other}`"),
                ))
            }
        };
        let format = match run.format.as_deref().unwrap_or("csv") {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => {
                return Err(ConfigError::new(
                    "run.format",
                    format!("unknown format `{other}`"),
                ))
            }
        };

        Ok(Experiment {
            spec,
            region,
            plan,
            trials: run.trials,
            master_seed: run.master_seed,
            model,
            noise,
            output: run.output.clone(),
            format,
        })
    }
}

impl PolicyPlan {
    /// All threshold vectors of the plan in row-sorted (lexicographic)
    /// order — the order output tables use.
    pub fn sorted_thresholds(&self) -> Vec<Vec<u32>> {
        match self {
            PolicyPlan::ThresholdSweep { values } => {
                let mut rows = vec![Vec::new()];
                for tier_vals in values {
                    let mut next = Vec::with_capacity(rows.len() * tier_vals.len());
                    for r in &rows {
                        for &v in tier_vals {
                            let mut r = r.clone();
                            r.push(v);
                            next.push(r);
                        }
                    }
                    rows = next;
                }
                rows
            }
            PolicyPlan::RandomPaired { thetas } => thetas.iter().map(|&t| vec![t]).collect(),
            PolicyPlan::Fixed { thresholds } => vec![thresholds.clone()],
        }
    }

    /// The same thresholds ordered to keep successive policies close:
    /// a snake over the cartesian grid with the densest tier varying
    /// slowest, which minimizes the BS flips the sweep engine performs.
    pub fn engine_order(&self, spec: &NetworkSpec) -> Vec<Vec<u32>> {
        let sorted = self.sorted_thresholds();
        let values = match self {
            PolicyPlan::ThresholdSweep { values } => values,
            _ => return sorted,
        };
        if values.iter().filter(|v| v.len() > 1).count() <= 1 {
            return sorted;
        }
        // Axis order: slowest axis = densest tier.
        let mut axes: Vec<usize> = (0..values.len()).collect();
        axes.sort_by(|&a, &b| {
            spec.tiers[b]
                .bs_density
                .total_cmp(&spec.tiers[a].bs_density)
        });
        let mut rows = Vec::new();
        let mut idx = vec![0usize; values.len()];
        snake(values, &axes, 0, &mut idx, false, &mut rows);
        rows
    }
}

fn snake(
    values: &[Vec<u32>],
    axes: &[usize],
    depth: usize,
    idx: &mut Vec<usize>,
    reverse: bool,
    out: &mut Vec<Vec<u32>>,
) {
    let axis = axes[depth];
    let len = values[axis].len();
    for step in 0..len {
        let i = if reverse { len - 1 - step } else { step };
        idx[axis] = i;
        if depth + 1 == axes.len() {
            out.push(
                (0..values.len())
                    .map(|t| values[t][idx[t]])
                    .collect::<Vec<u32>>(),
            );
        } else {
            // Alternate direction per step so consecutive rows touch.
            let flip = (out.len() / tail_len(values, axes, depth + 1)) % 2 == 1;
            snake(values, axes, depth + 1, idx, flip, out);
        }
    }
}

fn tail_len(values: &[Vec<u32>], axes: &[usize], depth: usize) -> usize {
    axes[depth..].iter().map(|&a| values[a].len()).product()
}

/// Threshold vectors wrapped as policies.
pub fn as_policies(rows: &[Vec<u32>]) -> Vec<OnOffPolicy> {
    rows.iter()
        .map(|r| OnOffPolicy::Threshold(r.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const HOMNET: &str = r#"
        [scenario]
        pathloss_exponent = 4.0
        target_sinr_db = 0.0
        user_density_per_km2 = 1000.0
        [[scenario.tiers]]
        bs_density_per_km2 = 100.0
        tx_power_watts = 1.0
        [region]
        width_m = 3000.0
        height_m = 3000.0
        [policy]
        kind = "threshold-sweep"
        theta_max = 19
        [run]
        master_seed = 42
        trials = 300
    "#;

    #[test]
    fn homnet_config_resolves_to_si() {
        let exp = ConfigFile::parse(HOMNET).unwrap().resolve().unwrap();
        assert!((exp.spec.tiers[0].bs_density - 1e-4).abs() < 1e-18);
        assert!((exp.spec.user_density - 1e-3).abs() < 1e-15);
        assert!((exp.spec.target_sinr - 1.0).abs() < 1e-12);
        assert_eq!(exp.spec.noise_power, 0.0);
        assert_eq!(exp.master_seed, 42);
        assert_eq!(exp.plan.sorted_thresholds().len(), 20);
        assert_eq!(exp.format, OutputFormat::Csv);
    }

    #[test]
    fn dbm_and_db_units_convert() {
        let cfg = HOMNET
            .replace("target_sinr_db = 0.0", "target_sinr_db = 3.0")
            .replace("tx_power_watts = 1.0", "tx_power_dbm = 30.0");
        let exp = ConfigFile::parse(&cfg).unwrap().resolve().unwrap();
        assert!((exp.spec.target_sinr - 10f64.powf(0.3)).abs() < 1e-12);
        assert!((exp.spec.tiers[0].tx_power - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conflicting_units_name_the_key() {
        let cfg = HOMNET.replace(
            "user_density_per_km2 = 1000.0",
            "user_density_per_km2 = 1000.0\n        user_density_per_m2 = 1e-3",
        );
        let err = ConfigFile::parse(&cfg).unwrap().resolve().unwrap_err();
        assert!(err.key.contains("user_density"), "{err}");
    }

    #[test]
    fn missing_seed_is_schema_error() {
        let cfg = HOMNET.replace("master_seed = 42", "");
        assert!(ConfigFile::parse(&cfg).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let cfg = HOMNET.replace("[run]", "[run]\n        wallclock = true");
        assert!(ConfigFile::parse(&cfg).is_err());
    }

    #[test]
    fn per_tier_ranges_and_snake_order() {
        let cfg = r#"
            [scenario]
            pathloss_exponent = 4.0
            target_sinr_db = 0.0
            user_density_per_m2 = 4.162277660168379e-3
            [[scenario.tiers]]
            bs_density_per_m2 = 1e-4
            tx_power_watts = 10.0
            [[scenario.tiers]]
            bs_density_per_m2 = 1e-3
            tx_power_watts = 1.0
            [region]
            width_m = 2000.0
            height_m = 2000.0
            [policy]
            kind = "threshold-sweep"
            theta_max = [4, 4]
            theta_step = [2, 2]
            [run]
            master_seed = 1
        "#;
        let exp = ConfigFile::parse(cfg).unwrap().resolve().unwrap();
        let sorted = exp.plan.sorted_thresholds();
        assert_eq!(sorted.len(), 9);
        assert_eq!(sorted[0], vec![0, 0]);
        assert_eq!(sorted[8], vec![4, 4]);
        let engine = exp.plan.engine_order(&exp.spec);
        assert_eq!(engine.len(), 9);
        // Tier 1 is denser, so it varies slowest; tier 0 snakes.
        assert_eq!(engine[0], vec![0, 0]);
        assert_eq!(engine[1], vec![2, 0]);
        assert_eq!(engine[2], vec![4, 0]);
        assert_eq!(engine[3], vec![4, 2]);
        assert_eq!(engine[4], vec![2, 2]);
        // Every sorted row appears exactly once.
        let mut seen = engine.clone();
        seen.sort();
        assert_eq!(seen, sorted);
    }

    #[test]
    fn inner_window_boundary() {
        let cfg = HOMNET.replace(
            "[policy]",
            "boundary = \"inner-window\"\n        margin_m = 400.0\n        [policy]",
        );
        let exp = ConfigFile::parse(&cfg).unwrap().resolve().unwrap();
        assert_eq!(exp.region.boundary, Boundary::InnerWindow { margin: 400.0 });
    }

    #[test]
    fn cell_edge_calibration() {
        let cfg = HOMNET
            .replace("tx_power_watts = 1.0", "cell_edge_power = true")
            .replace(
                "user_density_per_km2 = 1000.0",
                "user_density_per_km2 = 1000.0\n        noise_power_watts = 1.0",
            );
        let exp = ConfigFile::parse(&cfg).unwrap().resolve().unwrap();
        let expect = crate::model::cell_edge_base_power(1e-4, 4.0, 1.0, 1.0);
        assert!((exp.spec.tiers[0].tx_power - expect).abs() < 1e-9);
    }
}
