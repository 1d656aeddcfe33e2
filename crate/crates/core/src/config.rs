//! Scenario configuration: defaults, key-value parsing and validation.
//!
//! The config file is UTF-8 `key = value` lines with `#` comments. Every
//! field of [`ScenarioConfig`] has a key; channel parameters are overridden
//! under the `channel.` prefix. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antenna::ArrayGeometry;
use crate::band::{band_plan, BandPlan, BandPlanError};
use crate::channel::{ChannelParams, StateParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

impl ConfigError {
    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { field: field.to_string(), reason: reason.into() }
    }

    /// Field or key the error is about, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            ConfigError::UnknownKey(k) => Some(k),
            ConfigError::Syntax { .. } => None,
        }
    }
}

/// Every violated invariant of a config.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}", self.0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ConfigErrors(pub Vec<ConfigError>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PoolingMode {
    Exclusive,
    Partial,
    Full,
}

impl PoolingMode {
    pub fn name(self) -> &'static str {
        match self {
            PoolingMode::Exclusive => "exclusive",
            PoolingMode::Partial => "partial",
            PoolingMode::Full => "full",
        }
    }
}

impl fmt::Display for PoolingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PoolingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exclusive" => Ok(PoolingMode::Exclusive),
            "partial" => Ok(PoolingMode::Partial),
            "full" => Ok(PoolingMode::Full),
            other => Err(format!("expected exclusive, partial or full, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoordinationMode {
    /// Each operator schedules its own BSs jointly, blind to the others.
    IntraOnly,
    /// One central scheduler over all operators with global interference knowledge.
    InterOperator,
}

impl CoordinationMode {
    pub fn name(self) -> &'static str {
        match self {
            CoordinationMode::IntraOnly => "intra",
            CoordinationMode::InterOperator => "inter",
        }
    }
}

impl fmt::Display for CoordinationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoordinationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "intra" | "intra_only" | "intraonly" => Ok(CoordinationMode::IntraOnly),
            "inter" | "inter_operator" | "interoperator" => Ok(CoordinationMode::InterOperator),
            other => Err(format!("expected intra or inter, got `{other}`")),
        }
    }
}

/// How node counts are drawn per drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeploymentLaw {
    /// Exactly `round(density × area)` nodes per operator.
    FixedCount,
    /// Poisson-distributed counts with mean `density × area`.
    Poisson,
}

impl FromStr for DeploymentLaw {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(DeploymentLaw::FixedCount),
            "poisson" | "ppp" => Ok(DeploymentLaw::Poisson),
            other => Err(format!("expected fixed or poisson, got `{other}`")),
        }
    }
}

impl fmt::Display for DeploymentLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeploymentLaw::FixedCount => "fixed",
            DeploymentLaw::Poisson => "poisson",
        })
    }
}

/// Overridable channel parameters (`channel.<name>` keys).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChannelKey {
    AOut,
    BOut,
    ALos,
    LosAlpha,
    LosBeta,
    LosSigma,
    NlosAlpha,
    NlosBeta,
    NlosSigma,
    LambdaClusters,
    RTau,
    Zeta,
    AodSpread,
    AoaSpread,
}

impl ChannelKey {
    pub const ALL: [ChannelKey; 14] = [
        ChannelKey::AOut,
        ChannelKey::BOut,
        ChannelKey::ALos,
        ChannelKey::LosAlpha,
        ChannelKey::LosBeta,
        ChannelKey::LosSigma,
        ChannelKey::NlosAlpha,
        ChannelKey::NlosBeta,
        ChannelKey::NlosSigma,
        ChannelKey::LambdaClusters,
        ChannelKey::RTau,
        ChannelKey::Zeta,
        ChannelKey::AodSpread,
        ChannelKey::AoaSpread,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKey::AOut => "a_out",
            ChannelKey::BOut => "b_out",
            ChannelKey::ALos => "a_los",
            ChannelKey::LosAlpha => "los_alpha",
            ChannelKey::LosBeta => "los_beta",
            ChannelKey::LosSigma => "los_sigma",
            ChannelKey::NlosAlpha => "nlos_alpha",
            ChannelKey::NlosBeta => "nlos_beta",
            ChannelKey::NlosSigma => "nlos_sigma",
            ChannelKey::LambdaClusters => "lambda_clusters",
            ChannelKey::RTau => "r_tau",
            ChannelKey::Zeta => "zeta",
            ChannelKey::AodSpread => "aod_spread_deg",
            ChannelKey::AoaSpread => "aoa_spread_deg",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    fn slot(self, p: &mut ChannelParams) -> &mut f64 {
        fn state(p: &mut StateParams, k: usize) -> &mut f64 {
            match k {
                0 => &mut p.alpha_db,
                1 => &mut p.beta,
                _ => &mut p.sigma_db,
            }
        }
        match self {
            ChannelKey::AOut => &mut p.a_out,
            ChannelKey::BOut => &mut p.b_out,
            ChannelKey::ALos => &mut p.a_los,
            ChannelKey::LosAlpha => state(&mut p.los, 0),
            ChannelKey::LosBeta => state(&mut p.los, 1),
            ChannelKey::LosSigma => state(&mut p.los, 2),
            ChannelKey::NlosAlpha => state(&mut p.nlos, 0),
            ChannelKey::NlosBeta => state(&mut p.nlos, 1),
            ChannelKey::NlosSigma => state(&mut p.nlos, 2),
            ChannelKey::LambdaClusters => &mut p.lambda_clusters,
            ChannelKey::RTau => &mut p.r_tau,
            ChannelKey::Zeta => &mut p.zeta_db,
            ChannelKey::AodSpread => &mut p.aod_spread_deg,
            ChannelKey::AoaSpread => &mut p.aoa_spread_deg,
        }
    }
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Side of the square wrap-around region, meters.
    pub region_side: f64,
    pub n_operators: usize,
    /// BSs per km², per operator.
    pub bs_density_per_op: f64,
    /// UEs per km², per operator.
    pub ue_density_per_op: f64,
    pub carrier_ghz: f64,
    pub total_bandwidth_mhz: u32,
    pub pooling: PoolingMode,
    pub coordination: CoordinationMode,
    pub bs_array: ArrayGeometry,
    pub ue_array: ArrayGeometry,
    pub n_rf_chains_bs: usize,
    /// Total transmit power per BS, dBm.
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub noise_density_dbm_hz: f64,
    /// Spectral-efficiency clamp on SINR; `None` disables it.
    pub sinr_cap_db: Option<f64>,
    /// Interference couplings weaker than this (dB relative to the victim's
    /// noise, at full BS power) are dropped; `None` keeps everything.
    pub interference_floor_db: Option<f64>,
    /// Back half-plane gain of a mounted array, dB below its peak.
    pub front_to_back_db: f64,
    /// Array faces per BS and per UE.
    pub bs_panels: u32,
    pub ue_panels: u32,
    /// Antenna heights, meters.
    pub bs_height: f64,
    pub ue_height: f64,
    pub slots_per_drop: usize,
    pub pf_window: f64,
    pub n_drops: usize,
    pub master_seed: u64,
    pub deployment: DeploymentLaw,
    pub channel_overrides: BTreeMap<ChannelKey, f64>,
}

impl Default for ScenarioConfig {
    /// 32 GHz, 100 BSs/km² per operator, 4×4 UE / 32×32 BS arrays.
    fn default() -> Self {
        ScenarioConfig {
            region_side: 1000.0,
            n_operators: 4,
            bs_density_per_op: 100.0,
            ue_density_per_op: 200.0,
            carrier_ghz: 32.0,
            total_bandwidth_mhz: 1200,
            pooling: PoolingMode::Exclusive,
            coordination: CoordinationMode::IntraOnly,
            bs_array: ArrayGeometry::new(32, 32),
            ue_array: ArrayGeometry::new(4, 4),
            n_rf_chains_bs: 6,
            tx_power_dbm: 30.0,
            noise_figure_db: 7.0,
            noise_density_dbm_hz: -174.0,
            sinr_cap_db: Some(48.0),
            interference_floor_db: Some(-30.0),
            front_to_back_db: 30.0,
            bs_panels: 3,
            ue_panels: 2,
            bs_height: 0.0,
            ue_height: 0.0,
            slots_per_drop: 200,
            pf_window: 0.1,
            n_drops: 50,
            master_seed: 1,
            deployment: DeploymentLaw::FixedCount,
            channel_overrides: BTreeMap::new(),
        }
    }
}

/// All plain (non-channel) keys, in file order.
pub const KEYS: &[&str] = &[
    "region_side",
    "n_operators",
    "bs_density_per_op",
    "ue_density_per_op",
    "carrier",
    "total_bandwidth",
    "pooling_mode",
    "coordination_mode",
    "bs_array",
    "ue_array",
    "n_rf_chains_bs",
    "tx_power_total",
    "noise_figure",
    "noise_density",
    "sinr_cap_db",
    "interference_floor_db",
    "front_to_back_db",
    "bs_panels",
    "ue_panels",
    "bs_height",
    "ue_height",
    "slots_per_drop",
    "pf_window",
    "n_drops",
    "master_seed",
    "deployment",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::invalid(key, format!("cannot parse `{value}`")))
}

fn parse_optional_db(key: &str, value: &str) -> Result<Option<f64>, ConfigError> {
    if value.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

fn fmt_optional_db(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

impl ScenarioConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        if let Some(name) = key.strip_prefix("channel.") {
            let ck = ChannelKey::from_name(name).ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
            self.channel_overrides.insert(ck, parse_num(key, value)?);
            return Ok(());
        }
        match key {
            "region_side" => self.region_side = parse_num(key, value)?,
            "n_operators" => self.n_operators = parse_num(key, value)?,
            "bs_density_per_op" => self.bs_density_per_op = parse_num(key, value)?,
            "ue_density_per_op" => self.ue_density_per_op = parse_num(key, value)?,
            "carrier" => self.carrier_ghz = parse_num(key, value)?,
            "total_bandwidth" => self.total_bandwidth_mhz = parse_num(key, value)?,
            "pooling_mode" => self.pooling = value.parse().map_err(|e| ConfigError::invalid(key, e))?,
            "coordination_mode" => self.coordination = value.parse().map_err(|e| ConfigError::invalid(key, e))?,
            "bs_array" => self.bs_array = value.parse().map_err(|e| ConfigError::invalid(key, e))?,
            "ue_array" => self.ue_array = value.parse().map_err(|e| ConfigError::invalid(key, e))?,
            "n_rf_chains_bs" => self.n_rf_chains_bs = parse_num(key, value)?,
            "tx_power_total" => self.tx_power_dbm = parse_num(key, value)?,
            "noise_figure" => self.noise_figure_db = parse_num(key, value)?,
            "noise_density" => self.noise_density_dbm_hz = parse_num(key, value)?,
            "sinr_cap_db" => self.sinr_cap_db = parse_optional_db(key, value)?,
            "interference_floor_db" => self.interference_floor_db = parse_optional_db(key, value)?,
            "front_to_back_db" => self.front_to_back_db = parse_num(key, value)?,
            "bs_panels" => self.bs_panels = parse_num(key, value)?,
            "ue_panels" => self.ue_panels = parse_num(key, value)?,
            "bs_height" => self.bs_height = parse_num(key, value)?,
            "ue_height" => self.ue_height = parse_num(key, value)?,
            "slots_per_drop" => self.slots_per_drop = parse_num(key, value)?,
            "pf_window" => self.pf_window = parse_num(key, value)?,
            "n_drops" => self.n_drops = parse_num(key, value)?,
            "master_seed" => self.master_seed = parse_num(key, value)?,
            "deployment" => self.deployment = value.parse().map_err(|e| ConfigError::invalid(key, e))?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies a `key=value` override string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: 0, reason: format!("expected key=value, got `{assignment}`") })?;
        self.set(k.trim(), v)
    }

    /// Parses a config file on top of the defaults.
    pub fn from_kv_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                reason: format!("expected key=value, got `{line}`"),
            })?;
            cfg.set(k.trim(), v)?;
        }
        Ok(cfg)
    }

    /// Every key with its current value, channel overrides last.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = KEYS
            .iter()
            .map(|&k| {
                let v = match k {
                    "region_side" => self.region_side.to_string(),
                    "n_operators" => self.n_operators.to_string(),
                    "bs_density_per_op" => self.bs_density_per_op.to_string(),
                    "ue_density_per_op" => self.ue_density_per_op.to_string(),
                    "carrier" => self.carrier_ghz.to_string(),
                    "total_bandwidth" => self.total_bandwidth_mhz.to_string(),
                    "pooling_mode" => self.pooling.to_string(),
                    "coordination_mode" => self.coordination.to_string(),
                    "bs_array" => self.bs_array.to_string(),
                    "ue_array" => self.ue_array.to_string(),
                    "n_rf_chains_bs" => self.n_rf_chains_bs.to_string(),
                    "tx_power_total" => self.tx_power_dbm.to_string(),
                    "noise_figure" => self.noise_figure_db.to_string(),
                    "noise_density" => self.noise_density_dbm_hz.to_string(),
                    "sinr_cap_db" => fmt_optional_db(self.sinr_cap_db),
                    "interference_floor_db" => fmt_optional_db(self.interference_floor_db),
                    "front_to_back_db" => self.front_to_back_db.to_string(),
                    "bs_panels" => self.bs_panels.to_string(),
                    "ue_panels" => self.ue_panels.to_string(),
                    "bs_height" => self.bs_height.to_string(),
                    "ue_height" => self.ue_height.to_string(),
                    "slots_per_drop" => self.slots_per_drop.to_string(),
                    "pf_window" => self.pf_window.to_string(),
                    "n_drops" => self.n_drops.to_string(),
                    "master_seed" => self.master_seed.to_string(),
                    "deployment" => self.deployment.to_string(),
                    _ => unreachable!("key table out of sync"),
                };
                (k.to_string(), v)
            })
            .collect();
        out.extend(
            self.channel_overrides
                .iter()
                .map(|(k, v)| (format!("channel.{}", k.name()), v.to_string())),
        );
        out
    }

    pub fn to_kv_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Carrier defaults with the `channel.*` overrides applied.
    pub fn channel_params(&self) -> ChannelParams {
        let mut p = ChannelParams::for_carrier(self.carrier_ghz);
        for (&k, &v) in &self.channel_overrides {
            *k.slot(&mut p) = v;
        }
        p
    }

    pub fn area_km2(&self) -> f64 {
        (self.region_side / 1000.0).powi(2)
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(self) -> Result<ValidatedConfig, ConfigErrors> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &str, reason: &str| {
            if !ok {
                errs.push(ConfigError::invalid(field, reason));
            }
        };
        let positive = |x: f64| x.is_finite() && x > 0.0;

        check(self.n_operators >= 2, "n_operators", "must be at least 2");
        check(self.total_bandwidth_mhz > 0, "total_bandwidth", "must be positive");
        check(
            self.n_operators == 0 || self.total_bandwidth_mhz % self.n_operators as u32 == 0,
            "total_bandwidth",
            "not divisible by n_operators",
        );
        check(positive(self.region_side), "region_side", "must be positive");
        check(positive(self.bs_density_per_op), "bs_density_per_op", "must be positive");
        check(positive(self.ue_density_per_op), "ue_density_per_op", "must be positive");
        check(positive(self.carrier_ghz), "carrier", "must be positive");
        check(self.bs_array.rows >= 1 && self.bs_array.cols >= 1, "bs_array", "dimensions must be at least 1");
        check(self.ue_array.rows >= 1 && self.ue_array.cols >= 1, "ue_array", "dimensions must be at least 1");
        check(self.n_rf_chains_bs >= 1, "n_rf_chains_bs", "must be at least 1");
        check(self.tx_power_dbm.is_finite(), "tx_power_total", "must be finite");
        check(self.noise_figure_db.is_finite(), "noise_figure", "must be finite");
        check(self.noise_density_dbm_hz.is_finite(), "noise_density", "must be finite");
        check(self.sinr_cap_db.is_none_or(|c| c.is_finite()), "sinr_cap_db", "must be finite or none");
        check(
            self.interference_floor_db.is_none_or(|c| c.is_finite()),
            "interference_floor_db",
            "must be finite or none",
        );
        check(
            self.front_to_back_db.is_finite() && self.front_to_back_db >= 0.0,
            "front_to_back_db",
            "must be non-negative",
        );
        check(self.bs_panels >= 1, "bs_panels", "must be at least 1");
        check(self.ue_panels >= 1, "ue_panels", "must be at least 1");
        check(self.bs_height.is_finite() && self.bs_height >= 0.0, "bs_height", "must be non-negative");
        check(self.ue_height.is_finite() && self.ue_height >= 0.0, "ue_height", "must be non-negative");
        check(self.slots_per_drop >= 1, "slots_per_drop", "must be at least 1");
        check(self.pf_window > 0.0 && self.pf_window <= 1.0, "pf_window", "must lie in (0, 1]");
        check(self.n_drops >= 1, "n_drops", "must be at least 1");

        let p = self.channel_params();
        for k in ChannelKey::ALL {
            let v = *k.slot(&mut p.clone());
            let ok = match k {
                ChannelKey::LosSigma
                | ChannelKey::NlosSigma
                | ChannelKey::Zeta
                | ChannelKey::AodSpread
                | ChannelKey::AoaSpread => v.is_finite() && v >= 0.0,
                ChannelKey::BOut | ChannelKey::LosAlpha | ChannelKey::NlosAlpha => v.is_finite(),
                _ => positive(v),
            };
            if !ok {
                errs.push(ConfigError::invalid(&format!("channel.{}", k.name()), "out of range"));
            }
        }

        if errs.is_empty() {
            Ok(ValidatedConfig(self))
        } else {
            Err(ConfigErrors(errs))
        }
    }
}

/// A config whose invariants have been checked. Immutable; share freely.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedConfig(ScenarioConfig);

impl ValidatedConfig {
    pub fn into_inner(self) -> ScenarioConfig {
        self.0
    }

    /// Copy with one change applied, re-validated.
    pub fn with(&self, f: impl FnOnce(&mut ScenarioConfig)) -> Result<ValidatedConfig, ConfigErrors> {
        let mut c = self.0.clone();
        f(&mut c);
        c.validate()
    }

    pub fn band_plan(&self) -> Result<BandPlan, BandPlanError> {
        band_plan(self.pooling, self.total_bandwidth_mhz, self.n_operators)
    }

    /// Everything that shapes topology and channels; equal keys mean two
    /// configs see byte-identical drops.
    pub fn physical_key(&self) -> String {
        let mut c = self.0.clone();
        c.pooling = PoolingMode::Exclusive;
        c.coordination = CoordinationMode::IntraOnly;
        c.to_kv_text()
    }
}

impl Deref for ValidatedConfig {
    type Target = ScenarioConfig;

    fn deref(&self) -> &ScenarioConfig {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fields(errs: &ConfigErrors) -> Vec<&str> {
        errs.0.iter().filter_map(|e| e.field()).collect()
    }

    #[test]
    fn baseline_config_is_valid() {
        let cfg = ScenarioConfig::default().validate().unwrap();
        assert_eq!(cfg.n_operators, 4);
        assert_eq!(cfg.total_bandwidth_mhz, 1200);
        assert_eq!(cfg.bs_density_per_op, 100.0);
        assert_eq!(cfg.ue_density_per_op * cfg.n_operators as f64, 800.0);
        assert_eq!(cfg.n_rf_chains_bs, 6);
    }

    #[test]
    fn indivisible_bandwidth_is_invalid() {
        let cfg = ScenarioConfig { total_bandwidth_mhz: 1001, ..Default::default() };
        let errs = cfg.validate().unwrap_err();
        assert_eq!(fields(&errs), ["total_bandwidth"]);
    }

    #[test]
    fn zero_pf_window_is_invalid() {
        let cfg = ScenarioConfig { pf_window: 0.0, ..Default::default() };
        assert_eq!(fields(&cfg.validate().unwrap_err()), ["pf_window"]);
        let cfg = ScenarioConfig { pf_window: 1.0, ..Default::default() };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn all_violations_are_reported() {
        let cfg = ScenarioConfig {
            region_side: -1.0,
            pf_window: 2.0,
            n_rf_chains_bs: 0,
            ue_array: ArrayGeometry::new(0, 4),
            ..Default::default()
        };
        let errs = cfg.validate().unwrap_err();
        let f = fields(&errs);
        for want in ["region_side", "pf_window", "n_rf_chains_bs", "ue_array"] {
            assert!(f.contains(&want), "{want} missing from {f:?}");
        }
    }

    #[test]
    fn parses_file_with_comments_and_channel_keys() {
        let text = "# fig 2b\ncarrier = 73\nbs_array=64x64  # big\nue_array = 8x8\n\npooling_mode = full\ncoordination_mode = inter\nchannel.zeta = 3.5\nsinr_cap_db = none\n";
        let cfg = ScenarioConfig::from_kv_text(text).unwrap();
        assert_eq!(cfg.carrier_ghz, 73.0);
        assert_eq!(cfg.bs_array, ArrayGeometry::new(64, 64));
        assert_eq!(cfg.pooling, PoolingMode::Full);
        assert_eq!(cfg.coordination, CoordinationMode::InterOperator);
        assert_eq!(cfg.sinr_cap_db, None);
        let p = cfg.channel_params();
        assert_eq!(p.zeta_db, 3.5);
        assert_eq!(p.nlos.alpha_db, 86.6);
    }

    #[test]
    fn unknown_keys_fail() {
        assert_eq!(
            ScenarioConfig::from_kv_text("bogus = 1"),
            Err(ConfigError::UnknownKey("bogus".into()))
        );
        assert!(matches!(
            ScenarioConfig::from_kv_text("channel.bogus = 1"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(
            ScenarioConfig::from_kv_text("region_side 5"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn physical_key_ignores_pooling_and_coordination() {
        let a = ScenarioConfig::default().validate().unwrap();
        let b = a
            .with(|c| {
                c.pooling = PoolingMode::Full;
                c.coordination = CoordinationMode::InterOperator;
            })
            .unwrap();
        let c = a.with(|c| c.bs_density_per_op = 50.0).unwrap();
        assert_eq!(a.physical_key(), b.physical_key());
        assert_ne!(a.physical_key(), c.physical_key());
    }

    proptest! {
        #[test]
        fn text_round_trip(side in 100.0f64..5000.0, seed in any::<u64>(), rows in 1u32..70, cols in 1u32..70,
                           beta in 0.01f64..1.0, zeta in 0.0f64..10.0, full in any::<bool>()) {
            let mut cfg = ScenarioConfig {
                region_side: side,
                master_seed: seed,
                ue_array: ArrayGeometry::new(rows, cols),
                pf_window: beta,
                pooling: if full { PoolingMode::Full } else { PoolingMode::Partial },
                ..Default::default()
            };
            cfg.channel_overrides.insert(ChannelKey::Zeta, zeta);
            let back = ScenarioConfig::from_kv_text(&cfg.to_kv_text()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
