//! Figure sweep presets.
//!
//! * `fig1a`: 32 GHz, 100 BSs/km², 32×32 BS / 4×4 UE, intra-operator
//!   coordination; exclusive, partial and full pooling.
//! * `fig1b`: as `fig1a` with an omnidirectional UE.
//! * `fig2a`: 32 GHz, 32×32 / 4×4; for 50 and 200 BSs/km²: exclusive, and
//!   full pooling with and without inter-operator coordination.
//! * `fig2b`: as `fig2a` at 73 GHz with 64×64 / 8×8 arrays.
//! * `custom`: the given config plus its exclusive baseline.

use std::fmt;
use std::str::FromStr;

use crate::antenna::ArrayGeometry;
use crate::config::{ConfigError, ConfigErrors, CoordinationMode, PoolingMode, ScenarioConfig};
use crate::harness::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig1a, Preset::Fig1b, Preset::Fig2a, Preset::Fig2b, Preset::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1a => "fig1a",
            Preset::Fig1b => "fig1b",
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Fig1a => "pooling gains at 32 GHz, 4x4 UE array, no inter-operator coordination",
            Preset::Fig1b => "pooling gains at 32 GHz, omnidirectional UE, no inter-operator coordination",
            Preset::Fig2a => "full pooling at 32 GHz vs BS density, with and without inter-operator coordination",
            Preset::Fig2b => "full pooling at 73 GHz vs BS density, with and without inter-operator coordination",
            Preset::Custom => "the given config and its exclusive baseline",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown preset `{s}` (expected fig1a, fig1b, fig2a, fig2b or custom)"))
    }
}

/// Shrinks the region to 500 m for quick runs; densities are untouched.
pub fn desk_scale(cfg: &mut ScenarioConfig) {
    cfg.region_side = 500.0;
}

fn variant(base: &ScenarioConfig, pooling: PoolingMode, coordination: CoordinationMode) -> ScenarioConfig {
    ScenarioConfig { pooling, coordination, ..base.clone() }
}

/// Expands a preset over `base`, then applies `overrides` (`key=value`) to
/// every scenario. Overrides win over preset values.
pub fn expand(preset: Preset, base: &ScenarioConfig, overrides: &[String]) -> Result<Vec<Scenario>, ConfigErrors> {
    use CoordinationMode::{InterOperator, IntraOnly};
    use PoolingMode::{Exclusive, Full, Partial};

    let fig1 = |ue: ArrayGeometry| ScenarioConfig {
        carrier_ghz: 32.0,
        bs_density_per_op: 100.0,
        bs_array: ArrayGeometry::new(32, 32),
        ue_array: ue,
        ..base.clone()
    };
    let fig2 = |name: &str, carrier: f64, bs: ArrayGeometry, ue: ArrayGeometry| {
        [50.0, 200.0]
            .into_iter()
            .flat_map(|density| {
                let b = ScenarioConfig {
                    carrier_ghz: carrier,
                    bs_density_per_op: density,
                    bs_array: bs,
                    ue_array: ue,
                    ..base.clone()
                };
                let tag = format!("{name}-d{density}");
                [
                    (format!("{tag}-exclusive"), variant(&b, Exclusive, IntraOnly)),
                    (format!("{tag}-full-intra"), variant(&b, Full, IntraOnly)),
                    (format!("{tag}-full-inter"), variant(&b, Full, InterOperator)),
                ]
            })
            .collect::<Vec<_>>()
    };

    let raw: Vec<(String, ScenarioConfig)> = match preset {
        Preset::Fig1a | Preset::Fig1b => {
            let ue = if preset == Preset::Fig1a { ArrayGeometry::new(4, 4) } else { ArrayGeometry::OMNI };
            let b = fig1(ue);
            [Exclusive, Partial, Full]
                .into_iter()
                .map(|p| (format!("{}-{}", preset.name(), p.name()), variant(&b, p, IntraOnly)))
                .collect()
        }
        Preset::Fig2a => fig2("fig2a", 32.0, ArrayGeometry::new(32, 32), ArrayGeometry::new(4, 4)),
        Preset::Fig2b => fig2("fig2b", 73.0, ArrayGeometry::new(64, 64), ArrayGeometry::new(8, 8)),
        Preset::Custom => {
            let mut own = base.clone();
            apply(&mut own, overrides)?;
            let mut out = Vec::new();
            if own.pooling != Exclusive {
                out.push(("custom-exclusive".to_string(), variant(&own, Exclusive, IntraOnly)));
            }
            out.push((format!("custom-{}-{}", own.pooling, own.coordination), own));
            return out
                .into_iter()
                .map(|(id, c)| Ok(Scenario::new(id, c.validate()?)))
                .collect();
        }
    };

    raw.into_iter()
        .map(|(id, mut c)| {
            apply(&mut c, overrides)?;
            Ok(Scenario::new(id, c.validate()?))
        })
        .collect()
}

fn apply(cfg: &mut ScenarioConfig, overrides: &[String]) -> Result<(), ConfigErrors> {
    let errs: Vec<ConfigError> = overrides.iter().filter_map(|o| cfg.apply_override(o).err()).collect();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(ConfigErrors(errs))
    }
}
