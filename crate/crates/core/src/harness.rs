//! Seeded Monte Carlo campaigns over drops.
//!
//! Scenarios whose configs differ only in pooling or coordination mode form
//! a sweep group. Within a group each drop's network is built once and every
//! variant runs on it, so baseline and scenario see identical topologies and
//! channels. Drops run in parallel; results are collected in drop order, so
//! they do not depend on the worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CoordinationMode, PoolingMode, ValidatedConfig};
use crate::link_budget::{evaluate_slot, GainTable};
use crate::network::DropNetwork;
use crate::scheduler::{schedule_slot, SlotSchedule, ThroughputState};
use crate::stats::{confidence_interval, percentile, percentile_sorted, pooling_gain};
use crate::SimError;

/// Percentiles reported for every scenario.
pub const REPORT_PERCENTILES: [f64; 3] = [5.0, 50.0, 95.0];

/// A named config within a campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub id: String,
    pub cfg: ValidatedConfig,
}

impl Scenario {
    pub fn new(id: impl Into<String>, cfg: ValidatedConfig) -> Self {
        Scenario { id: id.into(), cfg }
    }
}

/// Runs the slot loop on one drop and returns per-UE long-term rates (the
/// time average of slot rates; 0 for unserved UEs).
pub fn simulate(table: &GainTable, cfg: &ValidatedConfig, mut trace: Option<&mut dyn FnMut(&SlotSchedule)>) -> Vec<f64> {
    let n = table.n_ues();
    let mut state = ThroughputState::new(n, cfg.pf_window);
    let mut total = vec![0.0; n];
    let mut rates = vec![0.0; n];
    for slot in 0..cfg.slots_per_drop {
        let schedule = schedule_slot(table, cfg.coordination, &state, slot);
        if let Some(t) = trace.as_mut() {
            t(&schedule);
        }
        rates.fill(0.0);
        for e in evaluate_slot(table, &schedule) {
            rates[e.ue] = e.rate_bps;
        }
        for (t, r) in total.iter_mut().zip(&rates) {
            *t += r;
        }
        state.update(&rates);
    }
    let slots = cfg.slots_per_drop as f64;
    total.iter_mut().for_each(|t| *t /= slots);
    total
}

/// Per-UE long-term rates of one drop.
pub fn run_drop(cfg: &ValidatedConfig, drop_index: u64) -> Result<Vec<f64>, SimError> {
    let net = DropNetwork::build(cfg, drop_index)?;
    let table = net.gain_table(cfg, &cfg.band_plan()?);
    Ok(simulate(&table, cfg, None))
}

/// Per-UE rates of one scenario, one vector per drop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateDistribution {
    pub scenario: Scenario,
    pub per_drop: Vec<Vec<f64>>,
}

impl RateDistribution {
    /// All drops' rates in one list.
    pub fn pooled(&self) -> Vec<f64> {
        self.per_drop.iter().flatten().copied().collect()
    }

    pub fn percentile(&self, p: f64) -> Result<f64, SimError> {
        Ok(percentile(&self.pooled(), p)?)
    }

    pub fn n_drops(&self) -> usize {
        self.per_drop.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainEntry {
    pub percentile: f64,
    pub baseline_bps: f64,
    pub scenario_bps: f64,
    pub gain_pct: f64,
    /// Half-width of the 95% interval on the per-drop gain; `None` with
    /// fewer than two usable drops.
    pub ci_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainReport {
    pub scenario_id: String,
    pub baseline_id: String,
    pub pooling: PoolingMode,
    pub coordination: CoordinationMode,
    pub carrier_ghz: f64,
    pub bs_density: f64,
    pub ue_array: String,
    pub n_drops: usize,
    pub entries: Vec<GainEntry>,
}

impl GainReport {
    pub fn entry(&self, percentile: f64) -> Option<&GainEntry> {
        self.entries.iter().find(|e| e.percentile == percentile)
    }
}

/// Paired gain of `scenario` over `baseline` at the reported percentiles.
pub fn gain_report(scenario: &RateDistribution, baseline: &RateDistribution) -> Result<GainReport, SimError> {
    let scen_all = scenario.pooled();
    let base_all = baseline.pooled();
    let mut entries = Vec::new();
    for p in REPORT_PERCENTILES {
        let per_drop: Vec<f64> = scenario
            .per_drop
            .iter()
            .zip(&baseline.per_drop)
            .filter_map(|(s, b)| pooling_gain(s, b, p).ok())
            .collect();
        entries.push(GainEntry {
            percentile: p,
            baseline_bps: percentile(&base_all, p)?,
            scenario_bps: percentile(&scen_all, p)?,
            gain_pct: pooling_gain(&scen_all, &base_all, p)?,
            ci_pct: confidence_interval(&per_drop).ok(),
        });
    }
    let cfg = &scenario.scenario.cfg;
    Ok(GainReport {
        scenario_id: scenario.scenario.id.clone(),
        baseline_id: baseline.scenario.id.clone(),
        pooling: cfg.pooling,
        coordination: cfg.coordination,
        carrier_ghz: cfg.carrier_ghz,
        bs_density: cfg.bs_density_per_op,
        ue_array: cfg.ue_array.to_string(),
        n_drops: scenario.n_drops(),
        entries,
    })
}

#[derive(Debug, Clone, Default)]
pub struct CampaignOptions {
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
    /// Print one line per finished drop to stderr.
    pub progress: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignResult {
    /// One per scenario, in input order.
    pub distributions: Vec<RateDistribution>,
    /// One per non-baseline scenario, in input order.
    pub reports: Vec<GainReport>,
}

impl CampaignResult {
    pub fn report(&self, scenario_id: &str) -> Option<&GainReport> {
        self.reports.iter().find(|r| r.scenario_id == scenario_id)
    }

    pub fn distribution(&self, scenario_id: &str) -> Option<&RateDistribution> {
        self.distributions.iter().find(|d| d.scenario.id == scenario_id)
    }
}

/// Indices of scenarios sharing a physical key, in order of first appearance.
pub fn sweep_groups(scenarios: &[Scenario]) -> Vec<Vec<usize>> {
    let mut keys: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, s) in scenarios.iter().enumerate() {
        let key = s.cfg.physical_key();
        match keys.iter().position(|k| *k == key) {
            Some(g) => groups[g].push(i),
            None => {
                keys.push(key);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

fn baseline_of(scenarios: &[Scenario], group: &[usize]) -> Option<usize> {
    group.iter().copied().find(|&i| scenarios[i].cfg.pooling == PoolingMode::Exclusive)
}

/// Runs every scenario for its `n_drops` drops and reports gains against the
/// exclusive baseline of each sweep group.
pub fn run_campaign(scenarios: &[Scenario], opts: &CampaignOptions) -> Result<CampaignResult, SimError> {
    let groups = sweep_groups(scenarios);
    for g in &groups {
        if baseline_of(scenarios, g).is_none() {
            return Err(SimError::MissingBaseline(scenarios[g[0]].id.clone()));
        }
        for &i in g {
            scenarios[i].cfg.band_plan()?;
        }
    }

    let work: Vec<(usize, u64)> = groups
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| (0..scenarios[g[0]].cfg.n_drops as u64).map(move |d| (gi, d)))
        .collect();
    let total = work.len();
    let run_item = |&(gi, drop): &(usize, u64)| -> Result<Vec<Vec<f64>>, SimError> {
        let group = &groups[gi];
        let net = DropNetwork::build(&scenarios[group[0]].cfg, drop)?;
        let out = group
            .iter()
            .map(|&i| {
                let cfg = &scenarios[i].cfg;
                let table = net.gain_table(cfg, &cfg.band_plan()?);
                Ok(simulate(&table, cfg, None))
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        if opts.progress {
            eprintln!("group {} drop {} done ({} work items)", gi, drop, total);
        }
        Ok(out)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    let results: Vec<Result<Vec<Vec<f64>>, SimError>> = pool.install(|| work.par_iter().map(run_item).collect());

    let mut per_drop: Vec<Vec<Vec<f64>>> = vec![Vec::new(); scenarios.len()];
    for ((gi, _), res) in work.iter().zip(results) {
        for (&i, rates) in groups[*gi].iter().zip(res?) {
            per_drop[i].push(rates);
        }
    }
    let distributions: Vec<RateDistribution> = scenarios
        .iter()
        .zip(per_drop)
        .map(|(s, per_drop)| RateDistribution { scenario: s.clone(), per_drop })
        .collect();

    let mut reports = Vec::new();
    for (i, s) in scenarios.iter().enumerate() {
        let group = groups.iter().find(|g| g.contains(&i)).expect("every scenario is grouped");
        let b = baseline_of(scenarios, group).expect("checked above");
        if b != i && s.cfg.pooling != PoolingMode::Exclusive {
            reports.push(gain_report(&distributions[i], &distributions[b])?);
        }
    }
    Ok(CampaignResult { distributions, reports })
}

/// Percentile `p` of each drop separately.
pub fn per_drop_percentiles(dist: &RateDistribution, p: f64) -> Result<Vec<f64>, SimError> {
    dist.per_drop
        .iter()
        .map(|rates| {
            let mut sorted = rates.clone();
            sorted.sort_by(f64::total_cmp);
            Ok(percentile_sorted(&sorted, p)?)
        })
        .collect()
}
