//! Micro-instances for comparing the scheduler with exhaustive search.
#![allow(dead_code)]

use poolsim::antenna::Beam;
use poolsim::config::{CoordinationMode, PoolingMode, ScenarioConfig};
use poolsim::harness::simulate;
use poolsim::link_budget::{evaluate_slot, GainTable, LinkBudgetParams, ServingLink};
use poolsim::network::DropNetwork;
use poolsim::scheduler::{schedule_slot, BeamAssignment, SlotSchedule, ThroughputState};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

#[derive(Debug, Clone)]
pub struct Micro {
    pub n_bs: usize,
    pub n_rf: usize,
    /// (bs, log10 signal gain) per UE
    pub ues: Vec<(usize, f64)>,
    /// log10 coupling per ordered pair `u * n + v`, `None` when absent
    pub couplings: Vec<Option<f64>>,
    pub averages: Vec<f64>,
}

pub fn micro() -> impl Strategy<Value = Micro> {
    (1usize..=2, 1usize..=2, 1usize..=4).prop_flat_map(|(n_bs, n_rf, n_ues)| {
        (
            prop::collection::vec((0..n_bs, -12.0..-8.0f64), n_ues),
            prop::collection::vec(prop::option::weighted(0.6, -14.0..-8.5f64), n_ues * n_ues),
            prop::collection::vec(6.0..9.5f64, n_ues),
        )
            .prop_map(move |(ues, couplings, avg)| Micro {
                n_bs,
                n_rf,
                ues,
                couplings,
                averages: avg.into_iter().map(|e| 10f64.powf(e)).collect(),
            })
    })
}

pub fn build(m: &Micro) -> GainTable {
    let params = LinkBudgetParams { noise_density_dbm_hz: -174.0, noise_figure_db: 7.0, sinr_cap: None };
    let bw = 300e6;
    let n = m.ues.len();
    let couplings = (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| v != u)
                .filter_map(|v| m.couplings[u * n + v].map(|e| (v, 10f64.powf(e))))
                .collect()
        })
        .collect();
    GainTable {
        n_operators: 1,
        ue_operator: vec![0; n],
        serving: m
            .ues
            .iter()
            .map(|&(bs, e)| {
                Some(ServingLink {
                    operator: 0,
                    bs,
                    bs_beam: Beam::new(0.0),
                    ue_beam: Beam::new(0.0),
                    signal_gain: 10f64.powf(e),
                    noise_mw: params.noise_mw(bw),
                    bandwidth_hz: bw,
                })
            })
            .collect(),
        couplings,
        n_bs: m.n_bs,
        bs_power_mw: 1000.0,
        n_rf_chains: m.n_rf,
        params,
    }
}

/// Realized slot for a UE subset: the BS power is split evenly over its beams.
pub fn schedule_of(table: &GainTable, ues: &[usize]) -> SlotSchedule {
    let load = |b: usize| ues.iter().filter(|&&u| table.serving[u].unwrap().bs == b).count();
    let assignments = ues
        .iter()
        .map(|&ue| {
            let l = table.serving[ue].unwrap();
            BeamAssignment { bs: l.bs, ue, bs_beam: l.bs_beam, ue_beam: l.ue_beam, power_mw: table.bs_power_mw / load(l.bs) as f64 }
        })
        .collect();
    SlotSchedule { slot: 0, assignments }
}

/// Σ ln T' over all UEs after one slot.
pub fn utility(table: &GainTable, state: &ThroughputState, schedule: &SlotSchedule) -> f64 {
    let mut rates = vec![0.0; table.n_ues()];
    for e in evaluate_slot(table, schedule) {
        rates[e.ue] = e.rate_bps;
    }
    let b = state.pf_window;
    state.averages.iter().zip(&rates).map(|(t, r)| ((1.0 - b) * t + b * r).ln()).sum()
}

pub fn feasible(table: &GainTable, ues: &[usize]) -> bool {
    (0..table.n_bs).all(|b| ues.iter().filter(|&&u| table.serving[u].unwrap().bs == b).count() <= table.n_rf_chains)
}

/// Objective gains over the empty slot: (scheduler, exhaustive optimum, best
/// single-beam schedule).
pub fn compare(table: &GainTable, state: &ThroughputState) -> (f64, f64, f64) {
    let n = table.n_ues();
    let empty = utility(table, state, &SlotSchedule::default());
    let (mut best, mut single) = (0.0f64, 0.0f64);
    for mask in 0u32..(1 << n) {
        let ues: Vec<usize> = (0..n).filter(|u| mask & (1 << u) != 0).collect();
        if feasible(table, &ues) {
            let x = utility(table, state, &schedule_of(table, &ues)) - empty;
            best = best.max(x);
            if ues.len() == 1 {
                single = single.max(x);
            }
        }
    }
    let got = utility(table, state, &schedule_slot(table, CoordinationMode::InterOperator, state, 0)) - empty;
    (got, best, single)
}

/// Sub-table of a real drop: the chosen UEs with their serving links and the
/// couplings among them, BSs renumbered.
pub fn sub_table(full: &GainTable, ues: &[usize], n_rf: usize) -> GainTable {
    let mut bss: Vec<usize> = ues.iter().map(|&u| full.serving[u].unwrap().bs).collect();
    bss.sort_unstable();
    bss.dedup();
    let serving = ues
        .iter()
        .map(|&u| {
            let mut l = full.serving[u].unwrap();
            l.bs = bss.iter().position(|&b| b == l.bs).unwrap();
            Some(l)
        })
        .collect();
    let couplings = ues
        .iter()
        .map(|&u| {
            full.couplings[u]
                .iter()
                .filter_map(|&(v, g)| ues.iter().position(|&x| x == v).map(|k| (k, g)))
                .collect()
        })
        .collect();
    GainTable {
        n_operators: full.n_operators,
        ue_operator: ues.iter().map(|&u| full.ue_operator[u]).collect(),
        serving,
        couplings,
        n_bs: bss.len(),
        bs_power_mw: full.bs_power_mw,
        n_rf_chains: n_rf,
        params: full.params,
    }
}

/// Micro-instances cut from real drops: each BS with up to two of its UEs,
/// plus the BS whose UEs couple most strongly into them with up to two of
/// its UEs, at 1 and 2 RF chains. Averages are the drop's long-term rates.
pub fn real_instances(bs_density: f64, drops: u64) -> Vec<(GainTable, ThroughputState)> {
    let cfg = ScenarioConfig {
        region_side: 300.0,
        bs_density_per_op: bs_density,
        pooling: PoolingMode::Full,
        coordination: CoordinationMode::InterOperator,
        slots_per_drop: 20,
        interference_floor_db: None,
        ..Default::default()
    }
    .validate()
    .unwrap();
    let mut out = Vec::new();
    for drop in 0..drops {
        let net = DropNetwork::build(&cfg, drop).unwrap();
        let full = net.gain_table(&cfg, &cfg.band_plan().unwrap());
        let rates = simulate(&full, &cfg, None);
        let served_by = |b: usize| -> Vec<usize> {
            (0..full.n_ues()).filter(|&u| full.serving[u].is_some_and(|l| l.bs == b)).take(2).collect()
        };
        for b0 in 0..full.n_bs {
            let mut ues = served_by(b0);
            if ues.is_empty() {
                continue;
            }
            let b1 = ues
                .iter()
                .flat_map(|&v| (0..full.n_ues()).map(move |u| (u, v)))
                .filter(|&(u, _)| full.serving[u].is_some_and(|l| l.bs != b0))
                .max_by(|a, b| full.coupling(a.0, a.1).total_cmp(&full.coupling(b.0, b.1)))
                .map(|(u, _)| full.serving[u].unwrap().bs);
            if let Some(b1) = b1 {
                ues.extend(served_by(b1));
            }
            for n_rf in 1..=2 {
                let state = ThroughputState { averages: ues.iter().map(|&u| rates[u].max(1.0)).collect(), pf_window: 0.1 };
                out.push((sub_table(&full, &ues, n_rf), state));
            }
        }
    }
    out
}

pub fn synthetic_instances(count: usize) -> Vec<(GainTable, ThroughputState)> {
    let mut runner = TestRunner::deterministic();
    (0..count)
        .map(|_| {
            let m = micro().new_tree(&mut runner).unwrap().current();
            let state = ThroughputState { averages: m.averages.clone(), pf_window: 0.1 };
            (build(&m), state)
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct RatioStats {
    pub instances: usize,
    pub below_bound: usize,
    pub below_single: usize,
    pub worst: f64,
    pub mean: f64,
}

/// Scheduler-to-optimum ratios; instances whose optimum gains nothing count as ratio 1.
pub fn ratio_stats(instances: &[(GainTable, ThroughputState)], bound: f64) -> RatioStats {
    let mut s = RatioStats { instances: instances.len(), below_bound: 0, below_single: 0, worst: 1.0, mean: 0.0 };
    for (table, state) in instances {
        let (got, best, single) = compare(table, state);
        let ratio = if best > 0.0 { got / best } else { 1.0 };
        if got < bound * best - 1e-12 {
            s.below_bound += 1;
        }
        if got < single - 1e-12 {
            s.below_single += 1;
        }
        s.worst = s.worst.min(ratio);
        s.mean += ratio / instances.len() as f64;
    }
    s
}
