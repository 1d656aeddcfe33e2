//! Noise, SINR and rate evaluation.
//!
//! Two routes compute the same SINRs. [`sinr_report`] works straight from the
//! channel realizations and array patterns; [`evaluate_slot`] uses the
//! precomputed long-term couplings of a [`GainTable`] and is what the
//! simulation loop runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antenna::{effective_gain, Beam};
use crate::band::BandPlan;
use crate::network::DropNetwork;
use crate::scheduler::SlotSchedule;

/// Thermal noise density at room temperature, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LinkBudgetError {
    #[error("UE {0} is not scheduled in this slot")]
    NotScheduled(usize),
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetParams {
    pub noise_density_dbm_hz: f64,
    pub noise_figure_db: f64,
    /// Linear SINR clamp; `None` disables it.
    pub sinr_cap: Option<f64>,
}

impl LinkBudgetParams {
    pub fn noise_dbm(&self, bandwidth_hz: f64) -> f64 {
        self.noise_density_dbm_hz + 10.0 * bandwidth_hz.log10() + self.noise_figure_db
    }

    pub fn noise_mw(&self, bandwidth_hz: f64) -> f64 {
        dbm_to_mw(self.noise_dbm(bandwidth_hz))
    }

    pub fn rate(&self, sinr: f64, bandwidth_hz: f64) -> f64 {
        slot_rate(sinr, bandwidth_hz, self.sinr_cap)
    }
}

/// `−174 + 10·log10(B) + NF`, in dBm.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// Shannon rate `B·log2(1 + min(sinr, cap))` in bit/s.
pub fn slot_rate(sinr: f64, bandwidth_hz: f64, sinr_cap: Option<f64>) -> f64 {
    let s = sinr_cap.map_or(sinr, |cap| sinr.min(cap)).max(0.0);
    bandwidth_hz * (1.0 + s).log2()
}

/// Serving link of one associated UE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServingLink {
    pub operator: usize,
    pub bs: usize,
    pub bs_beam: Beam,
    pub ue_beam: Beam,
    /// Beamformed gain times path gain (linear, no transmit power).
    pub signal_gain: f64,
    pub noise_mw: f64,
    pub bandwidth_hz: f64,
}

/// Long-term gains of one drop under one band plan.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTable {
    pub n_operators: usize,
    /// Operator of every UE, served or not.
    pub ue_operator: Vec<usize>,
    /// `None` for UEs without a usable BS.
    pub serving: Vec<Option<ServingLink>>,
    /// `couplings[u]` lists `(v, g)`: the beam serving `u` reaches victim `v`
    /// with gain `g` (including v's receive beam and path gain). Only UEs whose
    /// bands overlap are listed.
    pub couplings: Vec<Vec<(usize, f64)>>,
    pub n_bs: usize,
    pub bs_power_mw: f64,
    pub n_rf_chains: usize,
    pub params: LinkBudgetParams,
}

impl GainTable {
    pub fn n_ues(&self) -> usize {
        self.serving.len()
    }

    /// Per-beam power the scheduler assumes while building a slot.
    pub fn nominal_beam_power_mw(&self) -> f64 {
        self.bs_power_mw / self.n_rf_chains as f64
    }

    pub fn coupling(&self, interferer: usize, victim: usize) -> f64 {
        self.couplings[interferer]
            .iter()
            .find(|&&(v, _)| v == victim)
            .map_or(0.0, |&(_, g)| g)
    }
}

/// Per-UE SINR breakdown for one slot. Powers are linear mW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrEntry {
    pub ue: usize,
    pub signal_mw: f64,
    pub intra_mw: f64,
    pub inter_mw: f64,
    pub noise_mw: f64,
    pub sinr: f64,
    pub rate_bps: f64,
}

impl SinrEntry {
    fn new(ue: usize, signal_mw: f64, intra_mw: f64, inter_mw: f64, noise_mw: f64, bandwidth_hz: f64, params: &LinkBudgetParams) -> Self {
        let sinr = signal_mw / (intra_mw + inter_mw + noise_mw);
        SinrEntry { ue, signal_mw, intra_mw, inter_mw, noise_mw, sinr, rate_bps: params.rate(sinr, bandwidth_hz) }
    }

    pub fn signal_dbm(&self) -> f64 {
        mw_to_dbm(self.signal_mw)
    }

    pub fn intra_dbm(&self) -> f64 {
        mw_to_dbm(self.intra_mw)
    }

    pub fn inter_dbm(&self) -> f64 {
        mw_to_dbm(self.inter_mw)
    }

    pub fn noise_dbm(&self) -> f64 {
        mw_to_dbm(self.noise_mw)
    }

    pub fn sinr_db(&self) -> f64 {
        linear_to_db(self.sinr)
    }
}

/// SINR of every scheduled UE, from the gain table. Entries follow the
/// schedule's assignment order.
pub fn evaluate_slot(table: &GainTable, schedule: &SlotSchedule) -> Vec<SinrEntry> {
    let n = table.n_ues();
    let mut power = vec![0.0; n];
    for a in &schedule.assignments {
        power[a.ue] = a.power_mw;
    }
    let mut intra = vec![0.0; n];
    let mut inter = vec![0.0; n];
    for a in &schedule.assignments {
        let op = table.ue_operator[a.ue];
        for &(v, g) in &table.couplings[a.ue] {
            if power[v] > 0.0 {
                if table.ue_operator[v] == op {
                    intra[v] += a.power_mw * g;
                } else {
                    inter[v] += a.power_mw * g;
                }
            }
        }
    }
    schedule
        .assignments
        .iter()
        .map(|a| {
            let link = table.serving[a.ue].as_ref().expect("scheduled UE has a serving link");
            SinrEntry::new(
                a.ue,
                a.power_mw * link.signal_gain,
                intra[a.ue],
                inter[a.ue],
                link.noise_mw,
                link.bandwidth_hz,
                &table.params,
            )
        })
        .collect()
}

/// SINR of one scheduled UE computed directly from channel realizations.
/// Every other assignment whose operator band overlaps the UE's band
/// interferes; outage links contribute nothing.
pub fn sinr_report(
    ue: usize,
    schedule: &SlotSchedule,
    net: &DropNetwork,
    plan: &BandPlan,
    params: &LinkBudgetParams,
) -> Result<SinrEntry, LinkBudgetError> {
    let own = schedule
        .assignments
        .iter()
        .find(|a| a.ue == ue)
        .ok_or(LinkBudgetError::NotScheduled(ue))?;
    let ue_op = net.topology.ues[ue].operator;
    let ue_array = &net.ue_arrays[ue];
    let received = |bs: usize, bs_beam: Beam, power_mw: f64| {
        let link = net.link(bs, ue);
        if link.is_outage() {
            return 0.0;
        }
        let g = effective_gain(&link.clusters, bs_beam, own.ue_beam, &net.bs_arrays[bs], ue_array)
            .expect("non-outage link has clusters");
        power_mw * g * link.path_gain()
    };
    let signal = received(own.bs, own.bs_beam, own.power_mw);
    let (mut intra, mut inter) = (0.0, 0.0);
    for a in schedule.assignments.iter().filter(|a| a.ue != ue) {
        let op = net.topology.bss[a.bs].operator;
        if !plan.overlaps(op, ue_op) {
            continue;
        }
        let p = received(a.bs, a.bs_beam, a.power_mw);
        if op == ue_op {
            intra += p;
        } else {
            inter += p;
        }
    }
    let bw = plan.bandwidth_hz(ue_op);
    Ok(SinrEntry::new(ue, signal, intra, inter, params.noise_mw(bw), bw, params))
}
