//! User association and proportional-fair slot scheduling.
//!
//! Association is long-term: each UE attaches to the own-operator BS with the
//! strongest best-beam received power and keeps it for the whole drop.
//!
//! Each slot a greedy coordinator picks (BS, UE) beams one at a time. A
//! candidate's score is the change of the PF objective `Σ ln T'` it would
//! cause, where `T' = (1−β)·T + β·r̂` and `r̂` are the rates predicted from the
//! beams already picked: its own gain minus the loss it inflicts on those
//! already scheduled. The best positive candidate is added until none is
//! left. With intra-operator coordination every operator runs this loop on
//! its own and cannot see the other operators' beams; with inter-operator
//! coordination one loop covers every operator.
//!
//! While building a slot every beam is assumed to carry `P/n_rf`; once the
//! beam count of a BS is fixed its power is split evenly over its beams.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::antenna::{best_beam, effective_gain, Beam, LinkEnd, MountedArray};
use crate::config::CoordinationMode;
use crate::deployment::Topology;
use crate::link_budget::{dbm_to_mw, mw_to_dbm, GainTable};
use crate::network::LinkMatrix;

/// Throughput floor, bit/s.
pub const THROUGHPUT_FLOOR: f64 = 1.0;

/// Serving BS of every UE; `None` when all own-operator links are in outage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Association {
    pub serving: Vec<Option<usize>>,
}

impl Association {
    pub fn served_count(&self) -> usize {
        self.serving.iter().flatten().count()
    }
}

/// Best-beam received power over one link, dBm; `None` on outage.
pub fn best_beam_rx_dbm(
    link: &crate::channel::ChannelRealization,
    bs_array: &MountedArray,
    ue_array: &MountedArray,
    tx_per_beam_dbm: f64,
) -> Option<f64> {
    if link.is_outage() {
        return None;
    }
    let bs_beam = best_beam(&link.clusters, LinkEnd::Bs).ok()?;
    let ue_beam = best_beam(&link.clusters, LinkEnd::Ue).ok()?;
    let g = effective_gain(&link.clusters, bs_beam, ue_beam, bs_array, ue_array).ok()?;
    Some(tx_per_beam_dbm - link.path_loss_db + 10.0 * g.log10())
}

/// Max-RSRP association over own-operator BSs, ties to the lowest BS id.
pub fn associate(
    topology: &Topology,
    links: &LinkMatrix,
    bs_arrays: &[MountedArray],
    ue_arrays: &[MountedArray],
    tx_per_beam_dbm: f64,
) -> Association {
    let serving = topology
        .ues
        .iter()
        .enumerate()
        .map(|(u, ue)| {
            let mut best: Option<(usize, f64)> = None;
            for (b, _) in topology.bss_of(ue.operator) {
                let Some(rx) = best_beam_rx_dbm(links.get(b, u), &bs_arrays[b], &ue_arrays[u], tx_per_beam_dbm)
                else {
                    continue;
                };
                if best.is_none_or(|(_, r)| rx > r) {
                    best = Some((b, rx));
                }
            }
            best.map(|(b, _)| b)
        })
        .collect();
    Association { serving }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamAssignment {
    pub bs: usize,
    pub ue: usize,
    pub bs_beam: Beam,
    pub ue_beam: Beam,
    pub power_mw: f64,
}

impl BeamAssignment {
    pub fn power_dbm(&self) -> f64 {
        mw_to_dbm(self.power_mw)
    }
}

/// All beams active in one slot, in selection order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SlotSchedule {
    pub slot: usize,
    pub assignments: Vec<BeamAssignment>,
}

impl SlotSchedule {
    /// `slot,bs,ue,steer_az,power_dbm` lines, without header.
    pub fn write_trace<W: Write>(&self, mut w: W) -> io::Result<()> {
        for a in &self.assignments {
            writeln!(w, "{},{},{},{:.6},{:.4}", self.slot, a.bs, a.ue, a.bs_beam.azimuth(), a.power_dbm())?;
        }
        Ok(())
    }
}

/// Exponentially weighted throughput per UE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputState {
    pub averages: Vec<f64>,
    pub pf_window: f64,
}

impl ThroughputState {
    pub fn new(n_ues: usize, pf_window: f64) -> Self {
        ThroughputState { averages: vec![THROUGHPUT_FLOOR; n_ues], pf_window }
    }

    /// `T ← max(ε, (1−β)·T + β·r)`; `rates` holds 0 for unscheduled UEs.
    pub fn update(&mut self, rates: &[f64]) {
        let beta = self.pf_window;
        for (t, &r) in self.averages.iter_mut().zip(rates) {
            *t = ((1.0 - beta) * *t + beta * r).max(THROUGHPUT_FLOOR);
        }
    }
}

/// `Σ ln T_u`.
pub fn pf_objective(state: &ThroughputState) -> f64 {
    state.averages.iter().map(|t| t.ln()).sum()
}

/// Coupling lists indexed both ways. Edge `e` of UE `u` lives at
/// `offsets[u] + k` for the `k`-th entry of `couplings[u]`.
struct Adjacency {
    offsets: Vec<usize>,
    /// `incoming[v]`: `(u, edge)` for every `u` whose beam couples into `v`.
    incoming: Vec<Vec<(usize, usize)>>,
}

impl Adjacency {
    fn new(table: &GainTable) -> Self {
        let mut offsets = Vec::with_capacity(table.n_ues() + 1);
        let mut incoming = vec![Vec::new(); table.n_ues()];
        let mut e = 0;
        for (u, list) in table.couplings.iter().enumerate() {
            offsets.push(e);
            for &(v, _) in list {
                incoming[v].push((u, e));
                e += 1;
            }
        }
        offsets.push(e);
        Adjacency { offsets, incoming }
    }
}

/// Working state of one greedy pass.
///
/// A candidate's score is `own + Σ harm`; the harm it would do to each
/// selected victim is kept per coupling edge and refreshed only when that
/// victim's interference changes.
struct Greedy<'a> {
    table: &'a GainTable,
    adj: &'a Adjacency,
    p_nom: f64,
    beta: f64,
    averages: &'a [f64],
    /// Coordination group of every UE; beams are visible only within a group.
    group: Vec<usize>,
    selected: Vec<bool>,
    /// Visible interference accumulated at nominal power.
    interference: Vec<f64>,
    /// `ln T'` of selected UEs under the current picks.
    term: Vec<f64>,
    bs_load: Vec<usize>,
    own: Vec<f64>,
    harm_sum: Vec<f64>,
    /// Harm per coupling edge toward a selected victim; 0 otherwise.
    edge_harm: Vec<f64>,
}

impl<'a> Greedy<'a> {
    fn new(table: &'a GainTable, adj: &'a Adjacency, averages: &'a [f64], beta: f64, group: Vec<usize>) -> Self {
        let n = table.n_ues();
        let mut g = Greedy {
            table,
            adj,
            p_nom: table.nominal_beam_power_mw(),
            beta,
            averages,
            group,
            selected: vec![false; n],
            interference: vec![0.0; n],
            term: vec![0.0; n],
            bs_load: vec![0; table.n_bs],
            own: vec![0.0; n],
            harm_sum: vec![0.0; n],
            edge_harm: vec![0.0; adj.offsets[n]],
        };
        for u in 0..n {
            if table.serving[u].is_some() {
                g.own[u] = g.own_gain(u);
            }
        }
        g
    }

    fn base(&self, u: usize) -> f64 {
        (1.0 - self.beta) * self.averages[u]
    }

    fn predicted_rate(&self, u: usize, interference: f64) -> f64 {
        let link = self.table.serving[u].as_ref().expect("candidate is served");
        let sinr = self.p_nom * link.signal_gain / (link.noise_mw + interference);
        self.table.params.rate(sinr, link.bandwidth_hz)
    }

    fn log_avg(&self, u: usize, rate: f64) -> f64 {
        (self.base(u) + self.beta * rate).max(THROUGHPUT_FLOOR).ln()
    }

    fn own_gain(&self, u: usize) -> f64 {
        self.log_avg(u, self.predicted_rate(u, self.interference[u])) - self.log_avg(u, 0.0)
    }

    /// Change of selected `v`'s term if a beam with coupling `g` joined.
    fn harm(&self, v: usize, g: f64) -> f64 {
        let r = self.predicted_rate(v, self.interference[v] + self.p_nom * g);
        self.log_avg(v, r) - self.term[v]
    }

    fn pickable(&self, u: usize) -> bool {
        match &self.table.serving[u] {
            Some(l) => !self.selected[u] && self.bs_load[l.bs] < self.table.n_rf_chains,
            None => false,
        }
    }

    /// Recomputes the harm every pickable UE coupling into selected `v` would do to it.
    fn refresh_victim(&mut self, v: usize) {
        let adj = self.adj;
        for &(x, e) in &adj.incoming[v] {
            if self.group[x] != self.group[v] || !self.pickable(x) {
                continue;
            }
            let g = self.table.couplings[x][e - adj.offsets[x]].1;
            let h = self.harm(v, g);
            self.harm_sum[x] += h - self.edge_harm[e];
            self.edge_harm[e] = h;
        }
    }

    fn add(&mut self, u: usize) {
        self.selected[u] = true;
        let bs = self.table.serving[u].as_ref().expect("candidate is served").bs;
        self.bs_load[bs] += 1;
        self.term[u] = self.log_avg(u, self.predicted_rate(u, self.interference[u]));
        self.refresh_victim(u);
        for &(v, g) in &self.table.couplings[u] {
            if self.group[v] != self.group[u] || self.table.serving[v].is_none() {
                continue;
            }
            self.interference[v] += self.p_nom * g;
            if self.selected[v] {
                self.term[v] = self.log_avg(v, self.predicted_rate(v, self.interference[v]));
                self.refresh_victim(v);
            } else {
                self.own[v] = self.own_gain(v);
            }
        }
    }

    /// Picks until no candidate improves the objective. Groups do not see
    /// each other, so one interleaved pass picks what separate passes would;
    /// the result is ordered by group, then by pick.
    fn run(mut self) -> Vec<usize> {
        let mut candidates: Vec<usize> = (0..self.table.n_ues()).filter(|&u| self.pickable(u)).collect();
        let mut picked = Vec::new();
        loop {
            candidates.retain(|&u| self.pickable(u));
            let mut best: Option<(usize, f64)> = None;
            for &u in &candidates {
                let d = self.own[u] + self.harm_sum[u];
                if d > 0.0 && best.is_none_or(|(_, bd)| d > bd) {
                    best = Some((u, d));
                }
            }
            match best {
                Some((u, _)) => {
                    self.add(u);
                    picked.push(u);
                }
                None => {
                    picked.sort_by_key(|&u| self.group[u]);
                    return picked;
                }
            }
        }
    }
}

/// Local search on a greedy selection under the realized even power split.
/// Moves remove a beam, swap a beam for another UE of the same BS, or add a
/// beam. Interference is visible within a group only, as in the greedy.
struct LocalSearch<'a> {
    table: &'a GainTable,
    beta: f64,
    averages: &'a [f64],
    group: &'a [usize],
    /// Realized beam power; 0 for unselected UEs.
    power: Vec<f64>,
    bs_beams: Vec<Vec<usize>>,
    bs_ues: Vec<Vec<usize>>,
    /// Visible interference at every UE from the selected beams.
    interference: Vec<f64>,
    /// Scratch interference change per UE, and the UEs it touches.
    delta: Vec<f64>,
    marked: Vec<bool>,
    touched: Vec<usize>,
    new_power: Vec<f64>,
}

/// Sweeps over all BSs before giving up on convergence.
const MAX_SWEEPS: usize = 20;

impl<'a> LocalSearch<'a> {
    fn new(table: &'a GainTable, averages: &'a [f64], beta: f64, group: &'a [usize], picked: &[usize]) -> Self {
        let n = table.n_ues();
        let mut ls = LocalSearch {
            table,
            beta,
            averages,
            group,
            power: vec![0.0; n],
            bs_beams: vec![Vec::new(); table.n_bs],
            bs_ues: vec![Vec::new(); table.n_bs],
            interference: vec![0.0; n],
            delta: vec![0.0; n],
            marked: vec![false; n],
            touched: Vec::new(),
            new_power: vec![0.0; n],
        };
        for (u, link) in table.serving.iter().enumerate() {
            if let Some(l) = link {
                ls.bs_ues[l.bs].push(u);
            }
        }
        for &u in picked {
            let b = ls.bs(u);
            ls.bs_beams[b].push(u);
        }
        let mut changes = Vec::new();
        for beams in &ls.bs_beams {
            let p = table.bs_power_mw / beams.len().max(1) as f64;
            changes.extend(beams.iter().map(|&u| (u, p)));
        }
        ls.apply(&changes);
        ls
    }

    fn bs(&self, u: usize) -> usize {
        self.table.serving[u].as_ref().expect("candidate is served").bs
    }

    fn term(&self, u: usize, power: f64, interference: f64) -> f64 {
        let link = self.table.serving[u].as_ref().expect("candidate is served");
        let r = if power > 0.0 {
            self.table.params.rate(power * link.signal_gain / (link.noise_mw + interference), link.bandwidth_hz)
        } else {
            0.0
        };
        ((1.0 - self.beta) * self.averages[u] + self.beta * r).max(THROUGHPUT_FLOOR).ln()
    }

    fn touch(&mut self, v: usize) {
        if !self.marked[v] {
            self.marked[v] = true;
            self.new_power[v] = self.power[v];
            self.touched.push(v);
        }
    }

    /// Stages new powers and the interference they cause in the scratch
    /// buffers.
    fn stage(&mut self, changes: &[(usize, f64)]) {
        for &(u, p) in changes {
            self.touch(u);
            self.new_power[u] = p;
        }
        for &(u, p) in changes {
            let dp = p - self.power[u];
            for &(v, g) in &self.table.couplings[u] {
                if self.group[v] == self.group[u] && self.table.serving[v].is_some() {
                    self.touch(v);
                    self.delta[v] += dp * g;
                }
            }
        }
    }

    fn clear(&mut self) {
        for v in self.touched.drain(..) {
            self.delta[v] = 0.0;
            self.marked[v] = false;
        }
    }

    /// Objective change if `changes` (UE, new power) were applied.
    fn gain(&mut self, changes: &[(usize, f64)]) -> f64 {
        self.stage(changes);
        let mut gain = 0.0;
        for &v in &self.touched {
            let (p0, p1) = (self.power[v], self.new_power[v]);
            if p0 > 0.0 || p1 > 0.0 {
                let i = self.interference[v];
                gain += self.term(v, p1, i + self.delta[v]) - self.term(v, p0, i);
            }
        }
        self.clear();
        gain
    }

    fn apply(&mut self, changes: &[(usize, f64)]) {
        for &(u, p) in changes {
            let dp = p - self.power[u];
            for &(v, g) in &self.table.couplings[u] {
                if self.group[v] == self.group[u] && self.table.serving[v].is_some() {
                    self.interference[v] += dp * g;
                }
            }
        }
        for &(u, p) in changes {
            self.power[u] = p;
        }
    }

    /// Candidate moves at BS `b`, each as a list of power changes.
    fn moves(&self, b: usize) -> Vec<Vec<(usize, f64)>> {
        let beams = &self.bs_beams[b];
        let k = beams.len();
        let budget = self.table.bs_power_mw;
        let mut moves = Vec::new();
        for &w in beams {
            let rest = beams.iter().filter(|&&c| c != w).map(|&c| (c, budget / (k - 1).max(1) as f64));
            moves.push(std::iter::once((w, 0.0)).chain(rest).collect());
        }
        for &u in self.bs_ues[b].iter().filter(|&&u| self.power[u] == 0.0) {
            for &w in beams {
                moves.push(vec![(w, 0.0), (u, self.power[w])]);
            }
            if k < self.table.n_rf_chains {
                let p = budget / (k + 1) as f64;
                moves.push(beams.iter().map(|&c| (c, p)).chain(std::iter::once((u, p))).collect());
            }
        }
        moves
    }

    fn idle(&self, u: usize) -> f64 {
        self.term(u, 0.0, 0.0)
    }

    /// Objective gain of the current selection over an empty slot, per group.
    fn group_gains(&self, n_groups: usize) -> Vec<f64> {
        let mut total = vec![0.0; n_groups];
        for u in 0..self.table.n_ues() {
            if self.power[u] > 0.0 {
                total[self.group[u]] += self.term(u, self.power[u], self.interference[u]) - self.idle(u);
            }
        }
        total
    }

    /// Best lone beam per group at full BS power.
    fn best_singles(&self, n_groups: usize) -> Vec<Option<(usize, f64)>> {
        let mut single: Vec<Option<(usize, f64)>> = vec![None; n_groups];
        for u in (0..self.table.n_ues()).filter(|&u| self.table.serving[u].is_some()) {
            let alone = self.term(u, self.table.bs_power_mw, 0.0) - self.idle(u);
            let g = self.group[u];
            if single[g].is_none_or(|(_, a)| alone > a) {
                single[g] = Some((u, alone));
            }
        }
        single
    }

    /// Applies the best improving move per BS, sweeping BSs in order until a
    /// sweep changes nothing.
    fn search(&mut self) {
        for _ in 0..MAX_SWEEPS {
            let mut changed = false;
            for b in 0..self.table.n_bs {
                loop {
                    let mut best: Option<(Vec<(usize, f64)>, f64)> = None;
                    for m in self.moves(b) {
                        let g = self.gain(&m);
                        if g > 1e-12 && best.as_ref().is_none_or(|(_, bg)| g > *bg) {
                            best = Some((m, g));
                        }
                    }
                    let Some((m, _)) = best else { break };
                    self.apply(&m);
                    self.bs_beams[b] = self.bs_ues[b].iter().copied().filter(|&u| self.power[u] > 0.0).collect();
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Selected UEs, keeping the order of `order` and appending the rest by index.
    fn selection(&self, order: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = order.iter().copied().filter(|&u| self.power[u] > 0.0).collect();
        out.extend((0..self.table.n_ues()).filter(|&u| self.power[u] > 0.0 && !order.contains(&u)));
        out
    }
}

/// UEs picked by the greedy, per coordination group, in selection order.
pub fn greedy_selection(table: &GainTable, mode: CoordinationMode, state: &ThroughputState) -> Vec<usize> {
    let group = match mode {
        CoordinationMode::InterOperator => vec![0; table.n_ues()],
        CoordinationMode::IntraOnly => table.ue_operator.clone(),
    };
    let adj = Adjacency::new(table);
    Greedy::new(table, &adj, &state.averages, state.pf_window, group).run()
}

/// Greedy selection refined by local search on the realized power split.
/// A coordination group falls back to its best lone beam if that beats the
/// refined selection.
pub fn select_beams(table: &GainTable, mode: CoordinationMode, state: &ThroughputState) -> Vec<usize> {
    let greedy = greedy_selection(table, mode, state);
    let group = match mode {
        CoordinationMode::InterOperator => vec![0; table.n_ues()],
        CoordinationMode::IntraOnly => table.ue_operator.clone(),
    };
    let n_groups = group.iter().max().map_or(0, |g| g + 1);
    let mut ls = LocalSearch::new(table, &state.averages, state.pf_window, &group, &greedy);
    ls.search();
    let gains = ls.group_gains(n_groups);
    let singles = ls.best_singles(n_groups);
    let refined = ls.selection(&greedy);
    let mut picked = Vec::new();
    for g in 0..n_groups {
        match singles[g] {
            Some((u, alone)) if alone > gains[g] + 1e-12 => picked.push(u),
            _ => picked.extend(refined.iter().filter(|&&u| group[u] == g)),
        }
    }
    picked
}

/// Builds one slot: refined greedy selection, then an even power split per BS.
pub fn schedule_slot(table: &GainTable, mode: CoordinationMode, state: &ThroughputState, slot: usize) -> SlotSchedule {
    let picked = select_beams(table, mode, state);
    let mut load = vec![0usize; table.n_bs];
    for &u in &picked {
        load[table.serving[u].as_ref().expect("picked UE is served").bs] += 1;
    }
    let assignments = picked
        .into_iter()
        .map(|u| {
            let link = table.serving[u].as_ref().expect("picked UE is served");
            BeamAssignment {
                bs: link.bs,
                ue: u,
                bs_beam: link.bs_beam,
                ue_beam: link.ue_beam,
                power_mw: table.bs_power_mw / load[link.bs] as f64,
            }
        })
        .collect();
    SlotSchedule { slot, assignments }
}

/// Per-beam nominal power in dBm for a BS budget split over `n_rf` chains.
pub fn nominal_beam_power_dbm(tx_power_dbm: f64, n_rf: usize) -> f64 {
    mw_to_dbm(dbm_to_mw(tx_power_dbm) / n_rf as f64)
}
