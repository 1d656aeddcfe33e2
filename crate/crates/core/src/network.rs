//! One drop's network: nodes, mounted arrays, all BS–UE channels, association.
//!
//! Everything here depends only on the physical part of a config, so the
//! pooling and coordination variants of a scenario share one `DropNetwork`.
//! Band plans enter through [`DropNetwork::gain_table`].

use std::f64::consts::TAU;

use rand::Rng;

use crate::antenna::{best_beam, effective_gain, Beam, LinkEnd, MountedArray};
use crate::band::BandPlan;
use crate::channel::{realize_link, ChannelRealization};
use crate::config::ValidatedConfig;
use crate::deployment::{drop_network, Topology};
use crate::link_budget::{db_to_linear, dbm_to_mw, GainTable, LinkBudgetParams, ServingLink};
use crate::rng::{stream_rng, Stream};
use crate::scheduler::{associate, nominal_beam_power_dbm, Association};
use crate::SimError;

/// Channel realizations of every (BS, UE) pair, BS-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMatrix {
    n_ues: usize,
    links: Vec<ChannelRealization>,
}

impl LinkMatrix {
    pub fn new(n_bss: usize, n_ues: usize, links: Vec<ChannelRealization>) -> Self {
        assert_eq!(links.len(), n_bss * n_ues, "link matrix shape");
        LinkMatrix { n_ues, links }
    }

    pub fn get(&self, bs: usize, ue: usize) -> &ChannelRealization {
        &self.links[bs * self.n_ues + ue]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropNetwork {
    pub drop_index: u64,
    pub topology: Topology,
    pub bs_arrays: Vec<MountedArray>,
    pub ue_arrays: Vec<MountedArray>,
    pub links: LinkMatrix,
    pub association: Association,
    /// `(bs_beam, ue_beam)` of each served UE's link.
    pub serving_beams: Vec<Option<(Beam, Beam)>>,
}

impl DropNetwork {
    /// Deploys nodes, mounts arrays, realizes every channel and associates.
    /// Each link draws from its own keyed stream.
    pub fn build(cfg: &ValidatedConfig, drop_index: u64) -> Result<Self, SimError> {
        let topology = drop_network(cfg, drop_index)?;
        Ok(Self::from_topology(cfg, drop_index, topology))
    }

    /// Same as [`DropNetwork::build`] on a given set of nodes.
    pub fn from_topology(cfg: &ValidatedConfig, drop_index: u64, topology: Topology) -> Self {
        let seed = cfg.master_seed;
        let mount = |stream: Stream, id: usize, geom, panels| {
            let boresight = stream_rng(seed, drop_index, stream, &[id as u64]).random_range(0.0..TAU);
            MountedArray::with_panels(geom, boresight, panels, cfg.front_to_back_db)
        };
        let bs_arrays: Vec<MountedArray> =
            (0..topology.bss.len()).map(|b| mount(Stream::BsMount, b, cfg.bs_array, cfg.bs_panels)).collect();
        let ue_arrays: Vec<MountedArray> =
            (0..topology.ues.len()).map(|u| mount(Stream::UeMount, u, cfg.ue_array, cfg.ue_panels)).collect();

        let params = cfg.channel_params();
        let dh = cfg.bs_height - cfg.ue_height;
        let mut links = Vec::with_capacity(topology.bss.len() * topology.ues.len());
        for (b, bs) in topology.bss.iter().enumerate() {
            for (u, ue) in topology.ues.iter().enumerate() {
                let mut rng = stream_rng(seed, drop_index, Stream::Link, &[b as u64, u as u64]);
                links.push(realize_link(bs.pos, ue.pos, topology.region_side, dh, &params, &mut rng));
            }
        }
        let links = LinkMatrix::new(topology.bss.len(), topology.ues.len(), links);

        let tx_per_beam = nominal_beam_power_dbm(cfg.tx_power_dbm, cfg.n_rf_chains_bs);
        let association = associate(&topology, &links, &bs_arrays, &ue_arrays, tx_per_beam);
        let serving_beams = association
            .serving
            .iter()
            .enumerate()
            .map(|(u, bs)| {
                bs.map(|b| {
                    let c = &links.get(b, u).clusters;
                    (
                        best_beam(c, LinkEnd::Bs).expect("serving link has clusters"),
                        best_beam(c, LinkEnd::Ue).expect("serving link has clusters"),
                    )
                })
            })
            .collect();

        DropNetwork { drop_index, topology, bs_arrays, ue_arrays, links, association, serving_beams }
    }

    pub fn link(&self, bs: usize, ue: usize) -> &ChannelRealization {
        self.links.get(bs, ue)
    }

    /// Beamformed gain (with path gain) from `bs` steering `bs_beam` to UE
    /// `ue` receiving with `ue_beam`; 0 on outage.
    pub fn beamformed_gain(&self, bs: usize, bs_beam: Beam, ue: usize, ue_beam: Beam) -> f64 {
        let link = self.link(bs, ue);
        if link.is_outage() {
            return 0.0;
        }
        effective_gain(&link.clusters, bs_beam, ue_beam, &self.bs_arrays[bs], &self.ue_arrays[ue])
            .expect("non-outage link has clusters")
            * link.path_gain()
    }

    /// Long-term gains under a band plan: serving links plus all couplings
    /// between UEs whose bands overlap.
    pub fn gain_table(&self, cfg: &ValidatedConfig, plan: &BandPlan) -> GainTable {
        let params = LinkBudgetParams {
            noise_density_dbm_hz: cfg.noise_density_dbm_hz,
            noise_figure_db: cfg.noise_figure_db,
            sinr_cap: cfg.sinr_cap_db.map(db_to_linear),
        };
        let bs_power_mw = dbm_to_mw(cfg.tx_power_dbm);
        let ue_operator: Vec<usize> = self.topology.ues.iter().map(|n| n.operator).collect();
        let serving: Vec<Option<ServingLink>> = self
            .association
            .serving
            .iter()
            .enumerate()
            .map(|(u, bs)| {
                let b = (*bs)?;
                let (bs_beam, ue_beam) = self.serving_beams[u].expect("served UE has beams");
                let operator = ue_operator[u];
                let bandwidth_hz = plan.bandwidth_hz(operator);
                Some(ServingLink {
                    operator,
                    bs: b,
                    bs_beam,
                    ue_beam,
                    signal_gain: self.beamformed_gain(b, bs_beam, u, ue_beam),
                    noise_mw: params.noise_mw(bandwidth_hz),
                    bandwidth_hz,
                })
            })
            .collect();

        let floor = cfg.interference_floor_db.map(db_to_linear);
        let couplings = serving
            .iter()
            .enumerate()
            .map(|(u, link)| {
                let Some(src) = link else { return Vec::new() };
                serving
                    .iter()
                    .enumerate()
                    .filter_map(|(v, victim)| {
                        let victim = victim.as_ref()?;
                        if v == u || !plan.overlaps(src.operator, victim.operator) {
                            return None;
                        }
                        let g = self.beamformed_gain(src.bs, src.bs_beam, v, victim.ue_beam);
                        let keep = g > 0.0 && floor.is_none_or(|f| bs_power_mw * g >= f * victim.noise_mw);
                        keep.then_some((v, g))
                    })
                    .collect()
            })
            .collect();

        GainTable {
            n_operators: cfg.n_operators,
            ue_operator,
            serving,
            couplings,
            n_bs: self.topology.bss.len(),
            bs_power_mw,
            n_rf_chains: cfg.n_rf_chains_bs,
            params,
        }
    }
}
