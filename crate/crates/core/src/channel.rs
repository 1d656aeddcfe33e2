//! Long-term mmWave channel: link state, path loss with shadowing, and clusters.
//!
//! Link state probabilities, path loss and cluster statistics follow the
//! usual measurement-based mmWave model at 28 and 73 GHz. Clusters are single
//! spread in azimuth around their central angles, with an exponentially
//! distributed rms spread at each end. Every cluster of a link shares the
//! elevation of the direct path between the BS and the UE antennas.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deployment::{bearing, torus_distance, Point};

/// Minimum link distance, meters.
pub const MIN_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("operation is undefined on an outage link")]
    StateOutage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkState {
    Los,
    Nlos,
    Outage,
}

/// Path loss `alpha + beta·10·log10(d) + N(0, sigma²)`, all in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateParams {
    pub alpha_db: f64,
    pub beta: f64,
    pub sigma_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Outage decay, 1/m.
    pub a_out: f64,
    pub b_out: f64,
    /// LOS decay, 1/m.
    pub a_los: f64,
    pub los: StateParams,
    pub nlos: StateParams,
    pub lambda_clusters: f64,
    pub r_tau: f64,
    pub zeta_db: f64,
    /// Mean rms azimuth spread of a cluster at the BS and at the UE, degrees.
    pub aod_spread_deg: f64,
    pub aoa_spread_deg: f64,
}

impl ChannelParams {
    /// 28 GHz parameters (used up to 50 GHz).
    pub fn ghz28() -> Self {
        ChannelParams {
            a_out: 1.0 / 30.0,
            b_out: 5.2,
            a_los: 1.0 / 67.1,
            los: StateParams { alpha_db: 61.4, beta: 2.0, sigma_db: 5.8 },
            nlos: StateParams { alpha_db: 72.0, beta: 2.92, sigma_db: 8.7 },
            lambda_clusters: 1.8,
            r_tau: 2.8,
            zeta_db: 4.0,
            aod_spread_deg: 10.2,
            aoa_spread_deg: 15.5,
        }
    }

    pub fn ghz73() -> Self {
        ChannelParams {
            los: StateParams { alpha_db: 69.8, beta: 2.0, sigma_db: 5.8 },
            nlos: StateParams { alpha_db: 86.6, beta: 2.45, sigma_db: 8.0 },
            lambda_clusters: 1.9,
            aod_spread_deg: 10.5,
            aoa_spread_deg: 15.4,
            ..Self::ghz28()
        }
    }

    pub fn for_carrier(carrier_ghz: f64) -> Self {
        if carrier_ghz < 50.0 {
            Self::ghz28()
        } else {
            Self::ghz73()
        }
    }

    fn state(&self, state: LinkState) -> Result<&StateParams, ChannelError> {
        match state {
            LinkState::Los => Ok(&self.los),
            LinkState::Nlos => Ok(&self.nlos),
            LinkState::Outage => Err(ChannelError::StateOutage),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub power_fraction: f64,
    /// Departure azimuth at the BS, radians.
    pub aod: f64,
    /// Arrival azimuth at the UE, radians.
    pub aoa: f64,
    /// Departure elevation at the BS, radians above the horizon.
    #[serde(default)]
    pub zod: f64,
    /// Arrival elevation at the UE, radians above the horizon.
    #[serde(default)]
    pub zoa: f64,
    /// Rms azimuth spread around `aod` and `aoa`, radians.
    #[serde(default)]
    pub spread_dep: f64,
    #[serde(default)]
    pub spread_arr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub state: LinkState,
    /// Path loss including shadowing, dB; `+inf` for outage.
    pub path_loss_db: f64,
    /// Sorted by descending power fraction; empty iff outage.
    pub clusters: Vec<Cluster>,
}

impl ChannelRealization {
    pub fn outage() -> Self {
        ChannelRealization { state: LinkState::Outage, path_loss_db: f64::INFINITY, clusters: Vec::new() }
    }

    pub fn is_outage(&self) -> bool {
        self.state == LinkState::Outage
    }

    /// Linear channel gain `10^(−PL/10)`; exactly 0 for outage.
    pub fn path_gain(&self) -> f64 {
        if self.is_outage() {
            0.0
        } else {
            10f64.powf(-self.path_loss_db / 10.0)
        }
    }
}

/// `(p_out, p_los, p_nlos)` at distance `d`.
pub fn state_probabilities(d: f64, params: &ChannelParams) -> (f64, f64, f64) {
    let p_out = (1.0 - (-params.a_out * d + params.b_out).exp()).max(0.0);
    let p_los = (1.0 - p_out) * (-params.a_los * d).exp();
    let p_nlos = (1.0 - p_out - p_los).max(0.0);
    (p_out, p_los, p_nlos)
}

pub fn sample_state<R: Rng + ?Sized>(d: f64, params: &ChannelParams, rng: &mut R) -> LinkState {
    let (p_out, p_los, _) = state_probabilities(d, params);
    let u: f64 = rng.random();
    if u < p_out {
        LinkState::Outage
    } else if u < p_out + p_los {
        LinkState::Los
    } else {
        LinkState::Nlos
    }
}

fn normal_draw<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).map_or(0.0, |n| n.sample(rng))
    } else {
        0.0
    }
}

fn exp_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    if mean > 0.0 {
        Exp::new(1.0 / mean).map_or(0.0, |e| e.sample(rng))
    } else {
        0.0
    }
}

/// Path loss in dB with a shadowing draw; distance floored at [`MIN_DISTANCE`].
pub fn path_loss_db<R: Rng + ?Sized>(
    d: f64,
    state: LinkState,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<f64, ChannelError> {
    let sp = params.state(state)?;
    let shadow = normal_draw(sp.sigma_db, rng);
    Ok(sp.alpha_db + sp.beta * 10.0 * d.max(MIN_DISTANCE).log10() + shadow)
}

/// Draws the cluster set. In LOS the strongest cluster departs and arrives
/// along the geometric bearings.
pub fn gen_clusters<R: Rng + ?Sized>(
    state: LinkState,
    params: &ChannelParams,
    bearing_dep: f64,
    bearing_arr: f64,
    rng: &mut R,
) -> Result<Vec<Cluster>, ChannelError> {
    if state == LinkState::Outage {
        return Err(ChannelError::StateOutage);
    }
    let k = Poisson::new(params.lambda_clusters).map_or(0, |p| p.sample(rng) as usize).max(1);
    let mut powers: Vec<f64> = (0..k)
        .map(|_| {
            // open interval keeps U^(r−1) strictly positive
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            let z = normal_draw(params.zeta_db, rng);
            u.powf(params.r_tau - 1.0) * 10f64.powf(-0.1 * z)
        })
        .collect();
    let total: f64 = powers.iter().sum();
    powers.iter_mut().for_each(|p| *p /= total);
    powers.sort_by(|a, b| b.total_cmp(a));

    let mut clusters: Vec<Cluster> = powers
        .into_iter()
        .map(|power_fraction| Cluster {
            power_fraction,
            aod: rng.random_range(0.0..TAU),
            aoa: rng.random_range(0.0..TAU),
            zod: 0.0,
            zoa: 0.0,
            spread_dep: exp_draw(params.aod_spread_deg.to_radians(), rng),
            spread_arr: exp_draw(params.aoa_spread_deg.to_radians(), rng),
        })
        .collect();
    if state == LinkState::Los {
        clusters[0].aod = bearing_dep;
        clusters[0].aoa = bearing_arr;
    }
    Ok(clusters)
}

/// One long-term link realization from `bs` to `ue`, with the BS antenna
/// `height_diff` meters above the UE's.
pub fn realize_link<R: Rng + ?Sized>(
    bs: Point,
    ue: Point,
    region_side: f64,
    height_diff: f64,
    params: &ChannelParams,
    rng: &mut R,
) -> ChannelRealization {
    let d = torus_distance(bs, ue, region_side);
    let state = sample_state(d, params, rng);
    if state == LinkState::Outage {
        return ChannelRealization::outage();
    }
    // coincident nodes have no bearing; any direction will do
    let dep = bearing(bs, ue, region_side).unwrap_or(0.0);
    let arr = bearing(ue, bs, region_side).unwrap_or(std::f64::consts::PI);
    let path_loss_db = path_loss_db(d, state, params, rng).expect("state is not outage");
    let mut clusters = gen_clusters(state, params, dep, arr, rng).expect("state is not outage");
    let psi = height_diff.atan2(d.max(MIN_DISTANCE));
    for c in &mut clusters {
        c.zod = -psi;
        c.zoa = psi;
    }
    ChannelRealization { state, path_loss_db, clusters }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn no_shadow(mut p: ChannelParams) -> ChannelParams {
        p.los.sigma_db = 0.0;
        p.nlos.sigma_db = 0.0;
        p
    }

    #[test]
    fn probabilities_at_zero_distance() {
        assert_eq!(state_probabilities(0.0, &ChannelParams::ghz28()), (0.0, 1.0, 0.0));
    }

    #[test]
    fn outage_vanishes_at_threshold() {
        let p = ChannelParams::ghz28();
        let d = p.b_out / p.a_out; // 156 m
        assert!((d - 156.0).abs() < 1e-9);
        assert_eq!(state_probabilities(d, &p).0, 0.0);
        assert!(state_probabilities(d + 1.0, &p).0 > 0.0);
    }

    #[test]
    fn probabilities_at_200m() {
        // p_out = 1 − e^(−200/30 + 5.2), p_los = (1 − p_out)·e^(−200/67.1)
        let (p_out, p_los, p_nlos) = state_probabilities(200.0, &ChannelParams::ghz28());
        assert!((p_out - 0.769_306_8).abs() < 1e-6, "{p_out}");
        assert!((p_los - 0.011_710_2).abs() < 1e-6, "{p_los}");
        assert!((p_out + p_los + p_nlos - 1.0).abs() < 1e-15);
    }

    #[test]
    fn probabilities_sum_to_one_over_sweep() {
        for params in [ChannelParams::ghz28(), ChannelParams::ghz73()] {
            let mut prev = state_probabilities(0.0, &params);
            for i in 0..=10_000 {
                let (o, l, n) = state_probabilities(i as f64, &params);
                for x in [o, l, n] {
                    assert!((0.0..=1.0).contains(&x));
                }
                assert!((o + l + n - 1.0).abs() < 1e-12);
                assert!(l <= prev.1 + 1e-15 && o >= prev.0 - 1e-15);
                prev = (o, l, n);
            }
        }
    }

    #[test]
    fn sampled_states_match_probabilities() {
        let p = ChannelParams::ghz28();
        let n = 1_000_000;
        let mut r = rng(11);
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[match sample_state(200.0, &p, &mut r) {
                LinkState::Outage => 0,
                LinkState::Los => 1,
                LinkState::Nlos => 2,
            }] += 1;
        }
        let (o, l, nl) = state_probabilities(200.0, &p);
        for (c, prob) in counts.iter().zip([o, l, nl]) {
            let sigma = (prob * (1.0 - prob) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - prob).abs() < 3.0 * sigma);
        }
        let mut r = rng(2);
        assert!((0..1000).all(|_| sample_state(0.0, &p, &mut r) == LinkState::Los));
        assert!((0..1000).all(|_| sample_state(1e5, &p, &mut r) == LinkState::Outage));
    }

    #[test]
    fn path_loss_examples() {
        let p28 = no_shadow(ChannelParams::ghz28());
        let p73 = no_shadow(ChannelParams::ghz73());
        let mut r = rng(0);
        assert_eq!(path_loss_db(1.0, LinkState::Nlos, &p28, &mut r).unwrap(), 72.0);
        assert_eq!(path_loss_db(0.2, LinkState::Los, &p28, &mut r).unwrap(), 61.4);
        assert!((path_loss_db(100.0, LinkState::Nlos, &p28, &mut r).unwrap() - 130.4).abs() < 1e-9);
        assert!((path_loss_db(100.0, LinkState::Los, &p73, &mut r).unwrap() - 109.8).abs() < 1e-9);
        assert_eq!(path_loss_db(10.0, LinkState::Outage, &p28, &mut r), Err(ChannelError::StateOutage));
    }

    #[test]
    fn path_loss_increases_with_distance() {
        let p = no_shadow(ChannelParams::ghz73());
        let mut r = rng(0);
        for state in [LinkState::Los, LinkState::Nlos] {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..2000 {
                let pl = path_loss_db(1.0 + i as f64 * 0.5, state, &p, &mut r).unwrap();
                assert!(pl > prev);
                prev = pl;
            }
        }
    }

    #[test]
    fn shadowing_spread_matches_sigma() {
        let p = ChannelParams::ghz28();
        let mut r = rng(5);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| path_loss_db(1.0, LinkState::Nlos, &p, &mut r).unwrap() - p.nlos.alpha_db)
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let std = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((std / p.nlos.sigma_db - 1.0).abs() < 0.02, "std {std}");
    }

    #[test]
    fn single_los_cluster_points_along_bearings() {
        let p = ChannelParams { lambda_clusters: 1e-9, ..ChannelParams::ghz28() };
        let c = gen_clusters(LinkState::Los, &p, 1.0, 4.0, &mut rng(1)).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].power_fraction, 1.0);
        assert_eq!((c[0].aod, c[0].aoa), (1.0, 4.0));
    }

    #[test]
    fn cluster_fractions_are_normalized_and_sorted() {
        let p = ChannelParams::ghz73();
        let mut r = rng(9);
        for i in 0..20_000 {
            let state = if i % 2 == 0 { LinkState::Los } else { LinkState::Nlos };
            let c = gen_clusters(state, &p, 0.3, 3.4, &mut r).unwrap();
            assert!(!c.is_empty());
            assert!((c.iter().map(|c| c.power_fraction).sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(c.iter().all(|c| c.power_fraction > 0.0 && c.power_fraction <= 1.0));
            assert!(c.windows(2).all(|w| w[0].power_fraction >= w[1].power_fraction));
            assert!(c.iter().all(|c| (0.0..TAU).contains(&c.aod) && (0.0..TAU).contains(&c.aoa)));
        }
        assert_eq!(gen_clusters(LinkState::Outage, &p, 0.0, 0.0, &mut r), Err(ChannelError::StateOutage));
    }

    #[test]
    fn mean_cluster_count_matches_truncated_poisson() {
        // E[max(1, K)] for K ~ Poisson(λ), summed term by term
        let lambda: f64 = 1.8;
        let mut pmf = (-lambda).exp();
        let mut expected = pmf; // k = 0 contributes max(1, 0) = 1
        for k in 1..60 {
            pmf *= lambda / k as f64;
            expected += k as f64 * pmf;
        }
        let p = ChannelParams::ghz28();
        let mut r = rng(3);
        let n = 100_000;
        let counts: Vec<f64> = (0..n)
            .map(|_| gen_clusters(LinkState::Nlos, &p, 0.0, 0.0, &mut r).unwrap().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - expected).abs() < 3.0 * (var / n as f64).sqrt(), "{mean} vs {expected}");
    }

    #[test]
    fn realization_is_deterministic_and_consistent() {
        let p = ChannelParams::ghz28();
        let bs = Point::new(10.0, 10.0);
        let ue = Point::new(60.0, 40.0);
        let a = realize_link(bs, ue, 1000.0, 0.0, &p, &mut rng(4));
        let b = realize_link(bs, ue, 1000.0, 0.0, &p, &mut rng(4));
        assert_eq!(a, b);
        let out = ChannelRealization::outage();
        assert_eq!(out.path_gain(), 0.0);
        assert!(out.clusters.is_empty());
    }

    #[test]
    fn one_meter_link_is_mostly_los() {
        let p = ChannelParams::ghz28();
        let expected = (-1.0f64 / 67.1).exp(); // ≈ 0.985
        let n = 200_000;
        let mut r = rng(8);
        let los = (0..n)
            .filter(|_| realize_link(Point::new(0.0, 0.0), Point::new(1.0, 0.0), 1000.0, 0.0, &p, &mut r).state == LinkState::Los)
            .count();
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((los as f64 / n as f64 - expected).abs() < 3.0 * sigma);
    }
    #[test]
    fn cluster_spreads_are_exponential_with_configured_mean() {
        let p = ChannelParams::ghz28();
        let mut r = rng(21);
        let (mut dep, mut arr, mut n) = (0.0, 0.0, 0.0);
        for _ in 0..20_000 {
            for c in gen_clusters(LinkState::Nlos, &p, 0.0, 0.0, &mut r).unwrap() {
                assert!(c.spread_dep >= 0.0 && c.spread_arr >= 0.0);
                dep += c.spread_dep;
                arr += c.spread_arr;
                n += 1.0;
            }
        }
        // standard error of an exponential mean is mean/√n
        let tol = |m: f64| 4.0 * m / f64::sqrt(n);
        assert!((dep / n - 10.2f64.to_radians()).abs() < tol(10.2f64.to_radians()));
        assert!((arr / n - 15.5f64.to_radians()).abs() < tol(15.5f64.to_radians()));

        let flat = ChannelParams { aod_spread_deg: 0.0, aoa_spread_deg: 0.0, ..p };
        let c = gen_clusters(LinkState::Los, &flat, 1.0, 2.0, &mut r).unwrap();
        assert!(c.iter().all(|c| c.spread_dep == 0.0 && c.spread_arr == 0.0));
    }

    #[test]
    fn link_elevation_follows_height_difference() {
        let p = ChannelParams::ghz28();
        let (bs, ue) = (Point::new(0.0, 0.0), Point::new(30.0, 40.0));
        let mut r = rng(5);
        let link = (0..100)
            .map(|_| realize_link(bs, ue, 1000.0, 8.5, &p, &mut r))
            .find(|l| !l.is_outage())
            .unwrap();
        let psi = (8.5f64 / 50.0).atan();
        for c in &link.clusters {
            assert!((c.zoa - psi).abs() < 1e-12 && (c.zod + psi).abs() < 1e-12);
        }
        let flat = realize_link(bs, ue, 1000.0, 0.0, &p, &mut rng(5));
        assert!(flat.clusters.iter().all(|c| c.zod == 0.0 && c.zoa == 0.0));
    }

}
