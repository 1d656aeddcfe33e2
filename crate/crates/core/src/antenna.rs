//! Analog beamforming gains of half-wavelength uniform planar arrays.
//!
//! A `rows × cols` array stands vertically: its columns steer in elevation
//! and its rows in azimuth. For a direction at elevation `θ` and azimuth `φ`
//! off boresight the direction cosines are `sin θ` (vertical) and
//! `cos θ · sin φ` (horizontal), and the gain is the product of the two ULA
//! factors. At zero elevation everywhere this reduces to the plane model:
//! `rows` as a fixed factor times the `cols`-element azimuth pattern. A
//! mounted array faces a boresight; directions in its back half-plane see a
//! constant floor below peak gain.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::Cluster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AntennaError {
    #[error("link has no clusters")]
    EmptyClusters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub rows: u32,
    pub cols: u32,
}

impl ArrayGeometry {
    pub const OMNI: ArrayGeometry = ArrayGeometry { rows: 1, cols: 1 };

    pub const fn new(rows: u32, cols: u32) -> Self {
        ArrayGeometry { rows, cols }
    }

    pub fn elements(&self) -> u32 {
        self.rows * self.cols
    }

    pub fn is_omni(&self) -> bool {
        self.elements() == 1
    }

    pub fn peak_gain(&self) -> f64 {
        f64::from(self.elements())
    }
}

impl fmt::Display for ArrayGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl FromStr for ArrayGeometry {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected ROWSxCOLS, got `{s}`");
        let (r, c) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        Ok(ArrayGeometry::new(r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
    }
}

/// A steering direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    azimuth: f64,
    elevation: f64,
}

impl Beam {
    /// Horizontal beam.
    pub fn new(azimuth: f64) -> Self {
        Self::steered(azimuth, 0.0)
    }

    pub fn steered(azimuth: f64, elevation: f64) -> Self {
        Beam { azimuth: azimuth.rem_euclid(TAU), elevation }
    }

    /// Steering azimuth in `[0, 2π)`.
    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    /// Steering elevation, radians above the horizon.
    pub fn elevation(&self) -> f64 {
        self.elevation
    }
}

/// Array factor of an `n`-element half-wavelength ULA steered to direction
/// cosine `u0`, observed at `u`: `|Σ_k e^{jπk(u−u0)}|² / n`.
pub fn ula_gain_dircos(n: u32, u0: f64, u: f64) -> f64 {
    let n_f = f64::from(n);
    if n <= 1 {
        return 1.0;
    }
    let half = PI * (u - u0) / 2.0;
    let den = half.sin();
    if den.abs() < 1e-12 {
        return n_f;
    }
    let num = (n_f * half).sin();
    (num * num) / (n_f * den * den)
}

/// ULA gain with broadside along azimuth 0: `u = sin(obs)`, `u0 = sin(steer)`.
pub fn ula_gain(n: u32, steer_az: f64, obs_az: f64) -> f64 {
    ula_gain_dircos(n, steer_az.sin(), obs_az.sin())
}

/// Unmounted UPA gain in the horizontal plane: `rows × ula_gain(cols, steer, obs)`;
/// 1 for an omni array.
pub fn upa_gain(geom: ArrayGeometry, beam: Beam, obs_az: f64) -> f64 {
    upa_gain_at(geom, beam, obs_az, 0.0)
}

/// UPA gain with broadside along azimuth 0, observed at `(obs_az, obs_el)`.
pub fn upa_gain_at(geom: ArrayGeometry, beam: Beam, obs_az: f64, obs_el: f64) -> f64 {
    panel_gain(geom, beam.azimuth(), beam.elevation(), obs_az, obs_el)
}

/// Gain of a panel given angles relative to its broadside.
fn panel_gain(geom: ArrayGeometry, steer_az: f64, steer_el: f64, obs_az: f64, obs_el: f64) -> f64 {
    let v = ula_gain_dircos(geom.rows, steer_el.sin(), obs_el.sin());
    let h = ula_gain_dircos(geom.cols, steer_el.cos() * steer_az.sin(), obs_el.cos() * obs_az.sin());
    v * h
}

/// Anything with a directional power gain pattern.
pub trait Pattern {
    fn gain_at(&self, beam: Beam, obs_az: f64, obs_el: f64) -> f64;

    fn peak(&self) -> f64;

    /// Gain toward a horizontal direction.
    fn gain(&self, beam: Beam, obs_az: f64) -> f64 {
        self.gain_at(beam, obs_az, 0.0)
    }
}

impl Pattern for ArrayGeometry {
    fn gain_at(&self, beam: Beam, obs_az: f64, obs_el: f64) -> f64 {
        upa_gain_at(*self, beam, obs_az, obs_el)
    }

    fn peak(&self) -> f64 {
        self.peak_gain()
    }
}

/// `panels` identical faces spaced evenly around a node, the first facing
/// `boresight`. A beam is formed by the face closest to its steering
/// direction; that face sees a floor over its back half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MountedArray {
    pub geom: ArrayGeometry,
    pub boresight: f64,
    pub panels: u32,
    /// Back-plane gain as a fraction of the peak.
    back_fraction: f64,
}

impl MountedArray {
    pub fn new(geom: ArrayGeometry, boresight: f64, front_to_back_db: f64) -> Self {
        Self::with_panels(geom, boresight, 1, front_to_back_db)
    }

    pub fn with_panels(geom: ArrayGeometry, boresight: f64, panels: u32, front_to_back_db: f64) -> Self {
        MountedArray {
            geom,
            boresight: boresight.rem_euclid(TAU),
            panels: panels.max(1),
            back_fraction: 10f64.powf(-front_to_back_db / 10.0),
        }
    }

    /// Boresight of the face that forms `beam`.
    pub fn panel_boresight(&self, beam: Beam) -> f64 {
        let step = TAU / f64::from(self.panels);
        let k = (wrap_pi(beam.azimuth() - self.boresight) / step).round();
        (self.boresight + k * step).rem_euclid(TAU)
    }
}

/// Angle mapped to `(−π, π]`.
fn wrap_pi(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

impl Pattern for MountedArray {
    fn gain_at(&self, beam: Beam, obs_az: f64, obs_el: f64) -> f64 {
        if self.geom.is_omni() {
            return 1.0;
        }
        let face = self.panel_boresight(beam);
        let rel = wrap_pi(obs_az - face);
        if rel.abs() > FRAC_PI_2 {
            return self.geom.peak_gain() * self.back_fraction;
        }
        panel_gain(self.geom, beam.azimuth() - face, beam.elevation(), rel, obs_el)
    }

    fn peak(&self) -> f64 {
        self.geom.peak_gain()
    }
}

/// Which end of a link a beam is formed at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkEnd {
    Bs,
    Ue,
}

/// Steers at the strongest cluster; ties go to the lowest index.
pub fn best_beam(clusters: &[Cluster], end: LinkEnd) -> Result<Beam, AntennaError> {
    let mut best: Option<&Cluster> = None;
    for c in clusters {
        if best.is_none_or(|b| c.power_fraction > b.power_fraction) {
            best = Some(c);
        }
    }
    let c = best.ok_or(AntennaError::EmptyClusters)?;
    Ok(match end {
        LinkEnd::Bs => Beam::steered(c.aod, c.zod),
        LinkEnd::Ue => Beam::steered(c.aoa, c.zoa),
    })
}

/// Standard normal quantiles at `(l + ½)/16`, scaled to unit rms. A
/// cluster's subpaths sit at these offsets times its rms spread.
const SUBPATH_OFFSETS: [f64; 16] = {
    const HALF: [f64; 8] = [
        0.0815875452079,
        0.246807069745,
        0.418538267672,
        0.602582803187,
        0.80786119608,
        1.05088742612,
        1.37138075363,
        1.93815896165,
    ];
    let mut out = [0.0; 16];
    let mut i = 0;
    while i < 8 {
        out[7 - i] = -HALF[i];
        out[8 + i] = HALF[i];
        i += 1;
    }
    out
};

/// Departure offset `l` is paired with arrival offset `(5l + 3) mod 16`, so
/// the two ends' offsets are not correlated.
fn arrival_index(l: usize) -> usize {
    (5 * l + 3) % SUBPATH_OFFSETS.len()
}

/// Long-term gain of one cluster: the mean over its subpaths of
/// `G_bs(aod + δ_l, zod) · G_ue(aoa + ε_l, zoa)`.
pub fn cluster_gain<B: Pattern, U: Pattern>(c: &Cluster, bs_beam: Beam, ue_beam: Beam, bs: &B, ue: &U) -> f64 {
    if c.spread_dep == 0.0 && c.spread_arr == 0.0 {
        return bs.gain_at(bs_beam, c.aod, c.zod) * ue.gain_at(ue_beam, c.aoa, c.zoa);
    }
    let sum: f64 = (0..SUBPATH_OFFSETS.len())
        .map(|l| {
            let dep = c.aod + c.spread_dep * SUBPATH_OFFSETS[l];
            let arr = c.aoa + c.spread_arr * SUBPATH_OFFSETS[arrival_index(l)];
            bs.gain_at(bs_beam, dep, c.zod) * ue.gain_at(ue_beam, arr, c.zoa)
        })
        .sum();
    sum / SUBPATH_OFFSETS.len() as f64
}

/// Long-term beamformed gain `Σ_k frac_k · cluster_gain_k`.
pub fn effective_gain<B: Pattern, U: Pattern>(
    clusters: &[Cluster],
    bs_beam: Beam,
    ue_beam: Beam,
    bs: &B,
    ue: &U,
) -> Result<f64, AntennaError> {
    if clusters.is_empty() {
        return Err(AntennaError::EmptyClusters);
    }
    Ok(clusters
        .iter()
        .map(|c| c.power_fraction * cluster_gain(c, bs_beam, ue_beam, bs, ue))
        .sum())
}
