//! Random BS/UE placement on a square torus.

use std::f64::consts::TAU;
use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{DeploymentLaw, ValidatedConfig};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeploymentError {
    #[error("operator {operator} received no {kind}s")]
    ZeroNodes { operator: usize, kind: NodeKind },
    #[error("bearing is undefined between coincident points")]
    CoincidentPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Bs,
    Ue,
}

impl std::fmt::Display for NodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NodeKind::Bs => "bs",
            NodeKind::Ue => "ue",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub operator: usize,
    pub pos: Point,
}

/// All nodes of one drop. BSs and UEs are stored operator-major, so node ids
/// are stable for a given seed and density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub region_side: f64,
    pub n_operators: usize,
    pub bss: Vec<Node>,
    pub ues: Vec<Node>,
}

impl Topology {
    pub fn bss_of(&self, operator: usize) -> impl Iterator<Item = (usize, &Node)> {
        self.bss.iter().enumerate().filter(move |(_, n)| n.operator == operator)
    }

    pub fn ues_of(&self, operator: usize) -> impl Iterator<Item = (usize, &Node)> {
        self.ues.iter().enumerate().filter(move |(_, n)| n.operator == operator)
    }

    /// `operator,kind,x,y` lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "operator,kind,x,y")?;
        for (kind, nodes) in [(NodeKind::Bs, &self.bss), (NodeKind::Ue, &self.ues)] {
            for n in nodes {
                writeln!(w, "{},{},{},{}", n.operator, kind, n.pos.x, n.pos.y)?;
            }
        }
        Ok(())
    }
}

/// Shortest signed displacement along one wrapped axis.
fn wrap_delta(from: f64, to: f64, side: f64) -> f64 {
    let mut d = to - from;
    if d > side / 2.0 {
        d -= side;
    } else if d < -side / 2.0 {
        d += side;
    }
    d
}

/// Shortest wrap-around displacement `q − p`.
pub fn torus_displacement(p: Point, q: Point, region_side: f64) -> (f64, f64) {
    (wrap_delta(p.x, q.x, region_side), wrap_delta(p.y, q.y, region_side))
}

pub fn torus_distance(p: Point, q: Point, region_side: f64) -> f64 {
    let (dx, dy) = torus_displacement(p, q, region_side);
    dx.hypot(dy)
}

/// Azimuth of the shortest wrap-around displacement from `p` to `q`, in `[0, 2π)`.
pub fn bearing(p: Point, q: Point, region_side: f64) -> Result<f64, DeploymentError> {
    let (dx, dy) = torus_displacement(p, q, region_side);
    if dx == 0.0 && dy == 0.0 {
        return Err(DeploymentError::CoincidentPoints);
    }
    Ok(dy.atan2(dx).rem_euclid(TAU))
}

fn node_count<R: Rng>(law: DeploymentLaw, mean: f64, rng: &mut R) -> usize {
    match law {
        DeploymentLaw::FixedCount => mean.round() as usize,
        DeploymentLaw::Poisson => Poisson::new(mean).map_or(0, |p| p.sample(rng) as usize),
    }
}

/// Samples one drop's nodes. Identical `(cfg, drop_index)` gives an identical topology.
pub fn drop_network(cfg: &ValidatedConfig, drop_index: u64) -> Result<Topology, DeploymentError> {
    let mut rng = stream_rng(cfg.master_seed, drop_index, Stream::Topology, &[]);
    let side = cfg.region_side;
    let area = cfg.area_km2();
    let place = |kind: NodeKind, density: f64, rng: &mut rand_chacha::ChaCha8Rng| {
        let mut nodes = Vec::new();
        for operator in 0..cfg.n_operators {
            let n = node_count(cfg.deployment, density * area, rng);
            if n == 0 {
                return Err(DeploymentError::ZeroNodes { operator, kind });
            }
            nodes.extend((0..n).map(|_| Node {
                operator,
                pos: Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side),
            }));
        }
        Ok(nodes)
    };
    let bss = place(NodeKind::Bs, cfg.bs_density_per_op, &mut rng)?;
    let ues = place(NodeKind::Ue, cfg.ue_density_per_op, &mut rng)?;
    Ok(Topology { region_side: side, n_operators: cfg.n_operators, bss, ues })
}
