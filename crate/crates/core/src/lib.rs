//! System-level Monte Carlo simulator for spectrum pooling between mmWave
//! cellular operators.
//!
//! A drop places each operator's BSs and UEs on a wrap-around square,
//! realizes long-term channels for every BS–UE pair, associates UEs and then
//! schedules analog beams slot by slot under a proportional-fair objective.
//! Campaigns compare per-UE rate percentiles of partial or full pooling
//! against an exclusive band split on paired random numbers.

pub mod antenna;
pub mod band;
pub mod channel;
pub mod config;
pub mod deployment;
pub mod harness;
pub mod link_budget;
pub mod network;
pub mod presets;
pub mod report;
pub mod rng;
pub mod scheduler;
pub mod stats;

use thiserror::Error;

pub use config::{CoordinationMode, PoolingMode, ScenarioConfig, ValidatedConfig};
pub use harness::{run_campaign, run_drop, CampaignOptions, CampaignResult, GainReport, Scenario};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] config::ConfigErrors),
    #[error(transparent)]
    BandPlan(#[from] band::BandPlanError),
    #[error(transparent)]
    Deployment(#[from] deployment::DeploymentError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
    #[error("sweep group of `{0}` has no exclusive baseline")]
    MissingBaseline(String),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}
