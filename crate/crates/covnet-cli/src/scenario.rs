//! Scenario resolution shared by every command that takes one: an optional
//! JSON config file, with individual flag overrides applied on top of the
//! reference deployment.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use covnet::model::{Scenario, ScenarioConfig};

use crate::Failure;

/// Reference deployment: 10 km spacing, 500 m station range, 250 m vehicle
/// range, 2 Mb/s backhaul, 5 Mb/s contact rate, 15 and 25 m/s speeds,
/// 0.005 helpers per metre.
pub fn default_config() -> ScenarioConfig {
    ScenarioConfig {
        d_km: 10.0,
        r_i_m: 500.0,
        r0_m: 250.0,
        w_i_mbps: 2.0,
        w_v_mbps: 5.0,
        v1_mps: 15.0,
        v2_mps: 25.0,
        rho2_veh_per_m: 0.005,
        rho1_veh_per_m: None,
        num_infra: 20,
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario JSON file; flag overrides apply on top of it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Infrastructure spacing, km.
    #[arg(long)]
    pub d: Option<f64>,
    /// Infrastructure coverage radius, m.
    #[arg(long)]
    pub r_i: Option<f64>,
    /// Vehicle radio range, m.
    #[arg(long)]
    pub r0: Option<f64>,
    /// V2I rate, Mb/s.
    #[arg(long)]
    pub w_i: Option<f64>,
    /// V2V contact rate, Mb/s.
    #[arg(long)]
    pub w_v: Option<f64>,
    /// VoI speed, m/s.
    #[arg(long)]
    pub v1: Option<f64>,
    /// Helper speed, m/s.
    #[arg(long)]
    pub v2: Option<f64>,
    /// Helper density, vehicles per metre.
    #[arg(long)]
    pub rho2: Option<f64>,
    /// Same-direction density, vehicles per metre.
    #[arg(long)]
    pub rho1: Option<f64>,
    /// Stations in the event-driven corridor.
    #[arg(long)]
    pub num_infra: Option<u32>,
}

impl ScenarioArgs {
    /// The scenario this invocation describes, both as the normalized
    /// config and in validated form.
    pub fn resolve(&self) -> Result<(ScenarioConfig, Scenario), Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<ScenarioConfig>(&text)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
            }
            None => default_config(),
        };
        if let Some(v) = self.d {
            cfg.d_km = v;
        }
        if let Some(v) = self.r_i {
            cfg.r_i_m = v;
        }
        if let Some(v) = self.r0 {
            cfg.r0_m = v;
        }
        if let Some(v) = self.w_i {
            cfg.w_i_mbps = v;
        }
        if let Some(v) = self.w_v {
            cfg.w_v_mbps = v;
        }
        if let Some(v) = self.v1 {
            cfg.v1_mps = v;
        }
        if let Some(v) = self.v2 {
            cfg.v2_mps = v;
        }
        if let Some(v) = self.rho2 {
            cfg.rho2_veh_per_m = v;
        }
        if let Some(v) = self.rho1 {
            cfg.rho1_veh_per_m = Some(v);
        }
        if let Some(v) = self.num_infra {
            cfg.num_infra = v;
        }
        let s = Scenario::from_config(&cfg)?;
        Ok((cfg, s))
    }
}
