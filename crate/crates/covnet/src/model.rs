//! Scenario types, validation, and regime classification.
//!
//! All internal quantities are SI: metres, seconds, bit/s, vehicles per
//! metre. Config files use friendlier units (km, Mb/s) with unit-suffixed
//! key names; parsing converts once at the boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    /// One entry per violated rule, so a bad config reports everything wrong
    /// with it at once.
    #[error("invalid scenario: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid helper configuration: {0}")]
    Helpers(String),
}

/// Which resource limits throughput at a given V2I rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeKind {
    /// Helpers leave infrastructure coverage with less data than they could
    /// deliver; throughput grows linearly with the V2I rate.
    InfrastructureLimited,
    /// Between the two thresholds only bounds are available in closed form.
    Transitional,
    /// Helper-to-VoI contact time is the bottleneck; raising the V2I rate
    /// buys nothing.
    V2VLimited,
}

impl std::fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegimeKind::InfrastructureLimited => "infrastructure-limited",
            RegimeKind::Transitional => "transitional",
            RegimeKind::V2VLimited => "v2v-limited",
        };
        f.write_str(s)
    }
}

/// Regime of a scenario together with the two V2I-rate thresholds that
/// delimit it. `w_lo`/`w_hi` partition (0, ∞): at or below `w_lo` the
/// scenario is infrastructure-limited, at or above `w_hi` it is V2V-limited.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub w_lo: f64,
    pub w_hi: f64,
}

/// Raw scenario parameters in SI units. `validate` turns them into a
/// [`Scenario`]; nothing else does, so a `Scenario` always satisfies the
/// geometric and kinematic invariants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Distance between adjacent infrastructure points (m).
    pub infra_spacing: f64,
    /// Infrastructure radio range r_I (m).
    pub infra_range: f64,
    /// Vehicle-to-vehicle radio range r 0 (m).
    pub vehicle_range: f64,
    /// Infrastructure-to-vehicle data rate w_I (bit/s).
    pub v2i_rate: f64,
    /// Vehicle-to-vehicle data rate w_V (bit/s).
    pub v2v_rate: f64,
    /// Speed of the VoI's direction of travel v1 (m/s).
    pub voi_speed: f64,
    /// Speed of the opposing helper stream v2 (m/s).
    pub helper_speed: f64,
    /// Density of the opposing helper stream ρ2 (vehicles/m).
    pub helper_density: f64,
    /// Density of the VoI's own direction ρ1 (vehicles/m). Recorded for
    /// provenance; the single-VoI analysis does not use it.
    pub same_dir_density: Option<f64>,
    /// Number of infrastructure points an event-driven run traverses.
    pub num_infra: u32,
}

impl ScenarioParams {
    pub fn validate(self) -> Result<Scenario, ModelError> {
        let mut bad = Vec::new();
        let mut finite = |name: &str, v: f64| {
            if !v.is_finite() {
                bad.push(format!("{name} must be finite, got {v}"));
                false
            } else {
                true
            }
        };
        let all_finite = [
            ("infra_spacing (d)", self.infra_spacing),
            ("infra_range (r_I)", self.infra_range),
            ("vehicle_range (r0)", self.vehicle_range),
            ("v2i_rate (w_I)", self.v2i_rate),
            ("v2v_rate (w_V)", self.v2v_rate),
            ("voi_speed (v1)", self.voi_speed),
            ("helper_speed (v2)", self.helper_speed),
            ("helper_density (rho2)", self.helper_density),
        ]
        .into_iter()
        .map(|(n, v)| finite(n, v))
        .fold(true, |a, b| a && b);
        if let Some(r1) = self.same_dir_density {
            if !r1.is_finite() || r1 < 0.0 {
                bad.push(format!(
                    "same_dir_density (rho1) must be finite and >= 0, got {r1}"
                ));
            }
        }
        if all_finite {
            if self.vehicle_range <= 0.0 {
                bad.push(format!(
                    "vehicle_range (r0) must be positive, got {}",
                    self.vehicle_range
                ));
            }
            if self.infra_range <= self.vehicle_range {
                bad.push(format!(
                    "infra_range (r_I) must exceed vehicle_range (r0): {} <= {}",
                    self.infra_range, self.vehicle_range
                ));
            }
            if self.infra_spacing <= 2.0 * self.infra_range {
                bad.push(format!(
                    "infra_spacing (d) must exceed 2*infra_range (adjacent coverage \
                     regions must not overlap): {} <= {}",
                    self.infra_spacing,
                    2.0 * self.infra_range
                ));
            }
            if self.voi_speed <= 0.0 {
                bad.push(format!("voi_speed (v1) must be positive, got {}", self.voi_speed));
            }
            if self.helper_speed <= 0.0 {
                bad.push(format!(
                    "helper_speed (v2) must be positive, got {}",
                    self.helper_speed
                ));
            }
            if self.v2i_rate < 0.0 {
                bad.push(format!("v2i_rate (w_I) must be >= 0, got {}", self.v2i_rate));
            }
            if self.v2v_rate <= 0.0 {
                bad.push(format!("v2v_rate (w_V) must be positive, got {}", self.v2v_rate));
            }
            if self.helper_density < 0.0 {
                bad.push(format!(
                    "helper_density (rho2) must be >= 0, got {}",
                    self.helper_density
                ));
            }
        }
        if self.num_infra < 2 {
            bad.push(format!("num_infra must be at least 2, got {}", self.num_infra));
        }
        if bad.is_empty() {
            Ok(Scenario(self))
        } else {
            Err(ModelError::Validation(bad))
        }
    }
}

/// A validated scenario. Construct via [`ScenarioParams::validate`] or
/// [`Scenario::from_config`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Scenario(ScenarioParams);

impl Scenario {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self, ModelError> {
        cfg.to_params().validate()
    }

    /// Parse and validate a JSON config document.
    pub fn from_config_str(json: &str) -> Result<Self, ModelError> {
        let cfg: ScenarioConfig = serde_json::from_str(json)?;
        Self::from_config(&cfg)
    }

    pub fn params(&self) -> &ScenarioParams {
        &self.0
    }

    pub fn to_config(&self) -> ScenarioConfig {
        ScenarioConfig {
            d_km: self.0.infra_spacing / 1e3,
            r_i_m: self.0.infra_range,
            r0_m: self.0.vehicle_range,
            w_i_mbps: self.0.v2i_rate / 1e6,
            w_v_mbps: self.0.v2v_rate / 1e6,
            v1_mps: self.0.voi_speed,
            v2_mps: self.0.helper_speed,
            rho2_veh_per_m: self.0.helper_density,
            rho1_veh_per_m: self.0.same_dir_density,
            num_infra: self.0.num_infra,
        }
    }

    pub fn infra_spacing(&self) -> f64 {
        self.0.infra_spacing
    }
    pub fn infra_range(&self) -> f64 {
        self.0.infra_range
    }
    pub fn vehicle_range(&self) -> f64 {
        self.0.vehicle_range
    }
    pub fn v2i_rate(&self) -> f64 {
        self.0.v2i_rate
    }
    pub fn v2v_rate(&self) -> f64 {
        self.0.v2v_rate
    }
    pub fn voi_speed(&self) -> f64 {
        self.0.voi_speed
    }
    pub fn helper_speed(&self) -> f64 {
        self.0.helper_speed
    }
    pub fn helper_density(&self) -> f64 {
        self.0.helper_density
    }
    pub fn same_dir_density(&self) -> Option<f64> {
        self.0.same_dir_density
    }
    pub fn num_infra(&self) -> u32 {
        self.0.num_infra
    }

    /// Combined closing speed of the VoI and the opposing stream.
    pub fn closing_speed(&self) -> f64 {
        self.0.voi_speed + self.0.helper_speed
    }

    /// Copy with a different V2I rate (the usual sweep axis).
    pub fn with_v2i_rate(&self, w_i: f64) -> Result<Self, ModelError> {
        let mut p = self.0;
        p.v2i_rate = w_i;
        p.validate()
    }

    pub fn with_spacing(&self, d: f64) -> Result<Self, ModelError> {
        let mut p = self.0;
        p.infra_spacing = d;
        p.validate()
    }

    pub fn with_helper_density(&self, rho2: f64) -> Result<Self, ModelError> {
        let mut p = self.0;
        p.helper_density = rho2;
        p.validate()
    }

    /// Length of road, measured in the frame moving with the helpers, that
    /// streams past the VoI during one cycle's V2V phase. Helpers whose
    /// relative coordinate falls in [0, span] are the ones that can relay
    /// during the cycle.
    pub fn relative_span(&self) -> f64 {
        let p = &self.0;
        (p.infra_spacing - 2.0 * p.infra_range) * self.closing_speed() / p.voi_speed
            + p.vehicle_range
    }

    /// V2I-rate thresholds delimiting the three regimes, and where this
    /// scenario's rate falls. Boundaries are inclusive on the outer regimes:
    /// w_I = w_lo classifies as infrastructure-limited, w_I = w_hi as
    /// V2V-limited.
    pub fn regime(&self) -> Regime {
        let p = &self.0;
        let w_hi = p.v2v_rate * p.helper_speed / self.closing_speed();
        let w_lo = w_hi * p.vehicle_range / p.infra_range;
        let kind = if p.v2i_rate <= w_lo {
            RegimeKind::InfrastructureLimited
        } else if p.v2i_rate >= w_hi {
            RegimeKind::V2VLimited
        } else {
            RegimeKind::Transitional
        };
        Regime { kind, w_lo, w_hi }
    }
}

/// JSON config schema. Keys carry unit suffixes; unknown keys are rejected
/// so a typo cannot silently fall back to a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub d_km: f64,
    #[serde(rename = "rI_m")]
    pub r_i_m: f64,
    pub r0_m: f64,
    #[serde(rename = "wI_mbps")]
    pub w_i_mbps: f64,
    #[serde(rename = "wV_mbps")]
    pub w_v_mbps: f64,
    pub v1_mps: f64,
    pub v2_mps: f64,
    pub rho2_veh_per_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho1_veh_per_m: Option<f64>,
    #[serde(default = "default_num_infra")]
    pub num_infra: u32,
}

fn default_num_infra() -> u32 {
    20
}

impl ScenarioConfig {
    pub fn to_params(&self) -> ScenarioParams {
        ScenarioParams {
            infra_spacing: self.d_km * 1e3,
            infra_range: self.r_i_m,
            vehicle_range: self.r0_m,
            v2i_rate: self.w_i_mbps * 1e6,
            v2v_rate: self.w_v_mbps * 1e6,
            voi_speed: self.v1_mps,
            helper_speed: self.v2_mps,
            helper_density: self.rho2_veh_per_m,
            same_dir_density: self.rho1_veh_per_m,
            num_infra: self.num_infra,
        }
    }
}

/// Helper vehicles met during one cycle, as sorted coordinates in the
/// relative frame [0, span]. The distance from 0 to the first helper and the
/// inter-helper gaps are what the per-cycle schedule mathematics consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct HelperConfig {
    positions: Vec<f64>,
}

impl HelperConfig {
    pub fn empty() -> Self {
        HelperConfig { positions: Vec::new() }
    }

    /// Positions must be finite, non-negative, and sorted ascending.
    pub fn from_positions(positions: Vec<f64>) -> Result<Self, ModelError> {
        for (i, &x) in positions.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(ModelError::Helpers(format!(
                    "position {i} must be finite and >= 0, got {x}"
                )));
            }
            if i > 0 && x < positions[i - 1] {
                return Err(ModelError::Helpers(format!(
                    "positions must be sorted ascending: position {i} ({x}) < position {} ({})",
                    i - 1,
                    positions[i - 1]
                )));
            }
        }
        Ok(HelperConfig { positions })
    }

    /// Build from the first helper's offset and the n−1 inter-helper gaps.
    pub fn from_gaps(first_offset: f64, gaps: &[f64]) -> Result<Self, ModelError> {
        if !first_offset.is_finite() || first_offset < 0.0 {
            return Err(ModelError::Helpers(format!(
                "first offset must be finite and >= 0, got {first_offset}"
            )));
        }
        let mut positions = Vec::with_capacity(gaps.len() + 1);
        let mut x = first_offset;
        positions.push(x);
        for (i, &g) in gaps.iter().enumerate() {
            if !g.is_finite() || g < 0.0 {
                return Err(ModelError::Helpers(format!(
                    "gap {i} must be finite and >= 0, got {g}"
                )));
            }
            x += g;
            positions.push(x);
        }
        Ok(HelperConfig { positions })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn first_offset(&self) -> Option<f64> {
        self.positions.first().copied()
    }

    pub fn last_position(&self) -> Option<f64> {
        self.positions.last().copied()
    }

    /// The n−1 inter-helper gaps.
    pub fn gaps(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Number of maximal runs of helpers whose consecutive gaps stay within
    /// `threshold` (the cluster count used in trace reporting).
    pub fn cluster_count(&self, threshold: f64) -> usize {
        if self.positions.is_empty() {
            return 0;
        }
        1 + self
            .positions
            .windows(2)
            .filter(|w| w[1] - w[0] > threshold)
            .count()
    }
}
