//! Pluggable model extensions for the event engine.
//!
//! The default triple (constant speeds, unit-disk links, constant rates)
//! reproduces the idealized setting the closed forms were derived in. Each
//! extension relaxes one assumption: Gaussian per-interval speeds, log-normal
//! shadowing on the link ranges, or Rayleigh-faded Shannon rates.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::SimError;

/// Links cannot get closer than this; keeps the path-loss term finite when
/// a traverse passes directly over a station.
pub const MIN_LINK_DISTANCE: f64 = 1.0;

/// Speed grid used when a model needs piecewise re-evaluation but the
/// mobility model is constant and supplies no interval of its own.
pub const DEFAULT_TAU: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MobilityModel {
    /// Every vehicle holds its configured speed for the whole run.
    #[default]
    Constant,
    /// Speeds redrawn from a clamped normal every `tau` seconds,
    /// independently per vehicle: N(v1, sigma1) for the VoI, N(v2, sigma2)
    /// for helpers.
    Gaussian { sigma1: f64, sigma2: f64, tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionModel {
    /// A link exists exactly within the nominal range.
    #[default]
    UnitDisk,
    /// Effective range redrawn per speed interval from a log-normal with
    /// `sigma` dB of zero-mean shadowing around the nominal range, which
    /// becomes the median; `alpha` is the path-loss exponent converting dB
    /// to range scale.
    LogNormal { alpha: f64, sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    /// Fixed nominal rates while a link is up.
    #[default]
    ConstantRate,
    /// Shannon rate with Rayleigh fading and inverse-square path loss,
    /// averaged over `segments` equal slices of each traverse.
    RayleighPathLoss {
        b_i_hz: f64,
        p_i_dbm: f64,
        b_v_hz: f64,
        p_v_dbm: f64,
        segments: u32,
    },
}

/// Which physical-layer extensions an event-driven run uses. The JSON form
/// mirrors the struct; omitted fields take the idealized defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub mobility: MobilityModel,
    pub connection: ConnectionModel,
    pub channel: ChannelModel,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Model(msg));
        if let MobilityModel::Gaussian { sigma1, sigma2, tau } = self.mobility {
            if !(sigma1.is_finite() && sigma1 >= 0.0) || !(sigma2.is_finite() && sigma2 >= 0.0) {
                return bad(format!("gaussian sigmas must be finite and >= 0, got {sigma1}, {sigma2}"));
            }
            if !(tau.is_finite() && tau > 0.0) {
                return bad(format!("gaussian tau must be finite and > 0, got {tau}"));
            }
        }
        if let ConnectionModel::LogNormal { alpha, sigma } = self.connection {
            if !(alpha.is_finite() && alpha > 0.0) {
                return bad(format!("log-normal alpha must be finite and > 0, got {alpha}"));
            }
            if !(sigma.is_finite() && sigma >= 0.0) {
                return bad(format!("log-normal sigma must be finite and >= 0, got {sigma}"));
            }
        }
        if let ChannelModel::RayleighPathLoss { b_i_hz, p_i_dbm, b_v_hz, p_v_dbm, segments } =
            self.channel
        {
            if !(b_i_hz.is_finite() && b_i_hz > 0.0) || !(b_v_hz.is_finite() && b_v_hz > 0.0) {
                return bad(format!("bandwidths must be finite and > 0, got {b_i_hz}, {b_v_hz}"));
            }
            if !p_i_dbm.is_finite() || !p_v_dbm.is_finite() {
                return bad(format!("powers must be finite, got {p_i_dbm}, {p_v_dbm}"));
            }
            if segments < 1 {
                return bad("segments must be >= 1".to_string());
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let m: ModelConfig = serde_json::from_str(text).map_err(|e| SimError::Model(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// True when every component is the idealized default the closed forms
    /// assume.
    pub fn is_idealized(&self) -> bool {
        *self == ModelConfig::default()
    }

    /// Name of the first non-default component, for error messages.
    pub fn extension_name(&self) -> Option<&'static str> {
        if !matches!(self.mobility, MobilityModel::Constant) {
            Some("gaussian mobility")
        } else if !matches!(self.connection, ConnectionModel::UnitDisk) {
            Some("log-normal connection")
        } else if !matches!(self.channel, ChannelModel::ConstantRate) {
            Some("rayleigh channel")
        } else {
            None
        }
    }
}

impl ChannelModel {
    /// Infrastructure-side link description for [`effective_rate`].
    pub fn infra_link(&self, radius: f64) -> Option<LinkProfile> {
        match *self {
            ChannelModel::RayleighPathLoss { b_i_hz, p_i_dbm, .. } => {
                Some(LinkProfile { radius, bandwidth_hz: b_i_hz, power_dbm: p_i_dbm })
            }
            ChannelModel::ConstantRate => None,
        }
    }

    /// Contact-side link description for [`effective_rate`].
    pub fn contact_link(&self, radius: f64) -> Option<LinkProfile> {
        match *self {
            ChannelModel::RayleighPathLoss { b_v_hz, p_v_dbm, .. } => {
                Some(LinkProfile { radius, bandwidth_hz: b_v_hz, power_dbm: p_v_dbm })
            }
            ChannelModel::ConstantRate => None,
        }
    }
}

/// One side of a radio link as the rate model sees it: the traverse runs
/// from `radius` away, through the closest point, back out to `radius`.
#[derive(Debug, Clone, Copy)]
pub struct LinkProfile {
    pub radius: f64,
    pub bandwidth_hz: f64,
    pub power_dbm: f64,
}

/// Shannon rate over a Rayleigh-faded inverse-square link: the fading
/// amplitude `beta` and path loss enter as a squared magnitude.
pub fn shannon_rate(bandwidth_hz: f64, power_dbm: f64, beta: f64, dist_m: f64) -> f64 {
    let d = dist_m.max(MIN_LINK_DISTANCE);
    let p = 10f64.powf(power_dbm / 10.0);
    let gain = beta / (d * d);
    bandwidth_hz * (1.0 + p * gain * gain).log2()
}

/// Average rate over one traverse of the link: the chord is split into the
/// channel's `segments` equal slices, each with its own fading draw and the
/// path loss of its midpoint distance.
pub fn effective_rate(
    channel: &ChannelModel,
    link: &LinkProfile,
    rng: &mut ChaCha12Rng,
) -> Result<f64, SimError> {
    let ChannelModel::RayleighPathLoss { segments, .. } = *channel else {
        return Err(SimError::Model(
            "effective_rate requires the rayleigh path-loss channel".to_string(),
        ));
    };
    let k = segments as usize;
    let seg = 2.0 * link.radius / k as f64;
    let mut sum = 0.0;
    for j in 0..k {
        let mid = -link.radius + (j as f64 + 0.5) * seg;
        let beta: f64 = rng.sample(StandardNormal);
        sum += shannon_rate(link.bandwidth_hz, link.power_dbm, beta, mid.abs());
    }
    Ok(sum / k as f64)
}
