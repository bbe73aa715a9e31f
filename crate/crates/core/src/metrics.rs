//! Received SNRs and achievable secrecy rates.
//!
//! Two independent routes produce the same numbers under the optimal
//! surface profile:
//!
//! - [`pipeline_sample`] builds every vector, applies `Theta*` and an MRT
//!   precoder, and measures the received powers.
//! - [`closed_form_sample`] uses `gamma_B = l_A l_B M N^2 P / sigma^2` and
//!   `gamma_E = l_A l_E M P / sigma^2 |g_E^H g_B|^2` with the array factor
//!   evaluated in closed form.

use std::f64::consts::{LN_2, PI};

use crate::channel::{build_channels, ChannelSet, LinkGeometry, SystemConfig};
use crate::reflection::{
    mrt_precoder, optimal_phase_shifts, received_gain, PhaseShiftProfile, Precoder,
};
use crate::{Error, Result};

/// One channel realization's outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecySample {
    pub snr_bob: f64,
    pub snr_eve: f64,
    pub secrecy_rate_bps_hz: f64,
}

impl SecrecySample {
    pub fn from_snrs(snr_bob: f64, snr_eve: f64) -> Self {
        Self {
            snr_bob,
            snr_eve,
            secrecy_rate_bps_hz: secrecy_rate(snr_bob, snr_eve),
        }
    }
}

/// `[log2(1 + gamma_B) - log2(1 + gamma_E)]^+`.
pub fn secrecy_rate(snr_bob: f64, snr_eve: f64) -> f64 {
    let r = (snr_bob.ln_1p() - snr_eve.ln_1p()) / LN_2;
    r.max(0.0)
}

/// Unclamped log-ratio, useful when the caller needs the sign.
pub fn rate_difference(snr_bob: f64, snr_eve: f64) -> f64 {
    (snr_bob.ln_1p() - snr_eve.ln_1p()) / LN_2
}

/// `(gamma_B, gamma_E)` with MRT precoding for the given surface profile.
///
/// When Bob sits in an exact null the MRT direction is undefined; the limit
/// direction `g_A / sqrt(M)` is used instead, which leaves `gamma_B = 0`.
pub fn received_snrs(
    cfg: &SystemConfig,
    channels: &ChannelSet,
    profile: &PhaseShiftProfile,
) -> Result<(f64, f64)> {
    let noise = cfg.noise_power_watts()?;
    if noise.is_nan() || noise <= 0.0 {
        return Err(Error::invalid(
            "noise_density_dbm_hz",
            format!("noise power must be positive, got {noise:e} W"),
        ));
    }
    let w = match mrt_precoder(channels, profile) {
        Ok(w) => w,
        Err(Error::DegenerateCascade { .. }) => {
            Precoder::from_weights(channels.g_alice_ris.entries().to_vec())?
        }
        Err(e) => return Err(e),
    };
    let p = cfg.tx_power_watts;
    let bob = received_gain(&channels.h_bob(), profile, channels, &w)?;
    let eve = received_gain(&channels.h_eve(), profile, channels, &w)?;
    Ok((p * bob / noise, p * eve / noise))
}

/// Full vector pipeline under the optimal profile `Theta*`.
pub fn pipeline_sample(cfg: &SystemConfig, geom: &LinkGeometry) -> Result<SecrecySample> {
    let channels = build_channels(cfg, geom)?;
    let profile = optimal_phase_shifts(
        geom.aoa_ris_rad,
        geom.aod_bob_rad,
        cfg.n_ris_elements,
        cfg.element_spacing_ratio,
    )?;
    let (b, e) = received_snrs(cfg, &channels, &profile)?;
    Ok(SecrecySample::from_snrs(b, e))
}

/// `|sum_{k<n} e^{j k delta}|^2`, the squared gain `|g_E^H g_B|^2` of two
/// `n`-element steering vectors whose phase steps differ by `delta`.
pub fn array_factor_sq(n: usize, delta: f64) -> f64 {
    let half = 0.5 * delta;
    let s = half.sin();
    if s.abs() < 1e-3 {
        let (re, im) = (0..n).fold((0.0, 0.0), |(re, im), k| {
            let (sin, cos) = (k as f64 * delta).sin_cos();
            (re + cos, im + sin)
        });
        re * re + im * im
    } else {
        let r = (n as f64 * half).sin() / s;
        r * r
    }
}

/// Link-budget prefactors for fixed distances; angles enter per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    n: usize,
    spacing_ratio: f64,
    /// `l_A l_B M P / sigma^2`.
    pub bob_scale: f64,
    /// `l_A l_E M P / sigma^2`.
    pub eve_scale: f64,
}

impl ClosedForm {
    pub fn new(cfg: &SystemConfig, d_alice: f64, d_bob: f64, d_eve: f64) -> Result<Self> {
        cfg.validate()?;
        let (la, lb, le) = (
            cfg.path_loss(d_alice)?,
            cfg.path_loss(d_bob)?,
            cfg.path_loss(d_eve)?,
        );
        Self::from_losses(cfg, la, lb, le)
    }

    pub fn from_losses(cfg: &SystemConfig, l_a: f64, l_b: f64, l_e: f64) -> Result<Self> {
        let noise = cfg.noise_power_watts()?;
        let common = l_a * cfg.m_tx_antennas as f64 * cfg.tx_power_watts / noise;
        Ok(Self {
            n: cfg.n_ris_elements,
            spacing_ratio: cfg.element_spacing_ratio,
            bob_scale: common * l_b,
            eve_scale: common * l_e,
        })
    }

    pub fn snr_bob(&self) -> f64 {
        let n = self.n as f64;
        self.bob_scale * n * n
    }

    /// `|g_E^H g_B|^2` for the two departure angles.
    pub fn eve_gain_sq(&self, aod_bob: f64, aod_eve: f64) -> f64 {
        let delta = 2.0 * PI * self.spacing_ratio * (aod_eve.cos() - aod_bob.cos());
        array_factor_sq(self.n, delta)
    }

    pub fn sample(&self, aod_bob: f64, aod_eve: f64) -> SecrecySample {
        let snr_eve = self.eve_scale * self.eve_gain_sq(aod_bob, aod_eve);
        SecrecySample::from_snrs(self.snr_bob(), snr_eve)
    }
}

pub fn closed_form_sample(cfg: &SystemConfig, geom: &LinkGeometry) -> Result<SecrecySample> {
    geom.validate()?;
    let cf = ClosedForm::new(
        cfg,
        geom.dist_alice_ris_m,
        geom.dist_ris_bob_m,
        geom.dist_ris_eve_m,
    )?;
    Ok(cf.sample(geom.aod_bob_rad, geom.aod_eve_rad))
}

/// Achievable secrecy rate under `Theta*` and MRT, from the closed form.
pub fn secrecy_rate_closed_form(cfg: &SystemConfig, geom: &LinkGeometry) -> Result<f64> {
    Ok(closed_form_sample(cfg, geom)?.secrecy_rate_bps_hz)
}
