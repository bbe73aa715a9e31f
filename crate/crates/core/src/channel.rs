//! Line-of-sight mm-Wave channel construction.
//!
//! Every array is a uniform linear array. The Alice-to-surface channel is the
//! rank-one product `G = l_A^{1/2} g_R g_A^H` and is kept in that factored
//! form; surface-to-receiver channels are `h = l^{1/2} g`.
//!
//! Powers are linear watts internally; dB and dBm only appear at the edges.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Half-wavelength spacing, the value every closed form in [`crate::bounds`]
/// assumes.
pub const HALF_WAVELENGTH: f64 = 0.5;

/// Scalar parameters of the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub m_tx_antennas: usize,
    pub n_ris_elements: usize,
    pub tx_power_watts: f64,
    pub noise_density_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub pathloss_alpha_db: f64,
    pub pathloss_beta: f64,
    /// Element spacing over carrier wavelength, `d / lambda`.
    pub element_spacing_ratio: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            m_tx_antennas: 4,
            n_ris_elements: 8,
            tx_power_watts: 20.0,
            noise_density_dbm_hz: -174.0,
            bandwidth_hz: 1e8,
            pathloss_alpha_db: 61.4,
            pathloss_beta: 2.0,
            element_spacing_ratio: HALF_WAVELENGTH,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_tx_antennas == 0 {
            return Err(Error::invalid("m_tx_antennas", "must be at least 1"));
        }
        if self.n_ris_elements == 0 {
            return Err(Error::invalid("n_ris_elements", "must be at least 1"));
        }
        if !(self.tx_power_watts > 0.0 && self.tx_power_watts.is_finite()) {
            return Err(Error::invalid(
                "tx_power_watts",
                format!("must be positive and finite, got {}", self.tx_power_watts),
            ));
        }
        if !self.noise_density_dbm_hz.is_finite() {
            return Err(Error::invalid("noise_density_dbm_hz", "must be finite"));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(Error::invalid(
                "bandwidth_hz",
                format!("must be positive and finite, got {}", self.bandwidth_hz),
            ));
        }
        if !self.pathloss_alpha_db.is_finite() {
            return Err(Error::invalid("pathloss_alpha_db", "must be finite"));
        }
        if !self.pathloss_beta.is_finite() {
            return Err(Error::invalid("pathloss_beta", "must be finite"));
        }
        if !(self.element_spacing_ratio > 0.0 && self.element_spacing_ratio.is_finite()) {
            return Err(Error::invalid(
                "element_spacing_ratio",
                format!("must be positive, got {}", self.element_spacing_ratio),
            ));
        }
        Ok(())
    }

    pub fn noise_power_watts(&self) -> Result<f64> {
        noise_power_watts(self.noise_density_dbm_hz, self.bandwidth_hz)
    }

    pub fn path_loss(&self, distance_m: f64) -> Result<f64> {
        path_loss_linear(distance_m, self.pathloss_alpha_db, self.pathloss_beta)
    }
}

/// Angles and distances of one channel realization. The surface sits at the
/// coordinate origin, so all distances are measured from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkGeometry {
    /// Departure angle at Alice.
    pub aod_alice_rad: f64,
    /// Arrival angle at the surface.
    pub aoa_ris_rad: f64,
    /// Reflected departure angle towards Bob.
    pub aod_bob_rad: f64,
    /// Reflected departure angle towards Eve.
    pub aod_eve_rad: f64,
    pub dist_alice_ris_m: f64,
    pub dist_ris_bob_m: f64,
    pub dist_ris_eve_m: f64,
}

impl Default for LinkGeometry {
    fn default() -> Self {
        Self {
            aod_alice_rad: PI / 4.0,
            aoa_ris_rad: 3.0 * PI / 4.0,
            aod_bob_rad: PI / 4.0,
            aod_eve_rad: PI / 4.0,
            dist_alice_ris_m: 15.0,
            dist_ris_bob_m: 20.0,
            dist_ris_eve_m: 30.0,
        }
    }
}

pub(crate) fn check_angle(field: &'static str, angle: f64) -> Result<()> {
    if angle > 0.0 && angle < PI {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("angle must lie strictly inside (0, pi), got {angle}"),
        ))
    }
}

pub(crate) fn check_distance(field: &'static str, distance: f64) -> Result<()> {
    if distance > 0.0 && distance.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("distance must be positive and finite, got {distance}"),
        ))
    }
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<()> {
        check_angle("aod_alice_rad", self.aod_alice_rad)?;
        check_angle("aoa_ris_rad", self.aoa_ris_rad)?;
        check_angle("aod_bob_rad", self.aod_bob_rad)?;
        check_angle("aod_eve_rad", self.aod_eve_rad)?;
        check_distance("dist_alice_ris_m", self.dist_alice_ris_m)?;
        check_distance("dist_ris_bob_m", self.dist_ris_bob_m)?;
        check_distance("dist_ris_eve_m", self.dist_ris_eve_m)?;
        Ok(())
    }
}

/// Array response of a uniform linear array. Entry `k` is
/// `exp(-j 2 pi k (d/lambda) cos(angle))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(Vec<Complex64>);

impl SteeringVector {
    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Hermitian inner product `self^H other`.
    pub fn inner(&self, other: &[Complex64]) -> Result<Complex64> {
        if other.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(self.0.iter().zip(other).map(|(a, b)| a.conj() * b).sum())
    }

    /// Entries scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Vec<Complex64> {
        self.0.iter().map(|z| z * factor).collect()
    }
}

pub fn steering_vector(n: usize, angle_rad: f64, spacing_ratio: f64) -> Result<SteeringVector> {
    if n == 0 {
        return Err(Error::invalid("n", "array must have at least one element"));
    }
    check_angle("angle_rad", angle_rad)?;
    if !(spacing_ratio > 0.0 && spacing_ratio.is_finite()) {
        return Err(Error::invalid(
            "element_spacing_ratio",
            format!("must be positive, got {spacing_ratio}"),
        ));
    }
    let step = -2.0 * PI * spacing_ratio * angle_rad.cos();
    let entries = (0..n)
        .map(|k| {
            if k == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, step * k as f64)
            }
        })
        .collect();
    Ok(SteeringVector(entries))
}

/// Linear power gain `l` of the log-distance model
/// `-10 log10(l) = alpha + beta * 10 log10(d)`.
pub fn path_loss_linear(distance_m: f64, alpha_db: f64, beta: f64) -> Result<f64> {
    check_distance("distance_m", distance_m)?;
    let loss_db = alpha_db + beta * 10.0 * distance_m.log10();
    Ok(10f64.powf(-loss_db / 10.0))
}

/// Thermal noise power in watts for a density in dBm/Hz over `bandwidth_hz`.
pub fn noise_power_watts(density_dbm_hz: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
        return Err(Error::invalid(
            "bandwidth_hz",
            format!("must be positive and finite, got {bandwidth_hz}"),
        ));
    }
    let dbm = density_dbm_hz + 10.0 * bandwidth_hz.log10();
    Ok(10f64.powf((dbm - 30.0) / 10.0))
}

/// All channels of one realization. `G` is stored as `(l_A, g_R, g_A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub g_alice_ris: SteeringVector,
    pub g_ris: SteeringVector,
    pub g_bob: SteeringVector,
    pub g_eve: SteeringVector,
    pub pathloss_alice: f64,
    pub pathloss_bob: f64,
    pub pathloss_eve: f64,
}

impl ChannelSet {
    /// `h_B = l_B^{1/2} g_B`.
    pub fn h_bob(&self) -> Vec<Complex64> {
        self.g_bob.scaled(self.pathloss_bob.sqrt())
    }

    /// `h_E = l_E^{1/2} g_E`.
    pub fn h_eve(&self) -> Vec<Complex64> {
        self.g_eve.scaled(self.pathloss_eve.sqrt())
    }

    pub fn m(&self) -> usize {
        self.g_alice_ris.len()
    }

    pub fn n(&self) -> usize {
        self.g_ris.len()
    }
}

pub fn build_channels(cfg: &SystemConfig, geom: &LinkGeometry) -> Result<ChannelSet> {
    cfg.validate()?;
    geom.validate()?;
    let s = cfg.element_spacing_ratio;
    let n = cfg.n_ris_elements;
    Ok(ChannelSet {
        g_alice_ris: steering_vector(cfg.m_tx_antennas, geom.aod_alice_rad, s)?,
        g_ris: steering_vector(n, geom.aoa_ris_rad, s)?,
        g_bob: steering_vector(n, geom.aod_bob_rad, s)?,
        g_eve: steering_vector(n, geom.aod_eve_rad, s)?,
        pathloss_alice: cfg.path_loss(geom.dist_alice_ris_m)?,
        pathloss_bob: cfg.path_loss(geom.dist_ris_bob_m)?,
        pathloss_eve: cfg.path_loss(geom.dist_ris_eve_m)?,
    })
}
