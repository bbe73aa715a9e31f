//! Surface phase configuration and transmit precoding.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::channel::{check_angle, ChannelSet, SteeringVector};
use crate::{Error, Result};

/// Norm below which the cascade `h_B^H Theta G` is treated as an exact null.
pub const DEGENERATE_CASCADE_NORM: f64 = 1e-30;

/// Diagonal phase matrix `Theta = diag(e^{j theta_1}, ..., e^{j theta_N})`,
/// phases kept in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftProfile(Vec<f64>);

impl PhaseShiftProfile {
    pub fn new(phases_rad: impl IntoIterator<Item = f64>) -> Self {
        Self(phases_rad.into_iter().map(|p| p.rem_euclid(TAU)).collect())
    }

    /// All elements reflect without phase shift.
    pub fn identity(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn phases(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Theta x`, elementwise rotation.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: x.len(),
            });
        }
        Ok(self
            .0
            .iter()
            .zip(x)
            .map(|(&p, z)| Complex64::from_polar(1.0, p) * z)
            .collect())
    }
}

/// Phase profile that maps `g_R` onto `g_B`: `theta_k = k * theta` with
/// `theta = 2 pi (d/lambda) (cos(aoa) - cos(aod_bob))`, `k = 0..n-1`.
pub fn optimal_phase_shifts(
    aoa_ris_rad: f64,
    aod_bob_rad: f64,
    n: usize,
    spacing_ratio: f64,
) -> Result<PhaseShiftProfile> {
    if n == 0 {
        return Err(Error::invalid("n_ris_elements", "must be at least 1"));
    }
    check_angle("aoa_ris_rad", aoa_ris_rad)?;
    check_angle("aod_bob_rad", aod_bob_rad)?;
    let theta = 2.0 * PI * spacing_ratio * (aoa_ris_rad.cos() - aod_bob_rad.cos());
    Ok(PhaseShiftProfile::new((0..n).map(|k| k as f64 * theta)))
}

/// `|g_target^H Theta g_ris|`.
pub fn beamforming_gain(
    g_target: &SteeringVector,
    profile: &PhaseShiftProfile,
    g_ris: &SteeringVector,
) -> Result<f64> {
    if g_target.len() != g_ris.len() {
        return Err(Error::LengthMismatch {
            expected: g_target.len(),
            actual: g_ris.len(),
        });
    }
    let reflected = profile.apply(g_ris.entries())?;
    Ok(g_target.inner(&reflected)?.norm())
}

/// Unit-norm transmit beamformer.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder(Vec<Complex64>);

impl Precoder {
    /// Normalizes `weights` to unit norm.
    pub fn from_weights(weights: Vec<Complex64>) -> Result<Self> {
        let norm = weights.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid(
                "precoder",
                "weights must have nonzero finite norm",
            ));
        }
        Ok(Self(weights.into_iter().map(|z| z / norm).collect()))
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Scalar `h^H Theta g_R`; the cascade row vector is this times
/// `l_A^{1/2} g_A^H`.
fn cascade_scalar(
    h: &[Complex64],
    profile: &PhaseShiftProfile,
    channels: &ChannelSet,
) -> Result<Complex64> {
    if h.len() != channels.n() {
        return Err(Error::LengthMismatch {
            expected: channels.n(),
            actual: h.len(),
        });
    }
    let reflected = profile.apply(channels.g_ris.entries())?;
    Ok(h.iter().zip(&reflected).map(|(a, b)| a.conj() * b).sum())
}

/// Maximal-ratio transmission towards Bob:
/// `w = (h_B^H Theta G)^H / ||h_B^H Theta G||`.
pub fn mrt_precoder(channels: &ChannelSet, profile: &PhaseShiftProfile) -> Result<Precoder> {
    let c = cascade_scalar(&channels.h_bob(), profile, channels)?;
    let scale = channels.pathloss_alice.sqrt();
    let row: Vec<Complex64> = channels
        .g_alice_ris
        .entries()
        .iter()
        .map(|g| scale * c * g.conj())
        .collect();
    let norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm.is_nan() || norm < DEGENERATE_CASCADE_NORM {
        return Err(Error::DegenerateCascade { norm });
    }
    Ok(Precoder(row.into_iter().map(|z| z.conj() / norm).collect()))
}

/// Received signal power per unit transmit power, `|h^H Theta G w|^2`.
pub fn received_gain(
    h: &[Complex64],
    profile: &PhaseShiftProfile,
    channels: &ChannelSet,
    precoder: &Precoder,
) -> Result<f64> {
    let c = cascade_scalar(h, profile, channels)?;
    let w = precoder.weights();
    if w.len() != channels.m() {
        return Err(Error::LengthMismatch {
            expected: channels.m(),
            actual: w.len(),
        });
    }
    let ga_w: Complex64 = channels
        .g_alice_ris
        .entries()
        .iter()
        .zip(w)
        .map(|(g, wi)| g.conj() * wi)
        .sum();
    Ok((channels.pathloss_alice.sqrt() * c * ga_w).norm_sqr())
}
