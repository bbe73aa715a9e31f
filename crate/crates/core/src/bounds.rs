//! Closed-form ergodic machinery.
//!
//! With `psi_B, psi_E ~ U(0, pi)` independent and half-wavelength spacing,
//!
//! ```text
//! E|g_E^H g_B|^2 = N + 2 sum_{n=1}^{N-1} (N - n) J0(n pi)^2
//! ```
//!
//! and replacing `J0` by its leading asymptotic term and the harmonic sum by
//! `ln N + gamma` yields `eta(N)`. [`ergodic_lower_bound`] applies Jensen's
//! inequality to Eve's term with `eta(N)` in place of the expectation.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::channel::SystemConfig;
use crate::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this magnitude `J0` is summed from its power series.
const SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        j0_series(x)
    } else {
        j0_hankel(x)
    }
}

fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= -q / (k * k);
        sum += term;
        if term.abs() < 1e-18 {
            return sum;
        }
        k += 1.0;
    }
}

/// Hankel expansion `sqrt(2 / (pi x)) (P cos chi - Q sin chi)` with six
/// correction terms in each of `P` and `Q`.
fn j0_hankel(x: f64) -> f64 {
    // |a_k| = prod_{i=1..k} (2i - 1)^2 / (8 i)
    let mut a = [0.0f64; 13];
    a[0] = 1.0;
    for k in 1..a.len() {
        let odd = (2 * k - 1) as f64;
        a[k] = a[k - 1] * odd * odd / (8.0 * k as f64);
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut pow = 1.0;
    for k in 0..=6 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        p += sign * a[2 * k] * pow;
        if k < 6 {
            q -= sign * a[2 * k + 1] * pow * inv;
        }
        pow *= inv2;
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Leading-order large-argument form `sqrt(2 / (pi x)) cos(x - pi/4)`.
pub fn bessel_j0_leading(x: f64) -> f64 {
    let x = x.abs();
    (2.0 / (PI * x)).sqrt() * (x - FRAC_PI_4).cos()
}

/// `eta(N) = N - (2/pi^2)(N - 1) + (2N/pi^2)(ln N + gamma)`, natural log.
pub fn eta(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n_ris_elements", "must be at least 1"));
    }
    let n = n as f64;
    let c = 2.0 / (PI * PI);
    Ok(n - c * (n - 1.0) + c * n * (n.ln() + EULER_GAMMA))
}

/// Exact `E|g_E^H g_B|^2` for independent uniform departure angles,
/// `N + 2 sum_{n=1}^{N-1} (N - n) J0(n pi)^2`.
pub fn exact_gain_sq_expectation(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n_ris_elements", "must be at least 1"));
    }
    let tail: f64 = (1..n)
        .map(|k| {
            let j = bessel_j0(k as f64 * PI);
            (n - k) as f64 * j * j
        })
        .sum();
    Ok(n as f64 + 2.0 * tail)
}

fn check_loss(field: &'static str, l: f64) -> Result<()> {
    if l > 0.0 && l <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("loss factor must lie in (0, 1], got {l:e}"),
        ))
    }
}

/// Jensen lower bound on the ergodic secrecy rate,
/// `log2(1 + l_A l_B M N^2 P / sigma^2) - log2(1 + l_A l_E M P eta / sigma^2)`.
///
/// The result is not clamped at zero. Requires `l_B >= l_E`.
pub fn ergodic_lower_bound(cfg: &SystemConfig, l_a: f64, l_b: f64, l_e: f64) -> Result<f64> {
    cfg.validate()?;
    check_loss("pathloss_alice", l_a)?;
    check_loss("pathloss_bob", l_b)?;
    check_loss("pathloss_eve", l_e)?;
    if l_b < l_e {
        return Err(Error::AssumptionViolation(format!(
            "lower bound requires l_B >= l_E (Bob no farther than Eve), got l_B = {l_b:e} < l_E = {l_e:e}"
        )));
    }
    let noise = cfg.noise_power_watts()?;
    let n = cfg.n_ris_elements as f64;
    let common = l_a * cfg.m_tx_antennas as f64 * cfg.tx_power_watts / noise;
    let eta = eta(cfg.n_ris_elements)?;
    Ok(((common * l_b * n * n).ln_1p() - (common * l_e * eta).ln_1p()) / std::f64::consts::LN_2)
}

fn check_positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be positive, got {v:e}"),
        ))
    }
}

/// Large-`N`, large-`M` form `log2(N pi^2 l_B / (2 l_E))`.
pub fn asymptotic_bound(n: usize, l_b: f64, l_e: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n_ris_elements", "must be at least 1"));
    }
    check_positive("pathloss_bob", l_b)?;
    check_positive("pathloss_eve", l_e)?;
    Ok((n as f64 * PI * PI * l_b / (2.0 * l_e)).log2())
}

/// High-SNR limit of [`ergodic_lower_bound`], `log2(N^2 l_B / (eta l_E))`.
/// This is the value the bound actually approaches as `M` grows.
pub fn high_snr_limit(n: usize, l_b: f64, l_e: f64) -> Result<f64> {
    check_positive("pathloss_bob", l_b)?;
    check_positive("pathloss_eve", l_e)?;
    let nf = n as f64;
    Ok((nf * nf * l_b / (eta(n)? * l_e)).log2())
}
