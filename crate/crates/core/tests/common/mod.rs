#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

/// Fractional bits of the fixed-point accumulator.
const FRAC_BITS: u32 = 384;

/// `J0(x)` from its power series in exact fixed-point arithmetic, for the
/// exact binary value of `x`. Rounding per term is about `2^-384`, far below
/// the largest terms (~1e16 at `x = 40`).
pub fn j0_series_exact(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 1.0;
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), biased - 1075)
    };
    // q = x^2 / 4 in fixed point
    let mant_sq = BigInt::from(mant) * BigInt::from(mant);
    let shift = FRAC_BITS as i64 + 2 * exp - 2;
    let q = if shift >= 0 {
        mant_sq << shift as usize
    } else {
        mant_sq >> (-shift) as usize
    };

    let one = BigInt::from(1) << FRAC_BITS as usize;
    let mut term = one.clone();
    let mut sum = one;
    let mut k: u64 = 0;
    let x_sq_quarter = x * x / 4.0;
    loop {
        k += 1;
        term = -((term * &q) >> FRAC_BITS as usize) / BigInt::from(k * k);
        sum += &term;
        if term.is_zero() && k as f64 > x_sq_quarter {
            break;
        }
    }
    let top = &sum >> (FRAC_BITS - 64) as usize;
    top.to_f64().unwrap() * 2f64.powi(-64)
}

/// Uniform grid of `n` points on `[lo, hi]`, endpoints included.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_secrecy::channel::{steering_vector, LinkGeometry, SystemConfig};
use ris_secrecy::metrics::{closed_form_sample, pipeline_sample};
use ris_secrecy::reflection::{beamforming_gain, optimal_phase_shifts};

fn open_angle(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        if a > 0.0 {
            return a;
        }
    }
}

pub fn random_case(rng: &mut ChaCha8Rng) -> (SystemConfig, LinkGeometry) {
    let cfg = SystemConfig {
        m_tx_antennas: rng.gen_range(1..=64),
        n_ris_elements: rng.gen_range(1..=256),
        tx_power_watts: rng.gen_range(0.01..100.0),
        ..SystemConfig::default()
    };
    let geom = LinkGeometry {
        aod_alice_rad: open_angle(rng),
        aoa_ris_rad: open_angle(rng),
        aod_bob_rad: open_angle(rng),
        aod_eve_rad: open_angle(rng),
        dist_alice_ris_m: rng.gen_range(1.0..50.0),
        dist_ris_bob_m: rng.gen_range(1.0..50.0),
        dist_ris_eve_m: rng.gen_range(1.0..50.0),
    };
    (cfg, geom)
}

/// Worst disagreement between the closed form and the vector pipeline over
/// `cases` random geometries. Bob's SNR and the rate are compared relative
/// to their own size (the rate floored at 1 bps/Hz); Eve's SNR relative to
/// its peak `N^2` value, since near array nulls it is pure cancellation.
pub fn closed_form_vs_pipeline(cases: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (cfg, geom) = random_case(&mut rng);
        let cf = closed_form_sample(&cfg, &geom).unwrap();
        let pl = pipeline_sample(&cfg, &geom).unwrap();
        let n = cfg.n_ris_elements as f64;
        let eve_peak = cfg.path_loss(geom.dist_alice_ris_m).unwrap()
            * cfg.path_loss(geom.dist_ris_eve_m).unwrap()
            * cfg.m_tx_antennas as f64
            * cfg.tx_power_watts
            * n
            * n
            / cfg.noise_power_watts().unwrap();
        let bob = (cf.snr_bob - pl.snr_bob).abs() / cf.snr_bob;
        let eve = (cf.snr_eve - pl.snr_eve).abs() / eve_peak;
        let rate = (cf.secrecy_rate_bps_hz - pl.secrecy_rate_bps_hz).abs()
            / cf.secrecy_rate_bps_hz.max(1.0);
        worst = worst.max(bob).max(eve).max(rate);
    }
    worst
}

/// Worst `| |g_B^H Theta* g_R| - N | / N` over random angle pairs.
pub fn alignment_error(cases: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(1..=1024);
        let (aoa, aod) = (open_angle(&mut rng), open_angle(&mut rng));
        let g_r = steering_vector(n, aoa, 0.5).unwrap();
        let g_b = steering_vector(n, aod, 0.5).unwrap();
        let p = optimal_phase_shifts(aoa, aod, n, 0.5).unwrap();
        let gain = beamforming_gain(&g_b, &p, &g_r).unwrap();
        worst = worst.max((gain - n as f64).abs() / n as f64);
    }
    worst
}

/// Worst absolute J0 error against the exact series on 1000 points over
/// `[0, 40]`.
pub fn j0_grid_error() -> f64 {
    grid(0.0, 40.0, 1000)
        .into_iter()
        .map(|x| (ris_secrecy::bounds::bessel_j0(x) - j0_series_exact(x)).abs())
        .fold(0.0, f64::max)
}
