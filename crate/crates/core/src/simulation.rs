//! Seeded Monte Carlo estimates of ergodic quantities.
//!
//! Trials are grouped into fixed blocks of [`BLOCK_TRIALS`]. Block `b` draws
//! from a ChaCha8 stream keyed by `(seed, b)`, and block moments are merged in
//! block order, so the result is bit-identical for any worker count.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::ergodic_lower_bound;
use crate::channel::{steering_vector, LinkGeometry, SystemConfig};
use crate::metrics::{pipeline_sample, ClosedForm};
use crate::{Error, Result};

pub const BLOCK_TRIALS: u64 = 4096;

/// Angles that are redrawn from `U(0, pi)` on every trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomAngle {
    AodAlice,
    AoaRis,
    AodBob,
    AodEve,
    /// One draw shared by Bob and Eve, placing them in the same direction.
    SharedBobEve,
}

/// How each trial's secrecy rate is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    #[default]
    ClosedForm,
    /// Full vector pipeline with explicit MRT; slower, used for parity checks.
    Pipeline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSpec {
    pub trials: u64,
    pub seed: u64,
    pub randomize: BTreeSet<RandomAngle>,
    pub evaluator: Evaluator,
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 20_191_025,
            randomize: [RandomAngle::AodBob, RandomAngle::AodEve].into(),
            evaluator: Evaluator::ClosedForm,
        }
    }
}

impl MonteCarloSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.randomize.is_empty() {
            return Err(Error::invalid("randomize", "must name at least one angle"));
        }
        if self.randomize.contains(&RandomAngle::SharedBobEve)
            && (self.randomize.contains(&RandomAngle::AodBob)
                || self.randomize.contains(&RandomAngle::AodEve))
        {
            return Err(Error::invalid(
                "randomize",
                "shared_bob_eve cannot be combined with aod_bob or aod_eve",
            ));
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErgodicEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub std_error: f64,
    pub trials: u64,
}

/// Streaming first and second moments (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * nb / count as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / count as f64,
        }
    }

    fn estimate(&self) -> ErgodicEstimate {
        let var = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        };
        ErgodicEstimate {
            mean: self.mean,
            std_error: (var / self.count as f64).sqrt(),
            trials: self.count,
        }
    }
}

/// RNG for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Uniform draw on the open interval `(0, pi)`.
pub fn draw_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u * PI;
        }
    }
}

/// Runs `trials` evaluations of `sample` and merges them deterministically.
fn run_trials<F>(trials: u64, seed: u64, sample: F) -> Result<ErgodicEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let partial: Vec<Result<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let len = BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS);
            let mut acc = Moments::default();
            for _ in 0..len {
                acc.push(sample(&mut rng)?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Moments::default();
    for m in partial {
        total = total.merge(m?);
    }
    Ok(total.estimate())
}

/// Redraws the randomized angles of `template` in a fixed order.
fn draw_geometry(
    template: &LinkGeometry,
    randomize: &BTreeSet<RandomAngle>,
    rng: &mut ChaCha8Rng,
) -> LinkGeometry {
    let mut g = *template;
    for angle in randomize {
        let v = draw_angle(rng);
        match angle {
            RandomAngle::AodAlice => g.aod_alice_rad = v,
            RandomAngle::AoaRis => g.aoa_ris_rad = v,
            RandomAngle::AodBob => g.aod_bob_rad = v,
            RandomAngle::AodEve => g.aod_eve_rad = v,
            RandomAngle::SharedBobEve => {
                g.aod_bob_rad = v;
                g.aod_eve_rad = v;
            }
        }
    }
    g
}

/// Ergodic secrecy rate (bps/Hz) over the angles in `mc.randomize`, with the
/// `[.]^+` clamp applied per trial.
pub fn ergodic_secrecy_rate_mc(
    cfg: &SystemConfig,
    geom_template: &LinkGeometry,
    mc: &MonteCarloSpec,
) -> Result<ErgodicEstimate> {
    cfg.validate()?;
    geom_template.validate()?;
    mc.validate()?;
    match mc.evaluator {
        Evaluator::ClosedForm => {
            let cf = ClosedForm::new(
                cfg,
                geom_template.dist_alice_ris_m,
                geom_template.dist_ris_bob_m,
                geom_template.dist_ris_eve_m,
            )?;
            run_trials(mc.trials, mc.seed, |rng| {
                let g = draw_geometry(geom_template, &mc.randomize, rng);
                Ok(cf.sample(g.aod_bob_rad, g.aod_eve_rad).secrecy_rate_bps_hz)
            })
        }
        Evaluator::Pipeline => run_trials(mc.trials, mc.seed, |rng| {
            let g = draw_geometry(geom_template, &mc.randomize, rng);
            Ok(pipeline_sample(cfg, &g)?.secrecy_rate_bps_hz)
        }),
    }
}

/// Brute-force estimate of `E|g_E^H g_B|^2` with `psi_B, psi_E ~ U(0, pi)`
/// i.i.d., from explicit half-wavelength steering vectors. Only `mc.trials`
/// and `mc.seed` are used.
pub fn expected_gain_sq_mc(n: usize, mc: &MonteCarloSpec) -> Result<ErgodicEstimate> {
    if n == 0 {
        return Err(Error::invalid("n_ris_elements", "must be at least 1"));
    }
    if mc.trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    run_trials(mc.trials, mc.seed, |rng| {
        let g_b = steering_vector(n, draw_angle(rng), 0.5)?;
        let g_e = steering_vector(n, draw_angle(rng), 0.5)?;
        Ok(g_e.inner(g_b.entries())?.norm_sqr())
    })
}

/// Quantity varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    MTxAntennas,
    NRisElements,
    DistRisBobM,
    TxPowerWatts,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::MTxAntennas => "m_tx_antennas",
            SweepParameter::NRisElements => "n_ris_elements",
            SweepParameter::DistRisBobM => "dist_ris_bob_m",
            SweepParameter::TxPowerWatts => "tx_power_watts",
        }
    }

    fn apply(self, value: f64, cfg: &mut SystemConfig, geom: &mut LinkGeometry) -> Result<()> {
        let count = |field| -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::invalid(
                    field,
                    format!("must be a positive integer, got {value}"),
                ))
            }
        };
        match self {
            SweepParameter::MTxAntennas => cfg.m_tx_antennas = count("m_tx_antennas")?,
            SweepParameter::NRisElements => cfg.n_ris_elements = count("n_ris_elements")?,
            SweepParameter::DistRisBobM => geom.dist_ris_bob_m = value,
            SweepParameter::TxPowerWatts => cfg.tx_power_watts = value,
        }
        Ok(())
    }
}

/// One sweep value's outcome: the estimate and, when `l_B >= l_E`, the
/// Jensen lower bound.
#[derive(Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Result<(ErgodicEstimate, Option<f64>)>,
}

/// Ergodic rate at each value of `parameter`. Every value reuses `mc.seed`,
/// so consecutive points share their random angles. Invalid values are
/// reported in their own entry.
pub fn sweep(
    cfg_base: &SystemConfig,
    parameter: SweepParameter,
    values: &[f64],
    geom: &LinkGeometry,
    mc: &MonteCarloSpec,
) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::invalid("values", "sweep needs at least one value"));
    }
    Ok(values
        .iter()
        .map(|&value| SweepPoint {
            value,
            outcome: sweep_point(cfg_base, parameter, value, geom, mc),
        })
        .collect())
}

fn sweep_point(
    cfg_base: &SystemConfig,
    parameter: SweepParameter,
    value: f64,
    geom: &LinkGeometry,
    mc: &MonteCarloSpec,
) -> Result<(ErgodicEstimate, Option<f64>)> {
    let mut cfg = cfg_base.clone();
    let mut geom = *geom;
    parameter.apply(value, &mut cfg, &mut geom)?;
    let estimate = ergodic_secrecy_rate_mc(&cfg, &geom, mc)?;
    let l_a = cfg.path_loss(geom.dist_alice_ris_m)?;
    let l_b = cfg.path_loss(geom.dist_ris_bob_m)?;
    let l_e = cfg.path_loss(geom.dist_ris_eve_m)?;
    let bound = match ergodic_lower_bound(&cfg, l_a, l_b, l_e) {
        Ok(b) => Some(b),
        Err(Error::AssumptionViolation(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((estimate, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::exact_gain_sq_expectation;

    fn spec(trials: u64, seed: u64) -> MonteCarloSpec {
        MonteCarloSpec {
            trials,
            seed,
            ..MonteCarloSpec::default()
        }
    }

    fn reference_geom() -> LinkGeometry {
        LinkGeometry {
            dist_alice_ris_m: 15.0,
            dist_ris_bob_m: 20.0,
            dist_ris_eve_m: 30.0,
            ..LinkGeometry::default()
        }
    }

    #[test]
    fn draws_stay_inside_open_interval() {
        let mut rng = block_rng(1, 0);
        for _ in 0..100_000 {
            let a = draw_angle(&mut rng);
            assert!(a > 0.0 && a < PI);
        }
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.25).collect();
        let mut seq = Moments::default();
        xs.iter().for_each(|&x| seq.push(x));
        let (a, b) = xs.split_at(313);
        let mut ma = Moments::default();
        a.iter().for_each(|&x| ma.push(x));
        let mut mb = Moments::default();
        b.iter().for_each(|&x| mb.push(x));
        let merged = ma.merge(mb);
        assert!((merged.mean - seq.mean).abs() < 1e-12);
        assert!((merged.m2 / seq.m2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gain_oracle_is_exact_for_one_element() {
        let est = expected_gain_sq_mc(1, &spec(10_000, 3)).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn gain_oracle_matches_exact_expectation_at_n2() {
        let est = expected_gain_sq_mc(2, &spec(1_000_000, 9)).unwrap();
        let exact = exact_gain_sq_expectation(2).unwrap();
        assert!((est.mean - exact).abs() < 3.0 * est.std_error);
    }

    #[test]
    fn clone_eve_gives_zero_rate() {
        let mut mc = spec(20_000, 4);
        mc.randomize = [RandomAngle::SharedBobEve].into();
        let geom = LinkGeometry {
            dist_ris_bob_m: 22.0,
            dist_ris_eve_m: 22.0,
            ..LinkGeometry::default()
        };
        let est = ergodic_secrecy_rate_mc(&SystemConfig::default(), &geom, &mc).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn estimates_are_reproducible() {
        let cfg = SystemConfig {
            n_ris_elements: 32,
            ..SystemConfig::default()
        };
        let mc = spec(50_000, 77);
        let a = ergodic_secrecy_rate_mc(&cfg, &reference_geom(), &mc).unwrap();
        let b = ergodic_secrecy_rate_mc(&cfg, &reference_geom(), &mc).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let cfg = SystemConfig {
            n_ris_elements: 16,
            ..SystemConfig::default()
        };
        let mc = spec(30_001, 5);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| ergodic_secrecy_rate_mc(&cfg, &reference_geom(), &mc).unwrap())
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.mean.to_bits(), four.mean.to_bits());
        assert_eq!(one.std_error.to_bits(), four.std_error.to_bits());
        assert_eq!(one.trials, 30_001);
    }

    #[test]
    fn pipeline_evaluator_agrees_with_closed_form() {
        let cfg = SystemConfig {
            m_tx_antennas: 4,
            n_ris_elements: 16,
            ..SystemConfig::default()
        };
        let mut mc = spec(20_000, 8);
        let a = ergodic_secrecy_rate_mc(&cfg, &reference_geom(), &mc).unwrap();
        mc.evaluator = Evaluator::Pipeline;
        let b = ergodic_secrecy_rate_mc(&cfg, &reference_geom(), &mc).unwrap();
        assert!((a.mean - b.mean).abs() < 1e-9 * a.mean.max(1.0));
    }

    #[test]
    fn rate_increases_with_n() {
        let mut prev = -1.0;
        for n in [8usize, 16, 32, 64] {
            let cfg = SystemConfig {
                m_tx_antennas: 4,
                n_ris_elements: n,
                ..SystemConfig::default()
            };
            let est = ergodic_secrecy_rate_mc(&cfg, &reference_geom(), &spec(20_000, 1)).unwrap();
            assert!(est.mean > prev);
            prev = est.mean;
        }
    }

    #[test]
    fn std_error_halves_when_trials_quadruple() {
        let cfg = SystemConfig {
            n_ris_elements: 16,
            ..SystemConfig::default()
        };
        let mut ratios = Vec::new();
        for rep in 0..10 {
            let small =
                ergodic_secrecy_rate_mc(&cfg, &reference_geom(), &spec(10_000, 100 + rep)).unwrap();
            let large =
                ergodic_secrecy_rate_mc(&cfg, &reference_geom(), &spec(40_000, 200 + rep)).unwrap();
            ratios.push(small.std_error / large.std_error);
        }
        let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((mean_ratio - 2.0).abs() < 0.4, "ratio {mean_ratio}");
    }

    #[test]
    fn single_value_sweep_matches_direct_call() {
        let cfg = SystemConfig::default();
        let mc = spec(10_000, 12);
        let pts = sweep(
            &cfg,
            SweepParameter::NRisElements,
            &[16.0],
            &reference_geom(),
            &mc,
        )
        .unwrap();
        let (est, bound) = pts[0].outcome.as_ref().unwrap();
        let direct = ergodic_secrecy_rate_mc(
            &SystemConfig {
                n_ris_elements: 16,
                ..cfg
            },
            &reference_geom(),
            &mc,
        )
        .unwrap();
        assert_eq!(*est, direct);
        assert!(bound.is_some());
    }

    #[test]
    fn sweep_reports_bad_values_per_entry() {
        let cfg = SystemConfig::default();
        let pts = sweep(
            &cfg,
            SweepParameter::MTxAntennas,
            &[4.0, 2.5, 0.0, 8.0],
            &reference_geom(),
            &spec(2_000, 1),
        )
        .unwrap();
        assert!(pts[0].outcome.is_ok());
        assert!(pts[1].outcome.is_err());
        assert!(pts[2].outcome.is_err());
        assert!(pts[3].outcome.is_ok());
        assert!(sweep(
            &cfg,
            SweepParameter::MTxAntennas,
            &[],
            &reference_geom(),
            &spec(10, 1)
        )
        .is_err());
    }

    #[test]
    fn bound_absent_when_bob_is_farther() {
        let pts = sweep(
            &SystemConfig::default(),
            SweepParameter::DistRisBobM,
            &[10.0, 40.0],
            &reference_geom(),
            &spec(2_000, 1),
        )
        .unwrap();
        assert!(pts[0].outcome.as_ref().unwrap().1.is_some());
        assert!(pts[1].outcome.as_ref().unwrap().1.is_none());
    }

    #[test]
    fn sweep_mean_respects_bound() {
        let pts = sweep(
            &SystemConfig::default(),
            SweepParameter::NRisElements,
            &[8.0, 16.0, 32.0, 64.0],
            &reference_geom(),
            &spec(50_000, 21),
        )
        .unwrap();
        for p in &pts {
            let (est, bound) = p.outcome.as_ref().unwrap();
            assert!(
                est.mean >= bound.unwrap() - 3.0 * est.std_error,
                "N={}",
                p.value
            );
        }
    }

    #[test]
    fn spec_validation() {
        assert!(spec(0, 1).validate().is_err());
        let mut mc = spec(10, 1);
        mc.randomize.clear();
        assert!(mc.validate().is_err());
        mc.randomize = [RandomAngle::SharedBobEve, RandomAngle::AodBob].into();
        assert!(mc.validate().is_err());
    }
}
