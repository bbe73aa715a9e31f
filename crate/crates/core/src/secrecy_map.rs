//! Secrecy area of Bob for a fixed Eve.
//!
//! Bob's position is swept over a polar grid (departure angle by distance
//! from the surface, which sits at the origin). Each cell holds the secrecy
//! rate at that position; thresholds `R0` then carve out secure regions.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{check_angle, check_distance, LinkGeometry, SystemConfig};
use crate::metrics::ClosedForm;
use crate::simulation::{ergodic_secrecy_rate_mc, Evaluator, MonteCarloSpec, RandomAngle};
use crate::{Error, Result};

/// Bisection stops once the bracket is this narrow (meters).
pub const DISTANCE_TOLERANCE_M: f64 = 0.01;

/// Smallest Bob distance probed by [`max_secure_distance`].
const MIN_DISTANCE_M: f64 = 1e-6;

/// Grid extent and thresholds. Both axes are inclusive linear grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapSpec {
    pub psi_min_rad: f64,
    pub psi_max_rad: f64,
    pub psi_steps: usize,
    pub dist_min_m: f64,
    pub dist_max_m: f64,
    pub dist_steps: usize,
    pub thresholds_bps_hz: Vec<f64>,
    /// Average each cell over the residual angles by Monte Carlo instead of
    /// evaluating the closed form.
    pub monte_carlo: bool,
}

impl Default for MapSpec {
    fn default() -> Self {
        Self {
            psi_min_rad: PI / 364.0,
            psi_max_rad: 181.0 * PI / 364.0,
            psi_steps: 181,
            dist_min_m: 0.1,
            dist_max_m: 40.0,
            dist_steps: 400,
            thresholds_bps_hz: vec![1.0, 2.0, 4.0],
            monte_carlo: false,
        }
    }
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let span = hi - lo;
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + span * i as f64 / last
            }
        })
        .collect()
}

impl MapSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.psi_min_rad > 0.0
            && self.psi_min_rad < self.psi_max_rad
            && self.psi_max_rad < FRAC_PI_2)
        {
            return Err(Error::invalid(
                "psi_min_rad",
                format!(
                    "angle range must satisfy 0 < min < max < pi/2, got [{}, {}]",
                    self.psi_min_rad, self.psi_max_rad
                ),
            ));
        }
        if !(self.dist_min_m > 0.0
            && self.dist_min_m < self.dist_max_m
            && self.dist_max_m.is_finite())
        {
            return Err(Error::invalid(
                "dist_min_m",
                format!(
                    "distance range must satisfy 0 < min < max, got [{}, {}]",
                    self.dist_min_m, self.dist_max_m
                ),
            ));
        }
        if self.psi_steps < 2 {
            return Err(Error::invalid("psi_steps", "must be at least 2"));
        }
        if self.dist_steps < 2 {
            return Err(Error::invalid("dist_steps", "must be at least 2"));
        }
        if self
            .thresholds_bps_hz
            .iter()
            .any(|t| !(*t >= 0.0 && t.is_finite()))
        {
            return Err(Error::invalid(
                "thresholds_bps_hz",
                "thresholds must be finite and nonnegative",
            ));
        }
        if self.thresholds_bps_hz.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid(
                "thresholds_bps_hz",
                "thresholds must be sorted ascending",
            ));
        }
        Ok(())
    }

    pub fn psi_values(&self) -> Vec<f64> {
        linspace(self.psi_min_rad, self.psi_max_rad, self.psi_steps)
    }

    pub fn dist_values(&self) -> Vec<f64> {
        linspace(self.dist_min_m, self.dist_max_m, self.dist_steps)
    }
}

/// Everything about the scene except Bob's position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedScene {
    pub aod_alice_rad: f64,
    pub aoa_ris_rad: f64,
    pub dist_alice_ris_m: f64,
    pub aod_eve_rad: f64,
    pub dist_ris_eve_m: f64,
}

impl FixedScene {
    /// Alice, surface and Eve placement from a full geometry; Bob's fields
    /// are ignored.
    pub fn from_geometry(g: &LinkGeometry) -> Self {
        Self {
            aod_alice_rad: g.aod_alice_rad,
            aoa_ris_rad: g.aoa_ris_rad,
            dist_alice_ris_m: g.dist_alice_ris_m,
            aod_eve_rad: g.aod_eve_rad,
            dist_ris_eve_m: g.dist_ris_eve_m,
        }
    }

    pub fn with_bob(&self, aod_bob_rad: f64, dist_ris_bob_m: f64) -> LinkGeometry {
        LinkGeometry {
            aod_alice_rad: self.aod_alice_rad,
            aoa_ris_rad: self.aoa_ris_rad,
            aod_bob_rad,
            aod_eve_rad: self.aod_eve_rad,
            dist_alice_ris_m: self.dist_alice_ris_m,
            dist_ris_bob_m,
            dist_ris_eve_m: self.dist_ris_eve_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_angle("aod_alice_rad", self.aod_alice_rad)?;
        check_angle("aoa_ris_rad", self.aoa_ris_rad)?;
        check_distance("dist_alice_ris_m", self.dist_alice_ris_m)?;
        check_distance("dist_ris_eve_m", self.dist_ris_eve_m)?;
        if !(self.aod_eve_rad > 0.0 && self.aod_eve_rad < FRAC_PI_2) {
            return Err(Error::invalid(
                "aod_eve_rad",
                format!(
                    "Eve's direction must lie in (0, pi/2), got {}",
                    self.aod_eve_rad
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

/// Secrecy rates over a polar grid; `rates[i * dists.len() + j]` belongs to
/// `(psis[i], dists[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyGrid {
    pub psis: Vec<f64>,
    pub dists: Vec<f64>,
    pub rates: Vec<f64>,
    pub scene: FixedScene,
    pub provenance: Provenance,
}

impl SecrecyGrid {
    pub fn rate(&self, psi_index: usize, dist_index: usize) -> f64 {
        self.rates[psi_index * self.dists.len() + dist_index]
    }

    pub fn column(&self, psi_index: usize) -> &[f64] {
        let n = self.dists.len();
        &self.rates[psi_index * n..(psi_index + 1) * n]
    }

    /// Number of cells with rate at least `r0`.
    pub fn count_at_least(&self, r0: f64) -> usize {
        self.rates.iter().filter(|&&r| r >= r0).count()
    }

    /// Cell mask of the secure region `{rate >= r0}`.
    pub fn region(&self, r0: f64) -> Vec<bool> {
        self.rates.iter().map(|&r| r >= r0).collect()
    }

    /// Long-format rows `(psi_rad, dist_m, rate_bps_hz)`, angle-major.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.psis.iter().enumerate().flat_map(move |(i, &psi)| {
            self.dists
                .iter()
                .enumerate()
                .map(move |(j, &d)| (psi, d, self.rate(i, j)))
        })
    }
}

/// Fills the grid, one angular column per work unit.
pub fn compute_map(
    cfg: &SystemConfig,
    scene: &FixedScene,
    spec: &MapSpec,
    mc: &MonteCarloSpec,
) -> Result<SecrecyGrid> {
    cfg.validate()?;
    scene.validate()?;
    spec.validate()?;
    let psis = spec.psi_values();
    let dists = spec.dist_values();

    let mc_cell = spec.monte_carlo.then(|| MonteCarloSpec {
        randomize: [RandomAngle::AodAlice, RandomAngle::AoaRis].into(),
        evaluator: Evaluator::Pipeline,
        ..mc.clone()
    });

    let columns: Vec<Result<Vec<f64>>> = psis
        .par_iter()
        .map(|&psi| {
            dists
                .iter()
                .map(|&d| match &mc_cell {
                    None => cell_rate(cfg, scene, psi, d),
                    Some(mc) => Ok(ergodic_secrecy_rate_mc(cfg, &scene.with_bob(psi, d), mc)?.mean),
                })
                .collect()
        })
        .collect();

    let mut rates = Vec::with_capacity(psis.len() * dists.len());
    for col in columns {
        rates.extend(col?);
    }
    let provenance = Provenance {
        config_hash: None,
        seed: spec.monte_carlo.then_some(mc.seed),
        trials: spec.monte_carlo.then_some(mc.trials),
    };
    Ok(SecrecyGrid {
        psis,
        dists,
        rates,
        scene: *scene,
        provenance,
    })
}

fn cell_rate(cfg: &SystemConfig, scene: &FixedScene, psi_bob: f64, d_bob: f64) -> Result<f64> {
    let cf = ClosedForm::new(cfg, scene.dist_alice_ris_m, d_bob, scene.dist_ris_eve_m)?;
    Ok(cf.sample(psi_bob, scene.aod_eve_rad).secrecy_rate_bps_hz)
}

/// Largest Bob distance along `psi_bob` whose rate is at least `r0`, found
/// by bisection on the closed form. The rate is nonincreasing in distance,
/// so the secure set along a ray is an interval starting at the origin.
///
/// Returns `Some(d_max)` when the whole ray up to `d_max` is secure and
/// `None` when no distance qualifies.
pub fn max_secure_distance(
    cfg: &SystemConfig,
    scene: &FixedScene,
    psi_bob: f64,
    r0: f64,
    d_max: f64,
) -> Result<Option<f64>> {
    cfg.validate()?;
    scene.validate()?;
    check_angle("aod_bob_rad", psi_bob)?;
    check_distance("dist_max_m", d_max)?;
    if r0.is_nan() || r0 < 0.0 {
        return Err(Error::invalid(
            "r0",
            format!("threshold must be nonnegative, got {r0}"),
        ));
    }
    let meets = |d: f64| -> Result<bool> { Ok(cell_rate(cfg, scene, psi_bob, d)? >= r0) };
    if meets(d_max)? {
        return Ok(Some(d_max));
    }
    let mut lo = MIN_DISTANCE_M.min(0.5 * d_max);
    if !meets(lo)? {
        return Ok(None);
    }
    let mut hi = d_max;
    while hi - lo > DISTANCE_TOLERANCE_M {
        let mid = 0.5 * (lo + hi);
        if meets(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// Which part of the grid a threshold covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coverage {
    /// Every cell meets the threshold.
    Full,
    /// No cell meets the threshold.
    Empty,
    Partial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub threshold_bps_hz: f64,
    /// `(psi_rad, dist_m)` crossings, ordered by angle, then by distance.
    pub points: Vec<(f64, f64)>,
    pub coverage: Coverage,
}

/// Per angular column, the distances where the rate crosses `r0`, linearly
/// interpolated between neighbouring cells.
pub fn extract_contour(grid: &SecrecyGrid, r0: f64) -> Contour {
    let above = grid.count_at_least(r0);
    let coverage = if above == grid.rates.len() {
        Coverage::Full
    } else if above == 0 {
        Coverage::Empty
    } else {
        Coverage::Partial
    };
    let mut points = Vec::new();
    if coverage == Coverage::Partial {
        for (i, &psi) in grid.psis.iter().enumerate() {
            let col = grid.column(i);
            for j in 0..col.len() - 1 {
                let (a, b) = (col[j], col[j + 1]);
                if (a >= r0) != (b >= r0) {
                    let t = (r0 - a) / (b - a);
                    let d = grid.dists[j] + t * (grid.dists[j + 1] - grid.dists[j]);
                    points.push((psi, d));
                }
            }
        }
    }
    Contour {
        threshold_bps_hz: r0,
        points,
        coverage,
    }
}
