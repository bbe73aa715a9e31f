//! Run configuration file (TOML).
//!
//! Sections mirror the library types: `[system]`, `[geometry]`,
//! `[monte_carlo]`, `[map]`, plus per-subcommand `[sweep]`, `[bound_check]`
//! and `[eta_check]`. Every key is optional; omitted keys take the defaults
//! of the corresponding type.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{LinkGeometry, SystemConfig};
use crate::secrecy_map::MapSpec;
use crate::simulation::{MonteCarloSpec, SweepParameter};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            parameter: SweepParameter::NRisElements,
            values: vec![8.0, 16.0, 32.0, 64.0, 128.0],
        }
    }
}

/// List of surface sizes checked by `bound-check` and `eta-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementCounts {
    pub n_values: Vec<usize>,
}

impl ElementCounts {
    fn with(n_values: &[usize]) -> Self {
        Self {
            n_values: n_values.to_vec(),
        }
    }
}

fn default_bound_check() -> ElementCounts {
    ElementCounts::with(&[8, 16, 32, 64, 128])
}

fn default_eta_check() -> ElementCounts {
    ElementCounts::with(&[4, 8, 16, 32])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub system: SystemConfig,
    pub geometry: LinkGeometry,
    pub monte_carlo: MonteCarloSpec,
    pub map: MapSpec,
    pub sweep: SweepSpec,
    #[serde(default = "default_bound_check")]
    pub bound_check: ElementCounts,
    #[serde(default = "default_eta_check")]
    pub eta_check: ElementCounts,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            system: SystemConfig::default(),
            geometry: LinkGeometry::default(),
            monte_carlo: MonteCarloSpec::default(),
            map: MapSpec::default(),
            sweep: SweepSpec::default(),
            bound_check: default_bound_check(),
            eta_check: default_eta_check(),
        }
    }
}

/// Config problem with the location it was found at.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted key path such as `system.n_ris_elements`, when known.
    pub field: Option<String>,
    /// 1-based line in the source file, when known.
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (&self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "line {l}: {k}: {}", self.message),
            (None, Some(k)) => write!(f, "{k}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Line holding `key` inside `[section]`, if it is spelled out in `src`.
fn locate_key(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| ConfigError {
            field: None,
            line: e.span().map(|s| line_of_offset(src, s.start)),
            message: e.message().trim().to_string(),
        })?;
        cfg.validate().map_err(|mut e| {
            if let Some(field) = &e.field {
                if let Some((section, key)) = field.split_once('.') {
                    e.line = locate_key(src, section, key);
                }
            }
            e
        })?;
        Ok(cfg)
    }

    /// Checks every section; errors name the offending key as
    /// `section.key`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn wrap(section: &str, r: crate::Result<()>) -> Result<(), ConfigError> {
            r.map_err(|e| match e {
                Error::InvalidParameter { field, reason } => ConfigError {
                    field: Some(format!("{section}.{field}")),
                    line: None,
                    message: reason,
                },
                other => ConfigError {
                    field: Some(section.to_string()),
                    line: None,
                    message: other.to_string(),
                },
            })
        }
        wrap("system", self.system.validate())?;
        wrap("geometry", self.geometry.validate())?;
        wrap("monte_carlo", self.monte_carlo.validate())?;
        wrap("map", self.map.validate())?;
        if self.sweep.values.is_empty() {
            return Err(ConfigError {
                field: Some("sweep.values".into()),
                line: None,
                message: "must list at least one value".into(),
            });
        }
        for (section, counts) in [
            ("bound_check", &self.bound_check),
            ("eta_check", &self.eta_check),
        ] {
            if counts.n_values.is_empty() || counts.n_values.contains(&0) {
                return Err(ConfigError {
                    field: Some(format!("{section}.n_values")),
                    line: None,
                    message: "must be a nonempty list of positive integers".into(),
                });
            }
        }
        Ok(())
    }

    /// Canonical TOML of the whole config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 over the canonical TOML with `output_dir` blanked, since the
    /// output location does not influence any result.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.system.tx_power_watts, 20.0);
        assert_eq!(cfg.system.noise_density_dbm_hz, -174.0);
        assert_eq!(cfg.system.bandwidth_hz, 1e8);
        assert_eq!(cfg.system.pathloss_alpha_db, 61.4);
        assert_eq!(cfg.system.pathloss_beta, 2.0);
    }

    #[test]
    fn zero_elements_names_field_and_line() {
        let src = "[system]\nm_tx_antennas = 4\nn_ris_elements = 0\n";
        let e = RunConfig::from_toml(src).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("system.n_ris_elements"));
        assert_eq!(e.line, Some(3));
        assert!(e.to_string().contains("n_ris_elements"));
    }

    #[test]
    fn parse_errors_carry_line() {
        let src = "[system]\nm_tx_antennas = 4\nn_ris_elements = -3\n";
        let e = RunConfig::from_toml(src).unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = RunConfig::from_toml("[system]\nwatts = 3\n").unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn round_trip_keeps_hash() {
        let src = "[system]\nn_ris_elements = 16\n[geometry]\ndist_ris_bob_m = 12.5\n[monte_carlo]\nseed = 99\n";
        let cfg = RunConfig::from_toml(src).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.config_hash(), again.config_hash());
        assert_ne!(cfg.config_hash(), RunConfig::default().config_hash());
    }

    #[test]
    fn output_dir_does_not_change_hash() {
        let a = RunConfig::default();
        let b = RunConfig {
            output_dir: "/tmp/elsewhere".into(),
            ..RunConfig::default()
        };
        assert_eq!(a.config_hash(), b.config_hash());
    }
}
