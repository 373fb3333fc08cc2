//! Run configuration: a flat `key = value` file (TOML syntax) with defaults
//! for every key.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `fine_structure_constant` | 7.2973525693e-3 | sets c = 1/alpha |
//! | `lamb_shift_ghz` | 1.0 | gap given to the same-n manifold |
//! | `basis_size` | 120 | pseudo-states per channel |
//! | `excited_scale` | 1/n | radial scale of the excited atom's channels |
//! | `ground_scale` | 1 | radial scale of the ground atom's channels |
//! | `degeneracy_threshold` | 1e-9 | gaps below this (Eh) count as same-manifold |
//! | `wick_order` | 20 | Gauss–Legendre points per panel |
//! | `wick_tolerance` | 1e-10 | relative convergence target of the frequency integral |
//! | `wick_max_levels` | 8 | panel doublings before giving up |
//! | `symmetry` | "+" | default two-atom symmetry for identical atoms |
//! | `averaging` | `{ kind = "projection-average" }` | projection average of the excited atom |
//! | `table1_tolerance` | 1e-6 | relative tolerance of the `table1` self-check |
//! | `si_energy_factor` | 4.3597447222071e-18 | J per Eh, used by `--si` |
//! | `si_length_factor` | 5.29177210903e-11 | m per a0, used by `--si` |
//! | `execution` | "parallel" | "parallel" or "sequential" |
//! | `output` | unset | default output file for commands that write CSV |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::atomic::AveragingScheme;
use crate::constants::{self, ghz_to_hartree};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::response::SpectrumOptions;

/// Two-atom exchange symmetry of identical atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Symmetry {
    #[default]
    #[serde(rename = "+")]
    Gerade,
    #[serde(rename = "-")]
    Ungerade,
}

impl Symmetry {
    pub fn sign(self) -> f64 {
        match self {
            Symmetry::Gerade => 1.0,
            Symmetry::Ungerade => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub fine_structure_constant: f64,
    pub lamb_shift_ghz: f64,
    pub basis_size: usize,
    pub excited_scale: Option<f64>,
    pub ground_scale: Option<f64>,
    pub degeneracy_threshold: f64,
    pub wick_order: usize,
    pub wick_tolerance: f64,
    pub wick_max_levels: usize,
    pub symmetry: Symmetry,
    pub averaging: AveragingScheme,
    pub table1_tolerance: f64,
    pub si_energy_factor: f64,
    pub si_length_factor: f64,
    pub execution: Execution,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fine_structure_constant: constants::FINE_STRUCTURE,
            lamb_shift_ghz: constants::DEFAULT_LAMB_SHIFT_GHZ,
            basis_size: 120,
            excited_scale: None,
            ground_scale: None,
            degeneracy_threshold: 1e-9,
            wick_order: 20,
            wick_tolerance: 1e-10,
            wick_max_levels: 8,
            symmetry: Symmetry::Gerade,
            averaging: AveragingScheme::ProjectionAverage,
            table1_tolerance: 1e-6,
            si_energy_factor: constants::HARTREE_JOULE,
            si_length_factor: constants::BOHR_METRE,
            execution: Execution::Parallel,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fine_structure_constant", self.fine_structure_constant),
            ("lamb_shift_ghz", self.lamb_shift_ghz),
            ("degeneracy_threshold", self.degeneracy_threshold),
            ("wick_tolerance", self.wick_tolerance),
            ("table1_tolerance", self.table1_tolerance),
            ("si_energy_factor", self.si_energy_factor),
            ("si_length_factor", self.si_length_factor),
            ("excited_scale", self.excited_scale.unwrap_or(1.0)),
            ("ground_scale", self.ground_scale.unwrap_or(1.0)),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.basis_size < 4 {
            return Err(Error::Config(format!(
                "basis_size must be at least 4, got {}",
                self.basis_size
            )));
        }
        if self.wick_order < 2 {
            return Err(Error::Config("wick_order must be at least 2".into()));
        }
        Ok(())
    }

    pub fn speed_of_light(&self) -> f64 {
        constants::speed_of_light(self.fine_structure_constant)
    }

    pub fn lamb_shift(&self) -> f64 {
        ghz_to_hartree(self.lamb_shift_ghz)
    }

    /// Spectrum options for the excited (`excited = true`) or ground atom.
    pub fn spectrum_options(&self, excited: bool) -> SpectrumOptions {
        SpectrumOptions {
            size: self.basis_size,
            scale: if excited {
                self.excited_scale
            } else {
                self.ground_scale
            },
            degeneracy_threshold: self.degeneracy_threshold,
            lamb_shift: self.lamb_shift(),
        }
    }

    /// Short SHA-256 digest of the canonical serialization.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn flat_keys_round_trip() {
        let cfg = RunConfig::from_toml(
            "lamb_shift_ghz = 2.5\nbasis_size = 80\nsymmetry = \"-\"\nexecution = \"sequential\"\n\
             averaging = { kind = \"single-projection\", m = 1 }\n",
        )
        .unwrap();
        assert_eq!(cfg.basis_size, 80);
        assert_eq!(cfg.symmetry, Symmetry::Ungerade);
        assert_eq!(cfg.averaging, AveragingScheme::SingleProjection(1));
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values_and_keys() {
        assert!(RunConfig::from_toml("lamb_shift_ghz = 0.0").is_err());
        assert!(RunConfig::from_toml("wick_tolerance = -1e-3").is_err());
        assert!(RunConfig::from_toml("no_such_key = 1").is_err());
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = RunConfig::default();
        let b = RunConfig {
            basis_size: 100,
            ..RunConfig::default()
        };
        assert_eq!(a.fingerprint(), RunConfig::default().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
    }
}
