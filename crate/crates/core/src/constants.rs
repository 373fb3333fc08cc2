//! Physical constants and unit conversions. Everything in the crate works in
//! Hartree atomic units: hbar = e = m_e = 4 pi eps0 = 1, so c = 1/alpha.

/// CODATA 2018 fine-structure constant.
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;

/// Hartree energy expressed as a frequency, E_h / h in Hz.
pub const HARTREE_HZ: f64 = 6.579_683_920_502e15;

/// Hartree energy in joule.
pub const HARTREE_JOULE: f64 = 4.359_744_722_207_1e-18;

/// Bohr radius in metre.
pub const BOHR_METRE: f64 = 5.291_772_109_03e-11;

/// Default Lamb-shift scale separating the quasi-degenerate manifold, in GHz.
pub const DEFAULT_LAMB_SHIFT_GHZ: f64 = 1.0;

/// Converts a frequency given in GHz (E = h nu) to Hartree.
pub fn ghz_to_hartree(ghz: f64) -> f64 {
    ghz * 1e9 / HARTREE_HZ
}

/// Speed of light in atomic units for a given fine-structure constant.
pub fn speed_of_light(alpha: f64) -> f64 {
    1.0 / alpha
}
