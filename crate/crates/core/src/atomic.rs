//! Hydrogen bound states, energies, dipole radial integrals and the angular
//! dipole algebra.
//!
//! Conventions: infinite nuclear mass, nonrelativistic energies, radial
//! functions positive near the origin, and *real* spherical harmonics for the
//! magnetic labels so that every Cartesian dipole tensor is real.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{ln_factorial, GaussLaguerre};

const SPECTROSCOPIC: &[u8] = b"SPDFGHIKLMNOQRTUV";

/// A hydrogen eigenstate |n l m> with a real-harmonic magnetic label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundState {
    n: u32,
    l: u32,
    m: i32,
}

impl BoundState {
    pub fn new(n: u32, l: u32, m: i32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain(
                "principal quantum number must be >= 1".into(),
            ));
        }
        if l >= n {
            return Err(Error::Domain(format!("l = {l} must be below n = {n}")));
        }
        if m.unsigned_abs() > l {
            return Err(Error::Domain(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(Self { n, l, m })
    }

    /// The m = 0 member of the (n, l) multiplet.
    pub fn level(n: u32, l: u32) -> Result<Self> {
        Self::new(n, l, 0)
    }

    pub fn ground() -> Self {
        Self { n: 1, l: 0, m: 0 }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn with_m(&self, m: i32) -> Result<Self> {
        Self::new(self.n, self.l, m)
    }

    pub fn energy(&self) -> f64 {
        -0.5 / (self.n as f64 * self.n as f64)
    }

    /// Same (n, l) level, ignoring the projection.
    pub fn same_level(&self, other: &BoundState) -> bool {
        self.n == other.n && self.l == other.l
    }

    pub fn letter(&self) -> char {
        letter_for(self.l)
    }
}

pub(crate) fn letter_for(l: u32) -> char {
    SPECTROSCOPIC
        .get(l as usize)
        .map(|&b| b as char)
        .unwrap_or('?')
}

impl fmt::Display for BoundState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.n, self.letter())?;
        if self.l > 0 {
            write!(f, "(m={})", self.m)?;
        }
        Ok(())
    }
}

/// Parses level labels such as `12D` or `1s`; the projection is set to zero.
impl FromStr for BoundState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s
            .find(|c: char| !c.is_ascii_digit())
            .ok_or_else(|| Error::Domain(format!("missing orbital letter in '{s}'")))?;
        let (digits, letter) = s.split_at(split);
        let n: u32 = digits
            .parse()
            .map_err(|_| Error::Domain(format!("bad principal quantum number in '{s}'")))?;
        let mut chars = letter.chars();
        let c = chars.next().unwrap().to_ascii_uppercase();
        if chars.next().is_some() {
            return Err(Error::Domain(format!("trailing characters in level '{s}'")));
        }
        let l = SPECTROSCOPIC
            .iter()
            .position(|&b| b as char == c)
            .ok_or_else(|| Error::Domain(format!("unknown orbital letter '{c}'")))?;
        Self::level(n, l as u32)
    }
}

/// An energy difference in Hartree.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct EnergyGap(pub f64);

impl EnergyGap {
    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Nonrelativistic hydrogen energy -1/(2 n^2) in Hartree.
pub fn bound_energy(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain(
            "principal quantum number must be >= 1".into(),
        ));
    }
    Ok(-0.5 / (n as f64 * n as f64))
}

/// E(virtual) - E(reference).
pub fn transition_gap(virtual_state: &BoundState, reference: &BoundState) -> EnergyGap {
    EnergyGap(virtual_state.energy() - reference.energy())
}

/// Closed-form reduced radial function u_nl(r) = r R_nl(r).
#[derive(Debug, Clone)]
pub struct RadialWavefunction {
    n: u32,
    l: u32,
    ln_norm: f64,
}

impl RadialWavefunction {
    pub fn new(n: u32, l: u32) -> Result<Self> {
        BoundState::level(n, l)?;
        let nf = n as f64;
        // N^2 = (2/n)^3 (n-l-1)! / (2n (n+l)!)
        let ln_norm = 0.5
            * (3.0 * (2.0 / nf).ln() + ln_factorial(n - l - 1)
                - (2.0 * nf).ln()
                - ln_factorial(n + l));
        Ok(Self { n, l, ln_norm })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// Decay constant 1/n of the exponential tail.
    pub fn decay(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// u_nl(r) = r R_nl(r) with R_nl positive at small r.
    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let nf = self.n as f64;
        let rho = 2.0 * r / nf;
        let poly = laguerre_poly(self.n - self.l - 1, 2 * self.l + 1, rho);
        let ln_pref = self.ln_norm + self.l as f64 * rho.ln() - 0.5 * rho + r.ln();
        poly * ln_pref.exp()
    }
}

/// Associated Laguerre polynomial L_k^(a)(x) by upward recurrence.
pub(crate) fn laguerre_poly(k: u32, a: u32, x: f64) -> f64 {
    let a = a as f64;
    let mut p0 = 1.0;
    if k == 0 {
        return p0;
    }
    let mut p1 = 1.0 + a - x;
    for j in 1..k {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0 + a - x) * p1 - (jf + a) * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Radial dipole integral `int_0^inf u_{n1 l1}(r) r u_{n2 l2}(r) dr` in Bohr radii.
///
/// The integrand is a polynomial times `exp(-(1/n1 + 1/n2) r)`, so a
/// generalized Gauss–Laguerre rule of sufficient order integrates it exactly.
pub fn radial_dipole(n1: u32, l1: u32, n2: u32, l2: u32) -> Result<f64> {
    if l1.abs_diff(l2) != 1 {
        return Err(Error::SelectionRule { l1, l2 });
    }
    let a = RadialWavefunction::new(n1, l1)?;
    let b = RadialWavefunction::new(n2, l2)?;
    let kappa = a.decay() + b.decay();
    let degree = (n1 - l1 - 1) + (n2 - l2 - 1);
    let rule = GaussLaguerre::new(degree as usize / 2 + 4, l1 + l2 + 3)?;
    Ok(rule
        .nodes()
        .iter()
        .zip(rule.scaled_weights())
        .map(|(&y, &w)| {
            let r = y / kappa;
            w * a.eval(r) * r * b.eval(r)
        })
        .sum::<f64>()
        / kappa)
}

/// Cartesian component of the unit vector / dipole operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Wigner 3j symbol for integer angular momenta (Racah formula).
pub fn wigner_3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0
        || m1.abs() > j1
        || m2.abs() > j2
        || m3.abs() > j3
        || j3 < (j1 - j2).abs()
        || j3 > j1 + j2
    {
        return 0.0;
    }
    let lf = |k: i32| ln_factorial(k as u32);
    let ln_delta =
        0.5 * (lf(j1 + j2 - j3) + lf(j1 - j2 + j3) + lf(-j1 + j2 + j3) - lf(j1 + j2 + j3 + 1));
    let ln_pref =
        0.5 * (lf(j1 + m1) + lf(j1 - m1) + lf(j2 + m2) + lf(j2 - m2) + lf(j3 + m3) + lf(j3 - m3));
    let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let ln_den = lf(k)
            + lf(j1 + j2 - j3 - k)
            + lf(j1 - m1 - k)
            + lf(j2 + m2 - k)
            + lf(j3 - j2 + m1 + k)
            + lf(j3 - j1 - m2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (ln_delta + ln_pref - ln_den).exp();
    }
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    phase * sum
}

/// <l m | Y_1mu | l' m'> with complex harmonics (Condon–Shortley phase).
fn gaunt_y1(l: i32, m: i32, lp: i32, mp: i32, mu: i32) -> f64 {
    let pref =
        ((2 * l + 1) as f64 * 3.0 * (2 * lp + 1) as f64 / (4.0 * std::f64::consts::PI)).sqrt();
    let phase = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * pref * wigner_3j(l, 1, lp, 0, 0, 0) * wigner_3j(l, 1, lp, -m, mu, mp)
}

/// <l m | r_hat_i | l' m'> with complex harmonics.
fn complex_unit_vector_element(l: i32, m: i32, lp: i32, mp: i32, axis: Axis) -> Complex64 {
    let s = (4.0 * std::f64::consts::PI / 3.0).sqrt();
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let y = |mu| gaunt_y1(l, m, lp, mp, mu);
    match axis {
        Axis::Z => Complex64::new(s * y(0), 0.0),
        Axis::X => Complex64::new(s * r2 * (y(-1) - y(1)), 0.0),
        Axis::Y => Complex64::new(0.0, s * r2 * (y(-1) + y(1))),
    }
}

/// Coefficients of the real harmonic S_lm in terms of complex Y_la.
fn real_harmonic_coefficients(m: i32) -> Vec<(i32, Complex64)> {
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let parity = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => vec![(0, Complex64::new(1.0, 0.0))],
        std::cmp::Ordering::Greater => vec![
            (m, Complex64::new(parity * r2, 0.0)),
            (-m, Complex64::new(r2, 0.0)),
        ],
        std::cmp::Ordering::Less => vec![
            (m, Complex64::new(0.0, r2)),
            (-m, Complex64::new(0.0, -parity * r2)),
        ],
    }
}

/// Angular dipole factor `<l m | r_hat_i | l' m'>` for real spherical
/// harmonics (m > 0 ~ cos(m phi), m < 0 ~ sin(|m| phi)).
///
/// Zero unless |l - l'| = 1 and the projection selection rule for axis i holds.
pub fn angular_dipole_factor(l: u32, m: i32, lp: u32, mp: i32, axis: Axis) -> f64 {
    if l.abs_diff(lp) != 1 || m.unsigned_abs() > l || mp.unsigned_abs() > lp {
        return 0.0;
    }
    let (l, lp) = (l as i32, lp as i32);
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, ca) in real_harmonic_coefficients(m) {
        for (b, cb) in real_harmonic_coefficients(mp) {
            acc += ca.conj() * cb * complex_unit_vector_element(l, a, lp, b, axis);
        }
    }
    debug_assert!(acc.im.abs() < 1e-12, "real-harmonic element must be real");
    acc.re
}

/// `sum_{m'} <l m|r_hat_i|l' m'><l' m'|r_hat_k|l'' m''>`: the angular part of a
/// dipole-dipole numerator routed through the l' channel.
pub fn angular_pair_tensor(
    l: u32,
    m: i32,
    channel: u32,
    l2: u32,
    m2: i32,
) -> nalgebra::Matrix3<f64> {
    let mut t = nalgebra::Matrix3::zeros();
    let c = channel as i32;
    for mp in -c..=c {
        for i in Axis::ALL {
            let left = angular_dipole_factor(l, m, channel, mp, i);
            if left == 0.0 {
                continue;
            }
            for k in Axis::ALL {
                t[(i.index(), k.index())] += left * angular_dipole_factor(channel, mp, l2, m2, k);
            }
        }
    }
    t
}

/// How the excited-state projections are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "m")]
pub enum AveragingScheme {
    ProjectionAverage,
    SingleProjection(i32),
    /// Average over J and its projections. With J-independent energies this is
    /// the same uniform average over m.
    FineStructureAverage,
}

/// Projection weights for a multiplet of orbital angular momentum `l`.
pub fn averaging_weights(scheme: AveragingScheme, l: u32) -> Result<Vec<(i32, f64)>> {
    let li = l as i32;
    match scheme {
        AveragingScheme::ProjectionAverage | AveragingScheme::FineStructureAverage => {
            let w = 1.0 / (2 * l + 1) as f64;
            Ok((-li..=li).map(|m| (m, w)).collect())
        }
        AveragingScheme::SingleProjection(m) => {
            if m.abs() > li {
                return Err(Error::Domain(format!(
                    "projection m = {m} not allowed for l = {l}"
                )));
            }
            Ok(vec![(m, 1.0)])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bohr_energies() {
        assert_eq!(bound_energy(1).unwrap(), -0.5);
        assert_eq!(bound_energy(2).unwrap(), -0.125);
        assert!((bound_energy(12).unwrap() + 1.0 / 288.0).abs() < 1e-18);
        assert!(bound_energy(0).is_err());
    }

    #[test]
    fn gaps() {
        let s1 = BoundState::ground();
        let p2 = BoundState::level(2, 1).unwrap();
        let d12 = BoundState::level(12, 2).unwrap();
        let p12 = BoundState::level(12, 1).unwrap();
        assert_eq!(transition_gap(&p2, &s1).value(), 0.375);
        assert!((transition_gap(&p2, &d12).value() - (-0.125 + 1.0 / 288.0)).abs() < 1e-16);
        assert_eq!(transition_gap(&p12, &d12).value(), 0.0);
    }

    #[test]
    fn state_validation() {
        assert!(BoundState::new(2, 2, 0).is_err());
        assert!(BoundState::new(3, 1, 2).is_err());
        assert!(BoundState::new(0, 0, 0).is_err());
        assert_eq!(
            "12D".parse::<BoundState>().unwrap(),
            BoundState::level(12, 2).unwrap()
        );
        assert_eq!("1s".parse::<BoundState>().unwrap(), BoundState::ground());
        assert!("2F".parse::<BoundState>().is_err());
        assert!("D".parse::<BoundState>().is_err());
    }

    #[test]
    fn known_radial_integrals() {
        let v = radial_dipole(1, 0, 2, 1).unwrap();
        assert!((v - 128.0 * 6f64.sqrt() / 243.0).abs() < 1e-14);
        let v = radial_dipole(2, 0, 2, 1).unwrap();
        assert!((v + 3.0 * 3f64.sqrt()).abs() < 1e-13);
        assert!(matches!(
            radial_dipole(1, 0, 3, 2),
            Err(Error::SelectionRule { .. })
        ));
    }

    #[test]
    fn wavefunction_normalized() {
        for (n, l) in [(1, 0), (4, 2), (12, 2), (12, 3)] {
            let u = RadialWavefunction::new(n, l).unwrap();
            let kappa = 2.0 / n as f64;
            let rule = GaussLaguerre::new(n as usize + 4, 2 * l + 2).unwrap();
            let norm: f64 = rule
                .nodes()
                .iter()
                .zip(rule.scaled_weights())
                .map(|(&y, &w)| w * u.eval(y / kappa).powi(2))
                .sum::<f64>()
                / kappa;
            assert!((norm - 1.0).abs() < 1e-13, "{n}{l}: {norm}");
            assert!(u.eval(1e-3) > 0.0);
        }
    }

    #[test]
    fn angular_examples() {
        let v = angular_dipole_factor(0, 0, 1, 0, Axis::Z);
        assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(angular_dipole_factor(0, 0, 1, 0, Axis::X), 0.0);
        let v = angular_dipole_factor(2, 0, 1, 0, Axis::Z);
        assert!((v - 2.0 / 15f64.sqrt()).abs() < 1e-15);
        assert_eq!(angular_dipole_factor(2, 0, 0, 0, Axis::Z), 0.0);
    }

    #[test]
    fn real_p_orbitals_map_to_cartesian_axes() {
        let s = 1.0 / 3f64.sqrt();
        assert!((angular_dipole_factor(0, 0, 1, 1, Axis::X) - s).abs() < 1e-15);
        assert!((angular_dipole_factor(0, 0, 1, -1, Axis::Y) - s).abs() < 1e-15);
        assert!(angular_dipole_factor(0, 0, 1, 1, Axis::Y).abs() < 1e-15);
    }

    #[test]
    fn angular_strength_sum_rule() {
        // sum over m', i of |<l m|r_i|l' m'>|^2 = l_>/(2l+1)
        for l in 0..5u32 {
            for lp in [l + 1, l.saturating_sub(1)] {
                if lp == l {
                    continue;
                }
                for m in -(l as i32)..=l as i32 {
                    let t = angular_pair_tensor(l, m, lp, l, m);
                    let expected = l.max(lp) as f64 / (2 * l + 1) as f64;
                    assert!((t.trace() - expected).abs() < 1e-13, "l={l} lp={lp} m={m}");
                }
            }
        }
    }

    #[test]
    fn weights() {
        let w = averaging_weights(AveragingScheme::ProjectionAverage, 2).unwrap();
        assert_eq!(w.len(), 5);
        assert!(w.iter().all(|&(_, x)| (x - 0.2).abs() < 1e-16));
        assert_eq!(
            averaging_weights(AveragingScheme::SingleProjection(0), 2).unwrap(),
            vec![(0, 1.0)]
        );
        assert!(averaging_weights(AveragingScheme::SingleProjection(3), 2).is_err());
        assert_eq!(
            averaging_weights(AveragingScheme::FineStructureAverage, 2).unwrap(),
            averaging_weights(AveragingScheme::ProjectionAverage, 2).unwrap()
        );
    }

    #[test]
    fn three_j_known_values() {
        // (1 1 0; 0 0 0) = -1/sqrt(3)
        assert!((wigner_3j(1, 1, 0, 0, 0, 0) + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        // (2 1 1; 0 0 0) = sqrt(2/15)
        assert!((wigner_3j(2, 1, 1, 0, 0, 0) - (2.0f64 / 15.0).sqrt()).abs() < 1e-15);
        assert_eq!(wigner_3j(1, 1, 1, 0, 0, 0), 0.0);
    }
}
