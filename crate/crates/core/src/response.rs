//! Dynamic dipole polarizabilities in spectral (pole-sum) form.
//!
//! A polarizability is stored channel by channel: every virtual channel `l'`
//! contributes one angular tensor times a scalar pole sum
//! `sum_k w_k [1/(a_k - w) + 1/(a_k + w)]`, with `a_k` the pseudo-state gap
//! measured from the reference energy. The Feynman `-i eps` is taken in the
//! exact limit: away from a pole the sum is evaluated as written, and landing
//! exactly on a pole is reported as an error.
//!
//! Virtual states whose gap is below the degeneracy threshold (the same-n
//! manifold of an excited reference) are split into their own channels and
//! given the Lamb-shift energy as gap.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::atomic::{angular_pair_tensor, averaging_weights, AveragingScheme, BoundState};
use crate::basis::{dipole_vector, RadialChannelBasis};
use crate::cache::SpectralCache;
use crate::error::{Error, Result};

/// Which line the frequency sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyAxis {
    Real,
    Imaginary,
}

/// A frequency on the real axis or on the positive imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPoint {
    value: Complex64,
    axis: FrequencyAxis,
}

impl FrequencyPoint {
    pub fn real(omega: f64) -> Self {
        Self {
            value: Complex64::new(omega, 0.0),
            axis: FrequencyAxis::Real,
        }
    }

    /// The point `i u`.
    pub fn imaginary(u: f64) -> Self {
        Self {
            value: Complex64::new(0.0, u),
            axis: FrequencyAxis::Imaginary,
        }
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn axis(&self) -> FrequencyAxis {
        self.axis
    }
}

/// Which reference energy the mixed denominators are measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Underline {
    /// `E_v - E_A`
    A,
    /// `E_v - E_B`
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolarizabilityKind {
    Direct(BoundState),
    Mixed {
        a: BoundState,
        b: BoundState,
        side: Underline,
    },
}

/// Selects the regular spectrum, the quasi-degenerate manifold, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    All,
    Regular,
    QuasiDegenerate,
}

impl Part {
    fn admits(self, ch: &SpectralChannel) -> bool {
        match self {
            Part::All => true,
            Part::Regular => !ch.quasi_degenerate,
            Part::QuasiDegenerate => ch.quasi_degenerate,
        }
    }
}

/// One virtual channel: angular tensor and the radial pole sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralChannel {
    pub l: u32,
    pub tensor: Matrix3<f64>,
    pub poles: Vec<f64>,
    pub weights: Vec<f64>,
    /// Pseudo-state index of each pole inside the channel basis.
    pub indices: Vec<usize>,
    pub quasi_degenerate: bool,
}

impl SpectralChannel {
    /// `sum_k w_k 2 a_k / (a_k^2 + u^2)`, the scalar sum at `w = i u`.
    pub fn imaginary_sum(&self, u: f64) -> f64 {
        let u2 = u * u;
        self.poles
            .iter()
            .zip(&self.weights)
            .map(|(&a, &w)| 2.0 * w * a / (a * a + u2))
            .sum()
    }
}

/// Controls how a spectral representation is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub size: usize,
    /// Radial scale; `None` means `1/n` of the state the gaps refer to.
    pub scale: Option<f64>,
    /// Gaps below this magnitude (Hartree) are routed to the quasi-degenerate part.
    pub degeneracy_threshold: f64,
    /// Gap assigned to quasi-degenerate states (Hartree).
    pub lamb_shift: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            size: 120,
            scale: None,
            degeneracy_threshold: 1e-9,
            lamb_shift: crate::constants::ghz_to_hartree(crate::constants::DEFAULT_LAMB_SHIFT_GHZ),
        }
    }
}

impl SpectrumOptions {
    fn scale_for(&self, reference: &BoundState) -> f64 {
        self.scale.unwrap_or(1.0 / reference.n() as f64)
    }
}

/// Spectral form of a direct or mixed polarizability.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPolarizability {
    kind: PolarizabilityKind,
    channels: Vec<SpectralChannel>,
}

impl SpectralPolarizability {
    pub fn kind(&self) -> PolarizabilityKind {
        self.kind
    }

    pub fn channels(&self) -> &[SpectralChannel] {
        &self.channels
    }

    /// True when no channel survives the selection rules.
    pub fn is_zero(&self) -> bool {
        self.channels.is_empty()
    }

    /// Copy restricted to one part of the spectrum.
    pub fn part(&self, part: Part) -> Self {
        Self {
            kind: self.kind,
            channels: self
                .channels
                .iter()
                .filter(|c| part.admits(c))
                .cloned()
                .collect(),
        }
    }

    /// Same spectrum with every numerator tensor transposed.
    pub fn transposed(&self) -> Self {
        let mut out = self.clone();
        out.channels
            .iter_mut()
            .for_each(|c| c.tensor.transpose_mut());
        out
    }

    /// Flat list of (pole gap, numerator tensor).
    pub fn terms(&self) -> Vec<(f64, Matrix3<f64>)> {
        self.channels
            .iter()
            .flat_map(|ch| {
                ch.poles
                    .iter()
                    .zip(&ch.weights)
                    .map(move |(&a, &w)| (a, ch.tensor * w))
            })
            .collect()
    }

    /// Full tensor at a real or imaginary frequency.
    pub fn tensor(&self, omega: FrequencyPoint) -> Result<Matrix3<Complex64>> {
        let w = omega.value();
        let mut out = Matrix3::<Complex64>::zeros();
        for ch in &self.channels {
            let mut s = Complex64::new(0.0, 0.0);
            for ((&a, &wt), &k) in ch.poles.iter().zip(&ch.weights).zip(&ch.indices) {
                let (minus, plus) = (a - w, a + w);
                let tiny = 1e-14 * a.abs().max(f64::MIN_POSITIVE);
                if minus.norm() <= tiny || plus.norm() <= tiny {
                    return Err(Error::Resonance {
                        omega: w.re,
                        gap: a,
                        state: format!("pseudo-state {k} of the l = {} channel", ch.l),
                    });
                }
                s += wt * (minus.inv() + plus.inv());
            }
            out += ch.tensor.map(|t| Complex64::new(t, 0.0)) * s;
        }
        Ok(out)
    }

    /// Real tensor at `w = i u`, restricted to `part`.
    pub fn imaginary_axis(&self, u: f64, part: Part) -> Matrix3<f64> {
        self.channels
            .iter()
            .filter(|c| part.admits(c))
            .fold(Matrix3::zeros(), |acc, ch| {
                acc + ch.tensor * ch.imaginary_sum(u)
            })
    }

    /// Real tensor at a real frequency that is not a pole.
    pub fn real_axis(&self, omega: f64) -> Result<Matrix3<f64>> {
        Ok(self.tensor(FrequencyPoint::real(omega))?.map(|z| z.re))
    }

    /// Static tensor of the chosen part.
    pub fn static_tensor(&self, part: Part) -> Matrix3<f64> {
        self.imaginary_axis(0.0, part)
    }
}

fn radial_terms(
    reference: &BoundState,
    basis: &RadialChannelBasis,
    partner: Option<&[f64]>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let amps = dipole_vector(reference, basis)?;
    let gaps: Vec<f64> = basis
        .energies()
        .iter()
        .map(|e| e - reference.energy())
        .collect();
    let weights = match partner {
        None => amps.amplitudes().iter().map(|a| a * a).collect(),
        Some(other) => amps
            .amplitudes()
            .iter()
            .zip(other)
            .map(|(a, b)| a * b)
            .collect(),
    };
    Ok((gaps, weights))
}

/// Splits pole lists into regular and quasi-degenerate channels.
fn push_split(
    out: &mut Vec<SpectralChannel>,
    l: u32,
    tensor: Matrix3<f64>,
    gaps: &[f64],
    weights: &[f64],
    opts: &SpectrumOptions,
) {
    let mut regular = SpectralChannel {
        l,
        tensor,
        poles: Vec::new(),
        weights: Vec::new(),
        indices: Vec::new(),
        quasi_degenerate: false,
    };
    let mut degenerate = SpectralChannel {
        quasi_degenerate: true,
        ..regular.clone()
    };
    for (k, (&a, &w)) in gaps.iter().zip(weights).enumerate() {
        let target = if a.abs() < opts.degeneracy_threshold {
            &mut degenerate
        } else {
            &mut regular
        };
        target.poles.push(if target.quasi_degenerate {
            opts.lamb_shift
        } else {
            a
        });
        target.weights.push(w);
        target.indices.push(k);
    }
    out.push(regular);
    if !degenerate.poles.is_empty() {
        out.push(degenerate);
    }
}

fn dipole_channels(l: u32) -> impl Iterator<Item = u32> {
    [l.checked_sub(1), Some(l + 1)].into_iter().flatten()
}

/// Direct polarizability of `state`, averaged over projections per `scheme`.
pub fn direct_polarizability(
    state: &BoundState,
    scheme: AveragingScheme,
    opts: &SpectrumOptions,
    cache: &SpectralCache,
) -> Result<SpectralPolarizability> {
    let weights = averaging_weights(scheme, state.l())?;
    let scale = opts.scale_for(state);
    let mut channels = Vec::new();
    for ch in dipole_channels(state.l()) {
        let basis = cache.channel(ch, opts.size, scale)?;
        let (gaps, w) = radial_terms(state, &basis, None)?;
        let tensor = weights.iter().fold(Matrix3::zeros(), |acc, &(m, p)| {
            acc + angular_pair_tensor(state.l(), m, ch, state.l(), m) * p
        });
        push_split(&mut channels, ch, tensor, &gaps, &w, opts);
    }
    Ok(SpectralPolarizability {
        kind: PolarizabilityKind::Direct(*state),
        channels,
    })
}

/// Mixed polarizability `sum_v <a|d_i|v><v|d_j|b> [...]` with the denominators
/// of the underlined side. Empty (identically zero) when no common virtual
/// channel exists, i.e. unless `l_a = l_b` or `|l_a - l_b| = 2`.
pub fn mixed_polarizability(
    a: &BoundState,
    b: &BoundState,
    side: Underline,
    opts: &SpectrumOptions,
    cache: &SpectralCache,
) -> Result<SpectralPolarizability> {
    let reference = match side {
        Underline::A => a,
        Underline::B => b,
    };
    let scale = opts.scale_for(reference);
    let mut channels = Vec::new();
    for ch in dipole_channels(a.l()).filter(|&c| c.abs_diff(b.l()) == 1) {
        let tensor = angular_pair_tensor(a.l(), a.m(), ch, b.l(), b.m());
        if tensor.abs().max() == 0.0 {
            continue;
        }
        let basis = cache.channel(ch, opts.size, scale)?;
        let other = dipole_vector(if side == Underline::A { b } else { a }, &basis)?;
        let (gaps, w) = radial_terms(reference, &basis, Some(other.amplitudes()))?;
        push_split(&mut channels, ch, tensor, &gaps, &w, opts);
    }
    Ok(SpectralPolarizability {
        kind: PolarizabilityKind::Mixed { a: *a, b: *b, side },
        channels,
    })
}

/// Mean static polarizability `tr alpha(0) / 3`, all parts included.
pub fn static_scalar_polarizability(
    state: &BoundState,
    scheme: AveragingScheme,
    opts: &SpectrumOptions,
    cache: &SpectralCache,
) -> Result<f64> {
    let pol = direct_polarizability(state, scheme, opts, cache)?;
    Ok(pol.static_tensor(Part::All).trace() / 3.0)
}
