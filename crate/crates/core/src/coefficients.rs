//! Van der Waals coefficients and limiting laws derived from a [`PairModel`].
//!
//! Short range: `dE = -(D6 +- M6)/R^6`, from the spectral double sum with
//! denominators `E_vA + E_qB`. Same-manifold states enter with their
//! nonrelativistic gap of zero.
//!
//! Intermediate range (a0/alpha << R << c/L): the same-manifold states
//! leave a nonretarded `-(D6bar +- M6bar)/R^6` tail, independent of L.
//!
//! Long range: the Wick term falls as 1/R^7 with static polarizabilities and
//! tensor weights `3 aa + 5 ab + 5 bb`; the pole term as 1/R^2 with an
//! oscillating cosine for every downward state.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::interaction::{contract, pole_tensor_f, GeometryTensors, PairModel, PoleContraction};
use crate::response::{Part, SpectralChannel, SpectralPolarizability};

/// D6 split by virtual channel of atom A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D6Split {
    /// Through the `l - 1` channel (virtual P for a D state).
    pub lower: f64,
    /// Through the `l + 1` channel (virtual F for a D state).
    pub upper: f64,
    pub total: f64,
}

/// One oscillating 1/R^2 contribution `amplitude * cos(phase_rate * R) / R^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleTailTerm {
    pub gap: f64,
    pub amplitude: f64,
    pub phase_rate: f64,
}

/// All coefficients of a pair, in Hartree atomic units.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub d6_p: f64,
    pub d6_f: f64,
    pub d6_total: f64,
    pub m6: f64,
    pub dbar6: f64,
    pub mbar6: f64,
    /// `lim W_dir R^7`.
    pub cp_amplitude_dir: f64,
    /// `lim W_mix R^7`.
    pub cp_amplitude_mix: f64,
    pub pole_tail_terms: Vec<PoleTailTerm>,
}

/// Gap used in the short-range double sum: zero for the same-n manifold.
fn short_range_gaps(ch: &SpectralChannel) -> impl Iterator<Item = f64> + '_ {
    ch.poles
        .iter()
        .map(move |&a| if ch.quasi_degenerate { 0.0 } else { a })
}

/// `sum_{v,q} contract(beta, beta, X_v, Y_q) / (a_v + b_q)` for one pair of channels.
fn double_sum(g: &GeometryTensors, x: &SpectralChannel, y: &SpectralChannel) -> Result<f64> {
    let angular = contract(&g.beta, &g.beta, &x.tensor, &y.tensor);
    if angular == 0.0 {
        return Ok(0.0);
    }
    let mut radial = 0.0;
    for (a, wa) in short_range_gaps(x).zip(&x.weights) {
        for (b, wb) in short_range_gaps(y).zip(&y.weights) {
            let d = a + b;
            if d == 0.0 {
                return Err(Error::Domain(format!(
                    "vanishing energy denominator in the short-range sum (gaps {a:e}, {b:e})"
                )));
            }
            radial += wa * wb / d;
        }
    }
    Ok(angular * radial)
}

fn channel_sum(
    g: &GeometryTensors,
    x: &SpectralPolarizability,
    y: &SpectralPolarizability,
    l: Option<u32>,
) -> Result<f64> {
    let mut s = 0.0;
    for xc in x.channels().iter().filter(|c| l.is_none_or(|l| c.l == l)) {
        for yc in y.channels() {
            s += double_sum(g, xc, yc)?;
        }
    }
    Ok(s)
}

/// Direct short-range coefficient with its channel split.
pub fn d6_direct(model: &PairModel) -> Result<D6Split> {
    let g = model.geometry();
    let la = model.spec().a.l();
    let lower = match la.checked_sub(1) {
        Some(l) => channel_sum(g, model.alpha_a(), model.alpha_b(), Some(l))?,
        None => 0.0,
    };
    let upper = channel_sum(g, model.alpha_a(), model.alpha_b(), Some(la + 1))?;
    Ok(D6Split {
        lower,
        upper,
        total: lower + upper,
    })
}

/// Direct short-range coefficient without the same-manifold states.
pub fn d6_regular(model: &PairModel) -> Result<f64> {
    channel_sum(
        model.geometry(),
        &model.alpha_a().part(Part::Regular),
        model.alpha_b(),
        None,
    )
}

/// Mixing short-range coefficient; zero when the selection rule forbids it.
pub fn m6_mixing(model: &PairModel) -> Result<f64> {
    let g = model.geometry();
    model
        .mixing_branches()
        .map(|(w, x, y)| Ok(w * channel_sum(g, x, y, None)?))
        .sum()
}

/// `81/8 n^2 (n^2 - 7)`, the same-manifold coefficient of an averaged nD state.
pub fn dbar6_closed_form(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("no D state for n = {n}")));
    }
    let n2 = (n as f64) * (n as f64);
    Ok(81.0 / 8.0 * n2 * (n2 - 7.0))
}

/// `1/2 contract(beta, beta, N_same-n, alpha_B(0))`, from the same-manifold numerators.
pub fn dbar6_numeric(model: &PairModel) -> f64 {
    let g = model.geometry();
    let numerators = same_manifold_numerator(model.alpha_a());
    0.5 * contract(
        &g.beta,
        &g.beta,
        &numerators,
        &model.alpha_b().static_tensor(Part::All),
    )
}

/// Mixing analog of [`dbar6_numeric`].
pub fn mbar6(model: &PairModel) -> f64 {
    let g = model.geometry();
    model
        .mixing_branches()
        .map(|(w, x, y)| {
            w * 0.5
                * contract(
                    &g.beta,
                    &g.beta,
                    &same_manifold_numerator(x),
                    &y.static_tensor(Part::All),
                )
        })
        .sum()
}

fn same_manifold_numerator(p: &SpectralPolarizability) -> Matrix3<f64> {
    p.part(Part::QuasiDegenerate)
        .terms()
        .into_iter()
        .fold(Matrix3::zeros(), |acc, (_, n)| acc + n)
}

/// `-(c/8pi) [3 aa + 5 ab + 5 bb]` contracted with static tensors; equals
/// `-(c/8pi) X_ij Y (13 delta_ij + 7 R_i R_j)` for isotropic Y.
fn cp_amplitude(model: &PairModel, x: &Matrix3<f64>, y: &Matrix3<f64>) -> f64 {
    let c = PoleContraction::new(model.geometry(), x, y);
    -model.speed_of_light() / (8.0 * std::f64::consts::PI)
        * (3.0 * c.alpha_alpha + 5.0 * c.alpha_beta + 5.0 * c.beta_beta)
}

pub fn cp_amplitude_direct(model: &PairModel) -> f64 {
    cp_amplitude(
        model,
        &model.alpha_a().static_tensor(Part::All),
        &model.alpha_b().static_tensor(Part::All),
    )
}

pub fn cp_amplitude_mixing(model: &PairModel) -> f64 {
    model
        .mixing_branches()
        .map(|(w, x, y)| {
            w * cp_amplitude(
                model,
                &x.static_tensor(Part::All),
                &y.static_tensor(Part::All),
            )
        })
        .sum()
}

/// Retarded direct tail `cp_amplitude_direct / R^7`.
pub fn cp_tail_direct(model: &PairModel, r: f64) -> f64 {
    cp_amplitude_direct(model) / r.powi(7)
}

/// Retarded mixing tail `cp_amplitude_mixing / R^7`.
pub fn cp_tail_mixing(model: &PairModel, r: f64) -> f64 {
    cp_amplitude_mixing(model) / r.powi(7)
}

fn tail_terms(model: &PairModel, contractions: Vec<(f64, PoleContraction)>) -> Vec<PoleTailTerm> {
    let c = model.speed_of_light();
    contractions
        .into_iter()
        .map(|(gap, k)| PoleTailTerm {
            gap,
            amplitude: -(gap / c).powi(4) * k.alpha_alpha,
            phase_rate: 2.0 * gap / c,
        })
        .collect()
}

pub fn pole_tail_terms_direct(model: &PairModel) -> Result<Vec<PoleTailTerm>> {
    Ok(tail_terms(model, model.direct_pole_contractions()?))
}

pub fn pole_tail_terms_mixing(model: &PairModel) -> Result<Vec<PoleTailTerm>> {
    Ok(tail_terms(model, model.mixing_pole_contractions()?))
}

fn eval_tail(terms: &[PoleTailTerm], r: f64) -> f64 {
    terms
        .iter()
        .map(|t| t.amplitude * (t.phase_rate * r).cos())
        .sum::<f64>()
        / (r * r)
}

/// Leading oscillatory tail of the direct pole term.
pub fn pole_tail_direct(model: &PairModel, r: f64) -> Result<f64> {
    Ok(eval_tail(&pole_tail_terms_direct(model)?, r))
}

/// Leading oscillatory tail of the mixing pole term.
pub fn pole_tail_mixing(model: &PairModel, r: f64) -> Result<f64> {
    Ok(eval_tail(&pole_tail_terms_mixing(model)?, r))
}

/// Envelope `sum |amplitude| / R^2` of a tail.
pub fn tail_envelope(terms: &[PoleTailTerm], r: f64) -> f64 {
    terms.iter().map(|t| t.amplitude.abs()).sum::<f64>() / (r * r)
}

pub fn coefficient_set(model: &PairModel) -> Result<CoefficientSet> {
    let d6 = d6_direct(model)?;
    Ok(CoefficientSet {
        d6_p: d6.lower,
        d6_f: d6.upper,
        d6_total: d6.total,
        m6: m6_mixing(model)?,
        dbar6: dbar6_numeric(model),
        mbar6: mbar6(model),
        cp_amplitude_dir: cp_amplitude_direct(model),
        cp_amplitude_mix: cp_amplitude_mixing(model),
        pole_tail_terms: pole_tail_terms_direct(model)?,
    })
}

/// Monomials of the power-counting estimates, in units of E_h, with
/// `rho = R/a0`; oscillating factors dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    /// `alpha^4 / rho^2`
    PoleCos2,
    /// `alpha^2 / rho^4`
    PoleCos4,
    /// `1 / rho^6`
    PoleCos6,
    /// `alpha^3 / rho^3`
    PoleSin3,
    /// `alpha / rho^5`
    PoleSin5,
    /// `1 / rho^6`
    VanDerWaals,
    /// `1 / (alpha rho^7)`
    WickRetarded,
}

impl EnvelopeKind {
    pub const ALL: [EnvelopeKind; 7] = [
        EnvelopeKind::PoleCos2,
        EnvelopeKind::PoleCos4,
        EnvelopeKind::PoleCos6,
        EnvelopeKind::PoleSin3,
        EnvelopeKind::PoleSin5,
        EnvelopeKind::VanDerWaals,
        EnvelopeKind::WickRetarded,
    ];
}

pub fn parametric_envelope(kind: EnvelopeKind, rho: f64, alpha: f64) -> Result<f64> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    Ok(match kind {
        EnvelopeKind::PoleCos2 => alpha.powi(4) / rho.powi(2),
        EnvelopeKind::PoleCos4 => alpha.powi(2) / rho.powi(4),
        EnvelopeKind::PoleCos6 | EnvelopeKind::VanDerWaals => rho.powi(-6),
        EnvelopeKind::PoleSin3 => alpha.powi(3) / rho.powi(3),
        EnvelopeKind::PoleSin5 => alpha / rho.powi(5),
        EnvelopeKind::WickRetarded => 1.0 / (alpha * rho.powi(7)),
    })
}

/// Worst-case (|cos| = |sin| = 1) magnitude of the pole term at R, direct
/// plus mixing with the pair's symmetry sign.
pub fn pole_envelope(model: &PairModel, r: f64) -> Result<f64> {
    let c = model.speed_of_light();
    let r6 = r.powi(6);
    let direct = model.direct_pole_contractions()?;
    let mixing = model.mixing_pole_contractions()?;
    let s = model.spec().mixing_sign().abs();
    let sum = |terms: &[(f64, PoleContraction)]| -> f64 {
        terms
            .iter()
            .map(|(a, k)| pole_tensor_f(a * r / c).apply(k).norm())
            .sum::<f64>()
            / r6
    };
    Ok(sum(&direct) + s * sum(&mixing))
}

/// Wick term magnitude compared against the pole envelope.
fn wick_total(model: &PairModel, r: f64) -> Result<f64> {
    let (w_dir, w_mix) = model.wick_term(r)?;
    Ok(w_dir + model.spec().mixing_sign() * w_mix)
}

/// Where the pole envelope overtakes the Wick term for good.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossoverOutcome {
    Found {
        r: f64,
        pole_envelope: f64,
        wick: f64,
    },
    /// The pair has no downward states, so the pole term vanishes.
    NoPoleTerm,
}

/// Scans a log grid over `[lo, hi]`, takes the last upward crossing of
/// `envelope(P) - |W|` after which the envelope stays ahead, and bisects it.
pub fn crossover_radius(
    model: &PairModel,
    lo: f64,
    hi: f64,
    scan_points: usize,
    mode: Execution,
) -> Result<CrossoverOutcome> {
    if model.direct_pole_contractions()?.is_empty() && model.mixing_pole_contractions()?.is_empty()
    {
        return Ok(CrossoverOutcome::NoPoleTerm);
    }
    let grid = crate::interaction::radial_grid(lo, hi, scan_points.max(3), true)?;
    let excess =
        |r: f64| -> Result<f64> { Ok(pole_envelope(model, r)? - wick_total(model, r)?.abs()) };
    let values = exec::try_map(mode, &grid, |&r| excess(r))?;
    let not_found = || Error::NoCrossover { lo, hi };
    if *values.last().unwrap() <= 0.0 {
        return Err(not_found());
    }
    let k = values
        .iter()
        .rposition(|&v| v <= 0.0)
        .ok_or_else(not_found)?;
    let (mut a, mut b) = (grid[k], grid[k + 1]);
    while b / a - 1.0 > 1e-10 {
        let m = (a * b).sqrt();
        if excess(m)? <= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let r = (a * b).sqrt();
    Ok(CrossoverOutcome::Found {
        r,
        pole_envelope: pole_envelope(model, r)?,
        wick: wick_total(model, r)?,
    })
}
