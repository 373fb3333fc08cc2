//! Interaction energy of an excited and a ground-state atom at separation R:
//! the Wick-rotated frequency integral W and the resonant pole term
//! Q = P - (i/2) Gamma, each with a direct and a mixing (exchange) channel.
//!
//! All tensors are Cartesian. With `G(u) = x^2 alpha + (1 + x) beta`,
//! `x = u R / c`, the Wick term is
//!
//! ```text
//! W = -1/(2 pi R^6) int_0^inf du exp(-2x) G_ij G_kl X_ik(iu) Y_jl(iu)
//! ```
//!
//! where (X, Y) is (alpha_A, alpha_B) for the direct channel and the two mixed
//! polarizabilities for the mixing channel.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::atomic::{AveragingScheme, BoundState};
use crate::cache::SpectralCache;
use crate::config::{RunConfig, Symmetry};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::quadrature::{integrate_semi_infinite, GaussLegendre, PanelPlan};
use crate::response::{
    direct_polarizability, mixed_polarizability, FrequencyAxis, FrequencyPoint, Part,
    SpectralPolarizability, Underline,
};

/// Transverse and near-field projectors for one direction of separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryTensors {
    pub unit: Vector3<f64>,
    /// `delta_ij - R_i R_j / R^2`
    pub alpha: Matrix3<f64>,
    /// `delta_ij - 3 R_i R_j / R^2`
    pub beta: Matrix3<f64>,
}

impl GeometryTensors {
    pub fn new(separation: Vector3<f64>) -> Result<Self> {
        let norm = separation.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Domain(
                "separation vector must be nonzero and finite".into(),
            ));
        }
        let unit = separation / norm;
        let p = unit * unit.transpose();
        Ok(Self {
            unit,
            alpha: Matrix3::identity() - p,
            beta: Matrix3::identity() - p * 3.0,
        })
    }

    /// Separation along z.
    pub fn along_z() -> Self {
        Self::new(Vector3::z()).expect("unit vector")
    }

    /// `G = x^2 alpha + (1 + x) beta`.
    pub fn wick_kernel(&self, x: f64) -> Matrix3<f64> {
        self.alpha * (x * x) + self.beta * (1.0 + x)
    }
}

pub fn geometry_tensors(separation: Vector3<f64>) -> Result<GeometryTensors> {
    GeometryTensors::new(separation)
}

/// `sum_ijkl L_ij R_kl X_ik Y_jl`.
pub fn contract(
    left: &Matrix3<f64>,
    right: &Matrix3<f64>,
    x: &Matrix3<f64>,
    y: &Matrix3<f64>,
) -> f64 {
    (left.transpose() * x * right).component_mul(y).sum()
}

/// Scalar `f(w, R) = i c/(|w| R) - c^2/(w^2 R^2)`, continued to `w = i u` as
/// `c/(u R) + c^2/(u^2 R^2)`.
pub fn propagator_scalar_f(omega: FrequencyPoint, r: f64, c: f64) -> Result<Complex64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Domain(format!(
            "separation must be positive, got {r}"
        )));
    }
    let w = omega.value();
    if w.norm() == 0.0 {
        return Err(Error::Domain("f(w, R) is singular at w = 0".into()));
    }
    Ok(match omega.axis() {
        FrequencyAxis::Real => {
            let q = c / (w.re.abs() * r);
            Complex64::new(-q * q, q)
        }
        FrequencyAxis::Imaginary => {
            let q = c / (w.im * r);
            Complex64::new(q + q * q, 0.0)
        }
    })
}

/// Photon propagator `D_ij = [alpha_ij + beta_ij f] exp(i w R / c) / (c^2 R)`
/// in atomic units.
pub fn propagator_tensor(
    omega: FrequencyPoint,
    geometry: &GeometryTensors,
    r: f64,
    c: f64,
) -> Result<Matrix3<Complex64>> {
    let f = propagator_scalar_f(omega, r, c)?;
    let phase = (Complex64::i() * omega.value() * r / c).exp() / (c * c * r);
    Ok(geometry.alpha.map(|a| Complex64::new(a, 0.0)) * phase
        + geometry.beta.map(|b| f * b * phase))
}

/// Complex multipliers of the three tensor monomials in the pole kernel
/// `f_ijkl(r)`. `alpha_beta` multiplies the symmetrized product
/// `(alpha_ij beta_kl + beta_ij alpha_kl) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleKernel {
    pub beta_beta: Complex64,
    pub alpha_beta: Complex64,
    pub alpha_alpha: Complex64,
}

impl PoleKernel {
    /// Contracts with pre-contracted monomials (bb, ab, aa).
    pub fn apply(&self, c: &PoleContraction) -> Complex64 {
        self.beta_beta * c.beta_beta
            + self.alpha_beta * c.alpha_beta
            + self.alpha_alpha * c.alpha_alpha
    }

    pub fn to_array(&self) -> [Complex64; 3] {
        [self.beta_beta, self.alpha_beta, self.alpha_alpha]
    }
}

/// `f_ijkl(r) = -exp(-2ir)[bb(1 + 2ir) - (2ab + bb) r^2 - 2i ab r^3 + aa r^4]`.
pub fn pole_tensor_f(r: f64) -> PoleKernel {
    let e = -(Complex64::new(0.0, -2.0 * r)).exp();
    let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
    PoleKernel {
        beta_beta: e * Complex64::new(1.0 - r2, 2.0 * r),
        alpha_beta: e * Complex64::new(-2.0 * r2, -2.0 * r3),
        alpha_alpha: e * r4,
    }
}

/// Real part of the pole kernel, written with explicit cos(2r), sin(2r).
pub fn pole_tensor_re(r: f64) -> [f64; 3] {
    let (c, s) = ((2.0 * r).cos(), (2.0 * r).sin());
    let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
    // -cos(2r)[bb - (2ab + bb) r^2 + aa r^4] - 2r sin(2r)[bb - ab r^2]
    [
        -c * (1.0 - r2) - 2.0 * r * s,
        2.0 * c * r2 + 2.0 * r3 * s,
        -c * r4,
    ]
}

/// Imaginary part: `-1/2 {-2 sin(2r)[...] + 4r cos(2r)[bb - ab r^2]}`.
pub fn pole_tensor_im(r: f64) -> [f64; 3] {
    let curly = width_curly(r);
    [-0.5 * curly[0], -0.5 * curly[1], -0.5 * curly[2]]
}

/// The curly-bracket expression whose substitution for f gives Gamma.
pub fn width_curly(r: f64) -> [f64; 3] {
    let (c, s) = ((2.0 * r).cos(), (2.0 * r).sin());
    let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
    [
        -2.0 * s * (1.0 - r2) + 4.0 * r * c,
        -2.0 * s * (-2.0 * r2) - 4.0 * r3 * c,
        -2.0 * s * r4,
    ]
}

/// Tensor monomials contracted with a numerator X and a response Y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleContraction {
    pub beta_beta: f64,
    pub alpha_beta: f64,
    pub alpha_alpha: f64,
}

impl PoleContraction {
    pub fn new(g: &GeometryTensors, x: &Matrix3<f64>, y: &Matrix3<f64>) -> Self {
        Self {
            beta_beta: contract(&g.beta, &g.beta, x, y),
            alpha_beta: 0.5
                * (contract(&g.alpha, &g.beta, x, y) + contract(&g.beta, &g.alpha, x, y)),
            alpha_alpha: contract(&g.alpha, &g.alpha, x, y),
        }
    }

    fn dot(&self, k: [f64; 3]) -> f64 {
        self.beta_beta * k[0] + self.alpha_beta * k[1] + self.alpha_alpha * k[2]
    }
}

/// Width `Gamma = -2 Im Q` for a pole contribution with contraction `c` at `r`.
pub fn width_gamma(c: &PoleContraction, r: f64, distance: f64) -> f64 {
    c.dot(width_curly(r)) / distance.powi(6)
}

/// A pair of hydrogen atoms: A excited, B in its ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSpec {
    pub a: BoundState,
    pub b: BoundState,
    pub identical: bool,
    pub symmetry: Symmetry,
    pub averaging: AveragingScheme,
}

impl PairSpec {
    pub fn new(a: BoundState, b: BoundState) -> Result<Self> {
        if b.energy() > a.energy() {
            return Err(Error::UnsupportedPair(format!(
                "atom B ({b}) must not lie above atom A ({a}); swap the labels"
            )));
        }
        Ok(Self {
            a,
            b,
            identical: true,
            symmetry: Symmetry::Gerade,
            averaging: AveragingScheme::ProjectionAverage,
        })
    }

    /// Parses `<n><L>:<n'><L'>[:m=<int>][:sym=+|-]`, taking averaging and
    /// symmetry from the given defaults when not specified.
    pub fn parse_with(s: &str, averaging: AveragingScheme, symmetry: Symmetry) -> Result<Self> {
        let bad = |why: &str| Error::UnsupportedPair(format!("'{s}': {why}"));
        let mut parts = s.split(':');
        let a: BoundState = parts
            .next()
            .ok_or_else(|| bad("missing state A"))?
            .trim()
            .parse()?;
        let b: BoundState = parts
            .next()
            .ok_or_else(|| bad("missing state B"))?
            .trim()
            .parse()?;
        let mut spec = Self::new(a, b)?;
        spec.averaging = averaging;
        spec.symmetry = symmetry;
        for opt in parts {
            match opt.trim().split_once('=') {
                Some(("m", v)) => {
                    let m: i32 = v.parse().map_err(|_| bad("m must be an integer"))?;
                    spec.a = spec.a.with_m(m)?;
                    spec.averaging = AveragingScheme::SingleProjection(m);
                }
                Some(("sym", "+")) => spec.symmetry = Symmetry::Gerade,
                Some(("sym", "-")) => spec.symmetry = Symmetry::Ungerade,
                _ => return Err(bad(&format!("unknown option '{opt}'"))),
            }
        }
        Ok(spec)
    }

    /// Whether the exchange channel exists: identical atoms in different states.
    pub fn has_mixing(&self) -> bool {
        self.identical && !self.a.same_level(&self.b)
    }

    /// Sign applied to the mixing channel in the total.
    pub fn mixing_sign(&self) -> f64 {
        if self.has_mixing() {
            self.symmetry.sign()
        } else {
            0.0
        }
    }
}

impl FromStr for PairSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with(s, AveragingScheme::ProjectionAverage, Symmetry::Gerade)
    }
}

impl fmt::Display for PairSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}:{}{}",
            self.a.n(),
            self.a.letter(),
            self.b.n(),
            self.b.letter()
        )?;
        if let AveragingScheme::SingleProjection(m) = self.averaging {
            write!(f, ":m={m}")?;
        }
        if self.has_mixing() {
            write!(
                f,
                ":sym={}",
                if self.symmetry == Symmetry::Gerade {
                    '+'
                } else {
                    '-'
                }
            )?;
        }
        Ok(())
    }
}

/// Energies at one separation, all in Hartree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionBreakdown {
    pub r: f64,
    /// Full direct Wick term, quasi-degenerate manifold included.
    pub w_dir: f64,
    /// Share of `w_dir` coming from the quasi-degenerate manifold.
    pub w_dir_qdeg: f64,
    pub w_mix: f64,
    pub w_mix_qdeg: f64,
    pub p_dir: f64,
    pub p_mix: f64,
    pub gamma_dir: f64,
    pub gamma_mix: f64,
    /// `w_dir + p_dir + s (w_mix + p_mix)`, s the symmetry sign.
    pub total: f64,
}

/// Exchange branch for one projection of atom A.
#[derive(Debug, Clone)]
struct MixingBranch {
    weight: f64,
    /// Denominators from E_A.
    x: SpectralPolarizability,
    /// Denominators from E_B, transposed to (B index, A index).
    y: SpectralPolarizability,
}

/// Settings of the frequency integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WickSettings {
    pub order: usize,
    pub tolerance: f64,
    pub max_levels: usize,
}

/// Everything needed to evaluate a pair at arbitrary R.
#[derive(Debug, Clone)]
pub struct PairModel {
    spec: PairSpec,
    c: f64,
    wick: WickSettings,
    rule: GaussLegendre,
    geometry: GeometryTensors,
    alpha_a: SpectralPolarizability,
    alpha_b: SpectralPolarizability,
    mixing: Vec<MixingBranch>,
}

impl PairModel {
    pub fn new(spec: PairSpec, config: &RunConfig, cache: &SpectralCache) -> Result<Self> {
        config.validate()?;
        if spec.b != BoundState::ground() {
            return Err(Error::UnsupportedPair(format!(
                "atom B must be 1S, got {}; only excited-ground pairs are modeled",
                spec.b
            )));
        }
        let excited = config.spectrum_options(true);
        let ground = config.spectrum_options(false);
        let alpha_a = direct_polarizability(&spec.a, spec.averaging, &excited, cache)?;
        let alpha_b =
            direct_polarizability(&spec.b, AveragingScheme::ProjectionAverage, &ground, cache)?;

        let mut mixing = Vec::new();
        if spec.has_mixing() {
            for (m, weight) in crate::atomic::averaging_weights(spec.averaging, spec.a.l())? {
                let a = spec.a.with_m(m)?;
                let x = mixed_polarizability(&a, &spec.b, Underline::A, &excited, cache)?;
                if x.is_zero() {
                    continue;
                }
                let y =
                    mixed_polarizability(&a, &spec.b, Underline::B, &ground, cache)?.transposed();
                mixing.push(MixingBranch { weight, x, y });
            }
        }
        let model = Self {
            spec,
            c: config.speed_of_light(),
            wick: WickSettings {
                order: config.wick_order,
                tolerance: config.wick_tolerance,
                max_levels: config.wick_max_levels,
            },
            rule: GaussLegendre::new(config.wick_order),
            geometry: GeometryTensors::along_z(),
            alpha_a,
            alpha_b,
            mixing,
        };
        model.check_no_resonance()?;
        Ok(model)
    }

    /// Same model with another separation direction.
    pub fn with_geometry(mut self, geometry: GeometryTensors) -> Self {
        self.geometry = geometry;
        self
    }

    pub fn spec(&self) -> &PairSpec {
        &self.spec
    }

    pub fn speed_of_light(&self) -> f64 {
        self.c
    }

    pub fn geometry(&self) -> &GeometryTensors {
        &self.geometry
    }

    pub fn alpha_a(&self) -> &SpectralPolarizability {
        &self.alpha_a
    }

    pub fn alpha_b(&self) -> &SpectralPolarizability {
        &self.alpha_b
    }

    pub fn wick_settings(&self) -> WickSettings {
        self.wick
    }

    /// Mixed polarizabilities per projection: (weight, A-side, B-side with
    /// indices ordered (B, A)).
    pub fn mixing_branches(
        &self,
    ) -> impl Iterator<Item = (f64, &SpectralPolarizability, &SpectralPolarizability)> {
        self.mixing.iter().map(|b| (b.weight, &b.x, &b.y))
    }

    /// Downward pole gaps and numerators of the direct channel.
    pub fn downward_terms(&self) -> Vec<(f64, Matrix3<f64>)> {
        self.alpha_a
            .part(Part::Regular)
            .terms()
            .into_iter()
            .filter(|(a, _)| *a < 0.0)
            .collect()
    }

    /// Atom B's polarizability must be regular at every downward gap of A.
    fn check_no_resonance(&self) -> Result<()> {
        for (a, _) in self.downward_terms() {
            self.alpha_b.real_axis(-a)?;
        }
        for br in &self.mixing {
            for (a, _) in
                br.x.part(Part::Regular)
                    .terms()
                    .into_iter()
                    .filter(|(a, _)| *a < 0.0)
            {
                br.y.real_axis(-a)?;
            }
        }
        Ok(())
    }

    fn plan(
        &self,
        x: &SpectralPolarizability,
        y: &SpectralPolarizability,
        part: Part,
        r: f64,
    ) -> PanelPlan {
        let xs = x.part(part).terms();
        let ys = y.part(Part::Regular).terms();
        let gaps = || xs.iter().chain(&ys).map(|(a, _)| a.abs());
        let smallest = gaps().fold(f64::INFINITY, f64::min);
        let largest = gaps().fold(0.0, f64::max);
        let retard = self.c / r;
        let lo = 1e-4 * smallest.min(retard);
        let hi = (4.0 * largest).min(40.0 * retard).max(4.0 * lo);
        PanelPlan { lo, hi }
    }

    fn wick_integral(
        &self,
        x: &SpectralPolarizability,
        y: &SpectralPolarizability,
        part: Part,
        r: f64,
    ) -> Result<f64> {
        let x = x.part(part);
        if x.is_zero() {
            return Ok(0.0);
        }
        let g = &self.geometry;
        let c = self.c;
        let integrand = |u: f64| {
            let xr = u * r / c;
            let k = g.wick_kernel(xr);
            let xt = x.imaginary_axis(u, Part::All);
            let yt = y.imaginary_axis(u, Part::Regular);
            (-2.0 * xr).exp() * contract(&k, &k, &xt, &yt)
        };
        let report = integrate_semi_infinite(
            integrand,
            self.plan(&x, y, Part::All, r),
            &self.rule,
            self.wick.tolerance,
            self.wick.max_levels,
        )?;
        Ok(-report.value / (2.0 * std::f64::consts::PI * r.powi(6)))
    }

    /// Direct and mixing Wick terms split into (regular, quasi-degenerate) parts.
    fn wick_parts(&self, r: f64) -> Result<[f64; 4]> {
        check_distance(r)?;
        let mut out = [0.0; 4];
        out[0] = self.wick_integral(&self.alpha_a, &self.alpha_b, Part::Regular, r)?;
        out[1] = self.wick_integral(&self.alpha_a, &self.alpha_b, Part::QuasiDegenerate, r)?;
        for br in &self.mixing {
            out[2] += br.weight * self.wick_integral(&br.x, &br.y, Part::Regular, r)?;
            out[3] += br.weight * self.wick_integral(&br.x, &br.y, Part::QuasiDegenerate, r)?;
        }
        Ok(out)
    }

    /// (W_dir, W_mix), quasi-degenerate manifold included.
    pub fn wick_term(&self, r: f64) -> Result<(f64, f64)> {
        let w = self.wick_parts(r)?;
        Ok((w[0] + w[1], w[2] + w[3]))
    }

    /// Direct Wick term without the quasi-degenerate manifold.
    pub fn wick_regular(&self, r: f64) -> Result<f64> {
        check_distance(r)?;
        self.wick_integral(&self.alpha_a, &self.alpha_b, Part::Regular, r)
    }

    /// Pole contributions: one (gap, contraction) per downward state.
    pub fn direct_pole_contractions(&self) -> Result<Vec<(f64, PoleContraction)>> {
        self.downward_terms()
            .into_iter()
            .map(|(a, num)| {
                let yb = self.alpha_b.real_axis(-a)?;
                Ok((a, PoleContraction::new(&self.geometry, &num, &yb)))
            })
            .collect()
    }

    /// Mixing pole contributions, already weighted by the projection average.
    pub fn mixing_pole_contractions(&self) -> Result<Vec<(f64, PoleContraction)>> {
        let mut out = Vec::new();
        for br in &self.mixing {
            for (a, num) in
                br.x.part(Part::Regular)
                    .terms()
                    .into_iter()
                    .filter(|(a, _)| *a < 0.0)
            {
                let y = br.y.real_axis(-a)?;
                let mut c = PoleContraction::new(&self.geometry, &num, &y);
                c.beta_beta *= br.weight;
                c.alpha_beta *= br.weight;
                c.alpha_alpha *= br.weight;
                out.push((a, c));
            }
        }
        Ok(out)
    }

    /// (P_dir, P_mix, Gamma_dir, Gamma_mix).
    pub fn pole_term(&self, r: f64) -> Result<(f64, f64, f64, f64)> {
        check_distance(r)?;
        let r6 = r.powi(6);
        let sum = |terms: Vec<(f64, PoleContraction)>| {
            terms.iter().fold((0.0, 0.0), |(p, g), (a, c)| {
                let q = pole_tensor_f(a * r / self.c).apply(c) / r6;
                (p + q.re, g - 2.0 * q.im)
            })
        };
        let (p_dir, g_dir) = sum(self.direct_pole_contractions()?);
        let (p_mix, g_mix) = sum(self.mixing_pole_contractions()?);
        Ok((p_dir, p_mix, g_dir, g_mix))
    }

    /// Full breakdown at one separation.
    pub fn total_energy(&self, r: f64) -> Result<InteractionBreakdown> {
        let w = self.wick_parts(r)?;
        let (p_dir, p_mix, gamma_dir, gamma_mix) = self.pole_term(r)?;
        let (w_dir, w_mix) = (w[0] + w[1], w[2] + w[3]);
        let s = self.spec.mixing_sign();
        Ok(InteractionBreakdown {
            r,
            w_dir,
            w_dir_qdeg: w[1],
            w_mix,
            w_mix_qdeg: w[3],
            p_dir,
            p_mix,
            gamma_dir,
            gamma_mix,
            total: w_dir + p_dir + s * (w_mix + p_mix),
        })
    }

    /// Breakdowns on a grid, in grid order.
    pub fn curve(&self, radii: &[f64], mode: Execution) -> Result<Vec<InteractionBreakdown>> {
        exec::try_map(mode, radii, |&r| self.total_energy(r))
    }
}

fn check_distance(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "separation must be positive and finite, got {r}"
        )))
    }
}

/// Grid of separations, `log` or linear spacing, endpoints included.
pub fn radial_grid(rmin: f64, rmax: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if !(rmin > 0.0 && rmax > rmin && rmax.is_finite()) || points < 2 {
        return Err(Error::Domain(format!(
            "grid needs 0 < rmin < rmax and at least two points (got {rmin}, {rmax}, {points})"
        )));
    }
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            let t = i as f64 / last;
            if i + 1 == points {
                rmax
            } else if log {
                rmin * (rmax / rmin).powf(t)
            } else {
                rmin + (rmax - rmin) * t
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_along_z() {
        let g = GeometryTensors::along_z();
        assert_eq!(
            g.alpha,
            Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0))
        );
        assert_eq!(
            g.beta,
            Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -2.0))
        );
        assert!(GeometryTensors::new(Vector3::zeros()).is_err());
    }

    #[test]
    fn geometry_identities() {
        let g = GeometryTensors::new(Vector3::new(0.3, -1.2, 0.7)).unwrap();
        let r = g.unit;
        assert!((g.alpha * r).norm() < 1e-15);
        assert!((g.beta * r + r * 2.0).norm() < 1e-15);
        assert!((g.alpha.trace() - 2.0).abs() < 1e-15);
        assert!(g.beta.trace().abs() < 1e-15);
    }

    #[test]
    fn scalar_f_examples() {
        let c = 137.0;
        let f = propagator_scalar_f(FrequencyPoint::real(2.0), c / 2.0, c).unwrap();
        assert!((f - Complex64::new(-1.0, 1.0)).norm() < 1e-15);
        let f = propagator_scalar_f(FrequencyPoint::imaginary(0.5), 3.0, c).unwrap();
        let q = c / 1.5;
        assert!((f.re - (q + q * q)).abs() < 1e-10 && f.im == 0.0);
        assert!(propagator_scalar_f(FrequencyPoint::real(0.0), 1.0, c).is_err());
        let far = propagator_scalar_f(FrequencyPoint::real(1.0), 1e12, c).unwrap();
        assert!(far.norm() < 1e-9);
    }

    #[test]
    fn wick_kernel_is_w4_dd() {
        // u^4 D(iu) D(iu) = G G exp(-2x) / R^6 entrywise
        let (c, r, u) = (137.0, 40.0, 0.8);
        let g = GeometryTensors::new(Vector3::new(1.0, 2.0, 2.0)).unwrap();
        let d = propagator_tensor(FrequencyPoint::imaginary(u), &g, r, c).unwrap();
        let x = u * r / c;
        let k = g.wick_kernel(x) * ((-x).exp() / r.powi(3));
        let lhs = d.map(|z| z * u * u);
        for (a, b) in lhs.iter().zip(k.iter()) {
            assert!(
                (a.re - b).abs() < 1e-12 * b.abs().max(1e-30) + 1e-300
                    && a.im.abs() < 1e-15 * b.abs().max(1.0)
            );
        }
    }

    #[test]
    fn pole_kernel_limits() {
        let k = pole_tensor_f(0.0);
        assert_eq!(k.beta_beta, Complex64::new(-1.0, 0.0));
        assert_eq!(k.alpha_beta.norm(), 0.0);
        assert_eq!(k.alpha_alpha.norm(), 0.0);
        let re = pole_tensor_re(0.7);
        let im = pole_tensor_im(0.7);
        for (i, z) in pole_tensor_f(0.7).to_array().iter().enumerate() {
            assert!((re[i] - z.re).abs() < 1e-14);
            assert!((im[i] - z.im).abs() < 1e-14);
        }
    }

    #[test]
    fn pair_syntax() {
        let p: PairSpec = "12D:1S".parse().unwrap();
        assert_eq!(p.a, BoundState::level(12, 2).unwrap());
        assert_eq!(p.averaging, AveragingScheme::ProjectionAverage);
        assert_eq!(p.symmetry, Symmetry::Gerade);
        let q: PairSpec = "8D:1S:m=-1:sym=-".parse().unwrap();
        assert_eq!(q.averaging, AveragingScheme::SingleProjection(-1));
        assert_eq!(q.a.m(), -1);
        assert_eq!(q.symmetry, Symmetry::Ungerade);
        assert_eq!(q.to_string(), "8D:1S:m=-1:sym=-");
        assert!("1S:2P".parse::<PairSpec>().is_err());
        assert!("8D:1S:m=3".parse::<PairSpec>().is_err());
        assert!("8D:1S:foo".parse::<PairSpec>().is_err());
        assert!("1S:1S".parse::<PairSpec>().unwrap().mixing_sign() == 0.0);
    }

    #[test]
    fn grids() {
        let g = radial_grid(10.0, 1000.0, 3, true).unwrap();
        assert!((g[1] - 100.0).abs() < 1e-10 && g[2] == 1000.0);
        let g = radial_grid(1.0, 2.0, 5, false).unwrap();
        assert_eq!(g, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!(radial_grid(2.0, 1.0, 5, true).is_err());
        assert!(radial_grid(1.0, 2.0, 1, true).is_err());
    }
}
