//! Pseudo-state discretization of one orbital-angular-momentum channel of the
//! hydrogen spectrum, bound states and continuum together.
//!
//! The primitive set is the Laguerre family
//! `phi_k(r) = sqrt(2s) x^(l+1) e^(-x/2) p_k(x)`, `x = 2 s r`, with `p_k` the
//! orthonormal generalized Laguerre polynomials of index `2l+2`. Every matrix
//! element of the radial Hamiltonian is a polynomial against `x^(2l) e^-x`, so a
//! Gauss–Laguerre rule of order `size + 3` evaluates them exactly. The overlap
//! is assembled with the same rule and the generalized problem `H c = E S c` is
//! reduced with a Cholesky factor of `S`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::atomic::{BoundState, RadialWavefunction};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::quadrature::{laguerre_functions, GaussLaguerre};

/// Diagonalized channel: pseudo-state energies and eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialChannelBasis {
    l: u32,
    size: usize,
    scale: f64,
    energies: Vec<f64>,
    /// Column k holds the coefficients of pseudo-state k over the primitives.
    transform: DMatrix<f64>,
}

impl RadialChannelBasis {
    pub(crate) fn from_parts(
        l: u32,
        scale: f64,
        energies: Vec<f64>,
        transform: DMatrix<f64>,
    ) -> Self {
        Self {
            l,
            size: energies.len(),
            scale,
            energies,
            transform,
        }
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Ascending pseudo-state energies in Hartree.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    /// Number of pseudo-states above the ionization threshold.
    pub fn continuum_count(&self) -> usize {
        self.energies.iter().filter(|&&e| e > 0.0).count()
    }

    /// Primitive functions at radius r.
    pub fn primitives_at(&self, r: f64, out: &mut Vec<f64>) {
        let x = 2.0 * self.scale * r;
        laguerre_functions(2 * self.l + 2, x, self.size, out);
        let norm = (2.0 * self.scale).sqrt();
        out.iter_mut().for_each(|v| *v *= norm);
    }

    /// Reduced radial function u_k(r) of pseudo-state k.
    pub fn pseudo_state_at(&self, k: usize, r: f64) -> f64 {
        let mut prim = Vec::with_capacity(self.size);
        self.primitives_at(r, &mut prim);
        self.transform
            .column(k)
            .iter()
            .zip(&prim)
            .map(|(c, p)| c * p)
            .sum()
    }

    /// Largest deviation of `C^T S C` from the identity, S being the primitive
    /// overlap re-assembled by quadrature.
    pub fn orthonormality_defect(&self) -> Result<f64> {
        let rule = GaussLaguerre::new(self.size + 3, 2 * self.l)?;
        let (g, _) = primitive_table(&rule, self.l, self.size);
        let overlap = g.transpose() * &g;
        let m = self.transform.transpose() * overlap * &self.transform;
        Ok((m - DMatrix::identity(self.size, self.size)).abs().max())
    }
}

/// Weighted primitive values and derivatives on the quadrature nodes:
/// row i, column k holds `sqrt(w_i) g_k(x_i)` (and the same for `g_k'`).
fn primitive_table(rule: &GaussLaguerre, l: u32, size: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let a = (2 * l + 2) as f64;
    let m = rule.order();
    let mut g = DMatrix::zeros(m, size);
    let mut dg = DMatrix::zeros(m, size);
    let mut buf = Vec::with_capacity(size);
    for (i, (&x, &w)) in rule.nodes().iter().zip(rule.scaled_weights()).enumerate() {
        laguerre_functions(2 * l + 2, x, size, &mut buf);
        let sw = w.sqrt();
        for k in 0..size {
            let kf = k as f64;
            let mut d = ((l as f64 + 1.0 + kf) / x - 0.5) * buf[k];
            if k > 0 {
                d -= (kf * (kf + a)).sqrt() / x * buf[k - 1];
            }
            g[(i, k)] = sw * buf[k];
            dg[(i, k)] = sw * d;
        }
    }
    (g, dg)
}

/// Builds and diagonalizes the radial Coulomb Hamiltonian for channel `l`.
pub fn build_channel_basis(l: u32, size: usize, scale: f64) -> Result<RadialChannelBasis> {
    if size < l as usize + 2 {
        return Err(Error::Domain(format!(
            "basis size {size} too small for l = {l} (need >= l + 2)"
        )));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!(
            "basis scale must be positive, got {scale}"
        )));
    }
    let fail = |reason: String| Error::Eigensolver {
        l,
        size,
        scale,
        reason,
    };

    let rule = GaussLaguerre::new(size + 3, 2 * l)?;
    let (g, dg) = primitive_table(&rule, l, size);
    let lf = l as f64;
    // H = 2s^2 <g'|g'> + 2s^2 l(l+1) <g|x^-2|g> - 2s <g|x^-1|g>
    let potential = DVector::from_iterator(
        rule.order(),
        rule.nodes()
            .iter()
            .map(|&x| 2.0 * scale * scale * lf * (lf + 1.0) / (x * x) - 2.0 * scale / x),
    );
    let hamiltonian = dg.transpose() * &dg * (2.0 * scale * scale)
        + g.transpose() * DMatrix::from_diagonal(&potential) * &g;
    let overlap = g.transpose() * &g;

    let chol = overlap
        .cholesky()
        .ok_or_else(|| fail("overlap matrix is not positive definite".into()))?;
    let lower = chol.l();
    let half = lower
        .solve_lower_triangular(&hamiltonian)
        .ok_or_else(|| fail("singular Cholesky factor".into()))?;
    let reduced = lower
        .solve_lower_triangular(&half.transpose())
        .ok_or_else(|| fail("singular Cholesky factor".into()))?;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(reduced, f64::EPSILON, 100_000)
        .ok_or_else(|| fail("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(fail("non-finite eigenvalue".into()));
    }
    let vectors = DMatrix::from_fn(size, size, |i, j| eig.eigenvectors[(i, order[j])]);
    let transform = lower
        .transpose()
        .solve_upper_triangular(&vectors)
        .ok_or_else(|| fail("singular Cholesky factor".into()))?;
    Ok(RadialChannelBasis::from_parts(
        l, scale, energies, transform,
    ))
}

/// Reduced radial dipole amplitudes `<ref| r |k>` onto every pseudo-state of a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleVector {
    reference: BoundState,
    channel: u32,
    amplitudes: Vec<f64>,
}

impl DipoleVector {
    pub fn reference(&self) -> BoundState {
        self.reference
    }

    pub fn channel(&self) -> u32 {
        self.channel
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// sum_k amp_k^2, which tends to <ref| r^2 |ref> as the basis completes.
    pub fn closure(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }
}

/// Radial dipole amplitudes between the exact reference function and each
/// pseudo-state. The integrand is polynomial times `exp(-(s + 1/n) r)`, so the
/// Gauss–Laguerre evaluation is exact.
pub fn dipole_vector(reference: &BoundState, basis: &RadialChannelBasis) -> Result<DipoleVector> {
    if reference.l().abs_diff(basis.l()) != 1 {
        return Err(Error::SelectionRule {
            l1: reference.l(),
            l2: basis.l(),
        });
    }
    let wf = RadialWavefunction::new(reference.n(), reference.l())?;
    let kappa = basis.scale() + wf.decay();
    let order = (basis.size() + reference.n() as usize) / 2 + 4;
    let rule = GaussLaguerre::new(order, reference.l() + basis.l() + 3)?;
    let mut primitive = DVector::zeros(basis.size());
    let mut buf = Vec::with_capacity(basis.size());
    for (&y, &w) in rule.nodes().iter().zip(rule.scaled_weights()) {
        let r = y / kappa;
        let f = w * wf.eval(r) * r / kappa;
        if f == 0.0 {
            continue;
        }
        basis.primitives_at(r, &mut buf);
        for (p, b) in primitive.iter_mut().zip(&buf) {
            *p += f * b;
        }
    }
    let amplitudes = basis.transform().tr_mul(&primitive);
    let amplitudes: Vec<f64> = amplitudes.iter().copied().collect();
    if amplitudes.iter().any(|a| !a.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite dipole amplitude from {reference} into channel l = {}",
            basis.l()
        )));
    }
    Ok(DipoleVector {
        reference: *reference,
        channel: basis.l(),
        amplitudes,
    })
}

/// One row of a basis-size convergence scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub size: usize,
    pub value: f64,
    /// Change from the previous row; `None` for the first.
    pub delta: Option<f64>,
}

/// Evaluates `observable(size)` for every size and reports successive changes.
pub fn convergence_scan<F>(observable: F, sizes: &[usize], mode: Execution) -> Result<Vec<ScanRow>>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "convergence scan sizes must be strictly ascending".into(),
        ));
    }
    let values = exec::try_map(mode, sizes, |&s| observable(s))?;
    Ok(sizes
        .iter()
        .zip(&values)
        .enumerate()
        .map(|(i, (&size, &value))| ScanRow {
            size,
            value,
            delta: (i > 0).then(|| value - values[i - 1]),
        })
        .collect())
}
