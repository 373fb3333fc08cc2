//! Independent oracles: finite-difference inhomogeneous radial equations,
//! closed-form matrix elements, sphere quadrature and Clebsch–Gordan weights.

use std::f64::consts::PI;

use nalgebra::Matrix3;

use hvdw::atomic::{
    angular_pair_tensor, averaging_weights, radial_dipole, AveragingScheme, BoundState,
    RadialWavefunction,
};
use hvdw::basis::{build_channel_basis, dipole_vector};
use hvdw::cache;
use hvdw::coefficients;
use hvdw::config::RunConfig;
use hvdw::interaction::PairModel;
use hvdw::quadrature::GaussLegendre;
use hvdw::response::{Part, SpectralChannel, SpectralPolarizability};

/// Symmetric tridiagonal solve with partial pivoting; `off` is the constant
/// off-diagonal.
fn solve_tridiagonal(off: f64, diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut du = vec![off; n - 1];
    let dl = vec![off; n - 1];
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            let bi = b[i];
            b[i] = b[i + 1];
            b[i + 1] = bi - fact * b[i + 1];
        }
    }
    let mut x = vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n > 1 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}

fn dot(h: f64, a: &[f64], b: &[f64]) -> f64 {
    h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

fn remove(h: f64, v: &mut [f64], dir: &[f64]) {
    let p = dot(h, v, dir);
    v.iter_mut().zip(dir).for_each(|(x, d)| *x -= p * d);
}

/// `sum_k <left|r|k><k|r|right> / (E_k - energy)` over channel `l`, excluding
/// states degenerate with `energy`, from `(H_l - energy) f = r u_right` on a
/// uniform grid with spacing `h`.
fn fd_static_sum(
    l: u32,
    energy: f64,
    left: (u32, u32),
    right: (u32, u32),
    rmax: f64,
    h: f64,
) -> f64 {
    let n = (rmax / h) as usize;
    let r: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let cent = (l * (l + 1)) as f64 / 2.0;
    let diag: Vec<f64> = r
        .iter()
        .map(|&r| 1.0 / (h * h) + cent / (r * r) - 1.0 / r - energy)
        .collect();
    let off = -0.5 / (h * h);
    let ul = RadialWavefunction::new(left.0, left.1).unwrap();
    let ur = RadialWavefunction::new(right.0, right.1).unwrap();
    let mut g: Vec<f64> = r.iter().map(|&r| r * ur.eval(r)).collect();
    let gl: Vec<f64> = r.iter().map(|&r| r * ul.eval(r)).collect();
    let degenerate = (energy * -2.0).recip().sqrt().round() as u32;
    let has_degenerate =
        (energy + 0.5 / (degenerate * degenerate) as f64).abs() < 1e-12 && l < degenerate;
    let mut null = None;
    if has_degenerate {
        // discrete near-null vector by inverse iteration
        let exact = RadialWavefunction::new(degenerate, l).unwrap();
        let mut v: Vec<f64> = r.iter().map(|&r| exact.eval(r)).collect();
        for _ in 0..3 {
            v = solve_tridiagonal(off, &diag, &v);
            let norm = dot(h, &v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        remove(h, &mut g, &v);
        null = Some(v);
    }
    let mut f = solve_tridiagonal(off, &diag, &g);
    if let Some(v) = &null {
        remove(h, &mut f, v);
    }
    dot(h, &gl, &f)
}

/// Richardson-extrapolated finite-difference sum.
fn fd_sum(l: u32, energy: f64, left: (u32, u32), right: (u32, u32), rmax: f64, h: f64) -> f64 {
    let coarse = fd_static_sum(l, energy, left, right, rmax, h);
    let fine = fd_static_sum(l, energy, left, right, rmax, h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

fn channel(p: &SpectralPolarizability, l: u32) -> &SpectralChannel {
    p.channels()
        .iter()
        .find(|c| c.l == l && !c.quasi_degenerate)
        .unwrap()
}

/// `sum_k w_k / a_k` of one regular channel.
fn static_radial(p: &SpectralPolarizability, l: u32) -> f64 {
    0.5 * channel(p, l).imaginary_sum(0.0)
}

fn model(pair: &str) -> PairModel {
    PairModel::new(
        pair.parse().unwrap(),
        &RunConfig::default(),
        cache::global(),
    )
    .unwrap()
}

fn assert_rel(got: f64, want: f64, tol: f64, what: &str) {
    let rel = (got - want).abs() / want.abs();
    assert!(
        rel <= tol,
        "{what}: got {got}, oracle {want}, relative deviation {rel:e}"
    );
}

#[test]
fn ground_state_radial_sum_matches_finite_differences() {
    let m = model("1S:1S");
    let fd = fd_sum(1, -0.5, (1, 0), (1, 0), 60.0, 2e-3);
    assert_rel(fd, 6.75, 1e-7, "1S FD vs 27/4");
    assert_rel(static_radial(m.alpha_b(), 1), fd, 1e-7, "1S P channel");
}

#[test]
fn rydberg_d_sums_match_finite_differences() {
    let m = model("12D:1S");
    let e12 = -0.5 / 144.0;
    let lower = fd_sum(1, e12, (12, 2), (12, 2), 1500.0, 0.02);
    let upper = fd_sum(3, e12, (12, 2), (12, 2), 1500.0, 0.02);
    assert_rel(
        static_radial(m.alpha_a(), 1),
        lower,
        1e-6,
        "12D regular P channel",
    );
    assert_rel(
        static_radial(m.alpha_a(), 3),
        upper,
        1e-6,
        "12D regular F channel",
    );
}

#[test]
fn excited_p_sum_matches_finite_differences() {
    let m = model("2P:1S");
    let fd = fd_sum(2, -0.125, (2, 1), (2, 1), 200.0, 4e-3);
    assert_rel(static_radial(m.alpha_a(), 2), fd, 1e-7, "2P D channel");
}

#[test]
fn mixed_sum_matches_finite_differences() {
    let m = model("12D:1S");
    let fd = fd_sum(1, -0.5, (12, 2), (1, 0), 1500.0, 0.01);
    let (_, _, y) = m.mixing_branches().next().unwrap();
    assert_rel(
        static_radial(y, 1),
        fd,
        1e-6,
        "12D-1S mixed P channel, 1S denominators",
    );
}

#[test]
fn closed_form_dipoles() {
    assert_rel(
        radial_dipole(1, 0, 2, 1).unwrap(),
        128.0 * 6f64.sqrt() / 243.0,
        1e-14,
        "<1s|r|2p>",
    );
    assert_rel(
        radial_dipole(2, 0, 2, 1).unwrap(),
        -3.0 * 3f64.sqrt(),
        1e-14,
        "<2s|r|2p>",
    );
    assert_rel(
        radial_dipole(2, 1, 3, 2).unwrap(),
        radial_dipole(3, 2, 2, 1).unwrap(),
        1e-15,
        "symmetry",
    );
}

#[test]
fn dipole_closure_gives_r_squared() {
    // radial completeness in each channel: sum_k <nl|r|k>^2 = <r^2> = n^2 (5 n^2 + 1 - 3 l (l + 1)) / 2
    for (n, l) in [(1u32, 0u32), (2, 1), (8, 2), (12, 2)] {
        let state = BoundState::level(n, l).unwrap();
        let (nf, lf) = (n as f64, l as f64);
        let r2 = nf * nf * (5.0 * nf * nf + 1.0 - 3.0 * lf * (lf + 1.0)) / 2.0;
        for ch in [l.checked_sub(1), Some(l + 1)].into_iter().flatten() {
            let basis = build_channel_basis(ch, 120, 1.0 / nf).unwrap();
            assert_rel(
                dipole_vector(&state, &basis).unwrap().closure(),
                r2,
                1e-11,
                "closure",
            );
        }
    }
}

#[test]
fn hydrogen_c6_literature_value() {
    let m = model("1S:1S");
    assert_rel(
        coefficients::d6_direct(&m).unwrap().total,
        6.49902670540,
        1e-10,
        "C6 double sum",
    );
    // Casimir-Polder form: (3/pi) int alpha(iu)^2 du, u = t / (1 - t)
    let rule = GaussLegendre::new(64);
    let mut cp = 0.0;
    let panels = 64;
    for k in 0..panels {
        let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
        cp += rule.integrate(a, b, |t| {
            let u = t / (1.0 - t);
            let alpha = m.alpha_b().imaginary_axis(u, Part::All)[(0, 0)];
            alpha * alpha / ((1.0 - t) * (1.0 - t))
        });
    }
    assert_rel(
        3.0 / PI * cp,
        6.49902670540,
        1e-10,
        "C6 Casimir-Polder integral",
    );
}

#[test]
fn ground_state_trk_sum() {
    let m = model("8D:1S");
    let trk: f64 = m
        .alpha_b()
        .terms()
        .iter()
        .map(|(a, n)| 2.0 * a * n[(2, 2)])
        .sum();
    assert!((trk - 1.0).abs() < 1e-8, "TRK {trk}");
}

#[test]
fn larger_basis_leaves_d6_unchanged() {
    let big = RunConfig {
        basis_size: 240,
        ..RunConfig::default()
    };
    for pair in ["8D:1S", "12D:1S"] {
        let a = coefficients::d6_direct(&model(pair)).unwrap().total;
        let b = coefficients::d6_direct(
            &PairModel::new(pair.parse().unwrap(), &big, cache::global()).unwrap(),
        )
        .unwrap()
        .total;
        assert_rel(b, a, 1e-8, pair);
    }
}

/// Real spherical harmonic: cos(m phi) for m > 0, sin(|m| phi) for m < 0.
fn real_ylm(l: u32, m: i32, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs();
    let x = theta.cos();
    // associated Legendre P_l^m without the Condon-Shortley phase
    let mut pmm = 1.0;
    let s = (1.0 - x * x).sqrt();
    for k in 0..am {
        pmm *= (2 * k + 1) as f64 * s;
    }
    let plm = if l == am {
        pmm
    } else {
        let mut p0 = pmm;
        let mut p1 = x * (2 * am + 1) as f64 * pmm;
        for ll in am + 2..=l {
            let p2 = ((2 * ll - 1) as f64 * x * p1 - (ll + am - 1) as f64 * p0) / (ll - am) as f64;
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    let fact = |k: u32| (1..=k).map(|j| j as f64).product::<f64>();
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * fact(l - am) / fact(l + am)).sqrt();
    match m {
        0 => norm * plm,
        m if m > 0 => 2f64.sqrt() * norm * plm * (m as f64 * phi).cos(),
        _ => 2f64.sqrt() * norm * plm * (am as f64 * phi).sin(),
    }
}

/// `<l m| r_i r_k |l m>` by product quadrature on the sphere.
fn sphere_moment(l: u32, m: i32) -> Matrix3<f64> {
    let rule = GaussLegendre::new(16);
    let nphi = 32;
    let mut out = Matrix3::zeros();
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let theta = x.acos();
        for j in 0..nphi {
            let phi = 2.0 * PI * j as f64 / nphi as f64;
            let y = real_ylm(l, m, theta, phi);
            let st = theta.sin();
            let n = [st * phi.cos(), st * phi.sin(), x];
            let wt = w * 2.0 * PI / nphi as f64 * y * y;
            for i in 0..3 {
                for k in 0..3 {
                    out[(i, k)] += wt * n[i] * n[k];
                }
            }
        }
    }
    out
}

#[test]
fn angular_tensors_match_sphere_quadrature() {
    for l in 0..=3u32 {
        let li = l as i32;
        for m in -li..=li {
            let closure = [l.checked_sub(1), Some(l + 1)]
                .into_iter()
                .flatten()
                .fold(Matrix3::zeros(), |acc, ch| {
                    acc + angular_pair_tensor(l, m, ch, l, m)
                });
            let quad = sphere_moment(l, m);
            assert!(
                (closure - quad).abs().max() < 1e-13,
                "l = {l}, m = {m}: {closure} vs {quad}"
            );
        }
    }
}

#[test]
fn averaged_channel_fractions() {
    // projection-averaged |<l|n_z|l'>|^2: (l + 1) / (3 (2l + 1)) up, l / (3 (2l + 1)) down
    for l in 1..=4u32 {
        let w = averaging_weights(AveragingScheme::ProjectionAverage, l).unwrap();
        for (ch, frac) in [(l + 1, (l + 1) as f64), (l - 1, l as f64)] {
            let t = w.iter().fold(Matrix3::zeros(), |acc, &(m, p)| {
                acc + angular_pair_tensor(l, m, ch, l, m) * p
            });
            let want = Matrix3::identity() * frac / (3.0 * (2 * l + 1) as f64);
            assert!((t - want).abs().max() < 1e-14, "l = {l} -> {ch}");
        }
    }
}

#[test]
fn fine_structure_weights_from_clebsch_gordan() {
    // |<l m_l, 1/2 m_s | J m_J>|^2 with J = l +- 1/2, summed over J, m_J and m_s,
    // each (J, m_J) sublevel weighted 1 / (2 (2l + 1))
    for l in 1..=3i32 {
        let mut weight = vec![0.0; (2 * l + 1) as usize];
        let twice_l = 2 * l;
        for ms2 in [-1i32, 1] {
            for ml in -l..=l {
                let mj2 = 2 * ml + ms2;
                let up = (twice_l + 1 + ms2 * mj2) as f64 / (2.0 * (2 * l + 1) as f64);
                let down = if mj2.abs() < twice_l { 1.0 - up } else { 0.0 };
                weight[(ml + l) as usize] += (up + down) / (2.0 * (2 * l + 1) as f64);
            }
        }
        let lib = averaging_weights(AveragingScheme::FineStructureAverage, l as u32).unwrap();
        for (m, w) in lib {
            assert!(
                (w - weight[(m + l) as usize]).abs() < 1e-15,
                "l = {l}, m = {m}"
            );
        }
    }
}
