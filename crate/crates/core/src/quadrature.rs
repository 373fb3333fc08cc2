//! Gaussian quadrature rules and the panel integrator used for the
//! imaginary-frequency integrals.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// ln(k!) by direct summation; exact enough for the small integer arguments used here.
pub fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Orthonormal generalized Laguerre functions
/// `f_k(x) = sqrt(k!/Gamma(k+a+1)) L_k^(a)(x) * sqrt(x^a e^-x)` for k = 0..count.
pub fn laguerre_functions(alpha: u32, x: f64, count: usize, out: &mut Vec<f64>) {
    out.clear();
    if count == 0 {
        return;
    }
    let a = alpha as f64;
    // Values are carried as s_k * exp(shift_k) so that a prefactor far below
    // the f64 range does not zero out the whole recurrence.
    let ln_f0 = if x > 0.0 {
        0.5 * (a * x.ln() - x - ln_factorial(alpha))
    } else if alpha == 0 {
        0.0
    } else {
        out.resize(count, 0.0);
        return;
    };
    let mut shift = ln_f0;
    let mut shifts = Vec::with_capacity(count);
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(cur);
    shifts.push(shift);
    for k in 0..count - 1 {
        let kf = k as f64;
        let mut next = ((2.0 * kf + 1.0 + a - x) * cur - (kf * (kf + a)).sqrt() * prev)
            / ((kf + 1.0) * (kf + 1.0 + a)).sqrt();
        if next.abs() > 1e100 {
            next *= 1e-100;
            cur *= 1e-100;
            shift += 100.0 * std::f64::consts::LN_10;
        }
        prev = cur;
        cur = next;
        out.push(cur);
        shifts.push(shift);
    }
    for (v, s) in out.iter_mut().zip(&shifts) {
        *v *= s.exp();
    }
}

/// Generalized Gauss–Laguerre rule for the weight `x^alpha e^-x` on (0, inf).
///
/// Weights are stored divided by the weight function, so that
/// `sum_i w_i F(x_i)` approximates `int_0^inf F(x) dx` directly for an
/// integrand `F` that already carries its own `x^alpha e^-x` behaviour.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    alpha: u32,
    nodes: Vec<f64>,
    scaled_weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(order: usize, alpha: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::Domain(
                "Gauss-Laguerre order must be positive".into(),
            ));
        }
        let a = alpha as f64;
        let jacobi = DMatrix::from_fn(order, order, |i, j| {
            if i == j {
                2.0 * i as f64 + 1.0 + a
            } else if i.abs_diff(j) == 1 {
                let k = i.max(j) as f64;
                -(k * (k + a)).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::try_new(jacobi, f64::EPSILON, 10_000).ok_or_else(|| {
            Error::Domain(format!("Golub-Welsch eigensolver failed at order {order}"))
        })?;
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        nodes.sort_by(|x, y| x.total_cmp(y));

        let m = order as f64;
        let mut buf = Vec::with_capacity(order + 1);
        for x in nodes.iter_mut() {
            for _ in 0..4 {
                laguerre_functions(alpha, *x, order + 1, &mut buf);
                let denom = m * buf[order] - (m * (m + a)).sqrt() * buf[order - 1];
                if denom == 0.0 {
                    break;
                }
                let step = *x * buf[order] / denom;
                if !step.is_finite() {
                    break;
                }
                *x -= step;
                if step.abs() <= 1e-15 * x.abs() {
                    break;
                }
            }
        }
        let scaled_weights = nodes
            .iter()
            .map(|&x| {
                laguerre_functions(alpha, x, order, &mut buf);
                1.0 / buf.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        Ok(Self {
            alpha,
            nodes,
            scaled_weights,
        })
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled_weights
    }
}

/// Outcome of an adaptive semi-infinite integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureReport {
    pub value: f64,
    /// Integral of |f|, used as the scale of the convergence test.
    pub magnitude: f64,
    pub nodes: usize,
    pub levels: usize,
    pub last_delta: f64,
}

/// Panel layout over (0, inf): a head panel [0, lo], geometric panels of
/// ratio two between `lo` and `hi`, and a tail mapped by `u = hi / t`.
#[derive(Debug, Clone, Copy)]
pub struct PanelPlan {
    pub lo: f64,
    pub hi: f64,
}

impl PanelPlan {
    fn integrate<F: FnMut(f64) -> f64>(
        &self,
        rule: &GaussLegendre,
        split: usize,
        f: &mut F,
    ) -> (f64, f64, usize) {
        let mut sum = 0.0;
        let mut abs = 0.0;
        let mut count = 0;
        let mut acc = |a: f64, b: f64, g: &mut dyn FnMut(f64) -> f64| {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (b + a);
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                let v = g(mid + half * x) * w * half;
                sum += v;
                abs += v.abs();
                count += 1;
            }
        };
        let pieces = split.max(1);
        for p in 0..pieces {
            let a = self.lo * p as f64 / pieces as f64;
            let b = self.lo * (p + 1) as f64 / pieces as f64;
            acc(a, b, &mut |u| f(u));
        }
        let decades = (self.hi / self.lo).log2().ceil().max(1.0) as usize;
        let ratio = (self.hi / self.lo).powf(1.0 / (decades * pieces) as f64);
        let mut a = self.lo;
        for _ in 0..decades * pieces {
            let b = a * ratio;
            acc(a, b, &mut |u| f(u));
            a = b;
        }
        let hi = self.hi;
        for p in 0..pieces {
            let t0 = p as f64 / pieces as f64;
            let t1 = (p + 1) as f64 / pieces as f64;
            acc(t0, t1, &mut |t| {
                if t <= 0.0 {
                    0.0
                } else {
                    f(hi / t) * hi / (t * t)
                }
            });
        }
        (sum, abs, count)
    }
}

/// Integrates `f` over (0, inf) on the given panel plan, doubling the panel
/// count until two successive estimates agree to `rel_tol` relative to the
/// integral of |f|.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    plan: PanelPlan,
    rule: &GaussLegendre,
    rel_tol: f64,
    max_levels: usize,
) -> Result<QuadratureReport> {
    let (mut prev, mut prev_abs, mut nodes) = plan.integrate(rule, 1, &mut f);
    let mut last_delta = f64::INFINITY;
    for level in 1..=max_levels {
        let (value, magnitude, n) = plan.integrate(rule, 1 << level, &mut f);
        nodes += n;
        let scale = magnitude.max(prev_abs);
        last_delta = if scale == 0.0 {
            0.0
        } else {
            (value - prev).abs() / scale
        };
        if last_delta <= rel_tol {
            return Ok(QuadratureReport {
                value,
                magnitude,
                nodes,
                levels: level,
                last_delta,
            });
        }
        prev = value;
        prev_abs = magnitude;
    }
    Err(Error::Quadrature {
        levels: max_levels,
        nodes,
        last_delta,
        tolerance: rel_tol,
    })
}
