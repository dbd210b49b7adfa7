//! Numerical quadrature used by the special functions and transforms.
//!
//! * [`GaussLegendre`] — fixed-order rules, composite over equal panels;
//! * [`tanh_sinh`] — double-exponential rule for integrands with algebraic
//!   endpoint singularities;
//! * [`integrate_line`] — integrals over the whole real line (vertical
//!   contours after the substitution `s = σ + iy`), marched outward panel by
//!   panel until the integrand has dropped below a relative cut-off.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An `n`-point Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes nodes and weights by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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

    /// Number of nodes.
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes on `[−1, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights matching [`nodes`](Self::nodes).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f` with a single application of the rule.
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, f: &mut F, a: f64, b: f64) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(mid + half * x) * w)
            .sum::<Complex64>()
            * half
    }

    /// Real-valued variant of [`integrate`](Self::integrate).
    pub fn integrate_real<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(mid + half * x) * w)
            .sum::<f64>()
            * half
    }

    /// Composite rule over `panels` equal sub-intervals of `[a, b]`.
    pub fn panels<F: FnMut(f64) -> Complex64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        panels: usize,
    ) -> Complex64 {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + width * k as f64;
                self.integrate(&mut f, lo, lo + width)
            })
            .sum()
    }

    /// Real-valued composite rule.
    pub fn panels_real<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        panels: usize,
    ) -> f64 {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + width * k as f64;
                self.integrate_real(&mut f, lo, lo + width)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Double-exponential (tanh–sinh) quadrature of `∫_a^b f`.
///
/// The integrand receives `(x, x − a, b − x)`; the two distances are
/// computed without cancellation so that endpoint singularities such as
/// `(x − a)^{−1/2}` can be evaluated accurately. Levels are refined until two
/// successive estimates agree to `tol` (relative to `max(1, |I|)`).
pub fn tanh_sinh_ends<F>(mut f: F, a: f64, b: f64, tol: f64) -> Complex64
where
    F: FnMut(f64, f64, f64) -> Complex64,
{
    assert!(b > a, "tanh_sinh: empty interval");
    let len = b - a;
    let t_max = 3.6;
    let mut eval = |t: f64| -> Complex64 {
        let u = 0.5 * PI * t.sinh();
        let du = 0.5 * PI * t.cosh();
        // x − a = len / (1 + e^{−2u}),  b − x = len / (1 + e^{2u})
        let (da, db) = if u < 0.0 {
            let e = (2.0 * u).exp();
            let da = len * e / (1.0 + e);
            (da, len - da)
        } else {
            let e = (-2.0 * u).exp();
            let db = len * e / (1.0 + e);
            (len - db, db)
        };
        if da <= 0.0 || db <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let sech = 1.0 / u.cosh();
        let w = 0.5 * len * du * sech * sech;
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let x = if u < 0.0 { a + da } else { b - db };
        f(x, da, db) * w
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let next = sum * h;
        let diff = (next - estimate).norm();
        estimate = next;
        if diff <= tol * estimate.norm().max(1.0) {
            break;
        }
    }
    estimate
}

/// [`tanh_sinh_ends`] for integrands that only need `x`.
pub fn tanh_sinh<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    tanh_sinh_ends(|x, _, _| f(x), a, b, tol)
}

/// Marching rule for [`integrate_line`].
#[derive(Debug, Clone, PartialEq)]
pub struct LineRule {
    /// Centre from which panels are marched outward.
    pub center: f64,
    /// Panel width.
    pub panel_width: f64,
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Panels are added on each side at least until `|y − center|` reaches this.
    pub min_half_width: f64,
    /// Hard cap; reaching it with a non-negligible integrand is a `TailError`.
    pub max_half_width: f64,
    /// Stop once the panel maximum falls below `rel_cut · peak`.
    pub rel_cut: f64,
}

impl Default for LineRule {
    fn default() -> Self {
        Self {
            center: 0.0,
            panel_width: 1.0,
            order: 20,
            min_half_width: 4.0,
            max_half_width: 400.0,
            rel_cut: 1e-16,
        }
    }
}

/// `∫_{−∞}^{∞} f(y) dy` by composite Gauss–Legendre panels marched outward
/// from `rule.center` until the integrand is negligible.
pub fn integrate_line<F: FnMut(f64) -> Complex64>(mut f: F, rule: &LineRule) -> Result<Complex64> {
    let gl = GaussLegendre::new(rule.order);
    let mut total = Complex64::new(0.0, 0.0);
    let mut peak: f64 = 0.0;
    for dir in [1.0f64, -1.0] {
        let mut k = 0usize;
        let mut quiet = 0;
        loop {
            let lo = rule.center + dir * rule.panel_width * k as f64;
            let hi = lo + dir * rule.panel_width;
            let mut panel_max: f64 = 0.0;
            let mut g = |y: f64| {
                let v = f(y);
                panel_max = panel_max.max(v.norm());
                v
            };
            let (a, b) = if dir > 0.0 { (lo, hi) } else { (hi, lo) };
            let v = gl.integrate(&mut g, a, b);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::DomainError(format!(
                    "non-finite integrand near y = {lo}"
                )));
            }
            total += v;
            peak = peak.max(panel_max);
            k += 1;
            let reach = rule.panel_width * k as f64;
            if reach >= rule.min_half_width {
                if panel_max <= rule.rel_cut * peak {
                    quiet += 1;
                    if quiet >= 2 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            if reach >= rule.max_half_width {
                if panel_max > 1e3 * rule.rel_cut * peak.max(f64::MIN_POSITIVE) {
                    return Err(Error::TailError(format!(
                        "integrand still {panel_max:e} (peak {peak:e}) at |y| = {reach}"
                    )));
                }
                break;
            }
        }
    }
    Ok(total)
}
