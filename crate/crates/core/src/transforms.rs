//! Weight transforms and Bessel kernels.
//!
//! * [`WeightSpec`] — the two weight families: `g(t) = e^{−(t/T)²}` and
//!   `h(r) = (r² + 1/4)(e^{−((r−K)/G)²} + e^{−((r+K)/G)²})`.
//! * [`ghat`], [`gstar`] — Fourier transform and the Mellin-type transform
//!   `g*(s, w)` in its two integral representations.
//! * [`xi_transform`], [`phi_pm`], [`g_bracket`] — the Mellin–Barnes
//!   transforms `Ξ`, `Φ±` and `[g]±` of the continuous-spectrum analysis.
//! * [`bessel_kernel`], [`hat_phi`], [`hhat`], [`psi_kernel`] — the `J`/`K`
//!   Bessel transforms of a spectral weight `h` and their Mellin–Barnes
//!   counterparts.
//! * [`moment_quadrature`] — the twisted fourth moment by two independent
//!   quadrature paths.
//!
//! Every contour integral `∫_{(σ)} F(s) ds` is computed as `i ∫ F(σ + iy) dy`
//! by [`integrate_line`]; Γ-ratios are evaluated through `ln Γ` differences.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_line, tanh_sinh_ends, GaussLegendre, LineRule};
use crate::specfun::{
    bessel_j_complex_series_scaled, bessel_k_imag_scaled, digamma, hurwitz_zeta_with, lgamma,
    EvalOptions,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `exp(Σ ln Γ(num) − Σ ln Γ(den))`; a pole in the denominator gives 0, a
/// pole in the numerator is a [`Error::PathError`] (the contour hit a pole).
fn gamma_quotient(num: &[Complex64], den: &[Complex64]) -> Result<Complex64> {
    if den.iter().any(|&z| is_pole(z)) {
        return Ok(c(0.0, 0.0));
    }
    let mut acc = c(0.0, 0.0);
    for &z in num {
        acc += lgamma(z)
            .map_err(|_| Error::PathError(format!("contour passes through a pole of Γ at {z}")))?;
    }
    for &z in den {
        acc -= lgamma(z)?;
    }
    Ok(acc.exp())
}

/// Weight family parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightFamily {
    /// `g(t) = e^{−(t/T)²}`.
    GaussianT { t: f64 },
    /// `h(r) = (r² + 1/4)(e^{−((r−K)/G)²} + e^{−((r+K)/G)²})`.
    GaussianKG { k: f64, g: f64 },
}

/// An even, entire weight, real on the real axis, optionally scaled by a
/// constant amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub family: WeightFamily,
    pub amplitude: f64,
}

impl WeightSpec {
    /// `g(t) = e^{−(t/T)²}`, `T > 0`.
    pub fn gaussian_t(t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "T must be positive, got {t}"
            )));
        }
        Ok(Self {
            family: WeightFamily::GaussianT { t },
            amplitude: 1.0,
        })
    }

    /// The `(K, G)` spectral weight, `K, G > 0`.
    pub fn gaussian_kg(k: f64, g: f64) -> Result<Self> {
        if !(k > 0.0 && g > 0.0 && k.is_finite() && g.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "K and G must be positive, got K={k}, G={g}"
            )));
        }
        Ok(Self {
            family: WeightFamily::GaussianKG { k, g },
            amplitude: 1.0,
        })
    }

    /// The same weight multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            amplitude: self.amplitude * lambda,
            ..*self
        }
    }

    /// Value at a complex argument (the weights are entire).
    pub fn eval(&self, r: Complex64) -> Complex64 {
        let v = match self.family {
            WeightFamily::GaussianT { t } => (-(r / t) * (r / t)).exp(),
            WeightFamily::GaussianKG { k, g } => {
                let a = (r - k) / g;
                let b = (r + k) / g;
                (r * r + 0.25) * ((-a * a).exp() + (-b * b).exp())
            }
        };
        v * self.amplitude
    }

    /// Value on the real axis.
    pub fn eval_real(&self, r: f64) -> f64 {
        self.eval(c(r, 0.0)).re
    }

    /// Half-width of the strip of guaranteed regularity (both families are entire).
    pub fn strip_half_width(&self) -> f64 {
        f64::INFINITY
    }

    /// Scale on which the weight decays: `T`, resp. `G`.
    pub fn decay_scale(&self) -> f64 {
        match self.family {
            WeightFamily::GaussianT { t } => t,
            WeightFamily::GaussianKG { g, .. } => g,
        }
    }

    /// Radius beyond which the weight is below `e^{−50}` of its size.
    pub fn support_radius(&self) -> f64 {
        match self.family {
            WeightFamily::GaussianT { t } => 7.1 * t,
            WeightFamily::GaussianKG { k, g } => k + 7.6 * g,
        }
    }

    fn require_t(&self, what: &str) -> Result<f64> {
        match self.family {
            WeightFamily::GaussianT { t } => Ok(t),
            WeightFamily::GaussianKG { .. } => Err(Error::FamilyError(format!(
                "{what} requires the GAUSSIAN_T family"
            ))),
        }
    }

    /// `∫ F(r) dr` over the real line for integrands carrying this weight as
    /// a factor, by Gauss–Legendre panels (the integrand may be shifted to
    /// `Im r = −η` by the caller).
    fn r_integral<F: FnMut(f64) -> Complex64>(
        &self,
        f: F,
        half_line: bool,
        extra: f64,
    ) -> Complex64 {
        let radius = self.support_radius() + extra;
        let width = (0.5 * self.decay_scale()).min(0.5);
        let lo = if half_line { 0.0 } else { -radius };
        let panels = ((radius - lo) / width).ceil() as usize;
        GaussLegendre::new(20).panels(f, lo, radius, panels)
    }
}

/// Complex parameters `(u, v, w, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourTuple {
    pub u: Complex64,
    pub v: Complex64,
    pub w: Complex64,
    pub z: Complex64,
}

impl FourTuple {
    /// The distinguished point `p_{1/2} = (1/2, 1/2, 1/2, 1/2)`.
    pub const P_HALF: FourTuple = FourTuple {
        u: Complex64::new(0.5, 0.0),
        v: Complex64::new(0.5, 0.0),
        w: Complex64::new(0.5, 0.0),
        z: Complex64::new(0.5, 0.0),
    };

    pub fn new(u: Complex64, v: Complex64, w: Complex64, z: Complex64) -> Self {
        Self { u, v, w, z }
    }

    /// `u + v + w + z`.
    pub fn sum(&self) -> Complex64 {
        self.u + self.v + self.w + self.z
    }
}

/// `±` selector for the paired transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// Representation used for [`gstar`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GStarRep {
    /// `∫_0^∞ ĝ(log(1+x)) x^{s−1}(1+x)^{−w} dx`.
    XIntegral,
    /// `Γ(s) ∫ Γ(w−s+it)/Γ(w+it) g(t) dt` on a contour below the poles.
    TIntegral,
}

/// Method used for [`phi_pm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiMethod {
    Direct,
    ViaXi,
}

/// Method used for [`psi_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsiMethod {
    /// The Mellin–Barnes contour integral.
    Contour,
    /// The real-variable double-integral representations, routed by `x`.
    Regime,
}

/// Fourier transform `ĝ(x) = ∫ g(t) e^{ixt} dt = T√π e^{−(Tx/2)²}`.
pub fn ghat(weight: &WeightSpec, x: f64) -> Result<Complex64> {
    let t = weight.require_t("ghat")?;
    Ok(c(
        weight.amplitude * t * PI.sqrt() * (-(t * x / 2.0).powi(2)).exp(),
        0.0,
    ))
}

/// [`ghat`] by direct quadrature of `∫ g(t) cos(xt) dt`.
pub fn ghat_quadrature(weight: &WeightSpec, x: f64) -> Result<Complex64> {
    let t = weight.require_t("ghat")?;
    let radius = 7.1 * t;
    let panels =
        (2.0 * radius / (0.25 * t)).ceil() as usize + (2.0 * radius * x.abs() / PI).ceil() as usize;
    let v = GaussLegendre::new(20).panels_real(
        |u| weight.eval_real(u) * (x * u).cos(),
        -radius,
        radius,
        panels,
    );
    Ok(c(v, 0.0))
}

/// `g*(s, w)` in the chosen representation.
///
/// `XIntegral` requires `Re w > Re s > 0`; `TIntegral` is valid for every
/// `s` off the non-positive integers (the `t`-contour is placed below the
/// poles `t = i(n + w − s)`).
pub fn gstar(s: Complex64, w: Complex64, weight: &WeightSpec, rep: GStarRep) -> Result<Complex64> {
    let t = weight.require_t("gstar")?;
    match rep {
        GStarRep::XIntegral => {
            if !(w.re > s.re && s.re > 0.0) {
                return Err(Error::DomainError(format!(
                    "x-integral needs Re w > Re s > 0 (s={s}, w={w})"
                )));
            }
            // x = e^y − 1: ∫_0^∞ ĝ(y) (e^y − 1)^{s−1} e^{(1−w)y} dy
            let y_max = (13.6 / t).max(2.0);
            let one = c(1.0, 0.0);
            let amp = weight.amplitude * t * PI.sqrt();
            let f = |y: f64| {
                let gh = amp * (-(t * y / 2.0).powi(2)).exp();
                ((s - one) * y.exp_m1().ln() + (one - w) * y).exp() * gh
            };
            // y ∈ (0, 1] in τ = −ln y, where the integrand decays like e^{−τ Re s}
            let gl = GaussLegendre::new(20);
            let tau_max = 40.0 / s.re;
            let width = (1.0 / (s.im.abs() + 1.0)).min(1.0);
            let near = gl.panels(
                |tau| {
                    let y = (-tau).exp();
                    f(y) * y
                },
                0.0,
                tau_max,
                (tau_max / width).ceil() as usize,
            );
            let far = gl.panels(
                f,
                1.0,
                y_max,
                ((y_max - 1.0) / (0.25 / t).min(0.25)).ceil() as usize,
            );
            Ok(near + far)
        }
        GStarRep::TIntegral => {
            if is_pole(s) {
                return Err(Error::PoleError(format!("g*(s, w) has a pole at s = {s}")));
            }
            Ok(lgamma(s)?.exp() * gstar_over_gamma(s, w, weight)?)
        }
    }
}

/// `g*(s, w)/Γ(s) = ∫ Γ(w−s+it)/Γ(w+it) g(t) dt`, entire in `s` and `w`.
pub fn gstar_over_gamma(s: Complex64, w: Complex64, weight: &WeightSpec) -> Result<Complex64> {
    let t = weight.require_t("gstar")?;
    let shift = (w - s).re - 0.5;
    let im = if shift < 0.0 { shift } else { 0.0 };
    let rule = LineRule {
        center: 0.0,
        panel_width: 0.25 * t,
        order: 20,
        min_half_width: 7.0 * t + im.abs(),
        max_half_width: 200.0 * t + 10.0 * im.abs(),
        rel_cut: 1e-17,
    };
    integrate_line(
        |x| {
            let tt = c(x, im);
            let ratio =
                gamma_quotient(&[w - s + I * tt], &[w + I * tt]).unwrap_or(c(f64::NAN, f64::NAN));
            ratio * weight.eval(tt)
        },
        &rule,
    )
}

/// Line rule for the Mellin–Barnes integrals in `s`.
fn mb_rule() -> LineRule {
    LineRule {
        center: 0.0,
        panel_width: 1.0,
        order: 20,
        min_half_width: 4.0,
        max_half_width: 200.0,
        rel_cut: 1e-17,
    }
}

/// Abscissa strictly between the left and right pole families, or `PathError`.
fn separate(left: f64, right: f64, what: &str) -> Result<f64> {
    if left + 1e-9 >= right {
        return Err(Error::PathError(format!(
            "{what}: left poles reach Re s = {left}, right poles start at Re s = {right}"
        )));
    }
    Ok(0.5 * (left + right))
}

/// Rightmost real part among the poles of `Γ(s+1−w−z)Γ(s+1−v−w)g*(s,w)`.
fn left_family(tuple: &FourTuple) -> f64 {
    let one = c(1.0, 0.0);
    (tuple.w + tuple.z - one)
        .re
        .max((tuple.v + tuple.w - one).re)
        .max(0.0)
}

/// Admissible abscissa for [`xi_transform`]: the midline between the pole
/// families.
pub fn xi_path(xi: Complex64, tuple: &FourTuple) -> Result<f64> {
    let right = (xi + 0.5 * (tuple.sum() - 1.0)).re;
    separate(left_family(tuple), right, "Ξ path")
}

/// `Ξ(ξ; u, v, w, z; g)` on the default path.
pub fn xi_transform(xi: Complex64, tuple: &FourTuple, weight: &WeightSpec) -> Result<Complex64> {
    xi_transform_on(xi, tuple, weight, None)
}

/// `Ξ` on the line `Re s = sigma` (must separate the pole families).
pub fn xi_transform_on(
    xi: Complex64,
    tuple: &FourTuple,
    weight: &WeightSpec,
    sigma: Option<f64>,
) -> Result<Complex64> {
    weight.require_t("xi_transform")?;
    let mid = xi_path(xi, tuple)?;
    let right = (xi + 0.5 * (tuple.sum() - 1.0)).re;
    let sigma = match sigma {
        None => mid,
        Some(sg) => {
            if !(sg > left_family(tuple) && sg < right) {
                return Err(Error::PathError(format!(
                    "Re s = {sg} does not separate the pole families"
                )));
            }
            sg
        }
    };
    let sum = tuple.sum();
    let one = c(1.0, 0.0);
    let a = xi + 0.5 * (sum - one);
    let b = xi + 0.5 * (3.0 - sum);
    let v = integrate_line(
        |y| {
            let s = c(sigma, y);
            let q = gamma_quotient(
                &[
                    a - s,
                    s + one - tuple.w - tuple.z,
                    s + one - tuple.v - tuple.w,
                ],
                &[b + s],
            );
            let gs = gstar_over_gamma(s, tuple.w, weight).and_then(|g| Ok(g * lgamma(s)?.exp()));
            match (q, gs) {
                (Ok(q), Ok(g)) => q * g,
                _ => c(f64::NAN, f64::NAN),
            }
        },
        &mb_rule(),
    )?;
    // (1/2πi) ∫ F ds with ds = i dy
    Ok(v / (2.0 * PI))
}

/// Abscissa for the `Φ±` and `[g]±` integrals.
fn phi_path(xi: Complex64, tuple: &FourTuple) -> Result<f64> {
    let h = 0.5 * (tuple.sum() - 1.0);
    let right = (h + xi).re.min((h - xi).re);
    separate(left_family(tuple), right, "Φ path")
}

/// `∫ K±(s) Γ(a+ξ−s)Γ(a−ξ−s)Γ(s+1−w−z)Γ(s+1−v−w) g*(s,w) ds` along the
/// separating line, with `K₊ = sin(π(Σ−2s)/2)`, `K₋ = cos(π(w+(v+z)/2−s))`,
/// `a = (Σ−1)/2`, and `ds = i dy`.
fn phi_core(
    sign: Sign,
    xi: Complex64,
    tuple: &FourTuple,
    weight: &WeightSpec,
) -> Result<Complex64> {
    weight.require_t("phi_pm")?;
    let sigma = phi_path(xi, tuple)?;
    let sum = tuple.sum();
    let one = c(1.0, 0.0);
    let a = 0.5 * (sum - one);
    let FourTuple { v, w, z, .. } = *tuple;
    let v_int = integrate_line(
        |y| {
            let s = c(sigma, y);
            let kernel = match sign {
                Sign::Plus => (0.5 * PI * (sum - 2.0 * s)).sin(),
                Sign::Minus => (PI * (w + 0.5 * (v + z) - s)).cos(),
            };
            let q = gamma_quotient(
                &[a + xi - s, a - xi - s, s + one - w - z, s + one - v - w, s],
                &[],
            );
            let g = gstar_over_gamma(s, w, weight);
            match (q, g) {
                (Ok(q), Ok(g)) => kernel * q * g,
                _ => c(f64::NAN, f64::NAN),
            }
        },
        &mb_rule(),
    )?;
    Ok(I * v_int)
}

/// `Φ±(ξ; u, v, w, z; g)`.
///
/// `Direct` evaluates the contour integrals with the normalisation
/// `Φ₊ = −i(2π)^{w−u−2} cos(π(v−z)/2) ∫ …`, `Φ₋ = i(2π)^{w−u−2} cos(πξ) ∫ …`,
/// the one under which the relations to `Ξ` and to `[g]±` hold for every
/// tuple; `ViaXi` uses those relations.
pub fn phi_pm(
    sign: Sign,
    xi: Complex64,
    tuple: &FourTuple,
    weight: &WeightSpec,
    method: PhiMethod,
) -> Result<Complex64> {
    let FourTuple { u, v, w, z } = *tuple;
    let two_pi = 2.0 * PI;
    match method {
        PhiMethod::Direct => {
            let core = phi_core(sign, xi, tuple, weight)?;
            let pre = (((w - u - 2.0) * two_pi.ln()).exp()) * I;
            Ok(match sign {
                Sign::Plus => -pre * (0.5 * PI * (v - z)).cos() * core,
                Sign::Minus => pre * (PI * xi).cos() * core,
            })
        }
        PhiMethod::ViaXi => {
            let sin = (PI * xi).sin();
            if sin.norm() < 1e-12 {
                return Err(Error::SingularParameter(format!(
                    "sin(πξ) vanishes at ξ = {xi}"
                )));
            }
            let xp = xi_transform(xi, tuple, weight)?;
            let xm = xi_transform(-xi, tuple, weight)?;
            let pre = ((w - u) * two_pi.ln()).exp() / (4.0 * sin);
            Ok(match sign {
                Sign::Plus => -pre * (0.5 * PI * (v - z)).cos() * (xp - xm),
                Sign::Minus => {
                    pre * ((PI * (0.5 * (u - w) + xi)).sin() * xp
                        - (PI * (0.5 * (u - w) - xi)).sin() * xm)
                }
            })
        }
    }
}

/// `[g]±(r; u, v, w, z)` from its defining contour integral
/// (`1/(4πi)` normalisation, same path as `Φ±`).
pub fn g_bracket(sign: Sign, r: f64, tuple: &FourTuple, weight: &WeightSpec) -> Result<Complex64> {
    let xi = c(0.0, r);
    let core = phi_core(sign, xi, tuple, weight)?;
    let FourTuple { v, z, .. } = *tuple;
    let pre = 1.0 / (4.0 * PI * I);
    Ok(match sign {
        Sign::Plus => pre * (0.5 * PI * (v - z)).cos() * core,
        Sign::Minus => -pre * (PI * r).cosh() * core,
    })
}

/// `[g]±(r; p_{1/2})` reconstructed from `Ξ(±ir; p_{1/2})`:
/// `[g]₊ = −π/(4 sin(πir)) (Ξ(ir) − Ξ(−ir))`, `[g]₋ = (π/4)(Ξ(ir) + Ξ(−ir))`.
pub fn g_bracket_at_half(sign: Sign, r: f64, weight: &WeightSpec) -> Result<Complex64> {
    if sign == Sign::Plus && r == 0.0 {
        return Err(Error::SingularParameter("[g]₊ at r = 0".into()));
    }
    let t = FourTuple::P_HALF;
    let xp = xi_transform(c(0.0, r), &t, weight)?;
    let xm = xi_transform(c(0.0, -r), &t, weight)?;
    Ok(match sign {
        Sign::Plus => -PI / (4.0 * (PI * c(0.0, r)).sin()) * (xp - xm),
        Sign::Minus => PI / 4.0 * (xp + xm),
    })
}

/// `([g]₊ + ε[g]₋)(r; p_{1/2}) = (π/2) Re{(ε + i/sinh πr) Ξ(ir; p_{1/2})}`.
pub fn g_bracket_combined(epsilon: i8, r: f64, weight: &WeightSpec) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::SingularParameter("1/sinh(πr) at r = 0".into()));
    }
    if epsilon != 1 && epsilon != -1 {
        return Err(Error::InvalidParameters(format!(
            "ε must be ±1, got {epsilon}"
        )));
    }
    let x = xi_transform(c(0.0, r), &FourTuple::P_HALF, weight)?;
    Ok(0.5 * PI * ((epsilon as f64 + I / (PI * r).sinh()) * x).re)
}

/// Largest `x` for which the complex-order `J` power series is used.
pub const J_SERIES_MAX_X: f64 = 20.0;

/// The Bessel transforms of a spectral weight:
/// `h₊(x) = (2i/π) ∫ r h(r) J_{2ir}(x)/cosh(πr) dr`,
/// `h₋(x) = (4/π²) ∫ r h(r) sinh(πr) K_{2ir}(x) dr`.
///
/// `h₊` is limited to `x ≤ 20` (power series for `J` of complex order).
pub fn bessel_kernel(sign: Sign, x: f64, weight: &WeightSpec) -> Result<Complex64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::DomainError(format!("x must be positive, got {x}")));
    }
    match sign {
        Sign::Minus => {
            // even integrand: (8/π²) ∫_0^∞ r h(r) sinh(πr) K_{2ir}(x) dr
            let v = weight.r_integral(
                |r| {
                    let s = 0.5 * (1.0 - (-2.0 * PI * r).exp()); // e^{−πr} sinh(πr)
                    c(
                        r * weight.eval_real(r) * s * bessel_k_imag_scaled(r, x),
                        0.0,
                    )
                },
                true,
                0.0,
            );
            Ok(v * (8.0 / (PI * PI)))
        }
        Sign::Plus => {
            if x > J_SERIES_MAX_X {
                return Err(Error::DomainError(format!(
                    "h₊ is available for x ≤ {J_SERIES_MAX_X}, got {x}"
                )));
            }
            let v = weight.r_integral(
                |r| {
                    let scale = PI * r.abs();
                    let j = bessel_j_complex_series_scaled(c(0.0, 2.0 * r), x, scale);
                    let sech = 2.0 / (1.0 + (-2.0 * scale).exp()); // e^{π|r|}/cosh(πr)
                    j * (r * weight.eval_real(r) * sech)
                },
                false,
                0.0,
            );
            Ok(v * (2.0 * I / PI))
        }
    }
}

/// `ψ(x) = (4/π²) ∫ r h(r) sinh(πr) K_{2ir}(x) dr` computed with the order
/// of integration exchanged: inserting
/// `K_{2ir}(x) = ½ ∫ e^{−x cosh(τ+iα)} e^{2ir(τ+iα)} dτ` (`0 ≤ α < π/2`) gives
/// `ψ(x) = (4/π²) ∫ dτ e^{−x cosh(τ+iα)} ∫_0^∞ r h(r) sinh(πr) e^{−2αr} e^{2irτ} dr`.
pub fn psi_exchanged(x: f64, weight: &WeightSpec) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::DomainError(format!("x must be positive, got {x}")));
    }
    let alpha = 0.5 * PI - 0.3;
    let (sa, ca) = alpha.sin_cos();
    let gl = GaussLegendre::new(20);
    let radius = weight.support_radius();
    let width = (0.5 * weight.decay_scale()).min(0.5);
    let r_panels = (radius / width).ceil() as usize;
    let mut rs = Vec::new();
    let mut amps = Vec::new();
    for k in 0..r_panels {
        let lo = k as f64 * width;
        let half = 0.5 * width;
        for (node, wt) in gl.nodes().iter().zip(gl.weights()) {
            let r = lo + half + half * node;
            let s = 0.5 * ((PI - 2.0 * alpha) * r).exp() - 0.5 * ((-PI - 2.0 * alpha) * r).exp();
            rs.push(r);
            amps.push(wt * half * r * weight.eval_real(r) * s);
        }
    }
    // τ-range: e^{−x cosh τ cos α} < 1e−19
    let reach = 44.0 / (x * ca);
    let tau_max = if reach > 2.0 {
        reach.acosh()
    } else {
        2.0f64.acosh()
    } + 0.5;
    let tau_panels = (2.0 * tau_max / 0.05).ceil() as usize;
    let v = gl.panels(
        |tau| {
            let mag = (-x * tau.cosh() * ca).exp();
            if mag == 0.0 {
                return c(0.0, 0.0);
            }
            let outer = Complex64::from_polar(mag, -x * tau.sinh() * sa);
            let inner: Complex64 = rs
                .iter()
                .zip(&amps)
                .map(|(&r, &a)| Complex64::from_polar(a, 2.0 * r * tau))
                .sum();
            outer * inner
        },
        -tau_max,
        tau_max,
        tau_panels,
    );
    Ok(v.re * 4.0 / (PI * PI))
}

/// Support of a sampled kernel on `(0, ∞)` in powers of two.
fn kernel_support(phi: &dyn Fn(f64) -> f64) -> Result<(f64, f64)> {
    let mut peak: f64 = 0.0;
    for k in -60..=12 {
        peak = peak.max(phi(2f64.powi(k)).abs());
    }
    if peak == 0.0 {
        return Ok((1.0, 2.0));
    }
    let cut = 1e-18 * peak;
    let mut hi = None;
    for k in 0..=11 {
        let x = 2f64.powi(k);
        if (0..4).all(|j| phi(x * (1.0 + j as f64 / 4.0)).abs() < cut) && phi(2.0 * x).abs() < cut {
            hi = Some(x);
            break;
        }
    }
    let hi = hi.ok_or_else(|| Error::TailError("kernel not negligible below x = 4096".into()))?;
    Ok((2f64.powi(-58), hi))
}

/// `φ̂₊(r) = (πi/(2 sinh πr)) ∫_0^∞ (J_{2ir}(x) − J_{−2ir}(x)) φ(x) dx/x` and
/// `φ̂₋(r) = 2 cosh(πr) ∫_0^∞ K_{2ir}(x) φ(x) dx/x` for a smooth kernel decaying
/// at `0` and `∞`. `φ̂₊` needs `φ` negligible beyond `x = 20`; at `r = 0` it
/// is the average of the values at `r = ±10^{−5}`.
pub fn hat_phi(sign: Sign, r: f64, phi: &dyn Fn(f64) -> f64) -> Result<Complex64> {
    let (lo, hi) = kernel_support(phi)?;
    let gl = GaussLegendre::new(20);
    let (u0, u1) = (lo.ln(), hi.ln());
    let panels = ((u1 - u0) / 0.25).ceil() as usize;
    match sign {
        Sign::Minus => {
            let v = gl.panels_real(
                |u| {
                    let x = u.exp();
                    bessel_k_imag_scaled(r, x) * phi(x)
                },
                u0,
                u1,
                panels,
            );
            // 2 cosh(πr) e^{−π|r|}
            Ok(c(v * (1.0 + (-2.0 * PI * r.abs()).exp()), 0.0))
        }
        Sign::Plus => {
            if hi > J_SERIES_MAX_X {
                return Err(Error::DomainError(format!(
                    "φ̂₊ needs φ negligible beyond x = {J_SERIES_MAX_X}"
                )));
            }
            if r == 0.0 {
                let a = hat_phi(Sign::Plus, 1e-5, phi)?;
                let b = hat_phi(Sign::Plus, -1e-5, phi)?;
                return Ok(0.5 * (a + b));
            }
            let scale = PI * r.abs();
            let v = gl.panels(
                |u| {
                    let x = u.exp();
                    let d = bessel_j_complex_series_scaled(c(0.0, 2.0 * r), x, scale)
                        - bessel_j_complex_series_scaled(c(0.0, -2.0 * r), x, scale);
                    d * phi(x)
                },
                u0,
                u1,
                panels,
            );
            // e^{π|r|}/sinh(πr)
            let inv = r.signum() * 2.0 / (1.0 - (-2.0 * scale).exp());
            Ok(PI * I / 2.0 * inv * v)
        }
    }
}

/// `ĥ(s) = ∫ r h(r) Γ(s+ir)/Γ(1−s+ir) dr`, entire in `s`; the `r`-contour is
/// moved to `Im r = −η` with `η = max(0, 1/2 − Re s)`, below the poles
/// `r = i(s + n)`.
pub fn hhat(s: Complex64, weight: &WeightSpec) -> Result<Complex64> {
    let eta = (0.5 - s.re).max(0.0);
    let one = c(1.0, 0.0);
    let mut err = None;
    let v = weight.r_integral(
        |x| {
            let r = c(x, -eta);
            match gamma_quotient(&[s + I * r], &[one - s + I * r]) {
                Ok(q) => r * weight.eval(r) * q,
                Err(e) => {
                    err = Some(e);
                    c(0.0, 0.0)
                }
            }
        },
        false,
        0.0,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `(ĥ′(1/2), ĥ″(1/2)) = (2 ∫ r h ψ(1/2+ir) dr, 4 ∫ r h ψ(1/2+ir)² dr)`.
pub fn hhat_derivatives_at_half(weight: &WeightSpec) -> Result<(Complex64, Complex64)> {
    let mut err = None;
    let mut integrate = |power: i32| {
        weight.r_integral(
            |r| match digamma(c(0.5, r)) {
                Ok(p) => p.powi(power) * (r * weight.eval_real(r)),
                Err(e) => {
                    err = Some(e);
                    c(0.0, 0.0)
                }
            },
            false,
            0.0,
        )
    };
    let d1 = integrate(1);
    let d2 = integrate(2);
    match err {
        Some(e) => Err(e),
        None => Ok((2.0 * d1, 4.0 * d2)),
    }
}

/// Abscissa of the contour for `Ψ±` (inside `(−3/2, −5/4)`).
pub const PSI_BETA: f64 = -1.375;
/// Abscissa of the inner Mellin–Barnes integral of the `x < 1` regime.
pub const PSI_INNER_BETA: f64 = -0.25;

/// `Ψ±(1/2, 1/2; x; h)`:
/// `Ψ₊ = ∫_{(β)} Γ(1/2−s)² sin(πs) ĥ(s)/cos(πs) x^s ds`,
/// `Ψ₋ = ∫_{(β)} Γ(1/2−s)² ĥ(s)/cos(πs) x^s ds`, or their real-variable
/// representations (`Regime`). For `Ψ₋` the regime is chosen by `x > 1`,
/// `|x − 1| < 10^{−12}`, `x < 1`.
pub fn psi_kernel(sign: Sign, x: f64, weight: &WeightSpec, method: PsiMethod) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::DomainError(format!("x must be positive, got {x}")));
    }
    match method {
        PsiMethod::Contour => psi_contour(sign, x, weight),
        PsiMethod::Regime => match sign {
            Sign::Plus => psi_plus_regime(x, weight),
            Sign::Minus => {
                if (x - 1.0).abs() < 1e-12 {
                    psi_minus_at_one(weight)
                } else if x > 1.0 {
                    psi_minus_above_one(x - 1.0, weight)
                } else {
                    psi_minus_below_one(x, weight)
                }
            }
        },
    }
}

fn psi_contour(sign: Sign, x: f64, weight: &WeightSpec) -> Result<f64> {
    let ln_x = x.ln();
    let mut err = None;
    let v = integrate_line(
        |y| {
            let s = c(PSI_BETA, y);
            let res = hhat(s, weight).and_then(|h| {
                let g = gamma_quotient(&[c(0.5, 0.0) - s, c(0.5, 0.0) - s], &[])?;
                let k = match sign {
                    Sign::Plus => (PI * s).sin() / (PI * s).cos(),
                    Sign::Minus => (PI * s).cos().inv(),
                };
                Ok(g * k * h * (s * ln_x).exp())
            });
            match res {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    c(0.0, 0.0)
                }
            }
        },
        &LineRule {
            rel_cut: 1e-16,
            ..mb_rule()
        },
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((I * v).re)
}

/// Inner Fourier-type integral `∫ r h(r) ω(r) e^{irλ} dr` for an even/odd
/// profile, on the half line.
fn inner_r(weight: &WeightSpec, lambda: f64, profile: &dyn Fn(f64) -> f64, odd: bool) -> f64 {
    let radius = weight.support_radius();
    let width = (0.5 * weight.decay_scale())
        .min(0.5)
        .min(PI / (lambda.abs() + 1.0));
    let panels = (radius / width).ceil() as usize;
    let v = GaussLegendre::new(20).panels_real(
        |r| {
            let base = r * weight.eval_real(r) * profile(r);
            if odd {
                base * (r * lambda).sin()
            } else {
                base * (r * lambda).cos()
            }
        },
        0.0,
        radius,
        panels,
    );
    2.0 * v
}

/// `Ψ₊(x) = 2π ∫_0^1 {y(1−y)(1+y/x)}^{−1/2} ∫ r h tanh(πr) {y(1−y)/(x+y)}^{ir} dr dy`.
fn psi_plus_regime(x: f64, weight: &WeightSpec) -> Result<f64> {
    let tanh = |r: f64| (PI * r).tanh();
    let v = tanh_sinh_ends(
        |y, da, db| {
            let p = da * db;
            let lambda = (p / (x + y)).ln();
            c(
                (p * (1.0 + y / x)).powf(-0.5) * inner_r(weight, lambda, &tanh, false),
                0.0,
            )
        },
        0.0,
        1.0,
        1e-13,
    );
    Ok(2.0 * PI * v.re)
}

/// `Ψ₋(1 + ε) = 2πi ∫_0^1 {y(1−y)(1−y/x)}^{−1/2} ∫ r h/cosh(πr) {y(1−y)/(x−y)}^{ir} dr dy`.
///
/// `ε = x − 1` is passed explicitly; the part `1 − y = t ≤ 1/2` is integrated
/// in `ln t` down to `ln ε − 80` to resolve the boundary layer `t ~ ε`.
/// Taking `ε` explicitly avoids the cancellation in `x − 1` for tiny `ε`.
pub fn psi_minus_above_one(eps: f64, weight: &WeightSpec) -> Result<f64> {
    let x = 1.0 + eps;
    let sech = |r: f64| 1.0 / (PI * r).cosh();
    // the inner integral is i·2∫_0^∞ r h sech sin(rλ) dr; 2πi · i = −2π
    let lower = tanh_sinh_ends(
        |y, da, _| {
            let t = 1.0 - y;
            let lambda = (da * t / (eps + t)).ln();
            c(
                (da * t * (eps + t) / x).powf(-0.5) * inner_r(weight, lambda, &sech, true),
                0.0,
            )
        },
        0.0,
        0.5,
        1e-13,
    );
    let gl = GaussLegendre::new(20);
    let u0 = eps.ln().min(0.0) - 80.0;
    let u1 = 0.5f64.ln();
    let panels = ((u1 - u0) / 0.5).ceil() as usize;
    let upper = gl.panels_real(
        |u| {
            let t = u.exp();
            let y = 1.0 - t;
            let lambda = (y * t / (eps + t)).ln();
            t * (y * t * (eps + t) / x).powf(-0.5) * inner_r(weight, lambda, &sech, true)
        },
        u0,
        u1,
        panels,
    );
    Ok(-2.0 * PI * (lower.re + upper))
}

/// `Ψ₋(1) = 2π² ∫ r h(r) sinh(πr)/cosh²(πr) dr`.
fn psi_minus_at_one(weight: &WeightSpec) -> Result<f64> {
    let v = weight.r_integral(
        |r| {
            let ch = (PI * r).cosh();
            c(r * weight.eval_real(r) * (PI * r).sinh() / (ch * ch), 0.0)
        },
        false,
        0.0,
    );
    Ok(2.0 * PI * PI * v.re)
}

/// `Ψ₋(x), 0 < x < 1`:
/// `∫_0^∞ M(y) ∫ r h(r)(y/(1+y))^{ir} dr dy` with
/// `M(y) = ∫_{(β)} x^s (y(y+1))^{s−1} Γ(1/2−s)²/(Γ(1−2s) cos πs) ds`
/// `= √π/(y(y+1)) ∫_{(β)} Γ(1/2−s)/(Γ(1−s) cos πs) (4xy(y+1))^s ds`.
fn psi_minus_below_one(x: f64, weight: &WeightSpec) -> Result<f64> {
    let gl = GaussLegendre::new(20);
    let one = c(1.0, 0.0);
    let ident = |_: f64| 1.0;
    let rule = LineRule {
        min_half_width: 6.0,
        ..mb_rule()
    };
    let mut err = None;
    let (u0, u1) = (-40.0, 40.0);
    let v = gl.panels_real(
        |u| {
            let y = u.exp();
            let yy = y * (y + 1.0);
            let ln_z = (4.0 * x * yy).ln();
            let m = integrate_line(
                |t| {
                    let s = c(PSI_INNER_BETA, t);
                    match gamma_quotient(&[c(0.5, 0.0) - s], &[one - s]) {
                        Ok(q) => q / (PI * s).cos() * (s * ln_z).exp(),
                        Err(_) => c(f64::NAN, f64::NAN),
                    }
                },
                &rule,
            );
            let m = match m {
                Ok(m) => I * m * PI.sqrt() / yy,
                Err(e) => {
                    err = Some(e);
                    return 0.0;
                }
            };
            // inner: i · 2∫_0^∞ r h sin(rλ) dr, λ = ln(y/(1+y))
            let lambda = -(-u).exp().ln_1p();
            let f = I * inner_r(weight, lambda, &ident, true);
            y * (m * f).re
        },
        u0,
        u1,
        ((u1 - u0) / 0.5) as usize,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(v)
}

/// Explicit bound used for the tail of the moment integrals:
/// `|ζ(1/2 + it)| ≤ 3 √(|t| + 1)`.
pub fn zeta_half_line_bound(t: f64) -> f64 {
    3.0 * (t.abs() + 1.0).sqrt()
}

/// The two evaluations of the twisted fourth moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    /// `Σ_{a,b,c; (a,b)=1} α_{ac} ᾱ_{bc}/(c√(ab)) I₂(g; b/a)`.
    pub via_sum: f64,
    /// `∫ |ζ(1/2+it)|⁴ |A(1/2+it)|² g(t) dt`.
    pub direct: f64,
    /// `|via_sum − direct|`.
    pub difference: f64,
    /// Height actually integrated to.
    pub height_used: f64,
    /// Analytic bound for the neglected tails.
    pub tail_bound: f64,
}

fn moment_tail_bound(t: f64, s2: f64, h: f64) -> f64 {
    // 2 ∫_H^∞ 81 (u+1)² S² e^{−u²/T²} du ≤ 648 S² e^{−H²/T²}(T²H/2 + T⁴/(4H)), H ≥ 1
    648.0 * s2 * (-(h / t).powi(2)).exp() * (t * t * h / 2.0 + t.powi(4) / (4.0 * h))
}

/// Twisted fourth moment `M₂(g; A)` for `A(s) = Σ α_n n^{−s}` (`alpha[n−1] = α_n`),
/// with `g` of the GAUSSIAN_T family, by two quadratures on different grids.
///
/// The integration range is the smallest `H ≤ height` for which the
/// analytic tail bound is below `10^{−12}`; otherwise `TailError`.
pub fn moment_quadrature(
    weight: &WeightSpec,
    alpha: &[Complex64],
    height: f64,
) -> Result<MomentReport> {
    let t = weight.require_t("moment_quadrature")?;
    if alpha.is_empty() {
        return Err(Error::InvalidParameters("empty coefficient list".into()));
    }
    let s: f64 = alpha
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm() / ((i + 1) as f64).sqrt())
        .sum();
    let s2 = s * s * weight.amplitude.abs();
    let mut h = t.max(1.0);
    while moment_tail_bound(t, s2, h) > 1e-12 {
        h += 1.0;
        if h > height {
            return Err(Error::TailError(format!(
                "tail bound {:e} at height cap {height}",
                moment_tail_bound(t, s2, height)
            )));
        }
    }
    let tail = moment_tail_bound(t, s2, h);

    let sample = |order: usize, width: f64, em_shift: usize| -> Result<Vec<(f64, f64, f64)>> {
        let gl = GaussLegendre::new(order);
        let opts = EvalOptions {
            em_shift,
            ..EvalOptions::default()
        };
        let panels = (2.0 * h / width).ceil() as usize;
        let pw = 2.0 * h / panels as f64;
        let mut out = Vec::with_capacity(panels * order);
        for k in 0..panels {
            let lo = -h + pw * k as f64;
            for (node, wt) in gl.nodes().iter().zip(gl.weights()) {
                let tt = lo + 0.5 * pw * (1.0 + node);
                let z = hurwitz_zeta_with(c(0.5, tt), 1.0, &opts)?.norm_sqr();
                out.push((tt, wt * 0.5 * pw, z * z * weight.eval_real(tt)));
            }
        }
        Ok(out)
    };

    // path 1: Σ over (a, b, c) of I₂(g; b/a)
    let grid1 = sample(20, 0.5, 20)?;
    let n = alpha.len();
    let mut via_sum = c(0.0, 0.0);
    for a in 1..=n {
        for b in 1..=n {
            if crate::arith::gcd(a as i64, b as i64) != 1 {
                continue;
            }
            let mut weight_ab = c(0.0, 0.0);
            let mut cc = 1;
            while a * cc <= n && b * cc <= n {
                weight_ab += alpha[a * cc - 1] * alpha[b * cc - 1].conj()
                    / (cc as f64 * ((a * b) as f64).sqrt());
                cc += 1;
            }
            if weight_ab.norm() == 0.0 {
                continue;
            }
            let ln_ratio = (b as f64 / a as f64).ln();
            let i2: Complex64 = grid1
                .iter()
                .map(|&(tt, w, z)| Complex64::from_polar(w * z, tt * ln_ratio))
                .sum();
            via_sum += weight_ab * i2;
        }
    }

    // path 2: direct integral with |A(1/2+it)|² on a different grid
    let grid2 = sample(24, 0.37, 35)?;
    let direct: f64 = grid2
        .iter()
        .map(|&(tt, w, z)| {
            let a: Complex64 = alpha
                .iter()
                .enumerate()
                .map(|(i, &al)| al * (c(-0.5, -tt) * ((i + 1) as f64).ln()).exp())
                .sum();
            w * z * a.norm_sqr()
        })
        .sum();
    Ok(MomentReport {
        via_sum: via_sum.re,
        direct,
        difference: (via_sum.re - direct).abs(),
        height_used: h,
        tail_bound: tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_j, bessel_k_imag, cgamma};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn weight_properties() {
        let g = WeightSpec::gaussian_t(2.0).unwrap();
        assert_eq!(g.eval_real(1.3), g.eval_real(-1.3));
        let h = WeightSpec::gaussian_kg(30.0, 5.0).unwrap();
        assert!(h.eval(c(0.0, 0.5)).norm() < 1e-15 && h.eval(c(0.0, -0.5)).norm() < 1e-15);
        assert!(h.eval(c(3.7, 0.0)).im == 0.0);
        assert_eq!(h.strip_half_width(), f64::INFINITY);
        assert!(WeightSpec::gaussian_t(0.0).is_err());
        assert!(WeightSpec::gaussian_kg(1.0, -1.0).is_err());
        assert!(matches!(ghat(&h, 0.0), Err(Error::FamilyError(_))));
        assert!(matches!(
            gstar(c(1.0, 0.0), c(2.0, 0.0), &h, GStarRep::TIntegral),
            Err(Error::FamilyError(_))
        ));
    }

    #[test]
    fn ghat_examples() {
        let g = WeightSpec::gaussian_t(1.7).unwrap();
        assert!((ghat(&g, 0.0).unwrap().re - 1.7 * PI.sqrt()).abs() < 1e-14);
        assert_eq!(ghat(&g, 0.8).unwrap(), ghat(&g, -0.8).unwrap());
        let g1 = WeightSpec::gaussian_t(1.0).unwrap();
        for x in [0.0, 1.0, 2.5, 7.0] {
            assert!(
                close(
                    ghat(&g1, x).unwrap(),
                    ghat_quadrature(&g1, x).unwrap(),
                    1e-10
                ),
                "x={x}"
            );
        }
    }

    #[test]
    fn gstar_representations_agree() {
        let g = WeightSpec::gaussian_t(1.0).unwrap();
        let cases = [
            (c(1.0, 0.3), c(2.0, 0.0)),
            (c(0.25, 0.0), c(0.5, 0.0)),
            (c(0.3, 2.0), c(0.9, -0.4)),
            (c(1.5, -1.0), c(3.0, 1.0)),
        ];
        for (s, w) in cases {
            let a = gstar(s, w, &g, GStarRep::XIntegral).unwrap();
            let b = gstar(s, w, &g, GStarRep::TIntegral).unwrap();
            assert!(close(a, b, 1e-8), "s={s} w={w}: {a} vs {b}");
        }
        let g3 = WeightSpec::gaussian_t(3.0).unwrap();
        let a = gstar(c(0.7, 1.0), c(1.0, 0.0), &g3, GStarRep::XIntegral).unwrap();
        let b = gstar(c(0.7, 1.0), c(1.0, 0.0), &g3, GStarRep::TIntegral).unwrap();
        assert!(close(a, b, 1e-8));
        assert!(matches!(
            gstar(c(1.0, 0.0), c(0.5, 0.0), &g, GStarRep::XIntegral),
            Err(Error::DomainError(_))
        ));
        assert!(matches!(
            gstar(c(-1.0, 0.0), c(0.5, 0.0), &g, GStarRep::TIntegral),
            Err(Error::PoleError(_))
        ));
    }

    #[test]
    fn gstar_decays_and_is_regular_over_gamma() {
        let g = WeightSpec::gaussian_t(1.0).unwrap();
        let w = c(2.0, 0.0);
        let mut prev = f64::INFINITY;
        for k in 1..=10 {
            let v = gstar(c(0.5, 2.0 * k as f64), w, &g, GStarRep::TIntegral)
                .unwrap()
                .norm();
            assert!(v < prev, "not decreasing at t = {}", 2 * k);
            prev = v;
        }
        // g*(s,w)/Γ(s) at s → 0 tends to ∫ g = T√π
        let at0 = gstar_over_gamma(c(0.0, 0.0), w, &g).unwrap();
        assert!((at0 - PI.sqrt()).norm() < 1e-12);
        for e in [c(1e-6, 0.0), c(-1e-6, 0.0), c(0.0, 1e-6)] {
            let v = gstar(e, w, &g, GStarRep::TIntegral).unwrap() / cgamma(e).unwrap();
            assert!((v - at0).norm() < 1e-5, "{e}");
        }
    }

    #[test]
    fn xi_symmetries_and_path_invariance() {
        let g = WeightSpec::gaussian_t(1.0).unwrap();
        let p = FourTuple::P_HALF;
        assert!((xi_path(c(0.0, 1.0), &p).unwrap() - 0.25).abs() < 1e-15);
        let a = xi_transform(c(0.0, 1.0), &p, &g).unwrap();
        let b = xi_transform(c(0.0, -1.0), &p, &g).unwrap();
        assert!((a.conj() - b).norm() < 1e-8, "{a} vs {b}");
        let z = xi_transform(c(0.0, 0.0), &p, &g).unwrap();
        assert!(z.im.abs() < 1e-9 * z.norm().max(1.0));
        let xi = c(0.8, 0.5);
        let v0 = xi_transform_on(xi, &p, &g, None).unwrap();
        let mid = xi_path(xi, &p).unwrap();
        let v1 = xi_transform_on(xi, &p, &g, Some(mid + 0.3)).unwrap();
        assert!((v0 - v1).norm() < 1e-9, "{v0} vs {v1}");
        assert!(matches!(
            xi_transform_on(xi, &p, &g, Some(1.4)),
            Err(Error::PathError(_))
        ));
        let blocked = FourTuple::new(c(0.5, 0.0), c(1.2, 0.0), c(1.2, 0.0), c(0.5, 0.0));
        assert!(matches!(
            xi_transform(c(0.0, 0.1), &blocked, &g),
            Err(Error::PathError(_))
        ));
    }

    #[test]
    fn phi_direct_matches_via_xi() {
        let g = WeightSpec::gaussian_t(1.0).unwrap();
        let tuples = [
            FourTuple::P_HALF,
            FourTuple::new(c(0.55, 0.0), c(0.5, 0.0), c(0.45, 0.0), c(0.52, 0.0)),
            FourTuple::new(c(0.6, 0.1), c(0.45, -0.05), c(0.5, 0.0), c(0.48, 0.02)),
        ];
        for t in &tuples {
            for sign in [Sign::Plus, Sign::Minus] {
                let d = phi_pm(sign, c(0.0, 0.4), t, &g, PhiMethod::Direct).unwrap();
                let v = phi_pm(sign, c(0.0, 0.4), t, &g, PhiMethod::ViaXi).unwrap();
                assert!(
                    (d - v).norm() < 1e-7 * d.norm().max(1.0),
                    "{t:?} {sign:?}: {d} vs {v}"
                );
            }
        }
        assert!(matches!(
            phi_pm(
                Sign::Plus,
                c(0.0, 0.0),
                &FourTuple::P_HALF,
                &g,
                PhiMethod::ViaXi
            ),
            Err(Error::SingularParameter(_))
        ));
    }

    #[test]
    fn alternative_phi_prefactor_differs_by_power_of_two_pi() {
        // With the prefactor (2π)^{w−v−2} the direct integral would differ from
        // the Ξ-relation by (2π)^{u−v}.
        let g = WeightSpec::gaussian_t(1.0).unwrap();
        let t = FourTuple::new(c(0.55, 0.0), c(0.5, 0.0), c(0.45, 0.0), c(0.52, 0.0));
        let xi = c(0.0, 0.4);
        let d = phi_pm(Sign::Plus, xi, &t, &g, PhiMethod::Direct).unwrap();
        let alternative = d * ((t.u - t.v) * (2.0 * PI).ln()).exp();
        let v = phi_pm(Sign::Plus, xi, &t, &g, PhiMethod::ViaXi).unwrap();
        let ratio = alternative / v;
        assert!((ratio - (2.0 * PI).powf(0.05)).norm() < 1e-7);
    }

    #[test]
    fn bracket_relations() {
        let g = WeightSpec::gaussian_t(1.0).unwrap();
        let t = FourTuple::new(c(0.55, 0.0), c(0.5, 0.0), c(0.45, 0.0), c(0.52, 0.0));
        for sign in [Sign::Plus, Sign::Minus] {
            for r in [0.4, 1.1] {
                let b = g_bracket(sign, r, &t, &g).unwrap();
                let p = phi_pm(sign, c(0.0, r), &t, &g, PhiMethod::Direct).unwrap();
                let rhs = 0.5 * ((1.0 + t.u - t.w) * (2.0 * PI).ln()).exp() * p;
                assert!(
                    (b - rhs).norm() < 1e-8 * b.norm().max(1.0),
                    "{sign:?} r={r}: {b} vs {rhs}"
                );
            }
        }
        // at p_{1/2}: the Ξ reconstruction
        let p = FourTuple::P_HALF;
        for r in [0.5, 1.3] {
            for sign in [Sign::Plus, Sign::Minus] {
                let b = g_bracket(sign, r, &p, &g).unwrap();
                let x = g_bracket_at_half(sign, r, &g).unwrap();
                assert!(
                    (b - x).norm() < 1e-8 * b.norm().max(1.0),
                    "{sign:?} r={r}: {b} vs {x}"
                );
            }
            let minus = g_bracket_at_half(Sign::Minus, r, &g).unwrap();
            assert!(minus.im.abs() < 1e-9);
            let plus = g_bracket_at_half(Sign::Plus, r, &g).unwrap();
            for eps in [1i8, -1] {
                let comb = g_bracket_combined(eps, r, &g).unwrap();
                assert!(
                    (comb - (plus + eps as f64 * minus).re).abs() < 1e-8,
                    "eps={eps}"
                );
            }
            let neg = g_bracket_at_half(Sign::Plus, -r, &g).unwrap();
            assert!((neg - plus).norm() < 1e-9);
            let negm = g_bracket_at_half(Sign::Minus, -r, &g).unwrap();
            assert!((negm - minus).norm() < 1e-9);
        }
        assert!(matches!(
            g_bracket_at_half(Sign::Plus, 0.0, &g),
            Err(Error::SingularParameter(_))
        ));
        assert!(matches!(
            g_bracket_combined(1, 0.0, &g),
            Err(Error::SingularParameter(_))
        ));
    }

    #[test]
    fn h_minus_two_paths_and_mellin_barnes() {
        for (k, gg) in [(3.0, 1.0), (5.0, 2.0)] {
            let h = WeightSpec::gaussian_kg(k, gg).unwrap();
            for x in [0.5, 2.0, 10.0] {
                let a = bessel_kernel(Sign::Minus, x, &h).unwrap();
                assert!(a.im == 0.0);
                let b = psi_exchanged(x, &h).unwrap();
                assert!(
                    (a.re - b).abs() < 1e-8 * a.re.abs().max(1.0),
                    "K={k} x={x}: {a} vs {b}"
                );
                let mb = mellin_barnes_psi(x, &h, 0.25);
                assert!(
                    (a - mb).norm() < 1e-7 * a.norm().max(1.0),
                    "K={k} x={x}: {a} vs MB {mb}"
                );
            }
        }
    }

    /// `ψ(x) = (1/π²) ∫_{(α)} ĥ(s)/cos(πs) (x/2)^{−2s} ds`.
    fn mellin_barnes_psi(x: f64, h: &WeightSpec, alpha: f64) -> Complex64 {
        let ln = (x / 2.0).ln();
        let v = integrate_line(
            |y| {
                let s = c(alpha, y);
                hhat(s, h).unwrap() / (PI * s).cos() * (-2.0 * s * ln).exp()
            },
            &mb_rule(),
        )
        .unwrap();
        I * v / (PI * PI)
    }

    #[test]
    fn h_plus_against_real_order_limit_and_alternative_j() {
        // with J from the Schläfli integral (real orders only) we can check the
        // series at r = 0 order: J_0
        assert!(
            (bessel_j_complex_series_scaled(c(0.0, 0.0), 3.0, 0.0).re - bessel_j(0.0, 3.0)).abs()
                < 1e-13
        );
        let h = WeightSpec::gaussian_kg(3.0, 1.0).unwrap();
        let v = bessel_kernel(Sign::Plus, 2.0, &h).unwrap();
        // r h(r) J_{2ir}/cosh is odd-conjugate: J_{−2ir}(x) = conj J_{2ir}(x) ⇒ integral is i·(real) ⇒ h₊ real
        assert!(v.im.abs() < 1e-10 * v.norm().max(1.0), "{v}");
        assert!(matches!(
            bessel_kernel(Sign::Plus, 25.0, &h),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn hat_phi_minus_closed_form_and_evenness() {
        // φ(x) = x e^{−x}: ∫_0^∞ K_{2ir}(x) e^{−x} dx = 2πr / sinh(2πr) ⇒ φ̂₋(r) = 2πr/sinh(πr)
        let phi = |x: f64| x * (-x).exp();
        for r in [0.3, 1.0, 2.5] {
            let v = hat_phi(Sign::Minus, r, &phi).unwrap();
            let exact = 2.0 * PI * r / (PI * r).sinh();
            assert!((v.re - exact).abs() < 1e-9, "r={r}: {v} vs {exact}");
            let w = hat_phi(Sign::Minus, -r, &phi).unwrap();
            assert!((v - w).norm() < 1e-12);
        }
        let phi2 = |x: f64| x * x * (-x * x).exp();
        for r in [0.4, 1.7] {
            let a = hat_phi(Sign::Plus, r, &phi2).unwrap();
            let b = hat_phi(Sign::Plus, -r, &phi2).unwrap();
            assert!((a - b).norm() < 1e-10 * a.norm().max(1.0));
        }
        assert!(matches!(
            hat_phi(Sign::Plus, 1.0, &phi),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn hat_phi_plus_real_order_oracle() {
        // for φ(x) = x² e^{−x²}, ∫_0^∞ J_ν(x) x e^{−x²} dx = (1/2)·… is not elementary,
        // so compare the scaled series with the Bessel integral at imaginary order
        // through the Wronskian-type identity used in specfun; here check that the
        // r → 0 value is finite and matches nearby r
        let phi = |x: f64| x * x * (-x * x).exp();
        let a = hat_phi(Sign::Plus, 0.0, &phi).unwrap();
        let b = hat_phi(Sign::Plus, 0.01, &phi).unwrap();
        assert!((a - b).norm() < 1e-3 * a.norm().max(1.0));
        assert!(a.re.is_finite());
    }

    #[test]
    fn hhat_vanishes_at_plus_minus_half() {
        let h = WeightSpec::gaussian_kg(30.0, 5.0).unwrap();
        assert!(hhat(c(0.5, 0.0), &h).unwrap().norm() < 1e-9);
        assert!(hhat(c(-0.5, 0.0), &h).unwrap().norm() < 1e-9);
    }

    #[test]
    fn hhat_derivatives_match_finite_differences() {
        let h = WeightSpec::gaussian_kg(8.0, 2.0).unwrap();
        let (d1, d2) = hhat_derivatives_at_half(&h).unwrap();
        let e = 1e-3;
        let p = hhat(c(0.5 + e, 0.0), &h).unwrap();
        let m = hhat(c(0.5 - e, 0.0), &h).unwrap();
        let z = hhat(c(0.5, 0.0), &h).unwrap();
        let fd1 = (p - m) / (2.0 * e);
        let fd2 = (p - 2.0 * z + m) / (e * e);
        assert!((d1 - fd1).norm() < 1e-5 * d1.norm(), "{d1} vs {fd1}");
        assert!((d2 - fd2).norm() < 1e-3 * d2.norm(), "{d2} vs {fd2}");
    }

    #[test]
    fn psi_contour_matches_regimes() {
        let h = WeightSpec::gaussian_kg(3.0, 1.0).unwrap();
        for x in [0.5, 2.0] {
            let a = psi_kernel(Sign::Plus, x, &h, PsiMethod::Contour).unwrap();
            let b = psi_kernel(Sign::Plus, x, &h, PsiMethod::Regime).unwrap();
            assert!((a - b).abs() < 1e-6, "Ψ₊({x}): {a} vs {b}");
        }
        for x in [0.5, 0.9, 1.0, 2.0] {
            let a = psi_kernel(Sign::Minus, x, &h, PsiMethod::Contour).unwrap();
            let b = psi_kernel(Sign::Minus, x, &h, PsiMethod::Regime).unwrap();
            assert!((a - b).abs() < 1e-6, "Ψ₋({x}): {a} vs {b}");
        }
    }

    #[test]
    fn psi_minus_limit_at_one() {
        let h = WeightSpec::gaussian_kg(3.0, 1.0).unwrap();
        let at_one = psi_kernel(Sign::Minus, 1.0, &h, PsiMethod::Regime).unwrap();
        let near = psi_minus_above_one(1e-8, &h).unwrap();
        assert!((at_one - near).abs() < 1e-5, "{at_one} vs {near}");
        // the approach is O(ε)
        let e4 = psi_minus_above_one(1e-4, &h).unwrap();
        let e6 = psi_minus_above_one(1e-6, &h).unwrap();
        assert!((e6 - at_one).abs() < (e4 - at_one).abs() / 50.0);
    }

    #[test]
    fn k_scaled_consistency() {
        for &(r, x) in &[(0.4, 1.0), (3.0, 2.0)] {
            let k = bessel_k_imag(r, x);
            let s = bessel_k_imag_scaled(r, x);
            assert!((k - (-PI * r).exp() * s).abs() < 1e-15);
        }
    }

    #[test]
    fn moment_paths_agree() {
        let g = WeightSpec::gaussian_t(3.0).unwrap();
        let one = c(1.0, 0.0);
        let single = moment_quadrature(&g, &[one], 400.0).unwrap();
        assert!(single.difference < 1e-8 * single.direct);
        let rep = moment_quadrature(&g, &[one, one], 400.0).unwrap();
        assert!(rep.difference < 1e-6, "{rep:?}");
        assert!(rep.tail_bound < 1e-12);
        let scaled = moment_quadrature(&g.scaled(2.5), &[one, one], 400.0).unwrap();
        assert!((scaled.direct - 2.5 * rep.direct).abs() < 1e-9 * rep.direct);
        assert!((scaled.via_sum - 2.5 * rep.via_sum).abs() < 1e-9 * rep.direct);
        assert!(matches!(
            moment_quadrature(&g, &[one], 5.0),
            Err(Error::TailError(_))
        ));
    }

    #[test]
    fn zeta_bound_holds_on_samples() {
        for k in 0..=800 {
            let t = k as f64 * 0.5;
            let z = crate::specfun::zeta(c(0.5, t)).unwrap().norm();
            assert!(z <= zeta_half_line_bound(t), "t={t}: {z}");
        }
    }
}
