//! Ordinary and cusp-pair Kloosterman sums for Γ₀(q).
//!
//! Three independent routes are provided for the generalised sums:
//!
//! * a brute-force enumeration of Bruhat cells `B[a, d; c]` whose conjugate
//!   by the two scaling matrices lies in Γ₀(q);
//! * for square-free `q` and the shifted scaling convention, a closed form
//!   as an ordinary Kloosterman sum;
//! * for general `q`, a factorisation into a local sum at the primes of
//!   `q` and an ordinary sum at the coprime part of the modulus.
//!
//! All phases are reduced exactly in integer arithmetic before the complex
//! exponential is taken, so every term is a unit complex number accurate to
//! machine precision.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{
    divisor_count, divisors, euler_phi, is_squarefree, mod_inverse, part_supported_on,
};
use crate::error::{Error, Result};
use crate::matgroup::{scaling_data, Convention, Cusp, IntMat2, Splitting};

/// `e(k/l) = exp(2πi k/l)` with `k` reduced modulo `l` first.
fn unit_root(k: i128, l: i128) -> Complex64 {
    let t = 2.0 * PI * (k.rem_euclid(l) as f64) / l as f64;
    Complex64::new(t.cos(), t.sin())
}

/// The ordinary Kloosterman sum `S(m, n; c) = Σ_{ad ≡ 1 (c)} e((ma + nd)/c)`.
pub fn ordinary_kloosterman(m: i64, n: i64, c: u64) -> Complex64 {
    assert!(c >= 1, "ordinary_kloosterman: modulus must be positive");
    let ci = c as i64;
    let mut s = Complex64::new(0.0, 0.0);
    for a in 1..=ci {
        if a.gcd(&ci) != 1 {
            continue;
        }
        let d = mod_inverse(a, ci).expect("unit");
        s += unit_root(m as i128 * a as i128 + n as i128 * d as i128, ci as i128);
    }
    s
}

/// One side of a generalised Kloosterman sum: an integral scaling matrix
/// `P` (lower row `(w, ū)`) together with the width `h` of the dilation
/// `diag(√h, 1/√h)` that completes the scaling map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingSide {
    pub matrix: IntMat2,
    pub width: u64,
}

impl ScalingSide {
    /// The side attached to a cusp under a convention.
    pub fn from_cusp(cusp: &Cusp, convention: Convention) -> Result<Self> {
        let s = scaling_data(cusp, convention)?;
        Ok(Self {
            matrix: s.integral_matrix(),
            width: s.width,
        })
    }

    /// The side for the cusp `u/w` with an explicitly chosen `ū`
    /// (any integer with `u ū ≡ 1 (mod w)` suffices for `u`), width `h`.
    pub fn with_lower_row(w: u64, ubar: i64, width: u64) -> Result<Self> {
        let u = mod_inverse(ubar, w as i64)?;
        let b = (u as i128 * ubar as i128 - 1) / w as i128;
        let matrix = IntMat2::new(u, i64::try_from(b).expect("overflow"), w as i64, ubar)?;
        Ok(Self { matrix, width })
    }
}

/// True iff `P1 · B[a, d; c] · P2⁻¹ ∈ Γ₀(q)`; requires `ad ≡ 1 (mod c)`.
pub fn conjugate_in_gamma0(p1: &IntMat2, p2: &IntMat2, q: u64, a: i64, d: i64, c: i64) -> bool {
    let (a, d, c) = (a as i128, d as i128, c as i128);
    let b = (a * d - 1) / c;
    debug_assert_eq!((a * d - 1).rem_euclid(c), 0);
    // Lower row of P1 · B.
    let l1 = p1.c as i128 * a + p1.d as i128 * c;
    let l2 = p1.c as i128 * b + p1.d as i128 * d;
    // Lower-left entry after multiplying by P2⁻¹ = ((p2.d, −p2.b), (−p2.c, p2.a)).
    let ll = l1 * p2.d as i128 - l2 * p2.c as i128;
    ll.rem_euclid(q as i128) == 0
}

/// A generalised Kloosterman sum together with its number of summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KloostermanValue {
    pub value: Complex64,
    /// Number of admissible `(a, d)` pairs.
    pub terms: u64,
}

/// Brute-force generalised Kloosterman sum for two scaling sides:
///
/// `Σ ϰ_q(P1 B[a,d;c] P2⁻¹) e(m a/(h1 c) + n d/(h2 c))` over `a mod h1 c`,
/// `d mod h2 c`, `ad ≡ 1 (mod c)`.
pub fn kloosterman_sides(
    q: u64,
    side1: &ScalingSide,
    side2: &ScalingSide,
    m: i64,
    n: i64,
    c: u64,
) -> KloostermanValue {
    assert!(c >= 1, "Kloosterman modulus index must be positive");
    let (h1, h2, ci) = (side1.width as i64, side2.width as i64, c as i64);
    let l = h1 as i128 * h2 as i128 * ci as i128;
    let mut value = Complex64::new(0.0, 0.0);
    let mut terms = 0u64;
    for a in 0..h1 * ci {
        if a.gcd(&ci) != 1 {
            continue;
        }
        let d0 = mod_inverse(a, ci).expect("unit") % ci;
        for j in 0..h2 {
            let d = d0 + j * ci;
            if conjugate_in_gamma0(&side1.matrix, &side2.matrix, q, a, d, ci) {
                terms += 1;
                let k = m as i128 * a as i128 * h2 as i128 + n as i128 * d as i128 * h1 as i128;
                value += unit_root(k, l);
            }
        }
    }
    KloostermanValue { value, terms }
}

/// Specification of a generalised Kloosterman sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenKloostermanSpec {
    pub q: u64,
    pub cusp_a: Cusp,
    pub cusp_b: Cusp,
    pub convention: Convention,
    pub m: i64,
    pub n: i64,
    /// The integer `c`; the true modulus is `c √(h1 h2)` with `h_i` the
    /// widths of the two scaling maps.
    pub c_index: u64,
}

impl GenKloostermanSpec {
    fn validate(&self) -> Result<()> {
        for cusp in [&self.cusp_a, &self.cusp_b] {
            if cusp.q != self.q
                || crate::matgroup::canonicalize_cusp((cusp.u as i64, cusp.w as i64), self.q)
                    != *cusp
            {
                return Err(Error::InvalidParameters(format!(
                    "{cusp} is not a canonical cusp of level {}",
                    self.q
                )));
            }
        }
        if self.c_index == 0 {
            return Err(Error::InvalidParameters(
                "modulus index must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The two scaling sides.
    pub fn sides(&self) -> Result<(ScalingSide, ScalingSide)> {
        self.validate()?;
        Ok((
            ScalingSide::from_cusp(&self.cusp_a, self.convention)?,
            ScalingSide::from_cusp(&self.cusp_b, self.convention)?,
        ))
    }
}

/// Brute-force evaluation of a generalised Kloosterman sum.
pub fn general_kloosterman_bruteforce(spec: &GenKloostermanSpec) -> Result<Complex64> {
    Ok(general_kloosterman_terms(spec)?.value)
}

/// Brute-force evaluation returning the number of summands as well.
pub fn general_kloosterman_terms(spec: &GenKloostermanSpec) -> Result<KloostermanValue> {
    let (s1, s2) = spec.sides()?;
    Ok(kloosterman_sides(
        spec.q,
        &s1,
        &s2,
        spec.m,
        spec.n,
        spec.c_index,
    ))
}

/// The trivial bound `h1 h2 φ(c)` on a generalised sum.
pub fn trivial_bound(spec: &GenKloostermanSpec) -> Result<u64> {
    let (s1, s2) = spec.sides()?;
    Ok(s1.width * s2.width * euler_phi(spec.c_index))
}

/// Closed form of the shifted-convention sum at the cusps `1/w1`, `1/w2` of
/// square-free level `q`, modulus `(w1,w2) r √(v1 v2)`:
/// `S(\overline{(v1,w2)} m, \overline{(w1,v2)} n; (v1,v2)(w1,w2) r)`.
pub fn general_kloosterman_squarefree(
    q: u64,
    w1: u64,
    w2: u64,
    m: i64,
    n: i64,
    r: u64,
) -> Result<Complex64> {
    if !is_squarefree(q) {
        return Err(Error::ConventionUnavailable(format!(
            "level {q} is not square-free"
        )));
    }
    let s = Splitting::new(q, w1, w2)?;
    let [g_a, g_b, g_c, g_d] = s.pattern_moduli();
    if r == 0 || r.gcd(&(g_a * g_d)) != 1 {
        return Err(Error::InvalidModulus(format!(
            "r = {r} must be positive and coprime to {}",
            g_a * g_d
        )));
    }
    let modulus = g_b * g_c * r;
    let ia = mod_inverse(g_a as i64, modulus as i64)?;
    let id = mod_inverse(g_d as i64, modulus as i64)?;
    Ok(ordinary_kloosterman(
        (ia as i128 * m as i128).rem_euclid(modulus as i128) as i64,
        (id as i128 * n as i128).rem_euclid(modulus as i128) as i64,
        modulus,
    ))
}

/// The factorisation of a plain-convention sum at modulus index `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactoredKloosterman {
    /// `c0 = (c, q^∞)`.
    pub c0: u64,
    /// `c* = c / c0`, coprime to `q`.
    pub c_star: u64,
    /// The local sum at modulus index `c0` for the cusps `\overline{c*} u_i / w_i`.
    pub q_part: Complex64,
    /// The ordinary sum at modulus `c*`.
    pub coprime_part: Complex64,
}

impl FactoredKloosterman {
    /// The product of the two factors.
    pub fn product(&self) -> Complex64 {
        self.q_part * self.coprime_part
    }
}

/// Splits the plain-convention sum `S(m, n; c√(v1* v2*); u1/w1, u2/w2)` as
/// (local sum at `c0`) × (ordinary sum at `c*`).
///
/// The local factor uses the cusps `\overline{c*} u_i / w_i` whose scaling
/// matrices have lower rows `(w_i, c* ū_i)`, frequencies multiplied by the
/// inverses of `c*` modulo `v_i c0`; the ordinary factor has frequencies
/// multiplied by the inverses of `v_i* c0` modulo `c*`.
pub fn kloosterman_factorize(
    q: u64,
    cusp_a: &Cusp,
    cusp_b: &Cusp,
    m: i64,
    n: i64,
    c: u64,
) -> Result<FactoredKloosterman> {
    let spec = GenKloostermanSpec {
        q,
        cusp_a: *cusp_a,
        cusp_b: *cusp_b,
        convention: Convention::Plain,
        m,
        n,
        c_index: c,
    };
    let (s1, s2) = spec.sides()?;
    let c0 = part_supported_on(c, q);
    let c_star = c / c0;
    let cs = c_star as i64;
    let local_side = |s: &ScalingSide, cusp: &Cusp| -> Result<ScalingSide> {
        let ubar = (s.matrix.d as i128 * cs as i128).rem_euclid(q as i128 * cusp.w as i128) as i64;
        ScalingSide::with_lower_row(cusp.w, ubar, s.width)
    };
    let l1 = local_side(&s1, cusp_a)?;
    let l2 = local_side(&s2, cusp_b)?;
    let t1 = mod_inverse(cs, (cusp_a.v() * c0) as i64)?;
    let t2 = mod_inverse(cs, (cusp_b.v() * c0) as i64)?;
    let q_part = kloosterman_sides(q, &l1, &l2, t1 * m, t2 * n, c0).value;
    let coprime_part = if c_star == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        let e1 = mod_inverse(((s1.width * c0) % c_star) as i64, cs)?;
        let e2 = mod_inverse(((s2.width * c0) % c_star) as i64, cs)?;
        ordinary_kloosterman(
            (e1 as i128 * m as i128).rem_euclid(cs as i128) as i64,
            (e2 as i128 * n as i128).rem_euclid(cs as i128) as i64,
            c_star,
        )
    };
    Ok(FactoredKloosterman {
        c0,
        c_star,
        q_part,
        coprime_part,
    })
}

/// Result of the Weil-bound check for an ordinary sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeilReport {
    pub abs_value: f64,
    /// `τ(c) (m, n, c)^{1/2} c^{1/2}`.
    pub bound: f64,
    pub holds: bool,
}

/// Checks `|S(m, n; c)| ≤ τ(c) (m, n, c)^{1/2} c^{1/2}`.
pub fn weil_bound_report(m: i64, n: i64, c: u64) -> WeilReport {
    let abs_value = ordinary_kloosterman(m, n, c).norm();
    let bound = weil_bound(m, n, c);
    WeilReport {
        abs_value,
        bound,
        holds: abs_value <= bound * (1.0 + 1e-12),
    }
}

/// `τ(c) (m, n, c)^{1/2} c^{1/2}`.
pub fn weil_bound(m: i64, n: i64, c: u64) -> f64 {
    let g = (m.unsigned_abs()).gcd(&n.unsigned_abs()).gcd(&c);
    divisor_count(c) as f64 * (g as f64).sqrt() * (c as f64).sqrt()
}

/// Weil-type bound for a generalised sum at modulus index `c`:
/// `h1 h2 φ(c0) τ(c*) (m, n, c*)^{1/2} c*^{1/2}`, obtained from the
/// factorisation with the trivial bound on the local part and Weil's
/// bound on the ordinary part.
pub fn weil_bound_general(q: u64, h1: u64, h2: u64, m: i64, n: i64, c: u64) -> f64 {
    let c0 = part_supported_on(c, q);
    let cs = c / c0;
    (h1 * h2 * euler_phi(c0)) as f64 * weil_bound(m, n, cs)
}

/// Truncated convergence sum and explicit tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    /// `Σ_{c ≤ C} |S(m, n; c√(h1h2))| / (c√(h1 h2))^τ`.
    pub partial_sum: f64,
    /// Upper bound for the remaining sum over `c > C`.
    pub tail_bound: f64,
    /// Upper bound for the complete sum over all `c`.
    pub total_bound: f64,
}

/// Upper bound for `Σ_{k > y} τ(k) k^{−σ}`, `σ > 1`.
///
/// Uses `Σ_{k ≤ x} τ(k) ≤ x (ln x + 1)` and partial summation; for `y < 1`
/// the complete sum `ζ(σ)² ≤ (σ/(σ−1))²` is returned.
fn divisor_tail_bound(sigma: f64, y: f64) -> f64 {
    if y < 1.0 {
        let z = sigma / (sigma - 1.0);
        return z * z;
    }
    let s1 = sigma - 1.0;
    sigma * y.powf(-s1) * (y.ln() / s1 + 1.0 / (s1 * s1) + 1.0 / s1)
}

/// Partial sum of `|S|/modulus^τ` over `c ≤ C` and the explicit tail bound.
///
/// Requires `τ > 3/2`, `ξ > 1/2`, `τ − ξ > 1` and nonzero `m, n`. The
/// explicit bound uses the divisor function directly (so it only needs
/// `τ > 3/2`); `ξ` enters through the domain check, mirroring the usual
/// `(m,n,c)^ξ c^{ξ−τ}` majorant.
#[allow(clippy::too_many_arguments)]
pub fn tail_sum_report(
    q: u64,
    cusp_a: &Cusp,
    cusp_b: &Cusp,
    m: i64,
    n: i64,
    tau: f64,
    xi: f64,
    c_max: u64,
) -> Result<TailReport> {
    if !(tau > 1.5 && xi > 0.5 && tau - xi > 1.0) {
        return Err(Error::InvalidParameters(format!(
            "need τ > 3/2, ξ > 1/2, τ − ξ > 1; got τ = {tau}, ξ = {xi}"
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameters(
            "frequencies must be nonzero".into(),
        ));
    }
    let s1 = ScalingSide::from_cusp(cusp_a, Convention::Plain)?;
    let s2 = ScalingSide::from_cusp(cusp_b, Convention::Plain)?;
    let hh = (s1.width * s2.width) as f64;
    let mut partial_sum = 0.0;
    for c in 1..=c_max {
        let v = kloosterman_sides(q, &s1, &s2, m, n, c).value.norm();
        partial_sum += v / (c as f64 * hh.sqrt()).powf(tau);
    }
    // |S(c)| ≤ h1 h2 φ(c0) τ(c*) (m,n,c*)^{1/2} c*^{1/2}, so each term is at
    // most hh^{1−τ/2} c0^{1−τ} τ(c*) (m,n,c*)^{1/2} c*^{−σ}, σ = τ − 1/2.
    let mn = (m.unsigned_abs()).gcd(&n.unsigned_abs());
    let primes = crate::arith::prime_divisors(q);
    let c0_full: f64 = primes
        .iter()
        .map(|&p| 1.0 / (1.0 - (p as f64).powf(1.0 - tau)))
        .product();
    let c0_upto = |y: f64| -> f64 {
        // Σ_{c0 | q^∞, c0 ≤ y} c0^{1−τ}.
        let mut stack = vec![(1u64, 0usize)];
        let mut s = 0.0;
        while let Some((x, i)) = stack.pop() {
            if i == primes.len() {
                s += (x as f64).powf(1.0 - tau);
                continue;
            }
            let mut y_ = x;
            while (y_ as f64) <= y {
                stack.push((y_, i + 1));
                match y_.checked_mul(primes[i]) {
                    Some(z) => y_ = z,
                    None => break,
                }
            }
        }
        s
    };
    let sigma = tau - 0.5;
    let cstar_sum = |y: f64| -> f64 {
        // Σ_{c* > y} τ(c*) (m,n,c*)^{1/2} c*^{−σ}
        //   ≤ Σ_{g | (m,n)} τ(g) g^{1/2−σ} Σ_{k > y/g} τ(k) k^{−σ}.
        divisors(mn)
            .into_iter()
            .map(|g| {
                divisor_count(g) as f64
                    * (g as f64).powf(0.5 - sigma)
                    * divisor_tail_bound(sigma, y / g as f64)
            })
            .sum()
    };
    let pref = hh.powf(1.0 - tau / 2.0);
    let y = (c_max as f64).sqrt();
    // c > C forces c0 > √C or c* > √C.
    let tail_bound = pref * ((c0_full - c0_upto(y)) * cstar_sum(0.0) + c0_full * cstar_sum(y));
    let total_bound = pref * c0_full * cstar_sum(0.0);
    Ok(TailReport {
        partial_sum,
        tail_bound,
        total_bound,
    })
}
