//! Eisenstein series for `Γ_0(q)` with square-free `q`: the constant terms
//! `φ(s; w1, w2)` and the non-constant Fourier coefficients in closed form,
//! the scattering matrix, a regularity probe for the normalised constant
//! term, and the Euler factors `X_{cd}`, `Y_{ab}` of the continuous spectrum.
//!
//! The cusps of `Γ_0(q)` are `1/w` with `w | q`; throughout `v = q/w`. For a
//! pair of cusps `1/w1`, `1/w2` write
//! `A = (v1, v2)(w1, w2)` and `B = (v1, w2)(w1, v2)`; for square-free `q`
//! every prime of `q` divides exactly one of `A` and `B`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{
    divisors, euler_phi, gcd, is_squarefree, part_p, prime_divisors, sigma_complex,
};
use crate::error::{Error, Result};
use crate::specfun::{cgamma, l_principal, lgamma, rgamma, zeta};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pow_real(base: f64, s: Complex64) -> Complex64 {
    (s * base.ln()).exp()
}

fn gcd_u(a: u64, b: u64) -> u64 {
    gcd(a as i64, b as i64) as u64
}

/// Arithmetic data attached to a pair of cusps `1/w1`, `1/w2` of `Γ_0(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspPair {
    pub q: u64,
    pub w1: u64,
    pub w2: u64,
    pub v1: u64,
    pub v2: u64,
}

impl CuspPair {
    /// Validates `μ(q) ≠ 0` and `w1, w2 | q`.
    pub fn new(q: u64, w1: u64, w2: u64) -> Result<Self> {
        if q == 0 || !is_squarefree(q) {
            return Err(Error::InvalidModulus(format!(
                "level {q} is not square-free"
            )));
        }
        for w in [w1, w2] {
            if w == 0 || !q.is_multiple_of(w) {
                return Err(Error::InvalidParameters(format!("{w} does not divide {q}")));
            }
        }
        Ok(Self {
            q,
            w1,
            w2,
            v1: q / w1,
            v2: q / w2,
        })
    }

    /// `A = (v1, v2)(w1, w2)`, the fixed factor of the Kloosterman moduli.
    pub fn a(&self) -> u64 {
        gcd_u(self.v1, self.v2) * gcd_u(self.w1, self.w2)
    }

    /// `B = (v1, w2)(w1, v2)`; the free modulus `r` runs over `(r, B) = 1`.
    pub fn b(&self) -> u64 {
        gcd_u(self.v1, self.w2) * gcd_u(self.w1, self.v2)
    }

    /// `(w1, w2)·√(v1 v2)`, the scale in the denominator of the moduli.
    pub fn scale(&self) -> f64 {
        gcd_u(self.w1, self.w2) as f64 * ((self.v1 * self.v2) as f64).sqrt()
    }

    /// Kronecker δ of the two cusps.
    pub fn diagonal(&self) -> bool {
        self.w1 == self.w2
    }
}

/// `P(s) = Π_{p|A} (p−1)/(p^{2s}−1) · Π_{p|B} (p^s − p^{1−s})/(p^{2s}−1)`.
fn local_product(pair: &CuspPair, s: Complex64) -> Result<Complex64> {
    let one = c(1.0, 0.0);
    let mut v = one;
    for p in prime_divisors(pair.a()) {
        let den = pow_real(p as f64, 2.0 * s) - 1.0;
        if den.norm() == 0.0 {
            return Err(Error::PoleError(format!("p^(2s) = 1 at p = {p}, s = {s}")));
        }
        v *= (p as f64 - 1.0) / den;
    }
    for p in prime_divisors(pair.b()) {
        let pf = p as f64;
        let den = pow_real(pf, 2.0 * s) - 1.0;
        if den.norm() == 0.0 {
            return Err(Error::PoleError(format!("p^(2s) = 1 at p = {p}, s = {s}")));
        }
        v *= (pow_real(pf, s) - pow_real(pf, one - s)) / den;
    }
    Ok(v)
}

/// `√π Γ(s − 1/2)/Γ(s)`.
fn gamma_ratio(s: Complex64) -> Result<Complex64> {
    Ok(PI.sqrt() * cgamma(s - 0.5)? * rgamma(s))
}

/// The coefficient of `y^{1−s}` in the constant term of the Eisenstein
/// series at `1/w1` expanded at `1/w2`:
/// `√π Γ(s−1/2)/Γ(s) · ζ(2s−1)/ζ(2s) · P(s)`.
pub fn eisen_phi(s: Complex64, q: u64, w1: u64, w2: u64) -> Result<Complex64> {
    let pair = CuspPair::new(q, w1, w2)?;
    let z2 = zeta(2.0 * s)?;
    if z2.norm() == 0.0 {
        return Err(Error::PoleError(format!("ζ(2s) vanishes at s = {s}")));
    }
    Ok(gamma_ratio(s)? * zeta(2.0 * s - 1.0)? / z2 * local_product(&pair, s)?)
}

/// The Kloosterman–Dirichlet series of the non-constant coefficient in
/// closed form:
/// `σ_{1−2s}(n, χ_q)/L(2s, χ_q) · ((v1,v2)/[v1,v2])^s · Π_{p|A} (σ_{1−2s}(n_p)(1 − p^{−2s}) − 1)`.
pub fn eisen_coeff(n: i64, s: Complex64, q: u64, w1: u64, w2: u64) -> Result<Complex64> {
    let pair = CuspPair::new(q, w1, w2)?;
    if n == 0 {
        return Err(Error::InvalidParameters(
            "eisen_coeff requires n ≠ 0".into(),
        ));
    }
    let na = n.unsigned_abs();
    let one = c(1.0, 0.0);
    let e = one - 2.0 * s;
    let l = l_principal(2.0 * s, q)?;
    if l.norm() == 0.0 {
        return Err(Error::PoleError(format!("L(2s, χ_q) vanishes at s = {s}")));
    }
    let g = gcd_u(pair.v1, pair.v2);
    let lcm = pair.v1 / g * pair.v2;
    let mut v = sigma_complex(na, e, Some(q)) / l * pow_real(g as f64 / lcm as f64, s);
    for p in prime_divisors(pair.a()) {
        let np = part_p(na, p)?;
        v *= sigma_complex(np, e, None) * (one - pow_real(p as f64, -2.0 * s)) - 1.0;
    }
    Ok(v)
}

/// The frame `2 π^s |n|^{s−1/2} / Γ(s)` multiplying
/// `√y K_{s−1/2}(2π|n|y) e(nx)` and [`eisen_coeff`] in the Fourier expansion.
pub fn eisen_coeff_frame(n: i64, s: Complex64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidParameters(
            "eisen_coeff_frame requires n ≠ 0".into(),
        ));
    }
    let na = n.unsigned_abs() as f64;
    Ok(2.0 * pow_real(PI, s) * pow_real(na, s - 0.5) * rgamma(s))
}

/// The assembled Fourier coefficient: [`eisen_coeff_frame`] × [`eisen_coeff`].
pub fn eisen_fourier_coefficient(
    n: i64,
    s: Complex64,
    q: u64,
    w1: u64,
    w2: u64,
) -> Result<Complex64> {
    Ok(eisen_coeff_frame(n, s)? * eisen_coeff(n, s, q, w1, w2)?)
}

/// The scattering matrix `(φ(s; w1, w2))_{w1, w2 | q}`, divisors ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix {
    pub q: u64,
    pub s: Complex64,
    pub order: Vec<u64>,
    /// Row-major, `entries[i][j] = φ(s; order[i], order[j])`.
    pub entries: Vec<Vec<Complex64>>,
}

impl ScatteringMatrix {
    /// Dimension (= number of divisors of `q` = number of cusps).
    pub fn dim(&self) -> usize {
        self.order.len()
    }

    /// Matrix product.
    pub fn mul(&self, rhs: &Self) -> Result<Vec<Vec<Complex64>>> {
        if self.dim() != rhs.dim() {
            return Err(Error::LengthMismatch(self.dim(), rhs.dim()));
        }
        let n = self.dim();
        let mut out = vec![vec![c(0.0, 0.0); n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..n).map(|k| self.entries[i][k] * rhs.entries[k][j]).sum();
            }
        }
        Ok(out)
    }

    /// JSON form `{q, s, order, entries}` with entries as row-major `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .flatten()
            .map(|z| json!([z.re, z.im]))
            .collect();
        json!({ "q": self.q, "s": [self.s.re, self.s.im], "order": self.order, "entries": entries })
    }
}

/// Builds the scattering matrix at `s`.
pub fn scattering_matrix(s: Complex64, q: u64) -> Result<ScatteringMatrix> {
    if q == 0 || !is_squarefree(q) {
        return Err(Error::InvalidModulus(format!(
            "level {q} is not square-free"
        )));
    }
    let order = divisors(q);
    let mut entries = Vec::with_capacity(order.len());
    for &w1 in &order {
        let row = order
            .iter()
            .map(|&w2| eisen_phi(s, q, w1, w2))
            .collect::<Result<Vec<_>>>()?;
        entries.push(row);
    }
    Ok(ScatteringMatrix {
        q,
        s,
        order,
        entries,
    })
}

/// `max |S(s) S(1−s) − I|` over all entries.
pub fn unitarity_residual(s: Complex64, q: u64) -> Result<f64> {
    let a = scattering_matrix(s, q)?;
    let b = scattering_matrix(c(1.0, 0.0) - s, q)?;
    let prod = a.mul(&b)?;
    let mut worst: f64 = 0.0;
    for (i, row) in prod.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((z - target).norm());
        }
    }
    Ok(worst)
}

/// `s(1−s) Γ(s) L(2s, χ_q) × (constant term at y)`, written so that every
/// factor is finite away from the three probe points:
/// `s(1−s)[Γ(s)L(2s,χ_q) δ y^s + √π Γ(s−1/2) ζ(2s−1) P̃(s) y^{1−s}]` with
/// `P̃(s) = L(2s,χ_q)/ζ(2s) · P(s) = Π_{p|A}(p−1)p^{−2s} Π_{p|B}(p^{−s} − p^{1−3s})`.
pub fn normalized_constant_term(
    s: Complex64,
    y: f64,
    q: u64,
    w1: u64,
    w2: u64,
) -> Result<Complex64> {
    let pair = CuspPair::new(q, w1, w2)?;
    let one = c(1.0, 0.0);
    let mut ptilde = one;
    for p in prime_divisors(pair.a()) {
        ptilde *= (p as f64 - 1.0) * pow_real(p as f64, -2.0 * s);
    }
    for p in prime_divisors(pair.b()) {
        let pf = p as f64;
        ptilde *= pow_real(pf, -s) - pow_real(pf, one - 3.0 * s);
    }
    let mut v = PI.sqrt() * cgamma(s - 0.5)? * zeta(2.0 * s - 1.0)? * ptilde * pow_real(y, one - s);
    if pair.diagonal() {
        v += lgamma(s)?.exp() * l_principal(2.0 * s, q)? * pow_real(y, s);
    }
    Ok(s * (one - s) * v)
}

/// Result of probing [`normalized_constant_term`] on a small circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityProbe {
    pub center: [f64; 2],
    pub radius: f64,
    /// Mean over the circle (= the value at the centre for a regular function).
    pub center_value: [f64; 2],
    /// `max |f(s) − mean|` over the circle.
    pub variation: f64,
    /// `(1/2πi)∮ f ds` by the trapezoidal rule; zero for a regular function.
    pub residue: [f64; 2],
    pub regular: bool,
}

/// Probes regularity of the normalised constant term at `s0` by sampling a
/// circle of the given radius (the function may be singular-looking at `s0`
/// itself because of cancelling poles).
pub fn regularity_probe(
    s0: Complex64,
    radius: f64,
    y: f64,
    q: u64,
    w1: u64,
    w2: u64,
) -> Result<RegularityProbe> {
    let m = 64;
    let mut values = Vec::with_capacity(m);
    for k in 0..m {
        let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
        values.push((e, normalized_constant_term(s0 + radius * e, y, q, w1, w2)?));
    }
    let mean: Complex64 = values.iter().map(|(_, f)| f).sum::<Complex64>() / m as f64;
    let variation = values
        .iter()
        .map(|(_, f)| (f - mean).norm())
        .fold(0.0, f64::max);
    // (1/2πi)∮ f ds = mean over θ of f · (radius·e^{iθ})
    let residue: Complex64 = values
        .iter()
        .map(|(e, f)| f * e * radius)
        .sum::<Complex64>()
        / m as f64;
    let regular = variation < 1e-4 && residue.norm() < 1e-8 * mean.norm().max(1.0);
    Ok(RegularityProbe {
        center: [s0.re, s0.im],
        radius,
        center_value: [mean.re, mean.im],
        variation,
        residue: [residue.re, residue.im],
        regular,
    })
}

/// `X_{cd}(ξ; u, v, w, z)` from its divisor-sum definition (sum over
/// factorisations `cd = c1 d1`), for square-free `cd`.
#[allow(clippy::too_many_arguments)]
pub fn x_cd_divisor_sum(
    cc: u64,
    d: u64,
    xi: Complex64,
    u: Complex64,
    v: Complex64,
    w: Complex64,
    z: Complex64,
) -> Result<Complex64> {
    let cd = cc * d;
    if cd == 0 || !is_squarefree(cd) {
        return Err(Error::InvalidParameters(format!(
            "cd = {cd} must be square-free"
        )));
    }
    let one = c(1.0, 0.0);
    let pw = |p: u64, e: Complex64| pow_real(p as f64, -e); // p^{−e}
    let e_uvwz = 0.5 * (u - v - w + z + one);
    let e_uvwz0 = 0.5 * (u - v - w + z);
    let e_sum = 0.5 * (u + v + w + z - one);
    let e_diff = 0.5 * (u + v - w - z + one);
    let mut pre = one;
    for p in prime_divisors(cd) {
        pre /= (one - pw(p, one + 2.0 * xi)) * (one - pw(p, one - 2.0 * xi)) * (one - pw(p, u + v));
    }
    let mut sum = c(0.0, 0.0);
    for c1 in divisors(cd) {
        let d1 = cd / c1;
        let ratio = gcd_u(d1, d) as f64 / gcd_u(c1, cc) as f64;
        let mut t = pow_real(ratio, 0.5 + xi) / d1 as f64;
        for p in prime_divisors(gcd_u(d1, cc) * gcd_u(c1, d)) {
            t *= one - pw(p, e_uvwz + xi);
        }
        for p in prime_divisors(gcd_u(c1, cc) * gcd_u(d1, d)) {
            t *= pw(p, e_uvwz0) - pw(p, 0.5 + xi);
        }
        for p in prime_divisors(d1) {
            t *= (one - pw(p, e_sum - xi)) * (one - pw(p, e_diff - xi));
        }
        for p in prime_divisors(c1) {
            t *= (one - pw(p, one - 2.0 * xi)) * (one - pw(p, u + v))
                - (one - pw(p, e_sum - xi)) * (one - pw(p, e_diff - xi));
        }
        sum += t;
    }
    Ok(pre * sum)
}

/// `Y_{ab}(ξ; u, v, w, z) = Σ_{c|a, d|b} c^{u+v} d^{(3u+v−w+z−1)/2 − ξ} X_{cd}`.
#[allow(clippy::too_many_arguments)]
pub fn y_ab_divisor_sum(
    a: u64,
    b: u64,
    xi: Complex64,
    u: Complex64,
    v: Complex64,
    w: Complex64,
    z: Complex64,
) -> Result<Complex64> {
    if gcd_u(a, b) != 1 {
        return Err(Error::InvalidParameters(format!("gcd({a}, {b}) ≠ 1")));
    }
    let one = c(1.0, 0.0);
    let ed = 0.5 * (3.0 * u + v - w + z - one) - xi;
    let mut sum = c(0.0, 0.0);
    for cc in divisors(a) {
        for d in divisors(b) {
            sum += pow_real(cc as f64, u + v)
                * pow_real(d as f64, ed)
                * x_cd_divisor_sum(cc, d, xi, u, v, w, z)?;
        }
    }
    Ok(sum)
}

/// Local factor `|1 + p^{−1/2−ir}|^{−2} (1 − 1/p)^{−1} {(1 + p^{−1/2+ir})(1 − 1/p) − (1 − p^{−1/2+ir})²}`.
fn x_local_half(p: u64, r: f64) -> Complex64 {
    let pf = p as f64;
    let one = c(1.0, 0.0);
    let a = pow_real(pf, c(-0.5, -r));
    let b = pow_real(pf, c(-0.5, r));
    let inv = 1.0 - 1.0 / pf;
    ((one + b) * inv - (one - b) * (one - b)) / ((one + a).norm_sqr() * inv)
}

/// `X_{cd}(ir; p_{1/2})` in product form: `c^{−1/2−ir} Π_{p|cd}` (local factor).
pub fn x_cd_closed_half(cc: u64, d: u64, r: f64) -> Complex64 {
    let mut v = pow_real(cc as f64, c(-0.5, -r));
    for p in prime_divisors(cc * d) {
        v *= x_local_half(p, r);
    }
    v
}

/// `Y_{ab}(ir; p_{1/2}) = (ab/φ(ab)) Π_{p|ab} (4|1 + p^{−1/2−ir}|^{−2} − 1/p)`.
pub fn y_ab_closed_half(a: u64, b: u64, r: f64) -> f64 {
    let ab = a * b;
    let mut v = ab as f64 / euler_phi(ab) as f64;
    for p in prime_divisors(ab) {
        let pf = p as f64;
        let t = c(1.0, 0.0) + pow_real(pf, c(-0.5, -r));
        v *= 4.0 / t.norm_sqr() - 1.0 / pf;
    }
    v
}

/// The four values compared at `p_{1/2}` (`u = v = w = z = 1/2`, `ξ = ir`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XyFactors {
    pub x_divisor_sum: [f64; 2],
    pub x_closed: [f64; 2],
    pub y_divisor_sum: [f64; 2],
    pub y_closed: [f64; 2],
}

/// Evaluates `X_{cd}` and `Y_{ab}` at `p_{1/2}` both from the divisor sums
/// and from the product formulas. Requires `c | a`, `d | b`, `(a, b) = 1`,
/// `ab` square-free.
pub fn xy_factors(r: f64, a: u64, b: u64, cc: u64, d: u64) -> Result<XyFactors> {
    if a == 0 || b == 0 || cc == 0 || d == 0 || !a.is_multiple_of(cc) || !b.is_multiple_of(d) {
        return Err(Error::InvalidParameters(format!(
            "need c | a and d | b (a={a}, b={b}, c={cc}, d={d})"
        )));
    }
    if gcd_u(a, b) != 1 || !is_squarefree(a * b) {
        return Err(Error::InvalidParameters(format!(
            "need (a, b) = 1 and ab square-free (a={a}, b={b})"
        )));
    }
    let h = c(0.5, 0.0);
    let xi = c(0.0, r);
    let xd = x_cd_divisor_sum(cc, d, xi, h, h, h, h)?;
    let xc = x_cd_closed_half(cc, d, r);
    let yd = y_ab_divisor_sum(a, b, xi, h, h, h, h)?;
    let yc = y_ab_closed_half(a, b, r);
    Ok(XyFactors {
        x_divisor_sum: [xd.re, xd.im],
        x_closed: [xc.re, xc.im],
        y_divisor_sum: [yd.re, yd.im],
        y_closed: [yc, 0.0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{mobius, ramanujan_sum};
    use crate::kloosterman::general_kloosterman_squarefree;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Euler φ for 1..=n by sieve.
    fn phi_table(n: usize) -> Vec<u64> {
        let mut phi: Vec<u64> = (0..=n as u64).collect();
        for p in 2..=n {
            if phi[p] == p as u64 {
                let mut k = p;
                while k <= n {
                    phi[k] -= phi[k] / p as u64;
                    k += p;
                }
            }
        }
        phi
    }

    /// Direct summation of the constant-term Dirichlet series
    /// `Σ_{(r,B)=1} φ(A r)/((w1,w2) r √(v1v2))^{2s}` with `R` chosen from the
    /// bound `φ(Ar) ≤ Ar`, so the neglected tail is below `tail`.
    fn phi_oracle(s: Complex64, pair: &CuspPair, tail: f64) -> Complex64 {
        let a = pair.a();
        let sigma = s.re;
        let scale = pair.scale().powf(2.0 * sigma);
        // Σ_{r>R} A r^{1−2σ} ≤ A R^{2−2σ}/(2σ−2)
        let r_max = ((a as f64 / (scale * (2.0 * sigma - 2.0) * tail))
            .powf(1.0 / (2.0 * sigma - 2.0)))
        .ceil() as usize
            + 1;
        let phi = phi_table(r_max);
        let phi_a = euler_phi(a) as f64;
        let mut sum = c(0.0, 0.0);
        for (r, &phi_r) in phi.iter().enumerate().take(r_max + 1).skip(1) {
            if gcd_u(r as u64, pair.b()) != 1 {
                continue;
            }
            let g = gcd_u(a, r as u64);
            // φ(Ar) = φ(A) φ(r) g / φ(g)
            let phi_ar = phi_a * phi_r as f64 * g as f64 / euler_phi(g) as f64;
            sum += phi_ar * pow_real(r as f64, -2.0 * s);
        }
        sum * pow_real(pair.scale(), -2.0 * s) * gamma_ratio(s).unwrap()
    }

    fn coeff_oracle(n: i64, s: Complex64, pair: &CuspPair, r_max: u64) -> Complex64 {
        let a = pair.a();
        let mut sum = c(0.0, 0.0);
        for r in 1..=r_max {
            if gcd_u(r, pair.b()) != 1 {
                continue;
            }
            sum += ramanujan_sum(a * r, n) as f64 * pow_real(pair.scale() * r as f64, -2.0 * s);
        }
        sum
    }

    #[test]
    fn phi_level_one_is_classical() {
        let s = c(0.75, 2.0);
        let one = c(1.0, 0.0);
        let v = eisen_phi(s, 1, 1, 1).unwrap();
        let expected = PI.sqrt() * cgamma(s - 0.5).unwrap() / cgamma(s).unwrap()
            * zeta(2.0 * s - 1.0).unwrap()
            / zeta(2.0 * s).unwrap();
        assert!((v - expected).norm() < 1e-13);
        let w = eisen_phi(one - s, 1, 1, 1).unwrap();
        assert!((v * w - 1.0).norm() < 1e-9);
    }

    #[test]
    fn phi_matches_direct_series_on_grid() {
        for q in [1u64, 2, 3, 6, 10, 15] {
            for &w1 in &divisors(q) {
                for &w2 in &divisors(q) {
                    let pair = CuspPair::new(q, w1, w2).unwrap();
                    for s in [c(1.7, 0.0), c(2.0, 0.0), c(2.0, 1.0)] {
                        let closed = eisen_phi(s, q, w1, w2).unwrap();
                        let direct = phi_oracle(s, &pair, 1e-8);
                        assert!(
                            (closed - direct).norm() < 1e-6,
                            "q={q} w1={w1} w2={w2} s={s}: {closed} vs {direct}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn phi_against_completed_zeta_form() {
        // L(2s,χ_q) φ(s; ∞, 1/w) = (1/π) φ(w) (π/q)^{2s} ζ(2−2s) Γ(1−s)/Γ(s) Π_{p|v}(p^s − p^{1−s})
        let one = c(1.0, 0.0);
        for q in [6u64, 30, 35] {
            for w in divisors(q) {
                let s = c(0.3, 4.0);
                let lhs = l_principal(2.0 * s, q).unwrap() * eisen_phi(s, q, q, w).unwrap();
                let mut rhs = euler_phi(w) as f64 / PI
                    * pow_real(PI / q as f64, 2.0 * s)
                    * zeta(2.0 * (one - s)).unwrap()
                    * cgamma(one - s).unwrap()
                    / cgamma(s).unwrap();
                for p in prime_divisors(q / w) {
                    rhs *= pow_real(p as f64, s) - pow_real(p as f64, one - s);
                }
                assert!(
                    (lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0),
                    "q={q} w={w}"
                );
            }
        }
    }

    #[test]
    fn coeff_examples() {
        let s = c(1.3, 0.4);
        let v = eisen_coeff(1, s, 1, 1, 1).unwrap();
        assert!((v - zeta(2.0 * s).unwrap().inv()).norm() < 1e-13);
        for n in [1i64, 2, 6, 12, 35] {
            assert_eq!(
                eisen_coeff(n, s, 6, 3, 2).unwrap(),
                eisen_coeff(-n, s, 6, 3, 2).unwrap()
            );
        }
        // q = 6, w1 = 6, w2 = 2, n = 2, s = 1.7
        let pair = CuspPair::new(6, 6, 2).unwrap();
        assert_eq!((pair.a(), pair.b()), (2, 3));
        let s = c(1.7, 0.0);
        let closed = eisen_coeff(2, s, 6, 6, 2).unwrap();
        let direct = coeff_oracle(2, s, &pair, 4000);
        assert!((closed - direct).norm() < 1e-6, "{closed} vs {direct}");
        assert!(eisen_coeff(0, s, 6, 6, 2).is_err());
        assert!(matches!(
            eisen_coeff(1, s, 12, 1, 1),
            Err(Error::InvalidModulus(_))
        ));
    }

    #[test]
    fn coeff_matches_direct_series_on_grid() {
        for q in [1u64, 2, 3, 6, 10, 15] {
            for &w1 in &divisors(q) {
                for &w2 in &divisors(q) {
                    let pair = CuspPair::new(q, w1, w2).unwrap();
                    for s in [c(1.7, 0.0), c(2.0, 1.0)] {
                        for n in [1i64, -2, 3, 30] {
                            let closed = eisen_coeff(n, s, q, w1, w2).unwrap();
                            // |c_m(n)| ≤ |n|: tail ≤ |n| Σ_{r>R} (scale r)^{−2σ}
                            let direct = coeff_oracle(n, s, &pair, 20_000);
                            assert!(
                                (closed - direct).norm() < 1e-6,
                                "q={q} w1={w1} w2={w2} n={n} s={s}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ramanujan_moduli_agree_with_kloosterman_at_zero_frequency() {
        // S(0, n; A r) over the cusp pair equals the Ramanujan sum c_{Ar}(n) for small r
        for (q, w1, w2) in [(6u64, 6u64, 2u64), (15, 5, 15), (10, 1, 1)] {
            let pair = CuspPair::new(q, w1, w2).unwrap();
            for r in 1..=12u64 {
                if gcd_u(r, pair.b()) != 1 {
                    continue;
                }
                for n in [1i64, 2, 3, 5, 6] {
                    let k = general_kloosterman_squarefree(q, w1, w2, 0, n, r).unwrap();
                    let rs = ramanujan_sum(pair.a() * r, n) as f64;
                    assert!(
                        (k.re - rs).abs() < 1e-9 && k.im.abs() < 1e-9,
                        "q={q} r={r} n={n}: {k} vs {rs}"
                    );
                }
            }
        }
    }

    #[test]
    fn frame_and_assembled_coefficient() {
        let s = c(1.2, 0.5);
        let f = eisen_coeff_frame(3, s).unwrap();
        let expected = 2.0 * pow_real(PI, s) * pow_real(3.0, s - 0.5) / cgamma(s).unwrap();
        assert!((f - expected).norm() < 1e-13);
        let full = eisen_fourier_coefficient(3, s, 6, 2, 3).unwrap();
        assert!((full - f * eisen_coeff(3, s, 6, 2, 3).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn scattering_examples() {
        assert!(unitarity_residual(c(0.6, 3.0), 1).unwrap() < 1e-9);
        assert!(unitarity_residual(c(0.8, 1.5), 6).unwrap() < 1e-8);
        assert!(
            unitarity_residual(c(0.5, 0.0), 6).is_err()
                || unitarity_residual(c(0.5, 0.0), 6).unwrap() < 1e-8
        );
        let m = scattering_matrix(c(0.7, 2.0), 30).unwrap();
        assert_eq!(m.dim(), 8);
        assert_eq!(m.order, vec![1, 2, 3, 5, 6, 10, 15, 30]);
        let j = m.to_json();
        assert_eq!(j["entries"].as_array().unwrap().len(), 64);
        assert_eq!(j["q"], 30);
    }

    #[test]
    fn scattering_at_symmetric_point_squares_to_identity() {
        // S(1/2) itself: approach along the real axis where φ is finite
        for q in [1u64, 6, 15] {
            let s = c(0.5, 1e-7);
            let m = scattering_matrix(s, q).unwrap();
            let prod = m.mul(&m).unwrap();
            for (i, row) in prod.iter().enumerate() {
                for (j, z) in row.iter().enumerate() {
                    let t = if i == j { 1.0 } else { 0.0 };
                    assert!((z - t).norm() < 1e-6, "q={q} ({i},{j}): {z}");
                }
            }
        }
    }

    #[test]
    fn unitarity_on_random_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for q in (1u64..=15).filter(|&q| mobius(q) != 0) {
            for _ in 0..5 {
                let s = c(rng.gen_range(-0.5..1.5), rng.gen_range(0.5..20.0));
                let res = unitarity_residual(s, q).unwrap();
                assert!(res < 1e-8, "q={q} s={s}: {res}");
            }
        }
    }

    #[test]
    fn normalized_constant_term_is_regular_at_probe_points() {
        for (q, w1, w2) in [
            (1u64, 1u64, 1u64),
            (6, 6, 6),
            (6, 2, 3),
            (15, 1, 15),
            (10, 5, 5),
        ] {
            for s0 in [c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)] {
                let probe = regularity_probe(s0, 1e-5, 1.0, q, w1, w2).unwrap();
                assert!(probe.regular, "q={q} w1={w1} w2={w2} s0={s0}: {probe:?}");
            }
        }
        // without the s(1−s) factor the y^{1−s} term has a genuine pole at s = 1
        let f = |s: Complex64| {
            normalized_constant_term(s, 1.0, 6, 6, 6).unwrap() / (s * (c(1.0, 0.0) - s))
        };
        let m = 64;
        let radius = 1e-3;
        let res: Complex64 = (0..m)
            .map(|k| {
                let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
                f(c(1.0, 0.0) + radius * e) * e * radius
            })
            .sum::<Complex64>()
            / m as f64;
        assert!(res.norm() > 1e-3);
    }

    #[test]
    fn xy_examples() {
        let v = xy_factors(0.7, 1, 1, 1, 1).unwrap();
        assert!((v.y_closed[0] - 1.0).abs() < 1e-15 && (v.y_divisor_sum[0] - 1.0).abs() < 1e-14);
        // c d = 6 with c = 2, d = 3 (a = 2, b = 3), r = 0.5
        let v = xy_factors(0.5, 2, 3, 2, 3).unwrap();
        let dx = c(
            v.x_divisor_sum[0] - v.x_closed[0],
            v.x_divisor_sum[1] - v.x_closed[1],
        )
        .norm();
        assert!(dx < 1e-10, "{v:?}");
        let v = xy_factors(1.3, 6, 1, 6, 1).unwrap();
        let dy = c(
            v.y_divisor_sum[0] - v.y_closed[0],
            v.y_divisor_sum[1] - v.y_closed[1],
        )
        .norm();
        assert!(dy < 1e-10, "{v:?}");
        assert!(xy_factors(0.5, 4, 1, 2, 1).is_err());
        assert!(xy_factors(0.5, 6, 3, 1, 1).is_err());
    }

    #[test]
    fn xy_divisor_and_closed_forms_agree_broadly() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let pairs = [
            (1u64, 1u64),
            (2, 1),
            (1, 3),
            (6, 5),
            (10, 21),
            (30, 7),
            (1, 105),
        ];
        for &(a, b) in &pairs {
            for _ in 0..4 {
                let r = rng.gen_range(-5.0..5.0);
                for cc in divisors(a) {
                    for d in divisors(b) {
                        let v = xy_factors(r, a, b, cc, d).unwrap();
                        let dx = c(
                            v.x_divisor_sum[0] - v.x_closed[0],
                            v.x_divisor_sum[1] - v.x_closed[1],
                        )
                        .norm();
                        assert!(dx < 1e-10, "X a={a} b={b} c={cc} d={d} r={r}");
                        let dy = c(
                            v.y_divisor_sum[0] - v.y_closed[0],
                            v.y_divisor_sum[1] - v.y_closed[1],
                        )
                        .norm();
                        assert!(dy < 1e-10, "Y a={a} b={b} r={r}");
                    }
                }
            }
        }
    }
}
