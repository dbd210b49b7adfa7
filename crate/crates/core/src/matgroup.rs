//! Cusps, scaling matrices, Bruhat cells and double cosets of Γ₀(q).
//!
//! Fractions are passed as pairs `(x, y)` meaning `x/y`, with the cusp at
//! infinity encoded as `(1, 0)`.
//!
//! A cusp `x/y` (in lowest terms) of Γ₀(q) is classified by the pair
//! `(w, ρ)` where `w = (y, q)` and `ρ ≡ x·(y/w) (mod (w, q/w))`; both are
//! invariant under the action of Γ₀(q). The canonical representative of
//! the class is `u/w` with `u` the least positive integer coprime to `w` in
//! the residue class `ρ`.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, euler_phi, mod_inverse};
use crate::error::{Error, Result};

/// A 2×2 integer matrix of determinant one, stored modulo ±1.
///
/// The stored sign is normalised so that `c > 0`, or `c = 0` and `d > 0`;
/// derived equality is therefore equality in PSL(2, ℤ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMat2 {
    /// Builds a matrix, checking `ad − bc = 1` and normalising the sign.
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a as i128 * d as i128 - b as i128 * c as i128 != 1 {
            return Err(Error::InvalidParameters(format!(
                "determinant of (({a},{b}),({c},{d})) is not 1"
            )));
        }
        Ok(Self::normalized(a, b, c, d))
    }

    fn normalized(a: i64, b: i64, c: i64, d: i64) -> Self {
        if c < 0 || (c == 0 && d < 0) {
            Self {
                a: -a,
                b: -b,
                c: -c,
                d: -d,
            }
        } else {
            Self { a, b, c, d }
        }
    }

    /// The identity matrix.
    pub fn identity() -> Self {
        Self {
            a: 1,
            b: 0,
            c: 0,
            d: 1,
        }
    }

    /// The translation `S^k = ((1, k), (0, 1))`.
    pub fn translation(k: i64) -> Self {
        Self {
            a: 1,
            b: k,
            c: 0,
            d: 1,
        }
    }

    /// Determinant (always 1 for a constructed value).
    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    /// The inverse `((d, −b), (−c, a))`.
    pub fn inverse(&self) -> Self {
        Self::normalized(self.d, -self.b, -self.c, self.a)
    }

    /// Matrix product `self · rhs`.
    ///
    /// # Panics
    /// Panics if an entry overflows `i64`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let m = |x: i64, y: i64, z: i64, w: i64| -> i64 {
            let v = x as i128 * y as i128 + z as i128 * w as i128;
            i64::try_from(v).expect("IntMat2::mul: entry overflow")
        };
        Self::normalized(
            m(self.a, rhs.a, self.b, rhs.c),
            m(self.a, rhs.b, self.b, rhs.d),
            m(self.c, rhs.a, self.d, rhs.c),
            m(self.c, rhs.b, self.d, rhs.d),
        )
    }

    /// Lower-left entry of `self · rhs`, computed without normalisation.
    pub fn lower_left_of_product(&self, rhs: &Self) -> i128 {
        self.c as i128 * rhs.a as i128 + self.d as i128 * rhs.c as i128
    }

    /// Action on a primitive column vector `(x, y)`, returned in lowest
    /// terms with the sign convention `y > 0`, or `y = 0` and `x = 1`.
    pub fn act(&self, x: i64, y: i64) -> (i64, i64) {
        normalize_fraction(self.a * x + self.b * y, self.c * x + self.d * y)
    }
}

/// Puts `x/y` into lowest terms with `y ≥ 0` (and `∞ = 1/0`).
pub fn normalize_fraction(x: i64, y: i64) -> (i64, i64) {
    let g = x.gcd(&y);
    assert!(g != 0, "0/0 is not a cusp");
    let (x, y) = (x / g, y / g);
    if y < 0 || (y == 0 && x < 0) {
        (-x, -y)
    } else {
        (x, y)
    }
}

/// True iff `mat ∈ Γ₀(q)`, i.e. its lower-left entry is divisible by `q`.
pub fn is_gamma0(mat: &IntMat2, q: u64) -> bool {
    mat.c.rem_euclid(q as i64) == 0
}

/// A canonical representative `u/w` of a cusp class of Γ₀(q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cusp {
    /// The level.
    pub q: u64,
    /// Denominator, a positive divisor of `q`.
    pub w: u64,
    /// Numerator: least positive integer coprime to `w` in its class
    /// modulo `(w, q/w)`.
    pub u: u64,
}

impl Cusp {
    /// `v = q/w`.
    pub fn v(&self) -> u64 {
        self.q / self.w
    }

    /// The class modulus `(w, q/w)`.
    pub fn class_modulus(&self) -> u64 {
        self.w.gcd(&self.v())
    }

    /// The cusp width `v* = v/(v, w)`.
    pub fn width(&self) -> u64 {
        self.v() / self.class_modulus()
    }
}

impl std::fmt::Display for Cusp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.u, self.w)
    }
}

/// Least positive `u` coprime to `w` with `u ≡ rho (mod g)`, where `g | w`
/// and `(rho, g) = 1`.
fn least_unit_in_class(rho: i64, g: u64, w: u64) -> u64 {
    let r = rho.rem_euclid(g as i64) as u64;
    let start = if r == 0 { g } else { r };
    (0..)
        .map(|k| start + k * g)
        .find(|u| u.gcd(&w) == 1)
        .expect("a unit exists in every primitive class")
}

/// All canonical cusp representatives of Γ₀(q), ordered by `(w, u)`.
pub fn enumerate_cusps(q: u64) -> Vec<Cusp> {
    assert!(q >= 1, "enumerate_cusps: level must be positive");
    let mut out = Vec::new();
    for w in divisors(q) {
        let g = w.gcd(&(q / w));
        for rho in 1..=g {
            if rho.gcd(&g) == 1 {
                out.push(Cusp {
                    q,
                    w,
                    u: least_unit_in_class(rho as i64, g, w),
                });
            }
        }
    }
    out.sort();
    out
}

/// Number of cusp classes, `Σ_{w | q} φ((w, q/w))`.
pub fn cusp_count(q: u64) -> u64 {
    divisors(q)
        .into_iter()
        .map(|w| euler_phi(w.gcd(&(q / w))))
        .sum()
}

/// The Γ₀(q)-invariant `(w, ρ mod (w, q/w))` of the cusp `x/y`.
fn cusp_invariant(x: i64, y: i64, q: u64) -> (u64, u64) {
    let (x, y) = normalize_fraction(x, y);
    let w = (y.unsigned_abs()).gcd(&q);
    let g = w.gcd(&(q / w));
    let rho = (x as i128 * (y / w as i64) as i128).rem_euclid(g as i128) as u64;
    (w, rho)
}

/// True iff `x1/y1` and `x2/y2` lie in the same Γ₀(q)-orbit.
pub fn cusp_equivalent(p1: (i64, i64), p2: (i64, i64), q: u64) -> bool {
    cusp_invariant(p1.0, p1.1, q) == cusp_invariant(p2.0, p2.1, q)
}

/// The canonical representative of the class of `x/y`.
pub fn canonicalize_cusp(p: (i64, i64), q: u64) -> Cusp {
    let (w, rho) = cusp_invariant(p.0, p.1, q);
    let g = w.gcd(&(q / w));
    Cusp {
        q,
        w,
        u: least_unit_in_class(rho as i64, g, w),
    }
}

/// Choice of scaling map at a cusp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// `ϖ_{u/w} τ_{v*}`: scaling by the width `v*`.
    Plain,
    /// `ϖ_{1/w} S^{−w̄} τ_v` with `w w̄ ≡ 1 (mod v)`; requires `(v, w) = 1`.
    Shifted,
}

/// Scaling data attached to a cusp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingData {
    /// `ϖ_{u/w} = ((u, (uū−1)/w), (w, ū))`, mapping ∞ to `u/w`.
    pub pi_matrix: IntMat2,
    /// The width `v* = v/(v, w)`.
    pub width: u64,
    /// The shift `w̄` of the shifted convention, if used.
    pub shift: Option<i64>,
}

impl ScalingData {
    /// The integral part of the scaling map: `ϖ` for the plain convention
    /// and `ϖ S^{−w̄}` for the shifted one. The real scaling map is this
    /// matrix followed by the diagonal dilation by `√width`.
    pub fn integral_matrix(&self) -> IntMat2 {
        match self.shift {
            None => self.pi_matrix,
            Some(wb) => self.pi_matrix.mul(&IntMat2::translation(-wb)),
        }
    }

    /// `M S^{width} M⁻¹` for the integral matrix `M`: the generator of the
    /// stabiliser of the cusp.
    pub fn stabilizer_generator(&self) -> IntMat2 {
        let m = self.integral_matrix();
        m.mul(&IntMat2::translation(self.width as i64))
            .mul(&m.inverse())
    }
}

/// `ϖ_{u/w}` for any `u` coprime to `w`, using the least positive inverse
/// `ū ∈ (0, w]`.
pub fn pi_matrix(u: i64, w: u64) -> Result<IntMat2> {
    let ubar = mod_inverse(u, w as i64)?;
    IntMat2::new(u, (u * ubar - 1) / w as i64, w as i64, ubar)
}

/// Scaling data of a cusp under the requested convention.
///
/// The shifted convention uses the least positive `w̄` with
/// `w w̄ ≡ 1 (mod v)`; see [`scaling_data_with_shift`] for other choices.
pub fn scaling_data(cusp: &Cusp, convention: Convention) -> Result<ScalingData> {
    match convention {
        Convention::Plain => Ok(ScalingData {
            pi_matrix: pi_matrix(cusp.u as i64, cusp.w)?,
            width: cusp.width(),
            shift: None,
        }),
        Convention::Shifted => {
            let v = cusp.v();
            if v.gcd(&cusp.w) != 1 {
                return Err(Error::ConventionUnavailable(format!(
                    "shifted scaling at {cusp} needs (v, w) = 1 but q = {}·{}",
                    v, cusp.w
                )));
            }
            let wbar = mod_inverse(cusp.w as i64, v as i64)?;
            scaling_data_with_shift(cusp, wbar)
        }
    }
}

/// Shifted scaling data with an explicit shift `w̄` (any integer with
/// `w w̄ ≡ 1 (mod v)`).
pub fn scaling_data_with_shift(cusp: &Cusp, wbar: i64) -> Result<ScalingData> {
    let v = cusp.v();
    if v.gcd(&cusp.w) != 1 {
        return Err(Error::ConventionUnavailable(format!(
            "shifted scaling at {cusp} needs (v, w) = 1"
        )));
    }
    if (cusp.w as i64 * wbar - 1).rem_euclid(v as i64) != 0 {
        return Err(Error::InvalidParameters(format!(
            "{wbar} is not an inverse of {} modulo {v}",
            cusp.w
        )));
    }
    Ok(ScalingData {
        pi_matrix: pi_matrix(cusp.u as i64, cusp.w)?,
        width: v,
        shift: Some(wbar),
    })
}

/// The Bruhat-cell matrix `B[a, d; c] = ((a, (ad−1)/c), (c, d))`.
pub fn bruhat(a: i64, d: i64, c: i64) -> Result<IntMat2> {
    if c < 1 {
        return Err(Error::InvalidParameters(format!(
            "Bruhat cell needs c ≥ 1, got {c}"
        )));
    }
    let ad1 = a as i128 * d as i128 - 1;
    if ad1.rem_euclid(c as i128) != 0 {
        return Err(Error::NotInCell { a, d, c });
    }
    let b = i64::try_from(ad1 / c as i128).expect("bruhat: entry overflow");
    IntMat2::new(a, b, c, d)
}

/// A coprime splitting `q = v1 w1 = v2 w2` and its four gcd moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Splitting {
    pub q: u64,
    pub w1: u64,
    pub w2: u64,
    pub v1: u64,
    pub v2: u64,
}

impl Splitting {
    /// Validates `w_i | q` and `(v_i, w_i) = 1`.
    pub fn new(q: u64, w1: u64, w2: u64) -> Result<Self> {
        if w1 == 0 || w2 == 0 || !q.is_multiple_of(w1) || !q.is_multiple_of(w2) {
            return Err(Error::InvalidParameters(format!(
                "{w1} and {w2} must divide {q}"
            )));
        }
        let (v1, v2) = (q / w1, q / w2);
        if v1.gcd(&w1) != 1 || v2.gcd(&w2) != 1 {
            return Err(Error::ConventionUnavailable(format!(
                "splittings of {q} at {w1}, {w2} are not coprime"
            )));
        }
        Ok(Self { q, w1, w2, v1, v2 })
    }

    /// `((v1,w2), (v1,v2), (w1,w2), (w1,v2))`: the divisors of the entries
    /// `a, b, c, d` in the conjugated coset.
    pub fn pattern_moduli(&self) -> [u64; 4] {
        [
            self.v1.gcd(&self.w2),
            self.v1.gcd(&self.v2),
            self.w1.gcd(&self.w2),
            self.w1.gcd(&self.v2),
        ]
    }

    fn shifted(&self, w: u64) -> Result<IntMat2> {
        let cusp = Cusp { q: self.q, w, u: 1 };
        Ok(scaling_data(&cusp, Convention::Shifted)?.integral_matrix())
    }

    /// `S^{w̄1} ϖ_{1/w1}⁻¹ γ ϖ_{1/w2} S^{−w̄2}`.
    pub fn conjugate(&self, gamma: &IntMat2) -> Result<IntMat2> {
        let m1 = self.shifted(self.w1)?;
        let m2 = self.shifted(self.w2)?;
        Ok(m1.inverse().mul(gamma).mul(&m2))
    }

    /// The inverse map `ϖ_{1/w1} S^{−w̄1} M S^{w̄2} ϖ_{1/w2}⁻¹`.
    pub fn unconjugate(&self, mat: &IntMat2) -> Result<IntMat2> {
        let m1 = self.shifted(self.w1)?;
        let m2 = self.shifted(self.w2)?;
        Ok(m1.mul(mat).mul(&m2.inverse()))
    }
}

/// True iff `mat` has the divisibility pattern
/// `(v1,w2) | a`, `(v1,v2) | b`, `(w1,w2) | c`, `(w1,v2) | d`.
pub fn double_coset_pattern(q: u64, w1: u64, w2: u64, mat: &IntMat2) -> Result<bool> {
    let s = Splitting::new(q, w1, w2)?;
    let [ma, mb, mc, md] = s.pattern_moduli();
    Ok(mat.a.rem_euclid(ma as i64) == 0
        && mat.b.rem_euclid(mb as i64) == 0
        && mat.c.rem_euclid(mc as i64) == 0
        && mat.d.rem_euclid(md as i64) == 0)
}
