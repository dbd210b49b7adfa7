//! Truncated Dirichlet-series coefficient arithmetic.
//!
//! A [`CoeffSeries`] holds the coefficients `a_1, …, a_N` of a formal
//! Dirichlet series `Σ a_n n^{−s}`. Products of series are Dirichlet
//! convolutions, truncated at `N`; since `(a ∗ b)_n` only involves indices
//! dividing `n`, truncation is exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::factorize;
use crate::error::{Error, Result};

/// Default truncation length.
pub const DEFAULT_N: usize = 2048;

/// Coefficients `a_1, …, a_N` of a truncated Dirichlet series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSeries {
    coeffs: Vec<Complex64>,
}

impl CoeffSeries {
    /// `a_n = f(n)` for `1 ≤ n ≤ N`.
    pub fn from_function<F: FnMut(u64) -> Complex64>(mut f: F, n: usize) -> Self {
        assert!(n >= 1, "series length must be positive");
        Self {
            coeffs: (1..=n as u64).map(&mut f).collect(),
        }
    }

    /// Series from real coefficients.
    pub fn from_real<F: FnMut(u64) -> f64>(mut f: F, n: usize) -> Self {
        Self::from_function(|k| Complex64::new(f(k), 0.0), n)
    }

    /// The multiplicative identity `ε = [1, 0, 0, …]`.
    pub fn unit(n: usize) -> Self {
        Self::from_real(|k| f64::from(u8::from(k == 1)), n)
    }

    /// `ζ(s + α)`, i.e. `a_n = n^{−α}`.
    pub fn zeta_shift(alpha: Complex64, n: usize) -> Self {
        Self::from_function(|k| (-alpha * (k as f64).ln()).exp(), n)
    }

    /// Truncation length `N`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// Always false: a series has at least one coefficient.
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient `a_n`, `1 ≤ n ≤ N`.
    pub fn get(&self, n: usize) -> Complex64 {
        self.coeffs[n - 1]
    }

    /// All coefficients, index `0` holding `a_1`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Dirichlet convolution `(a ∗ b)_n = Σ_{d | n} a_d b_{n/d}`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        let n = self.len();
        if other.len() != n {
            return Err(Error::LengthMismatch(n, other.len()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for d in 1..=n {
            let ad = self.coeffs[d - 1];
            if ad == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 1..=n / d {
                out[d * k - 1] += ad * other.coeffs[k - 1];
            }
        }
        Ok(Self { coeffs: out })
    }

    /// Convolution of a list of series (the unit for an empty list).
    pub fn product(factors: &[Self], n: usize) -> Result<Self> {
        factors
            .iter()
            .try_fold(Self::unit(n), |acc, f| acc.convolve(f))
    }

    /// Coefficient-wise scaling.
    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&a| a * k).collect(),
        }
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.len() != self.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Coefficient-wise product with `f(n)` (twisting by an arithmetic
    /// function).
    pub fn twist<F: FnMut(u64) -> Complex64>(&self, mut f: F) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &a)| a * f(i as u64 + 1))
                .collect(),
        }
    }

    /// The series of `F(s + α)`: `a_n ↦ a_n n^{−α}`.
    pub fn shift(&self, alpha: Complex64) -> Self {
        self.twist(|k| (-alpha * (k as f64).ln()).exp())
    }

    /// Multiplicative expansion `a_n = Π_{p^e ‖ n} local(p, e)`.
    ///
    /// `local(p, 0)` is taken to be `1`.
    pub fn euler_product<F: FnMut(u64, u32) -> Complex64>(mut local: F, n: usize) -> Self {
        Self::from_function(
            |k| {
                factorize(k)
                    .factors
                    .iter()
                    .map(|&(p, e)| local(p, e))
                    .fold(Complex64::new(1.0, 0.0), |acc, x| acc * x)
            },
            n,
        )
    }

    /// Dirichlet inverse (requires `a_1 ≠ 0`).
    pub fn inverse(&self) -> Result<Self> {
        let a1 = self.coeffs[0];
        if a1.norm() == 0.0 {
            return Err(Error::InvalidParameters(
                "a_1 = 0 has no Dirichlet inverse".into(),
            ));
        }
        let n = self.len();
        let mut inv = vec![Complex64::new(0.0, 0.0); n];
        inv[0] = 1.0 / a1;
        for k in 2..=n {
            let mut s = Complex64::new(0.0, 0.0);
            let mut d = 1;
            while d * d <= k {
                if k % d == 0 {
                    let e = k / d;
                    if d > 1 {
                        s += self.coeffs[d - 1] * inv[e - 1];
                    }
                    if e != d && e > 1 {
                        s += self.coeffs[e - 1] * inv[d - 1];
                    }
                }
                d += 1;
            }
            inv[k - 1] = -s / a1;
        }
        Ok(Self { coeffs: inv })
    }
}

/// Outcome of a coefficient-wise comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `max_n |a_n − b_n|`.
    pub max_diff: f64,
    /// Index attaining the maximum.
    pub argmax: usize,
    /// `max_diff ≤ tol`.
    pub pass: bool,
}

/// Compares two series coefficient by coefficient.
pub fn compare(a: &CoeffSeries, b: &CoeffSeries, tol: f64) -> Result<Comparison> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let (mut max_diff, mut argmax) = (0.0f64, 1usize);
    for (i, (x, y)) in a.coeffs.iter().zip(&b.coeffs).enumerate() {
        let d = (x - y).norm();
        // NaN must never compare as a pass.
        if d > max_diff || d.is_nan() {
            max_diff = if d.is_nan() { f64::INFINITY } else { d };
            argmax = i + 1;
        }
    }
    Ok(Comparison {
        max_diff,
        argmax,
        pass: max_diff <= tol,
    })
}
