//! Exact integer and multiplicative-function primitives.
//!
//! Everything here is a pure function of its arguments. Integers up to
//! `2^63` are factorised by trial division up to `2^21` followed by a
//! certified split of the remaining cofactor (deterministic Miller–Rabin
//! plus Pollard–Brent), which is ample for the small levels, moduli and
//! frequencies used throughout the crate.

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit of the trial-division phase of [`factorize`].
const TRIAL_LIMIT: u64 = 1 << 21;

/// Prime factorisation `n = Π p^e` with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    /// The factored integer.
    pub n: u64,
    /// `(prime, exponent)` pairs, primes strictly increasing, exponents ≥ 1.
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// The distinct prime divisors.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Exponent of `p` in `n` (zero if `p ∤ n`).
    pub fn exponent(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// All positive divisors in ascending order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

/// Factorises `1 ≤ n ≤ 2^63`; `n = 1` yields the empty factor list.
///
/// # Panics
/// Panics if `n == 0` or `n > 2^63`.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize: n must be positive");
    assert!(n <= 1 << 63, "factorize: n must not exceed 2^63");
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut m = n;
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0;
        while (*m).is_multiple_of(p) {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut m);
    let mut p = 3u64;
    while p < TRIAL_LIMIT && p * p <= m {
        push(p, &mut m);
        p += 2;
    }
    if m > 1 {
        if p * p > m {
            factors.push((m, 1));
        } else {
            // No factor below 2^21 remains, so m is prime or a product of
            // large primes; split it with Pollard–Brent.
            let mut stack = vec![m];
            let mut large: Vec<u64> = Vec::new();
            while let Some(x) = stack.pop() {
                if is_prime(x) {
                    large.push(x);
                } else {
                    let f = pollard_brent(x);
                    stack.push(f);
                    stack.push(x / f);
                }
            }
            large.sort_unstable();
            for x in large {
                match factors.last_mut() {
                    Some((q, e)) if *q == x => *e += 1,
                    _ => factors.push((x, 1)),
                }
            }
        }
    }
    Factorization { n, factors }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic primality test for 64-bit integers (Miller–Rabin with the
/// first twelve prime bases, which is exact below 3.3·10^24).
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// A non-trivial factor of an odd composite `n` (Brent's cycle variant).
fn pollard_brent(n: u64) -> u64 {
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        let mut power = 1u64;
        let mut lam = 1u64;
        while d == 1 {
            if power == lam {
                x = y;
                power *= 2;
                lam = 0;
            }
            y = f(y);
            lam += 1;
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
    }
    unreachable!("pollard_brent: exhausted increments")
}

/// Values of the basic multiplicative functions at `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicativeData {
    /// Möbius function μ(n).
    pub mu: i8,
    /// Euler's totient φ(n).
    pub phi: u64,
    /// Number of divisors τ(n).
    pub tau: u64,
    /// Divisors of `n` in ascending order.
    pub divisors: Vec<u64>,
}

/// Returns `(μ(n), φ(n), τ(n), divisors)` computed from the factorisation.
pub fn mobius_phi_tau(n: u64) -> MultiplicativeData {
    let f = factorize(n);
    let mu = if f.factors.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.factors.len().is_multiple_of(2) {
        1
    } else {
        -1
    };
    let phi = f
        .factors
        .iter()
        .fold(1u64, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1));
    let tau = f
        .factors
        .iter()
        .fold(1u64, |acc, &(_, e)| acc * (e as u64 + 1));
    MultiplicativeData {
        mu,
        phi,
        tau,
        divisors: f.divisors(),
    }
}

/// Möbius function μ(n).
pub fn mobius(n: u64) -> i8 {
    let f = factorize(n);
    if f.factors.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.factors.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Euler's totient φ(n).
pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .factors
        .iter()
        .fold(1u64, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1))
}

/// Number of divisors τ(n).
pub fn divisor_count(n: u64) -> u64 {
    factorize(n)
        .factors
        .iter()
        .fold(1u64, |acc, &(_, e)| acc * (e as u64 + 1))
}

/// Positive divisors of `n` in ascending order.
pub fn divisors(n: u64) -> Vec<u64> {
    factorize(n).divisors()
}

/// Distinct prime divisors of `n` in ascending order.
pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).primes().collect()
}

/// True iff `n` is square-free (μ(n) ≠ 0).
pub fn is_squarefree(n: u64) -> bool {
    factorize(n).factors.iter().all(|&(_, e)| e == 1)
}

/// Greatest common divisor of two signed integers (non-negative result).
pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Least common multiple of two positive integers.
pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// The `p`-part `n_p = (n, p^∞)` of `n`.
///
/// Fails with [`Error::NotPrime`] when `p` is not prime.
pub fn part_p(n: u64, p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    assert!(n >= 1, "part_p: n must be positive");
    let mut m = n;
    let mut r = 1;
    while m.is_multiple_of(p) {
        m /= p;
        r *= p;
    }
    Ok(r)
}

/// The part `(c, q^∞)` of `c` composed of primes dividing `q`.
pub fn part_supported_on(c: u64, q: u64) -> u64 {
    let mut r = 1;
    let mut m = c;
    for p in prime_divisors(q) {
        while m.is_multiple_of(p) {
            m /= p;
            r *= p;
        }
    }
    r
}

/// The least positive `x ∈ (0, m]` with `a·x ≡ 1 (mod m)`.
///
/// For `m = 1` every integer is an inverse and the answer is `1`.
pub fn mod_inverse(a: i64, m: i64) -> Result<i64> {
    assert!(m >= 1, "mod_inverse: modulus must be positive");
    let eg = a.rem_euclid(m).extended_gcd(&m);
    if eg.gcd != 1 {
        return Err(Error::NotInvertible { a, m });
    }
    let x = eg.x.rem_euclid(m);
    Ok(if x == 0 { m } else { x })
}

/// Ramanujan's sum `c_q(n) = Σ_{δ | (q,n)} δ μ(q/δ)` as an exact integer.
///
/// `n = 0` gives `c_q(0) = φ(q)`.
pub fn ramanujan_sum(q: u64, n: i64) -> i64 {
    assert!(q >= 1, "ramanujan_sum: q must be positive");
    let g = (n.unsigned_abs()).gcd(&q);
    divisors(g)
        .into_iter()
        .map(|d| d as i64 * mobius(q / d) as i64)
        .sum()
}

/// `σ_α(n) = Σ_{d | n} d^α`, optionally restricted to `(d, q) = 1`.
///
/// Powers are taken as `exp(α ln d)`.
pub fn sigma_complex(n: u64, alpha: Complex64, restriction: Option<u64>) -> Complex64 {
    divisors(n)
        .into_iter()
        .filter(|&d| restriction.is_none_or(|q| d.gcd(&q) == 1))
        .map(|d| (alpha * (d as f64).ln()).exp())
        .sum()
}

/// The principal Dirichlet character modulo `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrincipalCharacter {
    /// The modulus.
    pub q: u64,
}

impl PrincipalCharacter {
    /// Creates χ_q.
    pub fn new(q: u64) -> Self {
        assert!(q >= 1, "principal character: modulus must be positive");
        Self { q }
    }

    /// χ_q(n) ∈ {0, 1}.
    pub fn eval(&self, n: i64) -> u8 {
        u8::from(n.unsigned_abs().gcd(&self.q) == 1)
    }
}
