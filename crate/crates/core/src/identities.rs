//! Registry of named identity verifications.
//!
//! Every entry pairs a closed form implemented elsewhere in the crate (or a
//! stated Euler-product factorisation) with an independent evaluation —
//! brute-force enumeration, direct summation, or coefficient arithmetic in
//! the Dirichlet algebra — and returns a [`VerificationReport`].
//!
//! Multi-variable Dirichlet-series identities are checked at the coefficient
//! level: auxiliary complex variables are fixed at seeded random points,
//! every variable is shifted by the same formal `s`, and the resulting
//! single-variable coefficient arrays (length `N`) are compared.
//!
//! Parameters arrive as a JSON object whose values may be numbers, strings
//! (`"2.5+1i"`, `"1,2,5"`) or arrays (`[2.5, 1]` for a complex number).
//! Unknown keys and unparsable values are rejected with
//! [`Error::InvalidParameters`]; every key has a documented default.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::arith::{
    divisors, euler_phi, factorize, gcd, is_squarefree, mobius, mod_inverse, part_p,
    prime_divisors, ramanujan_sum, sigma_complex,
};
use crate::dirichlet::{compare, CoeffSeries};
use crate::eisenstein::{eisen_coeff, eisen_phi, unitarity_residual, xy_factors, CuspPair};
use crate::error::{Error, Result};
use crate::kloosterman::{
    general_kloosterman_bruteforce, general_kloosterman_squarefree, kloosterman_factorize,
    ordinary_kloosterman, GenKloostermanSpec,
};
use crate::matgroup::{
    double_coset_pattern, enumerate_cusps, is_gamma0, Convention, Cusp, IntMat2, Splitting,
};
use crate::specfun::{cgamma, hurwitz_zeta, rgamma, unit_interval_lift, zeta};
use crate::transforms::{
    g_bracket, g_bracket_at_half, g_bracket_combined, ghat, hhat, moment_quadrature, phi_pm,
    psi_kernel, psi_minus_above_one, FourTuple, PhiMethod, PsiMethod, Sign, WeightSpec,
};

/// Parameters of a verification, as a JSON object.
pub type Params = Map<String, Value>;

/// Value type of a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Int,
    UInt,
    Real,
    Complex,
    IntList,
    UIntList,
    RealList,
    ComplexList,
    Text,
}

/// One entry of a parameter schema. An empty default marks an optional
/// parameter that is absent unless given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: &'static str,
    pub doc: &'static str,
}

/// A registered identity: id, the statement checked, and its parameter schema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityInfo {
    pub id: &'static str,
    pub statement: &'static str,
    pub params: &'static [ParamSpec],
}

/// Outcome of one verification. Serialises with the stable key order
/// `id, params, N, tol, max_abs_error, pass, seed, wall_ms, notes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    /// The fully resolved parameters (defaults filled in).
    pub params: Value,
    /// Truncation length, where one applies.
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub tol: f64,
    pub max_abs_error: f64,
    /// `max_abs_error ≤ tol`.
    pub pass: bool,
    /// Seed of the random draws, where the identity uses any.
    pub seed: Option<u64>,
    pub wall_ms: u64,
    /// Diagnostics: the worst comparison and any recorded discrepancies.
    pub notes: Vec<String>,
}

const fn p(
    name: &'static str,
    kind: ParamKind,
    default: &'static str,
    doc: &'static str,
) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        default,
        doc,
    }
}

use ParamKind::*;

const SEED: ParamSpec = p("seed", UInt, "20240601", "seed of the ChaCha8 generator");
const DRAWS: ParamSpec = p("draws", UInt, "3", "number of random parameter draws");
const DRAW: ParamSpec = p("draw", UInt, "", "run only this draw index (0-based)");
const TRUNC: ParamSpec = p(
    "N",
    UInt,
    "2048",
    "number of Dirichlet coefficients compared",
);

static REGISTRY: &[IdentityInfo] = &[
    IdentityInfo {
        id: "HURWITZ_SUM",
        statement: "Σ_{h mod q, (h,q)=1} ζ(s, ⟨hm/q⟩) = ζ(s) Σ_{δ|q} δ μ(q/δ) (δ/(δ,m))^{s−1}, with ⟨x⟩ the lift of x to (0,1]",
        params: &[
            p("q", UInt, "12", "modulus"),
            p("m", Int, "5", "non-zero integer"),
            p("s", Complex, "2.5+1i", "point s ≠ 1"),
            p("tol", Real, "1e-7", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "J0_EULER",
        statement: "the diagonal part J₀ of the dissected quadruple sum factors as c^{−z}d^{−w}ζ(w+z)ζ(u+z)ζ(v+w) times an Euler product, and its total contribution is a^{−v}b^{−u}ζ(u+v)ζ(u+z)ζ(w+v)ζ(w+z)/ζ(u+v+w+z) times two divisor braces",
        params: &[
            p("a", UInt, "6", "first parameter, coprime to b"),
            p("b", UInt, "35", "second parameter, coprime to a"),
            p("cd", UInt, "", "shortcut: a = cd, b = 1"),
            TRUNC,
            DRAWS,
            DRAW,
            SEED,
            p("tol", Real, "1e-8", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "GCD_SUM",
        statement: "Σ_f (f,δ)^α f^{−s} = ζ(s) Σ_{λ|δ} λ^{α−s} Π_{p|λ}(1−p^{−α}); the Möbius-twisted analogue over δ | n; and the Euler factorisation of the resulting series in the remaining variable",
        params: &[
            p("c", UInt, "12", "the integer c"),
            p("d", UInt, "5", "the integer d, coprime to c"),
            p("delta", UInt, "12", "the modulus δ of the first check"),
            TRUNC,
            DRAWS,
            DRAW,
            SEED,
            p("tol", Real, "1e-8", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "RAMANUJAN_CONV",
        statement: "Euler factorisations of Σ_n σ_{−2ir}(n;χ_q) Π(…) n^{−s} and of Σ_n σ_{2ir}(n;χ_q) σ_α(n) Π(…) n^{−s} (the latter via Ramanujan's formula for Σ σ_a σ_b n^{−s})",
        params: &[
            p("q", UInt, "30", "square-free modulus"),
            p("c", UInt, "6", "divisor c of q"),
            p("c1", UInt, "10", "divisor c₁ of q"),
            TRUNC,
            DRAWS,
            DRAW,
            SEED,
            p("tol", Real, "1e-8", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "ZS_EULER",
        statement: "Σ_f τ(f;χ_cd) f^{−s−1} Π_{p|(c,f)}(τ(f_p)(1−1/p) − 1) = ζ(s+1)² Π_{p|d}(1−p^{−s−1}) Π_{p|c}(1 − p^{−s−1} − 2p^{−s−2} + p^{−2s−2} + p^{−2s−3})",
        params: &[
            p("c", UInt, "6", "square-free c"),
            p("d", UInt, "5", "square-free d coprime to c"),
            TRUNC,
            DRAWS,
            SEED,
            p("tol", Real, "1e-8", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "EISEN_EN",
        statement: "Σ_{(r,B)=1} c_{Ar}(n) ((w1,w2) r √(v1v2))^{−2s} = σ_{1−2s}(n,χ_q)/L(2s,χ_q) ((v1,v2)/[v1,v2])^s Π_{p|A}(σ_{1−2s}(n_p)(1−p^{−2s}) − 1)",
        params: &[
            p("q", UInt, "30", "square-free level"),
            p("form", Text, "bracket", "bracket (coefficient level in t = 2s) or series (truncated direct sum)"),
            p("n", IntList, "12,-7", "Fourier indices (non-zero)"),
            p("s", Complex, "1.8+0.5i", "point for form=series, Re s ≥ 1.6"),
            TRUNC,
            DRAWS,
            SEED,
            p("tol", Real, "", "tolerance (default 1e-8 for bracket, 1e-6 for series)"),
        ],
    },
    IdentityInfo {
        id: "EISEN_PHI",
        statement: "φ(s; w1, w2) = √π Γ(s−1/2)/Γ(s) Σ_{(r,B)=1} φ(Ar) ((w1,w2) r √(v1v2))^{−2s}",
        params: &[
            p("q", UInt, "6", "square-free level"),
            p("s", ComplexList, "1.7,2,2+1i", "points with Re s ≥ 1.6"),
            p("tol", Real, "1e-6", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "XY_CLOSED",
        statement: "at u=v=w=z=1/2, ξ=ir the divisor-sum definitions of X_{cd} and Y_{ab} equal their Euler-product closed forms",
        params: &[
            p("cd", UIntList, "1,6,10,15", "square-free values of cd (all factorisations c·d)"),
            p("ab", UIntList, "1,6", "square-free values of ab (all factorisations a·b)"),
            p("r", RealList, "0.5,1.3", "spectral parameters"),
            p("tol", Real, "1e-10", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "KLOOSTERMAN_CLOSED",
        statement: "for square-free q the shifted-convention sum S(m,n; (w1,w2)r√(v1v2); 1/w1, 1/w2) equals the product of a Ramanujan-type local sum and an ordinary Kloosterman sum",
        params: &[
            p("q", UInt, "6", "square-free level"),
            p("m", IntList, "1,2,-1,-2", "first frequencies"),
            p("n", IntList, "1,2,-1,-2", "second frequencies"),
            p("rmax", UInt, "5", "largest free modulus r"),
            p("tol", Real, "1e-8", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "KLOOSTERMAN_SPECIAL",
        statement: "for q = cd with (c,d)=1 the shifted sum between the cusps 1/q and 1/c at modulus index cr, (r,d)=1, equals S(m, d̄n; cr)",
        params: &[
            p("q", UInt, "30", "square-free level"),
            p("m", IntList, "1,2,-3", "first frequencies"),
            p("n", IntList, "1,-1,5", "second frequencies"),
            p("rmax", UInt, "6", "largest r"),
            p("tol", Real, "1e-8", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "KLOOSTERMAN_FACT",
        statement: "the plain-convention sum at modulus index c factors as a local sum at c₀ = (c, q^∞) times an ordinary sum at c/c₀",
        params: &[
            p("q", UInt, "12", "level"),
            p("cmax", UInt, "36", "largest modulus index"),
            p("m", IntList, "1,-2", "first frequencies"),
            p("n", IntList, "1,3", "second frequencies"),
            p("tol", Real, "1e-8", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "DOUBLE_COSET",
        statement: "conjugation by the shifted scaling matrices maps Γ₀(q) onto the matrices with (v1,w2)|a, (v1,v2)|b, (w1,w2)|c, (w1,v2)|d (both inclusions, bounded enumeration; error = number of violations)",
        params: &[
            p("q", UInt, "30", "square-free level"),
            p("bound", UInt, "40", "entry bound for Γ₀(q) elements"),
            p("pattern_bound", UInt, "20", "entry bound for pattern matrices"),
            p("tol", Real, "0", "tolerance on the violation count"),
        ],
    },
    IdentityInfo {
        id: "SCATTER_UNITARY",
        statement: "the scattering matrix satisfies Φ(s)Φ(1−s) = I",
        params: &[
            p("q", UInt, "15", "square-free level"),
            p("points", UInt, "5", "number of random points"),
            SEED,
            p("tol", Real, "1e-8", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "TRANSFORM_REL",
        statement: "Φ± computed from their contour integrals equal their expressions through Ξ(±ξ); [g]± = ½(2π)^{1+u−w}Φ±(ir); at p_{1/2}, [g]± follow from Ξ(±ir)",
        params: &[
            p("T", Real, "1", "Gaussian width"),
            p("tuple", ComplexList, "0.55,0.5,0.45,0.52", "the four exponents u, v, w, z"),
            p("r", Real, "0.4", "spectral parameter (ξ = ir)"),
            p("tol", Real, "1e-7", "tolerance (relative to max(1, |value|))"),
        ],
    },
    IdentityInfo {
        id: "MOMENT_REARRANGE",
        statement: "∫|ζ(1/2+it)|⁴|A(1/2+it)|² g(t) dt equals the rearranged sum of off-diagonal integrals",
        params: &[
            p("T", Real, "3", "Gaussian width"),
            p("coeffs", ComplexList, "1,1", "coefficients α₁, α₂, … of A"),
            p("height", Real, "400", "height cap"),
            p("tol", Real, "1e-6", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "DISSECT_J",
        statement: "the quadruple sum I(u,v,w,z; g; b/a) equals ζ(u+v)a^{−v}b^{−u} Σ_{c|a,d|b} c^v d^u J(d/c), with J = J₀ + J₊ + J₋ and J₀ in closed form",
        params: &[
            p("a", UInt, "2", "a, coprime to b"),
            p("b", UInt, "3", "b"),
            p("T", Real, "1", "Gaussian width"),
            p("tuple", ComplexList, "6+0.5i,6.2-0.3i,5.8+0.2i,6.1", "exponents u, v, w, z (Re > 5)"),
            p("N", UInt, "30", "truncation of each of k, l, m, n"),
            p("tol", Real, "1e-6", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "HAT_H_HALF",
        statement: "ĥ(1/2) = 0 for the even weight h",
        params: &[
            p("K", Real, "30", "centre of the weight"),
            p("G", Real, "5", "width of the weight"),
            p("tol", Real, "1e-9", "tolerance"),
        ],
    },
    IdentityInfo {
        id: "PSI_AT_ONE",
        statement: "the closed representation of Ψ₋(1; h) agrees with the limit x → 1⁺ of the x > 1 representation and with the Mellin–Barnes integral",
        params: &[
            p("K", Real, "3", "centre of the weight"),
            p("G", Real, "1", "width of the weight"),
            p("eps", Real, "1e-8", "offset x − 1 of the limit"),
            p("tol", Real, "1e-5", "tolerance"),
        ],
    },
];

/// The registered identities, in a fixed order.
pub fn list_identities() -> &'static [IdentityInfo] {
    REGISTRY
}

/// Runs the verification `id` with the given parameters.
pub fn verify(id: &str, params: &Params) -> Result<VerificationReport> {
    let info = REGISTRY
        .iter()
        .find(|i| i.id == id)
        .ok_or_else(|| Error::UnknownIdentity(id.to_string()))?;
    let mut args = Args::new(info, params)?;
    let start = Instant::now();
    let out = match info.id {
        "HURWITZ_SUM" => hurwitz_sum(&mut args),
        "J0_EULER" => j0_euler(&mut args),
        "GCD_SUM" => gcd_sum(&mut args),
        "RAMANUJAN_CONV" => ramanujan_conv(&mut args),
        "ZS_EULER" => zs_euler(&mut args),
        "EISEN_EN" => eisen_en(&mut args),
        "EISEN_PHI" => eisen_phi_check(&mut args),
        "XY_CLOSED" => xy_closed(&mut args),
        "KLOOSTERMAN_CLOSED" => kloosterman_closed(&mut args),
        "KLOOSTERMAN_SPECIAL" => kloosterman_special(&mut args),
        "KLOOSTERMAN_FACT" => kloosterman_fact(&mut args),
        "DOUBLE_COSET" => double_coset(&mut args),
        "SCATTER_UNITARY" => scatter_unitary(&mut args),
        "TRANSFORM_REL" => transform_rel(&mut args),
        "MOMENT_REARRANGE" => moment_rearrange(&mut args),
        "DISSECT_J" => dissect_j(&mut args),
        "HAT_H_HALF" => hat_h_half(&mut args),
        "PSI_AT_ONE" => psi_at_one(&mut args),
        other => unreachable!("identity {other} registered without an implementation"),
    }?;
    let wall_ms = start.elapsed().as_millis() as u64;
    let err = if out.tally.max.is_nan() {
        f64::INFINITY
    } else {
        out.tally.max
    };
    let mut notes = Vec::new();
    if let Some(w) = &out.tally.worst {
        notes.push(format!("largest error at {w}"));
    }
    notes.extend(out.notes);
    Ok(VerificationReport {
        id: info.id.to_string(),
        params: Value::Object(args.resolved),
        n: out.n,
        tol: out.tol,
        max_abs_error: err,
        pass: err <= out.tol,
        seed: out.seed,
        wall_ms,
        notes,
    })
}

// ---------------------------------------------------------------------------
// parameter handling

#[derive(Debug, Clone, PartialEq)]
enum Typed {
    U(u64),
    I(i64),
    R(f64),
    C(Complex64),
    UL(Vec<u64>),
    IL(Vec<i64>),
    RL(Vec<f64>),
    CL(Vec<Complex64>),
    T(String),
}

/// Parses `"a"`, `"a+bi"`, `"a-bi"`, `"bi"`, `"a+i"`, `"a,b"` (also `j` for `i`).
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    if let Some((re, im)) = s.split_once(',') {
        return Some(Complex64::new(re.parse().ok()?, im.parse().ok()?));
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return Some(Complex64::new(s.parse().ok()?, 0.0));
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse().ok()?,
    };
    Some(Complex64::new(re.parse().ok()?, im))
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn parse_typed(kind: ParamKind, v: &Value) -> Option<Typed> {
    let items = |v: &Value| -> Option<Vec<Value>> {
        match v {
            Value::Array(a) => Some(a.clone()),
            Value::String(s) => {
                let sep = if s.contains(';') { ';' } else { ',' };
                Some(
                    s.split(sep)
                        .filter(|t| !t.trim().is_empty())
                        .map(|t| Value::String(t.trim().to_string()))
                        .collect(),
                )
            }
            Value::Number(_) => Some(vec![v.clone()]),
            _ => None,
        }
    };
    let complex = |v: &Value| -> Option<Complex64> {
        match v {
            Value::Array(a) if a.len() == 2 => Some(Complex64::new(a[0].as_f64()?, a[1].as_f64()?)),
            other => parse_complex(&scalar_text(other)?),
        }
    };
    let uint = |v: &Value| scalar_text(v)?.parse::<u64>().ok();
    let int = |v: &Value| scalar_text(v)?.parse::<i64>().ok();
    let real = |v: &Value| {
        scalar_text(v)?
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
    };
    Some(match kind {
        UInt => Typed::U(uint(v)?),
        Int => Typed::I(int(v)?),
        Real => Typed::R(real(v)?),
        Complex => Typed::C(complex(v)?),
        UIntList => Typed::UL(items(v)?.iter().map(uint).collect::<Option<_>>()?),
        IntList => Typed::IL(items(v)?.iter().map(int).collect::<Option<_>>()?),
        RealList => Typed::RL(items(v)?.iter().map(real).collect::<Option<_>>()?),
        ComplexList => Typed::CL(items(v)?.iter().map(complex).collect::<Option<_>>()?),
        Text => Typed::T(scalar_text(v)?),
    })
}

fn typed_json(t: &Typed) -> Value {
    let cj = |z: &Complex64| json!([z.re, z.im]);
    match t {
        Typed::U(x) => json!(x),
        Typed::I(x) => json!(x),
        Typed::R(x) => json!(x),
        Typed::C(z) => cj(z),
        Typed::UL(v) => json!(v),
        Typed::IL(v) => json!(v),
        Typed::RL(v) => json!(v),
        Typed::CL(v) => Value::Array(v.iter().map(cj).collect()),
        Typed::T(s) => json!(s),
    }
}

struct Args {
    info: &'static IdentityInfo,
    values: Vec<(&'static str, Option<Typed>)>,
    resolved: Map<String, Value>,
}

impl Args {
    fn new(info: &'static IdentityInfo, given: &Params) -> Result<Self> {
        for key in given.keys() {
            if !info.params.iter().any(|p| p.name == key) {
                return Err(Error::InvalidParameters(format!(
                    "{}: unknown parameter '{key}' (expected one of {})",
                    info.id,
                    info.params
                        .iter()
                        .map(|p| p.name)
                        .collect::<Vec<_>>()
                        .join(", ")
                )));
            }
        }
        let mut values = Vec::new();
        for spec in info.params {
            let typed = match given.get(spec.name) {
                Some(v) => Some(parse_typed(spec.kind, v).ok_or_else(|| {
                    Error::InvalidParameters(format!(
                        "{}: cannot parse {} = {v} as {:?}",
                        info.id, spec.name, spec.kind
                    ))
                })?),
                None if spec.default.is_empty() => None,
                None => Some(
                    parse_typed(spec.kind, &Value::String(spec.default.into()))
                        .expect("registry default parses"),
                ),
            };
            values.push((spec.name, typed));
        }
        Ok(Self {
            info,
            values,
            resolved: Map::new(),
        })
    }

    fn get(&mut self, name: &str) -> Option<Typed> {
        let (key, v) = self
            .values
            .iter()
            .find(|(k, _)| *k == name)
            .unwrap_or_else(|| {
                panic!("{}: parameter {name} missing from the schema", self.info.id)
            });
        if let Some(t) = v {
            self.resolved.insert(key.to_string(), typed_json(t));
        }
        v.clone()
    }

    fn set_resolved(&mut self, name: &str, v: Value) {
        self.resolved.insert(name.to_string(), v);
    }

    fn uint_opt(&mut self, name: &str) -> Option<u64> {
        match self.get(name) {
            Some(Typed::U(x)) => Some(x),
            None => None,
            other => unreachable!("{name}: {other:?}"),
        }
    }
    fn uint(&mut self, name: &str) -> u64 {
        self.uint_opt(name)
            .unwrap_or_else(|| unreachable!("{name} has a default"))
    }
    fn int(&mut self, name: &str) -> i64 {
        match self.get(name) {
            Some(Typed::I(x)) => x,
            other => unreachable!("{name}: {other:?}"),
        }
    }
    fn real_opt(&mut self, name: &str) -> Option<f64> {
        match self.get(name) {
            Some(Typed::R(x)) => Some(x),
            None => None,
            other => unreachable!("{name}: {other:?}"),
        }
    }
    fn real(&mut self, name: &str) -> f64 {
        self.real_opt(name)
            .unwrap_or_else(|| unreachable!("{name} has a default"))
    }
    fn complex(&mut self, name: &str) -> Complex64 {
        match self.get(name) {
            Some(Typed::C(x)) => x,
            other => unreachable!("{name}: {other:?}"),
        }
    }
    fn uint_list(&mut self, name: &str) -> Vec<u64> {
        match self.get(name) {
            Some(Typed::UL(x)) => x,
            other => unreachable!("{name}: {other:?}"),
        }
    }
    fn int_list(&mut self, name: &str) -> Vec<i64> {
        match self.get(name) {
            Some(Typed::IL(x)) => x,
            other => unreachable!("{name}: {other:?}"),
        }
    }
    fn real_list(&mut self, name: &str) -> Vec<f64> {
        match self.get(name) {
            Some(Typed::RL(x)) => x,
            other => unreachable!("{name}: {other:?}"),
        }
    }
    fn complex_list(&mut self, name: &str) -> Vec<Complex64> {
        match self.get(name) {
            Some(Typed::CL(x)) => x,
            other => unreachable!("{name}: {other:?}"),
        }
    }
    fn text(&mut self, name: &str) -> String {
        match self.get(name) {
            Some(Typed::T(x)) => x,
            other => unreachable!("{name}: {other:?}"),
        }
    }

    /// `N ≥ 1`.
    fn trunc(&mut self) -> Result<usize> {
        let n = self.uint("N");
        if n == 0 || n > 1 << 20 {
            return Err(bad(format!("N = {n} must lie in [1, 2^20]")));
        }
        Ok(n as usize)
    }

    fn tol(&mut self) -> Result<f64> {
        let t = self.real("tol");
        if t < 0.0 {
            return Err(bad(format!("tolerance {t} must be non-negative")));
        }
        Ok(t)
    }

    /// The draw indices selected by `draws` / `draw`.
    fn draw_indices(&mut self) -> Result<Vec<u64>> {
        let draws = self.uint("draws");
        let has_draw = self.info.params.iter().any(|p| p.name == "draw");
        match if has_draw {
            self.uint_opt("draw")
        } else {
            None
        } {
            Some(k) => Ok(vec![k]),
            None if draws == 0 || draws > 64 => {
                Err(bad(format!("draws = {draws} must lie in [1, 64]")))
            }
            None => Ok((0..draws).collect()),
        }
    }
}

fn bad(msg: String) -> Error {
    Error::InvalidParameters(msg)
}

/// Independent generator for draw `k` of a seeded verification.
fn draw_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

fn draw_complex(rng: &mut ChaCha8Rng, re: (f64, f64), im: (f64, f64)) -> Complex64 {
    Complex64::new(rng.gen_range(re.0..=re.1), rng.gen_range(im.0..=im.1))
}

/// Running maximum of the compared errors.
#[derive(Default)]
struct Tally {
    max: f64,
    worst: Option<String>,
}

impl Tally {
    fn record(&mut self, err: f64, label: impl FnOnce() -> String) {
        let err = if err.is_nan() { f64::INFINITY } else { err };
        if err > self.max || self.worst.is_none() {
            self.max = err;
            self.worst = Some(label());
        }
    }

    fn series(&mut self, lhs: &CoeffSeries, rhs: &CoeffSeries, label: &str) -> Result<()> {
        let cmp = compare(lhs, rhs, 0.0)?;
        self.record(cmp.max_diff, || {
            format!("{label}, coefficient {}", cmp.argmax)
        });
        Ok(())
    }
}

struct Outcome {
    tally: Tally,
    tol: f64,
    n: Option<usize>,
    seed: Option<u64>,
    notes: Vec<String>,
}

// ---------------------------------------------------------------------------
// small helpers

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one() -> Complex64 {
    cx(1.0, 0.0)
}

/// `base^e` for real `base > 0`.
fn powc(base: f64, e: Complex64) -> Complex64 {
    (e * base.ln()).exp()
}

fn gcd_u(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// The single coefficient `value` at `index` (dropped beyond `N`).
fn mono(index: u64, value: Complex64, n: usize) -> CoeffSeries {
    CoeffSeries::from_function(|k| if k == index { value } else { cx(0.0, 0.0) }, n)
}

/// `a_{p^j} = coeffs[j]`, zero off the powers of `p`.
fn local_poly(pr: u64, coeffs: &[Complex64], n: usize) -> CoeffSeries {
    let mut at = Vec::new();
    let mut pk = 1u64;
    for &c in coeffs {
        at.push((pk, c));
        match pk.checked_mul(pr) {
            Some(x) if x <= n as u64 => pk = x,
            _ => break,
        }
    }
    CoeffSeries::from_function(
        |k| {
            at.iter()
                .find(|(i, _)| *i == k)
                .map_or(cx(0.0, 0.0), |(_, c)| *c)
        },
        n,
    )
}

/// `a_{j^k} = f(j)`, zero elsewhere.
fn on_powers<F: Fn(u64) -> Complex64>(k: u32, f: F, n: usize) -> CoeffSeries {
    let mut table = vec![cx(0.0, 0.0); n + 1];
    let mut j = 1u64;
    while let Some(idx) = j.checked_pow(k).filter(|&x| x <= n as u64) {
        table[idx as usize] = f(j);
        j += 1;
    }
    CoeffSeries::from_function(|i| table[i as usize], n)
}

/// `Σ_j j^{−x0} j^{−k s}`: the series of `ζ(x0 + k s)` in the formal variable.
fn zeta_on_powers(k: u32, x0: Complex64, n: usize) -> CoeffSeries {
    on_powers(k, |j| powc(j as f64, -x0), n)
}

fn product(factors: &[CoeffSeries], n: usize) -> Result<CoeffSeries> {
    CoeffSeries::product(factors, n)
}

fn sum_series(parts: &[CoeffSeries], n: usize) -> Result<CoeffSeries> {
    let mut acc = CoeffSeries::from_function(|_| cx(0.0, 0.0), n);
    for s in parts {
        acc = acc.add(s)?;
    }
    Ok(acc)
}

/// Multiplication of polynomials given by coefficient vectors.
fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![cx(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Polynomial coefficients padded to cover every power of `p` up to `N`.
fn local_len(pr: u64, n: usize) -> usize {
    let mut e = 0;
    let mut pk = 1u64;
    while let Some(x) = pk.checked_mul(pr).filter(|&x| x <= n as u64) {
        pk = x;
        e += 1;
    }
    e + 1
}

// ---------------------------------------------------------------------------
// HURWITZ_SUM

fn hurwitz_sum(args: &mut Args) -> Result<Outcome> {
    let q = args.uint("q");
    let m = args.int("m");
    let s = args.complex("s");
    let tol = args.tol()?;
    if q == 0 || m == 0 {
        return Err(bad("q and m must be non-zero".into()));
    }
    if (s - 1.0).norm() < 1e-12 {
        return Err(Error::PoleError("s = 1".into()));
    }
    let mut lhs = cx(0.0, 0.0);
    for h in 1..=q {
        if gcd_u(h, q) == 1 {
            let num = (h as i128 * m as i128).rem_euclid(q as i128) as i64;
            lhs += hurwitz_zeta(s, unit_interval_lift(num, q as i64))?;
        }
    }
    let mut factor = cx(0.0, 0.0);
    for d in divisors(q) {
        let g = gcd_u(d, m.unsigned_abs());
        factor += powc(d as f64 / g as f64, s - 1.0) * (d as f64 * mobius(q / d) as f64);
    }
    let rhs = zeta(s)? * factor;
    let mut tally = Tally::default();
    tally.record((lhs - rhs).norm(), || format!("q={q}, m={m}, s={s}"));
    Ok(Outcome {
        tally,
        tol,
        n: None,
        seed: None,
        notes: vec![format!("lhs = {lhs:.12}, rhs = {rhs:.12}")],
    })
}

// ---------------------------------------------------------------------------
// J0_EULER

/// `J₀(c, d)` without the factor `ĝ(0)`, by enumeration:
/// `Σ_{(ck,dl)=1} k^{−u}l^{−v}(dlt)^{−w}(ckt)^{−z}` with every variable
/// shifted by the formal `s` (index `cd k² l² t²`).
fn j0_bruteforce(cc: u64, d: u64, x: &[Complex64; 4], n: usize) -> CoeffSeries {
    let [u0, v0, w0, z0] = *x;
    let mut a = vec![cx(0.0, 0.0); n + 1];
    let base = cc * d;
    let mut k = 1u64;
    while base * k * k <= n as u64 {
        let mut l = 1u64;
        while base * k * k * l * l <= n as u64 {
            if gcd_u(cc * k, d * l) == 1 {
                let mut t = 1u64;
                while base * (k * l * t).pow(2) <= n as u64 {
                    let idx = (base * (k * l * t).pow(2)) as usize;
                    a[idx] += powc(k as f64, -u0)
                        * powc(l as f64, -v0)
                        * powc((d * l * t) as f64, -w0)
                        * powc((cc * k * t) as f64, -z0);
                    t += 1;
                }
            }
            l += 1;
        }
        k += 1;
    }
    CoeffSeries::from_function(|i| a[i as usize], n)
}

fn j0_euler(args: &mut Args) -> Result<Outcome> {
    let (a, b) = match args.uint_opt("cd") {
        Some(cd) => {
            args.set_resolved("a", json!(cd));
            args.set_resolved("b", json!(1));
            (cd, 1)
        }
        None => (args.uint("a"), args.uint("b")),
    };
    let n = args.trunc()?;
    let draws = args.draw_indices()?;
    let seed = args.uint("seed");
    let tol = args.tol()?;
    if a == 0 || b == 0 || gcd_u(a, b) != 1 {
        return Err(bad(format!(
            "a = {a}, b = {b} must be positive and coprime"
        )));
    }
    let mut tally = Tally::default();
    for k in draws {
        let mut rng = draw_rng(seed, k);
        let x: [Complex64; 4] =
            std::array::from_fn(|_| draw_complex(&mut rng, (0.5, 1.5), (-3.0, 3.0)));
        let [u0, v0, w0, z0] = x;
        let s0 = u0 + v0 + w0 + z0;
        // the factorisation of J₀(c, d) for each pair
        let mut contributions = Vec::new();
        for cc in divisors(a) {
            for d in divisors(b) {
                let brute = j0_bruteforce(cc, d, &x, n);
                let euler = CoeffSeries::euler_product(
                    |pr, e| {
                        let in_c = cc % pr == 0;
                        let in_d = d % pr == 0;
                        match (in_c, in_d, e) {
                            (false, false, 4) => -powc(pr as f64, -s0),
                            (true, _, 2) => -powc(pr as f64, -(v0 + w0)),
                            (_, true, 2) => -powc(pr as f64, -(u0 + z0)),
                            _ => cx(0.0, 0.0),
                        }
                    },
                    n,
                );
                let closed = product(
                    &[
                        mono(cc * d, powc(cc as f64, -z0) * powc(d as f64, -w0), n),
                        zeta_on_powers(2, w0 + z0, n),
                        zeta_on_powers(2, u0 + z0, n),
                        zeta_on_powers(2, v0 + w0, n),
                        euler,
                    ],
                    n,
                )?;
                tally.series(
                    &brute,
                    &closed,
                    &format!("draw {k}: J0(c={cc}, d={d}) factorisation"),
                )?;
                let weight = powc((a / cc) as f64, -v0) * powc((b / d) as f64, -u0);
                contributions.push(mono((a / cc) * (b / d), weight, n).convolve(&brute)?);
            }
        }
        let lhs = zeta_on_powers(2, u0 + v0, n).convolve(&sum_series(&contributions, n)?)?;
        // the two braces
        let brace = |m: u64, coef: Complex64, num_exp: Complex64| -> Result<CoeffSeries> {
            let mut parts = Vec::new();
            for c in divisors(m) {
                let mut factors = vec![mono(1, powc(c as f64, coef), n)];
                for pr in prime_divisors(c) {
                    let len = local_len(pr, n);
                    let mut num = vec![cx(0.0, 0.0); len.max(3)];
                    num[0] = one();
                    num[2] = -powc(pr as f64, -num_exp);
                    num.truncate(len);
                    let mut den = vec![cx(0.0, 0.0); len.max(5)];
                    den[0] = one();
                    den[4] = -powc(pr as f64, -s0);
                    den.truncate(len);
                    factors.push(local_poly(pr, &num, n));
                    factors.push(local_poly(pr, &den, n).inverse()?);
                }
                parts.push(product(&factors, n)?);
            }
            sum_series(&parts, n)
        };
        let rhs = product(
            &[
                mono(a * b, powc(a as f64, -v0) * powc(b as f64, -u0), n),
                zeta_on_powers(2, u0 + v0, n),
                zeta_on_powers(2, u0 + z0, n),
                zeta_on_powers(2, w0 + v0, n),
                zeta_on_powers(2, w0 + z0, n),
                zeta_on_powers(4, s0, n).inverse()?,
                brace(a, v0 - z0, v0 + w0)?,
                brace(b, u0 - w0, u0 + z0)?,
            ],
            n,
        )?;
        tally.series(
            &lhs,
            &rhs,
            &format!("draw {k}: total diagonal contribution"),
        )?;
    }
    Ok(Outcome {
        tally,
        tol,
        n: Some(n),
        seed: Some(seed),
        notes: vec!["variables u, v, w, z shifted by the formal s; the factor ĝ(0) is omitted on both sides".into()],
    })
}

// ---------------------------------------------------------------------------
// GCD_SUM

fn gcd_sum(args: &mut Args) -> Result<Outcome> {
    let cc = args.uint("c");
    let d = args.uint("d");
    let delta = args.uint("delta");
    let n = args.trunc()?;
    let draws = args.draw_indices()?;
    let seed = args.uint("seed");
    let tol = args.tol()?;
    if cc == 0 || d == 0 || delta == 0 || gcd_u(cc, d) != 1 {
        return Err(bad(format!(
            "need positive c, d, δ with (c, d) = 1 (c={cc}, d={d}, δ={delta})"
        )));
    }
    let mut tally = Tally::default();
    for k in draws {
        let mut rng = draw_rng(seed, k);
        let x: [Complex64; 4] =
            std::array::from_fn(|_| draw_complex(&mut rng, (0.25, 0.75), (-3.0, 3.0)));
        let [u0, v0, w0, z0] = x;
        let alpha = v0 - z0;
        let beta = u0 - w0 + 1.0;
        let jordan = |lam: u64| -> Complex64 {
            let mut v = powc(lam as f64, alpha);
            for pr in prime_divisors(lam) {
                v *= one() - powc(pr as f64, -alpha);
            }
            v
        };
        let zeta_s = CoeffSeries::zeta_shift(cx(0.0, 0.0), n);
        // (a) Σ_f (f,δ)^α f^{−s}
        let lhs = CoeffSeries::from_function(|f| powc(gcd_u(f, delta) as f64, alpha), n);
        let rhs = zeta_s.convolve(&CoeffSeries::from_function(
            |l| {
                if delta.is_multiple_of(l) {
                    jordan(l)
                } else {
                    cx(0.0, 0.0)
                }
            },
            n,
        ))?;
        tally.series(
            &lhs,
            &rhs,
            &format!("draw {k}: gcd power series, δ={delta}"),
        )?;
        // (b) Möbius-twisted sum over δ | m for m = c·j, (j, d) = 1
        for j in (1..=8u64).filter(|&j| gcd_u(j, d) == 1) {
            let m = cc * j;
            let lhs = CoeffSeries::from_function(
                |f| {
                    divisors(m)
                        .into_iter()
                        .map(|dl| {
                            powc(dl as f64, one() - alpha)
                                * mobius(m / dl) as f64
                                * powc(gcd_u(f, dl) as f64, alpha)
                        })
                        .sum()
                },
                n,
            );
            let local = CoeffSeries::from_function(
                |l| {
                    if !m.is_multiple_of(l) {
                        return cx(0.0, 0.0);
                    }
                    let mut v = jordan(l);
                    for pr in prime_divisors(m / l) {
                        v *= one() - powc(pr as f64, alpha - 1.0);
                    }
                    v
                },
                n,
            );
            let rhs = zeta_s
                .convolve(&local)?
                .scale(powc(m as f64, one() - alpha));
            tally.series(&lhs, &rhs, &format!("draw {k}: twisted sum at n={m}"))?;
        }
        // (c) the Euler factorisation in the remaining variable
        let ratio = |pr: u64| {
            (one() - powc(pr as f64, alpha - 1.0))
                / (one() - powc(pr as f64, -(beta + 1.0 - alpha)))
        };
        let lhs = CoeffSeries::from_function(
            |l| {
                if gcd_u(l, d) != 1 {
                    return cx(0.0, 0.0);
                }
                let g = gcd_u(cc, l);
                let mut v = powc(g as f64, beta);
                for pr in prime_divisors(l) {
                    v *= one() - powc(pr as f64, -alpha);
                }
                for pr in prime_divisors(cc / g) {
                    v *= ratio(pr);
                }
                v
            },
            n,
        );
        let mut factors = vec![
            zeta_s.clone(),
            CoeffSeries::from_function(|l| mobius(l) as f64 * powc(l as f64, -alpha), n),
        ];
        for pr in prime_divisors(cc * d) {
            let len = local_len(pr, n);
            let num = [one(), -one()];
            let den = [one(), -powc(pr as f64, -alpha)];
            factors.push(local_poly(pr, &num[..len.min(2)], n));
            factors.push(local_poly(pr, &den[..len.min(2)], n).inverse()?);
        }
        for (pr, b_exp) in factorize(cc).factors {
            let len = local_len(pr, n);
            let coeffs: Vec<Complex64> = (0..len as u32)
                .map(|j| {
                    let mut v = powc(pr as f64, beta * j.min(b_exp) as f64);
                    if j > 0 {
                        v *= one() - powc(pr as f64, -alpha);
                    }
                    if b_exp > j {
                        v *= ratio(pr);
                    }
                    v
                })
                .collect();
            factors.push(local_poly(pr, &coeffs, n));
        }
        let rhs = product(&factors, n)?;
        tally.series(&lhs, &rhs, &format!("draw {k}: Euler factorisation"))?;
    }
    Ok(Outcome {
        tally,
        tol,
        n: Some(n),
        seed: Some(seed),
        notes: vec!["α = v − z and β = u − w + 1 from a seeded draw of (u, v, w, z) with real parts in [1/4, 3/4]".into()],
    })
}

// ---------------------------------------------------------------------------
// RAMANUJAN_CONV

fn ramanujan_conv(args: &mut Args) -> Result<Outcome> {
    let q = args.uint("q");
    let cc = args.uint("c");
    let c1 = args.uint("c1");
    let n = args.trunc()?;
    let draws = args.draw_indices()?;
    let seed = args.uint("seed");
    let tol = args.tol()?;
    if q == 0
        || !is_squarefree(q)
        || cc == 0
        || c1 == 0
        || !q.is_multiple_of(cc)
        || !q.is_multiple_of(c1)
    {
        return Err(bad(format!(
            "need square-free q with c, c1 | q (q={q}, c={cc}, c1={c1})"
        )));
    }
    let d = q / cc;
    let d1 = q / c1;
    let special = gcd_u(c1, cc) * gcd_u(d1, d);
    let zero = cx(0.0, 0.0);
    let mut tally = Tally::default();
    for k in draws {
        let mut rng = draw_rng(seed, k);
        let r: f64 = rng.gen_range(-3.0..=3.0);
        let alpha = draw_complex(&mut rng, (-0.5, 0.3), (-2.0, 2.0));
        let ir2 = cx(0.0, 2.0 * r);
        // first convolution: σ_{−2ir}(n; χ_q) Π_{p | special}{σ_{−2ir}(n_p)(1 − p^{−1−2ir}) − 1}
        let lhs = CoeffSeries::from_function(
            |m| {
                let mut v = sigma_complex(m, -ir2, Some(q));
                for pr in prime_divisors(special) {
                    let np = part_p(m, pr).expect("prime");
                    v *= sigma_complex(np, -ir2, None) * (one() - powc(pr as f64, -(one() + ir2)))
                        - 1.0;
                }
                v
            },
            n,
        );
        let mut factors = vec![
            CoeffSeries::zeta_shift(zero, n),
            CoeffSeries::from_function(
                |m| {
                    if gcd_u(m, q) == 1 {
                        powc(m as f64, -ir2)
                    } else {
                        zero
                    }
                },
                n,
            ),
        ];
        for pr in prime_divisors(special) {
            let t = one() - powc(pr as f64, -(one() + ir2));
            let coeffs: Vec<Complex64> = (0..local_len(pr, n) as u32)
                .map(|e| {
                    if e == 0 {
                        t - 1.0
                    } else {
                        powc(pr as f64, -ir2 * e as f64) * t
                    }
                })
                .collect();
            factors.push(local_poly(pr, &coeffs, n));
        }
        let rhs = product(&factors, n)?;
        tally.series(
            &lhs,
            &rhs,
            &format!("draw {k}: first convolution (r={r:.4})"),
        )?;
        // second: σ_{2ir}(n; χ_q) σ_α(n) Π_{p|c1}{σ_{2ir}(n_p)(1 − p^{−(1−2ir)}) − 1}
        let lhs = CoeffSeries::from_function(
            |m| {
                let mut v = sigma_complex(m, ir2, Some(q)) * sigma_complex(m, alpha, None);
                for pr in prime_divisors(c1) {
                    let np = part_p(m, pr).expect("prime");
                    v *= sigma_complex(np, ir2, None) * (one() - powc(pr as f64, -(one() - ir2)))
                        - 1.0;
                }
                v
            },
            n,
        );
        let ab = ir2 + alpha;
        let mut factors = vec![
            CoeffSeries::zeta_shift(zero, n),
            CoeffSeries::zeta_shift(-ir2, n),
            CoeffSeries::zeta_shift(-alpha, n),
            CoeffSeries::zeta_shift(-ab, n),
            on_powers(2, |m| mobius(m) as f64 * powc(m as f64, ab), n),
        ];
        for pr in prime_divisors(q) {
            let len = local_len(pr, n);
            let pf = pr as f64;
            let inv_sq: Vec<Complex64> = (0..len)
                .map(|e| {
                    if e % 2 == 0 {
                        powc(pf, ab * (e / 2) as f64)
                    } else {
                        zero
                    }
                })
                .collect();
            factors.push(local_poly(pr, &inv_sq, n));
            let lin_a = [one(), -powc(pf, ir2)];
            let lin_ab = [one(), -powc(pf, ab)];
            let poly = if d1.is_multiple_of(pr) {
                poly_mul(&lin_a, &lin_ab)
            } else {
                let mut first = poly_mul(
                    &[one() - powc(pf, -(one() - ir2))],
                    &[one(), zero, -powc(pf, ab)],
                );
                for (i, x) in poly_mul(&lin_a, &lin_ab).into_iter().enumerate() {
                    first[i] -= x;
                }
                first
            };
            factors.push(local_poly(pr, &poly[..poly.len().min(len)], n));
        }
        let rhs = product(&factors, n)?;
        tally.series(
            &lhs,
            &rhs,
            &format!("draw {k}: second convolution (r={r:.4}, α={alpha:.4})"),
        )?;
    }
    Ok(Outcome {
        tally,
        tol,
        n: Some(n),
        seed: Some(seed),
        notes: vec![format!(
            "d = q/c = {d}, d1 = q/c1 = {d1}, (c1,c)(d1,d) = {special}"
        )],
    })
}

// ---------------------------------------------------------------------------
// ZS_EULER

fn zs_euler(args: &mut Args) -> Result<Outcome> {
    let cc = args.uint("c");
    let d = args.uint("d");
    let n = args.trunc()?;
    let draws = args.uint("draws");
    let seed = args.uint("seed");
    let tol = args.tol()?;
    if cc == 0 || d == 0 || gcd_u(cc, d) != 1 || !is_squarefree(cc * d) {
        return Err(bad(format!(
            "need square-free coprime c, d (c={cc}, d={d})"
        )));
    }
    if draws > 64 {
        return Err(bad(format!("draws = {draws} must be at most 64")));
    }
    // the given pair plus seeded random square-free coprime pairs
    let mut pairs = vec![(cc, d)];
    let small_primes = [2u64, 3, 5, 7, 11, 13];
    for k in 0..draws {
        let mut rng = draw_rng(seed, k);
        let (mut a, mut b) = (1u64, 1u64);
        for &pr in &small_primes {
            match rng.gen_range(0..3) {
                0 => a *= pr,
                1 => b *= pr,
                _ => {}
            }
        }
        pairs.push((a, b));
    }
    let mut tally = Tally::default();
    let mut literal_err = 0.0f64;
    for &(cc, d) in &pairs {
        let cd = cc * d;
        let tau = |m: u64| {
            divisors(m)
                .into_iter()
                .filter(|&k| gcd_u(k, cd) == 1)
                .count() as f64
        };
        let factor = |f: u64, restricted: bool| -> f64 {
            let mut v = tau(f);
            for pr in prime_divisors(cc) {
                if restricted && !f.is_multiple_of(pr) {
                    continue;
                }
                let fp = part_p(f, pr).expect("prime");
                v *= divisors(fp).len() as f64 * (1.0 - 1.0 / pr as f64) - 1.0;
            }
            v
        };
        // variable t = s + 1: a_f = τ(f; χ_cd) Π(…)
        let lhs = CoeffSeries::from_real(|f| factor(f, true), n);
        let literal = CoeffSeries::from_real(|f| factor(f, false), n);
        let mut factors = vec![
            CoeffSeries::zeta_shift(cx(0.0, 0.0), n),
            CoeffSeries::zeta_shift(cx(0.0, 0.0), n),
        ];
        for pr in prime_divisors(d) {
            factors.push(local_poly(
                pr,
                &[one(), -one()][..local_len(pr, n).min(2)],
                n,
            ));
        }
        for pr in prime_divisors(cc) {
            let pf = pr as f64;
            let poly = [one(), cx(-1.0 - 2.0 / pf, 0.0), cx(1.0 + 1.0 / pf, 0.0)];
            factors.push(local_poly(pr, &poly[..local_len(pr, n).min(3)], n));
        }
        let rhs = product(&factors, n)?;
        tally.series(&lhs, &rhs, &format!("c={cc}, d={d}"))?;
        literal_err = literal_err.max(compare(&literal, &rhs, 0.0)?.max_diff);
    }
    Ok(Outcome {
        tally,
        tol,
        n: Some(n),
        seed: Some(seed),
        notes: vec![
            format!("pairs (c, d): {pairs:?}"),
            "the product over p | c is taken over primes dividing both c and f; with the product over all p | c the local factor at p | c would be (X − 1/p)/(1 − X)², X = p^(−s−1)".into(),
            format!("max coefficient discrepancy of the unrestricted product: {literal_err:.6e}"),
        ],
    })
}

// ---------------------------------------------------------------------------
// EISEN_EN / EISEN_PHI

fn sigma1(n: u64) -> f64 {
    divisors(n).into_iter().map(|d| d as f64).sum()
}

fn eisen_en(args: &mut Args) -> Result<Outcome> {
    let q = args.uint("q");
    let form = args.text("form");
    let ns = args.int_list("n");
    if q == 0 || !is_squarefree(q) {
        return Err(Error::InvalidModulus(format!(
            "level {q} is not square-free"
        )));
    }
    if ns.is_empty() || ns.contains(&0) {
        return Err(bad("n values must be non-zero".into()));
    }
    let pairs: Vec<CuspPair> = divisors(q)
        .into_iter()
        .flat_map(|w1| divisors(q).into_iter().map(move |w2| (w1, w2)))
        .map(|(w1, w2)| CuspPair::new(q, w1, w2))
        .collect::<Result<_>>()?;
    let mut tally = Tally::default();
    match form.as_str() {
        "bracket" => {
            let n = args.trunc()?;
            let draws = args.uint("draws");
            let seed = args.uint("seed");
            let tol = args.real_opt("tol").unwrap_or(1e-8);
            args.set_resolved("tol", json!(tol));
            let mut all_n = ns.clone();
            let mut rng = draw_rng(seed, 0);
            for _ in 0..draws.min(64) {
                let v: i64 = rng.gen_range(1..=3000);
                all_n.push(if rng.gen_bool(0.5) { v } else { -v });
            }
            let zero = cx(0.0, 0.0);
            let l_inv =
                CoeffSeries::from_real(|k| f64::from(u8::from(gcd_u(k, q) == 1)), n).inverse()?;
            for pair in &pairs {
                let (a, b) = (pair.a(), pair.b());
                // ((v1,v2)/[v1,v2]) (w1,w2)² v1 v2 = A²: the prefactor of the closed form is A^t
                let g = gcd_u(pair.v1, pair.v2);
                let lcm = pair.v1 / g * pair.v2;
                let w = gcd_u(pair.w1, pair.w2);
                if g * w * w * pair.v1 * pair.v2 != a * a * lcm {
                    tally.record(f64::INFINITY, || {
                        format!("prefactor identity fails for {pair:?}")
                    });
                }
                for &m in &all_n {
                    let ma = m.unsigned_abs();
                    let lhs = CoeffSeries::from_real(
                        |r| {
                            if gcd_u(r, b) == 1 {
                                ramanujan_sum(a * r, m) as f64
                            } else {
                                0.0
                            }
                        },
                        n,
                    );
                    let mut factors = vec![
                        CoeffSeries::from_function(
                            |k| {
                                if ma % k == 0 && gcd_u(k, q) == 1 {
                                    cx(k as f64, 0.0)
                                } else {
                                    zero
                                }
                            },
                            n,
                        ),
                        l_inv.clone(),
                    ];
                    for pr in prime_divisors(a) {
                        let kp = factorize(part_p(ma, pr)?).exponent(pr);
                        let sigma: Vec<Complex64> = (0..=kp)
                            .map(|j| cx((pr as f64).powi(j as i32), 0.0))
                            .collect();
                        let mut poly = poly_mul(&sigma, &[one(), -one()]);
                        poly[0] -= 1.0;
                        if poly[0].norm() != 0.0 {
                            tally.record(f64::INFINITY, || {
                                format!("non-vanishing constant term at p={pr}")
                            });
                        }
                        let shifted: Vec<Complex64> = poly[1..].to_vec();
                        factors.push(local_poly(
                            pr,
                            &shifted[..shifted.len().min(local_len(pr, n))],
                            n,
                        ));
                    }
                    let rhs = product(&factors, n)?;
                    tally.series(
                        &lhs,
                        &rhs,
                        &format!("w1={}, w2={}, n={m}", pair.w1, pair.w2),
                    )?;
                }
            }
            Ok(Outcome {
                tally,
                tol,
                n: Some(n),
                seed: Some(seed),
                notes: vec![
                    format!("n values: {all_n:?}"),
                    "coefficients in t = 2s of Σ_{(r,B)=1} c_{Ar}(n) r^(−t) against σ_{1−t}(n,χ_q) L(t,χ_q)^(−1) Π_{p|A} X^(−1)(σ_{1−t}(n_p)(1−X) − 1), X = p^(−t); the prefactor ((v1,v2)/[v1,v2])^s((w1,w2)²v1v2)^s equals A^(2s)".into(),
                ],
            })
        }
        "series" => {
            let s = args.complex("s");
            let tol = args.real_opt("tol").unwrap_or(1e-6);
            args.set_resolved("tol", json!(tol));
            if s.re < 1.6 {
                return Err(Error::DomainError(format!(
                    "direct series needs Re s ≥ 1.6, got {s}"
                )));
            }
            let tail = 1e-8;
            let mut r_used = 0u64;
            for pair in &pairs {
                let (a, b) = (pair.a(), pair.b());
                for &m in &ns {
                    let closed = eisen_coeff(m, s, q, pair.w1, pair.w2)?;
                    // |c_{Ar}(n)| ≤ σ(|n|): Σ_{r>R} ≤ σ(|n|) scale^{−2σ} R^{1−2σ}/(2σ−1)
                    let sg = 2.0 * s.re - 1.0;
                    let r_max = ((sigma1(m.unsigned_abs())
                        / (pair.scale().powf(2.0 * s.re) * sg * tail))
                        .powf(1.0 / sg))
                    .ceil() as u64
                        + 1;
                    if r_max > 50_000_000 {
                        return Err(Error::TailError(format!(
                            "direct series would need {r_max} terms"
                        )));
                    }
                    r_used = r_used.max(r_max);
                    let mut direct = cx(0.0, 0.0);
                    for r in 1..=r_max {
                        if gcd_u(r, b) == 1 {
                            direct += ramanujan_sum(a * r, m) as f64
                                * powc(pair.scale() * r as f64, -2.0 * s);
                        }
                    }
                    tally.record((closed - direct).norm(), || {
                        format!("w1={}, w2={}, n={m}", pair.w1, pair.w2)
                    });
                }
            }
            Ok(Outcome {
                tally,
                tol,
                n: Some(r_used as usize),
                seed: None,
                notes: vec![format!(
                    "direct sums truncated with analytic tail bound {tail:e}"
                )],
            })
        }
        other => Err(bad(format!(
            "form must be 'bracket' or 'series', got '{other}'"
        ))),
    }
}

/// Euler φ of `1..=n` by a sieve.
fn phi_table(n: usize) -> Vec<u32> {
    let mut phi: Vec<u32> = (0..=n as u32).collect();
    for pr in 2..=n {
        if phi[pr] == pr as u32 {
            let mut k = pr;
            while k <= n {
                phi[k] -= phi[k] / pr as u32;
                k += pr;
            }
        }
    }
    phi
}

fn eisen_phi_check(args: &mut Args) -> Result<Outcome> {
    let q = args.uint("q");
    let points = args.complex_list("s");
    let tol = args.tol()?;
    if q == 0 || !is_squarefree(q) {
        return Err(Error::InvalidModulus(format!(
            "level {q} is not square-free"
        )));
    }
    let tail = 1e-8;
    let mut tally = Tally::default();
    let mut r_used = 0usize;
    for &s in &points {
        if s.re < 1.6 {
            return Err(Error::DomainError(format!(
                "direct series needs Re s ≥ 1.6, got {s}"
            )));
        }
        let gamma = PI.sqrt() * cgamma(s - 0.5)? * rgamma(s);
        let pairs: Vec<CuspPair> = divisors(q)
            .into_iter()
            .flat_map(|w1| divisors(q).into_iter().map(move |w2| (w1, w2)))
            .map(|(w1, w2)| CuspPair::new(q, w1, w2))
            .collect::<Result<_>>()?;
        let a_max = pairs
            .iter()
            .map(|p| p.a() as f64 / p.scale().powf(2.0 * s.re))
            .fold(0.0, f64::max);
        // φ(Ar) ≤ Ar: Σ_{r>R} ≤ A scale^{−2σ} R^{2−2σ}/(2σ−2)
        let e = 2.0 * s.re - 2.0;
        let r_max = ((a_max / (e * tail)).powf(1.0 / e)).ceil() as usize + 1;
        if r_max > 50_000_000 {
            return Err(Error::TailError(format!(
                "direct series would need {r_max} terms"
            )));
        }
        r_used = r_used.max(r_max);
        let phi = phi_table(r_max);
        let powers: Vec<Complex64> = (0..=r_max)
            .map(|r| {
                if r == 0 {
                    cx(0.0, 0.0)
                } else {
                    powc(r as f64, -2.0 * s)
                }
            })
            .collect();
        for pair in &pairs {
            let (a, b) = (pair.a(), pair.b());
            let phi_a = euler_phi(a) as f64;
            let mut sum = cx(0.0, 0.0);
            for r in 1..=r_max {
                if gcd_u(r as u64, b) != 1 {
                    continue;
                }
                let g = gcd_u(a, r as u64);
                sum += phi_a * phi[r] as f64 * g as f64 / euler_phi(g) as f64 * powers[r];
            }
            let direct = gamma * sum * powc(pair.scale(), -2.0 * s);
            let closed = eisen_phi(s, q, pair.w1, pair.w2)?;
            tally.record((closed - direct).norm(), || {
                format!("s={s}, w1={}, w2={}", pair.w1, pair.w2)
            });
        }
    }
    Ok(Outcome {
        tally,
        tol,
        n: Some(r_used),
        seed: None,
        notes: vec![format!(
            "direct sums truncated with analytic tail bound {tail:e}"
        )],
    })
}

// ---------------------------------------------------------------------------
// XY_CLOSED

fn xy_closed(args: &mut Args) -> Result<Outcome> {
    let cds = args.uint_list("cd");
    let abs = args.uint_list("ab");
    let rs = args.real_list("r");
    let tol = args.tol()?;
    let mut tally = Tally::default();
    let dist = |x: [f64; 2], y: [f64; 2]| cx(x[0] - y[0], x[1] - y[1]).norm();
    for &r in &rs {
        for &cd in &cds {
            if cd == 0 || !is_squarefree(cd) {
                return Err(bad(format!("cd = {cd} must be square-free")));
            }
            for cc in divisors(cd) {
                let f = xy_factors(r, cc, cd / cc, cc, cd / cc)?;
                tally.record(dist(f.x_divisor_sum, f.x_closed), || {
                    format!("X, c={cc}, d={}, r={r}", cd / cc)
                });
            }
        }
        for &ab in &abs {
            if ab == 0 || !is_squarefree(ab) {
                return Err(bad(format!("ab = {ab} must be square-free")));
            }
            for a in divisors(ab) {
                let f = xy_factors(r, a, ab / a, 1, 1)?;
                tally.record(dist(f.y_divisor_sum, f.y_closed), || {
                    format!("Y, a={a}, b={}, r={r}", ab / a)
                });
            }
        }
    }
    Ok(Outcome {
        tally,
        tol,
        n: None,
        seed: None,
        notes: vec![],
    })
}

// ---------------------------------------------------------------------------
// Kloosterman identities

fn squarefree_cusp(q: u64, w: u64) -> Cusp {
    Cusp { q, w, u: 1 }
}

fn kloosterman_closed(args: &mut Args) -> Result<Outcome> {
    let q = args.uint("q");
    let ms = args.int_list("m");
    let ns = args.int_list("n");
    let rmax = args.uint("rmax");
    let tol = args.tol()?;
    if q == 0 || !is_squarefree(q) {
        return Err(Error::InvalidModulus(format!(
            "level {q} is not square-free"
        )));
    }
    let mut tally = Tally::default();
    let mut count = 0usize;
    for w1 in divisors(q) {
        for w2 in divisors(q) {
            let pair = CuspPair::new(q, w1, w2)?;
            let b = pair.b();
            for r in (1..=rmax).filter(|&r| gcd_u(r, b) == 1) {
                for &m in &ms {
                    for &n in &ns {
                        let spec = GenKloostermanSpec {
                            q,
                            cusp_a: squarefree_cusp(q, w1),
                            cusp_b: squarefree_cusp(q, w2),
                            convention: Convention::Shifted,
                            m,
                            n,
                            c_index: gcd_u(w1, w2) * r,
                        };
                        let brute = general_kloosterman_bruteforce(&spec)?;
                        let closed = general_kloosterman_squarefree(q, w1, w2, m, n, r)?;
                        count += 1;
                        tally.record((brute - closed).norm(), || {
                            format!("w1={w1}, w2={w2}, r={r}, m={m}, n={n}")
                        });
                    }
                }
            }
        }
    }
    Ok(Outcome {
        tally,
        tol,
        n: None,
        seed: None,
        notes: vec![format!("{count} sums compared")],
    })
}

fn kloosterman_special(args: &mut Args) -> Result<Outcome> {
    let q = args.uint("q");
    let ms = args.int_list("m");
    let ns = args.int_list("n");
    let rmax = args.uint("rmax");
    let tol = args.tol()?;
    if q == 0 || !is_squarefree(q) {
        return Err(Error::InvalidModulus(format!(
            "level {q} is not square-free"
        )));
    }
    let mut tally = Tally::default();
    for cc in divisors(q) {
        let d = q / cc;
        for r in (1..=rmax).filter(|&r| gcd_u(r, d) == 1) {
            let modulus = cc * r;
            for &m in &ms {
                for &n in &ns {
                    let spec = GenKloostermanSpec {
                        q,
                        cusp_a: squarefree_cusp(q, q),
                        cusp_b: squarefree_cusp(q, cc),
                        convention: Convention::Shifted,
                        m,
                        n,
                        c_index: modulus,
                    };
                    let brute = general_kloosterman_bruteforce(&spec)?;
                    let dbar = if modulus == 1 {
                        0
                    } else {
                        mod_inverse((d % modulus) as i64, modulus as i64)?
                    };
                    let n2 = (dbar as i128 * n as i128).rem_euclid(modulus as i128) as i64;
                    let ordinary = ordinary_kloosterman(m, n2, modulus);
                    tally.record((brute - ordinary).norm(), || {
                        format!("c={cc}, d={d}, r={r}, m={m}, n={n}")
                    });
                }
            }
        }
    }
    Ok(Outcome {
        tally,
        tol,
        n: None,
        seed: None,
        notes: vec!["the cusp at infinity is represented by 1/q".into()],
    })
}

fn kloosterman_fact(args: &mut Args) -> Result<Outcome> {
    let q = args.uint("q");
    let cmax = args.uint("cmax");
    let ms = args.int_list("m");
    let ns = args.int_list("n");
    let tol = args.tol()?;
    if q == 0 {
        return Err(Error::InvalidModulus("level 0".into()));
    }
    let cusps = enumerate_cusps(q);
    let mut tally = Tally::default();
    let mut count = 0usize;
    for ca in &cusps {
        for cb in &cusps {
            for c in 1..=cmax {
                for &m in &ms {
                    for &n in &ns {
                        let spec = GenKloostermanSpec {
                            q,
                            cusp_a: *ca,
                            cusp_b: *cb,
                            convention: Convention::Plain,
                            m,
                            n,
                            c_index: c,
                        };
                        let brute = general_kloosterman_bruteforce(&spec)?;
                        let fact = kloosterman_factorize(q, ca, cb, m, n, c)?;
                        count += 1;
                        tally.record((brute - fact.product()).norm(), || {
                            format!("{ca} → {cb}, c={c}, m={m}, n={n}")
                        });
                    }
                }
            }
        }
    }
    Ok(Outcome {
        tally,
        tol,
        n: None,
        seed: None,
        notes: vec![format!("{count} sums compared")],
    })
}

// ---------------------------------------------------------------------------
// DOUBLE_COSET

fn double_coset(args: &mut Args) -> Result<Outcome> {
    let q = args.uint("q");
    let bound = args.uint("bound") as i64;
    let pbound = args.uint("pattern_bound") as i64;
    let tol = args.tol()?;
    if q == 0 || !is_squarefree(q) {
        return Err(Error::InvalidModulus(format!(
            "level {q} is not square-free"
        )));
    }
    let qi = q as i64;
    let mut gammas = Vec::new();
    for c in (-bound / qi..=bound / qi).map(|k| k * qi) {
        for d in -bound..=bound {
            if gcd(c, d) != 1 {
                continue;
            }
            for a in -bound..=bound {
                let ad1 = a * d - 1;
                if c == 0 {
                    if ad1 == 0 {
                        for b in -bound..=bound {
                            gammas.push(IntMat2::new(a, b, c, d)?);
                        }
                    }
                } else if ad1 % c == 0 && (ad1 / c).abs() <= bound {
                    gammas.push(IntMat2::new(a, ad1 / c, c, d)?);
                }
            }
        }
    }
    let mut violations = 0u64;
    let mut checked = 0u64;
    let mut first = None;
    for w1 in divisors(q) {
        for w2 in divisors(q) {
            let s = Splitting::new(q, w1, w2)?;
            for g in &gammas {
                checked += 1;
                if !double_coset_pattern(q, w1, w2, &s.conjugate(g)?)? {
                    violations += 1;
                    first.get_or_insert(format!("conjugate of {g:?} at ({w1}, {w2})"));
                }
            }
            let [ma, _, mc, md] = s.pattern_moduli().map(|x| x as i64);
            for c in (-pbound..=pbound).filter(|c| c % mc == 0) {
                for a in (-pbound..=pbound).filter(|a| a % ma == 0) {
                    for d in (-pbound..=pbound).filter(|d| d % md == 0) {
                        let ad1 = a * d - 1;
                        let bs: Vec<i64> = if c == 0 {
                            if ad1 == 0 {
                                (-pbound..=pbound).collect()
                            } else {
                                vec![]
                            }
                        } else if ad1 % c == 0 && (ad1 / c).abs() <= pbound {
                            vec![ad1 / c]
                        } else {
                            vec![]
                        };
                        for b in bs {
                            let m = IntMat2::new(a, b, c, d)?;
                            if !double_coset_pattern(q, w1, w2, &m)? {
                                continue;
                            }
                            checked += 1;
                            if !is_gamma0(&s.unconjugate(&m)?, q) {
                                violations += 1;
                                first
                                    .get_or_insert(format!("pattern matrix {m:?} at ({w1}, {w2})"));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut tally = Tally::default();
    tally.record(violations as f64, || {
        first.unwrap_or_else(|| "no violation".into())
    });
    Ok(Outcome {
        tally,
        tol,
        n: None,
        seed: None,
        notes: vec![format!(
            "{checked} memberships checked, {} Γ₀(q) elements",
            gammas.len()
        )],
    })
}

// ---------------------------------------------------------------------------
// SCATTER_UNITARY

fn scatter_unitary(args: &mut Args) -> Result<Outcome> {
    let q = args.uint("q");
    let points = args.uint("points");
    let seed = args.uint("seed");
    let tol = args.tol()?;
    if points == 0 || points > 1000 {
        return Err(bad(format!("points = {points} must lie in [1, 1000]")));
    }
    let mut rng = draw_rng(seed, 0);
    let mut tally = Tally::default();
    for _ in 0..points {
        // Re s ∈ [1.1, 1.6] keeps both s and 1 − s away from zeros of ζ(2s), ζ(2 − 2s)
        let s = draw_complex(&mut rng, (1.1, 1.6), (-8.0, 8.0));
        let res = unitarity_residual(s, q)?;
        tally.record(res, || format!("s={s:.6}"));
    }
    Ok(Outcome {
        tally,
        tol,
        n: None,
        seed: Some(seed),
        notes: vec![],
    })
}

// ---------------------------------------------------------------------------
// transform identities

fn tuple_from(list: &[Complex64]) -> Result<FourTuple> {
    match list {
        [u, v, w, z] => Ok(FourTuple::new(*u, *v, *w, *z)),
        _ => Err(bad(format!("tuple needs four entries, got {}", list.len()))),
    }
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(1.0)
}

fn transform_rel(args: &mut Args) -> Result<Outcome> {
    let t = args.real("T");
    let tuple = tuple_from(&args.complex_list("tuple"))?;
    let r = args.real("r");
    let tol = args.tol()?;
    let g = WeightSpec::gaussian_t(t)?;
    let xi = cx(0.0, r);
    let mut tally = Tally::default();
    let mut notes = Vec::new();
    for (name, tp) in [("tuple", tuple), ("p_half", FourTuple::P_HALF)] {
        for sign in [Sign::Plus, Sign::Minus] {
            let direct = phi_pm(sign, xi, &tp, &g, PhiMethod::Direct)?;
            let via = phi_pm(sign, xi, &tp, &g, PhiMethod::ViaXi)?;
            tally.record(rel_err(direct, via), || {
                format!("Φ{sign:?} direct vs via Ξ at {name}")
            });
            let bracket = g_bracket(sign, r, &tp, &g)?;
            let rhs = 0.5 * powc(2.0 * PI, one() + tp.u - tp.w) * direct;
            tally.record(rel_err(bracket, rhs), || {
                format!("[g]{sign:?} vs Φ{sign:?} at {name}")
            });
            if name == "p_half" {
                let half = g_bracket_at_half(sign, r, &g)?;
                tally.record(rel_err(bracket, half), || {
                    format!("[g]{sign:?} vs Ξ reconstruction")
                });
            }
            if name == "tuple" && sign == Sign::Plus {
                let alternative = direct * powc(2.0 * PI, tp.u - tp.v);
                notes.push(format!("with the prefactor (2π)^(w−v−2) the direct Φ₊ would differ from the Ξ relation by the factor {:.9}", alternative / via));
            }
        }
    }
    let plus = g_bracket_at_half(Sign::Plus, r, &g)?;
    let minus = g_bracket_at_half(Sign::Minus, r, &g)?;
    for eps in [1i8, -1] {
        let comb = g_bracket_combined(eps, r, &g)?;
        let sum = (plus + eps as f64 * minus).re;
        tally.record((comb - sum).abs() / sum.abs().max(1.0), || {
            format!("combined bracket ε={eps}")
        });
    }
    notes.push("errors are relative to max(1, |value|)".into());
    Ok(Outcome {
        tally,
        tol,
        n: None,
        seed: None,
        notes,
    })
}

fn moment_rearrange(args: &mut Args) -> Result<Outcome> {
    let t = args.real("T");
    let coeffs = args.complex_list("coeffs");
    let height = args.real("height");
    let tol = args.tol()?;
    let g = WeightSpec::gaussian_t(t)?;
    let rep = moment_quadrature(&g, &coeffs, height)?;
    let mut tally = Tally::default();
    tally.record(rep.difference, || "sum vs integral".into());
    Ok(Outcome {
        tally,
        tol,
        n: None,
        seed: None,
        notes: vec![format!(
            "via sum = {:.12}, direct = {:.12}, height used = {}, tail bound = {:.3e}",
            rep.via_sum, rep.direct, rep.height_used, rep.tail_bound
        )],
    })
}

fn dissect_j(args: &mut Args) -> Result<Outcome> {
    let a = args.uint("a");
    let b = args.uint("b");
    let t = args.real("T");
    let tuple = tuple_from(&args.complex_list("tuple"))?;
    let nmax = args.uint("N");
    let tol = args.tol()?;
    if a == 0 || b == 0 || gcd_u(a, b) != 1 {
        return Err(bad(format!(
            "a = {a}, b = {b} must be positive and coprime"
        )));
    }
    if nmax == 0 || nmax > 200 {
        return Err(bad(format!("N = {nmax} must lie in [1, 200]")));
    }
    let FourTuple { u, v, w, z } = tuple;
    if [u, v, w, z].iter().any(|x| x.re <= 5.0) {
        return Err(Error::DomainError(
            "exponents need Re > 5 for the truncation to be negligible".into(),
        ));
    }
    let g = WeightSpec::gaussian_t(t)?;
    let nm = nmax as usize;
    let ln: Vec<f64> = (0..=nm)
        .map(|k| if k == 0 { 0.0 } else { (k as f64).ln() })
        .collect();
    let table = |e: Complex64| -> Vec<Complex64> {
        (0..=nm)
            .map(|k| {
                if k == 0 {
                    cx(0.0, 0.0)
                } else {
                    powc(k as f64, -e)
                }
            })
            .collect()
    };
    let (pu, pv, pw, pz) = (table(u), table(v), table(w), table(z));
    let gh = |x: f64| ghat(&g, x).map(|c| c.re);
    // I: the full truncated quadruple sum
    let (lna, lnb) = ((a as f64).ln(), (b as f64).ln());
    let mut direct = cx(0.0, 0.0);
    for k in 1..=nm {
        for l in 1..=nm {
            let kl = pu[k] * pv[l];
            for m in 1..=nm {
                for n in 1..=nm {
                    direct += kl * pw[m] * pz[n] * gh(lnb + ln[l] + ln[n] - lna - ln[k] - ln[m])?;
                }
            }
        }
    }
    let mut tally = Tally::default();
    let (mut assembled, mut unconditioned) = (cx(0.0, 0.0), cx(0.0, 0.0));
    let g0 = gh(0.0)?;
    for cc in divisors(a) {
        for d in divisors(b) {
            let (lc, ld) = ((cc as f64).ln(), (d as f64).ln());
            let (mut j_all, mut j0, mut jp, mut jm) =
                (cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0));
            let mut j_full = cx(0.0, 0.0);
            for k in 1..=nm {
                for l in 1..=nm {
                    if gcd_u(cc * k as u64, d * l as u64) != 1 {
                        continue;
                    }
                    let full = gcd_u(a / cc, k as u64) == 1 && gcd_u(b / d, l as u64) == 1;
                    let kl = pu[k] * pv[l];
                    for m in 1..=nm {
                        for n in 1..=nm {
                            let term = kl * pw[m] * pz[n];
                            let left = cc * (k * m) as u64;
                            let right = d * (l * n) as u64;
                            let val = term * gh(ld + ln[l] + ln[n] - lc - ln[k] - ln[m])?;
                            j_all += val;
                            if full {
                                j_full += val;
                            }
                            match left.cmp(&right) {
                                std::cmp::Ordering::Equal => j0 += term * g0,
                                std::cmp::Ordering::Greater => jp += val,
                                std::cmp::Ordering::Less => jm += val,
                            }
                        }
                    }
                }
            }
            tally.record(rel_err(j_all, j0 + jp + jm), || {
                format!("J = J0 + J+ + J- at c={cc}, d={d}")
            });
            // J0 in closed form
            let sum = u + v + w + z;
            let mut closed = g0
                * powc(cc as f64, -z)
                * powc(d as f64, -w)
                * zeta(w + z)?
                * zeta(u + z)?
                * zeta(v + w)?
                / zeta(sum)?;
            for pr in prime_divisors(cc * d) {
                closed /= one() - powc(pr as f64, -sum);
            }
            for pr in prime_divisors(cc) {
                closed *= one() - powc(pr as f64, -(v + w));
            }
            for pr in prime_divisors(d) {
                closed *= one() - powc(pr as f64, -(u + z));
            }
            tally.record(rel_err(closed, j0), || {
                format!("J0 closed form at c={cc}, d={d}")
            });
            let weight = powc(cc as f64, v) * powc(d as f64, u);
            assembled += weight * j_full;
            unconditioned += weight * j_all;
        }
    }
    let pre = zeta(u + v)? * powc(a as f64, -v) * powc(b as f64, -u);
    assembled *= pre;
    unconditioned *= pre;
    tally.record(rel_err(direct, assembled), || {
        "quadruple sum vs divisor decomposition".into()
    });
    Ok(Outcome {
        tally,
        tol,
        n: Some(nm),
        seed: None,
        notes: vec![
            format!("I = {direct:.12}"),
            "in the divisor decomposition the inner sum for (c, d) also requires (a/c, k) = 1 and (b/d, l) = 1; J, J0, J± keep the condition (ck, dl) = 1 only".into(),
            format!("decomposition without the extra conditions differs from I by {:.6e}", rel_err(direct, unconditioned)),
            "errors are relative to max(1, |value|)".into(),
        ],
    })
}

fn hat_h_half(args: &mut Args) -> Result<Outcome> {
    let k = args.real("K");
    let gw = args.real("G");
    let tol = args.tol()?;
    let h = WeightSpec::gaussian_kg(k, gw)?;
    let v = hhat(cx(0.5, 0.0), &h)?;
    let mut tally = Tally::default();
    tally.record(v.norm(), || "|ĥ(1/2)|".into());
    Ok(Outcome {
        tally,
        tol,
        n: None,
        seed: None,
        notes: vec![format!("ĥ(1/2) = {v:e}")],
    })
}

fn psi_at_one(args: &mut Args) -> Result<Outcome> {
    let k = args.real("K");
    let gw = args.real("G");
    let eps = args.real("eps");
    let tol = args.tol()?;
    if !(eps > 0.0 && eps < 1e-3) {
        return Err(bad(format!("eps = {eps} must lie in (0, 1e-3)")));
    }
    let h = WeightSpec::gaussian_kg(k, gw)?;
    let at_one = psi_kernel(Sign::Minus, 1.0, &h, PsiMethod::Regime)?;
    let limit = psi_minus_above_one(eps, &h)?;
    let contour = psi_kernel(Sign::Minus, 1.0, &h, PsiMethod::Contour)?;
    let mut tally = Tally::default();
    tally.record((at_one - limit).abs(), || {
        format!("closed form vs x = 1 + {eps:e}")
    });
    tally.record((at_one - contour).abs(), || {
        "closed form vs Mellin–Barnes".into()
    });
    Ok(Outcome {
        tally,
        tol,
        n: None,
        seed: None,
        notes: vec![format!(
            "Ψ₋(1) = {at_one:.12}, limit = {limit:.12}, contour = {contour:.12}"
        )],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, Value)]) -> Params {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    fn check_default(id: &str) -> VerificationReport {
        let r = verify(id, &Params::new()).unwrap();
        assert!(r.pass, "{id}: {r:#?}");
        assert_eq!(r.pass, r.max_abs_error <= r.tol);
        r
    }

    #[test]
    fn registry_is_documented() {
        let ids: Vec<&str> = list_identities().iter().map(|i| i.id).collect();
        assert!(ids.contains(&"HURWITZ_SUM"));
        assert!(ids.contains(&"KLOOSTERMAN_CLOSED"));
        assert!(ids.len() >= 14);
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len(), "ids are unique");
        // every default parses under its declared kind
        for info in list_identities() {
            for spec in info.params {
                if !spec.default.is_empty() {
                    assert!(
                        parse_typed(spec.kind, &Value::String(spec.default.into())).is_some(),
                        "{}.{}",
                        info.id,
                        spec.name
                    );
                }
            }
        }
    }

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("2.5+1i"), Some(cx(2.5, 1.0)));
        assert_eq!(parse_complex("2.5+i"), Some(cx(2.5, 1.0)));
        assert_eq!(parse_complex("-0.7+3i"), Some(cx(-0.7, 3.0)));
        assert_eq!(parse_complex("0.3-2i"), Some(cx(0.3, -2.0)));
        assert_eq!(parse_complex("2.5,1"), Some(cx(2.5, 1.0)));
        assert_eq!(parse_complex("-2i"), Some(cx(0.0, -2.0)));
        assert_eq!(parse_complex("1e-3-1e-2j"), Some(cx(1e-3, -1e-2)));
        assert_eq!(parse_complex("1.5"), Some(cx(1.5, 0.0)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex(""), None);
    }

    #[test]
    fn unknown_id_and_bad_params() {
        assert!(matches!(
            verify("NO_SUCH", &Params::new()),
            Err(Error::UnknownIdentity(_))
        ));
        assert!(matches!(
            verify("HURWITZ_SUM", &params(&[("x", json!(1))])),
            Err(Error::InvalidParameters(_))
        ));
        assert!(matches!(
            verify("HURWITZ_SUM", &params(&[("q", json!("twelve"))])),
            Err(Error::InvalidParameters(_))
        ));
        assert!(matches!(
            verify("HURWITZ_SUM", &params(&[("q", json!(-3))])),
            Err(Error::InvalidParameters(_))
        ));
        assert!(matches!(
            verify("HURWITZ_SUM", &params(&[("s", json!("1+"))])),
            Err(Error::InvalidParameters(_))
        ));
        assert!(matches!(
            verify("EISEN_EN", &params(&[("form", json!("other"))])),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn hurwitz_example_and_param_forms() {
        let r = verify(
            "HURWITZ_SUM",
            &params(&[("q", json!(12)), ("m", json!(5)), ("s", json!("2.5+1i"))]),
        )
        .unwrap();
        assert!(r.pass && r.max_abs_error < 1e-7);
        let r2 = verify(
            "HURWITZ_SUM",
            &params(&[
                ("q", json!("12")),
                ("m", json!("5")),
                ("s", json!([2.5, 1.0])),
            ]),
        )
        .unwrap();
        assert_eq!(r.params, r2.params);
        assert_eq!(r.max_abs_error, r2.max_abs_error);
        assert_eq!(r.params["s"], json!([2.5, 1.0]));
        assert_eq!(r.params["tol"], json!(1e-7));
    }

    #[test]
    fn report_schema_order() {
        let r = verify("HAT_H_HALF", &Params::new()).unwrap();
        let mut flat = r.clone();
        flat.params = json!({});
        let text = serde_json::to_string(&flat).unwrap();
        let keys = [
            "\"id\"",
            "\"params\"",
            "\"N\"",
            "\"tol\"",
            "\"max_abs_error\"",
            "\"pass\"",
            "\"seed\"",
            "\"wall_ms\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
        let back: VerificationReport =
            serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn j0_euler_cd_one_example() {
        let r = verify(
            "J0_EULER",
            &params(&[("cd", json!(1)), ("N", json!(512)), ("draw", json!(0))]),
        )
        .unwrap();
        assert!(r.pass && r.max_abs_error < 1e-12, "{r:#?}");
        assert_eq!(r.params["a"], json!(1));
        assert_eq!(r.n, Some(512));
    }

    #[test]
    fn seeded_reports_are_reproducible() {
        let p = params(&[("N", json!(256)), ("seed", json!(7))]);
        let a = verify("GCD_SUM", &p).unwrap();
        let b = verify("GCD_SUM", &p).unwrap();
        assert_eq!(a.max_abs_error.to_bits(), b.max_abs_error.to_bits());
        assert_eq!(a.seed, Some(7));
        let c = verify("GCD_SUM", &params(&[("N", json!(256)), ("seed", json!(8))])).unwrap();
        assert_ne!(a.max_abs_error.to_bits(), c.max_abs_error.to_bits());
    }

    #[test]
    fn defaults_hurwitz() {
        check_default("HURWITZ_SUM");
    }
    #[test]
    fn defaults_j0_euler() {
        check_default("J0_EULER");
    }
    #[test]
    fn defaults_gcd_sum() {
        check_default("GCD_SUM");
    }
    #[test]
    fn defaults_ramanujan_conv() {
        check_default("RAMANUJAN_CONV");
    }
    #[test]
    fn defaults_zs_euler() {
        let r = check_default("ZS_EULER");
        assert!(r.notes.iter().any(|n| n.contains("unrestricted")));
    }
    #[test]
    fn defaults_eisen_en() {
        check_default("EISEN_EN");
        let r = verify(
            "EISEN_EN",
            &params(&[("form", json!("series")), ("q", json!(6))]),
        )
        .unwrap();
        assert!(r.pass, "{r:#?}");
        assert_eq!(r.tol, 1e-6);
    }
    #[test]
    fn defaults_eisen_phi() {
        check_default("EISEN_PHI");
    }
    #[test]
    fn defaults_xy_closed() {
        check_default("XY_CLOSED");
    }
    #[test]
    fn defaults_kloosterman() {
        check_default("KLOOSTERMAN_CLOSED");
        check_default("KLOOSTERMAN_SPECIAL");
        check_default("KLOOSTERMAN_FACT");
    }
    #[test]
    fn defaults_double_coset() {
        let r = check_default("DOUBLE_COSET");
        assert_eq!(r.max_abs_error, 0.0);
    }
    #[test]
    fn defaults_scatter_unitary() {
        check_default("SCATTER_UNITARY");
    }
    #[test]
    fn defaults_transform_rel() {
        check_default("TRANSFORM_REL");
    }
    #[test]
    fn defaults_moment_rearrange() {
        check_default("MOMENT_REARRANGE");
    }
    #[test]
    fn defaults_dissect_j() {
        let r = check_default("DISSECT_J");
        // dropping the coprimality conditions (a/c, k) = 1, (b/d, l) = 1 is visible
        let unconditioned: f64 = r
            .notes
            .iter()
            .find(|n| n.contains("without the extra"))
            .unwrap()
            .rsplit(' ')
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert!(unconditioned > 1e-5, "{unconditioned}");
        // at a = b = 1 the conditions are vacuous
        let r = verify(
            "DISSECT_J",
            &params(&[("a", json!(1)), ("b", json!(1)), ("N", json!(20))]),
        )
        .unwrap();
        assert!(r.pass, "{r:#?}");
    }
    #[test]
    fn defaults_hat_h_half() {
        check_default("HAT_H_HALF");
    }
    #[test]
    fn defaults_psi_at_one() {
        check_default("PSI_AT_ONE");
    }

    /// A deliberately wrong right-hand side must be detected: the literal
    /// (unrestricted) reading of the ZS product fails.
    #[test]
    fn detects_discrepancies() {
        let r = verify("ZS_EULER", &Params::new()).unwrap();
        let lit: f64 = r
            .notes
            .iter()
            .find(|n| n.contains("unrestricted"))
            .unwrap()
            .rsplit(' ')
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert!(lit > 1e-3);
        let r = verify("HURWITZ_SUM", &params(&[("tol", json!(0.0))])).unwrap();
        assert!(!r.pass || r.max_abs_error == 0.0);
    }
}
