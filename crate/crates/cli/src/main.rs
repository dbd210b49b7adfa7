//! `hecke`: cusp tables, Kloosterman sums, Eisenstein data, scattering
//! matrices, twisted fourth moments and identity verification for Γ₀(q).
//!
//! Every command prints an envelope `{command, params, format, payload}` as
//! JSON, or its table as CSV with a header row. Complex numbers are `[re, im]`
//! pairs in JSON and two columns in CSV.
//!
//! Exit codes: 0 success, 1 computation error or failed verification,
//! 2 invalid arguments.

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hecke_core::arith::gcd;
use hecke_core::eisenstein::{
    eisen_coeff, eisen_fourier_coefficient, eisen_phi, scattering_matrix, unitarity_residual,
};
use hecke_core::identities::{list_identities, parse_complex, verify, Params, VerificationReport};
use hecke_core::kloosterman::{
    general_kloosterman_bruteforce, general_kloosterman_squarefree, kloosterman_factorize,
    GenKloostermanSpec,
};
use hecke_core::matgroup::{canonicalize_cusp, enumerate_cusps, scaling_data, Convention, Cusp};
use hecke_core::transforms::{moment_quadrature, WeightSpec};
use hecke_core::{Complex64, Error};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Enumeration over the double-coset representatives.
    Brute,
    /// Closed form for square-free levels (shifted convention).
    Closed,
    /// Local × ordinary factorisation (plain convention).
    Factor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Plain,
    Shifted,
}

#[derive(Debug, Parser)]
#[command(
    name = "hecke",
    version,
    about = "Arithmetic of the Hecke congruence subgroups Γ₀(q)"
)]
struct Cli {
    /// Output format.
    #[arg(
        long,
        global = true,
        value_enum,
        env = "HECKE_FORMAT",
        default_value = "json"
    )]
    format: Format,
    /// Tolerance overriding the defaults of `verify` / `verify-all`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Truncation length overriding the default `N` of `verify` / `verify-all`.
    #[arg(long, global = true)]
    trunc: Option<u64>,
    /// Record wall-clock times in verification reports (otherwise `wall_ms`
    /// is 0 and output is reproducible byte for byte).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Canonical cusps of Γ₀(q) with widths and ϖ matrices.
    Cusps {
        /// Level.
        q: u64,
    },
    /// Kloosterman sums between two cusps for modulus indices 1..=cmax.
    #[command(allow_negative_numbers = true)]
    Kloosterman {
        /// Level.
        q: u64,
        /// First frequency.
        m: i64,
        /// Second frequency.
        n: i64,
        /// The two cusps, as denominators `w1,w2` (numerator 1) or `u1/w1,u2/w2`.
        #[arg(long)]
        cusps: String,
        /// Largest modulus index.
        #[arg(long)]
        cmax: u64,
        /// Evaluation route: brute force, the square-free closed form, or the factorisation.
        #[arg(long, value_enum, default_value = "brute")]
        method: Method,
        /// Scaling convention for `--method brute`.
        #[arg(long, value_enum, default_value = "plain")]
        convention: ConventionArg,
    },
    /// Constant-term coefficient φ(s; w1, w2), or the n-th Fourier coefficient.
    #[command(allow_negative_numbers = true)]
    Eisenstein {
        /// Square-free level.
        q: u64,
        /// Denominator of the cusp 1/w1 of the series.
        w1: u64,
        /// Denominator of the cusp 1/w2 of the expansion.
        w2: u64,
        /// The point s as `RE,IM` or `RE+IMi`.
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        /// Fourier index; omitted for the constant term.
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i64>,
    },
    /// Scattering matrix at s and its unitarity residual.
    Scattering {
        /// Square-free level.
        q: u64,
        /// The point s as `RE,IM` or `RE+IMi`.
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
    /// Run one identity verification.
    Verify {
        /// Identity id, see `hecke list`.
        id: String,
        /// Parameter `key=value` (repeatable).
        #[arg(long = "param", value_name = "KEY=VALUE", allow_hyphen_values = true)]
        params: Vec<String>,
        /// Seed for the random parameter draws.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every registered verification (optionally filtered by id substring).
    VerifyAll {
        /// Only ids containing this substring.
        #[arg(long)]
        filter: Option<String>,
        /// Seed for identities with random draws.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// The twisted fourth moment of ζ with A(s) = Σ a_n n^{−s}, by two quadratures.
    Moment {
        /// Width of the Gaussian weight.
        #[arg(long = "T")]
        t: f64,
        /// Coefficients a1,a2,… (real or complex `a+bi`).
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        /// Cap on the integration height.
        #[arg(long, default_value_t = 400.0)]
        height: f64,
    },
    /// List the registered identities and their parameters.
    List,
}

/// A failure, split by exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameters(_) | Error::UnknownIdentity(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Compute(other.to_string()),
        }
    }
}

/// A command's result: the JSON payload, its table form, and whether the
/// command succeeded (verifications may complete but fail).
struct Output {
    command: &'static str,
    params: Value,
    payload: Value,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    ok: bool,
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn complex_arg(name: &str, text: &str) -> Result<Complex64, Failure> {
    parse_complex(text).ok_or_else(|| {
        Failure::Usage(format!(
            "--{name}: cannot parse '{text}' as a complex number"
        ))
    })
}

fn parse_cusp(q: u64, text: &str) -> Result<Cusp, Failure> {
    let bad = || Failure::Usage(format!("cannot parse cusp '{text}' (expected w or u/w)"));
    let (u, w) = match text.split_once('/') {
        Some((u, w)) => (
            u.trim().parse::<i64>().map_err(|_| bad())?,
            w.trim().parse::<i64>().map_err(|_| bad())?,
        ),
        None => (1, text.trim().parse::<i64>().map_err(|_| bad())?),
    };
    if w <= 0 {
        return Err(Failure::Usage(format!(
            "cusp denominator must be positive, got {w}"
        )));
    }
    Ok(canonicalize_cusp((u, w), q))
}

fn cusps_cmd(q: u64) -> Result<Output, Failure> {
    if q == 0 {
        return Err(Failure::Usage("level must be positive".into()));
    }
    let mut payload = Vec::new();
    let mut rows = Vec::new();
    for cusp in enumerate_cusps(q) {
        let m = scaling_data(&cusp, Convention::Plain)?.pi_matrix;
        payload.push(json!({
            "cusp": cusp.to_string(), "u": cusp.u, "w": cusp.w, "width": cusp.width(),
            "matrix": [[m.a, m.b], [m.c, m.d]],
        }));
        rows.push(vec![
            cusp.to_string(),
            cusp.u.to_string(),
            cusp.w.to_string(),
            cusp.width().to_string(),
            m.a.to_string(),
            m.b.to_string(),
            m.c.to_string(),
            m.d.to_string(),
        ]);
    }
    Ok(Output {
        command: "cusps",
        params: json!({ "q": q }),
        payload: Value::Array(payload),
        header: vec!["cusp", "u", "w", "width", "a", "b", "c", "d"],
        rows,
        ok: true,
    })
}

#[allow(clippy::too_many_arguments)]
fn kloosterman_cmd(
    q: u64,
    m: i64,
    n: i64,
    cusps: &str,
    cmax: u64,
    method: Method,
    convention: ConventionArg,
) -> Result<Output, Failure> {
    if q == 0 {
        return Err(Failure::Usage("level must be positive".into()));
    }
    let parts: Vec<&str> = cusps.split(',').collect();
    let [ca, cb] = parts[..] else {
        return Err(Failure::Usage(format!(
            "--cusps needs two cusps, got '{cusps}'"
        )));
    };
    let (ca, cb) = (parse_cusp(q, ca)?, parse_cusp(q, cb)?);
    let convention = match (method, convention) {
        (Method::Closed, _) | (Method::Brute, ConventionArg::Shifted) => Convention::Shifted,
        _ => Convention::Plain,
    };
    let mut payload = Vec::new();
    let mut rows = Vec::new();
    for c in 1..=cmax {
        let value = match method {
            Method::Brute => {
                let spec = GenKloostermanSpec {
                    q,
                    cusp_a: ca,
                    cusp_b: cb,
                    convention,
                    m,
                    n,
                    c_index: c,
                };
                general_kloosterman_bruteforce(&spec)?
            }
            Method::Closed => {
                if ca.u != 1 || cb.u != 1 {
                    return Err(Failure::Usage(
                        "the closed form needs cusps 1/w1, 1/w2 of a square-free level".into(),
                    ));
                }
                let g = gcd(ca.w as i64, cb.w as i64) as u64;
                if c % g != 0 {
                    continue;
                }
                match general_kloosterman_squarefree(q, ca.w, cb.w, m, n, c / g) {
                    Ok(v) => v,
                    Err(Error::InvalidModulus(_)) => continue,
                    Err(e) => return Err(e.into()),
                }
            }
            Method::Factor => kloosterman_factorize(q, &ca, &cb, m, n, c)?.product(),
        };
        payload.push(json!({ "c": c, "value": cjson(value), "abs": value.norm() }));
        rows.push(vec![
            c.to_string(),
            value.re.to_string(),
            value.im.to_string(),
            value.norm().to_string(),
        ]);
    }
    let method_name = match method {
        Method::Brute => "brute",
        Method::Closed => "closed",
        Method::Factor => "factor",
    };
    let conv_name = if convention == Convention::Plain {
        "plain"
    } else {
        "shifted"
    };
    Ok(Output {
        command: "kloosterman",
        params: json!({
            "q": q, "m": m, "n": n, "cusps": [ca.to_string(), cb.to_string()], "cmax": cmax,
            "method": method_name, "convention": conv_name,
        }),
        payload: Value::Array(payload),
        header: vec!["c", "re", "im", "abs"],
        rows,
        ok: true,
    })
}

fn eisenstein_cmd(q: u64, w1: u64, w2: u64, s: &str, n: Option<i64>) -> Result<Output, Failure> {
    let s = complex_arg("s", s)?;
    let (payload, rows) = match n {
        None => {
            let phi = eisen_phi(s, q, w1, w2)?;
            (
                json!({ "phi": cjson(phi) }),
                vec![vec![
                    "phi".to_string(),
                    phi.re.to_string(),
                    phi.im.to_string(),
                ]],
            )
        }
        Some(n) => {
            let bracket = eisen_coeff(n, s, q, w1, w2)?;
            let full = eisen_fourier_coefficient(n, s, q, w1, w2)?;
            (
                json!({ "n": n, "dirichlet_series": cjson(bracket), "coefficient": cjson(full) }),
                vec![
                    vec![
                        "dirichlet_series".to_string(),
                        bracket.re.to_string(),
                        bracket.im.to_string(),
                    ],
                    vec![
                        "coefficient".to_string(),
                        full.re.to_string(),
                        full.im.to_string(),
                    ],
                ],
            )
        }
    };
    Ok(Output {
        command: "eisenstein",
        params: json!({ "q": q, "w1": w1, "w2": w2, "s": cjson(s), "n": n }),
        payload,
        header: vec!["quantity", "re", "im"],
        rows,
        ok: true,
    })
}

fn scattering_cmd(q: u64, s: &str) -> Result<Output, Failure> {
    let s = complex_arg("s", s)?;
    let mat = scattering_matrix(s, q)?;
    let residual = unitarity_residual(s, q)?;
    let mut rows = Vec::new();
    for (i, w1) in mat.order.iter().enumerate() {
        for (j, w2) in mat.order.iter().enumerate() {
            let z = mat.entries[i][j];
            rows.push(vec![
                w1.to_string(),
                w2.to_string(),
                z.re.to_string(),
                z.im.to_string(),
                residual.to_string(),
            ]);
        }
    }
    Ok(Output {
        command: "scattering",
        params: json!({ "q": q, "s": cjson(s) }),
        payload: json!({ "matrix": mat.to_json(), "unitarity_residual": residual }),
        header: vec!["w1", "w2", "re", "im", "unitarity_residual"],
        rows,
        ok: true,
    })
}

/// Parameters of one verification, with the global overrides applied where
/// the identity has the corresponding parameter and it was not set explicitly.
fn verify_params(
    id: &str,
    given: &[String],
    seed: Option<u64>,
    cli: &Cli,
) -> Result<Params, Failure> {
    let info = list_identities()
        .iter()
        .find(|i| i.id == id)
        .ok_or_else(|| Failure::Usage(Error::UnknownIdentity(id.to_string()).to_string()))?;
    let has = |name: &str| info.params.iter().any(|p| p.name == name);
    let mut params = Params::new();
    for item in given {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--param expects KEY=VALUE, got '{item}'")))?;
        params.insert(k.trim().to_string(), Value::String(v.trim().to_string()));
    }
    if let Some(seed) = seed {
        if !has("seed") {
            return Err(Failure::Usage(format!("{id} takes no seed")));
        }
        params.insert("seed".into(), json!(seed));
    }
    if let Some(tol) = cli.tol {
        if has("tol") && !params.contains_key("tol") {
            params.insert("tol".into(), json!(tol));
        }
    }
    if let Some(n) = cli.trunc {
        if has("N") && !params.contains_key("N") {
            params.insert("N".into(), json!(n));
        }
    }
    Ok(params)
}

fn report_row(r: &VerificationReport) -> Vec<String> {
    vec![
        r.id.clone(),
        r.n.map_or(String::new(), |n| n.to_string()),
        r.tol.to_string(),
        r.max_abs_error.to_string(),
        r.pass.to_string(),
        r.seed.map_or(String::new(), |s| s.to_string()),
        r.wall_ms.to_string(),
    ]
}

const REPORT_HEADER: [&str; 7] = ["id", "N", "tol", "max_abs_error", "pass", "seed", "wall_ms"];

fn run_verification(id: &str, params: &Params, timing: bool) -> Result<VerificationReport, Error> {
    let mut r = verify(id, params)?;
    if !timing {
        r.wall_ms = 0;
    }
    Ok(r)
}

fn verify_cmd(id: &str, given: &[String], seed: Option<u64>, cli: &Cli) -> Result<Output, Failure> {
    let params = verify_params(id, given, seed, cli)?;
    let report = run_verification(id, &params, cli.timing)?;
    Ok(Output {
        command: "verify",
        params: json!({ "id": id, "params": params }),
        payload: serde_json::to_value(&report).expect("report serialises"),
        header: REPORT_HEADER.to_vec(),
        rows: vec![report_row(&report)],
        ok: report.pass,
    })
}

fn verify_all_cmd(filter: Option<&str>, seed: Option<u64>, cli: &Cli) -> Result<Output, Failure> {
    let infos: Vec<_> = list_identities()
        .iter()
        .filter(|i| filter.is_none_or(|f| i.id.contains(f)))
        .collect();
    let mut jobs = Vec::new();
    for info in &infos {
        let has_seed = info.params.iter().any(|p| p.name == "seed");
        jobs.push((
            info.id,
            verify_params(info.id, &[], seed.filter(|_| has_seed), cli)?,
        ));
    }
    // independent verifications fan out; results are assembled in registry order
    let results: Vec<Result<VerificationReport, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(id, params)| scope.spawn(move || run_verification(id, params, cli.timing)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verification thread panicked"))
            .collect()
    });
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let (mut passed, mut failed) = (0usize, 0usize);
    for ((id, _), res) in jobs.iter().zip(results) {
        match res {
            Ok(r) => {
                if r.pass {
                    passed += 1;
                } else {
                    failed += 1;
                }
                rows.push(report_row(&r));
                reports.push(serde_json::to_value(&r).expect("report serialises"));
            }
            Err(e) => {
                failed += 1;
                rows.push(vec![
                    id.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "false".into(),
                    String::new(),
                    String::new(),
                ]);
                reports.push(json!({ "id": id, "error": e.to_string(), "pass": false }));
            }
        }
    }
    Ok(Output {
        command: "verify-all",
        params: json!({ "filter": filter, "seed": seed }),
        payload: json!({ "reports": reports, "passed": passed, "failed": failed, "all_pass": failed == 0 }),
        header: REPORT_HEADER.to_vec(),
        rows,
        ok: failed == 0,
    })
}

fn moment_cmd(t: f64, coeffs: &str, height: f64) -> Result<Output, Failure> {
    let alpha = coeffs
        .split(',')
        .map(|c| {
            parse_complex(c).ok_or_else(|| Failure::Usage(format!("--coeffs: cannot parse '{c}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let weight = WeightSpec::gaussian_t(t)?;
    let rep = moment_quadrature(&weight, &alpha, height)?;
    Ok(Output {
        command: "moment",
        params: json!({ "T": t, "coeffs": alpha.iter().map(|z| cjson(*z)).collect::<Vec<_>>(), "height": height }),
        payload: json!({
            "via_sum": rep.via_sum, "direct": rep.direct, "difference": rep.difference,
            "height_used": rep.height_used, "tail_bound": rep.tail_bound,
        }),
        header: vec![
            "via_sum",
            "direct",
            "difference",
            "height_used",
            "tail_bound",
        ],
        rows: vec![vec![
            rep.via_sum.to_string(),
            rep.direct.to_string(),
            rep.difference.to_string(),
            rep.height_used.to_string(),
            rep.tail_bound.to_string(),
        ]],
        ok: true,
    })
}

fn list_cmd() -> Output {
    let infos = list_identities();
    Output {
        command: "list",
        params: json!({}),
        payload: serde_json::to_value(infos).expect("registry serialises"),
        header: vec!["id", "statement", "params"],
        rows: infos
            .iter()
            .map(|i| {
                vec![
                    i.id.to_string(),
                    i.statement.to_string(),
                    i.params
                        .iter()
                        .map(|p| p.name)
                        .collect::<Vec<_>>()
                        .join(";"),
                ]
            })
            .collect(),
        ok: true,
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Cusps { q } => cusps_cmd(*q),
        Command::Kloosterman {
            q,
            m,
            n,
            cusps,
            cmax,
            method,
            convention,
        } => kloosterman_cmd(*q, *m, *n, cusps, *cmax, *method, *convention),
        Command::Eisenstein { q, w1, w2, s, n } => eisenstein_cmd(*q, *w1, *w2, s, *n),
        Command::Scattering { q, s } => scattering_cmd(*q, s),
        Command::Verify { id, params, seed } => verify_cmd(id, params, *seed, cli),
        Command::VerifyAll { filter, seed } => verify_all_cmd(filter.as_deref(), *seed, cli),
        Command::Moment { t, coeffs, height } => moment_cmd(*t, coeffs, *height),
        Command::List => Ok(list_cmd()),
    }
}

fn emit(out: &Output, format: Format) -> std::io::Result<()> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match format {
        Format::Json => {
            let envelope = json!({ "command": out.command, "params": out.params, "format": "json", "payload": out.payload });
            serde_json::to_writer_pretty(&mut lock, &envelope)?;
            writeln!(lock)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(lock);
            w.write_record(&out.header)?;
            for row in &out.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&out, cli.format) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try 'hecke --help'.");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
