//! Computational toolkit for the Hecke congruence subgroups Γ₀(q).
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`] — exact integer and multiplicative-function primitives;
//! * [`matgroup`] — cusps, scaling matrices, Bruhat cells and double cosets;
//! * [`kloosterman`] — ordinary and cusp-pair Kloosterman sums;
//! * [`dirichlet`] — truncated Dirichlet-series coefficient arithmetic;
//! * [`specfun`] — complex Γ, ζ, Hurwitz ζ, Bessel functions;
//! * [`eisenstein`] — Eisenstein Fourier coefficients and scattering matrices;
//! * [`transforms`] — Mellin–Barnes weight transforms, Bessel kernels and the
//!   twisted fourth-moment quadrature;
//! * [`identities`] — a registry of named identity verifications with
//!   machine-readable reports.
//!
//! Every closed form in the crate is paired with an independent oracle
//! (brute force, direct summation or a second integral representation) in
//! the test suites.
//!
//! ```
//! use hecke_core::identities::{verify, Params};
//! use hecke_core::kloosterman::ordinary_kloosterman;
//! use hecke_core::matgroup::enumerate_cusps;
//!
//! assert_eq!(enumerate_cusps(36).len(), 12);
//! let s = ordinary_kloosterman(1, 1, 5);
//! assert!((s.re - 0.381966).abs() < 1e-6);
//!
//! let mut params = Params::new();
//! params.insert("q".into(), 30.into());
//! let report = verify("SCATTER_UNITARY", &params)?;
//! assert!(report.pass);
//! # Ok::<(), hecke_core::Error>(())
//! ```

pub mod arith;
pub mod dirichlet;
pub mod eisenstein;
pub mod error;
pub mod identities;
pub mod kloosterman;
pub mod matgroup;
pub mod quad;
pub mod specfun;
pub mod transforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;
