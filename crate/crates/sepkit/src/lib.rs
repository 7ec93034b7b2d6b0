//! Finite-dimensional variational-analysis toolkit.
//!
//! The crate answers quantitative questions about finite collections of
//! closed sets in `R^d`: how far apart can they be pushed (separation),
//! whether a common point is extremal or stationary for the collection,
//! and how strongly the collection resists perturbation (transversality).
//! Positive answers come with dual certificates — tuples of normal-cone
//! elements with verified residuals — and negative answers come with
//! budget-qualified search reports.
//!
//! Everything is built on three layers:
//!
//! * [`polysolve`] — a self-contained dense-simplex LP kernel plus
//!   polyhedral-cone operations (membership, intersection, distance,
//!   polarity) with certificates.
//! * [`norms`] / [`sets`] — norm evaluation and duality on product spaces,
//!   compatibility constants between a base norm and product norms, and
//!   set representations with normal/tangent cones.
//! * [`ekeland`] / [`separation`] / [`varcheck`] — the variational layer: a
//!   constructive descent principle, the separation pipeline producing dual
//!   certificates, and stationarity / transversality checkers.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the CLI
//! live in the companion crate `sepkit-cli`.
//!
//! # Determinism
//!
//! Every sampling routine takes an explicit seed and uses a counter-based
//! generator, so all results — including failure reports — are reproducible
//! byte for byte for a fixed (input, seed, version) triple.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod ekeland;
pub mod norms;
pub mod polysolve;
pub mod sample;
pub mod separation;
pub mod sets;
pub mod tol;
pub mod varcheck;
pub mod vector;

pub use tol::Tols;
pub use vector::Vector;
