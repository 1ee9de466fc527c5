//! Error taxonomy shared by every stage of the pipeline.
//!
//! The variants mirror the failure modes a caller can act on:
//!
//! * [`Error::InvalidWeight`] / [`Error::AtypicalWeight`] — the requested
//!   highest weight cannot label a generic induced module (construction is
//!   refused up front, before any numerics run);
//! * [`Error::OutOfDomain`] — the normal-ordering engine was asked to push a
//!   maximal-spin-bearing factor across a negative odd generator, which the
//!   engine deliberately refuses to do (no supported computation triggers it);
//! * [`Error::SingularBasis`] — the assembled change of basis failed its rank
//!   or duality guard;
//! * [`Error::DerivationFailure`] — the mechanical exchange-rule derivation
//!   could not produce a unique rule (would indicate an inconsistent rule
//!   request, not bad user input);
//! * [`Error::InvalidParams`] / [`Error::InvalidNorm`] — rejected
//!   configuration values.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the construction and verification pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// The weight signature is not even a candidate label: non-weakly-decreasing
    /// rows.
    #[error("invalid highest weight {weight:?}: {reason}")]
    InvalidWeight {
        /// The rejected signature [m13, m23, m33, m43].
        weight: [i64; 4],
        /// Human-readable reason.
        reason: String,
    },

    /// The weight is atypical for the generic construction: a bracket that the
    /// highest-vector formulas divide by vanishes.
    #[error("atypical weight {weight:?}: bracket of {argument} vanishes (needed nonzero by {context})")]
    AtypicalWeight {
        /// The rejected signature.
        weight: [i64; 4],
        /// Integer argument whose deformed bracket vanished.
        argument: i64,
        /// Which construction step needs it.
        context: String,
    },

    /// The engine was asked to commute a maximal-spin-bearing letter past a
    /// negative odd generator; this action is outside the supported domain.
    #[error("normal-ordering out of domain: letter {letter} cannot cross {blocker}")]
    OutOfDomain {
        /// The letter being pushed right.
        letter: String,
        /// The odd factor it would have to cross.
        blocker: String,
    },

    /// Change-of-basis assembly produced a numerically singular block.
    #[error("singular change of basis: {context} (worst residual {residual:.3e})")]
    SingularBasis {
        /// Which block or check failed.
        context: String,
        /// Observed residual or pivot magnitude.
        residual: f64,
    },

    /// The mechanical exchange-rule derivation failed.
    #[error("exchange-rule derivation failed for ({left}, {right}): {reason}")]
    DerivationFailure {
        /// Left letter of the requested exchange.
        left: String,
        /// Right letter of the requested exchange.
        right: String,
        /// What went wrong (no solution / non-unique solution).
        reason: String,
    },

    /// Deformation parameters outside the supported domain.
    #[error("invalid deformation parameters (p = {p}, q = {q}): {reason}")]
    InvalidParams {
        /// Offered p.
        p: f64,
        /// Offered q.
        q: f64,
        /// Why they are rejected.
        reason: String,
    },

    /// Rejected normalization configuration.
    #[error("invalid normalization choice: {0}")]
    InvalidNorm(String),
}
