//! Finite towers of rational pseudometric spaces and their uniform direct
//! limit.
//!
//! A [`tower::Tower`] is a chain `X_0 ⊂ … ⊂ X_N` of finite pseudometric
//! spaces. On top of it the crate provides entourage arithmetic
//! ([`relation`]), the limit pseudometric of a monotone sequence
//! ([`limit`]), the u-lim topology and its ball base ([`topology`]), the
//! regularity criterion for continuity ([`regularity`]), products, group and
//! box towers ([`constructions`]), and a seeded checker that runs all of it
//! against brute-force references ([`oracle`], [`suite`]).
//!
//! All distances are exact rationals.

pub mod bits;
pub mod constructions;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod format;
pub mod generate;
pub mod limit;
pub mod oracle;
pub mod rational;
pub mod regularity;
pub mod relation;
pub mod suite;
pub mod topology;
pub mod tower;
