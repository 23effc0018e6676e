//! Necessary conditions for local algebraizability of rigid tube
//! submanifolds `v_k = φ_k(y)` of `C^n`, tested on exact truncated Taylor
//! data.
//!
//! The pipeline is: expand the defining functions ([`expr`]), find a
//! finite-nondegeneracy witness and build the derivative map `ψ`, invert it
//! formally and differentiate the inverse ([`cr`]), then look for polynomial
//! relations satisfied by each resulting entry ([`algdep`]). [`report`]
//! wraps the whole thing behind JSON problem files and verdict reports.

pub mod algdep;
pub mod cr;
pub mod expr;
pub mod report;
pub mod series;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
