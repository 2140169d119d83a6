//! Exact Hodge-theoretic invariants of complements of singular plane curves.
//!
//! Two independent pillars, joined at the end:
//!
//! * a combinatorial pillar ([`curve`], [`hodge`]) that evaluates
//!   Hodge-Deligne polynomials and graded Hodge filtration dimensions of
//!   `U = P^2 \ C` from per-point singularity data of the curve `C`;
//! * an algebraic pillar ([`poly`], [`linalg`], [`graded`]) that computes
//!   Hilbert functions of the graded Milnor algebra of a defining equation
//!   by exact or certified-modular rank computations.
//!
//! [`gap`] combines the pillars into the difference between the Hodge and
//! pole-order filtrations on `H^2(U)`, with all the bound checks that make
//! mismatched inputs detectable. Everything is exact integer/rational
//! arithmetic; there is no floating point in the crate.

pub mod curve;
pub mod gap;
pub mod graded;
pub mod hodge;
pub mod linalg;
pub mod poly;
pub mod synth;
