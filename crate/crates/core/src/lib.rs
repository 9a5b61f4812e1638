//! Oriented-edge reinforced random walks and random walks in i.i.d. Dirichlet
//! environment on `Z^d`.
//!
//! The crate is `no_std` (it needs `alloc`). It carries the pure parts of the
//! toolkit:
//!
//! * [`model`]: step sets, weight systems, mean drift.
//! * [`lattice`]: exact integer geometry of a rational direction `u`
//!   (kernel basis, entry set, entry measure, flux).
//! * [`dirichlet`]: Dirichlet simplices and lazily generated i.i.d.
//!   environments keyed on `(seed, site)`.
//! * [`walk`]: urn-reinforced and quenched trajectories, hitting times.
//! * [`graph`] and [`cylinder`]: weighted digraphs, the divergence-free
//!   cylinder graph with its two extra vertices, graph reversal.
//! * [`oracle`]: exact path probabilities, cycle reversal checks, absorption
//!   probabilities, invariant measures and environment reversal.
//!
//! Weights are exact rationals everywhere an identity is meant to hold
//! exactly; floating point only enters when sampling or solving quenched
//! linear systems.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense linear algebra reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cylinder;
pub mod dirichlet;
mod error;
pub mod graph;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod walk;

pub use error::{Error, Result};

/// Exact rational number used for weights and identities.
pub type Rational = num_rational::BigRational;

/// A point of `Z^d`.
pub type Site = alloc::vec::Vec<i64>;
