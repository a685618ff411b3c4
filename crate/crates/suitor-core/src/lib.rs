//! Algorithms for one-to-one stable matching markets where a coalition of
//! women may misreport their preference lists.
//!
//! The crate is organized around one pipeline:
//!
//! * [`instance`] — market model: preference lists, matchings, stated-list
//!   overlays for the manipulating coalition.
//! * [`gs`] — deferred acceptance (proposal algorithm) with a full,
//!   deterministic proposal trace.
//! * [`stability`] — blocking pairs, individual rationality, and the
//!   join/meet structure on the set of stable matchings.
//! * [`rotations`] — reduced preference tables, rotation discovery and
//!   elimination, and the precedence order whose downward-closed sets are in
//!   one-to-one correspondence with the stable matchings.
//! * [`feasibility`] — the suitor graph: which stable matchings the coalition
//!   can actually induce by misreporting, and how to synthesize stated lists
//!   that induce a chosen one.
//! * [`strategy`] — manipulation constructions: truncation equilibria,
//!   Pareto-optimal permutation manipulations, inconspicuous rewrites.
//! * [`oracle`] — independent brute-force ground truth for small markets:
//!   exhaustive stable-set enumeration, feasible sets per manipulation type,
//!   Pareto checks, and equilibrium verification. Deliberately implemented
//!   from definitions, not by calling the fast path.
//! * [`hardness`] — a 3-CNF → market generator whose strictly-better
//!   manipulation question encodes satisfiability, plus the maps between
//!   assignments and matchings.
//!
//! Everything is a pure function over immutable values; the crate is
//! `no_std` (with `alloc`) and does no IO. Determinism is load-bearing
//! throughout: identical inputs produce identical outputs, byte for byte,
//! which the test suite relies on when diffing fast-path results against the
//! oracles.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
#[cfg(any(test, feature = "testkit"))]
pub mod testkit;
pub mod feasibility;
pub mod gs;
pub mod hardness;
pub mod instance;
pub mod oracle;
pub mod rotations;
pub mod stability;
pub mod strategy;

pub use error::{Error, Result};
pub use instance::{Instance, ManId, Matching, StrategyProfile, WomanId};
