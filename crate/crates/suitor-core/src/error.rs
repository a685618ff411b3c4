//! Crate-wide error type.
//!
//! The split that matters to callers: `BadInstance` / `BadProfile` /
//! `BadMatching` are input-validation failures; `UnstableInput`,
//! `NotExposed`, `NotClosed`, `Infeasible` are violated preconditions of
//! otherwise well-formed inputs; `TooLarge` / `BudgetExceeded` are resource
//! guards (a budgeted search that gives up is distinct from one that proves
//! "none exists"); `Internal` marks a broken internal postcondition — always
//! a defect in this crate, never a user error.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::feasibility::Node;
use crate::instance::{ManId, WomanId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Instance construction or validation failed.
    BadInstance(String),
    /// A strategy profile does not fit the instance it was applied to.
    BadProfile(String),
    /// A matching is structurally invalid for the instance.
    BadMatching(String),
    /// A truth assignment does not fit or satisfy the formula it was
    /// applied to.
    BadAssignment(String),
    /// A search selector made a choice outside the current candidate set.
    BadSelector(String),
    /// A matching required to be stable under the true lists is not;
    /// carries the witnesses.
    UnstableInput {
        individually_rational: bool,
        blocking: Vec<(ManId, WomanId)>,
    },
    /// The rotation is not exposed in the given reduced table.
    NotExposed,
    /// A rotation index outside the poset.
    UnknownRotation(usize),
    /// A rotation set that was required to be downward closed is not.
    NotClosed { missing: Vec<usize> },
    /// The target matching cannot be induced by the manipulator coalition;
    /// carries the suitor-graph nodes unreachable from the source.
    Infeasible { unreached: Vec<Node> },
    /// An input exceeds the bound a brute-force operation is guarded by.
    TooLarge {
        what: &'static str,
        limit: usize,
        actual: usize,
    },
    /// A budgeted search ran out of budget before reaching a definite
    /// answer; the result is indeterminate, not "none exists".
    BudgetExceeded { budget: u64 },
    /// An internal postcondition failed; a defect in this crate.
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BadInstance(msg) => write!(f, "invalid instance: {msg}"),
            Error::BadProfile(msg) => write!(f, "invalid strategy profile: {msg}"),
            Error::BadMatching(msg) => write!(f, "invalid matching: {msg}"),
            Error::BadAssignment(msg) => write!(f, "invalid assignment: {msg}"),
            Error::BadSelector(msg) => write!(f, "invalid selector choice: {msg}"),
            Error::UnstableInput {
                individually_rational,
                blocking,
            } => {
                write!(f, "matching is not stable under the true lists")?;
                if !individually_rational {
                    write!(f, "; not individually rational")?;
                }
                if !blocking.is_empty() {
                    write!(f, "; blocking pairs:")?;
                    for (m, w) in blocking {
                        write!(f, " ({m},{w})")?;
                    }
                }
                Ok(())
            }
            Error::NotExposed => write!(f, "rotation is not exposed in the current table"),
            Error::UnknownRotation(i) => write!(f, "no rotation with index {i}"),
            Error::NotClosed { missing } => {
                write!(f, "rotation set is not downward closed; missing predecessors:")?;
                for i in missing {
                    write!(f, " {i}")?;
                }
                Ok(())
            }
            Error::Infeasible { unreached } => {
                write!(
                    f,
                    "matching cannot be induced by the manipulators; unreachable from s:"
                )?;
                for node in unreached {
                    write!(f, " {node}")?;
                }
                Ok(())
            }
            Error::TooLarge {
                what,
                limit,
                actual,
            } => write!(f, "{what} is {actual}, above the supported bound {limit}"),
            Error::BudgetExceeded { budget } => {
                write!(f, "search budget of {budget} nodes exhausted; result indeterminate")
            }
            Error::Internal(msg) => write!(f, "internal invariant violated (defect): {msg}"),
        }
    }
}

impl core::error::Error for Error {}
