//! Blocking pairs, individual rationality, and the lattice structure on
//! stable matchings.
//!
//! A matching is stable when it is individually rational (nobody is paired
//! with someone off their list) and no man and woman mutually prefer each
//! other to their assigned partners — being unmatched counts as worse than
//! any listed partner and better than any unlisted one.
//!
//! The stable matchings of a market form a distributive lattice under the
//! men's (equivalently, reversed women's) preference order:
//! [`lattice_combine`] computes the join (every man takes the better of his
//! two partners — which hands every woman the worse of hers) and the meet
//! (the mirror image). That both are again matchings, and again stable, is
//! a classical fact; this module re-verifies it on every call and treats a
//! violation as an internal defect, since both inputs were already checked.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::{Instance, ManId, Matching, WomanId};

/// Outcome of a stability check: the rationality flag and every blocking
/// pair, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityReport {
    pub individually_rational: bool,
    pub blocking: Vec<(ManId, WomanId)>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.individually_rational && self.blocking.is_empty()
    }
}

/// Check `mu` against the true lists of `inst`.
///
/// Panics if the matching was built for a different market size; that is a
/// programming error, not an input condition.
pub fn blocking_pairs(inst: &Instance, mu: &Matching) -> StabilityReport {
    assert_eq!(mu.n(), inst.n(), "matching size must equal the market size");
    let mut individually_rational = true;
    for (m, w) in mu.pairs() {
        if inst.man_rank(m, w).is_none() || inst.woman_rank(w, m).is_none() {
            individually_rational = false;
        }
    }
    let mut blocking = Vec::new();
    for m in inst.men() {
        for &w in inst.man_list(m) {
            if inst.man_improves(m, Some(w), mu.wife_of(m))
                && inst.woman_improves(w, Some(m), mu.husband_of(w))
            {
                blocking.push((m, w));
            }
        }
    }
    blocking.sort();
    StabilityReport {
        individually_rational,
        blocking,
    }
}

/// Convenience: stable ⇔ individually rational and no blocking pair.
pub fn is_stable(inst: &Instance, mu: &Matching) -> bool {
    blocking_pairs(inst, mu).is_stable()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeOp {
    /// Men-better / women-worse combination.
    Join,
    /// Men-worse / women-better combination.
    Meet,
}

fn require_stable(inst: &Instance, mu: &Matching) -> Result<()> {
    let report = blocking_pairs(inst, mu);
    if report.is_stable() {
        Ok(())
    } else {
        Err(Error::UnstableInput {
            individually_rational: report.individually_rational,
            blocking: report.blocking,
        })
    }
}

/// Join or meet of two stable matchings. Both inputs must be stable under
/// the true lists; the combination is built man-by-man and the structural
/// and stability guarantees are re-verified before returning.
pub fn lattice_combine(
    mu1: &Matching,
    mu2: &Matching,
    inst: &Instance,
    op: LatticeOp,
) -> Result<Matching> {
    require_stable(inst, mu1)?;
    require_stable(inst, mu2)?;
    let mut chosen: Vec<(ManId, WomanId)> = Vec::new();
    for m in inst.men() {
        let a = mu1.wife_of(m);
        let b = mu2.wife_of(m);
        let pick = match (a, b) {
            (None, None) => None,
            (Some(_), None) | (None, Some(_)) => {
                // Stable matchings of one market share their set of
                // unmatched agents, so this cannot happen for validated
                // inputs.
                return Err(Error::Internal(format!(
                    "stable inputs disagree on whether {m} is matched"
                )));
            }
            (Some(wa), Some(wb)) => {
                let a_better = inst.man_improves(m, Some(wa), Some(wb));
                let better = if a_better { wa } else { wb };
                let worse = if a_better { wb } else { wa };
                Some(match op {
                    LatticeOp::Join => better,
                    LatticeOp::Meet => worse,
                })
            }
        };
        if let Some(w) = pick {
            chosen.push((m, w));
        }
    }
    let combined = Matching::from_pairs(inst.n(), &chosen)
        .map_err(|e| Error::Internal(format!("lattice combination is not a matching: {e}")))?;
    let report = blocking_pairs(inst, &combined);
    if !report.is_stable() {
        return Err(Error::Internal(format!(
            "lattice combination of stable matchings is unstable: {}",
            Error::UnstableInput {
                individually_rational: report.individually_rational,
                blocking: report.blocking,
            }
        )));
    }
    Ok(combined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gs::{gale_shapley, Side};
    use crate::testkit::{fix_d1, fix_d2, fix_t1, pairs};

    #[test]
    fn gs_output_is_stable() {
        for inst in [fix_t1(), fix_d1(), fix_d2()] {
            let (mu, _) = gale_shapley(&inst, None, Side::Men).unwrap();
            let report = blocking_pairs(&inst, &mu);
            assert!(report.is_stable());
        }
    }

    #[test]
    fn partner_swap_is_blocked() {
        // Swapping w1's and w2's partners out of the unique stable matching
        // founders on (m1, w3).
        let inst = fix_d2();
        let mu = pairs(3, &[(1, 2), (2, 1), (3, 3)]);
        let report = blocking_pairs(&inst, &mu);
        assert!(report.individually_rational);
        assert_eq!(report.blocking, vec![(ManId(1), WomanId(3))]);
    }

    #[test]
    fn joint_worse_matching_reports_its_blocks() {
        let inst = fix_d1();
        let mu = pairs(4, &[(1, 1), (2, 3), (3, 2), (4, 4)]);
        let report = blocking_pairs(&inst, &mu);
        assert!(report.blocking.contains(&(ManId(2), WomanId(1))));
        assert_eq!(
            report.blocking,
            vec![(ManId(2), WomanId(1)), (ManId(4), WomanId(2))]
        );
    }

    #[test]
    fn unlisted_partner_breaks_rationality() {
        // w3 does not list m2.
        let inst = fix_d2();
        let mu = pairs(3, &[(1, 1), (2, 3)]);
        let report = blocking_pairs(&inst, &mu);
        assert!(!report.individually_rational);
    }

    #[test]
    fn join_hands_each_man_his_better_partner() {
        let inst = fix_t1();
        let mu1 = pairs(6, &[(1, 5), (2, 2), (3, 4), (4, 3), (5, 1), (6, 6)]);
        let mu2 = pairs(6, &[(1, 1), (2, 6), (3, 4), (4, 3), (5, 5), (6, 2)]);
        let join = lattice_combine(&mu1, &mu2, &inst, LatticeOp::Join).unwrap();
        assert_eq!(
            join,
            pairs(6, &[(1, 1), (2, 2), (3, 4), (4, 3), (5, 5), (6, 6)])
        );
        let meet = lattice_combine(&mu1, &mu2, &inst, LatticeOp::Meet).unwrap();
        let (women_best, _) = gale_shapley(&inst, None, Side::Women).unwrap();
        assert_eq!(meet, women_best);
    }

    #[test]
    fn meet_of_the_two_coalition_outcomes_is_the_women_optimum() {
        let inst = fix_d1();
        let mu_a = pairs(4, &[(1, 4), (2, 3), (3, 1), (4, 2)]);
        let mu_b = pairs(4, &[(1, 2), (2, 1), (3, 3), (4, 4)]);
        let meet = lattice_combine(&mu_a, &mu_b, &inst, LatticeOp::Meet).unwrap();
        let (women_best, _) = gale_shapley(&inst, None, Side::Women).unwrap();
        assert_eq!(meet, women_best);
        assert_eq!(meet, pairs(4, &[(1, 2), (2, 3), (3, 1), (4, 4)]));
    }

    #[test]
    fn join_meet_laws() {
        let inst = fix_t1();
        let mu1 = pairs(6, &[(1, 5), (2, 2), (3, 4), (4, 3), (5, 1), (6, 6)]);
        let mu2 = pairs(6, &[(1, 1), (2, 6), (3, 4), (4, 3), (5, 5), (6, 2)]);
        // Idempotent, commutative.
        for op in [LatticeOp::Join, LatticeOp::Meet] {
            assert_eq!(lattice_combine(&mu1, &mu1, &inst, op).unwrap(), mu1);
            assert_eq!(
                lattice_combine(&mu1, &mu2, &inst, op).unwrap(),
                lattice_combine(&mu2, &mu1, &inst, op).unwrap()
            );
        }
    }

    #[test]
    fn unstable_input_is_refused() {
        let inst = fix_d1();
        let stable = pairs(4, &[(1, 4), (2, 1), (3, 3), (4, 2)]);
        let unstable = pairs(4, &[(1, 1), (2, 3), (3, 2), (4, 4)]);
        let err = lattice_combine(&stable, &unstable, &inst, LatticeOp::Join).unwrap_err();
        assert!(matches!(err, Error::UnstableInput { .. }));
    }
}
