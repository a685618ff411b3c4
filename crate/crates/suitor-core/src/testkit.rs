//! Shared builders for unit tests: compact constructors and the four
//! bundled reference markets used throughout the suite (the same four ship
//! as files with the CLI crate).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::instance::{Instance, ManId, Matching, StrategyProfile, WomanId};

pub fn mk_instance(men: &[&[u32]], women: &[&[u32]], manipulators: &[u32]) -> Instance {
    let men: Vec<Vec<WomanId>> = men
        .iter()
        .map(|l| l.iter().map(|&i| WomanId(i)).collect())
        .collect();
    let women: Vec<Vec<ManId>> = women
        .iter()
        .map(|l| l.iter().map(|&i| ManId(i)).collect())
        .collect();
    let manipulators: BTreeSet<WomanId> = manipulators.iter().map(|&i| WomanId(i)).collect();
    Instance::new(men, women, manipulators).expect("test instance must validate")
}

pub fn profile(entries: &[(u32, &[u32])]) -> StrategyProfile {
    let lists: BTreeMap<WomanId, Vec<ManId>> = entries
        .iter()
        .map(|&(w, l)| (WomanId(w), l.iter().map(|&i| ManId(i)).collect()))
        .collect();
    StrategyProfile::from_lists(lists).expect("test profile must validate")
}

pub fn pairs(n: usize, ps: &[(u32, u32)]) -> Matching {
    let ps: Vec<(ManId, WomanId)> = ps.iter().map(|&(m, w)| (ManId(m), WomanId(w))).collect();
    Matching::from_pairs(n, &ps).expect("test matching must validate")
}

/// 6×6 incomplete market with manipulators {w1, w2}; five stable matchings;
/// the reference example for truncation strategies and their combinations.
pub fn fix_t1() -> Instance {
    mk_instance(
        &[
            &[1, 3, 5],
            &[2, 3, 6],
            &[3, 4],
            &[4, 3],
            &[5, 1],
            &[6, 2],
        ],
        &[
            &[5, 1],
            &[6, 2],
            &[4, 2, 1, 3],
            &[3, 4],
            &[1, 5],
            &[2, 6],
        ],
        &[1, 2],
    )
}

/// 4×4 complete market with manipulators {w1, w2}; four stable matchings,
/// two incomparable Pareto-optimal coalition outcomes — w1 and w2 each gain
/// only at the other's expense.
pub fn fix_d1() -> Instance {
    mk_instance(
        &[
            &[1, 4, 2, 3],
            &[1, 3, 2, 4],
            &[2, 3, 1, 4],
            &[2, 4, 1, 3],
        ],
        &[
            &[3, 2, 1, 4],
            &[1, 4, 3, 2],
            &[2, 3, 1, 4],
            &[4, 1, 3, 2],
        ],
        &[1, 2],
    )
}

/// 3×3 incomplete market with a unique stable matching; the tempting
/// partner swap for w1/w2 is blocked by (m1, w3).
pub fn fix_d2() -> Instance {
    mk_instance(
        &[&[1, 3, 2], &[2, 1], &[3]],
        &[&[2, 1], &[1, 2], &[1, 3]],
        &[1, 2],
    )
}

/// 4×4 complete market with manipulators {w1, w3}; unique stable matching
/// (the identity), so the coalition can do no better than the truth.
pub fn fix_d3() -> Instance {
    mk_instance(
        &[
            &[1, 3, 4, 2],
            &[2, 3, 1, 4],
            &[3, 1, 2, 4],
            &[3, 4, 1, 2],
        ],
        &[
            &[3, 1, 2, 4],
            &[3, 2, 1, 4],
            &[2, 3, 4, 1],
            &[1, 2, 3, 4],
        ],
        &[1, 3],
    )
}
