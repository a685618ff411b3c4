//! Deferred acceptance with a full proposal trace.
//!
//! The men-proposing run returns the matching that is simultaneously best
//! for every man and worst for every woman among all matchings stable under
//! the *effective* profile (true lists plus any stated-list overlay);
//! `Side::Women` swaps the roles. The outcome is famously independent of the
//! order in which free proposers move, but the trace is not, so the proposal
//! order is pinned down: by default, rounds in which every currently free
//! proposer (in ascending id) proposes once. [`Schedule::Shuffled`] exists
//! so tests can verify order-independence of the outcome; it changes only
//! the trace.
//!
//! The trace records every proposal with its outcome and, for men-proposing
//! runs, the per-woman proposer list ordered by her effective list — the
//! raw material for the inconspicuous-manipulation rewrite, which needs to
//! know each woman's two best proposers.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::instance::{effective_woman_list, Instance, ManId, Matching, StrategyProfile, WomanId};

/// Which side does the proposing. Deciders always judge proposals by their
/// own effective list; proposers walk down theirs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Men,
    Women,
}

/// Proposal order for free agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Rounds; within a round every agent free at round start proposes once,
    /// in ascending id. Deterministic, and the default everywhere.
    RoundRobin,
    /// One free agent at a time, chosen by a seeded generator. The outcome
    /// matching is provably identical to round-robin; only the trace moves.
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// The proposee took the proposer (possibly displacing someone).
    Accepted,
    /// The proposee turned the proposer down on the spot.
    Rejected,
    /// The proposee dropped this previously-held partner for a better one.
    Displaced,
}

/// One proposal (or displacement) during a run. `man`/`woman` name the pair
/// regardless of which side proposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProposalEvent {
    pub man: ManId,
    pub woman: WomanId,
    pub kind: EventKind,
}

/// Time-ordered record of a deferred-acceptance run.
#[derive(Debug, Clone)]
pub struct ProposalTrace {
    pub side: Side,
    pub events: Vec<ProposalEvent>,
    /// Men-proposing runs only: pro[w] = every man who proposed to w,
    /// ordered by w's effective list (unlisted proposers last, by id).
    pro: Vec<Vec<ManId>>,
}

impl ProposalTrace {
    /// Trace assembled from an explicitly constructed event list (rotation
    /// eliminations build these); carries no per-woman proposer index.
    pub(crate) fn from_events(side: Side, events: Vec<ProposalEvent>) -> Self {
        ProposalTrace {
            side,
            events,
            pro: Vec::new(),
        }
    }

    /// All men who proposed to `w`, best first by her effective list.
    /// Empty for women-proposing runs.
    pub fn proposals_to(&self, w: WomanId) -> &[ManId] {
        match self.pro.get(w.idx()) {
            Some(v) => v,
            None => &[],
        }
    }

    /// The top (at most) two proposers to `w` — her final partner first.
    pub fn reduced_proposals(&self, w: WomanId) -> &[ManId] {
        let p = self.proposals_to(w);
        &p[..p.len().min(2)]
    }
}

/// splitmix64; enough randomness to scramble a schedule reproducibly
/// without pulling an RNG dependency into a no_std crate.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Men-proposing (or women-proposing) deferred acceptance under the
/// effective profile, with the default round-robin schedule.
pub fn gale_shapley(
    inst: &Instance,
    overlay: Option<&StrategyProfile>,
    side: Side,
) -> Result<(Matching, ProposalTrace)> {
    gale_shapley_scheduled(inst, overlay, side, Schedule::RoundRobin)
}

/// As [`gale_shapley`], with an explicit proposal schedule.
pub fn gale_shapley_scheduled(
    inst: &Instance,
    overlay: Option<&StrategyProfile>,
    side: Side,
    schedule: Schedule,
) -> Result<(Matching, ProposalTrace)> {
    if let Some(p) = overlay {
        p.validate_for(inst)?;
    }
    let n = inst.n();

    // Orient the market: proposer lists and decider rank tables as plain
    // 0-based indices. Women's lists honor the overlay; men's never do
    // (men always report truthfully in this model).
    let mut proposer_lists: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut decider_rank: Vec<Vec<u32>> = vec![vec![u32::MAX; n]; n];
    match side {
        Side::Men => {
            for m in inst.men() {
                proposer_lists.push(inst.man_list(m).iter().map(|w| w.idx()).collect());
            }
            for w in inst.women() {
                for (r, m) in effective_woman_list(inst, overlay, w).iter().enumerate() {
                    decider_rank[w.idx()][m.idx()] = r as u32;
                }
            }
        }
        Side::Women => {
            for w in inst.women() {
                proposer_lists.push(
                    effective_woman_list(inst, overlay, w)
                        .iter()
                        .map(|m| m.idx())
                        .collect(),
                );
            }
            for m in inst.men() {
                for (r, w) in inst.man_list(m).iter().enumerate() {
                    decider_rank[m.idx()][w.idx()] = r as u32;
                }
            }
        }
    }

    let mut next: Vec<usize> = vec![0; n]; // cursor into each proposer's list
    let mut held: Vec<Option<usize>> = vec![None; n]; // decider -> proposer
    let mut engaged: Vec<Option<usize>> = vec![None; n]; // proposer -> decider
    let mut events: Vec<(usize, usize, EventKind)> = Vec::new();

    let free_pool = |next: &Vec<usize>, engaged: &Vec<Option<usize>>| -> Vec<usize> {
        (0..n)
            .filter(|&p| engaged[p].is_none() && next[p] < proposer_lists[p].len())
            .collect()
    };

    let propose = |p: usize,
                       next: &mut Vec<usize>,
                       held: &mut Vec<Option<usize>>,
                       engaged: &mut Vec<Option<usize>>,
                       events: &mut Vec<(usize, usize, EventKind)>| {
        let d = proposer_lists[p][next[p]];
        next[p] += 1;
        let my_rank = decider_rank[d][p];
        if my_rank == u32::MAX {
            events.push((p, d, EventKind::Rejected));
            return;
        }
        match held[d] {
            None => {
                events.push((p, d, EventKind::Accepted));
                held[d] = Some(p);
                engaged[p] = Some(d);
            }
            Some(old) if my_rank < decider_rank[d][old] => {
                events.push((p, d, EventKind::Accepted));
                events.push((old, d, EventKind::Displaced));
                engaged[old] = None;
                held[d] = Some(p);
                engaged[p] = Some(d);
            }
            Some(_) => events.push((p, d, EventKind::Rejected)),
        }
    };

    match schedule {
        Schedule::RoundRobin => loop {
            let round = free_pool(&next, &engaged);
            if round.is_empty() {
                break;
            }
            for p in round {
                // A proposer accepted earlier in this same round can be
                // displaced before his turn comes; he then proposes again
                // only in the next round, so re-check his status.
                if engaged[p].is_none() && next[p] < proposer_lists[p].len() {
                    propose(p, &mut next, &mut held, &mut engaged, &mut events);
                }
            }
        },
        Schedule::Shuffled(seed) => {
            let mut state = seed;
            loop {
                let pool = free_pool(&next, &engaged);
                if pool.is_empty() {
                    break;
                }
                let p = pool[(splitmix64(&mut state) % pool.len() as u64) as usize];
                propose(p, &mut next, &mut held, &mut engaged, &mut events);
            }
        }
    }

    // Orient back into a Matching.
    let mut mu = Matching::empty(n);
    for (p, d) in engaged.iter().enumerate() {
        if let Some(d) = *d {
            match side {
                Side::Men => mu.set(ManId::from_idx(p), WomanId::from_idx(d)),
                Side::Women => mu.set(ManId::from_idx(d), WomanId::from_idx(p)),
            }
        }
    }

    let events: Vec<ProposalEvent> = events
        .into_iter()
        .map(|(p, d, kind)| match side {
            Side::Men => ProposalEvent {
                man: ManId::from_idx(p),
                woman: WomanId::from_idx(d),
                kind,
            },
            Side::Women => ProposalEvent {
                man: ManId::from_idx(d),
                woman: WomanId::from_idx(p),
                kind,
            },
        })
        .collect();

    let mut pro: Vec<Vec<ManId>> = Vec::new();
    if side == Side::Men {
        pro = vec![Vec::new(); n];
        for ev in &events {
            // Proposals from men the woman does not (effectively) list bounce
            // off unranked; only ranked proposals enter her received table.
            if ev.kind != EventKind::Displaced
                && decider_rank[ev.woman.idx()][ev.man.idx()] != u32::MAX
                && !pro[ev.woman.idx()].contains(&ev.man)
            {
                pro[ev.woman.idx()].push(ev.man);
            }
        }
        for (widx, list) in pro.iter_mut().enumerate() {
            list.sort_by_key(|m| (decider_rank[widx][m.idx()], m.0));
        }
        for w in inst.women() {
            debug_assert_eq!(
                pro[w.idx()].first().copied(),
                mu.husband_of(w),
                "best proposer must be the final partner"
            );
        }
    }

    Ok((mu, ProposalTrace { side, events, pro }))
}
