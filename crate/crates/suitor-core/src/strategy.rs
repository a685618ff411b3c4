//! Manipulation constructions for the coalition: list-cutting equilibria
//! and their combination algebra, the iterative trade-cycle elimination
//! that finds Pareto-optimal coalition outcomes, re-rooted subproblems,
//! and near-invisible one-move rewrites of true lists.
//!
//! Two families of constructions live here. The cut-based family
//! ([`truncation_equilibrium`], [`general_to_truncation`],
//! [`combine_truncation_profiles`]) works with prefixes of true lists:
//! cutting a list right after a target partner forces the proposing side
//! to settle there or cascade elsewhere, and the per-woman shorter/longer
//! combination of two cut profiles lands on the lattice meet/join of
//! their outcomes. The reorder-based family ([`pareto_permutation`],
//! [`enumerate_pareto_outcomes`]) searches the rotation poset instead:
//! starting from the proposer-optimal matching it repeatedly eliminates a
//! principle set (one rotation together with everything that must fall
//! before it) whose elimination keeps every forced agent reachable in the
//! suitor graph, and stops when no such set remains. The matching reached
//! this way cannot be improved for one coalition member without hurting
//! another, over the set of outcomes the coalition can actually induce.
//!
//! Determinism: candidate principle sets are ordered by the least woman
//! id of their generating rotation (then least man id, then rotation id),
//! so `Selector::First` — and therefore the whole algorithm — is a pure
//! function of the instance. The enumeration variant explores every
//! candidate order but memoizes on the eliminated set, which determines
//! the matching regardless of order.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::feasibility::{
    apply_rotation_to_graph, build_suitor_graph, construct_manipulator_profile, is_feasible,
    SuitorGraph,
};
use crate::gs::{gale_shapley, Side};
use crate::instance::{Instance, ManId, Matching, StrategyProfile, WomanId};
use crate::rotations::{
    clo_set, eliminate_rotation, max_rotations, reduced_table, rotation_poset, ReducedTable,
    RotationPoset,
};
use crate::stability::{blocking_pairs, lattice_combine, LatticeOp};

/// Cut each manipulator's true list right after the partner she gets when
/// every woman proposes — her best partner over all stable matchings.
/// Under the resulting profile no coalition of manipulators can deviate
/// and make a member strictly better off, and the induced matching gives
/// every manipulator exactly that best stable partner.
///
/// A manipulator unmatched under the women-proposing run keeps her full
/// list (there is no partner to cut at); non-manipulators are untouched.
pub fn truncation_equilibrium(inst: &Instance) -> Result<StrategyProfile> {
    let (best, _) = gale_shapley(inst, None, Side::Women)?;
    let mut p = StrategyProfile::empty();
    for &w in inst.manipulators() {
        if let Some(m) = best.husband_of(w) {
            p.insert(w, cut_after(inst, w, m)?);
        }
    }
    Ok(p)
}

/// Convert an arbitrary profile into a cut profile with the same outcome:
/// each manipulator's list becomes her true list cut right after the
/// partner she gets under `p`. Rejecting the men below her final partner
/// up front instead of holding and dropping them later changes when
/// rejections happen but not where anyone ends up, so the induced
/// matching is unchanged.
///
/// The outcome under `p` must be stable with respect to the true lists;
/// otherwise the cut has no sound anchor and the unstable outcome is
/// returned as an error with its blocking pairs. A manipulator left
/// unmatched under `p` keeps her stated list verbatim (a cut cannot
/// reproduce "reject everyone ranked below nobody").
pub fn general_to_truncation(inst: &Instance, p: &StrategyProfile) -> Result<StrategyProfile> {
    p.validate_for(inst)?;
    let (mu, _) = gale_shapley(inst, Some(p), Side::Men)?;
    require_stable(inst, &mu)?;

    let mut out = StrategyProfile::empty();
    for &w in inst.manipulators() {
        match mu.husband_of(w) {
            Some(m) => out.insert(w, cut_after(inst, w, m)?),
            None => {
                if let Some(list) = p.get(w) {
                    out.insert(w, list.to_vec());
                }
            }
        }
    }

    let (check, _) = gale_shapley(inst, Some(&out), Side::Men)?;
    if check != mu {
        return Err(Error::Internal(format!(
            "cut conversion changed the outcome: {check} instead of {mu}"
        )));
    }
    Ok(out)
}

/// How two cut profiles are merged by [`combine_truncation_profiles`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    /// Per woman, keep the shorter list. The outcome is the meet of the
    /// two outcomes: every woman gets the better of her two partners.
    Intersection,
    /// Per woman, keep the longer list. Only the manipulators' slice of
    /// the outcome is pinned down: they get their join (worse) partners;
    /// the rest of the matching may differ from the join.
    Union,
}

/// Merge two cut profiles list-by-list. A woman absent from a profile
/// counts as stating her full true list. Entries that end up equal to the
/// full true list are dropped from the result — they say nothing.
///
/// Both inputs must be cut profiles (every stated list a prefix of the
/// true list) that keep each manipulator's best stable partner; the
/// meet/join guarantees above are verified before returning.
pub fn combine_truncation_profiles(
    inst: &Instance,
    p1: &StrategyProfile,
    p2: &StrategyProfile,
    mode: CombineMode,
) -> Result<StrategyProfile> {
    for (name, p) in [("first", p1), ("second", p2)] {
        p.validate_for(inst)?;
        if !p.is_truncation_of(inst) {
            return Err(Error::BadProfile(format!(
                "{name} profile is not a cut profile: some stated list is not a prefix of the \
                 true list"
            )));
        }
    }

    let mut women: BTreeSet<WomanId> = p1.iter().map(|(w, _)| w).collect();
    women.extend(p2.iter().map(|(w, _)| w));

    let mut out = StrategyProfile::empty();
    for &w in &women {
        let full = inst.woman_list(w);
        let l1 = p1.get(w).unwrap_or(full);
        let l2 = p2.get(w).unwrap_or(full);
        let keep = match mode {
            CombineMode::Intersection if l1.len() <= l2.len() => l1,
            CombineMode::Intersection => l2,
            CombineMode::Union if l1.len() >= l2.len() => l1,
            CombineMode::Union => l2,
        };
        if keep.len() < full.len() {
            out.insert(w, keep.to_vec());
        }
    }

    let (mu1, _) = gale_shapley(inst, Some(p1), Side::Men)?;
    let (mu2, _) = gale_shapley(inst, Some(p2), Side::Men)?;
    let (got, _) = gale_shapley(inst, Some(&out), Side::Men)?;
    match mode {
        CombineMode::Intersection => {
            let want = lattice_combine(&mu1, &mu2, inst, LatticeOp::Meet)?;
            if got != want {
                return Err(Error::Internal(format!(
                    "intersection outcome is {got}, not the meet {want}"
                )));
            }
        }
        CombineMode::Union => {
            let want = lattice_combine(&mu1, &mu2, inst, LatticeOp::Join)?;
            for &w in inst.manipulators() {
                if got.husband_of(w) != want.husband_of(w) {
                    return Err(Error::Internal(format!(
                        "union outcome disagrees with the join at {w}: {got} vs {want}"
                    )));
                }
            }
        }
    }
    Ok(out)
}

/// Shared state of the elimination walk: the reduced table and suitor
/// graph after eliminating `eliminated`, kept in lockstep.
#[derive(Debug, Clone)]
pub struct EliminationState {
    table: ReducedTable,
    graph: SuitorGraph,
    eliminated: BTreeSet<usize>,
}

impl EliminationState {
    /// The truthful starting point: nothing eliminated, the graph of the
    /// proposer-optimal matching.
    pub fn new(inst: &Instance) -> Result<Self> {
        let table = reduced_table(inst, None)?;
        let graph = build_suitor_graph(inst, &table.matching())?;
        Ok(EliminationState {
            table,
            graph,
            eliminated: BTreeSet::new(),
        })
    }

    pub fn table(&self) -> &ReducedTable {
        &self.table
    }

    pub fn graph(&self) -> &SuitorGraph {
        &self.graph
    }

    /// Ids of the rotations eliminated so far (a closed set).
    pub fn eliminated(&self) -> &BTreeSet<usize> {
        &self.eliminated
    }

    /// The matching the walk currently stands on.
    pub fn matching(&self) -> Matching {
        self.table.matching()
    }

    /// Eliminate `ids` in ascending order, updating table and graph
    /// together. `ids` joined with what is already eliminated must be
    /// closed, and ascending order must be a valid elimination order —
    /// both hold for the principle sets this module feeds in, because
    /// precedence arcs always point from smaller to larger id.
    pub fn eliminate(
        &mut self,
        inst: &Instance,
        poset: &RotationPoset,
        ids: &BTreeSet<usize>,
    ) -> Result<()> {
        for &id in ids {
            let rho = poset.rotation(id)?;
            let (table, _) = eliminate_rotation(&self.table, rho)?;
            let (graph, _) = apply_rotation_to_graph(inst, &self.graph, rho)?;
            self.table = table;
            self.graph = graph;
            self.eliminated.insert(id);
        }
        Ok(())
    }
}

/// Would eliminating `cs` on top of `state` keep the coalition in
/// control? True exactly when, after eliminating `cs` on a scratch copy,
/// every agent of every maximal rotation of the *combined* eliminated set
/// is still reachable from the source — which is known to imply that the
/// whole graph is (the non-maximal rotations' agents are dragged along by
/// the cycles that overtake them). The combined maxima matter: a rotation
/// that was maximal and reachable before this step can lose its path once
/// more of the order falls, so old maxima that survive get re-checked.
///
/// A set that is stale (overlaps the already-eliminated set), whose union
/// with the eliminated set is not closed, or that is otherwise impossible
/// to replay simply cannot be eliminated: false, not an error.
pub fn can_eliminate(
    inst: &Instance,
    poset: &RotationPoset,
    state: &EliminationState,
    cs: &BTreeSet<usize>,
) -> bool {
    if cs.is_empty() {
        return true;
    }
    if !cs.is_disjoint(&state.eliminated) {
        return false;
    }
    let mut scratch = state.clone();
    if scratch.eliminate(inst, poset, cs).is_err() {
        return false;
    }
    let combined: BTreeSet<usize> = state.eliminated.union(cs).copied().collect();
    let maxima = match max_rotations(poset, &combined) {
        Ok(m) => m,
        Err(_) => return false,
    };
    let reached = scratch.graph.reachable();
    maxima.iter().all(|&id| {
        let rho = poset.rotation(id).expect("maxima come from the poset");
        rho.men()
            .iter()
            .all(|&m| reached.contains(&crate::feasibility::Node::Man(m)))
            && rho
                .women()
                .iter()
                .all(|&w| reached.contains(&crate::feasibility::Node::Woman(w)))
    })
}

/// How [`pareto_permutation`] resolves its one free choice per round:
/// which of the currently eliminable principle sets to eliminate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    /// Always take the canonically first candidate (least woman id of the
    /// generating rotation, then least man id, then rotation id).
    First,
    /// Follow the scripted generator ids round by round; once the script
    /// runs out, continue as `First`. A scripted id that is not currently
    /// eliminable is an error.
    ByIndex(Vec<usize>),
}

impl Selector {
    fn pick(&self, round: usize, candidates: &[usize]) -> Result<usize> {
        debug_assert!(!candidates.is_empty());
        match self {
            Selector::First => Ok(candidates[0]),
            Selector::ByIndex(script) => match script.get(round) {
                None => Ok(candidates[0]),
                Some(&id) if candidates.contains(&id) => Ok(id),
                Some(&id) => Err(Error::BadSelector(format!(
                    "rotation {id} does not generate an eliminable principle set this round; \
                     candidates are {candidates:?}"
                ))),
            },
        }
    }
}

/// The principle set generated by `id` over what is left: everything that
/// must fall at or before `id`, minus what already fell.
fn principle_set(
    poset: &RotationPoset,
    id: usize,
    eliminated: &BTreeSet<usize>,
) -> Result<BTreeSet<usize>> {
    Ok(clo_set(poset, id)?.difference(eliminated).copied().collect())
}

/// Generators of currently eliminable principle sets, canonically sorted.
fn eliminable_generators(
    inst: &Instance,
    poset: &RotationPoset,
    state: &EliminationState,
) -> Result<Vec<usize>> {
    let mut found: Vec<usize> = Vec::new();
    for id in 0..poset.len() {
        if state.eliminated.contains(&id) {
            continue;
        }
        let ps = principle_set(poset, id, &state.eliminated)?;
        if can_eliminate(inst, poset, state, &ps) {
            found.push(id);
        }
    }
    found.sort_by_key(|&id| {
        let rho = poset.rotation(id).expect("generator ids are in range");
        let min_man = rho.men().iter().min().copied().expect("rotations are nonempty");
        (rho.min_woman(), min_man, id)
    });
    Ok(found)
}

/// Walk the rotation poset from the proposer-optimal matching, each round
/// eliminating one eliminable principle set (chosen by `selector`), until
/// none remains. Returns a profile inducing the final matching, the
/// matching itself, and the closed set of rotations that were eliminated.
///
/// The result is stable under the true lists, weakly better for every
/// manipulator than the truthful outcome, and Pareto-optimal for the
/// coalition over everything it can induce by reordering lists. With an
/// empty manipulator set nothing is ever eliminable and the truthful
/// outcome comes back.
pub fn pareto_permutation(
    inst: &Instance,
    selector: &Selector,
) -> Result<(StrategyProfile, Matching, BTreeSet<usize>)> {
    let poset = rotation_poset(inst)?;
    let mut state = EliminationState::new(inst)?;
    let mut round = 0usize;
    loop {
        let candidates = eliminable_generators(inst, &poset, &state)?;
        if candidates.is_empty() {
            break;
        }
        let id = selector.pick(round, &candidates)?;
        let ps = principle_set(&poset, id, &state.eliminated)?;
        state.eliminate(inst, &poset, &ps)?;
        round += 1;
    }
    let mu = state.matching();
    let profile = construct_manipulator_profile(inst, &mu)?;
    Ok((profile, mu, state.eliminated))
}

/// Every matching [`pareto_permutation`] can produce under some selector:
/// depth-first search over each round's candidates, memoized on the
/// eliminated set (which alone determines the matching, so differently
/// ordered walks to the same set are explored once). `budget` caps the
/// number of states expanded; exceeding it aborts with an error rather
/// than returning a silently incomplete set.
pub fn enumerate_pareto_outcomes(inst: &Instance, budget: u64) -> Result<BTreeSet<Matching>> {
    let poset = rotation_poset(inst)?;
    let state = EliminationState::new(inst)?;
    let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    let mut outcomes: BTreeSet<Matching> = BTreeSet::new();
    let mut spent: u64 = 0;
    explore(
        inst, &poset, state, budget, &mut spent, &mut seen, &mut outcomes,
    )?;
    Ok(outcomes)
}

fn explore(
    inst: &Instance,
    poset: &RotationPoset,
    state: EliminationState,
    budget: u64,
    spent: &mut u64,
    seen: &mut BTreeSet<BTreeSet<usize>>,
    outcomes: &mut BTreeSet<Matching>,
) -> Result<()> {
    if !seen.insert(state.eliminated.clone()) {
        return Ok(());
    }
    if *spent >= budget {
        return Err(Error::BudgetExceeded { budget });
    }
    *spent += 1;

    let candidates = eliminable_generators(inst, poset, &state)?;
    if candidates.is_empty() {
        outcomes.insert(state.matching());
        return Ok(());
    }
    for id in candidates {
        let ps = principle_set(poset, id, &state.eliminated)?;
        let mut child = state.clone();
        child.eliminate(inst, poset, &ps)?;
        explore(inst, poset, child, budget, spent, seen, outcomes)?;
    }
    Ok(())
}

/// Re-root the problem at `mu`: build an instance whose truthful run
/// already stands where `inst` stands after eliminating `cs`, so that
/// further elimination can be studied as a fresh problem. Men and
/// non-manipulators keep their lists; each matched manipulator's list is
/// rewritten as: everyone she truly prefers to her `mu`-partner, in true
/// order, then the partner, then the rest of a witnessing list for `mu`.
/// The men moved to the front never propose to her (each is matched to
/// someone he prefers — otherwise he would block `mu`), so the rewrite
/// does not change the induced matching; it only restores her true
/// opinion of the men above her partner, which is what makes the new
/// instance's reduced table match the old one's.
pub fn subproblem_profile(
    inst: &Instance,
    mu: &Matching,
    cs: &BTreeSet<usize>,
) -> Result<Instance> {
    let poset = rotation_poset(inst)?;
    let replayed = crate::rotations::closed_set_matching(inst, &poset, cs)?;
    if replayed != *mu {
        return Err(Error::BadMatching(format!(
            "matching does not correspond to the given rotation set; eliminating it yields \
             {replayed}, not {mu}"
        )));
    }
    let witness = construct_manipulator_profile(inst, mu)?;

    let mut women: Vec<Vec<ManId>> = inst.women().map(|w| inst.woman_list(w).to_vec()).collect();
    for &w in inst.manipulators() {
        let stated = witness.get(w).unwrap_or_else(|| inst.woman_list(w));
        let Some(partner) = mu.husband_of(w) else {
            women[w.idx()] = stated.to_vec();
            continue;
        };
        let rank = inst
            .woman_rank(w, partner)
            .expect("a stable partner is on the true list");
        let mut list: Vec<ManId> = inst.woman_list(w)[..rank].to_vec();
        list.push(partner);
        let rest: Vec<ManId> = stated
            .iter()
            .copied()
            .filter(|m| !list.contains(m))
            .collect();
        list.extend(rest);
        women[w.idx()] = list;
    }

    let men: Vec<Vec<WomanId>> = inst.men().map(|m| inst.man_list(m).to_vec()).collect();
    let rerooted = Instance::new(men, women, inst.manipulators().clone())?;
    let (check, _) = gale_shapley(&rerooted, None, Side::Men)?;
    if check != *mu {
        return Err(Error::Internal(format!(
            "re-rooted instance opens at {check}, not {mu}"
        )));
    }
    Ok(rerooted)
}

/// Rewrite a profile into one that differs from the truth as little as
/// possible while inducing the same matching: each manipulator's list is
/// her true list with at most one man relocated. The man moved — when a
/// move is needed at all — is her second-best received proposal under a
/// witnessing run, reinserted directly after her final partner, where he
/// shields her from every proposal she must reject while waiting. A
/// manipulator who receives fewer than two proposals, or whose true
/// ordering already ranks her shield above everything in between, keeps
/// her true list.
///
/// The outcome under `p` must be inducible by full-list rewrites alone —
/// the result here is always full lists. An outcome that only list
/// *cutting* can reach (the suitor graph of the matching starves) is
/// refused as infeasible, carrying the starved vertices.
pub fn inconspicuous(inst: &Instance, p: &StrategyProfile) -> Result<StrategyProfile> {
    p.validate_for(inst)?;
    let (mu, _) = gale_shapley(inst, Some(p), Side::Men)?;
    require_stable(inst, &mu)?;
    let report = is_feasible(&build_suitor_graph(inst, &mu)?);
    if !report.feasible {
        return Err(Error::Infeasible {
            unreached: report.unreached,
        });
    }

    let witness = construct_manipulator_profile(inst, &mu)?;
    let full_lists = witness
        .iter()
        .all(|(w, list)| list.len() == inst.woman_list(w).len());
    if !full_lists {
        return Err(Error::Internal(format!(
            "no full-list witness found for {mu} despite a live suitor graph"
        )));
    }
    let (_, trace) = gale_shapley(inst, Some(&witness), Side::Men)?;

    let mut out = StrategyProfile::empty();
    for &w in inst.manipulators() {
        let received = trace.proposals_to(w);
        let truth = inst.woman_list(w);
        if received.len() < 2 {
            out.insert(w, truth.to_vec());
            continue;
        }
        let partner = received[0];
        debug_assert_eq!(mu.husband_of(w), Some(partner));
        let shield = received[1];
        let partner_rank = inst
            .woman_rank(w, partner)
            .expect("a stable partner is on the true list");
        let shield_rank = inst
            .woman_rank(w, shield)
            .expect("the witness permutes the true list, so every proposer is on it");
        // The shield only has to move if some received proposal truly
        // sits between the partner and the shield — those are the men she
        // must reject while the true order would have her keep them.
        let needs_move = received[2..].iter().any(|&m| {
            inst.woman_rank(w, m)
                .is_some_and(|r| r > partner_rank && r < shield_rank)
        });
        if !needs_move {
            out.insert(w, truth.to_vec());
            continue;
        }
        let mut list: Vec<ManId> = truth.iter().copied().filter(|&m| m != shield).collect();
        let at = list
            .iter()
            .position(|&m| m == partner)
            .expect("partner survives removing the shield")
            + 1;
        list.insert(at, shield);
        out.insert(w, list);
    }

    let (check, _) = gale_shapley(inst, Some(&out), Side::Men)?;
    if check != mu {
        return Err(Error::Internal(format!(
            "one-move rewrite changed the outcome: {check} instead of {mu}"
        )));
    }
    Ok(out)
}

/// Her true list cut immediately after `m`.
fn cut_after(inst: &Instance, w: WomanId, m: ManId) -> Result<Vec<ManId>> {
    match inst.woman_rank(w, m) {
        Some(r) => Ok(inst.woman_list(w)[..=r].to_vec()),
        None => Err(Error::Internal(format!(
            "{w} is matched to {m}, who is not on her true list"
        ))),
    }
}

fn require_stable(inst: &Instance, mu: &Matching) -> Result<()> {
    let report = blocking_pairs(inst, mu);
    if !report.is_stable() {
        return Err(Error::UnstableInput {
            individually_rational: report.individually_rational,
            blocking: report.blocking,
        });
    }
    Ok(())
}
