//! Brute-force ground truth for small markets.
//!
//! Everything here is implemented straight from definitions — enumerate,
//! filter, compare — and deliberately avoids the rotation and suitor-graph
//! machinery, so that agreement between this module and the fast paths is
//! evidence, not circularity. The one exception is [`ManipKind::Suitor`],
//! which is *documented* as the fast characterization (stable set filtered
//! by suitor-graph reachability) and exists so tests can diff it against
//! the exhaustive kinds.
//!
//! Every operation is guarded by explicit size bounds and returns
//! [`Error::TooLarge`] beyond them; the `_bounded` variants exist for
//! callers (the 3-CNF gadget tests) that knowingly enumerate bigger
//! markets with structure that keeps the search small.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::feasibility::{build_suitor_graph, is_feasible};
use crate::gs::{gale_shapley, Side};
use crate::instance::{Instance, ManId, Matching, StrategyProfile, WomanId};
use crate::stability::{blocking_pairs, is_stable};

/// Default cap on market size for exhaustive stable-set enumeration.
pub const DEFAULT_STABLE_BOUND: usize = 8;

/// All stable matchings of the market, sorted. Markets larger than
/// [`DEFAULT_STABLE_BOUND`] are refused; see [`enumerate_stable_bounded`].
pub fn enumerate_stable(inst: &Instance) -> Result<Vec<Matching>> {
    enumerate_stable_bounded(inst, DEFAULT_STABLE_BOUND)
}

/// All stable matchings, with an explicit size cap and no search budget.
pub fn enumerate_stable_bounded(inst: &Instance, max_n: usize) -> Result<Vec<Matching>> {
    enumerate_stable_budgeted(inst, max_n, u64::MAX).map(|(set, _)| set)
}

/// As [`enumerate_stable_bounded`], but also counts search nodes and fails
/// with [`Error::BudgetExceeded`] when the budget runs out. Returns the
/// node count actually spent.
pub fn enumerate_stable_budgeted(
    inst: &Instance,
    max_n: usize,
    budget: u64,
) -> Result<(Vec<Matching>, u64)> {
    let n = inst.n();
    if n > max_n {
        return Err(Error::TooLarge {
            what: "market size for stable-set enumeration",
            limit: max_n,
            actual: n,
        });
    }
    // Complete markets have only perfect stable matchings, so the
    // unmatched option is offered exactly when some list is incomplete.
    let allow_single = !inst.is_complete();
    let mut found: BTreeSet<Matching> = BTreeSet::new();
    let mut mu = Matching::empty(n);
    let mut spent: u64 = 0;
    search(inst, 0, allow_single, &mut mu, &mut found, budget, &mut spent)?;
    Ok((found.into_iter().collect(), spent))
}

/// Backtracking over men in id order. Before placing a pair, check it
/// against every already-placed pair for blocking; a full
/// [`blocking_pairs`] pass at the leaf catches the remaining cases
/// (blocking with women left unmatched).
fn search(
    inst: &Instance,
    man_idx: usize,
    allow_single: bool,
    mu: &mut Matching,
    found: &mut BTreeSet<Matching>,
    budget: u64,
    spent: &mut u64,
) -> Result<()> {
    *spent += 1;
    if *spent > budget {
        return Err(Error::BudgetExceeded { budget });
    }
    let n = inst.n();
    if man_idx == n {
        if blocking_pairs(inst, mu).is_stable() {
            found.insert(mu.clone());
        }
        return Ok(());
    }
    let m = ManId(man_idx as u32 + 1);
    for &w in inst.man_list(m) {
        if mu.husband_of(w).is_some() || inst.woman_rank(w, m).is_none() {
            continue;
        }
        if !conflicts(inst, mu, man_idx, m, w) {
            mu.set(m, w);
            search(inst, man_idx + 1, allow_single, mu, found, budget, spent)?;
            mu.unset_man(m);
        }
    }
    if allow_single {
        // Leaving m single can only survive the leaf check if no woman he
        // lists would have him; cheap to try, the leaf filter decides.
        search(inst, man_idx + 1, allow_single, mu, found, budget, spent)?;
    }
    Ok(())
}

/// Would pairing (m, w) create a blocking pair with one of the already
/// decided men m' < m? Both directions must be checked: m against their
/// wives, and them against w (whose husband is now final).
fn conflicts(inst: &Instance, mu: &Matching, man_idx: usize, m: ManId, w: WomanId) -> bool {
    for prev_idx in 0..man_idx {
        let prev = ManId(prev_idx as u32 + 1);
        let prev_wife = mu.wife_of(prev);
        if inst.man_improves(prev, Some(w), prev_wife)
            && inst.woman_improves(w, Some(prev), Some(m))
        {
            return true;
        }
        if let Some(pw) = prev_wife {
            if inst.man_improves(m, Some(pw), Some(w))
                && inst.woman_improves(pw, Some(m), Some(prev))
            {
                return true;
            }
        }
    }
    false
}

/// Manipulation families the feasible set can be computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManipKind {
    /// Every coalition member states a prefix of her true list.
    Truncation,
    /// Every coalition member states a total order over all men.
    Permutation,
    /// Stable set filtered by suitor-graph reachability — the fast
    /// characterization, not an independent brute force.
    Suitor,
}

/// Matchings the manipulator coalition can induce with manipulations of
/// the given kind whose outcome stays stable under the true lists.
pub fn feasible_set(inst: &Instance, kind: ManipKind) -> Result<Vec<Matching>> {
    feasible_set_bounded(inst, kind, DEFAULT_STABLE_BOUND)
}

/// As [`feasible_set`], raising the size cap for the suitor kind (the
/// exhaustive kinds keep their own hard guards).
pub fn feasible_set_bounded(
    inst: &Instance,
    kind: ManipKind,
    max_n: usize,
) -> Result<Vec<Matching>> {
    match kind {
        ManipKind::Truncation => {
            guard(inst.n() <= 7, "market size for truncation brute force", 7, inst.n())?;
            let actions = per_member_actions(inst, ActionSpace::Truncation);
            outcomes_of_profiles(inst, &actions)
        }
        ManipKind::Permutation => {
            guard(inst.n() <= 5, "market size for permutation brute force", 5, inst.n())?;
            guard(
                inst.manipulators().len() <= 2,
                "coalition size for permutation brute force",
                2,
                inst.manipulators().len(),
            )?;
            let actions = per_member_actions(inst, ActionSpace::Permutation);
            outcomes_of_profiles(inst, &actions)
        }
        ManipKind::Suitor => {
            let stable = enumerate_stable_bounded(inst, max_n)?;
            let mut out = Vec::new();
            for mu in stable {
                let g = build_suitor_graph(inst, &mu)?;
                if is_feasible(&g).feasible {
                    out.push(mu);
                }
            }
            Ok(out)
        }
    }
}

/// Feasible set under *general* manipulations: every coalition member may
/// state any ordered subset of the men. Exponentially worse than the other
/// kinds, hence the tight guard; used to validate that general and
/// truncation manipulations induce the same outcomes.
pub fn feasible_set_general(inst: &Instance) -> Result<Vec<Matching>> {
    guard(inst.n() <= 4, "market size for general brute force", 4, inst.n())?;
    guard(
        inst.manipulators().len() <= 3,
        "coalition size for general brute force",
        3,
        inst.manipulators().len(),
    )?;
    let actions = per_member_actions(inst, ActionSpace::General);
    outcomes_of_profiles(inst, &actions)
}

fn guard(ok: bool, what: &'static str, limit: usize, actual: usize) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::TooLarge { what, limit, actual })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ActionSpace {
    Truncation,
    Permutation,
    General,
}

/// The stated lists available to one manipulator under a space. Always
/// includes her true list (so the truthful profile is in every space —
/// for truncation via the full prefix, for permutation only on complete
/// instances, which is the only place that kind is used).
fn member_actions(inst: &Instance, w: WomanId, space: ActionSpace) -> Vec<Vec<ManId>> {
    match space {
        ActionSpace::Truncation => {
            let list = inst.woman_list(w);
            (0..=list.len()).map(|k| list[..k].to_vec()).collect()
        }
        ActionSpace::Permutation => {
            let all: Vec<ManId> = inst.men().collect();
            permutations(&all)
        }
        ActionSpace::General => {
            let all: Vec<ManId> = inst.men().collect();
            ordered_subsets(&all)
        }
    }
}

fn per_member_actions(inst: &Instance, space: ActionSpace) -> Vec<(WomanId, Vec<Vec<ManId>>)> {
    inst.manipulators()
        .iter()
        .map(|&w| (w, member_actions(inst, w, space)))
        .collect()
}

/// GS outcomes over the full product of the members' action lists, kept
/// when stable under the true lists.
fn outcomes_of_profiles(
    inst: &Instance,
    actions: &[(WomanId, Vec<Vec<ManId>>)],
) -> Result<Vec<Matching>> {
    let mut out: BTreeSet<Matching> = BTreeSet::new();
    let mut choice = vec![0usize; actions.len()];
    loop {
        let mut p = StrategyProfile::empty();
        for (slot, &(w, ref lists)) in actions.iter().enumerate() {
            p.insert(w, lists[choice[slot]].clone());
        }
        let (mu, _) = gale_shapley(inst, Some(&p), Side::Men)?;
        if is_stable(inst, &mu) {
            out.insert(mu);
        }
        if !advance(&mut choice, actions) {
            break;
        }
    }
    Ok(out.into_iter().collect())
}

/// Odometer increment over mixed radices; false when wrapped around.
fn advance(choice: &mut [usize], actions: &[(WomanId, Vec<Vec<ManId>>)]) -> bool {
    for slot in (0..choice.len()).rev() {
        choice[slot] += 1;
        if choice[slot] < actions[slot].1.len() {
            return true;
        }
        choice[slot] = 0;
    }
    false
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut used = vec![false; items.len()];
    perm_rec(items, &mut used, &mut current, &mut out);
    out
}

fn perm_rec<T: Clone>(
    items: &[T],
    used: &mut [bool],
    current: &mut Vec<T>,
    out: &mut Vec<Vec<T>>,
) {
    if current.len() == items.len() {
        out.push(current.clone());
        return;
    }
    for i in 0..items.len() {
        if !used[i] {
            used[i] = true;
            current.push(items[i].clone());
            perm_rec(items, used, current, out);
            current.pop();
            used[i] = false;
        }
    }
}

/// Every duplicate-free ordered sequence over `items`, the empty one
/// included.
fn ordered_subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    let mut current = Vec::new();
    let mut used = vec![false; items.len()];
    subset_rec(items, &mut used, &mut current, &mut out);
    out
}

fn subset_rec<T: Clone>(
    items: &[T],
    used: &mut [bool],
    current: &mut Vec<T>,
    out: &mut Vec<Vec<T>>,
) {
    for i in 0..items.len() {
        if !used[i] {
            used[i] = true;
            current.push(items[i].clone());
            out.push(current.clone());
            subset_rec(items, used, current, out);
            current.pop();
            used[i] = false;
        }
    }
}

/// Is `a` at least as good as `b` for every woman (by true lists)?
pub(crate) fn weakly_better_for_all_women(inst: &Instance, a: &Matching, b: &Matching) -> bool {
    inst.women()
        .all(|w| !inst.woman_improves(w, b.husband_of(w), a.husband_of(w)))
}

/// Does `a` weakly dominate `b` women-wise with at least one strict gain?
pub(crate) fn dominates_for_women(inst: &Instance, a: &Matching, b: &Matching) -> bool {
    weakly_better_for_all_women(inst, a, b)
        && inst
            .women()
            .any(|w| inst.woman_improves(w, a.husband_of(w), b.husband_of(w)))
}

/// Is `mu` undominated within the candidate set `fs` (which must contain
/// it)? Domination is judged over all women, not only the manipulators.
pub fn is_pareto_optimal(inst: &Instance, mu: &Matching, fs: &[Matching]) -> Result<bool> {
    if !fs.contains(mu) {
        return Err(Error::BadMatching(
            "matching is not in the candidate set".into(),
        ));
    }
    Ok(!fs.iter().any(|nu| dominates_for_women(inst, nu, mu)))
}

/// The undominated members of `fs`, sorted.
pub fn pareto_frontier(inst: &Instance, fs: &[Matching]) -> Vec<Matching> {
    fs.iter()
        .filter(|mu| !fs.iter().any(|nu| dominates_for_women(inst, nu, mu)))
        .cloned()
        .collect()
}

/// Equilibrium concepts for coalition deviation checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concept {
    /// No single manipulator can strictly improve by deviating alone.
    Nash,
    /// No coalition deviation makes every member strictly better.
    Strong,
    /// No coalition deviation makes every member weakly better and at
    /// least one strictly better.
    SuperStrong,
}

/// Which stated lists deviators may switch to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationSpace {
    /// Infer from the profile under test: truncation profiles get
    /// truncation deviations, full-permutation profiles get permutations,
    /// anything else the general space.
    Auto,
    Truncation,
    Permutation,
    General,
}

/// Is `p` an equilibrium of the manipulation game under the given concept?
///
/// Deviating coalitions range over all nonempty subsets of the manipulator
/// set (capped at 3 members); a member not deviating keeps her entry in
/// `p` (truthful if absent). With `feasibility_filter` on, deviations
/// whose outcome is unstable under the true lists are discounted — the
/// game restricted to feasible manipulations.
pub fn equilibrium_check(
    inst: &Instance,
    p: &StrategyProfile,
    concept: Concept,
    feasibility_filter: bool,
) -> Result<bool> {
    equilibrium_check_in(inst, p, DeviationSpace::Auto, concept, feasibility_filter)
}

/// As [`equilibrium_check`] with the deviation space made explicit —
/// needed when the profile under test is ambiguous (a truthful full list
/// is both a truncation and a permutation).
pub fn equilibrium_check_in(
    inst: &Instance,
    p: &StrategyProfile,
    space: DeviationSpace,
    concept: Concept,
    feasibility_filter: bool,
) -> Result<bool> {
    p.validate_for(inst)?;
    let manips: Vec<WomanId> = inst.manipulators().iter().copied().collect();
    guard(manips.len() <= 3, "coalition size for equilibrium check", 3, manips.len())?;
    let space = resolve_space(inst, p, space);
    if space == ActionSpace::Permutation {
        guard(inst.n() <= 5, "market size for permutation deviations", 5, inst.n())?;
    }
    if space == ActionSpace::General {
        guard(inst.n() <= 4, "market size for general deviations", 4, inst.n())?;
    }
    let (base, _) = gale_shapley(inst, Some(p), Side::Men)?;

    for coalition in nonempty_subsets(&manips) {
        if concept == Concept::Nash && coalition.len() != 1 {
            continue;
        }
        let actions: Vec<(WomanId, Vec<Vec<ManId>>)> = coalition
            .iter()
            .map(|&w| (w, member_actions(inst, w, space)))
            .collect();
        let mut choice = vec![0usize; actions.len()];
        loop {
            let mut q = p.clone();
            for (slot, &(w, ref lists)) in actions.iter().enumerate() {
                q.insert(w, lists[choice[slot]].clone());
            }
            let (alt, _) = gale_shapley(inst, Some(&q), Side::Men)?;
            if !(feasibility_filter && !is_stable(inst, &alt))
                && improves_coalition(inst, &coalition, &alt, &base, concept)
            {
                return Ok(false);
            }
            if !advance(&mut choice, &actions) {
                break;
            }
        }
    }
    Ok(true)
}

fn resolve_space(inst: &Instance, p: &StrategyProfile, space: DeviationSpace) -> ActionSpace {
    match space {
        DeviationSpace::Truncation => ActionSpace::Truncation,
        DeviationSpace::Permutation => ActionSpace::Permutation,
        DeviationSpace::General => ActionSpace::General,
        DeviationSpace::Auto => {
            if p.is_truncation_of(inst) {
                ActionSpace::Truncation
            } else if p.is_permutation(inst) {
                ActionSpace::Permutation
            } else {
                ActionSpace::General
            }
        }
    }
}

fn improves_coalition(
    inst: &Instance,
    coalition: &[WomanId],
    alt: &Matching,
    base: &Matching,
    concept: Concept,
) -> bool {
    let strictly = |w: WomanId| inst.woman_improves(w, alt.husband_of(w), base.husband_of(w));
    let weakly = |w: WomanId| !inst.woman_improves(w, base.husband_of(w), alt.husband_of(w));
    match concept {
        Concept::Nash | Concept::Strong => coalition.iter().all(|&w| strictly(w)),
        Concept::SuperStrong => {
            coalition.iter().all(|&w| weakly(w)) && coalition.iter().any(|&w| strictly(w))
        }
    }
}

fn nonempty_subsets(items: &[WomanId]) -> Vec<Vec<WomanId>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << items.len()) {
        out.push(
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &w)| w)
                .collect(),
        );
    }
    out
}

/// Every equilibrium *outcome* of the manipulation game with the given
/// action space: profiles range over the full product of member actions
/// (restricted, with the filter on, to those inducing matchings stable
/// under the true lists), and each is tested against all coalition
/// deviations. Outcomes are computed once into a table, so the deviation
/// scan is lookups, not repeated GS runs.
pub fn equilibrium_outcomes(
    inst: &Instance,
    space: DeviationSpace,
    concept: Concept,
    feasibility_filter: bool,
) -> Result<BTreeSet<Matching>> {
    let manips: Vec<WomanId> = inst.manipulators().iter().copied().collect();
    guard(manips.len() <= 3, "coalition size for equilibrium outcomes", 3, manips.len())?;
    let space = resolve_space(inst, &StrategyProfile::empty(), space);
    let actions: Vec<Vec<Vec<ManId>>> = manips
        .iter()
        .map(|&w| member_actions(inst, w, space))
        .collect();
    let mut table_size: usize = 1;
    for a in &actions {
        table_size = table_size.saturating_mul(a.len());
    }
    guard(
        table_size <= 2_000_000,
        "profile space for equilibrium outcomes",
        2_000_000,
        table_size,
    )?;

    // Outcome (and its feasibility) per joint action index.
    let mut outcomes: Vec<(Matching, bool)> = Vec::with_capacity(table_size);
    let strides = strides_of(&actions);
    let mut choice = vec![0usize; manips.len()];
    loop {
        let mut p = StrategyProfile::empty();
        for (slot, &w) in manips.iter().enumerate() {
            p.insert(w, actions[slot][choice[slot]].clone());
        }
        let (mu, _) = gale_shapley(inst, Some(&p), Side::Men)?;
        let feasible = is_stable(inst, &mu);
        outcomes.push((mu, feasible));
        if !advance_radix(&mut choice, &actions) {
            break;
        }
    }

    let coalitions: Vec<Vec<usize>> = {
        let mut out = Vec::new();
        for mask in 1u32..(1 << manips.len()) {
            if concept == Concept::Nash && (mask & (mask - 1)) != 0 {
                continue;
            }
            out.push((0..manips.len()).filter(|i| mask & (1 << i) != 0).collect());
        }
        out
    };

    let mut result: BTreeSet<Matching> = BTreeSet::new();
    let mut choice = vec![0usize; manips.len()];
    let mut flat = 0usize;
    loop {
        let (ref base, base_feasible) = outcomes[flat];
        if !(feasibility_filter && !base_feasible) && !result.contains(base) {
            let mut beaten = false;
            'coalitions: for coalition in &coalitions {
                let mut dev = vec![0usize; coalition.len()];
                loop {
                    let mut alt_flat = flat;
                    for (k, &slot) in coalition.iter().enumerate() {
                        alt_flat = alt_flat - choice[slot] * strides[slot] + dev[k] * strides[slot];
                    }
                    let (ref alt, alt_feasible) = outcomes[alt_flat];
                    if !(feasibility_filter && !alt_feasible) {
                        let members: Vec<WomanId> =
                            coalition.iter().map(|&slot| manips[slot]).collect();
                        if improves_coalition(inst, &members, alt, base, concept) {
                            beaten = true;
                            break 'coalitions;
                        }
                    }
                    if !advance_mixed(&mut dev, coalition, &actions) {
                        break;
                    }
                }
            }
            if !beaten {
                result.insert(base.clone());
            }
        }
        flat += 1;
        if !advance_radix(&mut choice, &actions) {
            break;
        }
    }
    Ok(result)
}

fn strides_of(actions: &[Vec<Vec<ManId>>]) -> Vec<usize> {
    let mut strides = vec![1usize; actions.len()];
    for i in (0..actions.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * actions[i + 1].len();
    }
    strides
}

fn advance_radix(choice: &mut [usize], actions: &[Vec<Vec<ManId>>]) -> bool {
    for slot in (0..choice.len()).rev() {
        choice[slot] += 1;
        if choice[slot] < actions[slot].len() {
            return true;
        }
        choice[slot] = 0;
    }
    false
}

fn advance_mixed(dev: &mut [usize], coalition: &[usize], actions: &[Vec<Vec<ManId>>]) -> bool {
    for k in (0..dev.len()).rev() {
        dev[k] += 1;
        if dev[k] < actions[coalition[k]].len() {
            return true;
        }
        dev[k] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::{fix_d1, fix_d2, fix_d3, fix_t1, mk_instance, pairs, profile};

    #[test]
    fn four_stable_matchings_in_the_two_rotation_market() {
        let inst = fix_d1();
        let stable = enumerate_stable(&inst).unwrap();
        let expected = vec![
            pairs(4, &[(1, 4), (2, 1), (3, 3), (4, 2)]), // men-optimal
            pairs(4, &[(1, 4), (2, 3), (3, 1), (4, 2)]), // w1's gain
            pairs(4, &[(1, 2), (2, 1), (3, 3), (4, 4)]), // w2's gain
            pairs(4, &[(1, 2), (2, 3), (3, 1), (4, 4)]), // women-optimal
        ];
        let stable_set: BTreeSet<_> = stable.into_iter().collect();
        assert_eq!(stable_set, expected.into_iter().collect());
    }

    #[test]
    fn unique_stable_matchings() {
        assert_eq!(enumerate_stable(&fix_d2()).unwrap().len(), 1);
        let d3 = enumerate_stable(&fix_d3()).unwrap();
        assert_eq!(d3, vec![pairs(4, &[(1, 1), (2, 2), (3, 3), (4, 4)])]);
    }

    #[test]
    fn five_stable_matchings_in_the_chain_market() {
        let inst = fix_t1();
        let stable = enumerate_stable(&inst).unwrap();
        assert_eq!(stable.len(), 5);
        // Extremes present.
        assert!(stable.contains(&pairs(6, &[(1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (6, 6)])));
        assert!(stable.contains(&pairs(6, &[(1, 5), (2, 6), (3, 4), (4, 3), (5, 1), (6, 2)])));
    }

    #[test]
    fn singles_are_constant_across_the_stable_set() {
        // m2 and w2 can never be matched stably here: w2 lists nobody.
        let inst = mk_instance(&[&[1], &[1, 2]], &[&[1, 2], &[]], &[]);
        let stable = enumerate_stable(&inst).unwrap();
        assert!(!stable.is_empty());
        for mu in &stable {
            let (sm, sw) = mu.singles();
            assert_eq!(sm, vec![ManId(2)]);
            assert_eq!(sw, vec![WomanId(2)]);
        }
    }

    #[test]
    fn suitor_feasible_set_drops_the_joint_optimum() {
        let inst = fix_d1();
        let fs = feasible_set(&inst, ManipKind::Suitor).unwrap();
        let expected: BTreeSet<Matching> = [
            pairs(4, &[(1, 4), (2, 1), (3, 3), (4, 2)]),
            pairs(4, &[(1, 4), (2, 3), (3, 1), (4, 2)]),
            pairs(4, &[(1, 2), (2, 1), (3, 3), (4, 4)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(fs.into_iter().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn truncation_matches_general_manipulations() {
        let inst = fix_d1();
        let trunc = feasible_set(&inst, ManipKind::Truncation).unwrap();
        let general = feasible_set_general(&inst).unwrap();
        assert_eq!(trunc, general);
    }

    #[test]
    fn permutation_matches_suitor_characterization() {
        let inst = fix_d1();
        let perm = feasible_set(&inst, ManipKind::Permutation).unwrap();
        let suitor = feasible_set(&inst, ManipKind::Suitor).unwrap();
        assert_eq!(perm, suitor);
    }

    #[test]
    fn empty_coalition_can_only_induce_the_truthful_outcome() {
        let inst = fix_d1().with_manipulators(BTreeSet::new()).unwrap();
        for kind in [ManipKind::Truncation, ManipKind::Permutation, ManipKind::Suitor] {
            let fs = feasible_set(&inst, kind).unwrap();
            assert_eq!(fs, vec![pairs(4, &[(1, 4), (2, 1), (3, 3), (4, 2)])]);
        }
    }

    #[test]
    fn pareto_judgments_on_the_three_element_feasible_set() {
        let inst = fix_d1();
        let fs = feasible_set(&inst, ManipKind::Suitor).unwrap();
        let mu0 = pairs(4, &[(1, 4), (2, 1), (3, 3), (4, 2)]);
        let mu_a = pairs(4, &[(1, 4), (2, 3), (3, 1), (4, 2)]);
        let mu_b = pairs(4, &[(1, 2), (2, 1), (3, 3), (4, 4)]);
        assert!(is_pareto_optimal(&inst, &mu_a, &fs).unwrap());
        assert!(is_pareto_optimal(&inst, &mu_b, &fs).unwrap());
        assert!(!is_pareto_optimal(&inst, &mu0, &fs).unwrap());
        let frontier: BTreeSet<_> = pareto_frontier(&inst, &fs).into_iter().collect();
        assert_eq!(frontier, [mu_a, mu_b].into_iter().collect());
        let outside = pairs(4, &[(1, 1), (2, 2), (3, 3), (4, 4)]);
        assert!(is_pareto_optimal(&inst, &outside, &fs).is_err());
    }

    #[test]
    fn singleton_candidate_set_is_trivially_optimal() {
        let inst = fix_d3();
        let fs = vec![pairs(4, &[(1, 1), (2, 2), (3, 3), (4, 4)])];
        assert!(is_pareto_optimal(&inst, &fs[0], &fs).unwrap());
    }

    #[test]
    fn truncating_to_best_stable_partners_is_super_strong() {
        let inst = fix_t1();
        let p = profile(&[(1, &[5]), (2, &[6])]);
        assert!(equilibrium_check(&inst, &p, Concept::SuperStrong, true).unwrap());
    }

    #[test]
    fn truthful_permutations_lose_super_strength_without_the_filter() {
        // With a unique stable matching the coalition cannot profit by any
        // feasible deviation — but allowing unstable outcomes, w3 can ride
        // a joint deviation to her favorite while w1 keeps her partner.
        let inst = fix_d3();
        let p = profile(&[(1, &[3, 1, 2, 4]), (3, &[2, 3, 4, 1])]);
        assert!(equilibrium_check_in(
            &inst,
            &p,
            DeviationSpace::Permutation,
            Concept::SuperStrong,
            true
        )
        .unwrap());
        assert!(!equilibrium_check_in(
            &inst,
            &p,
            DeviationSpace::Permutation,
            Concept::SuperStrong,
            false
        )
        .unwrap());
    }

    #[test]
    fn equilibrium_outcomes_match_per_profile_checks() {
        let inst = fix_d1();
        let outcomes = equilibrium_outcomes(
            &inst,
            DeviationSpace::Permutation,
            Concept::SuperStrong,
            true,
        )
        .unwrap();
        let expected: BTreeSet<Matching> = [
            pairs(4, &[(1, 4), (2, 3), (3, 1), (4, 2)]),
            pairs(4, &[(1, 2), (2, 1), (3, 3), (4, 4)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(outcomes, expected);
    }

    #[test]
    fn oversized_inputs_are_refused_not_attempted() {
        let men: Vec<Vec<u32>> = (0..9).map(|_| (1..=9).collect()).collect();
        let men_refs: Vec<&[u32]> = men.iter().map(|v| v.as_slice()).collect();
        let inst = mk_instance(&men_refs, &men_refs, &[1]);
        assert!(matches!(
            enumerate_stable(&inst),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            feasible_set(&inst, ManipKind::Permutation),
            Err(Error::TooLarge { .. })
        ));
    }
}
