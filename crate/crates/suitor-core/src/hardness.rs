//! Satisfiability gadget: compile a three-literal CNF formula into a
//! market where the coalition can make every member strictly better off
//! exactly when the formula is satisfiable — a constructive witness that
//! the strictly-better coalition question is as hard as 3-SAT — plus the
//! maps between truth assignments and coalition strategies, and a small
//! exhaustive search answering the question directly on any instance.
//!
//! A formula with `n` variables and `m` clauses becomes a complete
//! `6n + 2m` market. Variable `i` owns six consecutive ids starting at
//! `6(i-1)`: three "plus" agents (`+1`, `+2`, `+3` at offsets 1..3) and
//! three "minus" agents (`-1`, `-2`, `-3` at offsets 4..6), mirrored
//! across men and women. Clause `j` owns a left/right pair at
//! `6n + 2j - 1` and `6n + 2j`. Under truthful lists the market settles
//! on the diagonal (id k with id k). The coalition is every variable's
//! `+2` and `-2` woman plus every clause's right woman.
//!
//! The load-bearing wiring: the `-3` man of a variable walks through the
//! left women of the clauses where the variable appears *positively*
//! (the `+3` man symmetrically through the clauses where it appears
//! negated), and each left woman ranks those visitors above her diagonal
//! partner. Setting a variable true is a reordering by its `+2`/`-2`
//! women that evicts the `-3` man and sends him down exactly that walk:
//! every clause the variable satisfies gets its left/right pair swapped
//! along the way, which is the only way the clause's right woman — a
//! coalition member — can improve. An unsatisfied clause's pair can
//! never be swapped by any reordering, because every man its left woman
//! prefers to her partner is then already matched to someone he likes
//! better, leaving the pair sealed off from the coalition's reach.
//!
//! Everything here is deterministic: ids, list tails (ascending), and
//! the search's enumeration order are all fixed, so equal inputs give
//! byte-equal outputs.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::feasibility::{build_suitor_graph, construct_manipulator_profile, is_feasible};
use crate::gs::{gale_shapley, Side};
use crate::instance::{Instance, ManId, Matching, StrategyProfile, WomanId};
use crate::rotations::{closed_set_matching, closed_sets, rotation_poset};

/// One signed literal: variable ids are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Lit {
    pub var: u32,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: u32) -> Self {
        Lit { var, positive: true }
    }

    pub fn neg(var: u32) -> Self {
        Lit {
            var,
            positive: false,
        }
    }
}

/// A conjunction of three-literal clauses. Repeated literals inside a
/// clause are allowed (a two-literal clause is written by repeating one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf3 {
    n_vars: u32,
    clauses: Vec<[Lit; 3]>,
}

impl Cnf3 {
    /// Validated constructor: at least one variable, at least one clause,
    /// every literal over a declared variable.
    pub fn new(n_vars: u32, clauses: Vec<[Lit; 3]>) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::BadInstance(
                "a formula needs at least one variable".into(),
            ));
        }
        if clauses.is_empty() {
            return Err(Error::BadInstance(
                "a formula needs at least one clause".into(),
            ));
        }
        for (j, clause) in clauses.iter().enumerate() {
            for lit in clause {
                if lit.var == 0 || lit.var > n_vars {
                    return Err(Error::BadInstance(format!(
                        "clause {} uses variable {} outside 1..={}",
                        j + 1,
                        lit.var,
                        n_vars
                    )));
                }
            }
        }
        Ok(Cnf3 { n_vars, clauses })
    }

    pub fn n_vars(&self) -> u32 {
        self.n_vars
    }

    pub fn n_clauses(&self) -> u32 {
        self.clauses.len() as u32
    }

    pub fn clauses(&self) -> &[[Lit; 3]] {
        &self.clauses
    }

    /// Number of men (= women) in the compiled market.
    pub fn size(&self) -> u32 {
        6 * self.n_vars + 2 * self.n_clauses()
    }

    /// Evaluate under `assign` (index `v - 1` holds variable `v`).
    /// A wrong-length assignment is an error, not `false`.
    pub fn is_satisfied_by(&self, assign: &[bool]) -> Result<bool> {
        if assign.len() != self.n_vars as usize {
            return Err(Error::BadAssignment(format!(
                "assignment covers {} variables, formula has {}",
                assign.len(),
                self.n_vars
            )));
        }
        Ok(self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|lit| assign[(lit.var - 1) as usize] == lit.positive)
        }))
    }

    /// Id of variable `var`'s plus-side agent at `slot` 1..=3 (same id on
    /// both sides of the market).
    pub fn plus_id(&self, var: u32, slot: u32) -> u32 {
        debug_assert!((1..=self.n_vars).contains(&var) && (1..=3).contains(&slot));
        6 * (var - 1) + slot
    }

    /// Id of variable `var`'s minus-side agent at `slot` 1..=3.
    pub fn minus_id(&self, var: u32, slot: u32) -> u32 {
        debug_assert!((1..=self.n_vars).contains(&var) && (1..=3).contains(&slot));
        6 * (var - 1) + 3 + slot
    }

    /// Id of clause `clause`'s left agent.
    pub fn left_id(&self, clause: u32) -> u32 {
        debug_assert!((1..=self.n_clauses()).contains(&clause));
        6 * self.n_vars + 2 * (clause - 1) + 1
    }

    /// Id of clause `clause`'s right agent.
    pub fn right_id(&self, clause: u32) -> u32 {
        debug_assert!((1..=self.n_clauses()).contains(&clause));
        6 * self.n_vars + 2 * clause
    }

    /// Human-readable role of an id in the compiled market: `x2+3`,
    /// `x1-2`, `c1l`, `c1r`. `None` outside `1..=size()`.
    pub fn agent_label(&self, id: u32) -> Option<String> {
        if id == 0 || id > self.size() {
            return None;
        }
        if id <= 6 * self.n_vars {
            let var = (id - 1) / 6 + 1;
            let off = (id - 1) % 6;
            let (sign, slot) = if off < 3 { ('+', off + 1) } else { ('-', off - 2) };
            Some(format!("x{var}{sign}{slot}"))
        } else {
            let rel = id - 6 * self.n_vars - 1;
            let clause = rel / 2 + 1;
            let side = if rel.is_multiple_of(2) { 'l' } else { 'r' };
            Some(format!("c{clause}{side}"))
        }
    }

    /// Ascending clause ids in which `lit` occurs.
    fn clauses_with(&self, lit: Lit) -> Vec<u32> {
        self.clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| c.contains(&lit))
            .map(|(j, _)| j as u32 + 1)
            .collect()
    }
}

/// `prefix` completed into a full list over `1..=total` by appending every
/// missing id in ascending order.
fn complete(prefix: Vec<u32>, total: u32) -> Vec<u32> {
    let seen: BTreeSet<u32> = prefix.iter().copied().collect();
    let mut out = prefix;
    out.extend((1..=total).filter(|id| !seen.contains(id)));
    out
}

/// Compile `phi` into its market. The coalition can make all of its
/// members strictly better off (by reordering lists) if and only if `phi`
/// is satisfiable; [`assignment_to_profile`] and
/// [`matching_to_assignment`] are the two directions of that equivalence.
pub fn sat_to_game(phi: &Cnf3) -> Result<Instance> {
    let total = phi.size();
    let mut men: Vec<Vec<u32>> = Vec::with_capacity(total as usize);
    let mut women: Vec<Vec<u32>> = Vec::with_capacity(total as usize);
    men.resize(total as usize, Vec::new());
    women.resize(total as usize, Vec::new());
    let put = |side: &mut Vec<Vec<u32>>, id: u32, prefix: Vec<u32>| {
        side[(id - 1) as usize] = complete(prefix, total);
    };

    for i in 1..=phi.n_vars {
        let p = |slot| phi.plus_id(i, slot);
        let m = |slot| phi.minus_id(i, slot);
        // Walks: the minus-3 man visits the clauses the variable
        // satisfies when set true, the plus-3 man those it satisfies
        // when set false.
        let true_stops: Vec<u32> = phi.clauses_with(Lit::pos(i)).iter().map(|&j| phi.left_id(j)).collect();
        let false_stops: Vec<u32> = phi.clauses_with(Lit::neg(i)).iter().map(|&j| phi.left_id(j)).collect();

        put(&mut men, p(1), alloc::vec![p(1), p(2), m(3)]);
        put(&mut men, p(2), alloc::vec![p(2), p(1)]);
        let mut m_p3 = alloc::vec![p(2), p(3)];
        m_p3.extend(&false_stops);
        m_p3.push(m(2));
        put(&mut men, p(3), m_p3);
        put(&mut men, m(1), alloc::vec![m(1), m(2), p(3)]);
        put(&mut men, m(2), alloc::vec![m(2), m(1)]);
        let mut m_m3 = alloc::vec![m(2), m(3)];
        m_m3.extend(&true_stops);
        m_m3.push(p(2));
        put(&mut men, m(3), m_m3);

        put(&mut women, p(1), alloc::vec![p(2), p(1)]);
        put(&mut women, p(2), alloc::vec![m(3), p(1), p(2), p(3)]);
        put(&mut women, p(3), alloc::vec![m(1), p(3)]);
        put(&mut women, m(1), alloc::vec![m(2), m(1)]);
        put(&mut women, m(2), alloc::vec![p(3), m(1), m(2), m(3)]);
        put(&mut women, m(3), alloc::vec![p(1), m(3)]);
    }

    for j in 1..=phi.n_clauses() {
        let l = phi.left_id(j);
        let r = phi.right_id(j);
        put(&mut men, l, alloc::vec![l, r]);
        put(&mut men, r, alloc::vec![r, l]);
        // The left woman ranks her clause's literal men between her two
        // clause partners, first occurrence per man.
        let mut wl = alloc::vec![r];
        for lit in &phi.clauses[(j - 1) as usize] {
            let visitor = if lit.positive {
                phi.minus_id(lit.var, 3)
            } else {
                phi.plus_id(lit.var, 3)
            };
            if !wl.contains(&visitor) {
                wl.push(visitor);
            }
        }
        wl.push(l);
        put(&mut women, l, wl);
        put(&mut women, r, alloc::vec![l, r]);
    }

    let mut manipulators: BTreeSet<WomanId> = BTreeSet::new();
    for i in 1..=phi.n_vars {
        manipulators.insert(WomanId(phi.plus_id(i, 2)));
        manipulators.insert(WomanId(phi.minus_id(i, 2)));
    }
    for j in 1..=phi.n_clauses() {
        manipulators.insert(WomanId(phi.right_id(j)));
    }

    let men = men
        .into_iter()
        .map(|l| l.into_iter().map(WomanId).collect())
        .collect();
    let women = women
        .into_iter()
        .map(|l| l.into_iter().map(ManId).collect())
        .collect();
    Instance::new(men, women, manipulators)
}

/// Compile a satisfying assignment into stated lists for the coalition.
///
/// Each variable's `+2`/`-2` women reorder their four-man prefixes so the
/// run evicts the gadget man matching the assigned polarity and walks him
/// through his clause stops; clause women stay truthful — their
/// improvement is carried entirely by the visitors. The returned profile
/// is verified: the run under it leaves every coalition member strictly
/// better off than the truthful diagonal.
pub fn assignment_to_profile(phi: &Cnf3, assign: &[bool]) -> Result<StrategyProfile> {
    if !phi.is_satisfied_by(assign)? {
        return Err(Error::BadAssignment(
            "the assignment does not satisfy the formula, so at least one clause woman \
             cannot be improved"
                .into(),
        ));
    }
    let inst = sat_to_game(phi)?;
    let mut profile = StrategyProfile::empty();
    for i in 1..=phi.n_vars {
        let p = |slot| ManId(phi.plus_id(i, slot));
        let m = |slot| ManId(phi.minus_id(i, slot));
        let (plus_prefix, minus_prefix) = if assign[(i - 1) as usize] {
            // True: the -3 man must end on top of the +2 woman, and the
            // -1 man on top of what the -2 woman can keep.
            (
                alloc::vec![m(3), p(3), p(1), p(2)],
                alloc::vec![p(3), m(1), m(3), m(2)],
            )
        } else {
            (
                alloc::vec![m(3), p(1), p(3), p(2)],
                alloc::vec![p(3), m(3), m(1), m(2)],
            )
        };
        for (w, prefix) in [
            (WomanId(phi.plus_id(i, 2)), plus_prefix),
            (WomanId(phi.minus_id(i, 2)), minus_prefix),
        ] {
            let mut list = prefix.clone();
            list.extend(
                inst.woman_list(w)
                    .iter()
                    .copied()
                    .filter(|x| !prefix.contains(x)),
            );
            profile.insert(w, list);
        }
    }

    let (mu, _) = gale_shapley(&inst, Some(&profile), Side::Men)?;
    let (truthful, _) = gale_shapley(&inst, None, Side::Men)?;
    for &w in inst.manipulators() {
        if !inst.woman_improves(w, mu.husband_of(w), truthful.husband_of(w)) {
            return Err(Error::Internal(format!(
                "satisfying assignment failed to improve {w}: {mu}"
            )));
        }
    }
    Ok(profile)
}

/// Read a truth assignment back off a strictly-better matching of
/// `phi`'s market: a variable is true exactly when its `+2` woman holds
/// the `-3` man. The matching must pair every variable gadget one of the
/// three ways a coalition win can, and the decoded assignment must
/// satisfy the formula; anything else — the truthful diagonal included —
/// is rejected.
pub fn matching_to_assignment(phi: &Cnf3, mu: &Matching) -> Result<Vec<bool>> {
    if mu.n() != phi.size() as usize {
        return Err(Error::BadMatching(format!(
            "matching is over {} pairs but the market has {}",
            mu.n(),
            phi.size()
        )));
    }
    let mut assign = Vec::with_capacity(phi.n_vars as usize);
    for i in 1..=phi.n_vars {
        let plus = mu.husband_of(WomanId(phi.plus_id(i, 2)));
        let minus = mu.husband_of(WomanId(phi.minus_id(i, 2)));
        let pair = (
            plus.map(|m| m.0).unwrap_or(0),
            minus.map(|m| m.0).unwrap_or(0),
        );
        let one_up = (phi.plus_id(i, 1), phi.minus_id(i, 1));
        let var_true = (phi.minus_id(i, 3), phi.minus_id(i, 1));
        let var_false = (phi.plus_id(i, 1), phi.plus_id(i, 3));
        if pair == var_true {
            assign.push(true);
        } else if pair == var_false || pair == one_up {
            assign.push(false);
        } else {
            return Err(Error::BadMatching(format!(
                "variable {i}'s gadget is not paired the way any coalition win pairs it: \
                 {mu}"
            )));
        }
    }
    if !phi.is_satisfied_by(&assign)? {
        return Err(Error::BadMatching(format!(
            "the matching decodes to an assignment that does not satisfy the formula: {mu}"
        )));
    }
    Ok(assign)
}

/// Exhaustively look for a full-list reordering of the coalition's lists
/// that leaves every member strictly better off than the truthful run.
///
/// Walks every stable matching (as a downward-closed rotation set, in
/// enumeration order), keeps those strictly better for all manipulators
/// and reachable per the suitor graph, and synthesizes stated lists for
/// the first hit. `Ok(None)` means the whole space was searched and no
/// such reordering exists — distinct from [`Error::BudgetExceeded`],
/// which aborts after examining `budget` stable matchings and decides
/// nothing. An empty coalition has nobody to improve: `Ok(None)`.
pub fn strictly_better_search(inst: &Instance, budget: u64) -> Result<Option<StrategyProfile>> {
    if inst.manipulators().is_empty() {
        return Ok(None);
    }
    let (truthful, _) = gale_shapley(inst, None, Side::Men)?;
    let poset = rotation_poset(inst)?;
    let all = closed_sets(&poset)?;
    let mut examined: u64 = 0;
    let mut feasible_without_witness = false;
    for cs in &all {
        examined += 1;
        if examined > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        let mu = closed_set_matching(inst, &poset, cs)?;
        let all_strictly_better = inst
            .manipulators()
            .iter()
            .all(|&w| inst.woman_improves(w, mu.husband_of(w), truthful.husband_of(w)));
        if !all_strictly_better {
            continue;
        }
        if !is_feasible(&build_suitor_graph(inst, &mu)?).feasible {
            continue;
        }
        let p = construct_manipulator_profile(inst, &mu)?;
        let full_lists = p
            .iter()
            .all(|(w, list)| list.len() == inst.woman_list(w).len());
        if full_lists {
            return Ok(Some(p));
        }
        feasible_without_witness = true;
    }
    if feasible_without_witness {
        // The graph said reachable but synthesis only produced shortened
        // lists; surfacing this loudly beats quietly claiming "none".
        return Err(Error::Internal(
            "a reachable strictly-better matching exists but no full-list witness was \
             synthesized"
                .into(),
        ));
    }
    Ok(None)
}
