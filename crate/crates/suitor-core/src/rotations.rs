//! Reduced preference tables, rotations, and the precedence order whose
//! downward-closed sets enumerate the stable matchings.
//!
//! Running men-proposing deferred acceptance and then deleting every pair
//! that provably cannot occur in any stable matching leaves each agent with
//! a *reduced list*; the per-agent reduced lists form a [`ReducedTable`].
//! In that table every matched man's first entry is his current partner and
//! every matched woman's last entry is hers. A [`Rotation`] is a cyclic
//! pattern in the table — man `m_i` is matched to `w_i` while `w_{i+1}` is
//! his second choice and prefers him to her own partner — and *eliminating*
//! it shifts every `m_i` to `w_{i+1}`, producing the next stable matching
//! down the men's lattice. Repeating until no rotation remains walks from
//! the men-optimal to the women-optimal matching.
//!
//! Every instance has one fixed set of rotations regardless of elimination
//! order, partially ordered by which eliminations unlock which
//! ([`rotation_poset`]). The downward-closed sets of that order are in
//! one-to-one correspondence with the stable matchings
//! ([`closed_sets`], [`closed_set_matching`], [`closed_set_of_matching`]),
//! which is what the manipulation planners traverse instead of enumerating
//! matchings directly.
//!
//! Determinism: rotation ids are discovery order under a fixed sweep
//! (always eliminate the exposed rotation with the least man id first), so
//! ids are already topologically sorted; every returned collection is
//! sorted. Elimination also emits a [`ProposalTrace`] replaying the
//! proposals and displacements the shift corresponds to, which the
//! stated-list synthesizer consumes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::gs::{EventKind, ProposalEvent, ProposalTrace, Side};
use crate::instance::{effective_woman_list, Instance, ManId, Matching, StrategyProfile, WomanId};
use crate::stability::blocking_pairs;

/// Refusing to enumerate more closed sets than this; the family can be
/// exponential in the rotation count.
pub const MAX_CLOSED_SETS: usize = 1_000_000;

/// Per-agent reduced preference lists plus the elimination bookkeeping
/// needed to reconstruct why each deleted pair died.
///
/// The table owns a copy of the instance it was built from (with any
/// stated-list overlay already applied), so elimination can replay
/// proposals down men's full lists without further context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedTable {
    /// The effective market: men's true lists, women's stated-or-true lists.
    base: Instance,
    men: Vec<Vec<WomanId>>,
    women: Vec<Vec<ManId>>,
    /// Deleted pair -> index into `history` of the elimination that deleted
    /// it. Pairs deleted by the initial deferred-acceptance run are absent.
    eliminated_by: BTreeMap<(ManId, WomanId), usize>,
    /// Rotations eliminated from this table so far, in order.
    history: Vec<Rotation>,
}

impl ReducedTable {
    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// `m`'s current reduced list, best first. Empty iff `m` is unmatched.
    pub fn man_list(&self, m: ManId) -> &[WomanId] {
        &self.men[m.idx()]
    }

    /// `w`'s current reduced list, best first. Her partner, if any, is the
    /// last entry. An unmatched woman may retain entries: men who never
    /// reached her because they hold someone they like better.
    pub fn woman_list(&self, w: WomanId) -> &[ManId] {
        &self.women[w.idx()]
    }

    /// The current matching: every man with a nonempty list paired with its
    /// first entry.
    pub fn matching(&self) -> Matching {
        let mut mu = Matching::empty(self.n());
        for (i, list) in self.men.iter().enumerate() {
            if let Some(&w) = list.first() {
                mu.set(ManId::from_idx(i), w);
            }
        }
        mu
    }

    /// Rotations eliminated from this table, in elimination order.
    pub fn history(&self) -> &[Rotation] {
        &self.history
    }

    /// Which elimination (index into [`Self::history`]) deleted the pair
    /// `(m, w)`; `None` for live pairs and for pairs the initial
    /// deferred-acceptance run deleted.
    pub fn eliminated_by(&self, m: ManId, w: WomanId) -> Option<usize> {
        self.eliminated_by.get(&(m, w)).copied()
    }

    /// Woman `w`'s current partner: the last man on her list, provided his
    /// first entry is her.
    fn partner_of_woman(&self, w: WomanId) -> Option<ManId> {
        let m = *self.women[w.idx()].last()?;
        (self.men[m.idx()].first() == Some(&w)).then_some(m)
    }

    fn delete_pair(&mut self, m: ManId, w: WomanId) {
        self.men[m.idx()].retain(|&x| x != w);
        self.women[w.idx()].retain(|&x| x != m);
    }
}

/// Build the reduced table for the effective profile: run men-proposing
/// deferred acceptance, deleting along the way every pair the run proves
/// impossible (whenever `w` receives a proposal from `m`, every man she
/// likes strictly less than `m` is deleted from her list, and she from
/// his).
///
/// The resulting matching equals the men-proposing [`crate::gs::gale_shapley`]
/// outcome; each matched man's first entry is his partner and each matched
/// woman's last entry is hers.
pub fn reduced_table(inst: &Instance, overlay: Option<&StrategyProfile>) -> Result<ReducedTable> {
    if let Some(p) = overlay {
        p.validate_for(inst)?;
    }
    let base = Instance::new(
        inst.men().map(|m| inst.man_list(m).to_vec()).collect(),
        inst.women()
            .map(|w| effective_woman_list(inst, overlay, w).to_vec())
            .collect(),
        inst.manipulators().clone(),
    )?;

    // Drop one-sided pairs up front: a pair can only ever match if each
    // agent is on the other's effective list.
    let men: Vec<Vec<WomanId>> = base
        .men()
        .map(|m| {
            base.man_list(m)
                .iter()
                .copied()
                .filter(|&w| base.woman_rank(w, m).is_some())
                .collect()
        })
        .collect();
    let women: Vec<Vec<ManId>> = base
        .women()
        .map(|w| {
            base.woman_list(w)
                .iter()
                .copied()
                .filter(|&m| base.man_rank(m, w).is_some())
                .collect()
        })
        .collect();

    let mut table = ReducedTable {
        base,
        men,
        women,
        eliminated_by: BTreeMap::new(),
        history: Vec::new(),
    };

    // Deferred acceptance with deletions. Free men propose in ascending id
    // order; a proposal from m to w deletes everyone w likes strictly less
    // than m (including her previous holder, who becomes free again).
    let mut free: BTreeSet<ManId> = table.base.men().collect();
    while let Some(m) = free.pop_first() {
        let Some(&w) = table.men[m.idx()].first() else {
            continue; // exhausted his list: unmatched in every stable matching
        };
        let my_rank = table
            .base
            .woman_rank(w, m)
            .expect("mutual consistency: proposer is on her list");
        let worse: Vec<ManId> = table.women[w.idx()]
            .iter()
            .copied()
            .filter(|&m2| table.base.woman_rank(w, m2).unwrap() > my_rank)
            .collect();
        for m2 in worse {
            let was_held = table.men[m2.idx()].first() == Some(&w);
            table.delete_pair(m2, w);
            if was_held {
                free.insert(m2);
            }
        }
        // m now sits last on w's list: he is her provisional partner.
        debug_assert_eq!(table.women[w.idx()].last(), Some(&m));
    }
    Ok(table)
}

/// A cyclic shift pattern in a reduced table: man `men[i]` moves from his
/// current partner `women[i]` to `women[i+1 mod r]`.
///
/// Canonical form: the cycle is rotated so the least man id comes first,
/// making equal rotations compare equal regardless of where the cycle was
/// detected. The derived `Ord` (least man first, then the rest) is the
/// canonical order used everywhere rotations are listed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rotation {
    men: Vec<ManId>,
    women: Vec<WomanId>,
}

impl Rotation {
    pub(crate) fn new(men: Vec<ManId>, women: Vec<WomanId>) -> Self {
        debug_assert!(men.len() >= 2 && men.len() == women.len());
        fn rotate<T: Copy>(v: &[T], i: usize) -> Vec<T> {
            v[i..].iter().chain(v[..i].iter()).copied().collect()
        }
        let least = men
            .iter()
            .enumerate()
            .min_by_key(|(_, m)| **m)
            .map(|(i, _)| i)
            .unwrap_or(0);
        Rotation {
            men: rotate(&men, least),
            women: rotate(&women, least),
        }
    }

    /// The men of the cycle, least id first.
    pub fn men(&self) -> &[ManId] {
        &self.men
    }

    /// `women()[i]` is `men()[i]`'s partner before elimination.
    pub fn women(&self) -> &[WomanId] {
        &self.women
    }

    /// The women rotated left by one: `women_shifted()[i]` is `men()[i]`'s
    /// partner after elimination.
    pub fn women_shifted(&self) -> Vec<WomanId> {
        let mut v = self.women.clone();
        v.rotate_left(1);
        v
    }

    /// Cycle length; always at least 2.
    pub fn len(&self) -> usize {
        self.men.len()
    }

    pub fn is_empty(&self) -> bool {
        self.men.is_empty()
    }

    /// `(man, from, to)` triples in cycle order.
    pub fn moves(&self) -> impl Iterator<Item = (ManId, WomanId, WomanId)> + '_ {
        let r = self.men.len();
        (0..r).map(move |i| (self.men[i], self.women[i], self.women[(i + 1) % r]))
    }

    /// The least woman id appearing in the cycle.
    pub fn min_woman(&self) -> WomanId {
        *self.women.iter().min().expect("rotations are nonempty")
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (m, from, to)) in self.moves().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{m}: {from}->{to}")?;
        }
        write!(f, ")")
    }
}

/// All rotations currently exposed in the table, sorted by least man id.
///
/// Man `m` is a candidate when he has a second reduced entry and that woman
/// is currently matched; following `m -> partner(second(m))` from every
/// candidate finds each cycle of the table exactly once. Candidates whose
/// walk merely feeds into a cycle (or dead-ends) are not part of any
/// exposed rotation.
pub fn exposed_rotations(table: &ReducedTable) -> Vec<Rotation> {
    let n = table.n();
    let step = |m: ManId| -> Option<ManId> {
        let list = table.man_list(m);
        if list.len() < 2 {
            return None;
        }
        table.partner_of_woman(list[1])
    };

    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color = vec![WHITE; n];
    let mut found: Vec<Rotation> = Vec::new();

    for start in table.base.men() {
        if color[start.idx()] != WHITE {
            continue;
        }
        let mut path: Vec<ManId> = Vec::new();
        let mut cur = start;
        loop {
            match color[cur.idx()] {
                BLACK => break,
                GRAY => {
                    // Closed a cycle within this walk.
                    let pos = path.iter().position(|&x| x == cur).unwrap();
                    let cyc = &path[pos..];
                    let men: Vec<ManId> = cyc.to_vec();
                    let women: Vec<WomanId> =
                        men.iter().map(|&m| table.man_list(m)[0]).collect();
                    found.push(Rotation::new(men, women));
                    break;
                }
                _ => {}
            }
            match step(cur) {
                None => {
                    color[cur.idx()] = BLACK;
                    break;
                }
                Some(next) => {
                    color[cur.idx()] = GRAY;
                    path.push(cur);
                    cur = next;
                }
            }
        }
        for m in path {
            color[m.idx()] = BLACK;
        }
    }
    found.sort();
    found
}

/// Eliminate an exposed rotation: every cycle man is rejected by his
/// current partner, proposes down his full list until the cycle's next
/// woman accepts him, and she drops both her previous partner and everyone
/// she likes strictly less than her new one.
///
/// Returns the updated table and the proposal trace of exactly those
/// rejections, acceptances, and displacements, in cycle order starting from
/// the least man. The new matching pairs each cycle man with the cycle's
/// next woman, everyone else unchanged, and is re-verified stable under the
/// table's effective lists before returning.
pub fn eliminate_rotation(
    table: &ReducedTable,
    rho: &Rotation,
) -> Result<(ReducedTable, ProposalTrace)> {
    if !exposed_rotations(table).iter().any(|r| r == rho) {
        return Err(Error::NotExposed);
    }
    let mut t = table.clone();
    let idx = t.history.len();
    t.history.push(rho.clone());
    let mut events: Vec<ProposalEvent> = Vec::new();

    let r = rho.len();
    for i in 0..r {
        let m = rho.men[i];
        let w_from = rho.women[i];
        let w_to = rho.women[(i + 1) % r];
        let m_next = rho.men[(i + 1) % r];

        // His hold on w_from ends. For i >= 1 the previous move's
        // truncation at w_from already deleted the pair (with this same
        // elimination as cause); for i == 0 it is still live.
        if t.men[m.idx()].contains(&w_from) {
            t.delete_pair(m, w_from);
            t.eliminated_by.insert((m, w_from), idx);
        } else {
            debug_assert_eq!(t.eliminated_by.get(&(m, w_from)), Some(&idx));
        }

        // He proposes down his full list; every woman strictly between
        // w_from and w_to turned him down at some earlier point (her pair
        // with him is already deleted), so she turns him down again here.
        let full = t.base.man_list(m);
        let from_rank = t.base.man_rank(m, w_from).expect("w_from is on his list");
        for &w in &full[from_rank + 1..] {
            if w == w_to {
                events.push(ProposalEvent {
                    man: m,
                    woman: w,
                    kind: EventKind::Accepted,
                });
                break;
            }
            debug_assert!(!t.men[m.idx()].contains(&w));
            events.push(ProposalEvent {
                man: m,
                woman: w,
                kind: EventKind::Rejected,
            });
        }

        // w_to trades up: her cycle partner m_next is out, and with him
        // everyone she likes strictly less than her new partner m.
        events.push(ProposalEvent {
            man: m_next,
            woman: w_to,
            kind: EventKind::Displaced,
        });
        let my_rank = t.base.woman_rank(w_to, m).expect("she ranks her new partner");
        let worse: Vec<ManId> = t.women[w_to.idx()]
            .iter()
            .copied()
            .filter(|&m2| t.base.woman_rank(w_to, m2).unwrap() > my_rank)
            .collect();
        for m2 in worse {
            t.delete_pair(m2, w_to);
            let prev = t.eliminated_by.insert((m2, w_to), idx);
            debug_assert!(prev.is_none());
        }
    }

    let mu = t.matching();
    for (m, _from, to) in rho.moves() {
        debug_assert_eq!(mu.wife_of(m), Some(to));
    }
    let report = blocking_pairs(&t.base, &mu);
    if !report.is_stable() {
        return Err(Error::Internal(format!(
            "matching after eliminating {rho} is unstable: {}",
            Error::UnstableInput {
                individually_rational: report.individually_rational,
                blocking: report.blocking,
            }
        )));
    }
    Ok((t, ProposalTrace::from_events(Side::Men, events)))
}

/// The full rotation set of an instance under its true lists, with the
/// precedence order on it.
///
/// Rotation ids are discovery order of the canonical sweep and thus
/// topologically sorted: `i` preceding `j` implies `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationPoset {
    rotations: Vec<Rotation>,
    /// Explicit precedence arcs `(i, j)` with `i` before `j`; the
    /// transitive closure of these is the full order.
    edges: BTreeSet<(usize, usize)>,
    /// preds_closed[j] = every i with i before j, transitively.
    preds_closed: Vec<BTreeSet<usize>>,
}

impl RotationPoset {
    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn rotation(&self, id: usize) -> Result<&Rotation> {
        self.rotations.get(id).ok_or(Error::UnknownRotation(id))
    }

    pub fn index_of(&self, rho: &Rotation) -> Option<usize> {
        self.rotations.iter().position(|r| r == rho)
    }

    /// Explicit arcs only; precedence is their transitive closure.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Does `i` come before `j` in the (strict) precedence order?
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.preds_closed
            .get(j)
            .is_some_and(|preds| preds.contains(&i))
    }

    /// All strict predecessors of `id`, transitively.
    pub fn predecessors(&self, id: usize) -> Result<&BTreeSet<usize>> {
        self.preds_closed
            .get(id)
            .ok_or(Error::UnknownRotation(id))
    }

    /// Err unless every member is a known id and every predecessor of a
    /// member is also a member.
    pub(crate) fn require_closed(&self, cs: &BTreeSet<usize>) -> Result<()> {
        let mut missing: BTreeSet<usize> = BTreeSet::new();
        for &id in cs {
            if id >= self.rotations.len() {
                return Err(Error::UnknownRotation(id));
            }
            missing.extend(self.preds_closed[id].difference(cs));
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::NotClosed {
                missing: missing.into_iter().collect(),
            })
        }
    }
}

/// Discover every rotation of the instance and the precedence order over
/// them.
///
/// The sweep repeatedly eliminates the first exposed rotation until none
/// remains; the set of rotations found this way is the same for every
/// elimination order. Precedence arcs come from two sources, both read off
/// the sweep's bookkeeping: the rotation that moved `m` to `w` precedes any
/// rotation later moving `m` away from `w`; and the rotation whose
/// elimination deleted `(m, w)` precedes any rotation that later walks `m`
/// past `w` (strictly between his from- and to-women). The full order is
/// the transitive closure of those arcs.
pub fn rotation_poset(inst: &Instance) -> Result<RotationPoset> {
    let mut table = reduced_table(inst, None)?;
    loop {
        let exposed = exposed_rotations(&table);
        let Some(rho) = exposed.first() else { break };
        let (next, _) = eliminate_rotation(&table, rho)?;
        table = next;
    }
    let rotations = table.history().to_vec();

    let mut arrival: BTreeMap<(ManId, WomanId), usize> = BTreeMap::new();
    for (j, rho) in rotations.iter().enumerate() {
        for (m, _from, to) in rho.moves() {
            let prev = arrival.insert((m, to), j);
            debug_assert!(prev.is_none(), "a man arrives at a woman at most once");
        }
    }

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (j, rho) in rotations.iter().enumerate() {
        for (m, from, to) in rho.moves() {
            if let Some(&i) = arrival.get(&(m, from)) {
                debug_assert!(i < j);
                edges.insert((i, j));
            }
            let from_rank = inst.man_rank(m, from).unwrap();
            let to_rank = inst.man_rank(m, to).unwrap();
            for &w in &inst.man_list(m)[from_rank + 1..to_rank] {
                if let Some(i) = table.eliminated_by(m, w) {
                    debug_assert!(i < j);
                    if i < j {
                        edges.insert((i, j));
                    }
                }
            }
        }
    }

    let mut preds_closed: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); rotations.len()];
    for &(i, j) in &edges {
        let mut add = preds_closed[i].clone();
        add.insert(i);
        preds_closed[j].extend(add);
    }

    Ok(RotationPoset {
        rotations,
        edges,
        preds_closed,
    })
}

/// The principle set of rotation `id`: the minimal downward-closed set
/// containing it, i.e. the rotation plus all its predecessors.
pub fn clo_set(poset: &RotationPoset, id: usize) -> Result<BTreeSet<usize>> {
    let mut cs = poset.predecessors(id)?.clone();
    cs.insert(id);
    Ok(cs)
}

/// The maximal elements of a closed set: members with no successor inside
/// the set. Their principle sets union back to the whole set.
pub fn max_rotations(poset: &RotationPoset, cs: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
    poset.require_closed(cs)?;
    Ok(cs
        .iter()
        .copied()
        .filter(|&r| !cs.iter().any(|&r2| r2 != r && poset.precedes(r, r2)))
        .collect())
}

/// Every downward-closed set of the poset, sorted. Refuses with
/// [`Error::TooLarge`] beyond [`MAX_CLOSED_SETS`] (the family is the stable
/// matching set, which can be exponential).
pub fn closed_sets(poset: &RotationPoset) -> Result<Vec<BTreeSet<usize>>> {
    let k = poset.len();
    let mut out: Vec<BTreeSet<usize>> = Vec::new();
    // Ids are topologically sorted, so deciding membership in id order
    // needs only "are all predecessors already in".
    let mut stack: Vec<(usize, BTreeSet<usize>)> = vec![(0, BTreeSet::new())];
    while let Some((next, cur)) = stack.pop() {
        if next == k {
            if out.len() == MAX_CLOSED_SETS {
                return Err(Error::TooLarge {
                    what: "closed-set family",
                    limit: MAX_CLOSED_SETS,
                    actual: MAX_CLOSED_SETS + 1,
                });
            }
            out.push(cur);
            continue;
        }
        if poset.preds_closed[next].is_subset(&cur) {
            let mut with = cur.clone();
            with.insert(next);
            stack.push((next + 1, with));
        }
        stack.push((next + 1, cur));
    }
    out.sort();
    Ok(out)
}

/// The stable matching a closed set denotes: eliminate its rotations in
/// ascending id order (a topological order) starting from the reduced
/// table. The empty set gives the men-optimal matching, the full set the
/// women-optimal one, and the result is independent of which topological
/// order is used.
pub fn closed_set_matching(
    inst: &Instance,
    poset: &RotationPoset,
    cs: &BTreeSet<usize>,
) -> Result<Matching> {
    poset.require_closed(cs)?;
    let mut table = reduced_table(inst, None)?;
    for &id in cs {
        let rho = poset.rotation(id)?;
        table = match eliminate_rotation(&table, rho) {
            Ok((t, _)) => t,
            Err(Error::NotExposed) => {
                return Err(Error::Internal(format!(
                    "rotation {id} not exposed while replaying a closed set; \
                     precedence arcs are incomplete"
                )))
            }
            Err(e) => return Err(e),
        };
    }
    Ok(table.matching())
}

/// The inverse of [`closed_set_matching`]: which closed set denotes this
/// stable matching. A rotation is in the set exactly when its least man
/// ended up strictly below that rotation's from-woman. The result is
/// re-verified by replaying it before returning.
pub fn closed_set_of_matching(
    inst: &Instance,
    poset: &RotationPoset,
    mu: &Matching,
) -> Result<BTreeSet<usize>> {
    let report = blocking_pairs(inst, mu);
    if !report.is_stable() {
        return Err(Error::UnstableInput {
            individually_rational: report.individually_rational,
            blocking: report.blocking,
        });
    }
    let cs: BTreeSet<usize> = poset
        .rotations()
        .iter()
        .enumerate()
        .filter(|(_, rho)| {
            let m = rho.men()[0];
            let from = rho.women()[0];
            inst.man_improves(m, Some(from), mu.wife_of(m))
        })
        .map(|(id, _)| id)
        .collect();
    let back = closed_set_matching(inst, poset, &cs)
        .map_err(|e| Error::Internal(format!("derived rotation set failed to replay: {e}")))?;
    if back != *mu {
        return Err(Error::Internal(format!(
            "derived rotation set replays to {back}, not {mu}"
        )));
    }
    Ok(cs)
}
