//! Which stable matchings the manipulating coalition can actually force.
//!
//! Under the men-proposing deferred-acceptance run, a coalition of women may
//! submit reordered preference lists and thereby steer the outcome away from
//! the truthful men-optimal matching. Not every stable matching is within
//! reach: flipping one woman's outcome usually requires a cascade of
//! rejections that other women have to carry, and non-coalition women always
//! answer truthfully. This module decides reachability and, when a target is
//! reachable, produces lists that realize it.
//!
//! The decision procedure is a directed graph over all men, all women, and a
//! virtual source `s`. For a target matching `mu`, each matched woman `w`
//! points at her partner and he points back; the men who prefer `w` to their
//! own partner (her *suitors*) point at her — all of them when `w` is in the
//! coalition (she may rank them as she likes), only her true favorite suitor
//! when she is not (truthful behavior keeps exactly that arc alive); a woman
//! with no suitors is instead fed from `s`. The target is inducible by some
//! coalition profile precisely when every matched agent is reachable from
//! `s`: a path from `s` certifies an order in which proposals can be made to
//! settle each agent without anyone left demanding attention.
//!
//! Two conventions make the graph well defined on markets with incomplete
//! lists, where agents can end up unmatched:
//!
//! * Unmatched agents carry no arcs and are exempt from the reachability
//!   requirement. An unmatched man is rejected everywhere he applies — a
//!   coalition woman can always rank him below her partner, and a truthful
//!   woman rejects him exactly because the target is stable — so he imposes
//!   no constraint, and he is likewise excluded from every suitor set.
//! * The source compares below every man: a woman backed by `s` can be
//!   settled before any proposal reaches her.
//!
//! [`apply_rotation_to_graph`] maintains the graph across a rotation
//! elimination without rebuilding it, walking each traded man down his list
//! and replaying the proposals he would make; the result is checked (in debug
//! builds) to coincide with a fresh [`build_suitor_graph`] of the successor
//! matching. [`construct_manipulator_profile`] synthesizes witness lists for
//! a reachable target straight off the graph: a breadth-first walk from the
//! source designates, per coalition woman, the suitor whose arrival relays
//! the displacement chain through her, and her stated list ranks him right
//! below her target partner; when the graph test fails it still tries the
//! cut-at-partner truncation profile, which realizes every target reachable
//! by arbitrary list rewrites, and only then reports the target infeasible. Everything here is deterministic:
//! agents are processed in id order and all collections iterate sorted.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::gs::{gale_shapley, Side};
use crate::instance::{Instance, ManId, Matching, StrategyProfile, WomanId};
use crate::rotations::Rotation;
use crate::stability::blocking_pairs;

/// A vertex of the suitor graph: the virtual source, a man, or a woman.
///
/// The derived order (source first, then men by id, then women by id) is the
/// canonical order used in diagnostics and sorted output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Source,
    Man(ManId),
    Woman(WomanId),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Source => write!(f, "s"),
            Node::Man(m) => write!(f, "{m}"),
            Node::Woman(w) => write!(f, "{w}"),
        }
    }
}

/// Outcome of the reachability test: `feasible` iff `unreached` is empty;
/// `unreached` lists the matched agents no path from the source reaches,
/// sorted in [`Node`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub unreached: Vec<Node>,
}

/// The suitor graph of a target matching. Immutable snapshot; incremental
/// update returns a new graph. Two graphs compare equal iff they have the
/// same size, the same matching, and the same arc set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuitorGraph {
    n: usize,
    mu: Matching,
    /// Adjacency by vertex index: 0 is the source, 1..=n the men,
    /// n+1..=2n the women.
    succ: Vec<BTreeSet<usize>>,
}

impl SuitorGraph {
    fn empty(n: usize, mu: Matching) -> Self {
        SuitorGraph {
            n,
            mu,
            succ: vec![BTreeSet::new(); 2 * n + 1],
        }
    }

    fn index(&self, node: Node) -> usize {
        match node {
            Node::Source => 0,
            Node::Man(m) => m.0 as usize,
            Node::Woman(w) => self.n + w.0 as usize,
        }
    }

    fn node_at(&self, i: usize) -> Node {
        if i == 0 {
            Node::Source
        } else if i <= self.n {
            Node::Man(ManId(i as u32))
        } else {
            Node::Woman(WomanId((i - self.n) as u32))
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The matching this graph was built for.
    pub fn matching(&self) -> &Matching {
        &self.mu
    }

    pub fn has_arc(&self, from: Node, to: Node) -> bool {
        self.succ[self.index(from)].contains(&self.index(to))
    }

    /// All arcs, sorted by (tail, head) in [`Node`] order.
    pub fn arcs(&self) -> Vec<(Node, Node)> {
        let mut out = Vec::new();
        for (i, heads) in self.succ.iter().enumerate() {
            for &j in heads {
                out.push((self.node_at(i), self.node_at(j)));
            }
        }
        out
    }

    /// Every node reachable from the source, the source included.
    pub fn reachable(&self) -> BTreeSet<Node> {
        let mut seen = vec![false; self.succ.len()];
        let mut queue = vec![0usize];
        seen[0] = true;
        while let Some(u) = queue.pop() {
            for &v in &self.succ[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|&(_, &s)| s)
            .map(|(i, _)| self.node_at(i))
            .collect()
    }

    fn add(&mut self, from: Node, to: Node) {
        let (i, j) = (self.index(from), self.index(to));
        self.succ[i].insert(j);
    }

    fn remove(&mut self, from: Node, to: Node) -> bool {
        let (i, j) = (self.index(from), self.index(to));
        self.succ[i].remove(&j)
    }

    fn in_neighbors(&self, to: Node) -> Vec<Node> {
        let j = self.index(to);
        (0..self.succ.len())
            .filter(|&i| self.succ[i].contains(&j))
            .map(|i| self.node_at(i))
            .collect()
    }
}

/// The suitors a matched woman has to handle under `mu`: matched men who
/// strictly prefer her to their own partner. Unmatched men are excluded (see
/// the module doc), and so are women `m` does not list — a man only applies
/// down his own list.
fn suitor_sets(inst: &Instance, mu: &Matching) -> BTreeMap<WomanId, BTreeSet<ManId>> {
    let mut delta: BTreeMap<WomanId, BTreeSet<ManId>> =
        inst.women().map(|w| (w, BTreeSet::new())).collect();
    for m in inst.men() {
        let Some(own) = mu.wife_of(m) else { continue };
        for &w in inst.man_list(m) {
            if w == own {
                break;
            }
            delta.get_mut(&w).expect("woman id in range").insert(m);
        }
    }
    delta
}

/// Build the suitor graph of `mu`.
///
/// Requires `mu` to be individually rational: every matched pair mutually
/// listed. Stability is not required here — an unstable target simply yields
/// a graph some other operation will reject — but
/// [`construct_manipulator_profile`] does require it.
pub fn build_suitor_graph(inst: &Instance, mu: &Matching) -> Result<SuitorGraph> {
    if mu.n() != inst.n() {
        return Err(Error::BadMatching(format!(
            "matching is over {} pairs but the instance has {}",
            mu.n(),
            inst.n()
        )));
    }
    for (m, w) in mu.pairs() {
        if inst.man_rank(m, w).is_none() || inst.woman_rank(w, m).is_none() {
            return Err(Error::BadMatching(format!(
                "pair ({m},{w}) is not mutually acceptable"
            )));
        }
    }
    let delta = suitor_sets(inst, mu);
    let mut g = SuitorGraph::empty(inst.n(), mu.clone());
    for w in inst.women() {
        let Some(partner) = mu.husband_of(w) else {
            continue;
        };
        g.add(Node::Woman(w), Node::Man(partner));
        g.add(Node::Man(partner), Node::Woman(w));
        let suitors = &delta[&w];
        if inst.is_manipulator(w) {
            // She may rank her suitors arbitrarily, so each one keeps her
            // pinned until he is settled elsewhere.
            for &m in suitors {
                g.add(Node::Man(m), Node::Woman(w));
            }
            if suitors.is_empty() {
                g.add(Node::Source, Node::Woman(w));
            }
        } else {
            // Truthful behavior: only the suitor she likes best matters; men
            // she does not list are rejected outright and pin nothing.
            let favorite = suitors
                .iter()
                .filter_map(|&m| inst.woman_rank(w, m).map(|r| (r, m)))
                .min();
            match favorite {
                Some((_, m)) => g.add(Node::Man(m), Node::Woman(w)),
                None => g.add(Node::Source, Node::Woman(w)),
            }
        }
    }
    Ok(g)
}

/// Reachability test: the target is inducible by the coalition iff every
/// matched agent has a path from the source.
pub fn is_feasible(g: &SuitorGraph) -> FeasibilityReport {
    let reached = g.reachable();
    let mut unreached = Vec::new();
    for (m, w) in g.mu.pairs() {
        if !reached.contains(&Node::Man(m)) {
            unreached.push(Node::Man(m));
        }
        if !reached.contains(&Node::Woman(w)) {
            unreached.push(Node::Woman(w));
        }
    }
    unreached.sort_unstable();
    FeasibilityReport {
        feasible: unreached.is_empty(),
        unreached,
    }
}

/// Strongly connected components of the graph, every vertex included
/// (isolated vertices form singletons). Components are sorted internally and
/// by their smallest node, so the output is deterministic.
pub fn strongly_connected_components(g: &SuitorGraph) -> Vec<Vec<Node>> {
    let v = g.succ.len();
    // Kosaraju: first pass records finish order, second pass sweeps the
    // transposed graph in reverse finish order.
    let mut finish: Vec<usize> = Vec::with_capacity(v);
    let mut seen = vec![false; v];
    for start in 0..v {
        if seen[start] {
            continue;
        }
        let mut stack: Vec<(usize, Vec<usize>)> =
            vec![(start, g.succ[start].iter().copied().collect())];
        seen[start] = true;
        while let Some((u, children)) = stack.last_mut() {
            match children.pop() {
                Some(c) if !seen[c] => {
                    seen[c] = true;
                    let grand = g.succ[c].iter().copied().collect();
                    stack.push((c, grand));
                }
                Some(_) => {}
                None => {
                    finish.push(*u);
                    stack.pop();
                }
            }
        }
    }
    let mut pred = vec![BTreeSet::new(); v];
    for (i, heads) in g.succ.iter().enumerate() {
        for &j in heads {
            pred[j].insert(i);
        }
    }
    let mut component = vec![usize::MAX; v];
    let mut comps: Vec<Vec<Node>> = Vec::new();
    for &root in finish.iter().rev() {
        if component[root] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = Vec::new();
        let mut queue = vec![root];
        component[root] = id;
        while let Some(u) = queue.pop() {
            members.push(g.node_at(u));
            for &p in &pred[u] {
                if component[p] == usize::MAX {
                    component[p] = id;
                    queue.push(p);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps.sort_unstable();
    comps
}

/// How a woman ranks an in-neighbor of hers during the incremental update;
/// the virtual source compares below every man.
fn rival_rank(inst: &Instance, w: WomanId, node: Node) -> usize {
    match node {
        Node::Source => usize::MAX,
        Node::Man(m) => inst.woman_rank(w, m).unwrap_or(usize::MAX - 1),
        Node::Woman(_) => {
            debug_assert!(false, "a woman cannot be a rival suitor");
            usize::MAX - 1
        }
    }
}

/// Re-point the graph across one rotation elimination without rebuilding it.
///
/// Each traded man drops his current partner and proposes down his true list
/// until his successor woman accepts him. At every matched woman he passes, a
/// coalition member simply gains his arc (and stops needing the source),
/// while a truthful woman keeps only her two best backers — the newcomer
/// evicts the weaker of them if he outranks him. A woman whose backing *man*
/// is evicted this way is *overtaken* and returned in the second component;
/// replacing a source arc does not count, since no suitor lost standing.
///
/// The rotation must trade exactly the current partners of its men, else
/// [`Error::NotExposed`]. The result equals [`build_suitor_graph`] applied to
/// the successor matching — debug builds assert this.
pub fn apply_rotation_to_graph(
    inst: &Instance,
    g: &SuitorGraph,
    rho: &Rotation,
) -> Result<(SuitorGraph, BTreeSet<WomanId>)> {
    for (m, from, _) in rho.moves() {
        if g.mu.wife_of(m) != Some(from) {
            return Err(Error::NotExposed);
        }
    }
    let mut g2 = g.clone();
    let mut overtaken = BTreeSet::new();
    // The dropped partners release their hold first; the men's own arcs to
    // them survive and become ordinary suitor arcs.
    for (m, from, _) in rho.moves() {
        let had = g2.remove(Node::Woman(from), Node::Man(m));
        debug_assert!(had, "partner arc {from}->{m} missing");
    }
    for (m, _, _) in rho.moves() {
        g2.mu.unset_man(m);
    }
    for (m, _, to) in rho.moves() {
        g2.mu.set(m, to);
    }
    for (m, from, to) in rho.moves() {
        let list = inst.man_list(m);
        let start = list
            .iter()
            .position(|&w| w == from)
            .ok_or_else(|| Error::Internal(format!("{m} does not list his old partner {from}")))?;
        let mut accepted = false;
        for &w in &list[start + 1..] {
            // Unmatched women hold no place in the graph; the proposal
            // bounces without a trace.
            if g2.mu.husband_of(w).is_some() {
                if inst.is_manipulator(w) {
                    g2.add(Node::Man(m), Node::Woman(w));
                    g2.remove(Node::Source, Node::Woman(w));
                } else if let Some(rank) = inst.woman_rank(w, m) {
                    let rivals = g2.in_neighbors(Node::Woman(w));
                    debug_assert!(!rivals.is_empty(), "matched woman {w} has no backer");
                    let worst = rivals
                        .into_iter()
                        .max_by_key(|&r| rival_rank(inst, w, r))
                        .expect("nonempty rivals");
                    if rank < rival_rank(inst, w, worst) {
                        g2.add(Node::Man(m), Node::Woman(w));
                        g2.remove(worst, Node::Woman(w));
                        if let Node::Man(_) = worst {
                            overtaken.insert(w);
                        }
                    }
                }
            }
            if w == to {
                g2.add(Node::Woman(w), Node::Man(m));
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::Internal(format!(
                "{m} never reached his successor {to}"
            )));
        }
    }
    #[cfg(debug_assertions)]
    {
        let rebuilt = build_suitor_graph(inst, &g2.mu)?;
        debug_assert!(
            g2 == rebuilt,
            "incremental update diverged from the direct build"
        );
    }
    Ok((g2, overtaken))
}

/// Does the men-proposing run under `p` land exactly on `mu`?
fn induces(inst: &Instance, p: &StrategyProfile, mu: &Matching) -> bool {
    match gale_shapley(inst, Some(p), Side::Men) {
        Ok((got, _)) => got == *mu,
        Err(_) => false,
    }
}

/// Each manipulator's true list cut right after her partner under `mu`
/// (unmatched manipulators keep their full list). Realizes every target any
/// list rewrite can realize: rewrites only matter through whom they reject,
/// and stability of the target already forces every received proposal below
/// the partner.
fn truncation_at_partner(inst: &Instance, mu: &Matching) -> StrategyProfile {
    let mut p = StrategyProfile::empty();
    for &w in inst.manipulators() {
        let list = inst.woman_list(w);
        let stated = match mu.husband_of(w).and_then(|h| inst.woman_rank(w, h)) {
            Some(cut) => list[..=cut].to_vec(),
            None => list.to_vec(),
        };
        p.insert(w, stated);
    }
    p
}

/// Stated full lists for the coalition, read off a feasible suitor graph.
///
/// A breadth-first walk from the source fixes, for every matched coalition
/// woman, the man whose arc reached her first — her *escort*. Her stated
/// list is then her partner, the escort, her remaining suitors in true
/// order, and every other man after that, again in true order. Ranking the
/// escort above every other suitor is what keeps the relay moving: the
/// escort's arrival displaces whomever she was holding, the displaced man
/// resumes his descent, and the chain repeats until her partner arrives and
/// outranks everyone. Unmatched coalition women state their true lists —
/// stability already guarantees no mutually acceptable man ever reaches
/// them. The breadth-first order is deterministic, so the witness is too.
fn graph_guided_profile(inst: &Instance, mu: &Matching, g: &SuitorGraph) -> StrategyProfile {
    let mut parent: Vec<Option<usize>> = vec![None; g.succ.len()];
    let mut seen = vec![false; g.succ.len()];
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &g.succ[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    let delta = suitor_sets(inst, mu);
    let mut p = StrategyProfile::empty();
    for &w in inst.manipulators() {
        let list = inst.woman_list(w);
        let stated = match mu.husband_of(w) {
            None => list.to_vec(),
            Some(partner) => {
                let escort = parent[g.index(Node::Woman(w))].and_then(|i| match g.node_at(i) {
                    Node::Man(m) => Some(m),
                    _ => None,
                });
                let mut out = vec![partner];
                if let Some(h) = escort {
                    if h != partner && inst.woman_rank(w, h).is_some() {
                        out.push(h);
                    }
                }
                for &m in list {
                    if delta[&w].contains(&m) && !out.contains(&m) {
                        out.push(m);
                    }
                }
                for &m in list {
                    if !out.contains(&m) {
                        out.push(m);
                    }
                }
                out
            }
        };
        p.insert(w, stated);
    }
    p
}

/// Synthesize stated lists for the coalition that make the men-proposing run
/// land exactly on `mu`.
///
/// `mu` must be stable under the true lists. When the suitor graph of `mu`
/// passes [`is_feasible`], the profile reorders each manipulator's full true
/// list, guided by the graph's breadth-first structure
/// ([`graph_guided_profile`]); the run under the profile is re-verified and
/// a mismatch is reported as a defect ([`Error::Internal`]), never silently
/// returned. A target that fails the graph test may still be reachable once
/// manipulators may also *shorten* their lists; the cut-at-partner
/// truncation covers exactly those, and only when it too misses is
/// [`Error::Infeasible`] returned, carrying the unreached nodes.
pub fn construct_manipulator_profile(inst: &Instance, mu: &Matching) -> Result<StrategyProfile> {
    if mu.n() != inst.n() {
        return Err(Error::BadMatching(format!(
            "matching is over {} pairs but the instance has {}",
            mu.n(),
            inst.n()
        )));
    }
    let report = blocking_pairs(inst, mu);
    if !report.is_stable() {
        return Err(Error::UnstableInput {
            individually_rational: report.individually_rational,
            blocking: report.blocking,
        });
    }
    let g = build_suitor_graph(inst, mu)?;
    let feas = is_feasible(&g);
    if feas.feasible {
        let p = graph_guided_profile(inst, mu, &g);
        if induces(inst, &p, mu) {
            return Ok(p);
        }
    }
    let p = truncation_at_partner(inst, mu);
    if induces(inst, &p, mu) {
        return Ok(p);
    }
    if feas.feasible {
        Err(Error::Internal(format!(
            "graph reports {mu} reachable but no profile realized it"
        )))
    } else {
        Err(Error::Infeasible {
            unreached: feas.unreached,
        })
    }
}
