//! Suitor-graph laws: the incremental per-rotation update against fresh
//! rebuilds, agreement between graph reachability and the permutation
//! brute force, tethering of eliminated rotations to their maximal
//! elements, the maxima-only eliminability shortcut against full-graph
//! reachability, and the manipulator-in-every-maximum necessary condition.

mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::prelude::*;
use suitor_core::feasibility::{build_suitor_graph, is_feasible, Node, SuitorGraph};
use suitor_core::oracle::{feasible_set, ManipKind};
use suitor_core::rotations::{
    clo_set, closed_set_matching, closed_sets, max_rotations, rotation_poset,
};
use suitor_core::strategy::{can_eliminate, EliminationState};
use suitor_core::Matching;

use common::{feasible_market, random_complete, random_mixed, rich_complete, rng};

fn graph_arcs(g: &SuitorGraph) -> BTreeSet<(Node, Node)> {
    g.arcs().into_iter().collect()
}

/// Everything reachable from `sources` along the graph's arcs.
fn reachable_from(g: &SuitorGraph, sources: &BTreeSet<Node>) -> BTreeSet<Node> {
    let mut succ: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
    for (from, to) in g.arcs() {
        succ.entry(from).or_default().push(to);
    }
    let mut seen = sources.clone();
    let mut queue: VecDeque<Node> = sources.iter().copied().collect();
    while let Some(u) = queue.pop_front() {
        for &v in succ.get(&u).into_iter().flatten() {
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen
}

#[test]
fn stepwise_updates_agree_with_fresh_graph_builds() {
    let mut rng = rng(0x06AF_0001);
    for round in 0..100 {
        let n = rng.gen_range(1..=6);
        let inst = if round % 2 == 0 {
            random_mixed(&mut rng, n, 3)
        } else {
            rich_complete(&mut rng, n, 3)
        };
        let poset = rotation_poset(&inst).expect("poset construction");
        let mut css = closed_sets(&poset).expect("closed-set enumeration");
        css.truncate(40);
        for cs in &css {
            let mut state = EliminationState::new(&inst).expect("initial state");
            state.eliminate(&inst, &poset, cs).expect("ascending order is topological");
            let fresh = build_suitor_graph(&inst, &state.matching()).expect("fresh build");
            assert_eq!(
                graph_arcs(state.graph()),
                graph_arcs(&fresh),
                "incremental and fresh graphs disagree after eliminating {cs:?}"
            );
        }
    }
}

#[test]
fn graph_reachability_matches_the_permutation_brute_force() {
    let mut markets = common::all_complete_markets(1, 1);
    markets.extend(common::all_complete_markets(2, 2));
    let mut rng = rng(0x06AF_0002);
    for round in 0..150 {
        let n = 3 + round % 2;
        markets.push(if round % 2 == 0 {
            random_complete(&mut rng, n, 2)
        } else {
            rich_complete(&mut rng, n, 2)
        });
    }
    // Uniform draws almost never leave the coalition a reachable target, so
    // the disagreement surface would go untested without markets screened
    // for one.
    for round in 0..40 {
        markets.push(feasible_market(&mut rng, 3 + round % 2, 2));
    }
    let mut multi_outcome = 0usize;
    for inst in &markets {
        let by_graph: BTreeSet<Matching> = feasible_set(inst, ManipKind::Suitor)
            .expect("graph-filtered enumeration")
            .into_iter()
            .collect();
        let by_brute: BTreeSet<Matching> = feasible_set(inst, ManipKind::Permutation)
            .expect("permutation brute force")
            .into_iter()
            .collect();
        assert_eq!(
            by_graph, by_brute,
            "feasibility characterizations disagree on {inst:?}"
        );
        if by_graph.len() >= 2 {
            multi_outcome += 1;
        }
    }
    assert!(
        multi_outcome >= 40,
        "corpus went thin: only {multi_outcome} markets offer the coalition a real choice"
    );
}

#[test]
fn eliminated_rotations_stay_tethered_to_their_maxima() {
    let mut rng = rng(0x06AF_0003);
    let mut sets_checked = 0usize;
    let mut markets = Vec::new();
    for round in 0..80usize {
        let n = 2 + round % 4;
        markets.push(if round % 3 == 0 {
            random_complete(&mut rng, n, 3)
        } else {
            rich_complete(&mut rng, n, 3)
        });
    }
    for round in 0..60usize {
        markets.push(feasible_market(&mut rng, 3 + round % 3, 3));
    }
    for inst in &markets {
        let poset = rotation_poset(inst).expect("poset construction");
        let mut css = closed_sets(&poset).expect("closed-set enumeration");
        css.truncate(64);
        for cs in &css {
            if cs.is_empty() {
                continue;
            }
            sets_checked += 1;
            let mu = closed_set_matching(inst, &poset, cs).expect("closed-set replay");
            let g = build_suitor_graph(inst, &mu).expect("graph build");
            let maxima = max_rotations(&poset, cs).expect("maxima of a closed set");
            let mut sources: BTreeSet<Node> = BTreeSet::new();
            for &id in &maxima {
                let rho = poset.rotation(id).expect("ids come from the poset");
                sources.extend(rho.men().iter().map(|&m| Node::Man(m)));
                sources.extend(rho.women().iter().map(|&w| Node::Woman(w)));
            }
            let reached = reachable_from(&g, &sources);
            for &id in cs {
                let rho = poset.rotation(id).expect("ids come from the poset");
                for &m in rho.men() {
                    assert!(
                        reached.contains(&Node::Man(m)),
                        "{m} of rotation {id} is cut off from the maxima after eliminating {cs:?}"
                    );
                }
                for &w in rho.women() {
                    assert!(
                        reached.contains(&Node::Woman(w)),
                        "{w} of rotation {id} is cut off from the maxima after eliminating {cs:?}"
                    );
                }
            }
        }
    }
    assert!(
        sets_checked >= 140,
        "corpus went thin: only {sets_checked} nonempty closed sets checked"
    );
}

#[test]
fn maxima_reachability_decides_eliminability_exactly() {
    let mut rng = rng(0x06AF_0004);
    let mut feasible_seen = 0usize;
    let mut markets = Vec::new();
    for round in 0..80usize {
        let n = 2 + round % 4;
        markets.push(if round % 3 == 0 {
            random_complete(&mut rng, n, 3)
        } else {
            rich_complete(&mut rng, n, 3)
        });
    }
    for round in 0..60usize {
        markets.push(feasible_market(&mut rng, 3 + round % 3, 3));
    }
    for inst in &markets {
        let poset = rotation_poset(inst).expect("poset construction");
        let initial = EliminationState::new(inst).expect("initial state");
        let mut css = closed_sets(&poset).expect("closed-set enumeration");
        css.truncate(64);

        // From the root: the maxima-only check must equal full-graph
        // feasibility for every closed set.
        for cs in &css {
            let mu = closed_set_matching(inst, &poset, cs).expect("closed-set replay");
            let report = is_feasible(&build_suitor_graph(inst, &mu).expect("graph build"));
            assert_eq!(
                can_eliminate(inst, &poset, &initial, cs),
                report.feasible,
                "maxima shortcut and full reachability disagree on {cs:?}"
            );
            if report.feasible && !cs.is_empty() {
                feasible_seen += 1;
            }
        }

        // Along a greedy walk: at every state, for every candidate
        // principle set, the shortcut must again match the feasibility of
        // the combined elimination.
        let mut state = initial;
        loop {
            let mut next: Option<BTreeSet<usize>> = None;
            for id in 0..poset.len() {
                if state.eliminated().contains(&id) {
                    continue;
                }
                let ps: BTreeSet<usize> = clo_set(&poset, id)
                    .expect("ids come from the poset")
                    .difference(state.eliminated())
                    .copied()
                    .collect();
                let combined: BTreeSet<usize> =
                    state.eliminated().union(&ps).copied().collect();
                let mu = closed_set_matching(inst, &poset, &combined)
                    .expect("closed-set replay");
                let report = is_feasible(&build_suitor_graph(inst, &mu).expect("graph build"));
                let verdict = can_eliminate(inst, &poset, &state, &ps);
                assert_eq!(
                    verdict, report.feasible,
                    "mid-walk shortcut and full reachability disagree on {ps:?} over {:?}",
                    state.eliminated()
                );
                if verdict && next.is_none() {
                    next = Some(ps);
                }
            }
            match next {
                Some(ps) => state
                    .eliminate(inst, &poset, &ps)
                    .expect("an eliminable principle set replays cleanly"),
                None => break,
            }
        }
    }
    assert!(
        feasible_seen >= 50,
        "corpus went thin: only {feasible_seen} feasible nonempty closed sets"
    );
}

#[test]
fn every_maximal_rotation_of_a_reachable_set_contains_a_manipulator() {
    let mut rng = rng(0x06AF_0005);
    let mut feasible_seen = 0usize;
    let mut markets = Vec::new();
    for round in 0..80usize {
        let n = 2 + round % 4;
        markets.push(if round % 3 == 0 {
            random_complete(&mut rng, n, 3)
        } else {
            rich_complete(&mut rng, n, 3)
        });
    }
    for round in 0..60usize {
        markets.push(feasible_market(&mut rng, 3 + round % 3, 3));
    }
    for inst in &markets {
        let poset = rotation_poset(inst).expect("poset construction");
        for cs in closed_sets(&poset).expect("closed-set enumeration") {
            if cs.is_empty() {
                continue;
            }
            let mu = closed_set_matching(inst, &poset, &cs).expect("closed-set replay");
            if !is_feasible(&build_suitor_graph(inst, &mu).expect("graph build")).feasible {
                continue;
            }
            feasible_seen += 1;
            for id in max_rotations(&poset, &cs).expect("maxima of a closed set") {
                let rho = poset.rotation(id).expect("ids come from the poset");
                assert!(
                    rho.women().iter().any(|&w| inst.is_manipulator(w)),
                    "feasible closed set {cs:?} has a maximal rotation without a manipulator"
                );
            }
        }
    }
    assert!(
        feasible_seen >= 50,
        "corpus went thin: only {feasible_seen} feasible nonempty closed sets"
    );
}
