//! Seeded corpus builders shared by the integration suites. Every
//! generator is deterministic in its `ChaCha8Rng`, so a failing case can
//! be replayed by seed alone; no test here depends on ambient randomness.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use suitor_core::rotations::rotation_poset;
use suitor_core::{Instance, ManId, Matching, WomanId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn shuffled(rng: &mut ChaCha8Rng, n: usize) -> Vec<u32> {
    let mut ids: Vec<u32> = (1..=n as u32).collect();
    ids.shuffle(rng);
    ids
}

fn random_l(rng: &mut ChaCha8Rng, n: usize, max_l: usize) -> BTreeSet<WomanId> {
    let size = rng.gen_range(0..=max_l.min(n));
    shuffled(rng, n)[..size].iter().map(|&i| WomanId(i)).collect()
}

/// Complete market: every list a uniform permutation, manipulator set a
/// uniform subset of the women of size `0..=max_l`.
pub fn random_complete(rng: &mut ChaCha8Rng, n: usize, max_l: usize) -> Instance {
    let men: Vec<Vec<WomanId>> = (0..n)
        .map(|_| shuffled(rng, n).into_iter().map(WomanId).collect())
        .collect();
    let women: Vec<Vec<ManId>> = (0..n)
        .map(|_| shuffled(rng, n).into_iter().map(ManId).collect())
        .collect();
    Instance::new(men, women, random_l(rng, n, max_l)).expect("generated market must validate")
}

/// Market with possibly truncated lists: each list keeps a uniformly sized
/// nonempty prefix of a uniform permutation, so unmatched agents and
/// one-sided acceptability both occur.
pub fn random_incomplete(rng: &mut ChaCha8Rng, n: usize, max_l: usize) -> Instance {
    let men: Vec<Vec<WomanId>> = (0..n)
        .map(|_| {
            let len = rng.gen_range(1..=n);
            shuffled(rng, n)[..len].iter().map(|&i| WomanId(i)).collect()
        })
        .collect();
    let women: Vec<Vec<ManId>> = (0..n)
        .map(|_| {
            let len = rng.gen_range(1..=n);
            shuffled(rng, n)[..len].iter().map(|&i| ManId(i)).collect()
        })
        .collect();
    Instance::new(men, women, random_l(rng, n, max_l)).expect("generated market must validate")
}

/// Complete or incomplete with even odds; the workhorse mixed corpus.
pub fn random_mixed(rng: &mut ChaCha8Rng, n: usize, max_l: usize) -> Instance {
    if rng.gen_bool(0.5) {
        random_complete(rng, n, max_l)
    } else {
        random_incomplete(rng, n, max_l)
    }
}

/// Complete market biased toward a deep rotation structure: both sides
/// start from cyclically shifted lists (which stack the full lattice of
/// `n` shifted matchings) and then take a few random transpositions, which
/// splits the big full-width rotations into narrower ones. Uniform markets
/// mostly have none to two rotations; these reliably have several.
pub fn rich_complete(rng: &mut ChaCha8Rng, n: usize, max_l: usize) -> Instance {
    let men: Vec<Vec<WomanId>> = (0..n as u32)
        .map(|i| {
            let mut list: Vec<WomanId> =
                (0..n as u32).map(|k| WomanId((i + k) % n as u32 + 1)).collect();
            transpose_a_few(rng, &mut list);
            list
        })
        .collect();
    let women: Vec<Vec<ManId>> = (0..n as u32)
        .map(|j| {
            let mut list: Vec<ManId> =
                (0..n as u32).map(|k| ManId((j + 1 + k) % n as u32 + 1)).collect();
            transpose_a_few(rng, &mut list);
            list
        })
        .collect();
    let inst = Instance::new(men, women, BTreeSet::new()).expect("generated market must validate");
    let l = rotation_women(rng, &inst, max_l);
    inst.with_manipulators(l).expect("women of rotations are valid manipulators")
}

fn transpose_a_few<T>(rng: &mut ChaCha8Rng, list: &mut [T]) {
    // Adjacent swaps only: enough to split the full-width rotations of the
    // cyclic base market without collapsing its lattice to a point.
    let n = list.len();
    for _ in 0..rng.gen_range(0..=2.min(n.saturating_sub(1))) {
        let a = rng.gen_range(0..n - 1);
        list.swap(a, a + 1);
    }
}

/// Generate-and-test sampler for markets where a coalition of at most
/// `max_l` women can actually reach some non-truthful stable matching.
/// Uniform markets almost never qualify (a few percent at these sizes, and
/// only with generous coalitions), so law suites exercising the feasible
/// side of the reachability machinery would otherwise spend their rounds
/// on vacuous cases.
///
/// The test is cheap to stage: arcs into a woman only ever grow when she
/// joins the coalition, so a market that fails the reachability check with
/// *every* woman manipulating fails for every smaller coalition and is
/// discarded after one pass. Survivors then search for a small coalition —
/// one woman per maximal rotation of the chosen closed set, the least any
/// reachable configuration can get away with — and return the first that
/// passes. Needs `n >= 3`: a 2×2 market's only possible rotation touches
/// both women, which starves the source node, so no coalition ever works.
pub fn feasible_market(rng: &mut ChaCha8Rng, n: usize, max_l: usize) -> Instance {
    use suitor_core::feasibility::{build_suitor_graph, is_feasible};
    use suitor_core::rotations::{closed_set_matching, closed_sets, max_rotations};
    assert!(n >= 3, "2x2 markets admit no reachable manipulation");
    assert!(max_l >= 1);
    loop {
        let base = random_complete(rng, n, 0);
        let poset = rotation_poset(&base).expect("poset construction");
        if poset.is_empty() {
            continue;
        }
        let all_women: BTreeSet<WomanId> = base.women().collect();
        let permissive = base
            .clone()
            .with_manipulators(all_women)
            .expect("every woman is a valid manipulator");
        let mut css: Vec<BTreeSet<usize>> = closed_sets(&poset)
            .expect("closed-set enumeration")
            .into_iter()
            .filter(|cs| {
                !cs.is_empty()
                    && max_rotations(&poset, cs).expect("maxima of a closed set").len() <= max_l
            })
            .collect();
        css.shuffle(rng);
        // Single-maximum closed sets are the easiest to satisfy and would
        // otherwise win every time; half the time, prefer wider ones so
        // multi-woman coalitions show up in the corpus.
        if rng.gen_bool(0.5) {
            css.sort_by_key(|cs| {
                core::cmp::Reverse(max_rotations(&poset, cs).expect("maxima").len())
            });
        }
        for cs in &css {
            let mu = closed_set_matching(&base, &poset, cs).expect("matching of a closed set");
            // Fails with the all-women coalition: fails with every coalition.
            if !is_feasible(&build_suitor_graph(&permissive, &mu).expect("graph build")).feasible {
                continue;
            }
            let maxima = max_rotations(&poset, cs).expect("maxima of a closed set");
            let pools: Vec<Vec<WomanId>> = maxima
                .iter()
                .map(|&id| poset.rotation(id).expect("ids come from the poset").women().to_vec())
                .collect();
            let mut coalitions: Vec<BTreeSet<WomanId>> = Vec::new();
            for combo in one_per_pool(&pools) {
                let l: BTreeSet<WomanId> = combo.iter().copied().collect();
                if l.len() == pools.len() {
                    coalitions.push(l);
                }
            }
            // With room to spare, also try padding each minimal coalition
            // with one more woman from the eliminated rotations: arcs only
            // grow, so a padded coalition can succeed where a minimal one
            // fails.
            if pools.len() < max_l {
                let pool: BTreeSet<WomanId> = cs
                    .iter()
                    .flat_map(|&id| poset.rotation(id).expect("poset id").women().to_vec())
                    .collect();
                for l in coalitions.clone() {
                    for &extra in &pool {
                        if !l.contains(&extra) {
                            let mut padded = l.clone();
                            padded.insert(extra);
                            coalitions.push(padded);
                        }
                    }
                }
            }
            for l in coalitions {
                let cand = base
                    .clone()
                    .with_manipulators(l)
                    .expect("women are valid manipulators");
                if is_feasible(&build_suitor_graph(&cand, &mu).expect("graph build")).feasible {
                    return cand;
                }
            }
        }
    }
}

/// Generate-and-test sampler for markets where the coalition faces a real
/// *choice*: at least two incomparable reachable outcomes, so the Pareto
/// frontier has width two or more. Blind sampling never finds these —
/// thousands of [`feasible_market`] draws all came back with width-one
/// frontiers, because a coalition placed for one closed set starves every
/// incomparable one. This builds the coalition for two branches at once:
/// find two incomparable closed sets, each feasible under the all-women
/// coalition and each with a single maximal rotation, then try coalitions
/// of one woman per branch until both branches pass, and finally verify
/// the frontier really is that wide. Hit rates make `n = 5` the practical
/// size (roughly one market per 1 300 tries; n = 4 is another 20× rarer).
pub fn two_branch_market(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    use suitor_core::feasibility::{build_suitor_graph, is_feasible};
    use suitor_core::rotations::{closed_set_matching, closed_sets, max_rotations};
    use suitor_core::strategy::enumerate_pareto_outcomes;
    assert!(n >= 4, "two incomparable rotations need room");
    loop {
        let base = random_complete(rng, n, 0);
        let poset = match rotation_poset(&base) {
            Ok(p) if p.len() >= 2 => p,
            _ => continue,
        };
        let Ok(css) = closed_sets(&poset) else { continue };
        let all_women: BTreeSet<WomanId> = base.women().collect();
        let permissive = base
            .clone()
            .with_manipulators(all_women)
            .expect("every woman is a valid manipulator");
        let mut branches: Vec<(&BTreeSet<usize>, usize)> = Vec::new();
        for cs in &css {
            if cs.is_empty() {
                continue;
            }
            let maxima = max_rotations(&poset, cs).expect("maxima of a closed set");
            if maxima.len() != 1 {
                continue;
            }
            let mu = closed_set_matching(&base, &poset, cs).expect("closed-set replay");
            if is_feasible(&build_suitor_graph(&permissive, &mu).expect("graph build")).feasible {
                branches.push((cs, *maxima.first().expect("singleton")));
            }
        }
        for i in 0..branches.len() {
            for j in i + 1..branches.len() {
                let (a, amax) = branches[i];
                let (b, bmax) = branches[j];
                if a.is_subset(b) || b.is_subset(a) {
                    continue;
                }
                let wa = poset.rotation(amax).expect("poset id").women().to_vec();
                let wb = poset.rotation(bmax).expect("poset id").women().to_vec();
                for &x in &wa {
                    for &y in &wb {
                        if x == y {
                            continue;
                        }
                        let cand = base
                            .clone()
                            .with_manipulators([x, y].into())
                            .expect("women are valid manipulators");
                        let mua = closed_set_matching(&cand, &poset, a).expect("replay");
                        let mub = closed_set_matching(&cand, &poset, b).expect("replay");
                        if is_feasible(&build_suitor_graph(&cand, &mua).expect("build")).feasible
                            && is_feasible(&build_suitor_graph(&cand, &mub).expect("build"))
                                .feasible
                            && enumerate_pareto_outcomes(&cand, 100_000)
                                .is_ok_and(|f| f.len() >= 2)
                        {
                            return cand;
                        }
                    }
                }
            }
        }
    }
}

/// All ways of picking one element from each pool, in pool order.
fn one_per_pool<T: Copy>(pools: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for pool in pools {
        let mut next = Vec::new();
        for prefix in &out {
            for &item in pool {
                let mut row = prefix.clone();
                row.push(item);
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// A manipulator set drawn from the women who actually appear in
/// rotations — the placement that decides feasibility questions — padded
/// from the full woman pool when the market has no rotations.
fn rotation_women(rng: &mut ChaCha8Rng, inst: &Instance, max_l: usize) -> BTreeSet<WomanId> {
    let cap = max_l.min(inst.n());
    // Empty coalitions are boring here; the uniform corpora cover them.
    let size = if cap == 0 { 0 } else { rng.gen_range(1..=cap) };
    let poset = rotation_poset(inst).expect("poset construction");
    let mut pool: Vec<WomanId> = Vec::new();
    for rho in poset.rotations() {
        for &w in rho.women() {
            if !pool.contains(&w) {
                pool.push(w);
            }
        }
    }
    for w in inst.women() {
        if !pool.contains(&w) {
            pool.push(w);
        }
    }
    // Keep the rotation women at the front so small sets hit them first,
    // with a shuffle inside each half for variety.
    let cut = pool
        .iter()
        .position(|&w| {
            poset
                .rotations()
                .iter()
                .all(|rho| !rho.women().contains(&w))
        })
        .unwrap_or(pool.len());
    pool[..cut].shuffle(rng);
    pool[cut..].shuffle(rng);
    pool.truncate(size);
    pool.into_iter().collect()
}

/// Every complete market on `n` men and `n` women (all list combinations),
/// crossed with every manipulator set of size `<= max_l`. Exhaustive and
/// only usable for n <= 2 here; the acceptance suite owns the larger
/// normalized family.
pub fn all_complete_markets(n: usize, max_l: usize) -> Vec<Instance> {
    let perms = all_permutations(n);
    let mut sides: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for side in &sides {
            for p in &perms {
                let mut s = side.clone();
                s.push(p.clone());
                next.push(s);
            }
        }
        sides = next;
    }
    let mut out = Vec::new();
    for men in &sides {
        for women in &sides {
            for l in all_l_subsets(n, max_l) {
                let men: Vec<Vec<WomanId>> = men
                    .iter()
                    .map(|p| p.iter().map(|&i| WomanId(i)).collect())
                    .collect();
                let women: Vec<Vec<ManId>> = women
                    .iter()
                    .map(|p| p.iter().map(|&i| ManId(i)).collect())
                    .collect();
                out.push(Instance::new(men, women, l).expect("exhaustive market must validate"));
            }
        }
    }
    out
}

pub fn all_permutations(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut used = vec![false; n];
    fn rec(n: usize, used: &mut [bool], current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                current.push(i as u32 + 1);
                rec(n, used, current, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(n, &mut used, &mut current, &mut out);
    out
}

pub fn all_l_subsets(n: usize, max_l: usize) -> Vec<BTreeSet<WomanId>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if (mask.count_ones() as usize) <= max_l {
            out.push(
                (1..=n as u32)
                    .filter(|i| mask & (1 << (i - 1)) != 0)
                    .map(WomanId)
                    .collect(),
            );
        }
    }
    out
}

/// Partner-by-partner weak comparison: is `a` at least as good as `b` for
/// every woman under the true lists?
pub fn weakly_better_for_women(inst: &Instance, a: &Matching, b: &Matching) -> bool {
    inst.women()
        .all(|w| !inst.woman_improves(w, b.husband_of(w), a.husband_of(w)))
}

/// Is `a` at least as good as `b` for every man under the true lists?
pub fn weakly_better_for_men(inst: &Instance, a: &Matching, b: &Matching) -> bool {
    inst.men()
        .all(|m| !inst.man_improves(m, b.wife_of(m), a.wife_of(m)))
}
