mod common;
use std::collections::BTreeSet;
use std::time::Instant;
use rand::prelude::*;
use suitor_core::feasibility::{build_suitor_graph, is_feasible};
use suitor_core::rotations::{closed_set_matching, closed_sets, max_rotations, rotation_poset};
use suitor_core::WomanId;
use common::{random_complete, rng};

#[test]
fn two_branch_probe() {
    for n in [4usize, 5] {
        let mut r = rng(0xD0D0 + n as u64);
        let t0 = Instant::now();
        let mut hits = 0usize;
        let tries = 30_000usize;
        for _ in 0..tries {
            let base = random_complete(&mut r, n, 0);
            let poset = match rotation_poset(&base) { Ok(p) if p.len() >= 2 => p, _ => continue };
            let Ok(css) = closed_sets(&poset) else { continue };
            let all: BTreeSet<WomanId> = base.women().collect();
            let permissive = base.clone().with_manipulators(all).unwrap();
            // nonempty sets feasible with every woman manipulating, single-max only
            let mut cands: Vec<(&BTreeSet<usize>, BTreeSet<usize>)> = Vec::new();
            for cs in &css {
                if cs.is_empty() { continue; }
                let mx = max_rotations(&poset, cs).unwrap();
                if mx.len() != 1 { continue; }
                let mu = closed_set_matching(&base, &poset, cs).unwrap();
                if is_feasible(&build_suitor_graph(&permissive, &mu).unwrap()).feasible {
                    cands.push((cs, mx));
                }
            }
            'outer: for i in 0..cands.len() {
                for j in i+1..cands.len() {
                    let (a, amx) = &cands[i];
                    let (b, bmx) = &cands[j];
                    if a.is_subset(b) || b.is_subset(a) { continue; }
                    let wa = poset.rotation(*amx.first().unwrap()).unwrap().women().to_vec();
                    let wb = poset.rotation(*bmx.first().unwrap()).unwrap().women().to_vec();
                    for &x in &wa { for &y in &wb {
                        if x == y { continue; }
                        let l: BTreeSet<WomanId> = [x, y].into();
                        let cand = base.clone().with_manipulators(l).unwrap();
                        let mua = closed_set_matching(&cand, &poset, a).unwrap();
                        let mub = closed_set_matching(&cand, &poset, b).unwrap();
                        if is_feasible(&build_suitor_graph(&cand, &mua).unwrap()).feasible
                            && is_feasible(&build_suitor_graph(&cand, &mub).unwrap()).feasible {
                            hits += 1;
                            break 'outer;
                        }
                    }}
                }
            }
        }
        eprintln!("n={n}: {hits} two-branch markets in {tries} tries ({:?})", t0.elapsed());
    }
}
