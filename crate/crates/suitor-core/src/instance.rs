//! Market model: agents, preference lists, matchings, and stated-list
//! overlays.
//!
//! A market has `n` men and `n` women, identified by 1-based ids (`m1..mn`,
//! `w1..wn`). Each agent ranks some subset of the other side in strict
//! order; an agent would rather stay single than be matched to someone not
//! on their list, which is what makes incomplete lists meaningful. A
//! distinguished set of women — the *manipulators* — may report lists other
//! than their true ones; everyone else always reports truthfully.
//!
//! [`Instance`] stores the *true* lists. A [`StrategyProfile`] is an overlay
//! of stated lists for (a subset of) the manipulators; algorithms that run
//! on "the effective profile" take an `Option<&StrategyProfile>` and fall
//! back to the true lists for every woman without an entry.
//!
//! [`Matching`] is a partial pairing: unmatched agents are simply absent,
//! rather than self-matched, so man and woman id spaces never collide.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// 1-based man id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ManId(pub u32);

/// 1-based woman id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WomanId(pub u32);

impl ManId {
    #[inline]
    pub(crate) fn idx(self) -> usize {
        self.0 as usize - 1
    }
    #[inline]
    pub(crate) fn from_idx(i: usize) -> Self {
        ManId(i as u32 + 1)
    }
}

impl WomanId {
    #[inline]
    pub(crate) fn idx(self) -> usize {
        self.0 as usize - 1
    }
    #[inline]
    pub(crate) fn from_idx(i: usize) -> Self {
        WomanId(i as u32 + 1)
    }
}

impl fmt::Display for ManId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

impl fmt::Display for WomanId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

/// Rank sentinel for "not on the list". Kept private; the public accessors
/// speak `Option`.
const UNRANKED: u32 = u32::MAX;

/// A matching market with true preference lists and a manipulator set.
///
/// Construction validates everything once; afterwards the lists are
/// immutable and rank lookups are O(1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    men: Vec<Vec<WomanId>>,
    women: Vec<Vec<ManId>>,
    manipulators: BTreeSet<WomanId>,
    /// man_rank[m][w] = position of w in m's list, or UNRANKED.
    man_rank: Vec<Vec<u32>>,
    /// woman_rank[w][m] = position of m in w's list, or UNRANKED.
    woman_rank: Vec<Vec<u32>>,
}

fn check_list<I: Copy + Ord + Into<u32> + fmt::Display>(
    owner: &str,
    list: &[I],
    n: usize,
) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &x in list {
        let raw: u32 = x.into();
        if raw == 0 || raw as usize > n {
            return Err(Error::BadInstance(format!(
                "{owner} lists {x}, outside 1..={n}"
            )));
        }
        if !seen.insert(x) {
            return Err(Error::BadInstance(format!("{owner} lists {x} twice")));
        }
    }
    Ok(())
}

impl From<ManId> for u32 {
    fn from(m: ManId) -> u32 {
        m.0
    }
}
impl From<WomanId> for u32 {
    fn from(w: WomanId) -> u32 {
        w.0
    }
}

impl Instance {
    /// Build and validate an instance. `men[i]` is the list of man `i+1`,
    /// `women[j]` the list of woman `j+1`. Both sides must have the same
    /// number of agents, every listed id must be in range, no list may
    /// repeat an id, and manipulators must be valid woman ids.
    pub fn new(
        men: Vec<Vec<WomanId>>,
        women: Vec<Vec<ManId>>,
        manipulators: BTreeSet<WomanId>,
    ) -> Result<Self> {
        let n = men.len();
        if n == 0 {
            return Err(Error::BadInstance("no agents".into()));
        }
        if women.len() != n {
            return Err(Error::BadInstance(format!(
                "{} men but {} women; the market must be balanced",
                n,
                women.len()
            )));
        }
        for (i, list) in men.iter().enumerate() {
            check_list(&format!("m{}", i + 1), list, n)?;
        }
        for (j, list) in women.iter().enumerate() {
            check_list(&format!("w{}", j + 1), list, n)?;
        }
        for &w in &manipulators {
            if w.0 == 0 || w.0 as usize > n {
                return Err(Error::BadInstance(format!(
                    "manipulator {w} outside 1..={n}"
                )));
            }
        }
        let mut man_rank = vec![vec![UNRANKED; n]; n];
        for (i, list) in men.iter().enumerate() {
            for (r, &w) in list.iter().enumerate() {
                man_rank[i][w.idx()] = r as u32;
            }
        }
        let mut woman_rank = vec![vec![UNRANKED; n]; n];
        for (j, list) in women.iter().enumerate() {
            for (r, &m) in list.iter().enumerate() {
                woman_rank[j][m.idx()] = r as u32;
            }
        }
        Ok(Instance {
            n,
            men,
            women,
            manipulators,
            man_rank,
            woman_rank,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn men(&self) -> impl Iterator<Item = ManId> + '_ {
        (1..=self.n as u32).map(ManId)
    }

    pub fn women(&self) -> impl Iterator<Item = WomanId> + '_ {
        (1..=self.n as u32).map(WomanId)
    }

    pub fn man_list(&self, m: ManId) -> &[WomanId] {
        &self.men[m.idx()]
    }

    pub fn woman_list(&self, w: WomanId) -> &[ManId] {
        &self.women[w.idx()]
    }

    pub fn manipulators(&self) -> &BTreeSet<WomanId> {
        &self.manipulators
    }

    pub fn is_manipulator(&self, w: WomanId) -> bool {
        self.manipulators.contains(&w)
    }

    /// True when every list on both sides ranks the whole other side.
    /// Permutation manipulations are only defined on complete instances.
    pub fn is_complete(&self) -> bool {
        self.men.iter().all(|l| l.len() == self.n) && self.women.iter().all(|l| l.len() == self.n)
    }

    /// Position of `w` in `m`'s true list (0 = favorite).
    pub fn man_rank(&self, m: ManId, w: WomanId) -> Option<usize> {
        match self.man_rank[m.idx()][w.idx()] {
            UNRANKED => None,
            r => Some(r as usize),
        }
    }

    /// Position of `m` in `w`'s true list (0 = favorite).
    pub fn woman_rank(&self, w: WomanId, m: ManId) -> Option<usize> {
        match self.woman_rank[w.idx()][m.idx()] {
            UNRANKED => None,
            r => Some(r as usize),
        }
    }

    /// Does `m` strictly prefer `a` to `b`, where `None` means unmatched?
    /// Being matched to an unlisted woman counts as worse than single, so a
    /// `None`/unlisted `b` is improved on exactly by a listed `a`.
    pub fn man_improves(&self, m: ManId, a: Option<WomanId>, b: Option<WomanId>) -> bool {
        let rank = |x: Option<WomanId>| match x {
            Some(w) => self.man_rank[m.idx()][w.idx()],
            None => UNRANKED,
        };
        rank(a) < rank(b)
    }

    /// Does `w` strictly prefer `a` to `b` under her true list, with `None`
    /// meaning unmatched?
    pub fn woman_improves(&self, w: WomanId, a: Option<ManId>, b: Option<ManId>) -> bool {
        let rank = |x: Option<ManId>| match x {
            Some(m) => self.woman_rank[w.idx()][m.idx()],
            None => UNRANKED,
        };
        rank(a) < rank(b)
    }

    /// Same market, different manipulator coalition.
    pub fn with_manipulators(&self, manipulators: BTreeSet<WomanId>) -> Result<Instance> {
        Instance::new(self.men.clone(), self.women.clone(), manipulators)
    }
}

/// A partial one-to-one pairing of men and women.
///
/// Involution (`wife_of(m) == Some(w)` ⇔ `husband_of(w) == Some(m)`) is a
/// structural invariant enforced at construction. Individual rationality is
/// *not* — it is a property relative to an [`Instance`], checked by
/// [`crate::stability::blocking_pairs`].
///
/// `Ord` is derived so matchings can live in sorted sets with a stable
/// iteration order; the order itself (lexicographic in the by-man table) is
/// not meaningful.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    /// wife[i] = partner of man i+1.
    wife: Vec<Option<WomanId>>,
    /// husband[j] = partner of woman j+1.
    husband: Vec<Option<ManId>>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching {
            wife: vec![None; n],
            husband: vec![None; n],
        }
    }

    /// Build from explicit pairs; ids out of `1..=n` or repeated partners
    /// are rejected.
    pub fn from_pairs(n: usize, pairs: &[(ManId, WomanId)]) -> Result<Self> {
        let mut mu = Matching::empty(n);
        for &(m, w) in pairs {
            if m.0 == 0 || m.0 as usize > n {
                return Err(Error::BadMatching(format!("{m} outside 1..={n}")));
            }
            if w.0 == 0 || w.0 as usize > n {
                return Err(Error::BadMatching(format!("{w} outside 1..={n}")));
            }
            if mu.wife[m.idx()].is_some() {
                return Err(Error::BadMatching(format!("{m} paired twice")));
            }
            if mu.husband[w.idx()].is_some() {
                return Err(Error::BadMatching(format!("{w} paired twice")));
            }
            mu.wife[m.idx()] = Some(w);
            mu.husband[w.idx()] = Some(m);
        }
        Ok(mu)
    }

    pub fn n(&self) -> usize {
        self.wife.len()
    }

    pub fn wife_of(&self, m: ManId) -> Option<WomanId> {
        self.wife[m.idx()]
    }

    pub fn husband_of(&self, w: WomanId) -> Option<ManId> {
        self.husband[w.idx()]
    }

    /// All pairs, sorted by man id.
    pub fn pairs(&self) -> Vec<(ManId, WomanId)> {
        self.wife
            .iter()
            .enumerate()
            .filter_map(|(i, w)| w.map(|w| (ManId::from_idx(i), w)))
            .collect()
    }

    /// Men and women without a partner.
    pub fn singles(&self) -> (Vec<ManId>, Vec<WomanId>) {
        let men = self
            .wife
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_none())
            .map(|(i, _)| ManId::from_idx(i))
            .collect();
        let women = self
            .husband
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_none())
            .map(|(j, _)| WomanId::from_idx(j))
            .collect();
        (men, women)
    }

    pub(crate) fn set(&mut self, m: ManId, w: WomanId) {
        debug_assert!(self.wife[m.idx()].is_none() && self.husband[w.idx()].is_none());
        self.wife[m.idx()] = Some(w);
        self.husband[w.idx()] = Some(m);
    }

    pub(crate) fn unset_man(&mut self, m: ManId) {
        if let Some(w) = self.wife[m.idx()].take() {
            self.husband[w.idx()] = None;
        }
    }
}

impl fmt::Display for Matching {
    /// Compact single-line form for diagnostics: `m1-w4 m2-w1 …`,
    /// unmatched men shown as `m3-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, w) in self.wife.iter().enumerate() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            match w {
                Some(w) => write!(f, "m{}-{w}", i + 1)?,
                None => write!(f, "m{}-", i + 1)?,
            }
        }
        Ok(())
    }
}

/// Stated preference lists for (a subset of) the manipulators.
///
/// A woman without an entry reports her true list. An entry may be any
/// duplicate-free sequence of man ids — a prefix of the true list
/// (truncation), a full permutation, or an arbitrary ordered subset
/// (general); which of those a given operation accepts is that operation's
/// contract, not this type's.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StrategyProfile {
    lists: BTreeMap<WomanId, Vec<ManId>>,
}

impl StrategyProfile {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Build from explicit lists; duplicate men within a list are rejected.
    pub fn from_lists(lists: BTreeMap<WomanId, Vec<ManId>>) -> Result<Self> {
        for (w, list) in &lists {
            let mut seen = BTreeSet::new();
            for &m in list {
                if !seen.insert(m) {
                    return Err(Error::BadProfile(format!("{w} states {m} twice")));
                }
            }
        }
        Ok(StrategyProfile { lists })
    }

    pub fn get(&self, w: WomanId) -> Option<&[ManId]> {
        self.lists.get(&w).map(|v| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (WomanId, &[ManId])> {
        self.lists.iter().map(|(&w, v)| (w, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn insert(&mut self, w: WomanId, list: Vec<ManId>) {
        self.lists.insert(w, list);
    }

    /// Check this profile against an instance: every key must be a
    /// manipulator and every stated id a valid man. Called by every
    /// operation that applies an overlay.
    pub fn validate_for(&self, inst: &Instance) -> Result<()> {
        for (&w, list) in &self.lists {
            if !inst.is_manipulator(w) {
                return Err(Error::BadProfile(format!(
                    "{w} has a stated list but is not a manipulator"
                )));
            }
            check_list(&format!("{w} (stated)"), list, inst.n())
                .map_err(|e| Error::BadProfile(match e {
                    Error::BadInstance(msg) => msg,
                    other => format!("{other}"),
                }))?;
        }
        Ok(())
    }

    /// Is every stated list a prefix of the woman's true list?
    pub fn is_truncation_of(&self, inst: &Instance) -> bool {
        self.lists
            .iter()
            .all(|(&w, list)| inst.woman_list(w).starts_with(list))
    }

    /// Is every stated list a permutation of all men?
    pub fn is_permutation(&self, inst: &Instance) -> bool {
        self.lists.iter().all(|(_, list)| list.len() == inst.n())
    }
}

/// The effective list of `w`: her stated list under `overlay` if she has
/// one, otherwise her true list.
pub(crate) fn effective_woman_list<'a>(
    inst: &'a Instance,
    overlay: Option<&'a StrategyProfile>,
    w: WomanId,
) -> &'a [ManId] {
    overlay
        .and_then(|p| p.get(w))
        .unwrap_or_else(|| inst.woman_list(w))
}
