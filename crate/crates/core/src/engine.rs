//! Leveled rejected-cube store and the saturation loop over the ten
//! rejection rules: cube resolution on a single complementary pivot plus
//! superset subsumption of width-1/2 cubes into width-3 cubes.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::time::{Duration, Instant};

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::cnf::{
    canonicalize_cube, complement_cube, Cube, Formula, Literal, VarTriple,
};

/// Rule labels. The two-parent labels follow a width-shape taxonomy
/// (`<w1>-<w2>` parent widths, C complement, I intersection, D difference).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub enum RuleId {
    Seed,
    R22CI,
    R33CII,
    R13I,
    R23II,
    R23CDD,
    R24CIDD,
    R33CID,
    R34CIID,
    R44CIII,
    R33CDD,
    EmptyResolvent,
}

pub const ALL_RULES: [RuleId; 12] = [
    RuleId::Seed,
    RuleId::R22CI,
    RuleId::R33CII,
    RuleId::R13I,
    RuleId::R23II,
    RuleId::R23CDD,
    RuleId::R24CIDD,
    RuleId::R33CID,
    RuleId::R34CIID,
    RuleId::R44CIII,
    RuleId::R33CDD,
    RuleId::EmptyResolvent,
];

impl RuleId {
    pub fn label(self) -> &'static str {
        match self {
            RuleId::Seed => "SEED",
            RuleId::R22CI => "2-2CI",
            RuleId::R33CII => "3-3CII",
            RuleId::R13I => "1-3I",
            RuleId::R23II => "2-3II",
            RuleId::R23CDD => "2-3CDD",
            RuleId::R24CIDD => "2-4CIDD",
            RuleId::R33CID => "3-3CID",
            RuleId::R34CIID => "3-4CIID",
            RuleId::R44CIII => "4-4CIII",
            RuleId::R33CDD => "3-3CDD",
            RuleId::EmptyResolvent => "EMPTY_RESOLVENT",
        }
    }

    pub fn from_label(s: &str) -> Option<RuleId> {
        ALL_RULES.iter().copied().find(|r| r.label() == s)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One rejection step in the proof log.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    pub id: u64,
    /// `None` marks the empty cube (global contradiction).
    pub conclusion: Option<Cube>,
    pub rule: RuleId,
    pub parents: Vec<u64>,
    /// Clause index, SEED records only.
    pub source_clause: Option<usize>,
}

/// Line format: `<id> <rule> <lits> 0 [p <parent> ...] [c <clause>]`.
pub fn format_derivation(d: &Derivation) -> String {
    let mut s = format!("{} {} ", d.id, d.rule);
    if let Some(cube) = &d.conclusion {
        for l in cube.literals() {
            s.push_str(&l.to_dimacs().to_string());
            s.push(' ');
        }
    }
    s.push('0');
    if !d.parents.is_empty() {
        s.push_str(" p");
        for p in &d.parents {
            s.push_str(&format!(" {p}"));
        }
    }
    if let Some(c) = d.source_clause {
        s.push_str(&format!(" c {c}"));
    }
    s
}

pub fn format_log(log: &[Derivation]) -> String {
    let mut out = String::new();
    for d in log {
        out.push_str(&format_derivation(d));
        out.push('\n');
    }
    out
}

/// Worklist discipline. Reversed (LIFO) order exists to test that the
/// fixpoint set is order-independent.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum WorklistOrder {
    #[default]
    Fifo,
    Lifo,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Largest cube width stored (3 or 4).
    pub max_width: usize,
    /// Max worklist pops; `None` uses the provable bound
    /// 2n + 4*C(n,2) + 8*C(n,3) + 16*C(n,4).
    pub iteration_cap: Option<u64>,
    /// Materialize width-3 supersets of rejected width-1/2 cubes (1-3I, 2-3II).
    pub eager_subsumption: bool,
    pub worklist_order: WorklistOrder,
}

impl Default for EngineConfig {
    fn default() -> EngineConfig {
        EngineConfig {
            max_width: 4,
            iteration_cap: None,
            eager_subsumption: true,
            worklist_order: WorklistOrder::Fifo,
        }
    }
}

/// 2n + 4*C(n,2) + 8*C(n,3) + 16*C(n,4): the total number of cubes of
/// widths 1..=4 over n variables, hence a bound on store additions.
pub fn addition_bound(n: u32) -> u64 {
    let n = n as u64;
    let c2 = n * n.saturating_sub(1) / 2;
    let c3 = c2 * n.saturating_sub(2) / 3;
    let c4 = c3 * n.saturating_sub(3) / 4;
    2 * n + 4 * c2 + 8 * c3 + 16 * c4
}

/// Outcome of resolving two rejected cubes on a complementary pivot.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Resolvent {
    Cube(Cube),
    Empty,
    NotApplicable,
}

/// Resolves two rejected cubes: requires exactly one variable with opposite
/// signs; the conclusion is the union of the remaining literals (shared
/// same-sign literals merge). Returns `Empty` for the empty union,
/// `NotApplicable` when there is no unique pivot, the conclusion exceeds
/// `max_width`, or both parents have width 4 with a width-4 conclusion
/// (no listed rule covers that shape).
pub fn resolve_rejected(c1: &Cube, c2: &Cube, max_width: usize) -> Resolvent {
    let mut pivot: Option<u32> = None;
    for &l in c1.literals() {
        if c2.contains(l.negated()) {
            if pivot.is_some() {
                return Resolvent::NotApplicable;
            }
            pivot = Some(l.var());
        }
    }
    let Some(pivot) = pivot else {
        return Resolvent::NotApplicable;
    };
    let lits: Vec<Literal> = c1
        .literals()
        .iter()
        .chain(c2.literals())
        .copied()
        .filter(|l| l.var() != pivot)
        .collect();
    if lits.is_empty() {
        return Resolvent::Empty;
    }
    match canonicalize_cube(&lits) {
        Ok(cube) => {
            if cube.width() > max_width
                || (c1.width() == 4 && c2.width() == 4 && cube.width() == 4)
            {
                Resolvent::NotApplicable
            } else {
                Resolvent::Cube(cube)
            }
        }
        // width > 4
        Err(_) => Resolvent::NotApplicable,
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct UnclassifiablePair {
    pub widths: (usize, usize),
    pub conclusion_width: usize,
}

/// Recovers the tabulated rule label from the parent/conclusion widths.
/// Width combinations outside the rule table (those involving a unit
/// cube, and merge-heavy shapes) are `Err`; the engine logs them under the
/// nearest family via [`classify_or_nearest`].
pub fn classify_rule(c1: &Cube, c2: &Cube, conclusion: &Cube) -> Result<RuleId, UnclassifiablePair> {
    let (w1, w2) = {
        let (a, b) = (c1.width(), c2.width());
        (a.min(b), a.max(b))
    };
    let wc = conclusion.width();
    match (w1, w2, wc) {
        (2, 2, 1) => Ok(RuleId::R22CI),
        (3, 3, 2) => Ok(RuleId::R33CII),
        (2, 3, 3) => Ok(RuleId::R23CDD),
        (2, 4, 3) => Ok(RuleId::R24CIDD),
        (3, 3, 3) => Ok(RuleId::R33CID),
        (3, 4, 3) => Ok(RuleId::R34CIID),
        (4, 4, 3) => Ok(RuleId::R44CIII),
        (3, 3, 4) => Ok(RuleId::R33CDD),
        _ => Err(UnclassifiablePair {
            widths: (w1, w2),
            conclusion_width: wc,
        }),
    }
}

/// The label the engine records for a resolution step: the tabulated label
/// when one exists, otherwise the nearest family by conclusion width.
pub fn classify_or_nearest(c1: &Cube, c2: &Cube, conclusion: &Cube) -> RuleId {
    classify_widths(c1.width(), c2.width(), conclusion.width())
}

/// Width-only form of [`classify_or_nearest`].
pub fn classify_widths(w1: usize, w2: usize, wc: usize) -> RuleId {
    let (a, b) = (w1.min(w2), w1.max(w2));
    match (a, b, wc) {
        (2, 2, 1) => RuleId::R22CI,
        (3, 3, 2) => RuleId::R33CII,
        (2, 3, 3) => RuleId::R23CDD,
        (2, 4, 3) => RuleId::R24CIDD,
        (3, 3, 3) => RuleId::R33CID,
        (3, 4, 3) => RuleId::R34CIID,
        (4, 4, 3) => RuleId::R44CIII,
        (3, 3, 4) => RuleId::R33CDD,
        _ => match wc {
            1 => RuleId::R22CI,
            2 => RuleId::R33CII,
            4 => RuleId::R33CDD,
            _ => RuleId::R24CIDD,
        },
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("iteration cap of {0} worklist pops exceeded")]
    IterationCapExceeded(u64),
}

/// Statistics from one saturation run.
#[derive(Clone, Debug)]
pub struct FixpointReport {
    /// Worklist pops.
    pub iterations: u64,
    /// Non-seed cube additions per width 1..=4.
    pub additions_per_level: [u64; 4],
    pub firings_per_rule: HashMap<RuleId, u64>,
    pub reached_fixpoint: bool,
    pub empty_derived: bool,
    pub wall_time: Duration,
}

impl FixpointReport {
    pub fn total_additions(&self) -> u64 {
        self.additions_per_level.iter().sum()
    }
}

/// Largest variable index the saturation engine supports; cubes live in
/// a pair of 64-bit polarity masks.
pub const MAX_ENGINE_VARS: u32 = 64;

fn mask_bit(var: u32) -> u64 {
    1u64 << (var - 1)
}

fn pack_cube(c: &Cube) -> Option<(u64, u64)> {
    let mut pos = 0u64;
    let mut neg = 0u64;
    for &l in c.literals() {
        if l.var() > MAX_ENGINE_VARS {
            return None;
        }
        if l.is_positive() {
            pos |= mask_bit(l.var());
        } else {
            neg |= mask_bit(l.var());
        }
    }
    Some((pos, neg))
}

fn unpack_cube(pos: u64, neg: u64) -> Cube {
    let mut lits = Vec::with_capacity((pos | neg).count_ones() as usize);
    let mut union = pos | neg;
    while union != 0 {
        let var = union.trailing_zeros() + 1;
        lits.push(Literal::new(var, pos & mask_bit(var) != 0));
        union &= union - 1;
    }
    canonicalize_cube(&lits).expect("masks carry one polarity per variable")
}

fn mask_key(pos: u64, neg: u64) -> u128 {
    ((pos as u128) << 64) | neg as u128
}

/// The leveled sets of rejected cubes, their literal index, the worklist
/// of cubes not yet resolved against the store, and the derivation log.
pub struct RejectionStore {
    n: u32,
    /// Triple universe for subsumption closure and COVA checks.
    triples: Vec<VarTriple>,
    triple_set: HashSet<VarTriple>,
    log: Vec<Derivation>,
    /// Polarity masks per log id; the empty-cube record holds (0, 0).
    packed: Vec<(u64, u64)>,
    /// Packed cube -> id of its (unique, first) derivation.
    by_mask: FxHashMap<u128, u64>,
    /// Slot 2(var-1) holds positive occurrences, 2(var-1)+1 negative;
    /// ids in insertion order.
    index: Vec<Vec<u64>>,
    /// Per-id visit marks for duplicate-free partner enumeration.
    stamps: Vec<u64>,
    stamp: u64,
    worklist: VecDeque<u64>,
    seed_counts: [u64; 4],
    level_counts: [u64; 4],
    empty_derived: bool,
}

fn index_slot(l: Literal) -> usize {
    ((l.var() - 1) * 2) as usize + usize::from(!l.is_positive())
}

impl RejectionStore {
    pub fn num_vars(&self) -> u32 {
        self.n
    }

    pub fn triples(&self) -> &[VarTriple] {
        &self.triples
    }

    pub fn has_triple(&self, t: &VarTriple) -> bool {
        self.triple_set.contains(t)
    }

    pub fn contains(&self, c: &Cube) -> bool {
        self.derivation_of(c).is_some()
    }

    pub fn derivation_of(&self, c: &Cube) -> Option<u64> {
        let (pos, neg) = pack_cube(c)?;
        self.by_mask.get(&mask_key(pos, neg)).copied()
    }

    pub fn log(&self) -> &[Derivation] {
        &self.log
    }

    pub fn empty_derived(&self) -> bool {
        self.empty_derived
    }

    pub fn num_seeds(&self) -> u64 {
        self.seed_counts.iter().sum()
    }

    /// All rejected cubes, sorted (order-independent view of the store).
    pub fn rejected_cubes(&self) -> Vec<Cube> {
        // Every logged conclusion is unique (rediscoveries are not
        // re-logged), so the packed masks enumerate the store directly.
        let mut v: Vec<Cube> = self
            .packed
            .iter()
            .zip(&self.log)
            .filter(|(_, d)| d.conclusion.is_some())
            .map(|(&(p, n), _)| unpack_cube(p, n))
            .collect();
        v.sort();
        v
    }

    fn cube_of(&self, id: u64) -> &Cube {
        self.log[id as usize]
            .conclusion
            .as_ref()
            .expect("worklist ids always carry a cube")
    }

    fn push_work(&mut self, id: u64, order: WorklistOrder) {
        match order {
            WorklistOrder::Fifo => self.worklist.push_back(id),
            WorklistOrder::Lifo => self.worklist.push_front(id),
        }
    }

    /// Adds a packed cube with its derivation unless already present
    /// (rediscoveries are not re-logged). Returns the new id.
    fn add_masked(
        &mut self,
        pos: u64,
        neg: u64,
        rule: RuleId,
        parents: Vec<u64>,
        source_clause: Option<usize>,
        order: WorklistOrder,
    ) -> Option<u64> {
        let key = mask_key(pos, neg);
        if self.by_mask.contains_key(&key) {
            return None;
        }
        let id = self.log.len() as u64;
        let cube = unpack_cube(pos, neg);
        for &l in cube.literals() {
            self.index[index_slot(l)].push(id);
        }
        self.level_counts[cube.width() - 1] += 1;
        if rule == RuleId::Seed {
            self.seed_counts[cube.width() - 1] += 1;
        }
        self.by_mask.insert(key, id);
        self.packed.push((pos, neg));
        self.stamps.push(0);
        self.log.push(Derivation {
            id,
            conclusion: Some(cube),
            rule,
            parents,
            source_clause,
        });
        self.push_work(id, order);
        Some(id)
    }

    fn add_cube(
        &mut self,
        cube: Cube,
        rule: RuleId,
        parents: Vec<u64>,
        source_clause: Option<usize>,
        order: WorklistOrder,
    ) -> Option<u64> {
        let (pos, neg) = pack_cube(&cube)
            .unwrap_or_else(|| panic!("engine supports at most {MAX_ENGINE_VARS} variables"));
        self.add_masked(pos, neg, rule, parents, source_clause, order)
    }

    #[cfg(test)]
    pub(crate) fn add_cube_for_tests(
        &mut self,
        cube: Cube,
        rule: RuleId,
        parents: Vec<u64>,
    ) -> Option<u64> {
        self.add_cube(cube, rule, parents, None, WorklistOrder::Fifo)
    }

    fn record_empty(&mut self, parents: Vec<u64>) {
        if self.empty_derived {
            return;
        }
        let id = self.log.len() as u64;
        self.packed.push((0, 0));
        self.stamps.push(0);
        self.log.push(Derivation {
            id,
            conclusion: None,
            rule: RuleId::EmptyResolvent,
            parents,
            source_clause: None,
        });
        self.empty_derived = true;
    }
}

/// Seeds a store with one rejected cube per clause: the clause complement,
/// at the level of its width. Duplicate complements are logged once.
pub fn seed_rejections(f: &Formula) -> RejectionStore {
    seed_rejections_with(f, false)
}

/// As [`seed_rejections`], optionally widening the triple universe from the
/// formula's width-3 clause triples to all C(n,3) triples.
pub fn seed_rejections_with(f: &Formula, all_triples: bool) -> RejectionStore {
    let triples = if all_triples {
        let mut ts = f.clause_triples();
        let seen: HashSet<VarTriple> = ts.iter().copied().collect();
        let n = f.num_vars();
        for a in 1..=n {
            for b in a + 1..=n {
                for c in b + 1..=n {
                    let t = VarTriple::new(a, b, c).expect("distinct");
                    if !seen.contains(&t) {
                        ts.push(t);
                    }
                }
            }
        }
        ts
    } else {
        f.clause_triples()
    };
    let n = f.num_vars();
    assert!(
        n <= MAX_ENGINE_VARS,
        "engine supports at most {MAX_ENGINE_VARS} variables, got {n}"
    );
    let triple_set = triples.iter().copied().collect();
    let mut store = RejectionStore {
        n,
        triples,
        triple_set,
        log: Vec::new(),
        packed: Vec::new(),
        by_mask: FxHashMap::default(),
        index: vec![Vec::new(); (n as usize) * 2],
        stamps: Vec::new(),
        stamp: 0,
        worklist: VecDeque::new(),
        seed_counts: [0; 4],
        level_counts: [0; 4],
        empty_derived: false,
    };
    for (i, c) in f.clauses().iter().enumerate() {
        store.add_cube(
            complement_cube(c),
            RuleId::Seed,
            Vec::new(),
            Some(i),
            WorklistOrder::Fifo,
        );
    }
    store
}

/// Width-3 supersets of a newly rejected width-1/2 cube, over triples of
/// the active universe that contain its variables (rules 1-3I and 2-3II).
/// Adds each novel superset with a one-parent derivation and returns them.
pub fn subsumption_closure(
    store: &mut RejectionStore,
    parent_id: u64,
    order: WorklistOrder,
) -> Vec<Cube> {
    let cube = store.cube_of(parent_id).clone();
    let width = cube.width();
    debug_assert!(width <= 2);
    let rule = if width == 1 { RuleId::R13I } else { RuleId::R23II };
    let mut added = Vec::new();
    let triples: Vec<VarTriple> = store
        .triples
        .iter()
        .filter(|t| cube.literals().iter().all(|l| t.contains(l.var())))
        .copied()
        .collect();
    let (base_pos, base_neg) = store.packed[parent_id as usize];
    for t in triples {
        let free: Vec<u32> = t
            .vars()
            .iter()
            .copied()
            .filter(|&v| !cube.literals().iter().any(|l| l.var() == v))
            .collect();
        let patterns = 1u32 << free.len();
        for bits in 0..patterns {
            let mut pos = base_pos;
            let mut neg = base_neg;
            for (i, &v) in free.iter().enumerate() {
                if bits & (1 << i) == 0 {
                    pos |= mask_bit(v);
                } else {
                    neg |= mask_bit(v);
                }
            }
            if let Some(id) = store.add_masked(pos, neg, rule, vec![parent_id], None, order) {
                added.push(store.cube_of(id).clone());
            }
        }
    }
    added
}

/// One worklist pop: resolve the popped cube against every stored cube
/// sharing a complementary literal (via the index), then take the
/// subsumption closure if it has width <= 2. Returns new rejections.
pub fn step(store: &mut RejectionStore, cfg: &EngineConfig) -> usize {
    // LIFO order pushes new work to the front, so popping the front
    // serves both disciplines.
    let Some(id) = store.worklist.pop_front() else {
        return 0;
    };
    let (p1, n1) = store.packed[id as usize];
    let w1 = (p1 | n1).count_ones() as usize;
    let mut new_count = 0usize;

    // Partner ids in deterministic order: variable order in the popped cube,
    // then id order within each index bucket.
    store.stamp += 1;
    let stamp = store.stamp;
    let mut partners: Vec<u64> = Vec::new();
    let mut union = p1 | n1;
    while union != 0 {
        let var = union.trailing_zeros() + 1;
        union &= union - 1;
        // bucket of the complementary literal
        let slot = ((var - 1) * 2) as usize + usize::from(p1 & mask_bit(var) != 0);
        for &pid in &store.index[slot] {
            if pid != id && store.stamps[pid as usize] != stamp {
                store.stamps[pid as usize] = stamp;
                partners.push(pid);
            }
        }
    }
    // Mask-level mirror of resolve_rejected / classify_or_nearest: unique
    // complementary pivot, union of the rest, width cap, no (4,4) -> 4.
    for pid in partners {
        let (p2, n2) = store.packed[pid as usize];
        let comp = (p1 & n2) | (n1 & p2);
        if comp.count_ones() != 1 {
            continue;
        }
        let pos = (p1 | p2) & !comp;
        let neg = (n1 | n2) & !comp;
        if pos | neg == 0 {
            store.record_empty(vec![id, pid]);
            return new_count;
        }
        let wc = (pos | neg).count_ones() as usize;
        if wc > cfg.max_width {
            continue;
        }
        let w2 = (p2 | n2).count_ones() as usize;
        if w1 == 4 && w2 == 4 && wc == 4 {
            continue;
        }
        let rule = classify_widths(w1, w2, wc);
        if store
            .add_masked(pos, neg, rule, vec![id, pid], None, cfg.worklist_order)
            .is_some()
        {
            new_count += 1;
        }
    }

    if cfg.eager_subsumption && w1 <= 2 {
        new_count += subsumption_closure(store, id, cfg.worklist_order).len();
    }
    new_count
}

/// Runs [`step`] until the worklist drains, the empty cube is derived, or
/// the iteration cap trips. Deterministic for a fixed formula and config.
pub fn fixpoint(
    store: &mut RejectionStore,
    cfg: &EngineConfig,
) -> Result<FixpointReport, EngineError> {
    let start = Instant::now();
    let cap = cfg.iteration_cap.unwrap_or_else(|| addition_bound(store.n));
    let mut iterations = 0u64;
    // LIFO order is realized by pushing new work to the front; seeds are
    // reversed here so the last seed pops first.
    if cfg.worklist_order == WorklistOrder::Lifo {
        let seeds: Vec<u64> = store.worklist.drain(..).collect();
        for id in seeds.into_iter().rev() {
            store.worklist.push_back(id);
        }
    }
    while !store.worklist.is_empty() && !store.empty_derived {
        if iterations >= cap {
            return Err(EngineError::IterationCapExceeded(cap));
        }
        step(store, cfg);
        iterations += 1;
    }

    let mut firings: HashMap<RuleId, u64> = HashMap::new();
    for d in &store.log {
        *firings.entry(d.rule).or_insert(0) += 1;
    }
    let mut additions = store.level_counts;
    for (a, s) in additions.iter_mut().zip(store.seed_counts.iter()) {
        *a -= s;
    }
    Ok(FixpointReport {
        iterations,
        additions_per_level: additions,
        firings_per_rule: firings,
        reached_fixpoint: true,
        empty_derived: store.empty_derived,
        wall_time: start.elapsed(),
    })
}

/// The append-only derivation log; ids are contiguous from 0.
pub fn derivation_log(store: &RejectionStore) -> &[Derivation] {
    store.log()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{clause, cube, example_formula, random_formula, Formula};

    fn all_patterns_formula() -> Formula {
        let mut clauses = Vec::new();
        for bits in 0u8..8 {
            clauses.push(clause(&[
                if bits & 4 == 0 { 1 } else { -1 },
                if bits & 2 == 0 { 2 } else { -2 },
                if bits & 1 == 0 { 3 } else { -3 },
            ]));
        }
        Formula::new(3, clauses).unwrap()
    }

    #[test]
    fn seeds_of_example_formula() {
        let store = seed_rejections(&example_formula());
        for c in [
            cube(&[-1, -2, -3]),
            cube(&[-1, -2, 3]),
            cube(&[-1, -2, -4]),
            cube(&[-1, 4, 5]),
            cube(&[-2, 3, -5]),
        ] {
            assert!(store.contains(&c), "missing seed {c:?}");
        }
        assert_eq!(store.log().len(), 5);
        assert!(store.log().iter().all(|d| d.rule == RuleId::Seed));
    }

    #[test]
    fn unit_clause_seed_and_duplicates() {
        let f = Formula::new(2, vec![clause(&[1]), clause(&[1])]).unwrap();
        let store = seed_rejections(&f);
        assert!(store.contains(&cube(&[-1])));
        assert_eq!(store.log().len(), 1);
    }

    #[test]
    fn resolve_examples() {
        assert_eq!(
            resolve_rejected(&cube(&[1, 2]), &cube(&[1, -2]), 4),
            Resolvent::Cube(cube(&[1]))
        );
        assert_eq!(
            resolve_rejected(&cube(&[-1, -2, -3]), &cube(&[-1, -2, 3]), 4),
            Resolvent::Cube(cube(&[-1, -2]))
        );
        assert_eq!(
            resolve_rejected(&cube(&[1, 2, 3]), &cube(&[-1, -2, -3]), 4),
            Resolvent::NotApplicable
        );
        assert_eq!(
            resolve_rejected(&cube(&[1, 2, 3]), &cube(&[4, 5, -3]), 4),
            Resolvent::Cube(cube(&[1, 2, 4, 5]))
        );
        assert_eq!(
            resolve_rejected(&cube(&[1, 2, 3]), &cube(&[4, 5, -3]), 3),
            Resolvent::NotApplicable
        );
        assert_eq!(resolve_rejected(&cube(&[1]), &cube(&[-1]), 4), Resolvent::Empty);
        // zero complementary pairs
        assert_eq!(
            resolve_rejected(&cube(&[1, 2]), &cube(&[3, 4]), 4),
            Resolvent::NotApplicable
        );
        // both parents width 4, conclusion width 4: no listed rule
        assert_eq!(
            resolve_rejected(&cube(&[1, 2, 3, 4]), &cube(&[1, 2, -4, 5]), 4),
            Resolvent::NotApplicable
        );
        // 4-4CIII still applies
        assert_eq!(
            resolve_rejected(&cube(&[1, 2, 3, 4]), &cube(&[1, 2, 3, -4]), 4),
            Resolvent::Cube(cube(&[1, 2, 3]))
        );
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_rule(&cube(&[1, 2]), &cube(&[1, -2]), &cube(&[1])),
            Ok(RuleId::R22CI)
        );
        assert_eq!(
            classify_rule(&cube(&[-1, -2, -3]), &cube(&[-1, -2, 3]), &cube(&[-1, -2])),
            Ok(RuleId::R33CII)
        );
        assert_eq!(
            classify_rule(&cube(&[1, 2, 3]), &cube(&[4, 5, -3]), &cube(&[1, 2, 4, 5])),
            Ok(RuleId::R33CDD)
        );
        assert_eq!(
            classify_rule(&cube(&[1, 2]), &cube(&[3, 4, -2]), &cube(&[1, 3, 4])),
            Ok(RuleId::R23CDD)
        );
        assert_eq!(
            classify_rule(&cube(&[1, 2]), &cube(&[1, 3, 4, -2]), &cube(&[1, 3, 4])),
            Ok(RuleId::R24CIDD)
        );
        assert_eq!(
            classify_rule(&cube(&[1, 2, 3]), &cube(&[1, 4, -3]), &cube(&[1, 2, 4])),
            Ok(RuleId::R33CID)
        );
        assert_eq!(
            classify_rule(&cube(&[1, 2, 3]), &cube(&[1, 2, 4, -3]), &cube(&[1, 2, 4])),
            Ok(RuleId::R34CIID)
        );
        assert_eq!(
            classify_rule(&cube(&[1, 2, 3, 4]), &cube(&[1, 2, 3, -4]), &cube(&[1, 2, 3])),
            Ok(RuleId::R44CIII)
        );
        // unit resolution is outside the rule table
        let u = classify_rule(&cube(&[1]), &cube(&[2, -1]), &cube(&[2])).unwrap_err();
        assert_eq!(u.widths, (1, 2));
        assert_eq!(
            classify_or_nearest(&cube(&[1]), &cube(&[2, -1]), &cube(&[2])),
            RuleId::R22CI
        );
    }

    #[test]
    fn subsumption_examples() {
        // width-2 cube, triple (1,2,4)
        let f = Formula::new(4, vec![clause(&[1, 2, 4])]).unwrap();
        let mut store = seed_rejections(&f);
        let id = store
            .add_cube(cube(&[-1, -2]), RuleId::R33CII, vec![0], None, WorklistOrder::Fifo)
            .unwrap();
        let added = subsumption_closure(&mut store, id, WorklistOrder::Fifo);
        assert_eq!(added, vec![cube(&[-1, -2, 4])]); // {-1,-2,-4} was the seed
        assert!(store.contains(&cube(&[-1, -2, -4])));

        // width-1 cube: 4 supersets per triple
        let f = Formula::new(3, vec![clause(&[1, 2, 3])]).unwrap();
        let mut store = seed_rejections(&f);
        let id = store
            .add_cube(cube(&[1]), RuleId::R22CI, vec![0], None, WorklistOrder::Fifo)
            .unwrap();
        let added = subsumption_closure(&mut store, id, WorklistOrder::Fifo);
        assert_eq!(
            added,
            vec![
                cube(&[1, 2, 3]),
                cube(&[1, -2, 3]),
                cube(&[1, 2, -3]),
                cube(&[1, -2, -3]),
            ]
        );
        for d in store.log() {
            if d.rule == RuleId::R13I {
                assert_eq!(d.parents, vec![id]);
            }
        }
    }

    #[test]
    fn step_on_example_seeds() {
        let mut store = seed_rejections(&example_formula());
        let cfg = EngineConfig::default();
        // first pop is {-1,-2,-3}; its complementary partners are
        // {-1,-2,+3} (pivot 3) and {-2,+3,-5} (pivot 3)
        let n = step(&mut store, &cfg);
        assert!(n >= 1);
        assert!(store.contains(&cube(&[-1, -2])));
    }

    #[test]
    fn empty_resolvent_sets_flag() {
        let f = Formula::new(1, vec![clause(&[1])]).unwrap();
        let mut store = seed_rejections(&f);
        store
            .add_cube(cube(&[1]), RuleId::R22CI, vec![0], None, WorklistOrder::Fifo)
            .unwrap();
        let report = fixpoint(&mut store, &EngineConfig::default()).unwrap();
        assert!(report.empty_derived);
        assert_eq!(store.log().last().unwrap().rule, RuleId::EmptyResolvent);
    }

    #[test]
    fn fixpoint_on_example_formula() {
        let mut store = seed_rejections(&example_formula());
        let report = fixpoint(&mut store, &EngineConfig::default()).unwrap();
        assert!(report.reached_fixpoint);
        assert!(!report.empty_derived);
        assert!(store.contains(&cube(&[-1, -2])));
        assert!(report.total_additions() <= addition_bound(5));
    }

    #[test]
    fn fixpoint_on_all_patterns_formula_derives_empty() {
        let mut store = seed_rejections(&all_patterns_formula());
        assert_eq!(store.num_seeds(), 8);
        let report = fixpoint(&mut store, &EngineConfig::default()).unwrap();
        assert!(report.empty_derived);
        let last = store.log().last().unwrap();
        assert_eq!(last.rule, RuleId::EmptyResolvent);
        assert!(last.conclusion.is_none());
    }

    #[test]
    fn fixpoint_on_empty_formula() {
        let f = Formula::new(3, vec![]).unwrap();
        let mut store = seed_rejections(&f);
        let report = fixpoint(&mut store, &EngineConfig::default()).unwrap();
        assert!(report.reached_fixpoint);
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn iteration_cap_trips() {
        let mut store = seed_rejections(&example_formula());
        let cfg = EngineConfig {
            iteration_cap: Some(2),
            ..EngineConfig::default()
        };
        assert_eq!(
            fixpoint(&mut store, &cfg).unwrap_err(),
            EngineError::IterationCapExceeded(2)
        );
    }

    #[test]
    fn log_ids_contiguous_and_deterministic() {
        let f = random_formula(8, 30, 3).unwrap();
        let mut s1 = seed_rejections(&f);
        fixpoint(&mut s1, &EngineConfig::default()).unwrap();
        let mut s2 = seed_rejections(&f);
        fixpoint(&mut s2, &EngineConfig::default()).unwrap();
        assert_eq!(format_log(s1.log()), format_log(s2.log()));
        for (i, d) in s1.log().iter().enumerate() {
            assert_eq!(d.id, i as u64);
            assert!(d.parents.iter().all(|&p| p < d.id));
        }
    }

    #[test]
    fn resolution_correspondence_with_clause_resolution() {
        // Negating a 2-parent conclusion and its parents yields clauses where
        // the conclusion-clause is the resolvent on the unique pivot.
        let f = random_formula(9, 35, 11).unwrap();
        let mut store = seed_rejections(&f);
        fixpoint(&mut store, &EngineConfig::default()).unwrap();
        let mut checked = 0;
        for d in store.log() {
            if d.parents.len() != 2 || d.conclusion.is_none() {
                continue;
            }
            let get = |id: u64| store.log()[id as usize].conclusion.clone().unwrap();
            let (p1, p2) = (get(d.parents[0]), get(d.parents[1]));
            let pivots: Vec<u32> = p1
                .literals()
                .iter()
                .filter(|l| p2.contains(l.negated()))
                .map(|l| l.var())
                .collect();
            assert_eq!(pivots.len(), 1);
            let mut lits: Vec<_> = p1
                .literals()
                .iter()
                .chain(p2.literals())
                .copied()
                .filter(|l| l.var() != pivots[0])
                .collect();
            lits.sort();
            lits.dedup();
            assert_eq!(lits, d.conclusion.as_ref().unwrap().literals());
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn subsumption_correspondence() {
        let f = random_formula(9, 40, 13).unwrap();
        let mut store = seed_rejections(&f);
        fixpoint(&mut store, &EngineConfig::default()).unwrap();
        for d in store.log() {
            if d.parents.len() == 1 {
                let parent = store.log()[d.parents[0] as usize]
                    .conclusion
                    .clone()
                    .unwrap();
                let conc = d.conclusion.as_ref().unwrap();
                assert!(conc.is_superset_of(&parent));
                assert!(conc.width() > parent.width());
            }
        }
    }

    #[test]
    fn width_cap_respected() {
        let f = random_formula(10, 40, 17).unwrap();
        let cfg = EngineConfig {
            max_width: 3,
            ..EngineConfig::default()
        };
        let mut store = seed_rejections(&f);
        fixpoint(&mut store, &cfg).unwrap();
        assert!(store.rejected_cubes().iter().all(|c| c.width() <= 3));
    }

    #[test]
    fn reversed_worklist_same_fixpoint_set() {
        // The empty-cube short circuit stops saturation early, so the
        // truncated store is order-dependent by design; the fixpoint set
        // itself (no empty cube) must not be.
        for seed in 0..10 {
            let f = random_formula(7, 25, seed).unwrap();
            let mut fifo = seed_rejections(&f);
            fixpoint(&mut fifo, &EngineConfig::default()).unwrap();
            let mut lifo = seed_rejections(&f);
            fixpoint(
                &mut lifo,
                &EngineConfig {
                    worklist_order: WorklistOrder::Lifo,
                    ..EngineConfig::default()
                },
            )
            .unwrap();
            assert_eq!(fifo.empty_derived(), lifo.empty_derived());
            if !fifo.empty_derived() {
                assert_eq!(fifo.rejected_cubes(), lifo.rejected_cubes());
            }
        }
    }

    #[test]
    fn derivation_format() {
        let d = Derivation {
            id: 0,
            conclusion: Some(cube(&[-1, -2, 3])),
            rule: RuleId::Seed,
            parents: vec![],
            source_clause: Some(1),
        };
        assert_eq!(format_derivation(&d), "0 SEED -1 -2 3 0 c 1");
        let d = Derivation {
            id: 7,
            conclusion: Some(cube(&[-1, -2])),
            rule: RuleId::R33CII,
            parents: vec![0, 1],
            source_clause: None,
        };
        assert_eq!(format_derivation(&d), "7 3-3CII -1 -2 0 p 0 1");
        let d = Derivation {
            id: 9,
            conclusion: None,
            rule: RuleId::EmptyResolvent,
            parents: vec![5, 6],
            source_clause: None,
        };
        assert_eq!(format_derivation(&d), "9 EMPTY_RESOLVENT 0 p 5 6");
    }
}
