//! Ground truth at desk scale: exhaustive enumeration, a DPLL
//! cross-check, cube-soundness testing, and an independent replay
//! checker for derivation logs. Nothing here calls into the engine.

use std::collections::HashMap;

use thiserror::Error;

use crate::cnf::{complement_cube, Assignment, Clause, Cube, Formula, Literal, VarTriple};
use crate::engine::{Derivation, RuleId};

pub const DEFAULT_BRUTE_FORCE_LIMIT: u32 = 20;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("instance too large for exhaustive enumeration (n = {n} > {limit})")]
pub struct TooLarge {
    pub n: u32,
    pub limit: u32,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub satisfiable: bool,
    pub model: Option<Assignment>,
    pub assignments_tried: u64,
}

/// Per-clause bitmask pair: a clause is satisfied by assignment mask `a`
/// iff `(a & pos) | (!a & neg)` is nonzero. Bit `n - var` of the mask
/// holds the value of `var`, so counting masks upward enumerates
/// assignments in lexicographic order over (x1, ..., xn) with false first.
fn clause_masks(f: &Formula) -> Vec<(u64, u64)> {
    let n = f.num_vars();
    f.clauses()
        .iter()
        .map(|c| {
            let mut pos = 0u64;
            let mut neg = 0u64;
            for l in c.literals() {
                let bit = 1u64 << (n - l.var());
                if l.is_positive() {
                    pos |= bit;
                } else {
                    neg |= bit;
                }
            }
            (pos, neg)
        })
        .collect()
}

fn mask_satisfies(masks: &[(u64, u64)], a: u64) -> bool {
    masks.iter().all(|&(pos, neg)| (a & pos) | (!a & neg) != 0)
}

fn mask_to_assignment(f: &Formula, a: u64) -> Assignment {
    let n = f.num_vars();
    Assignment::new((1..=n).map(|v| a & (1u64 << (n - v)) != 0).collect())
}

/// Exhaustive decision: all 2^n assignments in lexicographic order,
/// first model wins.
pub fn brute_force(f: &Formula, limit: u32) -> Result<OracleResult, TooLarge> {
    let n = f.num_vars();
    if n > limit || n > 63 {
        return Err(TooLarge { n, limit });
    }
    let masks = clause_masks(f);
    let total = 1u64 << n;
    for a in 0..total {
        if mask_satisfies(&masks, a) {
            return Ok(OracleResult {
                satisfiable: true,
                model: Some(mask_to_assignment(f, a)),
                assignments_tried: a + 1,
            });
        }
    }
    Ok(OracleResult {
        satisfiable: false,
        model: None,
        assignments_tried: total,
    })
}

/// All satisfying assignments as bitmasks, for batch soundness checks.
pub fn model_masks(f: &Formula, limit: u32) -> Result<Vec<u64>, TooLarge> {
    let n = f.num_vars();
    if n > limit || n > 63 {
        return Err(TooLarge { n, limit });
    }
    let masks = clause_masks(f);
    Ok((0..1u64 << n).filter(|&a| mask_satisfies(&masks, a)).collect())
}

/// True iff no satisfying assignment extends the cube, i.e. f /\ c is
/// unsatisfiable. Enumeration only; this is the definition of a correct
/// rejection.
pub fn cube_sound(f: &Formula, c: &Cube) -> Result<bool, TooLarge> {
    let models = model_masks(f, DEFAULT_BRUTE_FORCE_LIMIT)?;
    Ok(cube_sound_against(&models, f.num_vars(), c))
}

/// Batch form of [`cube_sound`] over a precomputed model list.
pub fn cube_sound_against(models: &[u64], n: u32, c: &Cube) -> bool {
    let mut want = 0u64;
    let mut mask = 0u64;
    for l in c.literals() {
        let bit = 1u64 << (n - l.var());
        mask |= bit;
        if l.is_positive() {
            want |= bit;
        }
    }
    !models.iter().any(|&m| m & mask == want)
}

/// DPLL with unit propagation, branching on the first unassigned variable,
/// true branch first. Independent of [`brute_force`] by construction.
pub fn dpll(f: &Formula) -> OracleResult {
    let mut values: Vec<Option<bool>> = vec![None; f.num_vars() as usize];
    let mut tried = 0u64;
    let sat = dpll_search(f.clauses(), &mut values, &mut tried);
    let model = sat.then(|| {
        Assignment::new(values.iter().map(|v| v.unwrap_or(false)).collect())
    });
    OracleResult {
        satisfiable: sat,
        model,
        assignments_tried: tried,
    }
}

enum ClauseState {
    Satisfied,
    Unit(Literal),
    Conflict,
    Open,
}

fn clause_state(c: &Clause, values: &[Option<bool>]) -> ClauseState {
    let mut unassigned = None;
    let mut unassigned_count = 0;
    for &l in c.literals() {
        match values[(l.var() - 1) as usize] {
            Some(v) if v == l.is_positive() => return ClauseState::Satisfied,
            Some(_) => {}
            None => {
                unassigned = Some(l);
                unassigned_count += 1;
            }
        }
    }
    match unassigned_count {
        0 => ClauseState::Conflict,
        1 => ClauseState::Unit(unassigned.unwrap()),
        _ => ClauseState::Open,
    }
}

fn dpll_search(clauses: &[Clause], values: &mut Vec<Option<bool>>, tried: &mut u64) -> bool {
    // unit propagation to a local fixpoint
    let mut trail: Vec<u32> = Vec::new();
    loop {
        let mut propagated = false;
        for c in clauses {
            match clause_state(c, values) {
                ClauseState::Conflict => {
                    for v in trail {
                        values[(v - 1) as usize] = None;
                    }
                    return false;
                }
                ClauseState::Unit(l) => {
                    values[(l.var() - 1) as usize] = Some(l.is_positive());
                    trail.push(l.var());
                    propagated = true;
                }
                _ => {}
            }
        }
        if !propagated {
            break;
        }
    }
    match values.iter().position(|v| v.is_none()) {
        None => {
            *tried += 1;
            true
        }
        Some(i) => {
            for value in [true, false] {
                values[i] = Some(value);
                *tried += 1;
                if dpll_search(clauses, values, tried) {
                    return true;
                }
                values[i] = None;
            }
            for v in trail {
                values[(v - 1) as usize] = None;
            }
            false
        }
    }
}

/// Replay verdict for a derivation log (or a slice of one).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub steps_checked: u64,
    pub first_invalid: Option<u64>,
    pub seeds_matched: bool,
}

impl CheckReport {
    pub fn valid(&self) -> bool {
        self.first_invalid.is_none() && self.seeds_matched
    }
}

/// Independent replay of a derivation log against the formula's triple
/// universe (width-3 clause triples). See [`check_derivation_in`].
pub fn check_derivation(f: &Formula, log: &[Derivation]) -> CheckReport {
    let universe = f.clause_triples();
    check_derivation_in(f, log, &universe)
}

/// Replays a log step by step: SEED conclusions must equal the complement
/// of the cited clause; two-parent steps must resolve their parents on a
/// unique pivot into exactly the stated conclusion under the correct rule
/// label; one-parent steps must be strict supersets over a universe
/// triple. Invalidity is reported, never raised.
pub fn check_derivation_in(
    f: &Formula,
    log: &[Derivation],
    universe: &[VarTriple],
) -> CheckReport {
    let mut by_id: HashMap<u64, &Derivation> = HashMap::new();
    let mut steps_checked = 0u64;
    let mut seeds_matched = true;
    let mut first_invalid = None;
    for d in log {
        let ok = check_one(f, d, &by_id, universe);
        if !ok {
            if d.rule == RuleId::Seed {
                seeds_matched = false;
            }
            first_invalid = Some(d.id);
            break;
        }
        by_id.insert(d.id, d);
        steps_checked += 1;
    }
    CheckReport {
        steps_checked,
        first_invalid,
        seeds_matched,
    }
}

fn well_formed(c: &Cube) -> bool {
    let lits = c.literals();
    (1..=4).contains(&lits.len())
        && lits.windows(2).all(|w| w[0].var() < w[1].var())
}

fn check_one(
    f: &Formula,
    d: &Derivation,
    earlier: &HashMap<u64, &Derivation>,
    universe: &[VarTriple],
) -> bool {
    if d.parents.iter().any(|&p| p >= d.id || !earlier.contains_key(&p)) {
        return false;
    }
    match d.rule {
        RuleId::Seed => {
            if !d.parents.is_empty() {
                return false;
            }
            let Some(i) = d.source_clause else { return false };
            let Some(clause) = f.clauses().get(i) else { return false };
            let Some(conclusion) = &d.conclusion else { return false };
            well_formed(conclusion) && *conclusion == complement_cube(clause)
        }
        RuleId::R13I | RuleId::R23II => {
            if d.parents.len() != 1 || d.source_clause.is_some() {
                return false;
            }
            let Some(parent) = earlier[&d.parents[0]].conclusion.as_ref() else {
                return false;
            };
            let Some(conclusion) = &d.conclusion else { return false };
            let expected_parent_width = if d.rule == RuleId::R13I { 1 } else { 2 };
            if parent.width() != expected_parent_width
                || conclusion.width() != 3
                || !well_formed(conclusion)
                || !conclusion.is_superset_of(parent)
            {
                return false;
            }
            let vars = conclusion
                .literals()
                .iter()
                .map(|l| l.var())
                .collect::<Vec<_>>();
            let Ok(t) = VarTriple::new(vars[0], vars[1], vars[2]) else {
                return false;
            };
            universe.contains(&t)
        }
        RuleId::EmptyResolvent => {
            if d.parents.len() != 2 || d.conclusion.is_some() || d.source_clause.is_some() {
                return false;
            }
            let (Some(p1), Some(p2)) = (
                earlier[&d.parents[0]].conclusion.as_ref(),
                earlier[&d.parents[1]].conclusion.as_ref(),
            ) else {
                return false;
            };
            match replay_resolution(p1, p2) {
                Some(lits) => lits.is_empty(),
                None => false,
            }
        }
        _ => {
            // two-parent resolution under a tabulated (or nearest-family) label
            if d.parents.len() != 2 || d.source_clause.is_some() {
                return false;
            }
            let (Some(p1), Some(p2)) = (
                earlier[&d.parents[0]].conclusion.as_ref(),
                earlier[&d.parents[1]].conclusion.as_ref(),
            ) else {
                return false;
            };
            let Some(conclusion) = &d.conclusion else { return false };
            if !well_formed(conclusion) {
                return false;
            }
            let Some(lits) = replay_resolution(p1, p2) else {
                return false;
            };
            if lits != conclusion.literals() {
                return false;
            }
            if p1.width() == 4 && p2.width() == 4 && conclusion.width() == 4 {
                return false;
            }
            expected_rule(p1.width(), p2.width(), conclusion.width()) == d.rule
        }
    }
}

/// The checker's own single-pivot resolution; returns the sorted,
/// deduplicated union without the pivot, or `None` if the pivot is not
/// unique or the union contains a contradiction.
fn replay_resolution(p1: &Cube, p2: &Cube) -> Option<Vec<Literal>> {
    let mut pivot = None;
    for &l in p1.literals() {
        if p2.contains(l.negated()) {
            if pivot.is_some() {
                return None;
            }
            pivot = Some(l.var());
        }
    }
    let pivot = pivot?;
    let mut lits: Vec<Literal> = p1
        .literals()
        .iter()
        .chain(p2.literals())
        .copied()
        .filter(|l| l.var() != pivot)
        .collect();
    lits.sort();
    lits.dedup();
    for w in lits.windows(2) {
        if w[0].var() == w[1].var() {
            return None;
        }
    }
    Some(lits)
}

/// The checker's independent copy of the rule-label table, including the
/// nearest-family fallback for shapes outside it.
fn expected_rule(w1: usize, w2: usize, wc: usize) -> RuleId {
    let (w1, w2) = (w1.min(w2), w1.max(w2));
    match (w1, w2, wc) {
        (2, 2, 1) => RuleId::R22CI,
        (3, 3, 2) => RuleId::R33CII,
        (2, 3, 3) => RuleId::R23CDD,
        (2, 4, 3) => RuleId::R24CIDD,
        (3, 3, 3) => RuleId::R33CID,
        (3, 4, 3) => RuleId::R34CIID,
        (4, 4, 3) => RuleId::R44CIII,
        (3, 3, 4) => RuleId::R33CDD,
        (_, _, 1) => RuleId::R22CI,
        (_, _, 2) => RuleId::R33CII,
        (_, _, 4) => RuleId::R33CDD,
        _ => RuleId::R24CIDD,
    }
}
