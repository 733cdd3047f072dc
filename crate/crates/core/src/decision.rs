//! Termination tests over a saturated store: COVA-set exhaustion for
//! UNSAT, survivor-union assignment extraction for SAT. No answer leaves
//! this module unverified.

use std::collections::{BTreeSet, HashMap};

use crate::cnf::{cova_set, evaluate, Assignment, Cube, Formula, VarTriple};
use crate::engine::{
    fixpoint, seed_rejections_with, Derivation, EngineConfig, EngineError, FixpointReport,
    RejectionStore,
};

/// The not-yet-rejected members of one COVA set.
#[derive(Clone, Debug)]
pub struct CovaStatus {
    pub triple: VarTriple,
    pub survivors: Vec<Cube>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UnknownReason {
    ExtractionConflict,
    VerificationFailed,
    IterationCap,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum UnsatWitness {
    Triple(VarTriple),
    EmptyCube,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Unsat {
        witness: UnsatWitness,
        proof: Vec<Derivation>,
    },
    Sat(Assignment),
    Unknown(UnknownReason),
}

#[derive(Clone, Debug, Default)]
pub struct SolveConfig {
    pub engine: EngineConfig,
    /// Widen the triple universe from clause triples to all C(n,3) triples.
    pub all_triples: bool,
}

/// Survivors of `cova_set(t)`: cubes neither stored as rejected nor
/// supersets of a stored rejected width-1/2 cube (lazy subsumption view).
pub fn cova_status(store: &RejectionStore, t: VarTriple) -> CovaStatus {
    let survivors = cova_set(t)
        .into_iter()
        .filter(|c| !rejected_with_subsumption(store, c))
        .collect();
    CovaStatus { triple: t, survivors }
}

fn rejected_with_subsumption(store: &RejectionStore, c: &Cube) -> bool {
    if store.contains(c) {
        return true;
    }
    c.sub_cubes(1).iter().any(|s| store.contains(s))
        || c.sub_cubes(2).iter().any(|s| store.contains(s))
}

/// First triple (in extraction order) whose COVA set is fully rejected,
/// or the empty-cube witness if one was derived.
pub fn check_unsat(store: &RejectionStore) -> Option<UnsatWitness> {
    for &t in store.triples() {
        if cova_status(store, t).survivors.is_empty() {
            return Some(UnsatWitness::Triple(t));
        }
    }
    if store.empty_derived() {
        return Some(UnsatWitness::EmptyCube);
    }
    None
}

/// Greedy survivor-union extraction: per triple, commit the first survivor
/// consistent with the literals committed so far; unconstrained variables
/// default to false. `Err` carries the first triple with no consistent
/// survivor.
pub fn extract_assignment(
    store: &RejectionStore,
    f: &Formula,
) -> Result<Assignment, VarTriple> {
    let mut committed: HashMap<u32, bool> = HashMap::new();
    for &t in store.triples() {
        let status = cova_status(store, t);
        let pick = status.survivors.iter().find(|c| {
            c.literals()
                .iter()
                .all(|l| committed.get(&l.var()).map_or(true, |&v| v == l.is_positive()))
        });
        match pick {
            Some(c) => {
                for l in c.literals() {
                    committed.insert(l.var(), l.is_positive());
                }
            }
            None => return Err(t),
        }
    }
    let mut a = Assignment::all_false(f.num_vars());
    for (var, value) in committed {
        a.set(var, value);
    }
    Ok(a)
}

/// The transitive derivation closure justifying a witness, in id order.
/// For a triple witness: the rejections of all 8 COVA members (or of
/// their subsuming width-1/2 ancestors). For the empty cube: the
/// ancestry of the final empty-resolvent record.
pub fn proof_slice(store: &RejectionStore, witness: &UnsatWitness) -> Vec<Derivation> {
    let mut roots: Vec<u64> = Vec::new();
    match witness {
        UnsatWitness::Triple(t) => {
            for c in cova_set(*t) {
                let id = store.derivation_of(&c).or_else(|| {
                    // the width-1 then width-2 subsets, canonical order
                    c.sub_cubes(1)
                        .iter()
                        .chain(c.sub_cubes(2).iter())
                        .find_map(|s| store.derivation_of(s))
                });
                roots.push(id.expect("witness triple must be fully rejected"));
            }
        }
        UnsatWitness::EmptyCube => {
            let last = store
                .log()
                .iter()
                .rfind(|d| d.conclusion.is_none())
                .expect("empty-cube witness requires an empty resolvent");
            roots.push(last.id);
        }
    }
    let mut closed: BTreeSet<u64> = BTreeSet::new();
    let mut stack = roots;
    while let Some(id) = stack.pop() {
        if closed.insert(id) {
            stack.extend(&store.log()[id as usize].parents);
        }
    }
    closed
        .into_iter()
        .map(|id| store.log()[id as usize].clone())
        .collect()
}

/// A full solve: store, saturation stats, and the verdict.
pub struct Solved {
    pub verdict: Verdict,
    pub report: Option<FixpointReport>,
    pub store: RejectionStore,
}

/// Seed, saturate, test COVA exhaustion, then (absent a witness) extract
/// and verify an assignment. SAT is returned only with a verified model.
pub fn decide(f: &Formula, cfg: &SolveConfig) -> Solved {
    let mut store = seed_rejections_with(f, cfg.all_triples);
    let report = match fixpoint(&mut store, &cfg.engine) {
        Ok(r) => r,
        Err(EngineError::IterationCapExceeded(_)) => {
            return Solved {
                verdict: Verdict::Unknown(UnknownReason::IterationCap),
                report: None,
                store,
            }
        }
    };
    let verdict = if let Some(witness) = check_unsat(&store) {
        let proof = proof_slice(&store, &witness);
        Verdict::Unsat { witness, proof }
    } else {
        match extract_assignment(&store, f) {
            Ok(a) => {
                if evaluate(f, &a) {
                    Verdict::Sat(a)
                } else {
                    Verdict::Unknown(UnknownReason::VerificationFailed)
                }
            }
            Err(_) => Verdict::Unknown(UnknownReason::ExtractionConflict),
        }
    };
    Solved {
        verdict,
        report: Some(report),
        store,
    }
}
