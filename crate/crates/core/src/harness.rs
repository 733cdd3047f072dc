//! Experiment harness: deterministic instance families, KRA-vs-oracle
//! comparison runs, and delta-debugging shrinkage of disagreement
//! witnesses.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cnf::{normalize_clause, random_formula, CnfError, Formula, Literal};
use crate::decision::{decide, SolveConfig, UnknownReason, Verdict};
use crate::dimacs::write_dimacs;
use crate::engine::{addition_bound, ALL_RULES};
use crate::oracle::{self, check_derivation, cube_sound_against};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("input does not satisfy the shrink predicate")]
    PredicateNotSatisfied,
}

/// Writes `count` deterministic DIMACS files named `<seed>-<index>.cnf`.
pub fn gen_files(
    n: u32,
    m: usize,
    count: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out_dir)?;
    let mut paths = Vec::with_capacity(count);
    for i in 0..count {
        let f = random_formula(n, m, seed.wrapping_add(i as u64))?;
        let path = out_dir.join(format!("{seed}-{i}.cnf"));
        fs::write(&path, write_dimacs(&f))?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum KraVerdict {
    Sat,
    Unsat,
    UnknownConflict,
    UnknownOther,
}

impl KraVerdict {
    pub fn label(self) -> &'static str {
        match self {
            KraVerdict::Sat => "SAT",
            KraVerdict::Unsat => "UNSAT",
            KraVerdict::UnknownConflict => "UNKNOWN-conflict",
            KraVerdict::UnknownOther => "UNKNOWN-other",
        }
    }

    pub fn is_unknown(self) -> bool {
        matches!(self, KraVerdict::UnknownConflict | KraVerdict::UnknownOther)
    }
}

/// One instance of a comparison run.
#[derive(Clone, Debug)]
pub struct ComparisonRecord {
    pub instance_id: String,
    pub n: u32,
    pub m: usize,
    pub formula_seed: u64,
    pub kra_verdict: KraVerdict,
    pub oracle_sat: bool,
    /// UNKNOWN counts as disagreement.
    pub agree: bool,
    /// KRA said UNSAT on a satisfiable instance, or a stored cube failed
    /// `cube_sound`. Expected to be impossible; any occurrence is a bug.
    pub soundness_violation: bool,
    /// The full derivation log replayed under the independent checker.
    pub proof_valid: bool,
    pub fixpoint_iterations: u64,
    pub additions: u64,
    pub additions_bound: u64,
    pub iteration_cap_hit: bool,
    pub rule_firings: BTreeMap<&'static str, u64>,
    pub solve_micros: u128,
    pub oracle_micros: u128,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    /// Inclusive variable-count range.
    pub n_range: (u32, u32),
    /// Clause-to-variable ratio range.
    pub ratio_range: (f64, f64),
    pub count: usize,
    pub solve: SolveConfig,
    /// Emit per-instance timing columns (breaks byte-determinism).
    pub timings: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareSummary {
    pub instances: usize,
    pub sat: usize,
    pub unsat: usize,
    pub unknown: usize,
    pub unknown_conflict: usize,
    pub agreements: usize,
    pub agreement_rate: f64,
    pub unknown_rate: f64,
    pub soundness_violations: usize,
    pub invalid_proofs: usize,
    pub iteration_cap_hits: usize,
    pub rule_firings: BTreeMap<&'static str, u64>,
}

pub struct CompareOutput {
    pub records: Vec<ComparisonRecord>,
    pub summary: CompareSummary,
}

fn run_one(
    instance_id: String,
    n: u32,
    m: usize,
    formula_seed: u64,
    solve_cfg: &SolveConfig,
) -> ComparisonRecord {
    let f = random_formula(n, m, formula_seed).expect("valid generator params");
    let t0 = Instant::now();
    let solved = decide(&f, solve_cfg);
    let solve_micros = t0.elapsed().as_micros();

    let t1 = Instant::now();
    let models = oracle::model_masks(&f, oracle::DEFAULT_BRUTE_FORCE_LIMIT)
        .expect("comparison instances are oracle-feasible");
    let oracle_sat = !models.is_empty();
    let oracle_micros = t1.elapsed().as_micros();

    let kra_verdict = match &solved.verdict {
        Verdict::Sat(_) => KraVerdict::Sat,
        Verdict::Unsat { .. } => KraVerdict::Unsat,
        Verdict::Unknown(UnknownReason::ExtractionConflict) => KraVerdict::UnknownConflict,
        Verdict::Unknown(_) => KraVerdict::UnknownOther,
    };
    let agree = match kra_verdict {
        KraVerdict::Sat => oracle_sat,
        KraVerdict::Unsat => !oracle_sat,
        _ => false,
    };

    // Soundness: every stored cube must block only falsifying assignments.
    let cubes_unsound = solved
        .store
        .rejected_cubes()
        .iter()
        .any(|c| !cube_sound_against(&models, n, c));
    let soundness_violation =
        cubes_unsound || (kra_verdict == KraVerdict::Unsat && oracle_sat);

    let proof_valid = check_derivation(&f, solved.store.log()).valid();

    let (iterations, additions, empty_rule_firings) = match &solved.report {
        Some(r) => {
            let mut firings: BTreeMap<&'static str, u64> = BTreeMap::new();
            for rule in ALL_RULES {
                firings.insert(
                    rule.label(),
                    r.firings_per_rule.get(&rule).copied().unwrap_or(0),
                );
            }
            (
                r.iterations,
                r.total_additions() + solved.store.num_seeds(),
                firings,
            )
        }
        None => (0, 0, BTreeMap::new()),
    };

    ComparisonRecord {
        instance_id,
        n,
        m,
        formula_seed,
        kra_verdict,
        oracle_sat,
        agree,
        soundness_violation,
        proof_valid,
        fixpoint_iterations: iterations,
        additions,
        additions_bound: addition_bound(n),
        iteration_cap_hit: solved.report.is_none(),
        rule_firings: empty_rule_firings,
        solve_micros,
        oracle_micros,
    }
}

/// Runs the full comparison: deterministic instance stream, KRA verdict,
/// oracle verdict, soundness and proof checks. Instances run in parallel;
/// records come back in instance order.
pub fn run_compare(cfg: &RunConfig) -> CompareOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = Vec::with_capacity(cfg.count);
    for i in 0..cfg.count {
        let n = rng.gen_range(cfg.n_range.0..=cfg.n_range.1);
        let ratio = rng.gen_range(cfg.ratio_range.0..=cfg.ratio_range.1);
        let m = ((ratio * n as f64).round() as usize).max(1);
        let formula_seed = rng.gen::<u64>();
        params.push((format!("{}-{}", cfg.seed, i), n, m, formula_seed));
    }
    let records: Vec<ComparisonRecord> = params
        .into_par_iter()
        .map(|(id, n, m, fseed)| run_one(id, n, m, fseed, &cfg.solve))
        .collect();

    let mut rule_firings: BTreeMap<&'static str, u64> = BTreeMap::new();
    for rule in ALL_RULES {
        rule_firings.insert(rule.label(), 0);
    }
    for r in &records {
        for (k, v) in &r.rule_firings {
            *rule_firings.get_mut(k).unwrap() += v;
        }
    }
    let sat = records.iter().filter(|r| r.kra_verdict == KraVerdict::Sat).count();
    let unsat = records.iter().filter(|r| r.kra_verdict == KraVerdict::Unsat).count();
    let unknown = records.iter().filter(|r| r.kra_verdict.is_unknown()).count();
    let unknown_conflict = records
        .iter()
        .filter(|r| r.kra_verdict == KraVerdict::UnknownConflict)
        .count();
    let agreements = records.iter().filter(|r| r.agree).count();
    let summary = CompareSummary {
        instances: records.len(),
        sat,
        unsat,
        unknown,
        unknown_conflict,
        agreements,
        agreement_rate: agreements as f64 / records.len().max(1) as f64,
        unknown_rate: unknown as f64 / records.len().max(1) as f64,
        soundness_violations: records.iter().filter(|r| r.soundness_violation).count(),
        invalid_proofs: records.iter().filter(|r| !r.proof_valid).count(),
        iteration_cap_hits: records.iter().filter(|r| r.iteration_cap_hit).count(),
        rule_firings,
    };
    CompareOutput { records, summary }
}

/// CSV rendering. Schema v1; the two timing columns appear only when
/// requested, keeping default output byte-deterministic.
pub fn records_to_csv(records: &[ComparisonRecord], timings: bool) -> String {
    let mut out = String::from("# kra-sat-compare-csv v1\n");
    out.push_str(
        "instance_id,n,m,formula_seed,kra_verdict,oracle_verdict,agree,\
         soundness_violation,proof_valid,fixpoint_iterations,additions,\
         additions_bound,iteration_cap_hit",
    );
    for rule in ALL_RULES {
        out.push_str(",firings_");
        out.push_str(rule.label());
    }
    if timings {
        out.push_str(",solve_micros,oracle_micros");
    }
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.instance_id,
            r.n,
            r.m,
            r.formula_seed,
            r.kra_verdict.label(),
            if r.oracle_sat { "SAT" } else { "UNSAT" },
            r.agree,
            r.soundness_violation,
            r.proof_valid,
            r.fixpoint_iterations,
            r.additions,
            r.additions_bound,
            r.iteration_cap_hit,
        ));
        for rule in ALL_RULES {
            out.push_str(&format!(",{}", r.rule_firings.get(rule.label()).unwrap_or(&0)));
        }
        if timings {
            out.push_str(&format!(",{},{}", r.solve_micros, r.oracle_micros));
        }
        out.push('\n');
    }
    out
}

pub fn summary_to_json(summary: &CompareSummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("serializable");
    s.push('\n');
    s
}

/// Shrink predicates exposed by the CLI.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ShrinkPredicate {
    /// KRA returns any UNKNOWN verdict.
    Unknown,
    /// KRA verdict disagrees with the oracle (UNKNOWN counts as disagree).
    Disagree,
}

pub fn predicate_holds(pred: ShrinkPredicate, f: &Formula, cfg: &SolveConfig) -> bool {
    let solved = decide(f, cfg);
    match pred {
        ShrinkPredicate::Unknown => matches!(solved.verdict, Verdict::Unknown(_)),
        ShrinkPredicate::Disagree => {
            let Ok(oracle_sat) = oracle::brute_force(f, oracle::DEFAULT_BRUTE_FORCE_LIMIT)
                .map(|r| r.satisfiable)
            else {
                return false;
            };
            match solved.verdict {
                Verdict::Sat(_) => !oracle_sat,
                Verdict::Unsat { .. } => oracle_sat,
                Verdict::Unknown(_) => true,
            }
        }
    }
}

/// Greedy delta debugging: drop clauses one at a time while the predicate
/// holds, to a 1-minimal instance, then drop unused variables and
/// renumber densely.
pub fn shrink(
    f: &Formula,
    pred: ShrinkPredicate,
    cfg: &SolveConfig,
) -> Result<Formula, HarnessError> {
    if !predicate_holds(pred, f, cfg) {
        return Err(HarnessError::PredicateNotSatisfied);
    }
    let mut current = f.clone();
    loop {
        let mut reduced = false;
        for i in 0..current.num_clauses() {
            let mut clauses = current.clauses().to_vec();
            clauses.remove(i);
            let candidate = Formula::new(current.num_vars(), clauses)?;
            if predicate_holds(pred, &candidate, cfg) {
                current = candidate;
                reduced = true;
                break;
            }
        }
        if !reduced {
            break;
        }
    }
    let renumbered = renumber_dense(&current)?;
    if predicate_holds(pred, &renumbered, cfg) {
        Ok(renumbered)
    } else {
        Ok(current)
    }
}

fn renumber_dense(f: &Formula) -> Result<Formula, CnfError> {
    let mut used: Vec<u32> = f
        .clauses()
        .iter()
        .flat_map(|c| c.literals().iter().map(|l| l.var()))
        .collect();
    used.sort_unstable();
    used.dedup();
    let map: BTreeMap<u32, u32> = used
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u32 + 1))
        .collect();
    let mut clauses = Vec::with_capacity(f.num_clauses());
    for c in f.clauses() {
        let lits: Vec<Literal> = c
            .literals()
            .iter()
            .map(|l| Literal::new(map[&l.var()], l.is_positive()))
            .collect();
        clauses.push(normalize_clause(&lits)?.expect("renaming preserves clauses"));
    }
    Formula::new(used.len() as u32, clauses)
}
