use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use kra_sat::cnf::{evaluate, Formula};
use kra_sat::decision::{decide, SolveConfig, UnknownReason, Verdict};
use kra_sat::dimacs::{parse_dimacs, write_dimacs};
use kra_sat::engine::{format_log, EngineConfig, ALL_RULES, MAX_ENGINE_VARS};
use kra_sat::harness::{
    gen_files, predicate_holds, records_to_csv, run_compare, shrink, summary_to_json,
    KraVerdict, RunConfig, ShrinkPredicate,
};
use kra_sat::oracle;

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_UNKNOWN: u8 = 0;
const EXIT_ERROR: u8 = 1;

#[derive(Parser)]
#[command(name = "kra-sat", about = "Rejection-based 3-SAT solver and test harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PredicateArg {
    Unknown,
    Disagree,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a DIMACS CNF file (exit code 10 SAT, 20 UNSAT, 0 UNKNOWN).
    Solve {
        file: PathBuf,
        /// Write the derivation-log proof slice (UNSAT) or full log here.
        #[arg(long)]
        proof: Option<PathBuf>,
        /// Write a JSON fixpoint report here.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(3..=4))]
        max_width: u8,
        /// Use all C(n,3) triples instead of clause triples.
        #[arg(long)]
        all_triples: bool,
        /// Cross-check the verdict by brute force (n <= 20 only).
        #[arg(long)]
        verify_oracle: bool,
        /// Include wall-clock time in --stats output.
        #[arg(long)]
        timings: bool,
    },
    /// Generate a deterministic family of random 3-CNF files.
    Gen {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compare the solver against the brute-force oracle on random instances.
    Compare {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        n_min: u32,
        #[arg(long, default_value_t = 10)]
        n_max: u32,
        #[arg(long, default_value_t = 3.0)]
        ratio_min: f64,
        #[arg(long, default_value_t = 6.0)]
        ratio_max: f64,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(3..=4))]
        max_width: u8,
        #[arg(long)]
        all_triples: bool,
        /// Per-instance CSV output path.
        #[arg(long)]
        csv: PathBuf,
        /// JSON summary output path.
        #[arg(long)]
        summary: PathBuf,
        /// Archive every UNKNOWN instance (original + shrunk witness) here.
        #[arg(long)]
        archive_dir: Option<PathBuf>,
        /// Include timing columns (breaks byte-determinism).
        #[arg(long)]
        timings: bool,
    },
    /// Shrink an instance to a 1-minimal witness of a predicate.
    Shrink {
        file: PathBuf,
        #[arg(long, value_enum)]
        predicate: PredicateArg,
        /// Output path for the shrunk instance (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct StatsJson {
    iterations: u64,
    additions_per_level: [u64; 4],
    firings_per_rule: std::collections::BTreeMap<&'static str, u64>,
    reached_fixpoint: bool,
    empty_derived: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_micros: Option<u128>,
}

fn solve_config(max_width: u8, all_triples: bool) -> SolveConfig {
    SolveConfig {
        engine: EngineConfig {
            max_width: max_width as usize,
            ..EngineConfig::default()
        },
        all_triples,
    }
}

fn read_formula(path: &PathBuf) -> Result<Formula, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let parsed = parse_dimacs(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if parsed.tautologies_dropped > 0 {
        eprintln!(
            "c warning: dropped {} tautological clause(s)",
            parsed.tautologies_dropped
        );
    }
    if parsed.clause_count_mismatch {
        eprintln!("c warning: header clause count disagrees with actual count");
    }
    if parsed.formula.num_vars() > MAX_ENGINE_VARS {
        return Err(format!(
            "{}: instances with more than {MAX_ENGINE_VARS} variables are not supported",
            path.display()
        ));
    }
    Ok(parsed.formula)
}

fn cmd_solve(
    file: PathBuf,
    proof: Option<PathBuf>,
    stats: Option<PathBuf>,
    max_width: u8,
    all_triples: bool,
    verify_oracle: bool,
    timings: bool,
) -> Result<u8, String> {
    let f = read_formula(&file)?;
    let cfg = solve_config(max_width, all_triples);
    let solved = decide(&f, &cfg);

    if let Some(path) = &stats {
        if let Some(r) = &solved.report {
            let mut firings = std::collections::BTreeMap::new();
            for rule in ALL_RULES {
                firings.insert(rule.label(), r.firings_per_rule.get(&rule).copied().unwrap_or(0));
            }
            let json = StatsJson {
                iterations: r.iterations,
                additions_per_level: r.additions_per_level,
                firings_per_rule: firings,
                reached_fixpoint: r.reached_fixpoint,
                empty_derived: r.empty_derived,
                wall_time_micros: timings.then(|| r.wall_time.as_micros()),
            };
            let body = serde_json::to_string_pretty(&json).expect("serializable");
            fs::write(path, body + "\n").map_err(|e| e.to_string())?;
        }
    }

    let exit = match &solved.verdict {
        Verdict::Sat(a) => {
            println!("s SATISFIABLE");
            let mut line = String::from("v");
            for v in 1..=f.num_vars() {
                line.push_str(&format!(" {}", if a.value(v) { v as i64 } else { -(v as i64) }));
            }
            line.push_str(" 0");
            println!("{line}");
            if let Some(path) = &proof {
                fs::write(path, format_log(solved.store.log())).map_err(|e| e.to_string())?;
            }
            EXIT_SAT
        }
        Verdict::Unsat { proof: slice, .. } => {
            println!("s UNSATISFIABLE");
            if let Some(path) = &proof {
                fs::write(path, format_log(slice)).map_err(|e| e.to_string())?;
            }
            EXIT_UNSAT
        }
        Verdict::Unknown(reason) => {
            println!("s UNKNOWN");
            let tag = match reason {
                UnknownReason::ExtractionConflict => "extraction-conflict",
                UnknownReason::VerificationFailed => "verification-failed",
                UnknownReason::IterationCap => "iteration-cap",
            };
            println!("c reason: {tag}");
            if let Some(path) = &proof {
                fs::write(path, format_log(solved.store.log())).map_err(|e| e.to_string())?;
            }
            EXIT_UNKNOWN
        }
    };

    if verify_oracle {
        let r = oracle::brute_force(&f, oracle::DEFAULT_BRUTE_FORCE_LIMIT)
            .map_err(|e| e.to_string())?;
        let consistent = match &solved.verdict {
            Verdict::Sat(a) => r.satisfiable && evaluate(&f, a),
            Verdict::Unsat { .. } => !r.satisfiable,
            Verdict::Unknown(_) => true,
        };
        if consistent {
            println!(
                "c oracle: {} (agrees)",
                if r.satisfiable { "SAT" } else { "UNSAT" }
            );
        } else {
            return Err(format!(
                "oracle disagrees: brute force says {}",
                if r.satisfiable { "SAT" } else { "UNSAT" }
            ));
        }
    }
    Ok(exit)
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    seed: u64,
    count: usize,
    n_range: (u32, u32),
    ratio_range: (f64, f64),
    max_width: u8,
    all_triples: bool,
    csv: PathBuf,
    summary: PathBuf,
    archive_dir: Option<PathBuf>,
    timings: bool,
) -> Result<u8, String> {
    let cfg = RunConfig {
        seed,
        n_range,
        ratio_range,
        count,
        solve: solve_config(max_width, all_triples),
        timings,
    };
    let out = run_compare(&cfg);
    fs::write(&csv, records_to_csv(&out.records, timings)).map_err(|e| e.to_string())?;
    fs::write(&summary, summary_to_json(&out.summary)).map_err(|e| e.to_string())?;

    if let Some(dir) = archive_dir {
        fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        for r in out.records.iter().filter(|r| r.kra_verdict.is_unknown()) {
            let f = kra_sat::cnf::random_formula(r.n, r.m, r.formula_seed)
                .map_err(|e| e.to_string())?;
            fs::write(dir.join(format!("{}.cnf", r.instance_id)), write_dimacs(&f))
                .map_err(|e| e.to_string())?;
            let shrunk = shrink(&f, ShrinkPredicate::Unknown, &cfg.solve)
                .map_err(|e| e.to_string())?;
            fs::write(
                dir.join(format!("{}.shrunk.cnf", r.instance_id)),
                write_dimacs(&shrunk),
            )
            .map_err(|e| e.to_string())?;
        }
    }

    println!(
        "c compared {} instances: {} agree, {} unknown, {} soundness violations",
        out.summary.instances,
        out.summary.agreements,
        out.summary.unknown,
        out.summary.soundness_violations
    );
    if out.records.iter().any(|r| r.kra_verdict == KraVerdict::Unsat && r.oracle_sat) {
        return Err("soundness violation: UNSAT verdict on satisfiable instance".into());
    }
    Ok(0)
}

fn cmd_shrink(file: PathBuf, predicate: PredicateArg, out: Option<PathBuf>) -> Result<u8, String> {
    let f = read_formula(&file)?;
    let pred = match predicate {
        PredicateArg::Unknown => ShrinkPredicate::Unknown,
        PredicateArg::Disagree => ShrinkPredicate::Disagree,
    };
    let cfg = SolveConfig::default();
    if !predicate_holds(pred, &f, &cfg) {
        return Err("predicate does not hold on the input instance".into());
    }
    let shrunk = shrink(&f, pred, &cfg).map_err(|e| e.to_string())?;
    let text = write_dimacs(&shrunk);
    match out {
        Some(path) => fs::write(path, text).map_err(|e| e.to_string())?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            file,
            proof,
            stats,
            max_width,
            all_triples,
            verify_oracle,
            timings,
        } => cmd_solve(file, proof, stats, max_width, all_triples, verify_oracle, timings),
        Command::Gen { n, m, count, seed, out_dir } => {
            gen_files(n, m, count, seed, &out_dir)
                .map(|paths| {
                    for p in &paths {
                        println!("{}", p.display());
                    }
                    0
                })
                .map_err(|e| e.to_string())
        }
        Command::Compare {
            seed,
            count,
            n_min,
            n_max,
            ratio_min,
            ratio_max,
            max_width,
            all_triples,
            csv,
            summary,
            archive_dir,
            timings,
        } => cmd_compare(
            seed,
            count,
            (n_min, n_max),
            (ratio_min, ratio_max),
            max_width,
            all_triples,
            csv,
            summary,
            archive_dir,
            timings,
        ),
        Command::Shrink { file, predicate, out } => cmd_shrink(file, predicate, out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
