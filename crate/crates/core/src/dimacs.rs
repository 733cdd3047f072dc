//! DIMACS CNF reading and writing.

use thiserror::Error;

use crate::cnf::{normalize_clause, Clause, CnfError, Formula, Literal};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("literal {var} out of range (n = {n})")]
    VarOutOfRange { var: u32, n: u32 },
    #[error("empty clause in input")]
    EmptyClause,
    #[error("clause wider than 3 distinct variables")]
    WidthOutOfRange,
}

/// Result of a parse: the formula plus non-fatal diagnostics.
#[derive(Debug)]
pub struct ParsedCnf {
    pub formula: Formula,
    /// Tautological clauses dropped during normalization.
    pub tautologies_dropped: usize,
    /// Header clause count disagreed with the actual count (actual wins).
    pub clause_count_mismatch: bool,
}

/// Parses standard DIMACS CNF: 'c' comment lines, a "p cnf n m" header,
/// then whitespace-separated literals with 0 terminating each clause
/// (clauses may span lines).
pub fn parse_dimacs(text: &str) -> Result<ParsedCnf, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut tokens: Vec<i32> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::Syntax("duplicate header".into()));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(DimacsError::Syntax(format!("bad header line: {line}")));
            }
            let n = parts[2]
                .parse::<u32>()
                .map_err(|_| DimacsError::Syntax(format!("bad variable count: {}", parts[2])))?;
            let m = parts[3]
                .parse::<usize>()
                .map_err(|_| DimacsError::Syntax(format!("bad clause count: {}", parts[3])))?;
            header = Some((n, m));
            continue;
        }
        if header.is_none() {
            return Err(DimacsError::Syntax(format!(
                "clause data before header: {line}"
            )));
        }
        for tok in line.split_whitespace() {
            let v = tok
                .parse::<i32>()
                .map_err(|_| DimacsError::Syntax(format!("bad token: {tok}")))?;
            tokens.push(v);
        }
    }
    let (n, declared_m) = header.ok_or_else(|| DimacsError::Syntax("missing header".into()))?;

    let mut clauses: Vec<Clause> = Vec::new();
    let mut tautologies_dropped = 0usize;
    let mut current: Vec<Literal> = Vec::new();
    for &code in &tokens {
        if code == 0 {
            match normalize_clause(&current) {
                Ok(Some(c)) => clauses.push(c),
                Ok(None) => tautologies_dropped += 1,
                Err(CnfError::EmptyClause) => return Err(DimacsError::EmptyClause),
                Err(CnfError::WidthOutOfRange(_)) => return Err(DimacsError::WidthOutOfRange),
                Err(e) => return Err(DimacsError::Syntax(e.to_string())),
            }
            current.clear();
        } else {
            let var = code.unsigned_abs();
            if var > n {
                return Err(DimacsError::VarOutOfRange { var, n });
            }
            current.push(Literal::from_dimacs(code));
        }
    }
    if !current.is_empty() {
        return Err(DimacsError::Syntax("unterminated final clause".into()));
    }

    let parsed = clauses.len() + tautologies_dropped;
    let formula =
        Formula::new(n, clauses).map_err(|e| DimacsError::Syntax(e.to_string()))?;
    Ok(ParsedCnf {
        formula,
        tautologies_dropped,
        clause_count_mismatch: parsed != declared_m,
    })
}

/// Writes a formula so that `parse_dimacs(write_dimacs(f))` is the identity.
pub fn write_dimacs(f: &Formula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars(), f.num_clauses());
    for c in f.clauses() {
        for l in c.literals() {
            out.push_str(&l.to_dimacs().to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}
