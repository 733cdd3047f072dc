//! CNF data model: literals, clauses, formulas, conjunctive cubes,
//! complement/COVA constructions, assignment evaluation and random instances.

use std::cmp::Ordering;
use std::fmt;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("complementary pair on variable {0}")]
    ComplementaryPair(u32),
    #[error("width {0} out of range")]
    WidthOutOfRange(usize),
    #[error("empty clause")]
    EmptyClause,
    #[error("variable {var} out of range (n = {n})")]
    VarOutOfRange { var: u32, n: u32 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// A signed variable. `var >= 1`; positive polarity means "variable is true".
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal(i32);

impl Literal {
    pub fn new(var: u32, positive: bool) -> Literal {
        assert!(var >= 1, "variable index must be >= 1");
        Literal(if positive { var as i32 } else { -(var as i32) })
    }

    /// From a nonzero DIMACS code (sign = polarity).
    pub fn from_dimacs(code: i32) -> Literal {
        assert!(code != 0, "literal code must be nonzero");
        Literal(code)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn negated(self) -> Literal {
        Literal(-self.0)
    }

    /// Sort key: variable ascending, positive polarity before negative.
    fn key(self) -> (u32, u8) {
        (self.var(), if self.is_positive() { 0 } else { 1 })
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Literal) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Literal) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Sorts and dedups literals; detects complementary pairs.
/// Shared by clause and cube canonicalization.
fn canonical_literals(raw: &[Literal]) -> Result<Vec<Literal>, CnfError> {
    let mut lits: Vec<Literal> = raw.to_vec();
    lits.sort();
    lits.dedup();
    for pair in lits.windows(2) {
        if pair[0].var() == pair[1].var() {
            return Err(CnfError::ComplementaryPair(pair[0].var()));
        }
    }
    Ok(lits)
}

/// A conjunction of 1..=4 literals over distinct variables, kept in
/// canonical sorted order. The unit of rejection.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube(Vec<Literal>);

impl Cube {
    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.0.contains(&lit)
    }

    /// True if every literal of `other` occurs in `self`.
    pub fn is_superset_of(&self, other: &Cube) -> bool {
        other.0.iter().all(|l| self.0.contains(l))
    }

    /// All width-`k` sub-conjunctions (the member-class view).
    pub fn sub_cubes(&self, k: usize) -> Vec<Cube> {
        assert!(k >= 1 && k < self.width(), "k must be 1..width");
        let mut out = Vec::new();
        let w = self.width();
        // w <= 4, so a bitmask enumeration is plenty.
        for mask in 1u32..(1 << w) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let lits: Vec<Literal> = (0..w)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| self.0[i])
                .collect();
            out.push(Cube(lits));
        }
        out.sort();
        out
    }
}

impl fmt::Debug for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// Canonical cube constructor: sort, dedup, reject contradictions and
/// widths outside 1..=4.
pub fn canonicalize_cube(raw: &[Literal]) -> Result<Cube, CnfError> {
    let lits = canonical_literals(raw)?;
    if lits.is_empty() || lits.len() > 4 {
        return Err(CnfError::WidthOutOfRange(lits.len()));
    }
    Ok(Cube(lits))
}

/// Cube from DIMACS codes; panics on malformed input (test convenience).
pub fn cube(codes: &[i32]) -> Cube {
    let lits: Vec<Literal> = codes.iter().map(|&c| Literal::from_dimacs(c)).collect();
    canonicalize_cube(&lits).expect("valid cube")
}

/// A disjunction of 1..=3 literals over distinct variables, sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause(Vec<Literal>);

impl Clause {
    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Dedup and sort a raw disjunction. `Ok(None)` marks a tautology
/// (complementary pair), which the formula drops.
pub fn normalize_clause(raw: &[Literal]) -> Result<Option<Clause>, CnfError> {
    if raw.is_empty() {
        return Err(CnfError::EmptyClause);
    }
    match canonical_literals(raw) {
        Ok(lits) => {
            if lits.len() > 3 {
                return Err(CnfError::WidthOutOfRange(lits.len()));
            }
            Ok(Some(Clause(lits)))
        }
        Err(CnfError::ComplementaryPair(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Clause from DIMACS codes; panics on tautologies or malformed input.
pub fn clause(codes: &[i32]) -> Clause {
    let lits: Vec<Literal> = codes.iter().map(|&c| Literal::from_dimacs(c)).collect();
    normalize_clause(&lits).expect("valid clause").expect("not a tautology")
}

/// A CNF instance: `n` variables and a duplicate-free clause list.
#[derive(Clone, PartialEq, Eq)]
pub struct Formula {
    n: u32,
    clauses: Vec<Clause>,
}

impl Formula {
    /// Builds a formula from normalized clauses: checks variable bounds
    /// and drops duplicate clauses, preserving first-occurrence order.
    pub fn new(n: u32, clauses: Vec<Clause>) -> Result<Formula, CnfError> {
        let mut seen = std::collections::HashSet::new();
        let mut kept = Vec::with_capacity(clauses.len());
        for c in clauses {
            for l in c.literals() {
                if l.var() > n {
                    return Err(CnfError::VarOutOfRange { var: l.var(), n });
                }
            }
            if seen.insert(c.clone()) {
                kept.push(c);
            }
        }
        Ok(Formula { n, clauses: kept })
    }

    pub fn num_vars(&self) -> u32 {
        self.n
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Variable triples of width-3 clauses, in first-occurrence order.
    pub fn clause_triples(&self) -> Vec<VarTriple> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for c in &self.clauses {
            if c.width() == 3 {
                let t = VarTriple::new(
                    c.literals()[0].var(),
                    c.literals()[1].var(),
                    c.literals()[2].var(),
                )
                .expect("clause vars are distinct and sorted");
                if seen.insert(t) {
                    out.push(t);
                }
            }
        }
        out
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula(n={}, m={}, {:?})", self.n, self.clauses.len(), self.clauses)
    }
}

/// A total truth assignment for variables 1..=n.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Assignment {
        Assignment { values }
    }

    pub fn all_false(n: u32) -> Assignment {
        Assignment { values: vec![false; n as usize] }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn value(&self, var: u32) -> bool {
        self.values[(var - 1) as usize]
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.values[(var - 1) as usize] = value;
    }

    pub fn satisfies_literal(&self, lit: Literal) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }
}

/// Three distinct variables, strictly ascending: the index set of one COVA set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct VarTriple([u32; 3]);

impl VarTriple {
    pub fn new(a: u32, b: u32, c: u32) -> Result<VarTriple, CnfError> {
        let mut v = [a, b, c];
        v.sort_unstable();
        if v[0] < 1 || v[0] == v[1] || v[1] == v[2] {
            return Err(CnfError::InvalidParams(format!(
                "triple ({a},{b},{c}) is not three distinct variables"
            )));
        }
        Ok(VarTriple(v))
    }

    pub fn vars(&self) -> [u32; 3] {
        self.0
    }

    pub fn contains(&self, var: u32) -> bool {
        self.0.contains(&var)
    }
}

/// The complement of a clause: every literal negated, as a cube.
/// This is the unique sign pattern on those variables that falsifies the clause.
pub fn complement_cube(c: &Clause) -> Cube {
    let lits: Vec<Literal> = c.literals().iter().map(|l| l.negated()).collect();
    canonicalize_cube(&lits).expect("negation preserves cube invariants")
}

/// The 8 width-3 cubes over a triple, all sign patterns. Signs are
/// enumerated as a 3-bit counter with positive = 0, so the all-positive
/// cube comes first and the all-negative cube last.
pub fn cova_set(t: VarTriple) -> Vec<Cube> {
    let [a, b, c] = t.vars();
    (0u8..8)
        .map(|bits| {
            Cube(vec![
                Literal::new(a, bits & 0b100 == 0),
                Literal::new(b, bits & 0b010 == 0),
                Literal::new(c, bits & 0b001 == 0),
            ])
        })
        .collect()
}

/// True iff every clause has at least one satisfied literal.
pub fn evaluate(f: &Formula, a: &Assignment) -> bool {
    f.clauses
        .iter()
        .all(|c| c.literals().iter().any(|&l| a.satisfies_literal(l)))
}

/// Deterministic random 3-CNF: `m` distinct clauses, each over 3 distinct
/// uniformly chosen variables with uniform signs.
pub fn random_formula(n: u32, m: usize, seed: u64) -> Result<Formula, CnfError> {
    if n < 3 {
        return Err(CnfError::InvalidParams(format!("n = {n} < 3")));
    }
    let max_clauses = 8 * (n as u64) * (n as u64 - 1) * (n as u64 - 2) / 6;
    if m as u64 > max_clauses {
        return Err(CnfError::InvalidParams(format!(
            "m = {m} exceeds the {max_clauses} distinct 3-clauses over {n} variables"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut clauses = Vec::with_capacity(m);
    while clauses.len() < m {
        let mut vars = [0u32; 3];
        vars[0] = rng.gen_range(1..=n);
        loop {
            vars[1] = rng.gen_range(1..=n);
            if vars[1] != vars[0] {
                break;
            }
        }
        loop {
            vars[2] = rng.gen_range(1..=n);
            if vars[2] != vars[0] && vars[2] != vars[1] {
                break;
            }
        }
        let lits: Vec<Literal> = vars.iter().map(|&v| Literal::new(v, rng.gen())).collect();
        let c = normalize_clause(&lits)
            .expect("3 distinct vars")
            .expect("distinct vars cannot form a tautology");
        if seen.insert(c.clone()) {
            clauses.push(c);
        }
    }
    Formula::new(n, clauses)
}

/// The instance used as the running example throughout the test suite:
/// (x1 v x2 v x3)(x1 v x2 v ~x3)(x1 v x2 v x4)(x1 v ~x4 v ~x5)(x2 v ~x3 v x5).
pub fn example_formula() -> Formula {
    Formula::new(
        5,
        vec![
            clause(&[1, 2, 3]),
            clause(&[1, 2, -3]),
            clause(&[1, 2, 4]),
            clause(&[1, -4, -5]),
            clause(&[2, -3, 5]),
        ],
    )
    .expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(code: i32) -> Literal {
        Literal::from_dimacs(code)
    }

    #[test]
    fn canonicalize_sorts_and_dedups() {
        let c = canonicalize_cube(&[lit(2), lit(-3), lit(1)]).unwrap();
        assert_eq!(c, cube(&[1, 2, -3]));
        let c = canonicalize_cube(&[lit(1), lit(1), lit(-2)]).unwrap();
        assert_eq!(c, cube(&[1, -2]));
    }

    #[test]
    fn canonicalize_rejects_contradiction_and_bad_width() {
        assert_eq!(
            canonicalize_cube(&[lit(1), lit(-1)]),
            Err(CnfError::ComplementaryPair(1))
        );
        assert_eq!(canonicalize_cube(&[]), Err(CnfError::WidthOutOfRange(0)));
        assert_eq!(
            canonicalize_cube(&[lit(1), lit(2), lit(3), lit(4), lit(5)]),
            Err(CnfError::WidthOutOfRange(5))
        );
    }

    #[test]
    fn normalize_clause_cases() {
        assert_eq!(
            normalize_clause(&[lit(1), lit(2), lit(-3)]).unwrap(),
            Some(clause(&[1, 2, -3]))
        );
        // tautology dropped
        assert_eq!(normalize_clause(&[lit(1), lit(-1), lit(2)]).unwrap(), None);
        // idempotent disjunction
        assert_eq!(
            normalize_clause(&[lit(1), lit(1), lit(1)]).unwrap(),
            Some(clause(&[1]))
        );
        assert_eq!(normalize_clause(&[]), Err(CnfError::EmptyClause));
        assert_eq!(
            normalize_clause(&[lit(1), lit(2), lit(3), lit(4)]),
            Err(CnfError::WidthOutOfRange(4))
        );
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement_cube(&clause(&[1, 2, -3])), cube(&[-1, -2, 3]));
        assert_eq!(complement_cube(&clause(&[1])), cube(&[-1]));
        assert_eq!(complement_cube(&clause(&[1, 2, 3])), cube(&[-1, -2, -3]));
    }

    #[test]
    fn complement_negation_recovers_clause_literals() {
        let c = clause(&[1, -4, -5]);
        let back: Vec<Literal> = complement_cube(&c)
            .literals()
            .iter()
            .map(|l| l.negated())
            .collect();
        assert_eq!(back, c.literals());
    }

    #[test]
    fn cova_set_enumeration_order_is_frozen() {
        let t = VarTriple::new(1, 2, 3).unwrap();
        let expected = vec![
            cube(&[1, 2, 3]),
            cube(&[1, 2, -3]),
            cube(&[1, -2, 3]),
            cube(&[1, -2, -3]),
            cube(&[-1, 2, 3]),
            cube(&[-1, 2, -3]),
            cube(&[-1, -2, 3]),
            cube(&[-1, -2, -3]),
        ];
        assert_eq!(cova_set(t), expected);
    }

    #[test]
    fn cova_contains_clause_complement() {
        let c = clause(&[1, 2, -3]);
        let comp = complement_cube(&c);
        let set = cova_set(VarTriple::new(1, 2, 3).unwrap());
        assert_eq!(set.iter().filter(|&x| *x == comp).count(), 1);
        assert_eq!(comp, cube(&[-1, -2, 3]));
        // all 8 distinct
        let mut uniq = set.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 8);
    }

    #[test]
    fn sub_cube_counts() {
        let c3 = cube(&[1, 2, 3]);
        assert_eq!(
            c3.sub_cubes(2),
            vec![cube(&[1, 2]), cube(&[1, 3]), cube(&[2, 3])]
        );
        let c4 = cube(&[1, 2, 3, -4]);
        assert_eq!(c4.sub_cubes(3).len(), 4);
        assert_eq!(cube(&[1, -2]).sub_cubes(1), vec![cube(&[1]), cube(&[-2])]);
    }

    #[test]
    fn evaluate_matches_truth_table_semantics() {
        let f = example_formula();
        let mut a = Assignment::all_false(5);
        a.set(1, true);
        assert!(evaluate(&f, &a));

        let unit = Formula::new(1, vec![clause(&[1])]).unwrap();
        assert!(!evaluate(&unit, &Assignment::all_false(1)));

        let empty = Formula::new(3, vec![]).unwrap();
        assert!(evaluate(&empty, &Assignment::all_false(3)));
    }

    // Exhaustive agreement with direct semantics for every formula shape
    // would be circular; instead check a hand-built truth table for n <= 4.
    #[test]
    fn evaluate_exhaustive_small() {
        let f = Formula::new(
            4,
            vec![clause(&[1, 2, 3]), clause(&[-1, -2]), clause(&[4])],
        )
        .unwrap();
        for bits in 0u32..16 {
            let a = Assignment::new((0..4).map(|i| bits & (1 << i) != 0).collect());
            let direct = (a.value(1) || a.value(2) || a.value(3))
                && (!a.value(1) || !a.value(2))
                && a.value(4);
            assert_eq!(evaluate(&f, &a), direct);
        }
    }

    #[test]
    fn random_formula_deterministic_and_wellformed() {
        let a = random_formula(5, 5, 1).unwrap();
        let b = random_formula(5, 5, 1).unwrap();
        assert_eq!(a, b);
        let f = random_formula(10, 43, 7).unwrap();
        assert_eq!(f.num_clauses(), 43);
        for c in f.clauses() {
            assert_eq!(c.width(), 3);
            let vars: std::collections::HashSet<u32> =
                c.literals().iter().map(|l| l.var()).collect();
            assert_eq!(vars.len(), 3);
        }
        assert!(random_formula(2, 1, 0).is_err());
    }

    #[test]
    fn formula_dedups_clauses() {
        let f = Formula::new(3, vec![clause(&[1, 2, 3]), clause(&[1, 2, 3])]).unwrap();
        assert_eq!(f.num_clauses(), 1);
        assert!(Formula::new(2, vec![clause(&[1, 3])]).is_err());
    }

    #[test]
    fn clause_triples_first_occurrence_order() {
        let f = example_formula();
        let t = |a, b, c| VarTriple::new(a, b, c).unwrap();
        assert_eq!(
            f.clause_triples(),
            vec![t(1, 2, 3), t(1, 2, 4), t(1, 4, 5), t(2, 3, 5)]
        );
    }
}
