//! A verifiable implementation of a rejection-based 3-SAT procedure:
//! clause complements seed rejected conjunctive cubes, ten width-bounded
//! rejection rules saturate the store, COVA-set exhaustion decides UNSAT
//! and survivor unions propose (then verify) SAT assignments. A desk-scale
//! oracle and an independent proof checker keep every answer honest.

pub mod cnf;
pub mod decision;
pub mod dimacs;
pub mod engine;
pub mod harness;
pub mod oracle;
