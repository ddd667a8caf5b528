//! Reference evaluators used to cross-check the engines. They share only
//! the structure and formula types with the rest of the crate.
//!
//! [`oracle_eval`] and [`oracle_mod_check`] follow the semantic clauses
//! literally, quantifying over tracks up to a length bound.
//! [`exact_eval`] and [`exact_mod_check`] compile the formula into finite
//! automata over the state alphabet and need no bound.

mod automaton;
mod bounded;

pub use automaton::{exact_eval, exact_mod_check, Automata, Dfa};
pub use bounded::{
    bound_is_exact, length_bound, oracle_eval, oracle_mod_check, OracleConfig, OracleError, OracleVerdict,
    EXPANSION_LIMIT,
};
