//! Analysis of quantitative automata over infinite words: exact evaluation on
//! lasso words, top values, safety closures, constant-function, safety and
//! liveness checks, and safety-liveness decomposition.

pub mod automaton;
pub mod closure;
pub mod decide;
pub mod decompose;
pub mod error;
pub mod eval;
pub mod format;
pub mod gadget;
pub mod gen;
pub mod graph;
pub mod limitedness;
pub mod omega;
pub mod rational;

pub use automaton::{Automaton, LassoWord, Letter, NamedLasso, StateId, Transition, ValueFunction};
pub use closure::{determinize_inf, safety_closure_inf, safety_closure_val};
pub use decide::{is_constant, is_live, is_safe, Question, Verdict, Witness};
pub use decompose::{decompose, determinize_liminf, determinize_sup, Decomposition};
pub use error::{Error, Result};
pub use eval::{evaluate_lasso, state_top_values, top_value, Evaluator};
pub use format::{parse_automaton, parse_distance_automaton, parse_nfa, serialize_automaton};
pub use limitedness::{is_limited, DistanceAutomaton};
pub use omega::{Nfa, OmegaAutomaton};
pub use rational::Rational;
