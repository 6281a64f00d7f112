//! The constraint tableau calculus: rules, search drivers, countermodel
//! extraction and realisation checking.

mod extract;
mod rules;
mod search;

pub use extract::{check_realisation, extract_countermodel, to_dot, Realisation, RealisationViolation};
pub use rules::{applicable, apply, apply_at, conclusions, is_complete, RuleInstance, RuleKind};
pub use search::{prove, Countermodel, ProofReport, ProveConfig, ProveError, Stats, Strategy, Verdict, DEFAULT_BUDGET};
