//! Fisher-market algorithm for EQ1 + PO allocations under strictly positive valuations.

mod powers;
mod rounding;
mod solver;
mod state;
mod trace;

pub use rounding::{default_eps, eps_round, RoundedInstance};
pub use solver::{default_max_steps, run_market, solve_eq1_po, SolveOptions, SolveOutcome};
pub use state::{MarketState, PathViolator, ReachabilityLevels};
pub use trace::{audit_trace, replay, SolveTrace, TerminationReason, TraceAudit, TraceEvent};
