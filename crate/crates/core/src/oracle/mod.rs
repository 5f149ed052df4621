//! Exhaustive and linear-programming oracles for small instances.

mod enumerate;
mod fpo;
pub mod lp;
mod search;

pub use enumerate::{enumerate_allocations, enumerate_allocations_capped, Allocations, DEFAULT_CAP};
pub use fpo::{fractional_dominator, fractional_maximin, is_fpo_lp, is_fpo_values};
pub use search::{
    exists_combo_bf, is_po_bf, leximin_bf, maximin_bf, mnw_bf, BruteForce, ComboQuery, Efficiency, Envy, Equity,
    OracleResult, ParetoFrontier, PoVerdict,
};
