use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::market::rounding::{default_eps, eps_round, RoundedInstance};
use crate::market::state::MarketState;
use crate::market::trace::{SolveTrace, TerminationReason, TraceEvent};
use crate::model::{Allocation, Instance};
use crate::rational::Rational;

const STEP_FACTOR: u64 = 64;
const MIN_STEPS: u64 = 10_000;
const MAX_STEPS: u64 = 100_000_000;

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Defaults to [`default_eps`], which makes the output exactly EQ1 and PO.
    pub eps: Option<Rational>,
    pub max_steps: Option<u64>,
}

impl SolveOptions {
    pub fn exact() -> Self {
        SolveOptions::default()
    }

    pub fn approx(eps: Rational) -> Self {
        SolveOptions {
            eps: Some(eps),
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub allocation: Allocation,
    pub trace: SolveTrace,
    pub state: MarketState,
    pub eps: Rational,
}

/// `64·n²·m²·⌈1/ε⌉·⌈log2(m·v_max)+1⌉`, clamped to `[10^4, 10^8]`.
pub fn default_max_steps(instance: &Instance, eps: &Rational) -> u64 {
    let n = instance.n_agents() as u64;
    let m = instance.n_goods() as u64;
    let inv = eps.recip().ceil().to_integer().to_u64().unwrap_or(u64::MAX);
    let logs = 64 - (m.saturating_mul(instance.v_max().max(1))).leading_zeros() as u64 + 1;
    STEP_FACTOR
        .saturating_mul(n * n)
        .saturating_mul(m * m)
        .saturating_mul(inv)
        .saturating_mul(logs)
        .clamp(MIN_STEPS, MAX_STEPS)
}

/// Runs the market algorithm on an already rounded instance.
pub fn run_market(rounded: RoundedInstance, max_steps: u64) -> Result<(MarketState, SolveTrace)> {
    let mut state = MarketState::phase1(rounded)?;
    let mut trace = SolveTrace::default();
    trace.push(TraceEvent::Phase1Done);
    let mut reference = None;
    let mut steps = 0u64;
    loop {
        let r = state.reference_agent();
        if reference != Some(r) {
            trace.push(TraceEvent::ReferenceChange { agent: r });
            reference = Some(r);
        }
        if state.is_eps_eq1() {
            trace.push(TraceEvent::Terminated {
                reason: TerminationReason::EpsEq1,
            });
            return Ok((state, trace));
        }
        if steps >= max_steps {
            trace.push(TraceEvent::Terminated {
                reason: TerminationReason::StepLimit,
            });
            return Err(Error::StepLimit { max_steps, trace });
        }
        let levels = state.reachability_from(r);
        match state.find_eps_path_violator(&levels) {
            Some(v) => {
                state.swap(v.good, v.agent, v.predecessor)?;
                trace.push(TraceEvent::Swap {
                    from: v.agent,
                    to: v.predecessor,
                    good: v.good,
                });
            }
            None => {
                let (power, goods) = state.price_rise(&levels)?;
                trace.push(TraceEvent::PriceRise {
                    base: state.rounded().base(),
                    power,
                    goods,
                });
            }
        }
        steps += 1;
    }
}

/// Computes an allocation that is ε-EQ1 and fPO for the ε-rounded instance.
pub fn solve_eq1_po(instance: &Instance, options: &SolveOptions) -> Result<SolveOutcome> {
    if !instance.is_positive() {
        return Err(Error::NotPositive);
    }
    let eps = match &options.eps {
        Some(e) => e.clone(),
        None => default_eps(instance)?,
    };
    let rounded = eps_round(instance, &eps)?;
    let max_steps = options.max_steps.unwrap_or_else(|| default_max_steps(instance, &eps));
    let (state, trace) = run_market(rounded, max_steps)?;
    Ok(SolveOutcome {
        allocation: state.allocation().clone(),
        trace,
        state,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::{check_property, utilities, Property};
    use crate::rational::from_ratio;

    #[test]
    fn hand_example() {
        let inst = Instance::new(vec![vec![2, 1, 1], vec![1, 8, 8]]).unwrap();
        let out = solve_eq1_po(&inst, &SolveOptions::approx(from_ratio(1, 1))).unwrap();
        assert_eq!(out.allocation.bundles(), &[vec![0, 1], vec![2]]);
        assert_eq!(utilities(&inst, &out.allocation), vec![3, 8]);
        assert_eq!(
            out.trace.to_text(),
            "phase1_done\nreference agent=0\nprice_rise delta=(2/1)^3 goods=0\nswap from=1 to=0 good=1\nterminated reason=eps_eq1\n"
        );
    }

    #[test]
    fn identical_three_two_one() {
        let inst = Instance::new(vec![vec![3, 2, 1], vec![3, 2, 1]]).unwrap();
        let out = solve_eq1_po(&inst, &SolveOptions::exact()).unwrap();
        let mut u = utilities(&inst, &out.allocation);
        u.sort();
        assert_eq!(u, vec![3, 3]);
    }

    #[test]
    fn rejects_zero_values() {
        let inst = Instance::new(vec![vec![0, 1], vec![1, 1]]).unwrap();
        assert!(matches!(solve_eq1_po(&inst, &SolveOptions::exact()), Err(Error::NotPositive)));
    }

    #[test]
    fn step_limit_carries_trace() {
        let inst = Instance::new(vec![vec![2, 1, 1], vec![1, 8, 8]]).unwrap();
        let opts = SolveOptions {
            eps: Some(from_ratio(1, 1)),
            max_steps: Some(1),
        };
        match solve_eq1_po(&inst, &opts) {
            Err(Error::StepLimit { max_steps: 1, trace }) => {
                assert_eq!(trace.price_rises(), 1);
                assert_eq!(trace.swaps(), 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exact_mode_is_eq1() {
        let inst = Instance::new(vec![vec![4, 1, 3, 2, 2], vec![1, 4, 2, 3, 1], vec![2, 2, 2, 2, 4]]).unwrap();
        let out = solve_eq1_po(&inst, &SolveOptions::exact()).unwrap();
        assert!(check_property(&inst, &out.allocation, &Property::Eq1).unwrap().holds);
    }

    #[test]
    fn max_steps_bounds() {
        let inst = Instance::new(vec![vec![1, 1]]).unwrap();
        assert_eq!(default_max_steps(&inst, &from_ratio(1, 1)), MIN_STEPS);
        let big = Instance::new(vec![vec![1000; 20]; 5]).unwrap();
        let eps = default_eps(&big).unwrap();
        assert_eq!(default_max_steps(&big, &eps), MAX_STEPS);
    }
}
