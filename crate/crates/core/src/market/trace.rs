use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::market::rounding::RoundedInstance;
use crate::market::state::MarketState;
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    EpsEq1,
    StepLimit,
}

impl TerminationReason {
    fn as_str(self) -> &'static str {
        match self {
            TerminationReason::EpsEq1 => "eps_eq1",
            TerminationReason::StepLimit => "step_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Phase1Done,
    ReferenceChange { agent: usize },
    Swap { from: usize, to: usize, good: usize },
    /// Prices of `goods` multiplied by `base^power`.
    PriceRise { base: Rational, power: u64, goods: Vec<usize> },
    Terminated { reason: TerminationReason },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Phase1Done => f.write_str("phase1_done"),
            TraceEvent::ReferenceChange { agent } => write!(f, "reference agent={agent}"),
            TraceEvent::Swap { from, to, good } => write!(f, "swap from={from} to={to} good={good}"),
            TraceEvent::PriceRise { base, power, goods } => {
                let goods: Vec<String> = goods.iter().map(|g| g.to_string()).collect();
                write!(f, "price_rise delta=({})^{power} goods={}", format_rational(base), goods.join(","))
            }
            TraceEvent::Terminated { reason } => write!(f, "terminated reason={}", reason.as_str()),
        }
    }
}

fn field<'a>(parts: &[&'a str], key: &str, line: &str) -> Result<&'a str> {
    parts
        .iter()
        .find_map(|p| p.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Usage(format!("trace line `{line}` lacks `{key}=`")))
}

fn index(parts: &[&str], key: &str, line: &str) -> Result<usize> {
    field(parts, key, line)?
        .parse()
        .map_err(|_| Error::Usage(format!("bad `{key}` in trace line `{line}`")))
}

impl FromStr for TraceEvent {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Usage(format!("unrecognised trace line `{line}`"));
        match parts.first().copied() {
            Some("phase1_done") => Ok(TraceEvent::Phase1Done),
            Some("reference") => Ok(TraceEvent::ReferenceChange {
                agent: index(&parts, "agent", line)?,
            }),
            Some("swap") => Ok(TraceEvent::Swap {
                from: index(&parts, "from", line)?,
                to: index(&parts, "to", line)?,
                good: index(&parts, "good", line)?,
            }),
            Some("price_rise") => {
                let delta = field(&parts, "delta", line)?;
                let (base, power) = delta
                    .strip_prefix('(')
                    .and_then(|d| d.split_once(")^"))
                    .ok_or_else(bad)?;
                let base = parse_rational(base).ok_or_else(bad)?;
                let power = power.parse().map_err(|_| bad())?;
                let goods = field(&parts, "goods", line)?
                    .split(',')
                    .filter(|g| !g.is_empty())
                    .map(|g| g.parse().map_err(|_| bad()))
                    .collect::<Result<Vec<usize>>>()?;
                Ok(TraceEvent::PriceRise { base, power, goods })
            }
            Some("terminated") => match field(&parts, "reason", line)? {
                "eps_eq1" => Ok(TraceEvent::Terminated {
                    reason: TerminationReason::EpsEq1,
                }),
                "step_limit" => Ok(TraceEvent::Terminated {
                    reason: TerminationReason::StepLimit,
                }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

/// Ordered record of a solver run, starting from the Phase-1 state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveTrace {
    pub events: Vec<TraceEvent>,
}

impl SolveTrace {
    pub fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    pub fn swaps(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, TraceEvent::Swap { .. })).count()
    }

    pub fn price_rises(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::PriceRise { .. }))
            .count()
    }

    /// One event per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let events = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(SolveTrace { events })
    }
}

/// Re-executes a trace from the Phase-1 state, validating every event.
pub fn replay(rounded: &RoundedInstance, trace: &SolveTrace) -> Result<MarketState> {
    replay_with(rounded, trace, |_, _| Ok(()))
}

fn replay_with(
    rounded: &RoundedInstance,
    trace: &SolveTrace,
    mut observe: impl FnMut(&TraceEvent, &MarketState) -> Result<()>,
) -> Result<MarketState> {
    let mut state = MarketState::phase1(rounded.clone())?;
    let breach = |msg: String| Err(Error::InvariantBreach(msg));
    for (step, event) in trace.events.iter().enumerate() {
        match event {
            TraceEvent::Phase1Done => {
                if step != 0 {
                    return breach(format!("event {step}: phase1_done must come first"));
                }
            }
            TraceEvent::ReferenceChange { agent } => {
                if state.reference_agent() != *agent {
                    return breach(format!("event {step}: reference agent is {}, trace says {agent}", state.reference_agent()));
                }
            }
            TraceEvent::Swap { from, to, good } => state.swap(*good, *from, *to)?,
            TraceEvent::PriceRise { base, power, goods } => {
                if *base != rounded.base() {
                    return breach(format!("event {step}: price-rise base differs from 1+ε"));
                }
                state.apply_rise(goods, *power);
            }
            TraceEvent::Terminated { reason } => {
                if *reason == TerminationReason::EpsEq1 && !state.is_eps_eq1() {
                    return breach(format!("event {step}: terminated but allocation is not ε-EQ1"));
                }
            }
        }
        observe(event, &state)?;
    }
    Ok(state)
}

/// Outcome of checking a trace against the solver's structural invariants.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceAudit {
    pub events: usize,
    pub mbb_consistent: bool,
    /// Least rounded utility never decreases.
    pub reference_monotone: bool,
    pub prices_monotone: bool,
    /// The set of ε-violators at a price rise contains the set at the next one.
    pub violators_shrink: bool,
    /// No ε-violator is reachable when prices rise.
    pub no_reachable_violator_at_rise: bool,
    /// Each rise uses the smallest factor that creates a new MBB edge, on exactly the reachable goods.
    pub rises_minimal: bool,
    /// `p_j ≤ w_max⁴`; `None` when Phase 1 left an agent without goods.
    pub price_bound: Option<bool>,
    pub notes: Vec<String>,
}

impl TraceAudit {
    pub fn is_clean(&self) -> bool {
        self.mbb_consistent
            && self.reference_monotone
            && self.prices_monotone
            && self.violators_shrink
            && self.no_reachable_violator_at_rise
            && self.rises_minimal
            && self.price_bound != Some(false)
    }
}

pub fn audit_trace(rounded: &RoundedInstance, trace: &SolveTrace) -> Result<TraceAudit> {
    let initial = MarketState::phase1(rounded.clone())?;
    let phase1_full = (0..initial.rounded().n_agents()).all(|i| !initial.allocation().bundle(i).is_empty());
    let t_max = rounded.max_exponent() as i64;
    let mut audit = TraceAudit {
        events: trace.events.len(),
        mbb_consistent: initial.is_mbb_consistent(),
        reference_monotone: true,
        prices_monotone: true,
        violators_shrink: true,
        no_reachable_violator_at_rise: true,
        rises_minimal: true,
        price_bound: phase1_full.then_some(true),
        notes: Vec::new(),
    };
    let least = |s: &MarketState| s.utility_terms(s.reference_agent());
    let mut prev = initial.clone();
    let mut prev_violators: Option<Vec<usize>> = None;
    let mut step = 0usize;
    replay_with(rounded, trace, |event, state| {
        if let TraceEvent::PriceRise { power, goods, .. } = event {
            // Inspect the state just before the rise.
            let levels = prev.build_reachability();
            let violators = prev.eps_violators();
            if violators.iter().any(|&k| levels.is_reachable(k)) {
                audit.no_reachable_violator_at_rise = false;
                audit.notes.push(format!("event {step}: reachable ε-violator at price rise"));
            }
            if let Some(before) = &prev_violators {
                if !violators.iter().all(|k| before.contains(k)) {
                    audit.violators_shrink = false;
                    audit.notes.push(format!("event {step}: ε-violator set grew"));
                }
            }
            prev_violators = Some(violators);
            let expected_goods: Vec<usize> = (0..prev.price_exponents().len())
                .filter(|&j| levels.is_reachable(prev.allocation().owner(j)))
                .collect();
            if prev.price_rise_exponent(&levels).ok() != Some(*power) || *goods != expected_goods {
                audit.rises_minimal = false;
                audit.notes.push(format!("event {step}: price rise differs from the minimal one"));
            }
        }
        if !state.is_mbb_consistent() {
            audit.mbb_consistent = false;
            audit.notes.push(format!("event {step}: MBB consistency lost"));
        }
        if rounded.cmp_terms(&least(state), &least(&prev)) == Ordering::Less {
            audit.reference_monotone = false;
            audit.notes.push(format!("event {step}: least utility decreased"));
        }
        let prices_up = state
            .price_exponents()
            .iter()
            .zip(prev.price_exponents())
            .all(|(a, b)| a >= b);
        if !prices_up {
            audit.prices_monotone = false;
            audit.notes.push(format!("event {step}: a price decreased"));
        }
        if audit.price_bound.is_some() && state.price_exponents().iter().any(|&e| e > 4 * t_max) {
            audit.price_bound = Some(false);
            audit.notes.push(format!("event {step}: price above w_max^4"));
        }
        prev = state.clone();
        step += 1;
        Ok(())
    })?;
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::from_ratio;

    #[test]
    fn text_round_trip() {
        let trace = SolveTrace {
            events: vec![
                TraceEvent::Phase1Done,
                TraceEvent::ReferenceChange { agent: 0 },
                TraceEvent::PriceRise {
                    base: from_ratio(2, 1),
                    power: 3,
                    goods: vec![0, 2],
                },
                TraceEvent::Swap { from: 1, to: 0, good: 1 },
                TraceEvent::Terminated {
                    reason: TerminationReason::EpsEq1,
                },
            ],
        };
        let text = trace.to_text();
        assert_eq!(
            text,
            "phase1_done\nreference agent=0\nprice_rise delta=(2/1)^3 goods=0,2\nswap from=1 to=0 good=1\nterminated reason=eps_eq1\n"
        );
        assert_eq!(SolveTrace::parse(&text).unwrap(), trace);
    }

    #[test]
    fn rejects_garbage() {
        assert!(SolveTrace::parse("swap from=1 to=x good=0").is_err());
        assert!(SolveTrace::parse("teleport").is_err());
        assert!(SolveTrace::parse("price_rise delta=2^3 goods=0").is_err());
    }
}
