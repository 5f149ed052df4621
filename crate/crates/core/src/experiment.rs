//! Batch evaluation: run algorithms over many instances and count how often
//! each output satisfies each property combination.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::binary::{eq_po_binary, nash_optimal_binary};
use crate::checks::{check_property, utilities, Property};
use crate::error::{Error, Result};
use crate::instio::{generate, GeneratorConfig};
use crate::market::{solve_eq1_po, SolveOptions};
use crate::model::{Allocation, Instance};
use crate::oracle::{is_fpo_lp, BruteForce, ComboQuery, Efficiency, Envy, Equity, ParetoFrontier};
use crate::rational::{format_decimal, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    LeximinBf,
    MnwBf,
    AlgEq1Po,
    EqPoBinary,
    NashBinary,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::LeximinBf,
        Algorithm::MnwBf,
        Algorithm::AlgEq1Po,
        Algorithm::EqPoBinary,
        Algorithm::NashBinary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LeximinBf => "leximin_bf",
            Algorithm::MnwBf => "mnw_bf",
            Algorithm::AlgEq1Po => "alg_eq1_po",
            Algorithm::EqPoBinary => "eq_po_binary",
            Algorithm::NashBinary => "nash_binary",
        }
    }

    pub fn is_brute_force(self) -> bool {
        matches!(self, Algorithm::LeximinBf | Algorithm::MnwBf)
    }

    /// `Ok(None)` when a decision procedure reports that no allocation exists.
    pub fn run(self, instance: &Instance, bf: &BruteForce, market: &SolveOptions) -> Result<Option<Allocation>> {
        match self {
            Algorithm::LeximinBf => bf.leximin(instance).map(Some),
            Algorithm::MnwBf => bf.mnw(instance).map(Some),
            Algorithm::AlgEq1Po => solve_eq1_po(instance, market).map(|o| Some(o.allocation)),
            Algorithm::EqPoBinary => eq_po_binary(instance),
            Algorithm::NashBinary => nash_optimal_binary(instance).map(Some),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown algorithm `{s}`")))
    }
}

/// The combinations tabulated by default.
pub fn default_combos() -> Vec<ComboQuery> {
    ["EQ+PO", "EQ1+PO", "EQX+PO", "EQ1+EF1+PO", "EQX+EFX+PO", "EF+PO", "EF1+PO", "EFX+PO"]
        .iter()
        .map(|s| s.parse().expect("well-formed combination"))
        .collect()
}

#[derive(Debug, Clone)]
pub enum InstanceSource {
    /// Instance `k` uses seed `config.seed + k`.
    Generated { config: GeneratorConfig, count: usize },
    Given(Vec<Instance>),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: InstanceSource,
    pub algorithms: Vec<Algorithm>,
    pub combos: Vec<ComboQuery>,
    pub market: SolveOptions,
    pub cap: u64,
    /// Worker threads; 0 picks rayon's default.
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn new(source: InstanceSource) -> Self {
        ExperimentConfig {
            source,
            algorithms: vec![Algorithm::LeximinBf, Algorithm::MnwBf, Algorithm::AlgEq1Po],
            combos: default_combos(),
            market: SolveOptions::exact(),
            cap: crate::oracle::DEFAULT_CAP,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub combo: ComboQuery,
    pub satisfied: usize,
    pub total: usize,
}

impl SummaryRow {
    pub fn fraction(&self) -> Rational {
        if self.total == 0 {
            return Rational::from_integer(0.into());
        }
        Rational::new((self.satisfied as i64).into(), (self.total as i64).into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetailRow {
    pub instance: usize,
    pub algorithm: Algorithm,
    pub combo: ComboQuery,
    pub satisfied: bool,
    /// `None` when the algorithm returned no allocation.
    pub utilities: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSummary {
    pub rows: Vec<SummaryRow>,
    pub details: Vec<DetailRow>,
}

impl ExperimentSummary {
    pub fn row(&self, algorithm: Algorithm, combo: &ComboQuery) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.combo == *combo)
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("algorithm,combo,satisfied,total,fraction\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.algorithm,
                r.combo,
                r.satisfied,
                r.total,
                format_decimal(&r.fraction(), 4)
            ));
        }
        out
    }

    pub fn detail_csv(&self) -> String {
        let mut out = String::from("instance,algorithm,combo,satisfied,utilities\n");
        for d in &self.details {
            let u = d.utilities.as_ref().map_or_else(
                || "none".to_string(),
                |u| u.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
            );
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                d.instance,
                d.algorithm,
                d.combo,
                u8::from(d.satisfied),
                u
            ));
        }
        out
    }
}

pub fn instances(source: &InstanceSource) -> Result<Vec<Instance>> {
    match source {
        InstanceSource::Given(list) => Ok(list.clone()),
        InstanceSource::Generated { config, count } => (0..*count)
            .map(|k| generate(&config.with_seed(config.seed.wrapping_add(k as u64))))
            .collect(),
    }
}

fn needs_enumeration(config: &ExperimentConfig) -> bool {
    config.algorithms.iter().any(|a| a.is_brute_force()) || config.combos.iter().any(|c| c.efficiency.is_some())
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    if config.algorithms.is_empty() || config.combos.is_empty() {
        return Err(Error::Usage("an experiment needs at least one algorithm and one combination".into()));
    }
    let list = instances(&config.source)?;
    if needs_enumeration(config) {
        for inst in &list {
            let size = inst.search_space_size();
            if size > u128::from(config.cap) {
                return Err(Error::CapExceeded { size, cap: config.cap });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let per_instance: Vec<Vec<DetailRow>> = pool.install(|| {
        list.par_iter()
            .enumerate()
            .map(|(k, inst)| evaluate(config, k, inst))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows: Vec<SummaryRow> = config
        .algorithms
        .iter()
        .flat_map(|&algorithm| {
            config.combos.iter().map(move |&combo| SummaryRow {
                algorithm,
                combo,
                satisfied: 0,
                total: 0,
            })
        })
        .collect();
    let details: Vec<DetailRow> = per_instance.into_iter().flatten().collect();
    for d in &details {
        let r = rows
            .iter_mut()
            .find(|r| r.algorithm == d.algorithm && r.combo == d.combo)
            .expect("row for every pair");
        r.total += 1;
        r.satisfied += usize::from(d.satisfied);
    }
    Ok(ExperimentSummary { rows, details })
}

fn evaluate(config: &ExperimentConfig, k: usize, inst: &Instance) -> Result<Vec<DetailRow>> {
    let bf = BruteForce::new(config.cap);
    let frontier = if needs_enumeration(config) {
        Some(ParetoFrontier::build(inst, config.cap)?)
    } else {
        None
    };
    let mut out = Vec::new();
    for &algorithm in &config.algorithms {
        let alloc = algorithm.run(inst, &bf, &config.market)?;
        if let Some(a) = &alloc {
            theorem_check(algorithm, inst, a, frontier.as_ref(), config)?;
        }
        for &combo in &config.combos {
            let satisfied = match &alloc {
                Some(a) => satisfies(inst, a, &combo, frontier.as_ref())?,
                None => false,
            };
            out.push(DetailRow {
                instance: k,
                algorithm,
                combo,
                satisfied,
                utilities: alloc.as_ref().map(|a| utilities(inst, a)),
            });
        }
    }
    Ok(out)
}

fn satisfies(inst: &Instance, a: &Allocation, combo: &ComboQuery, frontier: Option<&ParetoFrontier>) -> Result<bool> {
    let props = combo
        .equity
        .map(Equity::property)
        .into_iter()
        .chain(combo.envy.map(Envy::property));
    for p in props {
        if !check_property(inst, a, &p)?.holds {
            return Ok(false);
        }
    }
    Ok(match combo.efficiency {
        None => true,
        Some(Efficiency::Po) => frontier.expect("frontier built for PO").is_optimal(&utilities(inst, a)),
        Some(Efficiency::Fpo) => is_fpo_lp(inst, a)?,
    })
}

/// Guarantees that hold for every instance; a counterexample aborts the run.
fn theorem_check(
    algorithm: Algorithm,
    inst: &Instance,
    a: &Allocation,
    frontier: Option<&ParetoFrontier>,
    config: &ExperimentConfig,
) -> Result<()> {
    let po = |frontier: Option<&ParetoFrontier>| -> Result<bool> {
        match frontier {
            Some(f) => Ok(f.is_optimal(&utilities(inst, a))),
            None => Ok(BruteForce::new(config.cap).is_po(inst, a)?.pareto_optimal),
        }
    };
    let (label, holds) = match algorithm {
        Algorithm::AlgEq1Po if config.market.eps.is_none() => {
            ("EQ1", check_property(inst, a, &Property::Eq1)?.holds)
        }
        Algorithm::LeximinBf if inst.is_positive() => {
            ("EQX+PO", check_property(inst, a, &Property::Eqx)?.holds && po(frontier)?)
        }
        Algorithm::MnwBf => ("EF1+PO", check_property(inst, a, &Property::Ef1)?.holds && po(frontier)?),
        _ => return Ok(()),
    };
    if holds {
        Ok(())
    } else {
        Err(Error::InvariantBreach(format!(
            "{algorithm} output {:?} violates {label} on {:?}",
            a.bundles(),
            inst.valuations()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(count: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(InstanceSource::Generated {
            config: GeneratorConfig::dirichlet(2, 5, 11),
            count,
        });
        c.combos = vec!["EQX+PO".parse().unwrap(), "EF1+PO".parse().unwrap(), "EQ1".parse().unwrap()];
        c
    }

    #[test]
    fn guaranteed_rows_are_full() {
        let s = run_experiment(&small(6)).unwrap();
        let eqx_po = "EQX+PO".parse().unwrap();
        let ef1_po = "EF1+PO".parse().unwrap();
        let eq1 = "EQ1".parse().unwrap();
        assert_eq!(s.row(Algorithm::LeximinBf, &eqx_po).unwrap().satisfied, 6);
        assert_eq!(s.row(Algorithm::MnwBf, &ef1_po).unwrap().satisfied, 6);
        assert_eq!(s.row(Algorithm::AlgEq1Po, &eq1).unwrap().satisfied, 6);
        assert_eq!(s.details.len(), 6 * 3 * 3);
    }

    #[test]
    fn summary_format() {
        let s = run_experiment(&small(3)).unwrap();
        let csv = s.summary_csv();
        assert!(csv.starts_with("algorithm,combo,satisfied,total,fraction\nleximin_bf,EQX+PO,3,3,1.0000\n"));
        assert_eq!(csv.lines().count(), 1 + 3 * 3);
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let mut a = small(5);
        a.jobs = 1;
        let mut b = small(5);
        b.jobs = 4;
        let (a, b) = (run_experiment(&a).unwrap(), run_experiment(&b).unwrap());
        assert_eq!(a.summary_csv(), b.summary_csv());
        assert_eq!(a.detail_csv(), b.detail_csv());
    }

    #[test]
    fn cap_is_checked_up_front() {
        let mut c = small(2);
        c.cap = 10;
        assert!(matches!(run_experiment(&c), Err(Error::CapExceeded { size: 32, cap: 10 })));
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("simplex".parse::<Algorithm>().is_err());
    }
}
