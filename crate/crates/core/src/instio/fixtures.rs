//! Small named instances with known facts, each re-checkable by brute force.

use std::fmt;

use crate::checks::{check_property, utility_profile, Property};
use crate::error::{Error, Result};
use crate::model::{Allocation, FractionalAllocation, Instance};
use crate::oracle::{
    enumerate_allocations, fractional_maximin, is_fpo_lp, BruteForce, ComboQuery, Efficiency,
};
use crate::rational::{format_rational, from_int, from_ratio, Rational};
use crate::santa;

#[derive(Debug, Clone, PartialEq)]
pub enum Fact {
    /// No allocation satisfies the combination.
    NoCombo(ComboQuery),
    /// Some allocation satisfies the combination.
    HasCombo(ComboQuery),
    /// Exactly `count` allocations satisfy `query`, and none of them is fPO.
    EveryWitnessFailsFpo { query: ComboQuery, count: usize },
    /// Exactly `count` allocations attain the leximin profile and all violate `property`.
    LeximinOptimaViolate { count: usize, property: Property },
    MaximinValue(u64),
    /// The listed allocation satisfies `query`.
    AllocationSatisfies { bundles: Vec<Vec<usize>>, query: ComboQuery },
    /// The listed allocation has `min utility / max-min value = ratio`.
    SantaRatio { bundles: Vec<Vec<usize>>, ratio: Rational },
    /// The listed allocation's sorted profile differs from the leximin profile.
    NotLeximin { bundles: Vec<Vec<usize>> },
    /// `fractional` is a fractional max-min optimum of value `value`, and every
    /// integral rounding inside its support violates `property`.
    RelaxRoundFails {
        fractional: FractionalAllocation,
        value: Rational,
        property: Property,
    },
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::NoCombo(q) => write!(f, "no {q} allocation exists"),
            Fact::HasCombo(q) => write!(f, "an {q} allocation exists"),
            Fact::EveryWitnessFailsFpo { query, count } => {
                write!(f, "exactly {count} {query} allocations, none fPO")
            }
            Fact::LeximinOptimaViolate { count, property } => {
                write!(f, "exactly {count} leximin allocations, all violating {property}")
            }
            Fact::MaximinValue(v) => write!(f, "max-min value is {v}"),
            Fact::AllocationSatisfies { bundles, query } => write!(f, "{bundles:?} is {query}"),
            Fact::SantaRatio { bundles, ratio } => {
                write!(f, "{bundles:?} reaches {} of the max-min value", format_rational(ratio))
            }
            Fact::NotLeximin { bundles } => write!(f, "{bundles:?} is not leximin"),
            Fact::RelaxRoundFails { value, property, .. } => write!(
                f,
                "fractional max-min value {} and every rounding violates {property}",
                format_rational(value)
            ),
        }
    }
}

impl Fact {
    pub fn verify(&self, instance: &Instance) -> Result<bool> {
        let bf = BruteForce::default();
        let alloc = |bundles: &Vec<Vec<usize>>| Allocation::new(instance.n_goods(), bundles.clone());
        Ok(match self {
            Fact::NoCombo(q) => !bf.exists_combo(instance, q)?.found,
            Fact::HasCombo(q) => bf.exists_combo(instance, q)?.found,
            Fact::EveryWitnessFailsFpo { query, count } => {
                let all = bf.all_satisfying(instance, query)?;
                all.len() == *count && all.iter().all(|a| !is_fpo_lp(instance, a).unwrap_or(true))
            }
            Fact::LeximinOptimaViolate { count, property } => {
                let best = utility_profile(instance, &bf.leximin(instance)?);
                let mut optima = 0;
                for a in enumerate_allocations(instance.n_agents(), instance.n_goods())? {
                    if utility_profile(instance, &a) == best {
                        optima += 1;
                        if check_property(instance, &a, property)?.holds {
                            return Ok(false);
                        }
                    }
                }
                optima == *count
            }
            Fact::MaximinValue(v) => bf.maximin(instance)?.0 == *v,
            Fact::AllocationSatisfies { bundles, query } => satisfies(&bf, instance, &alloc(bundles)?, query)?,
            Fact::SantaRatio { bundles, ratio } => santa::audit_with(&bf, instance, &alloc(bundles)?)?.ratio == *ratio,
            Fact::NotLeximin { bundles } => {
                utility_profile(instance, &alloc(bundles)?) != utility_profile(instance, &bf.leximin(instance)?)
            }
            Fact::RelaxRoundFails {
                fractional,
                value,
                property,
            } => {
                let (opt, _) = fractional_maximin(instance);
                let values: Vec<Vec<Rational>> = instance
                    .valuations()
                    .iter()
                    .map(|row| row.iter().map(|&v| from_int(v)).collect())
                    .collect();
                let attained = fractional.utilities(&values).into_iter().min();
                if opt != *value || attained.as_ref() != Some(value) {
                    return Ok(false);
                }
                for a in enumerate_allocations(instance.n_agents(), instance.n_goods())? {
                    let inside = a
                        .owners()
                        .iter()
                        .enumerate()
                        .all(|(g, &i)| *fractional.share(i, g) > Rational::from_integer(0.into()));
                    if inside && check_property(instance, &a, property)?.holds {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }
}

fn satisfies(bf: &BruteForce, instance: &Instance, a: &Allocation, query: &ComboQuery) -> Result<bool> {
    for p in query.equity.map(|e| e.property()).into_iter().chain(query.envy.map(|e| e.property())) {
        if !check_property(instance, a, &p)?.holds {
            return Ok(false);
        }
    }
    Ok(match query.efficiency {
        None => true,
        Some(Efficiency::Po) => bf.is_po(instance, a)?.pareto_optimal,
        Some(Efficiency::Fpo) => is_fpo_lp(instance, a)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub instance: Instance,
    pub facts: Vec<Fact>,
}

impl Fixture {
    /// Every fact that fails to verify.
    pub fn failing_facts(&self) -> Result<Vec<&Fact>> {
        let mut failing = Vec::new();
        for fact in &self.facts {
            if !fact.verify(&self.instance)? {
                failing.push(fact);
            }
        }
        Ok(failing)
    }
}

const NAMES: [&str; 8] = [
    "example1",
    "prop5_scaled_n2",
    "eqx_fpo_eps1",
    "santa_tight",
    "thm6_tight_n3",
    "leximin_not_ef1",
    "relax_round_scaled",
    "eq1po_not_leximin",
];

pub fn fixture_names() -> &'static [&'static str] {
    &NAMES
}

fn combo(text: &str) -> ComboQuery {
    text.parse().expect("well-formed combination")
}

pub fn fixture(name: &str) -> Result<Fixture> {
    let (name, description, rows, facts): (&'static str, &'static str, Vec<Vec<u64>>, Vec<Fact>) = match name {
        "example1" => (
            "example1",
            "binary, three agents: an agent alone on three goods",
            vec![vec![1, 1, 1, 0, 0, 0], vec![0, 0, 0, 1, 1, 1], vec![0, 0, 0, 1, 1, 1]],
            vec![Fact::NoCombo(combo("EQ1+PO")), Fact::HasCombo(combo("EF1+PO"))],
        ),
        "prop5_scaled_n2" => (
            "prop5_scaled_n2",
            "positive values: EQ1+PO exists, EQ1+EF1+PO does not",
            vec![vec![14, 1, 1, 1, 1, 1, 1], vec![14, 1, 1, 1, 1, 1, 1], vec![7; 7]],
            vec![Fact::HasCombo(combo("EQ1+PO")), Fact::NoCombo(combo("EQ1+EF1+PO"))],
        ),
        "eqx_fpo_eps1" => (
            "eqx_fpo_eps1",
            "EQX+PO exists but no EQX allocation is fPO",
            vec![vec![2, 1024, 1], vec![1, 1024, 2]],
            vec![
                Fact::HasCombo(combo("EQX+PO")),
                Fact::NoCombo(combo("EQX+FPO")),
                Fact::EveryWitnessFailsFpo {
                    query: combo("EQX"),
                    count: 2,
                },
            ],
        ),
        "santa_tight" => (
            "santa_tight",
            "EQX+PO allocation at two thirds of the max-min value",
            vec![vec![4, 3, 4, 4], vec![3, 1, 3, 3]],
            vec![
                Fact::MaximinValue(6),
                Fact::AllocationSatisfies {
                    bundles: vec![vec![0, 2], vec![1, 3]],
                    query: combo("EQX+PO"),
                },
                Fact::SantaRatio {
                    bundles: vec![vec![0, 2], vec![1, 3]],
                    ratio: from_ratio(2, 3),
                },
            ],
        ),
        "thm6_tight_n3" => (
            "thm6_tight_n3",
            "identical values: an EQ1 allocation at one third of the max-min value",
            vec![vec![1, 1, 1, 3, 3]; 3],
            vec![
                Fact::MaximinValue(3),
                Fact::AllocationSatisfies {
                    bundles: vec![vec![0, 3], vec![1, 4], vec![2]],
                    query: combo("EQ1"),
                },
                Fact::SantaRatio {
                    bundles: vec![vec![0, 3], vec![1, 4], vec![2]],
                    ratio: from_ratio(1, 3),
                },
            ],
        ),
        "leximin_not_ef1" => (
            "leximin_not_ef1",
            "both leximin allocations violate EQ1 although EQ1+PO exists",
            vec![
                vec![7, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 5, 5, 2, 2, 2, 2, 2],
                vec![0, 5, 5, 2, 2, 2, 2, 2],
            ],
            vec![
                Fact::LeximinOptimaViolate {
                    count: 2,
                    property: Property::Eq1,
                },
                Fact::HasCombo(combo("EQ1+PO")),
            ],
        ),
        "relax_round_scaled" => {
            let half = from_ratio(1, 2);
            let zero = from_ratio(0, 1);
            let one = from_ratio(1, 1);
            let fractional = FractionalAllocation::new(vec![
                vec![one.clone(), one.clone(), zero.clone()],
                vec![zero.clone(), zero.clone(), half.clone()],
                vec![zero.clone(), zero, half],
            ])?;
            (
                "relax_round_scaled",
                "rounding the fractional max-min solution breaks EQ1",
                vec![vec![3, 3, 10], vec![2, 2, 12], vec![2, 2, 12]],
                vec![Fact::RelaxRoundFails {
                    fractional,
                    value: from_ratio(6, 1),
                    property: Property::Eq1,
                }],
            )
        }
        "eq1po_not_leximin" => (
            "eq1po_not_leximin",
            "identical values: an EQ1+PO allocation that is not leximin",
            vec![vec![2, 1, 1]; 2],
            vec![
                Fact::AllocationSatisfies {
                    bundles: vec![vec![0, 1], vec![2]],
                    query: combo("EQ1+PO"),
                },
                Fact::NotLeximin {
                    bundles: vec![vec![0, 1], vec![2]],
                },
            ],
        ),
        other => return Err(Error::UnknownFixture(other.to_string())),
    };
    Ok(Fixture {
        name,
        description,
        instance: Instance::new(rows)?,
        facts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_loads_and_its_facts_hold() {
        for name in fixture_names() {
            let f = fixture(name).unwrap();
            assert_eq!(f.name, *name);
            assert!(f.failing_facts().unwrap().is_empty(), "{name}: {:?}", f.failing_facts().unwrap());
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(fixture("nope"), Err(Error::UnknownFixture(_))));
    }
}
