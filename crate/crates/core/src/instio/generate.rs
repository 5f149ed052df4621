use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rational::Rational;

/// Bumped whenever the mapping from seed to instance changes.
pub const GENERATOR_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    /// Rows drawn from a symmetric Dirichlet, scaled to `total`, all entries ≥ 1.
    DirichletPositive,
    /// Each entry is 1 with probability `p`, independently.
    Binary { p: Rational },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n_agents: usize,
    pub n_goods: usize,
    pub concentration: f64,
    pub total: u64,
    pub seed: u64,
    pub kind: GeneratorKind,
}

impl GeneratorConfig {
    pub fn dirichlet(n_agents: usize, n_goods: usize, seed: u64) -> Self {
        GeneratorConfig {
            n_agents,
            n_goods,
            concentration: 10.0,
            total: 1000,
            seed,
            kind: GeneratorKind::DirichletPositive,
        }
    }

    pub fn binary(n_agents: usize, n_goods: usize, p: Rational, seed: u64) -> Self {
        GeneratorConfig {
            kind: GeneratorKind::Binary { p },
            ..GeneratorConfig::dirichlet(n_agents, n_goods, seed)
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GeneratorConfig { seed, ..self.clone() }
    }
}

pub fn generate(config: &GeneratorConfig) -> Result<Instance> {
    match &config.kind {
        GeneratorKind::DirichletPositive => gen_dirichlet(config),
        GeneratorKind::Binary { p } => gen_binary(config, p),
    }
}

pub fn gen_dirichlet(config: &GeneratorConfig) -> Result<Instance> {
    if config.n_agents == 0 || config.n_goods == 0 {
        return Err(Error::InvalidInstance("need at least one agent and one good".into()));
    }
    if config.n_goods as u64 > config.total {
        return Err(Error::InvalidInstance(format!(
            "{} goods cannot all be positive with row total {}",
            config.n_goods, config.total
        )));
    }
    if !(config.concentration > 0.0 && config.concentration.is_finite()) {
        return Err(Error::InvalidInstance("concentration must be positive".into()));
    }
    let gamma = Gamma::new(config.concentration, 1.0).expect("validated shape");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rows = (0..config.n_agents)
        .map(|_| {
            let draws: Vec<f64> = (0..config.n_goods).map(|_| gamma.sample(&mut rng)).collect();
            apportion(&draws, config.total)
        })
        .collect();
    Instance::new(rows)
}

/// Largest-remainder rounding of `weights` to integers summing to `total`,
/// then moves single units from the largest entry to any zero entry.
fn apportion(weights: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut row: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = row.iter().sum();
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let missing = total.saturating_sub(assigned) as usize;
    for &j in order.iter().cycle().take(missing) {
        row[j] += 1;
    }
    while let Some(z) = row.iter().position(|&v| v == 0) {
        let big = (0..row.len()).max_by_key(|&j| (row[j], std::cmp::Reverse(j))).unwrap();
        row[big] -= 1;
        row[z] += 1;
    }
    row
}

pub fn gen_binary(config: &GeneratorConfig, p: &Rational) -> Result<Instance> {
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    if *p < zero || *p > one {
        return Err(Error::InvalidInstance("approval probability must lie in [0, 1]".into()));
    }
    let num = p.numer().to_u64().ok_or_else(|| Error::InvalidInstance("probability too fine".into()))?;
    let den = p.denom().to_u64().ok_or_else(|| Error::InvalidInstance("probability too fine".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rows = (0..config.n_agents)
        .map(|_| {
            (0..config.n_goods)
                .map(|_| u64::from(rng.gen_range(0..den) < num))
                .collect()
        })
        .collect();
    Instance::new(rows)
}
