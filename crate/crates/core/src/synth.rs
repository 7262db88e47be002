//! Deterministic synthetic corpora for tests, benches and protocol runs.
//!
//! Every `(entity, component)` pair draws from its own ChaCha8 stream derived
//! from the corpus seed, so a corpus is reproducible and any subset can be
//! regenerated independently.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{MultiSeries, Series};
use crate::{Error, Result};

/// Number of levels visited by the Markov generator.
const MARKOV_STATES: u32 = 4;
/// Longest run of zeros produced by the bursty generator.
const MAX_BURST: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Constant { level: f64 },
    /// Independent uniform values in `[0, 100)`, rounded to cents.
    IidUniform,
    /// Four-level regime chain that keeps its level with probability `bias`.
    Markov { bias: f64 },
    /// Positive values interrupted by zero bursts; exactly
    /// `round(zero_density * t)` entries are zero.
    BurstySparse { zero_density: f64 },
}

impl Generator {
    fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidConfig(format!("{what} must be in [0, 1], got {v}")));
        match *self {
            Generator::Constant { level } if !level.is_finite() => {
                Err(Error::InvalidConfig("constant level must be finite".into()))
            }
            Generator::Markov { bias } if !(0.0..=1.0).contains(&bias) => bad("markov bias", bias),
            Generator::BurstySparse { zero_density } if !(0.0..=1.0).contains(&zero_density) => {
                bad("zero density", zero_density)
            }
            _ => Ok(()),
        }
    }

    fn sample(&self, t: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match *self {
            Generator::Constant { level } => vec![level; t],
            Generator::IidUniform => (0..t).map(|_| cents(rng.gen_range(0.0..100.0))).collect(),
            Generator::Markov { bias } => {
                let mut state = rng.gen_range(0..MARKOV_STATES);
                (0..t)
                    .map(|_| {
                        if !rng.gen_bool(bias) {
                            state = (state + rng.gen_range(1..MARKOV_STATES)) % MARKOV_STATES;
                        }
                        cents(25.0 * (state as f64 + rng.gen_range(0.0..1.0)))
                    })
                    .collect()
            }
            Generator::BurstySparse { zero_density } => bursty(t, zero_density, rng),
        }
    }
}

fn cents(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn bursty(t: usize, zero_density: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let zeros = ((zero_density * t as f64).round() as usize).min(t);
    let mut bursts = Vec::new();
    let mut left = zeros;
    while left > 0 {
        let b = rng.gen_range(1..=MAX_BURST).min(left);
        bursts.push(b);
        left -= b;
    }
    // Scatter the non-zero entries over the gaps around the bursts.
    let nonzero = t - zeros;
    let slots = bursts.len() + 1;
    let mut gaps = vec![0usize; slots];
    for _ in 0..nonzero {
        gaps[rng.gen_range(0..slots)] += 1;
    }
    let mut out = Vec::with_capacity(t);
    for (i, gap) in gaps.iter().enumerate() {
        out.extend((0..*gap).map(|_| cents(rng.gen_range(0.01..100.0)).max(0.01)));
        if let Some(&b) = bursts.get(i) {
            out.extend(std::iter::repeat(0.0).take(b));
        }
    }
    out
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Constant { level } => write!(f, "constant:{level}"),
            Generator::IidUniform => f.write_str("iid_uniform"),
            Generator::Markov { bias } => write!(f, "markov:{bias}"),
            Generator::BurstySparse { zero_density } => write!(f, "bursty_sparse:{zero_density}"),
        }
    }
}

/// Parses `constant[:level]`, `iid_uniform`, `markov[:bias]`, `bursty_sparse[:density]`.
impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |default: f64| -> Result<f64> {
            arg.map_or(Ok(default), |a| {
                a.parse().map_err(|_| Error::InvalidConfig(format!("bad generator parameter in `{s}`")))
            })
        };
        let g = match name {
            "constant" => Generator::Constant { level: num(1.0)? },
            "iid_uniform" if arg.is_none() => Generator::IidUniform,
            "markov" => Generator::Markov { bias: num(0.8)? },
            "bursty_sparse" => Generator::BurstySparse { zero_density: num(0.25)? },
            _ => return Err(Error::InvalidConfig(format!("unknown generator `{s}`"))),
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub entity_count: usize,
    pub component_count: usize,
    pub length: usize,
    /// One per component, or a single generator shared by all components.
    pub generators: Vec<Generator>,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.component_count < 2 {
            return Err(Error::InvalidConfig("component_count must be at least 2".into()));
        }
        if self.length == 0 {
            return Err(Error::InvalidConfig("length must be at least 1".into()));
        }
        if self.generators.len() != 1 && self.generators.len() != self.component_count {
            return Err(Error::InvalidConfig(format!(
                "expected 1 or {} generators, got {}",
                self.component_count,
                self.generators.len()
            )));
        }
        self.generators.iter().try_for_each(Generator::validate)
    }

    fn generator(&self, component: usize) -> &Generator {
        &self.generators[if self.generators.len() == 1 { 0 } else { component }]
    }

    pub fn entity_id(&self, index: usize) -> String {
        let width = self.entity_count.to_string().len().max(2);
        format!("e{:0width$}", index + 1)
    }
}

pub fn component_label(index: usize) -> String {
    format!("c{}", index + 1)
}

pub fn generate(spec: &CorpusSpec) -> Result<Vec<MultiSeries>> {
    spec.validate()?;
    (0..spec.entity_count)
        .map(|e| {
            let comps = (0..spec.component_count)
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                    rng.set_stream((e * spec.component_count + c) as u64);
                    Series::new(component_label(c), spec.generator(c).sample(spec.length, &mut rng))
                })
                .collect::<Result<Vec<_>>>()?;
            MultiSeries::new(spec.entity_id(e), comps)
        })
        .collect()
}
