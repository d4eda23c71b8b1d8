use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::ch::{satisfies_ch, JointDistribution};
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixtureComponent {
    pub distribution: JointDistribution,
    pub weight: Rational,
}

/// A source that, per block, picks component `i` with probability
/// `weight_i` and runs a state table realizing its distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixtureStrategy {
    components: Vec<MixtureComponent>,
    sampler: DiscreteSampler,
}

impl MixtureStrategy {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMixture("no components".into()));
        }
        let mut total = Rational::zero();
        for (i, c) in components.iter().enumerate() {
            if !c.weight.is_positive() || c.weight > Rational::one() {
                return Err(Error::InvalidMixture(format!(
                    "component {i} weight {} outside (0, 1]",
                    format_rational(&c.weight)
                )));
            }
            if !satisfies_ch(&c.distribution) {
                return Err(Error::InvalidMixture(format!("component {i} violates CH")));
            }
            total += &c.weight;
        }
        if !total.is_one() {
            return Err(Error::InvalidMixture(format!(
                "weights sum to {}",
                format_rational(&total)
            )));
        }
        let weights: Vec<Rational> = components.iter().map(|c| c.weight.clone()).collect();
        let sampler = DiscreteSampler::new(&weights)?;
        Ok(Self {
            components,
            sampler,
        })
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (JointDistribution, Rational)>,
    ) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(distribution, weight)| MixtureComponent {
                    distribution,
                    weight,
                })
                .collect(),
        )
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Weight-averaged distribution of a single block.
    pub fn average(&self) -> JointDistribution {
        let terms = core::array::from_fn(|i| {
            self.components
                .iter()
                .map(|c| &c.weight * &c.distribution.terms()[i])
                .sum()
        });
        JointDistribution::from_terms(terms).expect("convex combination stays in [0, 1]")
    }
}

/// Index of the component the source uses for the next block.
pub fn draw_block_state(m: &MixtureStrategy, rng: &mut SimRng) -> usize {
    m.sampler.draw(rng)
}

/// Exact sampler for a finite law with rational weights: one uniform integer
/// draw over the common denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteSampler {
    cumulative: Vec<u64>,
    total: u64,
}

impl DiscreteSampler {
    /// Weights must be non-negative, sum to 1, and have a common denominator
    /// that fits in `u64`. Zero weights are allowed and never drawn.
    pub fn new(weights: &[Rational]) -> Result<Self> {
        let bad = |why: &str| Error::InvalidMixture(why.into());
        if weights.is_empty() {
            return Err(bad("empty law"));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(bad("negative weight"));
        }
        if !weights.iter().sum::<Rational>().is_one() {
            return Err(bad("weights do not sum to 1"));
        }
        let lcm = weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let total = lcm
            .to_u64()
            .ok_or_else(|| bad("common denominator exceeds 64 bits"))?;
        let mut acc = 0u64;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += (w.numer() * (&lcm / w.denom()))
                    .to_u64()
                    .expect("bounded by lcm");
                acc
            })
            .collect();
        Ok(Self { cumulative, total })
    }

    pub fn draw(&self, rng: &mut SimRng) -> usize {
        let u = rng.gen_range(0..self.total);
        self.cumulative.partition_point(|&c| c <= u)
    }
}
