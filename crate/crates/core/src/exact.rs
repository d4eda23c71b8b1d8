//! Exact cycle statistics of mixture strategies, and the binomial tail used
//! by the cycle-counting test.
//!
//! A cycle measures four independent blocks, one per setting pair, each in a
//! component drawn from the mixture. With `k` components there are `k^4`
//! equally structured [`CycleAssignment`]s; the functions here enumerate all
//! of them in exact arithmetic.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};

use crate::ch::SettingPair;
use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64, Rational};
use crate::sim::{fraction, ExperimentResult};
use crate::strategy::MixtureStrategy;

/// Which mixture component each setting pair's block was measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CycleAssignment {
    /// Indexed in `SettingPair::ALL` order.
    pub component_per_slot: [usize; 4],
}

impl CycleAssignment {
    pub fn component(&self, s: SettingPair) -> usize {
        self.component_per_slot[s.index()]
    }

    /// Probability of this assignment.
    pub fn weight(&self, m: &MixtureStrategy) -> Rational {
        self.component_per_slot
            .iter()
            .map(|&i| &m.components()[i].weight)
            .product()
    }

    /// CH statistic of a cycle measured under this assignment.
    pub fn ch(&self, m: &MixtureStrategy) -> Rational {
        let c = m.components();
        let mut v = c[self.component_per_slot[0]].distribution.p_pp_ab().clone();
        for s in &SettingPair::ALL[1..] {
            v -= c[self.component(*s)].distribution.term(*s);
        }
        v
    }
}

/// All `k^4` assignments in lexicographic order (ab slot most significant).
pub fn assignments(k: usize) -> impl Iterator<Item = CycleAssignment> {
    let total = k.pow(4);
    (0..total).map(move |mut n| {
        let mut slots = [0; 4];
        for slot in slots.iter_mut().rev() {
            *slot = n % k;
            n /= k;
        }
        CycleAssignment {
            component_per_slot: slots,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactReport {
    pub violation_probability: Rational,
    pub expected_ch: Rational,
    pub assignment_count: u64,
}

/// The mixture's terms and weights scaled to common denominators.
struct IntegerForm {
    /// `[ab, ab', a'b, a'b']` term numerators per component, over `term_den`.
    terms: Vec<[BigInt; 4]>,
    term_den: BigInt,
    weights: Vec<BigInt>,
    weight_den: BigInt,
}

impl IntegerForm {
    fn new(m: &MixtureStrategy) -> Self {
        let comps = m.components();
        let term_den = comps
            .iter()
            .flat_map(|c| c.distribution.terms().iter())
            .fold(BigInt::one(), |acc, t| acc.lcm(t.denom()));
        let weight_den = comps
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.weight.denom()));
        let scale = |r: &Rational, den: &BigInt| r.numer() * (den / r.denom());
        Self {
            terms: comps
                .iter()
                .map(|c| {
                    c.distribution
                        .terms()
                        .each_ref()
                        .map(|t| scale(t, &term_den))
                })
                .collect(),
            weights: comps
                .iter()
                .map(|c| scale(&c.weight, &weight_den))
                .collect(),
            term_den,
            weight_den,
        }
    }

    /// Visits every assignment with its integer weight and integer CH.
    fn for_each(&self, mut f: impl FnMut(&BigInt, BigInt)) {
        let k = self.terms.len();
        for a in 0..k {
            for b in 0..k {
                let wab = &self.weights[a] * &self.weights[b];
                let chab = &self.terms[a][0] - &self.terms[b][1];
                for c in 0..k {
                    let wabc = &wab * &self.weights[c];
                    let chabc = &chab - &self.terms[c][2];
                    for d in 0..k {
                        f(&(&wabc * &self.weights[d]), &chabc - &self.terms[d][3]);
                    }
                }
            }
        }
    }

    fn weight_total(&self) -> BigInt {
        Pow::pow(&self.weight_den, 4u32)
    }
}

/// Exact probability that a cycle's CH estimate is strictly positive.
pub fn cycle_violation_prob(m: &MixtureStrategy) -> Rational {
    let form = IntegerForm::new(m);
    let mut mass = BigInt::zero();
    form.for_each(|w, ch| {
        if ch.is_positive() {
            mass += w;
        }
    });
    Rational::new(mass, form.weight_total())
}

/// Exact expectation of a cycle's CH estimate.
pub fn expected_cycle_ch(m: &MixtureStrategy) -> Rational {
    let form = IntegerForm::new(m);
    let mut acc = BigInt::zero();
    form.for_each(|w, ch| acc += w * ch);
    Rational::new(acc, form.weight_total() * &form.term_den)
}

pub fn exact_report(m: &MixtureStrategy) -> ExactReport {
    ExactReport {
        violation_probability: cycle_violation_prob(m),
        expected_ch: expected_cycle_ch(m),
        assignment_count: (m.len() as u64).pow(4),
    }
}

/// Exact `P[X >= v]` for `X ~ Binomial(c, p0)`.
pub fn binomial_tail_exact(v: u64, c: u64, p0: &Rational) -> Result<Rational> {
    if v > c {
        return Err(Error::InvalidConfig(alloc::format!(
            "v = {v} exceeds c = {c}"
        )));
    }
    if !p0.is_positive() || *p0 >= Rational::one() {
        return Err(Error::InvalidConfig(alloc::format!(
            "null probability {} not in (0, 1)",
            format_rational(p0)
        )));
    }
    let a = p0.numer();
    let den = p0.denom();
    let q = den - a;
    // Term x is C(c, x) a^x q^(c-x); walk x downward from c so each step is
    // one multiply by q, one by the binomial ratio, one exact divide by a.
    let mut term = Pow::pow(a, c);
    let mut sum = BigInt::zero();
    let mut x = c;
    loop {
        sum += &term;
        if x == v {
            break;
        }
        // C(c, x-1) / C(c, x) = x / (c - x + 1)
        term = term * &q * BigInt::from(x) / (a * BigInt::from(c - x + 1));
        x -= 1;
    }
    Ok(Rational::new(sum, Pow::pow(den, c)))
}

/// One-sided upper-tail p-value `P[X >= v]`, `X ~ Binomial(c, p0)`, summed
/// exactly and rounded once to `f64`.
pub fn binomial_tail_p(v: u64, c: u64, p0: &Rational) -> Result<f64> {
    binomial_tail_exact(v, c, p0).map(|r| to_f64(&r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct McComparison {
    pub violations: u64,
    pub cycles: u64,
    pub observed: Rational,
    pub exact: Rational,
    /// `sqrt(p (1 - p) / cycles)` at the exact probability.
    pub standard_error: f64,
    /// `(observed - exact) / standard_error`; infinite when the exact law is
    /// degenerate and the observation disagrees with it.
    pub z: f64,
}

pub fn compare_counts(violations: u64, cycles: u64, exact: &Rational) -> Result<McComparison> {
    let observed = fraction(violations, cycles)?;
    let p = to_f64(exact);
    let standard_error = libm::sqrt(p * (1.0 - p) / cycles as f64);
    let diff = to_f64(&(&observed - exact));
    let z = if diff == 0.0 {
        0.0
    } else {
        diff / standard_error
    };
    Ok(McComparison {
        violations,
        cycles,
        observed,
        exact: exact.clone(),
        standard_error,
        z,
    })
}

/// Compares a simulated run of `m` with its exact violation probability.
pub fn compare_mc_exact(result: &ExperimentResult, m: &MixtureStrategy) -> Result<McComparison> {
    compare_counts(
        result.violation_count,
        result.cycle_count,
        &cycle_violation_prob(m),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ch::JointDistribution;
    use crate::rational::{int, ratio};
    use crate::strategy::{heavy_state, light_state, medium_state};

    fn three_state() -> MixtureStrategy {
        MixtureStrategy::from_pairs([
            (heavy_state(), ratio(1, 2)),
            (medium_state(), ratio(1, 4)),
            (light_state(), ratio(1, 4)),
        ])
        .unwrap()
    }

    #[test]
    fn three_state_is_149_over_256() {
        let r = exact_report(&three_state());
        assert_eq!(r.violation_probability, ratio(149, 256));
        assert_eq!(r.expected_ch, int(0));
        assert_eq!(r.assignment_count, 81);
    }

    #[test]
    fn single_saturating_component() {
        let m = MixtureStrategy::from_pairs([(medium_state(), int(1))]).unwrap();
        assert_eq!(cycle_violation_prob(&m), int(0));
        assert_eq!(expected_cycle_ch(&m), int(0));
    }

    #[test]
    fn single_strict_component() {
        let d = JointDistribution::new(ratio(1, 4), ratio(1, 2), int(0), int(0)).unwrap();
        let m = MixtureStrategy::from_pairs([(d, int(1))]).unwrap();
        assert_eq!(expected_cycle_ch(&m), ratio(-1, 4));
    }

    #[test]
    fn assignment_enumeration_order() {
        let all: Vec<_> = assignments(3).collect();
        assert_eq!(all.len(), 81);
        assert_eq!(all[0].component_per_slot, [0, 0, 0, 0]);
        assert_eq!(all[1].component_per_slot, [0, 0, 0, 1]);
        assert_eq!(all[80].component_per_slot, [2, 2, 2, 2]);
    }

    #[test]
    fn masses_partition_unity() {
        let m = three_state();
        let (mut viol, mut rest) = (Rational::zero(), Rational::zero());
        for a in assignments(m.len()) {
            if a.ch(&m).is_positive() {
                viol += a.weight(&m);
            } else {
                rest += a.weight(&m);
            }
        }
        assert_eq!(viol, cycle_violation_prob(&m));
        assert_eq!(viol + rest, int(1));
    }

    #[test]
    fn tail_edges() {
        assert_eq!(binomial_tail_p(0, 10, &ratio(1, 2)).unwrap(), 1.0);
        assert_eq!(
            binomial_tail_exact(10, 10, &ratio(1, 2)).unwrap(),
            ratio(1, 1024)
        );
        assert_eq!(
            binomial_tail_exact(2, 3, &ratio(1, 3)).unwrap(),
            ratio(7, 27)
        );
        assert!(binomial_tail_p(11, 10, &ratio(1, 2)).is_err());
        assert!(binomial_tail_p(1, 10, &int(0)).is_err());
        assert!(binomial_tail_p(1, 10, &int(1)).is_err());
    }

    #[test]
    fn tail_values_for_reported_counts() {
        // Frozen from an independent Fraction-based tail sum.
        let half = binomial_tail_p(394, 650, &ratio(1, 2)).unwrap();
        assert!((half / 3.462594975340502e-08 - 1.0).abs() < 1e-12, "{half}");
        let alt = binomial_tail_p(394, 650, &ratio(149, 256)).unwrap();
        assert!((alt / 0.11347933391610046 - 1.0).abs() < 1e-12, "{alt}");
    }

    #[test]
    fn comparison_z() {
        let p = ratio(149, 256);
        let c = compare_counts(394, 650, &p).unwrap();
        assert!((c.z - 1.2468).abs() < 1e-3, "{}", c.z);
        let same = compare_counts(149, 256, &p).unwrap();
        assert_eq!(same.z, 0.0);
        assert!(compare_counts(0, 0, &p).is_err());
    }
}
