//! Search over saturating "deficit" mixtures for high cycle-violation
//! probability.
//!
//! Component `i` of a deficit family has `P(++|ab) = ρ − dᵢ·ε` and each
//! negative term equal to a third of that, so every component saturates CH.
//! A cycle then violates iff the deficits of the `ab'`, `a'b`, `a'b'` slots
//! sum to more than three times the deficit of the `ab` slot: the objective
//! depends only on the weights and on comparisons between deficits, never on
//! `ρ` or `ε`.
//!
//! When every deficit exceeds three times the previous one, a cycle violates
//! exactly when some non-`ab` slot holds a later component than the `ab`
//! slot, which gives the ceiling `Σ wᵢ (1 − Fᵢ³)` with `Fᵢ` the cumulative
//! weight.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::ch::JointDistribution;
use crate::error::{Error, Result};
use crate::exact::cycle_violation_prob;
use crate::rational::{format_rational, int, Rational};
use crate::rng::seeded;
use crate::strategy::MixtureStrategy;

/// Deficits of the four-component ρ/ε family, in units of ε.
pub const RHO_EPS_DEFICITS: [i64; 4] = [0, 3, 12, 39];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoEpsFamily {
    pub rho: Rational,
    pub eps: Rational,
    pub weights: [Rational; 4],
}

impl RhoEpsFamily {
    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidFamily(why.into()));
        if !self.rho.is_positive() || self.rho > Rational::one() {
            return bad("rho must lie in (0, 1]");
        }
        if !self.eps.is_positive() || self.eps >= &self.rho / int(40) {
            return bad("eps must lie in (0, rho/40)");
        }
        check_weights(&self.weights)
    }

    pub fn to_general(&self) -> GeneralDeficitFamily {
        GeneralDeficitFamily {
            deficits: RHO_EPS_DEFICITS.iter().map(|&d| int(d)).collect(),
            weights: self.weights.to_vec(),
            rho: self.rho.clone(),
            eps_unit: self.eps.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralDeficitFamily {
    pub deficits: Vec<Rational>,
    pub weights: Vec<Rational>,
    pub rho: Rational,
    pub eps_unit: Rational,
}

impl GeneralDeficitFamily {
    pub fn k(&self) -> usize {
        self.deficits.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidFamily(why.into()));
        if self.deficits.is_empty() || self.deficits.len() != self.weights.len() {
            return bad("need one weight per deficit and at least one component");
        }
        if !self.deficits[0].is_zero() {
            return bad("first deficit must be 0");
        }
        if self.deficits.windows(2).any(|w| w[1] < w[0]) {
            return bad("deficits must be non-decreasing");
        }
        if self.eps_unit.is_negative() {
            return bad("eps_unit must be non-negative");
        }
        if !self.rho.is_positive() || self.rho > Rational::one() {
            return bad("rho must lie in (0, 1]");
        }
        let last = self.deficits.last().expect("nonempty");
        if (&self.rho - last * &self.eps_unit).is_negative() {
            return bad("largest deficit drives P(++|ab) below 0");
        }
        check_weights(&self.weights)
    }

    pub fn component(&self, i: usize) -> JointDistribution {
        let pos = &self.rho - &self.deficits[i] * &self.eps_unit;
        let neg = &pos / int(3);
        JointDistribution::new(pos, neg.clone(), neg.clone(), neg)
            .expect("validated family stays in [0, 1]")
    }
}

fn check_weights(w: &[Rational]) -> Result<()> {
    if w.iter().any(|x| x.is_negative()) {
        return Err(Error::InvalidFamily("negative weight".into()));
    }
    let total: Rational = w.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidFamily(format!(
            "weights sum to {}",
            format_rational(&total)
        )));
    }
    Ok(())
}

/// Builds the four-component mixture; zero-weight components are dropped.
pub fn family_to_mixture(f: &RhoEpsFamily) -> Result<MixtureStrategy> {
    f.validate()?;
    general_to_mixture(&f.to_general())
}

pub fn general_to_mixture(f: &GeneralDeficitFamily) -> Result<MixtureStrategy> {
    f.validate()?;
    MixtureStrategy::from_pairs(
        (0..f.k())
            .filter(|&i| f.weights[i].is_positive())
            .map(|i| (f.component(i), f.weights[i].clone())),
    )
}

pub fn evaluate(f: &RhoEpsFamily) -> Result<Rational> {
    family_to_mixture(f).map(|m| cycle_violation_prob(&m))
}

pub fn evaluate_general(f: &GeneralDeficitFamily) -> Result<Rational> {
    general_to_mixture(f).map(|m| cycle_violation_prob(&m))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    /// Weights on the coarse grid are multiples of `1/grid_resolution`.
    pub grid_resolution: u32,
    /// Number of step halvings in the pattern search.
    pub refinement_steps: u32,
    /// Picks the grid subsample when the full grid exceeds `max_grid_points`.
    pub seed: u64,
    pub max_grid_points: u64,
    /// Pins the deficit ladder (integers, first entry 0); only weights move.
    pub fixed_deficits: Option<Vec<u64>>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 20,
            refinement_steps: 8,
            seed: 0,
            max_grid_points: 200_000,
            fixed_deficits: None,
        }
    }
}

/// A search point: integer weights over `weight_den` and integer deficits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Candidate {
    pub weights: Vec<u64>,
    pub weight_den: u64,
    pub deficits: Vec<u64>,
}

impl Candidate {
    /// Exact family with `ρ = 1/2` and `ε` chosen so the largest deficit
    /// leaves `P(++|ab) = ρ/2`.
    pub fn to_family(&self) -> GeneralDeficitFamily {
        let rho = Rational::new(1.into(), 2.into());
        let g = self.deficits.iter().fold(0u64, |g, &d| g.gcd(&d)).max(1);
        let deficits: Vec<u64> = self.deficits.iter().map(|&d| d / g).collect();
        let top = deficits.iter().copied().max().unwrap_or(0).max(1);
        let eps_unit = &rho / Rational::from_integer(BigInt::from(top) * 2);
        GeneralDeficitFamily {
            deficits: deficits
                .iter()
                .map(|&d| Rational::from_integer(d.into()))
                .collect(),
            weights: self
                .weights
                .iter()
                .map(|&w| Rational::new(w.into(), self.weight_den.into()))
                .collect(),
            rho,
            eps_unit,
        }
    }

    /// Numerator of the violation probability over `weight_den^4`.
    fn violation_mass(&self) -> u128 {
        let k = self.weights.len();
        let w = |i: usize| self.weights[i] as u128;
        let d = &self.deficits;
        let mut mass = 0u128;
        for a in 0..k {
            let threshold = 3 * d[a] as u128;
            for b in 0..k {
                for c in 0..k {
                    let partial = d[b] as u128 + d[c] as u128;
                    let wabc = w(a) * w(b) * w(c);
                    for (e, &de) in d.iter().enumerate() {
                        if partial + de as u128 > threshold {
                            mass += wabc * w(e);
                        }
                    }
                }
            }
        }
        mass
    }

    pub fn probability(&self) -> Rational {
        let den = BigInt::from(self.weight_den);
        Rational::new(self.violation_mass().into(), den.pow(4))
    }

    fn refine(&mut self, scale_deficits: bool) {
        self.weights.iter_mut().for_each(|w| *w *= 2);
        self.weight_den *= 2;
        if scale_deficits {
            self.deficits.iter_mut().for_each(|d| *d *= 2);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimizeOutcome {
    pub best: Candidate,
    pub family: GeneralDeficitFamily,
    pub probability: Rational,
    pub evaluations: u64,
    /// Incumbent probability after the grid stage and after each refinement.
    pub history: Vec<Rational>,
}

/// Grid plus pattern search over `k`-component deficit families.
pub fn optimize_deficit_family(k: usize, cfg: &SearchConfig) -> Result<OptimizeOutcome> {
    optimize_deficit_family_with(k, cfg, |_, _| {})
}

/// As [`optimize_deficit_family`], calling `observe` on every evaluated
/// candidate with its exact probability.
pub fn optimize_deficit_family_with(
    k: usize,
    cfg: &SearchConfig,
    mut observe: impl FnMut(&Candidate, &Rational),
) -> Result<OptimizeOutcome> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if cfg.grid_resolution < k as u32 {
        return Err(Error::InvalidConfig(format!(
            "grid_resolution must be at least k = {k}"
        )));
    }
    if cfg.refinement_steps > 24 {
        return Err(Error::InvalidConfig(
            "refinement_steps above 24 overflows the integer grid".into(),
        ));
    }
    let ladders = match &cfg.fixed_deficits {
        Some(d) => {
            if d.len() != k || d.first() != Some(&0) || d.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidConfig(
                    "fixed deficits must be k non-decreasing values from 0".into(),
                ));
            }
            vec![d.clone()]
        }
        None => deficit_ladders(k),
    };
    let compositions = compositions(cfg.grid_resolution as u64, k);

    let mut evaluations = 0u64;
    let mut evaluate = |c: &Candidate| {
        evaluations += 1;
        let mass = c.violation_mass();
        observe(c, &c.probability());
        mass
    };

    // Coarse grid.
    let total = compositions.len() as u64 * ladders.len() as u64;
    let mut incumbent: Option<(Candidate, u128)> = None;
    let mut consider =
        |weights: &Vec<u64>, deficits: &Vec<u64>, eval: &mut dyn FnMut(&Candidate) -> u128| {
            let c = Candidate {
                weights: weights.clone(),
                weight_den: cfg.grid_resolution as u64,
                deficits: deficits.clone(),
            };
            let m = eval(&c);
            if incumbent.as_ref().map_or(true, |(_, best)| m > *best) {
                incumbent = Some((c, m));
            }
        };
    if total <= cfg.max_grid_points {
        for d in &ladders {
            for w in &compositions {
                consider(w, d, &mut evaluate);
            }
        }
    } else {
        let mut rng = seeded(cfg.seed);
        for _ in 0..cfg.max_grid_points {
            let i = rng.gen_range(0..total);
            let (d, w) = (
                (i / compositions.len() as u64) as usize,
                (i % compositions.len() as u64) as usize,
            );
            consider(&compositions[w], &ladders[d], &mut evaluate);
        }
    }
    let (mut best, mut best_mass) = incumbent.expect("grid is nonempty");
    let mut history = vec![best.probability()];

    // Pattern search: poll unit moves, take the best strict improvement,
    // halve the step once no move improves.
    let move_deficits = cfg.fixed_deficits.is_none();
    for step in 0..=cfg.refinement_steps {
        if step > 0 {
            best.refine(move_deficits);
            best_mass <<= 4;
        }
        loop {
            let mut improved: Option<(Candidate, u128)> = None;
            for cand in neighbours(&best, move_deficits) {
                let m = evaluate(&cand);
                if m > improved.as_ref().map_or(best_mass, |(_, im)| *im) {
                    improved = Some((cand, m));
                }
            }
            match improved {
                Some((c, m)) => {
                    best = c;
                    best_mass = m;
                }
                None => break,
            }
        }
        history.push(best.probability());
    }

    let family = best.to_family();
    let probability = best.probability();
    Ok(OptimizeOutcome {
        best,
        family,
        probability,
        evaluations,
        history,
    })
}

fn neighbours(c: &Candidate, move_deficits: bool) -> Vec<Candidate> {
    let k = c.weights.len();
    let mut out = Vec::new();
    for from in 0..k {
        for to in 0..k {
            if from != to && c.weights[from] > 1 {
                let mut n = c.clone();
                n.weights[from] -= 1;
                n.weights[to] += 1;
                out.push(n);
            }
        }
    }
    if move_deficits {
        for i in 1..k {
            let upper = c.deficits.get(i + 1).copied().unwrap_or(u64::MAX / 16);
            if c.deficits[i] < upper {
                let mut n = c.clone();
                n.deficits[i] += 1;
                out.push(n);
            }
            if c.deficits[i] > c.deficits[i - 1] {
                let mut n = c.clone();
                n.deficits[i] -= 1;
                out.push(n);
            }
        }
    }
    out
}

/// Successive deficit ratios on the coarse grid, in quarters.
const RATIO_QUARTERS: [u64; 10] = [6, 8, 10, 12, 14, 16, 18, 20, 22, 24];

/// Ladders `(0, 4^(k-2), 4^(k-2)·r₁, …)` with each ratio from
/// `RATIO_QUARTERS / 4`, all scaled to integers.
fn deficit_ladders(k: usize) -> Vec<Vec<u64>> {
    if k == 1 {
        return vec![vec![0]];
    }
    let free = k - 2;
    let base = 4u64.pow(free as u32);
    let mut out = Vec::new();
    let combos = RATIO_QUARTERS.len().pow(free as u32);
    for mut code in 0..combos {
        let mut ladder = vec![0, base];
        let mut current = base;
        for _ in 0..free {
            current = current * RATIO_QUARTERS[code % RATIO_QUARTERS.len()] / 4;
            code /= RATIO_QUARTERS.len();
            ladder.push(current);
        }
        out.push(ladder);
    }
    out
}

/// All ways of writing `total` as `k` positive parts.
fn compositions(total: u64, k: usize) -> Vec<Vec<u64>> {
    fn rec(remaining: u64, slots: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=remaining - (slots as u64 - 1) {
            prefix.push(first);
            rec(remaining - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, k, &mut Vec::with_capacity(k), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ch::is_saturating;
    use crate::rational::ratio;

    fn four_state_weights() -> [Rational; 4] {
        [ratio(2, 5), ratio(1, 4), ratio(1, 5), ratio(3, 20)]
    }

    #[test]
    fn family_components() {
        let f = RhoEpsFamily {
            rho: ratio(1, 2),
            eps: ratio(1, 100),
            weights: four_state_weights(),
        };
        let m = family_to_mixture(&f).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m
            .components()
            .iter()
            .all(|c| is_saturating(&c.distribution)));
        assert_eq!(
            m.components()[3].distribution.p_pp_ab(),
            &(ratio(1, 2) - ratio(39, 100))
        );
        assert_eq!(
            m.components()[1].distribution.p_p0_abp(),
            &(ratio(1, 6) - ratio(1, 100))
        );

        let g = RhoEpsFamily {
            rho: ratio(2, 5),
            eps: ratio(1, 200),
            weights: four_state_weights(),
        };
        let m = family_to_mixture(&g).unwrap();
        assert_eq!(m.components()[3].distribution.p_pp_ab(), &ratio(41, 200));
    }

    #[test]
    fn tiny_eps_components_nearly_equal() {
        let f = RhoEpsFamily {
            rho: ratio(1, 2),
            eps: ratio(1, 1_000_000),
            weights: four_state_weights(),
        };
        let m = family_to_mixture(&f).unwrap();
        let first = &m.components()[0].distribution;
        let tol = ratio(4 * 39, 1_000_000);
        for c in m.components() {
            for (a, b) in c.distribution.terms().iter().zip(first.terms()) {
                assert!((a - b).abs() <= tol);
            }
        }
    }

    #[test]
    fn family_validation() {
        let w = four_state_weights();
        let bad = [
            RhoEpsFamily {
                rho: ratio(1, 2),
                eps: ratio(1, 80),
                weights: w.clone(),
            },
            RhoEpsFamily {
                rho: ratio(1, 2),
                eps: int(0),
                weights: w.clone(),
            },
            RhoEpsFamily {
                rho: int(0),
                eps: ratio(1, 100),
                weights: w.clone(),
            },
            RhoEpsFamily {
                rho: ratio(3, 2),
                eps: ratio(1, 100),
                weights: w,
            },
            RhoEpsFamily {
                rho: ratio(1, 2),
                eps: ratio(1, 100),
                weights: [ratio(1, 2), int(0), int(0), int(0)],
            },
        ];
        for f in bad {
            assert!(family_to_mixture(&f).is_err(), "{f:?}");
        }
    }

    #[test]
    fn evaluate_four_state_point() {
        let f = RhoEpsFamily {
            rho: ratio(1, 2),
            eps: ratio(1, 100),
            weights: four_state_weights(),
        };
        let p = evaluate(&f).unwrap();
        assert_eq!(p, ratio(101_267, 160_000));
        assert!(p > ratio(63, 100));
    }

    #[test]
    fn single_component_limit() {
        let f = RhoEpsFamily {
            rho: ratio(1, 2),
            eps: ratio(1, 100),
            weights: [int(1), int(0), int(0), int(0)],
        };
        assert_eq!(evaluate(&f).unwrap(), int(0));
    }

    #[test]
    fn three_state_embeds_in_deficit_family() {
        // (24, 18, 3)/72 are ρ − dε with ρ = 1/3, ε = 1/72, d = (0, 6, 21).
        let f = GeneralDeficitFamily {
            deficits: [0, 6, 21].map(int).to_vec(),
            weights: [ratio(1, 2), ratio(1, 4), ratio(1, 4)].to_vec(),
            rho: ratio(1, 3),
            eps_unit: ratio(1, 72),
        };
        assert_eq!(f.component(1), crate::strategy::medium_state());
        assert_eq!(evaluate_general(&f).unwrap(), ratio(149, 256));
    }

    #[test]
    fn candidate_probability_matches_enumeration() {
        let c = Candidate {
            weights: vec![8, 5, 4, 3],
            weight_den: 20,
            deficits: vec![0, 3, 12, 39],
        };
        assert_eq!(c.probability(), ratio(101_267, 160_000));
        assert_eq!(evaluate_general(&c.to_family()).unwrap(), c.probability());
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(20, 4).len(), 969);
        assert_eq!(compositions(3, 3), vec![vec![1, 1, 1]]);
        assert_eq!(deficit_ladders(4).len(), 100);
        assert!(deficit_ladders(4)
            .iter()
            .all(|l| l.windows(2).all(|w| w[0] <= w[1])));
    }

    #[test]
    fn k_one_is_zero() {
        let out = optimize_deficit_family(1, &SearchConfig::default()).unwrap();
        assert_eq!(out.probability, int(0));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(optimize_deficit_family(0, &SearchConfig::default()).is_err());
        let cfg = SearchConfig {
            grid_resolution: 2,
            ..Default::default()
        };
        assert!(optimize_deficit_family(4, &cfg).is_err());
        let cfg = SearchConfig {
            fixed_deficits: Some(vec![1, 2]),
            ..Default::default()
        };
        assert!(optimize_deficit_family(2, &cfg).is_err());
    }
}
