//! Deterministic state tables: the LHV's per-trial program for one block.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use crate::ch::{
    ch_event, satisfies_ch, JointDistribution, Outcome, OutcomeCounts, OutcomePair, SettingPair,
};
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

use Outcome::{Plus as P, Zero as Z};

/// Predetermined local outcomes of one trial for each possible local setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialAssignment {
    pub out_a: Outcome,
    pub out_ap: Outcome,
    pub out_b: Outcome,
    pub out_bp: Outcome,
}

impl TrialAssignment {
    pub const fn new(out_a: Outcome, out_ap: Outcome, out_b: Outcome, out_bp: Outcome) -> Self {
        Self {
            out_a,
            out_ap,
            out_b,
            out_bp,
        }
    }

    pub fn readout(&self, s: SettingPair) -> OutcomePair {
        let alice = match s.alice {
            crate::ch::Choice::Unprimed => self.out_a,
            crate::ch::Choice::Primed => self.out_ap,
        };
        let bob = match s.bob {
            crate::ch::Choice::Unprimed => self.out_b,
            crate::ch::Choice::Primed => self.out_bp,
        };
        OutcomePair(alice, bob)
    }
}

// ++|ab together with exactly one negative-term event.
const PP_AB_WITH_P0_ABP: TrialAssignment = TrialAssignment::new(P, P, P, Z);
const PP_AB_WITH_0P_APB: TrialAssignment = TrialAssignment::new(P, Z, P, P);
const PP_AB_WITH_PP_APBP: TrialAssignment = TrialAssignment::new(P, P, P, P);
// A single negative-term event and nothing else.
const PAD_P0_ABP: TrialAssignment = TrialAssignment::new(P, P, Z, Z);
const PAD_0P_APB: TrialAssignment = TrialAssignment::new(Z, Z, P, P);
const PAD_PP_APBP: TrialAssignment = TrialAssignment::new(Z, P, Z, P);
const INERT: TrialAssignment = TrialAssignment::new(Z, Z, Z, Z);

/// Target counts of the four CH events in a block of `n` trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChCountSpec {
    pub c_pp_ab: u64,
    pub c_p0_abp: u64,
    pub c_0p_apb: u64,
    pub c_pp_apbp: u64,
    pub n: u64,
}

impl ChCountSpec {
    pub fn new(c_pp_ab: u64, c_p0_abp: u64, c_0p_apb: u64, c_pp_apbp: u64, n: u64) -> Self {
        Self {
            c_pp_ab,
            c_p0_abp,
            c_0p_apb,
            c_pp_apbp,
            n,
        }
    }

    fn negative_total(&self) -> Option<u64> {
        self.c_p0_abp
            .checked_add(self.c_0p_apb)?
            .checked_add(self.c_pp_apbp)
    }

    pub fn validate(&self) -> Result<()> {
        let infeasible = |why: &str| Err(Error::InfeasibleCounts(format!("{self:?}: {why}")));
        if self.n == 0 {
            return infeasible("block length must be positive");
        }
        if self.c_pp_ab > self.n {
            return infeasible("++|ab count exceeds block length");
        }
        let Some(neg) = self.negative_total().filter(|&t| t <= self.n) else {
            return infeasible("negative-term counts exceed block length");
        };
        if self.c_pp_ab > neg {
            return infeasible("++|ab count exceeds the sum of negative-term counts");
        }
        Ok(())
    }
}

/// An ordered block of trial assignments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateTable {
    trials: Vec<TrialAssignment>,
}

impl StateTable {
    pub fn new(trials: Vec<TrialAssignment>) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::InvalidConfig(
                "state table must contain at least one trial".into(),
            ));
        }
        Ok(Self { trials })
    }

    pub fn trials(&self) -> &[TrialAssignment] {
        &self.trials
    }

    pub fn len(&self) -> u64 {
        self.trials.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }
}

/// Builds a table whose measured CH-event counts equal `spec` exactly.
///
/// Every `++|ab` trial also carries one negative-term event, consumed in the
/// order `+0|ab'`, `0+|a'b`, `++|a'b'`; leftover negative counts get
/// single-event padding trials and the rest of the block is all-zero.
pub fn build_state_table(spec: &ChCountSpec) -> Result<StateTable> {
    spec.validate()?;
    let mut trials = Vec::with_capacity(spec.n as usize);
    let mut emit = |kind: TrialAssignment, count: u64| trials.extend((0..count).map(|_| kind));

    let with_p0 = spec.c_pp_ab.min(spec.c_p0_abp);
    let mut remaining = spec.c_pp_ab - with_p0;
    let with_0p = remaining.min(spec.c_0p_apb);
    remaining -= with_0p;
    // Feasibility guarantees remaining <= c_pp_apbp here.
    let with_pp = remaining;

    emit(PP_AB_WITH_P0_ABP, with_p0);
    emit(PP_AB_WITH_0P_APB, with_0p);
    emit(PP_AB_WITH_PP_APBP, with_pp);
    emit(PAD_P0_ABP, spec.c_p0_abp - with_p0);
    emit(PAD_0P_APB, spec.c_0p_apb - with_0p);
    emit(PAD_PP_APBP, spec.c_pp_apbp - with_pp);
    // Every non-inert trial carries exactly one negative-term event.
    let used = spec.negative_total().expect("validated");
    emit(INERT, spec.n - used);

    StateTable::new(trials)
}

/// Reads the two selected columns of every trial.
pub fn measure_block(t: &StateTable, s: SettingPair) -> OutcomeCounts {
    let mut counts = [0u64; 4];
    for trial in t.trials() {
        counts[trial.readout(s).index()] += 1;
    }
    OutcomeCounts::new(counts).expect("state tables are nonempty")
}

/// Exact empirical frequencies of the four CH events.
pub fn table_distribution(t: &StateTable) -> JointDistribution {
    let terms = SettingPair::ALL.map(|s| measure_block(t, s).frequency(ch_event(s)));
    JointDistribution::from_terms(terms).expect("frequencies lie in [0, 1]")
}

/// Realizes a CH-satisfying distribution as a table of `n` trials.
pub fn realize_mixture_component(d: &JointDistribution, n: u64) -> Result<StateTable> {
    if n == 0 {
        return Err(Error::InvalidConfig("block length must be positive".into()));
    }
    if !satisfies_ch(d) {
        return Err(Error::ViolatesCh(format_rational(&crate::ch::ch_value(d))));
    }
    let [pp, p0, zp, pp2] = d.terms();
    let (c_pp_ab, c_p0_abp) = (scaled_count(pp, n)?, scaled_count(p0, n)?);
    let (c_0p_apb, c_pp_apbp) = (scaled_count(zp, n)?, scaled_count(pp2, n)?);
    build_state_table(&ChCountSpec {
        c_pp_ab,
        c_p0_abp,
        c_0p_apb,
        c_pp_apbp,
        n,
    })
}

fn scaled_count(p: &Rational, n: u64) -> Result<u64> {
    let n_big = BigInt::from(n);
    if !n_big.is_multiple_of(p.denom()) {
        return Err(Error::Denominator {
            den: p.denom().to_str_radix(10),
            block_length: n,
        });
    }
    let c = p.numer() * (n_big / p.denom());
    if c.is_negative() {
        return Err(Error::ProbabilityOutOfRange(format_rational(p)));
    }
    c.to_u64()
        .ok_or_else(|| Error::ProbabilityOutOfRange(format_rational(p)))
}
