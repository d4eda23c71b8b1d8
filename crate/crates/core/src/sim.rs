//! Randomized-settings block experiments and cycle aggregation.
//!
//! Each block draws a setting pair, asks the strategy for that block's
//! state, and records the outcome counts. Blocks are then grouped into
//! cycles holding one block per setting pair, and each cycle's empirical CH
//! estimate is flagged as a violation when strictly positive.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::ch::{ch_event, ch_value, JointDistribution, OutcomeCounts, SettingPair};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::rng::{seeded, SimRng};
use crate::strategy::{
    draw_block_state, measure_block, realize_mixture_component, signaling_block_outcomes,
    AdaptiveType2Strategy, MixtureStrategy, SignalingType3Config,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CyclePolicy {
    /// One open cycle; repeats of an already-filled setting are dropped.
    #[default]
    DiscardDuplicates,
    /// The k-th cycle takes the k-th block of every setting.
    QueuePerSetting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SettingsLaw {
    /// Independent uniform draw over the four setting pairs per block.
    #[default]
    Uniform,
    /// `ab, ab', a'b, a'b', ab, ...` regardless of the seed.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub num_blocks: u64,
    pub trials_per_block: u64,
    pub seed: u64,
    pub cycle_policy: CyclePolicy,
    pub settings_law: SettingsLaw,
}

impl ExperimentConfig {
    pub fn new(num_blocks: u64, trials_per_block: u64, seed: u64) -> Self {
        Self {
            num_blocks,
            trials_per_block,
            seed,
            cycle_policy: CyclePolicy::default(),
            settings_law: SettingsLaw::default(),
        }
    }

    pub fn with_policy(mut self, policy: CyclePolicy) -> Self {
        self.cycle_policy = policy;
        self
    }

    pub fn with_settings_law(mut self, law: SettingsLaw) -> Self {
        self.settings_law = law;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_blocks == 0 {
            return Err(Error::InvalidConfig("num_blocks must be positive".into()));
        }
        if self.trials_per_block == 0 {
            return Err(Error::InvalidConfig(
                "trials_per_block must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Strategy {
    Mixture(MixtureStrategy),
    AdaptiveType2(AdaptiveType2Strategy),
    SignalingType3(SignalingType3Config),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockRecord {
    pub index: usize,
    pub setting: SettingPair,
    pub counts: OutcomeCounts,
    /// Mixture component drawn for the block; for the adaptive source,
    /// 0 = probe, 1 = ab-missing commitment, 2 = other commitment.
    pub component_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRecord {
    /// Block index per setting pair, in `SettingPair::ALL` order.
    pub block_indices: [usize; 4],
    pub term_estimates: JointDistribution,
    pub ch_estimate: Rational,
    pub violated: bool,
}

impl CycleRecord {
    /// `slots[i]` must be a block measured under `SettingPair::ALL[i]`.
    pub fn from_blocks(slots: [&BlockRecord; 4]) -> Self {
        debug_assert!(slots
            .iter()
            .zip(SettingPair::ALL)
            .all(|(b, s)| b.setting == s));
        let terms =
            core::array::from_fn(|i| slots[i].counts.frequency(ch_event(SettingPair::ALL[i])));
        let term_estimates =
            JointDistribution::from_terms(terms).expect("frequencies lie in [0, 1]");
        let ch_estimate = ch_value(&term_estimates);
        let violated = ch_estimate.is_positive();
        Self {
            block_indices: slots.map(|b| b.index),
            term_estimates,
            ch_estimate,
            violated,
        }
    }

    pub fn block_index(&self, s: SettingPair) -> usize {
        self.block_indices[s.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentResult {
    pub blocks: Vec<BlockRecord>,
    pub cycles: Vec<CycleRecord>,
    pub violation_count: u64,
    pub cycle_count: u64,
}

impl ExperimentResult {
    pub fn from_blocks(blocks: Vec<BlockRecord>, policy: CyclePolicy) -> Self {
        let cycles = form_cycles(&blocks, policy);
        let violation_count = cycles.iter().filter(|c| c.violated).count() as u64;
        let cycle_count = cycles.len() as u64;
        Self {
            blocks,
            cycles,
            violation_count,
            cycle_count,
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, strategy: &Strategy) -> Result<ExperimentResult> {
    cfg.validate()?;
    let n = cfg.trials_per_block;
    let mut rng = seeded(cfg.seed);
    let mut blocks = Vec::with_capacity(cfg.num_blocks as usize);

    match strategy {
        Strategy::Mixture(m) => {
            let readouts = realize_readouts(m.components().iter().map(|c| &c.distribution), n)?;
            for index in 0..cfg.num_blocks as usize {
                let setting = draw_setting(cfg.settings_law, index, &mut rng);
                let component = draw_block_state(m, &mut rng);
                let counts = readouts[component][setting.index()];
                blocks.push(BlockRecord {
                    index,
                    setting,
                    counts,
                    component_id: Some(component),
                });
            }
        }
        Strategy::AdaptiveType2(a) => {
            let dists = a.distributions();
            let readouts = realize_readouts(dists.iter().copied(), n)?;
            let (mut current, mut state) = a.start();
            for index in 0..cfg.num_blocks as usize {
                let setting = draw_setting(cfg.settings_law, index, &mut rng);
                let component = dists
                    .iter()
                    .position(|d| **d == current)
                    .expect("strategy emits its own states");
                let counts = readouts[component][setting.index()];
                blocks.push(BlockRecord {
                    index,
                    setting,
                    counts,
                    component_id: Some(component),
                });
                (current, state) = a.adaptive_next(&state, setting);
            }
        }
        Strategy::SignalingType3(s) => {
            for index in 0..cfg.num_blocks as usize {
                let setting = draw_setting(cfg.settings_law, index, &mut rng);
                let mut counts = [0u64; 4];
                for pair in signaling_block_outcomes(s, setting, n, &mut rng)? {
                    counts[pair.index()] += 1;
                }
                let counts = OutcomeCounts::new(counts).expect("n > 0");
                blocks.push(BlockRecord {
                    index,
                    setting,
                    counts,
                    component_id: None,
                });
            }
        }
    }
    Ok(ExperimentResult::from_blocks(blocks, cfg.cycle_policy))
}

/// Per-distribution, per-setting counts of the realizing state table.
fn realize_readouts<'a>(
    dists: impl Iterator<Item = &'a JointDistribution>,
    n: u64,
) -> Result<Vec<[OutcomeCounts; 4]>> {
    dists
        .map(|d| {
            let table = realize_mixture_component(d, n)?;
            Ok(SettingPair::ALL.map(|s| measure_block(&table, s)))
        })
        .collect()
}

fn draw_setting(law: SettingsLaw, index: usize, rng: &mut SimRng) -> SettingPair {
    match law {
        SettingsLaw::Uniform => SettingPair::from_index(rng.gen_range(0..4)),
        SettingsLaw::RoundRobin => SettingPair::from_index(index % 4),
    }
}

/// Groups blocks (in index order) into four-setting cycles.
pub fn form_cycles(blocks: &[BlockRecord], policy: CyclePolicy) -> Vec<CycleRecord> {
    let mut cycles = Vec::new();
    match policy {
        CyclePolicy::DiscardDuplicates => {
            let mut open: [Option<&BlockRecord>; 4] = [None; 4];
            for b in blocks {
                let slot = &mut open[b.setting.index()];
                if slot.is_none() {
                    *slot = Some(b);
                }
                if open.iter().all(Option::is_some) {
                    cycles.push(CycleRecord::from_blocks(open.map(|b| b.expect("filled"))));
                    open = [None; 4];
                }
            }
        }
        CyclePolicy::QueuePerSetting => {
            let mut queues: [VecDeque<&BlockRecord>; 4] = Default::default();
            for b in blocks {
                queues[b.setting.index()].push_back(b);
                if queues.iter().all(|q| !q.is_empty()) {
                    let slots = core::array::from_fn(|i| queues[i].pop_front().expect("nonempty"));
                    cycles.push(CycleRecord::from_blocks(slots));
                }
            }
        }
    }
    cycles
}

pub fn cycle_ch(c: &CycleRecord) -> Rational {
    ch_value(&c.term_estimates)
}

pub fn violation_fraction(r: &ExperimentResult) -> Result<Rational> {
    fraction(r.violation_count, r.cycle_count)
}

pub fn fraction(violations: u64, cycles: u64) -> Result<Rational> {
    if cycles == 0 {
        return Err(Error::NoCycles);
    }
    if violations > cycles {
        return Err(Error::InvalidConfig(format!(
            "{violations} violations exceed {cycles} cycles"
        )));
    }
    Ok(Rational::new(violations.into(), cycles.into()))
}

/// Mean CH estimate over all cycles, or zero when there are none.
pub fn mean_cycle_ch(r: &ExperimentResult) -> Rational {
    if r.cycles.is_empty() {
        return Rational::zero();
    }
    let sum: Rational = r.cycles.iter().map(cycle_ch).sum();
    sum / Rational::from_integer((r.cycles.len() as u64).into())
}
