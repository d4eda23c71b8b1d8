use alloc::format;
use alloc::vec::Vec;

use crate::ch::{OutcomePair, SettingPair};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::rng::SimRng;

use super::mixture::DiscreteSampler;

/// Full joint law of one setting pair, indexed like [`OutcomePair::ALL`].
pub type FourOutcomeLaw = [Rational; 4];

/// A source whose stations exchange sub-luminal signals within a block.
///
/// Station A emits `throwaway_count` non-detections while the far setting is
/// in flight; from then on both settings are known and every remaining trial
/// is drawn from `target_behavior` of the actual setting pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalingType3Config {
    target_behavior: [FourOutcomeLaw; 4],
    throwaway_count: u64,
    samplers: [DiscreteSampler; 4],
}

impl SignalingType3Config {
    pub fn new(target_behavior: [FourOutcomeLaw; 4], throwaway_count: u64) -> Result<Self> {
        let mut samplers = Vec::with_capacity(4);
        for (s, law) in SettingPair::ALL.into_iter().zip(&target_behavior) {
            let sampler = DiscreteSampler::new(law)
                .map_err(|e| Error::InvalidConfig(format!("target behavior for {s}: {e}")))?;
            samplers.push(sampler);
        }
        let samplers = samplers.try_into().expect("four settings");
        Ok(Self {
            target_behavior,
            throwaway_count,
            samplers,
        })
    }

    pub fn target_behavior(&self) -> &[FourOutcomeLaw; 4] {
        &self.target_behavior
    }

    pub fn throwaway_count(&self) -> u64 {
        self.throwaway_count
    }
}

pub fn signaling_block_outcomes(
    cfg: &SignalingType3Config,
    setting: SettingPair,
    n: u64,
    rng: &mut SimRng,
) -> Result<Vec<OutcomePair>> {
    if cfg.throwaway_count >= n {
        return Err(Error::InvalidConfig(format!(
            "throwaway count {} must be smaller than the block length {n}",
            cfg.throwaway_count
        )));
    }
    let sampler = &cfg.samplers[setting.index()];
    let mut out = Vec::with_capacity(n as usize);
    out.extend((0..cfg.throwaway_count).map(|_| OutcomePair::ZZ));
    out.extend((cfg.throwaway_count..n).map(|_| OutcomePair::ALL[sampler.draw(rng)]));
    Ok(out)
}
