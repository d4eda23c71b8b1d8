use crate::ch::{JointDistribution, SettingPair};
use crate::rational::ratio;

fn over_72(t: [i64; 4]) -> JointDistribution {
    JointDistribution::from_terms(t.map(|n| ratio(n, 72))).expect("static distribution")
}

/// `(24, 8, 8, 8)/72`: the large-`++|ab` state.
pub fn heavy_state() -> JointDistribution {
    over_72([24, 8, 8, 8])
}

/// `(18, 6, 6, 6)/72`: the middle state, also used for probing.
pub fn medium_state() -> JointDistribution {
    over_72([18, 6, 6, 6])
}

/// `(3, 1, 1, 1)/72`: the small-negative-terms state.
pub fn light_state() -> JointDistribution {
    over_72([3, 1, 1, 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Probing,
    Committed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptiveType2State {
    seen: [bool; 4],
    phase: Phase,
    committed: Option<JointDistribution>,
}

impl Default for AdaptiveType2State {
    fn default() -> Self {
        Self {
            seen: [false; 4],
            phase: Phase::Probing,
            committed: None,
        }
    }
}

impl AdaptiveType2State {
    pub fn settings_seen(&self) -> impl Iterator<Item = SettingPair> + '_ {
        SettingPair::ALL
            .into_iter()
            .filter(|s| self.seen[s.index()])
    }

    pub fn seen_count(&self) -> usize {
        self.seen.iter().filter(|&&b| b).count()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn committed_distribution(&self) -> Option<&JointDistribution> {
        self.committed.as_ref()
    }
}

/// A source that learns the settings of completed blocks before preparing
/// the next one (blocks are spacelike separated from each other's far end,
/// but not from earlier blocks).
///
/// It sends the probe state until three of the four settings have been used
/// in the current cycle, then commits to the state that makes the missing
/// setting's block tip the cycle's CH estimate positive. Once the fourth
/// setting arrives it starts probing for the next cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptiveType2Strategy {
    pub probe: JointDistribution,
    pub commit_ab_missing: JointDistribution,
    pub commit_other_missing: JointDistribution,
}

impl Default for AdaptiveType2Strategy {
    fn default() -> Self {
        Self {
            probe: medium_state(),
            commit_ab_missing: heavy_state(),
            commit_other_missing: light_state(),
        }
    }
}

impl AdaptiveType2Strategy {
    /// Distribution for the very first block and the matching fresh state.
    pub fn start(&self) -> (JointDistribution, AdaptiveType2State) {
        (self.probe.clone(), AdaptiveType2State::default())
    }

    pub fn distributions(&self) -> [&JointDistribution; 3] {
        [
            &self.probe,
            &self.commit_ab_missing,
            &self.commit_other_missing,
        ]
    }

    /// Updates on the setting of the block just measured and returns the
    /// distribution for the next block.
    pub fn adaptive_next(
        &self,
        state: &AdaptiveType2State,
        just_measured: SettingPair,
    ) -> (JointDistribution, AdaptiveType2State) {
        let mut next = state.clone();
        next.seen[just_measured.index()] = true;
        match (state.phase, next.seen_count()) {
            (_, 4) => self.start(),
            (Phase::Probing, 3) => {
                let missing = SettingPair::ALL
                    .into_iter()
                    .find(|s| !next.seen[s.index()])
                    .expect("one setting missing");
                let d = if missing == SettingPair::AB {
                    self.commit_ab_missing.clone()
                } else {
                    self.commit_other_missing.clone()
                };
                next.phase = Phase::Committed;
                next.committed = Some(d.clone());
                (d, next)
            }
            (Phase::Probing, _) => (self.probe.clone(), next),
            (Phase::Committed, _) => (
                next.committed
                    .clone()
                    .expect("committed state carries a distribution"),
                next,
            ),
        }
    }
}
