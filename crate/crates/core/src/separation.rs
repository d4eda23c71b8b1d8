//! Light-travel arithmetic for the three grades of spacelike separation.
//!
//! * Type 1: every event at one station is outside the light cone of every
//!   event at the other, for the whole run.
//! * Type 2: each block is separated from the simultaneous block at the far
//!   station, but later blocks may learn about earlier ones.
//! * Type 3: only simultaneous trials are separated; later trials in a block
//!   may learn the far setting.
//!
//! Distances are meters and durations seconds throughout.

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s (exact by definition of the meter).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const LIGHT_MINUTE: f64 = SPEED_OF_LIGHT * 60.0;
pub const LIGHT_SECOND: f64 = SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeparationType {
    NoneAchieved,
    Type3,
    Type2,
    Type1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationScenario {
    pub distance: f64,
    pub experiment_duration: f64,
    pub block_duration: f64,
    pub trial_duration: f64,
}

impl SeparationScenario {
    pub fn new(
        distance: f64,
        experiment_duration: f64,
        block_duration: f64,
        trial_duration: f64,
    ) -> Result<Self> {
        let s = Self {
            distance,
            experiment_duration,
            block_duration,
            trial_duration,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.distance,
            self.experiment_duration,
            self.block_duration,
            self.trial_duration,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite || self.distance < 0.0 || self.trial_duration <= 0.0 {
            return Err(Error::InvalidConfig(
                "distance must be >= 0 and durations positive".into(),
            ));
        }
        if !(self.trial_duration <= self.block_duration
            && self.block_duration <= self.experiment_duration)
        {
            return Err(Error::InvalidConfig(
                "need trial <= block <= experiment duration".into(),
            ));
        }
        Ok(())
    }

    /// Minimum distances for Type 1, 2 and 3 separation.
    pub fn thresholds(&self) -> [(SeparationType, f64); 3] {
        [
            (
                SeparationType::Type1,
                SPEED_OF_LIGHT * self.experiment_duration,
            ),
            (SeparationType::Type2, SPEED_OF_LIGHT * self.block_duration),
            (SeparationType::Type3, SPEED_OF_LIGHT * self.trial_duration),
        ]
    }
}

pub fn required_distance(duration: f64) -> Result<f64> {
    if !duration.is_finite() || duration < 0.0 {
        return Err(Error::InvalidConfig(
            "duration must be a finite non-negative number of seconds".into(),
        ));
    }
    Ok(SPEED_OF_LIGHT * duration)
}

/// Strongest separation type achieved; thresholds are inclusive.
pub fn classify(s: &SeparationScenario) -> SeparationType {
    s.thresholds()
        .into_iter()
        .find(|&(_, needed)| s.distance >= needed)
        .map_or(SeparationType::NoneAchieved, |(t, _)| t)
}

/// Leading trials at one station before the other station's setting can
/// arrive: `ceil((distance / c) / trial_period)`.
pub fn throwaway_trials_needed(distance: f64, trial_period: f64) -> Result<u64> {
    if !distance.is_finite() || !trial_period.is_finite() || distance < 0.0 || trial_period <= 0.0 {
        return Err(Error::InvalidConfig(
            "distance must be >= 0 and trial period positive".into(),
        ));
    }
    Ok(libm::ceil(distance / SPEED_OF_LIGHT / trial_period) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn required_distance_examples() {
        let d = required_distance(4e-5).unwrap();
        assert!((d - 11_991.698_32).abs() < 1e-3);
        let moon = required_distance(1.3).unwrap();
        assert!((moon - 3.897e8).abs() / 3.897e8 < 1e-3);
        assert_eq!(required_distance(0.0).unwrap(), 0.0);
        assert!(required_distance(-1.0).is_err());
        assert!(required_distance(f64::NAN).is_err());
    }

    #[test]
    fn classify_examples() {
        let twenty_min = 20.0 * 60.0;
        let s = SeparationScenario::new(20.0 * LIGHT_MINUTE, twenty_min, 60.0, 4e-5).unwrap();
        assert_eq!(classify(&s), SeparationType::Type1);

        let s = SeparationScenario::new(2.0 * LIGHT_SECOND, 75.0 * 60.0, 1.0, 4e-5).unwrap();
        assert_eq!(classify(&s), SeparationType::Type2);

        let s = SeparationScenario::new(12_000.0, 75.0 * 60.0, 1.0, 4e-5).unwrap();
        assert_eq!(classify(&s), SeparationType::Type3);

        let s = SeparationScenario::new(100.0, 75.0 * 60.0, 1.0, 4e-5).unwrap();
        assert_eq!(classify(&s), SeparationType::NoneAchieved);
    }

    #[test]
    fn boundary_is_inclusive() {
        let s =
            SeparationScenario::new(required_distance(4500.0).unwrap(), 4500.0, 1.0, 4e-5).unwrap();
        assert_eq!(classify(&s), SeparationType::Type1);
    }

    #[test]
    fn scenario_validation() {
        assert!(SeparationScenario::new(-1.0, 10.0, 1.0, 0.1).is_err());
        assert!(SeparationScenario::new(1.0, 10.0, 20.0, 0.1).is_err());
        assert!(SeparationScenario::new(1.0, 10.0, 1.0, 2.0).is_err());
        assert!(SeparationScenario::new(1.0, 10.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn throwaway_examples() {
        // 12 km is slightly more than c * 0.04 ms, so a second trial is needed.
        assert_eq!(throwaway_trials_needed(12_000.0, 4e-5).unwrap(), 2);
        assert_eq!(throwaway_trials_needed(11_990.0, 4e-5).unwrap(), 1);
        assert_eq!(throwaway_trials_needed(0.0, 4e-5).unwrap(), 0);
        assert_eq!(throwaway_trials_needed(120_000.0, 4e-5).unwrap(), 11);
        assert!(throwaway_trials_needed(1.0, 0.0).is_err());
    }
}
