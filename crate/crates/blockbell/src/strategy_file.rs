//! JSON strategy descriptions.
//!
//! ```json
//! {"type": "mixture", "block_length": 72,
//!  "components": [{"dist": ["24/72", "8/72", "8/72", "8/72"], "weight": "1/2"}, ...]}
//!
//! {"type": "adaptive_type2", "block_length": 72}
//!
//! {"type": "signaling_type3", "block_length": 25000, "throwaway_count": 3,
//!  "target_behavior": {"ab": {"++": "1/1"}, "ab'": {"00": "1/1"}, ...}}
//! ```
//!
//! `dist` lists `P(++|ab), P(+0|ab'), P(0+|a'b), P(++|a'b')`. The adaptive
//! source's `probe`, `commit_ab_missing` and `commit_other_missing`
//! distributions are optional and default to `(18,6,6,6)/72`,
//! `(24,8,8,8)/72` and `(3,1,1,1)/72`. Signaling targets omit zero entries;
//! each listed setting's law must sum to 1 and all four settings are
//! required. Every rational is a `"num/den"` string.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use blockbell_core::rational::{format_rational, parse_rational, Rational};
use blockbell_core::sim::Strategy;
use blockbell_core::strategy::{
    AdaptiveType2Strategy, MixtureComponent, MixtureStrategy, SignalingType3Config,
};
use blockbell_core::{JointDistribution, OutcomePair, SettingPair};
use num_traits::Zero;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A rational carried as `"num/den"` text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalText(pub Rational);

impl Serialize for RationalText {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = RationalText;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a \"num/den\" string")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                parse_rational(v).map(RationalText).map_err(E::custom)
            }
        }
        d.deserialize_str(Visitor)
    }
}

impl From<Rational> for RationalText {
    fn from(r: Rational) -> Self {
        Self(r)
    }
}

impl From<&Rational> for RationalText {
    fn from(r: &Rational) -> Self {
        Self(r.clone())
    }
}

pub type DistText = [RationalText; 4];

pub fn dist_text(d: &JointDistribution) -> DistText {
    d.terms().each_ref().map(RationalText::from)
}

fn dist_from_text(t: &DistText) -> Result<JointDistribution, CliError> {
    Ok(JointDistribution::from_terms(
        t.each_ref().map(|r| r.0.clone()),
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentFile {
    pub dist: DistText,
    pub weight: RationalText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
#[allow(clippy::large_enum_variant)]
pub enum StrategyFile {
    Mixture {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        block_length: Option<u64>,
        components: Vec<ComponentFile>,
    },
    AdaptiveType2 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        block_length: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probe: Option<DistText>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        commit_ab_missing: Option<DistText>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        commit_other_missing: Option<DistText>,
    },
    SignalingType3 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        block_length: Option<u64>,
        throwaway_count: u64,
        /// Setting label (`ab`, `ab'`, `a'b`, `a'b'`) to outcome label
        /// (`++`, `+0`, `0+`, `00`) to probability.
        target_behavior: BTreeMap<String, BTreeMap<String, RationalText>>,
    },
}

impl StrategyFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("strategy file: {e}")))
    }

    pub fn block_length(&self) -> Option<u64> {
        match self {
            StrategyFile::Mixture { block_length, .. }
            | StrategyFile::AdaptiveType2 { block_length, .. }
            | StrategyFile::SignalingType3 { block_length, .. } => *block_length,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            StrategyFile::Mixture { .. } => "mixture",
            StrategyFile::AdaptiveType2 { .. } => "adaptive_type2",
            StrategyFile::SignalingType3 { .. } => "signaling_type3",
        }
    }

    pub fn from_mixture(m: &MixtureStrategy, block_length: Option<u64>) -> Self {
        StrategyFile::Mixture {
            block_length,
            components: m
                .components()
                .iter()
                .map(|c| ComponentFile {
                    dist: dist_text(&c.distribution),
                    weight: (&c.weight).into(),
                })
                .collect(),
        }
    }

    pub fn to_strategy(&self) -> Result<Strategy, CliError> {
        match self {
            StrategyFile::Mixture { components, .. } => {
                Ok(Strategy::Mixture(self.mixture_of(components)?))
            }
            StrategyFile::AdaptiveType2 {
                probe,
                commit_ab_missing,
                commit_other_missing,
                ..
            } => {
                let defaults = AdaptiveType2Strategy::default();
                let pick = |t: &Option<DistText>, fallback: JointDistribution| {
                    t.as_ref().map_or(Ok(fallback), dist_from_text)
                };
                let a = AdaptiveType2Strategy {
                    probe: pick(probe, defaults.probe)?,
                    commit_ab_missing: pick(commit_ab_missing, defaults.commit_ab_missing)?,
                    commit_other_missing: pick(
                        commit_other_missing,
                        defaults.commit_other_missing,
                    )?,
                };
                if a.distributions()
                    .iter()
                    .any(|d| !blockbell_core::satisfies_ch(d))
                {
                    return Err(CliError::Validation(
                        "adaptive distributions must satisfy CH".into(),
                    ));
                }
                Ok(Strategy::AdaptiveType2(a))
            }
            StrategyFile::SignalingType3 {
                throwaway_count,
                target_behavior,
                ..
            } => {
                let mut laws: [[Rational; 4]; 4] = Default::default();
                let mut present = [false; 4];
                for (setting, law) in target_behavior {
                    let s = SettingPair::from_label(setting).ok_or_else(|| {
                        CliError::Validation(format!("unknown setting {setting:?}"))
                    })?;
                    present[s.index()] = true;
                    for (outcome, p) in law {
                        let o = OutcomePair::from_label(outcome).ok_or_else(|| {
                            CliError::Validation(format!("unknown outcome {outcome:?}"))
                        })?;
                        laws[s.index()][o.index()] = p.0.clone();
                    }
                }
                if let Some(i) = present.iter().position(|p| !p) {
                    return Err(CliError::Validation(format!(
                        "target_behavior is missing setting {}",
                        SettingPair::ALL[i]
                    )));
                }
                Ok(Strategy::SignalingType3(SignalingType3Config::new(
                    laws,
                    *throwaway_count,
                )?))
            }
        }
    }

    /// The static mixture, for exact enumeration.
    pub fn to_mixture(&self) -> Result<MixtureStrategy, CliError> {
        match self {
            StrategyFile::Mixture { components, .. } => self.mixture_of(components),
            other => Err(CliError::Validation(format!(
                "{} strategies have no static mixture to enumerate",
                other.type_name()
            ))),
        }
    }

    fn mixture_of(&self, components: &[ComponentFile]) -> Result<MixtureStrategy, CliError> {
        let comps = components
            .iter()
            .map(|c| {
                Ok(MixtureComponent {
                    distribution: dist_from_text(&c.dist)?,
                    weight: c.weight.0.clone(),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(MixtureStrategy::new(comps)?)
    }
}

/// Serializes a signaling target with zero entries omitted.
pub fn signaling_target_text(
    laws: &[[Rational; 4]; 4],
) -> BTreeMap<String, BTreeMap<String, RationalText>> {
    SettingPair::ALL
        .into_iter()
        .map(|s| {
            let law = OutcomePair::ALL
                .into_iter()
                .filter(|o| !laws[s.index()][o.index()].is_zero())
                .map(|o| {
                    (
                        o.label().to_string(),
                        RationalText(laws[s.index()][o.index()].clone()),
                    )
                })
                .collect();
            (s.label().to_string(), law)
        })
        .collect()
}
