//! Exact Clauser-Horne analysis of block-measurement Bell experiments.
//!
//! Local hidden variable (LHV) sources that hold their settings fixed for a
//! whole block of trials can tune each block's empirical statistics freely,
//! subject only to the CH inequality holding for every block. Grouping blocks
//! into four-setting "cycles" and counting cycles with a positive CH estimate
//! is then not a sound test: such sources violate in well over half of all
//! cycles while still obeying the inequality in expectation.
//!
//! This crate is `no_std` (with `alloc`). All probabilities are exact
//! arbitrary-precision rationals; floating point appears only in display
//! values, the separation arithmetic and the optimizer's grid generation.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod ch;
pub mod error;
pub mod exact;
pub mod optimize;
pub mod rational;
pub mod rng;
pub mod separation;
pub mod sim;
pub mod strategy;

pub use ch::{
    ch_value, is_saturating, satisfies_ch, Choice, JointDistribution, LocalSetting, Outcome,
    OutcomeCounts, OutcomePair, SettingPair, Side,
};
pub use error::{Error, Result};
pub use rational::Rational;
