//! Settings, outcomes and the Clauser-Horne statistic
//!
//! ```text
//! CH = P(++|ab) - P(+0|ab') - P(0+|a'b) - P(++|a'b')  <=  0
//! ```
//!
//! which every local hidden variable model obeys.

use core::fmt;

use num_traits::{Signed, Zero};

use crate::error::Result;
use crate::rational::{check_probability, format_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Choice {
    Unprimed,
    Primed,
}

/// One of the four local settings a, a', b, b'.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalSetting {
    pub side: Side,
    pub choice: Choice,
}

impl LocalSetting {
    pub const A: Self = Self {
        side: Side::Alice,
        choice: Choice::Unprimed,
    };
    pub const A_PRIME: Self = Self {
        side: Side::Alice,
        choice: Choice::Primed,
    };
    pub const B: Self = Self {
        side: Side::Bob,
        choice: Choice::Unprimed,
    };
    pub const B_PRIME: Self = Self {
        side: Side::Bob,
        choice: Choice::Primed,
    };

    pub const ALL: [Self; 4] = [Self::A, Self::A_PRIME, Self::B, Self::B_PRIME];
}

impl fmt::Display for LocalSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.side {
            Side::Alice => "a",
            Side::Bob => "b",
        };
        match self.choice {
            Choice::Unprimed => f.write_str(base),
            Choice::Primed => write!(f, "{base}'"),
        }
    }
}

/// A joint measurement configuration. The derived `Ord` follows the fixed
/// serialization order `ab, ab', a'b, a'b'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SettingPair {
    pub alice: Choice,
    pub bob: Choice,
}

impl SettingPair {
    pub const AB: Self = Self {
        alice: Choice::Unprimed,
        bob: Choice::Unprimed,
    };
    pub const AB_PRIME: Self = Self {
        alice: Choice::Unprimed,
        bob: Choice::Primed,
    };
    pub const A_PRIME_B: Self = Self {
        alice: Choice::Primed,
        bob: Choice::Unprimed,
    };
    pub const A_PRIME_B_PRIME: Self = Self {
        alice: Choice::Primed,
        bob: Choice::Primed,
    };

    pub const ALL: [Self; 4] = [
        Self::AB,
        Self::AB_PRIME,
        Self::A_PRIME_B,
        Self::A_PRIME_B_PRIME,
    ];

    /// Position in `ALL`.
    pub const fn index(self) -> usize {
        (matches!(self.alice, Choice::Primed) as usize) * 2
            + matches!(self.bob, Choice::Primed) as usize
    }

    pub const fn from_index(i: usize) -> Self {
        Self::ALL[i & 3]
    }

    pub const fn alice_setting(self) -> LocalSetting {
        LocalSetting {
            side: Side::Alice,
            choice: self.alice,
        }
    }

    pub const fn bob_setting(self) -> LocalSetting {
        LocalSetting {
            side: Side::Bob,
            choice: self.bob,
        }
    }

    pub fn label(self) -> &'static str {
        ["ab", "ab'", "a'b", "a'b'"][self.index()]
    }

    pub fn from_label(s: &str) -> Option<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|p| p.label() == s || p.label().replace('\'', "p") == s)
    }
}

impl fmt::Display for SettingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Detection (`+`) or non-detection (`0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Zero,
}

impl Outcome {
    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Zero => '0',
        }
    }
}

/// (Alice outcome, Bob outcome), indexed in the order `++, +0, 0+, 00`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomePair(pub Outcome, pub Outcome);

impl OutcomePair {
    pub const PP: Self = Self(Outcome::Plus, Outcome::Plus);
    pub const P0: Self = Self(Outcome::Plus, Outcome::Zero);
    pub const ZP: Self = Self(Outcome::Zero, Outcome::Plus);
    pub const ZZ: Self = Self(Outcome::Zero, Outcome::Zero);

    pub const ALL: [Self; 4] = [Self::PP, Self::P0, Self::ZP, Self::ZZ];

    pub const fn index(self) -> usize {
        (matches!(self.0, Outcome::Zero) as usize) * 2 + matches!(self.1, Outcome::Zero) as usize
    }

    pub fn label(self) -> &'static str {
        ["++", "+0", "0+", "00"][self.index()]
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.label() == s.trim())
    }
}

/// The outcome pair whose probability enters the CH statistic for `s`.
pub const fn ch_event(s: SettingPair) -> OutcomePair {
    [
        OutcomePair::PP,
        OutcomePair::P0,
        OutcomePair::ZP,
        OutcomePair::PP,
    ][s.index()]
}

/// The four CH-relevant conditional probabilities, in the order
/// `P(++|ab), P(+0|ab'), P(0+|a'b), P(++|a'b')`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointDistribution {
    terms: [Rational; 4],
}

impl JointDistribution {
    pub fn new(
        p_pp_ab: Rational,
        p_p0_abp: Rational,
        p_0p_apb: Rational,
        p_pp_apbp: Rational,
    ) -> Result<Self> {
        Self::from_terms([p_pp_ab, p_p0_abp, p_0p_apb, p_pp_apbp])
    }

    pub fn from_terms(terms: [Rational; 4]) -> Result<Self> {
        for t in &terms {
            check_probability(t)?;
        }
        Ok(Self { terms })
    }

    pub fn zero() -> Self {
        Self {
            terms: core::array::from_fn(|_| Rational::zero()),
        }
    }

    pub fn terms(&self) -> &[Rational; 4] {
        &self.terms
    }

    /// The term measured under setting pair `s`.
    pub fn term(&self, s: SettingPair) -> &Rational {
        &self.terms[s.index()]
    }

    pub fn p_pp_ab(&self) -> &Rational {
        &self.terms[0]
    }
    pub fn p_p0_abp(&self) -> &Rational {
        &self.terms[1]
    }
    pub fn p_0p_apb(&self) -> &Rational {
        &self.terms[2]
    }
    pub fn p_pp_apbp(&self) -> &Rational {
        &self.terms[3]
    }

    /// Convex combination `w·self + (1−w)·other`. `w` must lie in [0, 1].
    pub fn mix(&self, other: &Self, w: &Rational) -> Result<Self> {
        check_probability(w)?;
        let one_minus = Rational::from_integer(1.into()) - w;
        Self::from_terms(core::array::from_fn(|i| {
            w * &self.terms[i] + &one_minus * &other.terms[i]
        }))
    }
}

impl fmt::Display for JointDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            format_rational(&self.terms[0]),
            format_rational(&self.terms[1]),
            format_rational(&self.terms[2]),
            format_rational(&self.terms[3])
        )
    }
}

pub fn ch_value(d: &JointDistribution) -> Rational {
    let [pp, p0, zp, pp2] = d.terms();
    pp - p0 - zp - pp2
}

pub fn satisfies_ch(d: &JointDistribution) -> bool {
    !ch_value(d).is_positive()
}

pub fn is_saturating(d: &JointDistribution) -> bool {
    ch_value(d).is_zero()
}

/// Per-outcome-pair counts of one block measured under a single setting pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutcomeCounts {
    counts: [u64; 4],
    block_length: u64,
}

impl OutcomeCounts {
    /// `counts` is indexed like [`OutcomePair::ALL`]. Returns `None` when the
    /// counts do not sum to a positive block length.
    pub fn new(counts: [u64; 4]) -> Option<Self> {
        let n = counts.iter().try_fold(0u64, |acc, &c| acc.checked_add(c))?;
        (n > 0).then_some(Self {
            counts,
            block_length: n,
        })
    }

    pub fn get(&self, pair: OutcomePair) -> u64 {
        self.counts[pair.index()]
    }

    pub fn as_array(&self) -> [u64; 4] {
        self.counts
    }

    pub fn block_length(&self) -> u64 {
        self.block_length
    }

    /// Number of `+` outcomes on one side.
    pub fn plus_count(&self, side: Side) -> u64 {
        match side {
            Side::Alice => self.get(OutcomePair::PP) + self.get(OutcomePair::P0),
            Side::Bob => self.get(OutcomePair::PP) + self.get(OutcomePair::ZP),
        }
    }

    pub fn frequency(&self, pair: OutcomePair) -> Rational {
        Rational::new(self.get(pair).into(), self.block_length.into())
    }
}
