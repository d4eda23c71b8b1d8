use blockbell_core::ch::{ch_value, is_saturating, satisfies_ch, JointDistribution, Side};
use blockbell_core::exact::{binomial_tail_exact, cycle_violation_prob, expected_cycle_ch};
use blockbell_core::rational::{int, ratio, Rational};
use blockbell_core::separation::{classify, required_distance, SeparationScenario};
use blockbell_core::strategy::{
    build_state_table, measure_block, realize_mixture_component, table_distribution, ChCountSpec,
    MixtureStrategy,
};
use blockbell_core::SettingPair;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn prob(den: i64) -> impl Strategy<Value = Rational> {
    (0..=den).prop_map(move |n| ratio(n, den))
}

fn distribution() -> impl Strategy<Value = JointDistribution> {
    [prob(72), prob(72), prob(72), prob(72)].prop_map(|t| JointDistribution::from_terms(t).unwrap())
}

prop_compose! {
    fn feasible_spec()(n in 1u64..200)
        (n in Just(n), neg in (0..=n, 0..=n, 0..=n), pp_frac in 0.0f64..=1.0)
        -> ChCountSpec
    {
        // Scale the negative counts down into the block, then pick ++|ab
        // under their sum.
        let (a, b, c) = neg;
        let total = a + b + c;
        let (a, b, c) = if total > n {
            let s = |x: u64| x * n / total;
            (s(a), s(b), s(c))
        } else {
            (a, b, c)
        };
        let pp = ((a + b + c) as f64 * pp_frac) as u64;
        ChCountSpec::new(pp, a, b, c, n)
    }
}

/// Oracle: direct term-by-term enumeration, no common denominators.
fn enumerate(m: &MixtureStrategy) -> (Rational, Rational) {
    let c = m.components();
    let k = c.len();
    let (mut viol, mut expect) = (Rational::zero(), Rational::zero());
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                for o in 0..k {
                    let w = &c[i].weight * &c[j].weight * &c[l].weight * &c[o].weight;
                    let ch = c[i].distribution.p_pp_ab()
                        - c[j].distribution.p_p0_abp()
                        - c[l].distribution.p_0p_apb()
                        - c[o].distribution.p_pp_apbp();
                    if ch.is_positive() {
                        viol += &w;
                    }
                    expect += w * ch;
                }
            }
        }
    }
    (viol, expect)
}

fn mixture_of(specs: &[ChCountSpec], raw_weights: &[u64]) -> MixtureStrategy {
    let total: u64 = raw_weights.iter().sum();
    MixtureStrategy::from_pairs(specs.iter().zip(raw_weights).map(|(s, &w)| {
        (
            table_distribution(&build_state_table(s).unwrap()),
            ratio(w as i64, total as i64),
        )
    }))
    .unwrap()
}

proptest! {
    #[test]
    fn ch_is_linear(d1 in distribution(), d2 in distribution(), w in prob(97)) {
        let mixed = d1.mix(&d2, &w).unwrap();
        let one_minus = int(1) - &w;
        prop_assert_eq!(ch_value(&mixed), &w * ch_value(&d1) + one_minus * ch_value(&d2));
    }

    #[test]
    fn saturation_implies_satisfaction(d in distribution()) {
        if is_saturating(&d) {
            prop_assert!(satisfies_ch(&d));
        }
        prop_assert_eq!(ch_value(&d), ch_value(&d.clone()));
    }

    #[test]
    fn built_tables_match_spec_and_obey_ch(spec in feasible_spec()) {
        let t = build_state_table(&spec).unwrap();
        prop_assert_eq!(t.len(), spec.n);
        let d = table_distribution(&t);
        let n = spec.n as i64;
        prop_assert_eq!(d.terms(), &[
            ratio(spec.c_pp_ab as i64, n),
            ratio(spec.c_p0_abp as i64, n),
            ratio(spec.c_0p_apb as i64, n),
            ratio(spec.c_pp_apbp as i64, n),
        ]);
        prop_assert!(!ch_value(&d).is_positive());

        // No-signaling: each station's marginal ignores the far setting.
        let m = |s| measure_block(&t, s);
        prop_assert_eq!(m(SettingPair::AB).plus_count(Side::Alice), m(SettingPair::AB_PRIME).plus_count(Side::Alice));
        prop_assert_eq!(m(SettingPair::A_PRIME_B).plus_count(Side::Alice), m(SettingPair::A_PRIME_B_PRIME).plus_count(Side::Alice));
        prop_assert_eq!(m(SettingPair::AB).plus_count(Side::Bob), m(SettingPair::A_PRIME_B).plus_count(Side::Bob));
        prop_assert_eq!(m(SettingPair::AB_PRIME).plus_count(Side::Bob), m(SettingPair::A_PRIME_B_PRIME).plus_count(Side::Bob));
        for s in SettingPair::ALL {
            prop_assert_eq!(measure_block(&t, s), measure_block(&t, s));
        }
    }

    #[test]
    fn realize_then_measure_is_identity(spec in feasible_spec(), mult in 1u64..4) {
        let d = table_distribution(&build_state_table(&spec).unwrap());
        let t = realize_mixture_component(&d, spec.n * mult).unwrap();
        prop_assert_eq!(table_distribution(&t), d);
    }

    #[test]
    fn exact_analysis_matches_direct_enumeration(
        specs in prop::collection::vec(feasible_spec(), 1..5),
        raw in prop::collection::vec(1u64..10, 5),
    ) {
        let m = mixture_of(&specs, &raw[..specs.len()]);
        let (viol, expect) = enumerate(&m);
        prop_assert_eq!(cycle_violation_prob(&m), viol);
        prop_assert_eq!(expected_cycle_ch(&m), expect.clone());
        // Linearity: expectation equals CH of the averaged block.
        prop_assert_eq!(expect.clone(), ch_value(&m.average()));
        prop_assert!(!expect.is_positive());
    }

    #[test]
    fn tail_is_monotone(c in 1u64..60, v in 0u64..60, a in 1i64..40) {
        let v = v.min(c - 1);
        let p = ratio(a, 41);
        let here = binomial_tail_exact(v, c, &p).unwrap();
        prop_assert!(binomial_tail_exact(v + 1, c, &p).unwrap() <= here);
        prop_assert!(binomial_tail_exact(v, c, &ratio(a + 1, 41)).unwrap() >= here);
    }

    #[test]
    fn required_distance_is_linear(t in 0.0f64..1e4) {
        let one = required_distance(t).unwrap();
        let two = required_distance(2.0 * t).unwrap();
        prop_assert!((two - 2.0 * one).abs() <= 1e-9 * two.max(1.0));
    }

    #[test]
    fn classify_is_monotone(d1 in 0.0f64..1e12, d2 in 0.0f64..1e12, exp in 1.0f64..1e4) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let s = |d| SeparationScenario::new(d, exp, 1.0, 4e-5).unwrap();
        prop_assert!(classify(&s(lo)) <= classify(&s(hi)));
        let at = required_distance(exp).unwrap();
        prop_assert_eq!(classify(&s(at)), blockbell_core::separation::SeparationType::Type1);
    }
}
