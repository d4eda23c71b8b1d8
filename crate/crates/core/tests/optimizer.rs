use blockbell_core::ch::satisfies_ch;
use blockbell_core::exact::cycle_violation_prob;
use blockbell_core::optimize::{
    evaluate, evaluate_general, general_to_mixture, optimize_deficit_family,
    optimize_deficit_family_with, GeneralDeficitFamily, RhoEpsFamily, SearchConfig,
};
use blockbell_core::rational::{int, ratio, to_f64, Rational};

/// Ceiling of the deficit family for fixed weights: Σ wᵢ (1 − Fᵢ³).
fn ceiling(weights: &[Rational]) -> Rational {
    let mut cumulative = int(0);
    let mut total = int(0);
    for w in weights {
        cumulative += w;
        total += w * (int(1) - &cumulative * &cumulative * &cumulative);
    }
    total
}

#[test]
fn rho_eps_family_is_scale_invariant() {
    let w = [ratio(2, 5), ratio(1, 4), ratio(1, 5), ratio(3, 20)];
    let a = evaluate(&RhoEpsFamily {
        rho: ratio(1, 2),
        eps: ratio(1, 100),
        weights: w.clone(),
    })
    .unwrap();
    let b = evaluate(&RhoEpsFamily {
        rho: ratio(2, 5),
        eps: ratio(1, 200),
        weights: w.clone(),
    })
    .unwrap();
    let c = evaluate(&RhoEpsFamily {
        rho: int(1),
        eps: ratio(1, 41),
        weights: w.clone(),
    })
    .unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    // Deficits 0, 3, 12, 39 each exceed three times the previous one.
    assert_eq!(a, ceiling(&w));
}

#[test]
fn k4_default_beats_reference_and_stays_under_ceiling() {
    let out = optimize_deficit_family(4, &SearchConfig::default()).unwrap();
    assert!(out.probability > ratio(63, 100));
    assert!(
        out.probability >= ratio(101_267, 160_000),
        "{}",
        to_f64(&out.probability)
    );
    assert!(out.probability <= ceiling(&out.family.weights));
    // Numerical optimum of the ceiling for k = 4 is 0.633285...
    assert!(to_f64(&out.probability) < 0.63329);

    let m = general_to_mixture(&out.family).unwrap();
    assert!(m.components().iter().all(|c| satisfies_ch(&c.distribution)));
    assert_eq!(cycle_violation_prob(&m), out.probability);
    assert!(out.history.windows(2).all(|h| h[0] <= h[1]));
}

#[test]
fn every_candidate_is_ch_feasible() {
    let cfg = SearchConfig {
        grid_resolution: 8,
        refinement_steps: 2,
        ..Default::default()
    };
    let mut seen = 0u64;
    let mut best_seen = int(0);
    let out = optimize_deficit_family_with(3, &cfg, |cand, p| {
        seen += 1;
        let m = general_to_mixture(&cand.to_family()).unwrap();
        assert!(m.components().iter().all(|c| satisfies_ch(&c.distribution)));
        if seen % 97 == 0 {
            assert_eq!(&cycle_violation_prob(&m), p);
        }
        if *p > best_seen {
            best_seen = p.clone();
        }
    })
    .unwrap();
    assert_eq!(seen, out.evaluations);
    assert_eq!(out.probability, best_seen);
}

#[test]
fn scale_invariance_of_returned_family() {
    let out = optimize_deficit_family(
        3,
        &SearchConfig {
            grid_resolution: 12,
            ..Default::default()
        },
    )
    .unwrap();
    let mut rescaled: GeneralDeficitFamily = out.family.clone();
    rescaled.rho = ratio(1, 5);
    rescaled.eps_unit = &out.family.eps_unit * ratio(1, 7);
    assert_eq!(evaluate_general(&rescaled).unwrap(), out.probability);
}

#[test]
fn fixed_three_state_deficits_reach_149_over_256() {
    let cfg = SearchConfig {
        fixed_deficits: Some(vec![0, 6, 21]),
        ..Default::default()
    };
    let out = optimize_deficit_family(3, &cfg).unwrap();
    // Reported deficits are reduced by their gcd.
    assert_eq!(out.family.deficits, vec![int(0), int(2), int(7)]);
    assert!(out.probability >= ratio(149, 256));
}

#[test]
fn subsampled_grid_is_seed_deterministic() {
    let cfg = |seed| SearchConfig {
        max_grid_points: 500,
        refinement_steps: 1,
        seed,
        ..Default::default()
    };
    let a = optimize_deficit_family(5, &cfg(3)).unwrap();
    let b = optimize_deficit_family(5, &cfg(3)).unwrap();
    assert_eq!(a, b);
    assert!(a.probability <= ceiling(&a.family.weights));
}
