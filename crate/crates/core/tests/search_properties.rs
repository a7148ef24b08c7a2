use convertbw::bounds::lower_bound;
use convertbw::code_model::{random_mds_pair, CodeParams, ConvertiblePair};
use convertbw::conversion::{check_feasible, ReadPlan};
use convertbw::search::{min_read_search, verify_achievability, SearchConfig, SearchMode};
use num_rational::BigRational;
use proptest::prelude::*;

/// Instances with at most 12 plan bits.
fn small_pair() -> impl Strategy<Value = ConvertiblePair> {
    (
        2..=3usize,
        1..=2usize,
        1..=2usize,
        1..=4usize,
        1..=2usize,
        any::<u64>(),
    )
        .prop_filter("nI * ell <= 12", |&(l, kf, _, ri, ell, _)| {
            (l * kf + ri) * ell <= 12
        })
        .prop_map(|(l, kf, rf, ri, ell, seed)| {
            random_mds_pair(
                CodeParams::new(l, kf, rf, ri, ell, 43).unwrap(),
                seed,
                10_000,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn minimum_respects_bound(pair in small_pair()) {
        let result = min_read_search(&pair, &SearchConfig::exhaustive()).unwrap();
        prop_assert!(result.exhaustive);
        let bound = lower_bound(&pair.params.split).unwrap().value;
        prop_assert!(BigRational::from_integer(result.best_cost.into()) >= bound);
        let report = verify_achievability(&pair, &result, 20, 7).unwrap();
        prop_assert!(report.gap >= BigRational::from_integer(0.into()));

        let feas = check_feasible(&pair, &result.best_plan).unwrap();
        prop_assert!(feas.holds);
        prop_assert!(feas.b_full_col_rank);
    }

    #[test]
    fn result_independent_of_order(pair in small_pair(), seed in any::<u64>()) {
        let plain = min_read_search(&pair, &SearchConfig::exhaustive()).unwrap();
        let shuffled = min_read_search(&pair, &SearchConfig { seed: Some(seed), ..SearchConfig::exhaustive() }).unwrap();
        prop_assert_eq!(plain.best_plan, shuffled.best_plan);
        prop_assert_eq!(plain.best_cost, shuffled.best_cost);
    }

    #[test]
    fn prefix_never_beats_exhaustive(pair in small_pair()) {
        let exhaustive = min_read_search(&pair, &SearchConfig::exhaustive()).unwrap();
        let prefix = min_read_search(&pair, &SearchConfig::prefix()).unwrap();
        prop_assert!(!prefix.exhaustive);
        prop_assert_eq!(prefix.best_plan.betas().iter().sum::<usize>(), prefix.best_cost);
        prop_assert!(prefix.best_cost >= exhaustive.best_cost);
    }

    #[test]
    fn every_higher_cost_is_reachable(pair in small_pair()) {
        let result = min_read_search(&pair, &SearchConfig::exhaustive()).unwrap();
        let p = pair.params;
        let mut masks = result.best_plan.masks();
        let mut cost = result.best_cost;
        'grow: loop {
            for j in 0..p.n_i() {
                for t in 0..p.ell() {
                    if masks[j] & (1 << t) == 0 {
                        masks[j] |= 1 << t;
                        cost += 1;
                        let plan = ReadPlan::from_masks(&p, &masks).unwrap();
                        prop_assert_eq!(plan.total_read(), cost);
                        prop_assert!(check_feasible(&pair, &plan).unwrap().holds);
                        continue 'grow;
                    }
                }
            }
            break;
        }
        prop_assert_eq!(cost, p.n_i() * p.ell());
    }
}

#[test]
fn modes_report_their_kind() {
    let pair = random_mds_pair(CodeParams::new(2, 1, 1, 2, 2, 43).unwrap(), 5, 1000).unwrap();
    let e = min_read_search(&pair, &SearchConfig::exhaustive()).unwrap();
    let p = min_read_search(
        &pair,
        &SearchConfig {
            mode: SearchMode::PrefixOnly,
            ..SearchConfig::exhaustive()
        },
    )
    .unwrap();
    assert!(e.exhaustive && !p.exhaustive);
    assert_eq!(e.best_cost, 4);
}
