use convertbw::code_model::{encode_final, random_mds_pair, CodeParams, ConvertiblePair, Message};
use convertbw::conversion::{
    build_restricted, check_feasible, convert, cost, derive_transform, ConversionError, ReadPlan,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_params() -> impl Strategy<Value = (usize, usize, usize, usize, usize)> {
    (2..=3usize, 1..=2usize, 1..=2usize, 1..=3usize, 1..=2usize)
        .prop_filter("nI <= 8", |&(l, kf, _, ri, _)| l * kf + ri <= 8)
}

fn pair_for(
    (l, kf, rf, ri, ell): (usize, usize, usize, usize, usize),
    seed: u64,
) -> ConvertiblePair {
    let params = CodeParams::new(l, kf, rf, ri, ell, 43).unwrap();
    random_mds_pair(params, seed, 10_000).unwrap()
}

fn random_masks(params: &CodeParams, rng: &mut impl Rng, density: f64) -> Vec<u64> {
    (0..params.n_i())
        .map(|_| {
            (0..params.ell())
                .filter(|_| rng.gen_bool(density))
                .fold(0u64, |m, t| m | (1 << t))
        })
        .collect()
}

fn converts_correctly(pair: &ConvertiblePair, plan: &ReadPlan, messages: usize, seed: u64) -> bool {
    let p = &pair.params;
    let t = derive_transform(pair, plan).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..messages).all(|_| {
        let m = Message::random(p, &mut rng);
        let out = convert(pair, plan, &t, &m).unwrap();
        out.iter()
            .enumerate()
            .all(|(i, cw)| *cw == encode_final(pair, m.segment(p, i)).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn full_read_is_feasible(params in small_params(), seed in any::<u64>()) {
        let pair = pair_for(params, seed);
        let plan = ReadPlan::full(&pair.params);
        prop_assert!(check_feasible(&pair, &plan).unwrap().holds);
        prop_assert!(converts_correctly(&pair, &plan, 100, seed));
    }

    #[test]
    fn adding_reads_keeps_feasibility(params in small_params(), seed in any::<u64>(), density in 0.2..0.9f64) {
        let pair = pair_for(params, seed);
        let p = pair.params;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_masks(&p, &mut rng, density);
        let extra = random_masks(&p, &mut rng, 0.3);
        let bigger: Vec<u64> = base.iter().zip(&extra).map(|(a, b)| a | b).collect();
        let small = ReadPlan::from_masks(&p, &base).unwrap();
        let large = ReadPlan::from_masks(&p, &bigger).unwrap();
        prop_assert!(large.contains_plan(&small));
        if check_feasible(&pair, &small).unwrap().holds {
            prop_assert!(check_feasible(&pair, &large).unwrap().holds);
        }
    }

    #[test]
    fn inclusion_iff_transform_exists(params in small_params(), seed in any::<u64>(), density in 0.1..0.95f64) {
        let pair = pair_for(params, seed);
        let p = pair.params;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let plan = ReadPlan::from_masks(&p, &random_masks(&p, &mut rng, density)).unwrap();
        let holds = check_feasible(&pair, &plan).unwrap().holds;
        match derive_transform(&pair, &plan) {
            Ok(_) => {
                prop_assert!(holds);
                prop_assert!(converts_correctly(&pair, &plan, 100, seed));
            }
            Err(ConversionError::Infeasible { rank_b, rank_joint }) => {
                prop_assert!(!holds);
                prop_assert!(rank_joint > rank_b);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn restricted_shapes_and_read_cost_identity(params in small_params(), seed in any::<u64>(), density in 0.0..1.0f64) {
        let pair = pair_for(params, seed);
        let p = pair.params;
        let ell = p.ell();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let plan = ReadPlan::from_masks(&p, &random_masks(&p, &mut rng, density)).unwrap();
        let rm = build_restricted(&pair, &plan).unwrap();
        let sys_read: usize = (0..p.k_i()).map(|j| plan.beta(j)).sum();
        let parity_read: usize = (p.k_i()..p.n_i()).map(|j| plan.beta(j)).sum();
        prop_assert_eq!(rm.b_tilde.shape(), (p.k_i() * ell - sys_read, parity_read));
        prop_assert_eq!(rm.c_tilde.rows(), rm.b_tilde.rows());
        prop_assert_eq!(rm.c_tilde.cols(), p.lambda() * p.r_f() * ell);
        let feas = check_feasible(&pair, &plan).unwrap();
        if feas.b_full_col_rank {
            prop_assert_eq!(feas.rank_b + p.k_i() * ell - rm.b_tilde.rows(), plan.total_read());
        }
        let c = cost(&plan, &p).unwrap();
        prop_assert_eq!((c.read, c.write, c.total), (plan.total_read(), p.lambda() * p.r_f() * ell, plan.total_read() + p.lambda() * p.r_f() * ell));
    }

    #[test]
    fn empty_plan_is_infeasible(params in small_params(), seed in any::<u64>()) {
        let pair = pair_for(params, seed);
        let p = pair.params;
        let report = check_feasible(&pair, &ReadPlan::empty(&p)).unwrap();
        prop_assert!(!report.holds);
        prop_assert_eq!(report.rank_b, 0);
        // C is MDS, hence of full rank
        prop_assert_eq!(report.rank_c, p.lambda() * p.k_f().min(p.r_f()) * p.ell());
    }
}
