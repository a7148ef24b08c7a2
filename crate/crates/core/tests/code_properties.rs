use convertbw::code_model::{
    decode_initial, encode_final, encode_initial, is_mds_by_subsets, is_mds_systematic,
    is_superregular_blocks, random_mds_pair, CodeParams, ConvertiblePair, Message, SplitParams,
};
use convertbw::ff_linalg::{Matrix, PrimeField};
use itertools::Itertools;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Small parameters with `nI <= 8` and `ell <= 2`.
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn params_validation_is_idempotent(l in 0..5usize, kf in 0..5usize, rf in 0..5usize, ri in 0..5usize, ell in 0..4usize) {
        let first = SplitParams::new(l, kf, rf, ri, ell);
        match first {
            Ok(p) => {
                prop_assert!(l >= 2 && kf > 0 && rf > 0 && ri > 0 && ell > 0);
                prop_assert_eq!(SplitParams::new(p.lambda, p.k_f, p.r_f, p.r_i, p.ell), Ok(p));
                prop_assert_eq!(p.k_i(), l * kf);
                prop_assert_eq!(p.n_i(), l * kf + ri);
            }
            Err(_) => prop_assert!(l < 2 || kf == 0 || rf == 0 || ri == 0 || ell == 0),
        }
    }

    #[test]
    fn mds_paths_agree(
        p in prop::sample::select(vec![2u64, 3, 5, 7]),
        n in 2..=8usize,
        k_frac in 0.0..1.0f64,
        ell in 1..=2usize,
        seed in any::<u64>(),
    ) {
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        prop_assume!(k < n);
        let field = PrimeField::new(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parity = Matrix::from_fn(field, k * ell, (n - k) * ell, |_, _| rand::Rng::gen_range(&mut rng, 0..p as u32));
        let by_subsets = is_mds_by_subsets(n, k, ell, &parity).unwrap();
        let by_blocks = is_superregular_blocks(n, k, ell, &parity).unwrap();
        prop_assert_eq!(by_subsets, by_blocks);
        prop_assert_eq!(is_mds_systematic(n, k, ell, &parity).unwrap(), by_subsets);
    }

    #[test]
    fn any_ki_symbols_decode(params in small_params(), seed in any::<u64>()) {
        let pair = pair_for(params, seed);
        let p = pair.params;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdec0de);
        let all: Vec<usize> = (0..p.n_i()).collect();
        for _ in 0..50 {
            let m = Message::random(&p, &mut rng);
            let cw = encode_initial(&pair, &m).unwrap();
            let mut positions: Vec<usize> = all.choose_multiple(&mut rng, p.k_i()).copied().collect();
            positions.shuffle(&mut rng);
            let symbols: Vec<Vec<u32>> = positions.iter().map(|&j| cw[j].clone()).collect();
            prop_assert_eq!(decode_initial(&pair, &positions, &symbols).unwrap(), m);
        }
    }

    #[test]
    fn kf_plus_one_final_symbols_are_dependent(params in small_params(), seed in any::<u64>()) {
        let pair = pair_for(params, seed);
        let p = pair.params;
        let (ell, k_f) = (p.ell(), p.k_f());
        let g = pair.final_generator();
        for symbols in (0..p.n_f()).combinations(k_f + 1) {
            let cols: Vec<usize> = symbols.iter().flat_map(|&j| j * ell..(j + 1) * ell).collect();
            prop_assert!(g.select_cols(&cols).unwrap().rank() < (k_f + 1) * ell);
        }
        for symbols in (0..p.n_f()).combinations(k_f) {
            let cols: Vec<usize> = symbols.iter().flat_map(|&j| j * ell..(j + 1) * ell).collect();
            prop_assert_eq!(g.select_cols(&cols).unwrap().rank(), k_f * ell);
        }
    }

    #[test]
    fn systematic_symbols_carry_the_message(params in small_params(), seed in any::<u64>()) {
        let pair = pair_for(params, seed);
        let p = pair.params;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Message::random(&p, &mut rng);
        let cw = encode_initial(&pair, &m).unwrap();
        let flat: Vec<u32> = cw[..p.k_i()].concat();
        prop_assert_eq!(flat.as_slice(), m.as_slice());
        for i in 0..p.lambda() {
            let f = encode_final(&pair, m.segment(&p, i)).unwrap();
            prop_assert_eq!(&f[..p.k_f()], &cw[i * p.k_f()..(i + 1) * p.k_f()]);
        }
    }
}

#[test]
fn generation_is_deterministic_per_seed() {
    let params = CodeParams::new(2, 2, 1, 2, 2, 43).unwrap();
    assert_eq!(
        random_mds_pair(params, 9, 1000).unwrap(),
        random_mds_pair(params, 9, 1000).unwrap()
    );
    assert_ne!(
        random_mds_pair(params, 9, 1000).unwrap(),
        random_mds_pair(params, 10, 1000).unwrap()
    );
}
