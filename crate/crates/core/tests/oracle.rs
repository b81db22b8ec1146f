mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::oracle;
use eipe_core::harness::synthesize_driver;

fn check(problem_id: &str, seed: u64, n: usize) {
    let p = common::bank().get(problem_id).unwrap().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suite = oracle::random_suite(problem_id, n, &mut rng);
    let driver = synthesize_driver(&p.signature, &suite).unwrap();
    let h = common::harness();
    let got = h.reference_observations(&p.reference_source, &driver, h.limits()).unwrap();
    for (i, case) in suite.iter().enumerate() {
        assert_eq!(got[i], oracle::expected(problem_id, i, &case.args), "{problem_id} {:?}", case.args);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn reference_matches_independent_semantics(seed in any::<u64>(), task in 0usize..8) {
        let id = common::bank().ids().nth(task).unwrap().to_string();
        check(&id, seed, 25);
    }
}

#[test]
fn shipped_suites_match_independent_semantics() {
    let h = common::harness();
    for p in common::bank().iter() {
        let driver = synthesize_driver(&p.signature, &p.test_suite).unwrap();
        let got = h.reference_observations(&p.reference_source, &driver, h.limits()).unwrap();
        for (i, case) in p.test_suite.iter().enumerate() {
            assert_eq!(got[i], oracle::expected(&p.id, i, &case.args), "{}", p.id);
        }
    }
}
