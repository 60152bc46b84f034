mod oracles;

use leadsto_core::checker::{leads_to_prob, unless_prob, until_prob, window_prob, CheckError};
use leadsto_core::pctl::{Formula, TimeBound};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bounded_until_and_unless_match_path_enumeration(seed in any::<u64>(), states in 1usize..=5, tmax in 0usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = oracles::random_dtmc(&mut rng, states);
        let f1: Vec<bool> = (0..states).map(|_| rng.gen_bool(0.6)).collect();
        let f2: Vec<bool> = (0..states).map(|_| rng.gen_bool(0.3)).collect();
        let bound = TimeBound::Finite(tmax as u64);
        let u = until_prob(&m, &f1, &f2, bound).unwrap();
        let w = unless_prob(&m, &f1, &f2, bound).unwrap();
        for s in 0..states {
            prop_assert!((u[s] - oracles::until_oracle(&m, &f1, &f2, tmax, s)).abs() < 1e-10);
            prop_assert!((w[s] - oracles::unless_oracle(&m, &f1, &f2, tmax, s)).abs() < 1e-10);
            prop_assert!(u[s] <= w[s] + 1e-12);
        }
    }

    #[test]
    fn leads_to_matches_weighted_window_enumeration(seed in any::<u64>(), states in 1usize..=5, tmin in 1usize..=3, span in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = oracles::random_dtmc(&mut rng, states);
        let tmax = tmin + span;
        let (p, q) = (m.atom_index("p").unwrap(), m.atom_index("q").unwrap());
        let cause: Vec<bool> = (0..states).map(|s| m.holds(s, p)).collect();
        let effect: Vec<bool> = (0..states).map(|s| m.holds(s, q)).collect();
        let window = window_prob(&m, &effect, tmin as u64, TimeBound::Finite(tmax as u64)).unwrap();
        for s in 0..states {
            prop_assert!((window[s] - oracles::window_oracle(&m, &effect, tmin, tmax, s)).abs() < 1e-10);
        }
        let weight: u64 = (0..states).filter(|&s| cause[s]).map(|s| m.frequency()[s]).sum();
        let got = leads_to_prob(&m, &Formula::atom("p"), &Formula::atom("q"), tmin as u64, TimeBound::Finite(tmax as u64));
        if weight == 0 {
            prop_assert_eq!(got.unwrap_err(), CheckError::EmptyCause);
        } else {
            let want: f64 = (0..states)
                .filter(|&s| cause[s])
                .map(|s| m.frequency()[s] as f64 * oracles::window_oracle(&m, &effect, tmin, tmax, s))
                .sum::<f64>() / weight as f64;
            let got = got.unwrap();
            prop_assert_eq!(got.denominator, weight);
            prop_assert!((got.probability - want).abs() < 1e-10);
        }
    }

    #[test]
    fn unbounded_until_is_the_limit_of_bounded(seed in any::<u64>(), states in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = oracles::random_dtmc(&mut rng, states);
        let f1: Vec<bool> = (0..states).map(|_| rng.gen_bool(0.7)).collect();
        let f2: Vec<bool> = (0..states).map(|_| rng.gen_bool(0.3)).collect();
        let inf = until_prob(&m, &f1, &f2, TimeBound::Infinite).unwrap();
        let mut prev = vec![0.0; states];
        for t in [1u64, 5, 50, 500] {
            let b = until_prob(&m, &f1, &f2, TimeBound::Finite(t)).unwrap();
            for s in 0..states {
                prop_assert!(b[s] + 1e-12 >= prev[s]);
                prop_assert!(b[s] <= inf[s] + 1e-9);
            }
            prev = b.0;
        }
    }
}
