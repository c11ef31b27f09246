//! Statistical and structural checks for the online policies.

use boxmis_core::expectation::greedy_p_polynomial;
use boxmis_core::geometry::{intersection_graph, intersects, Arrangement, Box, OrderClass, ShapeClass};
use boxmis_core::policies::{exact_greedy_p_distribution, run_policy, PolicySpec};
use boxmis_core::rat::{rat, rat_i64, rat_to_f64, Rat};
use boxmis_core::rng::RandomSource;
use num_traits::One;
use proptest::prelude::*;

fn five_square_fixture() -> Vec<Box> {
    let sq = |lx: i64, ly: i64| {
        Box::new(vec![rat(lx, 10), rat(ly, 10)], vec![rat(lx + 10, 10), rat(ly + 10, 10)]).unwrap()
    };
    vec![sq(-1, -1), sq(2, 2), sq(8, -7), sq(-7, 8), sq(8, 8)]
}

/// Monte Carlo mean of the probabilistic greedy policy agrees with the exact
/// expectation within three standard errors, at 100k seeded trials.
#[test]
fn monte_carlo_matches_exact_distribution() {
    let boxes = five_square_fixture();
    for (num, den) in [(1i64, 2i64), (5, 9), (14, 25)] {
        let p = rat(num, den);
        let exact = rat_to_f64(&exact_greedy_p_distribution(&boxes, &p).unwrap());
        let trials = 100_000u64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for trial in 0..trials {
            let mut rng = RandomSource::for_trial(20_260_101, trial);
            let size = run_policy(&PolicySpec::GreedyP(p.clone()), &boxes, &mut rng)
                .unwrap()
                .solution_size as f64;
            sum += size;
            sum_sq += size * size;
        }
        let mean = sum / trials as f64;
        let var = (sum_sq - sum * sum / trials as f64) / (trials as f64 - 1.0);
        let stderr = (var / trials as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * stderr,
            "p={num}/{den}: mean {mean} vs exact {exact} (3se = {})",
            3.0 * stderr
        );
    }
}

/// The exact recursion over boxes equals the expectation polynomial of the
/// arrangement's ordered graph at the same p.
#[test]
fn exact_distribution_matches_polynomial_route() {
    let boxes = five_square_fixture();
    let arr = Arrangement::new(boxes.clone(), ShapeClass::UnitCube, OrderClass::Arbitrary);
    let g = intersection_graph(&arr).unwrap();
    let poly = greedy_p_polynomial(&g).unwrap();
    assert_eq!(poly.coeffs(), &[0, 5, -7, 3]);
    for (num, den) in [(0i64, 1i64), (1, 2), (5, 9), (1, 1), (3, 7)] {
        let p = rat(num, den);
        assert_eq!(exact_greedy_p_distribution(&boxes, &p).unwrap(), poly.eval(&p));
    }
    assert_eq!(
        exact_greedy_p_distribution(&boxes, &rat(5, 9)).unwrap(),
        rat(275, 243)
    );
}

proptest! {
    /// The classification policy with a single class decides exactly like
    /// naive greedy on any sigma-bounded input.
    #[test]
    fn classified_single_class_equals_naive(seed in 0u64..500, sides in prop::collection::vec(4i64..=10, 1..8)) {
        let sigma = rat(5, 2);
        let boxes: Vec<Box> = sides
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                Box::cube(&[rat(3 * i as i64, 2), rat(i as i64, 2)], &rat(s, 4))
            })
            .collect();
        let spec = PolicySpec::ClassifiedGreedy { sigma: sigma.clone(), k: 1 };
        let mut rng1 = RandomSource::new(seed);
        let mut rng2 = RandomSource::new(seed);
        let classified = run_policy(&spec, &boxes, &mut rng1).unwrap();
        let naive = run_policy(&PolicySpec::NaiveGreedy, &boxes, &mut rng2).unwrap();
        prop_assert_eq!(classified.decisions, naive.decisions);
    }

    /// Decisions are never revoked: extending the input preserves the prefix
    /// of the decision stream.
    #[test]
    fn decisions_monotone_under_prefix_extension(seed in 0u64..500, cut in 1usize..5) {
        let boxes = five_square_fixture();
        let cut = cut.min(boxes.len());
        let spec = PolicySpec::GreedyP(rat(1, 2));
        let mut rng_full = RandomSource::new(seed);
        let full = run_policy(&spec, &boxes, &mut rng_full).unwrap();
        let mut rng_prefix = RandomSource::new(seed);
        let prefix = run_policy(&spec, &boxes[..cut], &mut rng_prefix).unwrap();
        prop_assert_eq!(&full.decisions[..cut], &prefix.decisions[..]);
    }

    /// Accepted sets are independent sets of the intersection graph.
    #[test]
    fn accepted_sets_are_independent(seed in 0u64..500) {
        let boxes = five_square_fixture();
        for spec in [PolicySpec::NaiveGreedy, PolicySpec::GreedyP(rat(2, 3))] {
            let mut rng = RandomSource::new(seed);
            let trace = run_policy(&spec, &boxes, &mut rng).unwrap();
            let accepted: Vec<usize> = trace.accepted_indices().collect();
            for (k, &i) in accepted.iter().enumerate() {
                for &j in &accepted[k + 1..] {
                    prop_assert!(!intersects(&boxes[i], &boxes[j]).unwrap());
                }
            }
        }
    }

    /// Disjoint inputs: the probabilistic policy accepts Binomial(n, p) boxes.
    #[test]
    fn disjoint_inputs_expectation(n in 1usize..10, num in 0i64..=4) {
        let p = rat(num, 4);
        let boxes: Vec<Box> = (0..n as i64)
            .map(|i| Box::cube(&[rat_i64(3 * i), rat_i64(0)], &Rat::one()))
            .collect();
        let exact = exact_greedy_p_distribution(&boxes, &p).unwrap();
        prop_assert_eq!(exact, rat_i64(n as i64) * p);
    }
}
