//! Search correctness against an independent reference scan, plus the
//! closed-form floor properties.

use boxmis_core::expectation::{block_formula_ratio, greedy_p_polynomial};
use boxmis_core::geometry::OrderClass;
use boxmis_core::graph::mis_size;
use boxmis_core::rat::{rat, rat_i64, Rat};
use boxmis_core::search::{enumerate_ordered_graphs, minimax_search, SearchConfig};
use num_traits::{One, Zero};

/// Single-threaded reference: for each p, maximize opt/E(p) over all graphs
/// using the memoized polynomial route (independent of the scan kernel).
fn reference_worst(n: usize, p: &Rat) -> Option<(u64, usize, Rat)> {
    if p.is_zero() {
        return None;
    }
    let mut best: Option<(u64, usize, Rat)> = None;
    for g in enumerate_ordered_graphs(n).unwrap() {
        let e = greedy_p_polynomial(&g).unwrap().eval(p);
        let opt = mis_size(&g).size;
        let better = match &best {
            None => true,
            Some((_, bopt, be)) => {
                Rat::from_integer(opt.into()) * be > Rat::from_integer((*bopt).into()) * &e
            }
        };
        if better {
            best = Some((g.edge_mask(), opt, e));
        }
    }
    best
}

#[test]
fn scan_equals_reference_for_small_n() {
    for n in 1..=4usize {
        let cfg = SearchConfig::with_grid_step_hundredths(n);
        let result = minimax_search(&cfg).unwrap();
        for pp in &result.per_p {
            let expected = reference_worst(n, &pp.p);
            match (&pp.entry, expected) {
                (None, None) => {}
                (Some(e), Some((mask, opt, expectation))) => {
                    assert_eq!(e.mask, mask, "n={n} p={}", pp.p);
                    assert_eq!(e.opt, opt);
                    assert_eq!(e.expectation, expectation);
                }
                other => panic!("n={n} p={}: {other:?}", pp.p),
            }
        }
    }
}

#[test]
fn worst_ratio_floors() {
    // the per-p worst ratio is at least 1/p (all-disjoint input) and at
    // least the closed-form block ratio when the block graph fits in n
    for n in 2..=5usize {
        let cfg = SearchConfig::with_grid_step_hundredths(n);
        let result = minimax_search(&cfg).unwrap();
        for pp in &result.per_p {
            let Some(entry) = &pp.entry else { continue };
            let inv_p = Rat::one() / &pp.p;
            assert!(entry.ratio >= inv_p, "n={n} p={}", pp.p);
            // d=2 non-dominated block needs 1 + 3 vertices; arbitrary needs 1 + 4
            if n == 4 {
                let floor = block_formula_ratio(2, OrderClass::NonDominated, &pp.p).unwrap();
                assert!(entry.ratio >= floor, "n=4 p={}", pp.p);
            }
            if n == 5 {
                let floor = block_formula_ratio(2, OrderClass::Arbitrary, &pp.p).unwrap();
                assert!(entry.ratio >= floor, "n=5 p={}", pp.p);
            }
        }
    }
}

#[test]
fn table_rows_for_small_n() {
    let expectations = [
        (1usize, rat_i64(1), Rat::one()),
        (2, rat_i64(1), Rat::one()),
        (3, rat(3, 4), rat(16, 9)),
        (4, rat(67, 100), rat(3, 1) / rat(13333, 10000)),
        (5, rat(14, 25), rat(46875, 17682)),
    ];
    for (n, best_p, ratio) in expectations {
        let cfg = SearchConfig::with_grid_step_hundredths(n);
        let result = minimax_search(&cfg).unwrap();
        let (p, entry) = result.best_entry().unwrap();
        assert_eq!(p, &best_p, "n={n}");
        assert_eq!(entry.ratio, ratio, "n={n}");
    }
}
