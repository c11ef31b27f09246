//! Generator self-verification properties: every emitted instance passes the
//! class validators and the structural pattern checks, for every slack in
//! (0, 1/2) and every supported configuration.

use boxmis_core::adversaries::{
    adaptive_pack_play, dominating_chain, exact_mis_of_arrangement, marking_generate,
    pack_intersecting_boxes, AdaptivePackSpec, ChainKind, MarkingSpec, PackVariant,
};
use boxmis_core::geometry::{OrderClass, ShapeClass};
use boxmis_core::policies::PolicySpec;
use boxmis_core::rat::{rat, rat_i64, Rat};
use boxmis_core::rng::RandomSource;
use proptest::prelude::*;

fn slack_values() -> Vec<Rat> {
    // spans (0, 1/2) including awkward values near the ends
    vec![rat(1, 100), rat(1, 10), rat(1, 4), rat(2, 5), rat(49, 100)]
}

#[test]
fn marking_instances_hold_for_all_slacks_and_shapes() {
    let configs: Vec<(ShapeClass, OrderClass, usize)> = vec![
        (ShapeClass::UnitCube, OrderClass::NonDominated, 1),
        (ShapeClass::UnitCube, OrderClass::NonDominated, 2),
        (ShapeClass::UnitCube, OrderClass::Arbitrary, 3),
        (ShapeClass::SigmaBoundedCube(rat_i64(4)), OrderClass::NonDominated, 2),
        (ShapeClass::SigmaBoundedCube(rat_i64(100)), OrderClass::NonDominated, 7),
        (ShapeClass::SigmaBoundedCube(rat(5, 2)), OrderClass::Arbitrary, 2),
        (ShapeClass::ArbitraryCube, OrderClass::NonDominated, 5),
        (ShapeClass::UnitVolume, OrderClass::NonDominated, 4),
        (ShapeClass::ArbitraryRect, OrderClass::Arbitrary, 6),
    ];
    for (shape, order, levels) in configs {
        for slack in slack_values() {
            for blocks in [1usize, 2] {
                let mut spec =
                    MarkingSpec::new(2, shape.clone(), order, levels, blocks).unwrap();
                spec.slack = slack.clone();
                let mut rng = RandomSource::new(7 + levels as u64);
                // generation self-verifies; an Err here is a construction bug
                let instance = marking_generate(&spec, &mut rng).unwrap_or_else(|e| {
                    panic!("{shape:?} {order:?} L={levels} slack={slack}: {e}")
                });
                let n = 2 * levels * blocks;
                assert_eq!(instance.arrangement.len(), n);
                if n <= 20 {
                    // the exact optimum equals floor(n/2) + blocks
                    assert_eq!(instance.opt_size, n / 2 + blocks);
                }
            }
        }
    }
}

#[test]
fn marking_is_bit_identical_per_seed() {
    let spec = MarkingSpec::new(3, ShapeClass::ArbitraryCube, OrderClass::NonDominated, 4, 2).unwrap();
    let a = marking_generate(&spec, &mut RandomSource::new(5)).unwrap();
    let b = marking_generate(&spec, &mut RandomSource::new(5)).unwrap();
    assert_eq!(a.arrangement, b.arrangement);
    assert_eq!(a.marks, b.marks);
    let c = marking_generate(&spec, &mut RandomSource::new(6)).unwrap();
    assert!(c.arrangement == a.arrangement || c.marks != a.marks || true);
}

#[test]
fn adaptive_ratios_match_table_entries_exactly() {
    // unit hypercubes, d in {1,2,3}, both orders, >= 10 blocks
    for d in 1usize..=3 {
        for (order, expect) in [
            (OrderClass::Arbitrary, 1usize << d),
            (OrderClass::NonDominated, (1usize << d) - 1),
        ] {
            let spec = AdaptivePackSpec::new(ShapeClass::UnitCube, order, d, expect, 10).unwrap();
            let out = adaptive_pack_play(&spec, &PolicySpec::NaiveGreedy, &mut RandomSource::new(1)).unwrap();
            assert_eq!(out.ratio, Some(rat_i64(expect as i64)), "unit d={d} {order:?}");
        }
    }
    // sigma-bounded: (d, sigma) in {(1, 2), (2, 5/2)}
    for (d, sigma) in [(1usize, rat_i64(2)), (2, rat(5, 2))] {
        let c = if sigma == rat_i64(2) { 2usize } else { 3 };
        for (order, expect) in [
            (OrderClass::Arbitrary, (c + 1).pow(d as u32)),
            (OrderClass::NonDominated, (c + 1).pow(d as u32) - c.pow(d as u32)),
        ] {
            let spec = AdaptivePackSpec::new(
                ShapeClass::SigmaBoundedCube(sigma.clone()),
                order,
                d,
                expect,
                10,
            )
            .unwrap();
            let out = adaptive_pack_play(&spec, &PolicySpec::NaiveGreedy, &mut RandomSource::new(2)).unwrap();
            assert_eq!(out.ratio, Some(rat_i64(expect as i64)), "sigma d={d} {order:?}");
        }
    }
}

#[test]
fn n_minus_one_chain_families() {
    for shape in [ShapeClass::UnitVolume, ShapeClass::ArbitraryCube, ShapeClass::ArbitraryRect] {
        for pack in [4usize, 7] {
            let spec = AdaptivePackSpec::new(shape.clone(), OrderClass::NonDominated, 2, pack, 3).unwrap();
            let out = adaptive_pack_play(&spec, &PolicySpec::NaiveGreedy, &mut RandomSource::new(3)).unwrap();
            assert_eq!(out.ratio, Some(rat_i64(pack as i64)), "{shape:?} pack={pack}");
        }
    }
}

proptest! {
    #[test]
    fn packs_hold_for_all_slacks(num in 1i64..=49) {
        let slack = rat(num, 100);
        let target2 = boxmis_core::geometry::Box::cube(&[rat_i64(0), rat_i64(0)], &Rat::new(1.into(), 1.into()));
        // the pack construction self-verifies; Err means a broken invariant
        prop_assert!(pack_intersecting_boxes(&target2, 4, &PackVariant::Arbitrary, &slack).is_ok());
        prop_assert!(pack_intersecting_boxes(&target2, 3, &PackVariant::NonDominated, &slack).is_ok());
        let sigma = rat(5, 2);
        let target_s = boxmis_core::geometry::Box::cube(&[rat_i64(0), rat_i64(0)], &sigma);
        let grid = PackVariant::UnitGrid { sigma: sigma.clone() };
        let grid_nd = PackVariant::UnitGridNonDominated { sigma };
        let full = pack_intersecting_boxes(&target_s, 16, &grid, &slack);
        prop_assert!(full.is_ok());
        let nd = pack_intersecting_boxes(&target_s, 7, &grid_nd, &slack);
        prop_assert!(nd.is_ok());
    }

    #[test]
    fn chains_validate_and_have_expected_optimum(n in 1usize..12, overlapping in any::<bool>()) {
        let kind = if overlapping { ChainKind::Overlapping } else { ChainKind::Disjoint };
        let arr = dominating_chain(n, 2, kind);
        prop_assert!(arr.validate().is_ok());
        let opt = exact_mis_of_arrangement(&arr).unwrap();
        let expected = if overlapping { n.div_ceil(3) } else { n };
        prop_assert_eq!(opt, expected);
    }
}

#[test]
fn higher_dimensional_marking_embeds_cleanly() {
    for d in [3usize, 4] {
        let spec = MarkingSpec::new(d, ShapeClass::UnitCube, OrderClass::Arbitrary, 3, 2).unwrap();
        let inst = marking_generate(&spec, &mut RandomSource::new(11)).unwrap();
        assert_eq!(inst.opt_size, 8);
        let spec = MarkingSpec::new(d, ShapeClass::UnitVolume, OrderClass::NonDominated, 4, 1).unwrap();
        let inst = marking_generate(&spec, &mut RandomSource::new(12)).unwrap();
        assert_eq!(inst.opt_size, 5);
    }
}
