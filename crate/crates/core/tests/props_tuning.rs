//! Numerical properties of the tuning module.

use boxmis_core::geometry::{OrderClass, ShapeClass};
use boxmis_core::rat::{rat, rat_i64, Rat};
use boxmis_core::tuning::{
    bounds_table, dk_derivative_reduced, k_star_multiplier, lambert_w0, sigma_upper_bound,
    AdversaryModel, BoundQuery,
};
use num_bigint::BigInt;
use num_traits::One;

#[test]
fn lambert_round_trip_on_log_grid() {
    // x log-spaced over [1e-6, 1e3]: |w e^w - x| <= 1e-12
    let mut x = 1e-6f64;
    while x <= 1e3 {
        let w = lambert_w0(x).unwrap();
        let residual = (w * w.exp() - x).abs();
        assert!(residual <= 1e-12, "x={x}: residual {residual:.3e}");
        x *= 1.7;
    }
}

#[test]
fn derivative_changes_sign_exactly_once() {
    for (d, sigma) in [(2u32, 4.0f64), (3, 100.0), (10, 1000.0)] {
        let hi = d as f64 * sigma.ln();
        let mut sign_changes = 0;
        let mut prev = dk_derivative_reduced(d, sigma, hi / 10_000.0);
        for k in 2..=10_000 {
            let cur = dk_derivative_reduced(d, sigma, hi * k as f64 / 10_000.0);
            if prev.signum() != cur.signum() && prev != 0.0 {
                sign_changes += 1;
            }
            prev = cur;
        }
        assert_eq!(sign_changes, 1, "d={d} sigma={sigma}");
    }
}

#[test]
fn k_one_equals_adaptive_closed_form() {
    // 50 deterministic pseudo-random (d <= 5, sigma <= 100) pairs
    let mut state = 0x5DEECE66Du64;
    for _ in 0..50 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let d = 1 + (state >> 33) % 5;
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let sigma_num = 4 + (state >> 33) % 397; // sigma = num/4 in [1, 100]
        let sigma = rat(sigma_num as i64, 4);
        let c: BigInt = sigma.ceil().to_integer();
        for order in [OrderClass::Arbitrary, OrderClass::NonDominated] {
            let bound = sigma_upper_bound(d as u32, &sigma, 1, order).unwrap();
            let full = boxmis_core::rat::big_pow(&(&c + 1), d as u32);
            let expected = match order {
                OrderClass::Arbitrary => full,
                _ => full - boxmis_core::rat::big_pow(&c, d as u32),
            };
            assert_eq!(bound, expected, "d={d} sigma={sigma} {order:?}");
        }
    }
}

#[test]
fn oblivious_intervals_are_ordered_and_adaptive_is_tight() {
    let shapes: Vec<(ShapeClass, Option<usize>)> = vec![
        (ShapeClass::UnitCube, None),
        (ShapeClass::SigmaBoundedCube(rat_i64(2)), None),
        (ShapeClass::SigmaBoundedCube(rat(5, 2)), None),
        (ShapeClass::SigmaBoundedCube(rat_i64(100)), None),
        (ShapeClass::UnitVolume, Some(9)),
        (ShapeClass::ArbitraryCube, Some(4)),
        (ShapeClass::ArbitraryRect, Some(17)),
    ];
    for d in 1u32..=4 {
        for order in [OrderClass::NonDominated, OrderClass::Arbitrary, OrderClass::Dominating] {
            for (shape, n) in &shapes {
                for adversary in [AdversaryModel::Adaptive, AdversaryModel::Oblivious] {
                    let q = BoundQuery { shape: shape.clone(), order, adversary, d, n: *n };
                    let entry = match bounds_table(&q) {
                        Ok(e) => e,
                        Err(_) => continue,
                    };
                    assert!(entry.lower <= entry.upper, "{q:?}");
                    if adversary == AdversaryModel::Adaptive {
                        assert!(entry.tight, "{q:?} adaptive entries are tight");
                    }
                    if order == OrderClass::Dominating {
                        assert_eq!(entry.lower, Rat::one());
                    }
                }
            }
        }
    }
}

#[test]
fn multiplier_approaches_one_third_of_d() {
    // for large d the multiplier behaves like d/3 (within 2% at d = 10^4)
    let d = 10_000u32;
    let m = k_star_multiplier(d).unwrap();
    let ratio = m / (d as f64 / 3.0);
    assert!((ratio - 1.0).abs() <= 0.02, "ratio {ratio}");
}
