//! Closed-form bound calculators and the k-tuning for the random
//! classification policy on size-bounded hypercubes: the k-dependent upper
//! bounds, the derivative in k, the Lambert-W closed form for the continuous
//! optimizer, and integer-k selection.
//!
//! Ceilings (of sigma, of log2 sigma, of sigma^(1/k)) are computed by exact
//! integer-power comparisons, never by floating logarithms: the ceiling
//! discontinuities sit exactly where floating error bites.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::geometry::{OrderClass, ShapeClass};
use crate::rat::{big_pow, ceil_kth_root, ceil_log2, rat, rat_i64, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TuningError {
    DomainViolation,
    SigmaNotAboveOne,
    InconsistentQuery(&'static str),
}

impl fmt::Display for TuningError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TuningError::DomainViolation => write!(f, "argument outside the function domain"),
            TuningError::SigmaNotAboveOne => write!(f, "sigma must exceed 1"),
            TuningError::InconsistentQuery(msg) => write!(f, "inconsistent bound query: {msg}"),
        }
    }
}

/// Principal branch of the Lambert W function: the w >= -1 with w e^w = x,
/// for x >= -1/e. Halley iteration; bisection bracket for the negative
/// segment where the iteration is less tame.
pub fn lambert_w0(x: f64) -> Result<f64, TuningError> {
    const INV_E: f64 = 0.36787944117144233;
    if !(x >= -INV_E) {
        return Err(TuningError::DomainViolation);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut w = if x > 0.0 {
        libm::log(1.0 + x)
    } else {
        // bracket in [-1, 0]: w e^w is increasing there
        let (mut lo, mut hi) = (-1.0f64, 0.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid * libm::exp(mid) > x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    for _ in 0..100 {
        let ew = libm::exp(w);
        let f = w * ew - x;
        let denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        let next = w - f / denom;
        if !next.is_finite() {
            break;
        }
        if libm::fabs(next - w) <= 1e-16 * libm::fabs(next).max(1e-300) {
            w = next;
            break;
        }
        w = next;
    }
    Ok(w)
}

/// The dimension-dependent multiplier `(W0(2 e^(-1/d) / d) + 1/d)^-1`;
/// the continuous optimum is this multiplier times ln(sigma).
pub fn k_star_multiplier(d: u32) -> Result<f64, TuningError> {
    if d == 0 {
        return Err(TuningError::DomainViolation);
    }
    let df = d as f64;
    let w = lambert_w0(2.0 * libm::exp(-1.0 / df) / df)?;
    Ok(1.0 / (w + 1.0 / df))
}

/// Continuous optimizer of the looser classification bound (sigma^(1/k)+2)^d k.
pub fn k_star(d: u32, sigma: &Rat) -> Result<f64, TuningError> {
    if *sigma <= Rat::one() {
        return Err(TuningError::SigmaNotAboveOne);
    }
    let ln_sigma = libm::log(sigma.to_f64().ok_or(TuningError::DomainViolation)?);
    Ok(ln_sigma * k_star_multiplier(d)?)
}

/// d/dk of `(sigma^(1/k) + 2)^d k`, evaluated as
/// `(sigma^(1/k)+2)^(d-1) * (2 + sigma^(1/k) (1 - d ln(sigma) / k))`.
pub fn dk_derivative(d: u32, sigma: f64, k: f64) -> f64 {
    libm::pow(libm::pow(sigma, 1.0 / k) + 2.0, d as f64 - 1.0) * dk_derivative_reduced(d, sigma, k)
}

/// The scalar factor of the derivative, without the `(sigma^(1/k)+2)^(d-1)`
/// scale (which overflows for large d).
pub fn dk_derivative_reduced(d: u32, sigma: f64, k: f64) -> f64 {
    let b = libm::pow(sigma, 1.0 / k);
    2.0 + b * (1.0 - d as f64 * libm::log(sigma) / k)
}

/// Exact classification upper bound at integer k:
/// non-dominated `(ceil(b)+1)^d k - ceil(b)^d k`, arbitrary `(ceil(b)+1)^d k`,
/// with `ceil(b)` the smallest integer c with `c^k >= sigma`.
pub fn sigma_upper_bound(d: u32, sigma: &Rat, k: u32, order: OrderClass) -> Result<BigInt, TuningError> {
    if *sigma < Rat::one() || k == 0 {
        return Err(TuningError::DomainViolation);
    }
    let c = ceil_kth_root(sigma, k).ok_or(TuningError::DomainViolation)?;
    let kb = BigInt::from(k);
    match order {
        OrderClass::NonDominated => {
            Ok(big_pow(&(&c + 1), d) * &kb - big_pow(&c, d) * &kb)
        }
        OrderClass::Arbitrary => Ok(big_pow(&(&c + 1), d) * &kb),
        OrderClass::Dominating => Err(TuningError::InconsistentQuery("no classification bound in dominating order")),
    }
}

/// `(ceil(log2 sigma) + 1) / 2` with the ceiling taken exactly.
pub fn sigma_lower_bound(sigma: &Rat) -> Result<Rat, TuningError> {
    if *sigma < Rat::one() {
        return Err(TuningError::DomainViolation);
    }
    let l = ceil_log2(sigma).ok_or(TuningError::DomainViolation)?;
    Ok(rat(l as i64 + 1, 2))
}

#[derive(Clone, Debug)]
pub struct KTuning {
    pub d: u32,
    pub sigma: Rat,
    pub k_star: f64,
    pub k_chosen: u32,
    pub bound_at_k: BigInt,
    /// Every candidate evaluated, as (k, bound).
    pub candidates: Vec<(u32, BigInt)>,
}

/// Evaluates the arbitrary-order classification bound at every integer in
/// `[1, ceil(log2 sigma)]` and at the floor and ceiling of the continuous
/// optimizer, returning the minimizer (ties to the smaller k).
pub fn choose_k(d: u32, sigma: &Rat) -> Result<KTuning, TuningError> {
    if *sigma <= Rat::one() {
        return Err(TuningError::SigmaNotAboveOne);
    }
    let ks = k_star(d, sigma)?;
    let ceil_log = ceil_log2(sigma).unwrap_or(1).max(1);
    let mut ks_floor = libm::floor(ks) as i64;
    let mut ks_ceil = libm::ceil(ks) as i64;
    if ks_floor < 1 {
        ks_floor = 1;
    }
    if ks_ceil < 1 {
        ks_ceil = 1;
    }
    let mut candidate_ks: Vec<u32> = (1..=ceil_log).collect();
    for extra in [ks_floor as u32, ks_ceil as u32] {
        if !candidate_ks.contains(&extra) {
            candidate_ks.push(extra);
        }
    }
    candidate_ks.sort_unstable();
    let mut candidates = Vec::with_capacity(candidate_ks.len());
    let mut best: Option<(u32, BigInt)> = None;
    for k in candidate_ks {
        let bound = sigma_upper_bound(d, sigma, k, OrderClass::Arbitrary)?;
        if best.as_ref().map_or(true, |(_, b)| bound < *b) {
            best = Some((k, bound.clone()));
        }
        candidates.push((k, bound));
    }
    let (k_chosen, bound_at_k) = best.expect("candidate list is nonempty");
    Ok(KTuning { d, sigma: sigma.clone(), k_star: ks, k_chosen, bound_at_k, candidates })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdversaryModel {
    Adaptive,
    Oblivious,
}

#[derive(Clone, Debug)]
pub struct BoundQuery {
    pub shape: ShapeClass,
    pub order: OrderClass,
    pub adversary: AdversaryModel,
    pub d: u32,
    pub n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub lower: Rat,
    pub upper: Rat,
    pub tight: bool,
}

impl TableEntry {
    fn tight_value(v: Rat) -> Self {
        TableEntry { lower: v.clone(), upper: v, tight: true }
    }

    fn interval(lower: Rat, upper: Rat) -> Self {
        let tight = lower == upper;
        TableEntry { lower, upper, tight }
    }
}

/// The competitive-ratio table entry for a shape/order/adversary query.
pub fn bounds_table(q: &BoundQuery) -> Result<TableEntry, TuningError> {
    if q.d == 0 {
        return Err(TuningError::InconsistentQuery("dimension must be >= 1"));
    }
    // dominating order: the naive greedy policy is optimal for every class
    if q.order == OrderClass::Dominating {
        return Ok(TableEntry::tight_value(Rat::one()));
    }
    let two_d = Rat::from_integer(big_pow(&BigInt::from(2), q.d));
    let need_n = || q.n.ok_or(TuningError::InconsistentQuery("this entry needs the instance size n"));
    match (&q.shape, q.adversary) {
        (ShapeClass::UnitCube, AdversaryModel::Adaptive) => Ok(TableEntry::tight_value(match q.order {
            OrderClass::NonDominated => &two_d - Rat::one(),
            _ => two_d.clone(),
        })),
        (ShapeClass::UnitCube, AdversaryModel::Oblivious) => Ok(match q.order {
            OrderClass::NonDominated => TableEntry::interval(rat(12, 7), &two_d - Rat::one()),
            _ => TableEntry::interval(rat(32, 15), two_d.clone()),
        }),
        (ShapeClass::SigmaBoundedCube(sigma), adversary) => {
            if *sigma < Rat::one() {
                return Err(TuningError::InconsistentQuery("sigma must be >= 1"));
            }
            match adversary {
                AdversaryModel::Adaptive => {
                    let c = sigma.ceil().to_integer();
                    let full = Rat::from_integer(big_pow(&(&c + 1), q.d));
                    Ok(TableEntry::tight_value(match q.order {
                        OrderClass::NonDominated => full - Rat::from_integer(big_pow(&c, q.d)),
                        _ => full,
                    }))
                }
                AdversaryModel::Oblivious => {
                    if *sigma <= Rat::one() {
                        return Err(TuningError::InconsistentQuery(
                            "the oblivious sigma entry needs sigma > 1; use the unit row",
                        ));
                    }
                    let l = ceil_log2(sigma).unwrap() as i64;
                    let lower = sigma_lower_bound(sigma)?;
                    let three_d = Rat::from_integer(big_pow(&BigInt::from(3), q.d));
                    let upper = match q.order {
                        OrderClass::NonDominated => (three_d - &two_d) * rat_i64(l),
                        _ => three_d * rat_i64(l),
                    };
                    Ok(TableEntry::interval(lower, upper))
                }
            }
        }
        (ShapeClass::UnitVolume | ShapeClass::ArbitraryCube | ShapeClass::ArbitraryRect, adversary) => {
            let n = need_n()?;
            if n == 0 {
                return Err(TuningError::InconsistentQuery("n must be positive"));
            }
            let n_minus_1 = rat_i64(n as i64 - 1);
            match adversary {
                AdversaryModel::Adaptive => Ok(TableEntry::tight_value(n_minus_1)),
                AdversaryModel::Oblivious => {
                    let lower = rat((n / 2) as i64, 2) + rat(1, 2);
                    Ok(TableEntry::interval(lower, n_minus_1))
                }
            }
        }
    }
}
