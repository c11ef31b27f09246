//! Online selection policies: naive greedy, greedy with probability p, and
//! the random-classification policy for size-bounded hypercubes. Each
//! consumes one box per step and emits an irrevocable accept/reject decision.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::geometry::{intersects_unchecked, Box};
use crate::rat::{rat_pow, Rat};
use crate::rng::{CoinThreshold, RandomSource};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicySpec {
    NaiveGreedy,
    /// Accept each non-conflicting box with probability p.
    GreedyP(Rat),
    /// Draw a class index uniformly once, then run greedy on boxes whose side
    /// length falls in that class.
    ClassifiedGreedy { sigma: Rat, k: u32 },
}

impl PolicySpec {
    pub fn validate(&self) -> Result<(), PolicyError> {
        match self {
            PolicySpec::NaiveGreedy => Ok(()),
            PolicySpec::GreedyP(p) => {
                if p.is_negative() || *p > Rat::one() {
                    Err(PolicyError::ProbabilityOutOfRange)
                } else {
                    Ok(())
                }
            }
            PolicySpec::ClassifiedGreedy { sigma, k } => {
                if *sigma < Rat::one() {
                    Err(PolicyError::SigmaBelowOne)
                } else if *k == 0 {
                    Err(PolicyError::ZeroClasses)
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicyError {
    ProbabilityOutOfRange,
    SigmaBelowOne,
    ZeroClasses,
    MixedDimensions,
    SideOutOfRange { index: usize },
    NotACube { index: usize },
    TooManyBoxes { n: usize, max: usize },
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::ProbabilityOutOfRange => write!(f, "acceptance probability outside [0,1]"),
            PolicyError::SigmaBelowOne => write!(f, "sigma must be >= 1"),
            PolicyError::ZeroClasses => write!(f, "class count k must be >= 1"),
            PolicyError::MixedDimensions => write!(f, "input boxes have mixed dimensions"),
            PolicyError::SideOutOfRange { index } => {
                write!(f, "box {index} has side length outside [1, sigma]")
            }
            PolicyError::NotACube { index } => write!(f, "box {index} is not a hypercube"),
            PolicyError::TooManyBoxes { n, max } => {
                write!(f, "{n} boxes exceeds the supported maximum {max}")
            }
        }
    }
}

/// One offer/decision record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub offered: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub decisions: Vec<Decision>,
    pub solution_size: usize,
}

impl Trace {
    pub fn accepted_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.decisions.iter().filter(|d| d.accepted).map(|d| d.offered)
    }
}

/// Runs a policy over the input sequence. One RNG draw is consumed per
/// non-conflicting offer for the probabilistic policy (none for conflicting
/// offers), which fixes the reproducibility contract.
pub fn run_policy(spec: &PolicySpec, boxes: &[Box], rng: &mut RandomSource) -> Result<Trace, PolicyError> {
    spec.validate()?;
    if let Some(first) = boxes.first() {
        if boxes.iter().any(|b| b.dim() != first.dim()) {
            return Err(PolicyError::MixedDimensions);
        }
    }
    match spec {
        PolicySpec::NaiveGreedy => Ok(run_greedy_filtered(boxes, |_| true)),
        PolicySpec::GreedyP(p) => {
            let coin = CoinThreshold::new(p);
            let mut accepted: Vec<&Box> = Vec::new();
            let mut decisions = Vec::with_capacity(boxes.len());
            for (i, b) in boxes.iter().enumerate() {
                let free = accepted.iter().all(|a| !intersects_unchecked(a, b));
                let take = free && coin.draw(rng);
                if take {
                    accepted.push(b);
                }
                decisions.push(Decision { offered: i, accepted: take });
            }
            Ok(Trace { solution_size: accepted.len(), decisions })
        }
        PolicySpec::ClassifiedGreedy { sigma, k } => {
            // precondition: sigma-bounded hypercubes only
            let bounds = class_bounds(sigma, *k)?;
            for (i, b) in boxes.iter().enumerate() {
                let side = b.cube_side().ok_or(PolicyError::NotACube { index: i })?;
                if side < Rat::one() || side > *sigma {
                    return Err(PolicyError::SideOutOfRange { index: i });
                }
            }
            let class = rng.uniform_below(*k as u64) as usize;
            let chosen = &bounds[class];
            Ok(run_greedy_filtered(boxes, |b| {
                chosen.contains_side(&b.cube_side().expect("checked above"))
            }))
        }
    }
}

fn run_greedy_filtered(boxes: &[Box], eligible: impl Fn(&Box) -> bool) -> Trace {
    let mut accepted: Vec<&Box> = Vec::new();
    let mut decisions = Vec::with_capacity(boxes.len());
    for (i, b) in boxes.iter().enumerate() {
        let take = eligible(b) && accepted.iter().all(|a| !intersects_unchecked(a, b));
        if take {
            accepted.push(b);
        }
        decisions.push(Decision { offered: i, accepted: take });
    }
    Trace { solution_size: accepted.len(), decisions }
}

/// One size class `[b^i, b^(i+1)]` with `b = sigma^(1/k)`. Since `b` is
/// irrational in general, membership is decided exactly on k-th powers:
/// side `s` is in class `i` iff `sigma^i <= s^k <= sigma^(i+1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassBound {
    pub index: u32,
    pub k: u32,
    /// `sigma^index`, the k-th power of the class's lower endpoint.
    pub lower_pow: Rat,
    /// `sigma^(index+1)`, the k-th power of the class's upper endpoint.
    pub upper_pow: Rat,
}

impl ClassBound {
    pub fn contains_side(&self, side: &Rat) -> bool {
        let s_k = rat_pow(side, self.k);
        s_k >= self.lower_pow && s_k <= self.upper_pow
    }
}

/// The k closed classes covering `[1, sigma]`; consecutive classes share
/// exactly one boundary point (a side on a boundary belongs to both).
pub fn class_bounds(sigma: &Rat, k: u32) -> Result<Vec<ClassBound>, PolicyError> {
    if *sigma < Rat::one() {
        return Err(PolicyError::SigmaBelowOne);
    }
    if k == 0 {
        return Err(PolicyError::ZeroClasses);
    }
    Ok((0..k)
        .map(|i| ClassBound {
            index: i,
            k,
            lower_pow: rat_pow(sigma, i),
            upper_pow: rat_pow(sigma, i + 1),
        })
        .collect())
}

pub const MAX_EXACT_VERTICES: usize = 20;

/// Exact E[solution size] of greedy-with-probability-p on a concrete box
/// sequence, by recursion over offers with memoization on
/// `(index, blocked mask)`. Cross-checked against the expectation polynomial
/// of the arrangement's ordered graph.
pub fn exact_greedy_p_distribution(boxes: &[Box], p: &Rat) -> Result<Rat, PolicyError> {
    if p.is_negative() || *p > Rat::one() {
        return Err(PolicyError::ProbabilityOutOfRange);
    }
    let n = boxes.len();
    if n > MAX_EXACT_VERTICES {
        return Err(PolicyError::TooManyBoxes { n, max: MAX_EXACT_VERTICES });
    }
    if n == 0 {
        return Ok(Rat::zero());
    }
    if let Some(first) = boxes.first() {
        if boxes.iter().any(|b| b.dim() != first.dim()) {
            return Err(PolicyError::MixedDimensions);
        }
    }
    // pairwise conflict masks
    let mut conflict = alloc::vec![0u64; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if intersects_unchecked(&boxes[i], &boxes[j]) {
                conflict[i] |= 1 << j;
                conflict[j] |= 1 << i;
            }
        }
    }
    let mut memo: BTreeMap<(usize, u64), Rat> = BTreeMap::new();
    Ok(expected_from(&conflict, 0, 0, p, &mut memo))
}

fn expected_from(
    conflict: &[u64],
    mut i: usize,
    blocked: u64,
    p: &Rat,
    memo: &mut BTreeMap<(usize, u64), Rat>,
) -> Rat {
    let n = conflict.len();
    while i < n && blocked & (1 << i) != 0 {
        i += 1;
    }
    if i == n {
        return Rat::zero();
    }
    let key = (i, blocked & !((1u64 << i) - 1));
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let accept = expected_from(conflict, i + 1, blocked | conflict[i], p, memo);
    let reject = expected_from(conflict, i + 1, blocked, p, memo);
    let value = p * (Rat::one() + accept) + (Rat::one() - p) * reject;
    memo.insert(key, value.clone());
    value
}
