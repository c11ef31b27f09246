//! Adversary instance generators: adaptive packing adversaries that play
//! against a live policy, oblivious marking adversaries (randomized level
//! constructions), and dominating-order chains.
//!
//! Every generator re-validates the geometry it emits (shape class, order
//! class, and the exact intersection pattern) and refuses to return an
//! instance that fails its own specification.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::geometry::{
    dominates_unchecked, intersection_graph, intersects_unchecked, Arrangement, Box, OrderClass,
    ShapeClass,
};
use crate::graph::{mis_size, OrderedGraph};
use crate::policies::{PolicyError, PolicySpec, Trace};
use crate::rat::{rat, rat_i64, rat_pow, Rat};
use crate::rng::{CoinThreshold, RandomSource};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdversaryError {
    UnsupportedConfiguration(&'static str),
    PackTooLarge { requested: usize, maximum: usize },
    SlackOutOfRange,
    SelfCheckFailed(&'static str),
    ComponentTooLarge { size: usize },
    PackCountMismatch { given: usize, expected: usize },
    Policy(PolicyError),
}

impl fmt::Display for AdversaryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryError::UnsupportedConfiguration(msg) => write!(f, "unsupported configuration: {msg}"),
            AdversaryError::PackTooLarge { requested, maximum } => {
                write!(f, "pack of {requested} exceeds the combinatorial maximum {maximum}")
            }
            AdversaryError::SlackOutOfRange => write!(f, "slack must lie in (0, 1/2)"),
            AdversaryError::SelfCheckFailed(msg) => write!(f, "generated instance failed self-validation: {msg}"),
            AdversaryError::ComponentTooLarge { size } => {
                write!(f, "component of {size} boxes exceeds the exact solver limit")
            }
            AdversaryError::PackCountMismatch { given, expected } => {
                write!(f, "pack_count {given} does not match the configuration formula {expected}")
            }
            AdversaryError::Policy(e) => write!(f, "policy error: {e}"),
        }
    }
}

impl From<PolicyError> for AdversaryError {
    fn from(e: PolicyError) -> Self {
        AdversaryError::Policy(e)
    }
}

pub fn default_slack() -> Rat {
    rat(1, 10)
}

fn check_slack(slack: &Rat) -> Result<(), AdversaryError> {
    if slack <= &Rat::zero() || slack >= &rat(1, 2) {
        return Err(AdversaryError::SlackOutOfRange);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Packs of boxes intersecting a target
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PackVariant {
    /// Unit corner construction, all 2^d sign patterns.
    Arbitrary,
    /// Unit corner construction minus the one dominated pattern: 2^d - 1.
    NonDominated,
    /// Unit grid around a side-sigma cube: (ceil(sigma)+1)^d positions.
    UnitGrid { sigma: Rat },
    /// Unit grid minus the ceil(sigma)^d positions dominated by the target.
    UnitGridNonDominated { sigma: Rat },
}

impl PackVariant {
    pub fn maximum(&self, d: usize) -> usize {
        match self {
            PackVariant::Arbitrary => 1usize << d,
            PackVariant::NonDominated => (1usize << d) - 1,
            PackVariant::UnitGrid { sigma } => {
                let c = ceil_int(sigma);
                (c + 1).pow(d as u32)
            }
            PackVariant::UnitGridNonDominated { sigma } => {
                let c = ceil_int(sigma);
                (c + 1).pow(d as u32) - c.pow(d as u32)
            }
        }
    }
}

fn ceil_int(x: &Rat) -> usize {
    use num_traits::ToPrimitive;
    x.ceil().to_integer().to_usize().expect("sigma is small and positive")
}

/// `m` pairwise-disjoint boxes, each intersecting `target`, satisfying the
/// variant's shape and order side conditions. Unit corner construction: for
/// each sign pattern `s` in {0,1}^d, a unit box with
/// `lower[j] = target.lower[j] - (1 - slack) + 2 (1 - slack) s[j]`.
pub fn pack_intersecting_boxes(
    target: &Box,
    m: usize,
    variant: &PackVariant,
    slack: &Rat,
) -> Result<Vec<Box>, AdversaryError> {
    check_slack(slack)?;
    let d = target.dim();
    let maximum = variant.maximum(d);
    if m > maximum {
        return Err(AdversaryError::PackTooLarge { requested: m, maximum });
    }
    let boxes = match variant {
        PackVariant::Arbitrary | PackVariant::NonDominated => {
            if target.cube_side() != Some(Rat::one()) {
                return Err(AdversaryError::UnsupportedConfiguration("corner pack requires a unit target"));
            }
            let skip_zero = matches!(variant, PackVariant::NonDominated);
            let offset = Rat::one() - slack;
            let mut patterns: Vec<u32> = (0..(1u32 << d)).collect();
            patterns.sort_by_key(|p| (p.count_ones(), *p));
            let mut out = Vec::with_capacity(m);
            for pat in patterns {
                if skip_zero && pat == 0 {
                    continue;
                }
                if out.len() == m {
                    break;
                }
                let lower: Vec<Rat> = (0..d)
                    .map(|j| {
                        let sign = if (pat >> j) & 1 == 1 { Rat::one() } else { -Rat::one() };
                        &target.lower()[j] + sign * &offset
                    })
                    .collect();
                out.push(Box::cube(&lower, &Rat::one()));
            }
            out
        }
        PackVariant::UnitGrid { sigma } | PackVariant::UnitGridNonDominated { sigma } => {
            if target.cube_side().as_ref() != Some(sigma) {
                return Err(AdversaryError::UnsupportedConfiguration(
                    "grid pack requires a target cube of side sigma",
                ));
            }
            let c = ceil_int(sigma);
            // effective slack shrinks with the fractional gap so the grid
            // pitch stays above 1 for every slack in (0, 1/2)
            let gap = sigma + Rat::one() - rat_i64(c as i64);
            let s_eff = slack * &gap / rat_i64(2);
            let pitch = (sigma + Rat::one() - rat_i64(2) * &s_eff) / rat_i64(c as i64);
            let only_undominated = matches!(variant, PackVariant::UnitGridNonDominated { .. });
            let mut cells: Vec<Vec<usize>> = Vec::new();
            enumerate_cells(d, c + 1, &mut alloc::vec![0; d], 0, &mut cells);
            cells.sort_by_key(|cell| (cell.iter().sum::<usize>(), cell.clone()));
            let mut out = Vec::with_capacity(m);
            for cell in cells {
                if only_undominated && cell.iter().all(|&i| i < c) {
                    continue;
                }
                if out.len() == m {
                    break;
                }
                let lower: Vec<Rat> = (0..d)
                    .map(|j| {
                        &target.lower()[j] - (Rat::one() - &s_eff) + rat_i64(cell[j] as i64) * &pitch
                    })
                    .collect();
                out.push(Box::cube(&lower, &Rat::one()));
            }
            out
        }
    };
    verify_pack(target, &boxes, variant)?;
    Ok(boxes)
}

fn enumerate_cells(d: usize, base: usize, cur: &mut Vec<usize>, axis: usize, out: &mut Vec<Vec<usize>>) {
    if axis == d {
        out.push(cur.clone());
        return;
    }
    for v in 0..base {
        cur[axis] = v;
        enumerate_cells(d, base, cur, axis + 1, out);
    }
}

fn verify_pack(target: &Box, boxes: &[Box], variant: &PackVariant) -> Result<(), AdversaryError> {
    for (i, b) in boxes.iter().enumerate() {
        if !intersects_unchecked(target, b) {
            return Err(AdversaryError::SelfCheckFailed("pack box misses the target"));
        }
        for other in &boxes[i + 1..] {
            if intersects_unchecked(b, other) {
                return Err(AdversaryError::SelfCheckFailed("pack boxes overlap"));
            }
        }
    }
    if matches!(variant, PackVariant::NonDominated | PackVariant::UnitGridNonDominated { .. }) {
        // none dominated by the target, none dominated by an earlier pack box
        for (i, b) in boxes.iter().enumerate() {
            if dominates_unchecked(target, b) {
                return Err(AdversaryError::SelfCheckFailed("pack box dominated by target"));
            }
            for earlier in &boxes[..i] {
                if dominates_unchecked(earlier, b) {
                    return Err(AdversaryError::SelfCheckFailed("pack box dominated by predecessor"));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Verified instances and exact optima
// ---------------------------------------------------------------------------

/// A generated arrangement together with its adversary metadata. The optimum
/// is computed by the exact solver, never asserted from the construction.
#[derive(Clone, Debug)]
pub struct VerifiedInstance {
    pub arrangement: Arrangement,
    pub marks: Option<BTreeSet<usize>>,
    pub opt_size: usize,
}

/// Exact MIS cardinality of an arrangement of any size: decompose into
/// connected components of the intersection relation, solve each component
/// (must have <= 63 boxes) exactly, and sum.
pub fn exact_mis_of_arrangement(arr: &Arrangement) -> Result<usize, AdversaryError> {
    let n = arr.len();
    if n == 0 {
        return Ok(0);
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if intersects_unchecked(&arr.boxes[i], &arr.boxes[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut components: alloc::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(i);
    }
    let mut total = 0usize;
    for (_, members) in components {
        if members.len() > 63 {
            return Err(AdversaryError::ComponentTooLarge { size: members.len() });
        }
        let mut adj = alloc::vec![0u64; members.len()];
        for (a, &i) in members.iter().enumerate() {
            for (b, &j) in members.iter().enumerate().skip(a + 1) {
                if intersects_unchecked(&arr.boxes[i], &arr.boxes[j]) {
                    adj[a] |= 1 << b;
                    adj[b] |= 1 << a;
                }
            }
        }
        total += mis_size(&OrderedGraph::from_adjacency(adj)).size;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Adaptive packing adversary
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AdaptivePackSpec {
    pub shape: ShapeClass,
    pub order: OrderClass,
    pub d: usize,
    pub pack_count: usize,
    pub blocks: usize,
    pub slack: Rat,
    /// Decoys offered per block before giving up on a non-accepting policy.
    pub max_decoys_per_block: usize,
}

impl AdaptivePackSpec {
    pub fn new(shape: ShapeClass, order: OrderClass, d: usize, pack_count: usize, blocks: usize) -> Result<Self, AdversaryError> {
        let spec = AdaptivePackSpec {
            shape,
            order,
            d,
            pack_count,
            blocks,
            slack: default_slack(),
            max_decoys_per_block: 8,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The pack size formula for this shape and order, where one exists.
    pub fn expected_pack_count(&self) -> Option<usize> {
        match (&self.shape, self.order) {
            (ShapeClass::UnitCube, OrderClass::NonDominated) => Some((1 << self.d) - 1),
            (ShapeClass::UnitCube, OrderClass::Arbitrary) => Some(1 << self.d),
            (ShapeClass::SigmaBoundedCube(sigma), OrderClass::NonDominated) => {
                let c = ceil_int(sigma);
                Some((c + 1).pow(self.d as u32) - c.pow(self.d as u32))
            }
            (ShapeClass::SigmaBoundedCube(sigma), OrderClass::Arbitrary) => {
                let c = ceil_int(sigma);
                Some((c + 1).pow(self.d as u32))
            }
            // the n-1 family has no closed pack formula; any count is valid
            (ShapeClass::UnitVolume | ShapeClass::ArbitraryCube | ShapeClass::ArbitraryRect, _) => None,
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), AdversaryError> {
        check_slack(&self.slack)?;
        if self.d == 0 || self.blocks == 0 || self.pack_count == 0 {
            return Err(AdversaryError::UnsupportedConfiguration("d, blocks, pack_count must be positive"));
        }
        match (&self.shape, self.order) {
            (ShapeClass::UnitCube | ShapeClass::SigmaBoundedCube(_), OrderClass::NonDominated | OrderClass::Arbitrary) => {
                let expected = self.expected_pack_count().unwrap();
                if self.pack_count != expected {
                    return Err(AdversaryError::PackCountMismatch { given: self.pack_count, expected });
                }
            }
            (ShapeClass::UnitVolume | ShapeClass::ArbitraryCube | ShapeClass::ArbitraryRect, OrderClass::NonDominated) => {}
            _ => {
                return Err(AdversaryError::UnsupportedConfiguration(
                    "adaptive packs cover unit/sigma cubes (both orders) and the n-1 family (non-dominated)",
                ));
            }
        }
        Ok(())
    }

    /// Wide enough for the decoy cap plus the pack around any accepted decoy.
    fn block_pitch(&self) -> Rat {
        let pack_margin = match &self.shape {
            ShapeClass::UnitCube => rat_i64(4),
            ShapeClass::SigmaBoundedCube(sigma) => sigma * rat_i64(2) + rat_i64(4),
            // the unit-volume chain pack widens geometrically per box
            ShapeClass::UnitVolume => rat_i64(8) * rat_pow(&rat_i64(2), self.pack_count as u32 + 1),
            ShapeClass::ArbitraryCube | ShapeClass::ArbitraryRect => rat_i64(8),
        };
        rat_i64(self.max_decoys_per_block as i64 + 4) * self.decoy_pitch() + pack_margin
    }

    fn decoy(&self, block: usize, index: usize) -> Box {
        let base = self.block_pitch() * rat_i64(block as i64) + rat_i64(index as i64 + 2) * self.decoy_pitch();
        let origin: Vec<Rat> = (0..self.d).map(|_| base.clone()).collect();
        match &self.shape {
            ShapeClass::UnitCube => Box::cube(&origin, &Rat::one()),
            ShapeClass::SigmaBoundedCube(sigma) => Box::cube(&origin, sigma),
            ShapeClass::ArbitraryCube | ShapeClass::ArbitraryRect => Box::cube(&origin, &rat_i64(2)),
            ShapeClass::UnitVolume => {
                // a 2/3 x 3/2 body in the first two axes, unit elsewhere
                let mut upper = origin.clone();
                upper[0] = &origin[0] + rat(2, 3);
                upper[1] = &origin[1] + rat(3, 2);
                for u in upper.iter_mut().skip(2) {
                    *u += Rat::one();
                }
                Box::new(origin, upper).expect("decoy box is well formed")
            }
        }
    }

    fn decoy_pitch(&self) -> Rat {
        match &self.shape {
            ShapeClass::SigmaBoundedCube(sigma) => sigma + Rat::one(),
            ShapeClass::UnitVolume => rat_i64(3),
            _ => rat_i64(2),
        }
    }

    fn pack_for(&self, target: &Box) -> Result<Vec<Box>, AdversaryError> {
        match (&self.shape, self.order) {
            (ShapeClass::UnitCube, OrderClass::Arbitrary) => {
                pack_intersecting_boxes(target, self.pack_count, &PackVariant::Arbitrary, &self.slack)
            }
            (ShapeClass::UnitCube, OrderClass::NonDominated) => {
                pack_intersecting_boxes(target, self.pack_count, &PackVariant::NonDominated, &self.slack)
            }
            (ShapeClass::SigmaBoundedCube(sigma), OrderClass::Arbitrary) => pack_intersecting_boxes(
                target,
                self.pack_count,
                &PackVariant::UnitGrid { sigma: sigma.clone() },
                &self.slack,
            ),
            (ShapeClass::SigmaBoundedCube(sigma), OrderClass::NonDominated) => pack_intersecting_boxes(
                target,
                self.pack_count,
                &PackVariant::UnitGridNonDominated { sigma: sigma.clone() },
                &self.slack,
            ),
            (ShapeClass::UnitVolume, _) => chain_pack_unit_volume(target, self.pack_count, &self.slack),
            (ShapeClass::ArbitraryCube | ShapeClass::ArbitraryRect, _) => {
                chain_pack_squares(target, self.pack_count, &self.slack)
            }
            _ => Err(AdversaryError::UnsupportedConfiguration("no pack for this configuration")),
        }
    }
}

/// Flat unit-volume boxes stacked inside the target's vertical extent, in
/// dominating order among themselves, none dominated by the target.
fn chain_pack_unit_volume(target: &Box, m: usize, slack: &Rat) -> Result<Vec<Box>, AdversaryError> {
    check_slack(slack)?;
    let d = target.dim();
    let height = target.side(1);
    let mut out = Vec::with_capacity(m);
    let mut y = &target.lower()[1] + slack * &height / rat_i64(4);
    let mut width = rat_i64(8).max(target.side(0) * rat_i64(4));
    for i in 0..m {
        let h = Rat::one() / &width;
        let mut lower: Vec<Rat> = alloc::vec![Rat::zero(); d];
        let mut upper: Vec<Rat> = alloc::vec![Rat::zero(); d];
        lower[0] = &target.lower()[0] + slack * target.side(0) / rat_i64(2);
        upper[0] = &lower[0] + &width;
        lower[1] = y.clone();
        upper[1] = &y + &h;
        for j in 2..d {
            lower[j] = target.lower()[j].clone();
            upper[j] = &lower[j] + Rat::one();
        }
        y = &upper[1] + &h * slack;
        // ensure the stack stays inside the target's vertical extent
        if &y > &(&target.lower()[1] + &height) {
            return Err(AdversaryError::SelfCheckFailed("unit-volume chain pack overflowed the target"));
        }
        width *= rat_i64(2);
        out.push(Box::new(lower, upper).expect("chain pack box is well formed"));
        let _ = i;
    }
    Ok(out)
}

/// Equal small squares poking out of the target's right edge, stacked upward:
/// dominating order among themselves, none dominated by the target.
fn chain_pack_squares(target: &Box, m: usize, slack: &Rat) -> Result<Vec<Box>, AdversaryError> {
    check_slack(slack)?;
    let d = target.dim();
    let extent = target.side(1);
    let pitch = &extent / rat_i64(m as i64 + 1);
    let side = &pitch * (Rat::one() - slack);
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut lower: Vec<Rat> = alloc::vec![Rat::zero(); d];
        lower[0] = &target.upper()[0] - &side * slack;
        lower[1] = &target.lower()[1] + rat_i64(i as i64) * &pitch;
        for j in 2..d {
            lower[j] = target.lower()[j].clone();
        }
        out.push(Box::cube(&lower, &side));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct AdaptiveOutcome {
    pub trace: Trace,
    pub opt_size: usize,
    pub instance: VerifiedInstance,
    /// None when the policy accepted nothing (the unbounded-ratio sentinel).
    pub ratio: Option<Rat>,
}

/// Plays the sequential adaptive game: per block, disjoint decoys until the
/// policy accepts one, then `pack_count` disjoint boxes intersecting the
/// accepted box. All emitted geometry is validated before being offered.
pub fn adaptive_pack_play(
    spec: &AdaptivePackSpec,
    policy: &PolicySpec,
    rng: &mut RandomSource,
) -> Result<AdaptiveOutcome, AdversaryError> {
    spec.validate()?;
    policy.validate()?;
    let mut runner = GameRunner::new(policy, rng)?;
    let mut boxes: Vec<Box> = Vec::new();
    let mut decisions = Vec::new();
    for block in 0..spec.blocks {
        let mut accepted_target: Option<Box> = None;
        for decoy_index in 0..spec.max_decoys_per_block {
            let decoy = spec.decoy(block, decoy_index);
            let accepted = runner.offer(&decoy, rng);
            decisions.push(crate::policies::Decision { offered: boxes.len(), accepted });
            boxes.push(decoy.clone());
            if accepted {
                accepted_target = Some(decoy);
                break;
            }
        }
        if let Some(target) = accepted_target {
            for b in spec.pack_for(&target)? {
                let accepted = runner.offer(&b, rng);
                decisions.push(crate::policies::Decision { offered: boxes.len(), accepted });
                boxes.push(b);
            }
        }
    }
    let solution_size = decisions.iter().filter(|d| d.accepted).count();
    let arrangement = Arrangement::new(boxes, spec.shape.clone(), spec.order);
    arrangement
        .validate()
        .map_err(|_| AdversaryError::SelfCheckFailed("adaptive instance failed class validation"))?;
    let opt_size = exact_mis_of_arrangement(&arrangement)?;
    let ratio = if solution_size == 0 {
        None
    } else {
        Some(Rat::from_integer(opt_size.into()) / rat_i64(solution_size as i64))
    };
    Ok(AdaptiveOutcome {
        trace: Trace { decisions, solution_size },
        opt_size,
        instance: VerifiedInstance { arrangement, marks: None, opt_size },
        ratio,
    })
}

/// Incremental policy execution for the two-party game loop.
struct GameRunner {
    spec: PolicySpec,
    accepted: Vec<Box>,
    coin: Option<CoinThreshold>,
    class: Option<crate::policies::ClassBound>,
}

impl GameRunner {
    fn new(spec: &PolicySpec, rng: &mut RandomSource) -> Result<Self, PolicyError> {
        spec.validate()?;
        let coin = match spec {
            PolicySpec::GreedyP(p) => Some(CoinThreshold::new(p)),
            _ => None,
        };
        let class = match spec {
            PolicySpec::ClassifiedGreedy { sigma, k } => {
                let bounds = crate::policies::class_bounds(sigma, *k)?;
                let idx = rng.uniform_below(*k as u64) as usize;
                Some(bounds[idx].clone())
            }
            _ => None,
        };
        Ok(GameRunner { spec: spec.clone(), accepted: Vec::new(), coin, class })
    }

    fn offer(&mut self, b: &Box, rng: &mut RandomSource) -> bool {
        if let Some(class) = &self.class {
            match b.cube_side() {
                Some(side) if class.contains_side(&side) => {}
                _ => return false,
            }
        }
        let free = self.accepted.iter().all(|a| !intersects_unchecked(a, b));
        if !free {
            return false;
        }
        let take = match &self.spec {
            PolicySpec::NaiveGreedy => true,
            PolicySpec::GreedyP(_) => self.coin.as_ref().unwrap().draw(rng),
            PolicySpec::ClassifiedGreedy { .. } => true,
        };
        if take {
            self.accepted.push(b.clone());
        }
        take
    }
}

// ---------------------------------------------------------------------------
// Oblivious marking adversary
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct MarkingSpec {
    pub d: usize,
    pub shape: ShapeClass,
    pub order: OrderClass,
    pub levels: usize,
    pub blocks: usize,
    pub slack: Rat,
}

impl MarkingSpec {
    pub fn new(d: usize, shape: ShapeClass, order: OrderClass, levels: usize, blocks: usize) -> Result<Self, AdversaryError> {
        let spec = MarkingSpec { d, shape, order, levels, blocks, slack: default_slack() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        2 * self.levels * self.blocks
    }

    pub fn validate(&self) -> Result<(), AdversaryError> {
        check_slack(&self.slack)?;
        if self.levels == 0 || self.blocks == 0 {
            return Err(AdversaryError::UnsupportedConfiguration("levels and blocks must be positive"));
        }
        if self.d < 2 {
            return Err(AdversaryError::UnsupportedConfiguration("marking constructions require d >= 2"));
        }
        match (&self.shape, self.order) {
            (ShapeClass::UnitCube, OrderClass::NonDominated) if self.levels <= 2 => Ok(()),
            (ShapeClass::UnitCube, OrderClass::Arbitrary) if self.levels <= 3 => Ok(()),
            (ShapeClass::UnitCube, _) => Err(AdversaryError::UnsupportedConfiguration(
                "unit cubes support 2 levels (non-dominated) or 3 levels (arbitrary)",
            )),
            (ShapeClass::SigmaBoundedCube(sigma), OrderClass::NonDominated | OrderClass::Arbitrary) => {
                let max = crate::rat::ceil_log2(sigma).unwrap_or(0) as usize;
                if *sigma <= Rat::one() {
                    Err(AdversaryError::UnsupportedConfiguration("sigma must exceed 1 for marking levels"))
                } else if self.levels > max.max(1) {
                    Err(AdversaryError::UnsupportedConfiguration("levels exceed ceil(log2 sigma)"))
                } else {
                    Ok(())
                }
            }
            (ShapeClass::UnitVolume | ShapeClass::ArbitraryCube | ShapeClass::ArbitraryRect,
                OrderClass::NonDominated | OrderClass::Arbitrary) => Ok(()),
            _ => Err(AdversaryError::UnsupportedConfiguration("dominating order has no marking construction")),
        }
    }

    fn block_pitch(&self) -> Rat {
        match &self.shape {
            ShapeClass::UnitCube => rat_i64(8),
            ShapeClass::SigmaBoundedCube(sigma) => sigma * rat_i64(8) + rat_i64(8),
            ShapeClass::UnitVolume | ShapeClass::ArbitraryRect => rat_i64(32),
            ShapeClass::ArbitraryCube => rat_i64(32),
        }
    }
}

/// Generates a marking instance: `blocks` independent blocks of `levels`
/// pairs; each level pair intersects exactly the marked boxes of the earlier
/// levels of its block. Marks are drawn from the random source for levels
/// 1..levels-1 (the final level's pair ends the block, so no mark is used).
pub fn marking_generate(spec: &MarkingSpec, rng: &mut RandomSource) -> Result<VerifiedInstance, AdversaryError> {
    spec.validate()?;
    let mut boxes: Vec<Box> = Vec::new();
    let mut marks: BTreeSet<usize> = BTreeSet::new();
    let mut block_spans: Vec<(Rat, Rat)> = Vec::new();
    for block in 0..spec.blocks {
        let base = spec.block_pitch() * rat_i64(block as i64);
        let offset = boxes.len();
        let (block_boxes, block_marks) = generate_block(spec, &base, rng)?;
        let span = axis0_span(&block_boxes);
        block_spans.push(span);
        for m in block_marks {
            marks.insert(offset + m);
        }
        boxes.extend(block_boxes);
    }
    let arrangement = Arrangement::new(boxes, spec.shape.clone(), spec.order);
    verify_marking_instance(spec, &arrangement, &marks, &block_spans)?;
    let opt_size = exact_mis_of_arrangement(&arrangement)?;
    Ok(VerifiedInstance { arrangement, marks: Some(marks), opt_size })
}

fn axis0_span(boxes: &[Box]) -> (Rat, Rat) {
    let mut lo = boxes[0].lower()[0].clone();
    let mut hi = boxes[0].upper()[0].clone();
    for b in boxes {
        if b.lower()[0] < lo {
            lo = b.lower()[0].clone();
        }
        if b.upper()[0] > hi {
            hi = b.upper()[0].clone();
        }
    }
    (lo, hi)
}

/// One block: returns the 2L boxes in offer order plus block-local marked
/// indices (levels 0..L-2, one of {2j, 2j+1}).
fn generate_block(spec: &MarkingSpec, base: &Rat, rng: &mut RandomSource) -> Result<(Vec<Box>, Vec<usize>), AdversaryError> {
    match (&spec.shape, spec.order) {
        (ShapeClass::UnitCube, OrderClass::NonDominated) => unit_block(spec, base, rng, true),
        (ShapeClass::UnitCube, OrderClass::Arbitrary) => unit_block(spec, base, rng, false),
        (ShapeClass::SigmaBoundedCube(_), _)
        | (ShapeClass::ArbitraryCube, _)
        | (ShapeClass::UnitVolume, _)
        | (ShapeClass::ArbitraryRect, _) => shrinking_block(spec, base, rng),
        _ => Err(AdversaryError::UnsupportedConfiguration("no block generator for this configuration")),
    }
}

/// Embeds a planar box into d dimensions with the given extra-axis interval.
fn embed(spec_d: usize, x: (Rat, Rat), y: (Rat, Rat), extra: (Rat, Rat)) -> Box {
    let mut lower = Vec::with_capacity(spec_d);
    let mut upper = Vec::with_capacity(spec_d);
    lower.push(x.0);
    upper.push(x.1);
    lower.push(y.0);
    upper.push(y.1);
    for _ in 2..spec_d {
        lower.push(extra.0.clone());
        upper.push(extra.1.clone());
    }
    Box::new(lower, upper).expect("embedded box is well formed")
}

/// Unit-cube blocks. Level 1 is a horizontal pair; level 2 flanks the mark
/// (horizontally above for non-dominated order, vertically for arbitrary
/// order); level 3 (arbitrary order only) flanks the level-2 mark
/// horizontally, nudged back into the level-1 mark.
fn unit_block(spec: &MarkingSpec, base: &Rat, rng: &mut RandomSource, non_dominated: bool) -> Result<(Vec<Box>, Vec<usize>), AdversaryError> {
    let s = &spec.slack;
    let w = Rat::one() - s;
    let one = Rat::one();
    let unit_extra = (Rat::zero(), one.clone());
    let mut boxes: Vec<Box> = Vec::new();
    let mut marks: Vec<usize> = Vec::new();

    let xa = base.clone();
    let xb = base + rat_i64(2);
    boxes.push(embed(spec.d, (xa.clone(), &xa + &one), (Rat::zero(), one.clone()), unit_extra.clone()));
    boxes.push(embed(spec.d, (xb.clone(), &xb + &one), (Rat::zero(), one.clone()), unit_extra.clone()));
    if spec.levels == 1 {
        return Ok((boxes, marks));
    }
    let m1_second = rng.coin();
    let m1x = if m1_second { xb.clone() } else { xa.clone() };
    marks.push(if m1_second { 1 } else { 0 });

    if non_dominated {
        // level 2 flanks the mark horizontally, one slack above it
        let y2 = &w;
        boxes.push(embed(spec.d, (&m1x - &w, &m1x - &w + &one), (y2.clone(), y2 + &one), unit_extra.clone()));
        boxes.push(embed(spec.d, (&m1x + &w, &m1x + &w + &one), (y2.clone(), y2 + &one), unit_extra));
        return Ok((boxes, marks));
    }

    // arbitrary order: level 2 flanks the mark vertically
    let below = (-&w, -&w + &one);
    let above = (w.clone(), &w + &one);
    boxes.push(embed(spec.d, (m1x.clone(), &m1x + &one), below.clone(), unit_extra.clone()));
    boxes.push(embed(spec.d, (m1x.clone(), &m1x + &one), above.clone(), unit_extra.clone()));
    if spec.levels == 2 {
        return Ok((boxes, marks));
    }
    let m2_second = rng.coin();
    marks.push(if m2_second { 3 } else { 2 });
    // level 3 flanks the level-2 mark horizontally, poking back into the
    // level-1 mark by half a slack
    let y3 = if m2_second {
        &one - s / rat_i64(2) // mark above: [1 - s/2, 2 - s/2]
    } else {
        s / rat_i64(2) - &one // mark below: [s/2 - 1, s/2]
    };
    boxes.push(embed(spec.d, (&m1x - &w, &m1x - &w + &one), (y3.clone(), &y3 + &one), unit_extra.clone()));
    boxes.push(embed(spec.d, (&m1x + &w, &m1x + &w + &one), (y3.clone(), &y3 + &one), unit_extra));
    Ok((boxes, marks))
}

/// Shrinking-chain blocks for the sigma-bounded, arbitrary-cube, unit-volume
/// and arbitrary-rectangle classes. Level sizes shrink geometrically; each
/// level pair splits the marked parent's horizontal range; vertical ranges of
/// all levels mutually overlap while tops climb strictly (which keeps
/// non-dominated order valid).
fn shrinking_block(spec: &MarkingSpec, base: &Rat, rng: &mut RandomSource) -> Result<(Vec<Box>, Vec<usize>), AdversaryError> {
    let s = &spec.slack;
    let levels = spec.levels;
    // per-level widths and heights
    let (widths, heights): (Vec<Rat>, Vec<Rat>) = match &spec.shape {
        ShapeClass::SigmaBoundedCube(sigma) => {
            let w: Vec<Rat> = (0..levels).map(|j| sigma / rat_pow(&rat_i64(2), j as u32)).collect();
            (w.clone(), w)
        }
        ShapeClass::ArbitraryCube => {
            let rho = (Rat::one() - s) / rat_i64(2);
            let w: Vec<Rat> = (0..levels).map(|j| rat_i64(4) * rat_pow(&rho, j as u32)).collect();
            (w.clone(), w)
        }
        ShapeClass::UnitVolume | ShapeClass::ArbitraryRect => {
            let rho = (Rat::one() - s) / rat_i64(2);
            let w: Vec<Rat> = (0..levels).map(|j| rat_i64(4) * rat_pow(&rho, j as u32)).collect();
            let h: Vec<Rat> = w.iter().map(|wj| Rat::one() / wj).collect();
            (w, h)
        }
        _ => return Err(AdversaryError::UnsupportedConfiguration("shrinking blocks need a shrinking shape")),
    };
    let exact_halving = matches!(spec.shape, ShapeClass::SigmaBoundedCube(_));
    let flat_bottom = matches!(spec.shape, ShapeClass::UnitVolume | ShapeClass::ArbitraryRect);
    // constant-top-climb increment and stick-out budget sized from the last
    // level, so every level still reaches the first level's band
    let eta = s * heights.last().unwrap() / rat_i64(8 * levels as i64);
    let last_width = widths.last().unwrap().clone();

    let mut boxes: Vec<Box> = Vec::new();
    let mut marks: Vec<usize> = Vec::new();

    let extra = |j: usize| -> (Rat, Rat) {
        match &spec.shape {
            ShapeClass::SigmaBoundedCube(_) | ShapeClass::ArbitraryCube => (Rat::zero(), widths[j].clone()),
            _ => (Rat::zero(), Rat::one()),
        }
    };
    let y_range = |j: usize| -> (Rat, Rat) {
        if flat_bottom {
            (Rat::zero(), heights[j].clone())
        } else {
            let top = &heights[0] + rat_i64(j as i64) * &eta;
            (&top - &heights[j], top)
        }
    };

    // level 1: the chain head plus a far partner to its right
    let head_x = base.clone();
    let partner_x = base + rat_i64(2) * &widths[0] + Rat::one();
    boxes.push(embed(spec.d, (head_x.clone(), &head_x + &widths[0]), y_range(0), extra(0)));
    boxes.push(embed(spec.d, (partner_x.clone(), &partner_x + &widths[0]), y_range(0), extra(0)));
    if levels == 1 {
        return Ok((boxes, marks));
    }

    let first_mark_second = rng.coin();
    marks.push(if first_mark_second { 1 } else { 0 });
    let mut parent_x = if first_mark_second { partner_x } else { head_x };
    let mut parent_w = widths[0].clone();

    for level in 1..levels {
        let w = widths[level].clone();
        let (left_x, right_x) = if exact_halving {
            // children stick out of the parent's range by a halving epsilon
            let delta = s * &last_width / (rat_i64(8) * rat_pow(&rat_i64(2), level as u32));
            (&parent_x - &delta, &parent_x + &w + &delta)
        } else {
            // children fit strictly inside the parent with uniform gaps
            let gap = (s * &parent_w) / rat_i64(3);
            (&parent_x + &gap, &parent_x + &parent_w - &gap - &w)
        };
        let y = y_range(level);
        boxes.push(embed(spec.d, (left_x.clone(), &left_x + &w), y.clone(), extra(level)));
        boxes.push(embed(spec.d, (right_x.clone(), &right_x + &w), y, extra(level)));
        if level + 1 < levels {
            let second = rng.coin();
            marks.push(2 * level + if second { 1 } else { 0 });
            parent_x = if second { right_x } else { left_x };
            parent_w = w;
        }
    }
    Ok((boxes, marks))
}

/// Full structural verification of a generated marking instance:
/// class validation, cross-block separation, the exact per-block
/// intersection pattern, and independence of the unmarked boxes.
fn verify_marking_instance(
    spec: &MarkingSpec,
    arrangement: &Arrangement,
    marks: &BTreeSet<usize>,
    block_spans: &[(Rat, Rat)],
) -> Result<(), AdversaryError> {
    arrangement
        .validate()
        .map_err(|_| AdversaryError::SelfCheckFailed("marking instance failed class validation"))?;
    // blocks must not touch along axis 0
    for w in block_spans.windows(2) {
        if w[0].1 >= w[1].0 {
            return Err(AdversaryError::SelfCheckFailed("adjacent blocks overlap on axis 0"));
        }
    }
    let block_len = 2 * spec.levels;
    for block in 0..spec.blocks {
        let offset = block * block_len;
        let slice = &arrangement.boxes[offset..offset + block_len];
        let sub = Arrangement::new(slice.to_vec(), spec.shape.clone(), OrderClass::Arbitrary);
        let g = intersection_graph(&sub).map_err(|_| AdversaryError::SelfCheckFailed("block graph failed"))?;
        // expected pattern: each level pair is adjacent to exactly the marked
        // boxes of the earlier levels of its block
        let local_marks: Vec<usize> = marks
            .iter()
            .filter(|&&m| m >= offset && m < offset + block_len)
            .map(|&m| m - offset)
            .collect();
        let mut expected = alloc::vec![0u64; block_len];
        for level in 1..spec.levels {
            for side in 0..2 {
                let v = 2 * level + side;
                for &m in &local_marks {
                    if m < 2 * level {
                        expected[v] |= 1 << m;
                        expected[m] |= 1 << v;
                    }
                }
            }
        }
        if g.adjacency() != expected.as_slice() {
            return Err(AdversaryError::SelfCheckFailed("block intersection pattern mismatch"));
        }
    }
    // unmarked boxes are pairwise disjoint
    let unmarked: Vec<usize> = (0..arrangement.len()).filter(|i| !marks.contains(i)).collect();
    for (a, &i) in unmarked.iter().enumerate() {
        for &j in &unmarked[a + 1..] {
            if intersects_unchecked(&arrangement.boxes[i], &arrangement.boxes[j]) {
                return Err(AdversaryError::SelfCheckFailed("unmarked boxes intersect"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Dominating chains
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainKind {
    /// Pairwise-disjoint diagonal translates.
    Disjoint,
    /// Overlapping staircase: consecutive boxes intersect.
    Overlapping,
}

/// `n` boxes in valid dominating order.
pub fn dominating_chain(n: usize, d: usize, kind: ChainKind) -> Arrangement {
    let step = match kind {
        ChainKind::Disjoint => rat_i64(2),
        ChainKind::Overlapping => rat(1, 2),
    };
    let boxes = (0..n)
        .map(|i| {
            let origin: Vec<Rat> = (0..d).map(|_| rat_i64(i as i64) * &step).collect();
            Box::cube(&origin, &Rat::one())
        })
        .collect();
    Arrangement::new(boxes, ShapeClass::UnitCube, OrderClass::Dominating)
}

/// Random valid dominating-order arrangement with arbitrary overlaps: upper
/// vertices move by non-negative random increments, extents are random.
pub fn random_dominating_arrangement(n: usize, d: usize, rng: &mut RandomSource) -> Arrangement {
    let den = 4i64;
    let mut upper: Vec<Rat> = (0..d).map(|_| rat(rng.uniform_below(9) as i64 + 4, den)).collect();
    let mut boxes = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            for u in upper.iter_mut() {
                *u += rat(rng.uniform_below(9) as i64, den);
            }
        }
        let lower: Vec<Rat> = upper
            .iter()
            .map(|u| u - rat(rng.uniform_below(12) as i64 + 1, den))
            .collect();
        boxes.push(Box::new(lower, upper.clone()).expect("dominating box is well formed"));
    }
    Arrangement::new(boxes, ShapeClass::ArbitraryRect, OrderClass::Dominating)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::run_policy;

    fn unit_target_1d() -> Box {
        Box::cube(&[Rat::zero()], &Rat::one())
    }

    #[test]
    fn corner_pack_1d_matches_stated_coordinates() {
        let target = unit_target_1d();
        let packed = pack_intersecting_boxes(&target, 2, &PackVariant::Arbitrary, &default_slack()).unwrap();
        assert_eq!(packed[0].lower()[0], rat(-9, 10));
        assert_eq!(packed[0].upper()[0], rat(1, 10));
        assert_eq!(packed[1].lower()[0], rat(9, 10));
        assert_eq!(packed[1].upper()[0], rat(19, 10));
    }

    #[test]
    fn non_dominated_pack_escapes_target() {
        let target = Box::cube(&[Rat::zero(), Rat::zero()], &Rat::one());
        let packed = pack_intersecting_boxes(&target, 3, &PackVariant::NonDominated, &default_slack()).unwrap();
        assert_eq!(packed.len(), 3);
        for b in &packed {
            assert!(!dominates_unchecked(&target, b));
        }
    }

    #[test]
    fn oversized_pack_is_rejected() {
        let target = Box::cube(&[Rat::zero(), Rat::zero()], &Rat::one());
        assert!(matches!(
            pack_intersecting_boxes(&target, 5, &PackVariant::Arbitrary, &default_slack()),
            Err(AdversaryError::PackTooLarge { requested: 5, maximum: 4 })
        ));
    }

    #[test]
    fn sigma_grid_counts() {
        let sigma = rat(5, 2);
        let target = Box::cube(&[Rat::zero(), Rat::zero()], &sigma);
        let grid = pack_intersecting_boxes(&target, 16, &PackVariant::UnitGrid { sigma: sigma.clone() }, &default_slack()).unwrap();
        assert_eq!(grid.len(), 16);
        let nd = pack_intersecting_boxes(&target, 7, &PackVariant::UnitGridNonDominated { sigma }, &default_slack()).unwrap();
        assert_eq!(nd.len(), 7);
    }

    #[test]
    fn naive_greedy_hits_adaptive_bound_exactly() {
        for (d, order, expect) in [
            (2, OrderClass::Arbitrary, 4usize),
            (2, OrderClass::NonDominated, 3),
            (1, OrderClass::NonDominated, 1),
        ] {
            let spec = AdaptivePackSpec::new(ShapeClass::UnitCube, order, d, expect, 12).unwrap();
            let mut rng = RandomSource::new(11);
            let out = adaptive_pack_play(&spec, &PolicySpec::NaiveGreedy, &mut rng).unwrap();
            assert_eq!(out.trace.solution_size, 12);
            assert_eq!(out.opt_size, expect * 12);
            assert_eq!(out.ratio, Some(rat_i64(expect as i64)));
        }
    }

    #[test]
    fn marking_instance_small_patterns() {
        // 2 levels, 1 block, non-dominated unit squares
        let spec = MarkingSpec::new(2, ShapeClass::UnitCube, OrderClass::NonDominated, 2, 1).unwrap();
        let mut rng = RandomSource::new(3);
        let inst = marking_generate(&spec, &mut rng).unwrap();
        assert_eq!(inst.arrangement.len(), 4);
        assert_eq!(inst.opt_size, 3);
        // 3 levels, arbitrary order
        let spec = MarkingSpec::new(2, ShapeClass::UnitCube, OrderClass::Arbitrary, 3, 1).unwrap();
        let inst = marking_generate(&spec, &mut rng).unwrap();
        assert_eq!(inst.arrangement.len(), 6);
        assert_eq!(inst.opt_size, 4);
        // 5 levels of halving squares
        let spec = MarkingSpec::new(2, ShapeClass::ArbitraryCube, OrderClass::NonDominated, 5, 1).unwrap();
        let inst = marking_generate(&spec, &mut rng).unwrap();
        assert_eq!(inst.arrangement.len(), 10);
        assert_eq!(inst.opt_size, 6);
    }

    #[test]
    fn marking_is_reproducible() {
        let spec = MarkingSpec::new(2, ShapeClass::UnitVolume, OrderClass::NonDominated, 4, 3).unwrap();
        let a = marking_generate(&spec, &mut RandomSource::new(99)).unwrap();
        let b = marking_generate(&spec, &mut RandomSource::new(99)).unwrap();
        assert_eq!(a.arrangement, b.arrangement);
        assert_eq!(a.marks, b.marks);
    }

    #[test]
    fn dominating_chains_validate() {
        for kind in [ChainKind::Disjoint, ChainKind::Overlapping] {
            for n in [1usize, 3, 7] {
                let arr = dominating_chain(n, 2, kind);
                assert!(arr.validate().is_ok());
            }
        }
        let arr = dominating_chain(3, 2, ChainKind::Disjoint);
        assert_eq!(exact_mis_of_arrangement(&arr).unwrap(), 3);
    }

    #[test]
    fn rejecting_policy_gets_only_decoys() {
        let spec = AdaptivePackSpec::new(ShapeClass::UnitCube, OrderClass::Arbitrary, 2, 4, 3).unwrap();
        let mut rng = RandomSource::new(1);
        let out = adaptive_pack_play(&spec, &PolicySpec::GreedyP(Rat::zero()), &mut rng).unwrap();
        assert_eq!(out.trace.solution_size, 0);
        assert_eq!(out.ratio, None);
        assert_eq!(out.opt_size, spec.max_decoys_per_block * 3);
    }

    #[test]
    fn greedy_on_chain_instance_is_optimal() {
        let arr = dominating_chain(6, 2, ChainKind::Overlapping);
        let mut rng = RandomSource::new(0);
        let trace = run_policy(&PolicySpec::NaiveGreedy, &arr.boxes, &mut rng).unwrap();
        assert_eq!(trace.solution_size, exact_mis_of_arrangement(&arr).unwrap());
    }
}
