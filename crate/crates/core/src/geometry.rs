//! Axis-aligned boxes with exact rational coordinates, the shape and order
//! class validators, and extraction of input-ordered intersection graphs.
//!
//! Everything here is exact: closed-set semantics mean a shared boundary
//! point counts as an intersection, so boundary-touch cases must not depend
//! on floating-point rounding.

use alloc::vec::Vec;
use core::fmt;

use num_traits::One;

use crate::graph::OrderedGraph;
use crate::rat::{rat, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeomError {
    DimensionMismatch { left: usize, right: usize },
    EmptyArrangement,
    TooManyBoxes { n: usize, max: usize },
    InvalidBox,
    SizeMismatch { arrangement: usize, graph: usize },
}

impl fmt::Display for GeomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeomError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            GeomError::EmptyArrangement => write!(f, "arrangement is empty"),
            GeomError::TooManyBoxes { n, max } => {
                write!(f, "arrangement has {n} boxes, adjacency bitmasks support at most {max}")
            }
            GeomError::InvalidBox => write!(f, "box has lower[j] > upper[j] or dim 0"),
            GeomError::SizeMismatch { arrangement, graph } => {
                write!(f, "arrangement has {arrangement} boxes but graph has {graph} vertices")
            }
        }
    }
}

/// Closed axis-aligned hyperrectangle `[lower_1, upper_1] x .. x [lower_d, upper_d]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Box {
    lower: Vec<Rat>,
    upper: Vec<Rat>,
}

impl Box {
    pub fn new(lower: Vec<Rat>, upper: Vec<Rat>) -> Result<Self, GeomError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(GeomError::InvalidBox);
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(GeomError::InvalidBox);
        }
        Ok(Box { lower, upper })
    }

    /// Cube `[lower, lower + side]^d` from i64-rational corner coordinates.
    pub fn cube(lower: &[Rat], side: &Rat) -> Self {
        let upper = lower.iter().map(|l| l + side).collect();
        Box { lower: lower.to_vec(), upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[Rat] {
        &self.lower
    }

    pub fn upper(&self) -> &[Rat] {
        &self.upper
    }

    pub fn side(&self, axis: usize) -> Rat {
        &self.upper[axis] - &self.lower[axis]
    }

    pub fn sides(&self) -> impl Iterator<Item = Rat> + '_ {
        (0..self.dim()).map(move |j| self.side(j))
    }

    pub fn volume(&self) -> Rat {
        let mut v = Rat::one();
        for s in self.sides() {
            v *= s;
        }
        v
    }

    /// True when all side lengths are equal (a hypercube). Returns the common
    /// side length if so.
    pub fn cube_side(&self) -> Option<Rat> {
        let s0 = self.side(0);
        for j in 1..self.dim() {
            if self.side(j) != s0 {
                return None;
            }
        }
        Some(s0)
    }

    pub fn translate(&self, shift: &[Rat]) -> Box {
        Box {
            lower: self.lower.iter().zip(shift).map(|(a, b)| a + b).collect(),
            upper: self.upper.iter().zip(shift).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Input shape classes, in increasing order of generality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ShapeClass {
    UnitCube,
    /// Hypercubes with side length in `[1, sigma]`, inclusive.
    SigmaBoundedCube(Rat),
    UnitVolume,
    ArbitraryCube,
    ArbitraryRect,
}

impl ShapeClass {
    pub fn sigma(&self) -> Option<&Rat> {
        match self {
            ShapeClass::SigmaBoundedCube(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderClass {
    /// Each box dominates every box preceding it.
    Dominating,
    /// Each box is dominated by no box preceding it.
    NonDominated,
    Arbitrary,
}

/// An ordered input sequence together with its claimed shape and order class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrangement {
    pub boxes: Vec<Box>,
    pub shape: ShapeClass,
    pub order: OrderClass,
}

impl Arrangement {
    pub fn new(boxes: Vec<Box>, shape: ShapeClass, order: OrderClass) -> Self {
        Arrangement { boxes, shape, order }
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.boxes.first().map(|b| b.dim())
    }

    /// Combined self-check: uniform dimension plus both class validators.
    /// Generators call this before releasing an instance.
    pub fn validate(&self) -> Result<(), ValidationFailure> {
        if let Some(d) = self.dim() {
            if let Some(i) = self.boxes.iter().position(|b| b.dim() != d) {
                return Err(ValidationFailure::MixedDimensions { index: i });
            }
        }
        let shape = validate_shape(self);
        if let Some(i) = shape.first_violation {
            return Err(ValidationFailure::Shape { index: i });
        }
        let order = validate_order(self);
        if let Some((later, earlier)) = order.first_violation {
            return Err(ValidationFailure::Order { later, earlier });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationFailure {
    MixedDimensions { index: usize },
    Shape { index: usize },
    Order { later: usize, earlier: usize },
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFailure::MixedDimensions { index } => {
                write!(f, "box {index} has a different dimension than box 0")
            }
            ValidationFailure::Shape { index } => write!(f, "box {index} violates the shape class"),
            ValidationFailure::Order { later, earlier } => {
                write!(f, "box {later} violates the order class against box {earlier}")
            }
        }
    }
}

/// Closed-set intersection test: boxes intersect iff their coordinate
/// intervals overlap on every axis (shared boundary counts).
pub fn intersects(a: &Box, b: &Box) -> Result<bool, GeomError> {
    if a.dim() != b.dim() {
        return Err(GeomError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(intersects_unchecked(a, b))
}

pub(crate) fn intersects_unchecked(a: &Box, b: &Box) -> bool {
    debug_assert_eq!(a.dim(), b.dim());
    (0..a.dim()).all(|j| a.lower[j] <= b.upper[j] && b.lower[j] <= a.upper[j])
}

/// `a` dominates `b` iff `a`'s upper vertex is coordinatewise >= `b`'s.
/// Non-strict, so every box dominates itself.
pub fn dominates(a: &Box, b: &Box) -> Result<bool, GeomError> {
    if a.dim() != b.dim() {
        return Err(GeomError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(dominates_unchecked(a, b))
}

pub(crate) fn dominates_unchecked(a: &Box, b: &Box) -> bool {
    debug_assert_eq!(a.dim(), b.dim());
    (0..a.dim()).all(|j| a.upper[j] >= b.upper[j])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderReport {
    pub ok: bool,
    /// `(later, earlier)`: smallest such pair in lexicographic order of the
    /// later index, then the earlier index.
    pub first_violation: Option<(usize, usize)>,
}

pub fn validate_order(arr: &Arrangement) -> OrderReport {
    let violation = |later: usize, earlier: usize| OrderReport {
        ok: false,
        first_violation: Some((later, earlier)),
    };
    match arr.order {
        OrderClass::Arbitrary => {}
        OrderClass::Dominating => {
            for j in 1..arr.boxes.len() {
                for i in 0..j {
                    if !dominates_unchecked(&arr.boxes[j], &arr.boxes[i]) {
                        return violation(j, i);
                    }
                }
            }
        }
        OrderClass::NonDominated => {
            for j in 1..arr.boxes.len() {
                for i in 0..j {
                    if dominates_unchecked(&arr.boxes[i], &arr.boxes[j]) {
                        return violation(j, i);
                    }
                }
            }
        }
    }
    OrderReport { ok: true, first_violation: None }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeReport {
    pub ok: bool,
    pub first_violation: Option<usize>,
}

pub fn validate_shape(arr: &Arrangement) -> ShapeReport {
    let one = Rat::one();
    for (i, b) in arr.boxes.iter().enumerate() {
        let ok = match &arr.shape {
            ShapeClass::UnitCube => b.sides().all(|s| s == one),
            ShapeClass::SigmaBoundedCube(sigma) => match b.cube_side() {
                Some(s) => s >= one && s <= *sigma,
                None => false,
            },
            ShapeClass::UnitVolume => b.volume() == one,
            ShapeClass::ArbitraryCube => {
                // zero-width boxes are legal Box values but fail every shape
                // class except ArbitraryRect
                matches!(b.cube_side(), Some(s) if s > Rat::from_integer(0.into()))
            }
            ShapeClass::ArbitraryRect => true,
        };
        // positive side lengths are implied by every class except ArbitraryRect
        let positive = match &arr.shape {
            ShapeClass::ArbitraryRect => true,
            _ => b.sides().all(|s| s > Rat::from_integer(0.into())),
        };
        if !(ok && positive) {
            return ShapeReport { ok: false, first_violation: Some(i) };
        }
    }
    ShapeReport { ok: true, first_violation: None }
}

pub const MAX_GRAPH_VERTICES: usize = 63;

/// Input-ordered intersection graph: vertex `i` is the `i`-th box, edges join
/// intersecting pairs.
pub fn intersection_graph(arr: &Arrangement) -> Result<OrderedGraph, GeomError> {
    if arr.is_empty() {
        return Err(GeomError::EmptyArrangement);
    }
    let n = arr.len();
    if n > MAX_GRAPH_VERTICES {
        return Err(GeomError::TooManyBoxes { n, max: MAX_GRAPH_VERTICES });
    }
    let d = arr.boxes[0].dim();
    if let Some(b) = arr.boxes.iter().find(|b| b.dim() != d) {
        return Err(GeomError::DimensionMismatch { left: d, right: b.dim() });
    }
    let mut adj = alloc::vec![0u64; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if intersects_unchecked(&arr.boxes[i], &arr.boxes[j]) {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    Ok(OrderedGraph::from_adjacency(adj))
}

/// True iff the arrangement realizes `g` edge-for-edge under the input-order
/// labeling. This automates the realizability check for search winners.
pub fn arrangement_matches(arr: &Arrangement, g: &OrderedGraph) -> Result<bool, GeomError> {
    if arr.is_empty() {
        return Err(GeomError::EmptyArrangement);
    }
    if arr.len() != g.n() {
        return Err(GeomError::SizeMismatch { arrangement: arr.len(), graph: g.n() });
    }
    let actual = intersection_graph(arr)?;
    Ok(actual == *g)
}

/// Unit-interval helper used throughout tests and generators.
pub fn unit_square(x: i64, y: i64, den: i64) -> Box {
    let lower = alloc::vec![rat(x, den), rat(y, den)];
    Box::cube(&lower, &Rat::one())
}
