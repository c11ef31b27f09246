//! Exact analysis of the probabilistic greedy policy on ordered graphs:
//! expectation polynomials, the optimal-p extractor, closed-form block
//! ratios, and the marking-block accounting.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::graph::{greedy_solution_size, OrderedGraph};
use crate::poly::ExpectationPolynomial;
use crate::rat::{rat, rat_i64, rat_pow, Rat};

pub const MAX_POLYNOMIAL_VERTICES: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExpectationError {
    TooManyVertices { n: usize, max: usize },
    ZeroPolynomial,
    ZeroExpectation,
    InvalidProbability,
}

impl fmt::Display for ExpectationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpectationError::TooManyVertices { n, max } => {
                write!(f, "graph has {n} vertices, polynomial recursion supports at most {max}")
            }
            ExpectationError::ZeroPolynomial => write!(f, "polynomial is identically zero"),
            ExpectationError::ZeroExpectation => write!(f, "expectation is zero"),
            ExpectationError::InvalidProbability => write!(f, "p outside the valid range"),
        }
    }
}

/// Exact expectation polynomial of the greedy-with-probability-p policy on an
/// ordered graph: recursion over vertices in input order carrying the blocked
/// set, memoized on `(index, blocked mask)`.
pub fn greedy_p_polynomial(g: &OrderedGraph) -> Result<ExpectationPolynomial, ExpectationError> {
    let n = g.n();
    if n > MAX_POLYNOMIAL_VERTICES {
        return Err(ExpectationError::TooManyVertices { n, max: MAX_POLYNOMIAL_VERTICES });
    }
    let mut memo: BTreeMap<(usize, u64), Vec<i128>> = BTreeMap::new();
    let coeffs = remaining_expectation(g, 0, 0, &mut memo);
    Ok(ExpectationPolynomial::new(coeffs))
}

/// E[number of accepts among vertices i.. given `blocked`], as coefficients.
fn remaining_expectation(
    g: &OrderedGraph,
    mut i: usize,
    blocked: u64,
    memo: &mut BTreeMap<(usize, u64), Vec<i128>>,
) -> Vec<i128> {
    let n = g.n();
    while i < n && blocked & (1 << i) != 0 {
        i += 1;
    }
    if i == n {
        return alloc::vec![0];
    }
    let key = (i, blocked & !((1u64 << i) - 1));
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let accept = remaining_expectation(g, i + 1, blocked | g.neighbors(i), memo);
    let reject = remaining_expectation(g, i + 1, blocked, memo);
    // p * (1 + accept) + (1 - p) * reject  =  reject + p * (1 + accept - reject)
    let deg = accept.len().max(reject.len()) + 1;
    let mut out = alloc::vec![0i128; deg + 1];
    for (t, &c) in reject.iter().enumerate() {
        out[t] += c;
    }
    out[1] += 1;
    for (t, &c) in accept.iter().enumerate() {
        out[t + 1] += c;
    }
    for (t, &c) in reject.iter().enumerate() {
        out[t + 1] -= c;
    }
    while out.len() > 1 && *out.last().unwrap() == 0 {
        out.pop();
    }
    memo.insert(key, out.clone());
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimum {
    pub p_star: Rat,
    pub max_expectation: Rat,
    pub min_ratio: Rat,
    /// True when `p_star` is an exact critical point (rational root of the
    /// derivative) rather than a bisection approximation.
    pub exact: bool,
}

/// Width target for derivative-root bisection.
const BISECT_WIDTH_LOG2: u32 = 40; // 2^-40 < 1e-12

/// Maximizes the polynomial on [0,1]: isolates real roots of the derivative
/// by sign-change bisection on a rational grid (refined to width <= 1e-12,
/// with exact rational roots snapped when the root is rational), then
/// compares endpoint and critical values. Ties break toward smaller p.
pub fn optimize_p(poly: &ExpectationPolynomial, opt: usize) -> Result<Optimum, ExpectationError> {
    if poly.is_zero() {
        return Err(ExpectationError::ZeroPolynomial);
    }
    let deriv = poly.derivative();
    let mut candidates: Vec<(Rat, bool)> = alloc::vec![(Rat::zero(), true), (Rat::one(), true)];
    for (root, exact) in derivative_roots_in_unit_interval(&deriv) {
        candidates.push((root, exact));
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0));

    let mut best: Option<Optimum> = None;
    for (p, exact) in candidates {
        let value = poly.eval(&p);
        let better = match &best {
            None => true,
            Some(b) => value > b.max_expectation, // ties keep the smaller p seen first
        };
        if better {
            best = Some(Optimum { p_star: p, max_expectation: value, min_ratio: Rat::zero(), exact });
        }
    }
    let mut best = best.expect("candidate list is nonempty");
    if best.max_expectation.is_zero() {
        return Err(ExpectationError::ZeroExpectation);
    }
    best.min_ratio = Rat::from_integer(opt.into()) / best.max_expectation.clone();
    Ok(best)
}

/// All points in (0,1) where the derivative changes sign or has a detected
/// exact rational root. The bool marks exact roots.
fn derivative_roots_in_unit_interval(deriv: &ExpectationPolynomial) -> Vec<(Rat, bool)> {
    let mut out: Vec<(Rat, bool)> = Vec::new();
    if deriv.is_zero() {
        return out;
    }
    if deriv.degree() == 1 {
        // c0 + c1 p = 0
        let c = deriv.coeffs();
        let root = rat_i64(-1) * rat_from_i128(c[0]) / rat_from_i128(c[1]);
        if root > Rat::zero() && root < Rat::one() {
            out.push((root, true));
        }
        return out;
    }
    let rational_candidates = rational_root_candidates(deriv);
    // coarse sign grid
    const CELLS: i64 = 4096;
    let mut prev_p = Rat::zero();
    let mut prev_sign = deriv.sign_at(&prev_p);
    for k in 1..=CELLS {
        let p = rat(k, CELLS);
        let sign = deriv.sign_at(&p);
        if sign == 0 {
            if p > Rat::zero() && p < Rat::one() {
                out.push((p.clone(), true));
            }
        } else if prev_sign != 0 && sign != prev_sign {
            // a sign change inside (prev_p, p): try the exact candidates first
            let mut snapped = false;
            for cand in &rational_candidates {
                if *cand > prev_p && *cand < p && deriv.eval(cand).is_zero() {
                    out.push((cand.clone(), true));
                    snapped = true;
                    break;
                }
            }
            if !snapped {
                out.push((bisect_sign_change(deriv, prev_p.clone(), p.clone(), prev_sign), false));
            }
        }
        if sign != 0 {
            prev_sign = sign;
        }
        prev_p = p;
    }
    out
}

fn bisect_sign_change(deriv: &ExpectationPolynomial, mut lo: Rat, mut hi: Rat, lo_sign: i32) -> Rat {
    for _ in 0..BISECT_WIDTH_LOG2 {
        let mid = (&lo + &hi) / rat_i64(2);
        let s = deriv.sign_at(&mid);
        if s == 0 {
            return mid;
        }
        if s == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (&lo + &hi) / rat_i64(2)
}

fn rat_from_i128(v: i128) -> Rat {
    Rat::from_integer(v.into())
}

/// Rational-root-theorem candidates r/q in (0,1) with r | trailing coeff and
/// q | leading coeff. Divisor enumeration is capped; a missed candidate only
/// means the root is located by bisection instead.
fn rational_root_candidates(deriv: &ExpectationPolynomial) -> Vec<Rat> {
    let coeffs = deriv.coeffs();
    let lead = *coeffs.last().unwrap();
    let trail = match coeffs.iter().find(|&&c| c != 0) {
        Some(&c) => c,
        None => return Vec::new(),
    };
    let nums = small_divisors(trail.unsigned_abs());
    let dens = small_divisors(lead.unsigned_abs());
    let mut out = Vec::new();
    for r in &nums {
        for q in &dens {
            let cand = rat(*r as i64, *q as i64);
            if cand > Rat::zero() && cand < Rat::one() && !out.contains(&cand) {
                out.push(cand);
            }
        }
    }
    out
}

fn small_divisors(v: u128) -> Vec<u128> {
    const CAP: u128 = 4096;
    let mut out = Vec::new();
    let mut d = 1u128;
    while d <= CAP && d * d <= v {
        if v % d == 0 {
            out.push(d);
            let q = v / d;
            if q <= CAP {
                out.push(q);
            }
        }
        d += 1;
    }
    if v <= CAP && !out.contains(&v) {
        out.push(v);
    }
    out
}

/// Closed-form per-block ratio of the probabilistic greedy policy against the
/// repeated pack adversary: the denominator is the expected per-block accept
/// count and the numerator the per-block optimum.
pub fn block_formula_ratio(d: u32, order: crate::geometry::OrderClass, p: &Rat) -> Result<Rat, ExpectationError> {
    if p.is_zero() || p.is_negative() || p > &Rat::one() {
        return Err(ExpectationError::InvalidProbability);
    }
    let two_d = rat_pow(&rat_i64(2), d);
    let (num, denom) = match order {
        crate::geometry::OrderClass::NonDominated => {
            let m = &two_d - Rat::one();
            (m.clone(), &two_d * p - m * p * p)
        }
        crate::geometry::OrderClass::Arbitrary => {
            let m1 = &two_d + Rat::one();
            (two_d.clone(), m1 * p - two_d * p * p)
        }
        crate::geometry::OrderClass::Dominating => return Err(ExpectationError::InvalidProbability),
    };
    if denom.is_zero() {
        return Err(ExpectationError::ZeroExpectation);
    }
    Ok(num / denom)
}

/// The closed-form optimal p and optimal block ratio for the same formulas.
pub fn block_formula_optimum(d: u32, order: crate::geometry::OrderClass) -> Option<(Rat, Rat)> {
    let two_d = rat_pow(&rat_i64(2), d);
    match order {
        crate::geometry::OrderClass::NonDominated => {
            let p = rat_pow(&rat_i64(2), d.saturating_sub(1)) / (&two_d - Rat::one());
            let ratio = (&two_d - Rat::one()) * (&two_d - Rat::one()) / rat_pow(&rat_i64(4), d.saturating_sub(1));
            Some((p, ratio))
        }
        crate::geometry::OrderClass::Arbitrary => {
            let p = (&two_d + Rat::one()) / rat_pow(&rat_i64(2), d + 1);
            let ratio = rat_pow(&rat_i64(4), d + 1) / ((&two_d + Rat::one()) * (&two_d + Rat::one()));
            Some((p, ratio))
        }
        crate::geometry::OrderClass::Dominating => None,
    }
}

/// Probability that exactly one box of a free level pair is accepted by
/// greedy-with-probability-p, derived by enumerating the four coin outcomes.
pub fn single_selection_probability(p: &Rat) -> Rat {
    // outcomes (accept, accept), (accept, reject), (reject, accept),
    // (reject, reject): exactly-one has probability p(1-p) + (1-p)p
    let q = Rat::one() - p;
    p * &q + q * p
}

/// The per-block accounting for the marking adversary with `levels` levels:
/// the nested form 1 + q(1 + q(... )) with `levels` factors of the per-level
/// single-selection probability q. This is the adversary-side bound on the
/// per-block expected solution size used in the asymptotic ratio compositions.
pub fn marking_block_expectation(levels: u32, p: &Rat) -> Rat {
    let q = single_selection_probability(p);
    let mut acc = Rat::one();
    for _ in 0..levels {
        acc = Rat::one() + &q * acc;
    }
    acc
}

/// Exact expected solution size of greedy-with-probability-p on one marking
/// block (`levels` pair levels), by enumerating every adversary marking
/// outcome and running the exact coin-outcome recursion on each resulting
/// ordered graph.
pub fn exact_marking_block_expectation(levels: u32, p: &Rat) -> Result<Rat, ExpectationError> {
    if levels == 0 || 2 * levels as usize > MAX_POLYNOMIAL_VERTICES {
        return Err(ExpectationError::TooManyVertices {
            n: 2 * levels as usize,
            max: MAX_POLYNOMIAL_VERTICES,
        });
    }
    let mark_levels = levels.saturating_sub(1);
    let patterns = 1u32 << mark_levels;
    let mut total = Rat::zero();
    for pattern in 0..patterns {
        let g = marking_block_graph(levels, |level| (pattern >> level) & 1 == 1);
        let poly = greedy_p_polynomial(&g)?;
        total += poly.eval(p);
    }
    Ok(total / Rat::from_integer(patterns.into()))
}

/// Ordered graph of one marking block: level j contributes vertices 2j and
/// 2j+1; both intersect exactly the marked vertices of levels 0..j.
pub fn marking_block_graph(levels: u32, mark_second: impl Fn(u32) -> bool) -> OrderedGraph {
    let n = 2 * levels as usize;
    let mut adj = alloc::vec![0u64; n];
    let mut marks: Vec<usize> = Vec::new();
    for level in 0..levels {
        let a = 2 * level as usize;
        let b = a + 1;
        for &m in &marks {
            adj[a] |= 1 << m;
            adj[m] |= 1 << a;
            adj[b] |= 1 << m;
            adj[m] |= 1 << b;
        }
        if level + 1 < levels {
            marks.push(if mark_second(level) { b } else { a });
        }
    }
    OrderedGraph::from_adjacency(adj)
}

/// opt / expectation, valid by additivity of both over disjoint blocks.
pub fn asymptotic_block_ratio(opt_per_block: usize, expectation_per_block: &Rat) -> Result<Rat, ExpectationError> {
    if expectation_per_block.is_zero() {
        return Err(ExpectationError::ZeroExpectation);
    }
    Ok(Rat::from_integer(opt_per_block.into()) / expectation_per_block.clone())
}

/// E(1) must equal the deterministic greedy solution size; exposed for tests
/// and the verification harness.
pub fn deterministic_greedy_size(g: &OrderedGraph) -> usize {
    greedy_solution_size(g)
}

pub fn rat_approx_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::OrderClass;
    use crate::graph::mis_size;
    use alloc::vec;

    fn universal_prefix_graph(universal: usize, independent: usize) -> OrderedGraph {
        let n = universal + independent;
        let mut adj = vec![0u64; n];
        for u in 0..universal {
            for v in 0..n {
                if v != u {
                    adj[u] |= 1 << v;
                    adj[v] |= 1 << u;
                }
            }
        }
        OrderedGraph::from_adjacency(adj)
    }

    #[test]
    fn edgeless_polynomial_is_n_p() {
        for n in 1..=6 {
            let g = OrderedGraph::edgeless(n);
            let poly = greedy_p_polynomial(&g).unwrap();
            assert_eq!(poly.coeffs(), &[0, n as i128]);
        }
    }

    #[test]
    fn five_vertex_winner_polynomial() {
        let g = universal_prefix_graph(2, 3);
        let poly = greedy_p_polynomial(&g).unwrap();
        assert_eq!(poly.coeffs(), &[0, 5, -7, 3]);
    }

    #[test]
    fn three_vertex_path_center_first() {
        // center vertex 0 adjacent to 1 and 2; leaves independent
        let g = universal_prefix_graph(1, 2);
        let poly = greedy_p_polynomial(&g).unwrap();
        assert_eq!(poly.coeffs(), &[0, 3, -2]);
        // oracle: enumerate the eight coin outcomes by hand
        let p = rat(1, 3);
        let q = Rat::one() - &p;
        let manual = &p * Rat::one() + &q * (&p + &p) ;
        assert_eq!(poly.eval(&p), manual);
    }

    #[test]
    fn optimize_examples() {
        let five = ExpectationPolynomial::new(vec![0, 5, -7, 3]);
        let opt = optimize_p(&five, 3).unwrap();
        assert_eq!(opt.p_star, rat(5, 9));
        assert!(opt.exact);
        assert_eq!(opt.max_expectation, rat(275, 243));
        assert_eq!(opt.min_ratio, rat(729, 275));

        let linear = ExpectationPolynomial::new(vec![0, 4]);
        let opt = optimize_p(&linear, 4).unwrap();
        assert_eq!(opt.p_star, Rat::one());
        assert_eq!(opt.min_ratio, Rat::one());

        let path = ExpectationPolynomial::new(vec![0, 3, -2]);
        let opt = optimize_p(&path, 2).unwrap();
        assert_eq!(opt.p_star, rat(3, 4));
        assert_eq!(opt.min_ratio, rat(16, 9));

        assert!(optimize_p(&ExpectationPolynomial::zero(), 1).is_err());
    }

    #[test]
    fn block_formula_examples() {
        let (p, ratio) = block_formula_optimum(2, OrderClass::NonDominated).unwrap();
        assert_eq!(p, rat(2, 3));
        assert_eq!(ratio, rat(9, 4));
        let (p, ratio) = block_formula_optimum(2, OrderClass::Arbitrary).unwrap();
        assert_eq!(p, rat(5, 8));
        assert_eq!(ratio, rat(64, 25));
        // both optimal ratios approach 4 for large d
        for order in [OrderClass::NonDominated, OrderClass::Arbitrary] {
            let (_, ratio) = block_formula_optimum(40, order).unwrap();
            let v = rat_approx_f64(&ratio);
            assert!((v - 4.0).abs() < 1e-9, "{v}");
        }
        // consistency of the pointwise formula with its optimum
        let at = block_formula_ratio(2, OrderClass::NonDominated, &rat(2, 3)).unwrap();
        assert_eq!(at, rat(9, 4));
        assert!(block_formula_ratio(2, OrderClass::Arbitrary, &Rat::zero()).is_err());
    }

    #[test]
    fn marking_block_values() {
        assert_eq!(marking_block_expectation(2, &rat(1, 2)), rat(7, 4));
        assert_eq!(marking_block_expectation(3, &rat(1, 2)), rat(15, 8));
        // supremum over L of the nested form is 1/(1-q) <= 2 since the
        // single-selection probability never exceeds 1/2
        let e = marking_block_expectation(60, &rat(1, 2));
        assert!(e < rat_i64(2));
        assert!(e > rat(199, 100));
    }

    #[test]
    fn exact_block_enumeration() {
        // exact greedy expectation per block: 2p * sum_{j<L} (1-p)^j
        for levels in 1..=4u32 {
            for p in [rat(1, 2), rat(1, 3), rat(3, 4)] {
                let e = exact_marking_block_expectation(levels, &p).unwrap();
                let mut expected = Rat::zero();
                let q = Rat::one() - &p;
                for j in 0..levels {
                    expected += rat_i64(2) * &p * rat_pow(&q, j);
                }
                assert_eq!(e, expected, "L={levels}");
            }
        }
        assert_eq!(exact_marking_block_expectation(2, &rat(1, 2)).unwrap(), rat(3, 2));
    }

    #[test]
    fn asymptotic_ratio_examples() {
        assert_eq!(asymptotic_block_ratio(4, &rat(15, 8)).unwrap(), rat(32, 15));
        assert_eq!(asymptotic_block_ratio(3, &rat(7, 4)).unwrap(), rat(12, 7));
        assert_eq!(asymptotic_block_ratio(4, &rat(5, 4)).unwrap(), rat(16, 5));
        assert!(asymptotic_block_ratio(1, &Rat::zero()).is_err());
    }

    #[test]
    fn marking_block_graph_mis() {
        let g = marking_block_graph(3, |_| false);
        assert_eq!(g.n(), 6);
        assert_eq!(mis_size(&g).size, 4);
    }

    #[test]
    fn too_many_vertices_rejected() {
        let g = OrderedGraph::edgeless(21);
        assert!(greedy_p_polynomial(&g).is_err());
    }
}
