//! Exact covering probabilities and the 2-good / 3-good matrix audits.
//!
//! Goodness quantifies over every `y` in `{0,1}^N`, which is out of reach;
//! audits run over an [`OutcomeScope`], by default the reachable outcomes
//! `r(X, S)` with `|S| = s`, which are the only ones a decoder sees.
//!
//! The 3-good definition lists four properties. They are checked as
//! written; the union-bound proof that such matrices are likely is not
//! re-derived here.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use petgraph::algo::maximum_matching;
use petgraph::graph::UnGraph;
use rayon::prelude::*;
use serde::Serialize;

use crate::design::outcome;
use crate::hypergraph::{
    candidates, covered_columns, find_configuration, maximal_matching, Configuration,
};
use crate::model::{CandidateHypergraph, Hyperedge, OutcomeVector, PoolMatrix};

/// `C(n, k)` as a big integer; zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    if num.is_zero() {
        BigRational::zero()
    } else {
        BigRational::new(num, den)
    }
}

/// Probability that `s` independent uniform weight-`k` columns of length
/// `n` have union equal to a fixed weight-`w` vector.
///
/// Inclusion-exclusion over the positions of the vector left uncovered.
pub fn pr1(s: u32, w: usize, n: usize, k: usize) -> BigRational {
    if w > n {
        return BigRational::zero();
    }
    let (w, n, k) = (w as i64, n as i64, k as i64);
    let mut num = BigInt::zero();
    for j in 0..=w {
        let term = binomial(w, j) * binomial(w - j, k).pow(s);
        if j % 2 == 0 {
            num += term;
        } else {
            num -= term;
        }
    }
    ratio(num, binomial(n, k).pow(s))
}

/// Probability that `s` such columns, joined with a fixed weight-`w1`
/// vector `y1 <= y`, have union equal to a fixed weight-`w` vector `y`.
pub fn pr2(s: u32, w1: usize, w: usize, n: usize, k: usize) -> BigRational {
    if w1 > w || w > n {
        return BigRational::zero();
    }
    let (w1, w, n, k) = (w1 as i64, w as i64, n as i64, k as i64);
    let mandatory = w - w1;
    if s == 1 {
        return ratio(binomial(w1, k - mandatory), binomial(n, k));
    }
    let mut num = BigInt::zero();
    for j in 0..=mandatory {
        let term = binomial(mandatory, j) * binomial(w - j, k).pow(s);
        if j % 2 == 0 {
            num += term;
        } else {
            num -= term;
        }
    }
    ratio(num, binomial(n, k).pow(s))
}

/// `q = C(w, k) C(k, w - k) / C(N, k)^2`.
pub fn q_value(w: usize, n: usize, k: usize) -> BigRational {
    let (w, n, k) = (w as i64, n as i64, k as i64);
    ratio(binomial(w, k) * binomial(k, w - k), binomial(n, k).pow(2))
}

/// The piecewise threshold `B(N, t)` of the covering-column property.
pub fn b_threshold(n: usize, t: usize, w1: usize, w: usize, l1: usize, k: usize) -> f64 {
    let expected = (BigRational::from_integer(BigInt::from(t)) * pr2(1, w1, w, n, k))
        .to_f64()
        .unwrap_or(0.0);
    b_threshold_from(expected, n, t, l1)
}

/// `B(N, t)` given `t * Pr2(1, w1, w)` directly.
pub fn b_threshold_from(expected: f64, n: usize, t: usize, l1: usize) -> f64 {
    let floor = (t as f64).powf(-1.0 / (l1 as f64).sqrt());
    if expected > n as f64 {
        expected
    } else if expected >= floor {
        n as f64
    } else {
        l1 as f64 / 10.0
    }
}

/// Which outcome vectors an audit visits.
#[derive(Clone, Debug, PartialEq)]
pub enum OutcomeScope {
    /// Every `r(X, S)` with `|S| = s`.
    Reachable,
    /// Every vector of length `N`; only for `N <= 20`.
    All,
    Listed(Vec<OutcomeVector>),
}

impl OutcomeScope {
    pub const MAX_EXHAUSTIVE_N: usize = 20;

    /// Materializes the scope, sorted and deduplicated.
    pub fn outcomes(&self, matrix: &PoolMatrix, s: usize) -> Vec<OutcomeVector> {
        let set: BTreeSet<OutcomeVector> = match self {
            OutcomeScope::Reachable => reachable_sets(matrix.t(), s)
                .map(|set| outcome(matrix, &set).expect("indices in range"))
                .collect(),
            OutcomeScope::All => {
                let n = matrix.n();
                assert!(
                    n <= Self::MAX_EXHAUSTIVE_N,
                    "exhaustive scope needs N <= {}",
                    Self::MAX_EXHAUSTIVE_N
                );
                (0u64..1 << n)
                    .map(|mask| {
                        let mut bits = fixedbitset::FixedBitSet::with_capacity(n);
                        for i in 0..n {
                            if mask >> i & 1 == 1 {
                                bits.insert(i);
                            }
                        }
                        OutcomeVector::new(bits)
                    })
                    .collect()
            }
            OutcomeScope::Listed(list) => list.iter().cloned().collect(),
        };
        set.into_iter().collect()
    }
}

/// All `s`-subsets of `0..t` in lexicographic order.
pub fn reachable_sets(t: usize, s: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = (s <= t).then(|| (0..s).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = s;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < t - s + i {
                c[i] += 1;
                for j in i + 1..s {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Property {
    /// 2-good, property 1: maximum degree below `d`.
    TwoGoodDegree,
    /// 2-good, property 2: matching below `10 max(N, t^2 q)`.
    TwoGoodMatching,
    /// 3-good, property 1: no (3,1) configuration of size `L1`.
    ThreeGoodStar,
    /// 3-good, property 2: no large (3,0) configuration.
    ThreeGoodPacking,
    /// 3-good, property 3: few columns complete `y1` to `y`.
    ThreeGoodCompletions,
    /// 3-good, property 4: few disjoint covered pairs per union weight.
    ThreeGoodDisjointPairs,
    SiblingDegree,
    H2Degree,
    E2Size,
    ArcOutDegree,
    E2Groups,
    VertexGroups,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Degree { vertex: usize, degree: usize, bound: f64 },
    Matching { edges: Vec<Hyperedge>, bound: f64 },
    Configuration(Configuration),
    Completions { y1_columns: Vec<usize>, count: usize, bound: f64 },
    DisjointPairs { union_weight: usize, pairs: usize, bound: f64 },
    Count { value: usize, bound: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub property: Property,
    pub outcome: Option<OutcomeVector>,
    pub witness: Witness,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuditReport {
    pub checked_outcomes: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: AuditReport) {
        self.checked_outcomes += other.checked_outcomes;
        self.violations.extend(other.violations);
    }

    pub fn count_by_property(&self) -> std::collections::BTreeMap<Property, usize> {
        let mut out = std::collections::BTreeMap::new();
        for v in &self.violations {
            *out.entry(v.property).or_insert(0) += 1;
        }
        out
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::INFINITY)
}

fn int(v: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Size of a maximum matching in a simple graph on `0..n`.
pub fn maximum_matching_size(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut g: UnGraph<(), ()> = UnGraph::with_capacity(n, edges.len());
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for &(a, b) in edges {
        g.add_edge(nodes[a], nodes[b], ());
    }
    maximum_matching(&g).len()
}

fn audit_outcomes<F>(outcomes: Vec<OutcomeVector>, check: F) -> AuditReport
where
    F: Fn(&OutcomeVector) -> Vec<Violation> + Sync,
{
    let violations: Vec<Vec<Violation>> = outcomes.par_iter().map(&check).collect();
    AuditReport {
        checked_outcomes: outcomes.len(),
        violations: violations.into_iter().flatten().collect(),
    }
}

/// Checks both 2-good properties on every scoped outcome.
pub fn audit_2good(matrix: &PoolMatrix, scope: &OutcomeScope) -> AuditReport {
    let params = matrix.params();
    let (n, k, t) = (params.n(), params.k(), params.t());
    let d = params.sparsity();
    audit_outcomes(scope.outcomes(matrix, 2), |y| {
        let h = candidates(matrix, 2, y);
        let mut out = Vec::new();
        if let Some(v) = h.vertices().max_by_key(|&v| (h.degree(v), std::cmp::Reverse(v))) {
            if h.degree(v) >= d {
                out.push(Violation {
                    property: Property::TwoGoodDegree,
                    outcome: Some(y.clone()),
                    witness: Witness::Degree {
                        vertex: v,
                        degree: h.degree(v),
                        bound: d as f64,
                    },
                });
            }
        }
        let expected = int(t * t) * q_value(y.weight(), n, k);
        let bound = (int(n)).max(expected) * int(10);
        if let Some(size) = matching_exceeds(&h, &bound) {
            let greedy = maximal_matching(&h);
            out.push(Violation {
                property: Property::TwoGoodMatching,
                outcome: Some(y.clone()),
                witness: Witness::Matching {
                    edges: greedy.iter().map(|&i| h.edge(i).clone()).collect(),
                    bound: rational_to_f64(&bound),
                },
            });
            debug_assert!(int(size) >= bound);
        }
        out
    })
}

/// Returns the matching size when it reaches `bound`: greedy witness first,
/// exact maximum matching once the greedy one passes half the bound.
fn matching_exceeds(h: &CandidateHypergraph, bound: &BigRational) -> Option<usize> {
    let greedy = maximal_matching(h).len();
    if int(greedy) >= *bound {
        return Some(greedy);
    }
    if int(2 * greedy) < *bound {
        return None;
    }
    let vertices: Vec<usize> = h.vertices().collect();
    let index = |v: usize| vertices.binary_search(&v).unwrap();
    let edges: Vec<(usize, usize)> = h
        .edges()
        .iter()
        .map(|e| (index(e.vertices()[0]), index(e.vertices()[1])))
        .collect();
    let exact = maximum_matching_size(vertices.len(), &edges);
    (int(exact) >= *bound).then_some(exact)
}

/// Checks the four 3-good properties on every scoped outcome.
///
/// Property 3 is evaluated for `y1` ranging over single covered columns
/// and unions of two covered columns, counting completing columns other
/// than the ones forming `y1`; property 4 counts the largest set of
/// index-disjoint covered pairs with a given union weight.
pub fn audit_3good(matrix: &PoolMatrix, scope: &OutcomeScope) -> AuditReport {
    audit_outcomes(scope.outcomes(matrix, 3), |y| check_3good(matrix, y))
}

fn check_3good(matrix: &PoolMatrix, y: &OutcomeVector) -> Vec<Violation> {
    let params = matrix.params();
    let (n, k, t) = (params.n(), params.k(), params.t());
    let l1 = params.sparsity();
    let w = y.weight();
    let h = candidates(matrix, 3, y);
    let mut out = Vec::new();
    let violation = |property, witness| Violation {
        property,
        outcome: Some(y.clone()),
        witness,
    };

    if let Some(config) = find_configuration(&h, 1, l1) {
        out.push(violation(Property::ThreeGoodStar, Witness::Configuration(config)));
    }

    let packing_bound = int(n).max(int(t * t * t) * pr1(3, w, n, k)) * int(10);
    let greedy = maximal_matching(&h);
    if int(greedy.len()) >= packing_bound {
        out.push(violation(
            Property::ThreeGoodPacking,
            Witness::Matching {
                edges: greedy.iter().map(|&i| h.edge(i).clone()).collect(),
                bound: rational_to_f64(&packing_bound),
            },
        ));
    } else if int(3 * greedy.len()) >= packing_bound {
        let need = rational_to_f64(&packing_bound.ceil()) as usize;
        if let Some(config) = find_configuration(&h, 0, need) {
            out.push(violation(Property::ThreeGoodPacking, Witness::Configuration(config)));
        }
    }

    let covered = covered_columns(matrix, y);
    let mut seeds: BTreeSet<(fixedbitset::FixedBitSet, Vec<usize>)> = BTreeSet::new();
    for (i, &a) in covered.iter().enumerate() {
        seeds.insert((matrix.column(a).clone(), vec![a]));
        for &b in &covered[i + 1..] {
            let mut u = matrix.column(a).clone();
            u.union_with(matrix.column(b));
            seeds.insert((u, vec![a, b]));
        }
    }
    for (y1, cols) in seeds {
        let w1 = y1.count_ones(..);
        let count = covered
            .iter()
            .filter(|z| !cols.contains(z))
            .filter(|&&z| {
                let mut u = y1.clone();
                u.union_with(matrix.column(z));
                u.count_ones(..) == w
            })
            .count();
        let bound = 10.0 * b_threshold(n, t, w1, w, l1, k);
        if count as f64 >= bound {
            out.push(violation(
                Property::ThreeGoodCompletions,
                Witness::Completions {
                    y1_columns: cols,
                    count,
                    bound,
                },
            ));
        }
    }

    let mut pairs_by_weight: std::collections::BTreeMap<usize, Vec<(usize, usize)>> =
        std::collections::BTreeMap::new();
    for (i, &a) in covered.iter().enumerate() {
        for (j, &b) in covered.iter().enumerate().skip(i + 1) {
            let w1 = matrix.column(a).union_count(matrix.column(b));
            pairs_by_weight.entry(w1).or_default().push((i, j));
        }
    }
    for (w1, pairs) in pairs_by_weight {
        let bound = int(n).max(
            BigRational::from_integer(binomial(w as i64, w1 as i64))
                * int(t * t)
                * pr1(2, w1, n, k),
        ) * int(10);
        let mut used = BTreeSet::new();
        let greedy = pairs
            .iter()
            .filter(|&&(a, b)| {
                let free = !used.contains(&a) && !used.contains(&b);
                if free {
                    used.insert(a);
                    used.insert(b);
                }
                free
            })
            .count();
        let size = if int(greedy) >= bound || int(2 * greedy) < bound {
            greedy
        } else {
            maximum_matching_size(covered.len(), &pairs)
        };
        if int(size) >= bound {
            out.push(violation(
                Property::ThreeGoodDisjointPairs,
                Witness::DisjointPairs {
                    union_weight: w1,
                    pairs: size,
                    bound: rational_to_f64(&bound),
                },
            ));
        }
    }
    out
}
