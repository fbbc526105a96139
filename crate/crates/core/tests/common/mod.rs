//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use multistage_gt::{generate_matrix, CandidateHypergraph, DesignParams, OutcomeVector, PoolMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Every weight-`k` column of length `n` as a bit mask, ascending.
pub fn all_columns(n: usize, k: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == k).collect()
}

pub fn prefix(w: usize) -> u32 {
    (1u32 << w) - 1
}

/// Counts of ordered `s`-tuples of weight-`k` columns: `exact[w]` have union
/// equal to the first `w` positions, `completes[w1][w]` turn the first `w1`
/// positions into exactly the first `w`.
pub struct TupleCounts {
    pub total: BigInt,
    pub exact: Vec<u64>,
    pub completes: Vec<Vec<u64>>,
}

pub fn tuple_counts(s: u32, n: usize, k: usize) -> TupleCounts {
    let cols = all_columns(n, k);
    let mut exact = vec![0u64; n + 1];
    let mut completes = vec![vec![0u64; n + 1]; n + 1];
    let mut idx = vec![0usize; s as usize];
    loop {
        let u = idx.iter().fold(0u32, |acc, &i| acc | cols[i]);
        for w in 0..=n {
            if u == prefix(w) {
                exact[w] += 1;
            }
            for w1 in 0..=w {
                if u | prefix(w1) == prefix(w) {
                    completes[w1][w] += 1;
                }
            }
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                let total = BigInt::from(cols.len()).pow(s);
                return TupleCounts { total, exact, completes };
            }
            idx[pos] += 1;
            if idx[pos] < cols.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

pub fn ratio(count: u64, total: &BigInt) -> BigRational {
    if count == 0 {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::from(count), total.clone())
    }
}

/// `log2` of a positive rational, accurate to double precision.
pub fn log2_rational(r: &BigRational) -> f64 {
    fn log2_int(x: &BigInt) -> f64 {
        let bits = x.bits();
        let shift = bits.saturating_sub(60);
        let top: BigInt = x >> shift;
        let top: f64 = top.to_string().parse().unwrap();
        top.log2() + shift as f64
    }
    log2_int(r.numer()) - log2_int(r.denom())
}

pub fn random_matrix(t: usize, s: usize, n: usize, k: usize, seed: u64) -> PoolMatrix {
    let params = DesignParams::with_weight(t, s, n, k, 1).unwrap().with_seed(seed);
    generate_matrix(&params).unwrap()
}

/// All `s`-subsets of `0..t` whose columns have union exactly `y`.
pub fn brute_candidates(m: &PoolMatrix, s: usize, y: &OutcomeVector) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut set: Vec<usize> = (0..s).collect();
    if s > m.t() {
        return out;
    }
    loop {
        let mut u = fixedbitset::FixedBitSet::with_capacity(m.n());
        for &j in &set {
            u.union_with(m.column(j));
        }
        if &u == y.bits() {
            out.push(set.clone());
        }
        let mut i = s;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if set[i] < m.t() - s + i {
                set[i] += 1;
                for j in i + 1..s {
                    set[j] = set[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Whether some `size` edges pairwise intersect in one common `k`-set.
pub fn brute_has_configuration(h: &CandidateHypergraph, k: usize, size: usize) -> bool {
    let m = h.len();
    (0u32..1 << m).any(|mask| {
        if mask.count_ones() as usize != size {
            return false;
        }
        let chosen: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        if size == 1 {
            return k < h.s();
        }
        let core = h.edge(chosen[0]).intersection(h.edge(chosen[1]));
        core.len() == k
            && chosen.iter().enumerate().all(|(a, &i)| {
                chosen[a + 1..]
                    .iter()
                    .all(|&j| h.edge(i).intersection(h.edge(j)) == core)
            })
    })
}

/// Largest set of pairwise disjoint edges.
pub fn brute_max_matching(h: &CandidateHypergraph) -> usize {
    let m = h.len();
    (0u32..1 << m)
        .filter(|mask| {
            let chosen: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            chosen.iter().enumerate().all(|(a, &i)| {
                chosen[a + 1..].iter().all(|&j| !h.edge(i).intersects(h.edge(j)))
            })
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

pub fn one() -> BigRational {
    BigRational::one()
}
