//! Stage-1 design: parameter formulas and the random constant-weight matrix.

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DesignParams, OutcomeVector, Overrides, PoolMatrix, RelativeWeight};
use crate::rates::{self, h};

/// `ceil(log2 log2 t)`: the degree threshold `d` for two defectives and the
/// configuration threshold `L1` for three.
pub fn sparsity_threshold(t: usize) -> usize {
    (t as f64).log2().log2().ceil().max(1.0) as usize
}

/// Stage-1 parameters for `t` samples and `s` defectives.
///
/// Two defectives: `N = ceil((d + 4) / d * log2 t / (h(p) - p))`.
/// Three defectives: `N = ceil((2 L1 + 10) / L1 * log2 t * c3)` where `c3`
/// comes from [`rates::c3_constant`]. The returned record has seed 0; use
/// [`DesignParams::with_seed`] to pick another.
pub fn compute_params(t: usize, s: usize, overrides: &Overrides) -> Result<DesignParams> {
    if !(2..=3).contains(&s) {
        return Err(Error::InvalidParams(format!("s = {s} not in {{2, 3}}")));
    }
    if t < (s + 1).max(4) {
        return Err(Error::InvalidParams(format!(
            "t = {t} too small: need t >= {} so that log2 log2 t >= 1",
            (s + 1).max(4)
        )));
    }
    let sparsity = overrides.sparsity.unwrap_or_else(|| sparsity_threshold(t));
    if sparsity == 0 {
        return Err(Error::InvalidParams("sparsity override must be positive".into()));
    }
    let p = overrides.p.unwrap_or_else(|| RelativeWeight::for_defectives(s));
    let log_t = (t as f64).log2();
    let d = sparsity as f64;

    let c3 = if s == 3 {
        Some(if overrides.p.is_some() {
            rates::c3_constant(p.value())?
        } else {
            rates::default_c3()?
        })
    } else {
        None
    };

    let n = match (overrides.n, s) {
        (Some(n), _) => n,
        (None, 2) => {
            let pv = p.value();
            let gap = h(pv) - pv;
            if gap <= 0.0 {
                return Err(Error::InvalidParams(format!("h(p) - p = {gap} is not positive")));
            }
            ((d + 4.0) / d * log_t / gap).ceil() as usize
        }
        (None, _) => ((2.0 * d + 10.0) / d * log_t * c3.unwrap()).ceil() as usize,
    };

    DesignParams::from_parts(t, s, p, n, sparsity, 0, c3, overrides.clone())
}

/// Draws `t` columns independently and uniformly among weight-`k` columns.
///
/// Column `j` uses its own ChaCha stream (`set_stream(j)`) under the global
/// seed, so it does not depend on `t` or on evaluation order.
pub fn generate_matrix(params: &DesignParams) -> Result<PoolMatrix> {
    let (n, k) = (params.n(), params.k());
    if k == 0 || k >= n {
        return Err(Error::InvalidParams(format!("k = {k} must satisfy 0 < k < N = {n}")));
    }
    let columns: Vec<FixedBitSet> = (0..params.t())
        .into_par_iter()
        .map(|j| random_column(params.seed(), j as u64, n, k))
        .collect();
    PoolMatrix::from_columns(params.clone(), columns)
}

/// Partial Fisher-Yates: the first `k` slots of a shuffled `0..n`.
pub(crate) fn random_column(seed: u64, stream: u64, n: usize, k: usize) -> FixedBitSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut rows: Vec<usize> = (0..n).collect();
    let mut bits = FixedBitSet::with_capacity(n);
    for i in 0..k {
        let j = rng.gen_range(i..n);
        rows.swap(i, j);
        bits.insert(rows[i]);
    }
    bits
}

/// `r(X, S)`: the OR of the columns indexed by `set`.
pub fn outcome(matrix: &PoolMatrix, set: &[usize]) -> Result<OutcomeVector> {
    let mut bits = FixedBitSet::with_capacity(matrix.n());
    for &j in set {
        if j >= matrix.t() {
            return Err(Error::IndexOutOfRange {
                index: j,
                t: matrix.t(),
            });
        }
        bits.union_with(matrix.column(j));
    }
    Ok(OutcomeVector::new(bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(t: usize) -> PoolMatrix {
        let params = DesignParams::with_weight(t, 2, t, 1, 1).unwrap();
        let cols = (0..t)
            .map(|j| {
                let mut b = FixedBitSet::with_capacity(t);
                b.insert(j);
                b
            })
            .collect();
        PoolMatrix::from_columns(params, cols).unwrap()
    }

    #[test]
    fn small_t_rejected() {
        assert!(matches!(
            compute_params(3, 2, &Overrides::default()),
            Err(Error::InvalidParams(_))
        ));
        assert!(compute_params(3, 3, &Overrides::default()).is_err());
        assert!(compute_params(64, 4, &Overrides::default()).is_err());
    }

    #[test]
    fn two_defective_params_at_million() {
        let params = compute_params(1 << 20, 2, &Overrides::default()).unwrap();
        assert_eq!(params.sparsity(), 5);
        // h(p) - p at the 12-digit default weight, evaluated independently.
        let pv = params.p().value();
        assert!((h(pv) - pv - 0.579536).abs() < 1e-6);
        assert_eq!(params.n(), 63);
        assert!(params.overrides().is_empty());
    }

    #[test]
    fn three_defective_params_at_million() {
        let params = compute_params(1 << 20, 3, &Overrides::default()).unwrap();
        assert_eq!(params.sparsity(), 5);
        assert_eq!(params.sibling_threshold(), 15);
        // 4 * 20 * 1.35546 = 108.44; the rounded constant 1.35 would give 108.
        assert_eq!(params.n(), 109);
        assert!((params.c3().unwrap() - 1.35546).abs() < 1e-4);
    }

    #[test]
    fn two_defective_params_at_64() {
        let params = compute_params(64, 2, &Overrides::default()).unwrap();
        assert_eq!(params.sparsity(), 3);
        assert_eq!(params.n(), 25);
        assert_eq!(params.k(), 7);
    }

    #[test]
    fn overrides_are_recorded() {
        let ov = Overrides {
            n: Some(30),
            p: None,
            sparsity: Some(2),
        };
        let params = compute_params(64, 2, &ov).unwrap();
        assert_eq!(params.n(), 30);
        assert_eq!(params.sparsity(), 2);
        assert_eq!(params.overrides(), &ov);
        let bad = Overrides {
            n: Some(2),
            ..Overrides::default()
        };
        assert!(compute_params(64, 2, &bad).is_err());
    }

    #[test]
    fn forced_full_weight_rejected() {
        assert!(RelativeWeight::new(1, 1).is_err());
        assert!(DesignParams::with_weight(1, 1, 4, 4, 1).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let params = compute_params(64, 2, &Overrides::default()).unwrap().with_seed(42);
        let a = generate_matrix(&params).unwrap();
        let b = generate_matrix(&params).unwrap();
        assert_eq!(a, b);
        let c = generate_matrix(&params.with_seed(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn columns_do_not_depend_on_t() {
        let small = DesignParams::with_weight(10, 2, 20, 6, 1).unwrap().with_seed(7);
        let large = DesignParams::with_weight(100, 2, 20, 6, 1).unwrap().with_seed(7);
        let a = generate_matrix(&small).unwrap();
        let b = generate_matrix(&large).unwrap();
        assert_eq!(a.columns(), &b.columns()[..10]);
    }

    #[test]
    fn constant_column_weight() {
        let params = DesignParams::with_weight(1000, 2, 20, 6, 1).unwrap().with_seed(1);
        let m = generate_matrix(&params).unwrap();
        assert!(m.columns().iter().all(|c| c.count_ones(..) == 6));
    }

    #[test]
    fn outcome_on_identity() {
        let m = identity(8);
        let y = outcome(&m, &[1, 4]).unwrap();
        assert_eq!(y.bits().ones().collect::<Vec<_>>(), vec![1, 4]);
        assert!(matches!(
            outcome(&m, &[8]),
            Err(Error::IndexOutOfRange { index: 8, t: 8 })
        ));
    }

    #[test]
    fn outcome_of_listed_columns() {
        let params = DesignParams::with_weight(3, 2, 4, 2, 1).unwrap();
        let m = PoolMatrix::from_column_strings(params, &["1100", "0110", "0011"]).unwrap();
        // 1-based {1, 3}
        assert_eq!(outcome(&m, &[0, 2]).unwrap().to_string(), "1111");
        // repeated and reordered indices
        assert_eq!(outcome(&m, &[2, 0, 2]).unwrap(), outcome(&m, &[0, 2]).unwrap());
    }
}
