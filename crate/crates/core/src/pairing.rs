//! Pairing operators: antisymmetrized inter-replica Kronecker contractions.
//!
//! A configuration `x_ij` chooses subsets `A_ij` of the `2n` modes with
//! `|A_ij| = x_ij`, pairwise disjoint inside every replica. Replica `l` carries
//! the concatenation of `A_lj` in increasing partner order; the coefficient of
//! the canonical string is the sign of sorting that concatenation.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::combinat::binomial;
use crate::error::{MgcError, Result};
use crate::majorana::{bits, check_shape, OperatorExpansion, C64};

/// Relative eigenvalue cutoff for span ranks.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairingConfig {
    pub k: usize,
    /// Row-major symmetric `k x k` matrix, zero diagonal.
    pub x: Vec<Vec<u32>>,
}

impl PairingConfig {
    pub fn new(x: Vec<Vec<u32>>) -> Result<Self> {
        let k = x.len();
        for (i, row) in x.iter().enumerate() {
            if row.len() != k {
                return Err(MgcError::Dimension(format!(
                    "row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            if row[i] != 0 {
                return Err(MgcError::InvalidOccupancy(format!(
                    "nonzero diagonal at {i}"
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if x[j][i] != v {
                    return Err(MgcError::InvalidOccupancy(format!(
                        "asymmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { k, x })
    }

    /// Builds a configuration from 1-based `(i, j, x_ij)` triples.
    pub fn from_pairs(k: usize, pairs: &[(usize, usize, u32)]) -> Result<Self> {
        let mut x = vec![vec![0; k]; k];
        for &(i, j, v) in pairs {
            if i == 0 || j == 0 || i > k || j > k || i == j {
                return Err(MgcError::InvalidOccupancy(format!("bad pair ({i},{j})")));
            }
            x[i - 1][j - 1] = v;
            x[j - 1][i - 1] = v;
        }
        Ok(Self { k, x })
    }

    pub fn row_sums(&self) -> Vec<u32> {
        self.x.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "k": self.k, "x": self.x, "r": self.row_sums() })
    }
}

/// All configurations with row sums `r`, lexicographic in `(x_12, x_13, ..., x_{k-1,k})`.
pub fn admissible_configs(r: &[u32], k: usize) -> Vec<PairingConfig> {
    if r.len() != k {
        return Vec::new();
    }
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    let mut left = r.to_vec();
    let mut x = vec![vec![0u32; k]; k];
    fill(&pairs, 0, &mut left, &mut x, &mut out);
    out
}

fn fill(
    pairs: &[(usize, usize)],
    p: usize,
    left: &mut Vec<u32>,
    x: &mut Vec<Vec<u32>>,
    out: &mut Vec<PairingConfig>,
) {
    if p == pairs.len() {
        if left.iter().all(|&v| v == 0) {
            out.push(PairingConfig {
                k: x.len(),
                x: x.clone(),
            });
        }
        return;
    }
    let (i, j) = pairs[p];
    // once every pair touching row i has been fixed, its residue must vanish
    let last_for_i = pairs[p + 1..].iter().all(|&(a, _)| a != i);
    let lo = if last_for_i { left[i] } else { 0 };
    let hi = left[i].min(left[j]);
    if lo > hi {
        return;
    }
    for v in lo..=hi {
        left[i] -= v;
        left[j] -= v;
        x[i][j] = v;
        x[j][i] = v;
        fill(pairs, p + 1, left, x, out);
        left[i] += v;
        left[j] += v;
    }
    x[i][j] = 0;
    x[j][i] = 0;
}

/// Sign of the permutation sorting `seq` (distinct entries).
fn sort_sign(seq: &[usize]) -> f64 {
    let mut inv = 0usize;
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            if seq[a] > seq[b] {
                inv += 1;
            }
        }
    }
    if inv.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Subsets of `free` (a mode mask) with exactly `size` elements.
fn subsets_of(free: u64, size: u32) -> Vec<u64> {
    let modes: Vec<usize> = bits(free).collect();
    let m = modes.len() as u32;
    if size > m {
        return Vec::new();
    }
    if size == 0 {
        return vec![0];
    }
    let spread = |v: u64| bits(v).fold(0u64, |acc, i| acc | 1 << modes[i]);
    let mut out = Vec::new();
    let mut v: u64 = (1 << size) - 1;
    while v < 1 << m {
        out.push(spread(v));
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

/// Unnormalised pairing operator: unit-modulus coefficients on canonical strings.
pub fn pairing_operator_raw(c: &PairingConfig, n: usize) -> Result<OperatorExpansion> {
    let k = c.k;
    check_shape(n, k)?;
    let full = crate::majorana::mode_mask(n);
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .filter(|&(i, j)| c.x[i][j] > 0)
        .collect();
    let mut sets = vec![vec![0u64; k]; k];
    let mut used = vec![0u64; k];
    let mut terms = Vec::new();
    choose(c, n, full, &pairs, 0, &mut sets, &mut used, &mut terms);
    if terms.is_empty() {
        return Err(MgcError::InfeasibleConfig(format!(
            "adjacency {:?} needs more than {} disjoint modes per replica",
            c.x,
            2 * n
        )));
    }
    OperatorExpansion::from_keys(n, k, terms)
}

#[allow(clippy::too_many_arguments)]
fn choose(
    c: &PairingConfig,
    n: usize,
    full: u64,
    pairs: &[(usize, usize)],
    p: usize,
    sets: &mut Vec<Vec<u64>>,
    used: &mut Vec<u64>,
    terms: &mut Vec<(u64, C64)>,
) {
    if p == pairs.len() {
        let k = c.k;
        let mut sign = 1.0;
        for l in 0..k {
            let seq: Vec<usize> = (0..k).flat_map(|j| bits(sets[l][j])).collect();
            sign *= sort_sign(&seq);
        }
        let key = crate::majorana::pack(n, used);
        terms.push((key, C64::new(sign, 0.0)));
        return;
    }
    let (i, j) = pairs[p];
    let free = full & !used[i] & !used[j];
    for s in subsets_of(free, c.x[i][j]) {
        sets[i][j] = s;
        sets[j][i] = s;
        used[i] |= s;
        used[j] |= s;
        choose(c, n, full, pairs, p + 1, sets, used, terms);
        used[i] &= !s;
        used[j] &= !s;
    }
    sets[i][j] = 0;
    sets[j][i] = 0;
}

/// Pairing operator with `1/sqrt(binom(2n, r))` at k=2, `1/sqrt(#terms)` at k=3,
/// and unit Hilbert-Schmidt norm otherwise.
pub fn pairing_operator(c: &PairingConfig, n: usize) -> Result<OperatorExpansion> {
    let raw = pairing_operator_raw(c, n)?;
    let scale = match c.k {
        2 => 1.0 / (binomial(2 * n as u64, c.x[0][1] as u64) as f64).sqrt(),
        3 => 1.0 / (raw.len() as f64).sqrt(),
        _ => 1.0 / raw.hs_norm(),
    };
    Ok(raw.scale_real(scale))
}

/// Hilbert-Schmidt Gram matrix (real for Hermitian-coefficient inputs).
pub fn gram_matrix(ops: &[OperatorExpansion]) -> Result<DMatrix<f64>> {
    if ops.is_empty() {
        return Err(MgcError::Empty("gram matrix of no operators".into()));
    }
    let m = ops.len();
    let mut g = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = ops[i].hs_inner(&ops[j])?.re;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Number of Gram eigenvalues above `tol * max eigenvalue`.
pub fn span_rank(ops: &[OperatorExpansion], tol: f64) -> Result<usize> {
    let g = gram_matrix(ops)?;
    let eig = SymmetricEigen::new(g).eigenvalues;
    let top = eig.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return Ok(0);
    }
    Ok(eig.iter().filter(|&&e| e > tol * top).count())
}

/// Span rank of all pairing operators, summed over the orthogonal weight sectors.
pub fn total_span_rank(n: usize, k: usize) -> Result<usize> {
    check_shape(n, k)?;
    let top = 2 * n as u32 + 1;
    let mut total = 0;
    let mut r = vec![0u32; k];
    loop {
        let ops: Vec<OperatorExpansion> = admissible_configs(&r, k)
            .iter()
            .filter_map(|c| pairing_operator_raw(c, n).ok())
            .collect();
        if !ops.is_empty() {
            total += span_rank(&ops, RANK_TOL)?;
        }
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(total);
            }
            r[pos] += 1;
            if r[pos] < top {
                break;
            }
            r[pos] = 0;
            pos += 1;
        }
    }
}

/// Every feasible pairing operator on `k` replicas of `n` qubits.
pub fn all_pairing_operators(
    n: usize,
    k: usize,
) -> Result<Vec<(PairingConfig, OperatorExpansion)>> {
    check_shape(n, k)?;
    let top = 2 * n as u32 + 1;
    let mut out = Vec::new();
    let mut r = vec![0u32; k];
    loop {
        for c in admissible_configs(&r, k) {
            if let Ok(op) = pairing_operator(&c, n) {
                out.push((c, op));
            }
        }
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(out);
            }
            r[pos] += 1;
            if r[pos] < top {
                break;
            }
            r[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{commutator_residual, random_orthogonal};
    use crate::majorana::ONE;
    use crate::weights::commutant_dim;

    #[test]
    fn config_enumeration() {
        let c = admissible_configs(&[3, 3], 2);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].x[0][1], 3);
        let c = admissible_configs(&[1, 1, 2], 3);
        assert_eq!(
            c,
            vec![PairingConfig::from_pairs(3, &[(1, 3, 1), (2, 3, 1)]).unwrap()]
        );
        let c = admissible_configs(&[1, 1, 1, 1], 4);
        let want = vec![
            PairingConfig::from_pairs(4, &[(1, 4, 1), (2, 3, 1)]).unwrap(),
            PairingConfig::from_pairs(4, &[(1, 3, 1), (2, 4, 1)]).unwrap(),
            PairingConfig::from_pairs(4, &[(1, 2, 1), (3, 4, 1)]).unwrap(),
        ];
        assert_eq!(c, want);
        assert_eq!(admissible_configs(&[2, 2, 2, 2], 4).len(), 6);
        assert!(admissible_configs(&[1, 0, 0], 3).is_empty());
    }

    #[test]
    fn k2_closed_form() {
        let n = 2;
        for r in 0..=4u32 {
            let c = PairingConfig::from_pairs(2, &[(1, 2, r)]).unwrap();
            let op = pairing_operator(&c, n).unwrap();
            let norm = 1.0 / (binomial(4, r as u64) as f64).sqrt();
            let mut want = Vec::new();
            for s in 0u64..16 {
                if s.count_ones() == r {
                    want.push((crate::majorana::pack(n, &[s, s]), C64::new(norm, 0.0)));
                }
            }
            assert!(op.max_abs_diff(&OperatorExpansion::from_keys(n, 2, want).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn infeasible_config() {
        let c = PairingConfig::from_pairs(3, &[(1, 2, 1), (1, 3, 1), (2, 3, 1)]).unwrap();
        assert!(matches!(
            pairing_operator(&c, 1),
            Err(MgcError::InfeasibleConfig(_))
        ));
        assert!(pairing_operator(&c, 2).is_ok());
    }

    #[test]
    fn invariance_under_rotations() {
        for (n, k) in [(1, 2), (2, 2), (1, 3), (2, 3), (1, 4), (2, 4)] {
            for (i, (_, op)) in all_pairing_operators(n, k).unwrap().iter().enumerate() {
                if i % 3 != 0 {
                    continue;
                }
                let q = random_orthogonal(n, 17 + i as u64).unwrap().q;
                assert!(commutator_residual(op, &q).unwrap() < 1e-8, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn sorting_signs_are_required_at_k3() {
        let n = 2;
        let c = PairingConfig::from_pairs(3, &[(1, 2, 1), (1, 3, 1), (2, 3, 1)]).unwrap();
        let op = pairing_operator_raw(&c, n).unwrap();
        let unsigned =
            OperatorExpansion::from_keys(n, 3, op.terms().iter().map(|&(key, _)| (key, ONE)))
                .unwrap();
        let q = random_orthogonal(n, 5).unwrap().q;
        assert!(commutator_residual(&op, &q).unwrap() < 1e-10);
        assert!(commutator_residual(&unsigned, &q).unwrap() > 1.0);
    }

    #[test]
    fn sector_of_row_sums() {
        let c =
            PairingConfig::from_pairs(4, &[(1, 2, 1), (1, 3, 1), (2, 4, 2), (3, 4, 1)]).unwrap();
        let op = pairing_operator(&c, 2).unwrap();
        let sectors = op.weight_sector();
        assert_eq!(
            sectors.keys().cloned().collect::<Vec<_>>(),
            vec![vec![2, 3, 2, 3]]
        );
    }

    #[test]
    fn k4_examples() {
        let ops: Vec<_> = admissible_configs(&[1, 1, 1, 1], 4)
            .iter()
            .map(|c| pairing_operator_raw(c, 1).unwrap())
            .collect();
        let g = gram_matrix(&ops).unwrap();
        // four strings per operator, two shared between any pair
        assert_eq!(
            g,
            DMatrix::from_row_slice(3, 3, &[64., 32., 32., 32., 64., 32., 32., 32., 64.])
        );
        let six: Vec<_> = admissible_configs(&[2, 2, 2, 2], 4)
            .iter()
            .map(|c| pairing_operator(c, 1).unwrap())
            .collect();
        assert_eq!(six.len(), 6);
        assert_eq!(span_rank(&six, RANK_TOL).unwrap(), 1);
        let g12 = OperatorExpansion::single(1, &[3, 3, 3, 3], ONE).unwrap();
        for op in &six {
            assert!(
                (op.hs_inner(&g12).unwrap().norm() / (op.hs_norm() * g12.hs_norm()) - 1.0).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn spanning_ranks() {
        for (n, k) in [(1, 2), (2, 2), (1, 3), (2, 3), (1, 4), (2, 4)] {
            assert_eq!(
                total_span_rank(n, k).unwrap() as u128,
                commutant_dim(n, k),
                "n={n} k={k}"
            );
        }
    }

    #[test]
    fn faithful_below_4n() {
        let n = 2;
        let mut r = vec![0u32; 4];
        for code in 0..5u32.pow(4) {
            let mut c = code;
            for v in r.iter_mut() {
                *v = c % 5;
                c /= 5;
            }
            if r.iter().sum::<u32>() > 4 * n as u32 {
                continue;
            }
            let ops: Vec<_> = admissible_configs(&r, 4)
                .iter()
                .filter_map(|c| pairing_operator_raw(c, n).ok())
                .collect();
            if !ops.is_empty() {
                assert_eq!(span_rank(&ops, RANK_TOL).unwrap(), ops.len(), "r={r:?}");
            }
        }
    }
}
