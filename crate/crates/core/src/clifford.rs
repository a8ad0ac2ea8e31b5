//! Clifford-matchgate commutant: even replica patterns and pattern operators.
//!
//! A replicated string determines, for every mode `mu`, the set `I(mu)` of
//! replicas it occupies. The string survives the sign-flip average iff every
//! `I(mu)` is even, and signed permutations preserve the occupancy `x_I`.
//! The pattern operator `Omega(x)` sums, over all assignments `mu -> I(mu)`
//! with counts `x`, the tensor product whose replica-`j` factor multiplies the
//! Majoranas of the patterns containing `j` in canonical pattern order,
//! ascending modes inside a pattern. Every coefficient then has unit modulus.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::combinat::{binomial, multinomial, weak_compositions};
use crate::error::{MgcError, Result};
use crate::majorana::{
    bits, canon_exp, i_pow, pack, KeyAlgebra, OperatorExpansion, SignedPermutation, C64, ZERO,
};

/// Largest pattern-space dimension built by default.
pub const MAX_PATTERN_DIM: u128 = 20_000;

/// Even subsets of `{1..k}` as replica bitmasks (bit `j-1` is replica `j`), ascending.
pub fn even_subsets(k: usize) -> Vec<u64> {
    (0..1u64 << k).filter(|m| m.count_ones() % 2 == 0).collect()
}

/// `binom(2n + 2^{k-1} - 1, 2^{k-1} - 1)`.
pub fn cm_dim(n: usize, k: usize) -> u128 {
    let p = 1u64 << (k - 1);
    binomial(2 * n as u64 + p - 1, p - 1)
}

/// Occupation numbers `x_I` over the even subsets in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternOccupancy {
    pub k: usize,
    pub x: Vec<u32>,
}

impl PatternOccupancy {
    pub fn new(k: usize, x: Vec<u32>) -> Result<Self> {
        if x.len() != 1 << (k - 1) {
            return Err(MgcError::InvalidOccupancy(format!(
                "{} entries, expected 2^(k-1) = {}",
                x.len(),
                1 << (k - 1)
            )));
        }
        Ok(Self { k, x })
    }

    /// Builds an occupancy from `(replica subset, count)` pairs with 1-based replicas.
    pub fn from_subsets(k: usize, entries: &[(Vec<usize>, u32)]) -> Result<Self> {
        let subsets = even_subsets(k);
        let mut x = vec![0u32; subsets.len()];
        for (set, count) in entries {
            let mut m = 0u64;
            for &j in set {
                if j == 0 || j > k {
                    return Err(MgcError::InvalidOccupancy(format!(
                        "replica {j} out of range"
                    )));
                }
                m |= 1 << (j - 1);
            }
            let pos = subsets.iter().position(|&s| s == m).ok_or_else(|| {
                MgcError::InvalidOccupancy(format!("subset {set:?} has odd size"))
            })?;
            x[pos] += count;
        }
        Ok(Self { k, x })
    }

    pub fn total(&self) -> u32 {
        self.x.iter().sum()
    }

    pub fn multinomial(&self) -> u128 {
        multinomial(&self.x.iter().map(|&v| v as u64).collect::<Vec<_>>())
    }

    /// JSON object keyed by the 1-based replica subsets, e.g. `{"[]": 2, "[1,2]": 0}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (s, &v) in even_subsets(self.k).iter().zip(&self.x) {
            let members: Vec<String> = bits(*s).map(|b| (b + 1).to_string()).collect();
            map.insert(format!("[{}]", members.join(",")), v.into());
        }
        serde_json::json!({ "x": map })
    }
}

/// All occupancies with `sum x_I = 2n`; with `even_only`, only those with every `x_I` even.
pub fn enumerate_occupancies(n: usize, k: usize, even_only: bool) -> Vec<PatternOccupancy> {
    weak_compositions(2 * n as u32, 1 << (k - 1))
        .into_iter()
        .filter(|x| !even_only || x.iter().all(|v| v % 2 == 0))
        .map(|x| PatternOccupancy { k, x })
        .collect()
}

/// Row-compressed sparse complex matrix.
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    pub dim: usize,
    pub rows: Vec<Vec<(usize, C64)>>,
}

impl SparseMatrix {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, a)| a * v[c]).sum())
            .collect()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// The Clifford-matchgate commutant in pattern coordinates.
///
/// An element is stored as coordinates `y_x` with `W = sum_x y_x Omega(x)`.
#[derive(Clone, Debug)]
pub struct PatternSpace {
    n: usize,
    k: usize,
    subsets: Vec<u64>,
    /// Position of a replica subset in `subsets`, `usize::MAX` when odd.
    slot: Vec<usize>,
    occs: Vec<Vec<u32>>,
    index: FxHashMap<Vec<u32>, usize>,
    mult: Vec<u128>,
    rep_keys: Vec<u64>,
    rep_omega: Vec<C64>,
}

impl PatternSpace {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        Self::with_limit(n, k, MAX_PATTERN_DIM)
    }

    pub fn with_limit(n: usize, k: usize, limit: u128) -> Result<Self> {
        crate::majorana::check_shape(n, k)?;
        let d = cm_dim(n, k);
        if d > limit {
            return Err(MgcError::Capacity {
                what: format!("pattern space (n={n}, k={k})"),
                requested: d,
                limit,
            });
        }
        let subsets = even_subsets(k);
        let mut slot = vec![usize::MAX; 1 << k];
        for (i, &s) in subsets.iter().enumerate() {
            slot[s as usize] = i;
        }
        let occs: Vec<Vec<u32>> = enumerate_occupancies(n, k, false)
            .into_iter()
            .map(|o| o.x)
            .collect();
        let index = occs
            .iter()
            .enumerate()
            .map(|(i, x)| (x.clone(), i))
            .collect();
        let mult = occs
            .iter()
            .map(|x| multinomial(&x.iter().map(|&v| v as u64).collect::<Vec<_>>()))
            .collect();
        let mut space = Self {
            n,
            k,
            subsets,
            slot,
            occs,
            index,
            mult,
            rep_keys: Vec::new(),
            rep_omega: Vec::new(),
        };
        let reps: Vec<u64> = (0..space.occs.len())
            .map(|i| space.smallest_key(i))
            .collect();
        space.rep_omega = reps
            .iter()
            .map(|&key| space.omega(key).expect("representative is even").1)
            .collect();
        space.rep_keys = reps;
        Ok(space)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.occs.len()
    }

    pub fn occupancy(&self, i: usize) -> PatternOccupancy {
        PatternOccupancy {
            k: self.k,
            x: self.occs[i].clone(),
        }
    }

    pub fn index_of(&self, o: &PatternOccupancy) -> Option<usize> {
        self.index.get(&o.x).copied()
    }

    /// `multinomial(x)`, i.e. `||Omega(x)||^2 / 2^{kn}`.
    pub fn multiplicity(&self, i: usize) -> u128 {
        self.mult[i]
    }

    /// Index of the all-spectator pattern, whose operator is the identity.
    pub fn identity_index(&self) -> usize {
        let mut x = vec![0u32; self.subsets.len()];
        x[0] = 2 * self.n as u32;
        self.index[&x]
    }

    /// Lexicographically smallest string of pattern `i` (packed key).
    pub fn representative(&self, i: usize) -> u64 {
        self.rep_keys[i]
    }

    /// Pattern index and `Omega` coefficient of a string, `None` for odd patterns.
    pub fn omega(&self, key: u64) -> Option<(usize, C64)> {
        let (n, k) = (self.n, self.k);
        let alg = KeyAlgebra::new(n, k);
        let masks: Vec<u64> = (0..k).map(|j| alg.replica(key, j)).collect();
        let mut ord = [0usize; 64];
        let mut x = vec![0u32; self.subsets.len()];
        for mu in 0..2 * n {
            let mut set = 0usize;
            for (j, m) in masks.iter().enumerate() {
                set |= (((m >> mu) & 1) as usize) << j;
            }
            let s = self.slot[set];
            if s == usize::MAX {
                return None;
            }
            ord[mu] = s;
            x[s] += 1;
        }
        let mut e = 0u32;
        for m in &masks {
            let modes: Vec<usize> = bits(*m).collect();
            let mut inv = 0u32;
            for a in 0..modes.len() {
                for b in a + 1..modes.len() {
                    if ord[modes[a]] > ord[modes[b]] {
                        inv += 1;
                    }
                }
            }
            e += 2 * (inv & 1) + 4 - canon_exp(m.count_ones());
        }
        Some((self.index[&x], i_pow(e)))
    }

    fn smallest_key(&self, i: usize) -> u64 {
        let x = &self.occs[i];
        let k = self.k;
        // descending by the membership tuple ([1 in I], [2 in I], ...)
        let mut order: Vec<usize> = (0..self.subsets.len()).collect();
        let tuple = |s: u64| -> Vec<u64> { (0..k).map(|j| (s >> j) & 1).collect() };
        order.sort_by(|&a, &b| tuple(self.subsets[b]).cmp(&tuple(self.subsets[a])));
        let mut masks = vec![0u64; k];
        let mut mu = 0;
        for &p in &order {
            for _ in 0..x[p] {
                for (j, m) in masks.iter_mut().enumerate() {
                    if (self.subsets[p] >> j) & 1 == 1 {
                        *m |= 1 << mu;
                    }
                }
                mu += 1;
            }
        }
        pack(self.n, &masks)
    }

    /// All `(key, coefficient)` terms of `Omega(x_i)`.
    pub fn pattern_terms(&self, i: usize) -> Vec<(u64, C64)> {
        let x = &self.occs[i];
        let k = self.k;
        let mut out = Vec::with_capacity(self.mult[i] as usize);
        let mut remaining = x.clone();
        let mut masks = vec![0u64; k];
        self.assign(0, &mut remaining, &mut masks, &mut out);
        debug_assert_eq!(out.len() as u128, self.mult[i]);
        out
    }

    fn assign(
        &self,
        mu: usize,
        remaining: &mut Vec<u32>,
        masks: &mut Vec<u64>,
        out: &mut Vec<(u64, C64)>,
    ) {
        if mu == 2 * self.n {
            let key = pack(self.n, masks);
            let (_, w) = self.omega(key).expect("assignment is even");
            out.push((key, w));
            return;
        }
        for p in 0..self.subsets.len() {
            if remaining[p] == 0 {
                continue;
            }
            remaining[p] -= 1;
            let s = self.subsets[p];
            for (j, m) in masks.iter_mut().enumerate() {
                if (s >> j) & 1 == 1 {
                    *m |= 1 << mu;
                }
            }
            self.assign(mu + 1, remaining, masks, out);
            for (j, m) in masks.iter_mut().enumerate() {
                if (s >> j) & 1 == 1 {
                    *m &= !(1 << mu);
                }
            }
            remaining[p] += 1;
        }
    }

    /// Number of terms the expansion of `coords` would produce.
    pub fn expansion_size(&self, coords: &[C64]) -> u128 {
        coords
            .iter()
            .zip(&self.mult)
            .filter(|(c, _)| c.norm() > 0.0)
            .map(|(_, &m)| m)
            .sum()
    }

    /// `sum_x y_x Omega(x)` as a string expansion.
    pub fn expand(&self, coords: &[C64]) -> Result<OperatorExpansion> {
        let mut terms = Vec::new();
        for (i, &y) in coords.iter().enumerate() {
            if y.norm() < crate::majorana::PRUNE_TOL {
                continue;
            }
            terms.extend(
                self.pattern_terms(i)
                    .into_iter()
                    .map(|(key, w)| (key, y * w)),
            );
        }
        OperatorExpansion::from_keys(self.n, self.k, terms)
    }

    /// Coordinates of the orthogonal projection of `w` onto the pattern span.
    pub fn project(&self, w: &OperatorExpansion) -> Result<Vec<C64>> {
        if w.n() != self.n || w.k() != self.k {
            return Err(MgcError::Dimension(format!(
                "operator (n,k)=({},{}) vs pattern space ({},{})",
                w.n(),
                w.k(),
                self.n,
                self.k
            )));
        }
        let mut y = vec![ZERO; self.dim()];
        for &(key, c) in w.terms() {
            if let Some((i, om)) = self.omega(key) {
                y[i] += om.conj() * c;
            }
        }
        for (v, &m) in y.iter_mut().zip(&self.mult) {
            *v /= m as f64;
        }
        Ok(y)
    }

    /// `Tr(A^dagger B) / 2^{kn}` for coordinate vectors.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter()
            .zip(b)
            .zip(&self.mult)
            .map(|((x, y), &m)| x.conj() * y * m as f64)
            .sum()
    }

    pub fn hs_factor(&self) -> f64 {
        2f64.powi((self.n * self.k) as i32)
    }

    /// Matrix of left multiplication by `a`, which must lie in the commutant.
    pub fn left_mul_matrix(&self, a: &OperatorExpansion) -> Result<SparseMatrix> {
        if a.n() != self.n || a.k() != self.k {
            return Err(MgcError::Dimension(
                "operator does not match pattern space".into(),
            ));
        }
        let alg = KeyAlgebra::new(self.n, self.k);
        let mut rows = Vec::with_capacity(self.dim());
        for z in 0..self.dim() {
            let s = self.rep_keys[z];
            let inv = self.rep_omega[z].conj();
            let mut row: BTreeMap<usize, C64> = BTreeMap::new();
            for &(t, c) in a.terms() {
                let u = t ^ s;
                if let Some((x, om)) = self.omega(u) {
                    *row.entry(x).or_insert(ZERO) += c * i_pow(alg.phase(t, u)) * om * inv;
                }
            }
            rows.push(row.into_iter().filter(|(_, v)| v.norm() > 1e-14).collect());
        }
        Ok(SparseMatrix {
            dim: self.dim(),
            rows,
        })
    }

    /// Coefficient of the lexicographically first string whose magnitude exceeds
    /// `rel * max|y|`, with the pattern index it comes from.
    pub fn leading_coefficient(&self, coords: &[C64], rel: f64) -> Option<(usize, C64)> {
        let top = coords.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if top == 0.0 {
            return None;
        }
        coords
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > rel * top)
            .min_by_key(|(i, _)| self.rep_keys[*i])
            .map(|(i, &c)| (i, c * self.rep_omega[i]))
    }
}

/// `Omega(o)`, unit Hilbert-Schmidt norm when `normalized`.
pub fn pattern_operator(
    o: &PatternOccupancy,
    n: usize,
    normalized: bool,
) -> Result<OperatorExpansion> {
    if o.total() != 2 * n as u32 {
        return Err(MgcError::InvalidOccupancy(format!(
            "occupancies sum to {}, expected 2n = {}",
            o.total(),
            2 * n
        )));
    }
    let space = PatternSpace::with_limit(n, o.k, u128::MAX)?;
    let i = space
        .index_of(o)
        .ok_or_else(|| MgcError::InvalidOccupancy(format!("{:?}", o.x)))?;
    let scale = if normalized {
        1.0 / (space.hs_factor() * space.multiplicity(i) as f64).sqrt()
    } else {
        1.0
    };
    OperatorExpansion::from_keys(
        n,
        o.k,
        space
            .pattern_terms(i)
            .into_iter()
            .map(|(key, w)| (key, w * scale)),
    )
}

/// Orthogonal projection onto the Clifford-matchgate commutant.
pub fn cm_twirl(w: &OperatorExpansion) -> Result<OperatorExpansion> {
    let space = PatternSpace::with_limit(w.n(), w.k(), u128::MAX)?;
    let y = space.project(w)?;
    space.expand(&y)
}

/// Exact average over all `2^{2n} (2n)!` signed permutations.
pub fn cm_twirl_exhaustive(w: &OperatorExpansion) -> Result<OperatorExpansion> {
    let n = w.n();
    if n > 2 {
        return Err(MgcError::Capacity {
            what: "exhaustive signed-permutation average (n)".into(),
            requested: n as u128,
            limit: 2,
        });
    }
    let group = SignedPermutation::enumerate(2 * n);
    let mut acc: FxHashMap<u64, C64> = FxHashMap::default();
    for g in &group {
        for &(key, c) in w.apply_signed_permutation(g)?.terms() {
            *acc.entry(key).or_insert(ZERO) += c;
        }
    }
    let scale = 1.0 / group.len() as f64;
    OperatorExpansion::from_keys(n, w.k(), acc.into_iter().map(|(key, c)| (key, c * scale)))
}

/// Sign of `Omega(x)` on the replicated vacuum strings, `(-1)^{sum_I (|I|/2)(x_I/2)}`.
fn vacuum_sign(subsets: &[u64], x: &[u32]) -> f64 {
    let e: u32 = subsets
        .iter()
        .zip(x)
        .map(|(s, &v)| (s.count_ones() / 2) * (v / 2))
        .sum();
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Pattern coordinates of the Clifford-matchgate twirl of `|0><0|^{(x)k}`.
pub fn cm_vacuum_coords(space: &PatternSpace) -> Vec<C64> {
    let (n, k) = (space.n, space.k);
    let scale = 2f64.powi(-((n * k) as i32));
    (0..space.dim())
        .map(|i| {
            let x = &space.occs[i];
            if x.iter().any(|v| v % 2 == 1) {
                return ZERO;
            }
            let half: Vec<u64> = x.iter().map(|&v| v as u64 / 2).collect();
            let ratio = multinomial(&half) as f64 / space.mult[i] as f64;
            C64::new(scale * ratio * vacuum_sign(&space.subsets, x), 0.0)
        })
        .collect()
}

/// `sum_{even x} 2^{-kn} binom(n; x/2) / binom(2n; x) Omega(x)` with the vacuum sign of each pattern.
pub fn cm_vacuum_moment(n: usize, k: usize) -> Result<OperatorExpansion> {
    let space = PatternSpace::new(n, k)?;
    space.expand(&cm_vacuum_coords(&space))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::to_dense;
    use crate::majorana::{OperatorExpansion, ONE};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_op(n: usize, k: usize, terms: usize, seed: u64) -> OperatorExpansion {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let top = 1u64 << (2 * n * k);
        OperatorExpansion::from_keys(
            n,
            k,
            (0..terms).map(|_| {
                (
                    rng.random_range(0..top),
                    C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                )
            }),
        )
        .unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate_occupancies(1, 2, false).len(), 3);
        assert_eq!(enumerate_occupancies(1, 4, false).len(), 36);
        assert_eq!(enumerate_occupancies(1, 2, true).len(), 2);
        assert_eq!(cm_dim(2, 4), 330);
        for n in 1..=3 {
            assert_eq!(cm_dim(n, 2), 2 * n as u128 + 1);
            assert_eq!(cm_dim(n, 3), binomial(2 * n as u64 + 3, 3));
        }
    }

    #[test]
    fn k2_pattern_operator() {
        let o = PatternOccupancy::from_subsets(2, &[(vec![], 1), (vec![1, 2], 1)]).unwrap();
        let om = pattern_operator(&o, 1, false).unwrap();
        let want = &OperatorExpansion::single(1, &[1, 1], ONE).unwrap()
            + &OperatorExpansion::single(1, &[2, 2], ONE).unwrap();
        assert_eq!(om, want);
        assert_eq!(om.hs_inner(&om).unwrap(), C64::new(8.0, 0.0));
        let id = PatternOccupancy::from_subsets(3, &[(vec![], 2)]).unwrap();
        assert_eq!(
            pattern_operator(&id, 1, false).unwrap(),
            OperatorExpansion::identity(1, 3).unwrap()
        );
    }

    #[test]
    fn representatives_are_lexicographic_minima() {
        for (n, k) in [(1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (2, 4)] {
            let sp = PatternSpace::new(n, k).unwrap();
            for i in 0..sp.dim() {
                let min = sp.pattern_terms(i).iter().map(|t| t.0).min().unwrap();
                assert_eq!(sp.representative(i), min, "n={n} k={k} i={i}");
            }
        }
    }

    #[test]
    fn norms_and_orthogonality_are_exact() {
        for (n, k) in [(1, 3), (2, 3), (1, 4), (2, 4)] {
            let sp = PatternSpace::new(n, k).unwrap();
            let ops: Vec<_> = (0..sp.dim())
                .map(|i| OperatorExpansion::from_keys(n, k, sp.pattern_terms(i)).unwrap())
                .collect();
            for i in (0..sp.dim()).step_by(7) {
                for j in (0..sp.dim()).step_by(5) {
                    let ip = ops[i].hs_inner(&ops[j]).unwrap();
                    let want = if i == j {
                        sp.hs_factor() * sp.multiplicity(i) as f64
                    } else {
                        0.0
                    };
                    assert_eq!(ip, C64::new(want, 0.0));
                }
            }
        }
    }

    #[test]
    fn invariance_under_signed_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, k) in [(1, 4), (2, 3)] {
            let sp = PatternSpace::new(n, k).unwrap();
            let group = SignedPermutation::enumerate(2 * n);
            for i in 0..sp.dim() {
                let om = OperatorExpansion::from_keys(n, k, sp.pattern_terms(i)).unwrap();
                for _ in 0..5 {
                    let g = &group[rng.random_range(0..group.len())];
                    assert_eq!(om.apply_signed_permutation(g).unwrap(), om);
                }
            }
        }
    }

    #[test]
    fn twirl_matches_exhaustive() {
        for (n, k) in [(1, 2), (1, 3), (2, 2), (2, 3)] {
            for seed in 0..3 {
                let w = random_op(n, k, 40, seed);
                let a = cm_twirl(&w).unwrap();
                let b = cm_twirl_exhaustive(&w).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-12, "n={n} k={k}");
            }
        }
        let g1 = OperatorExpansion::single(1, &[1, 0], ONE).unwrap();
        assert!(cm_twirl(&g1).unwrap().is_empty());
    }

    #[test]
    fn left_multiplication_matches_symbolic_product() {
        let (n, k) = (1, 3);
        let sp = PatternSpace::new(n, k).unwrap();
        let b = crate::bridge::Bridges::new(n, k).unwrap();
        let l = sp.left_mul_matrix(b.get(0, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y: Vec<C64> = (0..sp.dim())
            .map(|_| C64::new(rng.random(), rng.random()))
            .collect();
        let prod = b.get(0, 2) * &sp.expand(&y).unwrap();
        let via = sp.expand(&l.apply(&y)).unwrap();
        assert!(prod.max_abs_diff(&via) < 1e-12);
    }

    #[test]
    fn vacuum_moment_matches_twirl() {
        for (n, k) in [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (1, 4), (2, 4)] {
            let rho = crate::applications::vacuum_state(n, k).unwrap();
            let tw = cm_twirl(&rho).unwrap();
            let mom = cm_vacuum_moment(n, k).unwrap();
            assert!(tw.max_abs_diff(&mom) < 1e-12, "n={n} k={k}");
            assert!((mom.trace() - ONE).norm() < 1e-12);
        }
        let d = to_dense(&cm_vacuum_moment(1, 1).unwrap()).unwrap();
        assert!(
            d.max_abs_diff(&crate::dense::DenseMatrix::identity(2).scale(C64::new(0.5, 0.0)))
                < 1e-14
        );
    }
}
