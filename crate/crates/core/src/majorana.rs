//! Sign-tracked algebra of Majorana strings on `k` replicas of `n` qubits.
//!
//! Modes are 1-based in the public interface; mode `mu` lives at bit `mu - 1`
//! of a replica mask. A replicated string is packed into one `u64` with
//! replica 1 in the most significant `2n` bits, so numeric key order equals
//! lexicographic order on the concatenated masks.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{MgcError, Result};

pub type C64 = Complex64;

/// Coefficients below this magnitude are dropped after arithmetic.
pub const PRUNE_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub(crate) fn i_pow(e: u32) -> C64 {
    match e & 3 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Exponent of `i` in the canonical prefactor `i^{r(r-1)/2}`, mod 4.
#[inline]
pub(crate) fn canon_exp(r: u32) -> u32 {
    if r < 2 {
        0
    } else {
        (r * (r - 1) / 2) & 3
    }
}

/// `gamma_a * gamma_b = i^e * gamma_{a xor b}` for canonical strings; returns `e mod 4`.
#[inline]
pub fn product_phase_exp(a: u64, b: u64) -> u32 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        swaps += ((a >> y) >> 1).count_ones();
        rest &= rest - 1;
    }
    let e = canon_exp(a.count_ones()) + canon_exp(b.count_ones()) + 4
        - canon_exp((a ^ b).count_ones())
        + 2 * (swaps & 1);
    #[cfg(feature = "mutate-string-sign")]
    let e = if a & b != 0 { e + 2 } else { e };
    e & 3
}

#[inline]
pub(crate) fn mode_mask(n: usize) -> u64 {
    if 2 * n >= 64 {
        u64::MAX
    } else {
        (1u64 << (2 * n)) - 1
    }
}

static PHASE_TABLES: [OnceLock<Vec<u8>>; 4] = [
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
];

fn phase_table(n: usize) -> Option<&'static [u8]> {
    if !(1..=4).contains(&n) {
        return None;
    }
    let t = PHASE_TABLES[n - 1].get_or_init(|| {
        let size = 1usize << (2 * n);
        let mut t = vec![0u8; size * size];
        for a in 0..size {
            for b in 0..size {
                t[(a << (2 * n)) | b] = product_phase_exp(a as u64, b as u64) as u8;
            }
        }
        t
    });
    Some(t.as_slice())
}

/// Replica-wise product phases for packed keys.
#[derive(Clone, Copy)]
pub(crate) struct KeyAlgebra {
    n: usize,
    k: usize,
    mask: u64,
    table: Option<&'static [u8]>,
}

impl KeyAlgebra {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            mask: mode_mask(n),
            table: phase_table(n),
        }
    }

    #[inline]
    pub(crate) fn replica(&self, key: u64, j: usize) -> u64 {
        let shift = 2 * self.n * (self.k - 1 - j);
        if shift >= 64 {
            0
        } else {
            (key >> shift) & self.mask
        }
    }

    /// Exponent of `i` in `gamma_a gamma_b = i^e gamma_{a xor b}`.
    #[inline]
    pub(crate) fn phase(&self, a: u64, b: u64) -> u32 {
        let mut e = 0u32;
        match self.table {
            Some(t) => {
                let w = 2 * self.n;
                for j in 0..self.k {
                    let (x, y) = (self.replica(a, j), self.replica(b, j));
                    e += t[((x << w) | y) as usize] as u32;
                }
            }
            None => {
                for j in 0..self.k {
                    e += product_phase_exp(self.replica(a, j), self.replica(b, j));
                }
            }
        }
        e & 3
    }
}

/// A canonical Majorana string `gamma_S = i^{|S|(|S|-1)/2} gamma_{mu_1} ... gamma_{mu_r}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MajoranaString {
    mask: u64,
}

impl MajoranaString {
    pub const EMPTY: MajoranaString = MajoranaString { mask: 0 };

    pub fn from_mask(mask: u64) -> Self {
        Self { mask }
    }

    /// Builds a string from 1-based mode indices; duplicates are rejected.
    pub fn from_modes(modes: &[usize], n: usize) -> Result<Self> {
        let mut mask = 0u64;
        for &mu in modes {
            if mu == 0 || mu > 2 * n {
                return Err(MgcError::IndexOutOfRange {
                    index: mu,
                    max: 2 * n,
                });
            }
            let bit = 1u64 << (mu - 1);
            if mask & bit != 0 {
                return Err(MgcError::InvalidPermutation(format!(
                    "mode {mu} repeated in string"
                )));
            }
            mask |= bit;
        }
        Ok(Self { mask })
    }

    pub fn mask(self) -> u64 {
        self.mask
    }

    pub fn weight(self) -> u32 {
        self.mask.count_ones()
    }

    /// 1-based modes in increasing order.
    pub fn modes(self) -> Vec<usize> {
        bits(self.mask).map(|b| b + 1).collect()
    }
}

pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(b)
        }
    })
}

/// `gamma_a * gamma_b = c * gamma_T` with `T = a xor b`.
pub fn string_product(a: MajoranaString, b: MajoranaString, _n: usize) -> (MajoranaString, C64) {
    (
        MajoranaString::from_mask(a.mask ^ b.mask),
        i_pow(product_phase_exp(a.mask, b.mask)),
    )
}

/// One Majorana string per replica.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReplicatedString {
    pub n: usize,
    pub masks: Vec<u64>,
}

impl ReplicatedString {
    pub fn new(n: usize, masks: Vec<u64>) -> Result<Self> {
        check_shape(n, masks.len())?;
        let m = mode_mask(n);
        if masks.iter().any(|&x| x & !m != 0) {
            return Err(MgcError::Dimension(format!("mask exceeds {} modes", 2 * n)));
        }
        Ok(Self { n, masks })
    }

    pub fn k(&self) -> usize {
        self.masks.len()
    }

    pub fn key(&self) -> u64 {
        pack(self.n, &self.masks)
    }

    pub fn from_key(key: u64, n: usize, k: usize) -> Self {
        Self {
            n,
            masks: unpack(key, n, k),
        }
    }

    pub fn weights(&self) -> Vec<u32> {
        self.masks.iter().map(|m| m.count_ones()).collect()
    }
}

pub(crate) fn pack(n: usize, masks: &[u64]) -> u64 {
    let w = 2 * n;
    masks
        .iter()
        .fold(0u64, |acc, &m| if w >= 64 { m } else { (acc << w) | m })
}

pub(crate) fn unpack(key: u64, n: usize, k: usize) -> Vec<u64> {
    let alg = KeyAlgebra::new(n, k);
    (0..k).map(|j| alg.replica(key, j)).collect()
}

pub(crate) fn check_shape(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 {
        return Err(MgcError::Dimension(format!(
            "n and k must be positive (n={n}, k={k})"
        )));
    }
    if 2 * n * k > 64 {
        return Err(MgcError::Capacity {
            what: "packed replicated string (2nk bits)".into(),
            requested: (2 * n * k) as u128,
            limit: 64,
        });
    }
    Ok(())
}

/// Sparse expansion `W = sum_S W_S gamma_S` over replicated strings.
///
/// Terms are kept sorted by packed key with no coefficient below [`PRUNE_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorExpansion {
    n: usize,
    k: usize,
    terms: Vec<(u64, C64)>,
}

impl OperatorExpansion {
    pub fn zero(n: usize, k: usize) -> Result<Self> {
        check_shape(n, k)?;
        Ok(Self {
            n,
            k,
            terms: Vec::new(),
        })
    }

    pub fn identity(n: usize, k: usize) -> Result<Self> {
        check_shape(n, k)?;
        Ok(Self {
            n,
            k,
            terms: vec![(0, ONE)],
        })
    }

    /// A single string `c * gamma_S` given per-replica masks.
    pub fn single(n: usize, masks: &[u64], c: C64) -> Result<Self> {
        let s = ReplicatedString::new(n, masks.to_vec())?;
        Self::from_keys(n, masks.len(), [(s.key(), c)])
    }

    /// Accumulates packed-key terms; duplicates add up.
    pub fn from_keys(
        n: usize,
        k: usize,
        terms: impl IntoIterator<Item = (u64, C64)>,
    ) -> Result<Self> {
        check_shape(n, k)?;
        let limit = if 2 * n * k >= 64 {
            u64::MAX
        } else {
            (1u64 << (2 * n * k)) - 1
        };
        let mut acc: FxHashMap<u64, C64> = FxHashMap::default();
        for (key, c) in terms {
            if key & !limit != 0 {
                return Err(MgcError::Dimension(format!(
                    "key {key:#x} exceeds 2nk bits"
                )));
            }
            *acc.entry(key).or_insert(ZERO) += c;
        }
        Ok(Self::from_map(n, k, acc))
    }

    pub fn from_strings(
        n: usize,
        k: usize,
        terms: impl IntoIterator<Item = (ReplicatedString, C64)>,
    ) -> Result<Self> {
        let mut keys = Vec::new();
        for (s, c) in terms {
            if s.n != n || s.k() != k {
                return Err(MgcError::Dimension(format!(
                    "string with (n,k)=({},{}) in expansion with ({n},{k})",
                    s.n,
                    s.k()
                )));
            }
            keys.push((s.key(), c));
        }
        Self::from_keys(n, k, keys)
    }

    pub(crate) fn from_map(n: usize, k: usize, acc: FxHashMap<u64, C64>) -> Self {
        let mut terms: Vec<(u64, C64)> = acc
            .into_iter()
            .filter(|(_, c)| c.norm() >= PRUNE_TOL)
            .collect();
        terms.sort_unstable_by_key(|t| t.0);
        Self { n, k, terms }
    }

    /// Trusted constructor for already sorted, deduplicated terms.
    pub(crate) fn from_sorted(n: usize, k: usize, mut terms: Vec<(u64, C64)>) -> Self {
        terms.retain(|(_, c)| c.norm() >= PRUNE_TOL);
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        Self { n, k, terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sorted `(packed key, coefficient)` pairs.
    pub fn terms(&self) -> &[(u64, C64)] {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (ReplicatedString, C64)> + '_ {
        self.terms
            .iter()
            .map(move |&(key, c)| (ReplicatedString::from_key(key, self.n, self.k), c))
    }

    pub fn coeff_key(&self, key: u64) -> C64 {
        match self.terms.binary_search_by_key(&key, |t| t.0) {
            Ok(i) => self.terms[i].1,
            Err(_) => ZERO,
        }
    }

    pub fn coeff(&self, masks: &[u64]) -> C64 {
        if masks.len() != self.k {
            return ZERO;
        }
        self.coeff_key(pack(self.n, masks))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.k != other.k {
            return Err(MgcError::Dimension(format!(
                "(n,k)=({},{}) vs ({},{})",
                self.n, self.k, other.n, other.k
            )));
        }
        Ok(())
    }

    /// `a * self + b * other`, merged in key order.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Result<Self> {
        self.check_same(other)?;
        let (x, y) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(x.len() + y.len());
        let (mut i, mut j) = (0, 0);
        while i < x.len() || j < y.len() {
            if j == y.len() || (i < x.len() && x[i].0 < y[j].0) {
                out.push((x[i].0, a * x[i].1));
                i += 1;
            } else if i == x.len() || y[j].0 < x[i].0 {
                out.push((y[j].0, b * y[j].1));
                j += 1;
            } else {
                out.push((x[i].0, a * x[i].1 + b * y[j].1));
                i += 1;
                j += 1;
            }
        }
        Ok(Self::from_sorted(self.n, self.k, out))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_sorted(
            self.n,
            self.k,
            self.terms.iter().map(|&(key, v)| (key, c * v)).collect(),
        )
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Exact product; replicas multiply independently.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let alg = KeyAlgebra::new(self.n, self.k);
        let mut acc: FxHashMap<u64, C64> = FxHashMap::default();
        acc.reserve(self.terms.len().max(other.terms.len()));
        for &(a, ca) in &self.terms {
            for &(b, cb) in &other.terms {
                *acc.entry(a ^ b).or_insert(ZERO) += ca * cb * i_pow(alg.phase(a, b));
            }
        }
        Ok(Self::from_map(self.n, self.k, acc))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.multiply(other)?;
        let ba = other.multiply(self)?;
        ab.combine(ONE, &ba, -ONE)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_sorted(
            self.n,
            self.k,
            self.terms.iter().map(|&(key, c)| (key, c.conj())).collect(),
        )
    }

    pub fn dim(&self) -> f64 {
        2f64.powi((self.n * self.k) as i32)
    }

    pub fn trace(&self) -> C64 {
        self.coeff_key(0) * self.dim()
    }

    /// `Tr(A^dagger B) = 2^{nk} sum conj(A_S) B_S`.
    pub fn hs_inner(&self, other: &Self) -> Result<C64> {
        self.check_same(other)?;
        let (x, y) = (&self.terms, &other.terms);
        let (mut i, mut j) = (0, 0);
        let mut s = ZERO;
        while i < x.len() && j < y.len() {
            match x[i].0.cmp(&y[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    s += x[i].1.conj() * y[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(s * self.dim())
    }

    pub fn hs_norm(&self) -> f64 {
        let s: f64 = self.terms.iter().map(|t| t.1.norm_sqr()).sum();
        (s * self.dim()).sqrt()
    }

    /// Largest coefficient difference, a cheap exactness probe.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        match self.combine(ONE, other, -ONE) {
            Ok(d) => d.terms.iter().map(|t| t.1.norm()).fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        }
    }

    /// Decomposition by per-replica Majorana weights.
    pub fn weight_sector(&self) -> BTreeMap<Vec<u32>, OperatorExpansion> {
        let alg = KeyAlgebra::new(self.n, self.k);
        let mut groups: BTreeMap<Vec<u32>, Vec<(u64, C64)>> = BTreeMap::new();
        for &(key, c) in &self.terms {
            let w: Vec<u32> = (0..self.k)
                .map(|j| alg.replica(key, j).count_ones())
                .collect();
            groups.entry(w).or_default().push((key, c));
        }
        groups
            .into_iter()
            .map(|(w, t)| (w, Self::from_sorted(self.n, self.k, t)))
            .collect()
    }

    /// Kronecker product `self (x) other` on `k_self + k_other` replicas.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(MgcError::Dimension(format!(
                "n={} vs n={}",
                self.n, other.n
            )));
        }
        let k = self.k + other.k;
        check_shape(self.n, k)?;
        let shift = 2 * self.n * other.k;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(a, ca) in &self.terms {
            for &(b, cb) in &other.terms {
                terms.push(((a << shift) | b, ca * cb));
            }
        }
        Ok(Self::from_sorted(self.n, k, terms))
    }

    pub fn tensor_power(&self, k: usize) -> Result<Self> {
        if self.k != 1 || k == 0 {
            return Err(MgcError::Dimension(
                "tensor_power needs a k=1 operator".into(),
            ));
        }
        let mut out = self.clone();
        for _ in 1..k {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    /// Adjoint action of a signed permutation, identically on every replica.
    pub fn apply_signed_permutation(&self, sp: &SignedPermutation) -> Result<Self> {
        if sp.perm.len() != 2 * self.n {
            return Err(MgcError::Dimension(format!(
                "signed permutation on {} modes, operator has {}",
                sp.perm.len(),
                2 * self.n
            )));
        }
        let alg = KeyAlgebra::new(self.n, self.k);
        let mut out = Vec::with_capacity(self.terms.len());
        for &(key, c) in &self.terms {
            let mut new_key = 0u64;
            let mut negative = false;
            for j in 0..self.k {
                let (m, neg) = sp.map_mask(alg.replica(key, j));
                negative ^= neg;
                new_key = (new_key << (2 * self.n)) | m;
            }
            out.push((new_key, if negative { -c } else { c }));
        }
        out.sort_unstable_by_key(|t| t.0);
        Ok(Self::from_sorted(self.n, self.k, out))
    }

    /// Adjoint action `gamma_mu -> sum_nu Q_{nu mu} gamma_nu` on every replica.
    pub fn apply_orthogonal(&self, q: &DMatrix<f64>) -> Result<Self> {
        let m = 2 * self.n;
        if q.nrows() != m || q.ncols() != m {
            return Err(MgcError::Dimension(format!(
                "Q is {}x{}, expected {m}x{m}",
                q.nrows(),
                q.ncols()
            )));
        }
        let residual = (q.transpose() * q - DMatrix::<f64>::identity(m, m)).amax();
        if residual > 1e-10 {
            return Err(MgcError::NotOrthogonal { residual });
        }
        let alg = KeyAlgebra::new(self.n, self.k);
        let mut cache: FxHashMap<u64, Vec<(u64, f64)>> = FxHashMap::default();
        let mut acc: FxHashMap<u64, C64> = FxHashMap::default();
        for &(key, c) in &self.terms {
            let mut partial: Vec<(u64, C64)> = vec![(0, c)];
            for j in 0..self.k {
                let s = alg.replica(key, j);
                let images = cache.entry(s).or_insert_with(|| minor_images(q, s, m));
                let mut next = Vec::with_capacity(partial.len() * images.len());
                for &(pk, pc) in &partial {
                    for &(t, d) in images.iter() {
                        next.push(((pk << m) | t, pc * d));
                    }
                }
                partial = next;
            }
            for (k2, c2) in partial {
                *acc.entry(k2).or_insert(ZERO) += c2;
            }
        }
        Ok(Self::from_map(self.n, self.k, acc))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ExpansionJson::from(self)).expect("expansion serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: ExpansionJson =
            serde_json::from_value(v.clone()).map_err(|e| MgcError::Parse(e.to_string()))?;
        let mut keys = Vec::with_capacity(j.terms.len());
        for t in j.terms {
            if t.masks.len() != j.k {
                return Err(MgcError::Parse(format!(
                    "term has {} masks, expected k={}",
                    t.masks.len(),
                    j.k
                )));
            }
            let s = ReplicatedString::new(j.n, t.masks)?;
            keys.push((s.key(), C64::new(t.re, t.im)));
        }
        Self::from_keys(j.n, j.k, keys)
    }
}

/// Images of `gamma_S` under `Q`: all `T` with `|T| = |S|` weighted by `det Q[T,S]`.
fn minor_images(q: &DMatrix<f64>, s: u64, m: usize) -> Vec<(u64, f64)> {
    let cols: Vec<usize> = bits(s).collect();
    let r = cols.len();
    if r == 0 {
        return vec![(0, 1.0)];
    }
    let mut out = Vec::new();
    let limit = 1u128 << m;
    let mut t: u128 = (1u128 << r) - 1;
    while t < limit {
        let rows: Vec<usize> = bits(t as u64).collect();
        let sub = DMatrix::from_fn(r, r, |a, b| q[(rows[a], cols[b])]);
        let d = sub.determinant();
        if d.abs() > 1e-15 {
            out.push((t as u64, d));
        }
        // Gosper: next mask with the same popcount
        let c = t & t.wrapping_neg();
        let nr = t + c;
        t = (((t ^ nr) >> 2) / c) | nr;
    }
    out
}

impl Add for &OperatorExpansion {
    type Output = OperatorExpansion;
    fn add(self, rhs: Self) -> OperatorExpansion {
        self.combine(ONE, rhs, ONE).expect("operand shapes differ")
    }
}

impl Sub for &OperatorExpansion {
    type Output = OperatorExpansion;
    fn sub(self, rhs: Self) -> OperatorExpansion {
        self.combine(ONE, rhs, -ONE).expect("operand shapes differ")
    }
}

impl Mul for &OperatorExpansion {
    type Output = OperatorExpansion;
    fn mul(self, rhs: Self) -> OperatorExpansion {
        self.multiply(rhs).expect("operand shapes differ")
    }
}

impl Mul<C64> for &OperatorExpansion {
    type Output = OperatorExpansion;
    fn mul(self, rhs: C64) -> OperatorExpansion {
        self.scale(rhs)
    }
}

impl Neg for &OperatorExpansion {
    type Output = OperatorExpansion;
    fn neg(self) -> OperatorExpansion {
        self.scale(-ONE)
    }
}

pub fn op_multiply(a: &OperatorExpansion, b: &OperatorExpansion) -> Result<OperatorExpansion> {
    a.multiply(b)
}

pub fn hs_inner(a: &OperatorExpansion, b: &OperatorExpansion) -> Result<C64> {
    a.hs_inner(b)
}

pub fn op_adjoint(a: &OperatorExpansion) -> OperatorExpansion {
    a.adjoint()
}

pub fn op_trace(a: &OperatorExpansion) -> C64 {
    a.trace()
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    masks: Vec<u64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct ExpansionJson {
    n: usize,
    k: usize,
    terms: Vec<TermJson>,
}

impl From<&OperatorExpansion> for ExpansionJson {
    fn from(a: &OperatorExpansion) -> Self {
        Self {
            n: a.n,
            k: a.k,
            terms: a
                .terms
                .iter()
                .map(|&(key, c)| TermJson {
                    masks: unpack(key, a.n, a.k),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

/// A signed permutation `gamma_mu -> s_mu gamma_{pi(mu)}` of the `2n` modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    /// `perm[mu-1] = pi(mu)` with 1-based images.
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let m = perm.len();
        if signs.len() != m {
            return Err(MgcError::InvalidPermutation(format!(
                "{} signs for {m} modes",
                signs.len()
            )));
        }
        let mut seen = vec![false; m];
        for &p in &perm {
            if p == 0 || p > m || seen[p - 1] {
                return Err(MgcError::InvalidPermutation(format!("{perm:?}")));
            }
            seen[p - 1] = true;
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(MgcError::InvalidPermutation(format!("signs {signs:?}")));
        }
        Ok(Self { perm, signs })
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            perm: (1..=modes).collect(),
            signs: vec![1; modes],
        }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Image mask and whether the canonical coefficient flips sign.
    pub(crate) fn map_mask(&self, s: u64) -> (u64, bool) {
        let mut image = 0u64;
        let mut negative = false;
        for b in bits(s) {
            let t = self.perm[b] - 1;
            // inversions with earlier (smaller) modes that landed higher
            negative ^= ((image >> t) >> 1).count_ones() & 1 == 1;
            negative ^= self.signs[b] < 0;
            image |= 1u64 << t;
        }
        (image, negative)
    }

    /// Composition `self after other`.
    pub fn compose(&self, other: &Self) -> Self {
        let m = self.perm.len();
        let mut perm = vec![0; m];
        let mut signs = vec![1; m];
        for mu in 0..m {
            let mid = other.perm[mu] - 1;
            perm[mu] = self.perm[mid];
            signs[mu] = other.signs[mu] * self.signs[mid];
        }
        Self { perm, signs }
    }

    pub fn inverse(&self) -> Self {
        let m = self.perm.len();
        let mut perm = vec![0; m];
        let mut signs = vec![1; m];
        for mu in 0..m {
            perm[self.perm[mu] - 1] = mu + 1;
            signs[self.perm[mu] - 1] = self.signs[mu];
        }
        Self { perm, signs }
    }

    /// Every signed permutation of `m` modes, in a fixed order.
    pub fn enumerate(m: usize) -> Vec<Self> {
        let mut perms = Vec::new();
        let mut cur: Vec<usize> = (1..=m).collect();
        heap_permutations(m, &mut cur, &mut perms);
        perms.sort();
        let mut out = Vec::with_capacity(perms.len() << m);
        for p in perms {
            for s in 0..(1u32 << m) {
                let signs = (0..m)
                    .map(|b| if (s >> b) & 1 == 1 { -1 } else { 1 })
                    .collect();
                out.push(Self {
                    perm: p.clone(),
                    signs,
                });
            }
        }
        out
    }
}

fn heap_permutations(len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if len <= 1 {
        out.push(cur.clone());
        return;
    }
    heap_permutations(len - 1, cur, out);
    for i in 0..len - 1 {
        if len.is_multiple_of(2) {
            cur.swap(i, len - 1);
        } else {
            cur.swap(0, len - 1);
        }
        heap_permutations(len - 1, cur, out);
    }
}

/// Fermionic parity `(-i)^n gamma_1 ... gamma_{2n}` as a single-replica expansion.
pub fn parity_operator(n: usize) -> Result<OperatorExpansion> {
    check_shape(n, 1)?;
    // (-i)^n i^{-n(2n-1)} = (-1)^n
    let c = if n.is_multiple_of(2) { ONE } else { -ONE };
    OperatorExpansion::from_keys(n, 1, [(mode_mask(n), c)])
}

/// `gamma_mu` on replica `a` (1-based) of `k`, identity elsewhere.
pub fn majorana_on_replica(mu: usize, a: usize, n: usize, k: usize) -> Result<OperatorExpansion> {
    if mu == 0 || mu > 2 * n {
        return Err(MgcError::IndexOutOfRange {
            index: mu,
            max: 2 * n,
        });
    }
    if a == 0 || a > k {
        return Err(MgcError::IndexOutOfRange { index: a, max: k });
    }
    let mut masks = vec![0u64; k];
    masks[a - 1] = 1u64 << (mu - 1);
    OperatorExpansion::single(n, &masks, ONE)
}
