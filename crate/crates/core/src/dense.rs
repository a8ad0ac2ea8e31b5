//! Dense Jordan-Wigner oracle used to check the symbolic machinery.
//!
//! Qubit 1 is the most significant tensor factor and replica 1 the most
//! significant block, matching the packed-key order of [`OperatorExpansion`].

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{MgcError, Result};
use crate::majorana::{
    bits, canon_exp, i_pow, OperatorExpansion, SignedPermutation, C64, ONE, ZERO,
};

const DEFAULT_MAX_DENSE_DIM: usize = 4096;

/// Largest dense dimension the oracle accepts; `MGC_MAX_DENSE_DIM` overrides it.
pub fn max_dense_dim() -> usize {
    std::env::var("MGC_MAX_DENSE_DIM")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_DENSE_DIM)
}

fn check_dense(n: usize, k: usize) -> Result<usize> {
    let qubits = n * k;
    let limit = max_dense_dim();
    if qubits >= 63 || (1usize << qubits) > limit {
        return Err(MgcError::Capacity {
            what: "dense oracle dimension".into(),
            requested: 1u128 << qubits.min(127),
            limit: limit as u128,
        });
    }
    Ok(1usize << qubits)
}

/// Row-major square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            let row = &mut out.data[r * d..(r + 1) * d];
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * d..(k + 1) * d];
                for (o, b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).combine(ONE, &other.matmul(self), -ONE)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        Self::from_fn(a * b, |r, c| {
            self.get(r / b, c / b) * other.get(r % b, c % b)
        })
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|r| {
                self.data[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| self.get(r, c))
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), |r, c| m[(r, c)])
    }

    /// Flat `[[re, im], ...]` array in row-major order.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Flat {
            dim: usize,
            entries: Vec<[f64; 2]>,
        }
        serde_json::to_value(Flat {
            dim: self.dim,
            entries: self.data.iter().map(|c| [c.re, c.im]).collect(),
        })
        .expect("dense matrix serializes")
    }

    /// `(I (x) .. (x) U (x) .. (x) I) * self`, with `U` acting on block `slot` of `blocks`.
    pub fn left_slot(&self, u: &DenseMatrix, slot: usize, blocks: usize) -> Self {
        let b = u.dim;
        let lo = b.pow((blocks - 1 - slot) as u32);
        let d = self.dim;
        let mut out = Self::zeros(d);
        let mut buf = vec![ZERO; b];
        for col in 0..d {
            for r in 0..d {
                let m = (r / lo) % b;
                if m != 0 {
                    continue;
                }
                for (mm, slot_v) in buf.iter_mut().enumerate() {
                    *slot_v = self.data[(r + mm * lo) * d + col];
                }
                for mp in 0..b {
                    let mut s = ZERO;
                    for (mm, v) in buf.iter().enumerate() {
                        s += u.data[mp * b + mm] * v;
                    }
                    out.data[(r + mp * lo) * d + col] = s;
                }
            }
        }
        out
    }

    /// `self * (I (x) .. (x) U^dagger (x) .. (x) I)`.
    pub fn right_slot_adjoint(&self, u: &DenseMatrix, slot: usize, blocks: usize) -> Self {
        let b = u.dim;
        let lo = b.pow((blocks - 1 - slot) as u32);
        let d = self.dim;
        let mut out = Self::zeros(d);
        let mut buf = vec![ZERO; b];
        for r in 0..d {
            let row = &self.data[r * d..(r + 1) * d];
            let orow = &mut out.data[r * d..(r + 1) * d];
            for c in 0..d {
                if !(c / lo).is_multiple_of(b) {
                    continue;
                }
                for (mm, slot_v) in buf.iter_mut().enumerate() {
                    *slot_v = row[c + mm * lo];
                }
                for mp in 0..b {
                    let mut s = ZERO;
                    for (mm, v) in buf.iter().enumerate() {
                        s += v * u.data[mp * b + mm].conj();
                    }
                    orow[c + mp * lo] = s;
                }
            }
        }
        out
    }

    /// `U^{(x)k} self U^{dagger (x)k}` applied factor by factor.
    pub fn conjugate_tensor_power(&self, u: &DenseMatrix, k: usize) -> Self {
        let mut x = self.clone();
        for slot in 0..k {
            x = x.left_slot(u, slot, k);
            x = x.right_slot_adjoint(u, slot, k);
        }
        x
    }
}

/// `i^phase X^x Z^z` on a register of qubits, qubit 1 at the top bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Pauli {
    pub x: u64,
    pub z: u64,
    pub phase: u32,
}

impl Pauli {
    const ID: Pauli = Pauli {
        x: 0,
        z: 0,
        phase: 0,
    };

    fn mul(self, o: Pauli) -> Pauli {
        Pauli {
            x: self.x ^ o.x,
            z: self.z ^ o.z,
            phase: (self.phase + o.phase + 2 * (self.z & o.x).count_ones()) & 3,
        }
    }
}

/// Pauli form of `gamma_{mu+1}` (0-based `mu`) on `n` qubits.
fn jw_pauli(mu: usize, n: usize) -> Pauli {
    let j = mu / 2;
    let bit = 1u64 << (n - 1 - j);
    // qubits before j sit on the higher bits
    let zs = !((bit << 1) - 1) & ((1u64 << n) - 1);
    if mu.is_multiple_of(2) {
        Pauli {
            x: bit,
            z: zs,
            phase: 0,
        }
    } else {
        Pauli {
            x: bit,
            z: zs | bit,
            phase: 1,
        }
    }
}

/// Pauli form of the canonical string with mode mask `mask`.
pub(crate) fn string_pauli(mask: u64, n: usize) -> Pauli {
    let mut p = Pauli::ID;
    for b in bits(mask) {
        p = p.mul(jw_pauli(b, n));
    }
    p.phase = (p.phase + canon_exp(mask.count_ones())) & 3;
    p
}

/// Inverse of [`string_pauli`] up to phase.
fn pauli_mask(x: u64, z: u64, n: usize) -> u64 {
    let mut mask = 0u64;
    let mut parity_after = 0u64;
    for j in (0..n).rev() {
        let pos = n - 1 - j;
        let xj = (x >> pos) & 1;
        let zj = (z >> pos) & 1;
        let b = zj ^ parity_after;
        let a = xj ^ b;
        mask |= a << (2 * j);
        mask |= b << (2 * j + 1);
        parity_after ^= xj;
    }
    mask
}

fn replicated_pauli(key: u64, n: usize, k: usize) -> Pauli {
    let mut p = Pauli::ID;
    let mm = crate::majorana::mode_mask(n);
    for j in 0..k {
        let s = (key >> (2 * n * (k - 1 - j))) & mm;
        let q = string_pauli(s, n);
        let off = n * (k - 1 - j);
        p.x |= q.x << off;
        p.z |= q.z << off;
        p.phase += q.phase;
    }
    p.phase &= 3;
    p
}

/// Dense Jordan-Wigner image of `gamma_mu` (1-based) on `n` qubits.
pub fn jw_gamma(mu: usize, n: usize) -> Result<DenseMatrix> {
    if mu == 0 || mu > 2 * n {
        return Err(MgcError::IndexOutOfRange {
            index: mu,
            max: 2 * n,
        });
    }
    let e = OperatorExpansion::from_keys(n, 1, [(1u64 << (mu - 1), ONE)])?;
    to_dense(&e)
}

/// Dense image of an expansion on `2^{nk}` dimensions.
pub fn to_dense(a: &OperatorExpansion) -> Result<DenseMatrix> {
    let (n, k) = (a.n(), a.k());
    let dim = check_dense(n, k)?;
    let mut m = DenseMatrix::zeros(dim);
    for &(key, c) in a.terms() {
        let p = replicated_pauli(key, n, k);
        let base = c * i_pow(p.phase);
        for col in 0..dim {
            let v = if (p.z & col as u64).count_ones() & 1 == 1 {
                -base
            } else {
                base
            };
            m.data[(col ^ p.x as usize) * dim + col] += v;
        }
    }
    Ok(m)
}

fn walsh_hadamard(v: &mut [C64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Expansion coefficients `W_S = Tr(gamma_S M) / 2^{nk}` of a dense matrix.
pub fn from_dense(m: &DenseMatrix, n: usize, k: usize) -> Result<OperatorExpansion> {
    let dim = check_dense(n, k)?;
    if m.dim != dim {
        return Err(MgcError::Dimension(format!(
            "matrix dimension {} but 2^(nk) = {dim}",
            m.dim
        )));
    }
    let qb = n;
    let qmask = (1u64 << qb) - 1;
    let mut terms = Vec::new();
    let mut v = vec![ZERO; dim];
    for x in 0..dim {
        for (d, slot) in v.iter_mut().enumerate() {
            *slot = m.data[d * dim + (d ^ x)];
        }
        walsh_hadamard(&mut v);
        for (z, &w) in v.iter().enumerate() {
            if w.norm() < 1e-14 {
                continue;
            }
            let mut key = 0u64;
            for j in 0..k {
                let off = qb * (k - 1 - j);
                let s = pauli_mask((x as u64 >> off) & qmask, (z as u64 >> off) & qmask, n);
                key = (key << (2 * n)) | s;
            }
            let p = replicated_pauli(key, n, k);
            debug_assert_eq!((p.x, p.z), (x as u64, z as u64));
            terms.push((key, w * i_pow(p.phase) / dim as f64));
        }
    }
    OperatorExpansion::from_keys(n, k, terms)
}

/// Real antisymmetric generator `K` with `Q = exp(K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianGenerator {
    kmat: DMatrix<f64>,
}

impl GaussianGenerator {
    pub fn new(kmat: DMatrix<f64>) -> Result<Self> {
        if kmat.nrows() != kmat.ncols() || !kmat.nrows().is_multiple_of(2) || kmat.nrows() == 0 {
            return Err(MgcError::Dimension(format!(
                "generator must be 2n x 2n, got {}x{}",
                kmat.nrows(),
                kmat.ncols()
            )));
        }
        let residual = (&kmat + kmat.transpose()).amax();
        if residual > 1e-12 {
            return Err(MgcError::NotAntisymmetric { residual });
        }
        Ok(Self { kmat })
    }

    pub fn kmat(&self) -> &DMatrix<f64> {
        &self.kmat
    }

    pub fn n(&self) -> usize {
        self.kmat.nrows() / 2
    }

    /// Principal logarithm of a rotation `Q` in SO(2n).
    pub fn from_rotation(q: &DMatrix<f64>) -> Result<Self> {
        let m = q.nrows();
        let c = (q + q.transpose()) * 0.5;
        let s = (q - q.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let f = eig.eigenvalues.map(|x| {
            let x = x.clamp(-1.0, 1.0);
            let den = (1.0 - x * x).sqrt();
            if den < 1e-8 {
                // series of acos(x)/sqrt(1-x^2) near x = 1
                1.0 + (1.0 - x) / 3.0
            } else {
                x.acos() / den
            }
        });
        let fc = &eig.eigenvectors * DMatrix::from_diagonal(&f) * eig.eigenvectors.transpose();
        let mut k = s * fc;
        let asym = (&k - k.transpose()) * 0.5;
        k = asym;
        debug_assert_eq!(k.nrows(), m);
        Self::new(k)
    }

    pub fn rotation(&self) -> DMatrix<f64> {
        self.kmat.clone().exp()
    }
}

/// Matrix exponential by scaling and squaring with a diagonal Pade approximant.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let d = a.nrows();
    let norm1 = (0..d)
        .map(|c| a.column(c).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(2f64.powi(-s), 0.0);
    const Q: usize = 8;
    let mut coef = [1.0f64; Q + 1];
    for j in 1..=Q {
        coef[j] = coef[j - 1] * (Q - j + 1) as f64 / (j as f64 * (2 * Q - j + 1) as f64);
    }
    let id = DMatrix::<C64>::identity(d, d);
    let mut num = id.clone();
    let mut den = id.clone();
    let mut pow = id.clone();
    for (j, &cj) in coef.iter().enumerate().skip(1) {
        pow = &pow * &a;
        let term = &pow * C64::new(cj, 0.0);
        num += &term;
        if j % 2 == 0 {
            den += &term;
        } else {
            den -= &term;
        }
    }
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Pade denominator is invertible");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// `exp(1/4 sum K_{mu nu} gamma_mu gamma_nu)` on `n` qubits.
pub fn gaussian_unitary(g: &GaussianGenerator) -> Result<DenseMatrix> {
    let n = g.n();
    let k = g.kmat();
    let mut terms = Vec::new();
    for mu in 0..2 * n {
        for nu in mu + 1..2 * n {
            // gamma_mu gamma_nu = -i gamma_{mu nu}
            terms.push((
                (1u64 << mu) | (1u64 << nu),
                C64::new(0.0, -0.5 * k[(mu, nu)]),
            ));
        }
    }
    let h = to_dense(&OperatorExpansion::from_keys(n, 1, terms)?)?;
    Ok(DenseMatrix::from_nalgebra(&expm(&h.to_nalgebra())))
}

/// Pauli `X` on qubit `n`; conjugation flips `gamma_{2n}` only.
pub fn reflection_unitary(n: usize) -> Result<DenseMatrix> {
    let dim = check_dense(n, 1)?;
    Ok(DenseMatrix::from_fn(dim, |r, c| {
        if r == c ^ 1 {
            ONE
        } else {
            ZERO
        }
    }))
}

/// Orthogonal matrix of the adjoint action `U gamma_mu U^dagger = sum_nu Q_{nu mu} gamma_nu`.
pub fn induced_orthogonal(u: &DenseMatrix, n: usize) -> Result<DMatrix<f64>> {
    let gammas: Vec<DenseMatrix> = (1..=2 * n)
        .map(|mu| jw_gamma(mu, n))
        .collect::<Result<_>>()?;
    let ud = u.adjoint();
    let dim = (1usize << n) as f64;
    let mut q = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for mu in 0..2 * n {
        let img = u.matmul(&gammas[mu]).matmul(&ud);
        for nu in 0..2 * n {
            q[(nu, mu)] = (gammas[nu].matmul(&img).trace() / dim).re;
        }
    }
    Ok(q)
}

/// Exact unitary with adjoint action `gamma_mu -> s_mu gamma_{pi(mu)}`, built from
/// braiding gates `(1 + gamma_a gamma_b)/sqrt 2` and single-mode flips.
pub fn signed_permutation_unitary(sp: &SignedPermutation) -> Result<DenseMatrix> {
    let m = sp.perm().len();
    if !m.is_multiple_of(2) {
        return Err(MgcError::Dimension(format!(
            "{m} modes is not an even count"
        )));
    }
    let n = m / 2;
    let dim = check_dense(n, 1)?;
    let gammas: Vec<DenseMatrix> = (1..=m).map(|mu| jw_gamma(mu, n)).collect::<Result<_>>()?;
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    // image[mu] = current image mode of gamma_mu, with its sign
    let mut u = DenseMatrix::identity(dim);
    let mut image: Vec<(usize, i8)> = (0..m).map(|mu| (mu, 1)).collect();
    let mut at: Vec<usize> = (0..m).collect();
    // fill target slots left to right; moves only touch unfilled slots
    for target in 0..m {
        let mu = sp
            .perm()
            .iter()
            .position(|&p| p - 1 == target)
            .expect("bijection");
        while image[mu].0 > target {
            let b = image[mu].0;
            let a = b - 1;
            let g = DenseMatrix::identity(dim).combine(h, &gammas[a].matmul(&gammas[b]), h);
            u = g.matmul(&u);
            // gamma_a -> -gamma_b, gamma_b -> gamma_a
            let (ia, ib) = (at[a], at[b]);
            image[ia] = (b, -image[ia].1);
            image[ib] = (a, image[ib].1);
            at.swap(a, b);
        }
    }
    for mu in 0..m {
        if image[mu].1 != sp.signs()[mu] {
            let nu = image[mu].0;
            let mut f = DenseMatrix::identity(dim);
            for (rho, g) in gammas.iter().enumerate() {
                if rho != nu {
                    f = f.matmul(g);
                }
            }
            u = f.matmul(&u);
        }
    }
    Ok(u)
}

/// A Haar-distributed element of O(2n) with the data needed to lift it.
#[derive(Clone, Debug)]
pub struct OrthogonalSample {
    pub q: DMatrix<f64>,
    /// Generator of `Q D` (or `Q`) in SO(2n).
    pub generator: GaussianGenerator,
    /// True when `det Q = -1`, i.e. `Q = exp(K) D` with `D = diag(1,..,1,-1)`.
    pub reflected: bool,
}

impl OrthogonalSample {
    pub fn from_orthogonal(q: DMatrix<f64>) -> Result<Self> {
        let m = q.nrows();
        let residual = (q.transpose() * &q - DMatrix::<f64>::identity(m, m)).amax();
        if residual > 1e-10 {
            return Err(MgcError::NotOrthogonal { residual });
        }
        let reflected = q.determinant() < 0.0;
        let mut qs = q.clone();
        if reflected {
            for r in 0..m {
                qs[(r, m - 1)] = -qs[(r, m - 1)];
            }
        }
        let generator = GaussianGenerator::from_rotation(&qs)?;
        Ok(Self {
            q,
            generator,
            reflected,
        })
    }

    /// A unitary whose adjoint action on Majoranas is `Q`.
    pub fn unitary(&self) -> Result<DenseMatrix> {
        let u = gaussian_unitary(&self.generator)?;
        if self.reflected {
            Ok(u.matmul(&reflection_unitary(self.generator.n())?))
        } else {
            Ok(u)
        }
    }
}

/// Haar sample on O(m) from the given stream.
pub fn haar_orthogonal<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(m, m, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for c in 0..m {
        if r[(c, c)] < 0.0 {
            for row in 0..m {
                q[(row, c)] = -q[(row, c)];
            }
        }
    }
    q
}

/// Haar sample on the component of O(m) with the requested determinant sign.
pub fn haar_orthogonal_component<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    negative: bool,
) -> DMatrix<f64> {
    let mut q = haar_orthogonal(rng, m);
    if (q.determinant() < 0.0) != negative {
        for r in 0..m {
            q[(r, m - 1)] = -q[(r, m - 1)];
        }
    }
    q
}

/// Haar-random `Q` on O(2n), deterministic in `seed`.
pub fn random_orthogonal(n: usize, seed: u64) -> Result<OrthogonalSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    OrthogonalSample::from_orthogonal(haar_orthogonal(&mut rng, 2 * n))
}

/// Monte-Carlo twirl estimate with its Frobenius standard error.
#[derive(Clone, Debug)]
pub struct McTwirl {
    pub mean: DenseMatrix,
    pub stderr: f64,
    pub samples: usize,
}

/// Averages `U^{(x)k} W U^{dagger (x)k}` over Haar matchgates, alternating components.
pub fn mc_twirl(w: &DenseMatrix, n: usize, k: usize, samples: usize, seed: u64) -> Result<McTwirl> {
    let dim = check_dense(n, k)?;
    if w.dim != dim {
        return Err(MgcError::Dimension(format!(
            "matrix dimension {} but 2^(nk) = {dim}",
            w.dim
        )));
    }
    if samples < 2 {
        return Err(MgcError::Empty(
            "mc_twirl needs at least two samples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = DenseMatrix::zeros(dim);
    let mut sq = vec![0.0f64; dim * dim];
    for i in 0..samples {
        let q = haar_orthogonal_component(&mut rng, 2 * n, i % 2 == 1);
        let u = OrthogonalSample::from_orthogonal(q)?.unitary()?;
        let x = w.conjugate_tensor_power(&u, k);
        for ((s, q2), v) in sum.data.iter_mut().zip(sq.iter_mut()).zip(&x.data) {
            *s += v;
            *q2 += v.norm_sqr();
        }
    }
    let m = samples as f64;
    let mean = sum.scale(C64::new(1.0 / m, 0.0));
    let var: f64 = mean
        .data
        .iter()
        .zip(&sq)
        .map(|(mu, s2)| ((s2 / m - mu.norm_sqr()) * m / (m - 1.0)).max(0.0))
        .sum();
    Ok(McTwirl {
        mean,
        stderr: (var / m).sqrt(),
        samples,
    })
}

/// Frobenius norm of `[X, U_Q^{(x)k}]`.
pub fn commutator_residual(x: &OperatorExpansion, q: &DMatrix<f64>) -> Result<f64> {
    if q.nrows() != 2 * x.n() {
        return Err(MgcError::Dimension(format!(
            "Q is {}x{}, operator has {} modes",
            q.nrows(),
            q.ncols(),
            2 * x.n()
        )));
    }
    let u = OrthogonalSample::from_orthogonal(q.clone())?.unitary()?;
    let d = to_dense(x)?;
    Ok(commutator_residual_dense(&d, &u, x.k()))
}

/// `||U^{(x)k} X U^{dagger (x)k} - X||_F`, equal to the commutator norm for unitary `U`.
pub fn commutator_residual_dense(x: &DenseMatrix, u: &DenseMatrix, k: usize) -> f64 {
    x.conjugate_tensor_power(u, k)
        .combine(ONE, x, -ONE)
        .frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorana::{parity_operator, OperatorExpansion};

    fn pauli(which: char) -> DenseMatrix {
        let i = C64::new(0.0, 1.0);
        match which {
            'X' => DenseMatrix::from_fn(2, |r, c| if r != c { ONE } else { ZERO }),
            'Y' => DenseMatrix::from_fn(2, |r, c| match (r, c) {
                (0, 1) => -i,
                (1, 0) => i,
                _ => ZERO,
            }),
            'Z' => DenseMatrix::from_fn(2, |r, c| match (r, c) {
                (0, 0) => ONE,
                (1, 1) => -ONE,
                _ => ZERO,
            }),
            _ => DenseMatrix::identity(2),
        }
    }

    #[test]
    fn jordan_wigner_single_site() {
        assert_eq!(jw_gamma(1, 1).unwrap(), pauli('X'));
        assert_eq!(jw_gamma(2, 1).unwrap(), pauli('Y'));
        assert!(jw_gamma(3, 1).is_err());
        // gamma_3 at n=2 is Z (x) X
        assert_eq!(jw_gamma(3, 2).unwrap(), pauli('Z').kron(&pauli('X')));
    }

    #[test]
    fn car_at_two_sites() {
        let g: Vec<_> = (1..=4).map(|mu| jw_gamma(mu, 2).unwrap()).collect();
        for a in 0..4 {
            for b in 0..4 {
                let ac = g[a].matmul(&g[b]).combine(ONE, &g[b].matmul(&g[a]), ONE);
                let want = if a == b {
                    DenseMatrix::identity(4).scale(C64::new(2.0, 0.0))
                } else {
                    DenseMatrix::zeros(4)
                };
                assert!(ac.max_abs_diff(&want) < 1e-14);
            }
        }
    }

    #[test]
    fn strings_are_hermitian_involutions() {
        for (n, k) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            for key in 0..(1u64 << (2 * n * k)) {
                let e = OperatorExpansion::from_keys(n, k, [(key, ONE)]).unwrap();
                let d = to_dense(&e).unwrap();
                assert!(d.max_abs_diff(&d.adjoint()) < 1e-14);
                assert!(d.matmul(&d).max_abs_diff(&DenseMatrix::identity(d.dim())) < 1e-14);
            }
        }
    }

    #[test]
    fn dense_product_matches_symbolic() {
        let a = &OperatorExpansion::single(1, &[1, 2], C64::new(0.3, 1.0)).unwrap()
            + &OperatorExpansion::single(1, &[3, 1], ONE).unwrap();
        let b = &OperatorExpansion::single(1, &[2, 3], C64::new(-1.0, 0.5)).unwrap()
            + &OperatorExpansion::single(1, &[0, 1], ONE).unwrap();
        let sym = to_dense(&(&a * &b)).unwrap();
        let den = to_dense(&a).unwrap().matmul(&to_dense(&b).unwrap());
        assert!(sym.max_abs_diff(&den) < 1e-14);
    }

    #[test]
    fn dense_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = DenseMatrix::from_fn(16, |_, _| C64::new(rng.random(), rng.random()));
        let e = from_dense(&m, 2, 2).unwrap();
        assert!(to_dense(&e).unwrap().max_abs_diff(&m) < 1e-12);
        let e = from_dense(&m, 1, 4).unwrap();
        assert!(to_dense(&e).unwrap().max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn parity_is_z_string() {
        let p1 = to_dense(&parity_operator(1).unwrap()).unwrap();
        assert_eq!(p1, pauli('Z'));
        let p2 = to_dense(&parity_operator(2).unwrap()).unwrap();
        assert!(p2.max_abs_diff(&pauli('Z').kron(&pauli('Z'))) < 1e-14);
    }

    #[test]
    fn gaussian_unitary_rotates_majoranas() {
        let id = gaussian_unitary(&GaussianGenerator::new(DMatrix::zeros(2, 2)).unwrap()).unwrap();
        assert!(id.max_abs_diff(&DenseMatrix::identity(2)) < 1e-14);
        let th = 0.7f64;
        let k = DMatrix::from_row_slice(2, 2, &[0.0, th, -th, 0.0]);
        let u = gaussian_unitary(&GaussianGenerator::new(k).unwrap()).unwrap();
        let q = induced_orthogonal(&u, 1).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[th.cos(), th.sin(), -th.sin(), th.cos()]);
        assert!((q - want).amax() < 1e-12);
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(GaussianGenerator::new(bad).is_err());
    }

    #[test]
    fn random_generators_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::<f64>::from_fn(4, 4, |_, _| rng.sample(StandardNormal));
        let g = GaussianGenerator::new(&a - a.transpose()).unwrap();
        let u = gaussian_unitary(&g).unwrap();
        let q = induced_orthogonal(&u, 2).unwrap();
        assert!((q - g.rotation()).amax() < 1e-8);
        let minus = GaussianGenerator::new(-g.kmat().clone()).unwrap();
        let prod = u.matmul(&gaussian_unitary(&minus).unwrap());
        assert!(prod.max_abs_diff(&DenseMatrix::identity(4)) < 1e-8);
    }

    #[test]
    fn reflection_has_negative_determinant() {
        for n in 1..=2 {
            let r = reflection_unitary(n).unwrap();
            let q = induced_orthogonal(&r, n).unwrap();
            assert!((q.determinant() + 1.0).abs() < 1e-12);
            assert!((q[(2 * n - 1, 2 * n - 1)] + 1.0).abs() < 1e-12);
            let rr = r.matmul(&r);
            assert!(rr.max_abs_diff(&DenseMatrix::identity(rr.dim())) < 1e-14);
        }
    }

    #[test]
    fn lifted_unitaries_match_their_rotation() {
        for seed in 0..10 {
            let s = random_orthogonal(2, seed).unwrap();
            let u = s.unitary().unwrap();
            assert!((induced_orthogonal(&u, 2).unwrap() - &s.q).amax() < 1e-8);
        }
        assert_eq!(
            random_orthogonal(2, 5).unwrap().q,
            random_orthogonal(2, 5).unwrap().q
        );
    }

    #[test]
    fn haar_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (n, m) = (2, 10_000);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..m {
            let q = haar_orthogonal(&mut rng, 2 * n);
            s1 += q.sum() / 16.0;
            s2 += q[(0, 0)] * q[(0, 0)];
        }
        assert!((s1 / m as f64).abs() < 4.0 / (m as f64).sqrt());
        let mean2 = s2 / m as f64;
        // Var(Q_11^2) for a uniform unit vector in R^4 is 1/12 - 1/16
        let sigma = ((1.0 / 12.0 - 1.0 / 16.0) / m as f64).sqrt();
        assert!((mean2 - 0.25).abs() < 3.0 * sigma);
    }

    #[test]
    fn residuals() {
        let q = random_orthogonal(1, 1).unwrap().q;
        let id = OperatorExpansion::identity(1, 2).unwrap();
        assert!(commutator_residual(&id, &q).unwrap() < 1e-12);
        let g1 = OperatorExpansion::single(1, &[1, 0], ONE).unwrap();
        assert!(commutator_residual(&g1, &q).unwrap() > 0.1);
    }

    #[test]
    fn mc_twirl_fixes_identity() {
        let t = mc_twirl(&DenseMatrix::identity(4), 1, 2, 10, 1).unwrap();
        assert!(t.mean.max_abs_diff(&DenseMatrix::identity(4)) < 1e-12);
        assert!(t.stderr < 1e-12);
    }

    #[test]
    fn capacity_gate() {
        let big = OperatorExpansion::identity(4, 4).unwrap();
        assert!(matches!(to_dense(&big), Err(MgcError::Capacity { .. })));
    }

    #[test]
    fn signed_permutation_unitaries_are_exact() {
        for n in 1..=2 {
            for sp in SignedPermutation::enumerate(2 * n) {
                let u = signed_permutation_unitary(&sp).unwrap();
                let q = induced_orthogonal(&u, n).unwrap();
                for (mu, (&p, &s)) in sp.perm().iter().zip(sp.signs()).enumerate() {
                    for nu in 0..2 * n {
                        let want = if nu == p - 1 { s as f64 } else { 0.0 };
                        assert!((q[(nu, mu)] - want).abs() < 1e-12);
                    }
                }
                assert!(
                    u.matmul(&u.adjoint())
                        .max_abs_diff(&DenseMatrix::identity(1 << n))
                        < 1e-12
                );
            }
        }
    }
}
