//! Applications: twirls, frame potentials, magic, de Finetti bounds and non-Gaussianity.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::bridge::{bridge_operator, Bridges};
use crate::clifford::{cm_vacuum_coords, PatternSpace};
use crate::combinat::{binomial, catalan, integer_product};
use crate::dense::{
    from_dense, haar_orthogonal_component, signed_permutation_unitary, string_pauli, to_dense,
    DenseMatrix, OrthogonalSample,
};
use crate::error::{MgcError, Result};
use crate::gt::{GtBasis, GtEngine};
use crate::majorana::{
    check_shape, KeyAlgebra, OperatorExpansion, SignedPermutation, C64, ONE, ZERO,
};
use crate::weights::{
    casimir_eigenvalue, commutant_dim, enumerate_weights, CasimirSpec, HighestWeight,
};

/// `|0><0|` on `n` qubits, replicated `k` times.
pub fn vacuum_state(n: usize, k: usize) -> Result<OperatorExpansion> {
    let mut rho = OperatorExpansion::identity(n, 1)?;
    for j in 0..n {
        let pair = (1u64 << (2 * j)) | (1u64 << (2 * j + 1));
        let factor =
            &OperatorExpansion::identity(n, 1)? - &OperatorExpansion::single(n, &[pair], ONE)?;
        rho = rho.multiply(&factor)?;
    }
    rho.scale_real(0.5f64.powi(n as i32)).tensor_power(k)
}

/// Orthogonal projection onto the matchgate commutant via the GT basis.
pub fn matchgate_twirl(w: &OperatorExpansion) -> Result<OperatorExpansion> {
    let basis = GtBasis::build(w.n(), w.k())?;
    let y = basis.project_coords(w)?;
    basis.engine().expand(&y)
}

/// `Tr P_0 = 2 prod_{1<=i<j<=n} (k+2n-i-j)/(2n-i-j)`, exact.
pub fn vacuum_trace_exact(n: usize, k: usize) -> u128 {
    let (n, k) = (n as i128, k as i128);
    let mut factors = vec![(2i128, 1i128)];
    for i in 1..=n {
        for j in i + 1..=n {
            factors.push((k + 2 * n - i - j, 2 * n - i - j));
        }
    }
    integer_product(factors).expect("vacuum trace is an integer")
}

pub fn vacuum_trace(n: usize, k: usize) -> f64 {
    vacuum_trace_exact(n, k) as f64
}

/// Projector onto the trivial replica sector, and whether the quadratic Casimir
/// alone was ambiguous (then the full top-level chain is used).
pub fn vacuum_projector_flagged(n: usize, k: usize) -> Result<(OperatorExpansion, bool)> {
    if !(2..=5).contains(&k) {
        return Err(MgcError::Unsupported(format!(
            "vacuum projector operator for k={k}"
        )));
    }
    let zero = HighestWeight::zero(k);
    let spec = CasimirSpec::quadratic(k);
    let mut others = Vec::new();
    let mut collision = false;
    for w in enumerate_weights(n, k) {
        if w.is_zero() {
            continue;
        }
        let e = casimir_eigenvalue(&w, &spec)?;
        if e == 0.0 {
            collision = true;
        } else if !others.contains(&e) {
            others.push(e);
        }
    }
    if collision {
        let mut engine = GtEngine::new(n, k)?;
        let c = engine.sector_coords(&zero)?;
        return Ok((engine.expand(&c)?, true));
    }
    let space = PatternSpace::new(n, k)?;
    let l = space.left_mul_matrix(&Bridges::new(n, k)?.casimir(&spec)?)?;
    let mut v = vec![ZERO; space.dim()];
    v[space.identity_index()] = ONE;
    for mu in others {
        let lv = l.apply(&v);
        v = lv.iter().zip(&v).map(|(a, b)| (a - b * mu) / -mu).collect();
    }
    Ok((space.expand(&v)?, false))
}

pub fn vacuum_projector(n: usize, k: usize) -> Result<OperatorExpansion> {
    vacuum_projector_flagged(n, k).map(|p| p.0)
}

/// A value with optional Monte-Carlo error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: Option<f64>,
    pub samples: usize,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: None,
            samples: 0,
        }
    }

    fn from_samples(xs: &[f64]) -> Self {
        let m = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / m;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        Self {
            value: mean,
            stderr: Some((var / m).sqrt()),
            samples: xs.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpMode {
    /// Closed product formula.
    Closed,
    /// Random-matrix Gamma product.
    Rmt,
    /// Purity of the exact twirled vacuum.
    Purity,
    /// Monte-Carlo over group samples.
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    Matchgate,
    CliffordMatchgate,
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(MgcError::Empty(
            "Monte-Carlo needs at least two samples".into(),
        ));
    }
    Ok(())
}

/// `1/2 2^{2kn} prod_{j<n} Gamma(k+1/2+j) Gamma(n+j) / (Gamma(1/2+j) Gamma(n+k+j))`.
pub fn unitary_frame_potential_rmt(n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    let mut ln = (2.0 * kf * nf) * std::f64::consts::LN_2 - std::f64::consts::LN_2;
    for j in 0..n {
        let j = j as f64;
        ln += ln_gamma(kf + 0.5 + j) - ln_gamma(0.5 + j) + ln_gamma(nf + j) - ln_gamma(nf + kf + j);
    }
    ln.exp()
}

/// Haar-random matchgate unitary; odd draws come from the reflection component.
fn sample_matchgate(rng: &mut ChaCha8Rng, n: usize, i: usize) -> Result<DenseMatrix> {
    let q = haar_orthogonal_component(rng, 2 * n, i % 2 == 1);
    OrthogonalSample::from_orthogonal(q)?.unitary()
}

fn sample_clifford_matchgate(rng: &mut ChaCha8Rng, n: usize) -> Result<DenseMatrix> {
    let m = 2 * n;
    let mut perm: Vec<usize> = (1..=m).collect();
    for i in (1..m).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let signs: Vec<i8> = (0..m)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    signed_permutation_unitary(&SignedPermutation::new(perm, signs)?)
}

/// `Q` with `Q e_mu = s_mu e_{pi(mu)}`.
pub fn signed_permutation_matrix(sp: &SignedPermutation) -> DMatrix<f64> {
    let m = sp.perm().len();
    let mut q = DMatrix::zeros(m, m);
    for (mu, (&p, &s)) in sp.perm().iter().zip(sp.signs()).enumerate() {
        q[(p - 1, mu)] = s as f64;
    }
    q
}

/// `E |Tr U|^{2k}` over Haar matchgates.
pub fn unitary_frame_potential(
    n: usize,
    k: usize,
    mode: FpMode,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    match mode {
        FpMode::Closed => Ok(Estimate::exact(commutant_dim(n, k) as f64)),
        FpMode::Rmt => Ok(Estimate::exact(unitary_frame_potential_rmt(n, k))),
        FpMode::Purity => Err(MgcError::Unsupported(
            "purity route applies to state frame potentials".into(),
        )),
        FpMode::Mc => {
            check_samples(samples)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs = (0..samples)
                .map(|i| {
                    Ok(sample_matchgate(&mut rng, n, i)?
                        .trace()
                        .norm()
                        .powi(2 * k as i32))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Estimate::from_samples(&xs))
        }
    }
}

/// `2^{n(2-k)} / binom(2n, n) binom(n + 2^{k-2} - 1, 2^{k-2} - 1)`.
pub fn cm_state_frame_potential(n: usize, k: usize) -> f64 {
    let p = 1u64 << (k - 2);
    let num = binomial(n as u64 + p - 1, p - 1) as f64;
    2f64.powi(n as i32 * (2 - k as i32)) * num / binomial(2 * n as u64, n as u64) as f64
}

/// `1/2 prod_{j<n} Gamma((n+j)/2) Gamma((k+j+1)/2) / (Gamma((j+1)/2) Gamma((n+k+j)/2))`.
pub fn state_frame_potential_rmt(n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    let mut ln = -std::f64::consts::LN_2;
    for j in 0..n {
        let j = j as f64;
        ln += ln_gamma((nf + j) / 2.0) + ln_gamma((kf + j + 1.0) / 2.0)
            - ln_gamma((j + 1.0) / 2.0)
            - ln_gamma((nf + kf + j) / 2.0);
    }
    ln.exp()
}

/// `E |<0|U|0>|^{2k}` over the ensemble.
pub fn state_frame_potential(
    n: usize,
    k: usize,
    ensemble: Ensemble,
    mode: FpMode,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    if k < 2 {
        return Err(MgcError::Unsupported(
            "state frame potentials need k >= 2".into(),
        ));
    }
    match (ensemble, mode) {
        (Ensemble::Matchgate, FpMode::Closed) => Ok(Estimate::exact(1.0 / vacuum_trace(n, k))),
        (Ensemble::Matchgate, FpMode::Rmt) => Ok(Estimate::exact(state_frame_potential_rmt(n, k))),
        (Ensemble::Matchgate, FpMode::Purity) => {
            let t = matchgate_twirl(&vacuum_state(n, k)?)?;
            Ok(Estimate::exact(t.hs_inner(&t)?.re))
        }
        (Ensemble::CliffordMatchgate, FpMode::Closed) => {
            Ok(Estimate::exact(cm_state_frame_potential(n, k)))
        }
        (Ensemble::CliffordMatchgate, FpMode::Purity) => {
            let space = PatternSpace::new(n, k)?;
            let y = cm_vacuum_coords(&space);
            Ok(Estimate::exact(space.inner(&y, &y).re * space.hs_factor()))
        }
        (Ensemble::CliffordMatchgate, FpMode::Rmt) => Err(MgcError::Unsupported(
            "no random-matrix route for the Clifford-matchgate ensemble".into(),
        )),
        (_, FpMode::Mc) => {
            check_samples(samples)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs = (0..samples)
                .map(|i| {
                    let u = match ensemble {
                        Ensemble::Matchgate => sample_matchgate(&mut rng, n, i)?,
                        Ensemble::CliffordMatchgate => sample_clifford_matchgate(&mut rng, n)?,
                    };
                    Ok(u.get(0, 0).norm().powi(2 * k as i32))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Estimate::from_samples(&xs))
        }
    }
}

/// `|F_CM - F_MG| / F_MG` for the k=4 state frame potentials.
pub fn design_gap(n: usize) -> f64 {
    let mg = 1.0 / vacuum_trace(n, 4);
    (cm_state_frame_potential(n, 4) - mg).abs() / mg
}

/// `-log2(2^n / C_{n+1})`.
pub fn sre_closed(n: usize) -> f64 {
    (catalan(n as u64 + 1) as f64).log2() - n as f64
}

/// `n + 2 - 3/2 log2 n - 1/2 log2 pi - 21 / (8 ln 2 n)`.
pub fn sre_asymptotic(n: usize) -> f64 {
    let nf = n as f64;
    nf + 2.0
        - 1.5 * nf.log2()
        - 0.5 * std::f64::consts::PI.log2()
        - 21.0 / (8.0 * std::f64::consts::LN_2 * nf)
}

/// `-log2[ 2^{-n} Tr(twirl(|0><0|^{(x)4}) Q_4) ]` from the exact k=4 twirl.
pub fn sre_direct(n: usize) -> Result<f64> {
    if n > 2 {
        return Err(MgcError::Capacity {
            what: "direct SRE route (n)".into(),
            requested: n as u128,
            limit: 2,
        });
    }
    let t = matchgate_twirl(&vacuum_state(n, 4)?)?;
    let q = q4_operator(n)?;
    let tr = t.adjoint().hs_inner(&q)?.re;
    Ok(0.0 - (tr / 2f64.powi(n as i32)).log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SreMode {
    Closed,
    Direct,
}

pub fn sre_annealed(n: usize, mode: SreMode) -> Result<f64> {
    match mode {
        SreMode::Closed => Ok(sre_closed(n)),
        SreMode::Direct => sre_direct(n),
    }
}

/// `prod_mu (1 + gamma_mu^{(x)4})` on four replicas.
pub fn q4_operator(n: usize) -> Result<OperatorExpansion> {
    check_shape(n, 4)?;
    let id = OperatorExpansion::identity(n, 4)?;
    let mut q = id.clone();
    for mu in 0..2 * n {
        let m = 1u64 << mu;
        let chi = OperatorExpansion::single(n, &[m, m, m, m], ONE)?;
        q = q.multiply(&(&id + &chi))?;
    }
    Ok(q)
}

/// `sum_P P^{(x)4}` over the `4^n` Hermitian Pauli strings, built densely.
pub fn q4_pauli_dense(n: usize) -> Result<DenseMatrix> {
    let d = 1usize << n;
    let dim = d.pow(4);
    if dim > crate::dense::max_dense_dim() {
        return Err(MgcError::Capacity {
            what: "dense Q4".into(),
            requested: dim as u128,
            limit: crate::dense::max_dense_dim() as u128,
        });
    }
    let mut q = DenseMatrix::zeros(dim);
    for x in 0..d as u64 {
        for z in 0..d as u64 {
            // X^x Z^z times i^{|x & z|} is Hermitian
            let p = DenseMatrix::from_fn(d, |r, c| {
                if r as u64 != (c as u64 ^ x) {
                    return ZERO;
                }
                let sign = if (z & c as u64).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                crate::majorana::i_pow((x & z).count_ones()) * sign
            });
            let p4 = p.kron(&p).kron(&p).kron(&p);
            q = q.combine(ONE, &p4, ONE);
        }
    }
    Ok(q)
}

/// `l n (n-1) / (k+1)`.
pub fn definetti_bound(n: usize, k: usize, l: usize) -> Result<f64> {
    check_definetti(k, l)?;
    Ok((l * n * n.saturating_sub(1)) as f64 / (k + 1) as f64)
}

/// `prod_{i<j} (1 - l/(k+2n-i-j))`.
pub fn definetti_ratio(n: usize, k: usize, l: usize) -> Result<f64> {
    check_definetti(k, l)?;
    let mut r = 1.0;
    for i in 1..=n {
        for j in i + 1..=n {
            r *= 1.0 - l as f64 / (k + 2 * n - i - j) as f64;
        }
    }
    Ok(r)
}

/// `Tr P_0^{(k-l)} / Tr P_0^{(k)}`.
pub fn definetti_ratio_traces(n: usize, k: usize, l: usize) -> Result<f64> {
    check_definetti(k, l)?;
    Ok(vacuum_trace(n, k - l) / vacuum_trace(n, k))
}

fn check_definetti(k: usize, l: usize) -> Result<()> {
    if l == 0 || l >= k {
        return Err(MgcError::Unsupported(format!(
            "need 1 <= l < k, got l={l}, k={k}"
        )));
    }
    Ok(())
}

/// Normalised pure state on `n` qubits (qubit 1 is the most significant bit).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub n: usize,
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != 1 << n {
            return Err(MgcError::Dimension(format!(
                "{} amplitudes for {n} qubits",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(MgcError::InvalidState(format!("norm {norm}")));
        }
        Ok(Self { n, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(MgcError::InvalidState("zero vector".into()));
        }
        Self::new(n, amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn vacuum(n: usize) -> Self {
        let mut a = vec![ZERO; 1 << n];
        a[0] = ONE;
        Self { n, amplitudes: a }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let a: Vec<C64> = (0..1 << n)
            .map(|_| {
                C64::new(
                    rng.sample(rand_distr::StandardNormal),
                    rng.sample(rand_distr::StandardNormal),
                )
            })
            .collect();
        Self::normalized(n, a).expect("nonzero with probability one")
    }

    pub fn apply(&self, u: &DenseMatrix) -> Result<Self> {
        Self::normalized(self.n, u.apply(&self.amplitudes))
    }

    /// `<psi| gamma_S |psi>` for every mode mask `S`.
    pub fn string_expectations(&self) -> Vec<C64> {
        let n = self.n;
        let psi = &self.amplitudes;
        (0..1u64 << (2 * n))
            .map(|mask| {
                let p = string_pauli(mask, n);
                let ph = crate::majorana::i_pow(p.phase);
                let mut acc = ZERO;
                for (b, &amp) in psi.iter().enumerate() {
                    let b = b as u64;
                    let sign = if (p.z & b).count_ones().is_multiple_of(2) {
                        1.0
                    } else {
                        -1.0
                    };
                    acc += psi[(b ^ p.x) as usize].conj() * amp * sign;
                }
                acc * ph
            })
            .collect()
    }
}

/// `M_mn = -(i/2) <[gamma_m, gamma_n]>`.
pub fn covariance_matrix(psi: &StateVector) -> DMatrix<f64> {
    let e = psi.string_expectations();
    let m = 2 * psi.n;
    DMatrix::from_fn(m, m, |a, b| {
        if a == b {
            0.0
        } else {
            // gamma_a gamma_b = -i gamma_{ab} for a < b
            let v = 0.0 - e[(1usize << a) | (1usize << b)].re;
            if a < b {
                v
            } else {
                0.0 - v
            }
        }
    })
}

/// Fermionic antiflatness `n - 1/2 Tr[(M^T M)^k]`.
pub fn faf(psi: &StateVector, k: usize) -> f64 {
    let m = covariance_matrix(psi);
    let mtm = m.transpose() * &m;
    let mut p = DMatrix::<f64>::identity(mtm.nrows(), mtm.ncols());
    for _ in 0..k {
        p = &p * &mtm;
    }
    psi.n as f64 - 0.5 * p.trace()
}

/// `Tr[W (|psi><psi|)^{(x)k}]`.
pub fn phi_w(w: &OperatorExpansion, psi: &StateVector) -> Result<C64> {
    if w.n() != psi.n {
        return Err(MgcError::Dimension(format!(
            "operator on {} qubits, state on {}",
            w.n(),
            psi.n
        )));
    }
    let e = psi.string_expectations();
    let alg = KeyAlgebra::new(w.n(), w.k());
    Ok(w.terms()
        .iter()
        .map(|&(key, c)| (0..w.k()).fold(c, |acc, j| acc * e[alg.replica(key, j) as usize]))
        .sum())
}

/// Overlap of `|psi>^{(x)k}` with the Gaussian-symmetric subspace (symbolic projector).
pub fn phi0(psi: &StateVector, k: usize) -> Result<f64> {
    Ok(phi_w(&vacuum_projector(psi.n, k)?, psi)?.re)
}

/// Same overlap from the dense kernel of the quadratic Casimir.
pub fn phi0_dense(psi: &StateVector, k: usize) -> Result<f64> {
    let c = to_dense(&Bridges::new(psi.n, k)?.casimir(&CasimirSpec::quadratic(k))?)?;
    let eig = c.to_nalgebra().symmetric_eigen();
    let mut v = psi.amplitudes.clone();
    for _ in 1..k {
        v = v
            .iter()
            .flat_map(|a| psi.amplitudes.iter().map(move |b| a * b))
            .collect();
    }
    let v = nalgebra::DVector::from_vec(v);
    let mut total = 0.0;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() < 1e-8 {
            total += eig.eigenvectors.column(i).dotc(&v).norm_sqr();
        }
    }
    Ok(total)
}

/// `||Lambda_12 (psi (x) psi)||`.
pub fn gaussianity_residual(psi: &StateVector) -> Result<f64> {
    let l = to_dense(&bridge_operator(1, 2, psi.n, 2)?)?;
    let v: Vec<C64> = psi
        .amplitudes
        .iter()
        .flat_map(|a| psi.amplitudes.iter().map(move |b| a * b))
        .collect();
    Ok(l.apply(&v).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
}

/// Expectation of a chain Casimir on `|psi>^{(x)k}`.
pub fn casimir_expectation(psi: &StateVector, spec: &CasimirSpec, k: usize) -> Result<C64> {
    phi_w(&Bridges::new(psi.n, k)?.casimir(spec)?, psi)
}

/// `(2l, binom(2n, 2l) / binom(n, l))` for `l = 0..n`.
pub fn shadow_inverse_channel(n: usize) -> Vec<(usize, f64)> {
    (0..=n)
        .map(|l| {
            let num = binomial(2 * n as u64, 2 * l as u64) as f64;
            (2 * l, num / binomial(n as u64, l as u64) as f64)
        })
        .collect()
}

/// Scales each even weight sector of a single-copy operator by `f(weight)`, drops odd ones.
fn scale_even_sectors(
    a: &OperatorExpansion,
    f: impl Fn(usize) -> f64,
) -> Result<OperatorExpansion> {
    if a.k() != 1 {
        return Err(MgcError::Dimension(
            "shadow channels act on a single copy".into(),
        ));
    }
    let terms = a
        .terms()
        .iter()
        .filter(|(key, _)| key.count_ones() % 2 == 0)
        .map(|&(key, c)| (key, c * f(key.count_ones() as usize)));
    OperatorExpansion::from_keys(a.n(), 1, terms)
}

/// Inverse matchgate-shadow channel.
pub fn apply_shadow_inverse(a: &OperatorExpansion) -> Result<OperatorExpansion> {
    let table = shadow_inverse_channel(a.n());
    scale_even_sectors(a, |w| table[w / 2].1)
}

/// Matchgate-shadow measurement channel `sum_l binom(n,l)/binom(2n,2l) P_{2l}`.
pub fn apply_shadow_channel(a: &OperatorExpansion) -> Result<OperatorExpansion> {
    let table = shadow_inverse_channel(a.n());
    scale_even_sectors(a, |w| 1.0 / table[w / 2].1)
}

/// Measurement channel averaged over every signed permutation, with the
/// computational-basis dephasing done densely (n <= 2).
pub fn shadow_channel_group(a: &OperatorExpansion) -> Result<OperatorExpansion> {
    let n = a.n();
    if a.k() != 1 || n > 2 {
        return Err(MgcError::Capacity {
            what: "group-averaged shadow channel (n)".into(),
            requested: n as u128,
            limit: 2,
        });
    }
    let group = SignedPermutation::enumerate(2 * n);
    let mut out = OperatorExpansion::zero(n, 1)?;
    for g in &group {
        let rotated = to_dense(&a.apply_signed_permutation(g)?)?;
        let diag =
            DenseMatrix::from_fn(
                rotated.dim(),
                |r, c| if r == c { rotated.get(r, c) } else { ZERO },
            );
        let back = from_dense(&diag, n, 1)?.apply_signed_permutation(&g.inverse())?;
        out = &out + &back;
    }
    Ok(out.scale_real(1.0 / group.len() as f64))
}

/// Exportable result record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub quantity: String,
    pub n: usize,
    pub k: Option<usize>,
    pub mode: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub formula_ref: String,
}

impl Record {
    pub fn new(
        quantity: &str,
        n: usize,
        k: Option<usize>,
        mode: &str,
        est: Estimate,
        formula: &str,
    ) -> Self {
        Self {
            quantity: quantity.into(),
            n,
            k,
            mode: mode.into(),
            value: est.value,
            stderr: est.stderr,
            formula_ref: formula.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::Bridges;
    use crate::dense::random_orthogonal;

    #[test]
    fn vacuum_is_the_all_zero_projector() {
        for n in 1..=3 {
            let d = to_dense(&vacuum_state(n, 1).unwrap()).unwrap();
            for r in 0..d.dim() {
                for c in 0..d.dim() {
                    let want = if r == 0 && c == 0 { 1.0 } else { 0.0 };
                    assert!((d.get(r, c) - C64::new(want, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn vacuum_traces() {
        for k in 1..=6 {
            assert_eq!(vacuum_trace_exact(1, k), 2);
        }
        assert_eq!(vacuum_trace_exact(2, 4), 10);
        assert_eq!(vacuum_trace_exact(2, 2), 6);
        for (n, k) in [(1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (2, 4)] {
            let (p, flagged) = vacuum_projector_flagged(n, k).unwrap();
            assert!(!flagged);
            assert!(
                (p.trace().re - vacuum_trace(n, k)).abs() < 1e-9,
                "n={n} k={k}"
            );
            assert!((&p * &p).max_abs_diff(&p) < 1e-9);
            let b = Bridges::new(n, k).unwrap();
            for a in 0..k {
                for c in a + 1..k {
                    assert!((b.get(a, c) * &p).hs_norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn twirl_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (n, k) = (1, 3);
        let top = 1u64 << (2 * n * k);
        let w = OperatorExpansion::from_keys(
            n,
            k,
            (0..20).map(|_| {
                (
                    rng.random_range(0..top),
                    C64::new(rng.random(), rng.random()),
                )
            }),
        )
        .unwrap();
        let t = matchgate_twirl(&w).unwrap();
        assert!(matchgate_twirl(&t).unwrap().max_abs_diff(&t) < 1e-10);
        assert!((t.trace() - w.trace()).norm() < 1e-10);
        let rest = &w - &t;
        assert!(matchgate_twirl(&rest).unwrap().hs_norm() < 1e-10);
        let h = &w + &w.adjoint();
        let th = matchgate_twirl(&h).unwrap();
        assert!(th.max_abs_diff(&th.adjoint()) < 1e-10);
        for (n, k) in [(1, 2), (2, 3), (1, 4), (2, 4)] {
            let tv = matchgate_twirl(&vacuum_state(n, k).unwrap()).unwrap();
            let p = vacuum_projector(n, k).unwrap();
            assert!(tv.max_abs_diff(&p.scale_real(1.0 / vacuum_trace(n, k))) < 1e-10);
        }
    }

    #[test]
    fn frame_potentials() {
        for (n, k) in [(1, 2), (1, 4), (2, 2), (2, 3), (2, 4), (3, 5)] {
            let closed = commutant_dim(n, k) as f64;
            assert!((unitary_frame_potential_rmt(n, k) / closed - 1.0).abs() < 1e-12);
            let s = 1.0 / vacuum_trace(n, k);
            assert!(
                (state_frame_potential_rmt(n, k) / s - 1.0).abs() < 1e-12,
                "n={n} k={k}"
            );
        }
        for k in 2..=6 {
            assert_eq!(1.0 / vacuum_trace(1, k), 0.5);
        }
        assert!((cm_state_frame_potential(2, 4) - 10.0 / 96.0).abs() < 1e-15);
        assert!((cm_state_frame_potential(1, 2) - 0.5).abs() < 1e-15);
        let p =
            state_frame_potential(2, 4, Ensemble::CliffordMatchgate, FpMode::Purity, 0, 0).unwrap();
        assert!((p.value - 10.0 / 96.0).abs() < 1e-12);
        let p = state_frame_potential(2, 3, Ensemble::Matchgate, FpMode::Purity, 0, 0).unwrap();
        assert!((p.value - 1.0 / vacuum_trace(2, 3)).abs() < 1e-10);
    }

    #[test]
    fn design_gap_values() {
        assert_eq!(design_gap(1), 0.0);
        assert!((design_gap(2) - 1.0 / 24.0).abs() < 1e-14);
        for n in 2..6 {
            assert!(design_gap(n + 1) > design_gap(n));
        }
    }

    #[test]
    fn sre_routes() {
        assert_eq!(sre_closed(1), 0.0);
        assert!((sre_closed(2) - (1.25f64).log2()).abs() < 1e-14);
        for n in 1..=2 {
            assert!((sre_direct(n).unwrap() - sre_closed(n)).abs() < 1e-9);
        }
    }

    #[test]
    fn q4_forms_agree() {
        for n in 1..=2 {
            let q = q4_operator(n).unwrap();
            assert_eq!(q.len(), 1 << (2 * n));
            let d = to_dense(&q).unwrap();
            assert!(d.max_abs_diff(&q4_pauli_dense(n).unwrap()) < 1e-10);
            for mu in 0..2 * n {
                let m = 1u64 << mu;
                let chi = OperatorExpansion::single(n, &[m, m, m, m], ONE).unwrap();
                assert!(q.commutator(&chi).unwrap().is_empty());
            }
            let p0 = vacuum_projector(n, 4).unwrap();
            let tr = p0.adjoint().hs_inner(&q).unwrap().re;
            let want = (1u128 << (2 * n)) * catalan(n as u64);
            assert!((tr - want as f64).abs() < 1e-9);
        }
        let d = to_dense(&q4_operator(1).unwrap()).unwrap().to_nalgebra();
        let eig = d.symmetric_eigen().eigenvalues;
        assert!(eig
            .iter()
            .all(|e| e.abs() < 1e-10 || (e - 4.0).abs() < 1e-10));
        assert_eq!(eig.iter().filter(|e| (*e - 4.0).abs() < 1e-10).count(), 4);
    }

    #[test]
    fn definetti() {
        assert_eq!(definetti_bound(1, 5, 2).unwrap(), 0.0);
        assert_eq!(definetti_ratio(1, 5, 2).unwrap(), 1.0);
        assert!((definetti_bound(2, 100, 1).unwrap() - 2.0 / 101.0).abs() < 1e-15);
        assert!((definetti_ratio(2, 4, 2).unwrap() - 0.6).abs() < 1e-15);
        assert!((definetti_ratio_traces(2, 4, 2).unwrap() - 0.6).abs() < 1e-15);
        assert!(definetti_bound(2, 3, 3).is_err());
    }

    #[test]
    fn covariance_and_faf() {
        let vac = StateVector::vacuum(2);
        let m = covariance_matrix(&vac);
        let want = DMatrix::from_row_slice(
            4,
            4,
            &[
                0., 1., 0., 0., -1., 0., 0., 0., 0., 0., 0., 1., 0., 0., -1., 0.,
            ],
        );
        assert_eq!(m, want);
        for k in 1..=4 {
            assert!(faf(&vac, k).abs() < 1e-12);
        }
        for seed in 0..5 {
            let u = random_orthogonal(3, seed).unwrap().unitary().unwrap();
            let psi = StateVector::vacuum(3).apply(&u).unwrap();
            assert!(faf(&psi, 2).abs() < 1e-8);
            assert!(gaussianity_residual(&psi).unwrap() < 1e-8);
        }
        let h = C64::new(0.5, 0.0);
        let probe = StateVector::new(2, vec![h, h, -h, h]).unwrap();
        assert!(faf(&probe, 2) > 0.01);
        assert!(gaussianity_residual(&StateVector::vacuum(2)).unwrap() < 1e-10);
        assert!(gaussianity_residual(&probe).unwrap() > 1e-3);
    }

    #[test]
    fn phi0_routes() {
        for k in 2..=4 {
            assert!((phi0(&StateVector::vacuum(2), k).unwrap() - 1.0).abs() < 1e-9);
        }
        let h = C64::new(0.5, 0.0);
        let probe = StateVector::new(2, vec![h, h, -h, h]).unwrap();
        assert!(phi0(&probe, 2).unwrap() < 1.0 - 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for k in 2..=4 {
            let psi = StateVector::random(&mut rng, 1);
            let a = phi0(&psi, k).unwrap();
            let b = phi0_dense(&psi, k).unwrap();
            assert!((a - b).abs() < 1e-9);
            assert!((-1e-9..=1.0 + 1e-9).contains(&a));
        }
    }

    #[test]
    fn phi_w_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = StateVector::random(&mut rng, 2);
        let w = Bridges::new(2, 2)
            .unwrap()
            .casimir(&CasimirSpec::quadratic(2))
            .unwrap();
        let d = to_dense(&w).unwrap();
        let v: Vec<C64> = psi
            .amplitudes
            .iter()
            .flat_map(|a| psi.amplitudes.iter().map(move |b| a * b))
            .collect();
        let dv = d.apply(&v);
        let want: C64 = v.iter().zip(&dv).map(|(a, b)| a.conj() * b).sum();
        assert!((phi_w(&w, &psi).unwrap() - want).norm() < 1e-12);
    }

    #[test]
    fn shadow_channels() {
        assert_eq!(shadow_inverse_channel(1), vec![(0, 1.0), (2, 1.0)]);
        assert_eq!(shadow_inverse_channel(2)[1], (2, 3.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 2;
        for _ in 0..10 {
            let d = DenseMatrix::from_fn(4, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let a = from_dense(&d, n, 1).unwrap();
            let measured = shadow_channel_group(&a).unwrap();
            assert!(measured.max_abs_diff(&apply_shadow_channel(&a).unwrap()) < 1e-10);
            let back = apply_shadow_inverse(&measured).unwrap();
            let even = OperatorExpansion::from_keys(
                n,
                1,
                a.terms()
                    .iter()
                    .filter(|(key, _)| key.count_ones() % 2 == 0)
                    .cloned(),
            )
            .unwrap();
            assert!(back.max_abs_diff(&even) < 1e-10);
        }
    }

    #[test]
    fn monte_carlo_frame_potentials() {
        let e =
            state_frame_potential(2, 4, Ensemble::CliffordMatchgate, FpMode::Mc, 4000, 1).unwrap();
        assert!((e.value - 10.0 / 96.0).abs() < 4.0 * e.stderr.unwrap());
        let e = state_frame_potential(2, 3, Ensemble::Matchgate, FpMode::Mc, 4000, 2).unwrap();
        assert!((e.value - 1.0 / vacuum_trace(2, 3)).abs() < 4.0 * e.stderr.unwrap());
        let e = unitary_frame_potential(1, 2, FpMode::Mc, 4000, 3).unwrap();
        assert!((e.value - 3.0).abs() < 4.0 * e.stderr.unwrap());
    }

    #[test]
    fn clifford_matchgate_commutant_contains_matchgate_commutant() {
        use crate::clifford::cm_twirl;
        for (n, k) in [(1, 3), (1, 4), (2, 3)] {
            let basis = GtBasis::build(n, k).unwrap();
            for i in 0..basis.len() {
                let x = basis.expand(i).unwrap().op;
                assert!(cm_twirl(&x).unwrap().max_abs_diff(&x) < 1e-10);
            }
        }
        // sum_mu gamma_mu^{(x)4} is Clifford-matchgate invariant but not matchgate invariant
        let n = 1;
        let mut chi = OperatorExpansion::zero(n, 4).unwrap();
        for mu in 0..2 * n {
            let m = 1u64 << mu;
            chi = &chi + &OperatorExpansion::single(n, &[m, m, m, m], ONE).unwrap();
        }
        assert!(cm_twirl(&chi).unwrap().max_abs_diff(&chi) < 1e-12);
        assert!(matchgate_twirl(&chi).unwrap().max_abs_diff(&chi) > 0.1);
    }
}
