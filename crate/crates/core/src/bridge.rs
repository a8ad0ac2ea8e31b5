//! Bridge operators and the Casimir tower of the replica so(k) action.
//!
//! Plain replica Majoranas on different tensor slots commute, so the naive
//! bilinears `sum_mu gamma_mu^(a) gamma_mu^(b)` only close into so(k) for
//! k = 2. We dress each replica Majorana with parity strings (a Klein
//! transformation) so that all `k * 2n` of them anticommute:
//!
//! `gt^(a)_mu = i^[a odd] gamma_mu^(a) prod_{c in C_a} P^(c)`,
//! `C_a = {1..a-1} + {a if a odd}`,
//!
//! and set `Lambda_ab = sum_mu gt^(a)_mu gt^(b)_mu`. These are anti-Hermitian,
//! obey the so(k) relations exactly, annihilate the replicated vacuum and
//! commute with `U^{(x)k}` for every matchgate, including reflections.

use crate::error::{MgcError, Result};
use crate::majorana::{mode_mask, OperatorExpansion, C64, ONE};
use crate::weights::{CasimirKind, CasimirSpec};

fn check_pair(a: usize, b: usize, k: usize) -> Result<()> {
    if a == 0 || a > k {
        return Err(MgcError::IndexOutOfRange { index: a, max: k });
    }
    if b == 0 || b > k {
        return Err(MgcError::IndexOutOfRange { index: b, max: k });
    }
    if a >= b {
        return Err(MgcError::InvalidCasimir(format!(
            "bridge indices must satisfy a < b, got ({a}, {b})"
        )));
    }
    Ok(())
}

/// Klein-dressed Majorana `gt^(a)_mu` (1-based `a`, `mu`).
pub fn klein_majorana(a: usize, mu: usize, n: usize, k: usize) -> Result<OperatorExpansion> {
    if mu == 0 || mu > 2 * n {
        return Err(MgcError::IndexOutOfRange {
            index: mu,
            max: 2 * n,
        });
    }
    if a == 0 || a > k {
        return Err(MgcError::IndexOutOfRange { index: a, max: k });
    }
    let full = mode_mask(n);
    let parity_sign = if n.is_multiple_of(2) { ONE } else { -ONE };
    let g = OperatorExpansion::single(n, &[1u64 << (mu - 1)], ONE)?;
    let p = OperatorExpansion::single(n, &[full], parity_sign)?;
    let odd = a % 2 == 1;
    let mut out: Option<OperatorExpansion> = None;
    for c in 1..=k {
        let factor = if c < a {
            p.clone()
        } else if c == a {
            if odd {
                (&g * &p).scale(C64::new(0.0, 1.0))
            } else {
                g.clone()
            }
        } else {
            OperatorExpansion::identity(n, 1)?
        };
        out = Some(match out {
            None => factor,
            Some(acc) => acc.tensor(&factor)?,
        });
    }
    Ok(out.expect("k >= 1"))
}

/// `Lambda_ab` for `1 <= a < b <= k`.
pub fn bridge_operator(a: usize, b: usize, n: usize, k: usize) -> Result<OperatorExpansion> {
    check_pair(a, b, k)?;
    let mut acc = OperatorExpansion::zero(n, k)?;
    for mu in 1..=2 * n {
        let ga = klein_majorana(a, mu, n, k)?;
        let gb = klein_majorana(b, mu, n, k)?;
        acc = &acc + &(&ga * &gb);
    }
    Ok(acc)
}

/// Undressed `sum_mu gamma_mu^(a) (x) gamma_mu^(b)`; commutes with `U^{(x)k}` but is not an so(k) generator for k >= 3.
pub fn plain_bridge_operator(a: usize, b: usize, n: usize, k: usize) -> Result<OperatorExpansion> {
    check_pair(a, b, k)?;
    let mut terms = Vec::with_capacity(2 * n);
    for mu in 0..2 * n {
        let mut masks = vec![0u64; k];
        masks[a - 1] = 1 << mu;
        masks[b - 1] = 1 << mu;
        terms.push((crate::majorana::pack(n, &masks), ONE));
    }
    OperatorExpansion::from_keys(n, k, terms)
}

/// Antisymmetric table of generators, `lam[a][b] = Lambda_{a+1,b+1}` (0-based).
#[derive(Clone, Debug)]
pub struct Bridges {
    n: usize,
    k: usize,
    lam: Vec<Vec<OperatorExpansion>>,
}

impl Bridges {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let zero = OperatorExpansion::zero(n, k)?;
        let mut lam = vec![vec![zero; k]; k];
        for a in 0..k {
            for b in a + 1..k {
                let op = bridge_operator(a + 1, b + 1, n, k)?;
                lam[b][a] = -&op;
                lam[a][b] = op;
            }
        }
        Ok(Self { n, k, lam })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `Lambda_{a+1, b+1}` with 0-based indices, any order.
    pub fn get(&self, a: usize, b: usize) -> &OperatorExpansion {
        &self.lam[a][b]
    }

    /// Right-hand side of the so(k) relation for `[Lambda_ab, Lambda_cd]` (0-based).
    pub fn structure(&self, a: usize, b: usize, c: usize, d: usize) -> OperatorExpansion {
        let mut acc = OperatorExpansion::zero(self.n, self.k).expect("valid shape");
        let two = C64::new(2.0, 0.0);
        if b == c {
            acc = acc.combine(ONE, &self.lam[a][d], two).expect("same shape");
        }
        if a == c {
            acc = acc.combine(ONE, &self.lam[b][d], -two).expect("same shape");
        }
        if b == d {
            acc = acc.combine(ONE, &self.lam[a][c], -two).expect("same shape");
        }
        if a == d {
            acc = acc.combine(ONE, &self.lam[b][c], two).expect("same shape");
        }
        acc
    }

    /// Operator matrix `A_ab = Lambda_ab / 2` restricted to the first `m` replicas.
    fn half_matrix(&self, m: usize) -> Vec<Vec<OperatorExpansion>> {
        (0..m)
            .map(|a| (0..m).map(|b| self.lam[a][b].scale_real(0.5)).collect())
            .collect()
    }

    pub fn casimir(&self, spec: &CasimirSpec) -> Result<OperatorExpansion> {
        spec.validate()?;
        let m = spec.level;
        if m > self.k {
            return Err(MgcError::InvalidCasimir(format!(
                "level {m} exceeds k={}",
                self.k
            )));
        }
        match spec.kind {
            CasimirKind::Quadratic => Ok(self.quadratic(m)),
            CasimirKind::TracePower => Ok(self.trace_power(m, spec.index)),
            CasimirKind::Pfaffian => {
                let a = self.half_matrix(m);
                let idx: Vec<usize> = (0..m).collect();
                Ok(pfaffian(&a, &idx, self.n, self.k))
            }
            CasimirKind::Quartic => {
                let c1 = self.quadratic(5);
                let t4 = self.trace_power(5, 2);
                let id = OperatorExpansion::identity(self.n, self.k)?;
                // E = 5/2 - C1 ; C4 = (2E^2 - 3E - 11/4 - T4)/4 - 9/16
                let e = id.combine(C64::new(2.5, 0.0), &c1, -ONE)?;
                let e2 = &e * &e;
                let poly = e2
                    .combine(C64::new(2.0, 0.0), &e, C64::new(-3.0, 0.0))?
                    .combine(ONE, &id, C64::new(-2.75, 0.0))?
                    .combine(ONE, &t4, -ONE)?;
                poly.combine(C64::new(0.25, 0.0), &id, C64::new(-9.0 / 16.0, 0.0))
            }
        }
    }

    fn quadratic(&self, m: usize) -> OperatorExpansion {
        let mut acc = OperatorExpansion::zero(self.n, self.k).expect("valid shape");
        for a in 0..m {
            for b in a + 1..m {
                let sq = &self.lam[a][b] * &self.lam[a][b];
                acc = acc
                    .combine(ONE, &sq, C64::new(0.25, 0.0))
                    .expect("same shape");
            }
        }
        acc
    }

    fn trace_power(&self, m: usize, j: usize) -> OperatorExpansion {
        let a = self.half_matrix(m);
        let zero = OperatorExpansion::zero(self.n, self.k).expect("valid shape");
        let matmul = |x: &Vec<Vec<OperatorExpansion>>, y: &Vec<Vec<OperatorExpansion>>| {
            let mut out = vec![vec![zero.clone(); m]; m];
            for r in 0..m {
                for c in 0..m {
                    let mut acc = zero.clone();
                    for t in 0..m {
                        if x[r][t].is_empty() || y[t][c].is_empty() {
                            continue;
                        }
                        acc = &acc + &(&x[r][t] * &y[t][c]);
                    }
                    out[r][c] = acc;
                }
            }
            out
        };
        let a2 = matmul(&a, &a);
        let mut p = a2.clone();
        for _ in 1..j {
            p = matmul(&p, &a2);
        }
        (0..m).fold(zero.clone(), |acc, i| &acc + &p[i][i])
    }
}

/// Pfaffian by expansion along the first index; the entries multiplied in one
/// term act on disjoint replica pairs and therefore commute.
fn pfaffian(a: &[Vec<OperatorExpansion>], idx: &[usize], n: usize, k: usize) -> OperatorExpansion {
    if idx.is_empty() {
        return OperatorExpansion::identity(n, k).expect("valid shape");
    }
    let first = idx[0];
    let mut acc = OperatorExpansion::zero(n, k).expect("valid shape");
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let rest: Vec<usize> = idx
            .iter()
            .copied()
            .filter(|&x| x != first && x != j)
            .collect();
        let sub = pfaffian(a, &rest, n, k);
        let term = &a[first][j] * &sub;
        let sign = if pos % 2 == 1 { ONE } else { -ONE };
        acc = acc.combine(ONE, &term, sign).expect("same shape");
    }
    acc
}

/// `casimir(spec)` on `k` replicas of `n` qubits.
pub fn casimir(spec: &CasimirSpec, n: usize, k: usize) -> Result<OperatorExpansion> {
    Bridges::new(n, k)?.casimir(spec)
}

/// Largest coefficient of `[C, Lambda_ab]` over all generators of the first `level` replicas.
pub fn casimir_commutator_residual(b: &Bridges, c: &OperatorExpansion, level: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for x in 0..level {
        for y in x + 1..level {
            let comm = c.commutator(b.get(x, y)).expect("same shape");
            let m = comm.terms().iter().map(|t| t.1.norm()).fold(0.0, f64::max);
            worst = worst.max(m);
        }
    }
    worst
}

/// Whether every so(k) relation holds coefficient-exactly.
pub fn so_k_relations_exact(b: &Bridges) -> bool {
    let k = b.k();
    for x in 0..k {
        for y in x + 1..k {
            for z in 0..k {
                for w in z + 1..k {
                    let lhs = b.get(x, y).commutator(b.get(z, w)).expect("same shape");
                    if lhs != b.structure(x, y, z, w) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
