//! Highest weights, Gelfand-Tsetlin patterns, dimension formulas and Casimir spectra.

use serde::{Deserialize, Serialize};

use crate::combinat::integer_product;
use crate::error::{MgcError, Result};

/// Dominant weight `(nu_1, ..., nu_r)` of SO(k), `r = floor(k/2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HighestWeight {
    pub k: usize,
    pub parts: Vec<i32>,
}

impl HighestWeight {
    /// Checks the shape and dominance conditions; the `n` cutoff is checked by [`Self::check_n`].
    pub fn new(parts: Vec<i32>, k: usize) -> Result<Self> {
        let w = Self { k, parts };
        if w.parts.len() != k / 2 || !w.is_dominant() {
            return Err(MgcError::InvalidWeight {
                parts: w.parts,
                n: 0,
                k,
            });
        }
        Ok(w)
    }

    pub fn zero(k: usize) -> Self {
        Self {
            k,
            parts: vec![0; k / 2],
        }
    }

    fn is_dominant(&self) -> bool {
        let p = &self.parts;
        let r = p.len();
        if r == 0 {
            return true;
        }
        let free_last = self.k.is_multiple_of(2);
        let head = if free_last { r - 1 } else { r };
        if p[..head].iter().any(|&x| x < 0) || p[..head].windows(2).any(|w| w[0] < w[1]) {
            return false;
        }
        !(free_last && r >= 2 && p[r - 2] < p[r - 1].abs())
    }

    pub fn check_n(&self, n: usize) -> Result<()> {
        let top = self.parts.iter().map(|p| p.abs()).max().unwrap_or(0);
        if top as usize > n {
            return Err(MgcError::InvalidWeight {
                parts: self.parts.clone(),
                n,
                k: self.k,
            });
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|&p| p == 0)
    }
}

/// All weights of the truncated set for `(n, k)`, in lexicographic order.
pub fn enumerate_weights(n: usize, k: usize) -> Vec<HighestWeight> {
    let r = k / 2;
    let mut out = Vec::new();
    fn rec(n: i32, r: usize, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        let top = cur.last().copied().unwrap_or(n);
        for v in 0..=top {
            cur.push(v);
            rec(n, r, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(n as i32, r, &mut Vec::new(), &mut raw);
    for p in raw {
        if k.is_multiple_of(2) && r > 0 && p[r - 1] > 0 {
            let mut q = p.clone();
            q[r - 1] = -q[r - 1];
            out.push(HighestWeight { k, parts: q });
        }
        out.push(HighestWeight { k, parts: p });
    }
    out.sort();
    out
}

/// Weyl dimension of the SO(k) irrep with highest weight `w`.
pub fn weyl_dim(w: &HighestWeight) -> Result<u128> {
    if w.parts.len() != w.k / 2 || !w.is_dominant() {
        return Err(MgcError::InvalidWeight {
            parts: w.parts.clone(),
            n: 0,
            k: w.k,
        });
    }
    let r = w.parts.len() as i128;
    let l: Vec<i128> = w.parts.iter().map(|&p| p as i128).collect();
    let mut factors = Vec::new();
    if w.k % 2 == 1 {
        for i in 1..=r {
            let li = l[(i - 1) as usize];
            factors.push((2 * li + 2 * r - 2 * i + 1, 2 * r - 2 * i + 1));
        }
        for i in 1..=r {
            for j in i + 1..=r {
                let (li, lj) = (l[(i - 1) as usize], l[(j - 1) as usize]);
                factors.push((li - lj + j - i, j - i));
                factors.push((li + lj + 2 * r - i - j + 1, 2 * r - i - j + 1));
            }
        }
    } else {
        for i in 1..=r {
            for j in i + 1..=r {
                let (li, lj) = (l[(i - 1) as usize], l[(j - 1) as usize]);
                factors.push((li - lj + j - i, j - i));
                factors.push((li + lj + 2 * r - i - j, 2 * r - i - j));
            }
        }
    }
    integer_product(factors).ok_or_else(|| MgcError::Unsupported("Weyl dimension overflow".into()))
}

/// `prod_{1<=i<=j<=k-1} (2n+i+j-1)/(i+j-1)`.
pub fn commutant_dim(n: usize, k: usize) -> u128 {
    let n = n as i128;
    let mut factors = Vec::new();
    for i in 1..k as i128 {
        for j in i..k as i128 {
            factors.push((2 * n + i + j - 1, i + j - 1));
        }
    }
    integer_product(factors).expect("commutant dimension overflows u128")
}

/// `sum_nu (dim V_nu)^2` over the truncated weight set.
pub fn commutant_dim_sum_of_squares(n: usize, k: usize) -> u128 {
    enumerate_weights(n, k)
        .iter()
        .map(|w| {
            let d = weyl_dim(w).expect("enumerated weights are valid");
            d * d
        })
        .sum()
}

/// Labels down the chain SO(k) > SO(k-1) > ... > SO(2).
///
/// k=2: `()`; k=3: `(m)`; k=4: `(s, m)`; k=5: `(mu1, mu2, s, m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GtPattern {
    pub labels: Vec<i32>,
}

impl GtPattern {
    pub fn new(labels: Vec<i32>) -> Self {
        Self { labels }
    }
}

/// Intermediate SO(4) weights below an SO(5) weight.
pub(crate) fn so4_children(nu: &[i32]) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for mu1 in nu[1]..=nu[0] {
        for mu2 in -nu[1]..=nu[1] {
            out.push((mu1, mu2));
        }
    }
    out
}

/// Spin labels `s` below an SO(4) weight `(mu1, mu2)`.
pub(crate) fn so3_children(mu1: i32, mu2: i32) -> std::ops::RangeInclusive<i32> {
    mu2.abs()..=mu1
}

/// All GT patterns of `w`, lexicographic.
pub fn gt_patterns(w: &HighestWeight) -> Result<Vec<GtPattern>> {
    let p = &w.parts;
    let mut out = Vec::new();
    match w.k {
        2 => out.push(GtPattern::new(vec![])),
        3 => {
            for m in -p[0]..=p[0] {
                out.push(GtPattern::new(vec![m]));
            }
        }
        4 => {
            for s in so3_children(p[0], p[1]) {
                for m in -s..=s {
                    out.push(GtPattern::new(vec![s, m]));
                }
            }
        }
        5 => {
            for (mu1, mu2) in so4_children(p) {
                for s in so3_children(mu1, mu2) {
                    for m in -s..=s {
                        out.push(GtPattern::new(vec![mu1, mu2, s, m]));
                    }
                }
            }
        }
        k => {
            return Err(MgcError::Unsupported(format!(
                "Gelfand-Tsetlin patterns for k={k}"
            )))
        }
    }
    out.sort();
    Ok(out)
}

pub fn is_valid_pattern(w: &HighestWeight, pat: &GtPattern) -> bool {
    gt_patterns(w).map(|v| v.contains(pat)).unwrap_or(false)
}

/// Kinds of chain Casimirs.
///
/// `Quartic` is the level-5 operator normalised so that its eigenvalue is
/// `(nu1+3/2)^2 (nu2+1/2)^2 - 9/16`; it is a fixed polynomial in the quadratic
/// and fourth trace-power invariants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CasimirKind {
    Quadratic,
    TracePower,
    Pfaffian,
    Quartic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CasimirSpec {
    pub level: usize,
    pub index: usize,
    pub kind: CasimirKind,
}

impl CasimirSpec {
    pub fn new(level: usize, index: usize, kind: CasimirKind) -> Result<Self> {
        let s = Self { level, index, kind };
        s.validate()?;
        Ok(s)
    }

    pub fn quadratic(level: usize) -> Self {
        Self {
            level,
            index: 1,
            kind: CasimirKind::Quadratic,
        }
    }

    pub fn pfaffian(level: usize) -> Self {
        Self {
            level,
            index: level / 2,
            kind: CasimirKind::Pfaffian,
        }
    }

    pub fn quartic5() -> Self {
        Self {
            level: 5,
            index: 2,
            kind: CasimirKind::Quartic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.level;
        let ok = m >= 2
            && match self.kind {
                CasimirKind::Quadratic => self.index == 1,
                CasimirKind::TracePower => self.index >= 1 && self.index <= m / 2,
                CasimirKind::Pfaffian => m.is_multiple_of(2) && self.index == m / 2,
                CasimirKind::Quartic => m == 5 && self.index == 2,
            };
        if ok {
            Ok(())
        } else {
            Err(MgcError::InvalidCasimir(format!("{self:?}")))
        }
    }
}

/// `rho` shifts: `r - i` for D_r, `r - i + 1/2` for B_r (1-based `i`).
fn shifted(w: &HighestWeight) -> Vec<f64> {
    let r = w.parts.len();
    let half = if w.k % 2 == 1 { 0.5 } else { 0.0 };
    w.parts
        .iter()
        .enumerate()
        .map(|(i, &p)| p as f64 + (r - 1 - i) as f64 + half)
        .collect()
}

fn quadratic_eigenvalue(w: &HighestWeight) -> f64 {
    let r = w.parts.len() as i64;
    let odd = (w.k % 2) as i64;
    -w.parts
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let (p, j) = (p as i64, j as i64 + 1);
            p * (p + 2 * r - 2 * j + odd)
        })
        .sum::<i64>() as f64
}

fn trace4_raw(l: &[f64], m: usize) -> f64 {
    let s1: f64 = l.iter().map(|x| x * x).sum();
    let mut s2 = 0.0;
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            s2 += l[i] * l[i] * l[j] * l[j];
        }
    }
    2.0 * s1 * s1 - 4.0 * s2 - (m as f64 - 2.0) * s1
}

/// Exact eigenvalue of a chain Casimir on the irrep `w` (its level must equal `w.k`).
pub fn casimir_eigenvalue(w: &HighestWeight, spec: &CasimirSpec) -> Result<f64> {
    spec.validate()?;
    if spec.level != w.k {
        return Err(MgcError::InvalidCasimir(format!(
            "level {} does not match weight of SO({})",
            spec.level, w.k
        )));
    }
    let p = &w.parts;
    match (spec.kind, spec.index) {
        (CasimirKind::Quadratic, _) | (CasimirKind::TracePower, 1) => {
            let c = quadratic_eigenvalue(w);
            Ok(if spec.kind == CasimirKind::Quadratic {
                c
            } else {
                -2.0 * c
            })
        }
        (CasimirKind::TracePower, 2) if w.k <= 5 => {
            let l = shifted(w);
            let l0 = shifted(&HighestWeight::zero(w.k));
            Ok(trace4_raw(&l, w.k) - trace4_raw(&l0, w.k))
        }
        (CasimirKind::Pfaffian, _) if w.k == 4 => Ok((p[1] * (p[0] + 1)) as f64),
        (CasimirKind::Quartic, _) => {
            let a = p[0] as f64 + 1.5;
            let b = p[1] as f64 + 0.5;
            Ok(a * a * b * b - 9.0 / 16.0)
        }
        _ => Err(MgcError::Unsupported(format!(
            "closed eigenvalue for {spec:?} on SO({})",
            w.k
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hw(parts: &[i32], k: usize) -> HighestWeight {
        HighestWeight::new(parts.to_vec(), k).unwrap()
    }

    #[test]
    fn weight_enumeration() {
        let parts = |n, k| -> Vec<Vec<i32>> {
            enumerate_weights(n, k)
                .into_iter()
                .map(|w| w.parts)
                .collect()
        };
        assert_eq!(parts(1, 2), vec![vec![-1], vec![0], vec![1]]);
        assert_eq!(
            parts(1, 4),
            vec![vec![0, 0], vec![1, -1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(parts(2, 3), vec![vec![0], vec![1], vec![2]]);
        assert!(HighestWeight::new(vec![0, 1], 4).is_err());
        assert!(HighestWeight::new(vec![1, -1], 5).is_err());
        assert!(HighestWeight::new(vec![-1], 3).is_err());
    }

    #[test]
    fn weyl_dimensions() {
        assert_eq!(weyl_dim(&hw(&[2], 3)).unwrap(), 5);
        assert_eq!(weyl_dim(&hw(&[1, 0], 4)).unwrap(), 4);
        assert_eq!(weyl_dim(&hw(&[1, 0], 5)).unwrap(), 5);
        assert_eq!(weyl_dim(&hw(&[1, 1], 5)).unwrap(), 10);
        assert_eq!(weyl_dim(&hw(&[-3], 2)).unwrap(), 1);
        // adjoint of SO(6) has dimension 15
        assert_eq!(weyl_dim(&hw(&[1, 1, 0], 6)).unwrap(), 15);
    }

    #[test]
    fn commutant_dimensions() {
        for n in 1..=4 {
            assert_eq!(commutant_dim(n, 2), 2 * n as u128 + 1);
            for k in 1..=7 {
                assert_eq!(
                    commutant_dim(n, k),
                    commutant_dim_sum_of_squares(n, k),
                    "n={n} k={k}"
                );
            }
        }
        assert_eq!(commutant_dim(1, 4), 35);
        assert_eq!(commutant_dim(1, 5), 126);
        assert_eq!(commutant_dim(1, 1), 1);
    }

    #[test]
    fn pattern_counts_match_dimensions() {
        for k in 2..=5 {
            for n in 1..=3 {
                for w in enumerate_weights(n, k) {
                    assert_eq!(
                        gt_patterns(&w).unwrap().len() as u128,
                        weyl_dim(&w).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn eigenvalues() {
        let q4 = CasimirSpec::quadratic(4);
        let pf = CasimirSpec::pfaffian(4);
        let w = hw(&[1, 1], 4);
        assert_eq!(casimir_eigenvalue(&w, &q4).unwrap(), -4.0);
        assert_eq!(casimir_eigenvalue(&w, &pf).unwrap(), 2.0);
        assert_eq!(
            casimir_eigenvalue(&hw(&[0, 0], 5), &CasimirSpec::quartic5()).unwrap(),
            0.0
        );
        assert_eq!(
            casimir_eigenvalue(&hw(&[1, 0], 5), &CasimirSpec::quartic5()).unwrap(),
            1.0
        );
        assert_eq!(
            casimir_eigenvalue(&hw(&[0], 3), &CasimirSpec::quadratic(3)).unwrap(),
            0.0
        );
        assert_eq!(
            casimir_eigenvalue(&hw(&[1], 3), &CasimirSpec::quadratic(3)).unwrap(),
            -2.0
        );
        let t4 = CasimirSpec::new(5, 2, CasimirKind::TracePower).unwrap();
        let vals: Vec<f64> = [[1, 0], [1, 1], [2, 0], [2, 1], [2, 2]]
            .iter()
            .map(|p| casimir_eigenvalue(&hw(p, 5), &t4).unwrap())
            .collect();
        assert_eq!(vals, vec![56.0, 60.0, 260.0, 264.0, 320.0]);
        assert!(CasimirSpec::new(3, 2, CasimirKind::Pfaffian).is_err());
        assert!(CasimirSpec::new(4, 3, CasimirKind::TracePower).is_err());
    }
}
