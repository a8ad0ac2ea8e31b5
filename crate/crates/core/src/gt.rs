//! Gelfand-Tsetlin basis of the matchgate commutant for k = 2..5.
//!
//! Everything is computed in Clifford-matchgate pattern coordinates: the
//! matchgate commutant is a subalgebra of the pattern span, and left
//! multiplication by a bridge or Casimir is a sparse matrix there.

use std::collections::{HashMap, VecDeque};

use crate::bridge::Bridges;
use crate::clifford::{PatternSpace, SparseMatrix};
use crate::combinat::factorial_f64;
use crate::error::{MgcError, Result};
use crate::majorana::{OperatorExpansion, C64, ONE, ZERO};
use crate::weights::{
    casimir_eigenvalue, enumerate_weights, gt_patterns, weyl_dim, CasimirSpec, GtPattern,
    HighestWeight,
};
use nalgebra::DMatrix;

/// Largest `n` for which k=5 bases are built unless overridden.
pub const DEFAULT_MAX_N_K5: usize = 1;
/// Largest total number of string terms `gt_basis` will expand.
pub const MAX_EXPANDED_TERMS: u128 = 50_000_000;

const PHASE_REL_TOL: f64 = 1e-8;
const KRYLOV_TOL: f64 = 1e-9;

/// One chain Casimir: its left-multiplication matrix and eigenvalue rule.
struct ChainOp {
    mat: SparseMatrix,
    /// Number of pattern labels (beyond the top weight) fixing the eigenvalue.
    depth: usize,
    eig: fn(&HighestWeight, &GtPattern) -> Result<C64>,
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn eig_top_quadratic(w: &HighestWeight, _: &GtPattern) -> Result<C64> {
    casimir_eigenvalue(w, &CasimirSpec::quadratic(w.k)).map(real)
}

fn eig_top_second(w: &HighestWeight, _: &GtPattern) -> Result<C64> {
    let spec = if w.k == 4 {
        CasimirSpec::pfaffian(4)
    } else {
        CasimirSpec::quartic5()
    };
    casimir_eigenvalue(w, &spec).map(real)
}

fn eig_k2(w: &HighestWeight, _: &GtPattern) -> Result<C64> {
    Ok(C64::new(0.0, w.parts[0] as f64))
}

fn so4_label(p: &GtPattern) -> Result<HighestWeight> {
    HighestWeight::new(vec![p.labels[0], p.labels[1]], 4)
}

fn eig_so4_quadratic(_: &HighestWeight, p: &GtPattern) -> Result<C64> {
    casimir_eigenvalue(&so4_label(p)?, &CasimirSpec::quadratic(4)).map(real)
}

fn eig_so4_pfaffian(_: &HighestWeight, p: &GtPattern) -> Result<C64> {
    casimir_eigenvalue(&so4_label(p)?, &CasimirSpec::pfaffian(4)).map(real)
}

fn eig_so3(_: &HighestWeight, p: &GtPattern) -> Result<C64> {
    let s = p.labels[p.labels.len() - 2] as f64;
    Ok(real(-s * (s + 1.0)))
}

fn eig_so2(_: &HighestWeight, p: &GtPattern) -> Result<C64> {
    Ok(C64::new(0.0, p.labels[p.labels.len() - 1] as f64))
}

/// Exact comparison key (eigenvalues are multiples of 1/16).
fn eig_key(c: C64) -> (i64, i64) {
    ((c.re * 16.0).round() as i64, (c.im * 16.0).round() as i64)
}

fn minner(mult: &[f64], a: &[C64], b: &[C64]) -> C64 {
    a.iter()
        .zip(b)
        .zip(mult)
        .map(|((x, y), m)| x.conj() * y * m)
        .sum()
}

fn mnorm(mult: &[f64], a: &[C64]) -> f64 {
    minner(mult, a, a).re.max(0.0).sqrt()
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (u, v) in y.iter_mut().zip(x) {
        *u += a * v;
    }
}

fn pattern_string(p: &GtPattern) -> String {
    format!("{:?}", p.labels)
}

/// A basis element in pattern coordinates.
#[derive(Clone, Debug)]
pub struct GtElement {
    pub weight: HighestWeight,
    pub source: GtPattern,
    pub target: GtPattern,
    pub coords: Vec<C64>,
}

/// Basis element expanded into Majorana strings.
#[derive(Clone, Debug)]
pub struct GtBasisElement {
    pub weight: HighestWeight,
    pub source: GtPattern,
    pub target: GtPattern,
    pub op: OperatorExpansion,
}

impl GtBasisElement {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "weight": self.weight.parts,
            "source_pattern": self.source.labels,
            "target_pattern": self.target.labels,
            "operator": self.op.to_json(),
        })
    }
}

/// Ladder operators of the chain as index combinations of the generators.
type Ladder = Vec<Vec<((usize, usize), C64)>>;

fn ladders(k: usize) -> Ladder {
    let h = C64::new(0.5, 0.0);
    let ih = C64::new(0.0, 0.5);
    let mut out: Ladder = Vec::new();
    if k >= 3 {
        // M_+- = (Lambda_23 -+ i Lambda_13) / 2
        out.push(vec![((1, 2), h), ((0, 2), -ih)]);
        out.push(vec![((1, 2), h), ((0, 2), ih)]);
    }
    if k >= 4 {
        out.push(vec![((0, 3), h), ((1, 3), ih)]);
        out.push(vec![((0, 3), -h), ((1, 3), ih)]);
        out.push(vec![((2, 3), h)]);
    }
    if k >= 5 {
        let i = C64::new(0.0, 1.0);
        out.push(vec![((3, 4), ONE)]);
        out.push(vec![((2, 4), ONE)]);
        out.push(vec![((0, 4), ONE), ((1, 4), i)]);
        out.push(vec![((0, 4), -ONE), ((1, 4), i)]);
        out.push(vec![((0, 4), ONE)]);
        out.push(vec![((1, 4), ONE)]);
    }
    out
}

/// Irreducible block `Com * P_{nu, n}` with restricted operators.
struct Block {
    patterns: Vec<GtPattern>,
    /// Orthonormal columns (pattern coordinates).
    q: Vec<Vec<C64>>,
    /// Coordinates of `P_{nu,n}` in `q`.
    start: Vec<C64>,
    projectors: Vec<DMatrix<C64>>,
    ladders: Vec<DMatrix<C64>>,
}

/// Pattern-coordinate engine for GT constructions at fixed `(n, k)`.
pub struct GtEngine {
    n: usize,
    k: usize,
    space: PatternSpace,
    mult: Vec<f64>,
    generators: Vec<Vec<Option<SparseMatrix>>>,
    chain: Vec<ChainOp>,
    weights: Vec<HighestWeight>,
    memo: HashMap<(Vec<i32>, Vec<i32>, usize), Vec<C64>>,
}

impl GtEngine {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        Self::with_k5_limit(n, k, DEFAULT_MAX_N_K5)
    }

    pub fn with_k5_limit(n: usize, k: usize, max_n_k5: usize) -> Result<Self> {
        if !(2..=5).contains(&k) {
            return Err(MgcError::Unsupported(format!(
                "Gelfand-Tsetlin construction for k={k}"
            )));
        }
        if k == 5 && n > max_n_k5 {
            return Err(MgcError::Capacity {
                what: "k=5 Gelfand-Tsetlin basis (n)".into(),
                requested: n as u128,
                limit: max_n_k5 as u128,
            });
        }
        let space = PatternSpace::new(n, k)?;
        let bridges = Bridges::new(n, k)?;
        let mut generators = vec![vec![None; k]; k];
        for a in 0..k {
            for b in a + 1..k {
                generators[a][b] = Some(space.left_mul_matrix(bridges.get(a, b))?);
            }
        }
        let half12 = bridges.get(0, 1).scale_real(0.5);
        let mut chain = Vec::new();
        let mut push = |op: &OperatorExpansion, depth, eig| -> Result<()> {
            chain.push(ChainOp {
                mat: space.left_mul_matrix(op)?,
                depth,
                eig,
            });
            Ok(())
        };
        match k {
            2 => push(&half12, 0, eig_k2)?,
            3 => {
                push(
                    &bridges.casimir(&CasimirSpec::quadratic(3))?,
                    0,
                    eig_top_quadratic,
                )?;
                push(&half12, 1, eig_so2)?;
            }
            4 => {
                push(
                    &bridges.casimir(&CasimirSpec::quadratic(4))?,
                    0,
                    eig_top_quadratic,
                )?;
                push(
                    &bridges.casimir(&CasimirSpec::pfaffian(4))?,
                    0,
                    eig_top_second,
                )?;
                push(&bridges.casimir(&CasimirSpec::quadratic(3))?, 1, eig_so3)?;
                push(&half12, 2, eig_so2)?;
            }
            _ => {
                push(
                    &bridges.casimir(&CasimirSpec::quadratic(5))?,
                    0,
                    eig_top_quadratic,
                )?;
                push(
                    &bridges.casimir(&CasimirSpec::quartic5())?,
                    0,
                    eig_top_second,
                )?;
                push(
                    &bridges.casimir(&CasimirSpec::quadratic(4))?,
                    2,
                    eig_so4_quadratic,
                )?;
                push(
                    &bridges.casimir(&CasimirSpec::pfaffian(4))?,
                    2,
                    eig_so4_pfaffian,
                )?;
                push(&bridges.casimir(&CasimirSpec::quadratic(3))?, 3, eig_so3)?;
                push(&half12, 4, eig_so2)?;
            }
        }
        let mult = (0..space.dim())
            .map(|i| space.multiplicity(i) as f64)
            .collect();
        Ok(Self {
            n,
            k,
            space,
            mult,
            generators,
            chain,
            weights: enumerate_weights(n, k),
            memo: HashMap::new(),
        })
    }

    pub fn space(&self) -> &PatternSpace {
        &self.space
    }

    pub fn weights(&self) -> &[HighestWeight] {
        &self.weights
    }

    fn check_weight(&self, w: &HighestWeight) -> Result<()> {
        if w.k != self.k || !self.weights.contains(w) {
            return Err(MgcError::InvalidWeight {
                parts: w.parts.clone(),
                n: self.n,
                k: self.k,
            });
        }
        Ok(())
    }

    fn check_pattern(&self, w: &HighestWeight, p: &GtPattern) -> Result<()> {
        if !gt_patterns(w)?.contains(p) {
            return Err(MgcError::InvalidPattern {
                labels: p.labels.clone(),
                weight: w.parts.clone(),
            });
        }
        Ok(())
    }

    fn identity_coords(&self) -> Vec<C64> {
        let mut v = vec![ZERO; self.space.dim()];
        v[self.space.identity_index()] = ONE;
        v
    }

    fn top_ops(&self) -> usize {
        self.chain.iter().filter(|c| c.depth == 0).count()
    }

    /// Coordinates after resolving the first `upto` chain operators.
    fn resolve(&mut self, w: &HighestWeight, p: &GtPattern, upto: usize) -> Result<Vec<C64>> {
        if upto == 0 {
            return Ok(self.identity_coords());
        }
        let depth = self.chain[upto - 1].depth;
        let key = (
            w.parts.clone(),
            p.labels[..depth.min(p.labels.len())].to_vec(),
            upto,
        );
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let prev = self.resolve(w, p, upto - 1)?;
        // eigenvalues of the operator on components compatible with the resolved prefix
        let mine: Vec<C64> = (0..upto)
            .map(|j| (self.chain[j].eig)(w, p))
            .collect::<Result<_>>()?;
        let target = eig_key(mine[upto - 1]);
        let mut others: Vec<C64> = Vec::new();
        for w2 in &self.weights {
            for p2 in gt_patterns(w2)? {
                let theirs: Vec<C64> = (0..upto)
                    .map(|j| (self.chain[j].eig)(w2, &p2))
                    .collect::<Result<_>>()?;
                let same_prefix = (0..upto - 1).all(|j| eig_key(theirs[j]) == eig_key(mine[j]));
                let e = theirs[upto - 1];
                if same_prefix
                    && eig_key(e) != target
                    && !others.iter().any(|o| eig_key(*o) == eig_key(e))
                {
                    others.push(e);
                }
            }
        }
        let lam = mine[upto - 1];
        let mut v = prev;
        for mu in others {
            let lv = self.chain[upto - 1].mat.apply(&v);
            let denom = lam - mu;
            v = lv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - mu * b) / denom)
                .collect();
        }
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    /// Pattern coordinates of the isotypic projector `P_nu`.
    pub fn sector_coords(&mut self, w: &HighestWeight) -> Result<Vec<C64>> {
        self.check_weight(w)?;
        let p = gt_patterns(w)?.remove(0);
        let top = self.top_ops();
        self.resolve(w, &p, top)
    }

    /// Pattern coordinates of the one-dimensional GT projector `P_{nu, pattern}`.
    pub fn projector_coords(&mut self, w: &HighestWeight, p: &GtPattern) -> Result<Vec<C64>> {
        self.check_weight(w)?;
        self.check_pattern(w, p)?;
        let all = self.chain.len();
        self.resolve(w, p, all)
    }

    fn gen(&self, a: usize, b: usize) -> &SparseMatrix {
        self.generators[a][b].as_ref().expect("a < b")
    }

    fn restrict(&self, q: &[Vec<C64>], mat: &SparseMatrix) -> DMatrix<C64> {
        let d = q.len();
        let images: Vec<Vec<C64>> = q.iter().map(|c| mat.apply(c)).collect();
        DMatrix::from_fn(d, d, |r, c| minner(&self.mult, &q[r], &images[c]))
    }

    fn block(&mut self, w: &HighestWeight, p: &GtPattern) -> Result<Block> {
        let start = self.projector_coords(w, p)?;
        let norm = mnorm(&self.mult, &start);
        if norm < 1e-12 {
            return Err(MgcError::ConstructionFailure {
                path: vec![pattern_string(p)],
            });
        }
        let mut q: Vec<Vec<C64>> = Vec::new();
        // every queued vector is an image of a unit vector, so the cutoff is absolute
        let mut queue = VecDeque::from([start.iter().map(|c| c / norm).collect::<Vec<_>>()]);
        while let Some(mut v) = queue.pop_front() {
            for _ in 0..2 {
                for b in &q {
                    let c = minner(&self.mult, b, &v);
                    axpy(&mut v, -c, b);
                }
            }
            let after = mnorm(&self.mult, &v);
            if after <= KRYLOV_TOL {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= after);
            for a in 0..self.k {
                for b in a + 1..self.k {
                    queue.push_back(self.gen(a, b).apply(&v));
                }
            }
            q.push(v);
        }
        let d = weyl_dim(w)? as usize;
        if q.len() != d {
            return Err(MgcError::InvalidState(format!(
                "block of weight {:?} has dimension {}, expected {d}",
                w.parts,
                q.len()
            )));
        }
        let patterns = gt_patterns(w)?;
        let restricted: Vec<DMatrix<C64>> = self
            .chain
            .iter()
            .map(|c| self.restrict(&q, &c.mat))
            .collect();
        let mut projectors = Vec::with_capacity(d);
        for pat in &patterns {
            let mut proj = DMatrix::<C64>::identity(d, d);
            for (j, op) in self.chain.iter().enumerate() {
                let lam = (op.eig)(w, pat)?;
                let mut seen = vec![eig_key(lam)];
                for other in &patterns {
                    let mu = (op.eig)(w, other)?;
                    if seen.contains(&eig_key(mu)) {
                        continue;
                    }
                    seen.push(eig_key(mu));
                    let shifted = &restricted[j] - DMatrix::<C64>::identity(d, d) * mu;
                    proj = shifted * proj / (lam - mu);
                }
            }
            projectors.push(proj);
        }
        let gens: Vec<Vec<DMatrix<C64>>> = (0..self.k)
            .map(|a| {
                (0..self.k)
                    .map(|b| {
                        if a < b {
                            self.restrict(&q, self.gen(a, b))
                        } else {
                            DMatrix::zeros(d, d)
                        }
                    })
                    .collect()
            })
            .collect();
        let ladders = ladders(self.k)
            .into_iter()
            .map(|combo| {
                combo
                    .iter()
                    .fold(DMatrix::zeros(d, d), |acc, &((a, b), c)| {
                        acc + &gens[a][b] * c
                    })
            })
            .collect();
        let start_local = DMatrix::from_fn(d, 1, |r, _| minner(&self.mult, &q[r], &start));
        Ok(Block {
            patterns,
            q,
            start: start_local.column(0).iter().copied().collect(),
            projectors,
            ladders,
        })
    }

    fn lift(&self, block: &Block, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.space.dim()];
        for (c, col) in v.iter().zip(&block.q) {
            axpy(&mut out, *c, col);
        }
        out
    }

    /// All elements `X_{m,n}` of one weight, in pattern coordinates.
    pub fn weight_elements(&mut self, w: &HighestWeight) -> Result<Vec<GtElement>> {
        self.check_weight(w)?;
        let mut out = Vec::new();
        for target in gt_patterns(w)? {
            let block = self.block(w, &target)?;
            for (si, source) in block.patterns.iter().enumerate() {
                let ti = block
                    .patterns
                    .iter()
                    .position(|p| *p == target)
                    .expect("own pattern");
                let v = walk(&block, ti, si)?;
                let coords = self.normalize(self.lift(&block, &v))?;
                out.push(GtElement {
                    weight: w.clone(),
                    source: source.clone(),
                    target: target.clone(),
                    coords,
                });
            }
        }
        Ok(out)
    }

    /// Unit HS norm, leading string coefficient real positive.
    fn normalize(&self, mut y: Vec<C64>) -> Result<Vec<C64>> {
        let hs = (self.space.hs_factor()).sqrt() * mnorm(&self.mult, &y);
        if hs < 1e-300 {
            return Err(MgcError::InvalidState("zero basis element".into()));
        }
        let (_, lead) = self
            .space
            .leading_coefficient(&y, PHASE_REL_TOL)
            .expect("nonzero");
        let phase = lead.conj() / lead.norm();
        y.iter_mut().for_each(|c| *c *= phase / hs);
        Ok(y)
    }

    /// `X_{source, target}` in pattern coordinates.
    pub fn transition_coords(
        &mut self,
        w: &HighestWeight,
        source: &GtPattern,
        target: &GtPattern,
    ) -> Result<Vec<C64>> {
        self.check_weight(w)?;
        self.check_pattern(w, source)?;
        self.check_pattern(w, target)?;
        let block = self.block(w, target)?;
        let ti = block
            .patterns
            .iter()
            .position(|p| p == target)
            .expect("checked");
        let si = block
            .patterns
            .iter()
            .position(|p| p == source)
            .expect("checked");
        let v = walk(&block, ti, si)?;
        self.normalize(self.lift(&block, &v))
    }

    /// `P_m M_(+-)^|m - m'| P_m'` at k=3, in pattern coordinates (unnormalized).
    pub fn k3_ladder_sandwich(&mut self, w: &HighestWeight, m: i32, mp: i32) -> Result<Vec<C64>> {
        if self.k != 3 {
            return Err(MgcError::Unsupported("ladder sandwich needs k=3".into()));
        }
        let target = GtPattern::new(vec![mp]);
        let source = GtPattern::new(vec![m]);
        self.check_pattern(w, &source)?;
        let block = self.block(w, &target)?;
        let si = block
            .patterns
            .iter()
            .position(|p| *p == source)
            .expect("checked");
        let step = if m >= mp {
            &block.ladders[0]
        } else {
            &block.ladders[1]
        };
        let mut v = DMatrix::from_column_slice(block.start.len(), 1, &block.start);
        for _ in 0..(m - mp).abs() {
            v = step * v;
        }
        v = &block.projectors[si] * v;
        Ok(self.lift(&block, v.as_slice()))
    }

    pub fn expand(&self, coords: &[C64]) -> Result<OperatorExpansion> {
        self.space.expand(coords)
    }

    pub fn hs_inner(&self, a: &[C64], b: &[C64]) -> C64 {
        self.space.inner(a, b) * self.space.hs_factor()
    }

    pub fn trace(&self, coords: &[C64]) -> C64 {
        coords[self.space.identity_index()] * self.space.hs_factor()
    }
}

/// Lexicographic label distance, highest chain label first.
fn distance(a: &GtPattern, b: &GtPattern) -> Vec<i32> {
    a.labels
        .iter()
        .zip(&b.labels)
        .map(|(x, y)| (x - y).abs())
        .collect()
}

/// Carries the start vector of `block` from pattern `from` to pattern `to`.
fn walk(block: &Block, from: usize, to: usize) -> Result<Vec<C64>> {
    let d = block.start.len();
    let start = DMatrix::from_column_slice(d, 1, &block.start);
    if from == to {
        return Ok(block.start.clone());
    }
    let goal = &block.patterns[to];
    // greedy
    let mut v = start.clone();
    let mut cur = from;
    let mut path = vec![pattern_string(&block.patterns[from])];
    while cur != to {
        let mut best: Option<(Vec<i32>, usize, DMatrix<C64>)> = None;
        for lad in &block.ladders {
            let moved = lad * &v;
            let scale = moved.norm();
            if scale < 1e-12 {
                continue;
            }
            for (qi, proj) in block.projectors.iter().enumerate() {
                let comp = proj * &moved;
                if comp.norm() <= 1e-8 * scale {
                    continue;
                }
                let dist = distance(&block.patterns[qi], goal);
                if dist >= distance(&block.patterns[cur], goal) {
                    continue;
                }
                if best.as_ref().is_none_or(|b| dist < b.0) {
                    best = Some((dist, qi, comp));
                }
            }
        }
        match best {
            Some((_, qi, comp)) => {
                let nrm = comp.norm();
                v = comp / C64::new(nrm, 0.0);
                cur = qi;
                path.push(pattern_string(&block.patterns[qi]));
            }
            None => break,
        }
    }
    if cur == to {
        return Ok(v.as_slice().to_vec());
    }
    bfs(block, from, to, path)
}

fn bfs(block: &Block, from: usize, to: usize, mut attempted: Vec<String>) -> Result<Vec<C64>> {
    let d = block.patterns.len();
    let mut edges = vec![Vec::new(); d];
    for p in 0..d {
        for (li, lad) in block.ladders.iter().enumerate() {
            let moved = lad * &block.projectors[p];
            for q in 0..d {
                if q != p && (&block.projectors[q] * &moved).norm() > 1e-8 {
                    edges[p].push((q, li));
                }
            }
        }
    }
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; d];
    let mut seen = vec![false; d];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(p) = queue.pop_front() {
        for &(q, li) in &edges[p] {
            if !seen[q] {
                seen[q] = true;
                prev[q] = Some((p, li));
                queue.push_back(q);
            }
        }
    }
    if !seen[to] {
        attempted.push(format!(
            "unreachable {}",
            pattern_string(&block.patterns[to])
        ));
        return Err(MgcError::ConstructionFailure { path: attempted });
    }
    let mut steps = Vec::new();
    let mut cur = to;
    while let Some((p, li)) = prev[cur] {
        steps.push((cur, li));
        cur = p;
    }
    steps.reverse();
    let mut v = DMatrix::from_column_slice(d, 1, &block.start);
    for (q, li) in steps {
        v = &block.projectors[q] * (&block.ladders[li] * v);
        let nrm = v.norm();
        if nrm < 1e-12 {
            attempted.push(pattern_string(&block.patterns[q]));
            return Err(MgcError::ConstructionFailure { path: attempted });
        }
        v /= C64::new(nrm, 0.0);
    }
    Ok(v.as_slice().to_vec())
}

/// Normalisation `sqrt((nu-m>)! (nu+m<)! / ((nu-m<)! (nu+m>)!))` for k=3 ladders,
/// with `m>`/`m<` the larger/smaller of `m`, `m'`.
pub fn k3_ladder_normalization(nu: i32, m: i32, mp: i32) -> f64 {
    let (hi, lo) = (m.max(mp), m.min(mp));
    let f = |x: i32| factorial_f64(x as u64);
    (f(nu - hi) * f(nu + lo) / (f(nu - lo) * f(nu + hi))).sqrt()
}

/// Orthonormal GT basis of the matchgate commutant, in pattern coordinates.
pub struct GtBasis {
    pub n: usize,
    pub k: usize,
    pub elements: Vec<GtElement>,
    engine: GtEngine,
}

impl GtBasis {
    pub fn build(n: usize, k: usize) -> Result<Self> {
        Self::build_with(n, k, DEFAULT_MAX_N_K5)
    }

    pub fn build_with(n: usize, k: usize, max_n_k5: usize) -> Result<Self> {
        let mut engine = GtEngine::with_k5_limit(n, k, max_n_k5)?;
        let mut elements = Vec::new();
        for w in engine.weights().to_vec() {
            elements.extend(engine.weight_elements(&w)?);
        }
        Ok(Self {
            n,
            k,
            elements,
            engine,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn engine(&self) -> &GtEngine {
        &self.engine
    }

    /// Gram matrix `Tr(X_i^dagger X_j)`.
    pub fn gram(&self) -> DMatrix<C64> {
        let m = self.len();
        DMatrix::from_fn(m, m, |i, j| {
            self.engine
                .hs_inner(&self.elements[i].coords, &self.elements[j].coords)
        })
    }

    /// Orthogonal projection of `w` onto the span, in pattern coordinates.
    pub fn project_coords(&self, w: &OperatorExpansion) -> Result<Vec<C64>> {
        let y = self.engine.space.project(w)?;
        let mut out = vec![ZERO; y.len()];
        for e in &self.elements {
            let c = self.engine.hs_inner(&e.coords, &y);
            axpy(&mut out, c, &e.coords);
        }
        Ok(out)
    }

    pub fn expand(&self, i: usize) -> Result<GtBasisElement> {
        let e = &self.elements[i];
        Ok(GtBasisElement {
            weight: e.weight.clone(),
            source: e.source.clone(),
            target: e.target.clone(),
            op: self.engine.expand(&e.coords)?,
        })
    }

    pub fn total_terms(&self) -> u128 {
        self.elements
            .iter()
            .map(|e| self.engine.space.expansion_size(&e.coords))
            .sum()
    }
}

pub fn sector_projector(w: &HighestWeight, n: usize, k: usize) -> Result<OperatorExpansion> {
    let mut e = GtEngine::new(n, k)?;
    let c = e.sector_coords(w)?;
    e.expand(&c)
}

pub fn gt_projector(
    w: &HighestWeight,
    pattern: &GtPattern,
    n: usize,
    k: usize,
) -> Result<OperatorExpansion> {
    let mut e = GtEngine::new(n, k)?;
    let c = e.projector_coords(w, pattern)?;
    e.expand(&c)
}

/// `X_{source,target}`, mapping the target GT sector onto the source sector.
pub fn transition_operator(
    w: &HighestWeight,
    source: &GtPattern,
    target: &GtPattern,
    n: usize,
    k: usize,
) -> Result<GtBasisElement> {
    let mut e = GtEngine::new(n, k)?;
    let c = e.transition_coords(w, source, target)?;
    Ok(GtBasisElement {
        weight: w.clone(),
        source: source.clone(),
        target: target.clone(),
        op: e.expand(&c)?,
    })
}

/// Expanded GT basis; refuses when the total string count exceeds [`MAX_EXPANDED_TERMS`].
pub fn gt_basis(n: usize, k: usize) -> Result<Vec<GtBasisElement>> {
    let basis = GtBasis::build(n, k)?;
    let total = basis.total_terms();
    if total > MAX_EXPANDED_TERMS {
        return Err(MgcError::Capacity {
            what: "expanded GT basis terms".into(),
            requested: total,
            limit: MAX_EXPANDED_TERMS,
        });
    }
    (0..basis.len()).map(|i| basis.expand(i)).collect()
}

pub fn gt_basis_json(basis: &[GtBasisElement]) -> serde_json::Value {
    serde_json::Value::Array(basis.iter().map(GtBasisElement::to_json).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::casimir;
    use crate::weights::commutant_dim;

    fn hw(parts: &[i32], k: usize) -> HighestWeight {
        HighestWeight::new(parts.to_vec(), k).unwrap()
    }

    fn is_unit(m: &DMatrix<C64>, tol: f64) -> bool {
        let id = DMatrix::<C64>::identity(m.nrows(), m.ncols());
        (m - id).iter().all(|c| c.norm() < tol)
    }

    #[test]
    fn k2_projectors_are_spectral() {
        let lam = crate::bridge::bridge_operator(1, 2, 1, 2).unwrap();
        let ilam = lam.scale(C64::new(0.0, 1.0));
        let mut total = OperatorExpansion::zero(1, 2).unwrap();
        for nu in -1..=1 {
            let p = sector_projector(&hw(&[nu], 2), 1, 2).unwrap();
            let lhs = &ilam * &p;
            let rhs = p.scale_real(-2.0 * nu as f64);
            assert!(lhs.max_abs_diff(&rhs) < 1e-10);
            assert!((&p * &p).max_abs_diff(&p) < 1e-10);
            total = &total + &p;
        }
        assert!(total.max_abs_diff(&OperatorExpansion::identity(1, 2).unwrap()) < 1e-10);
    }

    #[test]
    fn sectors_are_complete_with_trace_bookkeeping() {
        for (n, k) in [(1, 3), (2, 3), (1, 4), (2, 4), (1, 5)] {
            let mut e = GtEngine::new(n, k).unwrap();
            let mut sum = vec![ZERO; e.space().dim()];
            for w in e.weights().to_vec() {
                let p = e.sector_coords(&w).unwrap();
                let d = weyl_dim(&w).unwrap() as f64;
                // Tr P_nu = dim V_nu * multiplicity; summed d^2 gives the commutant dimension
                let tr = e.trace(&p).re;
                assert!(tr > 0.5 && (tr / d - (tr / d).round()).abs() < 1e-8);
                axpy(&mut sum, ONE, &p);
            }
            let id = e.identity_coords();
            assert!(
                sum.iter().zip(&id).all(|(a, b)| (a - b).norm() < 1e-9),
                "n={n} k={k}"
            );
        }
    }

    #[test]
    fn casimirs_resolve_gt_projectors() {
        for (n, k) in [(1, 3), (2, 3), (1, 4), (2, 4)] {
            let b = Bridges::new(n, k).unwrap();
            let mut e = GtEngine::new(n, k).unwrap();
            let chain_specs: Vec<(CasimirSpec, fn(&HighestWeight, &GtPattern) -> Result<C64>)> =
                if k == 3 {
                    vec![(CasimirSpec::quadratic(3), eig_top_quadratic)]
                } else {
                    vec![
                        (CasimirSpec::quadratic(4), eig_top_quadratic),
                        (CasimirSpec::pfaffian(4), eig_top_second),
                        (CasimirSpec::quadratic(3), eig_so3),
                    ]
                };
            let half12 = b.get(0, 1).scale_real(0.5);
            for w in e.weights().to_vec() {
                for p in gt_patterns(&w).unwrap() {
                    let coords = e.projector_coords(&w, &p).unwrap();
                    let proj = e.expand(&coords).unwrap();
                    assert!((&proj * &proj).max_abs_diff(&proj) < 1e-8);
                    for (spec, eig) in &chain_specs {
                        let c = b.casimir(spec).unwrap();
                        let lam = eig(&w, &p).unwrap();
                        assert!((&c * &proj).max_abs_diff(&proj.scale(lam)) < 1e-8);
                    }
                    let m = eig_so2(&w, &p).unwrap();
                    assert!((&half12 * &proj).max_abs_diff(&proj.scale(m)) < 1e-8);
                }
            }
        }
    }

    #[test]
    fn basis_sizes_and_orthonormality() {
        for (n, k) in [(1, 2), (2, 2), (1, 3), (2, 3), (1, 4), (2, 4), (1, 5)] {
            let basis = GtBasis::build(n, k).unwrap();
            assert_eq!(basis.len() as u128, commutant_dim(n, k), "n={n} k={k}");
            assert!(is_unit(&basis.gram(), 1e-7), "n={n} k={k}");
        }
    }

    #[test]
    fn diagonal_elements_are_normalized_projectors() {
        let (n, k) = (1, 4);
        let mut e = GtEngine::new(n, k).unwrap();
        let w = hw(&[1, 0], 4);
        for p in gt_patterns(&w).unwrap() {
            let proj = e.projector_coords(&w, &p).unwrap();
            let x = e.transition_coords(&w, &p, &p).unwrap();
            let tr = e.trace(&proj).re;
            assert!(x
                .iter()
                .zip(&proj)
                .all(|(a, b)| (a - b / tr.sqrt()).norm() < 1e-10));
        }
    }

    #[test]
    fn k3_ladder_normalization_gives_matrix_units() {
        assert!((k3_ladder_normalization(1, 1, 0) - 0.5f64.sqrt()).abs() < 1e-15);
        for n in 1..=2 {
            let mut e = GtEngine::new(n, 3).unwrap();
            for nu in 1..=n as i32 {
                let w = hw(&[nu], 3);
                for m in -nu..=nu {
                    for mp in -nu..=nu {
                        let x = e.k3_ladder_sandwich(&w, m, mp).unwrap();
                        let nn = k3_ladder_normalization(nu, m, mp);
                        let norm2 = e.hs_inner(&x, &x).re * nn * nn;
                        let p = e.projector_coords(&w, &GtPattern::new(vec![m])).unwrap();
                        assert!(
                            (norm2 - e.trace(&p).re).abs() < 1e-8,
                            "nu={nu} m={m} m'={mp}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn transitions_map_target_sector_to_source() {
        let (n, k) = (1, 4);
        let w = hw(&[1, 1], 4);
        let pats = gt_patterns(&w).unwrap();
        let x = transition_operator(&w, &pats[0], &pats[2], n, k)
            .unwrap()
            .op;
        let ps = gt_projector(&w, &pats[0], n, k).unwrap();
        let pt = gt_projector(&w, &pats[2], n, k).unwrap();
        assert!((&ps * &(&x * &pt)).max_abs_diff(&x) < 1e-9);
        assert!((x.hs_norm() - 1.0).abs() < 1e-10);
        let c = casimir(&CasimirSpec::quadratic(4), n, k).unwrap();
        assert!(c.commutator(&x).unwrap().hs_norm() < 1e-8);
    }

    #[test]
    fn capacity_gates() {
        assert!(matches!(
            GtEngine::new(2, 5),
            Err(MgcError::Capacity { .. })
        ));
        assert!(matches!(GtEngine::new(1, 6), Err(MgcError::Unsupported(_))));
        let e = gt_basis(1, 2).unwrap();
        assert_eq!(e.len(), 3);
        let j = gt_basis_json(&e);
        assert_eq!(j.as_array().unwrap().len(), 3);
    }
}
