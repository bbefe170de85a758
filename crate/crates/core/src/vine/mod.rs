//! Regular vines on three or four variables.
//!
//! Pseudo-observations are passed column-wise: `cols[j][t]` is variable `j`
//! on day `t`.

mod fit;
pub(crate) mod sim;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bicop::{BivariateCopula, Margin};
use crate::error::{Error, Result};

pub use fit::{exhaustive_first_tree_check, fit, select_and_fit, select_structure, VineFitOptions};
pub use sim::{induced_pair_tdc, induced_spearman, simulate, McEstimate, PairTdc, TdcPoint};

/// `(conditioned pair | conditioning set)`; the pair is stored in increasing
/// order and the conditioning set sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub conditioned: [usize; 2],
    pub conditioning: Vec<usize>,
}

impl Edge {
    pub fn new(a: usize, b: usize, mut conditioning: Vec<usize>) -> Self {
        conditioning.sort_unstable();
        Self { conditioned: [a.min(b), a.max(b)], conditioning }
    }

    pub(crate) fn cond_mask(&self) -> u32 {
        self.conditioning.iter().fold(0, |m, &v| m | 1 << v)
    }

    pub(crate) fn all_mask(&self) -> u32 {
        self.cond_mask() | 1 << self.conditioned[0] | 1 << self.conditioned[1]
    }

    /// Joins two edges of the previous tree when their variable sets
    /// overlap in all but one element each.
    pub(crate) fn join(e1: &Edge, e2: &Edge) -> Option<Edge> {
        let (m1, m2) = (e1.all_mask(), e2.all_mask());
        let common = m1 & m2;
        if common.count_ones() + 1 != m1.count_ones() || m1.count_ones() != m2.count_ones() {
            return None;
        }
        let a = (m1 & !common).trailing_zeros() as usize;
        let b = (m2 & !common).trailing_zeros() as usize;
        Some(Edge::new(a, b, bits(common)))
    }
}

pub(crate) fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [a, b] = self.conditioned;
        if self.conditioning.is_empty() {
            write!(f, "{a},{b}")
        } else {
            let d: Vec<String> = self.conditioning.iter().map(|v| v.to_string()).collect();
            write!(f, "{a},{b}|{}", d.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VineStructure {
    pub n_vars: usize,
    pub trees: Vec<Vec<Edge>>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        self.0[x] = r;
        r
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Whether `links` (pairs of node indices) form a spanning tree on `n` nodes.
pub(crate) fn is_spanning_tree(n: usize, links: &[(usize, usize)]) -> bool {
    if links.len() + 1 != n {
        return false;
    }
    let mut uf = UnionFind::new(n);
    links.iter().all(|&(a, b)| a < n && b < n && uf.union(a, b))
}

/// Kruskal maximum spanning tree. `cands` are `(weight, a, b)` and must
/// already be in tie-break order; the sort is stable.
pub(crate) fn max_spanning_tree(n: usize, mut cands: Vec<(f64, usize, usize)>) -> Vec<(usize, usize)> {
    cands.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut uf = UnionFind::new(n);
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for (_, a, b) in cands {
        if uf.union(a, b) {
            out.push((a, b));
        }
    }
    out
}

impl VineStructure {
    pub fn n_edges(&self) -> usize {
        self.trees.iter().map(Vec::len).sum()
    }

    /// Checks the regular-vine conditions: tree 1 spans the variables and
    /// every deeper tree spans the previous tree's edges under the
    /// proximity condition.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars;
        let bad = |m: String| Err(Error::Domain(format!("invalid vine structure: {m}")));
        if !(3..=4).contains(&n) {
            return bad(format!("n_vars must be 3 or 4, got {n}"));
        }
        if self.trees.len() != n - 1 {
            return bad(format!("expected {} trees, got {}", n - 1, self.trees.len()));
        }
        for (k, tree) in self.trees.iter().enumerate() {
            if tree.len() != n - 1 - k {
                return bad(format!("tree {} has {} edges", k + 1, tree.len()));
            }
            for e in tree {
                let [a, b] = e.conditioned;
                if a >= b || b >= n || e.conditioning.len() != k || e.conditioning.iter().any(|&c| c >= n || c == a || c == b)
                {
                    return bad(format!("malformed edge {e} in tree {}", k + 1));
                }
                if e.conditioning.windows(2).any(|w| w[0] >= w[1]) {
                    return bad(format!("unsorted conditioning set in edge {e}"));
                }
            }
        }
        let first: Vec<(usize, usize)> = self.trees[0].iter().map(|e| (e.conditioned[0], e.conditioned[1])).collect();
        if !is_spanning_tree(n, &first) {
            return bad("tree 1 is not a spanning tree".into());
        }
        for k in 1..self.trees.len() {
            let prev = &self.trees[k - 1];
            let mut links = Vec::new();
            for e in &self.trees[k] {
                let mut found = None;
                for i in 0..prev.len() {
                    for j in i + 1..prev.len() {
                        let (m1, m2) = (prev[i].all_mask(), prev[j].all_mask());
                        // Proximity: the two parents share k variables.
                        if (m1 & m2).count_ones() as usize == k
                            && m1 | m2 == e.all_mask()
                            && (m1 & m2) == e.cond_mask()
                        {
                            found = Some((i, j));
                        }
                    }
                }
                match found {
                    Some(l) => links.push(l),
                    None => return bad(format!("edge {e} in tree {} violates proximity", k + 1)),
                }
            }
            if !is_spanning_tree(prev.len(), &links) {
                return bad(format!("tree {} does not span tree {}", k + 1, k));
            }
        }
        Ok(())
    }

    pub(crate) fn find_edge(&self, var: usize, other: usize, cond: u32) -> Option<(usize, usize)> {
        let level = cond.count_ones() as usize;
        let tree = self.trees.get(level)?;
        let key = [var.min(other), var.max(other)];
        tree.iter()
            .position(|e| e.conditioned == key && e.cond_mask() == cond)
            .map(|i| (level, i))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFit {
    pub loglik: f64,
    pub aic: f64,
    /// Independence chosen because the independence pretest did not reject.
    pub pretest_independent: bool,
    pub at_boundary: bool,
    /// Candidates that could not be fitted on this edge, with reasons.
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VineModel {
    pub structure: VineStructure,
    /// `pair_copulas[k][i]` belongs to `structure.trees[k][i]`.
    pub pair_copulas: Vec<Vec<BivariateCopula>>,
    pub fit_meta: Vec<Vec<EdgeFit>>,
    pub n_obs: usize,
    pub loglik: f64,
}

impl VineModel {
    pub fn n_vars(&self) -> usize {
        self.structure.n_vars
    }

    /// A vine on the given structure with every pair copula set to
    /// Independence.
    pub fn independence(structure: VineStructure) -> Result<Self> {
        structure.validate()?;
        let pair_copulas = structure.trees.iter().map(|t| vec![BivariateCopula::independence(); t.len()]).collect();
        Ok(Self::from_parts(structure, pair_copulas))
    }

    /// Builds a model from a structure and aligned copulas, without fit
    /// metadata.
    pub fn from_parts(structure: VineStructure, pair_copulas: Vec<Vec<BivariateCopula>>) -> Self {
        let fit_meta = pair_copulas
            .iter()
            .map(|t| {
                t.iter()
                    .map(|_| EdgeFit { loglik: 0.0, aic: 0.0, pretest_independent: false, at_boundary: false, skipped: vec![] })
                    .collect()
            })
            .collect();
        Self { structure, pair_copulas, fit_meta, n_obs: 0, loglik: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        self.structure.validate()?;
        let aligned = self.pair_copulas.len() == self.structure.trees.len()
            && self.pair_copulas.iter().zip(&self.structure.trees).all(|(c, t)| c.len() == t.len());
        if !aligned {
            return Err(Error::Domain("pair copulas do not match the vine structure".into()));
        }
        self.pair_copulas.iter().flatten().try_for_each(|c| c.validate())
    }

    /// Log-likelihood of pseudo-observations under the simplified vine.
    pub fn loglik_on(&self, cols: &[Vec<f64>]) -> Result<f64> {
        let per_edge = self.edge_logliks(cols)?;
        Ok(per_edge.iter().flatten().sum())
    }

    pub fn edge_logliks(&self, cols: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        check_columns(cols, self.n_vars(), 1)?;
        let mut ev = CondEval::new(&self.structure, &self.pair_copulas, cols.to_vec());
        let mut out = Vec::new();
        for (k, tree) in self.structure.trees.iter().enumerate() {
            let mut lls = Vec::new();
            for (i, e) in tree.iter().enumerate() {
                let (u, v) = ev.edge_inputs(e)?;
                lls.push(self.pair_copulas[k][i].loglik(&u, &v));
            }
            out.push(lls);
        }
        Ok(out)
    }

    /// Model-implied Kendall tau for tree-1 pairs.
    pub fn first_tree_taus(&self) -> Vec<(Edge, f64)> {
        self.structure.trees[0].iter().cloned().zip(self.pair_copulas[0].iter().map(|c| c.tau())).collect()
    }
}

pub(crate) fn check_columns(cols: &[Vec<f64>], n_vars: usize, min_len: usize) -> Result<usize> {
    if cols.len() != n_vars {
        return Err(Error::Domain(format!("expected {n_vars} columns, got {}", cols.len())));
    }
    let t = cols[0].len();
    if cols.iter().any(|c| c.len() != t) {
        return Err(Error::Domain("columns differ in length".into()));
    }
    if t < min_len {
        return Err(Error::DegenerateInput(format!("need at least {min_len} observations, got {t}")));
    }
    if cols.iter().flatten().any(|&u| !(u > 0.0 && u < 1.0)) {
        return Err(Error::Domain("pseudo-observations must lie strictly inside (0, 1)".into()));
    }
    Ok(t)
}

/// Memoized conditional pseudo-observations `u_{var | mask}` computed with
/// the h-functions of the vine's pair copulas.
pub(crate) struct CondEval<'a> {
    structure: &'a VineStructure,
    copulas: &'a [Vec<BivariateCopula>],
    cache: HashMap<(usize, u32), Vec<f64>>,
}

impl<'a> CondEval<'a> {
    pub(crate) fn new(structure: &'a VineStructure, copulas: &'a [Vec<BivariateCopula>], cols: Vec<Vec<f64>>) -> Self {
        let cache = cols.into_iter().enumerate().map(|(j, c)| ((j, 0), c)).collect();
        Self { structure, copulas, cache }
    }

    pub(crate) fn insert(&mut self, var: usize, mask: u32, values: Vec<f64>) {
        self.cache.insert((var, mask), values);
    }

    pub(crate) fn get(&mut self, var: usize, mask: u32) -> Result<&Vec<f64>> {
        self.ensure(var, mask)?;
        Ok(&self.cache[&(var, mask)])
    }

    fn ensure(&mut self, var: usize, mask: u32) -> Result<()> {
        if self.cache.contains_key(&(var, mask)) {
            return Ok(());
        }
        if mask == 0 {
            return Err(Error::Domain(format!("no data for variable {var}")));
        }
        let (level, idx, other) = bits(mask)
            .into_iter()
            .find_map(|c| self.structure.find_edge(var, c, mask & !(1 << c)).map(|(l, i)| (l, i, c)))
            .ok_or_else(|| Error::Domain(format!("vine has no edge producing u_{var}|{mask:#b}")))?;
        let cop = self.copulas.get(level).and_then(|t| t.get(idx)).ok_or_else(|| {
            Error::Domain(format!("pair copula for tree {} edge {idx} not fitted yet", level + 1))
        })?;
        let rest = mask & !(1 << other);
        self.ensure(var, rest)?;
        self.ensure(other, rest)?;
        let x = &self.cache[&(var, rest)];
        let y = &self.cache[&(other, rest)];
        let out: Vec<f64> = if var < other {
            x.iter().zip(y).map(|(&a, &b)| cop.hfunc(a, b, Margin::Second)).collect()
        } else {
            x.iter().zip(y).map(|(&a, &b)| cop.hfunc(b, a, Margin::First)).collect()
        };
        self.cache.insert((var, mask), out);
        Ok(())
    }

    /// `(u_{a|D}, u_{b|D})` for an edge `a,b|D`.
    pub(crate) fn edge_inputs(&mut self, e: &Edge) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = e.cond_mask();
        let u = self.get(e.conditioned[0], d)?.clone();
        let v = self.get(e.conditioned[1], d)?.clone();
        Ok((u, v))
    }
}

#[cfg(test)]
mod tests;
