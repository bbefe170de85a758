use super::{check_columns, is_spanning_tree, max_spanning_tree, CondEval, Edge, EdgeFit, VineModel, VineStructure};
use crate::bicop::{select_family, BivariateCopula, SelectOptions};
use crate::error::{Error, Result};
use crate::stats::kendall_tau;

pub const MIN_OBS: usize = 100;

#[derive(Debug, Clone)]
pub struct VineFitOptions {
    pub select: SelectOptions,
}

impl Default for VineFitOptions {
    /// Full candidate set with a Kendall independence pretest at level 0.01.
    fn default() -> Self {
        Self { select: SelectOptions { independence_test_level: Some(0.01), ..SelectOptions::default() } }
    }
}

fn check_input(cols: &[Vec<f64>]) -> Result<usize> {
    let n = cols.len();
    if !(3..=4).contains(&n) {
        return Err(Error::Domain(format!("vines are supported for 3 or 4 variables, got {n}")));
    }
    let t = check_columns(cols, n, MIN_OBS)?;
    for (j, c) in cols.iter().enumerate() {
        if c.iter().all(|&v| v == c[0]) {
            return Err(Error::DegenerateInput(format!("column {j} is constant")));
        }
    }
    Ok(t)
}

fn fit_edge(u: &[f64], v: &[f64], opts: &VineFitOptions) -> Result<(BivariateCopula, EdgeFit)> {
    let sel = select_family(u, v, &opts.select)?;
    let meta = EdgeFit {
        loglik: sel.best.loglik,
        aic: sel.best.aic,
        pretest_independent: sel.pretest_independent,
        at_boundary: sel.best.at_boundary,
        skipped: sel.skipped.iter().map(|(c, m)| format!("{c}: {m}")).collect(),
    };
    Ok((sel.best.copula, meta))
}

/// Sequential top-down selection: each tree is the maximum spanning tree of
/// |Kendall tau| among the edges allowed by the proximity condition, with
/// weights computed on pseudo-observations transformed through the
/// previously fitted trees. Ties go to the lexicographically smaller edge.
pub fn select_and_fit(cols: &[Vec<f64>], opts: &VineFitOptions) -> Result<VineModel> {
    let t_obs = check_input(cols)?;
    let n = cols.len();
    let mut structure = VineStructure { n_vars: n, trees: Vec::new() };
    let mut copulas: Vec<Vec<BivariateCopula>> = Vec::new();
    let mut meta: Vec<Vec<EdgeFit>> = Vec::new();
    let mut cache: Vec<((usize, u32), Vec<f64>)> = Vec::new();

    for level in 0..n - 1 {
        // Candidate edges as (node a, node b, edge) in lexicographic order.
        let mut cands: Vec<(usize, usize, Edge)> = Vec::new();
        if level == 0 {
            for a in 0..n {
                for b in a + 1..n {
                    cands.push((a, b, Edge::new(a, b, vec![])));
                }
            }
        } else {
            let prev = &structure.trees[level - 1];
            for i in 0..prev.len() {
                for j in i + 1..prev.len() {
                    if let Some(e) = Edge::join(&prev[i], &prev[j]) {
                        if e.conditioning.len() == level {
                            cands.push((i, j, e));
                        }
                    }
                }
            }
        }
        cands.sort_by(|x, y| x.2.cmp(&y.2));

        let mut ev = CondEval::new(&structure, &copulas, cols.to_vec());
        for ((var, mask), values) in cache.drain(..) {
            ev.insert(var, mask, values);
        }
        let mut weighted = Vec::with_capacity(cands.len());
        let mut inputs = Vec::with_capacity(cands.len());
        for (a, b, e) in &cands {
            let (u, v) = ev.edge_inputs(e)?;
            weighted.push((kendall_tau(&u, &v).abs(), *a, *b));
            inputs.push((u, v));
        }
        let n_nodes = if level == 0 { n } else { structure.trees[level - 1].len() };
        let chosen = max_spanning_tree(n_nodes, weighted);
        let mut picked: Vec<usize> = chosen
            .iter()
            .map(|&(a, b)| cands.iter().position(|c| c.0 == a && c.1 == b).expect("chosen from candidates"))
            .collect();
        picked.sort_by(|&x, &y| cands[x].2.cmp(&cands[y].2));

        let mut tree = Vec::new();
        let mut tree_cops = Vec::new();
        let mut tree_meta = Vec::new();
        for idx in picked {
            let (u, v) = &inputs[idx];
            let (c, m) = fit_edge(u, v, opts)?;
            tree.push(cands[idx].2.clone());
            tree_cops.push(c);
            tree_meta.push(m);
        }
        cache = ev.cache.drain().collect();
        structure.trees.push(tree);
        copulas.push(tree_cops);
        meta.push(tree_meta);
    }
    structure.validate()?;
    let loglik = meta.iter().flatten().map(|m| m.loglik).sum();
    Ok(VineModel { structure, pair_copulas: copulas, fit_meta: meta, n_obs: t_obs, loglik })
}

/// Structure chosen by [`select_and_fit`].
pub fn select_structure(cols: &[Vec<f64>], opts: &VineFitOptions) -> Result<VineStructure> {
    select_and_fit(cols, opts).map(|m| m.structure)
}

/// Fits pair copulas tree by tree on a given structure.
pub fn fit(cols: &[Vec<f64>], structure: &VineStructure, opts: &VineFitOptions) -> Result<VineModel> {
    let t_obs = check_input(cols)?;
    structure.validate()?;
    if structure.n_vars != cols.len() {
        return Err(Error::Domain(format!(
            "structure has {} variables, data has {}",
            structure.n_vars,
            cols.len()
        )));
    }
    let mut copulas: Vec<Vec<BivariateCopula>> = Vec::new();
    let mut meta: Vec<Vec<EdgeFit>> = Vec::new();
    let mut cache: Vec<((usize, u32), Vec<f64>)> = Vec::new();
    for tree in &structure.trees {
        let mut ev = CondEval::new(structure, &copulas, cols.to_vec());
        for ((var, mask), values) in cache.drain(..) {
            ev.insert(var, mask, values);
        }
        let mut tree_cops = Vec::new();
        let mut tree_meta = Vec::new();
        for e in tree {
            let (u, v) = ev.edge_inputs(e)?;
            let (c, m) = fit_edge(&u, &v, opts)?;
            tree_cops.push(c);
            tree_meta.push(m);
        }
        cache = ev.cache.drain().collect();
        copulas.push(tree_cops);
        meta.push(tree_meta);
    }
    let loglik = meta.iter().flatten().map(|m| m.loglik).sum();
    Ok(VineModel { structure: structure.clone(), pair_copulas: copulas, fit_meta: meta, n_obs: t_obs, loglik })
}

/// Brute-force check that tree 1 of `structure` has the largest total
/// |Kendall tau| among all spanning trees on the variables.
pub fn exhaustive_first_tree_check(cols: &[Vec<f64>], structure: &VineStructure) -> Result<bool> {
    check_input(cols)?;
    let n = cols.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let w: Vec<f64> = pairs.iter().map(|&(a, b)| kendall_tau(&cols[a], &cols[b]).abs()).collect();
    let mut best = f64::NEG_INFINITY;
    for subset in 0u32..(1 << pairs.len()) {
        if subset.count_ones() as usize != n - 1 {
            continue;
        }
        let links: Vec<(usize, usize)> = (0..pairs.len()).filter(|i| subset & (1 << i) != 0).map(|i| pairs[i]).collect();
        if is_spanning_tree(n, &links) {
            let total: f64 = (0..pairs.len()).filter(|i| subset & (1 << i) != 0).map(|i| w[i]).sum();
            best = best.max(total);
        }
    }
    let chosen: f64 = structure.trees[0]
        .iter()
        .map(|e| w[pairs.iter().position(|&p| p == (e.conditioned[0], e.conditioned[1])).expect("valid pair")])
        .sum();
    Ok(chosen >= best - 1e-12)
}
