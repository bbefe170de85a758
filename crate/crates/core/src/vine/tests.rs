use super::*;
use crate::bicop::{Family, Rotation};
use crate::numeric::special::norm_quantile;
use crate::stats::{kendall_tau, pearson};

/// Every regular vine on `n` variables, by extending spanning trees level
/// by level.
fn all_structures(n: usize) -> Vec<VineStructure> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    let mut partial: Vec<Vec<Vec<Edge>>> = Vec::new();
    for subset in 0u32..(1 << pairs.len()) {
        let links: Vec<(usize, usize)> = (0..pairs.len()).filter(|i| subset & (1 << i) != 0).map(|i| pairs[i]).collect();
        if is_spanning_tree(n, &links) {
            partial.push(vec![links.iter().map(|&(a, b)| Edge::new(a, b, vec![])).collect()]);
        }
    }
    while let Some(trees) = partial.pop() {
        if trees.len() == n - 1 {
            out.push(VineStructure { n_vars: n, trees });
            continue;
        }
        let prev = trees.last().unwrap();
        let joins: Vec<(usize, usize, Edge)> = (0..prev.len())
            .flat_map(|i| (i + 1..prev.len()).map(move |j| (i, j)))
            .filter_map(|(i, j)| Edge::join(&prev[i], &prev[j]).map(|e| (i, j, e)))
            .filter(|(_, _, e)| e.conditioning.len() == trees.len())
            .collect();
        for subset in 0u32..(1 << joins.len()) {
            let chosen: Vec<&(usize, usize, Edge)> =
                (0..joins.len()).filter(|i| subset & (1 << i) != 0).map(|i| &joins[i]).collect();
            let links: Vec<(usize, usize)> = chosen.iter().map(|c| (c.0, c.1)).collect();
            if is_spanning_tree(prev.len(), &links) {
                let mut next = trees.clone();
                let mut tree: Vec<Edge> = chosen.iter().map(|c| c.2.clone()).collect();
                tree.sort();
                next.push(tree);
                partial.push(next);
            }
        }
    }
    out
}

fn columns(rows: &[[f64; 3]]) -> Vec<Vec<f64>> {
    (0..3).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
}

#[test]
fn structure_counts_and_validation() {
    let s3 = all_structures(3);
    let s4 = all_structures(4);
    assert_eq!(s3.len(), 3);
    assert_eq!(s4.len(), 24);
    for s in s3.iter().chain(&s4) {
        s.validate().unwrap();
        assert_eq!(s.n_edges(), s.n_vars * (s.n_vars - 1) / 2);
    }
    let mut bad = s4[0].clone();
    bad.trees[1][0].conditioning.clear();
    assert!(bad.validate().is_err());
    let cycle = VineStructure {
        n_vars: 3,
        trees: vec![vec![Edge::new(0, 1, vec![]), Edge::new(1, 2, vec![])], vec![Edge::new(0, 1, vec![2])]],
    };
    assert!(cycle.validate().is_err());
}

/// Gaussian vine with partial correlation `r[k][i]` on edge `i` of tree
/// `k`, and the correlation matrix it implies.
fn gaussian_vine(structure: &VineStructure, r: &[Vec<f64>]) -> (VineModel, Vec<Vec<f64>>) {
    let n = structure.n_vars;
    let cops: Vec<Vec<BivariateCopula>> =
        r.iter().map(|t| t.iter().map(|&x| BivariateCopula::gaussian(x).unwrap()).collect()).collect();
    let model = VineModel::from_parts(structure.clone(), cops);
    // Tree by tree: every other correlation inside U(e) is already known,
    // so rho_ab follows from the partial correlation given D.
    let mut m = vec![vec![1.0; n]; n];
    for (k, tree) in structure.trees.iter().enumerate() {
        for (i, e) in tree.iter().enumerate() {
            let [a, b] = e.conditioned;
            let d = &e.conditioning;
            let sdd: Vec<Vec<f64>> = d.iter().map(|&x| d.iter().map(|&y| m[x][y]).collect()).collect();
            let inv = small_inverse(&sdd);
            let quad = |x: usize, y: usize| -> f64 {
                let mut s = 0.0;
                for p in 0..d.len() {
                    for q in 0..d.len() {
                        s += m[x][d[p]] * inv[p][q] * m[d[q]][y];
                    }
                }
                s
            };
            let v = r[k][i] * ((1.0 - quad(a, a)) * (1.0 - quad(b, b))).sqrt() + quad(a, b);
            m[a][b] = v;
            m[b][a] = v;
        }
    }
    (model, m)
}

fn small_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    match a.len() {
        0 => vec![],
        1 => vec![vec![1.0 / a[0][0]]],
        2 => {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            vec![vec![a[1][1] / det, -a[0][1] / det], vec![-a[1][0] / det, a[0][0] / det]]
        }
        _ => unreachable!("at most two conditioning variables"),
    }
}

#[test]
fn simulation_matches_partial_correlation_oracle_on_every_structure() {
    for s in all_structures(3).into_iter().chain(all_structures(4)) {
        let r: Vec<Vec<f64>> = s
            .trees
            .iter()
            .enumerate()
            .map(|(k, t)| t.iter().enumerate().map(|(i, _)| [0.6, -0.4, 0.3][(k + i) % 3] / (k + 1) as f64).collect())
            .collect();
        let (model, corr) = gaussian_vine(&s, &r);
        let cols = simulate(&model, 40_000, 5).unwrap();
        let z: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().map(|&u| norm_quantile(u)).collect()).collect();
        for a in 0..s.n_vars {
            for b in a + 1..s.n_vars {
                let got = pearson(&z[a], &z[b]);
                assert!((got - corr[a][b]).abs() < 0.025, "{s:?} pair {a},{b}: {got} vs {}", corr[a][b]);
            }
        }
    }
}

#[test]
fn simulation_is_deterministic_across_chunks() {
    let s = &all_structures(4)[7];
    let r = vec![vec![0.5, 0.3, -0.2], vec![0.2, 0.1], vec![0.1]];
    let (model, _) = gaussian_vine(s, &r);
    let a = simulate(&model, 70_000, 11).unwrap();
    let b = simulate(&model, 70_000, 11).unwrap();
    assert_eq!(a, b);
    let c = simulate(&model, 70_000, 12).unwrap();
    assert_ne!(a, c);
}

#[test]
fn first_tree_is_maximum_spanning_tree() {
    // Variable 1 and 2 are noisy functions of 0; 1-2 is the weakest link.
    let rows: Vec<[f64; 3]> = (0..2000)
        .map(|i| {
            let x = (i as f64 * 0.618_033_988_749_895).fract();
            let y = (i as f64 * 0.754_877_666_246_693).fract();
            let z = (i as f64 * 0.569_840_290_998_053).fract();
            [x, (0.7 * x + 0.3 * y).clamp(1e-6, 1.0 - 1e-6), (0.55 * x + 0.45 * z).clamp(1e-6, 1.0 - 1e-6)]
        })
        .collect();
    let mut cols = columns(&rows);
    for c in &mut cols {
        *c = crate::stats::pseudo_observations(c);
    }
    let s = select_structure(&cols, &VineFitOptions::default()).unwrap();
    let tree1: Vec<[usize; 2]> = s.trees[0].iter().map(|e| e.conditioned).collect();
    assert_eq!(tree1, vec![[0, 1], [0, 2]]);
    assert!(exhaustive_first_tree_check(&cols, &s).unwrap());
}

#[test]
fn structure_is_invariant_under_row_permutation() {
    let (model, _) = gaussian_vine(&all_structures(4)[3], &[vec![0.6, 0.5, 0.4], vec![0.3, 0.2], vec![0.1]]);
    let cols = simulate(&model, 1500, 3).unwrap();
    let a = select_structure(&cols, &VineFitOptions::default()).unwrap();
    let perm: Vec<usize> = (0..1500).map(|i| (i * 7919) % 1500).collect();
    let shuffled: Vec<Vec<f64>> = cols.iter().map(|c| perm.iter().map(|&i| c[i]).collect()).collect();
    let b = select_structure(&shuffled, &VineFitOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fitted_loglik_is_sum_of_edges() {
    let (model, _) = gaussian_vine(&all_structures(4)[11], &[vec![0.6, -0.5, 0.4], vec![0.3, 0.2], vec![0.1]]);
    let cols = simulate(&model, 3000, 9).unwrap();
    let fitted = select_and_fit(&cols, &VineFitOptions::default()).unwrap();
    let edges: f64 = fitted.fit_meta.iter().flatten().map(|m| m.loglik).sum();
    let direct = fitted.loglik_on(&cols).unwrap();
    assert!((fitted.loglik - edges).abs() <= 1e-8 * edges.abs());
    assert!((direct - fitted.loglik).abs() <= 1e-8 * direct.abs().max(1.0), "{direct} vs {}", fitted.loglik);

    let refit = fit(&cols, &fitted.structure, &VineFitOptions::default()).unwrap();
    assert_eq!(refit.pair_copulas, fitted.pair_copulas);
}

#[test]
fn independence_vine_and_embedded_pair() {
    let s = all_structures(3).remove(0);
    let ind = VineModel::independence(s.clone()).unwrap();
    let cols = simulate(&ind, 100_000, 1).unwrap();
    for a in 0..3 {
        for b in a + 1..3 {
            assert!(kendall_tau(&cols[a], &cols[b]).abs() < 0.01);
        }
    }
    let mut cops: Vec<Vec<BivariateCopula>> = s.trees.iter().map(|t| vec![BivariateCopula::independence(); t.len()]).collect();
    cops[0][0] = BivariateCopula::gaussian(0.5).unwrap();
    let model = VineModel::from_parts(s.clone(), cops);
    let [a, b] = s.trees[0][0].conditioned;
    let est = induced_spearman(&model, (a, b), 100_000, 4).unwrap();
    assert!((est.value - 0.4826).abs() < 0.01, "{est:?}");
    assert!(est.stderr > 0.0 && est.stderr < 0.01);
}

#[test]
fn pair_tail_ratios() {
    let s = all_structures(3).remove(0);
    let ind = VineModel::independence(s.clone()).unwrap();
    let tdc = induced_pair_tdc(&ind, (0, 1), &[0.1, 0.05], 200_000, 2).unwrap();
    assert!((tdc.points[1].lower - 0.05).abs() < 4.0 * tdc.points[1].lower_stderr);
    assert!(matches!(induced_pair_tdc(&ind, (0, 1), &[1e-4], 1000, 2), Err(Error::Resolution(_))));

    let mut cops: Vec<Vec<BivariateCopula>> = s.trees.iter().map(|t| vec![BivariateCopula::independence(); t.len()]).collect();
    cops[0][0] = BivariateCopula::new(Family::Clayton, vec![2.0], Rotation::R0).unwrap();
    let model = VineModel::from_parts(s.clone(), cops);
    let [a, b] = s.trees[0][0].conditioned;
    let tdc = induced_pair_tdc(&model, (a, b), &[0.01, 0.005, 0.002], 1_000_000, 3).unwrap();
    assert!((tdc.points[2].lower - 0.5f64.sqrt()).abs() < 0.05, "{tdc:?}");
}

#[test]
fn rejects_bad_input() {
    let cols = vec![vec![0.5; 200], vec![0.3; 200], vec![0.2; 200]];
    assert!(matches!(select_structure(&cols, &VineFitOptions::default()), Err(Error::DegenerateInput(_))));
    let short = vec![vec![0.5; 50]; 3];
    assert!(select_structure(&short, &VineFitOptions::default()).is_err());
    assert!(select_structure(&vec![vec![0.5; 200]; 2], &VineFitOptions::default()).is_err());
}

#[test]
fn model_json_round_trip() {
    let (model, _) = gaussian_vine(&all_structures(4)[5], &[vec![0.6, 0.5, 0.4], vec![0.3, 0.2], vec![0.1]]);
    let json = serde_json::to_string(&model).unwrap();
    let back: VineModel = serde_json::from_str(&json).unwrap();
    assert_eq!(back, model);
}
