use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CondEval, VineModel};
use crate::error::{Error, Result};
use crate::stats::spearman;

const CHUNK: usize = 1 << 16;
const SPEARMAN_BATCHES: usize = 20;
/// Smallest expected tail count accepted by [`induced_pair_tdc`].
pub const MIN_TAIL_COUNT: f64 = 20.0;

/// Step `(new variable, earlier variable, conditioning mask)` of the
/// inverse Rosenblatt chain for one variable, innermost last.
type Chain = Vec<(usize, u32)>;

/// Finds an order in which every new variable is linked to the earlier ones
/// by a chain of edges with nested conditioning sets.
fn sampling_plan(model: &VineModel) -> Result<Vec<(usize, Chain)>> {
    let n = model.n_vars();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        if let Some(plan) = plan_for_order(model, &perm) {
            return Ok(plan);
        }
        if !next_permutation(&mut perm) {
            return Err(Error::Domain("no sampling order found for vine".into()));
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn plan_for_order(model: &VineModel, order: &[usize]) -> Option<Vec<(usize, Chain)>> {
    let mut plan = Vec::new();
    let mut prev: u32 = 0;
    for &x in order {
        let mut chain = Vec::new();
        let mut cond: u32 = 0;
        for _ in 0..prev.count_ones() {
            // The edge (x, y | cond) with y among the earlier variables.
            let y = super::bits(prev & !cond)
                .into_iter()
                .find(|&y| model.structure.find_edge(x, y, cond).is_some())?;
            chain.push((y, cond));
            cond |= 1 << y;
        }
        plan.push((x, chain));
        prev |= 1 << x;
    }
    Some(plan)
}

fn simulate_chunk(model: &VineModel, plan: &[(usize, Chain)], n: usize, seed: u64, chunk: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let nv = model.n_vars();
    let w: Vec<Vec<f64>> = (0..nv)
        .map(|_| (0..n).map(|_| rng.sample::<f64, _>(rand::distr::Open01)).collect())
        .collect();
    let mut ev = CondEval::new(&model.structure, &model.pair_copulas, Vec::new());
    for (slot, (x, chain)) in plan.iter().enumerate() {
        let mut cur = w[slot].clone();
        let mut full: u32 = chain.iter().fold(0, |m, &(y, _)| m | 1 << y);
        ev.insert(*x, full, cur.clone());
        for &(y, cond) in chain.iter().rev() {
            let (level, idx) = model.structure.find_edge(*x, y, cond).expect("planned edge");
            let cop = &model.pair_copulas[level][idx];
            let given = ev.get(y, cond)?.clone();
            cur = if *x < y {
                cur.iter().zip(&given).map(|(&w, &v)| cop.h_given_v_inv(w, v)).collect()
            } else {
                cur.iter().zip(&given).map(|(&w, &u)| cop.h_given_u_inv(w, u)).collect()
            };
            full &= !(1 << y);
            ev.insert(*x, full, cur.clone());
        }
    }
    (0..nv).map(|j| ev.get(j, 0).cloned()).collect()
}

/// Draws `n` rows by inverse Rosenblatt transform; returns columns.
///
/// Rows are generated in chunks of 65536 with independent ChaCha streams,
/// so the output does not depend on the thread count.
pub fn simulate(model: &VineModel, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    model.validate()?;
    if n == 0 {
        return Err(Error::Domain("sample size must be positive".into()));
    }
    let plan = sampling_plan(model)?;
    let n_chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<Vec<f64>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| simulate_chunk(model, &plan, CHUNK.min(n - c * CHUNK), seed, c as u64))
        .collect::<Result<_>>()?;
    let mut cols = vec![Vec::with_capacity(n); model.n_vars()];
    for part in parts {
        for (col, p) in cols.iter_mut().zip(part) {
            col.extend(p);
        }
    }
    Ok(cols)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_mc: usize,
    pub seed: u64,
}

fn check_pair(model: &VineModel, pair: (usize, usize)) -> Result<()> {
    let n = model.n_vars();
    if pair.0 >= n || pair.1 >= n || pair.0 == pair.1 {
        return Err(Error::Domain(format!("invalid variable pair {pair:?} for {n} variables")));
    }
    Ok(())
}

/// Spearman correlation of a simulated sample; the standard error comes
/// from 20 batch means.
pub fn induced_spearman(model: &VineModel, pair: (usize, usize), n_mc: usize, seed: u64) -> Result<McEstimate> {
    check_pair(model, pair)?;
    if n_mc < 10_000 {
        return Err(Error::Domain(format!("n_mc must be at least 10000, got {n_mc}")));
    }
    let cols = simulate(model, n_mc, seed)?;
    Ok(spearman_estimate(&cols[pair.0], &cols[pair.1], seed))
}

pub(crate) fn spearman_estimate(x: &[f64], y: &[f64], seed: u64) -> McEstimate {
    let n = x.len();
    let value = spearman(x, y);
    let b = n / SPEARMAN_BATCHES;
    let batch: Vec<f64> = (0..SPEARMAN_BATCHES)
        .map(|i| spearman(&x[i * b..(i + 1) * b], &y[i * b..(i + 1) * b]))
        .collect();
    let m = batch.iter().sum::<f64>() / batch.len() as f64;
    let var = batch.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (batch.len() - 1) as f64;
    McEstimate { value, stderr: (var / SPEARMAN_BATCHES as f64).sqrt(), n_mc: n, seed }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdcPoint {
    pub t: f64,
    /// `C(t, t) / t`.
    pub lower: f64,
    pub lower_stderr: f64,
    /// `P(U > 1 - t, V > 1 - t) / t`.
    pub upper: f64,
    pub upper_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTdc {
    pub pair: (usize, usize),
    pub points: Vec<TdcPoint>,
    /// Intercept of a least-squares line through the points, in t.
    pub lower_extrapolated: f64,
    pub upper_extrapolated: f64,
    pub n_mc: usize,
    pub seed: u64,
}

pub(crate) fn ols_intercept(x: &[f64], y: &[f64]) -> f64 {
    if x.len() == 1 {
        return y[0];
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return my;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    my - sxy / sxx * mx
}

/// Empirical tail ratios on a pair sample at each threshold.
pub(crate) fn pair_tdc_points(u: &[f64], v: &[f64], grid: &[f64]) -> Vec<TdcPoint> {
    let n = u.len() as f64;
    grid.iter()
        .map(|&t| {
            let lo = u.iter().zip(v).filter(|(&a, &b)| a <= t && b <= t).count() as f64;
            let hi = u.iter().zip(v).filter(|(&a, &b)| a > 1.0 - t && b > 1.0 - t).count() as f64;
            let se = |c: f64| {
                let p = c / n;
                (p * (1.0 - p) / n).sqrt() / t
            };
            TdcPoint { t, lower: lo / (n * t), lower_stderr: se(lo), upper: hi / (n * t), upper_stderr: se(hi) }
        })
        .collect()
}

/// Pairwise tail ratios of the vine at each threshold in `alpha_grid`.
pub fn induced_pair_tdc(
    model: &VineModel,
    pair: (usize, usize),
    alpha_grid: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<PairTdc> {
    check_pair(model, pair)?;
    if alpha_grid.is_empty() || alpha_grid.iter().any(|&t| !(t > 0.0 && t <= 0.1)) {
        return Err(Error::Domain("alpha grid must be non-empty and inside (0, 0.1]".into()));
    }
    let t_min = alpha_grid.iter().copied().fold(f64::INFINITY, f64::min);
    if (n_mc as f64) * t_min < MIN_TAIL_COUNT {
        return Err(Error::Resolution(format!(
            "n_mc = {n_mc} gives an expected tail count of {:.1} at t = {t_min}; need at least {MIN_TAIL_COUNT}",
            n_mc as f64 * t_min
        )));
    }
    let cols = simulate(model, n_mc, seed)?;
    let points = pair_tdc_points(&cols[pair.0], &cols[pair.1], alpha_grid);
    let ts: Vec<f64> = points.iter().map(|p| p.t).collect();
    let lower: Vec<f64> = points.iter().map(|p| p.lower).collect();
    let upper: Vec<f64> = points.iter().map(|p| p.upper).collect();
    Ok(PairTdc {
        pair,
        lower_extrapolated: ols_intercept(&ts, &lower),
        upper_extrapolated: ols_intercept(&ts, &upper),
        points,
        n_mc,
        seed,
    })
}
