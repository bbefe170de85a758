use serde::{Deserialize, Serialize};

use crate::bicop::Family;
use crate::error::{Error, Result};
use crate::numeric::optim::bisect;

/// Smallest sample accepted by [`empirical_kendall_fn`].
pub const MIN_KENDALL_OBS: usize = 200;

struct Fenwick(Vec<usize>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Self(vec![0; n + 1])
    }

    /// Adds `delta` at 1-based position `i`.
    fn add(&mut self, mut i: usize, delta: isize) {
        while i < self.0.len() {
            self.0[i] = self.0[i].wrapping_add_signed(delta);
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over positions `1..=i`.
    fn prefix(&self, mut i: usize) -> usize {
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// 1-based dense ranks; equal values share a rank.
fn dense_ranks(x: &[f64]) -> (Vec<usize>, usize) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0; x.len()];
    let mut k = 0;
    for (pos, &i) in idx.iter().enumerate() {
        if pos == 0 || x[i] != x[idx[pos - 1]] {
            k += 1;
        }
        r[i] = k;
    }
    (r, k)
}

fn sorted_by(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    idx
}

fn dominance_2(x: &[f64], y: &[f64]) -> Vec<usize> {
    let m = x.len();
    let (ry, k) = dense_ranks(y);
    let order = sorted_by(x);
    let mut bit = Fenwick::new(k);
    let mut out = vec![0; m];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j < m && x[order[j]] == x[order[i]] {
            j += 1;
        }
        for &p in &order[i..j] {
            out[p] = bit.prefix(ry[p] - 1);
        }
        for &p in &order[i..j] {
            bit.add(ry[p], 1);
        }
        i = j;
    }
    out
}

struct Cdq<'a> {
    x: &'a [f64],
    y: &'a [f64],
    rz: Vec<usize>,
    bit: Fenwick,
    out: Vec<usize>,
}

impl Cdq<'_> {
    /// `order` is sorted by x. Counts, for each point, the points in the
    /// slice that are strictly smaller in all three coordinates.
    fn solve(&mut self, order: &[usize]) {
        let n = order.len();
        if n < 2 {
            return;
        }
        let x = self.x;
        let boundary = |k: usize| x[order[k - 1]] < x[order[k]];
        let half = n / 2;
        let Some(mid) = (0..n)
            .flat_map(|d| [half.checked_sub(d), Some(half + d)])
            .flatten()
            .find(|&k| k > 0 && k < n && boundary(k))
        else {
            // All x equal: no strict dominance inside this slice.
            return;
        };
        self.solve(&order[..mid]);
        self.solve(&order[mid..]);

        let y = self.y;
        let mut left = order[..mid].to_vec();
        let mut right = order[mid..].to_vec();
        left.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
        right.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
        let mut p = 0;
        for &r in &right {
            while p < left.len() && y[left[p]] < y[r] {
                self.bit.add(self.rz[left[p]], 1);
                p += 1;
            }
            self.out[r] += self.bit.prefix(self.rz[r] - 1);
        }
        for &l in &left[..p] {
            self.bit.add(self.rz[l], -1);
        }
    }
}

fn dominance_3(x: &[f64], y: &[f64], z: &[f64]) -> Vec<usize> {
    let (rz, k) = dense_ranks(z);
    let order = sorted_by(x);
    let mut cdq = Cdq { x, y, rz, bit: Fenwick::new(k), out: vec![0; x.len()] };
    cdq.solve(&order);
    cdq.out
}

/// For each row `i`, the number of rows `j` with `cols[k][j] < cols[k][i]`
/// for every column `k`, by direct comparison of all pairs.
pub fn dominance_counts_naive(cols: &[Vec<f64>]) -> Vec<usize> {
    let m = cols.first().map_or(0, Vec::len);
    (0..m)
        .map(|i| (0..m).filter(|&j| cols.iter().all(|c| c[j] < c[i])).count())
        .collect()
}

/// Strict componentwise dominance counts. Uses a Fenwick sweep for two
/// columns and divide and conquer for three, so both run in
/// `O(m log^2 m)`; more columns fall back to pairwise comparison.
pub fn dominance_counts(cols: &[Vec<f64>]) -> Vec<usize> {
    match cols.len() {
        0 => Vec::new(),
        1 => {
            let x = &cols[0];
            let order = sorted_by(x);
            let mut out = vec![0; x.len()];
            let mut below = 0;
            for (pos, &i) in order.iter().enumerate() {
                if pos > 0 && x[i] != x[order[pos - 1]] {
                    below = pos;
                }
                out[i] = below;
            }
            out
        }
        2 => dominance_2(&cols[0], &cols[1]),
        3 => dominance_3(&cols[0], &cols[1], &cols[2]),
        _ => dominance_counts_naive(cols),
    }
}

pub(crate) fn check_sample(cols: &[Vec<f64>]) -> Result<usize> {
    let m = cols.first().map_or(0, Vec::len);
    if cols.iter().any(|c| c.len() != m) {
        return Err(Error::Domain("sample columns have different lengths".into()));
    }
    if cols.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain("sample contains non-finite values".into()));
    }
    Ok(m)
}

/// Multivariate empirical probability integral transform of every row:
/// `W_i = #{j : row_j < row_i componentwise} / m`.
pub fn kendall_pit(cols: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = check_sample(cols)?;
    if cols.is_empty() || m == 0 {
        return Err(Error::Domain("sample is empty".into()));
    }
    Ok(dominance_counts(cols).into_iter().map(|c| c as f64 / m as f64).collect())
}

/// Empirical joint CDF of `reference` (column-major) evaluated at `row`.
pub fn multivariate_pit(row: &[f64], reference: &[Vec<f64>]) -> Result<f64> {
    let m = check_sample(reference)?;
    if row.len() != reference.len() {
        return Err(Error::Domain(format!(
            "row has {} coordinates, reference has {}",
            row.len(),
            reference.len()
        )));
    }
    if m == 0 {
        return Err(Error::Domain("reference sample is empty".into()));
    }
    let below = (0..m).filter(|&j| reference.iter().zip(row).all(|(c, &r)| c[j] <= r)).count();
    Ok(below as f64 / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KendallSource {
    Empirical,
    AnalyticArchimedean,
    AnalyticIndependence,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Empirical(Vec<f64>),
    Independence(usize),
    Clayton(f64),
    Gumbel(f64),
}

/// Distribution function of the multivariate PIT `F_X(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KendallFunction {
    kind: Kind,
}

impl KendallFunction {
    pub fn source(&self) -> KendallSource {
        match self.kind {
            Kind::Empirical(_) => KendallSource::Empirical,
            Kind::Independence(_) => KendallSource::AnalyticIndependence,
            Kind::Clayton(_) | Kind::Gumbel(_) => KendallSource::AnalyticArchimedean,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if let Kind::Empirical(w) = &self.kind {
            return w.partition_point(|&v| v <= t) as f64 / w.len() as f64;
        }
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let l = -t.ln();
        let k = match self.kind {
            Kind::Independence(d) => {
                let mut term = 1.0;
                let mut s = 1.0;
                for k in 1..d {
                    term *= l / k as f64;
                    s += term;
                }
                t * s
            }
            Kind::Clayton(theta) => t + t * (1.0 - t.powf(theta)) / theta,
            Kind::Gumbel(theta) => t + t * l / theta,
            Kind::Empirical(_) => unreachable!(),
        };
        k.clamp(t, 1.0)
    }

    /// Generalized inverse: the smallest `t` with `K(t) >= alpha`.
    pub fn inverse(&self, alpha: f64) -> f64 {
        if let Kind::Empirical(w) = &self.kind {
            return empirical_quantile(w, alpha);
        }
        if alpha <= 0.0 {
            return 0.0;
        }
        if alpha >= 1.0 {
            return 1.0;
        }
        bisect(|t| self.eval(t) - alpha, 0.0, 1.0, 1e-15)
    }
}

/// Smallest element `s` of the sorted slice with `#{v <= s} >= alpha * m`.
pub(crate) fn empirical_quantile(sorted: &[f64], alpha: f64) -> f64 {
    let m = sorted.len() as f64;
    let mut lo = 0;
    let mut hi = sorted.len() - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        let count = sorted.partition_point(|&v| v <= sorted[mid]);
        if count as f64 >= alpha * m {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    sorted[lo]
}

/// Kendall function of a sample (rows of an `m x l` matrix stored by column).
pub fn empirical_kendall_fn(cols: &[Vec<f64>]) -> Result<KendallFunction> {
    if cols.len() < 2 {
        return Err(Error::Domain(format!(
            "Kendall function needs at least 2 columns, got {}; use the univariate CDF",
            cols.len()
        )));
    }
    let m = check_sample(cols)?;
    if m < MIN_KENDALL_OBS {
        return Err(Error::Domain(format!("Kendall function needs at least {MIN_KENDALL_OBS} rows, got {m}")));
    }
    let mut w = kendall_pit(cols)?;
    w.sort_by(f64::total_cmp);
    Ok(KendallFunction { kind: Kind::Empirical(w) })
}

/// Closed-form Kendall functions used as oracles.
pub fn analytic_kendall_fn(family: Family, params: &[f64], dim: usize) -> Result<KendallFunction> {
    let kind = match (family, params) {
        (Family::Independence, []) if dim >= 2 => Kind::Independence(dim),
        (Family::Clayton, &[theta]) if dim == 2 && theta > 0.0 => Kind::Clayton(theta),
        (Family::Gumbel, &[theta]) if dim == 2 && theta >= 1.0 => Kind::Gumbel(theta),
        _ => {
            return Err(Error::Unsupported(format!(
                "no closed-form Kendall function for {family} with parameters {params:?} in dimension {dim}"
            )))
        }
    };
    Ok(KendallFunction { kind })
}
