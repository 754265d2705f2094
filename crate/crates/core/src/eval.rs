//! Clustering of sample representations and label-based scoring.

use crate::error::{Error, Result};
use crate::rng::{self};
use crate::tensor::Matrix;

/// Class assignments for `n` samples with ids in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    labels: Vec<usize>,
    k: usize,
}

impl Labeling {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("empty labeling".into()));
        }
        if k == 0 || labels.iter().any(|&l| l >= k) {
            return Err(Error::InvalidArgument(format!(
                "labels must lie in 0..{k}"
            )));
        }
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's k-means with greedy farthest-point seeding, best of `restarts`
/// runs by within-cluster SSE. Deterministic for a given seed: restart `r`
/// draws its initial center from the stream `(seed, "kmeans", r)`.
pub fn kmeans(rows: &Matrix, k: usize, seed: u64, restarts: usize) -> Result<Labeling> {
    let n = rows.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k={k} with {n} samples"
        )));
    }
    let restarts = restarts.max(1);
    let mut best: Option<(f64, Vec<usize>)> = None;

    for restart in 0..restarts {
        let mut r = rng::stream(seed, "kmeans", restart as u64);
        // greedy farthest-point seeding from a random first center
        let mut centers: Vec<Vec<f64>> = vec![rows.row(rng::index(&mut r, n)).to_vec()];
        let mut min_d2: Vec<f64> = (0..n).map(|i| sq_dist(rows.row(i), &centers[0])).collect();
        while centers.len() < k {
            let mut far = 0;
            for (i, &d) in min_d2.iter().enumerate().skip(1) {
                if d > min_d2[far] {
                    far = i;
                }
            }
            centers.push(rows.row(far).to_vec());
            for (i, slot) in min_d2.iter_mut().enumerate() {
                let d = sq_dist(rows.row(i), centers.last().unwrap());
                if d < *slot {
                    *slot = d;
                }
            }
        }

        let mut assign = vec![0usize; n];
        for _ in 0..300 {
            let mut changed = false;
            for (i, slot) in assign.iter_mut().enumerate() {
                let mut bestc = 0;
                let mut bestd = sq_dist(rows.row(i), &centers[0]);
                for (c, center) in centers.iter().enumerate().skip(1) {
                    let d = sq_dist(rows.row(i), center);
                    if d < bestd {
                        bestd = d;
                        bestc = c;
                    }
                }
                if *slot != bestc {
                    *slot = bestc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let dim = rows.cols();
            let mut sums = vec![vec![0.0; dim]; k];
            let mut counts = vec![0usize; k];
            for i in 0..n {
                counts[assign[i]] += 1;
                for (s, x) in sums[assign[i]].iter_mut().zip(rows.row(i)) {
                    *s += x;
                }
            }
            for c in 0..k {
                if counts[c] > 0 {
                    for s in &mut sums[c] {
                        *s /= counts[c] as f64;
                    }
                    centers[c] = sums[c].clone();
                }
                // empty clusters keep their previous center
            }
        }

        let sse: f64 = (0..n).map(|i| sq_dist(rows.row(i), &centers[assign[i]])).sum();
        if best.as_ref().is_none_or(|(b, _)| sse < *b) {
            best = Some((sse, assign));
        }
    }

    Labeling::new(best.unwrap().1, k)
}

/// Hungarian (Kuhn-Munkres) minimum-cost assignment on a square matrix.
/// Returns `row_of_col[j]`: the row matched to column j.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_of_col = vec![0usize; n];
    for j in 1..=n {
        row_of_col[j - 1] = p[j] - 1;
    }
    row_of_col
}

/// Clustering accuracy: the fraction of samples matched after the optimal
/// one-to-one relabeling of predicted clusters onto ground-truth classes.
pub fn accuracy(truth: &Labeling, pred: &Labeling) -> Result<f64> {
    if truth.len() != pred.len() {
        return Err(Error::ShapeMismatch(format!(
            "labelings of length {} and {}",
            truth.len(),
            pred.len()
        )));
    }
    let k = truth.k().max(pred.k());
    // confusion[p][t] = matches if predicted cluster p maps to truth class t
    let mut confusion = vec![vec![0.0f64; k]; k];
    for (&t, &p) in truth.labels().iter().zip(pred.labels()) {
        confusion[p][t] += 1.0;
    }
    let cost: Vec<Vec<f64>> = confusion
        .iter()
        .map(|row| row.iter().map(|&c| -c).collect())
        .collect();
    let row_of_col = hungarian(&cost);
    let mut matched = 0.0;
    for (t, &p) in row_of_col.iter().enumerate() {
        matched += confusion[p][t];
    }
    Ok(matched / truth.len() as f64)
}

/// Normalized mutual information in base-2, `MI / max(H(truth), H(pred))`.
/// Two zero-entropy labelings partition identically and score 1.
pub fn nmi(truth: &Labeling, pred: &Labeling) -> Result<f64> {
    if truth.len() != pred.len() {
        return Err(Error::ShapeMismatch(format!(
            "labelings of length {} and {}",
            truth.len(),
            pred.len()
        )));
    }
    let n = truth.len() as f64;
    let (kt, kp) = (truth.k(), pred.k());
    let mut joint = vec![vec![0.0f64; kp]; kt];
    let mut pt = vec![0.0f64; kt];
    let mut pp = vec![0.0f64; kp];
    for (&t, &p) in truth.labels().iter().zip(pred.labels()) {
        joint[t][p] += 1.0;
        pt[t] += 1.0;
        pp[p] += 1.0;
    }
    let entropy = |probs: &[f64]| -> f64 {
        probs
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| {
                let q = c / n;
                -q * q.log2()
            })
            .sum()
    };
    let ht = entropy(&pt);
    let hp = entropy(&pp);
    if ht == 0.0 && hp == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for t in 0..kt {
        for p in 0..kp {
            let c = joint[t][p];
            if c > 0.0 {
                let q = c / n;
                mi += q * (q * n * n / (pt[t] * pp[p])).log2();
            }
        }
    }
    Ok(mi / ht.max(hp))
}
