//! Heat-kernel k-nearest-neighbor affinity over the sample mode.

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Matrix};

/// Kernel-width policy for the heat kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauPolicy {
    /// Mean of the squared distances over connected pairs.
    Mean,
    /// User-supplied width in squared-distance units.
    Fixed(f64),
}

/// Symmetric affinity `V`, diagonal degree `D` and Laplacian `L = D - V`
/// over `n_samples` nodes.
#[derive(Debug, Clone)]
pub struct AffinityGraph {
    n_samples: usize,
    affinity: Matrix,
    degree: Vec<f64>,
    tau: f64,
    p: usize,
}

impl AffinityGraph {
    /// Builds the p-nearest-neighbor heat-kernel graph.
    ///
    /// Nodes i and j are connected iff j is among i's `p` nearest neighbors by
    /// squared Euclidean distance or vice versa; connected entries carry
    /// `exp(-d2(i,j)/tau)`, everything else (including the diagonal) is 0.
    pub fn build(samples: &[Vec<f64>], p: usize, tau: TauPolicy) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        if p == 0 {
            return Err(Error::InvalidArgument("neighbor count p must be >= 1".into()));
        }
        if p >= n {
            return Err(Error::TooManyNeighbors { p, n_samples: n });
        }
        let dim = samples[0].len();
        if samples.iter().any(|s| s.len() != dim) {
            return Err(Error::ShapeMismatch("samples of unequal length".into()));
        }

        let mut d2 = Matrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let mut s = 0.0;
                for (a, b) in samples[i].iter().zip(&samples[j]) {
                    let d = a - b;
                    s += d * d;
                }
                d2.set(i, j, s);
                d2.set(j, i, s);
            }
        }

        // directed kNN, symmetrized by OR-union; ties broken by lower index
        let mut connected = vec![false; n * n];
        for i in 0..n {
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| {
                d2.at(i, a)
                    .partial_cmp(&d2.at(i, b))
                    .unwrap()
                    .then(a.cmp(&b))
            });
            for &j in order.iter().take(p) {
                connected[i * n + j] = true;
                connected[j * n + i] = true;
            }
        }

        let tau = match tau {
            TauPolicy::Fixed(t) => {
                if t <= 0.0 {
                    return Err(Error::InvalidArgument("tau must be positive".into()));
                }
                t
            }
            TauPolicy::Mean => {
                let mut sum = 0.0;
                let mut count = 0usize;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if connected[i * n + j] {
                            sum += d2.at(i, j);
                            count += 1;
                        }
                    }
                }
                // all-coincident samples give mean 0; floor keeps the kernel defined
                (sum / count.max(1) as f64).max(1e-12)
            }
        };

        let mut affinity = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j && connected[i * n + j] {
                    affinity.set(i, j, (-d2.at(i, j) / tau).exp());
                }
            }
        }
        let degree = (0..n).map(|i| affinity.row(i).iter().sum()).collect();

        Ok(Self {
            n_samples: n,
            affinity,
            degree,
            tau,
            p,
        })
    }

    /// Builds the graph from the rows of the mode-N unfolding of `x`:
    /// sample i is the vectorized slice of `x` at last-mode index i.
    pub fn from_tensor(x: &DenseTensor, p: usize, tau: TauPolicy) -> Result<Self> {
        let last = x.order() - 1;
        let unfolded = x.unfold(last)?;
        let samples: Vec<Vec<f64>> = (0..unfolded.rows())
            .map(|i| unfolded.row(i).to_vec())
            .collect();
        Self::build(&samples, p, tau)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn affinity(&self) -> &Matrix {
        &self.affinity
    }

    /// Diagonal of the degree matrix, `D_ii = sum_j V_ij`.
    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// Dense degree and Laplacian matrices `(D, L)` with `L = D - V`.
    pub fn laplacian(&self) -> (Matrix, Matrix) {
        let n = self.n_samples;
        let mut d = Matrix::zeros(n, n);
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            d.set(i, i, self.degree[i]);
            for j in 0..n {
                let v = self.affinity.at(i, j);
                l.set(i, j, if i == j { self.degree[i] } else { -v });
            }
        }
        (d, l)
    }

    /// The manifold penalty `Tr(A^T L A) = 1/2 sum_ij V_ij ||a_i - a_j||^2`
    /// for a representation matrix with one row per sample.
    pub fn regularizer_value(&self, a: &Matrix) -> Result<f64> {
        if a.rows() != self.n_samples {
            return Err(Error::ShapeMismatch(format!(
                "representation has {} rows, graph has {} nodes",
                a.rows(),
                self.n_samples
            )));
        }
        // computed as sum_i D_ii ||a_i||^2 - sum_ij V_ij <a_i, a_j>
        let mut acc = 0.0;
        for i in 0..self.n_samples {
            let ai = a.row(i);
            let norm2: f64 = ai.iter().map(|x| x * x).sum();
            acc += self.degree[i] * norm2;
            for j in 0..self.n_samples {
                let v = self.affinity.at(i, j);
                if v != 0.0 {
                    let dot: f64 = ai.iter().zip(a.row(j)).map(|(x, y)| x * y).sum();
                    acc -= v * dot;
                }
            }
        }
        Ok(acc)
    }

    /// Undirected edge list `(i, j, weight)` with `i < j`, for inspection.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n_samples {
            for j in (i + 1)..self.n_samples {
                let v = self.affinity.at(i, j);
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn identical_samples_have_unit_affinity() {
        let samples = vec![vec![0.3, 0.7], vec![0.3, 0.7]];
        let g = AffinityGraph::build(&samples, 1, TauPolicy::Mean).unwrap();
        assert!((g.affinity().at(0, 1) - 1.0).abs() <= 1e-12);
        assert!((g.affinity().at(1, 0) - 1.0).abs() <= 1e-12);
        assert_eq!(g.affinity().at(0, 0), 0.0);
    }

    #[test]
    fn collinear_points_match_hand_enumeration() {
        // scalars at 0, 1, 10 with p=1, tau=1:
        // NN(0)=1, NN(1)=0, NN(2)=1; union edges {0-1, 1-2}
        let samples = vec![vec![0.0], vec![1.0], vec![10.0]];
        let g = AffinityGraph::build(&samples, 1, TauPolicy::Fixed(1.0)).unwrap();
        let v = g.affinity();
        assert!((v.at(0, 1) - (-1.0f64).exp()).abs() <= 1e-15);
        assert!((v.at(1, 2) - (-81.0f64).exp()).abs() <= 1e-15);
        assert_eq!(v.at(0, 2), 0.0);
        assert_eq!(v.at(2, 0), 0.0);
        assert_eq!(v.at(0, 1), v.at(1, 0));
    }

    #[test]
    fn huge_tau_saturates_connected_entries() {
        let samples = vec![vec![0.0], vec![1.0], vec![2.5]];
        let g = AffinityGraph::build(&samples, 1, TauPolicy::Fixed(1e12)).unwrap();
        for (_, _, w) in g.edges() {
            assert!((w - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn too_many_neighbors_is_rejected() {
        let samples = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            AffinityGraph::build(&samples, 2, TauPolicy::Mean),
            Err(Error::TooManyNeighbors { p: 2, n_samples: 2 })
        ));
    }

    #[test]
    fn laplacian_rows_sum_to_zero_and_quadratic_form_matches() {
        let mut r = rng::stream(5, "graph-test", 0);
        let samples: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..4).map(|_| rng::uniform(&mut r, 0.0, 1.0)).collect())
            .collect();
        let g = AffinityGraph::build(&samples, 3, TauPolicy::Mean).unwrap();
        let (d, l) = g.laplacian();
        let n = g.n_samples();
        for i in 0..n {
            let row_sum: f64 = (0..n).map(|j| l.at(i, j)).sum();
            assert!(row_sum.abs() <= 1e-10);
            assert_eq!(d.at(i, i), g.degree()[i]);
        }
        // x^T L x = 1/2 sum_ij V_ij (x_i - x_j)^2 on random vectors
        for trial in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng::uniform(&mut r, -1.0, 1.0)).collect();
            let lx = l.matvec(&x);
            let quad: f64 = x.iter().zip(&lx).map(|(a, b)| a * b).sum();
            let mut direct = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let diff = x[i] - x[j];
                    direct += g.affinity().at(i, j) * diff * diff;
                }
            }
            direct *= 0.5;
            assert!(
                (quad - direct).abs() <= 1e-10,
                "trial {trial}: {quad} vs {direct}"
            );
        }
    }

    #[test]
    fn complete_graph_laplacian_closed_form() {
        // three coincident points with p=2 give V = J - I (all ones off-diagonal)
        let samples = vec![vec![0.0], vec![0.0], vec![0.0]];
        let g = AffinityGraph::build(&samples, 2, TauPolicy::Mean).unwrap();
        let (d, l) = g.laplacian();
        for i in 0..3 {
            assert!((d.at(i, i) - 2.0).abs() <= 1e-12);
            for j in 0..3 {
                let expect = if i == j { 2.0 } else { -1.0 };
                assert!((l.at(i, j) - expect).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_affinity_gives_zero_regularizer() {
        // dispersed points still connect, so synthesize the constant-rows case instead
        let samples: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let g = AffinityGraph::build(&samples, 1, TauPolicy::Mean).unwrap();
        let constant = Matrix::new(4, 2, [0.5, 1.5].repeat(4)).unwrap();
        let r = g.regularizer_value(&constant).unwrap();
        assert!(r.abs() <= 1e-10);
    }

    #[test]
    fn regularizer_matches_pairwise_double_sum() {
        let mut rr = rng::stream(6, "graph-test", 1);
        for n in [8, 20, 50] {
            let samples: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..3).map(|_| rng::uniform(&mut rr, 0.0, 1.0)).collect())
                .collect();
            let g = AffinityGraph::build(&samples, 3, TauPolicy::Mean).unwrap();
            let a = Matrix::new(
                n,
                4,
                (0..n * 4).map(|_| rng::uniform(&mut rr, 0.0, 1.0)).collect(),
            )
            .unwrap();
            let fast = g.regularizer_value(&a).unwrap();
            let mut slow = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let v = g.affinity().at(i, j);
                    if v != 0.0 {
                        let dd: f64 = a
                            .row(i)
                            .iter()
                            .zip(a.row(j))
                            .map(|(x, y)| (x - y) * (x - y))
                            .sum();
                        slow += v * dd;
                    }
                }
            }
            slow *= 0.5;
            assert!((fast - slow).abs() <= 1e-9, "n={n}: {fast} vs {slow}");
            assert!(fast >= -1e-10);
        }
    }

    #[test]
    fn distant_extra_node_leaves_existing_entries_unchanged() {
        let mut r = rng::stream(7, "graph-test", 2);
        let mut samples: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..3).map(|_| rng::uniform(&mut r, 0.0, 1.0)).collect())
            .collect();
        let tau = TauPolicy::Fixed(0.5);
        let before = AffinityGraph::build(&samples, 3, tau).unwrap();
        samples.push(vec![1e6, 1e6, 1e6]);
        let after = AffinityGraph::build(&samples, 3, tau).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(before.affinity().at(i, j), after.affinity().at(i, j));
            }
        }
    }
}
