use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::EditError;
use crate::cost::{CostGraph, Embedding};
use crate::rigidity::RigidityError;

/// Steps without progress tolerated before giving up.
const STALL_LIMIT: usize = 10;

/// Outcome of [`rerealize_local`].
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationReport {
    /// Best embedding found.
    pub embedding: Embedding,
    /// Gauss–Newton steps taken.
    pub iterations: usize,
    /// Largest `|length − target|` over the edges touching the region.
    pub max_error: f64,
    /// Half the sum of squared squared-length residuals.
    pub residual: f64,
    pub converged: bool,
}

struct Problem {
    d: usize,
    /// Column block of each vertex, `usize::MAX` when fixed.
    column: Vec<usize>,
    edges: Vec<(usize, usize, f64)>,
}

impl Problem {
    fn residuals(&self, p: &Embedding) -> DVector<f64> {
        DVector::from_iterator(
            self.edges.len(),
            self.edges
                .iter()
                .map(|&(u, v, t)| p.edge_vector(u, v).norm_squared() - t * t),
        )
    }

    fn max_error(&self, p: &Embedding) -> f64 {
        self.edges
            .iter()
            .map(|&(u, v, t)| (p.distance(u, v) - t).abs())
            .fold(0.0, f64::max)
    }

    fn jacobian(&self, p: &Embedding, cols: usize) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.edges.len(), cols);
        for (r, &(u, v, _)) in self.edges.iter().enumerate() {
            let diff = -p.edge_vector(u, v);
            for (x, sign) in [(u, 2.0), (v, -2.0)] {
                if self.column[x] != usize::MAX {
                    for k in 0..self.d {
                        j[(r, self.column[x] + k)] += sign * diff[k];
                    }
                }
            }
        }
        j
    }

    fn moved(&self, p: &Embedding, region: &[usize], step: &DVector<f64>, alpha: f64) -> Embedding {
        let mut q = p.clone();
        for &v in region {
            for k in 0..self.d {
                q.positions[v][k] += alpha * step[self.column[v] + k];
            }
        }
        q
    }
}

/// Moves the vertices of `region` (all others fixed) so that the edges
/// touching the region approach `target_lengths` (one per edge of `g`).
///
/// Gauss–Newton on the squared-length residuals with an SVD least-squares
/// step and backtracking. Converged once every touched edge is within `tol`
/// of its target. Ten consecutive steps without progress are reported as
/// divergence, carrying the best iterate.
pub fn rerealize_local(
    g: &CostGraph,
    e: &Embedding,
    region: &[usize],
    target_lengths: &[f64],
    max_iters: usize,
    tol: f64,
) -> Result<RealizationReport, EditError> {
    if !e.covers(g) {
        return Err(EditError::MissingEmbedding);
    }
    if target_lengths.len() != g.edge_count() {
        return Err(RigidityError::WeightCount {
            given: target_lengths.len(),
            expected: g.edge_count(),
        }
        .into());
    }
    if let Some((index, &value)) = target_lengths.iter().enumerate().find(|(_, &t)| !(t > 0.0)) {
        return Err(RigidityError::NonPositive {
            what: "target length",
            index,
            value,
        }
        .into());
    }
    let d = g.dim.get();
    let mut column = vec![usize::MAX; g.vertex_count];
    for (k, &v) in region.iter().enumerate() {
        if v >= g.vertex_count {
            return Err(EditError::VertexOutOfRange(v));
        }
        if column[v] != usize::MAX {
            return Err(EditError::RepeatedPair(v));
        }
        column[v] = d * k;
    }
    let cols = d * region.len();
    let edges = g
        .edges
        .iter()
        .zip(target_lengths)
        .filter(|(ed, _)| column[ed.u] != usize::MAX || column[ed.v] != usize::MAX)
        .map(|(ed, &t)| (ed.u, ed.v, t))
        .collect();
    let problem = Problem { d, column, edges };
    let objective = |p: &Embedding| 0.5 * problem.residuals(p).norm_squared();
    let report = |p: Embedding, iterations: usize| {
        let max_error = problem.max_error(&p);
        RealizationReport {
            residual: objective(&p),
            converged: max_error < tol,
            max_error,
            iterations,
            embedding: p,
        }
    };

    let mut cur = e.clone();
    let mut f = objective(&cur);
    let mut stalled = 0;
    let mut iterations = 0;
    while problem.max_error(&cur) >= tol && iterations < max_iters {
        iterations += 1;
        let r = problem.residuals(&cur);
        let j = problem.jacobian(&cur, cols);
        let step = j
            .svd(true, true)
            .solve(&(-r), 1e-12)
            .expect("both singular vector sets were computed");
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = problem.moved(&cur, region, &step, alpha);
            let ft = objective(&trial);
            if ft < f {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, ft)) => {
                let gain = f - ft;
                cur = trial;
                f = ft;
                if gain > 1e-14 * (1.0 + f) {
                    stalled = 0;
                } else {
                    stalled += 1;
                }
            }
            None => stalled += 1,
        }
        if stalled >= STALL_LIMIT {
            return Err(EditError::Diverged(Box::new(report(cur, iterations))));
        }
    }
    Ok(report(cur, iterations))
}
