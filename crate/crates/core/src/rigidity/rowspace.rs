use alloc::vec::Vec;

use nalgebra::DVector;

/// Orthonormal basis of a growing row space, for greedy "does this row raise
/// the rank?" queries without refactoring the whole matrix.
#[derive(Clone, Debug)]
pub struct RowSpace {
    len: usize,
    rel_tol: f64,
    basis: Vec<DVector<f64>>,
}

impl RowSpace {
    pub fn new(len: usize, rel_tol: f64) -> Self {
        RowSpace {
            len,
            rel_tol,
            basis: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Residual of `row` after projecting out the current span (two passes of
    /// Gram–Schmidt for stability).
    fn residual(&self, row: &DVector<f64>) -> DVector<f64> {
        assert_eq!(row.len(), self.len, "row length does not match the space");
        let mut w = row.clone();
        for _ in 0..2 {
            for q in &self.basis {
                let d = q.dot(&w);
                w.axpy(-d, q, 1.0);
            }
        }
        w
    }

    /// Whether `row` lies outside the current span.
    pub fn is_independent(&self, row: &DVector<f64>) -> bool {
        let scale = row.norm();
        scale > 0.0 && self.residual(row).norm() > self.rel_tol * scale
    }

    /// Adds `row` if it is independent of the span; returns whether it was.
    pub fn try_add(&mut self, row: &DVector<f64>) -> bool {
        let scale = row.norm();
        if scale == 0.0 {
            return false;
        }
        let w = self.residual(row);
        let n = w.norm();
        if n > self.rel_tol * scale {
            self.basis.push(w / n);
            true
        } else {
            false
        }
    }
}
