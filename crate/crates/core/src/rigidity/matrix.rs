use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use super::RigidityError;
use crate::cost::{CostGraph, Dim, Embedding};
use crate::math::Vec3;

/// Relative singular-value threshold used for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// One row block of a rigidity system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint {
    /// Distance constraint between two joints.
    Bar { u: usize, v: usize },
    /// All coordinates of the joint fixed.
    Pin { vertex: usize },
    /// Motion of the joint orthogonal to `normal` only.
    Slider { vertex: usize, normal: Vec3 },
}

fn check_vertex(v: usize, n: usize) -> Result<(), RigidityError> {
    if v < n {
        Ok(())
    } else {
        Err(RigidityError::VertexOutOfRange { vertex: v, count: n })
    }
}

/// Rows for a list of constraints over `vertex_count` joints in `dim`
/// dimensions. A bar row holds `p(u) − p(v)` in `u`'s columns and
/// `p(v) − p(u)` in `v`'s (half the gradient of the squared length).
pub fn constraint_matrix(
    dim: Dim,
    vertex_count: usize,
    constraints: &[Constraint],
    e: &Embedding,
) -> Result<DMatrix<f64>, RigidityError> {
    let d = dim.get();
    if e.positions.len() < vertex_count {
        return Err(RigidityError::MissingEmbedding);
    }
    let rows: usize = constraints
        .iter()
        .map(|c| match c {
            Constraint::Pin { .. } => d,
            _ => 1,
        })
        .sum();
    let mut m = DMatrix::zeros(rows, d * vertex_count);
    let mut r = 0;
    for c in constraints {
        match *c {
            Constraint::Bar { u, v } => {
                check_vertex(u, vertex_count)?;
                check_vertex(v, vertex_count)?;
                if u == v {
                    return Err(RigidityError::SelfLoop(u));
                }
                let diff = -e.edge_vector(u, v);
                if diff.norm() <= f64::EPSILON * (1.0 + e.positions[u].norm()) {
                    return Err(RigidityError::CoincidentEndpoints(u, v));
                }
                for k in 0..d {
                    m[(r, d * u + k)] = diff[k];
                    m[(r, d * v + k)] = -diff[k];
                }
                r += 1;
            }
            Constraint::Pin { vertex } => {
                check_vertex(vertex, vertex_count)?;
                for k in 0..d {
                    m[(r + k, d * vertex + k)] = 1.0;
                }
                r += d;
            }
            Constraint::Slider { vertex, normal } => {
                check_vertex(vertex, vertex_count)?;
                if normal.norm() == 0.0 {
                    return Err(RigidityError::ZeroSliderNormal(vertex));
                }
                for k in 0..d {
                    m[(r, d * vertex + k)] = normal[k];
                }
                r += 1;
            }
        }
    }
    Ok(m)
}

/// Bar constraints for every edge of `g`, in edge order.
pub fn bar_rows(g: &CostGraph) -> Vec<Constraint> {
    g.edges
        .iter()
        .map(|e| Constraint::Bar { u: e.u, v: e.v })
        .collect()
}

/// Rigidity matrix of the bar framework `(g, e)`: one row per edge,
/// `d·|V|` columns.
pub fn rigidity_matrix(g: &CostGraph, e: &Embedding) -> Result<DMatrix<f64>, RigidityError> {
    if !e.covers(g) {
        return Err(RigidityError::MissingEmbedding);
    }
    constraint_matrix(g.dim, g.vertex_count, &bar_rows(g), e)
}

/// Stiffness matrix `Rᵀ·diag(k)·R` where `R` has unit bar directions.
pub fn stiffness_matrix(
    g: &CostGraph,
    e: &Embedding,
    springs: &[f64],
) -> Result<DMatrix<f64>, RigidityError> {
    if springs.len() != g.edge_count() {
        return Err(RigidityError::WeightCount {
            given: springs.len(),
            expected: g.edge_count(),
        });
    }
    if let Some((i, &k)) = springs.iter().enumerate().find(|(_, &k)| !(k > 0.0)) {
        return Err(RigidityError::NonPositive {
            what: "spring constant",
            index: i,
            value: k,
        });
    }
    let mut r = rigidity_matrix(g, e)?;
    for (i, edge) in g.edges.iter().enumerate() {
        let len = e.distance(edge.u, edge.v);
        let scale = springs[i].sqrt() / len;
        r.row_mut(i).scale_mut(scale);
    }
    Ok(r.transpose() * r)
}

/// Analytic basis of the infinitesimal rigid motions of a framework.
#[derive(Clone, Debug, PartialEq)]
pub struct TrivialMotions {
    /// Orthonormal columns spanning the motions.
    pub basis: DMatrix<f64>,
}

impl TrivialMotions {
    /// Translations and rotations of free frameworks; translations only for
    /// periodic ones; nothing when `grounded`.
    pub fn new(dim: Dim, vertex_count: usize, e: &Embedding, grounded: bool) -> Self {
        let d = dim.get();
        let cols = d * vertex_count;
        let mut raw: Vec<DVector<f64>> = Vec::new();
        if !grounded && vertex_count > 0 {
            for k in 0..d {
                let mut t = DVector::zeros(cols);
                for v in 0..vertex_count {
                    t[d * v + k] = 1.0;
                }
                raw.push(t);
            }
            if !e.is_periodic() {
                let c = e.positions[..vertex_count]
                    .iter()
                    .fold(Vec3::zeros(), |a, p| a + p)
                    / vertex_count as f64;
                let axes: &[Vec3] = match dim {
                    Dim::Two => &[Vec3::new(0.0, 0.0, 1.0)],
                    Dim::Three => &[Vec3::x(), Vec3::y(), Vec3::z()],
                };
                for axis in axes {
                    let mut w = DVector::zeros(cols);
                    for v in 0..vertex_count {
                        let m = axis.cross(&(e.positions[v] - c));
                        for k in 0..d {
                            w[d * v + k] = m[k];
                        }
                    }
                    raw.push(w);
                }
            }
        }
        TrivialMotions {
            basis: orthonormalize(&raw, cols),
        }
    }

    pub fn dimension(&self) -> usize {
        self.basis.ncols()
    }
}

/// Modified Gram–Schmidt (two passes) dropping dependent vectors.
fn orthonormalize(vs: &[DVector<f64>], len: usize) -> DMatrix<f64> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vs {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let dot = q.dot(&w);
                w.axpy(-dot, q, 1.0);
            }
        }
        let n = w.norm();
        if n > 1e-10 * scale {
            out.push(w / n);
        }
    }
    if out.is_empty() {
        DMatrix::zeros(len, 0)
    } else {
        DMatrix::from_columns(&out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RigidityClass {
    MinimallyRigid,
    Flexible,
    Overconstrained,
    FlexibleAndOverconstrained,
}

impl RigidityClass {
    pub fn from_counts(dof: usize, stresses: usize) -> Self {
        match (dof > 0, stresses > 0) {
            (false, false) => RigidityClass::MinimallyRigid,
            (true, false) => RigidityClass::Flexible,
            (false, true) => RigidityClass::Overconstrained,
            (true, true) => RigidityClass::FlexibleAndOverconstrained,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RigidityClass::MinimallyRigid => "minimally-rigid",
            RigidityClass::Flexible => "flexible",
            RigidityClass::Overconstrained => "overconstrained",
            RigidityClass::FlexibleAndOverconstrained => "flexible-and-overconstrained",
        }
    }
}

/// Rank, null spaces and classification of a rigidity-type matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidityReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub right_nullity: usize,
    pub trivial_dimension: usize,
    /// Internal degrees of freedom: right nullity minus trivial motions.
    pub dof: usize,
    /// Orthonormal internal flexes (orthogonal to the trivial motions).
    pub flex_basis: Vec<DVector<f64>>,
    /// Orthonormal self-stresses (left null vectors).
    pub stress_basis: Vec<DVector<f64>>,
    pub classification: RigidityClass,
}

fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank: singular values above `rel_tol · σ_max`.
pub fn matrix_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = sorted_singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > rel_tol * smax).count(),
        _ => 0,
    }
}

/// Orthonormal basis of the right null space, from the SVD of `m` padded with
/// zero rows to be at least square.
fn right_null_space(m: &DMatrix<f64>, rank: usize) -> Vec<DVector<f64>> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Vec::new();
    }
    let mut padded = DMatrix::zeros(rows.max(cols), cols);
    padded.rows_mut(0, rows).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order[rank..].iter().map(|&i| vt.row(i).transpose()).collect()
}

/// Rank, flexes and self-stresses of `m`.
///
/// The flex basis is the right null space with the trivial motions projected
/// out; the stress basis is the left null space.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64, trivial: &TrivialMotions) -> RigidityReport {
    let (rows, cols) = m.shape();
    let rank = matrix_rank(m, rel_tol);
    let null = right_null_space(m, rank);
    let stresses = right_null_space(&m.transpose(), rank);
    let q = &trivial.basis;
    let projected: Vec<DVector<f64>> = null
        .iter()
        .map(|v| {
            if q.ncols() == 0 {
                v.clone()
            } else {
                v - q * (q.transpose() * v)
            }
        })
        .collect();
    let trivial_dimension = trivial.dimension().min(null.len());
    let dof = null.len() - trivial_dimension;
    let flex_basis = if dof == 0 {
        Vec::new()
    } else {
        let p = DMatrix::from_columns(&projected);
        let svd = p.svd(true, false);
        let u = svd.u.expect("requested U");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        order[..dof].iter().map(|&i| u.column(i).into_owned()).collect()
    };
    RigidityReport {
        rows,
        cols,
        rank,
        right_nullity: null.len(),
        trivial_dimension,
        dof,
        flex_basis,
        stress_basis: stresses.clone(),
        classification: RigidityClass::from_counts(dof, stresses.len()),
    }
}
