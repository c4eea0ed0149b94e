use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::RigidityError;

fn check_weights(edges: &[(usize, usize)], weights: &[f64], n: usize) -> Result<(), RigidityError> {
    if weights.len() != edges.len() {
        return Err(RigidityError::WeightCount {
            given: weights.len(),
            expected: edges.len(),
        });
    }
    for (i, (&(a, b), &w)) in edges.iter().zip(weights).enumerate() {
        for v in [a, b] {
            if v >= n {
                return Err(RigidityError::VertexOutOfRange { vertex: v, count: n });
            }
        }
        if a == b {
            return Err(RigidityError::SelfLoop(a));
        }
        if !(w > 0.0) {
            return Err(RigidityError::NonPositive {
                what: "edge weight",
                index: i,
                value: w,
            });
        }
    }
    Ok(())
}

/// Weighted graph Laplacian `L = Σ w_e (e_a − e_b)(e_a − e_b)ᵀ`.
pub fn laplacian(
    vertex_count: usize,
    edges: &[(usize, usize)],
    weights: &[f64],
) -> Result<DMatrix<f64>, RigidityError> {
    check_weights(edges, weights, vertex_count)?;
    let mut l = DMatrix::zeros(vertex_count, vertex_count);
    for (&(a, b), &w) in edges.iter().zip(weights) {
        l[(a, a)] += w;
        l[(b, b)] += w;
        l[(a, b)] -= w;
        l[(b, a)] -= w;
    }
    Ok(l)
}

/// Effective resistance between `u` and `v` when edge `i` has conductance
/// `weights[i]`.
///
/// Grounds `v`, restricts the Laplacian to the component containing both
/// endpoints and solves for the potential produced by a unit current at `u`.
pub fn effective_resistance(
    vertex_count: usize,
    edges: &[(usize, usize)],
    weights: &[f64],
    u: usize,
    v: usize,
) -> Result<f64, RigidityError> {
    check_weights(edges, weights, vertex_count)?;
    for x in [u, v] {
        if x >= vertex_count {
            return Err(RigidityError::VertexOutOfRange {
                vertex: x,
                count: vertex_count,
            });
        }
    }
    if u == v {
        return Ok(0.0);
    }
    let mut adj = vec![Vec::new(); vertex_count];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    // index of each vertex of u's component inside the grounded system
    let mut index = vec![usize::MAX; vertex_count];
    let mut seen = vec![false; vertex_count];
    let mut queue = VecDeque::from([u]);
    seen[u] = true;
    let mut size = 0;
    while let Some(x) = queue.pop_front() {
        if x != v {
            index[x] = size;
            size += 1;
        }
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    if !seen[v] {
        return Err(RigidityError::DifferentComponents(u, v));
    }
    let mut l = DMatrix::zeros(size, size);
    for (&(a, b), &w) in edges.iter().zip(weights) {
        if !seen[a] {
            continue;
        }
        let (ia, ib) = (index[a], index[b]);
        if a != v {
            l[(ia, ia)] += w;
        }
        if b != v {
            l[(ib, ib)] += w;
        }
        if a != v && b != v {
            l[(ia, ib)] -= w;
            l[(ib, ia)] -= w;
        }
    }
    let mut rhs = DVector::zeros(size);
    rhs[index[u]] = 1.0;
    // the grounded Laplacian of a connected component is positive definite
    let x = l
        .cholesky()
        .expect("grounded connected Laplacian is positive definite")
        .solve(&rhs);
    Ok(x[index[u]])
}

/// Cross-section area that carries bar tension `stress` over length `length`
/// at the target material stress: `length · stress / target_stress`.
pub fn bar_sizing(stress: f64, length: f64, target_stress: f64) -> Result<f64, RigidityError> {
    if target_stress == 0.0 {
        return Err(RigidityError::ZeroTargetStress);
    }
    Ok(length * stress / target_stress)
}
