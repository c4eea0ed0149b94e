use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::RigidityError;
use crate::cost::{CostGraph, Dim, EdgeTag};

/// Incremental (k,l) pebble game on a multigraph.
///
/// Every vertex starts with `k` pebbles. An edge is accepted when `l + 1`
/// pebbles can be gathered on its endpoints; one of them is then spent to
/// orient the edge out of the paying endpoint.
#[derive(Clone, Debug)]
pub struct PebbleGame {
    k: usize,
    l: usize,
    pebbles: Vec<usize>,
    out: Vec<Vec<usize>>,
    accepted: Vec<(usize, usize)>,
}

impl PebbleGame {
    pub fn new(vertex_count: usize, k: usize, l: usize) -> Result<Self, RigidityError> {
        if k == 0 || l >= 2 * k {
            return Err(RigidityError::PebbleParams { k, l });
        }
        Ok(PebbleGame {
            k,
            l,
            pebbles: vec![k; vertex_count],
            out: vec![Vec::new(); vertex_count],
            accepted: Vec::new(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.pebbles.len()
    }

    pub fn accepted(&self) -> &[(usize, usize)] {
        &self.accepted
    }

    pub fn free_pebbles(&self) -> usize {
        self.pebbles.iter().sum()
    }

    fn check(&self, u: usize, v: usize) -> Result<(), RigidityError> {
        let n = self.vertex_count();
        for x in [u, v] {
            if x >= n {
                return Err(RigidityError::VertexOutOfRange { vertex: x, count: n });
            }
        }
        if u == v {
            return Err(RigidityError::SelfLoop(u));
        }
        Ok(())
    }

    /// Moves one free pebble to `start` along a directed path, reversing the
    /// path. Pebbles resting on `u` or `v` are never taken.
    fn fetch(&mut self, start: usize, u: usize, v: usize) -> bool {
        let n = self.vertex_count();
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut stack = vec![start];
        let mut found = None;
        while let Some(x) = stack.pop() {
            if x != u && x != v && self.pebbles[x] > 0 {
                found = Some(x);
                break;
            }
            for &y in &self.out[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    stack.push(y);
                }
            }
        }
        let Some(target) = found else {
            return false;
        };
        let mut y = target;
        while y != start {
            let x = parent[y];
            let pos = self.out[x]
                .iter()
                .position(|&z| z == y)
                .expect("path edge exists");
            self.out[x].swap_remove(pos);
            self.out[y].push(x);
            y = x;
        }
        self.pebbles[target] -= 1;
        self.pebbles[start] += 1;
        true
    }

    /// Gathers up to `want` pebbles on `u` and `v`; returns how many are there.
    fn gather(&mut self, u: usize, v: usize, want: usize) -> usize {
        while self.pebbles[u] + self.pebbles[v] < want {
            if self.pebbles[u] < self.k && self.fetch(u, u, v) {
                continue;
            }
            if self.pebbles[v] < self.k && self.fetch(v, u, v) {
                continue;
            }
            break;
        }
        self.pebbles[u] + self.pebbles[v]
    }

    /// True when `(u, v)` would be independent of the accepted edges. Pebbles
    /// may move, but the accepted set is unchanged.
    pub fn is_independent(&mut self, u: usize, v: usize) -> Result<bool, RigidityError> {
        self.check(u, v)?;
        Ok(self.gather(u, v, self.l + 1) > self.l)
    }

    /// Accepts `(u, v)` when independent; returns whether it was accepted.
    pub fn try_insert(&mut self, u: usize, v: usize) -> Result<bool, RigidityError> {
        if !self.is_independent(u, v)? {
            return Ok(false);
        }
        let (tail, head) = if self.pebbles[u] > 0 { (u, v) } else { (v, u) };
        self.pebbles[tail] -= 1;
        self.out[tail].push(head);
        self.accepted.push((u, v));
        Ok(true)
    }

    fn reach(&self, sources: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut stack: Vec<usize> = sources.to_vec();
        for &s in sources {
            seen[s] = true;
        }
        while let Some(x) = stack.pop() {
            for &y in &self.out[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// Maximal (k,l)-tight vertex sets spanned by accepted edges.
    ///
    /// For each accepted edge not yet covered, `l` pebbles are gathered on its
    /// endpoints. If no other free pebble is reachable from them, the tight
    /// set is everything that cannot reach a free pebble without passing
    /// through the endpoints. Sorted by smallest vertex.
    pub fn rigid_components(&mut self) -> Vec<Vec<usize>> {
        if self.l == 0 {
            return Vec::new();
        }
        let n = self.vertex_count();
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut covered: BTreeSet<(usize, usize)> = BTreeSet::new();
        let edges = self.accepted.clone();
        for &(u, v) in &edges {
            let key = (u.min(v), u.max(v));
            if covered.contains(&key) {
                continue;
            }
            self.gather(u, v, self.l);
            let r = self.reach(&[u, v]);
            let extra = (0..n).any(|x| r[x] && x != u && x != v && self.pebbles[x] > 0);
            let comp: Vec<usize> = if extra {
                if 2 * self.k == self.l + 1 {
                    vec![key.0, key.1]
                } else {
                    continue;
                }
            } else {
                // reverse search from free pebbles, not expanding through u, v
                let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
                for (x, outs) in self.out.iter().enumerate() {
                    for &y in outs {
                        rev[y].push(x);
                    }
                }
                let mut can_escape = vec![false; n];
                let mut stack: Vec<usize> = (0..n)
                    .filter(|&x| x != u && x != v && self.pebbles[x] > 0)
                    .collect();
                for &x in &stack {
                    can_escape[x] = true;
                }
                while let Some(x) = stack.pop() {
                    for &y in &rev[x] {
                        if !can_escape[y] && y != u && y != v {
                            can_escape[y] = true;
                            stack.push(y);
                        }
                    }
                }
                let members: Vec<usize> = (0..n).filter(|&x| !can_escape[x]).collect();
                // restrict to the part attached to u, v through accepted edges
                let inside: BTreeSet<usize> = members.iter().copied().collect();
                let mut attached = BTreeSet::from([u, v]);
                let mut grew = true;
                while grew {
                    grew = false;
                    for &(a, b) in &edges {
                        let (ia, ib) = (attached.contains(&a), attached.contains(&b));
                        if ia != ib {
                            let other = if ia { b } else { a };
                            if inside.contains(&other) {
                                attached.insert(other);
                                grew = true;
                            }
                        }
                    }
                }
                attached.into_iter().collect()
            };
            let set: BTreeSet<usize> = comp.iter().copied().collect();
            for &(a, b) in &edges {
                if set.contains(&a) && set.contains(&b) {
                    covered.insert((a.min(b), a.max(b)));
                }
            }
            comps.push(comp);
        }
        comps.sort();
        comps
    }
}

/// Outcome of a (k,l) pebble game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityReport {
    pub k: usize,
    pub l: usize,
    /// No edge was rejected.
    pub independent: bool,
    /// Independent and `|E| = k|V| − l`.
    pub minimally_rigid: bool,
    /// The accepted edges reach `k|V| − l`.
    pub rigid: bool,
    /// `k|V| − l` minus the number of accepted edges.
    pub free_dof: i64,
    pub redundant_edges: Vec<(usize, usize)>,
    pub rigid_components: Vec<Vec<usize>>,
}

/// Runs the (k,l) pebble game over `edges` in order.
pub fn pebble_game(
    vertex_count: usize,
    edges: &[(usize, usize)],
    k: usize,
    l: usize,
) -> Result<SparsityReport, RigidityError> {
    let mut game = PebbleGame::new(vertex_count, k, l)?;
    let mut redundant = Vec::new();
    for &(u, v) in edges {
        if !game.try_insert(u, v)? {
            redundant.push((u, v));
        }
    }
    let target = (k * vertex_count) as i64 - l as i64;
    let free_dof = target - game.accepted().len() as i64;
    let independent = redundant.is_empty();
    Ok(SparsityReport {
        k,
        l,
        independent,
        minimally_rigid: independent && edges.len() as i64 == target,
        rigid: free_dof == 0,
        free_dof,
        redundant_edges: redundant,
        rigid_components: game.rigid_components(),
    })
}

/// Body-bar multigraph of a trivariate CoST: one body per witness
/// tetrahedron, three parallel bars per joint shared by two bodies, and one
/// bar per non-witness edge between the bodies holding its endpoints. Bars
/// whose endpoints share a body are omitted.
pub fn body_multigraph(g: &CostGraph) -> (usize, Vec<(usize, usize)>) {
    let members = g.memberships();
    let mut bars = Vec::new();
    for m in &members {
        if let [a, b] = m.as_slice() {
            for _ in 0..3 {
                bars.push((*a, *b));
            }
        }
    }
    for e in g.edges.iter().filter(|e| e.tag != EdgeTag::Witness) {
        let (mu, mv) = (&members[e.u], &members[e.v]);
        if mu.iter().any(|s| mv.contains(s)) {
            continue;
        }
        if let (Some(&a), Some(&b)) = (mu.first(), mv.first()) {
            bars.push((a, b));
        }
    }
    (g.witness.len(), bars)
}

/// The pebble game suited to a CoST: (2,3) on the bar-joint graph in the
/// plane; (6,6) on the body-bar multigraph in space, which is a fast
/// heuristic there (numeric rank is the ground truth).
pub fn cost_pebble_game(g: &CostGraph) -> Result<SparsityReport, RigidityError> {
    match g.dim {
        Dim::Two => pebble_game(g.vertex_count, &g.edge_pairs(), 2, 3),
        Dim::Three => {
            let (n, bars) = body_multigraph(g);
            pebble_game(n, &bars, 6, 6)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const K3: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

    #[test]
    fn triangle_is_minimally_rigid() {
        let r = pebble_game(3, &K3, 2, 3).unwrap();
        assert!(r.independent && r.minimally_rigid && r.rigid);
        assert_eq!(r.free_dof, 0);
        assert_eq!(r.rigid_components, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn bowtie_has_one_free_dof() {
        let e = [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)];
        let r = pebble_game(5, &e, 2, 3).unwrap();
        assert!(r.independent && !r.rigid);
        assert_eq!(r.free_dof, 1);
        assert_eq!(r.rigid_components, vec![vec![0, 1, 2], vec![0, 3, 4]]);
    }

    #[test]
    fn k4_has_one_redundant_edge() {
        let e = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let r = pebble_game(4, &e, 2, 3).unwrap();
        assert!(!r.independent && r.rigid);
        assert_eq!(r.redundant_edges, vec![(2, 3)]);
        assert_eq!(r.rigid_components, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn parameter_range() {
        assert_eq!(
            pebble_game(3, &K3, 2, 4).unwrap_err(),
            RigidityError::PebbleParams { k: 2, l: 4 }
        );
        assert_eq!(
            pebble_game(3, &[(1, 1)], 2, 3).unwrap_err(),
            RigidityError::SelfLoop(1)
        );
    }

    #[test]
    fn body_bar_pair_of_tetrahedra() {
        let g = CostGraph::from_witness(Dim::Three, 7, vec![vec![0, 1, 2, 3], vec![3, 4, 5, 6]]);
        let (n, bars) = body_multigraph(&g);
        assert_eq!((n, bars.len()), (2, 3));
        let r = cost_pebble_game(&g).unwrap();
        // two bodies pinned at a point keep 3 relative rotations
        assert_eq!(r.free_dof, 3);
    }
}
