use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math::Vec3;

/// Ambient dimension of a structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dim {
    /// Bivariate: corner-sharing triangles.
    Two,
    /// Trivariate: corner-sharing tetrahedra.
    Three,
}

impl Dim {
    pub fn get(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Number of vertices of a witness simplex.
    pub fn simplex_size(self) -> usize {
        self.get() + 1
    }

    pub fn from_usize(d: usize) -> Option<Dim> {
        match d {
            2 => Some(Dim::Two),
            3 => Some(Dim::Three),
            _ => None,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// Whether an edge is certified by the witness set or was added on top of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeTag {
    Witness,
    /// Added by stiffening; not part of any witness simplex.
    Stiffening,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub tag: EdgeTag,
}

impl Edge {
    /// Builds an edge with endpoints stored in ascending order.
    pub fn new(a: usize, b: usize, tag: EdgeTag) -> Self {
        let (u, v) = if a <= b { (a, b) } else { (b, a) };
        Edge { u, v, tag }
    }

    pub fn key(&self) -> (usize, usize) {
        (self.u, self.v)
    }

    pub fn other(&self, w: usize) -> usize {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Blue,
    Green,
}

impl Color {
    pub fn flipped(self) -> Color {
        match self {
            Color::Blue => Color::Green,
            Color::Green => Color::Blue,
        }
    }
}

/// Dimension-tagged constraint graph with its witness simplices.
///
/// Vertex ids are the contiguous range `0..vertex_count`. Edges are kept in
/// canonical order (ascending endpoint pairs) by every operation in this
/// crate, and each witness simplex lists its vertices in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct CostGraph {
    pub dim: Dim,
    pub vertex_count: usize,
    pub edges: Vec<Edge>,
    pub witness: Vec<Vec<usize>>,
    pub boundary: BTreeSet<usize>,
    /// Color per witness simplex, when a 2-coloring is known.
    pub coloring: Option<Vec<Color>>,
    /// Ordered foliation layers, each a list of vertex ids.
    pub layers: Option<Vec<Vec<usize>>>,
}

impl CostGraph {
    pub fn empty(dim: Dim) -> Self {
        CostGraph {
            dim,
            vertex_count: 0,
            edges: Vec::new(),
            witness: Vec::new(),
            boundary: BTreeSet::new(),
            coloring: None,
            layers: None,
        }
    }

    /// Builds a graph whose edges are exactly the edges of the given
    /// simplices. Boundary vertices are those lying in a single simplex.
    pub fn from_witness(dim: Dim, vertex_count: usize, witness: Vec<Vec<usize>>) -> Self {
        let mut g = CostGraph {
            dim,
            vertex_count,
            edges: Vec::new(),
            witness,
            boundary: BTreeSet::new(),
            coloring: None,
            layers: None,
        };
        for s in &mut g.witness {
            s.sort_unstable();
        }
        let mut set = BTreeSet::new();
        for s in &g.witness {
            for i in 0..s.len() {
                for j in i + 1..s.len() {
                    set.insert((s[i], s[j]));
                }
            }
        }
        g.edges = set
            .into_iter()
            .map(|(u, v)| Edge::new(u, v, EdgeTag::Witness))
            .collect();
        g.recompute_boundary();
        g
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorts edges, removes exact duplicates and sorts simplex vertex lists.
    pub fn canonicalize(&mut self) {
        for s in &mut self.witness {
            s.sort_unstable();
        }
        self.edges.sort();
        self.edges.dedup();
    }

    /// Marks as boundary exactly the vertices that lie in one witness simplex.
    pub fn recompute_boundary(&mut self) {
        let counts = self.simplex_counts();
        self.boundary = (0..self.vertex_count).filter(|&v| counts[v] == 1).collect();
    }

    /// Number of witness simplices containing each vertex.
    pub fn simplex_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.vertex_count];
        for s in &self.witness {
            for &v in s {
                if v < self.vertex_count {
                    counts[v] += 1;
                }
            }
        }
        counts
    }

    /// Witness simplex indices containing each vertex.
    pub fn memberships(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.vertex_count];
        for (i, s) in self.witness.iter().enumerate() {
            for &v in s {
                if v < self.vertex_count {
                    m[v].push(i);
                }
            }
        }
        m
    }

    /// Sorted neighbor lists over all edges.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.adjacency_filtered(|_| true)
    }

    /// Sorted neighbor lists over witness edges only.
    pub fn witness_adjacency(&self) -> Vec<Vec<usize>> {
        self.adjacency_filtered(|e| e.tag == EdgeTag::Witness)
    }

    fn adjacency_filtered(&self, keep: impl Fn(&Edge) -> bool) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in self.edges.iter().filter(|e| keep(e)) {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.u == v || e.v == v).count()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.edges.iter().any(|e| e.key() == key)
    }

    /// Endpoint pairs of all edges, in stored order.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.u, e.v)).collect()
    }

    /// Maps each witness edge to the index of the simplex containing it.
    /// When edges are shared (an invalid structure) the first simplex wins.
    pub fn edge_simplex_map(&self) -> BTreeMap<(usize, usize), usize> {
        let mut map = BTreeMap::new();
        for (i, s) in self.witness.iter().enumerate() {
            for a in 0..s.len() {
                for b in a + 1..s.len() {
                    let key = if s[a] <= s[b] { (s[a], s[b]) } else { (s[b], s[a]) };
                    map.entry(key).or_insert(i);
                }
            }
        }
        map
    }

    pub fn has_non_witness_edges(&self) -> bool {
        self.edges.iter().any(|e| e.tag != EdgeTag::Witness)
    }

    /// Copy of the graph with every non-witness edge removed.
    pub fn witness_only(&self) -> CostGraph {
        let mut g = self.clone();
        g.edges.retain(|e| e.tag == EdgeTag::Witness);
        g
    }
}

/// Two in-plane lattice vectors under which positions are identified.
pub type Period = [Vec3; 2];

/// Coordinates per vertex. Bivariate structures keep `z = 0`.
///
/// A periodic embedding identifies positions that differ by integer
/// combinations of the two period vectors; edge vectors then use the
/// shortest periodic image.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub dim: Dim,
    pub positions: Vec<Vec3>,
    pub period: Option<Period>,
}

impl Embedding {
    pub fn new(dim: Dim, positions: Vec<Vec3>) -> Self {
        Embedding {
            dim,
            positions,
            period: None,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn is_periodic(&self) -> bool {
        self.period.is_some()
    }

    /// True when every vertex of `g` has a finite position.
    pub fn covers(&self, g: &CostGraph) -> bool {
        self.positions.len() >= g.vertex_count
            && self.positions[..g.vertex_count]
                .iter()
                .all(|p| p.iter().all(|c| c.is_finite()))
    }

    /// Shortest image of `w` relative to `reference` (identity when not
    /// periodic).
    pub fn wrap_near(&self, w: Vec3, reference: &Vec3) -> Vec3 {
        match &self.period {
            None => w,
            Some([a, b]) => {
                let mut best = w;
                let mut best_d = (w - reference).norm_squared();
                for i in -2i32..=2 {
                    for j in -2i32..=2 {
                        let c = w + a * f64::from(i) + b * f64::from(j);
                        let d = (c - reference).norm_squared();
                        if d < best_d - 1e-15 {
                            best = c;
                            best_d = d;
                        }
                    }
                }
                best
            }
        }
    }

    /// Vector from `u` to `v`, using the shortest periodic image.
    pub fn edge_vector(&self, u: usize, v: usize) -> Vec3 {
        let pu = self.positions[u];
        self.wrap_near(self.positions[v], &pu) - pu
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        self.edge_vector(u, v).norm()
    }

    /// Midpoint of `u` and `v` (near `u` for periodic embeddings).
    pub fn midpoint(&self, u: usize, v: usize) -> Vec3 {
        self.positions[u] + self.edge_vector(u, v) * 0.5
    }

    /// Axis-aligned bounding box `(min, max)`; `None` when empty.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.positions.first()?;
        let mut lo = first;
        let mut hi = first;
        for p in &self.positions {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some((lo, hi))
    }
}
