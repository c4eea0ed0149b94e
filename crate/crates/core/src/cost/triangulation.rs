use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::graph::{CostGraph, Dim, Embedding, Period};
use super::planar::rotation_system;
use super::{ensure_valid, CostError};
use crate::math::{cross2, Vec3};

/// A triangular face: `edges[k]` joins `vertices[k]` and `vertices[(k + 1) % 3]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Face {
    pub vertices: [usize; 3],
    pub edges: [usize; 3],
}

impl Face {
    fn slot_of_edge(&self, edge: usize) -> Option<usize> {
        self.edges.iter().position(|&x| x == edge)
    }
}

/// A triangulated surface patch with explicit edge slots.
///
/// Edges are addressed by index so parallel edges (which occur on small
/// periodic patches) stay distinguishable. Under the medial correspondence
/// edge `i` is CoST joint `i` and face `f` is witness triangle `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangulation {
    pub vertex_count: usize,
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<Face>,
    pub positions: Option<Vec<Vec3>>,
    pub period: Option<Period>,
}

/// What a single flip did, in triangulation terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TriangulationFlip {
    pub edge: usize,
    pub removed: [usize; 2],
    pub inserted: [usize; 2],
    pub faces: [usize; 2],
}

impl Triangulation {
    /// Builds edge slots from vertex-triple faces; edges are numbered in order
    /// of first appearance.
    pub fn from_faces(vertex_count: usize, faces: &[Vec<usize>]) -> Result<Self, CostError> {
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut out = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let &[a, b, c] = f.as_slice() else {
                return Err(CostError::NonTriangularFace {
                    face: fi,
                    len: f.len(),
                });
            };
            let vs = [a, b, c];
            let mut es = [0; 3];
            for k in 0..3 {
                let (x, y) = (vs[k], vs[(k + 1) % 3]);
                if x == y {
                    return Err(CostError::SelfLoop(x));
                }
                let key = (x.min(y), x.max(y));
                es[k] = *index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
            }
            out.push(Face {
                vertices: vs,
                edges: es,
            });
        }
        let t = Triangulation {
            vertex_count,
            edges,
            faces: out,
            positions: None,
            period: None,
        };
        t.check_edge_faces()?;
        Ok(t)
    }

    pub fn with_positions(mut self, positions: Vec<Vec3>) -> Self {
        self.positions = Some(positions);
        self
    }

    fn check_edge_faces(&self) -> Result<(), CostError> {
        for (edge, fs) in self.edge_faces().iter().enumerate() {
            if fs.is_empty() || fs.len() > 2 {
                return Err(CostError::EdgeFaceCount {
                    edge,
                    count: fs.len(),
                });
            }
        }
        Ok(())
    }

    /// Face indices incident to each edge slot.
    pub fn edge_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.edges.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &x in &f.edges {
                out[x].push(fi);
            }
        }
        out
    }

    fn faces_of(&self, edge: usize) -> Vec<usize> {
        self.faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.edges.contains(&edge))
            .map(|(i, _)| i)
            .collect()
    }

    /// First edge slot joining `u` and `v`.
    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        let key = [u.min(v), u.max(v)];
        self.edges.iter().position(|e| *e == key)
    }

    pub fn is_interior(&self, edge: usize) -> bool {
        self.faces_of(edge).len() == 2
    }

    pub fn interior_edges(&self) -> Vec<usize> {
        self.edge_faces()
            .iter()
            .enumerate()
            .filter(|(_, fs)| fs.len() == 2)
            .map(|(i, _)| i)
            .collect()
    }

    /// Position of `v`, taking the periodic image nearest `near` if given.
    pub fn position_near(&self, v: usize, near: Option<&Vec3>) -> Option<Vec3> {
        let p = self.positions.as_ref()?[v];
        Some(match (near, &self.period) {
            (Some(r), Some(_)) => self.wrap_near(p, r),
            _ => p,
        })
    }

    fn wrap_near(&self, w: Vec3, reference: &Vec3) -> Vec3 {
        let proxy = Embedding {
            dim: Dim::Two,
            positions: Vec::new(),
            period: self.period,
        };
        proxy.wrap_near(w, reference)
    }

    /// The quadrilateral `(u, w, v, x)` around an interior edge `(u, v)` with
    /// opposite vertices `w` and `x`.
    pub fn quad(&self, edge: usize) -> Result<[usize; 4], CostError> {
        let fs = self.faces_of(edge);
        if fs.len() != 2 {
            return Err(CostError::BoundaryEdge(edge));
        }
        let [u, v] = self.edges[edge];
        let third = |f: &Face| {
            let k = f.slot_of_edge(edge).expect("face contains edge");
            f.vertices[(k + 2) % 3]
        };
        Ok([u, third(&self.faces[fs[0]]), v, third(&self.faces[fs[1]])])
    }

    /// Combinatorial and geometric flip test: the edge is interior, the new
    /// diagonal would not duplicate an edge, and (when positions are known)
    /// the quadrilateral `(u, w, v, x)` is strictly convex, each turn having
    /// a normalized cross product above `tol`.
    pub fn is_flip_admissible(&self, edge: usize, tol: f64) -> bool {
        let Ok([u, w, v, x]) = self.quad(edge) else {
            return false;
        };
        if w == x || self.find_edge(w, x).is_some() {
            return false;
        }
        if self.positions.is_none() {
            return true;
        }
        strictly_convex(&self.quad_points([u, w, v, x]), tol)
    }

    /// Every edge slot for which [`Self::is_flip_admissible`] holds, computed
    /// with one pass over the faces.
    pub fn admissible_flips(&self, tol: f64) -> Vec<usize> {
        let edge_faces = self.edge_faces();
        let mut present: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for e in &self.edges {
            *present.entry(*e).or_insert(0) += 1;
        }
        (0..self.edges.len())
            .filter(|&edge| {
                let [f1, f2] = edge_faces[edge][..] else {
                    return false;
                };
                let third = |f: &Face| {
                    let k = f.slot_of_edge(edge).expect("face contains edge");
                    f.vertices[(k + 2) % 3]
                };
                let (w, x) = (third(&self.faces[f1]), third(&self.faces[f2]));
                if w == x || present.contains_key(&[w.min(x), w.max(x)]) {
                    return false;
                }
                let [u, v] = self.edges[edge];
                self.positions.is_none() || strictly_convex(&self.quad_points([u, w, v, x]), tol)
            })
            .collect()
    }

    fn quad_points(&self, q: [usize; 4]) -> [Vec3; 4] {
        let pu = self.position_near(q[0], None).expect("positions present");
        let p = |i: usize| self.position_near(q[i], Some(&pu)).expect("positions present");
        [pu, p(1), p(2), p(3)]
    }

    /// Replaces interior edge `edge = (u, v)` by the opposite diagonal `(w, x)`,
    /// reusing the edge slot and both face slots.
    ///
    /// The two new faces are assigned to the old face slots so that flipping
    /// the same slot twice restores the original faces exactly.
    pub fn flip(&mut self, edge: usize) -> Result<TriangulationFlip, CostError> {
        let fs = self.faces_of(edge);
        if fs.len() != 2 {
            return Err(CostError::BoundaryEdge(edge));
        }
        let (f1, f2) = (fs[0], fs[1]);
        let a = self.faces[f1];
        let b = self.faces[f2];
        let ka = a.slot_of_edge(edge).expect("face contains edge");
        let kb = b.slot_of_edge(edge).expect("face contains edge");
        let (u, v, w) = (a.vertices[ka], a.vertices[(ka + 1) % 3], a.vertices[(ka + 2) % 3]);
        let p_v = a.edges[(ka + 1) % 3];
        let p_u = a.edges[(ka + 2) % 3];
        let (bu, x) = (b.vertices[kb], b.vertices[(kb + 2) % 3]);
        let (q_first, q_second) = (b.edges[(kb + 2) % 3], b.edges[(kb + 1) % 3]);
        // q_first touches b.vertices[kb], q_second touches b.vertices[kb + 1]
        let (q_u, q_v) = if bu == u {
            (q_first, q_second)
        } else {
            (q_second, q_first)
        };
        if w == x || self.find_edge(w, x).is_some() {
            return Err(CostError::MultiEdge(w.min(x), w.max(x)));
        }
        let m = p_u.min(p_v).min(q_u).min(q_v);
        let m_in_u_side = m == p_u || m == q_u;
        let m_in_f1 = m == p_u || m == p_v;
        let u_side_to_f1 = m_in_u_side == m_in_f1;
        let u_face = Face {
            vertices: [u, x, w],
            edges: [q_u, edge, p_u],
        };
        let v_face = Face {
            vertices: [v, w, x],
            edges: [p_v, edge, q_v],
        };
        let (n1, n2) = if u_side_to_f1 {
            (u_face, v_face)
        } else {
            (v_face, u_face)
        };
        self.faces[f1] = self.oriented(n1);
        self.faces[f2] = self.oriented(n2);
        let removed = self.edges[edge];
        self.edges[edge] = [w.min(x), w.max(x)];
        Ok(TriangulationFlip {
            edge,
            removed,
            inserted: self.edges[edge],
            faces: [f1, f2],
        })
    }

    /// Reorders a face counter-clockwise when positions are known.
    fn oriented(&self, f: Face) -> Face {
        let Some(p0) = self.position_near(f.vertices[0], None) else {
            return f;
        };
        let p1 = self.position_near(f.vertices[1], Some(&p0)).expect("positions");
        let p2 = self.position_near(f.vertices[2], Some(&p0)).expect("positions");
        if cross2(&(p1 - p0), &(p2 - p0)) >= 0.0 {
            f
        } else {
            let [a, b, c] = f.vertices;
            let [ab, bc, ca] = f.edges;
            Face {
                vertices: [a, c, b],
                edges: [ca, bc, ab],
            }
        }
    }
}

/// Strict convexity of the closed planar quadrilateral `q`: all four turns
/// have the same sign and a normalized cross product above `tol`.
pub fn strictly_convex(q: &[Vec3; 4], tol: f64) -> bool {
    let mut sign = 0.0;
    for i in 0..4 {
        let a = q[(i + 1) % 4] - q[i];
        let b = q[(i + 2) % 4] - q[(i + 1) % 4];
        let denom = a.norm() * b.norm();
        if denom <= f64::EPSILON {
            return false;
        }
        let c = cross2(&a, &b) / denom;
        if c.abs() <= tol {
            return false;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return false;
        }
    }
    true
}

/// Medial construction: one joint per triangulation edge (placed at the edge
/// midpoint when positions are known) and one witness triangle per face.
/// Edges on a single face become boundary joints.
pub fn triangulation_to_cost(t: &Triangulation) -> Result<(CostGraph, Option<Embedding>), CostError> {
    t.check_edge_faces()?;
    let witness = t.faces.iter().map(|f| f.edges.to_vec()).collect();
    let g = CostGraph::from_witness(Dim::Two, t.edges.len(), witness);
    let emb = t.positions.as_ref().map(|_| {
        let positions = t
            .edges
            .iter()
            .map(|&[a, b]| {
                let pa = t.position_near(a, None).expect("positions");
                let pb = t.position_near(b, Some(&pa)).expect("positions");
                (pa + pb) * 0.5
            })
            .collect();
        Embedding {
            dim: Dim::Two,
            positions,
            period: t.period,
        }
    });
    Ok((g, emb))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Recovers the triangulation whose medial graph is `g`.
///
/// Each witness edge is a corner of a triangulation face. Around an interior
/// joint the embedding orders its four witness neighbors as two pairs from
/// the two simplices; rotation-adjacent neighbors from different simplices
/// meet at a common triangulation vertex. Vertices are the resulting corner
/// classes, numbered by their smallest corner (witness edge in canonical
/// order). Vertex positions are reconstructed from the joint positions.
pub fn cost_to_triangulation(g: &CostGraph, e: &Embedding) -> Result<Triangulation, CostError> {
    if g.dim != Dim::Two {
        return Err(CostError::WrongDimension {
            expected: Dim::Two,
            found: g.dim,
        });
    }
    if !e.covers(g) {
        return Err(CostError::MissingEmbedding);
    }
    ensure_valid(g)?;
    let simplex_of = g.edge_simplex_map();
    let corners: Vec<(usize, usize)> = simplex_of.keys().copied().collect();
    let corner_id = |a: usize, b: usize| -> usize {
        let key = (a.min(b), a.max(b));
        corners.binary_search(&key).expect("witness edge")
    };
    let simplex = |a: usize, b: usize| simplex_of[&(a.min(b), a.max(b))];

    let adj = g.witness_adjacency();
    let rot = rotation_system(&adj, e);
    let mut uf = UnionFind((0..corners.len()).collect());
    // endpoints of each joint's triangulation edge, as corner ids
    let mut ends = vec![[0usize; 2]; g.vertex_count];
    for (x, r) in rot.iter().enumerate() {
        match r.len() {
            2 => ends[x] = [corner_id(x, r[0]), corner_id(x, r[1])],
            4 => {
                let s: Vec<usize> = r.iter().map(|&y| simplex(x, y)).collect();
                let shift = if s[0] == s[1] && s[2] == s[3] && s[0] != s[2] {
                    0
                } else if s[1] == s[2] && s[3] == s[0] && s[1] != s[3] {
                    1
                } else {
                    return Err(CostError::NonPlanar(x));
                };
                let q = |k: usize| r[(k + shift) % 4];
                uf.union(corner_id(x, q(1)), corner_id(x, q(2)));
                uf.union(corner_id(x, q(3)), corner_id(x, q(0)));
                ends[x] = [corner_id(x, q(0)), corner_id(x, q(1))];
            }
            _ => return Err(CostError::NonPlanar(x)),
        }
    }

    let mut label = vec![usize::MAX; corners.len()];
    let mut vertex_count = 0;
    for c in 0..corners.len() {
        let root = uf.find(c);
        if label[root] == usize::MAX {
            label[root] = vertex_count;
            vertex_count += 1;
        }
        label[c] = label[root];
    }

    let mut edges = Vec::with_capacity(g.vertex_count);
    for (x, [c0, c1]) in ends.iter().enumerate() {
        let (a, b) = (label[*c0], label[*c1]);
        if a == b {
            return Err(CostError::NonPlanar(x));
        }
        edges.push([a.min(b), a.max(b)]);
    }

    let mut sums = vec![Vec3::zeros(); vertex_count];
    let mut counts = vec![0usize; vertex_count];
    let mut faces = Vec::with_capacity(g.witness.len());
    for s in &g.witness {
        let [x, y, z] = [s[0], s[1], s[2]];
        let vxy = label[corner_id(x, y)];
        let vyz = label[corner_id(y, z)];
        let vzx = label[corner_id(z, x)];
        faces.push(Face {
            vertices: [vxy, vyz, vzx],
            edges: [y, z, x],
        });
        for (a, b, opp, v) in [(x, y, z, vxy), (y, z, x, vyz), (z, x, y, vzx)] {
            let pa = e.positions[a];
            let pb = e.wrap_near(e.positions[b], &pa);
            let po = e.wrap_near(e.positions[opp], &pa);
            let est = pa + pb - po;
            let est = if counts[v] == 0 {
                est
            } else {
                e.wrap_near(est, &(sums[v] / counts[v] as f64))
            };
            sums[v] += est;
            counts[v] += 1;
        }
    }
    let positions: Vec<Vec3> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let mut t = Triangulation {
        vertex_count,
        edges,
        faces,
        positions: Some(positions),
        period: e.period,
    };
    for i in 0..t.faces.len() {
        t.faces[i] = t.oriented(t.faces[i]);
    }
    Ok(t)
}
