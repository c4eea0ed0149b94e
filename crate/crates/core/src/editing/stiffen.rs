use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_dim, EditError};
use crate::cost::planar::boundary_sequence;
use crate::cost::{ensure_valid, CostGraph, Dim, Edge, EdgeTag, Embedding};
use crate::math::Vec3;
use crate::rigidity::{
    bar_rows, constraint_matrix, matrix_rank, rigidity_matrix, Constraint, PebbleGame, RowSpace,
    DEFAULT_RANK_TOL,
};

/// Seed used for slider directions when no seed is given.
const DEFAULT_SLIDER_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StiffeningVariant {
    /// Extra bars between boundary vertices.
    Edges,
    /// Boundary vertices with all coordinates fixed.
    Pins,
    /// Boundary vertices confined to lines.
    Sliders,
}

/// Where the boundary sequence starts and which random lines sliders get.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnchorChoice {
    /// Start at the first vertex of the boundary walk.
    Deterministic,
    /// Start at a seeded random boundary position; also seeds slider lines.
    Seeded(u64),
}

/// A vertex confined to the line through `anchor` along `direction`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slider {
    pub vertex: usize,
    pub anchor: Vec3,
    pub direction: Vec3,
}

impl Slider {
    /// Unit normal of the line in the plane (the constraint row direction).
    pub fn normal(&self) -> Vec3 {
        Vec3::new(-self.direction.y, self.direction.x, 0.0).normalize()
    }
}

/// A CoST together with the constraints that ground or rigidify it.
#[derive(Clone, Debug, PartialEq)]
pub struct StiffenedStructure {
    /// The structure without any stiffening edges.
    pub base: CostGraph,
    pub variant: StiffeningVariant,
    /// Index into the boundary walk where stiffening started.
    pub anchor_index: usize,
    pub added_edges: Vec<(usize, usize)>,
    pub pins: Vec<(usize, Vec3)>,
    pub sliders: Vec<Slider>,
}

impl StiffenedStructure {
    /// The base graph with the added edges tagged as stiffening.
    pub fn graph(&self) -> CostGraph {
        let mut g = self.base.clone();
        g.edges.extend(
            self.added_edges
                .iter()
                .map(|&(u, v)| Edge::new(u, v, EdgeTag::Stiffening)),
        );
        g.canonicalize();
        g
    }

    /// Bars of [`Self::graph`] followed by pin and slider constraints.
    pub fn constraints(&self) -> Vec<Constraint> {
        let mut cs = bar_rows(&self.graph());
        cs.extend(self.pins.iter().map(|&(vertex, _)| Constraint::Pin { vertex }));
        cs.extend(self.sliders.iter().map(|s| Constraint::Slider {
            vertex: s.vertex,
            normal: s.normal(),
        }));
        cs
    }

    /// Whether pins or sliders remove all motions, rigid ones included.
    pub fn is_grounded(&self) -> bool {
        !self.pins.is_empty() || !self.sliders.is_empty()
    }
}

fn check_boundary_degrees(g: &CostGraph, expected: usize) -> Result<(), EditError> {
    if g.boundary.is_empty() {
        return Err(EditError::NoBoundary);
    }
    for &v in &g.boundary {
        let degree = g.degree(v);
        if degree != expected {
            return Err(EditError::BoundaryDegree {
                vertex: v,
                degree,
                expected,
            });
        }
    }
    Ok(())
}

/// Grounds or rigidifies an open bivariate CoST through its boundary.
///
/// The boundary vertices are taken in the order of the outer face walk,
/// rotated to start at the anchor.
///
/// * `Edges`: bars between boundary vertices at walk distance 1, then 2 and
///   so on, each kept only if the (2,3) pebble game accepts it, until
///   `|E| = 2|V| − 3`. For a boundary of `|B|` degree-2 vertices this adds
///   `|B| − 3` bars.
/// * `Pins`: every other boundary vertex, `⌈|B|/2⌉` in total, pinned at its
///   current position.
/// * `Sliders`: every boundary vertex on a line through its position with a
///   random direction.
///
/// Grounded variants are checked numerically to leave no motion at all.
pub fn stiffen(
    g: &CostGraph,
    e: &Embedding,
    variant: StiffeningVariant,
    anchor: AnchorChoice,
) -> Result<StiffenedStructure, EditError> {
    check_dim(g.dim, Dim::Two)?;
    if g.has_non_witness_edges() {
        return Err(EditError::HasStiffening);
    }
    ensure_valid(g)?;
    if !e.covers(g) {
        return Err(EditError::MissingEmbedding);
    }
    check_boundary_degrees(g, 2)?;
    let walk = boundary_sequence(g, e).map_err(|_| EditError::BoundaryNotCycle)?;
    let b = walk.len();
    let (start, seed) = match anchor {
        AnchorChoice::Deterministic => (0, DEFAULT_SLIDER_SEED),
        AnchorChoice::Seeded(s) => (ChaCha8Rng::seed_from_u64(s).random_range(0..b), s),
    };
    let seq: Vec<usize> = (0..b).map(|i| walk[(start + i) % b]).collect();
    let mut out = StiffenedStructure {
        base: g.clone(),
        variant,
        anchor_index: start,
        added_edges: Vec::new(),
        pins: Vec::new(),
        sliders: Vec::new(),
    };
    let n = g.vertex_count;
    match variant {
        StiffeningVariant::Edges => {
            let mut game = PebbleGame::new(n, 2, 3)?;
            for (u, v) in g.edge_pairs() {
                game.try_insert(u, v)?;
            }
            let target = (2 * n).saturating_sub(3);
            'search: for skip in 1..=b / 2 {
                for i in 0..b {
                    if game.accepted().len() >= target {
                        break 'search;
                    }
                    let (u, v) = (seq[i], seq[(i + skip) % b]);
                    if g.has_edge(u, v) || out.added_edges.contains(&(u.min(v), u.max(v))) {
                        continue;
                    }
                    if game.try_insert(u, v)? {
                        out.added_edges.push((u.min(v), u.max(v)));
                    }
                }
            }
            if game.accepted().len() < target {
                return Err(EditError::StiffeningIncomplete {
                    reached: game.accepted().len(),
                    target,
                });
            }
        }
        StiffeningVariant::Pins => {
            out.pins = seq.iter().step_by(2).map(|&v| (v, e.positions[v])).collect();
        }
        StiffeningVariant::Sliders => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            out.sliders = seq
                .iter()
                .map(|&v| {
                    let t: f64 = rng.random_range(0.0..core::f64::consts::PI);
                    Slider {
                        vertex: v,
                        anchor: e.positions[v],
                        direction: Vec3::new(t.cos(), t.sin(), 0.0),
                    }
                })
                .collect();
        }
    }
    if out.is_grounded() {
        let m = constraint_matrix(Dim::Two, n, &out.constraints(), e)?;
        let rank = matrix_rank(&m, DEFAULT_RANK_TOL);
        if rank < 2 * n {
            return Err(EditError::NotGrounded {
                nullity: 2 * n - rank,
            });
        }
    }
    Ok(out)
}

/// Greedy bar stiffening of an open trivariate CoST.
///
/// Candidate bars join pairs of boundary vertices, tried in order of
/// increasing length (ties by vertex ids); a bar is kept when it raises the
/// numeric rank of the rigidity matrix. Stops at rank `3|V| − 6`.
pub fn stiffen_3d(g: &CostGraph, e: &Embedding) -> Result<StiffenedStructure, EditError> {
    check_dim(g.dim, Dim::Three)?;
    if g.has_non_witness_edges() {
        return Err(EditError::HasStiffening);
    }
    ensure_valid(g)?;
    if !e.covers(g) {
        return Err(EditError::MissingEmbedding);
    }
    if g.boundary.is_empty() {
        return Err(EditError::NoBoundary);
    }
    let n = g.vertex_count;
    let cols = 3 * n;
    let target = cols.saturating_sub(6);
    let r = rigidity_matrix(g, e)?;
    let mut space = RowSpace::new(cols, DEFAULT_RANK_TOL);
    for row in r.row_iter() {
        if space.rank() >= target {
            break;
        }
        space.try_add(&row.transpose());
    }
    let boundary: Vec<usize> = g.boundary.iter().copied().collect();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &u) in boundary.iter().enumerate() {
        for &v in &boundary[i + 1..] {
            if !g.has_edge(u, v) {
                candidates.push((e.distance(u, v), u, v));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut added = Vec::new();
    for (len, u, v) in candidates {
        if space.rank() >= target {
            break;
        }
        if len == 0.0 {
            continue;
        }
        let d = e.edge_vector(u, v);
        let mut row = DVector::zeros(cols);
        for k in 0..3 {
            row[3 * u + k] = -d[k];
            row[3 * v + k] = d[k];
        }
        if space.try_add(&row) {
            added.push((u, v));
        }
    }
    if space.rank() < target {
        return Err(EditError::StiffeningIncomplete {
            reached: space.rank(),
            target,
        });
    }
    Ok(StiffenedStructure {
        base: g.clone(),
        variant: StiffeningVariant::Edges,
        anchor_index: 0,
        added_edges: added,
        pins: Vec::new(),
        sliders: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{kagome_2d, kagome_3d, Topology};
    use crate::rigidity::{cost_pebble_game, numeric_rank, TrivialMotions};
    use alloc::vec;

    fn bowtie() -> (CostGraph, Embedding) {
        kagome_2d(1, 1, 1.0, Topology::Open).unwrap()
    }

    #[test]
    fn bowtie_edges_variant_adds_one_bar() {
        let (g, e) = bowtie();
        let s = stiffen(&g, &e, StiffeningVariant::Edges, AnchorChoice::Deterministic).unwrap();
        assert_eq!(s.added_edges.len(), 1);
        let sg = s.graph();
        assert_eq!(sg.edge_count(), 2 * 5 - 3);
        assert!(cost_pebble_game(&sg).unwrap().minimally_rigid);
    }

    /// Small deterministic offsets that break the collinearities of the
    /// regular realization.
    fn jiggle(e: &Embedding) -> Embedding {
        let mut out = e.clone();
        for (v, p) in out.positions.iter_mut().enumerate() {
            let t = v as f64;
            *p += Vec3::new(0.02 * (1.7 * t).sin(), 0.02 * (2.3 * t).cos(), 0.0);
        }
        out
    }

    #[test]
    fn bowtie_grounded_variants() {
        let (g, e) = bowtie();
        let s = stiffen(&g, &e, StiffeningVariant::Sliders, AnchorChoice::Seeded(3)).unwrap();
        assert_eq!(s.sliders.len(), 4);
        let m = constraint_matrix(Dim::Two, 5, &s.constraints(), &e).unwrap();
        assert_eq!(matrix_rank(&m, DEFAULT_RANK_TOL), 10);
        // Alternate pins land on opposite corners, collinear with the shared
        // vertex, so both triangles can rotate about their pins together.
        assert_eq!(
            stiffen(&g, &e, StiffeningVariant::Pins, AnchorChoice::Deterministic),
            Err(EditError::NotGrounded { nullity: 1 })
        );
        let p = stiffen(
            &g,
            &jiggle(&e),
            StiffeningVariant::Pins,
            AnchorChoice::Deterministic,
        )
        .unwrap();
        assert_eq!(p.pins.len(), 2);
    }

    #[test]
    fn kagome_patch_adds_boundary_minus_three() {
        let (g, e) = kagome_2d(3, 4, 1.0, Topology::Open).unwrap();
        let dof = cost_pebble_game(&g).unwrap().free_dof;
        assert_eq!(dof, g.boundary.len() as i64 - 3);
        for anchor in [AnchorChoice::Deterministic, AnchorChoice::Seeded(11)] {
            let s = stiffen(&g, &e, StiffeningVariant::Edges, anchor).unwrap();
            assert_eq!(s.added_edges.len() as i64, dof);
            assert!(cost_pebble_game(&s.graph()).unwrap().minimally_rigid);
        }
        let s = stiffen(&g, &e, StiffeningVariant::Sliders, AnchorChoice::Deterministic).unwrap();
        assert_eq!(s.sliders.len(), g.boundary.len());
        let p = stiffen(
            &g,
            &jiggle(&e),
            StiffeningVariant::Pins,
            AnchorChoice::Deterministic,
        )
        .unwrap();
        assert_eq!(p.pins.len(), g.boundary.len().div_ceil(2));
    }

    #[test]
    fn closed_structure_is_rejected() {
        let (g, e) = kagome_2d(2, 2, 1.0, Topology::Toroidal).unwrap();
        assert_eq!(
            stiffen(&g, &e, StiffeningVariant::Edges, AnchorChoice::Deterministic),
            Err(EditError::NoBoundary)
        );
    }

    #[test]
    fn trivariate_patch_reaches_full_rank() {
        let (g, e) = kagome_3d(2, 2, 2, 1.0, Topology::Open).unwrap();
        let s = stiffen_3d(&g, &e).unwrap();
        assert!(!s.added_edges.is_empty());
        let sg = s.graph();
        let m = rigidity_matrix(&sg, &e).unwrap();
        let r = numeric_rank(
            &m,
            DEFAULT_RANK_TOL,
            &TrivialMotions::new(Dim::Three, g.vertex_count, &e, false),
        );
        assert_eq!(r.rank, 3 * g.vertex_count - 6);
    }

    #[test]
    fn rigid_tetrahedron_needs_nothing() {
        let g = CostGraph::from_witness(Dim::Three, 4, vec![vec![0, 1, 2, 3]]);
        let e = Embedding::new(Dim::Three, vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()]);
        assert!(stiffen_3d(&g, &e).unwrap().added_edges.is_empty());
    }
}
