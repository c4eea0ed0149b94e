use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::graph::{CostGraph, EdgeTag};

/// One violated structural invariant, with the ids needed to locate it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    SelfLoop {
        vertex: usize,
    },
    EdgeOutOfRange {
        u: usize,
        v: usize,
    },
    DuplicateEdge {
        u: usize,
        v: usize,
    },
    SimplexSize {
        simplex: usize,
        size: usize,
        expected: usize,
    },
    SimplexVertexOutOfRange {
        simplex: usize,
        vertex: usize,
    },
    RepeatedSimplexVertex {
        simplex: usize,
        vertex: usize,
    },
    MissingSimplexEdge {
        simplex: usize,
        u: usize,
        v: usize,
    },
    SharedSimplexEdge {
        u: usize,
        v: usize,
        first: usize,
        second: usize,
    },
    UncoveredWitnessEdge {
        u: usize,
        v: usize,
    },
    SimplexMembership {
        vertex: usize,
        count: usize,
        expected: usize,
    },
    WitnessDegree {
        vertex: usize,
        degree: usize,
        expected: usize,
    },
    ColoringLength {
        colors: usize,
        simplices: usize,
    },
    ImproperColoring {
        vertex: usize,
        first: usize,
        second: usize,
    },
    LayerVertexOutOfRange {
        layer: usize,
        vertex: usize,
    },
    LayerCover {
        vertex: usize,
        count: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            SelfLoop { vertex } => write!(f, "self loop at vertex {vertex}"),
            EdgeOutOfRange { u, v } => write!(f, "edge ({u}, {v}) references a missing vertex"),
            DuplicateEdge { u, v } => write!(f, "edge ({u}, {v}) is listed more than once"),
            SimplexSize {
                simplex,
                size,
                expected,
            } => {
                write!(f, "simplex {simplex} has {size} vertices, expected {expected}")
            }
            SimplexVertexOutOfRange { simplex, vertex } => {
                write!(f, "simplex {simplex} references missing vertex {vertex}")
            }
            RepeatedSimplexVertex { simplex, vertex } => {
                write!(f, "simplex {simplex} repeats vertex {vertex}")
            }
            MissingSimplexEdge { simplex, u, v } => {
                write!(f, "simplex {simplex} edge ({u}, {v}) is not a graph edge")
            }
            SharedSimplexEdge { u, v, first, second } => {
                write!(f, "edge ({u}, {v}) is shared by simplices {first} and {second}")
            }
            UncoveredWitnessEdge { u, v } => {
                write!(f, "witness edge ({u}, {v}) lies in no witness simplex")
            }
            SimplexMembership {
                vertex,
                count,
                expected,
            } => write!(
                f,
                "vertex {vertex} in {count} witness simplices, expected {expected}"
            ),
            WitnessDegree {
                vertex,
                degree,
                expected,
            } => write!(
                f,
                "vertex {vertex} has witness degree {degree}, expected {expected}"
            ),
            ColoringLength { colors, simplices } => {
                write!(f, "coloring has {colors} entries for {simplices} simplices")
            }
            ImproperColoring {
                vertex,
                first,
                second,
            } => write!(
                f,
                "simplices {first} and {second} share vertex {vertex} and a color"
            ),
            LayerVertexOutOfRange { layer, vertex } => {
                write!(f, "layer {layer} references missing vertex {vertex}")
            }
            LayerCover { vertex, count } => {
                write!(f, "vertex {vertex} appears in {count} layers, expected 1")
            }
        }
    }
}

/// Outcome of [`validate_cost`]; empty means the structure is a valid CoST.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every CoST invariant and reports all violations.
///
/// Validity is defined by the stored witness set: extra triangles or
/// tetrahedra formed by edges of different simplices are not counted.
/// Interior vertices must lie in two simplices and have witness degree `2d`;
/// vertices in the `boundary` set lie in one simplex with witness degree `d`.
/// Non-witness (stiffening) edges are ignored by the degree rules.
pub fn validate_cost(g: &CostGraph) -> ValidationReport {
    let n = g.vertex_count;
    let d = g.dim.get();
    let mut out = Vec::new();

    let mut edge_tags: BTreeMap<(usize, usize), EdgeTag> = BTreeMap::new();
    for e in &g.edges {
        if e.u == e.v {
            out.push(Violation::SelfLoop { vertex: e.u });
            continue;
        }
        if e.u >= n || e.v >= n {
            out.push(Violation::EdgeOutOfRange { u: e.u, v: e.v });
            continue;
        }
        if edge_tags.insert(e.key(), e.tag).is_some() {
            out.push(Violation::DuplicateEdge { u: e.u, v: e.v });
        }
    }

    let mut owner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (si, s) in g.witness.iter().enumerate() {
        if s.len() != g.dim.simplex_size() {
            out.push(Violation::SimplexSize {
                simplex: si,
                size: s.len(),
                expected: g.dim.simplex_size(),
            });
        }
        let mut ok = true;
        for (a, &x) in s.iter().enumerate() {
            if x >= n {
                out.push(Violation::SimplexVertexOutOfRange {
                    simplex: si,
                    vertex: x,
                });
                ok = false;
            }
            if s[..a].contains(&x) {
                out.push(Violation::RepeatedSimplexVertex {
                    simplex: si,
                    vertex: x,
                });
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        for a in 0..s.len() {
            for b in a + 1..s.len() {
                let key = if s[a] < s[b] { (s[a], s[b]) } else { (s[b], s[a]) };
                if !edge_tags.contains_key(&key) {
                    out.push(Violation::MissingSimplexEdge {
                        simplex: si,
                        u: key.0,
                        v: key.1,
                    });
                }
                if let Some(&first) = owner.get(&key) {
                    out.push(Violation::SharedSimplexEdge {
                        u: key.0,
                        v: key.1,
                        first,
                        second: si,
                    });
                } else {
                    owner.insert(key, si);
                }
            }
        }
    }

    let mut witness_degree = vec![0usize; n];
    for (&(u, v), &tag) in &edge_tags {
        if tag != EdgeTag::Witness {
            continue;
        }
        witness_degree[u] += 1;
        witness_degree[v] += 1;
        if !owner.contains_key(&(u, v)) {
            out.push(Violation::UncoveredWitnessEdge { u, v });
        }
    }

    let counts = g.simplex_counts();
    for v in 0..n {
        let boundary = g.boundary.contains(&v);
        let expected = if boundary { 1 } else { 2 };
        if counts[v] != expected {
            out.push(Violation::SimplexMembership {
                vertex: v,
                count: counts[v],
                expected,
            });
        }
        let expected_degree = d * expected;
        if witness_degree[v] != expected_degree {
            out.push(Violation::WitnessDegree {
                vertex: v,
                degree: witness_degree[v],
                expected: expected_degree,
            });
        }
    }

    if let Some(colors) = &g.coloring {
        if colors.len() != g.witness.len() {
            out.push(Violation::ColoringLength {
                colors: colors.len(),
                simplices: g.witness.len(),
            });
        } else {
            for (v, m) in g.memberships().iter().enumerate() {
                for a in 0..m.len() {
                    for b in a + 1..m.len() {
                        if colors[m[a]] == colors[m[b]] {
                            out.push(Violation::ImproperColoring {
                                vertex: v,
                                first: m[a],
                                second: m[b],
                            });
                        }
                    }
                }
            }
        }
    }

    if let Some(layers) = &g.layers {
        let mut seen = vec![0usize; n];
        for (li, layer) in layers.iter().enumerate() {
            for &v in layer {
                if v >= n {
                    out.push(Violation::LayerVertexOutOfRange { layer: li, vertex: v });
                } else {
                    seen[v] += 1;
                }
            }
        }
        for (v, &c) in seen.iter().enumerate() {
            if c != 1 {
                out.push(Violation::LayerCover { vertex: v, count: c });
            }
        }
    }

    ValidationReport { violations: out }
}
