//! The on-disk CoST document: versioned JSON in canonical order.

use std::collections::BTreeSet;

use costkit_core::cost::{Color, CostGraph, Dim, Edge, EdgeTag, Embedding};
use costkit_core::editing::{Slider, StiffenedStructure, StiffeningVariant};
use costkit_core::Vec3;
use serde::{Deserialize, Serialize};

/// Format version written by [`save`] and the only one [`load`] accepts.
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DocError {
    #[error("document syntax: {0}")]
    Syntax(String),
    #[error("unsupported document version {found} (expected {VERSION})")]
    Version { found: u32 },
    #[error("{path}: {message}")]
    Integrity { path: String, message: String },
}

fn integrity(path: impl Into<String>, message: impl Into<String>) -> DocError {
    DocError::Integrity {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: usize,
    pub position: [f64; 3],
    pub boundary: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagRecord {
    Witness,
    Stiffening,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    pub tag: TagRecord,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorRecord {
    Blue,
    Green,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantRecord {
    Edges,
    Pins,
    Sliders,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinRecord {
    pub vertex: usize,
    pub position: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliderRecord {
    pub vertex: usize,
    pub anchor: [f64; 3],
    pub direction: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StiffeningRecord {
    pub variant: VariantRecord,
    pub anchor_index: usize,
    pub added_edges: Vec<[usize; 2]>,
    pub pins: Vec<PinRecord>,
    pub sliders: Vec<SliderRecord>,
}

/// Where a document came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    /// One line per command that produced or changed the structure.
    pub provenance: Vec<String>,
    /// Flip logs in their text format, oldest first.
    pub flip_logs: Vec<String>,
    /// Refinement steps applied, oldest first.
    pub refinement: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostDocument {
    pub version: u32,
    pub dimension: usize,
    pub vertices: Vec<VertexRecord>,
    pub period: Option<[[f64; 3]; 2]>,
    pub edges: Vec<EdgeRecord>,
    pub witness: Vec<Vec<usize>>,
    pub coloring: Option<Vec<ColorRecord>>,
    pub layers: Option<Vec<Vec<usize>>>,
    pub stiffening: Option<StiffeningRecord>,
    pub metadata: Metadata,
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn vec3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// A structure as held in memory: graph, embedding, optional stiffening and
/// metadata. When stiffening is present, `graph` is its base (witness edges
/// only) and the added bars live in the stiffening record.
#[derive(Clone, Debug, PartialEq)]
pub struct Structure {
    pub graph: CostGraph,
    pub embedding: Embedding,
    pub stiffening: Option<StiffenedStructure>,
    pub metadata: Metadata,
}

impl Structure {
    pub fn new(graph: CostGraph, embedding: Embedding) -> Self {
        Structure {
            graph,
            embedding,
            stiffening: None,
            metadata: Metadata::default(),
        }
    }

    /// The graph including stiffening bars.
    pub fn full_graph(&self) -> CostGraph {
        match &self.stiffening {
            Some(s) => s.graph(),
            None => self.graph.clone(),
        }
    }
}

impl CostDocument {
    /// Canonical document of a structure: ids ascending, edges sorted by
    /// endpoints then tag, simplices sorted internally.
    pub fn from_structure(s: &Structure) -> Self {
        let g = s.full_graph();
        let mut edges: Vec<Edge> = g.edges.clone();
        edges.sort();
        let mut added: Vec<[usize; 2]> = s
            .stiffening
            .iter()
            .flat_map(|st| st.added_edges.iter().map(|&(u, v)| [u.min(v), u.max(v)]))
            .collect();
        added.sort_unstable();
        CostDocument {
            version: VERSION,
            dimension: g.dim.get(),
            vertices: (0..g.vertex_count)
                .map(|v| VertexRecord {
                    id: v,
                    position: arr(&s.embedding.positions[v]),
                    boundary: g.boundary.contains(&v),
                })
                .collect(),
            period: s.embedding.period.map(|[a, b]| [arr(&a), arr(&b)]),
            edges: edges
                .iter()
                .map(|e| EdgeRecord {
                    u: e.u,
                    v: e.v,
                    tag: match e.tag {
                        EdgeTag::Witness => TagRecord::Witness,
                        EdgeTag::Stiffening => TagRecord::Stiffening,
                    },
                })
                .collect(),
            witness: g
                .witness
                .iter()
                .map(|w| {
                    let mut w = w.clone();
                    w.sort_unstable();
                    w
                })
                .collect(),
            coloring: g.coloring.as_ref().map(|c| {
                c.iter()
                    .map(|x| match x {
                        Color::Blue => ColorRecord::Blue,
                        Color::Green => ColorRecord::Green,
                    })
                    .collect()
            }),
            layers: g.layers.clone(),
            stiffening: s.stiffening.as_ref().map(|st| StiffeningRecord {
                variant: match st.variant {
                    StiffeningVariant::Edges => VariantRecord::Edges,
                    StiffeningVariant::Pins => VariantRecord::Pins,
                    StiffeningVariant::Sliders => VariantRecord::Sliders,
                },
                anchor_index: st.anchor_index,
                added_edges: added,
                pins: st
                    .pins
                    .iter()
                    .map(|(v, p)| PinRecord {
                        vertex: *v,
                        position: arr(p),
                    })
                    .collect(),
                sliders: st
                    .sliders
                    .iter()
                    .map(|sl| SliderRecord {
                        vertex: sl.vertex,
                        anchor: arr(&sl.anchor),
                        direction: arr(&sl.direction),
                    })
                    .collect(),
            }),
            metadata: s.metadata.clone(),
        }
    }

    /// Checks referential integrity and rebuilds the in-memory structure.
    pub fn to_structure(&self) -> Result<Structure, DocError> {
        if self.version != VERSION {
            return Err(DocError::Version { found: self.version });
        }
        let dim = match Dim::from_usize(self.dimension) {
            Some(d) => d,
            None => {
                return Err(integrity(
                    "dimension",
                    format!("must be 2 or 3, got {}", self.dimension),
                ))
            }
        };
        let n = self.vertices.len();
        let check = |path: String, v: usize| {
            if v < n {
                Ok(())
            } else {
                Err(integrity(path, format!("dangling vertex id {v} ({n} vertices)")))
            }
        };
        let mut positions = Vec::with_capacity(n);
        let mut boundary = BTreeSet::new();
        for (i, r) in self.vertices.iter().enumerate() {
            if r.id != i {
                return Err(integrity(
                    format!("vertices[{i}].id"),
                    format!("expected id {i}, got {}", r.id),
                ));
            }
            if r.position.iter().any(|c| !c.is_finite()) {
                return Err(integrity(
                    format!("vertices[{i}].position"),
                    "non-finite coordinate",
                ));
            }
            positions.push(vec3(&r.position));
            if r.boundary {
                boundary.insert(i);
            }
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, r) in self.edges.iter().enumerate() {
            check(format!("edges[{k}].u"), r.u)?;
            check(format!("edges[{k}].v"), r.v)?;
            if r.u == r.v {
                return Err(integrity(format!("edges[{k}]"), format!("self loop at {}", r.u)));
            }
            let tag = match r.tag {
                TagRecord::Witness => EdgeTag::Witness,
                TagRecord::Stiffening => EdgeTag::Stiffening,
            };
            edges.push(Edge::new(r.u, r.v, tag));
        }
        for (k, w) in self.witness.iter().enumerate() {
            if w.len() != dim.simplex_size() {
                return Err(integrity(
                    format!("witness[{k}]"),
                    format!("expected {} vertices, got {}", dim.simplex_size(), w.len()),
                ));
            }
            for (j, &v) in w.iter().enumerate() {
                check(format!("witness[{k}][{j}]"), v)?;
            }
        }
        if let Some(c) = &self.coloring {
            if c.len() != self.witness.len() {
                return Err(integrity(
                    "coloring",
                    format!("{} colors for {} simplices", c.len(), self.witness.len()),
                ));
            }
        }
        if let Some(layers) = &self.layers {
            for (l, layer) in layers.iter().enumerate() {
                for (j, &v) in layer.iter().enumerate() {
                    check(format!("layers[{l}][{j}]"), v)?;
                }
            }
        }
        let mut witness_edges: Vec<Edge> = Vec::new();
        let mut stiff_edges: Vec<(usize, usize)> = Vec::new();
        for e in &edges {
            match e.tag {
                EdgeTag::Witness => witness_edges.push(*e),
                EdgeTag::Stiffening => stiff_edges.push((e.u, e.v)),
            }
        }
        let graph = CostGraph {
            dim,
            vertex_count: n,
            edges: witness_edges,
            witness: self.witness.clone(),
            boundary,
            coloring: self.coloring.as_ref().map(|c| {
                c.iter()
                    .map(|x| match x {
                        ColorRecord::Blue => Color::Blue,
                        ColorRecord::Green => Color::Green,
                    })
                    .collect()
            }),
            layers: self.layers.clone(),
        };
        let stiffening = match &self.stiffening {
            None => {
                if let Some(k) = self.edges.iter().position(|e| e.tag == TagRecord::Stiffening) {
                    return Err(integrity(
                        format!("edges[{k}].tag"),
                        "stiffening edge without a stiffening block",
                    ));
                }
                None
            }
            Some(st) => {
                let mut listed: Vec<(usize, usize)> = Vec::new();
                for (k, &[u, v]) in st.added_edges.iter().enumerate() {
                    check(format!("stiffening.added_edges[{k}][0]"), u)?;
                    check(format!("stiffening.added_edges[{k}][1]"), v)?;
                    listed.push((u.min(v), u.max(v)));
                }
                let (mut a, mut b) = (listed.clone(), stiff_edges.clone());
                a.sort_unstable();
                b.sort_unstable();
                if a != b {
                    return Err(integrity(
                        "stiffening.added_edges",
                        "does not match the edges tagged stiffening",
                    ));
                }
                for (k, p) in st.pins.iter().enumerate() {
                    check(format!("stiffening.pins[{k}].vertex"), p.vertex)?;
                }
                for (k, s) in st.sliders.iter().enumerate() {
                    check(format!("stiffening.sliders[{k}].vertex"), s.vertex)?;
                }
                Some(StiffenedStructure {
                    base: graph.clone(),
                    variant: match st.variant {
                        VariantRecord::Edges => StiffeningVariant::Edges,
                        VariantRecord::Pins => StiffeningVariant::Pins,
                        VariantRecord::Sliders => StiffeningVariant::Sliders,
                    },
                    anchor_index: st.anchor_index,
                    added_edges: listed,
                    pins: st.pins.iter().map(|p| (p.vertex, vec3(&p.position))).collect(),
                    sliders: st
                        .sliders
                        .iter()
                        .map(|s| Slider {
                            vertex: s.vertex,
                            anchor: vec3(&s.anchor),
                            direction: vec3(&s.direction),
                        })
                        .collect(),
                })
            }
        };
        Ok(Structure {
            graph,
            embedding: Embedding {
                dim,
                positions,
                period: self.period.map(|[a, b]| [vec3(&a), vec3(&b)]),
            },
            stiffening,
            metadata: self.metadata.clone(),
        })
    }
}

/// Canonical bytes of a structure (pretty JSON, trailing newline).
pub fn save(s: &Structure) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&CostDocument::from_structure(s))
        .expect("documents contain only serializable data");
    out.push(b'\n');
    out
}

/// Parses and checks a document.
pub fn load(bytes: &[u8]) -> Result<Structure, DocError> {
    // read the version first so that future layouts get a versioned error
    #[derive(Deserialize)]
    struct Probe {
        version: Option<u32>,
    }
    let probe: Probe = serde_json::from_slice(bytes).map_err(|e| DocError::Syntax(e.to_string()))?;
    match probe.version {
        Some(VERSION) => {}
        Some(found) => return Err(DocError::Version { found }),
        None => return Err(integrity("version", "missing")),
    }
    let doc: CostDocument = serde_json::from_slice(bytes).map_err(|e| DocError::Syntax(e.to_string()))?;
    doc.to_structure()
}

#[cfg(test)]
mod tests {
    use super::*;
    use costkit_core::editing::{stiffen, AnchorChoice};
    use costkit_core::generators::{kagome_2d, kagome_3d, Topology};

    fn bowtie() -> Structure {
        let (g, e) = kagome_2d(1, 1, 1.0, Topology::Open).unwrap();
        Structure::new(g, e)
    }

    #[test]
    fn round_trip_is_byte_stable() {
        let mut samples = vec![bowtie()];
        let (g, e) = kagome_2d(2, 2, 1.0, Topology::Toroidal).unwrap();
        samples.push(Structure::new(g, e));
        let (g, e) = kagome_3d(1, 2, 2, 1.0, Topology::Open).unwrap();
        samples.push(Structure::new(g, e));
        let (g, e) = kagome_2d(2, 2, 1.0, Topology::Open).unwrap();
        let mut s = Structure::new(g.clone(), e.clone());
        s.stiffening = Some(stiffen(&g, &e, StiffeningVariant::Sliders, AnchorChoice::Seeded(3)).unwrap());
        s.metadata.provenance.push("test".into());
        samples.push(s);
        for s in samples {
            let bytes = save(&s);
            let back = load(&bytes).unwrap();
            assert_eq!(save(&back), bytes);
            assert_eq!(back.graph.edges, s.graph.edges);
        }
    }

    #[test]
    fn truncated_input_is_a_syntax_error() {
        let bytes = save(&bowtie());
        assert!(matches!(
            load(&bytes[..bytes.len() / 2]),
            Err(DocError::Syntax(_))
        ));
    }

    #[test]
    fn dangling_edge_names_the_field() {
        let mut doc = CostDocument::from_structure(&bowtie());
        doc.edges[2].v = 17;
        let bytes = serde_json::to_vec(&doc).unwrap();
        let err = load(&bytes).unwrap_err();
        assert_eq!(
            err,
            DocError::Integrity {
                path: "edges[2].v".into(),
                message: "dangling vertex id 17 (5 vertices)".into()
            }
        );
        assert!(err.to_string().contains("17"));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let mut doc = CostDocument::from_structure(&bowtie());
        doc.version = 7;
        let bytes = serde_json::to_vec(&doc).unwrap();
        assert_eq!(load(&bytes), Err(DocError::Version { found: 7 }));
    }
}
