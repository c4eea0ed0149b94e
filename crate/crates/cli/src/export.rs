//! Text exports: OBJ wireframes and meshes, polylines, sparse matrices.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so equal
//! inputs always give equal bytes.

use std::collections::BTreeMap;
use std::fmt::Write;

use costkit_core::continuum::{Patch, PatchSet, Polyline, TriangleMesh};
use costkit_core::cost::{CostGraph, Embedding};
use costkit_core::nalgebra::DMatrix;
use costkit_core::Vec3;

fn vertex_line(out: &mut String, p: &Vec3) {
    let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
}

/// Bars as OBJ `l` elements over the embedded joints.
pub fn wireframe_obj(g: &CostGraph, e: &Embedding) -> String {
    let mut out = format!(
        "# costkit wireframe: {} joints, {} bars\n",
        g.vertex_count,
        g.edges.len()
    );
    for p in e.positions.iter().take(g.vertex_count) {
        vertex_line(&mut out, p);
    }
    for edge in &g.edges {
        let _ = writeln!(out, "l {} {}", edge.u + 1, edge.v + 1);
    }
    out
}

/// Triangle mesh as OBJ `f` elements.
pub fn mesh_obj(m: &TriangleMesh) -> String {
    let mut out = format!(
        "# costkit mesh: {} vertices, {} triangles\n",
        m.vertices.len(),
        m.triangles.len()
    );
    for p in &m.vertices {
        vertex_line(&mut out, p);
    }
    for t in &m.triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

/// Tessellates every closed body of a beam surface separately and welds it,
/// so bodies that touch at a joint stay distinct components.
pub fn beam_mesh(p: &PatchSet, samples: usize) -> TriangleMesh {
    let mut groups: BTreeMap<Option<usize>, Vec<Patch>> = BTreeMap::new();
    for (patch, edge) in p.patches.iter().zip(&p.edge_of) {
        groups.entry(*edge).or_default().push(patch.clone());
    }
    let mut out = TriangleMesh::default();
    for patches in groups.into_values() {
        let m = PatchSet::from_patches(patches)
            .tessellate(samples)
            .welded(WELD_STEP);
        let base = out.vertices.len();
        out.vertices.extend(m.vertices);
        out.triangles
            .extend(m.triangles.iter().map(|t| t.map(|v| v + base)));
    }
    out
}

/// Rounding step used to merge coincident tessellation vertices.
pub const WELD_STEP: f64 = 1e-9;

/// Polylines as plain text: a header per curve, then one point per line.
pub fn polylines_text(lines: &[Polyline]) -> String {
    let mut out = format!("polylines {}\n", lines.len());
    for (k, l) in lines.iter().enumerate() {
        let kind = if l.closed { "closed" } else { "open" };
        let _ = writeln!(out, "polyline {k} {kind} {}", l.points.len());
        for p in &l.points {
            let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
        }
    }
    out
}

/// Parses [`polylines_text`] output back; used by tests and scripts.
pub fn parse_polylines(text: &str) -> Option<Vec<Polyline>> {
    let mut lines = text.lines();
    let count: usize = lines.next()?.strip_prefix("polylines ")?.parse().ok()?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let header: Vec<&str> = lines.next()?.split_whitespace().collect();
        if header.len() != 4 || header[0] != "polyline" {
            return None;
        }
        let closed = match header[2] {
            "closed" => true,
            "open" => false,
            _ => return None,
        };
        let n: usize = header[3].parse().ok()?;
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let c: Vec<f64> = lines
                .next()?
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .ok()?;
            if c.len() != 3 {
                return None;
            }
            points.push(Vec3::new(c[0], c[1], c[2]));
        }
        out.push(Polyline { points, closed });
    }
    Some(out)
}

/// Non-zero entries as `row,col,value` CSV after a shape comment.
pub fn matrix_triplets(m: &DMatrix<f64>) -> String {
    let mut out = format!("# rows {} cols {}\nrow,col,value\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let x = m[(i, j)];
            if x != 0.0 {
                let _ = writeln!(out, "{i},{j},{x}");
            }
        }
    }
    out
}
