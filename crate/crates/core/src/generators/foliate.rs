use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{check_positive, GeneratorError};
use crate::cost::{two_color, Color, CostGraph, Dim, Embedding};
use crate::math::Vec3;

/// A bivariate layer to be stacked. The layer's coloring is used when
/// present, otherwise it is computed with [`two_color`].
#[derive(Clone, Debug, PartialEq)]
pub struct FoliationLayer {
    pub graph: CostGraph,
    pub embedding: Embedding,
}

/// Stacking parameters.
///
/// Layer `j` is translated by `shifts[j]` in the plane and lifted to height
/// `2·j·half_spacing`. Gap `i` (between layers `i` and `i + 1`) connects blue
/// triangles when `i` is even and green ones when `i` is odd.
#[derive(Clone, Debug, PartialEq)]
pub struct FoliationSpec {
    pub half_spacing: f64,
    pub shifts: Vec<[f64; 2]>,
    /// Drop gap-colored triangles without a partner instead of failing.
    pub allow_unmatched: bool,
}

impl FoliationSpec {
    pub fn unshifted(layers: usize, half_spacing: f64) -> Self {
        FoliationSpec {
            half_spacing,
            shifts: vec![[0.0, 0.0]; layers],
            allow_unmatched: false,
        }
    }
}

fn gap_color(gap: usize) -> Color {
    if gap % 2 == 0 {
        Color::Blue
    } else {
        Color::Green
    }
}

/// Stacks bivariate CoST layers into a trivariate one.
///
/// For each gap every triangle of the gap color in the lower layer is paired
/// with the upper-layer triangle of the same color whose (shifted) centroid
/// is nearest in the plane, within a tenth of the shortest layer edge. Each
/// pair gets an apex at the midpoint of the two lifted centroids, joined to
/// all six triangle joints; the two resulting tetrahedra form the witness
/// set. Triangles that end up in no tetrahedron (the unused color of the two
/// outer layers) are dropped together with joints left in no tetrahedron.
///
/// Joint ids are layer 0, apexes of gap 0, layer 1, and so on, each block in
/// its original order; `layers` records these blocks.
pub fn foliate(
    layers: &[FoliationLayer],
    spec: &FoliationSpec,
) -> Result<(CostGraph, Embedding), GeneratorError> {
    let n = layers.len();
    if n < 2 {
        return Err(GeneratorError::TooFewLayers(n));
    }
    if spec.shifts.len() != n {
        return Err(GeneratorError::ShiftCount(spec.shifts.len(), n));
    }
    check_positive("half spacing", spec.half_spacing)?;
    let h = spec.half_spacing;

    let mut colorings = Vec::with_capacity(n);
    for (j, layer) in layers.iter().enumerate() {
        let g = &layer.graph;
        if g.dim != Dim::Two || !layer.embedding.covers(g) {
            return Err(GeneratorError::BadLayer(j));
        }
        let c = match &g.coloring {
            Some(c) if c.len() == g.witness.len() => c.clone(),
            _ => two_color(g).map_err(|source| GeneratorError::Layer { layer: j, source })?,
        };
        colorings.push(c);
    }
    if !spec.allow_unmatched {
        let count = |c: &[Color], x: Color| c.iter().filter(|&&y| y == x).count();
        let (b0, g0) = (
            count(&colorings[0], Color::Blue),
            count(&colorings[0], Color::Green),
        );
        for (j, c) in colorings.iter().enumerate().skip(1) {
            let (b, gr) = (count(c, Color::Blue), count(c, Color::Green));
            if (b, gr) != (b0, g0) {
                return Err(GeneratorError::ColorCounts {
                    layer: j,
                    blue: b,
                    green: gr,
                    blue0: b0,
                    green0: g0,
                });
            }
        }
    }

    // lifted, shifted positions per layer
    let lifted: Vec<Vec<Vec3>> = layers
        .iter()
        .enumerate()
        .map(|(j, l)| {
            let s = Vec3::new(spec.shifts[j][0], spec.shifts[j][1], 2.0 * j as f64 * h);
            l.embedding.positions[..l.graph.vertex_count]
                .iter()
                .map(|p| Vec3::new(p.x, p.y, 0.0) + s)
                .collect()
        })
        .collect();
    let period = layers[0].embedding.period;
    let planar = Embedding {
        dim: Dim::Two,
        positions: Vec::new(),
        period,
    };
    let centroid = |j: usize, t: usize| -> Vec3 {
        let s = &layers[j].graph.witness[t];
        let p0 = lifted[j][s[0]];
        let sum = s
            .iter()
            .map(|&v| planar.wrap_near(lifted[j][v], &p0))
            .fold(Vec3::zeros(), |a, b| a + b);
        sum / s.len() as f64
    };

    // global ids: layer blocks interleaved with apex blocks
    let mut offsets = Vec::with_capacity(n);
    let mut tets: Vec<Vec<usize>> = Vec::new();
    let mut apex_pos: Vec<Vec<Vec3>> = Vec::with_capacity(n - 1);
    let mut next = 0usize;
    let mut pending: Vec<(usize, usize, usize)> = Vec::new(); // (gap, lower tri, upper tri)
    for gap in 0..n - 1 {
        let color = gap_color(gap);
        let (lo, hi) = (gap, gap + 1);
        let tol = 0.1 * min_edge(&layers[lo]).min(min_edge(&layers[hi]));
        let uppers: Vec<(usize, Vec3)> = (0..layers[hi].graph.witness.len())
            .filter(|&t| colorings[hi][t] == color)
            .map(|t| (t, centroid(hi, t)))
            .collect();
        let mut taken = BTreeSet::new();
        let mut apexes = Vec::new();
        for t in (0..layers[lo].graph.witness.len()).filter(|&t| colorings[lo][t] == color) {
            let c = centroid(lo, t);
            let best = uppers
                .iter()
                .map(|&(u, cu)| {
                    let cu = planar.wrap_near(cu, &c);
                    let d = ((cu.x - c.x).powi(2) + (cu.y - c.y).powi(2)).sqrt();
                    (d, u, cu)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            match best {
                Some((d, u, cu)) if d <= tol => {
                    if !taken.insert(u) {
                        return Err(GeneratorError::DuplicateMatch { gap, triangle: u });
                    }
                    pending.push((gap, t, u));
                    apexes.push((c + cu) * 0.5);
                }
                _ if spec.allow_unmatched => {}
                _ => {
                    return Err(GeneratorError::Unmatched {
                        gap,
                        triangle: t,
                        tol,
                    })
                }
            }
        }
        if !spec.allow_unmatched && taken.len() != uppers.len() {
            let t = uppers
                .iter()
                .map(|&(u, _)| u)
                .find(|u| !taken.contains(u))
                .expect("an upper triangle is unmatched");
            return Err(GeneratorError::Unmatched {
                gap,
                triangle: t,
                tol,
            });
        }
        apex_pos.push(apexes);
    }

    let mut apex_offsets = Vec::with_capacity(n - 1);
    for j in 0..n {
        offsets.push(next);
        next += layers[j].graph.vertex_count;
        if j + 1 < n {
            apex_offsets.push(next);
            next += apex_pos[j].len();
        }
    }
    let mut apex_counter = vec![0usize; n - 1];
    for &(gap, t, u) in &pending {
        let a = apex_offsets[gap] + apex_counter[gap];
        apex_counter[gap] += 1;
        let mut lower: Vec<usize> = layers[gap].graph.witness[t]
            .iter()
            .map(|&v| offsets[gap] + v)
            .collect();
        lower.push(a);
        let mut upper: Vec<usize> = layers[gap + 1].graph.witness[u]
            .iter()
            .map(|&v| offsets[gap + 1] + v)
            .collect();
        upper.push(a);
        tets.push(lower);
        tets.push(upper);
    }

    let mut positions = Vec::with_capacity(next);
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(2 * n - 1);
    for j in 0..n {
        blocks.push((offsets[j]..offsets[j] + layers[j].graph.vertex_count).collect());
        positions.extend_from_slice(&lifted[j]);
        if j + 1 < n {
            blocks.push((apex_offsets[j]..apex_offsets[j] + apex_pos[j].len()).collect());
            positions.extend_from_slice(&apex_pos[j]);
        }
    }

    // drop joints that lie in no tetrahedron
    let mut used = vec![false; next];
    for t in &tets {
        for &v in t {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; next];
    let mut kept = 0;
    for v in 0..next {
        if used[v] {
            remap[v] = kept;
            kept += 1;
        }
    }
    for t in &mut tets {
        for v in t.iter_mut() {
            *v = remap[*v];
        }
    }
    let positions: Vec<Vec3> = positions
        .into_iter()
        .zip(&used)
        .filter(|(_, &u)| u)
        .map(|(p, _)| p)
        .collect();
    let layers_out: Vec<Vec<usize>> = blocks
        .into_iter()
        .map(|b| b.into_iter().filter(|&v| used[v]).map(|v| remap[v]).collect())
        .collect();

    let mut g = CostGraph::from_witness(Dim::Three, kept, tets);
    g.layers = Some(layers_out);
    g.coloring = two_color(&g).ok();
    let e = Embedding {
        dim: Dim::Three,
        positions,
        period,
    };
    Ok((g, e))
}

fn min_edge(layer: &FoliationLayer) -> f64 {
    layer
        .graph
        .edges
        .iter()
        .map(|e| layer.embedding.distance(e.u, e.v))
        .fold(f64::INFINITY, f64::min)
}
