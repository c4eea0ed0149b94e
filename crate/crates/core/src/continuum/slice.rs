use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::patch::{Patch, PatchSet};
use super::{ContinuumError, Polyline};
use crate::math::{quantize3, Vec3};

/// Default flatness tolerance for [`slice_plane`].
pub const SLICE_TOL: f64 = 1e-6;

/// Deepest subdivision level; `4^-16` shrinks any bounded net far below
/// useful tolerances.
const MAX_DEPTH: u32 = 16;

/// Subdivision depth needed for a patch to be flat within `tol`: every
/// split quarters the second differences of the control net.
fn depth_for(p: &Patch, tol: f64) -> u32 {
    let mut dev = p.flatness();
    let mut d = 0;
    while dev > tol && d < MAX_DEPTH {
        dev *= 0.25;
        d += 1;
    }
    d
}

/// Intersects a patch set with the plane through `point` with normal
/// `normal`.
///
/// All patches are subdivided uniformly to a common depth at which every
/// sub-net is flat within `tol`; sub-nets entirely on one side of the plane
/// are pruned by the convex-hull property. Each leaf is cut as a bilinear
/// cell (corners on the surface, points on the plane count as the positive
/// side), and the segments are chained into polylines by joining endpoints
/// closer than `tol`. Closed bodies give closed polylines.
pub fn slice_plane(
    p: &PatchSet,
    point: Vec3,
    normal: Vec3,
    tol: f64,
) -> Result<Vec<Polyline>, ContinuumError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(ContinuumError::BadTolerance(tol));
    }
    let len = normal.norm();
    if !(len > 0.0 && len.is_finite()) {
        return Err(ContinuumError::ZeroNormal);
    }
    let n = normal / len;
    let depth = p.patches.iter().map(|q| depth_for(q, tol)).max().unwrap_or(0);
    let mut segments = Vec::new();
    for (k, patch) in p.patches.iter().enumerate() {
        cut(patch, k, depth, &point, &n, tol, &mut segments)?;
    }
    Ok(chain(&segments, tol))
}

fn cut(
    patch: &Patch,
    index: usize,
    depth: u32,
    point: &Vec3,
    n: &Vec3,
    tol: f64,
    out: &mut Vec<[Vec3; 2]>,
) -> Result<(), ContinuumError> {
    let dist = patch.net.map(|row| row.map(|q| (q - point).dot(n)));
    let flat = dist.iter().flatten();
    let (lo, hi) = flat.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
        (a.min(x), b.max(x))
    });
    if lo > 0.0 || hi < 0.0 {
        return Ok(());
    }
    if depth > 0 {
        for child in patch.split() {
            cut(&child, index, depth - 1, point, n, tol, out)?;
        }
        return Ok(());
    }
    if lo >= -tol && hi <= tol {
        return Err(ContinuumError::TangentPlane(index));
    }
    let net = &patch.net;
    let corners = [net[0][0], net[2][0], net[2][2], net[0][2]];
    let d = [dist[0][0], dist[2][0], dist[2][2], dist[0][2]];
    let centre = d.iter().sum::<f64>() * 0.25;
    for [a, b] in cell_segments(d, centre) {
        let at = |edge: usize| {
            let (i, j) = (edge, (edge + 1) % 4);
            let t = d[i] / (d[i] - d[j]);
            corners[i] + (corners[j] - corners[i]) * t
        };
        out.push([at(a), at(b)]);
    }
    Ok(())
}

/// Marching-squares case for one cell with corner values `d` in cyclic
/// order; returns pairs of crossed edges, edge `k` joining corners `k` and
/// `k + 1`. Zero counts as positive; saddles follow the sign of `centre`.
pub(crate) fn cell_segments(d: [f64; 4], centre: f64) -> Vec<[usize; 2]> {
    let pos = d.map(|x| x >= 0.0);
    let crossed: Vec<usize> = (0..4).filter(|&k| pos[k] != pos[(k + 1) % 4]).collect();
    match crossed.len() {
        2 => vec![[crossed[0], crossed[1]]],
        4 => {
            // cut off the two corners whose sign differs from the centre;
            // corner k sits between edges k - 1 and k
            let c = centre >= 0.0;
            (0..4)
                .filter(|&k| pos[k] != c)
                .map(|k| [(k + 3) % 4, k])
                .collect()
        }
        _ => Vec::new(),
    }
}

/// Chains segments into polylines, identifying endpoints within `tol`.
pub(crate) fn chain(segments: &[[Vec3; 2]], tol: f64) -> Vec<Polyline> {
    // cluster endpoints on a grid of cell size `tol`, probing neighbours
    let mut cells: BTreeMap<[i64; 3], Vec<usize>> = BTreeMap::new();
    let mut reps: Vec<Vec3> = Vec::new();
    let mut node_of = |p: Vec3, cells: &mut BTreeMap<[i64; 3], Vec<usize>>| -> usize {
        let key = quantize3(&p, tol);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let k = [key[0] + dx, key[1] + dy, key[2] + dz];
                    if let Some(ids) = cells.get(&k) {
                        if let Some(&id) = ids.iter().find(|&&id| (reps[id] - p).norm() <= tol) {
                            return id;
                        }
                    }
                }
            }
        }
        reps.push(p);
        cells.entry(key).or_default().push(reps.len() - 1);
        reps.len() - 1
    };
    let mut edges: Vec<[usize; 2]> = Vec::new();
    for s in segments {
        let a = node_of(s[0], &mut cells);
        let b = node_of(s[1], &mut cells);
        if a != b {
            edges.push([a, b]);
        }
    }
    link(&reps, &edges)
}

/// Walks an undirected segment graph into polylines: open chains start at
/// nodes of odd degree, the remaining edges form closed loops.
pub(crate) fn link(points: &[Vec3], edges: &[[usize; 2]]) -> Vec<Polyline> {
    let mut incident = vec![Vec::new(); points.len()];
    for (k, &[a, b]) in edges.iter().enumerate() {
        incident[a].push(k);
        incident[b].push(k);
    }
    let mut used = vec![false; edges.len()];
    let mut out = Vec::new();
    let walk = |start: usize, used: &mut Vec<bool>| -> Option<Polyline> {
        let mut path = vec![start];
        let mut at = start;
        while let Some(&k) = incident[at].iter().find(|&&k| !used[k]) {
            used[k] = true;
            at = if edges[k][0] == at {
                edges[k][1]
            } else {
                edges[k][0]
            };
            path.push(at);
            if at == start {
                break;
            }
        }
        if path.len() < 2 {
            return None;
        }
        let closed = path.len() > 2 && path[0] == *path.last().unwrap_or(&usize::MAX);
        if closed {
            path.pop();
        }
        Some(Polyline {
            points: path.iter().map(|&v| points[v]).collect(),
            closed,
        })
    };
    let odd = (0..points.len()).filter(|&v| incident[v].len() % 2 == 1);
    let starts: Vec<usize> = odd.chain(0..points.len()).collect();
    for v in starts {
        while incident[v].iter().any(|&k| !used[k]) {
            if let Some(p) = walk(v, &mut used) {
                out.push(p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::patch::square_tube;

    #[test]
    fn square_tube_cross_section() {
        let tube = square_tube(0.4, 2.0);
        let loops = slice_plane(&tube, Vec3::new(0.0, 0.0, 0.7), Vec3::z(), SLICE_TOL).unwrap();
        assert_eq!(loops.len(), 1);
        assert!(loops[0].closed);
        assert!((loops[0].length() - 1.6).abs() < 1e-12);
        for q in &loops[0].points {
            assert!((q.z - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_plane_gives_nothing() {
        let tube = square_tube(0.4, 2.0);
        assert!(slice_plane(&tube, Vec3::new(0.0, 0.0, 5.0), Vec3::z(), SLICE_TOL)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn tangent_plane_is_rejected() {
        let tube = square_tube(0.4, 2.0);
        assert!(matches!(
            slice_plane(&tube, Vec3::new(0.0, 0.0, 2.0), Vec3::z(), SLICE_TOL),
            Err(ContinuumError::TangentPlane(_))
        ));
        assert_eq!(
            slice_plane(&tube, Vec3::zeros(), Vec3::zeros(), SLICE_TOL),
            Err(ContinuumError::ZeroNormal)
        );
    }

    #[test]
    fn saddle_cases_cut_opposite_corners() {
        assert_eq!(cell_segments([1.0, -1.0, 1.0, -1.0], 0.5), vec![[0, 1], [2, 3]]);
        assert_eq!(cell_segments([1.0, -1.0, 1.0, -1.0], -0.5), vec![[3, 0], [1, 2]]);
        assert_eq!(cell_segments([1.0, 1.0, -1.0, -1.0], 0.0), vec![[1, 3]]);
        assert!(cell_segments([0.0, 1.0, 2.0, 3.0], 1.0).is_empty());
    }

    #[test]
    fn link_separates_open_and_closed() {
        let pts: Vec<Vec3> = (0..6).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let lines = link(&pts, &[[0, 1], [1, 2], [2, 0], [3, 4], [5, 4]]);
        assert_eq!(lines.len(), 2);
        let open = lines.iter().find(|l| !l.closed).unwrap();
        assert_eq!(open.points.len(), 3);
        let closed = lines.iter().find(|l| l.closed).unwrap();
        assert_eq!(closed.points.len(), 3);
    }

    #[test]
    fn beam_cross_section_converges_with_tolerance() {
        use crate::continuum::beam_surface;
        use crate::cost::{CostGraph, Dim, Embedding};
        let mut g = CostGraph::from_witness(Dim::Two, 3, vec![vec![0, 1, 2]]);
        g.edges.truncate(1);
        let e = Embedding::new(
            Dim::Two,
            vec![Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0), Vec3::new(1.0, 3.0, 0.0)],
        );
        let t = 0.2;
        let s = beam_surface(&g, &e, &[t]).unwrap();
        let mut prev: Option<(usize, f64)> = None;
        for tol in [1e-4, 1e-5, 1e-6] {
            let loops = slice_plane(&s, Vec3::new(0.7, 0.0, 0.0), Vec3::x(), tol).unwrap();
            assert_eq!(loops.len(), 1);
            assert!(loops[0].closed);
            let (n, len) = (loops[0].points.len(), loops[0].length());
            if let Some((pn, plen)) = prev {
                assert!(n >= pn);
                assert!((len - plen).abs() < 1e-4);
            }
            prev = Some((n, len));
        }
        // perimeter of the rounded square, four parabolic arcs with chord
        // t·√2 and sagitta t/(2√2): arc length by Simpson on a fine grid
        let arc = {
            let (a, b) = (Vec3::new(t, 0.0, 0.0), Vec3::new(0.0, t, 0.0));
            let c = Vec3::new(t, t, 0.0);
            let n = 2000;
            let speed = |u: f64| ((c - a) * (2.0 * (1.0 - u)) + (b - c) * (2.0 * u)).norm();
            let h = 1.0 / n as f64;
            (0..=n)
                .map(|k| {
                    let w = if k == 0 || k == n {
                        1.0
                    } else if k % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    w * speed(k as f64 * h)
                })
                .sum::<f64>()
                * h
                / 3.0
        };
        assert!((prev.unwrap().1 - 4.0 * arc).abs() < 1e-5);
    }
}
