use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_dim, check_positive, EditError};
use crate::cost::{
    cost_to_triangulation, ensure_valid, strictly_convex, two_color, CostGraph, Dim, Edge, EdgeTag,
    Embedding, Triangulation,
};
use crate::math::{angle2, cross2, Vec3};

/// Tolerance on normalized turns for strict convexity of flip quadrilaterals.
pub const FLIP_TOL: f64 = 1e-9;

/// One flip, in the terms needed to replay it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipRecord {
    /// Bivariate flip of triangulation edge `removed` to `inserted`.
    ///
    /// Triangulation vertex ids refer to the triangulation derived once from
    /// the structure the log starts from. When `joint` (the edge slot, which
    /// is stable under flips) is known, replay uses it instead of the ids.
    Planar {
        removed: [usize; 2],
        inserted: [usize; 2],
        joint: Option<usize>,
        simplices: Option<[usize; 2]>,
    },
    /// Trivariate flip of `joint` inside foliation layer `layer`.
    Layer {
        layer: usize,
        joint: usize,
        simplices: Option<[usize; 2]>,
    },
}

impl FlipRecord {
    /// The record that undoes this one.
    pub fn inverse(self) -> Self {
        match self {
            FlipRecord::Planar {
                removed,
                inserted,
                joint,
                simplices,
            } => FlipRecord::Planar {
                removed: inserted,
                inserted: removed,
                joint,
                simplices,
            },
            layer => layer,
        }
    }
}

/// How the flips of a log were chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FlipProcess {
    Manual,
    Poisson,
    Markov { lambda: f64 },
    Channel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlipLog {
    pub flips: Vec<FlipRecord>,
    pub seed: Option<u64>,
    pub process: FlipProcess,
}

impl FlipLog {
    pub fn new(process: FlipProcess, seed: Option<u64>) -> Self {
        FlipLog {
            flips: Vec::new(),
            seed,
            process,
        }
    }

    /// The log that undoes this one when replayed on its output.
    pub fn reversed(&self) -> Self {
        FlipLog {
            flips: self.flips.iter().rev().map(|r| r.inverse()).collect(),
            seed: self.seed,
            process: FlipProcess::Manual,
        }
    }
}

impl fmt::Display for FlipLog {
    /// Line format: `flip u v -> w x` for bivariate flips and `flip-layer L J`
    /// for trivariate ones, each optionally followed by a `# joint J
    /// simplices F G` annotation; header lines start with `#`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.process {
            FlipProcess::Manual => writeln!(f, "# process manual")?,
            FlipProcess::Poisson => writeln!(f, "# process poisson")?,
            FlipProcess::Markov { lambda } => writeln!(f, "# process markov {lambda:?}")?,
            FlipProcess::Channel => writeln!(f, "# process channel")?,
        }
        if let Some(s) = self.seed {
            writeln!(f, "# seed {s}")?;
        }
        for r in &self.flips {
            let (joint, simplices) = match r {
                FlipRecord::Planar {
                    removed: [u, v],
                    inserted: [w, x],
                    joint,
                    simplices,
                } => {
                    write!(f, "flip {u} {v} -> {w} {x}")?;
                    (*joint, *simplices)
                }
                FlipRecord::Layer {
                    layer,
                    joint,
                    simplices,
                } => {
                    write!(f, "flip-layer {layer} {joint}")?;
                    (None, *simplices)
                }
            };
            if joint.is_some() || simplices.is_some() {
                write!(f, " #")?;
            }
            if let Some(j) = joint {
                write!(f, " joint {j}")?;
            }
            if let Some([a, b]) = simplices {
                write!(f, " simplices {a} {b}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Error from parsing the flip log text format.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("flip log line {line}: {message}")]
pub struct ParseLogError {
    pub line: usize,
    pub message: String,
}

impl FromStr for FlipLog {
    type Err = ParseLogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut log = FlipLog::new(FlipProcess::Manual, None);
        for (k, raw) in s.lines().enumerate() {
            let line = k + 1;
            let err = |message: String| ParseLogError { line, message };
            let num = |t: Option<&str>| -> Result<usize, ParseLogError> {
                t.and_then(|x| x.parse().ok())
                    .ok_or_else(|| err(format!("expected an integer in `{raw}`")))
            };
            let (body, comment) = match raw.split_once('#') {
                Some((b, c)) => (b.trim(), Some(c.trim())),
                None => (raw.trim(), None),
            };
            if body.is_empty() {
                let Some(c) = comment else { continue };
                let mut words = c.split_whitespace();
                match (words.next(), words.next(), words.next()) {
                    (Some("process"), Some("manual"), _) => log.process = FlipProcess::Manual,
                    (Some("process"), Some("poisson"), _) => log.process = FlipProcess::Poisson,
                    (Some("process"), Some("channel"), _) => log.process = FlipProcess::Channel,
                    (Some("process"), Some("markov"), Some(l)) => {
                        let lambda = l.parse().map_err(|_| err(format!("bad lambda `{l}`")))?;
                        log.process = FlipProcess::Markov { lambda };
                    }
                    (Some("seed"), Some(s), _) => {
                        log.seed = Some(s.parse().map_err(|_| err(format!("bad seed `{s}`")))?);
                    }
                    _ => {}
                }
                continue;
            }
            let (mut joint, mut simplices) = (None, None);
            let notes: Vec<&str> = comment
                .map(|c| c.split_whitespace().collect())
                .unwrap_or_default();
            let mut k = 0;
            while k < notes.len() {
                match notes[k] {
                    "joint" => {
                        joint = Some(num(notes.get(k + 1).copied())?);
                        k += 2;
                    }
                    "simplices" => {
                        simplices = Some([num(notes.get(k + 1).copied())?, num(notes.get(k + 2).copied())?]);
                        k += 3;
                    }
                    other => return Err(err(format!("unknown annotation `{other}`"))),
                }
            }
            let mut t = body.split_whitespace();
            match t.next() {
                Some("flip") => {
                    let (u, v) = (num(t.next())?, num(t.next())?);
                    if t.next() != Some("->") {
                        return Err(err(format!("expected `->` in `{raw}`")));
                    }
                    let (w, x) = (num(t.next())?, num(t.next())?);
                    log.flips.push(FlipRecord::Planar {
                        removed: [u, v],
                        inserted: [w, x],
                        joint,
                        simplices,
                    });
                }
                Some("flip-layer") => {
                    let (layer, joint) = (num(t.next())?, num(t.next())?);
                    log.flips.push(FlipRecord::Layer {
                        layer,
                        joint,
                        simplices,
                    });
                }
                _ => return Err(err(format!("unknown entry `{raw}`"))),
            }
            if t.next().is_some() {
                return Err(err(format!("trailing tokens in `{raw}`")));
            }
        }
        Ok(log)
    }
}

/// A flipped structure with the log that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct FlipOutcome {
    pub graph: CostGraph,
    pub embedding: Embedding,
    pub log: FlipLog,
}

/// A bivariate CoST kept in sync with its triangulation while flipping.
struct PlanarSession {
    t: Triangulation,
    witness: Vec<Vec<usize>>,
    extra: Vec<Edge>,
    base: CostGraph,
    e: Embedding,
}

impl PlanarSession {
    fn new(g: &CostGraph, e: &Embedding) -> Result<Self, EditError> {
        check_dim(g.dim, Dim::Two)?;
        if !e.covers(g) {
            return Err(EditError::MissingEmbedding);
        }
        let t = cost_to_triangulation(g, e)?;
        Ok(PlanarSession {
            t,
            witness: g.witness.clone(),
            extra: g
                .edges
                .iter()
                .filter(|x| x.tag != EdgeTag::Witness)
                .copied()
                .collect(),
            base: g.clone(),
            e: e.clone(),
        })
    }

    fn slot(&self, u: usize, v: usize, simplices: Option<[usize; 2]>) -> Result<usize, EditError> {
        let key = [u.min(v), u.max(v)];
        let slots: Vec<usize> = (0..self.t.edges.len())
            .filter(|&s| self.t.edges[s] == key)
            .collect();
        match slots.as_slice() {
            [] => Err(EditError::NoSuchEdge(u, v)),
            [s] => Ok(*s),
            _ => {
                let faces = self.t.edge_faces();
                let wanted = simplices.map(|mut s| {
                    s.sort_unstable();
                    s
                });
                slots
                    .iter()
                    .copied()
                    .find(|&s| {
                        let mut f = faces[s].clone();
                        f.sort_unstable();
                        wanted.is_some_and(|w| f == w)
                    })
                    .ok_or(EditError::AmbiguousEdge(u, v))
            }
        }
    }

    /// Whether flipping `slot` creates a bar that repeats a non-witness bar.
    /// The joint keeps its four neighbors; the two new bars join the joints
    /// on the quadrilateral sides meeting at each old diagonal endpoint.
    fn doubles_extra(&self, slot: usize) -> bool {
        if self.extra.is_empty() {
            return false;
        }
        let Ok([u, w, v, x]) = self.t.quad(slot) else {
            return false;
        };
        [u, v].iter().any(
            |&end| match (self.t.find_edge(w, end), self.t.find_edge(x, end)) {
                (Some(a), Some(b)) => self.extra.iter().any(|e| e.key() == (a.min(b), a.max(b))),
                _ => false,
            },
        )
    }

    fn flippable(&self, slot: usize, tol: f64) -> bool {
        self.t.is_flip_admissible(slot, tol) && !self.doubles_extra(slot)
    }

    fn flip(&mut self, slot: usize, tol: f64) -> Result<FlipRecord, EditError> {
        if slot >= self.t.edges.len() {
            return Err(EditError::VertexOutOfRange(slot));
        }
        let [_, w, _, x] = self.t.quad(slot).map_err(|_| EditError::BoundaryJoint(slot))?;
        if w == x || self.t.find_edge(w, x).is_some() {
            return Err(EditError::ParallelEdge(slot));
        }
        if !self.t.is_flip_admissible(slot, tol) {
            return Err(EditError::NotConvex(slot));
        }
        if self.doubles_extra(slot) {
            return Err(EditError::DoublesBar(slot));
        }
        let tf = self.t.flip(slot)?;
        for f in tf.faces {
            let mut s = self.t.faces[f].edges.to_vec();
            s.sort_unstable();
            self.witness[f] = s;
        }
        let pw = self.t.position_near(w, None).expect("positions");
        let px = self.t.position_near(x, Some(&pw)).expect("positions");
        self.e.positions[slot] = (pw + px) * 0.5;
        Ok(FlipRecord::Planar {
            removed: tf.removed,
            inserted: tf.inserted,
            joint: Some(slot),
            simplices: Some(tf.faces),
        })
    }

    fn finish(self, log: FlipLog) -> Result<FlipOutcome, EditError> {
        let graph = rebuild(&self.base, self.witness, &self.extra)?;
        Ok(FlipOutcome {
            graph,
            embedding: self.e,
            log,
        })
    }
}

/// New graph with `witness`, the non-witness edges `extra` and the layers of
/// `base`. A flip changes the parity of four triangulation degrees, so the
/// coloring is recomputed from scratch and kept whenever one exists.
fn rebuild(base: &CostGraph, witness: Vec<Vec<usize>>, extra: &[Edge]) -> Result<CostGraph, EditError> {
    let mut g = CostGraph::from_witness(base.dim, base.vertex_count, witness);
    g.edges.extend_from_slice(extra);
    g.canonicalize();
    g.layers = base.layers.clone();
    ensure_valid(&g)?;
    g.coloring = two_color(&g).ok();
    Ok(g)
}

/// Flips triangulation edge `(u, v)` of the triangulation associated with `g`
/// (vertex ids as numbered by [`cost_to_triangulation`]).
///
/// The flip is carried out on the triangulation and mapped back: every joint
/// keeps its id, the flipped joint moves to the midpoint of the new diagonal
/// and the two affected witness triangles keep their indices. The
/// quadrilateral must be strictly convex so that the result stays embedded.
pub fn diagonal_flip(g: &CostGraph, e: &Embedding, u: usize, v: usize) -> Result<FlipOutcome, EditError> {
    let mut s = PlanarSession::new(g, e)?;
    let slot = s.slot(u, v, None)?;
    let mut log = FlipLog::new(FlipProcess::Manual, None);
    log.flips.push(s.flip(slot, FLIP_TOL)?);
    s.finish(log)
}

/// [`diagonal_flip`] addressed by the joint (triangulation edge slot).
pub fn diagonal_flip_joint(g: &CostGraph, e: &Embedding, joint: usize) -> Result<FlipOutcome, EditError> {
    let mut s = PlanarSession::new(g, e)?;
    let mut log = FlipLog::new(FlipProcess::Manual, None);
    log.flips.push(s.flip(joint, FLIP_TOL)?);
    s.finish(log)
}

/// Whether the joint's triangulation edge can be flipped keeping the
/// triangulation embedded: it is interior, the new diagonal is not already
/// an edge, and its quadrilateral is strictly convex. With stiffening bars
/// present, the flip must also not repeat one of them.
pub fn geometric_flip_admissible(
    g: &CostGraph,
    e: &Embedding,
    joint: usize,
    tol: f64,
) -> Result<bool, EditError> {
    let s = PlanarSession::new(g, e)?;
    Ok(joint < s.t.edges.len() && s.flippable(joint, tol))
}

/// Replays `log` on `(g, e)`.
pub fn replay_flips(g: &CostGraph, e: &Embedding, log: &FlipLog) -> Result<FlipOutcome, EditError> {
    if g.dim == Dim::Three {
        let (mut g, mut e) = (g.clone(), e.clone());
        for (index, r) in log.flips.iter().enumerate() {
            let FlipRecord::Layer { layer, joint, .. } = *r else {
                return Err(EditError::LogMismatch { index });
            };
            let out = diagonal_flip_3d(&g, &e, layer, joint)?;
            g = out.graph;
            e = out.embedding;
        }
        return Ok(FlipOutcome {
            graph: g,
            embedding: e,
            log: log.clone(),
        });
    }
    let mut s = PlanarSession::new(g, e)?;
    for (index, r) in log.flips.iter().enumerate() {
        let FlipRecord::Planar {
            removed: [u, v],
            inserted,
            joint,
            simplices,
        } = *r
        else {
            return Err(EditError::LogMismatch { index });
        };
        let slot = match joint {
            Some(j) => j,
            None => s.slot(u, v, simplices)?,
        };
        if let Some(mut want) = simplices {
            let mut have = s.t.edge_faces().get(slot).cloned().unwrap_or_default();
            want.sort_unstable();
            have.sort_unstable();
            if have != want {
                return Err(EditError::LogMismatch { index });
            }
        }
        let done = s.flip(slot, FLIP_TOL)?;
        let FlipRecord::Planar { inserted: got, .. } = done else {
            unreachable!("planar sessions record planar flips")
        };
        if joint.is_none() && [inserted[0].min(inserted[1]), inserted[0].max(inserted[1])] != got {
            return Err(EditError::LogMismatch { index });
        }
    }
    s.finish(log.clone())
}

/// Random flip site selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RandomProcess {
    /// Each flip uniform over the currently admissible edges.
    Poisson,
    /// Admissible edge chosen with weight `exp(−d/λ)`, `d` the distance from
    /// its joint to the previously flipped joint.
    Markov { lambda: f64 },
}

/// `count` random admissible flips, reproducible from `seed`. Stops early if
/// no edge is admissible.
pub fn random_flips(
    g: &CostGraph,
    e: &Embedding,
    process: RandomProcess,
    count: usize,
    seed: u64,
) -> Result<FlipOutcome, EditError> {
    if let RandomProcess::Markov { lambda } = process {
        check_positive("locality lambda", lambda)?;
    }
    let mut s = PlanarSession::new(g, e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = FlipLog::new(
        match process {
            RandomProcess::Poisson => FlipProcess::Poisson,
            RandomProcess::Markov { lambda } => FlipProcess::Markov { lambda },
        },
        Some(seed),
    );
    let mut last: Option<Vec3> = None;
    for _ in 0..count {
        let mut sites = s.t.admissible_flips(FLIP_TOL);
        sites.retain(|&j| !s.doubles_extra(j));
        if sites.is_empty() {
            break;
        }
        let pick = match (process, last) {
            (RandomProcess::Markov { lambda }, Some(p)) => {
                let d: Vec<f64> = sites
                    .iter()
                    .map(|&j| (s.e.wrap_near(s.e.positions[j], &p) - p).norm())
                    .collect();
                let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
                let w: Vec<f64> = d.iter().map(|x| (-(x - dmin) / lambda).exp()).collect();
                let mut r = rng.random::<f64>() * w.iter().sum::<f64>();
                let mut k = 0;
                while k + 1 < w.len() && r >= w[k] {
                    r -= w[k];
                    k += 1;
                }
                sites[k]
            }
            _ => sites[rng.random_range(0..sites.len())],
        };
        log.flips.push(s.flip(pick, FLIP_TOL)?);
        last = Some(s.e.positions[pick]);
    }
    s.finish(log)
}

/// One of twelve lattice directions at multiples of 30°: even indices point
/// along triangular-grid edges (one step = one grid edge), odd ones between
/// them (one step = √3 grid edges, reaching the next lattice point).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChannelDirection(pub u8);

impl ChannelDirection {
    fn vector(self, step: f64) -> Result<Vec3, EditError> {
        if self.0 >= 12 {
            return Err(EditError::BadDirection(self.0));
        }
        let a = f64::from(self.0) * core::f64::consts::PI / 6.0;
        let len = if self.0 % 2 == 0 { step } else { step * 3f64.sqrt() };
        Ok(Vec3::new(a.cos(), a.sin(), 0.0) * len)
    }
}

const CROSS_TOL: f64 = 1e-9;

/// Parameter along `p→q` where it properly crosses segment `a→b`.
fn proper_crossing(p: Vec3, q: Vec3, a: Vec3, b: Vec3) -> Option<f64> {
    let d = q - p;
    let f = b - a;
    let scale = d.norm() * f.norm();
    let sa = cross2(&d, &(a - p)) / scale;
    let sb = cross2(&d, &(b - p)) / scale;
    let sp = cross2(&f, &(p - a)) / scale;
    let sq = cross2(&f, &(q - a)) / scale;
    let strict = |x: f64, y: f64| (x > CROSS_TOL && y < -CROSS_TOL) || (x < -CROSS_TOL && y > CROSS_TOL);
    (strict(sa, sb) && strict(sp, sq)).then(|| sp / (sp - sq))
}

fn slot_crossing(t: &Triangulation, slot: usize, p: Vec3, q: Vec3) -> Option<f64> {
    let [u, v] = t.edges[slot];
    let a = t.position_near(u, None)?;
    let b = t.position_near(v, Some(&a))?;
    match t.period {
        None => proper_crossing(p, q, a, b),
        Some([x, y]) => {
            let mut best: Option<f64> = None;
            for i in -2i32..=2 {
                for j in -2i32..=2 {
                    let shift = x * f64::from(i) + y * f64::from(j);
                    if let Some(s) = proper_crossing(p, q, a + shift, b + shift) {
                        best = Some(best.map_or(s, |b: f64| b.min(s)));
                    }
                }
            }
            best
        }
    }
}

fn inside_some_face(t: &Triangulation, p: Vec3) -> bool {
    t.faces.iter().any(|f| {
        let a = t.position_near(f.vertices[0], None).expect("positions");
        let b = t.position_near(f.vertices[1], Some(&a)).expect("positions");
        let c = t.position_near(f.vertices[2], Some(&a)).expect("positions");
        let area = cross2(&(b - a), &(c - a)).abs();
        let sum = cross2(&(b - a), &(p - a)).abs()
            + cross2(&(c - b), &(p - b)).abs()
            + cross2(&(a - c), &(p - c)).abs();
        sum <= area * (1.0 + 1e-9)
    })
}

/// Carves a straight channel: starting at triangulation vertex `start`, the
/// segment of `length` lattice steps along `direction` becomes a path of
/// triangulation edges by flipping, in order along the segment, every edge
/// it properly crosses. The log length is the flip count.
///
/// The lattice step is the mean length of the triangulation edges at
/// `start`.
pub fn carve_channel(
    g: &CostGraph,
    e: &Embedding,
    start: usize,
    direction: ChannelDirection,
    length: f64,
) -> Result<FlipOutcome, EditError> {
    check_positive("channel length", length)?;
    let mut s = PlanarSession::new(g, e)?;
    if start >= s.t.vertex_count {
        return Err(EditError::VertexOutOfRange(start));
    }
    let p = s.t.position_near(start, None).expect("positions");
    let incident: Vec<f64> =
        s.t.edges
            .iter()
            .filter(|ed| ed.contains(&start))
            .map(|&[a, b]| {
                let o = if a == start { b } else { a };
                (s.t.position_near(o, Some(&p)).expect("positions") - p).norm()
            })
            .collect();
    let step = incident.iter().sum::<f64>() / incident.len() as f64;
    let q = p + direction.vector(step)? * length;

    if s.t.period.is_none() {
        let faces = s.t.edge_faces();
        let exits =
            (0..s.t.edges.len()).any(|k| faces[k].len() == 1 && slot_crossing(&s.t, k, p, q).is_some());
        if exits || !inside_some_face(&s.t, q) {
            return Err(EditError::SegmentExits);
        }
    }

    let crossings = |t: &Triangulation| -> Vec<usize> {
        let mut c: Vec<(f64, usize)> = t
            .interior_edges()
            .into_iter()
            .filter_map(|k| slot_crossing(t, k, p, q).map(|x| (x, k)))
            .collect();
        c.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        c.into_iter().map(|(_, k)| k).collect()
    };
    let mut log = FlipLog::new(FlipProcess::Channel, None);
    let mut pending = crossings(&s.t);
    while !pending.is_empty() {
        let before = log.flips.len();
        for slot in pending {
            if slot_crossing(&s.t, slot, p, q).is_some() && s.flippable(slot, FLIP_TOL) {
                log.flips.push(s.flip(slot, FLIP_TOL)?);
            }
        }
        pending = crossings(&s.t);
        if log.flips.len() == before {
            return Err(EditError::ChannelBlocked(pending.len()));
        }
    }
    s.finish(log)
}

/// Orthonormal in-plane axes for the plane with unit normal `n`, chosen so
/// that `n = z` gives the usual x and y axes.
fn plane_basis(n: Vec3) -> (Vec3, Vec3) {
    let seed = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = (seed - n * n.dot(&seed)).normalize();
    (t1, n.cross(&t1))
}

/// Pairs the neighbors of joint `i` across its two simplices: returns
/// `[(x1, y1), (x2, y2)]` with `x` from `s1`, `y` from `s2`, each pair
/// rotation-adjacent around `i` in the plane with unit normal `n` (and so
/// meeting at a common triangulation vertex).
fn cross_pairs(
    i: usize,
    s1: [usize; 2],
    s2: [usize; 2],
    e: &Embedding,
    n: Vec3,
) -> Option<[(usize, usize); 2]> {
    let (t1, t2) = plane_basis(n);
    let mut around: Vec<(f64, usize, bool)> = s1
        .iter()
        .map(|&x| (x, true))
        .chain(s2.iter().map(|&y| (y, false)))
        .map(|(x, first)| {
            let d = e.edge_vector(i, x);
            (angle2(&Vec3::new(d.dot(&t1), d.dot(&t2), 0.0)), x, first)
        })
        .collect();
    around.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut pairs = Vec::new();
    for k in 0..4 {
        let (a, b) = (around[k], around[(k + 1) % 4]);
        if a.2 != b.2 {
            pairs.push(if a.2 { (a.1, b.1) } else { (b.1, a.1) });
        }
    }
    // the pattern must be two from one simplex then two from the other
    match pairs.as_slice() {
        [p, q] if p.0 != q.0 && p.1 != q.1 => Some([*p, *q]),
        _ => None,
    }
}

struct LocalFlip {
    /// New simplices for the two old slots, same order as `slots`.
    replaced: [Vec<usize>; 2],
    slots: [usize; 2],
    new_position: Vec3,
}

/// The combinatorial core of a flip around joint `i` whose simplices (minus
/// `i` and any apex) are `{i} ∪ s1` at slot `slots[0]` and `{i} ∪ s2` at
/// `slots[1]`. Joint positions give the rotation and the quadrilateral.
fn local_flip(
    i: usize,
    slots: [usize; 2],
    s1: [usize; 2],
    s2: [usize; 2],
    e: &Embedding,
    n: Vec3,
) -> Result<LocalFlip, EditError> {
    let [(x1, y1), (x2, y2)] = cross_pairs(i, s1, s2, e, n).ok_or(EditError::NotConvex(i))?;
    let pi = e.positions[i];
    let at = |j: usize| e.wrap_near(e.positions[j], &pi);
    // endpoints u, v of the flipped edge and opposite vertices w, x
    let w = at(s1[0]) + at(s1[1]) - pi;
    let x = at(s2[0]) + at(s2[1]) - pi;
    let u = pi + at(s1[0]) - at(s1[1]);
    let v = pi + at(s1[1]) - at(s1[0]);
    let (t1, t2) = plane_basis(n);
    let flat = |p: Vec3| Vec3::new((p - pi).dot(&t1), (p - pi).dot(&t2), 0.0);
    if !strictly_convex(&[flat(u), flat(w), flat(v), flat(x)], FLIP_TOL) {
        return Err(EditError::NotConvex(i));
    }
    let m = s1[0].min(s1[1]).min(s2[0]).min(s2[1]);
    let mut a = vec![i, x1, y1];
    let mut b = vec![i, x2, y2];
    a.sort_unstable();
    b.sort_unstable();
    let m_in_a = a.contains(&m);
    let m_in_first = s1.contains(&m);
    let replaced = if m_in_a == m_in_first { [a, b] } else { [b, a] };
    Ok(LocalFlip {
        replaced,
        slots,
        new_position: (w + x) * 0.5,
    })
}

fn others(s: &[usize], skip: &[usize]) -> Option<[usize; 2]> {
    let rest: Vec<usize> = s.iter().copied().filter(|v| !skip.contains(v)).collect();
    <[usize; 2]>::try_from(rest).ok()
}

/// Bivariate flip of `joint` computed directly on the CoST, without building
/// the triangulation. Produces the same structure as [`diagonal_flip_joint`].
pub fn diagonal_flip_local(
    g: &CostGraph,
    e: &Embedding,
    joint: usize,
) -> Result<(CostGraph, Embedding), EditError> {
    check_dim(g.dim, Dim::Two)?;
    if !e.covers(g) {
        return Err(EditError::MissingEmbedding);
    }
    if joint >= g.vertex_count {
        return Err(EditError::VertexOutOfRange(joint));
    }
    let members = g.memberships();
    let [f1, f2] = members[joint][..] else {
        return Err(EditError::BoundaryJoint(joint));
    };
    let s1 = others(&g.witness[f1], &[joint]).ok_or(EditError::BoundaryJoint(joint))?;
    let s2 = others(&g.witness[f2], &[joint]).ok_or(EditError::BoundaryJoint(joint))?;
    let lf = local_flip(joint, [f1, f2], s1, s2, e, Vec3::z())?;
    let mut witness = g.witness.clone();
    let mut added = BTreeSet::new();
    for (slot, s) in lf.slots.iter().zip(&lf.replaced) {
        witness[*slot] = s.clone();
        for (a, b) in [(s[0], s[1]), (s[0], s[2]), (s[1], s[2])] {
            added.insert((a, b));
        }
    }
    for (a, b) in added {
        let old = [&g.witness[f1], &g.witness[f2]];
        if g.has_edge(a, b) && !old.iter().any(|s| s.contains(&a) && s.contains(&b)) {
            return Err(EditError::ParallelEdge(joint));
        }
    }
    let extra: Vec<Edge> = g
        .edges
        .iter()
        .filter(|x| x.tag != EdgeTag::Witness)
        .copied()
        .collect();
    let graph = rebuild(g, witness, &extra)?;
    let mut embedding = e.clone();
    embedding.positions[joint] = lf.new_position;
    Ok((graph, embedding))
}

/// Trivariate flip: flips `joint` inside foliation layer `layer` and carries
/// the apexes along.
///
/// The layer triangles of the joint's two tetrahedra are flipped as in the
/// bivariate case (the local layer plane is fitted from the two triangles);
/// each apex stays with its tetrahedron slot and is re-placed at the midpoint
/// of the centroids of its two triangles. The two apexes must lie on opposite
/// sides of the layer ([`EditError::BreaksColoring`] otherwise) and the result
/// must be a valid CoST. The global coloring is recomputed and dropped when
/// none exists, which is the case after any single flip of a 2-colored
/// structure: the new tetrahedron through `x` and `y` meets the other
/// tetrahedra of both, and those have opposite colors.
pub fn diagonal_flip_3d(
    g: &CostGraph,
    e: &Embedding,
    layer: usize,
    joint: usize,
) -> Result<FlipOutcome, EditError> {
    check_dim(g.dim, Dim::Three)?;
    if !e.covers(g) {
        return Err(EditError::MissingEmbedding);
    }
    let layers = g.layers.as_ref().ok_or(EditError::NoLayers)?;
    let block = layers.get(layer).ok_or(EditError::NotInLayer { joint, layer })?;
    if !block.contains(&joint) {
        return Err(EditError::NotInLayer { joint, layer });
    }
    let members = g.memberships();
    let [f1, f2] = members[joint][..] else {
        return Err(EditError::BoundaryJoint(joint));
    };
    let split = |f: usize| -> Option<([usize; 2], usize)> {
        let s = &g.witness[f];
        let apex: Vec<usize> = s.iter().copied().filter(|v| !block.contains(v)).collect();
        let [apex] = apex[..] else { return None };
        Some((others(s, &[joint, apex])?, apex))
    };
    let (s1, a1) = split(f1).ok_or(EditError::BoundaryJoint(joint))?;
    let (s2, a2) = split(f2).ok_or(EditError::BoundaryJoint(joint))?;
    let normal = |s: [usize; 2]| {
        e.edge_vector(joint, s[0])
            .cross(&e.edge_vector(joint, s[1]))
            .normalize()
    };
    let (n1, mut n2) = (normal(s1), normal(s2));
    if n1.dot(&n2) < 0.0 {
        n2 = -n2;
    }
    let n = (n1 + n2).normalize();
    let lf = local_flip(joint, [f1, f2], s1, s2, e, n)?;
    // Each new tetrahedron keeps the apex of its slot. The two must stay on
    // opposite sides of the layer so that they can be told apart by color.
    if e.edge_vector(joint, a1).dot(&n) * e.edge_vector(joint, a2).dot(&n) >= 0.0 {
        return Err(EditError::BreaksColoring);
    }
    let mut witness = g.witness.clone();
    for (k, apex) in [a1, a2].into_iter().enumerate() {
        let mut s = lf.replaced[k].clone();
        s.push(apex);
        s.sort_unstable();
        witness[lf.slots[k]] = s;
    }
    let extra: Vec<Edge> = g
        .edges
        .iter()
        .filter(|x| x.tag != EdgeTag::Witness)
        .copied()
        .collect();
    let graph = rebuild(g, witness, &extra)?;
    let mut embedding = e.clone();
    embedding.positions[joint] = lf.new_position;
    let new_members = graph.memberships();
    for apex in [a1, a2] {
        let p = embedding.positions[apex];
        let centroids: Vec<Vec3> = new_members[apex]
            .iter()
            .map(|&f| {
                let tri: Vec<Vec3> = graph.witness[f]
                    .iter()
                    .filter(|&&v| v != apex)
                    .map(|&v| embedding.wrap_near(embedding.positions[v], &p))
                    .collect();
                (tri[0] + tri[1] + tri[2]) / 3.0
            })
            .collect();
        embedding.positions[apex] =
            centroids.iter().fold(Vec3::zeros(), |s, c| s + c) / centroids.len() as f64;
    }
    let mut log = FlipLog::new(FlipProcess::Manual, None);
    log.flips.push(FlipRecord::Layer {
        layer,
        joint,
        simplices: Some([f1, f2]),
    });
    Ok(FlipOutcome {
        graph,
        embedding,
        log,
    })
}
