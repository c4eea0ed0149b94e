//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when
//! any fails. Runs with a custom harness so the lines are always shown.

use std::collections::{BTreeSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use costkit_core::continuum::{
    beam_surface, beam_volume, boxspline_field, kagome_coefficients, level_set, square_tube, Lattice,
    LevelSet, SampleGrid,
};
use costkit_core::cost::{
    cost_to_triangulation, validate_cost, CostGraph, Dim, Edge, EdgeTag, Embedding, Triangulation,
};
use costkit_core::editing::{
    carve_channel, diagonal_flip_3d, diagonal_flip_joint, join, random_flips, refine, refine_3d, stiffen,
    AnchorChoice, ChannelDirection, JoinPair, RandomProcess, RefineRule, StiffenedStructure,
    StiffeningVariant, FLIP_TOL,
};
use costkit_core::generators::{kagome_2d, kagome_3d, Topology};
use costkit_core::nalgebra::DMatrix;
use costkit_core::rigidity::{
    bar_sizing, cost_pebble_game, effective_resistance, mass_measure, matrix_rank, numeric_rank,
    rigidity_matrix, stiffness_matrix, MassMode, RigidityClass, TrivialMotions, DEFAULT_RANK_TOL,
};
use costkit_core::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

// ---------------------------------------------------------------- fixtures

struct Sample {
    name: String,
    graph: CostGraph,
    embedding: Embedding,
}

fn sample(name: impl Into<String>, graph: CostGraph, embedding: Embedding) -> Sample {
    Sample {
        name: name.into(),
        graph,
        embedding,
    }
}

fn patch(rows: usize, cols: usize) -> (CostGraph, Embedding) {
    kagome_2d(rows, cols, 1.0, Topology::Open).expect("patch")
}

fn stiffened(g: &CostGraph, e: &Embedding) -> StiffenedStructure {
    stiffen(g, e, StiffeningVariant::Edges, AnchorChoice::Deterministic).expect("stiffen")
}

fn bare(g: &CostGraph) -> StiffenedStructure {
    StiffenedStructure {
        base: g.clone(),
        variant: StiffeningVariant::Edges,
        anchor_index: 0,
        added_edges: Vec::new(),
        pins: Vec::new(),
        sliders: Vec::new(),
    }
}

/// Boundary joints of the two bowtie triangles, in id order.
fn bowtie_sides(g: &CostGraph) -> (Vec<usize>, Vec<usize>) {
    let outer =
        |t: &Vec<usize>| -> Vec<usize> { t.iter().copied().filter(|v| g.boundary.contains(v)).collect() };
    (outer(&g.witness[0]), outer(&g.witness[1]))
}

fn mirrored(e: &Embedding, p: Vec3, q: Vec3) -> Embedding {
    let d = (q - p).normalize();
    let mut m = e.clone();
    for x in &mut m.positions {
        let r = *x - p;
        *x = p + d * (2.0 * r.dot(&d)) - r;
    }
    m
}

/// Two bowties merged at every boundary joint: a closed CoST.
fn full_bowtie_join() -> (CostGraph, Embedding) {
    let (g, e) = patch(1, 1);
    let (p, q) = bowtie_sides(&g);
    let pairs = [(p[0], p[0]), (p[1], q[0]), (q[0], p[1]), (q[1], q[1])].map(|(a, b)| JoinPair { a, b });
    join(&bare(&g), &e, &bare(&g), &e, &pairs).expect("full join")
}

/// Partial joins with planar placements: bowties touching at one joint, and
/// a bowtie glued to its mirror image at one joint of each triangle.
fn partial_joins() -> Vec<Sample> {
    let (g, e) = patch(1, 1);
    let (p, q) = bowtie_sides(&g);
    let mut out = Vec::new();

    // rightmost joint of one copy on the leftmost joint of the other
    let x = |v: &usize| e.positions[*v].x;
    let a = *g.boundary.iter().max_by(|s, t| x(s).total_cmp(&x(t))).unwrap();
    let b = *g.boundary.iter().min_by(|s, t| x(s).total_cmp(&x(t))).unwrap();
    let shift = e.positions[a] - e.positions[b];
    let mut moved = e.clone();
    for x in &mut moved.positions {
        *x += shift;
    }
    let (jg, je) = join(&bare(&g), &e, &bare(&g), &moved, &[JoinPair { a, b }]).expect("single join");
    out.push(sample("bowties touching at a joint", jg, je));

    let (u, d) = (p[0], q[0]);
    let m = mirrored(&e, e.positions[u], e.positions[d]);
    let pairs = [JoinPair { a: u, b: u }, JoinPair { a: d, b: d }];
    let (jg, je) = join(&bare(&g), &e, &bare(&g), &m, &pairs).expect("mirror join");
    out.push(sample("bowtie glued to its mirror image", jg, je));
    out
}

/// Open bivariate test structures (no stiffening bars).
fn open_corpus() -> Vec<Sample> {
    let mut out = Vec::new();
    for (r, c) in [
        (1, 1),
        (1, 2),
        (2, 1),
        (2, 2),
        (2, 3),
        (3, 3),
        (3, 4),
        (4, 4),
        (5, 5),
        (6, 6),
    ] {
        let (g, e) = patch(r, c);
        out.push(sample(format!("kagome {r}x{c}"), g, e));
    }
    for (size, count, seed, markov) in [
        (4, 5, 1, false),
        (5, 10, 2, false),
        (6, 20, 3, false),
        (5, 10, 4, true),
    ] {
        let (g, e) = patch(size, size);
        let process = if markov {
            RandomProcess::Markov { lambda: 0.5 }
        } else {
            RandomProcess::Poisson
        };
        let o = random_flips(&g, &e, process, count, seed).expect("random flips");
        out.push(sample(
            format!("kagome {size}x{size} + {count} flips"),
            o.graph,
            o.embedding,
        ));
    }
    let (g, e) = patch(2, 2);
    let (rg, re) = refine(&g, Some(&e), RefineRule::R0).expect("r0");
    out.push(sample("kagome 2x2 refined R0", rg, re.unwrap()));
    let (g, e) = patch(1, 2);
    let (rg, re) = refine(&g, Some(&e), RefineRule::R1).expect("r1");
    out.push(sample("kagome 1x2 refined R1", rg, re.unwrap()));
    out.extend(partial_joins());
    out
}

/// Everything used by the rank-based criteria: open structures, stiffened
/// ones and the closed join.
fn rigidity_corpus() -> Vec<Sample> {
    let mut out = open_corpus();
    for (r, c) in [(2, 2), (3, 3), (4, 4)] {
        let (g, e) = patch(r, c);
        let st = stiffened(&g, &e);
        out.push(sample(format!("kagome {r}x{c} stiffened"), st.graph(), e));
    }
    let (g, e) = full_bowtie_join();
    out.push(sample("two bowties fully joined", g, e));
    out
}

/// Uniform noise in `[−1e-3, 1e-3]` on the in-plane coordinates.
fn perturbed(e: &Embedding, rng: &mut ChaCha8Rng) -> Embedding {
    let mut p = e.clone();
    for x in &mut p.positions {
        x.x += rng.random_range(-1e-3..=1e-3);
        x.y += rng.random_range(-1e-3..=1e-3);
        if e.dim == Dim::Three {
            x.z += rng.random_range(-1e-3..=1e-3);
        }
    }
    p
}

fn pebble_class(g: &CostGraph) -> Result<RigidityClass, String> {
    let p = ok(cost_pebble_game(g), "pebble game")?;
    Ok(RigidityClass::from_counts(
        p.free_dof.max(0) as usize,
        p.redundant_edges.len(),
    ))
}

fn numeric_class(g: &CostGraph, e: &Embedding) -> Result<RigidityClass, String> {
    let r = ok(rigidity_matrix(g, e), "rigidity matrix")?;
    let t = TrivialMotions::new(g.dim, g.vertex_count, e, false);
    Ok(numeric_rank(&r, DEFAULT_RANK_TOL, &t).classification)
}

fn canonical(g: &CostGraph) -> (BTreeSet<(usize, usize)>, BTreeSet<Vec<usize>>) {
    let edges = g.edges.iter().map(Edge::key).collect();
    let witness = g
        .witness
        .iter()
        .map(|w| {
            let mut w = w.clone();
            w.sort_unstable();
            w
        })
        .collect();
    (edges, witness)
}

// --------------------------------------------------------------- criteria

fn c1_counts() -> Outcome {
    let (g, _) = patch(1, 1);
    let bowtie = (g.vertex_count, g.edges.len(), g.witness.len());
    ensure!(bowtie == (5, 6, 2), "bowtie counts {bowtie:?}");
    let (g, _) = kagome_2d(2, 2, 1.0, Topology::Toroidal).map_err(|e| e.to_string())?;
    let torus = (g.vertex_count, g.edges.len(), g.witness.len());
    ensure!(torus == (12, 24, 8), "toroidal 2x2 counts {torus:?}");
    Ok(format!("bowtie {bowtie:?}, toroidal 2x2 {torus:?}"))
}

fn c2_rigidity_agreement() -> Outcome {
    let corpus = rigidity_corpus();
    ensure!(corpus.len() >= 20, "only {} structures", corpus.len());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checks = 0;
    for s in &corpus {
        ensure!(
            s.graph.vertex_count <= 200,
            "{} has {} vertices",
            s.name,
            s.graph.vertex_count
        );
        let expected = pebble_class(&s.graph)?;
        for k in 0..5 {
            let e = perturbed(&s.embedding, &mut rng);
            let got = numeric_class(&s.graph, &e)?;
            ensure!(
                got == expected,
                "{} embedding {k}: pebble {} vs numeric {}",
                s.name,
                expected.name(),
                got.name()
            );
            checks += 1;
        }
    }
    Ok(format!(
        "{} structures, {checks} comparisons, 0 disagreements",
        corpus.len()
    ))
}

/// The degree-of-freedom law and minimal rigidity after edge stiffening.
fn dof_law(s: &Sample, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = &s.graph;
    let b = g.boundary.len();
    let p = ok(cost_pebble_game(g), "pebble game")?;
    ensure!(
        p.free_dof == b as i64 - 3,
        "{}: free dof {} with {b} boundary joints",
        s.name,
        p.free_dof
    );
    let st = ok(
        stiffen(
            g,
            &s.embedding,
            StiffeningVariant::Edges,
            AnchorChoice::Deterministic,
        ),
        &s.name,
    )?;
    let full = st.graph();
    ensure!(
        full.edges.len() == 2 * full.vertex_count - 3,
        "{}: {} bars for {} joints after stiffening",
        s.name,
        full.edges.len(),
        full.vertex_count
    );
    let p = ok(cost_pebble_game(&full), "pebble game")?;
    ensure!(p.minimally_rigid, "{}: stiffened graph not (2,3)-tight", s.name);
    let c = numeric_class(&full, &perturbed(&s.embedding, rng))?;
    ensure!(
        c == RigidityClass::MinimallyRigid,
        "{}: stiffened realization is {}",
        s.name,
        c.name()
    );
    Ok(())
}

fn c3_dof_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut n = 0;
    for s in open_corpus() {
        let g = &s.graph;
        if g.boundary.is_empty() || g.boundary.iter().any(|&v| g.degree(v) != 2) {
            continue;
        }
        dof_law(&s, &mut rng)?;
        n += 1;
    }
    ensure!(n >= 10, "only {n} open structures qualified");
    Ok(format!("{n} open structures"))
}

fn c4_refinement() -> Outcome {
    let (mut g, mut e) = patch(2, 3);
    let mut ratios = Vec::new();
    for step in 0..3 {
        let before = ok(mass_measure(&g, &e, MassMode::Edge), "mass")?;
        let lengths: Vec<f64> = g.edges.iter().map(|x| e.distance(x.u, x.v)).collect();
        let (rg, re) = ok(refine(&g, Some(&e), RefineRule::R0), "refine")?;
        let re = re.expect("embedding kept");
        let report = validate_cost(&rg);
        ensure!(report.is_valid(), "step {step}: {report}");
        ensure!(
            rg.witness.len() == 3 * g.witness.len(),
            "step {step}: witness count"
        );
        // every new bar is half of the bar of the old triangle it is parallel to
        let target = lengths[0] / 2.0;
        ensure!(
            lengths.iter().all(|l| (l - lengths[0]).abs() < 1e-12),
            "step {step}: unequal input lengths"
        );
        for x in &rg.edges {
            let l = re.distance(x.u, x.v);
            ensure!(
                (l - target).abs() <= 1e-12 * target,
                "step {step}: bar length {l} vs {target}"
            );
        }
        let after = ok(mass_measure(&rg, &re, MassMode::Edge), "mass")?;
        let ratio = after / before;
        ensure!((ratio - 1.5).abs() < 1e-12, "step {step}: mass ratio {ratio}");
        ratios.push(ratio);
        g = rg;
        e = re;
    }
    let (g, e) = kagome_3d(1, 2, 3, 1.0, Topology::Open).map_err(|e| e.to_string())?;
    let (rg, re) = ok(refine_3d(&g, &e, 0), "refine_3d")?;
    ensure!(
        rg.witness.len() == 4 * g.witness.len(),
        "tets {} -> {}",
        g.witness.len(),
        rg.witness.len()
    );
    let report = validate_cost(&rg);
    ensure!(report.is_valid(), "refine_3d: {report}");
    let old = e.distance(g.edges[0].u, g.edges[0].v);
    for x in &rg.edges {
        let l = re.distance(x.u, x.v);
        ensure!(
            (l - old / 2.0).abs() <= 1e-12 * old,
            "refine_3d bar length {l} vs {}",
            old / 2.0
        );
    }
    Ok(format!(
        "R0 mass ratios {ratios:?}; refine_3d {} -> {} tets",
        g.witness.len(),
        rg.witness.len()
    ))
}

/// Diagonal pairs of a convex `n`-gon that properly cross.
fn crosses(a: (usize, usize), b: (usize, usize)) -> bool {
    let inside = |x: usize, lo: usize, hi: usize| lo < x && x < hi;
    let (p, q) = a;
    let (r, s) = b;
    (inside(r, p, q) && !(s >= p && s <= q)) || (inside(s, p, q) && !(r >= p && r <= q))
}

/// Brute-force oracle: all sets of `n − 3` pairwise non-crossing diagonals.
fn brute_triangulations(n: usize) -> BTreeSet<Vec<(usize, usize)>> {
    let diagonals: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 2..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !(i == 0 && j == n - 1))
        .collect();
    let mut out = BTreeSet::new();
    let k = n - 3;
    let m = diagonals.len();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..m)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| diagonals[b])
            .collect();
        let ok = chosen
            .iter()
            .enumerate()
            .all(|(i, &a)| chosen[i + 1..].iter().all(|&b| !crosses(a, b)));
        if ok {
            out.insert(chosen);
        }
    }
    out
}

fn diagonal_key(t: &Triangulation, n: usize) -> Vec<(usize, usize)> {
    let mut d: Vec<(usize, usize)> = t
        .edges
        .iter()
        .map(|&[a, b]| (a.min(b), a.max(b)))
        .filter(|&(a, b)| b - a != 1 && !(a == 0 && b == n - 1))
        .collect();
    d.sort_unstable();
    d
}

/// Flip-graph component of the fan triangulation of a convex `n`-gon.
fn flip_graph(n: usize) -> Result<BTreeSet<Vec<(usize, usize)>>, String> {
    let points: Vec<Vec3> = (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            Vec3::new(a.cos(), a.sin(), 0.0)
        })
        .collect();
    let fan: Vec<Vec<usize>> = (1..n - 1).map(|k| vec![0, k, k + 1]).collect();
    let start = ok(Triangulation::from_faces(n, &fan), "fan")?.with_positions(points);
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        if !seen.insert(diagonal_key(&t, n)) {
            continue;
        }
        for edge in t.admissible_flips(FLIP_TOL) {
            let mut next = t.clone();
            ok(next.flip(edge), "flip")?;
            if !seen.contains(&diagonal_key(&next, n)) {
                queue.push_back(next);
            }
        }
    }
    Ok(seen)
}

fn c5_flips() -> Outcome {
    // involution at every flippable joint of a patch
    let (g, e) = patch(4, 4);
    let t = ok(cost_to_triangulation(&g, &e), "triangulation")?;
    let joints = t.admissible_flips(FLIP_TOL);
    ensure!(!joints.is_empty(), "no admissible flips");
    for &j in &joints {
        let once = ok(diagonal_flip_joint(&g, &e, j), "flip")?;
        ensure!(
            canonical(&once.graph) != canonical(&g),
            "flip at {j} changed nothing"
        );
        let twice = ok(diagonal_flip_joint(&once.graph, &once.embedding, j), "flip back")?;
        ensure!(
            canonical(&twice.graph) == canonical(&g),
            "flip at {j} is not an involution"
        );
        let drift = twice
            .embedding
            .positions
            .iter()
            .zip(&e.positions)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        ensure!(drift < 1e-12, "flip at {j} moved joints by {drift}");
    }

    // random flips under fixed stiffening
    let (base, mut emb) = patch(10, 10);
    let st = stiffened(&base, &emb);
    let bars: BTreeSet<(usize, usize)> = st.added_edges.iter().copied().collect();
    let mut full = st.graph();
    for k in 0..100u64 {
        let o = ok(
            random_flips(&full, &emb, RandomProcess::Poisson, 1, k),
            "random flip",
        )?;
        ensure!(o.log.flips.len() == 1, "flip {k}: no admissible flip");
        full = o.graph;
        emb = o.embedding;
        let kept: BTreeSet<(usize, usize)> = full
            .edges
            .iter()
            .filter(|x| x.tag == EdgeTag::Stiffening)
            .map(Edge::key)
            .collect();
        ensure!(kept == bars, "flip {k}: stiffening bars changed");
        let report = validate_cost(&full.witness_only());
        ensure!(report.is_valid(), "flip {k}: {report}");
        let p = ok(cost_pebble_game(&full), "pebble")?;
        ensure!(
            p.minimally_rigid,
            "flip {k}: stiffened structure lost minimal rigidity"
        );
    }

    // flip-graph connectivity against brute force
    let mut counts = Vec::new();
    for n in 4..=7 {
        let reached = flip_graph(n)?;
        let all = brute_triangulations(n);
        ensure!(
            reached == all,
            "{n}-gon: flips reach {} of {}",
            reached.len(),
            all.len()
        );
        counts.push(all.len());
    }
    ensure!(counts == [2, 5, 14, 42], "triangulation counts {counts:?}");
    Ok(format!(
        "{} involutions, 100 stiffened flips, flip graphs {counts:?}",
        joints.len()
    ))
}

fn nullity(m: &DMatrix<f64>) -> usize {
    m.ncols() - matrix_rank(m, DEFAULT_RANK_TOL)
}

/// Positions drawn uniformly from the unit square (or cube).
fn generic(e: &Embedding, rng: &mut ChaCha8Rng) -> Embedding {
    let mut p = e.clone();
    p.period = None;
    for x in &mut p.positions {
        x.x = rng.random_range(0.0..1.0);
        x.y = rng.random_range(0.0..1.0);
        if e.dim == Dim::Three {
            x.z = rng.random_range(0.0..1.0);
        }
    }
    p
}

fn nullities(g: &CostGraph, e: &Embedding) -> Result<(usize, usize), String> {
    let r = rigidity_matrix(g, e).map_err(|x| x.to_string())?;
    let k = stiffness_matrix(g, e, &vec![1.0; g.edges.len()]).map_err(|x| x.to_string())?;
    Ok((nullity(&r), nullity(&k)))
}

fn c6_nullspaces() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checks = 0;
    let mut samples = rigidity_corpus();
    let (g, e) = kagome_3d(1, 2, 2, 1.0, Topology::Open).map_err(|e| e.to_string())?;
    samples.push(sample("trivariate kagome 1x2x2", g, e));
    for s in &samples {
        for (kind, e) in [
            ("generated", s.embedding.clone()),
            ("generic", generic(&s.embedding, &mut rng)),
        ] {
            let (nr, nk) = match nullities(&s.graph, &e) {
                Ok(n) => n,
                // a closed join folds onto itself in the plane; only its
                // generic realization is a framework
                Err(_) if kind == "generated" && s.graph.boundary.is_empty() => continue,
                Err(x) => return Err(format!("{} ({kind}): {x}", s.name)),
            };
            ensure!(
                nr == nk,
                "{} ({kind} embedding): nullity(R) = {nr}, nullity(K) = {nk}",
                s.name
            );
            checks += 1;
        }
    }
    // Near-flexible perturbed realizations square their smallest singular
    // values below the threshold in K; reported, not gated.
    let mut perturbed_mismatch = 0;
    for s in &samples {
        let (nr, nk) = nullities(&s.graph, &perturbed(&s.embedding, &mut rng))?;
        if nr != nk {
            perturbed_mismatch += 1;
        }
    }
    Ok(format!(
        "{checks} matrix pairs agree; {perturbed_mismatch} of {} noise-perturbed realizations are too ill-conditioned for K",
        samples.len()
    ))
}

fn c7_resistance() -> Outcome {
    let tri = ok(
        effective_resistance(3, &[(0, 1), (1, 2), (0, 2)], &[1.0; 3], 0, 1),
        "triangle",
    )?;
    ensure!((tri - 2.0 / 3.0).abs() <= 1e-10, "triangle {tri}");
    let quad = ok(
        effective_resistance(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], &[1.0; 4], 0, 1),
        "4-cycle",
    )?;
    ensure!((quad - 0.75).abs() <= 1e-10, "4-cycle {quad}");
    Ok(format!("triangle {tri}, 4-cycle {quad}"))
}

fn c8_bar_sizing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut n = 0;
    for _ in 0..20 {
        let l: f64 = rng.random_range(0.01..10.0);
        for _ in 0..20 {
            let t: f64 = rng.random_range(-100.0..100.0);
            let mut s: f64 = rng.random_range(-50.0..50.0);
            if s == 0.0 {
                s = 1.0;
            }
            let a = ok(bar_sizing(t, l, s), "bar sizing")?;
            ensure!(a == l * t / s, "A({l}, {t}, {s}) = {a}");
            n += 1;
        }
    }
    ensure!(bar_sizing(1.0, 1.0, 0.0).is_err(), "zero target stress accepted");
    Ok(format!("{n} exact cases"))
}

/// Zero crossings of a periodic bivariate grid along the three lattice
/// directions, keyed by the grid edge they lie on.
fn crossings(s: &SampleGrid) -> Vec<((i64, i64), (i64, i64), f64)> {
    let [n0, n1, _] = s.shape;
    let v = |i: i64, j: i64| {
        s.get(
            i.rem_euclid(n0 as i64) as usize,
            j.rem_euclid(n1 as i64) as usize,
            0,
        )
    };
    let mut out = Vec::new();
    for j in 0..n1 as i64 {
        for i in 0..n0 as i64 {
            for d in [(1, 0), (0, 1), (-1, 1)] {
                let (a, b) = (v(i, j), v(i + d.0, j + d.1));
                if (a >= 0.0) != (b >= 0.0) {
                    out.push(((i, j), d, a / (a - b)));
                }
            }
        }
    }
    out
}

fn c9_box_splines() -> Outcome {
    let shape = [8, 8, 1];
    let n = 64;
    let lattice = Lattice::kagome_2d(1.0);
    let ones = ok(boxspline_field(lattice.clone(), shape, vec![1.0; n], 4), "field")?.eval();
    let pou = ones.values.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    ensure!(pou <= 1e-6, "partition of unity error {pou}");
    let shape3 = [4, 4, 4];
    let ones3 = ok(
        boxspline_field(Lattice::kagome_3d(1.0), shape3, vec![1.0; 64], 4),
        "field",
    )?
    .eval();
    let pou3 = ones3.values.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    ensure!(pou3 <= 1e-6, "trivariate partition of unity error {pou3}");

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let c1: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let c2: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (a, b) = (0.7, -2.3);
    let mix: Vec<f64> = c1.iter().zip(&c2).map(|(x, y)| a * x + b * y).collect();
    let f = |c: Vec<f64>| boxspline_field(lattice.clone(), shape, c, 4).map(|f| f.eval().values);
    let (s1, s2, sm) = (ok(f(c1), "f1")?, ok(f(c2), "f2")?, ok(f(mix), "mix")?);
    let lin = (0..sm.len())
        .map(|i| (sm[i] - (a * s1[i] + b * s2[i])).abs())
        .fold(0.0, f64::max);
    ensure!(lin <= 1e-12, "linearity error {lin}");

    let pattern = ok(kagome_coefficients(Dim::Two, shape), "pattern")?;
    let s = ok(boxspline_field(lattice, shape, pattern, 4), "kagome field")?.eval();
    let set = ok(level_set(&s, 0.0), "level set")?;
    let curves = match set {
        LevelSet::Curves(c) => c,
        LevelSet::Surface(_) => return Err("bivariate field gave a surface".into()),
    };
    ensure!(!curves.is_empty(), "empty zero level set");
    // sample the rotated grid: (i, j) -> (-i - j, i) is a lattice rotation by 120°
    let [n0, n1, _] = s.shape;
    let wrap = |i: i64, m: usize| i.rem_euclid(m as i64) as usize;
    let mut sym = 0.0f64;
    for j in 0..n1 as i64 {
        for i in 0..n0 as i64 {
            let r = s.get(wrap(-i - j, n0), wrap(i, n1), 0);
            sym = sym.max((r - s.get(i as usize, j as usize, 0)).abs());
        }
    }
    ensure!(sym <= 1e-6, "rotated samples differ by {sym}");
    // zero crossings map onto zero crossings
    let cross = crossings(&s);
    let find = |p: (i64, i64), d: (i64, i64)| {
        let norm = |p: (i64, i64)| (wrap(p.0, n0) as i64, wrap(p.1, n1) as i64);
        cross.iter().find_map(|&(q, e, t)| {
            if q == norm(p) && e == d {
                Some(t)
            } else if norm((q.0 + e.0, q.1 + e.1)) == norm(p) && (-e.0, -e.1) == d {
                Some(1.0 - t)
            } else {
                None
            }
        })
    };
    let spacing = s.axes[0].norm();
    let mut worst = 0.0f64;
    for &((i, j), d, t) in &cross {
        let p = (-i - j, i);
        let rd = (-d.0 - d.1, d.0);
        let image = find(p, rd).ok_or_else(|| format!("crossing at {:?} has no rotated image", (i, j)))?;
        worst = worst.max((image - t).abs() * spacing);
    }
    ensure!(worst <= 1e-6, "rotated zero crossings off by {worst}");
    Ok(format!(
        "unity error {:.1e}, linearity {:.1e}, {} curves, {} crossings symmetric to {:.1e}",
        pou.max(pou3),
        lin,
        curves.len(),
        cross.len(),
        worst
    ))
}

fn c10_volume() -> Outcome {
    let mut worst = 0.0f64;
    for (side, length) in [(1.0, 1.0), (0.3, 2.5), (2.0, 0.1), (0.05, 7.0)] {
        let v = ok(beam_volume(&square_tube(side, length)), "tube volume")?;
        let err = (v - side * side * length).abs();
        ensure!(err <= 1e-9, "tube {side}x{length}: {v}");
        worst = worst.max(err);
    }
    let mut g = CostGraph::empty(Dim::Three);
    g.vertex_count = 4;
    g.edges = vec![
        Edge::new(0, 1, EdgeTag::Witness),
        Edge::new(0, 2, EdgeTag::Witness),
        Edge::new(0, 3, EdgeTag::Witness),
    ];
    let e = Embedding::new(
        Dim::Three,
        vec![
            Vec3::new(0.1, -0.2, 0.05),
            Vec3::new(1.2, 0.1, -0.1),
            Vec3::new(-0.3, 0.9, 0.2),
            Vec3::new(0.2, 0.1, 1.1),
        ],
    );
    let p = ok(beam_surface(&g, &e, &[0.08, 0.12, 0.1]), "beams")?;
    let exact = ok(beam_volume(&p), "beam volume")?;
    let mesh = p.tessellate(96).signed_volume();
    let rel = (mesh - exact).abs() / exact;
    ensure!(rel <= 1e-4, "node assembly: divergence {exact} vs mesh {mesh}");
    Ok(format!(
        "tube error {worst:.1e}; node assembly relative difference {rel:.1e}"
    ))
}

fn c11_join() -> Outcome {
    let (g, _) = full_bowtie_join();
    let counts = (g.vertex_count, g.edges.len(), g.witness.len());
    ensure!(counts == (6, 12, 4), "full join counts {counts:?}");
    let report = validate_cost(&g);
    ensure!(report.is_valid(), "full join: {report}");
    ensure!(g.boundary.is_empty(), "full join has boundary {:?}", g.boundary);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let partial = partial_joins();
    for s in &partial {
        let report = validate_cost(&s.graph);
        ensure!(report.is_valid(), "{}: {report}", s.name);
        dof_law(s, &mut rng)?;
    }
    Ok(format!(
        "closed {counts:?}; {} partial joins re-stiffened",
        partial.len()
    ))
}

// ------------------------------------------------------------ determinism

fn costkit(args: &[String]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_costkit"))
        .args(args)
        .output()
        .map_err(|e| format!("spawn: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "costkit {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn args(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn with_input(path: &Path, list: &[&str]) -> Vec<String> {
    let mut a = vec!["--input".to_string(), path.display().to_string()];
    a.extend(args(list));
    a
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = |name: &str| dir.path().join(name);
    let save = |name: &str, bytes: &[u8]| std::fs::write(file(name), bytes).map_err(|e| e.to_string());

    save(
        "base.json",
        &costkit(&args(&["generate", "kagome2d", "--rows", "3", "--cols", "3"]))?,
    )?;
    save(
        "k3.json",
        &costkit(&args(&[
            "generate", "kagome3d", "--rows", "1", "--cols", "2", "--layers", "3",
        ]))?,
    )?;
    save(
        "bowtie.json",
        &costkit(&args(&["generate", "kagome2d", "--rows", "1", "--cols", "1"]))?,
    )?;
    save(
        "random.json",
        &costkit(&with_input(
            &file("base.json"),
            &["--seed", "3", "flip", "random", "--count", "5"],
        ))?,
    )?;
    let flipped = costkit_cli_load(&file("random.json"))?;
    save("flips.log", flipped.metadata.flip_logs[0].as_bytes())?;

    // valid parameters for the addressed flips, found with the library
    let (g, e) = patch(3, 3);
    let t = ok(cost_to_triangulation(&g, &e), "triangulation")?;
    let joint = *t.admissible_flips(FLIP_TOL).first().ok_or("no flippable joint")?;
    let [u, v] = t.edges[joint];
    let (start, dir) = (0..g.vertex_count)
        .flat_map(|s| (0..12u8).map(move |d| (s, d)))
        .find(|&(s, d)| carve_channel(&g, &e, s, ChannelDirection(d), 1.5).is_ok())
        .ok_or("no channel")?;
    let (g3, e3) = kagome_3d(1, 2, 3, 1.0, Topology::Open).map_err(|e| e.to_string())?;
    let (layer, joint3) = g3
        .layers
        .as_ref()
        .ok_or("no layers")?
        .iter()
        .enumerate()
        .flat_map(|(l, block)| block.iter().map(move |&j| (l, j)))
        .find(|&(l, j)| diagonal_flip_3d(&g3, &e3, l, j).is_ok())
        .ok_or("no trivariate flip")?;
    let bt = costkit_cli_load(&file("bowtie.json"))?;
    let (p, q) = bowtie_sides(&bt.graph);
    save(
        "pairs.txt",
        format!(
            "{} {}\n{} {}\n{} {}\n{} {}\n",
            p[0], p[0], p[1], q[0], q[0], p[1], q[1], q[1]
        )
        .as_bytes(),
    )?;

    // pins need a generic realization; lattice positions leave mechanisms
    let mut jiggled = costkit_cli_load(&file("base.json"))?;
    jiggled.embedding = perturbed(&jiggled.embedding, &mut ChaCha8Rng::seed_from_u64(12));
    save("jiggled.json", &costkit::save(&jiggled))?;
    let pin_seed = (0..64u64)
        .find(|&k| {
            stiffen(
                &jiggled.graph,
                &jiggled.embedding,
                StiffeningVariant::Pins,
                AnchorChoice::Seeded(k),
            )
            .is_ok()
        })
        .ok_or("no anchor grounds the pinned patch")?
        .to_string();
    let base = file("base.json");
    let k3 = file("k3.json");
    let (edge, joint, layer, joint3) = (
        format!("{u},{v}"),
        joint.to_string(),
        layer.to_string(),
        joint3.to_string(),
    );
    let (start, dir) = (start.to_string(), dir.to_string());
    let runs: Vec<Vec<String>> = vec![
        args(&["generate", "kagome2d", "--rows", "2", "--cols", "3"]),
        args(&[
            "generate",
            "kagome2d",
            "--rows",
            "2",
            "--cols",
            "2",
            "--topology",
            "toroidal",
        ]),
        args(&[
            "generate", "kagome3d", "--rows", "1", "--cols", "1", "--layers", "2",
        ]),
        with_input(&base, &["refine", "--rule", "r0", "--steps", "2"]),
        with_input(&base, &["refine", "--rule", "r1"]),
        with_input(&base, &["refine", "--rule", "r0", "--rebalance"]),
        with_input(&k3, &["refine3d"]),
        with_input(&base, &["stiffen", "--variant", "edges"]),
        with_input(
            &file("jiggled.json"),
            &["--seed", &pin_seed, "stiffen", "--variant", "pins"],
        ),
        with_input(&base, &["--seed", "7", "stiffen", "--variant", "sliders"]),
        with_input(&k3, &["stiffen3d"]),
        with_input(&base, &["flip", "--edge", &edge]),
        with_input(&base, &["flip", "--joint", &joint]),
        with_input(&k3, &["flip", "--layer", &layer, "--joint", &joint3]),
        with_input(&base, &["--seed", "11", "flip", "random", "--count", "6"]),
        with_input(
            &base,
            &[
                "--seed",
                "11",
                "flip",
                "random",
                "--process",
                "markov",
                "--count",
                "6",
                "--lambda",
                "0.4",
            ],
        ),
        with_input(
            &base,
            &[
                "flip", "channel", "--start", &start, "--dir", &dir, "--length", "1.5",
            ],
        ),
        with_input(
            &base,
            &[
                "flip",
                "replay",
                "--log",
                &file("flips.log").display().to_string(),
            ],
        ),
        with_input(&base, &["analyze", "rigidity"]),
        with_input(&base, &["analyze", "stress"]),
        with_input(&base, &["analyze", "flex"]),
        with_input(&base, &["analyze", "resistance", "--from", "0", "--to", "7"]),
        with_input(&base, &["analyze", "mass", "--mode", "edge"]),
        with_input(&k3, &["analyze", "mass", "--mode", "volume"]),
        with_input(&base, &["analyze", "validate"]),
        with_input(&base, &["analyze", "balance"]),
        with_input(&base, &["analyze", "triangulation"]),
        with_input(&k3, &["analyze", "rigidity"]),
        args(&[
            "join",
            &file("bowtie.json").display().to_string(),
            &file("bowtie.json").display().to_string(),
            "--pairs",
            &file("pairs.txt").display().to_string(),
        ]),
        with_input(&base, &["map", "--name", "identity"]),
        with_input(
            &base,
            &[
                "map",
                "--name",
                "affine",
                "--params",
                "2,0.5,0,0,1,0,0,0,1,-1,3,0",
            ],
        ),
        with_input(&k3, &["map", "--name", "sphere-octant", "--fit"]),
        with_input(&base, &["export", "wireframe"]),
        with_input(&base, &["export", "beams", "--thickness", "0.05"]),
        with_input(
            &base,
            &["export", "beams", "--thickness", "0.05", "--format", "bezier"],
        ),
        with_input(&base, &["export", "levelset", "--level", "3"]),
        with_input(&k3, &["export", "levelset", "--level", "2"]),
        with_input(
            &base,
            &[
                "export",
                "slice",
                "--plane",
                "0.61,0.3,0,1,0.2,0",
                "--thickness",
                "0.05",
            ],
        ),
        with_input(&base, &["export", "matrix", "--kind", "rigidity"]),
        with_input(&base, &["export", "matrix", "--kind", "stiffness"]),
    ];
    for run in &runs {
        let first = costkit(run)?;
        let second = costkit(run)?;
        ensure!(!first.is_empty(), "costkit {} printed nothing", run.join(" "));
        ensure!(first == second, "costkit {} is not deterministic", run.join(" "));
    }
    // writing to a file gives the same bytes as standard output
    let out = file("out.json");
    let mut to_file = with_input(&base, &["--seed", "11", "flip", "random", "--count", "6"]);
    to_file.extend(["--output".to_string(), out.display().to_string()]);
    costkit(&to_file)?;
    let written = std::fs::read(&out).map_err(|e| e.to_string())?;
    ensure!(
        written == costkit(&runs[14])?,
        "--output differs from standard output"
    );
    Ok(format!("{} commands, each run twice", runs.len()))
}

fn costkit_cli_load(path: &Path) -> Result<costkit::Structure, String> {
    let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
    costkit::load(&bytes).map_err(|e| e.to_string())
}

// ------------------------------------------------------------------ main

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("structure counts", c1_counts),
        ("pebble game agrees with numeric rank", c2_rigidity_agreement),
        ("degree-of-freedom law and stiffening", c3_dof_law),
        ("refinement validity, half lengths and mass", c4_refinement),
        ("flips: involution, stiffened walks, flip graph", c5_flips),
        ("stiffness and rigidity null spaces", c6_nullspaces),
        ("effective resistance oracles", c7_resistance),
        ("bar sizing", c8_bar_sizing),
        ("box splines and Kagome level set", c9_box_splines),
        ("beam volume", c10_volume),
        ("joining", c11_join),
        ("CLI determinism", c12_determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail}) [{secs:.1}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
