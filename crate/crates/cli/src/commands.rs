//! The `costkit` command line.
//!
//! Every command reads a document (from `--input` or standard input), does
//! one thing, and writes either a new document or a report (to `--output` or
//! standard output). Structure-changing commands append a line to the
//! document's provenance. Runs are sequential and seeded, so equal inputs
//! and flags give byte-identical outputs.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use costkit_core::continuum::{
    beam_surface, beam_volume, boxspline_field, level_set, node_coefficients, slice_plane, Lattice, LevelSet,
    PatchSet, SLICE_TOL,
};
use costkit_core::cost::{balance_check, cost_to_triangulation, validate_cost, CostGraph, Dim, Embedding};
use costkit_core::editing::{
    carve_channel, diagonal_flip, diagonal_flip_3d, diagonal_flip_joint, join, random_flips, rebalance,
    refine, refine_3d, replay_flips, stiffen, stiffen_3d, AnchorChoice, ChannelDirection, FlipLog,
    FlipOutcome, JoinPair, RandomProcess, RefineRule, StiffenedStructure, StiffeningVariant, FLIP_TOL,
};
use costkit_core::generators::{apply_map, kagome_2d, kagome_3d, DomainMap, Topology};
use costkit_core::nalgebra::{DVector, Matrix3};
use costkit_core::rigidity::{
    bar_rows, constraint_matrix, cost_pebble_game, effective_resistance, mass_measure, numeric_rank,
    stiffness_matrix, MassMode, RigidityReport, TrivialMotions, DEFAULT_RANK_TOL,
};
use costkit_core::Vec3;

use crate::document::{load, save, Structure};
use crate::export::{beam_mesh, matrix_triplets, mesh_obj, polylines_text, wireframe_obj};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "costkit",
    version,
    about = "Design and analyze corner-sharing triangle and tetrahedron structures"
)]
pub struct Cli {
    /// Document to read (standard input when absent).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// File to write (standard output when absent).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for randomized steps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Numerical tolerance; each command documents its default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a Kagome seed structure.
    Generate(GenerateArgs),
    /// Refine a bivariate structure.
    Refine {
        #[arg(long, value_enum)]
        rule: RuleArg,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Move the new interior joints to their balanced positions.
        #[arg(long)]
        rebalance: bool,
    },
    /// Refine a trivariate structure layer by layer.
    Refine3d {
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        rebalance_iters: usize,
    },
    /// Stiffen the boundary of a bivariate structure.
    Stiffen {
        #[arg(long, value_enum)]
        variant: VariantArg,
    },
    /// Stiffen the boundary of a trivariate structure.
    Stiffen3d,
    /// Apply diagonal flips.
    Flip(FlipArgs),
    /// Print a report about a structure.
    Analyze {
        #[command(subcommand)]
        what: Analysis,
    },
    /// Join two stiffened bivariate structures along boundary joints.
    Join {
        /// First structure document.
        a: PathBuf,
        /// Second structure document, merged into the first.
        b: PathBuf,
        /// File with one `a b` joint pair per line.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Map the realization into a physical domain.
    Map {
        #[arg(long, value_enum)]
        name: MapName,
        /// Affine map: nine matrix entries (row-major) then three offsets.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Vec<f64>,
        /// Sphere octant: scale the structure to fit the octant first.
        #[arg(long)]
        fit: bool,
    },
    /// Write geometry for other tools.
    Export {
        #[command(subcommand)]
        what: ExportKind,
    },
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: SeedKind,
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 1.0)]
    pub edge_length: f64,
    #[arg(long, value_enum, default_value_t = TopologyArg::Open)]
    pub topology: TopologyArg,
}

#[derive(Debug, Args)]
pub struct FlipArgs {
    /// Flip the witness edge joining two joints.
    #[arg(long, value_parser = parse_pair)]
    pub edge: Option<(usize, usize)>,
    /// Flip at an interior joint (planar) or at a joint of `--layer`.
    #[arg(long)]
    pub joint: Option<usize>,
    /// Layer of a trivariate structure, used with `--joint`.
    #[arg(long)]
    pub layer: Option<usize>,
    #[command(subcommand)]
    pub mode: Option<FlipMode>,
}

#[derive(Debug, Subcommand)]
pub enum FlipMode {
    /// Random admissible flips.
    Random {
        #[arg(long, value_enum, default_value_t = ProcessArg::Poisson)]
        process: ProcessArg,
        #[arg(long)]
        count: usize,
        /// Locality scale of the Markov process.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Flip along a straight channel.
    Channel {
        #[arg(long)]
        start: usize,
        /// Direction index 0..12 in 30° steps.
        #[arg(long)]
        dir: u8,
        #[arg(long)]
        length: f64,
    },
    /// Replay a flip log.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum Analysis {
    /// Pebble game and numerical rank.
    Rigidity,
    /// Self-stress basis.
    Stress,
    /// Non-trivial flex basis.
    Flex,
    /// Effective resistance between two joints with unit conductances.
    Resistance {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Mass measure.
    Mass {
        #[arg(long, value_enum)]
        mode: MassArg,
    },
    /// Structural validation.
    Validate,
    /// Balance of every joint (`--tol`, default 1e-9).
    Balance,
    /// Associated planar triangulation and its flippable edges.
    Triangulation,
}

#[derive(Debug, Subcommand)]
pub enum ExportKind {
    /// Bars as an OBJ wireframe.
    Wireframe,
    /// Bi-quadratic beam surfaces as an OBJ mesh or a Bézier patch list.
    Beams {
        #[arg(long)]
        thickness: f64,
        #[arg(long, value_enum, default_value_t = BeamFormat::Obj)]
        format: BeamFormat,
        /// Samples per patch side in OBJ output.
        #[arg(long, default_value_t = 6)]
        samples: usize,
    },
    /// Zero level set of the box-spline field of the joint pattern.
    Levelset {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        iso: f64,
        /// Subdivision level of the field.
        #[arg(long, default_value_t = 3)]
        level: u32,
        /// Lattice sites per axis (default: the bounding block plus a margin).
        #[arg(long, value_delimiter = ',')]
        res: Vec<usize>,
    },
    /// Planar section of the beam surfaces (`--tol`, default 1e-6).
    Slice {
        /// Point then normal: `px,py,pz,nx,ny,nz`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        plane: Vec<f64>,
        #[arg(long)]
        thickness: f64,
    },
    /// Sparse matrix as `row,col,value` triplets.
    Matrix {
        #[arg(long, value_enum)]
        kind: MatrixKind,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SeedKind {
    Kagome2d,
    Kagome3d,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TopologyArg {
    Open,
    Toroidal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RuleArg {
    R0,
    R1,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    Edges,
    Pins,
    Sliders,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProcessArg {
    Poisson,
    Markov,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MassArg {
    Vertex,
    Edge,
    Face,
    Volume,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MapName {
    Identity,
    Affine,
    SphereOctant,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BeamFormat {
    Obj,
    Bezier,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MatrixKind {
    Rigidity,
    Stiffness,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected U,V")?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes `bytes` to `path` or standard output.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        }),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Io {
            path: "<stdout>".into(),
            message: e.to_string(),
        }),
    }
}

/// Runs a parsed command line and returns the bytes it produces. `stdin` is
/// read only when a document is needed and `--input` is absent.
pub fn run(cli: &Cli, stdin: &mut dyn Read) -> Result<Vec<u8>, CliError> {
    let input = |stdin: &mut dyn Read| -> Result<Structure, CliError> {
        let bytes = match &cli.input {
            Some(p) => read_file(p)?,
            None => {
                let mut buf = Vec::new();
                stdin.read_to_end(&mut buf).map_err(|e| CliError::Io {
                    path: "<stdin>".into(),
                    message: e.to_string(),
                })?;
                buf
            }
        };
        Ok(load(&bytes)?)
    };
    match &cli.command {
        Command::Generate(a) => Ok(save(&generate(a)?)),
        Command::Join { a, b, pairs } => {
            let sa = load(&read_file(a)?)?;
            let sb = load(&read_file(b)?)?;
            let pairs = match pairs {
                Some(p) => parse_pairs(&String::from_utf8_lossy(&read_file(p)?))?,
                None => Vec::new(),
            };
            Ok(save(&join_structures(&sa, &sb, &pairs)?))
        }
        Command::Analyze { what } => Ok(analyze(&input(stdin)?, what, cli.tol)?.into_bytes()),
        Command::Export { what } => Ok(export(&input(stdin)?, what, cli.tol)?.into_bytes()),
        Command::Flip(f) => {
            let log = match &f.mode {
                Some(FlipMode::Replay { log }) => {
                    Some(String::from_utf8_lossy(&read_file(log)?).parse::<FlipLog>()?)
                }
                _ => None,
            };
            Ok(save(&flip(input(stdin)?, f, cli.seed, log.as_ref())?))
        }
        cmd => Ok(save(&edit(input(stdin)?, cmd, cli.seed)?)),
    }
}

fn generate(a: &GenerateArgs) -> Result<Structure, CliError> {
    let topology = match a.topology {
        TopologyArg::Open => Topology::Open,
        TopologyArg::Toroidal => Topology::Toroidal,
    };
    let topo = format!("{:?}", a.topology).to_lowercase();
    let (g, e, line) = match a.kind {
        SeedKind::Kagome2d => {
            let (g, e) = kagome_2d(a.rows, a.cols, a.edge_length, topology)?;
            let line = format!(
                "generate kagome2d rows={} cols={} edge_length={} topology={topo}",
                a.rows, a.cols, a.edge_length
            );
            (g, e, line)
        }
        SeedKind::Kagome3d => {
            let (g, e) = kagome_3d(a.rows, a.cols, a.layers, a.edge_length, topology)?;
            let line = format!(
                "generate kagome3d rows={} cols={} layers={} edge_length={} topology={topo}",
                a.rows, a.cols, a.layers, a.edge_length
            );
            (g, e, line)
        }
    };
    let mut s = Structure::new(g, e);
    s.metadata.provenance.push(line);
    Ok(s)
}

fn require_unstiffened(s: &Structure, what: &str) -> Result<(), CliError> {
    if s.stiffening.is_some() {
        Err(usage(format!("{what} needs a structure without stiffening")))
    } else {
        Ok(())
    }
}

fn edit(mut s: Structure, cmd: &Command, seed: Option<u64>) -> Result<Structure, CliError> {
    let line = match cmd {
        Command::Refine {
            rule,
            steps,
            rebalance: rebal,
        } => {
            require_unstiffened(&s, "refine")?;
            let r = match rule {
                RuleArg::R0 => RefineRule::R0,
                RuleArg::R1 => RefineRule::R1,
            };
            for _ in 0..*steps {
                let old = s.graph.vertex_count;
                let (g, e) = refine(&s.graph, Some(&s.embedding), r)?;
                let mut e = e.expect("refinement with an embedding keeps it");
                if *rebal {
                    let free: Vec<usize> = (old..g.vertex_count)
                        .filter(|v| !g.boundary.contains(v))
                        .collect();
                    e = rebalance(&g, &e, &free, 1000, 1e-12)?.embedding;
                }
                s.graph = g;
                s.embedding = e;
                let step = format!("{rule:?}{}", if *rebal { "+rebalance" } else { "" });
                s.metadata.refinement.push(step.to_lowercase());
            }
            format!(
                "refine rule={} steps={steps} rebalance={rebal}",
                format!("{rule:?}").to_lowercase()
            )
        }
        Command::Refine3d {
            steps,
            rebalance_iters,
        } => {
            require_unstiffened(&s, "refine3d")?;
            for _ in 0..*steps {
                let (g, e) = refine_3d(&s.graph, &s.embedding, *rebalance_iters)?;
                s.graph = g;
                s.embedding = e;
                s.metadata
                    .refinement
                    .push(format!("3d rebalance_iters={rebalance_iters}"));
            }
            format!("refine3d steps={steps} rebalance_iters={rebalance_iters}")
        }
        Command::Stiffen { variant } => {
            require_unstiffened(&s, "stiffen")?;
            let v = match variant {
                VariantArg::Edges => StiffeningVariant::Edges,
                VariantArg::Pins => StiffeningVariant::Pins,
                VariantArg::Sliders => StiffeningVariant::Sliders,
            };
            let anchor = seed.map_or(AnchorChoice::Deterministic, AnchorChoice::Seeded);
            s.stiffening = Some(stiffen(&s.graph, &s.embedding, v, anchor)?);
            let variant = format!("{variant:?}").to_lowercase();
            match seed {
                Some(seed) => format!("stiffen variant={variant} seed={seed}"),
                None => format!("stiffen variant={variant}"),
            }
        }
        Command::Stiffen3d => {
            require_unstiffened(&s, "stiffen3d")?;
            s.stiffening = Some(stiffen_3d(&s.graph, &s.embedding)?);
            "stiffen3d".to_string()
        }
        Command::Map { name, params, fit } => {
            require_unstiffened(&s, "map")?;
            let map = match name {
                MapName::Identity => DomainMap::Identity,
                MapName::Affine => {
                    if params.len() != 12 {
                        return Err(usage(format!(
                            "affine map needs 12 parameters, got {}",
                            params.len()
                        )));
                    }
                    DomainMap::Affine {
                        matrix: Matrix3::from_row_slice(&params[..9]),
                        offset: Vec3::new(params[9], params[10], params[11]),
                    }
                }
                MapName::SphereOctant => DomainMap::SphereOctant { fit: *fit },
            };
            s.embedding = apply_map(&s.embedding, &map)?;
            let params: Vec<String> = params.iter().map(f64::to_string).collect();
            format!(
                "map name={} params={} fit={fit}",
                format!("{name:?}").to_lowercase(),
                params.join(",")
            )
        }
        _ => unreachable!("handled by run"),
    };
    s.metadata.provenance.push(line);
    Ok(s)
}

fn flip(
    mut s: Structure,
    f: &FlipArgs,
    seed: Option<u64>,
    log: Option<&FlipLog>,
) -> Result<Structure, CliError> {
    let (g, e) = (&s.graph, &s.embedding);
    let (outcome, line): (FlipOutcome, String) = match (&f.mode, f.edge, f.joint, f.layer) {
        (None, Some((u, v)), None, None) => (diagonal_flip(g, e, u, v)?, format!("flip edge={u},{v}")),
        (None, None, Some(j), None) => (diagonal_flip_joint(g, e, j)?, format!("flip joint={j}")),
        (None, None, Some(j), Some(l)) => {
            (diagonal_flip_3d(g, e, l, j)?, format!("flip layer={l} joint={j}"))
        }
        (
            Some(FlipMode::Random {
                process,
                count,
                lambda,
            }),
            None,
            None,
            None,
        ) => {
            let seed = seed.unwrap_or(0);
            let p = match process {
                ProcessArg::Poisson => RandomProcess::Poisson,
                ProcessArg::Markov => RandomProcess::Markov { lambda: *lambda },
            };
            (
                random_flips(g, e, p, *count, seed)?,
                format!(
                    "flip random process={} count={count} lambda={lambda} seed={seed}",
                    format!("{process:?}").to_lowercase()
                ),
            )
        }
        (Some(FlipMode::Channel { start, dir, length }), None, None, None) => (
            carve_channel(g, e, *start, ChannelDirection(*dir), *length)?,
            format!("flip channel start={start} dir={dir} length={length}"),
        ),
        (Some(FlipMode::Replay { .. }), None, None, None) => {
            let log = log.expect("replay log is read by run");
            (
                replay_flips(g, e, log)?,
                format!("flip replay flips={}", log.flips.len()),
            )
        }
        _ => {
            return Err(usage(
                "flip needs exactly one of --edge U,V, --joint J, --layer L --joint J, or a subcommand",
            ))
        }
    };
    s.graph = outcome.graph;
    s.embedding = outcome.embedding;
    if let Some(st) = &mut s.stiffening {
        st.base = s.graph.clone();
    }
    s.metadata.flip_logs.push(outcome.log.to_string());
    s.metadata.provenance.push(line);
    Ok(s)
}

/// Parses `a b` pairs, one per line; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<JoinPair>, CliError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<usize> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| usage(format!("pairs line {}: {e}", k + 1)))?;
        match nums[..] {
            [a, b] => out.push(JoinPair { a, b }),
            _ => return Err(usage(format!("pairs line {}: expected two joint ids", k + 1))),
        }
    }
    Ok(out)
}

fn as_stiffened(s: &Structure) -> StiffenedStructure {
    s.stiffening.clone().unwrap_or_else(|| StiffenedStructure {
        base: s.graph.clone(),
        variant: StiffeningVariant::Edges,
        anchor_index: 0,
        added_edges: Vec::new(),
        pins: Vec::new(),
        sliders: Vec::new(),
    })
}

/// Joins two documents; the result carries both provenances.
pub fn join_structures(a: &Structure, b: &Structure, pairs: &[JoinPair]) -> Result<Structure, CliError> {
    let (g, e) = join(
        &as_stiffened(a),
        &a.embedding,
        &as_stiffened(b),
        &b.embedding,
        pairs,
    )?;
    let mut s = Structure::new(g, e);
    s.metadata.provenance = a
        .metadata
        .provenance
        .iter()
        .map(|l| format!("a: {l}"))
        .chain(b.metadata.provenance.iter().map(|l| format!("b: {l}")))
        .collect();
    s.metadata.provenance.push(format!("join pairs={}", pairs.len()));
    Ok(s)
}

fn num(x: f64) -> String {
    if x.abs() < 1e-12 {
        "0".into()
    } else {
        format!("{x:.12e}")
    }
}

/// Vector with its largest-magnitude entry made positive, so reports do not
/// depend on the sign a factorization happens to return.
fn canonical_sign(v: &DVector<f64>) -> Vec<f64> {
    let k = v.iamax();
    let s = if !v.is_empty() && v[k] < 0.0 { -1.0 } else { 1.0 };
    v.iter().map(|x| s * x).collect()
}

/// Numerical rigidity of a structure with its stiffening constraints.
pub fn rigidity(s: &Structure) -> Result<RigidityReport, CliError> {
    let g = s.full_graph();
    let (constraints, grounded) = match &s.stiffening {
        Some(st) => (st.constraints(), st.is_grounded()),
        None => (bar_rows(&g), false),
    };
    let m = constraint_matrix(g.dim, g.vertex_count, &constraints, &s.embedding)?;
    let trivial = TrivialMotions::new(g.dim, g.vertex_count, &s.embedding, grounded);
    Ok(numeric_rank(&m, DEFAULT_RANK_TOL, &trivial))
}

fn analyze(s: &Structure, what: &Analysis, tol: Option<f64>) -> Result<String, CliError> {
    let g = s.full_graph();
    let e = &s.embedding;
    let mut out = String::new();
    macro_rules! line {
        ($($arg:tt)*) => { let _ = writeln!(out, $($arg)*); };
    }
    match what {
        Analysis::Rigidity => {
            let p = cost_pebble_game(&g)?;
            let r = rigidity(s)?;
            line!("dimension: {}", g.dim.get());
            line!("joints: {}", g.vertex_count);
            line!("bars: {}", g.edges.len());
            line!("simplices: {}", g.witness.len());
            line!("pebble_game: ({},{})", p.k, p.l);
            line!("pebble_independent: {}", p.independent);
            line!("pebble_rigid: {}", p.rigid);
            line!("pebble_minimally_rigid: {}", p.minimally_rigid);
            line!("pebble_free_dof: {}", p.free_dof);
            line!("pebble_redundant: {}", p.redundant_edges.len());
            line!("rows: {}", r.rows);
            line!("cols: {}", r.cols);
            line!("rank: {}", r.rank);
            line!("right_nullity: {}", r.right_nullity);
            line!("trivial_motions: {}", r.trivial_dimension);
            line!("dof: {}", r.dof);
            line!("self_stresses: {}", r.stress_basis.len());
            line!("classification: {}", r.classification.name());
        }
        Analysis::Stress | Analysis::Flex => {
            let r = rigidity(s)?;
            let (name, basis) = match what {
                Analysis::Stress => ("stress", &r.stress_basis),
                _ => ("flex", &r.flex_basis),
            };
            line!("{name}_count: {}", basis.len());
            for (k, v) in basis.iter().enumerate() {
                let vals: Vec<String> = canonical_sign(v).into_iter().map(num).collect();
                line!("{name}[{k}]: {}", vals.join(" "));
            }
        }
        Analysis::Resistance { from, to } => {
            let edges = g.edge_pairs();
            let w = vec![1.0; edges.len()];
            let r = effective_resistance(g.vertex_count, &edges, &w, *from, *to)?;
            line!("from: {from}");
            line!("to: {to}");
            line!("resistance: {}", num(r));
        }
        Analysis::Mass { mode } => {
            let m = match mode {
                MassArg::Vertex => MassMode::Vertex,
                MassArg::Edge => MassMode::Edge,
                MassArg::Face => MassMode::Face,
                MassArg::Volume => MassMode::Volume,
            };
            line!("mode: {}", format!("{mode:?}").to_lowercase());
            line!("mass: {}", num(mass_measure(&g, e, m)?));
        }
        Analysis::Validate => {
            let r = validate_cost(&g);
            line!("valid: {}", r.is_valid());
            line!("violations: {}", r.violations.len());
            for (k, v) in r.violations.iter().enumerate() {
                line!("violation[{k}]: {v}");
            }
        }
        Analysis::Balance => {
            let ok = balance_check(&g, e, tol.unwrap_or(1e-9))?;
            let bad: Vec<String> = ok
                .iter()
                .enumerate()
                .filter(|(_, b)| !**b)
                .map(|(v, _)| v.to_string())
                .collect();
            line!("balanced: {}", ok.len() - bad.len());
            line!("unbalanced: {}", bad.len());
            line!("unbalanced_joints: {}", bad.join(" "));
        }
        Analysis::Triangulation => {
            let t = cost_to_triangulation(&s.graph, e)?;
            let admissible = t.admissible_flips(tol.unwrap_or(FLIP_TOL));
            line!("vertices: {}", t.vertex_count);
            line!("edges: {}", t.edges.len());
            line!("faces: {}", t.faces.len());
            line!("interior_edges: {}", t.interior_edges().len());
            line!("admissible_flips: {}", admissible.len());
            for (k, [a, b]) in t.edges.iter().enumerate() {
                let kind = if t.is_interior(k) { "interior" } else { "boundary" };
                let flip = if admissible.contains(&k) {
                    " admissible"
                } else {
                    ""
                };
                line!("edge[{k}]: {a} {b} {kind}{flip}");
            }
        }
    }
    Ok(out)
}

fn beams(s: &Structure, thickness: f64) -> Result<PatchSet, CliError> {
    let g = s.full_graph();
    Ok(beam_surface(&g, &s.embedding, &vec![thickness; g.edges.len()])?)
}

/// Lattice matching the structure's bar length, with its origin shifted by
/// a lattice vector so that all joints get coordinates of at least one, and
/// the block shape that holds them with a one-site margin.
fn pattern_lattice(g: &CostGraph, e: &Embedding) -> Result<(Lattice, [usize; 3]), CliError> {
    let bar = g
        .edges
        .first()
        .map(|x| e.distance(x.u, x.v))
        .ok_or_else(|| usage("level sets need at least one bar"))?;
    let mut lattice = match g.dim {
        Dim::Two => Lattice::kagome_2d(2.0 * bar),
        Dim::Three => Lattice::kagome_3d(2.0 * bar),
    };
    let d = g.dim.get();
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for p in e.positions.iter().take(g.vertex_count) {
        let c = lattice.coords(p).ok_or_else(|| usage("degenerate lattice"))?;
        for a in 0..d {
            lo[a] = lo[a].min(c[a].round() as i64);
            hi[a] = hi[a].max(c[a].round() as i64);
        }
    }
    let mut shape = [1usize; 3];
    let mut shift = [0.0; 3];
    for a in 0..d {
        let n = (hi[a] - lo[a] + 3) as usize;
        shape[a] = n + n % 2;
        shift[a] = (lo[a] - 1) as f64;
    }
    lattice.origin = lattice.point(shift);
    Ok((lattice, shape))
}

fn export(s: &Structure, what: &ExportKind, tol: Option<f64>) -> Result<String, CliError> {
    match what {
        ExportKind::Wireframe => Ok(wireframe_obj(&s.full_graph(), &s.embedding)),
        ExportKind::Beams {
            thickness,
            format,
            samples,
        } => {
            let p = beams(s, *thickness)?;
            Ok(match format {
                BeamFormat::Bezier => p.to_bezier_text(),
                BeamFormat::Obj => {
                    let mut out = format!("# beam volume {}\n", num(beam_volume(&p)?));
                    out.push_str(&mesh_obj(&beam_mesh(&p, (*samples).max(1))));
                    out
                }
            })
        }
        ExportKind::Levelset { iso, level, res } => {
            let g = s.full_graph();
            let (lattice, mut shape) = pattern_lattice(&g, &s.embedding)?;
            if !res.is_empty() {
                if res.len() != g.dim.get() {
                    return Err(usage(format!("--res needs {} values", g.dim.get())));
                }
                shape[..res.len()].copy_from_slice(res);
            }
            let c = node_coefficients(&g, &s.embedding, &lattice, shape, tol.unwrap_or(1e-6))?;
            let field = boxspline_field(lattice, shape, c, *level)?;
            Ok(match level_set(&field.eval(), *iso)? {
                LevelSet::Curves(lines) => polylines_text(&lines),
                LevelSet::Surface(mesh) => mesh_obj(&mesh),
            })
        }
        ExportKind::Slice { plane, thickness } => {
            if plane.len() != 6 {
                return Err(usage("--plane needs six values: point then normal"));
            }
            let p = beams(s, *thickness)?;
            let lines = slice_plane(
                &p,
                Vec3::new(plane[0], plane[1], plane[2]),
                Vec3::new(plane[3], plane[4], plane[5]),
                tol.unwrap_or(SLICE_TOL),
            )?;
            Ok(polylines_text(&lines))
        }
        ExportKind::Matrix { kind } => {
            let g = s.full_graph();
            let m = match kind {
                MatrixKind::Rigidity => {
                    let cs = match &s.stiffening {
                        Some(st) => st.constraints(),
                        None => bar_rows(&g),
                    };
                    constraint_matrix(g.dim, g.vertex_count, &cs, &s.embedding)?
                }
                MatrixKind::Stiffness => stiffness_matrix(&g, &s.embedding, &vec![1.0; g.edges.len()])?,
            };
            Ok(matrix_triplets(&m))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str], stdin: &[u8]) -> Result<Vec<u8>, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("costkit").chain(args.iter().copied()))
            .map_err(|e| usage(e.to_string()))?;
        run(&cli, &mut &stdin[..])
    }

    fn report(args: &[&str], stdin: &[u8]) -> String {
        String::from_utf8(exec(args, stdin).unwrap()).unwrap()
    }

    fn value<'a>(report: &'a str, key: &str) -> &'a str {
        report
            .lines()
            .find_map(|l| l.strip_prefix(key)?.strip_prefix(": "))
            .unwrap_or_else(|| panic!("no {key} in {report}"))
    }

    #[test]
    fn generate_is_deterministic_and_loadable() {
        let a = exec(&["generate", "kagome2d", "--rows", "2", "--cols", "3"], b"").unwrap();
        let b = exec(&["generate", "kagome2d", "--rows", "2", "--cols", "3"], b"").unwrap();
        assert_eq!(a, b);
        let s = load(&a).unwrap();
        assert_eq!(s.metadata.provenance.len(), 1);
        assert_eq!(save(&s), a);
    }

    #[test]
    fn stiffened_bowtie_is_minimally_rigid() {
        let doc = exec(&["generate", "kagome2d", "--rows", "1", "--cols", "1"], b"").unwrap();
        let r = report(&["analyze", "rigidity"], &doc);
        assert_eq!(value(&r, "dof"), "1");
        let st = exec(&["stiffen", "--variant", "edges"], &doc).unwrap();
        let r = report(&["analyze", "rigidity"], &st);
        assert_eq!(value(&r, "classification"), "minimally-rigid");
        assert_eq!(value(&r, "pebble_minimally_rigid"), "true");
        assert!(matches!(
            exec(&["stiffen", "--variant", "pins"], &st),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn flip_records_a_replayable_log() {
        let doc = exec(&["generate", "kagome2d", "--rows", "3", "--cols", "3"], b"").unwrap();
        let flipped = exec(&["--seed", "5", "flip", "random", "--count", "4"], &doc).unwrap();
        let s = load(&flipped).unwrap();
        assert_eq!(s.metadata.flip_logs.len(), 1);
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("flips.log");
        std::fs::write(&log, &s.metadata.flip_logs[0]).unwrap();
        let replayed = exec(&["flip", "replay", "--log", log.to_str().unwrap()], &doc).unwrap();
        let r = load(&replayed).unwrap();
        assert_eq!(r.graph, s.graph);
        assert_eq!(r.embedding, s.embedding);
    }

    #[test]
    fn validation_and_balance_reports() {
        let doc = exec(
            &[
                "generate",
                "kagome2d",
                "--rows",
                "2",
                "--cols",
                "2",
                "--topology",
                "toroidal",
            ],
            b"",
        )
        .unwrap();
        let v = report(&["analyze", "validate"], &doc);
        assert_eq!(value(&v, "valid"), "true");
        let b = report(&["analyze", "balance"], &doc);
        assert_eq!(value(&b, "unbalanced"), "0");
    }

    #[test]
    fn bad_flags_are_usage_errors() {
        let doc = exec(&["generate", "kagome2d", "--rows", "2", "--cols", "2"], b"").unwrap();
        assert!(matches!(exec(&["flip"], &doc), Err(CliError::Usage(_))));
        assert!(matches!(
            exec(&["map", "--name", "affine", "--params", "1,2"], &doc),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            exec(&["analyze", "rigidity"], b"{"),
            Err(CliError::Doc(_))
        ));
    }

    #[test]
    fn pairs_file_parsing() {
        let p = parse_pairs("# header\n1 2\n3,4 # trailing\n\n").unwrap();
        assert_eq!(p, vec![JoinPair { a: 1, b: 2 }, JoinPair { a: 3, b: 4 }]);
        assert!(parse_pairs("1 2 3").is_err());
    }

    #[test]
    fn levelset_export_of_a_patch_gives_closed_curves() {
        let doc = exec(&["generate", "kagome2d", "--rows", "2", "--cols", "2"], b"").unwrap();
        let text = report(&["export", "levelset", "--level", "2"], &doc);
        let lines = crate::export::parse_polylines(&text).unwrap();
        assert!(!lines.is_empty());
        assert!(lines.iter().all(|l| l.closed));
    }
}
