//! `umt` subcommands.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use umt_core::cantor::{materialize, CantorMetric};
use umt_core::deform::{chordal_extend, find_sphericalization_counterexample, invert, sphericalize};
use umt_core::distort::{bilipschitz_of_map, DistortionReport, PointMap, ReportOptions};
use umt_core::embed::{embed_compact, embed_unbounded, uniformize, EmbedMode, EmbeddingResult, UniformizeMode};
use umt_core::props::{
    check_ultrametric, disconnectedness_modulus, doubling_constant, uniform_perfectness_constant, CoverMode,
};
use umt_core::random::UltrametricParams;
use umt_core::ultrametrize::{build_dendrogram, subdominant_ultrametric, ultrametrization_distortion};
use umt_core::{ExtendedSpace, FiniteMetricSpace, Rational};

use crate::error::{Error, Result};
use crate::io::{self, CantorFile, DendrogramFile, Space, SpaceFile};
use crate::{gen, parallel};

#[derive(Debug, Parser)]
#[command(name = "umt", version, about = "Finite ultrametric geometry: Cantor metrics, deformations, embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random space or a Cantor word set.
    Gen(GenArgs),
    /// Check metric properties of a space.
    Check(CheckArgs),
    /// Apply a metric deformation.
    Deform(DeformArgs),
    /// Subdominant ultrametric (single-linkage) and its dendrogram.
    Ultrametrize(UltrametrizeArgs),
    /// Embed an ultrametric space into a Cantor set.
    Embed(EmbedArgs),
    /// Distortion constants of a map between spaces.
    Distort(DistortArgs),
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Ultrametric,
    Metric,
    Cantor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Rho,
    Sigma,
}

impl From<MetricArg> for CantorMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Rho => CantorMetric::Rho,
            MetricArg::Sigma => CantorMetric::Sigma,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// What to generate.
    pub kind: GenKind,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Heights are powers of this ratio (ultrametric) or the Cantor parameter.
    #[arg(long, default_value = "1/2", value_parser = parse_rational)]
    pub lambda: Rational,
    #[arg(long, default_value_t = 4)]
    pub max_children: usize,
    /// Level of the root height `λ^top`.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub top: i64,
    /// Deepest level used when the tree allows it.
    #[arg(long, default_value_t = 64, allow_negative_numbers = true)]
    pub bottom: i64,
    /// Largest level drop from a node to a child.
    #[arg(long, default_value_t = 2)]
    pub max_step: u32,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Sample this many words instead of enumerating all of them.
    #[arg(long)]
    pub count: Option<usize>,
    /// Emit the Cantor set as a distance matrix in this metric.
    #[arg(long)]
    pub materialize: Option<MetricArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Property {
    Ultrametric,
    Doubling,
    Perfect,
    Disconnected,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Greedy,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Property::All)]
    pub property: Property,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Relative tolerance of the ultrametric check.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Metric used when the input is a Cantor file.
    #[arg(long, value_enum, default_value_t = MetricArg::Rho)]
    pub metric: MetricArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DeformKind {
    Chordal,
    Invert,
    Sphericalize,
    /// Search random ultrametrics for a non-ultrametric sphericalization.
    Counterexample,
}

#[derive(Debug, Args)]
pub struct DeformArgs {
    #[arg(long, value_enum)]
    pub kind: DeformKind,
    /// Label of the base point.
    #[arg(long, required_if_eq_any = [("kind", "chordal"), ("kind", "invert"), ("kind", "sphericalize")])]
    pub base: Option<String>,
    #[arg(long = "in", required_if_eq_any = [("kind", "chordal"), ("kind", "invert"), ("kind", "sphericalize")])]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub max_n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Triples examined by the counterexample search.
    #[arg(long, default_value_t = 10_000)]
    pub budget: u64,
}

#[derive(Debug, Args)]
pub struct UltrametrizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the dendrogram of the subdominant ultrametric here.
    #[arg(long)]
    pub dendrogram: Option<PathBuf>,
    /// Emit distortion and modulus alongside the subdominant space.
    #[arg(long)]
    pub report: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmbedModeArg {
    ExactLevel,
    ExpandDepth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UniformizeArg {
    Bounded,
    Unbounded,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value = "1/2", value_parser = parse_rational)]
    pub lambda: Rational,
    #[arg(long, value_enum, default_value_t = EmbedModeArg::ExactLevel)]
    pub mode: EmbedModeArg,
    /// Embed into the punctured Cantor set with `σ` via the chordal extension.
    #[arg(long, requires = "base", conflicts_with = "uniformize")]
    pub unbounded: bool,
    #[arg(long)]
    pub base: Option<String>,
    /// Run the full pipeline from a general metric (k = 2, expand-depth).
    #[arg(long, value_enum)]
    pub uniformize: Option<UniformizeArg>,
    /// Add quasimöbius and Möbius scans to the report.
    #[arg(long)]
    pub full_report: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistortKind {
    Bilip,
    Qs,
    Qm,
    Mobius,
    All,
}

#[derive(Debug, Args)]
pub struct DistortArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, value_enum, default_value_t = DistortKind::All)]
    pub kind: DistortKind,
    /// Möbius tolerance on relative cross-ratio deviation.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Sample quadruples above the exhaustive cap.
    #[arg(long)]
    pub force: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match parallel::with_pool(|| execute(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            1
        }
    }
}

pub fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Check(a) => cmd_check(a),
        Command::Deform(a) => cmd_deform(a),
        Command::Ultrametrize(a) => cmd_ultrametrize(a),
        Command::Embed(a) => cmd_embed(a),
        Command::Distort(a) => cmd_distort(a),
    }
}

fn label_index(space: &FiniteMetricSpace, label: &str) -> Result<usize> {
    space.index_of(label).ok_or_else(|| Error::InvalidParams(format!("no point labelled {label:?}")))
}

fn read_metric(path: &Path) -> Result<ExtendedSpace> {
    io::read_any_space(path, CantorMetric::Rho)?.metric()
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let out = a.out.as_deref();
    match a.kind {
        GenKind::Ultrametric => {
            let p = UltrametricParams {
                n: a.n,
                max_children: a.max_children,
                lambda: a.lambda,
                top: a.top,
                bottom: a.bottom,
                max_step: a.max_step,
            };
            io::emit(&SpaceFile::from_metric(&gen::ultrametric(&p, a.seed)?), out)
        }
        GenKind::Metric => io::emit(&SpaceFile::from_metric(&gen::euclidean(a.n, a.seed)?), out),
        GenKind::Cantor => {
            let c = gen::cantor(a.k, a.depth, a.lambda, a.count, a.seed)?;
            match a.materialize {
                None => io::emit(&CantorFile::from_space(&c), out),
                Some(m) => {
                    let c = io::puncture_for(c, m.into())?;
                    io::emit(&SpaceFile::from_metric(&materialize(&c, m.into())?), out)
                }
            }
        }
    }
}

fn witness_triple(labels: &[String], w: &umt_core::props::TripleWitness) -> Value {
    json!({
        "triple": w.triple.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>(),
        "lhs": w.lhs,
        "rhs": w.rhs,
    })
}

fn cmd_check(a: CheckArgs) -> Result<()> {
    let space = io::read_any_space(&a.input, a.metric.into())?;
    let want = |p: Property| a.property == p || a.property == Property::All;
    let mut out = Map::new();
    if want(Property::Ultrametric) {
        let (check, labels) = match &space {
            Space::Metric(s) => (check_ultrametric(s.base(), a.tol), s.base().labels().to_vec()),
            Space::Quasi(q) => (check_ultrametric(q, a.tol), q.labels().to_vec()),
        };
        out.insert("is_ultrametric".into(), check.holds.into());
        if let Some(w) = &check.witness {
            out.insert("ultrametric_witness".into(), witness_triple(&labels, w));
        }
    }
    if a.property != Property::Ultrametric {
        let s = space.metric()?;
        let d = s.base();
        let labels = d.labels();
        if want(Property::Doubling) {
            let mode = match a.mode {
                ModeArg::Exact => CoverMode::Exact,
                ModeArg::Greedy => CoverMode::Greedy,
            };
            let r = doubling_constant(d, mode)?;
            out.insert("doubling_N".into(), r.constant.into());
            out.insert("doubling_method".into(), json!(r.method));
            if let Some((x, radius)) = r.witness {
                out.insert("doubling_witness".into(), json!({ "center": labels[x], "radius": radius }));
            }
        }
        if want(Property::Perfect) {
            let r = uniform_perfectness_constant(d);
            out.insert("perfectness_C".into(), r.constant.into());
            if let Some(w) = r.witness {
                out.insert(
                    "perfectness_witness".into(),
                    json!({ "center": labels[w.center], "radius": w.radius, "inner": w.inner }),
                );
            }
        }
        if want(Property::Disconnected) {
            let r = disconnectedness_modulus(d);
            out.insert("ud_modulus".into(), r.modulus.into());
            out.insert("ud_chain".into(), r.chain.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>().into());
        }
    }
    io::emit(&Value::Object(out), a.out.as_deref())
}

fn cmd_deform(a: DeformArgs) -> Result<()> {
    let out = a.out.as_deref();
    if a.kind == DeformKind::Counterexample {
        let found = find_sphericalization_counterexample(a.max_n, a.seed, a.budget)
            .ok_or(Error::NotFound(format!("no counterexample within a budget of {} triples", a.budget)))?;
        let labels = found.space.labels();
        let w = &found.witness;
        let v = json!({
            "space": SpaceFile::from_metric(&found.space),
            "p": labels[found.p],
            "triple": w.triple.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>(),
            "lhs": w.lhs,
            "rhs": w.rhs,
            "margin": (w.lhs - w.rhs) / w.rhs,
        });
        return io::emit(&v, out);
    }
    let input = a.input.as_deref().expect("required by the parser");
    let label = a.base.as_deref().expect("required by the parser");
    let s = read_metric(input)?;
    let d = s.base();
    let o = label_index(d, label)?;
    match a.kind {
        DeformKind::Chordal => io::emit(&SpaceFile::from_extended(&chordal_extend(d, o)?), out),
        DeformKind::Invert => io::emit(&SpaceFile::from_metric(&invert(d, o)?), out),
        DeformKind::Sphericalize => io::emit(&SpaceFile::from_quasi(&sphericalize(d, o)?), out),
        DeformKind::Counterexample => unreachable!(),
    }
}

fn cmd_ultrametrize(a: UltrametrizeArgs) -> Result<()> {
    let s = read_metric(&a.input)?;
    let d = s.base();
    let u = subdominant_ultrametric(d);
    if let Some(p) = &a.dendrogram {
        let tree = build_dendrogram(&u)?;
        io::emit(&DendrogramFile::from_dendrogram(&tree), Some(p))?;
    }
    if a.report {
        let (l, pair) = ultrametrization_distortion(d);
        let v = json!({
            "subdominant": SpaceFile::from_metric(&u),
            "distortion": l,
            "pair": pair.map(|(x, y)| [d.label(x), d.label(y)]),
            "mu_star": disconnectedness_modulus(d).modulus,
        });
        io::emit(&v, a.out.as_deref())
    } else {
        io::emit(&SpaceFile::from_metric(&u), a.out.as_deref())
    }
}

fn embedding_json(space: &FiniteMetricSpace, r: &EmbeddingResult) -> Value {
    let assignment: Map<String, Value> =
        space.labels().iter().zip(&r.assignment).map(|(l, w)| (l.clone(), w.to_string().into())).collect();
    let mut v = json!({
        "target": CantorFile::from_space(&r.target),
        "metric": r.metric,
        "assignment": assignment,
        "report": r.report,
        "stage_constants": r.stages,
        "rescale": r.rescale,
        "bound": r.bound,
        "bound_holds": r.bound_holds,
    });
    if let Some(p) = &r.properties {
        v["properties"] = json!(p);
    }
    v
}

fn cmd_embed(a: EmbedArgs) -> Result<()> {
    let s = read_metric(&a.input)?;
    let d = s.base();
    let mode = match a.mode {
        EmbedModeArg::ExactLevel => EmbedMode::ExactLevel,
        EmbedModeArg::ExpandDepth => EmbedMode::ExpandDepth,
    };
    let base = a.base.as_deref().map(|l| label_index(d, l)).transpose()?;
    let mut r = match a.uniformize {
        Some(u) => {
            let m = match u {
                UniformizeArg::Bounded => UniformizeMode::Bounded,
                UniformizeArg::Unbounded => UniformizeMode::Unbounded,
            };
            uniformize(d, m, base, a.lambda)?
        }
        None if a.unbounded => embed_unbounded(d, base.expect("required by the parser"), a.k, a.lambda, mode)?,
        None => embed_compact(d, a.k, a.lambda, mode)?,
    };
    if a.full_report && a.uniformize.is_none() {
        let source = if r.rescale != 1.0 { d.scaled(1.0 / r.rescale) } else { d.clone() };
        let image = materialize(&r.target, r.metric)?;
        let map = PointMap::identity(ExtendedSpace::plain(source), ExtendedSpace::plain(image))?;
        r.report = parallel::report(&map, &ReportOptions { force: true, ..ReportOptions::full() })?;
    }
    io::emit(&embedding_json(d, &r), a.out.as_deref())
}

fn cmd_distort(a: DistortArgs) -> Result<()> {
    let map = io::read_map(&a.map)?;
    let all = a.kind == DistortKind::All;
    let report = if a.kind == DistortKind::Bilip {
        DistortionReport { bilipschitz: bilipschitz_of_map(&map), quasisymmetry: None, quasimobius: None, mobius: None }
    } else {
        let opts = ReportOptions {
            qs: all || a.kind == DistortKind::Qs,
            qm: all || a.kind == DistortKind::Qm,
            mobius_tol: (all || a.kind == DistortKind::Mobius).then_some(a.tol),
            force: a.force,
            seed: a.seed,
        };
        parallel::report(&map, &opts)?
    };
    io::emit(&report, a.out.as_deref())
}
