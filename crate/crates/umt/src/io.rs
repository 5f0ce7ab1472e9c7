//! JSON file formats.
//!
//! Spaces: `{"labels", "dist", "infinity"?, "compactified"?, "quasi"?}`.
//! An `infinity` label is a deleted point unless `compactified` is set, in
//! which case it takes part in cross ratios like any other point. `quasi`
//! marks a quasi-metric (triangle inequality not required).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use umt_core::cantor::{materialize, CantorMetric};
use umt_core::distort::PointMap;
use umt_core::ultrametrize::Dendrogram;
use umt_core::{CantorSpace, ExtendedSpace, FiniteMetricSpace, QuasiMetricSpace, Rational, Word};

use crate::error::{Error, Result};

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinity: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub compactified: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub quasi: bool,
}

/// A loaded space file.
#[derive(Clone, Debug)]
pub enum Space {
    Metric(ExtendedSpace),
    Quasi(QuasiMetricSpace),
}

impl Space {
    pub fn metric(self) -> Result<ExtendedSpace> {
        match self {
            Space::Metric(s) => Ok(s),
            Space::Quasi(_) => Err(Error::Format("this operation needs a metric space, not a quasi-metric".into())),
        }
    }
}

impl SpaceFile {
    pub fn from_metric(space: &FiniteMetricSpace) -> Self {
        SpaceFile {
            labels: space.labels().to_vec(),
            dist: space.rows(),
            infinity: None,
            compactified: false,
            quasi: false,
        }
    }

    pub fn from_extended(space: &ExtendedSpace) -> Self {
        let mut f = SpaceFile::from_metric(space.base());
        if let Some(i) = space.infinity() {
            f.infinity = Some(space.base().label(i).to_string());
            f.compactified = space.deleted_point().is_none();
        }
        f
    }

    pub fn from_quasi(space: &QuasiMetricSpace) -> Self {
        SpaceFile {
            labels: space.labels().to_vec(),
            dist: space.rows(),
            infinity: None,
            compactified: false,
            quasi: true,
        }
    }

    pub fn load(self) -> Result<Space> {
        if self.quasi {
            if self.infinity.is_some() {
                return Err(Error::Format("quasi-metric files cannot mark infinity".into()));
            }
            return Ok(Space::Quasi(QuasiMetricSpace::new(&self.dist, self.labels)?));
        }
        let base = FiniteMetricSpace::new(&self.dist, self.labels, FiniteMetricSpace::DEFAULT_TOL)?;
        let inf = match &self.infinity {
            None => None,
            Some(l) => Some(base.index_of(l).ok_or_else(|| Error::Format(format!("infinity label {l:?} is not a point")))?),
        };
        Ok(Space::Metric(match (inf, self.compactified) {
            (Some(i), true) => ExtendedSpace::compactified(base, i)?,
            (inf, _) => ExtendedSpace::new(base, inf)?,
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorFile {
    pub k: usize,
    pub lambda: String,
    pub depth: usize,
    pub points: Vec<String>,
    pub base: String,
}

impl CantorFile {
    pub fn from_space(s: &CantorSpace) -> Self {
        CantorFile {
            k: s.k(),
            lambda: s.lambda().to_string(),
            depth: s.depth(),
            points: s.points().iter().map(|w| w.to_string()).collect(),
            base: s.base().to_string(),
        }
    }

    pub fn load(&self) -> Result<CantorSpace> {
        let lambda: Rational = self.lambda.parse()?;
        let points = self.points.iter().map(|p| Word::parse(p, self.k)).collect::<std::result::Result<Vec<_>, _>>()?;
        let base = Word::parse(&self.base, self.k)?;
        Ok(CantorSpace::new(self.k, lambda, self.depth, points, base)?)
    }
}

/// Nested dendrogram: `{"height", "children", "leaf"?}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DendrogramFile {
    pub height: f64,
    #[serde(default)]
    pub children: Vec<DendrogramFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf: Option<String>,
}

impl DendrogramFile {
    pub fn from_dendrogram(d: &Dendrogram) -> Self {
        fn go(d: &Dendrogram, v: usize) -> DendrogramFile {
            let node = d.node(v);
            DendrogramFile {
                height: node.height,
                children: node.children.iter().map(|&c| go(d, c)).collect(),
                leaf: if node.children.is_empty() { Some(d.labels[node.leaves[0]].clone()) } else { None },
            }
        }
        go(d, d.root)
    }

    /// The tree metric on the leaves, in preorder.
    pub fn to_space(&self) -> Result<FiniteMetricSpace> {
        // per leaf: (label, [(ancestor height, child taken)])
        type Leaf = (String, Vec<(f64, usize)>);
        fn collect(t: &DendrogramFile, path: &mut Vec<(f64, usize)>, out: &mut Vec<Leaf>) -> Result<()> {
            match (&t.leaf, t.children.is_empty()) {
                (Some(l), true) => out.push((l.clone(), path.clone())),
                (None, false) => {
                    for (i, c) in t.children.iter().enumerate() {
                        path.push((t.height, i));
                        collect(c, path, out)?;
                        path.pop();
                    }
                }
                _ => return Err(Error::Format("a dendrogram node is a leaf exactly when it has no children".into())),
            }
            Ok(())
        }
        let mut leaves = Vec::new();
        collect(self, &mut Vec::new(), &mut leaves)?;
        let labels: Vec<String> = leaves.iter().map(|(l, _)| l.clone()).collect();
        Ok(FiniteMetricSpace::from_fn(labels, FiniteMetricSpace::DEFAULT_TOL, |i, j| {
            if i == j {
                return 0.0;
            }
            let (pi, pj) = (&leaves[i].1, &leaves[j].1);
            let common = pi.iter().zip(pj).take_while(|(a, b)| a.1 == b.1).count();
            pi[common].0
        })?)
    }
}

/// A map file: `source` and `target` are paths (relative to the map file)
/// or inline space objects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub source: Value,
    pub target: Value,
    pub assignment: BTreeMap<String, String>,
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value, path: &Path) -> Result<T> {
    serde_json::from_value(v).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

/// Reads a space file, or a Cantor file materialized with `metric`.
pub fn read_any_space(path: &Path, metric: CantorMetric) -> Result<Space> {
    let v: Value = read_json(path)?;
    space_from_value(v, path, metric)
}

fn space_from_value(v: Value, path: &Path, metric: CantorMetric) -> Result<Space> {
    if v.get("points").is_some() {
        let c: CantorFile = from_value(v, path)?;
        let space = puncture_for(c.load()?, metric)?;
        Ok(Space::Metric(ExtendedSpace::plain(materialize(&space, metric)?)))
    } else {
        from_value::<SpaceFile>(v, path)?.load()
    }
}

/// Drops the base point when materializing `σ`, which is undefined there.
pub fn puncture_for(space: CantorSpace, metric: CantorMetric) -> Result<CantorSpace> {
    if metric == CantorMetric::Sigma && space.base_index().is_some() {
        let pts = space.points().iter().filter(|w| *w != space.base()).cloned().collect();
        Ok(CantorSpace::new(space.k(), space.lambda(), space.depth(), pts, space.base().clone())?)
    } else {
        Ok(space)
    }
}

pub fn read_map(path: &Path) -> Result<PointMap> {
    let m: MapFile = read_json(path)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let side = |v: Value| -> Result<ExtendedSpace> {
        match v {
            Value::String(p) => {
                let p: PathBuf = dir.join(p);
                read_any_space(&p, CantorMetric::Rho)?.metric()
            }
            obj => space_from_value(obj, path, CantorMetric::Rho)?.metric(),
        }
    };
    let source = side(m.source)?;
    let target = side(m.target)?;
    let n = source.len();
    if m.assignment.len() != n {
        return Err(Error::Format(format!("assignment has {} entries for {n} source points", m.assignment.len())));
    }
    let mut assignment = vec![usize::MAX; n];
    for (s, t) in &m.assignment {
        let i = source.base().index_of(s).ok_or_else(|| Error::Format(format!("unknown source label {s:?}")))?;
        let j = target.base().index_of(t).ok_or_else(|| Error::Format(format!("unknown target label {t:?}")))?;
        assignment[i] = j;
    }
    Ok(PointMap::new(source, target, assignment)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Writes to `out`, or stdout when absent.
pub fn emit<T: Serialize>(v: &T, out: Option<&Path>) -> Result<()> {
    let text = to_pretty(v);
    match out {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io { path: p.to_path_buf(), source }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}
