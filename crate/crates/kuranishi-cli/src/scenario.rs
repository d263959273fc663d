//! Scenario files: TOML documents with named blocks whose matrix entries
//! are expression strings. See `docs/scenario-format.md`.

use std::collections::BTreeMap;
use std::ops::Range;

use kuranishi::arith::{Mono, Rational};
use kuranishi::bundle::{degree, BaseRing, Bundle, BundleError, Connection, Covering, FMat, FamilyBundle, PMat};
use kuranishi::curve::{CurveModel, MarkedPoint, PointId};
use kuranishi::linalg::Matrix;
use kuranishi::parabolic::{HiggsField, ParabolicBundle, ParabolicConnection, ParabolicError, ParabolicPoint, ParabolicStructure};
use kuranishi::sections::{ChartSpec, PoleProfile};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::expr::{Context, ExprError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Cohomology,
    Atiyah,
    FirstOrder,
    Obstruction,
    Kuranishi,
    PaperExample,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Cohomology => "cohomology",
            Task::Atiyah => "atiyah",
            Task::FirstOrder => "first-order",
            Task::Obstruction => "obstruction",
            Task::Kuranishi => "kuranishi",
            Task::PaperExample => "paper-example",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("{line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

type S = Spanned<String>;
type Rows = Vec<Vec<S>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    name: Option<String>,
    description: Option<String>,
    task: Option<Task>,
    order: Option<u32>,
    pole_bound: Option<i64>,
    curve: CurveBlock,
    covering: Option<CoveringBlock>,
    bundle: Option<BundleBlock>,
    connection: Option<ConnectionBlock>,
    parabolic: Option<ParabolicBlock>,
    higgs: Option<HiggsBlock>,
    datum: Option<DatumBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveBlock {
    kind: Spanned<String>,
    lambda: Option<S>,
    #[serde(default)]
    points: Vec<PointEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointEntry {
    label: String,
    x: Option<S>,
    y: Option<S>,
    z: Option<S>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoveringBlock {
    /// Removed points of each chart.
    charts: Vec<Vec<S>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleBlock {
    rank: usize,
    #[serde(default)]
    base: Vec<String>,
    #[serde(default)]
    order: u32,
    degrees: Option<Vec<i64>>,
    #[serde(default)]
    transitions: Vec<TransitionEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    charts: [usize; 2],
    matrix: Rows,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectionBlock {
    #[serde(default)]
    poles: BTreeMap<String, u32>,
    matrix: Option<Rows>,
    matrices: Option<Vec<Rows>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParabolicBlock {
    points: Vec<ParabolicEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParabolicEntry {
    point: S,
    /// Basis vectors `v_0, v_1, ..`.
    flag: Rows,
    weights: Vec<S>,
    multiplicities: Option<Vec<usize>>,
    exponents: Option<Vec<S>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HiggsBlock {
    #[serde(default)]
    poles: BTreeMap<String, u32>,
    matrix: Option<Rows>,
    matrices: Option<Vec<Rows>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatumBlock {
    coords: Vec<S>,
}

/// Echo of the scenario as it was understood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Echo {
    pub name: String,
    pub description: String,
    pub curve: String,
    pub charts: Vec<String>,
    pub rank: usize,
    pub base: Vec<String>,
    pub family_order: u32,
    pub connection: bool,
    pub poles: Vec<(String, u32)>,
    pub parabolic_points: Vec<String>,
    pub higgs: bool,
}

#[derive(Clone, Debug)]
pub enum Parabolic {
    Bundle(ParabolicBundle),
    Connection(ParabolicConnection),
}

/// A parsed and validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub echo: Echo,
    pub task: Option<Task>,
    pub order: Option<u32>,
    pub pole_bound: Option<i64>,
    pub curve: CurveModel,
    pub covering: Covering,
    pub bundle: Bundle,
    /// The bundle as a family over its base variables, when it has any.
    pub family: Option<FamilyBundle>,
    pub connection: Option<Connection>,
    pub parabolic: Option<Parabolic>,
    pub higgs: Option<HiggsField>,
    pub datum: Option<Vec<Rational>>,
}

struct Src<'a> {
    text: &'a str,
}

impl Src<'_> {
    fn at(&self, byte: usize, message: impl Into<String>) -> ScenarioError {
        let byte = byte.min(self.text.len());
        let before = &self.text[..byte];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
        ScenarioError::Parse { line, column, message: message.into() }
    }

    fn span(&self, sp: Range<usize>, message: impl Into<String>) -> ScenarioError {
        self.at(sp.start, message)
    }

    /// Maps an offset inside an expression string to the file.
    fn expr(&self, s: &S, e: ExprError) -> ScenarioError {
        let start = s.span().start;
        let quote = self.text[start..].chars().next().map(|c| c.len_utf8()).unwrap_or(0);
        self.at(start + quote + e.offset, e.message)
    }
}

fn invalid(e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Invalid(e.to_string())
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let src = Src { text };
        let file: File = toml::from_str(text).map_err(|e| match e.span() {
            Some(sp) => src.span(sp, e.message().to_string()),
            None => ScenarioError::Parse { line: 1, column: 1, message: e.message().to_string() },
        })?;
        build(&src, file)
    }

    pub fn mode_name(&self) -> &'static str {
        if self.connection.is_some() {
            "connection"
        } else {
            "bundle"
        }
    }
}

fn build_curve(src: &Src, c: &CurveBlock) -> Result<CurveModel, ScenarioError> {
    let q = Context::constants(&CurveModel::default_elliptic());
    let rat = |s: &S| q.rational(s.get_ref()).map_err(|e| src.expr(s, e));
    match c.kind.get_ref().as_str() {
        "elliptic" => {
            let lambda = match &c.lambda {
                Some(s) => rat(s)?,
                None => Rational::from_integer(2.into()),
            };
            let mut pts = Vec::new();
            for p in &c.points {
                match (&p.x, &p.y, &p.z) {
                    (Some(x), Some(y), None) => pts.push(MarkedPoint::affine(&p.label, rat(x)?, rat(y)?)),
                    _ => return Err(invalid(format!("elliptic point {} needs x and y", p.label))),
                }
            }
            CurveModel::legendre(lambda, pts).map_err(invalid)
        }
        "line" => {
            if c.lambda.is_some() {
                return Err(invalid("lambda is only meaningful for the elliptic curve"));
            }
            let mut pts = Vec::new();
            for p in &c.points {
                match (&p.x, &p.y, &p.z) {
                    (None, None, Some(z)) => pts.push(MarkedPoint::line(&p.label, rat(z)?)),
                    _ => return Err(invalid(format!("point {} on the line needs exactly z", p.label))),
                }
            }
            CurveModel::projective_line(pts).map_err(invalid)
        }
        other => Err(src.span(c.kind.span(), format!("unknown curve kind '{other}' (elliptic or line)"))),
    }
}

fn point(src: &Src, curve: &CurveModel, s: &S) -> Result<PointId, ScenarioError> {
    curve.find(s.get_ref()).map_err(|_| src.span(s.span(), format!("unknown point label '{}'", s.get_ref())))
}

fn profile(curve: &CurveModel, poles: &BTreeMap<String, u32>) -> Result<PoleProfile, ScenarioError> {
    let mut v = Vec::new();
    for (l, k) in poles {
        v.push((curve.find(l).map_err(|_| invalid(format!("unknown point label '{l}' in poles")))?, *k));
    }
    Ok(PoleProfile::from_orders(v))
}

fn fmat(src: &Src, cx: &Context, rows: &Rows, r: usize) -> Result<FMat, ScenarioError> {
    if rows.len() != r || rows.iter().any(|row| row.len() != r) {
        return Err(invalid(format!("expected a {r}x{r} matrix")));
    }
    let mut out = Vec::new();
    for row in rows {
        out.push(row.iter().map(|s| cx.function(s.get_ref()).map_err(|e| src.expr(s, e))).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(FMat::from_rows(out))
}

fn per_chart(src: &Src, cx: &Context, one: &Option<Rows>, many: &Option<Vec<Rows>>, r: usize, charts: usize, what: &str) -> Result<Vec<FMat>, ScenarioError> {
    match (one, many) {
        (Some(m), None) => Ok(vec![fmat(src, cx, m, r)?; charts]),
        (None, Some(ms)) if ms.len() == charts => ms.iter().map(|m| fmat(src, cx, m, r)).collect(),
        (None, Some(ms)) => Err(invalid(format!("{what}: {} matrices for {charts} charts", ms.len()))),
        (None, None) => Ok(vec![FMat::zeros(&cx.curve, r, r); charts]),
        (Some(_), Some(_)) => Err(invalid(format!("{what}: give either matrix or matrices"))),
    }
}

/// `⊕ O(n_i)` on a two-chart covering, by powers of the curve coordinate.
fn split_bundle(cov: &Covering, degrees: &[i64]) -> Result<Bundle, ScenarioError> {
    if cov.len() != 2 {
        return Err(invalid("degrees need a two-chart covering"));
    }
    let curve = cov.curve();
    let w = curve.coord();
    let unit = degree(&Bundle::new(cov, BTreeMap::from([((0, 1), FMat::from_rows(vec![vec![w.clone()]]))])).map_err(invalid)?);
    let mut parts = Vec::new();
    for &n in degrees {
        if n % unit != 0 {
            return Err(invalid(format!("degree {n} is not a multiple of {unit} on this curve")));
        }
        let g = w.pow(n / unit).map_err(invalid)?;
        parts.push(Bundle::new(cov, BTreeMap::from([((0, 1), FMat::from_rows(vec![vec![g]]))])).map_err(invalid)?);
    }
    Bundle::direct_sum(&parts).map_err(invalid)
}

fn build(src: &Src, f: File) -> Result<Scenario, ScenarioError> {
    let curve = build_curve(src, &f.curve)?;
    let covering = match &f.covering {
        None => Covering::standard(&curve).map_err(invalid)?,
        Some(c) => {
            let mut charts = Vec::new();
            for ch in &c.charts {
                charts.push(ChartSpec::new(ch.iter().map(|s| point(src, &curve, s)).collect::<Result<Vec<_>, _>>()?));
            }
            Covering::new(&curve, charts).map_err(invalid)?
        }
    };
    let bb = f.bundle.unwrap_or(BundleBlock { rank: 1, base: Vec::new(), order: 0, degrees: None, transitions: Vec::new() });
    let r = bb.rank;
    if r == 0 {
        return Err(invalid("rank must be positive"));
    }
    if bb.base.is_empty() != (bb.order == 0) {
        return Err(invalid("base variables and a positive family order go together"));
    }
    let base: Vec<String> = bb.base.iter().map(|b| if b == "eps" { "ε".to_string() } else { b.clone() }).collect();
    let fx = Context::functions(&curve);
    let (bundle, family) = match (&bb.degrees, bb.transitions.is_empty()) {
        (Some(_), false) => return Err(invalid("give either degrees or transitions")),
        (Some(d), true) => {
            if d.len() != r || !base.is_empty() {
                return Err(invalid("degrees need one entry per rank and no base variables"));
            }
            (split_bundle(&covering, d)?, None)
        }
        (None, true) => {
            if !base.is_empty() {
                return Err(invalid("a family needs transitions"));
            }
            (Bundle::trivial(&covering, r), None)
        }
        (None, false) => {
            let cx = Context { curve: curve.clone(), base: base.clone(), order: bb.order, constant: false };
            let ring = BaseRing::with_names(base.len(), bb.order, &[], base.clone());
            let mut central = BTreeMap::new();
            let mut full = BTreeMap::new();
            for t in &bb.transitions {
                let [a, b] = t.charts;
                if a >= b || b >= covering.len() {
                    return Err(invalid(format!("transition charts {a}, {b}: need a < b < {}", covering.len())));
                }
                if t.matrix.len() != r || t.matrix.iter().any(|row| row.len() != r) {
                    return Err(invalid(format!("transition g_{a}{b} must be {r}x{r}")));
                }
                let mut terms: BTreeMap<Mono, FMat> = BTreeMap::new();
                for (i, row) in t.matrix.iter().enumerate() {
                    for (j, s) in row.iter().enumerate() {
                        let v = cx.value(s.get_ref()).map_err(|e| src.expr(s, e))?;
                        for (m, c) in v.terms {
                            terms.entry(m).or_insert_with(|| FMat::zeros(&curve, r, r)).set(i, j, c);
                        }
                    }
                }
                let one = Mono::one(base.len());
                central.insert((a, b), terms.get(&one).cloned().unwrap_or_else(|| FMat::zeros(&curve, r, r)));
                full.insert((a, b), PMat::from_terms(&curve, &ring, r, r, terms));
            }
            let bundle = Bundle::new(&covering, central).map_err(bundle_error)?;
            let family = if base.is_empty() { None } else { Some(FamilyBundle::new(&covering, &ring, full).map_err(bundle_error)?) };
            (bundle, family)
        }
    };
    let connection = match &f.connection {
        None => None,
        Some(c) => {
            let d = profile(&curve, &c.poles)?;
            let a = per_chart(src, &fx, &c.matrix, &c.matrices, r, covering.len(), "connection")?;
            Some(Connection::new(&bundle, d, a).map_err(bundle_error)?)
        }
    };
    let parabolic = match &f.parabolic {
        None => None,
        Some(p) => {
            let mut points = Vec::new();
            let mut exps = Vec::new();
            for e in &p.points {
                let pid = point(src, &curve, &e.point)?;
                let rat = |s: &S| fx.rational(s.get_ref()).map_err(|er| src.expr(s, er));
                if e.flag.len() != r || e.flag.iter().any(|v| v.len() != r) {
                    return Err(invalid(format!("flag at {} needs {r} vectors of length {r}", e.point.get_ref())));
                }
                let mut cols = Vec::new();
                for v in &e.flag {
                    cols.push(v.iter().map(rat).collect::<Result<Vec<_>, _>>()?);
                }
                let flag = Matrix::from_cols(r, cols);
                let weights = e.weights.iter().map(rat).collect::<Result<Vec<_>, _>>()?;
                let multiplicities = e.multiplicities.clone().unwrap_or_else(|| vec![1; weights.len()]);
                points.push(ParabolicPoint { point: pid, flag, weights, multiplicities });
                if let Some(x) = &e.exponents {
                    exps.push(x.iter().map(rat).collect::<Result<Vec<_>, _>>()?);
                }
            }
            let st = ParabolicStructure { points };
            Some(match &connection {
                Some(conn) => {
                    if exps.len() != st.points.len() {
                        return Err(invalid("a parabolic connection needs exponents at every point"));
                    }
                    Parabolic::Connection(ParabolicConnection::new(conn.clone(), st, exps).map_err(parabolic_error)?)
                }
                None => Parabolic::Bundle(ParabolicBundle::new(bundle.clone(), st).map_err(parabolic_error)?),
            })
        }
    };
    let higgs = match &f.higgs {
        None => None,
        Some(h) => Some(HiggsField { divisor: profile(&curve, &h.poles)?, matrices: per_chart(src, &fx, &h.matrix, &h.matrices, r, covering.len(), "higgs")? }),
    };
    let datum = match &f.datum {
        None => None,
        Some(d) => Some(d.coords.iter().map(|s| fx.rational(s.get_ref()).map_err(|e| src.expr(s, e))).collect::<Result<Vec<_>, _>>()?),
    };
    let echo = Echo {
        name: f.name.clone().unwrap_or_default(),
        description: f.description.clone().unwrap_or_default(),
        curve: curve.describe(),
        charts: covering.charts().iter().map(|c| c.label(&curve)).collect(),
        rank: r,
        base: base.clone(),
        family_order: bb.order,
        connection: connection.is_some(),
        poles: connection.as_ref().map(|c| c.divisor().orders().iter().map(|(p, k)| (curve.point(*p).label.clone(), *k)).collect()).unwrap_or_default(),
        parabolic_points: match &parabolic {
            Some(Parabolic::Bundle(p)) => p.structure.points.iter().map(|q| curve.point(q.point).label.clone()).collect(),
            Some(Parabolic::Connection(p)) => p.structure.points.iter().map(|q| curve.point(q.point).label.clone()).collect(),
            None => Vec::new(),
        },
        higgs: higgs.is_some(),
    };
    if let Some(h) = &higgs {
        let rep = kuranishi::parabolic::validate_higgs(&bundle, h);
        if !rep.passed() {
            return Err(ScenarioError::Invalid(format!("Higgs field fails its checks:\n{}", rep.render())));
        }
    }
    Ok(Scenario { echo, task: f.task, order: f.order, pole_bound: f.pole_bound, curve, covering, bundle, family, connection, parabolic, higgs, datum })
}

fn bundle_error(e: BundleError) -> ScenarioError {
    match e {
        BundleError::Invalid(r) => ScenarioError::Invalid(format!("validation failed:\n{}", r.render())),
        e => invalid(e),
    }
}

fn parabolic_error(e: ParabolicError) -> ScenarioError {
    invalid(e)
}
