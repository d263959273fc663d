//! Vector bundles as transition cocycles over a covering by charts, connections
//! with a fixed pole divisor, truncated families and endomorphism sections.
//!
//! Conventions: frames satisfy `e_β = e_α g_{αβ}`. An endomorphism with matrix
//! `M_α` in `e_α` has matrix `g_{αβ}^{-1} M_α g_{αβ}` in `e_β`, connection
//! matrices glue by `A_β = g^{-1} dg + g^{-1} A_α g`, and `∇_End M = dM + [A, M]`.

mod atiyah;
mod endspace;
mod fmat;
mod pmat;
mod ring;

use std::collections::BTreeMap;
use std::sync::Arc;


use crate::arith::Rational;
use crate::curve::{CurveError, CurveModel, Differential, PointId};
use crate::linalg::{LinalgError, Matrix};
use crate::report::Report;
use crate::sections::{ChartSpec, PoleProfile, SectionError};

pub use endspace::{EndSpace, FlagCondition, FlagMode, SheafSpec, Twist};
pub use fmat::FMat;
pub use pmat::PMat;
pub use ring::BaseRing;

pub use atiyah::{
    atiyah_class, atiyah_cocycle, end_family_frames, family_atiyah_class, family_end_spec, include_class, res_surjective, restriction_map, unvec_family, vec_family, AtiyahClass, FamilyEnd, Restriction,
};
pub(crate) use endspace::frame_change;

#[derive(Debug, Clone, thiserror::Error)]
pub enum BundleError {
    #[error("invalid covering: {0}")]
    Covering(String),
    #[error("validation failed:\n{}", .0.render())]
    Invalid(Report),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("pole of order {order} at {point}: residue endomorphism needs a logarithmic pole")]
    NotLogarithmic { point: String, order: i64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// An ordered list of charts, each the curve minus some marked points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Covering {
    curve: CurveModel,
    charts: Vec<ChartSpec>,
}

impl Covering {
    pub fn new(curve: &CurveModel, charts: Vec<ChartSpec>) -> Result<Self, BundleError> {
        if charts.len() < 2 {
            return Err(BundleError::Covering("at least two charts are required".into()));
        }
        for c in &charts {
            if let Some(p) = c.removed().iter().find(|&&p| p >= curve.points().len()) {
                return Err(BundleError::Covering(format!("chart removes unknown point {p}")));
            }
        }
        for (i, a) in charts.iter().enumerate() {
            if charts[..i].contains(a) {
                return Err(BundleError::Covering(format!("chart {} repeats an earlier chart", a.label(curve))));
            }
        }
        for p in curve.point_ids() {
            if !charts.iter().any(|c| c.contains(p)) {
                return Err(BundleError::Covering(format!("point {} lies on no chart", curve.point(p).label)));
            }
        }
        Ok(Covering { curve: curve.clone(), charts })
    }

    /// `{X \ ∞, X \ o}` with `o` the origin (`p0` on the elliptic curve, the
    /// first finite marked point on the line).
    pub fn standard(curve: &CurveModel) -> Result<Self, BundleError> {
        let inf = curve.infinity();
        let o = if curve.is_elliptic() { curve.find("p0")? } else { curve.point_ids().find(|&p| p != inf).ok_or_else(|| BundleError::Covering("the line needs a finite marked point".into()))? };
        Self::new(curve, vec![ChartSpec::new([inf]), ChartSpec::new([o])])
    }

    pub fn curve(&self) -> &CurveModel {
        &self.curve
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    pub fn charts(&self) -> &[ChartSpec] {
        &self.charts
    }

    pub fn chart(&self, i: usize) -> &ChartSpec {
        &self.charts[i]
    }

    /// Intersection of the listed charts.
    pub fn region(&self, tuple: &[usize]) -> ChartSpec {
        tuple.iter().fold(ChartSpec::whole(), |acc, &i| acc.intersect(&self.charts[i]))
    }

    pub fn lowest_containing(&self, p: PointId) -> usize {
        self.charts.iter().position(|c| c.contains(p)).expect("covering validated")
    }

    /// Increasing index tuples of length `p + 1`.
    pub fn tuples(&self, p: usize) -> Vec<Vec<usize>> {
        fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, left - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, self.charts.len(), p + 1, &mut Vec::new(), &mut out);
        out
    }

    /// Intersections of the nerve up to triples; on a curve every finite
    /// intersection of charts is a nonempty open set.
    pub fn nerve(&self) -> Vec<(Vec<usize>, bool)> {
        (1..3).flat_map(|p| self.tuples(p)).map(|t| (t, true)).collect()
    }

    pub fn label(&self, tuple: &[usize]) -> String {
        let idx: Vec<String> = tuple.iter().map(|i| i.to_string()).collect();
        format!("U{}", idx.join(""))
    }
}

/// Transition data of a (possibly family) bundle: `g_{αβ}` for `α < β` with
/// cached inverses.
#[derive(Clone, Debug)]
pub struct Frames {
    covering: Covering,
    ring: BaseRing,
    rank: usize,
    g: BTreeMap<(usize, usize), PMat>,
    ginv: BTreeMap<(usize, usize), PMat>,
}

impl Frames {
    fn new(covering: &Covering, ring: &BaseRing, rank: usize, g: BTreeMap<(usize, usize), PMat>) -> Result<Self, BundleError> {
        let n = covering.len();
        for a in 0..n {
            for b in a + 1..n {
                let m = g.get(&(a, b)).ok_or_else(|| BundleError::Shape(format!("missing transition g_{a}{b}")))?;
                if m.rows() != rank || m.cols() != rank {
                    return Err(BundleError::Shape(format!("g_{a}{b} is not {rank}x{rank}")));
                }
                if m.ring() != ring {
                    return Err(BundleError::Shape(format!("g_{a}{b} lives over another base ring")));
                }
            }
        }
        if let Some(k) = g.keys().find(|(a, b)| a >= b || *b >= n) {
            return Err(BundleError::Shape(format!("transition index {k:?} is not an increasing pair of charts")));
        }
        let mut ginv = BTreeMap::new();
        for (k, m) in &g {
            ginv.insert(*k, m.inv()?);
        }
        Ok(Frames { covering: covering.clone(), ring: ring.clone(), rank, g, ginv })
    }

    pub fn curve(&self) -> &CurveModel {
        self.covering.curve()
    }

    pub fn covering(&self) -> &Covering {
        &self.covering
    }

    pub fn ring(&self) -> &BaseRing {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `g_{αβ}` for any pair (identity on the diagonal, inverse below it).
    pub fn transition(&self, a: usize, b: usize) -> PMat {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Equal => PMat::identity(self.curve(), &self.ring, self.rank),
            Less => self.g[&(a, b)].clone(),
            Greater => self.ginv[&(b, a)].clone(),
        }
    }

    pub fn stored(&self) -> &BTreeMap<(usize, usize), PMat> {
        &self.g
    }

    fn restrict(&self, j: u32) -> Frames {
        let ring = self.ring.restrict(j);
        let g = self.g.iter().map(|(k, m)| (*k, m.restrict(&ring))).collect();
        let ginv = self.ginv.iter().map(|(k, m)| (*k, m.restrict(&ring))).collect();
        Frames { covering: self.covering.clone(), ring, rank: self.rank, g, ginv }
    }
}

fn validate_frames(f: &Frames) -> Report {
    let curve = f.curve().clone();
    let cov = f.covering();
    let mut r = Report::new();
    for (&(a, b), m) in f.stored() {
        let region = cov.region(&[a, b]);
        let name = format!("g_{a}{b} regular and invertible on {}", cov.label(&[a, b]));
        let g0 = m.central();
        let det = g0.det();
        let mut problems = Vec::new();
        if det.is_zero() {
            problems.push("determinant vanishes identically".to_string());
        } else {
            let mut total = 0i64;
            for p in curve.point_ids() {
                let v = curve.valuation(&det, p).expect("nonzero");
                total += v;
                if region.contains(p) && v != 0 {
                    problems.push(format!("ord det = {v} at {}", curve.point(p).label));
                }
            }
            if total != 0 {
                problems.push(format!("det has zeros or poles away from the marked points (marked degree {total})"));
            }
        }
        for t in m.terms().iter().chain(f.ginv[&(a, b)].terms()) {
            for e in t.entries().iter().filter(|e| !e.is_zero()) {
                for p in curve.point_ids().filter(|&p| region.contains(p)) {
                    let v = curve.valuation(e, p).expect("nonzero");
                    if v < 0 {
                        problems.push(format!("entry {} has a pole at {}", e.render(), curve.point(p).label));
                    }
                }
            }
        }
        problems.dedup();
        r.push(name, problems.is_empty(), problems.join("; "));
    }
    for t in cov.tuples(2) {
        let (a, b, c) = (t[0], t[1], t[2]);
        let lhs = f.transition(a, b).mul(&f.transition(b, c));
        let ok = lhs == f.transition(a, c);
        let detail = if ok { String::new() } else { residue_degree(&lhs.sub(&f.transition(a, c))) };
        r.push(format!("g_{a}{b} g_{b}{c} g_{c}{a} = 1 on {}", cov.label(&t)), ok, detail);
    }
    r
}

fn residue_degree(m: &PMat) -> String {
    match m.terms().iter().enumerate().find(|(_, t)| !t.is_zero()) {
        Some((i, _)) => format!("first discrepancy in degree {} ({})", m.ring().degree(i), m.ring().monos()[i].render(m.ring().names())),
        None => String::new(),
    }
}

/// A vector bundle over the rationals.
#[derive(Clone, Debug)]
pub struct Bundle {
    frames: Arc<Frames>,
}

impl Bundle {
    pub fn new(covering: &Covering, g: BTreeMap<(usize, usize), FMat>) -> Result<Self, BundleError> {
        let rank = g.values().next().map(|m| m.rows()).ok_or_else(|| BundleError::Shape("no transition matrices".into()))?;
        let ring = BaseRing::field();
        let g = g.into_iter().map(|(k, m)| (k, PMat::constant(&ring, m))).collect();
        let frames = Frames::new(covering, &ring, rank, g)?;
        let rep = validate_frames(&frames);
        if !rep.passed() {
            return Err(BundleError::Invalid(rep));
        }
        Ok(Bundle { frames: Arc::new(frames) })
    }

    pub fn trivial(covering: &Covering, rank: usize) -> Self {
        let curve = covering.curve();
        let g = covering.tuples(1).into_iter().map(|t| ((t[0], t[1]), FMat::identity(curve, rank))).collect();
        Self::new(covering, g).expect("identity cocycle")
    }

    /// Block-diagonal sum.
    pub fn direct_sum(parts: &[Bundle]) -> Result<Self, BundleError> {
        let cov = parts.first().ok_or_else(|| BundleError::Shape("empty direct sum".into()))?.covering().clone();
        if parts.iter().any(|b| b.covering() != &cov) {
            return Err(BundleError::Shape("summands over different coverings".into()));
        }
        let n: usize = parts.iter().map(|b| b.rank()).sum();
        let curve = cov.curve().clone();
        let mut g = BTreeMap::new();
        for t in cov.tuples(1) {
            let mut m = FMat::zeros(&curve, n, n);
            let mut off = 0;
            for b in parts {
                let gb = b.transition(t[0], t[1]);
                for i in 0..b.rank() {
                    for j in 0..b.rank() {
                        m.set(off + i, off + j, gb.get(i, j).clone());
                    }
                }
                off += b.rank();
            }
            g.insert((t[0], t[1]), m);
        }
        Self::new(&cov, g)
    }

    /// `E ⊗ L` for a line bundle `L` on the same covering.
    pub fn twist(&self, line: &Bundle) -> Result<Self, BundleError> {
        if line.rank() != 1 || line.covering() != self.covering() {
            return Err(BundleError::Shape("twisting needs a line bundle on the same covering".into()));
        }
        let g = self.covering().tuples(1).into_iter().map(|t| ((t[0], t[1]), self.transition(t[0], t[1]).mul_fn(line.transition(t[0], t[1]).get(0, 0)))).collect();
        Self::new(self.covering(), g)
    }

    pub fn frames(&self) -> &Arc<Frames> {
        &self.frames
    }

    pub fn curve(&self) -> &CurveModel {
        self.frames.curve()
    }

    pub fn covering(&self) -> &Covering {
        self.frames.covering()
    }

    pub fn rank(&self) -> usize {
        self.frames.rank()
    }

    pub fn transition(&self, a: usize, b: usize) -> FMat {
        self.frames.transition(a, b).central().clone()
    }

    pub fn as_family(&self) -> FamilyBundle {
        FamilyBundle { frames: self.frames.clone(), connection: None }
    }
}

pub fn validate_bundle(b: &Bundle) -> Report {
    validate_frames(&b.frames)
}

/// `deg E = -Σ_{P ∉ U_0} ord_P det g_{0,γ(P)}`, with `γ(P)` the lowest chart
/// containing `P`.
pub fn degree(b: &Bundle) -> i64 {
    let cov = b.covering();
    let curve = b.curve();
    let mut d = 0;
    for p in curve.point_ids().filter(|&p| !cov.chart(0).contains(p)) {
        let g = cov.lowest_containing(p);
        let det = b.transition(0, g).det();
        d -= curve.valuation(&det, p).expect("invertible transition");
    }
    d
}

/// Matrices `A_α` (as `dx`/`dz` coefficients), one per chart, with poles
/// bounded by the divisor `D` on each chart.
#[derive(Clone, Debug)]
pub struct Connection {
    bundle: Bundle,
    divisor: PoleProfile,
    a: Vec<FMat>,
}

impl Connection {
    pub fn new(bundle: &Bundle, divisor: PoleProfile, a: Vec<FMat>) -> Result<Self, BundleError> {
        let c = Self::unchecked(bundle, divisor, a)?;
        let rep = validate_connection(&c);
        if !rep.passed() {
            return Err(BundleError::Invalid(rep));
        }
        Ok(c)
    }

    /// Build without checking the transition law or pole bounds (shapes are
    /// still checked).
    pub fn unchecked(bundle: &Bundle, divisor: PoleProfile, a: Vec<FMat>) -> Result<Self, BundleError> {
        let r = bundle.rank();
        if a.len() != bundle.covering().len() || a.iter().any(|m| m.rows() != r || m.cols() != r) {
            return Err(BundleError::Shape(format!("need one {r}x{r} matrix per chart")));
        }
        Ok(Connection { bundle: bundle.clone(), divisor, a })
    }

    /// `∇ = d` in every frame; valid when all transitions are constant.
    pub fn trivial(bundle: &Bundle) -> Result<Self, BundleError> {
        let r = bundle.rank();
        let z = FMat::zeros(bundle.curve(), r, r);
        Self::new(bundle, PoleProfile::empty(), vec![z; bundle.covering().len()])
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn divisor(&self) -> &PoleProfile {
        &self.divisor
    }

    pub fn matrices(&self) -> &[FMat] {
        &self.a
    }

    pub fn matrix(&self, chart: usize) -> &FMat {
        &self.a[chart]
    }
}

pub fn validate_connection(c: &Connection) -> Report {
    let b = &c.bundle;
    let cov = b.covering();
    let curve = b.curve();
    let mut r = Report::new();
    for (i, a) in c.a.iter().enumerate() {
        let mut bad = Vec::new();
        for e in a.entries().iter().filter(|e| !e.is_zero()) {
            let w = Differential::new(e.clone());
            for p in curve.point_ids().filter(|&p| cov.chart(i).contains(p)) {
                let v = curve.differential_valuation(&w, p).expect("nonzero");
                let bound = -i64::from(c.divisor.order(p));
                if v < bound {
                    bad.push(format!("ord_{} = {v} < {bound}", curve.point(p).label));
                }
            }
        }
        bad.dedup();
        r.push(format!("A_{i} has poles bounded by D on {}", cov.chart(i).label(curve)), bad.is_empty(), bad.join("; "));
    }
    for t in cov.tuples(1) {
        let (x, y) = (t[0], t[1]);
        let g = b.transition(x, y);
        let gi = b.transition(y, x);
        let expect = gi.mul(&g.d()).add(&gi.mul(&c.a[x]).mul(&g));
        let ok = expect == c.a[y];
        let detail = if ok { String::new() } else { format!("A_{y} - (g^-1 dg + g^-1 A_{x} g) = {}", c.a[y].sub(&expect).render()) };
        r.push(format!("A_{y} = g^-1 dg + g^-1 A_{x} g on {}", cov.label(&t)), ok, detail);
    }
    r
}

/// Residues of the entries of `A_γ` at `P`, `γ` the lowest chart containing `P`.
pub fn residue_matrix(c: &Connection, p: PointId) -> Result<Matrix<Rational>, BundleError> {
    let curve = c.bundle.curve();
    if p >= curve.points().len() {
        return Err(SectionError::UnknownPoint(p.to_string()).into());
    }
    let g = c.bundle.covering().lowest_containing(p);
    let a = &c.a[g];
    let r = a.rows();
    let mut m = Matrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            let e = a.get(i, j);
            if e.is_zero() {
                continue;
            }
            let w = Differential::new(e.clone());
            let v = curve.differential_valuation(&w, p)?;
            if v < -1 {
                return Err(BundleError::NotLogarithmic { point: curve.point(p).label.clone(), order: -v });
            }
            m.set(i, j, curve.residue(&w, p));
        }
    }
    Ok(m)
}

/// A bundle over `X × Spec S` for an artinian base ring `S`, optionally with
/// connection matrices `𝔄_α` and their pole divisor.
#[derive(Clone, Debug)]
pub struct FamilyBundle {
    frames: Arc<Frames>,
    connection: Option<(PoleProfile, Vec<PMat>)>,
}

impl FamilyBundle {
    /// Shapes and invertibility are checked; the cocycle congruences are not
    /// assumed (see [`validate_family`]).
    pub fn new(covering: &Covering, ring: &BaseRing, g: BTreeMap<(usize, usize), PMat>) -> Result<Self, BundleError> {
        let rank = g.values().next().map(|m| m.rows()).ok_or_else(|| BundleError::Shape("no transition matrices".into()))?;
        let frames = Frames::new(covering, ring, rank, g)?;
        Ok(FamilyBundle { frames: Arc::new(frames), connection: None })
    }

    pub fn with_connection(mut self, divisor: PoleProfile, a: Vec<PMat>) -> Result<Self, BundleError> {
        let r = self.rank();
        if a.len() != self.covering().len() || a.iter().any(|m| m.rows() != r || m.cols() != r || m.ring() != self.ring()) {
            return Err(BundleError::Shape(format!("need one {r}x{r} matrix over {} per chart", self.ring().render())));
        }
        self.connection = Some((divisor, a));
        Ok(self)
    }

    pub fn frames(&self) -> &Arc<Frames> {
        &self.frames
    }

    pub fn ring(&self) -> &BaseRing {
        self.frames.ring()
    }

    pub fn covering(&self) -> &Covering {
        self.frames.covering()
    }

    pub fn curve(&self) -> &CurveModel {
        self.frames.curve()
    }

    pub fn rank(&self) -> usize {
        self.frames.rank()
    }

    pub fn order(&self) -> u32 {
        self.ring().order()
    }

    pub fn transition(&self, a: usize, b: usize) -> PMat {
        self.frames.transition(a, b)
    }

    pub fn connection(&self) -> Option<(&PoleProfile, &[PMat])> {
        self.connection.as_ref().map(|(d, a)| (d, a.as_slice()))
    }

    /// The fibre over the closed point.
    pub fn central(&self) -> Result<Bundle, BundleError> {
        let g = self.frames.stored().iter().map(|(k, m)| (*k, m.central().clone())).collect();
        Bundle::new(self.covering(), g)
    }

    pub fn central_connection(&self) -> Result<Option<Connection>, BundleError> {
        let Some((d, a)) = &self.connection else { return Ok(None) };
        let b = self.central()?;
        Ok(Some(Connection::new(&b, d.clone(), a.iter().map(|m| m.central().clone()).collect())?))
    }
}

pub fn restrict_family(fb: &FamilyBundle, j: u32) -> Result<FamilyBundle, BundleError> {
    if j > fb.order() {
        return Err(BundleError::Precondition(format!("cannot restrict an order-{} family to order {j}", fb.order())));
    }
    let frames = fb.frames.restrict(j);
    let ring = frames.ring().clone();
    let connection = fb.connection.as_ref().map(|(d, a)| (d.clone(), a.iter().map(|m| m.restrict(&ring)).collect()));
    Ok(FamilyBundle { frames: Arc::new(frames), connection })
}

/// Cocycle congruences, and the connection transition law when present,
/// checked exactly in the base ring.
pub fn validate_family(fb: &FamilyBundle) -> Report {
    let mut r = Report::new();
    let cov = fb.covering();
    for t in cov.tuples(2) {
        let (a, b, c) = (t[0], t[1], t[2]);
        let diff = fb.transition(a, b).mul(&fb.transition(b, c)).sub(&fb.transition(a, c));
        r.push(format!("G_{a}{b} G_{b}{c} G_{c}{a} = 1 on {}", cov.label(&t)), diff.is_zero(), residue_degree(&diff));
    }
    for t in cov.tuples(1) {
        let (a, b) = (t[0], t[1]);
        let g = fb.transition(a, b);
        let prod = g.mul(&fb.transition(b, a));
        let one = PMat::identity(fb.curve(), fb.ring(), fb.rank());
        let d = prod.sub(&one);
        r.push(format!("G_{a}{b} G_{b}{a} = 1 on {}", cov.label(&t)), d.is_zero(), residue_degree(&d));
        if let Some((_, am)) = &fb.connection {
            let k = g.d().sub(&g.mul(&am[b])).add(&am[a].mul(&g));
            r.push(format!("dG_{a}{b} = G_{a}{b} A_{b} - A_{a} G_{a}{b} on {}", cov.label(&t)), k.is_zero(), residue_degree(&k));
        }
    }
    if let Some((d, am)) = &fb.connection {
        let curve = fb.curve();
        for (i, a) in am.iter().enumerate() {
            let mut bad = Vec::new();
            for term in a.terms() {
                for e in term.entries().iter().filter(|e| !e.is_zero()) {
                    let w = Differential::new(e.clone());
                    for p in curve.point_ids().filter(|&p| cov.chart(i).contains(p)) {
                        let v = curve.differential_valuation(&w, p).expect("nonzero");
                        if v < -i64::from(d.order(p)) {
                            bad.push(format!("ord_{} = {v}", curve.point(p).label));
                        }
                    }
                }
            }
            bad.dedup();
            r.push(format!("A_{i} has poles bounded by D on {}", cov.chart(i).label(curve)), bad.is_empty(), bad.join("; "));
        }
    }
    r
}

#[cfg(test)]
mod tests;
