//! Finite-dimensional spaces of functions and differentials regular on a
//! region of the curve, with bounded poles at marked points.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;

use crate::arith::{Rational, UniPoly};
use crate::curve::{CurveError, CurveModel, Differential, FFElement, Laurent, LocalFrame, PointClass, PointId};
use crate::linalg::{filtration_basis, BasisCoords, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SectionError {
    #[error("section violates ord_{point} >= {bound} (found {found})")]
    Membership { point: String, bound: i64, found: i64 },
    #[error("section has poles outside the spanning set of the space")]
    OutsideSpan,
    #[error("profile is not pointwise smaller at {0}")]
    NotTighter(String),
    #[error("section space dimension did not stabilize below the bound ceiling")]
    Unstable,
    #[error("unknown or unmarked point {0}")]
    UnknownPoint(String),
    #[error("kind mismatch: expected {0}")]
    KindMismatch(&'static str),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// The part of the curve obtained by deleting a set of marked points.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChartSpec {
    removed: BTreeSet<PointId>,
}

impl ChartSpec {
    pub fn new(removed: impl IntoIterator<Item = PointId>) -> Self {
        ChartSpec { removed: removed.into_iter().collect() }
    }

    /// The whole curve; used for global sections.
    pub fn whole() -> Self {
        ChartSpec { removed: BTreeSet::new() }
    }

    pub fn removed(&self) -> &BTreeSet<PointId> {
        &self.removed
    }

    pub fn contains(&self, p: PointId) -> bool {
        !self.removed.contains(&p)
    }

    pub fn intersect(&self, o: &ChartSpec) -> ChartSpec {
        ChartSpec { removed: self.removed.union(&o.removed).cloned().collect() }
    }

    pub fn label(&self, curve: &CurveModel) -> String {
        if self.removed.is_empty() {
            return "X".to_string();
        }
        let r: Vec<&str> = self.removed.iter().map(|&p| curve.point(p).label.as_str()).collect();
        format!("X\\{{{}}}", r.join(","))
    }
}

/// Allowed pole orders at marked points; absent points require regularity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PoleProfile {
    orders: BTreeMap<PointId, u32>,
}

impl PoleProfile {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_orders(orders: impl IntoIterator<Item = (PointId, u32)>) -> Self {
        PoleProfile { orders: orders.into_iter().filter(|(_, o)| *o > 0).collect() }
    }

    pub fn order(&self, p: PointId) -> u32 {
        self.orders.get(&p).copied().unwrap_or(0)
    }

    pub fn orders(&self) -> &BTreeMap<PointId, u32> {
        &self.orders
    }

    pub fn total(&self) -> u32 {
        self.orders.values().sum()
    }

    pub fn max_order(&self) -> u32 {
        self.orders.values().copied().max().unwrap_or(0)
    }

    pub fn is_le(&self, o: &PoleProfile) -> Option<PointId> {
        self.orders.iter().find(|(p, v)| **v > o.order(**p)).map(|(p, _)| *p)
    }

    pub fn render(&self, curve: &CurveModel) -> String {
        if self.orders.is_empty() {
            return "0".to_string();
        }
        let v: Vec<String> = self
            .orders
            .iter()
            .map(|(p, o)| if *o == 1 { curve.point(*p).label.clone() } else { format!("{}*{}", o, curve.point(*p).label) })
            .collect();
        v.join(" + ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Function,
    Differential,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Function => write!(f, "function"),
            Kind::Differential => write!(f, "differential"),
        }
    }
}

/// Order of the base differential (`dx/y` or `dz`) at a point.
pub(crate) fn base_order(curve: &CurveModel, p: PointId) -> i64 {
    if !curve.is_elliptic() && curve.class(p) == PointClass::Infinity {
        -2
    } else {
        0
    }
}

/// The coefficient of a section: the function itself or the `dx` coefficient.
pub(crate) fn section_base(curve: &CurveModel, kind: Kind) -> FFElement {
    match kind {
        Kind::Function => curve.one(),
        Kind::Differential => Differential::base(curve).coeff().clone(),
    }
}

/// Spanning coefficients (see [`section_base`]) for sections with
/// `ord_P >= -bounds[P]` at every marked point and regular elsewhere: the
/// elements `x^k b0 / Q` (`k < np`) then `x^k y b0 / Q` (`k < nq`).
#[derive(Clone, Debug)]
pub(crate) struct Spanning {
    pub den: Vec<u32>,
    pub np: usize,
    pub nq: usize,
    pub elems: Vec<FFElement>,
}

impl Spanning {
    pub fn new(curve: &CurveModel, bounds: &[i64], kind: Kind) -> Self {
        let fb: Vec<i64> = curve.point_ids().map(|p| bounds[p] + if kind == Kind::Differential { base_order(curve, p) } else { 0 }).collect();
        let mut den = vec![0u32; curve.support().len()];
        for p in curve.point_ids() {
            let Some(i) = curve.support_index(p) else { continue };
            let need = match curve.class(p) {
                PointClass::TwoTorsion => (fb[p].max(0) + 1) / 2,
                _ => fb[p].max(0),
            };
            den[i] = den[i].max(need as u32);
        }
        let dq: i64 = den.iter().map(|&e| i64::from(e)).sum();
        let m = fb[curve.infinity()] + if curve.is_elliptic() { 2 * dq } else { dq };
        let (np, nq) = match (m < 0, curve.is_elliptic()) {
            (true, _) => (0, 0),
            (false, true) => ((m / 2 + 1) as usize, if m >= 3 { ((m - 3) / 2 + 1) as usize } else { 0 }),
            (false, false) => ((m + 1) as usize, 0),
        };
        let b0 = section_base(curve, kind);
        let one = Rational::from_integer(1.into());
        let mut elems = Vec::with_capacity(np + nq);
        for k in 0..np {
            elems.push(FFElement::from_parts(curve, UniPoly::monomial(one.clone(), k), UniPoly::zero(), Some(den.clone())).mul(&b0));
        }
        for k in 0..nq {
            elems.push(FFElement::from_parts(curve, UniPoly::zero(), UniPoly::monomial(one.clone(), k), Some(den.clone())).mul(&b0));
        }
        Spanning { den, np, nq, elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    /// Coefficients of `s` along the spanning elements, if it lies in their span.
    pub fn coords(&self, curve: &CurveModel, kind: Kind, s: &FFElement) -> Option<Vec<Rational>> {
        let b0 = section_base(curve, kind);
        let qd = FFElement::from_parts(curve, UniPoly::one(), UniPoly::zero(), Some(self.den.clone())).inv().ok()?;
        let f = s.div(&b0).ok()?.mul(&qd);
        let (p, q) = f.polynomial_parts()?;
        if p.degree().is_some_and(|d| d >= self.np) || q.degree().is_some_and(|d| d >= self.nq) {
            return None;
        }
        let mut v: Vec<Rational> = (0..self.np).map(|k| p.coeff(k)).collect();
        v.extend((0..self.nq).map(|k| q.coeff(k)));
        Some(v)
    }
}

/// Expansion of a section with coefficient `c` in the local frame.
pub(crate) fn expand_section(frame: &LocalFrame, kind: Kind, c: &FFElement) -> Laurent {
    match kind {
        Kind::Function => frame.expand(c),
        Kind::Differential => frame.expand(c).mul(frame.dx()),
    }
}

/// Expansions at `p` of all `elems`, each known through `u^upto`.
pub(crate) fn expansions_at(curve: &CurveModel, p: PointId, kind: Kind, elems: &[FFElement], upto: i64) -> Vec<Laurent> {
    let mut w = 16i64;
    loop {
        let fr = curve.local_frame(p, w);
        let ex: Vec<Laurent> = elems.iter().map(|e| expand_section(&fr, kind, e)).collect();
        if ex.iter().all(|s| s.precision() > upto) {
            return ex;
        }
        w *= 2;
    }
}

/// Rows `[coefficient of u^k in elems[j]]` for `k < -bound`, i.e. the linear
/// conditions for `ord_p >= -bound`.
pub(crate) fn pole_conditions(curve: &CurveModel, p: PointId, kind: Kind, elems: &[FFElement], bound: i64) -> Vec<Vec<Rational>> {
    let upto = -bound - 1;
    let ex = expansions_at(curve, p, kind, elems, upto);
    let lo = ex.iter().filter_map(|s| s.valuation()).min().unwrap_or(upto + 1);
    (lo..=upto).map(|k| ex.iter().map(|s| s.coeff(k).unwrap()).collect()).filter(|r: &Vec<Rational>| r.iter().any(|v| !v.is_zero())).collect()
}

/// Pole bounds per point for a region: the profile on the region, `n` at
/// removed points.
pub(crate) fn region_bounds(curve: &CurveModel, chart: &ChartSpec, profile: &PoleProfile, n: i64) -> Vec<i64> {
    curve.point_ids().map(|p| if chart.contains(p) { i64::from(profile.order(p)) } else { n }).collect()
}

/// A basis of sections over a region, with pole bound `n` at removed points.
#[derive(Clone, Debug)]
pub struct SectionSpace {
    curve: CurveModel,
    chart: ChartSpec,
    profile: PoleProfile,
    kind: Kind,
    bound: i64,
    spanning: Spanning,
    coords: BasisCoords<Rational>,
    basis: Vec<FFElement>,
    levels: Vec<u32>,
}

pub fn default_bound(curve: &CurveModel, profile: &PoleProfile) -> i64 {
    i64::from(profile.total() + 4 * curve.genus() + 4)
}

impl SectionSpace {
    /// Build with the default internal bound.
    pub fn build(curve: &CurveModel, chart: &ChartSpec, profile: &PoleProfile, kind: Kind) -> Result<Self, SectionError> {
        Self::with_bound(curve, chart, profile, kind, default_bound(curve, profile))
    }

    pub fn with_bound(curve: &CurveModel, chart: &ChartSpec, profile: &PoleProfile, kind: Kind, n: i64) -> Result<Self, SectionError> {
        for p in profile.orders().keys().chain(chart.removed()) {
            if *p >= curve.points().len() {
                return Err(SectionError::UnknownPoint(p.to_string()));
            }
        }
        let bounds = region_bounds(curve, chart, profile, n);
        let spanning = Spanning::new(curve, &bounds, kind);
        let k = spanning.len();
        let mut rows = Vec::new();
        for p in curve.point_ids() {
            rows.extend(pole_conditions(curve, p, kind, &spanning.elems, bounds[p]));
        }
        let cm = Matrix::from_rows(k, rows);
        let kernel = cm.kernel();
        // level: pole order at removed points
        let mut values: Vec<Vec<Rational>> = vec![Vec::new(); kernel.len()];
        let mut levels = Vec::new();
        for &p in chart.removed() {
            let ex = expansions_at(curve, p, kind, &spanning.elems, -1);
            let lo = ex.iter().filter_map(|s| s.valuation()).min().unwrap_or(0);
            for kk in lo..0 {
                let row: Vec<Rational> = ex.iter().map(|s| s.coeff(kk).unwrap()).collect();
                for (vi, kv) in values.iter_mut().zip(&kernel) {
                    vi.push(dot(&row, kv));
                }
                levels.push((-kk) as u32);
            }
        }
        let (vecs, lv) = filtration_basis(&kernel, &values, &levels);
        let basis: Vec<FFElement> = vecs.iter().map(|v| combine(curve, &spanning.elems, v)).collect();
        let coords = BasisCoords::new(k, vecs).expect("kernel basis is independent");
        Ok(SectionSpace { curve: curve.clone(), chart: chart.clone(), profile: profile.clone(), kind, bound: n, spanning, coords, basis, levels: lv })
    }

    pub fn curve(&self) -> &CurveModel {
        &self.curve
    }

    pub fn chart(&self) -> &ChartSpec {
        &self.chart
    }

    pub fn profile(&self) -> &PoleProfile {
        &self.profile
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis coefficients (functions, or `dx`/`dz` coefficients).
    pub fn basis(&self) -> &[FFElement] {
        &self.basis
    }

    pub fn basis_differentials(&self) -> Vec<Differential> {
        self.basis.iter().map(|c| Differential::new(c.clone())).collect()
    }

    /// Pole order at removed points of each basis element.
    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn element(&self, c: &[Rational]) -> FFElement {
        combine(&self.curve, &self.basis, c)
    }

    /// Coordinates of a section given by its coefficient.
    pub fn coords(&self, s: &FFElement) -> Result<Vec<Rational>, SectionError> {
        if s.is_zero() {
            return Ok(vec![Rational::zero(); self.dim()]);
        }
        let bounds = region_bounds(&self.curve, &self.chart, &self.profile, self.bound);
        for p in self.curve.point_ids() {
            let v = match self.kind {
                Kind::Function => self.curve.valuation(s, p)?,
                Kind::Differential => self.curve.differential_valuation(&Differential::new(s.clone()), p)?,
            };
            if v < -bounds[p] {
                return Err(SectionError::Membership { point: self.curve.point(p).label.clone(), bound: -bounds[p], found: v });
            }
        }
        let sc = self.spanning_coords(s).ok_or(SectionError::OutsideSpan)?;
        self.coords.coords(&sc).ok_or(SectionError::OutsideSpan)
    }

    pub fn coords_differential(&self, w: &Differential) -> Result<Vec<Rational>, SectionError> {
        if self.kind != Kind::Differential {
            return Err(SectionError::KindMismatch("differential"));
        }
        self.coords(w.coeff())
    }

    fn spanning_coords(&self, s: &FFElement) -> Option<Vec<Rational>> {
        self.spanning.coords(&self.curve, self.kind, s)
    }

    /// Subspace with tighter pole orders at region points, and its inclusion.
    pub fn cap_pole_bound(&self, tighter: &PoleProfile) -> Result<(Matrix<Rational>, SectionSpace), SectionError> {
        if let Some(p) = tighter.is_le(&self.profile) {
            return Err(SectionError::NotTighter(self.curve.point(p).label.clone()));
        }
        let sub = SectionSpace::with_bound(&self.curve, &self.chart, tighter, self.kind, self.bound)?;
        let cols: Vec<Vec<Rational>> = sub.basis.iter().map(|b| self.coords(b)).collect::<Result<_, _>>()?;
        Ok((Matrix::from_cols(self.dim(), cols), sub))
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut s = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub(crate) fn combine(curve: &CurveModel, elems: &[FFElement], c: &[Rational]) -> FFElement {
    let mut acc = curve.zero();
    for (e, a) in elems.iter().zip(c) {
        if !a.is_zero() {
            acc = acc.add(&e.scale(a));
        }
    }
    acc
}
