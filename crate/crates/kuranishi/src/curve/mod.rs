//! The projective line and Legendre elliptic curves: function-field
//! arithmetic, valuations, differentials and local expansions at marked points.

mod element;
mod laurent;
mod local;

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::arith::{qi, render_rational, Rational, UniPoly};

pub use element::{Differential, FFElement};
pub use laurent::Laurent;
pub use local::LocalFrame;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("invalid curve parameter: {0}")]
    InvalidParameter(String),
    #[error("point {0} does not lie on the curve")]
    NotOnCurve(String),
    #[error("marked points {0} and {1} coincide")]
    DuplicatePoint(String, String),
    #[error("label {0} is used twice")]
    DuplicateLabel(String),
    #[error("unknown marked point {0}")]
    UnknownPoint(String),
    #[error("denominator {0} has roots outside the marked points")]
    Support(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("valuation of zero is undefined")]
    ZeroValuation,
    #[error("elements belong to different curves")]
    CurveMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveKind {
    ProjectiveLine,
    LegendreElliptic { lambda: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Infinity,
    /// `y` is `None` on the projective line.
    Finite { x: Rational, y: Option<Rational> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedPoint {
    pub label: String,
    pub location: Location,
}

impl MarkedPoint {
    pub fn infinity(label: &str) -> Self {
        MarkedPoint { label: label.to_string(), location: Location::Infinity }
    }

    /// A point of the projective line with coordinate `z`.
    pub fn line(label: &str, z: Rational) -> Self {
        MarkedPoint { label: label.to_string(), location: Location::Finite { x: z, y: None } }
    }

    /// An affine point `(x, y)` of an elliptic curve.
    pub fn affine(label: &str, x: Rational, y: Rational) -> Self {
        MarkedPoint { label: label.to_string(), location: Location::Finite { x, y: Some(y) } }
    }

    pub fn x(&self) -> Option<&Rational> {
        match &self.location {
            Location::Infinity => None,
            Location::Finite { x, .. } => Some(x),
        }
    }

    pub fn describe(&self) -> String {
        match &self.location {
            Location::Infinity => "inf".to_string(),
            Location::Finite { x, y: None } => render_rational(x),
            Location::Finite { x, y: Some(y) } => format!("({}, {})", render_rational(x), render_rational(y)),
        }
    }
}

/// How the uniformizer at a point is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PointClass {
    Infinity,
    /// `x - a` (or `z - a`).
    Ordinary,
    /// `y` at a root of the cubic.
    TwoTorsion,
}

pub type PointId = usize;

#[derive(Debug, PartialEq, Eq)]
struct CurveData {
    kind: CurveKind,
    points: Vec<MarkedPoint>,
    classes: Vec<PointClass>,
    /// distinct finite x-coordinates, ascending
    support: Vec<Rational>,
    support_of: Vec<Option<usize>>,
    cubic: UniPoly,
}

/// A curve with its marked points. Cheap to clone; elements keep a handle.
#[derive(Clone)]
pub struct CurveModel(Arc<CurveData>);

impl PartialEq for CurveModel {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || self.0 == o.0
    }
}

impl Eq for CurveModel {}

impl fmt::Debug for CurveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

fn fresh_label(base: &str, taken: &[MarkedPoint]) -> String {
    if !taken.iter().any(|p| p.label == base) {
        return base.to_string();
    }
    (2..).map(|i| format!("{base}_{i}")).find(|l| !taken.iter().any(|p| &p.label == l)).unwrap()
}

fn push_auto(points: &mut Vec<MarkedPoint>, base: &str, location: Location) {
    if points.iter().any(|p| p.location == location) {
        return;
    }
    let label = fresh_label(base, points);
    points.push(MarkedPoint { label, location });
}

impl CurveModel {
    /// The projective line; `∞` is added when not listed.
    pub fn projective_line(points: Vec<MarkedPoint>) -> Result<Self, CurveError> {
        let mut pts = points;
        for p in &pts {
            if let Location::Finite { y: Some(_), .. } = p.location {
                return Err(CurveError::NotOnCurve(p.label.clone()));
            }
        }
        push_auto(&mut pts, "inf", Location::Infinity);
        Self::build(CurveKind::ProjectiveLine, pts)
    }

    /// `y^2 = x(x-1)(x-λ)`. The origin, `∞`, the other two 2-torsion points and
    /// the conjugate `(a, -b)` of every listed affine point are always marked.
    pub fn legendre(lambda: Rational, points: Vec<MarkedPoint>) -> Result<Self, CurveError> {
        if lambda.is_zero() || lambda.is_one() {
            return Err(CurveError::InvalidParameter(format!("lambda = {}", render_rational(&lambda))));
        }
        let cubic = elliptic_cubic(&lambda);
        let mut pts = points;
        for p in &pts {
            match &p.location {
                Location::Infinity => {}
                Location::Finite { y: None, .. } => return Err(CurveError::NotOnCurve(p.label.clone())),
                Location::Finite { x, y: Some(y) } => {
                    if cubic.eval(x) != y * y {
                        return Err(CurveError::NotOnCurve(p.label.clone()));
                    }
                }
            }
        }
        let zero = Rational::zero();
        push_auto(&mut pts, "p0", Location::Finite { x: zero.clone(), y: Some(zero.clone()) });
        push_auto(&mut pts, "inf", Location::Infinity);
        push_auto(&mut pts, "p1", Location::Finite { x: Rational::one(), y: Some(zero.clone()) });
        push_auto(&mut pts, "plam", Location::Finite { x: lambda.clone(), y: Some(zero.clone()) });
        let listed = pts.clone();
        for p in &listed {
            if let Location::Finite { x, y: Some(y) } = &p.location {
                if !y.is_zero() {
                    let base = format!("{}'", p.label);
                    push_auto(&mut pts, &base, Location::Finite { x: x.clone(), y: Some(-y.clone()) });
                }
            }
        }
        Self::build(CurveKind::LegendreElliptic { lambda }, pts)
    }

    /// Default elliptic curve used throughout the examples: λ = 2.
    pub fn default_elliptic() -> Self {
        Self::legendre(qi(2), Vec::new()).expect("valid parameter")
    }

    fn build(kind: CurveKind, points: Vec<MarkedPoint>) -> Result<Self, CurveError> {
        for (i, p) in points.iter().enumerate() {
            for q in &points[..i] {
                if q.label == p.label {
                    return Err(CurveError::DuplicateLabel(p.label.clone()));
                }
                if q.location == p.location {
                    return Err(CurveError::DuplicatePoint(q.label.clone(), p.label.clone()));
                }
            }
        }
        let cubic = match &kind {
            CurveKind::ProjectiveLine => UniPoly::zero(),
            CurveKind::LegendreElliptic { lambda } => elliptic_cubic(lambda),
        };
        let mut support: Vec<Rational> = points.iter().filter_map(|p| p.x().cloned()).collect();
        support.sort();
        support.dedup();
        let support_of = points.iter().map(|p| p.x().map(|x| support.iter().position(|c| c == x).unwrap())).collect();
        let classes = points
            .iter()
            .map(|p| match (&kind, &p.location) {
                (_, Location::Infinity) => PointClass::Infinity,
                (CurveKind::LegendreElliptic { .. }, Location::Finite { y: Some(y), .. }) if y.is_zero() => PointClass::TwoTorsion,
                _ => PointClass::Ordinary,
            })
            .collect();
        Ok(CurveModel(Arc::new(CurveData { kind, points, classes, support, support_of, cubic })))
    }

    pub fn kind(&self) -> &CurveKind {
        &self.0.kind
    }

    pub fn is_elliptic(&self) -> bool {
        matches!(self.0.kind, CurveKind::LegendreElliptic { .. })
    }

    pub fn lambda(&self) -> Option<&Rational> {
        match &self.0.kind {
            CurveKind::LegendreElliptic { lambda } => Some(lambda),
            CurveKind::ProjectiveLine => None,
        }
    }

    pub fn genus(&self) -> u32 {
        if self.is_elliptic() {
            1
        } else {
            0
        }
    }

    /// Name of the affine coordinate: `z` on the line, `x` on the elliptic curve.
    pub fn coord_name(&self) -> &'static str {
        if self.is_elliptic() {
            "x"
        } else {
            "z"
        }
    }

    pub fn points(&self) -> &[MarkedPoint] {
        &self.0.points
    }

    pub fn point(&self, id: PointId) -> &MarkedPoint {
        &self.0.points[id]
    }

    pub fn point_ids(&self) -> std::ops::Range<PointId> {
        0..self.0.points.len()
    }

    pub fn find(&self, label: &str) -> Result<PointId, CurveError> {
        self.0.points.iter().position(|p| p.label == label).ok_or_else(|| CurveError::UnknownPoint(label.to_string()))
    }

    pub fn find_location(&self, loc: &Location) -> Option<PointId> {
        self.0.points.iter().position(|p| &p.location == loc)
    }

    pub fn infinity(&self) -> PointId {
        self.find_location(&Location::Infinity).expect("infinity is always marked")
    }

    pub(crate) fn class(&self, id: PointId) -> PointClass {
        self.0.classes[id]
    }

    pub(crate) fn support(&self) -> &[Rational] {
        &self.0.support
    }

    pub(crate) fn support_index(&self, id: PointId) -> Option<usize> {
        self.0.support_of[id]
    }

    pub(crate) fn cubic(&self) -> &UniPoly {
        &self.0.cubic
    }

    pub fn describe(&self) -> String {
        let pts: Vec<String> = self.0.points.iter().map(|p| format!("{}={}", p.label, p.describe())).collect();
        match &self.0.kind {
            CurveKind::ProjectiveLine => format!("P1 [{}]", pts.join(", ")),
            CurveKind::LegendreElliptic { lambda } => format!("y^2 = x(x-1)(x-{}) [{}]", render_rational(lambda), pts.join(", ")),
        }
    }

    // element constructors

    pub fn zero(&self) -> FFElement {
        FFElement::zero(self)
    }

    pub fn one(&self) -> FFElement {
        FFElement::constant(self, Rational::one())
    }

    pub fn constant(&self, c: Rational) -> FFElement {
        FFElement::constant(self, c)
    }

    /// The affine coordinate (`x` or `z`).
    pub fn coord(&self) -> FFElement {
        FFElement::from_parts(self, UniPoly::x(), UniPoly::zero(), None)
    }

    /// `y` on the elliptic curve.
    pub fn y(&self) -> FFElement {
        assert!(self.is_elliptic(), "y exists only on the elliptic curve");
        FFElement::from_parts(self, UniPoly::zero(), UniPoly::one(), None)
    }

    /// `1 / (x - x(P))` style local factor for a finite support coordinate.
    pub fn inverse_factor(&self, c: &Rational) -> Result<FFElement, CurveError> {
        FFElement::from_poly(self, UniPoly::linear_root(c), UniPoly::zero())?.inv()
    }

    pub fn local_frame(&self, p: PointId, working: i64) -> LocalFrame {
        LocalFrame::new(self, p, working)
    }

    /// Expansion in the uniformizer at `p`, known through `u^order`.
    pub fn local_expansion(&self, f: &FFElement, p: PointId, order: i64) -> Laurent {
        let mut w = 12i64;
        loop {
            let fr = self.local_frame(p, w.max(order + 8));
            let s = fr.expand(f);
            if s.precision() > order {
                return s.truncate(order + 1);
            }
            w *= 2;
        }
    }

    /// Expansion of `ω` as a coefficient series of `du`.
    pub fn differential_expansion(&self, w: &Differential, p: PointId, order: i64) -> Laurent {
        let mut prec = 12i64;
        loop {
            let fr = self.local_frame(p, prec.max(order + 8));
            let s = fr.expand_differential(w);
            if s.precision() > order {
                return s.truncate(order + 1);
            }
            prec *= 2;
        }
    }

    pub fn valuation(&self, f: &FFElement, p: PointId) -> Result<i64, CurveError> {
        if f.is_zero() {
            return Err(CurveError::ZeroValuation);
        }
        let mut w = 12i64;
        loop {
            let s = self.local_frame(p, w).expand(f);
            if let Some(v) = s.valuation() {
                return Ok(v);
            }
            w *= 2;
        }
    }

    pub fn differential_valuation(&self, w: &Differential, p: PointId) -> Result<i64, CurveError> {
        if w.is_zero() {
            return Err(CurveError::ZeroValuation);
        }
        let mut prec = 12i64;
        loop {
            let s = self.local_frame(p, prec).expand_differential(w);
            if let Some(v) = s.valuation() {
                return Ok(v);
            }
            prec *= 2;
        }
    }

    /// Coefficient of `u^{-1} du` at `p`.
    pub fn residue(&self, w: &Differential, p: PointId) -> Rational {
        self.differential_expansion(w, p, -1).coeff(-1).unwrap()
    }

    pub fn exterior_d(&self, f: &FFElement) -> Differential {
        f.exterior_d()
    }
}

fn elliptic_cubic(lambda: &Rational) -> UniPoly {
    // x(x-1)(x-λ) = x^3 - (1+λ)x^2 + λx
    UniPoly::from_coeffs(vec![Rational::zero(), lambda.clone(), -(Rational::one() + lambda), Rational::one()])
}

#[cfg(test)]
mod tests;
