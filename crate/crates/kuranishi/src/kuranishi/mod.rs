//! First-order deformations, obstructions and the order-by-order
//! construction of the formal Kuranishi family.
//!
//! A family over `S = Q[t]/(I + m^(K+1))` is written
//! `G_{αβ} = (1 + Σ_μ t^μ h_μ,αβ) g_{αβ}` with `h_μ` in the frame of `α`, and
//! in connection mode `𝔄_α = A_α + Σ_μ t^μ 𝒜_μ,α`. Its defect
//! `((G_{αβ}G_{βγ} - G_{αγ}) g_{αγ}^{-1}, -(dG - G𝔄_β + 𝔄_α G) g_{αβ}^{-1})`
//! is a pair of cochains in `L²` whose linear part in `(h, 𝒜)` is `D`.
//!
//! Order `k+1` works in `S' = Q[t]/((f^(k)) + m^(k+2))`, where the defect of
//! the order-`k` family lies in the degree-`k+1` layer. Each coefficient of
//! the negated defect is split as `Σ c_n σ(ξ_n) + D X`; the `c_n` become the
//! coefficients of `f_{k+1}` and `X` the new terms of the family.
//!
//! The new terms are fixed by a log-normal gauge: the coefficient of
//! `(log(G g^{-1}), 𝔄 - A)` at each new monomial has no component along the
//! cocycles. In rank one this reproduces `g exp(Σ t_i a_i)` exactly.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{Mono, Rational};
use crate::bundle::{validate_family, BaseRing, Bundle, BundleError, Connection, FMat, FamilyBundle, PMat, SheafSpec, Twist};
use crate::cech::{nabla_end, CechError, Classes, HyperComplex, HyperDims, TwoTermComplex};
use crate::report::Report;
use crate::sections::{default_bound, PoleProfile};
use crate::QPoly;


/// Largest truncation order accepted by [`kuranishi`].
pub const MAX_ORDER: u32 = 8;

pub const DEFAULT_ORDER: u32 = 4;

#[derive(Debug, Clone, thiserror::Error)]
pub enum KuranishiError {
    #[error(transparent)]
    Cech(#[from] CechError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("order {0} exceeds the ceiling {MAX_ORDER}")]
    Resource(u32),
    #[error("internal consistency: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bundle,
    Connection,
}

/// A deformation problem: the bundle (and connection) together with the
/// complex computing its tangent and obstruction spaces.
#[derive(Clone, Debug)]
pub struct DeformationProblem {
    mode: Mode,
    bundle: Bundle,
    connection: Option<Connection>,
    classes: Classes,
    // inverse transitions at the closed point, per increasing pair
    ginv: Vec<FMat>,
}

impl DeformationProblem {
    /// Deformations of the bundle alone, `H¹(End E)` and `H²(End E)`.
    pub fn bundle(b: &Bundle, bound: Option<i64>) -> Result<Self, KuranishiError> {
        let k0 = SheafSpec::end(b.frames(), Twist::None);
        let n = bound.unwrap_or_else(|| default_bound(b.curve(), &PoleProfile::empty()));
        let classes = Classes::bundle(&k0, n)?;
        Self::assemble(Mode::Bundle, b.clone(), None, classes)
    }

    /// Deformations of the pair `(E, ∇)` with the pole divisor of `∇` fixed.
    pub fn connection(c: &Connection, bound: Option<i64>) -> Result<Self, KuranishiError> {
        let tc = TwoTermComplex::connection(c);
        let n = bound.unwrap_or_else(|| HyperComplex::default_bound(&tc));
        let classes = Classes::connection(&tc, n)?;
        Self::assemble(Mode::Connection, c.bundle().clone(), Some(c.clone()), classes)
    }

    /// Deformations of `(E, ∇)` inside a subcomplex of the connection
    /// complex, such as the flag-preserving complex of a parabolic connection.
    pub fn with_complex(c: &Connection, tc: &TwoTermComplex, bound: Option<i64>) -> Result<Self, KuranishiError> {
        let n = bound.unwrap_or_else(|| HyperComplex::default_bound(tc));
        let classes = Classes::connection(tc, n)?;
        Self::assemble(Mode::Connection, c.bundle().clone(), Some(c.clone()), classes)
    }

    fn assemble(mode: Mode, bundle: Bundle, connection: Option<Connection>, classes: Classes) -> Result<Self, KuranishiError> {
        let ginv = classes.base().c0().tuples(1).iter().map(|t| bundle.transition(t[0], t[1]).inv()).collect::<Result<_, _>>().map_err(BundleError::from)?;
        Ok(DeformationProblem { mode, bundle, connection, classes, ginv })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn bundle_ref(&self) -> &Bundle {
        &self.bundle
    }

    pub fn connection_ref(&self) -> Option<&Connection> {
        self.connection.as_ref()
    }

    pub fn hyper(&self) -> &HyperComplex {
        self.classes.base()
    }

    pub fn classes(&mut self) -> &mut Classes {
        &mut self.classes
    }

    pub fn dims(&self) -> HyperDims {
        self.hyper().dims()
    }

    pub fn bound(&self) -> i64 {
        self.classes.base_bound()
    }
}

/// A first-order deformation `(a, 𝒜₁)` with its class coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstOrderDatum {
    pub mode: Mode,
    /// On increasing pairs, in the frame of the first chart.
    pub a: Vec<FMat>,
    /// On charts; empty in bundle mode.
    pub connection: Vec<FMat>,
    pub coords: Vec<Rational>,
}

/// One datum per basis vector of `H¹(End E)` or `ℍ¹`, W′ members first.
pub fn classify_first_order(p: &DeformationProblem) -> Vec<FirstOrderDatum> {
    let hc = p.hyper();
    let n = hc.h1_basis().len();
    hc.h1_basis()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let (a, y) = hc.element(1, v);
            let mut coords = vec![Rational::zero(); n];
            coords[i] = Rational::one();
            FirstOrderDatum { mode: p.mode, a, connection: y, coords }
        })
        .collect()
}

/// `ď(a) = 0` and, in connection mode, `ď(𝒜₁) = ∇_End(a)`, checked on the
/// cochains themselves.
pub fn validate_first_order(p: &DeformationProblem, u: &FirstOrderDatum) -> Report {
    let mut r = Report::new();
    let hc = p.hyper();
    let c0 = hc.c0();
    let cov = p.bundle.covering();
    if u.a.len() != c0.tuples(1).len() {
        r.push("a has one matrix per intersection", false, format!("{} given", u.a.len()));
        return r;
    }
    for (t, m) in c0.tuples(2).iter().zip(c0.apply_d(1, &u.a)) {
        r.push(format!("(ďa) = 0 on {}", cov.label(t)), m.is_zero(), "");
    }
    if let (Some(conn), Some(c1)) = (&p.connection, hc.c1()) {
        if u.connection.len() != cov.len() {
            r.push("𝒜₁ has one matrix per chart", false, format!("{} given", u.connection.len()));
            return r;
        }
        let dy = c1.apply_d(0, &u.connection);
        for (s, t) in c0.tuples(1).iter().enumerate() {
            let k = dy[s].sub(&nabla_end(conn, t[0], &u.a[s]));
            r.push(format!("ď𝒜₁ = ∇a on {}", cov.label(t)), k.is_zero(), "");
        }
    }
    r
}

/// `(a + ďh, 𝒜₁ + ∇h)` for a 0-cochain `h` of regular endomorphisms.
pub fn gauge_shift(p: &mut DeformationProblem, u: &FirstOrderDatum, h: &[FMat]) -> Result<FirstOrderDatum, KuranishiError> {
    let c0 = p.hyper().c0().clone();
    if h.len() != p.bundle.covering().len() {
        return Err(KuranishiError::Precondition("gauge needs one matrix per chart".into()));
    }
    p.classes.fit_bound(0, h, &[]).map_err(|e| KuranishiError::Precondition(format!("gauge is not a regular 0-cochain: {e}")))?;
    let dh = c0.apply_d(0, h);
    let a: Vec<FMat> = u.a.iter().zip(&dh).map(|(x, y)| x.add(y)).collect();
    let connection = match &p.connection {
        Some(conn) => u.connection.iter().enumerate().map(|(i, m)| m.add(&nabla_end(conn, i, &h[i]))).collect(),
        None => Vec::new(),
    };
    let coords = p.classes.h1_class(&a, &connection)?;
    Ok(FirstOrderDatum { mode: u.mode, a, connection, coords })
}

/// The first obstruction of a datum: the ℍ² class of the order-2 defect of
/// `(1 + εa) g`, `A + ε𝒜₁`, and an order-2 family when the class vanishes.
#[derive(Clone, Debug)]
pub struct FirstObstruction {
    pub class: Vec<Rational>,
    /// The 2-cocycle `ρ` whose class is reported (`C²K⁰` and `C¹K¹` parts).
    pub cocycle: (Vec<FMat>, Vec<FMat>),
    pub lift: Option<FamilyBundle>,
}

impl FirstObstruction {
    pub fn vanishes(&self) -> bool {
        self.class.iter().all(|c| c.is_zero())
    }
}

pub fn first_obstruction(p: &mut DeformationProblem, u: &FirstOrderDatum) -> Result<FirstObstruction, KuranishiError> {
    let check = validate_first_order(p, u);
    if !check.passed() {
        return Err(KuranishiError::Precondition(format!("not a first-order deformation:\n{}", check.render())));
    }
    let mut ind = Induction::new(p, 1, 2, &[(u.a.clone(), u.connection.clone())]);
    let rho = ind.step()?;
    let class = ind.steps[0].1.iter().map(|f| f.coeff(&Mono(vec![2]))).collect::<Vec<_>>();
    let cocycle = match rho.into_iter().next() {
        Some((_, r)) => r,
        None => zero_cochain(ind.p, 2),
    };
    let lift = if class.iter().all(|c| c.is_zero()) {
        let ring = BaseRing::with_names(1, 2, &[], vec!["ε".into()]);
        Some(ind.family(&ring)?)
    } else {
        None
    };
    Ok(FirstObstruction { class, cocycle, lift })
}

fn zero_cochain(p: &DeformationProblem, deg: usize) -> (Vec<FMat>, Vec<FMat>) {
    p.hyper().element(deg, &vec![Rational::zero(); p.hyper().ldim(deg)])
}

/// The obstruction power series `f = Σ_k f_k`, one polynomial per ℍ²
/// coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionSeries {
    pub names: Vec<String>,
    /// `(k, f_k)` for `k = 2..K`; each `f_k` is homogeneous of degree `k`.
    pub degrees: Vec<(u32, Vec<QPoly>)>,
}

impl ObstructionSeries {
    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn h2_dim(&self) -> usize {
        self.degrees.first().map_or(0, |(_, f)| f.len())
    }

    pub fn part(&self, k: u32) -> Option<&[QPoly]> {
        self.degrees.iter().find(|(d, _)| *d == k).map(|(_, f)| f.as_slice())
    }

    /// `f = Σ_k f_k` per ℍ² coordinate.
    pub fn total(&self) -> Vec<QPoly> {
        let mut acc: Vec<QPoly> = Vec::new();
        for (_, f) in &self.degrees {
            if acc.is_empty() {
                acc = f.clone();
                continue;
            }
            for (a, b) in acc.iter_mut().zip(f) {
                *a = a.add(b).expect("same shape");
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.degrees.iter().all(|(_, f)| f.iter().all(|p| p.is_zero()))
    }

    /// One line per ℍ² coordinate, `f_n = ...`.
    pub fn render(&self) -> Vec<String> {
        self.total().iter().enumerate().map(|(n, f)| format!("f_{} = {}", n + 1, f.render(&self.names))).collect()
    }
}

/// Output of [`kuranishi`].
#[derive(Clone, Debug)]
pub struct KuranishiResult {
    pub mode: Mode,
    pub order: u32,
    pub dims: HyperDims,
    pub basis: Vec<FirstOrderDatum>,
    pub series: ObstructionSeries,
    /// `G^(K)` and, in connection mode, `𝔄^(K)` over `Q[t]/(I + m^(K+1))`.
    pub family: FamilyBundle,
    /// Raw coefficients `(h_μ, 𝒜_μ)` of the family, before reduction.
    pub terms: BTreeMap<Mono, (Vec<FMat>, Vec<FMat>)>,
    pub verification: Report,
}

impl KuranishiResult {
    pub fn n_prime(&self) -> usize {
        self.dims.w_prime
    }

    pub fn n_second(&self) -> usize {
        self.dims.w_second
    }

    pub fn nvars(&self) -> usize {
        self.basis.len()
    }
}

/// Exact congruences of the family modulo `I + m^(K+1)`.
pub fn verify_family(kr: &KuranishiResult) -> Report {
    let mut r = validate_family(&kr.family);
    let ring = kr.family.ring();
    let mut bad = Vec::new();
    for (n, f) in kr.series.total().iter().enumerate() {
        if ring.nf(f).iter().any(|c| !c.is_zero()) {
            bad.push(format!("f_{}", n + 1));
        }
    }
    r.push("obstruction polynomials vanish in the base ring", bad.is_empty(), bad.join(", "));
    r
}

/// The formal Kuranishi family to order `K`.
pub fn kuranishi(p: &mut DeformationProblem, order: u32) -> Result<KuranishiResult, KuranishiError> {
    if order < 2 {
        return Err(KuranishiError::Precondition(format!("order must be at least 2, got {order}")));
    }
    if order > MAX_ORDER {
        return Err(KuranishiError::Resource(order));
    }
    let basis = classify_first_order(p);
    let first: Vec<_> = basis.iter().map(|u| (u.a.clone(), u.connection.clone())).collect();
    let nvars = basis.len();
    let mut ind = Induction::new(p, nvars, order, &first);
    for _ in 2..=order {
        ind.step()?;
    }
    let ring = BaseRing::quotient(nvars, order, &ind.gens);
    let family = ind.family(&ring)?;
    let series = ObstructionSeries { names: ring.names().to_vec(), degrees: ind.steps.clone() };
    let terms = ind.terms.clone();
    let mut kr = KuranishiResult { mode: p.mode, order, dims: p.dims(), basis, series, family, terms, verification: Report::new() };
    kr.verification = verify_family(&kr);
    if !kr.verification.passed() {
        return Err(KuranishiError::Internal(format!("family fails its congruences:\n{}", kr.verification.render())));
    }
    Ok(kr)
}

/// Convenience entry point: connection mode when `conn` is given.
pub fn kuranishi_for(b: &Bundle, conn: Option<&Connection>, order: u32, bound: Option<i64>) -> Result<KuranishiResult, KuranishiError> {
    let mut p = match conn {
        Some(c) => DeformationProblem::connection(c, bound)?,
        None => DeformationProblem::bundle(b, bound)?,
    };
    kuranishi(&mut p, order)
}

type Pair = (Vec<FMat>, Vec<FMat>);

struct Induction<'a> {
    p: &'a mut DeformationProblem,
    nvars: usize,
    order: u32,
    done: u32,
    terms: BTreeMap<Mono, Pair>,
    gens: Vec<QPoly>,
    steps: Vec<(u32, Vec<QPoly>)>,
}

impl<'a> Induction<'a> {
    fn new(p: &'a mut DeformationProblem, nvars: usize, order: u32, first: &[Pair]) -> Self {
        let h2 = p.dims().h2;
        let mut terms = BTreeMap::new();
        for (i, u) in first.iter().enumerate() {
            terms.insert(Mono::var(nvars, i), u.clone());
        }
        Induction { p, nvars, order, done: 1, terms, gens: vec![QPoly::zero(nvars, order); h2], steps: Vec::new() }
    }

    fn curve(&self) -> crate::curve::CurveModel {
        self.p.bundle.curve().clone()
    }

    /// `(1 + Σ t^μ h_μ)` on pairs and `𝔄` on charts, reduced into `ring`.
    fn pmats(&self, ring: &BaseRing) -> (Vec<PMat>, Option<Vec<PMat>>) {
        let curve = self.curve();
        let r = self.p.bundle.rank();
        let pairs = self.p.hyper().c0().tuples(1).len();
        let h = (0..pairs)
            .map(|s| {
                let it = std::iter::once((Mono::one(self.nvars), FMat::identity(&curve, r))).chain(self.terms.iter().map(|(m, (x, _))| (m.clone(), x[s].clone())));
                PMat::from_terms(&curve, ring, r, r, it)
            })
            .collect();
        let a = self.p.connection.as_ref().map(|conn| {
            (0..conn.matrices().len())
                .map(|c| {
                    let it = std::iter::once((Mono::one(self.nvars), conn.matrix(c).clone())).chain(self.terms.iter().filter(|(_, (_, y))| !y.is_empty()).map(|(m, (_, y))| (m.clone(), y[c].clone())));
                    PMat::from_terms(&curve, ring, r, r, it)
                })
                .collect()
        });
        (h, a)
    }

    fn transitions(&self, ring: &BaseRing) -> (Vec<PMat>, Option<Vec<PMat>>) {
        let (h, a) = self.pmats(ring);
        let tuples = self.p.hyper().c0().tuples(1).to_vec();
        let g = h.iter().zip(&tuples).map(|(m, t)| m.mul_fmat(&self.p.bundle.transition(t[0], t[1]))).collect();
        (g, a)
    }

    /// The defect as `L²` cochains over `ring`.
    fn defect(&self, ring: &BaseRing) -> (Vec<PMat>, Vec<PMat>) {
        let (g, a) = self.transitions(ring);
        let c0 = self.p.hyper().c0();
        let pair = |i: usize, j: usize| c0.tuple_index(1, &[i, j]).expect("increasing pair");
        let phi = c0
            .tuples(2)
            .iter()
            .map(|t| {
                let (ab, bc, ac) = (pair(t[0], t[1]), pair(t[1], t[2]), pair(t[0], t[2]));
                g[ab].mul(&g[bc]).sub(&g[ac]).mul_fmat(&self.p.ginv[ac])
            })
            .collect();
        let psi = match a {
            Some(a) => c0
                .tuples(1)
                .iter()
                .enumerate()
                .map(|(s, t)| {
                    let gs = &g[s];
                    gs.d().sub(&gs.mul(&a[t[1]])).add(&a[t[0]].mul(gs)).mul_fmat(&self.p.ginv[s]).neg()
                })
                .collect(),
            None => Vec::new(),
        };
        (phi, psi)
    }

    /// Extend from order `done` to `done + 1`; returns the negated defect
    /// coefficient at each new monomial.
    fn step(&mut self) -> Result<Vec<(Mono, Pair)>, KuranishiError> {
        let k = self.done + 1;
        let ring = BaseRing::quotient(self.nvars, k, &self.gens);
        let (phi, psi) = self.defect(&ring);
        for i in (0..ring.dim()).filter(|&i| ring.degree(i) < k) {
            if phi.iter().chain(&psi).any(|m| !m.term(i).is_zero()) {
                return Err(KuranishiError::Internal(format!("order-{} family violates its congruences at {}", k - 1, ring.monos()[i].render(ring.names()))));
            }
        }
        let h2 = self.gens.len();
        let mut fk = vec![QPoly::zero(self.nvars, self.order); h2];
        let mut rhos = Vec::new();
        let layer: Vec<usize> = (0..ring.dim()).filter(|&i| ring.degree(i) == k).collect();
        for &i in &layer {
            let mono = ring.monos()[i].clone();
            let rx: Vec<FMat> = phi.iter().map(|m| m.term(i).neg()).collect();
            let ry: Vec<FMat> = psi.iter().map(|m| m.term(i).neg()).collect();
            let (c, (x, y)) = if rx.iter().chain(&ry).all(|m| m.is_zero()) {
                (vec![Rational::zero(); h2], zero_cochain(self.p, 1))
            } else {
                self.p.classes.h2_class(&rx, &ry)?
            };
            for (f, cn) in fk.iter_mut().zip(&c) {
                f.add_term(mono.clone(), cn.clone());
            }
            self.terms.insert(mono.clone(), (x, y));
            rhos.push((mono, (rx, ry)));
        }
        self.normalize(k, &layer, &ring)?;
        for (g, f) in self.gens.iter_mut().zip(&fk) {
            *g = g.add(f).expect("same shape");
        }
        self.steps.push((k, fk));
        self.done = k;
        Ok(rhos)
    }

    /// Remove the cocycle component of `(log(G g^{-1}), 𝔄 - A)` at the new
    /// monomials; the defect is unchanged since `D` kills cocycles.
    fn normalize(&mut self, k: u32, layer: &[usize], ring: &BaseRing) -> Result<(), KuranishiError> {
        let raw = BaseRing::truncated(self.nvars, k);
        let (h, _) = self.pmats(&raw);
        let logs: Vec<PMat> = h.iter().map(log_unipotent).collect();
        let pos: BTreeMap<&Mono, usize> = raw.monos().iter().enumerate().map(|(i, m)| (m, i)).collect();
        for &i in layer {
            let mono = ring.monos()[i].clone();
            let j = pos[&mono];
            let lx: Vec<FMat> = logs.iter().map(|l| l.term(j).clone()).collect();
            let (x, y) = self.terms[&mono].clone();
            let (zx, zy) = self.p.classes.cocycle_part(1, &lx, &y)?;
            let x: Vec<FMat> = x.iter().zip(&zx).map(|(a, b)| a.sub(b)).collect();
            let y: Vec<FMat> = y.iter().zip(&zy).map(|(a, b)| a.sub(b)).collect();
            self.terms.insert(mono, (x, y));
        }
        Ok(())
    }

    fn family(&self, ring: &BaseRing) -> Result<FamilyBundle, KuranishiError> {
        let (g, a) = self.transitions(ring);
        let tuples = self.p.hyper().c0().tuples(1).to_vec();
        let map: BTreeMap<(usize, usize), PMat> = tuples.iter().zip(g).map(|(t, m)| ((t[0], t[1]), m)).collect();
        let fb = FamilyBundle::new(self.p.bundle.covering(), ring, map)?;
        Ok(match (a, &self.p.connection) {
            (Some(a), Some(conn)) => fb.with_connection(conn.divisor().clone(), a)?,
            _ => fb,
        })
    }
}

/// `log(1 + X) = Σ (-1)^{j+1} X^j / j` for `H = 1 + X` with `X` nilpotent.
pub fn log_unipotent(h: &PMat) -> PMat {
    let curve = h.curve().clone();
    let n = h.rows();
    let x = h.sub(&PMat::identity(&curve, h.ring(), n));
    let mut acc = PMat::zeros(&curve, h.ring(), n, n);
    let mut pw = PMat::identity(&curve, h.ring(), n);
    for j in 1..=h.ring().order() {
        pw = pw.mul(&x);
        if pw.is_zero() {
            break;
        }
        let c = Rational::new(if j % 2 == 1 { 1.into() } else { (-1).into() }, (j as i64).into());
        acc = acc.add(&pw.scale(&c));
    }
    acc
}
