//! Čech complexes of bounded-pole section spaces and the total complex of a
//! two-term complex `K⁰ -> K¹` over a covering.
//!
//! Cochains are stored on increasing index tuples only, as matrices in the
//! frame of the first chart of the tuple. The differential is
//! `(ďx)_{α0..αp+1} = Σ (-1)^i x_{α0..α̂i..αp+1}`, where only the face `i = 0`
//! needs a change of frame. The total complex is
//! `L^p = C^p K⁰ ⊕ C^{p-1} K¹` with `D(x, 𝒜) = (ďx, ď𝒜 + (-1)^p ∇x)`.

mod classes;
mod yoneda;

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::arith::Rational;
use crate::bundle::{frame_change, BundleError, Connection, EndSpace, FMat, SheafSpec, Twist};
use crate::curve::CurveModel;
use crate::linalg::{BasisCoords, LinalgError, Matrix, QuotientSpace, Solver, Subspace};
use crate::report::Report;
use crate::sections::{default_bound, SectionError};

pub use classes::Classes;
pub use yoneda::{yoneda_bilinear, yoneda_square_cocycle, YonedaSquare};

/// Highest cochain degree built.
pub const TOP: usize = 3;

#[derive(Debug, Clone, thiserror::Error)]
pub enum CechError {
    #[error("cochain of degree {0} has the wrong number of components")]
    Shape(usize),
    #[error("not a cocycle: {0}")]
    NotCocycle(String),
    #[error("internal consistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `(-1)^i` as a rational.
pub fn sign(i: usize) -> Rational {
    if i % 2 == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

fn add_scaled(acc: &mut [Rational], v: &[Rational], c: &Rational) {
    for (a, b) in acc.iter_mut().zip(v) {
        if !b.is_zero() {
            *a += b * c;
        }
    }
}

/// Coordinates sorted by descending level: pivots of divisors land on
/// high-pole coordinates first, so lifts keep poles low.
pub(crate) fn level_priority(levels: &[u32]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|a, b| levels[*b].cmp(&levels[*a]).then(a.cmp(b)));
    order
}

pub(crate) fn ascending_priority(levels: &[u32]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|a, b| levels[*a].cmp(&levels[*b]).then(a.cmp(b)));
    order
}

/// Cohomology in one degree: cocycles modulo coboundaries with canonical lifts.
#[derive(Clone, Debug)]
pub struct Cohomology {
    pub quotient: QuotientSpace<Rational>,
}

impl Cohomology {
    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    pub fn sigma(&self, c: &[Rational]) -> Vec<Rational> {
        self.quotient.sigma(c).expect("class length")
    }

    pub fn project(&self, v: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
        self.quotient.project(v)
    }
}

fn quotient(num: Subspace<Rational>, div: Subspace<Rational>, levels: &[u32]) -> Cohomology {
    let pr = level_priority(levels);
    let div = Subspace::span_ordered(div.ambient(), div.basis().to_vec(), &pr);
    Cohomology { quotient: QuotientSpace::with_priority(num, div, &pr).expect("coboundaries are cocycles") }
}

fn kernel_space(m: &Matrix<Rational>, cols: usize) -> Subspace<Rational> {
    if m.rows() == 0 {
        Subspace::full(cols)
    } else {
        Subspace::kernel_of(m)
    }
}

fn image_space(m: &Matrix<Rational>, rows: usize) -> Subspace<Rational> {
    if m.cols() == 0 {
        Subspace::zero(rows)
    } else {
        Subspace::image_of(m)
    }
}

/// The Čech complex `C⁰ -> C¹ -> C² -> C³` of a sheaf over a covering.
#[derive(Clone, Debug)]
pub struct CechComplex {
    spec: SheafSpec,
    bound: i64,
    tuples: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    spaces: Vec<Vec<EndSpace>>,
    offsets: Vec<Vec<usize>>,
    dims: Vec<usize>,
    diffs: Vec<Matrix<Rational>>,
}

impl CechComplex {
    pub fn build(spec: &SheafSpec, bound: i64) -> Result<Self, CechError> {
        let cov = spec.covering().clone();
        let mut tuples = Vec::new();
        let mut index = Vec::new();
        let mut spaces = Vec::new();
        let mut offsets = Vec::new();
        let mut dims = Vec::new();
        for p in 0..=TOP {
            let ts = cov.tuples(p);
            let mut sp = Vec::new();
            let mut off = Vec::new();
            let mut n = 0;
            for t in &ts {
                let s = EndSpace::build(spec, t, bound)?;
                off.push(n);
                n += s.dim();
                sp.push(s);
            }
            index.push(ts.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect());
            tuples.push(ts);
            spaces.push(sp);
            offsets.push(off);
            dims.push(n);
        }
        let mut cx = CechComplex { spec: spec.clone(), bound, tuples, index, spaces, offsets, dims, diffs: Vec::new() };
        for p in 0..TOP {
            let m = cx.diff_matrix(p)?;
            cx.diffs.push(m);
        }
        Ok(cx)
    }

    fn diff_matrix(&self, p: usize) -> Result<Matrix<Rational>, CechError> {
        let mut m: Matrix<Rational> = Matrix::zeros(self.dims[p + 1], self.dims[p]);
        for (j, tau) in self.tuples[p + 1].iter().enumerate() {
            let target = &self.spaces[p + 1][j];
            for i in 0..=p + 1 {
                let mut face = tau.clone();
                face.remove(i);
                let s = self.index[p][&face];
                let lr = if i == 0 { Some(frame_change(&self.spec, tau[1], tau[0])) } else { None };
                for (k, b) in self.spaces[p][s].basis().iter().enumerate() {
                    let img = match &lr {
                        Some((l, r)) => l.mul(b).mul(r),
                        None => b.clone(),
                    };
                    let c = target.coords(&img)?;
                    let col = self.offsets[p][s] + k;
                    let sg = sign(i);
                    for (r, v) in c.iter().enumerate() {
                        if !v.is_zero() {
                            let row = self.offsets[p + 1][j] + r;
                            let cur = m.get(row, col).clone();
                            m.set(row, col, cur + v * &sg);
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn spec(&self) -> &SheafSpec {
        &self.spec
    }

    pub fn curve(&self) -> &CurveModel {
        self.spec.curve()
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn tuples(&self, p: usize) -> &[Vec<usize>] {
        &self.tuples[p]
    }

    pub fn tuple_index(&self, p: usize, t: &[usize]) -> Option<usize> {
        self.index[p].get(t).copied()
    }

    pub fn space(&self, p: usize, i: usize) -> &EndSpace {
        &self.spaces[p][i]
    }

    pub fn dim(&self, p: usize) -> usize {
        self.dims[p]
    }

    pub fn offset(&self, p: usize, i: usize) -> usize {
        self.offsets[p][i]
    }

    /// `ď : C^p -> C^{p+1}`.
    pub fn d(&self, p: usize) -> &Matrix<Rational> {
        &self.diffs[p]
    }

    pub fn levels(&self, p: usize) -> Vec<u32> {
        self.spaces[p].iter().flat_map(|s| s.levels().iter().copied()).collect()
    }

    pub fn zero_cochain(&self, p: usize) -> Vec<FMat> {
        vec![FMat::zeros(self.curve(), self.spec.rows(), self.spec.cols()); self.tuples[p].len()]
    }

    pub fn coords(&self, p: usize, x: &[FMat]) -> Result<Vec<Rational>, CechError> {
        if x.len() != self.tuples[p].len() {
            return Err(CechError::Shape(p));
        }
        let mut v = Vec::with_capacity(self.dims[p]);
        for (s, m) in self.spaces[p].iter().zip(x) {
            v.extend(s.coords(m)?);
        }
        Ok(v)
    }

    pub fn element(&self, p: usize, v: &[Rational]) -> Vec<FMat> {
        self.spaces[p].iter().zip(&self.offsets[p]).map(|(s, &o)| s.element(&v[o..o + s.dim()])).collect()
    }

    /// `ď` on explicit cochains (no coordinates involved).
    pub fn apply_d(&self, p: usize, x: &[FMat]) -> Vec<FMat> {
        cech_d(&self.spec, &self.tuples[p], &self.index[p], &self.tuples[p + 1], x)
    }

    pub fn cohomology(&self, q: usize) -> Cohomology {
        let num = if q < TOP { kernel_space(&self.diffs[q], self.dims[q]) } else { Subspace::full(self.dims[q]) };
        let div = if q == 0 { Subspace::zero(self.dims[0]) } else { image_space(&self.diffs[q - 1], self.dims[q]) };
        quotient(num, div, &self.levels(q))
    }

    /// `dim H^0, dim H^1, dim H^2`.
    pub fn dims(&self) -> [usize; 3] {
        [self.cohomology(0).dim(), self.cohomology(1).dim(), self.cohomology(2).dim()]
    }

    pub fn euler(&self) -> i64 {
        let [a, b, c] = self.dims();
        a as i64 - b as i64 + c as i64
    }
}

/// `ď` on cochains given as matrices on increasing tuples.
pub(crate) fn cech_d(spec: &SheafSpec, src: &[Vec<usize>], src_index: &HashMap<Vec<usize>, usize>, dst: &[Vec<usize>], x: &[FMat]) -> Vec<FMat> {
    debug_assert_eq!(x.len(), src.len());
    let curve = spec.curve();
    dst.iter()
        .map(|tau| {
            let mut acc = FMat::zeros(curve, spec.rows(), spec.cols());
            for i in 0..tau.len() {
                let mut face = tau.clone();
                face.remove(i);
                let m = &x[src_index[&face]];
                let m = if i == 0 {
                    let (l, r) = frame_change(spec, tau[1], tau[0]);
                    l.mul(m).mul(&r)
                } else {
                    m.clone()
                };
                acc = if i % 2 == 0 { acc.add(&m) } else { acc.sub(&m) };
            }
            acc
        })
        .collect()
}

/// The sheaf map of a two-term complex: `M -> [dM] + L_α M - M R_α` on a
/// region with frame `α`.
#[derive(Clone, Debug)]
pub enum SheafMap {
    /// `∇_End M = dM + [A_α, M]`.
    Nabla(Vec<FMat>),
    /// `ad Φ (M) = [Φ_α, M]`.
    Ad(Vec<FMat>),
}

impl SheafMap {
    pub fn apply(&self, frame: usize, m: &FMat) -> FMat {
        match self {
            SheafMap::Nabla(a) => m.d().add(&a[frame].bracket(m)),
            SheafMap::Ad(phi) => phi[frame].bracket(m),
        }
    }
}

/// `∇_End M = dM + [A, M]` in the frame of chart `frame`.
pub fn nabla_end(conn: &Connection, frame: usize, m: &FMat) -> FMat {
    m.d().add(&conn.matrix(frame).bracket(m))
}

/// A two-term complex of sheaves `K⁰ -> K¹`.
#[derive(Clone, Debug)]
pub struct TwoTermComplex {
    pub k0: SheafSpec,
    pub k1: SheafSpec,
    pub map: SheafMap,
}

impl TwoTermComplex {
    /// `End E -> End E ⊗ Ω¹(D)` with `∇_End`.
    pub fn connection(conn: &Connection) -> Self {
        let f = conn.bundle().frames();
        TwoTermComplex {
            k0: SheafSpec::end(f, Twist::None),
            k1: SheafSpec::end(f, Twist::OmegaD(conn.divisor().clone())),
            map: SheafMap::Nabla(conn.matrices().to_vec()),
        }
    }

    /// Largest pole order allowed in `K¹`.
    pub fn k1_max_order(&self) -> u32 {
        self.k1.twist.profile().max_order()
    }
}

/// Dimensions reported for a total complex.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct HyperDims {
    pub h0: usize,
    pub h1: usize,
    pub h2: usize,
    pub w_prime: usize,
    pub w_second: usize,
    /// `[h^0, h^1, h^2]` of `K⁰` and of `K¹`.
    pub k0: [usize; 3],
    pub k1: [usize; 3],
}

/// The total complex `L⁰ -> L¹ -> L² -> L³` with `ℍ⁰, ℍ¹, ℍ²`.
///
/// Without `K¹` this is the Čech complex of `K⁰` alone (bundle mode).
#[derive(Clone, Debug)]
pub struct HyperComplex {
    k0_spec: SheafSpec,
    map: Option<SheafMap>,
    c0: CechComplex,
    c1: Option<CechComplex>,
    nabla: Vec<Matrix<Rational>>,
    dmat: Vec<Matrix<Rational>>,
    ldims: Vec<usize>,
    h: Vec<Cohomology>,
    h1_basis: Vec<Vec<Rational>>,
    n_wprime: usize,
    h1_coords: BasisCoords<Rational>,
    h2_solver: Solver<Rational>,
    h2_sigma: Vec<Vec<Rational>>,
    k0_dims: [usize; 3],
    k1_dims: [usize; 3],
}

impl HyperComplex {
    pub fn default_bound(tc: &TwoTermComplex) -> i64 {
        default_bound(tc.k0.curve(), &tc.k1.twist.profile())
    }

    /// `K⁰` at pole bound `n`, `K¹` at `n + 1 + max ord D`.
    pub fn build(tc: &TwoTermComplex, n: i64) -> Result<Self, CechError> {
        let c0 = CechComplex::build(&tc.k0, n)?;
        let c1 = CechComplex::build(&tc.k1, n + 1 + i64::from(tc.k1_max_order()))?;
        Self::assemble(tc.k0.clone(), Some(tc.map.clone()), c0, Some(c1))
    }

    /// Čech complex of `K⁰` only.
    pub fn sheaf(k0: &SheafSpec, n: i64) -> Result<Self, CechError> {
        let c0 = CechComplex::build(k0, n)?;
        Self::assemble(k0.clone(), None, c0, None)
    }

    fn assemble(k0_spec: SheafSpec, map: Option<SheafMap>, c0: CechComplex, c1: Option<CechComplex>) -> Result<Self, CechError> {
        let mut nabla = Vec::new();
        if let (Some(c1), Some(map)) = (&c1, &map) {
            for p in 0..=TOP {
                let mut m = Matrix::zeros(c1.dim(p), c0.dim(p));
                for (s, tuple) in c0.tuples(p).iter().enumerate() {
                    let frame = tuple[0];
                    let tgt = c1.space(p, s);
                    for (k, b) in c0.space(p, s).basis().iter().enumerate() {
                        let img = map.apply(frame, b);
                        let c = tgt.coords(&img).map_err(|e| CechError::Internal(format!("sheaf map leaves K¹ on {tuple:?}: {e}")))?;
                        for (r, v) in c.into_iter().enumerate() {
                            m.set(c1.offset(p, s) + r, c0.offset(p, s) + k, v);
                        }
                    }
                }
                nabla.push(m);
            }
        }
        let d1 = |p: usize| c1.as_ref().map_or(0, |c| c.dim(p));
        let ldims: Vec<usize> = (0..=TOP).map(|p| c0.dim(p) + if p > 0 { d1(p - 1) } else { 0 }).collect();
        let mut dmat = Vec::new();
        for p in 0..TOP {
            let mut m = Matrix::zeros(ldims[p + 1], ldims[p]);
            let a = c0.d(p);
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    m.set(i, j, a.get(i, j).clone());
                }
            }
            if let Some(c1) = &c1 {
                let r0 = c0.dim(p + 1);
                let nb = &nabla[p];
                let sg = sign(p);
                for i in 0..nb.rows() {
                    for j in 0..nb.cols() {
                        if !nb.get(i, j).is_zero() {
                            m.set(r0 + i, j, nb.get(i, j) * &sg);
                        }
                    }
                }
                if p > 0 {
                    let b = c1.d(p - 1);
                    let c0p = c0.dim(p);
                    for i in 0..b.rows() {
                        for j in 0..b.cols() {
                            m.set(r0 + i, c0p + j, b.get(i, j).clone());
                        }
                    }
                }
            }
            dmat.push(m);
        }
        let mut hc = HyperComplex {
            k0_spec,
            map,
            c0,
            c1,
            nabla,
            dmat,
            ldims,
            h: Vec::new(),
            h1_basis: Vec::new(),
            n_wprime: 0,
            h1_coords: BasisCoords::new(0, Vec::new()).expect("empty family"),
            h2_solver: Solver::new(&Matrix::zeros(0, 0)),
            h2_sigma: Vec::new(),
            k0_dims: [0; 3],
            k1_dims: [0; 3],
        };
        for q in 0..=2 {
            let num = kernel_space(&hc.dmat[q], hc.ldims[q]);
            let div = if q == 0 { Subspace::zero(hc.ldims[0]) } else { image_space(&hc.dmat[q - 1], hc.ldims[q]) };
            hc.h.push(quotient(num, div, &hc.levels(q)));
        }
        hc.k0_dims = hc.c0.dims();
        hc.k1_dims = hc.c1.as_ref().map_or([0; 3], |c| c.dims());
        hc.split_h1()?;
        hc.prepare_h2();
        Ok(hc)
    }

    /// ℍ¹ basis: lifts `(0, ω)` of `W′ = H⁰(K¹)/∇H⁰(K⁰)`, then lifts
    /// `(σ(a), 𝒜″)` of `W″ = ker(H¹(K⁰) -> H¹(K¹))` with `ď𝒜″ = ∇σ(a)`.
    fn split_h1(&mut self) -> Result<(), CechError> {
        let c0 = &self.c0;
        let mut reps: Vec<Vec<Rational>> = Vec::new();
        let n0 = c0.dim(1);
        let h1k0 = c0.cohomology(1);
        match &self.c1 {
            None => {
                for i in 0..h1k0.dim() {
                    reps.push(h1k0.sigma(&unit(h1k0.dim(), i)));
                }
            }
            Some(c1) => {
                let h0k0 = c0.cohomology(0);
                let h0k1 = c1.cohomology(0);
                let h1k1 = c1.cohomology(1);
                // d1 in degree 0
                let cols: Vec<Vec<Rational>> = (0..h0k0.dim()).map(|i| h0k1.project(&self.nabla[0].mul_vec(&h0k0.sigma(&unit(h0k0.dim(), i))).unwrap())).collect::<Result<_, _>>()?;
                let img = Subspace::span(h0k1.dim(), cols);
                let wp = QuotientSpace::new(Subspace::full(h0k1.dim()), img)?;
                for l in wp.lifts() {
                    let omega = h0k1.sigma(l);
                    let mut v = vec![Rational::zero(); n0];
                    v.extend(omega);
                    reps.push(v);
                }
                self.n_wprime = reps.len();
                // d1 in degree 1
                let sig: Vec<Vec<Rational>> = (0..h1k0.dim()).map(|i| h1k0.sigma(&unit(h1k0.dim(), i))).collect();
                let rows: Vec<Vec<Rational>> = sig.iter().map(|s| h1k1.project(&self.nabla[1].mul_vec(s).unwrap())).collect::<Result<_, _>>()?;
                // d1 matrix has columns rows[i]
                let d1 = Matrix::from_cols(h1k1.dim(), rows);
                let ker = if h1k1.dim() == 0 { Matrix::<Rational>::identity(h1k0.dim()).to_rows() } else { d1.kernel() };
                let solver = Solver::with_priority(c1.d(0), &ascending_priority(&c1.levels(0)));
                for a in ker {
                    let mut x = vec![Rational::zero(); n0];
                    for (s, c) in sig.iter().zip(&a) {
                        add_scaled(&mut x, s, c);
                    }
                    let nx = self.nabla[1].mul_vec(&x)?;
                    let aa = solver.solve(&nx)?.ok_or_else(|| CechError::Internal("∇σ(a) is not a coboundary for a in ker d1".into()))?;
                    x.extend(aa);
                    reps.push(x);
                }
            }
        }
        let h1dim = self.h[1].dim();
        if reps.len() != h1dim {
            return Err(CechError::Internal(format!("dim W′ + dim W″ = {} but dim ℍ¹ = {h1dim}", reps.len())));
        }
        for r in &reps {
            if self.dmat[1].mul_vec(r)?.iter().any(|v| !v.is_zero()) {
                return Err(CechError::Internal("ℍ¹ representative is not D-closed".into()));
            }
        }
        let mut rows = reps.clone();
        rows.extend(self.h[1].quotient.divisor().basis().iter().cloned());
        self.h1_coords = BasisCoords::new(self.ldims[1], rows).map_err(|_| CechError::Internal("ℍ¹ representatives are dependent modulo boundaries".into()))?;
        self.h1_basis = reps;
        Ok(())
    }

    fn prepare_h2(&mut self) {
        let h2 = &self.h[2];
        let m = h2.dim();
        self.h2_sigma = (0..m).map(|i| h2.sigma(&unit(m, i))).collect();
        let d1 = &self.dmat[1];
        let n = self.ldims[2];
        let mut full = Matrix::zeros(n, m + d1.cols());
        for (j, s) in self.h2_sigma.iter().enumerate() {
            for (i, v) in s.iter().enumerate() {
                full.set(i, j, v.clone());
            }
        }
        for i in 0..d1.rows() {
            for j in 0..d1.cols() {
                full.set(i, m + j, d1.get(i, j).clone());
            }
        }
        let mut pr: Vec<usize> = (0..m).collect();
        pr.extend(ascending_priority(&self.levels(1)).into_iter().map(|j| m + j));
        self.h2_solver = Solver::with_priority(&full, &pr);
    }

    pub fn c0(&self) -> &CechComplex {
        &self.c0
    }

    pub fn c1(&self) -> Option<&CechComplex> {
        self.c1.as_ref()
    }

    pub fn k0_spec(&self) -> &SheafSpec {
        &self.k0_spec
    }

    pub fn map(&self) -> Option<&SheafMap> {
        self.map.as_ref()
    }

    pub fn has_k1(&self) -> bool {
        self.c1.is_some()
    }

    pub fn ldim(&self, p: usize) -> usize {
        self.ldims[p]
    }

    /// `D : L^p -> L^{p+1}`.
    pub fn d(&self, p: usize) -> &Matrix<Rational> {
        &self.dmat[p]
    }

    /// `C^p K⁰ -> C^p K¹`.
    pub fn sheaf_map_matrix(&self, p: usize) -> Option<&Matrix<Rational>> {
        self.nabla.get(p)
    }

    pub fn levels(&self, p: usize) -> Vec<u32> {
        let mut l = self.c0.levels(p);
        if let (Some(c1), true) = (&self.c1, p > 0) {
            l.extend(c1.levels(p - 1));
        }
        l
    }

    pub fn hyper(&self, q: usize) -> &Cohomology {
        &self.h[q]
    }

    pub fn dims(&self) -> HyperDims {
        HyperDims {
            h0: self.h[0].dim(),
            h1: self.h[1].dim(),
            h2: self.h[2].dim(),
            w_prime: self.n_wprime,
            w_second: self.h1_basis.len() - self.n_wprime,
            k0: self.k0_dims,
            k1: self.k1_dims,
        }
    }

    /// Representatives of the ℍ¹ basis in `L¹` coordinates (W′ first).
    pub fn h1_basis(&self) -> &[Vec<Rational>] {
        &self.h1_basis
    }

    pub fn n_wprime(&self) -> usize {
        self.n_wprime
    }

    /// Class coordinates of a 1-cocycle in the ℍ¹ basis.
    pub fn h1_class(&self, v: &[Rational]) -> Result<Vec<Rational>, CechError> {
        if self.dmat[1].mul_vec(v)?.iter().any(|x| !x.is_zero()) {
            return Err(CechError::NotCocycle("D x != 0 in L²".into()));
        }
        let c = self.h1_coords.coords(v).ok_or_else(|| CechError::Internal("cocycle outside the span of ℍ¹ representatives and boundaries".into()))?;
        Ok(c[..self.h1_basis.len()].to_vec())
    }

    /// Canonical representatives of the ℍ² basis.
    pub fn h2_sigma(&self) -> &[Vec<Rational>] {
        &self.h2_sigma
    }

    /// For a 2-cocycle `ρ`: class coordinates `c` and a primitive `X` with
    /// `D X = ρ - Σ c_n σ(ξ_n)`.
    pub fn h2_class(&self, rho: &[Rational]) -> Result<(Vec<Rational>, Vec<Rational>), CechError> {
        if self.dmat[2].mul_vec(rho)?.iter().any(|x| !x.is_zero()) {
            return Err(CechError::NotCocycle("D ρ != 0 in L³".into()));
        }
        let m = self.h2_sigma.len();
        let sol = self.h2_solver.solve(rho)?.ok_or_else(|| CechError::Internal("2-cocycle outside ℍ² lifts plus boundaries".into()))?;
        Ok((sol[..m].to_vec(), sol[m..].to_vec()))
    }

    /// Split `L^p` coordinates into the `K⁰` and `K¹` parts.
    pub fn split<'a>(&self, p: usize, v: &'a [Rational]) -> (&'a [Rational], &'a [Rational]) {
        v.split_at(self.c0.dim(p))
    }

    pub fn element(&self, p: usize, v: &[Rational]) -> (Vec<FMat>, Vec<FMat>) {
        let (a, b) = self.split(p, v);
        let x = self.c0.element(p, a);
        let y = match (&self.c1, p > 0) {
            (Some(c1), true) => c1.element(p - 1, b),
            _ => Vec::new(),
        };
        (x, y)
    }

    pub fn coords(&self, p: usize, x: &[FMat], y: &[FMat]) -> Result<Vec<Rational>, CechError> {
        let mut v = self.c0.coords(p, x)?;
        if let (Some(c1), true) = (&self.c1, p > 0) {
            v.extend(c1.coords(p - 1, y)?);
        }
        Ok(v)
    }

    /// D∘D = 0 in every degree.
    pub fn check(&self) -> Report {
        let mut r = Report::new();
        for p in 0..TOP - 1 {
            let dd = self.dmat[p + 1].mul(&self.dmat[p]).expect("composable");
            r.push(format!("D∘D = 0 on L^{p}"), dd.is_zero(), "");
        }
        for p in 0..TOP - 1 {
            let dd = self.c0.d(p + 1).mul(self.c0.d(p)).expect("composable");
            r.push(format!("ď∘ď = 0 on C^{p}(K⁰)"), dd.is_zero(), "");
        }
        let euler_h = self.h[0].dim() as i64 - self.h[1].dim() as i64 + self.h[2].dim() as i64;
        let e0 = self.k0_dims[0] as i64 - self.k0_dims[1] as i64 + self.k0_dims[2] as i64;
        let e1 = self.k1_dims[0] as i64 - self.k1_dims[1] as i64 + self.k1_dims[2] as i64;
        r.push("χ(ℍ) = χ(K⁰) - χ(K¹)", euler_h == e0 - e1, format!("{euler_h} vs {e0} - {e1}"));
        r
    }
}

pub(crate) fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

/// Dimensions at bound `n` and `2n` of the same complex.
pub fn bound_stability(tc: &TwoTermComplex, n: i64) -> Result<(HyperDims, HyperDims), CechError> {
    Ok((HyperComplex::build(tc, n)?.dims(), HyperComplex::build(tc, 2 * n)?.dims()))
}
