use std::sync::Arc;

use num_traits::Zero;

use crate::arith::Rational;
use crate::curve::{CurveModel, Laurent, LocalFrame, PointId};
use crate::linalg::{filtration_basis, BasisCoords, Matrix};
use crate::sections::{expand_section, region_bounds, ChartSpec, Kind, PoleProfile, SectionError, Spanning};

use super::fmat::FMat;
use super::{BundleError, Covering, Frames};

/// Coefficient sheaf tensored onto `Hom(E, F)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Twist {
    None,
    Omega,
    OmegaD(PoleProfile),
}

impl Twist {
    pub fn kind(&self) -> Kind {
        match self {
            Twist::None => Kind::Function,
            _ => Kind::Differential,
        }
    }

    pub fn profile(&self) -> PoleProfile {
        match self {
            Twist::OmegaD(d) => d.clone(),
            _ => PoleProfile::empty(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlagMode {
    /// The leading coefficient preserves the flag.
    Preserve,
    /// The leading coefficient shifts the flag (`l_j -> l_{j+1}`).
    Nilpotent,
}

/// A flag in the fibre at a marked point, given by a basis `v_0..v_{r-1}` in
/// the frame of the lowest chart containing the point and block sizes
/// `k_1..k_l`: the `i`-th flag space is spanned by the basis vectors from
/// `k_1 + .. + k_{i-1}` on. With all blocks of size one, `l_j = span(v_j..)`.
/// The condition is imposed on the coefficient of `u^{-ord}`, `ord` the
/// allowed pole order of the sheaf at the point.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagCondition {
    pub point: PointId,
    pub basis: Matrix<Rational>,
    pub blocks: Vec<usize>,
    pub mode: FlagMode,
}

impl FlagCondition {
    pub fn full(point: PointId, basis: Matrix<Rational>, mode: FlagMode) -> Self {
        let blocks = vec![1; basis.rows()];
        FlagCondition { point, basis, blocks, mode }
    }

    /// Block index of each basis vector.
    pub fn block_of(&self) -> Vec<usize> {
        self.blocks.iter().enumerate().flat_map(|(b, &k)| std::iter::repeat(b).take(k)).collect()
    }

    /// Entries `(i, k)` of `B^{-1} M B` forced to vanish.
    fn pattern(&self) -> Vec<(usize, usize)> {
        let blk = self.block_of();
        let r = self.basis.rows();
        let mut v = Vec::new();
        for i in 0..r {
            for k in 0..r {
                let forced = match self.mode {
                    FlagMode::Preserve => blk[i] < blk[k],
                    FlagMode::Nilpotent => blk[i] <= blk[k],
                };
                if forced {
                    v.push((i, k));
                }
            }
        }
        v
    }
}

/// `Hom(E, F) ⊗ twist` with optional flag conditions.
#[derive(Clone, Debug)]
pub struct SheafSpec {
    pub out: Arc<Frames>,
    pub inp: Arc<Frames>,
    pub twist: Twist,
    pub flags: Vec<FlagCondition>,
}

impl SheafSpec {
    pub fn end(frames: &Arc<Frames>, twist: Twist) -> Self {
        SheafSpec { out: frames.clone(), inp: frames.clone(), twist, flags: Vec::new() }
    }

    pub fn hom(inp: &Arc<Frames>, out: &Arc<Frames>, twist: Twist) -> Self {
        SheafSpec { out: out.clone(), inp: inp.clone(), twist, flags: Vec::new() }
    }

    pub fn with_flags(mut self, flags: Vec<FlagCondition>) -> Self {
        self.flags = flags;
        self
    }

    pub fn curve(&self) -> &CurveModel {
        self.out.curve()
    }

    pub fn covering(&self) -> &Covering {
        self.out.covering()
    }

    pub fn kind(&self) -> Kind {
        self.twist.kind()
    }

    pub fn rows(&self) -> usize {
        self.out.rank()
    }

    pub fn cols(&self) -> usize {
        self.inp.rank()
    }
}

/// `(L, R)` with `M_γ = L M_α R`.
pub(crate) fn frame_change(spec: &SheafSpec, alpha: usize, gamma: usize) -> (FMat, FMat) {
    (spec.out.transition(gamma, alpha).central().clone(), spec.inp.transition(alpha, gamma).central().clone())
}

/// The chart frame used on the intersection of the charts in `tuple`.
pub(crate) fn region_spec(cov: &Covering, tuple: &[usize]) -> (ChartSpec, usize) {
    (cov.region(tuple), *tuple.iter().min().expect("nonempty tuple"))
}

fn min_valuation(curve: &CurveModel, m: &FMat, p: PointId) -> i64 {
    m.entries().iter().filter(|e| !e.is_zero()).map(|e| curve.valuation(e, p).expect("nonzero")).min().unwrap_or(0)
}

fn expansions(fr: &LocalFrame, m: &FMat) -> Vec<Laurent> {
    m.entries().iter().map(|e| fr.expand(e)).collect()
}

/// Linear functionals `M -> coefficient of u^t in (L M R)_{ab}` at a point,
/// for `t` in `exps` and `(a, b)` in `mask`.
struct PointJob {
    point: PointId,
    l: FMat,
    r: FMat,
    exps: Vec<i64>,
    mask: Vec<(usize, usize)>,
}

/// Sections over the intersection of the charts in a tuple, as matrices in
/// the frame of the smallest chart index of the tuple, with pole order at
/// most `bound` at removed points measured in the frame of the lowest chart
/// containing the point.
#[derive(Clone, Debug)]
pub struct EndSpace {
    curve: CurveModel,
    kind: Kind,
    rows: usize,
    cols: usize,
    frame: usize,
    region: ChartSpec,
    bound: i64,
    spanning: Spanning,
    coords: BasisCoords<Rational>,
    basis: Vec<FMat>,
    levels: Vec<u32>,
}

impl EndSpace {
    pub fn build(spec: &SheafSpec, tuple: &[usize], bound: i64) -> Result<Self, BundleError> {
        let curve = spec.curve().clone();
        let cov = spec.covering();
        let (region, alpha) = region_spec(cov, tuple);
        let kind = spec.kind();
        let profile = spec.twist.profile();
        let (ro, ci) = (spec.rows(), spec.cols());
        for p in profile.orders().keys().chain(spec.flags.iter().map(|f| &f.point)) {
            if *p >= curve.points().len() {
                return Err(SectionError::UnknownPoint(p.to_string()).into());
            }
        }

        let mut jobs = Vec::new();
        let mut entry_bounds = region_bounds(&curve, &region, &profile, bound);
        for p in curve.point_ids() {
            let gamma = cov.lowest_containing(p);
            if !region.contains(p) {
                let (l, r) = frame_change(spec, alpha, gamma);
                // poles of M_α = L^{-1} M_γ R^{-1}
                let (li, ri) = frame_change(spec, gamma, alpha);
                let margin = -min_valuation(&curve, &li, p).min(0) - min_valuation(&curve, &ri, p).min(0);
                entry_bounds[p] = bound + margin;
                let deepest = entry_bounds[p] - min_valuation(&curve, &l, p).min(0) - min_valuation(&curve, &r, p).min(0);
                let mask = (0..ro).flat_map(|a| (0..ci).map(move |b| (a, b))).collect();
                jobs.push(PointJob { point: p, l, r, exps: (-deepest..-bound).collect(), mask });
            }
        }
        let mut level_jobs = Vec::new();
        for p in curve.point_ids().filter(|&p| !region.contains(p)) {
            let gamma = cov.lowest_containing(p);
            let (l, r) = frame_change(spec, alpha, gamma);
            let mask = (0..ro).flat_map(|a| (0..ci).map(move |b| (a, b))).collect();
            level_jobs.push(PointJob { point: p, l, r, exps: (-bound..0).collect(), mask });
        }
        for f in &spec.flags {
            if !region.contains(f.point) {
                continue;
            }
            if f.basis.rows() != ro || ro != ci || f.blocks.iter().sum::<usize>() != ro {
                return Err(BundleError::Shape("flag conditions need a square sheaf of the flag's rank".into()));
            }
            let bi = crate::linalg::invert(&f.basis).ok_or_else(|| BundleError::Precondition("flag basis is singular".into()))?;
            let gamma = cov.lowest_containing(f.point);
            let (l, r) = frame_change(spec, alpha, gamma);
            let l = const_mat(&curve, &bi).mul(&l);
            let r = r.mul(&const_mat(&curve, &f.basis));
            let t = -i64::from(profile.order(f.point));
            jobs.push(PointJob { point: f.point, l, r, exps: vec![t], mask: f.pattern() });
        }

        let spanning = Spanning::new(&curve, &entry_bounds, kind);
        let s = spanning.len();
        let nunk = ro * ci * s;
        let idx = |i: usize, j: usize, k: usize| (i * ci + j) * s + k;

        let mut rows: Vec<Vec<Rational>> = Vec::new();
        // entrywise bounds, in the chart frame
        for p in curve.point_ids() {
            let block = crate::sections::pole_conditions(&curve, p, kind, &spanning.elems, entry_bounds[p]);
            for row in &block {
                for i in 0..ro {
                    for j in 0..ci {
                        let mut full = vec![Rational::zero(); nunk];
                        for (k, v) in row.iter().enumerate() {
                            full[idx(i, j, k)] = v.clone();
                        }
                        rows.push(full);
                    }
                }
            }
        }
        for job in &jobs {
            rows.extend(functionals(&curve, kind, &spanning, job, ro, ci).into_iter().map(|(_, r)| r).filter(|r| r.iter().any(|v| !v.is_zero())));
        }
        let kernel = Matrix::from_rows(nunk, rows).kernel();

        let mut values: Vec<Vec<Rational>> = vec![Vec::new(); kernel.len()];
        let mut levels = Vec::new();
        for job in &level_jobs {
            for (t, row) in functionals(&curve, kind, &spanning, job, ro, ci) {
                for (vi, kv) in values.iter_mut().zip(&kernel) {
                    vi.push(dot(&row, kv));
                }
                levels.push((-t) as u32);
            }
        }
        let (vecs, lv) = filtration_basis(&kernel, &values, &levels);
        let basis: Vec<FMat> = vecs.iter().map(|v| assemble(&curve, &spanning, ro, ci, v)).collect();
        let coords = BasisCoords::new(nunk, vecs).expect("kernel basis is independent");
        Ok(EndSpace { curve, kind, rows: ro, cols: ci, frame: alpha, region, bound, spanning, coords, basis, levels: lv })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn frame(&self) -> usize {
        self.frame
    }

    pub fn region(&self) -> &ChartSpec {
        &self.region
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn basis(&self) -> &[FMat] {
        &self.basis
    }

    /// Pole order at removed points (regular frames) of each basis element;
    /// nondecreasing.
    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn element(&self, c: &[Rational]) -> FMat {
        let mut acc = FMat::zeros(&self.curve, self.rows, self.cols);
        for (b, a) in self.basis.iter().zip(c) {
            if !a.is_zero() {
                acc = acc.add(&b.scale(a));
            }
        }
        acc
    }

    /// Coordinates of a matrix in the chart frame; fails when it is not a
    /// section of the space.
    pub fn coords(&self, m: &FMat) -> Result<Vec<Rational>, SectionError> {
        if m.rows() != self.rows || m.cols() != self.cols {
            return Err(SectionError::OutsideSpan);
        }
        if m.is_zero() {
            return Ok(vec![Rational::zero(); self.dim()]);
        }
        let s = self.spanning.len();
        let mut v = vec![Rational::zero(); self.rows * self.cols * s];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = m.get(i, j);
                if e.is_zero() {
                    continue;
                }
                let c = self.spanning.coords(&self.curve, self.kind, e).ok_or(SectionError::OutsideSpan)?;
                let off = (i * self.cols + j) * s;
                v[off..off + s].clone_from_slice(&c);
            }
        }
        self.coords.coords(&v).ok_or(SectionError::OutsideSpan)
    }
}

fn const_mat(curve: &CurveModel, m: &Matrix<Rational>) -> FMat {
    let rows = (0..m.rows()).map(|i| (0..m.cols()).map(|j| curve.constant(m.get(i, j).clone())).collect()).collect();
    FMat::from_rows(rows)
}

fn assemble(curve: &CurveModel, spanning: &Spanning, ro: usize, ci: usize, v: &[Rational]) -> FMat {
    let s = spanning.len();
    let mut m = FMat::zeros(curve, ro, ci);
    for i in 0..ro {
        for j in 0..ci {
            let off = (i * ci + j) * s;
            m.set(i, j, crate::sections::combine(curve, &spanning.elems, &v[off..off + s]));
        }
    }
    m
}

/// Rows `(t, coefficient of u^t in (L M R)_{ab})` over all unknowns.
fn functionals(curve: &CurveModel, kind: Kind, spanning: &Spanning, job: &PointJob, ro: usize, ci: usize) -> Vec<(i64, Vec<Rational>)> {
    let Some(&top) = job.exps.iter().max() else { return Vec::new() };
    let s = spanning.len();
    let mut w = 16i64;
    loop {
        let fr = curve.local_frame(job.point, w);
        let le = expansions(&fr, &job.l);
        let re = expansions(&fr, &job.r);
        let se: Vec<Laurent> = spanning.elems.iter().map(|e| expand_section(&fr, kind, e)).collect();
        let lc = job.l.cols();
        let rr = job.r.rows();
        debug_assert_eq!((lc, rr), (ro, ci));
        let mut out: Vec<(i64, Vec<Rational>)> = Vec::new();
        let mut ok = true;
        'outer: for &(a, b) in &job.mask {
            let mut per_t: Vec<Vec<Rational>> = vec![vec![Rational::zero(); ro * ci * s]; job.exps.len()];
            for i in 0..ro {
                if job.l.get(a, i).is_zero() {
                    continue;
                }
                let lai = &le[a * lc + i];
                for j in 0..ci {
                    if job.r.get(j, b).is_zero() {
                        continue;
                    }
                    let rjb = &re[j * job.r.cols() + b];
                    let lr = lai.mul(rjb);
                    for (k, sk) in se.iter().enumerate() {
                        let prod = lr.mul(sk);
                        if prod.precision() <= top {
                            ok = false;
                            break 'outer;
                        }
                        for (ti, &t) in job.exps.iter().enumerate() {
                            per_t[ti][(i * ci + j) * s + k] = prod.coeff(t).expect("precision checked");
                        }
                    }
                }
            }
            out.extend(job.exps.iter().cloned().zip(per_t));
        }
        if ok {
            return out;
        }
        w *= 2;
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
