//! Atiyah classes and restriction maps for families over artinian bases.
//!
//! For a family `E` over `X × Spec S`, the sheaf `End_S(E)` is treated as a
//! vector bundle over `X` of rank `r²·dim S`: a section `Σ_μ t^μ M_μ` is the
//! column of the entries of the `M_μ`, indexed `(μ·r + i)·r + j`. Its
//! transitions are the matrices of `M ↦ g M g⁻¹` over `S`, so the Čech
//! machinery of the central fibre applies unchanged.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::arith::Rational;
use crate::cech::{CechComplex, CechError, Classes};
use crate::curve::CurveModel;
use crate::linalg::{Matrix, QuotientSpace, Solver, Subspace};
use crate::sections::PoleProfile;

use super::{restrict_family, BaseRing, Bundle, BundleError, Connection, FMat, FamilyBundle, Frames, PMat, SheafSpec, Twist};

/// Column of the entries of `m`, `(μ·r + i)·c + j`.
pub fn vec_family(m: &PMat) -> FMat {
    let (r, c) = (m.rows(), m.cols());
    let mut out = FMat::zeros(m.curve(), r * c * m.ring().dim(), 1);
    for (mu, t) in m.terms().iter().enumerate() {
        for i in 0..r {
            for j in 0..c {
                out.set((mu * r + i) * c + j, 0, t.get(i, j).clone());
            }
        }
    }
    out
}

pub fn unvec_family(curve: &CurveModel, ring: &BaseRing, r: usize, col: &FMat) -> PMat {
    let terms = (0..ring.dim())
        .map(|mu| {
            let mut m = FMat::zeros(curve, r, r);
            for i in 0..r {
                for j in 0..r {
                    m.set(i, j, col.get((mu * r + i) * r + j, 0).clone());
                }
            }
            m
        })
        .collect();
    PMat::from_dense(ring, terms)
}

/// Matrix of `M ↦ A M B` on columns of square family matrices.
fn sandwich(a: &PMat, b: &PMat) -> FMat {
    let ring = a.ring();
    let r = a.rows();
    let m = ring.dim();
    let curve = a.curve();
    let n = r * r * m;
    let mut out = FMat::zeros(curve, n, n);
    let idx = |mu: usize, i: usize, j: usize| (mu * r + i) * r + j;
    for (m1, am) in a.terms().iter().enumerate() {
        if am.is_zero() {
            continue;
        }
        for mu in 0..m {
            for &(kappa, ref c1) in ring.mul_basis(m1, mu) {
                for (m2, bm) in b.terms().iter().enumerate() {
                    if bm.is_zero() {
                        continue;
                    }
                    for &(nu, ref c2) in ring.mul_basis(kappa, m2) {
                        let c = c1 * c2;
                        for x in 0..r {
                            for i in 0..r {
                                let ai = am.get(x, i);
                                if ai.is_zero() {
                                    continue;
                                }
                                for j in 0..r {
                                    for y in 0..r {
                                        let bj = bm.get(j, y);
                                        if bj.is_zero() {
                                            continue;
                                        }
                                        let (row, col) = (idx(nu, x, y), idx(mu, i, j));
                                        let v = out.get(row, col).add(&ai.mul(bj).scale(&c));
                                        out.set(row, col, v);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Frames of `End_S(E)` as a bundle over the curve.
pub fn end_family_frames(f: &Frames) -> Arc<Frames> {
    let field = BaseRing::field();
    let mut g = BTreeMap::new();
    let mut ginv = BTreeMap::new();
    for &(a, b) in f.stored().keys() {
        let (gab, gba) = (f.transition(a, b), f.transition(b, a));
        g.insert((a, b), PMat::constant(&field, sandwich(&gab, &gba)));
        ginv.insert((a, b), PMat::constant(&field, sandwich(&gba, &gab)));
    }
    let rank = f.rank() * f.rank() * f.ring().dim();
    Arc::new(Frames { covering: f.covering().clone(), ring: field, rank, g, ginv })
}

/// `End_S(E) ⊗ twist` as a sheaf over the curve.
pub fn family_end_spec(fb: &FamilyBundle, twist: Twist) -> SheafSpec {
    let one = Bundle::trivial(fb.covering(), 1);
    SheafSpec::hom(one.frames(), &end_family_frames(fb.frames()), twist)
}

fn to_cochain(ms: &[PMat]) -> Vec<FMat> {
    ms.iter().map(vec_family).collect()
}

fn from_cochain(fb: &FamilyBundle, cs: &[FMat]) -> Vec<PMat> {
    cs.iter().map(|c| unvec_family(fb.curve(), fb.ring(), fb.rank(), c)).collect()
}

/// Initial pole bound at removed points for the class computations.
fn class_bound(curve: &CurveModel, twist: &Twist) -> i64 {
    i64::from(twist.profile().max_order() + 2 * curve.genus() + 2)
}

/// The class of `𝒢_{αβ} = dG_{αβ} G⁻¹_{αβ}` in `H¹(End_S(E) ⊗ twist)`.
#[derive(Clone, Debug)]
pub struct AtiyahClass {
    pub twist: Twist,
    pub h1_dim: usize,
    pub coords: Vec<Rational>,
    /// `𝒢` on increasing pairs of charts, in the frame of the first chart.
    pub cocycle: Vec<PMat>,
    /// When the class vanishes: `𝒜_α` with `G 𝒜_β G⁻¹ - 𝒜_α = 𝒢_{αβ}`,
    /// i.e. connection matrices with poles in the twist.
    pub witness: Option<Vec<PMat>>,
}

impl AtiyahClass {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// The witness as a connection on the central fibre bundle `b`.
    pub fn connection(&self, b: &Bundle) -> Option<Result<Connection, BundleError>> {
        let w = self.witness.as_ref()?;
        Some(Connection::new(b, self.twist.profile(), w.iter().map(|m| m.central().clone()).collect()))
    }
}

pub fn atiyah_cocycle(fb: &FamilyBundle) -> Vec<PMat> {
    fb.covering().tuples(1).iter().map(|t| fb.transition(t[0], t[1]).d().mul(&fb.transition(t[1], t[0]))).collect()
}

fn check_twist(twist: &Twist) -> Result<(), CechError> {
    match twist {
        Twist::None => Err(BundleError::Precondition("Atiyah classes live in a differential twist".into()).into()),
        _ => Ok(()),
    }
}

/// `H^q(End_S(E) ⊗ twist)` with class computations for cochains of any pole
/// order.
#[derive(Clone, Debug)]
pub struct FamilyEnd {
    fb: FamilyBundle,
    classes: Classes,
}

impl FamilyEnd {
    pub fn new(fb: &FamilyBundle, twist: Twist) -> Result<Self, CechError> {
        let n = class_bound(fb.curve(), &twist);
        let spec = family_end_spec(fb, twist);
        Ok(FamilyEnd { fb: fb.clone(), classes: Classes::bundle(&spec, n)? })
    }

    pub fn dims(&self) -> [usize; 3] {
        let d = self.classes.base().dims();
        [d.h0, d.h1, d.h2]
    }

    pub fn h1_class(&mut self, x: &[PMat]) -> Result<Vec<Rational>, CechError> {
        self.classes.h1_class(&to_cochain(x), &[])
    }

    /// Canonical representative of a class in `H¹`.
    pub fn h1_rep(&self, c: &[Rational]) -> Vec<PMat> {
        let hc = self.classes.base();
        let mut v = vec![Rational::zero(); hc.ldim(1)];
        for (b, a) in hc.h1_basis().iter().zip(c) {
            for (x, y) in v.iter_mut().zip(b) {
                *x += a * y;
            }
        }
        from_cochain(&self.fb, &hc.element(1, &v).0)
    }

    /// A 0-cochain `x` with `ďx = c`, if any.
    pub fn coboundary_preimage(&mut self, c: &[PMat]) -> Result<Option<Vec<PMat>>, CechError> {
        Ok(self.classes.primitive(1, &to_cochain(c), &[])?.map(|(x, _)| from_cochain(&self.fb, &x)))
    }
}

pub fn family_atiyah_class(fb: &FamilyBundle, twist: Twist) -> Result<AtiyahClass, CechError> {
    check_twist(&twist)?;
    let cocycle = atiyah_cocycle(fb);
    let mut fe = FamilyEnd::new(fb, twist.clone())?;
    let coords = fe.h1_class(&cocycle)?;
    let witness = if coords.iter().all(|c| c.is_zero()) {
        Some(fe.coboundary_preimage(&cocycle)?.ok_or_else(|| CechError::Internal("zero Atiyah class without a primitive".into()))?)
    } else {
        None
    };
    Ok(AtiyahClass { twist, h1_dim: fe.dims()[1], coords, cocycle, witness })
}

pub fn atiyah_class(b: &Bundle, twist: Twist) -> Result<AtiyahClass, CechError> {
    family_atiyah_class(&b.as_family(), twist)
}

/// Image of a class of `H¹(End_S(E) ⊗ from)` in `H¹(End_S(E) ⊗ to)` under
/// the inclusion of twists.
pub fn include_class(fb: &FamilyBundle, from: Twist, to: Twist, c: &[Rational]) -> Result<Vec<Rational>, CechError> {
    let src = FamilyEnd::new(fb, from.clone())?;
    let ok = match (&from, &to) {
        (Twist::None, Twist::None) => true,
        (Twist::None, _) | (_, Twist::None) => false,
        _ => from.profile().is_le(&to.profile()).is_none(),
    };
    if !ok {
        return Err(BundleError::Precondition("no inclusion between these twists".into()).into());
    }
    let rep = src.h1_rep(c);
    FamilyEnd::new(fb, to)?.h1_class(&rep)
}

/// `res_{ji} : H⁰(End(E_j) ⊗ twist) -> H⁰(End(E_i) ⊗ twist)`.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
    /// Global sections of the target not in the image, one per cokernel
    /// dimension, as matrices per chart.
    pub cokernel: Vec<Vec<PMat>>,
    target_fb: FamilyBundle,
    target: CechComplex,
    target_h0: Subspace<Rational>,
    image: Matrix<Rational>,
}

impl Restriction {
    pub fn is_surjective(&self) -> bool {
        self.rank == self.target_dim
    }

    /// Coordinates `c` (in the source `H⁰` basis) with `res(Σ c_k s_k) = section`,
    /// `None` when the section is not a restriction. Errors for inputs that
    /// are not global sections.
    pub fn preimage(&self, section: &[PMat]) -> Result<Option<Vec<Rational>>, CechError> {
        let v = self.target.coords(0, &to_cochain(section))?;
        if self.target.d(0).mul_vec(&v)?.iter().any(|x| !x.is_zero()) {
            return Err(CechError::NotCocycle("not a global section".into()));
        }
        let w = self.target_h0.coords(&v).ok_or_else(|| CechError::Internal("global section outside H⁰".into()))?;
        Ok(Solver::new(&self.image).solve(&w)?)
    }

    pub fn target_family(&self) -> &FamilyBundle {
        &self.target_fb
    }
}

/// The restriction map on global sections of `End ⊗ twist` between the
/// order-`j` and order-`i` truncations of a family.
pub fn restriction_map(fb: &FamilyBundle, j: u32, i: u32, twist: Twist) -> Result<Restriction, CechError> {
    if i > j || j > fb.order() {
        return Err(BundleError::Precondition(format!("need i ≤ j ≤ {}, got i = {i}, j = {j}", fb.order())).into());
    }
    let ej = restrict_family(fb, j)?;
    let ei = restrict_family(fb, i)?;
    let n = i64::from(twist.profile().max_order());
    let cj = CechComplex::build(&family_end_spec(&ej, twist.clone()), n)?;
    let ci = CechComplex::build(&family_end_spec(&ei, twist), n)?;
    let h0j = Subspace::kernel_of(cj.d(0));
    let h0i = Subspace::kernel_of(ci.d(0));
    let mut cols = Vec::new();
    for s in h0j.basis() {
        let sec = from_cochain(&ej, &cj.element(0, s));
        let res: Vec<PMat> = sec.iter().map(|m| m.restrict(ei.ring())).collect();
        let v = ci.coords(0, &to_cochain(&res))?;
        cols.push(h0i.coords(&v).ok_or_else(|| CechError::Internal("restriction of a global section is not global".into()))?);
    }
    let image = Matrix::from_cols(h0i.dim(), cols.clone());
    let img = Subspace::span(h0i.dim(), cols);
    let rank = img.dim();
    let quot = QuotientSpace::new(Subspace::full(h0i.dim()), img)?;
    let cokernel = quot
        .lifts()
        .iter()
        .map(|l| {
            from_cochain(&ei, &ci.element(0, &h0i.combine(l)))
        })
        .collect();
    Ok(Restriction { source_dim: h0j.dim(), target_dim: h0i.dim(), rank, cokernel, target_fb: ei, target: ci, target_h0: h0i, image })
}

/// `res_{ji}` on `H⁰(End ⊗ Ω¹(D))`, after checking that `At^D` vanishes at
/// both orders.
pub fn res_surjective(fb: &FamilyBundle, j: u32, i: u32, d: &PoleProfile) -> Result<Restriction, CechError> {
    let twist = Twist::OmegaD(d.clone());
    for k in [j, i] {
        let at = family_atiyah_class(&restrict_family(fb, k)?, twist.clone())?;
        if !at.is_zero() {
            return Err(BundleError::Precondition(format!("At^D of the order-{k} truncation is nonzero")).into());
        }
    }
    restriction_map(fb, j, i, twist)
}
