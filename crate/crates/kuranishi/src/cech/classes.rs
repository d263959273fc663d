use std::collections::BTreeMap;

use num_traits::Zero;

use crate::arith::Rational;
use crate::bundle::{FMat, SheafSpec};
use crate::linalg::{BasisCoords, Matrix, Solver, Subspace};

use super::{ascending_priority, CechError, HyperComplex, TwoTermComplex};

/// The same total complex at a larger pole bound, with the base complex's
/// ℍ¹ and ℍ² representatives carried over.
#[derive(Clone, Debug)]
struct Enlarged {
    hc: HyperComplex,
    h1: BasisCoords<Rational>,
    h2: Solver<Rational>,
}

/// Class computations for cochains whose poles may exceed the base bound.
///
/// Products of cochains have larger poles at removed points than the
/// cochains themselves; such cochains are coordinatized in a complex with a
/// larger bound, which computes the same cohomology, while class coordinates
/// stay relative to the representatives fixed by the base complex.
#[derive(Clone, Debug)]
pub struct Classes {
    tc: Option<TwoTermComplex>,
    k0: SheafSpec,
    base: HyperComplex,
    cache: BTreeMap<i64, Enlarged>,
    cocycles: BTreeMap<(usize, i64), Subspace<Rational>>,
}

/// Give up beyond this many doublings of the base bound.
const MAX_DOUBLINGS: u32 = 5;

impl Classes {
    pub fn new(tc: Option<&TwoTermComplex>, k0: &SheafSpec, base: HyperComplex) -> Self {
        Classes { tc: tc.cloned(), k0: k0.clone(), base, cache: BTreeMap::new(), cocycles: BTreeMap::new() }
    }

    pub fn connection(tc: &TwoTermComplex, n: i64) -> Result<Self, CechError> {
        Ok(Self::new(Some(tc), &tc.k0, HyperComplex::build(tc, n)?))
    }

    pub fn bundle(k0: &SheafSpec, n: i64) -> Result<Self, CechError> {
        Ok(Self::new(None, k0, HyperComplex::sheaf(k0, n)?))
    }

    pub fn base(&self) -> &HyperComplex {
        &self.base
    }

    pub fn base_bound(&self) -> i64 {
        self.base.c0().bound()
    }

    fn enlarged(&mut self, n: i64) -> Result<&Enlarged, CechError> {
        if !self.cache.contains_key(&n) {
            let hc = match &self.tc {
                Some(tc) => HyperComplex::build(tc, n)?,
                None => HyperComplex::sheaf(&self.k0, n)?,
            };
            let base = &self.base;
            let recoord = |p: usize, v: &[Rational]| -> Result<Vec<Rational>, CechError> {
                let (x, y) = base.element(p, v);
                hc.coords(p, &x, &y)
            };
            let mut rows: Vec<Vec<Rational>> = base.h1_basis().iter().map(|v| recoord(1, v)).collect::<Result<_, _>>()?;
            let b1 = if hc.d(0).cols() == 0 { Subspace::zero(hc.ldim(1)) } else { Subspace::image_of(hc.d(0)) };
            rows.extend(b1.basis().iter().cloned());
            let h1 = BasisCoords::new(hc.ldim(1), rows).map_err(|_| CechError::Internal("ℍ¹ representatives dependent at a larger bound".into()))?;
            let sig: Vec<Vec<Rational>> = base.h2_sigma().iter().map(|v| recoord(2, v)).collect::<Result<_, _>>()?;
            let m = sig.len();
            let d1 = hc.d(1);
            let mut full = Matrix::zeros(hc.ldim(2), m + d1.cols());
            for (j, s) in sig.iter().enumerate() {
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
            pr.extend(ascending_priority(&hc.levels(1)).into_iter().map(|j| m + j));
            let h2 = Solver::with_priority(&full, &pr);
            if hc.dims() != base.dims() {
                return Err(CechError::Internal(format!("dimensions change between bounds {} and {n}", base.c0().bound())));
            }
            self.cache.insert(n, Enlarged { hc, h1, h2 });
        }
        Ok(&self.cache[&n])
    }

    /// Smallest bound `base·2^j` at which the cochain pair has coordinates.
    fn fit(&mut self, p: usize, x: &[FMat], y: &[FMat]) -> Result<(i64, Vec<Rational>), CechError> {
        if let Ok(v) = self.base.coords(p, x, y) {
            return Ok((self.base_bound(), v));
        }
        let mut n = self.base_bound();
        let mut last = None;
        for _ in 0..MAX_DOUBLINGS {
            n *= 2;
            let e = self.enlarged(n)?;
            match e.hc.coords(p, x, y) {
                Ok(v) => return Ok((n, v)),
                Err(err) => last = Some(err),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// Pole bound at which the cochain pair is coordinatized.
    pub fn fit_bound(&mut self, p: usize, x: &[FMat], y: &[FMat]) -> Result<i64, CechError> {
        Ok(self.fit(p, x, y)?.0)
    }

    fn complex(&self, n: i64) -> &HyperComplex {
        if n == self.base_bound() {
            &self.base
        } else {
            &self.cache[&n].hc
        }
    }

    /// Component of a degree-`p` pair along the cocycles `ker D_p`, split off
    /// against the coordinate complement read from the echelon pivots.
    pub fn cocycle_part(&mut self, p: usize, x: &[FMat], y: &[FMat]) -> Result<(Vec<FMat>, Vec<FMat>), CechError> {
        let (n, v) = self.fit(p, x, y)?;
        if !self.cocycles.contains_key(&(p, n)) {
            let z = Subspace::kernel_of(self.complex(n).d(p));
            self.cocycles.insert((p, n), z);
        }
        let rest = self.cocycles[&(p, n)].reduce(&v);
        let z: Vec<Rational> = v.iter().zip(&rest).map(|(a, b)| a - b).collect();
        Ok(self.complex(n).element(p, &z))
    }

    /// ℍ¹ coordinates of a 1-cocycle given as cochains.
    pub fn h1_class(&mut self, x: &[FMat], y: &[FMat]) -> Result<Vec<Rational>, CechError> {
        let (n, v) = self.fit(1, x, y)?;
        if n == self.base_bound() {
            return self.base.h1_class(&v);
        }
        let e = &self.cache[&n];
        if e.hc.d(1).mul_vec(&v)?.iter().any(|c| !c.is_zero()) {
            return Err(CechError::NotCocycle("D x != 0 in L²".into()));
        }
        let c = e.h1.coords(&v).ok_or_else(|| CechError::Internal("cocycle outside ℍ¹ representatives plus boundaries".into()))?;
        Ok(c[..self.base.h1_basis().len()].to_vec())
    }

    /// For a 2-cocycle `ρ` given as cochains: ℍ² coordinates `c` and a
    /// primitive `X = (x, 𝒜)` with `D X = ρ - Σ c_n σ(ξ_n)`.
    pub fn h2_class(&mut self, x: &[FMat], y: &[FMat]) -> Result<(Vec<Rational>, (Vec<FMat>, Vec<FMat>)), CechError> {
        let (n, v) = self.fit(2, x, y)?;
        if n == self.base_bound() {
            let (c, prim) = self.base.h2_class(&v)?;
            return Ok((c, self.base.element(1, &prim)));
        }
        let e = &self.cache[&n];
        if e.hc.d(2).mul_vec(&v)?.iter().any(|c| !c.is_zero()) {
            return Err(CechError::NotCocycle("D ρ != 0 in L³".into()));
        }
        let m = self.base.h2_sigma().len();
        let sol = e.h2.solve(&v)?.ok_or_else(|| CechError::Internal("2-cocycle outside ℍ² lifts plus boundaries".into()))?;
        Ok((sol[..m].to_vec(), e.hc.element(1, &sol[m..])))
    }

    /// Some `X` with `D X = (x, y)` for a pair of degree `p ≥ 1`, preferring
    /// low poles, or `None` when the pair is not exact.
    pub fn primitive(&mut self, p: usize, x: &[FMat], y: &[FMat]) -> Result<Option<(Vec<FMat>, Vec<FMat>)>, CechError> {
        assert!(p >= 1, "degree-0 cochains have no primitive");
        let (n, v) = self.fit(p, x, y)?;
        let hc = if n == self.base_bound() { &self.base } else { &self.cache[&n].hc };
        let solver = Solver::with_priority(hc.d(p - 1), &ascending_priority(&hc.levels(p - 1)));
        Ok(solver.solve(&v)?.map(|s| hc.element(p - 1, &s)))
    }

    /// True when the cochain pair is D-closed (cochains of degree `p`).
    pub fn is_closed(&mut self, p: usize, x: &[FMat], y: &[FMat]) -> Result<bool, CechError> {
        let (n, v) = self.fit(p, x, y)?;
        let hc = if n == self.base_bound() { &self.base } else { &self.cache[&n].hc };
        Ok(hc.d(p).mul_vec(&v)?.iter().all(|c| c.is_zero()))
    }
}
