use std::fmt;


use crate::arith::{Mono, Rational};
use crate::curve::{CurveError, CurveModel, FFElement};

use super::fmat::FMat;
use super::ring::BaseRing;

/// Matrix with entries in `FF ⊗ S` for a base ring `S`, stored as one
/// function-field matrix per normal monomial of `S`.
#[derive(Clone, PartialEq, Eq)]
pub struct PMat {
    ring: BaseRing,
    terms: Vec<FMat>,
}

impl PMat {
    pub fn zeros(curve: &CurveModel, ring: &BaseRing, rows: usize, cols: usize) -> Self {
        PMat { ring: ring.clone(), terms: vec![FMat::zeros(curve, rows, cols); ring.dim()] }
    }

    pub fn identity(curve: &CurveModel, ring: &BaseRing, n: usize) -> Self {
        Self::constant(ring, FMat::identity(curve, n))
    }

    /// The matrix `m` with no parameter dependence.
    pub fn constant(ring: &BaseRing, m: FMat) -> Self {
        let mut terms = vec![FMat::zeros(m.curve(), m.rows(), m.cols()); ring.dim()];
        terms[0] = m;
        PMat { ring: ring.clone(), terms }
    }

    /// `sum_m m * M_m`, reduced to normal form.
    pub fn from_terms(curve: &CurveModel, ring: &BaseRing, rows: usize, cols: usize, terms: impl IntoIterator<Item = (Mono, FMat)>) -> Self {
        let mut r = Self::zeros(curve, ring, rows, cols);
        for (m, f) in terms {
            for (k, c) in ring.nf_mono(&m) {
                r.terms[*k] = r.terms[*k].add(&f.scale(c));
            }
        }
        r
    }

    pub fn from_dense(ring: &BaseRing, terms: Vec<FMat>) -> Self {
        assert_eq!(terms.len(), ring.dim(), "one matrix per normal monomial");
        PMat { ring: ring.clone(), terms }
    }

    pub fn ring(&self) -> &BaseRing {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.terms[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.terms[0].cols()
    }

    pub fn curve(&self) -> &CurveModel {
        self.terms[0].curve()
    }

    pub fn terms(&self) -> &[FMat] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> &FMat {
        &self.terms[i]
    }

    pub fn central(&self) -> &FMat {
        &self.terms[0]
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.is_zero())
    }

    /// Entry `(i, j)` as a list of function coefficients per normal monomial.
    pub fn entry(&self, i: usize, j: usize) -> Vec<FFElement> {
        self.terms.iter().map(|t| t.get(i, j).clone()).collect()
    }

    fn check(&self, o: &PMat) {
        assert!(self.ring == o.ring, "matrices over different base rings");
    }

    pub fn add(&self, o: &PMat) -> PMat {
        self.check(o);
        PMat { ring: self.ring.clone(), terms: self.terms.iter().zip(&o.terms).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &PMat) -> PMat {
        self.check(o);
        PMat { ring: self.ring.clone(), terms: self.terms.iter().zip(&o.terms).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn neg(&self) -> PMat {
        self.map(|t| t.neg())
    }

    pub fn scale(&self, c: &Rational) -> PMat {
        self.map(|t| t.scale(c))
    }

    pub fn map(&self, f: impl Fn(&FMat) -> FMat) -> PMat {
        PMat { ring: self.ring.clone(), terms: self.terms.iter().map(f).collect() }
    }

    pub fn mul(&self, o: &PMat) -> PMat {
        self.check(o);
        let curve = self.curve().clone();
        let mut terms = vec![FMat::zeros(&curve, self.rows(), o.cols()); self.ring.dim()];
        for (i, a) in self.terms.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.terms.iter().enumerate() {
                let prod = self.ring.mul_basis(i, j);
                if b.is_zero() || prod.is_empty() {
                    continue;
                }
                let ab = a.mul(b);
                for (k, c) in prod {
                    terms[*k] = terms[*k].add(&ab.scale(c));
                }
            }
        }
        PMat { ring: self.ring.clone(), terms }
    }

    /// Multiply by a matrix without parameter dependence on the right.
    pub fn mul_fmat(&self, m: &FMat) -> PMat {
        self.map(|t| t.mul(m))
    }

    /// Multiply by a matrix without parameter dependence on the left.
    pub fn lmul_fmat(&self, m: &FMat) -> PMat {
        self.map(|t| m.mul(t))
    }

    /// Multiply by a normal-form monomial.
    pub fn mul_mono(&self, m: &Mono) -> PMat {
        let curve = self.curve().clone();
        let mut r = PMat::zeros(&curve, &self.ring, self.rows(), self.cols());
        for (i, a) in self.terms.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let p = self.ring.monos()[i].mul(m);
            for (k, c) in self.ring.nf_mono(&p) {
                r.terms[*k] = r.terms[*k].add(&a.scale(c));
            }
        }
        r
    }

    /// Entrywise exterior derivative along the curve.
    pub fn d(&self) -> PMat {
        self.map(|t| t.d())
    }

    pub fn bracket(&self, o: &PMat) -> PMat {
        self.mul(o).sub(&o.mul(self))
    }

    /// Inverse; the central matrix must be invertible.
    pub fn inv(&self) -> Result<PMat, CurveError> {
        let g0i = self.terms[0].inv()?;
        if self.ring.is_field() {
            return Ok(PMat::constant(&self.ring, g0i));
        }
        // G = (1 + X) G0 with X = (G - G0) G0^-1 nilpotent
        let mut x = self.mul_fmat(&g0i);
        let n = self.rows();
        x.terms[0] = FMat::zeros(self.curve(), n, n);
        let neg = x.neg();
        let mut acc = PMat::identity(self.curve(), &self.ring, n);
        let mut pw = acc.clone();
        for _ in 0..self.ring.order() {
            pw = pw.mul(&neg);
            if pw.is_zero() {
                break;
            }
            acc = acc.add(&pw);
        }
        Ok(acc.lmul_fmat(&g0i))
    }

    /// Keep the terms of total degree `d`.
    pub fn homogeneous(&self, d: u32) -> PMat {
        let mut r = self.clone();
        for (i, t) in r.terms.iter_mut().enumerate() {
            if self.ring.degree(i) != d {
                *t = FMat::zeros(self.curve(), self.rows(), self.cols());
            }
        }
        r
    }

    /// Image under the restriction `S -> S_j` (drop degrees above `j`).
    pub fn restrict(&self, target: &BaseRing) -> PMat {
        let curve = self.curve().clone();
        let mut r = PMat::zeros(&curve, target, self.rows(), self.cols());
        for (i, t) in self.terms.iter().enumerate() {
            if t.is_zero() {
                continue;
            }
            for (k, c) in target.nf_mono(&self.ring.monos()[i]) {
                r.terms[*k] = r.terms[*k].add(&t.scale(c));
            }
        }
        r
    }

    /// Largest total degree with a nonzero term.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.iter().enumerate().filter(|(_, t)| !t.is_zero()).map(|(i, _)| self.ring.degree(i)).max()
    }

    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            if t.is_zero() {
                continue;
            }
            let m = self.ring.monos()[i].render(self.ring.names());
            if m.is_empty() {
                parts.push(t.render());
            } else {
                parts.push(format!("{m}*{}", t.render()));
            }
        }
        if parts.is_empty() {
            FMat::zeros(self.curve(), self.rows(), self.cols()).render()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Debug for PMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}
