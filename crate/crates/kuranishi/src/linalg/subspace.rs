use crate::arith::Field;

use super::matrix::{eliminate, rref_rows, Matrix};
use super::LinalgError;

fn natural(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Precomputed elimination of a matrix for repeated canonical solves.
///
/// The canonical solution sets every free variable to zero; pivot variables
/// are the first independent columns in the priority order.
#[derive(Clone, Debug)]
pub struct Solver<F: Field> {
    rows: usize,
    cols: usize,
    pivots: Vec<usize>,
    transform: Matrix<F>,
}

impl<F: Field> Solver<F> {
    pub fn new(m: &Matrix<F>) -> Self {
        Self::with_priority(m, &natural(m.cols()))
    }

    pub fn with_priority(m: &Matrix<F>, priority: &[usize]) -> Self {
        let (r, c) = (m.rows(), m.cols());
        let mut rows: Vec<Vec<F>> = (0..r)
            .map(|i| {
                let mut v = m.row_vec(i);
                v.extend((0..r).map(|j| if i == j { F::one() } else { F::zero() }));
                v
            })
            .collect();
        let pivots = eliminate(&mut rows, priority);
        let transform = Matrix::from_rows(r, rows.into_iter().map(|v| v[c..].to_vec()).collect());
        Solver { rows: r, cols: c, pivots, transform }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn solve(&self, b: &[F]) -> Result<Option<Vec<F>>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "right-hand side of length {} for a system with {} rows",
                b.len(),
                self.rows
            )));
        }
        let c = self.transform.mul_vec(b)?;
        if c[self.pivots.len()..].iter().any(|v| !v.is_zero()) {
            return Ok(None);
        }
        let mut x = vec![F::zero(); self.cols];
        for (i, &p) in self.pivots.iter().enumerate() {
            x[p] = c[i].clone();
        }
        Ok(Some(x))
    }
}

/// Canonical solution of `M x = b` (free variables zero), or `None`.
pub fn solve<F: Field>(m: &Matrix<F>, b: &[F]) -> Result<Option<Vec<F>>, LinalgError> {
    Solver::new(m).solve(b)
}

/// Subspace of F^n held as a reduced row-echelon basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<F: Field> {
    ambient: usize,
    basis: Vec<Vec<F>>,
    pivots: Vec<usize>,
}

impl<F: Field> Subspace<F> {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Self::span(ambient, Matrix::<F>::identity(ambient).to_rows())
    }

    pub fn span(ambient: usize, vectors: Vec<Vec<F>>) -> Self {
        Self::span_ordered(ambient, vectors, &natural(ambient))
    }

    /// Span with echelon pivots searched in `priority` order.
    pub fn span_ordered(ambient: usize, mut vectors: Vec<Vec<F>>, priority: &[usize]) -> Self {
        for v in &vectors {
            assert_eq!(v.len(), ambient, "vector length differs from ambient dimension");
        }
        let pivots = rref_rows(&mut vectors, priority);
        Subspace { ambient, basis: vectors, pivots }
    }

    pub fn kernel_of(m: &Matrix<F>) -> Self {
        Self::span(m.cols(), m.kernel())
    }

    pub fn image_of(m: &Matrix<F>) -> Self {
        Self::span(m.rows(), m.transpose().to_rows())
    }

    pub fn image_of_ordered(m: &Matrix<F>, priority: &[usize]) -> Self {
        Self::span_ordered(m.rows(), m.transpose().to_rows(), priority)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<F>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Subtract the basis components read off at the pivots.
    pub fn reduce(&self, v: &[F]) -> Vec<F> {
        let mut r = v.to_vec();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            let c = r[p].clone();
            if c.is_zero() {
                continue;
            }
            for (x, y) in r.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = x.clone() - &(c.clone() * y);
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &[F]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Coordinates along the echelon basis, if `v` lies in the subspace.
    pub fn coords(&self, v: &[F]) -> Option<Vec<F>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    pub fn combine(&self, c: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.ambient];
        for (b, a) in self.basis.iter().zip(c) {
            if a.is_zero() {
                continue;
            }
            for (x, y) in out.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = x.clone() + &(a.clone() * y);
                }
            }
        }
        out
    }

    /// Index of the first basis vector of `self` not contained in `other`.
    pub fn first_outside(&self, other: &Subspace<F>) -> Option<usize> {
        self.basis.iter().position(|b| !other.contains(b))
    }

    pub fn sum(&self, other: &Subspace<F>) -> Subspace<F> {
        let mut v = self.basis.clone();
        v.extend(other.basis.iter().cloned());
        Subspace::span(self.ambient, v)
    }
}

/// Quotient `numerator / divisor` with canonical lifts.
///
/// Lifts are the echelon basis of the numerator reduced modulo the divisor,
/// so each lift vanishes at every divisor pivot.
#[derive(Clone, Debug)]
pub struct QuotientSpace<F: Field> {
    numerator: Subspace<F>,
    divisor: Subspace<F>,
    lifts: Vec<Vec<F>>,
    lift_pivots: Vec<usize>,
}

impl<F: Field> QuotientSpace<F> {
    pub fn new(numerator: Subspace<F>, divisor: Subspace<F>) -> Result<Self, LinalgError> {
        let order = natural(numerator.ambient());
        Self::with_priority(numerator, divisor, &order)
    }

    pub fn with_priority(numerator: Subspace<F>, divisor: Subspace<F>, priority: &[usize]) -> Result<Self, LinalgError> {
        if numerator.ambient() != divisor.ambient() {
            return Err(LinalgError::DimensionMismatch("quotient of subspaces in different ambient spaces".into()));
        }
        if let Some(i) = divisor.first_outside(&numerator) {
            return Err(LinalgError::NotContained(i));
        }
        let mut reduced: Vec<Vec<F>> = numerator.basis().iter().map(|b| divisor.reduce(b)).collect();
        let lift_pivots = rref_rows(&mut reduced, priority);
        Ok(QuotientSpace { numerator, divisor, lifts: reduced, lift_pivots })
    }

    pub fn dim(&self) -> usize {
        self.lifts.len()
    }

    pub fn numerator(&self) -> &Subspace<F> {
        &self.numerator
    }

    pub fn divisor(&self) -> &Subspace<F> {
        &self.divisor
    }

    pub fn lifts(&self) -> &[Vec<F>] {
        &self.lifts
    }

    pub fn ambient(&self) -> usize {
        self.numerator.ambient()
    }

    /// The cross-section: class coordinates to a canonical representative.
    pub fn sigma(&self, c: &[F]) -> Result<Vec<F>, LinalgError> {
        if c.len() != self.dim() {
            return Err(LinalgError::DimensionMismatch(format!(
                "class of length {} for a quotient of dimension {}",
                c.len(),
                self.dim()
            )));
        }
        let mut out = vec![F::zero(); self.ambient()];
        for (l, a) in self.lifts.iter().zip(c) {
            if a.is_zero() {
                continue;
            }
            for (x, y) in out.iter_mut().zip(l) {
                if !y.is_zero() {
                    *x = x.clone() + &(a.clone() * y);
                }
            }
        }
        Ok(out)
    }

    /// Class coordinates of a numerator element.
    pub fn project(&self, v: &[F]) -> Result<Vec<F>, LinalgError> {
        if v.len() != self.ambient() {
            return Err(LinalgError::DimensionMismatch("vector outside the ambient space".into()));
        }
        if !self.numerator.contains(v) {
            return Err(LinalgError::NotInNumerator);
        }
        let r = self.divisor.reduce(v);
        Ok(self.lift_pivots.iter().map(|&p| r[p].clone()).collect())
    }

    pub fn is_zero_class(&self, v: &[F]) -> Result<bool, LinalgError> {
        Ok(self.project(v)?.iter().all(|x| x.is_zero()))
    }
}

/// Coordinates with respect to an arbitrary (non-echelon) independent family.
#[derive(Clone, Debug)]
pub struct BasisCoords<F: Field> {
    rows: Vec<Vec<F>>,
    span: Subspace<F>,
    // express echelon coordinates in terms of `rows`
    to_rows: Matrix<F>,
}

impl<F: Field> BasisCoords<F> {
    pub fn new(ambient: usize, rows: Vec<Vec<F>>) -> Result<Self, LinalgError> {
        let span = Subspace::span(ambient, rows.clone());
        if span.dim() != rows.len() {
            return Err(LinalgError::Dependent);
        }
        let k = rows.len();
        // rows = C * echelon, C_ij = rows[i][pivot_j]; invert C.
        let c = Matrix::from_rows(k, rows.iter().map(|r| span.pivots().iter().map(|&p| r[p].clone()).collect()).collect());
        let to_rows = invert(&c).ok_or(LinalgError::Dependent)?;
        Ok(BasisCoords { rows, span, to_rows })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<F>] {
        &self.rows
    }

    pub fn coords(&self, v: &[F]) -> Option<Vec<F>> {
        let e = self.span.coords(v)?;
        // v = e * echelon = e * C^{-1} * rows
        let t = self.to_rows.transpose().mul_vec(&e).expect("square inverse");
        Some(t)
    }

    pub fn combine(&self, c: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.span.ambient()];
        for (r, a) in self.rows.iter().zip(c) {
            if a.is_zero() {
                continue;
            }
            for (x, y) in out.iter_mut().zip(r) {
                if !y.is_zero() {
                    *x = x.clone() + &(a.clone() * y);
                }
            }
        }
        out
    }
}

pub fn invert<F: Field>(m: &Matrix<F>) -> Option<Matrix<F>> {
    let n = m.rows();
    if n != m.cols() {
        return None;
    }
    let s = Solver::new(m);
    if s.rank() != n {
        return None;
    }
    let cols: Vec<Vec<F>> = (0..n)
        .map(|j| {
            let e: Vec<F> = (0..n).map(|i| if i == j { F::one() } else { F::zero() }).collect();
            s.solve(&e).unwrap().unwrap()
        })
        .collect();
    Some(Matrix::from_cols(n, cols))
}

/// Re-choose a basis adapted to a filtration by levels.
///
/// `values[i]` are the values of linear functionals on `basis[i]`; functional
/// `j` detects level `levels[j]`. The result spans the same space and each
/// returned vector `v` has level `l` when every functional of level above `l`
/// vanishes on `v` and some functional of level `l` does not (level 0 when
/// all vanish). Lower-level vectors come first.
pub fn filtration_basis<F: Field>(basis: &[Vec<F>], values: &[Vec<F>], levels: &[u32]) -> (Vec<Vec<F>>, Vec<u32>) {
    let k = basis.len();
    if k == 0 {
        return (Vec::new(), Vec::new());
    }
    let n = basis[0].len();
    let m = levels.len();
    let mut rows: Vec<Vec<F>> = (0..k)
        .map(|i| {
            let mut v = values[i].clone();
            v.extend(basis[i].iter().cloned());
            v
        })
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|a, b| levels[*b].cmp(&levels[*a]).then(a.cmp(b)));
    order.extend(m..m + n);
    let piv = rref_rows(&mut rows, &order);
    let mut out: Vec<(u32, Vec<F>)> = rows
        .into_iter()
        .zip(&piv)
        .map(|(r, &p)| (if p < m { levels[p] } else { 0 }, r[m..].to_vec()))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    let lv = out.iter().map(|x| x.0).collect();
    (out.into_iter().map(|x| x.1).collect(), lv)
}
