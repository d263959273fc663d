use std::fmt;

use num_traits::Zero;

use crate::arith::Rational;
use crate::curve::{CurveError, CurveModel, FFElement};

/// Dense matrix of function-field elements. Matrices of differentials are
/// stored through their `dx` (or `dz`) coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FMat {
    rows: usize,
    cols: usize,
    e: Vec<FFElement>,
}

impl FMat {
    pub fn zeros(curve: &CurveModel, rows: usize, cols: usize) -> Self {
        FMat { rows, cols, e: vec![curve.zero(); rows * cols] }
    }

    pub fn identity(curve: &CurveModel, n: usize) -> Self {
        let mut m = Self::zeros(curve, n, n);
        for i in 0..n {
            m.set(i, i, curve.one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<FFElement>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut e = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            e.extend(row);
        }
        FMat { rows: r, cols: c, e }
    }

    pub fn scalar(curve: &CurveModel, n: usize, f: &FFElement) -> Self {
        let mut m = Self::zeros(curve, n, n);
        for i in 0..n {
            m.set(i, i, f.clone());
        }
        m
    }

    /// The matrix unit `E_ij` times `f`.
    pub fn unit(curve: &CurveModel, rows: usize, cols: usize, i: usize, j: usize, f: FFElement) -> Self {
        let mut m = Self::zeros(curve, rows, cols);
        m.set(i, j, f);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &FFElement {
        &self.e[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FFElement) {
        self.e[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[FFElement] {
        &self.e
    }

    pub fn curve(&self) -> &CurveModel {
        self.e[0].curve()
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|x| x.is_zero())
    }

    pub fn map(&self, f: impl Fn(&FFElement) -> FFElement) -> FMat {
        FMat { rows: self.rows, cols: self.cols, e: self.e.iter().map(f).collect() }
    }

    pub fn add(&self, o: &FMat) -> FMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shapes differ");
        FMat { rows: self.rows, cols: self.cols, e: self.e.iter().zip(&o.e).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &FMat) -> FMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shapes differ");
        FMat { rows: self.rows, cols: self.cols, e: self.e.iter().zip(&o.e).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn neg(&self) -> FMat {
        self.map(|a| a.neg())
    }

    pub fn scale(&self, c: &Rational) -> FMat {
        self.map(|a| a.scale(c))
    }

    pub fn mul_fn(&self, f: &FFElement) -> FMat {
        self.map(|a| a.mul(f))
    }

    pub fn mul(&self, o: &FMat) -> FMat {
        assert_eq!(self.cols, o.rows, "matrix product shapes");
        let curve = self.curve().clone();
        let mut r = FMat::zeros(&curve, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let v = r.get(i, j).add(&a.mul(b));
                        r.set(i, j, v);
                    }
                }
            }
        }
        r
    }

    pub fn transpose(&self) -> FMat {
        let mut t = FMat::zeros(self.curve(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Entrywise exterior derivative (result holds `dx` coefficients).
    pub fn d(&self) -> FMat {
        self.map(|a| a.exterior_d().coeff().clone())
    }

    pub fn trace(&self) -> FFElement {
        let mut s = self.curve().zero();
        for i in 0..self.rows.min(self.cols) {
            s = s.add(self.get(i, i));
        }
        s
    }

    pub fn det(&self) -> FFElement {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let curve = self.curve().clone();
        match n {
            0 => curve.one(),
            1 => self.get(0, 0).clone(),
            2 => self.get(0, 0).mul(self.get(1, 1)).sub(&self.get(0, 1).mul(self.get(1, 0))),
            _ => {
                // expansion along the first row
                let mut s = curve.zero();
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_zero() {
                        continue;
                    }
                    let minor = self.minor(0, j);
                    let t = a.mul(&minor.det());
                    s = if j % 2 == 0 { s.add(&t) } else { s.sub(&t) };
                }
                s
            }
        }
    }

    fn minor(&self, r: usize, c: usize) -> FMat {
        let rows: Vec<Vec<FFElement>> = (0..self.rows)
            .filter(|&i| i != r)
            .map(|i| (0..self.cols).filter(|&j| j != c).map(|j| self.get(i, j).clone()).collect())
            .collect();
        FMat::from_rows(rows)
    }

    /// Inverse via the adjugate; fails when the determinant is not a unit
    /// of the function field with marked support.
    pub fn inv(&self) -> Result<FMat, CurveError> {
        let n = self.rows;
        assert_eq!(n, self.cols, "inverse of a non-square matrix");
        let d = self.det();
        let di = d.inv()?;
        if n == 1 {
            return Ok(FMat::from_rows(vec![vec![di]]));
        }
        let mut r = FMat::zeros(self.curve(), n, n);
        for i in 0..n {
            for j in 0..n {
                let c = self.minor(j, i).det();
                let c = if (i + j) % 2 == 0 { c } else { c.neg() };
                r.set(i, j, c.mul(&di));
            }
        }
        Ok(r)
    }

    /// `[A, M] = AM - MA`.
    pub fn bracket(&self, o: &FMat) -> FMat {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn constant_entries(&self) -> Option<Vec<Rational>> {
        self.e.iter().map(|x| if x.is_zero() { Some(Rational::zero()) } else { x.constant_value() }).collect()
    }

    pub fn render(&self) -> String {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                let r: Vec<String> = (0..self.cols).map(|j| self.get(i, j).render()).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

impl fmt::Debug for FMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}
