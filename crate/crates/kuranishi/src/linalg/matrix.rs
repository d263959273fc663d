use std::fmt;

use crate::arith::Field;

use super::LinalgError;

/// Dense row-major matrix over an exact field.
#[derive(Clone, PartialEq)]
pub struct Matrix<F: Field> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix rows");
            data.extend(row);
        }
        Matrix { rows: r, cols, data }
    }

    pub fn from_cols(rows: usize, cols: Vec<Vec<F>>) -> Self {
        let c = cols.len();
        let mut m = Self::zeros(rows, c);
        for (j, col) in cols.into_iter().enumerate() {
            assert_eq!(col.len(), rows, "ragged matrix columns");
            for (i, v) in col.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<F> {
        self.row(i).to_vec()
    }

    pub fn col_vec(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|i| self.row_vec(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &Matrix<F>) -> Result<Matrix<F>, LinalgError> {
        if self.cols != o.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut r = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let idx = i * o.cols + j;
                        r.data[idx] = r.data[idx].clone() + &(a.clone() * b);
                    }
                }
            }
        }
        Ok(r)
    }

    pub fn mul_vec(&self, v: &[F]) -> Result<Vec<F>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = F::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc + &(a.clone() * b);
                    }
                }
                acc
            })
            .collect())
    }

    pub fn hstack(&self, o: &Matrix<F>) -> Result<Matrix<F>, LinalgError> {
        if self.rows != o.rows {
            return Err(LinalgError::DimensionMismatch("hstack row counts differ".into()));
        }
        let mut r = Self::zeros(self.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                r.set(i, j, self.get(i, j).clone());
            }
            for j in 0..o.cols {
                r.set(i, self.cols + j, o.get(i, j).clone());
            }
        }
        Ok(r)
    }

    pub fn vstack(&self, o: &Matrix<F>) -> Result<Matrix<F>, LinalgError> {
        if self.cols != o.cols {
            return Err(LinalgError::DimensionMismatch("vstack column counts differ".into()));
        }
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        Ok(Matrix { rows: self.rows + o.rows, cols: self.cols, data })
    }

    /// Reduced row-echelon form with pivots chosen in natural column order.
    pub fn rref(&self) -> (Matrix<F>, Vec<usize>) {
        let order: Vec<usize> = (0..self.cols).collect();
        self.rref_ordered(&order)
    }

    /// Reduced row-echelon form where pivot columns are searched in the
    /// order given by `priority` (a permutation of the column indices).
    pub fn rref_ordered(&self, priority: &[usize]) -> (Matrix<F>, Vec<usize>) {
        let mut rows: Vec<Vec<F>> = self.to_rows();
        let pivots = rref_rows(&mut rows, priority);
        let m = Matrix::from_rows(self.cols, rows);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel {x : Mx = 0}, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<F>> {
        let (r, piv) = self.rref();
        let mut is_piv = vec![false; self.cols];
        for &p in &piv {
            is_piv[p] = true;
        }
        let mut out = Vec::new();
        for f in 0..self.cols {
            if is_piv[f] {
                continue;
            }
            let mut v = vec![F::zero(); self.cols];
            v[f] = F::one();
            for (i, &p) in piv.iter().enumerate() {
                v[p] = -r.get(i, f).clone();
            }
            out.push(v);
        }
        out
    }
}

/// In-place RREF on a list of rows; returns pivot column per nonzero row and
/// drops zero rows.
pub(crate) fn rref_rows<F: Field>(rows: &mut Vec<Vec<F>>, priority: &[usize]) -> Vec<usize> {
    let pivots = eliminate(rows, priority);
    rows.truncate(pivots.len());
    pivots
}

/// Gauss-Jordan elimination over the listed columns only; rows below the
/// returned pivot count are zero on those columns but otherwise kept.
pub(crate) fn eliminate<F: Field>(rows: &mut [Vec<F>], priority: &[usize]) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for &c in priority {
        if r >= rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = F::one() / &rows[r][c];
        if !inv.is_one() {
            for v in rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = v.clone() * &inv;
                }
            }
        }
        let pivot_row = rows[r].clone();
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                row[j] = row[j].clone() - &(f.clone() * &pivot_row[j]);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

impl<F: Field> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for i in 0..self.rows {
            let r: Vec<String> = self.row(i).iter().map(|v| v.render()).collect();
            writeln!(f, "  [{}]", r.join(", "))?;
        }
        Ok(())
    }
}
