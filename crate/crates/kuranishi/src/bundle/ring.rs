use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::arith::{default_names, monomials_up_to, Mono, Rational, TruncatedPoly};
use crate::linalg::Matrix;
use crate::QPoly;

/// Coefficient ring `Q[t1..tN] / (I + m^(K+1))` with a basis of normal
/// monomials. `I` is spanned, modulo `m^(K+1)`, by the monomial multiples of
/// its generators; echelon pivots sit on the lowest monomial of each row.
#[derive(Clone)]
pub struct BaseRing(Arc<RingData>);

struct RingData {
    nvars: usize,
    order: u32,
    names: Vec<String>,
    gens: Vec<QPoly>,
    monos: Vec<Mono>,
    // normal form of every monomial of degree <= K
    nf: HashMap<Mono, Vec<(usize, Rational)>>,
    table: Vec<Vec<Vec<(usize, Rational)>>>,
}

impl BaseRing {
    /// The rational numbers (no parameters).
    pub fn field() -> Self {
        Self::truncated(0, 0)
    }

    pub fn truncated(nvars: usize, order: u32) -> Self {
        Self::quotient(nvars, order, &[])
    }

    pub fn with_names(nvars: usize, order: u32, gens: &[QPoly], names: Vec<String>) -> Self {
        assert_eq!(names.len(), nvars, "one name per variable");
        Self::build(nvars, order, gens, names)
    }

    pub fn quotient(nvars: usize, order: u32, gens: &[QPoly]) -> Self {
        Self::build(nvars, order, gens, default_names(nvars))
    }

    fn build(nvars: usize, order: u32, gens: &[QPoly], names: Vec<String>) -> Self {
        let all = monomials_up_to(nvars, order);
        let pos: HashMap<Mono, usize> = all.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let gens: Vec<QPoly> = gens.iter().map(|g| g.truncate(order)).filter(|g| !g.is_zero()).collect();
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for g in &gens {
            let lo = g.min_degree().unwrap_or(0);
            for b in all.iter().filter(|b| b.degree() + lo <= order) {
                let mut row = vec![Rational::zero(); all.len()];
                for (m, c) in g.terms() {
                    let p = m.mul(b);
                    if p.degree() <= order {
                        row[pos[&p]] += c;
                    }
                }
                if row.iter().any(|v| !v.is_zero()) {
                    rows.push(row);
                }
            }
        }
        let (ech, piv) = if rows.is_empty() { (Matrix::zeros(0, all.len()), Vec::new()) } else { Matrix::from_rows(all.len(), rows).rref() };
        let mut is_piv = vec![None; all.len()];
        for (r, &p) in piv.iter().enumerate() {
            is_piv[p] = Some(r);
        }
        let normal: Vec<usize> = (0..all.len()).filter(|&i| is_piv[i].is_none()).collect();
        let nidx: HashMap<usize, usize> = normal.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        assert!(normal.first() == Some(&0), "ideal generators must lie in the maximal ideal");
        let monos: Vec<Mono> = normal.iter().map(|&i| all[i].clone()).collect();
        let mut nf = HashMap::new();
        for (i, m) in all.iter().enumerate() {
            let v = match is_piv[i] {
                None => vec![(nidx[&i], Rational::one())],
                Some(r) => normal.iter().enumerate().filter(|(_, &j)| !ech.get(r, j).is_zero()).map(|(k, &j)| (k, -ech.get(r, j).clone())).collect(),
            };
            nf.insert(m.clone(), v);
        }
        let mut table = vec![vec![Vec::new(); monos.len()]; monos.len()];
        for (i, a) in monos.iter().enumerate() {
            for (j, b) in monos.iter().enumerate() {
                let p = a.mul(b);
                if p.degree() <= order {
                    table[i][j] = nf[&p].clone();
                }
            }
        }
        BaseRing(Arc::new(RingData { nvars, order, names, gens, monos, nf, table }))
    }

    pub fn nvars(&self) -> usize {
        self.0.nvars
    }

    pub fn order(&self) -> u32 {
        self.0.order
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn generators(&self) -> &[QPoly] {
        &self.0.gens
    }

    /// Dimension over Q.
    pub fn dim(&self) -> usize {
        self.0.monos.len()
    }

    pub fn monos(&self) -> &[Mono] {
        &self.0.monos
    }

    pub fn is_field(&self) -> bool {
        self.dim() == 1
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.0.monos[i].degree()
    }

    /// Product of basis monomials `i` and `j` in normal coordinates.
    pub fn mul_basis(&self, i: usize, j: usize) -> &[(usize, Rational)] {
        &self.0.table[i][j]
    }

    /// Normal form of a monomial; empty beyond the truncation order.
    pub fn nf_mono(&self, m: &Mono) -> &[(usize, Rational)] {
        self.0.nf.get(m).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn nf(&self, p: &QPoly) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim()];
        for (m, c) in p.terms() {
            for (k, a) in self.nf_mono(m) {
                v[*k] += c * a;
            }
        }
        v
    }

    pub fn to_poly(&self, v: &[Rational]) -> QPoly {
        TruncatedPoly::from_terms(self.nvars(), self.order(), self.0.monos.iter().cloned().zip(v.iter().cloned()))
    }

    pub fn mul(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim()];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                for (k, c) in self.mul_basis(i, j) {
                    v[*k] += x * y * c;
                }
            }
        }
        v
    }

    /// The same presentation truncated at order `j <= K`.
    pub fn restrict(&self, j: u32) -> BaseRing {
        assert!(j <= self.order(), "restriction order exceeds the ring order");
        Self::build(self.nvars(), j, &self.0.gens, self.0.names.clone())
    }

    /// Index of the constant monomial.
    pub fn one_index(&self) -> usize {
        0
    }

    pub fn render(&self) -> String {
        if self.nvars() == 0 {
            return "Q".into();
        }
        let vars = self.0.names.join(",");
        let mut parts = vec![format!("({vars})^{}", self.order() + 1)];
        parts.extend(self.0.gens.iter().map(|g| g.render(&self.0.names)));
        format!("Q[{vars}]/({})", parts.join(", "))
    }
}

impl PartialEq for BaseRing {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || (self.0.nvars == o.0.nvars && self.0.order == o.0.order && self.0.monos == o.0.monos && self.0.gens == o.0.gens)
    }
}

impl Eq for BaseRing {}

impl fmt::Debug for BaseRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}
