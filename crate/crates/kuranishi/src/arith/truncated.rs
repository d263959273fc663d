use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use super::field::Field;
use super::ArithError;

/// Exponent vector of a monomial in t1..tN. Ordered graded-lexicographically:
/// lower total degree first, then larger exponents of earlier variables first.
#[derive(Clone, PartialEq, Eq, Hash, Debug, serde::Serialize, serde::Deserialize)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(n: usize) -> Mono {
        Mono(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Mono {
        let mut v = vec![0; n];
        v[i] = 1;
        Mono(v)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        Mono(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// `self / o` when `o` divides `self`.
    pub fn div(&self, o: &Mono) -> Option<Mono> {
        let mut v = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&o.0) {
            if b > a {
                return None;
            }
            v.push(a - b);
        }
        Some(Mono(v))
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(names[i].clone()),
                _ => parts.push(format!("{}^{}", names[i], e)),
            }
        }
        parts.join("*")
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| o.0.cmp(&self.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// All monomials of exact degree `d` in `n` variables, graded-lex order.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Mono>) {
        let n = cur.len();
        if i + 1 == n {
            cur[i] = left;
            out.push(Mono(cur.clone()));
            cur[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    if n == 0 {
        if d == 0 {
            out.push(Mono(Vec::new()));
        }
        return out;
    }
    rec(0, d, &mut cur, &mut out);
    out
}

/// All monomials of degree at most `k`, graded-lex order.
pub fn monomials_up_to(n: usize, k: u32) -> Vec<Mono> {
    (0..=k).flat_map(|d| monomials_of_degree(n, d)).collect()
}

pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("t{i}")).collect()
}

/// Element of F[t1..tN]/(t1..tN)^(K+1), sparse.
#[derive(Clone, PartialEq)]
pub struct TruncatedPoly<F: Field> {
    nvars: usize,
    order: u32,
    terms: BTreeMap<Mono, F>,
}

impl<F: Field> TruncatedPoly<F> {
    pub fn zero(nvars: usize, order: u32) -> Self {
        TruncatedPoly { nvars, order, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, order: u32, c: F) -> Self {
        let mut p = Self::zero(nvars, order);
        p.add_term(Mono::one(nvars), c);
        p
    }

    pub fn one(nvars: usize, order: u32) -> Self {
        Self::constant(nvars, order, F::one())
    }

    pub fn var(nvars: usize, order: u32, i: usize) -> Self {
        let mut p = Self::zero(nvars, order);
        p.add_term(Mono::var(nvars, i), F::one());
        p
    }

    pub fn from_terms(nvars: usize, order: u32, terms: impl IntoIterator<Item = (Mono, F)>) -> Self {
        let mut p = Self::zero(nvars, order);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Mono, F> {
        &self.terms
    }

    pub fn coeff(&self, m: &Mono) -> F {
        self.terms.get(m).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add `c * m`, dropping it if beyond the truncation order.
    pub fn add_term(&mut self, m: Mono, c: F) {
        assert_eq!(m.nvars(), self.nvars, "monomial arity");
        if m.degree() > self.order || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.clone() + &c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check_shape(&self, o: &Self) -> Result<(), ArithError> {
        if self.nvars != o.nvars || self.order != o.order {
            return Err(ArithError::DimensionMismatch(format!(
                "truncated polynomials over (N={}, K={}) and (N={}, K={})",
                self.nvars, self.order, o.nvars, o.order
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, ArithError> {
        self.check_shape(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, ArithError> {
        self.check_shape(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), -c.clone());
        }
        Ok(r)
    }

    pub fn neg(&self) -> Self {
        self.scale(&(-F::one()))
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut r = Self::zero(self.nvars, self.order);
        for (m, a) in &self.terms {
            r.add_term(m.clone(), a.clone() * c);
        }
        r
    }

    pub fn truncated_mul(&self, o: &Self) -> Result<Self, ArithError> {
        self.check_shape(o)?;
        let mut r = Self::zero(self.nvars, self.order);
        for (m1, a) in &self.terms {
            for (m2, b) in &o.terms {
                if m1.degree() + m2.degree() <= self.order {
                    r.add_term(m1.mul(m2), a.clone() * b);
                }
            }
        }
        Ok(r)
    }

    pub fn constant_term(&self) -> F {
        self.coeff(&Mono::one(self.nvars))
    }

    pub fn truncated_inverse(&self) -> Result<Self, ArithError> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(ArithError::NotAUnit);
        }
        let cinv = F::one() / &c;
        // a = c (1 + u) with u in the maximal ideal; 1/(1+u) = sum (-u)^k.
        let mut u = self.scale(&cinv);
        u.terms.remove(&Mono::one(self.nvars));
        let neg_u = u.neg();
        let mut term = Self::one(self.nvars, self.order);
        let mut acc = Self::one(self.nvars, self.order);
        for _ in 0..self.order {
            term = term.truncated_mul(&neg_u)?;
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc.scale(&cinv))
    }

    pub fn homogeneous_part(&self, d: u32) -> Result<Self, ArithError> {
        if d > self.order {
            return Err(ArithError::Range(format!("degree {d} exceeds truncation order {}", self.order)));
        }
        let mut r = Self::zero(self.nvars, self.order);
        for (m, c) in &self.terms {
            if m.degree() == d {
                r.add_term(m.clone(), c.clone());
            }
        }
        Ok(r)
    }

    /// Reduce to order `j`, discarding higher terms.
    pub fn truncate(&self, j: u32) -> Self {
        let mut r = Self::zero(self.nvars, j);
        for (m, c) in &self.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    /// Change the truncation order upward (no new information) or downward.
    pub fn with_order(&self, k: u32) -> Self {
        self.truncate(k)
    }

    /// Lowest total degree of a stored term.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(Mono::degree).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(Mono::degree).max()
    }

    pub fn mul_mono(&self, m: &Mono) -> Self {
        let mut r = Self::zero(self.nvars, self.order);
        for (k, c) in &self.terms {
            r.add_term(k.mul(m), c.clone());
        }
        r
    }

    /// Canonical text form: graded-lex order, explicit signs, `^` powers.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (m, c) in &self.terms {
            let mt = m.render(names);
            let cs = c.render();
            let neg = cs.starts_with('-');
            let abs = if neg { cs[1..].to_string() } else { cs };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            if mt.is_empty() {
                out.push_str(&abs);
            } else if abs == "1" {
                out.push_str(&mt);
            } else {
                out.push_str(&abs);
                out.push('*');
                out.push_str(&mt);
            }
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }
}

impl<F: Field> fmt::Debug for TruncatedPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&default_names(self.nvars)))
    }
}
