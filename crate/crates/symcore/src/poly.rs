//! Sparse multivariate polynomials with integer coefficients.
//!
//! Terms are kept sorted in descending lexicographic order, where a smaller
//! variable id has higher priority.

use crate::int::Int;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use smallvec::SmallVec;
use std::cmp::Ordering;
use std::collections::HashMap;

pub type Var = u32;
/// Sparse exponent vector, sorted by variable id, exponents nonzero.
pub type Mono = SmallVec<[(Var, u32); 4]>;

pub fn mono_cmp(a: &Mono, b: &Mono) -> Ordering {
    let mut i = 0;
    loop {
        match (a.get(i), b.get(i)) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(&(va, ea)), Some(&(vb, eb))) => {
                if va != vb {
                    return if va < vb {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    };
                }
                if ea != eb {
                    return ea.cmp(&eb);
                }
            }
        }
        i += 1;
    }
}

pub fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = Mono::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (va, ea) = a[i];
        let (vb, eb) = b[j];
        match va.cmp(&vb) {
            Ordering::Less => {
                out.push((va, ea));
                i += 1;
            }
            Ordering::Greater => {
                out.push((vb, eb));
                j += 1;
            }
            Ordering::Equal => {
                out.push((va, ea + eb));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// `a / b` when `b` divides `a`.
pub fn mono_div(a: &Mono, b: &Mono) -> Option<Mono> {
    let mut out = Mono::with_capacity(a.len());
    let mut j = 0;
    for &(va, ea) in a.iter() {
        if j < b.len() && b[j].0 < va {
            return None;
        }
        if j < b.len() && b[j].0 == va {
            let eb = b[j].1;
            j += 1;
            if eb > ea {
                return None;
            }
            if ea > eb {
                out.push((va, ea - eb));
            }
        } else {
            out.push((va, ea));
        }
    }
    if j < b.len() {
        return None;
    }
    Some(out)
}

pub fn mono_gcd(a: &Mono, b: &Mono) -> Mono {
    let mut out = Mono::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push((a[i].0, a[i].1.min(b[j].1)));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub fn mono_degree(m: &Mono, v: Var) -> u32 {
    m.iter().find(|(w, _)| *w == v).map(|(_, e)| *e).unwrap_or(0)
}

#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Poly {
    pub(crate) terms: Vec<(Mono, Int)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Int::one())
    }

    pub fn constant(c: Int) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(Mono::new(), c)],
            }
        }
    }

    pub fn var(v: Var) -> Poly {
        Poly {
            terms: vec![(smallvec::smallvec![(v, 1)], Int::one())],
        }
    }

    pub fn monomial(m: Mono, c: Int) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from unsorted terms, combining duplicates.
    pub fn from_terms(mut terms: Vec<(Mono, Int)>) -> Poly {
        terms.sort_by(|a, b| mono_cmp(&b.0, &a.0));
        let mut out: Vec<(Mono, Int)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            if let Some(last) = out.last_mut() {
                if last.0 == m {
                    last.1 = last.1.add(&c);
                    continue;
                }
            }
            out.push((m, c));
        }
        out.retain(|(_, c)| !c.is_zero());
        Poly { terms: out }
    }

    pub fn terms(&self) -> &[(Mono, Int)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_empty())
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_empty() && self.terms[0].1.is_one()
    }

    pub fn constant_value(&self) -> Option<Int> {
        if self.terms.is_empty() {
            Some(Int::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn lc(&self) -> &Int {
        &self.terms[0].1
    }

    pub fn lm(&self) -> &Mono {
        &self.terms[0].0
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    fn merge(&self, o: &Poly, negate: bool) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &o.terms;
        while i < a.len() && j < b.len() {
            match mono_cmp(&a[i].0, &b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { b[j].1.neg() } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate {
                        a[i].1.sub(&b[j].1)
                    } else {
                        a[i].1.add(&b[j].1)
                    };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for t in &b[j..] {
            let c = if negate { t.1.neg() } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        Poly { terms: out }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        self.merge(o, false)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        if o.is_zero() {
            return self.clone();
        }
        self.merge(o, true)
    }

    pub fn scale(&self, c: &Int) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        Poly {
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d.mul(c))).collect(),
        }
    }

    pub fn div_int_exact(&self, c: &Int) -> Poly {
        if c.is_one() {
            return self.clone();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, d)| (m.clone(), d.div_exact(c)))
                .collect(),
        }
    }

    /// Multiplication by a single term preserves the term order.
    pub fn mul_term(&self, m: &Mono, c: &Int) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, d)| (mono_mul(n, m), d.mul(c)))
                .collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        if o.terms.len() == 1 {
            return self.mul_term(&o.terms[0].0, &o.terms[0].1);
        }
        if self.terms.len() == 1 {
            return o.mul_term(&self.terms[0].0, &self.terms[0].1);
        }
        let (small, large) = if self.terms.len() <= o.terms.len() {
            (self, o)
        } else {
            (o, self)
        };
        let mut acc: HashMap<Mono, Int> =
            HashMap::with_capacity(small.terms.len() * large.terms.len());
        for (m1, c1) in &small.terms {
            for (m2, c2) in &large.terms {
                let m = mono_mul(m1, m2);
                let c = c1.mul(c2);
                match acc.get_mut(&m) {
                    Some(e) => *e = e.add(&c),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Poly::from_terms(acc.into_iter().collect())
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact quotient `self / b`, or `None` if `b` does not divide `self`.
    pub fn div_exact(&self, b: &Poly) -> Option<Poly> {
        assert!(!b.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if b.terms.len() == 1 {
            let (bm, bc) = &b.terms[0];
            let mut terms = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                let q = mono_div(m, bm)?;
                if !bc.divides(c) {
                    return None;
                }
                terms.push((q, c.div_exact(bc)));
            }
            return Some(Poly { terms });
        }
        let (bm, bc) = &b.terms[0];
        let mut r = self.clone();
        let mut q: Vec<(Mono, Int)> = Vec::new();
        while !r.is_zero() {
            let (rm, rc) = &r.terms[0];
            let qm = mono_div(rm, bm)?;
            if !bc.divides(rc) {
                return None;
            }
            let qc = rc.div_exact(bc);
            r = r.sub(&b.mul_term(&qm, &qc));
            q.push((qm, qc));
        }
        Some(Poly { terms: q })
    }

    /// Sorted list of variables occurring in the polynomial.
    pub fn vars(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self
            .terms
            .iter()
            .flat_map(|(m, _)| m.iter().map(|(v, _)| *v))
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn has_var(&self, v: Var) -> bool {
        self.terms
            .iter()
            .any(|(m, _)| m.iter().any(|(w, _)| *w == v))
    }

    pub fn degree(&self, v: Var) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| mono_degree(m, v))
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.iter().map(|(_, e)| *e).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Coefficients with respect to `v`, indexed by degree. Each coefficient is free of `v`.
    pub fn coeffs_in(&self, v: Var) -> Vec<Poly> {
        let d = self.degree(v) as usize;
        let mut out: Vec<Vec<(Mono, Int)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let k = mono_degree(m, v) as usize;
            let rest: Mono = m.iter().filter(|(w, _)| *w != v).cloned().collect();
            out[k].push((rest, c.clone()));
        }
        out.into_iter().map(|terms| Poly { terms }).collect()
    }

    pub fn from_coeffs_in(v: Var, coeffs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (k, c) in coeffs.iter().enumerate() {
            if k == 0 {
                terms.extend(c.terms.iter().cloned());
            } else {
                let m: Mono = smallvec::smallvec![(v, k as u32)];
                for (n, d) in &c.terms {
                    terms.push((mono_mul(n, &m), d.clone()));
                }
            }
        }
        Poly::from_terms(terms)
    }

    /// Positive gcd of the integer coefficients.
    pub fn content(&self) -> Int {
        let mut g = Int::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Largest monomial dividing every term.
    pub fn mono_content(&self) -> Mono {
        let mut it = self.terms.iter();
        let mut g = match it.next() {
            Some((m, _)) => m.clone(),
            None => return Mono::new(),
        };
        for (m, _) in it {
            if g.is_empty() {
                break;
            }
            g = mono_gcd(&g, m);
        }
        g
    }

    pub fn div_mono(&self, m: &Mono) -> Poly {
        if m.is_empty() {
            return self.clone();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (mono_div(n, m).expect("monomial divides"), c.clone()))
                .collect(),
        }
    }

    /// Multiplies by -1 if needed so that the leading coefficient is positive.
    pub fn normalize_sign(&self) -> Poly {
        if !self.is_zero() && self.lc().is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let e = mono_degree(m, v);
            if e == 0 {
                continue;
            }
            let nm: Mono = m
                .iter()
                .filter_map(|&(w, k)| {
                    if w == v {
                        if k > 1 {
                            Some((w, k - 1))
                        } else {
                            None
                        }
                    } else {
                        Some((w, k))
                    }
                })
                .collect();
            terms.push((nm, c.mul(&Int::from(e as i64))));
        }
        Poly::from_terms(terms)
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, value: &dyn Fn(Var) -> BigRational) -> BigRational {
        let mut cache: HashMap<Var, BigRational> = HashMap::new();
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.to_big());
            for &(v, e) in m.iter() {
                let x = cache.entry(v).or_insert_with(|| value(v)).clone();
                t *= num_traits::pow(x, e as usize);
            }
            acc += t;
        }
        acc
    }

    /// Evaluation at a rational point with the values supplied in a map.
    pub fn eval_map(&self, vals: &HashMap<Var, BigRational>) -> BigRational {
        let mut acc = BigRational::zero();
        let mut powers: HashMap<(Var, u32), BigRational> = HashMap::new();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.to_big());
            for &(v, e) in m.iter() {
                let p = powers
                    .entry((v, e))
                    .or_insert_with(|| num_traits::pow(vals[&v].clone(), e as usize));
                t *= &*p;
            }
            acc += t;
        }
        acc
    }

    pub fn from_bigint(b: BigInt) -> Poly {
        Poly::constant(Int::from_big(b))
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }
}
