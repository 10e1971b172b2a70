//! Exact expressions stored as reduced quotients of integer polynomials.
//!
//! An `Expr` is always canonical: numerator and denominator are coprime and the
//! denominator has a positive leading coefficient. Structural equality is
//! therefore equality of rational functions (with opaque atoms treated as
//! independent indeterminates).

use crate::atom::{self, AtomData, OpaqueFn, Symbol};
use crate::error::{Result, SymError};
use crate::gcd::gcd;
use crate::int::Int;
use crate::poly::{Mono, Poly, Var};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

#[derive(PartialEq, Eq, Hash)]
struct RatFn {
    num: Poly,
    den: Poly,
}

#[derive(Clone)]
pub struct Expr(Arc<RatFn>);

impl PartialEq for Expr {
    fn eq(&self, o: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || *self.0 == *o.0
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.0.hash(h)
    }
}

impl Default for Expr {
    fn default() -> Expr {
        Expr::zero()
    }
}

impl Expr {
    fn raw(num: Poly, den: Poly) -> Expr {
        Expr(Arc::new(RatFn { num, den }))
    }

    pub fn zero() -> Expr {
        Expr::raw(Poly::zero(), Poly::one())
    }

    pub fn one() -> Expr {
        Expr::raw(Poly::one(), Poly::one())
    }

    pub fn int(k: i64) -> Expr {
        Expr::raw(Poly::constant(Int::from(k)), Poly::one())
    }

    pub fn rational(r: &BigRational) -> Expr {
        // BigRational keeps a positive, coprime denominator.
        Expr::raw(
            Poly::constant(Int::from_big(r.numer().clone())),
            Poly::constant(Int::from_big(r.denom().clone())),
        )
    }

    pub fn frac(p: i64, q: i64) -> Expr {
        Expr::rational(&BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn symbol(s: Symbol) -> Expr {
        Expr::from_var(s.var())
    }

    pub(crate) fn from_var(v: Var) -> Expr {
        Expr::raw(Poly::var(v), Poly::one())
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::raw(p, Poly::one())
    }

    /// Builds `num / den` in canonical form.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Expr> {
        if den.is_zero() {
            return Err(SymError::DegenerateExpression(
                "denominator is identically zero".into(),
            ));
        }
        if num.is_zero() {
            return Ok(Expr::zero());
        }
        if den.is_one() {
            return Ok(Expr::raw(num, den));
        }
        let g = gcd(&num, &den);
        let (mut n, mut d) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        if d.lc().is_negative() {
            n = n.neg();
            d = d.neg();
        }
        Ok(Expr::raw(n, d))
    }

    pub fn num(&self) -> &Poly {
        &self.0.num
    }

    pub fn den(&self) -> &Poly {
        &self.0.den
    }

    pub fn numerator(&self) -> Expr {
        Expr::from_poly(self.0.num.clone())
    }

    pub fn denominator(&self) -> Expr {
        Expr::from_poly(self.0.den.clone())
    }

    /// True when the canonical form is zero.
    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.num.is_one() && self.0.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.0.num.is_constant() && self.0.den.is_constant()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.0.num.constant_value()?;
        let d = self.0.den.constant_value()?;
        Some(BigRational::new(n.to_big(), d.to_big()))
    }

    pub fn as_symbol(&self) -> Option<Symbol> {
        if !self.is_polynomial() || self.0.num.len() != 1 {
            return None;
        }
        let (m, c) = &self.0.num.terms()[0];
        if c.is_one() && m.len() == 1 && m[0].1 == 1 {
            Symbol::from_var(m[0].0)
        } else {
            None
        }
    }

    /// Atom ids occurring at the top level.
    pub fn vars(&self) -> Vec<Var> {
        let mut v = self.0.num.vars();
        v.extend(self.0.den.vars());
        v.sort_unstable();
        v.dedup();
        v
    }

    /// All symbols, including those inside arguments of opaque functions.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for v in self.vars() {
            match atom::atom(v) {
                AtomData::Symbol { .. } => {
                    out.insert(Symbol(v));
                }
                AtomData::Opaque { args, .. } => {
                    for a in &args {
                        a.collect_symbols(out);
                    }
                }
            }
        }
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.vars().into_iter().any(|v| {
            v == s.var()
                || match atom::atom(v) {
                    AtomData::Opaque { args, .. } => args.iter().any(|a| a.contains(s)),
                    _ => false,
                }
        })
    }

    pub fn has_opaque(&self) -> bool {
        self.vars().into_iter().any(atom::is_opaque)
    }

    /// Degree of the numerator in `s` (ignoring opaque arguments).
    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.0.num.degree(s.var())
    }

    /// Number of terms in numerator and denominator; a rough size measure.
    pub fn size(&self) -> usize {
        self.0.num.len() + self.0.den.len()
    }

    pub fn neg(&self) -> Expr {
        Expr::raw(self.0.num.neg(), self.0.den.clone())
    }

    pub fn add(&self, o: &Expr) -> Expr {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let (n1, d1) = (&self.0.num, &self.0.den);
        let (n2, d2) = (&o.0.num, &o.0.den);
        if d1.is_one() && d2.is_one() {
            return Expr::raw(n1.add(n2), Poly::one());
        }
        if d1 == d2 {
            return Expr::from_parts(n1.add(n2), d1.clone()).expect("nonzero denominator");
        }
        let g = gcd(d1, d2);
        if g.is_one() {
            let n = n1.mul(d2).add(&n2.mul(d1));
            if n.is_zero() {
                return Expr::zero();
            }
            return Expr::raw(n, d1.mul(d2));
        }
        let d1r = d1.div_exact(&g).expect("gcd divides");
        let d2r = d2.div_exact(&g).expect("gcd divides");
        let n = n1.mul(&d2r).add(&n2.mul(&d1r));
        if n.is_zero() {
            return Expr::zero();
        }
        let h = gcd(&n, &g);
        if h.is_one() {
            return Expr::raw(n, d1r.mul(d2));
        }
        let n = n.div_exact(&h).expect("gcd divides");
        let d = d1r.mul(&d2.div_exact(&h).expect("gcd divides"));
        Expr::raw(n, d)
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        if self.is_zero() || o.is_zero() {
            return Expr::zero();
        }
        let (n1, d1) = (&self.0.num, &self.0.den);
        let (n2, d2) = (&o.0.num, &o.0.den);
        if d1.is_one() && d2.is_one() {
            return Expr::raw(n1.mul(n2), Poly::one());
        }
        let g1 = gcd(n1, d2);
        let g2 = gcd(n2, d1);
        let a = if g1.is_one() { n1.clone() } else { n1.div_exact(&g1).unwrap() };
        let b = if g2.is_one() { n2.clone() } else { n2.div_exact(&g2).unwrap() };
        let c = if g2.is_one() { d1.clone() } else { d1.div_exact(&g2).unwrap() };
        let d = if g1.is_one() { d2.clone() } else { d2.div_exact(&g1).unwrap() };
        let (mut n, mut dd) = (a.mul(&b), c.mul(&d));
        if dd.lc().is_negative() {
            n = n.neg();
            dd = dd.neg();
        }
        Expr::raw(n, dd)
    }

    pub fn scale_int(&self, k: i64) -> Expr {
        self.mul(&Expr::int(k))
    }

    pub fn inv(&self) -> Result<Expr> {
        if self.is_zero() {
            return Err(SymError::DegenerateExpression("division by zero".into()));
        }
        let (mut n, mut d) = (self.0.den.clone(), self.0.num.clone());
        if d.lc().is_negative() {
            n = n.neg();
            d = d.neg();
        }
        Ok(Expr::raw(n, d))
    }

    pub fn div(&self, o: &Expr) -> Result<Expr> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Expr> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let e = e as u32;
        Ok(Expr::raw(self.0.num.pow(e), self.0.den.pow(e)))
    }

    pub fn powu(&self, e: u32) -> Expr {
        Expr::raw(self.0.num.pow(e), self.0.den.pow(e))
    }

    /// Partial derivative with respect to a symbol. Opaque atoms are
    /// differentiated with the chain rule through their arguments.
    pub fn diff(&self, s: Symbol) -> Expr {
        self.derive(&|t: Symbol| if t == s { Expr::one() } else { Expr::zero() })
    }

    /// Applies the derivation determined by its values on symbols.
    pub fn derive(&self, on_symbol: &dyn Fn(Symbol) -> Expr) -> Expr {
        let mut dvals: Vec<(Var, Expr)> = Vec::new();
        for v in self.vars() {
            let dv = derive_atom(v, on_symbol);
            if !dv.is_zero() {
                dvals.push((v, dv));
            }
        }
        if dvals.is_empty() {
            return Expr::zero();
        }
        let (num, den) = (&self.0.num, &self.0.den);
        if dvals.iter().all(|(_, d)| d.is_polynomial()) {
            let mut dn = Poly::zero();
            let mut dd = Poly::zero();
            for (v, d) in &dvals {
                dn = dn.add(&num.derivative(*v).mul(d.num()));
                if !den.is_one() {
                    dd = dd.add(&den.derivative(*v).mul(d.num()));
                }
            }
            if den.is_one() {
                return Expr::raw(dn, Poly::one());
            }
            if dd.is_zero() {
                return Expr::from_parts(dn, den.clone()).expect("nonzero denominator");
            }
            let g = gcd(den, &dd);
            let dr = den.div_exact(&g).expect("gcd divides");
            let ddr = dd.div_exact(&g).expect("gcd divides");
            let n = dn.mul(&dr).sub(&num.mul(&ddr));
            return Expr::from_parts(n, den.mul(&dr)).expect("nonzero denominator");
        }
        let mut dn = Expr::zero();
        let mut dd = Expr::zero();
        for (v, d) in &dvals {
            dn = dn.add(&Expr::from_poly(num.derivative(*v)).mul(d));
            dd = dd.add(&Expr::from_poly(den.derivative(*v)).mul(d));
        }
        let den_e = Expr::from_poly(den.clone());
        dn.sub(&self.mul(&dd))
            .div(&den_e)
            .expect("nonzero denominator")
    }

    /// Simultaneous substitution of symbols, followed by normalization.
    pub fn substitute(&self, bindings: &HashMap<Symbol, Expr>) -> Result<Expr> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        let map: HashMap<Var, Expr> = bindings.iter().map(|(k, v)| (k.var(), v.clone())).collect();
        self.substitute_vars(&map)
    }

    pub fn substitute_one(&self, s: Symbol, value: &Expr) -> Result<Expr> {
        let mut m = HashMap::new();
        m.insert(s.var(), value.clone());
        self.substitute_vars(&m)
    }

    pub(crate) fn substitute_vars(&self, map: &HashMap<Var, Expr>) -> Result<Expr> {
        let mut local: HashMap<Var, Expr> = HashMap::new();
        for v in self.vars() {
            if let Some(e) = map.get(&v) {
                local.insert(v, e.clone());
                continue;
            }
            if let AtomData::Opaque { name, derivs, args } = atom::atom(v) {
                let mut changed = false;
                let mut nargs = Vec::with_capacity(args.len());
                for a in &args {
                    let b = a.substitute_vars(map)?;
                    changed |= b != *a;
                    nargs.push(b);
                }
                if changed {
                    let f = OpaqueFn::new(&name, args.len());
                    local.insert(v, f.derivative(&derivs, &nargs));
                }
            }
        }
        if local.is_empty() {
            return Ok(self.clone());
        }
        let mut rvars: Vec<Var> = local.keys().cloned().collect();
        rvars.sort_unstable();
        let dmax: Vec<u32> = rvars
            .iter()
            .map(|&v| self.0.num.degree(v).max(self.0.den.degree(v)))
            .collect();
        let images: Vec<(Poly, Poly)> = rvars
            .iter()
            .map(|v| (local[v].0.num.clone(), local[v].0.den.clone()))
            .collect();
        let mut cache = PowCache::new(&images);
        let n = compose_poly(&self.0.num, &rvars, &dmax, &mut cache);
        let d = compose_poly(&self.0.den, &rvars, &dmax, &mut cache);
        if d.is_zero() {
            return Err(SymError::DegenerateExpression(
                "substitution makes the denominator vanish".into(),
            ));
        }
        Expr::from_parts(n, d)
    }
}

fn derive_atom(v: Var, on_symbol: &dyn Fn(Symbol) -> Expr) -> Expr {
    match atom::atom(v) {
        AtomData::Symbol { .. } => on_symbol(Symbol(v)),
        AtomData::Opaque { name, derivs, args } => {
            let f = OpaqueFn::new(&name, args.len());
            let mut acc = Expr::zero();
            for (i, a) in args.iter().enumerate() {
                let da = a.derive(on_symbol);
                if da.is_zero() {
                    continue;
                }
                let mut nd = derivs.clone();
                nd[i] += 1;
                acc = acc.add(&f.derivative(&nd, &args).mul(&da));
            }
            acc
        }
    }
}

struct PowCache<'a> {
    images: &'a [(Poly, Poly)],
    num: HashMap<(usize, u32), Poly>,
    den: HashMap<(usize, u32), Poly>,
}

impl<'a> PowCache<'a> {
    fn new(images: &'a [(Poly, Poly)]) -> Self {
        PowCache {
            images,
            num: HashMap::new(),
            den: HashMap::new(),
        }
    }

    fn get(&mut self, i: usize, e: u32, numer: bool) -> Poly {
        let base = if numer { &self.images[i].0 } else { &self.images[i].1 };
        if e == 0 || base.is_one() {
            return Poly::one();
        }
        if e == 1 {
            return base.clone();
        }
        let table = if numer { &mut self.num } else { &mut self.den };
        if let Some(p) = table.get(&(i, e)) {
            return p.clone();
        }
        let p = base.pow(e);
        table.insert((i, e), p.clone());
        p
    }
}

/// Replaces each `rvars[i]` by `p_i/q_i` and clears denominators with `q_i^dmax[i]`.
fn compose_poly(p: &Poly, rvars: &[Var], dmax: &[u32], cache: &mut PowCache) -> Poly {
    let mut groups: HashMap<Vec<u32>, Vec<(Mono, Int)>> = HashMap::new();
    for (m, c) in p.terms() {
        let mut key = vec![0u32; rvars.len()];
        let mut rest = Mono::new();
        for &(v, e) in m.iter() {
            match rvars.binary_search(&v) {
                Ok(i) => key[i] = e,
                Err(_) => rest.push((v, e)),
            }
        }
        groups.entry(key).or_default().push((rest, c.clone()));
    }
    let mut keys: Vec<Vec<u32>> = groups.keys().cloned().collect();
    keys.sort();
    let mut all: Vec<(Mono, Int)> = Vec::new();
    for key in keys {
        let rest = Poly::from_terms(groups.remove(&key).unwrap());
        let mut f = Poly::one();
        for (i, &e) in key.iter().enumerate() {
            if e > 0 {
                f = f.mul(&cache.get(i, e, true));
            }
            if dmax[i] > e {
                f = f.mul(&cache.get(i, dmax[i] - e, false));
            }
        }
        let t = rest.mul(&f);
        all.extend(t.terms().iter().cloned());
    }
    Poly::from_terms(all)
}

/// Returns the canonical form; expressions are kept canonical, so this is a copy.
pub fn normal_form(e: &Expr) -> Expr {
    e.clone()
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$f(self, o)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$f(&self, &o)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$f(&self, o)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$f(self, &o)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(it: I) -> Expr {
        it.fold(Expr::zero(), |a, b| a.add(&b))
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(it: I) -> Expr {
        it.fold(Expr::one(), |a, b| a.mul(&b))
    }
}

impl From<i64> for Expr {
    fn from(k: i64) -> Expr {
        Expr::int(k)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Expr {
        Expr::symbol(s)
    }
}
