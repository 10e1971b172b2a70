//! Right moving frames from normalization equations, and invariantization.
//!
//! The solver handles systems that become triangular after clearing
//! denominators: at each step some equation is affine in one remaining
//! parameter. A single-parameter equation `c2 a^2 + c0 = 0` is also accepted and
//! introduces an auxiliary radical `s` with `s^2 = -c0/c2`.

use crate::error::{CoreError, Result};
use crate::groupaction::GroupActionSpec;
use crate::jetspace::{Coord, JetContext};
use crate::sample;
use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};
use symcore::gcd::{gcd, gcd_list};
use symcore::poly::{Poly, Var};
use symcore::{reduce_radical, BigRational, Evaluator, Expr, Matrix, Symbol, SymbolKind};

/// Equations ψ_i(g·z) = c_i defining the cross-section.
#[derive(Clone, Debug)]
pub struct NormalizationSpec {
    pub equations: Vec<(Expr, Expr)>,
}

impl NormalizationSpec {
    pub fn new(equations: Vec<(Expr, Expr)>) -> NormalizationSpec {
        NormalizationSpec { equations }
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }
}

/// Auxiliary symbol with `symbol^2 = square`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Radical {
    pub symbol: Symbol,
    pub square: Expr,
}

/// A right moving frame in parametric form.
#[derive(Clone)]
pub struct Frame {
    spec: GroupActionSpec,
    norm: NormalizationSpec,
    values: Vec<Expr>,
    radicals: Vec<Radical>,
    conditions: Vec<Expr>,
    cache: Arc<Mutex<HashMap<Symbol, Expr>>>,
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Frame")
            .field("params", &self.spec.params())
            .field("values", &self.values)
            .field("radicals", &self.radicals)
            .finish()
    }
}

fn vars_of(ps: &[Symbol]) -> Vec<Var> {
    ps.iter().map(|p| p.var()).collect()
}

/// gcd of the coefficients of `p` viewed as a polynomial in `vars`.
fn content_in(p: &Poly, vars: &[Var]) -> Poly {
    let mut parts = vec![p.clone()];
    for &v in vars {
        parts = parts
            .iter()
            .flat_map(|q| q.coeffs_in(v))
            .filter(|q| !q.is_zero())
            .collect();
    }
    gcd_list(parts.iter())
}

struct Solver {
    unknown: Vec<Symbol>,
    nonzero: Vec<Poly>,
    conditions: Vec<Expr>,
    radicals: Vec<Radical>,
}

impl Solver {
    fn note_nonzero(&mut self, e: &Expr) {
        for p in [e.num(), e.den()] {
            if !p.is_constant() && !self.nonzero.contains(p) {
                self.nonzero.push(p.clone());
                self.conditions.push(Expr::from_poly(p.clone()));
            }
        }
    }

    fn reduce(&self, e: &Expr) -> Result<Expr> {
        let mut e = e.clone();
        for r in &self.radicals {
            e = reduce_radical(&e, r.symbol, &r.square)?;
        }
        Ok(e)
    }

    /// Strips factors known to be nonzero and the content with respect to the unknowns.
    fn clean(&mut self, q: Poly) -> Poly {
        if q.is_zero() {
            return q;
        }
        let mut q = q;
        for nz in self.nonzero.clone() {
            loop {
                let g = gcd(&q, &nz);
                if g.is_constant() {
                    break;
                }
                q = q.div_exact(&g).expect("gcd divides");
            }
        }
        let vars = vars_of(&self.unknown);
        let c = content_in(&q, &vars);
        if !c.is_constant() {
            q = q.div_exact(&c).expect("content divides");
            self.note_nonzero(&Expr::from_poly(c));
        }
        q
    }

    fn unknowns_in(&self, e: &Expr) -> Vec<Symbol> {
        self.unknown.iter().filter(|p| e.contains(**p)).cloned().collect()
    }

    fn solve(&mut self, eqs: Vec<Expr>) -> Result<Vec<(Symbol, Expr)>> {
        let mut eqs: Vec<Poly> = eqs.into_iter().map(|e| e.num().clone()).collect();
        let mut solved: Vec<(Symbol, Expr)> = Vec::new();
        while !self.unknown.is_empty() {
            let mut cleaned = Vec::new();
            for q in eqs {
                let q = self.clean(q);
                if q.is_zero() {
                    continue;
                }
                if q.is_constant() {
                    return Err(CoreError::NotSolvable("inconsistent normalization equations".into()));
                }
                cleaned.push(q);
            }
            eqs = cleaned;
            let mut best: Option<((bool, usize, usize), usize, Symbol)> = None;
            for (i, q) in eqs.iter().enumerate() {
                let e = Expr::from_poly(q.clone());
                let us = self.unknowns_in(&e);
                for &p in &us {
                    if q.degree(p.var()) != 1 {
                        continue;
                    }
                    let c1 = Expr::from_poly(q.coeffs_in(p.var()).swap_remove(1));
                    let key = (
                        us.iter().any(|u| *u != p && c1.contains(*u)),
                        us.len(),
                        e.size(),
                    );
                    if best.as_ref().map_or(true, |b| key < b.0) {
                        best = Some((key, i, p));
                    }
                }
            }
            // A clean linear pivot beats a radical; a pivot whose coefficient
            // still involves other unknowns does not.
            if best.as_ref().map_or(true, |b| b.0 .0) {
                if let Some((p, val)) = self.radical_step(&mut eqs)? {
                    self.finish_step(&mut eqs, &mut solved, p, val)?;
                    continue;
                }
            }
            let (p, val) = match best {
                Some((_, i, p)) => {
                    let q = eqs.swap_remove(i);
                    let cs = q.coeffs_in(p.var());
                    let c0 = Expr::from_poly(cs[0].clone());
                    let c1 = Expr::from_poly(cs[1].clone());
                    self.note_nonzero(&c1);
                    let val = self.reduce(&c0.neg().div(&c1)?)?;
                    self.note_nonzero(&val);
                    (p, val)
                }
                None => {
                    return Err(CoreError::NotSolvable(
                        "no remaining equation is affine in a single parameter".into(),
                    ))
                }
            };
            self.finish_step(&mut eqs, &mut solved, p, val)?;
        }
        for q in eqs {
            if !self.clean(q).is_zero() {
                return Err(CoreError::NotSolvable("overdetermined normalization equations".into()));
            }
        }
        let mut finals: HashMap<Symbol, Expr> = HashMap::new();
        for (p, v) in solved.iter().rev() {
            let v = self.reduce(&v.substitute(&finals)?)?;
            finals.insert(*p, v);
        }
        Ok(solved.into_iter().map(|(p, _)| (p, finals[&p].clone())).collect())
    }

    fn finish_step(
        &mut self,
        eqs: &mut Vec<Poly>,
        solved: &mut Vec<(Symbol, Expr)>,
        p: Symbol,
        val: Expr,
    ) -> Result<()> {
        self.unknown.retain(|u| *u != p);
        let mut next = Vec::new();
        for q in eqs.iter() {
            let e = Expr::from_poly(q.clone()).substitute_one(p, &val)?;
            let e = self.reduce(&e)?;
            next.push(e.num().clone());
        }
        *eqs = next;
        solved.push((p, val));
        Ok(())
    }

    fn radical_step(&mut self, eqs: &mut Vec<Poly>) -> Result<Option<(Symbol, Expr)>> {
        for i in 0..eqs.len() {
            let e = Expr::from_poly(eqs[i].clone());
            let us = self.unknowns_in(&e);
            if us.len() != 1 {
                continue;
            }
            let p = us[0];
            let cs = eqs[i].coeffs_in(p.var());
            if cs.len() != 3 || !cs[1].is_zero() {
                continue;
            }
            let c0 = Expr::from_poly(cs[0].clone());
            let c2 = Expr::from_poly(cs[2].clone());
            if free_of_radicals(&c0) && free_of_radicals(&c2) {
                let square = c0.neg().div(&c2)?;
                let s = Symbol::new(&format!("s{}", self.radicals.len() + 1), SymbolKind::Auxiliary);
                self.note_nonzero(&square);
                self.radicals.push(Radical { symbol: s, square });
                eqs.swap_remove(i);
                return Ok(Some((p, s.expr())));
            }
        }
        Ok(None)
    }
}

fn free_of_radicals(e: &Expr) -> bool {
    !e.symbols().iter().any(|s| s.kind() == SymbolKind::Auxiliary)
}

impl Frame {
    /// Solves the normalization equations for the group parameters.
    pub fn solve(spec: &GroupActionSpec, norm: &NormalizationSpec) -> Result<Frame> {
        check_shape(spec, norm)?;
        let eqs = norm
            .equations
            .iter()
            .map(|(psi, c)| Ok(spec.transform(psi)?.sub(c)))
            .collect::<Result<Vec<_>>>()?;
        let mut solver = Solver {
            unknown: spec.params().to_vec(),
            nonzero: Vec::new(),
            conditions: Vec::new(),
            radicals: Vec::new(),
        };
        let sol = solver.solve(eqs)?;
        let map: HashMap<Symbol, Expr> = sol.into_iter().collect();
        let values = spec.params().iter().map(|p| map[p].clone()).collect();
        let frame = Frame {
            spec: spec.clone(),
            norm: norm.clone(),
            values,
            radicals: solver.radicals,
            conditions: solver.conditions,
            cache: Arc::default(),
        };
        frame.verify()?;
        Ok(frame)
    }

    /// Accepts a frame supplied by the caller after checking the normalization equations.
    pub fn from_values(
        spec: &GroupActionSpec,
        norm: &NormalizationSpec,
        values: Vec<Expr>,
        radicals: Vec<Radical>,
    ) -> Result<Frame> {
        check_shape(spec, norm)?;
        if values.len() != spec.dim() {
            return Err(CoreError::ShapeMismatch(format!(
                "frame has {} components for {} parameters",
                values.len(),
                spec.dim()
            )));
        }
        let conditions = values
            .iter()
            .filter(|v| !v.den().is_constant())
            .map(|v| v.denominator())
            .collect();
        let frame = Frame {
            spec: spec.clone(),
            norm: norm.clone(),
            values,
            radicals,
            conditions,
            cache: Arc::default(),
        };
        frame.verify()?;
        Ok(frame)
    }

    fn verify(&self) -> Result<()> {
        for (psi, c) in &self.norm.equations {
            let r = self.at_frame(&self.spec.transform(psi)?)?.sub(c);
            if !r.is_zero() {
                return Err(CoreError::VerificationFailed(format!(
                    "normalization `{psi} = {c}` leaves residual {r}"
                )));
            }
        }
        Ok(())
    }

    /// The frame for the action extended by the dummy variable τ.
    pub fn with_dummy(&self) -> Result<Frame> {
        Ok(Frame {
            spec: self.spec.with_dummy()?,
            norm: self.norm.clone(),
            values: self.values.clone(),
            radicals: self.radicals.clone(),
            conditions: self.conditions.clone(),
            cache: Arc::default(),
        })
    }

    pub fn spec(&self) -> &GroupActionSpec {
        &self.spec
    }

    pub fn ctx(&self) -> &JetContext {
        self.spec.ctx()
    }

    pub fn normalization(&self) -> &NormalizationSpec {
        &self.norm
    }

    pub fn values(&self) -> &[Expr] {
        &self.values
    }

    pub fn radicals(&self) -> &[Radical] {
        &self.radicals
    }

    /// Expressions assumed nonzero on the domain of the frame.
    pub fn conditions(&self) -> &[Expr] {
        &self.conditions
    }

    pub fn param_map(&self) -> HashMap<Symbol, Expr> {
        self.spec.params().iter().cloned().zip(self.values.iter().cloned()).collect()
    }

    /// Reduces modulo the radical relations.
    pub fn reduce(&self, e: &Expr) -> Result<Expr> {
        let mut e = e.clone();
        for r in &self.radicals {
            e = reduce_radical(&e, r.symbol, &r.square)?;
        }
        Ok(e)
    }

    /// Substitutes the frame for the group parameters.
    pub fn at_frame(&self, e: &Expr) -> Result<Expr> {
        self.reduce(&e.substitute(&self.param_map())?)
    }

    /// Invariantization of a single coordinate.
    pub fn invariant_of(&self, s: Symbol) -> Result<Expr> {
        if let Some(e) = self.cache.lock().unwrap().get(&s) {
            return Ok(e.clone());
        }
        let e = match self.ctx().classify(s) {
            Coord::Indep(i) => self.at_frame(&self.spec.indep_action()[i])?,
            Coord::Jet(a, k) => self.at_frame(&self.spec.prolonged(a, &k)?)?,
            Coord::Other => match self.radicals.iter().find(|r| r.symbol == s) {
                // I(s)^2 = I(v); only constant squares have a canonical root.
                Some(r) => {
                    let v = self.invariantize(&r.square)?;
                    v.as_rational()
                        .and_then(|q| symcore::eval::rational_sqrt(&q))
                        .map(|q| Expr::rational(&q))
                        .ok_or_else(|| {
                            CoreError::NotSolvable(format!("invariantized radicand {v} is not a rational square"))
                        })?
                }
                None => s.expr(),
            },
        };
        self.cache.lock().unwrap().insert(s, e.clone());
        Ok(e)
    }

    /// I(e) = (g·e)|_{g=ρ(z)}.
    pub fn invariantize(&self, e: &Expr) -> Result<Expr> {
        let mut map = HashMap::new();
        for s in e.symbols() {
            if matches!(self.ctx().classify(s), Coord::Indep(_) | Coord::Jet(..))
                || self.radicals.iter().any(|r| r.symbol == s)
            {
                map.insert(s, self.invariant_of(s)?);
            }
        }
        self.reduce(&e.substitute(&map)?)
    }

    /// Total derivative aware of the radicals: D_i s = D_i(v)/(2s).
    pub fn total_derivative(&self, e: &Expr, i: usize) -> Result<Expr> {
        let ctx = self.ctx();
        let extra = |s: Symbol| {
            self.radicals.iter().find(|r| r.symbol == s).map(|r| {
                let dv = ctx.total_derivative(&r.square, i);
                dv.div(&s.expr().scale_int(2)).expect("radical is nonzero")
            })
        };
        self.reduce(&ctx.total_derivative_with(e, i, &extra))
    }

    /// Jacobian dx̃/dx at the frame.
    pub fn jacobian(&self) -> Result<Matrix> {
        let j = self.spec.jacobian();
        let rows = (0..j.rows())
            .map(|r| j.row(r).iter().map(|e| self.at_frame(e)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_rows(rows))
    }
}

fn check_shape(spec: &GroupActionSpec, norm: &NormalizationSpec) -> Result<()> {
    if norm.len() != spec.dim() {
        return Err(CoreError::InvalidSpec(format!(
            "{} normalization equations for a {}-parameter group",
            norm.len(),
            spec.dim()
        )));
    }
    // Functional independence: the Jacobian of the normalizations with respect
    // to the parameters at the identity has full rank at a random point.
    let r = spec.dim();
    let mut ev = Evaluator::new(sample::DEFAULT_SEED);
    let idm = spec.identity_map();
    let mut rows = Vec::new();
    for (psi, _) in &norm.equations {
        let t = spec.transform(psi)?;
        let row = spec
            .params()
            .iter()
            .map(|p| {
                let d = t.diff(*p).substitute(&idm)?;
                Ok(ev.eval(&d).unwrap_or_default())
            })
            .collect::<Result<Vec<BigRational>>>()?;
        rows.push(row);
    }
    let tr: Vec<Vec<BigRational>> = (0..r).map(|j| rows.iter().map(|row| row[j].clone()).collect()).collect();
    if sample::independent_rows(&tr).len() < r {
        return Err(CoreError::NotSolvable(
            "normalization equations are not independent at the identity".into(),
        ));
    }
    Ok(())
}

/// True iff g·e = e at random exact samples of (z, g).
///
/// Expressions containing auxiliary radicals are rejected.
pub fn is_invariant(spec: &GroupActionSpec, e: &Expr, seed: u64) -> Result<bool> {
    if e.symbols().iter().any(|s| s.kind() == SymbolKind::Auxiliary) {
        return Err(CoreError::InvalidSpec(
            "invariance of expressions with radicals is not sampled".into(),
        ));
    }
    let ctx = spec.ctx();
    let coords: Vec<Symbol> = e
        .symbols()
        .into_iter()
        .filter(|s| !matches!(ctx.classify(*s), Coord::Other))
        .collect();
    let map = spec.action_map(e)?;
    let others: HashSet<Symbol> = e
        .symbols()
        .into_iter()
        .filter(|s| matches!(ctx.classify(*s), Coord::Other))
        .collect();
    let mut done = 0;
    let mut tries = 0;
    let mut rng = sample::rng(seed);
    while done < sample::SAMPLES {
        tries += 1;
        if tries > 10 * sample::SAMPLES {
            return Err(CoreError::IdentityFailed(
                "could not find regular sample points".into(),
            ));
        }
        let s = rand::Rng::gen::<u64>(&mut rng);
        let mut ev = Evaluator::new(s);
        let Some(base) = ev.eval(e) else { continue };
        let mut ev2 = Evaluator::new(s);
        let mut ok = true;
        for c in &coords {
            match ev.eval(&map[c]) {
                Some(v) => ev2.set(*c, v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        for o in &others {
            let v = ev.value_of(*o);
            ev2.set(*o, v);
        }
        let Some(moved) = ev2.eval(e) else { continue };
        if moved != base {
            return Ok(false);
        }
        done += 1;
    }
    Ok(true)
}
