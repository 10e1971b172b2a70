//! Jet coordinates, multi-indices and total derivatives.
//!
//! Jet symbols are named after their dependent variable and the independent
//! variables of differentiation in index order: `u`, `u_x`, `u_xxy`, `w_ztau`.
//! Names are resolved by greedy longest match, so independents `t` and `tau`
//! can coexist.

use crate::error::{CoreError, Result};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};
use symcore::{Expr, Symbol, SymbolKind};

/// Name of the dummy invariant independent variable.
pub const DUMMY_NAME: &str = "tau";

/// Unordered tuple of differentiation indices stored as a count vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> MultiIndex {
        MultiIndex(vec![0; n])
    }

    pub fn from_counts(counts: Vec<u32>) -> MultiIndex {
        MultiIndex(counts)
    }

    pub fn from_indices(n: usize, idx: &[usize]) -> MultiIndex {
        let mut c = vec![0; n];
        for &i in idx {
            c[i] += 1;
        }
        MultiIndex(c)
    }

    pub fn unit(n: usize, i: usize) -> MultiIndex {
        MultiIndex::from_indices(n, &[i])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn count(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.order() == 0
    }

    pub fn with(&self, i: usize) -> MultiIndex {
        let mut c = self.0.clone();
        c[i] += 1;
        MultiIndex(c)
    }

    pub fn without(&self, i: usize) -> Option<MultiIndex> {
        if self.count(i) == 0 {
            return None;
        }
        let mut c = self.0.clone();
        c[i] -= 1;
        Some(MultiIndex(c))
    }

    pub fn add(&self, o: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// Pads or truncates to `n` slots; truncation requires the dropped slots to be zero.
    pub fn resize(&self, n: usize) -> Option<MultiIndex> {
        if self.0.iter().skip(n).any(|&k| k > 0) {
            return None;
        }
        let mut c = self.0.clone();
        c.resize(n, 0);
        Some(MultiIndex(c))
    }

    /// Indices with repetition, ascending.
    pub fn indices(&self) -> Vec<usize> {
        let mut v = Vec::new();
        for (i, &k) in self.0.iter().enumerate() {
            for _ in 0..k {
                v.push(i);
            }
        }
        v
    }

    /// Smallest index present.
    pub fn first(&self) -> Option<usize> {
        self.0.iter().position(|&k| k > 0)
    }

    /// All multi-indices of exactly the given order, in graded lexicographic order.
    pub fn of_order(n: usize, order: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if i + 1 == n {
                cur[i] = left;
                out.push(MultiIndex(cur.clone()));
                cur[i] = 0;
                return;
            }
            for k in (0..=left).rev() {
                cur[i] = k;
                rec(n, i + 1, left - k, cur, out);
            }
            cur[i] = 0;
        }
        if n == 0 {
            return if order == 0 { vec![MultiIndex(vec![])] } else { vec![] };
        }
        let mut out = Vec::new();
        rec(n, 0, order, &mut vec![0; n], &mut out);
        out
    }

    pub fn up_to_order(n: usize, order: u32) -> Vec<MultiIndex> {
        (0..=order).flat_map(|k| MultiIndex::of_order(n, k)).collect()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// What a symbol means in a jet context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coord {
    Indep(usize),
    Jet(usize, MultiIndex),
    Other,
}

struct Tables {
    fwd: HashMap<(usize, MultiIndex), Symbol>,
    back: HashMap<Symbol, (usize, MultiIndex)>,
}

struct Inner {
    indep: Vec<Symbol>,
    names: Vec<String>,
    dummy: bool,
    deps: Vec<String>,
    tables: RwLock<Tables>,
}

/// Declaration of independent and dependent variables. Jet symbols are created
/// on demand, so there is no fixed maximal order.
#[derive(Clone)]
pub struct JetContext(Arc<Inner>);

fn valid_name(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic())
        && s.chars().all(|ch| ch.is_ascii_alphanumeric())
}

impl JetContext {
    pub fn new(indep: &[&str], deps: &[&str]) -> Result<JetContext> {
        JetContext::build(indep, deps, false)
    }

    fn build(indep: &[&str], deps: &[&str], dummy: bool) -> Result<JetContext> {
        let mut seen = std::collections::HashSet::new();
        for n in indep.iter().chain(deps) {
            if !valid_name(n) {
                return Err(CoreError::InvalidSpec(format!("invalid variable name `{n}`")));
            }
            if !seen.insert(*n) {
                return Err(CoreError::InvalidSpec(format!("duplicate variable `{n}`")));
            }
        }
        if indep.is_empty() {
            return Err(CoreError::InvalidSpec("no independent variables".into()));
        }
        let n = indep.len();
        let syms = indep
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let kind = if dummy && i + 1 == n { SymbolKind::Dummy } else { SymbolKind::Independent };
                Symbol::new(s, kind)
            })
            .collect();
        Ok(JetContext(Arc::new(Inner {
            indep: syms,
            names: indep.iter().map(|s| s.to_string()).collect(),
            dummy,
            deps: deps.iter().map(|s| s.to_string()).collect(),
            tables: RwLock::new(Tables {
                fwd: HashMap::new(),
                back: HashMap::new(),
            }),
        })))
    }

    /// The same variables with the dummy invariant variable appended.
    pub fn with_dummy(&self) -> Result<JetContext> {
        if self.0.dummy {
            return Ok(self.clone());
        }
        if self.0.names.iter().chain(&self.0.deps).any(|n| n == DUMMY_NAME) {
            return Err(CoreError::InvalidSpec(format!("`{DUMMY_NAME}` is reserved")));
        }
        let mut ind: Vec<&str> = self.0.names.iter().map(|s| s.as_str()).collect();
        ind.push(DUMMY_NAME);
        let deps: Vec<&str> = self.0.deps.iter().map(|s| s.as_str()).collect();
        JetContext::build(&ind, &deps, true)
    }

    /// Independent variables including the dummy, if present.
    pub fn n_indep(&self) -> usize {
        self.0.indep.len()
    }

    /// Independent variables excluding the dummy.
    pub fn n_base(&self) -> usize {
        self.0.indep.len() - usize::from(self.0.dummy)
    }

    pub fn dummy(&self) -> Option<usize> {
        self.0.dummy.then(|| self.0.indep.len() - 1)
    }

    pub fn indep(&self, i: usize) -> Symbol {
        self.0.indep[i]
    }

    pub fn indep_expr(&self, i: usize) -> Expr {
        self.0.indep[i].expr()
    }

    pub fn indep_name(&self, i: usize) -> &str {
        &self.0.names[i]
    }

    pub fn n_dep(&self) -> usize {
        self.0.deps.len()
    }

    pub fn dep_name(&self, a: usize) -> &str {
        &self.0.deps[a]
    }

    pub fn dep_index(&self, name: &str) -> Option<usize> {
        self.0.deps.iter().position(|d| d == name)
    }

    pub fn indep_index(&self, name: &str) -> Option<usize> {
        self.0.names.iter().position(|d| d == name)
    }

    pub fn jet_name(&self, a: usize, k: &MultiIndex) -> String {
        let mut s = self.0.deps[a].clone();
        if !k.is_empty() {
            s.push('_');
            for i in k.indices() {
                s.push_str(&self.0.names[i]);
            }
        }
        s
    }

    /// The symbol for u^a_K.
    pub fn jet(&self, a: usize, k: &MultiIndex) -> Symbol {
        let k = k.resize(self.n_indep()).expect("multi-index uses an undeclared variable");
        if let Some(s) = self.0.tables.read().unwrap().fwd.get(&(a, k.clone())) {
            return *s;
        }
        let s = Symbol::new(&self.jet_name(a, &k), SymbolKind::DependentJet);
        let mut t = self.0.tables.write().unwrap();
        t.fwd.insert((a, k.clone()), s);
        t.back.insert(s, (a, k));
        s
    }

    pub fn jet_expr(&self, a: usize, k: &MultiIndex) -> Expr {
        self.jet(a, k).expr()
    }

    pub fn dep(&self, a: usize) -> Symbol {
        self.jet(a, &MultiIndex::zero(self.n_indep()))
    }

    fn parse_suffix(&self, s: &str) -> Option<MultiIndex> {
        let mut k = MultiIndex::zero(self.n_indep());
        let mut rest = s;
        while !rest.is_empty() {
            let best = (0..self.n_indep())
                .filter(|&i| rest.starts_with(self.0.names[i].as_str()))
                .max_by_key(|&i| self.0.names[i].len())?;
            k = k.with(best);
            rest = &rest[self.0.names[best].len()..];
        }
        Some(k)
    }

    fn parse_jet(&self, name: &str) -> Option<(usize, MultiIndex)> {
        let (base, suf) = match name.find('_') {
            Some(i) => (&name[..i], &name[i + 1..]),
            None => (name, ""),
        };
        let a = self.dep_index(base)?;
        if name.contains('_') && suf.is_empty() {
            return None;
        }
        Some((a, self.parse_suffix(suf)?))
    }

    pub fn classify(&self, s: Symbol) -> Coord {
        if let Some(i) = self.0.indep.iter().position(|t| *t == s) {
            return Coord::Indep(i);
        }
        if s.kind() != SymbolKind::DependentJet {
            return Coord::Other;
        }
        if let Some((a, k)) = self.0.tables.read().unwrap().back.get(&s) {
            return Coord::Jet(*a, k.clone());
        }
        match self.parse_jet(&s.name()) {
            Some((a, k)) => {
                // Register so later lookups are cheap.
                let t = self.jet(a, &k);
                debug_assert_eq!(t, s);
                Coord::Jet(a, k)
            }
            None => Coord::Other,
        }
    }

    /// Resolves an identifier appearing in user input.
    pub fn resolve(&self, name: &str) -> Option<Expr> {
        if let Some(i) = self.indep_index(name) {
            return Some(self.indep_expr(i));
        }
        self.parse_jet(name).map(|(a, k)| self.jet_expr(a, &k))
    }

    /// Highest jet order occurring in `e` (0 if none).
    pub fn order_of(&self, e: &Expr) -> u32 {
        e.symbols()
            .into_iter()
            .filter_map(|s| match self.classify(s) {
                Coord::Jet(_, k) => Some(k.order()),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// All jet symbols of `e` with their indices.
    pub fn jets_in(&self, e: &Expr) -> Vec<(Symbol, usize, MultiIndex)> {
        e.symbols()
            .into_iter()
            .filter_map(|s| match self.classify(s) {
                Coord::Jet(a, k) => Some((s, a, k)),
                _ => None,
            })
            .collect()
    }

    /// Total derivative D_i. Symbols that are neither independents nor jets
    /// (parameters, constants) are treated as constants.
    pub fn total_derivative(&self, e: &Expr, i: usize) -> Expr {
        self.total_derivative_with(e, i, &|_| None)
    }

    /// Total derivative with a hook supplying D_i of extra symbols such as radicals.
    pub fn total_derivative_with(
        &self,
        e: &Expr,
        i: usize,
        extra: &dyn Fn(Symbol) -> Option<Expr>,
    ) -> Expr {
        e.derive(&|s| match self.classify(s) {
            Coord::Indep(j) => {
                if j == i {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Coord::Jet(a, k) => self.jet_expr(a, &k.with(i)),
            Coord::Other => extra(s).unwrap_or_else(Expr::zero),
        })
    }

    pub fn iterated_derivative(&self, e: &Expr, k: &MultiIndex) -> Expr {
        let mut out = e.clone();
        for i in k.indices() {
            out = self.total_derivative(&out, i);
        }
        out
    }
}

impl fmt::Debug for JetContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetContext({:?}; {:?})", self.0.names, self.0.deps)
    }
}

/// f_1 D_1 + ... + f_n D_n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalVectorField {
    pub coeffs: Vec<Expr>,
}

impl TotalVectorField {
    pub fn new(coeffs: Vec<Expr>) -> TotalVectorField {
        TotalVectorField { coeffs }
    }

    pub fn zero(n: usize) -> TotalVectorField {
        TotalVectorField {
            coeffs: vec![Expr::zero(); n],
        }
    }

    pub fn apply(&self, ctx: &JetContext, e: &Expr) -> Expr {
        self.apply_with(ctx, e, &|_, _| None)
    }

    pub fn apply_with(
        &self,
        ctx: &JetContext,
        e: &Expr,
        extra: &dyn Fn(Symbol, usize) -> Option<Expr>,
    ) -> Expr {
        let mut acc = Expr::zero();
        for (i, f) in self.coeffs.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            let d = ctx.total_derivative_with(e, i, &|s| extra(s, i));
            acc = acc.add(&f.mul(&d));
        }
        acc
    }
}
