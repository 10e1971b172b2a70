//! Lie group actions on jet space: prolongation, infinitesimals, characteristics
//! and the Adjoint representation with respect to the infinitesimal generators.

use crate::error::{CoreError, Result};
use crate::jetspace::{Coord, JetContext, MultiIndex};
use crate::sample;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use symcore::{BigRational, Evaluator, Expr, Matrix, Symbol, SymbolKind};

/// Parameter product in the chart: `g·h` as expressions in the parameters of
/// `g` and a second copy of parameters standing for `h`.
#[derive(Clone, Debug)]
pub struct Composition {
    pub second: Vec<Symbol>,
    pub product: Vec<Expr>,
}

#[derive(Default)]
struct Cache {
    prolonged: HashMap<(usize, MultiIndex), Expr>,
    jac_inv_t: Option<Matrix>,
    phi: HashMap<(usize, MultiIndex, usize), Expr>,
    adjoint: Option<Matrix>,
}

/// A left action of an r-parameter group on (x, u), prolonged on demand.
#[derive(Clone)]
pub struct GroupActionSpec {
    ctx: JetContext,
    params: Vec<Symbol>,
    identity: Vec<BigRational>,
    defines: Vec<(Symbol, Expr)>,
    indep_action: Vec<Expr>,
    dep_action: Vec<Expr>,
    matrix: Option<Matrix>,
    composition: Option<Composition>,
    cache: Arc<Mutex<Cache>>,
}

impl std::fmt::Debug for GroupActionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupActionSpec")
            .field("ctx", &self.ctx)
            .field("params", &self.params)
            .field("indep_action", &self.indep_action)
            .field("dep_action", &self.dep_action)
            .finish()
    }
}

fn expand_defines(e: &Expr, defines: &[(Symbol, Expr)]) -> Result<Expr> {
    if defines.is_empty() {
        return Ok(e.clone());
    }
    let map: HashMap<Symbol, Expr> = defines.iter().cloned().collect();
    Ok(e.substitute(&map)?)
}

impl GroupActionSpec {
    /// Builds an action. `defines` eliminate dependent parameters (for example
    /// `d = (1+b c)/a`); they are substituted before anything else happens.
    pub fn new(
        ctx: JetContext,
        params: Vec<(Symbol, BigRational)>,
        defines: Vec<(Symbol, Expr)>,
        indep_action: Vec<Expr>,
        dep_action: Vec<Expr>,
    ) -> Result<GroupActionSpec> {
        if indep_action.len() != ctx.n_indep() || dep_action.len() != ctx.n_dep() {
            return Err(CoreError::InvalidSpec(format!(
                "expected {} independent and {} dependent transformation rules",
                ctx.n_indep(),
                ctx.n_dep()
            )));
        }
        let mut defs: Vec<(Symbol, Expr)> = Vec::new();
        for (s, e) in defines {
            let e = expand_defines(&e, &defs)?;
            defs.push((s, e));
        }
        let indep_action = indep_action
            .iter()
            .map(|e| expand_defines(e, &defs))
            .collect::<Result<Vec<_>>>()?;
        let dep_action = dep_action
            .iter()
            .map(|e| expand_defines(e, &defs))
            .collect::<Result<Vec<_>>>()?;
        let (params, identity) = params.into_iter().unzip();
        let spec = GroupActionSpec {
            ctx,
            params,
            identity,
            defines: defs,
            indep_action,
            dep_action,
            matrix: None,
            composition: None,
            cache: Arc::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        for e in self.indep_action.iter().chain(&self.dep_action) {
            for s in e.symbols() {
                let ok = match self.ctx.classify(s) {
                    Coord::Indep(_) => true,
                    Coord::Jet(_, k) => k.is_empty(),
                    Coord::Other => s.kind() == SymbolKind::Constant || self.params.contains(&s),
                };
                if !ok {
                    return Err(CoreError::InvalidSpec(format!(
                        "unexpected symbol `{}` in the action",
                        s.name()
                    )));
                }
            }
        }
        for (i, e) in self.indep_action.iter().enumerate() {
            if self.at_identity(e)? != self.ctx.indep_expr(i) {
                return Err(CoreError::InvalidSpec(format!(
                    "identity parameters do not fix `{}`",
                    self.ctx.indep_name(i)
                )));
            }
        }
        for (a, e) in self.dep_action.iter().enumerate() {
            if self.at_identity(e)? != self.ctx.dep(a).expr() {
                return Err(CoreError::InvalidSpec(format!(
                    "identity parameters do not fix `{}`",
                    self.ctx.dep_name(a)
                )));
            }
        }
        if self.jacobian().det().is_zero() {
            return Err(CoreError::SingularJacobian);
        }
        Ok(())
    }

    /// Attaches the standard matrix form of the group element.
    pub fn with_matrix(mut self, m: Matrix) -> Result<GroupActionSpec> {
        if m.rows() != m.cols() {
            return Err(CoreError::ShapeMismatch("group matrix must be square".into()));
        }
        let map: HashMap<Symbol, Expr> = self.defines.iter().cloned().collect();
        let m = m.try_map(|e| e.substitute(&map))?;
        let at_e = m.try_map(|e| e.substitute(&self.identity_map()))?;
        if at_e != Matrix::identity(m.rows()) {
            return Err(CoreError::InvalidSpec("group matrix is not the identity at e".into()));
        }
        self.matrix = Some(m);
        self.cache = Arc::default();
        Ok(self)
    }

    /// Attaches an explicit composition law.
    pub fn with_composition(mut self, c: Composition) -> Result<GroupActionSpec> {
        if c.second.len() != self.params.len() || c.product.len() != self.params.len() {
            return Err(CoreError::ShapeMismatch("composition law has the wrong length".into()));
        }
        self.composition = Some(c);
        Ok(self)
    }

    /// The same action with the invariant dummy variable τ appended.
    pub fn with_dummy(&self) -> Result<GroupActionSpec> {
        if self.ctx.dummy().is_some() {
            return Ok(self.clone());
        }
        let ctx = self.ctx.with_dummy()?;
        let mut indep = self.indep_action.clone();
        indep.push(ctx.indep_expr(ctx.n_indep() - 1));
        Ok(GroupActionSpec {
            ctx,
            params: self.params.clone(),
            identity: self.identity.clone(),
            defines: self.defines.clone(),
            indep_action: indep,
            dep_action: self.dep_action.clone(),
            matrix: self.matrix.clone(),
            composition: self.composition.clone(),
            cache: Arc::default(),
        })
    }

    pub fn ctx(&self) -> &JetContext {
        &self.ctx
    }

    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn identity_values(&self) -> &[BigRational] {
        &self.identity
    }

    pub fn defines(&self) -> &[(Symbol, Expr)] {
        &self.defines
    }

    pub fn indep_action(&self) -> &[Expr] {
        &self.indep_action
    }

    pub fn dep_action(&self) -> &[Expr] {
        &self.dep_action
    }

    pub fn matrix(&self) -> Option<&Matrix> {
        self.matrix.as_ref()
    }

    pub fn identity_map(&self) -> HashMap<Symbol, Expr> {
        self.params
            .iter()
            .zip(&self.identity)
            .map(|(s, v)| (*s, Expr::rational(v)))
            .collect()
    }

    pub fn at_identity(&self, e: &Expr) -> Result<Expr> {
        Ok(e.substitute(&self.identity_map())?)
    }

    /// dx̃/dx with entries D_j x̃_i.
    pub fn jacobian(&self) -> Matrix {
        let n = self.ctx.n_indep();
        Matrix::from_fn(n, n, |i, j| self.ctx.total_derivative(&self.indep_action[i], j))
    }

    /// (dx̃/dx)^{-T}, the matrix of the transformed total derivatives.
    pub fn jacobian_inv_t(&self) -> Result<Matrix> {
        if let Some(m) = &self.cache.lock().unwrap().jac_inv_t {
            return Ok(m.clone());
        }
        let m = self
            .jacobian()
            .inverse()
            .map_err(|_| CoreError::SingularJacobian)?
            .transpose();
        self.cache.lock().unwrap().jac_inv_t = Some(m.clone());
        Ok(m)
    }

    /// Transformed total derivative D̃_i applied to `e`.
    pub fn transformed_derivative(&self, e: &Expr, i: usize) -> Result<Expr> {
        let f = self.jacobian_inv_t()?;
        let mut acc = Expr::zero();
        for k in 0..self.ctx.n_indep() {
            if f[(i, k)].is_zero() {
                continue;
            }
            acc = acc.add(&f[(i, k)].mul(&self.ctx.total_derivative(e, k)));
        }
        Ok(acc)
    }

    /// ũ^α_K, computed by repeated transformed total differentiation.
    pub fn prolonged(&self, a: usize, k: &MultiIndex) -> Result<Expr> {
        let k = k
            .resize(self.ctx.n_indep())
            .ok_or_else(|| CoreError::ShapeMismatch("multi-index too long".into()))?;
        if let Some(e) = self.cache.lock().unwrap().prolonged.get(&(a, k.clone())) {
            return Ok(e.clone());
        }
        let e = match k.indices().last() {
            None => self.dep_action[a].clone(),
            Some(&i) => {
                let lower = self.prolonged(a, &k.without(i).unwrap())?;
                self.transformed_derivative(&lower, i)?
            }
        };
        self.cache.lock().unwrap().prolonged.insert((a, k), e.clone());
        Ok(e)
    }

    /// Bindings sending every coordinate occurring in `e` to its transform.
    pub fn action_map(&self, e: &Expr) -> Result<HashMap<Symbol, Expr>> {
        let mut map = HashMap::new();
        for s in e.symbols() {
            match self.ctx.classify(s) {
                Coord::Indep(i) => {
                    map.insert(s, self.indep_action[i].clone());
                }
                Coord::Jet(a, k) => {
                    map.insert(s, self.prolonged(a, &k)?);
                }
                Coord::Other => {}
            }
        }
        Ok(map)
    }

    /// g·e for an expression in jet coordinates.
    pub fn transform(&self, e: &Expr) -> Result<Expr> {
        Ok(e.substitute(&self.action_map(e)?)?)
    }

    /// ξ^i_j = ∂x̃_i/∂a_j at the identity.
    pub fn xi(&self, j: usize) -> Result<Vec<Expr>> {
        self.indep_action
            .iter()
            .map(|e| self.at_identity(&e.diff(self.params[j])))
            .collect()
    }

    /// φ^α_j = ∂ũ^α/∂a_j at the identity.
    pub fn phi(&self, j: usize) -> Result<Vec<Expr>> {
        self.dep_action
            .iter()
            .map(|e| self.at_identity(&e.diff(self.params[j])))
            .collect()
    }

    /// Characteristic Q^α_j = φ^α_j − Σ_i u^α_i ξ^i_j.
    pub fn characteristic(&self, j: usize) -> Result<Vec<Expr>> {
        let xi = self.xi(j)?;
        let phi = self.phi(j)?;
        let n = self.ctx.n_indep();
        Ok((0..self.ctx.n_dep())
            .map(|a| {
                let mut q = phi[a].clone();
                for (i, x) in xi.iter().enumerate() {
                    q = q.sub(&x.mul(&self.ctx.jet_expr(a, &MultiIndex::unit(n, i))));
                }
                q
            })
            .collect())
    }

    /// Prolonged infinitesimal φ^α_{K,j} = D_K Q^α_j + Σ_i ξ^i_j u^α_{Ki}.
    pub fn phi_k(&self, a: usize, k: &MultiIndex, j: usize) -> Result<Expr> {
        let k = k
            .resize(self.ctx.n_indep())
            .ok_or_else(|| CoreError::ShapeMismatch("multi-index too long".into()))?;
        let key = (a, k.clone(), j);
        if let Some(e) = self.cache.lock().unwrap().phi.get(&key) {
            return Ok(e.clone());
        }
        let q = self.characteristic(j)?.swap_remove(a);
        let mut e = self.ctx.iterated_derivative(&q, &k);
        for (i, x) in self.xi(j)?.iter().enumerate() {
            e = e.add(&x.mul(&self.ctx.jet_expr(a, &k.with(i))));
        }
        self.cache.lock().unwrap().phi.insert(key, e.clone());
        Ok(e)
    }

    /// The same quantity by differentiating the prolonged action at the identity.
    pub fn phi_k_direct(&self, a: usize, k: &MultiIndex, j: usize) -> Result<Expr> {
        self.at_identity(&self.prolonged(a, k)?.diff(self.params[j]))
    }

    /// pr v_j applied to an expression in jet coordinates.
    pub fn prolonged_generator(&self, j: usize, e: &Expr) -> Result<Expr> {
        let xi = self.xi(j)?;
        let mut acc = Expr::zero();
        for s in e.symbols() {
            let coeff = match self.ctx.classify(s) {
                Coord::Indep(i) => xi[i].clone(),
                Coord::Jet(a, k) => self.phi_k(a, &k, j)?,
                Coord::Other => continue,
            };
            if !coeff.is_zero() {
                acc = acc.add(&coeff.mul(&e.diff(s)));
            }
        }
        Ok(acc)
    }

    /// Entry (j, K) = D_K Q^α_j.
    pub fn characteristic_matrix(&self, a: usize, rows: &[MultiIndex]) -> Result<Matrix> {
        let qs = (0..self.dim())
            .map(|j| Ok(self.characteristic(j)?.swap_remove(a)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_fn(self.dim(), rows.len(), |j, c| {
            self.ctx.iterated_derivative(&qs[j], &rows[c])
        }))
    }

    /// Base coordinates (x, u) as symbols.
    pub fn base_coords(&self) -> Vec<Symbol> {
        (0..self.ctx.n_indep())
            .map(|i| self.ctx.indep(i))
            .chain((0..self.ctx.n_dep()).map(|a| self.ctx.dep(a)))
            .collect()
    }

    fn base_action(&self) -> Vec<Expr> {
        self.indep_action.iter().chain(&self.dep_action).cloned().collect()
    }

    /// Components of v_j on the base, (ξ_j, φ_j).
    pub fn generator(&self, j: usize) -> Result<Vec<Expr>> {
        let mut v = self.xi(j)?;
        v.extend(self.phi(j)?);
        Ok(v)
    }

    /// Adjoint representation: g·(Σ c_j v_j) = c·Ad(g)·v.
    ///
    /// Each pushed-forward generator is re-expressed in the generator basis by a
    /// linear solve at sample points and then checked symbolically.
    pub fn adjoint(&self) -> Result<Matrix> {
        if let Some(m) = &self.cache.lock().unwrap().adjoint {
            return Ok(m.clone());
        }
        let r = self.dim();
        let coords = self.base_coords();
        let zt = self.base_action();
        let n = coords.len();
        let dz = Matrix::from_fn(n, n, |i, m| zt[i].diff(coords[m]));
        let dz_inv = dz.inverse().map_err(|_| CoreError::SingularJacobian)?;
        let to_tilde: HashMap<Symbol, Expr> = coords.iter().cloned().zip(zt.iter().cloned()).collect();
        let gens = (0..r).map(|j| self.generator(j)).collect::<Result<Vec<_>>>()?;
        let pushed = gens
            .iter()
            .map(|v| {
                let vt = v
                    .iter()
                    .map(|c| c.substitute(&to_tilde))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                Ok(dz_inv.mul_vec(&vt))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut rng = sample::rng(sample::DEFAULT_SEED);
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        let mut rhs: Vec<Vec<Expr>> = Vec::new();
        for _ in 0..r + 3 {
            let pt: HashMap<Symbol, Expr> = coords
                .iter()
                .map(|s| (*s, Expr::rational(&sample::small_int(&mut rng))))
                .collect();
            for m in 0..n {
                let row = gens
                    .iter()
                    .map(|v| v[m].substitute(&pt).map(|e| e.as_rational()))
                    .collect::<std::result::Result<Vec<_>, _>>();
                let row = match row {
                    Ok(v) if v.iter().all(|x| x.is_some()) => v.into_iter().map(Option::unwrap).collect(),
                    _ => continue,
                };
                let b = pushed
                    .iter()
                    .map(|w| w[m].substitute(&pt))
                    .collect::<std::result::Result<Vec<_>, _>>();
                let Ok(b) = b else { continue };
                rows.push(row);
                rhs.push(b);
            }
        }
        let picked = sample::independent_rows(&rows);
        if picked.len() < r {
            return Err(CoreError::GeneratorsNotIndependent);
        }
        let picked = &picked[..r];
        let nmat = Matrix::from_fn(r, r, |i, k| Expr::rational(&rows[picked[i]][k]));
        let bmat = Matrix::from_fn(r, r, |i, j| rhs[picked[i]][j].clone());
        let x = nmat.solve(&bmat).map_err(|_| CoreError::GeneratorsNotIndependent)?;
        let ad = x.transpose();
        for j in 0..r {
            for m in 0..n {
                let mut res = pushed[j][m].clone();
                for k in 0..r {
                    res = res.sub(&ad[(j, k)].mul(&gens[k][m]));
                }
                if !res.is_zero() {
                    return Err(CoreError::GeneratorsNotIndependent);
                }
            }
        }
        self.cache.lock().unwrap().adjoint = Some(ad.clone());
        Ok(ad)
    }

    /// Positions of the free parameters inside the group matrix, when every
    /// parameter is literally a matrix entry.
    pub fn entry_chart(&self) -> Option<Vec<(usize, usize)>> {
        let m = self.matrix.as_ref()?;
        self.params
            .iter()
            .map(|p| {
                let pe = p.expr();
                (0..m.rows())
                    .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
                    .find(|&(i, j)| m[(i, j)] == pe)
            })
            .collect()
    }

    /// Parameters of g^{-1} in the chart, available for matrix groups whose
    /// parameters are matrix entries.
    pub fn inverse_params(&self) -> Option<Vec<Expr>> {
        let pos = self.entry_chart()?;
        let inv = self.matrix.as_ref()?.inverse().ok()?;
        Some(pos.iter().map(|&(i, j)| inv[(i, j)].clone()).collect())
    }

    /// Ad(g)^{-1}.
    pub fn adjoint_inverse(&self) -> Result<Matrix> {
        let ad = self.adjoint()?;
        if let Some(ip) = self.inverse_params() {
            let map: HashMap<Symbol, Expr> = self.params.iter().cloned().zip(ip).collect();
            return Ok(ad.try_map(|e| e.substitute(&map))?);
        }
        ad.inverse().map_err(|_| CoreError::GeneratorsNotIndependent)
    }

    /// The composition law, explicit or derived from the matrix form.
    pub fn composition(&self) -> Option<Composition> {
        if let Some(c) = &self.composition {
            return Some(c.clone());
        }
        [true, false]
            .into_iter()
            .filter_map(|hom| self.matrix_composition(hom))
            .find(|c| self.is_left_composition(c))
    }

    /// Whether the matrix form satisfies M(gh) = M(g)M(h) (rather than
    /// M(h)M(g)) for the composition of the action.
    pub fn matrix_is_homomorphism(&self) -> Option<bool> {
        [true, false]
            .into_iter()
            .find(|&hom| self.matrix_composition(hom).is_some_and(|c| self.is_left_composition(&c)))
    }

    fn matrix_composition(&self, hom: bool) -> Option<Composition> {
        let pos = self.entry_chart()?;
        let m = self.matrix.as_ref()?;
        let second: Vec<Symbol> = self
            .params
            .iter()
            .map(|p| Symbol::new(&format!("{}'", p.name()), SymbolKind::GroupParam))
            .collect();
        let rename: HashMap<Symbol, Expr> = self
            .params
            .iter()
            .cloned()
            .zip(second.iter().map(|s| s.expr()))
            .collect();
        let mh = m.try_map(|e| e.substitute(&rename)).ok()?;
        let prod = if hom { m.mul(&mh) } else { mh.mul(m) };
        Some(Composition {
            second,
            product: pos.iter().map(|&(i, j)| prod[(i, j)].clone()).collect(),
        })
    }

    /// Checks g·(h·z) = (g h)·z on the base at random points.
    pub fn is_left_composition(&self, c: &Composition) -> bool {
        let coords = self.base_coords();
        let zt = self.base_action();
        let mut ev = Evaluator::new(sample::DEFAULT_SEED);
        let mut rng = sample::rng(sample::DEFAULT_SEED ^ 0xc0);
        let mut ok = 0;
        for _ in 0..sample::SAMPLES * 5 {
            if ok >= sample::SAMPLES {
                break;
            }
            ev.reset();
            let g: Vec<BigRational> = self.params.iter().map(|_| sample::rational(&mut rng)).collect();
            let h: Vec<BigRational> = self.params.iter().map(|_| sample::rational(&mut rng)).collect();
            let z: Vec<BigRational> = coords.iter().map(|_| sample::rational(&mut rng)).collect();
            let assign = |ev: &mut Evaluator, ps: &[Symbol], vs: &[BigRational]| {
                for (p, v) in ps.iter().zip(vs) {
                    ev.set(*p, v.clone());
                }
            };
            // h·z
            assign(&mut ev, &self.params, &h);
            assign(&mut ev, &coords, &z);
            let Some(hz) = zt.iter().map(|e| ev.eval(e)).collect::<Option<Vec<_>>>() else { continue };
            // g·(h·z)
            assign(&mut ev, &self.params, &g);
            assign(&mut ev, &coords, &hz);
            let Some(ghz) = zt.iter().map(|e| ev.eval(e)).collect::<Option<Vec<_>>>() else { continue };
            // (g h)·z
            assign(&mut ev, &self.params, &g);
            assign(&mut ev, &c.second, &h);
            let Some(gh) = c.product.iter().map(|e| ev.eval(e)).collect::<Option<Vec<_>>>() else { continue };
            assign(&mut ev, &self.params, &gh);
            assign(&mut ev, &coords, &z);
            let Some(ghz2) = zt.iter().map(|e| ev.eval(e)).collect::<Option<Vec<_>>>() else { continue };
            if ghz != ghz2 {
                return false;
            }
            ok += 1;
        }
        ok > 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use symcore::parse_expr;

    pub(crate) fn sl2_linear() -> GroupActionSpec {
        let ctx = JetContext::new(&["x", "y"], &["u"]).unwrap();
        let ps: Vec<Symbol> = ["a", "b", "c", "d"]
            .iter()
            .map(|n| Symbol::new(n, SymbolKind::GroupParam))
            .collect();
        let r = |s: &str| {
            let c = ctx.clone();
            let ps = ps.clone();
            parse_expr(s, &move |n: &str| {
                c.resolve(n).or_else(|| ps.iter().find(|p| &*p.name() == n).map(|p| p.expr()))
            })
            .unwrap()
        };
        let one = BigRational::from_integer(1.into());
        let zero = BigRational::from_integer(0.into());
        GroupActionSpec::new(
            ctx.clone(),
            vec![(ps[0], one), (ps[1], zero.clone()), (ps[2], zero)],
            vec![(ps[3], r("(1+b*c)/a"))],
            vec![r("a*x+b*y"), r("c*x+d*y")],
            vec![r("u")],
        )
        .unwrap()
        .with_matrix(Matrix::from_rows(vec![vec![r("a"), r("b")], vec![r("c"), r("d")]]))
        .unwrap()
    }

    fn p(g: &GroupActionSpec, s: &str) -> Expr {
        let c = g.ctx().clone();
        let ps = g.params().to_vec();
        parse_expr(s, &move |n: &str| {
            c.resolve(n).or_else(|| ps.iter().find(|p| &*p.name() == n).map(|p| p.expr()))
        })
        .unwrap()
    }

    #[test]
    fn prolongation_sl2_linear() {
        let g = sl2_linear();
        let ux = g.prolonged(0, &MultiIndex::unit(2, 0)).unwrap();
        assert_eq!(ux, p(&g, "(1+b*c)/a*u_x - c*u_y"));
        let uy = g.prolonged(0, &MultiIndex::unit(2, 1)).unwrap();
        assert_eq!(uy, p(&g, "-b*u_x + a*u_y"));
    }

    #[test]
    fn infinitesimals_sl2_linear() {
        let g = sl2_linear();
        assert_eq!(g.xi(0).unwrap(), vec![p(&g, "x"), p(&g, "-y")]);
        assert_eq!(g.xi(1).unwrap(), vec![p(&g, "y"), Expr::zero()]);
        assert_eq!(g.xi(2).unwrap(), vec![Expr::zero(), p(&g, "x")]);
        assert_eq!(g.characteristic(0).unwrap()[0], p(&g, "-x*u_x + y*u_y"));
        assert_eq!(g.characteristic(1).unwrap()[0], p(&g, "-y*u_x"));
        let ux = MultiIndex::unit(2, 0);
        assert_eq!(g.phi_k(0, &ux, 0).unwrap(), p(&g, "-u_x"));
        for j in 0..3 {
            for k in MultiIndex::up_to_order(2, 2) {
                assert_eq!(g.phi_k(0, &k, j).unwrap(), g.phi_k_direct(0, &k, j).unwrap());
            }
        }
        let rows = [MultiIndex::zero(2), MultiIndex::unit(2, 0), MultiIndex::unit(2, 1)];
        let m = g.characteristic_matrix(0, &rows).unwrap();
        assert_eq!(m.row(1), vec![p(&g, "-y*u_x"), p(&g, "-y*u_xx"), p(&g, "-u_x - y*u_xy")]);
    }

    #[test]
    fn adjoint_sl2_linear() {
        let g = sl2_linear();
        let ad = g.adjoint().unwrap();
        let want = [
            ["a*d+b*c", "2*b*d", "-2*a*c"],
            ["c*d", "d^2", "-c^2"],
            ["-a*b", "-b^2", "a^2"],
        ];
        for i in 0..3 {
            for j in 0..3 {
                let w = p(&g, want[i][j].replace('d', "((1+b*c)/a)").as_str());
                assert_eq!(ad[(i, j)], w, "entry {i},{j}");
            }
        }
        let inv = g.adjoint_inverse().unwrap();
        assert_eq!(ad.mul(&inv), Matrix::identity(3));
        assert!(g.composition().is_some());
    }
}
