//! Invariant differential operators, correction terms, commutators, invariant
//! one-forms and syzygies.
//!
//! Everything is computed from the explicit frame: 𝒟_i = Σ_k F_ik D_k with
//! F = 𝒥^{-T} and 𝒥 = (D_j x̃_i) at the frame. The correction matrix K and the
//! commutator formula in terms of K are kept as independent cross-checks.
//!
//! Operator polynomials are stored as sums c·𝒟_{w_1}…𝒟_{w_m}(I^α_τ) with the
//! coefficient on the left and the word `w` nondecreasing; the syzygy rewriting
//! only ever prepends an index not larger than the rest of the word, so no
//! reordering with commutators is needed.

use crate::error::{CoreError, Result};
use crate::jetspace::{Coord, MultiIndex, TotalVectorField};
use crate::movingframe::Frame;
use crate::sample;
use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;
use symcore::{Evaluator, Expr, Matrix};

/// Invariant calculus attached to a frame.
#[derive(Debug)]
pub struct InvariantCalculus {
    frame: Frame,
    jac: Matrix,
    inv_t: Matrix,
    rewrites: Mutex<HashMap<(usize, MultiIndex), OpPoly>>,
}

/// Correction matrix K (rows: operators, columns: group parameters) with
/// N_ij = Σ_ℓ K_jℓ ξ^i_ℓ(I).
#[derive(Clone, Debug)]
pub struct CorrectionData {
    pub k: Matrix,
    pub n: Matrix,
}

/// A^k_ij with [𝒟_i, 𝒟_j] = Σ_k A^k_ij 𝒟_k, stored as `a[k][i][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorTensor {
    pub a: Vec<Vec<Vec<Expr>>>,
}

impl CommutatorTensor {
    pub fn get(&self, k: usize, i: usize, j: usize) -> &Expr {
        &self.a[k][i][j]
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }
}

impl InvariantCalculus {
    pub fn new(frame: &Frame) -> Result<InvariantCalculus> {
        let jac = frame.jacobian()?;
        let inv = jac.inverse().map_err(|_| CoreError::SingularJacobian)?;
        let inv_t = inv.transpose().try_map(|e| Ok(frame.reduce(e).map_err(sym_err)?))?;
        Ok(InvariantCalculus {
            frame: frame.clone(),
            jac,
            inv_t,
            rewrites: Mutex::default(),
        })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Number of operators, the dummy variable included when present.
    pub fn dim(&self) -> usize {
        self.frame.ctx().n_indep()
    }

    /// 𝒥 = (D_j x̃_i) at the frame.
    pub fn jacobian(&self) -> &Matrix {
        &self.jac
    }

    pub fn operators(&self) -> Vec<TotalVectorField> {
        (0..self.dim()).map(|i| TotalVectorField::new(self.inv_t.row(i))).collect()
    }

    /// 𝒟_i e.
    pub fn d(&self, i: usize, e: &Expr) -> Result<Expr> {
        let mut acc = Expr::zero();
        for k in 0..self.dim() {
            let f = &self.inv_t[(i, k)];
            if !f.is_zero() {
                acc = acc.add(&f.mul(&self.frame.total_derivative(e, k)?));
            }
        }
        self.frame.reduce(&acc)
    }

    /// 𝒟_{w_1}…𝒟_{w_m} e, the rightmost operator applied first.
    pub fn d_word(&self, word: &[usize], e: &Expr) -> Result<Expr> {
        let mut e = e.clone();
        for &i in word.iter().rev() {
            e = self.d(i, &e)?;
        }
        Ok(e)
    }

    /// (𝒟_j I^α_K, M^α_{Kj} = 𝒟_j I^α_K − I^α_{Kj}).
    pub fn invariant_derivative(&self, a: usize, k: &MultiIndex, j: usize) -> Result<(Expr, Expr)> {
        let ctx = self.frame.ctx();
        let k = resize(k, self.dim())?;
        let d = self.d(j, &self.frame.invariant_of(ctx.jet(a, &k))?)?;
        let m = d.sub(&self.frame.invariant_of(ctx.jet(a, &k.with(j)))?);
        Ok((d, self.frame.reduce(&m)?))
    }

    /// I(dx_i) = Σ_j 𝒥_ij dx_j.
    pub fn one_forms(&self) -> Vec<DiffForm> {
        (0..self.dim()).map(|i| DiffForm::one_form(&self.jac.row(i))).collect()
    }

    /// Horizontal exterior derivative.
    pub fn exterior_d(&self, w: &DiffForm) -> Result<DiffForm> {
        let d = w.exterior(self.dim(), &|e, k| self.frame.total_derivative(e, k))?;
        d.try_map(|e| self.frame.reduce(e))
    }

    /// V_i ⌟ w with V_i the dual vector of 𝒟_i.
    pub fn interior(&self, i: usize, w: &DiffForm) -> Result<DiffForm> {
        w.interior(&self.inv_t.row(i)).try_map(|e| self.frame.reduce(e))
    }

    /// 𝒟_i(w) = d(V_i ⌟ w) + V_i ⌟ dw.
    pub fn lie_derivative(&self, i: usize, w: &DiffForm) -> Result<DiffForm> {
        let a = self.exterior_d(&self.interior(i, w)?)?;
        let b = self.interior(i, &self.exterior_d(w)?)?;
        a.add(&b).try_map(|e| self.frame.reduce(e))
    }

    /// Coefficients of a one-form in the basis I(dx_k).
    pub fn in_basis(&self, w: &DiffForm) -> Result<Vec<Expr>> {
        if w.degree().is_some_and(|d| d != 1) {
            return Err(CoreError::ShapeMismatch("expected a one-form".into()));
        }
        (0..self.dim())
            .map(|k| Ok(self.interior(k, w)?.coeff(&[])))
            .collect()
    }

    /// Correction matrix with N. Matrix groups without radicals in the frame use
    /// the Maurer–Cartan route, which avoids invariantizing large expressions;
    /// other groups substitute the frame into D_j ρ_ℓ.
    pub fn correction_matrix(&self) -> Result<CorrectionData> {
        let k = match self.correction_matrix_mc()? {
            Some(k) => k,
            None => self.correction_matrix_substituted()?,
        };
        let n = self.correction_n(&k)?;
        Ok(CorrectionData { k, n })
    }

    /// K_jℓ = I(D_j ρ_ℓ).
    pub fn correction_matrix_substituted(&self) -> Result<Matrix> {
        let r = self.frame.spec().dim();
        Ok(Matrix::try_from_fn(self.dim(), r, |j, l| {
            let e = self
                .frame
                .total_derivative(&self.frame.values()[l], j)
                .and_then(|d| self.frame.invariantize(&d));
            e.map_err(sym_err)
        })?)
    }

    /// Row j holds the chart entries of (𝒟_j M(ρ)) M(ρ)^{-1}, or of
    /// M(ρ)^{-1} 𝒟_j M(ρ) when the matrix reverses products. `None` when the
    /// group has no matrix chart or the frame involves radicals.
    pub fn correction_matrix_mc(&self) -> Result<Option<Matrix>> {
        let spec = self.frame.spec();
        let (Some(m), Some(chart), Some(hom)) = (spec.matrix(), spec.entry_chart(), spec.matrix_is_homomorphism())
        else {
            return Ok(None);
        };
        if !self.frame.radicals().is_empty() {
            return Ok(None);
        }
        let mr = m.try_map(|e| self.frame.at_frame(e).map_err(sym_err))?;
        let inv = mr.inverse()?;
        let mut rows = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let dm = mr.try_map(|e| self.d(j, e).map_err(sym_err))?;
            let x = if hom { dm.mul(&inv) } else { inv.mul(&dm) };
            rows.push(chart.iter().map(|&(a, b)| x[(a, b)].clone()).collect());
        }
        Ok(Some(Matrix::from_rows(rows)))
    }

    /// Compares `k` with I(D_j ρ_ℓ) at random points, evaluating D_j ρ_ℓ at the
    /// numerical values of the invariantized coordinates.
    pub fn check_correction_matrix(&self, k: &Matrix, seed: u64) -> Result<bool> {
        let r = self.frame.spec().dim();
        let derivs = (0..self.dim())
            .map(|j| {
                (0..r)
                    .map(|l| self.frame.total_derivative(&self.frame.values()[l], j))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut checked = 0;
        for t in 0..sample::SAMPLES as u64 * 3 {
            if checked == sample::SAMPLES {
                break;
            }
            let mut ev = Evaluator::new(seed.wrapping_add(t));
            let mut ok = true;
            'point: for (j, row) in derivs.iter().enumerate() {
                for (l, d) in row.iter().enumerate() {
                    let mut at = Evaluator::new(seed);
                    for s in d.symbols() {
                        match ev.eval(&self.frame.invariant_of(s)?) {
                            Some(v) => at.set(s, v),
                            None => {
                                ok = false;
                                break 'point;
                            }
                        }
                    }
                    match (at.eval(d), ev.eval(&k[(j, l)])) {
                        (Some(a), Some(b)) if a == b => {}
                        (Some(_), Some(_)) => return Ok(false),
                        _ => {
                            ok = false;
                            break 'point;
                        }
                    }
                }
            }
            checked += ok as usize;
        }
        Ok(checked == sample::SAMPLES)
    }

    /// K from the phantom equations 0 = 𝒟_j I(ψ_n) = I(D_j ψ_n) + Σ_ℓ K_jℓ I(pr v_ℓ ψ_n).
    pub fn correction_matrix_phantom(&self) -> Result<Matrix> {
        let spec = self.frame.spec();
        let ctx = self.frame.ctx();
        let r = spec.dim();
        let eqs = &self.frame.normalization().equations;
        let p = Matrix::try_from_fn(r, r, |n, l| {
            let e = spec
                .prolonged_generator(l, &eqs[n].0)
                .and_then(|v| self.frame.invariantize(&v));
            e.map_err(sym_err)
        })?;
        let b = Matrix::try_from_fn(r, self.dim(), |n, j| {
            self.frame
                .invariantize(&ctx.total_derivative(&eqs[n].0, j).neg())
                .map_err(sym_err)
        })?;
        let kt = p.solve(&b).map_err(|_| CoreError::BasisSolveFailed)?;
        Ok(kt.transpose().try_map(|e| self.frame.reduce(e).map_err(sym_err))?)
    }

    /// N_ij = Σ_ℓ K_jℓ ξ^i_ℓ(I).
    pub fn correction_n(&self, k: &Matrix) -> Result<Matrix> {
        let xi = self.xi_invariantized()?;
        Ok(Matrix::try_from_fn(self.dim(), self.dim(), |i, j| {
            let mut acc = Expr::zero();
            for (l, x) in xi.iter().enumerate() {
                acc = acc.add(&k[(j, l)].mul(&x[i]));
            }
            self.frame.reduce(&acc).map_err(sym_err)
        })?)
    }

    /// M^α_{Kj} = Σ_ℓ K_jℓ φ^α_{K,ℓ}(I).
    pub fn correction_m(&self, k: &Matrix, a: usize, idx: &MultiIndex, j: usize) -> Result<Expr> {
        let spec = self.frame.spec();
        let mut acc = Expr::zero();
        for l in 0..spec.dim() {
            if k[(j, l)].is_zero() {
                continue;
            }
            let phi = self.frame.invariantize(&spec.phi_k(a, idx, l)?)?;
            acc = acc.add(&k[(j, l)].mul(&phi));
        }
        self.frame.reduce(&acc)
    }

    fn xi_invariantized(&self) -> Result<Vec<Vec<Expr>>> {
        let spec = self.frame.spec();
        (0..spec.dim())
            .map(|l| spec.xi(l)?.iter().map(|x| self.frame.invariantize(x)).collect())
            .collect()
    }

    /// A^k_ij = Σ_m (𝒟_i F_jm − 𝒟_j F_im) 𝒥_km, from the brackets of the operators.
    pub fn commutator_tensor(&self) -> Result<CommutatorTensor> {
        let n = self.dim();
        let mut df = vec![vec![vec![Expr::zero(); n]; n]; n];
        for (i, row) in df.iter_mut().enumerate() {
            for (j, col) in row.iter_mut().enumerate() {
                for (m, slot) in col.iter_mut().enumerate() {
                    *slot = self.d(i, &self.inv_t[(j, m)])?;
                }
            }
        }
        let mut a = vec![vec![vec![Expr::zero(); n]; n]; n];
        for (k, ak) in a.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Expr::zero();
                    for m in 0..n {
                        let b = df[i][j][m].sub(&df[j][i][m]);
                        if !b.is_zero() {
                            acc = acc.add(&b.mul(&self.jac[(k, m)]));
                        }
                    }
                    ak[i][j] = self.frame.reduce(&acc)?;
                }
            }
        }
        Ok(CommutatorTensor { a })
    }

    /// A^k_ij = Σ_ℓ K_jℓ Ξ^k_ℓi − K_iℓ Ξ^k_ℓj with Ξ^k_ℓi = I(D_i ξ^k_ℓ).
    pub fn commutator_formula(&self, k: &Matrix) -> Result<CommutatorTensor> {
        let n = self.dim();
        let spec = self.frame.spec();
        let ctx = self.frame.ctx();
        // big_xi[l][k][i]
        let mut big_xi = Vec::new();
        for l in 0..spec.dim() {
            let xi = spec.xi(l)?;
            let rows = xi
                .iter()
                .map(|x| {
                    (0..n)
                        .map(|i| self.frame.invariantize(&ctx.total_derivative(x, i)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            big_xi.push(rows);
        }
        let mut a = vec![vec![vec![Expr::zero(); n]; n]; n];
        for (kk, ak) in a.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Expr::zero();
                    for (l, bx) in big_xi.iter().enumerate() {
                        acc = acc.add(&k[(j, l)].mul(&bx[kk][i]));
                        acc = acc.sub(&k[(i, l)].mul(&bx[kk][j]));
                    }
                    ak[i][j] = self.frame.reduce(&acc)?;
                }
            }
        }
        Ok(CommutatorTensor { a })
    }

    /// Right side of the commutation rule for 𝒟_τ 𝒟_K applied to `f`:
    /// 𝒟_K 𝒟_τ f + Σ_ℓ Σ_n 𝒟_{k_1…k_{ℓ-1}}(A^n_{τ,k_ℓ} 𝒟_n 𝒟_{k_{ℓ+1}…k_m} f).
    pub fn commuted_tau_derivative(&self, a: &CommutatorTensor, word: &[usize], f: &Expr) -> Result<Expr> {
        let tau = self.tau()?;
        let mut acc = self.d_word(word, &self.d(tau, f)?)?;
        for (l, &kl) in word.iter().enumerate() {
            let rest = self.d_word(&word[l + 1..], f)?;
            let mut inner = Expr::zero();
            for nn in 0..self.dim() {
                if nn == tau || a.get(nn, tau, kl).is_zero() {
                    continue;
                }
                inner = inner.add(&a.get(nn, tau, kl).mul(&self.d(nn, &rest)?));
            }
            acc = acc.add(&self.d_word(&word[..l], &inner)?);
        }
        self.frame.reduce(&acc)
    }

    fn tau(&self) -> Result<usize> {
        self.frame
            .ctx()
            .dummy()
            .ok_or_else(|| CoreError::InvalidSpec("the dummy variable is required".into()))
    }

    /// Splits an expression linear in τ-jets into Σ coeff·u^γ_{Mτ}; keys are (γ, M).
    fn tau_coefficients(&self, e: &Expr) -> Result<Vec<((usize, MultiIndex), Expr)>> {
        let tau = self.tau()?;
        let ctx = self.frame.ctx();
        let mut out = Vec::new();
        let mut rest = e.clone();
        for s in e.symbols() {
            if let Coord::Jet(g, m) = ctx.classify(s) {
                if m.count(tau) == 0 {
                    continue;
                }
                let c = e.diff(s);
                let has_tau = |x: &Expr| {
                    x.symbols()
                        .into_iter()
                        .any(|t| matches!(ctx.classify(t), Coord::Jet(_, k) if k.count(tau) > 0))
                };
                if m.count(tau) > 1 || has_tau(&c) {
                    return Err(CoreError::IdentityFailed(format!("{e} is not linear in first τ-derivatives")));
                }
                rest = rest.sub(&c.mul(&s.expr()));
                out.push(((g, m.without(tau).expect("τ present")), c));
            }
        }
        if !rest.is_zero() {
            return Err(CoreError::IdentityFailed(format!("{e} has terms free of τ-derivatives")));
        }
        Ok(out)
    }

    /// I(e) for e linear in τ-jets, with each I^γ_{Mτ} rewritten as an operator
    /// polynomial in the I^α_τ.
    fn express_tau_linear(&self, e: &Expr, k: &Matrix) -> Result<OpPoly> {
        let mut acc = OpPoly::zero();
        for ((g, m), c) in self.tau_coefficients(e)? {
            let c = self.frame.invariantize(&c)?;
            acc = acc.add(&self.rewrite(g, &m, k)?.scale(&c));
        }
        acc.try_map(|x| self.frame.reduce(x))
    }

    /// I^β_{Lτ} as an operator polynomial applied to the I^α_τ.
    pub fn rewrite(&self, beta: usize, l: &MultiIndex, k: &Matrix) -> Result<OpPoly> {
        let bound = 2 * l.order().max(1) as usize;
        self.rewrite_at(beta, &resize(l, self.dim())?, k, 0, bound)
    }

    fn rewrite_at(&self, beta: usize, l: &MultiIndex, k: &Matrix, depth: usize, bound: usize) -> Result<OpPoly> {
        if depth > bound {
            return Err(CoreError::RewriteNotTerminating(bound));
        }
        let key = (beta, l.clone());
        if let Some(p) = self.rewrites.lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let tau = self.tau()?;
        if l.count(tau) > 0 {
            return Err(CoreError::InvalidSpec("rewrite index must not contain τ".into()));
        }
        let out = match l.first() {
            None => OpPoly::atom(beta),
            Some(j) => {
                // I^β_{L'τ j} = 𝒟_j I^β_{L'τ} − Σ_ℓ K_jℓ φ^β_{L'τ,ℓ}(I)
                let lp = l.without(j).expect("j occurs in l");
                let mut acc = self.rewrite_at(beta, &lp, k, depth + 1, bound)?.compose_left(j, self)?;
                let lt = lp.with(tau);
                let spec = self.frame.spec();
                for ell in 0..spec.dim() {
                    if k[(j, ell)].is_zero() {
                        continue;
                    }
                    let phi = spec.phi_k(beta, &lt, ell)?;
                    for ((g, m), c) in self.tau_coefficients(&phi)? {
                        let c = self.frame.invariantize(&c)?.mul(&k[(j, ell)]);
                        let sub = self.rewrite_at(g, &m, k, depth + 1, bound)?;
                        acc = acc.sub(&sub.scale(&c));
                    }
                }
                acc.try_map(|x| self.frame.reduce(x))?
            }
        };
        self.rewrites.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// 𝒟_τ I(e) as an operator polynomial in the I^α_τ, for e in the base jet
    /// coordinates: Σ_z I(∂e/∂z)·𝒟_τ I(z), with 𝒟_τ J^i = N_iτ and
    /// 𝒟_τ I^α_K = I^α_{Kτ} + M^α_{Kτ}.
    pub fn syzygy(&self, e: &Expr) -> Result<OpPoly> {
        let tau = self.tau()?;
        let ctx = self.frame.ctx();
        let spec = self.frame.spec();
        let k = self.correction_matrix()?.k;
        let ktau = (0..spec.dim())
            .map(|l| {
                let d = self.frame.total_derivative(&self.frame.values()[l], tau)?;
                self.express_tau_linear(&d, &k)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut acc = OpPoly::zero();
        for s in e.symbols() {
            let (mut term, infinitesimal) = match ctx.classify(s) {
                Coord::Indep(i) if i == tau => {
                    return Err(CoreError::InvalidSpec("generator depends on τ".into()));
                }
                Coord::Indep(i) => (OpPoly::zero(), (0..spec.dim()).map(|l| Ok(spec.xi(l)?[i].clone())).collect::<Result<Vec<_>>>()?),
                Coord::Jet(a, m) => {
                    if m.count(tau) > 0 {
                        return Err(CoreError::InvalidSpec("generator depends on τ".into()));
                    }
                    let phis = (0..spec.dim()).map(|l| spec.phi_k(a, &m, l)).collect::<Result<Vec<_>>>()?;
                    (self.rewrite(a, &m, &k)?, phis)
                }
                Coord::Other => continue,
            };
            for (l, inf) in infinitesimal.iter().enumerate() {
                let c = self.frame.invariantize(inf)?;
                if !c.is_zero() {
                    term = term.add(&ktau[l].scale(&c));
                }
            }
            let w = self.frame.invariantize(&e.diff(s))?;
            acc = acc.add(&term.scale(&w));
        }
        acc.try_map(|x| self.frame.reduce(x))
    }

    /// The arguments I^α_τ in jet coordinates, one per dependent variable.
    pub fn tau_invariants(&self) -> Result<Vec<Expr>> {
        let tau = self.tau()?;
        let ctx = self.frame.ctx();
        (0..ctx.n_dep())
            .map(|a| self.frame.invariant_of(ctx.jet(a, &MultiIndex::unit(self.dim(), tau))))
            .collect()
    }
}

fn resize(k: &MultiIndex, n: usize) -> Result<MultiIndex> {
    k.resize(n)
        .ok_or_else(|| CoreError::ShapeMismatch("multi-index too long".into()))
}

fn sym_err(e: CoreError) -> symcore::SymError {
    match e {
        CoreError::Sym(s) => s,
        other => symcore::SymError::DegenerateExpression(other.to_string()),
    }
}

/// Differential form Σ c_I dx_{i_1}∧…∧dx_{i_k} with strictly increasing I.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffForm {
    terms: BTreeMap<Vec<usize>, Expr>,
}

impl DiffForm {
    pub fn zero() -> DiffForm {
        DiffForm::default()
    }

    /// A zero-form.
    pub fn function(f: Expr) -> DiffForm {
        let mut w = DiffForm::zero();
        w.push(vec![], f);
        w
    }

    pub fn one_form(coeffs: &[Expr]) -> DiffForm {
        let mut w = DiffForm::zero();
        for (i, c) in coeffs.iter().enumerate() {
            w.push(vec![i], c.clone());
        }
        w
    }

    /// dx_{i_1}∧…∧dx_{i_k} in any order.
    pub fn basis(idx: &[usize]) -> DiffForm {
        let mut w = DiffForm::zero();
        w.push(idx.to_vec(), Expr::one());
        w
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Expr)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    /// Coefficient of the sorted basis element `idx`.
    pub fn coeff(&self, idx: &[usize]) -> Expr {
        self.terms.get(idx).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree when homogeneous; `None` for zero or mixed forms.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|k| k.len());
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    fn push(&mut self, mut idx: Vec<usize>, c: Expr) {
        // bubble sort, tracking the sign of the permutation
        let mut sign = false;
        for i in 0..idx.len() {
            for j in 0..idx.len() - 1 - i {
                if idx[j] > idx[j + 1] {
                    idx.swap(j, j + 1);
                    sign = !sign;
                }
            }
        }
        if idx.windows(2).any(|w| w[0] == w[1]) || c.is_zero() {
            return;
        }
        let c = if sign { c.neg() } else { c };
        let sum = self.coeff(&idx).add(&c);
        if sum.is_zero() {
            self.terms.remove(&idx);
        } else {
            self.terms.insert(idx, sum);
        }
    }

    pub fn add(&self, o: &DiffForm) -> DiffForm {
        let mut w = self.clone();
        for (k, v) in &o.terms {
            w.push(k.clone(), v.clone());
        }
        w
    }

    pub fn neg(&self) -> DiffForm {
        self.map(|e| e.neg())
    }

    pub fn sub(&self, o: &DiffForm) -> DiffForm {
        self.add(&o.neg())
    }

    pub fn scale(&self, f: &Expr) -> DiffForm {
        self.map(|e| e.mul(f))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> DiffForm {
        let mut w = DiffForm::zero();
        for (k, v) in &self.terms {
            w.push(k.clone(), f(v));
        }
        w
    }

    pub fn try_map(&self, f: impl Fn(&Expr) -> Result<Expr>) -> Result<DiffForm> {
        let mut w = DiffForm::zero();
        for (k, v) in &self.terms {
            w.push(k.clone(), f(v)?);
        }
        Ok(w)
    }

    pub fn wedge(&self, o: &DiffForm) -> DiffForm {
        let mut w = DiffForm::zero();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                let mut idx = a.clone();
                idx.extend(b);
                w.push(idx, x.mul(y));
            }
        }
        w
    }

    /// Interior product with the vector Σ v_i ∂/∂x_i.
    pub fn interior(&self, v: &[Expr]) -> DiffForm {
        let mut w = DiffForm::zero();
        for (idx, c) in &self.terms {
            for (r, &i) in idx.iter().enumerate() {
                let Some(vi) = v.get(i).filter(|x| !x.is_zero()) else {
                    continue;
                };
                let mut rest = idx.clone();
                rest.remove(r);
                let t = c.mul(vi);
                w.push(rest, if r % 2 == 1 { t.neg() } else { t });
            }
        }
        w
    }

    /// d w = Σ_I Σ_k D_k(c_I) dx_k ∧ dx_I over `n` coordinates.
    pub fn exterior(&self, n: usize, deriv: &dyn Fn(&Expr, usize) -> Result<Expr>) -> Result<DiffForm> {
        let mut w = DiffForm::zero();
        for (idx, c) in &self.terms {
            for k in 0..n {
                if idx.contains(&k) {
                    continue;
                }
                let mut full = vec![k];
                full.extend(idx);
                w.push(full, deriv(c, k)?);
            }
        }
        Ok(w)
    }
}

/// Σ c·𝒟_w (I^α_τ), keyed by (α, w).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OpPoly {
    terms: BTreeMap<(usize, Vec<usize>), Expr>,
}

impl OpPoly {
    pub fn zero() -> OpPoly {
        OpPoly::default()
    }

    /// The argument I^α_τ itself.
    pub fn atom(a: usize) -> OpPoly {
        let mut p = OpPoly::zero();
        p.push((a, vec![]), Expr::one());
        p
    }

    pub fn term(a: usize, word: Vec<usize>, c: Expr) -> OpPoly {
        let mut p = OpPoly::zero();
        p.push((a, word), c);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &[usize], &Expr)> {
        self.terms.iter().map(|((a, w), c)| (*a, w.as_slice(), c))
    }

    pub fn coeff(&self, a: usize, word: &[usize]) -> Expr {
        self.terms
            .get(&(a, word.to_vec()))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn push(&mut self, key: (usize, Vec<usize>), c: Expr) {
        if c.is_zero() {
            return;
        }
        let sum = self.terms.get(&key).cloned().unwrap_or_else(Expr::zero).add(&c);
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
    }

    pub fn add(&self, o: &OpPoly) -> OpPoly {
        let mut p = self.clone();
        for (k, v) in &o.terms {
            p.push(k.clone(), v.clone());
        }
        p
    }

    pub fn sub(&self, o: &OpPoly) -> OpPoly {
        self.add(&o.scale(&Expr::int(-1)))
    }

    /// Left multiplication by a function.
    pub fn scale(&self, c: &Expr) -> OpPoly {
        let mut p = OpPoly::zero();
        for (k, v) in &self.terms {
            p.push(k.clone(), v.mul(c));
        }
        p
    }

    pub fn try_map(&self, f: impl Fn(&Expr) -> Result<Expr>) -> Result<OpPoly> {
        let mut p = OpPoly::zero();
        for (k, v) in &self.terms {
            p.push(k.clone(), f(v)?);
        }
        Ok(p)
    }

    /// 𝒟_j ∘ self, using 𝒟_j(c W) = 𝒟_j(c) W + c 𝒟_j W.
    pub fn compose_left(&self, j: usize, calc: &InvariantCalculus) -> Result<OpPoly> {
        let mut p = OpPoly::zero();
        for ((a, w), c) in &self.terms {
            p.push((*a, w.clone()), calc.d(j, c)?);
            let mut jw = vec![j];
            jw.extend(w);
            p.push((*a, jw), c.clone());
        }
        Ok(p)
    }

    /// Evaluates with `args[α]` in place of I^α_τ.
    pub fn apply(&self, calc: &InvariantCalculus, args: &[Expr]) -> Result<Expr> {
        let mut acc = Expr::zero();
        for ((a, w), c) in &self.terms {
            let arg = args
                .get(*a)
                .ok_or_else(|| CoreError::ShapeMismatch("missing operator argument".into()))?;
            acc = acc.add(&c.mul(&calc.d_word(w, arg)?));
        }
        calc.frame().reduce(&acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use symcore::{Symbol, SymbolKind};

    fn coord(i: usize) -> Expr {
        Symbol::new(&format!("q{i}"), SymbolKind::Independent).expr()
    }

    fn partial(e: &Expr, k: usize) -> Result<Expr> {
        Ok(e.diff(Symbol::new(&format!("q{k}"), SymbolKind::Independent)))
    }

    // a polynomial coefficient built from small integer data
    fn poly(c: &[i64]) -> Expr {
        c.iter().enumerate().fold(Expr::zero(), |acc, (i, &k)| {
            acc.add(&coord(i % 3).powu(1 + i as u32 % 2).mul(&coord((i + 1) % 3)).scale_int(k))
        })
    }

    fn form(deg: usize, data: &[Vec<i64>]) -> DiffForm {
        let idx: Vec<Vec<usize>> = match deg {
            1 => vec![vec![0], vec![1], vec![2]],
            _ => vec![vec![0, 1], vec![0, 2], vec![1, 2]],
        };
        idx.iter()
            .zip(data)
            .fold(DiffForm::zero(), |w, (i, c)| w.add(&DiffForm::basis(i).scale(&poly(c))))
    }

    #[test]
    fn basis_ordering_sign() {
        assert_eq!(DiffForm::basis(&[1, 0]), DiffForm::basis(&[0, 1]).neg());
        assert!(DiffForm::basis(&[2, 0, 2]).is_zero());
        let w = DiffForm::basis(&[0]).wedge(&DiffForm::basis(&[1]));
        assert_eq!(w.interior(&[Expr::zero(), Expr::one()]), DiffForm::basis(&[0]).neg());
        assert_eq!(w.degree(), Some(2));
    }

    proptest! {
        #[test]
        fn wedge_of_one_forms_anticommutes(a in prop::collection::vec(prop::collection::vec(-5i64..5, 3), 3),
                                           b in prop::collection::vec(prop::collection::vec(-5i64..5, 3), 3)) {
            let (x, y) = (form(1, &a), form(1, &b));
            prop_assert_eq!(x.wedge(&y), y.wedge(&x).neg());
            prop_assert!(x.wedge(&x).is_zero());
        }

        #[test]
        fn exterior_derivative_squares_to_zero(a in prop::collection::vec(prop::collection::vec(-5i64..5, 3), 3), deg in 0usize..3) {
            let w = if deg == 0 { DiffForm::function(poly(&a[0])) } else { form(deg, &a) };
            let dd = w.exterior(3, &partial).unwrap().exterior(3, &partial).unwrap();
            prop_assert!(dd.is_zero());
        }

        #[test]
        fn interior_is_an_antiderivation(a in prop::collection::vec(prop::collection::vec(-5i64..5, 3), 3),
                                         b in prop::collection::vec(prop::collection::vec(-5i64..5, 3), 3),
                                         v in prop::collection::vec(-5i64..5, 3)) {
            let (x, y) = (form(1, &a), form(1, &b));
            let v: Vec<Expr> = v.into_iter().map(Expr::int).collect();
            let lhs = x.wedge(&y).interior(&v);
            let rhs = x.interior(&v).wedge(&y).sub(&x.wedge(&y.interior(&v)));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn operator_polynomial_arithmetic() {
        let p = OpPoly::term(0, vec![0, 1], Expr::int(2)).add(&OpPoly::atom(0));
        assert_eq!(p.sub(&p), OpPoly::zero());
        assert_eq!(p.scale(&Expr::int(3)).coeff(0, &[0, 1]), Expr::int(6));
        assert_eq!(p.terms().count(), 2);
    }
}
