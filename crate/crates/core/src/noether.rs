//! Euler operator, Noether's conservation laws and their factorization
//! d(Ad(ρ)^{-1}·V·M_𝒥·d^{p-1}x̂) = 0.
//!
//! Law components are stored unsigned: row j of `C` holds C^j_1, …, C^j_p with
//! Σ_k D_k C^j_k = −Q_j·E(L). The (p−1)-form of law j is
//! Σ_k (−1)^{k−1} C^j_k dx_1…dx̂_k…dx_p, so the signed matrix C' has entries
//! (−1)^{k−1} C^j_k and pairs with the unsigned basis d^{p−1}x̂.

use crate::error::{CoreError, Result};
use crate::groupaction::GroupActionSpec;
use crate::invariantcalc::{DiffForm, InvariantCalculus};
use crate::jetspace::{Coord, JetContext, MultiIndex};
use crate::movingframe::{is_invariant, Frame};
use crate::sample;
use std::collections::{HashMap, HashSet};
use symcore::{BigRational, Evaluator, Expr, Matrix, Symbol};

/// A Lagrangian density in jet coordinates together with its symmetry group.
#[derive(Clone, Debug)]
pub struct Lagrangian {
    density: Expr,
    spec: GroupActionSpec,
}

impl Lagrangian {
    /// Checks pr v_j(L) + L·Div ξ_j = 0 for every generator.
    pub fn new(spec: &GroupActionSpec, density: Expr) -> Result<Lagrangian> {
        for j in 0..spec.dim() {
            let r = invariance_residual(spec, &density, j)?;
            if !r.is_zero() {
                return Err(CoreError::NotInvariant {
                    generator: j,
                    residual: r.to_string(),
                });
            }
        }
        Ok(Lagrangian {
            density,
            spec: spec.clone(),
        })
    }

    pub fn density(&self) -> &Expr {
        &self.density
    }

    pub fn spec(&self) -> &GroupActionSpec {
        &self.spec
    }

    pub fn ctx(&self) -> &JetContext {
        self.spec.ctx()
    }
}

/// pr v_j(L) + L·Σ_i D_i ξ^i_j.
pub fn invariance_residual(spec: &GroupActionSpec, l: &Expr, j: usize) -> Result<Expr> {
    let ctx = spec.ctx();
    let mut div = Expr::zero();
    for (i, x) in spec.xi(j)?.iter().enumerate() {
        div = div.add(&ctx.total_derivative(x, i));
    }
    Ok(spec.prolonged_generator(j, l)?.add(&l.mul(&div)))
}

/// Jets u^α_K of dependent `a` occurring in `e`, with ∂e/∂u^α_K.
fn partials(ctx: &JetContext, e: &Expr, a: usize) -> Vec<(MultiIndex, Expr)> {
    ctx.jets_in(e)
        .into_iter()
        .filter(|(_, b, _)| *b == a)
        .map(|(s, _, k)| (k, e.diff(s)))
        .filter(|(_, d)| !d.is_zero())
        .collect()
}

/// E^α(L) = Σ_K (−D)_K ∂L/∂u^α_K.
pub fn euler_operator(ctx: &JetContext, l: &Expr, a: usize) -> Expr {
    let mut acc = Expr::zero();
    for (k, d) in partials(ctx, l, a) {
        let t = ctx.iterated_derivative(&d, &k);
        acc = if k.order() % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

/// Euler–Lagrange expressions, one per dependent variable.
#[derive(Clone, Debug)]
pub struct EulerLagrangeSystem {
    pub equations: Vec<Expr>,
    /// I(E^α), present when a frame was supplied.
    pub invariantized: Option<Vec<Expr>>,
}

impl EulerLagrangeSystem {
    pub fn new(lag: &Lagrangian, frame: Option<&Frame>) -> Result<EulerLagrangeSystem> {
        let ctx = lag.ctx();
        let equations: Vec<Expr> = (0..ctx.n_dep())
            .map(|a| euler_operator(ctx, lag.density(), a))
            .collect();
        let invariantized = match frame {
            Some(f) => Some(equations.iter().map(|e| f.invariantize(e)).collect::<Result<_>>()?),
            None => None,
        };
        Ok(EulerLagrangeSystem {
            equations,
            invariantized,
        })
    }
}

/// Boundary terms P with Σ_{α,K} D_K(Q^α)·∂L/∂u^α_K = Σ_α Q^α E^α(L) + Σ_i D_i P^i.
///
/// Uses the symmetric form P^i = Σ_{J≠∅} (j_i/|J|)·D_{J−i}(Q^α·E^J_α(L)) with the
/// higher Euler operators E^J_α, so the terms do not depend on an ordering of
/// the independent variables and transform covariantly under affine changes of
/// them.
pub fn boundary_terms(ctx: &JetContext, l: &Expr, q: &[Expr]) -> Vec<Expr> {
    let p = ctx.n_indep();
    let mut out = vec![Expr::zero(); p];
    for (a, qa) in q.iter().enumerate() {
        if qa.is_zero() {
            continue;
        }
        let parts = partials(ctx, l, a);
        let mut subs: Vec<MultiIndex> = parts
            .iter()
            .flat_map(|(k, _)| sub_indices(k))
            .filter(|j| !j.is_empty())
            .collect();
        subs.sort_by(|x, y| x.counts().cmp(y.counts()));
        subs.dedup();
        for j in subs {
            let e = higher_euler(ctx, &parts, &j);
            if e.is_zero() {
                continue;
            }
            let qe = qa.mul(&e);
            let n = j.order() as i64;
            for i in 0..p {
                let Some(lower) = j.without(i) else { continue };
                let w = Expr::frac(j.count(i) as i64, n);
                out[i] = out[i].add(&w.mul(&ctx.iterated_derivative(&qe, &lower)));
            }
        }
    }
    out
}

/// E^J(L) = Σ_{K⊇J} binom(K, J)·(−D)_{K−J} ∂L/∂u_K.
fn higher_euler(ctx: &JetContext, parts: &[(MultiIndex, Expr)], j: &MultiIndex) -> Expr {
    let mut acc = Expr::zero();
    for (k, f) in parts {
        let Some(rest) = difference(k, j) else { continue };
        let mut b = BigRational::from_integer(1.into());
        for (kk, jj) in k.counts().iter().zip(j.counts()) {
            b *= BigRational::from_integer(binomial(*kk, *jj).into());
        }
        let t = ctx.iterated_derivative(f, &rest).mul(&Expr::rational(&b));
        acc = if rest.order() % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

fn binomial(n: u32, k: u32) -> u64 {
    (0..k as u64).fold(1, |acc, i| acc * (n as u64 - i) / (i + 1))
}

fn sub_indices(k: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![Vec::new()];
    for &c in k.counts() {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                (0..=c).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out.into_iter().map(MultiIndex::from_counts).collect()
}

/// C^j_k = L ξ^k_j + P^k(Q_j), an r×p matrix.
pub fn noether_laws(lag: &Lagrangian) -> Result<Matrix> {
    let spec = lag.spec();
    let ctx = lag.ctx();
    let l = lag.density();
    let rows = (0..spec.dim())
        .map(|j| {
            let xi = spec.xi(j)?;
            let p = boundary_terms(ctx, l, &spec.characteristic(j)?);
            Ok(xi.iter().zip(p).map(|(x, b)| l.mul(x).add(&b)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(matrix_or_empty(rows, ctx.n_indep()))
}

fn matrix_or_empty(rows: Vec<Vec<Expr>>, cols: usize) -> Matrix {
    if rows.is_empty() {
        Matrix::zeros(0, cols)
    } else {
        Matrix::from_rows(rows)
    }
}

/// Σ_k D_k C^j_k + Q_j·E(L) for every row of `c`.
pub fn noether_residuals(lag: &Lagrangian, c: &Matrix) -> Result<Vec<Expr>> {
    let spec = lag.spec();
    let ctx = lag.ctx();
    let els: Vec<Expr> = (0..ctx.n_dep())
        .map(|a| euler_operator(ctx, lag.density(), a))
        .collect();
    (0..c.rows())
        .map(|j| {
            let mut r = divergence(ctx, &c.row(j));
            for (q, e) in spec.characteristic(j)?.iter().zip(&els) {
                r = r.add(&q.mul(e));
            }
            Ok(r)
        })
        .collect()
}

/// Σ_k D_k c_k.
pub fn divergence(ctx: &JetContext, c: &[Expr]) -> Expr {
    c.iter()
        .enumerate()
        .fold(Expr::zero(), |acc, (k, e)| acc.add(&ctx.total_derivative(e, k)))
}

/// Multiplies column k by (−1)^{k−1}; an involution.
pub fn signed(c: &Matrix) -> Matrix {
    Matrix::from_fn(c.rows(), c.cols(), |j, k| {
        if k % 2 == 0 {
            c[(j, k)].clone()
        } else {
            c[(j, k)].neg()
        }
    })
}

/// Entry (i, j) is the determinant of `m` with row i and column j removed.
pub fn first_minors(m: &Matrix) -> Matrix {
    m.first_minors()
}

/// Factors of the structured laws: C' = AdInv·V·Minors.
#[derive(Clone, Debug)]
pub struct LawBundle {
    /// Unsigned law components, r×p.
    pub c: Matrix,
    /// Ad(ρ)^{-1}, r×r.
    pub ad_inv: Matrix,
    /// Columns υ_1, …, υ_p, r×p.
    pub v: Matrix,
    /// M_𝒥, p×p.
    pub minors: Matrix,
}

impl LawBundle {
    /// AdInv·V·Minors − C'.
    pub fn reassembly_residual(&self) -> Matrix {
        self.ad_inv.mul(&self.v).mul(&self.minors).sub(&signed(&self.c))
    }
}

/// Ad(ρ)^{-1} at the frame.
pub fn adjoint_inverse_at_frame(frame: &Frame) -> Result<Matrix> {
    entrywise(&frame.spec().adjoint_inverse()?, |e| frame.at_frame(e))
}

fn to_sym(e: CoreError) -> symcore::SymError {
    match e {
        CoreError::Sym(s) => s,
        other => symcore::SymError::DegenerateExpression(other.to_string()),
    }
}

fn entrywise(m: &Matrix, f: impl Fn(&Expr) -> Result<Expr>) -> Result<Matrix> {
    Ok(m.try_map(|e| f(e).map_err(to_sym))?)
}

/// Builds the factorization V = Ad(ρ)·C'·M_𝒥^{-1} and verifies it.
///
/// Every entry of V must be invariant (sampled with `seed`), and must agree
/// with the invariantization of the corresponding entry of C'.
pub fn structured_laws(lag: &Lagrangian, frame: &Frame, seed: u64) -> Result<LawBundle> {
    let c = noether_laws(lag)?;
    structured_from(lag.spec(), &c, frame, seed)
}

/// [`structured_laws`] for a given law matrix.
pub fn structured_from(spec: &GroupActionSpec, c: &Matrix, frame: &Frame, seed: u64) -> Result<LawBundle> {
    let p = spec.ctx().n_indep();
    let minors = entrywise(&first_minors(&frame.jacobian()?), |e| frame.reduce(e))?;
    if spec.dim() == 0 {
        return Ok(LawBundle {
            c: c.clone(),
            ad_inv: Matrix::zeros(0, 0),
            v: Matrix::zeros(0, p),
            minors,
        });
    }
    let minv = minors.inverse().map_err(|_| CoreError::SingularMinors)?;
    let ad_inv = adjoint_inverse_at_frame(frame)?;
    let ad = entrywise(&spec.adjoint()?, |e| frame.at_frame(e))?;
    let cs = signed(c);
    let v = entrywise(&ad.mul(&cs).mul(&minv), |e| frame.reduce(e))?;
    for (e, orig) in v.entries().iter().zip(cs.entries()) {
        let inv = frame.invariantize(orig)?;
        if &inv != e {
            return Err(CoreError::InvarianceFailed(format!(
                "{e} differs from the invariantization {inv}"
            )));
        }
        if frame.radicals().is_empty() && !is_invariant(spec, e, seed)? {
            return Err(CoreError::InvarianceFailed(e.to_string()));
        }
    }
    let bundle = LawBundle {
        c: c.clone(),
        ad_inv,
        v,
        minors,
    };
    let res = entrywise(&bundle.reassembly_residual(), |e| frame.reduce(e))?;
    if !res.is_zero() {
        return Err(CoreError::IdentityFailed("Ad(ρ)^{-1}·V·M_𝒥 does not reassemble the laws".into()));
    }
    Ok(bundle)
}

/// Boundary coefficients 𝒞^α_k read off an invariant integration by parts:
/// `c[k][n]` multiplies I(u^α_{K_n τ}) with K_n = `indices[n]`.
#[derive(Clone, Debug)]
pub struct BoundaryCoefficients {
    pub dep: usize,
    pub indices: Vec<MultiIndex>,
    pub c: Vec<Vec<Expr>>,
}

/// 𝒬^α(J, I): row j holds I(D_K Q^α_j) for the given multi-indices.
pub fn invariant_characteristics(frame: &Frame, a: usize, indices: &[MultiIndex]) -> Result<Matrix> {
    let spec = frame.spec();
    let ctx = spec.ctx();
    let rows = (0..spec.dim())
        .map(|j| {
            let q = spec.characteristic(j)?.swap_remove(a);
            indices
                .iter()
                .map(|k| frame.invariantize(&ctx.iterated_derivative(&q, k)))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(matrix_or_empty(rows, indices.len()))
}

/// Ξ(J, I): entry (j, k) = I(ξ^k_j).
pub fn invariant_xi(frame: &Frame) -> Result<Matrix> {
    let spec = frame.spec();
    let rows = (0..spec.dim())
        .map(|j| spec.xi(j)?.iter().map(|x| frame.invariantize(x)).collect())
        .collect::<Result<Vec<_>>>()?;
    Ok(matrix_or_empty(rows, spec.ctx().n_indep()))
}

/// υ_k = (−1)^{k−1}(Σ_α 𝒬^α(J,I)𝒞^α_k + L·Ξ(J,I)_k), with L = I(L̄).
pub fn vectors_from_boundary(frame: &Frame, lag: &Lagrangian, terms: &[BoundaryCoefficients]) -> Result<Matrix> {
    let spec = frame.spec();
    let p = spec.ctx().n_indep();
    let r = spec.dim();
    let l = frame.invariantize(lag.density())?;
    let xi = invariant_xi(frame)?;
    let mut v = Matrix::from_fn(r, p, |j, k| l.mul(&xi[(j, k)]));
    for t in terms {
        if t.c.len() != p || t.c.iter().any(|c| c.len() != t.indices.len()) || t.dep >= spec.ctx().n_dep() {
            return Err(CoreError::ShapeMismatch(
                "boundary coefficients need one vector per independent variable, one entry per multi-index".into(),
            ));
        }
        let q = invariant_characteristics(frame, t.dep, &t.indices)?;
        let add = Matrix::from_fn(r, p, |j, k| {
            (0..t.indices.len()).fold(Expr::zero(), |acc, n| acc.add(&q[(j, n)].mul(&t.c[k][n])))
        });
        v = v.add(&add);
    }
    Ok(signed(&v))
}

/// Z with (−1)^{k−1} dx̃_1…dx̂̃_k…dx̃_p = Σ_ℓ (−1)^{k+ℓ−2} Z^k_ℓ dx_1…dx̂_ℓ…dx_p,
/// from (−1)^{k−1} Z^k_ℓ = ((dx̃/dx)^{-1})_{ℓk} det(dx̃/dx). Entry (k, ℓ).
pub fn pform_action(spec: &GroupActionSpec) -> Result<Matrix> {
    let j = spec.jacobian();
    let det = j.det();
    let inv = j.inverse().map_err(|_| CoreError::SingularJacobian)?;
    Ok(Matrix::from_fn(j.rows(), j.rows(), |k, l| {
        let e = inv[(l, k)].mul(&det);
        if k % 2 == 0 {
            e
        } else {
            e.neg()
        }
    }))
}

/// The same coefficients by expanding the wedge products of dx̃_i = Σ_m J_im dx_m.
pub fn pform_action_direct(spec: &GroupActionSpec) -> Matrix {
    let j = spec.jacobian();
    let p = j.rows();
    let forms: Vec<DiffForm> = (0..p).map(|i| DiffForm::one_form(&j.row(i))).collect();
    Matrix::from_fn(p, p, |k, l| {
        let w = (0..p)
            .filter(|&i| i != k)
            .fold(DiffForm::function(Expr::one()), |acc, i| acc.wedge(&forms[i]));
        let hat: Vec<usize> = (0..p).filter(|&m| m != l).collect();
        // coefficient of dx-hat_ℓ in dx̃-hat_k equals (−1)^{ℓ−1}Z^k_ℓ
        let c = w.coeff(&hat);
        if l % 2 == 0 {
            c
        } else {
            c.neg()
        }
    })
}

/// Σ_ℓ (dx̃_j/dx_ℓ)(−1)^{k−1} Z^k_ℓ − δ_jk det(dx̃/dx), entry (j, k).
pub fn coeff_z_residual(spec: &GroupActionSpec, z: &Matrix) -> Matrix {
    let j = spec.jacobian();
    let det = j.det();
    let p = j.rows();
    Matrix::from_fn(p, p, |a, k| {
        let mut acc = Expr::zero();
        for l in 0..p {
            acc = acc.add(&j[(a, l)].mul(&z[(k, l)]));
        }
        if k % 2 == 1 {
            acc = acc.neg();
        }
        if a == k {
            acc.sub(&det)
        } else {
            acc
        }
    })
}

/// Outcome of a sampled check.
#[derive(Clone, Debug, Default)]
pub struct SampleReport {
    pub samples: usize,
    pub failures: Vec<String>,
}

impl SampleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.samples > 0
    }
}

fn const_matrix(m: &Matrix, ev: &mut Evaluator) -> Option<Matrix> {
    let rows = (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| ev.eval(&m[(i, j)]).map(|v| Expr::rational(&v)))
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Some(if rows.is_empty() {
        Matrix::zeros(0, m.cols())
    } else {
        Matrix::from_rows(rows)
    })
}

/// Values of the transformed coordinates, for evaluating e(z̃).
fn moved_evaluator(
    spec: &GroupActionSpec,
    exprs: &[Expr],
    ev: &mut Evaluator,
    seed: u64,
) -> Result<Option<Evaluator>> {
    let ctx = spec.ctx();
    let mut ev2 = Evaluator::new(seed);
    let mut seen = HashSet::new();
    for e in exprs {
        let map = spec.action_map(e)?;
        for s in e.symbols() {
            if !seen.insert(s) {
                continue;
            }
            let v = match ctx.classify(s) {
                Coord::Other => Some(ev.value_of(s)),
                _ => ev.eval(&map[&s]),
            };
            match v {
                Some(v) => ev2.set(s, v),
                None => return Ok(None),
            }
        }
    }
    Ok(Some(ev2))
}

/// Checks Σ_k C^j_k(z̃)·((dx̃/dx)^{-1})_{ℓk}·det(dx̃/dx) = Σ_m Ad(g)_{jm} C^m_ℓ(z)
/// at random (z, g): the transformed law forms pulled back to the original
/// basis equal the Adjoint action on the laws.
pub fn equivariance_check(spec: &GroupActionSpec, c: &Matrix, samples: usize, seed: u64) -> Result<SampleReport> {
    let ad = spec.adjoint()?;
    let j = spec.jacobian();
    let mut rng = sample::rng(seed);
    let mut report = SampleReport::default();
    let mut tries = 0;
    while report.samples < samples {
        tries += 1;
        if tries > 10 * samples.max(1) {
            report.failures.push("could not find regular sample points".into());
            break;
        }
        let s = rand::Rng::gen::<u64>(&mut rng);
        let mut ev = Evaluator::new(s);
        for p in spec.params() {
            ev.set(*p, sample::rational(&mut rng));
        }
        let (Some(adv), Some(jv), Some(cv)) = (
            const_matrix(&ad, &mut ev),
            const_matrix(&j, &mut ev),
            const_matrix(c, &mut ev),
        ) else {
            continue;
        };
        let Ok(jinv) = jv.inverse() else { continue };
        let Some(mut ev2) = moved_evaluator(spec, c.entries(), &mut ev, s)? else {
            continue;
        };
        let Some(ct) = const_matrix(c, &mut ev2) else { continue };
        let lhs = ct.mul(&jinv.transpose()).scale(&jv.det());
        let rhs = adv.mul(&cv);
        if lhs != rhs {
            report.failures.push(format!("sample {}: {:?} != {:?}", report.samples, lhs, rhs));
        }
        report.samples += 1;
    }
    Ok(report)
}

/// Checks m(z̃) = R(g)·m(z) at random (z, g) for a matrix `m` of jet
/// expressions and a matrix `r` of group-parameter expressions.
pub fn matrix_equivariance(spec: &GroupActionSpec, m: &Matrix, r: &Matrix, samples: usize, seed: u64) -> Result<SampleReport> {
    let mut rng = sample::rng(seed);
    let mut report = SampleReport::default();
    let mut tries = 0;
    while report.samples < samples {
        tries += 1;
        if tries > 10 * samples.max(1) {
            report.failures.push("could not find regular sample points".into());
            break;
        }
        let s = rand::Rng::gen::<u64>(&mut rng);
        let mut ev = Evaluator::new(s);
        for p in spec.params() {
            ev.set(*p, sample::rational(&mut rng));
        }
        let (Some(rv), Some(mv)) = (const_matrix(r, &mut ev), const_matrix(m, &mut ev)) else {
            continue;
        };
        let Some(mut ev2) = moved_evaluator(spec, m.entries(), &mut ev, s)? else {
            continue;
        };
        let Some(mt) = const_matrix(m, &mut ev2) else { continue };
        if mt != rv.mul(&mv) {
            report.failures.push(format!("sample {}", report.samples));
        }
        report.samples += 1;
    }
    Ok(report)
}

/// Order in which Ad composes with the group product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdOrder {
    /// Ad(g h) = Ad(g)·Ad(h).
    Homomorphism,
    /// Ad(g h) = Ad(h)·Ad(g).
    AntiHomomorphism,
}

/// Compares Ad(g h) with the products of Ad(g) and Ad(h) at random pairs,
/// using the group product of [`GroupActionSpec::composition`].
///
/// Returns the order that held at every sample, if any, with the report for
/// that order.
pub fn adjoint_product_check(spec: &GroupActionSpec, samples: usize, seed: u64) -> Result<(Option<AdOrder>, SampleReport)> {
    let comp = spec.composition().ok_or(CoreError::NoComposition)?;
    let ad = spec.adjoint()?;
    let mut rng = sample::rng(seed);
    let mut hom = SampleReport::default();
    let mut anti = SampleReport::default();
    let mut tries = 0;
    while hom.samples < samples {
        tries += 1;
        if tries > 10 * samples.max(1) {
            hom.failures.push("could not find regular sample points".into());
            anti.failures.push("could not find regular sample points".into());
            break;
        }
        let mut ev = Evaluator::new(seed ^ tries as u64);
        let g: Vec<BigRational> = spec.params().iter().map(|_| sample::rational(&mut rng)).collect();
        let h: Vec<BigRational> = spec.params().iter().map(|_| sample::rational(&mut rng)).collect();
        for (p, v) in spec.params().iter().zip(&g) {
            ev.set(*p, v.clone());
        }
        for (p, v) in comp.second.iter().zip(&h) {
            ev.set(*p, v.clone());
        }
        let Some(gh) = comp.product.iter().map(|e| ev.eval(e)).collect::<Option<Vec<_>>>() else { continue };
        let at = |vals: &[BigRational]| {
            let mut e = Evaluator::new(seed);
            for (p, v) in spec.params().iter().zip(vals) {
                e.set(*p, v.clone());
            }
            const_matrix(&ad, &mut e)
        };
        let (Some(ag), Some(ah), Some(agh)) = (at(&g), at(&h), at(&gh)) else { continue };
        let n = hom.samples;
        if agh != ag.mul(&ah) {
            hom.failures.push(format!("sample {n}: Ad(gh) != Ad(g)Ad(h)"));
        }
        if agh != ah.mul(&ag) {
            anti.failures.push(format!("sample {n}: Ad(gh) != Ad(h)Ad(g)"));
        }
        hom.samples += 1;
        anti.samples += 1;
    }
    Ok(if hom.passed() {
        (Some(AdOrder::Homomorphism), hom)
    } else if anti.passed() {
        (Some(AdOrder::AntiHomomorphism), anti)
    } else {
        (None, hom)
    })
}

/// Checks the off-shell Noether identity for every row of `c`.
pub fn divergence_check(lag: &Lagrangian, c: &Matrix) -> Result<()> {
    for (j, r) in noether_residuals(lag, c)?.iter().enumerate() {
        if !r.is_zero() {
            return Err(CoreError::IdentityFailed(format!("law {j}: residual {r}")));
        }
    }
    Ok(())
}

/// Σ_k D_k of the reassembled structured law, minus the divergence of C.
///
/// Zero means d(Ad(ρ)^{-1}·V·M_𝒥·d^{p−1}x̂) carries exactly the density
/// −Q_j·E(L) dx_1…dx_p of the classical laws.
pub fn structured_divergence_residual(lag: &Lagrangian, b: &LawBundle) -> Result<Vec<Expr>> {
    let re = signed(&b.ad_inv.mul(&b.v).mul(&b.minors));
    noether_residuals(lag, &re)
}

/// The group matrix at the frame, M(ρ).
pub fn frame_matrix(frame: &Frame) -> Result<Matrix> {
    let m = frame.spec().matrix().ok_or(CoreError::NotMatrixGroup)?;
    let full = expand_eliminated(frame.spec(), m)?;
    entrywise(&full, |e| frame.at_frame(e))
}

fn expand_eliminated(spec: &GroupActionSpec, m: &Matrix) -> Result<Matrix> {
    let map: HashMap<Symbol, Expr> = spec.defines().iter().cloned().collect();
    Ok(m.try_map(|e| e.substitute(&map))?)
}

/// 𝒟_i M(ρ)·M(ρ)^{-1} for each invariant operator.
pub fn curvature_matrices(calc: &InvariantCalculus) -> Result<Vec<Matrix>> {
    let frame = calc.frame();
    let m = frame_matrix(frame)?;
    let minv = m.inverse().map_err(|_| CoreError::NotMatrixGroup)?;
    (0..calc.dim())
        .map(|i| {
            let dm = entrywise(&m, |e| calc.d(i, e))?;
            entrywise(&dm.mul(&minv), |e| frame.reduce(e))
        })
        .collect()
}

/// 𝒟_i Q_j − 𝒟_j Q_i + [Q_j, Q_i] − Σ_k A^k_ij Q_k for i < j, which vanishes
/// because 𝒟_i𝒟_jρ − 𝒟_j𝒟_iρ = Σ_k A^k_ij 𝒟_kρ.
pub fn curvature_compatibility(calc: &InvariantCalculus, q: &[Matrix]) -> Result<Vec<Matrix>> {
    let a = calc.commutator_tensor()?;
    let frame = calc.frame();
    let n = q.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dqj = entrywise(&q[j], |e| calc.d(i, e))?;
            let dqi = entrywise(&q[i], |e| calc.d(j, e))?;
            let mut r = dqj.sub(&dqi).add(&q[j].mul(&q[i])).sub(&q[i].mul(&q[j]));
            for (k, qk) in q.iter().enumerate() {
                r = r.sub(&qk.scale(a.get(k, i, j)));
            }
            out.push(entrywise(&r, |e| frame.reduce(e))?);
        }
    }
    Ok(out)
}

/// An Euler–Lagrange expression solved for one of its jets, used to reduce
/// expressions on shell.
#[derive(Clone, Debug)]
pub struct OnShell {
    pub dep: usize,
    pub lead: MultiIndex,
    /// The expression E whose zero set is the shell.
    pub equation: Expr,
    /// u^α_K on shell.
    pub value: Expr,
}

impl OnShell {
    /// Solves `el = 0` for u^α_K, which must occur linearly.
    pub fn solve(ctx: &JetContext, el: &Expr, dep: usize, lead: MultiIndex) -> Result<OnShell> {
        let s = ctx.jet(dep, &lead);
        let a = el.diff(s);
        if a.is_zero() || !a.diff(s).is_zero() {
            return Err(CoreError::NotSolvable(format!("{} does not occur linearly", s.name())));
        }
        let b = el.substitute_one(s, &Expr::zero())?;
        Ok(OnShell {
            dep,
            lead,
            equation: el.clone(),
            value: b.neg().div(&a)?,
        })
    }

    /// Highest derivative of the leading jet occurring in `e`: largest order,
    /// ties broken by comparing counts from the last variable backwards.
    fn leading(&self, ctx: &JetContext, e: &Expr) -> Option<(Symbol, MultiIndex)> {
        ctx.jets_in(e)
            .into_iter()
            .filter(|(_, a, _)| *a == self.dep)
            .filter_map(|(s, _, k)| difference(&k, &self.lead).map(|m| (s, k, m)))
            .max_by(|x, y| {
                let key = |k: &MultiIndex| (k.order(), k.counts().iter().rev().cloned().collect::<Vec<_>>());
                key(&x.1).cmp(&key(&y.1))
            })
            .map(|(s, _, m)| (s, m))
    }

    /// Replaces derivatives of the leading jet by their values on shell,
    /// highest first, until none is left.
    pub fn reduce(&self, ctx: &JetContext, e: &Expr) -> Result<Expr> {
        let mut e = e.clone();
        for _ in 0..REDUCTION_BOUND {
            let Some((s, m)) = self.leading(ctx, &e) else { return Ok(e) };
            e = e.substitute_one(s, &ctx.iterated_derivative(&self.value, &m))?;
        }
        Err(CoreError::RewriteNotTerminating(REDUCTION_BOUND))
    }

    /// Writes an expression vanishing on shell as Σ_M R_M·D_M(E) and returns
    /// the characteristic Σ_M (−D)_M R_M.
    pub fn characteristic(&self, ctx: &JetContext, e: &Expr) -> Result<Expr> {
        let mut x = e.clone();
        let mut q = Expr::zero();
        for _ in 0..REDUCTION_BOUND {
            let Some((s, m)) = self.leading(ctx, &x) else {
                if !x.is_zero() {
                    return Err(CoreError::IdentityFailed(format!("{x} does not vanish on shell")));
                }
                return Ok(q);
            };
            let v0 = ctx.iterated_derivative(&self.value, &m);
            let dme = ctx.iterated_derivative(&self.equation, &m);
            let r = x.sub(&x.substitute_one(s, &v0)?).div(&dme.sub(&dme.substitute_one(s, &v0)?))?;
            x = x.sub(&r.mul(&dme));
            let dr = ctx.iterated_derivative(&r, &m);
            q = if m.order() % 2 == 0 { q.add(&dr) } else { q.sub(&dr) };
        }
        Err(CoreError::RewriteNotTerminating(REDUCTION_BOUND))
    }
}

const REDUCTION_BOUND: usize = 256;

fn difference(k: &MultiIndex, lead: &MultiIndex) -> Option<MultiIndex> {
    let counts = k
        .counts()
        .iter()
        .zip(lead.counts())
        .map(|(a, b)| a.checked_sub(*b))
        .collect::<Option<Vec<_>>>()?;
    Some(MultiIndex::from_counts(counts))
}

/// Whether two unsigned law matrices differ by a trivial law, row by row.
///
/// A row of the difference is trivial when its divergence vanishes
/// identically (a law of the second kind), or when its divergence,
/// written as Σ_M R_M·D_M(E), has a characteristic Σ_M (−D)_M R_M that
/// vanishes on shell (first kind, up to second kind).
pub fn equivalent_laws(ctx: &JetContext, c1: &Matrix, c2: &Matrix, shell: Option<&OnShell>) -> Result<bool> {
    if c1.rows() != c2.rows() || c1.cols() != c2.cols() {
        return Err(CoreError::ShapeMismatch("law matrices differ in shape".into()));
    }
    let d = c1.sub(c2);
    for j in 0..d.rows() {
        let div = divergence(ctx, &d.row(j));
        if div.is_zero() {
            continue;
        }
        let Some(s) = shell else { return Ok(false) };
        let q = match s.characteristic(ctx, &div) {
            Ok(q) => q,
            Err(CoreError::IdentityFailed(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        if !s.reduce(ctx, &q)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rational values of every entry at one random point; for reports.
pub fn sample_values(m: &Matrix, seed: u64) -> Option<Vec<BigRational>> {
    let mut ev = Evaluator::new(seed);
    m.entries().iter().map(|e| ev.eval(e)).collect()
}
