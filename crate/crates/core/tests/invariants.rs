//! Operators, correction terms, commutators, forms and syzygies on the fixtures.

mod common;

use nframes_core::invariantcalc::{CommutatorTensor, DiffForm, InvariantCalculus};
use nframes_core::jetspace::MultiIndex;
use nframes_core::movingframe::is_invariant;
use nframes_core::problem::Problem;
use nframes_core::sample::DEFAULT_SEED;
use symcore::Expr;

struct Fx {
    p: Problem,
    c: InvariantCalculus,
}

impl Fx {
    fn new(p: Problem, dummy: bool) -> Fx {
        let f = p.frame().unwrap();
        let f = if dummy { f.with_dummy().unwrap() } else { f };
        let c = InvariantCalculus::new(&f).unwrap();
        Fx { p, c }
    }

    fn e(&self, s: &str) -> Expr {
        self.p.parse(s).unwrap()
    }

    /// Invariantization of a jet expression.
    fn i(&self, s: &str) -> Expr {
        self.c.frame().invariantize(&self.e(s)).unwrap()
    }

    fn d(&self, word: &[usize], e: &Expr) -> Expr {
        self.c.d_word(word, e).unwrap()
    }
}

#[track_caller]
fn assert_eq_expr(a: &Expr, b: &Expr) {
    assert!(a.sub(b).is_zero(), "{a}  !=  {b}");
}

fn sl2() -> Fx {
    Fx::new(common::sl2_linear(), true)
}

#[test]
fn sl2_operators() {
    let f = sl2();
    let ops = f.c.operators();
    assert_eq!(ops.len(), 3);
    let want = [
        ["x", "y", "0"],
        ["-u_y/(x*u_x+y*u_y)", "u_x/(x*u_x+y*u_y)", "0"],
        ["0", "0", "1"],
    ];
    for (op, row) in ops.iter().zip(want) {
        for (c, w) in op.coeffs.iter().zip(row) {
            assert_eq_expr(c, &f.e(w));
        }
    }
}

#[test]
fn projective_operator() {
    let f = Fx::new(common::sl2_projective(), false);
    let ops = f.c.operators();
    assert_eq!(ops.len(), 1);
    assert_eq_expr(&ops[0].coeffs[0], &f.e("1/u_x"));
    let sigma = f.e("sigma");
    let direct = f.c.frame().ctx().total_derivative(&sigma, 0).div(&f.e("u_x")).unwrap();
    assert_eq_expr(&f.d(&[0], &sigma), &direct);
    let a = f.c.commutator_tensor().unwrap();
    assert!(a.get(0, 0, 0).is_zero());
}

#[test]
fn sl2_one_forms_and_duality() {
    let f = sl2();
    let forms = f.c.one_forms();
    let s = f.e("x*u_x+y*u_y");
    assert_eq_expr(&forms[0].coeff(&[0]), &f.e("u_x").div(&s).unwrap());
    assert_eq_expr(&forms[0].coeff(&[1]), &f.e("u_y").div(&s).unwrap());
    assert_eq_expr(&forms[1].coeff(&[0]), &f.e("-y"));
    assert_eq_expr(&forms[1].coeff(&[1]), &f.e("x"));
    assert_eq!(forms[2], DiffForm::basis(&[2]));
    for i in 0..3 {
        for (j, w) in forms.iter().enumerate() {
            let want = if i == j { Expr::one() } else { Expr::zero() };
            assert_eq_expr(&f.c.interior(i, w).unwrap().coeff(&[]), &want);
        }
    }
}

#[test]
fn differential_in_invariant_basis() {
    let f = sl2();
    let g = f.e("x*u_xy + u^2*y - u_tau*u_x");
    let dg = f.c.exterior_d(&DiffForm::function(g.clone())).unwrap();
    let mut sum = DiffForm::zero();
    for (i, w) in f.c.one_forms().iter().enumerate() {
        sum = sum.add(&w.scale(&f.d(&[i], &g)));
    }
    let diff = dg.sub(&sum).try_map(|e| f.c.frame().reduce(e)).unwrap();
    assert!(diff.is_zero(), "{diff:?}");
}

#[test]
fn sl2_lie_derivative_table() {
    let f = sl2();
    let forms = f.c.one_forms();
    let r12 = f.i("u_xy").div(&f.i("u_x")).unwrap();
    let r23 = f.i("u_ytau").div(&f.i("u_x")).unwrap();
    let z = Expr::zero();
    let two = Expr::int(2);
    // rows: operator, columns: I(dx), I(dy), I(dτ); entries are basis coefficients
    let table = [
        [[z.clone(), r12.clone(), z.clone()], [z.clone(), two.clone(), z.clone()], [z.clone(), z.clone(), z.clone()]],
        [[r12.neg(), z.clone(), r23.neg()], [two.neg(), z.clone(), z.clone()], [z.clone(), z.clone(), z.clone()]],
        [[z.clone(), r23.clone(), z.clone()], [z.clone(), z.clone(), z.clone()], [z.clone(), z.clone(), z.clone()]],
    ];
    for i in 0..3 {
        for j in 0..3 {
            let got = f.c.in_basis(&f.c.lie_derivative(i, &forms[j]).unwrap()).unwrap();
            for k in 0..3 {
                assert_eq_expr(&got[k], &table[i][j][k]);
            }
        }
    }
}

fn lie_coefficients(c: &InvariantCalculus) -> Vec<Vec<Vec<Expr>>> {
    // b[i][j][k]: coefficient of I(dx_k) in 𝒟_i(I(dx_j))
    let forms = c.one_forms();
    (0..c.dim())
        .map(|i| {
            forms
                .iter()
                .map(|w| c.in_basis(&c.lie_derivative(i, w).unwrap()).unwrap())
                .collect()
        })
        .collect()
}

#[test]
fn lie_coefficients_against_commutators() {
    let f = sl2();
    let a = f.c.commutator_tensor().unwrap();
    let b = lie_coefficients(&f.c);
    let n = f.c.dim();
    let mut transposed_form_holds = true;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // B^j_ki = A^i_jk with 𝒟_i(I(dx_j)) = Σ_k B^k_ij I(dx_k)
                assert_eq_expr(&b[k][i][j], a.get(i, j, k));
                transposed_form_holds &= b[i][j][k].sub(a.get(i, j, k)).is_zero();
            }
        }
    }
    // the index placement B^k_ij = A^i_jk fails on the first table cell
    assert!(!transposed_form_holds);
}

fn assert_tensor_eq(a: &CommutatorTensor, b: &CommutatorTensor) {
    let n = a.dim();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                assert_eq_expr(a.get(k, i, j), b.get(k, i, j));
                assert_eq_expr(a.get(k, i, j), &b.get(k, j, i).neg());
            }
        }
    }
}

#[test]
fn sl2_commutators_and_corrections() {
    let f = sl2();
    let k = f.c.correction_matrix().unwrap();
    let kp = f.c.correction_matrix_phantom().unwrap();
    let ks = f.c.correction_matrix_substituted().unwrap();
    assert!(f.c.correction_matrix_mc().unwrap().is_some());
    for j in 0..3 {
        for l in 0..3 {
            assert_eq_expr(&k.k[(j, l)], &kp[(j, l)]);
            assert_eq_expr(&k.k[(j, l)], &ks[(j, l)]);
        }
    }
    assert!(f.c.check_correction_matrix(&k.k, DEFAULT_SEED).unwrap());
    let a = f.c.commutator_tensor().unwrap();
    assert_tensor_eq(&a, &f.c.commutator_formula(&k.k).unwrap());
    for kk in 0..3 {
        assert!(a.get(2, 2, kk).is_zero());
    }
    // N_ij = 𝒟_j J^i − δ_ij
    for i in 0..3 {
        let ji = f.c.frame().invariant_of(f.c.frame().ctx().indep(i)).unwrap();
        for j in 0..3 {
            let delta = if i == j { Expr::one() } else { Expr::zero() };
            assert_eq_expr(&f.d(&[j], &ji).sub(&delta), &k.n[(i, j)]);
        }
    }
    // M = K φ(I) up to second order
    for idx in MultiIndex::up_to_order(3, 2) {
        for j in 0..3 {
            let (_, m) = f.c.invariant_derivative(0, &idx, j).unwrap();
            assert_eq_expr(&m, &f.c.correction_m(&k.k, 0, &idx, j).unwrap());
        }
    }
}

#[test]
fn sl2_invariant_derivatives() {
    let f = sl2();
    let ux = MultiIndex::from_indices(3, &[0]);
    let (_, m) = f.c.invariant_derivative(0, &ux, 0).unwrap();
    assert_eq_expr(&m, &f.i("u_x"));
    let (d, _) = f.c.invariant_derivative(0, &MultiIndex::zero(3), 1).unwrap();
    assert!(d.is_zero());
    assert_eq_expr(&f.i("u_xx"), &f.d(&[0, 0], &f.e("u")).sub(&f.d(&[0], &f.e("u"))));
    // derivatives of invariants are invariant
    let plain = Fx::new(common::sl2_linear(), false);
    for w in [vec![0], vec![1], vec![1, 0]] {
        let e = plain.d(&w, &plain.i("u_yy"));
        assert!(is_invariant(plain.c.frame().spec(), &e, DEFAULT_SEED).unwrap());
    }
}

#[test]
fn sl2_commutation_rule_for_tau() {
    let f = sl2();
    let a = f.c.commutator_tensor().unwrap();
    let g = f.e("u_tau*u_x + x*y*u");
    for word in [vec![0], vec![1], vec![0, 1], vec![1, 1, 0]] {
        let mut w = word.clone();
        w.insert(0, 2);
        let lhs = f.d(&w, &g);
        let rhs = f.c.commuted_tau_derivative(&a, &word, &g).unwrap();
        assert_eq_expr(&lhs, &rhs);
    }
}

#[test]
fn sl2_syzygies() {
    let f = sl2();
    let i3 = f.c.tau_invariants().unwrap();
    let i1 = f.i("u_x");
    let i11 = f.i("u_xx");
    let i12 = f.i("u_xy");
    let i22 = f.i("u_yy");
    let h11 = f.c.syzygy(&f.e("u_xx")).unwrap();
    assert_eq_expr(&h11.coeff(0, &[0, 0]), &Expr::one());
    assert_eq_expr(&h11.coeff(0, &[0]), &Expr::int(-1));
    assert_eq!(h11.terms().count(), 2);
    let h22 = f.c.syzygy(&f.e("u_yy")).unwrap();
    assert_eq_expr(&h22.coeff(0, &[1, 1]), &Expr::one());
    assert_eq_expr(&h22.coeff(0, &[1]), &i12.scale_int(-2).div(&i1).unwrap());
    assert_eq_expr(&h22.coeff(0, &[0]), &i22.div(&i1).unwrap());
    assert_eq!(h22.terms().count(), 3);
    // both orderings of the mixed syzygy
    let direct = f.d(&[2], &i12);
    let a = f
        .d(&[1, 0], &i3[0])
        .sub(&i11.div(&i1).unwrap().add(&Expr::one()).mul(&f.d(&[1], &i3[0])));
    let b = f
        .d(&[0, 1], &i3[0])
        .add(&Expr::one().sub(&i11.div(&i1).unwrap()).mul(&f.d(&[1], &i3[0])))
        .add(&i12.div(&i1).unwrap().mul(&f.d(&[0], &i3[0])));
    assert_eq_expr(&direct, &a);
    assert_eq_expr(&direct, &b);
    for g in ["u", "u_x", "u_xy", "u_yy", "u_xx*u_yy - u_xy^2"] {
        let e = f.e(g);
        let h = f.c.syzygy(&e).unwrap();
        let want = f.d(&[2], &f.c.frame().invariantize(&e).unwrap());
        assert_eq_expr(&h.apply(&f.c, &i3).unwrap(), &want);
    }
}

#[test]
fn generating_invariant_syzygy() {
    let f = Fx::new(common::sl2_linear(), false);
    let u = f.e("u");
    let iyy = f.i("u_yy");
    let dxu = f.d(&[0], &u);
    let lhs = f.d(&[0], &iyy).sub(&f.d(&[1, 1, 0], &u));
    let inner = iyy.mul(&f.d(&[0, 0], &u)).sub(&f.d(&[1, 0], &u).powu(2).scale_int(2));
    let rhs = iyy.scale_int(-4).add(&inner.div(&dxu).unwrap());
    assert_eq_expr(&lhs, &rhs);
}

#[test]
fn sl3_commutators() {
    let f = Fx::new(common::sl3_linear(), true);
    let k = f.c.correction_matrix().unwrap();
    assert!(f.c.check_correction_matrix(&k.k, DEFAULT_SEED).unwrap());
    let a = f.c.commutator_tensor().unwrap();
    assert_tensor_eq(&a, &f.c.commutator_formula(&k.k).unwrap());
    let iu4 = f.i("u_tau");
    let iv4 = f.i("v_tau");
    let (x, y, z, tau) = (0, 1, 2, 3);
    assert_eq_expr(a.get(x, tau, z), &f.d(&[z], &iu4).neg());
    assert_eq_expr(a.get(y, tau, z), &f.d(&[z], &iv4).neg());
    assert_eq_expr(a.get(z, tau, z), &f.d(&[x], &iu4).add(&f.d(&[y], &iv4)));
    assert!(a.get(tau, tau, z).is_zero());
}

#[test]
fn shallow_water_commutators() {
    let f = Fx::new(common::shallow_water(), true);
    let k = f.c.correction_matrix().unwrap();
    let kp = f.c.correction_matrix_phantom().unwrap();
    let ks = f.c.correction_matrix_substituted().unwrap();
    for j in 0..f.c.dim() {
        for l in 0..3 {
            assert_eq_expr(&k.k[(j, l)], &kp[(j, l)]);
            assert_eq_expr(&k.k[(j, l)], &ks[(j, l)]);
        }
    }
    let a = f.c.commutator_tensor().unwrap();
    assert_tensor_eq(&a, &f.c.commutator_formula(&k.k).unwrap());
}

#[test]
fn projective_corrections_with_radical() {
    let f = Fx::new(common::sl2_projective(), true);
    let k = f.c.correction_matrix().unwrap();
    let kp = f.c.correction_matrix_phantom().unwrap();
    for j in 0..2 {
        for l in 0..3 {
            assert_eq_expr(&k.k[(j, l)], &kp[(j, l)]);
        }
    }
    for idx in MultiIndex::up_to_order(2, 3) {
        let (_, m) = f.c.invariant_derivative(0, &idx, 0).unwrap();
        assert_eq_expr(&m, &f.c.correction_m(&k.k, 0, &idx, 0).unwrap());
    }
    let i3 = f.c.tau_invariants().unwrap();
    let h = f.c.syzygy(&f.e("sigma")).unwrap();
    let want = f.d(&[1], &f.i("sigma"));
    assert_eq_expr(&h.apply(&f.c, &i3).unwrap(), &want);
}
