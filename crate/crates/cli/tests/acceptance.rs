//! Acceptance criteria 1-14, run against the bundled problem files.
//!
//! Prints one line per criterion and exits nonzero if any fails.

use nframes_cli::{fixtures_dir, ProblemFile};
use nframes_core::invariantcalc::{CommutatorTensor, InvariantCalculus};
use nframes_core::movingframe::{is_invariant, Frame};
use nframes_core::noether::*;
use nframes_core::problem::Problem;
use nframes_core::sample::{DEFAULT_SEED, SAMPLES};
use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;
use symcore::{Expr, Matrix};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($c:expr, $($m:tt)+) => {
        if !$c {
            return Err(format!($($m)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

struct Fx {
    p: Problem,
    frame: Frame,
}

impl Fx {
    fn load(name: &str) -> Result<Fx, String> {
        let file = ok(ProblemFile::read(&fixtures_dir().join(name)))?;
        let p = ok(file.problem())?;
        let frame = ok(p.frame())?;
        Ok(Fx { p, frame })
    }

    fn e(&self, s: &str) -> Expr {
        self.p.parse(s).expect("test expression parses")
    }

    fn i(&self, s: &str) -> Expr {
        self.frame.invariantize(&self.e(s)).expect("invariantization")
    }

    fn lag(&self) -> Result<Lagrangian, String> {
        ok(Lagrangian::new(&self.p.spec, self.p.lagrangian.clone().ok_or("no lagrangian")?))
    }

    fn calc(&self, dummy: bool) -> Result<InvariantCalculus, String> {
        let f = if dummy { ok(self.frame.with_dummy())? } else { self.frame.clone() };
        ok(InvariantCalculus::new(&f))
    }

    fn m(&self, rows: &[&[&str]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|s| self.e(s)).collect()).collect())
    }

    fn same(&self, a: &Expr, b: &Expr) -> bool {
        self.frame.reduce(&a.sub(b)).map(|r| r.is_zero()).unwrap_or(false)
    }

    fn same_matrix(&self, what: &str, a: &Matrix, b: &Matrix) -> Result<(), String> {
        ensure!(a.rows() == b.rows() && a.cols() == b.cols(), "{what}: shape");
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                ensure!(self.same(&a[(i, j)], &b[(i, j)]), "{what}[{i}][{j}]: {} != {}", a[(i, j)], b[(i, j)]);
            }
        }
        Ok(())
    }

    fn same_list(&self, what: &str, got: &[Expr], want: &[&str]) -> Result<(), String> {
        ensure!(got.len() == want.len(), "{what}: length {} != {}", got.len(), want.len());
        for (k, (g, w)) in got.iter().zip(want).enumerate() {
            ensure!(self.same(g, &self.e(w)), "{what}[{k}]: {g} != {w}");
        }
        Ok(())
    }
}

const MA: &str = "sl2_linear_monge_ampere.toml";
const PROJ: &str = "sl2_projective.toml";
const SWE: &str = "shallow_water.toml";
const SL3: &str = "sl3_linear.toml";
const ALL: [&str; 4] = [PROJ, MA, SWE, SL3];

fn c1_frames() -> Outcome {
    let s = "(x*u_x + y*u_y)";
    let f = Fx::load(MA)?;
    f.same_list("SL(2) frame", f.frame.values(), &[&format!("u_x/{s}"), &format!("u_y/{s}"), "-y"])?;
    let f = Fx::load(SWE)?;
    f.same_list("shallow water frame", f.frame.values(), &["b", "-a", "x_a/(a*x_a + b*x_b)"])?;
    let f = Fx::load(SL3)?;
    f.same_list("SL(3) frame", f.frame.values(), &["u_x", "u_y", "u_z", "v_x", "v_y", "v_z", "w_x/B", "w_y/B"])?;
    Ok("three frames equal the displayed parametric forms".into())
}

fn c2_invariants() -> Outcome {
    let f = Fx::load(MA)?;
    let got: Vec<Expr> = ["x", "y", "u", "u_x", "u_y", "u_xx", "u_xy", "u_yy"].iter().map(|s| f.i(s)).collect();
    f.same_list(
        "normalized invariants",
        &got,
        &[
            "1",
            "0",
            "u",
            "x*u_x + y*u_y",
            "0",
            "x^2*u_xx + 2*x*y*u_xy + y^2*u_yy",
            "(x*u_x*u_xy - y*u_y*u_xy + y*u_x*u_yy - x*u_y*u_xx)/(x*u_x + y*u_y)",
            "(u_x^2*u_yy - 2*u_x*u_y*u_xy + u_y^2*u_xx)/(x*u_x + y*u_y)^2",
        ],
    )?;
    Ok("eight entries".into())
}

fn c3_operators() -> Outcome {
    let f = Fx::load(MA)?;
    let calc = f.calc(false)?;
    let ops = calc.operators();
    ensure!(ops.len() == 2, "two operators expected");
    f.same_list("D_x", &ops[0].coeffs, &["x", "y"])?;
    f.same_list("D_y", &ops[1].coeffs, &["-u_y/(x*u_x + y*u_y)", "u_x/(x*u_x + y*u_y)"])?;
    let g = Fx::load(PROJ)?;
    let ops = g.calc(false)?.operators();
    g.same_list("projective D_x", &ops[0].coeffs, &["1/u_x"])?;
    Ok("SL(2) pair and projective (1/u_x) D_x".into())
}

fn c4_lie_table() -> Outcome {
    let f = Fx::load(MA)?;
    let c = f.calc(true)?;
    let forms = c.one_forms();
    let r12 = f.i("u_xy").div(&f.i("u_x")).unwrap();
    let r23 = ok(c.frame().invariantize(&f.e("u_ytau")))?.div(&f.i("u_x")).unwrap();
    let z = Expr::zero();
    let two = Expr::int(2);
    let table = [
        [[z.clone(), r12.clone(), z.clone()], [z.clone(), two.clone(), z.clone()], [z.clone(), z.clone(), z.clone()]],
        [[r12.neg(), z.clone(), r23.neg()], [two.neg(), z.clone(), z.clone()], [z.clone(), z.clone(), z.clone()]],
        [[z.clone(), r23.clone(), z.clone()], [z.clone(), z.clone(), z.clone()], [z.clone(), z.clone(), z.clone()]],
    ];
    for i in 0..3 {
        for j in 0..3 {
            let got = ok(c.in_basis(&ok(c.lie_derivative(i, &forms[j]))?))?;
            for k in 0..3 {
                ensure!(got[k].sub(&table[i][j][k]).is_zero(), "cell ({i},{j}) coefficient {k}: {}", got[k]);
            }
        }
    }
    Ok("9 cells, third column D_i(I(dtau)) = 0".into())
}

fn c5_syzygies() -> Outcome {
    let f = Fx::load(MA)?;
    let c = f.calc(true)?;
    let fr = c.frame();
    let inv = |s: &str| fr.invariantize(&f.e(s)).unwrap();
    let d = |w: &[usize], e: &Expr| c.d_word(w, e).unwrap();
    let i3 = inv("u_tau");
    let (i1, i11, i12, i22) = (inv("u_x"), inv("u_xx"), inv("u_xy"), inv("u_yy"));
    let (x, y, t) = (0, 1, 2);
    let checks = [
        ("D_tau I11", d(&[t], &i11), d(&[x, x], &i3).sub(&d(&[x], &i3))),
        (
            "D_tau I22",
            d(&[t], &i22),
            d(&[y, y], &i3)
                .sub(&i12.scale_int(2).div(&i1).unwrap().mul(&d(&[y], &i3)))
                .add(&i22.div(&i1).unwrap().mul(&d(&[x], &i3))),
        ),
        (
            "D_tau I12 (first)",
            d(&[t], &i12),
            d(&[y, x], &i3).sub(&i11.div(&i1).unwrap().add(&Expr::one()).mul(&d(&[y], &i3))),
        ),
        (
            "D_tau I12 (second)",
            d(&[t], &i12),
            d(&[x, y], &i3)
                .add(&Expr::one().sub(&i11.div(&i1).unwrap()).mul(&d(&[y], &i3)))
                .add(&i12.div(&i1).unwrap().mul(&d(&[x], &i3))),
        ),
    ];
    for (name, l, r) in &checks {
        ensure!(ok(fr.reduce(&l.sub(r)))?.is_zero(), "{name}");
    }
    // generating syzygy, without the dummy variable
    let c = f.calc(false)?;
    let d = |w: &[usize], e: &Expr| c.d_word(w, e).unwrap();
    let u = f.e("u");
    let iyy = f.i("u_yy");
    let dxu = d(&[0], &u);
    let lhs = d(&[0], &iyy).sub(&d(&[1, 1, 0], &u));
    let inner = iyy.mul(&d(&[0, 0], &u)).sub(&d(&[1, 0], &u).powu(2).scale_int(2));
    let rhs = iyy.scale_int(-4).add(&inner.div(&dxu).unwrap());
    ensure!(lhs.sub(&rhs).is_zero(), "generating syzygy");
    Ok("five operator identities".into())
}

fn c6_euler_lagrange() -> Outcome {
    let f = Fx::load(MA)?;
    let el = ok(EulerLagrangeSystem::new(&f.lag()?, None))?;
    ensure!(el.equations[0].sub(&f.e("3*(u_xx*u_yy - u_xy^2)")).is_zero(), "Monge-Ampere: {}", el.equations[0]);
    let g = Fx::load(PROJ)?;
    let el = ok(EulerLagrangeSystem::new(&g.lag()?, None))?;
    let ctx = g.p.ctx();
    let (sigma, ux) = (g.e("sigma"), g.e("u_x"));
    let dd = |e: &Expr| ctx.total_derivative(e, 0).div(&ux).unwrap();
    let inv = dd(&dd(&dd(&sigma))).scale_int(-2).add(&sigma.mul(&dd(&sigma)).scale_int(6));
    ensure!(el.equations[0].sub(&ux.mul(&inv)).is_zero(), "projective EL is not u_x(-2D^3 s + 6 s D s)");
    Ok("E^u = 3(u_xx u_yy - u_xy^2); projective E = u_x (-2D^3 sigma + 6 sigma D sigma)".into())
}

fn c7_adjoint() -> Outcome {
    let f = Fx::load(MA)?;
    let defs: HashMap<_, _> = f.p.spec.defines().iter().cloned().collect();
    let want = f.m(&[&["a*d + b*c", "2*b*d", "-2*a*c"], &["c*d", "d^2", "-c^2"], &["-a*b", "-b^2", "a^2"]]);
    let want = ok(want.try_map(|e| e.substitute(&defs)))?;
    ensure!(ok(f.p.spec.adjoint())?.sub(&want).is_zero(), "3x3 adjoint");

    let g = Fx::load(SL3)?;
    let defs: HashMap<_, _> = g.p.spec.defines().iter().cloned().collect();
    let a = ok(Matrix::from_fn(3, 3, |i, j| g.e(&format!("a{}{}", i + 1, j + 1))).try_map(|e| e.substitute(&defs)))?;
    let m = a.first_minors();
    let z = Expr::zero;
    let zrow = || vec![z(); 3];
    let r3_first = Matrix::from_rows(vec![a.row(2), zrow(), zrow()]);
    let r3_second = Matrix::from_rows(vec![zrow(), a.row(2), zrow()]);
    let c12 = Matrix::from_fn(3, 2, |i, j| a[(i, j)].clone());
    let a3 = |r: usize| Matrix::from_fn(3, 2, |i, j| if i == r { a[(2, j)].clone() } else { z() });
    let r12 = Matrix::from_rows(vec![a.row(0), a.row(1)]);
    let a2 = Matrix::from_fn(2, 2, |i, j| a[(i, j)].clone());
    let blocks = [
        [
            a.scale(&m[(0, 0)]).sub(&r3_first.scale(&m[(2, 0)])),
            a.scale(&m[(0, 1)].neg()).add(&r3_first.scale(&m[(2, 1)])),
            c12.scale(&m[(0, 2)]).sub(&a3(0).scale(&m[(2, 2)])),
        ],
        [
            a.scale(&m[(1, 0)].neg()).sub(&r3_second.scale(&m[(2, 0)])),
            a.scale(&m[(1, 1)]).add(&r3_second.scale(&m[(2, 1)])),
            c12.scale(&m[(1, 2)].neg()).sub(&a3(1).scale(&m[(2, 2)])),
        ],
        [r12.scale(&m[(2, 0)]), r12.scale(&m[(2, 1)].neg()), a2.scale(&m[(2, 2)])],
    ];
    let off = [0usize, 3, 6];
    let block_of = |i: usize| off.iter().rposition(|&o| o <= i).unwrap();
    let want = Matrix::from_fn(8, 8, |i, j| {
        let (bi, bj) = (block_of(i), block_of(j));
        blocks[bi][bj][(i - off[bi], j - off[bj])].clone()
    });
    ensure!(ok(g.p.spec.adjoint())?.sub(&want).is_zero(), "8x8 SL(3) adjoint");

    for name in ALL {
        let h = Fx::load(name)?;
        let spec = &h.p.spec;
        let ad = ok(spec.adjoint())?;
        let at_e = ok(ad.try_map(|e| spec.at_identity(e).map_err(|e| symcore::SymError::DegenerateExpression(e.to_string()))))?;
        ensure!(at_e == Matrix::identity(spec.dim()), "{name}: Ad(e) != I");
        let (order, rep) = ok(adjoint_product_check(spec, SAMPLES, DEFAULT_SEED))?;
        ensure!(order == Some(AdOrder::Homomorphism) && rep.samples == SAMPLES, "{name}: homomorphism failed: {:?}", rep.failures);
    }
    Ok(format!("3x3 and 8x8 exact; Ad(e) = I and Ad(gh) = Ad(g)Ad(h) at {SAMPLES} pairs on 4 fixtures"))
}

fn swe_vectors(f: &Fx, lag: &Lagrangian) -> Matrix {
    let l = f.frame.invariantize(lag.density()).unwrap();
    let (xb, ya, yb) = (f.i("x_b"), f.i("y_a"), f.i("y_b"));
    let f1 = l.add(&f.e("g").div(&xb.mul(&ya).scale_int(2)).unwrap());
    let vp = f.i("v").add(&f.i("P"));
    let f2 = xb.mul(&f.i("u").sub(&f.i("R"))).add(&yb.mul(&vp));
    let f3 = ya.mul(&vp);
    let z = Expr::zero();
    Matrix::from_rows(vec![vec![z.clone(), f1.clone(), f2], vec![f1, z.clone(), f3.neg()], vec![z.clone(), z.clone(), z]])
}

fn all_invariant(f: &Fx, v: &Matrix) -> Result<(), String> {
    for e in v.entries() {
        ensure!(ok(is_invariant(&f.p.spec, e, DEFAULT_SEED))?, "V entry not invariant: {e}");
    }
    Ok(())
}

fn c8_structured() -> Outcome {
    // Monge-Ampere: every row carries sign -1 relative to the displayed vectors
    let f = Fx::load(MA)?;
    let b = ok(structured_laws(&f.lag()?, &f.frame, DEFAULT_SEED))?;
    ensure!(b.reassembly_residual().is_zero(), "MA reassembly");
    all_invariant(&f, &b.v)?;
    let s = "(x*u_x + y*u_y)";
    f.same_matrix("MA minors", &b.minors, &f.m(&[&["x", "-y"], &[&format!("u_y/{s}"), &format!("u_x/{s}")]]))?;
    let (u, u1, u11, u12, u22) = (f.i("u"), f.i("u_x"), f.i("u_xx"), f.i("u_xy"), f.i("u_yy"));
    let shown_v = Matrix::from_rows(vec![
        vec![u1.mul(&u22).mul(&u.sub(&u1)), u1.mul(&u12).mul(&u.sub(&u1))],
        vec![u.mul(&u1).mul(&u12).neg(), u.mul(&u1).mul(&u11).neg()],
        vec![Expr::zero(), Expr::zero()],
    ]);
    f.same_matrix("MA V (row sign -1)", &b.v, &shown_v.scale(&Expr::int(-1)))?;

    let f = Fx::load(SWE)?;
    let lag = f.lag()?;
    let b = ok(structured_laws(&lag, &f.frame, DEFAULT_SEED))?;
    ensure!(b.reassembly_residual().is_zero(), "SWE reassembly");
    all_invariant(&f, &b.v)?;
    let s = "(a*x_a + b*x_b)";
    f.same_matrix(
        "SWE minors",
        &b.minors,
        &f.m(&[&[&format!("x_b/{s}"), &format!("x_a/{s}"), "0"], &["-a", "b", "0"], &["0", "0", "1"]]),
    )?;
    f.same_matrix("SWE V (row sign +1)", &b.v, &swe_vectors(&f, &lag))?;

    let f = Fx::load(SL3)?;
    let lag = f.lag()?;
    let b = ok(structured_laws(&lag, &f.frame, DEFAULT_SEED))?;
    ensure!(b.reassembly_residual().is_zero(), "SL3 reassembly");
    all_invariant(&f, &b.v)?;
    f.same_matrix(
        "SL3 minors",
        &b.minors,
        &f.m(&[
            &["(v_y*w_z - v_z*w_y)/B", "(v_x*w_z - v_z*w_x)/B", "(v_x*w_y - v_y*w_x)/B"],
            &["(u_y*w_z - u_z*w_y)/B", "(u_x*w_z - u_z*w_x)/B", "(u_x*w_y - u_y*w_x)/B"],
            &["u_y*v_z - u_z*v_y", "u_x*v_z - u_z*v_x", "u_x*v_y - u_y*v_x"],
        ]),
    )?;
    let (jx, jy, jz) = (f.i("x"), f.i("y"), f.i("z"));
    let wz = f.e("w_z").as_symbol().ok_or("w_z is a symbol")?;
    let l2 = lag.density().diff(wz).div(&f.e("B").diff(wz)).unwrap();
    let core = f.frame.invariantize(lag.density()).unwrap().sub(&f.i("w_z").mul(&f.frame.invariantize(&l2).unwrap()));
    let z = Expr::zero();
    let (nx, ny, nz) = (jx.neg(), jy.neg(), jz.neg());
    let pattern = [
        [&jx, &z, &nz],
        [&jy, &z, &z],
        [&jz, &z, &z],
        [&z, &nx, &z],
        [&z, &ny, &nz],
        [&z, &nz, &z],
        [&z, &z, &jx],
        [&z, &z, &jy],
    ];
    f.same_matrix("SL3 V (row sign +1)", &b.v, &Matrix::from_fn(8, 3, |i, k| pattern[i][k].mul(&core)))?;
    Ok("reassembly exact, V invariant, minors as displayed; row signs MA -1 (all rows), SWE +1, SL3 +1".into())
}

fn c9_noether() -> Outcome {
    for name in ALL {
        let f = Fx::load(name)?;
        let lag = f.lag()?;
        let c = ok(noether_laws(&lag))?;
        let r = ok(noether_residuals(&lag, &c))?;
        ensure!(r.iter().all(Expr::is_zero), "{name}: nonzero residual");
    }
    Ok("4 fixtures, every generator".into())
}

fn c10_equivariance() -> Outcome {
    for name in ALL {
        let f = Fx::load(name)?;
        let c = ok(noether_laws(&f.lag()?))?;
        let rep = ok(equivariance_check(&f.p.spec, &c, SAMPLES, DEFAULT_SEED))?;
        ensure!(rep.passed() && rep.samples == SAMPLES, "{name}: {:?}", rep.failures);
    }
    let f = Fx::load(PROJ)?;
    let a = f.m(&[
        &["(x*u_xx + u_x)/u_x", "2*x*u_x", "-u_xx*(x*u_xx + 2*u_x)/(2*u_x^3)"],
        &["u_xx/(2*u_x)", "u_x", "-u_xx^2/(4*u_x^3)"],
        &["-x*(x*u_xx + 2*u_x)/(2*u_x)", "-x^2*u_x", "(x*u_xx + 2*u_x)^2/(4*u_x^3)"],
    ]);
    let defs: HashMap<_, _> = f.p.spec.defines().iter().cloned().collect();
    let r = ok(f
        .m(&[&["a*d + b*c", "2*b*d", "-2*a*c"], &["c*d", "d^2", "-c^2"], &["-a*b", "-b^2", "a^2"]])
        .try_map(|e| e.substitute(&defs)))?;
    let rep = ok(matrix_equivariance(&f.p.spec, &a, &r, SAMPLES, DEFAULT_SEED))?;
    ensure!(rep.passed() && rep.samples == SAMPLES, "A(g.z) != R A(z): {:?}", rep.failures);
    Ok(format!("{SAMPLES} samples per fixture and for A(z~) = R A(z), 0 failures"))
}

fn c11_appendix() -> Outcome {
    for name in [MA, SWE] {
        let f = Fx::load(name)?;
        let spec = &f.p.spec;
        let z = ok(pform_action(spec))?;
        ensure!(z.sub(&pform_action_direct(spec)).is_zero(), "{name}: Z differs from the wedge expansion");
        ensure!(coeff_z_residual(spec, &z).is_zero(), "{name}: coefficient identity");
        // also at random group elements
        let mut ev = symcore::Evaluator::new(DEFAULT_SEED);
        let mut rng = nframes_core::sample::rng(DEFAULT_SEED);
        let direct = pform_action_direct(spec);
        for _ in 0..SAMPLES {
            ev.reset();
            for s in spec.params() {
                ev.set(*s, nframes_core::sample::rational(&mut rng));
            }
            for (a, b) in z.entries().iter().zip(direct.entries()) {
                ensure!(ev.eval(a) == ev.eval(b), "{name}: sampled Z mismatch");
            }
        }
    }
    for (name, dummy) in [(MA, true), (SL3, false)] {
        let f = Fx::load(name)?;
        let c = f.calc(dummy)?;
        for i in 0..c.dim() {
            for (j, w) in c.one_forms().iter().enumerate() {
                let want = if i == j { Expr::one() } else { Expr::zero() };
                let got = ok(c.interior(i, w))?.coeff(&[]);
                ensure!(got.sub(&want).is_zero(), "{name}: V_{i} _| I(dx_{j}) = {got}");
            }
        }
    }
    Ok("p = 2 and 3, symbolic and at 20 group elements; duality exact".into())
}

fn tensors_agree(a: &CommutatorTensor, b: &CommutatorTensor) -> bool {
    let n = a.dim();
    (0..n).all(|k| (0..n).all(|i| (0..n).all(|j| a.get(k, i, j).sub(b.get(k, i, j)).is_zero())))
}

fn c12_commutators() -> Outcome {
    for name in [MA, SL3] {
        let f = Fx::load(name)?;
        let c = f.calc(true)?;
        let k = ok(c.correction_matrix())?;
        let direct = ok(c.commutator_tensor())?;
        let formula = ok(c.commutator_formula(&k.k))?;
        ensure!(tensors_agree(&direct, &formula), "{name}: bracket tensor differs from the formula");
    }
    let f = Fx::load(SL3)?;
    let c = f.calc(true)?;
    let a = ok(c.commutator_tensor())?;
    let fr = c.frame();
    let iu4 = ok(fr.invariantize(&f.e("u_tau")))?;
    let iv4 = ok(fr.invariantize(&f.e("v_tau")))?;
    let (x, y, z, tau) = (0, 1, 2, 3);
    let d = |i: usize, e: &Expr| c.d(i, e).unwrap();
    ensure!(a.get(x, tau, z).sub(&d(z, &iu4).neg()).is_zero(), "[D_tau, D_z] x-component");
    ensure!(a.get(y, tau, z).sub(&d(z, &iv4).neg()).is_zero(), "[D_tau, D_z] y-component");
    ensure!(a.get(z, tau, z).sub(&d(x, &iu4).add(&d(y, &iv4))).is_zero(), "[D_tau, D_z] z-component");
    ensure!(a.get(tau, tau, z).is_zero(), "[D_tau, D_z] tau-component");
    Ok("SL(2)+tau and SL(3)+tau tensors equal; [D_tau, D_z] as displayed".into())
}

fn c13_vorticity() -> Outcome {
    let f = Fx::load(SWE)?;
    let b = ok(structured_laws(&f.lag()?, &f.frame, DEFAULT_SEED))?;
    let ctx = f.p.ctx();
    let d = |e: &Expr, i: usize| ctx.total_derivative(e, i);
    let laws = b.ad_inv.mul(&b.v).mul(&b.minors);
    let div: Vec<Expr> = (0..3).map(|j| d(&laws[(j, 0)], 0).sub(&d(&laws[(j, 1)], 1)).add(&d(&laws[(j, 2)], 2))).collect();
    let (a, bb) = (f.e("a"), f.e("b"));
    let comb = d(&bb.mul(&div[2]), 0).sub(&d(&a.mul(&div[1]), 1)).add(&div[0]);
    let omega_jet = f.e("u_a*x_b - u_b*x_a + y_b*v_a - y_a*v_b + (x_a*y_b - x_b*y_a)*f");
    let omega = f
        .i("u_a")
        .mul(&f.i("x_b"))
        .add(&f.i("y_b").mul(&f.i("v_a")))
        .sub(&f.i("y_a").mul(&f.i("v_b")))
        .sub(&f.i("x_b").mul(&f.i("y_a")).mul(&f.e("f")));
    ensure!(omega.sub(&omega_jet).is_zero(), "Omega in invariants differs from its Lagrangian-label form");
    let residual = comb.add(&a.mul(&bb).mul(&d(&omega, 2)));
    ensure!(residual.is_zero(), "residual {residual}");
    Ok("D_a(b C3) - D_b(a C2) + C1 = -ab D_t(Omega), residual exactly 0".into())
}

fn c14_solution() -> Outcome {
    let f = Fx::load(PROJ)?;
    let ctx = f.p.ctx();
    let (sigma, ux, x) = (f.e("sigma"), f.e("u_x"), f.e("x"));
    let dd = |e: &Expr| ctx.total_derivative(e, 0).div(&ux).unwrap();
    let ds = dd(&sigma);
    let v = Matrix::from_rows(vec![
        vec![ds.scale_int(-4)],
        vec![sigma.powu(2).scale_int(-2).add(&dd(&ds).scale_int(2))],
        vec![sigma.scale_int(-4)],
    ]);
    let a = f.m(&[
        &["(x*u_xx + u_x)/u_x", "2*x*u_x", "-u_xx*(x*u_xx + 2*u_x)/(2*u_x^3)"],
        &["u_xx/(2*u_x)", "u_x", "-u_xx^2/(4*u_x^3)"],
        &["-x*(x*u_xx + 2*u_x)/(2*u_x)", "-x^2*u_x", "(x*u_xx + 2*u_x)^2/(4*u_x^3)"],
    ]);
    // our laws reproduce the displayed system up to the recorded global sign
    let b = ok(structured_laws(&f.lag()?, &f.frame, DEFAULT_SEED))?;
    f.same_matrix("projective A", &b.ad_inv, &a)?;
    f.same_matrix("projective V (sign -1)", &b.v, &v.scale(&Expr::int(-1)))?;
    let c = a.mul(&v);
    let comb = ux.mul(&c[(0, 0)].mul(&x).sub(&c[(1, 0)].mul(&x.powu(2))).add(&c[(2, 0)])).add(&sigma.scale_int(4));
    ensure!(comb.is_zero(), "u_x(c1 x - c2 x^2 + c3) + 4 sigma = {comb}");
    Ok("u_x(c1 x - c2 x^2 + c3) + 4 sigma = 0 identically".into())
}

fn main() {
    let exact = "exact normal-form zero";
    let sampled = "exact rational arithmetic, 20 random points, 0 failures";
    let criteria: Vec<(u32, &str, &str, fn() -> Outcome)> = vec![
        (1, "frame reproduction", exact, c1_frames),
        (2, "invariant reproduction", exact, c2_invariants),
        (3, "operator reproduction", exact, c3_operators),
        (4, "Lie-derivative table", exact, c4_lie_table),
        (5, "syzygy reproduction", exact, c5_syzygies),
        (6, "Euler-Lagrange", exact, c6_euler_lagrange),
        (7, "adjoint representations", "exact; homomorphism at 20 random pairs", c7_adjoint),
        (8, "structured laws", "exact; invariance sampled at 20 points", c8_structured),
        (9, "Noether identity", exact, c9_noether),
        (10, "equivariance", sampled, c10_equivariance),
        (11, "appendix checks", exact, c11_appendix),
        (12, "commutator cross-check", exact, c12_commutators),
        (13, "potential vorticity", exact, c13_vorticity),
        (14, "motivating-example identity", exact, c14_solution),
    ];
    let mut failed = 0;
    for (id, name, tol, f) in criteria {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} [{tol}] {secs:.2}s: {detail}"),
            Err(e) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} [{tol}] {secs:.2}s: {e}");
            }
        }
    }
    println!("{} of 14 criteria passed", 14 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
