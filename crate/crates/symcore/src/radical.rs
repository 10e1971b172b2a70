//! Reduction modulo a quadratic radical `s^2 = v`.

use crate::atom::Symbol;
use crate::error::Result;
use crate::expr::Expr;
use crate::poly::Poly;

/// Splits a polynomial into `A + B s` using `s^2 = v`.
fn split(p: &Poly, s: Symbol, v: &Expr) -> (Expr, Expr) {
    let cs = p.coeffs_in(s.var());
    let mut a = Expr::zero();
    let mut b = Expr::zero();
    let mut vp = Expr::one();
    for (k, c) in cs.into_iter().enumerate() {
        if k > 0 && k % 2 == 0 {
            vp = vp.mul(v);
        }
        if c.is_zero() {
            continue;
        }
        let t = Expr::from_poly(c).mul(&vp);
        if k % 2 == 0 {
            a = a.add(&t);
        } else {
            b = b.add(&t);
        }
    }
    (a, b)
}

/// Rewrites `e` so that it is at most linear in `s` with a denominator free of `s`,
/// assuming `s^2 = v` and that `v` does not involve `s`.
pub fn reduce_radical(e: &Expr, s: Symbol, v: &Expr) -> Result<Expr> {
    if !e.num().has_var(s.var()) && !e.den().has_var(s.var()) {
        return Ok(e.clone());
    }
    let (a, b) = split(e.num(), s, v);
    let (c, d) = split(e.den(), s, v);
    let se = s.expr();
    if d.is_zero() {
        return a.add(&b.mul(&se)).div(&c);
    }
    let den = c.mul(&c).sub(&d.mul(&d).mul(v));
    let re = a.mul(&c).sub(&b.mul(&d).mul(v));
    let im = b.mul(&c).sub(&a.mul(&d));
    re.add(&im.mul(&se)).div(&den)
}
