//! Multivariate polynomial gcd over the integers.
//!
//! Recursive content extraction plus the subresultant remainder sequence in a
//! chosen main variable. Several cheap shortcuts run first since most gcds met in
//! practice are trivial or a divisor of one argument.

use crate::poly::{mono_div, mono_gcd, Poly, Var};

/// Greatest common divisor with positive leading coefficient. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.normalize_sign();
    }
    if b.is_zero() {
        return a.normalize_sign();
    }
    if a == b {
        return a.normalize_sign();
    }
    let ca = a.content();
    let cb = b.content();
    let ci = ca.gcd(&cb);
    let ma = a.mono_content();
    let mb = b.mono_content();
    let mg = mono_gcd(&ma, &mb);
    let a1 = a.div_int_exact(&ca).div_mono(&ma);
    let b1 = b.div_int_exact(&cb).div_mono(&mb);
    let g = gcd_primitive(&a1, &b1);
    g.mul_term(&mg, &ci)
}

/// gcd of a list of polynomials, stopping early once it becomes a constant.
pub fn gcd_list<'a>(ps: impl IntoIterator<Item = &'a Poly>) -> Poly {
    let mut v: Vec<&Poly> = ps.into_iter().filter(|p| !p.is_zero()).collect();
    v.sort_by_key(|p| p.len());
    let mut g = Poly::zero();
    for p in v {
        g = gcd(&g, p);
        if g.is_one() {
            break;
        }
    }
    g
}

fn is_unit_gcd(p: &Poly) -> bool {
    p.is_constant()
}

/// Both arguments are nonzero, integer-primitive and free of monomial content.
/// Returns a primitive gcd with positive leading coefficient.
fn gcd_primitive(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b || *a == b.neg() {
        return a.normalize_sign();
    }
    // Cheap divisibility test, guarded by divisibility of leading monomials.
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if mono_div(large.lm(), small.lm()).is_some() && small.lc().divides(large.lc()) {
        if large.div_exact(small).is_some() {
            return small.normalize_sign();
        }
    }
    let va = a.vars();
    let vb = b.vars();
    if let Some(&v) = va.iter().find(|v| vb.binary_search(v).is_err()) {
        return gcd_with_coeffs(b, a, v);
    }
    if let Some(&v) = vb.iter().find(|v| va.binary_search(v).is_err()) {
        return gcd_with_coeffs(a, b, v);
    }
    // Same variable set. Pick the main variable of least degree.
    let v = *va
        .iter()
        .min_by_key(|&&v| {
            let (da, db) = (a.degree(v), b.degree(v));
            (da.min(db), da.max(db), v)
        })
        .expect("nonconstant polynomial has variables");
    let ac = a.coeffs_in(v);
    let bc = b.coeffs_in(v);
    let conta = gcd_list(ac.iter());
    let contb = gcd_list(bc.iter());
    let cg = gcd(&conta, &contb);
    let pa = if conta.is_one() {
        a.clone()
    } else {
        a.div_exact(&conta).expect("content divides")
    };
    let pb = if contb.is_one() {
        b.clone()
    } else {
        b.div_exact(&contb).expect("content divides")
    };
    let da = pa.degree(v);
    let db = pb.degree(v);
    let gp = if da == 0 || db == 0 {
        Poly::one()
    } else if db == 1 {
        if pa.div_exact(&pb).is_some() {
            pb.clone()
        } else {
            Poly::one()
        }
    } else if da == 1 {
        if pb.div_exact(&pa).is_some() {
            pa.clone()
        } else {
            Poly::one()
        }
    } else {
        let r = subresultant(&pa.coeffs_in(v), &pb.coeffs_in(v));
        if r.len() <= 1 {
            Poly::one()
        } else {
            let c = gcd_list(r.iter());
            let rp: Vec<Poly> = r
                .iter()
                .map(|x| x.div_exact(&c).expect("content divides"))
                .collect();
            Poly::from_coeffs_in(v, &rp)
        }
    };
    cg.mul(&gp).normalize_sign()
}

/// gcd when `v` occurs in `with_v` but not in `without_v`.
fn gcd_with_coeffs(without_v: &Poly, with_v: &Poly, v: Var) -> Poly {
    let mut cs = with_v.coeffs_in(v);
    cs.retain(|c| !c.is_zero());
    cs.sort_by_key(|c| c.len());
    let mut g = without_v.clone();
    for c in &cs {
        g = gcd(&g, c);
        if is_unit_gcd(&g) {
            return Poly::one();
        }
    }
    g.normalize_sign()
}

type UPoly = Vec<Poly>;

fn trim(p: &mut UPoly) {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

fn deg(p: &UPoly) -> usize {
    p.len() - 1
}

/// Pseudo-remainder `lc(b)^(deg a - deg b + 1) a mod b`.
fn prem(a: &UPoly, b: &UPoly) -> UPoly {
    let n = deg(b);
    let lb = &b[n];
    let mut r = a.clone();
    let mut e = deg(a) as i64 - n as i64 + 1;
    trim(&mut r);
    while !r.is_empty() && deg(&r) >= n {
        let d = deg(&r) - n;
        let lr = r[deg(&r)].clone();
        for c in r.iter_mut() {
            *c = c.mul(lb);
        }
        for (i, bi) in b.iter().enumerate() {
            r[i + d] = r[i + d].sub(&lr.mul(bi));
        }
        trim(&mut r);
        e -= 1;
    }
    if e > 0 && !r.is_empty() {
        let f = lb.pow(e as u32);
        for c in r.iter_mut() {
            *c = c.mul(&f);
        }
    }
    r
}

/// Last nonzero element of the subresultant remainder sequence.
fn subresultant(a: &UPoly, b: &UPoly) -> UPoly {
    let (mut a, mut b) = if deg(a) >= deg(b) {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    let mut g = Poly::one();
    let mut h = Poly::one();
    loop {
        let d = deg(&a) - deg(&b);
        let r = prem(&a, &b);
        if r.is_empty() {
            return b;
        }
        if deg(&r) == 0 {
            return vec![Poly::one()];
        }
        let div = g.mul(&h.pow(d as u32));
        let nb: UPoly = r
            .iter()
            .map(|c| c.div_exact(&div).expect("subresultant division is exact"))
            .collect();
        a = b;
        b = nb;
        g = a[deg(&a)].clone();
        h = if d == 0 {
            h
        } else if d == 1 {
            g.clone()
        } else {
            g.pow(d as u32)
                .div_exact(&h.pow(d as u32 - 1))
                .expect("subresultant division is exact")
        };
    }
}
