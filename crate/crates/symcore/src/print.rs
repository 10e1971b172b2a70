//! Text and LaTeX rendering.
//!
//! Term order is based on atom names rather than internal ids so that output is
//! identical across runs: independents first, then the dummy variable, jet
//! coordinates by order, group parameters, constants, auxiliaries and finally
//! opaque function applications.

use crate::atom::{self, AtomData, SymbolKind};
use crate::expr::Expr;
use crate::int::Int;
use crate::poly::{Mono, Poly, Var};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

type Key = (u8, usize, String);

fn kind_rank(k: SymbolKind) -> u8 {
    match k {
        SymbolKind::Independent => 0,
        SymbolKind::Dummy => 1,
        SymbolKind::DependentJet => 2,
        SymbolKind::GroupParam => 3,
        SymbolKind::Constant => 4,
        SymbolKind::Auxiliary => 5,
    }
}

fn atom_key(v: Var) -> Key {
    match atom::atom(v) {
        AtomData::Symbol { name, kind } => {
            let len = if kind == SymbolKind::DependentJet { name.len() } else { 0 };
            (kind_rank(kind), len, name.to_string())
        }
        AtomData::Opaque { .. } => (6, 0, atom_text(v, false)),
    }
}

fn greek(base: &str) -> Option<&'static str> {
    const G: [&str; 24] = [
        "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
        "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi", "chi", "psi",
        "omega", "Omega",
    ];
    const L: [&str; 24] = [
        "\\alpha", "\\beta", "\\gamma", "\\delta", "\\epsilon", "\\zeta", "\\eta", "\\theta",
        "\\iota", "\\kappa", "\\lambda", "\\mu", "\\nu", "\\xi", "\\pi", "\\rho", "\\sigma",
        "\\tau", "\\upsilon", "\\phi", "\\chi", "\\psi", "\\omega", "\\Omega",
    ];
    G.iter().position(|g| *g == base).map(|i| L[i])
}

/// LaTeX form of a symbol name: `u_xy` becomes `u_{xy}`, `a12` becomes `a_{12}`.
pub fn latex_name(name: &str) -> String {
    let (base, sub) = match name.find('_') {
        Some(i) => (&name[..i], Some(name[i + 1..].to_string())),
        None => {
            let cut = name.trim_end_matches(|c: char| c.is_ascii_digit()).len();
            if cut > 0 && cut < name.len() {
                (&name[..cut], Some(name[cut..].to_string()))
            } else {
                (name, None)
            }
        }
    };
    let b = greek(base).map(str::to_string).unwrap_or_else(|| base.to_string());
    match sub {
        Some(s) => {
            let s: String = s
                .split('_')
                .map(|p| greek(p).map(str::to_string).unwrap_or_else(|| p.to_string()))
                .collect::<Vec<_>>()
                .join("");
            format!("{b}_{{{s}}}")
        }
        None => b,
    }
}

fn atom_text(v: Var, latex: bool) -> String {
    match atom::atom(v) {
        AtomData::Symbol { name, .. } => {
            if latex {
                latex_name(&name)
            } else {
                name.to_string()
            }
        }
        AtomData::Opaque { name, derivs, args } => {
            let a: Vec<String> = args.iter().map(|e| render(e, latex)).collect();
            let base = if latex { latex_name(&name) } else { name.to_string() };
            let d: Vec<String> = derivs.iter().map(|k| k.to_string()).collect();
            if derivs.iter().all(|k| *k == 0) {
                if latex {
                    format!("{base}\\left({}\\right)", a.join(", "))
                } else {
                    format!("{base}({})", a.join(", "))
                }
            } else if latex {
                format!("{base}^{{({})}}\\left({}\\right)", d.join(","), a.join(", "))
            } else {
                format!("{base}'[{}]({})", d.join(","), a.join(", "))
            }
        }
    }
}

struct Ctx {
    keys: HashMap<Var, Key>,
    names: HashMap<Var, String>,
    latex: bool,
}

impl Ctx {
    fn new(e: &Expr, latex: bool) -> Ctx {
        let vars = e.vars();
        Ctx {
            keys: vars.iter().map(|&v| (v, atom_key(v))).collect(),
            names: vars.iter().map(|&v| (v, atom_text(v, latex))).collect(),
            latex,
        }
    }

    fn sorted_factors(&self, m: &Mono) -> Vec<(Var, u32)> {
        let mut f: Vec<(Var, u32)> = m.iter().cloned().collect();
        f.sort_by(|a, b| self.keys[&a.0].cmp(&self.keys[&b.0]));
        f
    }

    fn cmp_mono(&self, a: &Mono, b: &Mono) -> Ordering {
        let fa = self.sorted_factors(a);
        let fb = self.sorted_factors(b);
        for (x, y) in fa.iter().zip(fb.iter()) {
            match self.keys[&x.0].cmp(&self.keys[&y.0]) {
                Ordering::Equal => {}
                o => return o,
            }
            match y.1.cmp(&x.1) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        fb.len().cmp(&fa.len())
    }

    fn ordered_terms(&self, p: &Poly) -> Vec<(Mono, Int)> {
        let mut t: Vec<(Mono, Int)> = p.terms().to_vec();
        t.sort_by(|a, b| self.cmp_mono(&a.0, &b.0));
        t
    }

    fn mono(&self, m: &Mono) -> String {
        let sep = if self.latex { " " } else { "*" };
        self.sorted_factors(m)
            .iter()
            .map(|&(v, e)| {
                let n = &self.names[&v];
                if e == 1 {
                    n.clone()
                } else if self.latex {
                    if n.contains('_') || n.contains("\\left") {
                        format!("{{{n}}}^{{{e}}}")
                    } else {
                        format!("{n}^{{{e}}}")
                    }
                } else {
                    format!("{n}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join(sep)
    }

    fn term_abs(&self, m: &Mono, c: &Int) -> String {
        let c = c.abs();
        if m.is_empty() {
            return c.to_string();
        }
        let ms = self.mono(m);
        if c.is_one() {
            ms
        } else if self.latex {
            format!("{c} {ms}")
        } else {
            format!("{c}*{ms}")
        }
    }

    fn poly(&self, terms: &[(Mono, Int)]) -> String {
        if terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (m, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            s.push_str(&self.term_abs(m, c));
        }
        s
    }
}

fn negate(t: &mut [(Mono, Int)]) {
    for x in t.iter_mut() {
        x.1 = x.1.neg();
    }
}

fn render(e: &Expr, latex: bool) -> String {
    let cx = Ctx::new(e, latex);
    let mut num = cx.ordered_terms(e.num());
    let mut den = cx.ordered_terms(e.den());
    if den[0].1.is_negative() {
        negate(&mut num);
        negate(&mut den);
    }
    if den.len() == 1 && den[0].0.is_empty() && den[0].1.is_one() {
        return cx.poly(&num);
    }
    let single_num = num.len() == 1;
    let neg = single_num && num[0].1.is_negative();
    if neg {
        negate(&mut num);
    }
    let ns = cx.poly(&num);
    let ds = cx.poly(&den);
    let sign = if neg { "-" } else { "" };
    if latex {
        return format!("{sign}\\frac{{{ns}}}{{{ds}}}");
    }
    let ns = if single_num { ns } else { format!("({ns})") };
    let simple_den = den.len() == 1
        && (den[0].0.is_empty()
            || (den[0].1.is_one() && den[0].0.len() == 1 && den[0].0[0].1 == 1));
    let ds = if simple_den { ds } else { format!("({ds})") };
    format!("{sign}{ns}/{ds}")
}

pub fn to_text(e: &Expr) -> String {
    render(e, false)
}

pub fn to_latex(e: &Expr) -> String {
    render(e, true)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_text(self))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_text(self))
    }
}
