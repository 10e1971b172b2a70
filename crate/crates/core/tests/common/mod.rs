//! Problem fixtures shared by the integration tests.
#![allow(dead_code)]

use nframes_core::problem::{Problem, ProblemSpec};

fn s(v: &[&str]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
    v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

pub fn sl2_linear() -> Problem {
    ProblemSpec {
        name: "sl2_linear_monge_ampere".into(),
        independents: s(&["x", "y"]),
        dependents: s(&["u"]),
        params: pairs(&[("a", "1"), ("b", "0"), ("c", "0")]),
        eliminated: pairs(&[("d", "(1+b*c)/a")]),
        indep_action: s(&["a*x+b*y", "c*x+d*y"]),
        dep_action: s(&["u"]),
        matrix: Some(vec![s(&["a", "b"]), s(&["c", "d"])]),
        normalization: pairs(&[("x", "1"), ("y", "0"), ("u_y", "0")]),
        lagrangian: Some("u*(u_xx*u_yy - u_xy^2)".into()),
        generators: s(&["u", "u_yy"]),
        ..ProblemSpec::default()
    }
    .build()
    .unwrap()
}

pub fn sl2_projective() -> Problem {
    ProblemSpec {
        name: "sl2_projective".into(),
        independents: s(&["x"]),
        dependents: s(&["u"]),
        params: pairs(&[("a", "1"), ("b", "0"), ("c", "0")]),
        eliminated: pairs(&[("d", "(1+b*c)/a")]),
        definitions: pairs(&[("sigma", "u_xxx/u_x^3 - 3/2*u_xx^2/u_x^4")]),
        indep_action: s(&["(a*x+b)/(c*x+d)"]),
        dep_action: s(&["u"]),
        matrix: Some(vec![s(&["a", "b"]), s(&["c", "d"])]),
        normalization: pairs(&[("x", "0"), ("u_x", "1"), ("u_xx", "0")]),
        lagrangian: Some("sigma^2*u_x".into()),
        ..ProblemSpec::default()
    }
    .build()
    .unwrap()
}

pub fn shallow_water() -> Problem {
    ProblemSpec {
        name: "shallow_water".into(),
        independents: s(&["a", "b", "t"]),
        dependents: s(&["x", "y", "u", "v"]),
        params: pairs(&[("alpha", "1"), ("beta", "0"), ("gamma", "0")]),
        eliminated: pairs(&[("delta", "(1+beta*gamma)/alpha")]),
        constants: s(&["g", "f", "c1", "c2", "c3", "c4", "c6"]),
        definitions: pairs(&[
            ("P", "c1*x + c2*y + c3"),
            ("R", "c4*x + (f - c1)*y + c6"),
            ("h", "1/(x_a*y_b - x_b*y_a)"),
        ]),
        indep_action: s(&["alpha*a+beta*b", "gamma*a+delta*b", "t"]),
        dep_action: s(&["x", "y", "u", "v"]),
        matrix: Some(vec![s(&["alpha", "beta"]), s(&["gamma", "delta"])]),
        normalization: pairs(&[("a", "0"), ("b", "1"), ("x_a", "0")]),
        lagrangian: Some("(u - R)*x_t + (v + P)*y_t - (u^2 + v^2 + g*h)/2".into()),
        ..ProblemSpec::default()
    }
    .build()
    .unwrap()
}

pub fn sl3_linear() -> Problem {
    ProblemSpec {
        name: "sl3_linear".into(),
        independents: s(&["x", "y", "z"]),
        dependents: s(&["u", "v", "w"]),
        params: pairs(&[
            ("a11", "1"),
            ("a12", "0"),
            ("a13", "0"),
            ("a21", "0"),
            ("a22", "1"),
            ("a23", "0"),
            ("a31", "0"),
            ("a32", "0"),
        ]),
        eliminated: pairs(&[(
            "a33",
            "(1 + a11*a23*a32 - a12*a23*a31 - a13*a21*a32 + a13*a22*a31)/(a11*a22 - a12*a21)",
        )]),
        functions: vec![("L".into(), 2)],
        definitions: pairs(&[(
            "B",
            "u_x*(v_y*w_z - v_z*w_y) - u_y*(v_x*w_z - v_z*w_x) + u_z*(v_x*w_y - v_y*w_x)",
        )]),
        indep_action: s(&[
            "a11*x + a12*y + a13*z",
            "a21*x + a22*y + a23*z",
            "a31*x + a32*y + a33*z",
        ]),
        dep_action: s(&["u", "v", "w"]),
        matrix: Some(vec![
            s(&["a11", "a12", "a13"]),
            s(&["a21", "a22", "a23"]),
            s(&["a31", "a32", "a33"]),
        ]),
        normalization: pairs(&[
            ("u_x", "1"),
            ("u_y", "0"),
            ("u_z", "0"),
            ("v_x", "0"),
            ("v_y", "1"),
            ("v_z", "0"),
            ("w_x", "0"),
            ("w_y", "0"),
        ]),
        lagrangian: Some("L(w, B)".into()),
        ..ProblemSpec::default()
    }
    .build()
    .unwrap()
}
