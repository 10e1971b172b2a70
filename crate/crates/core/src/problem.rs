//! Problems declared with expression strings, resolved into typed objects.

use crate::error::{CoreError, Result};
use crate::groupaction::{Composition, GroupActionSpec};
use crate::jetspace::JetContext;
use crate::movingframe::{Frame, NormalizationSpec};
use std::collections::HashMap;
use symcore::{parse_expr, BigRational, Expr, Matrix, Resolver, Symbol, SymbolKind};

/// Textual description of a problem; every expression is a string in the
/// infix syntax of [`symcore::parse_expr`].
#[derive(Clone, Debug, Default)]
pub struct ProblemSpec {
    pub name: String,
    pub independents: Vec<String>,
    pub dependents: Vec<String>,
    /// Free group parameters with their identity values.
    pub params: Vec<(String, String)>,
    /// Eliminated parameters, for example `d = (1+b*c)/a`.
    pub eliminated: Vec<(String, String)>,
    pub constants: Vec<String>,
    /// Names of arbitrary functions with their arities.
    pub functions: Vec<(String, usize)>,
    /// Named abbreviations, substituted where they appear.
    pub definitions: Vec<(String, String)>,
    pub indep_action: Vec<String>,
    pub dep_action: Vec<String>,
    pub matrix: Option<Vec<Vec<String>>>,
    /// Explicit composition: names of the second factor's parameters, and product.
    pub composition: Option<(Vec<String>, Vec<String>)>,
    pub normalization: Vec<(String, String)>,
    /// Optional frame supplied by hand, one expression per free parameter.
    pub frame: Option<Vec<String>>,
    pub lagrangian: Option<String>,
    /// Generating invariants for syzygies, as jet-coordinate expressions.
    pub generators: Vec<String>,
}

/// A resolved problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub spec: GroupActionSpec,
    pub norm: NormalizationSpec,
    pub frame_values: Option<Vec<Expr>>,
    pub lagrangian: Option<Expr>,
    pub generators: Vec<Expr>,
    pub constants: Vec<Symbol>,
    names: NameTable,
}

#[derive(Clone, Debug, Default)]
struct NameTable {
    ctx: Option<JetContext>,
    fixed: HashMap<String, Expr>,
    functions: HashMap<String, usize>,
}

impl Resolver for NameTable {
    fn resolve(&self, name: &str) -> Option<Expr> {
        if let Some(e) = self.fixed.get(name) {
            return Some(e.clone());
        }
        self.ctx.as_ref()?.resolve(name)
    }

    fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let e = parse_expr(s, &|_: &str| None)?;
    e.as_rational()
        .ok_or_else(|| CoreError::InvalidSpec(format!("`{s}` is not a rational constant")))
}

impl NameTable {
    fn parse(&self, what: &str, s: &str) -> Result<Expr> {
        parse_expr(s, self).map_err(|e| CoreError::InvalidSpec(format!("{what}: {e}")))
    }

    fn define(&mut self, name: &str, e: Expr) -> Result<()> {
        if self.fixed.contains_key(name)
            || self.functions.contains_key(name)
            || self.ctx.as_ref().and_then(|c| c.resolve(name)).is_some()
        {
            return Err(CoreError::InvalidSpec(format!("name `{name}` is declared twice")));
        }
        self.fixed.insert(name.to_string(), e);
        Ok(())
    }
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Problem> {
        let ind: Vec<&str> = self.independents.iter().map(|s| s.as_str()).collect();
        let dep: Vec<&str> = self.dependents.iter().map(|s| s.as_str()).collect();
        let ctx = JetContext::new(&ind, &dep)?;
        let mut names = NameTable {
            ctx: Some(ctx.with_dummy()?),
            ..NameTable::default()
        };
        for (f, n) in &self.functions {
            if names.functions.insert(f.clone(), *n).is_some() {
                return Err(CoreError::InvalidSpec(format!("function `{f}` is declared twice")));
            }
        }
        let mut params = Vec::new();
        for (p, v) in &self.params {
            let s = Symbol::new(p, SymbolKind::GroupParam);
            names.define(p, s.expr())?;
            params.push((s, parse_rational(v)?));
        }
        let mut constants = Vec::new();
        for c in &self.constants {
            let s = Symbol::new(c, SymbolKind::Constant);
            names.define(c, s.expr())?;
            constants.push(s);
        }
        let mut defines = Vec::new();
        for (p, e) in &self.eliminated {
            let s = Symbol::new(p, SymbolKind::GroupParam);
            let e = names.parse(&format!("eliminated parameter `{p}`"), e)?;
            names.define(p, s.expr())?;
            defines.push((s, e));
        }
        for (n, e) in &self.definitions {
            let e = names.parse(&format!("definition `{n}`"), e)?;
            names.define(n, e)?;
        }
        let indep = self
            .indep_action
            .iter()
            .map(|s| names.parse("action", s))
            .collect::<Result<Vec<_>>>()?;
        let depa = self
            .dep_action
            .iter()
            .map(|s| names.parse("action", s))
            .collect::<Result<Vec<_>>>()?;
        let mut spec = GroupActionSpec::new(ctx, params, defines, indep, depa)?;
        if let Some(m) = &self.matrix {
            let rows = m
                .iter()
                .map(|r| r.iter().map(|s| names.parse("matrix", s)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            if rows.iter().any(|r| r.len() != rows.len()) {
                return Err(CoreError::ShapeMismatch("group matrix must be square".into()));
            }
            spec = spec.with_matrix(Matrix::from_rows(rows))?;
        }
        if let Some((second, prod)) = &self.composition {
            let mut local = names.clone();
            let second = second
                .iter()
                .map(|n| {
                    let s = Symbol::new(n, SymbolKind::GroupParam);
                    local.define(n, s.expr())?;
                    Ok(s)
                })
                .collect::<Result<Vec<_>>>()?;
            let product = prod
                .iter()
                .map(|s| local.parse("composition", s))
                .collect::<Result<Vec<_>>>()?;
            spec = spec.with_composition(Composition { second, product })?;
        }
        let norm = NormalizationSpec::new(
            self.normalization
                .iter()
                .map(|(l, r)| Ok((names.parse("normalization", l)?, names.parse("normalization", r)?)))
                .collect::<Result<Vec<_>>>()?,
        );
        let frame_values = match &self.frame {
            Some(v) => Some(
                v.iter()
                    .map(|s| names.parse("frame", s))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let lagrangian = match &self.lagrangian {
            Some(s) => Some(names.parse("lagrangian", s)?),
            None => None,
        };
        let generators = self
            .generators
            .iter()
            .map(|s| names.parse("generator", s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Problem {
            name: self.name.clone(),
            spec,
            norm,
            frame_values,
            lagrangian,
            generators,
            constants,
            names,
        })
    }
}

impl Problem {
    pub fn ctx(&self) -> &JetContext {
        self.spec.ctx()
    }

    /// Parses an expression using the names declared by the problem.
    pub fn parse(&self, s: &str) -> Result<Expr> {
        self.names.parse("expression", s)
    }

    /// Like [`Problem::parse`], also accepting the given extra symbols by name,
    /// for example the auxiliary radicals of a frame.
    pub fn parse_with(&self, s: &str, extra: &[Symbol]) -> Result<Expr> {
        let r = |n: &str| {
            extra
                .iter()
                .find(|x| &*x.name() == n)
                .map(|x| x.expr())
                .or_else(|| self.names.resolve(n))
        };
        struct WithFns<'a, F>(&'a F, &'a NameTable);
        impl<F: Fn(&str) -> Option<Expr>> Resolver for WithFns<'_, F> {
            fn resolve(&self, n: &str) -> Option<Expr> {
                (self.0)(n)
            }
            fn function_arity(&self, n: &str) -> Option<usize> {
                self.1.function_arity(n)
            }
        }
        parse_expr(s, &WithFns(&r, &self.names)).map_err(|e| CoreError::InvalidSpec(format!("expression: {e}")))
    }

    /// Solves the normalization equations, or verifies the supplied frame.
    pub fn frame(&self) -> Result<Frame> {
        match &self.frame_values {
            Some(v) => Frame::from_values(&self.spec, &self.norm, v.clone(), vec![]),
            None => Frame::solve(&self.spec, &self.norm),
        }
    }
}
