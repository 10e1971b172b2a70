//! Recursive-descent parser for infix expressions.
//!
//! Grammar: `+ - * /`, integer powers with `^`, parentheses, integer literals,
//! identifiers resolved through a [`Resolver`], function applications `L(a, b)`
//! and derivatives of opaque functions `L'[1,0](a, b)`.

use crate::atom::{OpaqueFn, Symbol, SymbolKind};
use crate::error::{Result, SymError};
use crate::expr::Expr;
use num_bigint::BigInt;
use num_rational::BigRational;

/// Maps identifiers to expressions and function names to arities.
pub trait Resolver {
    fn resolve(&self, name: &str) -> Option<Expr>;
    fn function_arity(&self, _name: &str) -> Option<usize> {
        None
    }
}

/// Resolves every identifier to a symbol of one fixed kind, and accepts any
/// function name with the arity found at the call site.
pub struct FreeResolver(pub SymbolKind);

impl Resolver for FreeResolver {
    fn resolve(&self, name: &str) -> Option<Expr> {
        Some(Symbol::new(name, self.0).expr())
    }
    fn function_arity(&self, _name: &str) -> Option<usize> {
        Some(usize::MAX)
    }
}

impl<F: Fn(&str) -> Option<Expr>> Resolver for F {
    fn resolve(&self, name: &str) -> Option<Expr> {
        self(name)
    }
}

pub fn parse_expr(src: &str, r: &dyn Resolver) -> Result<Expr> {
    let mut p = Parser { s: src.as_bytes(), pos: 0, r };
    let e = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    r: &'a dyn Resolver,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> SymError {
        SymError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat(b'/') {
                let at = self.pos;
                let d = self.unary()?;
                acc = acc.div(&d).map_err(|_| SymError::DegenerateExpression(format!(
                    "division by zero at byte {at}"
                )))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let paren = self.eat(b'(');
            let neg = self.eat(b'-');
            let n = self.integer()?;
            if paren {
                self.expect(b')')?;
            }
            let e: i64 = n
                .try_into()
                .map_err(|_| self.err("exponent too large"))?;
            return base.pow(if neg { -e } else { e });
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let t = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(t.parse().unwrap())
    }

    fn ident(&mut self) -> Option<String> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
        {
            if self.pos == start && self.s[self.pos].is_ascii_digit() {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(Expr::rational(&BigRational::from_integer(n)))
            }
            Some(_) => {
                let at = self.pos;
                let name = self.ident().ok_or_else(|| self.err("unexpected character"))?;
                let mut derivs: Option<Vec<u32>> = None;
                if self.eat(b'\'') {
                    self.expect(b'[')?;
                    let mut d = Vec::new();
                    if !self.eat(b']') {
                        loop {
                            let k = self.integer()?;
                            d.push(u32::try_from(k).map_err(|_| self.err("derivative order too large"))?);
                            if self.eat(b']') {
                                break;
                            }
                            self.expect(b',')?;
                        }
                    }
                    derivs = Some(d);
                }
                if self.peek() == Some(b'(') {
                    let arity = self
                        .r
                        .function_arity(&name)
                        .ok_or_else(|| SymError::UnknownIdentifier(name.clone()))?;
                    self.pos += 1;
                    let mut args = Vec::new();
                    if !self.eat(b')') {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(b')') {
                                break;
                            }
                            self.expect(b',')?;
                        }
                    }
                    if arity != usize::MAX && arity != args.len() {
                        return Err(SymError::Parse {
                            pos: at,
                            msg: format!("`{name}` takes {arity} arguments, got {}", args.len()),
                        });
                    }
                    let f = OpaqueFn::new(&name, args.len());
                    let d = derivs.unwrap_or_else(|| vec![0; args.len()]);
                    if d.len() != args.len() {
                        return Err(SymError::Parse {
                            pos: at,
                            msg: "derivative index length differs from arity".into(),
                        });
                    }
                    return Ok(f.derivative(&d, &args));
                }
                if derivs.is_some() {
                    return Err(self.err("derivative index without arguments"));
                }
                self.r
                    .resolve(&name)
                    .ok_or(SymError::UnknownIdentifier(name))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse_expr(s, &FreeResolver(SymbolKind::Independent)).unwrap()
    }

    #[test]
    fn precedence_and_powers() {
        assert_eq!(p("-x^2"), p("0 - (x*x)"));
        assert_eq!(p("2^-1"), Expr::frac(1, 2));
        assert_eq!(p("x^(-2)*x^3"), p("x"));
        assert_eq!(p("1/2/3"), Expr::frac(1, 6));
    }

    #[test]
    fn functions_and_errors() {
        let e = p("L(x, y)*L'[1,0](x,y)");
        assert_eq!(e.vars().len(), 2);
        assert!(matches!(
            parse_expr("x/(y-y)", &FreeResolver(SymbolKind::Independent)),
            Err(SymError::DegenerateExpression(_))
        ));
        assert!(matches!(
            parse_expr("x +", &FreeResolver(SymbolKind::Independent)),
            Err(SymError::Parse { .. })
        ));
        let none = |_: &str| None;
        assert!(matches!(parse_expr("q", &none), Err(SymError::UnknownIdentifier(_))));
    }
}
