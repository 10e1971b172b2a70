//! Exact symbolic kernel.
//!
//! Expressions are multivariate rational functions with integer coefficients over
//! interned atoms (named symbols and applications of opaque functions). Every
//! value is kept in a reduced canonical form, so equality of expressions is
//! equality of rational functions.

pub mod atom;
pub mod error;
pub mod eval;
pub mod expr;
pub mod gcd;
pub mod int;
pub mod matrix;
pub mod parse;
pub mod poly;
pub mod print;
pub mod radical;

pub use atom::{OpaqueFn, Symbol, SymbolKind};
pub use error::{Result, SymError};
pub use eval::{is_zero, Evaluator};
pub use expr::{normal_form, Expr};
pub use matrix::Matrix;
pub use num_rational::BigRational;
pub use parse::{parse_expr, FreeResolver, Resolver};
pub use print::{latex_name, to_latex, to_text};
pub use radical::reduce_radical;
