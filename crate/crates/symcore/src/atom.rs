//! Interned atoms: named symbols and applications of opaque functions.
//!
//! Every atom receives a stable small integer id which is used as a polynomial
//! variable. The table is global and append-only, so ids can be shared freely
//! between threads.

use crate::expr::Expr;
use crate::poly::Var;
use once_cell::sync::Lazy;
use parking_lot::RwLock;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Independent,
    Dummy,
    DependentJet,
    GroupParam,
    /// Named constants of the problem (for example gravity in the shallow water model).
    Constant,
    /// Internal placeholders such as radicals introduced while solving for a frame.
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AtomData {
    Symbol {
        name: Arc<str>,
        kind: SymbolKind,
    },
    Opaque {
        name: Arc<str>,
        /// Count vector of partial derivatives, one slot per argument.
        derivs: Vec<u32>,
        args: Vec<Expr>,
    },
}

#[derive(Default)]
struct Table {
    data: Vec<AtomData>,
    index: HashMap<AtomData, Var>,
}

static TABLE: Lazy<RwLock<Table>> = Lazy::new(|| RwLock::new(Table::default()));

pub(crate) fn intern(d: AtomData) -> Var {
    if let Some(v) = TABLE.read().index.get(&d) {
        return *v;
    }
    let mut t = TABLE.write();
    if let Some(v) = t.index.get(&d) {
        return *v;
    }
    let v = t.data.len() as Var;
    t.data.push(d.clone());
    t.index.insert(d, v);
    v
}

pub fn atom(v: Var) -> AtomData {
    TABLE.read().data[v as usize].clone()
}

pub(crate) fn with_atom<R>(v: Var, f: impl FnOnce(&AtomData) -> R) -> R {
    f(&TABLE.read().data[v as usize])
}

pub fn is_opaque(v: Var) -> bool {
    with_atom(v, |a| matches!(a, AtomData::Opaque { .. }))
}

/// A named scalar symbol. Symbols with equal names but different kinds are distinct.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol(pub(crate) Var);

impl Symbol {
    pub fn new(name: &str, kind: SymbolKind) -> Symbol {
        Symbol(intern(AtomData::Symbol {
            name: Arc::from(name),
            kind,
        }))
    }

    pub fn from_var(v: Var) -> Option<Symbol> {
        with_atom(v, |a| matches!(a, AtomData::Symbol { .. })).then_some(Symbol(v))
    }

    pub fn var(self) -> Var {
        self.0
    }

    pub fn name(self) -> Arc<str> {
        with_atom(self.0, |a| match a {
            AtomData::Symbol { name, .. } => name.clone(),
            AtomData::Opaque { .. } => unreachable!("symbol id refers to an opaque atom"),
        })
    }

    pub fn kind(self) -> SymbolKind {
        with_atom(self.0, |a| match a {
            AtomData::Symbol { kind, .. } => *kind,
            AtomData::Opaque { .. } => unreachable!("symbol id refers to an opaque atom"),
        })
    }

    pub fn expr(self) -> Expr {
        Expr::symbol(self)
    }
}

impl Ord for Symbol {
    fn cmp(&self, o: &Symbol) -> Ordering {
        if self.0 == o.0 {
            return Ordering::Equal;
        }
        (self.kind(), self.name()).cmp(&(o.kind(), o.name()))
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, o: &Symbol) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// An undetermined smooth function of a fixed number of arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpaqueFn {
    name: Arc<str>,
    arity: usize,
}

impl OpaqueFn {
    pub fn new(name: &str, arity: usize) -> OpaqueFn {
        OpaqueFn {
            name: Arc::from(name),
            arity,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn apply(&self, args: &[Expr]) -> Expr {
        self.derivative(&vec![0; self.arity], args)
    }

    /// The atom for the partial derivative with the given count vector.
    pub fn derivative(&self, derivs: &[u32], args: &[Expr]) -> Expr {
        assert_eq!(args.len(), self.arity, "wrong number of arguments to {}", self.name);
        assert_eq!(derivs.len(), self.arity);
        Expr::from_var(intern(AtomData::Opaque {
            name: self.name.clone(),
            derivs: derivs.to_vec(),
            args: args.to_vec(),
        }))
    }
}
