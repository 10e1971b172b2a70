//! Problem files: TOML with four sections and a task list.
//!
//! ```toml
//! name = "sl2_linear_monge_ampere"
//! tasks = ["frame", "invariants 2"]
//!
//! [variables]
//! independents = ["x", "y"]
//! dependents = ["u"]
//! dummy = true
//!
//! [group]
//! params = [["a", "1"], ["b", "0"], ["c", "0"]]
//! eliminated = [["d", "(1+b*c)/a"]]
//! indep_action = ["a*x+b*y", "c*x+d*y"]
//! dep_action = ["u"]
//! matrix = [["a", "b"], ["c", "d"]]
//!
//! [normalization]
//! equations = [["x", "1"], ["y", "0"], ["u_y", "0"]]
//!
//! [lagrangian]
//! density = "u*(u_xx*u_yy - u_xy^2)"
//! ```
//!
//! Ordered data (parameters, definitions, equations) are arrays of pairs so
//! that their order survives deserialization. Unknown keys are rejected.

use crate::error::CliError;
use nframes_core::problem::{Problem, ProblemSpec};
use serde::Deserialize;
use std::fmt;
use std::path::Path;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    #[serde(default)]
    pub tasks: Vec<String>,
    pub variables: Variables,
    pub group: Group,
    pub normalization: Normalization,
    #[serde(default)]
    pub lagrangian: Option<LagrangianSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variables {
    pub independents: Vec<String>,
    pub dependents: Vec<String>,
    /// Adds the dummy invariant variable τ, needed for forms and syzygies.
    #[serde(default)]
    pub dummy: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Group {
    /// Free parameters with their identity values.
    pub params: Vec<(String, String)>,
    #[serde(default)]
    pub eliminated: Vec<(String, String)>,
    #[serde(default)]
    pub constants: Vec<String>,
    /// Arbitrary functions with their arities, e.g. `[["L", 2]]`.
    #[serde(default)]
    pub functions: Vec<(String, usize)>,
    #[serde(default)]
    pub definitions: Vec<(String, String)>,
    pub indep_action: Vec<String>,
    pub dep_action: Vec<String>,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub composition: Option<CompositionLaw>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionLaw {
    /// Parameter names of the second factor.
    pub second: Vec<String>,
    /// Parameters of the product, one per free parameter.
    pub product: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Normalization {
    pub equations: Vec<(String, String)>,
    /// A frame supplied by hand instead of solving.
    #[serde(default)]
    pub frame: Option<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianSection {
    pub density: String,
    /// Generating invariants whose syzygies are reported.
    #[serde(default)]
    pub generators: Vec<String>,
}

/// One requested computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    Frame,
    Invariants(u32),
    Operators,
    Forms,
    Syzygies,
    El,
    Laws,
    Structured,
    Verify,
}

impl Task {
    /// Position in the dependency order.
    pub fn rank(self) -> u8 {
        match self {
            Task::Frame => 0,
            Task::Invariants(_) => 1,
            Task::Operators => 2,
            Task::Forms => 3,
            Task::Syzygies => 4,
            Task::El => 5,
            Task::Laws => 6,
            Task::Structured => 7,
            Task::Verify => 8,
        }
    }

    pub fn parse(s: &str) -> Result<Task, CliError> {
        let mut it = s.split_whitespace();
        let head = it.next().unwrap_or("");
        let arg = it.next();
        if it.next().is_some() {
            return Err(CliError::Task(s.to_string()));
        }
        let t = match (head, arg) {
            ("frame", None) => Task::Frame,
            ("invariants", None) => Task::Invariants(2),
            ("invariants", Some(n)) => Task::Invariants(n.parse().map_err(|_| CliError::Task(s.to_string()))?),
            ("operators", None) => Task::Operators,
            ("forms", None) => Task::Forms,
            ("syzygies", None) => Task::Syzygies,
            ("el", None) => Task::El,
            ("laws", None) => Task::Laws,
            ("structured", None) => Task::Structured,
            ("verify", None) => Task::Verify,
            _ => return Err(CliError::Task(s.to_string())),
        };
        Ok(t)
    }

    /// Sorted into dependency order, duplicates removed.
    pub fn parse_list<S: AsRef<str>>(items: &[S]) -> Result<Vec<Task>, CliError> {
        let mut v = items.iter().map(|s| Task::parse(s.as_ref().trim())).collect::<Result<Vec<_>, _>>()?;
        v.sort_by_key(|t| (t.rank(), *t));
        v.dedup();
        Ok(v)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Frame => write!(f, "frame"),
            Task::Invariants(n) => write!(f, "invariants {n}"),
            Task::Operators => write!(f, "operators"),
            Task::Forms => write!(f, "forms"),
            Task::Syzygies => write!(f, "syzygies"),
            Task::El => write!(f, "el"),
            Task::Laws => write!(f, "laws"),
            Task::Structured => write!(f, "structured"),
            Task::Verify => write!(f, "verify"),
        }
    }
}

impl ProblemFile {
    pub fn from_toml(src: &str) -> Result<ProblemFile, CliError> {
        toml::from_str(src).map_err(|e| CliError::Toml(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<ProblemFile, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        ProblemFile::from_toml(&src)
    }

    pub fn spec(&self) -> ProblemSpec {
        let lag = self.lagrangian.as_ref();
        ProblemSpec {
            name: self.name.clone(),
            independents: self.variables.independents.clone(),
            dependents: self.variables.dependents.clone(),
            params: self.group.params.clone(),
            eliminated: self.group.eliminated.clone(),
            constants: self.group.constants.clone(),
            functions: self.group.functions.clone(),
            definitions: self.group.definitions.clone(),
            indep_action: self.group.indep_action.clone(),
            dep_action: self.group.dep_action.clone(),
            matrix: self.group.matrix.clone(),
            composition: self.group.composition.as_ref().map(|c| (c.second.clone(), c.product.clone())),
            normalization: self.normalization.equations.clone(),
            frame: self.normalization.frame.clone(),
            lagrangian: lag.map(|l| l.density.clone()),
            generators: lag.map(|l| l.generators.clone()).unwrap_or_default(),
        }
    }

    pub fn problem(&self) -> Result<Problem, CliError> {
        self.spec().build().map_err(CliError::Problem)
    }

    pub fn tasks(&self) -> Result<Vec<Task>, CliError> {
        Task::parse_list(&self.tasks)
    }
}
