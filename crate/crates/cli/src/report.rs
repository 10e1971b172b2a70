//! Reports and their text, LaTeX and JSON serializations.
//!
//! The JSON form carries every expression in the infix syntax accepted by the
//! problem-file parser, and leaves out timings so that identical inputs give
//! byte-identical output.

use serde::Serialize;
use std::fmt::Write;
use std::time::Duration;
use symcore::{to_latex, to_text, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
    Error,
}

/// A labelled symbolic result.
#[derive(Clone, Debug)]
pub struct Item {
    pub label: String,
    pub expr: Expr,
}

/// Outcome of one verification.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct Section {
    pub task: String,
    pub status: Status,
    pub items: Vec<Item>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

impl Section {
    pub fn new(task: String) -> Section {
        Section {
            task,
            status: Status::Ok,
            items: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn item(&mut self, label: impl Into<String>, expr: Expr) {
        self.items.push(Item { label: label.into(), expr });
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        if !passed && self.status == Status::Ok {
            self.status = Status::Failed;
        }
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub problem: String,
    pub seed: u64,
    pub sections: Vec<Section>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Latex,
    Json,
}

#[derive(Serialize)]
struct JsonItem<'a> {
    label: &'a str,
    expr: String,
}

#[derive(Serialize)]
struct JsonSection<'a> {
    task: &'a str,
    status: Status,
    items: Vec<JsonItem<'a>>,
    checks: &'a [Check],
    notes: &'a [String],
}

#[derive(Serialize)]
struct JsonReport<'a> {
    problem: &'a str,
    seed: u64,
    passed: bool,
    sections: Vec<JsonSection<'a>>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(|s| s.status == Status::Ok)
    }

    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Text => self.text(),
            Format::Latex => self.latex(),
            Format::Json => self.json(),
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} (seed {})", self.problem, self.seed);
        for s in &self.sections {
            let _ = writeln!(out, "\n## {} [{:?}, {:.3}s]", s.task, s.status, s.elapsed.as_secs_f64());
            for n in &s.notes {
                let _ = writeln!(out, "  note: {n}");
            }
            for i in &s.items {
                let _ = writeln!(out, "{} = {}", i.label, to_text(&i.expr));
            }
            for c in &s.checks {
                let mark = if c.passed { "pass" } else { "FAIL" };
                let _ = writeln!(out, "[{mark}] {}: {}", c.name, c.detail);
            }
        }
        let _ = writeln!(out, "\n{}", if self.passed() { "all checks passed" } else { "FAILED" });
        out
    }

    pub fn json(&self) -> String {
        let r = JsonReport {
            problem: &self.problem,
            seed: self.seed,
            passed: self.passed(),
            sections: self
                .sections
                .iter()
                .map(|s| JsonSection {
                    task: &s.task,
                    status: s.status,
                    items: s
                        .items
                        .iter()
                        .map(|i| JsonItem {
                            label: &i.label,
                            expr: to_text(&i.expr),
                        })
                        .collect(),
                    checks: &s.checks,
                    notes: &s.notes,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&r).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn latex(&self) -> String {
        let mut out = String::new();
        out.push_str("\\documentclass{article}\n\\usepackage{amsmath}\n\\usepackage[margin=2cm]{geometry}\n\\allowdisplaybreaks\n\\begin{document}\n");
        let _ = writeln!(out, "\\section*{{{}}}\nSeed: {}.\n", escape(&self.problem), self.seed);
        for s in &self.sections {
            let _ = writeln!(out, "\\subsection*{{{} ({:?})}}", escape(&s.task), s.status);
            for n in &s.notes {
                let _ = writeln!(out, "{}\n", escape(n));
            }
            if !s.items.is_empty() {
                out.push_str("\\begin{align*}\n");
                for i in &s.items {
                    let _ = writeln!(out, "&\\texttt{{{}}} = {} \\\\", escape(&i.label), to_latex(&i.expr));
                }
                out.push_str("\\end{align*}\n");
            }
            if !s.checks.is_empty() {
                out.push_str("\\begin{itemize}\n");
                for c in &s.checks {
                    let mark = if c.passed { "pass" } else { "FAIL" };
                    let _ = writeln!(out, "\\item {mark}: {} --- {}", escape(&c.name), escape(&c.detail));
                }
                out.push_str("\\end{itemize}\n");
            }
        }
        out.push_str("\\end{document}\n");
        out
    }
}

/// Escapes LaTeX special characters in plain text.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '_' | '%' | '$' | '#' | '&' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '^' => out.push_str("\\^{}"),
            '~' => out.push_str("\\~{}"),
            _ => out.push(c),
        }
    }
    out
}
