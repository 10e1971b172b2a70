//! Executes the tasks of a problem file in dependency order.

use crate::error::CliError;
use crate::file::{ProblemFile, Task};
use crate::report::{Report, Section, Status};
use nframes_core::invariantcalc::InvariantCalculus;
use nframes_core::jetspace::MultiIndex;
use nframes_core::movingframe::Frame;
use nframes_core::noether::{self, AdOrder, Lagrangian, LawBundle};
use nframes_core::problem::Problem;
use nframes_core::sample::{DEFAULT_SEED, SAMPLES};
use nframes_core::{CoreError, Result as CoreResult};
use std::time::Instant;
use symcore::{Expr, Matrix};

#[derive(Clone, Debug)]
pub struct Options {
    pub seed: u64,
    pub max_order: u32,
    /// Overrides the task list of the file.
    pub tasks: Option<Vec<Task>>,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            seed: DEFAULT_SEED,
            max_order: 4,
            tasks: None,
        }
    }
}

/// Lazily computed objects shared between tasks.
struct Session<'a> {
    file: &'a ProblemFile,
    problem: Problem,
    seed: u64,
    frame: Option<Frame>,
    calc: Option<InvariantCalculus>,
    lag: Option<Lagrangian>,
    laws: Option<Matrix>,
    bundle: Option<LawBundle>,
}

impl<'a> Session<'a> {
    fn frame(&mut self) -> CoreResult<Frame> {
        if self.frame.is_none() {
            self.frame = Some(self.problem.frame()?);
        }
        Ok(self.frame.clone().unwrap())
    }

    fn calc(&mut self) -> CoreResult<&InvariantCalculus> {
        if self.calc.is_none() {
            let f = self.frame()?;
            let f = if self.file.variables.dummy { f.with_dummy()? } else { f };
            self.calc = Some(InvariantCalculus::new(&f)?);
        }
        Ok(self.calc.as_ref().unwrap())
    }

    fn lagrangian(&mut self) -> CoreResult<Lagrangian> {
        if self.lag.is_none() {
            let density = self.problem.lagrangian.clone().expect("checked before running");
            self.lag = Some(Lagrangian::new(&self.problem.spec, density)?);
        }
        Ok(self.lag.clone().unwrap())
    }

    fn laws(&mut self) -> CoreResult<Matrix> {
        if self.laws.is_none() {
            let lag = self.lagrangian()?;
            self.laws = Some(noether::noether_laws(&lag)?);
        }
        Ok(self.laws.clone().unwrap())
    }

    fn bundle(&mut self) -> CoreResult<LawBundle> {
        if self.bundle.is_none() {
            let lag = self.lagrangian()?;
            let frame = self.frame()?;
            let c = self.laws()?;
            self.bundle = Some(noether::structured_from(lag.spec(), &c, &frame, self.seed)?);
        }
        Ok(self.bundle.clone().unwrap())
    }
}

fn indep_names(p: &Problem, with_dummy: bool) -> Vec<String> {
    let ctx = p.ctx();
    let mut v: Vec<String> = (0..ctx.n_indep()).map(|i| ctx.indep_name(i).to_string()).collect();
    if with_dummy {
        v.push("tau".into());
    }
    v
}

fn push_matrix(s: &mut Section, name: &str, m: &Matrix) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            s.item(format!("{name}[{}][{}]", i + 1, j + 1), m[(i, j)].clone());
        }
    }
}

/// Checks that the input supports the requested tasks.
fn validate(file: &ProblemFile, problem: &Problem, tasks: &[Task], opts: &Options) -> Result<(), CliError> {
    for t in tasks {
        match t {
            Task::Invariants(n) if *n > opts.max_order => return Err(CliError::Order(*n, opts.max_order)),
            Task::Forms | Task::Syzygies if !file.variables.dummy => {
                return Err(CliError::Missing {
                    task: t.to_string(),
                    what: "`dummy = true` in [variables]",
                })
            }
            Task::Syzygies if problem.generators.is_empty() => {
                return Err(CliError::Missing {
                    task: t.to_string(),
                    what: "generators in [lagrangian]",
                })
            }
            Task::El | Task::Laws | Task::Structured if problem.lagrangian.is_none() => {
                return Err(CliError::Missing {
                    task: t.to_string(),
                    what: "a [lagrangian] section",
                })
            }
            _ => {}
        }
    }
    Ok(())
}

/// Runs the tasks; input problems are errors, task failures are recorded
/// in the report.
pub fn run(file: &ProblemFile, opts: &Options) -> Result<Report, CliError> {
    let problem = file.problem()?;
    let tasks = match &opts.tasks {
        Some(t) => {
            let mut t = t.clone();
            t.sort_by_key(|x| (x.rank(), *x));
            t.dedup();
            t
        }
        None => file.tasks()?,
    };
    validate(file, &problem, &tasks, opts)?;
    let mut sess = Session {
        file,
        problem,
        seed: opts.seed,
        frame: None,
        calc: None,
        lag: None,
        laws: None,
        bundle: None,
    };
    let mut report = Report {
        problem: file.name.clone(),
        seed: opts.seed,
        sections: Vec::new(),
    };
    for t in tasks {
        let start = Instant::now();
        let mut s = Section::new(t.to_string());
        if let Err(e) = run_task(&mut sess, t, &mut s) {
            s.status = Status::Error;
            s.notes.push(format!("error: {e}"));
        }
        s.elapsed = start.elapsed();
        report.sections.push(s);
    }
    Ok(report)
}

fn run_task(sess: &mut Session, t: Task, s: &mut Section) -> CoreResult<()> {
    match t {
        Task::Frame => {
            let f = sess.frame()?;
            for (p, v) in f.spec().params().iter().zip(f.values()) {
                s.item(p.name().to_string(), v.clone());
            }
            for r in f.radicals() {
                s.notes.push(format!("{} is the positive root of {}", r.symbol.name(), symcore::to_text(&r.square)));
                s.item(format!("{}^2", r.symbol.name()), r.square.clone());
            }
        }
        Task::Invariants(n) => {
            let f = sess.frame()?;
            let ctx = sess.problem.ctx().clone();
            for i in 0..ctx.n_indep() {
                s.item(format!("I({})", ctx.indep_name(i)), f.invariant_of(ctx.indep(i))?);
            }
            for order in 0..=n {
                for k in MultiIndex::of_order(ctx.n_indep(), order) {
                    for a in 0..ctx.n_dep() {
                        s.item(format!("I({})", ctx.jet_name(a, &k)), f.invariant_of(ctx.jet(a, &k))?);
                    }
                }
            }
        }
        Task::Operators => {
            let dummy = sess.file.variables.dummy;
            let names = indep_names(&sess.problem, dummy);
            let calc = sess.calc()?;
            for (i, op) in calc.operators().iter().enumerate() {
                for (j, c) in op.coeffs.iter().enumerate() {
                    if !c.is_zero() {
                        s.item(format!("Dinv_{}[D_{}]", names[i], names[j]), c.clone());
                    }
                }
            }
            let a = calc.commutator_tensor()?;
            let n = a.dim();
            for i in 0..n {
                for j in i + 1..n {
                    for k in 0..n {
                        let c = a.get(k, i, j);
                        if !c.is_zero() {
                            s.item(format!("[Dinv_{},Dinv_{}][Dinv_{}]", names[i], names[j], names[k]), c.clone());
                        }
                    }
                }
            }
        }
        Task::Forms => {
            let names = indep_names(&sess.problem, true);
            let calc = sess.calc()?;
            for (i, w) in calc.one_forms().iter().enumerate() {
                for (j, nj) in names.iter().enumerate() {
                    let c = w.coeff(&[j]);
                    if !c.is_zero() {
                        s.item(format!("I(d{})[d{nj}]", names[i]), c);
                    }
                }
            }
        }
        Task::Syzygies => {
            let names = indep_names(&sess.problem, true);
            let deps: Vec<String> = (0..sess.problem.ctx().n_dep()).map(|a| sess.problem.ctx().dep_name(a).to_string()).collect();
            let gens = sess.problem.generators.clone();
            let calc = sess.calc()?;
            for g in &gens {
                let h = calc.syzygy(g)?;
                let gt = symcore::to_text(g);
                for (a, w, c) in h.terms() {
                    let word: String = w.iter().map(|i| format!("Dinv_{} ", names[*i])).collect();
                    s.item(format!("Dinv_tau I({gt})[{word}I({}_tau)]", deps[a]), c.clone());
                }
            }
        }
        Task::El => {
            let lag = sess.lagrangian()?;
            let f = sess.frame()?;
            let el = noether::EulerLagrangeSystem::new(&lag, Some(&f))?;
            let ctx = sess.problem.ctx();
            for (a, e) in el.equations.iter().enumerate() {
                s.item(format!("E^{}", ctx.dep_name(a)), e.clone());
            }
            for (a, e) in el.invariantized.unwrap_or_default().iter().enumerate() {
                s.item(format!("I(E^{})", ctx.dep_name(a)), e.clone());
            }
        }
        Task::Laws => {
            let c = sess.laws()?;
            s.notes.push("row j: components C^j_1..C^j_p with sum_k D_k C^j_k = -Q_j E(L)".into());
            push_matrix(s, "C", &c);
        }
        Task::Structured => {
            let b = sess.bundle()?;
            s.notes.push("d(AdInv . V . M . d^(p-1)x) = 0 with the signed basis (-1)^(k-1)".into());
            push_matrix(s, "AdInv", &b.ad_inv);
            push_matrix(s, "V", &b.v);
            push_matrix(s, "M", &b.minors);
        }
        Task::Verify => verify(sess, s)?,
    }
    Ok(())
}

fn outcome(s: &mut Section, name: &str, r: CoreResult<bool>, ok: &str) {
    match r {
        Ok(true) => s.check(name, true, ok),
        Ok(false) => s.check(name, false, "nonzero residual"),
        Err(e) => s.check(name, false, e.to_string()),
    }
}

fn verify(sess: &mut Session, s: &mut Section) -> CoreResult<()> {
    let spec = sess.problem.spec.clone();
    let seed = sess.seed;
    let f = sess.frame()?;
    let norm = sess.problem.norm.clone();
    let r = (|| {
        for (l, rhs) in &norm.equations {
            if !f.reduce(&f.invariantize(l)?.sub(rhs))?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    })();
    outcome(s, "normalization", r, "the frame satisfies every normalization equation");

    let r = spec.adjoint().and_then(|ad| {
        let at = ad.try_map(|e| spec.at_identity(e).map_err(|e| symcore::SymError::DegenerateExpression(e.to_string())))?;
        Ok(at == Matrix::identity(spec.dim()))
    });
    outcome(s, "adjoint at identity", r, "Ad(e) = I");

    match noether::adjoint_product_check(&spec, SAMPLES, seed) {
        Ok((Some(AdOrder::Homomorphism), rep)) => s.check("adjoint product", true, format!("Ad(gh) = Ad(g)Ad(h) at {} pairs", rep.samples)),
        Ok((Some(AdOrder::AntiHomomorphism), rep)) => s.check("adjoint product", true, format!("Ad(gh) = Ad(h)Ad(g) at {} pairs", rep.samples)),
        Ok((None, rep)) => s.check("adjoint product", false, rep.failures.first().cloned().unwrap_or_default()),
        Err(CoreError::NoComposition) => s.notes.push("adjoint product skipped: no group product known".into()),
        Err(e) => s.check("adjoint product", false, e.to_string()),
    }

    if spec.ctx().n_indep() >= 2 {
        let r = noether::pform_action(&spec).map(|z| {
            z.sub(&noether::pform_action_direct(&spec)).is_zero() && noether::coeff_z_residual(&spec, &z).is_zero()
        });
        outcome(s, "(p-1)-form action", r, "Z agrees with the wedge expansion and with the coefficient identity");
    }

    if sess.problem.lagrangian.is_none() {
        return Ok(());
    }
    let lag = match sess.lagrangian() {
        Ok(l) => {
            s.check("lagrangian invariance", true, "pr v_j(L) + L Div xi_j = 0 for every generator");
            l
        }
        Err(e) => {
            s.check("lagrangian invariance", false, e.to_string());
            return Ok(());
        }
    };
    let c = sess.laws()?;
    let r = noether::noether_residuals(&lag, &c).map(|v| v.iter().all(Expr::is_zero));
    outcome(s, "noether identity", r, "sum_k D_k C^j_k + Q_j E(L) = 0 for every j");

    match sess.bundle() {
        Ok(b) => {
            s.check("structured reassembly", b.reassembly_residual().is_zero(), "AdInv V M equals the signed laws; V = I(C') is invariant");
            let r = noether::structured_divergence_residual(&lag, &b)
                .and_then(|v| v.iter().map(|e| f.reduce(e)).collect::<CoreResult<Vec<_>>>())
                .map(|v| v.iter().all(Expr::is_zero));
            outcome(s, "structured divergence", r, "the reassembled laws have the classical divergence");
        }
        Err(e) => s.check("structured reassembly", false, e.to_string()),
    }

    match noether::equivariance_check(&spec, &c, SAMPLES, seed) {
        Ok(rep) if rep.passed() => s.check("equivariance", true, format!("C(g.z) transforms by Ad(g) at {} samples", rep.samples)),
        Ok(rep) => s.check("equivariance", false, rep.failures.first().cloned().unwrap_or_default()),
        Err(e) => s.check("equivariance", false, e.to_string()),
    }
    Ok(())
}
