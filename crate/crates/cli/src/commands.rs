use crate::config::{ConfigError, ExperimentConfig};
use crate::output::{ensure_dir, write_csv, write_json};
use anyhow::Result;
use monoblock::blocksolve::inverse_positivity_check;
use monoblock::discretization::assemble_level;
use monoblock::init_solutions::{build_bracket, Bracket};
use monoblock::mesh::build_mesh;
use monoblock::monotone::{check_tau_restriction, compare_methods, march, ComparisonRow, SolveReport, SweepVariant, TimeStepPolicy, ViolationPolicy};
use monoblock::oracle::{convergence_order, mesh_sequence, newton_march, ConvergenceStudy, NewtonConfig, Refinement};
use monoblock::reaction::{audit_problem, c_level, Advection};
use monoblock::{Mesh, MeshSpec, Pair, ProblemSpec};
use serde::Serialize;
use std::path::Path;

/// Whether the command's own checks passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
}

pub struct Settings<'a> {
    pub out: &'a Path,
    pub timing: bool,
}

struct Setup {
    name: String,
    mesh: Mesh,
    problem: ProblemSpec,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup> {
    cfg.validate()?;
    let model = cfg.model()?;
    let mesh = build_mesh(cfg.mesh_spec()?)?;
    let mut problem = model.instantiate()?;
    if cfg.debug.corrupt_upwind {
        problem.advection = Advection::Downwind;
    }
    Ok(Setup { name: model.name().to_string(), mesh, problem })
}

fn bracket(cfg: &ExperimentConfig, s: &Setup) -> Result<Bracket<f64>> {
    let rule = match cfg.construction {
        Some(r) => r,
        None => cfg.model()?.default_bracket(&s.mesh)?,
    };
    Ok(build_bracket(&s.problem, &s.mesh, &rule)?)
}

fn max_diff(a: &Pair, b: &Pair) -> f64 {
    a[0].max_abs_diff(&b[0]).max(a[1].max_abs_diff(&b[1]))
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    model: &'a str,
    mesh: MeshSpec,
    runs: Vec<SolveReport>,
    files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_difference: Option<f64>,
}

pub fn solve(cfg: &ExperimentConfig, st: &Settings) -> Result<Status> {
    let s = setup(cfg)?;
    let nt = s.mesh.nt();
    let levels = if cfg.output.levels.is_empty() { vec![nt] } else { cfg.output.levels.clone() };
    if let Some(m) = levels.iter().find(|&&m| m > nt) {
        return Err(ConfigError::Invalid(format!("output level {m} exceeds nt = {nt}")).into());
    }
    let br = bracket(cfg, &s)?;
    let policy = cfg.policy(st.timing);
    ensure_dir(st.out)?;
    let mut runs = Vec::new();
    let mut files = Vec::new();
    let mut finals = Vec::new();
    for v in cfg.method.variants() {
        let r = march(&s.problem, &s.mesh, v, &policy, &br)?;
        for &m in &levels {
            let sol = r.solution(m);
            for (a, f) in sol.iter().enumerate() {
                let name = format!("{}_u{}_m{m}.csv", v.name(), a + 1);
                write_csv(&st.out.join(&name), &s.mesh, f)?;
                files.push(name);
            }
        }
        println!("{} {}: {} iterations over {nt} levels", s.name, v.name(), r.report.total_iterations);
        finals.push(r.solution(nt));
        runs.push(r.report);
    }
    let max_difference = (finals.len() == 2).then(|| max_diff(&finals[0], &finals[1]));
    let out = SolveOutput { model: &s.name, mesh: s.mesh.spec, runs, files, max_difference };
    write_json(&st.out.join("solve_report.json"), &out)?;
    Ok(Status::Passed)
}

/// Points of `u` outside `[lo, hi]` by more than `1e-10`.
fn outside_envelope(lo: &Pair, u: &Pair, hi: &Pair) -> usize {
    (0..2)
        .map(|a| {
            let vals = u[a].values().iter().zip(lo[a].values()).zip(hi[a].values());
            vals.filter(|((v, l), h)| **v < **l - 1e-10 || **v > **h + 1e-10).count()
        })
        .sum()
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    model: &'a str,
    delta: f64,
    rows: Vec<ComparisonRow>,
    gs_not_slower: bool,
    ordering_violations: usize,
}

pub fn compare(cfg: &ExperimentConfig, st: &Settings) -> Result<Status> {
    let s = setup(cfg)?;
    let br = bracket(cfg, &s)?;
    let c = compare_methods(&s.problem, &s.mesh, &cfg.policy(st.timing), &br)?;
    let out = CompareOutput {
        model: &s.name,
        delta: cfg.delta,
        gs_not_slower: c.gs_not_slower(),
        ordering_violations: c.ordering_violations(),
        rows: c.rows,
    };
    ensure_dir(st.out)?;
    write_json(&st.out.join("compare.json"), &out)?;
    for r in &out.rows {
        println!("m={} jacobi={} gauss-seidel={} ordering_violations={}", r.m, r.n_jacobi, r.n_gauss_seidel, r.ordering_violations);
    }
    Ok(if out.gs_not_slower && out.ordering_violations == 0 { Status::Passed } else { Status::Failed })
}

#[derive(Serialize)]
struct Check {
    name: String,
    status: &'static str,
    detail: String,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    model: &'a str,
    passed: bool,
    checks: Vec<Check>,
}

/// Dense Newton is only run while the unknown count stays below this.
const ORACLE_LIMIT: usize = 1200;

pub fn verify(cfg: &ExperimentConfig, st: &Settings) -> Result<Status> {
    let s = setup(cfg)?;
    let (mesh, problem) = (&s.mesh, &s.problem);
    let mut checks = Vec::new();
    let mut push = |name: &str, ok: Option<bool>, detail: String| {
        let status = match ok {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "skipped",
        };
        checks.push(Check { name: name.to_string(), status, detail });
    };

    let audit = audit_problem(problem, mesh, cfg.seed, cfg.samples)?;
    push(
        "problem-audit",
        Some(audit.passed()),
        format!(
            "{} samples: {} derivative, {} bound, {} class, {} monotonicity mismatches",
            audit.samples, audit.derivative_mismatches, audit.bound_violations, audit.class_violations, audit.gamma_violations
        ),
    );

    let tau = check_tau_restriction(problem, mesh)?;
    push("tau-restriction", Some(!tau.violated), format!("tau*beta = {:.6e}", tau.product));

    let mut lines = 0;
    let mut bad = 0;
    for m in 1..=mesh.nt() {
        let c = c_level(problem, mesh, m)?;
        for (a, systems) in assemble_level(problem, mesh, m)?.iter().enumerate() {
            for sys in systems {
                lines += 1;
                if !(sys.is_m_matrix() && inverse_positivity_check(&sys.matrix(c[a]), 3)) {
                    bad += 1;
                }
            }
        }
    }
    push("m-matrix", Some(bad == 0), format!("{bad} of {lines} line systems failed"));

    let br = bracket(cfg, &s);
    match &br {
        Ok(_) => push("construction", Some(true), "bracket verified at every level".into()),
        Err(e) => push("construction", Some(false), e.to_string()),
    }

    let policy = TimeStepPolicy { on_violation: ViolationPolicy::Record, ..cfg.policy(st.timing) };
    let mut gs = None;
    if let Ok(br) = &br {
        for v in [SweepVariant::Jacobi, SweepVariant::GaussSeidel] {
            let name = format!("sandwich-{}", v.name());
            match march(problem, mesh, v, &policy, br) {
                Ok(r) => {
                    let viol = r.report.monotonicity_violations;
                    push(&name, Some(viol == 0), format!("{viol} violations, {} iterations", r.report.total_iterations));
                    if v == SweepVariant::GaussSeidel {
                        gs = Some(r);
                    }
                }
                Err(e) => push(&name, Some(false), e.to_string()),
            }
        }
        match compare_methods(problem, mesh, &policy, br) {
            Ok(c) => push(
                "comparison",
                Some(c.gs_not_slower() && c.ordering_violations() == 0),
                format!("gs_not_slower={} ordering_violations={}", c.gs_not_slower(), c.ordering_violations()),
            ),
            Err(e) => push("comparison", Some(false), e.to_string()),
        }
    } else {
        for name in ["sandwich-jacobi", "sandwich-gauss-seidel", "comparison"] {
            push(name, None, "no valid bracket".into());
        }
    }

    let unknowns = 2 * (mesh.nx() - 1) * (mesh.ny() - 1);
    match gs {
        _ if unknowns > ORACLE_LIMIT => push("oracle", None, format!("{unknowns} unknowns exceed the dense limit {ORACLE_LIMIT}")),
        None => push("oracle", None, "no monotone solution to compare".into()),
        Some(r) => match newton_march(problem, mesh, &NewtonConfig::default()) {
            Ok(newton) => {
                let mut worst = 0.0f64;
                let mut outside = 0;
                for (m, nm) in newton.iter().enumerate().skip(1) {
                    worst = worst.max(max_diff(&r.upper[m], nm)).max(max_diff(&r.lower[m], nm));
                    outside += outside_envelope(&r.lower[m], nm, &r.upper[m]);
                }
                let ok = worst <= 10.0 * cfg.delta && outside == 0;
                push("oracle", Some(ok), format!("max difference {worst:.3e}, {outside} points outside the envelope"));
            }
            Err(e) => push("oracle", Some(false), e.to_string()),
        },
    }

    let passed = checks.iter().all(|c| c.status != "fail");
    for c in &checks {
        println!("{:<22} {:<7} {}", c.name, c.status, c.detail);
    }
    ensure_dir(st.out)?;
    write_json(&st.out.join("verify.json"), &VerifyOutput { model: &s.name, passed, checks })?;
    Ok(if passed { Status::Passed } else { Status::Failed })
}

#[derive(Serialize)]
struct ConvergenceOutput {
    refinement: Refinement,
    expect_slope: Option<[f64; 2]>,
    #[serde(flatten)]
    study: ConvergenceStudy,
}

pub fn convergence(cfg: &ExperimentConfig, st: &Settings) -> Result<Status> {
    cfg.validate()?;
    let conv = cfg.convergence.as_ref().ok_or_else(|| ConfigError::Invalid("config has no convergence section".into()))?;
    if conv.cells.len() < 3 {
        return Err(ConfigError::Invalid(format!("convergence needs at least 3 meshes, got {}", conv.cells.len())).into());
    }
    let meshes = mesh_sequence(&conv.cells, conv.t_final, conv.tau_factor, conv.refinement)?;
    let study = convergence_order(&conv.case.case(), &meshes, &cfg.policy(st.timing))?;
    let ok = match (study.slope, conv.expect_slope) {
        (Some(s), Some([lo, hi])) => (lo..=hi).contains(&s),
        _ => true,
    };
    match study.slope {
        Some(s) => println!("slope {s:.4} errors {:?}", study.errors),
        None => println!("{}", study.status),
    }
    ensure_dir(st.out)?;
    write_json(&st.out.join("convergence.json"), &ConvergenceOutput { refinement: conv.refinement, expect_slope: conv.expect_slope, study })?;
    Ok(if ok { Status::Passed } else { Status::Failed })
}
