//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use monoblock::init_solutions::{build_bracket, default_source, upper_linear, Bracket};
use monoblock::models::{LinearCoupledParams, Model};
use monoblock::monotone::{check_tau_restriction, compare_methods, march, verify_ordered_pair, MarchResult, SweepVariant, TimeStepPolicy};
use monoblock::oracle::{convergence_order, mesh_sequence, newton_march, ManufacturedCase, NewtonConfig, Refinement};
use monoblock::reaction::QuasiMonotoneClass;
use monoblock::{Mesh, Pair, ProblemSpec};
use std::time::Instant;

const DELTA: f64 = 1e-8;
const SLACK: f64 = 1e-10;

#[derive(Default)]
struct Structure {
    levels: usize,
    failures: usize,
}

impl Structure {
    fn add(&mut self, r: &MarchResult<f64>) {
        self.levels += r.report.levels.len();
        self.failures += r.report.structure_failures;
    }
}

struct Setup {
    model: Model<f64>,
    problem: ProblemSpec,
    bracket: Bracket<f64>,
}

fn setup(model: Model<f64>, mesh: &Mesh) -> Setup {
    let problem = model.instantiate().unwrap();
    let rule = model.default_bracket(mesh).unwrap();
    let bracket = build_bracket(&problem, mesh, &rule).unwrap_or_else(|e| panic!("{}: {e}", model.name()));
    Setup { model, problem, bracket }
}

fn policy(delta: f64) -> TimeStepPolicy<f64> {
    TimeStepPolicy { timing: false, ..TimeStepPolicy::default() }.with_delta(delta)
}

fn max_diff(a: &Pair, b: &Pair) -> f64 {
    a[0].max_abs_diff(&b[0]).max(a[1].max_abs_diff(&b[1]))
}

fn outside(lo: &Pair, u: &Pair, hi: &Pair) -> usize {
    (0..2)
        .map(|a| {
            u[a].values()
                .iter()
                .zip(lo[a].values())
                .zip(hi[a].values())
                .filter(|((v, l), h)| **v < **l - SLACK || **v > **h + SLACK)
                .count()
        })
        .sum()
}

fn line(results: &mut Vec<bool>, k: usize, ok: bool, detail: String) {
    println!("criterion {k}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    results.push(ok);
}

fn main() {
    let mut results = Vec::new();
    let mut structure = Structure::default();
    let mesh = Mesh::new(1.0, 1.0, 1.0, 8, 8, 5).unwrap();
    let setups: Vec<Setup> = Model::<f64>::bundled().into_iter().map(|m| setup(m, &mesh)).collect();

    // 1 and 2: sandwich at every iteration
    let t0 = Instant::now();
    let mut viol = 0;
    let mut sign = 0;
    let mut nonincreasing = Vec::new();
    for s in &setups {
        for v in [SweepVariant::Jacobi, SweepVariant::GaussSeidel] {
            let r = march(&s.problem, &mesh, v, &policy(DELTA), &s.bracket).unwrap();
            structure.add(&r);
            viol += r.report.monotonicity_violations;
            sign += r.report.levels.iter().map(|l| l.residual_sign_violations).sum::<usize>();
            if s.problem.class == QuasiMonotoneClass::Nonincreasing {
                nonincreasing.push((s.model.name(), v, r.report.monotonicity_violations, r.report.levels.len()));
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    line(&mut results, 1, viol == 0 && sign == 0 && secs < 10.0, format!("violations={viol} residual_sign={sign} runtime={secs:.2}s (limit 10s)"));
    let ni_ok = nonincreasing.len() == 4 && nonincreasing.iter().all(|n| n.2 == 0);
    let names: Vec<String> = nonincreasing.iter().map(|n| format!("{}/{}={}", n.0, n.1.name(), n.2)).collect();
    line(&mut results, 2, ni_ok, format!("pair violations {}", names.join(" ")));

    // 3: comparison
    let mut ok3 = true;
    let mut detail = Vec::new();
    for s in &setups {
        let c = compare_methods(&s.problem, &mesh, &policy(DELTA), &s.bracket).unwrap();
        structure.add(&c.jacobi);
        structure.add(&c.gauss_seidel);
        let nj: Vec<usize> = c.rows.iter().map(|r| r.n_jacobi).collect();
        let ng: Vec<usize> = c.rows.iter().map(|r| r.n_gauss_seidel).collect();
        ok3 &= c.gs_not_slower() && c.ordering_violations() == 0;
        detail.push(format!("{} J{nj:?} GS{ng:?} ord={}", s.model.name(), c.ordering_violations()));
    }
    line(&mut results, 3, ok3, detail.join("; "));

    // 4: Newton oracle on a small mesh
    let small = Mesh::new(1.0, 1.0, 1.0, 4, 4, 2).unwrap();
    let mut worst = 0.0f64;
    let mut out = 0;
    let mut err4 = None;
    for model in Model::<f64>::bundled() {
        let s = setup(model, &small);
        let newton = match newton_march(&s.problem, &small, &NewtonConfig::default()) {
            Ok(n) => n,
            Err(e) => {
                err4 = Some(format!("{}: {e}", s.model.name()));
                continue;
            }
        };
        for v in [SweepVariant::Jacobi, SweepVariant::GaussSeidel] {
            let r = march(&s.problem, &small, v, &policy(DELTA), &s.bracket).unwrap();
            structure.add(&r);
            for (m, nm) in newton.iter().enumerate().skip(1) {
                worst = worst.max(max_diff(&r.upper[m], nm)).max(max_diff(&r.lower[m], nm));
                out += outside(&r.lower[m], nm, &r.upper[m]);
            }
        }
    }
    let ok4 = err4.is_none() && worst <= 10.0 * DELTA && out == 0;
    line(&mut results, 4, ok4, format!("max|monotone-newton|={worst:.3e} (limit {:.0e}) outside_envelope={out}{}", 10.0 * DELTA, err4.map(|e| format!(" error: {e}")).unwrap_or_default()));

    // 5: stopping-rule bound
    let gl = &setups[0];
    let reference = march(&gl.problem, &mesh, SweepVariant::GaussSeidel, &policy(1e-12), &gl.bracket).unwrap();
    let t_final = mesh.spec.t_final;
    let nt = mesh.nt();
    let mut ok5 = true;
    let mut d5 = Vec::new();
    for delta in [1e-4, 1e-6, 1e-8] {
        let r = march(&gl.problem, &mesh, SweepVariant::GaussSeidel, &policy(delta), &gl.bracket).unwrap();
        structure.add(&r);
        let d = max_diff(&r.solution(nt), &reference.solution(nt));
        ok5 &= d <= 10.0 * t_final * delta;
        d5.push(format!("delta={delta:.0e} diff={d:.3e}"));
    }
    line(&mut results, 5, ok5, d5.join(" "));

    // 6: convergence order
    let t0 = Instant::now();
    let cells = [8, 16, 32];
    let up = convergence_order(&ManufacturedCase::upwind(), &mesh_sequence(&cells, 0.5, 0.5, Refinement::Linear).unwrap(), &policy(1e-10)).unwrap();
    let ce = convergence_order(&ManufacturedCase::central(), &mesh_sequence(&cells, 0.125, 1.0, Refinement::Quadratic).unwrap(), &policy(1e-12)).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let su = up.slope.unwrap_or(f64::NAN);
    let sc = ce.slope.unwrap_or(f64::NAN);
    let ok6 = (0.8..=1.2).contains(&su) && (1.7..=2.3).contains(&sc) && secs < 60.0;
    line(&mut results, 6, ok6, format!("upwind slope={su:.3} errors=[{}] central slope={sc:.3} errors=[{}] runtime={secs:.1}s", sci(&up.errors), sci(&ce.errors)));

    // 7: construction validity
    let mut ok7 = true;
    let mut d7 = Vec::new();
    for s in &setups {
        let mut bad_levels = 0;
        for m in 1..=mesh.nt() {
            let chk = verify_ordered_pair(&s.problem, &mesh, m, &s.bracket.upper[m], &s.bracket.lower[m], &s.bracket.upper[m - 1], &s.bracket.lower[m - 1]).unwrap();
            if !chk.ok() {
                bad_levels += 1;
            }
        }
        let src = [default_source(&s.problem, &mesh, 0).unwrap(), default_source(&s.problem, &mesh, 1).unwrap()];
        let lin = upper_linear(&s.problem, &mesh, src).unwrap();
        let negative: usize = lin.iter().flat_map(|p| p.iter()).map(|f| f.values().iter().filter(|v| **v < 0.0).count()).sum();
        ok7 &= bad_levels == 0 && negative == 0;
        d7.push(format!("{} bad_levels={bad_levels} negative_linear={negative}", s.model.name()));
    }
    line(&mut results, 7, ok7, d7.join("; "));

    // 8: structural checks across every run above
    let ok8 = structure.failures == 0 && structure.levels > 0;
    line(&mut results, 8, ok8, format!("levels_audited={} failures={}", structure.levels, structure.failures));

    // 9: time step restriction
    let synth = Model::LinearCoupled(LinearCoupledParams { kappa: [0.5; 2], mu: [2.5; 2], ..Default::default() }).instantiate().unwrap();
    let beta = 2.0;
    let mut ok9 = true;
    let mut d9 = Vec::new();
    for steps in [1, 2, 3, 4, 8] {
        let m = Mesh::new(1.0, 1.0, 1.0, 4, 4, steps).unwrap();
        let st = check_tau_restriction(&synth, &m).unwrap();
        let expect = m.tau * beta >= 1.0;
        ok9 &= st.violated == expect && (st.beta_max - beta).abs() < 1e-12;
        d9.push(format!("tau*beta={:.3}:{}", st.product, st.violated));
    }
    let zero = Model::Zero(Default::default()).instantiate().unwrap();
    for steps in [1, 5] {
        let st = check_tau_restriction(&zero, &Mesh::new(1.0, 1.0, 100.0, 4, 4, steps).unwrap()).unwrap();
        ok9 &= !st.violated && st.beta_max == 0.0;
    }
    for s in &setups {
        let st = check_tau_restriction(&s.problem, &mesh).unwrap();
        ok9 &= !st.violated;
        d9.push(format!("{}:{:.3}", s.model.name(), st.product));
    }
    line(&mut results, 9, ok9, d9.join(" "));

    let failed = results.iter().filter(|r| !**r).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}
