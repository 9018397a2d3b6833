//! Block monotone Jacobi / Gauss-Seidel iterations and the time march.
//!
//! Both quasi-monotone classes run two coupled sequences per level. For the
//! nondecreasing class they are the upper pair and the lower pair; for the
//! nonincreasing class they are `(upper_1, lower_2)` and `(lower_1, upper_2)`.
//! Each sequence carries its own accepted solution from the previous level.

use crate::blocksolve::{inverse_positivity_check, TriFactor};
use crate::discretization::{assemble_level, boundary_field, field_residual, BoundaryMode, LineBlockSystem};
use crate::error::{Error, Result};
use crate::init_solutions::Bracket;
use crate::mesh::{Field, Mesh, Pair};
use crate::reaction::{c_level, ProblemSpec, QuasiMonotoneClass};
use crate::scalar::{max_abs, Real};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariant {
    Jacobi,
    GaussSeidel,
}

impl SweepVariant {
    pub fn eta(self) -> u8 {
        match self {
            SweepVariant::Jacobi => 0,
            SweepVariant::GaussSeidel => 1,
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            SweepVariant::Jacobi => "jacobi",
            SweepVariant::GaussSeidel => "gauss-seidel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TauCheck {
    Enforce,
    #[default]
    Warn,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViolationPolicy {
    #[default]
    Error,
    Record,
}

#[derive(Debug, Clone, Copy)]
pub struct TimeStepPolicy<T> {
    pub delta: T,
    pub max_iters: usize,
    pub tau_check: TauCheck,
    /// Absolute slack for ordering and residual-sign audits.
    pub slack: T,
    pub on_violation: ViolationPolicy,
    /// Check M-matrix structure and inverse positivity of every line matrix.
    pub structure_audit: bool,
    /// Start level `m` from the accepted level `m-1` solutions. Experimental:
    /// the starts need not be ordered upper/lower solutions.
    pub warm_start: bool,
    pub parallel: bool,
    pub timing: bool,
}

impl<T: Real> Default for TimeStepPolicy<T> {
    fn default() -> Self {
        TimeStepPolicy {
            delta: T::lit(1e-8),
            max_iters: 10_000,
            tau_check: TauCheck::Warn,
            slack: T::lit(1e-10),
            on_violation: ViolationPolicy::Error,
            structure_audit: true,
            warm_start: false,
            parallel: true,
            timing: true,
        }
    }
}

impl<T: Real> TimeStepPolicy<T> {
    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > T::zero() && self.delta.is_finite()) {
            return Err(Error::InvalidParameter("delta must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauStatus {
    pub beta_max: f64,
    pub tau: f64,
    pub product: f64,
    pub violated: bool,
}

/// `β_m = max(0, q_m - c̲_m)`; the restriction is `τ max β_m < 1` unless every `β_m` is zero.
pub fn check_tau_restriction<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>) -> Result<TauStatus> {
    let mut beta_max = T::zero();
    for m in 1..=mesh.nt() {
        let t = mesh.t(m);
        let mut c_min = T::infinity();
        let mut q_max = T::zero();
        for comp in &problem.components {
            for i in 0..=mesh.nx() {
                for j in 0..=mesh.ny() {
                    let (x, y) = (mesh.x(i), mesh.y(j));
                    let cl = (comp.c_lower)(x, y, t);
                    let q = (comp.q_bound)(x, y, t);
                    if !(cl.is_finite() && q.is_finite()) {
                        return Err(Error::NonFinite("c_lower or q_bound".into()));
                    }
                    c_min = c_min.min(cl);
                    q_max = q_max.max(q.abs());
                }
            }
        }
        beta_max = beta_max.max((q_max - c_min).max(T::zero()));
    }
    let product = mesh.tau * beta_max;
    Ok(TauStatus {
        beta_max: beta_max.as_f64(),
        tau: mesh.tau.as_f64(),
        product: product.as_f64(),
        violated: beta_max > T::zero() && product >= T::one(),
    })
}

/// Whether sequence `s` supplies the upper iterate of component `a`.
fn is_upper(class: QuasiMonotoneClass, s: usize, a: usize) -> bool {
    match class {
        QuasiMonotoneClass::Nondecreasing => s == 0,
        QuasiMonotoneClass::Nonincreasing => (s == 0) == (a == 0),
    }
}

/// Split (upper, lower) into the two coupled sequences of `class`.
pub fn to_sequences<T: Real>(class: QuasiMonotoneClass, upper: &Pair<T>, lower: &Pair<T>) -> [Pair<T>; 2] {
    let pick = |s: usize, a: usize| if is_upper(class, s, a) { upper[a].clone() } else { lower[a].clone() };
    [[pick(0, 0), pick(0, 1)], [pick(1, 0), pick(1, 1)]]
}

/// Inverse of [`to_sequences`].
pub fn from_sequences<T: Real>(class: QuasiMonotoneClass, seqs: &[Pair<T>; 2]) -> (Pair<T>, Pair<T>) {
    let up = |a: usize| if is_upper(class, 0, a) { seqs[0][a].clone() } else { seqs[1][a].clone() };
    let lo = |a: usize| if is_upper(class, 0, a) { seqs[1][a].clone() } else { seqs[0][a].clone() };
    ([up(0), up(1)], [lo(0), lo(1)])
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OrderedPairCheck {
    pub ordering_violations: usize,
    pub upper_residual_violations: usize,
    pub lower_residual_violations: usize,
    pub boundary_violations: usize,
    pub initial_violations: usize,
    pub min_upper_residual: f64,
    pub max_lower_residual: f64,
}

impl OrderedPairCheck {
    pub fn ok(&self) -> bool {
        self.ordering_violations == 0
            && self.upper_residual_violations == 0
            && self.lower_residual_violations == 0
            && self.boundary_violations == 0
            && self.initial_violations == 0
    }
    pub fn summary(&self) -> String {
        format!(
            "ordering {}, upper residual {} (min {:.3e}), lower residual {} (max {:.3e}), boundary {}, initial {}",
            self.ordering_violations,
            self.upper_residual_violations,
            self.min_upper_residual,
            self.lower_residual_violations,
            self.max_lower_residual,
            self.boundary_violations,
            self.initial_violations
        )
    }
}

/// Check that `(upper, lower)` at level `m` are ordered upper and lower
/// solutions, each with respect to its own level `m-1` field.
#[allow(clippy::too_many_arguments)]
pub fn verify_ordered_pair<T: Real>(
    problem: &ProblemSpec<T>,
    mesh: &Mesh<T>,
    m: usize,
    upper: &Pair<T>,
    lower: &Pair<T>,
    prev_upper: &Pair<T>,
    prev_lower: &Pair<T>,
) -> Result<OrderedPairCheck> {
    for f in upper.iter().chain(lower).chain(prev_upper).chain(prev_lower) {
        if !f.matches(mesh) {
            return Err(Error::DimensionMismatch { expected: mesh.nx(), got: f.nx() });
        }
    }
    // rounding allowance; only matters below double precision
    let slack = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
    let systems = assemble_level(problem, mesh, m)?;
    let mut out = OrderedPairCheck { min_upper_residual: f64::INFINITY, max_lower_residual: f64::NEG_INFINITY, ..Default::default() };
    let t = mesh.t(m);
    for a in 0..2 {
        let (up_other, lo_other) = match problem.class {
            QuasiMonotoneClass::Nondecreasing => (&upper[1 - a], &lower[1 - a]),
            QuasiMonotoneClass::Nonincreasing => (&lower[1 - a], &upper[1 - a]),
        };
        let ru = field_residual(problem, &systems[a], &upper[a], up_other, &prev_upper[a], BoundaryMode::Field);
        let rl = field_residual(problem, &systems[a], &lower[a], lo_other, &prev_lower[a], BoundaryMode::Field);
        for &v in &ru {
            out.min_upper_residual = out.min_upper_residual.min(v.as_f64());
            if !(v >= -slack) {
                out.upper_residual_violations += 1;
            }
        }
        for &v in &rl {
            out.max_lower_residual = out.max_lower_residual.max(v.as_f64());
            if !(v <= slack) {
                out.lower_residual_violations += 1;
            }
        }
        for i in 0..=mesh.nx() {
            for j in 0..=mesh.ny() {
                let (u, l) = (upper[a].get(i, j), lower[a].get(i, j));
                if !(l <= u + slack) {
                    out.ordering_violations += 1;
                }
                if i == 0 || j == 0 || i == mesh.nx() || j == mesh.ny() {
                    let g = problem.g(a, mesh.x(i), mesh.y(j), t);
                    if !(l <= g + slack && g <= u + slack) {
                        out.boundary_violations += 1;
                    }
                }
                if m == 1 {
                    let p = problem.psi(a, mesh.x(i), mesh.y(j));
                    if !(prev_lower[a].get(i, j) <= p + slack && p <= prev_upper[a].get(i, j) + slack) {
                        out.initial_violations += 1;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Line systems and factored `A + c I` blocks of one level.
pub struct LevelOps<T> {
    pub m: usize,
    pub c: [T; 2],
    pub systems: [Vec<LineBlockSystem<T>>; 2],
    factors: [Vec<TriFactor<T>>; 2],
    boundary: [Field<T>; 2],
    pub structure_failures: usize,
}

impl<T: Real> LevelOps<T> {
    pub fn build(problem: &ProblemSpec<T>, mesh: &Mesh<T>, m: usize, audit: bool) -> Result<Self> {
        let c = c_level(problem, mesh, m)?;
        let systems = assemble_level(problem, mesh, m)?;
        let mut structure_failures = 0;
        let mut factors: [Vec<TriFactor<T>>; 2] = Default::default();
        for a in 0..2 {
            for s in &systems[a] {
                let mat = s.matrix(c[a]);
                if audit && !(s.is_m_matrix() && inverse_positivity_check(&mat, 3)) {
                    structure_failures += 1;
                }
                factors[a].push(mat.factor()?);
            }
        }
        Ok(LevelOps {
            m,
            c,
            systems,
            factors,
            boundary: [boundary_field(problem, mesh, 0, m), boundary_field(problem, mesh, 1, m)],
            structure_failures,
        })
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LevelReport {
    pub m: usize,
    pub t: f64,
    pub iterations: usize,
    /// Final residual of each coupled sequence.
    pub residuals: [f64; 2],
    pub residual: f64,
    pub envelope_width: f64,
    pub monotonicity_violations: usize,
    pub residual_sign_violations: usize,
    pub structure_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub model: String,
    pub class: QuasiMonotoneClass,
    pub method: SweepVariant,
    pub delta: f64,
    pub tau: TauStatus,
    pub warm_start: bool,
    pub levels: Vec<LevelReport>,
    pub total_iterations: usize,
    pub monotonicity_violations: usize,
    pub structure_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// Iteration state of one level: both coupled sequences and their residuals.
pub struct LevelRun<'a, T> {
    problem: &'a ProblemSpec<T>,
    ops: &'a LevelOps<T>,
    variant: SweepVariant,
    policy: &'a TimeStepPolicy<T>,
    seqs: [Pair<T>; 2],
    prevs: [Pair<T>; 2],
    res: [[Vec<T>; 2]; 2],
    pub n: usize,
    pub monotonicity_violations: usize,
    pub residual_sign_violations: usize,
}

impl<'a, T: Real> LevelRun<'a, T> {
    pub fn new(
        problem: &'a ProblemSpec<T>,
        ops: &'a LevelOps<T>,
        variant: SweepVariant,
        policy: &'a TimeStepPolicy<T>,
        starts: [Pair<T>; 2],
        prevs: [Pair<T>; 2],
    ) -> Self {
        let mut run = LevelRun {
            problem,
            ops,
            variant,
            policy,
            seqs: starts,
            prevs,
            res: Default::default(),
            n: 0,
            monotonicity_violations: 0,
            residual_sign_violations: 0,
        };
        for s in 0..2 {
            run.res[s] = run.residuals(&run.seqs[s], s);
        }
        run
    }

    fn residuals(&self, seq: &Pair<T>, s: usize) -> [Vec<T>; 2] {
        let r = |a: usize| field_residual(self.problem, &self.ops.systems[a], &seq[a], &seq[1 - a], &self.prevs[s][a], BoundaryMode::Data);
        [r(0), r(1)]
    }

    pub fn residual_norms(&self) -> [T; 2] {
        [0, 1].map(|s| max_abs(&self.res[s][0]).max(max_abs(&self.res[s][1])))
    }

    pub fn converged(&self) -> bool {
        self.n >= 1 && self.residual_norms().iter().all(|&r| r <= self.policy.delta)
    }

    pub fn sequences(&self) -> &[Pair<T>; 2] {
        &self.seqs
    }

    pub fn bounds(&self) -> (Pair<T>, Pair<T>) {
        from_sequences(self.problem.class, &self.seqs)
    }

    /// Increments for every line of component `a` of sequence `s`.
    fn increments(&self, s: usize, a: usize) -> Vec<Vec<T>> {
        let n = self.ops.systems[a].first().map_or(0, |sys| sys.len());
        let res = &self.res[s][a];
        let factors = &self.ops.factors[a];
        let solve_line = |k: usize, extra: Option<&[T]>| {
            let mut z: Vec<T> = res[k * n..(k + 1) * n].iter().map(|&r| -r).collect();
            if let Some(zl) = extra {
                let left = &self.ops.systems[a][k].left;
                for j in 0..n {
                    z[j] += left[j] * zl[j];
                }
            }
            factors[k].solve_in_place(&mut z);
            z
        };
        let lines = factors.len();
        match self.variant {
            SweepVariant::Jacobi if self.policy.parallel && lines * n >= 4096 => {
                (0..lines).into_par_iter().map(|k| solve_line(k, None)).collect()
            }
            SweepVariant::Jacobi => (0..lines).map(|k| solve_line(k, None)).collect(),
            SweepVariant::GaussSeidel => {
                let mut out: Vec<Vec<T>> = Vec::with_capacity(lines);
                for k in 0..lines {
                    let z = solve_line(k, out.last().map(|v| v.as_slice()));
                    out.push(z);
                }
                out
            }
        }
    }

    fn advance(&self, s: usize) -> Result<Pair<T>> {
        let mut next = self.seqs[s].clone();
        for (a, field) in next.iter_mut().enumerate() {
            for (k, z) in self.increments(s, a).into_iter().enumerate() {
                for (u, dz) in field.interior_line_mut(k + 1).iter_mut().zip(z) {
                    *u += dz;
                }
            }
            if self.n == 0 {
                field.copy_boundary(&self.ops.boundary[a]);
            }
            if !field.is_finite() {
                return Err(Error::NonFinite(format!("iterate of component {} at level {}", a + 1, self.ops.m)));
            }
        }
        Ok(next)
    }

    /// One sweep of both sequences followed by the sandwich and sign audits.
    pub fn iterate(&mut self) -> Result<()> {
        let next = if self.policy.parallel && self.ops.systems[0].len() * self.ops.systems[0][0].len() >= 4096 {
            let (a, b) = rayon::join(|| self.advance(0), || self.advance(1));
            [a?, b?]
        } else {
            [self.advance(0)?, self.advance(1)?]
        };
        let res = [self.residuals(&next[0], 0), self.residuals(&next[1], 1)];
        let class = self.problem.class;
        let slack = self.policy.slack;
        let (old_up, old_lo) = from_sequences(class, &self.seqs);
        let (new_up, new_lo) = from_sequences(class, &next);
        let mut bad = 0;
        for a in 0..2 {
            let it = old_up[a].values().iter().zip(new_up[a].values()).zip(old_lo[a].values().iter().zip(new_lo[a].values()));
            for ((&ou, &nu), (&ol, &nl)) in it {
                if !(nl >= ol - slack && nu <= ou + slack && nl <= nu + slack) {
                    bad += 1;
                }
            }
        }
        let mut sign_bad = 0;
        for (s, rs) in res.iter().enumerate() {
            for (a, r) in rs.iter().enumerate() {
                let upper = is_upper(class, s, a);
                sign_bad += r.iter().filter(|&&v| if upper { !(v >= -slack) } else { !(v <= slack) }).count();
            }
        }
        self.n += 1;
        self.seqs = next;
        self.res = res;
        self.monotonicity_violations += bad;
        self.residual_sign_violations += sign_bad;
        if bad > 0 && self.policy.on_violation == ViolationPolicy::Error {
            return Err(Error::SandwichViolation { level: self.ops.m, iteration: self.n, count: bad });
        }
        Ok(())
    }

    /// Iterate until both sequences pass the stopping test.
    pub fn run(&mut self) -> Result<()> {
        while !self.converged() {
            if self.n >= self.policy.max_iters {
                let r = self.residual_norms();
                return Err(Error::NotConverged { level: self.ops.m, iterations: self.n, residual: r[0].max(r[1]).as_f64() });
            }
            self.iterate()?;
        }
        Ok(())
    }

    pub fn report(&self, mesh: &Mesh<T>, elapsed: Option<f64>) -> LevelReport {
        let r = self.residual_norms();
        let (up, lo) = self.bounds();
        let width = (0..2)
            .map(|a| up[a].zip_map(&lo[a], |u, l| u - l).max_value())
            .fold(T::zero(), T::max);
        LevelReport {
            m: self.ops.m,
            t: mesh.t(self.ops.m).as_f64(),
            iterations: self.n,
            residuals: [r[0].as_f64(), r[1].as_f64()],
            residual: r[0].max(r[1]).as_f64(),
            envelope_width: width.as_f64(),
            monotonicity_violations: self.monotonicity_violations,
            residual_sign_violations: self.residual_sign_violations,
            structure_failures: self.ops.structure_failures,
            wall_time_ms: elapsed,
        }
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn require_class<T: Real>(problem: &ProblemSpec<T>, class: QuasiMonotoneClass) -> Result<()> {
    if problem.class != class {
        return Err(Error::InvalidParameter(format!("problem is {:?}, expected {:?}", problem.class, class)));
    }
    Ok(())
}

/// One level of the nondecreasing iteration. Returns `(upper, lower, report)`.
#[allow(clippy::too_many_arguments)]
pub fn step_nondecreasing<T: Real>(
    problem: &ProblemSpec<T>,
    mesh: &Mesh<T>,
    variant: SweepVariant,
    policy: &TimeStepPolicy<T>,
    upper0: Pair<T>,
    lower0: Pair<T>,
    prev_upper: Pair<T>,
    prev_lower: Pair<T>,
    m: usize,
) -> Result<(Pair<T>, Pair<T>, LevelReport)> {
    require_class(problem, QuasiMonotoneClass::Nondecreasing)?;
    let ([up, lo], rep) = step(problem, mesh, variant, policy, [upper0, lower0], [prev_upper, prev_lower], m)?;
    Ok((up, lo, rep))
}

/// One level of the nonincreasing iteration. Returns the limits of the pairs
/// `(upper_1, lower_2)` and `(lower_1, upper_2)`.
#[allow(clippy::too_many_arguments)]
pub fn step_nonincreasing<T: Real>(
    problem: &ProblemSpec<T>,
    mesh: &Mesh<T>,
    variant: SweepVariant,
    policy: &TimeStepPolicy<T>,
    upper0: Pair<T>,
    lower0: Pair<T>,
    prev_pair_a: Pair<T>,
    prev_pair_b: Pair<T>,
    m: usize,
) -> Result<(Pair<T>, Pair<T>, LevelReport)> {
    require_class(problem, QuasiMonotoneClass::Nonincreasing)?;
    let starts = to_sequences(problem.class, &upper0, &lower0);
    let ([a, b], rep) = step(problem, mesh, variant, policy, starts, [prev_pair_a, prev_pair_b], m)?;
    Ok((a, b, rep))
}

fn step<T: Real>(
    problem: &ProblemSpec<T>,
    mesh: &Mesh<T>,
    variant: SweepVariant,
    policy: &TimeStepPolicy<T>,
    starts: [Pair<T>; 2],
    prevs: [Pair<T>; 2],
    m: usize,
) -> Result<([Pair<T>; 2], LevelReport)> {
    policy.validate()?;
    if m == 0 || m > mesh.nt() {
        return Err(Error::InvalidParameter(format!("time level {m} outside 1..={}", mesh.nt())));
    }
    let t0 = Instant::now();
    let ops = LevelOps::build(problem, mesh, m, policy.structure_audit)?;
    let mut run = LevelRun::new(problem, &ops, variant, policy, starts, prevs);
    run.run()?;
    let rep = run.report(mesh, policy.timing.then(|| ms(t0)));
    Ok((run.seqs, rep))
}

/// Accepted upper and lower trajectories, `m = 0..=Nt`, with the run report.
#[derive(Debug, Clone)]
pub struct MarchResult<T> {
    pub upper: Vec<Pair<T>>,
    pub lower: Vec<Pair<T>>,
    pub report: SolveReport,
}

impl<T: Real> MarchResult<T> {
    /// Midpoint of the final envelope at level `m`.
    pub fn solution(&self, m: usize) -> Pair<T> {
        let half = T::lit(0.5);
        [0, 1].map(|a| self.upper[m][a].zip_map(&self.lower[m][a], |u, l| half * (u + l)))
    }

    pub fn sequences(&self, class: QuasiMonotoneClass, m: usize) -> [Pair<T>; 2] {
        to_sequences(class, &self.upper[m], &self.lower[m])
    }
}

fn tau_gate<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, policy: &TimeStepPolicy<T>) -> Result<TauStatus> {
    let tau = check_tau_restriction(problem, mesh)?;
    if tau.violated {
        match policy.tau_check {
            TauCheck::Enforce => return Err(Error::TauRestriction { product: tau.product }),
            TauCheck::Warn => log::warn!("time step restriction violated: tau*beta = {:.4e}", tau.product),
            TauCheck::Off => {}
        }
    }
    Ok(tau)
}

/// March over all levels starting each level from the bracket.
pub fn march<T: Real>(
    problem: &ProblemSpec<T>,
    mesh: &Mesh<T>,
    variant: SweepVariant,
    policy: &TimeStepPolicy<T>,
    bracket: &Bracket<T>,
) -> Result<MarchResult<T>> {
    policy.validate()?;
    problem.validate()?;
    if bracket.upper.len() != mesh.nt() + 1 || bracket.lower.len() != mesh.nt() + 1 {
        return Err(Error::DimensionMismatch { expected: mesh.nt() + 1, got: bracket.upper.len() });
    }
    let tau = tau_gate(problem, mesh, policy)?;
    let t0 = Instant::now();
    let class = problem.class;
    let mut upper = vec![bracket.upper[0].clone()];
    let mut lower = vec![bracket.lower[0].clone()];
    let mut levels = Vec::with_capacity(mesh.nt());
    let mut prevs = to_sequences(class, &bracket.upper[0], &bracket.lower[0]);
    for m in 1..=mesh.nt() {
        let starts = if policy.warm_start && m > 1 {
            prevs.clone()
        } else {
            to_sequences(class, &bracket.upper[m], &bracket.lower[m])
        };
        let (seqs, rep) = step(problem, mesh, variant, policy, starts, prevs, m)?;
        let (up, lo) = from_sequences(class, &seqs);
        upper.push(up);
        lower.push(lo);
        levels.push(rep);
        prevs = seqs;
    }
    let report = SolveReport {
        model: problem.name.clone(),
        class,
        method: variant,
        delta: policy.delta.as_f64(),
        tau,
        warm_start: policy.warm_start,
        total_iterations: levels.iter().map(|l| l.iterations).sum(),
        monotonicity_violations: levels.iter().map(|l| l.monotonicity_violations).sum(),
        structure_failures: levels.iter().map(|l| l.structure_failures).sum(),
        levels,
        wall_time_ms: policy.timing.then(|| ms(t0)),
    };
    Ok(MarchResult { upper, lower, report })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub m: usize,
    /// Iterations from identical starts and identical previous-level data.
    pub n_jacobi: usize,
    pub n_gauss_seidel: usize,
    pub ordering_violations: usize,
    /// Iterations of the two independent marches.
    pub march_n_jacobi: usize,
    pub march_n_gauss_seidel: usize,
}

#[derive(Debug, Clone)]
pub struct Comparison<T> {
    pub rows: Vec<ComparisonRow>,
    pub jacobi: MarchResult<T>,
    pub gauss_seidel: MarchResult<T>,
}

impl<T> Comparison<T> {
    pub fn gs_not_slower(&self) -> bool {
        self.rows.iter().all(|r| r.n_gauss_seidel <= r.n_jacobi)
    }
    pub fn ordering_violations(&self) -> usize {
        self.rows.iter().map(|r| r.ordering_violations).sum()
    }
}

/// Run Jacobi and Gauss-Seidel side by side.
///
/// Each level is iterated in lockstep from the bracket starts and from the
/// Gauss-Seidel march's previous-level solutions, auditing
/// `lower_J <= lower_GS <= upper_GS <= upper_J` after every iteration.
pub fn compare_methods<T: Real>(
    problem: &ProblemSpec<T>,
    mesh: &Mesh<T>,
    policy: &TimeStepPolicy<T>,
    bracket: &Bracket<T>,
) -> Result<Comparison<T>> {
    let jacobi = march(problem, mesh, SweepVariant::Jacobi, policy, bracket)?;
    let gauss_seidel = march(problem, mesh, SweepVariant::GaussSeidel, policy, bracket)?;
    let class = problem.class;
    let slack = policy.slack;
    let mut rows = Vec::with_capacity(mesh.nt());
    for m in 1..=mesh.nt() {
        let ops = LevelOps::build(problem, mesh, m, false)?;
        let starts = to_sequences(class, &bracket.upper[m], &bracket.lower[m]);
        let prevs = gauss_seidel.sequences(class, m - 1);
        let mut j = LevelRun::new(problem, &ops, SweepVariant::Jacobi, policy, starts.clone(), prevs.clone());
        let mut g = LevelRun::new(problem, &ops, SweepVariant::GaussSeidel, policy, starts, prevs);
        let (mut nj, mut ng) = (None, None);
        let mut violations = 0;
        while nj.is_none() || ng.is_none() {
            if j.n >= policy.max_iters {
                return Err(Error::NotConverged { level: m, iterations: j.n, residual: f64::NAN });
            }
            j.iterate()?;
            g.iterate()?;
            if nj.is_none() && j.converged() {
                nj = Some(j.n);
            }
            if ng.is_none() && g.converged() {
                ng = Some(g.n);
            }
            let (uj, lj) = j.bounds();
            let (ug, lg) = g.bounds();
            for a in 0..2 {
                let vals = lj[a].values().iter().zip(lg[a].values()).zip(ug[a].values().iter().zip(uj[a].values()));
                for ((&lj, &lg), (&ug, &uj)) in vals {
                    if !(lj <= lg + slack && lg <= ug + slack && ug <= uj + slack) {
                        violations += 1;
                    }
                }
            }
        }
        rows.push(ComparisonRow {
            m,
            n_jacobi: nj.unwrap(),
            n_gauss_seidel: ng.unwrap(),
            ordering_violations: violations,
            march_n_jacobi: jacobi.report.levels[m - 1].iterations,
            march_n_gauss_seidel: gauss_seidel.report.levels[m - 1].iterations,
        });
    }
    Ok(Comparison { rows, jacobi, gauss_seidel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::{constant_st, Component, ReactionFn};
    use std::sync::Arc;

    fn synthetic(q: f64, c_low: f64) -> ProblemSpec<f64> {
        let z: ReactionFn<f64> = Arc::new(|_, _, _, _, _| 0.0);
        let c = Component::new(1.0, z.clone(), z.clone(), z).with_bounds(constant_st(c_low.max(0.0)), constant_st(c_low), constant_st(q));
        ProblemSpec::new("synthetic", QuasiMonotoneClass::Nondecreasing, c.clone(), c)
    }

    #[test]
    fn tau_restriction_threshold() {
        let ok = Mesh::<f64>::new(1.0, 1.0, 0.8, 4, 4, 2).unwrap(); // tau = 0.4
        let bad = Mesh::<f64>::new(1.0, 1.0, 1.2, 4, 4, 2).unwrap(); // tau = 0.6
        let p = synthetic(3.0, 1.0);
        let s = check_tau_restriction(&p, &ok).unwrap();
        assert_eq!(s.beta_max, 2.0);
        assert!(!s.violated);
        assert!(check_tau_restriction(&p, &bad).unwrap().violated);
        let free = synthetic(0.0, 0.0);
        let huge = Mesh::<f64>::new(1.0, 1.0, 1e6, 4, 4, 1).unwrap();
        assert!(!check_tau_restriction(&free, &huge).unwrap().violated);
    }

    #[test]
    fn zero_problem_converges_in_one_iteration() {
        let mesh = Mesh::<f64>::new(1.0, 1.0, 1.0, 4, 4, 2).unwrap();
        let p = synthetic(0.0, 0.0);
        let z = [Field::for_mesh(&mesh), Field::for_mesh(&mesh)];
        for v in [SweepVariant::Jacobi, SweepVariant::GaussSeidel] {
            let (u, l, rep) = step_nondecreasing(&p, &mesh, v, &TimeStepPolicy::default(), z.clone(), z.clone(), z.clone(), z.clone(), 1).unwrap();
            assert_eq!(rep.iterations, 1);
            assert_eq!(u, z);
            assert_eq!(l, z);
        }
    }

    #[test]
    fn wrong_class_is_rejected() {
        let mesh = Mesh::<f64>::new(1.0, 1.0, 1.0, 4, 4, 2).unwrap();
        let p = synthetic(0.0, 0.0);
        let z = [Field::for_mesh(&mesh), Field::for_mesh(&mesh)];
        let r = step_nonincreasing(&p, &mesh, SweepVariant::Jacobi, &TimeStepPolicy::default(), z.clone(), z.clone(), z.clone(), z, 1);
        assert!(r.is_err());
    }

    #[test]
    fn sequence_split_round_trips() {
        let mesh = Mesh::<f64>::new(1.0, 1.0, 1.0, 2, 2, 1).unwrap();
        let f = |v: f64| Field::constant(mesh.nx(), mesh.ny(), v);
        let up = [f(4.0), f(3.0)];
        let lo = [f(1.0), f(2.0)];
        let s = to_sequences(QuasiMonotoneClass::Nonincreasing, &up, &lo);
        assert_eq!(s[0][0].get(0, 0), 4.0);
        assert_eq!(s[0][1].get(0, 0), 2.0);
        assert_eq!(s[1][0].get(0, 0), 1.0);
        assert_eq!(s[1][1].get(0, 0), 3.0);
        let (u, l) = from_sequences(QuasiMonotoneClass::Nonincreasing, &s);
        assert_eq!((u, l), (up, lo));
    }
}
