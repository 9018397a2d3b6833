//! Reference solvers used to check the monotone iterations: a dense Newton
//! solve of the full discrete system, a dense linear solve, and a
//! manufactured-solution convergence study.

use crate::discretization::stencil;
use crate::error::{Error, Result};
use crate::init_solutions::Bracket;
use crate::mesh::{Field, Mesh, Pair};
use crate::monotone::{march, SweepVariant, TimeStepPolicy};
use crate::reaction::{constant_st, Component, ProblemSpec, QuasiMonotoneClass, ReactionFn};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy)]
pub struct NewtonConfig<T> {
    pub tol: T,
    pub max_newton: usize,
    pub damping: T,
}

impl<T: Real> Default for NewtonConfig<T> {
    fn default() -> Self {
        NewtonConfig { tol: T::lit(1e-12), max_newton: 50, damping: T::one() }
    }
}

/// Gaussian elimination with partial pivoting on a row-major `n x n` matrix.
pub fn dense_solve<T: Real>(matrix: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let n = rhs.len();
    if matrix.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: matrix.len() });
    }
    let w = n + 1;
    let mut aug = vec![T::zero(); n * w];
    for r in 0..n {
        aug[r * w..r * w + n].copy_from_slice(&matrix[r * n..(r + 1) * n]);
        aug[r * w + n] = rhs[r];
    }
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if aug[r * w + col].abs() > aug[piv * w + col].abs() {
                piv = r;
            }
        }
        if !(aug[piv * w + col].abs() > T::zero()) {
            return Err(Error::Singular(col));
        }
        if piv != col {
            for c in 0..w {
                aug.swap(col * w + c, piv * w + c);
            }
        }
        let p = aug[col * w + col];
        for r in col + 1..n {
            let f = aug[r * w + col] / p;
            if f == T::zero() {
                continue;
            }
            for c in col..w {
                let v = aug[col * w + c];
                aug[r * w + c] -= f * v;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = aug[r * w + n];
        for c in r + 1..n {
            s -= aug[r * w + c] * x[c];
        }
        x[r] = s / aug[r * w + r];
    }
    Ok(x)
}

struct Unknowns {
    nx: usize,
    ny: usize,
}

impl Unknowns {
    fn per(&self) -> usize {
        (self.nx - 1) * (self.ny - 1)
    }
    fn idx(&self, a: usize, i: usize, j: usize) -> usize {
        a * self.per() + (i - 1) * (self.ny - 1) + (j - 1)
    }
}

/// Residual of the scheme at every unknown, evaluated point by point.
fn point_residual<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, m: usize, u: &Pair<T>, prev: &Pair<T>, jac: Option<&mut Vec<T>>) -> Result<Vec<T>> {
    let k = Unknowns { nx: mesh.nx(), ny: mesh.ny() };
    let n = 2 * k.per();
    let t = mesh.t(m);
    let inv_tau = T::one() / mesh.tau;
    let mut res = vec![T::zero(); n];
    let mut jac = jac;
    if let Some(j) = jac.as_deref_mut() {
        j.clear();
        j.resize(n * n, T::zero());
    }
    for a in 0..2 {
        for i in 1..mesh.nx() {
            for j in 1..mesh.ny() {
                let s = stencil(problem, mesh, a, i, j, m)?;
                let (x, y) = (mesh.x(i), mesh.y(j));
                let val = [u[0].get(i, j), u[1].get(i, j)];
                let row = k.idx(a, i, j);
                let mut r = s.d * val[a] - inv_tau * prev[a].get(i, j) + problem.f(a, x, y, t, val);
                let nbrs = [(i - 1, j, s.l), (i + 1, j, s.r), (i, j - 1, s.b), (i, j + 1, s.t)];
                for &(ni, nj, c) in &nbrs {
                    r -= c * u[a].get(ni, nj);
                }
                res[row] = r;
                if let Some(jm) = jac.as_deref_mut() {
                    jm[row * n + row] = s.d + problem.df_own(a, x, y, t, val);
                    jm[row * n + k.idx(1 - a, i, j)] += problem.df_cross(a, x, y, t, val);
                    for &(ni, nj, c) in &nbrs {
                        if ni > 0 && ni < mesh.nx() && nj > 0 && nj < mesh.ny() {
                            jm[row * n + k.idx(a, ni, nj)] -= c;
                        }
                    }
                }
            }
        }
    }
    if res.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("newton residual".into()));
    }
    Ok(res)
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Solve the nonlinear scheme at level `m` exactly (to `cfg.tol`) by Newton's method.
pub fn newton_solve_level<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, prev: &Pair<T>, m: usize, cfg: &NewtonConfig<T>) -> Result<Pair<T>> {
    if m == 0 || m > mesh.nt() {
        return Err(Error::InvalidParameter(format!("time level {m} outside 1..={}", mesh.nt())));
    }
    let k = Unknowns { nx: mesh.nx(), ny: mesh.ny() };
    let t = mesh.t(m);
    let mut u = prev.clone();
    for (a, f) in u.iter_mut().enumerate() {
        for i in 0..=mesh.nx() {
            for j in 0..=mesh.ny() {
                if i == 0 || j == 0 || i == mesh.nx() || j == mesh.ny() {
                    f.set(i, j, problem.g(a, mesh.x(i), mesh.y(j), t));
                }
            }
        }
    }
    let mut jac = Vec::new();
    let mut res = point_residual(problem, mesh, m, &u, prev, Some(&mut jac))?;
    let mut rn = norm(&res);
    let mut it = 0;
    while rn > cfg.tol {
        if it >= cfg.max_newton {
            return Err(Error::Newton(format!("level {m}: residual {:.3e} after {it} steps", rn.as_f64())));
        }
        it += 1;
        let neg: Vec<T> = res.iter().map(|&r| -r).collect();
        let dx = dense_solve(&jac, &neg)?;
        let apply = |u: &Pair<T>, w: T| {
            let mut out = u.clone();
            for (a, f) in out.iter_mut().enumerate() {
                for i in 1..mesh.nx() {
                    for j in 1..mesh.ny() {
                        f.set(i, j, f.get(i, j) + w * dx[k.idx(a, i, j)]);
                    }
                }
            }
            out
        };
        let mut trial = apply(&u, cfg.damping);
        let mut tres = point_residual(problem, mesh, m, &trial, prev, None)?;
        if norm(&tres) > rn {
            trial = apply(&u, T::lit(0.5) * cfg.damping);
            tres = point_residual(problem, mesh, m, &trial, prev, None)?;
        }
        u = trial;
        res = point_residual(problem, mesh, m, &u, prev, Some(&mut jac))?;
        let _ = tres;
        rn = norm(&res);
        if !rn.is_finite() {
            return Err(Error::Newton(format!("level {m}: residual diverged")));
        }
    }
    if let Some(sector) = &problem.sector {
        let slack = T::lit(1e-10);
        for (a, f) in u.iter().enumerate() {
            for i in 0..=mesh.nx() {
                for j in 0..=mesh.ny() {
                    let (lo, hi) = sector(mesh.x(i), mesh.y(j), t);
                    let v = f.get(i, j);
                    if v < lo[a] - slack || v > hi[a] + slack {
                        return Err(Error::Newton(format!("level {m}: component {} left the sector at ({i}, {j}): {v:e}", a + 1)));
                    }
                }
            }
        }
    }
    Ok(u)
}

/// Newton trajectory from the initial data, `m = 0..=Nt`.
pub fn newton_march<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, cfg: &NewtonConfig<T>) -> Result<Vec<Pair<T>>> {
    let psi = |a: usize| Field::from_fn(mesh, |x, y| problem.psi(a, x, y));
    let mut out = vec![[psi(0), psi(1)]];
    for m in 1..=mesh.nt() {
        let next = newton_solve_level(problem, mesh, &out[m - 1], m, cfg)?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactKind {
    /// `A_a e^{-t} sin(pi x / l1) sin(pi y / l2)`
    SineDecay,
    /// `A_a`
    Constant,
}

/// Reaction `f_a = kappa u_a - mu u_b + gamma sin(u_a)` with a source that makes
/// a known function an exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedCase<T> {
    pub l: [T; 2],
    pub eps: [T; 2],
    pub velocity: [[T; 2]; 2],
    pub kappa: T,
    pub mu: T,
    pub gamma: T,
    pub amplitude: [T; 2],
    pub exact: ExactKind,
}

impl<T: Real> ManufacturedCase<T> {
    pub fn upwind() -> Self {
        let l = T::lit;
        ManufacturedCase {
            l: [T::one(); 2],
            eps: [l(0.05); 2],
            velocity: [[T::one(), l(0.5)], [l(-0.5), T::one()]],
            kappa: l(2.0),
            mu: l(0.5),
            gamma: l(0.5),
            amplitude: [T::one(), l(0.5)],
            exact: ExactKind::SineDecay,
        }
    }

    pub fn central() -> Self {
        ManufacturedCase { eps: [T::lit(0.1); 2], velocity: [[T::zero(); 2]; 2], ..Self::upwind() }
    }

    pub fn constant() -> Self {
        ManufacturedCase { exact: ExactKind::Constant, amplitude: [T::lit(0.7), T::lit(0.3)], ..Self::upwind() }
    }

    pub fn exact(&self, a: usize, x: T, y: T, t: T) -> T {
        match self.exact {
            ExactKind::Constant => self.amplitude[a],
            ExactKind::SineDecay => {
                let pi = T::lit(PI);
                self.amplitude[a] * (-t).exp() * (pi * x / self.l[0]).sin() * (pi * y / self.l[1]).sin()
            }
        }
    }

    fn base_f(&self, a: usize, u: [T; 2]) -> T {
        self.kappa * u[a] - self.mu * u[1 - a] + self.gamma * u[a].sin()
    }

    /// `u_t - L u + f(u)` evaluated at the exact solution.
    pub fn source(&self, a: usize, x: T, y: T, t: T) -> T {
        let u = [self.exact(0, x, y, t), self.exact(1, x, y, t)];
        let f = self.base_f(a, u);
        match self.exact {
            ExactKind::Constant => f,
            ExactKind::SineDecay => {
                let pi = T::lit(PI);
                let (kx, ky) = (pi / self.l[0], pi / self.l[1]);
                let amp = self.amplitude[a] * (-t).exp();
                let ux = amp * kx * (kx * x).cos() * (ky * y).sin();
                let uy = amp * ky * (kx * x).sin() * (ky * y).cos();
                let lap = -(kx * kx + ky * ky) * u[a];
                -u[a] - self.eps[a] * lap + self.velocity[a][0] * ux + self.velocity[a][1] * uy + f
            }
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec<T>> {
        if !(self.kappa > self.mu + self.gamma && self.mu >= T::zero() && self.gamma >= T::zero()) {
            return Err(Error::InvalidParameter("need kappa > mu + gamma with mu, gamma >= 0".into()));
        }
        let comp = |a: usize| {
            let (c1, c2, c3, c4) = (*self, *self, *self, *self);
            let f: ReactionFn<T> = Arc::new(move |x, y, t, u1, u2| c1.base_f(a, [u1, u2]) - c1.source(a, x, y, t));
            let own: ReactionFn<T> = Arc::new(move |_, _, _, u1, u2| c2.kappa + c2.gamma * [u1, u2][a].cos());
            let mu = self.mu;
            let cross: ReactionFn<T> = Arc::new(move |_, _, _, _, _| -mu);
            Component::new(self.eps[a], f, own, cross)
                .with_velocity(constant_st(self.velocity[a][0]), constant_st(self.velocity[a][1]))
                .with_boundary(Arc::new(move |x, y, t| c3.exact(a, x, y, t)))
                .with_initial(Arc::new(move |x, y| c4.exact(a, x, y, T::zero())))
                .with_bounds(constant_st(self.kappa + self.gamma), constant_st(self.kappa - self.gamma), constant_st(mu))
        };
        let k = self.amplitude[0].abs().max(self.amplitude[1].abs()) + T::one();
        Ok(ProblemSpec::new("manufactured", QuasiMonotoneClass::Nondecreasing, comp(0), comp(1))
            .with_sector(Arc::new(move |_, _, _| ([-k; 2], [k; 2]))))
    }

    /// Constant bracket `[-K, K]` large enough to dominate the source.
    pub fn bracket(&self, problem: &ProblemSpec<T>, mesh: &Mesh<T>) -> Result<Bracket<T>> {
        let mut smax = T::zero();
        let mut umax = T::zero();
        for m in 0..=mesh.nt() {
            for i in 0..=mesh.nx() {
                for j in 0..=mesh.ny() {
                    let (x, y, t) = (mesh.x(i), mesh.y(j), mesh.t(m));
                    for a in 0..2 {
                        smax = smax.max(self.source(a, x, y, t).abs());
                        umax = umax.max(self.exact(a, x, y, t).abs());
                    }
                }
            }
        }
        let k = T::lit(1.1) * ((smax + self.gamma) / (self.kappa - self.mu)).max(umax);
        let psi = |a: usize| Field::from_fn(mesh, |x, y| self.exact(a, x, y, T::zero()));
        let c = |v: T| Field::constant(mesh.nx(), mesh.ny(), v);
        let mut lower = vec![[psi(0), psi(1)]];
        let mut upper = lower.clone();
        for _ in 1..=mesh.nt() {
            lower.push([c(-k), c(-k)]);
            upper.push([c(k), c(k)]);
        }
        Bracket::from_trajectories(problem, mesh, lower, upper)
    }

    /// Max-norm error of `u` against the exact solution at level `m`.
    pub fn error(&self, mesh: &Mesh<T>, u: &Pair<T>, m: usize) -> T {
        let mut e = T::zero();
        for (a, f) in u.iter().enumerate() {
            for i in 0..=mesh.nx() {
                for j in 0..=mesh.ny() {
                    e = e.max((f.get(i, j) - self.exact(a, mesh.x(i), mesh.y(j), mesh.t(m))).abs());
                }
            }
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    /// `tau` proportional to `h`.
    Linear,
    /// `tau` proportional to `h^2`.
    Quadratic,
}

/// Square meshes with `n` cells per side and `tau = factor * h` or `factor * h^2`.
pub fn mesh_sequence<T: Real>(cells: &[usize], t_final: T, factor: T, refinement: Refinement) -> Result<Vec<Mesh<T>>> {
    cells
        .iter()
        .map(|&n| {
            let h = T::one() / T::from_usize(n).unwrap();
            let tau = match refinement {
                Refinement::Linear => factor * h,
                Refinement::Quadratic => factor * h * h,
            };
            let nt = (t_final / tau).ceil().to_usize().unwrap_or(1).max(1);
            Mesh::new(T::one(), T::one(), t_final, n, n, nt)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub h: Vec<f64>,
    pub tau: Vec<f64>,
    pub errors: Vec<f64>,
    pub iterations: Vec<usize>,
    pub slope: Option<f64>,
    pub status: String,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Final-time max-norm error of the monotone solver on each mesh and the fitted order in `h`.
pub fn convergence_order<T: Real>(case: &ManufacturedCase<T>, meshes: &[Mesh<T>], policy: &TimeStepPolicy<T>) -> Result<ConvergenceStudy> {
    if meshes.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 meshes, got {}", meshes.len())));
    }
    let problem = case.problem()?;
    let mut study = ConvergenceStudy { h: vec![], tau: vec![], errors: vec![], iterations: vec![], slope: None, status: String::new() };
    for mesh in meshes {
        let bracket = case.bracket(&problem, mesh)?;
        let run = march(&problem, mesh, SweepVariant::GaussSeidel, policy, &bracket)?;
        let nt = mesh.nt();
        study.h.push(mesh.hx.as_f64());
        study.tau.push(mesh.tau.as_f64());
        study.errors.push(case.error(mesh, &run.solution(nt), nt).as_f64());
        study.iterations.push(run.report.total_iterations);
    }
    // an exact solution is only reproduced to within the stopping-rule bound
    let floor = meshes.iter().map(|m| 10.0 * m.spec.t_final.as_f64() * policy.delta.as_f64()).fold(1e-12, f64::max);
    if study.errors.iter().all(|&e| e <= floor) {
        study.status = "skipped: exact solution reproduced on every mesh".into();
    } else {
        study.slope = Some(log_slope(&study.h, &study.errors));
        study.status = "fitted".into();
    }
    Ok(study)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve() {
        let a = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(dense_solve(&a, &[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn hilbert_row_sums() {
        let n = 4;
        let h: Vec<f64> = (0..n * n).map(|k| 1.0 / ((k / n + k % n + 1) as f64)).collect();
        let b: Vec<f64> = (0..n).map(|r| h[r * n..(r + 1) * n].iter().sum()).collect();
        for v in dense_solve(&h, &b).unwrap() {
            assert!((v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn singular_is_reported() {
        assert!(dense_solve(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.5, 0.25, 0.125];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((log_slope(&x, &y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn needs_three_meshes() {
        let case = ManufacturedCase::<f64>::upwind();
        let meshes = mesh_sequence(&[4, 8], 0.1, 0.5, Refinement::Linear).unwrap();
        assert!(convergence_order(&case, &meshes, &TimeStepPolicy::default()).is_err());
    }
}
