//! Implicit upwind five-point scheme written line by line.

use crate::blocksolve::TriDiag;
use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh, Pair};
use crate::reaction::{ordered, Advection, ProblemSpec};
use crate::scalar::{max_abs, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilCoeffs<T> {
    pub l: T,
    pub r: T,
    pub b: T,
    pub t: T,
    pub d: T,
}

/// Split `ε/h²` and the velocity term between the two neighbours of one axis.
fn split<T: Real>(diff: T, v: T, h: T, mode: Advection) -> (T, T) {
    let adv = v.abs() / h;
    match (mode, v >= T::zero()) {
        (Advection::Upwind, true) => (diff + adv, diff),
        (Advection::Upwind, false) => (diff, diff + adv),
        (Advection::Downwind, true) => (diff, diff - adv),
        (Advection::Downwind, false) => (diff - adv, diff),
    }
}

pub fn stencil<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, a: usize, i: usize, j: usize, m: usize) -> Result<StencilCoeffs<T>> {
    let c = &problem.components[a];
    let (x, y, t) = (mesh.x(i), mesh.y(j), mesh.t(m));
    let (v1, v2) = ((c.vel1)(x, y, t), (c.vel2)(x, y, t));
    if !(v1.is_finite() && v2.is_finite() && c.eps.is_finite()) {
        return Err(Error::NonFinite(format!("velocity or diffusion of component {a}")));
    }
    let (l, r) = split(c.eps / (mesh.hx * mesh.hx), v1, mesh.hx, problem.advection);
    let (b, tp) = split(c.eps / (mesh.hy * mesh.hy), v2, mesh.hy, problem.advection);
    Ok(StencilCoeffs { l, r, b, t: tp, d: T::one() / mesh.tau + l + r + b + tp })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Boundary values are taken from the problem's `g`.
    Data,
    /// Boundary values are taken from the field being evaluated.
    Field,
}

/// Line `i` of component `a` at level `m`: `A U_i - L U_{i-1} - R U_{i+1} + G*`.
#[derive(Debug, Clone)]
pub struct LineBlockSystem<T> {
    pub alpha: usize,
    pub i: usize,
    pub m: usize,
    pub first: bool,
    pub last: bool,
    pub x: T,
    pub t: T,
    pub ys: Vec<T>,
    pub inv_tau: T,
    pub diag: Vec<T>,
    pub below: Vec<T>,
    pub above: Vec<T>,
    pub left: Vec<T>,
    pub right: Vec<T>,
    pub gstar: Vec<T>,
}

impl<T: Real> LineBlockSystem<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }
    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A + shift I`.
    pub fn matrix(&self, shift: T) -> TriDiag<T> {
        let n = self.len();
        TriDiag {
            sub: (1..n).map(|k| -self.below[k]).collect(),
            diag: self.diag.iter().map(|&d| d + shift).collect(),
            sup: (0..n.saturating_sub(1)).map(|k| -self.above[k]).collect(),
        }
    }

    /// Nonnegative couplings and `d - (l + r + b + t) = 1/τ` on every row.
    pub fn is_m_matrix(&self) -> bool {
        let nonneg = |v: &[T]| v.iter().all(|&x| x >= T::zero());
        if !(nonneg(&self.left) && nonneg(&self.right) && nonneg(&self.below) && nonneg(&self.above)) {
            return false;
        }
        let tol = T::lit(1e-12);
        self.matrix(T::zero()).strictly_dominant()
            && (0..self.len()).all(|k| {
                let d = self.diag[k];
                let margin = d - (self.left[k] + self.right[k] + self.below[k] + self.above[k]);
                d > T::zero() && (margin - self.inv_tau).abs() <= tol * d
            })
    }

    /// Boundary couplings of this line read from `field`'s boundary ring.
    pub fn boundary_term(&self, field: &Field<T>) -> Vec<T> {
        let n = self.len();
        let ny = n + 1;
        let mut g = vec![T::zero(); n];
        g[0] -= self.below[0] * field.get(self.i, 0);
        g[n - 1] -= self.above[n - 1] * field.get(self.i, ny);
        if self.first {
            for (k, gk) in g.iter_mut().enumerate() {
                *gk -= self.left[k] * field.get(0, k + 1);
            }
        }
        if self.last {
            for (k, gk) in g.iter_mut().enumerate() {
                *gk -= self.right[k] * field.get(self.i + 1, k + 1);
            }
        }
        g
    }

    /// `A U_i - L U_{i-1} - R U_{i+1}` with the boundary couplings left out.
    pub fn apply(&self, left: &[T], center: &[T], right: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|k| {
                let mut v = self.diag[k] * center[k];
                if k > 0 {
                    v -= self.below[k] * center[k - 1];
                }
                if k + 1 < n {
                    v -= self.above[k] * center[k + 1];
                }
                if !self.first {
                    v -= self.left[k] * left[k];
                }
                if !self.last {
                    v -= self.right[k] * right[k];
                }
                v
            })
            .collect()
    }

    /// Residual of the nonlinear scheme on this line.
    #[allow(clippy::too_many_arguments)]
    pub fn residual(
        &self,
        problem: &ProblemSpec<T>,
        left: &[T],
        center: &[T],
        right: &[T],
        prev: &[T],
        other: &[T],
        gstar: &[T],
    ) -> Vec<T> {
        let mut out = self.apply(left, center, right);
        for (k, o) in out.iter_mut().enumerate() {
            let u = ordered(self.alpha, center[k], other[k]);
            *o += problem.f(self.alpha, self.x, self.ys[k], self.t, u) - self.inv_tau * prev[k] + gstar[k];
        }
        out
    }
}

pub fn assemble_line<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, a: usize, i: usize, m: usize) -> Result<LineBlockSystem<T>> {
    if i == 0 || i >= mesh.nx() {
        return Err(Error::IndexOutOfRange { i, j: 0, nx: mesh.nx(), ny: mesh.ny() });
    }
    if m == 0 || m > mesh.nt() {
        return Err(Error::InvalidParameter(format!("time level {m} outside 1..={}", mesh.nt())));
    }
    let n = mesh.line_len();
    let mut sys = LineBlockSystem {
        alpha: a,
        i,
        m,
        first: i == 1,
        last: i == mesh.nx() - 1,
        x: mesh.x(i),
        t: mesh.t(m),
        ys: (1..=n).map(|j| mesh.y(j)).collect(),
        inv_tau: T::one() / mesh.tau,
        diag: Vec::with_capacity(n),
        below: Vec::with_capacity(n),
        above: Vec::with_capacity(n),
        left: Vec::with_capacity(n),
        right: Vec::with_capacity(n),
        gstar: Vec::new(),
    };
    for j in 1..=n {
        let s = stencil(problem, mesh, a, i, j, m)?;
        sys.diag.push(s.d);
        sys.below.push(s.b);
        sys.above.push(s.t);
        sys.left.push(s.l);
        sys.right.push(s.r);
    }
    sys.gstar = sys.boundary_term(&boundary_field(problem, mesh, a, m));
    if sys.gstar.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("boundary data of component {a}")));
    }
    Ok(sys)
}

/// Field carrying `g_a(·, t_m)` on the boundary ring and zero inside.
pub fn boundary_field<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, a: usize, m: usize) -> Field<T> {
    let t = mesh.t(m);
    let mut f = Field::for_mesh(mesh);
    for i in 0..=mesh.nx() {
        for j in 0..=mesh.ny() {
            if i == 0 || j == 0 || i == mesh.nx() || j == mesh.ny() {
                f.set(i, j, problem.g(a, mesh.x(i), mesh.y(j), t));
            }
        }
    }
    f
}

/// Every line of both components at level `m`.
pub fn assemble_level<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, m: usize) -> Result<[Vec<LineBlockSystem<T>>; 2]> {
    let lines = |a| (1..mesh.nx()).map(|i| assemble_line(problem, mesh, a, i, m)).collect::<Result<Vec<_>>>();
    Ok([lines(0)?, lines(1)?])
}

#[allow(clippy::too_many_arguments)]
pub fn residual_line<T: Real>(
    problem: &ProblemSpec<T>,
    mesh: &Mesh<T>,
    a: usize,
    i: usize,
    m: usize,
    lines: [&[T]; 3],
    prev: &[T],
    other: &[T],
) -> Result<Vec<T>> {
    let sys = assemble_line(problem, mesh, a, i, m)?;
    let n = sys.len();
    for v in lines.iter().chain([&prev, &other]) {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    Ok(sys.residual(problem, lines[0], lines[1], lines[2], prev, other, &sys.gstar))
}

/// Interior residual of component `a`, line-major.
pub fn field_residual<T: Real>(
    problem: &ProblemSpec<T>,
    systems: &[LineBlockSystem<T>],
    own: &Field<T>,
    other: &Field<T>,
    prev: &Field<T>,
    mode: BoundaryMode,
) -> Vec<T> {
    let mut out = Vec::with_capacity(systems.len() * systems.first().map_or(0, |s| s.len()));
    for sys in systems {
        let i = sys.i;
        let own_g;
        let g = match mode {
            BoundaryMode::Data => &sys.gstar,
            BoundaryMode::Field => {
                own_g = sys.boundary_term(own);
                &own_g
            }
        };
        out.extend(sys.residual(
            problem,
            own.interior_line(i - 1),
            own.interior_line(i),
            own.interior_line(i + 1),
            prev.interior_line(i),
            other.interior_line(i),
            g,
        ));
    }
    out
}

/// Max-norm of the scheme residual over both components and all interior points.
pub fn residual_norm<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, u: &Pair<T>, prev: &Pair<T>, m: usize) -> Result<T> {
    let systems = assemble_level(problem, mesh, m)?;
    let mut norm = T::zero();
    for a in 0..2 {
        let r = field_residual(problem, &systems[a], &u[a], &u[1 - a], &prev[a], BoundaryMode::Data);
        norm = norm.max(max_abs(&r));
    }
    Ok(norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::{constant_st, Component, QuasiMonotoneClass};
    use std::sync::Arc;

    fn diffusion(v1: f64) -> ProblemSpec<f64> {
        let z: crate::reaction::ReactionFn<f64> = Arc::new(|_, _, _, _, _| 0.0);
        let c = Component::new(1.0, z.clone(), z.clone(), z).with_velocity(constant_st(v1), constant_st(0.0));
        ProblemSpec::new("diffusion", QuasiMonotoneClass::Nondecreasing, c.clone(), c)
    }

    fn mesh() -> Mesh<f64> {
        Mesh::new(1.0, 1.0, 0.5, 2, 2, 2).unwrap()
    }

    #[test]
    fn pure_diffusion_coefficients() {
        let s = stencil(&diffusion(0.0), &mesh(), 0, 1, 1, 1).unwrap();
        assert_eq!(s, StencilCoeffs { l: 4.0, r: 4.0, b: 4.0, t: 4.0, d: 20.0 });
    }

    #[test]
    fn upwind_switches_with_sign() {
        let s = stencil(&diffusion(2.0), &mesh(), 0, 1, 1, 1).unwrap();
        assert_eq!((s.l, s.r), (8.0, 4.0));
        let s = stencil(&diffusion(-2.0), &mesh(), 0, 1, 1, 1).unwrap();
        assert_eq!((s.l, s.r), (4.0, 8.0));
        assert_eq!(s.d, 4.0 + 8.0 + 4.0 + 4.0 + 4.0);
    }

    #[test]
    fn forward_difference_is_first_order() {
        // l U_{i-1} + r U_{i+1} - (l + r) U_i reproduces ε u_xx - v u_x up to O(h)
        let (eps, v) = (1.0, -2.0);
        let u = |x: f64| (1.3 * x).sin();
        let exact = |x: f64| -eps * 1.69 * (1.3 * x).sin() - v * 1.3 * (1.3 * x).cos();
        let mut errs = Vec::new();
        for &h in &[0.1, 0.05, 0.025] {
            let (l, r) = split(eps / (h * h), v, h, Advection::Upwind);
            let x = 0.4;
            let approx = l * u(x - h) + r * u(x + h) - (l + r) * u(x);
            errs.push((approx - exact(x)).abs());
        }
        assert!(errs[0] / errs[1] > 1.8 && errs[1] / errs[2] > 1.8);
        let (l, r) = split(eps, v, 0.1, Advection::Upwind);
        assert!(l >= 0.0 && r >= 0.0);
    }

    #[test]
    fn zero_data_has_zero_residual() {
        let m = Mesh::new(1.0, 1.0, 1.0, 4, 4, 2).unwrap();
        let p = diffusion(0.0);
        let z = [Field::for_mesh(&m), Field::for_mesh(&m)];
        assert_eq!(residual_norm(&p, &m, &z, &z.clone(), 1).unwrap(), 0.0);
        let zl = vec![0.0; 3];
        let r = residual_line(&p, &m, 1, 2, 1, [&zl, &zl, &zl], &zl, &zl).unwrap();
        assert_eq!(r, vec![0.0; 3]);
        assert!(residual_line(&p, &m, 1, 2, 1, [&zl, &zl, &zl[..2]], &zl, &zl).is_err());
    }

    #[test]
    fn folded_boundary_matches_field_mode() {
        let m = Mesh::new(1.0, 1.0, 1.0, 4, 5, 2).unwrap();
        let mut p = diffusion(1.5);
        p.components[0].g = Arc::new(|x, y, _| 1.0 + x * y);
        let sys = assemble_level(&p, &m, 1).unwrap();
        let mut u = Field::from_fn(&m, |x, y| (x + 2.0 * y).cos());
        u.copy_boundary(&boundary_field(&p, &m, 0, 1));
        let z = Field::for_mesh(&m);
        let a = field_residual(&p, &sys[0], &u, &z, &z, BoundaryMode::Data);
        let b = field_residual(&p, &sys[0], &u, &z, &z, BoundaryMode::Field);
        assert!(max_abs(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>()) < 1e-12);
        for s in &sys[0] {
            assert!(s.is_m_matrix());
        }
    }

    #[test]
    fn downwind_is_not_an_m_matrix() {
        let m = Mesh::new(1.0, 1.0, 1.0, 4, 4, 2).unwrap();
        let mut p = diffusion(40.0);
        p.advection = Advection::Downwind;
        let s = assemble_line(&p, &m, 0, 1, 1).unwrap();
        assert!(!s.is_m_matrix());
    }
}
